//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Log2 values are compared as strings at one decimal (round half-up), group
//! orders and field identities exactly; there are no floating tolerances.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::One;

use fftower::oracle::cross_check;
use fftower::orders::{order_rows, paper_lower_bound, verify_lemma21, Factorizer, OrderRow};
use fftower::towers::{new_tower, Condition, Family, TowerSpec, TowerState, DEFAULT_NORM_CAP};

type Outcome = Result<String, String>;

fn reference(q: u64, family: Family, levels: usize) -> Result<TowerState, String> {
    let spec = TowerSpec::with_reference_seed(q, family).map_err(|e| e.to_string())?;
    TowerState::build(spec, levels).map_err(|e| format!("{family} q={q}: {e}"))
}

fn rows(t: &TowerState, levels: usize, delta: bool) -> Result<Vec<OrderRow>, String> {
    order_rows(t, levels, delta, &Factorizer::default()).map_err(|e| e.to_string())
}

fn compare(what: &str, got: &[String], want: &[&str]) -> Result<(), String> {
    if got.iter().map(String::as_str).eq(want.iter().copied()) {
        Ok(())
    } else {
        Err(format!("{what}: got {got:?}, expected {want:?}"))
    }
}

fn x_col(rows: &[OrderRow]) -> Vec<String> {
    rows.iter().map(|r| r.x.log2_order.clone()).collect()
}

fn d_col(rows: &[OrderRow]) -> Vec<String> {
    rows.iter().map(|r| r.delta.as_ref().map(|d| d.log2_order.clone()).unwrap_or_default()).collect()
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let el = start.elapsed();
    if el <= limit {
        Ok(())
    } else {
        Err(format!("took {el:.1?}, limit {limit:?}"))
    }
}

fn first_family_q3() -> Outcome {
    let start = Instant::now();
    let spec = TowerSpec::family(3, Family::F1, vec![2, 1]).map_err(|e| e.to_string())?;
    let t = TowerState::build(spec, 5).map_err(|e| e.to_string())?;
    let r = rows(&t, 5, true)?;
    let want = ["3.0", "6.3", "12.7", "25.4", "50.7"];
    compare("x", &x_col(&r), &want)?;
    compare("delta", &d_col(&r), &want)?;
    for row in &r {
        let full = BigUint::from(3u32).pow(1 << row.n) - 1u32;
        let d = row.delta.as_ref().unwrap();
        if !(row.x.is_exact() && d.is_exact() && row.x.order == full && d.order == full) {
            return Err(format!("n={}: orders are not the full group {full}", row.n));
        }
    }
    within(Duration::from_secs(60), start)?;
    Ok("x_n and delta_n generate the full group for n = 1..5".into())
}

fn first_family_breadth() -> Outcome {
    let start = Instant::now();
    let cases: [(u64, [&str; 4], [&str; 4]); 3] = [
        (5, ["4.6", "9.3", "18.6", "37.2"], ["3.0", "9.3", "18.6", "37.2"]),
        (7, ["5.6", "11.2", "22.5", "44.9"], ["5.6", "11.2", "22.5", "44.9"]),
        (11, ["6.9", "13.8", "27.7", "55.4"], ["5.3", "13.8", "27.7", "55.4"]),
    ];
    for (q, x, d) in cases {
        let t = reference(q, Family::F1, 4)?;
        let r = rows(&t, 4, true)?;
        compare(&format!("q={q} x"), &x_col(&r), &x)?;
        compare(&format!("q={q} delta"), &d_col(&r), &d)?;
    }
    within(Duration::from_secs(300), start)?;
    Ok("q = 5, 7, 11 columns match for n = 1..4".into())
}

fn discriminant_decay() -> Outcome {
    for (q, want) in [(3u64, ["3.0", "4.0", "5.0", "6.0"]), (5, ["4.6", "5.6", "6.6", "7.6"])] {
        let t = reference(q, Family::F3, 4)?;
        compare(&format!("q={q} delta"), &d_col(&rows(&t, 4, true)?), &want)?;
        let f = t.field();
        let d1 = t.delta(1).unwrap();
        for n in 2..=4 {
            if !t.verify_discriminant_recurrence(n).map_err(|e| e.to_string())? {
                return Err(format!("q={q}: recurrence fails at n={n}"));
            }
            if f.pow(t.delta(n).unwrap(), &(BigUint::one() << (n - 1))) != *d1 {
                return Err(format!("q={q}: delta_{n}^(2^{}) != delta_1", n - 1));
            }
        }
    }
    Ok("delta columns, recurrences and delta_n^(2^(n-1)) = delta_1 hold".into())
}

fn fifth_family_seeds() -> Outcome {
    // x^2 + 4x + 2 over GF(5) is x^2 = x + 3; x^2 + 5x + 5 over GF(7) is x^2 = 2x + 2
    for (q, seed) in [(5u64, vec![1, 3]), (7, vec![2, 2])] {
        let spec = TowerSpec::family(q, Family::F5, seed).map_err(|e| e.to_string())?;
        let t = new_tower(spec).map_err(|e| format!("q={q}: {e}"))?;
        if !t.level(1).unwrap().certificates.iter().all(|c| c.holds) {
            return Err(format!("q={q}: seed certificates incomplete"));
        }
    }
    let spec = TowerSpec::family(5, Family::F5, vec![1, 3]).map_err(|e| e.to_string())?;
    let t = TowerState::build(spec, 3).map_err(|e| e.to_string())?;
    compare("q=5 x", &x_col(&rows(&t, 3, false)?), &["4.6", "9.3", "18.6"])?;
    Ok("both seeds certify; q = 5 x column matches".into())
}

fn even_towers() -> Outcome {
    let mut notes = Vec::new();
    for family in Family::EVEN {
        let t = reference(2, family, 4)?;
        let r = rows(&t, 4, false)?;
        compare(&format!("{family}"), &x_col(&r), &["6.0", "18.0", "54.0", "162.0"])?;
        for row in &r[..3] {
            let full = BigUint::from(4u32).pow(3u32.pow(row.n as u32)) - 1u32;
            if !(row.x.is_exact() && row.x.order == full) {
                return Err(format!("{family} n={}: order is not 4^(3^n) - 1", row.n));
            }
        }
        notes.push(format!("{family} n=4 {}", r[3].kind().as_str()));
    }
    Ok(notes.join(", "))
}

fn bound_suite() -> Outcome {
    let mut towers = vec![
        (TowerState::build(TowerSpec::family(3, Family::F1, vec![2, 1]).unwrap(), 5).map_err(|e| e.to_string())?, 5),
    ];
    for q in [5, 7, 11] {
        towers.push((reference(q, Family::F1, 4)?, 4));
    }
    for q in [3, 5] {
        towers.push((reference(q, Family::F3, 4)?, 4));
    }
    towers.push((TowerState::build(TowerSpec::family(5, Family::F5, vec![1, 3]).unwrap(), 3).unwrap(), 3));
    for family in Family::EVEN {
        towers.push((reference(2, family, 4)?, 4));
    }
    let mut checked = 0;
    for (t, levels) in &towers {
        let family = t.spec().family;
        let q = t.spec().q;
        let with_delta = matches!(family, Family::F1 | Family::F2);
        for row in rows(t, *levels, with_delta)? {
            let bound = paper_lower_bound(q, row.n, t.is_char2());
            let mut orders = vec![("x", &row.x)];
            if let Some(d) = &row.delta {
                orders.push(("delta", d));
            }
            for (name, r) in orders {
                if r.order <= bound {
                    return Err(format!("{family} q={q}: o({name}_{}) = {} <= {bound}", row.n, r.order));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} orders exceed their bounds"))
}

fn condition_suite() -> Outcome {
    let mut checked = 0;
    for family in Family::ODD {
        for q in [3, 5, 7, 11] {
            let t = reference(q, family, 6)?;
            for n in 2..=6 {
                for cond in t.applicable_conditions() {
                    let expected = match family {
                        Family::F1 | Family::F2 => [Condition::C1, Condition::C2],
                        _ => [Condition::C1, Condition::C2Prime],
                    };
                    if !expected.contains(&cond) {
                        return Err(format!("{family}: unexpected condition {cond}"));
                    }
                    if !t.check_condition(n, cond).map_err(|e| e.to_string())?.holds {
                        return Err(format!("{family} q={q} n={n}: {cond} fails"));
                    }
                    checked += 1;
                }
            }
        }
    }
    for family in Family::EVEN {
        let t = reference(2, family, 6)?;
        for n in 2..=6 {
            if !t.check_condition(n, Condition::C3).map_err(|e| e.to_string())?.holds {
                return Err(format!("{family} n={n}: C3 fails"));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} condition checks, no failures"))
}

fn identity_suite() -> Outcome {
    let mut checked = 0;
    for (q, family) in [(3u64, Family::F1), (5, Family::F2)] {
        let t = reference(q, family, 5)?;
        for n in 1..=5 {
            for j in 0..n {
                let c = t.verify_norm_identity(n, j, DEFAULT_NORM_CAP).map_err(|e| e.to_string())?;
                if !c.holds || c.lhs_square != Some(true) {
                    return Err(format!("{family} q={q} (n, j) = ({n}, {j})"));
                }
                checked += 1;
            }
        }
    }
    for family in Family::EVEN {
        let t = reference(2, family, 4)?;
        for n in 1..=4 {
            for j in 0..n {
                let c = t.verify_norm_identity(n, j, DEFAULT_NORM_CAP).map_err(|e| e.to_string())?;
                if !c.holds {
                    return Err(format!("{family} (n, j) = ({n}, {j})"));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} norm identities hold exactly"))
}

fn oracle_equivalence() -> Outcome {
    let t = TowerState::build(TowerSpec::family(3, Family::F1, vec![2, 1]).unwrap(), 2).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    for n in 1..=2 {
        let r = cross_check(&t, n).map_err(|e| e.to_string())?;
        parts.push(format!("GF({})", r.field_size));
    }
    let t = reference(2, Family::F6, 1)?;
    let r = cross_check(&t, 1).map_err(|e| e.to_string())?;
    parts.push(format!("GF({})", r.field_size));
    Ok(format!("cross_check passes on {}", parts.join(", ")))
}

fn sum_lemma() -> Outcome {
    let fz = Factorizer::default();
    let mut failures = BTreeSet::new();
    let mut checked = 0;
    let mut skipped = 0;
    for a in [3u64, 5, 7, 9, 11, 4] {
        for ell in [2u64, 3] {
            if a % ell != 1 {
                skipped += 6;
                continue;
            }
            for b in 0..3u32 {
                for c in b + 1..=3 {
                    let r = verify_lemma21(a, ell, b, c, &fz).map_err(|e| e.to_string())?;
                    checked += 1;
                    if !r.holds() {
                        failures.insert((a, ell, b, c));
                    }
                }
            }
        }
    }
    if failures.is_empty() {
        Ok(format!("{checked} tuples hold ({skipped} outside a = 1 mod l)"))
    } else {
        let list: Vec<String> = failures.iter().map(|(a, l, b, c)| format!("({a},{l},{b},{c})")).collect();
        Err(format!(
            "{} of {checked} tuples fail: {}; every failure has b = 0 with S_0/2 = (a+1)/2 even",
            failures.len(),
            list.join(" ")
        ))
    }
}

// Tuples where the prime-size claim is false at b = 0: l = 2 and a = 3 mod 4.
fn expected_sum_lemma_failures() -> String {
    let list: Vec<String> =
        [3, 7, 11].iter().flat_map(|a| (1..=3).map(move |c| format!("({a},2,0,{c})"))).collect();
    list.join(" ")
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("orders of the first family, q = 3", first_family_q3),
        ("orders of the first family, q = 5, 7, 11", first_family_breadth),
        ("discriminant order decay", discriminant_decay),
        ("fifth family seeds", fifth_family_seeds),
        ("characteristic 2 towers", even_towers),
        ("lower bounds", bound_suite),
        ("conditions", condition_suite),
        ("norm identities", identity_suite),
        ("oracle equivalence", oracle_equivalence),
        ("cyclotomic sum checks", sum_lemma),
    ];
    let mut unexpected = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let el = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({el:.2?}): {detail}", i + 1),
            Err(detail) => {
                println!("FAIL {:>2} {name} ({el:.2?}): {detail}", i + 1);
                // the sum check is known to fail at b = 0; anything else is a regression
                let known = i == 9 && detail.contains(&expected_sum_lemma_failures()) && detail.starts_with("9 of ");
                if !known {
                    unexpected += 1;
                }
            }
        }
    }
    if unexpected > 0 {
        println!("{unexpected} unexpected failure(s)");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
