//! `fftower`: build finite-field towers, certify them and tabulate the
//! multiplicative orders of their generators.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde::Serialize;

use fftower::oracle::{cross_check, MAX_FIELD_SIZE};
use fftower::orders::{
    order_rows, paper_lower_bound, FactorConfig, Factorizer, HintSet, OrderKind, OrderResult, OrderRow,
};
use fftower::residues::{is_nth_residue, is_square_or_zero};
use fftower::towers::{find_initial, reference_seed, Family, TowerSpec, TowerState, DEFAULT_NORM_CAP};
use fftower::Error;

const EXIT_USAGE: u8 = 2;
const EXIT_CERTIFICATION: u8 = 3;
const EXIT_BUDGET: u8 = 4;

#[derive(Parser)]
#[command(name = "fftower", version, about = "Recursive finite-field towers and the orders of their generators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build, certify and tabulate towers.
    #[command(subcommand)]
    Tower(TowerCommand),
    /// Factor an integer with the group-order pipeline.
    Factor(FactorArgs),
    /// Brute-force checks on small fields.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Subcommand)]
enum TowerCommand {
    /// Construct and certify a tower; prints per-level certificates.
    Build(BuildArgs),
    /// Multiplicative orders of x_n (and delta_n) per level.
    Orders(OrdersArgs),
    /// Check conditions, recurrences, norm identities, residues and bounds.
    Verify(VerifyArgs),
    /// Find the first certified initial polynomial for a family.
    SearchInitial(FamilyArgs),
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Cross-check every enumerable level of a family's reference tower.
    Check(FamilyArgs),
}

#[derive(Args)]
struct FamilyArgs {
    #[arg(long)]
    q: u64,
    #[arg(long)]
    family: String,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    q: u64,
    #[arg(long)]
    family: String,
    /// Odd q: `a,b` with x_1^2 = a x_1 + b. q = 2: base modulus coefficients,
    /// low degree first, including the leading 1.
    #[arg(long, conflicts_with = "x1_auto")]
    x1: Option<String>,
    /// Search for the first certified initial polynomial.
    #[arg(long)]
    x1_auto: bool,
    #[arg(long, default_value_t = 1)]
    levels: usize,
    /// Write the tower spec as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BudgetArgs {
    /// Factoring budget in seconds (defaults to FFTOWER_FACTOR_BUDGET, else 300).
    #[arg(long)]
    budget: Option<f64>,
    /// Pollard p-1 stage-1 bound.
    #[arg(long, default_value_t = 100_000)]
    pm1_bound: u64,
    /// Verified factorizations to consult first (JSON).
    #[arg(long)]
    hints: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct OrdersArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    levels: usize,
    /// Also report the order of delta_n.
    #[arg(long)]
    delta: bool,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Emit certified-divisor rows instead of failing when a factorization
    /// is incomplete.
    #[arg(long)]
    partial_ok: bool,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    levels: usize,
    /// Highest level for norm identities.
    #[arg(long, default_value_t = DEFAULT_NORM_CAP)]
    norm_cap: usize,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Args)]
struct FactorArgs {
    #[arg(long)]
    value: String,
    #[arg(long)]
    partial_ok: bool,
    #[command(flatten)]
    budget: BudgetArgs,
}

/// A failure with its process exit status.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }

    fn certification(message: impl Into<String>) -> Self {
        Failure { code: EXIT_CERTIFICATION, message: message.into() }
    }

    fn budget(message: impl Into<String>) -> Self {
        Failure { code: EXIT_BUDGET, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::CertificateFailed(_)
            | Error::ReducibleInitial(_)
            | Error::OracleMismatch { .. }
            | Error::SearchFailed(_) => EXIT_CERTIFICATION,
            Error::BudgetExceeded(_) => EXIT_BUDGET,
            Error::InvalidSpec(_)
            | Error::Parse(_)
            | Error::NotPrime(_)
            | Error::BadHint(_)
            | Error::FieldTooLarge(_) => EXIT_USAGE,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = String::new();
    let result = match cli.command {
        Command::Tower(TowerCommand::Build(args)) => tower_build(args, &mut out),
        Command::Tower(TowerCommand::Orders(args)) => tower_orders(args, &mut out),
        Command::Tower(TowerCommand::Verify(args)) => tower_verify(args, &mut out),
        Command::Tower(TowerCommand::SearchInitial(args)) => search_initial(args, &mut out),
        Command::Factor(args) => factor(args, &mut out),
        Command::Oracle(OracleCommand::Check(args)) => oracle_check(args, &mut out),
    };
    print!("{out}");
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn parse_family(s: &str) -> CliResult<Family> {
    Family::from_str(s).map_err(|e| Failure::usage(e.to_string()))
}

fn parse_coeffs(s: &str) -> CliResult<Vec<u64>> {
    s.split(',')
        .map(|t| t.trim().parse::<u64>().map_err(|_| Failure::usage(format!("bad coefficient {t:?} in {s:?}"))))
        .collect()
}

fn read_spec(path: &Path) -> CliResult<TowerSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn factorizer(args: &BudgetArgs) -> CliResult<Factorizer> {
    let mut config = FactorConfig::from_env();
    if let Some(secs) = args.budget {
        if !(secs.is_finite() && secs >= 0.0) {
            return Err(Failure::usage(format!("invalid budget {secs}")));
        }
        config.budget = Duration::from_secs_f64(secs);
    }
    config.pm1_bound = args.pm1_bound;
    let mut f = Factorizer::new(config);
    if let Some(path) = &args.hints {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        f = f.with_hints(HintSet::from_json(&text)?);
    }
    Ok(f)
}

fn build_state(spec: TowerSpec, levels: usize) -> CliResult<TowerState> {
    if levels == 0 {
        return Err(Failure::usage("--levels must be at least 1"));
    }
    Ok(TowerState::build(spec, levels)?)
}

fn tower_build(args: BuildArgs, out: &mut String) -> CliResult<()> {
    let family = parse_family(&args.family)?;
    let spec = match (&args.x1, args.x1_auto) {
        (Some(x1), _) => TowerSpec::family(args.q, family, parse_coeffs(x1)?)?,
        (None, true) => find_initial(args.q, family)?,
        (None, false) => match reference_seed(args.q, family) {
            Some(seed) => TowerSpec::family(args.q, family, seed)?,
            None => find_initial(args.q, family)?,
        },
    };
    let tower = build_state(spec, args.levels)?;
    let _ = writeln!(out, "q = {}, family {}, initial polynomial {:?}", args.q, family, tower.spec().init_minpoly);
    for level in tower.levels() {
        for c in &level.certificates {
            let _ = writeln!(out, "level {}: {} [{}]", level.n, c.name, if c.holds { "ok" } else { "FAILED" });
        }
    }
    let json = serde_json::to_string_pretty(tower.spec()).expect("spec serializes");
    match &args.out {
        Some(path) => {
            std::fs::write(path, json + "\n").map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            let _ = writeln!(out, "spec written to {}", path.display());
        }
        None => {
            let _ = writeln!(out, "{json}");
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct JsonRow {
    n: usize,
    log2_order_x: String,
    log2_order_delta: Option<String>,
    order_x: String,
    order_delta: Option<String>,
    status: &'static str,
}

fn json_row(row: &OrderRow) -> JsonRow {
    JsonRow {
        n: row.n,
        log2_order_x: row.x.log2_order.clone(),
        log2_order_delta: row.delta.as_ref().map(|d| d.log2_order.clone()),
        order_x: row.x.order.to_string(),
        order_delta: row.delta.as_ref().map(|d| d.order.to_string()),
        status: row.kind().as_str(),
    }
}

fn cofactor_message(n: usize, what: &str, r: &OrderResult) -> String {
    format!(
        "level {n}: order of {what} is only certified up to the unfactored cofactor {} (use --partial-ok or --hints)",
        r.cofactor
    )
}

fn tower_orders(args: OrdersArgs, out: &mut String) -> CliResult<()> {
    let spec = read_spec(&args.spec)?;
    let f = factorizer(&args.budget)?;
    let tower = build_state(spec, args.levels)?;
    let rows = order_rows(&tower, args.levels, args.delta, &f)?;
    if !args.partial_ok {
        for row in &rows {
            if row.x.kind == OrderKind::Divisor {
                return Err(Failure::budget(cofactor_message(row.n, "x_n", &row.x)));
            }
            if let Some(d) = row.delta.as_ref().filter(|d| d.kind == OrderKind::Divisor) {
                return Err(Failure::budget(cofactor_message(row.n, "delta_n", d)));
            }
        }
    }
    match args.format {
        Format::Csv => {
            out.push_str("n,log2_order_x,log2_order_delta,order_x,order_delta,status\n");
            for row in rows.iter().map(json_row) {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    row.n,
                    row.log2_order_x,
                    row.log2_order_delta.unwrap_or_default(),
                    row.order_x,
                    row.order_delta.unwrap_or_default(),
                    row.status
                );
            }
        }
        Format::Json => {
            let rows: Vec<JsonRow> = rows.iter().map(json_row).collect();
            out.push_str(&serde_json::to_string_pretty(&rows).expect("rows serialize"));
            out.push('\n');
        }
    }
    Ok(())
}

struct Verdicts<'a> {
    out: &'a mut String,
    failed: Vec<String>,
    inconclusive: Vec<String>,
}

impl Verdicts<'_> {
    fn record(&mut self, name: String, holds: bool) {
        let _ = writeln!(self.out, "{} {name}", if holds { "PASS" } else { "FAIL" });
        if !holds {
            self.failed.push(name);
        }
    }

    fn bound(&mut self, name: String, r: &OrderResult, bound: &BigUint) {
        if &r.order > bound {
            self.record(name, true);
        } else if r.kind == OrderKind::Divisor {
            let _ = writeln!(self.out, "UNKNOWN {name} (certified divisor {} only)", r.order);
            self.inconclusive.push(name);
        } else {
            self.record(name, false);
        }
    }
}

fn tower_verify(args: VerifyArgs, out: &mut String) -> CliResult<()> {
    let spec = read_spec(&args.spec)?;
    let f = factorizer(&args.budget)?;
    let tower = build_state(spec, args.levels)?;
    let field = tower.field();
    let family = tower.spec().family;
    let q = tower.spec().q;
    let char2 = tower.is_char2();
    let mut v = Verdicts { out, failed: Vec::new(), inconclusive: Vec::new() };

    for n in 2..=args.levels {
        for cond in tower.applicable_conditions() {
            let c = tower.check_condition(n, cond)?;
            v.record(format!("condition {cond} at n = {n}"), c.holds);
        }
        if tower.spec().g_terms.is_some() {
            v.record(format!("discriminant recurrence at n = {n}"), tower.verify_discriminant_recurrence(n)?);
        }
        if n <= args.norm_cap && (char2 || family != Family::Custom) {
            for j in 1..n {
                match tower.verify_norm_identity(n, j, args.norm_cap) {
                    Ok(c) => v.record(format!("norm identity N_{{{n},{j}}}(x_n)"), c.holds),
                    Err(Error::Unsupported { .. }) | Err(Error::MissingRecurrence) => {}
                    Err(e) => return Err(e.into()),
                }
            }
        }
    }
    for n in 1..=args.levels {
        let x = tower.x(n)?;
        if char2 {
            v.record(format!("x_{n} is a non-cube"), !is_nth_residue(field, x, 3)?);
        } else {
            v.record(format!("x_{n} is a non-square"), !is_square_or_zero(field, x)?);
            if n < args.levels {
                v.record(format!("delta_{n} is a non-square"), !is_square_or_zero(field, tower.delta(n)?)?);
            }
        }
    }
    let delta_bound = matches!(family, Family::F1 | Family::F2) || (family == Family::F4 && q > 3);
    let rows = order_rows(&tower, args.levels, delta_bound, &f)?;
    for row in rows.iter().filter(|r| r.n >= 2) {
        let bound = paper_lower_bound(q, row.n, char2);
        v.bound(format!("o(x_{}) exceeds the lower bound", row.n), &row.x, &bound);
        if let Some(d) = &row.delta {
            v.bound(format!("o(delta_{}) exceeds the lower bound", row.n), d, &bound);
        }
    }
    if let Some(first) = v.failed.first() {
        return Err(Failure::certification(format!("{} check(s) failed, first: {first}", v.failed.len())));
    }
    if let Some(first) = v.inconclusive.first() {
        return Err(Failure::budget(format!("factoring budget too small to decide: {first}")));
    }
    Ok(())
}

fn search_initial(args: FamilyArgs, out: &mut String) -> CliResult<()> {
    let family = parse_family(&args.family)?;
    let spec = find_initial(args.q, family)?;
    if spec.is_char2() {
        let _ = writeln!(out, "base modulus (low degree first): {:?}", spec.init_minpoly);
    } else {
        let (a, b) = (spec.init_minpoly[0], spec.init_minpoly[1]);
        let _ = writeln!(out, "x_1^2 = {a} x_1 + {b}");
    }
    let _ = writeln!(out, "{}", serde_json::to_string_pretty(&spec).expect("spec serializes"));
    Ok(())
}

fn factor(args: FactorArgs, out: &mut String) -> CliResult<()> {
    let value = BigUint::from_str(args.value.trim())
        .map_err(|_| Failure::usage(format!("not a decimal integer: {:?}", args.value)))?;
    if value == BigUint::from(0u32) {
        return Err(Failure::usage("value must be positive"));
    }
    let f = factorizer(&args.budget)?;
    let fi = f.factor(&value);
    if !fi.is_complete() && !args.partial_ok {
        return Err(Failure::budget(format!("unfactored cofactor {} remains", fi.cofactor)));
    }
    let _ = writeln!(out, "{value} = {fi}");
    Ok(())
}

fn oracle_check(args: FamilyArgs, out: &mut String) -> CliResult<()> {
    let family = parse_family(&args.family)?;
    let spec = match reference_seed(args.q, family) {
        Some(seed) => TowerSpec::family(args.q, family, seed)?,
        None => find_initial(args.q, family)?,
    };
    let max_level = if spec.is_char2() { 1 } else { 2 };
    let base_degree = if spec.is_char2() { spec.init_minpoly.len() as u32 - 1 } else { 2 };
    let step: u32 = if spec.is_char2() { 3 } else { 2 };
    let levels = (1..=max_level)
        .take_while(|&n| {
            (args.q as u128).checked_pow(base_degree * step.pow(n as u32 - 1)).is_some_and(|s| s <= MAX_FIELD_SIZE as u128)
        })
        .last()
        .ok_or_else(|| Failure::usage(format!("GF({}^{base_degree}) is too large for the oracle", args.q)))?;
    let tower = build_state(spec, levels)?;
    for n in 1..=levels {
        let r = cross_check(&tower, n)?;
        let census = r.census.as_ref().expect("census is always filled");
        let _ = writeln!(
            out,
            "level {n}: GF({}) ok: {} elements embedded, {} pairs, {} orders, {} residue classes, {} norms, {} irreducibility checks; squares {}{}",
            r.field_size,
            r.elements_embedded,
            r.pairs_checked,
            r.orders_checked,
            r.residues_checked,
            r.norms_checked,
            r.irreducibility_checked,
            census.squares,
            census.cubes.map(|c| format!(", cubes {c}")).unwrap_or_default()
        );
    }
    Ok(())
}
