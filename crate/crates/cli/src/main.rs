use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::Zero;
use serde::Serialize;
use serde_json::json;

use rdt_core::bounds::{self, SpectralBound};
use rdt_core::check::PropertyResult;
use rdt_core::directional;
use rdt_core::formula::{FormulaSpec, GateKind};
use rdt_core::oracle::{self, CostModel, Distribution};
use rdt_core::pkn::{self, Threshold};
use rdt_core::rational::{int, parse_rational, to_f64, to_fraction_string, Rational};

const SCHEMA: u32 = 1;

#[derive(Parser)]
#[command(
    name = "rdt",
    version,
    about = "Exact bounds on randomized decision-tree complexity of uniform threshold formulae"
)]
struct Cli {
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate P(k, n).
    Pkn(PknArgs),
    /// Lower and upper cost pairs and growth rates.
    Bounds(BoundsArgs),
    /// Monte Carlo run of the directional algorithm on reluctant inputs.
    Simulate(SimulateArgs),
    /// Run the property suites.
    Verify(VerifyArgs),
    /// Exhaustive optimal expected cost on a small formula.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Float,
}

#[derive(Args)]
struct PknArgs {
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    n: Option<u32>,
    /// Every 0 <= k <= n <= N.
    #[arg(long, value_name = "N")]
    n_max: Option<u32>,
    #[arg(long, value_enum, default_value = "exact")]
    mode: Mode,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    n: u32,
    #[arg(long, default_value_t = 6)]
    dmax: u32,
    /// Lower bound from exact P values (default).
    #[arg(long, conflicts_with = "generic_p")]
    exact_p: bool,
    /// Lower bound from the closed-form estimates (n-k)/(2k).
    #[arg(long)]
    generic_p: bool,
    /// Alternating AND-OR tree with fan-out n.
    #[arg(long, conflicts_with = "k")]
    andor: bool,
    #[arg(long, default_value = "and", value_parser = parse_gate)]
    root: GateKind,
    /// Compare the printed closed form for the lower-bound rate against the matrix.
    #[arg(long)]
    thm3_check: bool,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 2)]
    k: u32,
    #[arg(long, default_value_t = 3)]
    n: u32,
    #[arg(long)]
    andor: bool,
    #[arg(long, default_value = "and", value_parser = parse_gate)]
    root: GateKind,
    #[arg(long)]
    depth: u32,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    /// Overridden by RDT_SEED.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Condition on the root value (0 or 1).
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
    condition: Option<u8>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 6)]
    n_max: u32,
    /// Also compare against the exhaustive optimizers (n <= 12).
    #[arg(long)]
    with_oracle: bool,
    /// Survey the printed lower-bound closed form.
    #[arg(long)]
    thm3: bool,
    #[arg(long, default_value_t = 25)]
    bounds_n_max: u32,
    /// Largest n for which matrices built from exact P values are checked.
    #[arg(long, default_value_t = 12)]
    exact_n_max: u32,
}

#[derive(Args)]
struct OracleArgs {
    /// const:K:N:D, and:N:D or or:N:D.
    #[arg(long)]
    formula: FormulaSpec,
    /// reluctant, slice:K or explicit:BITS=W,...
    #[arg(long, default_value = "reluctant")]
    dist: String,
    #[arg(long, default_value = "1", allow_hyphen_values = true, value_parser = parse_cost)]
    c0: Rational,
    #[arg(long, default_value = "1", allow_hyphen_values = true, value_parser = parse_cost)]
    c1: Rational,
}

fn parse_gate(s: &str) -> Result<GateKind, String> {
    s.parse().map_err(|e: rdt_core::Error| e.to_string())
}

fn parse_cost(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

/// A usage or input error, reported with exit code 2.
struct Failure(String);

impl From<rdt_core::Error> for Failure {
    fn from(e: rdt_core::Error) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<(String, bool), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Pkn(a) => cmd_pkn(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Oracle(a) => cmd_oracle(a),
    };
    match result {
        Ok((text, passed)) => {
            if let Err(e) = emit(cli.out.as_ref(), &text) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn resolve_seed(flag: u64) -> Result<u64, Failure> {
    match std::env::var("RDT_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure(format!("RDT_SEED must be an unsigned integer, got {v:?}"))),
        Err(_) => Ok(flag),
    }
}

struct PknRow {
    k: u32,
    n: u32,
    p: Option<String>,
    p_float: f64,
    lower_bound: String,
    equality: bool,
}

fn pkn_row(k: u32, n: u32, mode: Mode) -> Result<PknRow, Failure> {
    pkn::SliceSpec::new(k, n)?;
    if k == 0 {
        return Ok(PknRow {
            k,
            n,
            p: Some(Threshold::Infinite.to_string()),
            p_float: f64::INFINITY,
            lower_bound: "inf".into(),
            equality: true,
        });
    }
    let lb = pkn::lower_bound(k, n);
    Ok(match mode {
        Mode::Exact => {
            let p = pkn::p(k, n)?;
            let value = p.rational();
            PknRow {
                k,
                n,
                p: Some(to_fraction_string(value)),
                p_float: to_f64(value),
                lower_bound: to_fraction_string(&lb),
                equality: *value == lb,
            }
        }
        Mode::Float => {
            let x = pkn::p_f64(k, n)?;
            PknRow {
                k,
                n,
                p: None,
                p_float: x,
                lower_bound: to_fraction_string(&lb),
                equality: (x - to_f64(&lb)).abs() <= 4.0 * pkn::FLOAT_TOLERANCE,
            }
        }
    })
}

fn float_cell(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x}")
    }
}

fn cmd_pkn(a: PknArgs) -> Outcome {
    let cells: Vec<(u32, u32)> = match (a.k, a.n, a.n_max) {
        (Some(k), Some(n), None) => vec![(k, n)],
        (None, Some(n), None) => (0..=n).map(|k| (k, n)).collect(),
        (None, None, Some(m)) if m >= 1 => {
            (1..=m).flat_map(|n| (0..=n).map(move |k| (k, n))).collect()
        }
        _ => {
            return Err(Failure(
                "give --k and --n, --n alone, or --n-max (at least 1)".into(),
            ))
        }
    };
    let rows = cells
        .into_iter()
        .map(|(k, n)| pkn_row(k, n, a.mode))
        .collect::<Result<Vec<_>, _>>()?;
    let text = match a.format {
        Format::Json => to_json(&json!({
            "schema": SCHEMA,
            "command": "pkn",
            "mode": match a.mode { Mode::Exact => "exact", Mode::Float => "float" },
            "rows": rows.iter().map(|r| json!({
                "k": r.k,
                "n": r.n,
                "p": r.p,
                "p_float": float_cell(r.p_float),
                "lower_bound": r.lower_bound,
                "equality": r.equality,
            })).collect::<Vec<_>>(),
        })),
        Format::Csv => {
            let mut s = String::from("k,n,p,p_float,lower_bound,equality\n");
            for r in &rows {
                writeln!(
                    s,
                    "{},{},{},{},{},{}",
                    r.k,
                    r.n,
                    r.p.as_deref().unwrap_or(""),
                    float_cell(r.p_float),
                    r.lower_bound,
                    r.equality
                )
                .unwrap();
            }
            s
        }
    };
    Ok((text, true))
}

/// `num/den` when the eigenvalue is rational, a float otherwise.
fn lambda_cell(l: &SpectralBound) -> String {
    l.exact_lambda()
        .map_or_else(|| format!("{}", l.lambda), |r| to_fraction_string(&r))
}

fn cmd_bounds(a: BoundsArgs) -> Outcome {
    if a.andor {
        return bounds_andor(&a);
    }
    let k =
        a.k.ok_or_else(|| Failure("--k is required unless --andor is given".into()))?;
    if !(1 < k && k < a.n) {
        return Err(Failure(format!("need 1 < k < n, got k={k} n={}", a.n)));
    }
    let report = bounds::report_bounds(k, a.n, a.dmax)?;
    let thm2 = bounds::closed_form_thm2(k, a.n)?;
    let thm3 = if a.thm3_check {
        Some(bounds::closed_form_thm3(k, a.n)?)
    } else {
        None
    };
    let (lower_matrix, lower_lambda) = if a.generic_p {
        (&report.gamma_generic, &report.lambda_generic)
    } else {
        (&report.gamma_exact, &report.lambda_exact)
    };
    let variant = if a.generic_p { "generic" } else { "exact" };
    let thm2_ok = (thm2 - report.lambda_upper.lambda).abs() <= bounds::CLOSED_FORM_TOLERANCE;

    let text = match a.format {
        Format::Json => to_json(&json!({
            "schema": SCHEMA,
            "command": "bounds",
            "p_variant": variant,
            "report": report,
            "lambda_lower": lower_lambda,
            "closed_form_upper": thm2,
            "closed_form_upper_consistent": thm2_ok,
            "thm3": thm3,
        })),
        Format::Csv => {
            let mut s = String::new();
            writeln!(s, "# k={k} n={} p_variant={variant}", a.n).unwrap();
            writeln!(s, "# gamma={lower_matrix} delta={}", report.delta).unwrap();
            writeln!(
                s,
                "# lambda_lower={} ({}) lambda_upper={} ({})",
                lambda_cell(lower_lambda),
                lower_lambda.lambda,
                lambda_cell(&report.lambda_upper),
                report.lambda_upper.lambda
            )
            .unwrap();
            writeln!(s, "# closed_form_upper={thm2} consistent={thm2_ok}").unwrap();
            if let Some(t) = &thm3 {
                writeln!(
                    s,
                    "# thm3 printed={} matrix_derived={} consistent={}",
                    t.printed, t.matrix_derived, t.consistent
                )
                .unwrap();
            }
            s.push_str(
                "d,c1_lower,c0_lower,scalar_lower,phi_upper,psi_upper,lambda_lower,lambda_upper\n",
            );
            let (ll, lu) = (lambda_cell(lower_lambda), lambda_cell(&report.lambda_upper));
            for r in &report.rows {
                let (pair, scalar) = if a.generic_p {
                    (&r.lower_generic, &r.scalar_generic)
                } else {
                    (&r.lower_exact, &r.scalar_exact)
                };
                writeln!(
                    s,
                    "{},{},{},{},{},{},{ll},{lu}",
                    r.d,
                    to_fraction_string(&pair.c1),
                    to_fraction_string(&pair.c0),
                    to_fraction_string(scalar),
                    to_fraction_string(&r.upper.phi),
                    to_fraction_string(&r.upper.psi),
                )
                .unwrap();
            }
            s
        }
    };
    Ok((text, true))
}

fn bounds_andor(a: &BoundsArgs) -> Outcome {
    if a.n < 2 {
        return Err(Failure(format!("--andor needs n >= 2, got {}", a.n)));
    }
    let report = bounds::report_alternating(a.n, a.root, a.dmax)?;
    let lambda = &report.product.spectral;
    let (f1, f2) = report.closed_forms;
    let per_level = lambda.lambda.sqrt();
    let consistent = bounds::relative_gap(f1, lambda.lambda) <= bounds::CLOSED_FORM_TOLERANCE
        && bounds::relative_gap(f2, lambda.lambda) <= bounds::CLOSED_FORM_TOLERANCE;
    let text = match a.format {
        Format::Json => to_json(&json!({
            "schema": SCHEMA,
            "command": "bounds",
            "report": report,
            "lambda_per_two_levels": lambda.lambda,
            "lambda_per_level": per_level,
            "closed_forms_consistent": consistent,
        })),
        Format::Csv => {
            let mut s = String::new();
            writeln!(s, "# andor n={} root={:?}", a.n, a.root).unwrap();
            writeln!(s, "# AB={}", report.product.ab).unwrap();
            writeln!(
                s,
                "# lambda_per_two_levels={} lambda_per_level={per_level}",
                lambda.lambda
            )
            .unwrap();
            writeln!(s, "# closed_forms={f1},{f2} consistent={consistent}").unwrap();
            s.push_str(
                "d,c1_lower,c0_lower,scalar_lower,phi_upper,psi_upper,lambda_lower,lambda_upper\n",
            );
            let l = lambda_cell(lambda);
            for r in &report.rows {
                writeln!(
                    s,
                    "{},{},{},{},{},{},{l},{l}",
                    r.d,
                    to_fraction_string(&r.lower.c1),
                    to_fraction_string(&r.lower.c0),
                    to_fraction_string(&r.scalar_lower),
                    to_fraction_string(&r.upper.phi),
                    to_fraction_string(&r.upper.psi),
                )
                .unwrap();
            }
            s
        }
    };
    Ok((text, true))
}

fn cmd_simulate(a: SimulateArgs) -> Outcome {
    let seed = resolve_seed(a.seed)?;
    let f = if a.andor {
        FormulaSpec::alternating(a.n, a.root, a.depth)?
    } else {
        FormulaSpec::constant(a.k, a.n, a.depth)?
    };
    let report = directional::monte_carlo(&f, a.trials, seed, a.condition.map(|c| c == 1))?;
    let passed = report.passes();
    let text = to_json(&json!({
        "schema": SCHEMA,
        "command": "simulate",
        "passed": passed,
        "report": report,
    }));
    Ok((text, passed))
}

fn property_line(out: &mut String, group: &str, p: &PropertyResult) {
    let status = if p.passed { "PASS" } else { "FAIL" };
    writeln!(
        out,
        "{status} {group}/{} {} (checked {})",
        p.id, p.name, p.checked
    )
    .unwrap();
    for c in p.counterexamples.iter().take(5) {
        writeln!(out, "  counterexample: {c}").unwrap();
    }
}

fn cmd_verify(a: VerifyArgs) -> Outcome {
    let mut out = String::new();
    let mut ok = true;

    let report = pkn::verify_pkn_properties(a.n_max, &pkn::default_eta_grid())?;
    for p in &report.properties {
        ok &= p.passed;
        property_line(&mut out, "pkn", p);
    }

    let exact_n_max = a.exact_n_max.min(a.bounds_n_max);
    for p in &bounds::verify_bounds_invariants(a.bounds_n_max, exact_n_max)? {
        ok &= p.passed;
        property_line(&mut out, "bounds", p);
    }

    if a.with_oracle {
        let limit = oracle::MAX_VARIABLES as u32;
        if a.n_max > limit {
            return Err(Failure(format!(
                "--with-oracle supports --n-max up to {limit}"
            )));
        }
        let grid = [
            Rational::zero(),
            rdt_core::rational::ratio(1, 4),
            rdt_core::rational::ratio(1, 2),
            int(1),
            int(2),
        ];
        for p in &oracle::verify_oracle_equivalence(a.n_max, a.n_max, &grid)? {
            ok &= p.passed;
            property_line(&mut out, "oracle", p);
        }
    }

    if a.thm3 {
        let survey = bounds::thm3_survey(a.bounds_n_max)?;
        let bad: Vec<_> = survey.iter().filter(|c| !c.consistent).collect();
        match bad.first() {
            None => writeln!(
                out,
                "PASS thm3 printed closed form matches the matrix eigenvalue on {} pairs",
                survey.len()
            )
            .unwrap(),
            Some(first) => writeln!(
                out,
                "WARN thm3 printed closed form differs from the matrix eigenvalue on {} of {} pairs; first k={} n={} printed={:.6} matrix={:.6}",
                bad.len(),
                survey.len(),
                first.k,
                first.n,
                first.printed,
                first.matrix_derived
            )
            .unwrap(),
        }
    }

    writeln!(out, "{}", if ok { "ALL PASS" } else { "SOME FAILED" }).unwrap();
    Ok((out, ok))
}

fn cmd_oracle(a: OracleArgs) -> Outcome {
    let dist: Distribution = a.dist.parse()?;
    let cost = CostModel::uniform(a.c0.clone(), a.c1.clone());
    let result = oracle::optimal_expected_cost(&a.formula, &dist, &cost)?;
    let text = to_json(&json!({
        "schema": SCHEMA,
        "command": "oracle",
        "formula": a.formula.to_string(),
        "distribution": a.dist.trim(),
        "c0": to_fraction_string(&a.c0),
        "c1": to_fraction_string(&a.c1),
        "value": to_fraction_string(&result.value),
        "value_float": to_f64(&result.value),
        "root_query": result.root_query(),
        "states_explored": result.states_explored,
    }));
    Ok((text, true))
}
