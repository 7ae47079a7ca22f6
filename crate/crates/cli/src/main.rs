use std::path::{Path, PathBuf};
use std::process::ExitCode;

use blm::blm::BivariateLaw;
use blm::dependence::{
    density_condition, ifr_product_condition, pqd_check, rr2_check, tp2_check, tp_order_check, Kernel,
    DEFAULT_TRIALS, DERIVATIVE_TOL, DETERMINANT_TOL,
};
use blm::moments::{lst, mgf, mttf, product_moment, quadrature_oracle, OracleKind, System};
use blm::orders::{bivariate_ifra_check, compare_blm, univariate_order, upper_orthant, Holds, OrderVerdict, Relation};
use blm::report::geometric_points;
use blm::simulate::{sample_blm, sample_gmo, sample_mo, RngStream};
use blm::{Error, Family, Grid, GridReport, Model, ModelSpec, ValidationMode};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

/// Writes a line to stdout, ignoring a closed pipe.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

#[derive(Parser)]
#[command(name = "blm", version, about = "Bivariate lack-of-memory lifetime models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ModelArgs {
    /// Model spec (JSON).
    spec: PathBuf,
    /// Reject models that fail any construction check (default).
    #[arg(long, conflicts_with = "permissive")]
    strict: bool,
    /// Build models even when construction checks fail.
    #[arg(long)]
    permissive: bool,
}

impl ModelArgs {
    fn mode(&self) -> ValidationMode {
        if self.permissive {
            ValidationMode::Permissive
        } else {
            ValidationMode::Strict
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the construction checks and print the report.
    Validate {
        /// Model spec (JSON).
        spec: PathBuf,
    },
    /// Joint survival P(X > x, Y > y).
    Eval {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        y: f64,
    },
    /// Joint density off the diagonal.
    Density {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        y: f64,
    },
    /// Product moment E[X^i Y^j], closed form against quadrature (CSV).
    Moments {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1)]
        i: u32,
        #[arg(long, default_value_t = 1)]
        j: u32,
    },
    /// Joint transform at (s, t), closed form against quadrature (CSV).
    Transform {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        t: f64,
        #[arg(long, value_enum, default_value_t = TransformKind::Lst)]
        kind: TransformKind,
    },
    /// Draw pairs (CSV with a header comment naming sampler and seed).
    Sample {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// Seed; defaults to $BLM_SEED, then 0.
        #[arg(long, env = "BLM_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream: u64,
        /// Use the universal min/difference sampler even when a shock sampler exists.
        #[arg(long)]
        universal: bool,
    },
    /// Dependence diagnostics on a grid (JSON report).
    Check {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum)]
        kind: CheckKind,
        /// Which function of the model to test.
        #[arg(long, value_enum, default_value_t = KernelKind::Survival)]
        kernel: KernelKind,
        /// Points per axis.
        #[arg(long, default_value_t = 20)]
        grid: usize,
        #[arg(long)]
        tol: Option<f64>,
        /// Order r for tp_order.
        #[arg(long, default_value_t = 3)]
        order: usize,
    },
    /// Compare two models under a stochastic order (JSON verdict).
    Compare {
        first: PathBuf,
        second: PathBuf,
        #[arg(long, value_enum)]
        relation: RelationArg,
        #[arg(long, default_value_t = 20)]
        grid: usize,
    },
    /// Mean time to failure of a two-component system.
    Mttf {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t = SystemArg::Series)]
        system: SystemArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TransformKind {
    Lst,
    Mgf,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckKind {
    Tp2,
    Rr2,
    #[value(name = "tp_order")]
    TpOrder,
    Pqd,
    /// IFR marginals with the survival product bound (characterizes TP2 survival).
    #[value(name = "ifr_product", alias = "theorem6")]
    IfrProduct,
    /// Gap-density condition (characterizes TP2 density).
    #[value(name = "density_condition", alias = "theorem7")]
    DensityCondition,
    Ifra,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelKind {
    Survival,
    Cdf,
    Density,
    Copula,
}

#[derive(Clone, Copy, ValueEnum)]
enum RelationArg {
    St,
    Hr,
    Rh,
    Lr,
    Uo,
    Concordance,
    Lt,
    Slepian,
}

#[derive(Clone, Copy, ValueEnum)]
enum SystemArg {
    Series,
    Parallel,
}

/// Why a command did not succeed.
enum Failure {
    /// Bad input; exit 2 with a message on stderr.
    Usage(String),
    /// Model rejected or check failed; exit 1 with JSON on stdout.
    Rejected(serde_json::Value),
}

type Outcome = Result<(), Failure>;

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidParameter(_) => "invalid_parameter",
        Error::Domain(_) => "domain",
        Error::Precondition(_) => "precondition",
        Error::Validation { .. } => "validation",
        Error::HazardCondition { .. } => "hazard_condition",
        Error::Unsupported(_) => "unsupported",
        Error::OracleFailure { .. } => "oracle_failure",
        Error::RootFinding(_) => "root_finding",
        Error::Sampler { .. } => "sampler",
        Error::Consistency(_) => "consistency",
        Error::Spec(_) => "spec",
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if let Error::Spec(msg) = &e {
            return Failure::Usage(msg.clone());
        }
        let mut v = json!({ "passed": false, "error": { "kind": error_kind(&e), "message": e.to_string() } });
        match &e {
            Error::Validation { clause, .. } => v["error"]["clause"] = json!(clause),
            Error::HazardCondition { condition, name, .. } => {
                v["error"]["condition"] = json!(condition.to_string());
                v["error"]["clause"] = json!(name);
            }
            _ => {}
        }
        Failure::Rejected(v)
    }
}

/// Scientific notation with 9 significant digits and a two-digit exponent.
fn sci(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let s = format!("{v:.8e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    format!("{mantissa}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
}

fn print_json(v: &impl serde::Serialize) {
    out!("{}", serde_json::to_string_pretty(v).expect("serializable output"));
}

fn read_spec(path: &Path) -> Result<ModelSpec, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    ModelSpec::from_json(&text).map_err(|e| match e {
        Error::Spec(msg) => Failure::Usage(format!("{}: {msg}", path.display())),
        other => Failure::Usage(format!("{}: {other}", path.display())),
    })
}

fn load(path: &Path, mode: ValidationMode) -> Result<Model, Failure> {
    let spec = read_spec(path)?;
    spec.build(mode).map_err(|e| match e {
        Error::Spec(msg) => Failure::Usage(format!("{}: {msg}", path.display())),
        other => other.into(),
    })
}

fn law(model: &Model) -> &dyn BivariateLaw {
    match model {
        Model::Blm(d) => d,
        Model::Gmo(d) => d,
    }
}

/// Geometric grid scaled to the model: `[0.05/θ, 8/θ]` for lack-of-memory
/// models, the same span around the smaller marginal mean otherwise.
fn model_grid(model: &Model, n: usize) -> Result<Grid, Failure> {
    let theta = match model {
        Model::Blm(d) => d.theta(),
        Model::Gmo(d) => {
            let mean = [d.marginal_x().mean(), d.marginal_y().mean()]
                .into_iter()
                .filter_map(|m| m.ok().filter(|v| v.is_finite() && *v > 0.0))
                .fold(f64::INFINITY, f64::min);
            if mean.is_finite() {
                1.0 / mean
            } else {
                1.0
            }
        }
    };
    Ok(Grid::for_rate(theta, n)?)
}

fn unit_grid(n: usize) -> Result<Grid, Failure> {
    let axis: Vec<f64> = (1..=n).map(|i| i as f64 / (n + 1) as f64).collect();
    Ok(Grid::new(axis.clone(), axis)?)
}

fn kernel(model: &Model, kind: KernelKind) -> Result<Kernel, Failure> {
    Ok(match (model, kind) {
        (Model::Blm(d), KernelKind::Survival) => Kernel::survival(d),
        (Model::Blm(d), KernelKind::Cdf) => Kernel::cdf(d),
        (Model::Blm(d), KernelKind::Density) => Kernel::density(d),
        (Model::Blm(d), KernelKind::Copula) => Kernel::survival_copula(d),
        (Model::Gmo(d), KernelKind::Survival) => Kernel::gmo_survival(d),
        (Model::Gmo(d), KernelKind::Density) => Kernel::gmo_density(d),
        (Model::Gmo(_), _) => {
            return Err(Error::Unsupported("the generalized shock model offers survival and density kernels only".into()).into())
        }
    })
}

fn grid_report(report: GridReport) -> Outcome {
    print_json(&report);
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Rejected(serde_json::Value::Null))
    }
}

fn order_verdict(verdict: &OrderVerdict) -> Outcome {
    print_json(verdict);
    if verdict.holds() {
        Ok(())
    } else {
        Err(Failure::Rejected(serde_json::Value::Null))
    }
}

fn validate(path: &Path) -> Outcome {
    let model = load(path, ValidationMode::Permissive)?;
    match &model {
        Model::Blm(d) => {
            let report = d.validation();
            let out = json!({
                "model": d.label(),
                "family": d.family().name(),
                "passed": report.passed,
                "checks": report.checks,
            });
            if report.passed {
                print_json(&out);
                Ok(())
            } else {
                Err(Failure::Rejected(out))
            }
        }
        Model::Gmo(d) => {
            print_json(&json!({
                "model": d.label(),
                "family": "gmo",
                "passed": true,
                "checks": [],
                "notes": ["shock models with independent shocks are valid by construction"],
            }));
            Ok(())
        }
    }
}

fn check(model: &Model, kind: CheckKind, kernel_kind: KernelKind, n: usize, tol: Option<f64>, order: usize) -> Outcome {
    let tol = tol.unwrap_or(match kind {
        CheckKind::DensityCondition => DERIVATIVE_TOL,
        _ => DETERMINANT_TOL,
    });
    let grid = match kernel_kind {
        KernelKind::Copula => unit_grid(n)?,
        _ => model_grid(model, n)?,
    };
    match kind {
        CheckKind::Tp2 => grid_report(tp2_check(&kernel(model, kernel_kind)?, &grid, tol)?),
        CheckKind::Rr2 => grid_report(rr2_check(&kernel(model, kernel_kind)?, &grid, tol)?),
        CheckKind::TpOrder => grid_report(tp_order_check(&kernel(model, kernel_kind)?, &grid, order, tol, DEFAULT_TRIALS)?),
        CheckKind::Pqd => grid_report(pqd_check(law(model), &grid, tol)?),
        CheckKind::IfrProduct => grid_report(ifr_product_condition(model.as_blm()?, &grid, tol)?),
        CheckKind::DensityCondition => {
            let d = model.as_blm()?;
            let pts = geometric_points(0.01 / d.theta(), 8.0 / d.theta(), 4 * n)?;
            grid_report(density_condition(d, &pts, tol)?)
        }
        CheckKind::Ifra => order_verdict(&bivariate_ifra_check(model.as_blm()?, &[0.25, 0.5, 0.75], &grid)?),
    }
}

fn worst_holds(a: Holds, b: Holds) -> Holds {
    match (a, b) {
        (Holds::No, _) | (_, Holds::No) => Holds::No,
        (Holds::Inconclusive, _) | (_, Holds::Inconclusive) => Holds::Inconclusive,
        _ => Holds::Yes,
    }
}

fn compare(first: &Path, second: &Path, relation: RelationArg, n: usize) -> Outcome {
    let m1 = load(first, ValidationMode::Strict)?;
    let m2 = load(second, ValidationMode::Strict)?;
    let g1 = model_grid(&m1, n)?;
    let g2 = model_grid(&m2, n)?;
    // the finer of the two model scales
    let grid = if g1.xs[0] <= g2.xs[0] { g1 } else { g2 };
    let marginal = |r: Relation| -> Outcome {
        let (l1, l2) = (law(&m1), law(&m2));
        let x = univariate_order(&**l1.margin_x(), &**l2.margin_x(), r, &grid.xs)?;
        let y = univariate_order(&**l1.margin_y(), &**l2.margin_y(), r, &grid.ys)?;
        let holds = worst_holds(x.holds, y.holds);
        print_json(&json!({ "relation": r, "holds": holds, "x": x, "y": y }));
        if holds == Holds::Yes {
            Ok(())
        } else {
            Err(Failure::Rejected(serde_json::Value::Null))
        }
    };
    match relation {
        RelationArg::St => marginal(Relation::St),
        RelationArg::Hr => marginal(Relation::Hr),
        RelationArg::Rh => marginal(Relation::Rh),
        RelationArg::Lr => marginal(Relation::Lr),
        RelationArg::Uo => order_verdict(&upper_orthant(law(&m1), law(&m2), &grid)),
        RelationArg::Concordance => order_verdict(&compare_blm(m1.as_blm()?, m2.as_blm()?, Relation::Concordance, &grid)?),
        RelationArg::Lt => order_verdict(&compare_blm(m1.as_blm()?, m2.as_blm()?, Relation::Lt, &grid)?),
        RelationArg::Slepian => order_verdict(&compare_blm(m1.as_blm()?, m2.as_blm()?, Relation::Slepian, &grid)?),
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Validate { spec } => validate(&spec),
        Command::Eval { model, x, y } => {
            let m = load(&model.spec, model.mode())?;
            if !(x.is_finite() && y.is_finite()) {
                return Err(Failure::Usage(format!("evaluation point ({x}, {y}) is not finite")));
            }
            out!("{}", sci(m.survival(x, y)));
            Ok(())
        }
        Command::Density { model, x, y } => {
            let m = load(&model.spec, model.mode())?;
            out!("{}", sci(m.density(x, y)?));
            Ok(())
        }
        Command::Moments { model, i, j } => {
            let m = load(&model.spec, model.mode())?;
            let d = m.as_blm()?;
            let closed = product_moment(d, i, j)?;
            let oracle = quadrature_oracle(d, OracleKind::Moment { r: i as f64, q: j as f64 })?.value;
            out!("i,j,closed_form,oracle,abs_diff");
            out!("{i},{j},{},{},{}", sci(closed), sci(oracle), sci((closed - oracle).abs()));
            Ok(())
        }
        Command::Transform { model, s, t, kind } => {
            let m = load(&model.spec, model.mode())?;
            let d = m.as_blm()?;
            let (closed, oracle) = match kind {
                TransformKind::Lst => (lst(d, s, t)?, quadrature_oracle(d, OracleKind::Lst { s, t })?.value),
                TransformKind::Mgf => (mgf(d, s, t)?, quadrature_oracle(d, OracleKind::Mgf { s, t })?.value),
            };
            out!("s,t,closed_form,oracle,abs_diff");
            out!("{},{},{},{},{}", sci(s), sci(t), sci(closed), sci(oracle), sci((closed - oracle).abs()));
            Ok(())
        }
        Command::Sample { model, n, seed, stream, universal } => {
            let m = load(&model.spec, model.mode())?;
            let mut rng = RngStream::new(seed, stream);
            let batch = match &m {
                Model::Blm(d) => match d.family() {
                    Family::MarshallOlkin(p) if !universal => sample_mo(*p, n, &mut rng)?,
                    _ => sample_blm(d, n, &mut rng)?,
                },
                Model::Gmo(d) => sample_gmo(d, n, &mut rng)?,
            };
            let mut out = String::with_capacity(40 * (n + 2));
            out.push_str(&format!(
                "# sampler={}, seed={}, stream={}, n={}\nx,y\n",
                batch.sampler_id, batch.seed, batch.stream, batch.n
            ));
            for (x, y) in &batch.pairs {
                out.push_str(&sci(*x));
                out.push(',');
                out.push_str(&sci(*y));
                out.push('\n');
            }
            let _ = std::io::Write::write_all(&mut std::io::stdout(), out.as_bytes());
            Ok(())
        }
        Command::Check { model, kind, kernel, grid, tol, order } => {
            let m = load(&model.spec, model.mode())?;
            check(&m, kind, kernel, grid, tol, order)
        }
        Command::Compare { first, second, relation, grid } => compare(&first, &second, relation, grid),
        Command::Mttf { model, system } => {
            let m = load(&model.spec, model.mode())?;
            let system = match system {
                SystemArg::Series => System::Series,
                SystemArg::Parallel => System::Parallel,
            };
            out!("{}", sci(mttf(m.as_blm()?, system)?));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Rejected(report)) => {
            if !report.is_null() {
                print_json(&report);
            }
            ExitCode::from(1)
        }
    }
}
