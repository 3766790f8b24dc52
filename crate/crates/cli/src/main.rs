use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{ensure, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use frechet3::*;
use frechet3_core::{
    check_pair_compat, check_triple_compat, cl_cu, improvement_report, joe_bounds, lift_bounds, product_bounds,
    c_product, CompatVerdict, Error as CoreError, LiftedCopula3, QuadratureConfig,
};

/// Compatibility checks, C-products, C-liftings and Fréchet-class bounds for
/// trivariate copulas.
///
/// Copulas, families, triples and liftings are read from JSON files.
/// Exit status: 0 on success, 2 when check-compat refutes, 1 on any error.
#[derive(Debug, Parser)]
#[command(name = "frechet3", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct QuadArgs {
    /// Gauss–Legendre nodes per panel.
    #[arg(long)]
    quad_nodes: Option<usize>,
    /// Initial panels per smooth piece.
    #[arg(long)]
    quad_panels: Option<usize>,
    /// Absolute quadrature tolerance for smooth integrands.
    #[arg(long)]
    tol: Option<f64>,
}

impl QuadArgs {
    fn config(&self, base: QuadratureConfig) -> Result<QuadratureConfig> {
        QuadOverrides {
            nodes: self.quad_nodes,
            panels: self.quad_panels,
            tol: self.tol,
        }
        .apply(base)
    }
}

/// A lifting given either as one file or as its three parts.
#[derive(Debug, Args)]
struct LiftArgs {
    /// LiftedCopula3 JSON.
    #[arg(long, conflicts_with_all = ["a", "b", "family"])]
    lift: Option<PathBuf>,
    /// Copula A (12-marginal).
    #[arg(long)]
    a: Option<PathBuf>,
    /// Copula B (23-marginal).
    #[arg(long)]
    b: Option<PathBuf>,
    /// Family path, or a single copula for a constant family.
    #[arg(long)]
    family: Option<PathBuf>,
}

impl LiftArgs {
    fn load(&self, quad: &QuadArgs) -> Result<LiftedCopula3> {
        let mut l = match &self.lift {
            Some(p) => load_lift(p)?,
            None => LiftedCopula3 {
                a: load_spec(require(self.a.as_deref(), "--a (or --lift)")?)?,
                b: load_spec(require(self.b.as_deref(), "--b (or --lift)")?)?,
                fam: load_family(require(self.family.as_deref(), "--family (or --lift)")?)?,
                quad: QuadratureConfig::default(),
            },
        };
        l.quad = quad.config(l.quad)?;
        Ok(l)
    }
}

/// A triple given either as one file or member by member.
#[derive(Debug, Args)]
struct TripleArgs {
    /// Triple JSON `{"c12":…,"c13":…,"c23":…}`.
    #[arg(long, conflicts_with_all = ["c12", "c13", "c23"])]
    triple: Option<PathBuf>,
    #[arg(long)]
    c12: Option<PathBuf>,
    #[arg(long)]
    c13: Option<PathBuf>,
    #[arg(long)]
    c23: Option<PathBuf>,
}

impl TripleArgs {
    fn load(&self) -> Result<Triple> {
        match &self.triple {
            Some(p) => load_triple(p),
            None => Ok(Triple {
                c12: load_spec(require(self.c12.as_deref(), "--c12 (or --triple)")?)?,
                c13: load_spec(require(self.c13.as_deref(), "--c13 (or --triple)")?)?,
                c23: load_spec(require(self.c23.as_deref(), "--c23 (or --triple)")?)?,
            }),
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a bivariate copula (--a, two coordinates) or a lifting (three).
    Eval {
        #[command(flatten)]
        source: LiftArgs,
        #[arg(long)]
        at: String,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// (A *_fam B)(u1, u3).
    Product {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        at: String,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// (A ⋆_fam B)(u1, u2, u3).
    Lift {
        #[command(flatten)]
        source: LiftArgs,
        #[arg(long)]
        at: String,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Product bounds (two coordinates) or lifting bounds (three) from C12, C23.
    PairBounds {
        #[arg(long)]
        c12: PathBuf,
        #[arg(long)]
        c23: PathBuf,
        #[arg(long)]
        at: String,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Try to refute compatibility of a triple on a grid; exit 2 if refuted.
    CheckCompat {
        #[command(flatten)]
        triple: TripleArgs,
        /// Override the parameter of every Clayton member.
        #[arg(long)]
        alpha: Option<f64>,
        /// Test only C13 against the band of (C12, C23).
        #[arg(long)]
        pair_only: bool,
        #[arg(long, default_value_t = 21)]
        grid: usize,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// C_L, C_U and the classical F_L, F_U at a point.
    FrechetBounds {
        #[command(flatten)]
        triple: TripleArgs,
        #[arg(long)]
        at: String,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Tabulate F_L ≤ C_L ≤ C_U ≤ F_U over a grid (CSV) and print a JSON summary.
    Improvement {
        #[command(flatten)]
        triple: TripleArgs,
        #[arg(long, default_value_t = 11)]
        grid: usize,
        /// CSV destination; standard output if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Draw samples from a lifting (CSV u1,u2,u3).
    Sample {
        #[command(flatten)]
        source: LiftArgs,
        #[arg(long)]
        n: usize,
        /// Decimal or 0x-prefixed hexadecimal.
        #[arg(long, default_value = "0", value_parser = parse_seed)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Tabulate a bivariate copula (--a alone) or a lifting over a grid.
    GridExport {
        #[command(flatten)]
        source: LiftArgs,
        #[arg(long, default_value_t = 11)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        quad: QuadArgs,
    },
}

const EXIT_REFUTED: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::FAILURE } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            match e.downcast_ref::<CoreError>() {
                Some(CoreError::Incompatible(w)) => eprintln!("error: {e}\nwitness: {}", to_json(w)),
                _ => eprintln!("error: {e:#}"),
            }
            ExitCode::FAILURE
        }
    }
}

fn print(s: &str) -> Result<()> {
    write_output(None, s)
}

fn bivariate_only(source: &LiftArgs) -> bool {
    source.lift.is_none() && source.b.is_none() && source.family.is_none()
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Eval { source, at, quad } => {
            if bivariate_only(&source) {
                let a = load_spec(require(source.a.as_deref(), "--a or --lift")?)?;
                let u = parse_point(&at, 2)?;
                print(&key_values(&[("value", a.eval2(u[0], u[1]))]))?;
            } else {
                lift_value(&source, &at, &quad)?;
            }
        }
        Command::Product { a, b, family, at, quad } => {
            let (a, b, fam) = (load_spec(&a)?, load_spec(&b)?, load_family(&family)?);
            let u = parse_point(&at, 2)?;
            let q = quad.config(QuadratureConfig::default())?;
            print(&key_values(&[("value", c_product(&a, &b, &fam, u[0], u[1], &q)?)]))?;
        }
        Command::Lift { source, at, quad } => lift_value(&source, &at, &quad)?,
        Command::PairBounds { c12, c23, at, quad } => {
            let (c12, c23) = (load_spec(&c12)?, load_spec(&c23)?);
            let q = quad.config(QuadratureConfig::default())?;
            let (lo, hi) = match at.split(',').count() {
                2 => {
                    let u = parse_point(&at, 2)?;
                    product_bounds(&c12, &c23, u[0], u[1], &q)?
                }
                _ => {
                    let u = parse_point(&at, 3)?;
                    lift_bounds(&c12, &c23, [u[0], u[1], u[2]], &q)?
                }
            };
            print(&key_values(&[("lower", lo), ("upper", hi)]))?;
        }
        Command::CheckCompat { triple, alpha, pair_only, grid: points, quad } => {
            let mut t = triple.load()?;
            if let Some(a) = alpha {
                t = t.with_clayton_alpha(a)?;
            }
            let g = grid(points)?;
            let q = quad.config(QuadratureConfig::default())?;
            let verdict = if pair_only {
                check_pair_compat(&t.c12, &t.c23, &t.c13, g, &q)?
            } else {
                check_triple_compat(&t.c12, &t.c13, &t.c23, g, &q)?
            };
            print(&format!("{}\n", verdict_json(&verdict)))?;
            if verdict.is_refuted() {
                return Ok(EXIT_REFUTED);
            }
        }
        Command::FrechetBounds { triple, at, quad } => {
            let t = triple.load()?;
            let u = parse_point(&at, 3)?;
            let u = [u[0], u[1], u[2]];
            let q = quad.config(QuadratureConfig::default())?;
            let (cl, cu) = cl_cu(&t.c12, &t.c13, &t.c23, u, &q)?;
            let (fl, fu) = joe_bounds(&t.c12, &t.c13, &t.c23, u);
            print(&key_values(&[("C_L", cl), ("C_U", cu), ("F_L", fl), ("F_U", fu)]))?;
        }
        Command::Improvement { triple, grid: points, out, quad } => {
            if let Some(p) = &out {
                check_output_path(p)?;
            }
            let t = triple.load()?;
            let q = quad.config(QuadratureConfig::default())?;
            let report = improvement_report(&t.c12, &t.c13, &t.c23, grid(points)?, &q)?;
            let summary = format!("{}\n", report_summary(&report));
            match &out {
                Some(p) => {
                    write_output(Some(p), &report_csv(&report))?;
                    print(&summary)?;
                }
                // CSV first, then the summary as its own final line
                None => print(&(report_csv(&report) + &summary))?,
            }
        }
        Command::Sample { source, n, seed, out, quad } => {
            ensure!(n >= 1, "--n must be at least 1");
            if let Some(p) = &out {
                check_output_path(p)?;
            }
            let l = source.load(&quad)?;
            let workers = std::thread::available_parallelism().map_or(1, |w| w.get());
            let batch = sample_parallel(&l, n, seed, workers)?;
            write_output(out.as_deref(), &samples_csv(&batch))?;
        }
        Command::GridExport { source, grid: points, out, quad } => {
            if let Some(p) = &out {
                check_output_path(p)?;
            }
            let g = grid(points)?;
            let body = if bivariate_only(&source) {
                grid_csv2(&load_spec(require(source.a.as_deref(), "--a or --lift")?)?, g)
            } else {
                grid_csv3(&source.load(&quad)?, g)?
            };
            write_output(out.as_deref(), &body)?;
        }
    }
    Ok(0)
}

fn lift_value(source: &LiftArgs, at: &str, quad: &QuadArgs) -> Result<()> {
    let l = source.load(quad)?;
    let u = parse_point(at, 3)?;
    print(&key_values(&[("value", l.eval(u[0], u[1], u[2])?)]))
}

fn verdict_json(v: &CompatVerdict) -> serde_json::Value {
    json!({
        "status": if v.is_refuted() { "refuted" } else { "not_refuted" },
        "witness": v.witness,
        "grid": v.grid.points_per_axis(),
        "tol": v.tol,
    })
}
