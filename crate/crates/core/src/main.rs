use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use resolvent_lab::bounds::{calc_order, distortion_coefficients, disk_accretivity_bound, order_condition};
use resolvent_lab::cli::{format_complex, inline_spec, parse_complex, resolve_seed, write_fig1, write_fig2};
use resolvent_lab::resolvent::{solve_resolvent, SolverOptions};
use resolvent_lab::semigroup::{integrate, product_formula_ladder, squeeze_check, DEFAULT_N_LADDER};
use resolvent_lab::starlike::{theorem_vs_empirical, RhoMode};
use resolvent_lab::verify::{run_suite_named, SuiteConfig};
use resolvent_lab::{Error, GeneratorSpec};

const EXIT_VIOLATIONS: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NONCONVERGENCE: u8 = 3;

/// Resolvents of semigroup generators on the unit disk.
#[derive(Parser)]
#[command(name = "resolvent-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve w + λ p(w) w = z.
    Resolve {
        #[command(flatten)]
        generator: GeneratorArgs,
        #[arg(long)]
        lambda: f64,
        /// Point in the disk, e.g. 0.5 or 0.3-0.2i.
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iter: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Closed-form bounds for the generator's (q, a) at λ.
    Bounds {
        #[command(flatten)]
        generator: GeneratorArgs,
        #[arg(long)]
        lambda: f64,
    },
    /// CSV `lambda,distortion` for the distortion coefficient.
    Fig1 {
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        q: String,
        #[arg(long, default_value_t = 0.0)]
        a: f64,
        #[arg(long, default_value_t = 0.05)]
        lambda_min: f64,
        #[arg(long, default_value_t = 10.0)]
        lambda_max: f64,
        #[arg(long, default_value_t = 200)]
        n_points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// CSV `s,t_star` for the boundary of the (s, t) parameter region.
    Fig2 {
        #[arg(long, default_value_t = 0.01)]
        s_min: f64,
        #[arg(long, default_value_t = 4.0)]
        s_max: f64,
        #[arg(long, default_value_t = 200)]
        n_points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Starlikeness order of G_λ: certified value and sampled estimate.
    Order {
        #[command(flatten)]
        generator: GeneratorArgs,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 720)]
        samples: usize,
        #[arg(long, default_value_t = 0.999)]
        r_max: f64,
        #[arg(long, value_enum, default_value_t = RhoArg::Analytic)]
        rho_mode: RhoArg,
    },
    /// Integrate du/dt = -p(u) u and check the squeezing envelope.
    Semigroup {
        #[command(flatten)]
        generator: GeneratorArgs,
        #[arg(long, allow_hyphen_values = true)]
        z0: String,
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Also compare with iterated resolvents G_{t/n}^n for n = 8..128.
        #[arg(long)]
        product_formula: bool,
        /// Trajectory CSV destination (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite and write its JSON report.
    Verify {
        #[arg(long)]
        suite: String,
        /// JSON file with sampling options.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides RESOLVENT_LAB_SEED.
        #[arg(long)]
        seed: Option<u64>,
        /// Plant a falsified bound; the suite should then fail.
        #[arg(long)]
        negative_control: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct GeneratorArgs {
    /// Generator JSON file.
    #[arg(long, conflicts_with_all = ["q", "a", "theta"])]
    spec: Option<PathBuf>,
    /// p(0) for a single-atom generator, e.g. 1+0.5i.
    #[arg(long, allow_hyphen_values = true)]
    q: Option<String>,
    /// Floor a (default 0).
    #[arg(long)]
    a: Option<f64>,
    /// Atom angle (default 0).
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
}

impl GeneratorArgs {
    fn load(&self) -> Result<GeneratorSpec, Error> {
        match (&self.spec, &self.q) {
            (Some(path), _) => GeneratorSpec::load(path),
            (None, Some(q)) => inline_spec(parse_complex(q)?, self.a.unwrap_or(0.0), self.theta.unwrap_or(0.0)),
            (None, None) => Err(Error::Config("give either --spec FILE or --q (with optional --a, --theta)".into())),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum RhoArg {
    Analytic,
    Sampled,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::NonConvergence { .. } | Error::Integration { .. } => EXIT_NONCONVERGENCE,
        Error::Inconsistent(_) => EXIT_VIOLATIONS,
        _ => EXIT_INPUT,
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("json value serializes"));
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Resolve {
            generator,
            lambda,
            z,
            tol,
            max_iter,
            format,
        } => {
            let spec = generator.load()?;
            let z = parse_complex(&z)?;
            let sol = solve_resolvent(&spec, lambda, z, &SolverOptions {
                max_iter,
                ..SolverOptions::with_tol(tol)
            })?;
            match format {
                Format::Json => print_json(&json!({
                    "z": z,
                    "lambda": lambda,
                    "w": sol.w,
                    "g": sol.g,
                    "residual": sol.residual,
                    "iterations": sol.iterations,
                    "converged": sol.converged,
                })),
                Format::Text => {
                    println!("w = {}", format_complex(sol.w));
                    println!("g = {}", format_complex(sol.g));
                    println!("residual = {:e}", sol.residual);
                    println!("iterations = {}", sol.iterations);
                }
            }
            Ok(0)
        }
        Command::Bounds { generator, lambda } => {
            let spec = generator.load()?;
            let (q, a) = (spec.q(), spec.a());
            let set = distortion_coefficients(q, a, lambda)?;
            print_json(&json!({
                "bounds": set,
                "resolvent_accretivity_disk": disk_accretivity_bound(q, a, lambda)?,
                "order_condition": order_condition(q, a, lambda)?,
                "certified_order": calc_order(q, a, lambda)?,
            }));
            Ok(0)
        }
        Command::Fig1 {
            q,
            a,
            lambda_min,
            lambda_max,
            n_points,
            out,
        } => {
            write_fig1(output(out.as_deref())?, parse_complex(&q)?, a, lambda_min, lambda_max, n_points)?;
            Ok(0)
        }
        Command::Fig2 {
            s_min,
            s_max,
            n_points,
            out,
        } => {
            write_fig2(output(out.as_deref())?, s_min, s_max, n_points)?;
            Ok(0)
        }
        Command::Order {
            generator,
            lambda,
            samples,
            r_max,
            rho_mode,
        } => {
            let spec = generator.load()?;
            let mode = match rho_mode {
                RhoArg::Analytic => RhoMode::Analytic,
                RhoArg::Sampled => RhoMode::Sampled,
            };
            let comparison = theorem_vs_empirical(&spec, lambda, samples, r_max, mode, &SolverOptions::default())?;
            print_json(&json!({
                "certified": calc_order(spec.q(), spec.a(), lambda)?,
                "comparison": comparison,
            }));
            Ok(if comparison.violated { EXIT_VIOLATIONS } else { 0 })
        }
        Command::Semigroup {
            generator,
            z0,
            t_end,
            tol,
            product_formula,
            out,
        } => {
            let spec = generator.load()?;
            let z0 = parse_complex(&z0)?;
            let traj = integrate(&spec, z0, t_end, tol)?;
            traj.write_csv(output(out.as_deref())?, spec.a())?;
            let squeeze = squeeze_check(&traj, spec.a());
            eprintln!(
                "squeeze: {} (worst margin {:e}, {} steps)",
                if squeeze.ok { "ok" } else { "VIOLATED" },
                squeeze.worst_margin,
                traj.len() - 1
            );
            if product_formula {
                for p in product_formula_ladder(&spec, z0, t_end, &DEFAULT_N_LADDER)? {
                    eprintln!("n = {:>3}: gap {:e}", p.n, p.gap);
                }
            }
            Ok(if squeeze.ok { 0 } else { EXIT_VIOLATIONS })
        }
        Command::Verify {
            suite,
            config,
            seed,
            negative_control,
            out,
        } => {
            let seed = resolve_seed(seed)?;
            let mut cfg = match config {
                Some(path) => {
                    let text =
                        std::fs::read_to_string(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                    SuiteConfig::from_json(&text)?
                }
                None => SuiteConfig::default(),
            };
            cfg.negative_control |= negative_control;
            let report = run_suite_named(&suite, &cfg, seed)?;
            let mut sink = output(out.as_deref())?;
            writeln!(sink, "{}", report.to_json())?;
            sink.flush()?;
            eprintln!("{}", report.summary());
            Ok(if report.passed() { 0 } else { EXIT_VIOLATIONS })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
