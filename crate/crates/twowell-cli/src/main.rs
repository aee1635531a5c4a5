//! `twowell`: exact and asymptotic grand-canonical thermodynamics of the
//! attractive two-well boson gas, from the command line.
//!
//! Exit codes: 0 success, 2 invalid parameters, 3 non-equilibrium
//! single-point request, 4 I/O failure.

use std::fs::File;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use twowell::boundary::{asymptotic_coefficients, classify, divergence_lambda, sample_curve};
use twowell::eigen::{eigh_tridiagonal, ground_gap};
use twowell::meanfield::{collective_energy, minimize_energy, Phase};
use twowell::model::build_tridiagonal;
use twowell::saddle::{expansion_coefficients, landscape, xi_quadrature};
use twowell::scan::{
    emit, fit_exponent, parse_csv, run_sweep_with_jobs, spec_meta, validate_rows, EmitFormat,
    FitField, SweepPath, SweepSpec,
};
use twowell::thermo::{compressibility, dominant_mode, ensemble, SumOptions};
use twowell::{BathParams, Error, ModelParams};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "twowell", version, about = "Two-well boson gas thermodynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum PathKind {
    /// Vary lambda toward the curve at fixed mu.
    FixedMu,
    /// Vary mu toward the curve at fixed lambda.
    FixedLambda,
    /// Walk the lambda = lambda_c line toward the triple point.
    BoundaryLine,
    /// Approach an explicit target point diagonally.
    Ray,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues (and the gap) of one fixed-M sector.
    Spectrum {
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long, short = 'm')]
        size: usize,
        /// Print only the lowest COUNT eigenvalues.
        #[arg(long)]
        count: Option<usize>,
    },
    /// Collective mean-field minima and the phase at (gamma, lambda).
    Meanfield {
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        lambda: f64,
    },
    /// Thermal observables and dominant-mode occupation at one point.
    Thermo {
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long, allow_negative_numbers = true)]
        mu: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        /// Also report d<M>/dmu with this finite-difference step.
        #[arg(long)]
        step: Option<f64>,
    },
    /// Divergence-curve point, kappa, alpha and near-divergence coefficients.
    ///
    /// With --points, emits the whole curve from just below -lambda_c down
    /// to --mu as a table instead (the equilibrium-diagram backbone).
    Boundary {
        #[arg(long)]
        gamma: f64,
        /// Chemical potential of the requested curve point (or the lower end
        /// of the sampled curve when --points is given).
        #[arg(long, allow_negative_numbers = true)]
        mu: f64,
        /// Sample the curve at this many points and emit a table.
        #[arg(long)]
        points: Option<usize>,
        /// Output file for the curve table; stdout when omitted.
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// Saddle landscape, expansion coefficients and quadrature log Xi.
    Saddle {
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long, allow_negative_numbers = true)]
        mu: f64,
        #[arg(long)]
        beta: f64,
    },
    /// Sweep a path toward the divergence curve and emit a table.
    Scan {
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, value_enum)]
        path: PathKind,
        /// Fixed coupling (fixed-lambda path).
        #[arg(long)]
        lambda: Option<f64>,
        /// Fixed chemical potential (fixed-mu path).
        #[arg(long, allow_negative_numbers = true)]
        mu: Option<f64>,
        /// Ray target coupling (ray path).
        #[arg(long)]
        target_lambda: Option<f64>,
        /// Ray target chemical potential (ray path).
        #[arg(long, allow_negative_numbers = true)]
        target_mu: Option<f64>,
        /// First sampled distance to the target.
        #[arg(long)]
        start: f64,
        /// Last sampled distance to the target.
        #[arg(long)]
        end: f64,
        #[arg(long)]
        points: usize,
        /// Log-spaced distances instead of linear.
        #[arg(long)]
        log: bool,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<std::path::PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Fit log(field) against log(distance) in a previously emitted CSV.
    Fit {
        #[arg(long)]
        input: std::path::PathBuf,
        #[arg(long)]
        field: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            let code = match err {
                Error::InvalidParameter(_) | Error::NoBoundary { .. } => 2,
                Error::DivergentParameters { .. } => 3,
                Error::Io(_) => 4,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Spectrum {
            gamma,
            lambda,
            size,
            count,
        } => {
            let t = build_tridiagonal(ModelParams::new(gamma, lambda)?, size)?;
            let spectrum = eigh_tridiagonal(&t)?;
            println!("# sector M={size} gamma={gamma} lambda={lambda}");
            println!("gap {:.17e}", ground_gap(&spectrum));
            let shown = count.unwrap_or(spectrum.dimension()).min(spectrum.dimension());
            for (j, ev) in spectrum.eigenvalues().iter().take(shown).enumerate() {
                println!("E[{j}] {ev:.17e}");
            }
            Ok(())
        }
        Command::Meanfield { gamma, lambda } => {
            let params = ModelParams::new(gamma, lambda)?;
            let sol = minimize_energy(params);
            println!("lambda_c {:.17e}", sol.lambda_c);
            println!(
                "phase {}",
                match sol.phase {
                    Phase::Gapped => "gapped",
                    Phase::Degenerate => "degenerate",
                }
            );
            println!("phi_star {:.17e}", sol.phi_star);
            for (i, m) in sol.minima.iter().enumerate() {
                println!(
                    "minimum[{i}] theta {:.17e} energy_per_particle {:.17e}",
                    m.theta(),
                    collective_energy(*m, params)
                );
            }
            Ok(())
        }
        Command::Thermo {
            gamma,
            lambda,
            mu,
            beta,
            tol,
            step,
        } => {
            let params = ModelParams::new(gamma, lambda)?;
            let bath = BathParams::new(beta, mu)?;
            let (xi, obs) = ensemble(params, bath, SumOptions::with_tol(tol))?;
            println!("log_xi {:.17e}", xi.log_xi);
            println!("m_ax {}", xi.m_ax);
            println!("tail_estimate {:.3e}", xi.tail_estimate);
            println!("m_mean {:.17e}", obs.m_mean);
            println!("energy {:.17e}", obs.energy);
            println!("interaction {:.17e}", obs.interaction);
            println!("current {:.17e}", obs.current);
            println!("hop {:.17e}", obs.hop);
            println!("imbalance {:.3e}", obs.imbalance);
            let dm = dominant_mode(&obs)?;
            println!("theta_max {:.17e}", dm.theta_max);
            println!("phi_max {:.17e}", dm.phi_max);
            println!("n {:.17e}", dm.n);
            println!("n_perp {:.17e}", dm.n_perp);
            if let Some(step) = step {
                println!("compressibility {:.17e}", compressibility(params, bath, tol, step)?);
            }
            Ok(())
        }
        Command::Boundary {
            gamma,
            mu,
            points,
            out,
        } => {
            if let Some(points) = points {
                let curve = sample_curve(gamma, mu, points)?;
                let mut table = String::new();
                table.push_str(&format!(
                    "# twowell boundary v{VERSION} gamma={gamma:.16e} mu_min={mu:.16e} points={points}\n"
                ));
                table.push_str("mu_d,lambda_d,kappa,alpha,case\n");
                for bp in &curve {
                    table.push_str(&format!(
                        "{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
                        bp.mu_d,
                        bp.lambda_d,
                        bp.kappa,
                        bp.alpha,
                        bp.case_label.as_str()
                    ));
                }
                match out {
                    Some(path) => std::fs::write(&path, table)?,
                    None => print!("{table}"),
                }
                return Ok(());
            }
            let bp = divergence_lambda(mu, gamma)?;
            println!("lambda_c {:.17e}", bp.lambda_c);
            println!("lambda_d {:.17e}", bp.lambda_d);
            println!("mu_d {:.17e}", bp.mu_d);
            println!("kappa {:.17e}", bp.kappa);
            println!("alpha {:.17e}", bp.alpha);
            println!("case {}", bp.case_label.as_str());
            println!("triple_point {}", bp.is_triple_point);
            let c = asymptotic_coefficients(&bp, gamma);
            println!("e_coeff {:.17e}", c.e_coeff);
            println!("i_coeff {:.17e}", c.i_coeff);
            println!("j_coeff {:.17e}", c.j_coeff);
            println!("w_coeff {:.17e}", c.w_coeff);
            Ok(())
        }
        Command::Saddle {
            gamma,
            lambda,
            mu,
            beta,
        } => {
            let params = ModelParams::new(gamma, lambda)?;
            let region = classify(params, mu);
            println!("case {}", region.label.as_str());
            println!("f_star {:.17e}", region.f_star);
            let land = landscape(params, mu);
            for (i, (x, y)) in land.maxima.iter().enumerate() {
                println!("maximum[{i}] x {x:.17e} y {y:.17e}");
            }
            let coeffs = expansion_coefficients(params, mu)?;
            println!("subcase {:?}", coeffs.subcase);
            println!("alpha_x_sq {:.17e}", coeffs.alpha_x_sq);
            println!("alpha_y_sq {:.17e}", coeffs.alpha_y_sq);
            println!("gamma_y_sq {:.17e}", coeffs.gamma_y_sq);
            let bath = BathParams::new(beta, mu)?;
            println!("log_xi_quadrature {:.17e}", xi_quadrature(params, bath)?);
            Ok(())
        }
        Command::Scan {
            gamma,
            beta,
            path,
            lambda,
            mu,
            target_lambda,
            target_mu,
            start,
            end,
            points,
            log,
            tol,
            jobs,
            out,
            format,
        } => {
            let need = |v: Option<f64>, what: &str| {
                v.ok_or_else(|| Error::InvalidParameter(format!("--{what} required for this path")))
            };
            let path = match path {
                PathKind::FixedMu => SweepPath::FixedMuVaryLambda {
                    mu: need(mu, "mu")?,
                },
                PathKind::FixedLambda => SweepPath::FixedLambdaVaryMu {
                    lambda: need(lambda, "lambda")?,
                },
                PathKind::BoundaryLine => SweepPath::AlongCaseBoundary,
                PathKind::Ray => SweepPath::RayToPoint {
                    lambda_d: need(target_lambda, "target-lambda")?,
                    mu_d: need(target_mu, "target-mu")?,
                },
            };
            let spec = SweepSpec {
                gamma,
                beta,
                path,
                start,
                end,
                points,
                log_spacing: log,
                tol,
            };
            let rows = run_sweep_with_jobs(&spec, jobs)?;
            validate_rows(&rows)?;
            let fmt = match format {
                Format::Csv => EmitFormat::Csv,
                Format::Json => EmitFormat::Json,
            };
            let meta = spec_meta(&spec, VERSION);
            match out {
                Some(path) => {
                    let mut file = File::create(&path)?;
                    emit(&rows, fmt, &meta, &mut file)?;
                    file.flush()?;
                }
                None => {
                    let stdout = io::stdout();
                    let mut lock = stdout.lock();
                    emit(&rows, fmt, &meta, &mut lock)?;
                }
            }
            Ok(())
        }
        Command::Fit { input, field } => {
            let text = std::fs::read_to_string(&input)?;
            let (_, rows) = parse_csv(&text)?;
            let fit = fit_exponent(&rows, FitField::parse(&field)?)?;
            println!("slope {:.17e}", fit.slope);
            println!("intercept {:.17e}", fit.intercept);
            println!("r_squared {:.17e}", fit.r_squared);
            println!("points_used {}", fit.points_used);
            Ok(())
        }
    }
}
