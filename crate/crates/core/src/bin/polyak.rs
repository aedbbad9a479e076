use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use polyak::certificates::{self, CheckOptions, IdentityTag};
use polyak::experiment::{self, CurveRule, ExperimentConfig, FStarPolicy};
use polyak::oracles::RegularityClass;
use polyak::pep::{self, PepRule};
use polyak::{Error, Execution, Result};

#[derive(Parser)]
#[command(
    name = "polyak",
    version,
    about = "Polyak-step gradient methods: experiments, rates and certificates"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    /// Run everything on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    /// `exact`, `presolve` or a number.
    #[arg(long, global = true)]
    fstar: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write traces plus summary.csv.
    Run { config: PathBuf },
    /// Write a rate curve over the rule's step-size interval, or a κ sweep.
    Rates {
        #[arg(long)]
        mu: f64,
        #[arg(long, default_value_t = 1.0)]
        l: f64,
        /// variant1, variant2, polyak or adaptive.
        #[arg(long, default_value = "variant1")]
        rule: String,
        #[arg(long, default_value_t = 1001)]
        grid: usize,
        /// Comma-separated κ values; writes the worst case per κ (L = 1, mu ignored).
        #[arg(long, value_delimiter = ',')]
        kappas: Option<Vec<f64>>,
    },
    /// Check proof certificates on random samples.
    Certify {
        /// Comma-separated tags; all when omitted.
        #[arg(long, value_delimiter = ',')]
        tags: Option<Vec<String>>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// One-step worst case at a step size, or swept over the interval.
    Pep {
        #[arg(long)]
        mu: f64,
        #[arg(long, default_value_t = 1.0)]
        l: f64,
        /// variant1 or polyak.
        #[arg(long, default_value = "variant1")]
        rule: String,
        #[arg(long, conflicts_with = "sweep")]
        gamma: Option<f64>,
        #[arg(long)]
        sweep: bool,
        #[arg(long, default_value_t = 200)]
        grid: usize,
    },
    /// Histogram of the step_or_mu column of a trace.
    Hist {
        trace: PathBuf,
        #[arg(long, default_value_t = 50)]
        bins: usize,
        /// Bin range; the observed range when omitted.
        #[arg(long, requires = "hi")]
        lo: Option<f64>,
        #[arg(long, requires = "lo")]
        hi: Option<f64>,
    },
}

fn pep_rule(name: &str) -> Result<PepRule> {
    match name {
        "variant1" => Ok(PepRule::VariantI),
        "polyak" => Ok(PepRule::RegularPolyak),
        other => Err(Error::Config(format!(
            "no performance estimate for rule `{other}`"
        ))),
    }
}

fn out_dir(global: &Global) -> Result<PathBuf> {
    let dir = global
        .out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn execute(cli: Cli) -> Result<()> {
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let g = &cli.global;
    match cli.command {
        Command::Run { ref config } => {
            let mut cfg = ExperimentConfig::from_file(config)?;
            if let Some(s) = g.seed {
                cfg.seed = s;
            }
            if let Some(d) = &g.out_dir {
                cfg.out_dir = d.clone();
            }
            if let Some(t) = g.tol {
                cfg.tol = t;
            }
            if let Some(m) = g.max_iter {
                cfg.max_iter = m;
            }
            if let Some(f) = &g.fstar {
                cfg.f_star = f.parse::<FStarPolicy>()?;
            }
            let out = experiment::run_experiment(&cfg, exec)?;
            println!("f* = {} ({:?})", out.f_star, out.f_star_confidence);
            println!(
                "{:<12} {:>10} {:>12} {:>12} {:>12}  termination",
                "method", "iters", "iters_to_tol", "final_gap", "best_gap"
            );
            for s in &out.summary {
                let to_tol = s
                    .iterations_to_tol
                    .map_or_else(|| "-".to_string(), |k| k.to_string());
                println!(
                    "{:<12} {:>10} {:>12} {:>12.3e} {:>12.3e}  {}",
                    s.method.name(),
                    s.iterations,
                    to_tol,
                    s.final_gap,
                    s.best_gap,
                    s.termination
                );
            }
            for f in &out.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Rates {
            mu,
            l,
            ref rule,
            grid,
            ref kappas,
        } => {
            let rule: CurveRule = rule.parse()?;
            let dir = out_dir(g)?;
            let path = match kappas {
                Some(kappas) => {
                    let pts = experiment::kappa_sweep(kappas, rule, grid, exec)?;
                    let path = dir.join(format!("kappa_sweep_{rule}.csv"));
                    experiment::write_sweep_csv(&pts, &path)?;
                    for p in &pts {
                        println!(
                            "kappa={:<10} rho_max={:.9} analytic={:.9}",
                            p.kappa, p.rho_max, p.rho_max_analytic
                        );
                    }
                    path
                }
                None => {
                    let class = RegularityClass::new(mu, l)?;
                    let pts = experiment::emit_rate_curves(class, rule, grid, exec)?;
                    let max = pts.iter().map(|p| p.rho).fold(f64::NEG_INFINITY, f64::max);
                    let path = dir.join(format!("rates_{rule}.csv"));
                    experiment::write_curve_csv(&pts, &path)?;
                    println!(
                        "max rho on grid = {max:.9}; closed-form worst case = {:.9}",
                        rule.analytic_max(class)
                    );
                    path
                }
            };
            println!("wrote {}", path.display());
        }
        Command::Certify { ref tags, samples } => {
            let tags = match tags {
                Some(t) => t
                    .iter()
                    .map(|s| s.parse())
                    .collect::<Result<Vec<IdentityTag>>>()?,
                None => IdentityTag::ALL.to_vec(),
            };
            let opts = CheckOptions {
                samples,
                seed: g.seed.unwrap_or(0),
                tol: g.tol.unwrap_or(certificates::RESIDUAL_TOL),
                exec,
                ..CheckOptions::default()
            };
            let reports = certificates::check_all(&tags, &opts)?;
            print!("{}", certificates::render_text(&reports));
            let path = out_dir(g)?.join("certificates.csv");
            certificates::write_csv(&reports, fs::File::create(&path)?)?;
            println!("wrote {}", path.display());
            let failed = reports.iter().filter(|r| !r.passed()).count();
            if failed > 0 {
                return Err(Error::InvalidParameter(format!(
                    "{failed} certificate checks failed"
                )));
            }
        }
        Command::Pep {
            mu,
            l,
            ref rule,
            gamma,
            sweep,
            grid,
        } => {
            let class = RegularityClass::new(mu, l)?;
            let rule = pep_rule(rule)?;
            match (gamma, sweep) {
                (Some(gamma), _) => {
                    let s = pep::solve_rho_of_gamma(class, gamma, rule)?;
                    println!("gamma = {gamma}");
                    println!("rho = {:.12}", s.objective);
                    println!(
                        "worst case: G = {:.6e}, GX = {:.6e}, f-f* = {:.6e}, active = {:?}",
                        s.vars.g, s.vars.gx, s.vars.fgap, s.active
                    );
                }
                (None, true) => {
                    let sw = pep::sweep_gamma(class, rule, grid, exec)?;
                    let (lo, hi) = rule.admissible_interval(class);
                    println!("interval [{lo}, {hi}]");
                    println!("max rho = {:.12} at gamma = {:.9}", sw.max, sw.argmax);
                    let path = out_dir(g)?.join(format!("pep_{}.csv", rule.name()));
                    let pts: Vec<_> = sw
                        .points
                        .iter()
                        .map(|&(gamma, rho)| experiment::CurvePoint {
                            gamma,
                            rho,
                            rho_analytic: None,
                        })
                        .collect();
                    experiment::write_curve_csv(&pts, &path)?;
                    println!("wrote {}", path.display());
                }
                (None, false) => return Err(Error::Config("pass --gamma or --sweep".to_string())),
            }
        }
        Command::Hist {
            ref trace,
            bins,
            lo,
            hi,
        } => {
            let hist = experiment::histogram_from_trace(trace, lo.zip(hi), bins)?;
            let path = out_dir(g)?.join("histogram.csv");
            experiment::write_histogram_csv(&hist, &path)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
