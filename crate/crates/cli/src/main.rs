//! `fishbone` - instability diagrams for the coupled flexural-torsional
//! deck model.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

use clap::{Args, Parser, Subcommand, ValueEnum};
use fishbone::diagram::{self, AxisSpec, EngineKind, GridSpec, SweepOptions};
use fishbone::flexural::{flexural_energy, solve_flexural, SolveOptions, Tolerances};
use fishbone::floquet::monodromy_numeric;
use fishbone::limits::high_energy_verdict;
use fishbone::params::{parse_config, preset, Config};
use fishbone::piecewise::bar_delta;
use fishbone::projection::ProjectionKernel;
use fishbone::system::KernelSystem;
use fishbone::{Error, SlackeningModel};
use std::io::Write;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "fishbone", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Path to a key=value config file
    #[arg(long, global = true)]
    config: Option<String>,
    /// Named preset (academic, tnb); overrides file values
    #[arg(long, global = true)]
    preset: Option<String>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<Config, Error> {
        match (&self.config, &self.preset) {
            (_, Some(name)) => preset(name),
            (Some(path), None) => {
                let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })?;
                parse_config(&text)
            }
            (None, None) => Err(Error::Config(
                "no parameters: pass --config <file> or --preset <name>".into(),
            )),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Numeric,
    #[value(name = "closed-form")]
    ClosedForm,
}

impl From<EngineArg> for EngineKind {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Numeric => EngineKind::Numeric,
            EngineArg::ClosedForm => EngineKind::ClosedForm,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Pgm,
    Json,
}

#[derive(Args, Clone)]
struct SweepArgs {
    /// Amplitude axis as min:max:n
    #[arg(long = "q-range", allow_hyphen_values = true)]
    q_range: String,
    /// Spectral axis as min:max:n
    #[arg(long = "beta-range", allow_hyphen_values = true)]
    beta_range: String,
    #[arg(long, value_enum, default_value = "numeric")]
    engine: EngineArg,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<String>,
    /// |delta| = 2 boundary-band half width
    #[arg(long = "tol-class", default_value_t = fishbone::floquet::DEFAULT_CLASS_TOL)]
    tol_class: f64,
    /// Worker threads for the sweep
    #[arg(long)]
    jobs: Option<usize>,
    /// Integrator relative tolerance
    #[arg(long = "rel-tol", default_value_t = 1e-10)]
    rel_tol: f64,
    /// Integrator absolute tolerance
    #[arg(long = "abs-tol", default_value_t = 1e-12)]
    abs_tol: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep a (q, beta) grid and export the stability diagram
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Discriminant of a single (q, beta) cell
    Delta {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, allow_hyphen_values = true)]
        q: f64,
        /// Spectral value (defaults to the structural beta)
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<f64>,
        #[arg(long, value_enum, default_value = "numeric")]
        engine: EngineArg,
        #[arg(long = "tol-class", default_value_t = fishbone::floquet::DEFAULT_CLASS_TOL)]
        tol_class: f64,
    },
    /// One period of the pure-flexural orbit as CSV (t, u, du, E)
    Orbit {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        out: Option<String>,
    },
    /// Tabulate the projected force and Hill kernel over r as CSV
    Kernel {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Displacement axis as min:max:n
        #[arg(long = "r-range", allow_hyphen_values = true)]
        r_range: String,
        #[arg(long)]
        out: Option<String>,
    },
    /// High-energy limit constants and instability verdict as JSON
    Limit {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Tongue tip spectral values on the beta axis
    Tips {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long = "n-max", default_value_t = 5)]
        n_max: u32,
    },
    /// Check the slackening assumptions of the configured model
    CheckModel {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Run both engines on one grid and report the worst discrepancy
    CompareEngines {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[command(flatten)]
        sweep: SweepArgs,
    },
}

fn parse_range(text: &str) -> Result<AxisSpec, Error> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || Error::Config(format!("range `{text}` is not min:max:n"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let min: f64 = parts[0].parse().map_err(|_| bad())?;
    let max: f64 = parts[1].parse().map_err(|_| bad())?;
    let n: usize = parts[2].parse().map_err(|_| bad())?;
    AxisSpec::new(min, max, n)
}

fn write_out(out: &Option<String>, body: &[u8]) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, body).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body).map_err(|source| Error::Io {
                path: "<stdout>".into(),
                source,
            })
        }
    }
}

fn sweep_options(args: &SweepArgs) -> SweepOptions {
    SweepOptions {
        solve: SolveOptions {
            tol: Tolerances {
                rel: args.rel_tol,
                abs: args.abs_tol,
            },
            audit_energy: false,
            ..SolveOptions::default()
        },
        class_tol: args.tol_class,
        jobs: args.jobs,
        reuse_trajectory: true,
    }
}

fn run() -> Result<(), Error> {
    match Cli::parse().command {
        Command::Sweep { cfg, sweep } => {
            let config = cfg.resolve()?;
            let spec = GridSpec {
                q: parse_range(&sweep.q_range)?,
                beta: parse_range(&sweep.beta_range)?,
            };
            let opts = sweep_options(&sweep);
            let grid =
                diagram::sweep_grid(&config.params, &config.model, &spec, sweep.engine.into(), &opts)?;
            let mut buf = Vec::new();
            let io_err = |source: std::io::Error| Error::Io {
                path: "<buffer>".into(),
                source,
            };
            match sweep.format {
                FormatArg::Csv => diagram::write_csv(&grid, &mut buf).map_err(io_err)?,
                FormatArg::Pgm => diagram::write_pgm(&grid, &mut buf).map_err(io_err)?,
                FormatArg::Json => diagram::write_json_summary(&grid, &mut buf).map_err(io_err)?,
            }
            write_out(&sweep.out, &buf)
        }
        Command::Delta {
            cfg,
            q,
            beta,
            engine,
            tol_class,
        } => {
            let config = cfg.resolve()?;
            let params = config.params;
            let beta = beta.unwrap_or(params.beta);
            let report = match EngineKind::from(engine) {
                EngineKind::ClosedForm => {
                    let SlackeningModel::Mmk { m, r0 } = config.model else {
                        return Err(Error::Config(
                            "closed-form engine needs the mmk model".into(),
                        ));
                    };
                    let delta = bar_delta(&params, m, r0, q, beta)?;
                    let verdict = fishbone::floquet::classify(delta, tol_class)?;
                    serde_json::json!({
                        "q": q, "beta": beta, "engine": "closed_form",
                        "delta": delta, "class": verdict.class,
                    })
                }
                EngineKind::Numeric => {
                    let kernel = ProjectionKernel::preferring_closed_form(
                        config.model.clone(),
                        params.j,
                        params.k,
                    )?;
                    let sys = KernelSystem::new(&params, &kernel);
                    let out = monodromy_numeric(
                        &sys,
                        beta,
                        q,
                        &SolveOptions::default(),
                        None,
                        tol_class,
                    )?;
                    serde_json::json!({
                        "q": q, "beta": beta, "engine": "numeric",
                        "delta": out.verdict.delta, "class": out.verdict.class,
                        "period": out.period, "det_drift": out.det_drift,
                    })
                }
            };
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
            Ok(())
        }
        Command::Orbit { cfg, q, out } => {
            let config = cfg.resolve()?;
            let kernel = ProjectionKernel::preferring_closed_form(
                config.model.clone(),
                config.params.j,
                config.params.k,
            )?;
            let sys = KernelSystem::new(&config.params, &kernel);
            let traj = solve_flexural(&sys, q, &SolveOptions::default())?;
            let mut buf = String::from("t,u,du,energy\n");
            for s in &traj.samples {
                let e = flexural_energy(&sys, s.u, s.du)?;
                buf.push_str(&format!(
                    "{},{},{},{}\n",
                    diagram::fmt_f64(s.t),
                    diagram::fmt_f64(s.u),
                    diagram::fmt_f64(s.du),
                    diagram::fmt_f64(e)
                ));
            }
            write_out(&out, buf.as_bytes())
        }
        Command::Kernel { cfg, r_range, out } => {
            let config = cfg.resolve()?;
            let axis = parse_range(&r_range)?;
            let kernel = ProjectionKernel::preferring_closed_form(
                config.model.clone(),
                config.params.j,
                config.params.k,
            )?;
            let mut buf = String::from("r,f_j,g_jk\n");
            for r in axis.values() {
                buf.push_str(&format!(
                    "{},{},{}\n",
                    diagram::fmt_f64(r),
                    diagram::fmt_f64(kernel.f_j(r)?),
                    diagram::fmt_f64(kernel.g_jk(r)?)
                ));
            }
            write_out(&out, buf.as_bytes())
        }
        Command::Limit { cfg } => {
            let config = cfg.resolve()?;
            let verdict = high_energy_verdict(&config.params, &config.model)?;
            println!("{}", serde_json::to_string_pretty(&verdict).unwrap());
            Ok(())
        }
        Command::Tips { cfg, n_max } => {
            let config = cfg.resolve()?;
            let m = config.model.m_at_zero();
            let tips = diagram::tongue_tips(&config.params, m, n_max);
            println!("{}", serde_json::to_string_pretty(&tips).unwrap());
            Ok(())
        }
        Command::CheckModel { cfg } => {
            let config = cfg.resolve()?;
            let report = config.model.check_assumptions();
            let body = serde_json::json!({
                "model": config.model.describe(),
                "assumptions": report,
                "kinks": config.model.kinks(),
                "m_at_zero": config.model.m_at_zero(),
            });
            println!("{}", serde_json::to_string_pretty(&body).unwrap());
            Ok(())
        }
        Command::CompareEngines { cfg, sweep } => {
            let config = cfg.resolve()?;
            let SlackeningModel::Mmk { m, r0 } = config.model else {
                return Err(Error::Config(
                    "engine comparison needs the mmk model".into(),
                ));
            };
            let spec = GridSpec {
                q: parse_range(&sweep.q_range)?,
                beta: parse_range(&sweep.beta_range)?,
            };
            let opts = sweep_options(&sweep);
            let cmp = diagram::compare_engines(&config.params, m, r0, &spec, &opts)?;
            println!("{}", serde_json::to_string_pretty(&cmp).unwrap());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_configuration() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
