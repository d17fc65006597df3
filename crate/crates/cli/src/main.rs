use clap::{Args, Parser, Subcommand};
use extphase::harness::{
    convergence_for_config, drift_study, precession_study, run, run_sweep, write_outputs,
    ConfigOverrides, ExperimentConfig, NumOrText, ProblemId, SweepSpec, ROUND_OFF_FLOOR,
};
use extphase::problems::pericenter_precession_estimate;
use extphase::Error;
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_OTHER: u8 = 1;
const EXIT_DIVERGENCE: u8 = 2;
const EXIT_CONFIG: u8 = 3;

/// Extended phase space integrators: experiments and studies.
#[derive(Parser)]
#[command(name = "extphase", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Schwarzschild geodesic run.
    Geodesic(RunArgs),
    /// Forced van der Pol run.
    Vdp(RunArgs),
    /// Fitted convergence order over a list of step sizes.
    Converge {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated step sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        hs: Vec<f64>,
    },
    /// Secular slope of the running-max energy error of a geodesic run.
    Drift {
        #[command(flatten)]
        run: RunArgs,
        /// Run 3000 orbits instead of 300.
        #[arg(long)]
        long: bool,
    },
    /// Measured pericenter precession of a geodesic run.
    Precession(RunArgs),
    /// Independent runs from a sweep file, executed concurrently.
    Sweep {
        /// JSON file with `base` overrides and named `runs`.
        spec: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args, Clone, Default)]
struct RunArgs {
    /// JSON file with the same keys as the flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// schwarzschild, vdp or harmonic.
    #[arg(long)]
    problem: Option<String>,
    /// extended, method1, method2, implicit-midpoint or oracle.
    #[arg(long)]
    method: Option<String>,
    /// Catalog leapfrog, e.g. QPtQtP.
    #[arg(long)]
    scheme: Option<String>,
    /// Mid-step mixing as `aq,ap` or a preset name.
    #[arg(long)]
    mix1: Option<String>,
    /// End-of-step mixing as `aq,ap` or a preset name.
    #[arg(long)]
    mix2: Option<String>,
    /// Projection as `aq,ap` or a preset name.
    #[arg(long)]
    proj: Option<String>,
    /// extended or project-each-step.
    #[arg(long)]
    mode: Option<String>,
    /// none, kahan6 or yoshida4.
    #[arg(long)]
    composition: Option<String>,
    /// Step size; a trailing `P` means periods, e.g. `0.02P`.
    #[arg(long)]
    h: Option<String>,
    #[arg(long, conflicts_with = "t_end")]
    orbits: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    sample_every: Option<u64>,
    /// Skip the oracle comparison.
    #[arg(long)]
    no_compare: bool,
    /// CSV output path; a JSON summary is written beside it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    oracle_rtol: Option<f64>,
    #[arg(long)]
    oracle_atol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

impl RunArgs {
    fn overrides(&self) -> ConfigOverrides {
        ConfigOverrides {
            problem: self.problem.clone(),
            method: self.method.clone(),
            scheme: self.scheme.clone(),
            mix1: self.mix1.clone(),
            mix2: self.mix2.clone(),
            proj: self.proj.clone(),
            mode: self.mode.clone(),
            composition: self.composition.clone(),
            h: self.h.clone().map(NumOrText::Text),
            orbits: self.orbits,
            t_end: self.t_end,
            sample_every: self.sample_every,
            compare_oracle: self.no_compare.then_some(false),
            out: self.out.clone(),
            oracle_rtol: self.oracle_rtol,
            oracle_atol: self.oracle_atol,
            seed: self.seed,
            ..Default::default()
        }
    }

    /// Subcommand defaults, then the config file, then flags, then the
    /// problem the subcommand is bound to.
    fn resolve(&self, defaults: ConfigOverrides, pin: Option<&str>) -> Result<ExperimentConfig, Error> {
        let mut layers = vec![defaults];
        if let Some(path) = &self.config {
            layers.push(ConfigOverrides::from_file(path)?);
        }
        layers.push(self.overrides());
        if let Some(name) = pin {
            if let Some(other) = layers.iter().find_map(|l| l.problem.as_deref()) {
                if other.parse::<ProblemId>()? != name.parse::<ProblemId>()? {
                    return Err(Error::InvalidParameter(format!(
                        "this subcommand runs the {name} problem, not `{other}`"
                    )));
                }
            }
            layers.push(problem(name));
        }
        ExperimentConfig::from_layers(&layers)
    }
}

fn problem(name: &str) -> ConfigOverrides {
    ConfigOverrides {
        problem: Some(name.into()),
        ..Default::default()
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_divergence() {
        EXIT_DIVERGENCE
    } else if e.is_config() {
        EXIT_CONFIG
    } else {
        EXIT_OTHER
    }
}

fn print(v: &serde_json::Value) {
    use std::io::Write;
    let text = serde_json::to_string_pretty(v).expect("JSON values serialize");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn single_run(args: &RunArgs, pin: &str) -> Result<(), Error> {
    let cfg = args.resolve(ConfigOverrides::default(), Some(pin))?;
    let out = run(&cfg)?;
    if let Some(path) = &cfg.out {
        write_outputs(path, &out)?;
    }
    print(&serde_json::to_value(&out.summary)?);
    Ok(())
}

fn execute(cmd: Command) -> Result<u8, Error> {
    match cmd {
        Command::Geodesic(args) => single_run(&args, "schwarzschild")?,
        Command::Vdp(args) => single_run(&args, "vdp")?,
        Command::Converge { run: args, hs } => {
            let cfg = args.resolve(ConfigOverrides::default(), None)?;
            let report = convergence_for_config(&cfg, &hs, ROUND_OFF_FLOOR)?;
            print(&json!({
                "problem": cfg.problem,
                "method": cfg.method,
                "horizon": cfg.end_time(),
                "report": report,
            }));
        }
        Command::Drift { run: args, long } => {
            let forced = ConfigOverrides {
                orbits: Some(if long { 3000.0 } else { 300.0 }),
                compare_oracle: Some(false),
                ..Default::default()
            };
            let cfg = args.resolve(forced, Some("schwarzschild"))?;
            let out = run(&cfg)?;
            if let Some(path) = &cfg.out {
                write_outputs(path, &out)?;
            }
            let x: Vec<f64> = out.trajectory.iter().map(|s| s.step as f64).collect();
            let reference = out.summary.invariant_reference.unwrap_or(0.0);
            let dh: Vec<f64> = out
                .trajectory
                .iter()
                .map(|s| s.invariant.unwrap_or(f64::NAN) - reference)
                .collect();
            let report = drift_study(&x, &dh)?;
            print(&json!({
                "orbits": cfg.end_time() / cfg.period(),
                "n_steps": cfg.n_steps(),
                "evaluations": out.summary.evaluations,
                "drift_per_step": report,
            }));
        }
        Command::Precession(args) => {
            let forced = ConfigOverrides {
                compare_oracle: Some(false),
                ..Default::default()
            };
            let cfg = args.resolve(forced, Some("schwarzschild"))?;
            let out = run(&cfg)?;
            let report = precession_study(&out.trajectory)?;
            print(&json!({
                "method": cfg.method,
                "measured": report,
                "first_order_estimate": pericenter_precession_estimate(&cfg.schwarzschild),
            }));
        }
        Command::Sweep { spec, run: args } => {
            let text = std::fs::read_to_string(&spec)?;
            let sweep = SweepSpec::from_json_str(&text)?;
            let mut flags = args.overrides();
            let dir = flags.out.take();
            let mut extra = vec![];
            if let Some(path) = &args.config {
                extra.push(ConfigOverrides::from_file(path)?);
            }
            extra.push(flags);
            let configs = sweep.configs(&extra)?;
            let results = run_sweep(&configs, dir.as_deref());
            let mut code = 0;
            let rows: Vec<serde_json::Value> = results
                .iter()
                .map(|r| match &r.outcome {
                    Ok(s) => json!({"name": r.name, "ok": true, "evaluations": s.evaluations,
                                    "max_invariant_error": s.max_invariant_error,
                                    "comparison": s.comparison}),
                    Err(e) => {
                        code = code.max(exit_code(e));
                        json!({"name": r.name, "ok": false, "error": e.to_string()})
                    }
                })
                .collect();
            print(&serde_json::Value::Array(rows));
            return Ok(code);
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
