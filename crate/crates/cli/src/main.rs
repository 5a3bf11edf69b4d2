//! `seqrd`: figure-ready data for sequential source coding over erasure
//! channels. Every command validates its inputs, computes through the
//! library, and emits CSV (default) or JSON to stdout or `--output`.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use seqrd_core::*;

#[derive(Parser)]
#[command(name = "seqrd", version, about = "Distortion traces and simulations for sequential coding over erasure channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Distortion trace under deterministic per-step rates.
    Region(Args),
    /// Steady-state distortion at a constant deterministic rate.
    Steady(Args),
    /// Rate factor and steady-state distortion under erasures.
    RandomRate(Args),
    /// Distortion trace under i.i.d. erasures with instantaneous feedback.
    Erasure(Args),
    /// Multi-packet splitting factors, fixed beta or a full beta sweep.
    Packets(Args),
    /// Rate of the two-sided side-information problem at one point.
    Kaspi(Args),
    /// Weighted inversion of the side-information rate at a rate budget.
    Invert(Args),
    /// Averaged distortion trace of the delayed-feedback scheme.
    Delayed(Args),
    /// The no-prediction, worst-case, and best-case reference traces.
    Baselines(Args),
    /// Sample-path Monte Carlo against the analytic traces.
    Simulate(Args),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Objective {
    Squared,
    Single,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Greedy,
    NoPrediction,
    WorstCase,
    BestCase,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Greedy => Scheme::Greedy,
            SchemeArg::NoPrediction => Scheme::NoPrediction,
            SchemeArg::WorstCase => Scheme::WorstCase,
            SchemeArg::BestCase => Scheme::BestCase,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Parser, Clone)]
struct Args {
    /// AR(1) coefficient, |alpha| < 1.
    #[arg(long)]
    alpha: Option<f64>,
    /// Innovation variance, > 0.
    #[arg(long)]
    w: Option<f64>,
    /// Rate budget in bits per sample.
    #[arg(long)]
    rate: Option<f64>,
    /// Packet arrival probability in [0, 1].
    #[arg(long)]
    beta: Option<f64>,
    /// Horizon (number of time steps).
    #[arg(long = "T")]
    horizon: Option<usize>,
    /// Largest packet count for the splitting sweep.
    #[arg(long)]
    max_n: Option<u32>,
    /// Splitting objective.
    #[arg(long, value_enum)]
    objective: Option<Objective>,
    /// Monte Carlo sample count (patterns or paths).
    #[arg(long)]
    samples: Option<u64>,
    /// Seed for all randomized commands.
    #[arg(long)]
    seed: Option<u64>,
    /// Use exact pattern-tree averaging (delayed).
    #[arg(long, conflicts_with = "mc")]
    exact: bool,
    /// Use Monte Carlo averaging (delayed).
    #[arg(long)]
    mc: bool,
    /// Use alpha instead of alpha^2 in the side-information powers.
    #[arg(long)]
    literal_alpha: bool,
    /// Source power without side information (kaspi, invert).
    #[arg(long)]
    s: Option<f64>,
    /// Residual power with side information (kaspi, invert).
    #[arg(long)]
    z: Option<f64>,
    /// Distortion target without side information.
    #[arg(long)]
    d_minus: Option<f64>,
    /// Distortion target with side information.
    #[arg(long)]
    d_plus: Option<f64>,
    /// Simulation scheme.
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// JSON file whose keys equal flag names; explicit flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

enum CliError {
    Validation(String),
    Solver(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_solver_failure() {
            CliError::Solver(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

impl Args {
    /// Fills unset fields from the `--config` JSON file.
    fn merged(mut self) -> CliResult<Self> {
        let Some(path) = self.config.clone() else { return Ok(self) };
        let text = fs::read_to_string(&path)
            .map_err(|e| CliError::Validation(format!("--config {}: {e}", path.display())))?;
        let cfg: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("--config {}: {e}", path.display())))?;
        let map = cfg
            .as_object()
            .ok_or_else(|| CliError::Validation("--config: top level must be an object".into()))?;

        fn f64_at(map: &serde_json::Map<String, Value>, key: &str) -> CliResult<Option<f64>> {
            match map.get(key) {
                None => Ok(None),
                Some(v) => v
                    .as_f64()
                    .map(Some)
                    .ok_or_else(|| CliError::Validation(format!("--config key '{key}' must be a number"))),
            }
        }
        fn u64_at(map: &serde_json::Map<String, Value>, key: &str) -> CliResult<Option<u64>> {
            match map.get(key) {
                None => Ok(None),
                Some(v) => v
                    .as_u64()
                    .map(Some)
                    .ok_or_else(|| CliError::Validation(format!("--config key '{key}' must be a nonnegative integer"))),
            }
        }
        fn bool_at(map: &serde_json::Map<String, Value>, key: &str) -> CliResult<bool> {
            match map.get(key) {
                None => Ok(false),
                Some(v) => v
                    .as_bool()
                    .ok_or_else(|| CliError::Validation(format!("--config key '{key}' must be a boolean"))),
            }
        }

        self.alpha = self.alpha.or(f64_at(map, "alpha")?);
        self.w = self.w.or(f64_at(map, "w")?);
        self.rate = self.rate.or(f64_at(map, "rate")?);
        self.beta = self.beta.or(f64_at(map, "beta")?);
        self.horizon = self.horizon.or(u64_at(map, "T")?.map(|v| v as usize));
        self.max_n = self.max_n.or(u64_at(map, "max-n")?.map(|v| v as u32));
        self.samples = self.samples.or(u64_at(map, "samples")?);
        self.seed = self.seed.or(u64_at(map, "seed")?);
        self.s = self.s.or(f64_at(map, "s")?);
        self.z = self.z.or(f64_at(map, "z")?);
        self.d_minus = self.d_minus.or(f64_at(map, "d-minus")?);
        self.d_plus = self.d_plus.or(f64_at(map, "d-plus")?);
        self.exact = self.exact || bool_at(map, "exact")?;
        self.mc = self.mc || bool_at(map, "mc")?;
        self.literal_alpha = self.literal_alpha || bool_at(map, "literal-alpha")?;
        if self.objective.is_none() {
            self.objective = match map.get("objective").and_then(Value::as_str) {
                None => None,
                Some("squared") => Some(Objective::Squared),
                Some("single") => Some(Objective::Single),
                Some(other) => {
                    return Err(CliError::Validation(format!(
                        "--config key 'objective' has unknown value '{other}'"
                    )))
                }
            };
        }
        if self.scheme.is_none() {
            self.scheme = match map.get("scheme").and_then(Value::as_str) {
                None => None,
                Some("greedy") => Some(SchemeArg::Greedy),
                Some("no-prediction") => Some(SchemeArg::NoPrediction),
                Some("worst-case") => Some(SchemeArg::WorstCase),
                Some("best-case") => Some(SchemeArg::BestCase),
                Some(other) => {
                    return Err(CliError::Validation(format!(
                        "--config key 'scheme' has unknown value '{other}'"
                    )))
                }
            };
        }
        Ok(self)
    }

    fn require_f64(&self, value: Option<f64>, flag: &str) -> CliResult<f64> {
        value.ok_or_else(|| CliError::Validation(format!("missing required flag --{flag}")))
    }

    fn alpha(&self) -> CliResult<f64> {
        self.require_f64(self.alpha, "alpha")
    }
    fn w(&self) -> CliResult<f64> {
        self.require_f64(self.w, "w")
    }
    fn rate(&self) -> CliResult<f64> {
        self.require_f64(self.rate, "rate")
    }
    fn beta(&self) -> CliResult<f64> {
        self.require_f64(self.beta, "beta")
    }
    fn horizon(&self) -> CliResult<usize> {
        self.horizon
            .ok_or_else(|| CliError::Validation("missing required flag --T".into()))
    }
    fn s(&self) -> CliResult<f64> {
        self.require_f64(self.s, "s")
    }
    fn z(&self) -> CliResult<f64> {
        self.require_f64(self.z, "z")
    }
    fn d_minus(&self) -> CliResult<f64> {
        self.require_f64(self.d_minus, "d-minus")
    }
    fn d_plus(&self) -> CliResult<f64> {
        self.require_f64(self.d_plus, "d-plus")
    }

    fn emit(&self, csv: String, json: Value) -> CliResult<()> {
        let text = match self.format {
            Format::Csv => csv,
            Format::Json => format!("{:#}\n", json),
        };
        match &self.output {
            None => {
                print!("{text}");
                Ok(())
            }
            Some(path) => fs::write(path, text)
                .map_err(|e| CliError::Validation(format!("--output {}: {e}", path.display()))),
        }
    }
}

fn trace_csv(header: &str, columns: &[&[f64]]) -> String {
    let mut out = format!("t,{header}\n");
    for t in 0..columns[0].len() {
        out.push_str(&format!("{}", t + 1));
        for col in columns {
            out.push_str(&format!(",{:.16e}", col[t]));
        }
        out.push('\n');
    }
    out
}

fn cmd_region(a: &Args) -> CliResult<()> {
    let horizon = a.horizon()?;
    let sched = SourceSchedule::constant(a.alpha()?, a.w()?, horizon)?;
    let trace = distortion_trace(&sched, &vec![a.rate()?; horizon])?;
    a.emit(
        trace_csv("distortion", &[&trace.values]),
        json!({ "distortion": trace.values, "steady": trace.steady }),
    )
}

fn cmd_steady(a: &Args) -> CliResult<()> {
    let d = steady_distortion(a.alpha()?, a.w()?, a.rate()?)?;
    a.emit(format!("{d:.7}\n"), json!({ "steady": d }))
}

fn cmd_random_rate(a: &Args) -> CliResult<()> {
    let policy = RatePolicy::Erasure { beta: a.beta()?, rate: a.rate()? };
    let b = rate_factor(&policy)?;
    let steady = steady_random(a.alpha()?, a.w()?, b)?;
    a.emit(
        format!("factor,steady\n{b:.16e},{steady:.16e}\n"),
        json!({ "factor": b, "steady": steady }),
    )
}

fn cmd_erasure(a: &Args) -> CliResult<()> {
    let horizon = a.horizon()?;
    let sched = SourceSchedule::constant(a.alpha()?, a.w()?, horizon)?;
    let policy = RatePolicy::Erasure { beta: a.beta()?, rate: a.rate()? };
    let trace = random_rate_trace(&sched, &vec![policy; horizon])?;
    a.emit(
        trace_csv("distortion", &[&trace.values]),
        json!({ "distortion": trace.values, "steady": trace.steady }),
    )
}

fn cmd_packets(a: &Args) -> CliResult<()> {
    let rate = a.rate()?;
    let max_n = a.max_n.unwrap_or(8);
    let objective = match a.objective.unwrap_or(Objective::Squared) {
        Objective::Squared => PacketObjective::SquaredExponent,
        Objective::Single => PacketObjective::SingleExponent,
    };
    match a.beta {
        Some(beta) => {
            let (best, factors) = optimize_packets(rate, beta, max_n, objective)?;
            let mut csv = String::from("n,factor\n");
            for (i, f) in factors.iter().enumerate() {
                csv.push_str(&format!("{},{:.16e}\n", i + 1, f));
            }
            a.emit(csv, json!({ "beta": beta, "factors": factors, "best_n": best }))
        }
        None => {
            // Default sweep: 101 uniform beta points on [0, 1].
            let mut csv = String::from("beta,best_n,factor\n");
            let mut rows = Vec::new();
            for i in 0..=100u32 {
                let beta = i as f64 / 100.0;
                let (best, factors) = optimize_packets(rate, beta, max_n, objective)?;
                let f = factors[best as usize - 1];
                csv.push_str(&format!("{beta:.2},{best},{f:.16e}\n"));
                rows.push(json!({ "beta": beta, "best_n": best, "factor": f }));
            }
            a.emit(csv, Value::Array(rows))
        }
    }
}

fn cmd_kaspi(a: &Args) -> CliResult<()> {
    let p = KaspiPoint::new(a.s()?, a.z()?, a.d_minus()?, a.d_plus()?)?;
    let case = classify_case(&p)?;
    let rate = kaspi_rate(&p)?;
    a.emit(
        format!("rate,case\n{rate:.16e},{case:?}\n"),
        json!({ "rate": rate, "case": case }),
    )
}

fn cmd_invert(a: &Args) -> CliResult<()> {
    let sol = invert_weighted(a.s()?, a.z()?, a.rate()?, a.beta()?)?;
    a.emit(
        format!(
            "d_minus,d_plus,weighted,achieved_rate,case\n{:.16e},{:.16e},{:.16e},{:.16e},{:?}\n",
            sol.d_minus, sol.d_plus, sol.weighted, sol.achieved_rate, sol.case
        ),
        serde_json::to_value(sol).expect("solution serializes"),
    )
}

fn cmd_delayed(a: &Args) -> CliResult<()> {
    let method = if a.mc {
        AverageMethod::MonteCarlo {
            samples: a.samples.unwrap_or(100_000),
            seed: a.seed.unwrap_or(0),
        }
    } else {
        // Exact is the default; --exact makes it explicit.
        AverageMethod::Exact
    };
    let convention = if a.literal_alpha { AlphaConvention::Literal } else { AlphaConvention::Squared };
    let trace = average_trace(a.alpha()?, a.w()?, a.rate()?, a.beta()?, a.horizon()?, method, convention)?;
    let csv = match &trace.standard_errors {
        None => trace_csv("distortion", &[&trace.values]),
        Some(se) => trace_csv("distortion,stderr", &[&trace.values, se]),
    };
    a.emit(
        csv,
        json!({ "distortion": trace.values, "stderr": trace.standard_errors }),
    )
}

fn cmd_baselines(a: &Args) -> CliResult<()> {
    let (alpha, w, rate, beta, horizon) = (a.alpha()?, a.w()?, a.rate()?, a.beta()?, a.horizon()?);
    let nopred = baseline_no_prediction(alpha, w, rate, beta, horizon)?;
    let wc = baseline_worst_case(alpha, w, rate, beta, horizon)?;
    let bc = baseline_best_case(alpha, w, rate, beta, horizon)?;
    a.emit(
        trace_csv(
            "no_prediction,worst_case,best_case",
            &[&nopred.values, &wc.values, &bc.values],
        ),
        json!({
            "no_prediction": { "values": nopred.values, "steady": nopred.steady },
            "worst_case": { "values": wc.values, "steady": wc.steady },
            "best_case": { "values": bc.values, "steady": bc.steady },
        }),
    )
}

fn cmd_simulate(a: &Args) -> CliResult<()> {
    let scheme = a
        .scheme
        .ok_or_else(|| CliError::Validation("missing required flag --scheme".into()))?;
    let cfg = SimConfig {
        alpha: a.alpha()?,
        w: a.w()?,
        rate: a.rate()?,
        beta: a.beta.unwrap_or(1.0),
        scheme: scheme.into(),
        horizon: a.horizon()?,
        paths: a.samples.unwrap_or(100_000),
        seed: a.seed.unwrap_or(0),
    };
    let report = simulate(&cfg)?;
    let json = serde_json::to_value(&report).expect("report serializes");
    a.emit(report.to_csv(), json)
}

fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Region(a) => cmd_region(&a.merged()?),
        Command::Steady(a) => cmd_steady(&a.merged()?),
        Command::RandomRate(a) => cmd_random_rate(&a.merged()?),
        Command::Erasure(a) => cmd_erasure(&a.merged()?),
        Command::Packets(a) => cmd_packets(&a.merged()?),
        Command::Kaspi(a) => cmd_kaspi(&a.merged()?),
        Command::Invert(a) => cmd_invert(&a.merged()?),
        Command::Delayed(a) => cmd_delayed(&a.merged()?),
        Command::Baselines(a) => cmd_baselines(&a.merged()?),
        Command::Simulate(a) => cmd_simulate(&a.merged()?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Solver(msg)) => {
            eprintln!("solver error: {msg}");
            ExitCode::from(3)
        }
    }
}
