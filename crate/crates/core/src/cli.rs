//! Batch front-end behind the `merisc` binary.
//!
//! Subcommands and their outputs (in `--out`, or `outputs.directory`
//! relative to the working directory):
//!
//! | command       | files                                                      |
//! |---------------|------------------------------------------------------------|
//! | `run`         | `results.csv`, `trace.csv`                                 |
//! | `compare`     | `results.csv`, `trace_me.csv`, `trace_ga.csv` (`trace_ris_only.csv`) |
//! | `sweep-noise` | `sweep.csv`                                                |
//! | `footprint`   | `footprint_<variant>_c<step>_b<beam>.csv`                  |
//! | `brute-force` | `brute_force.csv`                                          |
//!
//! Exit status is 0 on success, 1 for configuration errors and 2 for
//! failures while running. Files written by a failed invocation are removed.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};

use crate::beamforming::zf_weights;
use crate::config::{RunConfig, Setup};
use crate::em::{footprint, RisConfiguration};
use crate::error::{Error, Result};
use crate::ga::write_trace;
use crate::qos::{exhaustive, EvalContext, ThroughputReport};
use crate::scenario::{run, write_results, RunResult, Variant};

/// Largest configuration count `brute-force` will enumerate.
pub const BRUTE_FORCE_LIMIT: usize = 1 << 20;

#[derive(Debug, Parser)]
#[command(name = "merisc", version, about = "Memory-enhanced GA control of a quantized RIS in a multi-user MIMO down-link")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run configuration (TOML).
    #[arg(long, global = true, default_value = "merisc.toml")]
    pub config: PathBuf,
    /// Master seed.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Variant for `run` (default me_risc) or `footprint` (default: from the config).
    #[arg(long, global = true)]
    pub variant: Option<String>,
    /// Output directory; overrides `outputs.directory`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for fitness evaluation; 0 uses all cores.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Omit the timestamp line at the top of every output file.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    /// Also run the RIS-only variant in `compare` and `sweep-noise`.
    #[arg(long, global = true)]
    pub ris_only: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Simulate one variant.
    Run,
    /// Simulate ME-RISC, GA-RISC and no-RIS on the same trajectory.
    Compare,
    /// Repeat `compare` for every configured noise level.
    SweepNoise,
    /// Export beam power maps of selected steps.
    Footprint,
    /// Score every configuration of the first step.
    BruteForce,
}

/// A failed invocation and the exit status it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub error: Error,
}

impl Failure {
    fn config(error: Error) -> Self {
        Self { code: 1, error }
    }

    fn runtime(error: Error) -> Self {
        match error {
            Error::Config(_) => Self::config(error),
            error => Self { code: 2, error },
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(files) => {
            for f in files {
                log::info!("wrote {}", f.display());
            }
            0
        }
        Err(f) => {
            eprintln!("error: {}", f.error);
            f.code
        }
    }
}

/// Runs the parsed command and returns the files it wrote.
pub fn execute(cli: &Cli) -> std::result::Result<Vec<PathBuf>, Failure> {
    let inputs = Setup::load(&cli.config, cli.seed).map_err(Failure::config)?;
    let variant = cli
        .variant
        .as_deref()
        .map(str::parse::<Variant>)
        .transpose()
        .map_err(|e| Failure::config(Error::Config(format!("--variant: {e}"))))?;
    let dir = cli.out.clone().unwrap_or_else(|| inputs.config.outputs.directory.clone());
    let created_dir = !dir.exists();
    let mut out = Outputs { dir, timestamp: !cli.no_timestamp, written: Vec::new() };

    let result = with_threads(cli.threads, || dispatch(cli, &inputs, variant, &mut out));
    match result {
        Ok(()) => Ok(out.written),
        Err(e) => {
            for f in &out.written {
                let _ = fs::remove_file(f);
            }
            if created_dir {
                let _ = fs::remove_dir(&out.dir);
            }
            Err(Failure::runtime(e))
        }
    }
}

fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(f),
        Err(e) => {
            log::warn!("cannot build a {threads}-thread pool ({e}); using the global pool");
            f()
        }
    }
}

struct Outputs {
    dir: PathBuf,
    timestamp: bool,
    written: Vec<PathBuf>,
}

impl Outputs {
    fn write(&mut self, name: &str, body: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        if self.timestamp {
            let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
            writeln!(buf, "# generated at unix time {secs}")?;
        }
        body(&mut buf)?;
        fs::create_dir_all(&self.dir)?;
        let path = self.dir.join(name);
        self.written.push(path.clone());
        fs::write(&path, buf)?;
        Ok(())
    }
}

fn compared_variants(cli: &Cli, config: &RunConfig) -> Vec<Variant> {
    let mut v = vec![Variant::MeRisc, Variant::GaRisc, Variant::NoRis];
    if cli.ris_only || config.outputs.ris_only {
        v.push(Variant::RisOnly);
    }
    v
}

fn trace_name(v: Variant) -> &'static str {
    match v {
        Variant::MeRisc => "trace_me.csv",
        Variant::GaRisc => "trace_ga.csv",
        Variant::RisOnly => "trace_ris_only.csv",
        Variant::NoRis => "trace_no_ris.csv",
    }
}

fn dispatch(cli: &Cli, inputs: &Setup, variant: Option<Variant>, out: &mut Outputs) -> Result<()> {
    let config = &inputs.config;
    match cli.command {
        Command::Run => {
            let v = variant.unwrap_or(Variant::MeRisc);
            let result = run(v, &inputs.experiment(config.noise_power), cli.seed)?;
            out.write("results.csv", |w| write_results(w, std::slice::from_ref(&result)))?;
            out.write("trace.csv", |w| write_trace(w, &result.trace))?;
        }
        Command::Compare => {
            let exp = inputs.experiment(config.noise_power);
            let runs = compared_variants(cli, config)
                .into_iter()
                .map(|v| run(v, &exp, cli.seed))
                .collect::<Result<Vec<_>>>()?;
            out.write("results.csv", |w| write_results(w, &runs))?;
            for r in runs.iter().filter(|r| r.variant.is_optimized()) {
                out.write(trace_name(r.variant), |w| write_trace(w, &r.trace))?;
            }
        }
        Command::SweepNoise => {
            let variants = compared_variants(cli, config);
            let mut rows = Vec::new();
            for (&dbm, &watts) in config.scene.noise_sweep_dbm.iter().zip(&config.noise_sweep) {
                let exp = inputs.experiment(watts);
                let means = variants
                    .iter()
                    .map(|&v| run(v, &exp, cli.seed).map(|r| r.mean_worst()))
                    .collect::<Result<Vec<_>>>()?;
                rows.push((dbm, means));
            }
            out.write("sweep.csv", |w| write_sweep(w, &variants, &rows))?;
        }
        Command::Footprint => {
            let f = &config.outputs.footprint;
            let variants = match variant {
                Some(v) => vec![v],
                None => f.variants.iter().map(|s| s.parse()).collect::<Result<Vec<Variant>>>()?,
            };
            let exp = inputs.experiment(config.noise_power);
            for v in variants {
                let result = run(v, &exp, cli.seed)?;
                for &step in &f.steps {
                    write_footprints(inputs, &result, step, out)?;
                }
            }
        }
        Command::BruteForce => {
            let snap = inputs
                .trajectory
                .snapshots
                .first()
                .ok_or_else(|| Error::Trajectory("no time steps".into()))?;
            let ctx = EvalContext::new(&inputs.scene, &inputs.table, snap, config.total_power, config.noise_power)?;
            let table = exhaustive(&ctx, BRUTE_FORCE_LIMIT)?;
            out.write("brute_force.csv", |w| write_brute_force(w, &table))?;
        }
    }
    Ok(())
}

fn write_sweep<W: Write>(mut w: W, variants: &[Variant], rows: &[(f64, Vec<f64>)]) -> Result<()> {
    writeln!(w, "# noise_dbm: noise power (dBm); other columns: time-averaged worst-user throughput (bit/s/Hz)")?;
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["noise_dbm".to_string()];
    header.extend(variants.iter().map(|v| v.to_string()));
    out.write_record(&header)?;
    for (dbm, means) in rows {
        let mut row = vec![dbm.to_string()];
        row.extend(means.iter().map(f64::to_string));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

fn write_footprints(inputs: &Setup, result: &RunResult, step: usize, out: &mut Outputs) -> Result<()> {
    let config = &inputs.config;
    let record = result
        .steps
        .iter()
        .find(|s| s.step == step)
        .ok_or_else(|| Error::Param(format!("step {step} was not simulated")))?;
    let snap = inputs
        .trajectory
        .snapshots
        .iter()
        .find(|s| s.step == step)
        .ok_or_else(|| Error::Param(format!("no snapshot for step {step}")))?;
    let (scene, table) = match result.variant {
        Variant::RisOnly => (inputs.scene.without_wall(), inputs.table.clone()),
        Variant::NoRis => (inputs.scene.clone(), inputs.table.wall_only()),
        _ => (inputs.scene.clone(), inputs.table.clone()),
    };
    let ctx = EvalContext::new(&scene, &table, snap, config.total_power, config.noise_power)?;
    let channel = ctx.responses.channel(&record.config)?;
    let beams = zf_weights(&channel, config.total_power, ctx.rtol);
    let f = &config.outputs.footprint;
    let selected: Vec<usize> = if f.beams.is_empty() { (1..=beams.num_beams()).collect() } else { f.beams.clone() };
    for b in selected {
        if b > beams.num_beams() {
            return Err(Error::Param(format!("beam {b} requested but only {} users", beams.num_beams())));
        }
        let grid = footprint(&scene, &table, &record.config, &beams.weights, f.nx, f.ny, b - 1)?;
        let name = format!("footprint_{}_c{step}_b{b}.csv", result.variant);
        out.write(&name, |w| {
            writeln!(w, "# x, y: ground position (m); power: received power of the beam (W)")?;
            let mut csv = csv::Writer::from_writer(w);
            csv.write_record(["x", "y", "power"])?;
            for (x, y, p) in grid.rows() {
                csv.write_record([x.to_string(), y.to_string(), p.to_string()])?;
            }
            csv.flush()?;
            Ok(())
        })?;
    }
    Ok(())
}

fn write_brute_force<W: Write>(mut w: W, table: &[(RisConfiguration, ThroughputReport)]) -> Result<()> {
    let best = table
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.1.fitness().compare(&b.1.fitness()))
        .map(|(i, _)| i);
    writeln!(w, "# config: patch states joined by '-'; T_worst: bit/s/Hz; cost: Hz s/bit; optimal: 1 for the exhaustive optimum")?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["config", "T_worst", "cost", "optimal"])?;
    for (i, (config, report)) in table.iter().enumerate() {
        let optimal = if Some(i) == best { "1" } else { "0" };
        out.write_record([config.to_string(), report.worst.to_string(), report.cost.to_string(), optimal.to_string()])?;
    }
    out.flush()?;
    Ok(())
}
