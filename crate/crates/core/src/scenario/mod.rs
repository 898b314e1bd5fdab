//! User trajectories and the multi-step simulation loop.

mod trajectory;

pub use trajectory::{
    export_trajectory, gen_aperiodic, gen_periodic, import_trajectory, Ground, Mobility, Trajectory, TrajectoryKind,
    TRAJECTORY_HEADER,
};

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::em::{RisConfiguration, SusceptibilityTable};
use crate::error::{Error, Result};
use crate::ga::{optimize_step, GaParams, MemoryPool, Objective, TraceRecord};
use crate::qos::{EvalContext, ThroughputReport};
use crate::scene::SceneGeometry;
use crate::seeds;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Memory-enhanced optimizer with the memory kept across steps.
    MeRisc,
    /// Plain adaptive GA: no replacement, no memory.
    GaRisc,
    /// No RIS: the RIS area behaves like the wall, nothing is optimized.
    NoRis,
    /// Memory-enhanced optimizer on a scene without the wall.
    RisOnly,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::MeRisc, Variant::GaRisc, Variant::NoRis, Variant::RisOnly];

    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::MeRisc => "me_risc",
            Variant::GaRisc => "ga_risc",
            Variant::NoRis => "no_ris",
            Variant::RisOnly => "ris_only",
        }
    }

    pub fn is_optimized(&self) -> bool {
        !matches!(self, Variant::NoRis)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::Param(format!("unknown variant '{s}' (expected me_risc, ga_risc, no_ris or ris_only)")))
    }
}

/// Inputs shared by all variants of one experiment.
#[derive(Debug, Clone, Copy)]
pub struct Experiment<'a> {
    pub scene: &'a SceneGeometry,
    pub table: &'a SusceptibilityTable,
    pub trajectory: &'a Trajectory,
    /// Total BS power Λ (W).
    pub total_power: f64,
    /// Noise power σ² (W).
    pub noise_power: f64,
    pub params: &'a GaParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub config: RisConfiguration,
    pub report: ThroughputReport,
    /// Best report after the first optimizer iteration.
    pub first_report: Option<ThroughputReport>,
    pub iterations: usize,
    pub stored: usize,
    pub restored: usize,
    /// Mean absolute state difference between the first-iteration best and the final configuration.
    pub delta_s_mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub variant: Variant,
    pub steps: Vec<StepRecord>,
    pub trace: Vec<TraceRecord>,
    /// Memory size after each step.
    pub memory_sizes: Vec<usize>,
}

impl RunResult {
    /// Time average of the worst-user throughput.
    pub fn mean_worst(&self) -> f64 {
        if self.steps.is_empty() {
            return 0.0;
        }
        self.steps.iter().map(|s| s.report.worst).sum::<f64>() / self.steps.len() as f64
    }
}

/// Simulates every step of the trajectory with one variant.
///
/// The optimizer of step `c` draws from the stream `[c]` of `seed`.
pub fn run(variant: Variant, exp: &Experiment<'_>, seed: u64) -> Result<RunResult> {
    exp.params.validate()?;
    let scene = match variant {
        Variant::RisOnly => exp.scene.without_wall(),
        _ => exp.scene.clone(),
    };
    let table = match variant {
        Variant::NoRis => exp.table.wall_only(),
        _ => exp.table.clone(),
    };
    let (params, capacity) = match variant {
        Variant::GaRisc => (exp.params.without_memory(), 0),
        _ => (exp.params.clone(), exp.params.memory_capacity),
    };
    let mut memory = MemoryPool::new(capacity);
    let mut result = RunResult { variant, steps: Vec::new(), trace: Vec::new(), memory_sizes: Vec::new() };
    for snap in &exp.trajectory.snapshots {
        let ctx = EvalContext::new(&scene, &table, snap, exp.total_power, exp.noise_power)?;
        let record = if variant.is_optimized() {
            let mut rng = seeds::rng(seed, &[snap.step as u64]);
            let out = optimize_step(&ctx, &params, &mut memory, snap.step, &mut rng)?;
            result.trace.extend(out.trace);
            StepRecord {
                step: snap.step,
                delta_s_mean: Some(out.first_best.mean_abs_difference(&out.best)),
                config: out.best,
                report: out.report,
                first_report: Some(out.first_report),
                iterations: out.iterations,
                stored: out.stored,
                restored: out.restored,
            }
        } else {
            let config = RisConfiguration::uniform(scene.num_ris(), 1);
            let report = ctx.evaluate(&config)?;
            StepRecord {
                step: snap.step,
                config,
                report,
                first_report: None,
                iterations: 0,
                stored: 0,
                restored: 0,
                delta_s_mean: None,
            }
        };
        log::debug!("{variant} step {}: worst {:.4} bit/s/Hz", snap.step, record.report.worst);
        result.steps.push(record);
        result.memory_sizes.push(memory.len());
    }
    Ok(result)
}

/// Re-scores every step's chosen configuration under a different noise power.
pub fn rescore(result: &RunResult, exp: &Experiment<'_>, noise_power: f64) -> Result<Vec<ThroughputReport>> {
    let scene = match result.variant {
        Variant::RisOnly => exp.scene.without_wall(),
        _ => exp.scene.clone(),
    };
    let table = match result.variant {
        Variant::NoRis => exp.table.wall_only(),
        _ => exp.table.clone(),
    };
    exp.trajectory
        .snapshots
        .iter()
        .zip(&result.steps)
        .map(|(snap, rec)| EvalContext::new(&scene, &table, snap, exp.total_power, noise_power)?.evaluate(&rec.config))
        .collect()
}

/// Writes one row per step and variant.
pub fn write_results<W: Write>(mut w: W, runs: &[RunResult]) -> Result<()> {
    let users = runs
        .iter()
        .flat_map(|r| r.steps.first())
        .map(|s| s.report.per_user.len())
        .max()
        .unwrap_or(0);
    writeln!(
        w,
        "# T_worst, T_l: bit/s/Hz; cost: Hz s/bit (1/T_worst); delta_s_mean: mean absolute state difference (states)"
    )?;
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<String> = ["step", "variant", "T_worst"].iter().map(|s| s.to_string()).collect();
    header.extend((1..=users).map(|l| format!("T_{l}")));
    header.extend(["cost", "iterations", "stored", "restored", "delta_s_mean"].iter().map(|s| s.to_string()));
    out.write_record(&header)?;
    for run in runs {
        for s in &run.steps {
            let mut row = vec![s.step.to_string(), run.variant.to_string(), s.report.worst.to_string()];
            row.extend(s.report.per_user.iter().map(f64::to_string));
            row.extend([
                s.report.cost.to_string(),
                s.iterations.to_string(),
                s.stored.to_string(),
                s.restored.to_string(),
                s.delta_s_mean.map_or(String::new(), |d| d.to_string()),
            ]);
            out.write_record(&row)?;
        }
    }
    out.flush()?;
    Ok(())
}
