//! Run configuration file (TOML).
//!
//! ```toml
//! [scene]      # geometry, carrier, power and noise (dBm); see SceneConfig
//! [table]      # bits, amplitude, phase_law, wall, or path to a table file
//! [ga]         # optimizer parameters; omitted keys take the defaults
//! [scenario]   # kind = "aperiodic" | "periodic" | "imported", steps, users, ...
//! [outputs]    # directory, footprint grid and selection
//! ```
//!
//! Unknown keys anywhere are errors. Relative input paths are resolved
//! against the directory of the configuration file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::em::{calibrate_state_table, PhaseLaw, SusceptibilityTable, WallModel};
use crate::error::{Error, Result};
use crate::ga::GaParams;
use crate::scenario::{gen_aperiodic, Experiment, gen_periodic, import_trajectory, Ground, Mobility, Trajectory, Variant};
use crate::scene::{build_scene, SceneConfig, SceneGeometry};
use crate::{seeds, units};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TableConfig {
    pub bits: u8,
    /// Reflection magnitude targeted by every state.
    pub amplitude: f64,
    pub phase_law: PhaseLaw,
    pub wall: WallModel,
    /// Precomputed table in the text format; overrides the fields above.
    pub path: Option<PathBuf>,
}

impl Default for TableConfig {
    fn default() -> Self {
        Self { bits: 3, amplitude: 0.9, phase_law: PhaseLaw::default(), wall: WallModel::default(), path: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectorySource {
    #[default]
    Aperiodic,
    Periodic,
    Imported,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub kind: TrajectorySource,
    /// Number of time steps C.
    pub steps: usize,
    /// Number of users L.
    pub users: usize,
    /// Loop length in steps, for periodic trajectories.
    pub period: Option<usize>,
    pub mobility: Mobility,
    /// Trajectory CSV, for imported trajectories.
    pub path: Option<PathBuf>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self { kind: TrajectorySource::Aperiodic, steps: 100, users: 3, period: None, mobility: Mobility::default(), path: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FootprintConfig {
    pub nx: usize,
    pub ny: usize,
    /// Time steps to export (1-based).
    pub steps: Vec<usize>,
    /// Beams to export (1-based); empty means all.
    pub beams: Vec<usize>,
    pub variants: Vec<String>,
}

impl Default for FootprintConfig {
    fn default() -> Self {
        Self { nx: 61, ny: 41, steps: vec![1], beams: Vec::new(), variants: vec!["me_risc".into(), "no_ris".into()] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: PathBuf,
    /// Include the RIS-only variant in `compare` and `sweep-noise`.
    pub ris_only: bool,
    pub footprint: FootprintConfig,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: PathBuf::from("out"), ris_only: false, footprint: FootprintConfig::default() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawConfig {
    scene: SceneConfig,
    table: TableConfig,
    ga: GaParams,
    scenario: ScenarioConfig,
    outputs: OutputConfig,
}

/// Validated run configuration with powers converted to watts.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scene: SceneConfig,
    pub table: TableConfig,
    pub ga: GaParams,
    pub scenario: ScenarioConfig,
    pub outputs: OutputConfig,
    /// Λ (W).
    pub total_power: f64,
    /// σ² (W).
    pub noise_power: f64,
    /// Noise levels of the sweep (W).
    pub noise_sweep: Vec<f64>,
    /// Directory relative input paths are resolved against.
    pub base_dir: PathBuf,
}

fn invalid(path: &str, e: impl std::fmt::Display) -> Error {
    Error::Config(format!("{path}: {e}"))
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_config_str(&text, &base).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_config_str(text: &str, base_dir: &Path) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))?;
    let finite_dbm = |name: &str, v: f64| {
        if v.is_finite() {
            Ok(units::dbm_to_watts(v))
        } else {
            Err(invalid(name, "must be finite"))
        }
    };
    let total_power = finite_dbm("scene.power_dbm", raw.scene.power_dbm)?;
    let noise_power = finite_dbm("scene.noise_dbm", raw.scene.noise_dbm)?;
    let noise_sweep = raw
        .scene
        .noise_sweep_dbm
        .iter()
        .map(|&v| finite_dbm("scene.noise_sweep_dbm", v))
        .collect::<Result<Vec<_>>>()?;
    raw.ga.validate().map_err(|e| invalid("ga", e))?;
    build_scene(&raw.scene).map_err(|e| invalid("scene", e))?;

    let t = &raw.table;
    if t.path.is_none() && !(t.amplitude > 0.0 && t.amplitude <= 1.0) {
        return Err(invalid("table.amplitude", format!("must lie in (0, 1], got {}", t.amplitude)));
    }
    if t.path.is_none() && !(1..=8).contains(&t.bits) {
        return Err(invalid("table.bits", format!("must lie in 1..=8, got {}", t.bits)));
    }

    let s = &raw.scenario;
    if s.steps == 0 {
        return Err(invalid("scenario.steps", "must be at least 1"));
    }
    if s.users == 0 {
        return Err(invalid("scenario.users", "must be at least 1"));
    }
    if !(s.mobility.v_max >= 0.0 && s.mobility.dt > 0.0) {
        return Err(invalid("scenario.mobility", "v_max must be non-negative and dt positive"));
    }
    match s.kind {
        TrajectorySource::Periodic => match s.period {
            Some(p) if p >= 2 && p <= s.steps => {}
            Some(p) => return Err(invalid("scenario.period", format!("must lie in 2..={}, got {p}", s.steps))),
            None => return Err(invalid("scenario.period", "required for periodic trajectories")),
        },
        TrajectorySource::Imported if s.path.is_none() => {
            return Err(invalid("scenario.path", "required for imported trajectories"));
        }
        _ => {}
    }
    let f = &raw.outputs.footprint;
    if f.nx < 2 || f.ny < 2 {
        return Err(invalid("outputs.footprint", "grid must be at least 2x2"));
    }
    if f.steps.iter().any(|&c| c == 0 || c > s.steps) {
        return Err(invalid("outputs.footprint.steps", format!("steps must lie in 1..={}", s.steps)));
    }
    if f.beams.contains(&0) {
        return Err(invalid("outputs.footprint.beams", "beams are 1-based"));
    }
    for v in &f.variants {
        v.parse::<Variant>().map_err(|e| invalid("outputs.footprint.variants", e))?;
    }

    Ok(RunConfig {
        scene: raw.scene,
        table: raw.table,
        ga: raw.ga,
        scenario: raw.scenario,
        outputs: raw.outputs,
        total_power,
        noise_power,
        noise_sweep,
        base_dir: base_dir.to_path_buf(),
    })
}

impl RunConfig {
    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn build_scene(&self) -> Result<SceneGeometry> {
        build_scene(&self.scene)
    }

    /// Reads the configured table file, or calibrates one.
    pub fn build_table(&self) -> Result<SusceptibilityTable> {
        let t = &self.table;
        let table = match &t.path {
            Some(p) => {
                let p = self.resolve(p);
                let file = fs::File::open(&p).map_err(|e| Error::Config(format!("cannot open table {}: {e}", p.display())))?;
                SusceptibilityTable::read_text(std::io::BufReader::new(file))?
            }
            None => calibrate_state_table(t.bits, t.amplitude, t.phase_law, self.scene.f0_hz, &t.wall)?,
        };
        if ((table.f0_hz - self.scene.f0_hz) / self.scene.f0_hz).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "table calibrated at {} Hz but the scene runs at {} Hz",
                table.f0_hz, self.scene.f0_hz
            )));
        }
        Ok(table)
    }

    /// Generates or reads the trajectory; generation uses the `[TRAJECTORY]` stream of `seed`.
    pub fn build_trajectory(&self, scene: &SceneGeometry, seed: u64) -> Result<Trajectory> {
        let s = &self.scenario;
        let ground = Ground { area: scene.user_area, height: scene.user_height, min_separation: scene.min_separation };
        let mut rng = seeds::rng(seed, &[seeds::TRAJECTORY]);
        let traj = match s.kind {
            TrajectorySource::Aperiodic => gen_aperiodic(&ground, s.users, s.steps, &s.mobility, &mut rng)?,
            TrajectorySource::Periodic => {
                gen_periodic(&ground, s.users, s.steps, s.period.unwrap_or(s.steps), &s.mobility, &mut rng)?
            }
            TrajectorySource::Imported => {
                let p = self.resolve(s.path.as_deref().expect("validated"));
                let file = fs::File::open(&p)
                    .map_err(|e| Error::Config(format!("cannot open trajectory {}: {e}", p.display())))?;
                import_trajectory(file, &s.mobility)?
            }
        };
        Ok(traj)
    }
}

/// A parsed configuration with everything built from it for one master seed.
#[derive(Debug, Clone)]
pub struct Setup {
    pub config: RunConfig,
    pub scene: SceneGeometry,
    pub table: SusceptibilityTable,
    pub trajectory: Trajectory,
}

impl Setup {
    /// Parses `path` and builds the scene, table and trajectory. Every failure is an [`Error::Config`].
    pub fn load(path: &Path, seed: u64) -> Result<Self> {
        Self::from_config(parse_config(path)?, seed)
    }

    pub fn from_config(config: RunConfig, seed: u64) -> Result<Self> {
        let scene = config.build_scene().map_err(|e| Error::Config(format!("scene: {e}")))?;
        let table = config.build_table().map_err(|e| Error::Config(format!("table: {e}")))?;
        let trajectory = config
            .build_trajectory(&scene, seed)
            .map_err(|e| Error::Config(format!("scenario: {e}")))?;
        Ok(Self { config, scene, table, trajectory })
    }

    pub fn experiment(&self, noise_power: f64) -> Experiment<'_> {
        Experiment {
            scene: &self.scene,
            table: &self.table,
            trajectory: &self.trajectory,
            total_power: self.config.total_power,
            noise_power,
            params: &self.config.ga,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = parse_config_str("", Path::new(".")).unwrap();
        assert_eq!(c.ga, GaParams::default());
        assert!((c.total_power - 39.810_717_055_349_73).abs() < 1e-9);
        assert_eq!(c.noise_sweep.len(), 3);
    }

    #[test]
    fn unknown_keys_are_named() {
        let e = parse_config_str("[ga]\nfoo = 1\n", Path::new(".")).unwrap_err().to_string();
        assert!(e.contains("foo"), "{e}");
        assert!(e.contains("line 2"), "{e}");
        let e = parse_config_str("bar = 2\n", Path::new(".")).unwrap_err().to_string();
        assert!(e.contains("bar"), "{e}");
    }

    #[test]
    fn invariant_errors_carry_the_field_path() {
        let e = parse_config_str("[ga]\npopulation_size = 1\n", Path::new(".")).unwrap_err().to_string();
        assert!(e.contains("ga") && e.contains("population_size"), "{e}");
        let e = parse_config_str("[scenario]\nkind = \"periodic\"\n", Path::new(".")).unwrap_err().to_string();
        assert!(e.contains("scenario.period"), "{e}");
        let e = parse_config_str("[table]\namplitude = 1.2\n", Path::new(".")).unwrap_err().to_string();
        assert!(e.contains("table.amplitude"), "{e}");
    }

    #[test]
    fn syntax_errors_report_the_line() {
        let e = parse_config_str("[scene]\nf0_hz = 3.5e9\npower_dbm = = 3\n", Path::new(".")).unwrap_err().to_string();
        assert!(e.contains("line 3"), "{e}");
    }
}
