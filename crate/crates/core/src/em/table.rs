//! Per-state surface susceptibilities of the meta-atoms and the wall.
//!
//! Each state holds the diagonal electric and magnetic susceptibility tensors
//! `K_e`, `K_h` (complex, metres). Under normal incidence on a uniform sheet
//! with tangential polarization `χ̂ = (cx, cy, 0)` the forward model reflects
//! with coefficient
//!
//! ```text
//! R = -j k0/2 · [cx² (Ke_x − Kh_y) + cy² (Ke_y − Kh_x)]
//! ```
//!
//! which is what [`calibrate_state_table`] inverts.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{units, C64};

/// Diagonal susceptibility tensors of one state, components (x, y, z).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateEntry {
    pub ke: [C64; 3],
    pub kh: [C64; 3],
}

impl StateEntry {
    pub const ZERO: StateEntry = StateEntry { ke: [C64::new(0.0, 0.0); 3], kh: [C64::new(0.0, 0.0); 3] };

    /// Isotropic tangential entry with `Ke = K`, `Kh = −K` producing reflection `r`.
    pub fn from_reflection(r: C64, k0: f64) -> Self {
        let k = C64::i() * r / k0;
        let zero = C64::new(0.0, 0.0);
        Self { ke: [k, k, zero], kh: [-k, -k, zero] }
    }

    /// Components in the order `Ke_x, Ke_y, Ke_z, Kh_x, Kh_y, Kh_z`.
    pub fn components(&self) -> [C64; 6] {
        [self.ke[0], self.ke[1], self.ke[2], self.kh[0], self.kh[1], self.kh[2]]
    }

    /// Plane-wave reflection implied at normal incidence for polarization `(cx, cy)`.
    pub fn implied_reflection(&self, k0: f64, cx: f64, cy: f64) -> C64 {
        let x = (self.ke[0] - self.kh[1]) * (cx * cx) + (self.ke[1] - self.kh[0]) * (cy * cy);
        -C64::i() * (k0 / 2.0) * x
    }
}

/// Phase assigned to each state before calibration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PhaseLaw {
    /// State `s` targets phase `offset + 2π (s − 1)/2^B`.
    Uniform { offset_deg: f64 },
}

impl Default for PhaseLaw {
    fn default() -> Self {
        PhaseLaw::Uniform { offset_deg: 0.0 }
    }
}

impl PhaseLaw {
    pub fn phase(&self, state: u16, bits: u8) -> f64 {
        match *self {
            PhaseLaw::Uniform { offset_deg } => {
                offset_deg.to_radians() + 2.0 * PI * f64::from(state - 1) / f64::from(1u32 << bits)
            }
        }
    }
}

/// Homogeneous lossy slab standing in for the supporting wall.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WallModel {
    pub eps_r: f64,
    pub sigma_s_per_m: f64,
    pub thickness_m: f64,
}

impl Default for WallModel {
    /// Concrete per the ITU building-material model at 3.5 GHz, 0.2 m thick.
    fn default() -> Self {
        Self { eps_r: 5.24, sigma_s_per_m: 0.123, thickness_m: 0.2 }
    }
}

/// Normal-incidence reflection coefficient of a slab in air (e^{jωt} convention).
pub fn slab_reflection(f0_hz: f64, wall: &WallModel) -> C64 {
    let omega = 2.0 * PI * f0_hz;
    let eps_c = C64::new(wall.eps_r, -wall.sigma_s_per_m / (omega * units::EPS0));
    let n = eps_c.sqrt();
    let k0 = units::wavenumber(f0_hz);
    let g = (C64::new(1.0, 0.0) - n) / (C64::new(1.0, 0.0) + n);
    let round_trip = (-C64::i() * 2.0 * k0 * n * wall.thickness_m).exp();
    g * (C64::new(1.0, 0.0) - round_trip) / (C64::new(1.0, 0.0) - g * g * round_trip)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SusceptibilityTable {
    pub bits: u8,
    /// Frequency the entries were calibrated for.
    pub f0_hz: f64,
    pub states: Vec<StateEntry>,
    pub wall: StateEntry,
    pub provenance: String,
}

impl SusceptibilityTable {
    pub fn new(bits: u8, f0_hz: f64, states: Vec<StateEntry>, wall: StateEntry, provenance: String) -> Result<Self> {
        if !(1..=8).contains(&bits) {
            return Err(Error::Table(format!("bits must be in 1..=8, got {bits}")));
        }
        if states.len() != 1usize << bits {
            return Err(Error::Table(format!("{} states given, expected 2^{bits}", states.len())));
        }
        if !(f0_hz.is_finite() && f0_hz > 0.0) {
            return Err(Error::Table("f0_hz must be positive".into()));
        }
        let finite = |e: &StateEntry| e.components().iter().all(|c| c.re.is_finite() && c.im.is_finite());
        if !states.iter().all(finite) || !finite(&wall) {
            return Err(Error::Table("non-finite susceptibility".into()));
        }
        Ok(Self { bits, f0_hz, states, wall, provenance })
    }

    pub fn num_states(&self) -> u16 {
        self.states.len() as u16
    }

    /// Entry of 1-based state `s`.
    pub fn entry(&self, s: u16) -> Option<&StateEntry> {
        s.checked_sub(1).and_then(|i| self.states.get(i as usize))
    }

    /// Table in which every state behaves like the wall.
    pub fn wall_only(&self) -> Self {
        Self {
            states: vec![self.wall; self.states.len()],
            provenance: format!("wall-only copy of: {}", self.provenance),
            ..self.clone()
        }
    }

    /// Table with every susceptibility (states and wall) set to zero.
    pub fn transparent(bits: u8, f0_hz: f64) -> Result<Self> {
        Self::new(bits, f0_hz, vec![StateEntry::ZERO; 1 << bits], StateEntry::ZERO, "transparent".into())
    }

    /// Largest normal-incidence reflection magnitude over states and both
    /// tangential polarizations.
    pub fn max_implied_reflection(&self) -> f64 {
        let k0 = units::wavenumber(self.f0_hz);
        self.states
            .iter()
            .flat_map(|e| [e.implied_reflection(k0, 1.0, 0.0).norm(), e.implied_reflection(k0, 0.0, 1.0).norm()])
            .fold(0.0, f64::max)
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# susceptibility table (Ke, Kh in metres)")?;
        writeln!(w, "# bits {}", self.bits)?;
        writeln!(w, "# f0_hz {:e}", self.f0_hz)?;
        writeln!(w, "# provenance {}", self.provenance.replace('\n', " "))?;
        writeln!(
            w,
            "# state re_kex im_kex re_key im_key re_kez im_kez re_khx im_khx re_khy im_khy re_khz im_khz"
        )?;
        let row = |w: &mut W, label: &str, e: &StateEntry| -> Result<()> {
            write!(w, "{label}")?;
            for c in e.components() {
                write!(w, " {:e} {:e}", c.re, c.im)?;
            }
            writeln!(w)?;
            Ok(())
        };
        for (i, e) in self.states.iter().enumerate() {
            row(&mut w, &(i + 1).to_string(), e)?;
        }
        row(&mut w, "wall", &self.wall)?;
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut bits = None;
        let mut f0 = None;
        let mut provenance = String::new();
        let mut states: Vec<(usize, StateEntry)> = Vec::new();
        let mut wall = None;
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let lineno = lineno + 1;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            if let Some(meta) = t.strip_prefix('#') {
                let meta = meta.trim();
                if let Some(v) = meta.strip_prefix("bits ") {
                    bits = Some(v.trim().parse::<u8>().map_err(|e| table_err(lineno, e))?);
                } else if let Some(v) = meta.strip_prefix("f0_hz ") {
                    f0 = Some(v.trim().parse::<f64>().map_err(|e| table_err(lineno, e))?);
                } else if let Some(v) = meta.strip_prefix("provenance ") {
                    provenance = v.to_string();
                }
                continue;
            }
            let fields: Vec<&str> = t.split_whitespace().collect();
            if fields.len() != 13 {
                return Err(table_err(lineno, format!("expected 13 columns, found {}", fields.len())));
            }
            let mut c = [C64::new(0.0, 0.0); 6];
            for (k, c) in c.iter_mut().enumerate() {
                let re = fields[1 + 2 * k].parse::<f64>().map_err(|e| table_err(lineno, e))?;
                let im = fields[2 + 2 * k].parse::<f64>().map_err(|e| table_err(lineno, e))?;
                *c = C64::new(re, im);
            }
            let entry = StateEntry { ke: [c[0], c[1], c[2]], kh: [c[3], c[4], c[5]] };
            if fields[0] == "wall" {
                wall = Some(entry);
            } else {
                let idx = fields[0].parse::<usize>().map_err(|e| table_err(lineno, e))?;
                states.push((idx, entry));
            }
        }
        let bits = bits.ok_or_else(|| Error::Table("missing '# bits' header".into()))?;
        let f0 = f0.ok_or_else(|| Error::Table("missing '# f0_hz' header".into()))?;
        let wall = wall.ok_or_else(|| Error::Table("missing 'wall' row".into()))?;
        states.sort_by_key(|(i, _)| *i);
        if states.iter().enumerate().any(|(k, (i, _))| *i != k + 1) {
            return Err(Error::Table("state indices must be 1..=2^bits without gaps".into()));
        }
        Self::new(bits, f0, states.into_iter().map(|(_, e)| e).collect(), wall, provenance)
    }
}

fn table_err(line: usize, e: impl std::fmt::Display) -> Error {
    Error::Table(format!("line {line}: {e}"))
}

/// Builds a table whose state `s` reflects `amplitude · exp(j phase_law(s))`
/// under normal incidence, with the wall entry derived from the slab model.
pub fn calibrate_state_table(
    bits: u8,
    amplitude: f64,
    phase_law: PhaseLaw,
    f0_hz: f64,
    wall: &WallModel,
) -> Result<SusceptibilityTable> {
    if !(1..=8).contains(&bits) {
        return Err(Error::Table(format!("bits must be in 1..=8, got {bits}")));
    }
    if !(amplitude > 0.0 && amplitude <= 1.0) {
        return Err(Error::Table(format!("amplitude must be in (0, 1] for a passive surface, got {amplitude}")));
    }
    let k0 = units::wavenumber(f0_hz);
    let states = (1..=(1u16 << bits))
        .map(|s| StateEntry::from_reflection(C64::from_polar(amplitude, phase_law.phase(s, bits)), k0))
        .collect();
    let wall_entry = StateEntry::from_reflection(slab_reflection(f0_hz, wall), k0);
    SusceptibilityTable::new(
        bits,
        f0_hz,
        states,
        wall_entry,
        format!(
            "calibrated: {bits}-bit, amplitude {amplitude}, {phase_law:?}; wall slab eps_r={} sigma={} S/m t={} m",
            wall.eps_r, wall.sigma_s_per_m, wall.thickness_m
        ),
    )
}
