//! Per-user throughput under zero-forcing and the max-min cost.

use std::cmp::Ordering;

use nalgebra::DMatrix;

use crate::beamforming::{zf_weights, DEFAULT_RTOL};
use crate::em::{far_fields, PatchResponses, RisConfiguration, SusceptibilityTable};
use crate::error::{Error, Result};
use crate::scene::{SceneGeometry, UserSnapshot};
use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputReport {
    /// Spectral efficiency of each user (bit/s/Hz).
    pub per_user: Vec<f64>,
    pub worst: f64,
    /// `1 / worst`, or `+∞` when the worst user gets nothing.
    pub cost: f64,
    pub zf_degenerate: bool,
}

impl ThroughputReport {
    pub fn sum(&self) -> f64 {
        self.per_user.iter().sum()
    }

    pub fn fitness(&self) -> Fitness {
        Fitness { cost: self.cost, sum: self.sum() }
    }
}

/// Sort key of a candidate: lower cost first; among infinite costs, larger
/// total throughput first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fitness {
    pub cost: f64,
    pub sum: f64,
}

impl Fitness {
    pub const WORST: Fitness = Fitness { cost: f64::INFINITY, sum: f64::NEG_INFINITY };

    pub fn compare(&self, other: &Self) -> Ordering {
        match self.cost.total_cmp(&other.cost) {
            Ordering::Equal if self.cost.is_infinite() => other.sum.total_cmp(&self.sum),
            o => o,
        }
    }

    pub fn is_better_than(&self, other: &Self) -> bool {
        self.compare(other) == Ordering::Less
    }
}

/// Noise term of the SINR denominator, `L σ² / Λ`.
///
/// The fields entering the SINR already carry beams of total power Λ, and the
/// noise is expressed relative to Λ as well. Every throughput in the crate
/// goes through this function.
pub fn noise_term(num_users: usize, noise_power: f64, total_power: f64) -> f64 {
    num_users as f64 * noise_power / total_power
}

/// `T_l = log2(1 + |F_ll|² / (Σ_{b≠l} |F_lb|² + L σ²/Λ))`.
pub fn throughput(fields: &DMatrix<C64>, total_power: f64, noise_power: f64) -> Result<ThroughputReport> {
    let l_users = fields.nrows();
    if fields.ncols() != l_users {
        return Err(Error::dim(format!("expected one beam per user, got {}x{}", l_users, fields.ncols())));
    }
    if l_users == 0 {
        return Err(Error::dim("no users"));
    }
    if fields.iter().any(|f| !f.re.is_finite() || !f.im.is_finite()) {
        return Err(Error::NonFinite("far field".into()));
    }
    let noise = noise_term(l_users, noise_power, total_power);
    let per_user: Vec<f64> = (0..l_users)
        .map(|l| {
            let signal = fields[(l, l)].norm_sqr();
            let interference: f64 = (0..l_users).filter(|&b| b != l).map(|b| fields[(l, b)].norm_sqr()).sum();
            (signal / (interference + noise)).ln_1p() / std::f64::consts::LN_2
        })
        .collect();
    let worst = per_user.iter().copied().fold(f64::INFINITY, f64::min);
    let cost = if worst > 0.0 { 1.0 / worst } else { f64::INFINITY };
    Ok(ThroughputReport { per_user, worst, cost, zf_degenerate: false })
}

/// Everything needed to score configurations at one time step.
#[derive(Debug, Clone)]
pub struct EvalContext {
    pub responses: PatchResponses,
    pub total_power: f64,
    pub noise_power: f64,
    pub rtol: f64,
}

impl EvalContext {
    pub fn new(
        scene: &SceneGeometry,
        table: &SusceptibilityTable,
        snapshot: &UserSnapshot,
        total_power: f64,
        noise_power: f64,
    ) -> Result<Self> {
        let responses = PatchResponses::new(scene, table, &snapshot.positions)?;
        Ok(Self { responses, total_power, noise_power, rtol: DEFAULT_RTOL })
    }

    pub fn with_noise(&self, noise_power: f64) -> Self {
        Self { noise_power, ..self.clone() }
    }

    pub fn num_patches(&self) -> usize {
        self.responses.num_patches()
    }

    pub fn num_states(&self) -> u16 {
        self.responses.num_states()
    }

    pub fn num_users(&self) -> usize {
        self.responses.num_users()
    }
}

/// Cascaded channel, zero-forcing, far fields and throughput for `config`.
pub fn evaluate_cost(config: &RisConfiguration, ctx: &EvalContext) -> Result<ThroughputReport> {
    let channel = ctx.responses.channel(config)?;
    let beams = zf_weights(&channel, ctx.total_power, ctx.rtol);
    let fields = far_fields(&channel, &beams.weights)?;
    let mut report = throughput(&fields, ctx.total_power, ctx.noise_power)?;
    report.zf_degenerate = beams.zf_degenerate;
    Ok(report)
}

/// Every configuration of `ctx` with its report, states counted like an odometer
/// with the first patch fastest. Refuses more than `limit` configurations.
pub fn exhaustive(ctx: &EvalContext, limit: usize) -> Result<Vec<(RisConfiguration, ThroughputReport)>> {
    let (patches, states) = (ctx.num_patches(), ctx.num_states());
    let count = (0..patches).try_fold(1usize, |n, _| n.checked_mul(states as usize).filter(|&n| n <= limit));
    let Some(count) = count else {
        return Err(Error::Param(format!("{states}^{patches} configurations exceed the limit of {limit}")));
    };
    let mut config = RisConfiguration::uniform(patches, 1);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        out.push((config.clone(), evaluate_cost(&config, ctx)?));
        for s in config.0.iter_mut() {
            if *s < states {
                *s += 1;
                break;
            }
            *s = 1;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::dbm_to_watts;

    #[test]
    fn paper_noise_term() {
        let n = noise_term(3, dbm_to_watts(-96.0), dbm_to_watts(46.0));
        assert!((n - 3.0 * 10f64.powf(-14.2)).abs() < 1e-6 * n);
        assert!((n - 1.893e-14).abs() < 1e-17);
    }

    #[test]
    fn unit_sinr_gives_one_bit() {
        let (lambda, sigma) = (2.0, 0.5);
        let f = DMatrix::from_element(1, 1, C64::from(noise_term(1, sigma, lambda).sqrt()));
        let r = throughput(&f, lambda, sigma).unwrap();
        assert!((r.worst - 1.0).abs() < 1e-15);
        assert!((r.cost - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dead_links_cost_infinity() {
        let f = DMatrix::from_row_slice(2, 2, &[C64::default(), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::default()]);
        let r = throughput(&f, 1.0, 1.0).unwrap();
        assert_eq!(r.per_user, vec![0.0, 0.0]);
        assert!(r.cost.is_infinite());
        let bad = DMatrix::from_element(1, 1, C64::new(f64::NAN, 0.0));
        assert!(throughput(&bad, 1.0, 1.0).is_err());
    }

    #[test]
    fn fitness_order() {
        let a = Fitness { cost: 2.0, sum: 0.1 };
        let b = Fitness { cost: f64::INFINITY, sum: 5.0 };
        let c = Fitness { cost: f64::INFINITY, sum: 1.0 };
        assert!(a.is_better_than(&b));
        assert!(b.is_better_than(&c));
        assert!(c.is_better_than(&Fitness::WORST));
        assert!(!a.is_better_than(&a));
    }
}
