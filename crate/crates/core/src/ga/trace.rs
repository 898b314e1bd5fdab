use std::io::Write;

use super::optimizer::Event;
use crate::error::Result;

/// One optimizer iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub step: usize,
    pub iteration: usize,
    /// Best cost found so far in this step.
    pub phi_best: f64,
    pub sigma: f64,
    pub rho: f64,
    pub psi: f64,
    pub theta: f64,
    pub beta: f64,
    pub kappa: f64,
    pub event: Event,
}

pub const TRACE_HEADER: [&str; 10] = ["c", "v", "phi_best", "sigma_v", "rho_v", "psi_v", "theta_v", "beta_v", "kappa_v", "event"];

/// Writes records as CSV after a comment line describing the columns.
pub fn write_trace<W: Write>(mut w: W, records: &[TraceRecord]) -> Result<()> {
    writeln!(
        w,
        "# c: time step; v: iteration; phi_best: best cost so far (Hz s/bit); sigma_v: population variance; \
         rho_v, psi_v: mutation and crossover probabilities; theta_v: effectiveness; beta_v, kappa_v: store and restore probabilities"
    )?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(TRACE_HEADER)?;
    for r in records {
        out.write_record([
            r.step.to_string(),
            r.iteration.to_string(),
            r.phi_best.to_string(),
            r.sigma.to_string(),
            r.rho.to_string(),
            r.psi.to_string(),
            r.theta.to_string(),
            r.beta.to_string(),
            r.kappa.to_string(),
            r.event.as_str().to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
