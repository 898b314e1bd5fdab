//! Memory-enhanced genetic optimizer for the RIS configuration.
//!
//! One call to [`optimize_step`] solves one time step. The population starts
//! random every step; the [`MemoryPool`] is the only state carried from step
//! to step. Fitness evaluation runs in parallel on the global rayon pool and
//! never touches the random generator, so results do not depend on the
//! thread count.

mod memory;
mod operators;
mod optimizer;
mod params;
mod trace;

pub use memory::{MemoryEntry, MemoryPool};
pub use operators::{
    adaptive_rates, crossover, crossover_at, init_population, mutate, population_variance, random_individual,
    replacement_fraction,
};
pub use optimizer::{
    effectiveness, memory_step, optimize_step, replace_worst, Event, MemoryOutcome, Population, StepOutcome,
};
pub use params::{GaParams, Polarity};
pub use trace::{write_trace, TraceRecord};

use crate::em::RisConfiguration;
use crate::error::Result;
use crate::qos::{evaluate_cost, EvalContext, ThroughputReport};

/// Anything that scores RIS configurations.
pub trait Objective: Sync {
    fn num_genes(&self) -> usize;
    fn num_states(&self) -> u16;
    fn evaluate(&self, config: &RisConfiguration) -> Result<ThroughputReport>;
}

impl Objective for EvalContext {
    fn num_genes(&self) -> usize {
        self.num_patches()
    }

    fn num_states(&self) -> u16 {
        EvalContext::num_states(self)
    }

    fn evaluate(&self, config: &RisConfiguration) -> Result<ThroughputReport> {
        evaluate_cost(config, self)
    }
}
