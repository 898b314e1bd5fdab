use std::cmp::Ordering;

use rand::Rng;
use rayon::prelude::*;

use super::memory::MemoryPool;
use super::operators::{
    adaptive_rates, crossover, init_population, mutate, population_variance, random_individual, replacement_fraction,
};
use super::params::{GaParams, Polarity};
use super::trace::TraceRecord;
use super::Objective;
use crate::em::RisConfiguration;
use crate::error::Result;
use crate::qos::{Fitness, ThroughputReport};
use crate::seeds;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Event {
    None,
    Stored,
    Restored,
}

impl Event {
    pub fn as_str(&self) -> &'static str {
        match self {
            Event::None => "none",
            Event::Stored => "stored",
            Event::Restored => "restored",
        }
    }
}

/// Individuals with their reports; `None` marks a stale, unevaluated slot.
#[derive(Debug, Clone)]
pub struct Population {
    pub individuals: Vec<RisConfiguration>,
    pub reports: Vec<Option<ThroughputReport>>,
    pub iteration: usize,
}

impl Population {
    pub fn new(individuals: Vec<RisConfiguration>) -> Self {
        let reports = vec![None; individuals.len()];
        Self { individuals, reports, iteration: 0 }
    }

    pub fn len(&self) -> usize {
        self.individuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individuals.is_empty()
    }

    /// Fitness of slot `i`; stale slots rank last.
    pub fn fitness(&self, i: usize) -> Fitness {
        self.reports[i].as_ref().map_or(Fitness::WORST, ThroughputReport::fitness)
    }

    /// Scores every stale slot.
    pub fn evaluate<O: Objective + ?Sized>(&mut self, objective: &O) -> Result<()> {
        let todo: Vec<usize> = (0..self.len()).filter(|&i| self.reports[i].is_none()).collect();
        let fresh: Vec<ThroughputReport> = todo
            .par_iter()
            .map(|&i| objective.evaluate(&self.individuals[i]))
            .collect::<Result<_>>()?;
        for (i, r) in todo.into_iter().zip(fresh) {
            self.reports[i] = Some(r);
        }
        Ok(())
    }

    /// Slot indices from best to worst; ties keep index order.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| self.fitness(a).compare(&self.fitness(b)).then(a.cmp(&b)));
        idx
    }

    pub fn best(&self) -> usize {
        self.ranking()[0]
    }

    pub fn worst(&self) -> usize {
        *self.ranking().last().expect("non-empty population")
    }

    fn tournament(&self, rng: &mut seeds::Rng) -> usize {
        let a = rng.gen_range(0..self.len());
        let b = rng.gen_range(0..self.len());
        match self.fitness(b).compare(&self.fitness(a)) {
            Ordering::Less => b,
            _ => a,
        }
    }

    /// Next generation from binary tournaments, crossover and mutation. The
    /// current best is always the first parent, so it is carried over unless
    /// variation changes it.
    fn breed(&self, rho: f64, psi: f64, num_states: u16, rng: &mut seeds::Rng) -> Self {
        let elite = self.best();
        let mut next = Vec::with_capacity(self.len());
        while next.len() < self.len() {
            let a = if next.is_empty() { elite } else { self.tournament(rng) };
            let b = self.tournament(rng);
            let (mut x, mut y) = crossover(&self.individuals[a], &self.individuals[b], psi, rng);
            mutate(&mut x, rho, num_states, rng);
            mutate(&mut y, rho, num_states, rng);
            next.push(x);
            if next.len() < self.len() {
                next.push(y);
            }
        }
        let mut out = Self { iteration: self.iteration + 1, ..Self::new(next) };
        if out.individuals[0] == self.individuals[elite] {
            out.reports[0] = self.reports[elite].clone();
        }
        out
    }
}

/// Replaces the `⌊ν Γ⌋` worst individuals with random ones (left stale).
pub fn replace_worst(pop: &mut Population, nu: f64, num_states: u16, rng: &mut seeds::Rng) -> usize {
    let count = ((nu * pop.len() as f64) + 1e-9).floor() as usize;
    let count = count.min(pop.len());
    let genes = pop.individuals.first().map_or(0, RisConfiguration::len);
    let ranking = pop.ranking();
    for &i in ranking.iter().rev().take(count) {
        pop.individuals[i] = random_individual(genes, num_states, rng);
        pop.reports[i] = None;
    }
    count
}

/// `Θ = Σ_{k=1..min(W, n−1)} (Φ*_n − Φ*_{n−k}) / 2^k` over the iteration-best
/// history ending with the current iteration. Non-finite terms are skipped.
pub fn effectiveness(history: &[f64], window: usize) -> f64 {
    let Some((&current, past)) = history.split_last() else { return 0.0 };
    past.iter()
        .rev()
        .take(window)
        .enumerate()
        .map(|(k, &prev)| (current - prev) / 2f64.powi(k as i32 + 1))
        .filter(|t| t.is_finite())
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryOutcome {
    pub event: Event,
    pub beta: f64,
    pub kappa: f64,
    /// Report of the restored individual, when one was restored.
    pub restored: Option<ThroughputReport>,
}

/// Stores the best-so-far individual or restores the best memory entry
/// into the worst slot, depending on the sign of `theta`.
#[allow(clippy::too_many_arguments)]
pub fn memory_step<O: Objective + ?Sized>(
    pop: &mut Population,
    theta: f64,
    theta_max: f64,
    best: (&RisConfiguration, f64),
    memory: &mut MemoryPool,
    params: &GaParams,
    objective: &O,
    stamp: (usize, usize),
    rng: &mut seeds::Rng,
) -> Result<MemoryOutcome> {
    let ratio = if theta_max > 0.0 { (theta.abs() / theta_max).clamp(0.0, 1.0) } else { 0.0 };
    let learn = match params.memory_trigger_polarity {
        Polarity::Paper => theta >= 0.0,
        Polarity::Inverted => theta < 0.0,
    };
    let (beta, kappa) = if learn { (ratio * params.beta_max, 0.0) } else { (0.0, ratio * params.kappa_max) };
    let draw: f64 = rng.gen();
    let mut out = MemoryOutcome { event: Event::None, beta, kappa, restored: None };
    if learn {
        if draw < beta && memory.insert(best.0.clone(), stamp, best.1) {
            out.event = Event::Stored;
        }
    } else if draw < kappa {
        if let Some((config, report)) = memory.best_under(objective)? {
            let worst = pop.worst();
            if !pop.fitness(worst).is_better_than(&report.fitness()) {
                pop.individuals[worst] = config;
                pop.reports[worst] = Some(report.clone());
                out.event = Event::Restored;
                out.restored = Some(report);
            }
        }
    }
    Ok(out)
}

/// Result of optimizing one time step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub best: RisConfiguration,
    pub report: ThroughputReport,
    /// Best configuration known at the end of the first iteration.
    pub first_best: RisConfiguration,
    pub first_report: ThroughputReport,
    pub iterations: usize,
    pub stored: usize,
    pub restored: usize,
    pub trace: Vec<TraceRecord>,
}

fn stagnated(best_costs: &[f64], window: usize, delta: f64) -> bool {
    let n = best_costs.len();
    if n <= window {
        return false;
    }
    let current = best_costs[n - 1];
    let past = &best_costs[n - 1 - window..n - 1];
    if !current.is_finite() || past.iter().any(|c| !c.is_finite()) {
        return past.iter().all(|&c| c == current);
    }
    let mean = past.iter().sum::<f64>() / window as f64;
    (current - mean).abs() < delta
}

/// Runs the optimizer for time step `step` and returns the best configuration found.
pub fn optimize_step<O: Objective + ?Sized>(
    objective: &O,
    params: &GaParams,
    memory: &mut MemoryPool,
    step: usize,
    rng: &mut seeds::Rng,
) -> Result<StepOutcome> {
    params.validate()?;
    let (genes, states) = (objective.num_genes(), objective.num_states());
    let mut pop = Population::new(init_population(genes, states, params.population_size, rng));
    let mut best: Option<(RisConfiguration, ThroughputReport)> = None;
    let mut first: Option<(RisConfiguration, ThroughputReport)> = None;
    let mut best_costs = Vec::new();
    let mut iteration_bests = Vec::new();
    let mut trace = Vec::new();
    let (mut theta_max, mut stored, mut restored) = (0.0f64, 0, 0);
    let (mut rho, mut psi) = adaptive_rates(0.0, params);

    let offer = |best: &mut Option<(RisConfiguration, ThroughputReport)>, pop: &Population| {
        let i = pop.best();
        let better = best.as_ref().is_none_or(|(_, r)| pop.fitness(i).is_better_than(&r.fitness()));
        if better {
            *best = Some((pop.individuals[i].clone(), pop.reports[i].clone().expect("evaluated")));
        }
    };

    for v in 1..=params.max_iterations {
        if v > 1 {
            pop = pop.breed(rho, psi, states, rng);
        }
        pop.iteration = v;
        pop.evaluate(objective)?;
        let iteration_best = pop.fitness(pop.best()).cost;
        offer(&mut best, &pop);

        let sigma = population_variance(&pop.individuals);
        (rho, psi) = adaptive_rates(sigma, params);
        let nu = replacement_fraction(sigma, params);
        if replace_worst(&mut pop, nu, states, rng) > 0 {
            pop.evaluate(objective)?;
            offer(&mut best, &pop);
        }

        iteration_bests.push(iteration_best);
        let theta = effectiveness(&iteration_bests, params.window);
        theta_max = theta_max.max(theta.abs());
        let (best_cfg, best_report) = best.as_ref().expect("evaluated population");
        let outcome = memory_step(
            &mut pop,
            theta,
            theta_max,
            (best_cfg, best_report.cost),
            memory,
            params,
            objective,
            (step, v),
            rng,
        )?;
        match outcome.event {
            Event::Stored => stored += 1,
            Event::Restored => {
                restored += 1;
                offer(&mut best, &pop);
            }
            Event::None => {}
        }
        let (best_cfg, best_report) = best.as_ref().expect("evaluated population");
        if v == 1 {
            first = Some((best_cfg.clone(), best_report.clone()));
        }
        best_costs.push(best_report.cost);
        trace.push(TraceRecord {
            step,
            iteration: v,
            phi_best: best_report.cost,
            sigma,
            rho,
            psi,
            theta,
            beta: outcome.beta,
            kappa: outcome.kappa,
            event: outcome.event,
        });
        if v > params.window && stagnated(&best_costs, params.window, params.delta) {
            break;
        }
    }

    let (best, report) = best.expect("at least one iteration");
    let (first_best, first_report) = first.expect("at least one iteration");
    Ok(StepOutcome {
        best,
        report,
        first_best,
        first_report,
        iterations: trace.len(),
        stored,
        restored,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds::rng;

    /// Cost is the number of genes differing from a hidden target, plus one.
    struct Distance(Vec<u16>);

    impl Objective for Distance {
        fn num_genes(&self) -> usize {
            self.0.len()
        }
        fn num_states(&self) -> u16 {
            4
        }
        fn evaluate(&self, c: &RisConfiguration) -> Result<ThroughputReport> {
            let d = c.0.iter().zip(&self.0).filter(|(a, b)| a != b).count() as f64;
            let worst = 1.0 / (1.0 + d);
            Ok(ThroughputReport { per_user: vec![worst], worst, cost: 1.0 + d, zf_degenerate: false })
        }
    }

    #[test]
    fn effectiveness_examples() {
        assert_eq!(effectiveness(&[2.0, 2.0, 2.0, 1.0], 3), -0.875);
        assert_eq!(effectiveness(&[3.0, 3.0, 3.0, 3.0], 3), 0.0);
        assert_eq!(effectiveness(&[1.0], 3), 0.0);
        assert_eq!(effectiveness(&[4.0, 2.0], 3), -1.0);
        assert_eq!(effectiveness(&[f64::INFINITY, 4.0, 2.0], 3), -1.0);
    }

    #[test]
    fn stagnation_rule() {
        assert!(stagnated(&[3.0, 3.0, 3.0, 3.0], 3, 1e-6));
        assert!(!stagnated(&[3.0, 3.0, 3.0], 3, 1e-6));
        assert!(!stagnated(&[4.0, 3.0, 3.0, 3.0], 3, 1e-6));
        assert!(stagnated(&[f64::INFINITY; 4], 3, 1e-6));
        assert!(!stagnated(&[f64::INFINITY, f64::INFINITY, f64::INFINITY, 2.0], 3, 1e-6));
    }

    #[test]
    fn elite_is_the_first_parent() {
        let obj = Distance(vec![1, 2, 3, 4, 1, 2]);
        let mut r = rng(4, &[]);
        let mut pop = Population::new(init_population(6, 4, 10, &mut r));
        pop.evaluate(&obj).unwrap();
        let elite = pop.individuals[pop.best()].clone();
        let kept = pop.breed(0.0, 0.0, 4, &mut r);
        assert_eq!(kept.individuals[0], elite);
        assert!(kept.reports[0].is_some());
        assert!(kept.reports[1..].iter().all(Option::is_none));
        let varied = pop.breed(1.0, 0.0, 4, &mut r);
        assert_ne!(varied.individuals[0], elite);
        assert!(varied.reports[0].is_none());
    }

    #[test]
    fn replace_keeps_the_best() {
        let obj = Distance(vec![1; 6]);
        let mut r = rng(11, &[]);
        let mut pop = Population::new(init_population(6, 4, 10, &mut r));
        pop.evaluate(&obj).unwrap();
        let ranking = pop.ranking();
        let keep: Vec<_> = ranking[..8].iter().map(|&i| pop.individuals[i].clone()).collect();
        assert_eq!(replace_worst(&mut pop, 0.2, 4, &mut r), 2);
        for (i, k) in ranking[..8].iter().zip(&keep) {
            assert_eq!(&pop.individuals[*i], k);
        }
        assert_eq!(pop.reports.iter().filter(|r| r.is_none()).count(), 2);
    }

    #[test]
    fn restore_on_empty_memory_is_a_no_op() {
        let obj = Distance(vec![1; 4]);
        let mut r = rng(2, &[]);
        let mut pop = Population::new(init_population(4, 4, 6, &mut r));
        pop.evaluate(&obj).unwrap();
        let before = pop.individuals.clone();
        let params = GaParams { kappa_max: 1.0, ..Default::default() };
        let best = pop.individuals[0].clone();
        let out = memory_step(&mut pop, -1.0, 1.0, (&best, 1.0), &mut MemoryPool::new(5), &params, &obj, (1, 1), &mut r)
            .unwrap();
        assert_eq!(out.event, Event::None);
        assert_eq!(pop.individuals, before);
    }

    #[test]
    fn forced_store_and_restore() {
        let obj = Distance(vec![2; 5]);
        let mut r = rng(9, &[]);
        let mut pop = Population::new(init_population(5, 4, 8, &mut r));
        pop.evaluate(&obj).unwrap();
        let params = GaParams { beta_max: 1.0, kappa_max: 1.0, ..Default::default() };
        let mut mem = MemoryPool::new(4);
        let target = RisConfiguration(vec![2; 5]);
        let out = memory_step(&mut pop, 0.5, 0.5, (&target, 1.0), &mut mem, &params, &obj, (1, 1), &mut r).unwrap();
        assert_eq!((out.event, mem.len()), (Event::Stored, 1));
        let out = memory_step(&mut pop, 0.5, 0.5, (&target, 1.0), &mut mem, &params, &obj, (1, 2), &mut r).unwrap();
        assert_eq!((out.event, mem.len()), (Event::None, 1));

        let worst_before = pop.fitness(pop.worst());
        let out = memory_step(&mut pop, -0.5, 0.5, (&target, 1.0), &mut mem, &params, &obj, (1, 3), &mut r).unwrap();
        assert_eq!(out.event, Event::Restored);
        assert!(pop.individuals.contains(&target));
        assert!(!worst_before.is_better_than(&obj.evaluate(&target).unwrap().fitness()));
    }

    #[test]
    fn best_so_far_never_worsens_and_run_is_deterministic() {
        let obj = Distance(vec![3, 1, 4, 1, 2, 4, 2, 3, 1, 1, 2, 2]);
        let params = GaParams { population_size: 12, max_iterations: 40, ..Default::default() };
        let run = |seed| {
            let mut mem = MemoryPool::new(params.memory_capacity);
            optimize_step(&obj, &params, &mut mem, 1, &mut rng(seed, &[])).unwrap()
        };
        let a = run(4);
        assert!(a.trace.windows(2).all(|w| w[1].phi_best <= w[0].phi_best));
        assert_eq!(a.trace.last().unwrap().phi_best, a.report.cost);
        assert_eq!(a.trace, run(4).trace);
        assert!(a.iterations <= 40);
    }

    #[test]
    fn single_iteration_returns_initial_best() {
        let obj = Distance(vec![1, 2, 3, 4]);
        let params = GaParams { population_size: 6, max_iterations: 1, ..Default::default() };
        let mut r = rng(8, &[]);
        let mut clone = r.clone();
        let out = optimize_step(&obj, &params, &mut MemoryPool::new(3), 1, &mut r).unwrap();
        let mut pop = Population::new(init_population(4, 4, 6, &mut clone));
        pop.evaluate(&obj).unwrap();
        assert_eq!(out.report.cost, pop.fitness(pop.best()).cost);
        assert_eq!(out.first_best, out.best);
    }
}
