use rand::Rng;

use crate::em::RisConfiguration;
use crate::seeds;

use super::params::GaParams;

pub fn random_individual(num_genes: usize, num_states: u16, rng: &mut seeds::Rng) -> RisConfiguration {
    RisConfiguration((0..num_genes).map(|_| rng.gen_range(1..=num_states)).collect())
}

pub fn init_population(num_genes: usize, num_states: u16, size: usize, rng: &mut seeds::Rng) -> Vec<RisConfiguration> {
    (0..size).map(|_| random_individual(num_genes, num_states, rng)).collect()
}

/// Mean squared Euclidean distance of the individuals from their gene-wise mean.
pub fn population_variance(individuals: &[RisConfiguration]) -> f64 {
    let Some(first) = individuals.first() else { return 0.0 };
    let n = individuals.len() as f64;
    let mut mean = vec![0.0; first.len()];
    for ind in individuals {
        for (m, &s) in mean.iter_mut().zip(ind.states()) {
            *m += f64::from(s);
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let total: f64 = individuals
        .iter()
        .map(|ind| ind.states().iter().zip(&mean).map(|(&s, m)| (f64::from(s) - m).powi(2)).sum::<f64>())
        .sum();
    total / n
}

fn spread(sigma: f64, params: &GaParams) -> f64 {
    (sigma / params.sigma_max).min(1.0)
}

/// Mutation and crossover probabilities `(ρ, ψ)` for population variance `sigma`.
pub fn adaptive_rates(sigma: f64, params: &GaParams) -> (f64, f64) {
    let t = spread(sigma, params);
    (
        params.rho_max * (1.0 - t) + params.rho_min * t,
        params.psi_min * (1.0 - t) + params.psi_max * t,
    )
}

/// Fraction `ν` of the population replaced by random individuals.
pub fn replacement_fraction(sigma: f64, params: &GaParams) -> f64 {
    params.nu_max * (1.0 - spread(sigma, params))
}

/// Single-point crossover exchanging the tails after the first `cut` genes.
pub fn crossover_at(a: &RisConfiguration, b: &RisConfiguration, cut: usize) -> (RisConfiguration, RisConfiguration) {
    let mut x = a.0[..cut].to_vec();
    x.extend_from_slice(&b.0[cut..]);
    let mut y = b.0[..cut].to_vec();
    y.extend_from_slice(&a.0[cut..]);
    (RisConfiguration(x), RisConfiguration(y))
}

/// With probability `psi`, single-point crossover at a uniform cut in `1..P`.
pub fn crossover(
    a: &RisConfiguration,
    b: &RisConfiguration,
    psi: f64,
    rng: &mut seeds::Rng,
) -> (RisConfiguration, RisConfiguration) {
    let draw: f64 = rng.gen();
    if draw < psi && a.len() >= 2 {
        let cut = rng.gen_range(1..a.len());
        crossover_at(a, b, cut)
    } else {
        (a.clone(), b.clone())
    }
}

/// Each gene, with probability `rho`, moves to a different uniformly drawn state.
pub fn mutate(ind: &mut RisConfiguration, rho: f64, num_states: u16, rng: &mut seeds::Rng) {
    for gene in ind.0.iter_mut() {
        let draw: f64 = rng.gen();
        if draw < rho {
            let other = rng.gen_range(1..num_states);
            *gene = if other >= *gene { other + 1 } else { other };
        }
    }
}
