//! Shared test fixtures: a dense tabular model, a random-model generator, and
//! independently coded reference implementations (dense, naive loops) used to
//! cross-check the production solver and filter.
//!
//! Each integration-test binary uses a different subset of these helpers.
#![allow(dead_code)]

use pedplan_core::pomdp::{DiscretePomdp, Successor};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Dense tabular POMDP with a discrete observation alphabet.
pub struct Tabular {
    pub states: usize,
    pub actions: usize,
    pub gamma: f64,
    /// transition[s][a][s']
    pub transition: Vec<Vec<Vec<f64>>>,
    /// reward[s][a]
    pub reward: Vec<Vec<f64>>,
    /// likelihood[o][s]
    pub likelihood: Vec<Vec<f64>>,
}

impl DiscretePomdp for Tabular {
    type Observation = usize;

    fn state_count(&self) -> usize {
        self.states
    }
    fn action_count(&self) -> usize {
        self.actions
    }
    fn discount(&self) -> f64 {
        self.gamma
    }
    fn reward(&self, state: usize, action: usize) -> f64 {
        self.reward[state][action]
    }
    fn successors(&self, state: usize, action: usize, out: &mut Vec<Successor>) {
        out.clear();
        for (s2, &p) in self.transition[state][action].iter().enumerate() {
            if p != 0.0 {
                out.push((s2 as u32, p));
            }
        }
    }
    fn observation_likelihood(&self, observation: &usize, successor: usize) -> f64 {
        self.likelihood[*observation][successor]
    }
}

/// Random fully-stochastic model: every row mixes `fanout` successors with
/// normalized random weights; rewards in [-10, 10]; `observations` likelihood
/// rows are random positive densities.
pub fn random_model(seed: u64, states: usize, actions: usize, gamma: f64, observations: usize) -> Tabular {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut transition = vec![vec![vec![0.0; states]; actions]; states];
    let mut reward = vec![vec![0.0; actions]; states];
    for s in 0..states {
        for a in 0..actions {
            reward[s][a] = rng.gen_range(-10.0..10.0);
            let fanout = rng.gen_range(1..=states.min(6));
            let mut total = 0.0;
            for _ in 0..fanout {
                let s2 = rng.gen_range(0..states);
                let w: f64 = rng.gen_range(0.05..1.0);
                transition[s][a][s2] += w;
                total += w;
            }
            for p in &mut transition[s][a] {
                *p /= total;
            }
        }
    }
    let likelihood = (0..observations)
        .map(|_| (0..states).map(|_| rng.gen_range(0.01..2.0)).collect())
        .collect();
    Tabular { states, actions, gamma, transition, reward, likelihood }
}

/// Reference value iteration: dense triple loops, no shared code with the
/// production solver. Runs until the max-norm step falls below `tolerance`.
pub fn brute_force_bellman(model: &Tabular, tolerance: f64, cap: usize) -> Vec<Vec<f64>> {
    let mut q = vec![vec![0.0; model.actions]; model.states];
    for _ in 0..cap {
        let value: Vec<f64> = q
            .iter()
            .map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .collect();
        let mut next = vec![vec![0.0; model.actions]; model.states];
        let mut step = 0.0f64;
        for s in 0..model.states {
            for a in 0..model.actions {
                let mut acc = 0.0;
                for s2 in 0..model.states {
                    acc += model.transition[s][a][s2] * value[s2];
                }
                next[s][a] = model.reward[s][a] + model.gamma * acc;
                step = step.max((next[s][a] - q[s][a]).abs());
            }
        }
        q = next;
        if step <= tolerance {
            break;
        }
    }
    q
}

/// Reference Bayes filter step by direct enumeration of the update equation:
/// posterior(s') ∝ likelihood(o, s') · Σ_s transition(s'|s,a) · prior(s).
/// Returns `None` when the posterior mass vanishes.
pub fn enumeration_belief_update(
    model: &Tabular,
    prior: &[f64],
    action: usize,
    observation: usize,
) -> Option<Vec<f64>> {
    let mut posterior = vec![0.0; model.states];
    for s2 in 0..model.states {
        let mut predicted = 0.0;
        for s in 0..model.states {
            predicted += model.transition[s][action][s2] * prior[s];
        }
        posterior[s2] = model.likelihood[observation][s2] * predicted;
    }
    let total: f64 = posterior.iter().sum();
    if total < 1e-12 {
        return None;
    }
    for p in &mut posterior {
        *p /= total;
    }
    Some(posterior)
}
