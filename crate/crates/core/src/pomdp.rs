//! Discrete POMDP machinery.
//!
//! A model exposes states and actions by index, a sparse transition
//! distribution per (state, action), an immediate reward per (state, action),
//! a discount factor, and an observation likelihood evaluated at successor
//! states. On top of that this module provides:
//!
//! - [`value_iterate`]: synchronous value iteration of the underlying MDP,
//!   `Q_{k+1}(s,a) = R(s,a) + γ Σ_{s'} T(s'|s,a) max_{a'} Q_k(s',a')`,
//!   run to a max-norm residual tolerance or an iteration cap.
//! - [`belief_update`]: the discrete Bayes filter
//!   `b'(s') ∝ O(o|s') Σ_s T(s'|s,a) b(s)`.
//! - [`qmdp_utility`]: belief-weighted action value `Σ_s b(s) Q(s,a)`.
//! - [`decomposed_action`]: argmax over actions of the minimum utility across
//!   several beliefs — the conservative multi-agent decomposition.
//!
//! All routines are deterministic for a fixed model: with the `parallel`
//! feature, sweeps partition states across threads but every per-entry sum is
//! evaluated in a fixed order and the residual reduction uses `max`, which is
//! exactly associative.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Sparse successor entry: state index and probability.
pub type Successor = (u32, f64);

/// Errors from model validation, solving, and belief filtering.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PomdpError {
    #[error("transition row for state {state}, action {action} sums to {sum:.12}, not 1")]
    NonStochasticRow { state: usize, action: usize, sum: f64 },
    #[error("transition row for state {state}, action {action} contains a negative or non-finite probability")]
    InvalidProbability { state: usize, action: usize },
    #[error("reward for state {state}, action {action} is not finite")]
    NonFiniteReward { state: usize, action: usize },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("action index {action} out of range ({action_count} actions)")]
    ActionOutOfRange { action: usize, action_count: usize },
    #[error("belief mass sums to {sum:.12}, not 1")]
    InvalidBeliefMass { sum: f64 },
    #[error("belief contains a negative or non-finite entry at index {index}")]
    InvalidBeliefEntry { index: usize },
    #[error("posterior belief is degenerate: total mass {total_mass:.3e} below 1e-12")]
    DegenerateBelief { total_mass: f64 },
    #[error("no beliefs supplied for action selection")]
    NoBeliefs,
    #[error("empty model: state and action counts must be positive")]
    EmptyModel,
}

pub type Result<T> = core::result::Result<T, PomdpError>;

/// Discrete-state, discrete-action POMDP with continuous observations.
///
/// States and actions are dense indices. `successors` must write a properly
/// normalized sparse distribution (entries may be unsorted but must not repeat
/// a state index). The observation type is chosen by the model; likelihoods
/// are unnormalized densities and only ever compared or multiplied.
pub trait DiscretePomdp: Sync {
    type Observation;

    fn state_count(&self) -> usize;
    fn action_count(&self) -> usize;
    /// Discount factor in [0, 1).
    fn discount(&self) -> f64;
    fn reward(&self, state: usize, action: usize) -> f64;
    /// Clear `out` and fill it with the successor distribution of (state, action).
    fn successors(&self, state: usize, action: usize, out: &mut Vec<Successor>);
    /// Likelihood of `observation` at a successor state (unnormalized, ≥ 0).
    fn observation_likelihood(&self, observation: &Self::Observation, successor: usize) -> f64;

    /// One synchronous Bellman backup of every (state, action) entry:
    /// `q_out[s·A+a] = R(s,a) + γ Σ T(s'|s,a) value[s']`.
    ///
    /// The default walks `successors`; models with structured transitions can
    /// override it with a fused loop, as long as the arithmetic matches the
    /// default entry for entry.
    fn backup_sweep(&self, value: &[f64], q_out: &mut [f64]) {
        let actions = self.action_count();
        let gamma = self.discount();
        let body = |state: usize, row: &mut [f64], buf: &mut Vec<Successor>| {
            for (action, slot) in row.iter_mut().enumerate() {
                self.successors(state, action, buf);
                let mut acc = 0.0;
                for &(succ, p) in buf.iter() {
                    acc += p * value[succ as usize];
                }
                *slot = self.reward(state, action) + gamma * acc;
            }
        };
        #[cfg(feature = "parallel")]
        {
            q_out
                .par_chunks_mut(actions)
                .enumerate()
                .for_each_init(Vec::new, |buf, (state, row)| body(state, row, buf));
        }
        #[cfg(not(feature = "parallel"))]
        {
            let mut buf = Vec::new();
            for (state, row) in q_out.chunks_mut(actions).enumerate() {
                body(state, row, &mut buf);
            }
        }
    }

    /// Check that every transition row is a probability distribution (sum
    /// within 1e-9 of 1, entries non-negative and finite) and every reward is
    /// finite.
    fn validate(&self) -> Result<()> {
        if self.state_count() == 0 || self.action_count() == 0 {
            return Err(PomdpError::EmptyModel);
        }
        let check = |state: usize, buf: &mut Vec<Successor>| -> Result<()> {
            for action in 0..self.action_count() {
                if !self.reward(state, action).is_finite() {
                    return Err(PomdpError::NonFiniteReward { state, action });
                }
                self.successors(state, action, buf);
                let mut sum = 0.0;
                for &(_, p) in buf.iter() {
                    if !(p.is_finite() && p >= 0.0) {
                        return Err(PomdpError::InvalidProbability { state, action });
                    }
                    sum += p;
                }
                if crate::fmath::abs(sum - 1.0) > 1e-9 {
                    return Err(PomdpError::NonStochasticRow { state, action, sum });
                }
            }
            Ok(())
        };
        #[cfg(feature = "parallel")]
        {
            (0..self.state_count())
                .into_par_iter()
                .try_for_each_init(Vec::new, |buf, state| check(state, buf))
        }
        #[cfg(not(feature = "parallel"))]
        {
            let mut buf = Vec::new();
            (0..self.state_count()).try_for_each(|state| check(state, &mut buf))
        }
    }
}

/// Normalized probability mass over the states of a discrete model.
#[derive(Debug, Clone, PartialEq)]
pub struct Belief {
    mass: Vec<f64>,
}

impl Belief {
    /// Uniform belief over `n` states.
    pub fn uniform(n: usize) -> Self {
        debug_assert!(n > 0);
        Belief { mass: vec![1.0 / n as f64; n] }
    }

    /// All mass on one state.
    pub fn delta(n: usize, state: usize) -> Self {
        debug_assert!(state < n);
        let mut mass = vec![0.0; n];
        mass[state] = 1.0;
        Belief { mass }
    }

    /// Validate a raw mass vector: entries non-negative and finite, total
    /// within 1e-9 of 1.
    pub fn from_mass(mass: Vec<f64>) -> Result<Self> {
        let mut sum = 0.0;
        for (index, &m) in mass.iter().enumerate() {
            if !(m.is_finite() && m >= 0.0) {
                return Err(PomdpError::InvalidBeliefEntry { index });
            }
            sum += m;
        }
        if crate::fmath::abs(sum - 1.0) > 1e-9 {
            return Err(PomdpError::InvalidBeliefMass { sum });
        }
        Ok(Belief { mass })
    }

    /// Normalize an arbitrary non-negative mass vector; errors if the total is
    /// below 1e-12.
    pub fn normalized(mut mass: Vec<f64>) -> Result<Self> {
        let total: f64 = mass.iter().sum();
        if !(total.is_finite() && total >= 1e-12) {
            return Err(PomdpError::DegenerateBelief { total_mass: total });
        }
        for m in &mut mass {
            *m /= total;
        }
        Ok(Belief { mass })
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn mass(&self, state: usize) -> f64 {
        self.mass[state]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.mass
    }

    /// States carrying mass above `threshold`, with their mass.
    pub fn support(&self, threshold: f64) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.mass
            .iter()
            .enumerate()
            .filter(move |(_, &m)| m > threshold)
            .map(|(s, &m)| (s, m))
    }
}

/// Converged action-value table: `values[s · action_count + a] = Q(s, a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QValueTable {
    values: Vec<f64>,
    state_count: usize,
    action_count: usize,
    /// Max-norm residual of the final sweep.
    pub residual: f64,
    /// Number of sweeps performed.
    pub iterations: usize,
}

impl QValueTable {
    /// Reassemble a table from raw parts (e.g. a cache file). The value length
    /// must equal `state_count * action_count`.
    pub fn from_raw(
        values: Vec<f64>,
        state_count: usize,
        action_count: usize,
        residual: f64,
        iterations: usize,
    ) -> Result<Self> {
        if values.len() != state_count * action_count || action_count == 0 {
            return Err(PomdpError::DimensionMismatch {
                expected: state_count * action_count,
                actual: values.len(),
            });
        }
        Ok(QValueTable { values, state_count, action_count, residual, iterations })
    }

    pub fn state_count(&self) -> usize {
        self.state_count
    }

    pub fn action_count(&self) -> usize {
        self.action_count
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn q(&self, state: usize, action: usize) -> f64 {
        self.values[state * self.action_count + action]
    }

    #[inline]
    pub fn row(&self, state: usize) -> &[f64] {
        let base = state * self.action_count;
        &self.values[base..base + self.action_count]
    }

    /// Greedy action and its value; ties break to the lowest action index.
    pub fn best_action(&self, state: usize) -> (usize, f64) {
        let row = self.row(state);
        let mut best = (0, row[0]);
        for (a, &q) in row.iter().enumerate().skip(1) {
            if q > best.1 {
                best = (a, q);
            }
        }
        best
    }

    /// State value `max_a Q(s, a)`.
    pub fn value(&self, state: usize) -> f64 {
        self.best_action(state).1
    }
}

/// Stopping rule for [`value_iterate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    /// Max-norm residual below which iteration stops.
    pub tolerance: f64,
    /// Hard sweep cap; hitting it returns the table as-is with the last
    /// residual recorded.
    pub max_iterations: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings { tolerance: 1e-6, max_iterations: 10_000 }
    }
}

/// Synchronous value iteration to convergence. See [`value_iterate_with`] for
/// a variant that reports per-sweep residuals.
pub fn value_iterate<M: DiscretePomdp>(model: &M, settings: SolverSettings) -> Result<QValueTable> {
    value_iterate_with(model, settings, |_, _| {})
}

/// Value iteration that calls `observer(sweep, residual)` after every sweep,
/// e.g. for progress logging or convergence monitoring.
pub fn value_iterate_with<M: DiscretePomdp>(
    model: &M,
    settings: SolverSettings,
    mut observer: impl FnMut(usize, f64),
) -> Result<QValueTable> {
    model.validate()?;
    let states = model.state_count();
    let actions = model.action_count();
    let entries = states * actions;

    let mut q_old = vec![0.0; entries];
    let mut q_new = vec![0.0; entries];
    let mut value = vec![0.0; states];

    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < settings.max_iterations {
        model.backup_sweep(&value, &mut q_new);
        iterations += 1;
        residual = max_abs_diff(&q_new, &q_old);
        state_values(&q_new, actions, &mut value);
        core::mem::swap(&mut q_old, &mut q_new);
        observer(iterations, residual);
        if residual <= settings.tolerance {
            break;
        }
    }

    Ok(QValueTable { values: q_old, state_count: states, action_count: actions, residual, iterations })
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    #[cfg(feature = "parallel")]
    {
        a.par_iter()
            .zip(b.par_iter())
            .map(|(x, y)| crate::fmath::abs(x - y))
            .reduce(|| 0.0, f64::max)
    }
    #[cfg(not(feature = "parallel"))]
    {
        a.iter().zip(b).map(|(x, y)| crate::fmath::abs(x - y)).fold(0.0, f64::max)
    }
}

fn state_values(q: &[f64], actions: usize, value: &mut [f64]) {
    let row_max = |row: &[f64]| row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    #[cfg(feature = "parallel")]
    {
        value
            .par_iter_mut()
            .zip(q.par_chunks(actions))
            .for_each(|(v, row)| *v = row_max(row));
    }
    #[cfg(not(feature = "parallel"))]
    {
        for (v, row) in value.iter_mut().zip(q.chunks(actions)) {
            *v = row_max(row);
        }
    }
}

/// Belief-weighted action value `Σ_s b(s) Q(s, a)`.
pub fn qmdp_utility(belief: &Belief, q: &QValueTable, action: usize) -> Result<f64> {
    if belief.len() != q.state_count() {
        return Err(PomdpError::DimensionMismatch {
            expected: q.state_count(),
            actual: belief.len(),
        });
    }
    if action >= q.action_count() {
        return Err(PomdpError::ActionOutOfRange { action, action_count: q.action_count() });
    }
    let mut acc = 0.0;
    for (state, mass) in belief.support(0.0) {
        acc += mass * q.q(state, action);
    }
    Ok(acc)
}

/// Conservative action selection over several tracked agents: score each
/// action by the minimum of its per-belief utilities and take the argmax.
/// Ties break to the lowest action index, so with the conventional action
/// ordering (no intervention first) comfort wins ties. Returns the chosen
/// action and its decomposed utility.
pub fn decomposed_action(beliefs: &[Belief], q: &QValueTable) -> Result<(usize, f64)> {
    if beliefs.is_empty() {
        return Err(PomdpError::NoBeliefs);
    }
    let mut best: Option<(usize, f64)> = None;
    for action in 0..q.action_count() {
        let mut worst = f64::INFINITY;
        for belief in beliefs {
            let u = qmdp_utility(belief, q, action)?;
            if u < worst {
                worst = u;
            }
        }
        match best {
            Some((_, u)) if worst <= u => {}
            _ => best = Some((action, worst)),
        }
    }
    Ok(best.expect("at least one action"))
}

/// Discrete Bayes filter step: prediction through the transition model under
/// `action`, then correction by the observation likelihood at each successor.
///
/// Returns the normalized posterior, or [`PomdpError::DegenerateBelief`] when
/// the total posterior mass falls below 1e-12 (observation incompatible with
/// the predicted support); the caller owns the reset policy.
pub fn belief_update<M: DiscretePomdp>(
    model: &M,
    belief: &Belief,
    action: usize,
    observation: &M::Observation,
) -> Result<Belief> {
    if belief.len() != model.state_count() {
        return Err(PomdpError::DimensionMismatch {
            expected: model.state_count(),
            actual: belief.len(),
        });
    }
    if action >= model.action_count() {
        return Err(PomdpError::ActionOutOfRange { action, action_count: model.action_count() });
    }

    let mut predicted = vec![0.0; model.state_count()];
    let mut buf = Vec::new();
    for (state, mass) in belief.support(0.0) {
        model.successors(state, action, &mut buf);
        for &(succ, p) in buf.iter() {
            predicted[succ as usize] += mass * p;
        }
    }
    let mut total = 0.0;
    for (succ, mass) in predicted.iter_mut().enumerate() {
        if *mass > 0.0 {
            *mass *= model.observation_likelihood(observation, succ);
            total += *mass;
        }
    }
    if !(total.is_finite() && total >= 1e-12) {
        return Err(PomdpError::DegenerateBelief { total_mass: total });
    }
    for mass in &mut predicted {
        *mass /= total;
    }
    Ok(Belief { mass: predicted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Dense in-memory model for tests: row-major transition matrices and a
    /// discrete observation alphabet.
    pub(crate) struct Tabular {
        pub states: usize,
        pub actions: usize,
        pub gamma: f64,
        /// transition[(s * actions + a) * states + s']
        pub transition: Vec<f64>,
        /// reward[s * actions + a]
        pub reward: Vec<f64>,
        /// likelihood[o * states + s]
        pub likelihood: Vec<f64>,
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
            self.reward[state * self.actions + action]
        }
        fn successors(&self, state: usize, action: usize, out: &mut Vec<Successor>) {
            out.clear();
            let base = (state * self.actions + action) * self.states;
            for s2 in 0..self.states {
                let p = self.transition[base + s2];
                if p != 0.0 {
                    out.push((s2 as u32, p));
                }
            }
        }
        fn observation_likelihood(&self, observation: &usize, successor: usize) -> f64 {
            self.likelihood[observation * self.states + successor]
        }
    }

    fn two_state_chain(gamma: f64) -> Tabular {
        // State 0 --a--> state 1 (reward 1); state 1 absorbing (reward 0).
        Tabular {
            states: 2,
            actions: 1,
            gamma,
            transition: vec![0.0, 1.0, 0.0, 1.0],
            reward: vec![1.0, 0.0],
            likelihood: vec![1.0, 0.0, 0.0, 1.0],
        }
    }

    #[test]
    fn zero_reward_converges_immediately() {
        let m = Tabular {
            states: 1,
            actions: 1,
            gamma: 0.9,
            transition: vec![1.0],
            reward: vec![0.0],
            likelihood: vec![1.0],
        };
        let q = value_iterate(&m, SolverSettings::default()).unwrap();
        assert_eq!(q.iterations, 1);
        assert_eq!(q.residual, 0.0);
        assert_eq!(q.q(0, 0), 0.0);
    }

    #[test]
    fn gamma_zero_returns_rewards_exactly() {
        let m = two_state_chain(0.0);
        let q = value_iterate(&m, SolverSettings::default()).unwrap();
        assert_eq!(q.q(0, 0), 1.0);
        assert_eq!(q.q(1, 0), 0.0);
    }

    #[test]
    fn chain_has_closed_form_values() {
        let m = two_state_chain(0.5);
        let q = value_iterate(&m, SolverSettings::default()).unwrap();
        assert_abs_diff_eq!(q.q(0, 0), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(q.q(1, 0), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn residuals_are_non_increasing() {
        // Random-ish 3-state model with a cycle so convergence is gradual.
        let m = Tabular {
            states: 3,
            actions: 2,
            gamma: 0.9,
            #[rustfmt::skip]
            transition: vec![
                0.2, 0.5, 0.3,   0.0, 1.0, 0.0,
                0.6, 0.2, 0.2,   0.3, 0.3, 0.4,
                1.0, 0.0, 0.0,   0.1, 0.8, 0.1,
            ],
            reward: vec![1.0, -2.0, 0.5, 3.0, -1.0, 0.0],
            likelihood: vec![1.0; 9],
        };
        let mut residuals = Vec::new();
        value_iterate_with(&m, SolverSettings::default(), |_, r| residuals.push(r)).unwrap();
        assert!(residuals.len() > 5);
        for w in residuals.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "residuals must not increase: {w:?}");
        }
    }

    #[test]
    fn iteration_cap_is_respected() {
        // Self-loop with reward: value grows geometrically, never converging
        // exactly, so the cap must stop the loop.
        let m = Tabular {
            states: 1,
            actions: 1,
            gamma: 0.99,
            transition: vec![1.0],
            reward: vec![1.0],
            likelihood: vec![1.0],
        };
        let q =
            value_iterate(&m, SolverSettings { tolerance: 0.0, max_iterations: 7 }).unwrap();
        assert_eq!(q.iterations, 7);
        assert!(q.residual > 0.0);
    }

    #[test]
    fn non_stochastic_row_is_rejected() {
        let mut m = two_state_chain(0.9);
        m.transition[1] = 0.5;
        match value_iterate(&m, SolverSettings::default()) {
            Err(PomdpError::NonStochasticRow { state: 0, action: 0, .. }) => {}
            other => panic!("expected row error, got {other:?}"),
        }
    }

    #[test]
    fn non_finite_reward_is_rejected() {
        let mut m = two_state_chain(0.9);
        m.reward[0] = f64::NAN;
        assert!(matches!(
            value_iterate(&m, SolverSettings::default()),
            Err(PomdpError::NonFiniteReward { state: 0, action: 0 })
        ));
    }

    #[test]
    fn best_action_breaks_ties_low() {
        let q = QValueTable::from_raw(vec![2.0, 2.0, 1.0], 1, 3, 0.0, 1).unwrap();
        assert_eq!(q.best_action(0), (0, 2.0));
    }

    #[test]
    fn qmdp_utility_weights_by_mass() {
        let q = QValueTable::from_raw(vec![1.0, 0.0, 3.0, 10.0], 2, 2, 0.0, 1).unwrap();
        let b = Belief::from_mass(vec![0.25, 0.75]).unwrap();
        assert_abs_diff_eq!(qmdp_utility(&b, &q, 0).unwrap(), 0.25 + 0.75 * 3.0);
        assert_abs_diff_eq!(qmdp_utility(&b, &q, 1).unwrap(), 7.5);
    }

    #[test]
    fn qmdp_utility_checks_dimensions() {
        let q = QValueTable::from_raw(vec![1.0, 0.0], 1, 2, 0.0, 1).unwrap();
        let b = Belief::uniform(3);
        assert!(matches!(
            qmdp_utility(&b, &q, 0),
            Err(PomdpError::DimensionMismatch { expected: 1, actual: 3 })
        ));
        let b1 = Belief::uniform(1);
        assert!(matches!(
            qmdp_utility(&b1, &q, 5),
            Err(PomdpError::ActionOutOfRange { action: 5, action_count: 2 })
        ));
    }

    #[test]
    fn decomposed_action_takes_worst_case_then_best() {
        // Action 0: utilities (5, 1) -> min 1. Action 1: (2, 2) -> min 2.
        let q = QValueTable::from_raw(vec![5.0, 2.0, 1.0, 2.0], 2, 2, 0.0, 1).unwrap();
        let b0 = Belief::delta(2, 0);
        let b1 = Belief::delta(2, 1);
        let (a, u) = decomposed_action(&[b0, b1], &q).unwrap();
        assert_eq!(a, 1);
        assert_abs_diff_eq!(u, 2.0);
    }

    #[test]
    fn decomposed_action_tie_breaks_to_first_action() {
        let q = QValueTable::from_raw(vec![3.0, 3.0], 1, 2, 0.0, 1).unwrap();
        let (a, _) = decomposed_action(&[Belief::delta(1, 0)], &q).unwrap();
        assert_eq!(a, 0);
    }

    #[test]
    fn decomposed_action_rejects_empty() {
        let q = QValueTable::from_raw(vec![0.0], 1, 1, 0.0, 1).unwrap();
        assert!(matches!(decomposed_action(&[], &q), Err(PomdpError::NoBeliefs)));
    }

    #[test]
    fn belief_update_matches_hand_computation() {
        let m = two_state_chain(0.9);
        // Start in state 0, take the action, observe symbol 1 (only state 1).
        let b = Belief::delta(2, 0);
        let post = belief_update(&m, &b, 0, &1).unwrap();
        assert_abs_diff_eq!(post.mass(0), 0.0);
        assert_abs_diff_eq!(post.mass(1), 1.0);
    }

    #[test]
    fn belief_update_degenerates_on_impossible_observation() {
        let m = two_state_chain(0.9);
        let b = Belief::delta(2, 0);
        // Observation 0 has zero likelihood at state 1, the only successor.
        assert!(matches!(
            belief_update(&m, &b, 0, &0),
            Err(PomdpError::DegenerateBelief { .. })
        ));
    }

    #[test]
    fn belief_update_normalizes() {
        let m = Tabular {
            states: 3,
            actions: 1,
            gamma: 0.9,
            transition: vec![0.5, 0.5, 0.0, 0.0, 0.5, 0.5, 0.5, 0.0, 0.5],
            reward: vec![0.0; 3],
            likelihood: vec![0.3, 0.6, 0.9],
        };
        let post = belief_update(&m, &Belief::uniform(3), 0, &0).unwrap();
        let total: f64 = post.as_slice().iter().sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        assert!(post.as_slice().iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn belief_from_mass_validates() {
        assert!(Belief::from_mass(vec![0.5, 0.5]).is_ok());
        assert!(matches!(
            Belief::from_mass(vec![0.7, 0.6]),
            Err(PomdpError::InvalidBeliefMass { .. })
        ));
        assert!(matches!(
            Belief::from_mass(vec![-0.1, 1.1]),
            Err(PomdpError::InvalidBeliefEntry { index: 0 })
        ));
    }
}
