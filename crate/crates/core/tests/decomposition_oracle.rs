//! Cross-checks decomposed action selection against exhaustive argmax-min
//! enumeration, including permutation invariance over belief order.

mod common;

use pedplan_core::pomdp::{decomposed_action, qmdp_utility, Belief, QValueTable};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_table(rng: &mut ChaCha8Rng, states: usize, actions: usize) -> QValueTable {
    let values = (0..states * actions).map(|_| rng.gen_range(-50.0..50.0)).collect();
    QValueTable::from_raw(values, states, actions, 0.0, 1).unwrap()
}

fn random_belief(rng: &mut ChaCha8Rng, states: usize) -> Belief {
    let mut mass: Vec<f64> = (0..states).map(|_| rng.gen_range(0.0..1.0)).collect();
    let total: f64 = mass.iter().sum();
    for m in &mut mass {
        *m /= total;
    }
    Belief::from_mass(mass).unwrap()
}

/// Exhaustive reference: evaluate every action against every belief, take the
/// min across beliefs, then scan for the argmax keeping the first maximum.
fn exhaustive_argmax_min(beliefs: &[Belief], q: &QValueTable) -> (usize, f64) {
    let mut best: Option<(usize, f64)> = None;
    for a in 0..q.action_count() {
        let worst = beliefs
            .iter()
            .map(|b| qmdp_utility(b, q, a).unwrap())
            .fold(f64::INFINITY, f64::min);
        if best.map_or(true, |(_, u)| worst > u) {
            best = Some((a, worst));
        }
    }
    best.unwrap()
}

#[test]
fn matches_exhaustive_enumeration_for_one_to_four_beliefs() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for trial in 0..200 {
        let states = rng.gen_range(2..12);
        let actions = rng.gen_range(1..8);
        let q = random_table(&mut rng, states, actions);
        let count = 1 + trial % 4;
        let beliefs: Vec<Belief> = (0..count).map(|_| random_belief(&mut rng, states)).collect();

        let (a, u) = decomposed_action(&beliefs, &q).unwrap();
        let (a_ref, u_ref) = exhaustive_argmax_min(&beliefs, &q);
        assert_eq!(a, a_ref, "trial {trial}");
        assert!((u - u_ref).abs() < 1e-12, "trial {trial}: {u} vs {u_ref}");
    }
}

#[test]
fn choice_is_invariant_under_belief_permutation() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let states = rng.gen_range(2..10);
        let actions = rng.gen_range(2..6);
        let q = random_table(&mut rng, states, actions);
        let mut beliefs: Vec<Belief> = (0..4).map(|_| random_belief(&mut rng, states)).collect();

        let (a0, u0) = decomposed_action(&beliefs, &q).unwrap();
        for _ in 0..5 {
            beliefs.shuffle(&mut rng);
            let (a, u) = decomposed_action(&beliefs, &q).unwrap();
            assert_eq!(a, a0);
            assert!((u - u0).abs() < 1e-12);
        }
    }
}

#[test]
fn single_belief_reduces_to_plain_argmax() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let states = rng.gen_range(1..8);
        let actions = rng.gen_range(1..6);
        let q = random_table(&mut rng, states, actions);
        let b = random_belief(&mut rng, states);
        let (a, _) = decomposed_action(core::slice::from_ref(&b), &q).unwrap();
        let direct = (0..actions)
            .map(|a| qmdp_utility(&b, &q, a).unwrap())
            .enumerate()
            .fold((0usize, f64::NEG_INFINITY), |acc, (i, u)| if u > acc.1 { (i, u) } else { acc });
        assert_eq!(a, direct.0);
    }
}
