#![allow(dead_code)]

use std::collections::BTreeMap;

use naive_tm::{
    ConfigBelief, DiscreteConfig, Distribution, Move, PlainProof, Slot, StrConfigBelief, StringDistribution, SymbolSet,
    TangentVector, Transition, TuringMachine,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn symbols(prefix: &str, n: usize) -> SymbolSet {
    SymbolSet::new((0..n).map(|i| format!("{prefix}{i}"))).unwrap()
}

pub fn alphabet(n: usize) -> SymbolSet {
    SymbolSet::new((0..n).map(|i| if i == 0 { "□".to_string() } else { format!("s{i}") })).unwrap()
}

pub fn random_machine(rng: &mut ChaCha8Rng, stay: bool) -> TuringMachine {
    let ns = rng.gen_range(1..=3);
    let nq = rng.gen_range(1..=3);
    let moves: &[Move] = if stay { &Move::ALL } else { &[Move::Left, Move::Right] };
    TuringMachine::from_fn(alphabet(ns), symbols("q", nq), 0, None, |_, _| Transition {
        write: rng.gen_range(0..ns),
        next: rng.gen_range(0..nq),
        mv: moves[rng.gen_range(0..moves.len())],
    })
    .unwrap()
}

/// Strictly positive weights summing to one.
pub fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let t: f64 = raw.iter().sum();
    raw.iter().map(|x| x / t).collect()
}

/// Weights that are multiples of 1/64, so sums and products are exact.
pub fn dyadic_weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut cuts: Vec<u32> = (0..n - 1).map(|_| rng.gen_range(0..=64)).collect();
    cuts.sort_unstable();
    let mut prev = 0;
    let mut out = Vec::with_capacity(n);
    for c in cuts.into_iter().chain([64]) {
        out.push((c - prev) as f64 / 64.0);
        prev = c;
    }
    out
}

pub fn random_distribution(rng: &mut ChaCha8Rng, set: &SymbolSet) -> Distribution {
    Distribution::new(set.clone(), random_weights(rng, set.len())).unwrap()
}

pub fn random_tangent(rng: &mut ChaCha8Rng, set: &SymbolSet) -> TangentVector {
    let raw: Vec<f64> = (0..set.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mean = raw.iter().sum::<f64>() / raw.len() as f64;
    TangentVector::new(set.clone(), raw.iter().map(|x| x - mean).collect()).unwrap()
}

pub fn random_discrete(rng: &mut ChaCha8Rng, m: &TuringMachine) -> DiscreteConfig {
    let mut c = DiscreteConfig::new(rng.gen_range(0..m.states().len()));
    for u in -3..=3 {
        c.set(u, rng.gen_range(0..m.alphabet().len()));
    }
    c
}

pub fn random_belief(rng: &mut ChaCha8Rng, m: &TuringMachine) -> ConfigBelief {
    let mut b = ConfigBelief::new(m, &random_distribution(rng, m.states())).unwrap();
    for u in -3..=3 {
        if rng.gen_bool(0.8) {
            b.set_cell(u, &random_distribution(rng, m.alphabet())).unwrap();
        }
    }
    b
}

/// A proof with `slots` inputs over sets of size 2..=3 and degrees 1..=`max_degree`.
pub fn random_proof(rng: &mut ChaCha8Rng, slots: usize, max_degree: usize, output: &SymbolSet) -> PlainProof {
    let slots: Vec<Slot> = (0..slots)
        .map(|i| {
            Slot::new(
                symbols(&format!("x{i}_"), rng.gen_range(2..=3)),
                rng.gen_range(1..=max_degree),
            )
        })
        .collect();
    let n = output.len();
    PlainProof::from_fn(slots, output.clone(), |_| rng.gen_range(0..n)).unwrap()
}

pub fn random_string_distribution(rng: &mut ChaCha8Rng, alphabet: &SymbolSet, max_len: usize) -> StringDistribution {
    let count = rng.gen_range(1..=3);
    let mut weights = BTreeMap::new();
    for _ in 0..count {
        let len = rng.gen_range(0..=max_len);
        let s: Vec<usize> = (0..len).map(|_| rng.gen_range(0..alphabet.len())).collect();
        *weights.entry(s).or_insert(0.0) += rng.gen_range(0.05..1.0);
    }
    let total: f64 = weights.values().sum();
    for w in weights.values_mut() {
        *w /= total;
    }
    StringDistribution::new(alphabet.clone(), max_len, weights).unwrap()
}

pub fn random_str_config(rng: &mut ChaCha8Rng, m: &TuringMachine, max_len: usize) -> StrConfigBelief {
    StrConfigBelief {
        left: random_string_distribution(rng, m.alphabet(), max_len),
        right: random_string_distribution(rng, m.alphabet(), max_len),
        state: random_distribution(rng, m.states()),
    }
}

/// Maximum absolute difference over the larger infinity norm. The norm is
/// floored at 1e-3 so vectors that vanish up to rounding compare as equal.
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
    let scale = a.iter().chain(b).fold(0.0_f64, |m, x| m.max(x.abs())).max(1e-3);
    diff / scale
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}
