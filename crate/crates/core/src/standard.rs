//! Exact pushforward of a belief through `t` deterministic steps.
//!
//! Every cell (and the state) that is not a vertex is treated as an
//! independent random input; all joint assignments are enumerated, run
//! deterministically and mixed. This is exponential in the number of
//! uncertain cells and only meant as an oracle.

use std::collections::BTreeMap;

use crate::belief::ConfigBelief;
use crate::error::{Error, Result};
use crate::machine::{DiscreteConfig, TuringMachine};
use crate::proof::advance;
use crate::scalar::Scalar;
use crate::simplex::{Distribution, SymbolSet};

/// Default limit on the number of joint assignments.
pub const STANDARD_CAP: u128 = 1 << 20;

/// Weighted final configurations of an exhaustive run.
#[derive(Clone, Debug, PartialEq)]
pub struct StandardOutcome<S = f64> {
    alphabet: SymbolSet,
    states: SymbolSet,
    outcomes: BTreeMap<DiscreteConfig, S>,
}

enum Source {
    Cell(i64),
    State,
}

fn is_vertex<S: Scalar>(w: &[S]) -> Option<usize> {
    let i = w.iter().position(|x| x.is_near(1.0, 0.0))?;
    w.iter().enumerate().all(|(k, x)| k == i || x.is_zero()).then_some(i)
}

/// Runs every joint assignment of the uncertain inputs for `t` steps.
pub fn standard_run<S: Scalar>(m: &TuringMachine, belief: &ConfigBelief<S>, t: usize) -> Result<StandardOutcome<S>> {
    standard_run_capped(m, belief, t, STANDARD_CAP)
}

pub fn standard_run_capped<S: Scalar>(
    m: &TuringMachine,
    belief: &ConfigBelief<S>,
    t: usize,
    cap: u128,
) -> Result<StandardOutcome<S>> {
    m.alphabet().check_same(belief.alphabet(), "belief alphabet")?;
    m.states().check_same(belief.states(), "belief states")?;

    let mut base = DiscreteConfig::new(0);
    let mut sources = Vec::new();
    // Support (indices with nonzero weight) and weights of each uncertain input.
    let mut supports: Vec<Vec<(usize, S)>> = Vec::new();
    let mut total: u128 = 1;
    let mut push = |w: &[S], src: Source, sources: &mut Vec<Source>| {
        let support: Vec<(usize, S)> = w
            .iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .map(|(i, &x)| (i, x))
            .collect();
        total = total.saturating_mul(support.len() as u128);
        supports.push(support);
        sources.push(src);
    };
    match is_vertex(belief.state_raw()) {
        Some(q) => base.state = q,
        None => push(belief.state_raw(), Source::State, &mut sources),
    }
    for (u, cell) in belief.tape().cells() {
        match is_vertex(cell) {
            Some(s) => base.set(u, s),
            None => push(cell, Source::Cell(u), &mut sources),
        }
    }
    if total > cap {
        return Err(Error::Capacity { required: total, cap });
    }

    let radix: Vec<usize> = supports.iter().map(Vec::len).collect();
    let mut digits = vec![0; radix.len()];
    let mut outcomes: BTreeMap<DiscreteConfig, S> = BTreeMap::new();
    for _ in 0..total {
        let mut c = base.clone();
        let mut w = S::one();
        for ((src, support), &d) in sources.iter().zip(&supports).zip(&digits) {
            let (sym, p) = support[d];
            w = w * p;
            match src {
                Source::State => c.state = sym,
                Source::Cell(u) => c.set(*u, sym),
            }
        }
        let out = m.det_run(&c, t);
        *outcomes.entry(out).or_insert_with(S::zero) += w;
        advance(&mut digits, &radix);
    }
    Ok(StandardOutcome {
        alphabet: m.alphabet().clone(),
        states: m.states().clone(),
        outcomes,
    })
}

impl<S: Scalar> StandardOutcome<S> {
    pub fn outcomes(&self) -> &BTreeMap<DiscreteConfig, S> {
        &self.outcomes
    }

    /// Marginal weights of cell `u` (head-relative, after the run).
    pub fn marginal_raw(&self, u: i64) -> Vec<S> {
        let mut out = vec![S::zero(); self.alphabet.len()];
        for (c, &w) in &self.outcomes {
            out[c.get(u)] += w;
        }
        out
    }

    pub fn state_marginal_raw(&self) -> Vec<S> {
        let mut out = vec![S::zero(); self.states.len()];
        for (c, &w) in &self.outcomes {
            out[c.state] += w;
        }
        out
    }

    /// Exact joint over the listed cells and, optionally, the state. Keys are
    /// the symbol indices of the cells followed by the state index.
    pub fn joint_raw(&self, cells: &[i64], with_state: bool) -> BTreeMap<Vec<usize>, S> {
        let mut out: BTreeMap<Vec<usize>, S> = BTreeMap::new();
        for (c, &w) in &self.outcomes {
            let mut key: Vec<usize> = cells.iter().map(|&u| c.get(u)).collect();
            if with_state {
                key.push(c.state);
            }
            *out.entry(key).or_insert_with(S::zero) += w;
        }
        out
    }

    /// Positions that are non-blank in some outcome.
    pub fn touched_positions(&self) -> Vec<i64> {
        let mut v: Vec<i64> = self.outcomes.keys().flat_map(|c| c.tape.keys().copied()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

impl StandardOutcome<f64> {
    pub fn marginal(&self, u: i64) -> Distribution {
        Distribution::from_raw(self.alphabet.clone(), self.marginal_raw(u))
    }

    pub fn state_marginal(&self) -> Distribution {
        Distribution::from_raw(self.states.clone(), self.state_marginal_raw())
    }

    /// Per-cell marginals as a belief; the correlations are dropped.
    pub fn to_marginal_belief(&self) -> ConfigBelief {
        let mut b = ConfigBelief::from_raw_state(self.alphabet.clone(), self.states.clone(), self.state_marginal_raw());
        for u in self.touched_positions() {
            b.tape_mut().set_raw(u, self.marginal_raw(u));
        }
        b
    }
}
