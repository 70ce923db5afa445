//! Belief configurations and the naive step.
//!
//! A belief holds one distribution per tape cell (head-relative, blank by
//! default) and one over machine states. [`naive_step`] pushes a belief
//! through the machine assuming every read of a cell or of the state is an
//! independent sample:
//!
//! ```text
//! M^d   = Σ_{σ,q} [δ_3(σ,q) = d] x^0_σ y_q
//! W^σ   = Σ_{σ',q} [δ_1(σ',q) = σ] x^0_σ' y_q
//! z_q   = Σ_{σ,q'} [δ_2(σ,q') = q] x^0_σ y_q'
//! w^u_σ = M^R (u ≠ -1 ? x^{u+1} : W) + M^L (u ≠ 1 ? x^{u-1} : W) + M^S (u ≠ 0 ? x^u : W)
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::machine::{DiscreteConfig, Move, TuringMachine};
use crate::scalar::{renormalize, Scalar};
use crate::simplex::{Distribution, SymbolSet};

/// Cells this close to the blank vertex are dropped from storage.
pub const PRUNE_TOL: f64 = 1e-14;

/// Finitely supported tape of cell distributions; unstored cells are blank.
#[derive(Clone, Debug, PartialEq)]
pub struct TapeBelief<S = f64> {
    alphabet: SymbolSet,
    cells: BTreeMap<i64, Vec<S>>,
}

fn is_blank<S: Scalar>(cell: &[S]) -> bool {
    cell[0].is_near(1.0, PRUNE_TOL) && cell[1..].iter().all(|x| x.is_near(0.0, PRUNE_TOL))
}

impl<S: Scalar> TapeBelief<S> {
    pub fn new(alphabet: SymbolSet) -> Self {
        TapeBelief {
            alphabet,
            cells: BTreeMap::new(),
        }
    }

    pub fn alphabet(&self) -> &SymbolSet {
        &self.alphabet
    }

    /// Stores `cell` at `u`, or removes the entry when it is (near) blank.
    pub fn set_raw(&mut self, u: i64, cell: Vec<S>) {
        assert_eq!(cell.len(), self.alphabet.len(), "cell length must match the alphabet");
        if is_blank(&cell) {
            self.cells.remove(&u);
        } else {
            self.cells.insert(u, cell);
        }
    }

    pub fn raw(&self, u: i64) -> Option<&[S]> {
        self.cells.get(&u).map(Vec::as_slice)
    }

    /// Weights at `u`, blank if unstored.
    pub fn raw_or_blank(&self, u: i64) -> Vec<S> {
        match self.cells.get(&u) {
            Some(c) => c.clone(),
            None => blank_cell(self.alphabet.len()),
        }
    }

    pub fn cells(&self) -> impl Iterator<Item = (i64, &[S])> {
        self.cells.iter().map(|(&u, c)| (u, c.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

impl TapeBelief<f64> {
    pub fn cell(&self, u: i64) -> Distribution {
        match self.cells.get(&u) {
            Some(c) => Distribution::from_raw(self.alphabet.clone(), c.clone()),
            None => Distribution::dirac_index(&self.alphabet, 0),
        }
    }
}

fn blank_cell<S: Scalar>(n: usize) -> Vec<S> {
    let mut c = vec![S::zero(); n];
    c[0] = S::one();
    c
}

/// A tape belief together with a belief about the machine state.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigBelief<S = f64> {
    tape: TapeBelief<S>,
    states: SymbolSet,
    state: Vec<S>,
}

impl<S: Scalar> ConfigBelief<S> {
    /// Blank tape with the given raw state weights.
    pub fn from_raw_state(alphabet: SymbolSet, states: SymbolSet, state: Vec<S>) -> Self {
        assert_eq!(state.len(), states.len(), "state weights must match the state set");
        ConfigBelief {
            tape: TapeBelief::new(alphabet),
            states,
            state,
        }
    }

    pub fn tape(&self) -> &TapeBelief<S> {
        &self.tape
    }

    pub fn tape_mut(&mut self) -> &mut TapeBelief<S> {
        &mut self.tape
    }

    pub fn alphabet(&self) -> &SymbolSet {
        &self.tape.alphabet
    }

    pub fn states(&self) -> &SymbolSet {
        &self.states
    }

    pub fn state_raw(&self) -> &[S] {
        &self.state
    }

    fn check_machine(&self, m: &TuringMachine) -> Result<()> {
        m.alphabet().check_same(self.alphabet(), "belief alphabet")?;
        m.states().check_same(&self.states, "belief states")
    }
}

impl ConfigBelief<f64> {
    /// Blank tape, state distribution `state`.
    pub fn new(m: &TuringMachine, state: &Distribution) -> Result<Self> {
        let state = state.embed(m.states())?;
        Ok(ConfigBelief {
            tape: TapeBelief::new(m.alphabet().clone()),
            states: m.states().clone(),
            state: state.weights().to_vec(),
        })
    }

    /// Blank tape in the start state.
    pub fn initial(m: &TuringMachine) -> Self {
        ConfigBelief {
            tape: TapeBelief::new(m.alphabet().clone()),
            states: m.states().clone(),
            state: Distribution::dirac_index(m.states(), m.start()).weights().to_vec(),
        }
    }

    /// The vertex lift of a discrete configuration.
    pub fn from_discrete(m: &TuringMachine, c: &DiscreteConfig) -> Self {
        let ns = m.alphabet().len();
        let mut b = ConfigBelief {
            tape: TapeBelief::new(m.alphabet().clone()),
            states: m.states().clone(),
            state: Distribution::dirac_index(m.states(), c.state).weights().to_vec(),
        };
        for (&u, &s) in &c.tape {
            let mut cell = vec![0.0; ns];
            cell[s] = 1.0;
            b.tape.set_raw(u, cell);
        }
        b
    }

    /// Sets cell `u`; `dist` may live on any subset of the alphabet.
    pub fn set_cell(&mut self, u: i64, dist: &Distribution) -> Result<()> {
        let d = dist.embed(&self.tape.alphabet)?;
        self.tape.set_raw(u, d.weights().to_vec());
        Ok(())
    }

    pub fn cell(&self, u: i64) -> Distribution {
        self.tape.cell(u)
    }

    pub fn state(&self) -> Distribution {
        Distribution::from_raw(self.states.clone(), self.state.clone())
    }

    /// The discrete configuration, if every cell and the state are vertices.
    pub fn to_discrete(&self) -> Option<DiscreteConfig> {
        let state = self.state().vertex()?;
        let mut c = DiscreteConfig::new(state);
        for (u, _) in self.tape.cells() {
            c.set(u, self.cell(u).vertex()?);
        }
        Some(c)
    }

    /// Componentwise comparison over the union of stored cells.
    pub fn approx_eq(&self, other: &ConfigBelief, tol: f64) -> bool {
        if self.states != other.states || self.tape.alphabet != other.tape.alphabet {
            return false;
        }
        let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol);
        if !close(&self.state, &other.state) {
            return false;
        }
        let positions: std::collections::BTreeSet<i64> =
            self.tape.cells.keys().chain(other.tape.cells.keys()).copied().collect();
        positions
            .into_iter()
            .all(|u| close(&self.tape.raw_or_blank(u), &other.tape.raw_or_blank(u)))
    }

    /// Parses the JSON form against a machine.
    pub fn from_repr(m: &TuringMachine, repr: BeliefRepr) -> Result<Self> {
        let mut b = ConfigBelief::new(m, &repr.state)?;
        for (pos, dist) in &repr.tape {
            let u: i64 = pos
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("tape position `{pos}` is not an integer")))?;
            b.set_cell(u, dist)?;
        }
        Ok(b)
    }

    pub fn from_json_str(m: &TuringMachine, s: &str) -> Result<Self> {
        let repr: BeliefRepr = serde_json::from_str(s)?;
        Self::from_repr(m, repr)
    }
}

/// JSON form `{"tape": {"<pos>": distribution}, "state": distribution}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BeliefRepr {
    pub tape: BTreeMap<String, Distribution>,
    pub state: Distribution,
}

impl Serialize for ConfigBelief<f64> {
    fn serialize<Ser: Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        BeliefRepr {
            tape: self.tape.cells().map(|(u, _)| (u.to_string(), self.cell(u))).collect(),
            state: self.state(),
        }
        .serialize(s)
    }
}

/// Smallest interval containing every stored cell and the head.
pub fn support_window<S: Scalar>(c: &ConfigBelief<S>) -> (i64, i64) {
    let lo = c.tape.cells.keys().next().copied().unwrap_or(0).min(0);
    let hi = c.tape.cells.keys().next_back().copied().unwrap_or(0).max(0);
    (lo, hi)
}

/// One naive step.
pub fn naive_step<S: Scalar>(m: &TuringMachine, c: &ConfigBelief<S>) -> Result<ConfigBelief<S>> {
    c.check_machine(m)?;
    let (lo, hi) = support_window(c);
    Ok(step_window(m, c, lo, hi))
}

/// `t` naive steps.
pub fn naive_run<S: Scalar>(m: &TuringMachine, c: &ConfigBelief<S>, t: usize) -> Result<ConfigBelief<S>> {
    c.check_machine(m)?;
    let mut c = c.clone();
    for _ in 0..t {
        let (lo, hi) = support_window(&c);
        c = step_window(m, &c, lo, hi);
    }
    Ok(c)
}

/// Steps with an explicit window `[lo, hi]` that must contain the support
/// and the head; cells outside it are taken to be blank.
pub(crate) fn step_window<S: Scalar>(m: &TuringMachine, c: &ConfigBelief<S>, lo: i64, hi: i64) -> ConfigBelief<S> {
    debug_assert!(lo <= 0 && hi >= 0);
    let ns = c.tape.alphabet.len();
    let nq = c.states.len();

    // Dense copy of [lo - 1, hi + 1] so neighbours of every output cell are in range.
    let base = lo - 1;
    let width = (hi - lo + 3) as usize;
    let blank: Vec<S> = blank_cell(ns);
    let mut dense: Vec<&[S]> = vec![blank.as_slice(); width];
    for (&u, cell) in c.tape.cells.range(lo..=hi) {
        dense[(u - base) as usize] = cell;
    }
    let x = |u: i64| dense[(u - base) as usize];

    let x0 = x(0);
    let mut moves = [S::zero(); 3];
    let mut written = vec![S::zero(); ns];
    let mut next = vec![S::zero(); nq];
    for (s, &xs) in x0.iter().enumerate() {
        if xs.is_zero() {
            continue;
        }
        for (q, &yq) in c.state.iter().enumerate() {
            if yq.is_zero() {
                continue;
            }
            let p = xs * yq;
            let t = m.transition(s, q);
            moves[t.mv.index()] += p;
            written[t.write] += p;
            next[t.next] += p;
        }
    }
    let m_left = moves[Move::Left.index()];
    let m_right = moves[Move::Right.index()];
    let m_stay = moves[Move::Stay.index()];

    let mut cells = Vec::with_capacity(width);
    for u in (lo - 1)..=(hi + 1) {
        let mut w = vec![S::zero(); ns];
        let mut add = |coef: S, src: &[S]| {
            if coef.is_zero() {
                return;
            }
            for (o, &v) in w.iter_mut().zip(src) {
                *o += coef * v;
            }
        };
        if u <= hi {
            add(m_right, if u == -1 { &written } else { x(u + 1) });
        } else {
            add(m_right, &blank);
        }
        if u >= lo {
            add(m_left, if u == 1 { &written } else { x(u - 1) });
        } else {
            add(m_left, &blank);
        }
        add(m_stay, if u == 0 { &written } else { x(u) });
        renormalize(&mut w);
        if !is_blank(&w) {
            cells.push((u, w));
        }
    }
    renormalize(&mut next);
    ConfigBelief {
        tape: TapeBelief {
            alphabet: c.tape.alphabet.clone(),
            cells: cells.into_iter().collect(),
        },
        states: c.states.clone(),
        state: next,
    }
}
