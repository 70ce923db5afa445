//! Deterministic single-tape Turing machines in head-relative coordinates.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::simplex::SymbolSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Move {
    Left,
    Right,
    Stay,
}

impl Move {
    pub const ALL: [Move; 3] = [Move::Left, Move::Right, Move::Stay];

    /// Change of head position.
    pub fn offset(self) -> i64 {
        match self {
            Move::Left => -1,
            Move::Right => 1,
            Move::Stay => 0,
        }
    }

    pub(crate) fn index(self) -> usize {
        match self {
            Move::Left => 0,
            Move::Right => 1,
            Move::Stay => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Transition {
    pub write: usize,
    pub next: usize,
    pub mv: Move,
}

/// A named transition rule, the unit of the machine JSON format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub read: String,
    pub state: String,
    pub write: String,
    pub next: String,
    #[serde(rename = "move")]
    pub mv: Move,
}

impl Rule {
    pub fn new(read: &str, state: &str, write: &str, next: &str, mv: Move) -> Self {
        Rule {
            read: read.into(),
            state: state.into(),
            write: write.into(),
            next: next.into(),
            mv,
        }
    }
}

/// A machine with a total transition table. The blank is alphabet index 0.
#[derive(Clone, Debug, PartialEq)]
pub struct TuringMachine {
    alphabet: SymbolSet,
    states: SymbolSet,
    start: usize,
    halt: Option<usize>,
    /// Indexed by `read * |Q| + state`.
    delta: Vec<Transition>,
}

impl TuringMachine {
    /// Builds a machine from named rules. Every `(read, state)` pair must
    /// appear exactly once.
    pub fn new(
        alphabet: SymbolSet,
        states: SymbolSet,
        start: &str,
        halt: Option<&str>,
        rules: &[Rule],
    ) -> Result<Self> {
        let nq = states.len();
        let mut table: Vec<Option<Transition>> = vec![None; alphabet.len() * nq];
        for r in rules {
            let read = alphabet.index_of(&r.read)?;
            let state = states.index_of(&r.state)?;
            let t = Transition {
                write: alphabet.index_of(&r.write)?,
                next: states.index_of(&r.next)?,
                mv: r.mv,
            };
            let slot = &mut table[read * nq + state];
            if slot.is_some() {
                return Err(Error::InvalidMachine(format!(
                    "duplicate rule for ({}, {})",
                    r.read, r.state
                )));
            }
            *slot = Some(t);
        }
        let mut delta = Vec::with_capacity(table.len());
        for (k, t) in table.into_iter().enumerate() {
            match t {
                Some(t) => delta.push(t),
                None => {
                    return Err(Error::InvalidMachine(format!(
                        "transition table is not total: no rule for ({}, {})",
                        alphabet.name(k / nq),
                        states.name(k % nq)
                    )))
                }
            }
        }
        let start = states.index_of(start)?;
        let halt = halt.map(|h| states.index_of(h)).transpose()?;
        let m = TuringMachine {
            alphabet,
            states,
            start,
            halt,
            delta,
        };
        m.check_halt_convention()?;
        Ok(m)
    }

    /// Builds a machine from a closure over `(read, state)` indices.
    pub fn from_fn<F>(
        alphabet: SymbolSet,
        states: SymbolSet,
        start: usize,
        halt: Option<usize>,
        mut f: F,
    ) -> Result<Self>
    where
        F: FnMut(usize, usize) -> Transition,
    {
        let (ns, nq) = (alphabet.len(), states.len());
        if start >= nq || halt.is_some_and(|h| h >= nq) {
            return Err(Error::InvalidMachine("start or halt state out of range".into()));
        }
        let mut delta = Vec::with_capacity(ns * nq);
        for s in 0..ns {
            for q in 0..nq {
                let t = f(s, q);
                if t.write >= ns || t.next >= nq {
                    return Err(Error::InvalidMachine(format!(
                        "rule for ({}, {}) leaves the alphabet or state set",
                        alphabet.name(s),
                        states.name(q)
                    )));
                }
                delta.push(t);
            }
        }
        let m = TuringMachine {
            alphabet,
            states,
            start,
            halt,
            delta,
        };
        m.check_halt_convention()?;
        Ok(m)
    }

    fn check_halt_convention(&self) -> Result<()> {
        let Some(h) = self.halt else { return Ok(()) };
        for s in 0..self.alphabet.len() {
            let t = self.transition(s, h);
            if t.write != s || t.next != h || t.mv != Move::Stay {
                return Err(Error::InvalidMachine(format!(
                    "halt state `{}` must leave `{}` unchanged and stay",
                    self.states.name(h),
                    self.alphabet.name(s)
                )));
            }
        }
        Ok(())
    }

    pub fn alphabet(&self) -> &SymbolSet {
        &self.alphabet
    }

    pub fn states(&self) -> &SymbolSet {
        &self.states
    }

    pub fn blank(&self) -> usize {
        0
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn halt(&self) -> Option<usize> {
        self.halt
    }

    #[inline]
    pub fn transition(&self, read: usize, state: usize) -> Transition {
        self.delta[read * self.states.len() + state]
    }

    pub fn uses_stay(&self) -> bool {
        self.delta.iter().any(|t| t.mv == Move::Stay)
    }

    pub fn rules(&self) -> Vec<Rule> {
        let nq = self.states.len();
        self.delta
            .iter()
            .enumerate()
            .map(|(k, t)| Rule {
                read: self.alphabet.name(k / nq).into(),
                state: self.states.name(k % nq).into(),
                write: self.alphabet.name(t.write).into(),
                next: self.states.name(t.next).into(),
                mv: t.mv,
            })
            .collect()
    }

    /// One deterministic step: write under the head, move, re-index so the
    /// head is back at position 0.
    pub fn det_step(&self, c: &DiscreteConfig) -> DiscreteConfig {
        let read = c.tape.get(&0).copied().unwrap_or(0);
        let t = self.transition(read, c.state);
        let d = t.mv.offset();
        let mut tape = BTreeMap::new();
        for (&u, &s) in &c.tape {
            if u != 0 {
                tape.insert(u - d, s);
            }
        }
        if t.write != 0 {
            tape.insert(-d, t.write);
        }
        DiscreteConfig { tape, state: t.next }
    }

    pub fn det_run(&self, c: &DiscreteConfig, steps: usize) -> DiscreteConfig {
        let mut c = c.clone();
        for _ in 0..steps {
            c = self.det_step(&c);
        }
        c
    }
}

/// A discrete configuration: non-blank cells in head-relative coordinates plus a state.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DiscreteConfig {
    /// Only non-blank symbols are stored.
    pub tape: BTreeMap<i64, usize>,
    pub state: usize,
}

impl DiscreteConfig {
    pub fn new(state: usize) -> Self {
        DiscreteConfig {
            tape: BTreeMap::new(),
            state,
        }
    }

    /// Builds a configuration from symbol names; blanks are dropped.
    pub fn from_symbols<'a, I>(m: &TuringMachine, cells: I, state: &str) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, &'a str)>,
    {
        let mut c = DiscreteConfig::new(m.states().index_of(state)?);
        for (u, s) in cells {
            c.set(u, m.alphabet().index_of(s)?);
        }
        Ok(c)
    }

    pub fn get(&self, u: i64) -> usize {
        self.tape.get(&u).copied().unwrap_or(0)
    }

    pub fn set(&mut self, u: i64, symbol: usize) {
        if symbol == 0 {
            self.tape.remove(&u);
        } else {
            self.tape.insert(u, symbol);
        }
    }

    /// Symbols over `[lo, hi]` separated by spaces.
    pub fn render(&self, m: &TuringMachine, lo: i64, hi: i64) -> String {
        (lo..=hi)
            .map(|u| m.alphabet().name(self.get(u)))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn display<'a>(&'a self, m: &'a TuringMachine) -> DisplayConfig<'a> {
        DisplayConfig { c: self, m }
    }
}

/// Renders the non-blank hull with the head cell in brackets.
pub struct DisplayConfig<'a> {
    c: &'a DiscreteConfig,
    m: &'a TuringMachine,
}

impl fmt::Display for DisplayConfig<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lo = self.c.tape.keys().next().copied().unwrap_or(0).min(0);
        let hi = self.c.tape.keys().next_back().copied().unwrap_or(0).max(0);
        for u in lo..=hi {
            if u > lo {
                write!(f, " ")?;
            }
            let s = self.m.alphabet().name(self.c.get(u));
            if u == 0 {
                write!(f, "[{s}]")?;
            } else {
                write!(f, "{s}")?;
            }
        }
        write!(f, " ({})", self.m.states().name(self.c.state))
    }
}

#[derive(Serialize, Deserialize)]
struct MachineRepr {
    alphabet: SymbolSet,
    states: SymbolSet,
    start: String,
    #[serde(default)]
    halt: Option<String>,
    delta: Vec<Rule>,
}

impl Serialize for TuringMachine {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MachineRepr {
            alphabet: self.alphabet.clone(),
            states: self.states.clone(),
            start: self.states.name(self.start).into(),
            halt: self.halt.map(|h| self.states.name(h).into()),
            delta: self.rules(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TuringMachine {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = MachineRepr::deserialize(d)?;
        TuringMachine::new(r.alphabet, r.states, &r.start, r.halt.as_deref(), &r.delta).map_err(D::Error::custom)
    }
}
