//! Learning uncertain tape contents from input/output examples.
//!
//! A [`Dataset`] fixes an [`UncertainRegion`] of tape cells whose contents
//! are unknown, and a list of [`DatasetTuple`]s: clamped cells, targets on
//! the final tape and a step count. [`Problem`] binds a dataset to a machine;
//! its loss is the sum over tuples and targets of `KL(b_v || ε_μ(cell_v))`
//! plus `λ R(h)`, and its gradients come from dual numbers threaded through
//! the naive step.

mod descend;
mod loss;
mod report;

use std::collections::BTreeMap;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::machine::TuringMachine;
use crate::simplex::{Distribution, SymbolSet};

pub use descend::{descend, flow_field, FlowField, FlowSample, StopReason, Trajectory, TrajectoryPoint};
pub use loss::regularizer;
pub use report::{causality_report, extract_code, CausalityReport, CausalityRow, CodeEntry};

/// Learnable cells and the symbols each may hold.
#[derive(Clone, Debug, PartialEq)]
pub struct UncertainRegion {
    entries: BTreeMap<i64, SymbolSet>,
}

impl UncertainRegion {
    pub fn new(entries: BTreeMap<i64, SymbolSet>) -> Result<Self> {
        for (u, s) in &entries {
            if s.len() < 2 {
                return Err(Error::Config(format!(
                    "uncertain cell {u} must allow at least two symbols"
                )));
            }
        }
        Ok(UncertainRegion { entries })
    }

    pub fn from_names(entries: &[(i64, &[&str])]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for &(u, names) in entries {
            map.insert(u, SymbolSet::new(names.iter().copied())?);
        }
        UncertainRegion::new(map)
    }

    pub fn entries(&self) -> &BTreeMap<i64, SymbolSet> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn support(&self, u: i64) -> Option<&SymbolSet> {
        self.entries.get(&u)
    }

    /// Number of free coordinates, `Σ_u (|Σ_u| - 1)`.
    pub fn dimension(&self) -> usize {
        self.entries.values().map(|s| s.len() - 1).sum()
    }
}

fn parse_position(s: &str) -> Result<i64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("tape position `{s}` is not an integer")))
}

impl Serialize for UncertainRegion {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let m: BTreeMap<String, &SymbolSet> = self.entries.iter().map(|(u, set)| (u.to_string(), set)).collect();
        m.serialize(s)
    }
}

impl<'de> Deserialize<'de> for UncertainRegion {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = BTreeMap::<String, SymbolSet>::deserialize(d)?;
        let mut entries = BTreeMap::new();
        for (k, v) in m {
            entries.insert(parse_position(&k).map_err(D::Error::custom)?, v);
        }
        UncertainRegion::new(entries).map_err(D::Error::custom)
    }
}

/// One distribution per uncertain cell, over that cell's allowed symbols.
#[derive(Clone, Debug, PartialEq)]
pub struct BeliefParams {
    h: BTreeMap<i64, Distribution>,
}

impl BeliefParams {
    pub fn new(region: &UncertainRegion, h: BTreeMap<i64, Distribution>) -> Result<Self> {
        if h.len() != region.len() {
            return Err(Error::Config(format!(
                "{} belief entries for {} uncertain cells",
                h.len(),
                region.len()
            )));
        }
        for (u, set) in region.entries() {
            let d = h
                .get(u)
                .ok_or_else(|| Error::Config(format!("no belief for uncertain cell {u}")))?;
            set.check_same(d.set(), &format!("belief at cell {u}"))?;
        }
        Ok(BeliefParams { h })
    }

    /// Every cell puts weight `w` on the second allowed symbol and the rest
    /// on the first. Only binary supports are accepted.
    pub fn binary(region: &UncertainRegion, weights: &[f64]) -> Result<Self> {
        if weights.len() != region.len() {
            return Err(Error::Config(format!(
                "{} weights for {} uncertain cells",
                weights.len(),
                region.len()
            )));
        }
        let mut h = BTreeMap::new();
        for ((u, set), &w) in region.entries().iter().zip(weights) {
            if set.len() != 2 {
                return Err(Error::Config(format!(
                    "cell {u} allows {} symbols; a single weight needs a binary support",
                    set.len()
                )));
            }
            h.insert(*u, Distribution::new(set.clone(), vec![1.0 - w, w])?);
        }
        Ok(BeliefParams { h })
    }

    /// Barycenter of every cell.
    pub fn uniform(region: &UncertainRegion) -> Self {
        BeliefParams {
            h: region
                .entries()
                .iter()
                .map(|(&u, s)| (u, Distribution::uniform(s)))
                .collect(),
        }
    }

    pub fn get(&self, u: i64) -> Option<&Distribution> {
        self.h.get(&u)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &Distribution)> {
        self.h.iter().map(|(&u, d)| (u, d))
    }

    pub fn is_vertex(&self) -> bool {
        self.h.values().all(|d| d.vertex().is_some())
    }

    /// Column names `h<pos>_<symbol>` for every stored weight.
    pub fn coordinate_names(&self) -> Vec<String> {
        self.iter()
            .flat_map(|(u, d)| d.set().names().iter().map(move |s| format!("h{u}_{s}")))
            .collect()
    }

    /// All weights, cell by cell.
    pub fn flat(&self) -> Vec<f64> {
        self.h.values().flat_map(|d| d.weights().iter().copied()).collect()
    }

    /// Largest coordinate difference.
    pub fn distance_inf(&self, other: &BeliefParams) -> f64 {
        self.flat()
            .iter()
            .zip(other.flat())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub(crate) fn raw(&self) -> Vec<Vec<f64>> {
        self.h.values().map(|d| d.weights().to_vec()).collect()
    }

    pub(crate) fn from_raw(region: &UncertainRegion, raw: Vec<Vec<f64>>) -> Self {
        BeliefParams {
            h: region
                .entries()
                .iter()
                .zip(raw)
                .map(|((&u, s), w)| (u, Distribution::from_raw(s.clone(), w)))
                .collect(),
        }
    }

    pub fn from_json_value(region: &UncertainRegion, v: serde_json::Value) -> Result<Self> {
        let m: BTreeMap<String, Distribution> = serde_json::from_value(v)?;
        let mut h = BTreeMap::new();
        for (k, d) in m {
            h.insert(parse_position(&k)?, d);
        }
        BeliefParams::new(region, h)
    }
}

impl Serialize for BeliefParams {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let m: BTreeMap<String, &Distribution> = self.h.iter().map(|(u, d)| (u.to_string(), d)).collect();
        m.serialize(s)
    }
}

/// One input/output example. Clamped positions are relative to the initial
/// head, target positions to the final head.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetTuple {
    #[serde(default, with = "position_map")]
    pub clamped: BTreeMap<i64, String>,
    #[serde(with = "position_map")]
    pub targets: BTreeMap<i64, String>,
    pub steps: usize,
    #[serde(default)]
    pub state_target: Option<String>,
}

mod position_map {
    use super::*;

    pub fn serialize<S: Serializer>(m: &BTreeMap<i64, String>, s: S) -> std::result::Result<S::Ok, S::Error> {
        let out: BTreeMap<String, &String> = m.iter().map(|(u, v)| (u.to_string(), v)).collect();
        out.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BTreeMap<i64, String>, D::Error> {
        let m = BTreeMap::<String, String>::deserialize(d)?;
        m.into_iter()
            .map(|(k, v)| Ok((parse_position(&k).map_err(D::Error::custom)?, v)))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub region: UncertainRegion,
    pub tuples: Vec<DatasetTuple>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub lambda: f64,
    pub mu: f64,
    pub eta: f64,
    pub max_iters: usize,
    pub eps: f64,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            lambda: 0.01,
            mu: 1e-6,
            eta: 0.05,
            max_iters: 10_000,
            eps: 1e-8,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda = {} must be >= 0",
                self.lambda
            )));
        }
        if !(self.mu > 0.0 && self.mu < 1.0) {
            return Err(Error::InvalidParameter(format!("mu = {} outside (0, 1)", self.mu)));
        }
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(Error::InvalidParameter(format!("eta = {} must be > 0", self.eta)));
        }
        if !(self.eps.is_finite() && self.eps >= 0.0) {
            return Err(Error::InvalidParameter(format!("eps = {} must be >= 0", self.eps)));
        }
        Ok(())
    }
}

/// Which observer propagates the uncertainty.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Naive,
    Standard,
}

#[derive(Clone, Debug)]
pub(crate) struct CompiledTuple {
    pub clamped: Vec<(i64, usize)>,
    pub targets: Vec<(i64, usize)>,
    pub steps: usize,
    pub state_target: Option<usize>,
}

/// A dataset bound to a machine, with every symbol resolved.
#[derive(Clone, Debug)]
pub struct Problem {
    machine: TuringMachine,
    region: UncertainRegion,
    /// Alphabet indices of each cell's allowed symbols, in region order.
    supports: Vec<(i64, Vec<usize>)>,
    tuples: Vec<CompiledTuple>,
}

impl Problem {
    pub fn new(machine: &TuringMachine, data: &Dataset) -> Result<Self> {
        let sigma = machine.alphabet();
        let mut supports = Vec::new();
        for (&u, set) in data.region.entries() {
            let idx = set
                .names()
                .iter()
                .map(|n| sigma.index_of(n))
                .collect::<Result<Vec<_>>>()?;
            supports.push((u, idx));
        }
        if data.tuples.is_empty() {
            return Err(Error::Config("dataset has no tuples".into()));
        }
        let mut tuples = Vec::with_capacity(data.tuples.len());
        for (i, t) in data.tuples.iter().enumerate() {
            if t.targets.is_empty() {
                return Err(Error::Config(format!("tuple {i} has no targets")));
            }
            if t.steps == 0 {
                return Err(Error::Config(format!("tuple {i} runs for zero steps")));
            }
            if let Some(u) = t.clamped.keys().find(|u| data.region.entries().contains_key(u)) {
                return Err(Error::Config(format!(
                    "tuple {i} clamps cell {u}, which is in the uncertain region"
                )));
            }
            let resolve = |m: &BTreeMap<i64, String>| -> Result<Vec<(i64, usize)>> {
                m.iter().map(|(&u, s)| Ok((u, sigma.index_of(s)?))).collect()
            };
            tuples.push(CompiledTuple {
                clamped: resolve(&t.clamped)?,
                targets: resolve(&t.targets)?,
                steps: t.steps,
                state_target: t
                    .state_target
                    .as_deref()
                    .map(|q| machine.states().index_of(q))
                    .transpose()?,
            });
        }
        Ok(Problem {
            machine: machine.clone(),
            region: data.region.clone(),
            supports,
            tuples,
        })
    }

    pub fn machine(&self) -> &TuringMachine {
        &self.machine
    }

    pub fn region(&self) -> &UncertainRegion {
        &self.region
    }

    pub(crate) fn check_params(&self, h: &BeliefParams) -> Result<()> {
        BeliefParams::new(&self.region, h.h.clone()).map(|_| ())
    }
}
