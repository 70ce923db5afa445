//! Finite probability simplices.
//!
//! A [`SymbolSet`] fixes an ordering of finitely many named symbols. A
//! [`Distribution`] is a point of the simplex over such a set and a
//! [`TangentVector`] is a sum-zero direction at a point of it. Everything
//! here is plain immutable data; symbol sets are reference counted so cloning
//! them is cheap.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Slack allowed on individual weights and on the total of a distribution.
pub const WEIGHT_TOL: f64 = 1e-12;

/// Inputs whose total is off by at most this much are renormalized; larger
/// deviations are rejected.
pub const RENORMALIZE_TOL: f64 = 1e-9;

#[derive(Debug)]
struct SetInner {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

/// An ordered, nonempty list of distinct symbol names.
///
/// The order is fixed for the lifetime of a value and drives argmax
/// tie-breaking and serialization.
#[derive(Clone)]
pub struct SymbolSet(Arc<SetInner>);

impl SymbolSet {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::InvalidSymbolSet("symbol set is empty".into()));
        }
        let mut index = HashMap::with_capacity(names.len());
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(Error::InvalidSymbolSet(format!("duplicate symbol `{n}`")));
            }
        }
        Ok(SymbolSet(Arc::new(SetInner { names, index })))
    }

    /// Cartesian product; element names are the component names joined by commas.
    pub fn product(sets: &[SymbolSet]) -> Result<Self> {
        let mut names = vec![String::new()];
        for (k, set) in sets.iter().enumerate() {
            let mut next = Vec::with_capacity(names.len() * set.len());
            for prefix in &names {
                for s in set.names() {
                    if k == 0 {
                        next.push(s.clone());
                    } else {
                        next.push(format!("{prefix},{s}"));
                    }
                }
            }
            names = next;
        }
        SymbolSet::new(names)
    }

    pub fn len(&self) -> usize {
        self.0.names.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn names(&self) -> &[String] {
        &self.0.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.0.names[i]
    }

    pub fn contains(&self, symbol: &str) -> bool {
        self.0.index.contains_key(symbol)
    }

    pub fn index_of(&self, symbol: &str) -> Result<usize> {
        self.0.index.get(symbol).copied().ok_or_else(|| Error::UnknownSymbol {
            symbol: symbol.to_string(),
            expected: self.0.names.join(", "),
        })
    }

    /// True if every symbol of `self` also belongs to `other`.
    pub fn is_subset_of(&self, other: &SymbolSet) -> bool {
        self.names().iter().all(|n| other.contains(n))
    }

    pub(crate) fn check_same(&self, other: &SymbolSet, what: &str) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SetMismatch(format!(
                "{what}: expected [{}], got [{}]",
                self.names().join(", "),
                other.names().join(", ")
            )))
        }
    }
}

impl PartialEq for SymbolSet {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.names == other.0.names
    }
}

impl Eq for SymbolSet {}

impl fmt::Debug for SymbolSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.names()).finish()
    }
}

impl Serialize for SymbolSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.names().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymbolSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let names = Vec::<String>::deserialize(d)?;
        SymbolSet::new(names).map_err(D::Error::custom)
    }
}

/// A probability distribution over a [`SymbolSet`].
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    set: SymbolSet,
    weights: Vec<f64>,
}

impl Distribution {
    /// Validates and, when the total is within [`RENORMALIZE_TOL`] of one,
    /// renormalizes. Weights in `[-1e-12, 0)` are clamped to zero.
    pub fn new(set: SymbolSet, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != set.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} weights for {} symbols",
                weights.len(),
                set.len()
            )));
        }
        let mut weights = weights;
        for (i, w) in weights.iter_mut().enumerate() {
            if !w.is_finite() {
                return Err(Error::InvalidDistribution(format!(
                    "non-finite weight on `{}`",
                    set.name(i)
                )));
            }
            if *w < -WEIGHT_TOL || *w > 1.0 + RENORMALIZE_TOL {
                return Err(Error::InvalidDistribution(format!(
                    "weight {w} on `{}` outside [0, 1]",
                    set.name(i)
                )));
            }
            if *w < 0.0 {
                *w = 0.0;
            }
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > RENORMALIZE_TOL {
            return Err(Error::InvalidDistribution(format!("weights sum to {total}, not 1")));
        }
        if total != 1.0 {
            for w in weights.iter_mut() {
                *w /= total;
            }
        }
        Ok(Distribution { set, weights })
    }

    /// Builds a distribution from `(symbol, weight)` pairs; unlisted symbols get weight zero.
    pub fn from_pairs<'a, I>(set: SymbolSet, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, f64)>,
    {
        let mut weights = vec![0.0; set.len()];
        for (s, w) in pairs {
            weights[set.index_of(s)?] += w;
        }
        Distribution::new(set, weights)
    }

    /// The vertex of the simplex at `symbol`.
    pub fn dirac(set: &SymbolSet, symbol: &str) -> Result<Self> {
        let i = set.index_of(symbol)?;
        Ok(Self::dirac_index(set, i))
    }

    pub fn dirac_index(set: &SymbolSet, i: usize) -> Self {
        let mut weights = vec![0.0; set.len()];
        weights[i] = 1.0;
        Distribution {
            set: set.clone(),
            weights,
        }
    }

    /// The barycenter.
    pub fn uniform(set: &SymbolSet) -> Self {
        let n = set.len() as f64;
        Distribution {
            set: set.clone(),
            weights: vec![1.0 / n; set.len()],
        }
    }

    /// Trusted constructor for internally computed weights already on the simplex.
    pub(crate) fn from_raw(set: SymbolSet, weights: Vec<f64>) -> Self {
        debug_assert_eq!(set.len(), weights.len());
        Distribution { set, weights }
    }

    pub fn set(&self) -> &SymbolSet {
        &self.set
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, symbol: &str) -> Result<f64> {
        Ok(self.weights[self.set.index_of(symbol)?])
    }

    /// Index of the largest weight, ties broken by symbol order.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &w) in self.weights.iter().enumerate() {
            if w > self.weights[best] {
                best = i;
            }
        }
        best
    }

    /// The symbol carrying all the mass, if this is a vertex.
    pub fn vertex(&self) -> Option<usize> {
        let i = self.argmax();
        (self.weights[i] == 1.0).then_some(i)
    }

    /// Componentwise comparison within `tol`.
    pub fn approx_eq(&self, other: &Distribution, tol: f64) -> bool {
        self.set == other.set
            && self
                .weights
                .iter()
                .zip(&other.weights)
                .all(|(a, b)| (a - b).abs() <= tol)
    }

    /// Pushes the distribution forward along the inclusion of its set into `target`.
    pub fn embed(&self, target: &SymbolSet) -> Result<Distribution> {
        let mut weights = vec![0.0; target.len()];
        for (i, &w) in self.weights.iter().enumerate() {
            weights[target.index_of(self.set.name(i))?] += w;
        }
        Ok(Distribution {
            set: target.clone(),
            weights,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct DistributionRepr {
    symbols: SymbolSet,
    weights: Vec<f64>,
}

impl Serialize for Distribution {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DistributionRepr {
            symbols: self.set.clone(),
            weights: self.weights.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Distribution {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = DistributionRepr::deserialize(d)?;
        Distribution::new(r.symbols, r.weights).map_err(D::Error::custom)
    }
}

/// A sum-zero vector indexed by a [`SymbolSet`].
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    set: SymbolSet,
    components: Vec<f64>,
}

impl TangentVector {
    pub fn new(set: SymbolSet, components: Vec<f64>) -> Result<Self> {
        if components.len() != set.len() {
            return Err(Error::InvalidParameter(format!(
                "{} components for {} symbols",
                components.len(),
                set.len()
            )));
        }
        let total: f64 = components.iter().sum();
        let scale = components.iter().fold(1.0_f64, |m, c| m.max(c.abs()));
        if total.abs() > WEIGHT_TOL * scale {
            return Err(Error::InvalidParameter(format!(
                "tangent components sum to {total}, not 0"
            )));
        }
        Ok(TangentVector { set, components })
    }

    pub fn zero(set: &SymbolSet) -> Self {
        TangentVector {
            set: set.clone(),
            components: vec![0.0; set.len()],
        }
    }

    pub fn set(&self) -> &SymbolSet {
        &self.set
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn component(&self, symbol: &str) -> Result<f64> {
        Ok(self.components[self.set.index_of(symbol)?])
    }

    pub fn norm_inf(&self) -> f64 {
        self.components.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn dot(&self, other: &TangentVector) -> f64 {
        self.components.iter().zip(&other.components).map(|(a, b)| a * b).sum()
    }

    pub fn scaled(&self, k: f64) -> TangentVector {
        TangentVector {
            set: self.set.clone(),
            components: self.components.iter().map(|c| c * k).collect(),
        }
    }
}

/// `Σ v_σ ln(v_σ / w_σ)` with the convention `0 ln(0/q) = 0`.
pub fn kl_divergence(v: &Distribution, w: &Distribution) -> Result<f64> {
    v.set.check_same(&w.set, "kl_divergence")?;
    let mut total = 0.0;
    for (i, (&p, &q)) in v.weights.iter().zip(&w.weights).enumerate() {
        if p == 0.0 {
            continue;
        }
        if q == 0.0 {
            return Err(Error::Divergence {
                symbol: v.set.name(i).to_string(),
                weight: p,
            });
        }
        total += p * (p / q).ln();
    }
    Ok(total.max(0.0))
}

/// Straight-line contraction towards the barycenter: `(1-μ)v_σ + μ/|Σ|`.
pub fn smooth_mu(v: &Distribution, mu: f64) -> Result<Distribution> {
    check_mu(mu)?;
    let n = v.set.len() as f64;
    let weights = v.weights.iter().map(|&p| (1.0 - mu) * p + mu / n).collect();
    Ok(Distribution::from_raw(v.set.clone(), weights))
}

pub(crate) fn check_mu(mu: f64) -> Result<()> {
    if !(0.0..1.0).contains(&mu) {
        return Err(Error::InvalidParameter(format!(
            "smoothing parameter mu = {mu} outside [0, 1)"
        )));
    }
    Ok(())
}

/// The tangent direction `+1` at `zeta`, `-1` at `rho`.
pub fn basis_tangent(set: &SymbolSet, zeta: &str, rho: &str) -> Result<TangentVector> {
    let z = set.index_of(zeta)?;
    let r = set.index_of(rho)?;
    if z == r {
        return Err(Error::InvalidParameter(format!(
            "basis tangent needs two distinct symbols, got `{zeta}` twice"
        )));
    }
    let mut components = vec![0.0; set.len()];
    components[z] = 1.0;
    components[r] = -1.0;
    Ok(TangentVector {
        set: set.clone(),
        components,
    })
}

/// Orthogonal projection onto the sum-zero subspace.
pub fn project_to_affine_tangent(set: &SymbolSet, vector: &[f64]) -> Result<TangentVector> {
    if vector.len() != set.len() {
        return Err(Error::InvalidParameter(format!(
            "{} components for {} symbols",
            vector.len(),
            set.len()
        )));
    }
    Ok(TangentVector {
        set: set.clone(),
        components: project_sum_zero(vector),
    })
}

pub(crate) fn project_sum_zero(vector: &[f64]) -> Vec<f64> {
    let mean = vector.iter().sum::<f64>() / vector.len() as f64;
    vector.iter().map(|x| x - mean).collect()
}

/// Euclidean projection onto the simplex.
pub fn clip_to_simplex(set: &SymbolSet, point: &[f64]) -> Result<Distribution> {
    if point.len() != set.len() {
        return Err(Error::InvalidParameter(format!(
            "{} coordinates for {} symbols",
            point.len(),
            set.len()
        )));
    }
    if point.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("non-finite coordinate in simplex projection".into()));
    }
    Ok(Distribution::from_raw(set.clone(), project_simplex(point)))
}

/// Sort-and-threshold projection: find `θ` with `Σ max(x_i - θ, 0) = 1`.
pub(crate) fn project_simplex(point: &[f64]) -> Vec<f64> {
    if is_on_simplex(point) {
        return point.to_vec();
    }
    let mut sorted = point.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, &x) in sorted.iter().enumerate() {
        cumulative += x;
        let t = (cumulative - 1.0) / (k + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    let mut out: Vec<f64> = point.iter().map(|&x| (x - theta).max(0.0)).collect();
    let total: f64 = out.iter().sum();
    for x in out.iter_mut() {
        *x /= total;
    }
    out
}

fn is_on_simplex(point: &[f64]) -> bool {
    point.iter().all(|&x| x >= 0.0) && (point.iter().sum::<f64>() - 1.0).abs() <= WEIGHT_TOL
}
