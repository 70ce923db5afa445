//! The naive step on string configurations.
//!
//! A configuration is a pair of strings plus a state: `left` ends with the
//! symbol under the head, `right` holds the rest of the tape stored reversed,
//! so its last symbol is the one adjacent to the head. With
//! `α = Σ a_i S_i σ_i`, `β = Σ b_j T_j τ_j`, `γ = Σ c_k q_k` and
//! `(σ̂, q̂, d̂) = δ(σ_i, q_k)` the naive step is
//!
//! ```text
//! α' = M^L Σ a_i S_i + M^R Σ a_i a_i' b_j c_k S_i σ̂^k_i' τ_j
//! β' = M^R Σ b_j T_j + M^L Σ b_j b_j' a_i c_k T_j τ_j' σ̂^k_i
//! γ' = Σ a_i c_k q̂^k_i
//! ```
//!
//! [`patch`] reads such a configuration back as a cell-wise belief.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::belief::ConfigBelief;
use crate::error::{Error, Result};
use crate::machine::{Move, TuringMachine};
use crate::simplex::{Distribution, SymbolSet, WEIGHT_TOL};

/// A distribution over strings of length at most `bound`, stored sparsely.
#[derive(Clone, Debug, PartialEq)]
pub struct StringDistribution {
    alphabet: SymbolSet,
    bound: usize,
    weights: BTreeMap<Vec<usize>, f64>,
}

impl StringDistribution {
    pub fn new(alphabet: SymbolSet, bound: usize, weights: BTreeMap<Vec<usize>, f64>) -> Result<Self> {
        let mut total = 0.0;
        for (s, &w) in &weights {
            if s.len() > bound {
                return Err(Error::InvalidDistribution(format!(
                    "string of length {} exceeds the bound {bound}",
                    s.len()
                )));
            }
            if s.iter().any(|&c| c >= alphabet.len()) {
                return Err(Error::InvalidDistribution("string symbol outside the alphabet".into()));
            }
            if !(w.is_finite() && w >= -WEIGHT_TOL) {
                return Err(Error::InvalidDistribution(format!("invalid string weight {w}")));
            }
            total += w;
        }
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidDistribution(format!(
                "string weights sum to {total}, not 1"
            )));
        }
        let weights = weights.into_iter().filter(|&(_, w)| w > 0.0).collect();
        Ok(StringDistribution {
            alphabet,
            bound,
            weights,
        })
    }

    /// A single string with probability one.
    pub fn dirac(alphabet: &SymbolSet, s: &[usize]) -> Self {
        StringDistribution {
            alphabet: alphabet.clone(),
            bound: s.len(),
            weights: BTreeMap::from([(s.to_vec(), 1.0)]),
        }
    }

    pub fn alphabet(&self) -> &SymbolSet {
        &self.alphabet
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn weights(&self) -> &BTreeMap<Vec<usize>, f64> {
        &self.weights
    }

    pub fn weight(&self, s: &[usize]) -> f64 {
        self.weights.get(s).copied().unwrap_or(0.0)
    }

    /// Splits `text` into alphabet symbols, longest match first.
    pub fn tokenize(alphabet: &SymbolSet, text: &str) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        let mut rest = text;
        while !rest.is_empty() {
            let best = alphabet
                .names()
                .iter()
                .enumerate()
                .filter(|(_, n)| !n.is_empty() && rest.starts_with(n.as_str()))
                .max_by_key(|(_, n)| n.len());
            match best {
                Some((i, n)) => {
                    out.push(i);
                    rest = &rest[n.len()..];
                }
                None => {
                    return Err(Error::UnknownSymbol {
                        symbol: rest.chars().next().map(String::from).unwrap_or_default(),
                        expected: alphabet.names().join(", "),
                    })
                }
            }
        }
        Ok(out)
    }

    pub fn render(&self, s: &[usize]) -> String {
        s.iter().map(|&c| self.alphabet.name(c)).collect()
    }

    pub fn from_repr(alphabet: &SymbolSet, repr: StringRepr) -> Result<Self> {
        let mut weights = BTreeMap::new();
        for (text, w) in repr.weights {
            *weights.entry(Self::tokenize(alphabet, &text)?).or_insert(0.0) += w;
        }
        StringDistribution::new(alphabet.clone(), repr.bound, weights)
    }

    pub fn to_repr(&self) -> StringRepr {
        StringRepr {
            bound: self.bound,
            weights: self.weights.iter().map(|(s, &w)| (self.render(s), w)).collect(),
        }
    }

    /// Mass on the empty string moved to the one-blank string.
    fn canonical(&self) -> Vec<(Vec<usize>, f64)> {
        let mut out: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (s, &w) in &self.weights {
            let key = if s.is_empty() { vec![0] } else { s.clone() };
            *out.entry(key).or_insert(0.0) += w;
        }
        out.into_iter().collect()
    }
}

/// JSON form `{"bound": L, "weights": {"AB": 0.5, ...}}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StringRepr {
    pub bound: usize,
    pub weights: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrConfigBelief {
    pub left: StringDistribution,
    pub right: StringDistribution,
    pub state: Distribution,
}

/// One naive step on string configurations. Machines with stay moves are rejected.
pub fn naive_strstep(m: &TuringMachine, c: &StrConfigBelief) -> Result<StrConfigBelief> {
    if m.uses_stay() {
        return Err(Error::Unsupported(
            "the string-configuration step is defined for left/right machines only".into(),
        ));
    }
    m.alphabet().check_same(c.left.alphabet(), "left string alphabet")?;
    m.alphabet().check_same(c.right.alphabet(), "right string alphabet")?;
    m.states().check_same(c.state.set(), "state distribution")?;

    let alpha = c.left.canonical();
    let beta = c.right.canonical();
    let gamma = c.state.weights();
    let ns = m.alphabet().len();

    let mut m_left = 0.0;
    let mut m_right = 0.0;
    let mut written = vec![0.0; ns];
    let mut next = vec![0.0; m.states().len()];
    for (s, a) in &alpha {
        let head = *s.last().expect("canonical strings are nonempty");
        for (k, &g) in gamma.iter().enumerate() {
            let p = a * g;
            if p == 0.0 {
                continue;
            }
            let t = m.transition(head, k);
            match t.mv {
                Move::Left => m_left += p,
                Move::Right => m_right += p,
                Move::Stay => unreachable!(),
            }
            written[t.write] += p;
            next[t.next] += p;
        }
    }

    let mut new_left: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let mut new_right: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let add = |map: &mut BTreeMap<Vec<usize>, f64>, s: Vec<usize>, w: f64| {
        if w != 0.0 {
            *map.entry(s).or_insert(0.0) += w;
        }
    };

    // Left move: the left string loses its head symbol, the right string
    // gains the written symbol next to the head.
    for (s, a) in &alpha {
        add(&mut new_left, s[..s.len() - 1].to_vec(), m_left * a);
    }
    for (t, b) in &beta {
        for (t2, b2) in &beta {
            for (sym, &w) in written.iter().enumerate() {
                let mut out = t[..t.len() - 1].to_vec();
                out.push(*t2.last().unwrap());
                out.push(sym);
                add(&mut new_right, out, m_left * b * b2 * w);
            }
        }
    }
    // Right move: the left string gains the written symbol and the symbol
    // stepped onto; the right string loses that symbol.
    for (t, b) in &beta {
        add(&mut new_right, t[..t.len() - 1].to_vec(), m_right * b);
    }
    for (s, a) in &alpha {
        for (sym, &w) in written.iter().enumerate() {
            for (t, b) in &beta {
                let mut out = s[..s.len() - 1].to_vec();
                out.push(sym);
                out.push(*t.last().unwrap());
                add(&mut new_left, out, m_right * a * w * b);
            }
        }
    }

    let bound = |d: &StringDistribution| d.bound.max(1) + 1;
    Ok(StrConfigBelief {
        left: normalized(m.alphabet(), bound(&c.left), new_left),
        right: normalized(m.alphabet(), bound(&c.right), new_right),
        state: Distribution::from_raw(m.states().clone(), normalize_vec(next)),
    })
}

fn normalize_vec(mut v: Vec<f64>) -> Vec<f64> {
    crate::scalar::renormalize(&mut v);
    v
}

fn normalized(alphabet: &SymbolSet, bound: usize, mut w: BTreeMap<Vec<usize>, f64>) -> StringDistribution {
    let total: f64 = w.values().sum();
    if total != 1.0 {
        for x in w.values_mut() {
            *x /= total;
        }
    }
    StringDistribution {
        alphabet: alphabet.clone(),
        bound,
        weights: w,
    }
}

/// Distribution of the symbol at head-relative `u ≤ 0` under the left string.
pub fn marginal_left(alpha: &StringDistribution, u: i64) -> Result<Distribution> {
    if u > 0 {
        return Err(Error::InvalidParameter(format!("left marginal needs u <= 0, got {u}")));
    }
    let mut out = vec![0.0; alpha.alphabet.len()];
    for (s, &w) in &alpha.weights {
        let idx = s.len() as i64 - 1 + u;
        out[if idx >= 0 { s[idx as usize] } else { 0 }] += w;
    }
    Ok(Distribution::from_raw(alpha.alphabet.clone(), out))
}

/// Distribution of the symbol at head-relative `u ≥ 1` under the reversed right string.
pub fn marginal_right(beta: &StringDistribution, u: i64) -> Result<Distribution> {
    if u < 1 {
        return Err(Error::InvalidParameter(format!("right marginal needs u >= 1, got {u}")));
    }
    let mut out = vec![0.0; beta.alphabet.len()];
    for (s, &w) in &beta.weights {
        let idx = s.len() as i64 - u;
        out[if idx >= 0 { s[idx as usize] } else { 0 }] += w;
    }
    Ok(Distribution::from_raw(beta.alphabet.clone(), out))
}

/// Cell-wise marginals of a string configuration.
pub fn patch(c: &StrConfigBelief) -> Result<ConfigBelief> {
    c.left.alphabet().check_same(c.right.alphabet(), "patch")?;
    let mut b = ConfigBelief::from_raw_state(
        c.left.alphabet().clone(),
        c.state.set().clone(),
        c.state.weights().to_vec(),
    );
    let max_left = c.left.weights.keys().map(Vec::len).max().unwrap_or(0) as i64;
    let max_right = c.right.weights.keys().map(Vec::len).max().unwrap_or(0) as i64;
    for u in (1 - max_left)..=0 {
        b.tape_mut().set_raw(u, marginal_left(&c.left, u)?.weights().to_vec());
    }
    for u in 1..=max_right {
        b.tape_mut().set_raw(u, marginal_right(&c.right, u)?.weights().to_vec());
    }
    Ok(b)
}
