//! Combinatorial plain proofs and their polynomial semantics.
//!
//! A plain proof with input slots `(P_1, n_1), …, (P_r, n_r)` copies input
//! `i` exactly `n_i` times and then applies a lookup table (its linear part)
//! to the resulting tuple of `N = Σ n_i` symbols. Its naive probabilistic
//! extension samples every copy independently:
//!
//! ```text
//! Δψ(x)_τ = Σ_γ [π(γ) = τ] · Π_{i,j} x^i_{γ_i(j)}
//! ```
//!
//! where `γ` ranges over all tuples in lexicographic order. Polynomials are
//! never built symbolically; every quantity here is a direct enumeration of
//! that sum, guarded by [`ENUMERATION_LIMIT`].

use std::collections::BTreeMap;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::simplex::{Distribution, SymbolSet, TangentVector};

/// Largest number of enumeration terms any single evaluation may visit.
pub const ENUMERATION_LIMIT: u128 = 10_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct Slot {
    pub set: SymbolSet,
    pub degree: usize,
}

impl Slot {
    pub fn new(set: SymbolSet, degree: usize) -> Self {
        Slot { set, degree }
    }
}

/// A plain proof given by its input slots, output set and total linear part.
///
/// The linear part is stored densely: entry `k` is the output index for the
/// `k`-th tuple in lexicographic order, where the flattened tuple lists the
/// `n_1` copies of slot 1 first, then slot 2, and so on.
#[derive(Clone, Debug, PartialEq)]
pub struct PlainProof {
    slots: Vec<Slot>,
    output: SymbolSet,
    /// Alphabet size of each flattened position.
    radix: Vec<usize>,
    /// Slot owning each flattened position.
    owner: Vec<usize>,
    table: Vec<usize>,
}

fn table_size(slots: &[Slot]) -> Result<u128> {
    let mut size: u128 = 1;
    for s in slots {
        for _ in 0..s.degree {
            size = size.saturating_mul(s.set.len() as u128);
        }
    }
    if size > ENUMERATION_LIMIT {
        return Err(Error::Capacity {
            required: size,
            cap: ENUMERATION_LIMIT,
        });
    }
    Ok(size)
}

impl PlainProof {
    pub fn new(slots: Vec<Slot>, output: SymbolSet, table: Vec<usize>) -> Result<Self> {
        let size = table_size(&slots)? as usize;
        if table.len() != size {
            return Err(Error::InvalidProof(format!(
                "linear part has {} entries, the input domain has {size}",
                table.len()
            )));
        }
        if let Some(&bad) = table.iter().find(|&&t| t >= output.len()) {
            return Err(Error::InvalidProof(format!(
                "linear part maps to output index {bad}, output set has {} elements",
                output.len()
            )));
        }
        let mut radix = Vec::new();
        let mut owner = Vec::new();
        for (i, s) in slots.iter().enumerate() {
            for _ in 0..s.degree {
                radix.push(s.set.len());
                owner.push(i);
            }
        }
        Ok(PlainProof {
            slots,
            output,
            radix,
            owner,
            table,
        })
    }

    /// Builds the table by evaluating `f` on every flattened tuple of indices.
    pub fn from_fn<F>(slots: Vec<Slot>, output: SymbolSet, mut f: F) -> Result<Self>
    where
        F: FnMut(&[usize]) -> usize,
    {
        let size = table_size(&slots)? as usize;
        let radix: Vec<usize> = slots
            .iter()
            .flat_map(|s| std::iter::repeat_n(s.set.len(), s.degree))
            .collect();
        let mut table = Vec::with_capacity(size);
        let mut tuple = vec![0; radix.len()];
        for _ in 0..size {
            table.push(f(&tuple));
            advance(&mut tuple, &radix);
        }
        PlainProof::new(slots, output, table)
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn output_set(&self) -> &SymbolSet {
        &self.output
    }

    pub fn total_degree(&self) -> usize {
        self.radix.len()
    }

    /// The linear part on a flattened tuple of indices.
    pub fn apply(&self, tuple: &[usize]) -> usize {
        self.table[self.flat_index(tuple)]
    }

    /// The proof as a discrete function: input `i` is copied `n_i` times.
    pub fn evaluate_discrete(&self, inputs: &[usize]) -> usize {
        let tuple: Vec<usize> = self.owner.iter().map(|&i| inputs[i]).collect();
        self.apply(&tuple)
    }

    fn flat_index(&self, tuple: &[usize]) -> usize {
        tuple.iter().zip(&self.radix).fold(0, |acc, (&d, &r)| acc * r + d)
    }

    fn check_inputs(&self, inputs: &[Distribution]) -> Result<()> {
        if inputs.len() != self.slots.len() {
            return Err(Error::SetMismatch(format!(
                "{} inputs for {} slots",
                inputs.len(),
                self.slots.len()
            )));
        }
        for (i, (x, s)) in inputs.iter().zip(&self.slots).enumerate() {
            s.set.check_same(x.set(), &format!("input slot {i}"))?;
        }
        Ok(())
    }

    /// The naive probabilistic extension.
    pub fn naive_extension(&self, inputs: &[Distribution]) -> Result<Distribution> {
        self.check_inputs(inputs)?;
        let raw: Vec<&[f64]> = inputs.iter().map(|d| d.weights()).collect();
        let mut out = self.naive_extension_raw(&raw);
        crate::scalar::renormalize(&mut out);
        Distribution::new(self.output.clone(), out)
    }

    /// Unnormalized enumeration of the output polynomials at arbitrary inputs.
    pub fn naive_extension_raw<S: Scalar>(&self, inputs: &[&[S]]) -> Vec<S> {
        let mut out = vec![S::zero(); self.output.len()];
        let mut tuple = vec![0; self.radix.len()];
        for &tau in &self.table {
            let mut w = S::one();
            for (pos, &sym) in tuple.iter().enumerate() {
                w = w * inputs[self.owner[pos]][sym];
            }
            out[tau] += w;
            advance(&mut tuple, &self.radix);
        }
        out
    }

    /// Evaluates `∂^m f^τ` at `base` for every `τ`.
    ///
    /// Each derivative token is assigned to a distinct copy of its slot whose
    /// symbol must equal the token; the remaining copies are summed against
    /// `base`. Ordered injective assignments reproduce the falling-factorial
    /// coefficients of repeated differentiation.
    pub fn ket_evaluate(&self, base: &[Distribution], m: &Multiplicities) -> Result<Vec<f64>> {
        self.check_inputs(base)?;
        m.check(self)?;
        let mut out = vec![0.0; self.output.len()];

        // Tokens per slot, and the flattened position range of each slot.
        let mut tokens: Vec<Vec<usize>> = Vec::with_capacity(self.slots.len());
        let mut offsets = Vec::with_capacity(self.slots.len());
        let mut offset = 0;
        for (i, s) in self.slots.iter().enumerate() {
            let t: Vec<usize> = m.per_slot[i]
                .iter()
                .flat_map(|(&rho, &k)| std::iter::repeat_n(rho, k))
                .collect();
            if t.len() > s.degree {
                return Ok(out);
            }
            tokens.push(t);
            offsets.push(offset);
            offset += s.degree;
        }

        let per_slot: Vec<Vec<Vec<usize>>> = self
            .slots
            .iter()
            .zip(&tokens)
            .map(|(s, t)| injective_sequences(t.len(), s.degree))
            .collect();

        let mut choice = vec![0usize; self.slots.len()];
        let n = self.radix.len();
        loop {
            // Fixed symbols implied by this combination of assignments.
            let mut fixed: Vec<Option<usize>> = vec![None; n];
            for (i, seqs) in per_slot.iter().enumerate() {
                for (tok, &p) in tokens[i].iter().zip(&seqs[choice[i]]) {
                    fixed[offsets[i] + p] = Some(*tok);
                }
            }
            self.accumulate_with_fixed(base, &fixed, &mut out);

            // Odometer over the per-slot assignment lists.
            let mut k = self.slots.len();
            loop {
                if k == 0 {
                    return Ok(out);
                }
                k -= 1;
                choice[k] += 1;
                if choice[k] < per_slot[k].len() {
                    break;
                }
                choice[k] = 0;
            }
        }
    }

    fn accumulate_with_fixed(&self, base: &[Distribution], fixed: &[Option<usize>], out: &mut [f64]) {
        let free: Vec<usize> = (0..fixed.len()).filter(|&p| fixed[p].is_none()).collect();
        let free_radix: Vec<usize> = free.iter().map(|&p| self.radix[p]).collect();
        let count: usize = free_radix.iter().product();
        let mut tuple: Vec<usize> = fixed.iter().map(|f| f.unwrap_or(0)).collect();
        let mut digits = vec![0; free.len()];
        for _ in 0..count {
            let mut w = 1.0;
            for (k, &p) in free.iter().enumerate() {
                tuple[p] = digits[k];
                w *= base[self.owner[p]].weights()[digits[k]];
            }
            out[self.apply(&tuple)] += w;
            advance(&mut digits, &free_radix);
        }
    }

    /// Tangent map of the naive extension at `base` in direction `dir` on one slot.
    pub fn tangent_map(&self, base: &[Distribution], slot: usize, dir: &TangentVector) -> Result<Vec<f64>> {
        let s = self
            .slots
            .get(slot)
            .ok_or_else(|| Error::InvalidParameter(format!("no input slot {slot}")))?;
        s.set.check_same(dir.set(), "tangent direction")?;
        let mut out = vec![0.0; self.output.len()];
        for (rho, &c) in dir.components().iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let m = Multiplicities::single(self, slot, rho, 1);
            let ket = self.ket_evaluate(base, &m)?;
            for (o, k) in out.iter_mut().zip(ket) {
                *o += c * k;
            }
        }
        Ok(out)
    }

    /// Pushforward of a joint distribution over `P_1 × … × P_r` along the
    /// proof viewed as a discrete function.
    pub fn standard_extension(&self, joint: &Distribution) -> Result<Distribution> {
        let sets: Vec<SymbolSet> = self.slots.iter().map(|s| s.set.clone()).collect();
        let product = SymbolSet::product(&sets)?;
        product.check_same(joint.set(), "joint distribution")?;
        let radix: Vec<usize> = sets.iter().map(SymbolSet::len).collect();
        let mut out = vec![0.0; self.output.len()];
        let mut inputs = vec![0; radix.len()];
        for &w in joint.weights() {
            if w != 0.0 {
                out[self.evaluate_discrete(&inputs)] += w;
            }
            advance(&mut inputs, &radix);
        }
        Distribution::new(self.output.clone(), out)
    }

    /// The cut of `phi` against `psi`: `psi`'s output feeds `phi`'s single slot.
    ///
    /// If `phi` copies its input `m` times the result copies slot `i` of
    /// `psi` `m·n_i` times; the copies are grouped into `m` blocks, `psi` is
    /// applied to each block and `phi` to the `m` results.
    pub fn cut(phi: &PlainProof, psi: &PlainProof) -> Result<PlainProof> {
        if phi.slots.len() != 1 {
            return Err(Error::InvalidProof(format!(
                "cut needs a single-slot outer proof, got {} slots",
                phi.slots.len()
            )));
        }
        phi.slots[0].set.check_same(&psi.output, "cut")?;
        let m = phi.slots[0].degree;
        let slots: Vec<Slot> = psi
            .slots
            .iter()
            .map(|s| Slot::new(s.set.clone(), m * s.degree))
            .collect();
        let degrees: Vec<usize> = psi.slots.iter().map(|s| s.degree).collect();
        let mut inner = vec![0; psi.total_degree()];
        let mut outer = vec![0; m];
        PlainProof::from_fn(slots, phi.output.clone(), |tuple| {
            let mut base = 0;
            let mut slot_bases = Vec::with_capacity(degrees.len());
            for &d in &degrees {
                slot_bases.push(base);
                base += m * d;
            }
            for (block, o) in outer.iter_mut().enumerate() {
                let mut k = 0;
                for (i, &d) in degrees.iter().enumerate() {
                    let start = slot_bases[i] + block * d;
                    inner[k..k + d].copy_from_slice(&tuple[start..start + d]);
                    k += d;
                }
                *o = psi.apply(&inner);
            }
            phi.apply(&outer)
        })
    }
}

/// Derivative multiplicities `m^i_ρ` for each input slot.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Multiplicities {
    per_slot: Vec<BTreeMap<usize, usize>>,
}

impl Multiplicities {
    /// All multiplicities zero.
    pub fn zero(psi: &PlainProof) -> Self {
        Multiplicities {
            per_slot: vec![BTreeMap::new(); psi.slots.len()],
        }
    }

    pub fn single(psi: &PlainProof, slot: usize, symbol: usize, count: usize) -> Self {
        let mut m = Self::zero(psi);
        m.per_slot[slot].insert(symbol, count);
        m
    }

    /// Adds `count` to the multiplicity of `symbol` in `slot`.
    pub fn with(mut self, psi: &PlainProof, slot: usize, symbol: &str, count: usize) -> Result<Self> {
        let s = psi
            .slots
            .get(slot)
            .ok_or_else(|| Error::InvalidParameter(format!("no input slot {slot}")))?;
        let idx = s.set.index_of(symbol)?;
        *self.per_slot[slot].entry(idx).or_insert(0) += count;
        Ok(self)
    }

    pub fn total(&self, slot: usize) -> usize {
        self.per_slot[slot].values().sum()
    }

    fn check(&self, psi: &PlainProof) -> Result<()> {
        if self.per_slot.len() != psi.slots.len() {
            return Err(Error::SetMismatch(format!(
                "multiplicities for {} slots, proof has {}",
                self.per_slot.len(),
                psi.slots.len()
            )));
        }
        for (m, s) in self.per_slot.iter().zip(&psi.slots) {
            if m.keys().any(|&k| k >= s.set.len()) {
                return Err(Error::SetMismatch("multiplicity keyed outside its slot set".into()));
            }
        }
        Ok(())
    }
}

/// A tuple of plain proofs sharing input slot sets; each component is
/// sampled independently given the inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentwiseProof {
    components: Vec<PlainProof>,
}

impl ComponentwiseProof {
    pub fn new(components: Vec<PlainProof>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidProof("no components".into()))?;
        for c in &components[1..] {
            if c.slots.len() != first.slots.len() || c.slots.iter().zip(&first.slots).any(|(a, b)| a.set != b.set) {
                return Err(Error::InvalidProof("components must share input slot sets".into()));
            }
        }
        Ok(ComponentwiseProof { components })
    }

    pub fn components(&self) -> &[PlainProof] {
        &self.components
    }

    pub fn naive_extension(&self, inputs: &[Distribution]) -> Result<Vec<Distribution>> {
        self.components.iter().map(|c| c.naive_extension(inputs)).collect()
    }
}

/// Mixed-radix increment, last digit fastest.
pub(crate) fn advance(digits: &mut [usize], radix: &[usize]) {
    for k in (0..digits.len()).rev() {
        digits[k] += 1;
        if digits[k] < radix[k] {
            return;
        }
        digits[k] = 0;
    }
}

/// All ordered sequences of `k` distinct positions drawn from `0..n`.
fn injective_sequences(k: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    let mut used = vec![false; n];
    fn rec(k: usize, used: &mut [bool], current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for p in 0..used.len() {
            if !used[p] {
                used[p] = true;
                current.push(p);
                rec(k, used, current, out);
                current.pop();
                used[p] = false;
            }
        }
    }
    rec(k, &mut used, &mut current, &mut out);
    out
}

#[derive(Serialize, Deserialize)]
struct SlotRepr {
    set: SymbolSet,
    degree: usize,
}

#[derive(Serialize, Deserialize)]
struct ProofRepr {
    slots: Vec<SlotRepr>,
    output_set: SymbolSet,
    table: BTreeMap<String, String>,
}

impl PlainProof {
    fn tuple_key(&self, tuple: &[usize]) -> String {
        tuple
            .iter()
            .enumerate()
            .map(|(p, &d)| self.slots[self.owner[p]].set.name(d))
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl Serialize for PlainProof {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut table = BTreeMap::new();
        let mut tuple = vec![0; self.radix.len()];
        for &tau in &self.table {
            table.insert(self.tuple_key(&tuple), self.output.name(tau).to_string());
            advance(&mut tuple, &self.radix);
        }
        ProofRepr {
            slots: self
                .slots
                .iter()
                .map(|sl| SlotRepr {
                    set: sl.set.clone(),
                    degree: sl.degree,
                })
                .collect(),
            output_set: self.output.clone(),
            table,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PlainProof {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ProofRepr::deserialize(d)?;
        let slots: Vec<Slot> = r.slots.into_iter().map(|s| Slot::new(s.set, s.degree)).collect();
        for s in &slots {
            if let Some(bad) = s.set.names().iter().find(|n| n.contains(',')) {
                return Err(D::Error::custom(format!(
                    "slot symbol `{bad}` contains a comma and cannot be used in table keys"
                )));
            }
        }
        let output = r.output_set;
        let mut missing = None;
        let mut failure = None;
        let proof = PlainProof::from_fn(slots.clone(), output.clone(), |tuple| {
            let key = tuple
                .iter()
                .enumerate()
                .map(|(p, &dgt)| {
                    let slot = owner_of(&slots, p);
                    slots[slot].set.name(dgt).to_string()
                })
                .collect::<Vec<_>>()
                .join(",");
            match r.table.get(&key) {
                Some(tau) => match output.index_of(tau) {
                    Ok(i) => i,
                    Err(e) => {
                        failure.get_or_insert(e.to_string());
                        0
                    }
                },
                None => {
                    missing.get_or_insert(key);
                    0
                }
            }
        })
        .map_err(D::Error::custom)?;
        if let Some(k) = missing {
            return Err(D::Error::custom(format!("linear part is missing tuple `{k}`")));
        }
        if let Some(e) = failure {
            return Err(D::Error::custom(e));
        }
        if r.table.len() != proof.table.len() {
            return Err(D::Error::custom("linear part has keys outside the input domain"));
        }
        Ok(proof)
    }
}

fn owner_of(slots: &[Slot], position: usize) -> usize {
    let mut p = position;
    for (i, s) in slots.iter().enumerate() {
        if p < s.degree {
            return i;
        }
        p -= s.degree;
    }
    unreachable!("position beyond total degree")
}
