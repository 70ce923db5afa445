use std::collections::BTreeMap;

use super::{BeliefParams, CompiledTuple, HyperParams, LossKind, Problem};
use crate::belief::{naive_run, ConfigBelief};
use crate::error::{Error, Result};
use crate::scalar::{Dual, Scalar};
use crate::simplex::{project_sum_zero, TangentVector};
use crate::standard::standard_run;

/// `R(h) = Σ_u Σ_σ h_{u,σ}² (1 - h_{u,σ})²`.
pub fn regularizer(h: &BeliefParams) -> f64 {
    regularizer_raw(&h.raw())
}

fn regularizer_raw<S: Scalar>(h: &[Vec<S>]) -> S {
    let mut r = S::zero();
    for cell in h {
        for &x in cell {
            let y = S::one() - x;
            r += x * x * y * y;
        }
    }
    r
}

/// `-ln((1-μ) x + μ/n)`, the divergence of a vertex from a smoothed weight `x`.
fn vertex_divergence<S: Scalar>(x: S, mu: f64, n: usize) -> Result<S> {
    let smoothed = x.scale(1.0 - mu) + S::constant(mu / n as f64);
    if smoothed.value().is_nan() || smoothed.value() <= 0.0 {
        return Err(Error::Divergence {
            symbol: "target".into(),
            weight: 1.0,
        });
    }
    Ok(-smoothed.ln())
}

impl Problem {
    fn initial_belief<S: Scalar>(&self, t: &CompiledTuple, h: &[Vec<S>]) -> ConfigBelief<S> {
        let m = &self.machine;
        let ns = m.alphabet().len();
        let mut state = vec![S::zero(); m.states().len()];
        state[m.start()] = S::one();
        let mut b = ConfigBelief::from_raw_state(m.alphabet().clone(), m.states().clone(), state);
        for &(u, s) in &t.clamped {
            let mut cell = vec![S::zero(); ns];
            cell[s] = S::one();
            b.tape_mut().set_raw(u, cell);
        }
        for ((u, support), weights) in self.supports.iter().zip(h) {
            let mut cell = vec![S::zero(); ns];
            for (&s, &w) in support.iter().zip(weights) {
                cell[s] += w;
            }
            b.tape_mut().set_raw(*u, cell);
        }
        b
    }

    /// Sum of the divergence terms over all tuples, without the regularizer.
    fn divergence<S: Scalar>(&self, h: &[Vec<S>], mu: f64, kind: LossKind) -> Result<S> {
        let ns = self.machine.alphabet().len();
        let nq = self.machine.states().len();
        let mut total = S::zero();
        for t in &self.tuples {
            let b = self.initial_belief(t, h);
            let (cells, state): (Vec<Vec<S>>, Vec<S>) = match kind {
                LossKind::Naive => {
                    let out = naive_run(&self.machine, &b, t.steps)?;
                    (
                        t.targets.iter().map(|&(v, _)| out.tape().raw_or_blank(v)).collect(),
                        out.state_raw().to_vec(),
                    )
                }
                LossKind::Standard => {
                    let out = standard_run(&self.machine, &b, t.steps)?;
                    (
                        t.targets.iter().map(|&(v, _)| out.marginal_raw(v)).collect(),
                        out.state_marginal_raw(),
                    )
                }
            };
            for (cell, &(_, target)) in cells.iter().zip(&t.targets) {
                total += vertex_divergence(cell[target], mu, ns)?;
            }
            if let Some(q) = t.state_target {
                total += vertex_divergence(state[q], mu, nq)?;
            }
        }
        Ok(total)
    }

    fn objective_raw<S: Scalar>(&self, h: &[Vec<S>], hp: &HyperParams, kind: LossKind) -> Result<S> {
        let kl = self.divergence(h, hp.mu, kind)?;
        Ok(kl + regularizer_raw(h).scale(hp.lambda))
    }

    /// The naive loss `Σ KL(b || ε_μ Π_V Δstep^t) + λR`.
    pub fn loss(&self, h: &BeliefParams, hp: &HyperParams) -> Result<f64> {
        self.objective(h, hp, LossKind::Naive)
    }

    /// The same loss with exact (enumerated) output marginals.
    pub fn standard_loss(&self, h: &BeliefParams, hp: &HyperParams) -> Result<f64> {
        self.objective(h, hp, LossKind::Standard)
    }

    pub fn objective(&self, h: &BeliefParams, hp: &HyperParams, kind: LossKind) -> Result<f64> {
        hp.validate()?;
        self.check_params(h)?;
        finite(self.objective_raw(&h.raw(), hp, kind)?)
    }

    /// Divergence part and `λR` part separately.
    pub fn loss_parts(&self, h: &BeliefParams, hp: &HyperParams, kind: LossKind) -> Result<(f64, f64)> {
        hp.validate()?;
        self.check_params(h)?;
        let raw = h.raw();
        Ok((
            finite(self.divergence(&raw, hp.mu, kind)?)?,
            hp.lambda * regularizer_raw(&raw),
        ))
    }

    /// The `μ → 0` limit of the loss; fails when a target has zero weight.
    pub fn limit_loss(&self, h: &BeliefParams, lambda: f64, kind: LossKind) -> Result<f64> {
        self.check_params(h)?;
        let raw = h.raw();
        finite(self.divergence(&raw, 0.0, kind)? + lambda * regularizer_raw(&raw))
    }

    /// Directional derivatives of the objective along `e_σ - e_ref` for every
    /// non-reference symbol of every cell; the reference (first) symbol gets 0.
    pub(crate) fn directional(
        &self,
        h: &[Vec<f64>],
        hp: &HyperParams,
        kind: LossKind,
        lambda: f64,
    ) -> Result<Vec<Vec<f64>>> {
        let hp = HyperParams { lambda, ..*hp };
        let mut out = Vec::with_capacity(h.len());
        for (i, cell) in h.iter().enumerate() {
            let mut d = vec![0.0; cell.len()];
            for (j, dj) in d.iter_mut().enumerate().skip(1) {
                let seeded: Vec<Vec<Dual>> = h
                    .iter()
                    .enumerate()
                    .map(|(k, c)| {
                        c.iter()
                            .enumerate()
                            .map(|(l, &x)| {
                                let eps = if k != i {
                                    0.0
                                } else if l == j {
                                    1.0
                                } else if l == 0 {
                                    -1.0
                                } else {
                                    0.0
                                };
                                Dual::new(x, eps)
                            })
                            .collect()
                    })
                    .collect();
                let v = self.objective_raw(&seeded, &hp, kind)?;
                *dj = finite(v.eps)?;
            }
            out.push(d);
        }
        Ok(out)
    }

    /// Projection of the Euclidean gradient onto each cell's tangent space.
    pub fn gradient(&self, h: &BeliefParams, hp: &HyperParams, kind: LossKind) -> Result<BTreeMap<i64, TangentVector>> {
        hp.validate()?;
        self.check_params(h)?;
        let d = self.directional(&h.raw(), hp, kind, hp.lambda)?;
        Ok(h.iter()
            .zip(d)
            .map(|((u, dist), d)| {
                let tv = TangentVector::new(dist.set().clone(), project_sum_zero(&d))
                    .expect("projected vectors sum to zero");
                (u, tv)
            })
            .collect())
    }

    pub fn grad_loss(&self, h: &BeliefParams, hp: &HyperParams) -> Result<BTreeMap<i64, TangentVector>> {
        self.gradient(h, hp, LossKind::Naive)
    }

    pub fn standard_grad(&self, h: &BeliefParams, hp: &HyperParams) -> Result<BTreeMap<i64, TangentVector>> {
        self.gradient(h, hp, LossKind::Standard)
    }

    /// Objective on raw weights; used by descent and flow sampling.
    pub(crate) fn objective_f64(&self, h: &[Vec<f64>], hp: &HyperParams, kind: LossKind) -> Result<f64> {
        finite(self.objective_raw(h, hp, kind)?)
    }
}

fn finite(x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Numerical(format!("loss or gradient evaluated to {x}")))
    }
}
