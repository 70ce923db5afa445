use super::{BeliefParams, HyperParams, LossKind, Problem};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct CodeEntry {
    pub position: i64,
    pub symbol: String,
    pub weight: f64,
    pub confident: bool,
}

/// Reads the most likely symbol off every cell; ties go to the earlier symbol.
pub fn extract_code(h: &BeliefParams, threshold: f64) -> Result<Vec<CodeEntry>> {
    if !(threshold > 0.5 && threshold <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "confidence threshold {threshold} outside (0.5, 1]"
        )));
    }
    Ok(h.iter()
        .map(|(u, d)| {
            let i = d.argmax();
            let weight = d.weights()[i];
            CodeEntry {
                position: u,
                symbol: d.set().name(i).to_string(),
                weight,
                confident: weight >= threshold,
            }
        })
        .collect())
}

/// Derivatives along `h_u`, the weight on the second allowed symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct CausalityRow {
    pub position: i64,
    pub naive_kl: f64,
    pub standard_kl: f64,
    /// `λ ∂R/∂h_u`, shared by both observers.
    pub regularizer: f64,
}

impl CausalityRow {
    pub fn naive_total(&self) -> f64 {
        self.naive_kl + self.regularizer
    }

    pub fn standard_total(&self) -> f64 {
        self.standard_kl + self.regularizer
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CausalityReport {
    pub h: f64,
    pub rows: Vec<CausalityRow>,
    /// Positions ordered by decreasing magnitude of the naive divergence derivative.
    pub naive_ranking: Vec<i64>,
    pub standard_ranking: Vec<i64>,
}

fn ranking(rows: &[CausalityRow], key: impl Fn(&CausalityRow) -> f64) -> Vec<i64> {
    let mut idx: Vec<usize> = (0..rows.len()).collect();
    idx.sort_by(|&a, &b| key(&rows[b]).abs().total_cmp(&key(&rows[a]).abs()));
    idx.into_iter().map(|i| rows[i].position).collect()
}

/// Naive and standard loss derivatives at the point where every cell puts
/// weight `h_uniform` on its second symbol. All supports must be binary.
pub fn causality_report(problem: &Problem, h_uniform: f64, hp: &HyperParams) -> Result<CausalityReport> {
    hp.validate()?;
    if !(0.0..=1.0).contains(&h_uniform) {
        return Err(Error::InvalidParameter(format!("h = {h_uniform} outside [0, 1]")));
    }
    let region = problem.region();
    let params = BeliefParams::binary(region, &vec![h_uniform; region.len()])?;
    let raw = params.raw();
    let naive = problem.directional(&raw, hp, LossKind::Naive, 0.0)?;
    let standard = problem.directional(&raw, hp, LossKind::Standard, 0.0)?;
    // d/dh [h²(1-h)² + (1-h)²h²] = 2·2h(1-h)(1-2h)
    let reg = hp.lambda * 4.0 * h_uniform * (1.0 - h_uniform) * (1.0 - 2.0 * h_uniform);
    let rows: Vec<CausalityRow> = region
        .entries()
        .keys()
        .zip(naive.iter().zip(&standard))
        .map(|(&position, (n, s))| CausalityRow {
            position,
            naive_kl: n[1],
            standard_kl: s[1],
            regularizer: reg,
        })
        .collect();
    Ok(CausalityReport {
        h: h_uniform,
        naive_ranking: ranking(&rows, |r| r.naive_kl),
        standard_ranking: ranking(&rows, |r| r.standard_kl),
        rows,
    })
}
