use super::{BeliefParams, HyperParams, LossKind, Problem};
use crate::error::{Error, Result};
use crate::simplex::{project_simplex, project_sum_zero};

/// Step-size halvings tried before giving up on an iteration.
const MAX_HALVINGS: usize = 30;

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryPoint {
    pub iter: usize,
    pub h: BeliefParams,
    pub loss: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    /// The accepted step (or the projected gradient) fell below `eps`.
    Converged,
    MaxIters,
    /// No step size down to `η / 2^30` decreased the loss.
    NoDescent,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    pub stop: StopReason,
}

impl Trajectory {
    pub fn last(&self) -> &TrajectoryPoint {
        self.points.last().expect("trajectories record their starting point")
    }
}

/// Projected gradient descent with clipping and backtracking.
///
/// Each iteration tries `h - η·grad` clipped to the simplices, halving `η`
/// until the loss does not increase. Iterates are recorded from `iter = 0`.
pub fn descend(problem: &Problem, h0: &BeliefParams, hp: &HyperParams, kind: LossKind) -> Result<Trajectory> {
    hp.validate()?;
    problem.check_params(h0)?;
    let region = problem.region();
    let mut h = h0.raw();
    let mut loss = problem.objective_f64(&h, hp, kind)?;
    let mut points = vec![TrajectoryPoint {
        iter: 0,
        h: h0.clone(),
        loss,
    }];
    for iter in 1..=hp.max_iters {
        let grad: Vec<Vec<f64>> = problem
            .directional(&h, hp, kind, hp.lambda)?
            .iter()
            .map(|d| project_sum_zero(d))
            .collect();
        let gnorm = grad.iter().flatten().fold(0.0_f64, |m, g| m.max(g.abs()));
        if gnorm < hp.eps {
            return Ok(Trajectory {
                points,
                stop: StopReason::Converged,
            });
        }
        let mut eta = hp.eta;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let candidate: Vec<Vec<f64>> = h
                .iter()
                .zip(&grad)
                .map(|(cell, g)| {
                    let moved: Vec<f64> = cell.iter().zip(g).map(|(x, gx)| x - eta * gx).collect();
                    project_simplex(&moved)
                })
                .collect();
            let l = problem.objective_f64(&candidate, hp, kind)?;
            if l <= loss {
                accepted = Some((candidate, l));
                break;
            }
            eta *= 0.5;
        }
        let Some((next, next_loss)) = accepted else {
            return Ok(Trajectory {
                points,
                stop: StopReason::NoDescent,
            });
        };
        let step = h
            .iter()
            .flatten()
            .zip(next.iter().flatten())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        if step < hp.eps {
            return Ok(Trajectory {
                points,
                stop: StopReason::Converged,
            });
        }
        h = next;
        loss = next_loss;
        points.push(TrajectoryPoint {
            iter,
            h: BeliefParams::from_raw(region, h.clone()),
            loss,
        });
    }
    Ok(Trajectory {
        points,
        stop: StopReason::MaxIters,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowSample {
    /// Weight on the second allowed symbol of each cell.
    pub point: Vec<f64>,
    /// Negative projected gradient component on that symbol.
    pub neg_grad: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowField {
    /// Coordinate names `h<pos>_<symbol>`.
    pub coords: Vec<String>,
    pub samples: Vec<FlowSample>,
}

/// Distance kept between grid samples and the simplex faces.
pub const FLOW_MARGIN: f64 = 1e-3;

/// Samples `-grad` on a regular grid. Every uncertain cell must be binary and
/// there may be at most two of them; `grid[i]` is the sample count along
/// cell `i`. Samples are row-major with the first cell outermost.
pub fn flow_field(problem: &Problem, hp: &HyperParams, kind: LossKind, grid: &[usize]) -> Result<FlowField> {
    hp.validate()?;
    let region = problem.region();
    if region.is_empty() || region.len() > 2 || region.entries().values().any(|s| s.len() != 2) {
        return Err(Error::InvalidParameter(format!(
            "flow fields need one or two binary uncertain cells, the region has {} cells and {} free coordinates",
            region.len(),
            region.dimension()
        )));
    }
    if grid.len() != region.len() || grid.contains(&0) {
        return Err(Error::InvalidParameter(format!(
            "grid needs one positive count per uncertain cell, got {grid:?}"
        )));
    }
    let axis = |n: usize| -> Vec<f64> {
        if n == 1 {
            return vec![0.5];
        }
        let span = 1.0 - 2.0 * FLOW_MARGIN;
        (0..n).map(|i| FLOW_MARGIN + span * i as f64 / (n - 1) as f64).collect()
    };
    let axes: Vec<Vec<f64>> = grid.iter().map(|&n| axis(n)).collect();
    let coords = region
        .entries()
        .iter()
        .map(|(u, s)| format!("h{u}_{}", s.name(1)))
        .collect();

    let total: usize = grid.iter().product();
    let mut digits = vec![0; grid.len()];
    let mut samples = Vec::with_capacity(total);
    for _ in 0..total {
        let point: Vec<f64> = digits.iter().zip(&axes).map(|(&d, a)| a[d]).collect();
        let raw: Vec<Vec<f64>> = point.iter().map(|&w| vec![1.0 - w, w]).collect();
        let d = problem.directional(&raw, hp, kind, hp.lambda)?;
        let neg_grad = d.iter().map(|d| -project_sum_zero(d)[1]).collect();
        samples.push(FlowSample { point, neg_grad });
        crate::proof::advance(&mut digits, grid);
    }
    Ok(FlowField { coords, samples })
}
