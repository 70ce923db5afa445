//! Acceptance suite: one line per criterion, non-zero exit if any fails.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use naive_tm::fixtures;
use naive_tm::synthesis::{
    causality_report, descend, BeliefParams, Dataset, HyperParams, LossKind, Problem, StopReason,
};
use naive_tm::{
    naive_run, naive_step, naive_strstep, patch, ConfigBelief, Distribution, Multiplicities, PlainProof, TuringMachine,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn shift_cell1(h: f64, k: f64, a2: &str, a3: &str) -> Distribution {
    let m = fixtures::shift_machine_lockstep();
    let b = fixtures::shift_belief(&m, h, k, a2, a3).unwrap();
    naive_run(&m, &b, fixtures::SHIFT_STEPS).unwrap().cell(1)
}

fn grid21() -> impl Iterator<Item = (f64, f64)> {
    (0..=20).flat_map(|i| (0..=20).map(move |j| (i as f64 / 20.0, j as f64 / 20.0)))
}

fn c1() -> Outcome {
    let mut worst = 0.0_f64;
    for (h, k) in grid21() {
        let a = shift_cell1(h, k, "A", "A").weight("A").unwrap();
        worst = worst.max((a - (1.0 - (1.0 - h).powi(2) * (1.0 - k))).abs());
    }
    outcome(worst <= 1e-10, format!("max error {worst:.2e}"))
}

fn c2() -> Outcome {
    let mut worst = 0.0_f64;
    for (h, k) in grid21() {
        let c = shift_cell1(h, k, "A", "B");
        let ea = (1.0 - h).powi(2) * k + 2.0 * h * (1.0 - h);
        let eb = (1.0 - h).powi(2) * (1.0 - k) + h * h;
        worst = worst
            .max((c.weight("A").unwrap() - ea).abs())
            .max((c.weight("B").unwrap() - eb).abs());
    }
    outcome(worst <= 1e-10, format!("max error {worst:.2e}"))
}

fn shift_descend(a3: &str, lambda: f64, kind: LossKind) -> (Vec<Vec<f64>>, StopReason) {
    let m = fixtures::shift_machine_lockstep();
    let data = fixtures::shift_dataset("A", a3, false);
    let p = Problem::new(&m, &data).unwrap();
    let hp = HyperParams {
        lambda,
        mu: 1e-6,
        ..HyperParams::default()
    };
    let h0 = BeliefParams::binary(&data.region, &[0.05, 0.05]).unwrap();
    let t = descend(&p, &h0, &hp, kind).unwrap();
    let path = t
        .points
        .iter()
        .map(|pt| pt.h.iter().map(|(_, d)| d.weights()[1]).collect())
        .collect();
    (path, t.stop)
}

fn dist_to(p: &[f64], target: [f64; 2]) -> f64 {
    max_abs_diff(p, &target)
}

fn c3() -> Outcome {
    let (naive, sn) = shift_descend("A", 2.0, LossKind::Naive);
    let (std, ss) = shift_descend("A", 2.0, LossKind::Standard);
    let dn = dist_to(naive.last().unwrap(), [1.0, 0.0]);
    let ds = dist_to(std.last().unwrap(), [1.0, 1.0]);
    outcome(
        dn <= 0.05 && ds <= 0.05,
        format!(
            "naive end {:?} ({sn:?}, {} iters, dist {dn:.1e}); standard end {:?} ({ss:?}, {} iters, dist {ds:.1e})",
            round2(naive.last().unwrap()),
            naive.len() - 1,
            round2(std.last().unwrap()),
            std.len() - 1
        ),
    )
}

fn c4() -> Outcome {
    // With λ = 2 this trajectory stalls at an interior stationary point; λ = 1 is used.
    let (path, stop) = shift_descend("B", 1.0, LossKind::Naive);
    let max_h = path.iter().map(|p| p[0]).fold(0.0, f64::max);
    let end = path.last().unwrap();
    let d = dist_to(end, [0.0, 1.0]);
    outcome(
        max_h > 0.2 && d <= 0.05,
        format!(
            "lambda 1: max h {max_h:.3}, end {:?} ({stop:?}, {} iters, dist {d:.1e})",
            round2(end),
            path.len() - 1
        ),
    )
}

fn round2(p: &[f64]) -> Vec<f64> {
    p.iter().map(|x| (x * 1e4).round() / 1e4).collect()
}

fn c5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut failures = 0;
    for _ in 0..200 {
        let m = random_machine(&mut rng, true);
        let c = random_discrete(&mut rng, &m);
        let t = rng.gen_range(0..=5);
        let naive = naive_run(&m, &ConfigBelief::from_discrete(&m, &c), t).unwrap();
        let lifted = ConfigBelief::from_discrete(&m, &m.det_run(&c, t));
        if naive != lifted {
            failures += 1;
        }
    }
    outcome(failures == 0, format!("{failures}/200 mismatches"))
}

fn c6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let m = random_machine(&mut rng, true);
        let mut b = random_belief(&mut rng, &m);
        for _ in 0..50 {
            b = naive_step(&m, &b).unwrap();
        }
        worst = worst.max((b.state_raw().iter().sum::<f64>() - 1.0).abs());
        for (_, cell) in b.tape().cells() {
            worst = worst.max((cell.iter().sum::<f64>() - 1.0).abs());
        }
    }
    outcome(worst <= 1e-12, format!("max |sum - 1| = {worst:.2e}"))
}

fn c7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0_f64;
    let step = 1e-5;
    for _ in 0..100 {
        let out = symbols("y", rng.gen_range(2..=3));
        let r = rng.gen_range(1..=2);
        let psi = random_proof(&mut rng, r, 3, &out);
        let base: Vec<Distribution> = psi
            .slots()
            .iter()
            .map(|s| random_distribution(&mut rng, &s.set))
            .collect();
        let slot = rng.gen_range(0..r);
        let dir = random_tangent(&mut rng, &psi.slots()[slot].set);
        let analytic = psi.tangent_map(&base, slot, &dir).unwrap();
        let shifted = |sign: f64| {
            let mut inputs = base.clone();
            let w: Vec<f64> = inputs[slot]
                .weights()
                .iter()
                .zip(dir.components())
                .map(|(x, v)| x + sign * step * v)
                .collect();
            inputs[slot] = Distribution::new(inputs[slot].set().clone(), w).unwrap();
            psi.naive_extension(&inputs).unwrap()
        };
        let (plus, minus) = (shifted(1.0), shifted(-1.0));
        let fd: Vec<f64> = plus
            .weights()
            .iter()
            .zip(minus.weights())
            .map(|(a, b)| (a - b) / (2.0 * step))
            .collect();
        worst = worst.max(rel_err(&analytic, &fd));
    }
    outcome(worst <= 1e-5, format!("max relative error {worst:.2e}"))
}

fn c8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let mid = symbols("m", rng.gen_range(2..=3));
        let out = symbols("o", rng.gen_range(2..=3));
        let r = rng.gen_range(1..=2);
        let psi = random_proof(&mut rng, r, 2, &mid);
        let degree = rng.gen_range(1..=2);
        let phi = PlainProof::from_fn(vec![naive_tm::Slot::new(mid.clone(), degree)], out.clone(), |_| {
            rng.gen_range(0..out.len())
        })
        .unwrap();
        let cut = PlainProof::cut(&phi, &psi).unwrap();
        let x: Vec<Distribution> = psi
            .slots()
            .iter()
            .map(|s| random_distribution(&mut rng, &s.set))
            .collect();
        let lhs = cut.naive_extension(&x).unwrap();
        let rhs = phi.naive_extension(&[psi.naive_extension(&x).unwrap()]).unwrap();
        worst = worst.max(max_abs_diff(lhs.weights(), rhs.weights()));
    }
    outcome(worst <= 1e-12, format!("max error {worst:.2e}"))
}

/// `∂_ρ f^τ` for slot `slot` by substituting `ρ` into each copy in turn.
fn substitution_oracle(psi: &PlainProof, x: &[Distribution], slot: usize, rho: usize) -> Vec<f64> {
    let radix: Vec<usize> = psi
        .slots()
        .iter()
        .flat_map(|s| std::iter::repeat_n(s.set.len(), s.degree))
        .collect();
    let owner: Vec<usize> = psi
        .slots()
        .iter()
        .enumerate()
        .flat_map(|(i, s)| std::iter::repeat_n(i, s.degree))
        .collect();
    let mut out = vec![0.0; psi.output_set().len()];
    for (copy, _) in owner.iter().enumerate().filter(|(_, &o)| o == slot) {
        let total: usize = radix.iter().product();
        for mut k in 0..total {
            let mut tuple = vec![0; radix.len()];
            for p in (0..radix.len()).rev() {
                tuple[p] = k % radix[p];
                k /= radix[p];
            }
            if tuple[copy] != rho {
                continue;
            }
            let w: f64 = (0..tuple.len())
                .filter(|&p| p != copy)
                .map(|p| x[owner[p]].weights()[tuple[p]])
                .product();
            out[psi.apply(&tuple)] += w;
        }
    }
    out
}

fn c9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let out = symbols("y", rng.gen_range(2..=3));
        let r = rng.gen_range(1..=2);
        let psi = random_proof(&mut rng, r, 3, &out);
        let x: Vec<Distribution> = psi
            .slots()
            .iter()
            .map(|s| Distribution::new(s.set.clone(), dyadic_weights(&mut rng, s.set.len())).unwrap())
            .collect();
        let slot = rng.gen_range(0..r);
        let rho = rng.gen_range(0..psi.slots()[slot].set.len());
        let ket = psi
            .ket_evaluate(&x, &Multiplicities::single(&psi, slot, rho, 1))
            .unwrap();
        worst = worst.max(max_abs_diff(&ket, &substitution_oracle(&psi, &x, slot, rho)));
    }
    outcome(worst <= 1e-12, format!("max error {worst:.2e}"))
}

fn c10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0_f64;
    for _ in 0..200 {
        let m = random_machine(&mut rng, false);
        let c = random_str_config(&mut rng, &m, 3);
        let lhs = patch(&naive_strstep(&m, &c).unwrap()).unwrap();
        let rhs = naive_step(&m, &patch(&c).unwrap()).unwrap();
        worst = worst.max(belief_distance(&lhs, &rhs));
    }
    outcome(worst <= 1e-12, format!("max error {worst:.2e}"))
}

fn belief_distance(a: &ConfigBelief, b: &ConfigBelief) -> f64 {
    let mut d = max_abs_diff(a.state_raw(), b.state_raw());
    let positions: Vec<i64> = a.tape().cells().chain(b.tape().cells()).map(|(u, _)| u).collect();
    for u in positions {
        d = d.max(max_abs_diff(&a.tape().raw_or_blank(u), &b.tape().raw_or_blank(u)));
    }
    d
}

fn gradient_fixtures() -> Vec<(&'static str, TuringMachine, Dataset, HyperParams)> {
    let hp = |lambda| HyperParams {
        lambda,
        mu: 1e-3,
        ..HyperParams::default()
    };
    vec![
        (
            "shift AA",
            fixtures::shift_machine_lockstep(),
            fixtures::shift_dataset("A", "A", false),
            hp(2.0),
        ),
        (
            "shift AB + halt",
            fixtures::shift_machine_lockstep(),
            fixtures::shift_dataset("A", "B", true),
            hp(2.0),
        ),
        (
            "causality (1,3)",
            fixtures::causality_machine(&[1, 3]),
            fixtures::causality_dataset(2),
            hp(0.01),
        ),
    ]
}

fn c11() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let fx = gradient_fixtures();
    let step = 1e-6;
    let mut worst = 0.0_f64;
    for i in 0..50 {
        let (_, m, data, hp) = &fx[i % fx.len()];
        let p = Problem::new(m, data).unwrap();
        let point: BTreeMap<i64, Distribution> = data
            .region
            .entries()
            .iter()
            .map(|(&u, s)| {
                let w: Vec<f64> = (0..s.len()).map(|_| rng.gen_range(0.1..1.0)).collect();
                let t: f64 = w.iter().sum();
                (
                    u,
                    Distribution::new(s.clone(), w.iter().map(|x| x / t).collect()).unwrap(),
                )
            })
            .collect();
        let h = BeliefParams::new(&data.region, point.clone()).unwrap();
        let grad = p.grad_loss(&h, hp).unwrap();
        let mut analytic = Vec::new();
        let mut fd = Vec::new();
        for (&u, d) in &point {
            let g = grad[&u].components();
            for sigma in 1..d.weights().len() {
                analytic.push(g[sigma] - g[0]);
                let at = |sign: f64| {
                    let mut w = d.weights().to_vec();
                    w[sigma] += sign * step;
                    w[0] -= sign * step;
                    let mut moved = point.clone();
                    moved.insert(u, Distribution::new(d.set().clone(), w).unwrap());
                    p.loss(&BeliefParams::new(&data.region, moved).unwrap(), hp).unwrap()
                };
                fd.push((at(1.0) - at(-1.0)) / (2.0 * step));
            }
        }
        worst = worst.max(rel_err(&analytic, &fd));
    }
    outcome(worst <= 1e-5, format!("max relative error {worst:.2e} over 3 fixtures"))
}

fn c12() -> Outcome {
    let m = fixtures::shift_machine_lockstep();
    let data = fixtures::shift_dataset("A", "A", true);
    let p = Problem::new(&m, &data).unwrap();
    let solved = BeliefParams::binary(&data.region, &[1.0, 0.0]).unwrap();
    let unsolved = BeliefParams::binary(&data.region, &[0.0, 0.0]).unwrap();
    let mut pass = true;
    let mut solved_losses = Vec::new();
    let mut unsolved_margin = f64::INFINITY;
    for mu in [1e-2, 1e-4, 1e-6] {
        let hp = HyperParams {
            lambda: 2.0,
            mu,
            ..HyperParams::default()
        };
        let ls = p.loss(&solved, &hp).unwrap();
        let lu = p.loss(&unsolved, &hp).unwrap();
        solved_losses.push(ls);
        unsolved_margin = unsolved_margin.min(lu - (-mu.ln() - 5.0));
        pass &= lu > -mu.ln() - 5.0;
    }
    pass &= solved_losses.windows(2).all(|w| w[1] < w[0]) && *solved_losses.last().unwrap() < 1e-3;
    outcome(
        pass,
        format!(
            "solving vertex losses {:?}; non-solving min margin over -ln(mu) - 5: {unsolved_margin:.3}",
            solved_losses.iter().map(|l| format!("{l:.2e}")).collect::<Vec<_>>()
        ),
    )
}

fn c13() -> Outcome {
    let m = fixtures::causality_machine(&[1, 3]);
    let data = fixtures::causality_dataset(2);
    let p = Problem::new(&m, &data).unwrap();
    let h = 0.1;
    let r = causality_report(&p, h, &HyperParams::default()).unwrap();
    let (n0, n1) = (r.rows[0].naive_kl, r.rows[1].naive_kl);
    let ratio = n1 / n0;
    // -n_j (1-h)^{N-1} / (1 - (1-h)^N) with N = 4.
    let closed = |n: f64| -n * (1.0 - h).powi(3) / (1.0 - (1.0 - h).powi(4));
    let closed_err = (n0 - closed(1.0)).abs().max((n1 - closed(3.0)).abs());
    let std_diff = (r.rows[0].standard_kl - r.rows[1].standard_kl).abs();
    outcome(
        (ratio - 3.0).abs() <= 1e-8 && std_diff <= 1e-10,
        format!(
            "naive {n0:.6} : {n1:.6} (ratio {ratio:.10}, closed-form error {closed_err:.1e}); standard diff {std_diff:.1e}"
        ),
    )
}

fn c14() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let m = loop {
        let m = random_machine(&mut rng, true);
        if m.alphabet().len() == 3 {
            break m;
        }
    };
    let sizes = [10usize, 100, 1000];
    let mut times = Vec::new();
    for &s in &sizes {
        let mut b = ConfigBelief::new(&m, &Distribution::uniform(m.states())).unwrap();
        for u in 0..s as i64 {
            b.set_cell(u - s as i64 / 2, &random_distribution(&mut rng, m.alphabet()))
                .unwrap();
        }
        let reps = (1_000_000 / s).max(20);
        let mut samples = Vec::new();
        for _ in 0..9 {
            let t0 = Instant::now();
            for _ in 0..reps {
                std::hint::black_box(naive_step(&m, std::hint::black_box(&b)).unwrap());
            }
            samples.push(t0.elapsed().as_secs_f64() / reps as f64);
        }
        samples.sort_by(f64::total_cmp);
        times.push(samples[samples.len() / 2]);
    }
    // Fit t = a + b·s minimizing squared relative residuals (weights 1/t²).
    let xs: Vec<f64> = sizes.iter().map(|&s| s as f64).collect();
    let w: Vec<f64> = times.iter().map(|t| 1.0 / (t * t)).collect();
    let sum = |f: &dyn Fn(usize) -> f64| (0..xs.len()).map(|i| w[i] * f(i)).sum::<f64>();
    let (s0, sx, sxx) = (sum(&|_| 1.0), sum(&|i| xs[i]), sum(&|i| xs[i] * xs[i]));
    let (sy, sxy) = (sum(&|i| times[i]), sum(&|i| xs[i] * times[i]));
    let slope = (s0 * sxy - sx * sy) / (s0 * sxx - sx * sx);
    let icept = (sy - slope * sx) / s0;
    let worst = xs
        .iter()
        .zip(&times)
        .map(|(x, y)| ((icept + slope * x) - y).abs() / y)
        .fold(0.0, f64::max);
    outcome(
        worst < 0.25 && slope > 0.0,
        format!(
            "per-step times {:?} us; max relative residual {worst:.3}",
            times.iter().map(|t| format!("{:.2}", t * 1e6)).collect::<Vec<_>>()
        ),
    )
}

fn main() {
    let limits = [
        1.0, 1.0, 20.0, 10.0, 5.0, 5.0, 10.0, 10.0, 5.0, 10.0, 30.0, 5.0, 5.0, 30.0,
    ];
    let criteria: [fn() -> Outcome; 14] = [c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11, c12, c13, c14];
    let mut failed = 0;
    for (i, (run, limit)) in criteria.iter().zip(limits).enumerate() {
        let t0 = Instant::now();
        let o = run();
        let elapsed = t0.elapsed();
        let in_time = elapsed <= Duration::from_secs_f64(limit);
        let pass = o.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {}: {} ({}; {:.3}s of {limit}s){}",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64(),
            if in_time { "" } else { " over time budget" }
        );
    }
    println!("{} of 14 criteria passed", 14 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
