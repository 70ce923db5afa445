use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Result;
use naive_tm::fixtures;
use naive_tm::synthesis::{causality_report, descend, extract_code, flow_field, Problem};
use naive_tm::{naive_run, standard_run, support_window, ConfigBelief, Distribution};
use serde_json::json;

use crate::io::{self, csv, num, Manifest, Outputs, TraceRow};
use crate::{Command, FixtureName, HyperArgs, Mode};

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Simulate {
            machine,
            tape,
            steps,
            out,
        } => simulate(&machine, &tape, steps, &out.out),
        Command::Propagate {
            machine,
            belief,
            steps,
            mode,
            out,
        } => propagate(&machine, &belief, steps, mode, &out.out),
        Command::Descend {
            machine,
            dataset,
            h0,
            threshold,
            hyper,
            out,
        } => cmd_descend(&machine, &dataset, &h0, threshold, &hyper, &out.out),
        Command::Flowfield {
            machine,
            dataset,
            grid,
            hyper,
            out,
        } => flowfield(&machine, &dataset, &grid, &hyper, &out.out),
        Command::Causality {
            machine,
            dataset,
            h,
            hyper,
            out,
        } => causality(&machine, &dataset, h, &hyper, &out.out),
        Command::Fixture { name, out } => fixture(name, &out.out),
    }
}

fn inputs(pairs: &[(&'static str, &Path)]) -> BTreeMap<&'static str, String> {
    pairs.iter().map(|&(k, p)| (k, p.display().to_string())).collect()
}

fn hyper_json(h: &HyperArgs) -> serde_json::Value {
    json!({
        "lambda": h.lambda,
        "mu": h.mu,
        "eta": h.eta,
        "max_iters": h.max_iters,
        "eps": h.eps,
        "loss": h.kind(),
    })
}

fn simulate(machine: &Path, tape: &Path, steps: usize, out: &Path) -> Result<()> {
    let m = io::load_machine(machine)?;
    let mut c = io::load_tape(&m, tape)?;
    let mut trace = vec![TraceRow::new(&m, 0, &c)];
    say!("{:>5}  {}", 0, c.display(&m));
    for step in 1..=steps {
        if m.halt() == Some(c.state) {
            say!("halted after {} steps", step - 1);
            break;
        }
        c = m.det_step(&c);
        trace.push(TraceRow::new(&m, step, &c));
        say!("{step:>5}  {}", c.display(&m));
    }
    let mut o = Outputs::new(out)?;
    o.write_json("trace.json", &trace)?;
    o.finish(Manifest {
        command: "simulate",
        inputs: inputs(&[("machine", machine), ("tape", tape)]),
        parameters: json!({ "steps": steps }),
        seed: None,
    })
}

fn print_cells(b: &ConfigBelief) {
    let describe = |d: &Distribution| {
        d.weights()
            .iter()
            .enumerate()
            .filter(|&(_, &w)| w > 0.0)
            .map(|(i, w)| format!("{}={w:.6}", d.set().name(i)))
            .collect::<Vec<_>>()
            .join(" ")
    };
    for (u, _) in b.tape().cells() {
        say!("{u:>5}  {}", describe(&b.cell(u)));
    }
    say!("state  {}", describe(&b.state()));
}

fn propagate(machine: &Path, belief: &Path, steps: usize, mode: Mode, out: &Path) -> Result<()> {
    let m = io::load_machine(machine)?;
    let b = io::load_belief(&m, belief)?;
    let result = match mode {
        Mode::Naive => {
            let r = naive_run(&m, &b, steps)?;
            let (lo, hi) = support_window(&r);
            say!("support window [{lo}, {hi}]");
            r
        }
        Mode::Standard => {
            let r = standard_run(&m, &b, steps)?;
            say!("{} exact outcomes", r.outcomes().len());
            r.to_marginal_belief()
        }
    };
    print_cells(&result);
    let mut o = Outputs::new(out)?;
    o.write_json("belief.json", &result)?;
    o.finish(Manifest {
        command: "propagate",
        inputs: inputs(&[("machine", machine), ("belief", belief)]),
        parameters: json!({
            "steps": steps,
            "mode": match mode { Mode::Naive => "naive", Mode::Standard => "standard" },
        }),
        seed: None,
    })
}

fn problem(machine: &Path, dataset: &Path) -> Result<Problem> {
    let m = io::load_machine(machine)?;
    let data = io::load_dataset(dataset)?;
    Ok(Problem::new(&m, &data)?)
}

fn cmd_descend(machine: &Path, dataset: &Path, h0: &str, threshold: f64, hyper: &HyperArgs, out: &Path) -> Result<()> {
    let p = problem(machine, dataset)?;
    let start = io::parse_h0(h0, p.region(), hyper.seed)?;
    let t = descend(&p, &start, &hyper.params(), hyper.kind())?;
    let code = extract_code(&t.last().h, threshold)?;

    let mut header = vec!["iter".to_string(), "loss".to_string()];
    header.extend(start.coordinate_names());
    let rows = t.points.iter().map(|pt| {
        let mut row = vec![pt.iter.to_string(), num(pt.loss)];
        row.extend(pt.h.flat().into_iter().map(num));
        row
    });
    let last = t.last();
    say!(
        "stopped ({:?}) after {} iterations, loss {}",
        t.stop,
        last.iter,
        num(last.loss)
    );
    for (u, d) in last.h.iter() {
        let w: Vec<String> = d
            .set()
            .names()
            .iter()
            .zip(d.weights())
            .map(|(s, w)| format!("{s}={w:.6}"))
            .collect();
        say!("  h{u}: {}", w.join(" "));
    }
    say!("code:");
    for c in &code {
        say!(
            "  {:>4}  {}  {:.6}{}",
            c.position,
            c.symbol,
            c.weight,
            if c.confident { "" } else { "  (unsure)" }
        );
    }

    let mut o = Outputs::new(out)?;
    o.write("trajectory.csv", &csv(&header, rows))?;
    let code_json: Vec<_> = code
        .iter()
        .map(|c| json!({ "position": c.position, "symbol": c.symbol, "weight": c.weight, "confident": c.confident }))
        .collect();
    o.write_json(
        "result.json",
        &json!({
            "stop": format!("{:?}", t.stop),
            "iterations": last.iter,
            "loss": last.loss,
            "h": last.h,
            "code": code_json,
        }),
    )?;
    o.finish(Manifest {
        command: "descend",
        inputs: inputs(&[("machine", machine), ("dataset", dataset)]),
        parameters: json!({ "h0": h0, "threshold": threshold, "hyper": hyper_json(hyper) }),
        seed: Some(hyper.seed),
    })
}

fn flowfield(machine: &Path, dataset: &Path, grid: &str, hyper: &HyperArgs, out: &Path) -> Result<()> {
    let p = problem(machine, dataset)?;
    let grid = io::parse_grid(grid)?;
    let f = flow_field(&p, &hyper.params(), hyper.kind(), &grid)?;
    let mut header = f.coords.clone();
    header.extend(f.coords.iter().map(|c| format!("grad_{c}")));
    let rows = f
        .samples
        .iter()
        .map(|s| s.point.iter().chain(&s.neg_grad).map(|&x| num(x)).collect());
    let mut o = Outputs::new(out)?;
    let path = o.write("flowfield.csv", &csv(&header, rows))?;
    say!("{} samples written to {}", f.samples.len(), path.display());
    o.finish(Manifest {
        command: "flowfield",
        inputs: inputs(&[("machine", machine), ("dataset", dataset)]),
        parameters: json!({ "grid": grid, "hyper": hyper_json(hyper) }),
        seed: None,
    })
}

fn causality(machine: &Path, dataset: &Path, h: f64, hyper: &HyperArgs, out: &Path) -> Result<()> {
    let p = problem(machine, dataset)?;
    let r = causality_report(&p, h, &hyper.params())?;
    let header: Vec<String> = [
        "position",
        "naive_kl",
        "standard_kl",
        "regularizer",
        "naive_total",
        "standard_total",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    say!(
        "{:>8}  {:>14}  {:>14}  {:>14}",
        "position",
        "naive",
        "standard",
        "regularizer"
    );
    for row in &r.rows {
        say!(
            "{:>8}  {:>14.8}  {:>14.8}  {:>14.8}",
            row.position,
            row.naive_kl,
            row.standard_kl,
            row.regularizer
        );
    }
    say!("naive ranking:    {:?}", r.naive_ranking);
    say!("standard ranking: {:?}", r.standard_ranking);
    let rows = r.rows.iter().map(|row| {
        vec![
            row.position.to_string(),
            num(row.naive_kl),
            num(row.standard_kl),
            num(row.regularizer),
            num(row.naive_total()),
            num(row.standard_total()),
        ]
    });
    let mut o = Outputs::new(out)?;
    o.write("causality.csv", &csv(&header, rows))?;
    o.finish(Manifest {
        command: "causality",
        inputs: inputs(&[("machine", machine), ("dataset", dataset)]),
        parameters: json!({ "h": h, "hyper": hyper_json(hyper) }),
        seed: None,
    })
}

fn fixture(name: FixtureName, out: &Path) -> Result<()> {
    let mut o = Outputs::new(out)?;
    let all = matches!(name, FixtureName::All);
    let want = |n: FixtureName| all || std::mem::discriminant(&n) == std::mem::discriminant(&name);
    if want(FixtureName::ShiftMachine) {
        o.write_json("shift_machine.json", &fixtures::shift_machine())?;
    }
    if want(FixtureName::ShiftLockstep) {
        o.write_json("shift_lockstep.json", &fixtures::shift_machine_lockstep())?;
    }
    if want(FixtureName::ShiftAa) {
        o.write_json("shift_aa.json", &fixtures::shift_dataset("A", "A", false))?;
    }
    if want(FixtureName::ShiftAb) {
        o.write_json("shift_ab.json", &fixtures::shift_dataset("A", "B", false))?;
    }
    if want(FixtureName::ShiftAaHalt) {
        o.write_json("shift_aa_halt.json", &fixtures::shift_dataset("A", "A", true))?;
    }
    if want(FixtureName::ShiftBeliefAa) {
        let m = fixtures::shift_machine_lockstep();
        o.write_json("shift_belief_aa.json", &fixtures::shift_belief(&m, 0.3, 0.6, "A", "A")?)?;
    }
    if want(FixtureName::CausalityMachine) {
        o.write_json("causality_machine.json", &fixtures::causality_machine(&[1, 3]))?;
    }
    if want(FixtureName::CausalityDataset) {
        o.write_json("causality_dataset.json", &fixtures::causality_dataset(2))?;
    }
    o.finish(Manifest {
        command: "fixture",
        inputs: BTreeMap::new(),
        parameters: json!({}),
        seed: None,
    })
}
