//! Bundled machines and datasets.
//!
//! * [`shift_machine`]: the counter-driven string shifter, with its table made
//!   total by sending every unlisted pair to the halting self-loop.
//! * [`shift_machine_lockstep`]: the same computation arranged so every
//!   branch performs the same number of sweeps before halting.
//! * [`causality_machine`]: a flag machine reading each input a chosen number
//!   of times and writing whether any input was `1`.

use std::collections::BTreeMap;

use crate::belief::ConfigBelief;
use crate::error::Result;
use crate::machine::{DiscreteConfig, Move, Transition, TuringMachine};
use crate::simplex::{Distribution, SymbolSet};
use crate::synthesis::{Dataset, DatasetTuple, UncertainRegion};

pub const BLANK: &str = "□";

/// Sweeps performed by [`shift_machine_lockstep`]; counters up to this value are supported.
pub const LOCKSTEP_PASSES: usize = 9;

/// Steps after which every shift-dataset run has halted.
pub const SHIFT_STEPS: usize = 80;

pub fn shift_alphabet() -> SymbolSet {
    let mut names = vec![BLANK.to_string(), "A".into(), "B".into()];
    names.extend((0..10).map(|n| n.to_string()));
    SymbolSet::new(names).unwrap()
}

fn digit(n: usize) -> usize {
    3 + n
}

fn is_letter(s: usize) -> bool {
    s == 1 || s == 2
}

/// The shift machine. A counter `n` under the head and a string of `A`/`B`
/// to its right; each sweep decrements the counter, walks right to the
/// blank and walks back shifting the string one cell left, appending `A`.
pub fn shift_machine() -> TuringMachine {
    let sigma = shift_alphabet();
    let states = SymbolSet::new(["q_start", "q_halt", "goR", "goLA", "goLB"]).unwrap();
    let (start, halt, go_r, go_la, go_lb) = (0, 1, 2, 3, 4);
    let go_l = |letter: usize| if letter == 1 { go_la } else { go_lb };
    TuringMachine::from_fn(sigma, states, start, Some(halt), |s, q| {
        let t = |write, next, mv| Transition { write, next, mv };
        let stop = t(s, halt, Move::Stay);
        match q {
            _ if q == halt => stop,
            _ if q == start || q == go_r => {
                if is_letter(s) {
                    t(s, go_r, Move::Right)
                } else if q == start && s == digit(0) {
                    stop
                } else if q == start && s > digit(0) {
                    t(s - 1, go_r, Move::Right)
                } else if q == go_r && s == 0 {
                    t(0, go_la, Move::Left)
                } else {
                    stop
                }
            }
            _ => {
                let carried = if q == go_la { 1 } else { 2 };
                if is_letter(s) {
                    t(carried, go_l(s), Move::Left)
                } else if s > digit(0) {
                    t(s - 1, go_r, Move::Right)
                } else {
                    stop
                }
            }
        }
    })
    .unwrap()
}

/// Shift machine variant that always performs [`LOCKSTEP_PASSES`] sweeps.
/// Once the counter is zero the remaining sweeps walk the string without
/// changing it, so every initial counter halts at the same step.
pub fn shift_machine_lockstep() -> TuringMachine {
    let sigma = shift_alphabet();
    let kinds = ["goR", "skipR", "goLA", "goLB", "skipL"];
    let mut names = vec!["q_start".to_string(), "q_halt".to_string()];
    for p in 1..=LOCKSTEP_PASSES {
        names.extend(kinds.iter().map(|k| format!("{k}{p}")));
    }
    let states = SymbolSet::new(names).unwrap();
    let halt = 1;
    let state = |kind: usize, pass: usize| 2 + (pass - 1) * kinds.len() + kind;
    let (go_r, skip_r, go_la, go_lb, skip_l) = (0, 1, 2, 3, 4);

    // Reading counter symbol `s` at the start of sweep `pass`.
    let begin = |s: usize, pass: usize| -> Transition {
        if pass > LOCKSTEP_PASSES {
            Transition {
                write: s,
                next: halt,
                mv: Move::Stay,
            }
        } else if s > digit(0) {
            Transition {
                write: s - 1,
                next: state(go_r, pass),
                mv: Move::Right,
            }
        } else {
            Transition {
                write: s,
                next: state(skip_r, pass),
                mv: Move::Right,
            }
        }
    };

    TuringMachine::from_fn(sigma, states, 0, Some(halt), |s, q| {
        let stop = Transition {
            write: s,
            next: halt,
            mv: Move::Stay,
        };
        if q == halt {
            return stop;
        }
        let is_digit = s >= digit(0);
        if q == 0 {
            return if is_digit { begin(s, 1) } else { stop };
        }
        let pass = (q - 2) / kinds.len() + 1;
        let kind = (q - 2) % kinds.len();
        let t = |write, next, mv| Transition { write, next, mv };
        match kind {
            _ if kind == go_r || kind == skip_r => {
                if is_letter(s) {
                    t(s, q, Move::Right)
                } else if s == 0 {
                    let back = if kind == go_r { go_la } else { skip_l };
                    t(0, state(back, pass), Move::Left)
                } else {
                    stop
                }
            }
            _ if kind == skip_l => {
                if is_letter(s) {
                    t(s, q, Move::Left)
                } else if is_digit {
                    begin(s, pass + 1)
                } else {
                    stop
                }
            }
            _ => {
                let carried = if kind == go_la { 1 } else { 2 };
                if is_letter(s) {
                    let next = if s == 1 { go_la } else { go_lb };
                    t(carried, state(next, pass), Move::Left)
                } else if is_digit {
                    begin(s, pass + 1)
                } else {
                    stop
                }
            }
        }
    })
    .unwrap()
}

/// Counter `counter` under the head followed by `string`, in the start state.
pub fn shift_tape(m: &TuringMachine, counter: usize, string: &str) -> Result<DiscreteConfig> {
    let mut c = DiscreteConfig::new(m.start());
    c.set(0, m.alphabet().index_of(&counter.to_string())?);
    for (i, ch) in string.chars().enumerate() {
        c.set(i as i64 + 1, m.alphabet().index_of(&ch.to_string())?);
    }
    Ok(c)
}

/// Region `{0: {0, 2}, 1: {B, A}}`, so the second-symbol weights are the
/// counter weight `h` on `2` and the string weight `k` on `A`.
pub fn shift_region() -> UncertainRegion {
    UncertainRegion::from_names(&[(0, &["0", "2"]), (1, &["B", "A"])]).unwrap()
}

/// One tuple: `a2 a3` clamped after the uncertain cells, target `A` in cell 1.
pub fn shift_dataset(a2: &str, a3: &str, halt_target: bool) -> Dataset {
    Dataset {
        region: shift_region(),
        tuples: vec![DatasetTuple {
            clamped: BTreeMap::from([(2, a2.to_string()), (3, a3.to_string())]),
            targets: BTreeMap::from([(1, "A".to_string())]),
            steps: SHIFT_STEPS,
            state_target: halt_target.then(|| "q_halt".to_string()),
        }],
    }
}

/// `□ [(1-h)·0 + h·2] [(1-k)·B + k·A] a2 a3 □` in the start state.
pub fn shift_belief(m: &TuringMachine, h: f64, k: f64, a2: &str, a3: &str) -> Result<ConfigBelief> {
    let sigma = m.alphabet().clone();
    let mut b = ConfigBelief::initial(m);
    b.set_cell(0, &Distribution::from_pairs(sigma.clone(), [("0", 1.0 - h), ("2", h)])?)?;
    b.set_cell(1, &Distribution::from_pairs(sigma.clone(), [("B", 1.0 - k), ("A", k)])?)?;
    b.set_cell(2, &Distribution::dirac(&sigma, a2)?)?;
    b.set_cell(3, &Distribution::dirac(&sigma, a3)?)?;
    Ok(b)
}

/// Flag machine over `{□, 0, 1}`. Input `i` sits at position `i` and is
/// read `reads[i]` times (extra reads bounce off the cell to its left); the
/// machine then writes `1` at position `reads.len()` if any read saw a `1`,
/// `0` otherwise, and halts there.
pub fn causality_machine(reads: &[usize]) -> TuringMachine {
    assert!(!reads.is_empty() && reads.iter().all(|&r| r >= 1));
    let mut names = Vec::new();
    for (i, &r) in reads.iter().enumerate() {
        for k in 1..=r {
            for f in 0..2 {
                names.push(format!("read{i}_{k}_{f}"));
            }
            if k < r {
                for f in 0..2 {
                    names.push(format!("back{i}_{k}_{f}"));
                }
            }
        }
    }
    names.extend(["out_0".to_string(), "out_1".to_string(), "halt".to_string()]);
    let states = SymbolSet::new(names).unwrap();
    let sigma = SymbolSet::new([BLANK, "0", "1"]).unwrap();
    let idx = |n: String| states.index_of(&n).unwrap();
    let start = idx("read0_1_0".into());
    let halt = idx("halt".into());

    let mut table = vec![None; sigma.len() * states.len()];
    let mut set = |s: usize, q: usize, t: Transition| table[s * states.len() + q] = Some(t);
    for (i, &r) in reads.iter().enumerate() {
        for k in 1..=r {
            for f in 0..2 {
                let q = idx(format!("read{i}_{k}_{f}"));
                for s in 0..3 {
                    let g = if s == 2 { 1 } else { f };
                    let (next, mv) = if k < r {
                        (idx(format!("back{i}_{k}_{g}")), Move::Left)
                    } else if i + 1 < reads.len() {
                        (idx(format!("read{}_1_{g}", i + 1)), Move::Right)
                    } else {
                        (idx(format!("out_{g}")), Move::Right)
                    };
                    set(s, q, Transition { write: s, next, mv });
                }
                if k < r {
                    let q = idx(format!("back{i}_{k}_{f}"));
                    let next = idx(format!("read{i}_{}_{f}", k + 1));
                    for s in 0..3 {
                        set(
                            s,
                            q,
                            Transition {
                                write: s,
                                next,
                                mv: Move::Right,
                            },
                        );
                    }
                }
            }
        }
    }
    for f in 0..2 {
        let q = idx(format!("out_{f}"));
        for s in 0..3 {
            set(
                s,
                q,
                Transition {
                    write: 1 + f,
                    next: halt,
                    mv: Move::Stay,
                },
            );
        }
    }
    TuringMachine::from_fn(sigma, states.clone(), start, Some(halt), |s, q| {
        table[s * states.len() + q].unwrap_or(Transition {
            write: s,
            next: halt,
            mv: Move::Stay,
        })
    })
    .unwrap()
}

/// Binary uncertain inputs at `0..n`, target `1` under the final head.
pub fn causality_dataset(n: usize) -> Dataset {
    let entries: Vec<(i64, &[&str])> = (0..n as i64).map(|u| (u, &["0", "1"][..])).collect();
    Dataset {
        region: UncertainRegion::from_names(&entries).unwrap(),
        tuples: vec![DatasetTuple {
            clamped: BTreeMap::new(),
            targets: BTreeMap::from([(0, "1".to_string())]),
            steps: 4 * n + 8,
            state_target: None,
        }],
    }
}

/// Two inputs read once each.
pub fn or_machine() -> TuringMachine {
    causality_machine(&[1, 1])
}

pub fn or_dataset() -> Dataset {
    causality_dataset(2)
}
