use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use naive_tm::synthesis::{BeliefParams, Dataset, UncertainRegion};
use naive_tm::{DiscreteConfig, Distribution, TuringMachine};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn load_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = read(path)?;
    serde_json::from_str(&text).with_context(|| format!("in {}", path.display()))
}

pub fn load_machine(path: &Path) -> Result<TuringMachine> {
    load_json(path)
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    load_json(path)
}

pub fn load_belief(m: &TuringMachine, path: &Path) -> Result<naive_tm::ConfigBelief> {
    let text = read(path)?;
    naive_tm::ConfigBelief::from_json_str(m, &text).with_context(|| format!("in {}", path.display()))
}

#[derive(Deserialize)]
struct TapeFile {
    tape: BTreeMap<String, String>,
    #[serde(default)]
    state: Option<String>,
}

pub fn load_tape(m: &TuringMachine, path: &Path) -> Result<DiscreteConfig> {
    let f: TapeFile = load_json(path)?;
    let state = f.state.unwrap_or_else(|| m.states().name(m.start()).to_string());
    let mut cells = Vec::with_capacity(f.tape.len());
    for (pos, sym) in &f.tape {
        let u: i64 = pos
            .trim()
            .parse()
            .with_context(|| format!("tape position `{pos}` in {} is not an integer", path.display()))?;
        cells.push((u, sym.as_str()));
    }
    DiscreteConfig::from_symbols(m, cells, &state).with_context(|| format!("in {}", path.display()))
}

/// Head-relative JSON form of a discrete configuration.
#[derive(Serialize)]
pub struct TraceRow {
    pub step: usize,
    pub state: String,
    pub tape: BTreeMap<String, String>,
}

impl TraceRow {
    pub fn new(m: &TuringMachine, step: usize, c: &DiscreteConfig) -> Self {
        TraceRow {
            step,
            state: m.states().name(c.state).to_string(),
            tape: c
                .tape
                .iter()
                .map(|(u, &s)| (u.to_string(), m.alphabet().name(s).to_string()))
                .collect(),
        }
    }
}

/// Parses `--h0`: comma-separated binary weights, `uniform`, `random`, or a JSON file.
pub fn parse_h0(spec: &str, region: &UncertainRegion, seed: u64) -> Result<BeliefParams> {
    let spec = spec.trim();
    match spec {
        "uniform" => return Ok(BeliefParams::uniform(region)),
        "random" => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut h = BTreeMap::new();
            for (&u, set) in region.entries() {
                let w: Vec<f64> = (0..set.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
                let t: f64 = w.iter().sum();
                h.insert(u, Distribution::new(set.clone(), w.iter().map(|x| x / t).collect())?);
            }
            return Ok(BeliefParams::new(region, h)?);
        }
        _ => {}
    }
    let path = Path::new(spec);
    if path.exists() {
        let v: Value = load_json(path)?;
        return BeliefParams::from_json_value(region, v).with_context(|| format!("in {}", path.display()));
    }
    let weights = spec
        .split(',')
        .map(|w| w.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .with_context(|| format!("--h0 `{spec}` is neither a file, `uniform`, `random` nor a list of numbers"))?;
    Ok(BeliefParams::binary(region, &weights)?)
}

pub fn parse_grid(spec: &str) -> Result<Vec<usize>> {
    let grid = spec
        .split([',', 'x'])
        .map(|n| n.trim().parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .with_context(|| format!("--grid `{spec}` should look like `21,21`"))?;
    if grid.is_empty() {
        bail!("--grid is empty");
    }
    Ok(grid)
}

/// 17 significant digits, so values re-parse exactly.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        let _ = writeln!(s, "{}", row.join(","));
    }
    s
}

/// Collects output files and writes them with a manifest.
pub struct Outputs {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Outputs {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
        self.files.push(path.clone());
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, &text)
    }

    /// Writes `manifest.json`. It holds no timestamps, so equal runs give equal bytes.
    pub fn finish(mut self, manifest: Manifest) -> Result<()> {
        let outputs: Vec<String> = self.files.iter().map(|p| p.display().to_string()).collect();
        let value = serde_json::json!({
            "command": manifest.command,
            "inputs": manifest.inputs,
            "parameters": manifest.parameters,
            "seed": manifest.seed,
            "version": env!("CARGO_PKG_VERSION"),
            "outputs": outputs,
        });
        self.write_json("manifest.json", &value)?;
        Ok(())
    }
}

pub struct Manifest {
    pub command: &'static str,
    pub inputs: BTreeMap<&'static str, String>,
    pub parameters: Value,
    pub seed: Option<u64>,
}
