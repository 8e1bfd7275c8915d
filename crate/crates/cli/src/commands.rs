use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use spintomo::circuits::{
    build_equivalent_circuit, build_initial_state_circuit, exact_tomogram, tomogram_from_shots, tomogram_xi_tei,
};
use spintomo::experiments::{hz, preset, run_experiment_i, run_experiment_n, ExperimentRun, PRESET_LABELS};
use spintomo::indicators::{default_reduced_subset, indicator_report, Bipartition, IndicatorReport, PccMode};
use spintomo::report::{fmt_num, timeseries_csv};
use spintomo::squeezing::{
    default_entropic_threshold, entropic_squeezing_check, squeezing_from_tomogram, EntropicReport, SqueezingOptions,
    SqueezingReport,
};
use spintomo::tomography::{read_tomogram_with_tol, write_tomogram, Axes, Tomogram};
use spintomo::{Error, Result};

use crate::config::{Plan, RunConfig};

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    seed: u64,
    config: &'a RunConfig,
    outputs: Vec<String>,
}

struct Outputs {
    dir: PathBuf,
    written: Vec<String>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Outputs> {
        fs::create_dir_all(dir)?;
        Ok(Outputs { dir: dir.to_path_buf(), written: Vec::new() })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        fs::write(self.dir.join(name), contents)?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, &text)
    }

    fn write_tomogram(&mut self, name: &str, tomogram: &Tomogram) -> Result<()> {
        write_tomogram(tomogram, &self.dir.join(name))?;
        self.written.push(name.to_string());
        Ok(())
    }

    /// Echoes the resolved configuration and the manifest; called last.
    fn finish(mut self, command: &str, config: &RunConfig) -> Result<()> {
        self.write_json("config.json", config)?;
        let mut outputs = self.written.clone();
        outputs.push("manifest.json".into());
        let manifest = Manifest { tool: "spintomo", version: spintomo::VERSION, command, seed: config.seed, config, outputs };
        self.write_json("manifest.json", &manifest)
    }
}

#[derive(Serialize)]
struct Snapshot {
    requested: f64,
    t: f64,
    file: String,
}

pub fn experiment(config: &RunConfig) -> Result<()> {
    let plan = config.experiment_plan()?;
    let run = match &plan {
        Plan::I(c) => run_experiment_i(c)?,
        Plan::N(c) => run_experiment_n(c)?,
    };
    let mut out = Outputs::new(&config.out)?;
    out.write("timeseries.csv", &timeseries_csv(&run))?;
    out.write_json("records.json", &run)?;
    let snapshots = write_snapshots(&mut out, &run, &config.snapshots)?;
    if !snapshots.is_empty() {
        out.write_json("snapshots.json", &snapshots)?;
    }
    println!(
        "experiment {}: {} time points, {} qubits, bipartition {}, discord measured on {:?}",
        run.experiment,
        run.records.len(),
        run.n_qubits,
        run.bipartition,
        run.measured
    );
    out.finish("experiment", config)
}

fn write_snapshots(out: &mut Outputs, run: &ExperimentRun, times: &[f64]) -> Result<Vec<Snapshot>> {
    let mut snaps = Vec::new();
    for &requested in times {
        if !requested.is_finite() {
            return Err(Error::Config(format!("snapshot time {requested} is not finite")));
        }
        let (k, rec) = run
            .records
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1.t - requested).abs().total_cmp(&(b.1.t - requested).abs()))
            .expect("runs have at least one record");
        let file = format!("tomogram_{k:03}.json");
        if !snaps.iter().any(|s: &Snapshot| s.file == file) {
            out.write_tomogram(&file, &rec.tomogram)?;
        }
        snaps.push(Snapshot { requested, t: rec.t, file });
    }
    Ok(snaps)
}

#[derive(Serialize)]
struct TomogramAnalysis {
    source: String,
    n_qubits: usize,
    complete: bool,
    slices_used: Vec<String>,
    missing_slices: Vec<String>,
    reduced_subset: Vec<String>,
    indicators: IndicatorReport,
    squeezing: Option<SqueezingReport>,
    entropic: Vec<EntropicReport>,
    unavailable: Vec<String>,
}

pub fn analyze_tomogram(config: &RunConfig) -> Result<()> {
    let path = config
        .tomogram
        .path
        .clone()
        .ok_or_else(|| Error::Config("no tomogram file given".into()))?;
    if !path.is_file() {
        return Err(Error::Config(format!("tomogram file {} not found", path.display())));
    }
    let tomogram = read_tomogram_with_tol(&path, config.tomogram.norm_tol)?;
    let n = tomogram.n_qubits();
    if n < 2 {
        return Err(Error::Config("indicator analysis needs at least two qubits".into()));
    }
    let bip = match &config.tomogram.bipartition {
        Some(b) => b.clone(),
        None => Bipartition::from_side_a(&[0], n)?,
    };
    let present: Vec<Axes> = tomogram.axes().cloned().collect();
    let missing: Vec<String> =
        Axes::all(n).into_iter().filter(|a| !present.contains(a)).map(|a| a.to_string()).collect();
    let mut unavailable = Vec::new();

    let reduced = match &config.tomogram.reduced_subset {
        Some(labels) => {
            let axes = labels.iter().map(|s| s.parse::<Axes>()).collect::<Result<Vec<_>>>()?;
            let absent: Vec<String> = axes.iter().filter(|a| !present.contains(a)).map(|a| a.to_string()).collect();
            if !absent.is_empty() {
                return Err(Error::MissingSlice(format!("requested reduced subset needs {}", absent.join(", "))));
            }
            axes
        }
        None => default_reduced_subset(n),
    };
    let indicators = indicator_report(&tomogram, &bip, &reduced, PccMode::default())?;
    if indicators.full.is_none() {
        unavailable.push(format!("full average: missing slices {}", missing.join(", ")));
    }
    if indicators.reduced.is_none() {
        let absent: Vec<String> = reduced.iter().filter(|a| !present.contains(a)).map(|a| a.to_string()).collect();
        unavailable.push(format!("reduced average: missing slices {}", absent.join(", ")));
    }
    let opts = SqueezingOptions { seed: config.seed, ..Default::default() };
    let squeezing = match squeezing_from_tomogram(&tomogram, &opts) {
        Ok(s) => Some(s),
        Err(Error::MissingSlice(label)) => {
            unavailable.push(format!("squeezing: no slice matching {label}"));
            None
        }
        Err(e) => return Err(e),
    };
    let mut entropic = Vec::new();
    for q in 0..n {
        match entropic_squeezing_check(&tomogram, q, default_entropic_threshold()) {
            Ok(r) => entropic.push(r),
            Err(Error::MissingSlice(label)) => unavailable.push(format!("entropic check on qubit {q}: no slice {label}")),
            Err(e) => return Err(e),
        }
    }

    if let Some(full) = &indicators.full {
        println!("xi_tei = {}", fmt_num(full.xi_tei));
    }
    if let Some(red) = &indicators.reduced {
        println!("xi_tei_reduced = {}", fmt_num(red.xi_tei));
    }
    for u in &unavailable {
        println!("unavailable: {u}");
    }
    let analysis = TomogramAnalysis {
        source: path.display().to_string(),
        n_qubits: n,
        complete: tomogram.is_complete(),
        slices_used: present.iter().map(|a| a.to_string()).collect(),
        missing_slices: missing,
        reduced_subset: reduced.iter().map(|a| a.to_string()).collect(),
        indicators,
        squeezing,
        entropic,
        unavailable,
    };
    let mut out = Outputs::new(&config.out)?;
    out.write_json("report.json", &analysis)?;
    out.finish("analyze-tomogram", config)
}

#[derive(Serialize)]
struct CircuitSummary {
    circuit: String,
    theta: Option<f64>,
    exact: bool,
    shots: Option<usize>,
    repetitions: Option<usize>,
    seed: u64,
    xi_tei: Vec<f64>,
    mean: f64,
    std: f64,
    exact_xi_tei: f64,
}

pub fn circuit(config: &RunConfig) -> Result<()> {
    let c = &config.circuit;
    let (circ, label, theta) = match c.initial {
        Some(v) => (build_initial_state_circuit(v), serde_json::to_value(v)?.as_str().unwrap_or("initial").to_string(), None),
        None => (build_equivalent_circuit(c.theta)?, "equivalent".to_string(), Some(c.theta)),
    };
    if c.shots == 0 || c.repetitions == 0 {
        return Err(Error::Config("shots and repetitions must be at least 1".into()));
    }
    let mut out = Outputs::new(&config.out)?;
    out.write("circuit.txt", &circ.to_text())?;
    let exact = exact_tomogram(&circ)?;
    let exact_xi = tomogram_xi_tei(&exact)?;
    let summary = if config.exact {
        out.write_tomogram("tomogram_exact.json", &exact)?;
        CircuitSummary {
            circuit: label,
            theta,
            exact: true,
            shots: None,
            repetitions: None,
            seed: config.seed,
            xi_tei: vec![exact_xi],
            mean: exact_xi,
            std: 0.0,
            exact_xi_tei: exact_xi,
        }
    } else {
        let est = tomogram_from_shots(&circ, c.shots, c.repetitions, config.seed)?;
        for (r, t) in est.tomograms.iter().enumerate() {
            out.write_tomogram(&format!("tomogram_rep{r}.json"), t)?;
        }
        CircuitSummary {
            circuit: label,
            theta,
            exact: false,
            shots: Some(c.shots),
            repetitions: Some(c.repetitions),
            seed: config.seed,
            xi_tei: est.xi_tei,
            mean: est.mean,
            std: est.std,
            exact_xi_tei: exact_xi,
        }
    };
    println!("xi_tei = {} +- {} (exact {})", fmt_num(summary.mean), fmt_num(summary.std), fmt_num(exact_xi));
    out.write_json("summary.json", &summary)?;
    out.finish("circuit", config)
}

pub fn list_presets() -> Result<()> {
    println!("experiment I: three spins (M, A, B), scaled time grid over [0, pi/2], bipartition 0|1, discord measured on 1");
    for label in PRESET_LABELS {
        let p = preset(label)?;
        let f = |v: &[f64]| v.iter().map(|x| fmt_num(x / hz(1.0))).collect::<Vec<_>>().join(", ");
        let couplings: Vec<String> = (0..p.n_qubits)
            .flat_map(|i| ((i + 1)..p.n_qubits).map(move |j| (i, j)))
            .map(|(i, j)| format!("{}{}={}", i, j, fmt_num(p.lambda[i][j] / hz(1.0))))
            .collect();
        println!(
            "case {:<3} experiment {:<3} omega/2pi=[{}] Hz, Omega/2pi=[{}] Hz, lambda/2pi: {} Hz, epsilon={}, bipartition {}, measured {:?}",
            p.case,
            if p.n_qubits == 2 { "II" } else { "III" },
            f(&p.omega),
            f(&p.big_omega),
            couplings.join(" "),
            fmt_num(p.epsilon),
            p.bipartition,
            p.measured
        );
    }
    Ok(())
}
