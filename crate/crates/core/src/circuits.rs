//! Gate-level statevector simulation with shot sampling, and the four-qubit
//! circuits that reproduce the experiment-I two-spin state.
//!
//! Qubit 0 is the leftmost (most significant) index, matching the rest of the
//! crate. Circuits start in `|0...0>`. Computational outcomes are reported as
//! bitstrings over the measured qubits in measurement order.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indicators::{average_indicators, Bipartition, PccMode};
use crate::qmath::{CMat, C64, ONE, ZERO};
use crate::spin::Axis;
use crate::states::PureState;
use crate::tomography::{marginalize, Axes, Direction, Tomogram, NORM_TOL};

/// Qubits carrying the (A, B) pair in the equivalent circuit.
pub const TOMOGRAPHY_QUBITS: [usize; 2] = [2, 3];

/// Shots per basis setting used by default.
pub const DEFAULT_SHOTS: usize = 8192;

/// Independent repetitions used by default.
pub const DEFAULT_REPETITIONS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GateKind {
    H,
    X,
    Rx(f64),
    Sdg,
    Cnot,
    Crx(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub target: usize,
    pub control: Option<usize>,
}

impl Gate {
    pub fn h(q: usize) -> Gate {
        Gate { kind: GateKind::H, target: q, control: None }
    }
    pub fn x(q: usize) -> Gate {
        Gate { kind: GateKind::X, target: q, control: None }
    }
    pub fn rx(q: usize, theta: f64) -> Gate {
        Gate { kind: GateKind::Rx(theta), target: q, control: None }
    }
    pub fn sdg(q: usize) -> Gate {
        Gate { kind: GateKind::Sdg, target: q, control: None }
    }
    pub fn cnot(control: usize, target: usize) -> Gate {
        Gate { kind: GateKind::Cnot, target, control: Some(control) }
    }
    pub fn crx(control: usize, target: usize, theta: f64) -> Gate {
        Gate { kind: GateKind::Crx(theta), target, control: Some(control) }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::Rx(_) => "RX",
            GateKind::Sdg => "SDG",
            GateKind::Cnot => "CNOT",
            GateKind::Crx(_) => "CRX",
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match self.kind {
            GateKind::Rx(t) | GateKind::Crx(t) => Some(t),
            _ => None,
        }
    }

    /// 2x2 action on the target (applied only when the control is set).
    pub fn matrix(&self) -> CMat {
        let r = |x: f64| C64::new(x, 0.0);
        let rows: [[C64; 2]; 2] = match self.kind {
            GateKind::H => [[r(FRAC_1_SQRT_2), r(FRAC_1_SQRT_2)], [r(FRAC_1_SQRT_2), r(-FRAC_1_SQRT_2)]],
            GateKind::X | GateKind::Cnot => [[ZERO, ONE], [ONE, ZERO]],
            GateKind::Rx(t) | GateKind::Crx(t) => {
                let (s, c) = (t / 2.0).sin_cos();
                [[r(c), C64::new(0.0, -s)], [C64::new(0.0, -s), r(c)]]
            }
            GateKind::Sdg => [[ONE, ZERO], [ZERO, C64::new(0.0, -1.0)]],
        };
        CMat::from_rows(&[&rows[0], &rows[1]]).expect("static shape")
    }

    fn qubits(&self) -> impl Iterator<Item = usize> {
        std::iter::once(self.target).chain(self.control)
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.name(), self.target)?;
        if let Some(c) = self.control {
            write!(f, " {c}")?;
        }
        if let Some(t) = self.angle() {
            write!(f, " {t}")?;
        }
        Ok(())
    }
}

impl FromStr for Gate {
    type Err = Error;
    fn from_str(line: &str) -> Result<Gate> {
        let parts: Vec<&str> = line.split_whitespace().collect();
        let bad = || Error::Parse(format!("malformed gate line {line:?}"));
        let int = |s: &str| s.parse::<usize>().map_err(|_| bad());
        let angle = |s: &str| s.parse::<f64>().ok().filter(|t| t.is_finite()).ok_or_else(bad);
        let name = parts.first().ok_or_else(bad)?.to_ascii_uppercase();
        match (name.as_str(), parts.len()) {
            ("H", 2) => Ok(Gate::h(int(parts[1])?)),
            ("X", 2) => Ok(Gate::x(int(parts[1])?)),
            ("SDG", 2) => Ok(Gate::sdg(int(parts[1])?)),
            ("RX", 3) => Ok(Gate::rx(int(parts[1])?, angle(parts[2])?)),
            ("CNOT", 3) => Ok(Gate::cnot(int(parts[2])?, int(parts[1])?)),
            ("CRX", 4) => Ok(Gate::crx(int(parts[2])?, int(parts[1])?, angle(parts[3])?)),
            _ => Err(bad()),
        }
    }
}

/// Ordered gate list plus the measured qubits and their bases.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    measurements: Vec<(usize, Axis)>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Result<Circuit> {
        if n_qubits == 0 || n_qubits > 16 {
            return Err(Error::InvalidArgument(format!("circuit needs 1 to 16 qubits, got {n_qubits}")));
        }
        Ok(Circuit { n_qubits, gates: Vec::new(), measurements: Vec::new() })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    /// Measured qubits with their bases; all qubits in z when none are set.
    pub fn measurements(&self) -> Vec<(usize, Axis)> {
        if self.measurements.is_empty() {
            (0..self.n_qubits).map(|q| (q, Axis::Z)).collect()
        } else {
            self.measurements.clone()
        }
    }

    pub fn measured_qubits(&self) -> Vec<usize> {
        self.measurements().into_iter().map(|(q, _)| q).collect()
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        if let Some(q) = gate.qubits().find(|&q| q >= self.n_qubits) {
            return Err(Error::InvalidArgument(format!("gate {gate} uses qubit {q} of {}", self.n_qubits)));
        }
        if gate.control == Some(gate.target) {
            return Err(Error::InvalidArgument(format!("gate {gate} controls its own target")));
        }
        self.gates.push(gate);
        Ok(self)
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<&mut Self> {
        for g in gates {
            self.push(g)?;
        }
        Ok(self)
    }

    pub fn set_measurements(&mut self, measurements: &[(usize, Axis)]) -> Result<&mut Self> {
        let mut seen = vec![false; self.n_qubits];
        for &(q, _) in measurements {
            if q >= self.n_qubits || std::mem::replace(&mut seen[q], true) {
                return Err(Error::InvalidArgument(format!("invalid or repeated measured qubit {q}")));
            }
        }
        self.measurements = measurements.to_vec();
        Ok(self)
    }

    /// Text form: a `qubits N` header, one gate per line
    /// (`NAME target [control] [angle]`), then `MEASURE qubit axis` lines.
    pub fn to_text(&self) -> String {
        let mut s = format!("qubits {}\n", self.n_qubits);
        for g in &self.gates {
            s.push_str(&format!("{g}\n"));
        }
        for (q, a) in &self.measurements {
            s.push_str(&format!("MEASURE {q} {a}\n"));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Circuit> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty circuit text".into()))?;
        let n = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["qubits", n] => n.parse::<usize>().map_err(|_| Error::Parse(format!("bad header {header:?}")))?,
            _ => return Err(Error::Parse(format!("expected `qubits N`, found {header:?}"))),
        };
        let mut circuit = Circuit::new(n)?;
        let mut measurements = Vec::new();
        for line in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts[0].eq_ignore_ascii_case("MEASURE") {
                match parts.as_slice() {
                    [_, q, a] => {
                        let q = q.parse::<usize>().map_err(|_| Error::Parse(format!("bad measure line {line:?}")))?;
                        measurements.push((q, a.parse::<Axis>()?));
                    }
                    _ => return Err(Error::Parse(format!("bad measure line {line:?}"))),
                }
            } else {
                circuit.push(line.parse()?)?;
            }
        }
        circuit.set_measurements(&measurements)?;
        Ok(circuit)
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn apply_gate(amps: &mut [C64], n: usize, gate: &Gate) {
    let m = gate.matrix();
    let tmask = 1usize << (n - 1 - gate.target);
    let cmask = gate.control.map(|c| 1usize << (n - 1 - c));
    for i in 0..amps.len() {
        if i & tmask != 0 || cmask.is_some_and(|c| i & c == 0) {
            continue;
        }
        let j = i | tmask;
        let (a, b) = (amps[i], amps[j]);
        amps[i] = m[(0, 0)] * a + m[(0, 1)] * b;
        amps[j] = m[(1, 0)] * a + m[(1, 1)] * b;
    }
}

/// Amplitudes after all gates, starting from `|0...0>`; measurements ignored.
pub fn simulate_statevector(circuit: &Circuit) -> PureState {
    let n = circuit.n_qubits;
    let mut amps = vec![ZERO; 1 << n];
    amps[0] = ONE;
    for g in &circuit.gates {
        apply_gate(&mut amps, n, g);
    }
    PureState::new(amps).expect("unitary gates preserve the norm")
}

/// Gates rotating `axis` onto the computational basis.
pub fn basis_gates(q: usize, axis: Axis) -> Vec<Gate> {
    match axis {
        Axis::X => vec![Gate::h(q)],
        Axis::Y => vec![Gate::sdg(q), Gate::h(q)],
        Axis::Z => Vec::new(),
    }
}

/// Appends the basis-change gates and records the measurements.
pub fn basis_change(circuit: &Circuit, bases: &[(usize, Axis)]) -> Result<Circuit> {
    let mut out = circuit.clone();
    for &(q, a) in bases {
        out.extend(basis_gates(q, a))?;
    }
    out.set_measurements(bases)?;
    Ok(out)
}

/// Computational outcome reached by the +1/2 spin eigenstate along `axis`
/// after its basis change.
pub fn plus_outcome(axis: Axis) -> usize {
    let up = Direction::Axis(axis).measurement_basis().column(1);
    let rotated = basis_gates(0, axis).iter().fold(up, |v, g| g.matrix().apply(&v));
    usize::from(rotated[1].norm_sqr() > rotated[0].norm_sqr())
}

/// Exact outcome probabilities over the measured qubits, after the
/// basis-change gates already in the circuit.
pub fn measurement_probabilities(circuit: &Circuit) -> Vec<f64> {
    let probs = simulate_statevector(circuit).probabilities();
    marginalize(&probs, circuit.n_qubits, &circuit.measured_qubits())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotResult {
    /// Bitstring over the measured qubits (measurement order) to count.
    pub counts: BTreeMap<String, u64>,
    pub n_shots: u64,
    pub seed: u64,
}

impl ShotResult {
    /// Relative frequencies indexed by computational outcome.
    pub fn frequencies(&self, n_measured: usize) -> Vec<f64> {
        let mut f = vec![0.0; 1 << n_measured];
        for (bits, &c) in &self.counts {
            let k = usize::from_str_radix(bits, 2).expect("bitstrings are binary");
            f[k] = c as f64 / self.n_shots as f64;
        }
        f
    }
}

fn draw(probs: &[f64], n_shots: usize, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in probs {
        acc += p;
        cdf.push(acc);
    }
    let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1);
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..n_shots {
        let u = rng.gen::<f64>() * acc;
        let k = cdf.partition_point(|&c| c <= u).min(last);
        counts[k] += 1;
    }
    counts
}

fn shots_from_probs(probs: &[f64], n_measured: usize, n_shots: usize, seed: u64, rng: &mut ChaCha8Rng) -> ShotResult {
    let counts = draw(probs, n_shots, rng)
        .into_iter()
        .enumerate()
        .filter(|&(_, c)| c > 0)
        .map(|(k, c)| (format!("{k:0n_measured$b}"), c))
        .collect();
    ShotResult { counts, n_shots: n_shots as u64, seed }
}

/// Multinomial sample of the measured qubits (inverse CDF on a seeded ChaCha stream).
pub fn sample_shots(circuit: &Circuit, n_shots: usize, seed: u64) -> Result<ShotResult> {
    if n_shots == 0 {
        return Err(Error::InvalidArgument("n_shots must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probs = measurement_probabilities(circuit);
    Ok(shots_from_probs(&probs, circuit.measured_qubits().len(), n_shots, seed, &mut rng))
}

/// Generator for one (repetition, basis setting) task of a run.
pub fn task_rng(master: u64, repetition: usize, basis: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(((repetition as u64) << 32) | basis as u64);
    rng
}

/// Four-qubit circuit whose (q2, q3) marginal is the experiment-I two-spin
/// state at `chi t = theta / 4`. q0 is auxiliary, q1 follows M.
pub fn build_equivalent_circuit(theta: f64) -> Result<Circuit> {
    if !(0.0..PI).contains(&theta) {
        return Err(Error::InvalidArgument(format!("theta must lie in [0, pi), got {theta}")));
    }
    let mut c = Circuit::new(4)?;
    c.extend([
        Gate::h(0),
        Gate::cnot(0, 1),
        Gate::h(1),
        Gate::h(2),
        Gate::cnot(2, 3),
        Gate::x(3),
        Gate::cnot(0, 3),
        Gate::rx(2, theta),
        Gate::crx(0, 2, -2.0 * theta),
    ])?;
    c.set_measurements(&[(2, Axis::Z), (3, Axis::Z)])?;
    Ok(c)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialCircuit {
    /// The equivalent circuit at `theta = 0`.
    ThetaZero,
    /// Drops the M qubit preparation and the rotations.
    Compact,
}

impl FromStr for InitialCircuit {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theta-zero" | "theta0" => Ok(InitialCircuit::ThetaZero),
            "compact" => Ok(InitialCircuit::Compact),
            _ => Err(Error::Parse(format!("unknown initial circuit {s:?}; expected theta-zero or compact"))),
        }
    }
}

/// Circuit preparing the experiment-I initial two-spin state on (q2, q3).
pub fn build_initial_state_circuit(variant: InitialCircuit) -> Circuit {
    match variant {
        InitialCircuit::ThetaZero => build_equivalent_circuit(0.0).expect("zero is in range"),
        InitialCircuit::Compact => {
            let mut c = Circuit::new(4).expect("four qubits");
            c.extend([Gate::h(0), Gate::h(2), Gate::cnot(2, 3), Gate::x(3), Gate::cnot(0, 3)])
                .expect("qubits in range");
            c.set_measurements(&[(2, Axis::Z), (3, Axis::Z)]).expect("qubits in range");
            c
        }
    }
}

/// Reorders computational probabilities into spin-outcome order for `axes`.
fn to_spin_order(comp: &[f64], axes: &Axes) -> Vec<f64> {
    let m = axes.len();
    let flip = axes.0.iter().enumerate().fold(0usize, |mask, (j, &a)| {
        if plus_outcome(a) == 0 {
            mask | (1 << (m - 1 - j))
        } else {
            mask
        }
    });
    let mut out = vec![0.0; comp.len()];
    for (k, p) in comp.iter().enumerate() {
        out[k ^ flip] = *p;
    }
    out
}

fn slice_circuit(base: &Circuit, qubits: &[usize], axes: &Axes) -> Result<Circuit> {
    let bases: Vec<(usize, Axis)> = qubits.iter().copied().zip(axes.0.iter().copied()).collect();
    basis_change(base, &bases)
}

/// Noiseless tomogram of the measured qubits of `base`.
pub fn exact_tomogram(base: &Circuit) -> Result<Tomogram> {
    let qubits = base.measured_qubits();
    let mut slices = BTreeMap::new();
    for axes in Axes::all(qubits.len()) {
        let c = slice_circuit(base, &qubits, &axes)?;
        slices.insert(axes.clone(), to_spin_order(&measurement_probabilities(&c), &axes));
    }
    Tomogram::new(qubits.len(), slices, NORM_TOL)
}

/// Empirical tomogram from `n_shots` per basis setting of one repetition.
pub fn shot_tomogram(base: &Circuit, n_shots: usize, master_seed: u64, repetition: usize) -> Result<Tomogram> {
    if n_shots == 0 {
        return Err(Error::InvalidArgument("n_shots must be at least 1".into()));
    }
    let qubits = base.measured_qubits();
    let m = qubits.len();
    let mut slices = BTreeMap::new();
    for (b, axes) in Axes::all(m).into_iter().enumerate() {
        let c = slice_circuit(base, &qubits, &axes)?;
        let mut rng = task_rng(master_seed, repetition, b);
        let shots = shots_from_probs(&measurement_probabilities(&c), m, n_shots, master_seed, &mut rng);
        slices.insert(axes.clone(), to_spin_order(&shots.frequencies(m), &axes));
    }
    Tomogram::new(m, slices, NORM_TOL)
}

/// `xi_TEI` of a tomogram over measured qubits, first qubit against the rest.
pub fn tomogram_xi_tei(tomogram: &Tomogram) -> Result<f64> {
    let bip = Bipartition::from_side_a(&[0], tomogram.n_qubits())?;
    Ok(average_indicators(tomogram, &bip, None, PccMode::CollectiveSum)?.xi_tei)
}

#[derive(Clone, Debug)]
pub struct ShotEstimate {
    pub tomograms: Vec<Tomogram>,
    pub xi_tei: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation (n - 1); zero for a single repetition.
    pub std: f64,
    pub n_shots: usize,
    pub seed: u64,
}

/// Repeated shot-sampled tomography of the measured qubits of `base`.
pub fn tomogram_from_shots(base: &Circuit, n_shots: usize, repetitions: usize, seed: u64) -> Result<ShotEstimate> {
    if repetitions == 0 {
        return Err(Error::InvalidArgument("repetitions must be at least 1".into()));
    }
    let tomograms = (0..repetitions)
        .map(|r| shot_tomogram(base, n_shots, seed, r))
        .collect::<Result<Vec<_>>>()?;
    let xi_tei = tomograms.iter().map(tomogram_xi_tei).collect::<Result<Vec<_>>>()?;
    let (mean, std) = mean_std(&xi_tei);
    Ok(ShotEstimate { tomograms, xi_tei, mean, std, n_shots, seed })
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::closed_form_rho_ab;
    use crate::tomography::full_tomogram;

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-12
    }

    fn run(n: usize, gates: &[Gate]) -> PureState {
        let mut c = Circuit::new(n).unwrap();
        c.extend(gates.iter().copied()).unwrap();
        simulate_statevector(&c)
    }

    #[test]
    fn gate_matrices_are_unitary() {
        for g in [Gate::h(0), Gate::x(0), Gate::rx(0, 0.37), Gate::sdg(0), Gate::cnot(1, 0), Gate::crx(1, 0, -2.1)] {
            let m = g.matrix();
            assert!(m.matmul(&m.dagger()).max_abs_diff(&CMat::identity(2)) < 1e-12, "{g}");
        }
        assert!(Gate::sdg(0).matrix().max_abs_diff(&CMat::from_rows(&[&[ONE, ZERO], &[ZERO, C64::new(0.0, -1.0)]]).unwrap()) == 0.0);
    }

    #[test]
    fn small_circuits() {
        let s = run(1, &[Gate::h(0)]);
        assert!(close(s.amplitudes()[0], C64::new(FRAC_1_SQRT_2, 0.0)));
        assert!(close(s.amplitudes()[1], C64::new(FRAC_1_SQRT_2, 0.0)));
        let s = run(1, &[Gate::rx(0, PI)]);
        assert!(close(s.amplitudes()[0], ZERO) && close(s.amplitudes()[1], C64::new(0.0, -1.0)));
        let s = run(2, &[Gate::h(0), Gate::cnot(0, 1)]);
        let a = s.amplitudes();
        assert!(close(a[0], C64::new(FRAC_1_SQRT_2, 0.0)) && close(a[3], C64::new(FRAC_1_SQRT_2, 0.0)));
        assert!(close(a[1], ZERO) && close(a[2], ZERO));
        // control on the right-hand qubit
        let s = run(2, &[Gate::x(1), Gate::cnot(1, 0)]);
        assert!(close(s.amplitudes()[3], ONE));
    }

    #[test]
    fn basis_change_examples() {
        let mut plus = Circuit::new(1).unwrap();
        plus.push(Gate::h(0)).unwrap();
        let p = measurement_probabilities(&basis_change(&plus, &[(0, Axis::X)]).unwrap());
        assert!((p[0] - 1.0).abs() < 1e-12);

        let mut plus_i = Circuit::new(1).unwrap();
        // S = SDG^3
        plus_i.extend([Gate::h(0), Gate::sdg(0), Gate::sdg(0), Gate::sdg(0)]).unwrap();
        let amps = simulate_statevector(&plus_i).amplitudes().to_vec();
        assert!(((amps[1] / amps[0]) - C64::new(0.0, 1.0)).norm() < 1e-12);
        let p = measurement_probabilities(&basis_change(&plus_i, &[(0, Axis::Y)]).unwrap());
        assert!(p.iter().any(|&x| (x - 1.0).abs() < 1e-12));

        let mut one = Circuit::new(1).unwrap();
        one.push(Gate::x(0)).unwrap();
        let p = measurement_probabilities(&basis_change(&one, &[(0, Axis::Z)]).unwrap());
        assert!((p[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn plus_outcomes() {
        assert_eq!(plus_outcome(Axis::X), 0);
        assert_eq!(plus_outcome(Axis::Y), 1);
        assert_eq!(plus_outcome(Axis::Z), 1);
    }

    #[test]
    fn sampling_basics() {
        let mut one = Circuit::new(2).unwrap();
        one.push(Gate::x(1)).unwrap();
        let r = sample_shots(&one, 500, 3).unwrap();
        assert_eq!(r.counts.len(), 1);
        assert_eq!(r.counts["01"], 500);

        let mut bell = Circuit::new(2).unwrap();
        bell.extend([Gate::h(0), Gate::cnot(0, 1)]).unwrap();
        let r = sample_shots(&bell, 8192, 11).unwrap();
        assert_eq!(r.counts.values().sum::<u64>(), 8192);
        let f = r.frequencies(2);
        assert!((f[0] - 0.5).abs() < 0.02 && (f[3] - 0.5).abs() < 0.02);
        assert_eq!(f[1] + f[2], 0.0);
        assert_eq!(sample_shots(&bell, 8192, 11).unwrap(), r);
        assert_ne!(sample_shots(&bell, 8192, 12).unwrap(), r);
        assert!(sample_shots(&bell, 0, 1).is_err());
    }

    #[test]
    fn equivalent_circuit_reproduces_two_spin_state() {
        for k in 0..20 {
            let theta = k as f64 * PI / 20.0;
            let c = build_equivalent_circuit(theta).unwrap();
            let marginal = simulate_statevector(&c).to_density().reduce(&TOMOGRAPHY_QUBITS).unwrap();
            let d = marginal.matrix().frobenius_distance(closed_form_rho_ab(theta / 4.0).matrix());
            assert!(d < 1e-10, "theta = {theta}: {d}");
        }
        assert!(build_equivalent_circuit(PI).is_err());
        assert!(build_equivalent_circuit(-0.1).is_err());
    }

    #[test]
    fn initial_state_variants() {
        let target = closed_form_rho_ab(0.0);
        for v in [InitialCircuit::ThetaZero, InitialCircuit::Compact] {
            let c = build_initial_state_circuit(v);
            let m = simulate_statevector(&c).to_density().reduce(&TOMOGRAPHY_QUBITS).unwrap();
            assert!(m.matrix().frobenius_distance(target.matrix()) < 1e-10);
            assert!((tomogram_xi_tei(&exact_tomogram(&c).unwrap()).unwrap() - 1.0 / 9.0).abs() < 1e-12);
        }
        assert!(
            build_initial_state_circuit(InitialCircuit::Compact).gate_count()
                < build_initial_state_circuit(InitialCircuit::ThetaZero).gate_count()
        );
    }

    #[test]
    fn exact_tomogram_matches_density_route() {
        for theta in [0.0, 0.4, PI / 2.0, 2.9] {
            let c = build_equivalent_circuit(theta).unwrap();
            let direct = full_tomogram(&closed_form_rho_ab(theta / 4.0));
            assert!(exact_tomogram(&c).unwrap().max_abs_diff(&direct).unwrap() < 1e-12);
        }
        // an asymmetric state catches label mix-ups that symmetric states hide
        let mut c = Circuit::new(2).unwrap();
        c.extend([Gate::rx(0, 0.7), Gate::h(1), Gate::sdg(1), Gate::cnot(0, 1), Gate::rx(1, 1.9)]).unwrap();
        let rho = simulate_statevector(&c).to_density();
        assert!(exact_tomogram(&c).unwrap().max_abs_diff(&full_tomogram(&rho)).unwrap() < 1e-12);
    }

    #[test]
    fn shot_estimates() {
        let c = build_equivalent_circuit(PI / 2.0).unwrap();
        assert!((tomogram_xi_tei(&exact_tomogram(&c).unwrap()).unwrap() - 1.0 / 3.0).abs() < 1e-9);
        let est = tomogram_from_shots(&c, DEFAULT_SHOTS, DEFAULT_REPETITIONS, 2024).unwrap();
        assert_eq!(est.xi_tei.len(), 6);
        assert!((0.31..=0.36).contains(&est.mean), "{}", est.mean);
        assert!(est.std > 0.0);
        let again = tomogram_from_shots(&c, DEFAULT_SHOTS, DEFAULT_REPETITIONS, 2024).unwrap();
        assert_eq!(again.xi_tei, est.xi_tei);
        assert!(tomogram_from_shots(&c, 10, 0, 1).is_err());
    }

    #[test]
    fn empirical_slices_within_binomial_band() {
        let c = build_equivalent_circuit(1.1).unwrap();
        let exact = exact_tomogram(&c).unwrap();
        let n = 20_000;
        let est = shot_tomogram(&c, n, 5, 0).unwrap();
        for (axes, p) in exact.slices() {
            for (pe, ps) in p.iter().zip(est.slice(axes).unwrap()) {
                let sigma = (pe * (1.0 - pe) / n as f64).sqrt();
                assert!((pe - ps).abs() <= 4.0 * sigma + 1e-12, "{axes}: {pe} vs {ps}");
            }
        }
    }

    #[test]
    fn text_round_trip() {
        let c = build_equivalent_circuit(0.3).unwrap();
        let text = c.to_text();
        assert!(text.contains("CRX 2 0 -0.6\n"));
        assert_eq!(Circuit::from_text(&text).unwrap(), c);
        let with_comments = "# prep\nqubits 2\nh 0   # hadamard\nCNOT 1 0\n";
        let parsed = Circuit::from_text(with_comments).unwrap();
        assert_eq!(parsed.gates(), &[Gate::h(0), Gate::cnot(0, 1)]);
        assert!(Circuit::from_text("qubits 2\nCNOT 1 1\n").is_err());
        assert!(Circuit::from_text("qubits 2\nRX 0\n").is_err());
        assert!(Circuit::from_text("H 0\n").is_err());
    }
}
