//! Hamiltonians, closed forms, case presets and time-series runners for the
//! three NMR experiments.
//!
//! Experiment I evolves the three-qubit state (M, A, B) under an effective
//! two-body Hamiltonian and studies the (A, B) marginal against the scaled
//! time `chi t`. Experiments II and III evolve a pseudo-pure state of two or
//! three driven, coupled spins; frequencies are angular (rad/s).

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indicators::{default_reduced_subset, indicator_report, indicator_report_from_density, Bipartition, IndicatorReport, PccMode};
use crate::measures::{discord, negativity, qmi, DiscordOptions, DiscordResult};
use crate::qmath::{herm_eig, CMat, HermEigen, C64};
use crate::spin::{spin_op, Axis};
use crate::squeezing::{squeezing_from_tomogram, squeezing_report, SqueezingOptions, SqueezingReport};
use crate::states::{bell_phi_plus, bell_psi_plus, pseudo_pure, rho_mab_initial, x_minus, x_plus, DensityMatrix, PureState};
use crate::tomography::{full_tomogram, Axes, Tomogram};

/// `H_S = 4 chi (sigma_Ax + sigma_Bx) sigma_Mx` on qubit order (M, A, B).
pub fn hamiltonian_s(chi: f64) -> CMat {
    let mx = spin_op(Axis::X, 0, 3);
    let sum = &spin_op(Axis::X, 1, 3) + &spin_op(Axis::X, 2, 3);
    sum.matmul(&mx).scale_re(4.0 * chi)
}

/// Scalar couplings in the rotating frame on qubit order (M, A, B),
/// `(pi/2)(J_AM s_Az s_Mz + J_BM s_Bz s_Mz + J_AB s_Az s_Bz)`, with J in Hz.
pub fn hamiltonian_i(j_am: f64, j_bm: f64, j_ab: f64) -> CMat {
    let z = |q| spin_op(Axis::Z, q, 3);
    let terms = [(j_am, 1, 0), (j_bm, 2, 0), (j_ab, 1, 2)];
    terms.iter().fold(CMat::zeros(8, 8), |acc, &(j, p, q)| &acc + &z(p).matmul(&z(q)).scale_re(0.5 * PI * j))
}

/// The two branches of the closed-form experiment-I state at scaled time `chi_t`.
pub fn closed_form_branches(chi_t: f64) -> (PureState, PureState) {
    let (s, c) = (2.0 * chi_t).sin_cos();
    let phi = bell_phi_plus();
    let psi = bell_psi_plus();
    let combine = |a: &PureState, ca: C64, b: &PureState, cb: C64| -> Vec<C64> {
        a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| ca * x + cb * y).collect()
    };
    let ab0 = PureState::new(combine(&phi, C64::new(c, 0.0), &psi, C64::new(0.0, -s))).expect("unit norm");
    let ab1 = PureState::new(combine(&psi, C64::new(c, 0.0), &phi, C64::new(0.0, s))).expect("unit norm");
    (x_plus().tensor(&ab0), x_minus().tensor(&ab1))
}

/// Closed-form `rho_MAB(t)`.
pub fn closed_form_rho_mab(chi_t: f64) -> DensityMatrix {
    let (p0, p1) = closed_form_branches(chi_t);
    let m = (&p0.projector() + &p1.projector()).scale_re(0.5);
    DensityMatrix::new(m).expect("mixture of two pure states")
}

/// Closed-form `rho_AB(t) = Tr_M rho_MAB(t)`.
pub fn closed_form_rho_ab(chi_t: f64) -> DensityMatrix {
    closed_form_rho_mab(chi_t).reduce(&[1, 2]).expect("valid subsystem")
}

/// Second-moment matrix `T_ab` of the collective spin in `rho_AB(t)`.
pub fn closed_form_second_moments(chi_t: f64) -> [[f64; 3]; 3] {
    let s = 0.5 * (4.0 * chi_t).sin();
    [[1.0, 0.0, 0.0], [0.0, 0.5, s], [0.0, s, 0.5]]
}

/// Time grid, either uniform or listed explicitly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Uniform { start: f64, stop: f64, points: usize },
    Explicit(Vec<f64>),
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::Uniform { start, stop, points } => match points {
                0 => Vec::new(),
                1 => vec![*start],
                _ => (0..*points).map(|k| start + (stop - start) * k as f64 / (*points - 1) as f64).collect(),
            },
            Grid::Explicit(v) => v.clone(),
        }
    }

    fn validate(&self, what: &str, lo: f64, hi: f64) -> Result<Vec<f64>> {
        let v = self.values();
        if v.is_empty() {
            return Err(Error::Config(format!("{what} grid is empty")));
        }
        if v.iter().any(|x| !x.is_finite() || *x < lo - 1e-12 || *x > hi + 1e-12) {
            return Err(Error::Config(format!("{what} grid must lie within [{lo}, {hi}]")));
        }
        if v.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(format!("{what} grid must be strictly increasing")));
        }
        Ok(v)
    }
}

/// Per-time-point analysis settings shared by all experiments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisOptions {
    pub pcc_mode: PccMode,
    /// Slice labels for the reduced-subset average; default: first axis x or y.
    pub reduced_subset: Option<Vec<String>>,
    pub squeezing: SqueezingOptions,
    pub discord: DiscordOptions,
    pub compute_discord: bool,
    /// Closed-form vs numeric evolution.
    pub evolution_tol: f64,
    /// Tomogram route vs density-matrix route.
    pub dual_route_tol: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            pcc_mode: PccMode::CollectiveSum,
            reduced_subset: None,
            squeezing: SqueezingOptions::default(),
            discord: DiscordOptions::default(),
            compute_discord: true,
            evolution_tol: 1e-10,
            dual_route_tol: 1e-9,
        }
    }
}

impl AnalysisOptions {
    pub fn reduced_axes(&self, n_qubits: usize) -> Result<Vec<Axes>> {
        match &self.reduced_subset {
            None => Ok(default_reduced_subset(n_qubits)),
            Some(labels) => {
                let axes = labels.iter().map(|s| s.parse::<Axes>()).collect::<Result<Vec<_>>>()?;
                if let Some(bad) = axes.iter().find(|a| a.len() != n_qubits) {
                    return Err(Error::Config(format!("reduced subset slice {bad} does not have {n_qubits} axes")));
                }
                if axes.is_empty() {
                    return Err(Error::Config("reduced subset is empty".into()));
                }
                Ok(axes)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentIConfig {
    /// Scaled times `chi t`.
    pub chi_t_grid: Grid,
    pub analysis: AnalysisOptions,
}

impl Default for ExperimentIConfig {
    fn default() -> Self {
        ExperimentIConfig {
            chi_t_grid: Grid::Uniform { start: 0.0, stop: FRAC_PI_2, points: 65 },
            analysis: AnalysisOptions::default(),
        }
    }
}

impl ExperimentIConfig {
    pub fn validate(&self) -> Result<Vec<f64>> {
        self.analysis.reduced_axes(2)?;
        self.chi_t_grid.validate("chi_t", 0.0, FRAC_PI_2)
    }
}

/// Settings for the driven-spin experiments II (two qubits) and III (three).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentNConfig {
    pub case: String,
    pub n_qubits: usize,
    /// Drive amplitudes `omega_i` (rad/s).
    pub omega: Vec<f64>,
    /// Detunings `Omega_i` (rad/s).
    #[serde(rename = "Omega")]
    pub big_omega: Vec<f64>,
    /// Symmetric couplings `lambda_ij` (rad/s), zero diagonal.
    pub lambda: Vec<Vec<f64>>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Seconds.
    #[serde(default = "default_t_grid")]
    pub t_grid: Grid,
    pub bipartition: Bipartition,
    /// Qubits measured for discord.
    pub measured: Vec<usize>,
    #[serde(default)]
    pub analysis: AnalysisOptions,
}

fn default_epsilon() -> f64 {
    1e-4
}

fn default_t_grid() -> Grid {
    Grid::Uniform { start: 0.0, stop: 0.01, points: 101 }
}

impl ExperimentNConfig {
    pub fn validate(&self) -> Result<Vec<f64>> {
        let n = self.n_qubits;
        if !(2..=3).contains(&n) {
            return Err(Error::Config(format!("n_qubits must be 2 or 3, got {n}")));
        }
        if self.omega.len() != n || self.big_omega.len() != n {
            return Err(Error::Config(format!("omega and Omega need {n} entries each")));
        }
        if self.lambda.len() != n || self.lambda.iter().any(|r| r.len() != n) {
            return Err(Error::Config(format!("lambda must be {n}x{n}")));
        }
        for i in 0..n {
            if self.lambda[i][i] != 0.0 {
                return Err(Error::Config("lambda must have a zero diagonal".into()));
            }
            for j in 0..n {
                if self.lambda[i][j] != self.lambda[j][i] {
                    return Err(Error::Config("lambda must be symmetric".into()));
                }
            }
        }
        let all_finite = self.omega.iter().chain(&self.big_omega).chain(self.lambda.iter().flatten()).all(|x| x.is_finite());
        if !all_finite {
            return Err(Error::Config("frequencies must be finite".into()));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::Config(format!("epsilon must lie in [0, 1], got {}", self.epsilon)));
        }
        if self.bipartition.n_qubits() != n {
            return Err(Error::Config(format!("bipartition {} does not fit {n} qubits", self.bipartition)));
        }
        if self.measured.is_empty() || self.measured.len() > 2 || self.measured.len() >= n || self.measured.iter().any(|&q| q >= n) {
            return Err(Error::Config(format!("measured side {:?} must be 1 or 2 of the {n} qubits", self.measured)));
        }
        self.analysis.reduced_axes(n)?;
        self.t_grid.validate("t", 0.0, f64::INFINITY)
    }
}

/// Frequency in Hz to angular frequency.
pub fn hz(f: f64) -> f64 {
    2.0 * PI * f
}

/// Built-in case labels.
pub const PRESET_LABELS: [&str; 7] = ["i", "ii", "iii", "A", "B", "C", "D"];

/// Preset for one of the built-in cases; labels are case-insensitive.
pub fn preset(label: &str) -> Result<ExperimentNConfig> {
    let lower = label.to_ascii_lowercase();
    match lower.as_str() {
        "i" | "ii" | "iii" => {
            let l12 = hz(868.0);
            let (w1, w2) = match lower.as_str() {
                "i" => (hz(217.0), hz(217.0)),
                "ii" => (hz(217.0) / 4.0, hz(217.0)),
                _ => (hz(217.0), hz(217.0) / 4.0),
            };
            Ok(ExperimentNConfig {
                case: lower,
                n_qubits: 2,
                omega: vec![w1, w2],
                big_omega: vec![l12 / 2.0, l12 / 2.0],
                lambda: vec![vec![0.0, l12], vec![l12, 0.0]],
                epsilon: default_epsilon(),
                t_grid: default_t_grid(),
                bipartition: Bipartition::new(&[0], &[1])?,
                measured: vec![0],
                analysis: AnalysisOptions::default(),
            })
        }
        "a" | "b" | "c" | "d" => {
            let (l12, l13, l23) = (hz(224.7), hz(-311.1), hz(49.7));
            let big_omega = vec![(l12 + l13) / 2.0, (l12 + l23) / 2.0, (l13 + l23) / 2.0];
            let upper = lower.to_ascii_uppercase();
            let (omega, a_side, measured): (Vec<f64>, Vec<usize>, Vec<usize>) = match upper.as_str() {
                "A" => (vec![hz(10.0); 3], vec![0], vec![1, 2]),
                "B" => (vec![hz(50.0), hz(50.0) / 5.0, hz(50.0) / 5.0], vec![0], vec![1, 2]),
                "C" => (vec![hz(50.0) / 5.0, hz(50.0), hz(50.0) / 5.0], vec![1], vec![0, 2]),
                _ => (vec![hz(50.0), hz(50.0), hz(50.0) / 5.0], vec![0, 1], vec![2]),
            };
            Ok(ExperimentNConfig {
                case: upper,
                n_qubits: 3,
                omega,
                big_omega,
                lambda: vec![vec![0.0, l12, l13], vec![l12, 0.0, l23], vec![l13, l23, 0.0]],
                epsilon: default_epsilon(),
                t_grid: default_t_grid(),
                bipartition: Bipartition::from_side_a(&a_side, 3)?,
                measured,
                analysis: AnalysisOptions::default(),
            })
        }
        _ => Err(Error::Config(format!(
            "unknown case {label:?}; valid cases: {}",
            PRESET_LABELS.join(", ")
        ))),
    }
}

/// `sum omega_i s_ix - sum Omega_i s_iz + sum_{i<j} lambda_ij s_iz s_jz`.
pub fn hamiltonian_n(config: &ExperimentNConfig) -> Result<CMat> {
    config.validate()?;
    let n = config.n_qubits;
    let dim = 1 << n;
    let mut h = CMat::zeros(dim, dim);
    for i in 0..n {
        h = &h + &spin_op(Axis::X, i, n).scale_re(config.omega[i]);
        h = &h - &spin_op(Axis::Z, i, n).scale_re(config.big_omega[i]);
        for j in (i + 1)..n {
            h = &h + &spin_op(Axis::Z, i, n).matmul(&spin_op(Axis::Z, j, n)).scale_re(config.lambda[i][j]);
        }
    }
    Ok(h)
}

/// Everything computed at one time point.
#[derive(Clone, Debug, Serialize)]
pub struct TimeRecord {
    pub t: f64,
    #[serde(skip)]
    pub tomogram: Tomogram,
    pub indicators: IndicatorReport,
    pub qmi: f64,
    pub negativity: f64,
    pub discord: Option<DiscordResult>,
    pub squeezing: SqueezingReport,
    pub purity: f64,
}

impl TimeRecord {
    pub fn xi_tei(&self) -> f64 {
        self.indicators.full.as_ref().map_or(f64::NAN, |a| a.xi_tei)
    }
    pub fn xi_tei_reduced(&self) -> f64 {
        self.indicators.reduced.as_ref().map_or(f64::NAN, |a| a.xi_tei)
    }
    pub fn xi_ipr(&self) -> f64 {
        self.indicators.full.as_ref().map_or(f64::NAN, |a| a.xi_ipr)
    }
    pub fn xi_pcc(&self) -> f64 {
        self.indicators.full.as_ref().map_or(f64::NAN, |a| a.xi_pcc)
    }
    pub fn xi_bd(&self) -> f64 {
        self.indicators.full.as_ref().map_or(f64::NAN, |a| a.xi_bd)
    }
    pub fn discord_value(&self) -> f64 {
        self.discord.as_ref().map_or(f64::NAN, |d| d.value)
    }
    pub fn extent_2(&self) -> f64 {
        self.squeezing.extent_2.unwrap_or(f64::NAN)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentRun {
    /// `"I"` or the case label.
    pub experiment: String,
    pub n_qubits: usize,
    pub bipartition: Bipartition,
    pub measured: Vec<usize>,
    pub records: Vec<TimeRecord>,
}

/// Tomogram, indicators, measures and squeezing of one state, with the
/// tomogram-only results cross-checked against the density-matrix route.
pub fn analyze_state(
    rho: &DensityMatrix,
    t: f64,
    bip: &Bipartition,
    measured: &[usize],
    opts: &AnalysisOptions,
) -> Result<TimeRecord> {
    let n = rho.n_qubits();
    let reduced = opts.reduced_axes(n)?;
    let tomogram = full_tomogram(rho);
    let indicators = indicator_report(&tomogram, bip, &reduced, opts.pcc_mode)?;
    let dm_indicators = indicator_report_from_density(rho, bip, &reduced, opts.pcc_mode)?;
    for (a, b) in indicators.slices.iter().zip(&dm_indicators.slices) {
        let dev = [
            (a.eps_tei - b.eps_tei).abs(),
            (a.eps_ipr - b.eps_ipr).abs(),
            (a.eps_pcc - b.eps_pcc).abs(),
            (a.eps_bd - b.eps_bd).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        if dev > opts.dual_route_tol {
            return Err(Error::CrossCheck(format!(
                "t = {t}: slice {} indicators differ by {dev:e} between tomogram and density-matrix routes",
                a.axes
            )));
        }
    }
    let squeezing = squeezing_from_tomogram(&tomogram, &opts.squeezing)?;
    let dm_squeezing = squeezing_report(rho, &opts.squeezing)?;
    let sq_dev = (squeezing.first.var_min - dm_squeezing.first.var_min)
        .abs()
        .max((squeezing.extent_2.unwrap_or(0.0) - dm_squeezing.extent_2.unwrap_or(0.0)).abs());
    if sq_dev > opts.dual_route_tol {
        return Err(Error::CrossCheck(format!(
            "t = {t}: squeezing differs by {sq_dev:e} between tomogram and density-matrix routes"
        )));
    }
    let discord = if opts.compute_discord { Some(discord(rho, measured, &opts.discord)?) } else { None };
    Ok(TimeRecord {
        t,
        qmi: qmi(rho, bip)?,
        negativity: negativity(rho, bip)?,
        purity: rho.purity(),
        tomogram,
        indicators,
        discord,
        squeezing,
    })
}

/// Reusable `exp(-iHt)` from one eigendecomposition.
pub struct Evolution {
    eig: HermEigen,
}

impl Evolution {
    pub fn new(h: &CMat) -> Result<Self> {
        Ok(Evolution { eig: herm_eig(h)? })
    }

    pub fn propagator(&self, t: f64) -> CMat {
        self.eig.map_spectrum(|e| C64::from_polar(1.0, -e * t))
    }

    pub fn evolve(&self, rho: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        let u = self.propagator(t);
        let m = u.matmul(&rho.matrix().matmul(&u.dagger()));
        DensityMatrix::new((&m + &m.dagger()).scale_re(0.5))
    }
}

/// Experiment I over the scaled-time grid; `D(A:B)` with B measured.
pub fn run_experiment_i(config: &ExperimentIConfig) -> Result<ExperimentRun> {
    let grid = config.validate()?;
    let evolution = Evolution::new(&hamiltonian_s(1.0))?;
    let rho0 = rho_mab_initial();
    let bip = Bipartition::new(&[0], &[1])?;
    let measured = vec![1];
    let mut records = Vec::with_capacity(grid.len());
    for &chi_t in &grid {
        let numeric = evolution.evolve(&rho0, chi_t)?;
        let closed = closed_form_rho_mab(chi_t);
        let dev = numeric.matrix().max_abs_diff(closed.matrix());
        if dev > config.analysis.evolution_tol {
            return Err(Error::CrossCheck(format!(
                "chi_t = {chi_t}: numeric evolution deviates from the closed form by {dev:e}"
            )));
        }
        let rho_ab = numeric.reduce(&[1, 2])?;
        records.push(analyze_state(&rho_ab, chi_t, &bip, &measured, &config.analysis)?);
    }
    Ok(ExperimentRun { experiment: "I".into(), n_qubits: 2, bipartition: bip, measured, records })
}

/// Experiment II or III from a validated configuration.
pub fn run_experiment_n(config: &ExperimentNConfig) -> Result<ExperimentRun> {
    let grid = config.validate()?;
    let evolution = Evolution::new(&hamiltonian_n(config)?)?;
    let rho0 = pseudo_pure(config.n_qubits, config.epsilon).map_err(|e| Error::Config(e.to_string()))?;
    let purity0 = rho0.purity();
    let mut records = Vec::with_capacity(grid.len());
    for &t in &grid {
        let rho = evolution.evolve(&rho0, t)?;
        let drift = (rho.purity() - purity0).abs();
        if drift > config.analysis.evolution_tol {
            return Err(Error::CrossCheck(format!("t = {t}: purity drifted by {drift:e} under unitary evolution")));
        }
        records.push(analyze_state(&rho, t, &config.bipartition, &config.measured, &config.analysis)?);
    }
    Ok(ExperimentRun {
        experiment: config.case.clone(),
        n_qubits: config.n_qubits,
        bipartition: config.bipartition.clone(),
        measured: config.measured.clone(),
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::evolve_matrix;
    use crate::spin::sigma_x;

    fn quick() -> AnalysisOptions {
        AnalysisOptions { discord: DiscordOptions { grid: 12, restarts: 2, ..Default::default() }, ..Default::default() }
    }

    #[test]
    fn h_s_properties() {
        let h = hamiltonian_s(0.7);
        assert!(h.is_hermitian(1e-15));
        assert!(h.trace().norm() < 1e-15);
    }

    #[test]
    fn numeric_evolution_matches_closed_form() {
        let h = hamiltonian_s(1.0);
        let rho0 = rho_mab_initial();
        for k in 0..=64 {
            let t = k as f64 * FRAC_PI_2 / 64.0;
            let m = evolve_matrix(rho0.matrix(), &h, t).unwrap();
            assert!(m.max_abs_diff(closed_form_rho_mab(t).matrix()) < 1e-10);
        }
        // chi only rescales time
        let m = evolve_matrix(rho0.matrix(), &hamiltonian_s(2.0), 0.1).unwrap();
        assert!(m.max_abs_diff(closed_form_rho_mab(0.2).matrix()) < 1e-10);
    }

    #[test]
    fn single_spin_means_vanish() {
        for k in 0..=32 {
            let rho = closed_form_rho_ab(k as f64 * PI / 64.0);
            for q in 0..2 {
                for a in Axis::ALL {
                    assert!(rho.expect(&spin_op(a, q, 2)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn closed_form_endpoints() {
        let rho0 = closed_form_rho_ab(0.0);
        let expected = (&CMat::identity(4) + &crate::qmath::kron(&sigma_x(), &sigma_x()).scale_re(4.0)).scale_re(0.25);
        assert!(rho0.matrix().max_abs_diff(&expected) < 1e-14);
        assert!((closed_form_rho_ab(PI / 8.0).purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hamiltonian_n_diagonal_case() {
        let mut cfg = preset("i").unwrap();
        cfg.omega = vec![0.0, 0.0];
        cfg.lambda = vec![vec![0.0; 2]; 2];
        cfg.big_omega = vec![1.0, 3.0];
        let h = hamiltonian_n(&cfg).unwrap();
        // diag entries -(+-1/2 * 1 +- 1/2 * 3)
        let d: Vec<f64> = h.diagonal().iter().map(|z| z.re).collect();
        assert_eq!(d, vec![2.0, -1.0, 1.0, -2.0]);
        assert!(h.is_hermitian(0.0));
    }

    #[test]
    fn hamiltonian_n_matches_two_qubit_form() {
        // H'_II = w1 s1x + w2 s2x - sum Omega_i s_iz + (pi J / 2) s1z s2z with lambda = pi J / 2
        let cfg = preset("ii").unwrap();
        let h = hamiltonian_n(&cfg).unwrap();
        let j_fp = 2.0 * cfg.lambda[0][1] / PI;
        let z = |q| spin_op(Axis::Z, q, 2);
        let x = |q| spin_op(Axis::X, q, 2);
        let mut expected = z(0).matmul(&z(1)).scale_re(0.5 * PI * j_fp);
        for i in 0..2 {
            expected = &expected + &x(i).scale_re(cfg.omega[i]);
            expected = &expected - &z(i).scale_re(cfg.big_omega[i]);
        }
        assert!(h.max_abs_diff(&expected) < 1e-9);
    }

    #[test]
    fn hamiltonian_i_is_the_coupling_part_of_h_n() {
        let (j_am, j_bm, j_ab) = (120.0, -80.0, 35.0);
        let mut cfg = preset("A").unwrap();
        cfg.omega = vec![0.0; 3];
        cfg.big_omega = vec![0.0; 3];
        let l = |j: f64| PI * j / 2.0;
        cfg.lambda = vec![vec![0.0, l(j_am), l(j_bm)], vec![l(j_am), 0.0, l(j_ab)], vec![l(j_bm), l(j_ab), 0.0]];
        let h = hamiltonian_n(&cfg).unwrap();
        assert!(h.max_abs_diff(&hamiltonian_i(j_am, j_bm, j_ab)) < 1e-12);
    }

    #[test]
    fn preset_constants() {
        let two_pi = 2.0 * PI;
        let i = preset("i").unwrap();
        assert_eq!(i.lambda[0][1], two_pi * 868.0);
        assert_eq!(i.big_omega, vec![two_pi * 868.0 / 2.0; 2]);
        assert_eq!(i.omega, vec![two_pi * 217.0; 2]);
        assert_eq!(i.epsilon, 1e-4);
        assert_eq!(i.measured, vec![0]);
        let ii = preset("ii").unwrap();
        assert_eq!(ii.omega, vec![two_pi * 217.0 / 4.0, two_pi * 217.0]);
        let iii = preset("iii").unwrap();
        assert_eq!(iii.omega, vec![two_pi * 217.0, two_pi * 217.0 / 4.0]);

        let a = preset("A").unwrap();
        assert_eq!(a.lambda[0][1], two_pi * 224.7);
        assert_eq!(a.lambda[0][2], two_pi * -311.1);
        assert_eq!(a.lambda[1][2], two_pi * 49.7);
        assert_eq!(a.big_omega[0], (a.lambda[0][1] + a.lambda[0][2]) / 2.0);
        assert_eq!(a.big_omega[1], (a.lambda[0][1] + a.lambda[1][2]) / 2.0);
        assert_eq!(a.big_omega[2], (a.lambda[0][2] + a.lambda[1][2]) / 2.0);
        assert_eq!(a.omega, vec![two_pi * 10.0; 3]);
        let b = preset("B").unwrap();
        assert_eq!(b.omega[0], two_pi * 50.0);
        assert_eq!(b.omega[0], 5.0 * b.omega[1]);
        assert_eq!(b.omega[1], b.omega[2]);
        let c = preset("C").unwrap();
        assert_eq!(c.omega[1], two_pi * 50.0);
        assert_eq!(c.bipartition.to_string(), "1|0,2");
        assert_eq!(c.measured, vec![0, 2]);
        let d = preset("D").unwrap();
        assert_eq!(d.bipartition.to_string(), "0,1|2");
        assert_eq!(d.measured, vec![2]);
        assert_eq!(d.omega[2], d.omega[0] / 5.0);
        for label in PRESET_LABELS {
            preset(label).unwrap().validate().unwrap();
        }
        let err = preset("E").unwrap_err().to_string();
        assert!(err.contains("i, ii, iii, A, B, C, D"), "{err}");
    }

    #[test]
    fn config_validation() {
        let mut cfg = preset("A").unwrap();
        cfg.lambda[0][1] = 1.0;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let mut cfg = preset("i").unwrap();
        cfg.epsilon = 2.0;
        assert!(cfg.validate().is_err());
        let mut cfg = preset("i").unwrap();
        cfg.t_grid = Grid::Explicit(vec![0.0, 0.002, 0.001]);
        assert!(cfg.validate().is_err());
        let bad = ExperimentIConfig { chi_t_grid: Grid::Explicit(vec![0.0, 2.0]), ..Default::default() };
        assert!(bad.validate().is_err());
        assert_eq!(ExperimentIConfig::default().validate().unwrap().len(), 65);
        assert!((ExperimentIConfig::default().validate().unwrap()[16] - PI / 8.0).abs() < 1e-15);
    }

    #[test]
    fn config_json_defaults() {
        let text = r#"{"case":"x","n_qubits":2,"omega":[1,1],"Omega":[0,0],"lambda":[[0,1],[1,0]],
            "bipartition":"0|1","measured":[0]}"#;
        let cfg: ExperimentNConfig = serde_json::from_str(text).unwrap();
        assert_eq!(cfg.epsilon, 1e-4);
        assert_eq!(cfg.t_grid.values().len(), 101);
        let grid: Grid = serde_json::from_str("[0, 0.5, 1]").unwrap();
        assert_eq!(grid.values(), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn experiment_one_anchor_points() {
        let cfg = ExperimentIConfig {
            chi_t_grid: Grid::Explicit(vec![0.0, PI / 8.0, FRAC_PI_2]),
            analysis: AnalysisOptions::default(),
        };
        let run = run_experiment_i(&cfg).unwrap();
        let r0 = &run.records[0];
        assert!((r0.xi_tei() - 1.0 / 9.0).abs() < 1e-12);
        assert!(r0.negativity.abs() < 1e-12);
        assert!((r0.qmi - 1.0).abs() < 1e-9);
        let r1 = &run.records[1];
        assert!((r1.xi_tei() - 1.0 / 3.0).abs() < 1e-12);
        assert!((r1.negativity - 0.5).abs() < 1e-9);
        assert!((r1.qmi - 2.0).abs() < 1e-9);
        assert!((r1.discord_value() - 1.0).abs() < 1e-4);
        // period pi/2
        let r2 = &run.records[2];
        assert!((r2.xi_tei() - r0.xi_tei()).abs() < 1e-9);
        assert!((r2.qmi - r0.qmi).abs() < 1e-9);
        assert!((r2.discord_value() - r0.discord_value()).abs() < 1e-6);
        assert!(r2.tomogram.max_abs_diff(&r0.tomogram).unwrap() < 1e-9);
    }

    #[test]
    fn pure_instant_qmi_is_twice_entropy() {
        let rho = closed_form_rho_ab(PI / 8.0);
        let bip = Bipartition::new(&[0], &[1]).unwrap();
        let rec = analyze_state(&rho, 0.0, &bip, &[1], &quick()).unwrap();
        let sa = crate::measures::svne(&rho.reduce(&[0]).unwrap()).unwrap();
        assert!((rec.qmi - 2.0 * sa).abs() < 1e-9);
    }

    #[test]
    fn experiment_n_short_runs() {
        for label in ["i", "D"] {
            let mut cfg = preset(label).unwrap();
            cfg.t_grid = Grid::Uniform { start: 0.0, stop: 0.004, points: 3 };
            cfg.analysis = quick();
            let run = run_experiment_n(&cfg).unwrap();
            assert_eq!(run.records.len(), 3);
            let p0 = run.records[0].purity;
            for r in &run.records {
                assert!((r.purity - p0).abs() < 1e-10);
            }
        }
    }
}
