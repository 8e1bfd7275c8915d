//! Density-matrix reference measures: von Neumann entropy, quantum mutual
//! information, negativity and quantum discord.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::indicators::Bipartition;
use crate::optimize::{coordinate_descent, nelder_mead, CoordinateDescentOptions, NelderMeadOptions};
use crate::qmath::{herm_eig, kron, partial_transpose_many, permute_subsystems, CMat, C64, ZERO};
use crate::states::DensityMatrix;
use crate::tomography::rotation_u;

/// `-sum x log2 x` over the non-negative entries.
fn entropy_bits(values: &[f64]) -> f64 {
    -values.iter().filter(|&&x| x > 0.0).map(|&x| x * x.log2()).sum::<f64>()
}

/// von Neumann entropy in bits.
pub fn svne(rho: &DensityMatrix) -> Result<f64> {
    Ok(entropy_bits(&rho.eigenvalues()?))
}

/// `S_A + S_B - S_AB`.
pub fn qmi(rho: &DensityMatrix, bip: &Bipartition) -> Result<f64> {
    check_fit(rho, bip)?;
    let sa = svne(&rho.reduce(bip.a())?)?;
    let sb = svne(&rho.reduce(bip.b())?)?;
    Ok(sa + sb - svne(rho)?)
}

/// Sum of |negative eigenvalues| of the partial transpose over side A.
pub fn negativity(rho: &DensityMatrix, bip: &Bipartition) -> Result<f64> {
    negativity_transposing(rho, bip.a(), bip)
}

/// Same, transposing the listed side instead.
pub fn negativity_transposing(rho: &DensityMatrix, side: &[usize], bip: &Bipartition) -> Result<f64> {
    check_fit(rho, bip)?;
    let pt = partial_transpose_many(rho.matrix(), &rho.dims(), side)?;
    let ev = herm_eig(&pt)?.values;
    Ok(ev.iter().map(|l| 0.5 * (l.abs() - l)).sum())
}

fn check_fit(rho: &DensityMatrix, bip: &Bipartition) -> Result<()> {
    if bip.n_qubits() != rho.n_qubits() {
        return Err(Error::Dimension(format!("bipartition {bip} does not fit {} qubits", rho.n_qubits())));
    }
    Ok(())
}

/// Measurement family searched on a two-qubit measured side.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwoQubitMeasurement {
    /// Arbitrary rank-1 projective basis (4x4 unitary, 12 parameters).
    #[default]
    FullVonNeumann,
    /// Products of single-qubit projective measurements (4 parameters).
    LocalProduct,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiscordOptions {
    /// Points per angle of the single-qubit coarse grid.
    pub grid: usize,
    /// Number of grid points refined by Nelder-Mead.
    pub refine_best: usize,
    pub restarts: usize,
    pub seed: u64,
    pub two_qubit: TwoQubitMeasurement,
    /// Restart spread above which the result is flagged as not converged.
    pub spread_tol: f64,
}

impl Default for DiscordOptions {
    fn default() -> Self {
        DiscordOptions {
            grid: 32,
            refine_best: 3,
            restarts: 64,
            seed: 0x5eed,
            two_qubit: TwoQubitMeasurement::FullVonNeumann,
            spread_tol: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscordResult {
    /// Bits.
    pub value: f64,
    pub measured: Vec<usize>,
    pub method: String,
    /// Optimal measurement parameters (angles).
    pub parameters: Vec<f64>,
    /// Final objective of every local search, in start order.
    pub restart_values: Vec<f64>,
    pub spread: f64,
    pub converged: bool,
    pub evaluations: usize,
    pub seed: u64,
}

/// Conditional-entropy objective for rank-1 measurements on the first `dm`
/// basis levels of a state reordered as (measured, unmeasured).
struct Conditional {
    dm: usize,
    du: usize,
    /// `blocks[a * dm + b]` is the unmeasured-side block `<a| rho |b>`.
    blocks: Vec<CMat>,
}

impl Conditional {
    fn new(rho: &DensityMatrix, measured: &[usize]) -> Result<Self> {
        let n = rho.n_qubits();
        let unmeasured: Vec<usize> = (0..n).filter(|q| !measured.contains(q)).collect();
        let order: Vec<usize> = measured.iter().chain(&unmeasured).copied().collect();
        let m = permute_subsystems(rho.matrix(), &rho.dims(), &order)?;
        let dm = 1 << measured.len();
        let du = 1 << unmeasured.len();
        let mut blocks = Vec::with_capacity(dm * dm);
        for a in 0..dm {
            for b in 0..dm {
                blocks.push(CMat::from_fn(du, du, |i, j| m[(a * du + i, b * du + j)]));
            }
        }
        Ok(Conditional { dm, du, blocks })
    }

    /// `sum_j p_j S(rho_j)` for the orthonormal measurement vectors given as
    /// columns of `basis`.
    fn average_entropy(&self, basis: &CMat) -> f64 {
        let (dm, du) = (self.dm, self.du);
        let mut total = 0.0;
        for j in 0..dm {
            let mut sigma = CMat::zeros(du, du);
            for a in 0..dm {
                let va = basis[(a, j)].conj();
                if va == ZERO {
                    continue;
                }
                for b in 0..dm {
                    let w = va * basis[(b, j)];
                    if w == ZERO {
                        continue;
                    }
                    let blk = &self.blocks[a * dm + b];
                    for (s, v) in (0..du * du).zip(blk.as_slice()) {
                        sigma[(s / du, s % du)] += w * v;
                    }
                }
            }
            let p = sigma.trace().re;
            if p <= 0.0 {
                continue;
            }
            let mu = hermitian_eigenvalues(&sigma);
            total += entropy_bits(&mu) + p * p.log2();
        }
        total
    }
}

fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    if m.rows() == 2 {
        let a = m[(0, 0)].re;
        let d = m[(1, 1)].re;
        let b = 0.5 * (m[(0, 1)] + m[(1, 0)].conj());
        let mean = 0.5 * (a + d);
        let r = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        vec![mean - r, mean + r]
    } else {
        let h = (m + &m.dagger()).scale_re(0.5);
        herm_eig(&h).map(|e| e.values).unwrap_or_else(|_| h.diagonal().iter().map(|z| z.re).collect())
    }
}

/// Complex Givens rotation on levels `i`, `j` of a `dim`-level space.
fn givens(dim: usize, i: usize, j: usize, theta: f64, phi: f64) -> CMat {
    let mut g = CMat::identity(dim);
    let (s, c) = theta.sin_cos();
    g[(i, i)] = C64::new(c, 0.0);
    g[(j, j)] = C64::new(c, 0.0);
    g[(i, j)] = -C64::from_polar(s, -phi);
    g[(j, i)] = C64::from_polar(s, phi);
    g
}

/// 4x4 unitary from six Givens rotations, parameters `(theta_k, phi_k)`.
pub fn givens_unitary(params: &[f64]) -> CMat {
    assert_eq!(params.len(), 12);
    const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    PAIRS
        .iter()
        .enumerate()
        .fold(CMat::identity(4), |u, (k, &(i, j))| u.matmul(&givens(4, i, j, params[2 * k], params[2 * k + 1])))
}

fn local_product_basis(params: &[f64]) -> CMat {
    kron(&rotation_u(params[0], params[1]), &rotation_u(params[2], params[3]))
}

/// Discord with the listed qubits measured; in the `D(X:Y)` label these are `Y`.
pub fn discord(rho: &DensityMatrix, measured: &[usize], opts: &DiscordOptions) -> Result<DiscordResult> {
    let n = rho.n_qubits();
    let mut measured = measured.to_vec();
    measured.sort_unstable();
    measured.dedup();
    if measured.is_empty() || measured.len() > 2 || measured.len() >= n || measured.iter().any(|&q| q >= n) {
        return Err(Error::InvalidArgument(format!(
            "discord needs 1 or 2 measured qubits out of {n}, got {measured:?}"
        )));
    }
    let s_measured = svne(&rho.reduce(&measured)?)?;
    let s_total = svne(rho)?;
    let cond = Conditional::new(rho, &measured)?;
    let search = if measured.len() == 1 {
        search_single(&cond, opts)
    } else {
        search_pair(&cond, opts)
    };
    let spread = search.restart_values.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
        - search.restart_values.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    Ok(DiscordResult {
        value: s_measured - s_total + search.best.value,
        measured,
        method: search.method.to_string(),
        parameters: search.best.x,
        spread,
        converged: spread <= opts.spread_tol && search.all_converged,
        restart_values: search.restart_values,
        evaluations: search.evaluations,
        seed: opts.seed,
    })
}

struct Search {
    method: &'static str,
    best: crate::optimize::Minimum,
    restart_values: Vec<f64>,
    evaluations: usize,
    all_converged: bool,
}

fn search_single(cond: &Conditional, opts: &DiscordOptions) -> Search {
    let mut objective = |x: &[f64]| cond.average_entropy(&rotation_u(x[0], x[1]));
    let g = opts.grid.max(2);
    let mut grid: Vec<(f64, f64, f64)> = Vec::with_capacity(g * g);
    for i in 0..g {
        let theta = PI * i as f64 / (g - 1) as f64;
        for j in 0..g {
            let phi = PI * j as f64 / g as f64;
            grid.push((objective(&[theta, phi]), theta, phi));
        }
    }
    grid.sort_by(|a, b| a.0.total_cmp(&b.0));
    let nm = NelderMeadOptions { initial_step: PI / g as f64, ..Default::default() };
    let mut evaluations = grid.len();
    let mut best: Option<crate::optimize::Minimum> = None;
    let mut restart_values = Vec::new();
    let mut all_converged = true;
    for &(_, theta, phi) in grid.iter().take(opts.refine_best.max(1)) {
        let m = nelder_mead(&mut objective, &[theta, phi], nm);
        evaluations += m.evaluations;
        all_converged &= m.converged;
        restart_values.push(m.value);
        if best.as_ref().is_none_or(|b| m.value < b.value) {
            best = Some(m);
        }
    }
    Search { method: "grid+nelder-mead", best: best.expect("at least one refinement"), restart_values, evaluations, all_converged }
}

fn search_pair(cond: &Conditional, opts: &DiscordOptions) -> Search {
    let (n_params, method): (usize, &'static str) = match opts.two_qubit {
        TwoQubitMeasurement::FullVonNeumann => (12, "full-von-neumann"),
        TwoQubitMeasurement::LocalProduct => (4, "local-product"),
    };
    let full = opts.two_qubit == TwoQubitMeasurement::FullVonNeumann;
    // the objective is an entropy of order one, evaluated to ~1e-14
    let local = CoordinateDescentOptions { rel_improvement: 1e-13, ..Default::default() };
    let mut objective = |x: &[f64]| {
        let basis = if full { givens_unitary(x) } else { local_product_basis(x) };
        cond.average_entropy(&basis)
    };
    let mut evaluations = 0;
    let mut best: Option<crate::optimize::Minimum> = None;
    let mut restart_values = Vec::new();
    let mut all_converged = true;
    for r in 0..opts.restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(r as u64);
        let x0: Vec<f64> = (0..n_params).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
        let m = coordinate_descent(&mut objective, &x0, local);
        evaluations += m.evaluations;
        all_converged &= m.converged;
        restart_values.push(m.value);
        if best.as_ref().is_none_or(|b| m.value < b.value) {
            best = Some(m);
        }
    }
    Search { method, best: best.expect("at least one restart"), restart_values, evaluations, all_converged }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::closed_form_rho_ab;
    use crate::random;
    use crate::states::{bell_phi_plus, bell_psi_plus};
    use rand::SeedableRng;

    fn ab() -> Bipartition {
        "0|1".parse().unwrap()
    }

    /// Dense-grid oracle over single-qubit projectors on qubit `q` of a two-qubit state.
    fn grid_oracle(rho: &DensityMatrix, q: usize, steps: usize) -> f64 {
        let cond = Conditional::new(rho, &[q]).unwrap();
        let mut best = f64::INFINITY;
        for i in 0..=steps {
            for j in 0..steps {
                let (t, p) = (PI * i as f64 / steps as f64, 2.0 * PI * j as f64 / steps as f64);
                best = best.min(cond.average_entropy(&rotation_u(t, p)));
            }
        }
        svne(&rho.reduce(&[q]).unwrap()).unwrap() - svne(rho).unwrap() + best
    }

    #[test]
    fn entropy_examples() {
        assert!(svne(&bell_phi_plus().to_density()).unwrap().abs() < 1e-12);
        assert!((svne(&DensityMatrix::maximally_mixed(1)).unwrap() - 1.0).abs() < 1e-12);
        assert!((svne(&closed_form_rho_ab(0.0)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qmi_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        assert!(qmi(&random::product_state(2, &mut rng), &ab()).unwrap().abs() < 1e-9);
        assert!((qmi(&bell_psi_plus().to_density(), &ab()).unwrap() - 2.0).abs() < 1e-12);
        assert!((qmi(&closed_form_rho_ab(PI / 8.0), &ab()).unwrap() - 2.0).abs() < 1e-9);
        assert!((qmi(&closed_form_rho_ab(0.0), &ab()).unwrap() - 1.0).abs() < 1e-9);
        for _ in 0..10 {
            let psi = random::pure_state(3, &mut rng).to_density();
            let bip: Bipartition = "0|1,2".parse().unwrap();
            let sa = svne(&psi.reduce(&[0]).unwrap()).unwrap();
            assert!((qmi(&psi, &bip).unwrap() - 2.0 * sa).abs() < 1e-9);
        }
    }

    #[test]
    fn negativity_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        assert!(negativity(&random::product_state(2, &mut rng), &ab()).unwrap().abs() < 1e-12);
        assert!((negativity(&bell_phi_plus().to_density(), &ab()).unwrap() - 0.5).abs() < 1e-12);
        assert!(negativity(&closed_form_rho_ab(0.0), &ab()).unwrap().abs() < 1e-12);
        let pt = partial_transpose_many(closed_form_rho_ab(0.0).matrix(), &[2, 2], &[0]).unwrap();
        let ev = herm_eig(&pt).unwrap().values;
        for (got, want) in ev.iter().zip([0.0, 0.0, 0.5, 0.5]) {
            assert!((got - want).abs() < 1e-12);
        }
        for _ in 0..10 {
            let rho = random::any_state(3, &mut rng);
            let bip: Bipartition = "1|0,2".parse().unwrap();
            let a = negativity_transposing(&rho, bip.a(), &bip).unwrap();
            let b = negativity_transposing(&rho, bip.b(), &bip).unwrap();
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn discord_bell_and_product() {
        let opts = DiscordOptions::default();
        for q in [0, 1] {
            let d = discord(&bell_phi_plus().to_density(), &[q], &opts).unwrap();
            assert!((d.value - 1.0).abs() < 1e-4, "{d:?}");
        }
        let d = discord(&closed_form_rho_ab(PI / 8.0), &[1], &opts).unwrap();
        assert!((d.value - 1.0).abs() < 1e-4);
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let d = discord(&random::product_state(2, &mut rng), &[1], &opts).unwrap();
        assert!(d.value.abs() < 1e-6);
    }

    #[test]
    fn discord_matches_dense_grid_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let opts = DiscordOptions::default();
        for _ in 0..8 {
            let rho = random::any_state(2, &mut rng);
            let d = discord(&rho, &[1], &opts).unwrap();
            let oracle = grid_oracle(&rho, 1, 200);
            // the optimizer refines past the grid, so it can only be lower
            assert!(d.value <= oracle + 1e-9, "{} vs {}", d.value, oracle);
            assert!(oracle - d.value < 1e-3);
            assert!(d.value >= -1e-6);
            assert!(d.value <= svne(&rho.reduce(&[1]).unwrap()).unwrap() + 1e-6);
        }
    }

    #[test]
    fn discord_of_classical_quantum_state_vanishes() {
        // sum_k p_k |k><k| (x) rho_k with the measured qubit classical
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let r0 = random::any_state(1, &mut rng);
        let r1 = random::any_state(1, &mut rng);
        let m = &kron(&CMat::from_real_diag(&[0.3, 0.0]), r0.matrix())
            + &kron(&CMat::from_real_diag(&[0.0, 0.7]), r1.matrix());
        let rho = DensityMatrix::new(m).unwrap();
        let d = discord(&rho, &[0], &DiscordOptions::default()).unwrap();
        assert!(d.value.abs() < 1e-8, "{d:?}");
    }

    #[test]
    fn discord_two_qubit_side() {
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        let opts = DiscordOptions { restarts: 8, ..Default::default() };
        // pure global state: discord equals the entanglement entropy
        let psi = random::pure_state(3, &mut rng).to_density();
        let d = discord(&psi, &[1, 2], &opts).unwrap();
        let s0 = svne(&psi.reduce(&[0]).unwrap()).unwrap();
        assert!((d.value - s0).abs() < 1e-6, "{} vs {}", d.value, s0);

        let rho = random::any_state(3, &mut rng);
        let full = discord(&rho, &[0, 2], &opts).unwrap();
        let local = discord(&rho, &[0, 2], &DiscordOptions { two_qubit: TwoQubitMeasurement::LocalProduct, ..opts })
            .unwrap();
        assert_eq!(full.restart_values.len(), 8);
        assert!(full.value <= local.value + 1e-6);
        assert!(full.value >= -1e-6);
        assert!(full.value <= svne(&rho.reduce(&[0, 2]).unwrap()).unwrap() + 1e-6);

        let prod = random::bipartite_product(1, 2, &mut rng);
        assert!(discord(&prod, &[1, 2], &opts).unwrap().value.abs() < 1e-6);
    }

    #[test]
    fn discord_is_seed_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let rho = random::any_state(3, &mut rng);
        let opts = DiscordOptions { restarts: 4, ..Default::default() };
        let a = discord(&rho, &[0, 1], &opts).unwrap();
        let b = discord(&rho, &[0, 1], &opts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn givens_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(38);
        let p: Vec<f64> = (0..12).map(|_| rng.gen_range(0.0..6.0)).collect();
        let u = givens_unitary(&p);
        assert!(u.dagger().matmul(&u).max_abs_diff(&CMat::identity(4)) < 1e-14);
    }

    #[test]
    fn discord_argument_checks() {
        let rho = bell_phi_plus().to_density();
        let opts = DiscordOptions::default();
        assert!(discord(&rho, &[], &opts).is_err());
        assert!(discord(&rho, &[0, 1], &opts).is_err());
        assert!(discord(&rho, &[2], &opts).is_err());
    }
}
