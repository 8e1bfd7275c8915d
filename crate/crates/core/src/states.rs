//! Validated qubit states and the constructors for every state the toolkit
//! works with.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};
use crate::qmath::{self, herm_eig, kron, kron_vec, CMat, C64, ONE, ZERO};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
/// Smallest eigenvalue still accepted as non-negative.
pub const PSD_TOL: f64 = -1e-9;
pub const NORM_TOL: f64 = 1e-10;

/// Hermitian, unit-trace, positive semidefinite state of `n_qubits` qubits.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: CMat,
}

impl DensityMatrix {
    pub fn new(matrix: CMat) -> Result<Self> {
        let n_qubits = qubits_for_dim(matrix.rows())?;
        if !matrix.is_square() {
            return Err(Error::Dimension("density matrix must be square".into()));
        }
        let defect = matrix.hermitian_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (defect {defect:e})")));
        }
        let tr = matrix.trace();
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace is {} + {}i, expected 1", tr.re, tr.im)));
        }
        let eig = herm_eig(&matrix)?;
        if eig.values[0] < PSD_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {:e}", eig.values[0])));
        }
        Ok(DensityMatrix { n_qubits, matrix })
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1 << n_qubits;
        DensityMatrix { n_qubits, matrix: CMat::identity(dim).scale_re(1.0 / dim as f64) }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn dims(&self) -> Vec<usize> {
        vec![2; self.n_qubits]
    }

    /// Re Tr(rho O)
    pub fn expect(&self, op: &CMat) -> f64 {
        self.matrix.trace_product_re(op)
    }

    pub fn purity(&self) -> f64 {
        self.matrix.trace_product_re(&self.matrix)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(herm_eig(&self.matrix)?.values)
    }

    /// Reduced state on the listed qubits (kept in ascending order).
    pub fn reduce(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let m = qmath::partial_trace(&self.matrix, &self.dims(), keep)?;
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        Ok(DensityMatrix { n_qubits: keep.len(), matrix: m })
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix { n_qubits: self.n_qubits + other.n_qubits, matrix: kron(&self.matrix, &other.matrix) }
    }

    /// Unitary evolution `e^{-iht} rho e^{iht}`; re-validates the result.
    pub fn evolve(&self, h: &CMat, t: f64) -> Result<DensityMatrix> {
        DensityMatrix::new(qmath::evolve_matrix(&self.matrix, h, t)?)
    }

    pub fn distance(&self, other: &DensityMatrix) -> f64 {
        self.matrix.frobenius_distance(&other.matrix)
    }
}

/// Unit-norm state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let n_qubits = qubits_for_dim(amplitudes.len())?;
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("state norm is {norm}, expected 1")));
        }
        Ok(PureState { n_qubits, amplitudes })
    }

    /// Normalizes before validating.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        PureState::new(amplitudes.into_iter().map(|z| z / norm).collect())
    }

    /// Computational basis state; `bits[0]` is the leftmost qubit, `true` = up.
    pub fn basis(bits: &[bool]) -> Self {
        let n = bits.len();
        let index = bits.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b));
        let mut amps = vec![ZERO; 1 << n];
        amps[index] = ONE;
        PureState { n_qubits: n, amplitudes: amps }
    }

    pub fn all_down(n: usize) -> Self {
        PureState::basis(&vec![false; n])
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    /// <self|other>
    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        PureState {
            n_qubits: self.n_qubits + other.n_qubits,
            amplitudes: kron_vec(&self.amplitudes, &other.amplitudes),
        }
    }

    pub fn projector(&self) -> CMat {
        CMat::outer(&self.amplitudes, &self.amplitudes)
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix { n_qubits: self.n_qubits, matrix: self.projector() }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }
}

fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::Dimension(format!("dimension {dim} is not 2^n for n >= 1")));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// (|down up> + |up down>)/sqrt2
pub fn bell_phi_plus() -> PureState {
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    PureState { n_qubits: 2, amplitudes: vec![ZERO, s, s, ZERO] }
}

/// (|down down> + |up up>)/sqrt2
pub fn bell_psi_plus() -> PureState {
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    PureState { n_qubits: 2, amplitudes: vec![s, ZERO, ZERO, s] }
}

/// +1/2 eigenstate of sigma_x, (|down> + |up>)/sqrt2.
pub fn x_plus() -> PureState {
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    PureState { n_qubits: 1, amplitudes: vec![s, s] }
}

/// -1/2 eigenstate of sigma_x, (|down> - |up>)/sqrt2.
pub fn x_minus() -> PureState {
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    PureState { n_qubits: 1, amplitudes: vec![s, -s] }
}

/// Tensor power of `cos(theta/2)|up> + e^{i phi} sin(theta/2)|down>`.
pub fn spin_coherent(theta: f64, phi: f64, n_qubits: usize) -> Result<PureState> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::InvalidArgument(format!("theta = {theta} outside [0, pi]")));
    }
    if !(0.0..2.0 * PI).contains(&phi) {
        return Err(Error::InvalidArgument(format!("phi = {phi} outside [0, 2pi)")));
    }
    if n_qubits == 0 {
        return Err(Error::InvalidArgument("need at least one qubit".into()));
    }
    Ok(spin_coherent_unchecked(theta, phi, n_qubits))
}

/// Same as [`spin_coherent`] for arbitrary real angles (used inside optimizers).
pub fn spin_coherent_unchecked(theta: f64, phi: f64, n_qubits: usize) -> PureState {
    let single = [C64::from_polar((theta / 2.0).sin(), phi), C64::new((theta / 2.0).cos(), 0.0)];
    let mut amps = vec![ONE];
    for _ in 0..n_qubits {
        amps = kron_vec(&amps, &single);
    }
    PureState { n_qubits, amplitudes: amps }
}

/// `(1-eps)/2^N I + eps |down...down><down...down|`
pub fn pseudo_pure(n_qubits: usize, epsilon: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidArgument(format!("purity parameter {epsilon} outside [0, 1]")));
    }
    if n_qubits == 0 {
        return Err(Error::InvalidArgument("need at least one qubit".into()));
    }
    let dim = 1 << n_qubits;
    let mut m = CMat::identity(dim).scale_re((1.0 - epsilon) / dim as f64);
    m[(0, 0)] += C64::new(epsilon, 0.0);
    Ok(DensityMatrix { n_qubits, matrix: m })
}

/// Closed-form purity of [`pseudo_pure`].
pub fn pseudo_pure_purity(n_qubits: usize, epsilon: f64) -> f64 {
    let dim = (1usize << n_qubits) as f64;
    (1.0 - epsilon).powi(2) / dim + epsilon * epsilon + 2.0 * epsilon * (1.0 - epsilon) / dim
}

/// `1/2 |phi+><phi+| (x) rho_M+ + 1/2 |psi+><psi+| (x) rho_M-`, qubit order (M, A, B),
/// with rho_M+- the sigma_x eigenprojectors.
pub fn rho_mab_initial() -> DensityMatrix {
    let first = kron(&x_plus().projector(), &bell_phi_plus().projector());
    let second = kron(&x_minus().projector(), &bell_psi_plus().projector());
    DensityMatrix { n_qubits: 3, matrix: (&first + &second).scale_re(0.5) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{sigma_x, spin_op, Axis};

    #[test]
    fn bell_states_orthogonal_and_related() {
        assert!(bell_phi_plus().inner(&bell_psi_plus()).norm() < 1e-15);
        // (2 s_x (x) I) |phi+> = |psi+>
        let xx = kron(&sigma_x(), &CMat::identity(2)).scale_re(2.0);
        let mapped = xx.apply(bell_phi_plus().amplitudes());
        for (a, b) in mapped.iter().zip(bell_psi_plus().amplitudes()) {
            assert!((a - b).norm() < 1e-15);
        }
        // s_x (x) s_x |phi+> = |phi+>/4
        let quarter = kron(&sigma_x(), &sigma_x()).apply(bell_phi_plus().amplitudes());
        for (a, b) in quarter.iter().zip(bell_phi_plus().amplitudes()) {
            assert!((a - b * 0.25).norm() < 1e-15);
        }
    }

    #[test]
    fn bell_marginals_are_maximally_mixed() {
        let half = CMat::identity(2).scale_re(0.5);
        for s in [bell_phi_plus(), bell_psi_plus()] {
            let rho = s.to_density();
            assert!(rho.reduce(&[0]).unwrap().matrix().max_abs_diff(&half) < 1e-15);
            assert!(rho.reduce(&[1]).unwrap().matrix().max_abs_diff(&half) < 1e-15);
        }
    }

    #[test]
    fn coherent_state_poles_and_equator() {
        let up = spin_coherent(0.0, 0.0, 2).unwrap();
        assert!((up.inner(&PureState::basis(&[true, true])).norm() - 1.0).abs() < 1e-15);

        let eq = spin_coherent(PI / 2.0, 0.0, 2).unwrap();
        let xp = x_plus().tensor(&x_plus());
        assert!((eq.inner(&xp).norm() - 1.0).abs() < 1e-14);

        let rho = spin_coherent(PI / 2.0, PI / 2.0, 1).unwrap().to_density();
        assert!((rho.expect(&spin_op(Axis::Y, 0, 1)) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn coherent_state_rejects_bad_angles() {
        assert!(spin_coherent(-0.1, 0.0, 2).is_err());
        assert!(spin_coherent(0.5, 2.0 * PI, 2).is_err());
        assert!(spin_coherent(0.5, 0.0, 0).is_err());
    }

    #[test]
    fn pseudo_pure_limits() {
        let pure = pseudo_pure(2, 1.0).unwrap();
        assert!((pure.purity() - 1.0).abs() < 1e-15);
        assert!(pure.matrix().max_abs_diff(&PureState::all_down(2).projector()) < 1e-15);
        let mixed = pseudo_pure(3, 0.0).unwrap();
        assert!((mixed.purity() - 0.125).abs() < 1e-15);
        assert!((pseudo_pure(2, 0.1).unwrap().purity() - (0.25 + 0.75 * 0.01)).abs() < 1e-15);
        assert!(pseudo_pure(2, 1.5).is_err());
        assert!(pseudo_pure(2, -0.1).is_err());
    }

    #[test]
    fn pseudo_pure_purity_formula() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = rng.gen_range(1..=3);
            let eps: f64 = rng.gen();
            let rho = pseudo_pure(n, eps).unwrap();
            assert!((rho.purity() - pseudo_pure_purity(n, eps)).abs() < 1e-12);
            DensityMatrix::new(rho.into_matrix()).unwrap();
        }
    }

    #[test]
    fn initial_mab_state() {
        let rho = rho_mab_initial();
        assert!((rho.matrix().trace() - ONE).norm() < 1e-15);
        let ev = rho.eigenvalues().unwrap();
        let rank = ev.iter().filter(|&&x| x > 1e-9).count();
        assert_eq!(rank, 2);
        // Tr_M -> (I + 4 s_x s_x)/4
        let ab = rho.reduce(&[1, 2]).unwrap();
        let expected = (&CMat::identity(4) + &kron(&sigma_x(), &sigma_x()).scale_re(4.0)).scale_re(0.25);
        assert!(ab.matrix().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn validation_rejects_bad_matrices() {
        assert!(DensityMatrix::new(CMat::identity(4)).is_err());
        assert!(DensityMatrix::new(CMat::from_real_diag(&[1.5, -0.5])).is_err());
        assert!(DensityMatrix::new(CMat::identity(3).scale_re(1.0 / 3.0)).is_err());
        let mut m = CMat::identity(2).scale_re(0.5);
        m[(0, 1)] = C64::new(0.1, 0.0);
        assert!(DensityMatrix::new(m).is_err());
        assert!(PureState::new(vec![ONE, ONE]).is_err());
    }
}
