//! Seeded random states for property checks and benchmarks.

use rand::Rng;

use crate::qmath::{kron, CMat, C64};
use crate::states::{DensityMatrix, PureState};

/// Standard normal via Box-Muller.
fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn gaussian_vector<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<C64> {
    (0..len).map(|_| C64::new(gaussian(rng), gaussian(rng))).collect()
}

/// Haar-random pure state.
pub fn pure_state<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> PureState {
    PureState::normalized(gaussian_vector(1 << n_qubits, rng)).expect("nonzero gaussian vector")
}

/// Mixed state `G G^dagger / Tr` with a `dim x rank` Ginibre matrix `G`.
pub fn density_matrix<R: Rng + ?Sized>(n_qubits: usize, rank: usize, rng: &mut R) -> DensityMatrix {
    let dim = 1 << n_qubits;
    let rank = rank.clamp(1, dim);
    let g = CMat::from_vec(dim, rank, gaussian_vector(dim * rank, rng)).expect("shape");
    let m = g.matmul(&g.dagger());
    let m = m.scale_re(1.0 / m.trace().re);
    // remove round-off asymmetry
    let m = (&m + &m.dagger()).scale_re(0.5);
    DensityMatrix::new(m).expect("Ginibre state is valid")
}

/// Full-rank state with probability 1/2, otherwise rank 1 or 2.
pub fn any_state<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> DensityMatrix {
    let dim = 1 << n_qubits;
    let rank = match rng.gen_range(0..4) {
        0 => 1,
        1 => 2,
        _ => dim,
    };
    density_matrix(n_qubits, rank, rng)
}

/// Tensor product of independent random single-qubit states.
pub fn product_state<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> DensityMatrix {
    let mut m = CMat::identity(1);
    for _ in 0..n_qubits {
        let rank = rng.gen_range(1..=2);
        m = kron(&m, density_matrix(1, rank, rng).matrix());
    }
    let sym = (&m + &m.dagger()).scale_re(0.5);
    DensityMatrix::new(sym).expect("product of valid states")
}

/// Product of two random states on `n_a` and `n_b` qubits.
pub fn bipartite_product<R: Rng + ?Sized>(n_a: usize, n_b: usize, rng: &mut R) -> DensityMatrix {
    any_state(n_a, rng).tensor(&any_state(n_b, rng))
}
