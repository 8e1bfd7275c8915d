//! First- and second-order spin squeezing from collective-spin moments, which
//! can come from a density matrix or from a tomogram alone.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indicators::slice_entropy;
use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::qmath::{anticommutator_half, herm_eig, CMat};
use crate::spin::{Axis, CollectiveSpin};
use crate::states::{spin_coherent_unchecked, DensityMatrix};
use crate::tomography::{Axes, Tomogram};

pub type Vec3 = [f64; 3];

/// Below this |<J>| the mean spin direction is undefined.
pub const NULL_MEAN_TOL: f64 = 1e-9;
/// Below this |v1 x T v1| any v2 orthogonal to v1 satisfies the constraint.
pub const DEGENERATE_PAIR_TOL: f64 = 1e-12;

/// Anything that yields `Re Tr(rho O)` for Hermitian `O`.
pub trait ExpectationSource {
    fn n_qubits(&self) -> usize;
    fn expect(&self, op: &CMat) -> Result<f64>;
}

impl ExpectationSource for DensityMatrix {
    fn n_qubits(&self) -> usize {
        DensityMatrix::n_qubits(self)
    }
    fn expect(&self, op: &CMat) -> Result<f64> {
        Ok(DensityMatrix::expect(self, op))
    }
}

impl ExpectationSource for Tomogram {
    fn n_qubits(&self) -> usize {
        Tomogram::n_qubits(self)
    }
    fn expect(&self, op: &CMat) -> Result<f64> {
        self.expect_operator(op)
    }
}

/// Upper-triangle index pairs of a symmetric 3x3 matrix.
const PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

fn pair_index(a: usize, b: usize) -> usize {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    PAIRS.iter().position(|&p| p == (a, b)).expect("valid pair")
}

/// Collective-spin moments up to fourth order.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinMoments {
    pub n_qubits: usize,
    /// `<J_a>`
    pub mean: Vec3,
    /// `T_ab = <(J_a J_b + J_b J_a)/2>`
    pub second: [[f64; 3]; 3],
    /// `<(S_p S_q + S_q S_p)/2>` over the symmetric pairs `S_p = (J_a J_b + J_b J_a)/2`.
    pub fourth: Option<[[f64; 6]; 6]>,
}

impl SpinMoments {
    pub fn from_source<S: ExpectationSource + ?Sized>(src: &S, with_fourth: bool) -> Result<Self> {
        let n = src.n_qubits();
        let j = CollectiveSpin::new(n);
        let mut mean = [0.0; 3];
        for (a, m) in mean.iter_mut().enumerate() {
            *m = src.expect(&j.components[a])?;
        }
        let s_ops: Vec<CMat> =
            PAIRS.iter().map(|&(a, b)| anticommutator_half(&j.components[a], &j.components[b])).collect();
        let mut second = [[0.0; 3]; 3];
        for (p, &(a, b)) in PAIRS.iter().enumerate() {
            let v = src.expect(&s_ops[p])?;
            second[a][b] = v;
            second[b][a] = v;
        }
        let fourth = if with_fourth {
            let mut f = [[0.0; 6]; 6];
            for p in 0..6 {
                for q in p..6 {
                    let v = src.expect(&anticommutator_half(&s_ops[p], &s_ops[q]))?;
                    f[p][q] = v;
                    f[q][p] = v;
                }
            }
            Some(f)
        } else {
            None
        };
        Ok(SpinMoments { n_qubits: n, mean, second, fourth })
    }

    /// `C = T - <J><J>^T`
    pub fn covariance(&self) -> [[f64; 3]; 3] {
        let mut c = self.second;
        for (a, row) in c.iter_mut().enumerate() {
            for (b, v) in row.iter_mut().enumerate() {
                *v -= self.mean[a] * self.mean[b];
            }
        }
        c
    }

    pub fn mean_direction(&self) -> Option<Vec3> {
        let norm = dot(&self.mean, &self.mean).sqrt();
        (norm >= NULL_MEAN_TOL).then(|| scale(&self.mean, 1.0 / norm))
    }

    /// `<(J.v)^2> - <J.v>^2`
    pub fn variance_along(&self, v: &Vec3) -> f64 {
        quad(&self.covariance(), v, v)
    }

    /// `<J_(v1 v2)> = v1^T T v2`
    pub fn cal_j(&self, v1: &Vec3, v2: &Vec3) -> f64 {
        quad(&self.second, v1, v2)
    }

    /// `Var(J_(v1 v2))`; needs fourth moments.
    pub fn cal_j_variance(&self, v1: &Vec3, v2: &Vec3) -> Result<f64> {
        let f = self.fourth.as_ref().ok_or_else(|| Error::InvalidArgument("fourth moments not computed".into()))?;
        let mut w = [0.0; 6];
        for a in 0..3 {
            for b in 0..3 {
                w[pair_index(a, b)] += v1[a] * v2[b];
            }
        }
        let mut second = 0.0;
        for p in 0..6 {
            for q in 0..6 {
                second += w[p] * w[q] * f[p][q];
            }
        }
        let mean = self.cal_j(v1, v2);
        Ok(second - mean * mean)
    }
}

fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn scale(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn mat_vec(m: &[[f64; 3]; 3], v: &Vec3) -> Vec3 {
    [dot(&m[0], v), dot(&m[1], v), dot(&m[2], v)]
}

fn quad(m: &[[f64; 3]; 3], u: &Vec3, v: &Vec3) -> f64 {
    dot(u, &mat_vec(m, v))
}

/// Some unit vector orthogonal to `v`.
fn orthogonal_unit(v: &Vec3) -> Vec3 {
    let pick = if v[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let c = cross(v, &pick);
    scale(&c, 1.0 / dot(&c, &c).sqrt())
}

fn seeded_offset(seed: u64, period: f64) -> f64 {
    ChaCha8Rng::seed_from_u64(seed).gen_range(0.0..period)
}

/// `n` Fibonacci-lattice points on the upper hemisphere, azimuth shifted by
/// a seed-derived offset. Antipodal directions are redundant for every
/// quadratic quantity here, so the hemisphere suffices.
pub fn fibonacci_hemisphere(n: usize, seed: u64) -> Vec<Vec3> {
    let golden = PI * (3.0 - 5f64.sqrt());
    let offset = seeded_offset(seed, 2.0 * PI);
    (0..n)
        .map(|k| {
            let z = 1.0 - (k as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * k as f64 + offset;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// `n` equally spaced directions on the half great circle orthogonal to `axis`.
pub fn perpendicular_circle(axis: &Vec3, n: usize, seed: u64) -> Vec<Vec3> {
    let e1 = orthogonal_unit(axis);
    let e2 = cross(axis, &e1);
    let offset = seeded_offset(seed, PI / n as f64);
    (0..n)
        .map(|k| {
            let (s, c) = (offset + PI * k as f64 / n as f64).sin_cos();
            [c * e1[0] + s * e2[0], c * e1[1] + s * e2[1], c * e1[2] + s * e2[2]]
        })
        .collect()
}

fn smallest_eigen_sym3(m: &[[f64; 3]; 3]) -> (f64, Vec3) {
    let cm = CMat::from_fn(3, 3, |r, c| crate::qmath::C64::new(m[r][c], 0.0));
    let e = herm_eig(&cm).expect("real symmetric");
    let v = e.vectors.column(0);
    // real symmetric: fix the global phase so the vector is real
    let k = (0..3).max_by(|&a, &b| v[a].norm().total_cmp(&v[b].norm())).expect("3 entries");
    let phase = v[k].conj() / v[k].norm();
    let r: Vec3 = [(v[0] * phase).re, (v[1] * phase).re, (v[2] * phase).re];
    let norm = dot(&r, &r).sqrt();
    (e.values[0], scale(&r, 1.0 / norm))
}

/// Exact minimum of `v^T C v` over unit `v` orthogonal to the mean spin (all
/// unit `v` when the mean is null).
pub fn exact_min_variance(moments: &SpinMoments) -> (f64, Vec3) {
    let c = moments.covariance();
    match moments.mean_direction() {
        None => smallest_eigen_sym3(&c),
        Some(n) => {
            let e1 = orthogonal_unit(&n);
            let e2 = cross(&n, &e1);
            let (a, b, d) = (quad(&c, &e1, &e1), quad(&c, &e1, &e2), quad(&c, &e2, &e2));
            let mean = 0.5 * (a + d);
            let r = (0.25 * (a - d) * (a - d) + b * b).sqrt();
            let lam = mean - r;
            // eigenvector of [[a, b], [b, d]] for lam
            let (x, y) = if b.abs() > 1e-15 { (b, lam - a) } else if a <= d { (1.0, 0.0) } else { (0.0, 1.0) };
            let norm = (x * x + y * y).sqrt();
            let v = [
                (x * e1[0] + y * e2[0]) / norm,
                (x * e1[1] + y * e2[1]) / norm,
                (x * e1[2] + y * e2[2]) / norm,
            ];
            (lam, v)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SqueezingOptions {
    pub n_samples: usize,
    pub n_pairs: usize,
    pub seed: u64,
}

impl Default for SqueezingOptions {
    fn default() -> Self {
        SqueezingOptions { n_samples: 800, n_pairs: 320, seed: 0x5eed }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FirstOrder {
    pub var_min: f64,
    pub direction: Vec3,
    /// Exact minimum over the same set of directions.
    pub var_min_exact: f64,
    pub n_samples: usize,
}

/// Sampled minimum variance orthogonal to the mean spin direction.
pub fn min_variance_first_order(moments: &SpinMoments, n_samples: usize, seed: u64) -> Result<FirstOrder> {
    if n_samples < 2 {
        return Err(Error::InvalidArgument("first-order squeezing needs at least 2 samples".into()));
    }
    let directions = match moments.mean_direction() {
        None => fibonacci_hemisphere(n_samples, seed),
        Some(n) => perpendicular_circle(&n, n_samples, seed),
    };
    let c = moments.covariance();
    let (var_min, direction) = directions
        .iter()
        .map(|v| (quad(&c, v, v), *v))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("nonempty sample");
    Ok(FirstOrder { var_min, direction, var_min_exact: exact_min_variance(moments).0, n_samples })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SecondOrder {
    pub var_min: f64,
    pub pair: (Vec3, Vec3),
    /// Largest `|<J_(v1 v2)>|` over all sampled pairs.
    pub max_abs_mean: f64,
    pub n_pairs: usize,
}

/// The partner `v2` of `v1`: orthogonal to both `v1` and `T v1`, so that
/// `<J_(v1 v2)> = v1^T T v2 = 0`.
pub fn partner_direction(second: &[[f64; 3]; 3], v1: &Vec3) -> Vec3 {
    let c = cross(v1, &mat_vec(second, v1));
    let norm = dot(&c, &c).sqrt();
    if norm < DEGENERATE_PAIR_TOL {
        orthogonal_unit(v1)
    } else {
        scale(&c, 1.0 / norm)
    }
}

/// Sampled minimum of `Var(J_(v1 v2))` over constrained pairs.
pub fn min_variance_second_order(moments: &SpinMoments, n_pairs: usize, seed: u64) -> Result<SecondOrder> {
    if moments.n_qubits != 2 {
        return Err(Error::InvalidArgument("second-order squeezing is defined for two qubits".into()));
    }
    if n_pairs < 1 {
        return Err(Error::InvalidArgument("second-order squeezing needs at least 1 pair".into()));
    }
    let mut best: Option<(f64, (Vec3, Vec3))> = None;
    let mut max_abs_mean = 0.0f64;
    for v1 in fibonacci_hemisphere(n_pairs, seed) {
        let v2 = partner_direction(&moments.second, &v1);
        max_abs_mean = max_abs_mean.max(moments.cal_j(&v1, &v2).abs());
        let var = moments.cal_j_variance(&v1, &v2)?;
        if best.as_ref().is_none_or(|b| var < b.0) {
            best = Some((var, (v1, v2)));
        }
    }
    let (var_min, pair) = best.expect("nonempty sample");
    Ok(SecondOrder { var_min, pair, max_abs_mean, n_pairs })
}

/// Minimum of the sampled second-order variance over two-qubit spin coherent
/// states, the no-squeezing reference.
pub fn coherent_reference_second_order(n_pairs: usize, seed: u64) -> Result<f64> {
    let mut f = |x: &[f64]| {
        let rho = spin_coherent_unchecked(x[0], x[1], 2).to_density();
        SpinMoments::from_source(&rho, true)
            .and_then(|m| min_variance_second_order(&m, n_pairs, seed))
            .map(|s| s.var_min)
            .unwrap_or(f64::INFINITY)
    };
    let mut best = f64::INFINITY;
    for start in [[0.3, 0.2], [PI / 2.0, 0.0], [2.0, 4.0]] {
        let opts = NelderMeadOptions { initial_step: 0.4, diameter_tol: 1e-6, max_evaluations: 400 };
        best = best.min(nelder_mead(&mut f, &start, opts).value);
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SqueezingReport {
    /// `None` when the mean spin vanishes.
    pub mean_spin_direction: Option<Vec3>,
    pub first: FirstOrder,
    /// `1 - (4/N) var_min_1`
    pub extent_1: f64,
    pub second: Option<SecondOrder>,
    /// `1 - 8 var_min_2` (two qubits only)
    pub extent_2: Option<f64>,
}

/// Full squeezing analysis; second order is included for two qubits.
pub fn squeezing_report<S: ExpectationSource + ?Sized>(src: &S, opts: &SqueezingOptions) -> Result<SqueezingReport> {
    let n = src.n_qubits();
    let moments = SpinMoments::from_source(src, n == 2)?;
    report_from_moments(&moments, opts)
}

pub fn report_from_moments(moments: &SpinMoments, opts: &SqueezingOptions) -> Result<SqueezingReport> {
    let n = moments.n_qubits;
    let first = min_variance_first_order(moments, opts.n_samples, opts.seed)?;
    let extent_1 = 1.0 - 4.0 / n as f64 * first.var_min;
    let second = if n == 2 { Some(min_variance_second_order(moments, opts.n_pairs, opts.seed)?) } else { None };
    let extent_2 = second.as_ref().map(|s| 1.0 - 8.0 * s.var_min);
    Ok(SqueezingReport { mean_spin_direction: moments.mean_direction(), first, extent_1, second, extent_2 })
}

/// Squeezing computed from tomogram moments only.
pub fn squeezing_from_tomogram(tomogram: &Tomogram, opts: &SqueezingOptions) -> Result<SqueezingReport> {
    squeezing_report(tomogram, opts)
}

/// `<J_(v1 v2)>` for the given source.
pub fn cal_j_expectation<S: ExpectationSource + ?Sized>(src: &S, v1: &Vec3, v2: &Vec3) -> Result<f64> {
    Ok(SpinMoments::from_source(src, false)?.cal_j(v1, v2))
}

/// Maassen-Uffink bound for conjugate spin components of a qubit, in bits.
pub const MAASSEN_UFFINK_BOUND: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropicReport {
    pub qubit: usize,
    /// Tomographic entropy along x, y, z (bits).
    pub entropies: Vec3,
    pub threshold: f64,
    pub flagged: Vec<Axis>,
}

/// Flags axes whose single-qubit tomographic entropy falls below `threshold`
/// (half the Maassen-Uffink bound by default).
pub fn entropic_squeezing_check(tomogram: &Tomogram, qubit: usize, threshold: f64) -> Result<EntropicReport> {
    let marginal = tomogram.marginal_with_tol(&[qubit], f64::INFINITY)?;
    let mut entropies = [0.0; 3];
    let mut flagged = Vec::new();
    for a in Axis::ALL {
        let probs = marginal.slice(&Axes(vec![a])).ok_or_else(|| Error::MissingSlice(a.to_string()))?;
        let s = slice_entropy(probs);
        entropies[a.index()] = s;
        if s < threshold {
            flagged.push(a);
        }
    }
    Ok(EntropicReport { qubit, entropies, threshold, flagged })
}

pub fn default_entropic_threshold() -> f64 {
    0.5 * MAASSEN_UFFINK_BOUND
}
