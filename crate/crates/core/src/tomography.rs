//! Spin tomograms over the {x,y,z}^N quorum: generation, marginals,
//! moments and file IO.
//!
//! Outcome index `k` of a slice encodes one bit per qubit, leftmost qubit most
//! significant; bit 1 means m = +1/2 along that qubit's axis.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::{kron_all, CMat, C64};
use crate::spin::{spin_expansion, Axis};
use crate::states::DensityMatrix;

/// Largest excursion outside [0, 1] that is silently clamped.
pub const CLAMP_TOL: f64 = 1e-9;
/// Normalization tolerance for generated tomograms.
pub const NORM_TOL: f64 = 1e-9;
/// Default normalization tolerance when reading files.
pub const FILE_NORM_TOL: f64 = 1e-6;
/// Computed probabilities below this are round-off and set to exactly 0;
/// the Bhattacharyya sum takes square roots and would amplify them.
pub const ROUNDOFF_FLOOR: f64 = 1e-14;
/// Default tolerance for marginal consistency across discarded-axis choices.
pub const MARGINAL_TOL: f64 = 1e-9;

pub const FORMAT_VERSION: u32 = 1;
pub const OUTCOME_CONVENTION: &str = "0=-1/2,1=+1/2";

/// The qubit tomogram rotation `U(theta, phi)`.
pub fn rotation_u(theta: f64, phi: f64) -> CMat {
    let (s, c) = (theta / 2.0).sin_cos();
    let ep = C64::from_polar(1.0, phi / 2.0);
    let em = ep.conj();
    CMat::from_rows(&[&[ep * c, ep * s], &[-em * s, em * c]]).expect("static shape")
}

/// A measurement direction, either a named axis or explicit polar angles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Direction {
    Axis(Axis),
    Angles { theta: f64, phi: f64 },
}

impl Direction {
    pub fn angles(&self) -> (f64, f64) {
        match *self {
            Direction::Axis(a) => a.angles(),
            Direction::Angles { theta, phi } => (theta, phi),
        }
    }

    pub fn unit_vector(&self) -> [f64; 3] {
        match *self {
            Direction::Axis(a) => a.unit_vector(),
            Direction::Angles { theta, phi } => {
                [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
            }
        }
    }

    /// `U(theta, phi)` with columns ordered so that column 1 is the +1/2
    /// eigenvector of `n . sigma` and column 0 the -1/2 one.
    pub fn measurement_basis(&self) -> CMat {
        let (theta, phi) = self.angles();
        let u = rotation_u(theta, phi);
        let n = self.unit_vector();
        let ns = (0..3).fold(CMat::zeros(2, 2), |acc, a| &acc + &Axis::from_index(a).operator().scale_re(n[a]));
        let up = u.column(1);
        if ns.expectation(&up).re > 0.0 {
            u
        } else {
            CMat::from_fn(2, 2, |r, c| u[(r, 1 - c)])
        }
    }
}

impl From<Axis> for Direction {
    fn from(a: Axis) -> Self {
        Direction::Axis(a)
    }
}

/// One axis per qubit, e.g. `xy`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Axes(pub Vec<Axis>);

impl Axes {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// All `3^n` tuples in lexicographic x < y < z order.
    pub fn all(n: usize) -> Vec<Axes> {
        let mut out = vec![Vec::new()];
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|v: Vec<Axis>| {
                    Axis::ALL.into_iter().map(move |a| {
                        let mut w = v.clone();
                        w.push(a);
                        w
                    })
                })
                .collect();
        }
        out.into_iter().map(Axes).collect()
    }

    pub fn select(&self, qubits: &[usize]) -> Axes {
        Axes(qubits.iter().map(|&q| self.0[q]).collect())
    }

    pub fn directions(&self) -> Vec<Direction> {
        self.0.iter().map(|&a| Direction::Axis(a)).collect()
    }
}

impl fmt::Display for Axes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.0 {
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl FromStr for Axes {
    type Err = Error;
    fn from_str(s: &str) -> Result<Axes> {
        if s.is_empty() {
            return Err(Error::Parse("empty axis string".into()));
        }
        s.chars().map(Axis::try_from).collect::<Result<Vec<_>>>().map(Axes)
    }
}

/// Spin value (+-1/2) of `qubit` in outcome `index` of an `n`-qubit slice.
pub fn outcome_spin(index: usize, qubit: usize, n: usize) -> f64 {
    if (index >> (n - 1 - qubit)) & 1 == 1 {
        0.5
    } else {
        -0.5
    }
}

/// Outcome distribution of `rho` measured along `dirs` (one per qubit).
pub fn tomogram_slice(rho: &DensityMatrix, dirs: &[Direction]) -> Result<Vec<f64>> {
    let n = rho.n_qubits();
    if dirs.len() != n {
        return Err(Error::Dimension(format!("{} directions for {} qubits", dirs.len(), n)));
    }
    let bases: Vec<CMat> = dirs.iter().map(Direction::measurement_basis).collect();
    let w = kron_all(bases.iter());
    let m = rho.matrix();
    let dim = rho.dim();
    let mut probs = Vec::with_capacity(dim);
    for k in 0..dim {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..dim {
            let wik = w[(i, k)].conj();
            if wik.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..dim {
                acc += wik * m[(i, j)] * w[(j, k)];
            }
        }
        probs.push(if acc.re.abs() < ROUNDOFF_FLOOR { 0.0 } else { acc.re });
    }
    clamp_probabilities(&mut probs, "generated slice")?;
    Ok(probs)
}

fn clamp_probabilities(probs: &mut [f64], context: &str) -> Result<()> {
    for p in probs.iter_mut() {
        if !p.is_finite() || *p < -CLAMP_TOL || *p > 1.0 + CLAMP_TOL {
            return Err(Error::Data(format!("{context}: probability {p} outside [0, 1]")));
        }
        *p = p.clamp(0.0, 1.0);
    }
    Ok(())
}

/// Probability vectors keyed by axis tuple. May be partial.
#[derive(Clone, Debug, PartialEq)]
pub struct Tomogram {
    n_qubits: usize,
    slices: BTreeMap<Axes, Vec<f64>>,
}

impl Tomogram {
    /// Validates shape, range and normalization (within `norm_tol`).
    pub fn new(n_qubits: usize, slices: BTreeMap<Axes, Vec<f64>>, norm_tol: f64) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::Data("tomogram needs at least one qubit".into()));
        }
        if slices.is_empty() {
            return Err(Error::Data("tomogram has no slices".into()));
        }
        let dim = 1usize << n_qubits;
        let mut slices = slices;
        for (axes, probs) in slices.iter_mut() {
            if axes.len() != n_qubits {
                return Err(Error::Data(format!("slice {axes} has {} axes, expected {n_qubits}", axes.len())));
            }
            if probs.len() != dim {
                return Err(Error::Data(format!("slice {axes} has {} outcomes, expected {dim}", probs.len())));
            }
            clamp_probabilities(probs, &format!("slice {axes}"))?;
            let sum: f64 = probs.iter().sum();
            if (sum - 1.0).abs() > norm_tol {
                return Err(Error::Data(format!("slice {axes} sums to {sum}, expected 1")));
            }
        }
        Ok(Tomogram { n_qubits, slices })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn slices(&self) -> &BTreeMap<Axes, Vec<f64>> {
        &self.slices
    }

    pub fn slice(&self, axes: &Axes) -> Option<&[f64]> {
        self.slices.get(axes).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.slices.len() == 3usize.pow(self.n_qubits as u32)
    }

    pub fn axes(&self) -> impl Iterator<Item = &Axes> {
        self.slices.keys()
    }

    /// Keeps only the listed slices; all must be present.
    pub fn restrict(&self, subset: &[Axes]) -> Result<Tomogram> {
        let mut slices = BTreeMap::new();
        for axes in subset {
            let probs = self.slices.get(axes).ok_or_else(|| Error::MissingSlice(axes.to_string()))?;
            slices.insert(axes.clone(), probs.clone());
        }
        Tomogram::new(self.n_qubits, slices, f64::INFINITY)
    }

    /// Largest absolute difference between matching slices; `None` if the
    /// slice sets differ.
    pub fn max_abs_diff(&self, other: &Tomogram) -> Option<f64> {
        if self.n_qubits != other.n_qubits || self.slices.len() != other.slices.len() {
            return None;
        }
        let mut worst = 0.0f64;
        for (axes, p) in &self.slices {
            let q = other.slices.get(axes)?;
            for (a, b) in p.iter().zip(q) {
                worst = worst.max((a - b).abs());
            }
        }
        Some(worst)
    }

    /// Mean of `prod_i m_i` over one slice matching the requested axes.
    pub fn moment(&self, factors: &[(usize, Axis)]) -> Result<f64> {
        let n = self.n_qubits;
        let mut required: Vec<Option<Axis>> = vec![None; n];
        for &(q, a) in factors {
            if q >= n {
                return Err(Error::InvalidArgument(format!("qubit {q} out of range for {n} qubits")));
            }
            if required[q].replace(a).is_some() {
                return Err(Error::InvalidArgument(format!("qubit {q} appears twice in a moment")));
            }
        }
        if factors.is_empty() {
            return Ok(1.0);
        }
        let (_, probs) = self
            .slices
            .iter()
            .find(|(axes, _)| required.iter().zip(&axes.0).all(|(r, a)| r.is_none_or(|r| r == *a)))
            .ok_or_else(|| {
                let label: String = required.iter().map(|r| r.map_or('*', Axis::label)).collect();
                Error::MissingSlice(label)
            })?;
        Ok(probs
            .iter()
            .enumerate()
            .map(|(k, p)| p * factors.iter().map(|&(q, _)| outcome_spin(k, q, n)).product::<f64>())
            .sum())
    }

    /// `Re Tr(rho O)` of a Hermitian operator reconstructed from moments only,
    /// by expanding `O` in products of doubled spin operators.
    pub fn expect_operator(&self, op: &CMat) -> Result<f64> {
        let n = self.n_qubits;
        if op.rows() != 1 << n || !op.is_square() {
            return Err(Error::Dimension(format!("operator is {}x{}, tomogram has {n} qubits", op.rows(), op.cols())));
        }
        let mut acc = 0.0;
        for (string, coeff) in spin_expansion(op, n) {
            let factors = string.factors();
            let scale = (1u64 << factors.len()) as f64;
            acc += coeff.re * scale * self.moment(&factors)?;
        }
        Ok(acc)
    }

    /// Reduced tomogram on `keep`, checked for consistency across the axes of
    /// the discarded qubits.
    pub fn marginal(&self, keep: &[usize]) -> Result<Tomogram> {
        self.marginal_with_tol(keep, MARGINAL_TOL)
    }

    pub fn marginal_with_tol(&self, keep: &[usize], tol: f64) -> Result<Tomogram> {
        let n = self.n_qubits;
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if keep.is_empty() {
            return Err(Error::InvalidArgument("marginal needs at least one kept qubit".into()));
        }
        if let Some(&q) = keep.iter().find(|&&q| q >= n) {
            return Err(Error::InvalidArgument(format!("qubit {q} out of range for {n} qubits")));
        }
        let mut reduced: BTreeMap<Axes, Vec<f64>> = BTreeMap::new();
        for (axes, probs) in &self.slices {
            let sub_axes = axes.select(&keep);
            let sub = marginalize(probs, n, &keep);
            match reduced.get(&sub_axes) {
                None => {
                    reduced.insert(sub_axes, sub);
                }
                Some(existing) => {
                    let dev = existing.iter().zip(&sub).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    if dev > tol {
                        return Err(Error::Data(format!(
                            "marginal {sub_axes} on qubits {keep:?} differs by {dev:e} between slices (slice {axes})"
                        )));
                    }
                }
            }
        }
        Tomogram::new(keep.len(), reduced, NORM_TOL.max(tol))
    }

    pub fn to_file_format(&self) -> TomogramFile {
        TomogramFile {
            format_version: FORMAT_VERSION,
            n_qubits: self.n_qubits,
            outcome_convention: OUTCOME_CONVENTION.to_string(),
            slices: self
                .slices
                .iter()
                .map(|(axes, probs)| SliceRecord { axes: axes.to_string(), probs: probs.clone() })
                .collect(),
        }
    }

    pub fn from_file_format(file: TomogramFile, norm_tol: f64) -> Result<Tomogram> {
        if file.format_version != FORMAT_VERSION {
            return Err(Error::Data(format!("unsupported format_version {}", file.format_version)));
        }
        if file.outcome_convention != OUTCOME_CONVENTION {
            return Err(Error::Data(format!(
                "unsupported outcome_convention {:?}, expected {OUTCOME_CONVENTION:?}",
                file.outcome_convention
            )));
        }
        let mut slices = BTreeMap::new();
        for record in file.slices {
            let axes: Axes = record.axes.parse()?;
            if slices.insert(axes.clone(), record.probs).is_some() {
                return Err(Error::Data(format!("duplicate slice {axes}")));
            }
        }
        Tomogram::new(file.n_qubits, slices, norm_tol)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file_format())?)
    }

    pub fn from_json(text: &str, norm_tol: f64) -> Result<Tomogram> {
        Tomogram::from_file_format(serde_json::from_str(text)?, norm_tol)
    }

    /// Flat `axes,outcome,probability` table; outcome is the bit string.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("axes,outcome,probability\n");
        for (axes, probs) in &self.slices {
            for (k, p) in probs.iter().enumerate() {
                out.push_str(&format!("{axes},{:0width$b},{}\n", k, crate::report::fmt_num(*p), width = self.n_qubits));
            }
        }
        out
    }
}

/// Sums `probs` over the outcome bits of qubits not in `keep` (sorted).
pub fn marginalize(probs: &[f64], n: usize, keep: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; 1 << keep.len()];
    for (k, p) in probs.iter().enumerate() {
        let idx = keep.iter().fold(0, |acc, &q| (acc << 1) | ((k >> (n - 1 - q)) & 1));
        out[idx] += p;
    }
    out
}

/// All `3^N` axis slices of `rho`.
pub fn full_tomogram(rho: &DensityMatrix) -> Tomogram {
    partial_tomogram(rho, &Axes::all(rho.n_qubits())).expect("axes sized to the state")
}

pub fn partial_tomogram(rho: &DensityMatrix, subset: &[Axes]) -> Result<Tomogram> {
    let mut slices = BTreeMap::new();
    for axes in subset {
        slices.insert(axes.clone(), tomogram_slice(rho, &axes.directions())?);
    }
    Tomogram::new(rho.n_qubits(), slices, NORM_TOL)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SliceRecord {
    pub axes: String,
    pub probs: Vec<f64>,
}

/// On-disk layout of a tomogram.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TomogramFile {
    pub format_version: u32,
    pub n_qubits: usize,
    pub outcome_convention: String,
    pub slices: Vec<SliceRecord>,
}

pub fn write_tomogram(tomogram: &Tomogram, path: &Path) -> Result<()> {
    std::fs::write(path, tomogram.to_json()?)?;
    Ok(())
}

pub fn write_tomogram_csv(tomogram: &Tomogram, path: &Path) -> Result<()> {
    std::fs::write(path, tomogram.to_csv())?;
    Ok(())
}

pub fn read_tomogram(path: &Path) -> Result<Tomogram> {
    read_tomogram_with_tol(path, FILE_NORM_TOL)
}

pub fn read_tomogram_with_tol(path: &Path, norm_tol: f64) -> Result<Tomogram> {
    let text = std::fs::read_to_string(path)?;
    Tomogram::from_json(&text, norm_tol)
}
