//! Tomographic entanglement indicators: mutual information (TEI), inverse
//! participation ratio (IPR), Pearson correlation (PCC) and Bhattacharyya
//! distance (BD), per slice and averaged over slices.
//!
//! For a bipartition with a multi-qubit side, the outcomes on that side form a
//! single composite variable.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::states::DensityMatrix;
use crate::tomography::{outcome_spin, tomogram_slice, Axes, Direction, Tomogram};

/// Joint-vs-marginal mismatch accepted by the per-slice indicator functions.
pub const MARGINAL_TOL: f64 = 1e-9;
/// Standard deviation below which PCC is reported as 0.
pub const PCC_DEGENERATE_STD: f64 = 1e-12;

/// Split of the qubits into two nonempty groups A | B.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Bipartition {
    a: Vec<usize>,
    b: Vec<usize>,
}

impl Bipartition {
    pub fn new(a: &[usize], b: &[usize]) -> Result<Self> {
        let mut a = a.to_vec();
        let mut b = b.to_vec();
        a.sort_unstable();
        b.sort_unstable();
        if a.is_empty() || b.is_empty() {
            return Err(Error::InvalidArgument("both sides of a bipartition must be nonempty".into()));
        }
        let mut all: Vec<usize> = a.iter().chain(&b).copied().collect();
        all.sort_unstable();
        if all.iter().enumerate().any(|(i, &q)| i != q) {
            return Err(Error::InvalidArgument(format!(
                "bipartition {a:?}|{b:?} does not cover qubits 0..{} exactly once",
                all.len()
            )));
        }
        Ok(Bipartition { a, b })
    }

    /// `(first qubit) | (rest)` style split from the A side alone.
    pub fn from_side_a(a: &[usize], n_qubits: usize) -> Result<Self> {
        let b: Vec<usize> = (0..n_qubits).filter(|q| !a.contains(q)).collect();
        Bipartition::new(a, &b)
    }

    pub fn a(&self) -> &[usize] {
        &self.a
    }

    pub fn b(&self) -> &[usize] {
        &self.b
    }

    pub fn n_qubits(&self) -> usize {
        self.a.len() + self.b.len()
    }

    pub fn swapped(&self) -> Bipartition {
        Bipartition { a: self.b.clone(), b: self.a.clone() }
    }

    fn check(&self, n_qubits: usize) -> Result<()> {
        if self.n_qubits() != n_qubits {
            return Err(Error::Dimension(format!("bipartition {self} does not fit {n_qubits} qubits")));
        }
        Ok(())
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        write!(f, "{}|{}", join(&self.a), join(&self.b))
    }
}

impl FromStr for Bipartition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once('|')
            .ok_or_else(|| Error::Parse(format!("bipartition {s:?} must look like \"0|1,2\"")))?;
        let side = |t: &str| -> Result<Vec<usize>> {
            t.split(',')
                .map(|x| x.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad qubit index {x:?} in {s:?}"))))
                .collect()
        };
        Bipartition::new(&side(a)?, &side(b)?)
    }
}

impl TryFrom<String> for Bipartition {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Bipartition> for String {
    fn from(b: Bipartition) -> String {
        b.to_string()
    }
}

/// How PCC forms the outcome variable of a multi-qubit side.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PccMode {
    /// Sum of the side's spin values.
    #[default]
    CollectiveSum,
    /// Largest |PCC| over all single-qubit pairs across the cut.
    PerQubitMax,
}

/// Shannon entropy in bits.
pub fn slice_entropy(probs: &[f64]) -> f64 {
    -probs.iter().filter(|&&p| p > 0.0).map(|&p| p * p.log2()).sum::<f64>()
}

/// Inverse participation ratio `sum p^2`.
pub fn ipr(probs: &[f64]) -> f64 {
    probs.iter().map(|p| p * p).sum()
}

/// Checks that `joint` (row-major |A| x |B|) has marginals `pa`, `pb`.
fn check_marginals(joint: &[f64], pa: &[f64], pb: &[f64]) -> Result<()> {
    if joint.len() != pa.len() * pb.len() {
        return Err(Error::Dimension(format!(
            "joint has {} entries, marginals {} x {}",
            joint.len(),
            pa.len(),
            pb.len()
        )));
    }
    let (ra, rb) = marginals_of(joint, pa.len(), pb.len());
    let dev = ra.iter().zip(pa).chain(rb.iter().zip(pb)).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    if dev > MARGINAL_TOL {
        return Err(Error::Data(format!("marginals inconsistent with joint by {dev:e}")));
    }
    Ok(())
}

/// Row and column sums of a row-major `da x db` joint distribution.
pub fn marginals_of(joint: &[f64], da: usize, db: usize) -> (Vec<f64>, Vec<f64>) {
    let mut pa = vec![0.0; da];
    let mut pb = vec![0.0; db];
    for i in 0..da {
        for j in 0..db {
            pa[i] += joint[i * db + j];
            pb[j] += joint[i * db + j];
        }
    }
    (pa, pb)
}

/// `S(A) + S(B) - S(AB)` in bits.
pub fn eps_tei(joint: &[f64], pa: &[f64], pb: &[f64]) -> Result<f64> {
    check_marginals(joint, pa, pb)?;
    Ok((slice_entropy(pa) + slice_entropy(pb) - slice_entropy(joint)).max(0.0))
}

/// Kullback-Leibler divergence of the joint from the product of marginals.
pub fn kl_from_product(joint: &[f64], pa: &[f64], pb: &[f64]) -> Result<f64> {
    check_marginals(joint, pa, pb)?;
    let db = pb.len();
    let mut acc = 0.0;
    for (k, &p) in joint.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        let q = pa[k / db] * pb[k % db];
        if q <= 0.0 {
            return Err(Error::Data("joint probability outside the support of the marginal product".into()));
        }
        acc += p * (p / q).log2();
    }
    Ok(acc)
}

/// `1 + eta_AB - eta_A - eta_B`.
pub fn eps_ipr(joint: &[f64], pa: &[f64], pb: &[f64]) -> Result<f64> {
    check_marginals(joint, pa, pb)?;
    Ok(1.0 + ipr(joint) - ipr(pa) - ipr(pb))
}

/// `-log2 sum sqrt(p * pA * pB)` in bits.
pub fn eps_bd(joint: &[f64], pa: &[f64], pb: &[f64]) -> Result<f64> {
    check_marginals(joint, pa, pb)?;
    let db = pb.len();
    let bc: f64 = joint.iter().enumerate().map(|(k, &p)| (p * pa[k / db] * pb[k % db]).sqrt()).sum();
    Ok((-bc.log2()).max(0.0))
}

/// |Pearson correlation| of outcome values `va` (rows) and `vb` (columns);
/// `None` when either side has (numerically) zero variance.
pub fn pearson(joint: &[f64], va: &[f64], vb: &[f64]) -> Option<f64> {
    let (da, db) = (va.len(), vb.len());
    assert_eq!(joint.len(), da * db);
    let (pa, pb) = marginals_of(joint, da, db);
    let mean = |p: &[f64], v: &[f64]| p.iter().zip(v).map(|(p, v)| p * v).sum::<f64>();
    let (ma, mb) = (mean(&pa, va), mean(&pb, vb));
    let var_a: f64 = pa.iter().zip(va).map(|(p, v)| p * (v - ma).powi(2)).sum();
    let var_b: f64 = pb.iter().zip(vb).map(|(p, v)| p * (v - mb).powi(2)).sum();
    let (sa, sb) = (var_a.max(0.0).sqrt(), var_b.max(0.0).sqrt());
    if sa < PCC_DEGENERATE_STD || sb < PCC_DEGENERATE_STD {
        return None;
    }
    let mut cov = 0.0;
    for i in 0..da {
        for j in 0..db {
            cov += joint[i * db + j] * (va[i] - ma) * (vb[j] - mb);
        }
    }
    Some((cov / (sa * sb)).abs().min(1.0))
}

/// Two-qubit PCC with outcome values +-1/2; 0 for degenerate slices.
pub fn eps_pcc(joint: &[f64]) -> f64 {
    pearson(joint, &[-0.5, 0.5], &[-0.5, 0.5]).unwrap_or(0.0)
}

/// Rearranges an n-qubit slice into a row-major |A| x |B| joint distribution.
pub fn split_slice(probs: &[f64], n: usize, bip: &Bipartition) -> Vec<f64> {
    let (a, b) = (bip.a(), bip.b());
    let db = 1usize << b.len();
    let mut joint = vec![0.0; probs.len()];
    for (k, &p) in probs.iter().enumerate() {
        let bits = |side: &[usize]| side.iter().fold(0, |acc, &q| (acc << 1) | ((k >> (n - 1 - q)) & 1));
        joint[bits(a) * db + bits(b)] += p;
    }
    joint
}

/// Sum of spin values on a side, per composite outcome index.
fn collective_values(side_len: usize) -> Vec<f64> {
    (0..1usize << side_len).map(|k| (0..side_len).map(|q| outcome_spin(k, q, side_len)).sum()).collect()
}

fn pcc_for(probs: &[f64], n: usize, bip: &Bipartition, joint: &[f64], mode: PccMode) -> (f64, bool) {
    match mode {
        PccMode::CollectiveSum => {
            match pearson(joint, &collective_values(bip.a().len()), &collective_values(bip.b().len())) {
                Some(r) => (r, false),
                None => (0.0, true),
            }
        }
        PccMode::PerQubitMax => {
            let mut best = 0.0f64;
            let mut all_degenerate = true;
            for &qa in bip.a() {
                for &qb in bip.b() {
                    let pair = Bipartition { a: vec![0], b: vec![1] };
                    let reduced = crate::tomography::marginalize(probs, n, &sorted_pair(qa, qb));
                    let joint = if qa < qb { split_slice(&reduced, 2, &pair) } else { split_slice(&reduced, 2, &pair.swapped()) };
                    if let Some(r) = pearson(&joint, &[-0.5, 0.5], &[-0.5, 0.5]) {
                        all_degenerate = false;
                        best = best.max(r);
                    }
                }
            }
            (best, all_degenerate)
        }
    }
}

fn sorted_pair(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SliceIndicators {
    #[serde(serialize_with = "serialize_axes")]
    pub axes: Axes,
    pub eps_tei: f64,
    pub eps_ipr: f64,
    pub eps_pcc: f64,
    pub eps_bd: f64,
    /// PCC was undefined (zero variance) and reported as 0.
    pub pcc_degenerate: bool,
}

fn serialize_axes<S: serde::Serializer>(axes: &Axes, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&axes.to_string())
}

/// Indicators of one slice given its joint and side marginals.
pub fn indicators_from_parts(
    axes: Axes,
    probs: &[f64],
    n: usize,
    bip: &Bipartition,
    pa: &[f64],
    pb: &[f64],
    mode: PccMode,
) -> Result<SliceIndicators> {
    let joint = split_slice(probs, n, bip);
    let (eps_pcc, pcc_degenerate) = pcc_for(probs, n, bip, &joint, mode);
    Ok(SliceIndicators {
        eps_tei: eps_tei(&joint, pa, pb)?,
        eps_ipr: eps_ipr(&joint, pa, pb)?,
        eps_bd: eps_bd(&joint, pa, pb)?,
        eps_pcc,
        pcc_degenerate,
        axes,
    })
}

/// Indicators of a slice, marginals obtained by summing the slice itself.
pub fn slice_indicators(axes: &Axes, probs: &[f64], bip: &Bipartition, mode: PccMode) -> Result<SliceIndicators> {
    let n = axes.len();
    bip.check(n)?;
    let joint = split_slice(probs, n, bip);
    let (pa, pb) = marginals_of(&joint, 1 << bip.a().len(), 1 << bip.b().len());
    indicators_from_parts(axes.clone(), probs, n, bip, &pa, &pb, mode)
}

/// Means over a set of slices.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Averages {
    #[serde(serialize_with = "serialize_axes_list")]
    pub subset: Vec<Axes>,
    pub xi_tei: f64,
    pub xi_ipr: f64,
    pub xi_pcc: f64,
    pub xi_bd: f64,
}

fn serialize_axes_list<S: serde::Serializer>(v: &[Axes], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|a| a.to_string()))
}

impl Averages {
    pub fn from_slices<'a>(slices: impl IntoIterator<Item = &'a SliceIndicators>) -> Result<Averages> {
        let list: Vec<&SliceIndicators> = slices.into_iter().collect();
        if list.is_empty() {
            return Err(Error::InvalidArgument("cannot average over an empty slice subset".into()));
        }
        let k = list.len() as f64;
        let mean = |f: fn(&SliceIndicators) -> f64| list.iter().map(|s| f(s)).sum::<f64>() / k;
        Ok(Averages {
            subset: list.iter().map(|s| s.axes.clone()).collect(),
            xi_tei: mean(|s| s.eps_tei),
            xi_ipr: mean(|s| s.eps_ipr),
            xi_pcc: mean(|s| s.eps_pcc),
            xi_bd: mean(|s| s.eps_bd),
        })
    }
}

/// Per-slice indicators plus the full and reduced-subset averages that the
/// available slices allow.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndicatorReport {
    #[serde(serialize_with = "serialize_display")]
    pub bipartition: Bipartition,
    pub pcc_mode: PccMode,
    pub slices: Vec<SliceIndicators>,
    /// Mean over all `3^N` slices; `None` for partial tomograms.
    pub full: Option<Averages>,
    /// Mean over the reduced subset; `None` when any of its slices is missing.
    pub reduced: Option<Averages>,
}

fn serialize_display<S: serde::Serializer, T: fmt::Display>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

impl IndicatorReport {
    pub fn slice(&self, axes: &Axes) -> Option<&SliceIndicators> {
        self.slices.iter().find(|s| &s.axes == axes)
    }

    /// Mean over an arbitrary subset of the computed slices.
    pub fn average_over(&self, subset: &[Axes]) -> Result<Averages> {
        let picked = subset
            .iter()
            .map(|a| self.slice(a).ok_or_else(|| Error::MissingSlice(a.to_string())))
            .collect::<Result<Vec<_>>>()?;
        Averages::from_slices(picked)
    }
}

/// Slices whose first axis is x or y: `xx, xy, xz, yx, yy, yz` for two qubits.
pub fn default_reduced_subset(n_qubits: usize) -> Vec<Axes> {
    Axes::all(n_qubits).into_iter().filter(|a| a.0[0] != crate::spin::Axis::Z).collect()
}

/// Mean indicators over `subset` (all present slices when `None`).
pub fn average_indicators(
    tomogram: &Tomogram,
    bip: &Bipartition,
    subset: Option<&[Axes]>,
    mode: PccMode,
) -> Result<Averages> {
    bip.check(tomogram.n_qubits())?;
    let chosen: Vec<Axes> = match subset {
        Some(s) => s.to_vec(),
        None => tomogram.axes().cloned().collect(),
    };
    let per = chosen
        .iter()
        .map(|a| {
            let probs = tomogram.slice(a).ok_or_else(|| Error::MissingSlice(a.to_string()))?;
            slice_indicators(a, probs, bip, mode)
        })
        .collect::<Result<Vec<_>>>()?;
    Averages::from_slices(&per)
}

/// Indicator report from a (possibly partial) tomogram.
pub fn indicator_report(
    tomogram: &Tomogram,
    bip: &Bipartition,
    reduced_subset: &[Axes],
    mode: PccMode,
) -> Result<IndicatorReport> {
    bip.check(tomogram.n_qubits())?;
    let slices = tomogram
        .slices()
        .iter()
        .map(|(a, p)| slice_indicators(a, p, bip, mode))
        .collect::<Result<Vec<_>>>()?;
    finish_report(slices, tomogram.is_complete(), bip, reduced_subset, mode)
}

fn finish_report(
    slices: Vec<SliceIndicators>,
    complete: bool,
    bip: &Bipartition,
    reduced_subset: &[Axes],
    mode: PccMode,
) -> Result<IndicatorReport> {
    let full = if complete { Some(Averages::from_slices(&slices)?) } else { None };
    let mut report = IndicatorReport { bipartition: bip.clone(), pcc_mode: mode, slices, full, reduced: None };
    if !reduced_subset.is_empty() && reduced_subset.iter().all(|a| report.slice(a).is_some()) {
        report.reduced = Some(report.average_over(reduced_subset)?);
    }
    Ok(report)
}

/// Same report computed from the density matrix: joint slices from `rho`,
/// side marginals from the partial-trace reduced states.
pub fn indicator_report_from_density(
    rho: &DensityMatrix,
    bip: &Bipartition,
    reduced_subset: &[Axes],
    mode: PccMode,
) -> Result<IndicatorReport> {
    let n = rho.n_qubits();
    bip.check(n)?;
    let rho_a = rho.reduce(bip.a())?;
    let rho_b = rho.reduce(bip.b())?;
    let dirs = |axes: &Axes, side: &[usize]| -> Vec<Direction> { axes.select(side).directions() };
    let slices = Axes::all(n)
        .into_iter()
        .map(|axes| {
            let probs = tomogram_slice(rho, &axes.directions())?;
            let pa = tomogram_slice(&rho_a, &dirs(&axes, bip.a()))?;
            let pb = tomogram_slice(&rho_b, &dirs(&axes, bip.b()))?;
            indicators_from_parts(axes, &probs, n, bip, &pa, &pb, mode)
        })
        .collect::<Result<Vec<_>>>()?;
    finish_report(slices, true, bip, reduced_subset, mode)
}
