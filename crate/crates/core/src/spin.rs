//! Half-spin operators in the computational order |down> = 0, |up> = 1.
//!
//! All operators here have eigenvalues +-1/2; nothing in the crate uses the
//! +-1 Pauli normalization except [`SpinString`], which is the doubled
//! operator basis used for operator expansion.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::{kron_all, CMat, C64, ONE, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn from_index(i: usize) -> Axis {
        Axis::ALL[i]
    }

    pub fn label(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        }
    }

    pub fn unit_vector(self) -> [f64; 3] {
        let mut v = [0.0; 3];
        v[self.index()] = 1.0;
        v
    }

    /// Polar and azimuthal angles of the axis.
    pub fn angles(self) -> (f64, f64) {
        use std::f64::consts::FRAC_PI_2;
        match self {
            Axis::X => (FRAC_PI_2, 0.0),
            Axis::Y => (FRAC_PI_2, FRAC_PI_2),
            Axis::Z => (0.0, 0.0),
        }
    }

    pub fn operator(self) -> CMat {
        match self {
            Axis::X => sigma_x(),
            Axis::Y => sigma_y(),
            Axis::Z => sigma_z(),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

impl TryFrom<char> for Axis {
    type Error = Error;
    fn try_from(c: char) -> Result<Axis> {
        match c.to_ascii_lowercase() {
            'x' => Ok(Axis::X),
            'y' => Ok(Axis::Y),
            'z' => Ok(Axis::Z),
            other => Err(Error::Parse(format!("unknown axis label '{other}'"))),
        }
    }
}

impl FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Axis> {
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => Axis::try_from(c),
            _ => Err(Error::Parse(format!("unknown axis label '{s}'"))),
        }
    }
}

/// sigma_x = (|up><down| + |down><up|)/2
pub fn sigma_x() -> CMat {
    let h = C64::new(0.5, 0.0);
    CMat::from_rows(&[&[ZERO, h], &[h, ZERO]]).expect("static shape")
}

/// sigma_y = i(|down><up| - |up><down|)/2
pub fn sigma_y() -> CMat {
    let h = C64::new(0.0, 0.5);
    CMat::from_rows(&[&[ZERO, h], &[-h, ZERO]]).expect("static shape")
}

/// sigma_z = (|up><up| - |down><down|)/2
pub fn sigma_z() -> CMat {
    CMat::from_real_diag(&[-0.5, 0.5])
}

/// Single-qubit operator `op` acting on qubit `qubit` of an `n`-qubit register.
pub fn embed(op: &CMat, qubit: usize, n: usize) -> CMat {
    assert!(qubit < n, "qubit {qubit} out of range for {n} qubits");
    let id = CMat::identity(2);
    let factors: Vec<&CMat> = (0..n).map(|q| if q == qubit { op } else { &id }).collect();
    kron_all(factors)
}

/// sigma_axis on one qubit of an `n`-qubit register.
pub fn spin_op(axis: Axis, qubit: usize, n: usize) -> CMat {
    embed(&axis.operator(), qubit, n)
}

/// Collective spin components J_a = sum_i sigma_a^(i).
#[derive(Clone, Debug)]
pub struct CollectiveSpin {
    pub n_qubits: usize,
    pub components: [CMat; 3],
}

impl CollectiveSpin {
    pub fn new(n_qubits: usize) -> Self {
        assert!(n_qubits >= 1);
        let dim = 1 << n_qubits;
        let component = |axis: Axis| {
            (0..n_qubits).fold(CMat::zeros(dim, dim), |acc, q| &acc + &spin_op(axis, q, n_qubits))
        };
        CollectiveSpin { n_qubits, components: [component(Axis::X), component(Axis::Y), component(Axis::Z)] }
    }

    pub fn x(&self) -> &CMat {
        &self.components[0]
    }

    pub fn y(&self) -> &CMat {
        &self.components[1]
    }

    pub fn z(&self) -> &CMat {
        &self.components[2]
    }

    /// J . v
    pub fn along(&self, v: [f64; 3]) -> CMat {
        let dim = 1 << self.n_qubits;
        (0..3).fold(CMat::zeros(dim, dim), |acc, a| &acc + &self.components[a].scale_re(v[a]))
    }
}

/// A tensor product of doubled spin operators (identity or 2 sigma_a per qubit).
/// These square to the identity and are trace-orthogonal, so any operator `O`
/// expands as `sum_P Tr(P O) / 2^n * P`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpinString(pub Vec<Option<Axis>>);

impl SpinString {
    /// All `4^n` strings, identity first.
    pub fn all(n: usize) -> Vec<SpinString> {
        let mut out = vec![SpinString(Vec::new())];
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|s| {
                    [None, Some(Axis::X), Some(Axis::Y), Some(Axis::Z)].into_iter().map(move |f| {
                        let mut v = s.0.clone();
                        v.push(f);
                        SpinString(v)
                    })
                })
                .collect();
        }
        out
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|f| f.is_some()).count()
    }

    pub fn matrix(&self) -> CMat {
        let id = CMat::identity(2);
        let mats: Vec<CMat> = self
            .0
            .iter()
            .map(|f| match f {
                None => id.clone(),
                Some(a) => a.operator().scale_re(2.0),
            })
            .collect();
        kron_all(mats.iter())
    }

    /// The (qubit, axis) factors, for tomogram moment lookups.
    pub fn factors(&self) -> Vec<(usize, Axis)> {
        self.0.iter().enumerate().filter_map(|(q, f)| f.map(|a| (q, a))).collect()
    }
}

/// Coefficients `Tr(P O) / 2^n` of `op` in the [`SpinString`] basis, skipping
/// (numerically) zero terms.
pub fn spin_expansion(op: &CMat, n: usize) -> Vec<(SpinString, C64)> {
    let dim = (1usize << n) as f64;
    SpinString::all(n)
        .into_iter()
        .filter_map(|s| {
            let m = s.matrix();
            let coeff = m.matmul(op).trace() / dim;
            (coeff.norm() > 1e-15).then_some((s, coeff))
        })
        .collect()
}

/// |down> and |up>
pub fn basis_ket(up: bool) -> [C64; 2] {
    if up {
        [ZERO, ONE]
    } else {
        [ONE, ZERO]
    }
}
