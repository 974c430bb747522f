//! Functions on a group, their Fourier transforms, and the vector utilities the
//! moment formulas are written in.
//!
//! The transform is normalized by `1/|G|` in the forward direction so that the
//! zeroth coefficient is the mean:
//!
//! ```text
//! fhat_j = (1/|G|) sum_i f_i prod_l w_{N_l}^(-i_l j_l),    w_N = exp(2 pi i / N)
//! f_i    =         sum_j fhat_j prod_l w_{N_l}^( i_l j_l)
//! ```
//!
//! The transform matrix is a Kronecker product of one-dimensional DFT matrices,
//! so it is applied one axis at a time. Binary axes use a Walsh-Hadamard
//! butterfly.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::group::{GroupIndex, GroupSpec};

/// Default relative tolerance for deciding that a vector is real-valued.
pub const REAL_TOLERANCE: f64 = 1e-9;

/// Which side of the transform a vector lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Primal,
    Fourier,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Primal => "primal",
            Side::Fourier => "Fourier",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The point `a` a general moment is centered at.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MomentCenter(pub Complex64);

impl MomentCenter {
    pub fn zero() -> Self {
        Self(Complex64::new(0.0, 0.0))
    }

    pub fn real(a: f64) -> Self {
        Self(Complex64::new(a, 0.0))
    }
}

impl From<Complex64> for MomentCenter {
    fn from(a: Complex64) -> Self {
        Self(a)
    }
}

/// `|G|` complex values in ordinal order.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseFunction {
    group: GroupSpec,
    values: Vec<Complex64>,
    side: Side,
}

impl DenseFunction {
    pub fn new(group: GroupSpec, values: Vec<Complex64>, side: Side) -> Result<Self> {
        if values.len() != group.order() {
            return Err(Error::GroupMismatch(format!(
                "{} values supplied for group {group} of order {}",
                values.len(),
                group.order()
            )));
        }
        Ok(Self { group, values, side })
    }

    pub fn from_real(group: GroupSpec, values: &[f64], side: Side) -> Result<Self> {
        Self::new(
            group,
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            side,
        )
    }

    pub fn zeros(group: GroupSpec, side: Side) -> Self {
        let n = group.order();
        Self {
            group,
            values: vec![Complex64::new(0.0, 0.0); n],
            side,
        }
    }

    /// Standard basis vector `e_j`.
    pub fn basis(group: GroupSpec, j: usize, side: Side) -> Result<Self> {
        group.check_ordinal(j)?;
        let mut out = Self::zeros(group, side);
        out.values[j] = Complex64::new(1.0, 0.0);
        Ok(out)
    }

    pub fn constant(group: GroupSpec, c: Complex64, side: Side) -> Self {
        let n = group.order();
        Self {
            group,
            values: vec![c; n],
            side,
        }
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, ordinal: usize) -> Complex64 {
        self.values[ordinal]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// All imaginary parts within `rel_tol * max|value|` of zero.
    pub fn is_real(&self, rel_tol: f64) -> bool {
        let scale = self.max_abs();
        let tol = rel_tol * scale;
        self.values.iter().all(|v| v.im.abs() <= tol)
    }

    /// `v_{-j} = conj(v_j)` for all `j` within `rel_tol * max|value|`.
    pub fn is_conjugate_symmetric(&self, rel_tol: f64) -> bool {
        let tol = rel_tol * self.max_abs();
        (0..self.len()).all(|j| {
            let k = self.group.neg_ord(j);
            (self.values[k] - self.values[j].conj()).norm() <= tol
        })
    }

    /// Element-wise product.
    pub fn pointwise(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        Ok(Self {
            group: self.group.clone(),
            values,
            side: self.side,
        })
    }

    pub(crate) fn with_values(&self, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self {
            group: self.group.clone(),
            values,
            side: self.side,
        }
    }

    pub(crate) fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.group != other.group {
            return Err(Error::GroupMismatch(format!(
                "{} vs {}",
                self.group, other.group
            )));
        }
        if self.side != other.side {
            return Err(Error::SideMismatch {
                expected: self.side.name(),
                found: other.side.name(),
            });
        }
        Ok(())
    }

    fn require_side(&self, side: Side) -> Result<()> {
        if self.side == side {
            Ok(())
        } else {
            Err(Error::SideMismatch {
                expected: side.name(),
                found: self.side.name(),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Forward,
    Inverse,
}

/// Forward transform `fhat = (1/|G|) U_G f`.
pub fn dft(f: &DenseFunction) -> Result<DenseFunction> {
    f.require_side(Side::Primal)?;
    let mut values = f.values.clone();
    transform_in_place(&f.group, &mut values, Direction::Forward);
    Ok(DenseFunction {
        group: f.group.clone(),
        values,
        side: Side::Fourier,
    })
}

/// Inverse transform `f = U_G^* fhat`.
pub fn idft(fhat: &DenseFunction) -> Result<DenseFunction> {
    fhat.require_side(Side::Fourier)?;
    let mut values = fhat.values.clone();
    transform_in_place(&fhat.group, &mut values, Direction::Inverse);
    Ok(DenseFunction {
        group: fhat.group.clone(),
        values,
        side: Side::Primal,
    })
}

/// The forward transform on a bare slice, ignoring side labels.
pub(crate) fn forward_raw(group: &GroupSpec, values: &mut [Complex64]) {
    transform_in_place(group, values, Direction::Forward);
}

/// The inverse transform on a bare slice, ignoring side labels.
pub(crate) fn inverse_raw(group: &GroupSpec, values: &mut [Complex64]) {
    transform_in_place(group, values, Direction::Inverse);
}

fn transform_in_place(group: &GroupSpec, values: &mut [Complex64], dir: Direction) {
    debug_assert_eq!(values.len(), group.order());
    let mut line = Vec::new();
    let mut out = Vec::new();
    for (&n, &stride) in group.moduli().iter().zip(group.strides()) {
        if n == 2 {
            walsh_hadamard_axis(values, stride);
        } else {
            dft_axis(values, n, stride, dir, &mut line, &mut out);
        }
    }
    if dir == Direction::Forward {
        let scale = 1.0 / group.order() as f64;
        for v in values.iter_mut() {
            *v *= scale;
        }
    }
}

/// In-place `(a, b) -> (a + b, a - b)` along one binary axis.
fn walsh_hadamard_axis(values: &mut [Complex64], stride: usize) {
    let block = 2 * stride;
    for base in (0..values.len()).step_by(block) {
        for k in base..base + stride {
            let a = values[k];
            let b = values[k + stride];
            values[k] = a + b;
            values[k + stride] = a - b;
        }
    }
}

/// Naive length-`n` DFT applied to every line along one axis.
fn dft_axis(
    values: &mut [Complex64],
    n: usize,
    stride: usize,
    dir: Direction,
    line: &mut Vec<Complex64>,
    out: &mut Vec<Complex64>,
) {
    let sign = match dir {
        Direction::Forward => -1.0,
        Direction::Inverse => 1.0,
    };
    let twiddles: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(1.0, sign * 2.0 * PI * k as f64 / n as f64))
        .collect();
    line.resize(n, Complex64::new(0.0, 0.0));
    out.resize(n, Complex64::new(0.0, 0.0));
    let block = n * stride;
    for outer in (0..values.len()).step_by(block) {
        for inner in 0..stride {
            let start = outer + inner;
            for (k, slot) in line.iter_mut().enumerate() {
                *slot = values[start + k * stride];
            }
            for (j, o) in out.iter_mut().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                let mut t = 0;
                for x in line.iter() {
                    acc += x * twiddles[t];
                    t += j;
                    if t >= n {
                        t -= n;
                    }
                }
                *o = acc;
            }
            for (k, o) in out.iter().enumerate() {
                values[start + k * stride] = *o;
            }
        }
    }
}

/// The a-diminished transform: coefficient 0 becomes `mu - a`.
pub fn diminish(fhat: &DenseFunction, a: MomentCenter) -> Result<DenseFunction> {
    fhat.require_side(Side::Fourier)?;
    let mut out = fhat.clone();
    out.values[0] -= a.0;
    Ok(out)
}

/// Entry `j` of the result is entry `-j` of the input.
pub fn reverse(v: &DenseFunction) -> DenseFunction {
    let g = &v.group;
    let values = (0..v.len()).map(|j| v.values[g.neg_ord(j)]).collect();
    v.with_values(values)
}

/// Unconjugated dot product `sum_i f_i g_i`.
pub fn dot(f: &DenseFunction, g: &DenseFunction) -> Result<Complex64> {
    f.check_compatible(g)?;
    Ok(dot_slices(&f.values, &g.values))
}

pub(crate) fn dot_slices(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `|<<f, g>> - |G| <<fhat, ghat_reversed>>|` for two primal functions.
pub fn parseval_gap(f: &DenseFunction, g: &DenseFunction) -> Result<f64> {
    f.require_side(Side::Primal)?;
    let direct = dot(f, g)?;
    let fhat = dft(f)?;
    let ghat = dft(g)?;
    let fourier = dot(&fhat, &reverse(&ghat))? * f.group.order() as f64;
    Ok((direct - fourier).norm())
}

/// Fourier coefficients keyed by ordinal; absent entries are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSpectrum {
    group: GroupSpec,
    entries: BTreeMap<usize, Complex64>,
}

impl SparseSpectrum {
    pub fn new(group: GroupSpec) -> Self {
        Self {
            group,
            entries: BTreeMap::new(),
        }
    }

    /// Builds from `(ordinal, value)` pairs; repeated ordinals are rejected.
    pub fn from_ordinals(
        group: GroupSpec,
        pairs: impl IntoIterator<Item = (usize, Complex64)>,
    ) -> Result<Self> {
        let mut out = Self::new(group);
        for (j, v) in pairs {
            out.group.check_ordinal(j)?;
            if out.entries.contains_key(&j) {
                return Err(Error::InvalidArgument(format!("coefficient {j} assigned twice")));
            }
            out.set_ordinal(j, v)?;
        }
        Ok(out)
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    /// Sets coefficient `j`; an exact zero removes it.
    pub fn set_ordinal(&mut self, j: usize, value: Complex64) -> Result<()> {
        self.group.check_ordinal(j)?;
        if value == Complex64::new(0.0, 0.0) {
            self.entries.remove(&j);
        } else {
            self.entries.insert(j, value);
        }
        Ok(())
    }

    pub fn set(&mut self, j: &GroupIndex, value: Complex64) -> Result<()> {
        let ordinal = self.group.encode(j)?;
        self.set_ordinal(ordinal, value)
    }

    pub fn get_ordinal(&self, j: usize) -> Complex64 {
        self.entries.get(&j).copied().unwrap_or_default()
    }

    pub fn get(&self, j: &GroupIndex) -> Result<Complex64> {
        Ok(self.get_ordinal(self.group.encode(j)?))
    }

    pub fn contains(&self, j: usize) -> bool {
        self.entries.contains_key(&j)
    }

    /// Number of stored (nonzero) coefficients.
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Stored ordinals in ascending order.
    pub fn support(&self) -> Vec<usize> {
        self.entries.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    /// The zeroth coefficient, i.e. the mean of the primal function.
    pub fn mean(&self) -> Complex64 {
        self.get_ordinal(0)
    }

    pub fn to_dense(&self) -> DenseFunction {
        let mut out = DenseFunction::zeros(self.group.clone(), Side::Fourier);
        for (&j, &v) in &self.entries {
            out.values[j] = v;
        }
        out
    }

    /// Keeps entries with `|v| > threshold` (every nonzero when `threshold` is 0).
    pub fn from_dense(dense: &DenseFunction, threshold: f64) -> Result<Self> {
        dense.require_side(Side::Fourier)?;
        let mut out = Self::new(dense.group.clone());
        for (j, &v) in dense.values.iter().enumerate() {
            if v != Complex64::new(0.0, 0.0) && v.norm() > threshold {
                out.entries.insert(j, v);
            }
        }
        Ok(out)
    }

    pub fn diminish(&self, a: MomentCenter) -> Self {
        let mut out = self.clone();
        let zeroth = self.get_ordinal(0) - a.0;
        out.set_ordinal(0, zeroth).expect("0 is always a valid ordinal");
        out
    }

    pub fn reverse(&self) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|(&j, &v)| (self.group.neg_ord(j), v))
            .collect();
        Self {
            group: self.group.clone(),
            entries,
        }
    }

    /// `v_{-j} = conj(v_j)` on the support, within `rel_tol * max|v|`.
    pub fn is_conjugate_symmetric(&self, rel_tol: f64) -> bool {
        let scale = self.entries.values().map(|v| v.norm()).fold(0.0, f64::max);
        let tol = rel_tol * scale;
        self.entries.iter().all(|(&j, &v)| {
            (self.get_ordinal(self.group.neg_ord(j)) - v.conj()).norm() <= tol
        })
    }
}

/// `to_dense` as a free function.
pub fn to_dense(s: &SparseSpectrum) -> DenseFunction {
    s.to_dense()
}

/// `from_dense` as a free function.
pub fn to_sparse(dense: &DenseFunction, threshold: f64) -> Result<SparseSpectrum> {
    SparseSpectrum::from_dense(dense, threshold)
}
