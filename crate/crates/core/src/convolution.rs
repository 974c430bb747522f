//! Circular convolution on a group, circulant operators and autoconvolution.
//!
//! `(f * g)_i = sum_j f_{i-j} g_j`. The circulant operator `C_f` with entries
//! `C_f(i, j) = f_{i-j}` performs this product as a matrix-vector product, and
//! `C_f^m = C_{*^m f}`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::limits::{self, Limits};
use crate::spectrum::{self, DenseFunction, SparseSpectrum};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Direct convolution, `O(|G| * nnz(g))`.
pub fn convolve(f: &DenseFunction, g: &DenseFunction) -> Result<DenseFunction> {
    f.check_compatible(g)?;
    Ok(f.with_values(convolve_slices(f.group(), f.values(), g.values())))
}

pub(crate) fn convolve_slices(
    group: &GroupSpec,
    f: &[Complex64],
    g: &[Complex64],
) -> Vec<Complex64> {
    let mut out = vec![ZERO; f.len()];
    for (j, &gj) in g.iter().enumerate() {
        if gj == ZERO {
            continue;
        }
        for (k, &fk) in f.iter().enumerate() {
            out[group.add_ord(k, j)] += fk * gj;
        }
    }
    out
}

/// Convolution through the transform: `f * g = T(T^-1 f . T^-1 g)`.
pub fn convolve_via_transform(f: &DenseFunction, g: &DenseFunction) -> Result<DenseFunction> {
    f.check_compatible(g)?;
    let group = f.group();
    let mut a = f.values().to_vec();
    let mut b = g.values().to_vec();
    spectrum::inverse_raw(group, &mut a);
    spectrum::inverse_raw(group, &mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    spectrum::forward_raw(group, &mut a);
    Ok(f.with_values(a))
}

/// How an autoconvolution was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AutoconvStrategy {
    /// `*^m v = v * (*^(m-1) v)` by direct convolutions.
    Recursive,
    /// Inverse transform, element-wise `m`-th power, forward transform.
    RoundTrip,
}

impl AutoconvStrategy {
    pub fn name(self) -> &'static str {
        match self {
            AutoconvStrategy::Recursive => "recursive",
            AutoconvStrategy::RoundTrip => "round-trip",
        }
    }
}

impl std::str::FromStr for AutoconvStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "recursive" => Ok(Self::Recursive),
            "round-trip" | "roundtrip" => Ok(Self::RoundTrip),
            other => Err(Error::Parse(format!("unknown autoconvolution strategy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Autoconvolution {
    pub value: DenseFunction,
    pub strategy: AutoconvStrategy,
}

/// `*^m v` with the default (round-trip) strategy.
pub fn autoconvolve(v: &DenseFunction, m: i64) -> Result<Autoconvolution> {
    autoconvolve_with(v, m, AutoconvStrategy::RoundTrip)
}

pub fn autoconvolve_with(
    v: &DenseFunction,
    m: i64,
    strategy: AutoconvStrategy,
) -> Result<Autoconvolution> {
    if m < 0 {
        return Err(Error::InvalidArgument(format!(
            "autoconvolution power must be nonnegative, got {m}"
        )));
    }
    let chain = autoconvolution_chain(v, m as usize, strategy)?;
    Ok(Autoconvolution {
        value: chain.into_iter().last().expect("chain has m+1 entries"),
        strategy,
    })
}

/// `[*^0 v, *^1 v, ..., *^k v]`.
pub fn autoconvolution_chain(
    v: &DenseFunction,
    k: usize,
    strategy: AutoconvStrategy,
) -> Result<Vec<DenseFunction>> {
    let group = v.group().clone();
    let mut chain = Vec::with_capacity(k + 1);
    chain.push(DenseFunction::basis(group.clone(), 0, v.side())?);
    if k == 0 {
        return Ok(chain);
    }
    match strategy {
        AutoconvStrategy::Recursive => {
            chain.push(v.clone());
            for _ in 2..=k {
                let prev = chain.last().expect("nonempty");
                chain.push(v.with_values(convolve_slices(&group, prev.values(), v.values())));
            }
        }
        AutoconvStrategy::RoundTrip => {
            let mut primal = v.values().to_vec();
            spectrum::inverse_raw(&group, &mut primal);
            let mut power = primal.clone();
            chain.push(v.clone());
            for _ in 2..=k {
                for (p, x) in power.iter_mut().zip(&primal) {
                    *p *= x;
                }
                let mut out = power.clone();
                spectrum::forward_raw(&group, &mut out);
                chain.push(v.with_values(out));
            }
        }
    }
    Ok(chain)
}

/// Convolution of sparse vectors; the result's support lies in the sumset of
/// the supports.
pub fn sparse_convolve(
    a: &SparseSpectrum,
    b: &SparseSpectrum,
    limits: &Limits,
) -> Result<SparseSpectrum> {
    if a.group() != b.group() {
        return Err(Error::GroupMismatch(format!("{} vs {}", a.group(), b.group())));
    }
    let group = a.group();
    let projected = (a.nnz() as u128 * b.nnz() as u128).min(group.order() as u128);
    limits::check("sparse convolution support", projected, limits.max_support as u128)?;
    let mut acc = std::collections::BTreeMap::new();
    for (i, x) in a.iter() {
        for (j, y) in b.iter() {
            *acc.entry(group.add_ord(i, j)).or_insert(ZERO) += x * y;
        }
    }
    SparseSpectrum::from_ordinals(group.clone(), acc)
}

/// `[*^0 s, ..., *^k s]` computed by repeated sparse convolution.
pub fn sparse_autoconvolution_chain(
    s: &SparseSpectrum,
    k: usize,
    limits: &Limits,
) -> Result<Vec<SparseSpectrum>> {
    let group = s.group().clone();
    let mut chain = vec![SparseSpectrum::from_ordinals(group, [(0, ONE)])?];
    if k == 0 {
        return Ok(chain);
    }
    chain.push(s.clone());
    for _ in 2..=k {
        let next = sparse_convolve(chain.last().expect("nonempty"), s, limits)?;
        chain.push(next);
    }
    Ok(chain)
}

/// The multi-factor circulant operator `C_f`, `C_f(i, j) = f_{i-j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CirculantOperator {
    generator: DenseFunction,
    matrix: Option<Vec<Complex64>>,
}

impl CirculantOperator {
    /// Matrix-free operator.
    pub fn new(generator: DenseFunction) -> Self {
        Self {
            generator,
            matrix: None,
        }
    }

    /// Operator with its `|G| x |G|` matrix formed, guarded by
    /// `limits.max_circulant_order`.
    pub fn materialized(generator: DenseFunction, limits: &Limits) -> Result<Self> {
        let n = generator.len();
        limits::check(
            "circulant matrix order",
            n as u128,
            limits.max_circulant_order as u128,
        )?;
        let group = generator.group();
        let f = generator.values();
        let mut matrix = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                matrix.push(f[group.sub_ord(i, j)]);
            }
        }
        Ok(Self {
            generator,
            matrix: Some(matrix),
        })
    }

    pub fn generator(&self) -> &DenseFunction {
        &self.generator
    }

    pub fn group(&self) -> &GroupSpec {
        self.generator.group()
    }

    pub fn is_materialized(&self) -> bool {
        self.matrix.is_some()
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        match &self.matrix {
            Some(m) => m[i * self.generator.len() + j],
            None => self.generator.get(self.group().sub_ord(i, j)),
        }
    }

    /// `C_f g`; uses the stored matrix when there is one.
    pub fn apply(&self, g: &DenseFunction) -> Result<DenseFunction> {
        match &self.matrix {
            Some(_) => self.apply_materialized(g),
            None => self.apply_matrix_free(g),
        }
    }

    pub fn apply_matrix_free(&self, g: &DenseFunction) -> Result<DenseFunction> {
        convolve(&self.generator, g)
    }

    pub fn apply_materialized(&self, g: &DenseFunction) -> Result<DenseFunction> {
        self.generator.check_compatible(g)?;
        let matrix = self.matrix.as_ref().ok_or_else(|| {
            Error::Unsupported("operator has no materialized matrix".into())
        })?;
        let n = g.len();
        let x = g.values();
        let values = (0..n)
            .map(|i| spectrum::dot_slices(&matrix[i * n..(i + 1) * n], x))
            .collect();
        Ok(g.with_values(values))
    }

    /// `C_f C_g = C_{f*g}`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        Ok(Self::new(convolve(&self.generator, &other.generator)?))
    }
}

/// The constant main-diagonal value of `C^m`, computed from dense matrix
/// powers. Every diagonal entry is checked against the first.
pub fn power_diagonal(c: &CirculantOperator, m: u32, limits: &Limits) -> Result<Complex64> {
    let n = c.generator.len();
    limits::check(
        "circulant matrix power order",
        n as u128,
        limits.max_matrix_power_order.min(limits.max_circulant_order) as u128,
    )?;
    let base: Vec<Complex64> = match &c.matrix {
        Some(m) => m.clone(),
        None => (0..n * n).map(|k| c.entry(k / n, k % n)).collect(),
    };
    let mut result = identity(n);
    let mut square = base;
    let mut e = m;
    while e > 0 {
        if e & 1 == 1 {
            result = matmul(&result, &square, n);
        }
        e >>= 1;
        if e > 0 {
            square = matmul(&square, &square, n);
        }
    }
    let first = result[0];
    let scale = result.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
    for k in 1..n {
        let d = result[k * n + k];
        if (d - first).norm() > 1e-9 * scale {
            return Err(Error::InvalidArgument(format!(
                "diagonal of C^{m} is not constant: entry {k} is {d}, entry 0 is {first}"
            )));
        }
    }
    Ok(first)
}

fn identity(n: usize) -> Vec<Complex64> {
    let mut out = vec![ZERO; n * n];
    for k in 0..n {
        out[k * n + k] = ONE;
    }
    out
}

fn matmul(a: &[Complex64], b: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![ZERO; n * n];
    for i in 0..n {
        let row = &mut out[i * n..(i + 1) * n];
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == ZERO {
                continue;
            }
            for (o, &bkj) in row.iter_mut().zip(&b[k * n..(k + 1) * n]) {
                *o += aik * bkj;
            }
        }
    }
    out
}
