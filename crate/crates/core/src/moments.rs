//! General, raw and central moments, computed directly from `f` or from its
//! Fourier coefficients alone.
//!
//! The Fourier route evaluates
//!
//! ```text
//! mu_m^(a)(f) = << *^(m-p) fhat^(a), *^p (fhat^(a))_rev >>      0 <= p <= m
//! ```
//!
//! where `fhat^(a)` is the a-diminished spectrum, `*^k` the k-fold
//! autoconvolution and `_rev` the reversal `j -> -j`. The value does not depend
//! on `p`.

use num_complex::Complex64;

use crate::convolution::{self, AutoconvStrategy};
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::spectrum::{DenseFunction, MomentCenter, Side, SparseSpectrum, REAL_TOLERANCE};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Relative tolerance used when cross-checking two splits of the same moment.
const SPLIT_TOLERANCE: f64 = 1e-8;

/// `(1/|G|) sum_i (f_i - a)^m`.
pub fn direct_general_moment(f: &DenseFunction, a: MomentCenter, m: u32) -> Result<Complex64> {
    require_primal(f)?;
    let n = f.len() as f64;
    let sum: Complex64 = f.values().iter().map(|&v| pow(v - a.0, m)).sum();
    Ok(sum / n)
}

/// `(1/|G|) sum_i |f_i - mu|^2`.
pub fn direct_variance(f: &DenseFunction) -> Result<f64> {
    require_primal(f)?;
    let n = f.len() as f64;
    let mean: Complex64 = f.values().iter().sum::<Complex64>() / n;
    Ok(f.values().iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / n)
}

/// The split used when none is given: `m/2` for even `m`, `(m+1)/2` for odd.
pub fn default_split(m: u32) -> u32 {
    m.div_ceil(2)
}

/// Fourier-side general moment about `a`. When `m >= 2` the moment is also
/// evaluated with a second split and the two must agree.
pub fn fourier_general_moment(
    fhat: &DenseFunction,
    a: MomentCenter,
    m: u32,
    p: Option<u32>,
) -> Result<Complex64> {
    require_fourier(fhat)?;
    let p = resolve_split(m, p)?;
    let alt = alternate_split(m, p);
    let depth = [m - p, p, alt.map_or(0, |q| m - q), alt.unwrap_or(0)]
        .into_iter()
        .max()
        .unwrap_or(0) as usize;
    let centered = crate::spectrum::diminish(fhat, a)?;
    let chain = convolution::autoconvolution_chain(&centered, depth, AutoconvStrategy::RoundTrip)?;
    let pair = |q: u32, p: u32| dense_pair(&chain[q as usize], &chain[p as usize]);
    let value = pair(m - p, p);
    if let Some(q) = alt {
        check_split(value, pair(m - q, q), m)?;
    }
    Ok(value)
}

/// [`fourier_general_moment`] on a sparse spectrum, using sparse convolutions.
pub fn fourier_general_moment_sparse(
    s: &SparseSpectrum,
    a: MomentCenter,
    m: u32,
    p: Option<u32>,
    limits: &Limits,
) -> Result<Complex64> {
    let p = resolve_split(m, p)?;
    let alt = alternate_split(m, p);
    let depth = [m - p, p, alt.map_or(0, |q| m - q), alt.unwrap_or(0)]
        .into_iter()
        .max()
        .unwrap_or(0) as usize;
    let chain = convolution::sparse_autoconvolution_chain(&s.diminish(a), depth, limits)?;
    let pair = |q: u32, p: u32| sparse_pair(&chain[q as usize], &chain[p as usize]);
    let value = pair(m - p, p);
    if let Some(q) = alt {
        check_split(value, pair(m - q, q), m)?;
    }
    Ok(value)
}

/// `sum_{j != 0} |fhat_j|^2`.
pub fn fourier_variance(fhat: &DenseFunction) -> Result<f64> {
    require_fourier(fhat)?;
    Ok(fhat.values()[1..].iter().map(|v| v.norm_sqr()).sum())
}

pub fn fourier_variance_sparse(s: &SparseSpectrum) -> f64 {
    s.iter().filter(|&(j, _)| j != 0).map(|(_, v)| v.norm_sqr()).sum()
}

/// Central moments from raw moments: `mu_m = sum_k C(m,k) mu'_k (-mu)^(m-k)`.
/// `raw[k]` holds `mu'_k` with `raw[0] = 1`.
pub fn central_from_raw(raw: &[Complex64], mean: Complex64) -> Vec<Complex64> {
    (0..raw.len())
        .map(|m| {
            let mut binom = 1.0f64;
            let mut acc = ZERO;
            for (k, &r) in raw.iter().enumerate().take(m + 1) {
                acc += binom * r * pow(-mean, (m - k) as u32);
                binom = binom * (m - k) as f64 / (k + 1) as f64;
            }
            acc
        })
        .collect()
}

/// Which point the report's general moments are taken about.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Center {
    Raw,
    Central,
    Point(Complex64),
}

impl std::str::FromStr for Center {
    type Err = Error;

    /// `raw`, `central`, or `a=<re>[+/-<im>i]`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "raw" => Ok(Center::Raw),
            "central" => Ok(Center::Central),
            other => {
                let value = other
                    .strip_prefix("a=")
                    .ok_or_else(|| Error::Parse(format!("unknown center {other:?}")))?;
                Ok(Center::Point(crate::io::parse_complex(value)?))
            }
        }
    }
}

/// Skewness, kurtosis, hyperskewness and hyperkurtosis of a real function.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Standardized {
    pub skewness: Option<f64>,
    pub kurtosis: Option<f64>,
    pub hyperskewness: Option<f64>,
    pub hyperkurtosis: Option<f64>,
}

/// Statistics of `f` derived from its spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub max_order: u32,
    pub mean: Complex64,
    pub variance: f64,
    /// `central[k]` is `mu_k` for `k = 0..=max_order`.
    pub central: Vec<Complex64>,
    /// `raw[k]` is `mu'_k` for `k = 0..=max_order`.
    pub raw: Vec<Complex64>,
    /// The point the `general` moments are taken about.
    pub center: Complex64,
    /// `general[k]` is `mu_k^(center)`.
    pub general: Vec<Complex64>,
    /// True when the spectrum is conjugate symmetric, i.e. `f` is real.
    pub real: bool,
    /// Present only for real `f` with `sigma > 0`.
    pub standardized: Option<Standardized>,
}

impl MomentReport {
    pub fn central_moment(&self, m: u32) -> Option<Complex64> {
        self.central.get(m as usize).copied()
    }

    pub fn raw_moment(&self, m: u32) -> Option<Complex64> {
        self.raw.get(m as usize).copied()
    }

    pub fn skewness(&self) -> Option<f64> {
        self.standardized.and_then(|s| s.skewness)
    }

    pub fn kurtosis(&self) -> Option<f64> {
        self.standardized.and_then(|s| s.kurtosis)
    }

    pub fn hyperskewness(&self) -> Option<f64> {
        self.standardized.and_then(|s| s.hyperskewness)
    }

    pub fn hyperkurtosis(&self) -> Option<f64> {
        self.standardized.and_then(|s| s.hyperkurtosis)
    }
}

/// All moments up to `max_order` from one autoconvolution chain per center.
pub fn moment_report(fhat: &DenseFunction, max_order: u32, center: Center) -> Result<MomentReport> {
    require_fourier(fhat)?;
    check_max_order(max_order)?;
    let mean = fhat.get(0);
    let depth = default_split(max_order) as usize;
    let chain_about = |a: Complex64| -> Result<Vec<Complex64>> {
        let centered = crate::spectrum::diminish(fhat, MomentCenter(a))?;
        let chain = convolution::autoconvolution_chain(&centered, depth, AutoconvStrategy::RoundTrip)?;
        Ok(moments_from_chain(max_order, |q, p| dense_pair(&chain[q], &chain[p])))
    };
    let real = fhat.is_conjugate_symmetric(REAL_TOLERANCE);
    let variance = fourier_variance(fhat)?;
    assemble(max_order, mean, variance, real, center, chain_about)
}

/// [`moment_report`] for a sparse spectrum; chains are built by sparse
/// convolution, so the cost scales with the support rather than `|G|`.
pub fn moment_report_sparse(
    s: &SparseSpectrum,
    max_order: u32,
    center: Center,
    limits: &Limits,
) -> Result<MomentReport> {
    check_max_order(max_order)?;
    let mean = s.mean();
    let depth = default_split(max_order) as usize;
    let chain_about = |a: Complex64| -> Result<Vec<Complex64>> {
        let chain = convolution::sparse_autoconvolution_chain(&s.diminish(MomentCenter(a)), depth, limits)?;
        Ok(moments_from_chain(max_order, |q, p| sparse_pair(&chain[q], &chain[p])))
    };
    let real = s.is_conjugate_symmetric(REAL_TOLERANCE);
    let variance = fourier_variance_sparse(s);
    assemble(max_order, mean, variance, real, center, chain_about)
}

const ROUNDOFF_VARIANCE: f64 = 1e-24;

fn assemble(
    max_order: u32,
    mean: Complex64,
    variance: f64,
    real: bool,
    center: Center,
    chain_about: impl Fn(Complex64) -> Result<Vec<Complex64>>,
) -> Result<MomentReport> {
    let central = chain_about(mean)?;
    let raw = chain_about(ZERO)?;
    debug_assert!((central[0] - ONE).norm() < 1e-12);
    debug_assert!(central[1] == ZERO);
    let (center_point, general) = match center {
        Center::Raw => (ZERO, raw.clone()),
        Center::Central => (mean, central.clone()),
        Center::Point(a) => (a, chain_about(a)?),
    };
    // variance at roundoff level relative to the mean is zero
    let variance = if variance <= ROUNDOFF_VARIANCE * mean.norm_sqr() { 0.0 } else { variance };
    let sigma = variance.sqrt();
    let standardized = if real && sigma > 0.0 {
        let at = |m: u32| central.get(m as usize).map(|v| v.re / sigma.powi(m as i32));
        Some(Standardized {
            skewness: at(3),
            kurtosis: at(4),
            hyperskewness: at(5),
            hyperkurtosis: at(6),
        })
    } else {
        None
    };
    Ok(MomentReport {
        max_order,
        mean,
        variance,
        central,
        raw,
        center: center_point,
        general,
        real,
        standardized,
    })
}

/// Moments `0..=max_order` from `pair(q, p) = << *^q g, (*^p g)_rev >>` with the
/// default split for each order.
fn moments_from_chain(max_order: u32, pair: impl Fn(usize, usize) -> Complex64) -> Vec<Complex64> {
    (0..=max_order)
        .map(|m| {
            let p = default_split(m);
            pair((m - p) as usize, p as usize)
        })
        .collect()
}

fn dense_pair(a: &DenseFunction, b: &DenseFunction) -> Complex64 {
    let group = a.group();
    a.values()
        .iter()
        .enumerate()
        .map(|(j, x)| x * b.get(group.neg_ord(j)))
        .sum()
}

fn sparse_pair(a: &SparseSpectrum, b: &SparseSpectrum) -> Complex64 {
    let group = a.group();
    a.iter().map(|(j, x)| x * b.get_ordinal(group.neg_ord(j))).sum()
}

fn resolve_split(m: u32, p: Option<u32>) -> Result<u32> {
    let p = p.unwrap_or_else(|| default_split(m));
    if p > m {
        return Err(Error::InvalidArgument(format!("split p = {p} exceeds order m = {m}")));
    }
    Ok(p)
}

fn alternate_split(m: u32, p: u32) -> Option<u32> {
    if m < 2 {
        None
    } else if p > 0 {
        Some(p - 1)
    } else {
        Some(p + 1)
    }
}

fn check_split(a: Complex64, b: Complex64, m: u32) -> Result<()> {
    let scale = a.norm().max(b.norm()).max(1e-300);
    if (a - b).norm() > SPLIT_TOLERANCE * scale.max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "order-{m} moment depends on the split: {a} vs {b}"
        )));
    }
    Ok(())
}

fn check_max_order(max_order: u32) -> Result<()> {
    if max_order < 2 {
        Err(Error::InvalidArgument(format!(
            "a moment report needs max order >= 2, got {max_order}"
        )))
    } else {
        Ok(())
    }
}

fn require_primal(f: &DenseFunction) -> Result<()> {
    if f.side() == Side::Primal {
        Ok(())
    } else {
        Err(Error::SideMismatch {
            expected: Side::Primal.name(),
            found: f.side().name(),
        })
    }
}

fn require_fourier(f: &DenseFunction) -> Result<()> {
    if f.side() == Side::Fourier {
        Ok(())
    } else {
        Err(Error::SideMismatch {
            expected: Side::Fourier.name(),
            found: f.side().name(),
        })
    }
}

fn pow(z: Complex64, m: u32) -> Complex64 {
    let mut acc = ONE;
    for _ in 0..m {
        acc *= z;
    }
    acc
}
