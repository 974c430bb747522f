//! Lagged m-th-order moments
//! `r_m(i_1, ..., i_{m-1}) = (1/|G|) sum_i f_i f_{i+i_1} ... f_{i+i_{m-1}}`,
//! computed directly and from the spectrum. At zero lags `r_m` is the m-th raw
//! moment.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::group::{GroupIndex, GroupSpec};
use crate::limits::{self, Limits};
use crate::spectrum::{DenseFunction, Side, SparseSpectrum};

/// The `m - 1` lags of an m-th-order moment, stored as ordinals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LagVector {
    group: GroupSpec,
    lags: Vec<usize>,
}

impl LagVector {
    pub fn new(group: GroupSpec, lags: &[GroupIndex]) -> Result<Self> {
        let lags = lags.iter().map(|l| group.encode(l)).collect::<Result<Vec<_>>>()?;
        Ok(Self { group, lags })
    }

    pub fn from_ordinals(group: GroupSpec, lags: Vec<usize>) -> Result<Self> {
        for &l in &lags {
            group.check_ordinal(l)?;
        }
        Ok(Self { group, lags })
    }

    /// `m - 1` zero lags.
    pub fn zeros(group: GroupSpec, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("moment order must be at least 1".into()));
        }
        Ok(Self {
            group,
            lags: vec![0; m - 1],
        })
    }

    /// Parses `"i1;i2;..."` where each lag is an ordinal (`5`) or a digit
    /// tuple (`2,1` or `[2,1]`). An empty string means no lags.
    pub fn parse(group: GroupSpec, text: &str) -> Result<Self> {
        let mut lags = Vec::new();
        for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let inner = part.trim_start_matches(['[', '(']).trim_end_matches([']', ')']);
            let fields = inner
                .split(',')
                .map(|d| {
                    d.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Parse(format!("bad lag {part:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            let is_tuple = part.contains(',') || part.starts_with(['[', '(']);
            let ordinal = if is_tuple {
                group.encode(&GroupIndex::new(fields))?
            } else {
                group.check_ordinal(fields[0])?;
                fields[0]
            };
            lags.push(ordinal);
        }
        Ok(Self { group, lags })
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn lags(&self) -> &[usize] {
        &self.lags
    }

    /// The moment order `m = lags + 1`.
    pub fn order(&self) -> usize {
        self.lags.len() + 1
    }
}

pub fn lagged_moment(f: &DenseFunction, lags: &LagVector) -> Result<Complex64> {
    if f.side() != Side::Primal {
        return Err(Error::SideMismatch {
            expected: Side::Primal.name(),
            found: f.side().name(),
        });
    }
    if f.group() != lags.group() {
        return Err(Error::GroupMismatch(format!("{} vs {}", f.group(), lags.group())));
    }
    let g = f.group();
    let v = f.values();
    let total: Complex64 = (0..g.order())
        .map(|i| {
            lags.lags
                .iter()
                .fold(v[i], |acc, &l| acc * v[g.add_ord(i, l)])
        })
        .sum();
    Ok(total / g.order() as f64)
}

/// Sums `fhat_{j_1} ... fhat_{j_m} * phase` over ordered `(j_1, ..., j_{m-1})`
/// drawn from the nonzero coefficients, with `j_m` forced to
/// `-(j_1 + ... + j_{m-1})`.
pub fn lagged_moment_fourier(fhat: &DenseFunction, lags: &LagVector, limits: &Limits) -> Result<Complex64> {
    if fhat.side() != Side::Fourier {
        return Err(Error::SideMismatch {
            expected: Side::Fourier.name(),
            found: fhat.side().name(),
        });
    }
    let support: Vec<usize> = (0..fhat.len()).filter(|&j| fhat.get(j) != Complex64::new(0.0, 0.0)).collect();
    resonance_sum(fhat.group(), lags, &support, |j| fhat.get(j), limits)
}

pub fn lagged_moment_sparse(s: &SparseSpectrum, lags: &LagVector, limits: &Limits) -> Result<Complex64> {
    resonance_sum(s.group(), lags, &s.support(), |j| s.get_ordinal(j), limits)
}

fn resonance_sum(
    group: &GroupSpec,
    lags: &LagVector,
    support: &[usize],
    coeff: impl Fn(usize) -> Complex64,
    limits: &Limits,
) -> Result<Complex64> {
    if group != lags.group() {
        return Err(Error::GroupMismatch(format!("{group} vs {}", lags.group())));
    }
    let k = lags.lags.len();
    let nodes = (support.len() as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    limits::check("lagged moment terms", nodes, limits.max_terms)?;
    if k == 0 {
        return Ok(coeff(0));
    }
    if support.is_empty() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let lag_digits: Vec<Vec<usize>> = lags.lags.iter().map(|&l| group.digits_of(l).collect()).collect();
    let moduli = group.moduli();
    let mut total = Complex64::new(0.0, 0.0);
    let mut cursor = vec![0usize; k];
    let mut exponents = vec![0usize; moduli.len()];
    loop {
        let mut product = Complex64::new(1.0, 0.0);
        let mut sum = 0;
        exponents.iter_mut().for_each(|e| *e = 0);
        for (q, &c) in cursor.iter().enumerate() {
            let j = support[c];
            product *= coeff(j);
            sum = group.add_ord(sum, j);
            for (l, d) in group.digits_of(j).enumerate() {
                exponents[l] = (exponents[l] + lag_digits[q][l] * d) % moduli[l];
            }
        }
        let last = group.neg_ord(sum);
        let closing = coeff(last);
        assert_eq!(group.add_ord(sum, last), 0, "resonance condition violated");
        if closing != Complex64::new(0.0, 0.0) {
            let turns: f64 = exponents
                .iter()
                .zip(moduli)
                .map(|(&e, &n)| e as f64 / n as f64)
                .sum();
            total += product * closing * Complex64::from_polar(1.0, TAU * turns);
        }
        // odometer over support^k
        let mut q = 0;
        loop {
            if q == k {
                return Ok(total);
            }
            cursor[q] += 1;
            if cursor[q] < support.len() {
                break;
            }
            cursor[q] = 0;
            q += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::sample64_spectrum;
    use crate::moments::direct_general_moment;
    use crate::spectrum::{dft, idft, MomentCenter};

    fn sample(n: usize) -> DenseFunction {
        let g = GroupSpec::cyclic(n).unwrap();
        let values: Vec<Complex64> = (0..n)
            .map(|k| Complex64::new((k as f64 * 0.7).sin() + 0.3, (k as f64 * 1.3).cos() * 0.2))
            .collect();
        DenseFunction::new(g, values, Side::Primal).unwrap()
    }

    #[test]
    fn zero_lags_give_raw_moments() {
        let f = sample(9);
        for m in 1..=4 {
            let lags = LagVector::zeros(f.group().clone(), m).unwrap();
            let direct = lagged_moment(&f, &lags).unwrap();
            let raw = direct_general_moment(&f, MomentCenter::zero(), m as u32).unwrap();
            assert!((direct - raw).norm() < 1e-12);
        }
    }

    #[test]
    fn autocorrelation_at_lag() {
        let f = sample(7);
        let lags = LagVector::from_ordinals(f.group().clone(), vec![3]).unwrap();
        let expected: Complex64 = (0..7).map(|i| f.get(i) * f.get((i + 3) % 7)).sum::<Complex64>() / 7.0;
        assert!((lagged_moment(&f, &lags).unwrap() - expected).norm() < 1e-14);
    }

    #[test]
    fn dual_paths_agree_on_mixed_group() {
        let g = GroupSpec::new(vec![3, 4]).unwrap();
        let values: Vec<Complex64> = (0..12)
            .map(|k| Complex64::new((k * k % 5) as f64 - 2.0, (k % 3) as f64 * 0.5))
            .collect();
        let f = DenseFunction::new(g.clone(), values, Side::Primal).unwrap();
        let fhat = dft(&f).unwrap();
        let lags = LagVector::parse(g, "[1,3]; 7 ;(2,0)").unwrap();
        assert_eq!(lags.lags(), &[7, 7, 8]);
        let a = lagged_moment(&f, &lags).unwrap();
        let b = lagged_moment_fourier(&fhat, &lags, &Limits::default()).unwrap();
        assert!((a - b).norm() <= 1e-9 * a.norm().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn table3_third_moment() {
        let s = sample64_spectrum();
        let lags = LagVector::zeros(s.group().clone(), 3).unwrap();
        let r = lagged_moment_sparse(&s, &lags, &Limits::default()).unwrap();
        assert!((r.re + 16.91).abs() < 0.02, "{r}");
        assert!(r.im.abs() < 1e-12);
    }

    #[test]
    fn single_character() {
        let g = GroupSpec::cyclic(8).unwrap();
        let c = Complex64::new(0.5, -0.25);
        let mut fhat = DenseFunction::zeros(g.clone(), Side::Fourier);
        fhat.values_mut()[3] = c;
        fhat.values_mut()[5] = c.conj();
        let f = idft(&fhat).unwrap();
        let lags = LagVector::from_ordinals(g, vec![2]).unwrap();
        // r_2(tau) = sum_j fhat_j fhat_{-j} w^(tau j)
        let w = |e: f64| Complex64::from_polar(1.0, TAU * e / 8.0);
        let expected = c * c.conj() * (w(6.0) + w(10.0));
        assert!((lagged_moment(&f, &lags).unwrap() - expected).norm() < 1e-12);
        assert!((lagged_moment_fourier(&fhat, &lags, &Limits::default()).unwrap() - expected).norm() < 1e-12);
    }

    #[test]
    fn errors() {
        let f = sample(4);
        let other = LagVector::zeros(GroupSpec::cyclic(5).unwrap(), 2).unwrap();
        assert!(matches!(lagged_moment(&f, &other), Err(Error::GroupMismatch(_))));
        let lags = LagVector::zeros(f.group().clone(), 2).unwrap();
        assert!(matches!(
            lagged_moment_fourier(&f, &lags, &Limits::default()),
            Err(Error::SideMismatch { .. })
        ));
        assert!(LagVector::parse(f.group().clone(), "9").is_err());
        let tight = Limits {
            max_terms: 10,
            ..Limits::default()
        };
        let fhat = dft(&f).unwrap();
        let lags = LagVector::zeros(f.group().clone(), 4).unwrap();
        assert!(matches!(
            lagged_moment_fourier(&fhat, &lags, &tight),
            Err(Error::Resource { .. })
        ));
    }
}
