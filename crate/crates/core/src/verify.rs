//! Randomized oracle harness: every Fourier-side computation is checked
//! against an independent direct computation on seeded random inputs.

use std::fmt;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::convolution::{autoconvolve_with, AutoconvStrategy};
use crate::error::Result;
use crate::group::{GroupSpec, IndexOrdering};
use crate::limits::Limits;
use crate::moments::{direct_general_moment, fourier_general_moment, fourier_general_moment_sparse};
use crate::spectrum::{dft, DenseFunction, MomentCenter, Side, SparseSpectrum};
use crate::symbolic::{annihilating_terms_with, evaluate, ExpansionMode};
use crate::timeseries::{lagged_moment, lagged_moment_fourier, LagVector};

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub seed: u64,
    pub cases: usize,
    pub max_group_order: usize,
    pub max_order: u32,
    pub tolerance: f64,
    /// Adds this amount to one Fourier coefficient before the Fourier-side
    /// computations, to confirm the harness notices.
    pub fault: Option<f64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 0x5eed,
            cases: 100,
            max_group_order: 128,
            max_order: 5,
            tolerance: 1e-9,
            fault: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    pub max_deviation: f64,
    /// Description of the worst case when any case failed.
    pub worst: Option<String>,
}

impl SuiteResult {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            cases: 0,
            failures: 0,
            max_deviation: 0.0,
            worst: None,
        }
    }

    fn record(&mut self, deviation: f64, tolerance: f64, describe: impl FnOnce() -> String) {
        self.cases += 1;
        let failed = deviation.is_nan() || deviation > tolerance;
        if failed {
            self.failures += 1;
        }
        if deviation.is_nan() || deviation > self.max_deviation {
            self.max_deviation = deviation;
            if failed {
                self.worst = Some(describe());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "seed {} | cases {} | |G| <= {} | m <= {} | tolerance {:e}",
            self.config.seed,
            self.config.cases,
            self.config.max_group_order,
            self.config.max_order,
            self.config.tolerance
        )?;
        for s in &self.suites {
            writeln!(
                f,
                "{:<6} {:<24} cases {:>5}  failures {:>4}  max rel deviation {:.3e}",
                if s.passed() { "ok" } else { "FAIL" },
                s.name,
                s.cases,
                s.failures,
                s.max_deviation
            )?;
            if let Some(w) = &s.worst {
                writeln!(f, "       worst: {w}")?;
            }
        }
        Ok(())
    }
}

/// A random group with order in `2..=max_order`, mixing moduli and orderings.
pub fn random_group(rng: &mut StdRng, max_order: usize) -> GroupSpec {
    let max_order = max_order.max(2);
    loop {
        let rank = rng.gen_range(1..=3);
        let mut moduli = Vec::with_capacity(rank);
        let mut order = 1usize;
        for _ in 0..rank {
            let cap = (max_order / order).min(9);
            if cap < 2 {
                break;
            }
            let n = rng.gen_range(2..=cap);
            moduli.push(n);
            order *= n;
        }
        if moduli.is_empty() {
            continue;
        }
        let ordering = if rng.gen_bool(0.5) {
            IndexOrdering::MostSignificantFirst
        } else {
            IndexOrdering::LeastSignificantFirst
        };
        return GroupSpec::with_ordering(moduli, ordering).expect("moduli are at least 2");
    }
}

pub fn random_complex(rng: &mut StdRng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_function(rng: &mut StdRng, group: &GroupSpec) -> DenseFunction {
    let values = (0..group.order()).map(|_| random_complex(rng)).collect();
    DenseFunction::new(group.clone(), values, Side::Primal).expect("length matches")
}

/// `|x - y| / max(scale, tiny)`.
pub fn relative_deviation(x: Complex64, y: Complex64, scale: f64) -> f64 {
    (x - y).norm() / scale.max(f64::MIN_POSITIVE)
}

/// `(1/|G|) sum |f_i - a|^m`, the natural magnitude of the m-th moment about `a`.
fn absolute_moment(f: &DenseFunction, a: Complex64, m: u32) -> f64 {
    f.values().iter().map(|v| (v - a).norm().powi(m as i32)).sum::<f64>() / f.len() as f64
}

fn inject(fhat: &mut DenseFunction, rng: &mut StdRng, fault: Option<f64>) {
    if let Some(delta) = fault {
        let j = rng.gen_range(0..fhat.len());
        fhat.values_mut()[j] += delta;
    }
}

pub fn run(config: &VerifyConfig) -> Result<VerifyReport> {
    let mut rng = StdRng::seed_from_u64(config.seed);
    let limits = Limits::default();
    let tol = config.tolerance;
    let max_m = config.max_order.max(1);
    let mut direct = SuiteResult::new("direct vs fourier");
    let mut splits = SuiteResult::new("split independence");
    let mut strategies = SuiteResult::new("autoconv strategies");
    let mut symbolic = SuiteResult::new("symbolic vs numeric");
    let mut lagged = SuiteResult::new("lagged dual path");

    for case in 0..config.cases {
        let group = random_group(&mut rng, config.max_group_order);
        let f = random_function(&mut rng, &group);
        let a = if rng.gen_bool(0.3) { Complex64::new(0.0, 0.0) } else { random_complex(&mut rng) };
        let m = rng.gen_range(1..=max_m);
        let mut fhat = dft(&f)?;
        inject(&mut fhat, &mut rng, config.fault);

        let scale = absolute_moment(&f, a, m).max(1e-300);
        let x = direct_general_moment(&f, MomentCenter(a), m)?;
        let y = fourier_general_moment(&fhat, MomentCenter(a), m, None)?;
        direct.record(relative_deviation(x, y, scale), tol, || {
            format!("case {case}: group {group}, m {m}, a {a}: direct {x} vs fourier {y}")
        });

        // every split p = 0..=m against p = 0
        if m >= 2 {
            let centered = crate::spectrum::diminish(&fhat, MomentCenter(a))?;
            let chain = crate::convolution::autoconvolution_chain(&centered, m as usize, AutoconvStrategy::RoundTrip)?;
            let pair = |q: usize, p: usize| -> Complex64 {
                chain[q]
                    .values()
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v * chain[p].get(group.neg_ord(j)))
                    .sum()
            };
            let base = pair(m as usize, 0);
            let worst = (1..=m as usize)
                .map(|p| relative_deviation(pair(m as usize - p, p), base, scale))
                .fold(0.0, f64::max);
            splits.record(worst, tol, || format!("case {case}: group {group}, m {m}"));

            let k = rng.gen_range(0..=m as i64);
            let r = autoconvolve_with(&centered, k, AutoconvStrategy::Recursive)?;
            let t = autoconvolve_with(&centered, k, AutoconvStrategy::RoundTrip)?;
            let norm = r.value.max_abs().max(t.value.max_abs()).max(1.0);
            let dev = r
                .value
                .values()
                .iter()
                .zip(t.value.values())
                .map(|(p, q)| (p - q).norm())
                .fold(0.0, f64::max)
                / norm;
            strategies.record(dev, tol, || format!("case {case}: group {group}, power {k}"));
        }

        // a few random coefficients, enumerated symbolically
        if group.order() <= 64 {
            let nnz = rng.gen_range(1..=group.order().min(6));
            let mut s = SparseSpectrum::new(group.clone());
            for _ in 0..nnz {
                let j = rng.gen_range(0..group.order());
                s.set_ordinal(j, random_complex(&mut rng))?;
            }
            let order = rng.gen_range(1..=max_m.min(5));
            let sym = annihilating_terms_with(&group, order, ExpansionMode::Raw, Some(&s.support()), &limits)?;
            let mut perturbed = s.clone();
            if let Some(delta) = config.fault {
                let j = s.support()[0];
                perturbed.set_ordinal(j, s.get_ordinal(j) + delta)?;
            }
            let value = evaluate(&sym, &perturbed, MomentCenter::zero())?;
            let numeric = fourier_general_moment_sparse(&s, MomentCenter::zero(), order, None, &limits)?;
            let bound = s.iter().map(|(_, v)| v.norm()).sum::<f64>().powi(order as i32).max(1e-300);
            symbolic.record(relative_deviation(value, numeric, bound), tol, || {
                format!("case {case}: group {group}, m {order}, support {:?}", s.support())
            });
        }

        // lagged moments, m <= 4 with |G|^(m-1) kept small
        let lag_m = rng.gen_range(1..=max_m.min(4)) as usize;
        if (group.order() as u128).pow(lag_m as u32 - 1) <= 2_000_000 {
            let lags: Vec<usize> = (1..lag_m).map(|_| rng.gen_range(0..group.order())).collect();
            let lags = LagVector::from_ordinals(group.clone(), lags)?;
            let x = lagged_moment(&f, &lags)?;
            let y = lagged_moment_fourier(&fhat, &lags, &limits)?;
            let scale = absolute_moment(&f, Complex64::new(0.0, 0.0), lag_m as u32).max(1e-300);
            lagged.record(relative_deviation(x, y, scale), tol, || {
                format!("case {case}: group {group}, lags {:?}: direct {x} vs fourier {y}", lags.lags())
            });
        }
    }

    Ok(VerifyReport {
        config: config.clone(),
        suites: vec![direct, splits, strategies, symbolic, lagged],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_run_passes() {
        let config = VerifyConfig {
            cases: 40,
            ..VerifyConfig::default()
        };
        let report = run(&config).unwrap();
        assert!(report.passed(), "{report}");
        assert!(report.suites.iter().all(|s| s.cases > 0), "{report}");
    }

    #[test]
    fn fault_is_detected() {
        let config = VerifyConfig {
            cases: 20,
            fault: Some(0.25),
            ..VerifyConfig::default()
        };
        let report = run(&config).unwrap();
        assert!(!report.passed());
        let text = report.to_string();
        assert!(text.contains("FAIL") && text.contains("worst: case"), "{text}");
    }

    #[test]
    fn deterministic() {
        let config = VerifyConfig {
            cases: 10,
            ..VerifyConfig::default()
        };
        assert_eq!(run(&config).unwrap(), run(&config).unwrap());
    }

    #[test]
    fn random_groups_respect_bound() {
        let mut rng = StdRng::seed_from_u64(1);
        for _ in 0..200 {
            let g = random_group(&mut rng, 30);
            assert!((2..=30).contains(&g.order()));
        }
    }
}
