//! Reference implementations written straight from the definitions, used as
//! oracles for the library's fast paths.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use fourier_moments::{Complex64, GroupSpec};

/// `fhat_j = (1/|G|) sum_i f_i prod_l exp(-2 pi i i_l j_l / N_l)`.
pub fn naive_dft(group: &GroupSpec, f: &[Complex64]) -> Vec<Complex64> {
    let n = group.order();
    (0..n)
        .map(|j| {
            (0..n).map(|i| f[i] * character(group, i, j).conj()).sum::<Complex64>() / n as f64
        })
        .collect()
}

/// `f_i = sum_j fhat_j prod_l exp(2 pi i i_l j_l / N_l)`.
pub fn naive_idft(group: &GroupSpec, fhat: &[Complex64]) -> Vec<Complex64> {
    let n = group.order();
    (0..n)
        .map(|i| (0..n).map(|j| fhat[j] * character(group, i, j)).sum())
        .collect()
}

pub fn character(group: &GroupSpec, i: usize, j: usize) -> Complex64 {
    let turns: f64 = group
        .digits_of(i)
        .zip(group.digits_of(j))
        .zip(group.moduli())
        .map(|((a, b), &n)| ((a * b) % n) as f64 / n as f64)
        .sum();
    Complex64::from_polar(1.0, TAU * turns)
}

/// Adds two ordinals digit by digit, independently of the library's fast paths.
pub fn add_digits(group: &GroupSpec, i: usize, j: usize) -> usize {
    let digits: Vec<usize> = group
        .digits_of(i)
        .zip(group.digits_of(j))
        .zip(group.moduli())
        .map(|((a, b), &n)| (a + b) % n)
        .collect();
    encode(group, &digits)
}

pub fn neg_digits(group: &GroupSpec, j: usize) -> usize {
    let digits: Vec<usize> = group
        .digits_of(j)
        .zip(group.moduli())
        .map(|(d, &n)| (n - d) % n)
        .collect();
    encode(group, &digits)
}

fn encode(group: &GroupSpec, digits: &[usize]) -> usize {
    digits.iter().zip(group.strides()).map(|(d, s)| d * s).sum()
}

/// `(1/|G|) sum_i (f_i - a)^m` by repeated multiplication.
pub fn direct_moment(f: &[Complex64], a: Complex64, m: u32) -> Complex64 {
    f.iter()
        .map(|&v| (0..m).fold(Complex64::new(1.0, 0.0), |acc, _| acc * (v - a)))
        .sum::<Complex64>()
        / f.len() as f64
}

pub fn mean(f: &[Complex64]) -> Complex64 {
    f.iter().sum::<Complex64>() / f.len() as f64
}

/// Every ordered m-tuple over `universe` whose digit sum is zero, grouped by
/// sorted multiset with the number of ordered tuples in each group.
pub fn brute_force_terms(group: &GroupSpec, m: usize, universe: &[usize]) -> BTreeMap<Vec<usize>, u128> {
    let mut out = BTreeMap::new();
    let mut tuple = vec![0usize; m];
    let k = universe.len();
    if k == 0 {
        return out;
    }
    loop {
        let indices: Vec<usize> = tuple.iter().map(|&p| universe[p]).collect();
        if indices.iter().fold(0, |acc, &j| add_digits(group, acc, j)) == 0 {
            let mut key = indices;
            key.sort_unstable();
            *out.entry(key).or_insert(0) += 1;
        }
        let mut q = 0;
        loop {
            if q == m {
                return out;
            }
            tuple[q] += 1;
            if tuple[q] < k {
                break;
            }
            tuple[q] = 0;
            q += 1;
        }
    }
}

pub fn rel_close(x: Complex64, y: Complex64, rel: f64, scale: f64) -> bool {
    (x - y).norm() <= rel * scale.max(x.norm()).max(y.norm()).max(f64::MIN_POSITIVE)
}

/// `(1/|G|) sum |f_i - a|^m`, the magnitude against which moment errors are judged.
pub fn absolute_moment(f: &[Complex64], a: Complex64, m: u32) -> f64 {
    f.iter().map(|v| (v - a).norm().powi(m as i32)).sum::<f64>() / f.len() as f64
}
