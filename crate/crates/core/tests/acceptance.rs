//! Acceptance criteria, one line per criterion.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use fourier_moments::convolution::{autoconvolve_with, AutoconvStrategy};
use fourier_moments::models::{self, sample64_spectrum};
use fourier_moments::moments::{self, Center};
use fourier_moments::spectrum::{dft, idft, parseval_gap};
use fourier_moments::symbolic::{self, ExpansionMode, Notation};
use fourier_moments::timeseries::{self, LagVector};
use fourier_moments::{Complex64, DenseFunction, GroupSpec, IndexOrdering, Limits, MomentCenter, Side, SparseSpectrum};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

macro_rules! ensure {
    ($cond:expr, $($arg:tt)*) => {
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !$cond {
            return Err(format!($($arg)*));
        }
    };
}

fn lib<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn random_complex(rng: &mut StdRng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn random_group(rng: &mut StdRng, max_order: usize) -> GroupSpec {
    loop {
        let rank = rng.gen_range(1..=3);
        let mut moduli = Vec::new();
        let mut order = 1;
        for _ in 0..rank {
            let cap = (max_order / order).min(12);
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
        return GroupSpec::with_ordering(moduli, ordering).unwrap();
    }
}

fn spectrum_of(group: &GroupSpec, values: Vec<Complex64>) -> Result<DenseFunction, String> {
    lib(DenseFunction::new(group.clone(), values, Side::Fourier))
}

fn real_payoffs(s: &SparseSpectrum) -> Result<Vec<f64>, String> {
    let f = lib(idft(&s.to_dense()))?;
    ensure!(f.is_real(1e-12), "payoffs are not real");
    Ok(f.values().iter().map(|v| v.re).collect())
}

fn sixty_four_point_example() -> Outcome {
    let fhat = sample64_spectrum().to_dense();
    let r = lib(moments::moment_report(&fhat, 4, Center::Central))?;
    let (mu3, mu4) = (r.central[3].re, r.central[4].re);
    let (gamma, kappa) = (r.skewness().unwrap_or(f64::NAN), r.kurtosis().unwrap_or(f64::NAN));
    ensure!((r.variance - 8.94).abs() <= 0.01, "variance {}", r.variance);
    ensure!((mu3 + 16.91).abs() <= 0.02, "mu3 {mu3}");
    ensure!((mu4 - 248.24).abs() <= 0.05, "mu4 {mu4}");
    ensure!((gamma + 0.63).abs() <= 0.01, "skewness {gamma}");
    ensure!((kappa - 3.11).abs() <= 0.01, "kurtosis {kappa}");
    Ok(format!(
        "sigma^2 {:.4}, mu3 {mu3:.4}, mu4 {mu4:.4}, skewness {gamma:.4}, kurtosis {kappa:.4}",
        r.variance
    ))
}

fn mixed_group_expansion() -> Outcome {
    let g = lib(GroupSpec::new(vec![3, 2]))?;
    let sym = lib(symbolic::annihilating_terms(&g, 3, ExpansionMode::Raw, None))?;
    ensure!(sym.len() == 10, "{} terms", sym.len());
    let classes: BTreeMap<u128, usize> = sym.multiplicity_classes();
    ensure!(classes == BTreeMap::from([(1, 3), (3, 3), (6, 4)]), "classes {classes:?}");
    let universe = symbolic::multiset_count(6, 3);
    ensure!(universe == 56, "universe {universe}");
    for t in sym.terms() {
        let sum = t.indices().iter().fold(0, |acc, &j| add_digits(&g, acc, j));
        ensure!(sum == 0, "{:?} does not annihilate", t.indices());
    }
    let printed: BTreeSet<(Vec<usize>, u128)> = [
        (vec![0, 0, 0], 1),
        (vec![2, 2, 2], 1),
        (vec![4, 4, 4], 1),
        (vec![0, 1, 1], 3),
        (vec![2, 3, 3], 3),
        (vec![4, 5, 5], 3),
        (vec![0, 2, 4], 6),
        (vec![1, 3, 4], 6),
        (vec![1, 2, 5], 6),
        (vec![0, 3, 5], 6),
    ]
    .into_iter()
    .collect();
    let got: BTreeSet<(Vec<usize>, u128)> =
        sym.terms().iter().map(|t| (t.indices().to_vec(), t.multiplicity())).collect();
    ensure!(got == printed, "terms {got:?}");
    Ok(format!("10 terms {classes:?} of 56, {}", lib(symbolic::render(&sym, Notation::Decimal))?))
}

fn binomial_identities() -> Outcome {
    let mut checked = 0;
    for n in 1..=12usize {
        for d in [1.0, -1.0, 0.5, -0.5] {
            let s = lib(models::direct_effect_spectrum(n, d))?;
            let r = lib(moments::moment_report_sparse(&s, 6, Center::Central, &Limits::default()))?;
            let nf = n as f64;
            let expected = [
                nf * d.powi(2),
                0.0,
                (3.0 * nf * nf - 2.0 * nf) * d.powi(4),
                0.0,
                (15.0 * nf.powi(3) - 30.0 * nf * nf + 16.0 * nf) * d.powi(6),
            ];
            for (k, e) in expected.iter().enumerate() {
                let m = k + 2;
                let scale = e.abs().max((nf * d * d).powf(m as f64 / 2.0));
                let got = r.central[m];
                ensure!((got - e).norm() <= 1e-9 * scale, "n {n}, d {d}: mu{m} {got} vs {e}");
            }
            let standardized = [
                (r.skewness(), 0.0),
                (r.kurtosis(), 3.0 - 2.0 / nf),
                (r.hyperskewness(), 0.0),
                (r.hyperkurtosis(), 15.0 - 30.0 / nf + 16.0 / (nf * nf)),
            ];
            for (k, (got, e)) in standardized.into_iter().enumerate() {
                let got = got.ok_or(format!("n {n}, d {d}: standardized moment {} undefined", k + 3))?;
                ensure!((got - e).abs() <= 1e-12 * e.abs().max(1.0), "n {n}, d {d}: standardized {} {got} vs {e}", k + 3);
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} spectra, mu2..mu6 and four standardized moments"))
}

fn coin_toss_designs() -> Outcome {
    let printed_plain = [-4., -2., -2., 0., -2., 0., 0., 2., -2., 0., 0., 2., 0., 2., 2., 4.];
    let printed_bets = [-4.6, -2., -2., 0.2, -2., 0.2, 0.2, 2., -2., 0.2, 0.2, 2., 0.2, 2., 2., 3.4];
    let plain = real_payoffs(&lib(models::direct_effect_spectrum(4, -1.0))?)?;
    let bets = real_payoffs(&lib(models::graph_spectrum(&lib(models::complete_graph(4, -1.0, 0.1))?))?)?;
    for (got, printed) in [(&plain, &printed_plain), (&bets, &printed_bets)] {
        for (x, y) in got.iter().zip(printed.iter()) {
            ensure!((x - y).abs() < 1e-12 && (x * 10.0).round() / 10.0 == *y, "payoff {x} vs {y}");
        }
    }
    let mut summary = Vec::new();
    for (n, gamma, kappa) in [(4, -0.44, 2.69), (14, -0.99, 4.09)] {
        let s = lib(models::graph_spectrum(&lib(models::complete_graph(n, -1.0, 0.1))?))?;
        let r = lib(moments::moment_report_sparse(&s, 4, Center::Central, &Limits::default()))?;
        let (g, k) = (r.skewness().unwrap_or(f64::NAN), r.kurtosis().unwrap_or(f64::NAN));
        ensure!((g - gamma).abs() <= 0.01 && (k - kappa).abs() <= 0.01, "n {n}: skewness {g}, kurtosis {k}");
        summary.push(format!("n {n}: skewness {g:.4}, kurtosis {k:.4}"));
    }
    Ok(format!("both payoff vectors exact; {}", summary.join("; ")))
}

fn complete_graph_formulas() -> Outcome {
    let mut checked = 0;
    for n in 1..=10usize {
        let nf = n as f64;
        for a in [0.0, 0.05, 0.1, 0.5] {
            let variance = nf + nf * (nf - 1.0) * a * a / 2.0;
            let mu3 = -3.0 * nf * (nf - 1.0) * a - nf * (nf - 1.0) * (nf - 2.0) * a.powi(3);
            let mu4 = nf * (3.0 * nf - 2.0)
                + 3.0 * nf * (5.0 * nf * nf - 13.0 * nf + 8.0) * a * a
                + nf * (15.0 * nf.powi(3) - 78.0 * nf * nf + 131.0 * nf - 68.0) * a.powi(4) / 4.0;
            if a == 0.0 {
                ensure!(variance == nf && mu3 == 0.0 && mu4 == nf * (3.0 * nf - 2.0), "n {n}: no binomial collapse");
            }
            for d in [1.0, -1.0] {
                let s = lib(models::graph_spectrum(&lib(models::complete_graph(n, d, a))?))?;
                let r = lib(moments::moment_report_sparse(&s, 4, Center::Central, &Limits::default()))?;
                for (m, e) in [(2, variance), (3, mu3), (4, mu4)] {
                    let scale = e.abs().max(variance.powf(m as f64 / 2.0));
                    ensure!(
                        (r.central[m] - e).norm() <= 1e-9 * scale,
                        "n {n}, a {a}, d {d}: mu{m} {} vs {e}",
                        r.central[m]
                    );
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} designs, sigma^2 mu3 mu4, binomial collapse at a = 0"))
}

fn genetics_contributions() -> Outcome {
    let s = models::gene_network_top10();
    let sym = lib(symbolic::annihilating_terms(s.group(), 3, ExpansionMode::Central, Some(&s.support())))?;
    let mut rows = lib(symbolic::term_contributions(&sym, &s, MomentCenter(s.mean())))?;
    rows.sort_by(|a, b| b.1.re.total_cmp(&a.1.re));
    let absolute = [0.0400, 0.0137, 0.0021, 0.0015, 0.0012];
    let relative = [0.4910, 0.1681, 0.0255, 0.0185, 0.0146];
    ensure!(rows.len() == 5, "{} contributing terms", rows.len());
    let mut shown = Vec::new();
    for (k, (_, v)) in rows.iter().enumerate() {
        ensure!((v.re - absolute[k]).abs() <= 0.0005, "term {k}: {}", v.re);
        ensure!((v.re / 0.0814 - relative[k]).abs() <= 0.01, "term {k}: relative {}", v.re / 0.0814);
        shown.push(format!("{:.4}", v.re));
    }
    Ok(format!("contributions {}", shown.join(", ")))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let g = random_group(&mut rng, 512);
        let fhat = spectrum_of(&g, (0..g.order()).map(|_| random_complex(&mut rng)).collect())?;
        let f = naive_idft(&g, fhat.values());
        let a = random_complex(&mut rng);
        let m = rng.gen_range(1..=6u32);
        let direct = direct_moment(&f, a, m);
        let scale = absolute_moment(&f, a, m);
        for p in 0..=m {
            let got = lib(moments::fourier_general_moment(&fhat, MomentCenter(a), m, Some(p)))?;
            let dev = (got - direct).norm() / scale;
            worst = worst.max(dev);
            ensure!(dev <= 1e-9, "case {case}: group {g}, m {m}, p {p}: {got} vs {direct}");
        }
        let centered = lib(fourier_moments::spectrum::diminish(&fhat, MomentCenter(a)))?;
        let k = rng.gen_range(0..=6i64);
        let x = lib(autoconvolve_with(&centered, k, AutoconvStrategy::Recursive))?.value;
        let y = lib(autoconvolve_with(&centered, k, AutoconvStrategy::RoundTrip))?.value;
        let norm = x.max_abs().max(y.max_abs()).max(1.0);
        let dev = x.values().iter().zip(y.values()).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max) / norm;
        ensure!(dev <= 1e-9, "case {case}: group {g}, power {k}: strategies differ by {dev:e}");
    }
    Ok(format!("200 cases, every split, worst relative deviation {worst:.2e}"))
}

fn brute_force_terms_agree() -> Outcome {
    let mut groups = Vec::new();
    for n in 2..=16usize {
        groups.push(vec![n]);
    }
    for a in 2..=8usize {
        for b in 2..=16 / a {
            groups.push(vec![a, b]);
        }
    }
    for moduli in [vec![2, 2, 2], vec![2, 2, 3], vec![2, 3, 2], vec![2, 2, 4], vec![2, 2, 2, 2]] {
        groups.push(moduli);
    }
    let mut cases = 0;
    for moduli in groups {
        let g = lib(GroupSpec::new(moduli))?;
        for m in 1..=4u32 {
            for mode in [ExpansionMode::Raw, ExpansionMode::Central] {
                let sym = lib(symbolic::annihilating_terms(&g, m, mode, None))?;
                let universe: Vec<usize> =
                    (0..g.order()).filter(|&j| mode == ExpansionMode::Raw || j != 0).collect();
                let expected = brute_force_terms(&g, m as usize, &universe);
                let got: BTreeMap<Vec<usize>, u128> =
                    sym.terms().iter().map(|t| (t.indices().to_vec(), t.multiplicity())).collect();
                ensure!(got.len() == sym.len(), "group {g}, m {m}: duplicate terms");
                ensure!(got == expected, "group {g}, m {m}, {mode:?}: term multisets differ");
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} group/order/mode combinations"))
}

fn lagged_moments() -> Outcome {
    let mut rng = StdRng::seed_from_u64(11);
    let limits = Limits::default();
    let mut worst = 0.0f64;
    for case in 0..100 {
        let m = rng.gen_range(1..=4usize);
        let cap = match m {
            1 | 2 => 256,
            3 => 64,
            _ => 24,
        };
        let g = random_group(&mut rng, cap);
        let fhat = spectrum_of(&g, (0..g.order()).map(|_| random_complex(&mut rng)).collect())?;
        let f = lib(idft(&fhat))?;
        let lags: Vec<usize> = (1..m).map(|_| rng.gen_range(0..g.order())).collect();
        let lags = lib(LagVector::from_ordinals(g.clone(), lags))?;
        let x = lib(timeseries::lagged_moment(&f, &lags))?;
        let y = lib(timeseries::lagged_moment_fourier(&fhat, &lags, &limits))?;
        let scale = absolute_moment(f.values(), zero(), m as u32);
        let dev = (x - y).norm() / scale;
        worst = worst.max(dev);
        ensure!(dev <= 1e-9, "case {case}: group {g}, lags {:?}: {x} vs {y}", lags.lags());

        let zeros = lib(LagVector::zeros(g.clone(), m))?;
        let lagged = lib(timeseries::lagged_moment_fourier(&fhat, &zeros, &limits))?;
        let raw = direct_moment(f.values(), zero(), m as u32);
        ensure!((lagged - raw).norm() <= 1e-9 * scale, "case {case}: zero lag {lagged} vs raw {raw}");
    }
    Ok(format!("100 cases, worst relative deviation {worst:.2e}"))
}

/// Every ordered list of moduli (each at least 2) with product at most `bound`.
fn all_moduli(bound: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut stack = vec![(Vec::new(), 1usize)];
    while let Some((prefix, order)) = stack.pop() {
        for n in 2..=bound / order {
            let mut next: Vec<usize> = prefix.clone();
            next.push(n);
            out.push(next.clone());
            stack.push((next, order * n));
        }
    }
    out
}

fn structural_invariants() -> Outcome {
    let mut rng = StdRng::seed_from_u64(13);
    let mut worst_round_trip = 0.0f64;
    let mut worst_parseval = 0.0f64;
    for _ in 0..100 {
        let g = random_group(&mut rng, 512);
        let f = lib(DenseFunction::new(
            g.clone(),
            (0..g.order()).map(|_| random_complex(&mut rng)).collect(),
            Side::Primal,
        ))?;
        let back = lib(idft(&lib(dft(&f))?))?;
        let dev = f.values().iter().zip(back.values()).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max);
        worst_round_trip = worst_round_trip.max(dev);
        ensure!(dev <= 1e-12, "group {g}: round trip {dev:e}");
        let h = lib(DenseFunction::new(
            g.clone(),
            (0..g.order()).map(|_| random_complex(&mut rng)).collect(),
            Side::Primal,
        ))?;
        let gap = lib(parseval_gap(&f, &h))?;
        worst_parseval = worst_parseval.max(gap);
        ensure!(gap <= 1e-10, "group {g}: Parseval gap {gap:e}");
    }

    // every sorted moduli list up to 256, every ordering of the lists up to 64
    let groups: Vec<Vec<usize>> = all_moduli(256)
        .into_iter()
        .filter(|m| m.iter().product::<usize>() <= 64 || m.windows(2).all(|w| w[0] <= w[1]))
        .collect();
    let mut tables = 0;
    for moduli in &groups {
        for ordering in [IndexOrdering::MostSignificantFirst, IndexOrdering::LeastSignificantFirst] {
            let g = lib(GroupSpec::with_ordering(moduli.clone(), ordering))?;
            let table = lib(g.subtraction_table())?;
            let n = g.order();
            let digits: Vec<Vec<usize>> = (0..n).map(|i| g.digits_of(i).collect()).collect();
            let difference = |i: usize, j: usize| -> usize {
                digits[i]
                    .iter()
                    .zip(&digits[j])
                    .zip(g.moduli().iter().zip(g.strides()))
                    .map(|((a, b), (m, stride))| (a + m - b) % m * stride)
                    .sum()
            };
            let mut col_seen = vec![false; n * n];
            let mut row_seen = vec![false; n];
            for i in 0..n {
                row_seen.fill(false);
                for j in 0..n {
                    let v = table.get(i, j);
                    ensure!(v == difference(i, j), "group {g}: entry ({i},{j}) = {v}");
                    ensure!(!row_seen[v] && !col_seen[j * n + v], "group {g}: repeated {v} at ({i},{j})");
                    row_seen[v] = true;
                    col_seen[j * n + v] = true;
                }
            }
            tables += 1;
        }
    }

    let mut odd_cases = 0;
    for n in 1..=8usize {
        let g = lib(GroupSpec::binary_cube(n))?;
        let odd: Vec<usize> = (1..g.order()).filter(|j| j.count_ones() % 2 == 1).collect();
        let mut s = SparseSpectrum::new(g.clone());
        for &j in &odd {
            if rng.gen_bool(0.5) || j.count_ones() == 1 {
                lib(s.set_ordinal(j, Complex64::new(rng.gen_range(-1.0..1.0), 0.0)))?;
            }
        }
        let bound: f64 = s.iter().map(|(_, v)| v.norm()).sum();
        for m in [1u32, 3, 5, 7] {
            let v = lib(moments::fourier_general_moment_sparse(&s, MomentCenter::zero(), m, None, &Limits::default()))?;
            ensure!(v.norm() <= 1e-12 * bound.powi(m as i32).max(1.0), "n {n}, m {m}: odd moment {v}");
            if n <= 5 {
                let sym = lib(symbolic::annihilating_terms(&g, m, ExpansionMode::Raw, Some(&s.support())))?;
                ensure!(sym.is_empty(), "n {n}, m {m}: {} annihilating terms", sym.len());
            }
            odd_cases += 1;
        }
    }

    Ok(format!(
        "round trip {worst_round_trip:.1e}, Parseval {worst_parseval:.1e}, {tables} subtraction tables, {odd_cases} odd-moment cases"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("sixty-four point example", sixty_four_point_example, Some(Duration::from_millis(100))),
        ("mixed group expansion", mixed_group_expansion, Some(Duration::from_millis(100))),
        ("binomial identities", binomial_identities, Some(Duration::from_secs(5))),
        ("coin-toss designs", coin_toss_designs, Some(Duration::from_secs(1))),
        ("complete-graph formulas", complete_graph_formulas, None),
        ("genetics contributions", genetics_contributions, None),
        ("oracle equivalence", oracle_equivalence, Some(Duration::from_secs(30))),
        ("brute-force terms", brute_force_terms_agree, Some(Duration::from_secs(10))),
        ("lagged moments", lagged_moments, Some(Duration::from_secs(20))),
        ("structural invariants", structural_invariants, None),
    ];
    let mut failed = 0;
    for (k, (name, check, budget)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match (outcome, budget) {
            (Ok(_), Some(b)) if elapsed > b => Err(format!("took {elapsed:.2?}, budget {b:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("criterion {:>2}: PASS  {name} ({elapsed:.2?}): {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2}: FAIL  {name} ({elapsed:.2?}): {why}", k + 1);
            }
        }
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
