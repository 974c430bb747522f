//! Symbolic expansion of a moment into products of Fourier coefficients.
//!
//! The m-th general moment about `a` is the sum, over every ordered m-tuple of
//! indices `(j_1, ..., j_m)` with `j_1 + ... + j_m = 0`, of
//! `fhat^(a)_{j_1} ... fhat^(a)_{j_m}`. Grouping ordered tuples by the multiset
//! of indices they use gives one [`Term`] per multiset with the multinomial
//! count `m! / prod(c_k!)` as its multiplicity. Central moments use
//! `a = mu`, which zeroes coefficient 0, so central expansions skip index 0.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::limits::{self, Limits};
use crate::spectrum::{MomentCenter, SparseSpectrum};

/// Largest order whose multiplicities are computed exactly.
pub const MAX_SYMBOLIC_ORDER: u32 = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExpansionMode {
    /// `a = 0`: every index may appear.
    Raw,
    /// `a = mu`: index 0 never appears.
    Central,
}

impl std::str::FromStr for ExpansionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(Self::Raw),
            "central" => Ok(Self::Central),
            other => Err(Error::Parse(format!("unknown mode {other:?} (expected raw or central)"))),
        }
    }
}

/// A sorted multiset of ordinals that sums to zero, with its multiplicity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    indices: Vec<usize>,
    multiplicity: u128,
}

impl Term {
    /// Builds a term from any ordering of its indices; the multiplicity is the
    /// multinomial coefficient of the multiset.
    pub fn from_indices(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        let multiplicity = multinomial(&indices);
        Self {
            indices,
            multiplicity,
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn multiplicity(&self) -> u128 {
        self.multiplicity
    }

    pub fn order(&self) -> usize {
        self.indices.len()
    }

    /// `(index, count)` pairs in ascending index order.
    pub fn powers(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for &j in &self.indices {
            match out.last_mut() {
                Some((k, c)) if *k == j => *c += 1,
                _ => out.push((j, 1)),
            }
        }
        out
    }

    pub fn annihilates(&self, group: &GroupSpec) -> bool {
        self.indices.iter().fold(0, |acc, &j| group.add_ord(acc, j)) == 0
    }

    /// `multiplicity * prod coeff(j)`.
    pub fn value(&self, coeff: impl Fn(usize) -> Complex64) -> Complex64 {
        let product: Complex64 = self.indices.iter().map(|&j| coeff(j)).product();
        product * self.multiplicity as f64
    }
}

fn multinomial(sorted: &[usize]) -> u128 {
    // m! / prod c_k!, accumulated as a product of binomials
    let mut result: u128 = 1;
    let mut placed: u128 = 0;
    let mut k = 0;
    while k < sorted.len() {
        let mut run = 1;
        while k + run < sorted.len() && sorted[k + run] == sorted[k] {
            run += 1;
        }
        for r in 1..=run as u128 {
            placed += 1;
            result = result * placed / r;
        }
        k += run;
    }
    result
}

/// The grouped expansion of one moment.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicMoment {
    group: GroupSpec,
    order: u32,
    mode: ExpansionMode,
    terms: Vec<Term>,
}

impl SymbolicMoment {
    pub fn empty(group: GroupSpec, order: u32, mode: ExpansionMode) -> Self {
        Self {
            group,
            order,
            mode,
            terms: Vec::new(),
        }
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn mode(&self) -> ExpansionMode {
        self.mode
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Sum of all multiplicities, i.e. the number of ordered tuples.
    pub fn ordered_tuple_count(&self) -> u128 {
        self.terms.iter().map(|t| t.multiplicity).sum()
    }

    /// Number of terms with each multiplicity.
    pub fn multiplicity_classes(&self) -> BTreeMap<u128, usize> {
        let mut out = BTreeMap::new();
        for t in &self.terms {
            *out.entry(t.multiplicity).or_insert(0) += 1;
        }
        out
    }
}

/// Number of size-`k` multisets drawn from `n` items, `C(n + k - 1, k)`.
pub fn multiset_count(n: u128, k: u128) -> u128 {
    if k == 0 {
        return 1;
    }
    if n == 0 {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        let num = n + i;
        acc = match acc.checked_mul(num) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Enumerates every annihilating multiset of size `m`, with the default
/// enumeration guard.
pub fn annihilating_terms(
    group: &GroupSpec,
    m: u32,
    mode: ExpansionMode,
    support: Option<&[usize]>,
) -> Result<SymbolicMoment> {
    annihilating_terms_with(group, m, mode, support, &Limits::default())
}

/// Sorted backtracking over the first `m - 1` indices; the last index is forced
/// to the negated partial sum and kept when it is in the universe and not
/// smaller than its predecessor.
pub fn annihilating_terms_with(
    group: &GroupSpec,
    m: u32,
    mode: ExpansionMode,
    support: Option<&[usize]>,
    limits: &Limits,
) -> Result<SymbolicMoment> {
    if m == 0 {
        return Err(Error::InvalidArgument("expansion order must be at least 1".into()));
    }
    if m > MAX_SYMBOLIC_ORDER {
        return Err(Error::InvalidArgument(format!(
            "expansion order {m} exceeds {MAX_SYMBOLIC_ORDER}"
        )));
    }
    let mut universe: Vec<usize> = match support {
        Some(s) => {
            for &j in s {
                group.check_ordinal(j)?;
            }
            let mut u = s.to_vec();
            u.sort_unstable();
            u.dedup();
            u
        }
        None => (0..group.order()).collect(),
    };
    if mode == ExpansionMode::Central {
        universe.retain(|&j| j != 0);
    }
    let projected = multiset_count(universe.len() as u128, (m - 1) as u128);
    limits::check("symbolic enumeration nodes", projected, limits.max_terms)?;

    let position: HashMap<usize, usize> =
        universe.iter().enumerate().map(|(p, &j)| (j, p)).collect();
    let mut terms = Vec::new();
    let m = m as usize;
    let mut chosen = Vec::with_capacity(m);
    if !universe.is_empty() {
        enumerate(group, &universe, &position, m, 0, 0, &mut chosen, &mut terms);
    }
    Ok(SymbolicMoment {
        group: group.clone(),
        order: m as u32,
        mode,
        terms,
    })
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    group: &GroupSpec,
    universe: &[usize],
    position: &HashMap<usize, usize>,
    m: usize,
    start: usize,
    partial: usize,
    chosen: &mut Vec<usize>,
    out: &mut Vec<Term>,
) {
    if chosen.len() == m - 1 {
        let last = group.neg_ord(partial);
        if let Some(&p) = position.get(&last) {
            if p >= start {
                let mut indices = chosen.clone();
                indices.push(last);
                debug_assert!(Term::from_indices(indices.clone()).annihilates(group));
                out.push(Term::from_indices(indices));
            }
        }
        return;
    }
    for p in start..universe.len() {
        let j = universe[p];
        chosen.push(j);
        enumerate(group, universe, position, m, p, group.add_ord(partial, j), chosen, out);
        chosen.pop();
    }
}

/// `sum multiplicity * prod fhat^(a)_j` over the terms.
pub fn evaluate(sym: &SymbolicMoment, s: &SparseSpectrum, a: MomentCenter) -> Result<Complex64> {
    Ok(term_contributions(sym, s, a)?.into_iter().map(|(_, v)| v).sum())
}

/// Each term with its value `multiplicity * prod fhat^(a)_j`, in term order.
pub fn term_contributions(
    sym: &SymbolicMoment,
    s: &SparseSpectrum,
    a: MomentCenter,
) -> Result<Vec<(Term, Complex64)>> {
    if sym.group() != s.group() {
        return Err(Error::GroupMismatch(format!("{} vs {}", sym.group(), s.group())));
    }
    let coeff = |j: usize| {
        if j == 0 {
            s.get_ordinal(0) - a.0
        } else {
            s.get_ordinal(j)
        }
    };
    Ok(sym
        .terms
        .iter()
        .map(|t| (t.clone(), t.value(coeff)))
        .collect())
}

/// How index labels are written.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Notation {
    Decimal,
    Binary,
    Set,
}

impl std::str::FromStr for Notation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "decimal" => Ok(Self::Decimal),
            "binary" => Ok(Self::Binary),
            "set" => Ok(Self::Set),
            other => Err(Error::Parse(format!("unknown notation {other:?}"))),
        }
    }
}

fn check_notation(group: &GroupSpec, notation: Notation) -> Result<()> {
    if notation != Notation::Decimal && !group.is_binary() {
        return Err(Error::Unsupported(format!(
            "{notation:?} notation needs a Z_2^n group, not {group}"
        )));
    }
    Ok(())
}

const SUBSCRIPTS: [char; 10] = ['₀', '₁', '₂', '₃', '₄', '₅', '₆', '₇', '₈', '₉'];
const SUPERSCRIPTS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];

fn script(n: usize, digits: &[char; 10]) -> String {
    n.to_string()
        .bytes()
        .map(|b| digits[(b - b'0') as usize])
        .collect()
}

/// One index label: `6`, `[0,1,1]` or `{2,3}`.
pub fn index_label(group: &GroupSpec, j: usize, notation: Notation) -> Result<String> {
    check_notation(group, notation)?;
    group.check_ordinal(j)?;
    Ok(match notation {
        Notation::Decimal => j.to_string(),
        Notation::Binary => {
            let digits: Vec<String> = group.digits_of(j).map(|d| d.to_string()).collect();
            format!("[{}]", digits.join(","))
        }
        Notation::Set => set_label(group, j),
    })
}

fn set_label(group: &GroupSpec, j: usize) -> String {
    let labels: Vec<String> = group
        .digits_of(j)
        .enumerate()
        .filter(|&(_, d)| d == 1)
        .map(|(l, _)| (l + 1).to_string())
        .collect();
    if labels.is_empty() {
        "∅".to_string()
    } else {
        format!("{{{}}}", labels.join(","))
    }
}

fn coefficient_symbol(group: &GroupSpec, j: usize, power: usize, notation: Notation) -> String {
    let mut out = String::from("f̂");
    match notation {
        Notation::Decimal => out.push_str(&script(j, &SUBSCRIPTS)),
        Notation::Binary => {
            let digits: Vec<String> = group.digits_of(j).map(|d| d.to_string()).collect();
            let _ = write!(out, "[{}]", digits.join(","));
        }
        Notation::Set => out.push_str(&set_label(group, j)),
    }
    if power > 1 {
        out.push_str(&script(power, &SUPERSCRIPTS));
    }
    out
}

/// A term's coefficient product without its multiplicity, e.g. `f̂₀f̂₁²`.
pub fn render_product(group: &GroupSpec, term: &Term, notation: Notation) -> Result<String> {
    check_notation(group, notation)?;
    Ok(term
        .powers()
        .into_iter()
        .map(|(j, c)| coefficient_symbol(group, j, c, notation))
        .collect())
}

/// The grouped expansion, multiplicity classes ascending, e.g.
/// `f̂₀³ + f̂₂³ + f̂₄³ + 3(f̂₀f̂₁² + ...) + 6(...)`.
pub fn render(sym: &SymbolicMoment, notation: Notation) -> Result<String> {
    check_notation(sym.group(), notation)?;
    if sym.is_empty() {
        return Ok("0".to_string());
    }
    let mut classes: BTreeMap<u128, Vec<&Term>> = BTreeMap::new();
    for t in sym.terms() {
        classes.entry(t.multiplicity).or_default().push(t);
    }
    let mut parts = Vec::new();
    for (mult, mut terms) in classes {
        terms.sort_by(|a, b| a.indices.cmp(&b.indices));
        let products = terms
            .iter()
            .map(|t| render_product(sym.group(), t, notation))
            .collect::<Result<Vec<_>>>()?;
        if mult == 1 {
            parts.extend(products);
        } else if products.len() == 1 {
            parts.push(format!("{mult}{}", products[0]));
        } else {
            parts.push(format!("{mult}({})", products.join(" + ")));
        }
    }
    Ok(parts.join(" + "))
}

/// The annihilation identity of a term, e.g. `6 ⊕ 11 ⊕ 13 = 0` or
/// `{2,3} △ {1,2,4} △ {1,3,4} = ∅`.
pub fn render_annihilation(group: &GroupSpec, term: &Term, notation: Notation) -> Result<String> {
    check_notation(group, notation)?;
    let labels = term
        .indices()
        .iter()
        .map(|&j| index_label(group, j, notation))
        .collect::<Result<Vec<_>>>()?;
    let sum = term.indices().iter().fold(0, |acc, &j| group.add_ord(acc, j));
    Ok(match notation {
        Notation::Set => format!("{} = {}", labels.join(" △ "), set_label(group, sum)),
        _ => format!("{} = {}", labels.join(" ⊕ "), index_label(group, sum, notation)?),
    })
}

/// One line per term: multiplicity, product, annihilation identity.
pub fn render_listing(sym: &SymbolicMoment, notation: Notation) -> Result<String> {
    let mut out = String::new();
    for t in sym.terms() {
        let _ = writeln!(
            out,
            "{:>6}  {}    [{}]",
            t.multiplicity,
            render_product(sym.group(), t, notation)?,
            render_annihilation(sym.group(), t, notation)?
        );
    }
    Ok(out)
}

/// Central moments `m = 2..=6` of a `Z_2^n` function from the grouped closed
/// forms, where each class of index multisets carries its printed coefficient.
pub fn z2n_central_closed_form(s: &SparseSpectrum, m: u32) -> Result<Complex64> {
    z2n_central_closed_form_with(s, m, &Limits::default())
}

pub fn z2n_central_closed_form_with(s: &SparseSpectrum, m: u32, limits: &Limits) -> Result<Complex64> {
    let group = s.group();
    if !group.is_binary() {
        return Err(Error::Unsupported(format!(
            "closed forms are for Z_2^n, not {group}"
        )));
    }
    if !(2..=6).contains(&m) {
        return Err(Error::InvalidArgument(format!(
            "closed forms cover orders 2 to 6, got {m}"
        )));
    }
    let support: Vec<usize> = s.support().into_iter().filter(|&j| j != 0).collect();
    let f: Vec<Complex64> = support.iter().map(|&j| s.get_ordinal(j)).collect();
    let k = support.len();
    limits::check(
        "closed-form enumeration nodes",
        binomial(k as u128, (m - 1) as u128),
        limits.max_terms,
    )?;
    let pos: HashMap<usize, usize> = support.iter().enumerate().map(|(p, &j)| (j, p)).collect();
    let sq: Vec<Complex64> = f.iter().map(|v| v * v).collect();
    let zero = Complex64::new(0.0, 0.0);

    // distinct annihilating subsets of size 3, 4, 5, 6 as position lists
    let closing = |xor: usize, after: usize| pos.get(&xor).copied().filter(|&p| p > after);
    let triples = || {
        let mut out = Vec::new();
        for a in 0..k {
            for b in a + 1..k {
                if let Some(c) = closing(support[a] ^ support[b], b) {
                    out.push([a, b, c]);
                }
            }
        }
        out
    };
    let quads = || {
        let mut out = Vec::new();
        for a in 0..k {
            for b in a + 1..k {
                for c in b + 1..k {
                    if let Some(d) = closing(support[a] ^ support[b] ^ support[c], c) {
                        out.push([a, b, c, d]);
                    }
                }
            }
        }
        out
    };
    let sum_sq_excluding = |members: &[usize]| -> Complex64 {
        (0..k).filter(|p| !members.contains(p)).map(|p| sq[p]).sum()
    };
    let prod = |members: &[usize]| -> Complex64 { members.iter().map(|&p| f[p]).product() };

    let value = match m {
        2 => sq.iter().sum(),
        3 => 6.0 * triples().iter().map(|t| prod(t)).sum::<Complex64>(),
        4 => {
            let fourth: Complex64 = sq.iter().map(|v| v * v).sum();
            let mut pairs = zero;
            for a in 0..k {
                for b in a + 1..k {
                    pairs += sq[a] * sq[b];
                }
            }
            let linear: Complex64 = quads().iter().map(|q| prod(q)).sum();
            fourth + 6.0 * pairs + 24.0 * linear
        }
        5 => {
            let mut inside = zero;
            let mut outside = zero;
            for t in triples() {
                let p = prod(&t);
                inside += p * t.iter().map(|&q| sq[q]).sum::<Complex64>();
                outside += p * sum_sq_excluding(&t);
            }
            let mut linear = zero;
            for a in 0..k {
                for b in a + 1..k {
                    for c in b + 1..k {
                        for d in c + 1..k {
                            let x = support[a] ^ support[b] ^ support[c] ^ support[d];
                            if let Some(e) = closing(x, d) {
                                linear += prod(&[a, b, c, d, e]);
                            }
                        }
                    }
                }
            }
            20.0 * inside + 60.0 * outside + 120.0 * linear
        }
        6 => {
            let sixth: Complex64 = sq.iter().map(|v| v * v * v).sum();
            let mut pair_class = zero;
            let mut triple_class = zero;
            for a in 0..k {
                for b in a + 1..k {
                    let ab = sq[a] * sq[b];
                    pair_class += ab * (sq[a] + sq[b]);
                    for &sc in &sq[b + 1..k] {
                        triple_class += ab * sc;
                    }
                }
            }
            let mut inside = zero;
            let mut outside = zero;
            for q in quads() {
                let p = prod(&q);
                inside += p * q.iter().map(|&r| sq[r]).sum::<Complex64>();
                outside += p * sum_sq_excluding(&q);
            }
            let mut linear = zero;
            for a in 0..k {
                for b in a + 1..k {
                    for c in b + 1..k {
                        for d in c + 1..k {
                            let abcd = support[a] ^ support[b] ^ support[c] ^ support[d];
                            for (e, &se) in support.iter().enumerate().skip(d + 1) {
                                if let Some(g) = closing(abcd ^ se, e) {
                                    linear += prod(&[a, b, c, d, e, g]);
                                }
                            }
                        }
                    }
                }
            }
            sixth
                + 15.0 * pair_class
                + 90.0 * triple_class
                + 120.0 * inside
                + 360.0 * outside
                + 720.0 * linear
        }
        _ => unreachable!("order checked above"),
    };
    Ok(value)
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Which moment constraint a [`feasibility_residual`] target describes.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderResidual {
    pub order: u32,
    pub target: Complex64,
    pub value: Complex64,
    pub residual: f64,
    /// Each annihilating term of this order with its value.
    pub contributions: Vec<(Term, Complex64)>,
}

/// Builds the candidate spectrum `|fhat_j| e^{i phi_j}` and compares its
/// moments against targets, order by order.
pub fn feasibility_residual(
    group: &GroupSpec,
    magnitudes: &BTreeMap<usize, f64>,
    phases: &BTreeMap<usize, f64>,
    targets: &BTreeMap<u32, Complex64>,
    mode: ExpansionMode,
    limits: &Limits,
) -> Result<Vec<OrderResidual>> {
    if targets.is_empty() {
        return Err(Error::InvalidArgument("no target moments given".into()));
    }
    if magnitudes.keys().ne(phases.keys()) {
        return Err(Error::InvalidArgument(
            "magnitude and phase supports differ".into(),
        ));
    }
    let mut candidate = SparseSpectrum::new(group.clone());
    for (&j, &r) in magnitudes {
        if r.is_nan() || r < 0.0 {
            return Err(Error::InvalidArgument(format!("magnitude at {j} is negative")));
        }
        candidate.set_ordinal(j, Complex64::from_polar(r, phases[&j]))?;
    }
    let support = candidate.support();
    // raw targets are moments about 0; central ones use terms without index 0
    let center = MomentCenter::zero();
    targets
        .iter()
        .map(|(&order, &target)| {
            let sym = annihilating_terms_with(group, order, mode, Some(&support), limits)?;
            let contributions = term_contributions(&sym, &candidate, center)?;
            let value: Complex64 = contributions.iter().map(|(_, v)| v).sum();
            Ok(OrderResidual {
                order,
                target,
                value,
                residual: (target - value).norm(),
                contributions,
            })
        })
        .collect()
}

/// Central-moment targets of a normal distribution with variance `sigma2`:
/// `mu_3 = 0` and `mu_4 = 3 sigma^4`.
pub fn gaussian_targets(sigma2: f64) -> BTreeMap<u32, Complex64> {
    BTreeMap::from([
        (3, Complex64::new(0.0, 0.0)),
        (4, Complex64::new(3.0 * sigma2 * sigma2, 0.0)),
    ])
}
