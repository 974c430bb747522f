//! Finite abelian groups `Z_{N1} x ... x Z_{Nn}`.
//!
//! Elements are digit tuples ([`GroupIndex`]) that add component-wise modulo
//! each factor's modulus. Every element also has an ordinal in `[0, |G|)` given
//! by a mixed-radix codec; which digit is most significant is a property of the
//! [`GroupSpec`]. Hot loops in the rest of the crate work on ordinals directly
//! through [`GroupSpec::add_ord`] and friends.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limits::{self, Limits};

/// Which digit of an index carries the most weight in its ordinal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IndexOrdering {
    /// `i = sum_l i_l * prod_{k>l} N_k`: the last digit varies fastest.
    #[serde(rename = "msf")]
    MostSignificantFirst,
    /// `i = sum_l i_l * prod_{k<l} N_k`: the first digit varies fastest
    /// (binary groups then read `i = sum_l i_l 2^(l-1)`).
    #[serde(rename = "lsf")]
    LeastSignificantFirst,
}

impl IndexOrdering {
    pub fn as_str(self) -> &'static str {
        match self {
            IndexOrdering::MostSignificantFirst => "msf",
            IndexOrdering::LeastSignificantFirst => "lsf",
        }
    }
}

impl FromStr for IndexOrdering {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "msf" => Ok(IndexOrdering::MostSignificantFirst),
            "lsf" => Ok(IndexOrdering::LeastSignificantFirst),
            other => Err(Error::Parse(format!("unknown ordering {other:?} (expected msf or lsf)"))),
        }
    }
}

/// The factor moduli of a group together with its ordinal codec.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupSpec {
    moduli: Vec<usize>,
    ordering: IndexOrdering,
    strides: Vec<usize>,
    order: usize,
    binary: bool,
}

impl GroupSpec {
    /// A group with the default codec: least-significant-first when every
    /// modulus is 2, most-significant-first otherwise.
    pub fn new(moduli: Vec<usize>) -> Result<Self> {
        let ordering = if !moduli.is_empty() && moduli.iter().all(|&n| n == 2) {
            IndexOrdering::LeastSignificantFirst
        } else {
            IndexOrdering::MostSignificantFirst
        };
        Self::with_ordering(moduli, ordering)
    }

    pub fn with_ordering(moduli: Vec<usize>, ordering: IndexOrdering) -> Result<Self> {
        if moduli.is_empty() {
            return Err(Error::InvalidGroup("a group needs at least one factor".into()));
        }
        if let Some(bad) = moduli.iter().find(|&&n| n < 2) {
            return Err(Error::InvalidGroup(format!("modulus {bad} is smaller than 2")));
        }
        let order = moduli
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .ok_or_else(|| {
                Error::InvalidGroup(format!("cardinality of {moduli:?} overflows the ordinal type"))
            })?;
        let mut strides = vec![0; moduli.len()];
        let mut stride = 1;
        match ordering {
            IndexOrdering::MostSignificantFirst => {
                for (l, &n) in moduli.iter().enumerate().rev() {
                    strides[l] = stride;
                    stride *= n;
                }
            }
            IndexOrdering::LeastSignificantFirst => {
                for (l, &n) in moduli.iter().enumerate() {
                    strides[l] = stride;
                    stride *= n;
                }
            }
        }
        let binary = moduli.iter().all(|&n| n == 2);
        Ok(Self {
            moduli,
            ordering,
            strides,
            order,
            binary,
        })
    }

    /// `Z_N`.
    pub fn cyclic(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    /// `Z_2^n` with the least-significant-first codec.
    pub fn binary_cube(n: usize) -> Result<Self> {
        Self::new(vec![2; n])
    }

    pub fn moduli(&self) -> &[usize] {
        &self.moduli
    }

    pub fn ordering(&self) -> IndexOrdering {
        self.ordering
    }

    /// Number of factors `n`.
    pub fn rank(&self) -> usize {
        self.moduli.len()
    }

    /// `|G|`.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Ordinal weight of each digit.
    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    /// True for `Z_2^n`.
    pub fn is_binary(&self) -> bool {
        self.binary
    }

    pub fn identity(&self) -> GroupIndex {
        GroupIndex::new(vec![0; self.rank()])
    }

    pub fn validate(&self, i: &GroupIndex) -> Result<()> {
        if i.digits.len() != self.rank() {
            return Err(Error::InvalidIndex(format!(
                "index {i} has {} digits, group {self} has {} factors",
                i.digits.len(),
                self.rank()
            )));
        }
        for (l, (&d, &n)) in i.digits.iter().zip(&self.moduli).enumerate() {
            if d >= n {
                return Err(Error::InvalidIndex(format!(
                    "digit {} of {i} is {d}, outside Z_{n}",
                    l + 1
                )));
            }
        }
        Ok(())
    }

    pub fn check_ordinal(&self, ordinal: usize) -> Result<()> {
        if ordinal >= self.order {
            Err(Error::InvalidIndex(format!(
                "ordinal {ordinal} is outside [0, {})",
                self.order
            )))
        } else {
            Ok(())
        }
    }

    pub fn add(&self, i: &GroupIndex, j: &GroupIndex) -> Result<GroupIndex> {
        self.validate(i)?;
        self.validate(j)?;
        let digits = i
            .digits
            .iter()
            .zip(&j.digits)
            .zip(&self.moduli)
            .map(|((&a, &b), &n)| (a + b) % n)
            .collect();
        Ok(GroupIndex::new(digits))
    }

    /// Additive inverse `[N1 - j1, ..., Nn - jn]` (each taken mod `N_l`).
    pub fn negate(&self, j: &GroupIndex) -> Result<GroupIndex> {
        self.validate(j)?;
        let digits = j
            .digits
            .iter()
            .zip(&self.moduli)
            .map(|(&d, &n)| (n - d) % n)
            .collect();
        Ok(GroupIndex::new(digits))
    }

    pub fn subtract(&self, i: &GroupIndex, j: &GroupIndex) -> Result<GroupIndex> {
        let neg = self.negate(j)?;
        self.add(i, &neg)
    }

    pub fn encode(&self, i: &GroupIndex) -> Result<usize> {
        self.validate(i)?;
        Ok(i.digits.iter().zip(&self.strides).map(|(&d, &s)| d * s).sum())
    }

    pub fn decode(&self, ordinal: usize) -> Result<GroupIndex> {
        self.check_ordinal(ordinal)?;
        Ok(GroupIndex::new(self.digits_of(ordinal).collect()))
    }

    /// Digits of a valid ordinal, in factor order.
    pub fn digits_of(&self, ordinal: usize) -> impl Iterator<Item = usize> + '_ {
        self.strides
            .iter()
            .zip(&self.moduli)
            .map(move |(&s, &n)| (ordinal / s) % n)
    }

    /// `i + j` on ordinals. Inputs must already be valid ordinals.
    #[inline]
    pub fn add_ord(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.order && j < self.order);
        if self.binary {
            return i ^ j;
        }
        if self.moduli.len() == 1 {
            let s = i + j;
            return if s >= self.order { s - self.order } else { s };
        }
        let mut out = 0;
        for (&s, &n) in self.strides.iter().zip(&self.moduli) {
            let a = (i / s) % n;
            let b = (j / s) % n;
            let d = a + b;
            out += if d >= n { d - n } else { d } * s;
        }
        out
    }

    #[inline]
    pub fn neg_ord(&self, j: usize) -> usize {
        debug_assert!(j < self.order);
        if self.binary {
            return j;
        }
        if self.moduli.len() == 1 {
            return if j == 0 { 0 } else { self.order - j };
        }
        let mut out = 0;
        for (&s, &n) in self.strides.iter().zip(&self.moduli) {
            let d = (j / s) % n;
            out += ((n - d) % n) * s;
        }
        out
    }

    #[inline]
    pub fn sub_ord(&self, i: usize, j: usize) -> usize {
        self.add_ord(i, self.neg_ord(j))
    }

    /// Degree of a `Z_2^n` index: the number of participating factors.
    pub fn degree(&self, j: &GroupIndex) -> Result<usize> {
        self.require_binary("degree")?;
        self.validate(j)?;
        Ok(j.digits.iter().sum())
    }

    /// 1-based labels of the factors participating in a `Z_2^n` index.
    pub fn set_repr(&self, j: &GroupIndex) -> Result<Vec<usize>> {
        self.require_binary("set representation")?;
        self.validate(j)?;
        Ok(j.digits
            .iter()
            .enumerate()
            .filter(|(_, &d)| d == 1)
            .map(|(l, _)| l + 1)
            .collect())
    }

    /// Index of `Z_2^n` whose participating factors are `labels` (1-based).
    pub fn from_set(&self, labels: &[usize]) -> Result<GroupIndex> {
        self.require_binary("set representation")?;
        let mut digits = vec![0; self.rank()];
        for &label in labels {
            if label == 0 || label > self.rank() {
                return Err(Error::InvalidIndex(format!(
                    "factor label {label} is outside 1..={}",
                    self.rank()
                )));
            }
            if digits[label - 1] == 1 {
                return Err(Error::InvalidIndex(format!("factor label {label} repeated")));
            }
            digits[label - 1] = 1;
        }
        Ok(GroupIndex::new(digits))
    }

    fn require_binary(&self, what: &str) -> Result<()> {
        if self.binary {
            Ok(())
        } else {
            Err(Error::Unsupported(format!("{what} is only defined on Z_2^n, not {self}")))
        }
    }

    pub fn subtraction_table(&self) -> Result<SubtractionTable> {
        self.subtraction_table_with(&Limits::default())
    }

    pub fn subtraction_table_with(&self, limits: &Limits) -> Result<SubtractionTable> {
        limits::check(
            "subtraction table order",
            self.order as u128,
            limits.max_table_order.min(u32::MAX as usize) as u128,
        )?;
        let n = self.order;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(self.sub_ord(i, j) as u32);
            }
        }
        Ok(SubtractionTable {
            group: self.clone(),
            entries,
        })
    }
}

impl fmt::Display for GroupSpec {
    /// Shorthand form: `64`, `3x2`, `2^13`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut l = 0;
        while l < self.moduli.len() {
            let n = self.moduli[l];
            let mut run = 1;
            while l + run < self.moduli.len() && self.moduli[l + run] == n {
                run += 1;
            }
            if !first {
                write!(f, "x")?;
            }
            first = false;
            if run > 1 {
                write!(f, "{n}^{run}")?;
            } else {
                write!(f, "{n}")?;
            }
            l += run;
        }
        Ok(())
    }
}

impl FromStr for GroupSpec {
    type Err = Error;

    /// Parses the shorthand grammar `64`, `3x2`, `2^13`, `2^3x5`.
    fn from_str(s: &str) -> Result<Self> {
        let mut moduli = Vec::new();
        for part in s.trim().split(['x', 'X', '*']) {
            let part = part.trim();
            let (base, exp) = match part.split_once('^') {
                Some((b, e)) => (b.trim(), e.trim()),
                None => (part, "1"),
            };
            let base = base.trim_start_matches(['Z', 'z']);
            let n: usize = base
                .parse()
                .map_err(|_| Error::Parse(format!("bad modulus {base:?} in group {s:?}")))?;
            let k: usize = exp
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent {exp:?} in group {s:?}")))?;
            if k == 0 {
                return Err(Error::Parse(format!("zero exponent in group {s:?}")));
            }
            moduli.extend(std::iter::repeat_n(n, k));
        }
        GroupSpec::new(moduli)
    }
}

/// An element of a group written digit-wise, `[i1, ..., in]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupIndex {
    digits: Vec<usize>,
}

impl GroupIndex {
    pub fn new(digits: Vec<usize>) -> Self {
        Self { digits }
    }

    pub fn digits(&self) -> &[usize] {
        &self.digits
    }
}

impl From<Vec<usize>> for GroupIndex {
    fn from(digits: Vec<usize>) -> Self {
        Self::new(digits)
    }
}

impl fmt::Display for GroupIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, d) in self.digits.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, "]")
    }
}

/// The `|G| x |G|` table whose `(i, j)` entry is the ordinal of `i - j`.
///
/// Every circulant operator on `G` places `f_k` wherever this table holds `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubtractionTable {
    group: GroupSpec,
    entries: Vec<u32>,
}

impl SubtractionTable {
    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn size(&self) -> usize {
        self.group.order()
    }

    pub fn get(&self, i: usize, j: usize) -> usize {
        self.entries[i * self.size() + j] as usize
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let n = self.size();
        self.entries[i * n..(i + 1) * n].iter().map(|&e| e as usize)
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.size();
        (0..n).all(|i| (i + 1..n).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Row-major CSV of ordinals, one table row per line.
    pub fn to_csv(&self) -> String {
        let n = self.size();
        let mut out = String::with_capacity(n * n * 4);
        for i in 0..n {
            for (k, e) in self.row(i).enumerate() {
                if k > 0 {
                    out.push(',');
                }
                out.push_str(&e.to_string());
            }
            out.push('\n');
        }
        out
    }
}
