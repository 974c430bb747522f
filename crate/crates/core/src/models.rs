//! Spectrum generators for independent binary factors and graph-shaped
//! interaction designs on `Z_2^n`, with their closed-form statistics.
//!
//! Factor `l` (1-based) is bit `l - 1` of the ordinal, so the direct effect of
//! factor `l` sits at index `2^(l-1)`.
//!
//! Sign convention for the coin-toss designs: a direct effect `d = -1` makes
//! heads (bit 0) pay +1 and tails pay -1. If success were tails, `d = +1`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::spectrum::SparseSpectrum;

/// A hypergraph of interaction coefficients on `n` binary factors.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphBetSpec {
    n: usize,
    vertex_effects: Vec<f64>,
    edge_weights: BTreeMap<(usize, usize), f64>,
    hyperedges: BTreeMap<Vec<usize>, f64>,
}

impl GraphBetSpec {
    /// `n` vertices with the given degree-1 coefficients and no interactions.
    pub fn new(vertex_effects: Vec<f64>) -> Result<Self> {
        let n = vertex_effects.len();
        if n == 0 {
            return Err(Error::InvalidArgument("a design needs at least one vertex".into()));
        }
        GroupSpec::binary_cube(n)?;
        Ok(Self {
            n,
            vertex_effects,
            edge_weights: BTreeMap::new(),
            hyperedges: BTreeMap::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertex_effects(&self) -> &[f64] {
        &self.vertex_effects
    }

    pub fn edges(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.edge_weights.iter().map(|(&k, &v)| (k, v))
    }

    pub fn hyperedges(&self) -> impl Iterator<Item = (&[usize], f64)> + '_ {
        self.hyperedges.iter().map(|(k, &v)| (k.as_slice(), v))
    }

    /// Adds the degree-2 coefficient of the unordered pair `{u, v}`.
    pub fn add_edge(&mut self, u: usize, v: usize, weight: f64) -> Result<()> {
        self.check_label(u)?;
        self.check_label(v)?;
        if u == v {
            return Err(Error::InvalidArgument(format!("edge {{{u},{v}}} is a loop")));
        }
        let key = (u.min(v), u.max(v));
        if self.edge_weights.insert(key, weight).is_some() {
            return Err(Error::InvalidArgument(format!(
                "edge {{{},{}}} assigned twice",
                key.0, key.1
            )));
        }
        Ok(())
    }

    /// Adds the coefficient of a factor set of size at least 3.
    pub fn add_hyperedge(&mut self, vertices: &[usize], weight: f64) -> Result<()> {
        let mut set = vertices.to_vec();
        set.sort_unstable();
        set.dedup();
        if set.len() != vertices.len() {
            return Err(Error::InvalidArgument(format!("hyperedge {vertices:?} repeats a vertex")));
        }
        if set.len() < 3 {
            return Err(Error::InvalidArgument(format!(
                "hyperedge {vertices:?} has fewer than 3 vertices"
            )));
        }
        for &v in &set {
            self.check_label(v)?;
        }
        if self.hyperedges.insert(set, weight).is_some() {
            return Err(Error::InvalidArgument(format!("hyperedge {vertices:?} assigned twice")));
        }
        Ok(())
    }

    fn check_label(&self, v: usize) -> Result<()> {
        if v == 0 || v > self.n {
            Err(Error::InvalidIndex(format!("vertex {v} is outside 1..={}", self.n)))
        } else {
            Ok(())
        }
    }
}

/// The JSON form of a [`GraphBetSpec`] used by the `design` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub n: usize,
    #[serde(default)]
    pub vertex_effects: Option<Vec<f64>>,
    #[serde(default)]
    pub edges: Vec<EdgeEntry>,
    #[serde(default)]
    pub hyperedges: Vec<HyperedgeEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeEntry {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperedgeEntry {
    pub vertices: Vec<usize>,
    pub weight: f64,
}

impl GraphFile {
    pub fn into_spec(self) -> Result<GraphBetSpec> {
        let effects = self.vertex_effects.unwrap_or_else(|| vec![0.0; self.n]);
        if effects.len() != self.n {
            return Err(Error::InvalidArgument(format!(
                "{} vertex effects given for n = {}",
                effects.len(),
                self.n
            )));
        }
        let mut spec = GraphBetSpec::new(effects)?;
        for e in self.edges {
            spec.add_edge(e.u, e.v, e.weight)?;
        }
        for h in self.hyperedges {
            spec.add_hyperedge(&h.vertices, h.weight)?;
        }
        Ok(spec)
    }
}

pub fn parse_graph_json(text: &str) -> Result<GraphBetSpec> {
    let file: GraphFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("graph JSON: {e}")))?;
    file.into_spec()
}

/// `d` at every degree-1 index of `Z_2^n`, zero elsewhere.
pub fn direct_effect_spectrum(n: usize, d: f64) -> Result<SparseSpectrum> {
    graph_spectrum(&GraphBetSpec::new(vec![d; n])?)
}

pub fn graph_spectrum(spec: &GraphBetSpec) -> Result<SparseSpectrum> {
    let group = GroupSpec::binary_cube(spec.n)?;
    let bit = |v: usize| 1usize << (v - 1);
    let mut pairs = Vec::new();
    for (k, &d) in spec.vertex_effects.iter().enumerate() {
        pairs.push((bit(k + 1), d));
    }
    for (&(u, v), &w) in &spec.edge_weights {
        pairs.push((bit(u) | bit(v), w));
    }
    for (set, &w) in &spec.hyperedges {
        pairs.push((set.iter().map(|&v| bit(v)).fold(0, |a, b| a | b), w));
    }
    SparseSpectrum::from_ordinals(
        group,
        pairs.into_iter().map(|(j, w)| (j, Complex64::new(w, 0.0))),
    )
}

/// Complete graph on `n` vertices: effects `d`, every edge `-a`.
pub fn complete_graph(n: usize, d: f64, a: f64) -> Result<GraphBetSpec> {
    let mut spec = GraphBetSpec::new(vec![d; n])?;
    for u in 1..=n {
        for v in u + 1..=n {
            spec.add_edge(u, v, -a)?;
        }
    }
    Ok(spec)
}

/// The Petersen graph: outer 5-cycle 1..5, spokes `k -- k+5`, inner pentagram.
pub fn petersen_graph(d: f64, a: f64) -> Result<GraphBetSpec> {
    let mut spec = GraphBetSpec::new(vec![d; 10])?;
    for k in 1..=5 {
        spec.add_edge(k, k % 5 + 1, -a)?;
        spec.add_edge(k, k + 5, -a)?;
        spec.add_edge(k + 5, (k + 1) % 5 + 6, -a)?;
    }
    Ok(spec)
}

/// Closed-form statistics of `n` independent binary factors with effect `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinomialMoments {
    pub variance: f64,
    pub mu3: f64,
    pub mu4: f64,
    pub mu5: f64,
    pub mu6: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    pub hyperskewness: f64,
    pub hyperkurtosis: f64,
}

impl BinomialMoments {
    /// `mu_m` for `m = 2..=6`.
    pub fn central(&self, m: u32) -> Option<f64> {
        match m {
            2 => Some(self.variance),
            3 => Some(self.mu3),
            4 => Some(self.mu4),
            5 => Some(self.mu5),
            6 => Some(self.mu6),
            _ => None,
        }
    }
}

pub fn binomial_reference_moments(n: usize, d: f64) -> Result<BinomialMoments> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let nf = n as f64;
    let d2 = d * d;
    Ok(BinomialMoments {
        variance: nf * d2,
        mu3: 0.0,
        mu4: (3.0 * nf * nf - 2.0 * nf) * d2 * d2,
        mu5: 0.0,
        mu6: (15.0 * nf.powi(3) - 30.0 * nf * nf + 16.0 * nf) * d2 * d2 * d2,
        skewness: 0.0,
        kurtosis: 3.0 - 2.0 / nf,
        hyperskewness: 0.0,
        hyperkurtosis: 15.0 - 30.0 / nf + 16.0 / (nf * nf),
    })
}

/// Closed-form `sigma^2`, `mu_3`, `mu_4` of the complete-graph design with
/// unit direct effects and edges `-a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompleteGraphMoments {
    pub variance: f64,
    pub mu3: f64,
    pub mu4: f64,
}

pub fn complete_graph_reference_moments(n: usize, a: f64) -> Result<CompleteGraphMoments> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let n = n as f64;
    let a2 = a * a;
    Ok(CompleteGraphMoments {
        variance: n + n * (n - 1.0) * a2 / 2.0,
        mu3: -3.0 * n * (n - 1.0) * a - n * (n - 1.0) * (n - 2.0) * a2 * a,
        mu4: n * (3.0 * n - 2.0)
            + 3.0 * n * (5.0 * n * n - 13.0 * n + 8.0) * a2
            + n * (15.0 * n.powi(3) - 78.0 * n * n + 131.0 * n - 68.0) * a2 * a2 / 4.0,
    })
}

/// Distinct values (merged within `tol`) and their counts, ascending.
pub fn value_histogram(values: &[f64], tol: f64) -> Vec<(f64, usize)> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out: Vec<(f64, usize)> = Vec::new();
    for v in sorted {
        match out.last_mut() {
            Some((first, count)) if (v - *first).abs() <= tol => *count += 1,
            _ => out.push((v, 1)),
        }
    }
    out
}

/// The sparse spectrum of the 64-point example: eight coefficients of a real
/// function on `Z_64`.
pub fn sample64_spectrum() -> SparseSpectrum {
    let c = Complex64::new;
    SparseSpectrum::from_ordinals(
        GroupSpec::cyclic(64).expect("Z_64"),
        [
            (3, c(1.22, 0.19)),
            (4, c(-0.39, -1.15)),
            (6, c(-0.69, -0.24)),
            (10, c(0.12, -0.96)),
            (54, c(0.12, 0.96)),
            (58, c(-0.69, 0.24)),
            (60, c(-0.39, 1.15)),
            (61, c(1.22, -0.19)),
        ],
    )
    .expect("valid ordinals")
}

/// Top ten coefficients of the 13-locus fluorescence gene network, keyed by
/// locus sets.
pub fn gene_network_top10() -> SparseSpectrum {
    let group = GroupSpec::binary_cube(13).expect("Z_2^13");
    let entries: [(&[usize], f64); 10] = [
        (&[], 0.5381),
        (&[4, 9], 0.2396),
        (&[9, 11], 0.1778),
        (&[4, 11], 0.1565),
        (&[4], 0.1019),
        (&[9], 0.0934),
        (&[12], 0.0401),
        (&[4, 5, 9], 0.0380),
        (&[4, 9, 12], 0.0360),
        (&[9, 11, 12], 0.0352),
    ];
    let mut s = SparseSpectrum::new(group.clone());
    for (loci, v) in entries {
        let j = group.from_set(loci).expect("valid loci");
        s.set(&j, Complex64::new(v, 0.0)).expect("valid index");
    }
    s
}
