//! File formats.
//!
//! Spectrum files are JSON:
//!
//! ```json
//! {"moduli": [64], "ordering": "msf",
//!  "coefficients": [{"index": 3, "re": 1.22, "im": 0.19},
//!                   {"index": [61], "re": 1.22, "im": -0.19}]}
//! ```
//!
//! `index` is either an ordinal or a digit tuple; `ordering` and `im` are
//! optional. Function files are CSV rows `ordinal,re,im` with an optional
//! header line.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GroupIndex, GroupSpec, IndexOrdering};
use crate::spectrum::{DenseFunction, Side, SparseSpectrum};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IndexRepr {
    Ordinal(usize),
    Tuple(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientEntry {
    pub index: IndexRepr,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumFile {
    pub moduli: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ordering: Option<IndexOrdering>,
    pub coefficients: Vec<CoefficientEntry>,
}

impl SpectrumFile {
    pub fn from_spectrum(s: &SparseSpectrum) -> Self {
        Self {
            moduli: s.group().moduli().to_vec(),
            ordering: Some(s.group().ordering()),
            coefficients: s
                .iter()
                .map(|(j, v)| CoefficientEntry {
                    index: IndexRepr::Ordinal(j),
                    re: v.re,
                    im: v.im,
                })
                .collect(),
        }
    }

    pub fn group(&self) -> Result<GroupSpec> {
        match self.ordering {
            Some(o) => GroupSpec::with_ordering(self.moduli.clone(), o),
            None => GroupSpec::new(self.moduli.clone()),
        }
    }

    pub fn into_spectrum(self) -> Result<SparseSpectrum> {
        let group = self.group()?;
        let pairs = self
            .coefficients
            .into_iter()
            .map(|e| {
                let j = match e.index {
                    IndexRepr::Ordinal(j) => {
                        group.check_ordinal(j)?;
                        j
                    }
                    IndexRepr::Tuple(d) => group.encode(&GroupIndex::new(d))?,
                };
                Ok((j, Complex64::new(e.re, e.im)))
            })
            .collect::<Result<Vec<_>>>()?;
        SparseSpectrum::from_ordinals(group, pairs)
    }
}

pub fn parse_spectrum_json(text: &str) -> Result<SparseSpectrum> {
    let file: SpectrumFile = serde_json::from_str(text).map_err(|e| Error::Parse(format!("spectrum JSON: {e}")))?;
    file.into_spectrum()
}

pub fn spectrum_to_json(s: &SparseSpectrum) -> String {
    let mut out = serde_json::to_string_pretty(&SpectrumFile::from_spectrum(s))
        .expect("spectrum files always serialize");
    out.push('\n');
    out
}

/// Reads `ordinal,re,im` rows. Without a group the function lives on `Z_rows`.
pub fn parse_function_csv(text: &str, group: Option<GroupSpec>, side: Side) -> Result<DenseFunction> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if rows.is_empty() && fields.first().is_some_and(|f| f.parse::<usize>().is_err()) {
            // header
            continue;
        }
        if fields.len() < 2 || fields.len() > 3 {
            return Err(Error::Parse(format!(
                "line {}: expected `ordinal,re,im`, found {line:?}",
                lineno + 1
            )));
        }
        let num = |s: &str, what: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::Parse(format!("line {}: bad {what} {s:?}", lineno + 1)))
        };
        let ordinal = fields[0]
            .parse::<usize>()
            .map_err(|_| Error::Parse(format!("line {}: bad ordinal {:?}", lineno + 1, fields[0])))?;
        let re = num(fields[1], "real part")?;
        let im = if fields.len() == 3 { num(fields[2], "imaginary part")? } else { 0.0 };
        rows.push((lineno + 1, ordinal, Complex64::new(re, im)));
    }
    let group = match group {
        Some(g) => g,
        None => GroupSpec::cyclic(rows.len())?,
    };
    if rows.len() != group.order() {
        return Err(Error::GroupMismatch(format!(
            "function file has {} rows, group {group} has order {}",
            rows.len(),
            group.order()
        )));
    }
    let mut values = vec![None; group.order()];
    for (lineno, ordinal, v) in rows {
        if ordinal >= group.order() {
            return Err(Error::GroupMismatch(format!(
                "line {lineno}: ordinal {ordinal} outside group {group}"
            )));
        }
        if values[ordinal].replace(v).is_some() {
            return Err(Error::Parse(format!("line {lineno}: ordinal {ordinal} repeated")));
        }
    }
    let values = values.into_iter().map(|v| v.expect("all ordinals present")).collect();
    DenseFunction::new(group, values, side)
}

pub fn function_to_csv(f: &DenseFunction) -> String {
    let mut out = String::from("ordinal,re,im\n");
    for (k, v) in f.values().iter().enumerate() {
        out.push_str(&format!("{k},{},{}\n", fmt_f64(v.re), fmt_f64(v.im)));
    }
    out
}

/// Shortest round-trip decimal, with `-0` normalized to `0`.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x}")
    }
}

/// Parses `1.5`, `-2i`, `0.12-0.96i`, `1e-3+2.5e-1i` (`j` also accepted).
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Parse(format!("bad complex number {s:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        return t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |part: &str| -> Result<f64> {
        match part {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            p => p.parse::<f64>().map_err(|_| bad()),
        }
    };
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().map_err(|_| bad())?;
            Ok(Complex64::new(re, imag(&body[k..])?))
        }
        None => Ok(Complex64::new(0.0, imag(body)?)),
    }
}

pub fn format_complex(z: Complex64, decimals: usize) -> String {
    let re = if z.re == 0.0 { 0.0 } else { z.re };
    let im = if z.im == 0.0 { 0.0 } else { z.im };
    let threshold = 0.5 * 10f64.powi(-(decimals as i32));
    if im.abs() < threshold {
        format!("{:.*}", decimals, clean(re, threshold))
    } else if re.abs() < threshold {
        format!("{:.*}i", decimals, im)
    } else if im < 0.0 {
        format!("{:.*}-{:.*}i", decimals, re, decimals, -im)
    } else {
        format!("{:.*}+{:.*}i", decimals, re, decimals, im)
    }
}

fn clean(x: f64, threshold: f64) -> f64 {
    if x.abs() < threshold {
        0.0
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE64: &str = include_str!("../data/sample64.json");

    #[test]
    fn complex_parsing() {
        let c = Complex64::new;
        assert_eq!(parse_complex("1.5").unwrap(), c(1.5, 0.0));
        assert_eq!(parse_complex("-2i").unwrap(), c(0.0, -2.0));
        assert_eq!(parse_complex("0.12-0.96i").unwrap(), c(0.12, -0.96));
        assert_eq!(parse_complex("1e-3+2.5e-1i").unwrap(), c(1e-3, 0.25));
        assert_eq!(parse_complex("-1-i").unwrap(), c(-1.0, -1.0));
        assert_eq!(parse_complex(" 3 + 4j ").unwrap(), c(3.0, 4.0));
        assert!(parse_complex("").is_err());
        assert!(parse_complex("abc").is_err());
    }

    #[test]
    fn sixty_four_point_sample_file() {
        let s = parse_spectrum_json(SAMPLE64).unwrap();
        assert_eq!(s.nnz(), 8);
        assert_eq!(s.group().order(), 64);
        assert_eq!(s, crate::models::sample64_spectrum());
        assert_eq!(parse_spectrum_json(&spectrum_to_json(&s)).unwrap(), s);
    }

    #[test]
    fn tuple_indices() {
        let text = r#"{"moduli":[3,2],"coefficients":[{"index":[2,1],"re":1.0},{"index":3,"re":0.5,"im":-1}]}"#;
        let s = parse_spectrum_json(text).unwrap();
        assert_eq!(s.get_ordinal(5), Complex64::new(1.0, 0.0));
        assert_eq!(s.get_ordinal(3), Complex64::new(0.5, -1.0));
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = parse_spectrum_json("{\"moduli\": [4],\n \"coefficients\": [ }").unwrap_err();
        let Error::Parse(msg) = err else { panic!("{err:?}") };
        assert!(msg.contains("line 2"), "{msg}");
        assert!(msg.contains("column"), "{msg}");
    }

    #[test]
    fn bad_index_in_file() {
        let text = r#"{"moduli":[4],"coefficients":[{"index":4,"re":1.0}]}"#;
        assert!(matches!(parse_spectrum_json(text), Err(Error::InvalidIndex(_))));
    }

    #[test]
    fn function_csv_round_trip() {
        let g = GroupSpec::new(vec![2, 3]).unwrap();
        let f = DenseFunction::new(
            g.clone(),
            (0..6).map(|k| Complex64::new(k as f64 / 3.0, -0.1 * k as f64)).collect(),
            Side::Primal,
        )
        .unwrap();
        let text = function_to_csv(&f);
        assert!(text.starts_with("ordinal,re,im\n0,0,0\n"));
        assert_eq!(parse_function_csv(&text, Some(g), Side::Primal).unwrap(), f);
        let cyclic = parse_function_csv("0,1\n1,2\n2,3\n", None, Side::Primal).unwrap();
        assert_eq!(cyclic.group().order(), 3);
    }

    #[test]
    fn function_csv_errors() {
        let g = GroupSpec::cyclic(3).unwrap();
        assert!(matches!(
            parse_function_csv("0,1\n1,2\n", Some(g.clone()), Side::Primal),
            Err(Error::GroupMismatch(_))
        ));
        assert!(matches!(
            parse_function_csv("0,1\n1,2\n1,3\n", Some(g.clone()), Side::Primal),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            parse_function_csv("0,1\n1,x\n2,3\n", Some(g), Side::Primal),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn complex_formatting() {
        assert_eq!(format_complex(Complex64::new(-16.909434, 1e-15), 2), "-16.91");
        assert_eq!(format_complex(Complex64::new(1.0, -0.5), 2), "1.00-0.50i");
        assert_eq!(format_complex(Complex64::new(-0.0, 0.0), 4), "0.0000");
    }
}
