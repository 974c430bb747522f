//! Resource guards shared by the engines.
//!
//! Every guard can be overridden from the environment with the variable named
//! next to its field, e.g. `FMOMENTS_MAX_TERMS=100000000`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest |G| for which a subtraction table is materialized (`FMOMENTS_MAX_TABLE`).
    pub max_table_order: usize,
    /// Largest |G| for which a circulant matrix is materialized (`FMOMENTS_MAX_CIRCULANT`).
    pub max_circulant_order: usize,
    /// Largest |G| for which dense matrix powers are formed (`FMOMENTS_MAX_MATRIX_POWER`).
    pub max_matrix_power_order: usize,
    /// Largest intermediate support of a sparse convolution (`FMOMENTS_MAX_SUPPORT`).
    pub max_support: usize,
    /// Largest number of nodes visited by a term enumeration (`FMOMENTS_MAX_TERMS`).
    pub max_terms: u128,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_table_order: 1 << 14,
            max_circulant_order: 1 << 12,
            max_matrix_power_order: 1 << 10,
            max_support: 1_000_000,
            max_terms: 10_000_000,
        }
    }
}

impl Limits {
    /// Defaults with any `FMOMENTS_*` environment overrides applied.
    pub fn from_env() -> Result<Self> {
        let mut limits = Self::default();
        let read = |name: &str| -> Result<Option<u128>> {
            match std::env::var(name) {
                Ok(raw) => raw
                    .trim()
                    .parse::<u128>()
                    .map_err(|_| Error::Parse(format!("{name}={raw:?} is not a positive integer")))
                    .and_then(|v| {
                        if v == 0 {
                            Err(Error::InvalidArgument(format!("{name} must be positive")))
                        } else {
                            Ok(Some(v))
                        }
                    }),
                Err(_) => Ok(None),
            }
        };
        let to_usize = |v: u128| usize::try_from(v).unwrap_or(usize::MAX);
        if let Some(v) = read("FMOMENTS_MAX_TABLE")? {
            limits.max_table_order = to_usize(v);
        }
        if let Some(v) = read("FMOMENTS_MAX_CIRCULANT")? {
            limits.max_circulant_order = to_usize(v);
        }
        if let Some(v) = read("FMOMENTS_MAX_MATRIX_POWER")? {
            limits.max_matrix_power_order = to_usize(v);
        }
        if let Some(v) = read("FMOMENTS_MAX_SUPPORT")? {
            limits.max_support = to_usize(v);
        }
        if let Some(v) = read("FMOMENTS_MAX_TERMS")? {
            limits.max_terms = v;
        }
        Ok(limits)
    }
}

pub(crate) fn check(what: &'static str, needed: u128, bound: u128) -> Result<()> {
    if needed > bound {
        Err(Error::Resource { what, needed, bound })
    } else {
        Ok(())
    }
}
