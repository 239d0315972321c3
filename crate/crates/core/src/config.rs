//! JSON system configurations: a group, an `m x n` grid of symbol
//! descriptors and optional declared orders.
//!
//! ```json
//! {"group": "torus:2", "m": 2, "n": 1,
//!  "grid": [[{"kind": "torus_poly", "coeffs": [{"alpha": [1, 0], "re": 1, "im": 0}]}],
//!           [{"kind": "torus_poly", "coeffs": [{"alpha": [0, 1], "re": 1, "im": 0}]}]]}
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::block::SystemSymbol;
use crate::error::{Error, Result};
use crate::group::{rep_meta, GroupId, RepIndex};
use crate::linalg::{ComplexMatrix, C64};
use crate::symbol::{Axis, Order, ScalarSymbol};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffTerm {
    pub alpha: Vec<u32>,
    #[serde(default)]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// Table file contents: index string ("3,4" or "l=3/2") to a row-major
/// list of `[re, im]` pairs.
pub type TableEntries = BTreeMap<String, Vec<C64>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Descriptor {
    TorusPoly {
        coeffs: Vec<CoeffTerm>,
    },
    Bessel {
        s: f64,
    },
    /// Axis 1, 2 or 3.
    Su2Field {
        axis: u8,
    },
    Su2SubLaplacian,
    Table {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        entries: Option<TableEntries>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        order: Option<f64>,
    },
    Zero,
    Sum {
        terms: Vec<Descriptor>,
    },
    Product {
        factors: Vec<Descriptor>,
    },
    Scale {
        #[serde(default)]
        re: f64,
        #[serde(default)]
        im: f64,
        of: Box<Descriptor>,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    group: GroupId,
    m: usize,
    n: usize,
    grid: Vec<Vec<Descriptor>>,
    #[serde(default)]
    orders: Option<Vec<Vec<Option<f64>>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig")]
pub struct SystemConfig {
    pub group: GroupId,
    pub m: usize,
    pub n: usize,
    pub grid: Vec<Vec<Descriptor>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orders: Option<Vec<Vec<Option<f64>>>>,
}

impl TryFrom<RawConfig> for SystemConfig {
    type Error = String;

    fn try_from(raw: RawConfig) -> std::result::Result<Self, String> {
        let cfg = SystemConfig {
            group: raw.group,
            m: raw.m,
            n: raw.n,
            grid: raw.grid,
            orders: raw.orders,
        };
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

fn check_descriptor(d: &Descriptor, group: &GroupId, at: &str) -> Result<()> {
    match d {
        Descriptor::TorusPoly { coeffs } => {
            let GroupId::Torus(r) = group else {
                return Err(Error::config(at, "torus_poly needs a torus group"));
            };
            if let Some(t) = coeffs.iter().find(|t| t.alpha.len() != *r) {
                return Err(Error::config(
                    at,
                    format!("multi-index {:?} has length {}, expected {r}", t.alpha, t.alpha.len()),
                ));
            }
            Ok(())
        }
        Descriptor::Bessel { s } if !s.is_finite() => Err(Error::config(at, "bessel exponent must be finite")),
        Descriptor::Bessel { .. } | Descriptor::Zero => Ok(()),
        Descriptor::Su2Field { axis } => {
            if *group != GroupId::Su2 {
                return Err(Error::config(at, "su2_field needs group su2"));
            }
            Axis::from_index(*axis).map(|_| ()).map_err(|e| Error::config(at, e.to_string()))
        }
        Descriptor::Su2SubLaplacian if *group != GroupId::Su2 => {
            Err(Error::config(at, "su2_sub_laplacian needs group su2"))
        }
        Descriptor::Su2SubLaplacian => Ok(()),
        Descriptor::Table { path, entries, .. } => match (path, entries) {
            (Some(_), None) | (None, Some(_)) => Ok(()),
            _ => Err(Error::config(at, "table needs exactly one of \"path\" or \"entries\"")),
        },
        Descriptor::Sum { terms: parts } | Descriptor::Product { factors: parts } => {
            for (k, p) in parts.iter().enumerate() {
                check_descriptor(p, group, &format!("{at}.{k}"))?;
            }
            Ok(())
        }
        Descriptor::Scale { of, .. } => check_descriptor(of, group, &format!("{at}.of")),
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::config("m, n", "m and n must be positive"));
        }
        if self.grid.len() != self.m {
            return Err(Error::config("grid", format!("expected {} rows, found {}", self.m, self.grid.len())));
        }
        for (j, row) in self.grid.iter().enumerate() {
            if row.len() != self.n {
                return Err(Error::config(
                    format!("grid[{j}]"),
                    format!("expected {} entries, found {}", self.n, row.len()),
                ));
            }
            for (i, d) in row.iter().enumerate() {
                check_descriptor(d, &self.group, &format!("grid[{j}][{i}]"))?;
            }
        }
        if let Some(orders) = &self.orders {
            if orders.len() != self.m || orders.iter().any(|r| r.len() != self.n) {
                return Err(Error::config("orders", format!("must be a {}x{} array", self.m, self.n)));
            }
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config(format!("line {} column {}", e.line(), e.column()), bare_message(&e)))
    }

    /// Build the system, resolving table paths against `base_dir`.
    pub fn build(&self, base_dir: &Path) -> Result<SystemSymbol> {
        self.validate()?;
        let mut grid = Vec::with_capacity(self.m);
        for (j, row) in self.grid.iter().enumerate() {
            let mut out = Vec::with_capacity(self.n);
            for (i, d) in row.iter().enumerate() {
                let at = format!("grid[{j}][{i}]");
                let mut sym = build_symbol(d, &self.group, base_dir, &at)?;
                if let Some(Some(t)) = self.orders.as_ref().map(|o| o[j][i]) {
                    sym = sym.with_order(Order::Known(t));
                }
                out.push(sym);
            }
            grid.push(out);
        }
        SystemSymbol::new(self.group, grid)
    }

    /// Copy with every table path replaced by its inline entries, so the
    /// config can be embedded in reports independent of the file layout.
    pub fn inlined(&self, base_dir: &Path) -> Result<SystemConfig> {
        let mut out = self.clone();
        for (j, row) in out.grid.iter_mut().enumerate() {
            for (i, d) in row.iter_mut().enumerate() {
                inline_tables(d, base_dir, &format!("grid[{j}][{i}]"))?;
            }
        }
        Ok(out)
    }
}

fn inline_tables(d: &mut Descriptor, base_dir: &Path, at: &str) -> Result<()> {
    match d {
        Descriptor::Table { path, entries, .. } => {
            if let Some(p) = path.take() {
                *entries = Some(read_table(&base_dir.join(&p), at)?);
            }
            Ok(())
        }
        Descriptor::Sum { terms: parts } | Descriptor::Product { factors: parts } => {
            for (k, p) in parts.iter_mut().enumerate() {
                inline_tables(p, base_dir, &format!("{at}.{k}"))?;
            }
            Ok(())
        }
        Descriptor::Scale { of, .. } => inline_tables(of, base_dir, &format!("{at}.of")),
        _ => Ok(()),
    }
}

fn read_table(path: &Path, at: &str) -> Result<TableEntries> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| {
        Error::config(
            format!("{at}: {} line {} column {}", path.display(), e.line(), e.column()),
            bare_message(&e),
        )
    })
}

/// serde_json's message without its trailing location.
fn bare_message(e: &serde_json::Error) -> String {
    let msg = e.to_string();
    let loc = format!(" at line {} column {}", e.line(), e.column());
    msg.strip_suffix(&loc).map(str::to_string).unwrap_or(msg)
}

fn table_symbol(
    name: String,
    entries: &TableEntries,
    group: &GroupId,
    order: Option<f64>,
    at: &str,
) -> Result<ScalarSymbol> {
    let mut map = BTreeMap::new();
    for (key, values) in entries {
        let xi: RepIndex = key.parse().map_err(|e: Error| Error::config(at, e.to_string()))?;
        let d = rep_meta(group, &xi).map_err(|e| Error::config(at, e.to_string()))?.dim;
        if values.len() != d * d {
            return Err(Error::config(
                at,
                format!("table entry {key} has {} values, expected {}", values.len(), d * d),
            ));
        }
        map.insert(xi, ComplexMatrix::from_row_major(d, d, values.clone())?);
    }
    let order = order.map_or(Order::Unknown, Order::Known);
    ScalarSymbol::table(name, *group, map, order).map_err(|e| Error::config(at, e.to_string()))
}

fn build_symbol(d: &Descriptor, group: &GroupId, base_dir: &Path, at: &str) -> Result<ScalarSymbol> {
    check_descriptor(d, group, at)?;
    Ok(match d {
        Descriptor::TorusPoly { coeffs } => ScalarSymbol::torus_poly(
            coeffs.iter().map(|t| (t.alpha.clone(), C64::new(t.re, t.im))).collect(),
        )
        .map_err(|e| Error::config(at, e.to_string()))?,
        Descriptor::Bessel { s } => ScalarSymbol::bessel(*s),
        Descriptor::Su2Field { axis } => ScalarSymbol::su2_field(Axis::from_index(*axis)?),
        Descriptor::Su2SubLaplacian => ScalarSymbol::su2_sub_laplacian(),
        Descriptor::Zero => ScalarSymbol::zero(),
        Descriptor::Table { path, entries, order } => {
            let (name, loaded) = match (path, entries) {
                (Some(p), _) => {
                    let full: PathBuf = base_dir.join(p);
                    (p.clone(), read_table(&full, at)?)
                }
                (None, Some(e)) => (format!("table@{at}"), e.clone()),
                (None, None) => unreachable!("checked above"),
            };
            table_symbol(name, &loaded, group, *order, at)?
        }
        Descriptor::Sum { terms } => ScalarSymbol::sum(
            terms
                .iter()
                .enumerate()
                .map(|(k, t)| build_symbol(t, group, base_dir, &format!("{at}.{k}")))
                .collect::<Result<_>>()?,
        ),
        Descriptor::Product { factors } => ScalarSymbol::product(
            factors
                .iter()
                .enumerate()
                .map(|(k, t)| build_symbol(t, group, base_dir, &format!("{at}.{k}")))
                .collect::<Result<_>>()?,
        ),
        Descriptor::Scale { re, im, of } => {
            build_symbol(of, group, base_dir, &format!("{at}.of"))?.scaled(C64::new(*re, *im))
        }
    })
}

/// Read and build a configuration file; table paths are relative to its
/// directory.
pub fn load_config(path: &Path) -> Result<(SystemConfig, SystemSymbol)> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let cfg = SystemConfig::from_json_str(&text).map_err(|e| match e {
        Error::Config { at, msg } => Error::Config {
            at: format!("{} {at}", path.display()),
            msg,
        },
        other => other,
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let sys = cfg.build(base)?;
    Ok((cfg, sys))
}
