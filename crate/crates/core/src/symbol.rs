//! Matrix-valued symbols `sigma_D(xi)` of left-invariant scalar operators.
//!
//! A [`ScalarSymbol`] evaluates to a `d_xi x d_xi` complex matrix at each
//! representation and carries a declared order used by the sufficient
//! conditions in [`crate::diagnostics`].

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::log_log_ols;
use crate::group::{enumerate_reps, rep_meta, GroupId, RepIndex, RepMeta};
use crate::linalg::{ComplexMatrix, C64};

/// Declared order of a symbol in the class `S^tau_{0,0}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Order {
    Known(f64),
    Unknown,
}

impl Order {
    pub fn value(&self) -> Option<f64> {
        match self {
            Order::Known(t) => Some(*t),
            Order::Unknown => None,
        }
    }

    fn combine(a: Order, b: Order, f: impl Fn(f64, f64) -> f64) -> Order {
        match (a, b) {
            (Order::Known(x), Order::Known(y)) => Order::Known(f(x, y)),
            _ => Order::Unknown,
        }
    }
}

/// Axis of a left-invariant vector field on SU(2).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X1,
    X2,
    X3,
}

impl Axis {
    pub fn from_index(axis: u8) -> Result<Axis> {
        match axis {
            1 => Ok(Axis::X1),
            2 => Ok(Axis::X2),
            3 => Ok(Axis::X3),
            _ => Err(Error::Undefined(format!("su2 axis must be 1, 2 or 3, got {axis}"))),
        }
    }

    pub fn index(&self) -> u8 {
        match self {
            Axis::X1 => 1,
            Axis::X2 => 2,
            Axis::X3 => 3,
        }
    }
}

pub type Monomial = (Vec<u32>, C64);

type Evaluator = dyn Fn(&GroupId, &RepIndex, &RepMeta) -> Result<ComplexMatrix> + Send + Sync;

#[derive(Clone)]
enum Kind {
    TorusPoly(Vec<Monomial>),
    Bessel(f64),
    Su2Field(Axis),
    Table {
        group: GroupId,
        entries: Arc<BTreeMap<RepIndex, ComplexMatrix>>,
    },
    Zero,
    Sum(Vec<ScalarSymbol>),
    Product(Vec<ScalarSymbol>),
    Scaled(C64, Box<ScalarSymbol>),
    Custom(Arc<Evaluator>),
}

#[derive(Clone)]
pub struct ScalarSymbol {
    name: String,
    kind: Kind,
    order: Order,
    flagged_zero: bool,
}

impl fmt::Debug for ScalarSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarSymbol")
            .field("name", &self.name)
            .field("order", &self.order)
            .finish()
    }
}

impl ScalarSymbol {
    /// Constant-coefficient differential operator on `T^r` with symbol
    /// `sum_alpha c_alpha (i xi)^alpha`.
    pub fn torus_poly(coeffs: Vec<Monomial>) -> Result<Self> {
        if let Some(r) = coeffs.first().map(|(a, _)| a.len()) {
            if coeffs.iter().any(|(a, _)| a.len() != r) {
                return Err(Error::Shape("multi-indices of different lengths".into()));
            }
            if r == 0 {
                return Err(Error::Shape("empty multi-index".into()));
            }
        }
        if coeffs.iter().any(|(_, c)| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NonFinite);
        }
        let flagged_zero = coeffs.is_empty();
        let order = coeffs
            .iter()
            .map(|(a, _)| a.iter().sum::<u32>())
            .max()
            .unwrap_or(0);
        let name = if flagged_zero {
            "0".to_string()
        } else {
            poly_name(&coeffs)
        };
        Ok(Self {
            name,
            kind: Kind::TorusPoly(coeffs),
            order: Order::Known(order as f64),
            flagged_zero,
        })
    }

    /// Shorthand for the torus derivative `d/dx_axis` on `T^r` (0-based axis).
    pub fn torus_derivative(r: usize, axis: usize) -> Result<Self> {
        if axis >= r {
            return Err(Error::Shape(format!("axis {axis} out of range for torus:{r}")));
        }
        let mut alpha = vec![0; r];
        alpha[axis] = 1;
        Self::torus_poly(vec![(alpha, C64::new(1.0, 0.0))])
    }

    /// `(Id + Laplacian)^{s/2}`: evaluates to `<xi>^s * Identity(d_xi)`.
    pub fn bessel(s: f64) -> Self {
        Self {
            name: format!("bessel({s})"),
            kind: Kind::Bessel(s),
            order: Order::Known(s),
            flagged_zero: false,
        }
    }

    /// Left-invariant vector field on SU(2) along `axis`. At spin `l` the
    /// symbol is `i J_1`, `-i J_2`, `i J_3` for axes 1, 2, 3, with the ladder
    /// matrices `J_3 = diag(l, ..., -l)`, `(J_+)_{m+1,m} = sqrt((l-m)(l+m+1))`,
    /// `J_1 = (J_+ + J_-)/2` and `J_2 = (J_+ - J_-)/(2i)` in the basis
    /// `m = l, ..., -l`. The sign on axis 2 makes the symbols a Lie algebra
    /// representation: `[sigma_1, sigma_2] = sigma_3` and cyclic.
    pub fn su2_field(axis: Axis) -> Self {
        Self {
            name: format!("X{}", axis.index()),
            kind: Kind::Su2Field(axis),
            order: Order::Known(1.0),
            flagged_zero: false,
        }
    }

    /// Sub-Laplacian `-(X_1^2 + X_2^2)` on SU(2); its symbol is
    /// `l(l+1) I - J_3^2`.
    pub fn su2_sub_laplacian() -> Self {
        let x1 = Self::su2_field(Axis::X1);
        let x2 = Self::su2_field(Axis::X2);
        Self::sum(vec![Self::product(vec![x1.clone(), x1]), Self::product(vec![x2.clone(), x2])])
            .scaled(C64::new(-1.0, 0.0))
            .named("sub_laplacian")
    }

    /// User-supplied symbol values. Every entry must be `d_xi x d_xi`.
    pub fn table(
        name: impl Into<String>,
        group: GroupId,
        entries: BTreeMap<RepIndex, ComplexMatrix>,
        order: Order,
    ) -> Result<Self> {
        for (xi, m) in &entries {
            let meta = rep_meta(&group, xi)?;
            if m.rows() != meta.dim || m.cols() != meta.dim {
                return Err(Error::WrongBlockSize {
                    index: xi.to_string(),
                    expected: meta.dim,
                    rows: m.rows(),
                    cols: m.cols(),
                });
            }
            if !m.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        Ok(Self {
            name: name.into(),
            kind: Kind::Table {
                group,
                entries: Arc::new(entries),
            },
            order,
            flagged_zero: false,
        })
    }

    /// The zero operator on any group.
    pub fn zero() -> Self {
        Self {
            name: "0".into(),
            kind: Kind::Zero,
            order: Order::Known(f64::NEG_INFINITY),
            flagged_zero: false,
        }
    }

    pub fn sum(terms: Vec<ScalarSymbol>) -> Self {
        let order = terms
            .iter()
            .map(|t| t.order)
            .reduce(|a, b| Order::combine(a, b, f64::max))
            .unwrap_or(Order::Known(f64::NEG_INFINITY));
        let name = terms.iter().map(|t| t.name.as_str()).collect::<Vec<_>>().join(" + ");
        Self {
            name: format!("({name})"),
            kind: Kind::Sum(terms),
            order,
            flagged_zero: false,
        }
    }

    pub fn product(factors: Vec<ScalarSymbol>) -> Self {
        let order = factors
            .iter()
            .map(|t| t.order)
            .reduce(|a, b| Order::combine(a, b, |x, y| x + y))
            .unwrap_or(Order::Known(0.0));
        let name = factors.iter().map(|t| t.name.as_str()).collect::<Vec<_>>().join("*");
        Self {
            name,
            kind: Kind::Product(factors),
            order,
            flagged_zero: false,
        }
    }

    pub fn scaled(self, c: C64) -> Self {
        let order = if c == C64::new(0.0, 0.0) {
            Order::Known(f64::NEG_INFINITY)
        } else {
            self.order
        };
        Self {
            name: format!("({c})*{}", self.name),
            order,
            kind: Kind::Scaled(c, Box::new(self)),
            flagged_zero: false,
        }
    }

    /// Arbitrary pure evaluator, mainly for generated test systems.
    pub fn from_fn(
        name: impl Into<String>,
        order: Order,
        f: impl Fn(&GroupId, &RepIndex, &RepMeta) -> Result<ComplexMatrix> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            kind: Kind::Custom(Arc::new(f)),
            order,
            flagged_zero: false,
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_order(mut self, order: Order) -> Self {
        self.order = order;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> Order {
        self.order
    }

    /// Set for a torus polynomial built from an empty coefficient list.
    pub fn is_flagged_zero(&self) -> bool {
        self.flagged_zero
    }

    /// True when the symbol vanishes identically by construction.
    pub fn is_structurally_zero(&self) -> bool {
        match &self.kind {
            Kind::Zero => true,
            Kind::TorusPoly(c) => c.iter().all(|(_, z)| *z == C64::new(0.0, 0.0)),
            Kind::Scaled(c, inner) => *c == C64::new(0.0, 0.0) || inner.is_structurally_zero(),
            Kind::Sum(terms) => terms.iter().all(ScalarSymbol::is_structurally_zero),
            Kind::Product(f) => f.iter().any(ScalarSymbol::is_structurally_zero),
            _ => false,
        }
    }

    pub fn eval(&self, group: &GroupId, xi: &RepIndex) -> Result<ComplexMatrix> {
        let meta = rep_meta(group, xi)?;
        self.eval_with_meta(group, xi, &meta)
    }

    pub fn eval_with_meta(
        &self,
        group: &GroupId,
        xi: &RepIndex,
        meta: &RepMeta,
    ) -> Result<ComplexMatrix> {
        let out = match &self.kind {
            Kind::TorusPoly(coeffs) => self.eval_poly(coeffs, group, xi)?,
            Kind::Bessel(s) => {
                ComplexMatrix::scalar_identity(meta.dim, C64::new(meta.bracket.powf(*s), 0.0))
            }
            Kind::Su2Field(axis) => match xi {
                RepIndex::Su2 { twice_spin } => su2_field_matrix(*axis, *twice_spin),
                _ => return Err(self.wrong_group(group)),
            },
            Kind::Table { group: g, entries } => {
                if g != group {
                    return Err(self.wrong_group(group));
                }
                entries
                    .get(xi)
                    .cloned()
                    .ok_or_else(|| Error::MissingRepresentation(xi.to_string()))?
            }
            Kind::Zero => ComplexMatrix::zeros(meta.dim, meta.dim),
            Kind::Sum(terms) => {
                let mut acc = ComplexMatrix::zeros(meta.dim, meta.dim);
                for t in terms {
                    acc = acc.add(&t.eval_with_meta(group, xi, meta)?)?;
                }
                acc
            }
            Kind::Product(factors) => {
                let mut acc = ComplexMatrix::identity(meta.dim);
                for f in factors {
                    acc = acc.matmul(&f.eval_with_meta(group, xi, meta)?)?;
                }
                acc
            }
            Kind::Scaled(c, inner) => inner.eval_with_meta(group, xi, meta)?.scale(*c),
            Kind::Custom(f) => f(group, xi, meta)?,
        };
        if out.rows() != meta.dim || out.cols() != meta.dim {
            return Err(Error::WrongBlockSize {
                index: xi.to_string(),
                expected: meta.dim,
                rows: out.rows(),
                cols: out.cols(),
            });
        }
        if !out.is_finite() {
            return Err(Error::at_index(xi, Error::NonFinite));
        }
        Ok(out)
    }

    fn eval_poly(&self, coeffs: &[Monomial], group: &GroupId, xi: &RepIndex) -> Result<ComplexMatrix> {
        let RepIndex::Torus(v) = xi else {
            return Err(self.wrong_group(group));
        };
        if let Some((alpha, _)) = coeffs.first() {
            if alpha.len() != v.len() {
                return Err(self.wrong_group(group));
            }
        }
        let value: C64 = coeffs
            .iter()
            .map(|(alpha, c)| c * monomial_value(alpha, v))
            .sum();
        Ok(ComplexMatrix::diagonal(&[value]))
    }

    fn wrong_group(&self, group: &GroupId) -> Error {
        Error::SymbolGroupMismatch {
            symbol: self.name.clone(),
            group: group.to_string(),
        }
    }

    /// Expand into a single torus polynomial when the symbol is built from
    /// polynomials with sums, products and scalings.
    pub fn as_torus_polynomial(&self) -> Option<Vec<Monomial>> {
        match &self.kind {
            Kind::TorusPoly(c) => Some(c.clone()),
            Kind::Zero => Some(Vec::new()),
            Kind::Scaled(c, inner) => inner
                .as_torus_polynomial()
                .map(|p| p.into_iter().map(|(a, z)| (a, z * c)).collect()),
            Kind::Sum(terms) => {
                let mut out = Vec::new();
                for t in terms {
                    out.extend(t.as_torus_polynomial()?);
                }
                Some(out)
            }
            Kind::Product(factors) => {
                let mut acc: Option<Vec<Monomial>> = None;
                for f in factors {
                    let p = f.as_torus_polynomial()?;
                    acc = Some(match acc {
                        None => p,
                        Some(prev) => poly_mul(&prev, &p),
                    });
                }
                acc
            }
            _ => None,
        }
    }
}

fn poly_mul(a: &[Monomial], b: &[Monomial]) -> Vec<Monomial> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for (alpha, x) in a {
        for (beta, y) in b {
            let gamma = alpha.iter().zip(beta).map(|(p, q)| p + q).collect();
            out.push((gamma, x * y));
        }
    }
    out
}

/// `(i xi_1)^{alpha_1} ... (i xi_r)^{alpha_r}`.
pub fn monomial_value(alpha: &[u32], xi: &[i64]) -> C64 {
    alpha
        .iter()
        .zip(xi)
        .map(|(&a, &x)| C64::new(0.0, x as f64).powu(a))
        .product()
}

fn poly_name(coeffs: &[Monomial]) -> String {
    coeffs
        .iter()
        .map(|(a, c)| {
            let mono: Vec<String> = a
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0)
                .map(|(j, &p)| if p == 1 { format!("d{}", j + 1) } else { format!("d{}^{p}", j + 1) })
                .collect();
            if mono.is_empty() {
                format!("{c}")
            } else {
                format!("{c}*{}", mono.join(""))
            }
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

/// Raising operator `J_+` at spin `t/2`, basis ordered `m = l, ..., -l`.
pub fn su2_raising(twice_spin: u32) -> ComplexMatrix {
    let t = twice_spin as usize;
    let l = twice_spin as f64 / 2.0;
    let mut jp = ComplexMatrix::zeros(t + 1, t + 1);
    for k in 1..=t {
        let m = l - k as f64;
        jp[(k - 1, k)] = C64::new(((l - m) * (l + m + 1.0)).sqrt(), 0.0);
    }
    jp
}

/// `J_3 = diag(l, l-1, ..., -l)`.
pub fn su2_j3(twice_spin: u32) -> ComplexMatrix {
    let l = twice_spin as f64 / 2.0;
    let diag: Vec<C64> = (0..=twice_spin as usize)
        .map(|k| C64::new(l - k as f64, 0.0))
        .collect();
    ComplexMatrix::diagonal(&diag)
}

fn su2_field_matrix(axis: Axis, twice_spin: u32) -> ComplexMatrix {
    let i = C64::new(0.0, 1.0);
    match axis {
        Axis::X3 => su2_j3(twice_spin).scale(i),
        _ => {
            let jp = su2_raising(twice_spin);
            let jm = jp.adjoint();
            match axis {
                // i J_1 = i (J_+ + J_-)/2
                Axis::X1 => jp.add(&jm).expect("same shape").scale(i * 0.5),
                // -i J_2 = (J_- - J_+)/2
                _ => jm.sub(&jp).expect("same shape").scale(C64::new(0.5, 0.0)),
            }
        }
    }
}

/// Fitted `(tau_hat, c_hat)` with `||sigma(xi)||_op <= c_hat <xi>^tau_hat`
/// on every sampled representation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SymbolOrderEstimate {
    /// `-inf` when the symbol vanishes on the whole sample.
    pub tau_hat: f64,
    pub c_hat: f64,
    pub sample_count: usize,
}

pub fn estimate_order(
    symbol: &ScalarSymbol,
    group: &GroupId,
    cutoff: f64,
) -> Result<SymbolOrderEstimate> {
    let reps = enumerate_reps(group, cutoff)?;
    let mut samples = Vec::with_capacity(reps.len());
    for xi in &reps {
        let meta = rep_meta(group, xi)?;
        let norm = symbol
            .eval_with_meta(group, xi, &meta)
            .and_then(|m| m.op_norm())
            .map_err(|e| Error::at_index(xi, e))?;
        if norm > 0.0 {
            samples.push((meta.bracket, norm));
        }
    }
    if samples.is_empty() {
        return Ok(SymbolOrderEstimate {
            tau_hat: f64::NEG_INFINITY,
            c_hat: 0.0,
            sample_count: 0,
        });
    }
    let (tau_hat, _) = log_log_ols(&samples);
    let mut c_hat = samples
        .iter()
        .map(|&(b, n)| n / b.powf(tau_hat))
        .fold(0.0, f64::max);
    // Grow C until the envelope holds exactly in floating point.
    for _ in 0..16 {
        if samples.iter().all(|&(b, n)| n <= c_hat * b.powf(tau_hat)) {
            break;
        }
        c_hat *= 1.0 + 4.0 * f64::EPSILON;
    }
    Ok(SymbolOrderEstimate {
        tau_hat,
        c_hat,
        sample_count: samples.len(),
    })
}
