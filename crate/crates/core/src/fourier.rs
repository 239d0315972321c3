//! Vector-valued Fourier analysis on the torus `T^r` sampled on uniform
//! grids: discrete transforms, Plancherel, coefficient decay and a check of
//! the quantization formula for polynomial multiplier systems.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::block::SystemSymbol;
use crate::coefficients::CoefficientField;
use crate::diagnostics::{fit_samples, Sample};
use crate::error::{Error, Result};
use crate::group::{enumerate_reps, rep_meta, GroupId, RepIndex};
use crate::linalg::{ComplexMatrix, C64};

/// Samples of `f: T^r -> C^n` at `x = 2 pi j / N`, point-major with the
/// component index innermost and the first coordinate varying slowest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub r: usize,
    #[serde(rename = "N")]
    pub grid_size: usize,
    pub n: usize,
    pub values: Vec<C64>,
}

impl GridFunction {
    pub fn new(r: usize, grid_size: usize, n: usize, values: Vec<C64>) -> Result<Self> {
        let f = Self {
            r,
            grid_size,
            n,
            values,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if self.r == 0 || self.n == 0 {
            return Err(Error::Shape("grid function needs r >= 1 and n >= 1".into()));
        }
        if self.grid_size < 2 || self.grid_size % 2 != 0 {
            return Err(Error::Shape(format!("grid size {} must be even and >= 2", self.grid_size)));
        }
        if self.values.len() != self.point_count() * self.n {
            return Err(Error::Shape(format!(
                "expected {} values, got {}",
                self.point_count() * self.n,
                self.values.len()
            )));
        }
        if self.values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(())
    }

    pub fn point_count(&self) -> usize {
        self.grid_size.pow(self.r as u32)
    }

    pub fn value(&self, point: usize, component: usize) -> C64 {
        self.values[point * self.n + component]
    }

    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Grid average of `sum_i |f_i(x)|^2`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.point_count() as f64
    }
}

fn multi_index(mut p: usize, r: usize, n: usize) -> Vec<usize> {
    let mut j = vec![0; r];
    for k in (0..r).rev() {
        j[k] = p % n;
        p /= n;
    }
    j
}

fn bin_to_freq(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

fn freq_to_bin(xi: i64, n: usize) -> Option<usize> {
    let half = (n / 2) as i64;
    if xi < -half || xi >= half {
        None
    } else {
        Some(xi.rem_euclid(n as i64) as usize)
    }
}

/// In-place separable DFT along every axis of an `N^r` array:
/// `out[k] = sum_j a[j] exp(sign i 2 pi j k / N)`.
fn dft_all_axes(data: &mut [C64], r: usize, n: usize, sign: f64) {
    let twiddle: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(1.0, sign * 2.0 * PI * k as f64 / n as f64))
        .collect();
    let mut line = vec![C64::new(0.0, 0.0); n];
    for axis in 0..r {
        let stride = n.pow((r - 1 - axis) as u32);
        let total = data.len();
        for base in 0..total {
            // Visit each line once, from its first element.
            if (base / stride) % n != 0 {
                continue;
            }
            for (k, out) in line.iter_mut().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..n {
                    acc += data[base + j * stride] * twiddle[(j * k) % n];
                }
                *out = acc;
            }
            for (k, v) in line.iter().enumerate() {
                data[base + k * stride] = *v;
            }
        }
    }
}

/// Coefficients `u_hat(xi) = N^{-r} sum_x f(x) e^{-i x.xi}` on `[-N/2, N/2)^r`.
pub fn forward(f: &GridFunction) -> Result<CoefficientField> {
    f.validate()?;
    let (r, big_n, n) = (f.r, f.grid_size, f.n);
    let points = f.point_count();
    let scale = 1.0 / points as f64;
    let mut per_component = Vec::with_capacity(n);
    for i in 0..n {
        let mut data: Vec<C64> = (0..points).map(|p| f.value(p, i)).collect();
        dft_all_axes(&mut data, r, big_n, -1.0);
        per_component.push(data);
    }
    let mut field = CoefficientField::new(GroupId::Torus(r), n);
    for p in 0..points {
        let xi: Vec<i64> = multi_index(p, r, big_n).into_iter().map(|k| bin_to_freq(k, big_n)).collect();
        let vals: Vec<C64> = per_component.iter().map(|c| c[p] * scale).collect();
        field.insert_scalars(RepIndex::Torus(xi), &vals)?;
    }
    Ok(field)
}

fn torus_rank(group: &GroupId) -> Result<usize> {
    match group {
        GroupId::Torus(r) => Ok(*r),
        GroupId::Su2 => Err(Error::Undefined(
            "function-space transforms are only available on the torus".into(),
        )),
    }
}

/// `f(x) = sum_xi u_hat(xi) e^{i x.xi}` sampled on the `N^r` grid.
pub fn inverse(c: &CoefficientField, grid_size: usize) -> Result<GridFunction> {
    let r = torus_rank(c.group())?;
    if grid_size < 2 || grid_size % 2 != 0 {
        return Err(Error::Shape(format!("grid size {grid_size} must be even and >= 2")));
    }
    let n = c.n();
    let points = grid_size.pow(r as u32);
    let mut per_component = vec![vec![C64::new(0.0, 0.0); points]; n];
    for (xi, blocks) in c.entries() {
        let RepIndex::Torus(v) = xi else {
            return Err(Error::BadIndex(xi.to_string()));
        };
        let mut p = 0;
        for &x in v {
            let bin = freq_to_bin(x, grid_size).ok_or_else(|| Error::OutsideBand(xi.to_string()))?;
            p = p * grid_size + bin;
        }
        for (i, b) in blocks.iter().enumerate() {
            if b.rows() != 1 || b.cols() != 1 {
                return Err(Error::Shape(format!("torus coefficient at {xi} must be 1x1")));
            }
            per_component[i][p] += b[(0, 0)];
        }
    }
    for data in per_component.iter_mut() {
        dft_all_axes(data, r, grid_size, 1.0);
    }
    let mut values = Vec::with_capacity(points * n);
    for p in 0..points {
        for comp in &per_component {
            values.push(comp[p]);
        }
    }
    GridFunction::new(r, grid_size, n, values)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PlancherelCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub relative_error: f64,
}

/// Grid `L^2` norm against `sum_xi d_xi ||u_hat(xi)||_HS^2`.
pub fn plancherel_check(f: &GridFunction) -> Result<PlancherelCheck> {
    let lhs = f.l2_norm_sq();
    let rhs = forward(f)?.sobolev_norm(0.0)?.powi(2);
    let scale = lhs.max(rhs);
    let relative_error = if scale == 0.0 { 0.0 } else { (lhs - rhs).abs() / scale };
    Ok(PlancherelCheck {
        lhs,
        rhs,
        relative_error,
    })
}

pub fn sobolev_norm(c: &CoefficientField, s: f64) -> Result<f64> {
    c.sobolev_norm(s)
}

/// Exponents below this count as faster than every tested power.
pub const RAPID_DECAY_EXPONENT: f64 = -10.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayReport {
    /// Fitted `a` in `||u_hat(xi)||_HS ~ <xi>^a` over the tail; `-inf` when
    /// the tail vanishes identically.
    pub exponent: f64,
    pub rapid_decay: bool,
    /// The fitted growth order when decay is not rapid.
    pub distribution_order: Option<f64>,
    pub sample_count: usize,
}

/// Log-log fit of coefficient norms over the top half of the dual up to
/// `cutoff`.
pub fn decay_classify(c: &CoefficientField, cutoff: f64) -> Result<DecayReport> {
    if c.is_zero() {
        return Err(Error::Undefined("zero function".into()));
    }
    let reps = enumerate_reps(c.group(), cutoff)?;
    let samples = reps
        .iter()
        .map(|xi| {
            let norm = c.hs_norm_at(xi);
            Ok(Sample {
                xi: xi.clone(),
                bracket: rep_meta(c.group(), xi)?.bracket,
                log_value: if norm > 0.0 { norm.ln() } else { f64::NEG_INFINITY },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let start = samples.len() - samples.len().div_ceil(2);
    if samples[start..].iter().all(|s| s.log_value == f64::NEG_INFINITY) {
        return Ok(DecayReport {
            exponent: f64::NEG_INFINITY,
            rapid_decay: true,
            distribution_order: None,
            sample_count: 0,
        });
    }
    let fit = fit_samples(&samples, 0.5)?;
    let rapid = fit.k_hat < RAPID_DECAY_EXPONENT;
    Ok(DecayReport {
        exponent: fit.k_hat,
        rapid_decay: rapid,
        distribution_order: (!rapid).then_some(fit.k_hat),
        sample_count: fit.sample_count,
    })
}

/// `sum_xi c_xi e^{i x.xi}` with vector coefficients, kept as an explicit
/// term list so it can be sampled and differentiated exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPolynomial {
    pub r: usize,
    pub n: usize,
    pub terms: BTreeMap<Vec<i64>, Vec<C64>>,
}

impl TrigPolynomial {
    /// Random coefficients in the unit square on `|xi_k| <= degree`, each
    /// frequency kept with probability 1/2.
    pub fn random<R: Rng>(r: usize, n: usize, degree: i64, rng: &mut R) -> Self {
        let side = (2 * degree + 1) as usize;
        let mut terms = BTreeMap::new();
        for p in 0..side.pow(r as u32) {
            let xi: Vec<i64> = multi_index(p, r, side).into_iter().map(|k| k as i64 - degree).collect();
            if rng.gen_bool(0.5) {
                let c = (0..n)
                    .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect();
                terms.insert(xi, c);
            }
        }
        Self { r, n, terms }
    }

    /// Direct evaluation on the grid, without any transform.
    pub fn sample(&self, grid_size: usize) -> Result<GridFunction> {
        let points = grid_size.pow(self.r as u32);
        let mut values = vec![C64::new(0.0, 0.0); points * self.n];
        for p in 0..points {
            let x: Vec<f64> = multi_index(p, self.r, grid_size)
                .into_iter()
                .map(|j| 2.0 * PI * j as f64 / grid_size as f64)
                .collect();
            for (xi, coeffs) in &self.terms {
                let phase: f64 = x.iter().zip(xi).map(|(a, &b)| a * b as f64).sum();
                let e = C64::from_polar(1.0, phase);
                for (i, c) in coeffs.iter().enumerate() {
                    values[p * self.n + i] += c * e;
                }
            }
        }
        GridFunction::new(self.r, grid_size, self.n, values)
    }

    pub fn to_field(&self) -> Result<CoefficientField> {
        let mut field = CoefficientField::new(GroupId::Torus(self.r), self.n);
        for (xi, c) in &self.terms {
            field.insert_scalars(RepIndex::Torus(xi.clone()), c)?;
        }
        Ok(field)
    }
}

/// Term-list differentiation of the band-limited samples `f`, evaluated
/// directly at every grid point: `(P f)_j(x) = sum_i sum_xi p_ji(xi) c_i(xi) e^{i x.xi}`
/// with `p_ji(xi) = sum_a c_a (i xi)^a`.
fn direct_apply(polys: &[Vec<Vec<(Vec<u32>, C64)>>], terms: &TrigPolynomial, grid_size: usize) -> Result<GridFunction> {
    let m = polys.len();
    let mut image = TrigPolynomial {
        r: terms.r,
        n: m,
        terms: BTreeMap::new(),
    };
    for (xi, coeffs) in &terms.terms {
        let mut out = vec![C64::new(0.0, 0.0); m];
        for (j, row) in polys.iter().enumerate() {
            for (i, poly) in row.iter().enumerate() {
                let mut p = C64::new(0.0, 0.0);
                for (alpha, c) in poly {
                    let mut mono = C64::new(1.0, 0.0);
                    for (&a, &x) in alpha.iter().zip(xi) {
                        for _ in 0..a {
                            mono *= C64::new(0.0, x as f64);
                        }
                    }
                    p += c * mono;
                }
                out[j] += p * coeffs[i];
            }
        }
        image.terms.insert(xi.clone(), out);
    }
    image.sample(grid_size)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuantizationCheck {
    /// Max pointwise difference between the two paths.
    pub max_error: f64,
    pub scale: f64,
}

/// `inverse(sigma_P . forward(f))` against direct differentiation of the
/// term list recovered from `f`.
pub fn quantization_check(sys: &SystemSymbol, f: &GridFunction) -> Result<QuantizationCheck> {
    let r = torus_rank(sys.group())?;
    if r != f.r {
        return Err(Error::Shape(format!("system on T^{r} applied to a function on T^{}", f.r)));
    }
    if sys.n() != f.n {
        return Err(Error::Shape(format!("system takes {} components, function has {}", sys.n(), f.n)));
    }
    let polys = sys
        .grid()
        .iter()
        .map(|row| {
            row.iter()
                .map(|s| s.as_torus_polynomial().ok_or_else(|| Error::NotPolynomial(s.name().to_string())))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let coeffs = forward(f)?;

    let mut image = CoefficientField::new(*sys.group(), sys.m());
    for (xi, blocks) in coeffs.entries() {
        image.insert(xi.clone(), sys.apply(xi, blocks)?)?;
    }
    let via_dft = inverse(&image, f.grid_size)?;

    let mut terms = TrigPolynomial {
        r,
        n: f.n,
        terms: BTreeMap::new(),
    };
    for (xi, blocks) in coeffs.entries() {
        let RepIndex::Torus(v) = xi else { unreachable!() };
        terms.terms.insert(v.clone(), blocks.iter().map(|b| b[(0, 0)]).collect());
    }
    let direct = direct_apply(&polys, &terms, f.grid_size)?;
    let scale = direct.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(QuantizationCheck {
        max_error: via_dft.max_abs_diff(&direct),
        scale,
    })
}

/// `true` when every coefficient block of the field is `1 x 1`.
pub fn is_scalar_field(c: &CoefficientField) -> bool {
    c.entries().all(|(_, b)| b.iter().all(|m: &ComplexMatrix| m.rows() == 1 && m.cols() == 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::ScalarSymbol;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn exp_mode(r: usize, xi: Vec<i64>, grid: usize) -> GridFunction {
        let mut t = TrigPolynomial { r, n: 1, terms: BTreeMap::new() };
        t.terms.insert(xi, vec![C64::new(1.0, 0.0)]);
        t.sample(grid).unwrap()
    }

    #[test]
    fn single_mode_transform() {
        let f = exp_mode(1, vec![3], 16);
        let c = forward(&f).unwrap();
        for (xi, b) in c.entries() {
            let expect = if *xi == RepIndex::Torus(vec![3]) { 1.0 } else { 0.0 };
            assert!((b[0][(0, 0)] - C64::new(expect, 0.0)).norm() < 1e-14, "{xi}");
        }
        let p = plancherel_check(&f).unwrap();
        assert!((p.lhs - 1.0).abs() < 1e-14 && (p.rhs - 1.0).abs() < 1e-14);
    }

    #[test]
    fn constant_vector() {
        let c0 = [C64::new(2.0, -1.0), C64::new(0.5, 0.0)];
        let f = GridFunction::new(2, 4, 2, (0..16).flat_map(|_| c0).collect()).unwrap();
        let c = forward(&f).unwrap();
        let at0 = c.get(&RepIndex::Torus(vec![0, 0])).unwrap();
        assert!((at0[0][(0, 0)] - c0[0]).norm() < 1e-14);
        assert!((at0[1][(0, 0)] - c0[1]).norm() < 1e-14);
    }

    #[test]
    fn opposite_modes_plancherel() {
        let mut t = TrigPolynomial { r: 1, n: 2, terms: BTreeMap::new() };
        t.terms.insert(vec![1], vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        t.terms.insert(vec![-1], vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        let p = plancherel_check(&t.sample(8).unwrap()).unwrap();
        assert!((p.lhs - 2.0).abs() < 1e-13 && (p.rhs - 2.0).abs() < 1e-13);
    }

    #[test]
    fn round_trip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let t = TrigPolynomial::random(1, 2, 5, &mut rng);
        let f = t.sample(16).unwrap();
        let back = inverse(&forward(&f).unwrap(), 16).unwrap();
        assert!(back.max_abs_diff(&f) < 1e-12);
        let t = TrigPolynomial::random(2, 1, 3, &mut rng);
        let f = t.sample(8).unwrap();
        assert!(inverse(&forward(&f).unwrap(), 8).unwrap().max_abs_diff(&f) < 1e-12);
    }

    #[test]
    fn inverse_rejects_out_of_band() {
        let mut c = CoefficientField::new(GroupId::Torus(1), 1);
        c.insert_scalars(RepIndex::Torus(vec![8]), &[C64::new(1.0, 0.0)]).unwrap();
        assert!(matches!(inverse(&c, 16), Err(Error::OutsideBand(_))));
        let mut c = CoefficientField::new(GroupId::Torus(1), 1);
        c.insert_scalars(RepIndex::Torus(vec![-8]), &[C64::new(1.0, 0.0)]).unwrap();
        assert!(inverse(&c, 16).is_ok());
    }

    fn profile(f: impl Fn(f64) -> f64) -> CoefficientField {
        let mut c = CoefficientField::new(GroupId::Torus(1), 1);
        for k in -30..=30i64 {
            let b = (1.0 + (k * k) as f64).sqrt();
            c.insert_scalars(RepIndex::Torus(vec![k]), &[C64::new(f(b), 0.0)]).unwrap();
        }
        c
    }

    #[test]
    fn decay_examples() {
        let rep = decay_classify(&profile(|b| (-b).exp()), 20.0).unwrap();
        assert!(rep.rapid_decay, "{rep:?}");
        let rep = decay_classify(&profile(|_| 1.0), 20.0).unwrap();
        assert!(!rep.rapid_decay);
        assert!(rep.distribution_order.unwrap().abs() < 1e-10);
        let rep = decay_classify(&profile(|b| b.powi(3)), 20.0).unwrap();
        assert!((rep.distribution_order.unwrap() - 3.0).abs() < 1e-10);
        let err = decay_classify(&CoefficientField::new(GroupId::Torus(1), 1), 5.0).unwrap_err();
        assert!(err.to_string().contains("zero function"));
    }

    #[test]
    fn quantization_examples() {
        let d = SystemSymbol::single(GroupId::Torus(1), ScalarSymbol::torus_derivative(1, 0).unwrap());
        let f = exp_mode(1, vec![3], 16);
        let q = quantization_check(&d, &f).unwrap();
        assert!(q.max_error < 1e-12);

        let grad = SystemSymbol::column(
            GroupId::Torus(2),
            vec![
                ScalarSymbol::torus_derivative(2, 0).unwrap(),
                ScalarSymbol::torus_derivative(2, 1).unwrap(),
            ],
        )
        .unwrap();
        let f = exp_mode(2, vec![1, 2], 8);
        assert!(quantization_check(&grad, &f).unwrap().max_error < 1e-12);

        let b = SystemSymbol::single(GroupId::Torus(1), ScalarSymbol::bessel(1.0));
        assert!(matches!(quantization_check(&b, &exp_mode(1, vec![1], 8)), Err(Error::NotPolynomial(_))));
    }
}
