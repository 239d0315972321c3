//! Lower bounds on the smallest singular value of (block) symbol matrices:
//! the determinant / Hilbert-Schmidt bound, its weakened chain form with the
//! constant `e^{-1/(2e)}`, and the block Varah bound for block diagonally
//! dominant matrices together with its relaxed op-norm form.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::block::BlockEvaluation;
use crate::error::{Error, Result};
use crate::linalg::{is_numerical_zero, ComplexMatrix};

/// A lower bound that may not apply.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bound {
    Value(f64),
    NotApplicable,
    NotDominant,
}

impl Bound {
    pub fn value(&self) -> Option<f64> {
        match self {
            Bound::Value(v) => Some(*v),
            _ => None,
        }
    }
}

impl Serialize for Bound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Bound::Value(v) => s.serialize_f64(*v),
            Bound::NotApplicable => s.serialize_str("n/a"),
            Bound::NotDominant => s.serialize_str("not dominant"),
        }
    }
}

impl<'de> Deserialize<'de> for Bound {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct BoundVisitor;
        impl Visitor<'_> for BoundVisitor {
            type Value = Bound;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number, \"n/a\" or \"not dominant\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Bound, E> {
                Ok(Bound::Value(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Bound, E> {
                Ok(Bound::Value(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Bound, E> {
                Ok(Bound::Value(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Bound, E> {
                match v {
                    "n/a" => Ok(Bound::NotApplicable),
                    "not dominant" => Ok(Bound::NotDominant),
                    _ => Err(E::custom(format!("unknown bound marker '{v}'"))),
                }
            }
        }
        d.deserialize_any(BoundVisitor)
    }
}

/// `|det A| ((l-1)/||A||_HS^2)^{(l-1)/2} <= lambda_min[A]` for `l x l`, `l >= 2`.
pub fn det_hs_lower(a: &ComplexMatrix) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::Shape("determinant bound needs a square matrix".into()));
    }
    let l = a.rows();
    if l < 2 {
        return Err(Error::Undefined(
            "determinant bound is undefined for 1x1 matrices; use |det| directly".into(),
        ));
    }
    let hs = a.hs_norm();
    if hs == 0.0 {
        return Ok(0.0);
    }
    let log_det = a.log_abs_determinant()?;
    let k = (l - 1) as f64;
    Ok((log_det + 0.5 * k * (k.ln() - 2.0 * hs.ln())).exp())
}

/// `min_{x > 0} x^{x/2}`, attained at `x = 1/e`; equals `e^{-1/(2e)}`.
pub fn min_halfpower_constant() -> f64 {
    halfpower(std::f64::consts::E.recip())
}

pub fn halfpower(x: f64) -> f64 {
    x.powf(x / 2.0)
}

/// `e^{-1/(2e)} |det A| (sum_{i,j} ||A_ji||_HS^2)^{-(m d - 1)/2}` over an
/// `m x m` grid of `d x d` blocks with `m d >= 2`.
pub fn det_chain_from_blocks(blocks: &[Vec<ComplexMatrix>], d: usize) -> Result<f64> {
    let m = blocks.len();
    check_square_grid(blocks, d)?;
    if m * d < 2 {
        return Err(Error::Undefined("chain bound needs m*d >= 2".into()));
    }
    let hs_sq: f64 = blocks
        .iter()
        .flatten()
        .map(|b| b.hs_norm().powi(2))
        .sum();
    if hs_sq == 0.0 {
        return Ok(0.0);
    }
    let assembled = crate::block::assemble_blocks(blocks, d);
    let log_det = assembled.log_abs_determinant()?;
    let k = (m * d - 1) as f64;
    Ok(min_halfpower_constant() * (log_det - 0.5 * k * hs_sq.ln()).exp())
}

pub fn det_chain_lower(sys: &crate::block::SystemSymbol, xi: &crate::group::RepIndex) -> Result<f64> {
    if !sys.is_square() {
        return Err(Error::Shape("chain bound needs a square system".into()));
    }
    let d = crate::group::rep_meta(sys.group(), xi)?.dim;
    det_chain_from_blocks(&sys.blocks(xi)?, d)
}

fn check_square_grid(blocks: &[Vec<ComplexMatrix>], d: usize) -> Result<()> {
    let m = blocks.len();
    if m == 0 || blocks.iter().any(|row| row.len() != m) {
        return Err(Error::Shape("block grid must be square".into()));
    }
    if blocks.iter().flatten().any(|b| b.rows() != d || b.cols() != d) {
        return Err(Error::Shape(format!("all blocks must be {d}x{d}")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockNorm {
    /// Entrywise max modulus; the diagonal strength is `||A_ll^{-1}||_max^{-1}`.
    Max,
    /// Operator norm; the diagonal strength is `lambda_min[A_ll]`.
    Op,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Dominance {
    pub dominant: bool,
    /// Minimum row slack.
    pub alpha: f64,
    /// Minimum column slack.
    pub beta: f64,
    /// Dominant, but with slack below `1e-12` relative to the diagonal.
    pub marginal: bool,
    pub reason: Option<String>,
}

/// Block diagonal dominance by rows and columns under `norm`.
pub fn block_dominance(blocks: &[Vec<ComplexMatrix>], norm: BlockNorm) -> Result<Dominance> {
    let m = blocks.len();
    let d = blocks.first().and_then(|r| r.first()).map_or(0, ComplexMatrix::rows);
    check_square_grid(blocks, d)?;
    let off_norm = |b: &ComplexMatrix| -> Result<f64> {
        match norm {
            BlockNorm::Max => Ok(b.max_norm()),
            BlockNorm::Op => b.op_norm(),
        }
    };
    let mut strengths = Vec::with_capacity(m);
    let mut singular = Vec::new();
    for (l, row) in blocks.iter().enumerate() {
        let diag = &row[l];
        let lmin = diag.smallest_singular_value()?;
        if is_numerical_zero(lmin, diag.hs_norm()) {
            singular.push(l);
            strengths.push(0.0);
            continue;
        }
        strengths.push(match norm {
            BlockNorm::Max => match diag.inverse() {
                Ok(inv) => inv.max_norm().recip(),
                Err(_) => {
                    singular.push(l);
                    0.0
                }
            },
            BlockNorm::Op => lmin,
        });
    }
    let mut norms = vec![vec![0.0; m]; m];
    for j in 0..m {
        for i in 0..m {
            if i != j {
                norms[j][i] = off_norm(&blocks[j][i])?;
            }
        }
    }
    let mut alpha = f64::INFINITY;
    let mut beta = f64::INFINITY;
    for l in 0..m {
        let row_sum: f64 = (0..m).filter(|&i| i != l).map(|i| norms[l][i]).sum();
        let col_sum: f64 = (0..m).filter(|&j| j != l).map(|j| norms[j][l]).sum();
        alpha = alpha.min(strengths[l] - row_sum);
        beta = beta.min(strengths[l] - col_sum);
    }
    let scale = strengths.iter().copied().fold(1.0, f64::max);
    let reason = if !singular.is_empty() {
        Some(format!("singular diagonal block(s) {singular:?}"))
    } else if alpha <= 0.0 && beta <= 0.0 {
        Some("rows and columns not dominant".into())
    } else if alpha <= 0.0 {
        Some("rows not dominant".into())
    } else if beta <= 0.0 {
        Some("columns not dominant".into())
    } else {
        None
    };
    let dominant = reason.is_none();
    Ok(Dominance {
        dominant,
        alpha,
        beta,
        marginal: dominant && alpha.min(beta) < 1e-12 * scale,
        reason,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VarahMode {
    /// `sqrt(alpha beta)` with max-norm slacks.
    Max,
    /// `sqrt(alpha* beta*)` with `lambda_min` on the diagonal and op-norm
    /// off-diagonal sums.
    Relaxed,
}

pub fn varah_lower(blocks: &[Vec<ComplexMatrix>], mode: VarahMode) -> Result<Bound> {
    let norm = match mode {
        VarahMode::Max => BlockNorm::Max,
        VarahMode::Relaxed => BlockNorm::Op,
    };
    let dom = block_dominance(blocks, norm)?;
    Ok(if dom.dominant {
        Bound::Value((dom.alpha * dom.beta).sqrt())
    } else {
        Bound::NotDominant
    })
}

/// All bounds evaluated at one representation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub lambda_min_exact: f64,
    pub det_hs: Bound,
    pub det_chain: Bound,
    pub varah: Bound,
    pub varah_relaxed: Bound,
    pub dominant_maxnorm: bool,
    pub dominant_opnorm: bool,
    pub marginal: bool,
}

impl BoundReport {
    pub fn present_bounds(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        [
            ("det_hs", self.det_hs),
            ("det_chain", self.det_chain),
            ("varah", self.varah),
            ("varah_relaxed", self.varah_relaxed),
        ]
        .into_iter()
        .filter_map(|(k, b)| b.value().map(|v| (k, v)))
    }
}

pub fn bound_report(eval: &BlockEvaluation) -> Result<BoundReport> {
    let lambda_min_exact = eval.lambda_min;
    if eval.m() != eval.n() {
        return Ok(BoundReport {
            lambda_min_exact,
            det_hs: Bound::NotApplicable,
            det_chain: Bound::NotApplicable,
            varah: Bound::NotApplicable,
            varah_relaxed: Bound::NotApplicable,
            dominant_maxnorm: false,
            dominant_opnorm: false,
            marginal: false,
        });
    }
    let d = eval.meta.dim;
    let md = eval.m() * d;
    let (det_hs, det_chain) = if md >= 2 {
        (
            Bound::Value(det_hs_lower(&eval.matrix)?),
            Bound::Value(det_chain_from_blocks(&eval.blocks, d)?),
        )
    } else {
        (Bound::Value(eval.det.map_or(0.0, |z| z.norm())), Bound::NotApplicable)
    };
    let max_dom = block_dominance(&eval.blocks, BlockNorm::Max)?;
    let op_dom = block_dominance(&eval.blocks, BlockNorm::Op)?;
    let varah = if max_dom.dominant {
        Bound::Value((max_dom.alpha * max_dom.beta).sqrt())
    } else {
        Bound::NotDominant
    };
    let varah_relaxed = if op_dom.dominant {
        Bound::Value((op_dom.alpha * op_dom.beta).sqrt())
    } else {
        Bound::NotDominant
    };
    Ok(BoundReport {
        lambda_min_exact,
        det_hs,
        det_chain,
        varah,
        varah_relaxed,
        dominant_maxnorm: max_dom.dominant,
        dominant_opnorm: op_dom.dominant,
        marginal: max_dom.marginal || op_dom.marginal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn scalar_grid(rows: &[&[C64]]) -> Vec<Vec<ComplexMatrix>> {
        rows.iter()
            .map(|r| r.iter().map(|&z| ComplexMatrix::diagonal(&[z])).collect())
            .collect()
    }

    #[test]
    fn det_hs_examples() {
        let v = det_hs_lower(&ComplexMatrix::identity(2)).unwrap();
        assert!((v - 0.5f64.sqrt()).abs() < 1e-15);
        let v = det_hs_lower(&ComplexMatrix::diagonal(&[c(1.0, 0.0), c(2.0, 0.0)])).unwrap();
        assert!((v - 2.0 * 0.2f64.sqrt()).abs() < 1e-15);
        assert!(v <= 1.0);
        let s = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert!(det_hs_lower(&s).unwrap() < 1e-15);
        assert_eq!(det_hs_lower(&ComplexMatrix::zeros(3, 3)).unwrap(), 0.0);
        assert!(det_hs_lower(&ComplexMatrix::identity(1)).is_err());
    }

    #[test]
    fn halfpower_constant() {
        let k = min_halfpower_constant();
        assert!((k - (-1.0 / (2.0 * std::f64::consts::E)).exp()).abs() < 1e-15);
        assert!((k - 0.831_985_953_9).abs() < 1e-9);
        assert_eq!(halfpower(1.0), 1.0);
        assert_eq!(halfpower(4.0), 16.0);
    }

    #[test]
    fn chain_identity_system() {
        let grid = vec![
            vec![ComplexMatrix::identity(1), ComplexMatrix::zeros(1, 1)],
            vec![ComplexMatrix::zeros(1, 1), ComplexMatrix::identity(1)],
        ];
        let v = det_chain_from_blocks(&grid, 1).unwrap();
        assert!((v - min_halfpower_constant() * 0.5f64.sqrt()).abs() < 1e-15);
        assert!((v - 0.588_302_909_9).abs() < 1e-9);
        let singular = scalar_grid(&[&[c(1.0, 0.0), c(1.0, 0.0)], &[c(1.0, 0.0), c(1.0, 0.0)]]);
        assert!(det_chain_from_blocks(&singular, 1).unwrap() < 1e-15);
    }

    #[test]
    fn dominance_examples() {
        let two = ComplexMatrix::scalar_identity(2, c(2.0, 0.0));
        let z = ComplexMatrix::zeros(2, 2);
        let grid = vec![vec![two.clone(), z.clone()], vec![z, two]];
        for norm in [BlockNorm::Max, BlockNorm::Op] {
            let d = block_dominance(&grid, norm).unwrap();
            assert!(d.dominant);
            assert!((d.alpha - 2.0).abs() < 1e-14 && (d.beta - 2.0).abs() < 1e-14);
        }
        assert_eq!(varah_lower(&grid, VarahMode::Max).unwrap().value().map(|v| (v - 2.0).abs() < 1e-14), Some(true));

        let g = scalar_grid(&[&[c(26.0, 0.0), c(0.0, 5.0)], &[c(0.0, 5.0), c(26.0, 0.0)]]);
        let d = block_dominance(&g, BlockNorm::Max).unwrap();
        assert!(d.dominant && (d.alpha - 21.0).abs() < 1e-12 && (d.beta - 21.0).abs() < 1e-12);
        let v = varah_lower(&g, VarahMode::Max).unwrap().value().unwrap();
        assert!((v - 21.0).abs() < 1e-12 && v <= 701f64.sqrt());

        let bad = scalar_grid(&[&[c(1.0, 0.0), c(2.0, 0.0)], &[c(2.0, 0.0), c(1.0, 0.0)]]);
        assert!(!block_dominance(&bad, BlockNorm::Max).unwrap().dominant);
        assert_eq!(varah_lower(&bad, VarahMode::Max).unwrap(), Bound::NotDominant);
        assert_eq!(varah_lower(&bad, VarahMode::Relaxed).unwrap(), Bound::NotDominant);
    }

    #[test]
    fn singular_diagonal_block_reason() {
        let g = scalar_grid(&[&[c(0.0, 0.0), c(0.0, 0.0)], &[c(0.0, 0.0), c(1.0, 0.0)]]);
        let d = block_dominance(&g, BlockNorm::Max).unwrap();
        assert!(!d.dominant);
        assert!(d.reason.unwrap().contains("singular"));
    }

    #[test]
    fn max_norm_varah_exceeds_lambda_min_on_a_single_block() {
        // A 1x1 grid holding [[1,1],[0,1]]: ||A^{-1}||_max^{-1} = 1 while
        // lambda_min = (sqrt 5 - 1)/2.
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let v = varah_lower(&[vec![a.clone()]], VarahMode::Max).unwrap().value().unwrap();
        let lmin = a.smallest_singular_value().unwrap();
        assert!((v - 1.0).abs() < 1e-14);
        assert!((lmin - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-14);
        let r = varah_lower(&[vec![a]], VarahMode::Relaxed).unwrap().value().unwrap();
        assert!(r <= lmin + 1e-14);
    }

    #[test]
    fn bound_markers_serialize() {
        let s = serde_json::to_string(&[Bound::Value(1.5), Bound::NotApplicable, Bound::NotDominant]).unwrap();
        assert_eq!(s, r#"[1.5,"n/a","not dominant"]"#);
        let back: Vec<Bound> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![Bound::Value(1.5), Bound::NotApplicable, Bound::NotDominant]);
    }
}
