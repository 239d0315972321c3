//! Scans over the truncated dual, power-law growth fits and the verdict
//! fragments for the global hypoellipticity criteria.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::block::SystemSymbol;
use crate::bounds::{bound_report, BoundReport};
use crate::error::{Error, Result};
use crate::fit::ols;
use crate::group::{enumerate_reps, GroupId, RepIndex};
use crate::linalg::is_numerical_zero;
use crate::symbol::{estimate_order, Order};

/// Decays below `<xi>^K_FLOOR` at both scales count as faster than every power.
pub const K_FLOOR: f64 = -20.0;
/// Exponent slack when the envelope fitted at the base cutoff is tested on
/// the doubled cutoff.
pub const ENVELOPE_SLACK: f64 = 0.25;
/// Required margin in `k_l > tau_l`.
pub const ORDER_MARGIN: f64 = 1e-9;
pub const DEFAULT_TAIL: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub xi: RepIndex,
    pub bracket: f64,
    pub dim: usize,
    pub lambda_min: f64,
    pub zero_flag: bool,
    pub hs: f64,
    pub op: f64,
    pub det_re: Option<f64>,
    pub det_im: Option<f64>,
    pub log_abs_det: Option<f64>,
    /// `lambda_min` of each diagonal block, zeroed like the full matrix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diag_lambda_min: Option<Vec<f64>>,
    /// `lambda_min` of each block of a column system.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column_lambda_min: Option<Vec<f64>>,
    pub bounds: BoundReport,
}

fn zeroed_lambda_min(b: &crate::linalg::ComplexMatrix) -> Result<f64> {
    let l = b.smallest_singular_value()?;
    Ok(if is_numerical_zero(l, b.hs_norm()) { 0.0 } else { l })
}

pub fn scan_one(sys: &SystemSymbol, xi: &RepIndex) -> Result<ScanRecord> {
    let ev = sys.evaluate(xi)?;
    let wrap = |e: Error| Error::at_index(xi, e);
    let bounds = bound_report(&ev).map_err(wrap)?;
    let diag_lambda_min = if sys.is_square() {
        Some(
            (0..sys.m())
                .map(|l| zeroed_lambda_min(&ev.blocks[l][l]))
                .collect::<Result<Vec<_>>>()
                .map_err(wrap)?,
        )
    } else {
        None
    };
    let column_lambda_min = if sys.n() == 1 {
        Some(
            ev.blocks
                .iter()
                .map(|row| zeroed_lambda_min(&row[0]))
                .collect::<Result<Vec<_>>>()
                .map_err(wrap)?,
        )
    } else {
        None
    };
    Ok(ScanRecord {
        xi: ev.xi.clone(),
        bracket: ev.meta.bracket,
        dim: ev.meta.dim,
        lambda_min: ev.lambda_min,
        zero_flag: ev.numerical_zero,
        hs: ev.hs_norm,
        op: ev.op_norm,
        det_re: ev.det.map(|z| z.re),
        det_im: ev.det.map(|z| z.im),
        log_abs_det: ev.log_abs_det,
        diag_lambda_min,
        column_lambda_min,
        bounds,
    })
}

/// One record per enumerated representation, in enumeration order.
pub fn scan(sys: &SystemSymbol, cutoff: f64) -> Result<Vec<ScanRecord>> {
    let reps = enumerate_reps(sys.group(), cutoff)?;
    reps.par_iter().map(|xi| scan_one(sys, xi)).collect()
}

/// One sampled quantity `value(xi)`, carried in log form so that fast
/// decaying determinants do not underflow.
#[derive(Clone, Debug)]
pub struct Sample {
    pub xi: RepIndex,
    pub bracket: f64,
    /// `ln value`; `-inf` for a zero.
    pub log_value: f64,
}

impl Sample {
    fn is_zero(&self) -> bool {
        self.log_value == f64::NEG_INFINITY
    }
}

fn log_or_zero(v: f64, zero: bool) -> f64 {
    if zero || v <= 0.0 {
        f64::NEG_INFINITY
    } else {
        v.ln()
    }
}

pub fn lambda_samples(records: &[ScanRecord]) -> Vec<Sample> {
    records
        .iter()
        .map(|r| Sample {
            xi: r.xi.clone(),
            bracket: r.bracket,
            log_value: log_or_zero(r.lambda_min, r.zero_flag),
        })
        .collect()
}

pub fn det_samples(records: &[ScanRecord]) -> Vec<Sample> {
    records
        .iter()
        .map(|r| Sample {
            xi: r.xi.clone(),
            bracket: r.bracket,
            log_value: if r.zero_flag {
                f64::NEG_INFINITY
            } else {
                r.log_abs_det.unwrap_or(f64::NEG_INFINITY)
            },
        })
        .collect()
}

fn mapped_samples(records: &[ScanRecord], f: impl Fn(&ScanRecord) -> f64) -> Vec<Sample> {
    records
        .iter()
        .map(|r| {
            let v = f(r);
            Sample {
                xi: r.xi.clone(),
                bracket: r.bracket,
                log_value: log_or_zero(v, false),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthEstimate {
    pub k_hat: f64,
    pub c_hat: f64,
    /// `ln c_hat`; finite even when `c_hat` underflows.
    pub log_c_hat: f64,
    /// Zeros among all records, head included.
    pub zero_count: usize,
    pub tail_zero_count: usize,
    pub violating_set: Vec<RepIndex>,
    pub tail_window: (f64, f64),
    pub sample_count: usize,
}

fn check_tail(tail_fraction: f64) -> Result<()> {
    if tail_fraction.is_finite() && tail_fraction > 0.0 && tail_fraction <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidTail(tail_fraction))
    }
}

fn tail_start(len: usize, tail_fraction: f64) -> usize {
    let count = ((len as f64) * tail_fraction).ceil() as usize;
    len - count.min(len)
}

/// Fit `value >= C <xi>^k` on the top `tail_fraction` of the samples.
pub fn fit_samples(samples: &[Sample], tail_fraction: f64) -> Result<GrowthEstimate> {
    check_tail(tail_fraction)?;
    let tail = &samples[tail_start(samples.len(), tail_fraction)..];
    let zero_count = samples.iter().filter(|s| s.is_zero()).count();
    let tail_zero_count = tail.iter().filter(|s| s.is_zero()).count();
    let nonzero: Vec<&Sample> = tail.iter().filter(|s| !s.is_zero()).collect();
    if nonzero.len() < 3 {
        return Err(Error::NoGrowth(format!(
            "{} nonzero records in a tail of {}",
            nonzero.len(),
            tail.len()
        )));
    }
    let pts: Vec<(f64, f64)> = nonzero.iter().map(|s| (s.bracket.ln(), s.log_value)).collect();
    let (k_hat, _) = ols(&pts);
    let mut log_c_hat = nonzero
        .iter()
        .map(|s| s.log_value - k_hat * s.bracket.ln())
        .fold(f64::INFINITY, f64::min);
    let mut c_hat = log_c_hat.exp();
    // Shrink C until the envelope holds exactly in floating point.
    let violates = |c: f64, s: &Sample| c * s.bracket.powf(k_hat) > s.log_value.exp();
    for _ in 0..16 {
        if !nonzero.iter().any(|s| violates(c_hat, s)) {
            break;
        }
        c_hat *= 1.0 - 4.0 * f64::EPSILON;
        log_c_hat = c_hat.ln();
    }
    let violating_set = nonzero
        .iter()
        .filter(|s| violates(c_hat, s))
        .map(|s| s.xi.clone())
        .collect();
    let tail_window = (
        tail.first().map_or(f64::NAN, |s| s.bracket),
        tail.last().map_or(f64::NAN, |s| s.bracket),
    );
    Ok(GrowthEstimate {
        k_hat,
        c_hat,
        log_c_hat,
        zero_count,
        tail_zero_count,
        violating_set,
        tail_window,
        sample_count: nonzero.len(),
    })
}

/// Growth fit of `lambda_min` over the tail of a scan.
pub fn fit_growth(records: &[ScanRecord], tail_fraction: f64) -> Result<GrowthEstimate> {
    fit_samples(&lambda_samples(records), tail_fraction)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    #[serde(rename = "GH_CONSISTENT")]
    Consistent,
    #[serde(rename = "GH_VIOLATED")]
    Violated,
    #[serde(rename = "INCONCLUSIVE")]
    Inconclusive,
}

impl Classification {
    pub fn exit_code(&self) -> i32 {
        match self {
            Classification::Consistent => 0,
            Classification::Violated => 2,
            Classification::Inconclusive => 3,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Consistent => "GH_CONSISTENT",
            Classification::Violated => "GH_VIOLATED",
            Classification::Inconclusive => "INCONCLUSIVE",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScaleSummary {
    pub cutoff: f64,
    pub record_count: usize,
    pub zero_count: usize,
    pub tail_zero_count: usize,
    pub fit: Option<GrowthEstimate>,
    pub fit_error: Option<String>,
}

/// Two-scale evidence for `value >= C <xi>^k` off a finite set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnvelopeCheck {
    pub classification: Classification,
    pub reasons: Vec<String>,
    pub base: ScaleSummary,
    pub doubled: ScaleSummary,
}

impl EnvelopeCheck {
    pub fn k_hat(&self) -> Option<f64> {
        self.base.fit.as_ref().map(|f| f.k_hat)
    }
}

fn summarize(samples: &[Sample], cutoff: f64, tail_fraction: f64) -> ScaleSummary {
    let start = tail_start(samples.len(), tail_fraction);
    let zero_count = samples.iter().filter(|s| s.is_zero()).count();
    let tail_zero_count = samples[start..].iter().filter(|s| s.is_zero()).count();
    let (fit, fit_error) = match fit_samples(samples, tail_fraction) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    ScaleSummary {
        cutoff,
        record_count: samples.len(),
        zero_count,
        tail_zero_count,
        fit,
        fit_error,
    }
}

pub fn envelope_check(
    base: &[Sample],
    doubled: &[Sample],
    cutoff: f64,
    tail_fraction: f64,
) -> Result<EnvelopeCheck> {
    check_tail(tail_fraction)?;
    let lo = summarize(base, cutoff, tail_fraction);
    let hi = summarize(doubled, 2.0 * cutoff, tail_fraction);
    let mut reasons = Vec::new();
    let classification = classify(&lo, &hi, doubled, tail_fraction, &mut reasons);
    Ok(EnvelopeCheck {
        classification,
        reasons,
        base: lo,
        doubled: hi,
    })
}

fn classify(
    lo: &ScaleSummary,
    hi: &ScaleSummary,
    doubled: &[Sample],
    tail_fraction: f64,
    reasons: &mut Vec<String>,
) -> Classification {
    if lo.tail_zero_count > 0 && hi.tail_zero_count > 0 && hi.zero_count > lo.zero_count {
        reasons.push(format!(
            "zeros recur in the tail at both cutoffs; zero count grows from {} to {}",
            lo.zero_count, hi.zero_count
        ));
        return Classification::Violated;
    }
    if lo.tail_zero_count > 0 || hi.tail_zero_count > 0 {
        reasons.push(format!(
            "tail zeros ({} at base, {} at doubled cutoff) without growth in the zero count",
            lo.tail_zero_count, hi.tail_zero_count
        ));
        return Classification::Inconclusive;
    }
    let (Some(f_lo), Some(f_hi)) = (&lo.fit, &hi.fit) else {
        reasons.push("growth fit unavailable at one of the cutoffs".into());
        if let Some(e) = lo.fit_error.as_ref().or(hi.fit_error.as_ref()) {
            reasons.push(e.clone());
        }
        return Classification::Inconclusive;
    };
    if f_lo.k_hat < K_FLOOR && f_hi.k_hat < K_FLOOR {
        reasons.push(format!(
            "decay faster than <xi>^{K_FLOOR} at both cutoffs (k_hat {:.4} and {:.4})",
            f_lo.k_hat, f_hi.k_hat
        ));
        return Classification::Violated;
    }
    if f_lo.k_hat < K_FLOOR || f_hi.k_hat < K_FLOOR {
        reasons.push(format!(
            "fitted exponents straddle the floor {K_FLOOR} ({:.4} and {:.4})",
            f_lo.k_hat, f_hi.k_hat
        ));
        return Classification::Inconclusive;
    }
    let k = f_lo.k_hat - ENVELOPE_SLACK;
    let tail = &doubled[tail_start(doubled.len(), tail_fraction)..];
    let failures = tail
        .iter()
        .filter(|s| s.log_value < f_lo.log_c_hat + k * s.bracket.ln())
        .count();
    if failures == 0 {
        reasons.push(format!(
            "envelope C <xi>^k with k = {:.6} from the base cutoff holds on the doubled tail up to exponent slack {ENVELOPE_SLACK}",
            f_lo.k_hat
        ));
        Classification::Consistent
    } else {
        reasons.push(format!(
            "base envelope fails at {failures} doubled-tail records even with exponent slack {ENVELOPE_SLACK}"
        ));
        Classification::Inconclusive
    }
}

/// Main characterization: `lambda_min[sigma_P]` has a power-law lower bound
/// off a finite set.
pub fn check_main_criterion(
    base: &[ScanRecord],
    doubled: &[ScanRecord],
    cutoff: f64,
    tail_fraction: f64,
) -> Result<EnvelopeCheck> {
    envelope_check(&lambda_samples(base), &lambda_samples(doubled), cutoff, tail_fraction)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntryOrder {
    pub row: usize,
    pub col: usize,
    pub order: f64,
    pub estimated: bool,
}

fn entry_orders(sys: &SystemSymbol, cutoff: f64) -> Result<Vec<EntryOrder>> {
    let mut out = Vec::new();
    for (j, row) in sys.grid().iter().enumerate() {
        for (i, s) in row.iter().enumerate() {
            let (order, estimated) = match s.order() {
                Order::Known(t) => (t, false),
                Order::Unknown => (estimate_order(s, sys.group(), cutoff)?.tau_hat, true),
            };
            out.push(EntryOrder {
                row: j,
                col: i,
                order,
                estimated,
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DetSufficientReport {
    pub holds: bool,
    /// "order", "bounded_dimension", both joined by '+', or "neither branch".
    pub branch: String,
    pub order_threshold: f64,
    pub max_entry_order: Option<f64>,
    pub dimension_bound: Option<usize>,
    pub estimated_orders: bool,
    pub det_envelope: Option<EnvelopeCheck>,
    pub reasons: Vec<String>,
}

/// `|det sigma_P| >= C <xi>^k` together with either entry orders below
/// `-dim(G)/4` or bounded representation dimensions.
pub fn check_det_sufficient(
    sys: &SystemSymbol,
    base: &[ScanRecord],
    doubled: &[ScanRecord],
    cutoff: f64,
    tail_fraction: f64,
) -> Result<DetSufficientReport> {
    let group = sys.group();
    let order_threshold = -(group.dim() as f64) / 4.0;
    if !sys.is_square() {
        return Ok(DetSufficientReport {
            holds: false,
            branch: "neither branch".into(),
            order_threshold,
            max_entry_order: None,
            dimension_bound: group.dimension_bound(),
            estimated_orders: false,
            det_envelope: None,
            reasons: vec!["determinant criterion needs a square system".into()],
        });
    }
    let orders = entry_orders(sys, cutoff)?;
    let max_entry_order = orders.iter().map(|o| o.order).fold(f64::NEG_INFINITY, f64::max);
    let order_branch = max_entry_order < order_threshold;
    let dimension_bound = group.dimension_bound();
    let branch = match (order_branch, dimension_bound.is_some()) {
        (true, true) => "order+bounded_dimension",
        (true, false) => "order",
        (false, true) => "bounded_dimension",
        (false, false) => "neither branch",
    };
    let env = envelope_check(&det_samples(base), &det_samples(doubled), cutoff, tail_fraction)?;
    let mut reasons = Vec::new();
    if branch == "neither branch" {
        reasons.push(format!(
            "entry orders reach {max_entry_order} >= {order_threshold} and representation dimensions are unbounded"
        ));
    }
    if env.classification != Classification::Consistent {
        reasons.push(format!("determinant envelope is {}", env.classification.as_str()));
    }
    Ok(DetSufficientReport {
        holds: branch != "neither branch" && env.classification == Classification::Consistent,
        branch: branch.into(),
        order_threshold,
        max_entry_order: Some(max_entry_order),
        dimension_bound,
        estimated_orders: orders.iter().any(|o| o.estimated),
        det_envelope: Some(env),
        reasons,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagonalRow {
    pub row: usize,
    pub k: Option<f64>,
    /// Largest off-diagonal order in the row and column; `-inf` if all vanish.
    pub tau: f64,
    pub tau_estimated: bool,
    pub margin: Option<f64>,
    pub envelope: Classification,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockDominanceReport {
    pub holds: bool,
    pub dominance_in_tail: bool,
    pub non_dominant: Vec<RepIndex>,
    pub rows: Vec<DiagonalRow>,
    pub reasons: Vec<String>,
}

/// Block diagonal dominance on the tail plus diagonal growth `k_l > tau_l`.
pub fn check_block_dominance_sufficient(
    sys: &SystemSymbol,
    base: &[ScanRecord],
    doubled: &[ScanRecord],
    cutoff: f64,
    tail_fraction: f64,
) -> Result<BlockDominanceReport> {
    check_tail(tail_fraction)?;
    if !sys.is_square() {
        return Ok(BlockDominanceReport {
            holds: false,
            dominance_in_tail: false,
            non_dominant: Vec::new(),
            rows: Vec::new(),
            reasons: vec!["dominance criterion needs a square system".into()],
        });
    }
    let mut non_dominant = Vec::new();
    for records in [base, doubled] {
        for r in &records[tail_start(records.len(), tail_fraction)..] {
            if !r.bounds.dominant_maxnorm && !non_dominant.contains(&r.xi) {
                non_dominant.push(r.xi.clone());
            }
        }
    }
    let mut reasons = Vec::new();
    let dominance_in_tail = non_dominant.is_empty();
    if !dominance_in_tail {
        reasons.push(format!(
            "not block diagonally dominant at {} tail representations",
            non_dominant.len()
        ));
    }
    let orders = entry_orders_offdiag(sys, cutoff)?;
    let mut rows = Vec::with_capacity(sys.m());
    for l in 0..sys.m() {
        let diag = |r: &ScanRecord| r.diag_lambda_min.as_ref().map_or(0.0, |v| v[l]);
        let env = envelope_check(
            &mapped_samples(base, diag),
            &mapped_samples(doubled, diag),
            cutoff,
            tail_fraction,
        )?;
        let (tau, tau_estimated) = orders[l];
        let k = env.k_hat();
        let margin = k.map(|k| k - tau);
        let holds = env.classification == Classification::Consistent
            && k.is_some_and(|k| k > tau + ORDER_MARGIN);
        if !holds {
            reasons.push(match k {
                Some(k) if env.classification == Classification::Consistent => {
                    format!("row {l}: k = {k:.6} does not exceed tau = {tau}")
                }
                _ => format!(
                    "row {l}: diagonal envelope is {}",
                    env.classification.as_str()
                ),
            });
        }
        rows.push(DiagonalRow {
            row: l,
            k,
            tau,
            tau_estimated,
            margin,
            envelope: env.classification,
            holds,
        });
    }
    Ok(BlockDominanceReport {
        holds: dominance_in_tail && rows.iter().all(|r| r.holds),
        dominance_in_tail,
        non_dominant,
        rows,
        reasons,
    })
}

fn entry_orders_offdiag(sys: &SystemSymbol, cutoff: f64) -> Result<Vec<(f64, bool)>> {
    let m = sys.m();
    let mut tau = vec![(f64::NEG_INFINITY, false); m];
    for (j, row) in sys.grid().iter().enumerate() {
        for (i, s) in row.iter().enumerate() {
            if i == j || s.is_structurally_zero() {
                continue;
            }
            let (order, est) = match s.order() {
                Order::Known(t) => (t, false),
                Order::Unknown => (estimate_order(s, sys.group(), cutoff)?.tau_hat, true),
            };
            for l in [i, j] {
                if order > tau[l].0 {
                    tau[l].0 = order;
                }
                tau[l].1 |= est;
            }
        }
    }
    Ok(tau)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ColumnReport {
    pub classification: Classification,
    /// True when the criterion is a characterization (torus or `m = 1`).
    pub if_and_only_if: bool,
    pub sufficient_holds: bool,
    /// Largest deviation from `sqrt(sum_j |P_j(xi)|^2)` on the torus.
    pub torus_equality_max_error: Option<f64>,
    pub torus_equality_holds: Option<bool>,
    pub envelope: EnvelopeCheck,
    pub reasons: Vec<String>,
}

/// `lambda_min >= max_j lambda_min[sigma_{P_j}]` for column systems; an
/// equality on the torus.
pub fn check_column_system(
    sys: &SystemSymbol,
    base: &[ScanRecord],
    doubled: &[ScanRecord],
    cutoff: f64,
    tail_fraction: f64,
) -> Result<ColumnReport> {
    if sys.n() != 1 {
        return Err(Error::Shape("column criterion needs n = 1".into()));
    }
    let col_max = |r: &ScanRecord| {
        r.column_lambda_min
            .as_ref()
            .map_or(0.0, |v| v.iter().copied().fold(0.0, f64::max))
    };
    let env = envelope_check(
        &mapped_samples(base, col_max),
        &mapped_samples(doubled, col_max),
        cutoff,
        tail_fraction,
    )?;
    let mut reasons = env.reasons.clone();
    let (max_err, eq_holds) = if sys.group().is_torus() {
        let mut max_err: f64 = 0.0;
        let mut ok = true;
        for r in base.iter().chain(doubled) {
            let expected = r
                .column_lambda_min
                .as_ref()
                .map_or(0.0, |v| v.iter().map(|x| x * x).sum::<f64>().sqrt());
            let err = (r.lambda_min - expected).abs();
            let tol = 1e-12 * expected.max(1.0);
            let zero_ok = r.zero_flag && is_numerical_zero(expected, r.hs);
            if err > tol && !zero_ok {
                ok = false;
            }
            if !zero_ok {
                max_err = max_err.max(err / expected.max(1.0));
            }
        }
        if !ok {
            reasons.push("torus column equality failed".into());
        }
        (Some(max_err), Some(ok))
    } else {
        (None, None)
    };
    let if_and_only_if = sys.m() == 1 || eq_holds == Some(true);
    let sufficient_holds = env.classification == Classification::Consistent;
    let classification = if sufficient_holds || if_and_only_if {
        env.classification
    } else {
        reasons.push("sufficient condition not met and not a characterization here".into());
        Classification::Inconclusive
    };
    Ok(ColumnReport {
        classification,
        if_and_only_if,
        sufficient_holds,
        torus_equality_max_error: max_err,
        torus_equality_holds: eq_holds,
        envelope: env,
        reasons,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerdictReport {
    pub classification: Classification,
    pub group: GroupId,
    pub cutoff: f64,
    pub tail_fraction: f64,
    pub k_floor: f64,
    pub k_hat: Option<f64>,
    pub criteria_results: BTreeMap<String, serde_json::Value>,
    pub main: EnvelopeCheck,
    pub det_sufficient: DetSufficientReport,
    pub block_dominance: BlockDominanceReport,
    pub column: Option<ColumnReport>,
}

/// Evaluate every criterion from scans at `cutoff` and `2 cutoff`.
pub fn verdict(
    sys: &SystemSymbol,
    base: &[ScanRecord],
    doubled: &[ScanRecord],
    cutoff: f64,
    tail_fraction: f64,
) -> Result<VerdictReport> {
    let main = check_main_criterion(base, doubled, cutoff, tail_fraction)?;
    let det = check_det_sufficient(sys, base, doubled, cutoff, tail_fraction)?;
    let dom = check_block_dominance_sufficient(sys, base, doubled, cutoff, tail_fraction)?;
    let column = if sys.n() == 1 {
        Some(check_column_system(sys, base, doubled, cutoff, tail_fraction)?)
    } else {
        None
    };
    let mut criteria = BTreeMap::new();
    criteria.insert("main".to_string(), main.classification.as_str().into());
    criteria.insert("det_sufficient".to_string(), det.holds.into());
    criteria.insert("block_dominance".to_string(), dom.holds.into());
    criteria.insert(
        "column".to_string(),
        column
            .as_ref()
            .map_or(serde_json::Value::Null, |c| c.classification.as_str().into()),
    );
    Ok(VerdictReport {
        classification: main.classification,
        group: *sys.group(),
        cutoff,
        tail_fraction,
        k_floor: K_FLOOR,
        k_hat: main.k_hat(),
        criteria_results: criteria,
        main,
        det_sufficient: det,
        block_dominance: dom,
        column,
    })
}

/// Scan at `cutoff` and `2 cutoff`, then evaluate the verdict.
pub fn scan_and_verdict(sys: &SystemSymbol, cutoff: f64, tail_fraction: f64) -> Result<VerdictReport> {
    let base = scan(sys, cutoff)?;
    let doubled = scan(sys, 2.0 * cutoff)?;
    verdict(sys, &base, &doubled, cutoff, tail_fraction)
}
