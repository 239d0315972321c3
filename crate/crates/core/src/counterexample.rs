//! Violating sequences and the coefficient field of a non-smooth solution
//! with rapidly decaying image, for systems that fail the growth condition.

use serde::{Deserialize, Serialize};

use crate::block::SystemSymbol;
use crate::coefficients::{stack_hs_norm, CoefficientField};
use crate::error::{Error, Result};
use crate::group::{enumerate_reps, rep_meta, RepIndex};
use crate::linalg::{ComplexMatrix, C64};
use rayon::prelude::*;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub ell: u32,
    pub xi: RepIndex,
    pub lambda_min: f64,
    pub bracket: f64,
}

/// `lambda_min(xi) < <xi>^{-ell}` in log form, so that large `ell` does
/// not underflow.
fn below_power(value: f64, bracket: f64, ell: u32) -> bool {
    value == 0.0 || value.ln() < -(ell as f64) * bracket.ln()
}

/// Greedy first fit: for `ell = 1, 2, ...` the next representation in
/// enumeration order with `lambda_min < <xi>^{-ell}`.
pub fn find_violations(sys: &SystemSymbol, max_cutoff: f64) -> Result<Vec<Violation>> {
    let reps = enumerate_reps(sys.group(), max_cutoff)?;
    let mins: Vec<(f64, f64)> = reps
        .par_iter()
        .map(|xi| {
            let meta = rep_meta(sys.group(), xi)?;
            let a = sys.assemble(xi)?;
            let (sigma, _) = a.min_right_singular_vector().map_err(|e| Error::at_index(xi, e))?;
            Ok((sigma, meta.bracket))
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    let mut ell = 1u32;
    for (xi, &(lambda_min, bracket)) in reps.iter().zip(&mins) {
        if below_power(lambda_min, bracket, ell) {
            out.push(Violation {
                ell,
                xi: xi.clone(),
                lambda_min,
                bracket,
            });
            ell += 1;
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessEntry {
    pub ell: u32,
    pub xi: String,
    /// Unit vector, blocks `v(i, xi)` stacked; `[re, im]` pairs.
    pub v: Vec<C64>,
    pub image_norm: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CounterexampleWitness {
    pub entries: Vec<WitnessEntry>,
    pub coefficients: CoefficientField,
}

/// Coefficients whose first column is `v(i, xi)` and all other columns zero.
fn coefficient_blocks(v: &[C64], n: usize, d: usize) -> Vec<ComplexMatrix> {
    (0..n)
        .map(|i| {
            let mut b = ComplexMatrix::zeros(d, d);
            for k in 0..d {
                b[(k, 0)] = v[i * d + k];
            }
            b
        })
        .collect()
}

pub fn build_witness(sys: &SystemSymbol, violations: &[Violation]) -> Result<CounterexampleWitness> {
    if violations.is_empty() {
        return Err(Error::Undefined("no violations to build a witness from".into()));
    }
    let n = sys.n();
    let mut coefficients = CoefficientField::new(*sys.group(), n);
    let mut entries = Vec::with_capacity(violations.len());
    for viol in violations {
        let xi = &viol.xi;
        let d = rep_meta(sys.group(), xi)?.dim;
        let a = sys.assemble(xi)?;
        let (_, v) = a.min_right_singular_vector().map_err(|e| Error::at_index(xi, e))?;
        let blocks = coefficient_blocks(&v, n, d);
        let image_norm = stack_hs_norm(&sys.apply(xi, &blocks)?);
        coefficients.insert(xi.clone(), blocks)?;
        entries.push(WitnessEntry {
            ell: viol.ell,
            xi: xi.to_string(),
            v,
            image_norm,
        });
    }
    Ok(CounterexampleWitness {
        entries,
        coefficients,
    })
}

impl CounterexampleWitness {
    /// Rebuild the coefficient field from serialized entries.
    pub fn from_entries(sys: &SystemSymbol, entries: Vec<WitnessEntry>) -> Result<Self> {
        let n = sys.n();
        let mut coefficients = CoefficientField::new(*sys.group(), n);
        for e in &entries {
            let xi: RepIndex = e.xi.parse()?;
            let d = rep_meta(sys.group(), &xi)?.dim;
            if e.v.len() != n * d {
                return Err(Error::Shape(format!(
                    "witness vector at {xi} has length {}, expected {}",
                    e.v.len(),
                    n * d
                )));
            }
            coefficients.insert(xi, coefficient_blocks(&e.v, n, d))?;
        }
        Ok(Self {
            entries,
            coefficients,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessReport {
    pub passed: bool,
    pub checked: usize,
    pub failures: Vec<String>,
}

const UNIT_TOL: f64 = 1e-12;

pub fn verify_witness(sys: &SystemSymbol, w: &CounterexampleWitness) -> WitnessReport {
    let mut failures = Vec::new();
    let mut seen: Vec<RepIndex> = Vec::new();
    for (pos, e) in w.entries.iter().enumerate() {
        let xi: RepIndex = match e.xi.parse() {
            Ok(x) => x,
            Err(err) => {
                failures.push(format!("entry {pos}: {err}"));
                continue;
            }
        };
        if e.ell as usize != pos + 1 {
            failures.push(format!("entry {pos}: ell = {} out of sequence", e.ell));
        }
        if seen.contains(&xi) {
            failures.push(format!("representation {xi} repeated"));
        }
        seen.push(xi.clone());
        let Some(blocks) = w.coefficients.get(&xi) else {
            failures.push(format!("missing coefficient at {xi}"));
            continue;
        };
        let norm = stack_hs_norm(blocks);
        if (norm - 1.0).abs() > UNIT_TOL {
            failures.push(format!("unit norm violated at {xi}: {norm}"));
        }
        let bracket = match rep_meta(sys.group(), &xi) {
            Ok(m) => m.bracket,
            Err(err) => {
                failures.push(format!("{xi}: {err}"));
                continue;
            }
        };
        let image = match sys.apply(&xi, blocks) {
            Ok(img) => stack_hs_norm(&img),
            Err(err) => {
                failures.push(format!("{xi}: {err}"));
                continue;
            }
        };
        if (image - e.image_norm).abs() > 1e-10 * image.max(e.image_norm) {
            failures.push(format!(
                "image norm mismatch at {xi}: recorded {} recomputed {image}",
                e.image_norm
            ));
        }
        if !below_power(e.image_norm, bracket, e.ell) || !below_power(image, bracket, e.ell) {
            failures.push(format!(
                "decay violated at {xi}: image norm {} is not below <xi>^-{}",
                e.image_norm.max(image),
                e.ell
            ));
        }
    }
    for (xi, _) in w.coefficients.entries() {
        if !seen.contains(xi) {
            failures.push(format!("nonzero coefficient off the sequence at {xi}"));
        }
    }
    WitnessReport {
        passed: failures.is_empty(),
        checked: w.entries.len(),
        failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupId;
    use crate::symbol::{Axis, ScalarSymbol};

    fn d1() -> SystemSymbol {
        SystemSymbol::single(GroupId::Torus(2), ScalarSymbol::torus_derivative(2, 0).unwrap())
    }

    #[test]
    fn derivative_violations_lie_on_the_axis() {
        let v = find_violations(&d1(), 20.0).unwrap();
        assert!(v.len() > 10);
        for (k, viol) in v.iter().enumerate() {
            assert_eq!(viol.ell as usize, k + 1);
            let RepIndex::Torus(p) = &viol.xi else { panic!() };
            assert_eq!(p[0], 0);
            assert_eq!(viol.lambda_min, 0.0);
        }
    }

    #[test]
    fn bessel_has_no_violations() {
        let sys = SystemSymbol::single(GroupId::Torus(1), ScalarSymbol::bessel(1.0));
        assert!(find_violations(&sys, 20.0).unwrap().is_empty());
    }

    #[test]
    fn gradient_only_hits_the_origin() {
        let sys = SystemSymbol::column(
            GroupId::Torus(2),
            vec![
                ScalarSymbol::torus_derivative(2, 0).unwrap(),
                ScalarSymbol::torus_derivative(2, 1).unwrap(),
            ],
        )
        .unwrap();
        let v = find_violations(&sys, 20.0).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].xi, RepIndex::Torus(vec![0, 0]));
    }

    #[test]
    fn witness_round_trip() {
        let sys = d1();
        let w = build_witness(&sys, &find_violations(&sys, 20.0).unwrap()).unwrap();
        for e in &w.entries {
            assert_eq!(e.v, vec![C64::new(1.0, 0.0)]);
            assert_eq!(e.image_norm, 0.0);
        }
        let rep = verify_witness(&sys, &w);
        assert!(rep.passed, "{:?}", rep.failures);
    }

    #[test]
    fn su2_witness_uses_the_m0_vector() {
        let sys = SystemSymbol::single(GroupId::Su2, ScalarSymbol::su2_field(Axis::X3));
        let viol = find_violations(&sys, 10.0).unwrap();
        let w = build_witness(&sys, &viol).unwrap();
        for e in &w.entries {
            let RepIndex::Su2 { twice_spin } = e.xi.parse().unwrap() else { panic!() };
            if twice_spin % 2 == 1 {
                // Half-integer spins can still beat small powers early on.
                continue;
            }
            assert_eq!(e.image_norm, 0.0);
            let mid = (twice_spin / 2) as usize;
            for (k, z) in e.v.iter().enumerate() {
                let expect = if k == mid { 1.0 } else { 0.0 };
                assert_eq!(*z, C64::new(expect, 0.0));
            }
        }
        assert!(verify_witness(&sys, &w).passed);
    }

    #[test]
    fn tampering_is_detected() {
        let sys = d1();
        let w = build_witness(&sys, &find_violations(&sys, 10.0).unwrap()).unwrap();

        let mut half = w.clone();
        let first = half.entries[0].xi.parse::<RepIndex>().unwrap();
        let blocks: Vec<ComplexMatrix> = half
            .coefficients
            .get(&first)
            .unwrap()
            .iter()
            .map(|b| b.scale(C64::new(0.5, 0.0)))
            .collect();
        half.coefficients.insert(first, blocks).unwrap();
        let rep = verify_witness(&sys, &half);
        assert!(rep.failures.iter().any(|f| f.contains("unit norm violated")));

        let mut loud = w.clone();
        let e = &mut loud.entries[1];
        let b = rep_meta(sys.group(), &e.xi.parse().unwrap()).unwrap().bracket;
        e.image_norm = 2.0 * b.powi(-(e.ell as i32));
        let rep = verify_witness(&sys, &loud);
        assert!(rep.failures.iter().any(|f| f.contains("decay violated")));
    }

    #[test]
    fn image_norm_equals_lambda_min() {
        let p = ScalarSymbol::torus_poly(vec![
            (vec![0], C64::new(1e-9, 0.0)),
            (vec![1], C64::new(0.0, 0.0)),
        ])
        .unwrap();
        let sys = SystemSymbol::column(GroupId::Torus(1), vec![p.clone(), p]).unwrap();
        let viol = find_violations(&sys, 3.0).unwrap();
        let w = build_witness(&sys, &viol).unwrap();
        for (e, v) in w.entries.iter().zip(&viol) {
            let lmin = sys.assemble(&v.xi).unwrap().smallest_singular_value().unwrap();
            assert!((e.image_norm - lmin).abs() <= 1e-10 * lmin.max(1e-300));
        }
    }
}
