//! End-to-end acceptance run. Every criterion prints one PASS or FAIL line;
//! the process exits non-zero if any of them fails.

use std::collections::BTreeMap;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use ghx_core::block::{assemble_blocks, SystemSymbol};
use ghx_core::bounds::{det_chain_from_blocks, det_hs_lower, min_halfpower_constant, varah_lower, VarahMode};
use ghx_core::counterexample::{build_witness, find_violations, verify_witness};
use ghx_core::diagnostics::{scan_and_verdict, Classification, VerdictReport};
use ghx_core::fourier::{forward, inverse, quantization_check, TrigPolynomial};
use ghx_core::group::{rep_meta, GroupId, RepIndex};
use ghx_core::symbol::{Axis, ScalarSymbol};
use ghx_core::{load_config, ComplexMatrix, C64};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn to_na(a: &ComplexMatrix) -> DMatrix<Complex64> {
    DMatrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)])
}

/// Smallest singular value straight from nalgebra; zero for wide matrices.
fn svd_min(a: &ComplexMatrix) -> f64 {
    if a.rows() < a.cols() {
        return 0.0;
    }
    to_na(a).singular_values().iter().copied().fold(f64::INFINITY, f64::min)
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn within(bound: f64, exact: f64) -> bool {
    bound <= exact + 1e-10 * exact.max(1.0)
}

fn timed(limit: Option<Duration>, start: Instant) -> Result<String, String> {
    let t = start.elapsed();
    match limit {
        Some(l) if t > l => Err(format!("runtime {:.2}s exceeds {:.0}s", t.as_secs_f64(), l.as_secs_f64())),
        _ => Ok(format!("{:.2}s", t.as_secs_f64())),
    }
}

fn lemma() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = f64::INFINITY;
    for _ in 0..1000 {
        let (p, q, s) = (rng.gen_range(1..=8), rng.gen_range(1..=8), rng.gen_range(1..=8));
        let a = random_matrix(&mut rng, p, q);
        let b = random_matrix(&mut rng, q, s);
        let lhs = to_na(&a.matmul(&b).unwrap()).norm();
        let rhs = a.smallest_singular_value().unwrap() * to_na(&b).norm();
        check(within(rhs, lhs), format!("{rhs} > {lhs} at {p}x{q}x{s}"))?;
        if rhs > 0.0 {
            worst = worst.min(lhs / rhs);
        }
    }
    let t = timed(Some(Duration::from_secs(5)), start)?;
    Ok(format!("1000 pairs, min ratio {worst:.4}, {t}"))
}

fn bound_soundness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut counts: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    let mut first_bad: BTreeMap<&str, String> = BTreeMap::new();
    let mut tally = |name: &'static str, ok: bool, what: String| {
        let e = counts.entry(name).or_default();
        e.0 += 1;
        if !ok {
            e.1 += 1;
            first_bad.entry(name).or_insert(what);
        }
    };
    for k in 0..1000 {
        let d = rng.gen_range(1..=3);
        let m = rng.gen_range(1..=(8 / d).min(4));
        let shift = if k % 2 == 0 { rng.gen_range(0.5..3.0) * (m * d) as f64 } else { 0.0 };
        let grid: Vec<Vec<ComplexMatrix>> = (0..m)
            .map(|j| {
                (0..m)
                    .map(|i| {
                        let b = random_matrix(&mut rng, d, d);
                        if i == j {
                            b.add(&ComplexMatrix::scalar_identity(d, C64::new(shift, 0.0))).unwrap()
                        } else {
                            b
                        }
                    })
                    .collect()
            })
            .collect();
        let a = assemble_blocks(&grid, d);
        let exact = svd_min(&a);
        let tag = format!("instance {k} (m={m}, d={d}, lambda_min={exact:.6})");
        if m * d >= 2 {
            let h = det_hs_lower(&a).unwrap();
            let c = det_chain_from_blocks(&grid, d).unwrap();
            tally("det_hs", within(h, exact), format!("{tag}: {h}"));
            tally("det_chain", within(c, exact), format!("{tag}: {c}"));
            tally("chain<=hs", within(c, h), format!("{tag}: {c} > {h}"));
        }
        if let Some(v) = varah_lower(&grid, VarahMode::Max).unwrap().value() {
            tally("varah_max", within(v, exact), format!("{tag}: {v}"));
        }
        if let Some(v) = varah_lower(&grid, VarahMode::Relaxed).unwrap().value() {
            tally("varah_relaxed", within(v, exact), format!("{tag}: {v}"));
        }
    }
    let t = timed(Some(Duration::from_secs(30)), start)?;
    let summary: Vec<String> = counts
        .iter()
        .map(|(name, (n, bad))| format!("{name} {}/{n}", n - bad))
        .collect();
    if first_bad.is_empty() {
        Ok(format!("{}, {t}", summary.join(", ")))
    } else {
        let bad: Vec<String> = first_bad.iter().map(|(n, w)| format!("{n} first exceeds at {w}")).collect();
        Err(format!("{}; {}", summary.join(", "), bad.join("; ")))
    }
}

fn golden(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    while hi - lo > 1e-13 {
        let a = hi - r * (hi - lo);
        let b = lo + r * (hi - lo);
        if f(a) < f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    f((lo + hi) / 2.0)
}

fn constant() -> Outcome {
    let f = |x: f64| x.powf(x / 2.0);
    let k = min_halfpower_constant();
    let oracle = golden(f, 1e-9, 5.0);
    check((k - oracle).abs() <= 1e-9, format!("constant {k} vs golden section {oracle}"))?;
    check((k - (-1.0 / (2.0 * std::f64::consts::E)).exp()).abs() <= 1e-15, "not e^(-1/(2e))")?;
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for _ in 0..100_000 {
        let x = 10f64.powf(rng.gen_range(-8.0..2.0));
        check(f(x) >= k, format!("x^(x/2) = {} below the constant at x = {x}", f(x)))?;
    }
    Ok(format!("{k:.12} vs golden section {oracle:.12}, 1e5 samples"))
}

fn torus_group(r: usize) -> GroupId {
    GroupId::Torus(r)
}

fn fourier() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let (mut worst_round, mut worst_planch, mut worst_coef) = (0f64, 0f64, 0f64);
    for _ in 0..100 {
        let r = rng.gen_range(1..=2);
        let n = rng.gen_range(1..=3);
        let grid_size = 2 * rng.gen_range(2..=16);
        let degree = (grid_size as i64 / 2 - 1).min(5);
        let t = TrigPolynomial::random(r, n, degree, &mut rng);
        let f = t.sample(grid_size).unwrap();
        let c = forward(&f).unwrap();
        let back = inverse(&c, grid_size).unwrap();
        let scale = f.values.iter().map(|z| z.norm()).fold(1.0, f64::max);
        worst_round = worst_round.max(back.max_abs_diff(&f) / scale);
        for (xi, vals) in &t.terms {
            let got = c.get(&RepIndex::Torus(xi.clone())).ok_or(format!("missing coefficient {xi:?}"))?;
            for (v, b) in vals.iter().zip(got) {
                worst_coef = worst_coef.max((v - b[(0, 0)]).norm());
            }
        }
        let spatial = f.values.iter().map(|z| z.norm_sqr()).sum::<f64>() / (grid_size as f64).powi(r as i32);
        let spectral: f64 = t.terms.values().flatten().map(|z| z.norm_sqr()).sum();
        worst_planch = worst_planch.max((spatial - spectral).abs() / spectral.max(1e-300));
    }
    check(worst_round <= 1e-10, format!("round trip error {worst_round:e}"))?;
    check(worst_planch <= 1e-10, format!("plancherel error {worst_planch:e}"))?;
    check(worst_coef <= 1e-10, format!("coefficient error {worst_coef:e}"))?;

    let mut worst_quant = 0f64;
    let mut worst_direct = 0f64;
    for _ in 0..100 {
        let r = rng.gen_range(1..=2);
        let (m, n) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let mut polys: Vec<Vec<Vec<(Vec<u32>, C64)>>> = Vec::new();
        for _ in 0..m {
            let mut row = Vec::new();
            for _ in 0..n {
                let terms: Vec<(Vec<u32>, C64)> = (0..rng.gen_range(1..=3))
                    .map(|_| {
                        let alpha = (0..r).map(|_| rng.gen_range(0..=3)).collect();
                        (alpha, C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    })
                    .collect();
                row.push(terms);
            }
            polys.push(row);
        }
        let grid = polys
            .iter()
            .map(|row| row.iter().map(|p| ScalarSymbol::torus_poly(p.clone()).unwrap()).collect())
            .collect();
        let sys = SystemSymbol::new(torus_group(r), grid).unwrap();
        let grid_size = 16;
        let t = TrigPolynomial::random(r, n, 4, &mut rng);
        let f = t.sample(grid_size).unwrap();
        let q = quantization_check(&sys, &f).unwrap();
        worst_quant = worst_quant.max(q.max_error / q.scale.max(1.0));

        // Apply the multiplier to the exact coefficients and sample directly.
        let mut image_terms = BTreeMap::new();
        for (xi, c) in &t.terms {
            let out: Vec<C64> = polys
                .iter()
                .map(|row| {
                    row.iter()
                        .zip(c)
                        .map(|(p, ci)| {
                            let sym: C64 = p
                                .iter()
                                .map(|(alpha, a)| {
                                    alpha
                                        .iter()
                                        .zip(xi)
                                        .map(|(&e, &x)| C64::new(0.0, x as f64).powu(e))
                                        .product::<C64>()
                                        * a
                                })
                                .sum();
                            sym * ci
                        })
                        .sum()
                })
                .collect();
            image_terms.insert(xi.clone(), out);
        }
        let direct = TrigPolynomial { r, n: m, terms: image_terms }.sample(grid_size).unwrap();
        let mut image = ghx_core::CoefficientField::new(torus_group(r), m);
        for (xi, b) in forward(&f).unwrap().entries() {
            image.insert(xi.clone(), sys.apply(xi, b).unwrap()).unwrap();
        }
        let via_dft = inverse(&image, grid_size).unwrap();
        let scale = direct.values.iter().map(|z| z.norm()).fold(1.0, f64::max);
        worst_direct = worst_direct.max(via_dft.max_abs_diff(&direct) / scale);
    }
    check(worst_quant <= 1e-10, format!("quantization error {worst_quant:e}"))?;
    check(worst_direct <= 1e-10, format!("multiplier vs direct sampling {worst_direct:e}"))?;
    let t = timed(Some(Duration::from_secs(60)), start)?;
    Ok(format!(
        "round trip {worst_round:.1e}, plancherel {worst_planch:.1e}, quantization {worst_quant:.1e}, direct {worst_direct:.1e}, {t}"
    ))
}

fn su2_algebra() -> Outcome {
    let mut worst = 0f64;
    for twice_spin in 0..=20u32 {
        let xi = RepIndex::spin(twice_spin);
        let s: Vec<DMatrix<Complex64>> = [Axis::X1, Axis::X2, Axis::X3]
            .into_iter()
            .map(|a| to_na(&ScalarSymbol::su2_field(a).eval(&GroupId::Su2, &xi).unwrap()))
            .collect();
        let d = twice_spin as usize + 1;
        for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            let bracket = &s[a] * &s[b] - &s[b] * &s[a];
            worst = worst.max((bracket - &s[c]).camax());
        }
        let l = twice_spin as f64 / 2.0;
        let cas = &s[0] * &s[0] + &s[1] * &s[1] + &s[2] * &s[2];
        let expect = DMatrix::<Complex64>::identity(d, d) * Complex64::new(-l * (l + 1.0), 0.0);
        worst = worst.max((cas - expect).camax());
        // the sub-Laplacian symbol is l(l+1) I - J3^2 = -(s1^2 + s2^2)
        let sub = to_na(&ScalarSymbol::su2_sub_laplacian().eval(&GroupId::Su2, &xi).unwrap());
        worst = worst.max((sub + &s[0] * &s[0] + &s[1] * &s[1]).camax());
    }
    check(worst <= 1e-10, format!("max entrywise error {worst:e}"))?;
    Ok(format!("spins 0..=10, max entrywise error {worst:.1e}"))
}

fn systems_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../systems")
}

fn fixture(name: &str) -> SystemSymbol {
    load_config(&systems_dir().join(format!("{name}.json"))).unwrap().1
}

fn verdict_at(name: &str, cutoff: f64) -> VerdictReport {
    scan_and_verdict(&fixture(name), cutoff, 0.5).unwrap()
}

fn verdict_fixtures() -> Outcome {
    let start = Instant::now();
    let mut notes = Vec::new();
    let mut errors = Vec::new();
    let expect = [
        ("gradient_t2", Classification::Consistent, Some((0.9, 1.0))),
        ("d1_t2", Classification::Violated, None),
        ("sub_laplacian_su2", Classification::Consistent, Some((0.9, 1.1))),
        ("x3_su2", Classification::Violated, None),
    ];
    for (name, class, window) in expect {
        let v20 = verdict_at(name, 20.0);
        let v40 = verdict_at(name, 40.0);
        for v in [&v20, &v40] {
            if v.classification != class {
                errors.push(format!("{name} at {}: {:?}", v.cutoff, v.classification));
            }
            if let Some((lo, hi)) = window {
                match v.k_hat {
                    Some(k) if (lo..=hi).contains(&k) => {}
                    k => errors.push(format!("{name} at {}: k_hat {k:?} outside [{lo}, {hi}]", v.cutoff)),
                }
            }
        }
        notes.push(format!("{name} {:?} k={:?}/{:?}", v20.classification, v20.k_hat, v40.k_hat));
    }
    for cutoff in [20.0, 40.0] {
        let v = verdict_at("coupled_t1", cutoff);
        if !v.block_dominance.holds {
            errors.push(format!("coupled_t1 at {cutoff}: block dominance does not hold"));
        }
        for row in &v.block_dominance.rows {
            let k = row.k.unwrap_or(f64::NAN);
            if (k - 2.0).abs() > 0.05 || (row.tau - 1.0).abs() > 1e-12 || k <= row.tau {
                errors.push(format!("coupled_t1 row {} at {cutoff}: k={k} tau={}", row.row, row.tau));
            }
        }
    }
    if let Err(e) = timed(Some(Duration::from_secs(60)), start) {
        errors.push(e);
    }
    if errors.is_empty() {
        Ok(format!("{}, {:.2}s", notes.join("; "), start.elapsed().as_secs_f64()))
    } else {
        Err(errors.join("; "))
    }
}

fn counterexamples() -> Outcome {
    let mut notes = Vec::new();
    for name in ["gradient_t2", "d1_t2", "sub_laplacian_su2", "x3_su2", "coupled_t1"] {
        let sys = fixture(name);
        let class = scan_and_verdict(&sys, 20.0, 0.5).unwrap().classification;
        let hits = find_violations(&sys, 40.0).unwrap();
        match class {
            Classification::Violated => {
                let w = build_witness(&sys, &hits).unwrap();
                let rep = verify_witness(&sys, &w);
                check(rep.passed, format!("{name}: {:?}", rep.failures))?;
                for e in &w.entries {
                    let xi: RepIndex = e.xi.parse().unwrap();
                    let a = to_na(&sys.assemble(&xi).unwrap());
                    let v = DVector::from_vec(e.v.clone());
                    check((v.norm() - 1.0).abs() <= 1e-12, format!("{name} {xi}: |v| = {}", v.norm()))?;
                    let image = (&a * &v).norm();
                    let b = rep_meta(sys.group(), &xi).unwrap().bracket;
                    check(
                        image < b.powi(-(e.ell as i32)),
                        format!("{name} {xi}: image {image} not below <xi>^-{}", e.ell),
                    )?;
                }
                notes.push(format!("{name} witness of {} entries", w.entries.len()));
            }
            Classification::Consistent => {
                check(hits.len() < 3, format!("{name}: {} violations", hits.len()))?;
                notes.push(format!("{name} {} hits", hits.len()));
            }
            Classification::Inconclusive => return Err(format!("{name} is inconclusive")),
        }
    }
    Ok(notes.join(", "))
}

fn torus_equality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut worst = 0f64;
    for _ in 0..200 {
        let r = rng.gen_range(1..=3);
        let m = rng.gen_range(1..=6);
        let mut syms = Vec::new();
        let mut values = Vec::new();
        let xi: Vec<i64> = (0..r).map(|_| rng.gen_range(-20..=20)).collect();
        for _ in 0..m {
            let terms: Vec<(Vec<u32>, C64)> = (0..rng.gen_range(1..=3))
                .map(|_| {
                    let alpha: Vec<u32> = (0..r).map(|_| rng.gen_range(0..=2)).collect();
                    (alpha, C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                })
                .collect();
            let v: C64 = terms
                .iter()
                .map(|(alpha, c)| {
                    c * alpha.iter().zip(&xi).map(|(&a, &x)| C64::new(0.0, x as f64).powu(a)).product::<C64>()
                })
                .sum();
            values.push(v);
            syms.push(ScalarSymbol::torus_poly(terms).unwrap());
        }
        let sys = SystemSymbol::column(torus_group(r), syms).unwrap();
        let lmin = sys.assemble(&RepIndex::Torus(xi)).unwrap().smallest_singular_value().unwrap();
        let expect = values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        worst = worst.max((lmin - expect).abs() / expect.max(1.0));
    }
    check(worst <= 1e-12, format!("max relative error {worst:e}"))?;
    Ok(format!("200 tuples, max relative error {worst:.1e}"))
}

fn run_scan(config: &Path, threads: &str, dir: &Path) -> (Vec<u8>, Vec<u8>) {
    let out = dir.join(format!("scan_{threads}.json"));
    let csv = dir.join(format!("scan_{threads}.csv"));
    let status = Command::new(env!("CARGO_BIN_EXE_ghx"))
        .env_remove("GHX_THREADS")
        .args(["--threads", threads, "scan", "--cutoff", "20", "--config"])
        .arg(config)
        .arg("--out")
        .arg(&out)
        .arg("--csv")
        .arg(&csv)
        .status()
        .unwrap();
    assert!(status.success());
    (std::fs::read(out).unwrap(), std::fs::read(csv).unwrap())
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut bytes = 0;
    for name in ["gradient_t2", "sub_laplacian_su2", "coupled_t1"] {
        let cfg = systems_dir().join(format!("{name}.json"));
        let one = run_scan(&cfg, "1", dir.path());
        let four = run_scan(&cfg, "4", dir.path());
        check(one == four, format!("{name}: reports differ between 1 and 4 threads"))?;
        bytes += one.0.len();
    }
    Ok(format!("3 systems, {bytes} report bytes identical"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("lemma soundness", lemma),
        ("bound soundness", bound_soundness),
        ("chain constant", constant),
        ("torus fourier", fourier),
        ("su2 algebra", su2_algebra),
        ("verdict fixtures", verdict_fixtures),
        ("counterexample round trip", counterexamples),
        ("torus column equality", torus_equality),
        ("determinism", determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
