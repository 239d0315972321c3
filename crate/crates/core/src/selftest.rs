//! Randomized self-checks shipped with the binary: the singular value
//! lemma, soundness of every lower bound, SU(2) symbol algebra and the
//! chain constant.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds::{
    block_dominance, det_chain_from_blocks, det_hs_lower, halfpower, min_halfpower_constant, varah_lower,
    BlockNorm, VarahMode,
};
use crate::block::assemble_blocks;
use crate::group::{GroupId, RepIndex};
use crate::linalg::{ComplexMatrix, C64};
use crate::symbol::{Axis, ScalarSymbol};

pub const SOUNDNESS_REL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub checked: usize,
    pub failures: usize,
    pub detail: String,
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

/// Random `m x m` grid of `d x d` blocks. With `boost` the diagonal blocks
/// get a multiple of the identity large enough to make dominance common.
pub fn random_grid<R: Rng>(rng: &mut R, m: usize, d: usize, boost: bool) -> Vec<Vec<ComplexMatrix>> {
    let shift = if boost {
        rng.gen_range(0.5..3.0) * (m * d) as f64
    } else {
        0.0
    };
    (0..m)
        .map(|j| {
            (0..m)
                .map(|i| {
                    let b = random_matrix(rng, d, d);
                    if i == j && boost {
                        b.add(&ComplexMatrix::scalar_identity(d, C64::new(shift, 0.0))).expect("same shape")
                    } else {
                        b
                    }
                })
                .collect()
        })
        .collect()
}

fn below(bound: f64, exact: f64) -> bool {
    bound <= exact + SOUNDNESS_REL * exact.max(1.0)
}

/// `||A B||_HS >= lambda_min[A] ||B||_HS`.
pub fn lemma_suite(seed: u64, count: usize) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    let mut worst: f64 = f64::INFINITY;
    for _ in 0..count {
        let (p, q, s) = (rng.gen_range(1..=8), rng.gen_range(1..=8), rng.gen_range(1..=8));
        let a = random_matrix(&mut rng, p, q);
        let b = random_matrix(&mut rng, q, s);
        let lhs = a.matmul(&b).expect("shapes agree").hs_norm();
        let rhs = a.smallest_singular_value().expect("finite") * b.hs_norm();
        if !below(rhs, lhs) {
            failures += 1;
        }
        if rhs > 0.0 {
            worst = worst.min(lhs / rhs);
        }
    }
    SuiteResult {
        name: "singular value lemma".into(),
        passed: failures == 0,
        checked: count,
        failures,
        detail: format!("smallest ratio ||AB|| / (lambda_min ||B||) = {worst:.6}"),
    }
}

/// Determinant, chain and relaxed Varah bounds against the SVD, plus the
/// max-norm Varah bound on scalar blocks.
pub fn bound_suite(seed: u64, count: usize) -> Vec<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hs = (0, 0);
    let mut chain = (0, 0);
    let mut chain_vs_hs = (0, 0);
    let mut relaxed = (0, 0);
    let mut max_scalar = (0, 0);
    let mut max_block = (0, 0);
    let mut implication = (0, 0);
    for k in 0..count {
        let d = rng.gen_range(1..=3);
        let m = rng.gen_range(1..=(8 / d).min(4));
        let grid = random_grid(&mut rng, m, d, k % 2 == 0);
        let a = assemble_blocks(&grid, d);
        let exact = a.smallest_singular_value().expect("finite");
        if m * d >= 2 {
            let h = det_hs_lower(&a).expect("square");
            let c = det_chain_from_blocks(&grid, d).expect("square");
            hs.0 += 1;
            chain.0 += 1;
            chain_vs_hs.0 += 1;
            hs.1 += usize::from(!below(h, exact));
            chain.1 += usize::from(!below(c, exact));
            chain_vs_hs.1 += usize::from(!below(c, h));
        }
        if let Some(v) = varah_lower(&grid, VarahMode::Relaxed).expect("square").value() {
            relaxed.0 += 1;
            relaxed.1 += usize::from(!below(v, exact));
        }
        if let Some(v) = varah_lower(&grid, VarahMode::Max).expect("square").value() {
            let slot = if d == 1 { &mut max_scalar } else { &mut max_block };
            slot.0 += 1;
            slot.1 += usize::from(!below(v, exact));
        }
        let op = block_dominance(&grid, BlockNorm::Op).expect("square");
        if op.dominant {
            implication.0 += 1;
            let max = block_dominance(&grid, BlockNorm::Max).expect("square");
            implication.1 += usize::from(!max.dominant);
        }
    }
    let suite = |name: &str, (checked, failures): (usize, usize)| SuiteResult {
        name: name.into(),
        passed: failures == 0 && checked > 0,
        checked,
        failures,
        detail: String::new(),
    };
    vec![
        suite("det_hs_lower <= lambda_min", hs),
        suite("det_chain_lower <= lambda_min", chain),
        suite("det_chain_lower <= det_hs_lower", chain_vs_hs),
        suite("relaxed varah <= lambda_min", relaxed),
        suite("max-norm varah <= lambda_min (scalar blocks)", max_scalar),
        suite("op-norm dominance implies max-norm dominance", implication),
        SuiteResult {
            name: "max-norm varah on blocks of size >= 2 (informational)".into(),
            passed: true,
            checked: max_block.0,
            failures: max_block.1,
            detail: "the entrywise max-norm form is not a lower bound once d >= 2; counted, not enforced".into(),
        },
    ]
}

fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.matmul(b).expect("square").sub(&b.matmul(a).expect("square")).expect("square")
}

/// `[sigma_1, sigma_2] = sigma_3` (cyclic) and `sum sigma_k^2 = -l(l+1) I`
/// for all spins up to `max_twice_spin / 2`.
pub fn su2_suite(max_twice_spin: u32, tol: f64) -> SuiteResult {
    let fields = [Axis::X1, Axis::X2, Axis::X3].map(ScalarSymbol::su2_field);
    let mut worst: f64 = 0.0;
    for t in 0..=max_twice_spin {
        let xi = RepIndex::spin(t);
        let s: Vec<ComplexMatrix> = fields
            .iter()
            .map(|f| f.eval(&GroupId::Su2, &xi).expect("su2 field"))
            .collect();
        for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            worst = worst.max(commutator(&s[a], &s[b]).max_abs_diff(&s[c]));
        }
        let l = t as f64 / 2.0;
        let mut cas = ComplexMatrix::zeros(t as usize + 1, t as usize + 1);
        for m in &s {
            cas = cas.add(&m.matmul(m).expect("square")).expect("square");
        }
        let expect = ComplexMatrix::scalar_identity(t as usize + 1, C64::new(-l * (l + 1.0), 0.0));
        worst = worst.max(cas.max_abs_diff(&expect));
    }
    SuiteResult {
        name: "su2 brackets and casimir".into(),
        passed: worst <= tol,
        checked: max_twice_spin as usize + 1,
        failures: usize::from(worst > tol),
        detail: format!("max entrywise error {worst:.3e}"),
    }
}

/// Golden-section minimization of `f` on `[a, b]`.
pub fn golden_section_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    while (b - a).abs() > tol {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    (a + b) / 2.0
}

pub fn constant_suite(samples: usize) -> SuiteResult {
    let k = min_halfpower_constant();
    let x_star = golden_section_min(halfpower, 1e-6, 10.0, 1e-12);
    let oracle = halfpower(x_star);
    let mut below_count = 0;
    for j in 0..samples {
        let t = j as f64 / (samples - 1) as f64;
        let x = 10f64.powf(-6.0 + 9.0 * t);
        if halfpower(x) < k {
            below_count += 1;
        }
    }
    let ok = (k - oracle).abs() <= 1e-9 && below_count == 0;
    SuiteResult {
        name: "chain constant e^(-1/(2e))".into(),
        passed: ok,
        checked: samples,
        failures: below_count,
        detail: format!("closed form {k:.12}, golden section {oracle:.12} at x = {x_star:.9}"),
    }
}

pub fn run_all(seed: u64) -> Vec<SuiteResult> {
    let mut out = vec![lemma_suite(seed, 1000)];
    out.extend(bound_suite(seed.wrapping_add(1), 1000));
    out.push(su2_suite(20, 1e-10));
    out.push(constant_suite(100_000));
    out
}
