//! Quick oracle-equivalence suite behind the `selftest` command.

use serde::{Deserialize, Serialize};

use crate::conv::{self, Backend};
use crate::error::Result;
use crate::generate::{generate, GeneratorKind, GeneratorSpec};
use crate::oracle;
use crate::prob::{self, ProbabilityAssignment};
use crate::repfn;
use crate::rng;
use crate::schnirelmann;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn suite(name: &str, f: impl FnOnce() -> Result<(bool, String)>) -> SuiteResult {
    let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
    SuiteResult {
        name: name.into(),
        passed,
        detail,
    }
}

fn rep_vs_brute_force() -> Result<(bool, String)> {
    let mut checked = 0;
    for s in 0..6u64 {
        let a = oracle::random_sparse(rng::derive_seed(11, s), 400, 0.05);
        for h in 2..=3 {
            let t = repfn::rep_table(&a, h, 400)?;
            if t.r != oracle::brute_force_r(&a, h, 400) {
                return Ok((false, format!("mismatch for sequence {s}, h = {h}")));
            }
            checked += 1;
        }
    }
    Ok((true, format!("{checked} tables equal")))
}

fn backends_agree() -> Result<(bool, String)> {
    let a: Vec<u64> = (0..3000u64).map(|i| rng::bits(5, i) % 1000).collect();
    let b: Vec<u64> = (0..2000u64).map(|i| rng::bits(6, i) % 1000).collect();
    let x = conv::convolve(&a, &b, 5000, Backend::Schoolbook)?;
    let y = conv::convolve(&a, &b, 5000, Backend::Ntt)?;
    Ok((
        x == y,
        "schoolbook and transform convolutions compared on 5000 outputs".into(),
    ))
}

fn rho_routes_agree() -> Result<(bool, String)> {
    let a = oracle::random_sparse(3, 300, 0.2);
    for h in 2..=4 {
        let table = repfn::rho_table(&a, h, 300, 0)?;
        let brute = oracle::brute_force_rho(&a, h, 300, 0);
        if table != brute {
            return Ok((false, format!("rho mismatch at h = {h}")));
        }
        for n in (0..=300).step_by(37) {
            if repfn::rho_knapsack(&a, h, n, 0)? != brute[n as usize] {
                return Ok((false, format!("knapsack mismatch at h = {h}, n = {n}")));
            }
        }
    }
    Ok((true, "Newton, knapsack and enumeration agree".into()))
}

fn exact_decomposition() -> Result<(bool, String)> {
    let a = oracle::random_sparse(4, 500, 0.1);
    for h in 2..=4u32 {
        let t = repfn::rep_table(&a, h, 500)?;
        let rho = repfn::rho_table(&a, h, 500, 0)?;
        let f = (1..=h as u64).product::<u64>();
        for n in 0..=500u64 {
            let ne = repfn::nonexact_count(&a, h, n)?;
            if t.r[n as usize] != f * rho[n as usize] + ne {
                return Ok((false, format!("r != h! rho + nonexact at h = {h}, n = {n}")));
            }
        }
    }
    Ok((
        true,
        "r = h! rho + nonexact on 501 points for h = 2..4".into(),
    ))
}

fn degenerate_expectation() -> Result<(bool, String)> {
    let sq = generate(&GeneratorSpec::new(GeneratorKind::Squares, 2000))?;
    let asg =
        ProbabilityAssignment::explicit(sq.indicator(2000)?.iter().map(|&b| b as f64).collect())?;
    let e = prob::expected_r_tables(&asg, 3, 2000)?;
    let t = repfn::rep_table(&sq, 3, 2000)?;
    let worst = (0..=2000)
        .map(|n| (e[3][n] - t.r[n] as f64).abs())
        .fold(0.0, f64::max);
    Ok((worst < 1e-6, format!("max deviation {worst:e}")))
}

fn singular_integral_oracle() -> Result<(bool, String)> {
    let a = oracle::random_sparse(8, 200, 0.3);
    let mut worst = 0.0f64;
    for h in 1..=3 {
        let fast = schnirelmann::singular_integral(&a, h, 200)?;
        let slow = oracle::nested_singular_integral(&a, h, 200);
        for (x, y) in fast.iter().zip(&slow) {
            worst = worst.max((x - y).abs() / y.abs().max(1.0));
        }
    }
    Ok((worst < 1e-9, format!("max relative deviation {worst:e}")))
}

fn sampling_replay() -> Result<(bool, String)> {
    let asg = ProbabilityAssignment::uniform(0.3, 100_000)?;
    let a = prob::sample(&asg, 77);
    let b = prob::sample(&asg, 77);
    Ok((a == b, format!("{} elements replayed", a.len())))
}

/// Run every suite.
pub fn run() -> Vec<SuiteResult> {
    vec![
        suite("rep-table-vs-enumeration", rep_vs_brute_force),
        suite("convolution-backends", backends_agree),
        suite("exact-count-routes", rho_routes_agree),
        suite("exact-decomposition", exact_decomposition),
        suite("degenerate-expectation", degenerate_expectation),
        suite("singular-integral-nested-sum", singular_integral_oracle),
        suite("sampling-replay", sampling_replay),
    ]
}
