//! Singular integral and series, the Cesàro criterion and basis coverage checks.

use serde::{Deserialize, Serialize};

use crate::conv::{convolve_support, real};
use crate::error::{Error, Result};
use crate::prob::Band;
use crate::repfn;
use crate::seq::Sequence;

/// Relative tolerance of the factorization r = Sigma J in floating point.
pub const FACTOR_TOLERANCE: f64 = 1e-12;

fn beta(a: &Sequence, n_max: u64) -> Result<Vec<f64>> {
    let cnt = a.counting_table(n_max)?;
    Ok(cnt
        .iter()
        .enumerate()
        .map(|(k, &c)| c as f64 / (k as f64 + 1.0))
        .collect())
}

/// J(n) = sum over k_1 + ... + k_h = n of prod A(k_i)/(k_i + 1).
pub fn singular_integral(a: &Sequence, h: u32, n_max: u64) -> Result<Vec<f64>> {
    if h == 0 {
        return Err(Error::InvalidParameter("order h must be at least 1".into()));
    }
    let b = beta(a, n_max)?;
    let len = n_max as usize + 1;
    let mut j = b.clone();
    for _ in 1..h {
        j = real::convolve(&j, &b, len);
    }
    // beta_k > 0 exactly when k >= a_0, so J vanishes exactly below h a_0.
    let zero_below = a
        .elements()
        .first()
        .map_or(len as u64, |&a0| (h as u64).saturating_mul(a0))
        .min(len as u64);
    for (n, v) in j.iter_mut().enumerate() {
        if (n as u64) < zero_below || *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(j)
}

/// Band of J(n) n / A(n)^h over the grid.
pub fn singular_integral_band(a: &Sequence, h: u32, grid: &[u64]) -> Result<Band> {
    let n_max = *grid
        .iter()
        .max()
        .ok_or_else(|| Error::InvalidParameter("empty grid".into()))?;
    let j = singular_integral(a, h, n_max)?;
    let cnt = a.counting_table(n_max)?;
    Band::of(
        grid.iter()
            .map(|&n| j[n as usize] * n as f64 / (cnt[n as usize] as f64).powi(h as i32)),
    )
    .ok_or_else(|| Error::InvalidParameter("empty grid".into()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularTable {
    pub h: u32,
    pub n_max: u64,
    pub r: Vec<u64>,
    pub j: Vec<f64>,
    pub sigma: Vec<f64>,
    /// n_max h machine-epsilon, the relative error bound carried by J.
    pub error_bound: f64,
}

impl SingularTable {
    /// Largest relative deviation of Sigma J from r where J > 0.
    pub fn factorization_error(&self) -> f64 {
        self.j
            .iter()
            .zip(&self.sigma)
            .zip(&self.r)
            .filter(|((j, _), _)| **j > 0.0)
            .map(|((j, s), &r)| (s * j - r as f64).abs() / (r as f64).max(1.0))
            .fold(0.0, f64::max)
    }
}

/// Sigma = r/J where J > 0, and 1 elsewhere.
pub fn singular_series(a: &Sequence, h: u32, n_max: u64) -> Result<SingularTable> {
    let t = repfn::rep_table(a, h, n_max)?;
    let j = singular_integral(a, h, n_max)?;
    let sigma = j
        .iter()
        .zip(&t.r)
        .map(|(&j, &r)| if j > 0.0 { r as f64 / j } else { 1.0 })
        .collect();
    Ok(SingularTable {
        h,
        n_max,
        r: t.r,
        j,
        sigma,
        error_bound: n_max as f64 * h as f64 * f64::EPSILON,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CesaroPoint {
    pub x: u64,
    pub average: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CesaroReport {
    pub h: u32,
    pub eps: f64,
    pub points: Vec<CesaroPoint>,
    pub top_decade_max: f64,
    pub mid_decade_max: f64,
    pub bound: f64,
    pub bounded: bool,
}

/// Averages (1/x) sum_{1 <= n <= x} Sigma(n)^{1+eps}; bounded when the top-decade
/// maximum stays within `bound` times the maximum over the decade below it.
pub fn cesaro_criterion(
    table: &SingularTable,
    eps: f64,
    grid: &[u64],
    bound: f64,
) -> Result<CesaroReport> {
    let mut g = grid.to_vec();
    g.sort_unstable();
    g.dedup();
    let top = *g
        .last()
        .ok_or_else(|| Error::InvalidParameter("empty grid".into()))?;
    if top > table.n_max {
        return Err(Error::BeyondHorizon {
            x: top,
            horizon: table.n_max,
        });
    }
    if g[0] == 0 {
        return Err(Error::InvalidParameter(
            "grid points must be positive".into(),
        ));
    }
    let mut points = Vec::with_capacity(g.len());
    let mut acc = 0.0;
    let mut n = 1u64;
    for &x in &g {
        while n <= x {
            acc += table.sigma[n as usize].powf(1.0 + eps);
            n += 1;
        }
        points.push(CesaroPoint {
            x,
            average: acc / x as f64,
        });
    }
    let decade_max = |lo: f64, hi: f64| {
        points
            .iter()
            .filter(|p| (p.x as f64) >= lo && (p.x as f64) < hi)
            .map(|p| p.average)
            .fold(f64::NAN, f64::max)
    };
    let t = top as f64;
    let top_decade_max = decade_max(t / 10.0, t + 1.0);
    let mid_decade_max = decade_max(t / 100.0, t / 10.0);
    if mid_decade_max.is_nan() {
        return Err(Error::InvalidParameter(
            "grid must reach two decades below its top".into(),
        ));
    }
    Ok(CesaroReport {
        h: table.h,
        eps,
        bounded: top_decade_max <= bound * mid_decade_max,
        points,
        top_decade_max,
        mid_decade_max,
        bound,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub h: u32,
    pub covered: u64,
    pub density: f64,
    pub first_gap: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisReport {
    pub x: u64,
    pub coverage: Vec<Coverage>,
    /// Least h with every n <= x representable.
    pub order: Option<u32>,
    pub schnirelmann_density: f64,
    pub density_witness: u64,
}

/// Coverage of hA on [0, x] for h = 1..=h_max and the Schnirelmann density on [1, x].
pub fn basis_check(a: &Sequence, h_max: u32, x: u64) -> Result<BasisReport> {
    if h_max == 0 {
        return Err(Error::InvalidParameter("h_max must be at least 1".into()));
    }
    if x > a.horizon() {
        return Err(Error::BeyondHorizon {
            x,
            horizon: a.horizon(),
        });
    }
    let len = x as usize + 1;
    let ind = a.indicator(x)?;
    let mut cur = ind.clone();
    let mut coverage = Vec::new();
    let mut order = None;
    for h in 1..=h_max {
        if h > 1 {
            cur = convolve_support(&cur, &ind, len)?;
        }
        let covered = cur.iter().filter(|&&v| v > 0).count() as u64;
        let first_gap = cur.iter().position(|&v| v == 0).map(|i| i as u64);
        if first_gap.is_none() && order.is_none() {
            order = Some(h);
        }
        coverage.push(Coverage {
            h,
            covered,
            density: covered as f64 / len as f64,
            first_gap,
        });
    }
    let cnt = a.counting_table(x)?;
    let (mut sd, mut witness) = (f64::INFINITY, 0);
    for n in 1..=x {
        let d = cnt[n as usize] as f64 / n as f64;
        if d < sd {
            sd = d;
            witness = n;
        }
    }
    if x == 0 {
        sd = 1.0;
    }
    Ok(BasisReport {
        x,
        coverage,
        order,
        schnirelmann_density: sd,
        density_witness: witness,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimeFactorCorrelation {
    pub points: usize,
    pub pearson: f64,
    /// Band of Sigma(n) / prod_{p | n} (1 + 1/p).
    pub ratio_band: Band,
}

/// prod_{p | n} (1 + 1/p).
pub fn prime_divisor_product(mut n: u64) -> f64 {
    let mut out = 1.0;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out *= 1.0 + 1.0 / p as f64;
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out *= 1.0 + 1.0 / n as f64;
    }
    out
}

/// Correlation of Sigma(n) with prod_{p | n}(1 + 1/p) over even n in [lo, n_max].
pub fn prime_factor_correlation(table: &SingularTable, lo: u64) -> Result<PrimeFactorCorrelation> {
    let pts: Vec<(f64, f64)> = (lo.max(2)..=table.n_max)
        .filter(|n| n % 2 == 0 && table.j[*n as usize] > 0.0)
        .map(|n| (table.sigma[n as usize], prime_divisor_product(n)))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InvalidParameter(
            "too few points for a correlation".into(),
        ));
    }
    let k = pts.len() as f64;
    let (mx, my) = (
        pts.iter().map(|p| p.0).sum::<f64>() / k,
        pts.iter().map(|p| p.1).sum::<f64>() / k,
    );
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    Ok(PrimeFactorCorrelation {
        points: pts.len(),
        pearson: sxy / (sxx * syy).sqrt(),
        ratio_band: Band::of(pts.iter().map(|p| p.0 / p.1)).unwrap(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    /// max of J_A/J_B where both are positive.
    pub constant: f64,
    pub holds: bool,
    pub worst: Option<u64>,
}

/// For B a subsequence of A: Sigma_B <= c Sigma_A wherever both J are positive.
pub fn dominance_check(sub: &SingularTable, sup: &SingularTable) -> Result<DominanceReport> {
    if sub.h != sup.h || sub.n_max != sup.n_max {
        return Err(Error::InvalidParameter(
            "tables must share order and range".into(),
        ));
    }
    let idx: Vec<usize> = (0..=sub.n_max as usize)
        .filter(|&n| sub.j[n] > 0.0 && sup.j[n] > 0.0)
        .collect();
    let constant = idx.iter().map(|&n| sup.j[n] / sub.j[n]).fold(0.0, f64::max);
    let worst = idx
        .iter()
        .copied()
        .find(|&n| sub.sigma[n] > constant * sup.sigma[n] * (1.0 + FACTOR_TOLERANCE) + 1e-12);
    Ok(DominanceReport {
        constant,
        holds: worst.is_none(),
        worst: worst.map(|n| n as u64),
    })
}
