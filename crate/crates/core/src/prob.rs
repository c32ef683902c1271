//! Random sequence spaces: seeded sampling, exact expectations and Monte Carlo checks.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::conv::real;
use crate::error::{Error, Result};
use crate::par;
use crate::regvar::{self, Thresholds};
use crate::repfn;
use crate::report::{ExperimentReport, PerNStat};
use crate::rng;
use crate::seq::Sequence;

/// Largest order accepted by the expectation routines.
pub const MAX_EXPECTATION_ORDER: u32 = 5;
/// Partial sums of alpha below this are treated as a bounded (improper) assignment.
pub const PROPER_THRESHOLD: f64 = 10.0;

const SAMPLE_CHUNK: usize = 1 << 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AssignmentSource {
    Uniform {
        p: f64,
    },
    FromCountingFunction {
        sequence: String,
    },
    FromTarget {
        target: String,
        scale: f64,
        x_star: u64,
    },
    Composition {
        outer: String,
        inner: String,
    },
    Explicit,
}

/// Inclusion probabilities alpha_0..alpha_{n_max} of a random sequence space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityAssignment {
    pub alpha: Vec<f64>,
    pub proper_estimate: f64,
    pub source: AssignmentSource,
}

impl ProbabilityAssignment {
    pub fn explicit(alpha: Vec<f64>) -> Result<Self> {
        Self::build(alpha, AssignmentSource::Explicit)
    }

    fn build(alpha: Vec<f64>, source: AssignmentSource) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::InvalidParameter(
                "assignment needs at least one probability".into(),
            ));
        }
        if let Some(i) = alpha.iter().position(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::InvalidParameter(format!(
                "alpha_{i} = {} is not in [0, 1]",
                alpha[i]
            )));
        }
        let proper_estimate = alpha.iter().sum();
        Ok(ProbabilityAssignment {
            alpha,
            proper_estimate,
            source,
        })
    }

    pub fn uniform(p: f64, n_max: u64) -> Result<Self> {
        Self::build(vec![p; n_max as usize + 1], AssignmentSource::Uniform { p })
    }

    /// alpha_n = A(n)/(n+1).
    pub fn from_sequence(a: &Sequence, n_max: u64, label: &str) -> Result<Self> {
        let cnt = a.counting_table(n_max)?;
        let alpha = cnt
            .iter()
            .enumerate()
            .map(|(n, &c)| c as f64 / (n as f64 + 1.0))
            .collect();
        Self::build(
            alpha,
            AssignmentSource::FromCountingFunction {
                sequence: label.into(),
            },
        )
    }

    /// alpha_n = A(L(n) - 1)/L(n) for n in L, else 0.
    pub fn composition(
        outer: &Sequence,
        inner: &Sequence,
        n_max: u64,
        labels: (&str, &str),
    ) -> Result<Self> {
        let l = outer.counting_table(n_max)?;
        let need = l[n_max as usize].saturating_sub(1);
        let a = inner.counting_table(need)?;
        let alpha = (0..=n_max)
            .map(|n| {
                if outer.contains(n).unwrap_or(false) {
                    let ln = l[n as usize];
                    a[(ln - 1) as usize] as f64 / ln as f64
                } else {
                    0.0
                }
            })
            .collect();
        Self::build(
            alpha,
            AssignmentSource::Composition {
                outer: labels.0.into(),
                inner: labels.1.into(),
            },
        )
    }

    /// alpha_n = 1 for n < x_star, else min(1, f(n)/(scale n)).
    pub fn from_target(
        f: impl Fn(f64) -> f64,
        scale: f64,
        x_star: u64,
        n_max: u64,
        label: &str,
    ) -> Result<Self> {
        if scale.is_nan() || scale <= 0.0 {
            return Err(Error::InvalidParameter("scale must be positive".into()));
        }
        let alpha = (0..=n_max)
            .map(|n| {
                if n < x_star || n == 0 {
                    1.0
                } else {
                    (f(n as f64) / (scale * n as f64)).clamp(0.0, 1.0)
                }
            })
            .collect();
        Self::build(
            alpha,
            AssignmentSource::FromTarget {
                target: label.into(),
                scale,
                x_star,
            },
        )
    }

    pub fn n_max(&self) -> u64 {
        self.alpha.len() as u64 - 1
    }

    /// Assignment restricted to [0, n_max].
    pub fn truncate(&self, n_max: u64) -> Result<Self> {
        if n_max > self.n_max() {
            return Err(Error::BeyondHorizon {
                x: n_max,
                horizon: self.n_max(),
            });
        }
        Self::build(self.alpha[..=n_max as usize].to_vec(), self.source.clone())
    }

    /// Compact description without the probability array.
    pub fn descriptor(&self) -> serde_json::Value {
        json!({ "source": self.source, "n_max": self.n_max(), "proper_estimate": self.proper_estimate })
    }

    /// E(W(x)) = sum_{n <= x} alpha_n for every x.
    pub fn expected_counts(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.alpha
            .iter()
            .map(|a| {
                acc += a;
                acc
            })
            .collect()
    }
}

/// Realize omega: n is included iff the (seed, n) uniform falls below alpha_n.
pub fn sample(assignment: &ProbabilityAssignment, seed: u64) -> Sequence {
    let alpha = &assignment.alpha;
    let chunks = alpha.len().div_ceil(SAMPLE_CHUNK);
    let parts = par::map_range(chunks, |c| {
        let lo = c * SAMPLE_CHUNK;
        let hi = (lo + SAMPLE_CHUNK).min(alpha.len());
        (lo..hi)
            .filter(|&n| rng::member(seed, n as u64, alpha[n]))
            .map(|n| n as u64)
            .collect::<Vec<_>>()
    });
    Sequence::new(parts.concat(), assignment.n_max()).expect("sampled elements are increasing")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrongLawPoint {
    pub x: u64,
    pub expected: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub max_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrongLawReport {
    pub seeds: usize,
    pub points: Vec<StrongLawPoint>,
    pub tolerance: f64,
    pub passed: bool,
}

/// max over seeds of |W(x)/E(W(x)) - 1| at each checkpoint.
pub fn strong_law_check(
    assignment: &ProbabilityAssignment,
    seeds: &[u64],
    checkpoints: &[u64],
    tolerance: f64,
) -> Result<StrongLawReport> {
    let mut cps = checkpoints.to_vec();
    cps.sort_unstable();
    cps.dedup();
    let Some(&top) = cps.last() else {
        return Err(Error::InvalidParameter("no checkpoints".into()));
    };
    if top > assignment.n_max() {
        return Err(Error::BeyondHorizon {
            x: top,
            horizon: assignment.n_max(),
        });
    }
    let expected = assignment.expected_counts();
    if expected[top as usize] < PROPER_THRESHOLD {
        return Err(Error::ImproperAssignment {
            sum: expected[top as usize],
            needed: PROPER_THRESHOLD,
        });
    }
    if seeds.is_empty() {
        return Err(Error::InvalidParameter("no seeds".into()));
    }
    let alpha = &assignment.alpha;
    let counts: Vec<Vec<u64>> = par::map_slice(seeds, |&seed| {
        let mut out = Vec::with_capacity(cps.len());
        let mut w = 0u64;
        let mut next = 0;
        for n in 0..=top {
            if rng::member(seed, n, alpha[n as usize]) {
                w += 1;
            }
            while next < cps.len() && cps[next] == n {
                out.push(w);
                next += 1;
            }
        }
        out
    });
    let points: Vec<StrongLawPoint> = cps
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let e = expected[x as usize];
            let ratios: Vec<f64> = counts
                .iter()
                .map(|c| if e > 0.0 { c[i] as f64 / e } else { 1.0 })
                .collect();
            let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            let max_ratio = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            StrongLawPoint {
                x,
                expected: e,
                min_ratio,
                max_ratio,
                max_deviation: (max_ratio - 1.0).max(1.0 - min_ratio),
            }
        })
        .collect();
    let passed = points.last().unwrap().max_deviation < tolerance;
    Ok(StrongLawReport {
        seeds: seeds.len(),
        points,
        tolerance,
        passed,
    })
}

fn check_order(h: u32) -> Result<()> {
    if h == 0 || h > MAX_EXPECTATION_ORDER {
        return Err(Error::InvalidParameter(format!(
            "expectation order must be in 1..={MAX_EXPECTATION_ORDER}, got {h}"
        )));
    }
    Ok(())
}

fn check_range(assignment: &ProbabilityAssignment, n_max: u64) -> Result<()> {
    if n_max > assignment.n_max() {
        return Err(Error::BeyondHorizon {
            x: n_max,
            horizon: assignment.n_max(),
        });
    }
    Ok(())
}

/// j-th cumulant of a Bernoulli(a) variable, j <= 5.
fn bernoulli_cumulant(j: u32, a: f64) -> f64 {
    let v = a * (1.0 - a);
    match j {
        1 => a,
        2 => v,
        3 => v * (1.0 - 2.0 * a),
        4 => v * (1.0 - 6.0 * v),
        5 => v * (1.0 - 2.0 * a) * (1.0 - 12.0 * v),
        _ => unreachable!("order guarded"),
    }
}

/// Series sum_k w(alpha_k) z^{j k} truncated at n_max.
fn dilated(alpha: &[f64], j: u64, n_max: u64, w: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut out = vec![0.0; n_max as usize + 1];
    let mut k = 0u64;
    while j * k <= n_max {
        out[(j * k) as usize] = w(alpha[k as usize]);
        k += 1;
    }
    out
}

fn clamp_nonneg(v: &mut [f64]) {
    for x in v {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
}

/// E(r_{omega,t}(n)) for t = 0..=h and n = 0..=n_max.
///
/// The exponential generating function over orders factors as a product of
/// Bernoulli moment generating functions, so its logarithm is a sum of
/// Bernoulli cumulant series and the coefficients follow from the
/// exponential-formula recurrence g_t = sum_j C(t-1, j-1) K_j g_{t-j}.
pub fn expected_r_tables(
    assignment: &ProbabilityAssignment,
    h: u32,
    n_max: u64,
) -> Result<Vec<Vec<f64>>> {
    check_order(h)?;
    check_range(assignment, n_max)?;
    let len = n_max as usize + 1;
    let alpha = &assignment.alpha;
    let k: Vec<Vec<f64>> = (1..=h)
        .map(|j| dilated(alpha, j as u64, n_max, |a| bernoulli_cumulant(j, a)))
        .collect();
    let mut g: Vec<Vec<f64>> = vec![{
        let mut one = vec![0.0; len];
        one[0] = 1.0;
        one
    }];
    for t in 1..=h as usize {
        let mut acc = vec![0.0; len];
        for j in 1..=t {
            let c = repfn::binomial(t as u64 - 1, j as u64 - 1) as f64;
            let prod = real::convolve(&k[j - 1], &g[t - j], len);
            for (x, p) in acc.iter_mut().zip(prod) {
                *x += c * p;
            }
        }
        clamp_nonneg(&mut acc);
        g.push(acc);
    }
    Ok(g)
}

/// E(rho_{omega,t}(n)|_{>= lower_bound}) for t = 0..=h via Newton's identities on
/// power sums of the alpha-weighted series.
pub fn expected_rho_tables(
    assignment: &ProbabilityAssignment,
    h: u32,
    n_max: u64,
    lower_bound: u64,
) -> Result<Vec<Vec<f64>>> {
    check_order(h)?;
    check_range(assignment, n_max)?;
    let len = n_max as usize + 1;
    let mut alpha = assignment.alpha[..len].to_vec();
    for a in alpha.iter_mut().take((lower_bound as usize).min(len)) {
        *a = 0.0;
    }
    let p: Vec<Vec<f64>> = (1..=h)
        .map(|i| dilated(&alpha, i as u64, n_max, |a| a.powi(i as i32)))
        .collect();
    let mut e: Vec<Vec<f64>> = vec![{
        let mut one = vec![0.0; len];
        one[0] = 1.0;
        one
    }];
    for t in 1..=h as usize {
        let mut acc = vec![0.0; len];
        for i in 1..=t {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            let prod = real::convolve(&e[t - i], &p[i - 1], len);
            for (x, q) in acc.iter_mut().zip(prod) {
                *x += sign * q;
            }
        }
        for x in acc.iter_mut() {
            *x /= t as f64;
        }
        clamp_nonneg(&mut acc);
        e.push(acc);
    }
    Ok(e)
}

pub fn expected_r_exact(assignment: &ProbabilityAssignment, h: u32, n: u64) -> Result<f64> {
    Ok(expected_r_tables(assignment, h, n)?[h as usize][n as usize])
}

pub fn expected_rho_exact(
    assignment: &ProbabilityAssignment,
    h: u32,
    n: u64,
    lower_bound: u64,
) -> Result<f64> {
    Ok(expected_rho_tables(assignment, h, n, lower_bound)?[h as usize][n as usize])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub min: f64,
    pub max: f64,
    /// max/min, infinite when min is 0.
    pub ratio: f64,
}

impl Band {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<Band> {
        let mut it = values.into_iter().peekable();
        it.peek()?;
        let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in it {
            min = min.min(v);
            max = max.max(v);
        }
        let ratio = if min > 0.0 { max / min } else { f64::INFINITY };
        Some(Band { min, max, ratio })
    }

    pub fn within(&self, width: f64) -> bool {
        self.ratio.is_finite() && self.ratio <= width
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandPoint {
    pub n: u64,
    pub value: f64,
    pub target: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FundamentalLemmaReport {
    pub h: u32,
    pub points: Vec<BandPoint>,
    pub full_band: Band,
    pub top_half_band: Band,
    pub band_width: f64,
    pub theta: bool,
    pub warnings: Vec<String>,
}

fn regularity_warnings(a: &Sequence) -> Vec<String> {
    match regvar::classify(a, &Thresholds::default()) {
        Ok(r) if r.is_or_plus => Vec::new(),
        Ok(_) => vec!["sequence is not classified OR+; the bound may not apply".into()],
        Err(e) => vec![format!("could not classify sequence: {e}")],
    }
}

/// E(r_{omega,h}(n)) n / A(n)^h on the grid, for omega drawn from the space of `a`.
pub fn fundamental_lemma_check(
    a: &Sequence,
    h: u32,
    grid: &[u64],
    band_width: f64,
) -> Result<FundamentalLemmaReport> {
    let n_max = *grid
        .iter()
        .max()
        .ok_or_else(|| Error::InvalidParameter("empty grid".into()))?;
    let asg = ProbabilityAssignment::from_sequence(a, n_max, "A")?;
    let er = expected_r_tables(&asg, h, n_max)?;
    let cnt = a.counting_table(n_max)?;
    let mut points = Vec::new();
    for &n in grid {
        let target = (cnt[n as usize] as f64).powi(h as i32) / (n.max(1) as f64);
        let value = er[h as usize][n as usize];
        let ratio = if target > 0.0 {
            value / target
        } else {
            f64::INFINITY
        };
        points.push(BandPoint {
            n,
            value,
            target,
            ratio,
        });
    }
    let full_band = Band::of(points.iter().map(|p| p.ratio)).unwrap();
    let (lo, hi) = (grid.iter().min().unwrap(), n_max);
    let mid = ((*lo as f64) * (hi as f64)).sqrt();
    let top_half_band =
        Band::of(points.iter().filter(|p| p.n as f64 >= mid).map(|p| p.ratio)).unwrap_or(full_band);
    Ok(FundamentalLemmaReport {
        h,
        theta: top_half_band.within(band_width),
        points,
        full_band,
        top_half_band,
        band_width,
        warnings: regularity_warnings(a),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RbulkRow {
    pub n: u64,
    pub eps: f64,
    pub lower_bound: u64,
    pub expected_rho: f64,
    pub expected_rho_restricted: f64,
    pub deficiency: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RbulkReport {
    pub h: u32,
    pub rows: Vec<RbulkRow>,
    /// Deficiency is strictly increasing in eps at every n of the grid.
    pub monotone: bool,
    pub gamma: Option<f64>,
    pub predicted_exponent: Option<f64>,
    /// Least-squares slope of log deficiency against log eps at the largest n.
    pub empirical_exponent: Option<f64>,
    pub warnings: Vec<String>,
}

/// Deficiency 1 - E(rho|_{>= eps n})/E(rho) of the lower-restricted exact count.
pub fn rbulk_check(a: &Sequence, h: u32, eps_list: &[f64], grid: &[u64]) -> Result<RbulkReport> {
    let n_max = *grid
        .iter()
        .max()
        .ok_or_else(|| Error::InvalidParameter("empty grid".into()))?;
    let asg = ProbabilityAssignment::from_sequence(a, n_max, "A")?;
    rbulk_with(&asg, h, eps_list, grid, Some(a))
}

pub fn rbulk_with(
    asg: &ProbabilityAssignment,
    h: u32,
    eps_list: &[f64],
    grid: &[u64],
    a: Option<&Sequence>,
) -> Result<RbulkReport> {
    if h < 2 {
        return Err(Error::InvalidParameter(
            "restricted exact counts need h >= 2".into(),
        ));
    }
    let mut eps = eps_list.to_vec();
    if eps.iter().any(|e| !(0.0..=1.0).contains(e)) {
        return Err(Error::InvalidParameter("eps must lie in [0, 1]".into()));
    }
    eps.sort_by(f64::total_cmp);
    let mut rows = Vec::new();
    for &n in grid {
        let full = expected_rho_exact(asg, h, n, 0)?;
        for &e in &eps {
            let lb = (e * n as f64).ceil() as u64;
            let restricted = if lb == 0 {
                full
            } else {
                expected_rho_exact(asg, h, n, lb)?
            };
            let deficiency = if full > 0.0 {
                (1.0 - restricted / full).max(0.0)
            } else {
                0.0
            };
            rows.push(RbulkRow {
                n,
                eps: e,
                lower_bound: lb,
                expected_rho: full,
                expected_rho_restricted: restricted,
                deficiency,
            });
        }
    }
    let monotone = rows.chunks(eps.len()).all(|c| {
        c.windows(2)
            .all(|w| w[0].eps == w[1].eps || w[0].deficiency < w[1].deficiency)
    });
    let top = *grid.iter().max().unwrap();
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.n == top && r.eps > 0.0 && r.deficiency > 0.0)
        .map(|r| (r.eps.ln(), r.deficiency.ln()))
        .collect();
    let empirical_exponent = slope(&pts);
    let (gamma, warnings) = match a {
        Some(a) => {
            let g = regvar::classify(a, &Thresholds::default())
                .ok()
                .map(|r| r.m_lower);
            (g, regularity_warnings(a))
        }
        None => (None, Vec::new()),
    };
    let predicted_exponent = gamma.map(|g| g / 2f64.powi(h as i32 - 2));
    Ok(RbulkReport {
        h,
        rows,
        monotone,
        gamma,
        predicted_exponent,
        empirical_exponent,
        warnings,
    })
}

fn slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Serialize)]
struct MonteCarloConfig<'a> {
    h: u32,
    grid: &'a [u64],
    seeds: &'a [u64],
    assignment: serde_json::Value,
}

/// Sample omega per seed, compute r_{omega,h} exactly and compare with the expectation.
pub fn monte_carlo_rep(
    a: &Sequence,
    h: u32,
    grid: &[u64],
    seeds: &[u64],
) -> Result<ExperimentReport> {
    let n_max = *grid
        .iter()
        .max()
        .ok_or_else(|| Error::InvalidParameter("empty grid".into()))?;
    let asg = ProbabilityAssignment::from_sequence(a, n_max, "A")?;
    monte_carlo_with(&asg, h, grid, seeds, Some(a))
}

pub fn monte_carlo_with(
    asg: &ProbabilityAssignment,
    h: u32,
    grid: &[u64],
    seeds: &[u64],
    a: Option<&Sequence>,
) -> Result<ExperimentReport> {
    let n_max = *grid
        .iter()
        .max()
        .ok_or_else(|| Error::InvalidParameter("empty grid".into()))?;
    check_range(asg, n_max)?;
    if seeds.is_empty() {
        return Err(Error::InvalidParameter("no seeds".into()));
    }
    let expected = expected_r_tables(asg, h, n_max)?;
    let samples: Vec<Result<Vec<u64>>> = par::map_slice(seeds, |&seed| {
        let omega = sample(asg, seed).truncate(n_max)?;
        let t = repfn::rep_table(&omega, h, n_max)?;
        Ok(grid.iter().map(|&n| t.r[n as usize]).collect())
    });
    let samples: Vec<Vec<u64>> = samples.into_iter().collect::<Result<_>>()?;
    let cnt = match a {
        Some(a) => Some(a.counting_table(n_max)?),
        None => None,
    };
    let per_n: Vec<PerNStat> = grid
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let vals: Vec<f64> = samples.iter().map(|s| s[i] as f64).collect();
            let target = cnt
                .as_ref()
                .map(|c| (c[n as usize] as f64).powi(h as i32) / n.max(1) as f64);
            PerNStat::from_samples(n, h, &vals, Some(expected[h as usize][n as usize]), target)
        })
        .collect();
    let within = per_n
        .iter()
        .filter(|s| s.z_score.is_some_and(|z| z.abs() <= 4.0))
        .count();
    let config = MonteCarloConfig {
        h,
        grid,
        seeds,
        assignment: asg.descriptor(),
    };
    let mut report = ExperimentReport::new("monte-carlo-rep", &config)?;
    report.assignment = asg.descriptor();
    report.seeds = seeds.to_vec();
    report.grid = grid.to_vec();
    report.summary = json!({
        "fraction_within_4se": within as f64 / per_n.len() as f64,
        "min_over_seeds_positive": per_n.iter().all(|s| s.min > 0.0),
    });
    report.per_n = per_n;
    Ok(report)
}

/// sum_{l=1}^{h-2} sum_{k <= n} E(rho_l(k)) E(rho_{h-l}(n-k))^2.
pub fn delta_overlap_bound(assignment: &ProbabilityAssignment, h: u32, n: u64) -> Result<f64> {
    check_order(h)?;
    if h <= 2 {
        return Ok(0.0);
    }
    let e = expected_rho_tables(assignment, h - 1, n, 0)?;
    let mut total = 0.0;
    for l in 1..=(h - 2) as usize {
        for k in 0..=n as usize {
            let b = e[h as usize - l][n as usize - k];
            total += e[l][k] * b * b;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, GeneratorKind, GeneratorSpec};

    fn gen(kind: GeneratorKind, h: u64) -> Sequence {
        generate(&GeneratorSpec::new(kind, h)).unwrap()
    }

    #[test]
    fn degenerate_sampling() {
        let all = ProbabilityAssignment::uniform(1.0, 100).unwrap();
        assert_eq!(sample(&all, 7).len(), 101);
        let none = ProbabilityAssignment::uniform(0.0, 100).unwrap();
        assert!(sample(&none, 7).is_empty());
        let half = ProbabilityAssignment::uniform(0.5, 200_000).unwrap();
        assert_eq!(sample(&half, 3), sample(&half, 3));
        assert_ne!(sample(&half, 3), sample(&half, 4));
    }

    #[test]
    fn assignment_validation() {
        assert!(ProbabilityAssignment::explicit(vec![0.5, 1.5]).is_err());
        assert!(ProbabilityAssignment::explicit(vec![f64::NAN]).is_err());
        let sq = gen(GeneratorKind::Squares, 100);
        let a = ProbabilityAssignment::from_sequence(&sq, 10, "squares").unwrap();
        assert_eq!(a.alpha[4], 3.0 / 5.0);
        let nat = gen(GeneratorKind::Naturals, 100);
        let c =
            ProbabilityAssignment::composition(&sq, &nat, 100, ("squares", "naturals")).unwrap();
        assert_eq!(c.alpha[9], 1.0);
        assert_eq!(c.alpha[8], 0.0);
        let t = ProbabilityAssignment::from_target(|x| x, 2.0, 5, 20, "x").unwrap();
        assert_eq!(t.alpha[4], 1.0);
        assert_eq!(t.alpha[10], 0.5);
    }

    #[test]
    fn expectation_examples() {
        let half = ProbabilityAssignment::uniform(0.5, 4).unwrap();
        assert!((expected_r_exact(&half, 2, 4).unwrap() - 1.5).abs() < 1e-12);
        assert!((expected_rho_exact(&half, 2, 4, 0).unwrap() - 0.5).abs() < 1e-12);
        assert!((expected_r_exact(&half, 1, 3).unwrap() - 0.5).abs() < 1e-12);
        let one = ProbabilityAssignment::uniform(1.0, 6).unwrap();
        assert!((expected_r_exact(&one, 2, 6).unwrap() - 7.0).abs() < 1e-9);
        assert!((expected_rho_exact(&one, 2, 4, 0).unwrap() - 2.0).abs() < 1e-9);
        assert_eq!(expected_rho_exact(&one, 2, 4, 4).unwrap(), 0.0);
        assert!(expected_r_exact(&one, 6, 4).is_err());
    }

    #[test]
    fn brute_force_expectations() {
        let alpha: Vec<f64> = (0..=12).map(|i| ((i * 37) % 11) as f64 / 10.0).collect();
        let asg = ProbabilityAssignment::explicit(alpha.clone()).unwrap();
        let r3 = expected_r_tables(&asg, 3, 12).unwrap();
        let rho3 = expected_rho_tables(&asg, 3, 12, 0).unwrap();
        for n in 0..=12usize {
            let mut er = 0.0;
            let mut erho = 0.0;
            for a in 0..=n {
                for b in 0..=n - a {
                    let c = n - a - b;
                    let mut d = vec![a, b, c];
                    d.sort();
                    d.dedup();
                    er += d.iter().map(|&k| alpha[k]).product::<f64>();
                    if a < b && b < c {
                        erho += alpha[a] * alpha[b] * alpha[c];
                    }
                }
            }
            assert!((r3[3][n] - er).abs() < 1e-9, "n={n}");
            assert!((rho3[3][n] - erho).abs() < 1e-9, "n={n}");
        }
    }

    #[test]
    fn degenerate_matches_deterministic_counts() {
        let sq = gen(GeneratorKind::Squares, 400);
        let asg = ProbabilityAssignment::explicit(
            sq.indicator(400)
                .unwrap()
                .iter()
                .map(|&b| b as f64)
                .collect(),
        )
        .unwrap();
        for h in 1..=4 {
            let e = expected_r_tables(&asg, h, 400).unwrap();
            let t = repfn::rep_table(&sq, h, 400).unwrap();
            for (x, &r) in e[h as usize].iter().zip(&t.r) {
                assert!((x - r as f64).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn rbulk_naturals() {
        let one = ProbabilityAssignment::uniform(1.0, 100).unwrap();
        let r = rbulk_with(&one, 2, &[0.0, 0.25], &[100], None).unwrap();
        assert_eq!(r.rows[0].deficiency, 0.0);
        assert!((r.rows[1].deficiency - 0.5).abs() < 1e-12);
    }

    #[test]
    fn delta_bound_closed_form() {
        let n = 30u64;
        let one = ProbabilityAssignment::uniform(1.0, n).unwrap();
        assert_eq!(delta_overlap_bound(&one, 2, n).unwrap(), 0.0);
        let want: f64 = (0..=n).map(|k| ((n - k).div_ceil(2) as f64).powi(2)).sum();
        assert!((delta_overlap_bound(&one, 3, n).unwrap() - want).abs() < 1e-6);
    }

    #[test]
    fn strong_law_refuses_improper() {
        let a = ProbabilityAssignment::uniform(0.0, 1000).unwrap();
        assert!(matches!(
            strong_law_check(&a, &[1], &[1000], 0.1),
            Err(Error::ImproperAssignment { .. })
        ));
        let det = ProbabilityAssignment::uniform(1.0, 1000).unwrap();
        let r = strong_law_check(&det, &[1, 2], &[10, 1000], 1e-12).unwrap();
        assert!(r.passed);
        assert_eq!(r.points[1].max_deviation, 0.0);
    }

    #[test]
    fn monte_carlo_degenerate() {
        let nat = gen(GeneratorKind::Naturals, 300);
        let r = monte_carlo_rep(&nat, 2, &[10, 100, 300], &[1, 2, 3]).unwrap();
        for s in &r.per_n {
            assert_eq!(s.sd, 0.0);
            assert_eq!(s.z_score, Some(0.0));
            assert_eq!(s.mean, s.n as f64 + 1.0);
        }
    }
}
