//! Target functions, the hybrid density construction and the end-to-end
//! concentration experiment.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::grid::{log_spaced, GridSpec};
use crate::par;
use crate::prob::{self, Band, ProbabilityAssignment};
use crate::repfn;
use crate::report::{ExperimentReport, PerNStat};
use crate::rng;
use crate::seq::Sequence;

/// Largest admissible top/middle growth of a ratio that should stay bounded.
pub const TREND_LIMIT: f64 = 1.2;
/// Window over which the increment inequalities defining n1 must keep holding.
pub const N1_RUN: u64 = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TargetKind {
    /// (x log x)^{1/h}
    PowerLog,
    Power {
        beta: f64,
    },
    PowerOverLog {
        beta: f64,
        eps: f64,
    },
    Log,
    /// (x, f(x)) pairs, interpolated linearly in log-log scale and extended
    /// with the end slopes.
    Tabulated {
        points: Vec<[f64; 2]>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetFunction {
    #[serde(flatten)]
    pub kind: TargetKind,
    #[serde(default = "default_x0")]
    pub x0: f64,
    pub h: u32,
    /// Exponent of the log(x)^eps divisor in the upper envelope, used for h >= 3.
    #[serde(default)]
    pub envelope_eps: f64,
}

fn default_x0() -> f64 {
    1.0
}

impl TargetFunction {
    pub fn power_log(h: u32) -> Self {
        TargetFunction {
            kind: TargetKind::PowerLog,
            x0: 1.0,
            h,
            envelope_eps: 0.0,
        }
    }

    pub fn new(kind: TargetKind, h: u32) -> Self {
        TargetFunction {
            kind,
            x0: 1.0,
            h,
            envelope_eps: 0.0,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.kind {
            TargetKind::PowerLog => (x * x.ln()).powf(1.0 / self.h as f64),
            TargetKind::Power { beta } => x.powf(*beta),
            TargetKind::PowerOverLog { beta, eps } => x.powf(*beta) / x.ln().powf(*eps),
            TargetKind::Log => x.ln(),
            TargetKind::Tabulated { points } => interpolate(points, x),
        }
    }

    fn check(&self) -> Result<()> {
        if self.h < 2 {
            return Err(Error::InvalidParameter(
                "target order h must be at least 2".into(),
            ));
        }
        if let TargetKind::Tabulated { points } = &self.kind {
            if points.len() < 2 || points.iter().any(|p| !(p[0] > 0.0 && p[1] > 0.0)) {
                return Err(Error::InvalidParameter(
                    "tabulated target needs two or more positive points".into(),
                ));
            }
            if points.windows(2).any(|w| w[0][0] >= w[1][0]) {
                return Err(Error::InvalidParameter(
                    "tabulated target abscissae must increase".into(),
                ));
            }
        }
        Ok(())
    }

    /// x^{1/h} log(x)^{1/h}
    pub fn lower_envelope(&self, x: f64) -> f64 {
        envelope_low(self.h, x)
    }

    /// x^{1/(h-1)}, divided by log(x)^eps when h >= 3.
    pub fn upper_envelope(&self, x: f64) -> f64 {
        let base = envelope_high(self.h, x);
        if self.h >= 3 && self.envelope_eps != 0.0 {
            base / x.ln().powf(self.envelope_eps)
        } else {
            base
        }
    }

    fn first_index(&self) -> u64 {
        self.x0.max(0.0).floor() as u64 + 1
    }
}

fn interpolate(points: &[[f64; 2]], x: f64) -> f64 {
    let i = points
        .partition_point(|p| p[0] <= x)
        .clamp(1, points.len() - 1);
    let (a, b) = (points[i - 1], points[i]);
    let t = (x.ln() - a[0].ln()) / (b[0].ln() - a[0].ln());
    (a[1].ln() + t * (b[1].ln() - a[1].ln())).exp()
}

fn envelope_low(h: u32, x: f64) -> f64 {
    if x <= 1.0 {
        0.0
    } else {
        (x * x.ln()).powf(1.0 / h as f64)
    }
}

fn envelope_high(h: u32, x: f64) -> f64 {
    x.powf(1.0 / (h as f64 - 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetPoint {
    pub x: u64,
    pub integral: f64,
    pub value: f64,
    pub ratio: f64,
    pub lower_envelope_ratio: f64,
    pub upper_envelope_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetReport {
    pub points: Vec<TargetPoint>,
    /// Band of (sum_{x0 < n <= x} f(n)/n) / f(x).
    pub band: Band,
    /// Ratio at the top of the range over the ratio at its logarithmic midpoint.
    pub growth: f64,
    pub lower_envelope_trend: f64,
    pub upper_envelope_trend: f64,
    pub band_width: f64,
    pub condition_i: bool,
    pub condition_ii: bool,
    pub passed: bool,
}

/// Check the integral condition and the envelope window of `f` on [lo, hi].
pub fn validate_target(
    f: &TargetFunction,
    lo: u64,
    hi: u64,
    band_width: f64,
) -> Result<TargetReport> {
    f.check()?;
    let start = f.first_index();
    if lo < start || hi < 16 * lo {
        return Err(Error::InvalidParameter(format!(
            "validation range [{lo}, {hi}] must start above x0 and span 16x"
        )));
    }
    let grid = log_spaced(
        lo,
        hi,
        20 * ((hi as f64 / lo as f64).log10().ceil() as usize) + 1,
    );
    let mut points = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    let mut n = start;
    for &x in &grid {
        while n <= x {
            let v = f.eval(n as f64);
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::NonPositiveTarget(n));
            }
            acc += v / n as f64;
            n += 1;
        }
        let v = f.eval(x as f64);
        points.push(TargetPoint {
            x,
            integral: acc,
            value: v,
            ratio: acc / v,
            lower_envelope_ratio: v / f.lower_envelope(x as f64),
            upper_envelope_ratio: v / f.upper_envelope(x as f64),
        });
    }
    let band = Band::of(points.iter().map(|p| p.ratio)).unwrap();
    let mid_x = ((lo as f64) * (hi as f64)).sqrt();
    let mid = points.iter().find(|p| p.x as f64 >= mid_x).unwrap();
    let top = points.last().unwrap();
    let growth = top.ratio / mid.ratio;
    let lower_envelope_trend = top.lower_envelope_ratio / mid.lower_envelope_ratio;
    let upper_envelope_trend = top.upper_envelope_ratio / mid.upper_envelope_ratio;
    let condition_i = band.within(band_width) && growth <= TREND_LIMIT;
    let condition_ii =
        lower_envelope_trend >= 1.0 / TREND_LIMIT && upper_envelope_trend <= TREND_LIMIT;
    Ok(TargetReport {
        points,
        band,
        growth,
        lower_envelope_trend,
        upper_envelope_trend,
        band_width,
        condition_i,
        condition_ii,
        passed: condition_i && condition_ii,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedReport {
    /// Estimate of limsup f(x)/x: the maximum over the top decade.
    pub k_hat: f64,
    pub eps: f64,
    pub x_star: u64,
    pub size: usize,
    /// Band of C(x)/f(x) over the top decade.
    pub top_decade_band: Band,
}

/// Sample C from the space with alpha_n = 1 below x* and f(n)/((K+eps) n) above.
pub fn seed_sequence(
    f: &TargetFunction,
    seed: u64,
    horizon: u64,
    eps: f64,
) -> Result<(Sequence, SeedReport)> {
    f.check()?;
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    let start = f.first_index();
    if horizon < 10 * start.max(10) {
        return Err(Error::HorizonTooSmall {
            horizon,
            needed: 10 * start.max(10),
        });
    }
    let decade = log_spaced((horizon / 10).max(start), horizon, 200);
    let k_hat = decade
        .iter()
        .map(|&x| f.eval(x as f64) / x as f64)
        .fold(0.0, f64::max);
    let scale = k_hat + eps;
    let mut x_star = start;
    for n in (start..=horizon).rev() {
        let v = f.eval(n as f64);
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::NonPositiveTarget(n));
        }
        if v > scale * n as f64 {
            x_star = n + 1;
            break;
        }
    }
    let asg = ProbabilityAssignment::from_target(|x| f.eval(x), scale, x_star, horizon, "target")?;
    let c = prob::sample(&asg, seed);
    let cnt = c.counting_table(horizon)?;
    let top_decade_band = Band::of(
        decade
            .iter()
            .map(|&x| cnt[x as usize] as f64 / f.eval(x as f64)),
    )
    .unwrap();
    let report = SeedReport {
        k_hat,
        eps,
        x_star,
        size: c.len(),
        top_decade_band,
    };
    Ok((c, report))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionParams {
    pub m1: f64,
    pub m2: f64,
    /// Start of the scan; computed from the increment inequalities when absent.
    #[serde(default)]
    pub n1: Option<u64>,
    /// Refuse when M1 M2 <= q1/q2.
    #[serde(default = "default_true")]
    pub enforce_ratio: bool,
}

fn default_true() -> bool {
    true
}

impl ConstructionParams {
    pub fn new(m1: f64, m2: f64) -> Self {
        ConstructionParams {
            m1,
            m2,
            n1: None,
            enforce_ratio: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionReport {
    pub h: u32,
    pub horizon: u64,
    pub m1: f64,
    pub m2: f64,
    pub n1: u64,
    /// min of C(x)/(x log x)^{1/h} over the top decade.
    pub q1: f64,
    /// max of C(x)/x^{1/(h-1)} over the top decade.
    pub q2: f64,
    pub ratio_satisfied: bool,
    /// Least n from which M1 (n log n)^{1/h} <= A(m) <= m^{1/(h-1)}/M2 holds for all m in [n, horizon].
    pub sandwich_from: Option<u64>,
    /// Band of A(x)/C(x) over the top decade.
    pub relbc_band: Band,
    pub relbc_bounds: [f64; 2],
    pub relbc_holds: bool,
    pub added_outside_c: u64,
    pub dropped_from_c: u64,
    pub size: usize,
}

/// First n such that both increment inequalities hold on [n, n + 64).
pub fn stabilization_point(h: u32, m1: f64, m2: f64) -> u64 {
    let ok = |n: u64| {
        let (x, y) = (n as f64, n as f64 + 1.0);
        m1 * envelope_low(h, x) + 1.0 > m1 * envelope_low(h, y)
            && envelope_high(h, x) / m2 + 1.0 > envelope_high(h, y) / m2
    };
    let mut n = 2;
    let mut run = 0;
    loop {
        if ok(n + run) {
            run += 1;
            if run == N1_RUN {
                return n;
            }
        } else {
            n += run + 1;
            run = 0;
        }
    }
}

/// Relative slack allowed on the relbc bounds.
const RELBC_TOLERANCE: f64 = 0.1;

/// Greedy scan building A from C between the envelopes M1 (k log k)^{1/h} and k^{1/(h-1)}/M2.
pub fn hybrid_construct(
    c: &Sequence,
    h: u32,
    params: &ConstructionParams,
) -> Result<(Sequence, ConstructionReport)> {
    if h < 2 {
        return Err(Error::InvalidParameter("construction needs h >= 2".into()));
    }
    if !(params.m1 > 1.0 && params.m2 > 1.0) {
        return Err(Error::InvalidParameter("M1 and M2 must exceed 1".into()));
    }
    let horizon = c.horizon();
    if horizon < 100 {
        return Err(Error::HorizonTooSmall {
            horizon,
            needed: 100,
        });
    }
    let (m1, m2) = (params.m1, params.m2);
    let lo_env = |x: u64| m1 * envelope_low(h, x as f64);
    let hi_env = |x: u64| envelope_high(h, x as f64) / m2;
    if lo_env(horizon) > hi_env(horizon) {
        let first = (2..=horizon).find(|&n| lo_env(n) > hi_env(n));
        return Err(Error::Infeasible {
            reason: format!(
                "the window between {m1} (n log n)^(1/{h}) and n^(1/{})/{m2} is empty at the horizon {horizon}",
                h - 1
            ),
            first_violation: first,
        });
    }
    let c_cnt = c.counting_table(horizon)?;
    let decade_lo = (horizon / 10).max(2);
    let mut q1 = f64::INFINITY;
    let mut q2 = 0.0f64;
    for x in decade_lo..=horizon {
        let cx = c_cnt[x as usize] as f64;
        q1 = q1.min(cx / envelope_low(h, x as f64));
        q2 = q2.max(cx / envelope_high(h, x as f64));
    }
    let ratio_satisfied = q2 > 0.0 && m1 * m2 > q1 / q2;
    if params.enforce_ratio && !ratio_satisfied {
        return Err(Error::Infeasible {
            reason: format!("M1 M2 = {} does not exceed q1/q2 = {}", m1 * m2, q1 / q2),
            first_violation: None,
        });
    }
    let n1 = params
        .n1
        .unwrap_or_else(|| stabilization_point(h, m1, m2))
        .max(1);
    let mut elems: Vec<u64> = (1..=n1.min(horizon)).collect();
    let (mut added, mut dropped) = (0u64, 0u64);
    for k in n1 + 1..=horizon {
        let size = elems.len() as f64;
        if c.contains(k)? {
            if (size + 1.0) / envelope_high(h, k as f64) >= 1.0 / m2 {
                dropped += 1;
            } else {
                elems.push(k);
            }
        } else if size / envelope_low(h, k as f64) <= m1 {
            elems.push(k);
            added += 1;
        }
    }
    let a = Sequence::new(elems, horizon)?;
    let a_cnt = a.counting_table(horizon)?;
    let mut sandwich_from = None;
    for n in (2..=horizon).rev() {
        let v = a_cnt[n as usize] as f64;
        if lo_env(n) <= v && v <= hi_env(n) {
            sandwich_from = Some(n);
        } else {
            break;
        }
    }
    let relbc_band = Band::of(
        (decade_lo..=horizon)
            .filter(|&x| c_cnt[x as usize] > 0)
            .map(|x| a_cnt[x as usize] as f64 / c_cnt[x as usize] as f64),
    )
    .unwrap_or(Band {
        min: 0.0,
        max: f64::INFINITY,
        ratio: f64::INFINITY,
    });
    let relbc_bounds = [(1.0 / (q2 * m2)).min(1.0), (m1 / q1).max(1.0)];
    let relbc_holds = relbc_band.min >= relbc_bounds[0] / (1.0 + RELBC_TOLERANCE)
        && relbc_band.max <= relbc_bounds[1] * (1.0 + RELBC_TOLERANCE);
    let report = ConstructionReport {
        h,
        horizon,
        m1,
        m2,
        n1,
        q1,
        q2,
        ratio_satisfied,
        sandwich_from,
        relbc_band,
        relbc_bounds,
        relbc_holds,
        added_outside_c: added,
        dropped_from_c: dropped,
        size: a.len(),
    };
    Ok((a, report))
}

/// Seeds given as an explicit list or derived from a master seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedSpec {
    List(Vec<u64>),
    Derived { master: u64, count: usize },
}

impl SeedSpec {
    pub fn seeds(&self) -> Vec<u64> {
        match self {
            SeedSpec::List(v) => v.clone(),
            SeedSpec::Derived { master, count } => rng::derive_seeds(*master, *count),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub target: TargetFunction,
    #[serde(default)]
    pub ell_max: u32,
    pub m1: f64,
    pub m2: f64,
    #[serde(default)]
    pub n1: Option<u64>,
    #[serde(default = "default_true")]
    pub enforce_ratio: bool,
    /// eps in the scale (K + eps) of the seed assignment.
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// Seed used to sample C.
    #[serde(default)]
    pub construction_seed: u64,
    pub seeds: SeedSpec,
    pub grid: GridSpec,
    /// Defaults to the largest grid point.
    #[serde(default)]
    pub horizon: Option<u64>,
}

fn default_eps() -> f64 {
    1.0
}

/// Band [c1, c2] of r/log n: quantiles of the per-point minima and maxima over seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogBand {
    pub c1: f64,
    pub c2: f64,
    pub ratio: f64,
    /// Fraction of grid points whose values over all seeds lie in [c1, c2].
    pub fraction: f64,
    pub min: f64,
    pub max: f64,
    pub lower_quantile: f64,
    pub upper_quantile: f64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let i = (q * (sorted.len() - 1) as f64).round() as usize;
    sorted[i.min(sorted.len() - 1)]
}

/// Band of per-point minima/maxima with the given tail quantiles.
pub fn log_band(mins: &[f64], maxs: &[f64], tail: f64) -> LogBand {
    let mut lo = mins.to_vec();
    let mut hi = maxs.to_vec();
    lo.sort_by(f64::total_cmp);
    hi.sort_by(f64::total_cmp);
    let c1 = quantile(&lo, tail);
    let c2 = quantile(&hi, 1.0 - tail);
    let inside = mins
        .iter()
        .zip(maxs)
        .filter(|(a, b)| **a >= c1 && **b <= c2)
        .count();
    LogBand {
        c1,
        c2,
        ratio: if c1 > 0.0 { c2 / c1 } else { f64::INFINITY },
        fraction: inside as f64 / mins.len() as f64,
        min: lo[0],
        max: *hi.last().unwrap(),
        lower_quantile: tail,
        upper_quantile: 1.0 - tail,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed: u64,
    /// One past the last n <= horizon with r_{omega,h}(n) = 0.
    pub n0: u64,
    pub zeros_in_grid_range: u64,
    pub size: usize,
}

/// Full pipeline: seed C, build A, sample omega from the space of A and tabulate r_{omega,h+l}.
pub fn concentration_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let f = &cfg.target;
    f.check()?;
    let h = f.h;
    let grid = cfg.grid.points()?;
    let top = *grid.last().unwrap();
    let horizon = cfg.horizon.unwrap_or(top).max(top);
    let seeds = cfg.seeds.seeds();
    if seeds.is_empty() {
        return Err(Error::InvalidParameter("no seeds".into()));
    }
    let (c, seed_report) = seed_sequence(f, cfg.construction_seed, horizon, cfg.eps)?;
    let params = ConstructionParams {
        m1: cfg.m1,
        m2: cfg.m2,
        n1: cfg.n1,
        enforce_ratio: cfg.enforce_ratio,
    };
    let (a, construction) = hybrid_construct(&c, h, &params)?;
    let asg = ProbabilityAssignment::from_sequence(&a, horizon, "constructed")?;
    let max_order = h + cfg.ell_max;
    let expected = if max_order <= prob::MAX_EXPECTATION_ORDER {
        Some(prob::expected_r_tables(&asg, max_order, horizon)?)
    } else {
        None
    };
    let grid_lo = grid[0];
    let runs: Vec<Result<(SeedOutcome, Vec<Vec<u64>>)>> = par::map_slice(&seeds, |&seed| {
        let omega = prob::sample(&asg, seed);
        let tables =
            repfn::rep_tables_upto(&omega, max_order, horizon, crate::conv::Backend::Auto)?;
        let rh = &tables[h as usize];
        let n0 = rh.iter().rposition(|&r| r == 0).map_or(0, |i| i as u64 + 1);
        let zeros = rh[grid_lo as usize..].iter().filter(|&&r| r == 0).count() as u64;
        let values = (h..=max_order)
            .map(|t| {
                grid.iter()
                    .map(|&n| tables[t as usize][n as usize])
                    .collect()
            })
            .collect();
        Ok((
            SeedOutcome {
                seed,
                n0,
                zeros_in_grid_range: zeros,
                size: omega.len(),
            },
            values,
        ))
    });
    let runs: Vec<(SeedOutcome, Vec<Vec<u64>>)> = runs.into_iter().collect::<Result<_>>()?;
    let a_cnt = a.counting_table(horizon)?;
    let mut per_n = Vec::new();
    let mut orders = Vec::new();
    for (l, t) in (h..=max_order).enumerate() {
        let mut ratios = Vec::new();
        for (i, &n) in grid.iter().enumerate() {
            let vals: Vec<f64> = runs.iter().map(|r| r.1[l][i] as f64).collect();
            let target = (a_cnt[n as usize] as f64).powi(t as i32) / n.max(1) as f64;
            let e = expected.as_ref().map(|e| e[t as usize][n as usize]);
            let stat = PerNStat::from_samples(n, t, &vals, e, Some(target));
            ratios.extend(stat.ratio_min);
            ratios.extend(stat.ratio_max);
            per_n.push(stat);
        }
        let stats = &per_n[per_n.len() - grid.len()..];
        orders.push(json!({
            "order": t,
            "ratio_band": Band::of(ratios),
            "positive_fraction": stats.iter().map(|s| s.positive_fraction).sum::<f64>() / grid.len() as f64,
        }));
    }
    let mins: Vec<f64> = per_n[..grid.len()]
        .iter()
        .map(|s| s.min / (s.n as f64).ln())
        .collect();
    let maxs: Vec<f64> = per_n[..grid.len()]
        .iter()
        .map(|s| s.max / (s.n as f64).ln())
        .collect();
    let band = log_band(&mins, &maxs, 0.025);
    let outcomes: Vec<SeedOutcome> = runs.into_iter().map(|r| r.0).collect();
    let mut report = ExperimentReport::new("concentration-experiment", cfg)?;
    report.assignment = asg.descriptor();
    report.seeds = seeds;
    report.grid = grid;
    report.per_n = per_n;
    report.summary = json!({
        "horizon": horizon,
        "seed_sequence": seed_report,
        "construction": construction,
        "seeds": outcomes,
        "max_n0": outcomes.iter().map(|o| o.n0).max(),
        "log_band": band,
        "orders": orders,
    });
    Ok(report)
}
