//! Finite-sample O-regular variation diagnostics and Matuszewska index estimates.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::repfn;
use crate::seq::Sequence;

/// A non-negative index or ratio that may be infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum IndexValue {
    Finite(f64),
    Unbounded,
}

impl IndexValue {
    /// Reciprocal with 1/0 = unbounded and 1/unbounded = 0.
    pub fn recip(self) -> IndexValue {
        match self {
            IndexValue::Finite(0.0) => IndexValue::Unbounded,
            IndexValue::Finite(x) => IndexValue::Finite(1.0 / x),
            IndexValue::Unbounded => IndexValue::Finite(0.0),
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            IndexValue::Finite(x) => Some(x),
            IndexValue::Unbounded => None,
        }
    }

    /// Distance between two values; two unbounded values are at distance 0.
    pub fn distance(self, other: IndexValue) -> IndexValue {
        match (self, other) {
            (IndexValue::Finite(a), IndexValue::Finite(b)) => IndexValue::Finite((a - b).abs()),
            (IndexValue::Unbounded, IndexValue::Unbounded) => IndexValue::Finite(0.0),
            _ => IndexValue::Unbounded,
        }
    }

    pub fn le(self, bound: f64) -> bool {
        matches!(self, IndexValue::Finite(x) if x <= bound)
    }

    fn from_ratio(num: f64, den: f64) -> IndexValue {
        if den > 0.0 {
            IndexValue::Finite(num / den)
        } else {
            IndexValue::Unbounded
        }
    }
}

impl Serialize for IndexValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            IndexValue::Finite(x) if x.is_finite() => s.serialize_f64(*x),
            _ => s.serialize_str("unbounded"),
        }
    }
}

impl<'de> Deserialize<'de> for IndexValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Tag(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(IndexValue::Finite(x)),
            Raw::Tag(t) if t == "unbounded" => Ok(IndexValue::Unbounded),
            Raw::Tag(t) => Err(serde::de::Error::custom(format!("unexpected tag {t:?}"))),
        }
    }
}

/// Window and scale factors of the index estimator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorConfig {
    pub lambdas: Vec<u64>,
    /// x ranges over [max(x_min, x_max / span), x_max / lambda].
    pub span: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            lambdas: vec![2, 4, 8],
            span: 8.0,
        }
    }
}

/// Lower and upper index estimates over a range.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexEstimate {
    pub m_lower: f64,
    pub m_upper: f64,
    pub x_min: f64,
    pub x_max: f64,
}

fn window(x_min: f64, x_max: f64, span: f64, lambda: f64) -> (f64, f64) {
    (x_min.max(x_max / span), x_max / lambda)
}

/// Index estimates of a function sampled at every integer 0..=x_max.
pub fn matuszewska_sampled(
    values: &[f64],
    x_min: u64,
    x_max: u64,
    cfg: &EstimatorConfig,
) -> Result<IndexEstimate> {
    if x_max < 16 * x_min.max(1) {
        return Err(Error::EmptyWindow(format!(
            "need x_max >= 16 x_min, got [{x_min}, {x_max}]"
        )));
    }
    if values.len() <= x_max as usize {
        return Err(Error::EmptyWindow(format!(
            "only {} samples for x_max = {x_max}",
            values.len()
        )));
    }
    let mut lo_est = f64::INFINITY;
    let mut hi_est = f64::NEG_INFINITY;
    for &lam in &cfg.lambdas {
        if lam < 2 {
            return Err(Error::InvalidParameter(
                "scale factors must be at least 2".into(),
            ));
        }
        let (a, b) = window(x_min as f64, x_max as f64, cfg.span, lam as f64);
        let (a, b) = (a.ceil() as u64, b.floor() as u64);
        let ll = (lam as f64).ln();
        for x in a..=b {
            let (f0, f1) = (values[x as usize], values[(lam * x) as usize]);
            if !(f0 > 0.0 && f1 > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "non-positive sample near x = {x}"
                )));
            }
            let v = (f1 / f0).ln() / ll;
            lo_est = lo_est.min(v);
            hi_est = hi_est.max(v);
        }
    }
    if !lo_est.is_finite() {
        return Err(Error::EmptyWindow(format!(
            "no sample points in [{x_min}, {x_max}]"
        )));
    }
    Ok(IndexEstimate {
        m_lower: lo_est,
        m_upper: hi_est,
        x_min: x_min as f64,
        x_max: x_max as f64,
    })
}

/// Index estimates of a function evaluated on a logarithmic grid.
pub fn matuszewska_fn(
    f: impl Fn(f64) -> f64,
    x_min: f64,
    x_max: f64,
    cfg: &EstimatorConfig,
    points_per_octave: usize,
) -> Result<IndexEstimate> {
    if !(x_min > 0.0 && x_max >= 16.0 * x_min) {
        return Err(Error::EmptyWindow(format!(
            "need x_max >= 16 x_min, got [{x_min}, {x_max}]"
        )));
    }
    let mut lo_est = f64::INFINITY;
    let mut hi_est = f64::NEG_INFINITY;
    for &lam in &cfg.lambdas {
        let lam = lam as f64;
        let (a, b) = window(x_min, x_max, cfg.span, lam);
        if a > b {
            continue;
        }
        let steps = ((b / a).log2() * points_per_octave as f64).ceil().max(1.0) as usize;
        for j in 0..=steps {
            let x = a * (b / a).powf(j as f64 / steps as f64);
            let (f0, f1) = (f(x), f(lam * x));
            if !(f0 > 0.0 && f1 > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "non-positive value near x = {x}"
                )));
            }
            let v = (f1 / f0).ln() / lam.ln();
            lo_est = lo_est.min(v);
            hi_est = hi_est.max(v);
        }
    }
    if !lo_est.is_finite() {
        return Err(Error::EmptyWindow(format!(
            "no sample points in [{x_min}, {x_max}]"
        )));
    }
    Ok(IndexEstimate {
        m_lower: lo_est,
        m_upper: hi_est,
        x_min,
        x_max,
    })
}

/// Decision thresholds for [`classify`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    /// Largest admissible A(2x)/A(x).
    pub or_bound: f64,
    /// Scale factor of the positive-increase test.
    pub pi_lambda: u64,
    /// A(lambda x)/A(x) must stay at least 1 + pi_margin.
    pub pi_margin: f64,
    /// Largest admissible growth of the a_{2n}/a_n record between the lower
    /// and upper halves of the dyadic index windows.
    pub index_growth: f64,
    pub min_horizon: u64,
    pub estimator: EstimatorConfig,
    /// Largest admissible max/min of the integral ratio band.
    pub integral_band: f64,
    /// Tolerance of the duality and sumset comparisons.
    pub tolerance: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            or_bound: 8.0,
            pi_lambda: 8,
            pi_margin: 0.05,
            index_growth: 1.2,
            min_horizon: 1024,
            estimator: EstimatorConfig::default(),
            integral_band: 2.0,
            tolerance: 0.1,
        }
    }
}

/// One window statistic backing a verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub statistic: String,
    pub x_lo: u64,
    pub x_hi: u64,
    pub value: IndexValue,
    /// Point where the extreme value was attained.
    pub witness: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub m_lower: f64,
    pub m_upper: f64,
    #[serde(rename = "is_OR")]
    pub is_or: bool,
    #[serde(rename = "is_PI")]
    pub is_pi: bool,
    #[serde(rename = "is_OR_plus")]
    pub is_or_plus: bool,
    /// PI verdict of the A(lambda x)/A(x) test alone.
    pub pi_by_counting: bool,
    /// PI verdict of the a_{2n}/a_n test alone.
    pub pi_by_index_doubling: bool,
    pub evidence: Vec<Evidence>,
    pub estimation_range: [u64; 2],
}

fn counting_f64(a: &Sequence, n: u64) -> Result<Vec<f64>> {
    Ok(a.counting_table(n)?.into_iter().map(|c| c as f64).collect())
}

fn ratio_extreme(cnt: &[f64], lam: u64, lo: u64, hi: u64, want_max: bool) -> (IndexValue, u64) {
    let mut best: Option<(IndexValue, u64)> = None;
    for x in lo..=hi {
        let v = IndexValue::from_ratio(cnt[(lam * x) as usize], cnt[x as usize]);
        let better = match (&best, v) {
            (None, _) => true,
            (Some((IndexValue::Unbounded, _)), _) => !want_max,
            (Some((IndexValue::Finite(_), _)), IndexValue::Unbounded) => want_max,
            (Some((IndexValue::Finite(b), _)), IndexValue::Finite(c)) => {
                if want_max {
                    c > *b
                } else {
                    c < *b
                }
            }
        };
        if better {
            best = Some((v, x));
        }
    }
    best.unwrap_or((IndexValue::Unbounded, lo))
}

/// Per-window maxima of a_{2n}/a_n over dyadic index windows [2^j, 2^{j+1}).
pub fn index_doubling_windows(a: &Sequence) -> Vec<Evidence> {
    let e = a.elements();
    let top = e.len().saturating_sub(1) / 2;
    let mut out = Vec::new();
    let mut lo = 1usize;
    while lo <= top {
        let hi = (2 * lo - 1).min(top);
        let mut best = (0.0f64, lo);
        for n in lo..=hi {
            let r = e[2 * n] as f64 / e[n] as f64;
            if r > best.0 {
                best = (r, n);
            }
        }
        out.push(Evidence {
            statistic: "a_2n/a_n".into(),
            x_lo: lo as u64,
            x_hi: hi as u64,
            value: IndexValue::Finite(best.0),
            witness: best.1 as u64,
        });
        lo *= 2;
    }
    out
}

/// Growth of the a_{2n}/a_n record from the lower to the upper half of the windows.
pub fn index_doubling_growth(windows: &[Evidence]) -> IndexValue {
    if windows.len() < 2 {
        return IndexValue::Finite(1.0);
    }
    let half = windows.len() / 2;
    let mx = |w: &[Evidence]| {
        w.iter()
            .filter_map(|e| e.value.finite())
            .fold(0.0, f64::max)
    };
    IndexValue::from_ratio(mx(&windows[half..]), mx(&windows[..half]))
}

/// Decide OR, PI and OR+ on the truncation of `a` to its horizon.
pub fn classify(a: &Sequence, th: &Thresholds) -> Result<RegularityReport> {
    let h = a.horizon();
    if h < th.min_horizon {
        return Err(Error::HorizonTooSmall {
            horizon: h,
            needed: th.min_horizon,
        });
    }
    let cnt = counting_f64(a, h)?;
    let lo = (h as f64).sqrt().ceil() as u64;
    let mut evidence = Vec::new();

    let (or_stat, or_w) = ratio_extreme(&cnt, 2, lo, h / 2, true);
    evidence.push(Evidence {
        statistic: "A(2x)/A(x) sup".into(),
        x_lo: lo,
        x_hi: h / 2,
        value: or_stat,
        witness: or_w,
    });
    let is_or = or_stat.le(th.or_bound);

    let lam = th.pi_lambda.max(2);
    let (pi_stat, pi_w) = ratio_extreme(&cnt, lam, lo, h / lam, false);
    evidence.push(Evidence {
        statistic: format!("A({lam}x)/A(x) inf"),
        x_lo: lo,
        x_hi: h / lam,
        value: pi_stat,
        witness: pi_w,
    });
    let pi_by_counting = match pi_stat {
        IndexValue::Finite(v) => v >= 1.0 + th.pi_margin,
        IndexValue::Unbounded => true,
    };

    let windows = index_doubling_windows(a);
    let growth = index_doubling_growth(&windows);
    evidence.extend(windows);
    evidence.push(Evidence {
        statistic: "a_2n/a_n record growth".into(),
        x_lo: 1,
        x_hi: (a.len().saturating_sub(1) / 2) as u64,
        value: growth,
        witness: 0,
    });
    let pi_by_index_doubling = growth.le(th.index_growth);
    let is_pi = pi_by_counting && pi_by_index_doubling;

    let x_min = 1;
    let est = matuszewska_sampled(&cnt, x_min, h, &th.estimator)?;
    Ok(RegularityReport {
        m_lower: est.m_lower,
        m_upper: est.m_upper,
        is_or,
        is_pi,
        is_or_plus: is_or && is_pi,
        pi_by_counting,
        pi_by_index_doubling,
        evidence,
        estimation_range: [x_min.max((h as f64 / th.estimator.span) as u64), h],
    })
}

/// sup over the top half of the log range of s_{A,h}(2x)/s_{A,h}(x) and its OR verdict
/// against or_bound^h.
pub fn sumset_or_statistic(a: &Sequence, h: u32, th: &Thresholds) -> Result<(IndexValue, bool)> {
    let n = a.horizon();
    let t = repfn::rep_table(a, h, n)?;
    let s: Vec<f64> = t.s.iter().map(|&x| x as f64).collect();
    let lo = (n as f64).sqrt().ceil() as u64;
    let (v, _) = ratio_extreme(&s, 2, lo, n / 2, true);
    Ok((v, v.le(th.or_bound.powi(h as i32))))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub counting: IndexEstimate,
    pub elements: IndexEstimate,
    /// 1 / M_upp(a_n)
    pub recip_upper: IndexValue,
    /// 1 / M_low(a_n)
    pub recip_lower: IndexValue,
    pub lower_gap: IndexValue,
    pub upper_gap: IndexValue,
    pub tolerance: f64,
    pub passed: bool,
}

/// Compare the indices of A(x) with reciprocals of the indices of n -> a_n.
pub fn duality_check(a: &Sequence, th: &Thresholds) -> Result<DualityReport> {
    let h = a.horizon();
    let counting = matuszewska_sampled(&counting_f64(a, h)?, 1, h, &th.estimator)?;
    let e: Vec<f64> = a.elements().iter().map(|&x| x as f64).collect();
    if e.len() < 17 {
        return Err(Error::HorizonTooSmall {
            horizon: h,
            needed: h + 1,
        });
    }
    let elements = matuszewska_sampled(&e, 1, e.len() as u64 - 1, &th.estimator)?;
    let recip_upper = IndexValue::Finite(elements.m_upper).recip();
    let recip_lower = IndexValue::Finite(elements.m_lower).recip();
    let lower_gap = IndexValue::Finite(counting.m_lower).distance(recip_upper);
    let upper_gap = IndexValue::Finite(counting.m_upper).distance(recip_lower);
    let passed = lower_gap.le(th.tolerance) && upper_gap.le(th.tolerance);
    Ok(DualityReport {
        counting,
        elements,
        recip_upper,
        recip_lower,
        lower_gap,
        upper_gap,
        tolerance: th.tolerance,
        passed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumsetIndexReport {
    pub h: u32,
    pub counting: IndexEstimate,
    pub cumulative: IndexEstimate,
    pub lower_gap: f64,
    pub upper_gap: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Compare the indices of s_{A,h} with h times the indices of A.
pub fn sumset_index_check(a: &Sequence, h: u32, th: &Thresholds) -> Result<SumsetIndexReport> {
    let n = a.horizon();
    let counting = matuszewska_sampled(&counting_f64(a, n)?, 1, n, &th.estimator)?;
    let t = repfn::rep_table(a, h, n)?;
    let s: Vec<f64> = t.s.iter().map(|&x| x as f64).collect();
    let cumulative = matuszewska_sampled(&s, 1, n, &th.estimator)?;
    let lower_gap = (cumulative.m_lower - h as f64 * counting.m_lower).abs();
    let upper_gap = (cumulative.m_upper - h as f64 * counting.m_upper).abs();
    Ok(SumsetIndexReport {
        h,
        counting,
        cumulative,
        lower_gap,
        upper_gap,
        tolerance: th.tolerance,
        passed: lower_gap <= th.tolerance && upper_gap <= th.tolerance,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralPoint {
    pub x: u64,
    pub integral: f64,
    pub count: u64,
    pub ratio: IndexValue,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralReport {
    pub points: Vec<IntegralPoint>,
    /// Band of S(x)/A(x) over the top half of the log range.
    pub band_min: IndexValue,
    pub band_max: IndexValue,
    pub band_ratio: IndexValue,
    pub theta: bool,
}

/// S(x) = sum_{1 <= n <= x} A(n)/n against A(x) at log-spaced x.
pub fn orplus_integral_check(a: &Sequence, th: &Thresholds) -> Result<IntegralReport> {
    let h = a.horizon();
    if h < 1000 {
        return Err(Error::HorizonTooSmall {
            horizon: h,
            needed: 1000,
        });
    }
    let cnt = a.counting_table(h)?;
    let grid = crate::grid::log_spaced(1, h, 40 * ((h as f64).log10().ceil() as usize));
    let lo = (h as f64).sqrt();
    let mut points = Vec::new();
    let mut acc = 0.0;
    let mut n = 1u64;
    for &x in &grid {
        while n <= x {
            acc += cnt[n as usize] as f64 / n as f64;
            n += 1;
        }
        let c = cnt[x as usize];
        points.push(IntegralPoint {
            x,
            integral: acc,
            count: c,
            ratio: IndexValue::from_ratio(acc, c as f64),
        });
    }
    let top: Vec<&IntegralPoint> = points.iter().filter(|p| p.x as f64 >= lo).collect();
    let mut mn = IndexValue::Unbounded;
    let mut mx = IndexValue::Finite(0.0);
    for p in &top {
        match p.ratio {
            IndexValue::Unbounded => mx = IndexValue::Unbounded,
            IndexValue::Finite(v) => {
                if mn.finite().is_none_or(|m| v < m) {
                    mn = IndexValue::Finite(v);
                }
                if let IndexValue::Finite(m) = mx {
                    if v > m {
                        mx = IndexValue::Finite(v);
                    }
                }
            }
        }
    }
    let band_ratio = match (mx, mn) {
        (IndexValue::Finite(a), IndexValue::Finite(b)) => IndexValue::from_ratio(a, b),
        _ => IndexValue::Unbounded,
    };
    let theta = band_ratio.le(th.integral_band);
    Ok(IntegralReport {
        points,
        band_min: mn,
        band_max: mx,
        band_ratio,
        theta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, GeneratorKind, GeneratorSpec};

    fn gen(kind: GeneratorKind, h: u64) -> Sequence {
        generate(&GeneratorSpec::new(kind, h)).unwrap()
    }

    #[test]
    fn pure_powers() {
        let cfg = EstimatorConfig::default();
        for rho in [0.0, 0.25, 0.5, 1.0, 2.5] {
            let e = matuszewska_fn(|x| x.powf(rho), 64.0, (1u64 << 20) as f64, &cfg, 16).unwrap();
            assert!((e.m_lower - rho).abs() < 1e-9 && (e.m_upper - rho).abs() < 1e-9);
            let vals: Vec<f64> = (0..=1u64 << 16).map(|x| (x as f64).powf(rho)).collect();
            let e = matuszewska_sampled(&vals, 64, 1 << 16, &cfg).unwrap();
            assert!((e.m_lower - rho).abs() < 1e-9 && (e.m_upper - rho).abs() < 1e-9);
        }
    }

    #[test]
    fn estimator_errors() {
        let cfg = EstimatorConfig::default();
        assert!(matches!(
            matuszewska_fn(|x| x, 64.0, 512.0, &cfg, 4),
            Err(Error::EmptyWindow(_))
        ));
        let vals = vec![0.0; 2000];
        assert!(matuszewska_sampled(&vals, 1, 1999, &cfg).is_err());
    }

    #[test]
    fn reciprocal_conventions() {
        assert_eq!(IndexValue::Finite(0.0).recip(), IndexValue::Unbounded);
        assert_eq!(IndexValue::Unbounded.recip(), IndexValue::Finite(0.0));
        assert_eq!(IndexValue::Finite(4.0).recip(), IndexValue::Finite(0.25));
        assert_eq!(
            serde_json::to_string(&IndexValue::Unbounded).unwrap(),
            "\"unbounded\""
        );
        let v: IndexValue = serde_json::from_str("\"unbounded\"").unwrap();
        assert_eq!(v, IndexValue::Unbounded);
        let v: IndexValue = serde_json::from_str("0.5").unwrap();
        assert_eq!(v, IndexValue::Finite(0.5));
    }

    #[test]
    fn squares_and_naturals() {
        let th = Thresholds::default();
        let sq = gen(GeneratorKind::Squares, 1 << 16);
        let r = classify(&sq, &th).unwrap();
        assert!(r.is_or && r.is_pi && r.is_or_plus);
        assert!((r.m_lower - 0.5).abs() < 0.05 && (r.m_upper - 0.5).abs() < 0.05);
        let d = duality_check(&sq, &th).unwrap();
        assert!(d.passed, "{d:?}");
        let nat = gen(GeneratorKind::Naturals, 1 << 14);
        let d = duality_check(&nat, &th).unwrap();
        assert!(d.passed);
        let r = classify(&nat, &th).unwrap();
        assert!(r.is_or_plus);
        assert!(r.m_lower >= 0.0 && r.m_lower <= 1.0);
    }

    #[test]
    fn horizon_too_small() {
        let sq = gen(GeneratorKind::Squares, 100);
        assert!(matches!(
            classify(&sq, &Thresholds::default()),
            Err(Error::HorizonTooSmall { .. })
        ));
    }

    #[test]
    fn integral_ratio() {
        let th = Thresholds::default();
        let nat = gen(GeneratorKind::Naturals, 100_000);
        let r = orplus_integral_check(&nat, &th).unwrap();
        assert!(r.theta);
        let top = r.points.last().unwrap().ratio.finite().unwrap();
        assert!((top - 1.0).abs() < 1e-3);
    }
}
