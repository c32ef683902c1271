//! Evaluation grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Roughly `points` integers spaced evenly in log scale over [lo, hi], deduplicated.
pub fn log_spaced(lo: u64, hi: u64, points: usize) -> Vec<u64> {
    let lo = lo.max(1);
    if hi <= lo || points < 2 {
        return vec![lo.min(hi.max(lo))];
    }
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut v: Vec<u64> = (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp().round() as u64)
        .map(|x| x.clamp(lo, hi))
        .collect();
    v[0] = lo;
    *v.last_mut().unwrap() = hi;
    v.dedup();
    v
}

/// Declarative grid description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GridSpec {
    LogSpaced { lo: u64, hi: u64, points: usize },
    Linear { lo: u64, hi: u64, step: u64 },
    List { values: Vec<u64> },
}

impl GridSpec {
    pub fn points(&self) -> Result<Vec<u64>> {
        let v = match self {
            GridSpec::LogSpaced { lo, hi, points } => log_spaced(*lo, *hi, *points),
            GridSpec::Linear { lo, hi, step } => {
                if *step == 0 {
                    return Err(Error::InvalidParameter("grid step must be positive".into()));
                }
                (*lo..=*hi).step_by(*step as usize).collect()
            }
            GridSpec::List { values } => {
                let mut v = values.clone();
                v.sort_unstable();
                v.dedup();
                v
            }
        };
        if v.is_empty() {
            return Err(Error::InvalidParameter("empty grid".into()));
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_grid_endpoints() {
        let g = log_spaced(1000, 100_000, 21);
        assert_eq!(g[0], 1000);
        assert_eq!(*g.last().unwrap(), 100_000);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(g[10], 10_000);
    }

    #[test]
    fn specs() {
        assert_eq!(
            GridSpec::Linear {
                lo: 1,
                hi: 9,
                step: 4
            }
            .points()
            .unwrap(),
            vec![1, 5, 9]
        );
        assert!(GridSpec::List { values: vec![] }.points().is_err());
    }
}
