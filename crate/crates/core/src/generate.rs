//! Built-in sequence generators.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seq::Sequence;

fn default_c_base() -> u64 {
    2
}
fn default_c_kmin() -> u32 {
    2
}
fn default_d_base() -> u64 {
    3
}
fn default_den() -> u64 {
    1
}

/// Which sequence to build.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GeneratorKind {
    Naturals,
    Squares,
    Cubes,
    KthPowers {
        k: u32,
    },
    Primes,
    /// Primes together with 0 and 1.
    PrimesWithUnits,
    /// Values of `(c0 + c1 n + ... ) / denominator` for n >= 0 that are non-negative.
    Polynomial {
        coefficients: Vec<i64>,
        #[serde(default = "default_den")]
        denominator: u64,
    },
    ExplicitFile {
        path: PathBuf,
    },
    /// Scaled version of the 2-basis that is not PI, with g(k) = base^(2^k).
    CounterexampleC {
        #[serde(default = "default_c_base")]
        base: u64,
        #[serde(default = "default_c_kmin")]
        k_min: u32,
    },
    /// Cubes plus blocks [g(k)^3, g(k)^3 + g(k)^2], g(k) = base^(2^k): a basis that is not OR.
    CounterexampleD {
        #[serde(default = "default_d_base")]
        base: u64,
        #[serde(default)]
        k_min: u32,
    },
    /// The subsequence {l_{a_0}, l_{a_1}, ...} of `outer` indexed by `inner`.
    Composition {
        outer: Box<GeneratorKind>,
        inner: Box<GeneratorKind>,
    },
}

/// A generator together with the truncation horizon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub kind: GeneratorKind,
    /// Required except for file input, where it defaults to the declared horizon.
    #[serde(default)]
    pub horizon: Option<u64>,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, horizon: u64) -> Self {
        GeneratorSpec {
            kind,
            horizon: Some(horizon),
        }
    }
}

/// Truncate the specified sequence to `[0, horizon]`.
pub fn generate(spec: &GeneratorSpec) -> Result<Sequence> {
    if let GeneratorKind::ExplicitFile { path } = &spec.kind {
        let seq = Sequence::read_file(path)?;
        return match spec.horizon {
            None => Ok(seq),
            Some(h) if h <= seq.horizon() => seq.truncate(h),
            Some(h) => Err(Error::InvalidParameter(format!(
                "requested horizon {h} exceeds the file's known horizon {}",
                seq.horizon()
            ))),
        };
    }
    let horizon = spec
        .horizon
        .ok_or_else(|| Error::InvalidParameter("horizon is required".into()))?;
    if horizon < 1 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    build(&spec.kind, horizon)
}

fn build(kind: &GeneratorKind, horizon: u64) -> Result<Sequence> {
    let elements = match kind {
        GeneratorKind::Naturals => (0..=horizon).collect(),
        GeneratorKind::Squares => powers(2, horizon),
        GeneratorKind::Cubes => powers(3, horizon),
        GeneratorKind::KthPowers { k } => {
            if *k == 0 {
                return Err(Error::InvalidParameter("power k must be at least 1".into()));
            }
            powers(*k, horizon)
        }
        GeneratorKind::Primes => primes_upto(horizon),
        GeneratorKind::PrimesWithUnits => {
            let mut v = vec![0, 1];
            v.extend(primes_upto(horizon));
            v
        }
        GeneratorKind::Polynomial {
            coefficients,
            denominator,
        } => polynomial_values(coefficients, *denominator, horizon)?,
        GeneratorKind::ExplicitFile { path } => {
            let seq = Sequence::read_file(path)?;
            if seq.horizon() < horizon {
                return Err(Error::InvalidParameter(format!(
                    "file horizon {} is below the requested {horizon}",
                    seq.horizon()
                )));
            }
            seq.elements_upto(horizon).to_vec()
        }
        GeneratorKind::CounterexampleC { base, k_min } => counterexample_c(*base, *k_min, horizon)?,
        GeneratorKind::CounterexampleD { base, k_min } => counterexample_d(*base, *k_min, horizon)?,
        GeneratorKind::Composition { outer, inner } => {
            let l = build(outer, horizon)?;
            if l.is_empty() {
                Vec::new()
            } else {
                let idx = build(inner, l.len() as u64 - 1)?;
                idx.elements()
                    .iter()
                    .map(|&i| l.elements()[i as usize])
                    .collect()
            }
        }
    };
    Sequence::new(elements, horizon)
}

fn powers(k: u32, horizon: u64) -> Vec<u64> {
    let mut v = Vec::new();
    for b in 0u64.. {
        match b.checked_pow(k) {
            Some(x) if x <= horizon => {
                if v.last() != Some(&x) {
                    v.push(x);
                }
            }
            _ => break,
        }
        if k == 0 {
            break;
        }
    }
    v
}

/// Sieve of Eratosthenes.
pub fn primes_upto(n: u64) -> Vec<u64> {
    let n = n as usize;
    if n < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; n + 1];
    let mut i = 2;
    while i * i <= n {
        if !composite[i] {
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
        i += 1;
    }
    (2..=n)
        .filter(|&k| !composite[k])
        .map(|k| k as u64)
        .collect()
}

fn eval_numerator(c: &[i64], n: u64) -> Option<i128> {
    let x = n as i128;
    let mut acc: i128 = 0;
    for &ci in c.iter().rev() {
        acc = acc.checked_mul(x)?.checked_add(ci as i128)?;
    }
    Some(acc)
}

fn polynomial_values(c: &[i64], den: u64, horizon: u64) -> Result<Vec<u64>> {
    let mut c = c.to_vec();
    while c.len() > 1 && *c.last().unwrap() == 0 {
        c.pop();
    }
    let deg = c.len().saturating_sub(1);
    if deg < 1 || *c.last().unwrap() <= 0 || den == 0 {
        return Err(Error::NonPositiveLeading);
    }
    let den = den as i128;
    // Integer values at 0..=deg imply integer values on all of Z.
    for m in 0..=deg as u64 {
        let v = eval_numerator(&c, m).ok_or_else(|| Error::Overflow("polynomial value".into()))?;
        if v % den != 0 {
            return Err(Error::NotIntegerValued { at: m });
        }
    }
    // Beyond the Cauchy bound of the derivative the polynomial is increasing.
    let lead = *c.last().unwrap() as f64 * deg as f64;
    let bound = (1..deg)
        .map(|i| (c[i] as f64 * i as f64).abs() / lead)
        .fold(0.0, f64::max)
        .ceil() as u64
        + 1;
    let mut out = Vec::new();
    let mut n = 0u64;
    while let Some(v) = eval_numerator(&c, n).map(|v| v / den) {
        if v > horizon as i128 && n > bound {
            break;
        }
        if v >= 0 && v <= horizon as i128 {
            out.push(v as u64);
        }
        n += 1;
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn tower(base: u64, k: u32) -> Option<u64> {
    let e = 1u32.checked_shl(k)?;
    base.checked_pow(e)
}

fn push_range(v: &mut Vec<u64>, lo: u64, hi: u64, horizon: u64) {
    let hi = hi.min(horizon);
    let mut x = lo.max(v.last().map_or(0, |&l| l + 1));
    while x <= hi {
        v.push(x);
        x += 1;
    }
}

fn counterexample_c(base: u64, k_min: u32, horizon: u64) -> Result<Vec<u64>> {
    if base < 2 || k_min < 2 {
        return Err(Error::InvalidParameter(
            "counterexample C needs base >= 2 and k_min >= 2".into(),
        ));
    }
    let g0 = tower(base, k_min).ok_or_else(|| Error::Overflow("tower g(k_min)".into()))?;
    let mut v = Vec::new();
    push_range(&mut v, 0, g0, horizon);
    let mut k = k_min;
    let mut g = g0;
    while g <= horizon {
        let step = (k - 1) as u64;
        for t in 0..=g {
            let x = match t.checked_mul(step).and_then(|s| s.checked_add(g)) {
                Some(x) if x <= horizon => x,
                _ => break,
            };
            if v.last().is_none_or(|&l| x > l) {
                v.push(x);
            }
        }
        let next = tower(base, k + 1).unwrap_or(u64::MAX);
        match (k as u64).checked_mul(g) {
            Some(start) if start <= horizon => push_range(&mut v, start, next, horizon),
            _ => {}
        }
        g = next;
        k += 1;
    }
    Ok(v)
}

fn counterexample_d(base: u64, k_min: u32, horizon: u64) -> Result<Vec<u64>> {
    if base < 2 {
        return Err(Error::InvalidParameter(
            "counterexample D needs base >= 2".into(),
        ));
    }
    let mut v = powers(3, horizon);
    let mut k = k_min;
    while let Some(g) = tower(base, k) {
        let start = match g.checked_pow(3) {
            Some(s) if s <= horizon => s,
            _ => break,
        };
        let len = g * g;
        for t in 0..=len {
            if start + t > horizon {
                break;
            }
            v.push(start + t);
        }
        k += 1;
    }
    v.sort_unstable();
    v.dedup();
    Ok(v)
}

/// Parse the compact command-line syntax, e.g. `squares`, `power:4`,
/// `poly:0,1,1/2`, `file:seq.txt`, `counter-c:2:2`, `compose(squares,primes)`.
pub fn parse_kind(s: &str) -> Result<GeneratorKind> {
    let s = s.trim();
    let bad = |m: &str| Error::InvalidParameter(format!("generator {s:?}: {m}"));
    if let Some(body) = s.strip_prefix("compose(").and_then(|b| b.strip_suffix(')')) {
        let mut depth = 0;
        let mut split = None;
        for (i, ch) in body.char_indices() {
            match ch {
                '(' => depth += 1,
                ')' => depth -= 1,
                ',' if depth == 0 => {
                    split = Some(i);
                    break;
                }
                _ => {}
            }
        }
        let i = split.ok_or_else(|| bad("expected compose(OUTER,INNER)"))?;
        return Ok(GeneratorKind::Composition {
            outer: Box::new(parse_kind(&body[..i])?),
            inner: Box::new(parse_kind(&body[i + 1..])?),
        });
    }
    let (head, arg) = match s.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (s, None),
    };
    let num = |x: &str| {
        x.trim()
            .parse::<u64>()
            .map_err(|_| bad("expected a natural number"))
    };
    Ok(match (head, arg) {
        ("naturals", None) => GeneratorKind::Naturals,
        ("squares", None) => GeneratorKind::Squares,
        ("cubes", None) => GeneratorKind::Cubes,
        ("primes", None) => GeneratorKind::Primes,
        ("primes01", None) => GeneratorKind::PrimesWithUnits,
        ("power", Some(k)) => GeneratorKind::KthPowers { k: num(k)? as u32 },
        ("file", Some(p)) => GeneratorKind::ExplicitFile {
            path: PathBuf::from(p),
        },
        ("poly", Some(a)) => {
            let (coef, den) = match a.split_once('/') {
                Some((c, d)) => (c, num(d)?),
                None => (a, 1),
            };
            let coefficients = coef
                .split(',')
                .map(|x| x.trim().parse::<i64>().map_err(|_| bad("bad coefficient")))
                .collect::<Result<Vec<_>>>()?;
            GeneratorKind::Polynomial {
                coefficients,
                denominator: den,
            }
        }
        ("counter-c", a) => {
            let parts: Vec<&str> = a.map(|a| a.split(':').collect()).unwrap_or_default();
            GeneratorKind::CounterexampleC {
                base: parts.first().map(|x| num(x)).transpose()?.unwrap_or(2),
                k_min: parts.get(1).map(|x| num(x)).transpose()?.unwrap_or(2) as u32,
            }
        }
        ("counter-d", a) => {
            let parts: Vec<&str> = a.map(|a| a.split(':').collect()).unwrap_or_default();
            GeneratorKind::CounterexampleD {
                base: parts.first().map(|x| num(x)).transpose()?.unwrap_or(3),
                k_min: parts.get(1).map(|x| num(x)).transpose()?.unwrap_or(0) as u32,
            }
        }
        _ => return Err(bad("unknown generator")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gen(kind: GeneratorKind, h: u64) -> Sequence {
        generate(&GeneratorSpec::new(kind, h)).unwrap()
    }

    #[test]
    fn basic_generators() {
        assert_eq!(gen(GeneratorKind::Squares, 10).elements(), &[0, 1, 4, 9]);
        assert_eq!(gen(GeneratorKind::Naturals, 3).elements(), &[0, 1, 2, 3]);
        assert_eq!(gen(GeneratorKind::Cubes, 30).elements(), &[0, 1, 8, 27]);
        assert_eq!(
            gen(GeneratorKind::KthPowers { k: 1 }, 3).elements(),
            &[0, 1, 2, 3]
        );
        assert_eq!(
            gen(GeneratorKind::Primes, 20).elements(),
            &[2, 3, 5, 7, 11, 13, 17, 19]
        );
        assert_eq!(
            gen(GeneratorKind::PrimesWithUnits, 5).elements(),
            &[0, 1, 2, 3, 5]
        );
    }

    #[test]
    fn composition_with_identity() {
        let k = GeneratorKind::Composition {
            outer: Box::new(GeneratorKind::Squares),
            inner: Box::new(GeneratorKind::Naturals),
        };
        assert_eq!(gen(k, 10).elements(), &[0, 1, 4, 9]);
        let k = GeneratorKind::Composition {
            outer: Box::new(GeneratorKind::Squares),
            inner: Box::new(GeneratorKind::Primes),
        };
        assert_eq!(gen(k, 100).elements(), &[4, 9, 25, 49]);
    }

    #[test]
    fn polynomials() {
        let tri = GeneratorKind::Polynomial {
            coefficients: vec![0, 1, 1],
            denominator: 2,
        };
        assert_eq!(gen(tri, 20).elements(), &[0, 1, 3, 6, 10, 15]);
        let bad = GeneratorKind::Polynomial {
            coefficients: vec![0, 1, 1],
            denominator: 3,
        };
        assert!(matches!(
            generate(&GeneratorSpec::new(bad, 20)),
            Err(Error::NotIntegerValued { .. })
        ));
        let neg = GeneratorKind::Polynomial {
            coefficients: vec![0, 1, -1],
            denominator: 1,
        };
        assert!(matches!(
            generate(&GeneratorSpec::new(neg, 20)),
            Err(Error::NonPositiveLeading)
        ));
        // n^2 - 4n + 5 takes the values 5, 2, 1, 2, 5, 10, ...
        let dip = GeneratorKind::Polynomial {
            coefficients: vec![5, -4, 1],
            denominator: 1,
        };
        assert_eq!(gen(dip, 12).elements(), &[1, 2, 5, 10]);
    }

    #[test]
    fn counterexample_c_shape() {
        let c = gen(GeneratorKind::CounterexampleC { base: 2, k_min: 2 }, 1000);
        assert!(c.contains(0).unwrap() && c.contains(1).unwrap());
        // [0,256] is full, then even numbers up to 768, then everything.
        assert!((0..=256).all(|x| c.contains(x).unwrap()));
        assert!(!c.contains(257).unwrap());
        assert!(c.contains(258).unwrap());
        assert!((768..=1000).all(|x| c.contains(x).unwrap()));
    }

    #[test]
    fn counterexample_d_shape() {
        let d = gen(GeneratorKind::CounterexampleD { base: 3, k_min: 0 }, 1000);
        // blocks [27, 36] and [729, 810]
        assert!((27..=36).all(|x| d.contains(x).unwrap()));
        assert!(!d.contains(37).unwrap());
        assert!((729..=810).all(|x| d.contains(x).unwrap()));
        assert!(d.contains(1000).unwrap());
    }

    #[test]
    fn parse_syntax() {
        assert_eq!(parse_kind("squares").unwrap(), GeneratorKind::Squares);
        assert_eq!(
            parse_kind("power:4").unwrap(),
            GeneratorKind::KthPowers { k: 4 }
        );
        assert_eq!(
            parse_kind("poly:0,1,1/2").unwrap(),
            GeneratorKind::Polynomial {
                coefficients: vec![0, 1, 1],
                denominator: 2
            }
        );
        assert_eq!(
            parse_kind("compose(squares,compose(naturals,primes))").unwrap(),
            GeneratorKind::Composition {
                outer: Box::new(GeneratorKind::Squares),
                inner: Box::new(GeneratorKind::Composition {
                    outer: Box::new(GeneratorKind::Naturals),
                    inner: Box::new(GeneratorKind::Primes),
                }),
            }
        );
        assert_eq!(
            parse_kind("counter-c").unwrap(),
            GeneratorKind::CounterexampleC { base: 2, k_min: 2 }
        );
        assert!(parse_kind("bogus").is_err());
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = GeneratorSpec::new(GeneratorKind::CounterexampleD { base: 3, k_min: 0 }, 100);
        let s = serde_json::to_string(&spec).unwrap();
        let back: GeneratorSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(spec, back);
        let parsed: GeneratorSpec =
            serde_json::from_str(r#"{"kind":"squares","horizon":9}"#).unwrap();
        assert_eq!(parsed.kind, GeneratorKind::Squares);
    }
}
