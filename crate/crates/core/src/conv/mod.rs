//! Exact integer and floating-point convolution.

pub mod ntt;
pub mod real;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

/// Convolution algorithm selection.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    /// Pick by estimated cost.
    #[default]
    Auto,
    /// Direct summation over non-zero terms.
    Schoolbook,
    /// Multi-prime number-theoretic transform.
    Ntt,
}

const CHUNK: usize = 1 << 12;

fn nonzeros(a: &[u64]) -> (Vec<u32>, Vec<u64>) {
    let mut idx = Vec::new();
    let mut val = Vec::new();
    for (i, &x) in a.iter().enumerate() {
        if x != 0 {
            idx.push(i as u32);
            val.push(x);
        }
    }
    (idx, val)
}

fn bound(a: &[u64], b: &[u64]) -> u128 {
    let sum = |v: &[u64]| v.iter().fold(0u128, |s, &x| s.saturating_add(x as u128));
    let max = |v: &[u64]| v.iter().copied().max().unwrap_or(0) as u128;
    sum(a)
        .saturating_mul(max(b))
        .min(sum(b).saturating_mul(max(a)))
}

/// Primes (by index) needed so that their product exceeds `b` for a transform of `len` terms.
fn choose_primes(b: u128, len: usize) -> Option<Vec<usize>> {
    let log = len.next_power_of_two().trailing_zeros();
    let mut prod: u128 = 1;
    let mut chosen = Vec::new();
    for (i, &(p, _, maxlog)) in ntt::PRIMES.iter().enumerate() {
        if maxlog < log {
            continue;
        }
        chosen.push(i);
        prod = prod.saturating_mul(p as u128);
        if prod > b {
            return Some(chosen);
        }
    }
    None
}

fn schoolbook(a: &[u64], b: &[u64], out_len: usize) -> Result<Vec<u64>> {
    let (ia, va) = nonzeros(a);
    let (ib, vb) = nonzeros(b);
    let (ia, va, ib, vb) = if ia.len() <= ib.len() {
        (ia, va, ib, vb)
    } else {
        (ib, vb, ia, va)
    };
    let mut out = vec![0u64; out_len];
    let overflow = std::sync::atomic::AtomicBool::new(false);
    par::for_each_chunk_mut(&mut out, CHUNK, |ci, chunk| {
        let lo = ci * CHUNK;
        let hi = lo + chunk.len();
        let mut acc = vec![0u128; chunk.len()];
        for (&i, &x) in ia.iter().zip(&va) {
            let i = i as usize;
            if i >= hi {
                break;
            }
            let from = lo.saturating_sub(i);
            let to = hi - i;
            let s = ib.partition_point(|&j| (j as usize) < from);
            for (&j, &y) in ib[s..].iter().zip(&vb[s..]) {
                let j = j as usize;
                if j >= to {
                    break;
                }
                let slot = &mut acc[i + j - lo];
                *slot = slot.saturating_add(x as u128 * y as u128);
            }
        }
        for (d, &s) in chunk.iter_mut().zip(&acc) {
            match u64::try_from(s) {
                Ok(v) => *d = v,
                Err(_) => overflow.store(true, std::sync::atomic::Ordering::Relaxed),
            }
        }
    });
    if overflow.into_inner() {
        return Err(Error::Overflow("convolution term exceeds 64 bits".into()));
    }
    Ok(out)
}

fn via_ntt(a: &[u64], b: &[u64], out_len: usize, primes: &[usize]) -> Result<Vec<u64>> {
    let residues: Vec<Vec<u32>> = par::map_slice(primes, |&i| ntt::convolve_mod(a, b, out_len, i));
    let ps: Vec<u32> = primes.iter().map(|&i| ntt::PRIMES[i].0).collect();
    let mut out = vec![0u64; out_len];
    let overflow = std::sync::atomic::AtomicBool::new(false);
    par::for_each_chunk_mut(&mut out, CHUNK, |ci, chunk| {
        let mut r = vec![0u32; ps.len()];
        for (k, d) in chunk.iter_mut().enumerate() {
            let n = ci * CHUNK + k;
            for (slot, res) in r.iter_mut().zip(&residues) {
                *slot = res[n];
            }
            let v = if ps.len() == 1 {
                r[0] as u128
            } else {
                ntt::garner(&r, &ps)
            };
            match u64::try_from(v) {
                Ok(v) => *d = v,
                Err(_) => overflow.store(true, std::sync::atomic::Ordering::Relaxed),
            }
        }
    });
    if overflow.into_inner() {
        return Err(Error::Overflow("convolution term exceeds 64 bits".into()));
    }
    Ok(out)
}

/// Exact product series of `a` and `b`, truncated to `out_len` terms.
///
/// Terms that do not fit in 64 bits raise [`Error::Overflow`].
pub fn convolve(a: &[u64], b: &[u64], out_len: usize, backend: Backend) -> Result<Vec<u64>> {
    let a = &a[..a.len().min(out_len)];
    let b = &b[..b.len().min(out_len)];
    if a.is_empty() || b.is_empty() || out_len == 0 {
        return Ok(vec![0; out_len]);
    }
    let bnd = bound(a, b);
    let full = (a.len() + b.len() - 1).min(2 * out_len);
    let primes = choose_primes(bnd, a.len() + b.len() - 1);
    let use_ntt = match backend {
        Backend::Schoolbook => false,
        Backend::Ntt => primes.is_some(),
        Backend::Auto => match &primes {
            None => false,
            Some(ps) => {
                let nza = a.iter().filter(|&&x| x != 0).count() as f64;
                let nzb = b.iter().filter(|&&x| x != 0).count() as f64;
                let direct = nza * nzb * (out_len as f64 / full as f64).min(1.0);
                let l = full.next_power_of_two() as f64;
                let transform = ps.len() as f64 * 3.0 * l * l.log2() * 0.75 + 4.0 * l;
                transform < direct
            }
        },
    };
    if use_ntt {
        via_ntt(a, b, out_len, primes.as_deref().unwrap())
    } else {
        schoolbook(a, b, out_len)
    }
}

/// 0/1 support of the product of two 0/1 series.
pub fn convolve_support(a: &[u64], b: &[u64], out_len: usize) -> Result<Vec<u64>> {
    let mut r = convolve(a, b, out_len, Backend::Auto)?;
    for x in r.iter_mut() {
        *x = (*x != 0) as u64;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive(a: &[u64], b: &[u64], n: usize) -> Vec<u128> {
        let mut out = vec![0u128; n];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                if i + j < n {
                    out[i + j] += x as u128 * y as u128;
                }
            }
        }
        out
    }

    #[test]
    fn binomial_square() {
        for be in [Backend::Auto, Backend::Schoolbook, Backend::Ntt] {
            assert_eq!(convolve(&[1, 1], &[1, 1], 3, be).unwrap(), vec![1, 2, 1]);
            assert_eq!(
                convolve(&[1, 1], &[1, 1], 5, be).unwrap(),
                vec![1, 2, 1, 0, 0]
            );
            assert_eq!(convolve(&[1, 1], &[1, 1], 2, be).unwrap(), vec![1, 2]);
        }
    }

    #[test]
    fn large_values_need_several_primes() {
        let a = vec![1_000_000_007u64; 100];
        let b = vec![99_999_989u64; 100];
        let want = naive(&a, &b, 199);
        assert!(want[99] > 1u128 << 62);
        let got = convolve(&a, &b, 199, Backend::Ntt).unwrap();
        assert!(got.iter().zip(&want).all(|(&g, &w)| g as u128 == w));
    }

    #[test]
    fn overflow_is_reported() {
        let a = vec![u64::MAX / 2; 4];
        for be in [Backend::Schoolbook, Backend::Ntt] {
            assert!(matches!(convolve(&a, &a, 7, be), Err(Error::Overflow(_))));
        }
    }

    #[test]
    fn dense_long_agrees() {
        let a: Vec<u64> = (0..5000u64).map(|i| (i * 7919) % 13).collect();
        let b: Vec<u64> = (0..4000u64).map(|i| (i * 104729) % 5).collect();
        let s = convolve(&a, &b, 9000, Backend::Schoolbook).unwrap();
        let t = convolve(&a, &b, 9000, Backend::Ntt).unwrap();
        assert_eq!(s, t);
    }

    proptest! {
        #[test]
        fn backends_agree(a in proptest::collection::vec(0u64..1000, 1..200),
                          b in proptest::collection::vec(0u64..1000, 1..200),
                          cut in 1usize..450) {
            let want: Vec<u64> = naive(&a, &b, cut).into_iter().map(|x| x as u64).collect();
            prop_assert_eq!(convolve(&a, &b, cut, Backend::Schoolbook).unwrap(), want.clone());
            prop_assert_eq!(convolve(&a, &b, cut, Backend::Ntt).unwrap(), want.clone());
            prop_assert_eq!(convolve(&a, &b, cut, Backend::Auto).unwrap(), want);
        }
    }
}
