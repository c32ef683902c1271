//! Brute-force reference implementations used to cross-check the fast paths.

use crate::rng;
use crate::seq::Sequence;

/// Deterministic random subset of [0, n_max] with inclusion probability `density`.
pub fn random_sparse(seed: u64, n_max: u64, density: f64) -> Sequence {
    let el = (0..=n_max)
        .filter(|&n| rng::member(seed, n, density))
        .collect();
    Sequence::new(el, n_max).expect("increasing by construction")
}

/// r_{A,h}(n) for n <= n_max by enumerating ordered h-tuples.
pub fn brute_force_r(a: &Sequence, h: u32, n_max: u64) -> Vec<u64> {
    fn go(el: &[u64], left: u32, sum: u64, n_max: u64, out: &mut [u64]) {
        if left == 0 {
            out[sum as usize] += 1;
            return;
        }
        for &x in el {
            if sum + x > n_max {
                break;
            }
            go(el, left - 1, sum + x, n_max, out);
        }
    }
    let mut out = vec![0; n_max as usize + 1];
    go(a.elements_upto(n_max), h, 0, n_max, &mut out);
    out
}

/// rho_{A,h}(n) restricted to parts >= lower_bound, by enumerating increasing tuples.
pub fn brute_force_rho(a: &Sequence, h: u32, n_max: u64, lower_bound: u64) -> Vec<u64> {
    fn go(el: &[u64], from: usize, left: u32, sum: u64, n_max: u64, out: &mut [u64]) {
        if left == 0 {
            out[sum as usize] += 1;
            return;
        }
        for i in from..el.len() {
            if sum + el[i] > n_max {
                break;
            }
            go(el, i + 1, left - 1, sum + el[i], n_max, out);
        }
    }
    let mut out = vec![0; n_max as usize + 1];
    let el: Vec<u64> = a
        .elements_upto(n_max)
        .iter()
        .copied()
        .filter(|&x| x >= lower_bound)
        .collect();
    go(&el, 0, h, 0, n_max, &mut out);
    out
}

/// Singular integral by direct nested summation over compositions of n.
pub fn nested_singular_integral(a: &Sequence, h: u32, n_max: u64) -> Vec<f64> {
    let cnt = a.counting_table(n_max).expect("n_max within horizon");
    let beta: Vec<f64> = cnt
        .iter()
        .enumerate()
        .map(|(k, &c)| c as f64 / (k as f64 + 1.0))
        .collect();
    fn go(beta: &[f64], left: u32, n: usize) -> f64 {
        if left == 1 {
            return beta[n];
        }
        (0..=n).map(|k| beta[k] * go(beta, left - 1, n - k)).sum()
    }
    (0..=n_max as usize).map(|n| go(&beta, h, n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        let a = Sequence::new(vec![0, 1], 4).unwrap();
        assert_eq!(brute_force_r(&a, 2, 4), vec![1, 2, 1, 0, 0]);
        assert_eq!(brute_force_rho(&a, 2, 4, 0), vec![0, 1, 0, 0, 0]);
        // beta = (1, 1, 2/3): J(2) = 1 * 2/3 + 1 * 1 + 2/3 * 1
        let j = nested_singular_integral(&a, 2, 2);
        assert!((j[2] - 7.0 / 3.0).abs() < 1e-12);
    }
}
