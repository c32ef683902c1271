//! Representation functions: ordered counts r, cumulative s, exact rho and
//! maximal disjoint families.

use serde::{Deserialize, Serialize};

use crate::conv::{self, Backend};
use crate::error::{Error, Result};
use crate::seq::Sequence;

/// Ordered representation counts r(0..=n_max) and their prefix sums.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepTable {
    pub h: u32,
    pub n_max: u64,
    pub r: Vec<u64>,
    pub s: Vec<u64>,
}

impl RepTable {
    fn from_r(h: u32, r: Vec<u64>) -> Result<Self> {
        let mut s = Vec::with_capacity(r.len());
        let mut acc = 0u64;
        for &x in &r {
            acc = acc
                .checked_add(x)
                .ok_or_else(|| Error::Overflow(format!("cumulative count s for h = {h}")))?;
            s.push(acc);
        }
        Ok(RepTable {
            h,
            n_max: r.len() as u64 - 1,
            r,
            s,
        })
    }
}

/// Unordered representations with distinct parts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactRepSet {
    pub n: u64,
    pub h: u32,
    pub reps: Vec<Vec<u64>>,
}

/// Maximal disjoint family search mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RhoHatMode {
    /// Scan representations in lexicographic order and keep each one disjoint from those kept.
    Greedy,
    /// Largest possible family, by branch and bound.
    ExactMax,
}

/// Default cap on stored representations for the exact search.
pub const DEFAULT_REP_CAP: usize = 10_000;

fn check_range(a: &Sequence, n: u64) -> Result<()> {
    if n > a.horizon() {
        Err(Error::BeyondHorizon {
            x: n,
            horizon: a.horizon(),
        })
    } else {
        Ok(())
    }
}

/// Tables r_{A,t} for t = 0..=h over 0..=n_max (t = 0 is the unit series).
pub fn rep_tables_upto(
    a: &Sequence,
    h: u32,
    n_max: u64,
    backend: Backend,
) -> Result<Vec<Vec<u64>>> {
    let ind = a.indicator(n_max)?;
    let len = n_max as usize + 1;
    let mut unit = vec![0u64; len];
    unit[0] = 1;
    let mut out = vec![unit];
    for t in 1..=h as usize {
        let next = if t == 1 {
            ind.clone()
        } else {
            conv::convolve(&out[t - 1], &ind, len, backend)?
        };
        out.push(next);
    }
    Ok(out)
}

/// r_{A,h}(n) and s_{A,h}(n) for all n <= n_max, exactly.
pub fn rep_table(a: &Sequence, h: u32, n_max: u64) -> Result<RepTable> {
    rep_table_with(a, h, n_max, Backend::Auto)
}

pub fn rep_table_with(a: &Sequence, h: u32, n_max: u64, backend: Backend) -> Result<RepTable> {
    if h == 0 {
        return Err(Error::InvalidParameter("order h must be at least 1".into()));
    }
    let mut t = rep_tables_upto(a, h, n_max, backend)?;
    RepTable::from_r(h, t.pop().unwrap())
}

fn factorial(h: u32) -> Result<u64> {
    (1..=h as u64)
        .try_fold(1u64, |f, k| f.checked_mul(k))
        .ok_or_else(|| Error::Overflow(format!("{h}!")))
}

/// Binomial coefficient C(n, k).
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r as u64
}

/// Exact representation counts rho_{A,h}(n) for all n <= n_max, restricted
/// to parts at least `lower_bound`.
///
/// Uses Newton's identities between elementary and power-sum series:
/// h e_h = sum_{i=1}^{h} (-1)^{i-1} e_{h-i} p_i, where p_i is the indicator dilated by i.
pub fn rho_table(a: &Sequence, h: u32, n_max: u64, lower_bound: u64) -> Result<Vec<u64>> {
    if h == 0 {
        return Err(Error::InvalidParameter("order h must be at least 1".into()));
    }
    check_range(a, n_max)?;
    let len = n_max as usize + 1;
    let elems: Vec<u64> = a
        .elements_upto(n_max)
        .iter()
        .copied()
        .filter(|&x| x >= lower_bound)
        .collect();
    let dilated = |i: u64| {
        let mut v = vec![0u64; len];
        for &x in &elems {
            match x.checked_mul(i) {
                Some(y) if y <= n_max => v[y as usize] = 1,
                _ => break,
            }
        }
        v
    };
    let p: Vec<Vec<u64>> = (1..=h as u64).map(dilated).collect();
    let mut unit = vec![0u64; len];
    unit[0] = 1;
    let mut e = vec![unit];
    for j in 1..=h as usize {
        let mut pos = vec![0u128; len];
        let mut neg = vec![0u128; len];
        for i in 1..=j {
            let term = conv::convolve(&e[j - i], &p[i - 1], len, Backend::Auto)?;
            let dst = if i % 2 == 1 { &mut pos } else { &mut neg };
            for (d, &t) in dst.iter_mut().zip(&term) {
                *d += t as u128;
            }
        }
        let mut ej = Vec::with_capacity(len);
        for (n, (&x, &y)) in pos.iter().zip(&neg).enumerate() {
            let diff = x
                .checked_sub(y)
                .ok_or_else(|| Error::Overflow(format!("negative Newton term at n = {n}")))?;
            if diff % j as u128 != 0 {
                return Err(Error::Overflow(format!(
                    "inexact Newton division at n = {n}"
                )));
            }
            let v = u64::try_from(diff / j as u128)
                .map_err(|_| Error::Overflow(format!("rho_{j} at n = {n}")))?;
            ej.push(v);
        }
        e.push(ej);
    }
    Ok(e.pop().unwrap())
}

/// rho_{A,h}(n) by a subset-sum table over the admissible elements.
pub fn rho_knapsack(a: &Sequence, h: u32, n: u64, lower_bound: u64) -> Result<u64> {
    check_range(a, n)?;
    let h = h as usize;
    let len = n as usize + 1;
    let mut dp = vec![vec![0u64; len]; h + 1];
    dp[0][0] = 1;
    for &x in a.elements_upto(n).iter().filter(|&&x| x >= lower_bound) {
        let x = x as usize;
        for j in (1..=h).rev() {
            let (lo, hi) = dp.split_at_mut(j);
            let prev = &lo[j - 1];
            let cur = &mut hi[0];
            for s in (x..len).rev() {
                if prev[s - x] != 0 {
                    cur[s] = cur[s]
                        .checked_add(prev[s - x])
                        .ok_or_else(|| Error::Overflow("rho subset count".into()))?;
                }
            }
        }
    }
    Ok(dp[h][n as usize])
}

/// rho_{A,h}(n) restricted to parts at least `lower_bound`.
pub fn rho_exact(a: &Sequence, h: u32, n: u64, lower_bound: u64) -> Result<u64> {
    if h < 2 {
        return Err(Error::InvalidParameter(
            "exact representations need h >= 2".into(),
        ));
    }
    check_range(a, n)?;
    let m = a
        .elements_upto(n)
        .iter()
        .filter(|&&x| x >= lower_bound)
        .count() as f64;
    if m * h as f64 * (n as f64 + 1.0) <= 5.0e7 {
        rho_knapsack(a, h, n, lower_bound)
    } else {
        Ok(rho_table(a, h, n, lower_bound)?[n as usize])
    }
}

/// Visit increasing h-tuples from `elems` summing to `n`, in lexicographic order.
/// `skip` marks elements that may not be used. The visitor returns false to stop.
fn visit_reps(
    elems: &[u64],
    h: usize,
    n: u64,
    skip: &dyn Fn(u64) -> bool,
    visit: &mut dyn FnMut(&[u64]) -> bool,
) {
    fn rec(
        elems: &[u64],
        start: usize,
        left: usize,
        rem: u64,
        cur: &mut Vec<u64>,
        skip: &dyn Fn(u64) -> bool,
        visit: &mut dyn FnMut(&[u64]) -> bool,
    ) -> bool {
        if left == 1 {
            if let Ok(pos) = elems[start..].binary_search(&rem) {
                let _ = pos;
                if !skip(rem) {
                    cur.push(rem);
                    let go = visit(cur);
                    cur.pop();
                    return go;
                }
            }
            return true;
        }
        for i in start..elems.len() {
            let x = elems[i];
            // The remaining left-1 parts are all larger than x.
            let min_rest =
                (left as u64 - 1).saturating_mul(x) + (left as u64 - 1) * left as u64 / 2;
            if x.saturating_add(min_rest) > rem {
                break;
            }
            if skip(x) {
                continue;
            }
            cur.push(x);
            let go = rec(elems, i + 1, left - 1, rem - x, cur, skip, visit);
            cur.pop();
            if !go {
                return false;
            }
            // A visit may have marked an ancestor as unusable.
            if cur.iter().any(|&y| skip(y)) {
                return true;
            }
        }
        true
    }
    if h == 0 {
        return;
    }
    let mut cur = Vec::with_capacity(h);
    rec(elems, 0, h, n, &mut cur, skip, visit);
}

/// All exact representations of n with parts at least `lower_bound`, at most `cap` of them.
pub fn exact_reps(
    a: &Sequence,
    h: u32,
    n: u64,
    lower_bound: u64,
    cap: usize,
) -> Result<ExactRepSet> {
    if h < 2 {
        return Err(Error::InvalidParameter(
            "exact representations need h >= 2".into(),
        ));
    }
    check_range(a, n)?;
    let elems: Vec<u64> = a
        .elements_upto(n)
        .iter()
        .copied()
        .filter(|&x| x >= lower_bound)
        .collect();
    let mut reps = Vec::new();
    let mut over = false;
    visit_reps(&elems, h as usize, n, &|_| false, &mut |t| {
        if reps.len() == cap {
            over = true;
            return false;
        }
        reps.push(t.to_vec());
        true
    });
    if over {
        let found = rho_exact(a, h, n, lower_bound)? as usize;
        return Err(Error::OverCap { found, cap });
    }
    Ok(ExactRepSet { n, h, reps })
}

/// The greedy maximal disjoint family: lexicographically smallest representation first.
pub fn greedy_family(a: &Sequence, h: u32, n: u64) -> Result<Vec<Vec<u64>>> {
    if h < 2 {
        return Err(Error::InvalidParameter(
            "exact representations need h >= 2".into(),
        ));
    }
    check_range(a, n)?;
    let elems = a.elements_upto(n).to_vec();
    let used = std::cell::RefCell::new(std::collections::HashSet::new());
    let mut family = Vec::new();
    visit_reps(
        &elems,
        h as usize,
        n,
        &|x| used.borrow().contains(&x),
        &mut |t| {
            family.push(t.to_vec());
            used.borrow_mut().extend(t.iter().copied());
            true
        },
    );
    Ok(family)
}

/// Largest number of pairwise disjoint sets among `reps`.
pub fn max_disjoint(reps: &[Vec<u64>]) -> usize {
    let mut universe: Vec<u64> = reps.iter().flatten().copied().collect();
    universe.sort_unstable();
    universe.dedup();
    let words = universe.len().div_ceil(64).max(1);
    let masks: Vec<Vec<u64>> = reps
        .iter()
        .map(|r| {
            let mut m = vec![0u64; words];
            for x in r {
                let i = universe.binary_search(x).unwrap();
                m[i / 64] |= 1 << (i % 64);
            }
            m
        })
        .collect();
    let h = reps.first().map_or(1, |r| r.len().max(1));

    struct Search<'a> {
        masks: &'a [Vec<u64>],
        h: usize,
        best: usize,
    }
    impl Search<'_> {
        fn go(&mut self, cands: &[usize], used: &[u64], size: usize) {
            if size > self.best {
                self.best = size;
            }
            if cands.is_empty() {
                return;
            }
            let free = used.iter().map(|w| w.count_zeros() as usize).sum::<usize>();
            let bound = cands.len().min(free / self.h);
            if size + bound <= self.best {
                return;
            }
            let first = cands[0];
            let m = &self.masks[first];
            let rest: Vec<usize> = cands[1..]
                .iter()
                .copied()
                .filter(|&c| self.masks[c].iter().zip(m).all(|(a, b)| a & b == 0))
                .collect();
            let mut used2 = used.to_vec();
            for (u, w) in used2.iter_mut().zip(m) {
                *u |= w;
            }
            self.go(&rest, &used2, size + 1);
            self.go(&cands[1..], used, size);
        }
    }
    // Bits beyond the universe are pre-marked as used so the free count is exact.
    let mut used = vec![0u64; words];
    for i in universe.len()..words * 64 {
        used[i / 64] |= 1 << (i % 64);
    }
    let mut s = Search {
        masks: &masks,
        h,
        best: 0,
    };
    let all: Vec<usize> = (0..reps.len()).collect();
    s.go(&all, &used, 0);
    s.best
}

/// Size of a maximal disjoint family of exact representations of n.
pub fn rho_hat(a: &Sequence, h: u32, n: u64, mode: RhoHatMode, cap: usize) -> Result<u64> {
    match mode {
        RhoHatMode::Greedy => Ok(greedy_family(a, h, n)?.len() as u64),
        RhoHatMode::ExactMax => {
            if h == 2 {
                // Two pairs with the same sum share an element only if they coincide.
                check_range(a, n)?;
                return rho_exact(a, 2, n, 0);
            }
            let set = exact_reps(a, h, n, 0, cap)?;
            Ok(max_disjoint(&set.reps) as u64)
        }
    }
}

/// r(n) - h! rho(n): ordered representations with a repeated part.
pub fn nonexact_count(a: &Sequence, h: u32, n: u64) -> Result<u64> {
    if h < 2 {
        return Err(Error::InvalidParameter(
            "non-exact count needs h >= 2".into(),
        ));
    }
    let r = rep_table(&a.truncate(n.min(a.horizon()))?, h, n)?.r[n as usize];
    let rho = rho_exact(a, h, n, 0)?;
    let f = factorial(h)?;
    let exact = rho
        .checked_mul(f)
        .ok_or_else(|| Error::Overflow("h! rho".into()))?;
    r.checked_sub(exact)
        .ok_or_else(|| Error::Overflow("h! rho exceeds r".into()))
}

/// sum_{k <= n/2} r_{A,h-1}(n - 2k) 1_A(k), with r_{A,0} the unit series.
pub fn n_aux(a: &Sequence, h: u32, n: u64) -> Result<u64> {
    if h == 0 {
        return Err(Error::InvalidParameter("order h must be at least 1".into()));
    }
    check_range(a, n)?;
    let t = rep_tables_upto(&a.truncate(n)?, h - 1, n, Backend::Auto)?;
    let r = &t[h as usize - 1];
    let mut acc = 0u64;
    for &k in a.elements_upto(n / 2) {
        acc = acc
            .checked_add(r[(n - 2 * k) as usize])
            .ok_or_else(|| Error::Overflow("n_aux".into()))?;
    }
    Ok(acc)
}

/// Both sides of r_{A+k,h}(n) = r_{A,h}(n) + sum_l C(h,l) r_{A,h-l}(n - l k) + [k = n/h].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionCheck {
    pub k: u64,
    pub h: u32,
    pub n: u64,
    pub lhs: u64,
    pub rhs: u64,
    pub holds: bool,
}

pub fn extension_identity_check(a: &Sequence, k: u64, h: u32, n: u64) -> Result<ExtensionCheck> {
    if h == 0 {
        return Err(Error::InvalidParameter("order h must be at least 1".into()));
    }
    check_range(a, n)?;
    if k <= a.horizon() && a.contains(k)? {
        return Err(Error::ElementPresent(k));
    }
    let base = a.truncate(n)?;
    let extended = if k <= n {
        base.with_element(k)?
    } else {
        base.clone()
    };
    let lhs = rep_table(&extended, h, n)?.r[n as usize];
    let t = rep_tables_upto(&base, h, n, Backend::Auto)?;
    let mut rhs: u128 = t[h as usize][n as usize] as u128;
    for l in 1..h as u64 {
        if let Some(shift) = l.checked_mul(k) {
            if shift <= n {
                rhs += binomial(h as u64, l) as u128
                    * t[(h as u64 - l) as usize][(n - shift) as usize] as u128;
            }
        }
    }
    if k.checked_mul(h as u64) == Some(n) {
        rhs += 1;
    }
    let rhs = u64::try_from(rhs).map_err(|_| Error::Overflow("extension identity".into()))?;
    Ok(ExtensionCheck {
        k,
        h,
        n,
        lhs,
        rhs,
        holds: lhs == rhs,
    })
}

/// Outcome of the A(x/2)^h <= s(x) <= A(x)^h check.
///
/// The upper bound always holds. The lower bound with x/2 holds for h <= 2 but
/// can fail for h >= 3 (A = {0,1,4,...}, h = 3, x = 2 gives 8 > 7), so the
/// report also carries the weaker A(x/h)^h <= s(x), which always holds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub h: u32,
    pub checked_upto: u64,
    /// Both A(x/2)^h <= s(x) and s(x) <= A(x)^h at every x.
    pub holds: bool,
    pub first_violation: Option<u64>,
    pub last_violation: Option<u64>,
    pub violations: u64,
    pub upper_holds: bool,
    /// A(x/h)^h <= s(x) at every x.
    pub lower_by_h_holds: bool,
}

pub fn sandwich_check(a: &Sequence, table: &RepTable) -> Result<SandwichReport> {
    let cnt = a.counting_table(table.n_max)?;
    let h = table.h;
    let pw = |c: u64| (c as u128).checked_pow(h).unwrap_or(u128::MAX);
    let (mut first, mut last, mut violations) = (None, None, 0u64);
    let (mut upper, mut by_h) = (true, true);
    for x in 0..=table.n_max as usize {
        let s = table.s[x] as u128;
        let up = s <= pw(cnt[x]);
        upper &= up;
        by_h &= pw(cnt[x / h as usize]) <= s;
        if !up || pw(cnt[x / 2]) > s {
            first.get_or_insert(x as u64);
            last = Some(x as u64);
            violations += 1;
        }
    }
    Ok(SandwichReport {
        h,
        checked_upto: table.n_max,
        holds: violations == 0,
        first_violation: first,
        last_violation: last,
        violations,
        upper_holds: upper,
        lower_by_h_holds: by_h,
    })
}

/// Compare r_h(n) with sum_k r_{h-l}(k) r_l(n-k).
pub fn recursion_check(tables: &[Vec<u64>], h: usize, l: usize, n: usize) -> bool {
    let lhs = tables[h][n] as u128;
    let rhs: u128 = (0..=n)
        .map(|k| tables[h - l][k] as u128 * tables[l][n - k] as u128)
        .sum();
    lhs == rhs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, GeneratorKind, GeneratorSpec};
    use proptest::prelude::*;

    fn seq(v: &[u64], h: u64) -> Sequence {
        Sequence::new(v.to_vec(), h).unwrap()
    }
    fn gen(kind: GeneratorKind, h: u64) -> Sequence {
        generate(&GeneratorSpec::new(kind, h)).unwrap()
    }

    fn brute_r(a: &[u64], h: usize, n: u64) -> u64 {
        if h == 0 {
            return (n == 0) as u64;
        }
        a.iter()
            .filter(|&&x| x <= n)
            .map(|&x| brute_r(a, h - 1, n - x))
            .sum()
    }

    #[test]
    fn ordered_counts() {
        let nat = gen(GeneratorKind::Naturals, 20);
        assert_eq!(rep_table(&nat, 2, 7).unwrap().r[7], 8);
        let two = seq(&[0, 1], 2);
        assert_eq!(rep_table(&two, 2, 2).unwrap().r, vec![1, 2, 1]);
        let sq = gen(GeneratorKind::Squares, 100);
        let t = rep_table(&sq, 2, 25).unwrap();
        assert_eq!(t.r[25], 4);
        assert_eq!(t.r[25], brute_r(sq.elements(), 2, 25));
    }

    #[test]
    fn exact_counts() {
        let nat = gen(GeneratorKind::Naturals, 20);
        assert_eq!(rho_exact(&nat, 2, 4, 0).unwrap(), 2);
        assert_eq!(rho_exact(&nat, 2, 4, 1).unwrap(), 1);
        let sq = gen(GeneratorKind::Squares, 100);
        assert_eq!(rho_exact(&sq, 3, 14, 0).unwrap(), 1);
        assert_eq!(
            exact_reps(&sq, 3, 14, 0, 10).unwrap().reps,
            vec![vec![1, 4, 9]]
        );
        assert_eq!(rho_table(&sq, 3, 100, 0).unwrap()[14], 1);
    }

    #[test]
    fn disjoint_families() {
        let nat = gen(GeneratorKind::Naturals, 20);
        for mode in [RhoHatMode::Greedy, RhoHatMode::ExactMax] {
            assert_eq!(rho_hat(&nat, 2, 10, mode, DEFAULT_REP_CAP).unwrap(), 5);
        }
        let sq = gen(GeneratorKind::Squares, 100);
        for mode in [RhoHatMode::Greedy, RhoHatMode::ExactMax] {
            assert_eq!(rho_hat(&sq, 2, 25, mode, DEFAULT_REP_CAP).unwrap(), 2);
            assert_eq!(rho_hat(&sq, 3, 7, mode, DEFAULT_REP_CAP).unwrap(), 0);
        }
        assert_eq!(
            greedy_family(&sq, 2, 25).unwrap(),
            vec![vec![0, 25], vec![9, 16]]
        );
    }

    #[test]
    fn greedy_is_not_always_optimal() {
        // {0,1,5} blocks both {1,2,3} and {0,2,4}; the optimum takes those two.
        let reps = vec![vec![0, 1, 5], vec![0, 2, 4], vec![1, 2, 3]];
        assert_eq!(max_disjoint(&reps), 1);
        let reps = vec![vec![0, 1, 5], vec![0, 2, 4], vec![1, 3, 6]];
        assert_eq!(max_disjoint(&reps), 2);
    }

    #[test]
    fn over_cap() {
        let nat = gen(GeneratorKind::Naturals, 300);
        assert!(matches!(
            rho_hat(&nat, 3, 300, RhoHatMode::ExactMax, 100),
            Err(Error::OverCap { .. })
        ));
    }

    #[test]
    fn non_exact() {
        let nat = gen(GeneratorKind::Naturals, 20);
        assert_eq!(nonexact_count(&nat, 2, 4).unwrap(), 1);
        assert_eq!(nonexact_count(&nat, 2, 5).unwrap(), 0);
        let small = seq(&[0, 1, 2], 3);
        assert_eq!(rep_table(&small, 3, 3).unwrap().r[3], 7);
        assert_eq!(nonexact_count(&small, 3, 3).unwrap(), 1);
    }

    #[test]
    fn auxiliary_sum() {
        let nat = gen(GeneratorKind::Naturals, 20);
        assert_eq!(n_aux(&nat, 2, 6).unwrap(), 4);
        let zero = seq(&[0], 5);
        for h in 1..5 {
            assert_eq!(n_aux(&zero, h, 0).unwrap(), 1);
        }
        let sq = gen(GeneratorKind::Squares, 100);
        // k in {0,1,4}: 8 - 2k in {8, 6, 0}, of which only 0 is a square.
        assert_eq!(n_aux(&sq, 2, 8).unwrap(), 1);
    }

    #[test]
    fn extension_identity_examples() {
        let a = seq(&[1, 2], 10);
        let c = extension_identity_check(&a, 3, 2, 4).unwrap();
        assert_eq!((c.lhs, c.rhs), (3, 3));
        let z = seq(&[0], 10);
        let c = extension_identity_check(&z, 1, 2, 2).unwrap();
        assert_eq!((c.lhs, c.rhs), (1, 1));
        let sq = gen(GeneratorKind::Squares, 100);
        let c = extension_identity_check(&sq, 50, 3, 30).unwrap();
        assert!(c.holds);
        assert_eq!(c.lhs, rep_table(&sq, 3, 30).unwrap().r[30]);
        assert!(matches!(
            extension_identity_check(&sq, 49, 2, 60),
            Err(Error::ElementPresent(49))
        ));
    }

    #[test]
    fn half_sandwich_fails_for_three_squares() {
        let sq = gen(GeneratorKind::Squares, 100);
        let t = rep_table(&sq, 3, 100).unwrap();
        let rep = sandwich_check(&sq, &t).unwrap();
        assert!(!rep.holds);
        assert_eq!(rep.first_violation, Some(2));
        assert!(rep.upper_holds && rep.lower_by_h_holds);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(4, 0), 1);
        assert_eq!(binomial(3, 4), 0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn identities_on_random_sets(raw in proptest::collection::btree_set(0u64..120, 1..25), h in 2u32..4) {
            let elems: Vec<u64> = raw.into_iter().collect();
            let a = seq(&elems, 120);
            let n_max = 120;
            let tables = rep_tables_upto(&a, h, n_max, Backend::Auto).unwrap();
            let t = rep_table(&a, h, n_max).unwrap();
            let rho = rho_table(&a, h, n_max, 0).unwrap();
            let f = factorial(h).unwrap();
            let mut acc = 0;
            for n in 0..=n_max {
                acc += t.r[n as usize];
                prop_assert_eq!(t.s[n as usize], acc);
                prop_assert_eq!(t.r[n as usize], brute_r(&elems, h as usize, n));
                prop_assert!(t.r[n as usize] >= f * rho[n as usize]);
                prop_assert_eq!(rho[n as usize], rho_knapsack(&a, h, n, 0).unwrap());
                prop_assert!(recursion_check(&tables, h as usize, 1, n as usize));
            }
            let sw = sandwich_check(&a, &t).unwrap();
            prop_assert!(sw.upper_holds && sw.lower_by_h_holds);
            let t2 = rep_table(&a, 2, n_max).unwrap();
            prop_assert!(sandwich_check(&a, &t2).unwrap().holds);
        }

        #[test]
        fn families_are_maximal(raw in proptest::collection::btree_set(0u64..60, 3..20), n in 10u64..60) {
            let elems: Vec<u64> = raw.into_iter().collect();
            let a = seq(&elems, 60);
            let h = 3;
            let fam = greedy_family(&a, h, n).unwrap();
            let all = exact_reps(&a, h, n, 0, DEFAULT_REP_CAP).unwrap().reps;
            let union: std::collections::HashSet<u64> = fam.iter().flatten().copied().collect();
            for r in &all {
                prop_assert!(r.iter().any(|x| union.contains(x)));
            }
            let best = rho_hat(&a, h, n, RhoHatMode::ExactMax, DEFAULT_REP_CAP).unwrap();
            prop_assert!(fam.len() as u64 <= best);
            prop_assert!(best <= all.len() as u64);
            prop_assert!(best <= (n + 1) / h as u64);
        }

        #[test]
        fn rho_monotone_in_lower_bound(raw in proptest::collection::btree_set(0u64..80, 2..30), n in 0u64..80, lb in 0u64..40) {
            let elems: Vec<u64> = raw.into_iter().collect();
            let a = seq(&elems, 80);
            prop_assert!(rho_exact(&a, 2, n, lb + 1).unwrap() <= rho_exact(&a, 2, n, lb).unwrap());
        }
    }
}
