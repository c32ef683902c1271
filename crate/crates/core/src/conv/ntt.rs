//! Number-theoretic transforms over word-size primes with Garner reconstruction.

/// (modulus, primitive root, largest supported log2 length)
pub const PRIMES: [(u32, u32, u32); 4] = [
    (469_762_049, 3, 26),
    (167_772_161, 3, 25),
    (754_974_721, 11, 24),
    (998_244_353, 3, 23),
];

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

/// Montgomery arithmetic modulo an odd prime below 2^30.
#[derive(Clone, Copy, Debug)]
struct Mont {
    p: u32,
    /// -p^{-1} mod 2^32
    np: u32,
    /// 2^64 mod p
    r2: u32,
}

impl Mont {
    fn new(p: u32) -> Self {
        let mut inv: u32 = 1;
        for _ in 0..5 {
            inv = inv.wrapping_mul(2u32.wrapping_sub(p.wrapping_mul(inv)));
        }
        let r2 = ((1u128 << 64) % p as u128) as u32;
        Mont {
            p,
            np: inv.wrapping_neg(),
            r2,
        }
    }

    #[inline(always)]
    fn reduce(&self, t: u64) -> u32 {
        let m = (t as u32).wrapping_mul(self.np);
        let u = ((t + m as u64 * self.p as u64) >> 32) as u32;
        if u >= self.p {
            u - self.p
        } else {
            u
        }
    }

    #[inline(always)]
    fn mul(&self, a: u32, b: u32) -> u32 {
        self.reduce(a as u64 * b as u64)
    }

    fn mont(&self, a: u32) -> u32 {
        self.mul(a, self.r2)
    }

    #[inline(always)]
    fn add(&self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline(always)]
    fn sub(&self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }
}

/// Twiddle tables laid out so that stage `len` reads `t[len..2*len]`.
struct Plan {
    m: Mont,
    fwd: Vec<u32>,
    inv: Vec<u32>,
}

impl Plan {
    fn new(p: u32, g: u32, n: usize) -> Self {
        let m = Mont::new(p);
        let mut fwd = vec![0u32; n.max(2)];
        let mut inv = vec![0u32; n.max(2)];
        let mut len = 1;
        while len < n {
            let w = pow_mod(g as u64, (p as u64 - 1) / (2 * len as u64), p as u64);
            let wi = pow_mod(w, p as u64 - 2, p as u64);
            let (mut a, mut b) = (1u64, 1u64);
            for j in 0..len {
                fwd[len + j] = m.mont(a as u32);
                inv[len + j] = m.mont(b as u32);
                a = a * w % p as u64;
                b = b * wi % p as u64;
            }
            len <<= 1;
        }
        Plan { m, fwd, inv }
    }

    /// Decimation in frequency: natural order in, bit-reversed out.
    fn forward(&self, a: &mut [u32]) {
        let n = a.len();
        let m = self.m;
        let mut len = n >> 1;
        while len >= 1 {
            let tw = &self.fwd[len..2 * len];
            for block in a.chunks_exact_mut(2 * len) {
                let (lo, hi) = block.split_at_mut(len);
                for j in 0..len {
                    let u = lo[j];
                    let v = hi[j];
                    lo[j] = m.add(u, v);
                    hi[j] = m.mul(m.sub(u, v), tw[j]);
                }
            }
            len >>= 1;
        }
    }

    /// Decimation in time: bit-reversed in, natural order out (unscaled).
    fn inverse(&self, a: &mut [u32]) {
        let n = a.len();
        let m = self.m;
        let mut len = 1;
        while len < n {
            let tw = &self.inv[len..2 * len];
            for block in a.chunks_exact_mut(2 * len) {
                let (lo, hi) = block.split_at_mut(len);
                for j in 0..len {
                    let u = lo[j];
                    let v = m.mul(hi[j], tw[j]);
                    lo[j] = m.add(u, v);
                    hi[j] = m.sub(u, v);
                }
            }
            len <<= 1;
        }
    }
}

/// Cyclic-free product of `a` and `b` modulo prime `idx`, first `out_len` terms.
pub fn convolve_mod(a: &[u64], b: &[u64], out_len: usize, idx: usize) -> Vec<u32> {
    let (p, g, _) = PRIMES[idx];
    let full = a.len() + b.len() - 1;
    let n = full.next_power_of_two().max(2);
    let plan = Plan::new(p, g, n);
    let m = plan.m;
    let load = |src: &[u64]| {
        let mut v = vec![0u32; n];
        for (d, &s) in v.iter_mut().zip(src) {
            *d = (s % p as u64) as u32;
        }
        v
    };
    let mut fa = load(a);
    let mut fb = load(b);
    plan.forward(&mut fa);
    plan.forward(&mut fb);
    for (x, &y) in fa.iter_mut().zip(&fb) {
        *x = m.mul(*x, y);
    }
    drop(fb);
    plan.inverse(&mut fa);
    // Plain products picked up one factor R^{-1}; scale by n^{-1} R^2.
    let ninv = pow_mod(n as u64, p as u64 - 2, p as u64);
    let r2 = ((1u128 << 64) % p as u128) as u64;
    let z = (ninv * r2 % p as u64) as u32;
    fa.truncate(out_len.min(full));
    for x in fa.iter_mut() {
        *x = m.mul(*x, z);
    }
    fa.resize(out_len, 0);
    fa
}

/// Reconstruct the integer below the product of the given primes from its residues.
pub fn garner(residues: &[u32], primes: &[u32]) -> u128 {
    let mut x: u128 = residues[0] as u128;
    let mut prod: u128 = primes[0] as u128;
    for i in 1..residues.len() {
        let p = primes[i] as u128;
        let cur = x % p;
        let r = residues[i] as u128;
        let diff = (r + p - cur) % p;
        let inv = pow_mod((prod % p) as u64, (p - 2) as u64, p as u64) as u128;
        let t = diff * inv % p;
        x += prod * t;
        prod *= p;
    }
    x
}
