//! The parameter pack `(p, q, n, kappa)` with its derived invariants
//! `n0, k0, n', e` and the level `h`.

use crate::field::{gcd_u64, FieldTower};
use crate::{Error, Result};

/// Parameters of one instance: the inner form of `GL_n` over a local field
/// with residue field `F_q` indexed by `kappa`, at level `h`.
///
/// Derived data: `kappa/n = k0/n0` in lowest terms, `n' = n/n0`,
/// `e = e_{kappa,n}` the canonical twisting exponent (smallest positive
/// integer with `gcd(e, n) = 1` and `e = k0 mod n0`, with `e = 1` whenever
/// `k0 <= 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupParams {
    pub p: u64,
    pub a: u32,
    pub q: u64,
    pub n: u32,
    pub kappa: u32,
    pub n0: u32,
    pub k0: u32,
    pub n_prime: u32,
    pub e: u32,
    pub h: usize,
}

impl GroupParams {
    pub fn new(p: u64, a: u32, n: u32, kappa: u32, h: usize) -> Result<GroupParams> {
        if n == 0 || h == 0 {
            return Err(Error::Param("n and h must be positive".into()));
        }
        if !crate::field::is_prime(p) {
            return Err(Error::Param(alloc::format!("p = {p} is not prime")));
        }
        if h > crate::witt::MAX_H {
            return Err(Error::Param(alloc::format!("h = {h} exceeds MAX_H")));
        }
        if kappa >= n {
            return Err(Error::Param(alloc::format!("kappa = {kappa} out of range 0..{n}")));
        }
        let (k0, n0) = if kappa == 0 {
            (0, 1)
        } else {
            let g = gcd_u64(kappa as u64, n as u64) as u32;
            (kappa / g, n / g)
        };
        let n_prime = n / n0;
        let e = if k0 <= 1 {
            1
        } else {
            (1..=n * n0)
                .find(|&c| gcd_u64(c as u64, n as u64) == 1 && c % n0 == k0 % n0)
                .ok_or_else(|| Error::Param("no valid e_{kappa,n}".into()))?
        };
        let q = p.pow(a);
        let params = GroupParams { p, a, q, n, kappa, n0, k0, n_prime, e, h };
        params.check_invariants()?;
        Ok(params)
    }

    fn check_invariants(&self) -> Result<()> {
        let ok = self.kappa < self.n
            && gcd_u64(self.k0 as u64, self.n0 as u64) == 1
            && self.kappa == self.k0 * self.n_prime
            && self.n0 * self.n_prime == self.n
            && gcd_u64(self.e as u64, self.n as u64) == 1
            && self.e % self.n0 == self.k0 % self.n0
            && (self.k0 != 1 || self.e == 1);
        if ok {
            Ok(())
        } else {
            Err(Error::Param("GroupParams invariants violated".into()))
        }
    }

    /// `[x]_m`: the representative of `x mod m` in `{1, ..., m}`.
    pub fn rep1(x: i64, m: u32) -> u32 {
        let m = m as i64;
        let r = x.rem_euclid(m);
        (if r == 0 { m } else { r }) as u32
    }

    /// Residue class `[i]_{n0}` of a 1-based row/column index.
    #[inline]
    pub fn class(&self, i1: u32) -> u32 {
        Self::rep1(i1 as i64, self.n0)
    }

    /// `pi`-valuation of the diagonal entry `t_i` of `t_{kappa,n}`
    /// (1 if `[i]_{n0} > n0 - k0`, else 0).
    #[inline]
    pub fn t_val(&self, i1: u32) -> u32 {
        if self.class(i1) > self.n0 - self.k0 {
            1
        } else {
            0
        }
    }

    /// `l = e^{-1} mod n`, the twist in the diagonal torus embedding
    /// `t -> diag(t, sigma^l(t), ..., sigma^{(n-1)l}(t))`.
    pub fn torus_twist(&self) -> u32 {
        (1..=self.n).find(|&l| (l * self.e) % self.n == 1 % self.n).expect("e is invertible mod n")
    }

    /// Builds a tower whose ambient field contains `F_{q^d}` for every `d`
    /// in `degrees` (ambient degree = lcm).
    pub fn tower_for(&self, degrees: &[u32]) -> Result<FieldTower> {
        let mut n_amb = 1u64;
        for &d in degrees {
            n_amb = crate::field::lcm_u64(n_amb, d.max(1) as u64);
        }
        FieldTower::new(self.p, self.a, n_amb as u32)
    }
}
