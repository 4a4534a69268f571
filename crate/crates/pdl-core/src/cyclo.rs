//! Exact arithmetic in cyclotomic integer rings `Z[zeta_m]`, represented as
//! integer coefficient vectors modulo the `m`-th cyclotomic polynomial.
//! Inner products of characters and trace extractions stay exact here;
//! nothing in the crate ever touches floating point.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// The ring `Z[zeta_m]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycloRing {
    pub m: u64,
    /// Cyclotomic polynomial coefficients, low degree first, monic.
    pub phi: Vec<BigInt>,
}

/// An element of `Z[zeta_m]`: coefficients along `1, zeta, ..., zeta^{d-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cyc {
    pub coeffs: Vec<BigInt>,
}

impl CycloRing {
    pub fn new(m: u64) -> CycloRing {
        let phi = cyclotomic_poly(m);
        CycloRing { m, phi }
    }

    pub fn degree(&self) -> usize {
        self.phi.len() - 1
    }

    pub fn zero(&self) -> Cyc {
        Cyc { coeffs: vec![BigInt::zero(); self.degree()] }
    }

    pub fn one(&self) -> Cyc {
        self.from_int(BigInt::one())
    }

    pub fn from_int(&self, v: BigInt) -> Cyc {
        let mut c = self.zero();
        c.coeffs[0] = v;
        c
    }

    pub fn from_i64(&self, v: i64) -> Cyc {
        self.from_int(BigInt::from(v))
    }

    /// `zeta_m^k`.
    pub fn zeta_pow(&self, k: u64) -> Cyc {
        let k = (k % self.m) as usize;
        let mut raw = vec![BigInt::zero(); k + 1];
        raw[k] = BigInt::one();
        self.reduce(raw)
    }

    fn reduce(&self, mut raw: Vec<BigInt>) -> Cyc {
        let d = self.degree();
        for i in (d..raw.len()).rev() {
            let c = core::mem::take(&mut raw[i]);
            if c.is_zero() {
                continue;
            }
            for k in 0..d {
                let delta = &c * &self.phi[k];
                raw[i - d + k] -= delta;
            }
        }
        raw.truncate(d);
        raw.resize(d, BigInt::zero());
        Cyc { coeffs: raw }
    }

    pub fn add(&self, a: &Cyc, b: &Cyc) -> Cyc {
        Cyc { coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect() }
    }

    pub fn sub(&self, a: &Cyc, b: &Cyc) -> Cyc {
        Cyc { coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x - y).collect() }
    }

    pub fn neg(&self, a: &Cyc) -> Cyc {
        Cyc { coeffs: a.coeffs.iter().map(|x| -x).collect() }
    }

    pub fn mul(&self, a: &Cyc, b: &Cyc) -> Cyc {
        let d = self.degree();
        let mut raw = vec![BigInt::zero(); 2 * d];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if !y.is_zero() {
                    raw[i + j] += x * y;
                }
            }
        }
        self.reduce(raw)
    }

    pub fn scale(&self, a: &Cyc, k: &BigInt) -> Cyc {
        Cyc { coeffs: a.coeffs.iter().map(|x| x * k).collect() }
    }

    /// Complex conjugation `zeta -> zeta^{-1}`.
    pub fn conj(&self, a: &Cyc) -> Cyc {
        let mut acc = self.zero();
        for (k, c) in a.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let z = self.zeta_pow((self.m - k as u64 % self.m) % self.m);
            acc = self.add(&acc, &self.scale(&z, c));
        }
        acc
    }

    pub fn is_zero(&self, a: &Cyc) -> bool {
        a.coeffs.iter().all(|c| c.is_zero())
    }

    /// If the element is a rational integer, return it.
    pub fn as_int(&self, a: &Cyc) -> Option<BigInt> {
        if a.coeffs.iter().skip(1).all(|c| c.is_zero()) {
            Some(a.coeffs[0].clone())
        } else {
            None
        }
    }

    /// Exact division by a positive integer; `None` if not divisible
    /// (coefficient-wise, valid because the power basis is a Z-basis).
    pub fn div_exact(&self, a: &Cyc, k: &BigInt) -> Option<Cyc> {
        assert!(k.is_positive());
        let mut out = self.zero();
        for (i, c) in a.coeffs.iter().enumerate() {
            let (q, r) = (c / k, c % k);
            if !r.is_zero() {
                return None;
            }
            out.coeffs[i] = q;
        }
        Some(out)
    }
}

/// The `m`-th cyclotomic polynomial via exact division of `x^m - 1` by the
/// cyclotomic polynomials of the proper divisors.
pub fn cyclotomic_poly(m: u64) -> Vec<BigInt> {
    let mut num = vec![BigInt::zero(); m as usize + 1];
    num[0] = -BigInt::one();
    num[m as usize] = BigInt::one();
    for d in crate::field::divisors(m) {
        if d == m {
            continue;
        }
        let phi_d = cyclotomic_poly(d);
        num = poly_div_exact(&num, &phi_d);
    }
    num
}

fn poly_div_exact(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let mut rem: Vec<BigInt> = num.to_vec();
    let dd = den.len() - 1;
    assert!(den[dd].is_one());
    let qd = rem.len() - 1 - dd;
    let mut quot = vec![BigInt::zero(); qd + 1];
    for i in (0..=qd).rev() {
        let c = rem[i + dd].clone();
        quot[i] = c.clone();
        if c.is_zero() {
            continue;
        }
        for (k, dk) in den.iter().enumerate() {
            let delta = &c * dk;
            rem[i + k] -= delta;
        }
    }
    assert!(rem.iter().all(|c| c.is_zero()), "non-exact polynomial division");
    quot
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cyclotomics() {
        let as_i64 = |v: &[i64]| v.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>();
        assert_eq!(cyclotomic_poly(1), as_i64(&[-1, 1]));
        assert_eq!(cyclotomic_poly(2), as_i64(&[1, 1]));
        assert_eq!(cyclotomic_poly(4), as_i64(&[1, 0, 1]));
        assert_eq!(cyclotomic_poly(6), as_i64(&[1, -1, 1]));
        assert_eq!(cyclotomic_poly(12), as_i64(&[1, 0, -1, 0, 1]));
    }

    #[test]
    fn ring_ops_and_conjugation() {
        let r = CycloRing::new(12);
        // zeta^12 = 1, zeta^6 = -1
        assert_eq!(r.zeta_pow(12), r.one());
        assert_eq!(r.zeta_pow(6), r.from_i64(-1));
        // zeta * conj(zeta) = 1
        let z = r.zeta_pow(1);
        assert_eq!(r.mul(&z, &r.conj(&z)), r.one());
        // sum over all m-th roots of unity is zero
        let mut s = r.zero();
        for k in 0..12 {
            s = r.add(&s, &r.zeta_pow(k));
        }
        assert!(r.is_zero(&s));
        // geometric identities: (1+zeta)(1-zeta) = 1 - zeta^2
        let one = r.one();
        let lhs = r.mul(&r.add(&one, &z), &r.sub(&one, &z));
        let rhs = r.sub(&one, &r.zeta_pow(2));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn integer_detection_and_division() {
        let r = CycloRing::new(8);
        let v = r.scale(&r.one(), &BigInt::from(6));
        assert_eq!(r.as_int(&v), Some(BigInt::from(6)));
        assert_eq!(r.div_exact(&v, &BigInt::from(3)), Some(r.from_i64(2)));
        assert_eq!(r.div_exact(&v, &BigInt::from(4)), None);
        assert_eq!(r.as_int(&r.zeta_pow(1)), None);
        // orthogonality sum: sum_k zeta^{ak} = m * [a = 0 mod m]
        for a in 0..8u64 {
            let mut s = r.zero();
            for k in 0..8 {
                s = r.add(&s, &r.zeta_pow(a * k));
            }
            let expect = if a == 0 { BigInt::from(8) } else { BigInt::zero() };
            assert_eq!(r.as_int(&s), Some(expect));
        }
    }
}
