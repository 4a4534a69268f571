//! Truncated Witt rings in the equal-characteristic model, where
//! `W_h(A) = A[pi]/pi^h` with coordinatewise addition, truncated polynomial
//! multiplication, Frobenius `sigma` (coordinatewise `q`-power) and
//! Verschiebung `V` (shift), plus the twisted ring scheme `W`.

use alloc::vec::Vec;

use crate::field::{Fe, FieldTower};
use crate::{Error, Result};

/// Maximum truncation length (covers every desk-scale instance plus the
/// valuation slack used when dividing by powers of `pi`).
pub const MAX_H: usize = 12;

/// A truncated Witt vector: `h` coefficients, coefficient `i` is the `pi^i`
/// coordinate. Backed by a fixed array so values are `Copy` in hot loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Wv {
    pub h: u8,
    c: [Fe; MAX_H],
}

impl Wv {
    pub fn zero(h: usize) -> Wv {
        assert!(h <= MAX_H);
        Wv { h: h as u8, c: [Fe::ZERO; MAX_H] }
    }

    pub fn one(h: usize, t: &FieldTower) -> Wv {
        let mut w = Wv::zero(h);
        w.c[0] = t.one();
        w
    }

    /// The constant (Teichmueller-style) vector `[x, 0, ..., 0]`.
    pub fn constant(h: usize, x: Fe) -> Wv {
        let mut w = Wv::zero(h);
        w.c[0] = x;
        w
    }

    pub fn from_coeffs(h: usize, coeffs: &[Fe]) -> Wv {
        assert!(coeffs.len() <= h && h <= MAX_H);
        let mut w = Wv::zero(h);
        w.c[..coeffs.len()].copy_from_slice(coeffs);
        w
    }

    #[inline]
    pub fn coeff(&self, i: usize) -> Fe {
        debug_assert!(i < self.h as usize);
        self.c[i]
    }

    #[inline]
    pub fn set_coeff(&mut self, i: usize, x: Fe) {
        debug_assert!(i < self.h as usize);
        self.c[i] = x;
    }

    pub fn coeffs(&self) -> &[Fe] {
        &self.c[..self.h as usize]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs().iter().all(|x| x.is_zero())
    }

    /// Unit iff the `pi^0` coordinate is nonzero.
    pub fn is_unit(&self) -> bool {
        !self.c[0].is_zero()
    }

    /// `pi`-adic valuation (`h` for the zero vector).
    pub fn val(&self) -> usize {
        self.coeffs().iter().position(|x| !x.is_zero()).unwrap_or(self.h as usize)
    }

    pub fn add(&self, other: &Wv, t: &FieldTower) -> Wv {
        debug_assert_eq!(self.h, other.h);
        let mut w = Wv::zero(self.h as usize);
        for i in 0..self.h as usize {
            w.c[i] = t.add(self.c[i], other.c[i]);
        }
        w
    }

    pub fn neg(&self, t: &FieldTower) -> Wv {
        let mut w = *self;
        for i in 0..self.h as usize {
            w.c[i] = t.neg(w.c[i]);
        }
        w
    }

    pub fn sub(&self, other: &Wv, t: &FieldTower) -> Wv {
        self.add(&other.neg(t), t)
    }

    /// Truncated polynomial product.
    pub fn mul(&self, other: &Wv, t: &FieldTower) -> Wv {
        debug_assert_eq!(self.h, other.h);
        let h = self.h as usize;
        let mut w = Wv::zero(h);
        for i in 0..h {
            let a = self.c[i];
            if a.is_zero() {
                continue;
            }
            for j in 0..h - i {
                let b = other.c[j];
                if !b.is_zero() {
                    w.c[i + j] = t.add(w.c[i + j], t.mul(a, b));
                }
            }
        }
        w
    }

    /// Scalar (field element) multiple.
    pub fn scale(&self, x: Fe, t: &FieldTower) -> Wv {
        let mut w = Wv::zero(self.h as usize);
        for i in 0..self.h as usize {
            w.c[i] = t.mul(self.c[i], x);
        }
        w
    }

    /// Multiplicative inverse; requires a unit.
    pub fn inv(&self, t: &FieldTower) -> Result<Wv> {
        if !self.is_unit() {
            return Err(Error::Param("inversion of a non-unit Witt vector".into()));
        }
        let h = self.h as usize;
        let mut w = Wv::zero(h);
        let a0 = t.inv(self.c[0]);
        w.c[0] = a0;
        // triangular solve: (self * w)_i = 0 for i >= 1
        for i in 1..h {
            let mut acc = Fe::ZERO;
            for j in 0..i {
                let a = self.c[i - j];
                if !a.is_zero() && !w.c[j].is_zero() {
                    acc = t.add(acc, t.mul(a, w.c[j]));
                }
            }
            w.c[i] = t.neg(t.mul(acc, a0));
        }
        Ok(w)
    }

    pub fn pow(&self, e: u64, t: &FieldTower) -> Wv {
        let mut acc = Wv::one(self.h as usize, t);
        let mut b = *self;
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&b, t);
            }
            b = b.mul(&b, t);
            e >>= 1;
        }
        acc
    }

    /// Verschiebung: shift coordinates up by one, truncating at `pi^h`.
    pub fn verschiebung(&self, t: &FieldTower) -> Wv {
        let _ = t;
        self.mul_pi_pow(1)
    }

    /// Multiplication by `pi^k` (shift up by `k`).
    pub fn mul_pi_pow(&self, k: usize) -> Wv {
        let h = self.h as usize;
        let mut w = Wv::zero(h);
        for i in 0..h.saturating_sub(k) {
            w.c[i + k] = self.c[i];
        }
        w
    }

    /// Exact division by `pi^k`; the low `k` coordinates must vanish. The
    /// top `k` coordinates of the result are unknown and set to zero, so use
    /// this only with enough precision slack (see [`Wv::lift`]).
    pub fn div_pi_pow_exact(&self, k: usize) -> Result<Wv> {
        let h = self.h as usize;
        for i in 0..k.min(h) {
            if !self.c[i].is_zero() {
                return Err(Error::Consistency("non-integral division by pi".into()));
            }
        }
        let mut w = Wv::zero(h);
        for i in k..h {
            w.c[i - k] = self.c[i];
        }
        Ok(w)
    }

    /// Coordinatewise Frobenius `x -> x^(q^e)`.
    pub fn frobenius(&self, e: i64, t: &FieldTower) -> Wv {
        let mut w = *self;
        for i in 0..self.h as usize {
            w.c[i] = t.frobenius(w.c[i], e);
        }
        w
    }

    /// Truncation to a lower level (a ring homomorphism `W_h -> W_{h'}`).
    pub fn reduce_level(&self, h_new: usize) -> Result<Wv> {
        if h_new > self.h as usize {
            return Err(Error::Param("reduce_level: target level above current".into()));
        }
        let mut w = Wv::zero(h_new);
        w.c[..h_new].copy_from_slice(&self.c[..h_new]);
        Ok(w)
    }

    /// Zero-padded lift to a higher precision (a choice of lift; retained
    /// windows of downstream computations do not depend on it).
    pub fn lift(&self, h_new: usize) -> Wv {
        assert!(h_new >= self.h as usize && h_new <= MAX_H);
        let mut w = Wv::zero(h_new);
        w.c[..self.h as usize].copy_from_slice(self.coeffs());
        w
    }

    /// All coefficients fixed by `x -> x^(q^e)`?
    pub fn is_frobenius_fixed(&self, e: i64, t: &FieldTower) -> bool {
        self.coeffs().iter().all(|&x| t.frobenius(x, e) == x)
    }

    /// The `h x h` matrix over the field realizing `x -> x * self` on
    /// `pi`-coefficients (multiplication by a fixed Witt scalar is linear in
    /// equal characteristic).
    pub fn mul_matrix(&self, t: &FieldTower) -> crate::linalg::MatrixFF {
        let h = self.h as usize;
        let mut m = crate::linalg::MatrixFF::zeros(h, h);
        for i in 0..h {
            for j in 0..=i {
                m[(i, j)] = self.c[i - j];
            }
        }
        let _ = t;
        m
    }
}

/// Enumerates all Witt vectors of length `h` with coordinates in `F_{q^m}`.
pub fn all_wv(t: &FieldTower, h: usize, m: u32) -> Vec<Wv> {
    let elems = t.subfield_elems(m);
    let mut out = Vec::new();
    let mut idx = alloc::vec![0usize; h];
    loop {
        let coeffs: Vec<Fe> = idx.iter().map(|&i| elems[i]).collect();
        out.push(Wv::from_coeffs(h, &coeffs));
        let mut pos = 0;
        loop {
            if pos == h {
                return out;
            }
            idx[pos] += 1;
            if idx[pos] == elems.len() {
                idx[pos] = 0;
                pos += 1;
            } else {
                break;
            }
        }
    }
}

/// The twisted ring scheme `W`: same additive group as `W_h`, with the
/// twisted multiplication `c_i = sum_j a_j^(q^(i-j)) b_(i-j)^(q^j)`
/// (the leading form of `V^i[a] * V^j[b] = V^(i+j)[a^(q^j) b^(q^i)]`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwistedWv(pub Wv);

impl TwistedWv {
    pub fn zero(h: usize) -> TwistedWv {
        TwistedWv(Wv::zero(h))
    }

    pub fn one(h: usize, t: &FieldTower) -> TwistedWv {
        TwistedWv(Wv::one(h, t))
    }

    pub fn add(&self, other: &TwistedWv, t: &FieldTower) -> TwistedWv {
        TwistedWv(self.0.add(&other.0, t))
    }

    pub fn mul(&self, other: &TwistedWv, t: &FieldTower) -> TwistedWv {
        debug_assert_eq!(self.0.h, other.0.h);
        let h = self.0.h as usize;
        let mut w = Wv::zero(h);
        for i in 0..h {
            let mut acc = Fe::ZERO;
            for j in 0..=i {
                let a = self.0.coeff(j);
                let b = other.0.coeff(i - j);
                if !a.is_zero() && !b.is_zero() {
                    let term = t.mul(t.frobenius(a, (i - j) as i64), t.frobenius(b, j as i64));
                    acc = t.add(acc, term);
                }
            }
            w.set_coeff(i, acc);
        }
        TwistedWv(w)
    }
}
