//! A tower of finite fields realized inside one ambient field `F_{p^(a*N)}`.
//!
//! All subfields `F_{q^m}` (`q = p^a`, `m | N`) are the fixed fields of
//! `x -> x^(q^m)`, so there is no embedding bookkeeping: every element of
//! every field in play is an element of the ambient field. Arithmetic runs
//! on discrete-log tables (multiplication is index addition, addition goes
//! through Zech logarithms), which keeps the Frobenius-heavy inner loops at
//! a few table lookups per operation.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Hard cap on the ambient field size so the three `u32` tables stay small.
pub const MAX_AMBIENT: u64 = 1 << 21;

/// An element of the ambient field, encoded as `0` for zero and `1 + dlog`
/// otherwise. Only meaningful relative to the [`FieldTower`] that made it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fe(pub u32);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// One ambient finite field `F_{q^N} = F_{p^(a*N)}` with its subfield lattice.
///
/// The modulus is the lexicographically least monic primitive polynomial of
/// degree `a*N` over `F_p` (ordered by the coefficient tuple
/// `(c_{D-1}, ..., c_0)`), so outputs are reproducible and the class of `X`
/// is a generator of the multiplicative group.
pub struct FieldTower {
    pub p: u64,
    pub a: u32,
    pub n_ambient: u32,
    /// `p^(a*N)`, the ambient field size.
    pub size: u64,
    /// Modulus coefficients `c_0..c_D` over `F_p` (monic, `c_D = 1`).
    pub modulus: Vec<u64>,
    /// dlog -> packed coefficient vector (base-`p` digits).
    exp: Vec<u32>,
    /// packed -> `1 + dlog` (0 for the zero element).
    log: Vec<u32>,
    /// `zech[k] = dlog(1 + g^k)`, or `u32::MAX` when `1 + g^k = 0`.
    zech: Vec<u32>,
    /// dlog of `-1` (0 when `p = 2`).
    dlog_minus_one: u64,
    /// Per element of `F_p` (as integer), its `Fe` code.
    fp_elems: Vec<Fe>,
}

impl FieldTower {
    /// Builds the tower `F_{q^N}` with `q = p^a`.
    pub fn new(p: u64, a: u32, n_ambient: u32) -> Result<FieldTower> {
        if !is_prime(p) {
            return Err(Error::Param(alloc::format!("p = {p} is not prime")));
        }
        if a == 0 || n_ambient == 0 {
            return Err(Error::Param("a and N must be positive".into()));
        }
        let d = a * n_ambient;
        let mut size: u64 = 1;
        for _ in 0..d {
            size = size.checked_mul(p).ok_or_else(|| Error::Budget("field size overflow".into()))?;
            if size > MAX_AMBIENT {
                return Err(Error::Budget(alloc::format!(
                    "ambient field p^{d} exceeds table budget {MAX_AMBIENT}"
                )));
            }
        }
        let modulus = least_primitive_poly(p, d)?;
        let (exp, log, zech) = build_tables(p, d, size, &modulus);
        let order = size - 1;
        let dlog_minus_one = if p == 2 { 0 } else { order / 2 };
        // F_p^* is the unique subgroup of order p-1; index its elements.
        let step = order / (p - 1);
        let mut fp_elems = vec![Fe::ZERO; p as usize];
        // fp_elems[v] = the element of F_p representing v in 0..p. The
        // packed code of an F_p element is the value itself.
        for v in 1..p {
            let _ = step;
            let code = log[v as usize];
            debug_assert!(code != 0);
            fp_elems[v as usize] = Fe(code);
        }
        Ok(FieldTower { p, a, n_ambient, size, modulus, exp, log, zech, dlog_minus_one, fp_elems })
    }

    /// `q = p^a`.
    pub fn q(&self) -> u64 {
        self.p.pow(self.a)
    }

    /// Order of the multiplicative group.
    #[inline]
    pub fn order(&self) -> u64 {
        self.size - 1
    }

    /// The fixed generator (class of `X`).
    pub fn gen(&self) -> Fe {
        Fe(2) // dlog 1
    }

    #[inline]
    pub fn zero(&self) -> Fe {
        Fe::ZERO
    }

    #[inline]
    pub fn one(&self) -> Fe {
        Fe(1)
    }

    /// Element `g^k`.
    #[inline]
    pub fn from_dlog(&self, k: u64) -> Fe {
        Fe((k % self.order()) as u32 + 1)
    }

    /// Discrete log of a nonzero element.
    #[inline]
    pub fn dlog(&self, x: Fe) -> u64 {
        debug_assert!(!x.is_zero());
        (x.0 - 1) as u64
    }

    /// The element of the prime field representing `v mod p`.
    pub fn from_fp(&self, v: u64) -> Fe {
        self.fp_elems[(v % self.p) as usize]
    }

    /// For an element of the prime field, its integer value in `0..p`.
    pub fn to_fp(&self, x: Fe) -> u64 {
        if x.is_zero() {
            return 0;
        }
        let packed = self.exp[(x.0 - 1) as usize] as u64;
        debug_assert!(packed < self.p, "element is not in the prime field");
        packed
    }

    /// Packed base-`p` coefficient vector of `x` over `F_p`.
    pub fn coeffs_packed(&self, x: Fe) -> u64 {
        if x.is_zero() {
            0
        } else {
            self.exp[(x.0 - 1) as usize] as u64
        }
    }

    /// Coefficient vector over `F_p` (length `a*N`), low degree first.
    pub fn coeffs(&self, x: Fe) -> Vec<u64> {
        let d = (self.a * self.n_ambient) as usize;
        let mut packed = self.coeffs_packed(x);
        let mut out = Vec::with_capacity(d);
        for _ in 0..d {
            out.push(packed % self.p);
            packed /= self.p;
        }
        out
    }

    /// Element from a packed base-`p` coefficient vector.
    pub fn from_packed(&self, packed: u64) -> Fe {
        Fe(self.log[packed as usize])
    }

    /// Element from coefficients over `F_p`, low degree first.
    pub fn from_coeffs(&self, coeffs: &[u64]) -> Fe {
        let mut packed: u64 = 0;
        for &c in coeffs.iter().rev() {
            packed = packed * self.p + (c % self.p);
        }
        self.from_packed(packed)
    }

    #[inline]
    pub fn add(&self, x: Fe, y: Fe) -> Fe {
        if x.is_zero() {
            return y;
        }
        if y.is_zero() {
            return x;
        }
        let dx = (x.0 - 1) as u64;
        let dy = (y.0 - 1) as u64;
        // x + y = g^dx * (1 + g^(dy-dx))
        let e = (dy + self.order() - dx) % self.order();
        let z = self.zech[e as usize];
        if z == u32::MAX {
            return Fe::ZERO;
        }
        Fe(((dx + z as u64) % self.order()) as u32 + 1)
    }

    #[inline]
    pub fn neg(&self, x: Fe) -> Fe {
        if x.is_zero() || self.p == 2 {
            return x;
        }
        let d = (x.0 - 1) as u64;
        Fe(((d + self.dlog_minus_one) % self.order()) as u32 + 1)
    }

    #[inline]
    pub fn sub(&self, x: Fe, y: Fe) -> Fe {
        self.add(x, self.neg(y))
    }

    #[inline]
    pub fn mul(&self, x: Fe, y: Fe) -> Fe {
        if x.is_zero() || y.is_zero() {
            return Fe::ZERO;
        }
        let d = (x.0 - 1) as u64 + (y.0 - 1) as u64;
        Fe((d % self.order()) as u32 + 1)
    }

    #[inline]
    pub fn inv(&self, x: Fe) -> Fe {
        assert!(!x.is_zero(), "inversion of zero");
        let d = (x.0 - 1) as u64;
        Fe(((self.order() - d) % self.order()) as u32 + 1)
    }

    #[inline]
    pub fn div(&self, x: Fe, y: Fe) -> Fe {
        self.mul(x, self.inv(y))
    }

    /// `x^e` for a signed exponent.
    pub fn pow(&self, x: Fe, e: i64) -> Fe {
        if x.is_zero() {
            assert!(e > 0, "0^e needs e > 0");
            return Fe::ZERO;
        }
        let ord = self.order() as i128;
        let d = (x.0 - 1) as i128;
        let k = (d * (e as i128)).rem_euclid(ord) as u64;
        Fe(k as u32 + 1)
    }

    /// Frobenius `x -> x^(q^e)`; `e` may be negative.
    pub fn frobenius(&self, x: Fe, e: i64) -> Fe {
        if x.is_zero() {
            return x;
        }
        let ord = self.order();
        let em = (e.rem_euclid(self.n_ambient as i64 * self.a as i64)) as u32;
        // q^em mod ord
        let mut f: u64 = 1;
        let q = self.q() % ord;
        for _ in 0..em {
            f = (f as u128 * q as u128 % ord as u128) as u64;
        }
        let d = (x.0 - 1) as u128 * f as u128 % ord as u128;
        Fe(d as u32 + 1)
    }

    /// `x -> x^(p^e)` (absolute Frobenius), `e` may be negative.
    pub fn frobenius_p(&self, x: Fe, e: i64) -> Fe {
        if x.is_zero() {
            return x;
        }
        let ord = self.size - 1;
        let d_amb = (self.a * self.n_ambient) as i64;
        let em = e.rem_euclid(d_amb) as u32;
        let mut f: u64 = 1;
        for _ in 0..em {
            f = (f as u128 * (self.p % ord) as u128 % ord as u128) as u64;
        }
        let d = (x.0 - 1) as u128 * f as u128 % ord as u128;
        Fe(d as u32 + 1)
    }

    /// Whether `x` lies in the subfield `F_{q^m}` (`m | N` not required, the
    /// test is simply `x^{ q^m } = x`).
    pub fn in_subfield(&self, x: Fe, m: u32) -> bool {
        self.frobenius(x, m as i64) == x
    }

    /// Trace from `F_{q^n}` to `F_{q^m}`; requires `m | n` and `x` in `F_{q^n}`.
    pub fn trace_to(&self, x: Fe, n: u32, m: u32) -> Result<Fe> {
        if m == 0 || n % m != 0 {
            return Err(Error::Param(alloc::format!("trace_to: {m} does not divide {n}")));
        }
        debug_assert!(self.in_subfield(x, n), "trace_to: element not in F_{{q^n}}");
        let mut acc = Fe::ZERO;
        let mut t = x;
        for _ in 0..n / m {
            acc = self.add(acc, t);
            t = self.frobenius(t, m as i64);
        }
        debug_assert!(self.in_subfield(acc, m));
        Ok(acc)
    }

    /// Norm from `F_{q^n}` to `F_{q^m}`; requires `m | n` and `x` in `F_{q^n}`.
    pub fn norm_to(&self, x: Fe, n: u32, m: u32) -> Result<Fe> {
        if m == 0 || n % m != 0 {
            return Err(Error::Param(alloc::format!("norm_to: {m} does not divide {n}")));
        }
        debug_assert!(self.in_subfield(x, n), "norm_to: element not in F_{{q^n}}");
        let mut acc = self.one();
        let mut t = x;
        for _ in 0..n / m {
            acc = self.mul(acc, t);
            t = self.frobenius(t, m as i64);
        }
        debug_assert!(acc.is_zero() || self.in_subfield(acc, m));
        Ok(acc)
    }

    /// Absolute trace of an element of `F_{q^m}` down to `F_p`, as an integer
    /// in `0..p`.
    pub fn abs_trace_fp(&self, x: Fe, m: u32) -> u64 {
        debug_assert!(self.in_subfield(x, m));
        let deg = self.a * m; // degree of F_{q^m} over F_p
        let mut acc = Fe::ZERO;
        let mut t = x;
        for _ in 0..deg {
            acc = self.add(acc, t);
            t = self.frobenius_p(t, 1);
        }
        self.to_fp(acc)
    }

    /// Number of elements of the subfield `F_{q^m}`.
    pub fn subfield_size(&self, m: u32) -> u64 {
        self.p.pow(self.a * m)
    }

    /// All elements of `F_{q^m}` (zero first, then powers of the subfield
    /// generator in dlog order).
    pub fn subfield_elems(&self, m: u32) -> Vec<Fe> {
        let sz = self.subfield_size(m);
        assert!(self.order() % (sz - 1) == 0, "F_{{q^m}} is not a subfield of the ambient field");
        let step = self.order() / (sz - 1);
        let mut out = Vec::with_capacity(sz as usize);
        out.push(Fe::ZERO);
        for i in 0..sz - 1 {
            out.push(self.from_dlog(i * step));
        }
        out
    }

    /// A fixed generator of `F_{q^m}^x`.
    pub fn subfield_gen(&self, m: u32) -> Fe {
        let sz = self.subfield_size(m);
        self.from_dlog(self.order() / (sz - 1))
    }

    /// Multiplicative order of a nonzero element.
    pub fn mult_order(&self, x: Fe) -> u64 {
        assert!(!x.is_zero());
        let d = self.dlog(x);
        let ord = self.order();
        ord / gcd_u64(d, ord)
    }

    /// JSON-able description block shared by all higher-level outputs.
    pub fn describe(&self) -> TowerDesc {
        TowerDesc {
            p: self.p,
            a: self.a,
            n_ambient: self.n_ambient,
            modulus_coeffs: self.modulus.clone(),
        }
    }
}

/// Serializable tower description: `{p, a, N, modulus_coeffs}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TowerDesc {
    pub p: u64,
    pub a: u32,
    pub n_ambient: u32,
    pub modulus_coeffs: Vec<u64>,
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn lcm_u64(a: u64, b: u64) -> u64 {
    a / gcd_u64(a, b) * b
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Prime factors of `n`, without multiplicity.
pub fn prime_factors(n: u64) -> Vec<u64> {
    let mut n = n;
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Divisors of `n` in increasing order.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            if d != n / d {
                out.push(n / d);
            }
        }
        d += 1;
    }
    out.sort_unstable();
    out
}

// --- modulus generation (slow path, runs once per tower) ---

fn poly_mulmod(p: u64, a: &[u64], b: &[u64], m: &[u64]) -> Vec<u64> {
    let d = m.len() - 1;
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + ai * bj) % p;
        }
    }
    // reduce mod m (monic)
    for i in (d..prod.len()).rev() {
        let c = prod[i];
        if c == 0 {
            continue;
        }
        prod[i] = 0;
        for (k, &mk) in m.iter().enumerate().take(d) {
            let idx = i - d + k;
            prod[idx] = (prod[idx] + c * (p - mk % p) % p) % p;
        }
    }
    prod.truncate(d);
    prod.resize(d, 0);
    prod
}

fn poly_powmod(p: u64, base: &[u64], mut e: u64, m: &[u64]) -> Vec<u64> {
    let d = m.len() - 1;
    let mut result = vec![0u64; d];
    result[0] = 1;
    let mut b = base.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            result = poly_mulmod(p, &result, &b, m);
        }
        b = poly_mulmod(p, &b, &b, m);
        e >>= 1;
    }
    result
}

fn is_one(v: &[u64]) -> bool {
    v.first() == Some(&1) && v.iter().skip(1).all(|&c| c == 0)
}

/// The lexicographically least monic primitive polynomial of degree `d` over
/// `F_p`, ordered by the tuple `(c_{d-1}, ..., c_1, c_0)`.
fn least_primitive_poly(p: u64, d: u32) -> Result<Vec<u64>> {
    let size = p.pow(d);
    let order = size - 1;
    let factors = prime_factors(order);
    let x = vec![0u64, 1];
    // iterate coefficient tuples (c_{d-1},...,c_0) in lex order
    let dd = d as usize;
    let total = p.pow(d);
    for it in 0..total {
        // decode: it's digits are (c_{d-1},...,c_0) with c_0 the least
        // significant position in lex order, i.e. fastest-varying.
        let mut coeffs = vec![0u64; dd + 1];
        coeffs[dd] = 1;
        let mut v = it;
        for i in 0..dd {
            coeffs[i] = v % p;
            v /= p;
        }
        if coeffs[0] == 0 {
            continue; // reducible: x divides
        }
        let m = &coeffs;
        // primitivity: ord(x) = p^d - 1 in F_p[X]/m forces m irreducible.
        if !is_one(&poly_powmod(p, &x, order, m)) {
            continue;
        }
        if factors.iter().any(|&r| is_one(&poly_powmod(p, &x, order / r, m))) {
            continue;
        }
        return Ok(coeffs);
    }
    Err(Error::Consistency(alloc::format!("no primitive polynomial of degree {d} over F_{p}")))
}

fn build_tables(p: u64, d: u32, size: u64, modulus: &[u64]) -> (Vec<u32>, Vec<u32>, Vec<u32>) {
    let order = (size - 1) as usize;
    let dd = d as usize;
    let mut exp = vec![0u32; order];
    let mut log = vec![0u32; size as usize];
    // powers of x with coefficient vectors, packed base p
    let mut cur = vec![0u64; dd];
    cur[0] = 1;
    let pack = |c: &[u64]| -> u64 {
        let mut v = 0u64;
        for &ci in c.iter().rev() {
            v = v * p + ci;
        }
        v
    };
    for k in 0..order {
        let packed = pack(&cur);
        exp[k] = packed as u32;
        debug_assert_eq!(log[packed as usize], 0, "modulus is not primitive");
        log[packed as usize] = k as u32 + 1;
        // multiply by x
        let carry = cur[dd - 1];
        for i in (1..dd).rev() {
            cur[i] = cur[i - 1];
        }
        cur[0] = 0;
        if carry != 0 {
            for i in 0..dd {
                cur[i] = (cur[i] + carry * (p - modulus[i] % p) % p) % p;
            }
        }
    }
    // zech[k] = dlog(1 + g^k): add 1 to digit 0 of exp[k]
    let mut zech = vec![0u32; order];
    for k in 0..order {
        let packed = exp[k] as u64;
        let c0 = packed % p;
        let packed1 = packed - c0 + (c0 + 1) % p;
        let l = log[packed1 as usize];
        zech[k] = if l == 0 { u32::MAX } else { l - 1 };
    }
    (exp, log, zech)
}
