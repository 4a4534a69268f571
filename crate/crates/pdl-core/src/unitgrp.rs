//! Exact model of the finite abelian groups `W_h^x(F_{q^n})` and
//! `W_h^1(F_{q^n})`: an explicit basis adapted to the unit filtration
//! (Teichmueller part plus one-unit generators `1 + c pi^i` for `p` prime
//! to `i`), full discrete-log tables, and the structure maps (norm, level
//! truncation, Galois action) every character computation uses.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::field::{Fe, FieldTower};
use crate::witt::Wv;
use crate::{Error, Result};

/// Which unit group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitKind {
    /// `W_h^x(F_{q^n})`, order `(q^n - 1) q^{n(h-1)}`.
    Full,
    /// The one-units `W_h^1(F_{q^n})`, order `q^{n(h-1)}`.
    OneUnits,
}

/// The model: a fixed basis `gens` with `orders`, and a discrete-log table
/// over the full enumeration.
pub struct UnitGroupModel {
    pub n: u32,
    pub h: usize,
    pub kind: UnitKind,
    pub gens: Vec<Wv>,
    pub orders: Vec<u64>,
    /// Exponent `m*` of the group (lcm of the orders; 1 for the trivial group).
    pub exponent: u64,
    /// All elements, in odometer order over the basis exponents.
    pub elements: Vec<Wv>,
    dlog: BTreeMap<Wv, Vec<u64>>,
    /// For one-unit generators, their filtration level `i` (pi^i-units);
    /// the Teichmueller generator (if present) is level 0.
    pub gen_level: Vec<usize>,
}

impl UnitGroupModel {
    pub fn build(t: &FieldTower, n: u32, h: usize, kind: UnitKind, budget: u64) -> Result<UnitGroupModel> {
        let p = t.p;
        let qn = t.subfield_size(n);
        let expected = match kind {
            UnitKind::Full => (qn - 1) * qn.pow(h as u32 - 1),
            UnitKind::OneUnits => qn.pow(h as u32 - 1),
        };
        if expected > budget {
            return Err(Error::Budget(alloc::format!("unit group of order {expected} over budget")));
        }
        let mut gens = Vec::new();
        let mut orders = Vec::new();
        let mut gen_level = Vec::new();
        if kind == UnitKind::Full && qn > 2 {
            gens.push(Wv::constant(h, t.subfield_gen(n)));
            orders.push(qn - 1);
            gen_level.push(0);
        }
        // F_p-basis of F_{q^n}: powers of the subfield generator
        let s = (t.a * n) as usize;
        let gamma = t.subfield_gen(n);
        let mut basis = Vec::with_capacity(s);
        let mut cur = t.one();
        for _ in 0..s {
            basis.push(cur);
            cur = t.mul(cur, gamma);
        }
        for i in 1..h {
            if i as u64 % p == 0 {
                continue;
            }
            // order of 1 + c pi^i: p^{e}, e = min{e : i p^e >= h}
            let mut e = 0u32;
            let mut ip = i as u64;
            while ip < h as u64 {
                ip *= p;
                e += 1;
            }
            for &c in &basis {
                let mut w = Wv::one(h, t);
                w.set_coeff(i, c);
                gens.push(w);
                orders.push(p.pow(e));
                gen_level.push(i);
            }
        }
        let product: u64 = orders.iter().product();
        if product != expected {
            return Err(Error::Consistency("unit basis order product mismatch".into()));
        }
        // enumerate with incremental products and build the dlog table
        let mut elements = Vec::with_capacity(product as usize);
        let mut dlog = BTreeMap::new();
        let k = gens.len();
        let mut exps = vec![0u64; k];
        let mut cur = Wv::one(h, t);
        // multiplier applied when an odometer digit wraps: gen^{-(order-1)}
        let wrap: Vec<Wv> = gens
            .iter()
            .zip(&orders)
            .map(|(g, &o)| g.inv(t).unwrap().pow(o - 1, t))
            .collect();
        loop {
            if dlog.insert(cur, exps.clone()).is_some() {
                return Err(Error::Consistency("unit basis is not independent".into()));
            }
            elements.push(cur);
            let mut pos = 0;
            loop {
                if pos == k {
                    let exponent = orders.iter().fold(1u64, |a, &o| crate::field::lcm_u64(a, o));
                    return Ok(UnitGroupModel {
                        n,
                        h,
                        kind,
                        gens,
                        orders,
                        exponent,
                        elements,
                        dlog,
                        gen_level,
                    });
                }
                exps[pos] += 1;
                if exps[pos] == orders[pos] {
                    exps[pos] = 0;
                    cur = cur.mul(&wrap[pos], t);
                    pos += 1;
                } else {
                    cur = cur.mul(&gens[pos], t);
                    break;
                }
            }
        }
    }

    pub fn order(&self) -> u64 {
        self.elements.len() as u64
    }

    pub fn dlog(&self, w: &Wv) -> Result<&[u64]> {
        self.dlog
            .get(w)
            .map(|v| v.as_slice())
            .ok_or_else(|| Error::Param("element is not in the unit group model".into()))
    }

    pub fn contains(&self, w: &Wv) -> bool {
        self.dlog.contains_key(w)
    }

    /// Generators (as elements with their dlog vectors scaled by `p^e`) of
    /// the congruence subgroup `U^(j) = 1 + V^{j-1} W` for `j >= 2`, as
    /// pairs `(element, dlog vector)`.
    pub fn congruence_subgroup_gens(&self, t: &FieldTower, j: usize) -> Vec<(Wv, Vec<u64>)> {
        let mut out = Vec::new();
        let p = t.p;
        for (k, g) in self.gens.iter().enumerate() {
            let lvl = self.gen_level[k];
            if lvl == 0 {
                continue;
            }
            let mut pe = 1u64;
            let mut lift = lvl as u64;
            while lift < (j - 1) as u64 {
                pe *= p;
                lift *= p;
            }
            if pe >= self.orders[k] {
                continue; // the power is trivial
            }
            let elem = g.pow(pe, t);
            let mut d = vec![0u64; self.gens.len()];
            d[k] = pe;
            out.push((elem, d));
        }
        out
    }

    /// The subgroup generators relevant to "the whole group": the basis.
    pub fn all_gens(&self) -> Vec<(Wv, Vec<u64>)> {
        self.gens
            .iter()
            .enumerate()
            .map(|(k, g)| {
                let mut d = vec![0u64; self.gens.len()];
                d[k] = 1;
                (*g, d)
            })
            .collect()
    }

    /// Norm map `W_h^x(F_{q^n}) -> W_h^x(F_{q^m})` for `m | n`, composed
    /// with truncation to the target model's level.
    pub fn norm_then_truncate(&self, t: &FieldTower, w: &Wv, m: u32, h_target: usize) -> Wv {
        debug_assert!(self.n % m == 0);
        let mut acc = Wv::one(self.h, t);
        let mut cur = *w;
        for _ in 0..self.n / m {
            acc = acc.mul(&cur, t);
            cur = cur.frobenius(m as i64, t);
        }
        acc.reduce_level(h_target).unwrap()
    }
}
