//! The twisted fixed-point counting engine and the verification suites
//! built on it: eigenspace dimensions, eigenspace characters and inner
//! products, very-regular traces, maximality counts, and the
//! stratification-comparison evidence harness.
//!
//! Counts are exact: a twisted count is the number of coordinate vectors
//! `v` with `g (v^(Q) . t) = v` (the fixed points of the group translate
//! composed with the `Q = q^{ns}`-power Frobenius), computed by solving the
//! semilinear system and filtering the `q^{nsD}`-element solution space
//! through the exact membership predicates. Traces on the single
//! nonvanishing cohomological degree are extracted with the Frobenius
//! scalar `(-1)^{r_chi} q^{n r_chi/2}`; the q-power division must be exact
//! or the engine reports a hard failure.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::chars::{chi_invariants, degree_data, Character, DegreeData};
use crate::cyclo::{Cyc, CycloRing};
use crate::field::{Fe, FieldTower};
use crate::linalg::{for_each_solution, solve_semilinear, MatrixFF};
use crate::params::GroupParams;
use crate::parahoric::{MatW, Rep};
use crate::unitgrp::{UnitGroupModel, UnitKind};
use crate::variety::{
    is_in_lr_g1, is_in_xh, is_in_xh1, lambda_matrix, stratum_label, Shape, XVariant,
};
use crate::witt::Wv;
use crate::{Error, Result};

/// The engine: an instance plus the ambient tower sized for every field the
/// twisted counts can touch (`F_{q^{n s M}}` for `s <= 2` and `M` up to the
/// exponent of the acting group).
pub struct Engine {
    pub p: GroupParams,
    pub t: FieldTower,
    pub shape: Shape,
    pub max_s: u32,
}

impl Engine {
    /// `max_s` is the largest Frobenius power multiplier the engine will
    /// serve; the ambient field is sized as `F_{q^{n s E}}` where `E` is
    /// the exponent of the acting pro-unipotent groups,
    /// `p^{ceil log_p(n0(h-1)+1)}` (the radical filtration depth).
    pub fn new(p: GroupParams, max_s: u32) -> Result<Engine> {
        let depth = (p.n0 as u64) * (p.h as u64 - 1) + 1;
        let mut pa = 1u64;
        while pa < depth {
            pa *= p.p;
        }
        let mut degrees = alloc::vec![p.n];
        for s in 1..=max_s {
            degrees.push(p.n * s * pa as u32);
        }
        let t = p.tower_for(&degrees)?;
        Ok(Engine { p, t, shape: Shape::lattice(p), max_s })
    }

    /// The matrix over slot coordinates of `v -> g (v . u)`.
    pub fn action_matrix(&self, g: &MatW, u: &Wv) -> MatrixFF {
        let slots = self.shape.slots();
        let d = slots.len();
        let mut m = MatrixFF::zeros(d, d);
        for (col, &(ci, cc)) in slots.iter().enumerate() {
            let mut v = self.shape.zero_point();
            v[ci].set_coeff(cc, self.t.one());
            let w = crate::variety::act(&self.shape, &self.t, g, u, &v);
            for (row, &(ri, rc)) in slots.iter().enumerate() {
                m[(row, col)] = w[ri].coeff(rc);
            }
        }
        m
    }

    fn assemble(&self, slots: &[(usize, usize)], coords: &[Fe]) -> Vec<Wv> {
        let mut v = self.shape.zero_point();
        for (&(ci, cc), &x) in slots.iter().zip(coords) {
            v[ci].set_coeff(cc, x);
        }
        v
    }
}

/// What a twisted count should classify.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classify {
    /// Count points of `X_h^1` only.
    Xh1,
    /// Count points of `X_h` (total).
    Xh,
    /// Count points of `X_h` broken down by stratum label.
    ByStratum,
}

/// An exact twisted fixed-point count record.
#[derive(Debug, Clone)]
pub struct TwistedCount {
    pub s: u32,
    pub total: u64,
    pub by_stratum: Vec<(u32, u64)>,
}

impl TwistedCount {
    /// Count of the closure `X_h^{(r)}` (labels divisible by `r`).
    pub fn closure_count(&self, r: u32) -> u64 {
        self.by_stratum.iter().filter(|(l, _)| l % r == 0).map(|(_, c)| c).sum()
    }
}

/// Counts `#{v : g (v^(q^{ns}) . u) = v}` intersected with the selected
/// point set. `g` must be `F`-fixed and `u` must lie in `T_h(F_q)` (as a
/// scalar, entries sigma^n-fixed).
pub fn twisted_count(
    e: &Engine,
    g: &MatW,
    u: &Wv,
    s: u32,
    classify: Classify,
) -> Result<TwistedCount> {
    let p = &e.p;
    let t = &e.t;
    // v^{(Q)} = g^{-1} (v . u^{-1}): A = action matrix of (g^{-1}, u^{-1})
    let ginv = g.inverse(p, t)?;
    let uinv = u.inv(t)?;
    let a = e.action_matrix(&ginv, &uinv);
    let deg = p.n * s;
    let sb = solve_semilinear(&a, deg, t)?;
    let slots = e.shape.slots();
    let mut total = 0u64;
    let mut by_stratum: Vec<(u32, u64)> = Vec::new();
    let mut err: Option<Error> = None;
    for_each_solution(t, &sb, |coords| {
        if err.is_some() {
            return;
        }
        let v = e.assemble(&slots, coords);
        let res = match classify_point(e, &v, classify) {
            Ok(r) => r,
            Err(er) => {
                err = Some(er);
                return;
            }
        };
        if let Some(label) = res {
            total += 1;
            if classify == Classify::ByStratum {
                match by_stratum.binary_search_by_key(&label, |&(l, _)| l) {
                    Ok(i) => by_stratum[i].1 += 1,
                    Err(i) => by_stratum.insert(i, (label, 1)),
                }
            }
        }
    });
    if let Some(er) = err {
        return Err(er);
    }
    Ok(TwistedCount { s, total, by_stratum })
}

fn classify_point(e: &Engine, v: &[Wv], classify: Classify) -> Result<Option<u32>> {
    match classify {
        Classify::Xh1 => Ok(if is_in_xh1(&e.shape, &e.t, v)? { Some(1) } else { None }),
        Classify::Xh => Ok(if is_in_xh(&e.shape, &e.t, v, XVariant::Xh)? { Some(1) } else { None }),
        Classify::ByStratum => {
            if is_in_xh(&e.shape, &e.t, v, XVariant::Xh)? {
                Ok(Some(stratum_label(&e.shape, &e.t, v, Rep::Coxeter)?))
            } else {
                Ok(None)
            }
        }
    }
}

/// Counts the honest fixed points of the `(g, u)`-action (no Frobenius
/// twist) on the selected subvariety, enumerating the fixed subspace over
/// `F_{q^{n m}}` for `m = 1, 2` and asserting stability (the fixed locus of
/// a finite-order automorphism with very regular semisimple part is finite
/// and rational at small level).
pub fn action_fixed_count<F: Fn(&Engine, &[Wv]) -> Result<bool>>(
    e: &Engine,
    g: &MatW,
    u: &Wv,
    member: F,
) -> Result<u64> {
    let t = &e.t;
    let a = e.action_matrix(g, u);
    let d = a.rows;
    // kernel of (A - I): the fixed subspace
    let mut am = a.clone();
    for i in 0..d {
        am[(i, i)] = t.sub(am[(i, i)], t.one());
    }
    let kernel = am.kernel(t);
    let slots = e.shape.slots();
    let mut counts = [0u64; 2];
    for (mi, m_ext) in [1u32, 2].iter().enumerate() {
        let scalars = t.subfield_elems(e.p.n * m_ext);
        let k = kernel.len();
        let mut idx = vec![0usize; k];
        loop {
            let mut coords = vec![Fe::ZERO; d];
            for (ki, kv) in kernel.iter().enumerate() {
                let c = scalars[idx[ki]];
                if !c.is_zero() {
                    for (x, y) in coords.iter_mut().zip(kv) {
                        *x = t.add(*x, t.mul(c, *y));
                    }
                }
            }
            let v = e.assemble(&slots, &coords);
            // fixed-point check (the kernel can over-parametrize: distinct
            // kernel combinations may coincide as points only if the basis
            // were dependent, which it is not)
            if member(e, &v)? {
                counts[mi] += 1;
            }
            let mut pos = 0;
            loop {
                if pos == k {
                    break;
                }
                idx[pos] += 1;
                if idx[pos] == scalars.len() {
                    idx[pos] = 0;
                    pos += 1;
                } else {
                    break;
                }
            }
            if idx.iter().all(|&x| x == 0) {
                break;
            }
        }
    }
    if counts[0] != counts[1] {
        return Err(Error::Consistency(alloc::format!(
            "fixed locus not stable across field extensions: {} vs {}",
            counts[0],
            counts[1]
        )));
    }
    Ok(counts[0])
}

/// The full torus `T_h(F_q)` as unit-group scalars, via the model.
pub fn torus_units(e: &Engine, budget: u64) -> Result<UnitGroupModel> {
    UnitGroupModel::build(&e.t, e.p.n, e.p.h, UnitKind::Full, budget)
}

pub fn torus_one_units(e: &Engine, budget: u64) -> Result<UnitGroupModel> {
    UnitGroupModel::build(&e.t, e.p.n, e.p.h, UnitKind::OneUnits, budget)
}

/// Eigenspace dimension of `H^{r_chi}[chi]` from twisted counts:
/// `(1/(q^{n r/2} #T^1)) sum_t chi(t)^{-1} #S((1,t), 1)`, an exact integer
/// that must match the closed-form dimension.
pub struct EigenReport {
    pub per_chi: Vec<(Character, DegreeData, BigInt, BigInt)>,
    pub counts_match: bool,
}

pub fn eigenspace_dims(e: &Engine, budget: u64) -> Result<EigenReport> {
    let p = &e.p;
    let t = &e.t;
    let model1 = torus_one_units(e, budget)?;
    let id = MatW::identity(p, t);
    // S((1,t),1) for every t in T^1(F_q)
    let mut counts = Vec::with_capacity(model1.elements.len());
    for u in &model1.elements {
        let c = twisted_count(e, &id, u, 1, Classify::Xh1)?;
        counts.push(c.total);
    }
    let ring = CycloRing::new(model1.exponent.max(2));
    let mut per_chi = Vec::new();
    let mut counts_match = true;
    for chi in Character::all(&model1) {
        let inv = chi_invariants(&model1, t, &chi)?;
        let data = degree_data(p, &inv)?;
        // sum_t chi(t)^{-1} S(1,t)
        let mut acc = ring.zero();
        for (u, &c) in model1.elements.iter().zip(&counts) {
            let val = chi.inv(&model1).eval(&model1, u, &ring)?;
            acc = ring.add(&acc, &ring.scale(&val, &BigInt::from(c)));
        }
        let total = ring
            .as_int(&acc)
            .ok_or_else(|| Error::Consistency("chi-projected count is not rational".into()))?;
        // divide by #T^1 * q^{n r/2}
        let denom = BigInt::from(model1.order())
            * BigInt::from(p.q).pow((p.n as i64 * data.r_chi / 2) as u32);
        let (quo, rem) = (&total / &denom, &total % &denom);
        if !rem.is_zero() {
            return Err(Error::Consistency(
                "eigenspace dimension is not integral (engine bug)".into(),
            ));
        }
        let formula = crate::chars::dim_value(p, &data);
        if quo != formula {
            counts_match = false;
        }
        per_chi.push((chi, data, quo, formula));
    }
    Ok(EigenReport { per_chi, counts_match })
}

/// The trace `Tr(g; H^{r_chi}(X_h^1)[chi])` as an exact cyclotomic value,
/// extracted at Frobenius power `s` (values at different `s` must agree).
pub fn eigenspace_character(
    e: &Engine,
    model1: &UnitGroupModel,
    chi: &Character,
    data: &DegreeData,
    g: &MatW,
    s: u32,
    ring: &CycloRing,
) -> Result<Cyc> {
    let p = &e.p;
    let mut acc = ring.zero();
    let chi_inv = chi.inv(model1);
    for u in &model1.elements {
        let c = twisted_count(e, g, u, s, Classify::Xh1)?;
        let val = chi_inv.eval(model1, u, ring)?;
        acc = ring.add(&acc, &ring.scale(&val, &BigInt::from(c.total)));
    }
    // divide by #T^1 q^{n s r/2} and apply the sign (-1)^{r(s+1)}
    let denom = BigInt::from(model1.order())
        * BigInt::from(p.q).pow((p.n as i64 * s as i64 * data.r_chi / 2) as u32);
    let out = ring
        .div_exact(&acc, &denom)
        .ok_or_else(|| Error::Consistency("trace extraction is not integral".into()))?;
    let sign_neg = (data.r_chi * (s as i64 + 1)) % 2 != 0;
    Ok(if sign_neg { ring.neg(&out) } else { out })
}

/// Inner products of all eigenspace characters over `G_h^1(F_q)`:
/// must be the identity matrix (irreducibility and pairwise
/// non-isomorphism).
pub struct InnerProductReport {
    pub chars: usize,
    pub gram_is_identity: bool,
    pub frobenius_consistent: bool,
}

pub fn irreducibility_check(e: &Engine, budget: u64) -> Result<InnerProductReport> {
    let p = &e.p;
    let t = &e.t;
    let model1 = torus_one_units(e, budget)?;
    let g1 = crate::parahoric::enumerate_group(p, t, Rep::Coxeter, crate::parahoric::Subgroup::Gh1, budget)?;
    let ring = CycloRing::new(model1.exponent.max(2));
    let chis = Character::all(&model1);
    let mut datas = Vec::new();
    for chi in &chis {
        let inv = chi_invariants(&model1, t, chi)?;
        datas.push(degree_data(p, &inv)?);
    }
    // trace tables at s = 1, cross-checked at s = 2 on the identity and the
    // first nontrivial element
    let mut tables: Vec<Vec<Cyc>> = Vec::new();
    for (chi, data) in chis.iter().zip(&datas) {
        let mut row = Vec::new();
        for g in &g1 {
            row.push(eigenspace_character(e, &model1, chi, data, g, 1, &ring)?);
        }
        tables.push(row);
    }
    let mut frobenius_consistent = true;
    for (chi, data) in chis.iter().zip(&datas).take(3) {
        for g in g1.iter().take(2) {
            let v1 = eigenspace_character(e, &model1, chi, data, g, 1, &ring)?;
            let v2 = eigenspace_character(e, &model1, chi, data, g, 2, &ring)?;
            if v1 != v2 {
                frobenius_consistent = false;
            }
        }
    }
    // Gram matrix
    let order = BigInt::from(g1.len() as u64);
    let mut gram_is_identity = true;
    for i in 0..chis.len() {
        for j in 0..chis.len() {
            let mut acc = ring.zero();
            for k in 0..g1.len() {
                let prod = ring.mul(&tables[i][k], &ring.conj(&tables[j][k]));
                acc = ring.add(&acc, &prod);
            }
            let v = ring
                .as_int(&acc)
                .ok_or_else(|| Error::Consistency("inner product is not rational".into()))?;
            let (quo, rem) = (&v / &order, &v % &order);
            if !rem.is_zero() {
                return Err(Error::Consistency("inner product is not integral".into()));
            }
            let expect = if i == j { BigInt::from(1) } else { BigInt::zero() };
            if quo != expect {
                gram_is_identity = false;
            }
        }
    }
    Ok(InnerProductReport { chars: chis.len(), gram_is_identity, frobenius_consistent })
}

/// Very-regular trace check (the `r = n'` sector): for every very regular
/// `g` in `T_h(F_q)` and every character `theta` of `T_h(F_q)`, the engine
/// trace on `X_h cap L^{(r)} G_h^1` equals the Galois sum
/// `sum_{gamma in Gal(L/k)[n'/r]} theta^gamma(g)`.
pub struct VeryRegularReport {
    pub very_regular_elements: usize,
    pub characters: usize,
    pub mismatches: u64,
}

pub fn very_regular_check(e: &Engine, r: u32, budget: u64) -> Result<VeryRegularReport> {
    let p = &e.p;
    let t = &e.t;
    if p.n_prime % r != 0 {
        return Err(Error::Param("r must divide n'".into()));
    }
    let model = torus_units(e, budget)?;
    let ring = CycloRing::new(model.exponent.max(2));
    // fixed-point counts Fix((iota(g), u)) on X_h cap L^(r) G^1, for g very
    // regular and all u; cache per (g,u)
    let very_regular: Vec<&Wv> = model
        .elements
        .iter()
        .filter(|w| {
            let res = w.coeff(0);
            if res.is_zero() {
                return false;
            }
            // residue has trivial Galois stabilizer
            (1..p.n).all(|m| p.n % m != 0 || t.frobenius(res, m as i64) != res)
        })
        .collect();
    let member = |e: &Engine, v: &[Wv]| -> Result<bool> {
        Ok(is_in_xh(&e.shape, &e.t, v, XVariant::Xh)? && is_in_lr_g1(&e.shape, &e.t, v, r)?)
    };
    let mut mismatches = 0u64;
    let thetas = Character::all(&model);
    for g in &very_regular {
        let gm = MatW::torus_embed(p, t, g);
        // counts for all u
        let mut fixes = Vec::with_capacity(model.elements.len());
        for u in &model.elements {
            fixes.push(action_fixed_count(e, &gm, u, member)?);
        }
        for theta in &thetas {
            // engine trace: (1/#T) sum_u theta(u)^{-1} Fix((g,u))
            let mut acc = ring.zero();
            let ti = theta.inv(&model);
            for (u, &c) in model.elements.iter().zip(&fixes) {
                if c != 0 {
                    let val = ti.eval(&model, u, &ring)?;
                    acc = ring.add(&acc, &ring.scale(&val, &BigInt::from(c)));
                }
            }
            let engine_trace = ring
                .div_exact(&acc, &BigInt::from(model.order()))
                .ok_or_else(|| Error::Consistency("trace is not integral over #T".into()))?;
            // Galois sum over the order-n'/r subgroup of Gal(L/k)
            let step = (p.n * r / p.n_prime) as i64;
            let mut gal = ring.zero();
            for k in 0..(p.n_prime / r) as i64 {
                let tw = theta.galois_twist(&model, t, step * k)?;
                gal = ring.add(&gal, &tw.eval(&model, g, &ring)?);
            }
            if engine_trace != gal {
                mismatches += 1;
            }
        }
    }
    Ok(VeryRegularReport {
        very_regular_elements: very_regular.len(),
        characters: thetas.len(),
        mismatches,
    })
}

/// Maximality: `#X_h^1(F_{q^n}) = q^{n^2(h-1)}` exactly, plus the
/// character-side identity.
pub struct MaximalityReport {
    pub expected: u64,
    pub got: u64,
    pub char_side: bool,
}

impl MaximalityReport {
    pub fn pass(&self) -> bool {
        self.expected == self.got && self.char_side
    }
}

pub fn maximality_check(e: &Engine, budget: u64) -> Result<MaximalityReport> {
    let p = &e.p;
    let id = MatW::identity(p, &e.t);
    let one = Wv::one(p.h, &e.t);
    let c = twisted_count(e, &id, &one, 1, Classify::Xh1)?;
    let expected = p.q.pow(p.n * p.n * (p.h as u32 - 1));
    let model1 = torus_one_units(e, budget)?;
    let char_side = crate::chars::maximality_identity(p, &model1, &e.t)?;
    Ok(MaximalityReport { expected, got: c.total, char_side })
}

/// Evidence harness for the stratification comparison: chi-projected
/// twisted counts on `X_h` versus its stratum closure `X_h^{(r)}`, for each
/// `s` and sampled `g`. The projection runs over the one-unit torus slice
/// with a character `chi` of `T_h^1(F_q)`: the chi-projection aggregates
/// exactly the theta-sectors restricting to chi, and when chi has trivial
/// stabilizer every such sector satisfies the comparison hypotheses, so a
/// Frobenius-equivariant isomorphism forces every difference to vanish.
/// (The full-torus theta-projection would need twisted counts at
/// Teichmueller-order twists whose solution fields exceed any table
/// budget; the one-unit twists stay in `F_{q^{ns p^a}}`.)
pub struct CxhEvidence {
    pub s: u32,
    pub g_index: usize,
    pub full_projection: Cyc,
    pub closure_projection: Cyc,
    pub difference_is_zero: bool,
}

pub fn cxh_evidence(
    e: &Engine,
    chi: &Character,
    model1: &UnitGroupModel,
    r: u32,
    s_list: &[u32],
    g_samples: &[MatW],
) -> Result<Vec<CxhEvidence>> {
    let ring = CycloRing::new(model1.exponent.max(2));
    let chi_inv = chi.inv(model1);
    let mut out = Vec::new();
    for &s in s_list {
        for (gi, g) in g_samples.iter().enumerate() {
            let mut acc_full = ring.zero();
            let mut acc_closure = ring.zero();
            for u in &model1.elements {
                let c = twisted_count(e, g, u, s, Classify::ByStratum)?;
                let closure = c.closure_count(r);
                let val = chi_inv.eval(model1, u, &ring)?;
                acc_full = ring.add(&acc_full, &ring.scale(&val, &BigInt::from(c.total)));
                acc_closure = ring.add(&acc_closure, &ring.scale(&val, &BigInt::from(closure)));
            }
            let diff = ring.sub(&acc_full, &acc_closure);
            out.push(CxhEvidence {
                s,
                g_index: gi,
                difference_is_zero: ring.is_zero(&diff),
                full_projection: acc_full,
                closure_projection: acc_closure,
            });
        }
    }
    Ok(out)
}
