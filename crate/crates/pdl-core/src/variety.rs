//! The point model of `X_h`: shaped column vectors `v` in `L_h` (or `L_h^+`),
//! the associated matrices `lambda(v)` and `g_b(v)`, membership predicates,
//! Drinfeld stratum labels, group actions, and exhaustive enumeration.

use alloc::vec;
use alloc::vec::Vec;

use crate::field::{Fe, FieldTower};
use crate::linalg::{self, MatrixFF};
use crate::params::GroupParams;
use crate::parahoric::{rep_monomial, MatW, Monomial, Rep};
use crate::witt::{Wv, MAX_H};
use crate::{Error, Result};

/// The coordinate shape of `L_h`: component `i` lies in `W_h` when
/// `i = 1 mod n0` and in `W_{h-1}` otherwise (the truncated picture of the
/// parahoric first column: value at `pi^0` free, top coordinate cut). The
/// `+` variant used by the fiber analysis is the `V`-shifted presentation:
/// non-distinguished components in `V W_h` with the `pi^0` coordinate
/// forced to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub p: GroupParams,
    pub plus: bool,
}

impl Shape {
    pub fn lattice(p: GroupParams) -> Shape {
        Shape { p, plus: false }
    }

    pub fn lattice_plus(p: GroupParams) -> Shape {
        Shape { p, plus: true }
    }

    /// Storage precision of the components.
    pub fn hp(&self) -> usize {
        if self.plus {
            self.p.h + 1
        } else {
            self.p.h
        }
    }

    /// Is component `i1` (1-based) a distinguished (`W_h`) slot?
    #[inline]
    pub fn distinguished(&self, i1: u32) -> bool {
        self.p.class(i1) == 1
    }

    /// Coordinate window (lo..hi) of component `i1`.
    pub fn comp_window(&self, i1: u32) -> (usize, usize) {
        let h = self.p.h;
        if self.distinguished(i1) {
            (0, h)
        } else if self.plus {
            (1, h + 1)
        } else {
            (0, h - 1)
        }
    }

    /// Zeroes out-of-window coordinates (projects a computed vector back to
    /// the shape's quotient presentation).
    pub fn normalize_point(&self, v: &mut [Wv]) {
        for (i, w) in v.iter_mut().enumerate() {
            let (lo, hi) = self.comp_window(i as u32 + 1);
            for c in 0..lo {
                w.set_coeff(c, crate::field::Fe::ZERO);
            }
            for c in hi..self.hp() {
                w.set_coeff(c, crate::field::Fe::ZERO);
            }
        }
    }

    /// Free coordinate slots `(component index 0-based, coordinate)` in
    /// row-major order.
    pub fn slots(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.p.n {
            let (lo, hi) = self.comp_window(i + 1);
            for c in lo..hi {
                out.push((i as usize, c));
            }
        }
        out
    }

    pub fn zero_point(&self) -> Vec<Wv> {
        vec![Wv::zero(self.hp()); self.p.n as usize]
    }

    pub fn is_valid(&self, v: &[Wv]) -> bool {
        v.len() == self.p.n as usize
            && v.iter().enumerate().all(|(i, w)| {
                let (lo, hi) = self.comp_window(i as u32 + 1);
                w.h as usize == self.hp()
                    && (0..lo).all(|c| w.coeff(c).is_zero())
                    && (hi..self.hp()).all(|c| w.coeff(c).is_zero())
            })
    }

    /// Residue vector in `L_1` (the `pi^0` coordinates of the distinguished
    /// components), length `n'`.
    pub fn residue(&self, v: &[Wv]) -> Vec<Fe> {
        (0..self.p.n_prime)
            .map(|k| v[(k * self.p.n0) as usize].coeff(0))
            .collect()
    }
}

/// Applies `b sigma` once to a lifted coordinate vector (exact at the
/// vector's precision; `b` has nonnegative valuations).
fn b_sigma_apply(t: &FieldTower, b: &Monomial, v: &[Wv]) -> Vec<Wv> {
    let n = b.n;
    let mut out = vec![Wv::zero(v[0].h as usize); n];
    for j in 0..n {
        let w = v[j].frobenius(1, t);
        debug_assert!(b.val[j] >= 0);
        out[b.row[j]] = w.mul_pi_pow(b.val[j] as usize);
    }
    out
}

/// The matrix `lambda(v)` for `b = b_cox`: column `[i e + 1]_n` is
/// `pi^{-floor(i k0/n0)} (b sigma)^i (v)`. Entries are asserted integral
/// (Lemma `l:ti` guarantees it on shape-valid input).
pub fn lambda_matrix(shape: &Shape, t: &FieldTower, v: &[Wv]) -> Result<MatW> {
    column_matrix(shape, t, v, Rep::Coxeter, true)
}

/// The matrix `g_b(v)`: column `i` is `pi^{-floor((i-1) k0/n0)}
/// (b sigma)^{i-1}(v)` (normalized so the determinant is a unit on `X_h`).
pub fn gb_matrix(shape: &Shape, t: &FieldTower, v: &[Wv], rep: Rep) -> Result<MatW> {
    column_matrix(shape, t, v, rep, false)
}

fn column_matrix(
    shape: &Shape,
    t: &FieldTower,
    v: &[Wv],
    rep: Rep,
    lambda_layout: bool,
) -> Result<MatW> {
    let p = &shape.p;
    let n = p.n as usize;
    let b = rep_monomial(p, rep);
    // working precision: h plus room for every division and the + shape
    let hw = (shape.hp() + p.kappa as usize).min(MAX_H);
    if shape.hp() + p.kappa as usize > MAX_H {
        return Err(Error::Budget("working precision exceeds MAX_H".into()));
    }
    let mut cur: Vec<Wv> = v.iter().map(|w| w.lift(hw)).collect();
    let mut mat = MatW::zero(p);
    for i in 0..n {
        // column index: lambda layout puts (b sigma)^i at column [i e + 1]_n
        let col = if lambda_layout {
            GroupParams::rep1(i as i64 * p.e as i64 + 1, p.n) as usize - 1
        } else {
            i
        };
        let shift = (i as u64 * p.k0 as u64 / p.n0 as u64) as usize;
        for row in 0..n {
            let w = cur[row].div_pi_pow_exact(shift)?;
            mat[(row, col)] = w.reduce_level(p.h)?;
        }
        if i + 1 < n {
            cur = b_sigma_apply(t, &b, &cur);
        }
    }
    mat.normalize(p, true)?;
    Ok(mat)
}

/// Sign of the permutation underlying a monomial matrix, as a field element.
pub fn monomial_sign(t: &FieldTower, m: &Monomial) -> Fe {
    let mut perm: Vec<usize> = m.row.clone();
    let mut sign = t.one();
    for i in 0..perm.len() {
        while perm[i] != i {
            let j = perm[i];
            perm.swap(i, j);
            sign = t.neg(sign);
        }
    }
    sign
}

/// Membership variants of the point model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XVariant {
    /// `X_h` via `lambda` / `b_cox`: `det` a sigma-fixed unit.
    Xh,
    /// `X_h(b_sp, b_cox)` via `g_{b_sp}`: `sigma(det) = c det` a unit, with
    /// `c = det(b_cox)/det(b_sp)` (a sign).
    XhSpecial,
    /// `X_h^+` on the `L^+` shape via `g_{b_sp}`: `det` a sigma-fixed unit.
    XhPlus,
}

/// The sign `det(b_cox)/det(b_sp)`.
pub fn special_sign(p: &GroupParams, t: &FieldTower) -> Fe {
    let c = monomial_sign(t, &Monomial::b_cox(p));
    let s = monomial_sign(t, &Monomial::b_sp(p));
    t.div(c, s)
}

pub fn is_in_xh(shape: &Shape, t: &FieldTower, v: &[Wv], variant: XVariant) -> Result<bool> {
    debug_assert!(shape.is_valid(v));
    let det = match variant {
        XVariant::Xh => lambda_matrix(shape, t, v)?.det(t),
        XVariant::XhSpecial | XVariant::XhPlus => gb_matrix(shape, t, v, Rep::Special)?.det(t),
    };
    if !det.is_unit() {
        return Ok(false);
    }
    let target = match variant {
        XVariant::Xh | XVariant::XhPlus => det,
        XVariant::XhSpecial => det.scale(special_sign(&shape.p, t), t),
    };
    Ok(det.frobenius(1, t) == target)
}

/// `X_h^1 = X_h cap G_h^1`: membership plus identity residue.
pub fn is_in_xh1(shape: &Shape, t: &FieldTower, v: &[Wv]) -> Result<bool> {
    if !is_in_xh(shape, t, v, XVariant::Xh)? {
        return Ok(false);
    }
    let lam = lambda_matrix(shape, t, v)?;
    Ok(lam.residue(&shape.p, t) == MatrixFF::identity(shape.p.n as usize, t))
}

/// Residue of `lambda(v)` lies in the `L^(r) G^1` pattern?
pub fn is_in_lr_g1(shape: &Shape, t: &FieldTower, v: &[Wv], r: u32) -> Result<bool> {
    let lam = lambda_matrix(shape, t, v)?;
    let res = lam.residue(&shape.p, t);
    let n = shape.p.n as usize;
    let m = (r * shape.p.n0) as i64;
    Ok((0..n).all(|i| {
        (0..n).all(|j| (i as i64 - j as i64).rem_euclid(m) == 0 || res[(i, j)].is_zero())
    }))
}

/// One application of `D = pi^{-k0} (b sigma)^{n0}` to a residue vector
/// (length `n'`, supported on the distinguished coordinates).
pub fn residue_frobenius(p: &GroupParams, t: &FieldTower, rep: Rep, res: &[Fe]) -> Vec<Fe> {
    let n = p.n as usize;
    let b = rep_monomial(p, rep);
    let prec = p.k0 as usize + 1;
    let mut cur = vec![Wv::zero(prec); n];
    for k in 0..p.n_prime as usize {
        cur[k * p.n0 as usize] = Wv::constant(prec, res[k]);
    }
    for _ in 0..p.n0 {
        cur = b_sigma_apply(t, &b, &cur);
    }
    let mut out = vec![Fe::ZERO; p.n_prime as usize];
    for k in 0..p.n_prime as usize {
        let w = cur[k * p.n0 as usize].div_pi_pow_exact(p.k0 as usize).expect("D is integral on residues");
        out[k] = w.coeff(0);
        // all other components must carry only higher valuations
    }
    out
}

/// Drinfeld stratum label of a point of `X_h`: the largest divisor
/// `r | n'` such that `sigma^n(residue)` lies in the span of the
/// `D^r`-orbit; computed from the expansion of `sigma^n(residue)` in the
/// `D`-orbit basis and cross-checked against the span-dimension scan.
pub fn stratum_label(shape: &Shape, t: &FieldTower, v: &[Wv], rep: Rep) -> Result<u32> {
    let p = &shape.p;
    let np = p.n_prime as usize;
    let res = shape.residue(v);
    // D-orbit: res, D res, ..., D^{n'} res (the last equals sigma^n(res))
    let mut orbit = Vec::with_capacity(np + 1);
    let mut cur = res.clone();
    for _ in 0..=np {
        orbit.push(cur.clone());
        cur = residue_frobenius(p, t, rep, &cur);
    }
    let sig_n: Vec<Fe> = res.iter().map(|&x| t.frobenius(x, p.n as i64)).collect();
    if orbit[np] != sig_n {
        return Err(Error::Consistency("D^{n'} differs from sigma^n on the residue".into()));
    }
    let basis = MatrixFF::from_cols(&orbit[..np]);
    let coeffs = basis.solve(&sig_n, t).ok_or_else(|| {
        Error::Consistency("residue D-orbit does not form a basis (point not on X_h?)".into())
    })?;
    if basis.rank(t) != np {
        return Err(Error::Consistency("residue D-orbit is linearly dependent".into()));
    }
    // label via the support of the relation: largest r | n' with c_i = 0
    // whenever r does not divide i
    let mut label = 1u32;
    for r in crate::field::divisors(p.n_prime as u64) {
        let r = r as u32;
        if (0..np).all(|i| i % r as usize == 0 || coeffs[i].is_zero()) {
            label = label.max(r);
        }
    }
    // cross-check: max r | n' with dim span{(D^r)^i res : 0 <= i <= n'/r}
    // equal to n'/r (the D^r-orbit closes after n'/r steps)
    let mut label2 = 1u32;
    for r in crate::field::divisors(p.n_prime as u64) {
        let r = r as usize;
        let vecs: Vec<Vec<Fe>> = (0..=np / r).map(|i| orbit[r * i].clone()).collect();
        let d = linalg::span_dim(&vecs, t);
        if d == np / r {
            label2 = label2.max(r as u32);
        }
    }
    if label != label2 {
        return Err(Error::Consistency(alloc::format!(
            "stratum label mismatch: relation support {label} vs span scan {label2}"
        )));
    }
    Ok(label)
}

/// Left/right action `(g, u) . v = g (v . u)` with `g` an `F`-fixed level
/// matrix and `u` a torus scalar in `W_h^x(F_{q^n})` (the right action is
/// componentwise Witt multiplication).
pub fn act(shape: &Shape, t: &FieldTower, g: &MatW, u: &Wv, v: &[Wv]) -> Vec<Wv> {
    let hp = shape.hp();
    let ul = u.lift(hp);
    let scaled: Vec<Wv> = v.iter().map(|w| w.mul(&ul, t)).collect();
    // matrix action at storage precision (lift g's entries)
    let n = shape.p.n as usize;
    let mut out = vec![Wv::zero(hp); n];
    for i in 0..n {
        let mut acc = Wv::zero(hp);
        for j in 0..n {
            let a = g[(i, j)];
            if !a.is_zero() && !scaled[j].is_zero() {
                acc = acc.add(&a.lift(hp).mul(&scaled[j], t), t);
            }
        }
        out[i] = acc;
    }
    // project to the quotient windows (the out-of-window coordinates are
    // not part of the point data and the retained ones are exact)
    shape.normalize_point(&mut out);
    out
}

/// The action of `Gamma_h = F_{q^n}^x x| (G_h^1(F_q) x T_h^1(F_q))`:
/// `(zeta, g, u) * v = zeta (g v u) zeta^{-1}` with `zeta` embedded in
/// `T_h(F_q)` as a Teichmueller scalar.
#[derive(Clone)]
pub struct GammaElem {
    pub zeta: Fe,
    pub g: MatW,
    pub u: Wv,
}

pub fn act_gamma(shape: &Shape, t: &FieldTower, a: &GammaElem, v: &[Wv]) -> Vec<Wv> {
    let p = &shape.p;
    let moved = act(shape, t, &a.g, &a.u, v);
    // conjugation by iota(zeta): component i scales by sigma^{(i-1)l}(zeta)/zeta
    let l = p.torus_twist() as i64;
    let zinv = t.inv(a.zeta);
    moved
        .into_iter()
        .enumerate()
        .map(|(i, w)| w.scale(t.mul(t.frobenius(a.zeta, l * i as i64), zinv), t))
        .collect()
}

/// Composition in `Gamma_h`:
/// `(z1,g1,u1)(z2,g2,u2) = (z1 z2, iota(z2)^{-1} g1 iota(z2) g2, u1 u2)`.
pub fn gamma_compose(
    shape: &Shape,
    t: &FieldTower,
    a: &GammaElem,
    b: &GammaElem,
) -> Result<GammaElem> {
    let p = &shape.p;
    let z2 = MatW::torus_embed(p, t, &Wv::constant(p.h, b.zeta));
    let z2inv = z2.inverse(p, t)?;
    let g = z2inv.mul(&a.g, p, t).mul(&z2, p, t).mul(&b.g, p, t);
    Ok(GammaElem { zeta: t.mul(a.zeta, b.zeta), g, u: a.u.mul(&b.u, t) })
}

/// Which point set to enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointSet {
    /// All of `X_h` (or `X_h^+` on a plus shape).
    Xh,
    /// `X_h^1`.
    Xh1,
    /// The locally closed stratum with label exactly `r`.
    Stratum(u32),
}

/// Streaming scan of the shape's points over `F_{q^{n m_ext}}`, invoking the
/// callback with `(point, in_xh, stratum_label_if_in_xh)`. The enumeration
/// order is lexicographic in the slot coordinates (row-major components).
pub fn scan_points<F: FnMut(&[Wv], bool, Option<u32>)>(
    shape: &Shape,
    t: &FieldTower,
    m_ext: u32,
    budget: u64,
    variant: XVariant,
    mut f: F,
) -> Result<()> {
    let p = &shape.p;
    let slots = shape.slots();
    let deg = p.n * m_ext;
    let elems = t.subfield_elems(deg);
    let total = (elems.len() as u64).checked_pow(slots.len() as u32);
    if total.is_none() || total.unwrap() > budget {
        return Err(Error::Budget(alloc::format!(
            "point scan of {}^{} coordinates over budget {budget}",
            elems.len(),
            slots.len()
        )));
    }
    let mut idx = vec![0usize; slots.len()];
    let mut v = shape.zero_point();
    loop {
        let inx = is_in_xh(shape, t, &v, variant)?;
        let label = if inx {
            let rep = match variant {
                XVariant::Xh => Rep::Coxeter,
                _ => Rep::Special,
            };
            Some(stratum_label(shape, t, &v, rep)?)
        } else {
            None
        };
        f(&v, inx, label);
        let mut pos = 0;
        loop {
            if pos == slots.len() {
                return Ok(());
            }
            let (ci, cc) = slots[pos];
            idx[pos] += 1;
            if idx[pos] == elems.len() {
                idx[pos] = 0;
                v[ci].set_coeff(cc, elems[0]);
                pos += 1;
            } else {
                v[ci].set_coeff(cc, elems[idx[pos]]);
                break;
            }
        }
    }
}

/// Point count plus stratum histogram of an enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumSummary {
    pub count: u64,
    /// `(stratum label, count)` sorted by label.
    pub strata: Vec<(u32, u64)>,
}

pub fn enumerate_summary(
    shape: &Shape,
    t: &FieldTower,
    which: PointSet,
    m_ext: u32,
    budget: u64,
) -> Result<EnumSummary> {
    let variant = if shape.plus { XVariant::XhPlus } else { XVariant::Xh };
    let mut hist: Vec<(u32, u64)> = Vec::new();
    let mut count = 0u64;
    let mut err: Option<Error> = None;
    scan_points(shape, t, m_ext, budget, variant, |v, inx, label| {
        if !inx || err.is_some() {
            return;
        }
        let keep = match which {
            PointSet::Xh => true,
            PointSet::Xh1 => match is_in_xh1(shape, t, v) {
                Ok(b) => b && !shape.plus,
                Err(e) => {
                    err = Some(e);
                    false
                }
            },
            PointSet::Stratum(r) => label == Some(r),
        };
        if keep {
            count += 1;
            let l = label.unwrap();
            match hist.binary_search_by_key(&l, |&(a, _)| a) {
                Ok(i) => hist[i].1 += 1,
                Err(i) => hist.insert(i, (l, 1)),
            }
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(EnumSummary { count, strata: hist })
}

/// Collects the points of a set (budgeted).
pub fn collect_points(
    shape: &Shape,
    t: &FieldTower,
    which: PointSet,
    m_ext: u32,
    budget: u64,
) -> Result<Vec<Vec<Wv>>> {
    let variant = if shape.plus { XVariant::XhPlus } else { XVariant::Xh };
    let mut out = Vec::new();
    let mut err: Option<Error> = None;
    scan_points(shape, t, m_ext, budget, variant, |v, inx, label| {
        if !inx || err.is_some() {
            return;
        }
        let keep = match which {
            PointSet::Xh => true,
            PointSet::Xh1 => match is_in_xh1(shape, t, v) {
                Ok(b) => b,
                Err(e) => {
                    err = Some(e);
                    false
                }
            },
            PointSet::Stratum(r) => label == Some(r),
        };
        if keep {
            out.push(v.to_vec());
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(out)
}

/// Report of the point-level `S_h^(r)`-decomposition check: every point of
/// `X_h^(r)` is a `G_h(F_q)`-translate of a point of `X_h cap L^(r) G^1`,
/// through a unique residue coset.
#[derive(Debug, Clone)]
pub struct ShpReport {
    pub points: u64,
    pub coset_count: usize,
    pub all_covered: bool,
    pub disjoint: bool,
}

pub fn shp_decomposition_check(
    p: &GroupParams,
    t: &FieldTower,
    r: u32,
    m_ext: u32,
    budget: u64,
) -> Result<ShpReport> {
    use crate::parahoric::{enumerate_group, membership, Subgroup};
    // residue-level coset representatives of G_1(F_q) / L_1^(r)(F_q)
    let p1 = GroupParams::new(p.p, p.a, p.n, p.kappa, 1)?;
    let t1_budget = 1u64 << 26;
    let g1 = enumerate_group(&p1, t, Rep::Coxeter, Subgroup::Gh, t1_budget)?;
    let l1: Vec<MatW> = g1
        .iter()
        .filter(|g| membership(g, &p1, t, Subgroup::Lr(r)))
        .cloned()
        .collect();
    let mut reps: Vec<MatW> = Vec::new();
    let mut covered = vec![false; g1.len()];
    let index: alloc::collections::BTreeMap<Vec<Wv>, usize> =
        g1.iter().enumerate().map(|(i, g)| (g.entries.clone(), i)).collect();
    for (i, g) in g1.iter().enumerate() {
        if covered[i] {
            continue;
        }
        reps.push(g.clone());
        for l in &l1 {
            let gl = g.mul(l, &p1, t);
            if let Some(&j) = index.get(&gl.entries) {
                covered[j] = true;
            }
        }
    }
    // lift the reps to level h (zero lift stays F-fixed) and invert residues
    let shape = Shape::lattice(*p);
    let rep_res_inv: Vec<MatrixFF> = reps
        .iter()
        .map(|g| {
            let res = g.residue(&p1, t);
            res.inverse(t).expect("coset representatives are invertible")
        })
        .collect();
    let m = (r * p.n0) as i64;
    let n = p.n as usize;
    let mut points = 0u64;
    let mut all_covered = true;
    let mut disjoint = true;
    let mut err: Option<Error> = None;
    scan_points(&shape, t, m_ext, budget, XVariant::Xh, |v, inx, label| {
        if !inx || err.is_some() {
            return;
        }
        // in X^{(r)} (closure) iff r divides the label
        let Some(l) = label else { return };
        if l % r != 0 {
            return;
        }
        points += 1;
        let lam = match lambda_matrix(&shape, t, v) {
            Ok(m) => m,
            Err(e) => {
                err = Some(e);
                return;
            }
        };
        let res = lam.residue(p, t);
        let mut hits = 0;
        for rinv in &rep_res_inv {
            let moved = rinv.mul(&res, t);
            let ok = (0..n).all(|i| {
                (0..n).all(|j| (i as i64 - j as i64).rem_euclid(m) == 0 || moved[(i, j)].is_zero())
            });
            if ok {
                hits += 1;
            }
        }
        if hits == 0 {
            all_covered = false;
        }
        if hits > 1 {
            disjoint = false;
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(ShpReport { points, coset_count: reps.len(), all_covered, disjoint })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parahoric::Subgroup;

    fn setup(q: u64, n: u32, kappa: u32, h: usize) -> (Shape, FieldTower) {
        let p = GroupParams::new(q, 1, n, kappa, h).unwrap();
        let t = p.tower_for(&[p.n]).unwrap();
        (Shape::lattice(p), t)
    }

    #[test]
    fn lambda_identity_support_at_h1() {
        // v = (1,0,...,0) at h=1, kappa=0: lambda(v) = identity
        let (shape, t) = setup(2, 3, 0, 1);
        let mut v = shape.zero_point();
        v[0].set_coeff(0, t.one());
        let lam = lambda_matrix(&shape, &t, &v).unwrap();
        assert_eq!(lam, MatW::identity(&shape.p, &t));
    }

    #[test]
    fn lambda_columns_kappa0_n2() {
        // kappa=0, n=2: lambda(v) = (v | b sigma(v)) with b = antidiag(1,1)
        let (shape, t) = setup(2, 2, 0, 2);
        let mut v = shape.zero_point();
        let g = t.subfield_gen(2);
        v[0] = Wv::from_coeffs(2, &[g, t.one()]);
        v[1] = Wv::from_coeffs(2, &[t.mul(g, g), g]);
        let lam = lambda_matrix(&shape, &t, &v).unwrap();
        assert_eq!(lam[(0, 0)], v[0]);
        assert_eq!(lam[(1, 0)], v[1]);
        // second column = b0 sigma(v) = (sigma(v_2), sigma(v_1))
        assert_eq!(lam[(0, 1)], v[1].frobenius(1, &t));
        assert_eq!(lam[(1, 1)], v[0].frobenius(1, &t));
    }

    #[test]
    fn gb_first_column_is_v_and_det_matches_lambda() {
        for (q, n, kappa, h) in [(2, 2, 1, 2), (2, 4, 2, 2), (3, 2, 0, 2)] {
            let (shape, t) = setup(q, n, kappa, h);
            let slots = shape.slots();
            let mut v = shape.zero_point();
            for (k, &(ci, cc)) in slots.iter().enumerate() {
                v[ci].set_coeff(cc, t.frobenius(t.subfield_gen(n), k as i64));
            }
            let gb = gb_matrix(&shape, &t, &v, Rep::Coxeter).unwrap();
            // first column of g_b(v) is v, within the truncation window of
            // the level-h quotient group
            for (i, w) in v.iter().enumerate() {
                let (lo, hi) = crate::parahoric::window(&shape.p, i as u32 + 1, 1);
                for c in lo..hi {
                    assert_eq!(gb[(i, 0)].coeff(c), w.coeff(c));
                }
            }
            // det(g_{b_cox}(v)) = +/- det(lambda(v)) via the column
            // permutation parity
            let lam = lambda_matrix(&shape, &t, &v).unwrap();
            let dg = gb.det(&t);
            let dl = lam.det(&t);
            // permutation i -> [i e + 1]_n on 0-based columns
            let p = &shape.p;
            let mut perm: alloc::vec::Vec<usize> = (0..n as usize)
                .map(|i| GroupParams::rep1(i as i64 * p.e as i64 + 1, p.n) as usize - 1)
                .collect();
            let mut sign = t.one();
            for i in 0..perm.len() {
                while perm[i] != i {
                    let j = perm[i];
                    perm.swap(i, j);
                    sign = t.neg(sign);
                }
            }
            assert_eq!(dg, dl.scale(sign, &t));
        }
    }

    #[test]
    fn classical_dl_curve_count_h1() {
        // (q,n,kappa,h) = (2,2,0,1): #X_1(F_4-points) = q(q^2-1) = 6,
        // matched against a brute-force scan of F_4^2 minus rational lines
        let (shape, t) = setup(2, 2, 0, 1);
        let s = enumerate_summary(&shape, &t, PointSet::Xh, 1, 1 << 20).unwrap();
        assert_eq!(s.count, 6);
        // independent brute force: v with det lambda(v) in F_2^x
        let f4 = t.subfield_elems(2);
        let mut brute = 0;
        for &x in &f4 {
            for &y in &f4 {
                // lambda(v) = (v | b0 sigma(v)): det = x sigma(x)... compute
                let det = t.sub(t.mul(x, t.frobenius(x, 1)), t.mul(y, t.frobenius(y, 1)));
                if !det.is_zero() && t.frobenius(det, 1) == det {
                    brute += 1;
                }
            }
        }
        assert_eq!(brute, 6);
    }

    #[test]
    fn zero_vector_not_in_xh() {
        let (shape, t) = setup(2, 2, 0, 2);
        let v = shape.zero_point();
        assert!(!is_in_xh(&shape, &t, &v, XVariant::Xh).unwrap());
    }

    #[test]
    fn torus_orbit_points_in_xh() {
        // v in the T-orbit of (1,0,...,0) with unit first coordinate in
        // W_h^x(F_{q^n}): in X_h, and the stratum label is n'
        let (shape, t) = setup(2, 2, 0, 2);
        let g = t.subfield_gen(2);
        let mut v = shape.zero_point();
        v[0] = Wv::from_coeffs(2, &[g, t.one()]);
        assert!(is_in_xh(&shape, &t, &v, XVariant::Xh).unwrap());
        assert_eq!(stratum_label(&shape, &t, &v, Rep::Coxeter).unwrap(), 2);
        // residue not e_1 -> not in X_h^1
        assert!(!is_in_xh1(&shape, &t, &v).unwrap());
        let mut v1 = shape.zero_point();
        v1[0] = Wv::from_coeffs(2, &[t.one(), g]);
        assert!(is_in_xh1(&shape, &t, &v1).unwrap());
    }

    #[test]
    fn xh1_counts_match_maximality_formula() {
        // (2,2,0,2) -> 16; (3,2,0,2) -> 81
        for (q, expect) in [(2u64, 16u64), (3, 81)] {
            let (shape, t) = setup(q, 2, 0, 2);
            let s = enumerate_summary(&shape, &t, PointSet::Xh1, 1, 1 << 24).unwrap();
            assert_eq!(s.count, expect);
        }
    }

    #[test]
    fn strata_partition_xh() {
        // over F_{q^n} every point has a rational residue line, so the
        // closed stratum carries the whole count; open strata appear at M=2
        let (shape, t) = {
            let p = GroupParams::new(2, 1, 2, 0, 2).unwrap();
            let t = p.tower_for(&[2 * p.n]).unwrap();
            (Shape::lattice(p), t)
        };
        let m1 = enumerate_summary(&shape, &t, PointSet::Xh, 1, 1 << 24).unwrap();
        assert_eq!(m1.strata.len(), 1);
        assert_eq!(m1.strata[0].0, shape.p.n_prime);
        // (2,2,0,2) over F_16 still has only closed-stratum points (the
        // residue norm form x^3 + y^3 = 1 has no solution with xy != 0)
        let all = enumerate_summary(&shape, &t, PointSet::Xh, 2, 1 << 24).unwrap();
        let s1 = enumerate_summary(&shape, &t, PointSet::Stratum(1), 2, 1 << 24).unwrap();
        let s2 = enumerate_summary(&shape, &t, PointSet::Stratum(2), 2, 1 << 24).unwrap();
        assert_eq!(all.count, s1.count + s2.count);
        assert_eq!(s1.count, 0);
        assert_eq!(s2.count, all.count);
        // h=1, kappa=0, n=3 over F_64: both strata are populated; stratum-1
        // points are off rational lines, stratum-n' points have a rational
        // residue line (span degenerates)
        let (shape1, t1) = {
            let p = GroupParams::new(2, 1, 3, 0, 1).unwrap();
            let t = p.tower_for(&[2 * p.n]).unwrap();
            (Shape::lattice(p), t)
        };
        let mut off_lines = 0u64;
        let mut on_lines = 0u64;
        scan_points(&shape1, &t1, 2, 1 << 25, XVariant::Xh, |v, inx, label| {
            if !inx {
                return;
            }
            // Every X-point satisfies the Drinfeld upper half-space
            // predicate for S_1 (the residue avoids all proper rational
            // subspaces: its D-orbit spans), and the closed stratum is cut
            // by rationality of the residue *line* over F_{q^n}, i.e.
            // D^{n'} res parallel to res.
            let res = shape1.residue(v);
            let mut orbit = alloc::vec![res.clone()];
            for _ in 0..3 {
                let last = orbit.last().unwrap().clone();
                orbit.push(residue_frobenius(&shape1.p, &t1, Rep::Coxeter, &last));
            }
            assert_eq!(linalg::span_dim(&orbit[0..3].to_vec(), &t1), 3);
            let parallel = linalg::span_dim(&[res.clone(), orbit[3].clone()], &t1) == 1;
            match label.unwrap() {
                1 => {
                    off_lines += 1;
                    assert!(!parallel);
                }
                3 => {
                    on_lines += 1;
                    assert!(parallel);
                }
                _ => panic!("bad label"),
            }
        })
        .unwrap();
        assert!(off_lines > 0 && on_lines > 0);
    }

    #[test]
    fn action_preserves_xh_and_lambda_equivariance() {
        let (shape, t) = setup(2, 2, 1, 2);
        let p = &shape.p;
        let g1 = crate::parahoric::enumerate_group(p, &t, Rep::Coxeter, Subgroup::Gh1, 1 << 22).unwrap();
        let units: alloc::vec::Vec<Wv> = crate::witt::all_wv(&t, p.h, p.n)
            .into_iter()
            .filter(|w| w.is_unit())
            .collect();
        let pts = collect_points(&shape, &t, PointSet::Xh, 1, 1 << 24).unwrap();
        let mut checked = 0;
        for (gi, g) in g1.iter().enumerate() {
            for (ui, u) in units.iter().enumerate() {
                let v = &pts[(gi * 7 + ui * 3) % pts.len()];
                let w = act(&shape, &t, g, u, v);
                assert!(shape.is_valid(&w));
                assert!(is_in_xh(&shape, &t, &w, XVariant::Xh).unwrap());
                // lambda(g v u) = g lambda(v) iota(u)
                let lam_w = lambda_matrix(&shape, &t, &w).unwrap();
                let lam_v = lambda_matrix(&shape, &t, v).unwrap();
                let iota = MatW::torus_embed(p, &t, u);
                let rhs = g.mul(&lam_v, p, &t).mul(&iota, p, &t);
                assert_eq!(lam_w, rhs);
                // stratum label invariance
                assert_eq!(
                    stratum_label(&shape, &t, v, Rep::Coxeter).unwrap(),
                    stratum_label(&shape, &t, &w, Rep::Coxeter).unwrap()
                );
                checked += 1;
                if checked > 40 {
                    return;
                }
            }
        }
    }

    #[test]
    fn identity_action_is_trivial_and_center_scales() {
        let (shape, t) = setup(2, 2, 0, 2);
        let p = &shape.p;
        let id = MatW::identity(p, &t);
        let one = Wv::one(p.h, &t);
        let pts = collect_points(&shape, &t, PointSet::Xh, 1, 1 << 24).unwrap();
        for v in pts.iter().take(5) {
            assert_eq!(act(&shape, &t, &id, &one, v), *v);
        }
        // central scalar zeta in F_q^x acts trivially under conjugation
        let a = GammaElem { zeta: t.from_fp(1), g: id.clone(), u: one };
        for v in pts.iter().take(5) {
            assert_eq!(act_gamma(&shape, &t, &a, v), *v);
        }
    }

    #[test]
    fn gamma_composition_law() {
        let (shape, t) = setup(2, 2, 0, 2);
        let p = &shape.p;
        let g1 = crate::parahoric::enumerate_group(p, &t, Rep::Coxeter, Subgroup::Gh1, 1 << 22).unwrap();
        let t1: alloc::vec::Vec<Wv> = crate::witt::all_wv(&t, p.h, p.n)
            .into_iter()
            .filter(|w| w.is_unit() && w.coeff(0) == t.one())
            .collect();
        let zetas = [t.subfield_gen(p.n), t.frobenius(t.subfield_gen(p.n), 1)];
        let pts = collect_points(&shape, &t, PointSet::Xh1, 1, 1 << 24).unwrap();
        let mk = |i: usize, j: usize, k: usize| GammaElem {
            zeta: zetas[i % 2],
            g: g1[j % g1.len()].clone(),
            u: t1[k % t1.len()],
        };
        for s in 0..6 {
            let a = mk(s, 3 * s + 1, s + 2);
            let b = mk(s + 1, 5 * s + 2, 2 * s + 1);
            let ab = gamma_compose(&shape, &t, &a, &b).unwrap();
            for v in pts.iter().take(4) {
                let lhs = act_gamma(&shape, &t, &a, &act_gamma(&shape, &t, &b, v));
                let rhs = act_gamma(&shape, &t, &ab, v);
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn zeta_fixed_points_are_torus() {
        // (zeta,1,1) fixed points of X_h^1 for zeta of trivial stabilizer
        // form T_h^1(F_q): count q^{n(h-1)} = 4
        let (shape, t) = setup(2, 2, 0, 2);
        let p = &shape.p;
        let zeta = t.subfield_gen(2); // generator of F_4^x: trivial stabilizer
        let a = GammaElem { zeta, g: MatW::identity(p, &t), u: Wv::one(p.h, &t) };
        let pts = collect_points(&shape, &t, PointSet::Xh1, 1, 1 << 24).unwrap();
        let fixed = pts.iter().filter(|v| act_gamma(&shape, &t, &a, v) == **v).count();
        assert_eq!(fixed, 4);
    }

    #[test]
    fn lambda_determined_by_first_column_recursion() {
        // columns satisfy the recursion: column [ie+1] re-derived from
        // column [(i-1)e+1] by t^{-1} b sigma matches exactly
        let (shape, t) = setup(2, 2, 1, 2);
        let pts = collect_points(&shape, &t, PointSet::Xh, 1, 1 << 24).unwrap();
        let p = &shape.p;
        for v in pts.iter().take(20) {
            let lam = lambda_matrix(&shape, &t, v).unwrap();
            // recompute column [e+1]_n from column 1: t_1^{-1} (b sigma)(v);
            // t_1 = 1 always, so this is b sigma(col_1) shifted by window
            let b = rep_monomial(p, Rep::Coxeter);
            let col0: alloc::vec::Vec<Wv> = (0..2).map(|i| lam[(i, 0)].lift(p.h + 1)).collect();
            let nxt = b_sigma_apply(&t, &b, &col0);
            let col_idx = GroupParams::rep1(p.e as i64 + 1, p.n) as usize - 1;
            for i in 0..2 {
                assert_eq!(nxt[i].reduce_level(p.h).unwrap(), lam[(i, col_idx)]);
            }
        }
    }

    #[test]
    fn det_lambda_lands_in_wq() {
        // det(lambda(v)) sigma-fixed means it lies in W_h(F_q)^x
        let (shape, t) = setup(3, 2, 0, 2);
        let pts = collect_points(&shape, &t, PointSet::Xh, 1, 1 << 26).unwrap();
        for v in &pts {
            let d = lambda_matrix(&shape, &t, v).unwrap().det(&t);
            assert!(d.is_unit());
            assert!(d.is_frobenius_fixed(1, &t));
            for c in d.coeffs() {
                assert!(t.in_subfield(*c, 1));
            }
        }
    }

    #[test]
    fn shp_decomposition_small() {
        // r = 1: single coset, trivially true; r = 2 on (2,2,0,2)
        let p = GroupParams::new(2, 1, 2, 0, 2).unwrap();
        let t = p.tower_for(&[2]).unwrap();
        for r in [1u32, 2] {
            let rep = shp_decomposition_check(&p, &t, r, 1, 1 << 24).unwrap();
            assert!(rep.all_covered && rep.disjoint, "r={r}: {rep:?}");
            if r == 1 {
                assert_eq!(rep.coset_count, 1);
            }
        }
    }

    #[test]
    fn monotone_strata_labels() {
        // X^{(r')} subset X^{(r)} when r | r': label divisibility encodes it
        let (shape, t) = setup(2, 4, 2, 1);
        let mut seen = alloc::vec::Vec::new();
        scan_points(&shape, &t, 1, 1 << 24, XVariant::Xh, |_, inx, label| {
            if inx {
                seen.push(label.unwrap());
            }
        })
        .unwrap();
        assert!(!seen.is_empty());
        for l in seen {
            assert!(shape.p.n_prime % l == 0);
        }
    }
}
