//! The normed indexing combinatorics coordinatizing `G_h^1`: the sets
//! `A+`, `A`, `A-`, their filtered refinements for a pair of invariant
//! sequences, the duality, the order-reversing injection between the two
//! halves, the closed-form cardinalities behind the degree formulas, and
//! the symbolic determinant contribution scanner.

use alloc::vec;
use alloc::vec::Vec;

use crate::params::GroupParams;
use crate::{Error, Result};

/// Ambient context: `n`, the block modulus `n0`, and the level `h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexContext {
    pub n: u32,
    pub n0: u32,
    pub h: usize,
}

impl IndexContext {
    pub fn from_params(p: &GroupParams) -> IndexContext {
        IndexContext { n: p.n, n0: p.n0, h: p.h }
    }

    #[inline]
    pub fn class(&self, i: u32) -> u32 {
        GroupParams::rep1(i as i64, self.n0)
    }

    /// The `l`-window (inclusive bounds) of position `(i, j)` in `A+` at
    /// level `h_ctx`.
    pub fn l_window(&self, i: u32, j: u32, h_ctx: usize) -> (i64, i64) {
        let (ci, cj) = (self.class(i), self.class(j));
        if i == j || ci < cj || (ci == cj && i != j) {
            (1, h_ctx as i64 - 1)
        } else if ci > cj {
            (0, h_ctx as i64 - 2)
        } else {
            unreachable!()
        }
    }

    pub fn in_a_plus(&self, t: Triple) -> bool {
        if t.i < 1 || t.i > self.n || t.j < 1 || t.j > self.n {
            return false;
        }
        let (lo, hi) = self.l_window(t.i, t.j, self.h);
        t.l >= lo && t.l <= hi
    }

    pub fn in_a(&self, t: Triple) -> bool {
        t.i != t.j && self.in_a_plus(t)
    }

    pub fn in_a_minus(&self, t: Triple) -> bool {
        t.j == 1 && self.in_a(t)
    }
}

/// An index triple `(i, j, l)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Triple {
    pub i: u32,
    pub j: u32,
    pub l: i64,
}

impl Triple {
    /// `|(i,j,l)| = i - j + n l`.
    pub fn norm(&self, n: u32) -> i64 {
        self.i as i64 - self.j as i64 + n as i64 * self.l
    }

    /// Dual relative to a level: `(j, i, h' - 1 - l)`.
    pub fn dual(&self, h_ctx: usize) -> Triple {
        Triple { i: self.j, j: self.i, l: h_ctx as i64 - 1 - self.l }
    }
}

/// Invariant sequences for the filtered families: `m_0..m_{d+1}` and
/// `h_0..h_{d+1}` (any valid chain; see `chars::ChiInvariants`).
#[derive(Debug, Clone)]
pub struct SeqData {
    pub m_seq: Vec<u32>,
    pub h_seq: Vec<usize>,
}

/// Which set to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetKind {
    APlus,
    A,
    AMinus,
    /// `A_{s,t}`
    Ast(usize, usize),
    /// `A_{s,t}^-`
    AstMinus(usize, usize),
    /// `A^min`
    AMin,
    /// `A_{s,t}^min`
    AstMin(usize, usize),
    /// `A_{>=s,t}^min`
    AgeMin(usize, usize),
    /// `A_{>=s,t}^{-,min}`
    AgeMinusMin(usize, usize),
    /// `A_{s,t}^{-,min}`
    AstMinusMin(usize, usize),
    /// `I_{s,t}`
    ISet(usize, usize),
    /// `J_{s,t}`
    JSet(usize, usize),
}

fn all_positions(ctx: &IndexContext) -> impl Iterator<Item = (u32, u32)> + '_ {
    (1..=ctx.n).flat_map(move |i| (1..=ctx.n).map(move |j| (i, j)))
}

/// Materializes a set as an explicit sorted list.
pub fn build_set(ctx: &IndexContext, seqs: Option<&SeqData>, kind: SetKind) -> Result<Vec<Triple>> {
    let need_seq = !matches!(kind, SetKind::APlus | SetKind::A | SetKind::AMinus | SetKind::AMin);
    let seqs = if need_seq {
        Some(seqs.ok_or_else(|| Error::Param("this set kind needs invariant sequences".into()))?)
    } else {
        seqs
    };
    let mut out = Vec::new();
    for (i, j) in all_positions(ctx) {
        for l in -1..=ctx.h as i64 {
            let t = Triple { i, j, l };
            if member(ctx, seqs, kind, t)? {
                out.push(t);
            }
        }
    }
    out.sort();
    Ok(out)
}

fn cong(i: u32, j: u32, m: u32) -> bool {
    (i as i64 - j as i64).rem_euclid(m as i64) == 0
}

fn member(ctx: &IndexContext, seqs: Option<&SeqData>, kind: SetKind, t: Triple) -> Result<bool> {
    let s_pair = |s: usize| -> Result<(u32, u32)> {
        let sq = seqs.unwrap();
        if s + 1 >= sq.m_seq.len() {
            return Err(Error::Param("s out of range for the m-sequence".into()));
        }
        Ok((sq.m_seq[s], sq.m_seq[s + 1]))
    };
    let h_of = |tt: usize| -> Result<usize> {
        let sq = seqs.unwrap();
        if tt >= sq.h_seq.len() {
            return Err(Error::Param("t out of range for the h-sequence".into()));
        }
        Ok(sq.h_seq[tt])
    };
    Ok(match kind {
        SetKind::APlus => ctx.in_a_plus(t),
        SetKind::A => ctx.in_a(t),
        SetKind::AMinus => ctx.in_a_minus(t),
        SetKind::AMin => ctx.in_a(t) && ctx.in_a(t.dual(ctx.h)),
        SetKind::Ast(s, tt) => {
            let (ms, ms1) = s_pair(s)?;
            let ht = h_of(tt)?;
            ctx.in_a(t) && cong(t.i, t.j, ms) && !cong(t.i, t.j, ms1) && t.l <= ht as i64 - 1
        }
        SetKind::AstMinus(s, tt) => {
            member(ctx, seqs, SetKind::Ast(s, tt), t)? && t.j == 1
        }
        SetKind::AstMin(s, tt) => {
            let ht = h_of(tt)?;
            member(ctx, seqs, SetKind::Ast(s, tt), t)?
                && member(ctx, seqs, SetKind::Ast(s, tt), t.dual(ht))?
        }
        SetKind::AgeMin(s, tt) => {
            // display form: j = i mod m_s with the h_t-relative min windows
            let sq = seqs.unwrap();
            if s >= sq.m_seq.len() {
                return Err(Error::Param("s out of range".into()));
            }
            let ms = sq.m_seq[s];
            let ht = h_of(tt)?;
            if !(ctx.in_a(t) && cong(t.i, t.j, ms)) {
                return Ok(false);
            }
            let (ci, cj) = (ctx.class(t.i), ctx.class(t.j));
            let (lo, hi) = if ci > cj {
                (0, ht as i64 - 2)
            } else if ci < cj {
                (1, ht as i64 - 1)
            } else {
                (1, ht as i64 - 2)
            };
            t.l >= lo && t.l <= hi
        }
        SetKind::AgeMinusMin(s, tt) => member(ctx, seqs, SetKind::AgeMin(s, tt), t)? && t.j == 1,
        SetKind::AstMinusMin(s, tt) => {
            member(ctx, seqs, SetKind::AstMin(s, tt), t)? && t.j == 1
        }
        SetKind::ISet(s, tt) => {
            let ht = h_of(tt)?;
            member(ctx, seqs, SetKind::AstMinusMin(s, tt), t)?
                && 2 * t.norm(ctx.n) > (ctx.n as i64) * (ht as i64 - 1)
        }
        SetKind::JSet(s, tt) => {
            let ht = h_of(tt)?;
            member(ctx, seqs, SetKind::AstMinusMin(s, tt), t)?
                && 2 * t.norm(ctx.n) <= (ctx.n as i64) * (ht as i64 - 1)
        }
    })
}

/// Cardinality checks of the closed forms `e_t`, `f_t` against enumeration.
pub struct CardReport {
    pub e_enum: Vec<i64>,
    pub e_closed: Vec<i64>,
    pub f_enum: Vec<i64>,
    pub f_closed: Vec<i64>,
    pub complement_count: i64,
    pub n_prime_minus_1: i64,
}

impl CardReport {
    pub fn pass(&self) -> bool {
        self.e_enum == self.e_closed
            && self.f_enum == self.f_closed
            && self.complement_count == self.n_prime_minus_1
    }
}

pub fn closed_form_cards(p: &GroupParams, seqs: &SeqData) -> Result<CardReport> {
    let ctx = IndexContext::from_params(p);
    let dp = seqs.m_seq.len() - 1;
    let n = p.n as i64;
    let n0 = p.n0 as i64;
    let lcm = |a: i64, b: i64| crate::field::lcm_u64(a as u64, b as u64) as i64;
    let mut e_enum = Vec::new();
    let mut e_closed = Vec::new();
    let mut f_enum = Vec::new();
    let mut f_closed = Vec::new();
    // append the (m_{d'+1}, h_{d'+1}) = (n, 1) sentinels for the top step
    let mut sq = seqs.clone();
    sq.m_seq.push(p.n);
    sq.h_seq.push(1);
    for t in 0..dp {
        let top = build_set(&ctx, Some(&sq), SetKind::AgeMinusMin(t, t))?;
        let next = build_set(&ctx, Some(&sq), SetKind::AgeMinusMin(t, t + 1))?;
        e_enum.push(top.iter().filter(|x| !next.contains(x)).count() as i64);
        let m = |k: usize| sq.m_seq[k] as i64;
        let hh = |k: usize| sq.h_seq[k] as i64;
        e_closed.push((n / m(t) - 1) * (hh(t) - hh(t + 1)));
        let fset = build_set(&ctx, Some(&sq), SetKind::AstMinusMin(t, t + 1))?;
        f_enum.push(fset.len() as i64);
        f_closed.push(
            (n / m(t) - n / m(t + 1)) * (hh(t + 1) - 1)
                - (n / lcm(m(t), n0) - n / lcm(m(t + 1), n0)),
        );
    }
    // e_{d'}: against the empty next level (h_{d'+1} = 1 windows are empty)
    {
        let t = dp;
        let top = build_set(&ctx, Some(&sq), SetKind::AgeMinusMin(t, t))?;
        let next = build_set(&ctx, Some(&sq), SetKind::AgeMinusMin(t, t + 1))?;
        debug_assert!(next.is_empty());
        e_enum.push(top.len() as i64);
        let m = sq.m_seq[t] as i64;
        let hh = sq.h_seq[t] as i64;
        e_closed.push((n / m - 1) * (hh - 1) - (n / lcm(m, n0) - 1));
    }
    let a_minus = build_set(&ctx, None, SetKind::AMinus)?;
    let a_minus_min: Vec<Triple> = {
        let amin = build_set(&ctx, None, SetKind::AMin)?;
        a_minus.iter().filter(|t| amin.contains(t)).cloned().collect()
    };
    let complement_count = (a_minus.len() - a_minus_min.len()) as i64;
    Ok(CardReport {
        e_enum,
        e_closed,
        f_enum,
        f_closed,
        complement_count,
        n_prime_minus_1: p.n_prime as i64 - 1,
    })
}

/// The order-reversing injection `I_{s,t} -> J_{s,t}`,
/// `(i,1,l) -> ([n-i+2]_n, 1, h_t - 2 - l)`.
pub struct IjReport {
    pub i_size: usize,
    pub j_size: usize,
    pub well_defined: bool,
    pub injective: bool,
    pub norm_sums_ok: bool,
    pub bijective: bool,
    pub family_size_even: bool,
    pub n_even_and_ht_even: bool,
    /// Whether the family contains rows with `[i]_{n0} = 1`. The displayed
    /// map reflects the `l`-window `0..h_t-2` of class-distinct rows; rows
    /// in the same block class carry the asymmetric window `1..h_t-2` and
    /// fall outside the lemma's regime.
    pub same_class_rows: bool,
}

impl IjReport {
    /// The content of the lemma: the norm-sum identity and injectivity
    /// always; on families without same-class rows, the map is
    /// well-defined, bijective exactly when the family has even size, and
    /// even size is automatic unless `n` and `h_t` are both even.
    pub fn pass(&self) -> bool {
        let base = self.injective && self.norm_sums_ok;
        if self.same_class_rows {
            base
        } else {
            base && self.well_defined
                && (self.bijective == self.family_size_even)
                && (self.n_even_and_ht_even || self.family_size_even)
        }
    }
}

pub fn ij_injection(p: &GroupParams, seqs: &SeqData, s: usize, t: usize) -> Result<IjReport> {
    let ctx = IndexContext::from_params(p);
    let ht = seqs.h_seq[t];
    let iset = build_set(&ctx, Some(seqs), SetKind::ISet(s, t))?;
    let jset = build_set(&ctx, Some(seqs), SetKind::JSet(s, t))?;
    let fam = build_set(&ctx, Some(seqs), SetKind::AstMinusMin(s, t))?;
    let mut images = Vec::new();
    let mut well_defined = true;
    let mut norm_sums_ok = true;
    for x in &iset {
        let img = Triple {
            i: GroupParams::rep1(p.n as i64 - x.i as i64 + 2, p.n),
            j: 1,
            l: ht as i64 - 2 - x.l,
        };
        if !jset.contains(&img) {
            well_defined = false;
        }
        if x.norm(p.n) + img.norm(p.n) != p.n as i64 * (ht as i64 - 1) {
            norm_sums_ok = false;
        }
        images.push(img);
    }
    let mut sorted = images.clone();
    sorted.sort();
    sorted.dedup();
    let injective = sorted.len() == images.len();
    let bijective = well_defined && injective && images.len() == jset.len();
    let same_class_rows = fam.iter().any(|x| ctx.class(x.i) == 1);
    Ok(IjReport {
        i_size: iset.len(),
        j_size: jset.len(),
        well_defined,
        injective,
        norm_sums_ok,
        bijective,
        family_size_even: fam.len() % 2 == 0,
        n_even_and_ht_even: p.n % 2 == 0 && ht % 2 == 0,
        same_class_rows,
    })
}

/// Symbolic determinant scan: every monomial of `det(A)` for the generic
/// `G_h^1`-patterned matrix, truncated in `W_{h'}`, is enumerated as a
/// permutation plus a partition of the `pi`-exponent into window values;
/// for every pair of variables in one monomial the norm bound must hold,
/// with equality pairs mutually dual.
pub struct DetScanReport {
    pub monomials: u64,
    pub bound_violations: u64,
    pub nondual_equalities: u64,
    pub diagonal_sum_checks: bool,
}

impl DetScanReport {
    pub fn pass(&self) -> bool {
        self.bound_violations == 0 && self.nondual_equalities == 0 && self.diagonal_sum_checks
    }
}

pub fn det_contribution_scan(p: &GroupParams, h_prime: usize) -> Result<DetScanReport> {
    if p.n > 3 || h_prime > 3 || h_prime > p.h {
        return Err(Error::Budget("det scan is limited to n <= 3, h' <= 3".into()));
    }
    let ctx = IndexContext::from_params(p);
    let n = p.n as usize;
    let mut monomials = 0u64;
    let mut bound_violations = 0u64;
    let mut nondual_equalities = 0u64;
    let mut diagonal_sum_checks = true;
    let bound = p.n as i64 * (h_prime as i64 - 1);
    // iterate permutations of {0..n-1}
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        // per-position choices: for diagonal positions, the constant 1
        // (encoded l = None) or a variable l in the window; off-diagonal:
        // variable only.
        let mut choices: Vec<Vec<Option<i64>>> = Vec::with_capacity(n);
        for i in 0..n {
            let j = perm[i];
            let (lo, hi) = ctx.l_window(i as u32 + 1, j as u32 + 1, p.h);
            let mut c: Vec<Option<i64>> = Vec::new();
            if i == j {
                c.push(None);
            }
            for l in lo..=hi {
                c.push(Some(l));
            }
            choices.push(c);
        }
        let mut idx = vec![0usize; n];
        loop {
            // assemble the monomial
            let mut vars: Vec<Triple> = Vec::new();
            let mut lsum: i64 = 0;
            for i in 0..n {
                if let Some(l) = choices[i][idx[i]] {
                    vars.push(Triple { i: i as u32 + 1, j: perm[i] as u32 + 1, l });
                    lsum += l;
                }
            }
            if lsum <= h_prime as i64 - 1 {
                monomials += 1;
                // diagonal-only monomials: per-factor norm n*l_i, sum n*l
                if perm.iter().enumerate().all(|(i, &j)| i == j) {
                    let s: i64 = vars.iter().map(|v| v.norm(p.n)).sum();
                    if s != p.n as i64 * lsum {
                        diagonal_sum_checks = false;
                    }
                }
                for a in 0..vars.len() {
                    for b in a + 1..vars.len() {
                        let s = vars[a].norm(p.n) + vars[b].norm(p.n);
                        if s > bound {
                            bound_violations += 1;
                        } else if s == bound
                            && (vars[a].i != vars[a].j || vars[b].i != vars[b].j)
                            && vars[b] != vars[a].dual(h_prime)
                        {
                            // duality at equality holds for pairs touching
                            // the off-diagonal coordinates (the indexing
                            // set A); diagonal-diagonal pairs are the
                            // determinant direction and are exempt
                            nondual_equalities += 1;
                        }
                    }
                }
            }
            // odometer over choices
            let mut pos = 0;
            loop {
                if pos == n {
                    break;
                }
                idx[pos] += 1;
                if idx[pos] == choices[pos].len() {
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
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(DetScanReport { monomials, bound_violations, nondual_equalities, diagonal_sum_checks })
}

fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(n: u32, kappa: u32, h: usize) -> (GroupParams, IndexContext) {
        let p = GroupParams::new(2, 1, n, kappa, h).unwrap();
        (p, IndexContext::from_params(&p))
    }

    #[test]
    fn a_plus_cardinality() {
        // #A+ = n^2 (h-1)
        for (n, kappa, h) in [(2, 0, 2), (2, 1, 3), (3, 1, 2), (4, 2, 3), (6, 4, 2)] {
            let (_, c) = ctx(n, kappa, h);
            let a_plus = build_set(&c, None, SetKind::APlus).unwrap();
            assert_eq!(a_plus.len() as u32, n * n * (h as u32 - 1));
        }
        // h = 1: A^min is empty
        let (_, c) = ctx(3, 1, 1);
        assert!(build_set(&c, None, SetKind::AMin).unwrap().is_empty());
    }

    #[test]
    fn a_min_window_table_matches_duality_definition() {
        for (n, kappa, h) in [(2, 1, 3), (4, 2, 2), (6, 2, 3), (3, 0, 4)] {
            let (_, c) = ctx(n, kappa, h);
            let amin = build_set(&c, None, SetKind::AMin).unwrap();
            for t in &amin {
                // window table of e:index min
                let (ci, cj) = (c.class(t.i), c.class(t.j));
                let ok = if ci > cj {
                    t.l >= 0 && t.l <= c.h as i64 - 2
                } else if ci < cj {
                    t.l >= 1 && t.l <= c.h as i64 - 1
                } else {
                    t.l >= 1 && t.l <= c.h as i64 - 2
                };
                assert!(ok, "window table fails at {t:?}");
                // duality is an involution with the norm sum identity
                let d = t.dual(c.h);
                assert!(amin.contains(&d));
                assert_eq!(d.dual(c.h), *t);
                assert_eq!(t.norm(c.n) + d.norm(c.n), c.n as i64 * (c.h as i64 - 1));
            }
        }
    }

    #[test]
    fn complement_count_is_n_prime_minus_1() {
        for (n, kappa, h) in [(2, 0, 2), (4, 2, 2), (6, 3, 3), (6, 2, 2), (8, 4, 2)] {
            let (p, _) = ctx(n, kappa, h);
            let seqs = SeqData { m_seq: alloc::vec![1], h_seq: alloc::vec![h] };
            let rep = closed_form_cards(&p, &seqs).unwrap();
            assert_eq!(rep.complement_count, rep.n_prime_minus_1, "at ({n},{kappa},{h})");
        }
    }

    #[test]
    fn trivial_character_closed_forms() {
        // trivial sequences: e_chi = (n-1)(h-1) - (n'-1), f_chi = 0
        for (n, kappa, h) in [(2u32, 0u32, 2usize), (3, 0, 3), (4, 2, 2), (6, 4, 3)] {
            let (p, _) = ctx(n, kappa, h);
            let seqs = SeqData { m_seq: alloc::vec![1], h_seq: alloc::vec![h] };
            let rep = closed_form_cards(&p, &seqs).unwrap();
            assert!(rep.pass(), "at ({n},{kappa},{h}): {:?} vs {:?}", rep.e_enum, rep.e_closed);
            let e: i64 = rep.e_enum.iter().sum();
            assert_eq!(e, (n as i64 - 1) * (h as i64 - 1) - (p.n_prime as i64 - 1));
            assert_eq!(rep.f_enum.iter().sum::<i64>(), 0);
        }
    }

    #[test]
    fn ij_midpoint_case() {
        // n, h_t both even with the midpoint present: not bijective.
        // Use kappa coprime to n so all family rows have class != 1.
        let (p, _) = ctx(2, 1, 4);
        let seqs = SeqData { m_seq: alloc::vec![1, 2], h_seq: alloc::vec![4, 4] };
        let rep = ij_injection(&p, &seqs, 0, 1).unwrap();
        assert!(!rep.same_class_rows);
        assert!(rep.pass());
        assert!(!rep.bijective);
        assert!(!rep.family_size_even);
        // the midpoint ((n+2)/2, 1, (h_t-2)/2) = (2,1,1) is in the family
        // and has no preimage
        let c = IndexContext::from_params(&p);
        let fam = build_set(&c, Some(&seqs), SetKind::AstMinusMin(0, 1)).unwrap();
        assert!(fam.contains(&Triple { i: 2, j: 1, l: 1 }));
    }

    #[test]
    fn ij_bijective_when_n_odd() {
        let (p, _) = ctx(3, 1, 3);
        let seqs = SeqData { m_seq: alloc::vec![1, 3], h_seq: alloc::vec![3, 3] };
        let rep = ij_injection(&p, &seqs, 0, 1).unwrap();
        assert!(!rep.same_class_rows);
        assert!(rep.pass());
        assert!(rep.bijective);
    }

    #[test]
    fn ij_same_class_row_counterexample_documented() {
        // For n0 < n the displayed map can leave the family: at
        // (n,kappa,h) = (2,0,3) the family is the singleton {(2,1,1)} (odd
        // size despite h_t odd) and I -> J cannot be well-defined. The
        // lemma's regime excludes same-class rows; the report records it.
        let (p, _) = ctx(2, 0, 3);
        let seqs = SeqData { m_seq: alloc::vec![1, 2], h_seq: alloc::vec![3, 3] };
        let rep = ij_injection(&p, &seqs, 0, 1).unwrap();
        assert!(rep.same_class_rows);
        assert!(!rep.well_defined);
        assert!(!rep.family_size_even);
        assert!(rep.pass());
    }

    #[test]
    fn det_scan_small_instances() {
        // n=2, h'=2, kappa=1: the off-diagonal quadratic terms pair
        // (2,1,0) with (1,2,1), norms -1+... i-j+nl: 1 + 1 = 2 = n(h'-1)
        let p = GroupParams::new(2, 1, 2, 1, 2).unwrap();
        let rep = det_contribution_scan(&p, 2).unwrap();
        assert!(rep.pass());
        assert!(rep.monomials > 0);
        // full scans for n <= 3, h' <= 3, all kappa
        for n in 1..=3u32 {
            for kappa in 0..n {
                for h in 2..=3usize {
                    for hp in 2..=h {
                        let p = GroupParams::new(2, 1, n, kappa, h).unwrap();
                        let rep = det_contribution_scan(&p, hp).unwrap();
                        assert!(rep.pass(), "violation at ({n},{kappa},{h},{hp})");
                    }
                }
            }
        }
    }

    #[test]
    fn norm_example_pair() {
        // (2,1,0) and (1,2,1) at n=2: norms 1 and 1, summing to n(h'-1)=2,
        // and they are mutually dual relative to h'=2
        let a = Triple { i: 2, j: 1, l: 0 };
        let b = Triple { i: 1, j: 2, l: 1 };
        assert_eq!(a.norm(2), 1);
        assert_eq!(b.norm(2), 1);
        assert_eq!(a.dual(2), b);
    }
}

/// Debug helper: all equality pairs of the determinant scan.
pub fn debug_equality_pairs(p: &GroupParams, h_prime: usize) -> Result<Vec<(Triple, Triple)>> {
    let ctx = IndexContext::from_params(p);
    let n = p.n as usize;
    let bound = p.n as i64 * (h_prime as i64 - 1);
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        let mut choices: Vec<Vec<Option<i64>>> = Vec::with_capacity(n);
        for i in 0..n {
            let j = perm[i];
            let (lo, hi) = ctx.l_window(i as u32 + 1, j as u32 + 1, p.h);
            let mut c: Vec<Option<i64>> = Vec::new();
            if i == j {
                c.push(None);
            }
            for l in lo..=hi {
                c.push(Some(l));
            }
            choices.push(c);
        }
        let mut idx = vec![0usize; n];
        loop {
            let mut vars: Vec<Triple> = Vec::new();
            let mut lsum: i64 = 0;
            for i in 0..n {
                if let Some(l) = choices[i][idx[i]] {
                    vars.push(Triple { i: i as u32 + 1, j: perm[i] as u32 + 1, l });
                    lsum += l;
                }
            }
            if lsum <= h_prime as i64 - 1 {
                for a in 0..vars.len() {
                    for b in a + 1..vars.len() {
                        if vars[a].norm(p.n) + vars[b].norm(p.n) == bound {
                            out.push((vars[a], vars[b]));
                        }
                    }
                }
            }
            let mut pos = 0;
            loop {
                if pos == n {
                    break;
                }
                idx[pos] += 1;
                if idx[pos] == choices[pos].len() {
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
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(out)
}
