//! Smith normal form over the integers and the linear congruence solver
//! built on it (used to construct characters subject to prescribed values).

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

/// Dense integer matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<BigInt>,
}

impl IntMat {
    pub fn zeros(rows: usize, cols: usize) -> IntMat {
        IntMat { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> IntMat {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::from(1);
        }
        m
    }

    pub fn mul(&self, other: &IntMat) -> IntMat {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self[(i, k)].is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let d = &self[(i, k)] * &other[(k, j)];
                    out[(i, j)] += d;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| &self[(i, j)] * &v[j]).sum())
            .collect()
    }
}

impl core::ops::Index<(usize, usize)> for IntMat {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for IntMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

/// Smith normal form: returns `(d, u, v)` with `u * a * v = d` diagonal,
/// `u`, `v` unimodular.
pub fn smith_normal_form(a: &IntMat) -> (IntMat, IntMat, IntMat) {
    let mut d = a.clone();
    let mut u = IntMat::identity(a.rows);
    let mut v = IntMat::identity(a.cols);
    let n = a.rows.min(a.cols);
    for t in 0..n {
        loop {
            // find a pivot (smallest nonzero magnitude) in the submatrix
            let mut pivot: Option<(usize, usize)> = None;
            for i in t..d.rows {
                for j in t..d.cols {
                    if !d[(i, j)].is_zero()
                        && pivot.map_or(true, |(pi, pj)| {
                            d[(i, j)].abs() < d[(pi, pj)].abs()
                        })
                    {
                        pivot = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = pivot else {
                return (d, u, v);
            };
            swap_rows(&mut d, &mut u, t, pi);
            swap_cols(&mut d, &mut v, t, pj);
            // clear column t and row t
            let mut dirty = false;
            for i in t + 1..d.rows {
                if !d[(i, t)].is_zero() {
                    let q = div_round(&d[(i, t)], &d[(t, t)]);
                    row_op(&mut d, &mut u, i, t, &q);
                    if !d[(i, t)].is_zero() {
                        dirty = true;
                    }
                }
            }
            for j in t + 1..d.cols {
                if !d[(t, j)].is_zero() {
                    let q = div_round(&d[(t, j)], &d[(t, t)]);
                    col_op(&mut d, &mut v, j, t, &q);
                    if !d[(t, j)].is_zero() {
                        dirty = true;
                    }
                }
            }
            if dirty {
                continue;
            }
            let clean = (t + 1..d.rows).all(|i| d[(i, t)].is_zero())
                && (t + 1..d.cols).all(|j| d[(t, j)].is_zero());
            if clean {
                break;
            }
        }
    }
    // make diagonal entries nonnegative (divisibility chain is not needed
    // by the congruence solver)
    for t in 0..n {
        if d[(t, t)].is_negative() {
            for j in 0..d.cols {
                let x = -d[(t, j)].clone();
                d[(t, j)] = x;
            }
            for j in 0..u.cols {
                let x = -u[(t, j)].clone();
                u[(t, j)] = x;
            }
        }
    }
    (d, u, v)
}

fn swap_rows(d: &mut IntMat, u: &mut IntMat, a: usize, b: usize) {
    if a == b {
        return;
    }
    for j in 0..d.cols {
        d.data.swap(a * d.cols + j, b * d.cols + j);
    }
    for j in 0..u.cols {
        u.data.swap(a * u.cols + j, b * u.cols + j);
    }
}

fn swap_cols(d: &mut IntMat, v: &mut IntMat, a: usize, b: usize) {
    if a == b {
        return;
    }
    for i in 0..d.rows {
        d.data.swap(i * d.cols + a, i * d.cols + b);
    }
    for i in 0..v.rows {
        v.data.swap(i * v.cols + a, i * v.cols + b);
    }
}

/// row_i -= q * row_t
fn row_op(d: &mut IntMat, u: &mut IntMat, i: usize, t: usize, q: &BigInt) {
    for j in 0..d.cols {
        let delta = q * &d[(t, j)];
        d[(i, j)] -= delta;
    }
    for j in 0..u.cols {
        let delta = q * &u[(t, j)];
        u[(i, j)] -= delta;
    }
}

/// col_j -= q * col_t
fn col_op(d: &mut IntMat, v: &mut IntMat, j: usize, t: usize, q: &BigInt) {
    for i in 0..d.rows {
        let delta = q * &d[(i, t)];
        d[(i, j)] -= delta;
    }
    for i in 0..v.rows {
        let delta = q * &v[(i, t)];
        v[(i, j)] -= delta;
    }
}

fn div_round(a: &BigInt, b: &BigInt) -> BigInt {
    // rounded division keeps entries small
    let two = BigInt::from(2);
    let (q, r) = (a / b, a % b);
    if &(&r.abs() * &two) > &b.abs() {
        if (r.is_negative()) == (b.is_negative()) {
            q + 1
        } else {
            q - 1
        }
    } else {
        q
    }
}

/// Solves `A x = b (mod m)`. Returns a particular solution (entries reduced
/// mod `m`) and generators of the solution lattice mod `m` (kernel vectors),
/// or `None` if inconsistent.
pub fn solve_mod(a: &IntMat, b: &[BigInt], m: &BigInt) -> Option<(Vec<BigInt>, Vec<Vec<BigInt>>)> {
    assert_eq!(b.len(), a.rows);
    let (r, c) = (a.rows, a.cols);
    // C = [A | m I], solve C z = b over Z
    let mut cmat = IntMat::zeros(r, c + r);
    for i in 0..r {
        for j in 0..c {
            cmat[(i, j)] = a[(i, j)].clone();
        }
        cmat[(i, c + i)] = m.clone();
    }
    let (d, u, v) = smith_normal_form(&cmat);
    let ub = u.mul_vec(b);
    let mut w = vec![BigInt::zero(); c + r];
    for i in 0..r {
        let di = if i < d.cols { d[(i, i)].clone() } else { BigInt::zero() };
        if di.is_zero() {
            if !ub[i].is_zero() {
                return None;
            }
        } else {
            let (q, rem) = (&ub[i] / &di, &ub[i] % &di);
            if !rem.is_zero() {
                return None;
            }
            w[i] = q;
        }
    }
    let z = v.mul_vec(&w);
    let part: Vec<BigInt> = z[..c].iter().map(|x| x.mod_floor_big(m)).collect();
    // kernel: V-columns at free positions (zero diagonal)
    let mut kernel = Vec::new();
    for t in 0..c + r {
        let free = t >= r || d[(t, t)].is_zero();
        if free {
            let col: Vec<BigInt> = (0..c).map(|i| v[(i, t)].mod_floor_big(m)).collect();
            if col.iter().any(|x| !x.is_zero()) {
                kernel.push(col);
            }
        }
    }
    Some((part, kernel))
}

trait ModFloor {
    fn mod_floor_big(&self, m: &BigInt) -> BigInt;
}

impl ModFloor for BigInt {
    fn mod_floor_big(&self, m: &BigInt) -> BigInt {
        let r = self % m;
        if r.is_negative() {
            r + m
        } else {
            r
        }
    }
}
