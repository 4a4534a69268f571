//! Exact arithmetic models of parahoric Deligne-Lusztig varieties for inner
//! forms of `GL_n` over a local field with residue field `F_q`, in the
//! equal-characteristic (truncated polynomial) model.
//!
//! Everything here is exact: finite field arithmetic runs on discrete-log
//! tables inside one ambient field, character values live in cyclotomic
//! integer rings, and every count is an integer. The crate is `no_std`
//! (with `alloc`); IO, file formats and the CLI live in the companion
//! `pdl-cli` crate.
//!
//! Module map:
//! * [`field`] - one ambient finite field `F_{q^N}` with canonical
//!   subfields, Frobenius, trace and norm.
//! * [`linalg`] - dense linear algebra over the tower (rank, determinant,
//!   adjugate, spans, semilinear solves).
//! * [`witt`] - truncated Witt rings `W_h`, the twisted ring scheme `W`,
//!   and shaped coordinate spaces.
//! * [`params`] - the parameter pack `(p, q, n, kappa, n0, k0, n', e, h)`.
//! * [`parahoric`] - explicit representatives, the twisted Frobenius `F`,
//!   membership patterns and group enumeration at level `h`.
//! * [`variety`] - the point model of `X_h`, its Drinfeld strata and group
//!   actions.
//! * [`chars`] - characters of `W_h^x(F_{q^n})`, Howe factorization
//!   invariants and the degree/dimension formulas.
//! * [`indexsets`] - the normed indexing combinatorics behind the degree
//!   formulas, plus the symbolic determinant scanner.
//! * [`lefschetz`] - twisted fixed-point counts and the verification
//!   suites built on them.
//! * [`fibers`] - the fiber normal form for the projections
//!   `X_h^+ -> X_{h-1}^+`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod chars;
pub mod cyclo;
pub mod field;
pub mod fibers;
pub mod indexsets;
pub mod lefschetz;
pub mod linalg;
pub mod params;
pub mod parahoric;
pub mod snf;
pub mod unitgrp;
pub mod variety;
pub mod witt;

use alloc::string::String;

/// Error type shared by the fallible constructors and operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Invalid or inconsistent parameters.
    Param(String),
    /// A size/budget guard would be exceeded.
    Budget(String),
    /// An internal consistency assertion failed (these indicate a bug or a
    /// falsified theorem-level claim and are reported, never normalized).
    Consistency(String),
}

impl core::fmt::Display for Error {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Error::Param(s) => write!(f, "parameter error: {s}"),
            Error::Budget(s) => write!(f, "budget exceeded: {s}"),
            Error::Consistency(s) => write!(f, "consistency error: {s}"),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
