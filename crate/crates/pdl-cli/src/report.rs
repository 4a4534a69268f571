//! The one report schema every suite emits:
//! `{tool_version, tower, params, suite, checks[], wall_time_ms}`.

use serde::Serialize;

#[derive(Serialize, Clone)]
pub struct TowerBlock {
    pub p: u64,
    pub a: u32,
    pub n_ambient: u32,
    pub modulus_coeffs: Vec<u64>,
}

impl From<pdl_core::field::TowerDesc> for TowerBlock {
    fn from(d: pdl_core::field::TowerDesc) -> Self {
        TowerBlock { p: d.p, a: d.a, n_ambient: d.n_ambient, modulus_coeffs: d.modulus_coeffs }
    }
}

#[derive(Serialize, Clone)]
pub struct ParamsBlock {
    pub p: u64,
    pub q: u64,
    pub n: u32,
    pub kappa: u32,
    pub n0: u32,
    pub k0: u32,
    pub n_prime: u32,
    pub e: u32,
    pub h: usize,
}

impl From<pdl_core::params::GroupParams> for ParamsBlock {
    fn from(p: pdl_core::params::GroupParams) -> Self {
        ParamsBlock {
            p: p.p,
            q: p.q,
            n: p.n,
            kappa: p.kappa,
            n0: p.n0,
            k0: p.k0,
            n_prime: p.n_prime,
            e: p.e,
            h: p.h,
        }
    }
}

#[derive(Serialize)]
pub struct Check {
    pub name: String,
    pub expected: serde_json::Value,
    pub got: serde_json::Value,
    pub pass: bool,
}

impl Check {
    pub fn new<A: Serialize, B: Serialize>(name: &str, expected: A, got: B, pass: bool) -> Check {
        Check {
            name: name.to_string(),
            expected: serde_json::to_value(expected).unwrap(),
            got: serde_json::to_value(got).unwrap(),
            pass,
        }
    }

    pub fn eq<A: Serialize + PartialEq>(name: &str, expected: A, got: A) -> Check {
        let pass = expected == got;
        Check::new(name, expected, got, pass)
    }
}

#[derive(Serialize)]
pub struct Report {
    pub tool_version: String,
    pub tower: Option<TowerBlock>,
    pub params: Option<ParamsBlock>,
    pub suite: String,
    pub checks: Vec<Check>,
    /// Extra suite-specific payload (tables, histograms, metadata).
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub data: serde_json::Value,
    pub wall_time_ms: u128,
}

impl Report {
    pub fn new(suite: &str) -> Report {
        Report {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            tower: None,
            params: None,
            suite: suite.to_string(),
            checks: Vec::new(),
            data: serde_json::Value::Null,
            wall_time_ms: 0,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}
