//! Certificate files: a versioned JSON envelope and an independent re-check.
//!
//! The re-check for refutations does not reuse the LP rows. It forms the moment matrix
//! `Y = Σ y_m z_m z_mᵀ`, checks that `Y` is constant on every fibre of the Gram map (so
//! `⟨A, Y⟩` depends only on the form) and that the induced functional is negative on `f`.

use std::path::Path;

use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::certify::{CertifyError, MembershipCertificate, RefutationCertificate};
use crate::forms::{Dims, Form, Rat};
use crate::gram::Basis;
use crate::variety::chart;

pub const VERIFIER_VERSION: &str = concat!("cone-cert ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, thiserror::Error)]
pub enum CertError {
    #[error("unknown certificate kind '{0}'")]
    UnknownKind(String),
    #[error("envelope fields disagree with the payload: {0}")]
    Envelope(String),
    #[error("independent check failed: {0}")]
    Recheck(String),
    #[error(transparent)]
    Certify(#[from] CertifyError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Envelope {
    pub kind: String,
    pub dims: Dims,
    pub level: usize,
    pub form: String,
    pub payload: serde_json::Value,
    pub verifier_version: String,
}

#[derive(Clone, Debug)]
pub enum Certificate {
    Membership(MembershipCertificate),
    Refutation(RefutationCertificate),
}

impl Certificate {
    pub fn kind(&self) -> &'static str {
        match self {
            Certificate::Membership(_) => "membership",
            Certificate::Refutation(_) => "refutation",
        }
    }

    pub fn form(&self) -> &Form {
        match self {
            Certificate::Membership(c) => &c.form,
            Certificate::Refutation(c) => &c.form,
        }
    }

    pub fn level(&self) -> usize {
        match self {
            Certificate::Membership(c) => c.level,
            Certificate::Refutation(c) => c.level,
        }
    }

    pub fn dims(&self) -> Dims {
        match self {
            Certificate::Membership(c) => c.dims,
            Certificate::Refutation(c) => c.dims,
        }
    }

    pub fn to_envelope(&self) -> Result<Envelope, CertError> {
        let payload = match self {
            Certificate::Membership(c) => serde_json::to_value(c)?,
            Certificate::Refutation(c) => serde_json::to_value(c)?,
        };
        Ok(Envelope {
            kind: self.kind().to_string(),
            dims: self.dims(),
            level: self.level(),
            form: self.form().to_text(),
            payload,
            verifier_version: VERIFIER_VERSION.to_string(),
        })
    }

    pub fn from_envelope(env: &Envelope) -> Result<Self, CertError> {
        let cert = match env.kind.as_str() {
            "membership" => Certificate::Membership(serde_json::from_value(env.payload.clone())?),
            "refutation" => Certificate::Refutation(serde_json::from_value(env.payload.clone())?),
            other => return Err(CertError::UnknownKind(other.to_string())),
        };
        if cert.dims() != env.dims || cert.level() != env.level {
            return Err(CertError::Envelope("dims or level".into()));
        }
        let f = Form::parse_with_vars(&env.form, env.dims.nvars()).map_err(|e| CertError::Envelope(e.to_string()))?;
        if &f != cert.form() {
            return Err(CertError::Envelope("form".into()));
        }
        Ok(cert)
    }

    pub fn to_json(&self) -> Result<String, CertError> {
        Ok(serde_json::to_string_pretty(&self.to_envelope()?)?)
    }

    pub fn from_json(text: &str) -> Result<Self, CertError> {
        Certificate::from_envelope(&serde_json::from_str(text)?)
    }

    pub fn write(&self, path: &Path) -> Result<(), CertError> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, CertError> {
        Certificate::from_json(&std::fs::read_to_string(path)?)
    }

    /// The certificate's own check followed by the independent one.
    pub fn verify(&self) -> Result<(), CertError> {
        match self {
            Certificate::Membership(c) => {
                c.verify()?;
                recheck_membership(c)
            }
            Certificate::Refutation(c) => {
                c.verify()?;
                recheck_refutation(c)
            }
        }
    }
}

/// `q_A ≥ 0` on Veronese points of a small grid, which lie on every chart.
fn recheck_membership(c: &MembershipCertificate) -> Result<(), CertError> {
    let basis = Basis::new(c.dims);
    let vals: Vec<Rat> = [-2i64, -1, 0, 1, 2].iter().map(|&v| Rat::from_integer(v.into())).collect();
    let n = c.dims.n;
    let mut idx = vec![0usize; n];
    let mut count = 0;
    loop {
        let mut x = vec![Rat::from_integer(1.into())];
        x.extend(idx.iter().map(|&i| vals[i].clone()));
        let z = basis.veronese(&x);
        if c.gram.quadratic_form(&z).is_negative() {
            return Err(CertError::Recheck(format!("q_A < 0 at a Veronese point {x:?}")));
        }
        count += 1;
        let mut p = 0;
        while p < n {
            idx[p] += 1;
            if idx[p] < vals.len() {
                break;
            }
            idx[p] = 0;
            p += 1;
        }
        if p == n || count >= 4000 {
            return Ok(());
        }
    }
}

fn recheck_refutation(c: &RefutationCertificate) -> Result<(), CertError> {
    let ch = chart(c.dims, c.level).map_err(|e| CertError::Recheck(e.to_string()))?;
    if c.points.len() != c.farkas.multipliers.len() {
        return Err(CertError::Recheck("one multiplier per point".into()));
    }
    for z in &c.points {
        ch.check_point(z).map_err(|e| CertError::Recheck(e.to_string()))?;
    }
    let basis = Basis::new(c.dims);
    let size = basis.len();
    let mut y = vec![vec![Rat::zero(); size]; size];
    for (z, m) in c.points.iter().zip(&c.farkas.multipliers) {
        if m.is_negative() {
            return Err(CertError::Recheck("negative multiplier".into()));
        }
        let m = Rat::from_integer(m.clone());
        for i in 0..size {
            for j in i..size {
                y[i][j] += &m * &z[i] * &z[j];
            }
        }
    }
    let mut functional = Rat::zero();
    for (beta, pairs) in basis.groups() {
        let (i0, j0) = pairs[0];
        let v = &y[i0][j0];
        if pairs.iter().any(|&(i, j)| &y[i][j] != v) {
            return Err(CertError::Recheck(format!("moment matrix is not constant on the fibre of {beta}")));
        }
        functional += c.form.coefficient(beta) * v;
    }
    if !functional.is_negative() {
        return Err(CertError::Recheck("the moment functional is not negative on the form".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::certify::{refute_exact, verify_membership, ChartHint};

    #[test]
    fn envelope_roundtrip_and_tamper() {
        let e = catalog::get("choi_lam_quartic_sigma").unwrap();
        let m = verify_membership(&e.form, 4, e.gram.as_ref().unwrap(), ChartHint::Auto).unwrap();
        let cert = Certificate::Membership(m);
        let text = cert.to_json().unwrap();
        let back = Certificate::from_json(&text).unwrap();
        back.verify().unwrap();
        let mut env: Envelope = serde_json::from_str(&text).unwrap();
        env.level = 3;
        assert!(Certificate::from_envelope(&env).is_err());
    }

    #[test]
    fn refutation_recheck() {
        let m = catalog::get("motzkin").unwrap().form;
        let ch = chart(m.gram_dims().unwrap(), 0).unwrap();
        let mut oracle = crate::certify::search::ChartOracle::new(ch, 0);
        let out = crate::certify::refute::cutting_plane(&m, 0, Vec::new(), &mut oracle, &Default::default()).unwrap();
        let c = out.certificate().unwrap().clone();
        let again = refute_exact(&m, 0, &c.points).unwrap();
        let cert = Certificate::Refutation(again.certificate().unwrap().clone());
        cert.verify().unwrap();
        let mut bad = c.clone();
        bad.farkas.multipliers[0] += 1;
        assert!(Certificate::Refutation(bad).verify().is_err());
    }
}
