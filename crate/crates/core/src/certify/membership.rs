//! Membership certificates: a Gram matrix locally PSD on `V(q_1..q_i)(ℝ)`.

use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::amgm::{amgm_check, AmgmCertificate};
use super::CertifyError;
use crate::exactla::{psd_check, LdlFactorization, PsdVerdict};
use crate::forms::{rat_serde, Dims, Form, Poly, Rat};
use crate::gram::{gram_apply, SymMatrix};
use crate::variety::{boundary_strata, chart, restrict_to_chart, BoundaryStratum, ChartMap};

/// Nonnegativity of the chart polynomial `q_A(1, z)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "style")]
pub enum ChartProof {
    /// The chart polynomial equals `g(1, z_1..z_n)` and `g` carries an AM-GM certificate.
    IdentityWithPsdForm { form: Form, amgm: AmgmCertificate },
    /// The chart polynomial equals `Σ c_j h_j²`.
    ExactSos {
        squares: Vec<Poly>,
        #[serde(with = "rat_serde::vec")]
        weights: Vec<Rat>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChartHint {
    Amgm,
    ExactSos,
    Auto,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryProof {
    pub stratum: BoundaryStratum,
    pub factorization: Factorization,
}

/// Serializable `PᵀAP = LDLᵀ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    pub perm: Vec<usize>,
    /// Strictly-lower entries `(row, col, value)` in permuted coordinates.
    pub l: Vec<(usize, usize, String)>,
    #[serde(with = "rat_serde::vec")]
    pub d: Vec<Rat>,
}

impl Factorization {
    pub fn from_ldl(f: &LdlFactorization) -> Self {
        let mut l = Vec::new();
        for (r, row) in f.l.iter().enumerate() {
            for (c, v) in row.iter().enumerate().take(r) {
                if !v.is_zero() {
                    l.push((r, c, crate::forms::format_rat(v)));
                }
            }
        }
        Factorization { perm: f.perm.clone(), l, d: f.d.clone() }
    }

    pub fn to_ldl(&self) -> Option<LdlFactorization> {
        let n = self.perm.len();
        let mut l = vec![vec![Rat::zero(); n]; n];
        for (r, row) in l.iter_mut().enumerate() {
            row[r] = Rat::one();
        }
        for (r, c, v) in &self.l {
            if *r >= n || *c >= *r {
                return None;
            }
            l[*r][*c] = crate::forms::parse_rat(v)?;
        }
        Some(LdlFactorization { perm: self.perm.clone(), l, d: self.d.clone() })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MembershipCertificate {
    pub dims: Dims,
    pub level: usize,
    pub form: Form,
    pub gram: SymMatrix,
    pub chart_proof: ChartProof,
    pub boundary: Vec<BoundaryProof>,
}

/// `x_l ↦ z_l` for `l = 1..n`, into the `k+1` chart variables.
pub fn lift_dehomogenized(f: &Form, dims: Dims) -> Result<Poly, CertifyError> {
    let p = f.dehomogenize(0)?;
    let map: Vec<usize> = (0..f.nvars()).collect();
    Ok(p.rename(&map, dims.basis_len())?)
}

fn chart_polynomial(a: &SymMatrix, ch: &ChartMap) -> Result<Poly, CertifyError> {
    Ok(restrict_to_chart(a, ch)?)
}

fn check_chart_proof(proof: &ChartProof, target: &Poly, dims: Dims) -> Result<(), CertifyError> {
    match proof {
        ChartProof::IdentityWithPsdForm { form, amgm } => {
            if form.nvars() != dims.nvars() {
                return Err(CertifyError::ChartProofFails("identity form has the wrong variable count".into()));
            }
            if &lift_dehomogenized(form, dims)? != target {
                return Err(CertifyError::ChartProofFails("chart polynomial differs from the dehomogenized form".into()));
            }
            amgm.verify(form).map_err(|e| CertifyError::ChartProofFails(format!("AM-GM: {e}")))
        }
        ChartProof::ExactSos { squares, weights } => {
            if squares.len() != weights.len() || weights.iter().any(|w| !w.is_positive()) {
                return Err(CertifyError::ChartProofFails("weights must be positive, one per square".into()));
            }
            let mut sum = Poly::zero(target.nvars());
            for (h, c) in squares.iter().zip(weights) {
                if h.nvars() != target.nvars() {
                    return Err(CertifyError::ChartProofFails("square has the wrong variable count".into()));
                }
                sum = sum.add(&h.square().scale(c));
            }
            if &sum != target {
                return Err(CertifyError::ChartProofFails("sum of squares differs from the chart polynomial".into()));
            }
            Ok(())
        }
    }
}

/// `q_A(1,z) = Σ d_t (Σ_a L[a][t] z_{perm[a]})²` restricted to the chart.
fn sos_from_ldl(f: &LdlFactorization, ch: &ChartMap) -> ChartProof {
    let mons = ch.coordinate_monomials();
    let k1 = ch.dims.basis_len();
    let mut squares = Vec::new();
    let mut weights = Vec::new();
    for (t, d) in f.d.iter().enumerate() {
        if d.is_zero() {
            continue;
        }
        let mut h = Poly::zero(k1);
        for a in t..f.perm.len() {
            let l = &f.l[a][t];
            if !l.is_zero() {
                h.add_term(mons[f.perm[a]].clone(), l.clone());
            }
        }
        squares.push(h);
        weights.push(d.clone());
    }
    ChartProof::ExactSos { squares, weights }
}

fn boundary_proofs(a: &SymMatrix, dims: Dims, level: usize) -> Result<Vec<BoundaryProof>, CertifyError> {
    let mut out = Vec::new();
    for stratum in boundary_strata(dims, level)? {
        let sub = a.principal_submatrix(&stratum.surviving(dims));
        match psd_check(&sub) {
            PsdVerdict::Psd(f) => out.push(BoundaryProof { stratum, factorization: Factorization::from_ldl(&f) }),
            PsdVerdict::NotPsd(w) => {
                return Err(CertifyError::BoundaryNotPsd { zero_set: stratum.zero_set, witness: w.vector, value: w.value })
            }
        }
    }
    Ok(out)
}

/// Builds and self-checks a membership certificate for `f ∈ C_level` with Gram matrix `a`.
pub fn verify_membership(f: &Form, level: usize, a: &SymMatrix, hint: ChartHint) -> Result<MembershipCertificate, CertifyError> {
    let dims = f.gram_dims()?;
    if gram_apply(a, dims)? != *f {
        return Err(CertifyError::GramMismatch);
    }
    let ch = chart(dims, level)?;
    let target = chart_polynomial(a, &ch)?;
    let try_amgm = || -> Result<ChartProof, CertifyError> {
        if lift_dehomogenized(f, dims)? != target {
            return Err(CertifyError::ChartProofFails("Gram support reaches beyond the dependent coordinates".into()));
        }
        let amgm = amgm_check(f).map_err(|e| CertifyError::ChartProofFails(format!("AM-GM: {e}")))?;
        Ok(ChartProof::IdentityWithPsdForm { form: f.clone(), amgm })
    };
    let try_sos = || -> Result<ChartProof, CertifyError> {
        match psd_check(a) {
            PsdVerdict::Psd(fac) => Ok(sos_from_ldl(&fac, &ch)),
            PsdVerdict::NotPsd(_) => Err(CertifyError::ChartProofFails("Gram matrix is not PSD".into())),
        }
    };
    let chart_proof = match hint {
        ChartHint::Amgm => try_amgm()?,
        ChartHint::ExactSos => try_sos()?,
        ChartHint::Auto => try_sos().or_else(|_| try_amgm())?,
    };
    let boundary = boundary_proofs(a, dims, level)?;
    let cert = MembershipCertificate { dims, level, form: f.clone(), gram: a.clone(), chart_proof, boundary };
    cert.verify()?;
    Ok(cert)
}

impl MembershipCertificate {
    pub fn verify(&self) -> Result<(), CertifyError> {
        let dims = self.form.gram_dims()?;
        if dims != self.dims {
            return Err(CertifyError::GramMismatch);
        }
        if self.gram.size() != dims.basis_len() || gram_apply(&self.gram, dims)? != self.form {
            return Err(CertifyError::GramMismatch);
        }
        let ch = chart(dims, self.level)?;
        let target = chart_polynomial(&self.gram, &ch)?;
        check_chart_proof(&self.chart_proof, &target, dims)?;
        let strata = boundary_strata(dims, self.level)?;
        if strata.len() != self.boundary.len() {
            return Err(CertifyError::BoundaryMissing);
        }
        for (stratum, proof) in strata.iter().zip(&self.boundary) {
            if stratum != &proof.stratum {
                return Err(CertifyError::BoundaryMissing);
            }
            let sub = self.gram.principal_submatrix(&stratum.surviving(dims));
            let ok = proof.factorization.to_ldl().is_some_and(|f| f.verify(&sub));
            if !ok {
                return Err(CertifyError::BoundaryProofInvalid { zero_set: stratum.zero_set.clone() });
            }
        }
        Ok(())
    }

    /// Re-proves membership one level up, where the chart is refined and the strata shrink.
    pub fn lift_level(&self) -> Result<MembershipCertificate, CertifyError> {
        let hint = match self.chart_proof {
            ChartProof::IdentityWithPsdForm { .. } => ChartHint::Amgm,
            ChartProof::ExactSos { .. } => ChartHint::ExactSos,
        };
        verify_membership(&self.form, self.level + 1, &self.gram, hint)
    }
}

