//! Numeric SOS search for `C_0` with exact rounding.
//!
//! Alternating projection between `{A ⪰ εI}` and the affine Gram coset, then
//! continued-fraction rounding, exact re-projection and an exact `psd_check`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num::{BigInt, One, Signed, ToPrimitive, Zero};

use super::membership::{verify_membership, ChartHint, MembershipCertificate};
use super::CertifyError;
use crate::exactla::psd_check;
use crate::forms::{rat_to_f64, Form, Rat};
use crate::gram::{generic_gram, project_onto_form, project_onto_form_f64, Basis, SymMatrix};

#[derive(Clone, Debug)]
pub struct SosConfig {
    pub iterations: usize,
    pub tolerance: f64,
}

impl Default for SosConfig {
    fn default() -> Self {
        SosConfig { iterations: 4000, tolerance: 1e-9 }
    }
}

#[derive(Clone, Debug)]
pub enum SosOutcome {
    Found(Box<MembershipCertificate>),
    /// Not a proof of non-membership.
    NotFound { residual: f64 },
}

/// Best rational with denominator at most `max_den`.
pub fn continued_fraction(v: f64, max_den: &BigInt) -> Rat {
    if !v.is_finite() {
        return Rat::zero();
    }
    let (mut p0, mut q0) = (BigInt::zero(), BigInt::one());
    let (mut p1, mut q1) = (BigInt::one(), BigInt::zero());
    let mut x = v;
    for _ in 0..64 {
        let a = x.floor();
        let ai = BigInt::from(a as i64);
        let p2 = &ai * &p1 + &p0;
        let q2 = &ai * &q1 + &q0;
        if &q2 > max_den {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = x - a;
        if frac.abs() < 1e-15 {
            break;
        }
        x = 1.0 / frac;
    }
    if q1.is_zero() {
        return Rat::from_integer(BigInt::from(v.round() as i64));
    }
    Rat::new(p1, q1)
}

fn clip(a: &[f64], size: usize, floor: f64) -> Vec<f64> {
    let m = DMatrix::from_row_slice(size, size, a);
    let e = m.symmetric_eigen();
    let vals = e.eigenvalues.map(|v| v.max(floor));
    let r = &e.eigenvectors * DMatrix::from_diagonal(&vals) * e.eigenvectors.transpose();
    let mut out = vec![0.0; size * size];
    for i in 0..size {
        for j in 0..size {
            out[i * size + j] = 0.5 * (r[(i, j)] + r[(j, i)]);
        }
    }
    out
}

fn frobenius(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Alternating projection; returns the affine iterate and the final residual.
fn alternate(start: Vec<f64>, size: usize, coeffs: &BTreeMap<crate::forms::Exponent, f64>, basis: &Basis, floor: f64, cfg: &SosConfig) -> (Vec<f64>, f64) {
    let mut a = start;
    let mut residual = f64::INFINITY;
    for _ in 0..cfg.iterations {
        let p = clip(&a, size, floor);
        let mut q = p.clone();
        project_onto_form_f64(&mut q, size, coeffs, basis);
        residual = frobenius(&p, &q);
        a = q;
        if residual < cfg.tolerance {
            break;
        }
    }
    (a, residual)
}

pub fn sos_search(f: &Form, cfg: &SosConfig) -> Result<SosOutcome, CertifyError> {
    let coset = generic_gram(f)?;
    let dims = coset.dims;
    let basis = Basis::new(dims);
    let size = basis.len();
    let scale = f.terms().map(|(_, c)| c.abs()).max().unwrap_or_else(Rat::one);
    if scale.is_zero() {
        let cert = verify_membership(f, 0, &SymMatrix::zeros(size), ChartHint::ExactSos)?;
        return Ok(SosOutcome::Found(Box::new(cert)));
    }
    let scale_f = rat_to_f64(&scale);
    let coeffs: BTreeMap<_, f64> = f.terms().map(|(e, c)| (e.clone(), rat_to_f64(c) / scale_f)).collect();
    let mut start: Vec<f64> = coset.base.to_f64().iter().map(|v| v / scale_f).collect();
    let mut best_residual = f64::INFINITY;
    for floor in [1e-3, 1e-5, 0.0] {
        let (a, residual) = alternate(start.clone(), size, &coeffs, &basis, floor, cfg);
        best_residual = best_residual.min(residual);
        start = a.clone();
        if residual >= cfg.tolerance.max(1e-7) {
            continue;
        }
        let mut den = BigInt::from(1u64 << 10);
        for _ in 0..4 {
            let mut r = SymMatrix::zeros(size);
            for i in 0..size {
                for j in i..size {
                    let v = continued_fraction(a[i * size + j], &den);
                    if !v.is_zero() {
                        r.set(i, j, v * &scale);
                    }
                }
            }
            let exact = project_onto_form(&r, f, &basis);
            if psd_check(&exact).is_psd() {
                if let Ok(cert) = verify_membership(f, 0, &exact, ChartHint::ExactSos) {
                    return Ok(SosOutcome::Found(Box::new(cert)));
                }
            }
            den = &den * &den;
            if den.to_f64().is_some_and(|d| d > 1e30) {
                break;
            }
        }
    }
    Ok(SosOutcome::NotFound { residual: best_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::rat;

    #[test]
    fn continued_fractions() {
        let big = BigInt::from(1000);
        assert_eq!(continued_fraction(0.5, &big), rat(1, 2));
        assert_eq!(continued_fraction(-0.3333333333, &big), rat(-1, 3));
        assert_eq!(continued_fraction(0.14285714, &BigInt::from(10)), rat(1, 7));
        assert_eq!(continued_fraction(2.0, &big), rat(2, 1));
    }

    #[test]
    fn manifest_sos_found() {
        let f = Form::parse("x0^4 + 2*x0^2*x1^2 + x1^4").unwrap();
        assert!(matches!(sos_search(&f, &SosConfig::default()).unwrap(), SosOutcome::Found(_)));
    }

    #[test]
    fn motzkin_not_found() {
        let m = Form::parse("x0^4*x1^2 + x0^2*x1^4 + x2^6 - 3*x0^2*x1^2*x2^2").unwrap();
        let cfg = SosConfig { iterations: 300, tolerance: 1e-9 };
        assert!(matches!(sos_search(&m, &cfg).unwrap(), SosOutcome::NotFound { .. }));
    }
}
