//! Weighted AM-GM nonnegativity certificates for forms with one negative term.

use num::{BigInt, Integer, One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::exactla::{lp_feasible, LpOutcome, RatMatrix};
use crate::forms::{rat_serde, Exponent, Form, Rat};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmgmTerm {
    pub exponent: Exponent,
    #[serde(with = "rat_serde")]
    pub coefficient: Rat,
    #[serde(with = "rat_serde")]
    pub weight: Rat,
}

/// `Σ λ_j (c_j/λ_j) X^{β_j} ≥ Π (c_j/λ_j)^{λ_j} |X^β| ≥ |c| |X^β|`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmgmCertificate {
    pub sources: Vec<AmgmTerm>,
    pub target: Exponent,
    #[serde(with = "rat_serde")]
    pub target_coefficient: Rat,
    pub odd_target: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AmgmError {
    #[error("form does not have exactly one negative term with all others even and positive")]
    Structure,
    #[error("target exponent is not a convex combination of the source exponents")]
    NoWeights,
    #[error("weighted bound is too small for the negative coefficient")]
    BoundFails,
    #[error("certificate does not match the form: {0}")]
    Mismatch(&'static str),
}

fn split(f: &Form) -> Result<(Vec<(Exponent, Rat)>, (Exponent, Rat)), AmgmError> {
    let mut pos = Vec::new();
    let mut neg = None;
    for (e, c) in f.terms() {
        if c.is_negative() {
            if neg.is_some() {
                return Err(AmgmError::Structure);
            }
            neg = Some((e.clone(), c.clone()));
        } else {
            if !e.is_even() {
                return Err(AmgmError::Structure);
            }
            pos.push((e.clone(), c.clone()));
        }
    }
    neg.map(|n| (pos, n)).ok_or(AmgmError::Structure)
}

/// `Π (c_j/λ_j)^{λ_j} ≥ |c|`, checked after raising both sides to the common denominator.
fn bound_holds(sources: &[AmgmTerm], target_coefficient: &Rat) -> bool {
    let den = sources.iter().fold(BigInt::one(), |acc, t| acc.lcm(t.weight.denom()));
    let Ok(den_u) = u32::try_from(&den) else { return false };
    let mut lhs = Rat::one();
    for t in sources {
        let p = (&t.weight * Rat::from_integer(den.clone())).to_integer();
        let Ok(p) = u32::try_from(&p) else { return false };
        lhs *= num::pow::pow(&t.coefficient / &t.weight, p as usize);
    }
    lhs >= num::pow::pow(target_coefficient.abs(), den_u as usize)
}

pub fn amgm_check(f: &Form) -> Result<AmgmCertificate, AmgmError> {
    let (pos, (target, tc)) = split(f)?;
    if pos.is_empty() {
        return Err(AmgmError::NoWeights);
    }
    // λ ≥ 0, Σλ = 1, Σ λ_j β_j = β as inequality pairs
    let m = pos.len();
    let nv = f.nvars();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for j in 0..m {
        let mut r = vec![Rat::zero(); m];
        r[j] = Rat::one();
        rows.push(r);
        rhs.push(Rat::zero());
    }
    let mut eq = |coefs: Vec<Rat>, b: Rat| {
        rows.push(coefs.clone());
        rhs.push(b.clone());
        rows.push(coefs.into_iter().map(|c| -c).collect());
        rhs.push(-b);
    };
    eq(vec![Rat::one(); m], Rat::one());
    for v in 0..nv {
        let coefs = pos.iter().map(|(e, _)| Rat::from_integer(e.entries()[v].into())).collect();
        eq(coefs, Rat::from_integer(target.entries()[v].into()));
    }
    let lambda = match lp_feasible(&RatMatrix::from_rows(rows), &rhs) {
        LpOutcome::Feasible(l) => l,
        LpOutcome::Infeasible(_) => return Err(AmgmError::NoWeights),
    };
    let sources: Vec<AmgmTerm> = pos
        .into_iter()
        .zip(lambda)
        .filter(|(_, w)| w.is_positive())
        .map(|((exponent, coefficient), weight)| AmgmTerm { exponent, coefficient, weight })
        .collect();
    if !bound_holds(&sources, &tc) {
        return Err(AmgmError::BoundFails);
    }
    let cert = AmgmCertificate { sources, odd_target: !target.is_even(), target, target_coefficient: tc };
    debug_assert!(cert.verify(f).is_ok());
    Ok(cert)
}

impl AmgmCertificate {
    /// Exact re-check against `f`; success implies `f ≥ 0` on all real points.
    pub fn verify(&self, f: &Form) -> Result<(), AmgmError> {
        let (pos, (target, tc)) = split(f)?;
        if target != self.target || tc != self.target_coefficient {
            return Err(AmgmError::Mismatch("target term"));
        }
        if self.odd_target != !target.is_even() {
            return Err(AmgmError::Mismatch("odd-target flag"));
        }
        let mut wsum = Rat::zero();
        let mut combo = vec![Rat::zero(); f.nvars()];
        let mut used = Vec::new();
        for s in &self.sources {
            if !s.weight.is_positive() {
                return Err(AmgmError::Mismatch("nonpositive weight"));
            }
            if !pos.iter().any(|(e, c)| e == &s.exponent && c == &s.coefficient) || used.contains(&&s.exponent) {
                return Err(AmgmError::Mismatch("source term not in form"));
            }
            used.push(&s.exponent);
            wsum += &s.weight;
            for (v, &p) in s.exponent.entries().iter().enumerate() {
                combo[v] += &s.weight * Rat::from_integer(p.into());
            }
        }
        if !wsum.is_one() {
            return Err(AmgmError::Mismatch("weights do not sum to 1"));
        }
        if combo.iter().zip(target.entries()).any(|(c, &t)| *c != Rat::from_integer(t.into())) {
            return Err(AmgmError::Mismatch("weighted exponent sum"));
        }
        if !bound_holds(&self.sources, &tc) {
            return Err(AmgmError::BoundFails);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::rat;

    #[test]
    fn motzkin_weights() {
        let m = Form::parse("x0^4*x1^2 + x0^2*x1^4 + x2^6 - 3*x0^2*x1^2*x2^2").unwrap();
        let c = amgm_check(&m).unwrap();
        assert_eq!(c.sources.len(), 3);
        assert!(c.sources.iter().all(|s| s.weight == rat(1, 3)));
        assert!(!c.odd_target);
    }

    #[test]
    fn choi_lam_quartic_odd_target() {
        let f = Form::parse("x0^2*x1^2 + x0^2*x2^2 + x1^2*x2^2 + x3^4 - 4*x0*x1*x2*x3").unwrap();
        let c = amgm_check(&f).unwrap();
        assert!(c.odd_target);
        assert!(c.sources.iter().all(|s| s.weight == rat(1, 4)));
    }

    #[test]
    fn not_applicable() {
        assert_eq!(amgm_check(&Form::parse("x0^2 - x1^2").unwrap()), Err(AmgmError::NoWeights));
        assert_eq!(amgm_check(&Form::parse("x0^2 + x1^2").unwrap()), Err(AmgmError::Structure));
        let too_negative = Form::parse("x0^4*x1^2 + x0^2*x1^4 + x2^6 - 4*x0^2*x1^2*x2^2").unwrap();
        assert_eq!(amgm_check(&too_negative), Err(AmgmError::BoundFails));
    }
}
