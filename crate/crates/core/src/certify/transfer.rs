//! Moving a separating form to more variables or higher degree together with its Gram
//! matrix, then locating the new separation level.

use super::membership::{verify_membership, ChartHint, MembershipCertificate};
use super::refute::{RefutationCertificate, RefuteOutcome};
use super::search::{refute_search, RefuteStrategy, SearchBudget};
use super::CertifyError;
use crate::forms::{Dims, Exponent, Form};
use crate::gram::{expand_gram, index_set_for_multiplier, index_set_for_substitution, SymMatrix};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Lift {
    /// `f(x) ↦ f(x_{inj[0]}, …)` in `nvars` variables.
    Substitute { injection: Vec<usize>, nvars: usize },
    /// `f ↦ x^{2γ} f`.
    Multiply(Exponent),
}

impl Lift {
    /// `f ↦ x_0^2 f`.
    pub fn degree_raise(nvars: usize) -> Lift {
        Lift::Multiply(Exponent::unit(nvars, 0, 1))
    }

    pub fn describe(&self) -> String {
        match self {
            Lift::Substitute { injection, nvars } => format!("substitute into {nvars} variables via {injection:?}"),
            Lift::Multiply(g) => {
                let sq = g.add(g);
                format!("multiply by {}", Form::from_terms(sq.nvars(), [(sq.entries().to_vec(), num::One::one())]).map(|f| f.to_text()).unwrap_or_default())
            }
        }
    }

    pub fn apply(&self, f: &Form) -> Result<Form, CertifyError> {
        match self {
            Lift::Substitute { injection, nvars } => Ok(f.embed(injection, *nvars)?),
            Lift::Multiply(gamma) => {
                if gamma.nvars() != f.nvars() {
                    return Err(CertifyError::Transfer("multiplier has the wrong variable count".into()));
                }
                let sq = gamma.add(gamma);
                Ok(Form::from_terms(f.nvars(), [(sq.entries().to_vec(), num::One::one())])?.multiply(f)?)
            }
        }
    }
}

/// The lifted form and the lifted Gram matrix.
pub fn lift_gram(f: &Form, a: &SymMatrix, lift: &Lift) -> Result<(Form, SymMatrix), CertifyError> {
    let small = f.gram_dims()?;
    let g = lift.apply(f)?;
    match lift {
        Lift::Substitute { injection, nvars } => {
            let big = Dims::new(nvars - 1, small.d)?;
            let idx = index_set_for_substitution(small, big, injection)?;
            Ok((g, expand_gram(a, &idx, big)?))
        }
        Lift::Multiply(gamma) => {
            let idx = index_set_for_multiplier(small, gamma)?;
            let big = g.gram_dims()?;
            Ok((g, expand_gram(a, &idx, big)?))
        }
    }
}

/// Lowest level at or above `from` where `a` certifies membership.
pub fn lowest_member(f: &Form, a: &SymMatrix, from: usize) -> Result<Option<MembershipCertificate>, CertifyError> {
    let top = f.gram_dims()?.top_level();
    for level in from..=top {
        if let Ok(c) = verify_membership(f, level, a, ChartHint::Auto) {
            return Ok(Some(c));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug)]
pub struct Separation {
    pub form: Form,
    pub membership: MembershipCertificate,
    /// Refutation one level below the membership level, when found.
    pub refutation: Option<RefutationCertificate>,
}

impl Separation {
    pub fn level(&self) -> usize {
        self.membership.level
    }

    /// `f ∈ C_level ∖ C_{level-1}` with both sides certified.
    pub fn is_strict(&self) -> bool {
        self.refutation.as_ref().is_some_and(|r| r.level + 1 == self.membership.level)
    }
}

/// Membership at the lowest level reachable with `a`, refutation just below it.
pub fn separate(f: &Form, a: &SymMatrix, seed: u64, budget: &SearchBudget) -> Result<Separation, CertifyError> {
    let membership = lowest_member(f, a, 0)?.ok_or_else(|| CertifyError::Transfer("no level accepts the Gram matrix".into()))?;
    let refutation = match membership.level {
        0 => None,
        l => match refute_search(f, l - 1, &RefuteStrategy::Default, seed, budget)? {
            RefuteOutcome::Refuted(c) => Some(c),
            RefuteOutcome::Inconclusive { .. } => None,
        },
    };
    Ok(Separation { form: f.clone(), membership, refutation })
}

pub fn transfer_separation(f: &Form, a: &SymMatrix, lift: &Lift, seed: u64, budget: &SearchBudget) -> Result<Separation, CertifyError> {
    let (g, b) = lift_gram(f, a, lift)?;
    separate(&g, &b, seed, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn lifted_grams_reproduce_lifted_forms() {
        let c = catalog::get("choi_lam_quartic").unwrap();
        let a = c.gram.unwrap();
        let (g, b) = lift_gram(&c.form, &a, &Lift::Substitute { injection: vec![0, 1, 2, 4], nvars: 5 }).unwrap();
        assert_eq!(crate::gram::gram_apply(&b, g.gram_dims().unwrap()).unwrap(), g);
        let (g, b) = lift_gram(&c.form, &a, &Lift::degree_raise(4)).unwrap();
        assert_eq!(g.degree(), 6);
        assert_eq!(crate::gram::gram_apply(&b, g.gram_dims().unwrap()).unwrap(), g);
    }

    #[test]
    fn substitution_levels() {
        let c = catalog::get("choi_lam_quartic_sigma").unwrap();
        let (g, b) = lift_gram(&c.form, c.gram.as_ref().unwrap(), &Lift::Substitute { injection: vec![0, 1, 2, 3], nvars: 5 }).unwrap();
        assert_eq!(lowest_member(&g, &b, 0).unwrap().unwrap().level, 5);
    }
}
