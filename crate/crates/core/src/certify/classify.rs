//! Bracketing the smallest `i` with `f ∈ C_i`.

use super::membership::MembershipCertificate;
use super::refute::{RefutationCertificate, RefuteOutcome};
use super::search::{refute_search, RefuteStrategy, SearchBudget};
use super::sos::{sos_search, SosConfig, SosOutcome};
use super::transfer::lowest_member;
use super::CertifyError;
use crate::catalog;
use crate::forms::Form;
use crate::gram::SymMatrix;

#[derive(Clone, Debug)]
pub struct Classification {
    pub form: Form,
    /// `f ∉ C_{lo-1}` is certified (or `lo = 0`).
    pub lo: usize,
    /// `f ∈ C_hi` is certified; `None` when no Gram matrix was found.
    pub hi: Option<usize>,
    pub membership: Option<MembershipCertificate>,
    pub refutation: Option<RefutationCertificate>,
    pub gram_source: &'static str,
}

impl Classification {
    pub fn is_exact(&self) -> bool {
        self.hi == Some(self.lo)
    }

    /// Re-verifies the membership at every higher level and the refutation at every lower
    /// one; returns how many implied certificates were checked.
    pub fn replay(&self) -> Result<usize, CertifyError> {
        let mut count = 0;
        if let Some(m) = &self.membership {
            let top = m.dims.top_level();
            let mut cur = m.clone();
            while cur.level < top {
                cur = cur.lift_level()?;
                count += 1;
            }
        }
        if let Some(r) = &self.refutation {
            for level in 0..r.level {
                r.lower_level(level)?;
                count += 1;
            }
        }
        Ok(count)
    }

    pub fn interval(&self) -> String {
        match self.hi {
            Some(hi) => format!("{{{}..{}}}", self.lo, hi),
            None => format!("{{{}..?}}", self.lo),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ClassifyConfig {
    pub seed: u64,
    pub budget: SearchBudget,
    pub sos: SosConfig,
    pub strategy: Option<RefuteStrategy>,
}

/// A Gram matrix to start from: the stored one, else a numeric SOS decomposition.
fn starting_gram(f: &Form, sos: &SosConfig) -> Result<Option<(SymMatrix, &'static str)>, CertifyError> {
    if let Some(e) = catalog::find_by_form(f) {
        if let Some(g) = e.gram {
            return Ok(Some((g, "catalog")));
        }
    }
    match sos_search(f, sos)? {
        SosOutcome::Found(c) => Ok(Some((c.gram, "sos"))),
        SosOutcome::NotFound { .. } => Ok(None),
    }
}

pub fn classify(f: &Form, cfg: &ClassifyConfig) -> Result<Classification, CertifyError> {
    let dims = f.gram_dims()?;
    let strategy = cfg.strategy.clone().unwrap_or(RefuteStrategy::Default);
    let (membership, gram_source) = match starting_gram(f, &cfg.sos)? {
        Some((g, src)) => (lowest_member(f, &g, 0)?, src),
        None => (None, "none"),
    };
    let hi = membership.as_ref().map(|m| m.level);
    let start = hi.unwrap_or(dims.top_level() + 1);
    let mut lo = 0;
    let mut refutation = None;
    for level in (0..start).rev() {
        if let RefuteOutcome::Refuted(c) = refute_search(f, level, &strategy, cfg.seed, &cfg.budget)? {
            lo = level + 1;
            refutation = Some(c);
            break;
        }
    }
    Ok(Classification { form: f.clone(), lo, hi, membership, refutation, gram_source })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sos_form_is_level_zero() {
        let f = Form::parse("x0^2*x1^2 + x1^4 + x0^4").unwrap();
        let c = classify(&f, &ClassifyConfig::default()).unwrap();
        assert_eq!((c.lo, c.hi), (0, Some(0)));
        assert_eq!(c.replay().unwrap(), f.gram_dims().unwrap().top_level());
    }
}
