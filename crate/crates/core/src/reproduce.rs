//! Reproduction pipelines: one certified separating form per strict inclusion of a chain.

use std::time::{Duration, Instant};

use crate::catalog::{self, expected_chain, mu, CatalogError, ExpectedChain};
use crate::certify::{lift_gram, separate, CertifyError, Lift, MembershipCertificate, RefutationCertificate, SearchBudget};
use crate::forms::{Dims, Exponent, Form, FormError};
use crate::gram::SymMatrix;

#[derive(Debug, thiserror::Error)]
pub enum ReproduceError {
    #[error("unsupported case {0}")]
    Unsupported(String),
    #[error("case {dims} has k = {k} above the cap {cap}")]
    AboveCap { dims: Dims, k: usize, cap: usize },
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Certify(#[from] CertifyError),
    #[error(transparent)]
    Form(#[from] FormError),
}

/// A separating form for `C_{target-1} ⊊ C_target`.
#[derive(Clone, Debug)]
pub struct PlanStep {
    pub label: String,
    pub source: &'static str,
    pub lift: Option<Lift>,
    pub target: usize,
}

#[derive(Clone, Debug)]
pub struct StepResult {
    pub step: PlanStep,
    pub form: Form,
    pub membership: Option<MembershipCertificate>,
    pub refutation: Option<RefutationCertificate>,
    pub elapsed: Duration,
    pub error: Option<String>,
}

impl StepResult {
    /// Membership at the target level and refutation one below.
    pub fn certified(&self) -> bool {
        let t = self.step.target;
        self.membership.as_ref().is_some_and(|m| m.level == t) && self.refutation.as_ref().is_some_and(|r| r.level + 1 == t)
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub dims: Dims,
    pub chain: ExpectedChain,
    pub results: Vec<StepResult>,
    /// Strict inclusions that no step covered.
    pub uncovered: Vec<usize>,
}

impl Report {
    pub fn all_certified(&self) -> bool {
        self.uncovered.is_empty() && self.results.iter().all(StepResult::certified)
    }

    pub fn strict_certified(&self) -> usize {
        self.results.iter().filter(|r| r.certified()).count()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let c = &self.chain;
        out.push_str(&format!("case {} (k = {}, top level {})\n", self.dims, self.dims.k(), c.top));
        out.push_str(&format!("expected chain: {c}\n"));
        if c.equal_through > 0 {
            out.push_str(&format!(
                "C_0 = … = C_{}: asserted by theory, not machine-proved\n",
                c.equal_through
            ));
        }
        for r in &self.results {
            let t = r.step.target;
            let status = if r.certified() { "ok" } else { "FAILED" };
            let mem = r.membership.as_ref().map_or("none".to_string(), |m| format!("member@{}", m.level));
            let refu = r
                .refutation
                .as_ref()
                .map_or("none".to_string(), |c| format!("refuted@{} ({} points)", c.level, c.points.len()));
            out.push_str(&format!(
                "C_{} ⊊ C_{}: {} [{}] {} {} {:.1}s {}\n",
                t - 1,
                t,
                r.step.label,
                r.form,
                mem,
                refu,
                r.elapsed.as_secs_f64(),
                status
            ));
            if let Some(e) = &r.error {
                out.push_str(&format!("  error: {e}\n"));
            }
        }
        for i in &self.uncovered {
            out.push_str(&format!("C_{} ⊊ C_{}: no separating form available\n", i, i + 1));
        }
        out.push_str(&mu_line(self.dims, self.strict_certified()));
        out
    }
}

/// The closed-form count next to the machine count, flagged when they differ.
pub fn mu_line(dims: Dims, counted: usize) -> String {
    match mu(dims) {
        Some(m) if m == counted as i64 => format!("mu{} = {m} (formula) matches {counted} certified strict inclusions\n", dims),
        Some(m) => format!("mu{} = {m} (formula) vs {counted} certified strict inclusions: DISCREPANCY\n", dims),
        None => format!("mu{}: no closed form; {counted} certified strict inclusions\n", dims),
    }
}

fn direct(label: &str, source: &'static str, target: usize) -> PlanStep {
    PlanStep { label: label.to_string(), source, lift: None, target }
}

fn subst(source: &'static str, injection: &[usize], nvars: usize, target: usize) -> PlanStep {
    PlanStep {
        label: format!("{source} via {injection:?}"),
        source,
        lift: Some(Lift::Substitute { injection: injection.to_vec(), nvars }),
        target,
    }
}

fn times_x0sq(source: &'static str, nvars: usize, target: usize) -> PlanStep {
    PlanStep { label: format!("x0^2 * {source}"), source, lift: Some(Lift::Multiply(Exponent::unit(nvars, 0, 1))), target }
}

/// Built-in plans, keyed by `(nvars, degree)`.
pub fn plan(nvars: usize, degree: u32) -> Option<Vec<PlanStep>> {
    Some(match (nvars, degree) {
        (4, 4) => vec![
            direct("C^sigma", "choi_lam_quartic_sigma", 4),
            direct("C^tau", "choi_lam_quartic_tau", 5),
            direct("C", "choi_lam_quartic", 6),
        ],
        (3, 6) => vec![
            direct("M^sigma", "motzkin_sigma", 4),
            direct("L", "choi_lam_sextic", 5),
            direct("L^tau", "choi_lam_sextic_tau", 6),
            direct("M", "motzkin", 7),
        ],
        (5, 4) => vec![
            subst("choi_lam_quartic_sigma", &[0, 1, 2, 3], 5, 5),
            subst("choi_lam_quartic_tau", &[0, 1, 2, 3], 5, 6),
            subst("choi_lam_quartic_tau", &[0, 1, 2, 4], 5, 7),
            subst("choi_lam_quartic_sigma", &[0, 2, 3, 4], 5, 8),
            subst("choi_lam_quartic_tau", &[0, 2, 3, 4], 5, 9),
            subst("choi_lam_quartic", &[0, 2, 3, 4], 5, 10),
        ],
        (4, 6) => vec![
            times_x0sq("choi_lam_quartic_sigma", 4, 4),
            times_x0sq("choi_lam_quartic_tau", 4, 5),
            times_x0sq("choi_lam_quartic", 4, 6),
            subst("motzkin_sigma", &[0, 1, 2], 4, 7),
            subst("choi_lam_sextic", &[0, 1, 2], 4, 8),
            subst("choi_lam_sextic", &[0, 1, 3], 4, 9),
            subst("choi_lam_sextic_tau", &[0, 1, 2], 4, 10),
            direct("x1^2 * C^tau", "x1sq_choi_lam_tau", 11),
            subst("choi_lam_sextic_tau", &[0, 1, 3], 4, 12),
            subst("motzkin", &[0, 1, 2], 4, 13),
            subst("choi_lam_sextic", &[0, 2, 3], 4, 14),
            subst("choi_lam_sextic_tau", &[0, 2, 3], 4, 15),
            subst("motzkin", &[0, 2, 3], 4, 16),
        ],
        _ => return None,
    })
}

/// Base quartics and sextics pushed into more variables; used for cases without a built-in
/// plan. Each candidate's level is whatever its expanded Gram matrix certifies.
fn general_candidates(nvars: usize, degree: u32) -> Vec<PlanStep> {
    let sources: &[&'static str] = match degree {
        4 => &["choi_lam_quartic_sigma", "choi_lam_quartic_tau", "choi_lam_quartic"],
        6 => &["motzkin_sigma", "choi_lam_sextic", "choi_lam_sextic_tau", "motzkin"],
        _ => &[],
    };
    let small = if degree == 4 { 4 } else { 3 };
    let mut out = Vec::new();
    let mut inj: Vec<usize> = Vec::new();
    fn rec(start: usize, nvars: usize, want: usize, inj: &mut Vec<usize>, all: &mut Vec<Vec<usize>>) {
        if inj.len() == want {
            all.push(inj.clone());
            return;
        }
        for v in start..nvars {
            inj.push(v);
            rec(v + 1, nvars, want, inj, all);
            inj.pop();
        }
    }
    let mut injections = Vec::new();
    if nvars >= small {
        inj.push(0);
        rec(1, nvars, small, &mut inj, &mut injections);
    }
    for s in sources {
        for i in &injections {
            out.push(subst(s, i, nvars, 0));
        }
    }
    out
}

pub fn parse_case(text: &str) -> Result<(usize, u32), ReproduceError> {
    let bad = || ReproduceError::Unsupported(text.to_string());
    let (a, b) = text.split_once(',').ok_or_else(bad)?;
    let nvars: usize = a.trim().parse().map_err(|_| bad())?;
    let degree: u32 = b.trim().parse().map_err(|_| bad())?;
    if nvars < 2 || degree < 2 || degree % 2 == 1 {
        return Err(bad());
    }
    Ok((nvars, degree))
}

fn source_gram(name: &str) -> Result<(Form, SymMatrix), ReproduceError> {
    let e = catalog::get(name)?;
    let g = e.gram.ok_or_else(|| ReproduceError::Unsupported(format!("{name} has no Gram matrix")))?;
    Ok((e.form, g))
}

fn run_step(step: &PlanStep, seed: u64, budget: &SearchBudget) -> Result<StepResult, ReproduceError> {
    let t = Instant::now();
    let (f, a) = source_gram(step.source)?;
    let (g, b) = match &step.lift {
        Some(l) => lift_gram(&f, &a, l)?,
        None => (f, a),
    };
    let (membership, refutation, error) = match separate(&g, &b, seed, budget) {
        Ok(s) => {
            let error = match &s.refutation {
                None => Some(format!("no refutation found at level {}", s.level().saturating_sub(1))),
                Some(_) if s.level() != step.target => Some(format!("membership level {} differs from {}", s.level(), step.target)),
                Some(_) => None,
            };
            (Some(s.membership), s.refutation, error)
        }
        Err(e) => (None, None, Some(e.to_string())),
    };
    Ok(StepResult { step: step.clone(), form: g, membership, refutation, elapsed: t.elapsed(), error })
}

/// Runs the plan for `(nvars, degree)`. Progress is reported through `on_step`.
pub fn reproduce(
    nvars: usize,
    degree: u32,
    seed: u64,
    budget: &SearchBudget,
    max_k: usize,
    mut on_step: impl FnMut(&StepResult),
) -> Result<Report, ReproduceError> {
    let dims = Dims::new(nvars - 1, degree / 2)?;
    let chain = expected_chain(dims)?;
    if dims.k() > max_k {
        return Err(ReproduceError::AboveCap { dims, k: dims.k(), cap: max_k });
    }
    let mut results = Vec::new();
    match plan(nvars, degree) {
        Some(steps) => {
            for s in &steps {
                let r = run_step(s, seed, budget)?;
                on_step(&r);
                results.push(r);
            }
        }
        None => {
            // candidate levels first, then one refutation per uncovered inclusion
            let mut by_level: std::collections::BTreeMap<usize, PlanStep> = Default::default();
            for mut s in general_candidates(nvars, degree) {
                let (f, a) = source_gram(s.source)?;
                let (g, b) = lift_gram(&f, &a, s.lift.as_ref().expect("candidates are lifted"))?;
                if let Some(m) = crate::certify::transfer::lowest_member(&g, &b, chain.equal_through + 1)? {
                    s.target = m.level;
                    by_level.entry(m.level).or_insert(s);
                }
            }
            for (_, s) in by_level {
                let r = run_step(&s, seed, budget)?;
                on_step(&r);
                results.push(r);
            }
        }
    }
    let planned: Vec<usize> = results.iter().map(|r| r.step.target - 1).collect();
    let uncovered = chain.strict.iter().copied().filter(|i| !planned.contains(i)).collect();
    Ok(Report { dims, chain, results, uncovered })
}
