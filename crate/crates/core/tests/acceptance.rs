//! One PASS/FAIL line per acceptance criterion. Runs without the libtest harness so the
//! lines are always printed; exits nonzero when any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use cone_cert::catalog;
use cone_cert::cert::Certificate;
use cone_cert::certify::membership::lift_dehomogenized;
use cone_cert::certify::refute::CutConfig;
use cone_cert::certify::{
    amgm_check, classify, refute_search, sos_search, ClassifyConfig, RefuteOutcome, RefuteStrategy, SearchBudget,
    SosConfig, SosOutcome,
};
use cone_cert::exactla::{farkas_direct, lp_feasible, psd_check, LpOutcome, RatMatrix};
use cone_cert::forms::{exponent_list, Dims, Form, Rat};
use cone_cert::gram::{generic_gram, gram_apply, kernel_relations, Basis, SymMatrix};
use cone_cert::reproduce::{reproduce, Report};
use cone_cert::variety::{chart, restrict_to_chart};
use common::*;
use num::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

struct Gate {
    failed: usize,
}

impl Gate {
    fn run(&mut self, name: &str, f: impl FnOnce() -> Outcome) {
        let t = Instant::now();
        let out = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match out {
            Ok(msg) => println!("PASS {name}: {msg} [{secs:.1}s]"),
            Err(msg) => {
                self.failed += 1;
                println!("FAIL {name}: {msg} [{secs:.1}s]");
            }
        }
    }
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

/// Certificates by canonical form text.
#[derive(Default)]
struct Ledger {
    member: BTreeMap<String, Vec<usize>>,
    refuted: BTreeMap<String, Vec<usize>>,
}

impl Ledger {
    fn add(&mut self, c: &Certificate) {
        let key = format!("{}|{}", c.form().nvars(), c.form().to_text());
        match c {
            Certificate::Membership(_) => self.member.entry(key).or_default().push(c.level()),
            Certificate::Refutation(_) => self.refuted.entry(key).or_default().push(c.level()),
        }
    }

    fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (form, levels) in &self.member {
            let lo = levels.iter().min().unwrap();
            if let Some(hi) = self.refuted.get(form).and_then(|r| r.iter().max()) {
                if hi >= lo {
                    out.push(format!("{form}: member@{lo} refuted@{hi}"));
                }
            }
        }
        out
    }
}

fn run_case(nvars: usize, degree: u32, ledger: &mut Ledger) -> Result<(Report, Duration), String> {
    let t = Instant::now();
    let report = reproduce(nvars, degree, 0, &SearchBudget::default(), 30, |_| {}).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    for r in &report.results {
        let certs = r
            .membership
            .iter()
            .cloned()
            .map(Certificate::Membership)
            .chain(r.refutation.iter().cloned().map(Certificate::Refutation));
        for c in certs {
            // through JSON, as a separate verifier would see it
            let back = Certificate::from_json(&c.to_json().map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            back.verify().map_err(|e| format!("{}: {e}", r.step.label))?;
            ledger.add(&back);
        }
    }
    Ok((report, elapsed))
}

fn check_report(report: &Report, expect: &[(usize, &str)]) -> Result<(), String> {
    ensure(report.all_certified(), format!("not all certified:\n{}", report.render()))?;
    for (target, text) in expect {
        let r = report.results.iter().find(|r| r.step.target == *target).ok_or(format!("no step for C_{target}"))?;
        let want = Form::parse_with_vars(text, r.form.nvars()).map_err(|e| e.to_string())?;
        ensure(r.form == want, format!("C_{target}: got {} want {want}", r.form))?;
    }
    Ok(())
}

fn reproduce_44(ledger: &mut Ledger) -> Outcome {
    let (report, t) = run_case(4, 4, ledger)?;
    check_report(
        &report,
        &[
            (4, "x0^2*x3^2 + x0^2*x1^2 + x1^2*x3^2 + x2^4 - 4*x0*x1*x2*x3"),
            (5, "x1^2*x3^2 + x2^2*x3^2 + x1^2*x2^2 + x0^4 - 4*x0*x1*x2*x3"),
            (6, "x0^2*x1^2 + x0^2*x2^2 + x1^2*x2^2 + x3^4 - 4*x0*x1*x2*x3"),
        ],
    )?;
    ensure(t < Duration::from_secs(300), format!("took {t:?}"))?;
    Ok(format!("C3 < C4 < C5 < C6 certified with 6 verified certificates in {:.1}s", t.as_secs_f64()))
}

fn reproduce_36(ledger: &mut Ledger) -> Outcome {
    let (report, t) = run_case(3, 6, ledger)?;
    check_report(
        &report,
        &[
            (4, "x0^4*x2^2 + x0^2*x2^4 + x1^6 - 3*x0^2*x1^2*x2^2"),
            (5, "x0^4*x1^2 + x0^2*x2^4 + x1^4*x2^2 - 3*x0^2*x1^2*x2^2"),
            (6, "x0^4*x2^2 + x0^2*x1^4 + x1^2*x2^4 - 3*x0^2*x1^2*x2^2"),
            (7, "x0^4*x1^2 + x0^2*x1^4 + x2^6 - 3*x0^2*x1^2*x2^2"),
        ],
    )?;
    ensure(t < Duration::from_secs(600), format!("took {t:?}"))?;
    Ok(format!("C3 < C4 < C5 < C6 < C7 certified with 8 verified certificates in {:.1}s", t.as_secs_f64()))
}

fn transfers(ledger: &mut Ledger) -> Outcome {
    let (r54, t54) = run_case(5, 4, ledger)?;
    ensure(r54.all_certified(), format!("5,4:\n{}", r54.render()))?;
    let targets: Vec<usize> = r54.results.iter().map(|r| r.step.target - 1).collect();
    ensure(targets == (4..=9).collect::<Vec<_>>(), format!("5,4 pairs {targets:?}"))?;
    let (r46, t46) = run_case(4, 6, ledger)?;
    ensure(r46.all_certified(), format!("4,6:\n{}", r46.render()))?;
    let first = &r46.results[0];
    let x0sq_cs = Form::parse_with_vars("x0^2*(x0^2*x3^2 + x0^2*x1^2 + x1^2*x3^2 + x2^4 - 4*x0*x1*x2*x3)", 4).unwrap();
    ensure(first.form == x0sq_cs && first.step.target == 4, "4,6 does not start with x0^2 C^sigma at level 4")?;
    let total = t54 + t46;
    ensure(total < Duration::from_secs(1800), format!("took {total:?}"))?;
    Ok(format!(
        "5,4: pairs i=4..9 in {:.1}s; 4,6: pairs i=3..15 in {:.1}s",
        t54.as_secs_f64(),
        t46.as_secs_f64()
    ))
}

fn sym(size: usize, entries: &[(usize, usize, i64)]) -> SymMatrix {
    let e: Vec<(usize, usize, Rat)> = entries.iter().map(|&(i, j, v)| (i, j, r(v, 1))).collect();
    SymMatrix::from_entries(size, &e).unwrap()
}

fn gram_golden() -> Outcome {
    let cs = Form::parse("x0^2*x3^2 + x0^2*x1^2 + x1^2*x3^2 + x2^4 - 4*x0*x1*x2*x3").unwrap();
    let b = sym(10, &[(1, 1, 1), (3, 3, 1), (6, 6, 1), (7, 7, 1), (2, 6, -2)]);
    let dims = Dims::new(3, 2).unwrap();
    ensure(gram_apply(&b, dims).unwrap() == cs, "C^sigma Gram matrix")?;
    let ms = Form::parse("x0^4*x2^2 + x0^2*x2^4 + x1^6 - 3*x0^2*x1^2*x2^2").unwrap();
    let a = sym(10, &[(2, 2, 1), (4, 4, 1), (5, 5, 1), (6, 6, 1), (3, 3, 4), (1, 6, -2), (3, 5, -2)]);
    ensure(gram_apply(&a, Dims::new(2, 3).unwrap()).unwrap() == ms, "M^sigma Gram matrix")?;
    let restricted = restrict_to_chart(&b, &chart(dims, 4).unwrap()).unwrap();
    ensure(restricted == lift_dehomogenized(&cs, dims).unwrap(), "chart restriction of C^sigma")?;
    Ok("C^sigma and M^sigma matrices reproduce their forms; level-4 chart restriction = C^sigma(1, z)".into())
}

fn kernel_dims() -> Outcome {
    let mut checked = 0;
    for n in 1..=30 {
        for d in 1..=30u32 {
            let dims = Dims::new(n, d).unwrap();
            if dims.k() > 30 {
                break;
            }
            let got = kernel_relations(dims).len();
            let want = kernel_dim_formula(n, d as usize);
            ensure(got == want, format!("{dims}: {got} vs {want}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} cases with k <= 30"))
}

fn eval_monomial(e: &[u32], x: &[Rat]) -> Rat {
    let mut acc = r(1, 1);
    for (xi, &p) in x.iter().zip(e) {
        for _ in 0..p {
            acc *= xi;
        }
    }
    acc
}

fn veronese_pullback() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checks = 0;
    for (n, d) in [(1, 2), (2, 2), (3, 2), (2, 3)] {
        let terms: Vec<(Vec<u32>, Rat)> =
            exponent_list(n, 2 * d).unwrap().into_iter().map(|e| (e.entries().to_vec(), random_rat(&mut rng, 9, 4))).collect();
        let f = Form::from_terms(n + 1, terms.clone()).unwrap();
        let coset = generic_gram(&f).unwrap();
        let basis = Basis::new(coset.dims);
        let elements: Vec<SymMatrix> = (0..20)
            .map(|_| {
                let lambda: Vec<Rat> = (0..coset.kernel.len()).map(|_| random_rat(&mut rng, 20, 3)).collect();
                coset.element(&lambda)
            })
            .collect();
        for _ in 0..100 {
            let x: Vec<Rat> = (0..=n).map(|_| random_rat(&mut rng, 5, 3)).collect();
            let z: Vec<Rat> = basis.exponents().iter().map(|e| eval_monomial(e.entries(), &x)).collect();
            let fx = terms.iter().fold(Rat::zero(), |acc, (e, c)| acc + c * eval_monomial(e, &x));
            for a in &elements {
                ensure(quad(a, &z) == fx, format!("({n},{d}) at {x:?}"))?;
                checks += 1;
            }
        }
    }
    Ok(format!("{checks} exact identities q_A(V(x)) = f(x)"))
}

fn random_sym(rng: &mut ChaCha8Rng, size: usize) -> SymMatrix {
    let mut a = SymMatrix::zeros(size);
    match rng.gen_range(0..3) {
        // B Bᵀ, possibly rank deficient
        0 | 1 => {
            let rank = rng.gen_range(1..=size);
            let b: Vec<Vec<Rat>> = (0..size).map(|_| (0..rank).map(|_| random_rat(rng, 3, 2)).collect()).collect();
            let shift = if rng.gen_bool(0.3) { random_rat(rng, 2, 8) } else { Rat::zero() };
            for i in 0..size {
                for j in i..size {
                    let mut v: Rat = (0..rank).map(|t| &b[i][t] * &b[j][t]).sum();
                    if i == j {
                        v -= &shift;
                    }
                    a.set(i, j, v);
                }
            }
        }
        _ => {
            for i in 0..size {
                for j in i..size {
                    a.set(i, j, random_rat(rng, 4, 3));
                }
            }
        }
    }
    a
}

fn psd_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut psd, mut not) = (0, 0);
    for t in 0..500 {
        let size = 2 + t % 7;
        let a = random_sym(&mut rng, size);
        let verdict = psd_check(&a);
        ensure(verdict.verify(&a), format!("matrix {t}: verdict does not verify"))?;
        ensure(verdict.is_psd() == psd_by_char_poly(&a), format!("matrix {t} ({size}x{size}) disagrees with the oracle"))?;
        if verdict.is_psd() {
            psd += 1;
        } else {
            not += 1;
        }
    }
    Ok(format!("500 matrices agree ({psd} PSD, {not} not)"))
}

fn lp_soundness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut feas, mut infeas) = (0, 0);
    for t in 0..500 {
        let cols = rng.gen_range(1..=3);
        let rows = rng.gen_range(2..=7);
        let m = RatMatrix::from_rows((0..rows).map(|_| (0..cols).map(|_| random_rat(&mut rng, 3, 2)).collect()).collect());
        let b: Vec<Rat> = (0..rows).map(|_| random_rat(&mut rng, 4, 2)).collect();
        let truth = fm_feasible(&m, &b);
        match lp_feasible(&m, &b) {
            LpOutcome::Feasible(l) => {
                let lhs = m.mul_vec(&l);
                ensure(lhs.iter().zip(&b).all(|(x, y)| x >= y), format!("system {t}: returned point violates a row"))?;
                ensure(truth, format!("system {t}: feasible verdict on an infeasible system"))?;
                feas += 1;
            }
            LpOutcome::Infeasible(c) => {
                ensure(c.verify(&m, &b).is_some(), format!("system {t}: Farkas certificate fails"))?;
                ensure(!truth, format!("system {t}: infeasible verdict on a feasible system"))?;
                infeas += 1;
            }
        }
        if let Some(c) = farkas_direct(&m, &b) {
            ensure(c.verify(&m, &b).is_some() && !truth, format!("system {t}: direct certificate unsound"))?;
        }
    }
    Ok(format!("500 systems match Fourier-Motzkin ({feas} feasible, {infeas} infeasible)"))
}

fn amgm_points() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut out = Vec::new();
    for name in ["motzkin", "choi_lam_sextic", "choi_lam_quartic"] {
        let f = catalog::get(name).unwrap().form;
        let cert = amgm_check(&f).map_err(|e| format!("{name}: {e}"))?;
        cert.verify(&f).map_err(|e| format!("{name}: {e}"))?;
        for _ in 0..10_000 {
            let x: Vec<Rat> = (0..f.nvars()).map(|_| random_rat(&mut rng, 12, 5)).collect();
            let v = f.evaluate(&x).unwrap();
            ensure(!v.is_negative(), format!("{name} negative at {x:?}"))?;
        }
        out.push(name);
    }
    Ok(format!("certificates verify; 10^4 points nonnegative for {}", out.join(", ")))
}

fn soundness(ledger: &mut Ledger) -> Outcome {
    let mut classified = 0;
    for e in catalog::entries().unwrap() {
        let c = classify(&e.form, &ClassifyConfig::default()).map_err(|x| x.to_string())?;
        let want = e.expected.unwrap();
        ensure((c.lo, c.hi) == (want.0, Some(want.1)), format!("{}: {} vs {want:?}", e.name, c.interval()))?;
        c.replay().map_err(|x| format!("{}: replay {x}", e.name))?;
        // replayed certificates enter the ledger too
        if let Some(m) = &c.membership {
            let mut cur = m.clone();
            ledger.add(&Certificate::Membership(cur.clone()));
            while cur.level < m.dims.top_level() {
                cur = cur.lift_level().map_err(|x| x.to_string())?;
                ledger.add(&Certificate::Membership(cur.clone()));
            }
            // a refutation attempt at the membership level itself must not succeed
            let budget = SearchBudget { cut: CutConfig { max_rounds: 40, ..CutConfig::default() }, ..SearchBudget::default() };
            let out = refute_search(&e.form, m.level, &RefuteStrategy::Oracle, 3, &budget).map_err(|x| x.to_string())?;
            ensure(!matches!(out, RefuteOutcome::Refuted(_)), format!("{} refuted at its membership level", e.name))?;
        }
        if let Some(rf) = &c.refutation {
            for l in 0..=rf.level {
                ledger.add(&Certificate::Refutation(rf.lower_level(l).map_err(|x| x.to_string())?));
            }
        }
        classified += 1;
    }
    let v = ledger.violations();
    ensure(v.is_empty(), v.join("; "))?;
    Ok(format!(
        "{} forms with certificates, {} classified catalog forms, no membership/refutation overlap",
        ledger.member.len(),
        classified
    ))
}

fn classify_examples() -> Outcome {
    let cases: [(Form, (usize, usize)); 5] = [
        (catalog::get("motzkin").unwrap().form, (7, 7)),
        (Form::parse("x0^4 + x1^4").unwrap(), (0, 0)),
        (catalog::get("choi_lam_sextic_tau").unwrap().form, (6, 6)),
        (catalog::get("choi_lam_quartic_sigma").unwrap().form, (4, 4)),
        (catalog::get("choi_lam_sextic").unwrap().form, (5, 5)),
    ];
    for (f, want) in cases {
        let c = classify(&f, &ClassifyConfig::default()).map_err(|e| e.to_string())?;
        ensure((c.lo, c.hi) == (want.0, Some(want.1)), format!("{f}: {}", c.interval()))?;
    }
    Ok("motzkin {7..7}, x0^4 + x1^4 {0..0}, choi_lam_sextic_tau {6..6}, C^sigma {4..4}, L {5..5}".into())
}

fn sos_trials() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let quad_exps = exponent_list(2, 2).unwrap();
    let mut found = 0;
    for t in 0..100 {
        let mut f = Form::zero(3, 4);
        for _ in 0..3 {
            let h = Form::from_terms(3, quad_exps.iter().map(|e| (e.entries().to_vec(), random_rat(&mut rng, 3, 2)))).unwrap();
            let c = r(rng.gen_range(1..=4), rng.gen_range(1..=3));
            f = f.add(&h.multiply(&h).unwrap().scale(&c)).unwrap();
        }
        match sos_search(&f, &SosConfig::default()).map_err(|e| e.to_string())? {
            SosOutcome::Found(c) => {
                ensure(c.form == f && c.level == 0, format!("trial {t}: certificate for a different statement"))?;
                c.verify().map_err(|e| format!("trial {t}: false certificate: {e}"))?;
                Certificate::Membership(*c).verify().map_err(|e| format!("trial {t}: recheck: {e}"))?;
                found += 1;
            }
            SosOutcome::NotFound { .. } => {}
        }
    }
    ensure(found >= 95, format!("only {found}/100 recovered"))?;
    Ok(format!("{found}/100 recovered, every certificate verified"))
}

fn main() {
    let mut gate = Gate { failed: 0 };
    let mut ledger = Ledger::default();
    gate.run("reproduce 4,4", || reproduce_44(&mut ledger));
    gate.run("reproduce 3,6", || reproduce_36(&mut ledger));
    gate.run("gram golden", gram_golden);
    gate.run("kernel dimension", kernel_dims);
    gate.run("veronese pullback", veronese_pullback);
    gate.run("psd_check vs characteristic polynomial", psd_oracle);
    gate.run("LP soundness", lp_soundness);
    gate.run("AM-GM on M, L, C", amgm_points);
    gate.run("reproduce 5,4 and 4,6", || transfers(&mut ledger));
    gate.run("classify examples", classify_examples);
    gate.run("soundness invariant", || soundness(&mut ledger));
    gate.run("sos_search recovery", sos_trials);
    if gate.failed > 0 {
        println!("{} criteria failed", gate.failed);
        std::process::exit(1);
    }
    println!("all criteria passed");
}
