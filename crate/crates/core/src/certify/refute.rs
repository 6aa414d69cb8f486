//! Refutation certificates: chart points on which no Gram matrix is nonnegative.

use num::{BigInt, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::CertifyError;
use crate::exactla::{farkas_direct, lp_feasible, FarkasCertificate, LpOutcome, RatMatrix};
use crate::forms::{rat_serde, rat_to_f64, Dims, Form, Rat};
use crate::gram::{generic_gram, Basis, GramCoset, SymMatrix};
use crate::variety::{chart, ChartMap};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefutationCertificate {
    pub dims: Dims,
    pub level: usize,
    pub form: Form,
    #[serde(with = "rat_serde::vecvec")]
    pub points: Vec<Vec<Rat>>,
    pub farkas: FarkasCertificate,
}

#[derive(Clone, Debug)]
pub enum RefuteOutcome {
    Refuted(RefutationCertificate),
    /// No contradiction on the points tried; `gram` is a candidate nonnegative on them.
    Inconclusive { gram: Option<SymMatrix>, points_tried: usize },
}

impl RefuteOutcome {
    pub fn certificate(&self) -> Option<&RefutationCertificate> {
        match self {
            RefuteOutcome::Refuted(c) => Some(c),
            RefuteOutcome::Inconclusive { .. } => None,
        }
    }
}

/// Rows `Σ_r λ_r N_r(z_m) ≥ -q_base(z_m)`.
pub fn refutation_system(coset: &GramCoset, points: &[Vec<Rat>]) -> (RatMatrix, Vec<Rat>) {
    let mut m = RatMatrix::empty(coset.kernel.len());
    let mut b = Vec::with_capacity(points.len());
    for z in points {
        m.push_row(coset.kernel.iter().map(|r| r.eval(z)).collect());
        b.push(-coset.base.quadratic_form(z));
    }
    (m, b)
}

fn check_points(ch: &ChartMap, points: &[Vec<Rat>]) -> Result<(), CertifyError> {
    for z in points {
        ch.check_point(z)?;
    }
    Ok(())
}

/// Exact LP over exactly the given points. On infeasibility the certificate keeps only
/// the points carrying a positive multiplier.
pub fn refute_exact(f: &Form, level: usize, points: &[Vec<Rat>]) -> Result<RefuteOutcome, CertifyError> {
    let dims = f.gram_dims()?;
    let ch = chart(dims, level)?;
    check_points(&ch, points)?;
    let coset = generic_gram(f)?;
    let sym = SignSymmetry::of(f)?;
    if sym.order() > 1 {
        // an orbit-closed list is solved on representatives over the smaller coset
        let mut reps: Vec<Vec<Rat>> = Vec::new();
        let mut covered: Vec<&Vec<Rat>> = Vec::new();
        let mut closed = true;
        for z in points {
            if covered.contains(&z) {
                continue;
            }
            let orbit = sym.orbit(z);
            closed &= orbit.iter().all(|w| points.contains(w));
            covered.extend(points.iter().filter(|p| orbit.contains(p)));
            reps.push(z.clone());
        }
        if closed {
            return refute_orbits(f, level, &sym, &sym.reduce(&coset), &reps);
        }
    }
    let (m, b) = refutation_system(&coset, points);
    let outcome = match farkas_direct(&m, &b) {
        Some(y) => LpOutcome::Infeasible(y),
        None => lp_feasible(&m, &b),
    };
    match outcome {
        LpOutcome::Infeasible(y) => {
            let keep: Vec<usize> = (0..points.len()).filter(|&i| y.multipliers[i].is_positive()).collect();
            let cert = RefutationCertificate {
                dims,
                level,
                form: f.clone(),
                points: keep.iter().map(|&i| points[i].clone()).collect(),
                farkas: FarkasCertificate { multipliers: keep.iter().map(|&i| y.multipliers[i].clone()).collect() },
            };
            cert.verify()?;
            Ok(RefuteOutcome::Refuted(cert))
        }
        LpOutcome::Feasible(lambda) => {
            Ok(RefuteOutcome::Inconclusive { gram: Some(coset.element(&lambda)), points_tried: points.len() })
        }
    }
}

/// Coordinate sign flips `x_v ↦ -x_v` (with `x_0` fixed) that leave `f` unchanged. They
/// act diagonally on Veronese coordinates and preserve every chart, so a Gram matrix may
/// be averaged over them: only kernel directions inside invariant monomials matter, and
/// one point per orbit suffices.
#[derive(Clone, Debug)]
pub struct SignSymmetry {
    /// For each group element, the sign of each basis coordinate.
    signs: Vec<Vec<bool>>,
    flips: Vec<Vec<bool>>,
}

const MAX_SYMMETRY_VARS: usize = 12;

impl SignSymmetry {
    pub fn of(f: &Form) -> Result<Self, CertifyError> {
        let dims = f.gram_dims()?;
        let nv = f.nvars();
        let mut flips = vec![vec![false; nv]];
        if nv <= MAX_SYMMETRY_VARS {
            for mask in 1u32..(1 << (nv - 1)) {
                let v: Vec<bool> = (0..nv).map(|i| i > 0 && mask >> (i - 1) & 1 == 1).collect();
                if f.terms().all(|(e, _)| parity(&v, e.entries())) {
                    flips.push(v);
                }
            }
        }
        let basis = Basis::new(dims);
        let signs = flips.iter().map(|v| basis.exponents().iter().map(|m| !parity(v, m.entries())).collect()).collect();
        Ok(SignSymmetry { signs, flips })
    }

    pub fn order(&self) -> usize {
        self.flips.len()
    }

    fn invariant(&self, beta: &[u32]) -> bool {
        self.flips.iter().all(|v| parity(v, beta))
    }

    /// The coset with kernel directions restricted to invariant monomials.
    pub fn reduce(&self, coset: &GramCoset) -> GramCoset {
        let basis = Basis::new(coset.dims);
        let mut out = coset.clone();
        out.kernel.retain(|r| self.invariant(basis.exponent(r.i).add(basis.exponent(r.j)).entries()));
        out
    }

    /// The orbit of a chart point, without repeats.
    pub fn orbit(&self, z: &[Rat]) -> Vec<Vec<Rat>> {
        let mut out: Vec<Vec<Rat>> = Vec::with_capacity(self.signs.len());
        for s in &self.signs {
            let w: Vec<Rat> = z.iter().zip(s).map(|(v, neg)| if *neg { -v } else { v.clone() }).collect();
            if !out.contains(&w) {
                out.push(w);
            }
        }
        out
    }
}

/// `true` when `Σ_{v} β_v` over the flipped coordinates is even.
fn parity(flip: &[bool], beta: &[u32]) -> bool {
    flip.iter().zip(beta).filter(|(f, _)| **f).map(|(_, b)| b).sum::<u32>() % 2 == 0
}

/// Exact LP on orbit representatives over the reduced coset. An infeasible system is
/// expanded to the full orbits, where the non-invariant kernel columns cancel.
pub fn refute_orbits(
    f: &Form,
    level: usize,
    sym: &SignSymmetry,
    reduced: &GramCoset,
    reps: &[Vec<Rat>],
) -> Result<RefuteOutcome, CertifyError> {
    let dims = f.gram_dims()?;
    let ch = chart(dims, level)?;
    check_points(&ch, reps)?;
    let (m, b) = refutation_system(reduced, reps);
    let outcome = match farkas_direct(&m, &b) {
        Some(y) => LpOutcome::Infeasible(y),
        None => lp_feasible(&m, &b),
    };
    match outcome {
        LpOutcome::Infeasible(y) => {
            let mut points: Vec<Vec<Rat>> = Vec::new();
            let mut mult: Vec<BigInt> = Vec::new();
            for (z, yi) in reps.iter().zip(&y.multipliers) {
                if !yi.is_positive() {
                    continue;
                }
                let orbit = sym.orbit(z);
                // every group element counts, so repeated images carry the multiplicity
                let weight = BigInt::from(sym.order() / orbit.len());
                for w in orbit {
                    match points.iter().position(|p| *p == w) {
                        Some(k) => mult[k] += yi * &weight,
                        None => {
                            points.push(w);
                            mult.push(yi * &weight);
                        }
                    }
                }
            }
            let rats: Vec<Rat> = mult.into_iter().map(Rat::from_integer).collect();
            let cert = RefutationCertificate {
                dims,
                level,
                form: f.clone(),
                points,
                farkas: FarkasCertificate::from_rational(&rats),
            };
            debug_assert!(cert.farkas.multipliers.iter().all(|v| !v.is_zero()));
            cert.verify()?;
            Ok(RefuteOutcome::Refuted(cert))
        }
        LpOutcome::Feasible(lambda) => {
            Ok(RefuteOutcome::Inconclusive { gram: Some(reduced.element(&lambda)), points_tried: reps.len() })
        }
    }
}

impl RefutationCertificate {
    pub fn verify(&self) -> Result<(), CertifyError> {
        let dims = self.form.gram_dims()?;
        if dims != self.dims {
            return Err(CertifyError::GramMismatch);
        }
        let ch = chart(dims, self.level)?;
        check_points(&ch, &self.points)?;
        let coset = generic_gram(&self.form)?;
        let (m, b) = refutation_system(&coset, &self.points);
        self.farkas.verify(&m, &b).map(|_| ()).ok_or(CertifyError::FarkasInvalid)
    }

    /// Points of a level-`i` refutation lie on every lower chart, so the same data refutes
    /// there too.
    pub fn lower_level(&self, level: usize) -> Result<RefutationCertificate, CertifyError> {
        let mut c = self.clone();
        c.level = level;
        c.verify()?;
        Ok(c)
    }
}

/// Dense float view of the coset used by the screening LPs.
pub struct FloatCoset {
    pub size: usize,
    pub base: Vec<f64>,
    pub kernel: Vec<(usize, usize, usize, usize)>,
}

impl FloatCoset {
    pub fn new(c: &GramCoset) -> Self {
        FloatCoset {
            size: c.base.size(),
            base: c.base.to_f64(),
            kernel: c.kernel.iter().map(|r| (r.i, r.j, r.s, r.t)).collect(),
        }
    }

    pub fn gram(&self, lambda: &[f64]) -> Vec<f64> {
        let n = self.size;
        let mut a = self.base.clone();
        let mut add = |i: usize, j: usize, v: f64| {
            if i == j {
                a[i * n + i] += v;
            } else {
                a[i * n + j] += v / 2.0;
                a[j * n + i] += v / 2.0;
            }
        };
        for (&(i, j, s, t), l) in self.kernel.iter().zip(lambda) {
            add(i, j, *l);
            add(s, t, -*l);
        }
        a
    }

    /// Normalized row: `(M_m, b_m) / |z|²`.
    pub fn row(&self, z: &[f64]) -> (Vec<f64>, f64) {
        let norm: f64 = z.iter().map(|v| v * v).sum::<f64>().max(1e-300);
        let m = self.kernel.iter().map(|&(i, j, s, t)| (z[i] * z[j] - z[s] * z[t]) / norm).collect();
        (m, -quad(&self.base, self.size, z) / norm)
    }
}

pub fn quad(a: &[f64], n: usize, z: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..n {
        if z[i] == 0.0 {
            continue;
        }
        let mut r = 0.0;
        for j in 0..n {
            r += a[i * n + j] * z[j];
        }
        acc += z[i] * r;
    }
    acc
}

pub fn point_f64(z: &[Rat]) -> Vec<f64> {
    z.iter().map(rat_to_f64).collect()
}

/// Chebyshev-centre LP on the working set: maximize `s` subject to
/// `row·λ - s·|row| ≥ b` and `|λ| ≤ bound`. Returns `(λ, s)`; `s < 0` means the working
/// set admits no Gram matrix.
pub fn margin_lp(rows: &[(Vec<f64>, f64)], p: usize, bound: f64) -> Option<(Vec<f64>, f64)> {
    use minilp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem};
    let mut pb = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = (0..p).map(|_| pb.add_var(0.0, (-bound, bound))).collect();
    let s = pb.add_var(1.0, (f64::NEG_INFINITY, bound));
    for (m, b) in rows {
        let mut e = LinearExpr::empty();
        for (v, c) in vars.iter().zip(m) {
            if *c != 0.0 {
                e.add(*v, *c);
            }
        }
        let norm = m.iter().map(|c| c * c).sum::<f64>().sqrt();
        e.add(s, if norm > 0.0 { -norm } else { -1.0 });
        pb.add_constraint(e, ComparisonOp::Ge, *b);
    }
    let sol = pb.solve().ok()?;
    Some((vars.iter().map(|v| sol[*v]).collect(), sol[s]))
}

/// Float alternative system `y ≥ 0, Σ y_m row_m = 0, Σ y_m b_m = 1`; returns the support.
pub fn dual_support(rows: &[(Vec<f64>, f64)], p: usize) -> Option<Vec<usize>> {
    use minilp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem};
    let mut pb = Problem::new(OptimizationDirection::Minimize);
    let ys: Vec<_> = rows.iter().map(|_| pb.add_var(1.0, (0.0, f64::INFINITY))).collect();
    for r in 0..p {
        let mut e = LinearExpr::empty();
        for (y, (m, _)) in ys.iter().zip(rows) {
            if m[r] != 0.0 {
                e.add(*y, m[r]);
            }
        }
        pb.add_constraint(e, ComparisonOp::Eq, 0.0);
    }
    let mut e = LinearExpr::empty();
    for (y, (_, b)) in ys.iter().zip(rows) {
        if *b != 0.0 {
            e.add(*y, *b);
        }
    }
    pb.add_constraint(e, ComparisonOp::Eq, 1.0);
    let sol = pb.solve().ok()?;
    let vals: Vec<f64> = ys.iter().map(|y| sol[*y]).collect();
    let max = vals.iter().cloned().fold(0.0, f64::max);
    if max <= 0.0 {
        return None;
    }
    Some((0..vals.len()).filter(|&i| vals[i] > 1e-9 * max).collect())
}

/// A source of violated chart points for a float Gram candidate.
pub trait CutOracle {
    /// Points (exact, on the chart) where `q_A` is most negative; empty when none found.
    fn cuts(&mut self, gram: &[f64], limit: usize) -> Vec<Vec<Rat>>;
}

/// Scans a fixed point list.
pub struct PoolOracle {
    pub points: Vec<Vec<Rat>>,
    floats: Vec<Vec<f64>>,
    size: usize,
}

impl PoolOracle {
    pub fn new(points: Vec<Vec<Rat>>) -> Self {
        let floats = points.iter().map(|z| point_f64(z)).collect();
        let size = points.first().map_or(0, Vec::len);
        PoolOracle { points, floats, size }
    }
}

impl CutOracle for PoolOracle {
    fn cuts(&mut self, gram: &[f64], limit: usize) -> Vec<Vec<Rat>> {
        let mut scored: Vec<(f64, usize)> = self
            .floats
            .iter()
            .enumerate()
            .map(|(i, z)| {
                let norm: f64 = z.iter().map(|v| v * v).sum();
                (quad(gram, self.size, z) / norm, i)
            })
            .filter(|(v, _)| *v < -1e-12)
            .collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0));
        scored.into_iter().take(limit).map(|(_, i)| self.points[i].clone()).collect()
    }
}

#[derive(Clone, Debug)]
pub struct CutConfig {
    pub max_rounds: usize,
    pub cuts_per_round: usize,
    pub lambda_bound: f64,
}

impl Default for CutConfig {
    fn default() -> Self {
        CutConfig { max_rounds: 400, cuts_per_round: 24, lambda_bound: 64.0 }
    }
}

const EXACT_SETTLE_LIMIT: usize = 600;

/// Cutting-plane search: alternate a float margin LP over the working set with the
/// oracle, and hand the float dual support to the exact LP once the working set is
/// infeasible.
pub fn cutting_plane(
    f: &Form,
    level: usize,
    initial: Vec<Vec<Rat>>,
    oracle: &mut dyn CutOracle,
    cfg: &CutConfig,
) -> Result<RefuteOutcome, CertifyError> {
    let dims = f.gram_dims()?;
    let ch = chart(dims, level)?;
    check_points(&ch, &initial)?;
    let sym = SignSymmetry::of(f)?;
    let coset = sym.reduce(&generic_gram(f)?);
    log::debug!("sign group of order {}, {} kernel directions", sym.order(), coset.kernel.len());
    let fc = FloatCoset::new(&coset);
    let p = coset.kernel.len();
    let mut work: Vec<Vec<Rat>> = Vec::new();
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    let push = |z: Vec<Rat>, work: &mut Vec<Vec<Rat>>, rows: &mut Vec<(Vec<f64>, f64)>| {
        if !work.contains(&z) {
            rows.push(fc.row(&point_f64(&z)));
            work.push(z);
        }
    };
    for z in initial {
        push(z, &mut work, &mut rows);
    }
    let mut last_gram: Option<SymMatrix> = None;
    for round in 0..cfg.max_rounds {
        let candidate = if rows.is_empty() { Some((vec![0.0; p], 1.0)) } else { margin_lp(&rows, p, cfg.lambda_bound) };
        let gram_f = match candidate {
            Some((lambda, s)) if s >= -1e-9 => {
                log::debug!("round {round}: margin {s:.3e}");
                fc.gram(&lambda)
            }
            _ => {
                log::debug!("round {round}: float LP infeasible on {} points", work.len());
                let support = dual_support(&rows, p).unwrap_or_else(|| (0..work.len()).collect());
                let pts: Vec<Vec<Rat>> = support.iter().map(|&i| work[i].clone()).collect();
                match refute_orbits(f, level, &sym, &coset, &pts)? {
                    RefuteOutcome::Refuted(c) => return Ok(RefuteOutcome::Refuted(c)),
                    RefuteOutcome::Inconclusive { gram, .. } => {
                        let g = gram.expect("exact LP returns a point");
                        let gf = g.to_f64();
                        last_gram = Some(g);
                        gf
                    }
                }
            }
        };
        let cuts = oracle.cuts(&gram_f, cfg.cuts_per_round);
        log::debug!("round {round}: {} points, {} new cuts", work.len(), cuts.len());
        let before = work.len();
        for z in cuts {
            ch.check_point(&z)?;
            push(z, &mut work, &mut rows);
        }
        if work.len() == before {
            // nothing new violates the candidate: settle exactly on the working set
            if work.len() > EXACT_SETTLE_LIMIT {
                return Ok(RefuteOutcome::Inconclusive { gram: last_gram, points_tried: work.len() });
            }
            return match refute_orbits(f, level, &sym, &coset, &work)? {
                RefuteOutcome::Refuted(c) => Ok(RefuteOutcome::Refuted(c)),
                RefuteOutcome::Inconclusive { gram, .. } => {
                    Ok(RefuteOutcome::Inconclusive { gram: gram.or(last_gram), points_tried: work.len() })
                }
            };
        }
    }
    Ok(RefuteOutcome::Inconclusive { gram: last_gram, points_tried: work.len() })
}

/// Exact refutation on a point list; large lists are screened with the cutting plane.
pub fn refute_membership(f: &Form, level: usize, points: &[Vec<Rat>]) -> Result<RefuteOutcome, CertifyError> {
    let dims = f.gram_dims()?;
    let p = generic_gram(f)?.kernel.len();
    if points.len() <= 2 * (p + 1) + 50 {
        return refute_exact(f, level, points);
    }
    let ch = chart(dims, level)?;
    check_points(&ch, points)?;
    let mut oracle = PoolOracle::new(points.to_vec());
    let out = cutting_plane(f, level, Vec::new(), &mut oracle, &CutConfig::default())?;
    if let RefuteOutcome::Inconclusive { gram, .. } = out {
        return Ok(RefuteOutcome::Inconclusive { gram, points_tried: points.len() });
    }
    Ok(out)
}

/// `true` when `q_A(z) ≥ 0` for every listed point.
pub fn nonnegative_on(a: &SymMatrix, points: &[Vec<Rat>]) -> bool {
    points.iter().all(|z| !a.quadratic_form(z).is_negative())
}
