//! Separation oracle over a chart: for a float Gram candidate, find chart points where
//! its quadratic form is most negative.
//!
//! On `K_i` the head coordinates `z_0..z_{n+i}` are the Veronese values of `x ∈ ℝ^n`
//! and the tail coordinates `w` are free, so `q_A = hᵀA_HH h + 2 wᵀA_TH h + wᵀA_TT w`.
//! For each `x` the minimum over `w` is explicit from one eigendecomposition of `A_TT`.

use nalgebra::{DMatrix, DVector};
use num::{BigInt, One};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::refute::{cutting_plane, refute_exact, refute_membership, CutConfig, CutOracle, RefuteOutcome};
use super::CertifyError;
use crate::catalog;
use crate::forms::{Exponent, Form, Rat};
use crate::gram::Basis;
use crate::variety::{chart, sample_chart_points, ChartMap, PointStrategy};

pub struct ChartOracle {
    chart: ChartMap,
    head_exps: Vec<Exponent>,
    head: usize,
    tail: usize,
    grid: Vec<Vec<f64>>,
    hot: Vec<Vec<f64>>,
    rng: ChaCha8Rng,
    random_per_call: usize,
}

const VALS: [f64; 13] = [0.0, 1.0, -1.0, 0.5, -0.5, 2.0, -2.0, 0.25, -0.25, 4.0, -4.0, 0.125, -0.125];
const GRID_CAP: usize = 4000;
const HOT_CAP: usize = 300;

struct Eval {
    value: f64,
    w: Vec<f64>,
}

/// Per-call precomputation for one Gram candidate.
struct Prepared {
    a_hh: DMatrix<f64>,
    a_th: DMatrix<f64>,
    eig_vals: Vec<f64>,
    eig_vecs: DMatrix<f64>,
}

impl ChartOracle {
    pub fn new(chart: ChartMap, seed: u64) -> Self {
        let basis = Basis::new(chart.dims);
        let n = chart.dims.n;
        let head = n + chart.level + 1;
        let tail = chart.dims.basis_len() - head;
        let head_exps = basis.exponents()[..head].to_vec();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let total = VALS.len().pow(n as u32);
        let mut grid: Vec<Vec<f64>> = Vec::new();
        if total <= GRID_CAP {
            let mut idx = vec![0usize; n];
            loop {
                grid.push(idx.iter().map(|&i| VALS[i]).collect());
                let mut c = 0;
                while c < n {
                    idx[c] += 1;
                    if idx[c] < VALS.len() {
                        break;
                    }
                    idx[c] = 0;
                    c += 1;
                }
                if c == n {
                    break;
                }
            }
        } else {
            let mut idx = vec![0usize; n];
            // {0, ±1}^n first, then random grid points
            loop {
                grid.push(idx.iter().map(|&i| VALS[i]).collect());
                let mut c = 0;
                while c < n {
                    idx[c] += 1;
                    if idx[c] < 3 {
                        break;
                    }
                    idx[c] = 0;
                    c += 1;
                }
                if c == n {
                    break;
                }
            }
            while grid.len() < GRID_CAP {
                grid.push((0..n).map(|_| VALS[rng.gen_range(0..VALS.len())]).collect());
            }
        }
        ChartOracle { chart, head_exps, head, tail, grid, hot: Vec::new(), rng, random_per_call: 500 }
    }

    fn prepare(&self, gram: &[f64]) -> Prepared {
        let size = self.head + self.tail;
        let a = DMatrix::from_row_slice(size, size, gram);
        let a_hh = a.view((0, 0), (self.head, self.head)).into_owned();
        let a_th = a.view((self.head, 0), (self.tail, self.head)).into_owned();
        let a_tt = a.view((self.head, self.head), (self.tail, self.tail)).into_owned();
        let (eig_vals, eig_vecs) = if self.tail > 0 {
            let e = a_tt.symmetric_eigen();
            (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
        } else {
            (Vec::new(), DMatrix::zeros(0, 0))
        };
        Prepared { a_hh, a_th, eig_vals, eig_vecs }
    }

    fn head_values(&self, x: &[f64]) -> DVector<f64> {
        let mut full = Vec::with_capacity(x.len() + 1);
        full.push(1.0);
        full.extend_from_slice(x);
        DVector::from_iterator(self.head, self.head_exps.iter().map(|e| e.eval_f64(&full)))
    }

    /// Normalized minimum of `q_A` over the tail at this `x`, with the minimizing tail.
    fn eval(&self, pre: &Prepared, x: &[f64]) -> Eval {
        let h = self.head_values(x);
        let c = h.dot(&(&pre.a_hh * &h));
        let hn = h.norm_squared();
        if self.tail == 0 {
            return Eval { value: c / hn, w: Vec::new() };
        }
        let g = &pre.a_th * &h;
        let gv = pre.eig_vecs.transpose() * &g;
        let radius = 4.0 * (1.0 + hn.sqrt());
        let scale = pre.eig_vals.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        let mut u = DVector::zeros(self.tail);
        for i in 0..self.tail {
            let mu = pre.eig_vals[i];
            let gi = gv[i];
            u[i] = if mu > 1e-9 * scale {
                (-gi / mu).clamp(-radius, radius)
            } else if gi != 0.0 {
                -gi.signum() * radius
            } else if mu < 0.0 {
                radius
            } else {
                0.0
            };
        }
        let w = &pre.eig_vecs * &u;
        let a_tt_w: f64 = (0..self.tail).map(|i| pre.eig_vals[i] * u[i] * u[i]).sum();
        let q = c + 2.0 * w.dot(&g) + a_tt_w;
        Eval { value: q / (hn + w.norm_squared()), w: w.iter().copied().collect() }
    }

    fn refine(&self, pre: &Prepared, mut x: Vec<f64>, mut best: f64) -> (Vec<f64>, f64) {
        for step in [0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625] {
            let mut improved = true;
            let mut guard = 0;
            while improved && guard < 40 {
                improved = false;
                guard += 1;
                for c in 0..x.len() {
                    for dir in [step, -step] {
                        let mut y = x.clone();
                        y[c] += dir;
                        let v = self.eval(pre, &y).value;
                        if v < best - 1e-15 {
                            best = v;
                            x = y;
                            improved = true;
                        }
                    }
                }
            }
        }
        (x, best)
    }
}

fn dyadic(v: f64, bits: i32) -> Rat {
    let r = BigInt::from((v * 2f64.powi(bits)).round() as i64);
    if bits >= 0 {
        Rat::new(r, BigInt::one() << bits as usize)
    } else {
        Rat::from_integer(r << (-bits) as usize)
    }
}

fn dyadic_scaled(v: f64, magnitude: f64, bits: i32) -> Rat {
    let e = magnitude.max(1.0).log2().ceil() as i32;
    dyadic(v, bits - e)
}

impl CutOracle for ChartOracle {
    fn cuts(&mut self, gram: &[f64], limit: usize) -> Vec<Vec<Rat>> {
        let pre = self.prepare(gram);
        let n = self.chart.dims.n;
        let mut cands: Vec<(f64, Vec<f64>)> = Vec::new();
        let randoms: Vec<Vec<f64>> = (0..self.random_per_call)
            .map(|_| {
                let s = 2f64.powi(self.rng.gen_range(-3..=3));
                (0..n).map(|_| self.rng.gen_range(-1.0..1.0) * s).collect()
            })
            .collect();
        for x in self.grid.iter().chain(self.hot.iter()).chain(randoms.iter()) {
            let e = self.eval(&pre, x);
            if e.value < -1e-10 {
                cands.push((e.value, x.clone()));
            }
        }
        cands.sort_by(|a, b| a.0.total_cmp(&b.0));
        cands.truncate(3 * limit);
        let mut out: Vec<Vec<Rat>> = Vec::new();
        let mut used_x: Vec<Vec<Rat>> = Vec::new();
        let mut refined: Vec<(f64, Vec<f64>)> =
            cands.into_iter().map(|(v, x)| { let (x, v) = self.refine(&pre, x, v); (v, x) }).collect();
        refined.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (_, x) in refined {
            if out.len() >= limit {
                break;
            }
            let xr: Vec<Rat> = x.iter().map(|&v| dyadic(v, 6)).collect();
            if used_x.contains(&xr) {
                continue;
            }
            let xf: Vec<f64> = xr.iter().map(crate::forms::rat_to_f64).collect();
            let e = self.eval(&pre, &xf);
            if e.value >= -1e-10 {
                continue;
            }
            let mag = e.w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let mut free = xr.clone();
            free.extend(e.w.iter().map(|&v| dyadic_scaled(v, mag, 12)));
            let z = self.chart.point_from_free(&free).expect("free part has the chart's length");
            let zf = super::refute::point_f64(&z);
            let norm: f64 = zf.iter().map(|v| v * v).sum();
            if super::refute::quad(gram, zf.len(), &zf) / norm >= -1e-12 {
                continue;
            }
            used_x.push(xr);
            if !self.hot.contains(&xf) {
                self.hot.push(xf);
            }
            out.push(z);
        }
        if self.hot.len() > HOT_CAP {
            let drop = self.hot.len() - HOT_CAP;
            self.hot.drain(..drop);
        }
        out
    }
}

/// Where refutation points come from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RefuteStrategy {
    /// Stored points, then the chart oracle, then signed units, then random points.
    Default,
    Catalog,
    Oracle,
    SignedUnits,
    Random,
    Explicit(Vec<Vec<Rat>>),
}

impl std::str::FromStr for RefuteStrategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "default" => Ok(RefuteStrategy::Default),
            "catalog" => Ok(RefuteStrategy::Catalog),
            "oracle" => Ok(RefuteStrategy::Oracle),
            "signed-units" | "signed_units" => Ok(RefuteStrategy::SignedUnits),
            "random" => Ok(RefuteStrategy::Random),
            other => Err(format!("unknown strategy '{other}' (default, catalog, oracle, signed-units, random)")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchBudget {
    pub cut: CutConfig,
    pub signed_cap: usize,
    pub random_points: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { cut: CutConfig::default(), signed_cap: 2000, random_points: 2000 }
    }
}

fn oracle_search(f: &Form, level: usize, initial: Vec<Vec<Rat>>, seed: u64, cfg: &CutConfig) -> Result<RefuteOutcome, CertifyError> {
    let ch = chart(f.gram_dims()?, level)?;
    let mut oracle = ChartOracle::new(ch, seed);
    cutting_plane(f, level, initial, &mut oracle, cfg)
}

fn sampled(f: &Form, level: usize, strategy: &PointStrategy, seed: u64) -> Result<RefuteOutcome, CertifyError> {
    let ch = chart(f.gram_dims()?, level)?;
    let pts = sample_chart_points(&ch, strategy, seed)?;
    refute_membership(f, level, &pts)
}

/// Searches for a refutation of `f ∈ C_level`. `Inconclusive` is not evidence of membership.
pub fn refute_search(f: &Form, level: usize, strategy: &RefuteStrategy, seed: u64, budget: &SearchBudget) -> Result<RefuteOutcome, CertifyError> {
    let stored = || catalog::stored_points(f, level);
    let signed = PointStrategy::SignedUnits { cap: budget.signed_cap };
    let random = PointStrategy::Random { count: budget.random_points, max_den: 4 };
    match strategy {
        RefuteStrategy::Catalog => match stored() {
            Some(pts) => refute_exact(f, level, &pts),
            None => Ok(RefuteOutcome::Inconclusive { gram: None, points_tried: 0 }),
        },
        RefuteStrategy::Oracle => oracle_search(f, level, Vec::new(), seed, &budget.cut),
        RefuteStrategy::SignedUnits => sampled(f, level, &signed, seed),
        RefuteStrategy::Random => sampled(f, level, &random, seed),
        RefuteStrategy::Explicit(pts) => refute_membership(f, level, pts),
        RefuteStrategy::Default => {
            let mut tried = 0;
            if let Some(pts) = stored() {
                let out = refute_exact(f, level, &pts)?;
                if out.certificate().is_some() {
                    return Ok(out);
                }
                tried += pts.len();
            }
            for step in 0..3 {
                let out = match step {
                    0 => oracle_search(f, level, Vec::new(), seed, &budget.cut)?,
                    1 => sampled(f, level, &signed, seed)?,
                    _ => sampled(f, level, &random, seed)?,
                };
                match out {
                    RefuteOutcome::Refuted(_) => return Ok(out),
                    RefuteOutcome::Inconclusive { points_tried, .. } => tried += points_tried,
                }
            }
            Ok(RefuteOutcome::Inconclusive { gram: None, points_tried: tried })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{Dims, Form};
    use crate::certify::refute::{cutting_plane, CutConfig, RefuteOutcome};
    use crate::variety::chart;

    #[test]
    fn motzkin_not_sos() {
        let m = Form::parse("x0^4*x1^2 + x0^2*x1^4 + x2^6 - 3*x0^2*x1^2*x2^2").unwrap();
        let ch = chart(Dims::new(2, 3).unwrap(), 0).unwrap();
        let mut oracle = ChartOracle::new(ch, 1);
        let out = cutting_plane(&m, 0, Vec::new(), &mut oracle, &CutConfig::default()).unwrap();
        assert!(matches!(out, RefuteOutcome::Refuted(_)), "{out:?}");
    }
}
