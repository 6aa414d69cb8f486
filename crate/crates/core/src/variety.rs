//! Filtration data: the binomials `q_i`, affine charts `K_i`, boundary strata and chart
//! point sampling.

use std::collections::BTreeMap;
use std::fmt;

use num::{BigInt, One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::forms::{format_rat, Dims, Exponent, Poly, Rat};
use crate::gram::{Basis, GramError, SymMatrix};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VarietyError {
    #[error("level {level} outside 0..={max}")]
    LevelOutOfRange { level: usize, max: usize },
    #[error("no splitting of alpha_0 + alpha_{0} found")]
    NoSplit(usize),
    #[error("point has {got} coordinates, expected {expected}")]
    PointLength { expected: usize, got: usize },
    #[error("point violates the chart equation for z{index}")]
    OffChart { index: usize },
    #[error("unknown catalog point set {0:?}")]
    UnknownCatalogSet(String),
    #[error(transparent)]
    Gram(#[from] GramError),
}

/// `q_i = Z_0 Z_{n+i} - Z_s Z_t` with minimal `s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinomialRelation {
    pub level: usize,
    pub n: usize,
    pub s: usize,
    pub t: usize,
}

impl BinomialRelation {
    pub fn target(&self) -> usize {
        self.n + self.level
    }

    pub fn eval(&self, z: &[Rat]) -> Rat {
        &z[0] * &z[self.target()] - &z[self.s] * &z[self.t]
    }
}

impl fmt::Display for BinomialRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: Z0*Z{} - Z{}*Z{}", self.level, self.target(), self.s, self.t)
    }
}

fn check_level(dims: Dims, level: usize) -> Result<(), VarietyError> {
    if level > dims.top_level() {
        return Err(VarietyError::LevelOutOfRange { level, max: dims.top_level() });
    }
    Ok(())
}

pub fn relation_at_level(dims: Dims, level: usize) -> Result<BinomialRelation, VarietyError> {
    check_level(dims, level)?;
    if level == 0 {
        return Err(VarietyError::LevelOutOfRange { level, max: dims.top_level() });
    }
    let basis = Basis::new(dims);
    relation_with(&basis, level)
}

fn relation_with(basis: &Basis, level: usize) -> Result<BinomialRelation, VarietyError> {
    let n = basis.dims().n;
    let target = basis.exponent(0).add(basis.exponent(n + level));
    for s in 1..basis.len() {
        if let Some(rest) = target.checked_sub(basis.exponent(s)) {
            if let Some(t) = basis.index_of(&rest) {
                if t >= s {
                    return Ok(BinomialRelation { level, n, s, t });
                }
            }
        }
    }
    Err(VarietyError::NoSplit(n + level))
}

/// All `q_i`, `i = 1..=k-n`.
pub fn filtration_relations(dims: Dims) -> Vec<BinomialRelation> {
    let basis = Basis::new(dims);
    (1..=dims.top_level())
        .map(|i| relation_with(&basis, i).expect("every level splits"))
        .collect()
}

/// Parametrization of `K_i`: `z_0 = 1`, dependent coordinates are monomials in
/// `z_1..z_n`, the rest are free.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChartMap {
    pub dims: Dims,
    pub level: usize,
    pub relations: Vec<BinomialRelation>,
    /// Index `n+j` to its exponent over `(z_1..z_n)`.
    pub dependent: BTreeMap<usize, Exponent>,
    /// Remaining indices of `1..=k`, ascending; begins with `1..=n`.
    pub free: Vec<usize>,
}

pub fn chart(dims: Dims, level: usize) -> Result<ChartMap, VarietyError> {
    check_level(dims, level)?;
    let basis = Basis::new(dims);
    let n = dims.n;
    let relations: Vec<BinomialRelation> =
        (1..=level).map(|i| relation_with(&basis, i)).collect::<Result<_, _>>()?;
    let mut dependent: BTreeMap<usize, Exponent> = BTreeMap::new();
    let expand = |idx: usize, dep: &BTreeMap<usize, Exponent>| -> Exponent {
        if idx <= n {
            Exponent::unit(n, idx - 1, 1)
        } else {
            dep[&idx].clone()
        }
    };
    for rel in &relations {
        let e = expand(rel.s, &dependent).add(&expand(rel.t, &dependent));
        debug_assert_eq!(e.entries(), &basis.exponent(rel.target()).entries()[1..]);
        dependent.insert(rel.target(), e);
    }
    let free = (1..=dims.k()).filter(|i| !dependent.contains_key(i)).collect();
    Ok(ChartMap { dims, level, relations, dependent, free })
}

impl ChartMap {
    /// Free coordinates beyond `z_1..z_n`.
    pub fn tail(&self) -> &[usize] {
        &self.free[self.dims.n..]
    }

    /// Full point `(1, z_1, …, z_k)` from values of the free coordinates.
    pub fn point_from_free(&self, free_values: &[Rat]) -> Result<Vec<Rat>, VarietyError> {
        if free_values.len() != self.free.len() {
            return Err(VarietyError::PointLength { expected: self.free.len(), got: free_values.len() });
        }
        let mut z = vec![Rat::zero(); self.dims.basis_len()];
        z[0] = Rat::one();
        for (idx, v) in self.free.iter().zip(free_values) {
            z[*idx] = v.clone();
        }
        let x = &z[1..=self.dims.n].to_vec();
        for (idx, e) in &self.dependent {
            z[*idx] = e.eval(x);
        }
        Ok(z)
    }

    pub fn point_from_free_f64(&self, free_values: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; self.dims.basis_len()];
        z[0] = 1.0;
        for (idx, v) in self.free.iter().zip(free_values) {
            z[*idx] = *v;
        }
        let x = z[1..=self.dims.n].to_vec();
        for (idx, e) in &self.dependent {
            z[*idx] = e.eval_f64(&x);
        }
        z
    }

    /// The Veronese image `V(1, x)`, which lies on every chart.
    pub fn veronese_point(&self, x: &[Rat]) -> Vec<Rat> {
        let mut full = vec![Rat::one()];
        full.extend_from_slice(x);
        Basis::new(self.dims).veronese(&full)
    }

    pub fn check_point(&self, z: &[Rat]) -> Result<(), VarietyError> {
        if z.len() != self.dims.basis_len() {
            return Err(VarietyError::PointLength { expected: self.dims.basis_len(), got: z.len() });
        }
        if !z[0].is_one() {
            return Err(VarietyError::OffChart { index: 0 });
        }
        for rel in &self.relations {
            if !rel.eval(z).is_zero() {
                return Err(VarietyError::OffChart { index: rel.target() });
            }
        }
        Ok(())
    }

    /// Image of each coordinate `z_m` under the chart as a monomial in `z_1..z_k`.
    pub fn coordinate_monomials(&self) -> Vec<Exponent> {
        let k1 = self.dims.basis_len();
        let n = self.dims.n;
        (0..k1)
            .map(|m| {
                if m == 0 {
                    Exponent::zero(k1)
                } else if let Some(e) = self.dependent.get(&m) {
                    let mut v = vec![0u32; k1];
                    v[1..=n].copy_from_slice(e.entries());
                    Exponent::new(v)
                } else {
                    Exponent::unit(k1, m, 1)
                }
            })
            .collect()
    }
}

/// `q_A` with `z_0 = 1` and the dependent monomials substituted, as a polynomial in
/// `z_0..z_k` (only free coordinates occur).
pub fn restrict_to_chart(a: &SymMatrix, chart: &ChartMap) -> Result<Poly, VarietyError> {
    let k1 = chart.dims.basis_len();
    if a.size() != k1 {
        return Err(GramError::SizeMismatch { expected: k1, got: a.size() }.into());
    }
    let mons = chart.coordinate_monomials();
    let mut p = Poly::zero(k1);
    let two = Rat::from_integer(2.into());
    for (i, j, v) in a.upper_entries() {
        let c = if i == j { v } else { v * &two };
        p.add_term(mons[i].add(&mons[j]), c);
    }
    Ok(p)
}

/// A coordinate subspace component of the `z_0 = 0` slice of `V(q_1..q_i)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryStratum {
    pub zero_set: Vec<usize>,
}

impl BoundaryStratum {
    /// Indices of `0..=k` that survive: everything except `z_0` and the zero set.
    pub fn surviving(&self, dims: Dims) -> Vec<usize> {
        (1..=dims.k()).filter(|i| !self.zero_set.contains(i)).collect()
    }
}

/// Minimal hitting sets of the pairs `{s_j, t_j}`, `j <= i`.
pub fn boundary_strata(dims: Dims, level: usize) -> Result<Vec<BoundaryStratum>, VarietyError> {
    let ch = chart(dims, level)?;
    let pairs: Vec<(usize, usize)> = ch.relations.iter().map(|r| (r.s, r.t)).collect();
    let mut found: Vec<Vec<usize>> = Vec::new();
    fn grow(pairs: &[(usize, usize)], current: &mut Vec<usize>, found: &mut Vec<Vec<usize>>) {
        let open = pairs.iter().find(|(s, t)| !current.contains(s) && !current.contains(t));
        match open {
            None => {
                let mut set = current.clone();
                set.sort_unstable();
                if !found.contains(&set) {
                    found.push(set);
                }
            }
            Some(&(s, t)) => {
                for pick in if s == t { vec![s] } else { vec![s, t] } {
                    current.push(pick);
                    grow(pairs, current, found);
                    current.pop();
                }
            }
        }
    }
    grow(&pairs, &mut Vec::new(), &mut found);
    let minimal: Vec<Vec<usize>> = found
        .iter()
        .filter(|s| !found.iter().any(|o| o != *s && o.iter().all(|x| s.contains(x))))
        .cloned()
        .collect();
    let mut out: Vec<BoundaryStratum> = minimal.into_iter().map(|zero_set| BoundaryStratum { zero_set }).collect();
    out.sort_by(|a, b| a.zero_set.cmp(&b.zero_set));
    Ok(out)
}

/// How a structured chart point family is laid out; see [`PointStrategy::Perturbed`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerturbSpec {
    /// Values for the active variables among `z_1..z_n`.
    pub vals: Vec<Rat>,
    /// Relative offsets applied to tail coordinates.
    pub offsets: Vec<Rat>,
    /// Variables (1-based) drawing from `vals`; `None` means all of `1..=n`.
    pub active: Option<Vec<usize>>,
    /// Values for the inactive variables.
    pub inactive_vals: Vec<Rat>,
    /// Also perturb pairs of tail coordinates (first offset only).
    pub pairs: bool,
}

impl PerturbSpec {
    pub fn new(vals: Vec<Rat>, offsets: Vec<Rat>) -> Self {
        PerturbSpec { vals, offsets, active: None, inactive_vals: vec![Rat::zero()], pairs: true }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PointStrategy {
    /// Free coordinates range over `-radius..=radius` in steps of `step`.
    Grid { radius: Rat, step: Rat, cap: usize },
    /// Free coordinates in `{-1, 0, 1}`; sampled down to `cap` points when larger.
    SignedUnits { cap: usize },
    /// A stored point set, by name.
    Catalog(String),
    /// Full points `(z_0, …, z_k)`.
    Explicit(Vec<Vec<Rat>>),
    /// Free coordinates `p/q` with `1 <= q <= max_den`, `|p/q| <= 2`.
    Random { count: usize, max_den: i64 },
    /// Veronese points `V(1,x)` over a grid of `x`, then each tail coordinate (and pair of
    /// tail coordinates) shifted by `±offset·scale`, `scale` the largest `|m_j(1,x)|`.
    Perturbed(PerturbSpec),
}

impl fmt::Display for PointStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointStrategy::Grid { radius, step, .. } => write!(f, "grid({},{})", format_rat(radius), format_rat(step)),
            PointStrategy::SignedUnits { cap } => write!(f, "signed_units(cap {cap})"),
            PointStrategy::Catalog(name) => write!(f, "catalog({name})"),
            PointStrategy::Explicit(p) => write!(f, "explicit({} points)", p.len()),
            PointStrategy::Random { count, max_den } => write!(f, "random({count}, den<={max_den})"),
            PointStrategy::Perturbed(s) => write!(f, "perturbed({} vals, {} offsets)", s.vals.len(), s.offsets.len()),
        }
    }
}

fn product<T: Clone>(choices: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = vec![Vec::new()];
    for c in choices {
        let mut next = Vec::with_capacity(out.len() * c.len());
        for prefix in &out {
            for v in c {
                let mut p = prefix.clone();
                p.push(v.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Base points `x ∈ ℚ^n` of a perturbed family.
pub fn perturb_bases(n: usize, spec: &PerturbSpec) -> Vec<Vec<Rat>> {
    let choices: Vec<Vec<Rat>> = (1..=n)
        .map(|v| match &spec.active {
            Some(act) if !act.contains(&v) => spec.inactive_vals.clone(),
            _ => spec.vals.clone(),
        })
        .collect();
    product(&choices)
}

/// Free-coordinate vectors of the perturbed family (same order as [`ChartMap::free`]).
pub fn perturbed_free_parts(chart: &ChartMap, spec: &PerturbSpec) -> Vec<Vec<Rat>> {
    let basis = Basis::new(chart.dims);
    let tail = chart.tail();
    let n = chart.dims.n;
    let mut out = Vec::new();
    for x in perturb_bases(n, spec) {
        let mut full = vec![Rat::one()];
        full.extend(x.iter().cloned());
        let mono = basis.veronese(&full);
        let scale = mono.iter().map(|m| m.abs()).max().unwrap_or_else(Rat::one);
        let base: Vec<Rat> = chart.free.iter().map(|&i| mono[i].clone()).collect();
        out.push(base.clone());
        for a in 0..tail.len() {
            for t in &spec.offsets {
                for sign in [1, -1] {
                    let mut p = base.clone();
                    p[n + a] += t * &scale * Rat::from_integer(sign.into());
                    out.push(p);
                }
            }
        }
        if spec.pairs {
            if let Some(t) = spec.offsets.first() {
                let step = t * &scale;
                for a in 0..tail.len() {
                    for b in a + 1..tail.len() {
                        for (sa, sb) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                            let mut p = base.clone();
                            p[n + a] += &step * Rat::from_integer(sa.into());
                            p[n + b] += &step * Rat::from_integer(sb.into());
                            out.push(p);
                        }
                    }
                }
            }
        }
    }
    out
}

/// Deterministic chart points for a strategy. `Catalog` sets are resolved by the caller
/// and passed in as `Explicit`.
pub fn sample_chart_points(chart: &ChartMap, strategy: &PointStrategy, seed: u64) -> Result<Vec<Vec<Rat>>, VarietyError> {
    let nfree = chart.free.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let free_parts: Vec<Vec<Rat>> = match strategy {
        PointStrategy::Grid { radius, step, cap } => {
            let mut vals = Vec::new();
            let mut v = -radius.clone();
            while &v <= radius {
                vals.push(v.clone());
                v += step;
            }
            let total = (vals.len() as f64).powi(nfree as i32);
            if total > *cap as f64 {
                (0..*cap).map(|_| (0..nfree).map(|_| vals.choose(&mut rng).unwrap().clone()).collect()).collect()
            } else {
                product(&vec![vals; nfree])
            }
        }
        PointStrategy::SignedUnits { cap } => {
            let units = vec![-Rat::one(), Rat::zero(), Rat::one()];
            if 3f64.powi(nfree as i32) <= *cap as f64 {
                product(&vec![units; nfree])
            } else {
                let mut seen = std::collections::BTreeSet::new();
                let mut out = Vec::new();
                while out.len() < *cap {
                    let p: Vec<i8> = (0..nfree).map(|_| rng.gen_range(-1i8..=1)).collect();
                    if seen.insert(p.clone()) {
                        out.push(p.into_iter().map(|v| Rat::from_integer(v.into())).collect());
                    }
                }
                out
            }
        }
        PointStrategy::Random { count, max_den } => (0..*count)
            .map(|_| {
                (0..nfree)
                    .map(|_| {
                        let q = rng.gen_range(1..=*max_den);
                        let p = rng.gen_range(-2 * q..=2 * q);
                        Rat::new(BigInt::from(p), BigInt::from(q))
                    })
                    .collect()
            })
            .collect(),
        PointStrategy::Perturbed(spec) => perturbed_free_parts(chart, spec),
        PointStrategy::Explicit(points) => {
            for p in points {
                chart.check_point(p)?;
            }
            return Ok(points.clone());
        }
        PointStrategy::Catalog(name) => return Err(VarietyError::UnknownCatalogSet(name.clone())),
    };
    free_parts.iter().map(|f| chart.point_from_free(f)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{int, rat};

    fn d(n: usize, dd: u32) -> Dims {
        Dims::new(n, dd).unwrap()
    }

    #[test]
    fn relation_examples() {
        let r = relation_at_level(d(3, 2), 1).unwrap();
        assert_eq!((r.s, r.t, r.target()), (1, 1, 4));
        let r = relation_at_level(d(2, 3), 1).unwrap();
        assert_eq!((r.s, r.t, r.target()), (1, 1, 3));
        let r = relation_at_level(d(2, 3), 3).unwrap();
        assert_eq!((r.s, r.t, r.target()), (2, 2, 5));
        assert_eq!(r.to_string(), "3: Z0*Z5 - Z2*Z2");
    }

    #[test]
    fn chart_level4_quartic() {
        let c = chart(d(3, 2), 4).unwrap();
        let dep: Vec<(usize, Vec<u32>)> = c.dependent.iter().map(|(i, e)| (*i, e.entries().to_vec())).collect();
        assert_eq!(
            dep,
            vec![(4, vec![2, 0, 0]), (5, vec![1, 1, 0]), (6, vec![1, 0, 1]), (7, vec![0, 2, 0])]
        );
        assert_eq!(c.free, vec![1, 2, 3, 8, 9]);
        let c0 = chart(d(3, 2), 0).unwrap();
        assert!(c0.dependent.is_empty());
        assert_eq!(c0.free.len(), 9);
    }

    #[test]
    fn strata_examples() {
        assert_eq!(boundary_strata(d(3, 2), 4).unwrap(), vec![BoundaryStratum { zero_set: vec![1, 2] }]);
        assert_eq!(boundary_strata(d(3, 2), 0).unwrap(), vec![BoundaryStratum { zero_set: vec![] }]);
        assert_eq!(boundary_strata(d(2, 3), 4).unwrap(), vec![BoundaryStratum { zero_set: vec![1, 2] }]);
    }

    #[test]
    fn witness_point_level3() {
        let c = chart(d(3, 2), 3).unwrap();
        let free = vec![int(1), int(1), int(1), int(0), int(0), int(0)];
        let z = c.point_from_free(&free).unwrap();
        let expect: Vec<Rat> = [1, 1, 1, 1, 1, 1, 1, 0, 0, 0].iter().map(|&v| int(v)).collect();
        assert_eq!(z, expect);
        let zero = c.point_from_free(&vec![int(0); 6]).unwrap();
        assert_eq!(zero[0], int(1));
        assert!(zero[1..].iter().all(Zero::is_zero));
    }

    #[test]
    fn grid_small() {
        let c = chart(d(1, 2), 0).unwrap();
        let pts = sample_chart_points(&c, &PointStrategy::Grid { radius: int(1), step: int(1), cap: 100 }, 0).unwrap();
        assert_eq!(pts.len(), 9);
    }

    #[test]
    fn explicit_off_chart_rejected() {
        let c = chart(d(3, 2), 1).unwrap();
        let mut z = c.veronese_point(&[int(1), int(2), rat(1, 2)]);
        assert!(c.check_point(&z).is_ok());
        z[4] += int(1);
        assert!(sample_chart_points(&c, &PointStrategy::Explicit(vec![z]), 0).is_err());
    }

    #[test]
    fn perturbed_points_on_chart() {
        let c = chart(d(2, 2), 1).unwrap();
        let spec = PerturbSpec::new(vec![int(-1), int(0), int(1)], vec![int(1), rat(1, 8)]);
        let pts = sample_chart_points(&c, &PointStrategy::Perturbed(spec), 0).unwrap();
        assert!(!pts.is_empty());
        for p in &pts {
            c.check_point(p).unwrap();
        }
    }
}
