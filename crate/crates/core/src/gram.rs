//! Gram map, its kernel and Gram cosets.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::exactla::{solve_linear, LinearSolution, RatMatrix};
use crate::forms::{exponent_list, format_rat, parse_rat, rat_to_f64, Dims, Exponent, Form, FormError, Poly, Rat};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GramError {
    #[error("matrix size {got} does not match basis size {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("index {index} out of range for size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("index set must be strictly increasing")]
    NotIncreasing,
    #[error("form of odd degree {0} has no Gram matrix")]
    OddDegree(u32),
    #[error("degree-raise prefix check failed at position {0}")]
    DegreeRaisePrefix(usize),
    #[error(transparent)]
    Form(#[from] FormError),
}

/// Exact symmetric matrix, stored densely.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SymMatrix {
    size: usize,
    data: Vec<Rat>,
}

impl SymMatrix {
    pub fn zeros(size: usize) -> Self {
        SymMatrix { size, data: vec![Rat::zero(); size * size] }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size);
        for i in 0..size {
            m.set(i, i, Rat::one());
        }
        m
    }

    /// Builds from upper-triangle triples; later entries overwrite earlier ones.
    pub fn from_entries(size: usize, entries: &[(usize, usize, Rat)]) -> Result<Self, GramError> {
        let mut m = Self::zeros(size);
        for (i, j, v) in entries {
            for &x in [i, j] {
                if x >= size {
                    return Err(GramError::IndexOutOfRange { index: x, size });
                }
            }
            m.set(*i, *j, v.clone());
        }
        Ok(m)
    }

    /// `U(i,j)`: the symmetric matrix with `q_U(z) = z_i z_j`.
    pub fn unit(size: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(size);
        if i == j {
            m.set(i, i, Rat::one());
        } else {
            m.set(i, j, Rat::new(1.into(), 2.into()));
        }
        m
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.data[i * self.size + j]
    }

    /// Sets both `(i,j)` and `(j,i)`.
    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        self.data[j * self.size + i] = v.clone();
        self.data[i * self.size + j] = v;
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: &Rat) {
        let nv = self.get(i, j) + v;
        self.set(i, j, nv);
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.size, other.size);
        SymMatrix { size: self.size, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.size, other.size);
        SymMatrix { size: self.size, data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, s: &Rat) -> SymMatrix {
        SymMatrix { size: self.size, data: self.data.iter().map(|a| a * s).collect() }
    }

    /// Nonzero entries `(i, j, v)` with `i <= j`, row-major.
    pub fn upper_entries(&self) -> Vec<(usize, usize, Rat)> {
        let mut out = Vec::new();
        for i in 0..self.size {
            for j in i..self.size {
                let v = self.get(i, j);
                if !v.is_zero() {
                    out.push((i, j, v.clone()));
                }
            }
        }
        out
    }

    /// Largest index carrying a nonzero entry.
    pub fn support_max(&self) -> Option<usize> {
        self.upper_entries().iter().map(|(_, j, _)| *j).max()
    }

    /// `zᵀ A z`.
    pub fn quadratic_form(&self, z: &[Rat]) -> Rat {
        assert_eq!(z.len(), self.size);
        let mut acc = Rat::zero();
        for i in 0..self.size {
            if z[i].is_zero() {
                continue;
            }
            let mut row = Rat::zero();
            for j in 0..self.size {
                let a = self.get(i, j);
                if !a.is_zero() && !z[j].is_zero() {
                    row += a * &z[j];
                }
            }
            acc += &z[i] * row;
        }
        acc
    }

    pub fn principal_submatrix(&self, indices: &[usize]) -> SymMatrix {
        let mut m = SymMatrix::zeros(indices.len());
        for (a, &i) in indices.iter().enumerate() {
            for (b, &j) in indices.iter().enumerate().skip(a) {
                m.set(a, b, self.get(i, j).clone());
            }
        }
        m
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.data.iter().map(rat_to_f64).collect()
    }

    pub fn max_abs(&self) -> Rat {
        self.data.iter().map(|x| x.abs()).max().unwrap_or_else(Rat::zero)
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymMatrix({}; ", self.size)?;
        for (i, j, v) in self.upper_entries() {
            write!(f, "[{i},{j}]={} ", format_rat(&v))?;
        }
        write!(f, ")")
    }
}

#[derive(Serialize, Deserialize)]
struct SymMatrixJson {
    size: usize,
    entries: Vec<(usize, usize, String)>,
}

impl Serialize for SymMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SymMatrixJson {
            size: self.size,
            entries: self.upper_entries().into_iter().map(|(i, j, v)| (i, j, format_rat(&v))).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = SymMatrixJson::deserialize(d)?;
        let mut entries = Vec::with_capacity(raw.entries.len());
        for (i, j, v) in raw.entries {
            if i > j {
                return Err(D::Error::custom(format!("entry ({i},{j}) below the diagonal")));
            }
            let v = parse_rat(&v).ok_or_else(|| D::Error::custom(format!("bad rational {v:?}")))?;
            entries.push((i, j, v));
        }
        SymMatrix::from_entries(raw.size, &entries).map_err(D::Error::custom)
    }
}

/// The degree-`d` monomial basis together with the pair structure of the Gram map.
#[derive(Clone, Debug)]
pub struct Basis {
    dims: Dims,
    exps: Vec<Exponent>,
    index: HashMap<Exponent, usize>,
    /// For each degree-`2d` exponent, the pairs `(i,j)`, `i <= j`, in lex order.
    groups: BTreeMap<Exponent, Vec<(usize, usize)>>,
}

impl Basis {
    pub fn new(dims: Dims) -> Self {
        let exps = exponent_list(dims.n, dims.d).expect("dims are validated on construction");
        let index = exps.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        let mut groups: BTreeMap<Exponent, Vec<(usize, usize)>> = BTreeMap::new();
        for i in 0..exps.len() {
            for j in i..exps.len() {
                groups.entry(exps[i].add(&exps[j])).or_default().push((i, j));
            }
        }
        Basis { dims, exps, index, groups }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exponents(&self) -> &[Exponent] {
        &self.exps
    }

    pub fn exponent(&self, i: usize) -> &Exponent {
        &self.exps[i]
    }

    pub fn index_of(&self, e: &Exponent) -> Option<usize> {
        self.index.get(e).copied()
    }

    /// Pairs representing each monomial of degree `2d`.
    pub fn groups(&self) -> &BTreeMap<Exponent, Vec<(usize, usize)>> {
        &self.groups
    }

    pub fn pairs_of(&self, beta: &Exponent) -> &[(usize, usize)] {
        self.groups.get(beta).map_or(&[], Vec::as_slice)
    }

    /// `(m_0(x), …, m_k(x))`.
    pub fn veronese(&self, x: &[Rat]) -> Vec<Rat> {
        self.exps.iter().map(|e| e.eval(x)).collect()
    }

    pub fn veronese_f64(&self, x: &[f64]) -> Vec<f64> {
        self.exps.iter().map(|e| e.eval_f64(x)).collect()
    }
}

fn check_size(a: &SymMatrix, dims: Dims) -> Result<(), GramError> {
    if a.size() != dims.basis_len() {
        return Err(GramError::SizeMismatch { expected: dims.basis_len(), got: a.size() });
    }
    Ok(())
}

/// `Σ a_ij X^{α_i+α_j}`.
pub fn gram_apply(a: &SymMatrix, dims: Dims) -> Result<Form, GramError> {
    check_size(a, dims)?;
    let basis = Basis::new(dims);
    Ok(gram_apply_with(a, &basis))
}

pub fn gram_apply_with(a: &SymMatrix, basis: &Basis) -> Form {
    let mut poly = Poly::zero(basis.dims().nvars());
    let two = Rat::from_integer(2.into());
    for (i, j, v) in a.upper_entries() {
        let c = if i == j { v } else { v * &two };
        poly.add_term(basis.exponent(i).add(basis.exponent(j)), c);
    }
    Form::from_poly(poly, 2 * basis.dims().d).expect("Gram image is homogeneous")
}

/// A Veronese relation `Z_i Z_j - Z_s Z_t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Relation {
    pub i: usize,
    pub j: usize,
    pub s: usize,
    pub t: usize,
}

impl Relation {
    /// `U(i,j) - U(s,t)`, which the Gram map sends to zero.
    pub fn matrix(&self, size: usize) -> SymMatrix {
        SymMatrix::unit(size, self.i, self.j).sub(&SymMatrix::unit(size, self.s, self.t))
    }

    pub fn eval(&self, z: &[Rat]) -> Rat {
        &z[self.i] * &z[self.j] - &z[self.s] * &z[self.t]
    }

    pub fn eval_f64(&self, z: &[f64]) -> f64 {
        z[self.i] * z[self.j] - z[self.s] * z[self.t]
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z{}*Z{} - Z{}*Z{}", self.i, self.j, self.s, self.t)
    }
}

/// All Veronese relations, ordered lexicographically on `(i,j,s,t)`.
pub fn relations(dims: Dims) -> Vec<Relation> {
    let basis = Basis::new(dims);
    let mut out = Vec::new();
    for pairs in basis.groups().values() {
        for (a, &(i, j)) in pairs.iter().enumerate() {
            for &(s, t) in &pairs[a + 1..] {
                out.push(Relation { i, j, s, t });
            }
        }
    }
    out.sort();
    out
}

/// A maximal independent subset of the relations, chosen greedily in canonical order by
/// exact elimination over the vectorized upper triangle.
pub fn kernel_relations(dims: Dims) -> Vec<Relation> {
    let size = dims.basis_len();
    let slot = |i: usize, j: usize| i * size + j;
    // pivot column -> reduced row
    let mut pivots: BTreeMap<usize, BTreeMap<usize, Rat>> = BTreeMap::new();
    let mut chosen = Vec::new();
    for rel in relations(dims) {
        let mut v: BTreeMap<usize, Rat> = BTreeMap::new();
        v.insert(slot(rel.i, rel.j), Rat::one());
        *v.entry(slot(rel.s, rel.t)).or_insert_with(Rat::zero) -= Rat::one();
        v.retain(|_, x| !x.is_zero());
        while let Some((&lead, coef)) = v.iter().find(|(c, _)| pivots.contains_key(c)) {
            let coef = coef.clone();
            for (c, x) in &pivots[&lead] {
                let e = v.entry(*c).or_insert_with(Rat::zero);
                *e -= &coef * x;
            }
            v.retain(|_, x| !x.is_zero());
        }
        if let Some((&lead, lc)) = v.iter().next() {
            let inv = lc.recip();
            let row: BTreeMap<usize, Rat> = v.iter().map(|(c, x)| (*c, x * &inv)).collect();
            // keep rows fully reduced so the search above only needs pivot membership
            for other in pivots.values_mut() {
                if let Some(f) = other.get(&lead).cloned() {
                    for (c, x) in &row {
                        let e = other.entry(*c).or_insert_with(Rat::zero);
                        *e -= &f * x;
                    }
                    other.retain(|_, x| !x.is_zero());
                }
            }
            pivots.insert(lead, row);
            chosen.push(rel);
        }
    }
    chosen
}

pub fn kernel_basis(dims: Dims) -> Vec<SymMatrix> {
    let size = dims.basis_len();
    kernel_relations(dims).iter().map(|r| r.matrix(size)).collect()
}

/// `{base + Σ λ_r N_r}`: all Gram matrices of a form.
#[derive(Clone, Debug)]
pub struct GramCoset {
    pub dims: Dims,
    pub form: Form,
    pub base: SymMatrix,
    pub kernel: Vec<Relation>,
}

impl GramCoset {
    pub fn kernel_matrices(&self) -> Vec<SymMatrix> {
        let size = self.dims.basis_len();
        self.kernel.iter().map(|r| r.matrix(size)).collect()
    }

    pub fn element(&self, lambda: &[Rat]) -> SymMatrix {
        assert_eq!(lambda.len(), self.kernel.len());
        let mut m = self.base.clone();
        let half = Rat::new(1.into(), 2.into());
        for (rel, l) in self.kernel.iter().zip(lambda) {
            if l.is_zero() {
                continue;
            }
            for (i, j, sign) in [(rel.i, rel.j, l.clone()), (rel.s, rel.t, -l.clone())] {
                let v = if i == j { sign } else { sign * &half };
                m.add_to(i, j, &v);
            }
        }
        m
    }

    pub fn contains(&self, a: &SymMatrix) -> bool {
        a.size() == self.dims.basis_len() && gram_apply(a, self.dims).map(|g| g == self.form).unwrap_or(false)
    }

    /// Coordinates `λ` of `a` in the coset, if `a` belongs to it.
    pub fn locate(&self, a: &SymMatrix) -> Option<Vec<Rat>> {
        if a.size() != self.dims.basis_len() {
            return None;
        }
        let size = a.size();
        let kms = self.kernel_matrices();
        let mut m = RatMatrix::zeros(size * (size + 1) / 2, kms.len());
        let mut rhs = Vec::with_capacity(size * (size + 1) / 2);
        let mut row = 0;
        for i in 0..size {
            for j in i..size {
                for (c, k) in kms.iter().enumerate() {
                    m.set(row, c, k.get(i, j).clone());
                }
                rhs.push(a.get(i, j) - self.base.get(i, j));
                row += 1;
            }
        }
        match solve_linear(&m, &rhs) {
            LinearSolution::Solved { particular, .. } => Some(particular),
            LinearSolution::Inconsistent { .. } => None,
        }
    }

    /// Closed-form affine projection of `a` onto the coset in the Frobenius metric.
    pub fn project(&self, a: &SymMatrix) -> SymMatrix {
        let basis = Basis::new(self.dims);
        project_onto_form(a, &self.form, &basis)
    }
}

/// Frobenius-nearest Gram matrix of `f` to `a`. Each monomial's pair group is an
/// independent hyperplane `Σ w_p a_p = c` with weights 1 on the diagonal and 2 off it.
pub fn project_onto_form(a: &SymMatrix, f: &Form, basis: &Basis) -> SymMatrix {
    let mut out = a.clone();
    for (beta, pairs) in basis.groups() {
        let c = f.coefficient(beta);
        let mut lhs = Rat::zero();
        let mut wsum = Rat::zero();
        for &(i, j) in pairs {
            let w = if i == j { Rat::one() } else { Rat::from_integer(2.into()) };
            lhs += &w * a.get(i, j);
            wsum += w;
        }
        let mu = (c - lhs) / wsum;
        if mu.is_zero() {
            continue;
        }
        for &(i, j) in pairs {
            out.add_to(i, j, &mu);
        }
    }
    out
}

/// Float version of [`project_onto_form`] on a dense row-major matrix.
pub fn project_onto_form_f64(a: &mut [f64], size: usize, coeffs: &BTreeMap<Exponent, f64>, basis: &Basis) {
    for (beta, pairs) in basis.groups() {
        let c = coeffs.get(beta).copied().unwrap_or(0.0);
        let mut lhs = 0.0;
        let mut wsum = 0.0;
        for &(i, j) in pairs {
            let w = if i == j { 1.0 } else { 2.0 };
            lhs += w * a[i * size + j];
            wsum += w;
        }
        let mu = (c - lhs) / wsum;
        for &(i, j) in pairs {
            a[i * size + j] += mu;
            if i != j {
                a[j * size + i] += mu;
            }
        }
    }
}

/// The base matrix puts each coefficient on the lex-first pair of its monomial.
pub fn generic_gram(f: &Form) -> Result<GramCoset, GramError> {
    if f.degree() % 2 == 1 {
        return Err(GramError::OddDegree(f.degree()));
    }
    let dims = f.gram_dims()?;
    let basis = Basis::new(dims);
    let mut base = SymMatrix::zeros(basis.len());
    let half = Rat::new(1.into(), 2.into());
    for (beta, c) in f.terms() {
        let &(i, j) = basis.pairs_of(beta).first().expect("every monomial of degree 2d has a pair");
        base.set(i, j, if i == j { c.clone() } else { c * &half });
    }
    Ok(GramCoset { dims, form: f.clone(), base, kernel: kernel_relations(dims) })
}

fn check_index_set(indices: &[usize], size: usize) -> Result<(), GramError> {
    if indices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(GramError::NotIncreasing);
    }
    if let Some(&last) = indices.last() {
        if last >= size {
            return Err(GramError::IndexOutOfRange { index: last, size });
        }
    }
    Ok(())
}

pub fn restrict_gram(b: &SymMatrix, indices: &[usize]) -> Result<SymMatrix, GramError> {
    check_index_set(indices, b.size())?;
    Ok(b.principal_submatrix(indices))
}

pub fn expand_gram(a: &SymMatrix, indices: &[usize], big: Dims) -> Result<SymMatrix, GramError> {
    let size = big.basis_len();
    check_index_set(indices, size)?;
    if indices.len() != a.size() {
        return Err(GramError::SizeMismatch { expected: indices.len(), got: a.size() });
    }
    let mut b = SymMatrix::zeros(size);
    for (i, j, v) in a.upper_entries() {
        b.set(indices[i], indices[j], v);
    }
    Ok(b)
}

/// Big-basis indices whose exponents are supported on the injected variables.
pub fn index_set_for_substitution(small: Dims, big: Dims, injection: &[usize]) -> Result<Vec<usize>, GramError> {
    if injection.len() != small.nvars()
        || injection.windows(2).any(|w| w[0] >= w[1])
        || injection.last().is_some_and(|&v| v >= big.nvars())
        || small.d != big.d
    {
        return Err(GramError::Form(FormError::BadInjection { target: big.n }));
    }
    let basis = Basis::new(big);
    let out: Vec<usize> = (0..basis.len())
        .filter(|&i| {
            basis.exponent(i).entries().iter().enumerate().all(|(v, &e)| e == 0 || injection.contains(&v))
        })
        .collect();
    debug_assert_eq!(out.len(), small.basis_len());
    Ok(out)
}

/// Under descending lex the products `X_0·m_j` of the degree-`δ` basis form the
/// prefix of the degree-`δ+1` basis; returns that prefix after checking it.
pub fn index_set_for_degree_raise(n: usize, delta: u32) -> Result<Vec<usize>, GramError> {
    let small = exponent_list(n, delta)?;
    let big = exponent_list(n, delta + 1)?;
    let x0 = Exponent::unit(n + 1, 0, 1);
    for (pos, e) in small.iter().enumerate() {
        if big[pos] != e.add(&x0) {
            return Err(GramError::DegreeRaisePrefix(pos));
        }
    }
    Ok((0..small.len()).collect())
}

/// Indices of `X^γ·m_j` in the degree-`d+|γ|` basis; these are increasing since adding a
/// fixed exponent preserves descending lex.
pub fn index_set_for_multiplier(small: Dims, gamma: &Exponent) -> Result<Vec<usize>, GramError> {
    if gamma.nvars() != small.nvars() || gamma.degree() == 0 {
        return Err(GramError::Form(FormError::BadInjection { target: small.n }));
    }
    let big = Dims::new(small.n, small.d + gamma.degree())?;
    let basis = Basis::new(big);
    Ok(exponent_list(small.n, small.d)?
        .iter()
        .map(|e| basis.index_of(&e.add(gamma)).expect("product lies in the big basis"))
        .collect())
}

/// Sum of the absolute values of all entries; cheap size proxy for reporting.
pub fn entry_l1(a: &SymMatrix) -> Rat {
    a.upper_entries().iter().fold(Rat::zero(), |acc, (_, _, v)| acc + v.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{int, rat};

    fn d(n: usize, dd: u32) -> Dims {
        Dims::new(n, dd).unwrap()
    }

    #[test]
    fn relations_small() {
        assert_eq!(relations(d(1, 2)), vec![Relation { i: 0, j: 2, s: 1, t: 1 }]);
        assert!(relations(d(1, 1)).is_empty());
        assert!(relations(d(3, 2)).contains(&Relation { i: 0, j: 4, s: 1, t: 1 }));
    }

    #[test]
    fn kernel_sizes() {
        assert_eq!(kernel_basis(d(1, 2)).len(), 1);
        assert_eq!(kernel_basis(d(3, 2)).len(), 20);
        assert_eq!(kernel_basis(d(2, 3)).len(), 27);
        for k in kernel_basis(d(2, 2)) {
            assert!(gram_apply(&k, d(2, 2)).unwrap().is_zero());
        }
    }

    #[test]
    fn cosets() {
        let f = Form::parse("x0^2*x1^2").unwrap();
        let c = generic_gram(&f).unwrap();
        assert_eq!(c.base.get(0, 2), &rat(1, 2));
        assert!(c.base.get(1, 1).is_zero());
        assert_eq!(c.kernel, vec![Relation { i: 0, j: 2, s: 1, t: 1 }]);
        let e = c.element(&[rat(3, 2)]);
        assert_eq!(gram_apply(&e, c.dims).unwrap(), f);
        assert_eq!(c.locate(&e), Some(vec![rat(3, 2)]));
        assert!(generic_gram(&Form::parse("x0^3").unwrap()).is_err());
    }

    #[test]
    fn projection_lands_in_coset() {
        let f = Form::parse("x0^4 + 2*x0^2*x1^2 - x1^3*x2 + x2^4").unwrap();
        let c = generic_gram(&f).unwrap();
        let p = c.project(&SymMatrix::identity(6));
        assert!(c.contains(&p));
    }

    #[test]
    fn index_sets() {
        assert_eq!(index_set_for_substitution(d(1, 1), d(2, 1), &[0, 1]).unwrap(), vec![0, 1]);
        assert_eq!(index_set_for_substitution(d(3, 2), d(3, 2), &[0, 1, 2, 3]).unwrap(), (0..10).collect::<Vec<_>>());
        assert_eq!(index_set_for_degree_raise(2, 2).unwrap(), (0..6).collect::<Vec<_>>());
        assert!(index_set_for_substitution(d(1, 1), d(2, 1), &[1, 0]).is_err());
    }

    #[test]
    fn expand_restrict_roundtrip() {
        let a = SymMatrix::from_entries(3, &[(0, 0, int(1)), (0, 2, rat(-1, 3)), (1, 1, int(2))]).unwrap();
        let big = d(2, 2);
        let idx = index_set_for_substitution(d(1, 2), big, &[0, 2]).unwrap();
        let b = expand_gram(&a, &idx, big).unwrap();
        assert_eq!(restrict_gram(&b, &idx).unwrap(), a);
        let f = gram_apply(&a, d(1, 2)).unwrap();
        assert_eq!(gram_apply(&b, big).unwrap(), f.embed(&[0, 2], 3).unwrap());
    }

    #[test]
    fn json_roundtrip() {
        let a = SymMatrix::from_entries(3, &[(0, 2, rat(-1, 3)), (1, 1, int(2))]).unwrap();
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, r#"{"size":3,"entries":[[0,2,"-1/3"],[1,1,"2"]]}"#);
        let back: SymMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, a);
        assert!(serde_json::from_str::<SymMatrix>(r#"{"size":2,"entries":[[1,0,"1"]]}"#).is_err());
    }
}
