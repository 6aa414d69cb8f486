//! Exact rational linear algebra: PSD certification, linear solves and LP
//! feasibility with Farkas certificates.

use num::{BigInt, Integer, One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::forms::Rat;
use crate::gram::SymMatrix;

/// Dense row-major rational matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix { rows, cols, data: vec![Rat::zero(); rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        RatMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    /// A matrix with `cols` columns and no rows.
    pub fn empty(cols: usize) -> Self {
        RatMatrix { rows: 0, cols, data: Vec::new() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rat {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rat) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Rat] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn push_row(&mut self, row: Vec<Rat>) {
        assert_eq!(row.len(), self.cols);
        self.data.extend(row);
        self.rows += 1;
    }

    pub fn mul_vec(&self, x: &[Rat]) -> Vec<Rat> {
        (0..self.rows).map(|r| dot(self.row(r), x)).collect()
    }

    /// `yᵀ M`.
    pub fn left_mul(&self, y: &[Rat]) -> Vec<Rat> {
        let mut out = vec![Rat::zero(); self.cols];
        for (r, yr) in y.iter().enumerate() {
            if yr.is_zero() {
                continue;
            }
            for (c, o) in out.iter_mut().enumerate() {
                let m = self.get(r, c);
                if !m.is_zero() {
                    *o += yr * m;
                }
            }
        }
        out
    }
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    let mut acc = Rat::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc += x * y;
        }
    }
    acc
}

/// `P^T A P = L D L^T` with `P` given by `perm` (`(P^T A P)[a][b] = A[perm[a]][perm[b]]`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LdlFactorization {
    pub perm: Vec<usize>,
    /// Unit lower-triangular factor in permuted coordinates, stored row-major.
    pub l: Vec<Vec<Rat>>,
    pub d: Vec<Rat>,
}

impl LdlFactorization {
    pub fn size(&self) -> usize {
        self.perm.len()
    }

    pub fn reconstruct(&self) -> SymMatrix {
        let n = self.size();
        let mut out = SymMatrix::zeros(n);
        for a in 0..n {
            for b in 0..=a {
                let mut acc = Rat::zero();
                for t in 0..=b {
                    if self.d[t].is_zero() {
                        continue;
                    }
                    acc += &self.l[a][t] * &self.d[t] * &self.l[b][t];
                }
                out.set(self.perm[a], self.perm[b], acc);
            }
        }
        out
    }

    /// Exact re-check: valid permutation, unit lower-triangular `L`, `D >= 0`, and the
    /// product reproduces `a`.
    pub fn verify(&self, a: &SymMatrix) -> bool {
        let n = self.size();
        if a.size() != n || self.l.len() != n || self.d.len() != n {
            return false;
        }
        let mut seen = vec![false; n];
        for &p in &self.perm {
            if p >= n || seen[p] {
                return false;
            }
            seen[p] = true;
        }
        for (r, row) in self.l.iter().enumerate() {
            if row.len() != n || !row[r].is_one() || row[r + 1..].iter().any(|x| !x.is_zero()) {
                return false;
            }
        }
        if self.d.iter().any(Signed::is_negative) {
            return false;
        }
        self.reconstruct() == *a
    }
}

/// A vector with `vᵀ A v < 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NegativeWitness {
    pub vector: Vec<Rat>,
    pub value: Rat,
}

impl NegativeWitness {
    pub fn verify(&self, a: &SymMatrix) -> bool {
        self.vector.len() == a.size()
            && self.value.is_negative()
            && a.quadratic_form(&self.vector) == self.value
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PsdVerdict {
    Psd(LdlFactorization),
    NotPsd(NegativeWitness),
}

impl PsdVerdict {
    pub fn is_psd(&self) -> bool {
        matches!(self, PsdVerdict::Psd(_))
    }

    pub fn verify(&self, a: &SymMatrix) -> bool {
        match self {
            PsdVerdict::Psd(f) => f.verify(a),
            PsdVerdict::NotPsd(w) => w.verify(a),
        }
    }
}

/// Complete PSD test by diagonally pivoted LDLᵀ.
///
/// A negative diagonal, or a zero diagonal with a nonzero entry in its row once all
/// remaining diagonals are zero, yields a witness; otherwise the factorization.
pub fn psd_check(a: &SymMatrix) -> PsdVerdict {
    let n = a.size();
    let mut s: Vec<Vec<Rat>> = (0..n).map(|i| (0..n).map(|j| a.get(i, j).clone()).collect()).collect();
    let mut remaining: Vec<usize> = (0..n).collect();
    // (pivot, multipliers over indices remaining after it)
    let mut steps: Vec<(usize, Vec<(usize, Rat)>)> = Vec::new();
    let mut d: Vec<Rat> = Vec::new();

    let witness_from = |v_local: Vec<(usize, Rat)>, steps: &Vec<(usize, Vec<(usize, Rat)>)>| {
        let mut x = vec![Rat::zero(); n];
        for (i, v) in v_local {
            x[i] = v;
        }
        for (p, mult) in steps.iter().rev() {
            let mut acc = Rat::zero();
            for (j, l) in mult {
                if !x[*j].is_zero() {
                    acc += l * &x[*j];
                }
            }
            x[*p] = -acc;
        }
        let value = a.quadratic_form(&x);
        debug_assert!(value.is_negative());
        PsdVerdict::NotPsd(NegativeWitness { vector: x, value })
    };

    while !remaining.is_empty() {
        if let Some(&i) = remaining.iter().find(|&&i| s[i][i].is_negative()) {
            return witness_from(vec![(i, Rat::one())], &steps);
        }
        let pivot = remaining.iter().copied().find(|&i| s[i][i].is_positive());
        let Some(p) = pivot else {
            for (ai, &i) in remaining.iter().enumerate() {
                for &j in &remaining[ai + 1..] {
                    if !s[i][j].is_zero() {
                        let t = if s[i][j].is_positive() { -Rat::one() } else { Rat::one() };
                        return witness_from(vec![(i, t), (j, Rat::one())], &steps);
                    }
                }
            }
            break;
        };
        let piv = s[p][p].clone();
        remaining.retain(|&i| i != p);
        let mult: Vec<(usize, Rat)> = remaining
            .iter()
            .filter(|&&j| !s[j][p].is_zero())
            .map(|&j| (j, &s[j][p] / &piv))
            .collect();
        for (j, lj) in &mult {
            for &i in &remaining {
                if s[p][i].is_zero() {
                    continue;
                }
                let delta = lj * &s[p][i];
                s[*j][i] -= delta;
            }
        }
        d.push(piv);
        steps.push((p, mult));
    }

    let mut perm: Vec<usize> = steps.iter().map(|(p, _)| *p).collect();
    perm.extend(remaining.iter().copied());
    let mut pos = vec![0usize; n];
    for (a_idx, &p) in perm.iter().enumerate() {
        pos[p] = a_idx;
    }
    let mut l = vec![vec![Rat::zero(); n]; n];
    for (r, row) in l.iter_mut().enumerate() {
        row[r] = Rat::one();
    }
    for (t, (_, mult)) in steps.iter().enumerate() {
        for (j, lj) in mult {
            l[pos[*j]][t] = lj.clone();
        }
    }
    d.resize(n, Rat::zero());
    PsdVerdict::Psd(LdlFactorization { perm, l, d })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LinearSolution {
    Solved { particular: Vec<Rat>, nullspace: Vec<Vec<Rat>> },
    /// `yᵀ M = 0` and `yᵀ b = 1`.
    Inconsistent { certificate: Vec<Rat> },
}

/// Exact Gaussian elimination for `M x = b`.
pub fn solve_linear(m: &RatMatrix, b: &[Rat]) -> LinearSolution {
    assert_eq!(m.rows(), b.len());
    let (rows, cols) = (m.rows(), m.cols());
    // augmented [M | b | I]
    let width = cols + 1 + rows;
    let mut t: Vec<Vec<Rat>> = (0..rows)
        .map(|r| {
            let mut row = m.row(r).to_vec();
            row.push(b[r].clone());
            row.extend((0..rows).map(|c| if c == r { Rat::one() } else { Rat::zero() }));
            row
        })
        .collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(pr) = (r..rows).find(|&i| !t[i][c].is_zero()) else { continue };
        t.swap(r, pr);
        let inv = t[r][c].recip();
        for x in t[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !t[i][c].is_zero() {
                let f = t[i][c].clone();
                for j in 0..width {
                    if !t[r][j].is_zero() {
                        let delta = &f * &t[r][j];
                        t[i][j] -= delta;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    for row in t.iter().skip(r) {
        if !row[cols].is_zero() {
            let scale = row[cols].recip();
            let certificate = row[cols + 1..].iter().map(|x| x * &scale).collect();
            return LinearSolution::Inconsistent { certificate };
        }
    }
    let mut particular = vec![Rat::zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        particular[c] = t[i][cols].clone();
    }
    let mut nullspace = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Rat::zero(); cols];
        v[free] = Rat::one();
        for (i, &c) in pivots.iter().enumerate() {
            v[c] = -t[i][free].clone();
        }
        nullspace.push(v);
    }
    LinearSolution::Solved { particular, nullspace }
}

/// Nonnegative integer multipliers `y` over the rows of `M λ ≥ b` with `yᵀM = 0` and
/// `yᵀb > 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FarkasCertificate {
    #[serde(with = "bigint_vec")]
    pub multipliers: Vec<BigInt>,
}

impl FarkasCertificate {
    /// Scales rational multipliers to coprime integers.
    pub fn from_rational(y: &[Rat]) -> Self {
        let mut lcm = BigInt::one();
        for v in y {
            lcm = lcm.lcm(v.denom());
        }
        let mut ints: Vec<BigInt> = y.iter().map(|v| (v * Rat::from_integer(lcm.clone())).to_integer()).collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
        if !g.is_zero() && !g.is_one() {
            for x in ints.iter_mut() {
                *x /= &g;
            }
        }
        FarkasCertificate { multipliers: ints }
    }

    /// Returns `yᵀb` when the certificate is valid.
    pub fn verify(&self, m: &RatMatrix, b: &[Rat]) -> Option<Rat> {
        if self.multipliers.len() != m.rows() || b.len() != m.rows() {
            return None;
        }
        if self.multipliers.iter().any(Signed::is_negative) {
            return None;
        }
        let y: Vec<Rat> = self.multipliers.iter().map(|v| Rat::from_integer(v.clone())).collect();
        if m.left_mul(&y).iter().any(|x| !x.is_zero()) {
            return None;
        }
        let val = dot(&y, b);
        val.is_positive().then_some(val)
    }
}

/// Fraction-free elimination on an integer system; returns the solution with free
/// variables set to zero, or `None` when inconsistent.
pub fn solve_integer(mut a: Vec<Vec<BigInt>>, rhs: Vec<BigInt>) -> Option<Vec<Rat>> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    for (row, v) in a.iter_mut().zip(rhs) {
        row.push(v);
    }
    let mut prev = BigInt::one();
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        let (top, rest) = a.split_at_mut(r + 1);
        let pivot_row = &top[r];
        for row in rest.iter_mut() {
            let factor = row[c].clone();
            for j in c + 1..=cols {
                let v = &pivot_row[c] * &row[j] - &factor * &pivot_row[j];
                row[j] = v / &prev;
            }
            row[c] = BigInt::zero();
        }
        prev = a[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    if a[r..].iter().any(|row| !row[cols].is_zero()) {
        return None;
    }
    let mut y = vec![Rat::zero(); cols];
    for (t, &c) in pivots.iter().enumerate().rev() {
        let mut acc = Rat::from_integer(a[t][cols].clone());
        for &j in &pivots[t + 1..] {
            if !a[t][j].is_zero() {
                acc -= Rat::from_integer(a[t][j].clone()) * &y[j];
            }
        }
        y[c] = acc / Rat::from_integer(a[t][c].clone());
    }
    Some(y)
}

/// Tries to certify infeasibility of `M λ ≥ b` using every row: solves
/// `Mᵀy = 0, bᵀy = 1` directly and accepts a nonnegative solution. Cheap when the rows
/// are already a dual-optimal support.
pub fn farkas_direct(m: &RatMatrix, b: &[Rat]) -> Option<FarkasCertificate> {
    let (nrows, p) = (m.rows(), m.cols());
    let mut scaled: Vec<Vec<BigInt>> = Vec::with_capacity(nrows);
    let mut scales: Vec<BigInt> = Vec::with_capacity(nrows);
    for r in 0..nrows {
        let mut l = b[r].denom().clone();
        for v in m.row(r) {
            l = l.lcm(v.denom());
        }
        let lr = Rat::from_integer(l.clone());
        let mut row: Vec<BigInt> = m.row(r).iter().map(|v| (v * &lr).to_integer()).collect();
        row.push((&b[r] * &lr).to_integer());
        scaled.push(row);
        scales.push(l);
    }
    // transpose: p + 1 equations in nrows unknowns
    let a: Vec<Vec<BigInt>> = (0..=p).map(|c| scaled.iter().map(|row| row[c].clone()).collect()).collect();
    let mut rhs = vec![BigInt::zero(); p + 1];
    rhs[p] = BigInt::one();
    let z = solve_integer(a, rhs)?;
    if z.iter().any(Signed::is_negative) {
        return None;
    }
    let y: Vec<Rat> = z.iter().zip(&scales).map(|(v, s)| v * Rat::from_integer(s.clone())).collect();
    let cert = FarkasCertificate::from_rational(&y);
    cert.verify(m, b).map(|_| cert)
}

mod bigint_vec {
    use num::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| x.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        let raw: Vec<String> = Vec::deserialize(d)?;
        raw.iter().map(|s| s.parse().map_err(serde::de::Error::custom)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Feasible(Vec<Rat>),
    Infeasible(FarkasCertificate),
}

/// Decides `M λ ≥ b` over free `λ` exactly.
///
/// Runs a Phase-I simplex with Bland's rule on the alternative system
/// `Mᵀy = 0, bᵀy = 1, y ≥ 0`. A zero Phase-I optimum gives the Farkas multipliers;
/// a positive optimum `t` gives simplex multipliers `(u, t)` with `M u + t b ≤ 0`, hence
/// `λ = -u/t` is feasible. Both outcomes are re-verified before returning.
pub fn lp_feasible(m: &RatMatrix, b: &[Rat]) -> LpOutcome {
    assert_eq!(m.rows(), b.len());
    let (rows_m, p) = (m.rows(), m.cols());
    if rows_m == 0 {
        return LpOutcome::Feasible(vec![Rat::zero(); p]);
    }
    // constraint rows of the alternative system: p rows from Mᵀ plus one row from bᵀ
    let nr = p + 1;
    let col = |j: usize, r: usize| -> Rat {
        if r < p {
            m.get(j, r).clone()
        } else {
            b[j].clone()
        }
    };
    let ncols = rows_m + nr; // y columns then artificials
    let mut basis: Vec<usize> = (0..nr).map(|r| rows_m + r).collect();
    let mut binv: Vec<Vec<Rat>> =
        (0..nr).map(|r| (0..nr).map(|c| if r == c { Rat::one() } else { Rat::zero() }).collect()).collect();
    let mut xb: Vec<Rat> = (0..nr).map(|r| if r == p { Rat::one() } else { Rat::zero() }).collect();
    let cost = |j: usize| if j >= rows_m { Rat::one() } else { Rat::zero() };
    let column = |j: usize| -> Vec<Rat> {
        if j < rows_m {
            (0..nr).map(|r| col(j, r)).collect()
        } else {
            (0..nr).map(|r| if r == j - rows_m { Rat::one() } else { Rat::zero() }).collect()
        }
    };

    loop {
        // simplex multipliers π = c_Bᵀ B⁻¹
        let mut pi = vec![Rat::zero(); nr];
        for (r, &bj) in basis.iter().enumerate() {
            let c = cost(bj);
            if c.is_zero() {
                continue;
            }
            for (k, v) in binv[r].iter().enumerate() {
                if !v.is_zero() {
                    pi[k] += &c * v;
                }
            }
        }
        let mut in_basis = vec![false; ncols];
        for &bj in &basis {
            in_basis[bj] = true;
        }
        // Bland: lowest-index column with negative reduced cost
        let entering = (0..ncols).find(|&j| {
            if in_basis[j] {
                return false;
            }
            let a = column(j);
            let rc = cost(j) - dot(&pi, &a);
            rc.is_negative()
        });
        let Some(e) = entering else {
            let objective: Rat = basis
                .iter()
                .zip(&xb)
                .filter(|(&bj, _)| bj >= rows_m)
                .fold(Rat::zero(), |acc, (_, v)| acc + v);
            if objective.is_zero() {
                let mut y = vec![Rat::zero(); rows_m];
                for (&bj, v) in basis.iter().zip(&xb) {
                    if bj < rows_m {
                        y[bj] = v.clone();
                    }
                }
                let cert = FarkasCertificate::from_rational(&y);
                debug_assert!(cert.verify(m, b).is_some());
                return LpOutcome::Infeasible(cert);
            }
            let t = pi[p].clone();
            debug_assert!(t.is_positive());
            let lambda: Vec<Rat> = pi[..p].iter().map(|u| -u / &t).collect();
            debug_assert!(m.mul_vec(&lambda).iter().zip(b).all(|(l, r)| l >= r));
            return LpOutcome::Feasible(lambda);
        };
        let a = column(e);
        let d: Vec<Rat> = binv.iter().map(|row| dot(row, &a)).collect();
        // ratio test, ties broken by smallest basic variable index
        let mut leave: Option<(usize, Rat)> = None;
        for (r, dr) in d.iter().enumerate() {
            if !dr.is_positive() {
                continue;
            }
            let ratio = &xb[r] / dr;
            let better = match &leave {
                None => true,
                Some((lr, best)) => ratio < *best || (ratio == *best && basis[r] < basis[*lr]),
            };
            if better {
                leave = Some((r, ratio));
            }
        }
        // Phase I is bounded below by zero, so a leaving row always exists.
        let (lr, theta) = leave.expect("phase-one objective is bounded");
        for (r, x) in xb.iter_mut().enumerate() {
            if r == lr {
                *x = theta.clone();
            } else if !d[r].is_zero() {
                *x -= &d[r] * &theta;
            }
        }
        let piv = d[lr].clone();
        let prow: Vec<Rat> = binv[lr].iter().map(|v| v / &piv).collect();
        for (r, row) in binv.iter_mut().enumerate() {
            if r == lr || d[r].is_zero() {
                continue;
            }
            for (k, v) in row.iter_mut().enumerate() {
                if !prow[k].is_zero() {
                    *v -= &d[r] * &prow[k];
                }
            }
        }
        binv[lr] = prow;
        basis[lr] = e;
    }
}
