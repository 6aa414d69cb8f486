//! Independent oracles for the integration suites. None of these call into the search or
//! certificate code paths they are used to check.
#![allow(dead_code)]

use cone_cert::exactla::RatMatrix;
use cone_cert::forms::Rat;
use cone_cert::gram::SymMatrix;
use num::{BigInt, One, Signed, Zero};
use rand::Rng;

pub fn r(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

pub fn random_rat<R: Rng>(rng: &mut R, num: i64, max_den: i64) -> Rat {
    r(rng.gen_range(-num..=num), rng.gen_range(1..=max_den))
}

fn choose(n: usize, r: usize) -> usize {
    (0..r).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// `(k+1)(k+2)/2 - C(n+2d, n)` with `k+1 = C(n+d, n)`.
pub fn kernel_dim_formula(n: usize, d: usize) -> usize {
    let k1 = choose(n + d, n);
    k1 * (k1 + 1) / 2 - choose(n + 2 * d, n)
}

/// Coefficients `c_0..c_n` of `det(tI - A)` by Faddeev-LeVerrier.
pub fn char_poly(a: &SymMatrix) -> Vec<Rat> {
    let n = a.size();
    let dense: Vec<Vec<Rat>> = (0..n).map(|i| (0..n).map(|j| a.get(i, j).clone()).collect()).collect();
    let mut c = vec![Rat::zero(); n + 1];
    c[n] = Rat::one();
    let mut m = vec![vec![Rat::zero(); n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = vec![vec![Rat::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = Rat::zero();
                for t in 0..n {
                    if !dense[i][t].is_zero() && !m[t][j].is_zero() {
                        acc += &dense[i][t] * &m[t][j];
                    }
                }
                if i == j {
                    acc += &c[n - k + 1];
                }
                next[i][j] = acc;
            }
        }
        m = next;
        let mut tr = Rat::zero();
        for i in 0..n {
            for t in 0..n {
                tr += &dense[i][t] * &m[t][i];
            }
        }
        c[n - k] = -tr / Rat::from_integer(BigInt::from(k as i64));
    }
    c
}

/// A real symmetric matrix is PSD iff the coefficients of its characteristic polynomial
/// alternate in sign (weakly).
pub fn psd_by_char_poly(a: &SymMatrix) -> bool {
    let c = char_poly(a);
    let n = a.size();
    (0..=n).all(|j| {
        let v = &c[n - j];
        if j % 2 == 0 {
            !v.is_negative()
        } else {
            !v.is_positive()
        }
    })
}

/// Feasibility of `M λ ≥ b` by Fourier-Motzkin elimination.
pub fn fm_feasible(m: &RatMatrix, b: &[Rat]) -> bool {
    let mut rows: Vec<(Vec<Rat>, Rat)> = (0..m.rows()).map(|i| (m.row(i).to_vec(), b[i].clone())).collect();
    for var in 0..m.cols() {
        let (mut pos, mut neg, mut zero) = (Vec::new(), Vec::new(), Vec::new());
        for row in rows {
            if row.0[var].is_positive() {
                pos.push(row);
            } else if row.0[var].is_negative() {
                neg.push(row);
            } else {
                zero.push(row);
            }
        }
        for (pa, pb) in &pos {
            for (na, nb) in &neg {
                // scale so the coefficients of `var` cancel
                let sp = -&na[var];
                let sn = pa[var].clone();
                let a: Vec<Rat> = pa.iter().zip(na).map(|(x, y)| x * &sp + y * &sn).collect();
                zero.push((a, pb * &sp + nb * &sn));
            }
        }
        rows = zero;
    }
    rows.iter().all(|(_, bb)| !bb.is_positive())
}

/// `Σ_i Σ_j a_ij z_i z_j` in plain nested loops.
pub fn quad(a: &SymMatrix, z: &[Rat]) -> Rat {
    let n = a.size();
    let mut acc = Rat::zero();
    for i in 0..n {
        for j in 0..n {
            acc += a.get(i, j) * &z[i] * &z[j];
        }
    }
    acc
}
