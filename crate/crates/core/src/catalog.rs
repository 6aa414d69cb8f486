//! Built-in separating forms, their Gram matrices, stored refutation point sets and the
//! expected filtration chains.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use serde::Deserialize;

use crate::forms::{int, rat, rat_serde, Dims, Form, FormError, Rat};
use crate::gram::{gram_apply, GramError, SymMatrix};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CatalogError {
    #[error("unknown catalog name '{0}'")]
    UnknownName(String),
    #[error("no expected chain for {0}")]
    UnsupportedCase(Dims),
    #[error("stored Gram matrix of '{0}' does not reproduce the form")]
    GramMismatch(String),
    #[error("stored point data is malformed: {0}")]
    BadData(String),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Gram(#[from] GramError),
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub form: Form,
    pub note: &'static str,
    pub gram: Option<SymMatrix>,
    pub point_sets: BTreeMap<usize, Vec<Vec<Rat>>>,
    /// Expected `{lo..hi}` from classification.
    pub expected: Option<(usize, usize)>,
}

struct Spec {
    name: &'static str,
    text: &'static str,
    nvars: usize,
    note: &'static str,
    diag: &'static [(usize, i64)],
    off: &'static [(usize, usize, i64, i64)],
    expected: (usize, usize),
}

const MOTZKIN: &str = "x0^4*x1^2 + x0^2*x1^4 + x2^6 - 3*x0^2*x1^2*x2^2";
const CHOI_LAM_SEXTIC: &str = "x0^4*x1^2 + x0^2*x2^4 + x1^4*x2^2 - 3*x0^2*x1^2*x2^2";
const CHOI_LAM_QUARTIC: &str = "x0^2*x1^2 + x0^2*x2^2 + x1^2*x2^2 + x3^4 - 4*x0*x1*x2*x3";

const SPECS: &[Spec] = &[
    Spec {
        name: "motzkin",
        text: MOTZKIN,
        nvars: 3,
        note: "Motzkin ternary sextic M",
        diag: &[(1, 1), (3, 1), (9, 1)],
        off: &[(1, 8, -3, 2)],
        expected: (7, 7),
    },
    Spec {
        name: "motzkin_sigma",
        text: "x0^4*x2^2 + x0^2*x2^4 + x1^6 - 3*x0^2*x1^2*x2^2",
        nvars: 3,
        note: "M(x0, x2, x1)",
        diag: &[(2, 1), (3, 4), (4, 1), (5, 1), (6, 1)],
        off: &[(1, 6, -2, 1), (3, 5, -2, 1)],
        expected: (4, 4),
    },
    Spec {
        name: "choi_lam_sextic",
        text: CHOI_LAM_SEXTIC,
        nvars: 3,
        note: "Choi-Lam ternary sextic L",
        diag: &[(1, 1), (5, 1), (7, 1)],
        off: &[(2, 7, -3, 2)],
        expected: (5, 5),
    },
    Spec {
        name: "choi_lam_sextic_tau",
        text: "x0^4*x2^2 + x0^2*x1^4 + x1^2*x2^4 - 3*x0^2*x1^2*x2^2",
        nvars: 3,
        note: "L(x0, x2, x1)",
        diag: &[(2, 1), (3, 1), (8, 1)],
        off: &[(1, 8, -3, 2)],
        expected: (6, 6),
    },
    Spec {
        name: "choi_lam_quartic",
        text: CHOI_LAM_QUARTIC,
        nvars: 4,
        note: "Choi-Lam quaternary quartic C",
        diag: &[(1, 1), (2, 1), (5, 1), (9, 1)],
        off: &[(1, 8, -2, 1)],
        expected: (6, 6),
    },
    Spec {
        name: "choi_lam_quartic_sigma",
        text: "x0^2*x3^2 + x0^2*x1^2 + x1^2*x3^2 + x2^4 - 4*x0*x1*x2*x3",
        nvars: 4,
        note: "C(x0, x3, x1, x2)",
        diag: &[(1, 1), (3, 1), (6, 1), (7, 1)],
        off: &[(2, 6, -2, 1)],
        expected: (4, 4),
    },
    Spec {
        name: "choi_lam_quartic_tau",
        text: "x1^2*x3^2 + x2^2*x3^2 + x1^2*x2^2 + x0^4 - 4*x0*x1*x2*x3",
        nvars: 4,
        note: "C(x3, x1, x2, x0)",
        diag: &[(0, 1), (5, 1), (6, 1), (8, 1)],
        off: &[(2, 6, -2, 1)],
        expected: (5, 5),
    },
    Spec {
        name: "x1sq_choi_lam_tau",
        text: "x1^4*x3^2 + x1^2*x2^2*x3^2 + x1^4*x2^2 + x0^4*x1^2 - 4*x0*x1^3*x2*x3",
        nvars: 4,
        note: "x1^2 * C(x3, x1, x2, x0), a quaternary sextic",
        diag: &[(1, 1), (4, 4), (11, 1), (12, 1), (14, 1)],
        off: &[(1, 10, -2, 1), (4, 14, -2, 1)],
        expected: (11, 11),
    },
];

pub fn names() -> Vec<&'static str> {
    SPECS.iter().map(|s| s.name).collect()
}

#[derive(Deserialize)]
struct StoredSet {
    form: String,
    nvars: usize,
    level: usize,
    #[serde(with = "rat_serde::vecvec")]
    points: Vec<Vec<Rat>>,
}

/// Keyed by `(nvars, canonical text, level)`.
type PointTable = BTreeMap<(usize, String, usize), Vec<Vec<Rat>>>;

fn point_table() -> Result<&'static PointTable, CatalogError> {
    static TABLE: OnceLock<Result<PointTable, CatalogError>> = OnceLock::new();
    TABLE
        .get_or_init(|| {
            let raw: Vec<StoredSet> = serde_json::from_str(include_str!("../data/refutation_points.json"))
                .map_err(|e| CatalogError::BadData(e.to_string()))?;
            let mut out = PointTable::new();
            for s in raw {
                let f = Form::parse_with_vars(&s.form, s.nvars)?;
                out.insert((s.nvars, f.to_text(), s.level), s.points);
            }
            Ok(out)
        })
        .as_ref()
        .map_err(Clone::clone)
}

/// Stored refutation points for `f` at `level`, if any.
pub fn stored_points(f: &Form, level: usize) -> Option<Vec<Vec<Rat>>> {
    point_table().ok()?.get(&(f.nvars(), f.to_text(), level)).cloned()
}

/// Number of stored point sets.
pub fn stored_count() -> usize {
    point_table().map_or(0, BTreeMap::len)
}

fn build(spec: &Spec) -> Result<CatalogEntry, CatalogError> {
    let form = Form::parse_with_vars(spec.text, spec.nvars)?;
    let size = form.gram_dims()?.basis_len();
    let mut entries: Vec<(usize, usize, Rat)> = spec.diag.iter().map(|&(i, v)| (i, i, int(v))).collect();
    entries.extend(spec.off.iter().map(|&(i, j, p, q)| (i, j, rat(p, q))));
    let gram = SymMatrix::from_entries(size, &entries)?;
    let point_sets = point_table()?
        .iter()
        .filter(|((nv, text, _), _)| *nv == form.nvars() && *text == form.to_text())
        .map(|((_, _, level), pts)| (*level, pts.clone()))
        .collect();
    Ok(CatalogEntry { name: spec.name, form, note: spec.note, gram: Some(gram), point_sets, expected: Some(spec.expected) })
}

pub fn get(name: &str) -> Result<CatalogEntry, CatalogError> {
    let spec = SPECS.iter().find(|s| s.name == name).ok_or_else(|| CatalogError::UnknownName(name.to_string()))?;
    build(spec)
}

pub fn entries() -> Result<Vec<CatalogEntry>, CatalogError> {
    SPECS.iter().map(build).collect()
}

/// The catalog entry whose form equals `f`.
pub fn find_by_form(f: &Form) -> Option<CatalogEntry> {
    SPECS.iter().filter_map(|s| build(s).ok()).find(|e| &e.form == f)
}

/// Every stored Gram matrix reproduces its form.
pub fn self_check() -> Result<(), CatalogError> {
    for e in entries()? {
        if let Some(g) = &e.gram {
            if gram_apply(g, e.form.gram_dims()?)? != e.form {
                return Err(CatalogError::GramMismatch(e.name.to_string()));
            }
        }
    }
    Ok(())
}

/// `C_0 = … = C_equal_through`, then `C_i ⊊ C_{i+1}` for each `i` in `strict`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpectedChain {
    pub dims: Dims,
    pub equal_through: usize,
    pub strict: Vec<usize>,
    pub top: usize,
}

pub fn expected_chain(dims: Dims) -> Result<ExpectedChain, CatalogError> {
    let top = dims.top_level();
    let equal_through = match (dims.n, dims.d) {
        (3, 2) | (2, 3) => 3,
        (n, 2) if n >= 4 => n,
        (n, 3) if n >= 3 => n,
        _ => return Err(CatalogError::UnsupportedCase(dims)),
    };
    Ok(ExpectedChain { dims, equal_through, strict: (equal_through..top).collect(), top })
}

impl fmt::Display for ExpectedChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let eq: Vec<String> = (0..=self.equal_through).map(|i| format!("C_{i}")).collect();
        write!(f, "{}", eq.join(" = "))?;
        for i in &self.strict {
            write!(f, " ⊊ C_{}", i + 1)?;
        }
        Ok(())
    }
}

/// The closed-form count of strict inclusions, where one is defined.
pub fn mu(dims: Dims) -> Option<i64> {
    let (k, n) = (dims.k() as i64, dims.n as i64);
    match (dims.n, dims.d) {
        (n_, 2) if n_ >= 3 => Some((k - n) - (n + 1)),
        (n_, 3) if n_ >= 2 => Some((k - n) - (n + 1)),
        _ => None,
    }
}

/// Human-readable listing of the catalog.
pub fn manifest() -> Result<String, CatalogError> {
    let mut out = String::new();
    for e in entries()? {
        let dims = e.form.gram_dims()?;
        out.push_str(&format!("{} ({}): {}\n", e.name, dims, e.note));
        out.push_str(&format!("  form: {}\n", e.form));
        if let Some((lo, hi)) = e.expected {
            out.push_str(&format!("  expected: {{{lo}..{hi}}}\n"));
        }
        if let Some(g) = &e.gram {
            let ents: Vec<String> = g
                .upper_entries()
                .iter()
                .map(|(i, j, v)| format!("({i},{j})={}", crate::forms::format_rat(v)))
                .collect();
            out.push_str(&format!("  gram: {}\n", ents.join(" ")));
        }
        let levels: Vec<String> = e.point_sets.keys().map(|l| l.to_string()).collect();
        if !levels.is_empty() {
            out.push_str(&format!("  stored refutation levels: {}\n", levels.join(", ")));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grams_reproduce_forms() {
        self_check().unwrap();
        assert_eq!(names().len(), 8);
    }

    #[test]
    fn permuted_entries_match_permutations() {
        let c = get("choi_lam_quartic").unwrap().form;
        assert_eq!(get("choi_lam_quartic_sigma").unwrap().form, c.permute_vars(&[0, 3, 1, 2]).unwrap());
        assert_eq!(get("choi_lam_quartic_tau").unwrap().form, c.permute_vars(&[3, 1, 2, 0]).unwrap());
        let m = get("motzkin").unwrap().form;
        assert_eq!(get("motzkin_sigma").unwrap().form, m.permute_vars(&[0, 2, 1]).unwrap());
        let l = get("choi_lam_sextic").unwrap().form;
        assert_eq!(get("choi_lam_sextic_tau").unwrap().form, l.permute_vars(&[0, 2, 1]).unwrap());
        let tau = get("choi_lam_quartic_tau").unwrap().form;
        let x1sq = Form::parse_with_vars("x1^2", 4).unwrap();
        assert_eq!(get("x1sq_choi_lam_tau").unwrap().form, x1sq.multiply(&tau).unwrap());
    }

    #[test]
    fn chains() {
        let c = expected_chain(Dims::new(3, 2).unwrap()).unwrap();
        assert_eq!((c.equal_through, c.strict.clone(), c.top), (3, vec![3, 4, 5], 6));
        let c = expected_chain(Dims::new(2, 3).unwrap()).unwrap();
        assert_eq!((c.equal_through, c.strict.clone(), c.top), (3, vec![3, 4, 5, 6], 7));
        let c = expected_chain(Dims::new(4, 2).unwrap()).unwrap();
        assert_eq!((c.equal_through, c.strict.len(), c.top), (4, 6, 10));
        let c = expected_chain(Dims::new(3, 3).unwrap()).unwrap();
        assert_eq!((c.equal_through, c.strict.len(), c.top), (3, 13, 16));
        assert!(expected_chain(Dims::new(2, 2).unwrap()).is_err());
        assert_eq!(mu(Dims::new(3, 2).unwrap()), Some(2));
        assert_eq!(mu(Dims::new(2, 3).unwrap()), Some(4));
        assert_eq!(mu(Dims::new(1, 2).unwrap()), None);
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(get("robinson"), Err(CatalogError::UnknownName(_))));
    }
}
