//! Degree tests on flats and the spaces `P_a^w(X) ⊇ P_a(X)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Elem, Field};
use crate::linalg::{self, RowBasis};
use crate::polyring::{monomials_up_to, AffineFlat, Monomial, Poly};
use crate::variety::{flats_in_bucket, FlatCatalog, VarietyTable};

use super::interp::{interpolated_degree, vandermonde_inverse};
use super::FnOnX;

fn flat_ordinals(table: &VarietyTable, flat: &AffineFlat) -> Result<Vec<usize>> {
    let field = table.field();
    flat.points(field).iter().map(|p| table.ordinal(p).ok_or(Error::FlatNotInX)).collect()
}

/// Degree of the reduced interpolant of `f` along the flat; 0 for the zero function.
pub fn degree_on_flat(table: &VarietyTable, f: &FnOnX, flat: &AffineFlat) -> Result<u32> {
    let field = table.field();
    let ords = flat_ordinals(table, flat)?;
    let vals: Vec<Elem> = ords.iter().map(|&i| f.values[i]).collect();
    let vinv = vandermonde_inverse(field);
    Ok(interpolated_degree(field, &vinv, flat.dim(), &vals).unwrap_or(0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMode {
    Lines,
    Planes,
    /// Flats of dimension `⌈(a+1)/(q − q/p)⌉`.
    KrSubspaces,
}

/// `⌈(a+1)/(q − q/p)⌉`.
pub fn kr_dimension(field: &Field, a: u32) -> usize {
    let q = field.q() as u64;
    let den = q - q / field.p() as u64;
    (a as u64 + 1).div_ceil(den) as usize
}

#[derive(Clone, Debug)]
pub struct WeakTest {
    pub ok: bool,
    pub dim: usize,
    pub checked: usize,
    /// First catalogued flat (in catalog order) where the degree exceeds `a`.
    pub violation: Option<(AffineFlat, u32)>,
}

pub fn is_weakly_polynomial(table: &VarietyTable, f: &FnOnX, a: u32, mode: TestMode, limit: u128) -> Result<WeakTest> {
    let field = table.field().clone();
    let dim = match mode {
        TestMode::Lines => 1,
        TestMode::Planes => 2,
        TestMode::KrSubspaces => kr_dimension(&field, a),
    };
    if dim > 2 {
        return Err(Error::BudgetExceeded { what: "flat catalog dimension", needed: dim as u128, limit: 2 });
    }
    let catalog = flats_in_bucket(table, None, dim, limit)?;
    if catalog.is_empty() {
        return Err(Error::EmptyCatalog);
    }
    let vinv = vandermonde_inverse(&field);
    for (i, flat) in catalog.flats.iter().enumerate() {
        let ords = flat_ordinals(table, flat)?;
        let vals: Vec<Elem> = ords.iter().map(|&o| f.values[o]).collect();
        let deg = interpolated_degree(&field, &vinv, dim, &vals).unwrap_or(0);
        if deg > a {
            return Ok(WeakTest { ok: false, dim, checked: i + 1, violation: Some((flat.clone(), deg)) });
        }
    }
    Ok(WeakTest { ok: true, dim, checked: catalog.len(), violation: None })
}

/// Functionals on `k^{k^e}` (grid in code order) vanishing on all polynomials
/// of degree ≤ a.
fn annihilator_template(field: &Field, e: usize, a: u32) -> Vec<Vec<Elem>> {
    let q = field.q();
    let monos: Vec<Monomial> =
        monomials_up_to(e, a, false).into_iter().filter(|m| m.exponents().iter().all(|&x| (x as u32) < q)).collect();
    let size = (q as usize).pow(e as u32);
    let mut grid = vec![Elem::ZERO; e];
    let rows: Vec<Vec<Elem>> = monos
        .iter()
        .map(|m| {
            (0..size)
                .map(|mut idx| {
                    for slot in grid.iter_mut().rev() {
                        *slot = Elem((idx % q as usize) as u32);
                        idx /= q as usize;
                    }
                    m.eval(field, &grid)
                })
                .collect()
        })
        .collect();
    linalg::nullspace(field, &rows, size)
}

fn add_constraints(
    table: &VarietyTable,
    catalog: &FlatCatalog,
    template: &[Vec<Elem>],
    basis: &mut RowBasis,
) -> Result<()> {
    let field = table.field();
    for flat in &catalog.flats {
        if basis.is_full() {
            break;
        }
        let ords = flat_ordinals(table, flat)?;
        for y in template {
            let mut row = vec![Elem::ZERO; table.len()];
            for (&o, &c) in ords.iter().zip(y) {
                row[o] = field.add(row[o], c);
            }
            basis.insert(field, row);
        }
    }
    Ok(())
}

fn weak_constraints(table: &VarietyTable, a: u32, limit: u128) -> Result<(RowBasis, usize, usize)> {
    let field = table.field();
    let mut basis = RowBasis::new(table.len());
    let mut counts = [0usize; 2];
    for (slot, dim) in [1usize, 2].into_iter().enumerate() {
        let catalog = flats_in_bucket(table, None, dim, limit)?;
        counts[slot] = catalog.len();
        let template = annihilator_template(field, dim, a);
        add_constraints(table, &catalog, &template, &mut basis)?;
    }
    Ok((basis, counts[0], counts[1]))
}

/// Basis of `P_a^w(X)`: functions of degree ≤ a on every line and plane in `X`.
pub fn weakpoly_space(table: &VarietyTable, a: u32, limit: u128) -> Result<Vec<Vec<Elem>>> {
    let (basis, _, _) = weak_constraints(table, a, limit)?;
    Ok(basis.kernel(table.field()))
}

/// Echelon basis of `P_a(X)`, the restrictions of global polynomials of degree ≤ a.
pub fn poly_restriction_space(table: &VarietyTable, a: u32) -> Vec<Vec<Elem>> {
    let field = table.field();
    let q = field.q();
    let mut basis = RowBasis::new(table.len());
    for m in monomials_up_to(table.nvars(), a, false) {
        if m.exponents().iter().any(|&x| x as u32 >= q) {
            continue;
        }
        let row: Vec<Elem> = table.points().map(|v| m.eval(field, &v)).collect();
        basis.insert(field, row);
    }
    basis.rows().to_vec()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Spaces {
    pub a: u32,
    pub points: usize,
    pub lines: usize,
    pub planes: usize,
    pub weak_dim: usize,
    pub restriction_dim: usize,
    pub quotient_dim: usize,
    #[serde(skip)]
    pub weak_basis: Vec<Vec<Elem>>,
    #[serde(skip)]
    pub restriction_basis: Vec<Vec<Elem>>,
}

/// Both spaces, with the containment `P_a(X) ⊆ P_a^w(X)` checked.
pub fn spaces(table: &VarietyTable, a: u32, limit: u128) -> Result<Spaces> {
    let field = table.field();
    let (constraints, lines, planes) = weak_constraints(table, a, limit)?;
    let weak = constraints.kernel(field);
    let restr = poly_restriction_space(table, a);
    for r in &restr {
        if linalg::mat_vec(field, constraints.rows(), r).iter().any(|x| !x.is_zero()) {
            return Err(Error::Invalid("a global restriction violates a flat constraint".into()));
        }
    }
    if restr.len() > weak.len() {
        return Err(Error::Invalid("restriction space larger than the weak space".into()));
    }
    Ok(Spaces {
        a,
        points: table.len(),
        lines,
        planes,
        weak_dim: weak.len(),
        restriction_dim: restr.len(),
        quotient_dim: weak.len() - restr.len(),
        weak_basis: weak,
        restriction_basis: restr,
    })
}

pub fn quotient_dim(table: &VarietyTable, a: u32, limit: u128) -> Result<usize> {
    Ok(spaces(table, a, limit)?.quotient_dim)
}

/// Whether `P_a^w(X)/P_a(X) → P_a^w(X∩W)/P_a(X∩W)` is injective, `W` cut out
/// by the affine equations `w_eqs`.
pub fn restriction_injectivity(table: &VarietyTable, w_eqs: &[Poly], a: u32, limit: u128) -> Result<bool> {
    let field = table.field();
    let big = spaces(table, a, limit)?;
    let sub = table.restrict(w_eqs);
    let mut sub_restr = RowBasis::new(sub.len());
    for r in poly_restriction_space(&sub, a) {
        sub_restr.insert(field, r);
    }
    let mut big_restr = RowBasis::new(table.len());
    for r in &big.restriction_basis {
        big_restr.insert(field, r.clone());
    }
    // Residues of the restricted weak basis modulo P_a(X∩W).
    let residues: Vec<Vec<Elem>> = big
        .weak_basis
        .iter()
        .map(|w| {
            let mut r = FnOnX { values: w.clone() }.restrict(table, &sub).values;
            sub_restr.reduce(field, &mut r);
            r
        })
        .collect();
    // Combinations c with Σ c_i residue_i = 0.
    let kernel = linalg::nullspace(field, &linalg::transpose(&residues, sub.len()), residues.len());
    for c in kernel {
        let mut v = vec![Elem::ZERO; table.len()];
        for (w, &ci) in big.weak_basis.iter().zip(&c) {
            if ci.is_zero() {
                continue;
            }
            for (a, &b) in v.iter_mut().zip(w) {
                *a = field.add(*a, field.mul(ci, b));
            }
        }
        if !big_restr.contains(field, &v) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::polyring::{parse_poly, PolyCollection};
    use std::sync::Arc;

    const LIMIT: u128 = 1 << 32;

    fn three_lines(p: u32) -> (Arc<Field>, VarietyTable, FnOnX) {
        let k = Arc::new(Field::prime(p).unwrap());
        let x = VarietyTable::enumerate(&PolyCollection::single(parse_poly("x1*x2*(x1 - x2)", &k, None).unwrap()), LIMIT)
            .unwrap();
        // f(x, 0) = f(0, y) = 0, f(x, x) = x
        let f = FnOnX::from_fn(&x, |v| if v[0] == v[1] { v[0] } else { Elem::ZERO });
        (k, x, f)
    }

    #[test]
    fn example_function_is_weakly_linear() {
        for p in [5, 7, 11] {
            let (_, x, f) = three_lines(p);
            let t = is_weakly_polynomial(&x, &f, 1, TestMode::Lines, LIMIT).unwrap();
            assert!(t.ok);
            assert_eq!(t.checked, 3);
            let s = spaces(&x, 1, LIMIT).unwrap();
            assert_eq!(s.quotient_dim, 1);
            assert!(s.weak_dim >= 4);
        }
        let (_, x, _) = three_lines(7);
        let s = spaces(&x, 1, LIMIT).unwrap();
        assert_eq!((s.restriction_dim, s.weak_dim), (3, 4));
    }

    #[test]
    fn point_indicator_fails_on_a_line() {
        let (k, x, _) = three_lines(7);
        let target = x.ordinal(&[Elem(3), Elem(0)]).unwrap();
        let f = FnOnX { values: (0..x.len()).map(|i| if i == target { Elem::ONE } else { Elem::ZERO }).collect() };
        let t = is_weakly_polynomial(&x, &f, 1, TestMode::Lines, LIMIT).unwrap();
        let (line, deg) = t.violation.unwrap();
        assert_eq!(deg, 6);
        assert!(line.contains(&k, &[Elem(3), Elem(0)]));
        assert_eq!(degree_on_flat(&x, &f, &line).unwrap(), 6);
        assert_eq!(degree_on_flat(&x, &FnOnX { values: vec![Elem(4); x.len()] }, &line).unwrap(), 0);
        let off = AffineFlat::new(&k, vec![Elem(1), Elem(1)], vec![vec![Elem(0), Elem(1)]]).unwrap();
        assert_eq!(degree_on_flat(&x, &f, &off), Err(Error::FlatNotInX));
    }

    #[test]
    fn whole_plane() {
        let k = Arc::new(Field::prime(7).unwrap());
        let x = VarietyTable::enumerate(&PolyCollection::single(Poly::zero(&k, 2)), LIMIT).unwrap();
        let s = spaces(&x, 1, LIMIT).unwrap();
        assert_eq!((s.weak_dim, s.restriction_dim), (3, 3));
        let g = FnOnX::restriction_of(&x, &parse_poly("x1^2 + x2", &k, None).unwrap());
        assert!(is_weakly_polynomial(&x, &g, 2, TestMode::Planes, LIMIT).unwrap().ok);
        assert!(!is_weakly_polynomial(&x, &g, 1, TestMode::KrSubspaces, LIMIT).unwrap().ok);
        assert_eq!(kr_dimension(&k, 1), 1);
        assert_eq!(kr_dimension(&Field::new(2, 2).unwrap(), 3), 2);
    }

    #[test]
    fn injectivity_on_sections() {
        let (k, x, _) = three_lines(7);
        // Restricting to x2 = 0 keeps only one line: the example class dies there.
        let w = parse_poly("x2", &k, Some(2)).unwrap();
        assert!(!restriction_injectivity(&x, &[w], 1, LIMIT).unwrap());
        let full = VarietyTable::enumerate(&PolyCollection::single(Poly::zero(&k, 2)), LIMIT).unwrap();
        let w = parse_poly("x1 + 1", &k, Some(2)).unwrap();
        assert!(restriction_injectivity(&full, &[w], 1, LIMIT).unwrap());
    }
}
