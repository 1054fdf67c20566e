//! Brute-force existence of polynomial Stein operators of a fixed shape.
//!
//! An operator `sum a_ij M^i D^j` with `i <= degree`, `j <= order` annihilates
//! a law on `x^k` iff `sum a_ij k^(j) mu_(k-j+i) = 0`, a linear condition on the
//! coefficients. Columns are ordered `j` descending, then `i` descending
//! (`a_12, a_02, a_11, a_01, a_10, a_00` for order 2, degree 1).

use serde::{Deserialize, Serialize};

use crate::error::{Result, SteinError};
use crate::exec::Exec;
use crate::linalg;
use crate::moments::MomentSequence;
use crate::opweyl::OperatorPoly;
use crate::scalar::{falling, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapeGrid {
    pub max_order: usize,
    pub max_degree: usize,
}

impl ShapeGrid {
    pub fn new(max_order: usize, max_degree: usize) -> Self {
        ShapeGrid {
            max_order,
            max_degree,
        }
    }

    pub fn unknowns(&self) -> usize {
        (self.max_order + 1) * (self.max_degree + 1)
    }

    /// `(i, j)` for each column.
    pub fn columns(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.unknowns());
        for j in (0..=self.max_order).rev() {
            for i in (0..=self.max_degree).rev() {
                out.push((i, j));
            }
        }
        out
    }

    /// Default last row index: a square system.
    pub fn square_k(&self) -> usize {
        self.unknowns() - 1
    }

    pub fn vector_of(&self, a: &OperatorPoly) -> Option<Vec<Scalar>> {
        if a.terms()
            .any(|(i, j, _)| i > self.max_degree || j > self.max_order)
        {
            return None;
        }
        Some(self.columns().iter().map(|&(i, j)| a.coeff(i, j)).collect())
    }

    pub fn operator_of(&self, v: &[Scalar]) -> OperatorPoly {
        OperatorPoly::from_terms(
            self.columns()
                .into_iter()
                .zip(v)
                .map(|((i, j), c)| (i, j, c.clone())),
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentMatrix {
    pub shape: ShapeGrid,
    pub columns: Vec<(usize, usize)>,
    /// Row `k` is the condition from the test monomial `x^k`.
    pub rows: Vec<Vec<Scalar>>,
}

fn build_from(mu: &[Scalar], shape: ShapeGrid, k_max: usize) -> MomentMatrix {
    let columns = shape.columns();
    let rows = (0..=k_max)
        .map(|k| {
            columns
                .iter()
                .map(|&(i, j)| {
                    let w = falling(k, j);
                    if w == 0.into() {
                        Scalar::from_integer(w)
                    } else {
                        Scalar::from_integer(w) * &mu[k + i - j]
                    }
                })
                .collect()
        })
        .collect();
    MomentMatrix {
        shape,
        columns,
        rows,
    }
}

/// Rows for `k = 0..=k_max`.
pub fn build_matrix(
    m: &mut MomentSequence,
    shape: ShapeGrid,
    k_max: usize,
) -> Result<MomentMatrix> {
    let mu = m.prefix(k_max + shape.max_degree + 1)?;
    Ok(build_from(mu, shape, k_max))
}

pub fn determinant(mx: &MomentMatrix) -> Result<Scalar> {
    let cols = mx.columns.len();
    if mx.rows.len() != cols {
        return Err(SteinError::NotSquare {
            rows: mx.rows.len(),
            cols,
        });
    }
    linalg::determinant(&mx.rows)
}

pub fn rank(mx: &MomentMatrix) -> usize {
    linalg::rank(&mx.rows, mx.columns.len())
}

/// Basis of coefficient vectors, in column order; empty iff only the zero
/// operator fits.
pub fn nullspace(mx: &MomentMatrix) -> Vec<Vec<Scalar>> {
    linalg::nullspace(&mx.rows, mx.columns.len())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanCell {
    pub order: usize,
    pub degree: usize,
    pub unknowns: usize,
    pub rows: usize,
    pub rank: usize,
    pub nullity: usize,
    /// Only for square systems.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub determinant: Option<String>,
    /// Nonempty nullspace and no smaller shape (componentwise) has one.
    pub minimal: bool,
    /// A nullspace operator, for minimal cells.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub k_max: usize,
    pub cells: Vec<ScanCell>,
}

impl ScanReport {
    pub fn cell(&self, order: usize, degree: usize) -> Option<&ScanCell> {
        self.cells
            .iter()
            .find(|c| c.order == order && c.degree == degree)
    }

    pub fn minimal(&self) -> impl Iterator<Item = &ScanCell> {
        self.cells.iter().filter(|c| c.minimal)
    }
}

/// Rows used by a scan when none are given: four more than the largest
/// shape's unknowns.
pub fn default_scan_k(max_order: usize, max_degree: usize) -> usize {
    ShapeGrid::new(max_order, max_degree).unknowns() + 3
}

/// Every shape `(o, d)` with `o <= max_order`, `d <= max_degree`, each tested on
/// rows `k = 0..=k_max`.
pub fn minimality_scan(
    m: &mut MomentSequence,
    max_order: usize,
    max_degree: usize,
    k_max: usize,
    exec: Exec,
) -> Result<ScanReport> {
    let biggest = ShapeGrid::new(max_order, max_degree);
    if k_max + 1 < biggest.unknowns() {
        return Err(SteinError::Domain(format!(
            "{} rows cannot decide {} unknowns",
            k_max + 1,
            biggest.unknowns()
        )));
    }
    let mu = m.prefix(k_max + max_degree + 1)?.to_vec();
    let shapes: Vec<ShapeGrid> = (0..=max_order)
        .flat_map(|o| (0..=max_degree).map(move |d| ShapeGrid::new(o, d)))
        .collect();
    let mut cells = exec.map(&shapes, |&shape| {
        let mx = build_from(&mu, shape, k_max);
        let basis = nullspace(&mx);
        let unknowns = shape.unknowns();
        let determinant = determinant(&mx).ok().map(|d| crate::scalar::fmt(&d));
        ScanCell {
            order: shape.max_order,
            degree: shape.max_degree,
            unknowns,
            rows: mx.rows.len(),
            rank: unknowns - basis.len(),
            nullity: basis.len(),
            determinant,
            minimal: false,
            witness: basis.first().map(|v| shape.operator_of(v).to_text()),
        }
    });
    let found: Vec<(usize, usize)> = cells
        .iter()
        .filter(|c| c.nullity > 0)
        .map(|c| (c.order, c.degree))
        .collect();
    for c in cells.iter_mut() {
        c.minimal = c.nullity > 0
            && !found
                .iter()
                .any(|&(o, d)| (o, d) != (c.order, c.degree) && o <= c.order && d <= c.degree);
        if !c.minimal {
            c.witness = None;
        }
    }
    Ok(ScanReport { k_max, cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::{for_spec, normal_moments, product_moments};
    use crate::scalar::int;
    use crate::steinops::{equal_means_operator, product_normals, DistributionSpec};

    fn sq11() -> MomentSequence {
        for_spec(&DistributionSpec::product_normal(int(1), int(1))).unwrap()
    }

    fn ints(v: &[i64]) -> Vec<Scalar> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn displayed_rows() {
        let shape = ShapeGrid::new(2, 1);
        assert_eq!(
            shape.columns(),
            vec![(1, 2), (0, 2), (1, 1), (0, 1), (1, 0), (0, 0)]
        );
        let mx = build_matrix(&mut sq11(), shape, 5).unwrap();
        assert_eq!(mx.rows.len(), 6);
        assert_eq!(mx.rows[0], ints(&[0, 0, 0, 0, 1, 1]));
        assert_eq!(mx.rows[2], ints(&[2, 2, 8, 2, 16, 4]));
        assert_eq!(mx.rows[4], ints(&[192, 48, 400, 64, 676, 100]));
        assert_eq!(determinant(&mx).unwrap(), int(276480));
        assert!(nullspace(&mx).is_empty());
        // with 48 in place of 4 E Z^3 = 64 the determinant is 783360
        let mut misprint = mx.rows.clone();
        misprint[4][3] = int(48);
        assert_eq!(linalg::determinant(&misprint).unwrap(), int(783360));
    }

    #[test]
    fn second_determinant() {
        let mut m = product_moments(
            normal_moments(&int(1), &int(1)).unwrap(),
            normal_moments(&int(2), &int(1)).unwrap(),
        );
        let mx = build_matrix(&mut m, ShapeGrid::new(3, 1), 7).unwrap();
        // sympy over the same moments gives 10158317568000 as well
        assert_eq!(determinant(&mx).unwrap(), int(10158317568000));
    }

    #[test]
    fn known_operators_in_kernel() {
        for mu in [0, 1, 2] {
            let shape = ShapeGrid::new(3, 1);
            let mut m = for_spec(&DistributionSpec::product_normal(int(mu), int(mu))).unwrap();
            let mx = build_matrix(&mut m, shape, 8).unwrap();
            let basis = nullspace(&mx);
            let e = equal_means_operator(&int(mu));
            let v = linalg::primitive(shape.vector_of(&e).unwrap());
            if mu == 0 {
                // the order-2 operator and its multiples by D, M fit as well
                assert!(basis.len() > 1);
            } else {
                assert_eq!(basis, vec![v]);
            }
        }
        let shape = ShapeGrid::new(4, 1);
        let mut m = for_spec(&DistributionSpec::product_normal(int(1), int(2))).unwrap();
        let mx = build_matrix(&mut m, shape, 9).unwrap();
        let u = product_normals(&int(1), &int(2), &int(1), &int(1)).unwrap();
        let v = shape.vector_of(&u).unwrap();
        for row in &mx.rows {
            let dot: Scalar = row.iter().zip(&v).map(|(a, b)| a * b).sum();
            assert_eq!(dot, int(0));
        }
        assert!(!nullspace(&mx).is_empty());
    }

    #[test]
    fn scans() {
        let r = minimality_scan(&mut sq11(), 3, 2, default_scan_k(3, 2), Exec::default()).unwrap();
        let firsts: Vec<(usize, usize)> = r.minimal().map(|c| (c.order, c.degree)).collect();
        assert_eq!(firsts, vec![(3, 1)]);
        let centered = &mut for_spec(&DistributionSpec::product_normal(int(0), int(0))).unwrap();
        let r = minimality_scan(centered, 3, 2, default_scan_k(3, 2), Exec::Sequential).unwrap();
        let firsts: Vec<(usize, usize)> = r.minimal().map(|c| (c.order, c.degree)).collect();
        assert_eq!(firsts, vec![(2, 1)]);
        assert_eq!(
            r.cell(2, 1).unwrap().witness.as_deref(),
            Some("M D^2 - M + D")
        );

        let r = minimality_scan(&mut sq11(), 0, 0, 0, Exec::default()).unwrap();
        assert_eq!(r.cells.len(), 1);
        assert_eq!(r.cells[0].nullity, 0);
        assert!(minimality_scan(&mut sq11(), 2, 1, 3, Exec::default()).is_err());
    }

    #[test]
    fn point_mass_zero() {
        let mut m = MomentSequence::point_mass(int(0));
        let mx = build_matrix(&mut m, ShapeGrid::new(2, 1), 5).unwrap();
        assert!(rank(&mx) < 6);
        // a_00 and a_10 hit only mu_0 and mu_1
        assert_eq!(mx.rows[0], ints(&[0, 0, 0, 0, 0, 1]));
    }
}
