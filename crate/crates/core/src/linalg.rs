//! Exact linear algebra over the scalar field: Gaussian elimination for
//! inverses, span membership, and rank. Used by the scalar-matrix fast path
//! and the bounded image-membership solver.

use crate::algebra::{Element, Monomial};
use crate::scalar::{FieldMode, Scalar};
use std::collections::BTreeMap;

/// Inverts an n x n row-major matrix over the field; `None` when singular.
pub fn invert_matrix(n: usize, entries: &[Scalar], field: FieldMode) -> Option<Vec<Scalar>> {
    assert_eq!(entries.len(), n * n);
    let mut a: Vec<Vec<Scalar>> = (0..n)
        .map(|i| entries[i * n..(i + 1) * n].to_vec())
        .collect();
    let mut inv: Vec<Vec<Scalar>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { field.one() } else { field.zero() })
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let scale = a[col][col].inverse().expect("pivot is nonzero");
        for j in 0..n {
            a[col][j] = a[col][j].mul_ref(&scale);
            inv[col][j] = inv[col][j].mul_ref(&scale);
        }
        let (pivot_a, pivot_inv) = (a[col].clone(), inv[col].clone());
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for j in 0..n {
                a[r][j] = a[r][j].sub_ref(&factor.mul_ref(&pivot_a[j]));
                inv[r][j] = inv[r][j].sub_ref(&factor.mul_ref(&pivot_inv[j]));
            }
        }
    }
    Some(inv.into_iter().flatten().collect())
}

/// Solves sum_i x_i * basis_i = target exactly; returns the coefficients or
/// `None` when the target is outside the span.
pub fn solve_in_span(basis: &[Element], target: &Element) -> Option<Vec<Scalar>> {
    SpanSolver::new(basis).solve(target)
}

/// Triangular span solver reusable across many targets: elements are kept in
/// echelon form keyed by their leading monomial, each remembering its
/// expression as a combination of the original generators.
pub struct SpanSolver {
    field: FieldMode,
    generators: usize,
    echelon: BTreeMap<Monomial, (Element, Vec<Scalar>)>,
}

impl SpanSolver {
    pub fn new(generators: &[Element]) -> SpanSolver {
        let field = generators
            .iter()
            .find_map(|g| g.mode())
            .unwrap_or(FieldMode::Rational);
        let mut solver = SpanSolver {
            field,
            generators: generators.len(),
            echelon: BTreeMap::new(),
        };
        for (i, g) in generators.iter().enumerate() {
            let mut combo = vec![field.zero(); generators.len()];
            combo[i] = field.one();
            solver.insert(g.clone(), combo);
        }
        solver
    }

    fn insert(&mut self, el: Element, combo: Vec<Scalar>) {
        let (residue, residue_combo) = self.reduce_inner(el, combo);
        if residue.is_zero() {
            return; // dependent on earlier generators
        }
        let (lead, lead_coeff) = {
            let (m, c) = residue.terms().next().expect("residue is nonzero");
            (m.clone(), c.clone())
        };
        let scale = lead_coeff.inverse().expect("leading coefficient nonzero");
        let normalized = residue.scale(&scale);
        let combo = residue_combo.iter().map(|c| c.mul_ref(&scale)).collect();
        self.echelon.insert(lead, (normalized, combo));
    }

    /// Cancels leading monomials until none matches an echelon lead,
    /// maintaining el_out = el_in + combo_delta . generators.
    fn reduce_inner(&self, mut el: Element, mut combo: Vec<Scalar>) -> (Element, Vec<Scalar>) {
        loop {
            let lead_opt = el.terms().next().map(|(m, _)| m.clone());
            let lead = match lead_opt {
                None => return (el, combo),
                Some(m) => m,
            };
            let Some((pivot, pivot_combo)) = self.echelon.get(&lead) else {
                return (el, combo);
            };
            let coeff = el.coefficient(&lead).expect("lead present").clone();
            el = el
                .sub(&pivot.scale(&coeff))
                .expect("same graph by construction");
            for (c, p) in combo.iter_mut().zip(pivot_combo) {
                *c = c.sub_ref(&p.mul_ref(&coeff));
            }
        }
    }

    /// Expresses the target in the generators, or `None` if outside the span.
    /// A residue whose leading monomial is not an echelon lead can never
    /// cancel against the span, so this triangular reduction is complete as
    /// well as sound. The loop keeps residue = target + combo . generators,
    /// so a zero residue gives target = (-combo) . generators.
    pub fn solve(&self, target: &Element) -> Option<Vec<Scalar>> {
        let start = vec![self.field.zero(); self.generators];
        let (residue, combo) = self.reduce_inner(target.clone(), start);
        if residue.is_zero() {
            Some(combo.iter().map(|c| c.neg_ref()).collect())
        } else {
            None
        }
    }

    pub fn rank(&self) -> usize {
        self.echelon.len()
    }
}

/// Rank of the coefficient matrix of a family of elements.
pub fn rank_of_elements(elements: &[Element]) -> usize {
    SpanSolver::new(elements).rank()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Element;
    use crate::graph::Graph;
    use crate::parse::parse_element;

    const Q: FieldMode = FieldMode::Rational;

    #[test]
    fn invert_small_rational_matrices() {
        let id = invert_matrix(2, &[Q.int(1), Q.int(0), Q.int(0), Q.int(1)], Q).unwrap();
        assert_eq!(id, vec![Q.int(1), Q.int(0), Q.int(0), Q.int(1)]);

        let m = [Q.int(2), Q.int(1), Q.int(1), Q.int(1)];
        let inv = invert_matrix(2, &m, Q).unwrap();
        assert_eq!(inv, vec![Q.int(1), Q.int(-1), Q.int(-1), Q.int(2)]);

        assert!(invert_matrix(2, &[Q.int(1), Q.int(1), Q.int(1), Q.int(1)], Q).is_none());
    }

    #[test]
    fn span_solving() {
        let g = Graph::rose(2).unwrap();
        let b1 = parse_element("e1*e1'", &g, Q).unwrap();
        let b2 = parse_element("e2*e2'", &g, Q).unwrap();
        let t = parse_element("2*e1*e1' - e2*e2'", &g, Q).unwrap();
        let x = solve_in_span(&[b1.clone(), b2.clone()], &t).unwrap();
        assert_eq!(x, vec![Q.int(2), Q.int(-1)]);
        let outside = parse_element("e1", &g, Q).unwrap();
        assert!(solve_in_span(&[b1.clone(), b2.clone()], &outside).is_none());
        assert_eq!(rank_of_elements(&[b1.clone(), b2.clone()]), 2);
        assert_eq!(rank_of_elements(&[b1.clone(), b1]), 1);
        assert_eq!(rank_of_elements(&[Element::zero(&g)]), 0);
    }
}
