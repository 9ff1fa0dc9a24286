//! Square matrices over a corner wL_K(E)w, verified invertible pairs, and
//! matrices over the scalar field with exact Gaussian inversion.
//!
//! There is no general inversion over the noncommutative algebra: callers
//! supply the inverse and the library verifies both products against w*I_n.

use crate::algebra::Element;
use crate::error::{LpaError, Result};
use crate::graph::{Graph, VertexId};
use crate::linalg;
use crate::morphism::Endo;
use crate::scalar::{FieldMode, Scalar};
use std::fmt;
use std::sync::Arc;

/// An n x n matrix with entries in the corner wL_K(E)w.
#[derive(Clone, PartialEq, Eq)]
pub struct AlgMatrix {
    graph: Arc<Graph>,
    corner: VertexId,
    n: usize,
    entries: Vec<Element>, // row-major
}

impl AlgMatrix {
    pub fn new(
        graph: &Arc<Graph>,
        corner: VertexId,
        n: usize,
        entries: Vec<Element>,
    ) -> Result<AlgMatrix> {
        assert_eq!(entries.len(), n * n, "entry count must be n^2");
        for (k, e) in entries.iter().enumerate() {
            if !e.in_corner(corner, corner) {
                return Err(LpaError::EntryOutsideCorner {
                    row: k / n + 1,
                    col: k % n + 1,
                    corner: graph.vertex_name(corner).to_string(),
                });
            }
        }
        Ok(AlgMatrix {
            graph: graph.clone(),
            corner,
            n,
            entries,
        })
    }

    /// w * I_n.
    pub fn identity(graph: &Arc<Graph>, corner: VertexId, n: usize, field: FieldMode) -> AlgMatrix {
        let w = Element::vertex(graph, corner, field);
        let zero = Element::zero(graph);
        let entries = (0..n * n)
            .map(|k| if k / n == k % n { w.clone() } else { zero.clone() })
            .collect();
        AlgMatrix {
            graph: graph.clone(),
            corner,
            n,
            entries,
        }
    }

    /// Lifts a matrix over the field to entries k * w.
    pub fn from_scalar(graph: &Arc<Graph>, corner: VertexId, km: &KMatrix) -> AlgMatrix {
        let entries = km
            .entries
            .iter()
            .map(|k| {
                let field = k.mode();
                Element::vertex(graph, corner, field).scale(k)
            })
            .collect();
        AlgMatrix {
            graph: graph.clone(),
            corner,
            n: km.n,
            entries,
        }
    }

    /// Extracts a field matrix when every entry is a multiple of the corner
    /// vertex.
    pub fn to_scalar(&self, field: FieldMode) -> Option<KMatrix> {
        let mut out = Vec::with_capacity(self.n * self.n);
        for e in &self.entries {
            if e.is_zero() {
                out.push(field.zero());
                continue;
            }
            if e.term_count() != 1 {
                return None;
            }
            let (m, c) = e.terms().next().unwrap();
            if m.p.is_empty() && m.q.is_empty() && m.p.base == self.corner {
                out.push(c.clone());
            } else {
                return None;
            }
        }
        Some(KMatrix {
            n: self.n,
            entries: out,
        })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn corner(&self) -> VertexId {
        self.corner
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    /// 0-based access.
    pub fn entry(&self, i: usize, j: usize) -> &Element {
        &self.entries[i * self.n + j]
    }

    pub fn set_entry(&mut self, i: usize, j: usize, e: Element) {
        self.entries[i * self.n + j] = e;
    }

    pub fn mat_mul(&self, other: &AlgMatrix) -> Result<AlgMatrix> {
        if self.n != other.n {
            return Err(LpaError::SizeMismatch(self.n, other.n));
        }
        if self.corner != other.corner {
            return Err(LpaError::CornerMismatch);
        }
        let mut entries = Vec::with_capacity(self.n * self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                let mut acc = Element::zero(&self.graph);
                for k in 0..self.n {
                    acc = acc.add(&self.entry(i, k).mul(other.entry(k, j))?)?;
                }
                entries.push(acc);
            }
        }
        Ok(AlgMatrix {
            graph: self.graph.clone(),
            corner: self.corner,
            n: self.n,
            entries,
        })
    }

    /// Entrywise image f(A) = (f(a_ij)).
    pub fn apply_entrywise(&self, f: &Endo) -> Result<AlgMatrix> {
        let entries = self
            .entries
            .iter()
            .map(|e| f.apply(e))
            .collect::<Result<Vec<_>>>()?;
        AlgMatrix::new(&self.graph, self.corner, self.n, entries)
    }

    /// True when every entry is homogeneous of degree 0 (or zero).
    pub fn is_degree_zero(&self) -> bool {
        self.entries
            .iter()
            .all(|e| e.is_zero() || e.homogeneous_degree() == Some(0))
    }

    fn diff_from_identity(&self, field: FieldMode) -> Option<(usize, usize)> {
        let id = AlgMatrix::identity(&self.graph, self.corner, self.n, field);
        for i in 0..self.n {
            for j in 0..self.n {
                if self.entry(i, j) != id.entry(i, j) {
                    return Some((i, j));
                }
            }
        }
        None
    }
}

impl fmt::Display for AlgMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.n {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.n {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.entry(i, j))?;
            }
        }
        write!(f, "]")
    }
}

impl fmt::Debug for AlgMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AlgMatrix({self})")
    }
}

/// A matrix bundled with a two-sided inverse, verified exactly at
/// construction.
#[derive(Clone, PartialEq, Eq)]
pub struct InvertiblePair {
    mat: AlgMatrix,
    inv: AlgMatrix,
    degree_zero: bool,
}

impl InvertiblePair {
    pub fn new(mat: AlgMatrix, inv: AlgMatrix) -> Result<InvertiblePair> {
        if mat.n != inv.n {
            return Err(LpaError::SizeMismatch(mat.n, inv.n));
        }
        if mat.corner != inv.corner {
            return Err(LpaError::CornerMismatch);
        }
        let field = mat
            .entries
            .iter()
            .chain(&inv.entries)
            .find_map(|e| e.mode())
            .unwrap_or(FieldMode::Rational);
        if let Some((i, j)) = mat.mat_mul(&inv)?.diff_from_identity(field) {
            return Err(LpaError::NotInverse {
                side: "right",
                row: i + 1,
                col: j + 1,
                entry: mat.mat_mul(&inv)?.entry(i, j).to_string(),
            });
        }
        if let Some((i, j)) = inv.mat_mul(&mat)?.diff_from_identity(field) {
            return Err(LpaError::NotInverse {
                side: "left",
                row: i + 1,
                col: j + 1,
                entry: inv.mat_mul(&mat)?.entry(i, j).to_string(),
            });
        }
        let degree_zero = mat.is_degree_zero() && inv.is_degree_zero();
        Ok(InvertiblePair {
            mat,
            inv,
            degree_zero,
        })
    }

    /// Fast path for matrices over the field: the inverse comes from exact
    /// Gaussian elimination and is then lifted to the corner.
    pub fn from_scalar_matrix(
        graph: &Arc<Graph>,
        corner: VertexId,
        km: &KMatrix,
        field: FieldMode,
    ) -> Result<InvertiblePair> {
        let inv = km.invert(field)?;
        let mat = AlgMatrix::from_scalar(graph, corner, km);
        let inv = AlgMatrix::from_scalar(graph, corner, &inv);
        InvertiblePair::new(mat, inv)
    }

    pub fn swapped(&self) -> InvertiblePair {
        InvertiblePair {
            mat: self.inv.clone(),
            inv: self.mat.clone(),
            degree_zero: self.degree_zero,
        }
    }

    pub fn mat(&self) -> &AlgMatrix {
        &self.mat
    }

    pub fn inv(&self) -> &AlgMatrix {
        &self.inv
    }

    pub fn size(&self) -> usize {
        self.mat.n
    }

    pub fn corner(&self) -> VertexId {
        self.mat.corner
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.mat.graph
    }

    /// Entries of P and P^-1 all homogeneous of degree 0: the pair lies in
    /// GL_n(wL_K(E)_0 w) and the induced endomorphism is graded.
    pub fn is_degree_zero(&self) -> bool {
        self.degree_zero
    }
}

impl fmt::Debug for InvertiblePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "InvertiblePair({}, {})", self.mat, self.inv)
    }
}

/// P_m = P * phi(P) * ... * phi^{m-1}(P), accumulated left to right.
pub fn iterate_pm(phi: &Endo, p: &AlgMatrix, m: usize) -> Result<AlgMatrix> {
    assert!(m >= 1, "iterate_pm needs m >= 1");
    let mut acc = p.clone();
    let mut cur = p.clone();
    for _ in 1..m {
        cur = cur.apply_entrywise(phi)?;
        acc = acc.mat_mul(&cur)?;
    }
    Ok(acc)
}

/// The monoid product P * Q := P phi_P(Q), with inverse phi_P(Q^-1) P^-1.
pub fn star_product(
    p: &InvertiblePair,
    q: &InvertiblePair,
    phi_p: &Endo,
) -> Result<InvertiblePair> {
    let mat = p.mat().mat_mul(&q.mat().apply_entrywise(phi_p)?)?;
    let inv = q.inv().apply_entrywise(phi_p)?.mat_mul(p.inv())?;
    InvertiblePair::new(mat, inv)
}

/// An n x n matrix over the scalar field.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct KMatrix {
    n: usize,
    entries: Vec<Scalar>, // row-major
}

impl KMatrix {
    pub fn new(n: usize, entries: Vec<Scalar>) -> KMatrix {
        assert_eq!(entries.len(), n * n);
        KMatrix { n, entries }
    }

    pub fn identity(n: usize, field: FieldMode) -> KMatrix {
        let entries = (0..n * n)
            .map(|k| if k / n == k % n { field.one() } else { field.zero() })
            .collect();
        KMatrix { n, entries }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> &Scalar {
        &self.entries[i * self.n + j]
    }

    pub fn set_entry(&mut self, i: usize, j: usize, s: Scalar) {
        self.entries[i * self.n + j] = s;
    }

    pub fn mul(&self, other: &KMatrix) -> Result<KMatrix> {
        if self.n != other.n {
            return Err(LpaError::SizeMismatch(self.n, other.n));
        }
        let field = self.entries[0].mode();
        let mut entries = vec![field.zero(); self.n * self.n];
        for i in 0..self.n {
            for j in 0..self.n {
                let mut acc = field.zero();
                for k in 0..self.n {
                    acc = acc.add_ref(&self.entry(i, k).mul_ref(other.entry(k, j)));
                }
                entries[i * self.n + j] = acc;
            }
        }
        Ok(KMatrix {
            n: self.n,
            entries,
        })
    }

    pub fn invert(&self, field: FieldMode) -> Result<KMatrix> {
        let inv = linalg::invert_matrix(self.n, &self.entries, field).ok_or(LpaError::Singular)?;
        Ok(KMatrix {
            n: self.n,
            entries: inv,
        })
    }

    pub fn is_identity(&self) -> bool {
        (0..self.n).all(|i| {
            (0..self.n).all(|j| {
                let e = self.entry(i, j);
                if i == j {
                    e.is_one()
                } else {
                    e.is_zero()
                }
            })
        })
    }
}

impl fmt::Display for KMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.n {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.n {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.entry(i, j))?;
            }
        }
        write!(f, "]")
    }
}
