//! Elements of L_K(E) in canonical normal form.
//!
//! An element is a finite scalar combination of monomials p*q' with
//! r(p) = r(q). The normal form forbids the junction pair (f, f) where f is
//! the special edge of its source: such a pair rewrites through the relation
//! v = sum_{e in s^-1(v)} e*e'. Each monomial has at most one redex (at the
//! p/q junction), and one rewrite step strictly shortens the reducible part,
//! so reduction terminates and the result is independent of processing order.

use crate::error::{LpaError, Result};
use crate::graph::{EdgeId, Graph, Path, VertexId, VertexKind};
use crate::scalar::{FieldMode, Scalar};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// A path stripped of its graph handle; the base vertex disambiguates empty
/// words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word {
    pub base: VertexId,
    pub edges: Vec<EdgeId>,
}

impl Word {
    pub fn of_path(p: &Path) -> Word {
        Word {
            base: p.source(),
            edges: p.edges().to_vec(),
        }
    }

    pub fn to_path(&self, graph: &Arc<Graph>) -> Path {
        if self.edges.is_empty() {
            Path::vertex(graph, self.base)
        } else {
            Path::from_edges(graph, self.edges.clone()).expect("stored word is composable")
        }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    fn range(&self, graph: &Graph) -> VertexId {
        match self.edges.last() {
            Some(&e) => graph.range(e),
            None => self.base,
        }
    }
}

/// A normal-form monomial p*q' (the element p q^* of the algebra).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial {
    pub p: Word,
    pub q: Word,
}

impl Monomial {
    pub fn degree(&self) -> i64 {
        self.p.len() as i64 - self.q.len() as i64
    }

    fn vertex(v: VertexId) -> Monomial {
        Monomial {
            p: Word {
                base: v,
                edges: Vec::new(),
            },
            q: Word {
                base: v,
                edges: Vec::new(),
            },
        }
    }
}

// Fixed total order: degree, |p|, lex on p's edges, lex on q's edges, then
// base vertices to break ties between distinct length-0 words.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.p.len().cmp(&other.p.len()))
            .then_with(|| self.p.edges.cmp(&other.p.edges))
            .then_with(|| self.q.edges.cmp(&other.q.edges))
            .then_with(|| self.p.base.cmp(&other.p.base))
            .then_with(|| self.q.base.cmp(&other.q.base))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A canonical element of L_K(E): a map from normal-form monomials to nonzero
/// scalars. Equality of elements is equality of these maps.
#[derive(Clone)]
pub struct Element {
    graph: Arc<Graph>,
    terms: BTreeMap<Monomial, Scalar>,
}

impl PartialEq for Element {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms && same_graph(&self.graph, &other.graph)
    }
}
impl Eq for Element {}

pub(crate) fn same_graph(a: &Arc<Graph>, b: &Arc<Graph>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl Element {
    pub fn zero(graph: &Arc<Graph>) -> Element {
        Element {
            graph: graph.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn vertex(graph: &Arc<Graph>, v: VertexId, field: FieldMode) -> Element {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::vertex(v), field.one());
        Element {
            graph: graph.clone(),
            terms,
        }
    }

    pub fn edge(graph: &Arc<Graph>, e: EdgeId, field: FieldMode) -> Element {
        Element::monomial(
            &Path::single(graph, e),
            &Path::vertex(graph, graph.range(e)),
            field.one(),
        )
        .expect("edge monomial is well-formed")
    }

    pub fn ghost(graph: &Arc<Graph>, e: EdgeId, field: FieldMode) -> Element {
        Element::monomial(
            &Path::vertex(graph, graph.range(e)),
            &Path::single(graph, e),
            field.one(),
        )
        .expect("ghost monomial is well-formed")
    }

    /// The multiplicative identity: the sum of all vertices.
    pub fn identity(graph: &Arc<Graph>, field: FieldMode) -> Element {
        let mut terms = BTreeMap::new();
        for v in graph.vertex_ids() {
            terms.insert(Monomial::vertex(v), field.one());
        }
        Element {
            graph: graph.clone(),
            terms,
        }
    }

    /// A single monomial c * p q^*; normalizes.
    pub fn monomial(p: &Path, q: &Path, coeff: Scalar) -> Result<Element> {
        Element::from_raw(
            p.graph(),
            vec![(Word::of_path(p), Word::of_path(q), coeff)],
        )
    }

    /// The real path p as an element (q empty).
    pub fn path(p: &Path, field: FieldMode) -> Element {
        Element::monomial(p, &Path::vertex(p.graph(), p.range()), field.one())
            .expect("r(p) = r(p)")
    }

    /// Normalizes a formal scalar-weighted list of (p, q) pairs.
    pub fn from_raw(
        graph: &Arc<Graph>,
        raw: Vec<(Word, Word, Scalar)>,
    ) -> Result<Element> {
        let mut terms = BTreeMap::new();
        for (p, q, coeff) in raw {
            if p.range(graph) != q.range(graph) {
                return Err(LpaError::RangeMismatch {
                    p_range: graph.vertex_name(p.range(graph)).to_string(),
                    q_range: graph.vertex_name(q.range(graph)).to_string(),
                });
            }
            if !coeff.is_zero() {
                reduce_into(graph, p, q, coeff, &mut terms);
            }
        }
        Ok(Element {
            graph: graph.clone(),
            terms,
        })
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Option<&Scalar> {
        self.terms.get(m)
    }

    /// The session field mode, readable off any nonzero coefficient.
    pub fn mode(&self) -> Option<FieldMode> {
        self.terms.values().next().map(|s| s.mode())
    }

    pub fn add(&self, other: &Element) -> Result<Element> {
        self.check_graph(other)?;
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            add_term(&mut terms, m.clone(), c.clone());
        }
        Ok(Element {
            graph: self.graph.clone(),
            terms,
        })
    }

    pub fn sub(&self, other: &Element) -> Result<Element> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Element {
        Element {
            graph: self.graph.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.neg_ref()))
                .collect(),
        }
    }

    pub fn scale(&self, k: &Scalar) -> Element {
        if k.is_zero() {
            return Element::zero(&self.graph);
        }
        Element {
            graph: self.graph.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.mul_ref(k)))
                .collect(),
        }
    }

    /// The product, computed by prefix matching of the ghost part against the
    /// real part and renormalizing:
    /// (p q^*)(r s^*) = p r' s^*  if r = q r',
    ///                = p (s q'')^*  if q = r q'',
    ///                = 0 otherwise.
    pub fn mul(&self, other: &Element) -> Result<Element> {
        self.check_graph(other)?;
        let graph = &self.graph;
        let mut raw = Vec::new();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let q = &a.q;
                let r = &b.p;
                let coeff = ca.mul_ref(cb);
                if q.len() <= r.len() {
                    if q.base == r.base && r.edges.starts_with(&q.edges) {
                        let mut p = a.p.clone();
                        p.edges.extend_from_slice(&r.edges[q.len()..]);
                        raw.push((p, b.q.clone(), coeff));
                    }
                } else if r.base == q.base && q.edges.starts_with(&r.edges) {
                    let mut s = b.q.clone();
                    s.edges.extend_from_slice(&q.edges[r.len()..]);
                    raw.push((a.p.clone(), s, coeff));
                }
            }
        }
        Element::from_raw(graph, raw)
    }

    pub fn pow(&self, k: u32) -> Result<Element> {
        let field = self.mode().unwrap_or(FieldMode::Rational);
        let mut acc = Element::identity(&self.graph, field);
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// The involution: linear, (p q^*)^* = q p^*.
    pub fn star(&self) -> Element {
        Element {
            graph: self.graph.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    (
                        Monomial {
                            p: m.q.clone(),
                            q: m.p.clone(),
                        },
                        c.clone(),
                    )
                })
                .collect(),
        }
    }

    /// Splits into homogeneous components by degree |p| - |q|.
    pub fn graded_parts(&self) -> BTreeMap<i64, Element> {
        let mut parts: BTreeMap<i64, Element> = BTreeMap::new();
        for (m, c) in &self.terms {
            parts
                .entry(m.degree())
                .or_insert_with(|| Element::zero(&self.graph))
                .terms
                .insert(m.clone(), c.clone());
        }
        parts
    }

    /// `Some(d)` when nonzero and concentrated in a single degree.
    pub fn homogeneous_degree(&self) -> Option<i64> {
        let mut it = self.terms.keys().map(|m| m.degree());
        let d = it.next()?;
        it.all(|e| e == d).then_some(d)
    }

    /// True iff w1 * a * w2 = a, i.e. every monomial has s(p) = w1, s(q) = w2.
    pub fn in_corner(&self, w1: VertexId, w2: VertexId) -> bool {
        self.terms
            .keys()
            .all(|m| m.p.base == w1 && m.q.base == w2)
    }

    /// Membership in the subalgebra A_{R_n}(e_1, e_2) of the rose graph,
    /// n >= 2: the span of the basis monomials p q^* with p over the petals
    /// {1, 3, ..., n} and q over {2, 3, ..., n} (either side may be empty).
    ///
    /// When every canonical monomial already has that shape the answer is yes.
    /// For n >= 3 some basis monomials are not normal forms (both sides ending
    /// in the special petal e_n), so a shape mismatch falls back to an exact
    /// linear solve against the normalized basis monomials of bounded length.
    pub fn in_a_subalgebra(&self) -> Result<bool> {
        let n = self.graph.require_rose(2)?;
        let a_shaped = |m: &Monomial| {
            m.p.edges.iter().all(|e| e.0 != 1) && m.q.edges.iter().all(|e| e.0 != 0)
        };
        if self.terms.keys().all(a_shaped) {
            return Ok(true);
        }
        if n == 2 {
            // every A-basis monomial is already a normal form for n = 2
            return Ok(false);
        }
        let field = match self.mode() {
            Some(f) => f,
            None => return Ok(true),
        };
        let max_sum = self
            .terms
            .keys()
            .map(|m| m.p.len() + m.q.len())
            .max()
            .unwrap_or(0);
        let mut basis = Vec::new();
        let p_alphabet: Vec<EdgeId> = (0..n as u32).filter(|&i| i != 1).map(EdgeId).collect();
        let q_alphabet: Vec<EdgeId> = (1..n as u32).map(EdgeId).collect();
        let v = VertexId(0);
        for lp in 0..=max_sum {
            for lq in 0..=max_sum.saturating_sub(lp) {
                for pw in enumerate_words(&p_alphabet, lp) {
                    for qw in enumerate_words(&q_alphabet, lq) {
                        basis.push(Element::from_raw(
                            &self.graph,
                            vec![(
                                Word { base: v, edges: pw.clone() },
                                Word { base: v, edges: qw },
                                field.one(),
                            )],
                        )?);
                    }
                }
            }
        }
        Ok(crate::linalg::solve_in_span(&basis, self).is_some())
    }

    fn check_graph(&self, other: &Element) -> Result<()> {
        if same_graph(&self.graph, &other.graph) {
            Ok(())
        } else {
            Err(LpaError::GraphMismatch)
        }
    }
}

fn enumerate_words(alphabet: &[EdgeId], len: usize) -> Vec<Vec<EdgeId>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::with_capacity(out.len() * alphabet.len());
        for w in &out {
            for &e in alphabet {
                let mut w2 = w.clone();
                w2.push(e);
                next.push(w2);
            }
        }
        out = next;
    }
    out
}

fn add_term(terms: &mut BTreeMap<Monomial, Scalar>, m: Monomial, c: Scalar) {
    use std::collections::btree_map::Entry;
    match terms.entry(m) {
        Entry::Vacant(slot) => {
            if !c.is_zero() {
                slot.insert(c);
            }
        }
        Entry::Occupied(mut slot) => {
            let sum = slot.get().add_ref(&c);
            if sum.is_zero() {
                slot.remove();
            } else {
                *slot.get_mut() = sum;
            }
        }
    }
}

/// Rewrites the junction redex of (p, q) until none remains and accumulates
/// the normal terms. With f the special edge of the regular vertex v = s(f):
/// p'f (q'f)^* = p' q'^* - sum_{e in s^-1(v), e != f} (p'e)(q'e)^*.
/// The sibling terms (p'e)(q'e)^* end in a non-special junction and are
/// normal; only the shortened pair (p', q') needs re-checking.
fn reduce_into(
    graph: &Arc<Graph>,
    mut p: Word,
    mut q: Word,
    coeff: Scalar,
    terms: &mut BTreeMap<Monomial, Scalar>,
) {
    loop {
        let junction = match (p.edges.last(), q.edges.last()) {
            (Some(&pe), Some(&qe)) if pe == qe => pe,
            _ => break,
        };
        let v = graph.source(junction);
        if graph.classify_vertex(v) != VertexKind::Regular
            || graph.special_edge(v) != Some(junction)
        {
            break;
        }
        p.edges.pop();
        q.edges.pop();
        for &e in graph.outgoing(v) {
            if e == junction {
                continue;
            }
            let mut p2 = p.clone();
            p2.edges.push(e);
            let mut q2 = q.clone();
            q2.edges.push(e);
            add_term(terms, Monomial { p: p2, q: q2 }, coeff.neg_ref());
        }
    }
    add_term(terms, Monomial { p, q }, coeff);
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let neg = matches!(c, Scalar::Rat(r) if r < &num::BigRational::from_integer(0.into()));
            let mag = if neg { c.neg_ref() } else { c.clone() };
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut factors: Vec<String> = Vec::new();
            if !mag.is_one() {
                factors.push(mag.to_string());
            }
            if m.p.is_empty() && m.q.is_empty() {
                factors.push(self.graph.vertex_name(m.p.base).to_string());
            } else {
                for &e in &m.p.edges {
                    factors.push(self.graph.edge_name(e).to_string());
                }
                for &e in m.q.edges.iter().rev() {
                    factors.push(format!("{}'", self.graph.edge_name(e)));
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Element({self})")
    }
}

/// Checks the Cuntz-Krieger relations (1)-(4) for candidate generator images
/// under an arbitrary product closure. `vertex_of`, `range_of`, `source_of`
/// come from the graph; images are indexed by vertex/edge id.
pub fn verify_ck_relations<M>(
    graph: &Arc<Graph>,
    vertex_images: &[Element],
    edge_images: &[Element],
    ghost_images: &[Element],
    mut mul: M,
) -> Result<()>
where
    M: FnMut(&Element, &Element) -> Result<Element>,
{
    let fail = |relation: &str, detail: String| -> Result<()> {
        Err(LpaError::CkViolation {
            relation: relation.to_string(),
            detail,
        })
    };
    let nv = graph.vertex_count();
    for i in 0..nv {
        for j in 0..nv {
            let prod = mul(&vertex_images[i], &vertex_images[j])?;
            let expect = if i == j {
                vertex_images[j].clone()
            } else {
                Element::zero(graph)
            };
            if prod != expect {
                return fail("(1)", format!("Q_{i} Q_{j}")).map(|_| ());
            }
        }
    }
    for e in graph.edge_ids() {
        let s = graph.source(e).0 as usize;
        let r = graph.range(e).0 as usize;
        let te = &edge_images[e.0 as usize];
        let tg = &ghost_images[e.0 as usize];
        if mul(&vertex_images[s], te)? != *te || mul(te, &vertex_images[r])? != *te {
            return fail("(2)", format!("images of {}", graph.edge_name(e)));
        }
        if mul(tg, &vertex_images[s])? != *tg || mul(&vertex_images[r], tg)? != *tg {
            return fail("(2)", format!("images of {}*", graph.edge_name(e)));
        }
    }
    for e in graph.edge_ids() {
        for f in graph.edge_ids() {
            let prod = mul(&ghost_images[e.0 as usize], &edge_images[f.0 as usize])?;
            let expect = if e == f {
                vertex_images[graph.range(e).0 as usize].clone()
            } else {
                Element::zero(graph)
            };
            if prod != expect {
                return fail(
                    "(3)",
                    format!("{}* {}", graph.edge_name(e), graph.edge_name(f)),
                );
            }
        }
    }
    for v in graph.vertex_ids() {
        if graph.classify_vertex(v) != VertexKind::Regular {
            continue;
        }
        let mut sum = Element::zero(graph);
        for &e in graph.outgoing(v) {
            let ee = mul(&edge_images[e.0 as usize], &ghost_images[e.0 as usize])?;
            sum = sum.add(&ee)?;
        }
        if sum != vertex_images[v.0 as usize] {
            return fail("(4)", format!("vertex {}", graph.vertex_name(v)));
        }
    }
    Ok(())
}
