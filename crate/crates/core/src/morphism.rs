//! Endomorphisms and automorphisms of L_K(E) fixing all vertices.
//!
//! An endomorphism phi_P is built from an invertible matrix P over a corner
//! wL_K(E)w and a frame of n distinct edges from v to w:
//!   phi_P(e_i) = sum_k e_k p_{k,i},   phi_P(e_i*) = sum_k p'_{i,k} e_k*,
//! identity on vertices and on generators off the frame. The candidate images
//! are checked against the Cuntz-Krieger relations rather than trusted; a
//! failed check signals a malformed inverse pair.

use crate::algebra::{verify_ck_relations, Element};
use crate::error::{LpaError, Result};
use crate::graph::{EdgeId, Graph, VertexId};
use crate::matrix::{star_product, AlgMatrix, InvertiblePair};
use crate::scalar::FieldMode;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

/// The edge frame an endomorphism acts through: n distinct edges from v to w.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Frame {
    pub v: VertexId,
    pub w: VertexId,
    pub edges: Vec<EdgeId>,
}

impl Frame {
    pub fn new(graph: &Graph, edges: Vec<EdgeId>) -> Result<Frame> {
        if edges.is_empty() {
            return Err(LpaError::BadFrame("empty edge list".into()));
        }
        let v = graph.source(edges[0]);
        let w = graph.range(edges[0]);
        for (i, &e) in edges.iter().enumerate() {
            if graph.source(e) != v || graph.range(e) != w {
                return Err(LpaError::BadFrame(format!(
                    "edge `{}` does not run from the common source to the common range",
                    graph.edge_name(e)
                )));
            }
            if edges[..i].contains(&e) {
                return Err(LpaError::BadFrame(format!(
                    "edge `{}` listed twice",
                    graph.edge_name(e)
                )));
            }
        }
        Ok(Frame { v, w, edges })
    }

    /// All petals of a rose graph, in order.
    pub fn rose(graph: &Graph) -> Result<Frame> {
        graph.require_rose(1)?;
        Frame::new(graph, graph.edge_ids().collect())
    }

    pub fn size(&self) -> usize {
        self.edges.len()
    }
}

/// Validated images of every generator: the Universal Property input.
#[derive(Clone, PartialEq, Eq)]
pub struct GeneratorImages {
    graph: Arc<Graph>,
    vertices: Vec<Element>,
    edges: Vec<Element>,
    ghosts: Vec<Element>,
}

impl GeneratorImages {
    /// Checks the CK relations for the candidate images under the ordinary
    /// product.
    pub fn validated(
        graph: &Arc<Graph>,
        vertices: Vec<Element>,
        edges: Vec<Element>,
        ghosts: Vec<Element>,
    ) -> Result<GeneratorImages> {
        verify_ck_relations(graph, &vertices, &edges, &ghosts, |a, b| a.mul(b))?;
        Ok(GeneratorImages {
            graph: graph.clone(),
            vertices,
            edges,
            ghosts,
        })
    }

    pub fn vertex(&self, v: VertexId) -> &Element {
        &self.vertices[v.0 as usize]
    }

    pub fn edge(&self, e: EdgeId) -> &Element {
        &self.edges[e.0 as usize]
    }

    pub fn ghost(&self, e: EdgeId) -> &Element {
        &self.ghosts[e.0 as usize]
    }
}

/// An endomorphism of L_K(E) fixing all vertices, with provenance when
/// matrix-built.
pub struct Endo {
    images: GeneratorImages,
    provenance: Option<Provenance>,
    graded: bool,
    field: FieldMode,
    // memoized images of real and ghost path words
    path_cache: Mutex<HashMap<Vec<EdgeId>, Element>>,
    ghost_cache: Mutex<HashMap<Vec<EdgeId>, Element>>,
}

impl Clone for Endo {
    fn clone(&self) -> Self {
        Endo {
            images: self.images.clone(),
            provenance: self.provenance.clone(),
            graded: self.graded,
            field: self.field,
            path_cache: Mutex::new(HashMap::new()),
            ghost_cache: Mutex::new(HashMap::new()),
        }
    }
}

#[derive(Clone)]
pub struct Provenance {
    pub frame: Frame,
    pub pair: InvertiblePair,
}

impl Endo {
    /// The identity endomorphism (matrix-built would be phi_{wI}).
    pub fn identity(graph: &Arc<Graph>, field: FieldMode) -> Endo {
        let vertices = graph
            .vertex_ids()
            .map(|v| Element::vertex(graph, v, field))
            .collect();
        let edges = graph
            .edge_ids()
            .map(|e| Element::edge(graph, e, field))
            .collect();
        let ghosts = graph
            .edge_ids()
            .map(|e| Element::ghost(graph, e, field))
            .collect();
        Endo {
            images: GeneratorImages {
                graph: graph.clone(),
                vertices,
                edges,
                ghosts,
            },
            provenance: None,
            graded: true,
            field,
            path_cache: Mutex::new(HashMap::new()),
            ghost_cache: Mutex::new(HashMap::new()),
        }
    }

    /// Builds phi_P from an invertible pair over the frame's corner.
    pub fn mk_phi(graph: &Arc<Graph>, frame: Frame, pair: InvertiblePair) -> Result<Endo> {
        let n = frame.size();
        if pair.size() != n {
            return Err(LpaError::SizeMismatch(pair.size(), n));
        }
        if pair.corner() != frame.w {
            return Err(LpaError::CornerMismatch);
        }
        let field = pair
            .mat()
            .entry(0, 0)
            .mode()
            .or_else(|| {
                (0..n)
                    .flat_map(|i| (0..n).map(move |j| (i, j)))
                    .find_map(|(i, j)| pair.mat().entry(i, j).mode())
            })
            .unwrap_or(FieldMode::Rational);
        let vertices: Vec<Element> = graph
            .vertex_ids()
            .map(|u| Element::vertex(graph, u, field))
            .collect();
        let mut edges: Vec<Element> = graph
            .edge_ids()
            .map(|e| Element::edge(graph, e, field))
            .collect();
        let mut ghosts: Vec<Element> = graph
            .edge_ids()
            .map(|e| Element::ghost(graph, e, field))
            .collect();
        for (i, &ei) in frame.edges.iter().enumerate() {
            let mut edge_img = Element::zero(graph);
            let mut ghost_img = Element::zero(graph);
            for (k, &ek) in frame.edges.iter().enumerate() {
                edge_img = edge_img.add(
                    &Element::edge(graph, ek, field).mul(pair.mat().entry(k, i))?,
                )?;
                ghost_img = ghost_img.add(
                    &pair
                        .inv()
                        .entry(i, k)
                        .mul(&Element::ghost(graph, ek, field))?,
                )?;
            }
            edges[ei.0 as usize] = edge_img;
            ghosts[ei.0 as usize] = ghost_img;
        }
        let images = GeneratorImages::validated(graph, vertices, edges, ghosts)?;
        let graded = pair.is_degree_zero();
        Ok(Endo {
            images,
            provenance: Some(Provenance { frame, pair }),
            graded,
            field,
            path_cache: Mutex::new(HashMap::new()),
            ghost_cache: Mutex::new(HashMap::new()),
        })
    }

    /// phi_P on the full rose frame.
    pub fn mk_phi_rose(graph: &Arc<Graph>, pair: InvertiblePair) -> Result<Endo> {
        Endo::mk_phi(graph, Frame::rose(graph)?, pair)
    }

    /// The Cuntz endomorphism f_u of a unit u: e_i -> u e_i, e_i* -> e_i* u^-1.
    /// Equals phi_P with P = (e_i* u e_j).
    pub fn mk_fu(u: &Element, uinv: &Element) -> Result<Endo> {
        let graph = u.graph().clone();
        graph.require_rose(1)?;
        let field = u.mode().unwrap_or(FieldMode::Rational);
        let one = Element::identity(&graph, field);
        if u.mul(uinv)? != one || uinv.mul(u)? != one {
            return Err(LpaError::NotAUnit(u.to_string()));
        }
        let p = matrix_iso(u)?;
        let pinv = matrix_iso(uinv)?;
        let pair = InvertiblePair::new(p, pinv)?;
        let endo = Endo::mk_phi_rose(&graph, pair)?;
        debug_assert!(graph.edge_ids().all(|e| {
            endo.images.edge(e) == &u.mul(&Element::edge(&graph, e, field)).unwrap()
        }));
        Ok(endo)
    }

    /// The inner automorphism a -> u^-1 a u, realized as f_x with
    /// x = u^-1 (sum_i e_i u e_i*).
    pub fn inner(u: &Element, uinv: &Element) -> Result<Endo> {
        let graph = u.graph().clone();
        graph.require_rose(1)?;
        let field = u.mode().unwrap_or(FieldMode::Rational);
        let one = Element::identity(&graph, field);
        if u.mul(uinv)? != one || uinv.mul(u)? != one {
            return Err(LpaError::NotAUnit(u.to_string()));
        }
        let x = uinv.mul(&transport_sum(u)?)?;
        let xinv = transport_sum(uinv)?.mul(u)?;
        let endo = Endo::mk_fu(&x, &xinv)?;
        debug_assert!(graph.edge_ids().all(|e| {
            endo.images.edge(e)
                == &uinv
                    .mul(&Element::edge(&graph, e, field))
                    .unwrap()
                    .mul(u)
                    .unwrap()
        }));
        Ok(endo)
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.images.graph
    }

    pub fn field(&self) -> FieldMode {
        self.field
    }

    pub fn images(&self) -> &GeneratorImages {
        &self.images
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    /// Graded iff every frame entry of (P, P^-1) is homogeneous of degree 0,
    /// equivalently every edge image has degree 1 and every ghost image -1.
    pub fn is_graded(&self) -> bool {
        self.graded
    }

    /// The multiplicative-linear extension to arbitrary elements. Images of
    /// real-path and ghost-path words are memoized per endomorphism, so
    /// monomials sharing prefixes pay for each word once.
    pub fn apply(&self, a: &Element) -> Result<Element> {
        if !crate::algebra::same_graph(a.graph(), &self.images.graph) {
            return Err(LpaError::GraphMismatch);
        }
        let graph = &self.images.graph;
        let mut acc = Element::zero(graph);
        for (m, c) in a.terms() {
            let p_img = self.path_image(&m.p)?;
            let q_img = self.ghost_image(&m.q)?;
            let img = p_img.mul(&q_img)?;
            acc = acc.add(&img.scale(c))?;
        }
        Ok(acc)
    }

    /// Image of the real path word p (product of edge images).
    fn path_image(&self, p: &crate::algebra::Word) -> Result<Element> {
        if p.edges.is_empty() {
            return Ok(self.images.vertex(p.base).clone());
        }
        self.word_image(&p.edges, &self.path_cache, |e| self.images.edge(e))
    }

    /// Image of the ghost word q* = q_l* ... q_1* (product in that order).
    fn ghost_image(&self, q: &crate::algebra::Word) -> Result<Element> {
        if q.edges.is_empty() {
            return Ok(self.images.vertex(q.base).clone());
        }
        // key by the reversed ghost word so shared q-suffixes hit the cache
        let word: Vec<EdgeId> = q.edges.iter().rev().copied().collect();
        self.word_image(&word, &self.ghost_cache, |e| self.images.ghost(e))
    }

    fn word_image<'a, F>(
        &'a self,
        word: &[EdgeId],
        cache: &Mutex<HashMap<Vec<EdgeId>, Element>>,
        image_of: F,
    ) -> Result<Element>
    where
        F: Fn(EdgeId) -> &'a Element,
    {
        let mut cache = cache.lock().unwrap();
        if let Some(hit) = cache.get(word) {
            return Ok(hit.clone());
        }
        // extend the longest cached prefix one letter at a time
        let best = (1..word.len())
            .rev()
            .find(|&k| cache.contains_key(&word[..k]))
            .unwrap_or(0);
        let (mut img, start) = if best == 0 {
            let first = image_of(word[0]).clone();
            cache.insert(word[..1].to_vec(), first.clone());
            (first, 1)
        } else {
            (cache[&word[..best]].clone(), best)
        };
        for k in start..word.len() {
            img = img.mul(image_of(word[k]))?;
            cache.insert(word[..=k].to_vec(), img.clone());
        }
        Ok(img)
    }

    /// True when both act identically on every generator.
    pub fn agrees_with(&self, other: &Endo) -> bool {
        self.images == other.images
    }

    /// Whether this endomorphism is the identity on every generator.
    pub fn is_identity(&self) -> bool {
        self.agrees_with(&Endo::identity(&self.images.graph, self.field))
    }

    /// Composition f after g through the monoid law phi_P phi_Q = phi_{P*Q},
    /// cross-checked against functional composition on all generators.
    pub fn compose(&self, g: &Endo) -> Result<Endo> {
        let (fp, gp) = match (&self.provenance, &g.provenance) {
            (Some(a), Some(b)) if a.frame == b.frame => (a, b),
            _ => return Err(LpaError::IncompatibleProvenance),
        };
        let pair = star_product(&fp.pair, &gp.pair, self)?;
        let composite = Endo::mk_phi(&self.images.graph, fp.frame.clone(), pair)?;
        for e in self.images.graph.edge_ids() {
            let functional = self.apply(g.images.edge(e))?;
            if functional != *composite.images.edge(e) {
                return Err(LpaError::CkViolation {
                    relation: "composition".into(),
                    detail: format!(
                        "star-product route and functional route differ on {}",
                        self.images.graph.edge_name(e)
                    ),
                });
            }
            let functional = self.apply(g.images.ghost(e))?;
            if functional != *composite.images.ghost(e) {
                return Err(LpaError::CkViolation {
                    relation: "composition".into(),
                    detail: format!(
                        "star-product route and functional route differ on {}*",
                        self.images.graph.edge_name(e)
                    ),
                });
            }
        }
        Ok(composite)
    }

    /// The m-fold composition via P_m = P phi(P) ... phi^{m-1}(P); by the
    /// uniqueness theorem this is phi^m.
    pub fn power(&self, m: usize) -> Result<Endo> {
        if m == 0 {
            return Ok(Endo::identity(&self.images.graph, self.field));
        }
        let prov = self
            .provenance
            .as_ref()
            .ok_or(LpaError::IncompatibleProvenance)?;
        let pm = crate::matrix::iterate_pm(self, prov.pair.mat(), m)?;
        let pm_inv = {
            // P_m^-1 = phi^{m-1}(P^-1) ... phi(P^-1) P^-1
            let mut acc = prov.pair.inv().clone();
            let mut cur = prov.pair.inv().clone();
            for _ in 1..m {
                cur = cur.apply_entrywise(self)?;
                acc = cur.mat_mul(&acc)?;
            }
            acc
        };
        Endo::mk_phi(
            &self.images.graph,
            prov.frame.clone(),
            InvertiblePair::new(pm, pm_inv)?,
        )
    }
}

impl fmt::Debug for Endo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = &self.images.graph;
        write!(f, "Endo{{")?;
        for e in g.edge_ids() {
            write!(
                f,
                " {} -> {};",
                g.edge_name(e),
                self.images.edge(e)
            )?;
        }
        for e in g.edge_ids() {
            write!(
                f,
                " {}* -> {};",
                g.edge_name(e),
                self.images.ghost(e)
            )?;
        }
        write!(f, " }}")
    }
}

/// A certified automorphism: phi_P together with phi_Q where phi_P(Q) = P^-1.
#[derive(Clone)]
pub struct Automorphism {
    forward: Endo,
    inverse: Endo,
}

impl Automorphism {
    /// Accepts iff phi_P(Q) = P^-1 (the witness criterion); the inverse is
    /// then phi_Q, verified to undo phi_P on every generator.
    pub fn certify(f: &Endo, witness: &InvertiblePair) -> Result<Automorphism> {
        let prov = f
            .provenance
            .as_ref()
            .ok_or(LpaError::IncompatibleProvenance)?;
        if witness.size() != prov.pair.size() {
            return Err(LpaError::SizeMismatch(witness.size(), prov.pair.size()));
        }
        let image = witness.mat().apply_entrywise(f)?;
        for i in 0..witness.size() {
            for j in 0..witness.size() {
                if image.entry(i, j) != prov.pair.inv().entry(i, j) {
                    return Err(LpaError::WitnessRejected {
                        row: i + 1,
                        col: j + 1,
                    });
                }
            }
        }
        let inverse = Endo::mk_phi(f.graph(), prov.frame.clone(), witness.clone())?;
        let graph = f.graph().clone();
        let id = Endo::identity(&graph, f.field);
        for e in graph.edge_ids() {
            if inverse.apply(f.images.edge(e))? != *id.images.edge(e)
                || f.apply(inverse.images.edge(e))? != *id.images.edge(e)
                || inverse.apply(f.images.ghost(e))? != *id.images.ghost(e)
                || f.apply(inverse.images.ghost(e))? != *id.images.ghost(e)
            {
                return Err(LpaError::WitnessRejected { row: 0, col: 0 });
            }
        }
        Ok(Automorphism {
            forward: f.clone(),
            inverse,
        })
    }

    /// The criterion phi_P(P) = P or phi_P(P^-1) = P^-1 certifies phi_P with
    /// witness P^-1; returns `None` when neither fixed point holds.
    pub fn try_fixed_point_shortcut(f: &Endo) -> Result<Option<Automorphism>> {
        let Some(prov) = f.provenance.as_ref() else {
            return Err(LpaError::IncompatibleProvenance);
        };
        let p = prov.pair.mat();
        let pinv = prov.pair.inv();
        if p.apply_entrywise(f)? == *p || pinv.apply_entrywise(f)? == *pinv {
            Ok(Some(Automorphism::certify(f, &prov.pair.swapped())?))
        } else {
            Ok(None)
        }
    }

    pub fn forward(&self) -> &Endo {
        &self.forward
    }

    pub fn inverse(&self) -> &Endo {
        &self.inverse
    }

    pub fn is_graded(&self) -> bool {
        self.forward.graded && self.inverse.graded
    }

    pub fn witness(&self) -> &InvertiblePair {
        &self
            .inverse
            .provenance
            .as_ref()
            .expect("certified inverse is matrix-built")
            .pair
    }
}

impl fmt::Debug for Automorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Automorphism({:?})", self.forward)
    }
}

/// sum_i e_i s e_i* on a rose graph.
fn transport_sum(s: &Element) -> Result<Element> {
    let graph = s.graph().clone();
    graph.require_rose(1)?;
    let field = s.mode().unwrap_or(FieldMode::Rational);
    let mut acc = Element::zero(&graph);
    for e in graph.edge_ids() {
        acc = acc.add(
            &Element::edge(&graph, e, field)
                .mul(s)?
                .mul(&Element::ghost(&graph, e, field))?,
        )?;
    }
    Ok(acc)
}

/// Recovers the unique matrix of an endomorphism fixing everything off the
/// frame: p_ij = e_i* f(e_j) with inverse p'_ij = f(e_i*) e_j. Requires the
/// frame to exhaust s^-1(v).
pub fn extract_matrix(f: &Endo, frame: &Frame) -> Result<InvertiblePair> {
    let graph = f.graph().clone();
    let out = graph.outgoing(frame.v);
    if out.len() != frame.size() || !frame.edges.iter().all(|e| out.contains(e)) {
        return Err(LpaError::BadFrame(format!(
            "frame must list exactly s^-1({})",
            graph.vertex_name(frame.v)
        )));
    }
    let field = f.field;
    let n = frame.size();
    let mut p_entries = Vec::with_capacity(n * n);
    let mut pinv_entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let gi = Element::ghost(&graph, frame.edges[i], field);
            let ej = Element::edge(&graph, frame.edges[j], field);
            p_entries.push(gi.mul(&f.apply(&Element::edge(&graph, frame.edges[j], field))?)?);
            pinv_entries
                .push(f.apply(&Element::ghost(&graph, frame.edges[i], field))?.mul(&ej)?);
        }
    }
    let p = AlgMatrix::new(&graph, frame.w, n, p_entries)?;
    let pinv = AlgMatrix::new(&graph, frame.w, n, pinv_entries)?;
    let pair = InvertiblePair::new(p, pinv)?;
    // round trip: the rebuilt endomorphism agrees with f on all generators
    let rebuilt = Endo::mk_phi(&graph, frame.clone(), pair.clone())?;
    if !rebuilt.agrees_with(f) {
        return Err(LpaError::CkViolation {
            relation: "uniqueness".into(),
            detail: "extracted matrix does not reproduce the endomorphism".into(),
        });
    }
    Ok(pair)
}

/// The unit sum_i f(e_i) e_i* recovering f = f_x on a rose graph.
pub fn unit_of_endo(f: &Endo) -> Result<Element> {
    let graph = f.graph().clone();
    graph.require_rose(1)?;
    let field = f.field;
    let mut x = Element::zero(&graph);
    for e in graph.edge_ids() {
        x = x.add(
            &f.apply(&Element::edge(&graph, e, field))?
                .mul(&Element::ghost(&graph, e, field))?,
        )?;
    }
    Ok(x)
}

/// One direction of L_K(R_n) ~ M_n(L_K(R_n)): s -> (e_i* s e_j).
pub fn matrix_iso(s: &Element) -> Result<AlgMatrix> {
    let graph = s.graph().clone();
    let n = graph.require_rose(1)?;
    let field = s.mode().unwrap_or(FieldMode::Rational);
    let v = VertexId(0);
    let mut entries = Vec::with_capacity(n * n);
    for i in graph.edge_ids() {
        for j in graph.edge_ids() {
            entries.push(
                Element::ghost(&graph, i, field)
                    .mul(s)?
                    .mul(&Element::edge(&graph, j, field))?,
            );
        }
    }
    AlgMatrix::new(&graph, v, n, entries)
}

/// The other direction: M -> sum_{i,j} e_i m_ij e_j*.
pub fn matrix_iso_inv(m: &AlgMatrix) -> Result<Element> {
    let graph = m.graph().clone();
    graph.require_rose(1)?;
    let field = (0..m.size())
        .flat_map(|i| (0..m.size()).map(move |j| (i, j)))
        .find_map(|(i, j)| m.entry(i, j).mode())
        .unwrap_or(FieldMode::Rational);
    let mut s = Element::zero(&graph);
    for (i, ei) in graph.edge_ids().enumerate() {
        for (j, ej) in graph.edge_ids().enumerate() {
            s = s.add(
                &Element::edge(&graph, ei, field)
                    .mul(m.entry(i, j))?
                    .mul(&Element::ghost(&graph, ej, field))?,
            )?;
        }
    }
    Ok(s)
}
