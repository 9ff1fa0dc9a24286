//! Zhang-twisted multiplication and the embedding theta_P.
//!
//! For a graded automorphism sigma, the twist carries the same graded vector
//! space with the product a (*) b = a sigma^n(b) for a homogeneous of degree
//! n. The embedding theta_P: L_K(E) -> L_K(E)^{phi_P} fixes vertices and
//! edges and sends e_i* to sum_k q^(-1)_{ik} e_k*; its image is generally
//! proper, and membership is semi-decided by bounded exact linear algebra.

use crate::algebra::{verify_ck_relations, Element, Word};
use crate::error::{LpaError, Result};
use crate::graph::{Graph, VertexId};
use crate::linalg;
use crate::matrix::{iterate_pm, AlgMatrix, InvertiblePair};
use crate::morphism::{Automorphism, Endo};
use crate::scalar::FieldMode;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

/// A certified graded automorphism together with a lazy cache of its powers.
/// Powers are built through P_m = P phi(P) ... phi^{m-1}(P) and cross-checked
/// against functional composition on the generators.
pub struct TwistContext {
    auto: Automorphism,
    powers: Mutex<BTreeMap<i64, Arc<Endo>>>,
}

impl TwistContext {
    pub fn new(auto: Automorphism) -> Result<TwistContext> {
        if !auto.is_graded() {
            return Err(LpaError::NotGraded);
        }
        Ok(TwistContext {
            auto,
            powers: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn automorphism(&self) -> &Automorphism {
        &self.auto
    }

    pub fn graph(&self) -> &Arc<Graph> {
        self.auto.forward().graph()
    }

    pub fn field(&self) -> FieldMode {
        self.auto.forward().field()
    }

    /// sigma^m for any integer m; negative powers go through the certified
    /// inverse. The lock is held across the computation so concurrent readers
    /// trigger at most one computation per power.
    pub fn power(&self, m: i64) -> Result<Arc<Endo>> {
        let mut cache = self.powers.lock().unwrap();
        if let Some(hit) = cache.get(&m) {
            return Ok(hit.clone());
        }
        let computed = if m == 0 {
            Endo::identity(self.graph(), self.field())
        } else if m > 0 {
            let pow = self.auto.forward().power(m as usize)?;
            self.cross_check(self.auto.forward(), &pow, m as usize)?;
            pow
        } else {
            let pow = self.auto.inverse().power((-m) as usize)?;
            self.cross_check(self.auto.inverse(), &pow, (-m) as usize)?;
            pow
        };
        let arc = Arc::new(computed);
        cache.insert(m, arc.clone());
        Ok(arc)
    }

    /// phi^m = phi_{P_m}: the matrix route must agree with m-fold functional
    /// application on every generator.
    fn cross_check(&self, base: &Endo, matrix_route: &Endo, m: usize) -> Result<()> {
        let graph = self.graph().clone();
        let field = self.field();
        for e in graph.edge_ids() {
            let mut edge = Element::edge(&graph, e, field);
            let mut ghost = Element::ghost(&graph, e, field);
            for _ in 0..m {
                edge = base.apply(&edge)?;
                ghost = base.apply(&ghost)?;
            }
            if edge != *matrix_route.images().edge(e) || ghost != *matrix_route.images().ghost(e)
            {
                return Err(LpaError::CkViolation {
                    relation: "power".into(),
                    detail: format!("phi^{m} disagrees with phi_(P_{m})"),
                });
            }
        }
        Ok(())
    }

    /// The twisted product a (*) b = sum_n a_n sigma^n(b) over the
    /// homogeneous parts a_n of a.
    pub fn twist_mul(&self, a: &Element, b: &Element) -> Result<Element> {
        let mut acc = Element::zero(self.graph());
        for (degree, part) in a.graded_parts() {
            let sigma_n = self.power(degree)?;
            acc = acc.add(&part.mul(&sigma_n.apply(b)?)?)?;
        }
        Ok(acc)
    }
}

impl fmt::Debug for TwistContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TwistContext({:?})", self.auto)
    }
}

/// The graded embedding theta_P: L_K(E) -> L_K(E)^{phi_P}. Vertices and edges
/// are fixed; theta_P(e_i*) = sum_k q^(-1)_{ik} e_k* with Q the certification
/// witness. Images are validated against the CK relations computed with the
/// twisted product.
pub struct ThetaMap {
    ctx: Arc<TwistContext>,
    ghosts: Vec<Element>,
    // span solvers for Im(theta) keyed by (degree, length bound)
    solvers: Mutex<BTreeMap<(i64, usize), Arc<MembershipSolver>>>,
}

struct MembershipSolver {
    basis: Vec<Element>,
    solver: linalg::SpanSolver,
}

impl ThetaMap {
    pub fn new(ctx: Arc<TwistContext>) -> Result<ThetaMap> {
        let graph = ctx.graph().clone();
        let field = ctx.field();
        let forward = ctx.auto.forward();
        let prov = forward
            .provenance()
            .ok_or(LpaError::IncompatibleProvenance)?;
        let frame = prov.frame.clone();
        // P phi_P(Q) = I is the certification identity; re-verify it here.
        let q_pair = ctx.auto.witness().clone();
        let product = prov
            .pair
            .mat()
            .mat_mul(&q_pair.mat().apply_entrywise(forward)?)?;
        let id = AlgMatrix::identity(&graph, frame.w, frame.size(), field);
        if product != id {
            return Err(LpaError::WitnessRejected { row: 0, col: 0 });
        }
        let mut ghosts: Vec<Element> = graph
            .edge_ids()
            .map(|e| Element::ghost(&graph, e, field))
            .collect();
        for (i, &ei) in frame.edges.iter().enumerate() {
            let mut img = Element::zero(&graph);
            for (k, &ek) in frame.edges.iter().enumerate() {
                img = img.add(
                    &q_pair
                        .inv()
                        .entry(i, k)
                        .mul(&Element::ghost(&graph, ek, field))?,
                )?;
            }
            ghosts[ei.0 as usize] = img;
        }
        let vertices: Vec<Element> = graph
            .vertex_ids()
            .map(|v| Element::vertex(&graph, v, field))
            .collect();
        let edges: Vec<Element> = graph
            .edge_ids()
            .map(|e| Element::edge(&graph, e, field))
            .collect();
        // CK relations must hold inside the twist, including
        // T_{e_i*} (*) T_{e_j} = delta_ij w.
        verify_ck_relations(&graph, &vertices, &edges, &ghosts, |a, b| {
            ctx.twist_mul(a, b)
        })?;
        Ok(ThetaMap {
            ctx,
            ghosts,
            solvers: Mutex::new(BTreeMap::new()),
        })
    }

    /// The cached span solver over theta-images of all basis monomials of a
    /// degree, bounded in length.
    fn membership_solver(&self, degree: i64, bound: usize) -> Result<Arc<MembershipSolver>> {
        let mut cache = self.solvers.lock().unwrap();
        if let Some(hit) = cache.get(&(degree, bound)) {
            return Ok(hit.clone());
        }
        let basis = basis_monomials(self.ctx.graph(), self.ctx.field(), degree, bound)?;
        let images = basis
            .iter()
            .map(|b| self.apply(b))
            .collect::<Result<Vec<_>>>()?;
        let entry = Arc::new(MembershipSolver {
            basis,
            solver: linalg::SpanSolver::new(&images),
        });
        cache.insert((degree, bound), entry.clone());
        Ok(entry)
    }

    pub fn context(&self) -> &Arc<TwistContext> {
        &self.ctx
    }

    pub fn ghost_image(&self, e: crate::graph::EdgeId) -> &Element {
        &self.ghosts[e.0 as usize]
    }

    /// Extends the generator images multiplicatively, with every product
    /// taken in the twist.
    pub fn apply(&self, a: &Element) -> Result<Element> {
        let graph = self.ctx.graph().clone();
        let field = self.ctx.field();
        let mut acc = Element::zero(&graph);
        for (m, c) in a.terms() {
            let mut img = Element::vertex(&graph, VertexId(m.p.base.0), field);
            for &e in &m.p.edges {
                img = self.ctx.twist_mul(&img, &Element::edge(&graph, e, field))?;
            }
            for &e in m.q.edges.iter().rev() {
                img = self.ctx.twist_mul(&img, &self.ghosts[e.0 as usize])?;
            }
            acc = acc.add(&img.scale(c))?;
        }
        Ok(acc)
    }
}

impl fmt::Debug for ThetaMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ThetaMap over {:?}", self.ctx)
    }
}

/// Outcome of the bounded membership search in Im(theta_P).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Membership {
    /// A preimage witness b with theta(b) = target, exactly.
    InImage(Element),
    /// Not in the span of theta-images of basis monomials with |p|,|q| <= bound.
    NotFoundUpTo(usize),
}

/// Is `target` in the image of theta, looking at preimages whose monomials
/// have both path lengths bounded by `len_bound`? Exact linear solve per
/// homogeneous part; an InImage witness always re-applies to the target.
pub fn image_membership(
    theta: &ThetaMap,
    target: &Element,
    len_bound: usize,
) -> Result<Membership> {
    let graph = theta.ctx.graph().clone();
    if target.is_zero() {
        return Ok(Membership::InImage(Element::zero(&graph)));
    }
    let mut witness = Element::zero(&graph);
    for (degree, part) in target.graded_parts() {
        let entry = theta.membership_solver(degree, len_bound)?;
        match entry.solver.solve(&part) {
            None => return Ok(Membership::NotFoundUpTo(len_bound)),
            Some(coeffs) => {
                for (b, c) in entry.basis.iter().zip(coeffs) {
                    witness = witness.add(&b.scale(&c))?;
                }
            }
        }
    }
    // soundness: the witness must reproduce the target exactly
    if theta.apply(&witness)? != *target {
        return Err(LpaError::CkViolation {
            relation: "membership".into(),
            detail: "solver witness does not reproduce the target".into(),
        });
    }
    Ok(Membership::InImage(witness))
}

/// All normal-form basis monomials of a fixed degree with |p|, |q| <= bound.
fn basis_monomials(
    graph: &Arc<Graph>,
    field: FieldMode,
    degree: i64,
    bound: usize,
) -> Result<Vec<Element>> {
    let mut paths: Vec<Vec<Word>> = vec![Vec::new(); bound + 1];
    for v in graph.vertex_ids() {
        paths[0].push(Word {
            base: v,
            edges: Vec::new(),
        });
    }
    for len in 1..=bound {
        let mut next = Vec::new();
        for w in &paths[len - 1] {
            let end = w
                .edges
                .last()
                .map(|&e| graph.range(e))
                .unwrap_or(w.base);
            for &e in graph.outgoing(end) {
                let mut w2 = w.clone();
                w2.edges.push(e);
                next.push(w2);
            }
        }
        paths[len] = next;
    }
    let mut out = Vec::new();
    for lp in 0..=bound {
        let lq = lp as i64 - degree;
        if lq < 0 || lq as usize > bound {
            continue;
        }
        let lq = lq as usize;
        for p in &paths[lp] {
            for q in &paths[lq] {
                let p_end = p.edges.last().map(|&e| graph.range(e)).unwrap_or(p.base);
                let q_end = q.edges.last().map(|&e| graph.range(e)).unwrap_or(q.base);
                if p_end != q_end {
                    continue;
                }
                // skip non-normal monomials: both ending in the special edge
                if let (Some(&pe), Some(&qe)) = (p.edges.last(), q.edges.last()) {
                    if pe == qe && graph.special_edge(graph.source(pe)) == Some(pe) {
                        continue;
                    }
                }
                out.push(Element::from_raw(
                    graph,
                    vec![(p.clone(), q.clone(), field.one())],
                )?);
            }
        }
    }
    Ok(out)
}

/// Verdict of the isomorphism criterion for theta_P.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IsoVerdict {
    /// The fixed-point shortcut applied and every entry of P and P^-1 has a
    /// membership witness: theta_P is an isomorphism.
    IsomorphismCertified,
    /// A required entry was not found within the length bound; `matrix` is
    /// one of "P", "P^-1", "P^-1_m", "Q_m", "Q^-1_m".
    FailsAt {
        m: usize,
        entry: (usize, usize),
        matrix: &'static str,
        bound: usize,
    },
    /// All required entries up to m_max had witnesses, but the criterion
    /// quantifies over all m >= 1.
    InconclusiveUpTo { m_max: usize, bound: usize },
}

/// Theorem-backed criterion: when phi_P(P) = P it suffices that the entries
/// of P and P^-1 lie in Im(theta_P) (finite, hence certifiable). Otherwise
/// the entries of P^-1_m, Q_m, Q^-1_m are required for all m >= 1; the search
/// is truncated at m_max and each membership at the length bound.
pub fn check_iso_criterion(
    theta: &ThetaMap,
    m_max: usize,
    len_bound: usize,
) -> Result<IsoVerdict> {
    let ctx = theta.context();
    let forward = ctx.automorphism().forward();
    let prov = forward.provenance().expect("theta is matrix-built");
    let p_pair = prov.pair.clone();
    let shortcut = p_pair.mat().apply_entrywise(forward)? == *p_pair.mat();
    if shortcut {
        for (matrix, m) in [("P", p_pair.mat()), ("P^-1", p_pair.inv())] {
            for i in 0..p_pair.size() {
                for j in 0..p_pair.size() {
                    if let Membership::NotFoundUpTo(bound) =
                        image_membership(theta, m.entry(i, j), len_bound)?
                    {
                        return Ok(IsoVerdict::FailsAt {
                            m: 1,
                            entry: (i + 1, j + 1),
                            matrix,
                            bound,
                        });
                    }
                }
            }
        }
        return Ok(IsoVerdict::IsomorphismCertified);
    }
    let q_pair = ctx.automorphism().witness().clone();
    let inverse = ctx.automorphism().inverse();
    for m in 1..=m_max {
        let pm_inv = pair_power(&p_pair, forward, m)?.inv().clone();
        let qm_pair = pair_power(&q_pair, inverse, m)?;
        let checks: [(&'static str, &AlgMatrix); 3] = [
            ("P^-1_m", &pm_inv),
            ("Q_m", qm_pair.mat()),
            ("Q^-1_m", qm_pair.inv()),
        ];
        for (matrix, mat) in checks {
            for i in 0..mat.size() {
                for j in 0..mat.size() {
                    if let Membership::NotFoundUpTo(bound) =
                        image_membership(theta, mat.entry(i, j), len_bound)?
                    {
                        return Ok(IsoVerdict::FailsAt {
                            m,
                            entry: (i + 1, j + 1),
                            matrix,
                            bound,
                        });
                    }
                }
            }
        }
    }
    Ok(IsoVerdict::InconclusiveUpTo {
        m_max,
        bound: len_bound,
    })
}

/// (A_m, A_m^-1) for the pair of an endomorphism phi: A_m = A phi(A) ...
/// phi^{m-1}(A), inverse accumulated in the reverse order.
pub fn pair_power(pair: &InvertiblePair, phi: &Endo, m: usize) -> Result<InvertiblePair> {
    let mat = iterate_pm(phi, pair.mat(), m)?;
    let mut inv = pair.inv().clone();
    let mut cur = pair.inv().clone();
    for _ in 1..m {
        cur = cur.apply_entrywise(phi)?;
        inv = cur.mat_mul(&inv)?;
    }
    InvertiblePair::new(mat, inv)
}

/// Lemma identities relating generators to matrix entries across powers:
///   (1) e_i = phi^m(sum_k e_k q^(m)_{ki})
///   (2) e_i* = phi^m(sum_k q^(-m)_{ik} e_k*)
///   (3) e_i* = phi^-m(sum_k p^(-m)_{ik} e_k*)
/// for all i at the given level m, checked as exact symbolic equalities.
pub fn verify_lemma_ei(
    p_pair: &InvertiblePair,
    q_pair: &InvertiblePair,
    m: usize,
) -> Result<bool> {
    let graph = p_pair.graph().clone();
    let field = pair_field(p_pair);
    let phi = Endo::mk_phi_rose(&graph, p_pair.clone())?;
    let psi = Endo::mk_phi_rose(&graph, q_pair.clone())?;
    let phi_m = phi.power(m)?;
    let psi_m = psi.power(m)?;
    let pm = pair_power(p_pair, &phi, m)?;
    let qm = pair_power(q_pair, &psi, m)?;
    let n = p_pair.size();
    for i in 0..n {
        let ei = Element::edge(&graph, crate::graph::EdgeId(i as u32), field);
        let gi = Element::ghost(&graph, crate::graph::EdgeId(i as u32), field);
        let mut sum1 = Element::zero(&graph);
        let mut sum2 = Element::zero(&graph);
        let mut sum3 = Element::zero(&graph);
        for k in 0..n {
            let ek = Element::edge(&graph, crate::graph::EdgeId(k as u32), field);
            let gk = Element::ghost(&graph, crate::graph::EdgeId(k as u32), field);
            sum1 = sum1.add(&ek.mul(qm.mat().entry(k, i))?)?;
            sum2 = sum2.add(&qm.inv().entry(i, k).mul(&gk)?)?;
            sum3 = sum3.add(&pm.inv().entry(i, k).mul(&gk)?)?;
        }
        if phi_m.apply(&sum1)? != ei
            || phi_m.apply(&sum2)? != gi
            || psi_m.apply(&sum3)? != gi
        {
            return Ok(false);
        }
    }
    Ok(true)
}

/// P_m = (e_i* u_m e_j) and P^-1_m = (e_i* u^-1_m e_j) with
/// u_m = f^{m-1}(u) ... f(u) u and u^-1_m = u^-1 f(u^-1) ... f^{m-1}(u^-1).
pub fn verify_lemma_pm(u: &Element, uinv: &Element, m: usize) -> Result<bool> {
    let f = Endo::mk_fu(u, uinv)?;
    let prov = f.provenance().expect("mk_fu is matrix-built");
    let pm = pair_power(&prov.pair, &f, m)?;

    let mut um = u.clone();
    let mut cur = u.clone();
    let mut um_inv = uinv.clone();
    let mut cur_inv = uinv.clone();
    for _ in 1..m {
        cur = f.apply(&cur)?;
        um = cur.mul(&um)?;
        cur_inv = f.apply(&cur_inv)?;
        um_inv = um_inv.mul(&cur_inv)?;
    }
    let lhs = crate::morphism::matrix_iso(&um)?;
    let lhs_inv = crate::morphism::matrix_iso(&um_inv)?;
    Ok(lhs == *pm.mat() && lhs_inv == *pm.inv())
}

fn pair_field(pair: &InvertiblePair) -> FieldMode {
    let n = pair.size();
    (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .find_map(|(i, j)| pair.mat().entry(i, j).mode())
        .unwrap_or(FieldMode::Rational)
}
