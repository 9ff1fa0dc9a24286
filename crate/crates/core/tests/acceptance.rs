//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! (visible with `cargo test --test acceptance -- --nocapture`). All checks
//! are exact; the stated wall-clock budgets are asserted.

use lpa_core::algebra::{Element, Monomial, Word};
use lpa_core::chenmod::{
    annihilator_check, annihilator_check_with, epsilon, iso_test_irrational, parse_infinite_path,
    phi_of_scalar, sn_act_path, act, twisted_act, ModuleVector, Perm, TailEq,
};
use lpa_core::graph::{EdgeId, Graph, VertexId, VertexKind};
use lpa_core::matrix::{AlgMatrix, InvertiblePair, KMatrix};
use lpa_core::morphism::{extract_matrix, matrix_iso, Automorphism, Endo, Frame};
use lpa_core::parse::{parse_element, parse_matrix};
use lpa_core::scalar::{FieldMode, Scalar};
use lpa_core::twist::{
    check_iso_criterion, image_membership, verify_lemma_ei, verify_lemma_pm, IsoVerdict,
    Membership, ThetaMap, TwistContext,
};
use lpa_core::LpaError;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

const Q: FieldMode = FieldMode::Rational;

fn r2() -> Arc<Graph> {
    Graph::rose(2).unwrap()
}

fn el(g: &Arc<Graph>, s: &str) -> Element {
    parse_element(s, g, Q).unwrap()
}

fn mat(g: &Arc<Graph>, s: &str) -> AlgMatrix {
    parse_matrix(s, g, Q, VertexId(0)).unwrap()
}

fn pair(g: &Arc<Graph>, p: &str, pinv: &str) -> InvertiblePair {
    InvertiblePair::new(mat(g, p), mat(g, pinv)).unwrap()
}

struct Budget {
    name: &'static str,
    started: Instant,
    limit: Duration,
}

impl Budget {
    fn new(name: &'static str, secs: u64) -> Budget {
        Budget {
            name,
            started: Instant::now(),
            limit: Duration::from_secs(secs),
        }
    }

    fn done(self, detail: &str) {
        let elapsed = self.started.elapsed();
        println!(
            "[PASS] {} ({} ms) — {}",
            self.name,
            elapsed.as_millis(),
            detail
        );
        assert!(
            elapsed < self.limit,
            "{} exceeded its {:?} budget: {:?}",
            self.name,
            self.limit,
            elapsed
        );
    }
}

#[test]
fn criterion_01_example_auto_1() {
    let budget = Budget::new("criterion 1: example-auto (1)", 1);
    let g = r2();
    let x = el(&g, "e1*e2' + e2*e1'");
    assert_eq!(x.mul(&x).unwrap(), el(&g, "v"), "x^2 != v");
    let f = Endo::mk_fu(&x, &x).unwrap();
    let extracted = extract_matrix(&f, &Frame::rose(&g).unwrap()).unwrap();
    assert_eq!(*extracted.mat(), mat(&g, "[0,v;v,0]"));
    let auto = Automorphism::try_fixed_point_shortcut(&f)
        .unwrap()
        .expect("fixed-point shortcut certifies f_x");
    assert!(auto.is_graded());
    budget.done("x^2 = v, matrix recovered, shortcut certified");
}

#[test]
fn criterion_02_example_auto_2() {
    let budget = Budget::new("criterion 2: example-auto (2)", 1);
    let g = r2();
    let y = el(&g, "v + e1^2*e2'^2");
    let yinv = el(&g, "v - e1^2*e2'^2");
    assert_eq!(y.mul(&yinv).unwrap(), el(&g, "v"));
    assert_eq!(yinv.mul(&y).unwrap(), el(&g, "v"));
    let f = Endo::mk_fu(&y, &yinv).unwrap();
    for (gen, img) in [
        ("e1", "e1"),
        ("e2", "e2 + e1^2*e2'"),
        ("e1'", "e1' - e1*e2'^2"),
        ("e2'", "e2'"),
    ] {
        assert_eq!(f.apply(&el(&g, gen)).unwrap(), el(&g, img), "f_y({gen})");
    }
    let up = pair(&g, "[v, e1*e2'; 0, v]", "[v, -e1*e2'; 0, v]");
    let phi_up = Endo::mk_phi_rose(&g, up).unwrap();
    assert!(phi_up.agrees_with(&f), "f_y != phi_(U_p) on generators");
    budget.done("y is a unit, images match, f_y = phi_(U_p)");
}

#[test]
fn criterion_03_example_auto_3() {
    let budget = Budget::new("criterion 3: example-auto (3)", 1);
    let g = r2();
    let u = el(&g, "e1*e2' + e2*e1' + e1^2*e2'*e1'");
    let uinv = el(&g, "e1*e2' + e2*e1' - e2*e1*e2'^2");
    let w = el(&g, "e1*e2' + e2*e1' - e2^2*e1'*e2'");
    let winv = el(&g, "e1*e2' + e2*e1' + e1*e2*e1'^2");
    let f = Endo::mk_fu(&u, &uinv).unwrap();
    for (gen, img) in [
        ("e1", "e2 + e1^2*e2'"),
        ("e2", "e1"),
        ("e1'", "e2'"),
        ("e2'", "e1' - e1*e2'^2"),
    ] {
        assert_eq!(f.apply(&el(&g, gen)).unwrap(), el(&g, img), "f_u({gen})");
    }
    assert_eq!(f.apply(&w).unwrap(), uinv, "f_u(w) != u^-1");
    let witness = InvertiblePair::new(
        matrix_iso(&w).unwrap(),
        matrix_iso(&winv).unwrap(),
    )
    .unwrap();
    let auto = Automorphism::certify(&f, &witness).unwrap();
    let fw = Endo::mk_fu(&w, &winv).unwrap();
    assert!(auto.inverse().agrees_with(&fw));
    assert_ne!(f.apply(&u).unwrap(), u, "f_u(u) should differ from u");
    // rem-auto biconditional: f_u(P) = P iff f_u(u) = u, on u (false/false)
    // and x (true/true)
    let p = f.provenance().unwrap().pair.mat().clone();
    assert_eq!(
        p.apply_entrywise(&f).unwrap() == p,
        f.apply(&u).unwrap() == u
    );
    let x = el(&g, "e1*e2' + e2*e1'");
    let fx = Endo::mk_fu(&x, &x).unwrap();
    let px = fx.provenance().unwrap().pair.mat().clone();
    assert!(px.apply_entrywise(&fx).unwrap() == px && fx.apply(&x).unwrap() == x);
    budget.done("images match, witness certifies, f_u(u) != u, biconditional holds");
}

#[test]
fn criterion_04_exa_theta_3() {
    let budget = Budget::new("criterion 4: exa-theta (3)", 10);
    let g = r2();
    let u = el(&g, "e1*e2' + e2*e1' + e1^2*e2'*e1'");
    let uinv = el(&g, "e1*e2' + e2*e1' - e2*e1*e2'^2");
    let w = el(&g, "e1*e2' + e2*e1' - e2^2*e1'*e2'");
    let winv = el(&g, "e1*e2' + e2*e1' + e1*e2*e1'^2");
    let fw = Endo::mk_fu(&w, &winv).unwrap();
    let q = matrix_iso(&w).unwrap();
    let q2 = lpa_core::matrix::iterate_pm(&fw, &q, 2).unwrap();
    let expected = mat(
        &g,
        "[v, -e1*e2' - e1*e2*e1'^2 + e2^2*e1'*e2'; -e2*e1', v + e2*e2' + e2^2*e1'^2]",
    );
    assert_eq!(q2, expected, "Q_2 does not match the displayed matrix");

    let fu = Endo::mk_fu(&u, &uinv).unwrap();
    let witness = InvertiblePair::new(matrix_iso(&w).unwrap(), matrix_iso(&winv).unwrap()).unwrap();
    let auto = Automorphism::certify(&fu, &witness).unwrap();
    let theta_u = ThetaMap::new(Arc::new(TwistContext::new(auto).unwrap())).unwrap();
    match image_membership(&theta_u, q2.entry(0, 1), 4).unwrap() {
        Membership::NotFoundUpTo(4) => {}
        other => panic!("expected NotFoundUpTo(4), got {other:?}"),
    }
    match check_iso_criterion(&theta_u, 2, 4).unwrap() {
        IsoVerdict::FailsAt {
            m: 2,
            entry: (1, 2),
            ..
        } => {}
        other => panic!("expected FailsAt(2, (1,2)), got {other:?}"),
    }

    // theta_x and theta_y are certified isomorphic
    let x = el(&g, "e1*e2' + e2*e1'");
    let fx = Endo::mk_fu(&x, &x).unwrap();
    let theta_x = ThetaMap::new(Arc::new(
        TwistContext::new(Automorphism::try_fixed_point_shortcut(&fx).unwrap().unwrap()).unwrap(),
    ))
    .unwrap();
    assert_eq!(
        check_iso_criterion(&theta_x, 2, 2).unwrap(),
        IsoVerdict::IsomorphismCertified
    );
    let y = el(&g, "v + e1^2*e2'^2");
    let yinv = el(&g, "v - e1^2*e2'^2");
    let fy = Endo::mk_fu(&y, &yinv).unwrap();
    let theta_y = ThetaMap::new(Arc::new(
        TwistContext::new(Automorphism::try_fixed_point_shortcut(&fy).unwrap().unwrap()).unwrap(),
    ))
    .unwrap();
    assert_eq!(
        check_iso_criterion(&theta_y, 2, 3).unwrap(),
        IsoVerdict::IsomorphismCertified
    );
    budget.done("Q_2 entry-for-entry, NotFoundUpTo(4), theta_x/theta_y certified");
}

enum MatKind {
    Scalar,
    Permutation,
    Anick,
}

fn random_pair(g: &Arc<Graph>, rng: &mut ChaCha8Rng) -> InvertiblePair {
    let kind = match rng.gen_range(0..3) {
        0 => MatKind::Scalar,
        1 => MatKind::Permutation,
        _ => MatKind::Anick,
    };
    match kind {
        MatKind::Scalar => loop {
            let km = KMatrix::new(
                2,
                (0..4)
                    .map(|_| {
                        if rng.gen_bool(0.3) {
                            Q.ratio(rng.gen_range(-3i64..=3), rng.gen_range(1i64..=3)).unwrap()
                        } else {
                            Q.int(rng.gen_range(-3..=3))
                        }
                    })
                    .collect(),
            );
            if let Ok(p) = InvertiblePair::from_scalar_matrix(g, VertexId(0), &km, Q) {
                return p;
            }
        },
        MatKind::Permutation => {
            if rng.gen_bool(0.5) {
                pair(g, "[v,0;0,v]", "[v,0;0,v]")
            } else {
                pair(g, "[0,v;v,0]", "[0,v;v,0]")
            }
        }
        MatKind::Anick => {
            let p = random_a_element(g, rng);
            let v = el(g, "v");
            let zero = Element::zero(g);
            let up = AlgMatrix::new(g, VertexId(0), 2, vec![v.clone(), p.clone(), zero.clone(), v.clone()])
                .unwrap();
            let um = AlgMatrix::new(g, VertexId(0), 2, vec![v.clone(), p.neg(), zero, v]).unwrap();
            InvertiblePair::new(up, um).unwrap()
        }
    }
}

/// Random p in A_{R_2}(e_1, e_2) with both path lengths <= 2.
fn random_a_element(g: &Arc<Graph>, rng: &mut ChaCha8Rng) -> Element {
    let mut acc = Element::zero(g);
    for _ in 0..rng.gen_range(1..=2) {
        let a = rng.gen_range(0..=2u32);
        let b = rng.gen_range(0..=2u32);
        let c = rng.gen_range(-2i64..=2);
        if c == 0 || (a == 0 && b == 0) {
            continue;
        }
        let term = el(g, &format!("e1^{a}*e2'^{b}")).scale(&Q.int(c));
        acc = acc.add(&term).unwrap();
    }
    acc
}

fn random_element(g: &Arc<Graph>, rng: &mut ChaCha8Rng, max_len: usize, terms: usize) -> Element {
    let n = g.edge_count() as u32;
    let mut acc = Element::zero(g);
    for _ in 0..rng.gen_range(1..=terms) {
        let lp = rng.gen_range(0..=max_len);
        let lq = rng.gen_range(0..=max_len);
        let p: Vec<EdgeId> = (0..lp).map(|_| EdgeId(rng.gen_range(0..n))).collect();
        let q: Vec<EdgeId> = (0..lq).map(|_| EdgeId(rng.gen_range(0..n))).collect();
        let c = Q.int(rng.gen_range(-3..=3));
        let term = Element::from_raw(
            g,
            vec![(
                Word {
                    base: VertexId(0),
                    edges: p,
                },
                Word {
                    base: VertexId(0),
                    edges: q,
                },
                c,
            )],
        )
        .unwrap();
        acc = acc.add(&term).unwrap();
    }
    acc
}

#[test]
fn criterion_05_monoid_law() {
    let budget = Budget::new("criterion 5: monoid law", 30);
    let g = r2();
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    let probes: Vec<Element> = (0..20)
        .map(|_| random_element(&g, &mut rng, 2, 3))
        .collect();
    let generators: Vec<Element> = ["e1", "e2", "e1'", "e2'", "v"]
        .iter()
        .map(|s| el(&g, s))
        .collect();
    for trial in 0..100 {
        let fp = Endo::mk_phi_rose(&g, random_pair(&g, &mut rng)).unwrap();
        let gp = Endo::mk_phi_rose(&g, random_pair(&g, &mut rng)).unwrap();
        let composite = fp.compose(&gp).unwrap();
        for a in generators.iter().chain(&probes) {
            assert_eq!(
                composite.apply(a).unwrap(),
                fp.apply(&gp.apply(a).unwrap()).unwrap(),
                "composition law fails in trial {trial}"
            );
        }
    }
    budget.done("phi_(P*Q) = phi_P o phi_Q on 100 random pairs x 25 probes");
}

fn random_homogeneous(
    g: &Arc<Graph>,
    rng: &mut ChaCha8Rng,
    degree: i64,
    max_len: usize,
) -> Element {
    let n = g.edge_count() as u32;
    let mut acc = Element::zero(g);
    for _ in 0..rng.gen_range(1..=3) {
        let lp_min = degree.max(0) as usize;
        let lp_max = (max_len as i64 + degree.min(0)) as usize;
        if lp_min > lp_max {
            continue;
        }
        let lp = rng.gen_range(lp_min..=lp_max);
        let lq = (lp as i64 - degree) as usize;
        let p: Vec<EdgeId> = (0..lp).map(|_| EdgeId(rng.gen_range(0..n))).collect();
        let q: Vec<EdgeId> = (0..lq).map(|_| EdgeId(rng.gen_range(0..n))).collect();
        let c = Q.int(rng.gen_range(-3..=3));
        let term = Element::from_raw(
            g,
            vec![(
                Word {
                    base: VertexId(0),
                    edges: p,
                },
                Word {
                    base: VertexId(0),
                    edges: q,
                },
                c,
            )],
        )
        .unwrap();
        acc = acc.add(&term).unwrap();
    }
    acc
}

#[test]
fn criterion_06_zhang_twist_laws() {
    let budget = Budget::new("criterion 6: Zhang twist laws", 30);
    let g = r2();
    let mut rng = ChaCha8Rng::seed_from_u64(600);

    let fx = Endo::mk_fu(&el(&g, "e1*e2' + e2*e1'"), &el(&g, "e1*e2' + e2*e1'")).unwrap();
    let fu = Endo::mk_fu(
        &el(&g, "e1*e2' + e2*e1' + e1^2*e2'*e1'"),
        &el(&g, "e1*e2' + e2*e1' - e2*e1*e2'^2"),
    )
    .unwrap();
    let witness = InvertiblePair::new(
        matrix_iso(&el(&g, "e1*e2' + e2*e1' - e2^2*e1'*e2'")).unwrap(),
        matrix_iso(&el(&g, "e1*e2' + e2*e1' + e1*e2*e1'^2")).unwrap(),
    )
    .unwrap();
    let ctx_x = TwistContext::new(
        Automorphism::try_fixed_point_shortcut(&fx).unwrap().unwrap(),
    )
    .unwrap();
    let ctx_u = TwistContext::new(Automorphism::certify(&fu, &witness).unwrap()).unwrap();

    // associativity of the twisted product on homogeneous triples
    for trial in 0..200 {
        let ctx = if trial % 2 == 0 { &ctx_x } else { &ctx_u };
        let da = rng.gen_range(-2..=2);
        let db = rng.gen_range(-2..=2);
        let dc = rng.gen_range(-2..=2);
        let a = random_homogeneous(&g, &mut rng, da, 3);
        let b = random_homogeneous(&g, &mut rng, db, 3);
        let c = random_homogeneous(&g, &mut rng, dc, 3);
        let lhs = ctx.twist_mul(&ctx.twist_mul(&a, &b).unwrap(), &c).unwrap();
        let rhs = ctx.twist_mul(&a, &ctx.twist_mul(&b, &c).unwrap()).unwrap();
        assert_eq!(lhs, rhs, "twist associativity fails in trial {trial}");
    }

    // the identity-automorphism twist is the ordinary product
    let id_ctx = TwistContext::new(
        Automorphism::try_fixed_point_shortcut(
            &Endo::mk_phi_rose(&g, pair(&g, "[v,0;0,v]", "[v,0;0,v]")).unwrap(),
        )
        .unwrap()
        .unwrap(),
    )
    .unwrap();
    for trial in 0..200 {
        let a = random_element(&g, &mut rng, 3, 3);
        let b = random_element(&g, &mut rng, 3, 3);
        assert_eq!(
            id_ctx.twist_mul(&a, &b).unwrap(),
            a.mul(&b).unwrap(),
            "identity twist differs from mul in trial {trial}"
        );
    }
    budget.done("associativity on 200 homogeneous triples; identity twist = product on 200 pairs");
}

#[test]
fn criterion_07_lemma_identities() {
    let budget = Budget::new("criterion 7: lemma identities", 10);
    let g = r2();
    let px = pair(&g, "[0,v;v,0]", "[0,v;v,0]");
    let u = el(&g, "e1*e2' + e2*e1' + e1^2*e2'*e1'");
    let uinv = el(&g, "e1*e2' + e2*e1' - e2*e1*e2'^2");
    let w = el(&g, "e1*e2' + e2*e1' - e2^2*e1'*e2'");
    let winv = el(&g, "e1*e2' + e2*e1' + e1*e2*e1'^2");
    let pu = InvertiblePair::new(matrix_iso(&u).unwrap(), matrix_iso(&uinv).unwrap()).unwrap();
    let qw = InvertiblePair::new(matrix_iso(&w).unwrap(), matrix_iso(&winv).unwrap()).unwrap();
    for m in 1..=4 {
        assert!(verify_lemma_ei(&px, &px, m).unwrap(), "lemma e_i fails for x at m={m}");
        assert!(verify_lemma_ei(&pu, &qw, m).unwrap(), "lemma e_i fails for u at m={m}");
    }
    let x = el(&g, "e1*e2' + e2*e1'");
    for m in 1..=3 {
        assert!(verify_lemma_pm(&x, &x, m).unwrap(), "lemma P_m fails for x at m={m}");
        assert!(verify_lemma_pm(&u, &uinv, m).unwrap(), "lemma P_m fails for u at m={m}");
    }
    budget.done("all three e_i identities (m <= 4) and P_m formula (m <= 3) hold");
}

fn random_gl2(rng: &mut ChaCha8Rng) -> KMatrix {
    loop {
        let km = KMatrix::new(2, (0..4).map(|_| Q.int(rng.gen_range(-3..=3))).collect());
        if km.invert(Q).is_ok() {
            return km;
        }
    }
}

#[test]
fn criterion_08_chen_twisted_modules() {
    let budget = Budget::new("criterion 8: Chen/twisted modules", 30);
    let g = r2();
    let mut rng = ChaCha8Rng::seed_from_u64(800);
    let cycles = ["(e1)^inf", "(e1 e2)^inf", "(e1 e1 e2)^inf"];
    let cycle_elems = ["e1", "e1*e2", "e1*e1*e2"];
    for trial in 0..10 {
        let p = random_gl2(&mut rng);
        let phi = phi_of_scalar(&g, &p).unwrap();
        for (lit, cel) in cycles.iter().zip(cycle_elems) {
            let alpha = parse_infinite_path(lit, &g).unwrap();
            let m = ModuleVector::twisted_basis(&alpha, &p, Q);
            let x = el(&g, "v").sub(&phi.apply(&el(&g, cel)).unwrap()).unwrap();
            assert!(
                twisted_act(&p, &x, &m).unwrap().is_zero(),
                "(v - phi_P({cel})) . {lit} != 0 in trial {trial}"
            );
        }
    }
    let tm = parse_infinite_path("oracle:thue-morse[e1,e2]", &g).unwrap();
    for trial in 0..5 {
        let p = random_gl2(&mut rng);
        assert!(
            annihilator_check(&p, &tm, 5, Q).unwrap(),
            "epsilon ladder fails in trial {trial}"
        );
    }
    // Corollary on unitriangular twists: yes iff P = Q and alpha ~ beta
    for trial in 0..20 {
        let same = rng.gen_bool(0.5);
        let a = Q.int(rng.gen_range(-3..=3));
        let p = KMatrix::new(2, vec![Q.int(1), a.clone(), Q.int(0), Q.int(1)]);
        let q = if same {
            p.clone()
        } else {
            let b = a.add_ref(&Q.int(rng.gen_range(1..=3)));
            KMatrix::new(2, vec![Q.int(1), b, Q.int(0), Q.int(1)])
        };
        let beta = tm.strip_front(rng.gen_range(0..4));
        let verdict = iso_test_irrational(&tm, &p, &beta, &q).unwrap();
        let expected = if same { TailEq::Yes } else { TailEq::No };
        assert_eq!(verdict, expected, "unitriangular trial {trial}");
    }
    budget.done("annihilators vanish for 10 random P; TM ladder for 5; 20 unitriangular verdicts");
}

/// Test-only reducer applying junction rewrites in a randomized order.
fn randomized_reduce(
    g: &Arc<Graph>,
    raw: &[(Word, Word, Scalar)],
    rng: &mut ChaCha8Rng,
) -> BTreeMap<Monomial, Scalar> {
    let mut state: Vec<(Word, Word, Scalar)> = raw.to_vec();
    let redex = |p: &Word, q: &Word| -> bool {
        match (p.edges.last(), q.edges.last()) {
            (Some(&a), Some(&b)) if a == b => g.special_edge(g.source(a)) == Some(a),
            _ => false,
        }
    };
    loop {
        let candidates: Vec<usize> = state
            .iter()
            .enumerate()
            .filter(|(_, (p, q, _))| redex(p, q))
            .map(|(i, _)| i)
            .collect();
        if candidates.is_empty() {
            break;
        }
        let at = candidates[rng.gen_range(0..candidates.len())];
        let (mut p, mut q, c) = state.remove(at);
        let f = *p.edges.last().unwrap();
        let v = g.source(f);
        p.edges.pop();
        q.edges.pop();
        for &e in g.outgoing(v) {
            if e != f {
                let mut p2 = p.clone();
                p2.edges.push(e);
                let mut q2 = q.clone();
                q2.edges.push(e);
                state.push((p2, q2, c.neg_ref()));
            }
        }
        state.push((p, q, c));
    }
    let mut out: BTreeMap<Monomial, Scalar> = BTreeMap::new();
    for (p, q, c) in state {
        let m = Monomial { p, q };
        let sum = match out.get(&m) {
            Some(prev) => prev.add_ref(&c),
            None => c,
        };
        if sum.is_zero() {
            out.remove(&m);
        } else {
            out.insert(m, sum);
        }
    }
    out
}

fn sink_graph() -> Arc<Graph> {
    Graph::parse(
        "vertex a\nvertex b\nvertex c\nedge f1 a b\nedge f2 a b\nedge f3 a a\nedge h b c\n",
    )
    .unwrap()
}

/// Random raw (p, q) pair with matching ranges, built by a forward walk and a
/// backward walk to the same end vertex.
fn random_raw(g: &Arc<Graph>, rng: &mut ChaCha8Rng, max_len: usize) -> Option<(Word, Word, Scalar)> {
    let nv = g.vertex_count() as u32;
    // forward walk for p
    let mut v = VertexId(rng.gen_range(0..nv));
    let base_p = v;
    let mut p = Vec::new();
    for _ in 0..rng.gen_range(0..=max_len) {
        let out = g.outgoing(v);
        if out.is_empty() {
            break;
        }
        let e = out[rng.gen_range(0..out.len())];
        p.push(e);
        v = g.range(e);
    }
    let end = v;
    // backward walk for q ending at the same vertex
    let mut incoming: Vec<Vec<EdgeId>> = vec![Vec::new(); g.vertex_count()];
    for e in g.edge_ids() {
        incoming[g.range(e).0 as usize].push(e);
    }
    let mut q_rev = Vec::new();
    let mut back = end;
    for _ in 0..rng.gen_range(0..=max_len) {
        let inc = &incoming[back.0 as usize];
        if inc.is_empty() {
            break;
        }
        let e = inc[rng.gen_range(0..inc.len())];
        q_rev.push(e);
        back = g.source(e);
    }
    q_rev.reverse();
    let c = Q.int(rng.gen_range(-3..=3));
    if c.is_zero() {
        return None;
    }
    Some((
        Word {
            base: base_p,
            edges: p,
        },
        Word {
            base: back,
            edges: q_rev,
        },
        c,
    ))
}

#[test]
fn criterion_09_confluence_and_ring_axioms() {
    let budget = Budget::new("criterion 9: confluence and ring axioms", 60);
    let graphs = [r2(), Graph::rose(3).unwrap(), sink_graph()];
    let mut rng = ChaCha8Rng::seed_from_u64(900);

    // 500 raw expressions: two independently randomized reduction orders and
    // the engine agree
    for trial in 0..500 {
        let g = &graphs[trial % graphs.len()];
        let raw: Vec<(Word, Word, Scalar)> = (0..rng.gen_range(1..=6))
            .filter_map(|_| random_raw(g, &mut rng, 5))
            .collect();
        let engine = Element::from_raw(g, raw.clone()).unwrap();
        let mut rng_a = ChaCha8Rng::seed_from_u64(9000 + trial as u64);
        let mut rng_b = ChaCha8Rng::seed_from_u64(90000 + trial as u64);
        let a = randomized_reduce(g, &raw, &mut rng_a);
        let b = randomized_reduce(g, &raw, &mut rng_b);
        assert_eq!(a, b, "two reduction orders disagree in trial {trial}");
        let engine_map: BTreeMap<Monomial, Scalar> = engine
            .terms()
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect();
        assert_eq!(a, engine_map, "engine disagrees with the oracle in trial {trial}");
    }

    // ring axioms on 300 random triples
    for trial in 0..300 {
        let g = &graphs[trial % graphs.len()];
        let a = random_multi(g, &mut rng);
        let b = random_multi(g, &mut rng);
        let c = random_multi(g, &mut rng);
        let ab_c = a.mul(&b).unwrap().mul(&c).unwrap();
        let a_bc = a.mul(&b.mul(&c).unwrap()).unwrap();
        assert_eq!(ab_c, a_bc, "associativity fails in trial {trial}");
        let dist = a.mul(&b.add(&c).unwrap()).unwrap();
        let expand = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
        assert_eq!(dist, expand, "distributivity fails in trial {trial}");
        let one = Element::identity(g, Q);
        assert_eq!(one.mul(&a).unwrap(), a);
        assert_eq!(a.mul(&one).unwrap(), a);
    }

    // CK relation suite on all three graphs
    for g in &graphs {
        for e in g.edge_ids() {
            for f in g.edge_ids() {
                let prod = Element::ghost(g, e, Q).mul(&Element::edge(g, f, Q)).unwrap();
                let expect = if e == f {
                    Element::vertex(g, g.range(e), Q)
                } else {
                    Element::zero(g)
                };
                assert_eq!(prod, expect, "CK1 fails for {e:?}, {f:?}");
            }
        }
        for v in g.vertex_ids() {
            if g.classify_vertex(v) != VertexKind::Regular {
                continue;
            }
            let mut sum = Element::zero(g);
            for &e in g.outgoing(v) {
                sum = sum
                    .add(&Element::edge(g, e, Q).mul(&Element::ghost(g, e, Q)).unwrap())
                    .unwrap();
            }
            assert_eq!(sum, Element::vertex(g, v, Q), "CK2 fails at {v:?}");
        }
    }
    budget.done("500 reduction-order agreements; 300 ring-axiom triples; CK suite on 3 graphs");
}

fn random_multi(g: &Arc<Graph>, rng: &mut ChaCha8Rng) -> Element {
    let mut acc = Element::zero(g);
    for _ in 0..rng.gen_range(1..=3) {
        if let Some(raw) = random_raw(g, rng, 3) {
            acc = acc.add(&Element::from_raw(g, vec![raw]).unwrap()).unwrap();
        }
    }
    acc
}

#[test]
fn criterion_10_negative_controls() {
    let budget = Budget::new("criterion 10: negative controls", 30);
    let g = r2();
    // corrupted inverse pair
    let singular = mat(&g, "[v, v; v, v]");
    assert!(matches!(
        InvertiblePair::new(singular.clone(), singular),
        Err(LpaError::NotInverse { .. })
    ));
    // corrupted witness
    let x = el(&g, "e1*e2' + e2*e1'");
    let fx = Endo::mk_fu(&x, &x).unwrap();
    let wrong = pair(&g, "[v, e1*e2'; 0, v]", "[v, -e1*e2'; 0, v]");
    assert!(matches!(
        Automorphism::certify(&fx, &wrong),
        Err(LpaError::WitnessRejected { .. })
    ));
    // corrupted epsilon ladder
    let alpha = parse_infinite_path("(e1 e2)^inf", &g).unwrap();
    let mut ladder: Vec<Element> = (0..=3).map(|m| epsilon(&alpha, m, Q).unwrap()).collect();
    ladder[1] = el(&g, "e2*e2'");
    assert!(!annihilator_check_with(&KMatrix::identity(2, Q), &ladder, &alpha, Q).unwrap());
    budget.done("bad pair, bad witness, and bad idempotent ladder all rejected");
}

#[test]
fn verify_paper_suite_is_green() {
    let budget = Budget::new("verify-paper aggregate", 60);
    let report = lpa_core::verify::verify_paper(Q, None).unwrap();
    for check in &report.checks {
        assert_eq!(
            check.verdict,
            lpa_core::verify::Verdict::Pass,
            "{}: {}",
            check.name,
            check.detail
        );
    }
    budget.done("every named paper check passes");
}

#[test]
fn chen_plain_annihilators_and_action_edges() {
    // (v - c) c^inf = 0 in the untwisted module for the three cycles, and
    // the generator action matches the shift rules
    let g = r2();
    for (lit, cel) in [
        ("(e1)^inf", "e1"),
        ("(e1 e2)^inf", "e1*e2"),
        ("(e1 e1 e2)^inf", "e1*e1*e2"),
    ] {
        let alpha = parse_infinite_path(lit, &g).unwrap();
        let m = ModuleVector::basis(&alpha, Q);
        let vc = el(&g, "v").sub(&el(&g, cel)).unwrap();
        assert!(act(&vc, &m).unwrap().is_zero());
    }
    // S_n relabeling commutes with shifting on an oracle path
    let tm = parse_infinite_path("oracle:thue-morse[e1,e2]", &g).unwrap();
    let sigma = Perm::transposition(2, 1, 2).unwrap();
    let a = sn_act_path(&sigma, &tm.strip_front(3)).unwrap();
    let b = sn_act_path(&sigma, &tm).unwrap().strip_front(3);
    assert_eq!(a, b);
}
