//! Randomized invariants from across the modules, run at fixed seeds.

use lpa_core::algebra::{Element, Word};
use lpa_core::chenmod::{parse_infinite_path, twisted_act, ModuleVector};
use lpa_core::graph::{EdgeId, Graph, VertexId};
use lpa_core::linalg::rank_of_elements;
use lpa_core::matrix::{iterate_pm, star_product, AlgMatrix, InvertiblePair, KMatrix};
use lpa_core::morphism::{extract_matrix, Automorphism, Endo, Frame};
use lpa_core::parse::{parse_element, parse_matrix};
use lpa_core::scalar::FieldMode;
use lpa_core::twist::{ThetaMap, TwistContext};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

const Q: FieldMode = FieldMode::Rational;

fn r2() -> Arc<Graph> {
    Graph::rose(2).unwrap()
}

fn el(g: &Arc<Graph>, s: &str) -> Element {
    parse_element(s, g, Q).unwrap()
}

fn random_element(g: &Arc<Graph>, rng: &mut ChaCha8Rng, max_len: usize) -> Element {
    let n = g.edge_count() as u32;
    let mut acc = Element::zero(g);
    for _ in 0..rng.gen_range(1..=3) {
        let lp = rng.gen_range(0..=max_len);
        let lq = rng.gen_range(0..=max_len);
        let raw = (
            Word {
                base: VertexId(0),
                edges: (0..lp).map(|_| EdgeId(rng.gen_range(0..n))).collect(),
            },
            Word {
                base: VertexId(0),
                edges: (0..lq).map(|_| EdgeId(rng.gen_range(0..n))).collect(),
            },
            Q.int(rng.gen_range(-3..=3)),
        );
        acc = acc.add(&Element::from_raw(g, vec![raw]).unwrap()).unwrap();
    }
    acc
}

fn random_homogeneous(g: &Arc<Graph>, rng: &mut ChaCha8Rng, degree: i64) -> Element {
    let n = g.edge_count() as u32;
    let mut acc = Element::zero(g);
    for _ in 0..rng.gen_range(1..=2) {
        // both path lengths stay <= 3
        let lp_min = degree.max(0) as usize;
        let lp_max = (3 + degree.min(0)) as usize;
        let lp = rng.gen_range(lp_min..=lp_max);
        let lq = (lp as i64 - degree) as usize;
        let raw = (
            Word {
                base: VertexId(0),
                edges: (0..lp).map(|_| EdgeId(rng.gen_range(0..n))).collect(),
            },
            Word {
                base: VertexId(0),
                edges: (0..lq).map(|_| EdgeId(rng.gen_range(0..n))).collect(),
            },
            Q.int(rng.gen_range(-3..=3)),
        );
        acc = acc.add(&Element::from_raw(g, vec![raw]).unwrap()).unwrap();
    }
    acc
}

fn fu_example(g: &Arc<Graph>) -> Endo {
    Endo::mk_fu(
        &el(g, "e1*e2' + e2*e1' + e1^2*e2'*e1'"),
        &el(g, "e1*e2' + e2*e1' - e2*e1*e2'^2"),
    )
    .unwrap()
}

fn fu_theta(g: &Arc<Graph>) -> ThetaMap {
    let f = fu_example(g);
    let witness = InvertiblePair::new(
        lpa_core::morphism::matrix_iso(&el(g, "e1*e2' + e2*e1' - e2^2*e1'*e2'")).unwrap(),
        lpa_core::morphism::matrix_iso(&el(g, "e1*e2' + e2*e1' + e1*e2*e1'^2")).unwrap(),
    )
    .unwrap();
    let auto = Automorphism::certify(&f, &witness).unwrap();
    ThetaMap::new(Arc::new(TwistContext::new(auto).unwrap())).unwrap()
}

#[test]
fn grading_is_multiplicative() {
    let g = r2();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..100 {
        let da = rng.gen_range(-2..=2);
        let db = rng.gen_range(-2..=2);
        let a = random_homogeneous(&g, &mut rng, da);
        let b = random_homogeneous(&g, &mut rng, db);
        let prod = a.mul(&b).unwrap();
        if !prod.is_zero() && !a.is_zero() && !b.is_zero() {
            assert_eq!(prod.homogeneous_degree(), Some(da + db));
        }
    }
}

#[test]
fn star_is_an_involutive_antiautomorphism() {
    let g = r2();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..100 {
        let a = random_element(&g, &mut rng, 3);
        let b = random_element(&g, &mut rng, 3);
        assert_eq!(a.star().star(), a);
        assert_eq!(
            a.mul(&b).unwrap().star(),
            b.star().mul(&a.star()).unwrap()
        );
        assert_eq!(a.add(&b).unwrap().star(), a.star().add(&b.star()).unwrap());
    }
}

#[test]
fn endomorphisms_are_homomorphisms() {
    let g = r2();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let f = fu_example(&g);
    for _ in 0..200 {
        let a = random_element(&g, &mut rng, 2);
        let b = random_element(&g, &mut rng, 2);
        assert_eq!(
            f.apply(&a.mul(&b).unwrap()).unwrap(),
            f.apply(&a).unwrap().mul(&f.apply(&b).unwrap()).unwrap()
        );
        assert_eq!(
            f.apply(&a.add(&b).unwrap()).unwrap(),
            f.apply(&a).unwrap().add(&f.apply(&b).unwrap()).unwrap()
        );
    }
}

#[test]
fn extract_matrix_inverts_mk_phi() {
    let g = r2();
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let frame = Frame::rose(&g).unwrap();
    for _ in 0..20 {
        // scalar pairs are cheap to draw invertibly
        let km = loop {
            let km = KMatrix::new(2, (0..4).map(|_| Q.int(rng.gen_range(-3..=3))).collect());
            if km.invert(Q).is_ok() {
                break km;
            }
        };
        let pair = InvertiblePair::from_scalar_matrix(&g, VertexId(0), &km, Q).unwrap();
        let f = Endo::mk_phi_rose(&g, pair.clone()).unwrap();
        let back = extract_matrix(&f, &frame).unwrap();
        assert_eq!(back.mat(), pair.mat());
    }
}

#[test]
fn graded_endomorphisms_preserve_degree() {
    let g = r2();
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let f = fu_example(&g);
    assert!(f.is_graded());
    for _ in 0..100 {
        let d = rng.gen_range(-2..=2);
        let a = random_homogeneous(&g, &mut rng, d);
        let img = f.apply(&a).unwrap();
        if !img.is_zero() && !a.is_zero() {
            assert_eq!(img.homogeneous_degree(), Some(d));
        }
    }
}

#[test]
fn injectivity_proxy_for_endomorphisms() {
    // images of the degree <= 2 normal basis monomials stay linearly
    // independent under a validated endomorphism
    let g = r2();
    let f = fu_example(&g);
    let mut basis = Vec::new();
    for lp in 0..=2usize {
        for lq in 0..=2usize {
            for p in all_words(&g, lp) {
                for q in all_words(&g, lq) {
                    if let (Some(&pe), Some(&qe)) = (p.edges.last(), q.edges.last()) {
                        if pe == qe && g.special_edge(g.source(pe)) == Some(pe) {
                            continue;
                        }
                    }
                    basis.push(
                        Element::from_raw(&g, vec![(p.clone(), q.clone(), Q.one())]).unwrap(),
                    );
                }
            }
        }
    }
    let images: Vec<Element> = basis.iter().map(|b| f.apply(b).unwrap()).collect();
    assert_eq!(rank_of_elements(&images), basis.len());
}

fn all_words(g: &Arc<Graph>, len: usize) -> Vec<Word> {
    let n = g.edge_count() as u32;
    let mut out = vec![Word {
        base: VertexId(0),
        edges: Vec::new(),
    }];
    for _ in 0..len {
        let mut next = Vec::new();
        for w in &out {
            for e in 0..n {
                let mut w2 = w.clone();
                w2.edges.push(EdgeId(e));
                next.push(w2);
            }
        }
        out = next;
    }
    out
}

#[test]
fn theta_is_a_graded_homomorphism_into_the_twist() {
    let g = r2();
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    let theta = fu_theta(&g);
    let ctx = theta.context().clone();
    for _ in 0..60 {
        let a = random_element(&g, &mut rng, 2);
        let b = random_element(&g, &mut rng, 2);
        let lhs = theta.apply(&a.mul(&b).unwrap()).unwrap();
        let rhs = ctx
            .twist_mul(&theta.apply(&a).unwrap(), &theta.apply(&b).unwrap())
            .unwrap();
        assert_eq!(lhs, rhs, "theta(ab) != theta(a) * theta(b)");
    }
    for _ in 0..60 {
        let d = rng.gen_range(-2..=2);
        let a = random_homogeneous(&g, &mut rng, d);
        let img = theta.apply(&a).unwrap();
        if !img.is_zero() && !a.is_zero() {
            assert_eq!(img.homogeneous_degree(), Some(d), "theta is not graded");
        }
    }
}

#[test]
fn theta_injectivity_proxy() {
    // theta-images of the degree-d basis monomials with |p|, |q| <= 3 have
    // full rank for d in -2..=2
    let g = r2();
    let theta = fu_theta(&g);
    for d in -2i64..=2 {
        let mut basis = Vec::new();
        for lp in 0..=3usize {
            let lq = lp as i64 - d;
            if lq < 0 || lq > 3 {
                continue;
            }
            for p in all_words(&g, lp) {
                for q in all_words(&g, lq as usize) {
                    if let (Some(&pe), Some(&qe)) = (p.edges.last(), q.edges.last()) {
                        if pe == qe && g.special_edge(g.source(pe)) == Some(pe) {
                            continue;
                        }
                    }
                    basis.push(
                        Element::from_raw(&g, vec![(p.clone(), q.clone(), Q.one())]).unwrap(),
                    );
                }
            }
        }
        let images: Vec<Element> = basis.iter().map(|b| theta.apply(b).unwrap()).collect();
        assert_eq!(rank_of_elements(&images), basis.len(), "rank drop at degree {d}");
    }
}

#[test]
fn invertible_pairs_survive_entrywise_images() {
    let g = r2();
    let f = fu_example(&g);
    let pair = parse_pair(&g, "[v, e1*e2'; 0, v]", "[v, -e1*e2'; 0, v]");
    let mapped_mat = pair.mat().apply_entrywise(&f).unwrap();
    let mapped_inv = pair.inv().apply_entrywise(&f).unwrap();
    // both products re-verify to w I_n
    assert!(InvertiblePair::new(mapped_mat, mapped_inv).is_ok());
}

fn parse_pair(g: &Arc<Graph>, p: &str, pinv: &str) -> InvertiblePair {
    InvertiblePair::new(
        parse_matrix(p, g, Q, VertexId(0)).unwrap(),
        parse_matrix(pinv, g, Q, VertexId(0)).unwrap(),
    )
    .unwrap()
}

#[test]
fn iterate_pm_satisfies_its_recursion() {
    let g = r2();
    let f = fu_example(&g);
    let p = f.provenance().unwrap().pair.mat().clone();
    for m in 1..=3usize {
        let pm = iterate_pm(&f, &p, m).unwrap();
        let next = iterate_pm(&f, &p, m + 1).unwrap();
        // P_{m+1} = P_m . phi^m(P), with phi^m by m-fold entrywise application
        let mut phim_p = p.clone();
        for _ in 0..m {
            phim_p = phim_p.apply_entrywise(&f).unwrap();
        }
        assert_eq!(next, pm.mat_mul(&phim_p).unwrap());
        // and phi^m = phi_(P_m) on generators
        let power = f.power(m).unwrap();
        let pm_pair = lpa_core::twist::pair_power(&f.provenance().unwrap().pair, &f, m).unwrap();
        let via_matrix = Endo::mk_phi_rose(&g, pm_pair).unwrap();
        assert!(power.agrees_with(&via_matrix));
    }
}

#[test]
fn star_product_is_associative() {
    let g = r2();
    let mut rng = ChaCha8Rng::seed_from_u64(27);
    for _ in 0..20 {
        let pairs: Vec<InvertiblePair> = (0..3)
            .map(|_| loop {
                let km = KMatrix::new(2, (0..4).map(|_| Q.int(rng.gen_range(-2..=2))).collect());
                if let Ok(p) = InvertiblePair::from_scalar_matrix(&g, VertexId(0), &km, Q) {
                    break p;
                }
            })
            .collect();
        let (a, b, c) = (&pairs[0], &pairs[1], &pairs[2]);
        let fa = Endo::mk_phi_rose(&g, a.clone()).unwrap();
        let ab = star_product(a, b, &fa).unwrap();
        let f_ab = Endo::mk_phi_rose(&g, ab.clone()).unwrap();
        let lhs = star_product(&ab, c, &f_ab).unwrap();
        let fb = Endo::mk_phi_rose(&g, b.clone()).unwrap();
        let bc = star_product(b, c, &fb).unwrap();
        let rhs = star_product(a, &bc, &fa).unwrap();
        assert_eq!(lhs.mat(), rhs.mat());
    }
}

#[test]
fn twisted_module_law_at_fixed_p() {
    let g = r2();
    let mut rng = ChaCha8Rng::seed_from_u64(28);
    let p = KMatrix::new(2, vec![Q.int(1), Q.int(1), Q.int(0), Q.int(1)]);
    let alpha = parse_infinite_path("(e1 e2)^inf", &g).unwrap();
    let m = ModuleVector::twisted_basis(&alpha, &p, Q);
    for _ in 0..100 {
        let a = random_element(&g, &mut rng, 2);
        let b = random_element(&g, &mut rng, 2);
        let lhs = twisted_act(&p, &a.mul(&b).unwrap(), &m).unwrap();
        let rhs = twisted_act(&p, &a, &twisted_act(&p, &b, &m).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn path_concatenation_lengths() {
    use lpa_core::graph::Path;
    let g = Graph::parse(
        "vertex a\nvertex b\nvertex c\nedge f1 a b\nedge f2 b c\nedge f3 c a\n",
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for _ in 0..50 {
        // random walks; concatenation defined exactly when ranges meet
        let start = rng.gen_range(0..3u32);
        let mut v = VertexId(start);
        let mut edges = Vec::new();
        for _ in 0..rng.gen_range(1..=4) {
            let out = g.outgoing(v)[0];
            edges.push(out);
            v = g.range(out);
        }
        let p = Path::from_edges(&g, edges).unwrap();
        let q_ok = Path::single(&g, g.outgoing(p.range())[0]);
        let joined = p.concat(&q_ok).unwrap();
        assert_eq!(joined.len(), p.len() + 1);
        assert_eq!(joined.source(), p.source());
        assert_eq!(joined.range(), q_ok.range());
        let bad = Path::single(&g, g.outgoing(g.range(g.outgoing(p.range())[0]))[0]);
        if badly_composes(&p, &bad) {
            assert!(p.concat(&bad).is_err());
        }
    }
}

fn badly_composes(p: &lpa_core::graph::Path, q: &lpa_core::graph::Path) -> bool {
    p.range() != q.source()
}

#[test]
fn mixed_graph_operands_are_rejected() {
    let g2 = r2();
    let g3 = Graph::rose(3).unwrap();
    let a = el(&g2, "e1");
    let b = parse_element("e1", &g3, Q).unwrap();
    assert!(a.mul(&b).is_err());
    assert!(a.add(&b).is_err());
}

#[test]
fn scalar_matrix_conversions_round_trip() {
    let g = r2();
    let km = KMatrix::new(2, vec![Q.int(2), Q.ratio(1, 3).unwrap(), Q.int(0), Q.int(-1)]);
    let lifted = AlgMatrix::from_scalar(&g, VertexId(0), &km);
    assert_eq!(lifted.to_scalar(Q).unwrap(), km);
    // a non-scalar matrix does not convert
    let m = parse_matrix("[v, e1*e2'; 0, v]", &g, Q, VertexId(0)).unwrap();
    assert!(m.to_scalar(Q).is_none());
}
