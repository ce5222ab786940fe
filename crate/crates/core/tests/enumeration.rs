use std::sync::Arc;

use elemsub::evariety::{enumerate_naive, enumerate_seeded, seed_points, Budget};
use elemsub::{AmbientAlgebra, Family, FieldCtx};

fn alg(family: Family, n: usize, p: u32, d: u32) -> Arc<AmbientAlgebra> {
    Arc::new(AmbientAlgebra::new(family, n, &FieldCtx::new(p, d).unwrap()).unwrap())
}

#[test]
fn seeded_matches_naive_on_gl3() {
    for r in 1..=2 {
        let a = alg(Family::Gl, 3, 5, 1);
        let naive = enumerate_naive(&a, r, &Budget::default()).unwrap();
        let seeded = enumerate_seeded(&a, r, &Budget::default()).unwrap();
        assert!(naive.same_points(&seeded), "r = {r}");
    }
}

#[test]
fn sl_and_gl_share_points() {
    let g = enumerate_seeded(&alg(Family::Gl, 3, 5, 1), 2, &Budget::default()).unwrap();
    let s = enumerate_seeded(&alg(Family::Sl, 3, 5, 1), 2, &Budget::default()).unwrap();
    assert_eq!(g.len(), s.len());
    let gm: Vec<_> = g.points().map(|e| e.basis_matrices()).collect();
    for eps in s.points() {
        let mats = eps.basis_matrices();
        let back = g.algebra().span_of(&mats).unwrap();
        assert!(g.contains(&back));
    }
    assert_eq!(gm.len(), 806);
}

#[test]
fn nonempty_exactly_up_to_rmax() {
    for n in 2..=4 {
        let a = alg(Family::Gl, n, 5, 1);
        for r in 1..=n * (n - 1) / 2 {
            let nonempty = !seed_points(&a, r, &Budget::default()).unwrap().is_empty();
            assert_eq!(nonempty, r <= n * n / 4, "n = {n}, r = {r}");
        }
    }
}

#[test]
fn projective_nilpotent_cone_counts() {
    for (n, p, d) in [(2, 5, 1), (2, 7, 1), (2, 5, 2), (3, 5, 1), (3, 7, 1)] {
        let q = (p as u64).pow(d);
        let expected = (q.pow((n * n - n) as u32) - 1) / (q - 1);
        let pts = enumerate_seeded(&alg(Family::Gl, n, p, d), 1, &Budget::default()).unwrap();
        assert_eq!(pts.len() as u64, expected, "n = {n}, q = {q}");
    }
}

#[test]
#[ignore = "about ten million points"]
fn projective_nilpotent_cone_gl3_f25() {
    let q: u64 = 25;
    let pts = enumerate_seeded(&alg(Family::Gl, 3, 5, 2), 1, &Budget::default()).unwrap();
    assert_eq!(pts.len() as u64, (q.pow(6) - 1) / (q - 1));
}

#[test]
fn points_are_frobenius_stable_rational() {
    let a = alg(Family::Gl, 2, 5, 2);
    let f = a.field().clone();
    let pts = enumerate_seeded(&a, 1, &Budget::default()).unwrap();
    assert_eq!(pts.len(), 26);
    for eps in pts.points() {
        for m in eps.basis_matrices() {
            // The d-fold Frobenius fixes every coordinate in F_q.
            assert_eq!(m.map(|x| f.frobenius(f.frobenius(x))), m);
        }
        let conj = eps.basis_matrices().iter().map(|m| m.map(|x| f.frobenius(x))).collect::<Vec<_>>();
        assert!(a.span_of(&conj).is_ok_and(|s| pts.contains(&s)));
    }
}

#[test]
fn so3_lines_over_extension_fields() {
    for (p, d) in [(5u32, 1u32), (5, 2), (7, 2)] {
        let q = p.pow(d) as usize;
        assert_eq!(enumerate_naive(&alg(Family::So, 3, p, d), 1, &Budget::default()).unwrap().len(), q + 1);
    }
}
