mod common;

use common::{ex1, ex2, ex3, pd, random_genus2, CAP, P};
use mumford::curve::{
    canonical_embed, canonical_embed_with, embedding_m, normalize_projective, period_m, period_matrix,
    period_matrix_at, solve_linear, theta_m, CurveError,
};
use mumford::{Padic, ProjPoint};
use num_rational::Rational64;
use proptest::prelude::*;

fn int(n: i64) -> Padic {
    Padic::from_int(n, P, CAP)
}

fn pt(n: i64) -> ProjPoint {
    ProjPoint::int(n, P, CAP)
}

fn assert_digits(got: &Padic, want: &str) {
    assert!(got.agrees_with(&pd(want)), "got {}, want {want}", got.format_digits());
}

#[test]
fn theta_with_identity_only() {
    let gs = ex1().gen_set();
    let t = theta_m(&gs, &pt(10), &pt(7), &pt(19), 0).unwrap();
    assert!(t.approx_eq(&int(9).div(&int(12)).unwrap()));
    assert_eq!(theta_m(&gs, &pt(10), &pt(7), &ProjPoint::Infinity, 3).unwrap(), Padic::one(P, CAP));
}

#[test]
fn theta_pole_is_an_error() {
    let gs = ex1().gen_set();
    let err = theta_m(&gs, &pt(10), &pt(19), &pt(19), 2).unwrap_err();
    assert!(matches!(err, CurveError::Padic(_) | CurveError::Pole(_)), "{err:?}");
}

#[test]
fn example_one_matrix() {
    let pm = period_matrix(&ex1(), 10).unwrap();
    assert_eq!(pm.m, 5);
    assert_eq!(pm.c, Rational64::from_integer(2));
    for (i, j) in [(0, 0), (1, 1)] {
        assert_digits(&pm.q[i][j], "(...220200000100)_3");
    }
    for (i, j) in [(0, 1), (1, 0)] {
        assert_digits(&pm.q[i][j], "(...0101010101)_3");
    }
}

#[test]
fn example_two_matrix() {
    let pm = period_matrix(&ex2(), 10).unwrap();
    for (i, j) in [(0, 0), (1, 1)] {
        assert_digits(&pm.q[i][j], "(...12010021010000)_3");
    }
    for (i, j) in [(0, 1), (1, 0)] {
        assert_digits(&pm.q[i][j], "(...002000212200)_3");
    }
    assert_eq!(pm.val_matrix(), vec![vec![4, 2], vec![2, 4]]);
}

#[test]
fn example_three_matrix() {
    let pm = period_matrix(&ex3(), 10).unwrap();
    assert_eq!(pm.m, 5);
    let want = [
        ["(...11201000010000)_3", "(...12020022210)_3", "(...20020002120)_3"],
        ["(...12020022210)_3", "(...10101010010000)_3", "(...020201120.1)_3"],
        ["(...20020002120)_3", "(...020201120.1)_3", "(...21010100010000)_3"],
    ];
    for i in 0..3 {
        for j in 0..3 {
            assert_digits(&pm.q[i][j], want[i][j]);
        }
    }
    assert_eq!(pm.val_matrix(), vec![vec![4, 1, 1], vec![1, 4, -1], vec![1, -1, 4]]);
}

#[test]
fn single_term_gives_valuations() {
    let pm = period_matrix_at(&ex1(), 4, 0).unwrap();
    assert_eq!(pm.val_matrix(), vec![vec![2, 0], vec![0, 2]]);
    let pm = period_matrix_at(&ex3(), 4, 0).unwrap();
    assert_eq!(pm.val_matrix(), vec![vec![4, 1, 1], vec![1, 4, -1], vec![1, -1, 4]]);
}

#[test]
fn truncation_indices() {
    assert_eq!(period_m(&ex1(), 10).unwrap(), 5);
    // c = 2 and d = 1/9: 2m − 2 ≥ 10.
    assert_eq!(embedding_m(&ex3(), 10).unwrap(), 6);
}

#[test]
fn canonical_point_for_seventeen() {
    let dom = ex3();
    let pt17 = canonical_embed(&dom, &pt(17), 10).unwrap();
    assert_eq!(pt17.m, 6);
    let want = ["(...2100012121)_3", "(...2211022001.1)_3", "(...2221222111.1)_3"];
    for (x, w) in pt17.coords.iter().zip(want) {
        assert_digits(x, w);
    }
    // A second admissible base point on each sphere agrees to the bound.
    let other = canonical_embed_with(&dom, &pt(17), 10, 6, 1).unwrap();
    for (x, y) in pt17.coords.iter().zip(&other.coords) {
        assert!(x.sub(y).val_bound() >= 10, "{x} vs {y}");
    }
    // Projective normal form ignores a common unit factor.
    let u = Padic::from_int(5, P, 30).with_cap(CAP);
    let scaled: Vec<Padic> = pt17.coords.iter().map(|x| x.mul(&u)).collect();
    let (a, b) = (normalize_projective(&pt17.coords).unwrap(), normalize_projective(&scaled).unwrap());
    for (x, y) in a.iter().zip(&b) {
        assert!(x.agrees_with(y));
    }
}

#[test]
fn points_outside_the_domain_are_reduced_first() {
    let dom = ex3();
    let gs = dom.gen_set();
    let z = gs.letter(2).apply(&pt(17)).unwrap();
    let moved = canonical_embed(&dom, &z, 6).unwrap();
    let direct = canonical_embed(&dom, &pt(17), 6).unwrap();
    assert!(!moved.word.is_empty());
    for (x, y) in moved.coords.iter().zip(&direct.coords) {
        assert!(x.sub(y).val_bound() >= 6, "{x} vs {y}");
    }
}

#[test]
fn linear_systems() {
    let e = |x| Padic::from_int(x, 5, 12);
    let x = solve_linear(&[vec![e(1), e(0)], vec![e(0), e(1)]], &[e(3), e(7)]).unwrap();
    assert_eq!(x, vec![e(3), e(7)]);
    let singular = solve_linear(&[vec![e(1), e(2)], vec![e(2), e(4)]], &[e(1), e(1)]);
    assert!(matches!(singular, Err(CurveError::Rank { rank: 1, size: 2 })), "{singular:?}");
    let inconsistent = solve_linear(&[vec![e(1)], vec![e(1)]], &[e(1), e(2)]);
    assert!(matches!(inconsistent, Err(CurveError::Inconsistent)));
}

proptest! {
    #[test]
    fn two_by_two_matches_cramer(
        m in prop::array::uniform4(-40i64..40),
        r in prop::array::uniform2(-40i64..40),
    ) {
        let det = m[0] * m[3] - m[1] * m[2];
        prop_assume!(det != 0);
        let e = |x| Padic::from_int(x, P, 40);
        let a = vec![vec![e(m[0]), e(m[1])], vec![e(m[2]), e(m[3])]];
        let x = solve_linear(&a, &[e(r[0]), e(r[1])]).unwrap();
        let x0 = e(m[3] * r[0] - m[1] * r[1]).div(&e(det)).unwrap();
        let x1 = e(m[0] * r[1] - m[2] * r[0]).div(&e(det)).unwrap();
        for (got, want) in [(&x[0], &x0), (&x[1], &x1)] {
            prop_assert!(got.approx_eq(want), "{} vs {}", got, want);
            // Elimination may spend a few digits, never most of them.
            prop_assert!(got.abs_precision().unwrap() >= 30 - 2 * e(det).valuation().unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn theta_reciprocity(a in -60i64..60, b in -60i64..60, z in -60i64..60, m in 0usize..3) {
        prop_assume!(a != b);
        let gs = ex1().gen_set();
        let (Ok(t1), Ok(t2)) = (
            theta_m(&gs, &pt(a), &pt(b), &pt(z), m),
            theta_m(&gs, &pt(b), &pt(a), &pt(z), m),
        ) else {
            // z sits on an orbit point.
            return Ok(());
        };
        prop_assert!(t1.mul(&t2).approx_eq(&Padic::one(P, CAP)));
    }

    #[test]
    fn random_groups_are_certified(dom in random_genus2()) {
        prop_assert_eq!(dom.check().unwrap(), None);
        prop_assert!(dom.c().unwrap() >= Rational64::from_integer(2));
    }

    #[test]
    fn period_matrices_of_random_groups(dom in random_genus2(), m in 1usize..3) {
        let n = 12;
        let c = dom.c().unwrap();
        let bound = (c * Rational64::from_integer(m as i64)).ceil().to_integer();
        let q = period_matrix_at(&dom, n, m).unwrap();
        let next = period_matrix_at(&dom, n, m + 1).unwrap();
        let one = Padic::one(P, q.cap);
        for i in 0..2 {
            prop_assert!(q.q[i][i].valuation().unwrap() > 0);
            for j in 0..2 {
                let ladder = next.q[i][j].div(&q.q[i][j]).unwrap().sub(&one);
                prop_assert!(ladder.val_bound() >= bound, "ladder ({i},{j}): {ladder}");
                let sym = q.q[i][j].div(&q.q[j][i]).unwrap().sub(&one);
                prop_assert!(sym.val_bound() >= bound, "symmetry ({i},{j}): {sym}");
            }
        }
    }
}
