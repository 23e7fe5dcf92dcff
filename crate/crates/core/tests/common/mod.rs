#![allow(dead_code)]

use mumford::domain::GoodDomain;
use mumford::skeleton::{GraphEdge, MarkedGraph, Step};
use mumford::{Ball, BerkPoint, Mat2, Padic};
use num_rational::Rational64;

pub const P: u32 = 3;
pub const CAP: u32 = 20;

pub fn mat(m: [[i64; 2]; 2]) -> Mat2 {
    Mat2::from_ints(m, P, CAP)
}

pub fn ball(c: i64) -> Ball {
    Ball::open_int(c, 2, P, CAP)
}

pub fn pd(s: &str) -> Padic {
    Padic::parse_digits(s, P).unwrap()
}

pub fn ex1_gens() -> Vec<Mat2> {
    vec![mat([[-5, 32], [-8, 35]]), mat([[-13, 80], [-8, 43]])]
}

pub fn ex2_gens() -> Vec<Mat2> {
    vec![mat([[-79, 160], [-80, 161]]), mat([[-319, 1600], [-80, 401]])]
}

pub fn ex3_gens() -> Vec<Mat2> {
    vec![
        mat([[121, -120], [40, -39]]),
        mat([[121, -240], [20, -39]]),
        mat([[401, -1600], [80, -319]]),
    ]
}

pub fn ex1() -> GoodDomain {
    GoodDomain::new(ex1_gens(), vec![ball(4), ball(5)], vec![ball(1), ball(2)])
}

pub fn ex2() -> GoodDomain {
    GoodDomain::new(ex2_gens(), vec![ball(2), ball(5)], vec![ball(1), ball(4)])
}

pub fn ex3() -> GoodDomain {
    GoodDomain::new(
        ex3_gens(),
        vec![ball(1), ball(2), ball(4)],
        vec![ball(3), ball(6), ball(5)],
    )
}

/// A genus-2 group in good position built from four random disjoint balls
/// of radius 1/9: `γ_i(z) = b_i + 81·u_i/(z − a_i)` maps the outside of
/// `B(a_i)` onto the closure of `B(b_i)`.
pub fn random_genus2() -> impl proptest::strategy::Strategy<Value = GoodDomain> {
    use proptest::prelude::*;
    (
        Just((0..9i64).collect::<Vec<_>>()).prop_shuffle(),
        prop::array::uniform4(0i64..81),
        prop::array::uniform2((1i64..81).prop_filter("unit", |u| u % 3 != 0)),
    )
        .prop_map(|(res, high, units)| {
            let c: Vec<i64> = (0..4).map(|k| res[k] + 9 * high[k]).collect();
            let gens = (0..2)
                .map(|i| {
                    let (b, a) = (c[i], c[i + 2]);
                    mat([[b, 81 * units[i] - a * b], [1, -a]])
                })
                .collect();
            GoodDomain::new(gens, vec![ball(c[0]), ball(c[1])], vec![ball(c[2]), ball(c[3])])
        })
}

pub fn golden(nv: usize, edges: &[(usize, usize, i64)], loops: Vec<Vec<Step>>) -> MarkedGraph {
    MarkedGraph {
        vertices: vec![BerkPoint::gauss(P, CAP); nv],
        edges: edges
            .iter()
            .map(|&(u, v, l)| GraphEdge { u, v, length: Rational64::from_integer(l) })
            .collect(),
        loops,
    }
}

/// Loops of length 2 at each end of a bridge of length 2.
pub fn dumbbell() -> MarkedGraph {
    golden(2, &[(0, 0, 2), (1, 1, 2), (0, 1, 2)], vec![vec![(0, true)], vec![(1, true)]])
}

/// Two vertices joined by three edges of length 2.
pub fn theta_graph() -> MarkedGraph {
    golden(
        2,
        &[(0, 1, 2), (0, 1, 2), (0, 1, 2)],
        vec![vec![(0, true), (1, false)], vec![(0, true), (2, false)]],
    )
}

/// Center 0 with spokes of length 1 and a rim of length 2. Vertex 1 is
/// the branch point over 1 and 4, vertex 2 over 2 and 5, vertex 3 over 3
/// and 6; each rim edge passes through a glued pair. Loop `s_i` leaves
/// through the spoke toward `P_i` and returns through the one from `P_i'`.
pub fn honeycomb() -> MarkedGraph {
    golden(
        4,
        &[(0, 1, 1), (0, 2, 1), (0, 3, 1), (1, 2, 2), (1, 3, 2), (2, 3, 2)],
        vec![
            vec![(0, true), (4, true), (2, false)],
            vec![(1, true), (5, true), (2, false)],
            vec![(1, false), (0, true), (3, true)],
        ],
    )
}
