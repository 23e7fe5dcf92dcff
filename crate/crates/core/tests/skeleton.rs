mod common;

use common::{ball, dumbbell, ex1, ex1_gens, ex2, ex3, honeycomb, random_genus2, theta_graph};
use mumford::curve::period_matrix;
use mumford::domain::GoodDomain;
use mumford::skeleton::{
    export_graph, marked_isomorphic, pairing, tropical_curve, GraphFormat,
};
use num_rational::Rational64;
use proptest::prelude::*;

fn r(n: i64) -> Rational64 {
    Rational64::from_integer(n)
}

fn int_pairing(m: &[Vec<i64>]) -> Vec<Vec<Rational64>> {
    m.iter().map(|row| row.iter().map(|&x| r(x)).collect()).collect()
}

#[test]
fn golden_graphs_are_consistent() {
    for (gr, want) in [
        (dumbbell(), vec![vec![2, 0], vec![0, 2]]),
        (theta_graph(), vec![vec![4, 2], vec![2, 4]]),
        (honeycomb(), vec![vec![4, 1, 1], vec![1, 4, -1], vec![1, -1, 4]]),
    ] {
        assert!(gr.loops_closed());
        assert_eq!(gr.betti(), gr.genus());
        assert_eq!(pairing(&gr), int_pairing(&want));
    }
    assert!(!marked_isomorphic(&dumbbell(), &theta_graph()));
}

#[test]
fn example_one_is_a_dumbbell() {
    let gr = tropical_curve(&ex1()).unwrap();
    assert!(marked_isomorphic(&gr, &dumbbell()));
    assert_eq!(pairing(&gr), int_pairing(&[vec![2, 0], vec![0, 2]]));
}

#[test]
fn example_two_is_a_theta_graph() {
    let gr = tropical_curve(&ex2()).unwrap();
    assert!(marked_isomorphic(&gr, &theta_graph()));
    assert_eq!(gr.edges.iter().map(|e| e.length).sum::<Rational64>(), r(6));
}

#[test]
fn example_three_is_a_honeycomb() {
    let gr = tropical_curve(&ex3()).unwrap();
    assert_eq!(gr.vertices.len(), 4);
    assert!(marked_isomorphic(&gr, &honeycomb()));
    let mut lengths: Vec<Rational64> = gr.edges.iter().map(|e| e.length).collect();
    lengths.sort();
    assert_eq!(lengths, [1, 1, 1, 2, 2, 2].map(r));
    assert_eq!(pairing(&gr), int_pairing(&[vec![4, 1, 1], vec![1, 4, -1], vec![1, -1, 4]]));
    // Flipping a loop breaks the marked isomorphism.
    let mut flipped = gr.clone();
    flipped.reverse_loop(2);
    assert!(!marked_isomorphic(&flipped, &honeycomb()));
    assert_eq!(pairing(&flipped)[1][2], r(1));
}

#[test]
fn single_loop() {
    let dom = GoodDomain::new(vec![ex1_gens()[0].clone()], vec![ball(4)], vec![ball(1)]);
    let gr = tropical_curve(&dom).unwrap();
    assert_eq!((gr.vertices.len(), gr.edges.len()), (1, 1));
    assert_eq!(gr.loop_length(0), r(2));
    let dot = export_graph(&gr, GraphFormat::Dot);
    assert_eq!(dot.matches(" -- ").count(), 1);
    assert_eq!(dot.matches(";\n").count(), 2);
}

#[test]
fn exports() {
    let gr = tropical_curve(&ex1()).unwrap();
    let dot = export_graph(&gr, GraphFormat::Dot);
    assert!(dot.starts_with("graph skeleton {"));
    assert_eq!(dot.matches(" -- ").count(), 3);
    assert_eq!(dot.matches("label=\"2\"").count(), 3);
    assert_eq!(dot, export_graph(&tropical_curve(&ex1()).unwrap(), GraphFormat::Dot));

    let hc = tropical_curve(&ex3()).unwrap();
    let j: serde_json::Value = serde_json::from_str(&export_graph(&hc, GraphFormat::Json)).unwrap();
    assert_eq!(j["vertices"].as_array().unwrap().len(), 4);
    assert_eq!(j["edges"].as_array().unwrap().len(), 6);
    for s in ["s1", "s2", "s3"] {
        let steps = j["marking"][s].as_array().unwrap();
        assert_eq!(steps.len(), 3);
        assert!(steps.iter().all(|st| st.as_array().unwrap().len() == 3));
    }
    assert_eq!(j["pairing"][1][2], "-1");
    let dot = export_graph(&hc, GraphFormat::Dot);
    for s in ["s1", "s2", "s3"] {
        assert!(dot.contains(s));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pairing_matches_period_valuations(dom in random_genus2()) {
        let gr = tropical_curve(&dom).unwrap();
        prop_assert_eq!(gr.betti(), 2);
        prop_assert!(gr.loops_closed());
        let pts = dom.points().unwrap();
        for i in 0..2 {
            prop_assert_eq!(gr.loop_length(i), pts[i].distance(&pts[2 + i]));
            prop_assert!(gr.edges.iter().all(|e| e.length > r(0)));
        }
        let vals = period_matrix(&dom, 6).unwrap().val_matrix();
        let want: Vec<Vec<Rational64>> = vals.iter().map(|row| row.iter().map(|&v| r(v)).collect()).collect();
        prop_assert_eq!(pairing(&gr), want);
    }
}
