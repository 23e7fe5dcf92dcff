//! One PASS/FAIL line per acceptance criterion. Exits non-zero if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::{dumbbell, ex1, ex1_gens, ex2, ex3, honeycomb, pd, random_genus2, theta_graph, CAP, P};
use mumford::curve::{
    canonical_embed, canonical_embed_many, fit_plane_quartic, period_matrix, period_matrix_at, theta_m,
};
use mumford::domain::{good_position, DomainError, GoodDomain, SchottkyVerdict};
use mumford::proj::{enumerate_words, GenSet};
use mumford::skeleton::{marked_isomorphic, pairing, tropical_curve, MarkedGraph};
use mumford::whittaker::{
    extended_theta, involution_from_fixed_points, normal_form, ramification_points, ramification_to_whittaker,
    whittaker_group, WhittakerPresentation,
};
use mumford::{Mat2, Padic, ProjPoint};
use num_rational::Rational64;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

type Outcome = Result<String, String>;

fn trials(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        failure_persistence: None,
        ..Config::with_cases(cases)
    })
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fail<E: std::fmt::Debug>(e: E) -> String {
    format!("{e:?}")
}

fn pt(n: i64) -> ProjPoint {
    ProjPoint::int(n, P, CAP)
}

fn digits_match(label: &str, got: &Padic, want: &str) -> Result<(), String> {
    ensure(got.agrees_with(&pd(want)), || {
        format!("{label}: got {}, want {want}", got.format_digits())
    })
}

fn within(label: &str, t: Duration, limit: Duration) -> Result<(), String> {
    ensure(t < limit, || format!("{label} took {t:?}, limit {limit:?}"))
}

fn int_matrix(m: &[Vec<i64>]) -> Vec<Vec<Rational64>> {
    m.iter()
        .map(|row| row.iter().map(|&x| Rational64::from_integer(x)).collect())
        .collect()
}

fn matrix_check(q: &[Vec<Padic>], want: &[&[&str]]) -> Result<(), String> {
    for (i, row) in want.iter().enumerate() {
        for (j, w) in row.iter().enumerate() {
            digits_match(&format!("Q[{}][{}]", i + 1, j + 1), &q[i][j], w)?;
        }
    }
    Ok(())
}

fn criterion_1() -> Outcome {
    ensure(enumerate_words(2, 5).len() == 485, || "|Γ_5| != 485".into())?;
    let t = Instant::now();
    let pm = period_matrix(&ex1(), 10).map_err(fail)?;
    let el = t.elapsed();
    ensure(pm.m == 5, || format!("m = {}", pm.m))?;
    let (d, o) = ("(...220200000100)_3", "(...0101010101)_3");
    matrix_check(&pm.q, &[&[d, o], &[o, d]])?;
    within("genus 2", el, Duration::from_secs(5))?;
    Ok(format!("genus 2, n=10, m=5 in {el:.2?}"))
}

fn criterion_2() -> Outcome {
    let pm2 = period_matrix(&ex2(), 10).map_err(fail)?;
    let (d, o) = ("(...12010021010000)_3", "(...002000212200)_3");
    matrix_check(&pm2.q, &[&[d, o], &[o, d]])?;

    let t = Instant::now();
    let pm3 = period_matrix(&ex3(), 10).map_err(fail)?;
    let el = t.elapsed();
    ensure(pm3.m == 5, || format!("genus 3 m = {}", pm3.m))?;
    let (a, b, c) = ("(...12020022210)_3", "(...20020002120)_3", "(...020201120.1)_3");
    matrix_check(
        &pm3.q,
        &[
            &["(...11201000010000)_3", a, b],
            &[a, "(...10101010010000)_3", c],
            &[b, c, "(...21010100010000)_3"],
        ],
    )?;
    within("genus 3", el, Duration::from_secs(60))?;
    Ok(format!("genus 2 and genus 3 digits match, genus 3 in {el:.2?}"))
}

fn sorted_lengths(gr: &MarkedGraph) -> Vec<Rational64> {
    let mut v: Vec<Rational64> = gr.edges.iter().map(|e| e.length).collect();
    v.sort();
    v
}

fn criterion_3() -> Outcome {
    for (name, dom, golden) in [
        ("dumbbell", ex1(), dumbbell()),
        ("theta", ex2(), theta_graph()),
        ("honeycomb", ex3(), honeycomb()),
    ] {
        let gr = tropical_curve(&dom).map_err(fail)?;
        ensure(marked_isomorphic(&gr, &golden), || format!("{name}: not isomorphic to the golden graph"))?;
        ensure(sorted_lengths(&gr) == sorted_lengths(&golden), || format!("{name}: edge lengths differ"))?;
    }
    Ok("dumbbell, theta and honeycomb match with marking".into())
}

fn criterion_4() -> Outcome {
    let vals = period_matrix(&ex3(), 10).map_err(fail)?.val_matrix();
    let want = vec![vec![4, 1, 1], vec![1, 4, -1], vec![1, -1, 4]];
    ensure(vals == want, || format!("val(Q) = {vals:?}"))?;
    let pr = pairing(&tropical_curve(&ex3()).map_err(fail)?);
    ensure(pr == int_matrix(&want), || format!("pairing = {pr:?}"))?;
    Ok("val(Q) = pairing = [[4,1,1],[1,4,-1],[1,-1,4]]".into())
}

const QUARTIC: [&str; 14] = [
    "(...11101)_3",
    "(...00211)_3",
    "(...1020.2)_3",
    "(...110.21)_3",
    "(...1002.1)_3",
    "(...122)_3",
    "(...222.02)_3",
    "(...222.02)_3",
    "(...21101)_3",
    "(...2122)_3",
    "(...2201)_3",
    "(...0202.2)_3",
    "(...10102)_3",
    "(...01221)_3",
];

fn criterion_5() -> Outcome {
    let t = Instant::now();
    let dom = ex3();
    let z17 = canonical_embed(&dom, &pt(17), 10).map_err(fail)?;
    ensure(z17.m == 6, || format!("m = {}", z17.m))?;
    let want = ["(...2100012121)_3", "(...2211022001.1)_3", "(...2221222111.1)_3"];
    for (k, (x, w)) in z17.coords.iter().zip(want).enumerate() {
        digits_match(&format!("coordinate {k}"), x, w)?;
    }

    let n = 14;
    let zs: Vec<ProjPoint> = std::iter::once(0).chain(7..=16).chain(18..=26).map(pt).collect();
    let pts = canonical_embed_many(&dom, &zs, n).map_err(fail)?;
    let quartic = fit_plane_quartic(&pts).map_err(fail)?;
    ensure(quartic.coeffs[0] == Padic::one(P, quartic.coeffs[0].cap()), || "C_1 != 1".into())?;
    for (k, w) in QUARTIC.iter().enumerate() {
        digits_match(&format!("C_{}", k + 2), &quartic.coeffs[k + 1], w)?;
    }
    let deep17 = canonical_embed(&dom, &pt(17), n).map_err(fail)?;
    let res = quartic.residual(&deep17).map_err(fail)?.val_bound();
    ensure(res >= 10, || format!("residual valuation {res}"))?;
    let el = t.elapsed();
    within("embedding and fit", el, Duration::from_secs(120))?;
    Ok(format!("z=17 digits and 15 coefficients match, residual val {res}, {el:.1?}"))
}

fn verdict_domain(v: SchottkyVerdict) -> Result<(GoodDomain, usize), String> {
    match v {
        SchottkyVerdict::GoodPosition { domain, m } => Ok((domain, m)),
        other => Err(format!("expected GoodPosition, got {}", other.kind())),
    }
}

fn criterion_6() -> Outcome {
    // (a)
    let (dom, m) = verdict_domain(good_position(&ex1_gens(), 3).map_err(fail)?)?;
    ensure(m <= 3, || format!("(a) m = {m}"))?;
    ensure(dom.c().map_err(fail)? == Rational64::from_integer(2), || "(a) c != 2".into())?;

    // (b) New generators are words in h1 = γ1, h2 = γ1γ2; in the γ basis
    // a word's class is its abelianization times [[1,0],[1,1]].
    let g = ex1_gens();
    let input = vec![g[0].clone(), g[0].mul(&g[1])];
    let (dom, _) = verdict_domain(good_position(&input, 4).map_err(fail)?)?;
    ensure(dom.check().map_err(fail)?.is_none(), || "(b) domain not certified".into())?;
    let vals = period_matrix(&dom, 6).map_err(fail)?.val_matrix();
    let pr = pairing(&tropical_curve(&dom).map_err(fail)?);
    ensure(pr == int_matrix(&vals), || format!("(b) val(Q) {vals:?} vs pairing {pr:?}"))?;
    let classes: Vec<[i64; 2]> = dom
        .words
        .iter()
        .map(|w| {
            let a = w.abelianize(2);
            [a[0] + a[1], a[1]]
        })
        .collect();
    for i in 0..2 {
        for j in 0..2 {
            let want = 2 * (classes[i][0] * classes[j][0] + classes[i][1] * classes[j][1]);
            ensure(vals[i][j] == want, || format!("(b) val(Q) {vals:?} vs basis change of [[2,0],[0,2]]"))?;
        }
    }

    // (c)
    let mut runner = trials(32);
    let strategy = (prop::sample::subsequence((0..27i64).collect::<Vec<_>>(), 3), any::<bool>());
    runner
        .run(&strategy, |(fx, first)| {
            let s0 = involution_from_fixed_points(&pt(fx[0]), &pt(fx[1])).unwrap().mat;
            let s1 = involution_from_fixed_points(&pt(fx[2]), &pt(fx[0] + 81)).unwrap().mat;
            let mut input = vec![s0.mul(&s1), s0.clone()];
            if first {
                input.reverse();
            }
            match good_position(&input, 3).unwrap() {
                SchottkyVerdict::NonHyperbolic(w, m) => {
                    prop_assert!(w.eval(&GenSet::new(&input)).pgl_eq(&m));
                    prop_assert!(!m.is_hyperbolic().unwrap());
                }
                other => prop_assert!(false, "got {}", other.kind()),
            }
            Ok(())
        })
        .map_err(|e| format!("(c) {e}"))?;

    // (d)
    let adversarial = vec![g[0].clone(), g[0].pow(100).mul(&g[1])];
    let t = Instant::now();
    let v = good_position(&adversarial, 4);
    let el = t.elapsed();
    ensure(matches!(v, Err(DomainError::Inconclusive { max_m: 4 })), || {
        format!("(d) got {:?}", v.map(|v| v.kind()))
    })?;
    within("(d)", el, Duration::from_secs(60))?;
    Ok(format!("(a) c=2 at m={m}; (b) val(Q) matches pairing and basis change; (c) 32 witnesses; (d) inconclusive in {el:.2?}"))
}

fn criterion_7() -> Outcome {
    let gs = ex1().gen_set();
    let mut runner = trials(200);
    let skipped = std::cell::Cell::new(0usize);
    runner
        .run(&(-60i64..60, -60i64..60, -60i64..60, 0usize..3), |(a, b, z, m)| {
            prop_assume!(a != b);
            let (Ok(t1), Ok(t2)) = (theta_m(&gs, &pt(a), &pt(b), &pt(z), m), theta_m(&gs, &pt(b), &pt(a), &pt(z), m))
            else {
                skipped.set(skipped.get() + 1);
                return Ok(());
            };
            prop_assert!(t1.mul(&t2).approx_eq(&Padic::one(P, CAP)));
            Ok(())
        })
        .map_err(|e| format!("reciprocity: {e}"))?;

    let mut runner = trials(200);
    runner
        .run(&(random_genus2(), 1usize..3), |(dom, m)| {
            prop_assert_eq!(dom.check().unwrap(), None);
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
                    prop_assert!(ladder.val_bound() >= bound, "ladder ({}, {}): {}", i, j, ladder);
                    let sym = q.q[i][j].div(&q.q[j][i]).unwrap().sub(&one);
                    prop_assert!(sym.val_bound() >= bound, "symmetry ({}, {}): {}", i, j, sym);
                }
            }
            Ok(())
        })
        .map_err(|e| format!("period matrices: {e}"))?;
    Ok(format!("200 reciprocity trials ({} on orbit points), 200 random genus-2 groups", skipped.get()))
}

fn whittaker_example() -> WhittakerPresentation {
    let invs = [(0, 9), (1, 10), (2, 11)]
        .iter()
        .map(|&(a, b)| involution_from_fixed_points(&pt(a), &pt(b)).unwrap())
        .collect();
    whittaker_group(invs).unwrap()
}

fn sorted_residues(v: &[Padic], d: i64) -> Result<Vec<String>, String> {
    let mut out = v
        .iter()
        .map(|x| x.residue(d).map(|r| r.to_string()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(fail)?;
    out.sort();
    Ok(out)
}

fn criterion_8() -> Outcome {
    let t = Instant::now();
    let w = whittaker_example();
    let n = 10;
    let rd = ramification_points(&w, n).map_err(fail)?;

    // Escalating m past the settled index leaves the first n digits alone.
    let cap = rd.raw[0].0.cap();
    let invs: Vec<Mat2> = w.mats().iter().map(|m| m.with_cap(cap)).collect();
    let fixed: Vec<ProjPoint> = w.invs.iter().flat_map(|s| [s.a.with_cap(cap), s.b.with_cap(cap)]).collect();
    let raw: Vec<&Padic> = rd.raw.iter().flat_map(|(x, y)| [x, y]).collect();
    for m in rd.m..=rd.m + 2 {
        for (z, want) in fixed.iter().zip(&raw) {
            let got = extended_theta(&invs, &rd.base.0, &rd.base.1, z, m).map_err(fail)?;
            let v = want.valuation().ok_or("zero branch value")?;
            ensure(got.sub(want).val_bound() >= v + n as i64, || format!("m={m}: {got} vs {want}"))?;
        }
    }

    let nf = normal_form(&w).map_err(fail)?;
    let back = ramification_to_whittaker(&rd.normalized, 4).map_err(fail)?;
    ensure(sorted_residues(&back.xs, 4)? == sorted_residues(&nf.xs, 4)?, || {
        format!("round trip: {:?} vs {:?}", back.xs, nf.xs)
    })?;
    ensure(sorted_residues(&back.seeds, 2)? == sorted_residues(&nf.xs, 2)?, || "seeds differ mod 9".into())?;
    let p = |x| Padic::from_int(x, P, CAP);
    ensure(rd.normalized[0].add(&p(4).mul(&nf.xs[0])).val_bound() >= 2, || "r_0 != -4x_0 mod 9".into())?;
    for k in 1..nf.xs.len() {
        ensure(rd.normalized[k].add(&p(2).mul(&nf.xs[k])).val_bound() >= 2, || {
            format!("r_{k} != -2x_{k} mod 9")
        })?;
    }
    let el = t.elapsed();
    within("whittaker", el, Duration::from_secs(300))?;
    Ok(format!("settled at m={}, stable through m={}, recovered mod 3^4 in {el:.2?}", rd.m, rd.m + 2))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("genus-2 period matrix", criterion_1),
        ("genus-2 and genus-3 period matrices", criterion_2),
        ("skeleton goldens", criterion_3),
        ("val(Q) equals the cycle pairing", criterion_4),
        ("canonical embedding and quartic", criterion_5),
        ("good position and Schottky test", criterion_6),
        ("theta properties", criterion_7),
        ("Whittaker round trip", criterion_8),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panic: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS criterion {} ({name}): {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {} ({name}): {detail}", k + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
