//! Involutions, Whittaker groups, branch values of the hyperelliptic
//! quotient via the theta function of the free product, and Kadziela's
//! digit-by-digit inversion from branch values back to fixed points.

use num_rational::Rational64;
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::berkovich::{Ball, BallError};
use crate::padic::{guard_digits, Padic, PadicError};
use crate::proj::{Mat2, ProjError, ProjPoint};

/// Largest word length tried when waiting for branch values to settle.
pub const MAX_THETA_M: usize = 40;

/// Word budget per evaluation point while escalating `m`.
pub const MAX_THETA_WORDS: usize = 1 << 20;

/// Ceilings for the brute-force inversion.
pub const MAX_INVERSE_GENUS: usize = 3;
pub const MAX_INVERSE_DIGITS: u32 = 6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WhittakerError {
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error(transparent)]
    Proj(#[from] ProjError),
    #[error(transparent)]
    Ball(#[from] BallError),
    #[error("fixed points coincide")]
    EqualFixedPoints,
    #[error("free product condition violated: closed balls {0} and {1} meet")]
    FreeProduct(usize, usize),
    #[error("s{0}s0 is not hyperbolic")]
    NotHyperbolic(usize),
    #[error("pole hit at word {0:?}")]
    Pole(Vec<usize>),
    #[error("no admissible theta base points found")]
    NoBasePoints,
    #[error("branch values did not settle by m = {0}")]
    NoConvergence(usize),
    #[error("fixed points admit no normalization 0 < |b0| < |a1| <= ... < 1")]
    NoNormalization,
    #[error("NOT VALID")]
    NotValid,
    #[error("search exhausted at digit t = {0}")]
    SearchExhausted(u32),
    #[error("outside the supported range: genus <= {MAX_INVERSE_GENUS}, digits <= {MAX_INVERSE_DIGITS}")]
    TooLarge,
}

/// An element of order two, given by its fixed points.
#[derive(Clone, Debug)]
pub struct Involution {
    pub a: ProjPoint,
    pub b: ProjPoint,
    pub mat: Mat2,
}

/// `s = [[a,b],[1,1]]·diag(1,−1)·[[a,b],[1,1]]⁻¹`, i.e.
/// `(1/(a−b))·[[a+b, −2ab], [2, −(a+b)]]`; `z ↦ 2a − z` when `b = ∞`.
pub fn involution_from_fixed_points(a: &ProjPoint, b: &ProjPoint) -> Result<Involution, WhittakerError> {
    if a == b {
        return Err(WhittakerError::EqualFixedPoints);
    }
    let mat = match (a, b) {
        (ProjPoint::Finite(x), ProjPoint::Finite(y)) => {
            let d = x.sub(y);
            if d.is_zero() {
                return Err(WhittakerError::EqualFixedPoints);
            }
            let k = d.inv()?;
            let two = Padic::from_int(2, x.prime(), x.cap());
            let s = x.add(y);
            Mat2::new(
                s.mul(&k),
                two.mul(x).mul(y).neg().mul(&k),
                two.mul(&k),
                s.neg().mul(&k),
            )
        }
        (ProjPoint::Finite(x), ProjPoint::Infinity) | (ProjPoint::Infinity, ProjPoint::Finite(x)) => {
            let (p, cap) = (x.prime(), x.cap());
            Mat2::new(
                Padic::from_int(-1, p, cap),
                Padic::from_int(2, p, cap).mul(x),
                Padic::zero(p, cap),
                Padic::one(p, cap),
            )
        }
        _ => return Err(WhittakerError::EqualFixedPoints),
    };
    Ok(Involution {
        a: a.clone(),
        b: b.clone(),
        mat,
    })
}

/// Involutions `s_0..s_g` with disjoint closed balls and the Whittaker
/// generators `s_i·s_0`.
#[derive(Clone, Debug)]
pub struct WhittakerPresentation {
    pub invs: Vec<Involution>,
    pub gens: Vec<Mat2>,
    /// Smallest open ball around each fixed-point pair.
    pub balls: Vec<Ball>,
}

impl WhittakerPresentation {
    pub fn g(&self) -> usize {
        self.gens.len()
    }

    pub fn mats(&self) -> Vec<Mat2> {
        self.invs.iter().map(|s| s.mat.clone()).collect()
    }
}

pub fn whittaker_group(invs: Vec<Involution>) -> Result<WhittakerPresentation, WhittakerError> {
    let mut balls = Vec::with_capacity(invs.len());
    for s in &invs {
        let (ProjPoint::Finite(a), ProjPoint::Finite(b)) = (&s.a, &s.b) else {
            return Err(WhittakerError::Pole(Vec::new()));
        };
        let v = a.sub(b).valuation().ok_or(WhittakerError::EqualFixedPoints)?;
        balls.push(Ball::open(a.clone(), Rational64::from_integer(v - 1)));
    }
    for i in 0..balls.len() {
        for j in (i + 1)..balls.len() {
            if !balls[i].closure().closures_disjoint(&balls[j].closure())? {
                return Err(WhittakerError::FreeProduct(i, j));
            }
        }
    }
    let s0 = &invs[0].mat;
    let mut gens = Vec::with_capacity(invs.len() - 1);
    for (i, s) in invs.iter().enumerate().skip(1) {
        let w = s.mat.mul(s0);
        if !w.is_hyperbolic()? {
            return Err(WhittakerError::NotHyperbolic(i));
        }
        gens.push(w);
    }
    Ok(WhittakerPresentation { invs, gens, balls })
}

/// Visit every alternating word (no letter twice in a row) of length at
/// most `m`, with the images of `start`. Words grow on the left.
fn visit_alternating<F>(
    invs: &[Mat2],
    m: usize,
    start: &[ProjPoint],
    visit: &mut F,
) -> Result<(), WhittakerError>
where
    F: FnMut(&[usize], &[ProjPoint]) -> Result<(), WhittakerError>,
{
    fn rec<F>(
        invs: &[Mat2],
        m: usize,
        word: &mut Vec<usize>,
        pts: &[ProjPoint],
        visit: &mut F,
    ) -> Result<(), WhittakerError>
    where
        F: FnMut(&[usize], &[ProjPoint]) -> Result<(), WhittakerError>,
    {
        visit(word, pts)?;
        if word.len() == m {
            return Ok(());
        }
        for (l, s) in invs.iter().enumerate() {
            if word.first() == Some(&l) {
                continue;
            }
            let next: Vec<ProjPoint> = pts.iter().map(|x| s.apply(x)).collect::<Result<_, _>>()?;
            word.insert(0, l);
            let r = rec(invs, m, word, &next, visit);
            word.remove(0);
            r?;
        }
        Ok(())
    }
    rec(invs, m, &mut Vec::new(), start, visit)
}

/// Number of alternating words of length at most `m` on `k` letters.
pub fn alternating_count(k: usize, m: usize) -> usize {
    let mut total = 1;
    let mut level = 1;
    for n in 1..=m {
        level *= if n == 1 { k } else { k - 1 };
        total += level;
    }
    total
}

fn theta_factor(z: &ProjPoint, x: &ProjPoint, y: &ProjPoint) -> Result<Padic, PadicError> {
    match (z, x, y) {
        (ProjPoint::Finite(z), ProjPoint::Finite(x), ProjPoint::Finite(y)) => z.sub(x).div(&z.sub(y)),
        _ => Err(PadicError::DivisionByZero),
    }
}

/// Product of `(z−γa)/(z−γb)` over alternating words with length in
/// `lo..=hi`.
pub fn theta_levels(
    invs: &[Mat2],
    a: &ProjPoint,
    b: &ProjPoint,
    z: &ProjPoint,
    lo: usize,
    hi: usize,
) -> Result<Padic, WhittakerError> {
    let (p, cap) = (invs[0].prime(), invs[0].cap());
    let mut acc = Padic::one(p, cap);
    if z.is_infinity() {
        return Ok(acc);
    }
    let mut bad = None;
    let r = visit_alternating(invs, hi, &[a.clone(), b.clone()], &mut |w, pts| {
        if w.len() < lo {
            return Ok(());
        }
        match theta_factor(z, &pts[0], &pts[1]) {
            Ok(t) => {
                acc = acc.mul(&t);
                Ok(())
            }
            Err(e) => {
                bad = Some(w.to_vec());
                Err(e.into())
            }
        }
    });
    match (r, bad) {
        (Ok(()), _) => Ok(acc),
        (Err(_), Some(w)) => Err(WhittakerError::Pole(w)),
        (Err(e), None) => Err(e),
    }
}

/// `G(z) = ∏ (z−γa)/(z−γb)` over alternating words of length `≤ m`.
pub fn extended_theta(
    invs: &[Mat2],
    a: &ProjPoint,
    b: &ProjPoint,
    z: &ProjPoint,
    m: usize,
) -> Result<Padic, WhittakerError> {
    theta_levels(invs, a, b, z, 0, m)
}

/// `L_n(z)`: the factors of word length exactly `n`.
pub fn l_factor(invs: &[Mat2], a: &ProjPoint, b: &ProjPoint, z: &ProjPoint, n: usize) -> Result<Padic, WhittakerError> {
    theta_levels(invs, a, b, z, n, n)
}

/// Fixed points moved to `{0, x_0, …, x_{2g−2}, 1, ∞}` with
/// `0 < |x_0| < |x_1| ≤ … ≤ |x_{2g−2}| < 1`; pairs are `{0, x_0}`,
/// `{x_1, x_2}`, …, `{1, ∞}`.
#[derive(Clone, Debug)]
pub struct NormalForm {
    /// Möbius map doing the normalization.
    pub mu: Mat2,
    /// The original fixed points sent to 0, 1 and ∞.
    pub to_zero: ProjPoint,
    pub to_one: ProjPoint,
    pub to_inf: ProjPoint,
    /// Original fixed point behind each `x_k`.
    pub sources: Vec<ProjPoint>,
    pub xs: Vec<Padic>,
}

impl NormalForm {
    /// A normal form given directly by `x_0, …, x_{2g−2}`.
    pub fn from_xs(xs: Vec<Padic>) -> Result<NormalForm, WhittakerError> {
        if xs.len() % 2 == 0 || !chain_holds(&xs) {
            return Err(WhittakerError::NoNormalization);
        }
        let (p, cap) = (xs[0].prime(), xs[0].cap());
        Ok(NormalForm {
            mu: Mat2::identity(p, cap),
            to_zero: ProjPoint::int(0, p, cap),
            to_one: ProjPoint::int(1, p, cap),
            to_inf: ProjPoint::Infinity,
            sources: xs.iter().map(|x| ProjPoint::Finite(x.clone())).collect(),
            xs,
        })
    }

    pub fn involutions(&self) -> Result<Vec<Mat2>, WhittakerError> {
        normalized_involutions(&self.xs)
    }
}

/// Involutions for `S = {0, x_0, …, 1, ∞}` in the pairing above.
pub fn normalized_involutions(xs: &[Padic]) -> Result<Vec<Mat2>, WhittakerError> {
    let (p, cap) = (xs[0].prime(), xs[0].cap());
    let f = |x: &Padic| ProjPoint::Finite(x.clone());
    let mut out = vec![involution_from_fixed_points(&ProjPoint::int(0, p, cap), &f(&xs[0]))?.mat];
    for pair in xs[1..].chunks(2) {
        out.push(involution_from_fixed_points(&f(&pair[0]), &f(&pair[1]))?.mat);
    }
    out.push(involution_from_fixed_points(&ProjPoint::int(1, p, cap), &ProjPoint::Infinity)?.mat);
    Ok(out)
}

/// `z ↦ ((z−p0)/(z−p∞))·((p1−p∞)/(p1−p0))`.
fn three_point_map(p0: &ProjPoint, p1: &ProjPoint, pinf: &ProjPoint, p: u32, cap: u32) -> Result<Mat2, WhittakerError> {
    let one = Padic::one(p, cap);
    let zero = Padic::zero(p, cap);
    // columns: z − p0 and z − p∞ as linear forms (coefficient, constant)
    let form = |x: &ProjPoint| match x {
        ProjPoint::Finite(v) => (one.clone(), v.neg()),
        ProjPoint::Infinity => (zero.clone(), one.clone()),
    };
    let (a, b) = form(p0);
    let (c, d) = form(pinf);
    let base = Mat2::new(a, b, c, d);
    let at1 = match base.apply(p1)? {
        ProjPoint::Finite(v) if !v.is_zero() => v,
        _ => return Err(WhittakerError::NoNormalization),
    };
    let k = at1.inv()?;
    Ok(Mat2::new(base.a.mul(&k), base.b.mul(&k), base.c.clone(), base.d.clone()))
}

/// The first normalization, over role assignments in a fixed order,
/// satisfying the strict/weak valuation chain.
pub fn normal_form(pres: &WhittakerPresentation) -> Result<NormalForm, WhittakerError> {
    let pairs: Vec<(ProjPoint, ProjPoint)> = pres.invs.iter().map(|s| (s.a.clone(), s.b.clone())).collect();
    let (p, cap) = {
        let m = &pres.invs[0].mat;
        (m.prime(), m.cap())
    };
    let n = pairs.len();
    for i0 in 0..n {
        for i1 in 0..n {
            if i1 == i0 {
                continue;
            }
            for flip0 in [false, true] {
                for flip1 in [false, true] {
                    let (z0, x0) = oriented(&pairs[i0], flip0);
                    let (one, inf) = oriented(&pairs[i1], flip1);
                    let mu = three_point_map(&z0, &one, &inf, p, cap)?;
                    let img = |x: &ProjPoint| -> Result<Option<Padic>, WhittakerError> {
                        Ok(match mu.apply(x)? {
                            ProjPoint::Finite(v) => Some(v),
                            ProjPoint::Infinity => None,
                        })
                    };
                    let Some(b0) = img(&x0)? else { continue };
                    let mut middle: Vec<(Padic, ProjPoint, Padic, ProjPoint)> = Vec::new();
                    let mut ok = true;
                    for (k, pair) in pairs.iter().enumerate() {
                        if k == i0 || k == i1 {
                            continue;
                        }
                        match (img(&pair.0)?, img(&pair.1)?) {
                            (Some(u), Some(v)) => {
                                let (u, su, v, sv) = if u.val_bound() >= v.val_bound() {
                                    (u, pair.0.clone(), v, pair.1.clone())
                                } else {
                                    (v, pair.1.clone(), u, pair.0.clone())
                                };
                                middle.push((u, su, v, sv));
                            }
                            _ => ok = false,
                        }
                    }
                    if !ok {
                        continue;
                    }
                    middle.sort_by_key(|m| std::cmp::Reverse(m.0.val_bound()));
                    let mut xs = vec![b0.clone()];
                    let mut sources = vec![x0.clone()];
                    for (u, su, v, sv) in middle {
                        xs.push(u);
                        sources.push(su);
                        xs.push(v);
                        sources.push(sv);
                    }
                    if chain_holds(&xs) {
                        return Ok(NormalForm {
                            mu,
                            to_zero: z0,
                            to_one: one,
                            to_inf: inf,
                            sources,
                            xs,
                        });
                    }
                }
            }
        }
    }
    Err(WhittakerError::NoNormalization)
}

fn oriented(pair: &(ProjPoint, ProjPoint), flip: bool) -> (ProjPoint, ProjPoint) {
    if flip {
        (pair.1.clone(), pair.0.clone())
    } else {
        (pair.0.clone(), pair.1.clone())
    }
}

/// `0 < |x_0| < |x_1| ≤ … ≤ |x_last| < 1`.
fn chain_holds(xs: &[Padic]) -> bool {
    let vals: Option<Vec<i64>> = xs.iter().map(|x| x.valuation()).collect();
    let Some(v) = vals else { return false };
    if v.iter().any(|&x| x < 1) {
        return false;
    }
    if v.len() > 1 && v[0] <= v[1] {
        return false;
    }
    v.windows(2).skip(1).all(|w| w[0] >= w[1])
}

/// Branch values of the hyperelliptic quotient.
#[derive(Clone, Debug)]
pub struct RamificationData {
    /// `G(a_i), G(b_i)` for each pair of the presentation, in order.
    pub raw: Vec<(Padic, Padic)>,
    /// `r_k`, the normalized value belonging to `x_k` of the normal form;
    /// 0, 1 and ∞ are implicit.
    pub normalized: Vec<Padic>,
    pub base: (ProjPoint, ProjPoint),
    /// Word length at which the values settled.
    pub m: usize,
    pub n: u32,
}

impl RamificationData {
    pub fn to_json(&self) -> Value {
        let raw: Vec<[String; 2]> = self
            .raw
            .iter()
            .map(|(x, y)| [x.format_digits(), y.format_digits()])
            .collect();
        let mut values: Vec<String> = vec!["0".into()];
        values.extend(self.normalized.iter().map(|x| x.format_digits()));
        values.push("1".into());
        values.push("inf".into());
        let pt = |x: &ProjPoint| match x {
            ProjPoint::Finite(v) => v.to_string(),
            ProjPoint::Infinity => "inf".into(),
        };
        json!({
            "raw": raw,
            "normalized": values,
            "theta_base": [pt(&self.base.0), pt(&self.base.1)],
            "m": self.m,
            "n": self.n,
        })
    }
}

/// `|1 − G(s_0 ∞)| ≤ p^(−1)`, i.e. `G(∞) ≈ G(s_0∞)`.
fn invariance_holds(invs: &[Mat2], a: &ProjPoint, b: &ProjPoint, m: usize) -> Result<bool, WhittakerError> {
    let z = invs[0].apply(&ProjPoint::Infinity)?;
    let gz = extended_theta(invs, a, b, &z, m)?;
    let one = Padic::one(gz.prime(), gz.cap());
    Ok(one.sub(&gz).val_bound() >= 1)
}

/// No orbit point of `a` or `b` within word length 3 is ∞, a fixed point,
/// or the other base point.
fn admissible(invs: &[Mat2], a: &ProjPoint, b: &ProjPoint, fixed: &[ProjPoint]) -> Result<bool, WhittakerError> {
    let mut ok = true;
    let r = visit_alternating(invs, 3, &[a.clone(), b.clone()], &mut |_, pts| {
        for x in pts {
            if x.is_infinity() || fixed.iter().any(|f| f.approx_eq(x)) {
                ok = false;
            }
        }
        if pts[0].approx_eq(b) || pts[1].approx_eq(a) {
            ok = false;
        }
        Ok(())
    });
    match r {
        Ok(()) => Ok(ok),
        Err(WhittakerError::Padic(_)) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Theta base points from a sweep over small integers.
pub fn choose_base_points(pres: &WhittakerPresentation) -> Result<(ProjPoint, ProjPoint), WhittakerError> {
    let invs = pres.mats();
    let (p, cap) = (invs[0].prime(), invs[0].cap());
    let fixed: Vec<ProjPoint> = pres.invs.iter().flat_map(|s| [s.a.clone(), s.b.clone()]).collect();
    let bound = 6 * p as i64;
    for a in 0..bound {
        for b in 0..bound {
            if a == b {
                continue;
            }
            let (pa, pb) = (ProjPoint::int(a, p, cap), ProjPoint::int(b, p, cap));
            if !admissible(&invs, &pa, &pb, &fixed)? {
                continue;
            }
            if invariance_holds(&invs, &pa, &pb, 3)? {
                return Ok((pa, pb));
            }
        }
    }
    Err(WhittakerError::NoBasePoints)
}

/// Evaluate `G` at each point, raising `m` until two consecutive values
/// agree to `n` significant digits.
pub fn settled_theta(
    invs: &[Mat2],
    a: &ProjPoint,
    b: &ProjPoint,
    zs: &[ProjPoint],
    n: u32,
) -> Result<(Vec<Padic>, usize), WhittakerError> {
    let eval = |m: usize| -> Result<Vec<Padic>, WhittakerError> {
        zs.par_iter().map(|z| extended_theta(invs, a, b, z, m)).collect()
    };
    let mut prev = eval(1)?;
    for m in 2..=MAX_THETA_M {
        if alternating_count(invs.len(), m) > MAX_THETA_WORDS {
            return Err(WhittakerError::NoConvergence(m - 1));
        }
        let cur = eval(m)?;
        let settled = prev.iter().zip(&cur).all(|(x, y)| {
            let v = y.valuation().unwrap_or(i64::MAX / 2);
            x.sub(y).val_bound() >= v + n as i64
        });
        if settled {
            return Ok((cur.iter().map(|x| x.truncate_rel(n)).collect(), m));
        }
        prev = cur;
    }
    Err(WhittakerError::NoConvergence(MAX_THETA_M))
}

/// Branch values `G(a_i), G(b_i)` to `n` digits and their normalization.
pub fn ramification_points(pres: &WhittakerPresentation, n: u32) -> Result<RamificationData, WhittakerError> {
    let cap = n + guard_digits();
    let invs: Vec<Mat2> = pres.mats().iter().map(|m| m.with_cap(cap)).collect();
    let (a, b) = choose_base_points(pres)?;
    let (a, b) = (a.with_cap(cap), b.with_cap(cap));
    let fixed: Vec<ProjPoint> = pres
        .invs
        .iter()
        .flat_map(|s| [s.a.with_cap(cap), s.b.with_cap(cap)])
        .collect();
    let (vals, m) = settled_theta(&invs, &a, &b, &fixed, n)?;
    let raw: Vec<(Padic, Padic)> = vals.chunks(2).map(|c| (c[0].clone(), c[1].clone())).collect();

    let nf = normal_form(pres)?;
    let value_at = |x: &ProjPoint| -> ProjPoint {
        let k = fixed.iter().position(|f| f.approx_eq(&x.with_cap(cap))).expect("a fixed point");
        ProjPoint::Finite(vals[k].clone())
    };
    let nu = three_point_map(&value_at(&nf.to_zero), &value_at(&nf.to_inf), &value_at(&nf.to_one), invs[0].prime(), cap)?;
    let mut normalized = Vec::with_capacity(nf.sources.len());
    for src in &nf.sources {
        match nu.apply(&value_at(src))? {
            ProjPoint::Finite(v) => normalized.push(v.truncate_rel(n)),
            ProjPoint::Infinity => return Err(WhittakerError::NoNormalization),
        }
    }
    Ok(RamificationData {
        raw,
        normalized,
        base: (a, b),
        m,
        n,
    })
}

/// Normalized branch values straight from the normal form:
/// `G = Θ(0, 1; ·)` for the conjugated group, evaluated at `x_k`.
pub fn normalized_branch_values(nf: &NormalForm, n: u32) -> Result<(Vec<Padic>, usize), WhittakerError> {
    if !chain_holds(&nf.xs) {
        return Err(WhittakerError::NoNormalization);
    }
    let cap = n + guard_digits();
    let xs: Vec<Padic> = nf.xs.iter().map(|x| x.with_cap(cap)).collect();
    let invs = normalized_involutions(&xs)?;
    let p = xs[0].prime();
    let zs: Vec<ProjPoint> = xs.iter().map(|x| ProjPoint::Finite(x.clone())).collect();
    settled_theta(&invs, &ProjPoint::int(0, p, cap), &ProjPoint::int(1, p, cap), &zs, n)
}

/// Result of the inversion: the fixed points `x_k` modulo `p^d`, the
/// branch value each one hits, and the seed index used for `x_0`.
#[derive(Clone, Debug)]
pub struct InverseResult {
    pub xs: Vec<Padic>,
    /// `r` sorted by decreasing valuation.
    pub sorted_r: Vec<Padic>,
    pub seed_index: usize,
    /// `x_k mod p^2` right after seeding.
    pub seeds: Vec<Padic>,
}

fn exact_residue(x: &Padic, k: i64) -> Result<Padic, WhittakerError> {
    Ok(x.residue(k)?)
}

/// Kadziela's inversion: recover `x_0, …, x_{2g−2}` modulo `p^d` from
/// the normalized branch values.
pub fn ramification_to_whittaker(r: &[Padic], d: u32) -> Result<InverseResult, WhittakerError> {
    let k = r.len();
    let g = (k + 1) / 2;
    if g > MAX_INVERSE_GENUS || d > MAX_INVERSE_DIGITS || k % 2 == 0 {
        return Err(WhittakerError::TooLarge);
    }
    let p = r[0].prime();
    let cap = d + guard_digits();
    let mut sorted: Vec<Padic> = r.iter().map(|x| x.with_cap(cap)).collect();
    sorted.sort_by_key(|x| std::cmp::Reverse(x.val_bound()));
    if sorted.len() > 1 && sorted[0].val_bound() == sorted[1].val_bound() {
        return Err(WhittakerError::NotValid);
    }
    let two = Padic::from_int(2, p, cap);
    let four = Padic::from_int(4, p, cap);
    let mut last = WhittakerError::SearchExhausted(3);
    for i in 0..k {
        let mut seeds = Vec::with_capacity(k);
        seeds.push(exact_residue(&sorted[i].neg().div(&four)?, 2)?);
        for (j, rj) in sorted.iter().enumerate() {
            if j != i {
                seeds.push(exact_residue(&rj.neg().div(&two)?, 2)?);
            }
        }
        let mut xs = seeds.clone();
        match extend_digits(&mut xs, &sorted, 3, d) {
            Ok(()) => {
                return Ok(InverseResult {
                    xs,
                    sorted_r: sorted,
                    seed_index: i,
                    seeds,
                })
            }
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// Depth-first digit search: choose digit `t−1` of every `x_k`, in
/// lexicographic order, so the truncated product matches `r` mod `p^t`.
fn extend_digits(xs: &mut [Padic], r: &[Padic], t: u32, d: u32) -> Result<(), WhittakerError> {
    if t > d {
        return Ok(());
    }
    let p = xs[0].prime();
    let cap = xs[0].cap();
    let k = xs.len();
    let count = (p as usize).pow(k as u32);
    let base: Vec<Padic> = xs.to_vec();
    let pt = Padic::p_power(t as i64 - 1, p, cap);
    let mut deepest = t;
    for code in 0..count {
        let mut c = code;
        let mut cand = Vec::with_capacity(k);
        // most significant coordinate first, so codes run lexicographically
        let mut digits = vec![0u32; k];
        for slot in digits.iter_mut().rev() {
            *slot = (c % p as usize) as u32;
            c /= p as usize;
        }
        for (x, &dg) in base.iter().zip(&digits) {
            cand.push(x.add(&pt.mul(&Padic::from_int(dg, p, cap))));
        }
        if matches_mod(&cand, r, t)? {
            xs.clone_from_slice(&cand);
            match extend_digits(xs, r, t + 1, d) {
                Ok(()) => return Ok(()),
                Err(WhittakerError::SearchExhausted(u)) => deepest = deepest.max(u),
                Err(e) => return Err(e),
            }
        }
    }
    xs.clone_from_slice(&base);
    Err(WhittakerError::SearchExhausted(deepest))
}

/// Lift representatives so that paired fixed points differ.
fn lift_pairs(xs: &[Padic], t: u32) -> Vec<Padic> {
    let p = xs[0].prime();
    let cap = xs[0].cap();
    let bump = Padic::p_power(t as i64, p, cap);
    let zero = Padic::zero(p, cap);
    let mut out = xs.to_vec();
    if out[0].sub(&zero).is_zero() {
        out[0] = out[0].add(&bump);
    }
    let mut j = 1;
    while j + 1 < out.len() {
        if out[j].sub(&out[j + 1]).is_zero() {
            out[j + 1] = out[j + 1].add(&bump);
        }
        j += 2;
    }
    out
}

/// `{∏_{n≤t−2} L_n(x_k) mod p^t}` equals `{r mod p^t}` as multisets.
fn matches_mod(xs: &[Padic], r: &[Padic], t: u32) -> Result<bool, WhittakerError> {
    let xs = lift_pairs(xs, t);
    let invs = match normalized_involutions(&xs) {
        Ok(v) => v,
        Err(_) => return Ok(false),
    };
    let p = xs[0].prime();
    let cap = xs[0].cap();
    let (zero, one) = (ProjPoint::int(0, p, cap), ProjPoint::int(1, p, cap));
    let mut vals = Vec::with_capacity(xs.len());
    for x in &xs {
        match extended_theta(&invs, &zero, &one, &ProjPoint::Finite(x.clone()), t as usize - 2) {
            Ok(v) => vals.push(v),
            Err(WhittakerError::Pole(_)) | Err(WhittakerError::Padic(_)) => return Ok(false),
            Err(e) => return Err(e),
        }
    }
    let mut used = vec![false; r.len()];
    for v in &vals {
        let hit = (0..r.len()).find(|&j| !used[j] && v.sub(&r[j]).val_bound() >= t as i64);
        match hit {
            Some(j) => used[j] = true,
            None => return Ok(false),
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(n: i64) -> ProjPoint {
        ProjPoint::int(n, 3, 20)
    }

    fn m(s: [[&str; 2]; 2]) -> Mat2 {
        Mat2::from_strs(&s, 3, 20).unwrap()
    }

    #[test]
    fn paper_involutions() {
        let s0 = involution_from_fixed_points(&pt(0), &pt(9)).unwrap();
        assert!(s0.mat.pgl_eq(&m([["-1", "0"], ["-2/9", "1"]])));
        let s2 = involution_from_fixed_points(&pt(2), &pt(11)).unwrap();
        assert!(s2.mat.pgl_eq(&m([["-13/9", "44/9"], ["-2/9", "13/9"]])));
        assert!(s0.mat.mul(&s0.mat).is_scalar());
    }

    #[test]
    fn alternating_words() {
        assert_eq!(alternating_count(3, 2), 10);
        let invs: Vec<Mat2> = [(0, 9), (1, 10), (2, 11)]
            .iter()
            .map(|&(a, b)| involution_from_fixed_points(&pt(a), &pt(b)).unwrap().mat)
            .collect();
        let mut n = 0;
        visit_alternating(&invs, 2, &[pt(5)], &mut |_, _| {
            n += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(n, 10);
    }
}
