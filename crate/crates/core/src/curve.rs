//! Theta products over Γ_m, period matrices of the Jacobian, points of the
//! canonical embedding, and the linear algebra used to fit plane quartics.

use std::sync::Mutex;

use num_rational::Rational64;
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::berkovich::{Ball, BallError, BallKind};
use crate::domain::{DomainError, GoodDomain};
use crate::fast::{Ctx, FPoint, Fq};
use crate::padic::{guard_digits, Padic, PadicError};
use crate::proj::{letters, visit_orbits_with_first, GenSet, Mat2, ProjPoint, Word};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurveError {
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error(transparent)]
    Ball(#[from] BallError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("pole hit at word {0}")]
    Pole(Word),
    #[error("no admissible boundary point on the sphere of ball {0}")]
    NoBoundaryPoint(usize),
    #[error("system is rank deficient at precision: rank {rank} of {size}; try more or other points")]
    Rank { rank: usize, size: usize },
    #[error("overdetermined system is inconsistent at precision")]
    Inconsistent,
    #[error("expected points in P^2 (genus 3), got {0} coordinates")]
    NotGenus3(usize),
    #[error("need at least 14 points, got {0}")]
    TooFewPoints(usize),
}

fn ceil_nonneg(r: Rational64) -> usize {
    r.ceil().to_integer().max(0) as usize
}

/// `z − x`, or `None` when either point is ∞.
fn diff(z: &ProjPoint, x: &ProjPoint) -> Option<Padic> {
    match (z, x) {
        (ProjPoint::Finite(a), ProjPoint::Finite(b)) => Some(a.sub(b)),
        _ => None,
    }
}

fn quotient(num: &[Option<Padic>], den: &[Option<Padic>], one: &Padic) -> Result<Padic, PadicError> {
    let mut n = one.clone();
    for x in num.iter().flatten() {
        n = n.mul(x);
    }
    let mut d = one.clone();
    for x in den.iter().flatten() {
        d = d.mul(x);
    }
    n.div(&d)
}

/// Fold `term(γ·start)` over `γ ∈ Γ_m` with `combine`, one task per
/// rightmost letter. A failing term aborts with the offending word.
fn orbit_fold<T, C>(
    gens: &GenSet,
    m: usize,
    start: &[ProjPoint],
    init: Padic,
    term: T,
    combine: C,
) -> Result<Padic, CurveError>
where
    T: Fn(&[ProjPoint]) -> Result<Padic, PadicError> + Sync,
    C: Fn(&Padic, &Padic) -> Padic + Sync,
{
    let first = term(start).map_err(|_| CurveError::Pole(Word::identity()))?;
    let parts: Vec<Result<Padic, CurveError>> = letters(gens.g())
        .into_par_iter()
        .map(|l| {
            let bad = Mutex::new(None);
            let mut acc = init.clone();
            let r = visit_orbits_with_first(gens, m, l, start, |w, pts| match term(pts) {
                Ok(t) => {
                    acc = combine(&acc, &t);
                    Ok(())
                }
                Err(e) => {
                    *bad.lock().unwrap() = Some(Word(w.to_vec()));
                    Err(e)
                }
            });
            match r {
                Ok(()) => Ok(acc),
                Err(e) => match bad.into_inner().unwrap() {
                    Some(w) => Err(CurveError::Pole(w)),
                    None => Err(e.into()),
                },
            }
        })
        .collect();
    let mut acc = combine(&init, &first);
    for part in parts {
        acc = combine(&acc, &part?);
    }
    Ok(acc)
}

/// `Θ_m(a,b;z) = ∏_{γ∈Γ_m} (z−γa)/(z−γb)`.
pub fn theta_m(
    gens: &GenSet,
    a: &ProjPoint,
    b: &ProjPoint,
    z: &ProjPoint,
    m: usize,
) -> Result<Padic, CurveError> {
    let (p, cap) = (gens.prime(), gens.cap());
    let one = Padic::one(p, cap);
    if z.is_infinity() {
        return Ok(one);
    }
    let term = |pts: &[ProjPoint]| {
        let num = diff(z, &pts[0]).ok_or(PadicError::DivisionByZero)?;
        let den = diff(z, &pts[1]).ok_or(PadicError::DivisionByZero)?;
        num.div(&den)
    };
    orbit_fold(gens, m, &[a.clone(), b.clone()], one, term, |x, y| x.mul(y))
}

/// `Θ_m(a,b;z) / Θ_m(a,b;w)` as a single product of cross ratios. Factors
/// involving ∞ cancel in pairs.
pub fn theta_ratio(
    gens: &GenSet,
    a: &ProjPoint,
    b: &ProjPoint,
    z: &ProjPoint,
    w: &ProjPoint,
    m: usize,
) -> Result<Padic, CurveError> {
    let one = Padic::one(gens.prime(), gens.cap());
    let term = |pts: &[ProjPoint]| {
        let (ga, gb) = (&pts[0], &pts[1]);
        quotient(&[diff(z, ga), diff(w, gb)], &[diff(z, gb), diff(w, ga)], &one)
    };
    orbit_fold(gens, m, &[a.clone(), b.clone()], one.clone(), term, |x, y| x.mul(y))
}

/// Points of `F` on (or, for half-integer radii, just outside) the
/// boundary sphere of `ball`, in a fixed order: `c + t·p^k + s·p^(k+1)`.
pub fn boundary_points(dom: &GoodDomain, ball: &Ball, cap: u32) -> Result<Vec<Padic>, CurveError> {
    let p = dom.prime();
    let k = match ball.kind {
        BallKind::Affine => ball.q.floor(),
        BallKind::Complement => ball.q.ceil(),
    }
    .to_integer();
    let c = ball.center.with_cap(cap);
    let pk = Padic::p_power(k, p, cap);
    let pk1 = Padic::p_power(k + 1, p, cap);
    let mut out = Vec::new();
    for s in 0..p {
        for t in 1..p {
            let x = c
                .add(&pk.mul(&Padic::from_int(t, p, cap)))
                .add(&pk1.mul(&Padic::from_int(s, p, cap)));
            if dom.contains(&ProjPoint::Finite(x.clone()))? {
                out.push(x);
            }
        }
    }
    Ok(out)
}

fn has_half_radius(dom: &GoodDomain) -> bool {
    dom.b.iter().chain(dom.b_prime.iter()).any(|b| !b.q.is_integer())
}

fn working_gens(dom: &GoodDomain, cap: u32) -> GenSet {
    let mats: Vec<_> = dom.gens.iter().map(|g| g.with_cap(cap)).collect();
    GenSet::new(&mats)
}

/// Approximate period matrix together with the parameters that produced it.
#[derive(Clone, Debug)]
pub struct PeriodMatrix {
    pub q: Vec<Vec<Padic>>,
    /// Requested relative precision.
    pub n: u32,
    pub m: usize,
    pub c: Rational64,
    pub log_d: Rational64,
    /// Working precision used in the products.
    pub cap: u32,
}

impl PeriodMatrix {
    pub fn g(&self) -> usize {
        self.q.len()
    }

    pub fn prime(&self) -> u32 {
        self.q[0][0].prime()
    }

    /// Entrywise valuations. Zero entries (never expected) map to `i64::MAX`.
    pub fn val_matrix(&self) -> Vec<Vec<i64>> {
        self.q
            .iter()
            .map(|row| row.iter().map(|x| x.valuation().unwrap_or(i64::MAX)).collect())
            .collect()
    }

    /// JSON with digit strings, valuations and parameters. With `vals_only`
    /// the digit strings are omitted.
    pub fn to_json(&self, vals_only: bool) -> Value {
        let mut out = json!({
            "p": self.prime(),
            "n": self.n,
            "m": self.m,
            "c": self.c.to_string(),
            "log_p_d": self.log_d.to_string(),
            "N": self.cap,
            "val": self.val_matrix(),
        });
        if !vals_only {
            let q: Vec<Vec<String>> = self
                .q
                .iter()
                .map(|row| row.iter().map(|x| x.format_digits()).collect())
                .collect();
            out["Q"] = json!(q);
        }
        out
    }
}

/// The truncation index guaranteeing relative precision `n`: `⌈n/c⌉`, one
/// more when some radius is a half-integer power of `p`.
pub fn period_m(dom: &GoodDomain, n: u32) -> Result<usize, CurveError> {
    let c = dom.c()?;
    let mut m = ceil_nonneg(Rational64::from_integer(n as i64) / c);
    if has_half_radius(dom) {
        m += 1;
    }
    Ok(m)
}

/// Period matrix to `n` significant digits.
pub fn period_matrix(dom: &GoodDomain, n: u32) -> Result<PeriodMatrix, CurveError> {
    let m = period_m(dom, n)?;
    period_matrix_at(dom, n, m)
}

/// Period matrix with an explicit truncation index `m`.
pub fn period_matrix_at(dom: &GoodDomain, n: u32, m: usize) -> Result<PeriodMatrix, CurveError> {
    let g = dom.g();
    let cap = n + guard_digits();
    let gens = working_gens(dom, cap);
    let mut sphere = Vec::with_capacity(g);
    for (i, b) in dom.b_prime.iter().enumerate() {
        let pts = boundary_points(dom, b, cap)?;
        if pts.is_empty() {
            return Err(CurveError::NoBoundaryPoint(i));
        }
        sphere.push(pts);
    }
    let cells: Vec<(usize, usize)> = (0..g).flat_map(|i| (0..g).map(move |j| (i, j))).collect();
    let values: Vec<Result<Padic, CurveError>> = cells
        .par_iter()
        .map(|&(i, j)| period_entry(&gens, &sphere[i], &sphere[j], i, j, m))
        .collect();
    let mut q = vec![Vec::with_capacity(g); g];
    for (&(i, _), v) in cells.iter().zip(values) {
        q[i].push(v?.truncate_rel(n));
    }
    Ok(PeriodMatrix {
        q,
        n,
        m,
        c: dom.c()?,
        log_d: dom.log_d(),
        cap,
    })
}

/// Period matrix straight from generators that are not known to be in
/// good position: base points are small integers, `m` is taken as given
/// and nothing certifies the digits. `c` and `log_d` are reported as 0.
pub fn period_matrix_uncertified(gens: &[Mat2], n: u32, m: usize) -> Result<PeriodMatrix, CurveError> {
    let g = gens.len();
    let cap = n + guard_digits();
    let mats: Vec<Mat2> = gens.iter().map(|x| x.with_cap(cap)).collect();
    let gs = GenSet::new(&mats);
    let p = gs.prime();
    let mut fixed = Vec::new();
    for x in &mats {
        let e = x.eigen_data().map_err(|_| CurveError::Pole(Word::identity()))?;
        fixed.push(e.attracting().clone());
        fixed.push(e.repelling().clone());
    }
    // closeness to the fixed points; smaller is farther away
    let closeness = |a: &Padic| -> i64 {
        fixed
            .iter()
            .filter_map(|f| f.as_finite().map(|f| a.sub(f).val_bound()))
            .max()
            .unwrap_or(i64::MIN)
    };
    let mut cands: Vec<Padic> = (0..p as i64 * p as i64)
        .map(|k| Padic::from_int(k, p, cap))
        .chain((1..p as i64).map(|k| Padic::from_int(k, p, cap).mul(&Padic::p_power(-1, p, cap))))
        .collect();
    cands.sort_by_key(|a| closeness(a));
    let cells: Vec<(usize, usize)> = (0..g).flat_map(|i| (0..g).map(move |j| (i, j))).collect();
    let values: Vec<Result<Padic, CurveError>> = cells
        .par_iter()
        .map(|&(i, j)| period_entry(&gs, &cands, &cands, i, j, m))
        .collect();
    let mut q = vec![Vec::with_capacity(g); g];
    for (&(i, _), v) in cells.iter().zip(values) {
        q[i].push(v?.truncate_rel(n));
    }
    Ok(PeriodMatrix {
        q,
        n,
        m,
        c: Rational64::from_integer(0),
        log_d: Rational64::from_integer(0),
        cap,
    })
}

fn period_entry(
    gens: &GenSet,
    a_cands: &[Padic],
    z_cands: &[Padic],
    i: usize,
    j: usize,
    m: usize,
) -> Result<Padic, CurveError> {
    let gi = &gens.gens()[i];
    let gj = &gens.gens()[j];
    let mut last = CurveError::NoBoundaryPoint(j);
    for a in a_cands {
        for z in z_cands {
            if a == z {
                continue;
            }
            let a = ProjPoint::Finite(a.clone());
            let z = ProjPoint::Finite(z.clone());
            let b = gi.apply(&a)?;
            let w = gj.apply(&z)?;
            match theta_ratio(gens, &a, &b, &z, &w, m) {
                Ok(v) => return Ok(v),
                Err(e @ CurveError::Pole(_)) => last = e,
                Err(e) => return Err(e),
            }
        }
    }
    Err(last)
}

/// A point `(w_1 : … : w_g)` of the canonical embedding.
#[derive(Clone, Debug)]
pub struct CanonicalPoint {
    pub coords: Vec<Padic>,
    /// Achieved absolute precision of every coordinate.
    pub precision: i64,
    pub m: usize,
    pub z: ProjPoint,
    /// `z` moved into the fundamental domain, and the word doing it.
    pub reduced: ProjPoint,
    pub word: Word,
}

impl CanonicalPoint {
    /// Coordinates divided by the first one of minimal valuation.
    pub fn normal_form(&self) -> Result<Vec<Padic>, PadicError> {
        normalize_projective(&self.coords)
    }

    pub fn to_json(&self, c: Rational64, log_d: Rational64, cap: u32) -> Value {
        let coords: Vec<String> = self.coords.iter().map(|x| x.format_digits()).collect();
        json!({
            "coords": coords,
            "precision": self.precision,
            "m": self.m,
            "c": c.to_string(),
            "log_p_d": log_d.to_string(),
            "N": cap,
            "word": self.word,
        })
    }
}

/// Divide a homogeneous vector by its first entry of minimal valuation.
pub fn normalize_projective(v: &[Padic]) -> Result<Vec<Padic>, PadicError> {
    let k = v
        .iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .min_by_key(|(i, x)| (x.valuation(), *i))
        .map(|(i, _)| i)
        .ok_or(PadicError::DivisionByZero)?;
    let inv = v[k].inv()?;
    Ok(v.iter().map(|x| x.mul(&inv)).collect())
}

/// Smallest `m` with `m·c + log_p d ≥ n`.
pub fn embedding_m(dom: &GoodDomain, n: u32) -> Result<usize, CurveError> {
    let c = dom.c()?;
    let mut m = ceil_nonneg((Rational64::from_integer(n as i64) - dom.log_d()) / c);
    if has_half_radius(dom) {
        m += 1;
    }
    Ok(m)
}

/// Canonical embedding of `z` to absolute precision `n`.
pub fn canonical_embed(dom: &GoodDomain, z: &ProjPoint, n: u32) -> Result<CanonicalPoint, CurveError> {
    let m = embedding_m(dom, n)?;
    canonical_embed_with(dom, z, n, m, 0)
}

/// As [`canonical_embed`] with explicit `m`; `choice` skips that many
/// admissible base points on each sphere.
pub fn canonical_embed_with(
    dom: &GoodDomain,
    z: &ProjPoint,
    n: u32,
    m: usize,
    choice: usize,
) -> Result<CanonicalPoint, CurveError> {
    let cap = n + guard_digits();
    let gens = working_gens(dom, cap);
    let (reduced, word) = dom.reduce_point(&z.with_cap(cap))?;
    let mut coords = Vec::with_capacity(dom.g());
    for (i, ball) in dom.b_prime.iter().enumerate() {
        let cands = boundary_points(dom, ball, cap)?;
        let mut last = CurveError::NoBoundaryPoint(i);
        let mut found = None;
        for a in cands.iter().skip(choice) {
            let a = ProjPoint::Finite(a.clone());
            if a == reduced {
                continue;
            }
            match differential(&gens, i, &a, &reduced, m) {
                Ok(v) => {
                    found = Some(v);
                    break;
                }
                Err(e @ CurveError::Pole(_)) => last = e,
                Err(e) => return Err(e),
            }
        }
        coords.push(found.ok_or(last)?);
    }
    Ok(finish_point(coords, n, m, z, reduced, word))
}

/// `1/(z−x) − 1/(z−y)`, with `1/(z−∞) = 0`.
fn pair_term(z: &ProjPoint, x: &ProjPoint, y: &ProjPoint, zero: &Padic) -> Result<Padic, PadicError> {
    match (diff(z, x), diff(z, y)) {
        (Some(dx), Some(dy)) => {
            let (ProjPoint::Finite(a), ProjPoint::Finite(b)) = (x, y) else {
                unreachable!()
            };
            a.sub(b).div(&dx.mul(&dy))
        }
        (Some(dx), None) => dx.inv(),
        (None, Some(dy)) => Ok(dy.inv()?.neg()),
        (None, None) => Ok(zero.clone()),
    }
}

/// `w_i(z) = Σ_{γ∈Γ_m} 1/(z−γa) − 1/(z−γγ_i a)`.
fn differential(
    gens: &GenSet,
    i: usize,
    a: &ProjPoint,
    z: &ProjPoint,
    m: usize,
) -> Result<Padic, CurveError> {
    let b = gens.gens()[i].apply(a)?;
    let zero = Padic::zero(gens.prime(), gens.cap());
    let term = |pts: &[ProjPoint]| pair_term(z, &pts[0], &pts[1], &zero);
    orbit_fold(gens, m, &[a.clone(), b], zero.clone(), term, |x, y| x.add(y))
}

/// Canonical embedding of many points. The orbits of the base points are
/// computed once and shared; a point colliding with a base point or an
/// orbit falls back to [`canonical_embed_with`].
pub fn canonical_embed_many(
    dom: &GoodDomain,
    zs: &[ProjPoint],
    n: u32,
) -> Result<Vec<CanonicalPoint>, CurveError> {
    canonical_embed_many_at(dom, zs, n, embedding_m(dom, n)?)
}

/// As [`canonical_embed_many`] with explicit `m`.
pub fn canonical_embed_many_at(
    dom: &GoodDomain,
    zs: &[ProjPoint],
    n: u32,
    m: usize,
) -> Result<Vec<CanonicalPoint>, CurveError> {
    let cap = n + guard_digits();
    let Some(ctx) = Ctx::new(dom.prime(), cap) else {
        return zs
            .par_iter()
            .map(|z| canonical_embed_with(dom, z, n, m, 0))
            .collect();
    };
    let gens = working_gens(dom, cap);
    let mats: Vec<[Fq; 4]> = letters(dom.g())
        .iter()
        .map(|&l| ctx.mat(gens.letter(l)))
        .collect();
    let mut orbits = Vec::with_capacity(dom.g());
    for (i, ball) in dom.b_prime.iter().enumerate() {
        let a = boundary_points(dom, ball, cap)?
            .into_iter()
            .next()
            .ok_or(CurveError::NoBoundaryPoint(i))?;
        let a = ProjPoint::Finite(a);
        let b = gens.gens()[i].apply(&a)?;
        let mut pairs = Vec::new();
        fast_orbit(&ctx, &mats, m, usize::MAX, ctx.point(&a), ctx.point(&b), &mut pairs)
            .ok_or(CurveError::Pole(Word::identity()))?;
        orbits.push((a, pairs));
    }
    let zero = ctx.from_padic(&Padic::zero(dom.prime(), cap));
    zs.par_iter()
        .map(|z| {
            let (reduced, word) = dom.reduce_point(&z.with_cap(cap))?;
            let fz = match ctx.point(&reduced) {
                FPoint::Finite(x) if orbits.iter().all(|(a, _)| *a != reduced) => x,
                _ => return canonical_embed_with(dom, z, n, m, 0),
            };
            let mut coords = Vec::with_capacity(dom.g());
            for (_, pairs) in &orbits {
                let mut acc = zero;
                for (x, y, d) in pairs {
                    match fast_term(&ctx, fz, *x, *y, *d) {
                        Some(t) => acc = ctx.add(acc, t),
                        None => return canonical_embed_with(dom, z, n, m, 0),
                    }
                }
                coords.push(ctx.to_padic(acc));
            }
            Ok(finish_point(coords, n, m, z, reduced, word))
        })
        .collect()
}

type FastPair = (FPoint, FPoint, Option<Fq>);

/// Orbit pairs `(γa, γb, γa − γb)` by left extension; `last` is the
/// index of the leftmost letter (`usize::MAX` at the root).
fn fast_orbit(
    ctx: &Ctx,
    mats: &[[Fq; 4]],
    depth: usize,
    last: usize,
    a: FPoint,
    b: FPoint,
    out: &mut Vec<FastPair>,
) -> Option<()> {
    let d = match (a, b) {
        (FPoint::Finite(x), FPoint::Finite(y)) => Some(ctx.sub(x, y)),
        _ => None,
    };
    out.push((a, b, d));
    if depth == 0 {
        return Some(());
    }
    for (k, mat) in mats.iter().enumerate() {
        // letters(g) lists l, -l adjacently, so k ^ 1 is the inverse letter
        if last != usize::MAX && k == (last ^ 1) {
            continue;
        }
        let na = ctx.apply(mat, a)?;
        let nb = ctx.apply(mat, b)?;
        fast_orbit(ctx, mats, depth - 1, k, na, nb, out)?;
    }
    Some(())
}

/// `1/(z−x) − 1/(z−y)` in machine arithmetic.
fn fast_term(ctx: &Ctx, z: Fq, x: FPoint, y: FPoint, d: Option<Fq>) -> Option<Fq> {
    match (x, y) {
        (FPoint::Finite(x), FPoint::Finite(y)) => {
            let den = ctx.mul(ctx.sub(z, x), ctx.sub(z, y));
            ctx.div(d?, den)
        }
        (FPoint::Finite(x), FPoint::Infinity) => ctx.inv(ctx.sub(z, x)),
        (FPoint::Infinity, FPoint::Finite(y)) => Some(ctx.neg(ctx.inv(ctx.sub(z, y))?)),
        _ => None,
    }
}

fn finish_point(
    coords: Vec<Padic>,
    n: u32,
    m: usize,
    z: &ProjPoint,
    reduced: ProjPoint,
    word: Word,
) -> CanonicalPoint {
    let achieved = coords
        .iter()
        .filter_map(|x| x.abs_precision())
        .min()
        .unwrap_or(n as i64)
        .min(n as i64);
    CanonicalPoint {
        coords: coords.iter().map(|x| x.truncate_abs(achieved)).collect(),
        precision: achieved,
        m,
        z: z.clone(),
        reduced,
        word,
    }
}

/// Solve `A x = rhs` by elimination with minimal-valuation pivots. `A` may
/// have more rows than columns if the extra equations are consistent.
pub fn solve_linear(a: &[Vec<Padic>], rhs: &[Padic]) -> Result<Vec<Padic>, CurveError> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    if rows < cols || rhs.len() != rows {
        return Err(CurveError::Rank {
            rank: rows.min(cols),
            size: cols,
        });
    }
    let mut mat: Vec<Vec<Padic>> = a
        .iter()
        .zip(rhs)
        .map(|(row, r)| {
            let mut row = row.clone();
            row.push(r.clone());
            row
        })
        .collect();
    for col in 0..cols {
        let pivot = (col..rows)
            .filter(|&r| !mat[r][col].is_zero())
            .min_by_key(|&r| mat[r][col].val_bound());
        let Some(pr) = pivot else {
            return Err(CurveError::Rank { rank: col, size: cols });
        };
        mat.swap(col, pr);
        let inv = mat[col][col].inv()?;
        for r in (col + 1)..rows {
            if mat[r][col].is_exact_zero() {
                continue;
            }
            let f = mat[r][col].mul(&inv);
            for k in col..=cols {
                let t = f.mul(&mat[col][k]);
                mat[r][k] = mat[r][k].sub(&t);
            }
        }
    }
    if mat[cols..].iter().any(|row| !row[cols].is_zero()) {
        return Err(CurveError::Inconsistent);
    }
    let mut x: Vec<Padic> = vec![Padic::zero(rhs[0].prime(), rhs[0].cap()); cols];
    for r in (0..cols).rev() {
        let mut s = mat[r][cols].clone();
        for k in (r + 1)..cols {
            s = s.sub(&mat[r][k].mul(&x[k]));
        }
        x[r] = s.div(&mat[r][r])?;
    }
    Ok(x)
}

/// Exponents `(i, j, k)` of `x^i y^j z^k` in the order
/// `x⁴, x³y, x³z, x²y², …, z⁴`.
pub fn quartic_monomials() -> Vec<[u32; 3]> {
    let mut out = Vec::with_capacity(15);
    for i in (0..=4u32).rev() {
        for j in (0..=4 - i).rev() {
            out.push([i, j, 4 - i - j]);
        }
    }
    out
}

/// A ternary quartic with coefficients in [`quartic_monomials`] order.
#[derive(Clone, Debug)]
pub struct PlaneQuartic {
    pub coeffs: Vec<Padic>,
}

fn monomial_values(pt: &[Padic]) -> Vec<Padic> {
    let pow = |x: &Padic, e: u32| {
        let mut acc = Padic::one(x.prime(), x.cap());
        for _ in 0..e {
            acc = acc.mul(x);
        }
        acc
    };
    quartic_monomials()
        .iter()
        .map(|e| pow(&pt[0], e[0]).mul(&pow(&pt[1], e[1])).mul(&pow(&pt[2], e[2])))
        .collect()
}

impl PlaneQuartic {
    pub fn eval(&self, pt: &[Padic]) -> Padic {
        let vals = monomial_values(pt);
        let mut acc = Padic::zero(pt[0].prime(), pt[0].cap());
        for (c, v) in self.coeffs.iter().zip(&vals) {
            acc = acc.add(&c.mul(v));
        }
        acc
    }

    /// Value at the normal form of `pt`.
    pub fn residual(&self, pt: &CanonicalPoint) -> Result<Padic, PadicError> {
        Ok(self.eval(&pt.normal_form()?))
    }
}

/// Fit `Σ C_k·mon_k = 0` with `C_1 = 1` through the given points.
pub fn fit_plane_quartic(points: &[CanonicalPoint]) -> Result<PlaneQuartic, CurveError> {
    if let Some(pt) = points.iter().find(|pt| pt.coords.len() != 3) {
        return Err(CurveError::NotGenus3(pt.coords.len()));
    }
    if points.len() < 14 {
        return Err(CurveError::TooFewPoints(points.len()));
    }
    let mut a = Vec::with_capacity(points.len());
    let mut rhs = Vec::with_capacity(points.len());
    for pt in points {
        let vals = monomial_values(&pt.normal_form()?);
        rhs.push(vals[0].neg());
        a.push(vals[1..].to_vec());
    }
    let sol = solve_linear(&a, &rhs)?;
    let one = Padic::one(sol[0].prime(), sol[0].cap());
    let mut coeffs = vec![one];
    coeffs.extend(sol);
    Ok(PlaneQuartic { coeffs })
}
