//! Balls in P¹(Q_p), type-2 points of the Berkovich line, the path metric
//! and finite subtrees spanned by point sets.
//!
//! A radius is stored as its exponent `q` (radius `p^(-q)`); `q` may be a
//! half-integer. Ball identity follows C_p semantics, so `B(a, p^(-3/2))`
//! and `B(a, p^(-2))` are different balls even though they have the same
//! Q_p-points.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use num_rational::Rational64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::padic::{Padic, PadicError};
use crate::proj::{Mat2, ProjPoint};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BallError {
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error("indeterminate image: pole on the boundary at known precision")]
    IndeterminateImage,
    #[error("membership undecidable at known precision")]
    Undecidable,
}

fn int_q(v: i64) -> Rational64 {
    Rational64::from_integer(v)
}

/// `val(x)` as a rational, with a flag saying whether it is only a lower
/// bound (inexact zero). Exact zero is `None`.
fn val_info(x: &Padic) -> Option<(Rational64, bool)> {
    if x.is_exact_zero() {
        None
    } else {
        Some((int_q(x.val_bound()), x.valuation().is_none()))
    }
}

/// Decide `val(x) > q` (strict) or `val(x) >= q`.
fn val_exceeds(x: &Padic, q: Rational64, strict: bool) -> Result<bool, BallError> {
    match val_info(x) {
        None => Ok(true),
        Some((v, bound)) => {
            let holds = if strict { v > q } else { v >= q };
            if holds {
                Ok(true)
            } else if bound {
                Err(BallError::Undecidable)
            } else {
                Ok(false)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BallKind {
    /// `{x : val(x−c) > q}` (open) or `>= q` (closed).
    Affine,
    /// `{∞} ∪ {x : val(x−c) < q}` (open) or `<= q` (closed).
    Complement,
}

/// An open or closed ball of P¹.
#[derive(Clone, Debug)]
pub struct Ball {
    pub kind: BallKind,
    pub center: Padic,
    pub q: Rational64,
    pub closed: bool,
}

impl Ball {
    pub fn open(center: Padic, q: Rational64) -> Ball {
        Ball {
            kind: BallKind::Affine,
            center,
            q,
            closed: false,
        }
    }

    pub fn closed(center: Padic, q: Rational64) -> Ball {
        Ball {
            kind: BallKind::Affine,
            center,
            q,
            closed: true,
        }
    }

    /// Open ball `B(c, p^(-q))` with integer center and exponent.
    pub fn open_int(c: i64, q: i64, p: u32, cap: u32) -> Ball {
        Ball::open(Padic::from_int(c, p, cap), int_q(q))
    }

    /// `P¹` minus this ball.
    pub fn complement(&self) -> Ball {
        Ball {
            kind: match self.kind {
                BallKind::Affine => BallKind::Complement,
                BallKind::Complement => BallKind::Affine,
            },
            center: self.center.clone(),
            q: self.q,
            closed: !self.closed,
        }
    }

    /// The closure (same center and radius, closed).
    pub fn closure(&self) -> Ball {
        Ball {
            closed: true,
            ..self.clone()
        }
    }

    /// The Gauss point of the ball.
    pub fn gauss_point(&self) -> Result<BerkPoint, PadicError> {
        BerkPoint::new(&self.center, self.q)
    }

    pub fn contains(&self, z: &ProjPoint) -> Result<bool, BallError> {
        match z {
            ProjPoint::Infinity => Ok(self.kind == BallKind::Complement),
            ProjPoint::Finite(x) => {
                let diff = x - &self.center;
                match self.kind {
                    BallKind::Affine => val_exceeds(&diff, self.q, !self.closed),
                    BallKind::Complement => {
                        Ok(!val_exceeds(&diff, self.q, self.closed)?)
                    }
                }
            }
        }
    }

    /// Equality as subsets of P¹(C_p).
    pub fn same_as(&self, other: &Ball) -> Result<bool, BallError> {
        if self.kind != other.kind || self.closed != other.closed || self.q != other.q {
            return Ok(false);
        }
        val_exceeds(&(&self.center - &other.center), self.q, !self.closed)
    }

    /// Disjointness of the closures.
    pub fn closures_disjoint(&self, other: &Ball) -> Result<bool, BallError> {
        use BallKind::*;
        match (self.kind, other.kind) {
            (Complement, Complement) => Ok(false),
            (Affine, Affine) => {
                let q = self.q.min(other.q);
                Ok(!val_exceeds(&(&self.center - &other.center), q, false)?)
            }
            (Affine, Complement) | (Complement, Affine) => {
                let (a, c) = if self.kind == Affine {
                    (self, other)
                } else {
                    (other, self)
                };
                if a.q <= c.q {
                    return Ok(false);
                }
                val_exceeds(&(&a.center - &c.center), c.q, true)
            }
        }
    }

    /// Whether the Berkovich disc of this ball contains the point `x`.
    pub fn contains_point(&self, x: &BerkPoint) -> Result<bool, BallError> {
        let diff = x.center() - &self.center;
        let inside_affine = |closed: bool| -> Result<bool, BallError> {
            let radius_ok = if closed { x.q() >= self.q } else { x.q() > self.q };
            Ok(radius_ok && val_exceeds(&diff, self.q, !closed)?)
        };
        match self.kind {
            BallKind::Affine => inside_affine(self.closed),
            BallKind::Complement => Ok(!inside_affine(!self.closed)?),
        }
    }

    /// Image under a Möbius transformation.
    pub fn image(&self, m: &Mat2) -> Result<Ball, BallError> {
        ball_image(m, self)
    }
}

impl Ball {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "kind": self.kind,
            "center": self.center.format_digits(),
            "radius_exp": self.q.to_string(),
            "open_closed": if self.closed { "closed" } else { "open" },
        })
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let plus = if self.closed { "+" } else { "" };
        match self.kind {
            BallKind::Affine => write!(f, "B({}, p^-{}){plus}", self.center, self.q),
            BallKind::Complement => write!(f, "P1 \\ B({}, p^-{}){}", self.center, self.q, if self.closed { "" } else { "+" }),
        }
    }
}

/// Image of a ball under `m`. An affine ball containing the pole maps to
/// a complement ball and vice versa.
pub fn ball_image(m: &Mat2, ball: &Ball) -> Result<Ball, BallError> {
    if ball.kind == BallKind::Complement {
        return Ok(ball_image(m, &ball.complement())?.complement());
    }
    let x0 = &ball.center;
    let det = m.det();
    let vdet = int_q(det.valuation().ok_or(PadicError::PrecisionExhaustedDivisor)?);
    if m.c.is_exact_zero() {
        let vd = int_q(m.d.valuation().ok_or(PadicError::PrecisionExhaustedDivisor)?);
        let center = match m.apply(&ProjPoint::Finite(x0.clone()))? {
            ProjPoint::Finite(x) => x,
            ProjPoint::Infinity => return Err(BallError::IndeterminateImage),
        };
        return Ok(Ball {
            kind: BallKind::Affine,
            center,
            q: vdet + ball.q - vd * 2,
            closed: ball.closed,
        });
    }
    let vc = int_q(m.c.valuation().ok_or(BallError::IndeterminateImage)?);
    let w = &m.c * x0 + &m.d;
    // delta = val(x0 - pole)
    let pole_inside = match val_info(&w) {
        None => true,
        Some((vw, bound)) => {
            let delta = vw - vc;
            let inside = if ball.closed {
                delta >= ball.q
            } else {
                delta > ball.q
            };
            if bound && !inside {
                return Err(BallError::IndeterminateImage);
            }
            inside
        }
    };
    if !pole_inside {
        let vw = int_q(w.valuation().unwrap());
        let center = m.a.mul(x0).add(&m.b).div(&w)?;
        Ok(Ball {
            kind: BallKind::Affine,
            center,
            q: vdet + ball.q - vw * 2,
            closed: ball.closed,
        })
    } else {
        let center = m.a.div(&m.c)?;
        Ok(Ball {
            kind: BallKind::Complement,
            center,
            q: vdet - vc * 2 - ball.q,
            closed: ball.closed,
        })
    }
}

/// A type-2 (or half-integer radius) point of the Berkovich line: the
/// closed ball `B(center, p^(-q))+`. The center keeps only the digits
/// below `p^ceil(q)`, so equal points have equal encodings.
#[derive(Clone, Debug)]
pub struct BerkPoint {
    center: Padic,
    q: Rational64,
}

fn ceil_q(q: Rational64) -> i64 {
    q.ceil().to_integer()
}

impl BerkPoint {
    pub fn new(center: &Padic, q: Rational64) -> Result<BerkPoint, PadicError> {
        Ok(BerkPoint {
            center: center.residue(ceil_q(q))?,
            q,
        })
    }

    /// The Gauss point `B(0, 1)+`.
    pub fn gauss(p: u32, cap: u32) -> BerkPoint {
        BerkPoint {
            center: Padic::zero(p, cap),
            q: Rational64::zero(),
        }
    }

    /// A type-1 point realized as a deep closed ball. The depth is capped
    /// by the known precision of `z`.
    pub fn from_type1(z: &Padic, depth: i64) -> BerkPoint {
        let d = z.abs_precision().map_or(depth, |a| a.min(depth));
        BerkPoint::new(z, int_q(d)).expect("depth within known precision")
    }

    pub fn center(&self) -> &Padic {
        &self.center
    }

    pub fn q(&self) -> Rational64 {
        self.q
    }

    pub fn prime(&self) -> u32 {
        self.center.prime()
    }

    pub fn ball(&self) -> Ball {
        Ball::closed(self.center.clone(), self.q)
    }

    pub fn is_type2(&self) -> bool {
        self.q.is_integer()
    }

    /// `val(c1 − c2)` between canonical centers (`None` if equal).
    fn center_gap(&self, other: &BerkPoint) -> Option<Rational64> {
        (&self.center - &other.center).valuation().map(int_q)
    }

    /// The ball of `self` contains the ball of `other`.
    pub fn contains(&self, other: &BerkPoint) -> bool {
        other.q >= self.q && self.center_gap(other).is_none_or(|v| v >= self.q)
    }

    /// Smallest closed ball containing both.
    pub fn meet(&self, other: &BerkPoint) -> BerkPoint {
        let mut q = self.q.min(other.q);
        if let Some(v) = self.center_gap(other) {
            q = q.min(v);
        }
        BerkPoint::new(&self.center, q).expect("canonical centers are exact")
    }

    pub fn distance(&self, other: &BerkPoint) -> Rational64 {
        let m = self.meet(other);
        (self.q - m.q) + (other.q - m.q)
    }

    /// The point on the segment from `self` up toward the root at radius
    /// exponent `q` (requires `q <= self.q`).
    pub fn ancestor_at(&self, q: Rational64) -> BerkPoint {
        BerkPoint::new(&self.center, q).expect("canonical centers are exact")
    }

    /// The point at distance `t` from `self` on the path to `other`.
    pub fn toward(&self, other: &BerkPoint, t: Rational64) -> BerkPoint {
        let m = self.meet(other);
        let up = self.q - m.q;
        if t <= up {
            self.ancestor_at(self.q - t)
        } else {
            other.ancestor_at(m.q + (t - up))
        }
    }

    /// Image under a Möbius transformation.
    pub fn image(&self, m: &Mat2) -> Result<BerkPoint, BallError> {
        let b = ball_image(m, &self.ball())?;
        Ok(b.gauss_point()?)
    }

    fn key(&self) -> (Option<i64>, Vec<u32>) {
        (self.center.valuation(), self.center.unit_digits())
    }

    /// Center digits for powers `lo .. ceil(q)`, lowest first.
    fn digit_key(&self, lo: i64) -> Vec<u32> {
        let hi = ceil_q(self.q);
        let (v, digits) = self.key();
        (lo..hi)
            .map(|i| match v {
                Some(v) if i >= v => digits.get((i - v) as usize).copied().unwrap_or(0),
                _ => 0,
            })
            .collect()
    }

    /// Sort key realizing a depth-first order of the containment tree.
    fn dfs_cmp(&self, other: &BerkPoint, lo: i64) -> Ordering {
        self.digit_key(lo)
            .cmp(&other.digit_key(lo))
            .then(self.q.cmp(&other.q))
    }
}

impl PartialEq for BerkPoint {
    fn eq(&self, other: &Self) -> bool {
        self.q == other.q && self.key() == other.key()
    }
}

impl Eq for BerkPoint {}

impl Hash for BerkPoint {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.q.hash(state);
        self.key().hash(state);
    }
}

impl fmt::Display for BerkPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B({}, p^-{})+", self.center, self.q)
    }
}

/// A finite subtree of the Berkovich line, rooted at its largest ball.
#[derive(Clone, Debug)]
pub struct MetricTree {
    pub vertices: Vec<BerkPoint>,
    pub parent: Vec<Option<usize>>,
    index: HashMap<BerkPoint, usize>,
}

impl MetricTree {
    pub fn root(&self) -> usize {
        self.parent.iter().position(|p| p.is_none()).unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn find(&self, p: &BerkPoint) -> Option<usize> {
        self.index.get(p).copied()
    }

    /// Edges `(parent, child, length)`.
    pub fn edges(&self) -> Vec<(usize, usize, Rational64)> {
        self.parent
            .iter()
            .enumerate()
            .filter_map(|(v, p)| p.map(|u| (u, v, self.vertices[v].q - self.vertices[u].q)))
            .collect()
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.parent[v].into_iter().collect();
        out.extend(
            self.parent
                .iter()
                .enumerate()
                .filter(|(_, p)| **p == Some(v))
                .map(|(c, _)| c),
        );
        out
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.len()];
        for (v, p) in self.parent.iter().enumerate() {
            if let Some(u) = p {
                adj[*u].push(v);
                adj[v].push(*u);
            }
        }
        adj
    }

    pub fn total_length(&self) -> Rational64 {
        self.edges().iter().map(|e| e.2).sum()
    }

    /// Retraction of a point of P¹ onto the tree: the first point of the
    /// tree met by the path from `z`.
    pub fn retract(&self, z: &ProjPoint) -> BerkPoint {
        let root = self.root();
        let x = match z {
            ProjPoint::Infinity => return self.vertices[root].clone(),
            ProjPoint::Finite(x) => x,
        };
        let depth_of = |v: &BerkPoint| -> Rational64 {
            let d = x - v.center();
            if d.is_exact_zero() {
                v.q
            } else {
                v.q.min(int_q(d.val_bound()))
            }
        };
        let mut best: Option<BerkPoint> = None;
        let mut consider = |cand: BerkPoint| {
            if best.as_ref().is_none_or(|b| cand.q > b.q) {
                best = Some(cand);
            }
        };
        let r = &self.vertices[root];
        if depth_of(r) >= r.q {
            consider(r.clone());
        }
        for (u, v, _) in self.edges() {
            let (pu, pv) = (&self.vertices[u], &self.vertices[v]);
            let t = depth_of(pv);
            if t >= pu.q {
                consider(pv.ancestor_at(t));
            }
        }
        best.unwrap_or_else(|| r.clone())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let vertices: Vec<_> = self
            .vertices
            .iter()
            .map(|v| serde_json::json!({"center": v.center().format_digits(), "radius_exp": v.q.to_string()}))
            .collect();
        let edges: Vec<_> = self
            .edges()
            .iter()
            .map(|(u, v, l)| serde_json::json!({"u": u, "v": v, "length": l.to_string()}))
            .collect();
        serde_json::json!({"vertices": vertices, "edges": edges})
    }
}

/// The subtree spanned by a finite set of points: the inputs together with
/// all pairwise meets, joined along containment.
pub fn span_tree(points: &[BerkPoint]) -> MetricTree {
    let mut pts: Vec<BerkPoint> = points.to_vec();
    if pts.is_empty() {
        return MetricTree {
            vertices: Vec::new(),
            parent: Vec::new(),
            index: HashMap::new(),
        };
    }
    let lo = pts
        .iter()
        .filter_map(|b| b.center.valuation())
        .min()
        .unwrap_or(0)
        .min(pts.iter().map(|b| ceil_q(b.q)).min().unwrap_or(0));
    let sort = |v: &mut Vec<BerkPoint>| {
        v.sort_by(|a, b| a.dfs_cmp(b, lo));
        v.dedup();
    };
    sort(&mut pts);
    let meets: Vec<BerkPoint> = pts.windows(2).map(|w| w[0].meet(&w[1])).collect();
    pts.extend(meets);
    sort(&mut pts);

    let mut parent = vec![None; pts.len()];
    let mut stack: Vec<usize> = Vec::new();
    for i in 0..pts.len() {
        while let Some(&top) = stack.last() {
            if pts[top].contains(&pts[i]) {
                break;
            }
            stack.pop();
        }
        parent[i] = stack.last().copied();
        stack.push(i);
    }
    let index = pts.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
    MetricTree {
        vertices: pts,
        parent,
        index,
    }
}
