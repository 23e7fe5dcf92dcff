//! 2×2 matrices over Q_p acting on P¹(Q_p), and reduced words in free groups.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::padic::{Padic, PadicError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProjError {
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error("matrix is not invertible")]
    Singular,
    #[error("matrix is not hyperbolic")]
    NotHyperbolic,
    #[error("trace known only to O(p^{0}); more input digits needed to decide hyperbolicity")]
    UndecidableTrace(i64),
    #[error("malformed matrix: {0}")]
    Malformed(String),
}

/// A point of P¹(Q_p).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ProjPoint {
    Finite(Padic),
    Infinity,
}

impl ProjPoint {
    pub fn finite(x: Padic) -> Self {
        ProjPoint::Finite(x)
    }

    pub fn int(n: i64, p: u32, cap: u32) -> Self {
        ProjPoint::Finite(Padic::from_int(n, p, cap))
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, ProjPoint::Infinity)
    }

    pub fn with_cap(&self, cap: u32) -> ProjPoint {
        match self {
            ProjPoint::Finite(x) => ProjPoint::Finite(x.with_cap(cap)),
            ProjPoint::Infinity => ProjPoint::Infinity,
        }
    }

    pub fn as_finite(&self) -> Option<&Padic> {
        match self {
            ProjPoint::Finite(x) => Some(x),
            ProjPoint::Infinity => None,
        }
    }

    /// Homogeneous coordinates with the larger coordinate equal to 1.
    pub fn coords(&self, p: u32, cap: u32) -> Result<(Padic, Padic), PadicError> {
        match self {
            ProjPoint::Infinity => Ok((Padic::one(p, cap), Padic::zero(p, cap))),
            ProjPoint::Finite(x) => {
                if x.val_bound() >= 0 {
                    Ok((x.clone(), Padic::one(p, cap)))
                } else {
                    Ok((Padic::one(p, cap), x.inv()?))
                }
            }
        }
    }

    /// Same point up to the digits known to both.
    pub fn approx_eq(&self, other: &ProjPoint) -> bool {
        match (self, other) {
            (ProjPoint::Infinity, ProjPoint::Infinity) => true,
            (ProjPoint::Finite(x), ProjPoint::Finite(y)) => x.approx_eq(y),
            _ => false,
        }
    }
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProjPoint::Infinity => f.write_str("∞"),
            ProjPoint::Finite(x) => write!(f, "{x}"),
        }
    }
}

/// Cross-ratio `(a−c)(b−d) / ((a−d)(b−c))` of four finite points.
pub fn cross_ratio(a: &Padic, b: &Padic, c: &Padic, d: &Padic) -> Result<Padic, PadicError> {
    let num = (a - c) * (b - d);
    let den = (a - d) * (b - c);
    num.div(&den)
}

/// `[[a, b], [c, d]]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mat2 {
    pub a: Padic,
    pub b: Padic,
    pub c: Padic,
    pub d: Padic,
}

impl Mat2 {
    pub fn new(a: Padic, b: Padic, c: Padic, d: Padic) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn identity(p: u32, cap: u32) -> Self {
        Mat2::from_ints([[1, 0], [0, 1]], p, cap)
    }

    pub fn from_ints(m: [[i64; 2]; 2], p: u32, cap: u32) -> Self {
        let e = |x: i64| Padic::from_int(x, p, cap);
        Mat2::new(e(m[0][0]), e(m[0][1]), e(m[1][0]), e(m[1][1]))
    }

    /// Entries given as rational strings such as `"-2/9"`.
    pub fn from_strs<S: AsRef<str>>(m: &[[S; 2]; 2], p: u32, cap: u32) -> Result<Self, ProjError> {
        let e = |s: &S| Padic::from_rational_str(s.as_ref(), p, cap);
        let out = Mat2::new(e(&m[0][0])?, e(&m[0][1])?, e(&m[1][0])?, e(&m[1][1])?);
        if out.det().is_exact_zero() {
            return Err(ProjError::Singular);
        }
        Ok(out)
    }

    /// Parse a JSON value of the form `[["-5","32"],["-8","35"]]`.
    pub fn from_json(v: &serde_json::Value, p: u32, cap: u32) -> Result<Self, ProjError> {
        let bad = || ProjError::Malformed(v.to_string());
        let rows = v.as_array().filter(|r| r.len() == 2).ok_or_else(bad)?;
        let mut out: [[String; 2]; 2] = Default::default();
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_array().filter(|r| r.len() == 2).ok_or_else(bad)?;
            for (j, x) in row.iter().enumerate() {
                out[i][j] = match x {
                    serde_json::Value::String(s) => s.clone(),
                    serde_json::Value::Number(n) if n.is_i64() => n.to_string(),
                    _ => return Err(bad()),
                };
            }
        }
        Mat2::from_strs(&out, p, cap)
    }

    /// Same matrix with every entry's working cap set to `cap`.
    pub fn with_cap(&self, cap: u32) -> Mat2 {
        Mat2::new(
            self.a.with_cap(cap),
            self.b.with_cap(cap),
            self.c.with_cap(cap),
            self.d.with_cap(cap),
        )
    }

    pub fn prime(&self) -> u32 {
        self.a.prime()
    }

    pub fn cap(&self) -> u32 {
        self.a.cap().max(self.b.cap()).max(self.c.cap()).max(self.d.cap())
    }

    pub fn det(&self) -> Padic {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn trace(&self) -> Padic {
        &self.a + &self.d
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2::new(
            &self.a * &o.a + &self.b * &o.c,
            &self.a * &o.b + &self.b * &o.d,
            &self.c * &o.a + &self.d * &o.c,
            &self.c * &o.b + &self.d * &o.d,
        )
    }

    /// The adjugate, which is the inverse in PGL(2).
    pub fn adjugate(&self) -> Mat2 {
        Mat2::new(self.d.clone(), self.b.neg(), self.c.neg(), self.a.clone())
    }

    /// The true matrix inverse.
    pub fn inverse(&self) -> Result<Mat2, PadicError> {
        let di = self.det().inv()?;
        let adj = self.adjugate();
        Ok(Mat2::new(&adj.a * &di, &adj.b * &di, &adj.c * &di, &adj.d * &di))
    }

    pub fn scale(&self, s: &Padic) -> Mat2 {
        Mat2::new(&self.a * s, &self.b * s, &self.c * s, &self.d * s)
    }

    pub fn pow(&self, n: u64) -> Mat2 {
        let mut acc = Mat2::identity(self.prime(), self.cap());
        let mut b = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&b);
            }
            b = b.mul(&b);
            n >>= 1;
        }
        acc
    }

    fn entries(&self) -> [&Padic; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    /// Scale by a power of p so the entries are integral with one unit.
    /// Exact entries stay exact.
    pub fn normalize_p_power(&self) -> Mat2 {
        let v = self
            .entries()
            .iter()
            .map(|e| e.val_bound())
            .min()
            .unwrap_or(0);
        if v == 0 || v == i64::MAX {
            return self.clone();
        }
        self.scale(&Padic::p_power(-v, self.prime(), self.cap()))
    }

    /// Divide by the first entry of minimal valuation, making it 1.
    pub fn normalize(&self) -> Result<Mat2, PadicError> {
        let pivot = self
            .entries()
            .into_iter()
            .filter(|e| !e.is_zero())
            .min_by_key(|e| e.valuation())
            .ok_or(PadicError::PrecisionExhaustedDivisor)?;
        let s = pivot.inv()?;
        Ok(self.scale(&s))
    }

    /// Equality in PGL(2): all 2×2 minors of the stacked entries vanish.
    pub fn pgl_eq(&self, o: &Mat2) -> bool {
        let x = self.entries();
        let y = o.entries();
        for i in 0..4 {
            for j in (i + 1)..4 {
                if !(x[i] * y[j] - x[j] * y[i]).is_zero() {
                    return false;
                }
            }
        }
        true
    }

    /// Scalar matrix, i.e. the identity of PGL(2).
    pub fn is_scalar(&self) -> bool {
        self.b.is_zero() && self.c.is_zero() && (&self.a - &self.d).is_zero()
    }

    /// Möbius action on P¹.
    pub fn apply(&self, z: &ProjPoint) -> Result<ProjPoint, PadicError> {
        let (num, den) = match z {
            ProjPoint::Infinity => (self.a.clone(), self.c.clone()),
            ProjPoint::Finite(x) => (&self.a * x + &self.b, &self.c * x + &self.d),
        };
        if den.is_exact_zero() {
            return Ok(ProjPoint::Infinity);
        }
        Ok(ProjPoint::Finite(num.div(&den)?))
    }

    /// The pole, i.e. the preimage of ∞.
    pub fn pole(&self) -> Result<ProjPoint, PadicError> {
        if self.c.is_exact_zero() {
            return Ok(ProjPoint::Infinity);
        }
        Ok(ProjPoint::Finite(self.d.neg().div(&self.c)?))
    }

    /// Newton-polygon test: `2 val(tr) < val(det)`.
    pub fn is_hyperbolic(&self) -> Result<bool, ProjError> {
        let det = self.det();
        let vd = det.valuation().ok_or(ProjError::Singular)?;
        let t = self.trace();
        match t.valuation() {
            Some(vt) => Ok(2 * vt < vd),
            None if t.is_exact_zero() => Ok(false),
            None => {
                let k = t.val_bound();
                if 2 * k >= vd {
                    Ok(false)
                } else {
                    Err(ProjError::UndecidableTrace(k))
                }
            }
        }
    }

    /// Eigenvalues and fixed points of a hyperbolic matrix.
    pub fn eigen_data(&self) -> Result<EigenData, ProjError> {
        if !self.is_hyperbolic()? {
            return Err(ProjError::NotHyperbolic);
        }
        let t = self.trace();
        let det = self.det();
        let mut lam = t.clone();
        let limit = 2 * self.cap() as usize + 16;
        for _ in 0..limit {
            let next = &t - &det.div(&lam)?;
            if next == lam {
                break;
            }
            lam = next;
        }
        let lam2 = det.div(&lam)?;
        let f1 = self.fixed_point_for(&lam)?;
        let f2 = self.fixed_point_for(&lam2)?;
        Ok(EigenData {
            lambda1: lam,
            lambda2: lam2,
            f1,
            f2,
        })
    }

    fn fixed_point_for(&self, lam: &Padic) -> Result<ProjPoint, PadicError> {
        let v1 = (self.b.clone(), lam - &self.a);
        let v2 = (lam - &self.d, self.c.clone());
        let size = |v: &(Padic, Padic)| v.0.val_bound().min(v.1.val_bound());
        let (x, y) = if size(&v1) <= size(&v2) { v1 } else { v2 };
        if y.is_exact_zero() || (y.is_zero() && !x.is_zero()) {
            return Ok(ProjPoint::Infinity);
        }
        Ok(ProjPoint::Finite(x.div(&y)?))
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

/// Eigen-data of a hyperbolic matrix. `lambda1` has the smaller valuation
/// (larger absolute value); `f1` is its fixed point, which attracts the
/// forward orbit of every other point. `f2` is the repelling fixed point.
#[derive(Clone, Debug)]
pub struct EigenData {
    pub lambda1: Padic,
    pub lambda2: Padic,
    pub f1: ProjPoint,
    pub f2: ProjPoint,
}

impl EigenData {
    pub fn attracting(&self) -> &ProjPoint {
        &self.f1
    }

    pub fn repelling(&self) -> &ProjPoint {
        &self.f2
    }
}

/// A word in free generators. Letter `k > 0` is generator `k-1`, letter
/// `-k` is its inverse.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(pub Vec<i32>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn letter(l: i32) -> Self {
        Word(vec![l])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != -w[1])
    }

    /// Free reduction.
    pub fn reduced(&self) -> Word {
        let mut out: Vec<i32> = Vec::with_capacity(self.0.len());
        for &l in &self.0 {
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| -l).collect())
    }

    /// Reduced product `self · other`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v).reduced()
    }

    /// Substitute a word for each generator.
    pub fn substitute(&self, images: &[Word]) -> Word {
        let mut out = Word::identity();
        for &l in &self.0 {
            let w = &images[l.unsigned_abs() as usize - 1];
            out = out.concat(&if l > 0 { w.clone() } else { w.inverse() });
        }
        out
    }

    /// Evaluate as a matrix product.
    pub fn eval(&self, gens: &GenSet) -> Mat2 {
        let mut acc = Mat2::identity(gens.prime(), gens.cap());
        for &l in &self.0 {
            acc = acc.mul(gens.letter(l));
        }
        acc
    }

    /// Exponent sums per generator (the image in Z^g).
    pub fn abelianize(&self, g: usize) -> Vec<i64> {
        let mut v = vec![0i64; g];
        for &l in &self.0 {
            v[l.unsigned_abs() as usize - 1] += l.signum() as i64;
        }
        v
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|&l| {
                if l > 0 {
                    format!("g{l}")
                } else {
                    format!("g{}^-1", -l)
                }
            })
            .collect();
        f.write_str(&parts.join(" "))
    }
}

/// Letters in the fixed enumeration order `1, -1, 2, -2, ...`.
pub fn letters(g: usize) -> Vec<i32> {
    (1..=g as i32).flat_map(|i| [i, -i]).collect()
}

/// All reduced words of length at most `m`, depth first.
pub fn enumerate_words(g: usize, m: usize) -> Vec<Word> {
    fn rec(g: usize, m: usize, cur: &mut Vec<i32>, out: &mut Vec<Word>) {
        out.push(Word(cur.clone()));
        if cur.len() == m {
            return;
        }
        for l in letters(g) {
            if cur.last() == Some(&-l) {
                continue;
            }
            cur.push(l);
            rec(g, m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(g, m, &mut Vec::new(), &mut out);
    out
}

/// `1 + Σ_{k=1}^{m} 2g(2g−1)^{k−1}`.
pub fn word_count(g: usize, m: usize) -> usize {
    let mut total = 1usize;
    let mut level = 2 * g;
    for _ in 0..m {
        total += level;
        level *= 2 * g - 1;
    }
    total
}

/// Generators together with their inverses, indexed by letter.
#[derive(Clone, Debug)]
pub struct GenSet {
    mats: Vec<Mat2>,
    invs: Vec<Mat2>,
}

impl GenSet {
    pub fn new(gens: &[Mat2]) -> Self {
        GenSet {
            mats: gens.to_vec(),
            invs: gens.iter().map(|m| m.adjugate()).collect(),
        }
    }

    pub fn g(&self) -> usize {
        self.mats.len()
    }

    pub fn gens(&self) -> &[Mat2] {
        &self.mats
    }

    pub fn prime(&self) -> u32 {
        self.mats[0].prime()
    }

    pub fn cap(&self) -> u32 {
        self.mats.iter().map(|m| m.cap()).max().unwrap_or(1)
    }

    pub fn letter(&self, l: i32) -> &Mat2 {
        let i = l.unsigned_abs() as usize - 1;
        if l > 0 {
            &self.mats[i]
        } else {
            &self.invs[i]
        }
    }
}

/// Visit every reduced word `w` of length at most `m` together with the
/// orbit `w·x` of each starting point. Words grow on the left, so each
/// node costs one Möbius application per point.
pub fn visit_orbits<F>(
    gens: &GenSet,
    m: usize,
    start: &[ProjPoint],
    mut visit: F,
) -> Result<(), PadicError>
where
    F: FnMut(&[i32], &[ProjPoint]) -> Result<(), PadicError>,
{
    visit_orbits_from(gens, m, &mut Vec::new(), start, &mut visit)
}

/// As [`visit_orbits`] but restricted to words whose leftmost letter is
/// `first` (plus nothing else); used to split the work by first letter.
pub fn visit_orbits_with_first<F>(
    gens: &GenSet,
    m: usize,
    first: i32,
    start: &[ProjPoint],
    mut visit: F,
) -> Result<(), PadicError>
where
    F: FnMut(&[i32], &[ProjPoint]) -> Result<(), PadicError>,
{
    if m == 0 {
        return Ok(());
    }
    let mat = gens.letter(first);
    let pts: Vec<ProjPoint> = start
        .iter()
        .map(|x| mat.apply(x))
        .collect::<Result<_, _>>()?;
    let mut word = vec![first];
    visit_orbits_from(gens, m, &mut word, &pts, &mut visit)
}

fn visit_orbits_from<F>(
    gens: &GenSet,
    m: usize,
    word: &mut Vec<i32>,
    pts: &[ProjPoint],
    visit: &mut F,
) -> Result<(), PadicError>
where
    F: FnMut(&[i32], &[ProjPoint]) -> Result<(), PadicError>,
{
    visit(word, pts)?;
    if word.len() == m {
        return Ok(());
    }
    for l in letters(gens.g()) {
        if word.first() == Some(&-l) {
            continue;
        }
        let mat = gens.letter(l);
        let next: Vec<ProjPoint> = pts.iter().map(|x| mat.apply(x)).collect::<Result<_, _>>()?;
        word.insert(0, l);
        let r = visit_orbits_from(gens, m, word, &next, visit);
        word.remove(0);
        r?;
    }
    Ok(())
}
