//! Elements of Q_p at capped relative precision.
//!
//! A [`Padic`] is either an exact value (a rational of the form `u * p^v`
//! with `u` an integer prime to `p`), a value known to a finite number of
//! significant digits, or zero (exact, or known only up to `O(p^k)`).
//! Precision is tracked through every operation: cancellation in a sum
//! lowers the number of known digits, products keep the smaller relative
//! precision of the two factors.

use std::cell::RefCell;
use std::cmp::{max, min};
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Guard digits added on top of a requested output precision.
pub const DEFAULT_GUARD_DIGITS: u32 = 10;

/// Environment variable overriding [`DEFAULT_GUARD_DIGITS`].
pub const GUARD_ENV: &str = "MUMFORD_GUARD_DIGITS";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PadicError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("precision-exhausted divisor")]
    PrecisionExhaustedDivisor,
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("insufficient precision: need digits up to p^{needed}, known up to p^{known}")]
    InsufficientPrecision { needed: i64, known: i64 },
}

/// Number of relative digits carried by arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrecisionPolicy {
    pub working_digits: u32,
}

impl PrecisionPolicy {
    /// Working precision for `n` requested output digits, honouring the
    /// guard-digit environment override.
    pub fn for_output(n: u32) -> Self {
        Self::with_guard(n, guard_digits())
    }

    pub fn with_guard(n: u32, guard: u32) -> Self {
        PrecisionPolicy {
            working_digits: max(1, n + guard),
        }
    }
}

/// Guard digits from the environment, or the default.
pub fn guard_digits() -> u32 {
    std::env::var(GUARD_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_GUARD_DIGITS)
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

thread_local! {
    static POWERS: RefCell<Vec<(u32, Vec<BigInt>)>> = const { RefCell::new(Vec::new()) };
}

/// `p^k` as a big integer (cached per thread).
pub fn pow_p(p: u32, k: u32) -> BigInt {
    POWERS.with(|cell| {
        let mut tables = cell.borrow_mut();
        let idx = match tables.iter().position(|(q, _)| *q == p) {
            Some(i) => i,
            None => {
                tables.push((p, vec![BigInt::one()]));
                tables.len() - 1
            }
        };
        let table = &mut tables[idx].1;
        if (k as usize) < table.len() {
            return table[k as usize].clone();
        }
        if k > 4096 {
            return num_traits::pow(BigInt::from(p), k as usize);
        }
        while table.len() <= k as usize {
            let next = table.last().unwrap() * p;
            table.push(next);
        }
        table[k as usize].clone()
    })
}

/// Strip factors of `p`, returning their count and the cofactor.
fn split_p(mut n: BigInt, p: u32) -> (i64, BigInt) {
    let pb = BigInt::from(p);
    let mut k = 0i64;
    loop {
        let (q, r) = n.div_rem(&pb);
        if r.is_zero() {
            n = q;
            k += 1;
        } else {
            return (k, n);
        }
    }
}

fn min_abs(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => Some(min(x, y)),
    }
}

fn mod_inverse(u: &BigInt, m: &BigInt) -> BigInt {
    if let (Some(uu), Some(mm)) = (u.mod_floor(m).to_i64(), m.to_i64()) {
        return BigInt::from(mod_inverse_small(uu, mm));
    }
    let e = u.extended_gcd(m);
    debug_assert!(e.gcd.is_one() || (-&e.gcd).is_one());
    let x = if e.gcd.is_negative() { -e.x } else { e.x };
    x.mod_floor(m)
}

fn mod_inverse_small(u: i64, m: i64) -> i64 {
    let (mut r0, mut r1) = (m as i128, u as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    debug_assert_eq!(r0, 1);
    t0.rem_euclid(m as i128) as i64
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Repr {
    /// `None`: exact zero. `Some(k)`: zero known modulo `p^k`.
    Zero(Option<i64>),
    /// `unit * p^val`. With `prec = None` the value is exact and `unit` is
    /// any integer prime to `p`; otherwise `0 < unit < p^prec`.
    Unit {
        val: i64,
        unit: BigInt,
        prec: Option<u32>,
    },
}

/// An element of Q_p with tracked precision.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Padic {
    p: u32,
    cap: u32,
    repr: Repr,
}

impl Padic {
    fn build(p: u32, cap: u32, v: i64, s: BigInt, abs: Option<i64>) -> Padic {
        if s.is_zero() {
            return Padic {
                p,
                cap,
                repr: Repr::Zero(abs),
            };
        }
        let (k, u) = split_p(s, p);
        let val = v + k;
        let repr = match abs {
            None => Repr::Unit {
                val,
                unit: u,
                prec: None,
            },
            Some(a) => {
                if val >= a {
                    Repr::Zero(Some(a))
                } else {
                    let prec = min(a - val, cap as i64) as u32;
                    let m = pow_p(p, prec);
                    Repr::Unit {
                        val,
                        unit: u.mod_floor(&m),
                        prec: Some(prec),
                    }
                }
            }
        };
        Padic { p, cap, repr }
    }

    /// `s·p^v` known modulo `p^abs` (exact when `abs` is `None`).
    pub fn from_parts(p: u32, cap: u32, v: i64, s: BigInt, abs: Option<i64>) -> Padic {
        Padic::build(p, cap, v, s, abs)
    }

    /// Exact zero.
    pub fn zero(p: u32, cap: u32) -> Padic {
        Padic {
            p,
            cap,
            repr: Repr::Zero(None),
        }
    }

    /// Zero known modulo `p^k`.
    pub fn big_o(p: u32, k: i64, cap: u32) -> Padic {
        Padic {
            p,
            cap,
            repr: Repr::Zero(Some(k)),
        }
    }

    pub fn one(p: u32, cap: u32) -> Padic {
        Padic::from_int(1, p, cap)
    }

    /// Exact integer.
    pub fn from_int(n: impl Into<BigInt>, p: u32, cap: u32) -> Padic {
        Padic::build(p, cap, 0, n.into(), None)
    }

    /// `p^k`, exact.
    pub fn p_power(k: i64, p: u32, cap: u32) -> Padic {
        Padic::build(p, cap, k, BigInt::one(), None)
    }

    /// Exact when the rational is `u * p^v` with `u` an integer, otherwise
    /// carried to `cap` significant digits.
    pub fn from_bigrational(
        num: &BigInt,
        den: &BigInt,
        p: u32,
        cap: u32,
    ) -> Result<Padic, PadicError> {
        if !is_prime(p as u64) {
            return Err(PadicError::NotPrime(p as u64));
        }
        if den.is_zero() {
            return Err(PadicError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(Padic::zero(p, cap));
        }
        let (kn, un) = split_p(num.clone(), p);
        let (kd, ud) = split_p(den.clone(), p);
        let v = kn - kd;
        if ud.abs().is_one() {
            let u = if ud.is_negative() { -un } else { un };
            return Ok(Padic::build(p, cap, v, u, None));
        }
        let m = pow_p(p, cap);
        let inv = mod_inverse(&ud.mod_floor(&m), &m);
        let u = (un * inv).mod_floor(&m);
        Ok(Padic {
            p,
            cap,
            repr: Repr::Unit {
                val: v,
                unit: u,
                prec: Some(cap),
            },
        })
    }

    /// `numerator / denominator` in Q_p with `n` significant digits.
    pub fn parse_rational(
        numerator: i64,
        denominator: i64,
        p: u32,
        n: u32,
    ) -> Result<Padic, PadicError> {
        Padic::from_bigrational(&BigInt::from(numerator), &BigInt::from(denominator), p, n)
    }

    pub fn from_ratio(r: &BigRational, p: u32, cap: u32) -> Result<Padic, PadicError> {
        Padic::from_bigrational(r.numer(), r.denom(), p, cap)
    }

    /// Parse `"a"` or `"a/b"` with integer `a`, `b`.
    pub fn from_rational_str(s: &str, p: u32, cap: u32) -> Result<Padic, PadicError> {
        let s = s.trim();
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let num: BigInt = n
            .parse()
            .map_err(|_| PadicError::Parse(format!("bad rational {s:?}")))?;
        let den: BigInt = d
            .parse()
            .map_err(|_| PadicError::Parse(format!("bad rational {s:?}")))?;
        Padic::from_bigrational(&num, &den, p, cap)
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    /// Same value with a different working-precision ceiling.
    pub fn with_cap(&self, cap: u32) -> Padic {
        let mut out = self.clone();
        out.cap = cap;
        if let Repr::Unit {
            val,
            unit,
            prec: Some(k),
        } = &self.repr
        {
            if *k > cap {
                let m = pow_p(self.p, cap);
                out.repr = Repr::Unit {
                    val: *val,
                    unit: unit.mod_floor(&m),
                    prec: Some(cap),
                };
            }
        }
        out
    }

    /// True for exact zero and for zero known only modulo some `p^k`.
    pub fn is_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero(_))
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero(None))
    }

    pub fn is_exact(&self) -> bool {
        matches!(
            self.repr,
            Repr::Zero(None) | Repr::Unit { prec: None, .. }
        )
    }

    /// Valuation of a nonzero value; `None` for any zero.
    pub fn valuation(&self) -> Option<i64> {
        match self.repr {
            Repr::Unit { val, .. } => Some(val),
            Repr::Zero(_) => None,
        }
    }

    /// A lower bound for the valuation (`i64::MAX` for exact zero).
    pub fn val_bound(&self) -> i64 {
        match self.repr {
            Repr::Unit { val, .. } => val,
            Repr::Zero(Some(k)) => k,
            Repr::Zero(None) => i64::MAX,
        }
    }

    /// Power of `p` modulo which the value is known; `None` when exact.
    pub fn abs_precision(&self) -> Option<i64> {
        match self.repr {
            Repr::Zero(k) => k,
            Repr::Unit {
                val,
                prec: Some(k),
                ..
            } => Some(val + k as i64),
            Repr::Unit { prec: None, .. } => None,
        }
    }

    /// Number of known significant digits; `None` when exact.
    pub fn rel_precision(&self) -> Option<u32> {
        match self.repr {
            Repr::Zero(None) => None,
            Repr::Zero(Some(_)) => Some(0),
            Repr::Unit { prec, .. } => prec,
        }
    }

    /// The unit part reduced modulo `p^k`.
    fn unit_residue(&self, k: u32) -> BigInt {
        match &self.repr {
            Repr::Unit { unit, .. } => unit.mod_floor(&pow_p(self.p, k)),
            Repr::Zero(_) => BigInt::zero(),
        }
    }

    /// Known unit digits, lowest power first. The leading entry is nonzero.
    pub fn unit_digits(&self) -> Vec<u32> {
        match &self.repr {
            Repr::Zero(_) => Vec::new(),
            Repr::Unit { unit, prec, .. } => {
                let (u, count) = match prec {
                    Some(k) => (unit.clone(), Some(*k)),
                    None if unit.is_positive() => (unit.clone(), None),
                    None => (self.unit_residue(self.cap), Some(self.cap)),
                };
                base_p_digits(&u, self.p, count)
            }
        }
    }

    fn is_positive_exact(&self) -> bool {
        matches!(&self.repr, Repr::Unit { unit, prec: None, .. } if unit.is_positive())
    }

    pub fn neg(&self) -> Padic {
        let repr = match &self.repr {
            Repr::Zero(k) => Repr::Zero(*k),
            Repr::Unit {
                val,
                unit,
                prec: None,
            } => Repr::Unit {
                val: *val,
                unit: -unit,
                prec: None,
            },
            Repr::Unit {
                val,
                unit,
                prec: Some(k),
            } => Repr::Unit {
                val: *val,
                unit: pow_p(self.p, *k) - unit,
                prec: Some(*k),
            },
        };
        Padic {
            p: self.p,
            cap: self.cap,
            repr,
        }
    }

    pub fn add(&self, other: &Padic) -> Padic {
        assert_eq!(self.p, other.p, "prime mismatch");
        let cap = max(self.cap, other.cap);
        let abs = min_abs(self.abs_precision(), other.abs_precision());
        match (&self.repr, &other.repr) {
            (Repr::Zero(_), Repr::Zero(_)) => Padic {
                p: self.p,
                cap,
                repr: Repr::Zero(abs),
            },
            (Repr::Zero(_), Repr::Unit { val, unit, .. })
            | (Repr::Unit { val, unit, .. }, Repr::Zero(_)) => {
                Padic::build(self.p, cap, *val, unit.clone(), abs)
            }
            (
                Repr::Unit {
                    val: v1, unit: u1, ..
                },
                Repr::Unit {
                    val: v2, unit: u2, ..
                },
            ) => {
                let v = min(*v1, *v2);
                let s = if v1 == v2 {
                    u1 + u2
                } else if v1 < v2 {
                    u1 + u2 * pow_p(self.p, (v2 - v) as u32)
                } else {
                    u1 * pow_p(self.p, (v1 - v) as u32) + u2
                };
                Padic::build(self.p, cap, v, s, abs)
            }
        }
    }

    pub fn sub(&self, other: &Padic) -> Padic {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Padic) -> Padic {
        assert_eq!(self.p, other.p, "prime mismatch");
        let cap = max(self.cap, other.cap);
        let p = self.p;
        let repr = match (&self.repr, &other.repr) {
            (Repr::Zero(None), _) | (_, Repr::Zero(None)) => Repr::Zero(None),
            (Repr::Zero(Some(k)), r) | (r, Repr::Zero(Some(k))) => match r {
                Repr::Zero(Some(j)) => Repr::Zero(Some(k + j)),
                Repr::Unit { val, .. } => Repr::Zero(Some(k + val)),
                Repr::Zero(None) => unreachable!(),
            },
            (
                Repr::Unit {
                    val: v1,
                    unit: u1,
                    prec: p1,
                },
                Repr::Unit {
                    val: v2,
                    unit: u2,
                    prec: p2,
                },
            ) => {
                let val = v1 + v2;
                match (p1, p2) {
                    (None, None) => Repr::Unit {
                        val,
                        unit: u1 * u2,
                        prec: None,
                    },
                    _ => {
                        let k = min(
                            min(p1.unwrap_or(u32::MAX), p2.unwrap_or(u32::MAX)),
                            cap,
                        );
                        let m = pow_p(p, k);
                        Repr::Unit {
                            val,
                            unit: (u1 * u2).mod_floor(&m),
                            prec: Some(k),
                        }
                    }
                }
            }
        };
        Padic { p, cap, repr }
    }

    pub fn inv(&self) -> Result<Padic, PadicError> {
        match &self.repr {
            Repr::Zero(None) => Err(PadicError::DivisionByZero),
            Repr::Zero(Some(_)) => Err(PadicError::PrecisionExhaustedDivisor),
            Repr::Unit { val, unit, prec } => {
                let repr = match prec {
                    None if unit.abs().is_one() => Repr::Unit {
                        val: -val,
                        unit: unit.clone(),
                        prec: None,
                    },
                    _ => {
                        let k = prec.map_or(self.cap, |k| min(k, self.cap));
                        let m = pow_p(self.p, k);
                        Repr::Unit {
                            val: -val,
                            unit: mod_inverse(&unit.mod_floor(&m), &m),
                            prec: Some(k),
                        }
                    }
                };
                Ok(Padic {
                    p: self.p,
                    cap: self.cap,
                    repr,
                })
            }
        }
    }

    pub fn div(&self, other: &Padic) -> Result<Padic, PadicError> {
        assert_eq!(self.p, other.p, "prime mismatch");
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, e: i64) -> Result<Padic, PadicError> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Padic::one(self.p, self.cap);
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&b);
            }
            b = b.mul(&b);
            e >>= 1;
        }
        Ok(acc)
    }

    /// Both values agree on every digit known to both.
    pub fn approx_eq(&self, other: &Padic) -> bool {
        self.sub(other).is_zero()
    }

    /// `self` reproduces every digit of `expected` (and knows at least as
    /// many digits).
    pub fn agrees_with(&self, expected: &Padic) -> bool {
        let enough = match (self.abs_precision(), expected.abs_precision()) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(a), Some(b)) => a >= b,
        };
        enough && self.approx_eq(expected)
    }

    /// Keep at most `n` significant digits.
    pub fn truncate_rel(&self, n: u32) -> Padic {
        match &self.repr {
            Repr::Zero(_) => self.clone(),
            Repr::Unit { val, prec, .. } => {
                let k = min(prec.unwrap_or(u32::MAX), n);
                let unit = self.unit_residue(k);
                Padic {
                    p: self.p,
                    cap: self.cap,
                    repr: Repr::Unit {
                        val: *val,
                        unit,
                        prec: Some(k),
                    },
                }
            }
        }
    }

    /// Keep digits below `p^a` only.
    pub fn truncate_abs(&self, a: i64) -> Padic {
        let known = self.abs_precision().map_or(a, |k| min(k, a));
        match &self.repr {
            Repr::Zero(_) => Padic {
                p: self.p,
                cap: self.cap,
                repr: Repr::Zero(Some(known)),
            },
            Repr::Unit { val, .. } => {
                if *val >= known {
                    return Padic::big_o(self.p, known, self.cap);
                }
                let k = (known - val) as u32;
                Padic {
                    p: self.p,
                    cap: self.cap,
                    repr: Repr::Unit {
                        val: *val,
                        unit: self.unit_residue(k),
                        prec: Some(k),
                    },
                }
            }
        }
    }

    /// The exact value `sum_{i<k} a_i p^i`, i.e. the representative of
    /// `self mod p^k` with digits only below `p^k`.
    pub fn residue(&self, k: i64) -> Result<Padic, PadicError> {
        if let Some(a) = self.abs_precision() {
            if a < k {
                return Err(PadicError::InsufficientPrecision {
                    needed: k,
                    known: a,
                });
            }
        }
        match &self.repr {
            Repr::Zero(_) => Ok(Padic::zero(self.p, self.cap)),
            Repr::Unit { val, .. } => {
                if *val >= k {
                    return Ok(Padic::zero(self.p, self.cap));
                }
                let u = self.unit_residue((k - val) as u32);
                Ok(Padic::build(self.p, self.cap, *val, u, None))
            }
        }
    }

    /// The exact rational value, if the value is exact.
    pub fn to_rational(&self) -> Option<BigRational> {
        match &self.repr {
            Repr::Zero(None) => Some(BigRational::zero()),
            Repr::Unit {
                val,
                unit,
                prec: None,
            } => {
                let pk = pow_p(self.p, val.unsigned_abs() as u32);
                Some(if *val >= 0 {
                    BigRational::from_integer(unit * pk)
                } else {
                    BigRational::new(unit.clone(), pk)
                })
            }
            _ => None,
        }
    }

    /// A rational whose expansion agrees with every known digit.
    pub fn representative(&self) -> BigRational {
        match &self.repr {
            Repr::Zero(_) => BigRational::zero(),
            Repr::Unit { val, unit, .. } => {
                let pk = pow_p(self.p, val.unsigned_abs() as u32);
                if *val >= 0 {
                    BigRational::from_integer(unit * pk)
                } else {
                    BigRational::new(unit.clone(), pk)
                }
            }
        }
    }

    /// Render in the trailing-left digit notation, e.g. `(…220200000100)_3`.
    pub fn format_digits(&self) -> String {
        let p = self.p;
        match &self.repr {
            Repr::Zero(None) => format!("(0)_{p}"),
            Repr::Zero(Some(a)) => {
                if *a > 0 {
                    format!("(…{})_{p}", "0".repeat(*a as usize))
                } else {
                    format!("(….{})_{p}", "0".repeat((-*a) as usize))
                }
            }
            Repr::Unit { val, .. } => {
                let digits = self.unit_digits();
                let exact = self.is_positive_exact();
                let hi = val + digits.len() as i64;
                let lo = min(*val, 0);
                let digit_at = |i: i64| -> u32 {
                    if i < *val {
                        0
                    } else {
                        digits.get((i - val) as usize).copied().unwrap_or(0)
                    }
                };
                let mut s = String::from("(");
                if !exact {
                    s.push('…');
                }
                let top = if exact { max(hi, 1) } else { hi };
                for i in (0..top).rev() {
                    s.push(digit_char(digit_at(i)));
                }
                if lo < 0 {
                    // unknown positions between the known digits and the
                    // point have no symbol of their own and print as 0
                    s.push('.');
                    for i in (lo..0).rev() {
                        s.push(digit_char(digit_at(i)));
                    }
                }
                s.push_str(&format!(")_{p}"));
                s
            }
        }
    }

    /// Parse the trailing-left digit notation. Without a leading ellipsis
    /// the value is exact.
    pub fn parse_digits(s: &str, p: u32) -> Result<Padic, PadicError> {
        let err = || PadicError::Parse(format!("malformed digit string {s:?}"));
        let s = s.trim();
        let body = s.strip_prefix('(').ok_or_else(err)?;
        let (body, prime) = body.rsplit_once(")_").ok_or_else(err)?;
        let prime: u32 = prime.trim().parse().map_err(|_| err())?;
        if prime != p {
            return Err(PadicError::Parse(format!(
                "digit string is for p={prime}, expected p={p}"
            )));
        }
        if !is_prime(p as u64) {
            return Err(PadicError::NotPrime(p as u64));
        }
        let (truncated, body) = if let Some(rest) = body.strip_prefix('…') {
            (true, rest)
        } else if let Some(rest) = body.strip_prefix("...") {
            (true, rest)
        } else {
            (false, body)
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if body.contains('.') && frac_part.is_empty() {
            return Err(err());
        }
        if int_part.is_empty() && !(truncated && !frac_part.is_empty()) {
            return Err(err());
        }
        let mut value = BigInt::zero();
        let mut count = 0u32;
        for c in int_part.chars().chain(frac_part.chars()) {
            let d = c.to_digit(36).ok_or_else(err)?;
            if d >= p {
                return Err(PadicError::Parse(format!(
                    "digit {c:?} out of range for p={p}"
                )));
            }
            value = value * p + d;
            count += 1;
        }
        let f = frac_part.chars().count() as i64;
        let cap = max(count, 1);
        let abs = if truncated {
            Some(int_part.chars().count() as i64)
        } else {
            None
        };
        let x = Padic::build(p, cap, -f, value, abs);
        Ok(match x.rel_precision() {
            Some(k) if k > 0 => x.with_cap(k),
            _ => x,
        })
    }
}

fn digit_char(d: u32) -> char {
    std::char::from_digit(d, 36).unwrap_or('?')
}

/// Base-`p` digits of a nonnegative integer, lowest first. With `count`
/// the output has exactly that many digits.
fn base_p_digits(u: &BigInt, p: u32, count: Option<u32>) -> Vec<u32> {
    let mut out = Vec::new();
    let mut n = u.clone();
    let pb = BigInt::from(p);
    match count {
        Some(k) => {
            for _ in 0..k {
                let (q, r) = n.div_mod_floor(&pb);
                out.push(r.to_u32().unwrap());
                n = q;
            }
        }
        None => {
            while n.sign() == Sign::Plus {
                let (q, r) = n.div_mod_floor(&pb);
                out.push(r.to_u32().unwrap());
                n = q;
            }
        }
    }
    out
}

impl fmt::Display for Padic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.format_digits())
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $impl:ident) => {
        impl std::ops::$trait<&Padic> for &Padic {
            type Output = Padic;
            fn $method(self, rhs: &Padic) -> Padic {
                Padic::$impl(self, rhs)
            }
        }
        impl std::ops::$trait<Padic> for Padic {
            type Output = Padic;
            fn $method(self, rhs: Padic) -> Padic {
                Padic::$impl(&self, &rhs)
            }
        }
        impl std::ops::$trait<&Padic> for Padic {
            type Output = Padic;
            fn $method(self, rhs: &Padic) -> Padic {
                Padic::$impl(&self, rhs)
            }
        }
    };
}

forward_binop!(Add, add, add);
forward_binop!(Sub, sub, sub);
forward_binop!(Mul, mul, mul);

impl std::ops::Neg for &Padic {
    type Output = Padic;
    fn neg(self) -> Padic {
        Padic::neg(self)
    }
}

impl std::ops::Neg for Padic {
    type Output = Padic;
    fn neg(self) -> Padic {
        Padic::neg(&self)
    }
}

/// JSON form: `{"p":3,"val":2,"digits":[1,0,...]}` with `digits[0]` the
/// lowest-power unit digit. A zero has no digits; its `val` is the known
/// absolute precision, or `null` when exact.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct PadicJson {
    pub p: u32,
    pub val: Option<i64>,
    pub digits: Vec<u32>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub exact: bool,
}

impl From<&Padic> for PadicJson {
    fn from(x: &Padic) -> Self {
        match &x.repr {
            Repr::Zero(k) => PadicJson {
                p: x.p,
                val: *k,
                digits: Vec::new(),
                exact: k.is_none(),
            },
            Repr::Unit { val, .. } => PadicJson {
                p: x.p,
                val: Some(*val),
                digits: x.unit_digits(),
                exact: x.is_positive_exact(),
            },
        }
    }
}

impl TryFrom<PadicJson> for Padic {
    type Error = PadicError;

    fn try_from(j: PadicJson) -> Result<Self, Self::Error> {
        if !is_prime(j.p as u64) {
            return Err(PadicError::NotPrime(j.p as u64));
        }
        let cap = max(j.digits.len() as u32, 1);
        if j.digits.is_empty() {
            return Ok(match j.val {
                None => Padic::zero(j.p, cap),
                Some(k) => Padic::big_o(j.p, k, cap),
            });
        }
        let val = j
            .val
            .ok_or_else(|| PadicError::Parse("nonzero value without val".into()))?;
        if j.digits[0] == 0 {
            return Err(PadicError::Parse("leading unit digit is zero".into()));
        }
        let mut u = BigInt::zero();
        for &d in j.digits.iter().rev() {
            if d >= j.p {
                return Err(PadicError::Parse(format!("digit {d} out of range")));
            }
            u = u * j.p + d;
        }
        let abs = if j.exact {
            None
        } else {
            Some(val + j.digits.len() as i64)
        };
        Ok(Padic::build(j.p, cap, val, u, abs))
    }
}

impl Serialize for Padic {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PadicJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Padic {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = PadicJson::deserialize(d)?;
        Padic::try_from(j).map_err(serde::de::Error::custom)
    }
}
