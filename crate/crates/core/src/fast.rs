//! Capped-relative Q_p arithmetic on machine words, for the inner loops of
//! orbit sums. Usable when `p^cap` fits in 63 bits.

use num_bigint::BigInt;

use crate::padic::Padic;
use crate::proj::{Mat2, ProjPoint};

/// `unit·p^val` with `prec` known digits. Zero is `unit = 0, prec = 0` and
/// `val` is then the power of `p` it is known modulo.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Fq {
    val: i64,
    unit: u64,
    prec: u32,
}

#[derive(Clone, Debug)]
pub(crate) struct Ctx {
    p: u64,
    cap: u32,
    pw: Vec<u64>,
}

fn inv_mod(u: u64, m: u64) -> u64 {
    let (mut r0, mut r1) = (m as i128, u as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    t0.rem_euclid(m as i128) as u64
}

impl Ctx {
    pub(crate) fn new(p: u32, cap: u32) -> Option<Ctx> {
        let mut pw = vec![1u64];
        for _ in 0..cap {
            let next = pw.last()?.checked_mul(p as u64)?;
            if next >= 1 << 62 {
                return None;
            }
            pw.push(next);
        }
        Some(Ctx {
            p: p as u64,
            cap,
            pw,
        })
    }

    fn zero_mod(&self, abs: i64) -> Fq {
        Fq {
            val: abs,
            unit: 0,
            prec: 0,
        }
    }

    /// Normalize `s·p^v` known modulo `p^(v+prec)`.
    fn make(&self, mut v: i64, mut s: u64, mut prec: u32) -> Fq {
        s %= self.pw[prec as usize];
        if s == 0 {
            return self.zero_mod(v + prec as i64);
        }
        while s % self.p == 0 {
            s /= self.p;
            v += 1;
            prec -= 1;
        }
        Fq { val: v, unit: s, prec }
    }

    pub(crate) fn from_padic(&self, x: &Padic) -> Fq {
        match x.valuation() {
            None => self.zero_mod(x.abs_precision().unwrap_or(i64::MAX / 4)),
            Some(v) => {
                let prec = x.rel_precision().map_or(self.cap, |k| k.min(self.cap));
                let digits = x.unit_digits();
                let mut u = 0u64;
                for &d in digits.iter().take(prec as usize).rev() {
                    u = u * self.p + d as u64;
                }
                Fq {
                    val: v,
                    unit: u,
                    prec,
                }
            }
        }
    }

    pub(crate) fn to_padic(&self, x: Fq) -> Padic {
        let p = self.p as u32;
        if x.unit == 0 {
            return Padic::big_o(p, x.val, self.cap);
        }
        Padic::from_parts(p, self.cap, x.val, BigInt::from(x.unit), Some(x.val + x.prec as i64))
    }

    fn abs(&self, x: Fq) -> i64 {
        x.val + x.prec as i64
    }

    pub(crate) fn neg(&self, x: Fq) -> Fq {
        if x.unit == 0 {
            return x;
        }
        Fq {
            unit: self.pw[x.prec as usize] - x.unit,
            ..x
        }
    }

    pub(crate) fn add(&self, x: Fq, y: Fq) -> Fq {
        let abs = self.abs(x).min(self.abs(y));
        if x.unit == 0 && y.unit == 0 {
            return self.zero_mod(abs);
        }
        let v = match (x.unit, y.unit) {
            (0, _) => y.val,
            (_, 0) => x.val,
            _ => x.val.min(y.val),
        };
        if abs <= v {
            return self.zero_mod(abs);
        }
        let prec = ((abs - v) as u32).min(self.cap);
        let m = self.pw[prec as usize] as u128;
        let part = |z: Fq| -> u128 {
            if z.unit == 0 {
                return 0;
            }
            let shift = (z.val - v) as u32;
            if shift >= prec {
                0
            } else {
                (z.unit as u128 * self.pw[shift as usize] as u128) % m
            }
        };
        let s = (part(x) + part(y)) % m;
        self.make(v, s as u64, prec)
    }

    pub(crate) fn sub(&self, x: Fq, y: Fq) -> Fq {
        self.add(x, self.neg(y))
    }

    pub(crate) fn mul(&self, x: Fq, y: Fq) -> Fq {
        match (x.unit, y.unit) {
            (0, 0) => self.zero_mod(x.val + y.val),
            (0, _) => self.zero_mod(x.val + y.val),
            (_, 0) => self.zero_mod(x.val + y.val),
            _ => {
                let prec = x.prec.min(y.prec);
                let m = self.pw[prec as usize] as u128;
                let u = (x.unit as u128 * y.unit as u128) % m;
                Fq {
                    val: x.val + y.val,
                    unit: u as u64,
                    prec,
                }
            }
        }
    }

    /// `None` for (possibly inexact) zero.
    pub(crate) fn inv(&self, x: Fq) -> Option<Fq> {
        if x.unit == 0 {
            return None;
        }
        Some(Fq {
            val: -x.val,
            unit: inv_mod(x.unit, self.pw[x.prec as usize]),
            prec: x.prec,
        })
    }

    pub(crate) fn div(&self, x: Fq, y: Fq) -> Option<Fq> {
        Some(self.mul(x, self.inv(y)?))
    }

    pub(crate) fn point(&self, z: &ProjPoint) -> FPoint {
        match z {
            ProjPoint::Finite(x) => FPoint::Finite(self.from_padic(x)),
            ProjPoint::Infinity => FPoint::Infinity,
        }
    }

    pub(crate) fn mat(&self, m: &Mat2) -> [Fq; 4] {
        [
            self.from_padic(&m.a),
            self.from_padic(&m.b),
            self.from_padic(&m.c),
            self.from_padic(&m.d),
        ]
    }

    /// Möbius action; `None` when the denominator is an inexact zero.
    pub(crate) fn apply(&self, m: &[Fq; 4], z: FPoint) -> Option<FPoint> {
        let (num, den) = match z {
            FPoint::Infinity => (m[0], m[2]),
            FPoint::Finite(x) => (
                self.add(self.mul(m[0], x), m[1]),
                self.add(self.mul(m[2], x), m[3]),
            ),
        };
        if den.unit == 0 {
            if den.val >= i64::MAX / 8 {
                return Some(FPoint::Infinity);
            }
            return None;
        }
        Some(FPoint::Finite(self.div(num, den)?))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum FPoint {
    Finite(Fq),
    Infinity,
}
