//! Exact scalar arithmetic: arbitrary-precision rationals or a prime field F_p.
//!
//! The field mode is fixed once per session; elements never mix modes. There is
//! no floating point anywhere in the crate.

use crate::error::{LpaError, Result};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Which exact field coefficients live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldMode {
    Rational,
    Prime(u64),
}

impl FieldMode {
    /// Parses `rational` or `fp:<prime>`, the syntax of the `LPA_FIELD` variable.
    pub fn parse(s: &str) -> Result<FieldMode> {
        if s == "rational" {
            return Ok(FieldMode::Rational);
        }
        if let Some(p) = s.strip_prefix("fp:") {
            let p: u64 = p
                .parse()
                .map_err(|_| LpaError::BadFieldMode(s.to_string()))?;
            if !is_prime(p) {
                return Err(LpaError::NotPrime(p));
            }
            return Ok(FieldMode::Prime(p));
        }
        Err(LpaError::BadFieldMode(s.to_string()))
    }

    pub fn int(self, k: i64) -> Scalar {
        match self {
            FieldMode::Rational => Scalar::Rat(BigRational::from_integer(BigInt::from(k))),
            FieldMode::Prime(p) => Scalar::Fp {
                p,
                val: k.rem_euclid(p as i64) as u64,
            },
        }
    }

    pub fn ratio(self, num: i64, den: i64) -> Result<Scalar> {
        if den == 0 {
            return Err(LpaError::DivisionByZero);
        }
        match self {
            FieldMode::Rational => Ok(Scalar::Rat(BigRational::new(
                BigInt::from(num),
                BigInt::from(den),
            ))),
            FieldMode::Prime(_) => {
                let d = self.int(den);
                let inv = d.inverse().ok_or(LpaError::DivisionByZero)?;
                Ok(self.int(num).mul_ref(&inv))
            }
        }
    }

    pub fn zero(self) -> Scalar {
        self.int(0)
    }

    pub fn one(self) -> Scalar {
        self.int(1)
    }
}

/// An exact field element. All arithmetic requires both operands to carry the
/// same mode; mixing modes is a programming error and panics.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Scalar {
    Rat(BigRational),
    Fp { p: u64, val: u64 },
}

impl Scalar {
    pub fn mode(&self) -> FieldMode {
        match self {
            Scalar::Rat(_) => FieldMode::Rational,
            Scalar::Fp { p, .. } => FieldMode::Prime(*p),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_zero(),
            Scalar::Fp { val, .. } => *val == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_one(),
            Scalar::Fp { val, .. } => *val == 1,
        }
    }

    pub fn add_ref(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a + b),
            (Scalar::Fp { p, val: a }, Scalar::Fp { p: q, val: b }) if p == q => Scalar::Fp {
                p: *p,
                val: (a + b) % p,
            },
            _ => panic!("mixed scalar field modes"),
        }
    }

    pub fn sub_ref(&self, other: &Scalar) -> Scalar {
        self.add_ref(&other.neg_ref())
    }

    pub fn mul_ref(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a * b),
            (Scalar::Fp { p, val: a }, Scalar::Fp { p: q, val: b }) if p == q => Scalar::Fp {
                p: *p,
                val: ((*a as u128 * *b as u128) % *p as u128) as u64,
            },
            _ => panic!("mixed scalar field modes"),
        }
    }

    pub fn neg_ref(&self) -> Scalar {
        match self {
            Scalar::Rat(a) => Scalar::Rat(-a),
            Scalar::Fp { p, val } => Scalar::Fp {
                p: *p,
                val: (p - val) % p,
            },
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inverse(&self) -> Option<Scalar> {
        if self.is_zero() {
            return None;
        }
        match self {
            Scalar::Rat(a) => Some(Scalar::Rat(a.recip())),
            Scalar::Fp { p, val } => Some(Scalar::Fp {
                p: *p,
                val: mod_inverse(*val, *p),
            }),
        }
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        self.add_ref(&rhs)
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        self.sub_ref(&rhs)
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        self.mul_ref(&rhs)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        self.neg_ref()
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rat(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    // canonical form keeps the sign on the numerator
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Fp { val, .. } => write!(f, "{val}"),
        }
    }
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    // extended Euclid on (a, p), p prime and a != 0 mod p
    let (mut old_r, mut r) = (a as i128, p as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1, "inverse of a non-unit mod p");
    old_s.rem_euclid(p as i128) as u64
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}
