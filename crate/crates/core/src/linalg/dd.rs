//! Double-double ("extended") floating point arithmetic.
//!
//! A value is the unevaluated sum `hi + lo` of two `f64`s with
//! `|lo| <= ulp(hi) / 2`, giving roughly 31 significant decimal digits.
//! Only the operations needed by the oracle re-checks are provided.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, Sub, SubAssign};

use num_traits::{Num, One, Zero};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };
    pub const PI: Self = Self {
        hi: std::f64::consts::PI,
        lo: 1.224_646_799_147_353_2e-16,
    };
    const FRAC_PI_2: Self = Self {
        hi: std::f64::consts::FRAC_PI_2,
        lo: 6.123_233_995_736_766e-17,
    };
    /// 2^-104, the unit roundoff of the format.
    pub const EPSILON: Self = Self {
        hi: 4.930_380_657_631_324e-32,
        lo: 0.0,
    };

    pub fn new(hi: f64, lo: f64) -> Self {
        let (hi, lo) = two_sum(hi, lo);
        Self { hi, lo }
    }

    pub fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Self::ZERO;
        }
        let x = self.hi.sqrt();
        let x = Self::from_f64(x);
        // one Newton step doubles the number of correct digits
        x + (self - x * x) / (x + x)
    }

    pub fn round(self) -> Self {
        let hi = self.hi.round();
        if hi == self.hi {
            Self::new(hi, self.lo.round())
        } else if (hi - self.hi).abs() == 0.5 && self.lo != 0.0 {
            // exact .5 in hi, lo decides
            if self.lo < 0.0 && hi > self.hi {
                Self::from_f64(hi - 1.0)
            } else if self.lo > 0.0 && hi < self.hi {
                Self::from_f64(hi + 1.0)
            } else {
                Self::from_f64(hi)
            }
        } else {
            Self::from_f64(hi)
        }
    }

    /// Returns `(sin x, cos x)`.
    pub fn sin_cos(self) -> (Self, Self) {
        let k = (self / Self::FRAC_PI_2).round();
        let r = self - k * Self::FRAC_PI_2;
        let (s, c) = taylor_sin_cos(r);
        match (k.hi as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }

    /// Scientific notation with `digits` significant decimal digits.
    pub fn to_scientific(self, digits: usize) -> String {
        if self.hi == 0.0 {
            return format!("0.{}e0", "0".repeat(digits.saturating_sub(1)));
        }
        if !self.is_finite() {
            return format!("{}", self.hi);
        }
        let negative = self.hi < 0.0;
        let mut x = self.abs();
        let mut exponent = x.hi.log10().floor() as i32;
        x *= Self::from_f64(10f64).powi(-exponent);
        if x.hi >= 10.0 {
            x /= Self::from_f64(10.0);
            exponent += 1;
        } else if x.hi < 1.0 {
            x *= Self::from_f64(10.0);
            exponent -= 1;
        }
        let mut out = Vec::with_capacity(digits + 1);
        for _ in 0..=digits {
            let d = x.hi.floor().clamp(0.0, 9.0);
            out.push(d as u8);
            x = (x - Self::from_f64(d)) * Self::from_f64(10.0);
        }
        // round half up on the guard digit
        if out[digits] >= 5 {
            let mut i = digits;
            loop {
                if i == 0 {
                    out.insert(0, 1);
                    exponent += 1;
                    break;
                }
                i -= 1;
                if out[i] == 9 {
                    out[i] = 0;
                } else {
                    out[i] += 1;
                    break;
                }
            }
        }
        out.truncate(digits);
        let mantissa: String = out.iter().map(|d| char::from(b'0' + d)).collect();
        format!(
            "{}{}.{}e{}",
            if negative { "-" } else { "" },
            &mantissa[..1],
            &mantissa[1..],
            exponent
        )
    }

    pub fn powi(self, n: i32) -> Self {
        let mut base = if n < 0 { Self::ONE / self } else { self };
        let mut e = n.unsigned_abs();
        let mut acc = Self::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }
}

fn taylor_sin_cos(r: DoubleDouble) -> (DoubleDouble, DoubleDouble) {
    let r2 = r * r;
    let mut sin = r;
    let mut cos = DoubleDouble::ONE;
    let mut sin_term = r;
    let mut cos_term = DoubleDouble::ONE;
    let mut k = 1.0;
    loop {
        sin_term = -sin_term * r2 / DoubleDouble::from_f64((2.0 * k) * (2.0 * k + 1.0));
        cos_term = -cos_term * r2 / DoubleDouble::from_f64((2.0 * k - 1.0) * (2.0 * k));
        sin += sin_term;
        cos += cos_term;
        if sin_term.hi.abs() < 1e-36 && cos_term.hi.abs() < 1e-36 {
            break;
        }
        k += 1.0;
        if k > 40.0 {
            break;
        }
    }
    (sin, cos)
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_scientific(f.precision().unwrap_or(32)))
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            ord => Some(ord),
        }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (t, f) = two_sum(self.lo, rhs.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Self { hi, lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + (self.hi * rhs.lo + self.lo * rhs.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * Self::from_f64(q1);
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * Self::from_f64(q2);
        let q3 = r.hi / rhs.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + Self::from_f64(q3)
    }
}

impl Rem for DoubleDouble {
    type Output = Self;
    fn rem(self, rhs: Self) -> Self {
        let q = self / rhs;
        let q = if q.hi < 0.0 { -((-q).floor()) } else { q.floor() };
        self - rhs * q
    }
}

impl DoubleDouble {
    fn floor(self) -> Self {
        let hi = self.hi.floor();
        if hi == self.hi {
            Self::new(hi, self.lo.floor())
        } else {
            Self::from_f64(hi)
        }
    }
}

macro_rules! assign_op {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for DoubleDouble {
            fn $method(&mut self, rhs: Self) {
                *self = *self $op rhs;
            }
        }
    };
}
assign_op!(AddAssign, add_assign, +);
assign_op!(SubAssign, sub_assign, -);
assign_op!(MulAssign, mul_assign, *);
assign_op!(DivAssign, div_assign, /);

impl Zero for DoubleDouble {
    fn zero() -> Self {
        Self::ZERO
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0 && self.lo == 0.0
    }
}

impl One for DoubleDouble {
    fn one() -> Self {
        Self::ONE
    }
}

impl Num for DoubleDouble {
    type FromStrRadixErr = num_traits::ParseFloatError;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        <f64 as Num>::from_str_radix(s, radix).map(Self::from_f64)
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}
