//! Scalar abstraction shared by the belief-propagation code.
//!
//! Every numeric routine on the hot path is generic over [`Scalar`], so the
//! same code computes values (`f64`) and forward-mode directional derivatives
//! ([`Dual`]).

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
{
    fn constant(x: f64) -> Self;

    /// The real (value) part.
    fn value(self) -> f64;

    fn ln(self) -> Self;

    /// True when every component (value and any infinitesimal parts) is exactly zero.
    fn is_zero(self) -> bool;

    /// True when the value is within `tol` of `x` and any infinitesimal part is within `tol` of zero.
    fn is_near(self, x: f64, tol: f64) -> bool;

    fn zero() -> Self {
        Self::constant(0.0)
    }

    fn one() -> Self {
        Self::constant(1.0)
    }

    fn scale(self, k: f64) -> Self {
        self * Self::constant(k)
    }
}

impl Scalar for f64 {
    #[inline]
    fn constant(x: f64) -> Self {
        x
    }

    #[inline]
    fn value(self) -> f64 {
        self
    }

    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }

    #[inline]
    fn is_zero(self) -> bool {
        self == 0.0
    }

    #[inline]
    fn is_near(self, x: f64, tol: f64) -> bool {
        (self - x).abs() <= tol
    }

    #[inline]
    fn scale(self, k: f64) -> Self {
        self * k
    }
}

/// First-order dual number `re + eps·ε` with `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Dual {
    pub re: f64,
    pub eps: f64,
}

impl Dual {
    pub const fn new(re: f64, eps: f64) -> Self {
        Dual { re, eps }
    }

    /// A seeded variable: value `re` with unit derivative.
    pub const fn variable(re: f64) -> Self {
        Dual { re, eps: 1.0 }
    }
}

impl Add for Dual {
    type Output = Dual;
    #[inline]
    fn add(self, o: Dual) -> Dual {
        Dual::new(self.re + o.re, self.eps + o.eps)
    }
}

impl Sub for Dual {
    type Output = Dual;
    #[inline]
    fn sub(self, o: Dual) -> Dual {
        Dual::new(self.re - o.re, self.eps - o.eps)
    }
}

impl Mul for Dual {
    type Output = Dual;
    #[inline]
    fn mul(self, o: Dual) -> Dual {
        Dual::new(self.re * o.re, self.re * o.eps + self.eps * o.re)
    }
}

impl Div for Dual {
    type Output = Dual;
    #[inline]
    fn div(self, o: Dual) -> Dual {
        let re = self.re / o.re;
        Dual::new(re, (self.eps - re * o.eps) / o.re)
    }
}

impl Neg for Dual {
    type Output = Dual;
    #[inline]
    fn neg(self) -> Dual {
        Dual::new(-self.re, -self.eps)
    }
}

impl AddAssign for Dual {
    #[inline]
    fn add_assign(&mut self, o: Dual) {
        self.re += o.re;
        self.eps += o.eps;
    }
}

impl Scalar for Dual {
    #[inline]
    fn constant(x: f64) -> Self {
        Dual::new(x, 0.0)
    }

    #[inline]
    fn value(self) -> f64 {
        self.re
    }

    #[inline]
    fn ln(self) -> Self {
        Dual::new(self.re.ln(), self.eps / self.re)
    }

    #[inline]
    fn is_zero(self) -> bool {
        self.re == 0.0 && self.eps == 0.0
    }

    #[inline]
    fn is_near(self, x: f64, tol: f64) -> bool {
        (self.re - x).abs() <= tol && self.eps.abs() <= tol
    }

    #[inline]
    fn scale(self, k: f64) -> Self {
        Dual::new(self.re * k, self.eps * k)
    }
}

/// Divide every entry by the total so the entries sum to one.
///
/// Skipped when the total is exactly one, which keeps vertex inputs bit-exact.
pub(crate) fn renormalize<S: Scalar>(v: &mut [S]) {
    let mut total = S::zero();
    for &x in v.iter() {
        total += x;
    }
    if total == S::one() {
        return;
    }
    for x in v.iter_mut() {
        *x = *x / total;
    }
}
