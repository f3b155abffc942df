//! Third-order jets: a value together with its first three derivatives.
//!
//! Used to push derivatives through compositions `θ_{b_μ} ∘ … ∘ θ_{b_1}` and
//! products `g_{b_μ}(…)·…·g_{b_1}(x)` without symbolic differentiation.

use std::ops::Mul;

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet3<T> {
    pub v: T,
    pub d1: T,
    pub d2: T,
    pub d3: T,
}

impl<T: Real> Jet3<T> {
    pub fn new(v: T, d1: T, d2: T, d3: T) -> Self {
        Self { v, d1, d2, d3 }
    }

    /// The identity map `x ↦ x` evaluated at `x`.
    pub fn variable(x: T) -> Self {
        Self::new(x, T::one(), T::zero(), T::zero())
    }

    pub fn constant(c: T) -> Self {
        Self::new(c, T::zero(), T::zero(), T::zero())
    }

    /// Jet of `f ∘ u`, where `self` is the jet of `f` at `u.v`.
    pub fn compose(self, inner: Jet3<T>) -> Self {
        let (u1, u2, u3) = (inner.d1, inner.d2, inner.d3);
        let three = T::lit(3.0);
        Self {
            v: self.v,
            d1: self.d1 * u1,
            d2: self.d2 * u1 * u1 + self.d1 * u2,
            d3: self.d3 * u1 * u1 * u1 + three * self.d2 * u1 * u2 + self.d1 * u3,
        }
    }

    /// `f'/f`, `f''/f`, `f'''/f`.
    pub fn log_ratios(self) -> (T, T, T) {
        (self.d1 / self.v, self.d2 / self.v, self.d3 / self.v)
    }
}

impl<T: Real> Mul for Jet3<T> {
    type Output = Jet3<T>;

    fn mul(self, o: Jet3<T>) -> Jet3<T> {
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        Jet3 {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + two * self.d1 * o.d1 + self.v * o.d2,
            d3: self.d3 * o.v + three * self.d2 * o.d1 + three * self.d1 * o.d2 + self.v * o.d3,
        }
    }
}
