//! Floating-point values with a separate natural-log scale factor.
//!
//! The Mie coefficients, angular functions and scattering amplitudes span
//! ranges like e^±10⁶ which no primitive float can hold. A [`Scaled`]
//! value represents `mantissa * exp(ln_scale)` and supports the few
//! operations the kernels need: multiply, add, and comparison of
//! magnitudes.

/// A value `mantissa * exp(ln_scale)`, with the mantissa kept within
/// a moderate range by [`Scaled::renormalize`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scaled {
    pub mantissa: f64,
    pub ln_scale: f64,
}

const RENORM_HI: f64 = 1e150;
const RENORM_LO: f64 = 1e-150;

impl Scaled {
    pub const ZERO: Scaled = Scaled { mantissa: 0.0, ln_scale: 0.0 };

    /// Wraps a plain float (no scale factor).
    pub fn new(value: f64) -> Self {
        Scaled { mantissa: value, ln_scale: 0.0 }
    }

    pub fn from_parts(mantissa: f64, ln_scale: f64) -> Self {
        Scaled { mantissa, ln_scale }.renormalize()
    }

    /// Pulls an out-of-range mantissa back into [1e-150, 1e150].
    #[inline]
    pub fn renormalize(mut self) -> Self {
        let a = self.mantissa.abs();
        if a == 0.0 {
            self.ln_scale = 0.0;
        } else if !(RENORM_LO..RENORM_HI).contains(&a) {
            let shift = a.ln();
            self.mantissa *= (-shift).exp();
            self.ln_scale += shift;
        }
        self
    }

    /// Collapses to a plain f64; may overflow to ±inf or underflow to 0.
    pub fn value(self) -> f64 {
        if self.mantissa == 0.0 {
            0.0
        } else {
            self.mantissa * self.ln_scale.exp()
        }
    }

    /// ln|value|; -inf for zero.
    pub fn ln_abs(self) -> f64 {
        if self.mantissa == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.mantissa.abs().ln() + self.ln_scale
        }
    }

    pub fn is_zero(self) -> bool {
        self.mantissa == 0.0
    }

    #[inline]
    pub fn mul(self, other: Scaled) -> Scaled {
        Scaled {
            mantissa: self.mantissa * other.mantissa,
            ln_scale: self.ln_scale + other.ln_scale,
        }
        .renormalize()
    }

    #[inline]
    pub fn mul_f64(self, factor: f64) -> Scaled {
        Scaled { mantissa: self.mantissa * factor, ln_scale: self.ln_scale }.renormalize()
    }

    pub fn div(self, other: Scaled) -> Scaled {
        Scaled {
            mantissa: self.mantissa / other.mantissa,
            ln_scale: self.ln_scale - other.ln_scale,
        }
        .renormalize()
    }

    /// Sum, aligning the two scale factors.
    #[inline]
    pub fn add(self, other: Scaled) -> Scaled {
        if self.mantissa == 0.0 {
            return other;
        }
        if other.mantissa == 0.0 {
            return self;
        }
        if self.ln_scale >= other.ln_scale {
            let shift = other.ln_scale - self.ln_scale;
            // shift <= 0 so exp() cannot overflow
            Scaled {
                mantissa: self.mantissa + other.mantissa * shift.exp(),
                ln_scale: self.ln_scale,
            }
            .renormalize()
        } else {
            other.add(self)
        }
    }

    pub fn neg(self) -> Scaled {
        Scaled { mantissa: -self.mantissa, ln_scale: self.ln_scale }
    }

    /// True when |self| < |other| * factor.
    pub fn abs_lt(self, other: Scaled, factor: f64) -> bool {
        self.ln_abs() < other.ln_abs() + factor.ln()
    }
}
