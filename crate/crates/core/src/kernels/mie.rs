//! Mie coefficients a_ℓ, b_ℓ at imaginary frequency and the zero-frequency
//! magnetic coefficients 𝓑_ℓ of the plasma model.
//!
//! Values are held as [`Scaled`]; for the hot scattering-amplitude loop the
//! table also carries the plain-f64 step ratios a_{ℓ+1}/a_ℓ and the bounded
//! ratios b_ℓ/a_ℓ so amplitude sums run without per-term exponentials.

use super::bessel;
use super::KernelError;
use crate::scaled::Scaled;

/// Per-frequency table of Mie coefficients for one sphere size parameter.
#[derive(Debug)]
pub struct MieTable {
    /// Refractive index n(iξ) of the sphere.
    pub refractive_index: f64,
    /// Size parameter x = K R.
    pub size_parameter: f64,
    /// a_ℓ for ℓ = 1..=lmax (index ℓ-1).
    a: Vec<Scaled>,
    /// b_ℓ for ℓ = 1..=lmax (index ℓ-1).
    b: Vec<Scaled>,
    /// a_{ℓ+1}/a_ℓ for ℓ = 1..lmax (index ℓ-1), plain f64.
    a_ratio: Vec<f64>,
    /// b_ℓ/a_ℓ for ℓ = 1..=lmax (index ℓ-1), plain f64.
    b_over_a: Vec<f64>,
}

impl MieTable {
    /// Builds the table for ℓ = 1..=lmax.
    pub fn build(refractive_index: f64, size_parameter: f64, lmax: usize) -> Result<Self, KernelError> {
        let n = refractive_index;
        let x = size_parameter;
        if !(x > 0.0) || !(n > 1.0) || lmax < 1 {
            return Err(KernelError::InvalidParameter(format!(
                "mie table needs x > 0, n > 1, lmax >= 1 (x={x}, n={n}, lmax={lmax})"
            )));
        }
        let ix = bessel::i_half_orders(x, lmax);
        let kx = bessel::k_half_orders(x, lmax);
        let inx = bessel::i_half_orders(n * x, lmax);
        let n2 = n * n;
        let mut a = Vec::with_capacity(lmax);
        let mut b = Vec::with_capacity(lmax);
        for ell in 1..=lmax {
            let lf = ell as f64;
            // bracket_i  = x I_{ℓ-1/2}(x)  - ℓ I_{ℓ+1/2}(x)
            // bracket_in = nx I_{ℓ-1/2}(nx) - ℓ I_{ℓ+1/2}(nx)
            // bracket_k  = x K_{ℓ-1/2}(x)  + ℓ K_{ℓ+1/2}(x)
            let bracket_i = ix[ell - 1].mul_f64(x).add(ix[ell].mul_f64(-lf));
            let bracket_in = inx[ell - 1].mul_f64(n * x).add(inx[ell].mul_f64(-lf));
            let bracket_k = kx[ell - 1].mul_f64(x).add(kx[ell].mul_f64(lf));
            let sa = inx[ell].mul(bracket_i);
            let sb = ix[ell].mul(bracket_in);
            let sc = inx[ell].mul(bracket_k);
            let sd = kx[ell].mul(bracket_in);
            let sign = if ell % 2 == 0 { 1.0 } else { -1.0 };
            let half_pi = std::f64::consts::FRAC_PI_2;
            let a_ell = sa
                .mul_f64(n2)
                .add(sb.neg())
                .div(sc.mul_f64(n2).add(sd))
                .mul_f64(sign * half_pi);
            let b_ell = sb.add(sa.neg()).div(sc.add(sd)).mul_f64(-sign * half_pi);
            if !a_ell.mantissa.is_finite() || !b_ell.mantissa.is_finite() || a_ell.is_zero() {
                return Err(KernelError::MieEvaluation { ell, x, n });
            }
            a.push(a_ell);
            b.push(b_ell);
        }
        let mut a_ratio = Vec::with_capacity(lmax.saturating_sub(1));
        for ell in 1..lmax {
            let r = a[ell].div(a[ell - 1]).value();
            if !r.is_finite() || r == 0.0 {
                return Err(KernelError::MieEvaluation { ell, x, n });
            }
            a_ratio.push(r);
        }
        let b_over_a: Vec<f64> = (0..lmax).map(|i| b[i].div(a[i]).value()).collect();
        if b_over_a.iter().any(|v| !v.is_finite()) {
            return Err(KernelError::MieEvaluation { ell: 0, x, n });
        }
        Ok(MieTable { refractive_index: n, size_parameter: x, a, b, a_ratio, b_over_a })
    }

    pub fn lmax(&self) -> usize {
        self.a.len()
    }

    /// a_ℓ (1-based ℓ).
    pub fn a(&self, ell: usize) -> Scaled {
        self.a[ell - 1]
    }

    /// b_ℓ (1-based ℓ).
    pub fn b(&self, ell: usize) -> Scaled {
        self.b[ell - 1]
    }

    pub(crate) fn a_ratio(&self, ell: usize) -> f64 {
        self.a_ratio[ell - 1]
    }

    pub(crate) fn b_over_a(&self, ell: usize) -> f64 {
        self.b_over_a[ell - 1]
    }
}

/// Single-pair Mie coefficients (a_ℓ, b_ℓ) at imaginary frequency for a
/// sphere of refractive index `n` and size parameter `x`.
pub fn mie_coefficients(n: f64, x: f64, ell: usize) -> Result<(Scaled, Scaled), KernelError> {
    let table = MieTable::build(n, x, ell)?;
    Ok((table.a(ell), table.b(ell)))
}

/// Zero-frequency magnetic coefficients of the plasma model,
/// 𝓑_ℓ = −ℓ/(ℓ+1) [1 − (2ℓ+1)/(K_p R) · I_{ℓ+1/2}(K_p R)/I_{ℓ-1/2}(K_p R)],
/// for ℓ = 1..=lmax (index ℓ-1).
pub fn plasma_b_coefficients(kp_r: f64, lmax: usize) -> Vec<f64> {
    let ratios = bessel::i_half_ratios(kp_r, lmax);
    (1..=lmax)
        .map(|ell| {
            let lf = ell as f64;
            // I_{ℓ+1/2}/I_{ℓ-1/2} = r[ℓ-1]
            let frac = (2.0 * lf + 1.0) / kp_r * ratios[ell - 1];
            -lf / (lf + 1.0) * (1.0 - frac)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn small_x_electric_dipole_limit_dielectric() {
        // a1 -> -(2/3) x^3 (n^2-1)/(n^2+2) as x -> 0
        let n = 2.0;
        let x = 1e-3;
        let (a1, _) = mie_coefficients(n, x, 1).unwrap();
        let expect = -(2.0 / 3.0) * x.powi(3) * (n * n - 1.0) / (n * n + 2.0);
        assert_relative_eq!(a1.value(), expect, max_relative = 1e-2);
    }

    #[test]
    fn small_x_metallic_limit() {
        // huge n: a1/x^3 -> -2/3, the ℓ=1 value of the low-frequency form
        let x = 1e-3;
        let (a1, _) = mie_coefficients(1.0e5, x, 1).unwrap();
        assert_relative_eq!(a1.value() / x.powi(3), -2.0 / 3.0, max_relative = 1e-2);
    }

    #[test]
    fn leading_power_scaling_in_x() {
        // a_ℓ ∝ x^{2ℓ+1} at small x: doubling x scales by 2^{2ℓ+1} within 1%
        let n = 3.0;
        for ell in 1..=3usize {
            let x = 1e-3;
            let (a_small, _) = mie_coefficients(n, x, ell).unwrap();
            let (a_big, _) = mie_coefficients(n, 2.0 * x, ell).unwrap();
            let ratio = a_big.div(a_small).value();
            assert_relative_eq!(ratio, 2f64.powi(2 * ell as i32 + 1), max_relative = 1e-2);
        }
    }

    #[test]
    fn drude_magnetic_coefficient_vanishes_at_low_frequency() {
        // along the Drude family, b1/a1 -> 0 as x -> 0; the effective
        // magnetic size parameter is nx ~ sqrt(x omega_p^2 R/(c gamma)),
        // so x must be small enough that nx << 1
        let omega_p = 1.37e16;
        let gamma = 5.3e13;
        let radius = 1.5e-4;
        let c = crate::constants::SPEED_OF_LIGHT;
        let mut prev = f64::INFINITY;
        for &x in &[1e-7, 1e-8, 1e-9] {
            let xi = c * x / radius;
            let eps = 1.0 + omega_p * omega_p / (xi * (xi + gamma));
            let table = MieTable::build(eps.sqrt(), x, 1).unwrap();
            let ratio = table.b(1).div(table.a(1)).value().abs();
            assert!(ratio < prev, "|b1/a1| not decreasing at x={x}");
            prev = ratio;
        }
        assert!(prev < 1e-2);
    }

    #[test]
    fn plasma_magnetic_coefficient_matches_b_table() {
        // along the plasma family (fixed u = K_p R), b_ℓ/a_ℓ -> 𝓑_ℓ^p
        let u: f64 = 2.0;
        for ell in 1..=2usize {
            let x: f64 = 1e-3;
            let n = (1.0 + u * u / (x * x)).sqrt();
            let table = MieTable::build(n, x, ell).unwrap();
            let got = table.b(ell).div(table.a(ell)).value();
            let expect = plasma_b_coefficients(u, ell)[ell - 1];
            assert_relative_eq!(got, expect, max_relative = 1e-3);
        }
    }

    #[test]
    fn plasma_b_limits() {
        // perfect-conductor limit: 𝓑_ℓ -> -ℓ/(ℓ+1); large ℓ: 𝓑_ℓ -> 0
        let b = plasma_b_coefficients(1e4, 3);
        assert_relative_eq!(b[0], -0.5, max_relative = 1e-3);
        let b = plasma_b_coefficients(5.0, 2000);
        assert!(b[1999].abs() < 1e-5);
    }

    #[test]
    fn survives_large_size_parameter_and_order() {
        let table = MieTable::build(50.0, 2.0e3, 12_000).unwrap();
        assert!(table.a(12_000).ln_abs().is_finite());
        assert!(table.a(1).ln_abs().is_finite());
    }
}
