//! Exponentially scaled modified Bessel functions of half-integer order.
//!
//! The Mie coefficients need I_{ℓ±1/2}(x) and K_{ℓ±1/2}(x) for arguments up
//! to ~10⁶ and orders up to ~10⁵; plain f64 overflows at e^{±709}, so all
//! values are carried as [`Scaled`]. I is built by downward ratio recurrence
//! seeded with a continued fraction, chained up from the closed-form
//! I_{1/2}; K by upward recurrence from the closed forms K_{1/2}, K_{3/2}.

use crate::scaled::Scaled;

/// I_{ν+1}(x)/I_ν(x) by the Gautschi continued fraction (modified Lentz).
fn i_ratio_cf(nu: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let mut f = tiny;
    let mut c = f;
    let mut d = 0.0;
    for j in 1..=10_000 {
        let b = 2.0 * (nu + j as f64) / x;
        d = b + d;
        if d == 0.0 {
            d = tiny;
        }
        c = b + 1.0 / c;
        if c == 0.0 {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            return f;
        }
    }
    f
}

/// Ratios r[ℓ] = I_{ℓ+3/2}(x)/I_{ℓ+1/2}(x) for ℓ = 0..=lmax.
pub(crate) fn i_half_ratios(x: f64, lmax: usize) -> Vec<f64> {
    let mut r = vec![0.0; lmax + 1];
    r[lmax] = i_ratio_cf(lmax as f64 + 0.5, x);
    for ell in (1..=lmax).rev() {
        // I_{ℓ-1/2} = I_{ℓ+3/2} + ((2ℓ+1)/x) I_{ℓ+1/2}
        r[ell - 1] = 1.0 / (r[ell] + (2 * ell + 1) as f64 / x);
    }
    r
}

/// I_{ℓ+1/2}(x) for ℓ = 0..=lmax.
pub(crate) fn i_half_orders(x: f64, lmax: usize) -> Vec<Scaled> {
    debug_assert!(x > 0.0);
    let ratios = i_half_ratios(x, lmax);
    let mut out = Vec::with_capacity(lmax + 1);
    // I_{1/2}(x) = sqrt(2/(pi x)) sinh x, written as mantissa * e^x
    let mant = (2.0 / (std::f64::consts::PI * x)).sqrt() * (-(-2.0 * x).exp_m1()) / 2.0;
    let mut cur = Scaled::from_parts(mant, x);
    out.push(cur);
    for ell in 0..lmax {
        cur = cur.mul_f64(ratios[ell]);
        out.push(cur);
    }
    out
}

/// K_{ℓ+1/2}(x) for ℓ = 0..=lmax.
pub(crate) fn k_half_orders(x: f64, lmax: usize) -> Vec<Scaled> {
    debug_assert!(x > 0.0);
    let base = (std::f64::consts::PI / (2.0 * x)).sqrt();
    let mut out = Vec::with_capacity(lmax + 1);
    out.push(Scaled::from_parts(base, -x));
    if lmax == 0 {
        return out;
    }
    out.push(Scaled::from_parts(base * (1.0 + 1.0 / x), -x));
    for ell in 1..lmax {
        // K_{ν+1} = K_{ν-1} + (2ν/x) K_ν with ν = ℓ+1/2
        let next = out[ell - 1].add(out[ell].mul_f64((2 * ell + 1) as f64 / x));
        out.push(next);
    }
    out
}
