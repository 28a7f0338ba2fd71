//! Angular functions π_ℓ, τ_ℓ and the plane-wave scattering amplitude sums.
//!
//! On the imaginary axis cosΘ ≤ −1 with |cosΘ| reaching 10¹⁰ and beyond, so
//! π_ℓ ∝ cosΘ^{ℓ-1} overflows f64 within a few dozen orders. The amplitude
//! loop keeps everything in one running exponential frame: the recurrence
//! pair is pre-multiplied by the Mie coefficient a_ℓ via the tabulated step
//! ratio a_{ℓ+1}/a_ℓ, so the inner loop is pure multiply-add with a rare
//! rescale branch.

use super::mie::MieTable;
use super::KernelError;
use crate::scaled::Scaled;

const FRAME_HI: f64 = 1e200;
const FRAME_LO: f64 = 1e-200;
const FRAME_SHIFT: f64 = 460.517018598809136; // ln(1e200)

/// π_ℓ and τ_ℓ by upward recurrence, exponentially scaled.
pub fn pi_tau(z: f64, ell: usize) -> (Scaled, Scaled) {
    assert!(ell >= 1);
    // mantissas of π_{ℓ-1}, π_ℓ in a shared frame
    let mut prev = 0.0f64;
    let mut cur = 1.0f64;
    let mut frame = 0.0f64;
    for l in 1..ell {
        let lf = l as f64;
        let next = ((2.0 * lf + 1.0) * z * cur - (lf + 1.0) * prev) / lf;
        prev = cur;
        cur = next;
        let a = cur.abs().max(prev.abs());
        if a > FRAME_HI {
            prev *= FRAME_LO;
            cur *= FRAME_LO;
            frame += FRAME_SHIFT;
        }
    }
    let lf = ell as f64;
    let tau = lf * z * cur - (lf + 1.0) * prev;
    (Scaled::from_parts(cur, frame), Scaled::from_parts(tau, frame))
}

/// The scattering amplitude sums
/// S₁ = Σ c_ℓ (a_ℓ π_ℓ + b_ℓ τ_ℓ), S₂ = Σ c_ℓ (a_ℓ τ_ℓ + b_ℓ π_ℓ),
/// c_ℓ = (2ℓ+1)/(ℓ(ℓ+1)), truncated when both terms stay below
/// `term_tol` relative to their running sums for three consecutive ℓ.
pub(crate) fn amplitude_sums(
    mie: &MieTable,
    cos_theta: f64,
    term_tol: f64,
    l_cap: usize,
) -> Result<(Scaled, Scaled), KernelError> {
    let z = cos_theta;
    let a1 = mie.a(1);
    // frame: true value = mantissa * exp(frame)
    let mut frame = a1.ln_scale;
    // w = a_ℓ π_ℓ, v = a_ℓ π_{ℓ-1} (in frame)
    let mut w = a1.mantissa;
    let mut v = 0.0f64;
    let mut s1 = 0.0f64;
    let mut s2 = 0.0f64;
    let mut quiet = 0u32;
    let lmax = mie.lmax();
    let mut ell = 1usize;
    loop {
        let lf = ell as f64;
        let tau_w = lf * z * w - (lf + 1.0) * v;
        let brel = mie.b_over_a(ell);
        let c = (2.0 * lf + 1.0) / (lf * (lf + 1.0));
        let t1 = c * (w + brel * tau_w);
        let t2 = c * (tau_w + brel * w);
        s1 += t1;
        s2 += t2;
        if ell >= 4
            && t1.abs() <= term_tol * s1.abs()
            && t2.abs() <= term_tol * s2.abs()
        {
            quiet += 1;
            if quiet >= 3 {
                break;
            }
        } else {
            quiet = 0;
        }
        if ell >= l_cap {
            return Err(KernelError::AmplitudeNotConverged { l_cap, cos_theta });
        }
        if ell >= lmax {
            return Err(KernelError::MieTableExhausted { built: lmax, cos_theta });
        }
        let ra = mie.a_ratio(ell);
        let w_next = ra * ((2.0 * lf + 1.0) * z * w - (lf + 1.0) * v) / lf;
        v = ra * w;
        w = w_next;
        ell += 1;
        let m = w.abs().max(v.abs()).max(s1.abs()).max(s2.abs());
        if m > FRAME_HI {
            w *= FRAME_LO;
            v *= FRAME_LO;
            s1 *= FRAME_LO;
            s2 *= FRAME_LO;
            frame += FRAME_SHIFT;
        } else if m < FRAME_LO && m > 0.0 {
            w *= FRAME_HI;
            v *= FRAME_HI;
            s1 *= FRAME_HI;
            s2 *= FRAME_HI;
            frame -= FRAME_SHIFT;
        }
    }
    // keep the shared frame: callers combine the mantissas linearly
    Ok((
        Scaled { mantissa: s1, ln_scale: frame },
        Scaled { mantissa: s2, ln_scale: frame },
    ))
}
