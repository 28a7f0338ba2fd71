//! Matrix elements of the round-trip operator in the plane-wave basis:
//! Fresnel coefficients, Mie coefficients, scattering amplitudes,
//! polarization rotation between the scattering-plane and TE/TM bases,
//! and all zero-frequency limits.
//!
//! Conventions: K = ξ/c is the imaginary vacuum wavenumber, κ = √(K²+k²),
//! the sphere sits above the plane, the incoming mode travels upward and
//! the scattered mode downward. The kernel of the round-trip operator is
//!
//!   f_M(k',ρ'; k,ρ) = r_ρ(k) e^{-(κ+κ')(z+R)} f_RS(k',ρ'; k,ρ)
//!
//! with f_RS assembled from the amplitudes S₁, S₂ and the rotation
//! coefficients A, B, C, D.

pub mod angular;
mod bessel;
pub mod mie;

use crate::materials::{permittivity, MaterialError, MaterialModel, ZeroFreqKind};
use crate::scaled::Scaled;
use crate::constants::SPEED_OF_LIGHT;
use mie::MieTable;
use thiserror::Error;

const TAU: f64 = std::f64::consts::TAU;

/// Errors from kernel evaluation.
#[derive(Debug, Error)]
pub enum KernelError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("mie coefficient evaluation lost all significance at ell={ell}, x={x}, n={n}")]
    MieEvaluation { ell: usize, x: f64, n: f64 },
    #[error("scattering amplitude sum hit the cap l_cap={l_cap} at cos_theta={cos_theta}")]
    AmplitudeNotConverged { l_cap: usize, cos_theta: f64 },
    #[error("internal mie table too short (built to {built}) at cos_theta={cos_theta}")]
    MieTableExhausted { built: usize, cos_theta: f64 },
    #[error("zero-frequency TE series did not converge within {lmax} terms")]
    ZeroFreqSeries { lmax: usize },
    #[error(transparent)]
    Material(#[from] MaterialError),
}

/// Field polarization with respect to the plate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Polarization {
    Te,
    Tm,
}

/// A plane-wave basis label (k, φ, polarization).
#[derive(Clone, Copy, Debug)]
pub struct PlaneWaveLabel {
    /// Transverse wavenumber in 1/m, k ≥ 0.
    pub k: f64,
    /// Azimuth in rad, φ ∈ [0, 2π).
    pub phi: f64,
    pub pol: Polarization,
}

impl PlaneWaveLabel {
    pub fn new(k: f64, phi: f64, pol: Polarization) -> Result<Self, KernelError> {
        if !(k >= 0.0) || !(0.0..TAU).contains(&phi) {
            return Err(KernelError::InvalidParameter(format!(
                "plane-wave label needs k >= 0 and phi in [0, 2pi), got k={k}, phi={phi}"
            )));
        }
        Ok(PlaneWaveLabel { k, phi, pol })
    }
}

/// Everything needed to evaluate round-trip kernel entries at one
/// imaginary frequency K > 0.
#[derive(Debug)]
pub struct KernelContext {
    /// Imaginary vacuum wavenumber K = ξ/c in 1/m.
    pub k_imag: f64,
    /// Sphere radius in m.
    pub radius: f64,
    /// Surface-to-surface gap in m.
    pub gap: f64,
    pub sphere: MaterialModel,
    pub plate: MaterialModel,
    /// Cap on the ℓ sums.
    pub l_cap: usize,
    /// Relative term tolerance for the ℓ sums.
    pub term_tol: f64,
    pub(crate) mie: MieTable,
}

/// Spec default cap: max(10⁴, 20·⌈x⌉).
pub fn default_l_cap(size_parameter: f64) -> usize {
    10_000usize.max(20 * size_parameter.ceil() as usize)
}

/// ℓ needed (with margin) for the amplitude sums over all quadrature
/// entries that survive the translation-factor cutoff.
fn table_size_estimate(radius: f64, gap: f64, k_imag: f64) -> usize {
    let kappa_eff = k_imag + 22.5 / gap;
    (1.45 * radius * kappa_eff).ceil() as usize + 800
}

impl KernelContext {
    pub fn new(
        k_imag: f64,
        radius: f64,
        gap: f64,
        sphere: MaterialModel,
        plate: MaterialModel,
        term_tol: f64,
        l_cap: Option<usize>,
    ) -> Result<Self, KernelError> {
        if !(k_imag > 0.0) || !(radius > 0.0) || !(gap > 0.0) {
            return Err(KernelError::InvalidParameter(format!(
                "context needs K > 0, R > 0, z > 0 (K={k_imag}, R={radius}, z={gap})"
            )));
        }
        let x = k_imag * radius;
        let l_cap = l_cap.unwrap_or_else(|| default_l_cap(x));
        let eps = permittivity(&sphere, k_imag * SPEED_OF_LIGHT)?;
        let n = eps.sqrt();
        let build = table_size_estimate(radius, gap, k_imag).min(l_cap).min(2_000_000);
        let mie = MieTable::build(n, x, build.max(8))?;
        Ok(KernelContext { k_imag, radius, gap, sphere, plate, l_cap, term_tol, mie })
    }

    /// Size parameter x = K R.
    pub fn size_parameter(&self) -> f64 {
        self.k_imag * self.radius
    }
}

/// Fresnel reflection coefficients (r_TE, r_TM) of the plate at K > 0.
pub fn fresnel(material: &MaterialModel, k_imag: f64, k: f64) -> Result<(f64, f64), KernelError> {
    if !(k_imag > 0.0) {
        return Err(KernelError::InvalidParameter(format!(
            "fresnel needs K > 0 (zero frequency has its own limit), got {k_imag}"
        )));
    }
    let eps = permittivity(material, k_imag * SPEED_OF_LIGHT)?;
    let kappa = (k_imag * k_imag + k * k).sqrt();
    let s = ((eps - 1.0) * k_imag * k_imag + kappa * kappa).sqrt();
    Ok(((kappa - s) / (kappa + s), (eps * kappa - s) / (eps * kappa + s)))
}

/// Zero-frequency limits of the Fresnel coefficients (r_TE, r_TM).
/// Drude: (0, 1); plasma: ((k−√(K_p²+k²))/(k+√(K_p²+k²)), 1).
pub fn zero_frequency_fresnel(material: &MaterialModel, k: f64) -> (f64, f64) {
    match material.zero_frequency_kind() {
        ZeroFreqKind::Drude => (0.0, 1.0),
        ZeroFreqKind::Plasma { omega_p } => {
            let kp = omega_p / SPEED_OF_LIGHT;
            let root = (kp * kp + k * k).sqrt();
            ((k - root) / (k + root), 1.0)
        }
    }
}

/// Polarization rotation coefficients (A, B, C, D) between the
/// scattering-plane basis and the TE/TM basis, for incoming transverse
/// wavenumber `k`, outgoing `k_out`, azimuth difference `dphi` and
/// imaginary vacuum wavenumber `k_imag`.
///
/// At Δφ = 0 the rotation is the identity, (1, 0, 0, 0), exactly. The
/// coefficients are singular only at the backward point k = k', Δφ = π,
/// where the analytic limit along k = k' is (0, 1, 0, 0).
pub fn polarization_rotation(k: f64, k_out: f64, dphi: f64, k_imag: f64) -> (f64, f64, f64, f64) {
    let half = 0.5 * dphi;
    let s_half = half.sin();
    let c_half = half.cos();
    let s2 = s_half * s_half;
    if s2 == 0.0 {
        return (1.0, 0.0, 0.0, 0.0);
    }
    let c2 = c_half * c_half;
    let sin_dphi = 2.0 * s_half * c_half;
    let kk2 = k_imag * k_imag;
    let kappa = (kk2 + k * k).sqrt();
    let kappa_out = (kk2 + k_out * k_out).sqrt();
    let p = kappa * kappa_out + k * k_out;
    let q = kk2 + k * k + k_out * k_out;
    // w = q - p = (k-k')² q / (q - kk' + κκ'), cancellation-free
    let w = (k - k_out) * (k - k_out) * q / (q - k * k_out + kappa * kappa_out);
    // Σ⁺ - K² where Σ⁺ = kk' cosΔφ + κκ'
    let d_minus = kk2 * w / p + 2.0 * k * k_out * c2;
    if d_minus <= 0.0 {
        // backward degeneracy k = k', Δφ = π
        return (0.0, 1.0, 0.0, 0.0);
    }
    let sigma_plus = kk2 * q / p + 2.0 * k * k_out * c2; // Σ⁺ - K² + K² rearranged below
    // Den = K⁴ - Σ⁺² = -(Σ⁺-K²)(Σ⁺+K²); Σ⁺ = κκ' - kk' + 2kk'c2 = K²q/p + 2kk'c2 - K² + K²
    let den = -d_minus * (sigma_plus + kk2);
    // f1 = kκ' + κk' cosΔφ, f2 = κk' + kκ' cosΔφ, via the stable split
    let diff = kk2 * (k * k - k_out * k_out) / (k * kappa_out + kappa * k_out);
    let f1 = diff + 2.0 * kappa * k_out * c2;
    let f2 = -diff + 2.0 * k * kappa_out * c2;
    let a = -f1 * f2 / den;
    let b = -kk2 * k * k_out * sin_dphi * sin_dphi / den;
    let c = -k_imag * k * sin_dphi * f1 / den;
    let d = k_imag * k_out * sin_dphi * f2 / den;
    (a, b, c, d)
}

/// Scattering angle per the imaginary-axis convention: cosΘ ≤ −1.
pub fn scattering_angle(k: f64, k_out: f64, dphi: f64, k_imag: f64) -> f64 {
    let kappa = (k_imag * k_imag + k * k).sqrt();
    let kappa_out = (k_imag * k_imag + k_out * k_out).sqrt();
    -(k * k_out * dphi.cos() + kappa * kappa_out) / (k_imag * k_imag)
}

/// Plane-wave scattering amplitudes (S₁, S₂) for the context's sphere at
/// the given scattering angle, truncated per `term_tol`/`l_cap`.
pub fn scattering_amplitudes(
    ctx: &KernelContext,
    cos_theta: f64,
) -> Result<(Scaled, Scaled), KernelError> {
    match angular::amplitude_sums(&ctx.mie, cos_theta, ctx.term_tol, ctx.l_cap) {
        Err(KernelError::MieTableExhausted { built, .. }) if built < ctx.l_cap => {
            // one-off call outside the assembly envelope: grow and retry
            let est = (0.8 * ctx.size_parameter() * cos_theta.abs().sqrt()) as usize + 800;
            let need = est.max(built * 2).min(ctx.l_cap);
            let bigger = MieTable::build(ctx.mie.refractive_index, ctx.size_parameter(), need)?;
            angular::amplitude_sums(&bigger, cos_theta, ctx.term_tol, ctx.l_cap)
        }
        other => other,
    }
}

/// The four sphere-reflection kernel combinations, ordered
/// [TM←TM, TE←TE, TM←TE, TE←TM], in the shared frame of (S₁, S₂).
fn rs_combinations(s1: Scaled, s2: Scaled, abcd: (f64, f64, f64, f64)) -> [Scaled; 4] {
    let (a, b, c, d) = abcd;
    debug_assert_eq!(s1.ln_scale, s2.ln_scale);
    let frame = s1.ln_scale;
    let m1 = s1.mantissa;
    let m2 = s2.mantissa;
    [
        Scaled { mantissa: a * m2 + b * m1, ln_scale: frame },
        Scaled { mantissa: a * m1 + b * m2, ln_scale: frame },
        Scaled { mantissa: -(c * m1 + d * m2), ln_scale: frame },
        Scaled { mantissa: c * m2 + d * m1, ln_scale: frame },
    ]
}

/// Kernel density of the round-trip operator (paper convention, m²):
/// f_M(out; in) = r_ρin e^{-(κ+κ')(z+R)} (2π/(K κ_out)) [rotated amplitudes].
pub fn roundtrip_kernel(
    ctx: &KernelContext,
    incoming: &PlaneWaveLabel,
    outgoing: &PlaneWaveLabel,
) -> Result<f64, KernelError> {
    let k = incoming.k;
    let k_out = outgoing.k;
    let dphi = outgoing.phi - incoming.phi;
    let kk = ctx.k_imag;
    let kappa = (kk * kk + k * k).sqrt();
    let kappa_out = (kk * kk + k_out * k_out).sqrt();
    let cos_theta = scattering_angle(k, k_out, dphi, kk);
    let (s1, s2) = scattering_amplitudes(ctx, cos_theta)?;
    let abcd = polarization_rotation(k, k_out, dphi, kk);
    let combos = rs_combinations(s1, s2, abcd);
    let idx = match (outgoing.pol, incoming.pol) {
        (Polarization::Tm, Polarization::Tm) => 0,
        (Polarization::Te, Polarization::Te) => 1,
        (Polarization::Tm, Polarization::Te) => 2,
        (Polarization::Te, Polarization::Tm) => 3,
    };
    let (r_te, r_tm) = fresnel(&ctx.plate, kk, k)?;
    let r = match incoming.pol {
        Polarization::Te => r_te,
        Polarization::Tm => r_tm,
    };
    let pref = TAU / (kk * kappa_out);
    let exponent = combos[idx].ln_scale - (kappa + kappa_out) * (ctx.gap + ctx.radius);
    Ok(r * pref * combos[idx].mantissa * exponent.exp())
}

/// ln(cosh s − 1), accurate for both tiny and huge s ≥ 0.
fn ln_cosh_minus_one(s: f64) -> f64 {
    if s == 0.0 {
        f64::NEG_INFINITY
    } else if s < 20.0 {
        // cosh s - 1 = 2 sinh²(s/2)
        (2.0f64).ln() + 2.0 * (0.5 * s).sinh().ln()
    } else {
        s - (2.0f64).ln() + ((-2.0 * s).exp() - 2.0 * (-s).exp()).ln_1p()
    }
}

/// Zero-frequency sphere-reflection kernel (translation factor NOT
/// included; κ = k at K = 0 so the caller applies e^{-(k+k')(z+R)}).
///
/// TM←TM: (2πR/k') [cosh(R√(2(k·k' + kk'))) − 1] for both model kinds;
/// TE←TE: the 𝓑_ℓ-weighted series (identically zero for Drude);
/// cross polarizations vanish.
pub fn zero_frequency_kernel(
    model: &MaterialModel,
    k: f64,
    k_out: f64,
    dphi: f64,
    radius: f64,
    incoming: Polarization,
    outgoing: Polarization,
) -> Result<f64, KernelError> {
    if incoming != outgoing {
        return Ok(0.0);
    }
    // y = 2R²(k·k' + kk') = 4R² kk' cos²(Δφ/2)
    let c_half = (0.5 * dphi).cos();
    let y = 4.0 * radius * radius * k * k_out * c_half * c_half;
    match incoming {
        Polarization::Tm => {
            let ln = ln_cosh_minus_one(y.sqrt());
            Ok(TAU * radius / k_out * ln.exp())
        }
        Polarization::Te => match model.zero_frequency_kind() {
            ZeroFreqKind::Drude => Ok(0.0),
            ZeroFreqKind::Plasma { omega_p } => {
                let u = omega_p / SPEED_OF_LIGHT * radius;
                let lmax = (0.75 * y.sqrt()) as usize + 200;
                let b = mie::plasma_b_coefficients(u, lmax);
                let series = plasma_te_series(&b, y, 1e-14)?;
                Ok(TAU * radius / k_out * series.value())
            }
        },
    }
}

/// Σ_ℓ 𝓑_ℓ y^ℓ/(2ℓ)! with in-frame scaling; `b` holds 𝓑_ℓ for ℓ≥1.
pub(crate) fn plasma_te_series(b: &[f64], y: f64, tol: f64) -> Result<Scaled, KernelError> {
    if y == 0.0 {
        return Ok(Scaled::ZERO);
    }
    let mut frame = 0.0f64;
    let mut u = 0.5 * y; // y^1 / 2!
    let mut sum = 0.0f64;
    let mut quiet = 0u32;
    for (i, &b_ell) in b.iter().enumerate() {
        let ell = i + 1;
        let t = b_ell * u;
        sum += t;
        let ratio = y / ((2 * ell + 1) as f64 * (2 * ell + 2) as f64);
        if ratio < 1.0 && t.abs() <= tol * sum.abs() {
            quiet += 1;
            if quiet >= 3 {
                return Ok(Scaled::from_parts(sum, frame));
            }
        } else {
            quiet = 0;
        }
        u *= ratio;
        let m = u.abs().max(sum.abs());
        if m > 1e200 {
            u *= 1e-200;
            sum *= 1e-200;
            frame += 460.517018598809136;
        }
    }
    Err(KernelError::ZeroFreqSeries { lmax: b.len() })
}

/// Shared pair-level quantities for operator assembly: the four kernel
/// combinations with the symmetrized 1/√(κκ') prefactor and the
/// translation factor, but without the plate reflection coefficient
/// (which depends on which side of the pair is the incoming mode):
///
///   core_{ρ'ρ} = (2π/(K√(κκ'))) e^{-(κ+κ')(z+R)} RS_{ρ'ρ}(out=p, in=q)
///
/// ordered [TM←TM, TE←TE, TM←TE, TE←TM]. The same values serve the
/// transposed orientation with the cross entries swapped.
pub(crate) fn pair_core(
    ctx: &KernelContext,
    k_p: f64,
    kappa_p: f64,
    k_q: f64,
    kappa_q: f64,
    dphi: f64,
) -> Result<[f64; 4], KernelError> {
    let kk = ctx.k_imag;
    let cos_theta = -(k_p * k_q * dphi.cos() + kappa_p * kappa_q) / (kk * kk);
    let (s1, s2) = angular::amplitude_sums(&ctx.mie, cos_theta, ctx.term_tol, ctx.l_cap)?;
    // orientation: in = q, out = p
    let abcd = polarization_rotation(k_q, k_p, dphi, kk);
    let combos = rs_combinations(s1, s2, abcd);
    let pref = TAU / (kk * (kappa_p * kappa_q).sqrt());
    let exponent = combos[0].ln_scale - (kappa_p + kappa_q) * (ctx.gap + ctx.radius);
    let scale = pref * exponent.exp();
    Ok([
        combos[0].mantissa * scale,
        combos[1].mantissa * scale,
        combos[2].mantissa * scale,
        combos[3].mantissa * scale,
    ])
}

/// Zero-frequency analog of [`pair_core`]: symmetrized prefactor and
/// translation included, plate reflection excluded; cross entries vanish.
/// Returns [TM←TM, TE←TE].
pub(crate) fn pair_core_zero(
    kind: ZeroFreqKind,
    b_table: &[f64],
    radius: f64,
    gap: f64,
    k_p: f64,
    k_q: f64,
    dphi: f64,
) -> Result<[f64; 2], KernelError> {
    let c_half = (0.5 * dphi).cos();
    let y = 4.0 * radius * radius * k_p * k_q * c_half * c_half;
    let pref = TAU * radius / (k_p * k_q).sqrt();
    let trans = -(k_p + k_q) * (gap + radius);
    let tm = pref * (ln_cosh_minus_one(y.sqrt()) + trans).exp();
    let te = match kind {
        ZeroFreqKind::Drude => 0.0,
        ZeroFreqKind::Plasma { .. } => {
            let series = plasma_te_series(b_table, y, 1e-14)?;
            pref * series.mantissa * (series.ln_scale + trans).exp()
        }
    };
    Ok([tm, te])
}

/// Pair-level skip test for assembly: entries whose translation-suppressed
/// magnitude is below e^{-45} of the leading e^{-2Kz} scale contribute
/// nothing at the working tolerances.
pub(crate) fn pair_negligible(
    radius: f64,
    gap: f64,
    k_imag: f64,
    kappa_p: f64,
    kappa_q: f64,
) -> bool {
    let sq = kappa_p.sqrt() - kappa_q.sqrt();
    -radius * sq * sq - (kappa_p + kappa_q - 2.0 * k_imag) * gap < -45.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gold_drude() -> MaterialModel {
        MaterialModel::drude(1.37e16, 5.3e13).unwrap()
    }

    fn test_ctx(k_imag: f64, radius: f64, gap: f64) -> KernelContext {
        KernelContext::new(k_imag, radius, gap, gold_drude(), gold_drude(), 1e-12, None).unwrap()
    }

    #[test]
    fn fresnel_perfect_reflector_limit() {
        let m = MaterialModel::drude(1e22, 1e10).unwrap();
        let (r_te, r_tm) = fresnel(&m, 1e6, 2e6).unwrap();
        assert_relative_eq!(r_tm, 1.0, epsilon = 1e-5);
        assert_relative_eq!(r_te, -1.0, epsilon = 1e-5);
    }

    #[test]
    fn fresnel_vacuum_no_contrast() {
        // epsilon -> 1: vanishing omega_p
        let m = MaterialModel::drude(1e-3, 0.0).unwrap();
        let (r_te, r_tm) = fresnel(&m, 1e6, 2e6).unwrap();
        assert!(r_te.abs() < 1e-30 && r_tm.abs() < 1e-30);
    }

    #[test]
    fn fresnel_normal_incidence() {
        // k = 0: r_TM = (√ε−1)/(√ε+1) = −r_TE
        let m = MaterialModel::plasma(2.5e15).unwrap();
        let kk = 1e6;
        let eps = permittivity(&m, kk * SPEED_OF_LIGHT).unwrap();
        let (r_te, r_tm) = fresnel(&m, kk, 0.0).unwrap();
        let expect = (eps.sqrt() - 1.0) / (eps.sqrt() + 1.0);
        assert_relative_eq!(r_tm, expect, max_relative = 1e-12);
        assert_relative_eq!(r_te, -expect, max_relative = 1e-12);
    }

    #[test]
    fn fresnel_bounds_random() {
        let m = gold_drude();
        for i in 0..200 {
            let kk = 1e4 * 10f64.powf(4.0 * (i % 20) as f64 / 19.0);
            let k = 1e3 * 10f64.powf(6.0 * (i / 20) as f64 / 9.0);
            let (r_te, r_tm) = fresnel(&m, kk, k).unwrap();
            assert!(r_te > -1.0 && r_te <= 0.0, "r_te = {r_te}");
            assert!(r_tm >= 0.0 && r_tm <= 1.0, "r_tm = {r_tm}");
        }
    }

    #[test]
    fn zero_frequency_fresnel_limits() {
        assert_eq!(zero_frequency_fresnel(&gold_drude(), 1e6), (0.0, 1.0));
        let p = MaterialModel::plasma(1.37e16).unwrap();
        let kp = 1.37e16 / SPEED_OF_LIGHT;
        // 3-4-5 triple: k = 3/4 K_p gives r_TE = -1/4
        let (r_te, r_tm) = zero_frequency_fresnel(&p, 0.75 * kp);
        assert_relative_eq!(r_te, -0.25, max_relative = 1e-12);
        assert_eq!(r_tm, 1.0);
        // k >> K_p: r_TE -> 0 from below
        let (r_te, _) = zero_frequency_fresnel(&p, 1e4 * kp);
        assert!(r_te < 0.0 && r_te > -1e-3);
    }

    #[test]
    fn rotation_forward_is_identity() {
        let (a, b, c, d) = polarization_rotation(2e6, 5e6, 0.0, 1e6);
        assert_eq!((a, b, c, d), (1.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn rotation_low_frequency_limit() {
        for &dphi in &[0.3, 1.2, 2.8] {
            let (a, b, c, d) = polarization_rotation(2e6, 5e6, dphi, 1.0);
            assert_relative_eq!(a, 1.0, epsilon = 1e-10);
            assert!(b.abs() < 1e-10 && c.abs() < 1e-5 && d.abs() < 1e-5);
        }
    }

    #[test]
    fn rotation_swap_antisymmetry_and_identities() {
        let cases = [
            (2.0e6, 5.0e6, 0.7, 8.0e5),
            (1.0e6, 1.0e6, 2.9, 3.0e6),
            (9.0e6, 2.0e5, 1.9, 1.0e6),
            (4.0e5, 4.1e5, 3.0, 4.0e5),
        ];
        for &(k, kp, dphi, kk) in &cases {
            let (a, b, c, d) = polarization_rotation(k, kp, dphi, kk);
            let (_, _, c_swap, d_swap) = polarization_rotation(kp, k, dphi, kk);
            assert_relative_eq!(c, -d_swap, max_relative = 1e-9);
            assert_relative_eq!(d, -c_swap, max_relative = 1e-9);
            // rotation structure: A²+B²+C²+D² = 1 and AB + CD = 0
            assert_relative_eq!(a * a + b * b + c * c + d * d, 1.0, max_relative = 1e-9);
            assert!((a * b + c * d).abs() < 1e-9);
        }
    }

    #[test]
    fn rotation_backward_degenerate_point() {
        // the analytic limit along k = k' toward Δφ = π is (0, 1, 0, 0)
        let (a, b, c, d) = polarization_rotation(2e6, 2e6, std::f64::consts::PI, 1e6);
        assert!(a.abs() < 1e-15);
        assert_relative_eq!(b, 1.0, epsilon = 1e-12);
        assert!(c.abs() < 1e-15 && d.abs() < 1e-15);
    }

    #[test]
    fn amplitudes_single_term_dominates_at_tiny_x() {
        // with x -> 0 the ℓ=1 term dominates: S₂ ≈ (3/2)(a₁ τ₁ + b₁ π₁), π₁=1, τ₁=cosΘ
        let ctx = KernelContext::new(
            1e-3 / 1.5e-4, // x = K R = 1e-3
            1.5e-4,
            1e-6,
            gold_drude(),
            gold_drude(),
            1e-14,
            None,
        )
        .unwrap();
        let cos_theta = -2.5;
        let (s1, s2) = scattering_amplitudes(&ctx, cos_theta).unwrap();
        let a1 = ctx.mie.a(1);
        let b1 = ctx.mie.b(1);
        let expect2 = 1.5 * (a1.value() * cos_theta + b1.value());
        let expect1 = 1.5 * (a1.value() + b1.value() * cos_theta);
        assert_relative_eq!(s2.value(), expect2, max_relative = 1e-4);
        assert_relative_eq!(s1.value(), expect1, max_relative = 1e-4);
    }

    #[test]
    fn amplitudes_truncation_stable_under_larger_cap() {
        let ctx = test_ctx(8.1e5, 1.5e-4, 1e-6);
        let cos_theta = -50.0;
        let (s1, s2) = scattering_amplitudes(&ctx, cos_theta).unwrap();
        let mut wide = test_ctx(8.1e5, 1.5e-4, 1e-6);
        wide.l_cap *= 2;
        let (t1, t2) = scattering_amplitudes(&wide, cos_theta).unwrap();
        assert_relative_eq!(s1.ln_abs(), t1.ln_abs(), epsilon = 1e-11);
        assert_relative_eq!(s2.ln_abs(), t2.ln_abs(), epsilon = 1e-11);
    }

    #[test]
    fn amplitudes_match_low_frequency_form() {
        // K -> 0 with k, k' fixed: S₂ -> K R Σ [2R²(k·k'+kk')]^ℓ/(2ℓ)!
        let radius = 1.5e-4;
        let k = 2.0e6;
        let kp = 3.0e6;
        let dphi: f64 = 1.1;
        let kk = 5.0; // K R = 7.5e-4
        let ctx = test_ctx(kk, radius, 1e-6);
        let kappa = (kk * kk + k * k).sqrt();
        let kappap = (kk * kk + kp * kp).sqrt();
        let cos_theta = -(k * kp * dphi.cos() + kappa * kappap) / (kk * kk);
        let (s1, s2) = scattering_amplitudes(&ctx, cos_theta).unwrap();
        // independent evaluation of the limit series
        let y = 2.0 * radius * radius * (k * kp * dphi.cos() + k * kp);
        let s = y.sqrt();
        let ln_s2_expect = (kk * radius).ln() + ln_cosh_minus_one(s);
        assert_relative_eq!(s2.ln_abs(), ln_s2_expect, epsilon = 1e-4);
        // TE series with the plasma-kind coefficients of the Drude model is 0;
        // here just check S₁ is far below S₂ (𝓑_ℓ-suppressed)
        assert!(s1.ln_abs() < s2.ln_abs());
    }

    #[test]
    fn kernel_cross_terms_vanish_at_low_frequency() {
        let ctx = test_ctx(5.0, 1.5e-4, 1e-6);
        let incoming = PlaneWaveLabel::new(2e6, 0.0, Polarization::Te).unwrap();
        let outgoing = PlaneWaveLabel::new(3e6, 1.0, Polarization::Tm).unwrap();
        let cross = roundtrip_kernel(&ctx, &incoming, &outgoing).unwrap();
        let incoming_tm = PlaneWaveLabel::new(2e6, 0.0, Polarization::Tm).unwrap();
        let outgoing_tm = PlaneWaveLabel::new(3e6, 1.0, Polarization::Tm).unwrap();
        let diag = roundtrip_kernel(&ctx, &incoming_tm, &outgoing_tm).unwrap();
        assert!(cross.abs() < 1e-4 * diag.abs());
    }

    #[test]
    fn kernel_dphi_parity() {
        let ctx = test_ctx(8.1e5, 1.5e-4, 1e-6);
        let dphi = 0.9;
        let make = |phi: f64, pol_in, pol_out| {
            let incoming = PlaneWaveLabel::new(1.5e6, 0.0, pol_in).unwrap();
            let outgoing = PlaneWaveLabel::new(2.5e6, phi, pol_out).unwrap();
            roundtrip_kernel(&ctx, &incoming, &outgoing).unwrap()
        };
        use Polarization::*;
        // like polarizations even in Δφ, cross terms odd
        assert_relative_eq!(make(dphi, Tm, Tm), make(TAU - dphi, Tm, Tm), max_relative = 1e-10);
        assert_relative_eq!(make(dphi, Te, Te), make(TAU - dphi, Te, Te), max_relative = 1e-10);
        assert_relative_eq!(make(dphi, Te, Tm), -make(TAU - dphi, Te, Tm), max_relative = 1e-10);
        assert_relative_eq!(make(dphi, Tm, Te), -make(TAU - dphi, Tm, Te), max_relative = 1e-10);
    }

    #[test]
    fn kernel_translation_factor_in_gap() {
        let k = 1.5e6;
        let kp = 2.5e6;
        let kk = 8.1e5;
        let z = 1e-6;
        let ctx1 = test_ctx(kk, 1.5e-4, z);
        let ctx2 = test_ctx(kk, 1.5e-4, 2.0 * z);
        let incoming = PlaneWaveLabel::new(k, 0.0, Polarization::Tm).unwrap();
        let outgoing = PlaneWaveLabel::new(kp, 0.7, Polarization::Tm).unwrap();
        let v1 = roundtrip_kernel(&ctx1, &incoming, &outgoing).unwrap();
        let v2 = roundtrip_kernel(&ctx2, &incoming, &outgoing).unwrap();
        let kappa = (kk * kk + k * k).sqrt();
        let kappap = (kk * kk + kp * kp).sqrt();
        assert_relative_eq!(v2 / v1, (-(kappa + kappap) * z).exp(), max_relative = 1e-10);
    }

    #[test]
    fn kernel_like_pol_diagonal_positive() {
        let ctx = test_ctx(8.1e5, 1.5e-4, 1e-6);
        for &k in &[5e5, 2e6, 8e6] {
            let label_tm = PlaneWaveLabel::new(k, 0.0, Polarization::Tm).unwrap();
            let v = roundtrip_kernel(&ctx, &label_tm, &label_tm).unwrap();
            assert!(v > 0.0, "TM diagonal not positive at k={k}");
            let label_te = PlaneWaveLabel::new(k, 0.0, Polarization::Te).unwrap();
            let v = roundtrip_kernel(&ctx, &label_te, &label_te).unwrap();
            assert!(v > 0.0, "TE diagonal not positive at k={k}");
        }
    }

    #[test]
    fn zero_frequency_drude_te_vanishes() {
        let m = gold_drude();
        for &(k, kp, dphi) in &[(1e6, 2e6, 0.3), (5e5, 5e5, 2.0)] {
            let v = zero_frequency_kernel(&m, k, kp, dphi, 1.5e-4, Polarization::Te, Polarization::Te)
                .unwrap();
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn zero_frequency_tm_closed_form_equals_series() {
        // closed form vs the ℓ-series truncated at ℓ = 60, rel 1e-12
        let radius = 1.5e-4;
        let m = gold_drude();
        let mut rng = 123456789u64;
        let mut next = || {
            rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (rng >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            // k range chosen so the series is fully converged by ℓ = 60
            let k = 1e3 + 1.2e5 * next();
            let kp = 1e3 + 1.2e5 * next();
            let dphi = TAU * next();
            let v = zero_frequency_kernel(&m, k, kp, dphi, radius, Polarization::Tm, Polarization::Tm)
                .unwrap();
            // brute-force series
            let y = 4.0 * radius * radius * k * kp * (0.5 * dphi).cos().powi(2);
            let mut sum = 0.0f64;
            let mut u = 0.5 * y;
            for ell in 1..=60usize {
                sum += u;
                u *= y / ((2 * ell + 1) as f64 * (2 * ell + 2) as f64);
            }
            let expect = TAU * radius / kp * sum;
            assert_relative_eq!(v, expect, max_relative = 1e-12);
        }
    }

    #[test]
    fn zero_frequency_antiparallel_equal_k_vanishes() {
        // cosh(0) - 1 = 0 up to the floating-point representation of π/2
        let m = gold_drude();
        let v = zero_frequency_kernel(&m, 2e6, 2e6, std::f64::consts::PI, 1.5e-4, Polarization::Tm, Polarization::Tm)
            .unwrap();
        assert!(v.abs() < 1e-30, "v = {v}");
    }

    #[test]
    fn zero_frequency_plasma_te_negative_and_finite() {
        let p = MaterialModel::plasma(1.37e16).unwrap();
        let v = zero_frequency_kernel(&p, 2e5, 3e5, 0.4, 1.5e-4, Polarization::Te, Polarization::Te)
            .unwrap();
        assert!(v < 0.0 && v.is_finite(), "v = {v}");
    }
}
