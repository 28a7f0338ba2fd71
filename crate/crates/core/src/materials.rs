//! Dielectric permittivity models at imaginary frequencies and the
//! Matsubara frequency grid.
//!
//! Models never mix eV and rad/s internally: everything here is rad/s.

use crate::constants::{BOLTZMANN, HBAR};
use std::io::BufRead;
use thiserror::Error;

/// Errors from material construction, evaluation and table parsing.
#[derive(Debug, Error)]
pub enum MaterialError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("permittivity requires xi > 0, got {0}")]
    NonPositiveFrequency(f64),
    #[error("line {line}: {msg}")]
    TableParse { line: usize, msg: String },
    #[error("table i/o: {0}")]
    TableIo(#[from] std::io::Error),
}

/// Zero-frequency behaviour of a model, used by the dedicated K=0 kernels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ZeroFreqKind {
    Drude,
    /// Plasma with the given plasma frequency in rad/s.
    Plasma { omega_p: f64 },
}

/// Dielectric response ε(iξ) of a metal.
#[derive(Clone, Debug, PartialEq)]
pub enum MaterialModel {
    /// ε = 1 + ω_p²/(ξ(ξ+γ))
    Drude { omega_p: f64, gamma: f64 },
    /// ε = 1 + ω_p²/ξ²
    Plasma { omega_p: f64 },
    /// Tabulated (ξ, ε) points with a Drude or plasma extrapolation below
    /// the lowest tabulated frequency. Interpolation is linear in
    /// (log ξ, log(ε−1)); above the table, ε = 1 + (ε_top−1)(ξ_top/ξ)².
    Tabulated {
        points: Vec<(f64, f64)>,
        extrapolation: Box<MaterialModel>,
    },
}

impl MaterialModel {
    pub fn drude(omega_p: f64, gamma: f64) -> Result<Self, MaterialError> {
        if !(omega_p > 0.0) {
            return Err(MaterialError::InvalidParameter(format!("omega_p = {omega_p}")));
        }
        if !(gamma >= 0.0) {
            return Err(MaterialError::InvalidParameter(format!("gamma = {gamma}")));
        }
        Ok(MaterialModel::Drude { omega_p, gamma })
    }

    pub fn plasma(omega_p: f64) -> Result<Self, MaterialError> {
        if !(omega_p > 0.0) {
            return Err(MaterialError::InvalidParameter(format!("omega_p = {omega_p}")));
        }
        Ok(MaterialModel::Plasma { omega_p })
    }

    pub fn tabulated(
        points: Vec<(f64, f64)>,
        extrapolation: MaterialModel,
    ) -> Result<Self, MaterialError> {
        if points.is_empty() {
            return Err(MaterialError::InvalidParameter("empty table".into()));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(MaterialError::InvalidParameter(format!(
                    "table frequencies not strictly increasing near xi = {}",
                    w[1].0
                )));
            }
        }
        for &(xi, eps) in &points {
            if !(xi > 0.0) || !(eps > 1.0) {
                return Err(MaterialError::InvalidParameter(format!(
                    "table point (xi={xi}, eps={eps}) violates xi > 0, eps > 1"
                )));
            }
        }
        match extrapolation {
            MaterialModel::Drude { .. } | MaterialModel::Plasma { .. } => {}
            MaterialModel::Tabulated { .. } => {
                return Err(MaterialError::InvalidParameter(
                    "extrapolation must be Drude or plasma".into(),
                ))
            }
        }
        Ok(MaterialModel::Tabulated { points, extrapolation: Box::new(extrapolation) })
    }

    /// How the model behaves in the ξ → 0 limit.
    pub fn zero_frequency_kind(&self) -> ZeroFreqKind {
        match self {
            MaterialModel::Drude { .. } => ZeroFreqKind::Drude,
            MaterialModel::Plasma { omega_p } => ZeroFreqKind::Plasma { omega_p: *omega_p },
            MaterialModel::Tabulated { extrapolation, .. } => extrapolation.zero_frequency_kind(),
        }
    }
}

/// Temperature and Matsubara-summation controls.
#[derive(Clone, Copy, Debug)]
pub struct ThermalSpec {
    /// Temperature in kelvin.
    pub temperature: f64,
    /// Relative tolerance for terminating the Matsubara sum.
    pub rel_tol: f64,
    /// Hard cap on the Matsubara index.
    pub l_max_cap: usize,
}

impl ThermalSpec {
    pub fn new(temperature: f64, rel_tol: f64, l_max_cap: usize) -> Result<Self, MaterialError> {
        if !(temperature > 0.0) {
            return Err(MaterialError::InvalidParameter(format!("T = {temperature}")));
        }
        if !(rel_tol > 0.0 && rel_tol < 1.0) {
            return Err(MaterialError::InvalidParameter(format!("rel_tol = {rel_tol}")));
        }
        Ok(ThermalSpec { temperature, rel_tol, l_max_cap })
    }

    /// Paper configuration: T = 295.25 K, rel_tol 1e-8, cap 1e5.
    pub fn room(temperature: f64) -> Self {
        ThermalSpec { temperature, rel_tol: 1e-8, l_max_cap: 100_000 }
    }
}

/// Matsubara frequency ξ_l = 2π k_B T l / ħ in rad/s; exactly 0 for l = 0.
pub fn matsubara_frequency(spec: &ThermalSpec, l: usize) -> f64 {
    if l == 0 {
        return 0.0;
    }
    2.0 * std::f64::consts::PI * BOLTZMANN * spec.temperature * l as f64 / HBAR
}

/// ε(iξ) for ξ > 0. The ξ = 0 limit is handled by the dedicated
/// zero-frequency kernels, never here.
pub fn permittivity(model: &MaterialModel, xi: f64) -> Result<f64, MaterialError> {
    if !(xi > 0.0) {
        return Err(MaterialError::NonPositiveFrequency(xi));
    }
    Ok(match model {
        MaterialModel::Drude { omega_p, gamma } => 1.0 + omega_p * omega_p / (xi * (xi + gamma)),
        MaterialModel::Plasma { omega_p } => 1.0 + (omega_p / xi) * (omega_p / xi),
        MaterialModel::Tabulated { points, extrapolation } => {
            let lo = points[0];
            let hi = points[points.len() - 1];
            if xi < lo.0 {
                permittivity(extrapolation, xi)?
            } else if xi > hi.0 {
                // universal high-frequency transparency: ε−1 ∝ ξ⁻²
                1.0 + (hi.1 - 1.0) * (hi.0 / xi) * (hi.0 / xi)
            } else {
                // log-log interpolation in (ξ, ε−1)
                let idx = points.partition_point(|&(x, _)| x <= xi).min(points.len() - 1);
                let (x0, e0) = points[idx - 1];
                let (x1, e1) = points[idx];
                let t = (xi.ln() - x0.ln()) / (x1.ln() - x0.ln());
                let ln_em1 = (e0 - 1.0).ln() * (1.0 - t) + (e1 - 1.0).ln() * t;
                1.0 + ln_em1.exp()
            }
        }
    })
}

/// Parses the two-column material table format:
/// first non-comment content on line 1 must be a header comment
/// `# extrapolation=drude omega_p=<rad/s> gamma=<rad/s>` or
/// `# extrapolation=plasma omega_p=<rad/s>`, followed by
/// `<xi_rad_per_s> <epsilon>` rows. `#` begins comments.
pub fn load_material_table<R: BufRead>(source: R) -> Result<MaterialModel, MaterialError> {
    let mut extrapolation: Option<MaterialModel> = None;
    let mut points = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            let comment = comment.trim();
            if comment.starts_with("extrapolation=") {
                extrapolation = Some(parse_extrapolation_header(comment, lineno)?);
            }
            continue;
        }
        if extrapolation.is_none() {
            return Err(MaterialError::TableParse {
                line: lineno,
                msg: "data before the `# extrapolation=...` header".into(),
            });
        }
        let mut fields = trimmed.split_whitespace();
        let xi: f64 = parse_field(fields.next(), "xi", lineno)?;
        let eps: f64 = parse_field(fields.next(), "epsilon", lineno)?;
        if fields.next().is_some() {
            return Err(MaterialError::TableParse { line: lineno, msg: "more than two columns".into() });
        }
        if !(eps > 1.0) {
            return Err(MaterialError::TableParse {
                line: lineno,
                msg: format!("epsilon = {eps} must exceed 1"),
            });
        }
        if let Some(&(prev, _)) = points.last() {
            if !(xi > prev) {
                return Err(MaterialError::TableParse {
                    line: lineno,
                    msg: format!("xi = {xi} does not increase past {prev}"),
                });
            }
        }
        points.push((xi, eps));
    }
    let extrapolation = extrapolation.ok_or(MaterialError::TableParse {
        line: 0,
        msg: "missing `# extrapolation=...` header".into(),
    })?;
    MaterialModel::tabulated(points, extrapolation)
}

fn parse_extrapolation_header(comment: &str, line: usize) -> Result<MaterialModel, MaterialError> {
    let mut kind = None;
    let mut omega_p = None;
    let mut gamma = None;
    for token in comment.split_whitespace() {
        let (key, value) = token.split_once('=').ok_or_else(|| MaterialError::TableParse {
            line,
            msg: format!("malformed header token `{token}`"),
        })?;
        match key {
            "extrapolation" => kind = Some(value.to_string()),
            "omega_p" => omega_p = Some(parse_header_num(value, line)?),
            "gamma" => gamma = Some(parse_header_num(value, line)?),
            other => {
                return Err(MaterialError::TableParse {
                    line,
                    msg: format!("unknown header key `{other}`"),
                })
            }
        }
    }
    let omega_p = omega_p.ok_or(MaterialError::TableParse { line, msg: "header missing omega_p".into() })?;
    match kind.as_deref() {
        Some("drude") => MaterialModel::drude(omega_p, gamma.unwrap_or(0.0)),
        Some("plasma") => MaterialModel::plasma(omega_p),
        other => Err(MaterialError::TableParse {
            line,
            msg: format!("extrapolation must be drude or plasma, got {other:?}"),
        }),
    }
}

fn parse_header_num(value: &str, line: usize) -> Result<f64, MaterialError> {
    value.parse().map_err(|_| MaterialError::TableParse {
        line,
        msg: format!("bad number `{value}`"),
    })
}

fn parse_field(field: Option<&str>, name: &str, line: usize) -> Result<f64, MaterialError> {
    let raw = field.ok_or_else(|| MaterialError::TableParse {
        line,
        msg: format!("missing {name} column"),
    })?;
    raw.parse().map_err(|_| MaterialError::TableParse {
        line,
        msg: format!("bad {name} value `{raw}`"),
    })
}
