//! Scattering types of two-eigenvalue couplings, the closed-form
//! reflection/transmission ratio `ρ(k)`, and inverse design of couplings
//! with a prescribed `ρ` profile.
//!
//! With `cc = cos(α/2)cos(β/2)` and `ss = sin(α/2)sin(β/2)`,
//!
//! ```text
//! ρ(k) = d² + (d² + n − 1) (cc·k + ss/k)² / sin²((α − β)/2)
//! ```
//!
//! Every non-scale-invariant type is summarized by a factor `c` so that
//! `ρ(k) = d² + c·b(k)²` where `b(k)` is `1/k` (type II), `k` (type III) or
//! `cos ξ·k + sin ξ/k` (type IV).

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use crate::coupling::{from_spectral, TwoEigSpectralForm, VertexCoupling};
use crate::error::{Error, Result};
use crate::mps::{mps_profile, MpsProfile};
use crate::numkernel::{is_hermitian, is_unitary, ComplexMatrix, Tolerance};

/// Scattering type of a coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CouplingClass {
    Decoupled,
    /// `{α, β} = {0, π}`; `S(k)` does not depend on `k`.
    ScaleInvariant,
    /// `β = π`, `α ∉ {0, π}`; principal parameter `γ = −n tan(α/2)`.
    GeneralizedDelta {
        gamma: f64,
        c: Option<f64>,
    },
    /// `α = 0`, `β ∉ {0, π}`; principal parameter `γ′ = −n cot(β/2)`.
    GeneralizedDeltaPrime {
        gamma_prime: f64,
        c: Option<f64>,
    },
    /// Neither phase in `{0, π}`; `tan ξ = tan(α/2) tan(β/2)`.
    Mixed {
        xi: f64,
        c: Option<f64>,
    },
    /// `U` has three or more eigenvalues.
    OutsideFamily,
}

impl CouplingClass {
    pub fn tag(&self) -> &'static str {
        match self {
            CouplingClass::Decoupled => "Decoupled",
            CouplingClass::ScaleInvariant => "TypeI",
            CouplingClass::GeneralizedDelta { .. } => "TypeII",
            CouplingClass::GeneralizedDeltaPrime { .. } => "TypeIII",
            CouplingClass::Mixed { .. } => "TypeIV",
            CouplingClass::OutsideFamily => "OutsideFamily",
        }
    }

    pub fn c(&self) -> Option<f64> {
        match *self {
            CouplingClass::GeneralizedDelta { c, .. }
            | CouplingClass::GeneralizedDeltaPrime { c, .. }
            | CouplingClass::Mixed { c, .. } => c,
            _ => None,
        }
    }
}

fn is_special(phase: f64) -> bool {
    phase == 0.0 || phase == PI
}

/// `(cc, ss)` for a phase pair.
fn trig_pair(alpha: f64, beta: f64) -> (f64, f64) {
    let (sa, ca) = (0.5 * alpha).sin_cos();
    let (sb, cb) = (0.5 * beta).sin_cos();
    (ca * cb, sa * sb)
}

/// `c = (d² + n − 1)(cc² + ss²)/sin²((α − β)/2)`, the factor in front of the
/// normalized bracket of `ρ(k)`. Reduces to `(d²+n−1)tan²(α/2)` for `β = π`
/// and `(d²+n−1)cot²(β/2)` for `α = 0`.
pub fn curvature_factor(alpha: f64, beta: f64, d: f64, n: usize) -> f64 {
    let (cc, ss) = trig_pair(alpha, beta);
    let s = (0.5 * (alpha - beta)).sin();
    (d * d + n as f64 - 1.0) * (cc * cc + ss * ss) / (s * s)
}

/// Classifies a spectral form obtained from [`crate::coupling::decompose`].
///
/// `c` is filled in when `M` is a non-diagonal MPS matrix.
pub fn classify(form: &TwoEigSpectralForm, coupling_is_diagonal: bool, n: usize, tol: Tolerance) -> CouplingClass {
    if coupling_is_diagonal || form.degenerate {
        return CouplingClass::Decoupled;
    }
    let (alpha, beta) = (form.alpha, form.beta);
    let c = mps_profile(&form.m, tol).map(|p| curvature_factor(alpha, beta, p.d, n));
    let nf = n as f64;
    match (is_special(alpha), is_special(beta)) {
        (true, true) => CouplingClass::ScaleInvariant,
        (false, true) => CouplingClass::GeneralizedDelta {
            gamma: -nf * (0.5 * alpha).tan(),
            c,
        },
        (true, false) => CouplingClass::GeneralizedDeltaPrime {
            gamma_prime: -nf / (0.5 * beta).tan(),
            c,
        },
        (false, false) => CouplingClass::Mixed {
            xi: ((0.5 * alpha).tan() * (0.5 * beta).tan()).atan(),
            c,
        },
    }
}

/// `ρ(k) = d_squared + scale·(cc·k + ss/k)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoCurve {
    pub d_squared: f64,
    /// `(d² + n − 1)/sin²((α − β)/2)`
    pub scale: f64,
    pub cc: f64,
    pub ss: f64,
}

impl RhoCurve {
    pub fn evaluate(&self, k: f64) -> f64 {
        let bracket = self.cc * k + self.ss / k;
        self.d_squared + self.scale * bracket * bracket
    }
}

/// Checks that every entry modulus of `M` matches the profile.
fn matches_profile(m: &ComplexMatrix, profile: &MpsProfile, eps: f64) -> bool {
    let n = m.order();
    profile.t > eps
        && (0..n).all(|j| {
            (0..n).all(|l| {
                let want = if j == l { profile.r } else { profile.t };
                (m[(j, l)].norm() - want).abs() <= eps
            })
        })
}

/// Closed-form `ρ(k)` for a coupling whose `M` has the given MPS profile.
pub fn rho_curve(form: &TwoEigSpectralForm, profile: &MpsProfile, n: usize) -> Result<RhoCurve> {
    if form.degenerate || form.alpha == form.beta {
        return Err(Error::DegenerateForm);
    }
    if !matches_profile(&form.m, profile, 1e-9) {
        return Err(Error::NotMps);
    }
    let (cc, ss) = trig_pair(form.alpha, form.beta);
    let s = (0.5 * (form.alpha - form.beta)).sin();
    Ok(RhoCurve {
        d_squared: profile.d * profile.d,
        scale: profile.weight(n) / (s * s),
        cc,
        ss,
    })
}

/// Admissible values of `c` for a mixed coupling: `(0, upper]`, or
/// `(0, ∞)` when `upper` is `None`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CInterval {
    pub upper: Option<f64>,
}

impl CInterval {
    pub fn contains(&self, c: f64) -> bool {
        c > 0.0 && self.upper.map_or(c.is_finite(), |u| c <= u)
    }
}

impl fmt::Display for CInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.upper {
            Some(u) => write!(f, "(0, {u}]"),
            None => write!(f, "(0, inf)"),
        }
    }
}

fn check_xi(xi: f64) -> Result<f64> {
    if !(xi.is_finite() && xi != 0.0 && xi.abs() < FRAC_PI_2) {
        return Err(Error::InvalidXi(xi));
    }
    Ok(xi.tan())
}

/// Range of `c` reachable by mixed couplings with mixing angle `xi`.
pub fn c_range(xi: f64, d: f64, n: usize) -> Result<CInterval> {
    let tan_xi = check_xi(xi)?;
    let weight = d * d + n as f64 - 1.0;
    Ok(if tan_xi > 0.0 {
        CInterval { upper: None }
    } else {
        CInterval {
            upper: Some(weight * (1.0 + tan_xi * tan_xi) / (4.0 * tan_xi.abs())),
        }
    })
}

/// Which root of a sign-ambiguous design equation to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Positive,
    Negative,
}

impl Branch {
    pub fn value(self) -> f64 {
        match self {
            Branch::Positive => 1.0,
            Branch::Negative => -1.0,
        }
    }

    pub fn from_sign(sign: f64) -> Self {
        if sign < 0.0 {
            Branch::Negative
        } else {
            Branch::Positive
        }
    }
}

/// Validates `M` and returns its recomputed profile.
fn design_matrix(m: &ComplexMatrix, profile: &MpsProfile, n: usize) -> Result<MpsProfile> {
    let tol = Tolerance::default();
    if m.order() != n {
        return Err(Error::DimensionMismatch {
            left: m.order(),
            right: n,
        });
    }
    if !(is_hermitian(m, tol) && is_unitary(m, tol)) {
        return Err(Error::NotMps);
    }
    if !matches_profile(m, profile, 1e-9) {
        return Err(Error::NotMps);
    }
    mps_profile(m, tol).ok_or(Error::NotMps)
}

fn check_c(c: f64) -> Result<()> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "c must be positive and finite, got {c}"
        )))
    }
}

/// Generalized δ-coupling with `ρ(k) = d² + c/k²`.
pub fn design_type_ii(
    m: &ComplexMatrix,
    profile: &MpsProfile,
    c: f64,
    sign: Branch,
    n: usize,
) -> Result<VertexCoupling> {
    check_c(c)?;
    let p = design_matrix(m, profile, n)?;
    let alpha = sign.value() * 2.0 * (c / p.weight(n)).sqrt().atan();
    from_spectral(alpha, PI, m, Tolerance::default())
}

/// Generalized δ′-coupling with `ρ(k) = d² + c·k²`.
pub fn design_type_iii(
    m: &ComplexMatrix,
    profile: &MpsProfile,
    c: f64,
    sign: Branch,
    n: usize,
) -> Result<VertexCoupling> {
    check_c(c)?;
    let p = design_matrix(m, profile, n)?;
    let cot_half = sign.value() * (c / p.weight(n)).sqrt();
    // β/2 ∈ (0, π) with the requested cotangent, then wrapped to (−π, π]
    let mut beta = 2.0 * 1.0_f64.atan2(cot_half);
    if beta > PI {
        beta -= 2.0 * PI;
    }
    from_spectral(0.0, beta, m, Tolerance::default())
}

/// Mixed coupling with mixing angle `xi` and factor `c`.
///
/// `T = tan(α/2)` solves `T² − uT − tan ξ = 0` with
/// `u = √((1 + tan²ξ)(d² + n − 1)/c)`; the root of larger modulus is used
/// and `tan(β/2) = tan ξ / T`.
pub fn design_type_iv(m: &ComplexMatrix, profile: &MpsProfile, xi: f64, c: f64, n: usize) -> Result<VertexCoupling> {
    check_c(c)?;
    let tan_xi = check_xi(xi)?;
    let p = design_matrix(m, profile, n)?;
    let interval = c_range(xi, p.d, n)?;
    if !interval.contains(c) {
        return Err(Error::COutOfRange { c, interval });
    }
    let u = ((1.0 + tan_xi * tan_xi) * p.weight(n) / c).sqrt();
    // rounding at the upper bound can push the discriminant slightly negative
    let disc = (u * u + 4.0 * tan_xi).max(0.0);
    let t = 0.5 * (u + disc.sqrt());
    let alpha = 2.0 * t.atan();
    let beta = 2.0 * (tan_xi / t).atan();
    from_spectral(alpha, beta, m, Tolerance::default())
}
