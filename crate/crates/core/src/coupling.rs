//! Vertex couplings given by a unitary `U`, and their two-eigenvalue
//! spectral form `U = e^{i(α+β)/2}(cos((α−β)/2) I + i sin((α−β)/2) M)`
//! with `M` Hermitian unitary.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numkernel::{
    all_ones, frobenius_inner, identity, is_diagonal, is_hermitian, is_unitary, ComplexMatrix, ComplexScalar, Tolerance,
};

/// Phases within this distance of 0 or π are snapped onto them.
pub const PHASE_SNAP: f64 = 1e-9;

/// A vertex of degree `n` with its boundary-condition matrix `U`.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexCoupling {
    u: ComplexMatrix,
}

impl VertexCoupling {
    /// Fails with [`Error::NotUnitary`] unless `U` is unitary at `tol`.
    pub fn new(u: ComplexMatrix, tol: Tolerance) -> Result<Self> {
        let deviation = u.unitarity_defect();
        if deviation > tol.eps() {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(VertexCoupling { u })
    }

    pub fn degree(&self) -> usize {
        self.u.order()
    }

    pub fn u(&self) -> &ComplexMatrix {
        &self.u
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.u
    }
}

/// Eigenphases `alpha`, `beta` and the Hermitian unitary `M = 2P − I`,
/// where `P` projects onto the `e^{iα}` eigenspace.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoEigSpectralForm {
    pub alpha: f64,
    pub beta: f64,
    pub m: ComplexMatrix,
    /// Rank of the projector onto the `e^{iα}` eigenspace.
    pub multiplicity_p: usize,
    /// `U` is a scalar multiple of the identity; `M = I` and `beta = alpha`.
    pub degenerate: bool,
}

impl TwoEigSpectralForm {
    pub fn degree(&self) -> usize {
        self.m.order()
    }

    /// `P = (M + I)/2`
    pub fn projector(&self) -> ComplexMatrix {
        let n = self.m.order();
        (&self.m + &identity(n).expect("order already validated")).scale_real(0.5)
    }

    pub fn to_coupling(&self, tol: Tolerance) -> Result<VertexCoupling> {
        from_spectral(self.alpha, self.beta, &self.m, tol)
    }
}

/// Least-squares fit of `U² ≈ s·U + t·I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosureFit {
    pub s: ComplexScalar,
    pub t: ComplexScalar,
    /// `‖U² − sU − tI‖_F` at the optimum.
    pub residual: f64,
}

fn hermitian_unitary_check(m: &ComplexMatrix, tol: Tolerance) -> bool {
    is_hermitian(m, tol) && is_unitary(m, tol)
}

fn in_phase_range(x: f64) -> bool {
    x.is_finite() && x > -PI && x <= PI
}

/// Builds `U` from the spectral form.
pub fn from_spectral(alpha: f64, beta: f64, m: &ComplexMatrix, tol: Tolerance) -> Result<VertexCoupling> {
    if !in_phase_range(alpha) || !in_phase_range(beta) {
        return Err(Error::InvalidParameter(format!(
            "phases must lie in (-pi, pi], got alpha = {alpha}, beta = {beta}"
        )));
    }
    if !hermitian_unitary_check(m, tol) {
        return Err(Error::NotHermitianUnitary);
    }
    let n = m.order();
    let half_diff = 0.5 * (alpha - beta);
    let global = Complex64::from_polar(1.0, 0.5 * (alpha + beta));
    let id = identity(n)?;
    let inner = &id.scale_real(half_diff.cos()) + &m.scale(Complex64::new(0.0, half_diff.sin()));
    VertexCoupling::new(inner.scale(global), tol)
}

/// Returns the common diagonal value when `U` is `λ·I` at `tol`.
fn scalar_value(u: &ComplexMatrix, tol: Tolerance) -> Option<ComplexScalar> {
    let lambda = u[(0, 0)];
    let n = u.order();
    let scalar = identity(n).ok()?.scale(lambda);
    (u.max_abs_diff(&scalar) <= tol.eps()).then_some(lambda)
}

/// The fit done on `V = U − λ₀I` with `λ₀ = tr U / n`, where the Gram
/// matrix of `{V, I}` is diagonal.
struct CenteredFit {
    shift: ComplexScalar,
    s: ComplexScalar,
    t: ComplexScalar,
    residual: f64,
}

fn centered_fit(u: &ComplexMatrix, tol: Tolerance) -> Result<CenteredFit> {
    if scalar_value(u, tol).is_some() {
        return Err(Error::DegenerateGram);
    }
    let n = u.order();
    let id = identity(n)?;
    let shift = u.trace() / n as f64;
    let v = u - &id.scale(shift);
    let v2 = &v * &v;
    let g11 = frobenius_inner(&v, &v)?.re;
    if g11 <= tol.eps() * tol.eps() * n as f64 {
        return Err(Error::DegenerateGram);
    }
    let s = frobenius_inner(&v, &v2)? / g11;
    let t = v2.trace() / n as f64;
    let residual = (&(&v2 - &v.scale(s)) - &id.scale(t)).frobenius_norm();
    Ok(CenteredFit { shift, s, t, residual })
}

/// Fits `U² ≈ s·U + t·I` in the Frobenius inner product.
pub fn quadratic_closure_fit(u: &ComplexMatrix, tol: Tolerance) -> Result<ClosureFit> {
    let fit = centered_fit(u, tol)?;
    let l = fit.shift;
    Ok(ClosureFit {
        s: fit.s + l * 2.0,
        t: fit.t - l * fit.s - l * l,
        residual: fit.residual,
    })
}

/// Wraps a phase into (−π, π] and snaps it to 0 or π within [`PHASE_SNAP`].
pub fn snap_phase(phase: f64) -> f64 {
    let mut p = phase;
    if p <= -PI {
        p += 2.0 * PI;
    } else if p > PI {
        p -= 2.0 * PI;
    }
    if p.abs() <= PHASE_SNAP {
        0.0
    } else if PI - p.abs() <= PHASE_SNAP {
        PI
    } else {
        p
    }
}

/// Orders a phase pair so that `|first| ≤ |second|`, ties by value.
fn canonical_order(a: f64, b: f64) -> bool {
    a.abs() < b.abs() || (a.abs() == b.abs() && a <= b)
}

fn projector_rank(m: &ComplexMatrix, tol: Tolerance) -> Result<usize> {
    let n = m.order();
    let trace_p = 0.5 * (m.trace().re + n as f64);
    let rounded = trace_p.round();
    if (trace_p - rounded).abs() > tol.eps() * n as f64 || rounded < 0.0 {
        return Err(Error::NumericalInconsistency(format!(
            "projector trace {trace_p} is not an integer"
        )));
    }
    Ok(rounded as usize)
}

/// Newton–Schulz iteration towards the nearest Hermitian involution.
fn polish_involution(m: ComplexMatrix) -> ComplexMatrix {
    let mut m = (&m + &m.adjoint()).scale_real(0.5);
    let mut defect = m.unitarity_defect();
    for _ in 0..8 {
        let m3 = &(&m * &m) * &m;
        let next = (&m.scale_real(3.0) - &m3).scale_real(0.5);
        let next = (&next + &next.adjoint()).scale_real(0.5);
        let d = next.unitarity_defect();
        if d >= defect {
            break;
        }
        m = next;
        defect = d;
    }
    m
}

/// `tr(U P) / tr(P)`, normalized onto the unit circle.
fn rayleigh(u: &ComplexMatrix, p: &ComplexMatrix) -> Option<ComplexScalar> {
    let z = (u * p).trace() / p.trace();
    (z.is_finite() && z.norm() > 0.5).then(|| z / z.norm())
}

/// Recovers `(α, β, M)` from a coupling whose `U` has at most two eigenvalues.
pub fn decompose(coupling: &VertexCoupling, tol: Tolerance) -> Result<TwoEigSpectralForm> {
    let u = coupling.u();
    let n = u.order();

    if let Some(lambda) = scalar_value(u, tol) {
        let alpha = snap_phase(lambda.arg());
        return Ok(TwoEigSpectralForm {
            alpha,
            beta: alpha,
            m: identity(n)?,
            multiplicity_p: n,
            degenerate: true,
        });
    }

    let fit = centered_fit(u, tol)?;
    if fit.residual > tol.eps() * n as f64 {
        return Err(Error::MoreThanTwoEigenvalues { residual: fit.residual });
    }

    // roots of w² − s w − t = 0, shifted back by λ₀
    let disc = (fit.s * fit.s + fit.t * 4.0).sqrt();
    let z1 = fit.shift + (fit.s + disc) * 0.5;
    let z2 = fit.shift + (fit.s - disc) * 0.5;
    for z in [z1, z2] {
        if (z.norm() - 1.0).abs() > 10.0 * tol.eps() {
            return Err(Error::NumericalInconsistency(format!(
                "eigenvalue {z} is off the unit circle"
            )));
        }
    }

    let (ea, eb) = if canonical_order(snap_phase(z1.arg()), snap_phase(z2.arg())) {
        (z1, z2)
    } else {
        (z2, z1)
    };
    let id = identity(n)?;
    let p = (u - &id.scale(eb)).scale((ea - eb).inv());
    let m = &p.scale_real(2.0) - &id;
    if !hermitian_unitary_check(&m, tol) {
        return Err(Error::NumericalInconsistency(
            "recovered M is not Hermitian unitary".into(),
        ));
    }
    let m = polish_involution(m);
    let multiplicity_p = projector_rank(&m, tol)?;
    let p = (&m + &id).scale_real(0.5);
    let q = &id - &p;
    let (ea, eb) = (rayleigh(u, &p).unwrap_or(ea), rayleigh(u, &q).unwrap_or(eb));

    Ok(TwoEigSpectralForm {
        alpha: snap_phase(ea.arg()),
        beta: snap_phase(eb.arg()),
        m,
        multiplicity_p,
        degenerate: false,
    })
}

/// `U = a·I + b·J`, checked for unitarity via `|a| = |a + n b| = 1`.
pub fn from_ps(a: ComplexScalar, b: ComplexScalar, n: usize, tol: Tolerance) -> Result<VertexCoupling> {
    let a_nb = a + b * n as f64;
    if (a.norm() - 1.0).abs() > tol.eps() || (a_nb.norm() - 1.0).abs() > tol.eps() {
        return Err(Error::NotUnitaryPs {
            a: a.to_string(),
            a_nb: a_nb.to_string(),
        });
    }
    let u = &identity(n)?.scale(a) + &all_ones(n)?.scale(b);
    VertexCoupling::new(u, tol)
}

/// The classical permutation-symmetric couplings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassicalKind {
    Free,
    /// δ-coupling with strength γ.
    Delta,
    /// δ′ₛ-coupling with strength γ′.
    DeltaPrimeS,
    /// δ′-coupling with strength γ′.
    DeltaPrime,
    /// δ_p-coupling with strength γ.
    DeltaP,
}

impl ClassicalKind {
    pub const ALL: [ClassicalKind; 5] = [
        ClassicalKind::Free,
        ClassicalKind::Delta,
        ClassicalKind::DeltaPrimeS,
        ClassicalKind::DeltaPrime,
        ClassicalKind::DeltaP,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassicalKind::Free => "Free",
            ClassicalKind::Delta => "Delta",
            ClassicalKind::DeltaPrimeS => "DeltaPrimeS",
            ClassicalKind::DeltaPrime => "DeltaPrime",
            ClassicalKind::DeltaP => "DeltaP",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name().eq_ignore_ascii_case(name))
    }

    /// Coefficients `(a, b)` of `U = aI + bJ`.
    pub fn coefficients(self, param: f64, n: usize) -> (ComplexScalar, ComplexScalar) {
        let nf = n as f64;
        let one = Complex64::new(1.0, 0.0);
        let n_plus = Complex64::new(nf, param);
        let n_minus = Complex64::new(nf, -param);
        match self {
            ClassicalKind::Free => (-one, Complex64::new(2.0 / nf, 0.0)),
            ClassicalKind::Delta => (-one, 2.0 / n_plus),
            ClassicalKind::DeltaPrimeS => (one, -2.0 / n_minus),
            ClassicalKind::DeltaPrime => (-n_plus / n_minus, 2.0 / n_minus),
            ClassicalKind::DeltaP => (n_minus / n_plus, -2.0 / n_plus),
        }
    }
}

/// Builds a classical coupling; `param` is ignored for [`ClassicalKind::Free`].
pub fn classical_coupling(kind: ClassicalKind, param: f64, n: usize) -> Result<VertexCoupling> {
    if n < 2 {
        return Err(Error::InvalidOrder(n));
    }
    if !param.is_finite() {
        return Err(Error::InvalidParameter(format!("coupling parameter {param}")));
    }
    let (a, b) = kind.coefficients(param, n);
    from_ps(a, b, n, Tolerance::default())
}

pub fn is_decoupled(coupling: &VertexCoupling, tol: Tolerance) -> bool {
    is_diagonal(coupling.u(), tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> ComplexScalar {
        ComplexScalar::new(re, im)
    }

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    /// (2/3)J − I
    fn m_plus3() -> ComplexMatrix {
        &all_ones(3).unwrap().scale_real(2.0 / 3.0) - &identity(3).unwrap()
    }

    fn delta3() -> ComplexMatrix {
        &identity(3).unwrap().scale_real(-1.0) + &all_ones(3).unwrap().scale(2.0 / c(3.0, 3.0))
    }

    #[test]
    fn from_spectral_examples() {
        let m = m_plus3().scale_real(-1.0);
        let u = from_spectral(0.0, PI, &m, tol()).unwrap();
        assert!(u.u().max_abs_diff(&m) < 1e-15);

        let u = from_spectral(0.0, 0.0, &m, tol()).unwrap();
        assert!(u.u().max_abs_diff(&identity(3).unwrap()) < 1e-15);

        let u = from_spectral(-PI / 2.0, PI, &m_plus3(), tol()).unwrap();
        assert!(u.u().max_abs_diff(&delta3()) < 1e-15);
    }

    #[test]
    fn from_spectral_rejects_bad_m() {
        let bad = all_ones(3).unwrap();
        assert_eq!(from_spectral(0.1, 0.2, &bad, tol()), Err(Error::NotHermitianUnitary));
    }

    #[test]
    fn closure_fit_examples() {
        let u = ComplexMatrix::from_diagonal(&[c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        let fit = quadratic_closure_fit(&u, tol()).unwrap();
        assert!(fit.s.norm() < 1e-15 && (fit.t - 1.0).norm() < 1e-15 && fit.residual < 1e-15);

        let fit = quadratic_closure_fit(&m_plus3(), tol()).unwrap();
        assert!(fit.s.norm() < 1e-14 && (fit.t - 1.0).norm() < 1e-14 && fit.residual < 1e-14);

        let u = ComplexMatrix::from_diagonal(&[c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)]).unwrap();
        let fit = quadratic_closure_fit(&u, tol()).unwrap();
        assert!(fit.residual > 0.1, "residual {}", fit.residual);
    }

    #[test]
    fn closure_fit_rejects_scalar() {
        let u = identity(3).unwrap().scale(c(0.0, 1.0));
        assert_eq!(quadratic_closure_fit(&u, tol()), Err(Error::DegenerateGram));
    }

    #[test]
    fn decompose_free() {
        let coupling = VertexCoupling::new(m_plus3(), tol()).unwrap();
        let form = decompose(&coupling, tol()).unwrap();
        assert_eq!((form.alpha, form.beta), (0.0, PI));
        assert!(form.m.max_abs_diff(&m_plus3()) < 1e-14);
        assert_eq!(form.multiplicity_p, 1);
        assert!(!form.degenerate);
    }

    #[test]
    fn decompose_delta() {
        let coupling = VertexCoupling::new(delta3(), tol()).unwrap();
        let form = decompose(&coupling, tol()).unwrap();
        assert!((form.alpha + PI / 2.0).abs() < 1e-14);
        assert_eq!(form.beta, PI);
        assert!(form.m.max_abs_diff(&m_plus3()) < 1e-14);
        assert_eq!(form.multiplicity_p, 1);
    }

    #[test]
    fn decompose_scalar() {
        let u = identity(2).unwrap().scale(Complex64::from_polar(1.0, PI / 4.0));
        let form = decompose(&VertexCoupling::new(u, tol()).unwrap(), tol()).unwrap();
        assert!(form.degenerate);
        assert!((form.alpha - PI / 4.0).abs() < 1e-15);
        assert_eq!(form.alpha, form.beta);
        assert_eq!(form.m, identity(2).unwrap());
    }

    #[test]
    fn decompose_rejects_three_eigenvalues() {
        let u =
            ComplexMatrix::from_diagonal(&[c(1.0, 0.0), Complex64::from_polar(1.0, PI / 3.0), c(-1.0, 0.0)]).unwrap();
        let err = decompose(&VertexCoupling::new(u, tol()).unwrap(), tol()).unwrap_err();
        assert!(matches!(err, Error::MoreThanTwoEigenvalues { residual } if residual > 0.1));
    }

    #[test]
    fn ps_examples() {
        let free = from_ps(c(-1.0, 0.0), c(2.0 / 3.0, 0.0), 3, tol()).unwrap();
        assert!(free.u().max_abs_diff(&m_plus3()) < 1e-15);
        let delta = from_ps(c(-1.0, 0.0), 2.0 / c(3.0, 1.0), 3, tol()).unwrap();
        assert!(
            delta
                .u()
                .max_abs_diff(&classical_coupling(ClassicalKind::Delta, 1.0, 3).unwrap().into_matrix())
                < 1e-15
        );
        let dec = from_ps(c(1.0, 0.0), c(0.0, 0.0), 4, tol()).unwrap();
        assert_eq!(dec.u(), &identity(4).unwrap());
        assert!(matches!(
            from_ps(c(1.0, 0.0), c(1.0, 0.0), 3, tol()),
            Err(Error::NotUnitaryPs { .. })
        ));
    }

    #[test]
    fn classical_examples() {
        let free = classical_coupling(ClassicalKind::Free, 0.0, 3).unwrap();
        let d0 = classical_coupling(ClassicalKind::Delta, 0.0, 3).unwrap();
        assert!(d0.u().max_abs_diff(free.u()) < 1e-15);
        let dp0 = classical_coupling(ClassicalKind::DeltaPrime, 0.0, 3).unwrap();
        assert!(dp0.u().max_abs_diff(free.u()) < 1e-15);

        // σ(aI + bJ) = {a, a + n b}
        let (a, b) = ClassicalKind::Delta.coefficients(3.0, 3);
        assert!((a - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((a + b * 3.0 - c(0.0, -1.0)).norm() < 1e-15);
        assert!(classical_coupling(ClassicalKind::Free, 0.0, 1).is_err());
    }

    #[test]
    fn decoupled() {
        assert!(is_decoupled(
            &VertexCoupling::new(identity(3).unwrap(), tol()).unwrap(),
            tol()
        ));
        let u = ComplexMatrix::from_diagonal(&[c(0.0, 1.0), c(-1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(is_decoupled(&VertexCoupling::new(u, tol()).unwrap(), tol()));
        assert!(!is_decoupled(
            &classical_coupling(ClassicalKind::Free, 0.0, 3).unwrap(),
            tol()
        ));
    }

    #[test]
    fn non_unitary_rejected() {
        assert!(matches!(
            VertexCoupling::new(all_ones(2).unwrap(), tol()),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn snapping() {
        assert_eq!(snap_phase(5e-10), 0.0);
        assert_eq!(snap_phase(-PI), PI);
        assert_eq!(snap_phase(PI - 1e-10), PI);
        assert_eq!(snap_phase(-PI + 1e-10), PI);
        assert_eq!(snap_phase(0.3), 0.3);
    }
}
