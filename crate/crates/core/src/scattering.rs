//! Momentum-dependent scattering matrices.
//!
//! `S(k)` is evaluated two ways: by the general linear solve
//! `[(k−1)U + (k+1)I]⁻¹ [(k+1)U + (k−1)I]`, and, for two-eigenvalue
//! couplings, by the closed form `S(k) = μ(k) I + ν(k) M`. Both paths are
//! public; their agreement is checked in the test suites.

use num_complex::Complex64;

use crate::coupling::{TwoEigSpectralForm, VertexCoupling};
use crate::error::{Error, Result};
use crate::numkernel::{identity, solve_linear, ComplexMatrix, ComplexScalar, Tolerance};

/// Scattering matrix at one momentum together with its probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringResult {
    pub k: f64,
    pub s: ComplexMatrix,
    /// `|S_jj|²`
    pub reflections: Vec<f64>,
    /// `|S_jl|²` for `j ≠ l`, zero on the diagonal.
    pub transmissions: Vec<Vec<f64>>,
}

impl ScatteringResult {
    fn new(k: f64, s: ComplexMatrix) -> Self {
        let (reflections, transmissions) = probabilities(&s);
        ScatteringResult {
            k,
            s,
            reflections,
            transmissions,
        }
    }

    /// Largest deviation of a row's total probability from 1.
    pub fn conservation_defect(&self) -> f64 {
        self.reflections
            .iter()
            .zip(&self.transmissions)
            .map(|(r, row)| (r + row.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `ρ = |S_jj|² / |S_jl|²` for the given pair.
    pub fn rho(&self, j: usize, l: usize) -> f64 {
        self.reflections[j] / self.transmissions[j][l]
    }
}

/// Coefficients of `S(k) = μ I + ν M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuNu {
    pub mu: ComplexScalar,
    pub nu: ComplexScalar,
}

impl MuNu {
    /// `(|μ|² + |ν|² − 1, Re(μ ν̄))`, both zero for a unitary `S`.
    pub fn unitarity_defects(&self) -> (f64, f64) {
        (
            self.mu.norm_sqr() + self.nu.norm_sqr() - 1.0,
            (self.mu * self.nu.conj()).re,
        )
    }
}

fn check_momentum(k: f64) -> Result<()> {
    if k > 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidMomentum(k))
    }
}

/// `S(k)` by the general formula.
pub fn s_matrix_direct(coupling: &VertexCoupling, k: f64, tol: Tolerance) -> Result<ScatteringResult> {
    check_momentum(k)?;
    let u = coupling.u();
    let id = identity(u.order())?;
    let lhs = &u.scale_real(k - 1.0) + &id.scale_real(k + 1.0);
    let rhs = &u.scale_real(k + 1.0) + &id.scale_real(k - 1.0);
    let s = solve_linear(&lhs, &rhs, tol)?;
    Ok(ScatteringResult::new(k, s))
}

fn mu_nu_unchecked(alpha: f64, beta: f64, k: f64) -> MuNu {
    let (sa, ca) = (0.5 * alpha).sin_cos();
    let (sb, cb) = (0.5 * beta).sin_cos();
    let cc = ca * cb;
    let ss = sa * sb;
    let denom = Complex64::new(k * cc - ss / k, -(0.5 * (alpha + beta)).sin());
    MuNu {
        mu: Complex64::new(k * cc + ss / k, 0.0) / denom,
        nu: Complex64::new(0.0, (0.5 * (alpha - beta)).sin()) / denom,
    }
}

pub fn mu_nu(form: &TwoEigSpectralForm, k: f64) -> Result<MuNu> {
    check_momentum(k)?;
    if form.degenerate || form.alpha == form.beta {
        return Err(Error::DegenerateForm);
    }
    Ok(mu_nu_unchecked(form.alpha, form.beta, k))
}

/// `S(k)` from the spectral form; degenerate forms give a scalar matrix.
pub fn s_matrix_closed(form: &TwoEigSpectralForm, k: f64) -> Result<ScatteringResult> {
    check_momentum(k)?;
    let coeffs = mu_nu_unchecked(form.alpha, form.beta, k);
    let id = identity(form.degree())?;
    let s = &id.scale(coeffs.mu) + &form.m.scale(coeffs.nu);
    Ok(ScatteringResult::new(k, s))
}

/// Reflection probabilities `|S_jj|²` and transmission probabilities
/// `|S_jl|²` (diagonal of the latter set to zero).
pub fn probabilities(s: &ComplexMatrix) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = s.order();
    let reflections = (0..n).map(|j| s[(j, j)].norm_sqr()).collect();
    let transmissions = (0..n)
        .map(|j| {
            (0..n)
                .map(|l| if j == l { 0.0 } else { s[(j, l)].norm_sqr() })
                .collect()
        })
        .collect();
    (reflections, transmissions)
}

/// Off-diagonal modulus ratios `|S_jl| / |S_j'l'|` over a momentum grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioProfile {
    pub n: usize,
    pub reference: (usize, usize),
    pub grid: Vec<f64>,
    /// Indexed `[(j * n + l) * grid.len() + idx]`; diagonal slots are NaN.
    ratios: Vec<f64>,
}

impl RatioProfile {
    /// Ratio series for an off-diagonal pair, `None` on the diagonal.
    pub fn series(&self, j: usize, l: usize) -> Option<&[f64]> {
        if j == l || j >= self.n || l >= self.n {
            return None;
        }
        let g = self.grid.len();
        let start = (j * self.n + l) * g;
        Some(&self.ratios[start..start + g])
    }

    /// Population standard deviation of one pair's series.
    pub fn spread(&self, j: usize, l: usize) -> Option<f64> {
        let series = self.series(j, l)?;
        let mean = series.iter().sum::<f64>() / series.len() as f64;
        let var = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / series.len() as f64;
        Some(var.sqrt())
    }

    /// Largest spread over all off-diagonal pairs.
    pub fn max_spread(&self) -> f64 {
        (0..self.n)
            .flat_map(|j| (0..self.n).map(move |l| (j, l)))
            .filter_map(|(j, l)| self.spread(j, l))
            .fold(0.0, f64::max)
    }
}

/// Evaluates `|S(k)_jl| / |S(k)_ref|` for every off-diagonal pair on the grid.
pub fn transmission_ratio_profile(
    form: &TwoEigSpectralForm,
    k_grid: &[f64],
    reference: (usize, usize),
    tol: Tolerance,
) -> Result<RatioProfile> {
    let n = form.degree();
    let (rj, rl) = reference;
    if rj >= n || rl >= n || rj == rl {
        return Err(Error::InvalidParameter(format!(
            "reference pair ({rj}, {rl}) must be off-diagonal within order {n}"
        )));
    }
    if form.m[(rj, rl)].norm() <= tol.eps() {
        return Err(Error::ZeroReference { row: rj, col: rl });
    }
    let g = k_grid.len();
    let mut ratios = vec![f64::NAN; n * n * g];
    for (idx, &k) in k_grid.iter().enumerate() {
        let s = s_matrix_closed(form, k)?.s;
        let denom = s[(rj, rl)].norm();
        for j in 0..n {
            for l in 0..n {
                if j != l {
                    ratios[(j * n + l) * g + idx] = s[(j, l)].norm() / denom;
                }
            }
        }
    }
    Ok(RatioProfile {
        n,
        reference,
        grid: k_grid.to_vec(),
        ratios,
    })
}

/// Off-diagonal entry of largest modulus in `M`; a natural reference pair.
pub fn strongest_offdiagonal(m: &ComplexMatrix) -> Option<(usize, usize)> {
    let n = m.order();
    (0..n)
        .flat_map(|j| (0..n).map(move |l| (j, l)))
        .filter(|(j, l)| j != l)
        .reduce(|best, cur| if m[cur].norm() > m[best].norm() { cur } else { best })
}

/// Momentum grid, ascending.
pub fn momentum_grid(k_min: f64, k_max: f64, points: usize, log_spacing: bool) -> Result<Vec<f64>> {
    if !(k_min > 0.0 && k_min < k_max && k_max.is_finite()) {
        return Err(Error::InvalidGrid(format!(
            "need 0 < k_min < k_max, got [{k_min}, {k_max}]"
        )));
    }
    if points < 2 {
        return Err(Error::InvalidGrid(format!("need at least 2 points, got {points}")));
    }
    let last = (points - 1) as f64;
    let grid = if log_spacing {
        let (lo, hi) = (k_min.ln(), k_max.ln());
        (0..points)
            .map(|i| (lo + (hi - lo) * i as f64 / last).exp())
            .collect::<Vec<_>>()
    } else {
        (0..points).map(|i| k_min + (k_max - k_min) * i as f64 / last).collect()
    };
    // pin the endpoints exactly
    let mut grid = grid;
    grid[0] = k_min;
    grid[points - 1] = k_max;
    Ok(grid)
}

/// 61 log-spaced points on [0.01, 100].
pub fn default_grid() -> Vec<f64> {
    momentum_grid(1e-2, 1e2, 61, true).expect("static grid is valid")
}
