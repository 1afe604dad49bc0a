//! Permutation-symmetric (PS) and modularly permutation-symmetric (MPS)
//! matrices.
//!
//! An MPS matrix has a common diagonal modulus `r` and a common
//! off-diagonal modulus `t`; `d = r / t`. For Hermitian unitary MPS
//! matrices of order `n > 2`, `d ≤ n/2 − 1`. [`search_real_mps`] checks that
//! bound exhaustively over real sign patterns for small `n`.

use std::collections::HashSet;

use itertools::Itertools;
use rayon::prelude::*;

use crate::coupling::TwoEigSpectralForm;
use crate::error::{Error, Result};
use crate::numkernel::{all_ones, identity, ComplexMatrix, ComplexScalar, Tolerance};

/// Largest order accepted by [`search_real_mps`].
pub const MAX_SEARCH_ORDER: usize = 6;

/// Moduli of an MPS matrix: diagonal `r`, off-diagonal `t`, ratio `d = r/t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpsProfile {
    pub r: f64,
    pub t: f64,
    pub d: f64,
}

impl MpsProfile {
    /// Unit-row-norm profile with ratio `d`: `r² + (n−1)t² = 1`.
    pub fn from_ratio(d: f64, n: usize) -> Self {
        let t = 1.0 / (d * d + n as f64 - 1.0).sqrt();
        MpsProfile { r: d * t, t, d }
    }

    /// `d² + n − 1`, which equals `1/t²` for a unitary profile.
    pub fn weight(&self, n: usize) -> f64 {
        self.d * self.d + n as f64 - 1.0
    }
}

/// Shape of a matrix's entry moduli.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModulusPattern {
    /// Non-diagonal MPS matrix.
    Mps(MpsProfile),
    /// All off-diagonal entries vanish; diagonal moduli agree with `r`.
    Diagonal {
        r: f64,
    },
    NotMps,
}

/// Common diagonal and off-diagonal values, if `M` is PS at `tol`.
pub fn is_ps(m: &ComplexMatrix, tol: Tolerance) -> Option<(ComplexScalar, ComplexScalar)> {
    let n = m.order();
    if n < 2 {
        return None;
    }
    let r = m[(0, 0)];
    let t = m[(0, 1)];
    for j in 0..n {
        for l in 0..n {
            let want = if j == l { r } else { t };
            if (m[(j, l)] - want).norm() > tol.eps() {
                return None;
            }
        }
    }
    Some((r, t))
}

pub fn modulus_pattern(m: &ComplexMatrix, tol: Tolerance) -> ModulusPattern {
    let n = m.order();
    if n < 2 {
        return ModulusPattern::NotMps;
    }
    let r = m[(0, 0)].norm();
    let t = m[(0, 1)].norm();
    for j in 0..n {
        for l in 0..n {
            let want = if j == l { r } else { t };
            if (m[(j, l)].norm() - want).abs() > tol.eps() {
                return ModulusPattern::NotMps;
            }
        }
    }
    if t <= tol.eps() {
        ModulusPattern::Diagonal { r }
    } else {
        ModulusPattern::Mps(MpsProfile { r, t, d: r / t })
    }
}

/// Profile of a non-diagonal MPS matrix.
pub fn mps_profile(m: &ComplexMatrix, tol: Tolerance) -> Option<MpsProfile> {
    match modulus_pattern(m, tol) {
        ModulusPattern::Mps(p) => Some(p),
        _ => None,
    }
}

/// `sign · (−I + (2/n) J)`.
pub fn standard_m(n: usize, sign: i8) -> Result<ComplexMatrix> {
    if n < 2 {
        return Err(Error::InvalidOrder(n));
    }
    let s = if sign < 0 { -1.0 } else { 1.0 };
    let m = &all_ones(n)?.scale_real(2.0 / n as f64) - &identity(n)?;
    Ok(m.scale_real(s))
}

/// Upper bound on `d` for order `n`; infinite when `n ≤ 2`.
pub fn d_bound(n: usize) -> f64 {
    if n > 2 {
        n as f64 / 2.0 - 1.0
    } else {
        f64::INFINITY
    }
}

/// Signs of a real symmetric matrix: `diag_signs[j]` and the symmetric
/// `offdiag_signs[j][l]` (diagonal of the latter unused, stored as +1).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignMatrix {
    pub n: usize,
    pub diag_signs: Vec<i8>,
    pub offdiag_signs: Vec<Vec<i8>>,
}

impl SignMatrix {
    /// Real matrix with `±r` on the diagonal and `±t` elsewhere.
    pub fn realize(&self, profile: &MpsProfile) -> Result<ComplexMatrix> {
        ComplexMatrix::from_fn(self.n, |j, l| {
            let v = if j == l {
                self.diag_signs[j] as f64 * profile.r
            } else {
                self.offdiag_signs[j][l] as f64 * profile.t
            };
            ComplexScalar::new(v, 0.0)
        })
    }

    /// Sign pattern of a real matrix; zero entries get sign +1.
    pub fn of_real_matrix(m: &ComplexMatrix, tol: Tolerance) -> Option<Self> {
        let n = m.order();
        if m.as_slice().iter().any(|z| z.im.abs() > tol.eps()) {
            return None;
        }
        let sign = |x: f64| if x < -tol.eps() { -1 } else { 1 };
        let diag_signs = (0..n).map(|j| sign(m[(j, j)].re)).collect();
        let offdiag_signs = (0..n)
            .map(|j| (0..n).map(|l| if j == l { 1 } else { sign(m[(j, l)].re) }).collect())
            .collect();
        Some(SignMatrix {
            n,
            diag_signs,
            offdiag_signs,
        })
    }
}

/// Result of solving `M² = I` for one sign pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PatternSolution {
    /// A single admissible ratio `d`.
    Isolated(MpsProfile),
    /// Every `d ≥ 0` is admissible (only the order-2 pattern with opposite
    /// diagonal signs).
    Continuum,
}

impl PatternSolution {
    pub fn d(&self) -> Option<f64> {
        match self {
            PatternSolution::Isolated(p) => Some(p.d),
            PatternSolution::Continuum => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchHit {
    /// Canonical representative of the equivalence class. When `d = 0` the
    /// diagonal is irrelevant and stored as all +1.
    pub pattern: SignMatrix,
    pub solution: PatternSolution,
}

/// Number of free sign bits for order `n`: diagonal plus upper triangle.
fn pattern_bits(n: usize) -> usize {
    n + n * (n - 1) / 2
}

/// Dense sign table decoded from a bit pattern; bit set means −1.
struct Signs {
    n: usize,
    diag: Vec<i8>,
    off: Vec<i8>,
}

impl Signs {
    fn decode(n: usize, bits: u32) -> Self {
        let sign = |b: usize| if bits >> b & 1 == 1 { -1 } else { 1 };
        let diag = (0..n).map(sign).collect();
        let mut off = vec![1i8; n * n];
        let mut b = n;
        for j in 0..n {
            for l in j + 1..n {
                let s = sign(b);
                off[j * n + l] = s;
                off[l * n + j] = s;
                b += 1;
            }
        }
        Signs { n, diag, off }
    }

    /// Admissible ratio `d` from the off-diagonal entries of `M² = I`:
    /// `d (a_j + a_l) s_jl + Σ_{m≠j,l} s_jm s_ml = 0`.
    fn solve(&self, tol: f64) -> Option<Option<f64>> {
        let n = self.n;
        let mut d: Option<f64> = None;
        for j in 0..n {
            for l in j + 1..n {
                let sigma: i32 = (0..n)
                    .filter(|&m| m != j && m != l)
                    .map(|m| (self.off[j * n + m] * self.off[m * n + l]) as i32)
                    .sum();
                let diag_sum = (self.diag[j] + self.diag[l]) as i32;
                if diag_sum == 0 {
                    if sigma != 0 {
                        return None;
                    }
                    continue;
                }
                let cand = -(sigma as f64) / (diag_sum as f64 * self.off[j * n + l] as f64);
                if cand < -tol {
                    return None;
                }
                match d {
                    Some(prev) if (prev - cand).abs() > tol => return None,
                    Some(_) => {}
                    None => d = Some(cand.max(0.0)),
                }
            }
        }
        Some(d)
    }

    /// Orbit key: diagonal (zeroed when `d = 0`) then upper triangle.
    fn key(&self, zero_diag: bool, perm: &[usize], flip: i8) -> Vec<i8> {
        let n = self.n;
        // new[i][j] = old[perm[i]][perm[j]]
        let mut key = Vec::with_capacity(pattern_bits(n));
        for i in 0..n {
            key.push(if zero_diag { 0 } else { flip * self.diag[perm[i]] });
        }
        for i in 0..n {
            for j in i + 1..n {
                key.push(flip * self.off[perm[i] * n + perm[j]]);
            }
        }
        key
    }
}

fn sign_matrix_from_key(n: usize, key: &[i8]) -> SignMatrix {
    let diag_signs = key[..n].iter().map(|&s| if s == 0 { 1 } else { s }).collect();
    let mut offdiag_signs = vec![vec![1i8; n]; n];
    let mut b = n;
    for j in 0..n {
        for l in j + 1..n {
            offdiag_signs[j][l] = key[b];
            offdiag_signs[l][j] = key[b];
            b += 1;
        }
    }
    SignMatrix {
        n,
        diag_signs,
        offdiag_signs,
    }
}

/// Enumerates every real symmetric sign pattern of order `n` and keeps
/// those admitting `r, t` (with `t > 0`) such that the realized matrix
/// squares to the identity. Results are deduplicated up to simultaneous
/// row/column permutation and global sign flip, and sorted by `d`
/// descending, then by canonical pattern.
pub fn search_real_mps(n: usize, tol: Tolerance) -> Result<Vec<SearchHit>> {
    if n > MAX_SEARCH_ORDER {
        return Err(Error::OrderTooLarge {
            n,
            max: MAX_SEARCH_ORDER,
        });
    }
    if n < 2 {
        return Err(Error::InvalidOrder(n));
    }
    let total: u32 = 1 << pattern_bits(n);
    let eps = tol.eps();

    // contiguous chunks, filtered independently; order restored by index
    const CHUNK: u32 = 1 << 12;
    let chunks: Vec<(u32, u32)> = (0..total)
        .step_by(CHUNK as usize)
        .map(|lo| (lo, (lo + CHUNK).min(total)))
        .collect();
    let admissible: Vec<(u32, Option<f64>)> = chunks
        .into_par_iter()
        .map(|(lo, hi)| {
            (lo..hi)
                .filter_map(|bits| Signs::decode(n, bits).solve(eps).map(|d| (bits, d)))
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();

    let perms: Vec<Vec<usize>> = (0..n).permutations(n).collect();
    let identity_perm: Vec<usize> = (0..n).collect();
    let mut seen: HashSet<Vec<i8>> = HashSet::new();
    let mut hits: Vec<(Vec<i8>, PatternSolution)> = Vec::new();

    for (bits, d) in admissible {
        let signs = Signs::decode(n, bits);
        let zero_diag = matches!(d, Some(x) if x <= eps);
        if seen.contains(&signs.key(zero_diag, &identity_perm, 1)) {
            continue;
        }
        let mut canonical: Option<Vec<i8>> = None;
        for perm in &perms {
            for flip in [1i8, -1] {
                let key = signs.key(zero_diag, perm, flip);
                if canonical.as_ref().is_none_or(|c| key < *c) {
                    canonical = Some(key.clone());
                }
                seen.insert(key);
            }
        }
        let solution = match d {
            Some(x) => PatternSolution::Isolated(MpsProfile::from_ratio(if zero_diag { 0.0 } else { x }, n)),
            None => PatternSolution::Continuum,
        };
        hits.push((canonical.expect("at least one permutation"), solution));
    }

    hits.sort_by(|(ka, sa), (kb, sb)| {
        // continuum entries last, then d descending, then pattern
        let da = sa.d().unwrap_or(f64::NEG_INFINITY);
        let db = sb.d().unwrap_or(f64::NEG_INFINITY);
        db.total_cmp(&da).then_with(|| ka.cmp(kb))
    });
    Ok(hits
        .into_iter()
        .map(|(key, solution)| SearchHit {
            pattern: sign_matrix_from_key(n, &key),
            solution,
        })
        .collect())
}

/// Canonical form of a realized real MPS matrix under the same
/// equivalence used by [`search_real_mps`].
pub fn canonical_pattern(m: &ComplexMatrix, tol: Tolerance) -> Option<SignMatrix> {
    let profile = mps_profile(m, tol)?;
    let sm = SignMatrix::of_real_matrix(m, tol)?;
    let n = sm.n;
    let signs = Signs {
        n,
        diag: sm.diag_signs.clone(),
        off: sm.offdiag_signs.iter().flatten().copied().collect(),
    };
    let zero_diag = profile.d <= tol.eps();
    let key = (0..n)
        .permutations(n)
        .flat_map(|p| [signs.key(zero_diag, &p, 1), signs.key(zero_diag, &p, -1)])
        .min()?;
    Some(sign_matrix_from_key(n, &key))
}

/// True iff every isolated profile satisfies `d ≤ n/2 − 1` and one attains it.
pub fn verify_bound(n: usize, results: &[SearchHit]) -> bool {
    let bound = d_bound(n);
    let ds: Vec<f64> = results.iter().filter_map(|h| h.solution.d()).collect();
    let within = ds.iter().all(|&d| d <= bound + 1e-12);
    let attained = ds.iter().any(|&d| (d - bound).abs() <= 1e-12);
    n > 2 && within && attained
}

/// A two-eigenvalue coupling is equally transmitting iff its `M` is a
/// non-diagonal MPS matrix.
pub fn is_equally_transmitting(form: &TwoEigSpectralForm, tol: Tolerance) -> bool {
    !form.degenerate && mps_profile(&form.m, tol).is_some()
}
