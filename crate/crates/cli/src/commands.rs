use std::fmt::Write as _;

use qgvertex::classify::{classify, design_type_ii, design_type_iii, design_type_iv, rho_curve, Branch};
use qgvertex::coupling::{decompose, quadratic_closure_fit, PHASE_SNAP};
use qgvertex::mps::{
    d_bound, is_equally_transmitting, mps_profile, search_real_mps, standard_m, verify_bound, PatternSolution,
};
use qgvertex::numkernel::{is_diagonal, is_hermitian};
use qgvertex::scattering::{
    mu_nu, s_matrix_closed, s_matrix_direct, strongest_offdiagonal, transmission_ratio_profile,
};
use qgvertex::{ComplexMatrix, CouplingClass, Error, Tolerance, TwoEigSpectralForm, VertexCoupling};
use serde::Serialize;
use serde_json::{json, Value};

use crate::input::{matrix_to_pairs, PairRows, RawCoupling};
use crate::Failure;

#[derive(Debug, Serialize)]
pub struct ClassifyReport {
    pub n: usize,
    pub class: &'static str,
    pub alpha: f64,
    pub beta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_prime: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    pub equally_transmitting: bool,
    pub residual: f64,
    pub phase_snap: f64,
}

fn closure_residual(coupling: &VertexCoupling, tol: Tolerance) -> f64 {
    quadratic_closure_fit(coupling.u(), tol).map_or(0.0, |fit| fit.residual)
}

pub fn decompose_coupling(coupling: &VertexCoupling, tol: Tolerance) -> Result<TwoEigSpectralForm, Failure> {
    decompose(coupling, tol).map_err(Failure::from)
}

pub fn classify_report(coupling: &VertexCoupling, tol: Tolerance) -> Result<ClassifyReport, Failure> {
    let n = coupling.degree();
    let form = decompose_coupling(coupling, tol)?;
    let class = classify(&form, is_diagonal(coupling.u(), tol), n, tol);
    let (mut gamma, mut gamma_prime, mut xi) = (None, None, None);
    match class {
        CouplingClass::GeneralizedDelta { gamma: g, .. } => gamma = Some(g),
        CouplingClass::GeneralizedDeltaPrime { gamma_prime: g, .. } => gamma_prime = Some(g),
        CouplingClass::Mixed { xi: x, .. } => xi = Some(x),
        _ => {}
    }
    let d = if form.degenerate {
        None
    } else {
        mps_profile(&form.m, tol).map(|p| p.d)
    };
    Ok(ClassifyReport {
        n,
        class: class.tag(),
        alpha: form.alpha,
        beta: form.beta,
        gamma,
        gamma_prime,
        xi,
        c: class.c(),
        d,
        equally_transmitting: is_equally_transmitting(&form, tol),
        residual: closure_residual(coupling, tol),
        phase_snap: PHASE_SNAP,
    })
}

pub fn cmd_classify(raw: &RawCoupling, tol: Tolerance) -> Result<String, Failure> {
    let coupling = raw.build(tol)?;
    let report = classify_report(&coupling, tol)?;
    Ok(to_json(&report))
}

/// Fifteen significant digits.
fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.14e}")
    } else {
        format!("{x}")
    }
}

pub fn cmd_scatter(raw: &RawCoupling, grid: &[f64], tol: Tolerance) -> Result<String, Failure> {
    let coupling = raw.build(tol)?;
    let n = coupling.degree();
    let mut out = String::from("k");
    for j in 1..=n {
        write!(out, ",R_{j}").unwrap();
    }
    for j in 1..=n {
        for l in (1..=n).filter(|&l| l != j) {
            write!(out, ",T_{j}_{l}").unwrap();
        }
    }
    if n > 1 {
        out.push_str(",rho");
    }
    out.push_str(",unitarity_residual\n");

    for &k in grid {
        let res = s_matrix_direct(&coupling, k, tol)?;
        out.push_str(&num(k));
        for r in &res.reflections {
            write!(out, ",{}", num(*r)).unwrap();
        }
        for j in 0..n {
            for l in (0..n).filter(|&l| l != j) {
                write!(out, ",{}", num(res.transmissions[j][l])).unwrap();
            }
        }
        if n > 1 {
            write!(out, ",{}", num(res.rho(0, 1))).unwrap();
        }
        writeln!(out, ",{}", num(res.s.unitarity_defect())).unwrap();
    }
    Ok(out)
}

fn not_equally_transmitting() -> Failure {
    Failure::domain(
        5,
        "coupling is not equally transmitting".into(),
        json!({ "error": "NotEquallyTransmitting" }),
    )
}

pub fn cmd_rho(raw: &RawCoupling, grid: &[f64], tol: Tolerance) -> Result<String, Failure> {
    let coupling = raw.build(tol)?;
    let n = coupling.degree();
    let form = decompose_coupling(&coupling, tol)?;
    if form.degenerate || !is_equally_transmitting(&form, tol) {
        return Err(not_equally_transmitting());
    }
    let profile = mps_profile(&form.m, tol).ok_or_else(not_equally_transmitting)?;
    let curve = rho_curve(&form, &profile, n).map_err(|_| not_equally_transmitting())?;

    let mut out = String::from("k,rho_closed,rho_sampled,abs_diff\n");
    for &k in grid {
        let closed = curve.evaluate(k);
        let sampled = s_matrix_direct(&coupling, k, tol)?.rho(0, 1);
        writeln!(
            out,
            "{},{},{},{}",
            num(k),
            num(closed),
            num(sampled),
            num((closed - sampled).abs())
        )
        .unwrap();
    }
    Ok(out)
}

#[allow(clippy::upper_case_acronyms)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum DesignType {
    #[value(name = "II")]
    II,
    #[value(name = "III")]
    III,
    #[value(name = "IV")]
    IV,
}

pub struct DesignRequest {
    pub kind: DesignType,
    pub m: ComplexMatrix,
    pub c: f64,
    pub xi: Option<f64>,
    pub sign: f64,
}

#[derive(Debug, Serialize)]
struct SpectralBlock {
    alpha: f64,
    beta: f64,
    #[serde(rename = "M")]
    m: PairRows,
}

#[derive(Debug, Serialize)]
struct DesignOutput {
    n: usize,
    #[serde(rename = "U")]
    u: PairRows,
    spectral: SpectralBlock,
    report: ClassifyReport,
}

fn map_design_error(err: Error) -> Failure {
    match err {
        Error::COutOfRange { c, interval } => Failure::domain(
            6,
            format!("c = {c} is outside the admissible interval {interval}"),
            json!({ "error": "COutOfRange", "c": c, "interval": interval.to_string(), "upper": interval.upper }),
        ),
        Error::NotMps => Failure::domain(
            5,
            "M is not a non-diagonal MPS Hermitian unitary matrix".into(),
            json!({ "error": "NotEquallyTransmitting" }),
        ),
        other => other.into(),
    }
}

pub fn cmd_design(req: &DesignRequest, tol: Tolerance) -> Result<String, Failure> {
    let m = &req.m;
    let n = m.order();
    let profile = mps_profile(m, tol).ok_or_else(|| map_design_error(Error::NotMps))?;
    let sign = Branch::from_sign(req.sign);
    let (coupling, want) = match req.kind {
        DesignType::II => (design_type_ii(m, &profile, req.c, sign, n), "TypeII"),
        DesignType::III => (design_type_iii(m, &profile, req.c, sign, n), "TypeIII"),
        DesignType::IV => {
            let xi = req
                .xi
                .ok_or_else(|| Failure::parse("type IV needs --xi or --tan-xi".into()))?;
            (design_type_iv(m, &profile, xi, req.c, n), "TypeIV")
        }
    };
    let coupling = coupling.map_err(map_design_error)?;

    let report = classify_report(&coupling, tol)?;
    let c_ok = report.c.is_some_and(|c| (c - req.c).abs() <= 1e-9 * req.c.max(1.0));
    let xi_ok = match (req.kind, req.xi, report.xi) {
        (DesignType::IV, Some(want_xi), Some(got)) => (got - want_xi).abs() <= 1e-9,
        (DesignType::IV, ..) => false,
        _ => true,
    };
    if report.class != want || !c_ok || !xi_ok {
        return Err(Failure::internal(format!(
            "designed coupling re-classified as {} with c = {:?}, expected {want} with c = {}",
            report.class, report.c, req.c
        )));
    }

    let form = decompose_coupling(&coupling, tol)?;
    let output = DesignOutput {
        n,
        u: matrix_to_pairs(coupling.u()),
        spectral: SpectralBlock {
            alpha: form.alpha,
            beta: form.beta,
            m: matrix_to_pairs(&form.m),
        },
        report,
    };
    Ok(to_json(&output))
}

pub fn cmd_search_mps(n: usize, tol: Tolerance) -> Result<String, Failure> {
    let hits = search_real_mps(n, tol).map_err(|e| match e {
        Error::OrderTooLarge { n, max } => Failure::domain(
            7,
            format!("order {n} is too large for exhaustive search (max {max})"),
            json!({ "error": "OrderTooLarge", "n": n, "max": max }),
        ),
        other => other.into(),
    })?;
    let entries: Vec<Value> = hits
        .iter()
        .map(|hit| {
            let signs: Vec<Vec<i8>> = (0..n)
                .map(|j| {
                    (0..n)
                        .map(|l| {
                            if j == l {
                                hit.pattern.diag_signs[j]
                            } else {
                                hit.pattern.offdiag_signs[j][l]
                            }
                        })
                        .collect()
                })
                .collect();
            match hit.solution {
                PatternSolution::Isolated(p) => json!({
                    "solution": "isolated",
                    "d": p.d,
                    "r": p.r,
                    "t": p.t,
                    "signs": signs,
                }),
                PatternSolution::Continuum => json!({
                    "solution": "continuum",
                    "signs": signs,
                }),
            }
        })
        .collect();

    let catalog = if n > 2 {
        json!({
            "n": n,
            "count": entries.len(),
            "d_bound": d_bound(n),
            "bound_verdict": verify_bound(n, &hits),
            "entries": entries,
        })
    } else {
        json!({
            "n": n,
            "count": entries.len(),
            "d_bound": null,
            "bound_verdict": null,
            "exemption": "n = 2 is exempt from the bound d <= n/2 - 1, which holds only for n > 2",
            "entries": entries,
        })
    };
    Ok(to_json(&catalog))
}

#[derive(Debug, Serialize)]
struct Check {
    name: &'static str,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
}

impl Check {
    fn measured(name: &'static str, value: f64, threshold: f64) -> Self {
        Check {
            name,
            status: if value <= threshold { "pass" } else { "fail" },
            value: Some(value),
            threshold: Some(threshold),
            reason: None,
        }
    }

    fn skipped(name: &'static str, reason: impl Into<String>) -> Self {
        Check {
            name,
            status: "skipped",
            value: None,
            threshold: None,
            reason: Some(reason.into()),
        }
    }

    fn failed(name: &'static str, reason: impl Into<String>) -> Self {
        Check {
            name,
            status: "fail",
            value: None,
            threshold: None,
            reason: Some(reason.into()),
        }
    }
}

const LATER_CHECKS: [&str; 7] = [
    "s_at_one",
    "s_unitarity",
    "probability_conservation",
    "formula_equivalence",
    "mu_nu_identities",
    "ratio_constancy",
    "scale_invariance",
];

fn verify_checks(raw: &RawCoupling, grid: &[f64], tol: Tolerance) -> (Vec<Check>, bool) {
    let mut checks = Vec::new();
    let input_defect = match raw {
        RawCoupling::Matrix(u) => Some(("input_unitarity", u.unitarity_defect())),
        RawCoupling::Spectral { m, .. } => Some((
            "input_hermitian_unitary",
            m.unitarity_defect().max(m.hermiticity_defect()),
        )),
        RawCoupling::Table { .. } => None,
    };
    if let Some((name, defect)) = input_defect {
        checks.push(Check::measured(name, defect, tol.eps()));
    }
    let coupling = match raw.build(tol) {
        Ok(c) => c,
        Err(e) => {
            if input_defect.is_none() {
                checks.push(Check::failed("input", e.message()));
            }
            for name in LATER_CHECKS {
                checks.push(Check::skipped(name, "input is not a valid coupling"));
            }
            return (checks, false);
        }
    };
    let u = coupling.u();
    let hermitian = is_hermitian(u, tol);

    let s_one = s_matrix_direct(&coupling, 1.0, tol).map(|r| r.s.max_abs_diff(u));
    checks.push(match s_one {
        Ok(v) => Check::measured("s_at_one", v, 1e-12),
        Err(e) => Check::failed("s_at_one", e.to_string()),
    });

    let mut direct = Vec::with_capacity(grid.len());
    for &k in grid {
        match s_matrix_direct(&coupling, k, tol) {
            Ok(r) => direct.push(r),
            Err(e) => {
                checks.push(Check::failed("s_unitarity", format!("k = {k}: {e}")));
                return (checks, hermitian);
            }
        }
    }
    let unitarity = direct.iter().map(|r| r.s.unitarity_defect()).fold(0.0, f64::max);
    let conservation = direct.iter().map(|r| r.conservation_defect()).fold(0.0, f64::max);
    checks.push(Check::measured("s_unitarity", unitarity, 1e-10));
    checks.push(Check::measured("probability_conservation", conservation, 1e-9));

    match decompose(&coupling, tol) {
        Err(Error::MoreThanTwoEigenvalues { residual }) => {
            let reason = format!("U has more than two eigenvalues (closure residual {residual:.3e})");
            for name in ["formula_equivalence", "mu_nu_identities", "ratio_constancy"] {
                checks.push(Check::skipped(name, reason.clone()));
            }
        }
        Err(e) => checks.push(Check::failed("formula_equivalence", e.to_string())),
        Ok(form) => {
            let mut equiv = 0.0_f64;
            for r in &direct {
                match s_matrix_closed(&form, r.k) {
                    Ok(c) => equiv = equiv.max(c.s.max_abs_diff(&r.s)),
                    Err(_) => equiv = f64::INFINITY,
                }
            }
            checks.push(Check::measured("formula_equivalence", equiv, 1e-9));

            if form.degenerate {
                checks.push(Check::skipped("mu_nu_identities", "U is a multiple of the identity"));
            } else {
                let mut worst = 0.0_f64;
                for &k in grid {
                    if let Ok(mn) = mu_nu(&form, k) {
                        let (a, b) = mn.unitarity_defects();
                        worst = worst.max(a.abs()).max(b.abs());
                    }
                }
                checks.push(Check::measured("mu_nu_identities", worst, 1e-10));
            }

            match strongest_offdiagonal(&form.m).filter(|&(j, l)| form.m[(j, l)].norm() > tol.eps()) {
                Some(reference) if !form.degenerate => match transmission_ratio_profile(&form, grid, reference, tol) {
                    Ok(profile) => checks.push(Check::measured("ratio_constancy", profile.max_spread(), 1e-10)),
                    Err(e) => checks.push(Check::failed("ratio_constancy", e.to_string())),
                },
                _ => checks.push(Check::skipped(
                    "ratio_constancy",
                    "M has no non-zero off-diagonal entry",
                )),
            }
        }
    }

    if hermitian {
        let variation = direct.iter().map(|r| r.s.max_abs_diff(u)).fold(0.0, f64::max);
        checks.push(Check::measured("scale_invariance", variation, 1e-10));
    }
    (checks, hermitian)
}

pub fn cmd_verify(raw: &RawCoupling, grid: &[f64], tol: Tolerance) -> (String, bool) {
    let (checks, scale_invariant) = verify_checks(raw, grid, tol);
    let all_pass = checks.iter().all(|c| c.status != "fail");
    let report = json!({
        "checks": checks,
        "scale_invariant": scale_invariant,
        "all_pass": all_pass,
        "grid": {
            "k_min": grid.first(),
            "k_max": grid.last(),
            "points": grid.len(),
        },
    });
    (to_json(&report), all_pass)
}

pub fn standard_source(n: usize, negate: bool) -> Result<ComplexMatrix, Failure> {
    standard_m(n, if negate { -1 } else { 1 }).map_err(Failure::from)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report is serializable");
    s.push('\n');
    s
}
