//! Nonlinear least squares for the coincidence models: a damped
//! Gauss-Newton engine with box bounds, plus the two curve fits the
//! toolkit actually runs (quantum counts model, classical dip with
//! amplitude mismatch) and goodness-of-fit reporting.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::correlator::{amplitude_mismatch_factor, analytic_visibility, DipCurve};
use crate::error::{Error, Result};
use crate::fock::{quantum_coincidence_at, FilterTable, JsaSpec, QuantumDipParams};
use crate::math::pairwise_sum;
use crate::signals::PhaseDistribution;

/// Stopping rules for the solver.
#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Relative drop in the sum of squares below which an accepted step
    /// counts as converged.
    pub rel_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iterations: 200,
            rel_tol: 1e-10,
        }
    }
}

/// One named parameter in a fit report.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FitParameter {
    pub value: f64,
    pub free: bool,
    /// Asymptotic standard error from the final Jacobian; absent for
    /// fixed parameters and when the normal matrix is singular.
    pub std_error: Option<f64>,
}

/// Outcome of a curve fit.
#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub params: BTreeMap<String, FitParameter>,
    pub r_squared: f64,
    /// Euclidean norm of the final residual vector.
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Objective value after each accepted step, for diagnosing descent.
    #[serde(skip)]
    pub sse_trace: Vec<f64>,
}

impl FitResult {
    pub fn value(&self, name: &str) -> Option<f64> {
        self.params.get(name).map(|p| p.value)
    }
}

/// Coefficient of determination: 1 - SS_res / SS_tot.
pub fn r_squared(data: &[f64], model: &[f64]) -> Result<f64> {
    if data.len() != model.len() || data.len() < 2 {
        return Err(Error::Fit(format!(
            "need matching series of at least 2 points, got {} and {}",
            data.len(),
            model.len()
        )));
    }
    let mean = pairwise_sum(data) / data.len() as f64;
    let ss_tot: Vec<f64> = data.iter().map(|d| (d - mean) * (d - mean)).collect();
    let ss_res: Vec<f64> = data
        .iter()
        .zip(model)
        .map(|(d, m)| (d - m) * (d - m))
        .collect();
    let ss_tot = pairwise_sum(&ss_tot);
    if ss_tot <= 0.0 {
        return Err(Error::Fit(
            "data has zero variance; goodness of fit is undefined".into(),
        ));
    }
    Ok(1.0 - pairwise_sum(&ss_res) / ss_tot)
}

/// A bounded least-squares problem over k parameters.
struct Problem<'a> {
    /// Residual vector model(p) - data; length fixed across evaluations.
    residuals: &'a dyn Fn(&[f64]) -> Result<Vec<f64>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// Magnitude scale per parameter, for difference steps and the
    /// step-size stopping rule.
    scales: Vec<f64>,
}

impl Problem<'_> {
    fn clamp(&self, p: &mut [f64]) {
        for (j, x) in p.iter_mut().enumerate() {
            *x = x.clamp(self.lower[j], self.upper[j]);
        }
    }
}

struct EngineOutcome {
    params: Vec<f64>,
    sse: f64,
    iterations: usize,
    converged: bool,
    sse_trace: Vec<f64>,
    jacobian: Vec<Vec<f64>>,
    n_residuals: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let terms: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
    pairwise_sum(&terms)
}

fn sum_squares(r: &[f64]) -> f64 {
    dot(r, r)
}

/// Central-difference Jacobian, one-sided at an active bound. Columns of
/// parameters pinned by their bounds come back all zero.
fn jacobian(problem: &Problem, p: &[f64]) -> Result<Vec<Vec<f64>>> {
    let k = p.len();
    let mut cols = Vec::with_capacity(k);
    for j in 0..k {
        let h = 1e-6 * p[j].abs().max(problem.scales[j]);
        let hi = (p[j] + h).min(problem.upper[j]);
        let lo = (p[j] - h).max(problem.lower[j]);
        if hi <= lo {
            let n = (problem.residuals)(p)?.len();
            cols.push(vec![0.0; n]);
            continue;
        }
        let mut p_hi = p.to_vec();
        p_hi[j] = hi;
        let mut p_lo = p.to_vec();
        p_lo[j] = lo;
        let r_hi = (problem.residuals)(&p_hi)?;
        let r_lo = (problem.residuals)(&p_lo)?;
        let col: Vec<f64> = r_hi
            .iter()
            .zip(&r_lo)
            .map(|(a, b)| (a - b) / (hi - lo))
            .collect();
        cols.push(col);
    }
    Ok(cols)
}

/// Solve M x = b by Gaussian elimination with partial pivoting. Returns
/// None when a pivot collapses, signaling a singular system.
#[allow(clippy::needless_range_loop)]
fn solve_linear(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let k = b.len();
    let tiny = 1e-300;
    for col in 0..k {
        let (pivot_row, pivot) = (col..k)
            .map(|r| (r, m[r][col].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))?;
        if pivot < tiny {
            return None;
        }
        m.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for r in col + 1..k {
            let f = m[r][col] / m[col][col];
            for c in col..k {
                m[r][c] -= f * m[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; k];
    for col in (0..k).rev() {
        let mut acc = b[col];
        for c in col + 1..k {
            acc -= m[col][c] * x[c];
        }
        x[col] = acc / m[col][col];
    }
    Some(x)
}

/// Inverse of a symmetric positive matrix by Gauss-Jordan elimination;
/// None when singular.
fn invert(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let k = m.len();
    let max_diag = (0..k).fold(0.0f64, |acc, j| acc.max(m[j][j].abs()));
    if max_diag == 0.0 {
        return None;
    }
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut inv: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for col in 0..k {
        let (pivot_row, pivot) = (col..k)
            .map(|r| (r, a[r][col].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))?;
        if pivot < 1e-12 * max_diag {
            return None;
        }
        a.swap(col, pivot_row);
        inv.swap(col, pivot_row);
        let d = a[col][col];
        for c in 0..k {
            a[col][c] /= d;
            inv[col][c] /= d;
        }
        for r in 0..k {
            if r != col {
                let f = a[r][col];
                for c in 0..k {
                    a[r][c] -= f * a[col][c];
                    inv[r][c] -= f * inv[col][c];
                }
            }
        }
    }
    Some(inv)
}

const LAMBDA_INIT: f64 = 1e-3;
const LAMBDA_MIN: f64 = 1e-12;
const LAMBDA_MAX: f64 = 1e12;

/// Damped Gauss-Newton descent: solve (JtJ + lambda diag(JtJ)) step = Jt r,
/// grow lambda tenfold on a rejected step, shrink tenfold on an accepted
/// one. Stops on a relative objective drop below rel_tol, on a vanishing
/// step, or when no damping level yields a strict decrease (a local
/// minimum at working precision). Accepted objective values never
/// increase by construction.
fn damped_least_squares(
    problem: &Problem,
    init: Vec<f64>,
    options: &FitOptions,
) -> Result<EngineOutcome> {
    let k = init.len();
    let mut p = init;
    problem.clamp(&mut p);
    let mut r = (problem.residuals)(&p)?;
    let n = r.len();
    if n < k + 2 {
        return Err(Error::Fit(format!(
            "{n} residuals cannot constrain {k} free parameters; need {} points",
            k + 2
        )));
    }
    let mut sse = sum_squares(&r);
    let mut trace = vec![sse];
    let mut lambda = LAMBDA_INIT;
    let mut jac = jacobian(problem, &p)?;
    let mut converged = false;
    let mut iterations = 0;

    'outer: for iter in 1..=options.max_iterations {
        iterations = iter;
        if sse == 0.0 {
            converged = true;
            break;
        }
        // normal equations in scale-normalized coordinates q = p/scale,
        // so parameters in wildly different units are comparable and the
        // flat-direction test is meaningful
        let mut jtj = vec![vec![0.0; k]; k];
        let mut jtr = vec![0.0; k];
        for a in 0..k {
            for b in a..k {
                let v = dot(&jac[a], &jac[b]) * problem.scales[a] * problem.scales[b];
                jtj[a][b] = v;
                jtj[b][a] = v;
            }
            jtr[a] = dot(&jac[a], &r) * problem.scales[a];
        }
        let max_diag = (0..k).fold(0.0f64, |acc, j| acc.max(jtj[j][j]));
        if max_diag == 0.0 {
            // every direction is flat or pinned; nothing to improve
            converged = true;
            break;
        }

        loop {
            let mut m = jtj.clone();
            let mut rhs = jtr.clone();
            for j in 0..k {
                if jtj[j][j] < 1e-14 * max_diag {
                    // flat direction: freeze it for this step
                    m[j] = vec![0.0; k];
                    for row in m.iter_mut() {
                        row[j] = 0.0;
                    }
                    m[j][j] = 1.0;
                    rhs[j] = 0.0;
                } else {
                    m[j][j] += lambda * jtj[j][j];
                }
            }
            let step = match solve_linear(m, rhs) {
                Some(s) => s,
                None => {
                    lambda *= 10.0;
                    if lambda > LAMBDA_MAX {
                        converged = true;
                        break 'outer;
                    }
                    continue;
                }
            };
            let mut cand: Vec<f64> = p
                .iter()
                .zip(&step)
                .enumerate()
                .map(|(j, (x, s))| x - s * problem.scales[j])
                .collect();
            problem.clamp(&mut cand);
            let r_cand = (problem.residuals)(&cand)?;
            let sse_cand = sum_squares(&r_cand);
            if sse_cand < sse {
                let step_small = cand
                    .iter()
                    .zip(&p)
                    .enumerate()
                    .all(|(j, (new, old))| {
                        (new - old).abs() <= 1e-12 * old.abs().max(problem.scales[j])
                    });
                // only a barely-damped step says anything about being at
                // the minimum; a heavily damped one is small by fiat
                let undamped = lambda <= LAMBDA_INIT;
                let drop = sse - sse_cand;
                p = cand;
                r = r_cand;
                let prev = sse;
                sse = sse_cand;
                trace.push(sse);
                lambda = (lambda / 10.0).max(LAMBDA_MIN);
                jac = jacobian(problem, &p)?;
                if undamped && (drop <= options.rel_tol * prev || step_small) {
                    converged = true;
                    break 'outer;
                }
                break;
            }
            lambda *= 10.0;
            if lambda > LAMBDA_MAX {
                // no strict decrease at any damping: local minimum
                converged = true;
                break 'outer;
            }
        }
    }

    Ok(EngineOutcome {
        params: p,
        sse,
        iterations,
        converged,
        sse_trace: trace,
        jacobian: jac,
        n_residuals: n,
    })
}

/// Standard errors sqrt(sigma2 * inv(JtJ)_jj) with sigma2 = SSE/(n-k),
/// computed on the scale-normalized matrix and mapped back to parameter
/// units to keep the inversion well conditioned.
#[allow(clippy::needless_range_loop)]
fn standard_errors(problem: &Problem, outcome: &EngineOutcome) -> Vec<Option<f64>> {
    let k = outcome.params.len();
    let n = outcome.n_residuals;
    if n <= k {
        return vec![None; k];
    }
    let mut jtj = vec![vec![0.0; k]; k];
    for a in 0..k {
        for b in a..k {
            let v = dot(&outcome.jacobian[a], &outcome.jacobian[b])
                * problem.scales[a]
                * problem.scales[b];
            jtj[a][b] = v;
            jtj[b][a] = v;
        }
    }
    let sigma2 = outcome.sse / (n - k) as f64;
    match invert(&jtj) {
        Some(cov) => (0..k)
            .map(|j| {
                let var = sigma2 * cov[j][j];
                if var.is_finite() && var >= 0.0 {
                    Some(var.sqrt() * problem.scales[j])
                } else {
                    None
                }
            })
            .collect(),
        None => vec![None; k],
    }
}

/// Everything held fixed while fitting the quantum counts model.
#[derive(Debug, Clone)]
pub struct QuantumFitSetup {
    /// Splitter power transmission, never fitted.
    pub transmission: f64,
    /// Spectral width used when "sigma_omega" is not free, and as the
    /// JSA width scale otherwise.
    pub sigma_omega: f64,
    pub zeta: f64,
    pub eta: f64,
    pub filter: Option<FilterTable>,
    pub renormalize: bool,
}

const QUANTUM_PARAMS: [&str; 4] = ["scale", "sigma_omega", "zeta", "eta"];

fn check_free(free: &[&str], allowed: &[&str]) -> Result<()> {
    for name in free {
        if !allowed.contains(name) {
            return Err(Error::Fit(format!(
                "unknown free parameter {name:?}; choose among {allowed:?}"
            )));
        }
    }
    for (i, name) in free.iter().enumerate() {
        if free[..i].contains(name) {
            return Err(Error::Fit(format!("free parameter {name:?} named twice")));
        }
    }
    Ok(())
}

/// Initial spectral width from the dip's half-depth crossing: the
/// smallest |delay| whose counts recover halfway to the baseline, with
/// exp(-2 sigma^2 tau^2) = 1/2 there.
fn sigma_from_half_depth(data: &[(f64, f64)]) -> f64 {
    let mut by_abs: Vec<(f64, f64)> = data.iter().map(|&(t, c)| (t.abs(), c)).collect();
    by_abs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let far = &by_abs[by_abs.len().saturating_sub(3)..];
    let baseline = far.iter().map(|(_, c)| c).sum::<f64>() / far.len() as f64;
    let floor = by_abs.iter().map(|(_, c)| *c).fold(f64::INFINITY, f64::min);
    let half = 0.5 * (floor + baseline);
    let crossing = by_abs.iter().find(|(t, c)| *t > 0.0 && *c >= half);
    match crossing {
        Some((tau, _)) => (0.5 * std::f64::consts::LN_2).sqrt() / tau,
        None => {
            let span = by_abs.last().map(|(t, _)| *t).unwrap_or(0.0);
            if span > 0.0 {
                0.5 / span
            } else {
                1.0
            }
        }
    }
}

/// Fit the coincidence counts model
///
/// ```text
/// C(dt) = K [ (1-zeta)(t^2 + r^2 - 2 t r eta g(dt)) + 2 zeta t r ]
/// ```
///
/// to (delay, counts) data. `free` selects among "scale", "sigma_omega",
/// "zeta", "eta"; everything else is pinned by `setup`. Free parameters
/// start from data-driven guesses, not from the setup values.
pub fn fit_quantum(
    data: &[(f64, f64)],
    setup: &QuantumFitSetup,
    free: &[&str],
    options: &FitOptions,
) -> Result<FitResult> {
    check_free(free, &QUANTUM_PARAMS)?;
    if free.is_empty() {
        return Err(Error::Fit("no free parameters to fit".into()));
    }
    if data.len() < free.len() + 2 {
        return Err(Error::Fit(format!(
            "{} points cannot constrain {} free parameters",
            data.len(),
            free.len()
        )));
    }
    if data.iter().any(|(t, c)| !t.is_finite() || !c.is_finite()) {
        return Err(Error::Fit("data contains non-finite values".into()));
    }
    let max_counts = data.iter().map(|(_, c)| *c).fold(f64::NEG_INFINITY, f64::max);
    if max_counts <= 0.0 {
        return Err(Error::Fit(
            "counts must have a positive maximum to set a rate scale".into(),
        ));
    }
    // validate the fixed-parameter baseline before burning iterations
    QuantumDipParams {
        transmission: setup.transmission,
        eta: setup.eta,
        zeta: setup.zeta,
        scale: max_counts,
    }
    .validate()?;
    if !(setup.sigma_omega.is_finite() && setup.sigma_omega > 0.0) {
        return Err(Error::Fit(format!(
            "spectral width {} must be positive",
            setup.sigma_omega
        )));
    }

    let scale_init = 2.0 * max_counts;
    let sigma_init = sigma_from_half_depth(data);
    let order: Vec<&str> = QUANTUM_PARAMS
        .iter()
        .copied()
        .filter(|n| free.contains(n))
        .collect();
    let mut init = Vec::new();
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    let mut scales = Vec::new();
    for name in &order {
        match *name {
            "scale" => {
                init.push(scale_init);
                lower.push(1e-9 * scale_init);
                upper.push(f64::INFINITY);
                scales.push(scale_init);
            }
            "sigma_omega" => {
                init.push(sigma_init);
                lower.push(1e-9 * sigma_init);
                upper.push(f64::INFINITY);
                scales.push(sigma_init);
            }
            "zeta" => {
                init.push(0.02);
                lower.push(0.0);
                upper.push(1.0);
                scales.push(1.0);
            }
            "eta" => {
                init.push(0.99);
                lower.push(0.0);
                upper.push(1.0);
                scales.push(1.0);
            }
            _ => unreachable!(),
        }
    }

    let assemble = |p: &[f64]| -> (QuantumDipParams, JsaSpec) {
        let mut params = QuantumDipParams {
            transmission: setup.transmission,
            eta: setup.eta,
            zeta: setup.zeta,
            scale: max_counts,
        };
        let mut sigma = setup.sigma_omega;
        for (name, &value) in order.iter().zip(p) {
            match *name {
                "scale" => params.scale = value,
                "sigma_omega" => sigma = value,
                "zeta" => params.zeta = value,
                "eta" => params.eta = value,
                _ => unreachable!(),
            }
        }
        let jsa = JsaSpec {
            sigma_omega: sigma,
            filter: setup.filter.clone(),
            renormalize: setup.renormalize,
        };
        (params, jsa)
    };

    let residuals = |p: &[f64]| -> Result<Vec<f64>> {
        let (params, jsa) = assemble(p);
        data.iter()
            .map(|&(dt, c)| Ok(quantum_coincidence_at(&params, &jsa, dt)? - c))
            .collect()
    };
    let problem = Problem {
        residuals: &residuals,
        lower,
        upper,
        scales,
    };
    let outcome = damped_least_squares(&problem, init, options)?;

    let (final_params, final_jsa) = assemble(&outcome.params);
    let counts: Vec<f64> = data.iter().map(|&(_, c)| c).collect();
    let model: Vec<f64> = data
        .iter()
        .map(|&(dt, _)| quantum_coincidence_at(&final_params, &final_jsa, dt))
        .collect::<Result<_>>()?;
    let errors = standard_errors(&problem, &outcome);

    let mut params = BTreeMap::new();
    params.insert(
        "transmission".to_string(),
        FitParameter {
            value: setup.transmission,
            free: false,
            std_error: None,
        },
    );
    for name in QUANTUM_PARAMS {
        let fitted = order.iter().position(|n| *n == name);
        let value = match (name, fitted) {
            (_, Some(j)) => outcome.params[j],
            ("scale", None) => continue,
            ("sigma_omega", None) => setup.sigma_omega,
            ("zeta", None) => setup.zeta,
            ("eta", None) => setup.eta,
            _ => unreachable!(),
        };
        params.insert(
            name.to_string(),
            FitParameter {
                value,
                free: fitted.is_some(),
                std_error: fitted.and_then(|j| errors[j]),
            },
        );
    }

    Ok(FitResult {
        params,
        r_squared: r_squared(&counts, &model)?,
        residual_norm: outcome.sse.sqrt(),
        converged: outcome.converged,
        iterations: outcome.iterations,
        sse_trace: outcome.sse_trace,
    })
}

/// Fit the classical dip with the amplitude ratio as the parameter:
///
/// ```text
/// C(tau; eps) = 1 - V (2 eps / (1 + eps^2))^2 exp(-tau^2 / (2 sigma^2))
/// ```
///
/// with V the analytic visibility of the phase ensemble. Confidence
/// bounds in the curve are ignored; this is a plain least-squares fit of
/// the means. Pass `envelope_sigma` to pin the width, or None to co-fit
/// it from the curve.
pub fn fit_classical(
    data: &DipCurve,
    dist: &PhaseDistribution,
    envelope_sigma: Option<f64>,
    options: &FitOptions,
) -> Result<FitResult> {
    let points = data.points();
    if points.len() < 3 {
        return Err(Error::Fit(format!(
            "{} points are too few to fit the dip",
            points.len()
        )));
    }
    let v = analytic_visibility(dist)?;
    if let Some(s) = envelope_sigma {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::Fit(format!("envelope sigma {s} must be positive")));
        }
    }

    let pairs: Vec<(f64, f64)> = points.iter().map(|p| (p.tau_s, p.c_mean)).collect();
    // 1 - C is proportional to the squared envelope overlap, whose
    // half-depth sits where exp(-tau^2/(2 sigma^2)) = 1/2
    let dip_depth: Vec<(f64, f64)> = pairs.iter().map(|&(t, c)| (t, 1.0 - c)).collect();
    let sigma_guess = {
        let mut by_abs = dip_depth.clone();
        by_abs.sort_by(|a, b| a.0.abs().total_cmp(&b.0.abs()));
        let deepest = by_abs[0].1;
        let crossing = by_abs
            .iter()
            .find(|(t, d)| t.abs() > 0.0 && *d <= 0.5 * deepest);
        match crossing {
            Some((tau, _)) => tau.abs() / (2.0 * std::f64::consts::LN_2).sqrt(),
            None => by_abs.last().map(|(t, _)| t.abs()).unwrap_or(1.0).max(1e-300),
        }
    };

    // starting exactly at eps = 1 would zero the mismatch derivative (it
    // is a maximum), so begin slightly below
    let mut init = vec![0.9];
    let mut lower = vec![1e-9];
    let mut upper = vec![f64::INFINITY];
    let mut scales = vec![1.0];
    if envelope_sigma.is_none() {
        init.push(sigma_guess);
        lower.push(1e-9 * sigma_guess);
        upper.push(f64::INFINITY);
        scales.push(sigma_guess);
    }

    let model_at = |tau: f64, eps: f64, sigma: f64| -> Result<f64> {
        let mismatch = amplitude_mismatch_factor(eps)?;
        Ok(1.0 - v * mismatch * (-tau * tau / (2.0 * sigma * sigma)).exp())
    };
    let residuals = |p: &[f64]| -> Result<Vec<f64>> {
        let sigma = envelope_sigma.unwrap_or_else(|| p[1]);
        pairs
            .iter()
            .map(|&(t, c)| Ok(model_at(t, p[0], sigma)? - c))
            .collect()
    };
    let problem = Problem {
        residuals: &residuals,
        lower,
        upper,
        scales,
    };
    let outcome = damped_least_squares(&problem, init, options)?;
    let errors = standard_errors(&problem, &outcome);

    let eps = outcome.params[0];
    let sigma = envelope_sigma.unwrap_or_else(|| outcome.params[1]);
    let counts: Vec<f64> = pairs.iter().map(|&(_, c)| c).collect();
    let model: Vec<f64> = pairs
        .iter()
        .map(|&(t, _)| model_at(t, eps, sigma))
        .collect::<Result<_>>()?;

    let mut params = BTreeMap::new();
    params.insert(
        "epsilon".to_string(),
        FitParameter {
            value: eps,
            free: true,
            std_error: errors[0],
        },
    );
    params.insert(
        "envelope_sigma".to_string(),
        FitParameter {
            value: sigma,
            free: envelope_sigma.is_none(),
            std_error: if envelope_sigma.is_none() {
                errors[1]
            } else {
                None
            },
        },
    );
    params.insert(
        "visibility".to_string(),
        FitParameter {
            value: v * amplitude_mismatch_factor(eps)?,
            free: false,
            std_error: None,
        },
    );

    Ok(FitResult {
        params,
        r_squared: r_squared(&counts, &model)?,
        residual_norm: outcome.sse.sqrt(),
        converged: outcome.converged,
        iterations: outcome.iterations,
        sse_trace: outcome.sse_trace,
    })
}
