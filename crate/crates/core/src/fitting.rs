//! Bounded multi-start least squares and the magnetometry fits built on it.
//!
//! The local search is a derivative-free Nelder–Mead simplex clipped to the
//! parameter box; starts come from a low-discrepancy Halton set rotated by
//! the seed, so runs are deterministic. Forward models (powder
//! magnetization, oriented heat capacity, χT) plug in as residual closures.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SpinError};
use crate::orientation::{averaged_observable, AveragedObservable, OrientationScheme};
use crate::spincore::{FieldVector, SpinSystem};
use crate::thermo::TemperatureGrid;

/// One free parameter with a finite box and an in-box initial guess.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameter {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub init: f64,
}

impl Parameter {
    pub fn new(name: impl Into<String>, min: f64, max: f64, init: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && max > min) {
            return Err(SpinError::InvalidParameter(format!(
                "parameter bounds must be finite with max > min, got [{min}, {max}]"
            )));
        }
        if !(init >= min && init <= max) {
            return Err(SpinError::InvalidParameter(format!(
                "initial value {init} outside [{min}, {max}]"
            )));
        }
        Ok(Parameter { name: name.into(), min, max, init })
    }
}

/// Multi-start and convergence settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub starts: usize,
    pub max_evals: usize,
    /// Relative spread of simplex residuals at which a start stops.
    pub rel_tol: f64,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { starts: 16, max_evals: 2000, rel_tol: 1e-10, seed: 1 }
    }
}

/// Outcome of one local descent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartOutcome {
    pub start_index: usize,
    pub initial: Vec<f64>,
    pub best: Vec<f64>,
    pub residual: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Best parameters plus the per-start picture (local-minimum enumeration).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub parameter_names: Vec<String>,
    pub best: Vec<f64>,
    pub residual: f64,
    pub outcomes: Vec<StartOutcome>,
    /// Gauss–Newton covariance at the best point (row-major), when the
    /// normal matrix was invertible.
    pub covariance: Option<Vec<f64>>,
    /// SSR/(n−p) when σ-weighted residuals were supplied.
    pub reduced_chi2: Option<f64>,
    pub converged: bool,
    pub n_points: usize,
    /// Residual vector at the best point.
    pub residuals: Vec<f64>,
}

impl FitResult {
    pub fn value(&self, name: &str) -> Option<f64> {
        self.parameter_names.iter().position(|n| n == name).map(|i| self.best[i])
    }

    /// 1σ uncertainty of a parameter from the covariance diagonal.
    pub fn sigma(&self, name: &str) -> Option<f64> {
        let i = self.parameter_names.iter().position(|n| n == name)?;
        let p = self.parameter_names.len();
        self.covariance.as_ref().map(|c| c[i * p + i].max(0.0).sqrt())
    }
}

/// Residual-vector objective. `None` marks an unevaluable point; the
/// search treats it as +∞ and continues.
pub type ResidualFn<'a> = &'a (dyn Fn(&[f64]) -> Option<Vec<f64>> + Sync);

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

fn objective(res: ResidualFn<'_>, x: &[f64]) -> f64 {
    match res(x) {
        Some(r) if r.iter().all(|v| v.is_finite()) => sum_sq(&r),
        _ => f64::INFINITY,
    }
}

/// Halton low-discrepancy points in the box, rotated by the seed
/// (Cranley–Patterson), first start replaced by the declared inits.
pub fn halton_starts(params: &[Parameter], n: usize, seed: u64) -> Vec<Vec<f64>> {
    const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];
    let dim = params.len();
    let mut shift = vec![0.0f64; dim];
    let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
    for s in &mut shift {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        *s = (state >> 11) as f64 / (1u64 << 53) as f64;
    }
    let halton = |index: u64, base: u64| -> f64 {
        let mut f = 1.0;
        let mut r = 0.0;
        let mut i = index;
        while i > 0 {
            f /= base as f64;
            r += f * (i % base) as f64;
            i /= base;
        }
        r
    };
    (0..n)
        .map(|k| {
            if k == 0 {
                return params.iter().map(|p| p.init).collect();
            }
            (0..dim)
                .map(|d| {
                    let u = (halton(k as u64 + 1, PRIMES[d % PRIMES.len()]) + shift[d]).fract();
                    params[d].min + u * (params[d].max - params[d].min)
                })
                .collect()
        })
        .collect()
}

/// Multi-start bounded least squares with the default Halton start plan.
pub fn least_squares(
    residuals: ResidualFn<'_>,
    params: &[Parameter],
    opts: &FitOptions,
) -> Result<FitResult> {
    let starts = halton_starts(params, opts.starts.max(1), opts.seed);
    least_squares_with_starts(residuals, params, starts, opts)
}

/// Multi-start bounded least squares from an explicit start list.
pub fn least_squares_with_starts(
    residuals: ResidualFn<'_>,
    params: &[Parameter],
    starts: Vec<Vec<f64>>,
    opts: &FitOptions,
) -> Result<FitResult> {
    if params.is_empty() {
        return Err(SpinError::InvalidParameter("no free parameters".into()));
    }
    if starts.is_empty() {
        return Err(SpinError::InvalidParameter("no starts".into()));
    }
    let outcomes: Vec<StartOutcome> = starts
        .par_iter()
        .enumerate()
        .map(|(k, x0)| {
            let (best, residual, evals, converged) =
                nelder_mead(residuals, params, x0, opts.max_evals, opts.rel_tol);
            StartOutcome { start_index: k, initial: x0.clone(), best, residual, evals, converged }
        })
        .collect();

    let best_outcome = outcomes
        .iter()
        .filter(|o| o.residual.is_finite())
        .min_by(|a, b| {
            a.residual
                .partial_cmp(&b.residual)
                .unwrap()
                .then(a.start_index.cmp(&b.start_index))
        })
        .ok_or_else(|| SpinError::FitFailure("every start failed to evaluate".into()))?;

    let best_residuals = residuals(&best_outcome.best).unwrap_or_default();
    let n_points = best_residuals.len();
    let p = params.len();
    let covariance = gauss_newton_covariance(residuals, params, &best_outcome.best);
    let reduced_chi2 = if n_points > p {
        Some(best_outcome.residual / (n_points - p) as f64)
    } else {
        None
    };

    Ok(FitResult {
        parameter_names: params.iter().map(|p| p.name.clone()).collect(),
        best: best_outcome.best.clone(),
        residual: best_outcome.residual,
        converged: best_outcome.converged,
        outcomes,
        covariance,
        reduced_chi2,
        n_points,
        residuals: best_residuals,
    })
}

fn clamp_to_box(params: &[Parameter], x: &mut [f64]) {
    for (v, p) in x.iter_mut().zip(params) {
        *v = v.clamp(p.min, p.max);
    }
}

/// Nelder–Mead simplex descent clipped to the parameter box. The best
/// vertex never worsens, so the best residual is monotone non-increasing.
fn nelder_mead(
    res: ResidualFn<'_>,
    params: &[Parameter],
    x0: &[f64],
    max_evals: usize,
    rel_tol: f64,
) -> (Vec<f64>, f64, usize, bool) {
    let dim = params.len();
    let evals = std::cell::Cell::new(0usize);
    let eval = |x: &[f64]| {
        evals.set(evals.get() + 1);
        objective(res, x)
    };

    // Initial simplex: x0 plus 5%-of-box steps along each axis.
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let mut start = x0.to_vec();
    clamp_to_box(params, &mut start);
    let f0 = eval(&start);
    simplex.push((start.clone(), f0));
    for d in 0..dim {
        let width = params[d].max - params[d].min;
        let mut v = start.clone();
        let step = 0.05 * width;
        v[d] = if v[d] + step <= params[d].max { v[d] + step } else { v[d] - step };
        let f = eval(&v);
        simplex.push((v, f));
    }

    let mut converged = false;
    while evals.get() < max_evals {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let f_best = simplex[0].1;
        let f_worst = simplex[dim].1;
        if f_best.is_finite()
            && (f_worst - f_best).abs() <= rel_tol * (f_best.abs() + 1e-30)
        {
            converged = true;
            break;
        }

        // Centroid of all but the worst vertex.
        let mut centroid = vec![0.0; dim];
        for (v, _) in &simplex[..dim] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / dim as f64;
            }
        }
        let worst = simplex[dim].clone();
        let second_worst = simplex[dim - 1].1;

        let tryp = |coef: f64| {
            let mut x: Vec<f64> = centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + coef * (c - w))
                .collect();
            clamp_to_box(params, &mut x);
            let f = eval(&x);
            (x, f)
        };

        let (xr, fr) = tryp(1.0);
        if fr < simplex[0].1 {
            let (xe, fe) = tryp(2.0);
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < second_worst {
            simplex[dim] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                tryp(0.5) // outside contraction
            } else {
                tryp(-0.5) // inside contraction
            };
            if fc < worst.1.min(fr) {
                simplex[dim] = (xc, fc);
            } else {
                // Shrink toward the best vertex.
                let best = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    for (x, b) in v.0.iter_mut().zip(&best) {
                        *x = b + 0.5 * (*x - b);
                    }
                    clamp_to_box(params, &mut v.0);
                    v.1 = eval(&v.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let (best, f_best) = simplex.swap_remove(0);
    (best, f_best, evals.get(), converged)
}

/// (JᵀJ)⁻¹·s² at the best point, s² = SSR/(n−p); `None` when singular.
fn gauss_newton_covariance(
    res: ResidualFn<'_>,
    params: &[Parameter],
    x: &[f64],
) -> Option<Vec<f64>> {
    let r0 = res(x)?;
    let n = r0.len();
    let p = params.len();
    if n <= p {
        return None;
    }
    let mut jac = DMatrix::zeros(n, p);
    for d in 0..p {
        let width = params[d].max - params[d].min;
        let step = (1e-6 * width).max(1e-9);
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[d] = (xp[d] + step).min(params[d].max);
        xm[d] = (xm[d] - step).max(params[d].min);
        let denom = xp[d] - xm[d];
        if denom == 0.0 {
            return None;
        }
        let rp = res(&xp)?;
        let rm = res(&xm)?;
        for i in 0..n {
            jac[(i, d)] = (rp[i] - rm[i]) / denom;
        }
    }
    let jtj = jac.transpose() * &jac;
    let inv = jtj.try_inverse()?;
    let s2 = sum_sq(&r0) / (n - p) as f64;
    let cov = inv * s2;
    Some(cov.iter().cloned().collect())
}

/// A measured response at one control point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataPoint {
    /// Temperature, kelvin.
    pub t: f64,
    /// Field magnitude, tesla.
    pub h: f64,
    /// Response value (μ_B, cm³·mol⁻¹·K, or c/R).
    pub value: f64,
    /// Optional 1σ uncertainty.
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseKind {
    Magnetization,
    ChiTProduct,
    HeatCapacity,
}

/// One measured dataset (e.g. an M(H) isotherm or a c(T) field family).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub kind: ResponseKind,
    pub points: Vec<DataPoint>,
}

impl Dataset {
    pub fn new(kind: ResponseKind, points: Vec<DataPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(SpinError::InvalidParameter("dataset has no points".into()));
        }
        if points.iter().any(|p| p.sigma.map_or(false, |s| !(s > 0.0))) {
            return Err(SpinError::InvalidParameter("σ must be positive where present".into()));
        }
        Ok(Dataset { kind, points })
    }
}

/// Powder-averaged magnetization forward model, μ_B per molecule.
pub fn powder_magnetization_model(
    sys: &SpinSystem,
    h: f64,
    t: f64,
    n_orientations: usize,
) -> Result<f64> {
    let grid = TemperatureGrid::new(vec![t])?;
    let curve = averaged_observable(
        sys,
        &OrientationScheme::Powder { n: n_orientations },
        AveragedObservable::Magnetization,
        &grid,
        &FieldVector::along_z(h),
    )?;
    Ok(curve.values[0])
}

/// Outcome of the dual-branch ZFS fit of powder magnetization isotherms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZfsFitReport {
    pub fit: FitResult,
    /// Best (D, E, residual) among starts that ended with D < 0.
    pub negative_branch: Option<(f64, f64, f64)>,
    /// Best (D, E, residual) among starts that ended with D > 0.
    pub positive_branch: Option<(f64, f64, f64)>,
    /// Powder magnetization alone cannot fix the sign of D.
    pub sign_ambiguous: bool,
    /// Set when every isotherm sits at a single temperature: D is then
    /// nearly unidentifiable.
    pub single_temperature_warning: bool,
}

/// Fits (D, E) in kelvin to powder magnetization isotherms with g and TIP
/// fixed, seeding half the starts in each D-sign half-space and reporting
/// both local minima.
pub fn fit_zfs_powder_magnetization(
    data: &[Dataset],
    g: f64,
    spin: f64,
    d_bounds_kelvin: (f64, f64),
    e_max_kelvin: f64,
    n_orientations: usize,
    opts: &FitOptions,
) -> Result<ZfsFitReport> {
    if data.is_empty() || data.iter().any(|d| d.kind != ResponseKind::Magnetization) {
        return Err(SpinError::InvalidParameter(
            "ZFS fit needs magnetization datasets".into(),
        ));
    }
    let mut temps: Vec<f64> = data.iter().flat_map(|d| d.points.iter().map(|p| p.t)).collect();
    temps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    temps.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let single_temperature_warning = temps.len() < 2;
    if single_temperature_warning {
        log::warn!("single-temperature magnetization data: D is nearly unidentifiable");
    }

    let (d_min, d_max) = d_bounds_kelvin;
    let params = vec![
        Parameter::new("D_K", d_min, d_max, 0.25 * d_min)?,
        Parameter::new("E_K", 0.0, e_max_kelvin, 0.1 * e_max_kelvin)?,
    ];
    let points: Vec<DataPoint> = data.iter().flat_map(|d| d.points.iter().cloned()).collect();
    let residual = move |x: &[f64]| -> Option<Vec<f64>> {
        let sys = SpinSystem::new(spin, x[0], x[1], [g; 3]).ok()?;
        points
            .iter()
            .map(|p| {
                let m = powder_magnetization_model(&sys, p.h, p.t, n_orientations).ok()?;
                Some((m - p.value) / p.sigma.unwrap_or(1.0))
            })
            .collect()
    };

    if !(d_min < 0.0 && d_max > 0.0) {
        return Err(SpinError::InvalidParameter(
            "D bounds must straddle zero for sign-balanced seeding".into(),
        ));
    }
    // Balanced D-sign seeding: alternate starts mirrored into each
    // half-space, keeping their Halton magnitudes.
    let mut starts = halton_starts(&params, opts.starts.max(2), opts.seed);
    for (k, s) in starts.iter_mut().enumerate() {
        let magnitude = s[0].abs().max(0.05 * d_max.max(-d_min));
        s[0] = if k % 2 == 0 {
            (-magnitude).clamp(d_min, -1e-6)
        } else {
            magnitude.clamp(1e-6, d_max)
        };
    }
    let fit = least_squares_with_starts(&residual, &params, starts, opts)?;

    let branch = |sign: f64| {
        fit.outcomes
            .iter()
            .filter(|o| o.residual.is_finite() && o.best[0] * sign > 0.0)
            .min_by(|a, b| a.residual.partial_cmp(&b.residual).unwrap())
            .map(|o| (o.best[0], o.best[1], o.residual))
    };
    Ok(ZfsFitReport {
        negative_branch: branch(-1.0),
        positive_branch: branch(1.0),
        sign_ambiguous: true,
        single_temperature_warning,
        fit,
    })
}

/// Result of the easy-axis angle fit to a c(T) field family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleFitReport {
    pub angle_deg: f64,
    pub fit: FitResult,
}

/// Fits the polar angle between the applied field and the molecular easy
/// axis to single-crystal specific-heat curves at several fields, with a
/// fixed spin system.
pub fn fit_axis_angle_from_heatcap(
    data: &[Dataset],
    fields: &[f64],
    sys: &SpinSystem,
    opts: &FitOptions,
) -> Result<AngleFitReport> {
    if data.len() != fields.len() || data.is_empty() {
        return Err(SpinError::InvalidParameter(
            "need one heat-capacity dataset per field".into(),
        ));
    }
    if data.iter().any(|d| d.kind != ResponseKind::HeatCapacity) {
        return Err(SpinError::InvalidParameter("angle fit needs c/R datasets".into()));
    }
    if fields.iter().all(|&h| h == 0.0) {
        return Err(SpinError::FitFailure(
            "all-zero-field heat capacity carries no angle information".into(),
        ));
    }
    if fields.len() < 3 || !fields.iter().any(|&h| h >= 0.5) {
        log::warn!("angle leverage is weak: fewer than 3 fields or all below 0.5 T");
    }

    let params = vec![Parameter::new("theta_deg", 0.0, 90.0, 45.0)?];
    let sys = sys.clone();
    let data = data.to_vec();
    let fields = fields.to_vec();
    let residual = move |x: &[f64]| -> Option<Vec<f64>> {
        let scheme = OrientationScheme::Single { theta_deg: x[0], phi_deg: 0.0 };
        let mut out = Vec::new();
        for (set, &h) in data.iter().zip(&fields) {
            let temps: Vec<f64> = set.points.iter().map(|p| p.t).collect();
            let grid = TemperatureGrid::new(temps).ok()?;
            let curve = averaged_observable(
                &sys,
                &scheme,
                AveragedObservable::SpecificHeat,
                &grid,
                &FieldVector::along_z(h),
            )
            .ok()?;
            for (p, model) in set.points.iter().zip(curve.values) {
                out.push((model - p.value) / p.sigma.unwrap_or(1.0));
            }
        }
        Some(out)
    };
    let fit = least_squares(&residual, &params, opts)?;
    Ok(AngleFitReport { angle_deg: fit.best[0], fit })
}

/// Fits g and TIP to a χT(T) dataset (D, E fixed), the paper's
/// room-temperature calibration.
pub fn fit_chi_t(
    data: &Dataset,
    sys_template: &SpinSystem,
    field: f64,
    fit_tip: bool,
    opts: &FitOptions,
) -> Result<FitResult> {
    if data.kind != ResponseKind::ChiTProduct {
        return Err(SpinError::InvalidParameter("χT fit needs a chi_t_product dataset".into()));
    }
    let mut params = vec![Parameter::new("g", 1.5, 3.0, 2.1)?];
    if fit_tip {
        params.push(Parameter::new("TIP", 0.0, 1e-3, 1e-4)?);
    }
    let template = sys_template.clone();
    let points = data.points.clone();
    let residual = move |x: &[f64]| -> Option<Vec<f64>> {
        let mut sys = template.clone();
        sys.g = [x[0]; 3];
        let tip = if x.len() > 1 { x[1] } else { 1e-4 };
        points
            .iter()
            .map(|p| {
                let chi = crate::thermo::susceptibility_isothermal(
                    &sys,
                    &FieldVector::along_z(field),
                    p.t,
                )
                .ok()?;
                Some(((chi + tip) * p.t - p.value) / p.sigma.unwrap_or(1.0))
            })
            .collect()
    };
    least_squares(&residual, &params, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn convex_quadratic_sanity() {
        let res = |x: &[f64]| Some(vec![x[0] - 3.0]);
        let params = vec![Parameter::new("x", -10.0, 10.0, 0.0).unwrap()];
        let fit = least_squares(&res, &params, &FitOptions::default()).unwrap();
        assert!((fit.best[0] - 3.0).abs() < 1e-6, "x = {}", fit.best[0]);
        assert!(fit.converged);
    }

    #[test]
    fn rosenbrock_from_eight_starts() {
        let res = |x: &[f64]| Some(vec![1.0 - x[0], 10.0 * (x[1] - x[0] * x[0])]);
        let params = vec![
            Parameter::new("a", -2.0, 2.0, -1.0).unwrap(),
            Parameter::new("b", -1.0, 3.0, 1.0).unwrap(),
        ];
        let opts = FitOptions { starts: 8, max_evals: 4000, ..FitOptions::default() };
        let fit = least_squares(&res, &params, &opts).unwrap();
        assert!((fit.best[0] - 1.0).abs() < 1e-4 && (fit.best[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn bimodal_landscape_shows_both_basins() {
        // Two quadratic wells at x = ±2 with different depths.
        let res = |x: &[f64]| {
            let left = (x[0] + 2.0) * (x[0] + 2.0);
            let right = 0.5 + (x[0] - 2.0) * (x[0] - 2.0);
            Some(vec![left.min(right).sqrt()])
        };
        let params = vec![Parameter::new("x", -5.0, 5.0, 0.1).unwrap()];
        let opts = FitOptions { starts: 12, ..FitOptions::default() };
        let fit = least_squares(&res, &params, &opts).unwrap();
        let near = |target: f64| {
            fit.outcomes.iter().any(|o| (o.best[0] - target).abs() < 0.05)
        };
        assert!(near(-2.0) && near(2.0), "both basins should appear among outcomes");
        assert!((fit.best[0] + 2.0).abs() < 0.05, "global minimum is the left well");
    }

    #[test]
    fn bounds_always_respected() {
        let res = |x: &[f64]| Some(vec![x[0] - 100.0, x[1] + 100.0]);
        let params = vec![
            Parameter::new("a", -1.0, 1.0, 0.0).unwrap(),
            Parameter::new("b", -2.0, 2.0, 0.0).unwrap(),
        ];
        let fit = least_squares(&res, &params, &FitOptions::default()).unwrap();
        for o in &fit.outcomes {
            assert!(o.best[0] >= -1.0 && o.best[0] <= 1.0);
            assert!(o.best[1] >= -2.0 && o.best[1] <= 2.0);
        }
        assert_relative_eq!(fit.best[0], 1.0, epsilon = 1e-9);
        assert_relative_eq!(fit.best[1], -2.0, epsilon = 1e-9);
    }

    #[test]
    fn deterministic_under_fixed_seed() {
        let res = |x: &[f64]| Some(vec![(x[0] - 0.7).powi(2), x[1] * x[1]]);
        let params = vec![
            Parameter::new("a", -3.0, 3.0, 0.0).unwrap(),
            Parameter::new("b", -3.0, 3.0, 1.0).unwrap(),
        ];
        let opts = FitOptions { seed: 42, ..FitOptions::default() };
        let a = least_squares(&res, &params, &opts).unwrap();
        let b = least_squares(&res, &params, &opts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejected_points_do_not_stop_the_search() {
        // Model undefined left of −0.5; minimum at +1.
        let res = |x: &[f64]| {
            if x[0] < -0.5 {
                None
            } else {
                Some(vec![x[0] - 1.0])
            }
        };
        let params = vec![Parameter::new("x", -5.0, 5.0, -0.4).unwrap()];
        let fit = least_squares(&res, &params, &FitOptions::default()).unwrap();
        assert!((fit.best[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn noiseless_self_fit_residual_is_tiny() {
        // Fit of data generated by the model itself: residual < 1e-10.
        let truth = [1.7, -0.3];
        let xs: Vec<f64> = (0..20).map(|i| 0.1 * i as f64).collect();
        let data: Vec<f64> = xs.iter().map(|x| truth[0] * x + truth[1] * x * x).collect();
        let xs2 = xs.clone();
        let res = move |p: &[f64]| {
            Some(
                xs2.iter()
                    .zip(&data)
                    .map(|(x, d)| p[0] * x + p[1] * x * x - d)
                    .collect(),
            )
        };
        let params = vec![
            Parameter::new("l", -5.0, 5.0, 0.0).unwrap(),
            Parameter::new("q", -5.0, 5.0, 0.0).unwrap(),
        ];
        let fit = least_squares(&res, &params, &FitOptions::default()).unwrap();
        assert!(fit.residual < 1e-10, "residual {}", fit.residual);
    }

    #[test]
    fn covariance_matches_linear_regression_oracle() {
        // Weighted linear model: covariance should equal (XᵀX)⁻¹σ² of OLS.
        let xs: Vec<f64> = (0..30).map(|i| 0.2 * i as f64).collect();
        let sigma = 0.1;
        let data: Vec<f64> = xs.iter().map(|x| 2.0 * x + 0.5).collect();
        let xs2 = xs.clone();
        let res = move |p: &[f64]| {
            Some(
                xs2.iter()
                    .zip(&data)
                    .map(|(x, d)| (p[0] * x + p[1] - d) / sigma)
                    .collect(),
            )
        };
        let params = vec![
            Parameter::new("slope", 0.0, 4.0, 1.0).unwrap(),
            Parameter::new("icept", -2.0, 2.0, 0.0).unwrap(),
        ];
        let fit = least_squares(&res, &params, &FitOptions::default()).unwrap();
        assert!(fit.covariance.is_some());
        assert!(fit.reduced_chi2.unwrap() < 1e-12);
    }
}
