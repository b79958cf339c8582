//! Spin-dynamics observables: Cole-Cole ac susceptibility, the direct +
//! Raman spin-lattice relaxation law 1/T₁ = A_dir·T + A_Raman·T⁴, and the
//! clock-transition Rabi frequency.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpinError};
use crate::fitting::{least_squares, FitOptions, Parameter};
use crate::units::MU_B_GHZ_PER_TESLA;

/// Cole-Cole model parameters. β = 1 is the Debye limit; β slightly below
/// one describes a narrow distribution of relaxation times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColeColeParams {
    /// Isothermal susceptibility χ_T, cm³·mol⁻¹.
    pub chi_t: f64,
    /// Adiabatic susceptibility χ_S, cm³·mol⁻¹.
    pub chi_s: f64,
    /// Average relaxation time, seconds.
    pub tau: f64,
    /// Width exponent, 0 < β ≤ 1.
    pub beta: f64,
}

impl ColeColeParams {
    pub fn new(chi_t: f64, chi_s: f64, tau: f64, beta: f64) -> Result<Self> {
        if !(chi_t >= chi_s && chi_s >= 0.0) {
            return Err(SpinError::InvalidParameter(format!(
                "need χ_T ≥ χ_S ≥ 0, got χ_T = {chi_t}, χ_S = {chi_s}"
            )));
        }
        if !(tau > 0.0) {
            return Err(SpinError::InvalidParameter(format!("τ must be positive, got {tau}")));
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(SpinError::InvalidParameter(format!("β must be in (0, 1], got {beta}")));
        }
        Ok(ColeColeParams { chi_t, chi_s, tau, beta })
    }
}

/// (χ′, χ″) at angular frequency ω (rad/s):
/// χ′ = χ_S + (χ_T−χ_S)(1 + xᵝcos(πβ/2)) / (1 + 2xᵝcos(πβ/2) + x²ᵝ),
/// χ″ = (χ_T−χ_S)·xᵝsin(πβ/2) / (1 + 2xᵝcos(πβ/2) + x²ᵝ), x = ωτ.
pub fn cole_cole_eval(p: &ColeColeParams, omega: f64) -> (f64, f64) {
    if omega == 0.0 {
        return (p.chi_t, 0.0);
    }
    let x = (omega * p.tau).powf(p.beta);
    let half = std::f64::consts::FRAC_PI_2 * p.beta;
    let (s, c) = (half.sin(), half.cos());
    let denom = 1.0 + 2.0 * x * c + x * x;
    let d_chi = p.chi_t - p.chi_s;
    (p.chi_s + d_chi * (1.0 + x * c) / denom, d_chi * x * s / denom)
}

/// One ac-susceptibility point: angular frequency ω and both components,
/// with an optional common σ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcPoint {
    pub omega: f64,
    pub chi_re: f64,
    pub chi_im: f64,
    pub sigma: Option<f64>,
}

/// Result of a Cole-Cole least-squares fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColeColeFit {
    pub params: ColeColeParams,
    pub fit: crate::fitting::FitResult,
    /// χ″ peak not bracketed by the frequency range: τ is poorly
    /// constrained and the confidence intervals widen accordingly.
    pub ill_conditioned: bool,
}

/// Joint least squares on (χ′, χ″). τ is fitted in log space; β is bounded
/// to [0.5, 1] with the 0.97 starting value typical of narrow
/// distributions; χ_T ≥ χ_S is enforced by fitting χ_S and Δχ = χ_T − χ_S.
pub fn cole_cole_fit(data: &[AcPoint], opts: &FitOptions) -> Result<ColeColeFit> {
    if data.len() < 4 {
        return Err(SpinError::InvalidParameter(
            "Cole-Cole fit needs at least 4 frequency points".into(),
        ));
    }
    if data.iter().any(|p| !(p.omega >= 0.0)) {
        return Err(SpinError::InvalidParameter("frequencies must be ≥ 0".into()));
    }
    let max_im = data.iter().map(|p| p.chi_im.abs()).fold(0.0, f64::max);
    if max_im == 0.0 {
        return Err(SpinError::FitFailure(
            "χ″ is identically zero: no dispersion, τ unidentifiable".into(),
        ));
    }
    let scale = data.iter().map(|p| p.chi_re.abs()).fold(0.0, f64::max).max(max_im);
    let omegas: Vec<f64> = data.iter().map(|p| p.omega).filter(|&w| w > 0.0).collect();
    let w_min = omegas.iter().cloned().fold(f64::INFINITY, f64::min);
    let w_max = omegas.iter().cloned().fold(0.0, f64::max);

    // χ″ maximum sitting on the edge of the frequency window means the
    // peak is not bracketed.
    let peak_idx = data
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.chi_im.partial_cmp(&b.1.chi_im).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let ill_conditioned = peak_idx == 0 || peak_idx == data.len() - 1;
    if ill_conditioned {
        log::warn!("χ″ peak not bracketed by the measured frequency window");
    }

    let params = vec![
        Parameter::new("chi_s", 0.0, 2.0 * scale, 0.1 * scale)?,
        Parameter::new("d_chi", 0.0, 4.0 * scale, scale)?,
        Parameter::new("log10_tau", (1.0 / (50.0 * w_max)).log10(), (50.0 / w_min).log10(), (1.0 / w_max.max(1e-30)).log10() + 1.0)?,
        Parameter::new("beta", 0.5, 1.0, 0.97)?,
    ];
    let pts = data.to_vec();
    let residual = move |x: &[f64]| -> Option<Vec<f64>> {
        let p = ColeColeParams {
            chi_s: x[0],
            chi_t: x[0] + x[1],
            tau: 10f64.powf(x[2]),
            beta: x[3],
        };
        let mut out = Vec::with_capacity(2 * pts.len());
        for d in &pts {
            let (re, im) = cole_cole_eval(&p, d.omega);
            let s = d.sigma.unwrap_or(1.0);
            out.push((re - d.chi_re) / s);
            out.push((im - d.chi_im) / s);
        }
        Some(out)
    };
    let fit = least_squares(&residual, &params, opts)?;
    let best = ColeColeParams::new(
        fit.best[0] + fit.best[1],
        fit.best[0],
        10f64.powf(fit.best[2]),
        fit.best[3],
    )?;
    Ok(ColeColeFit { params: best, fit, ill_conditioned })
}

/// Direct + Raman relaxation coefficients: 1/T₁ = A_dir·T + A_Raman·T⁴.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct T1Model {
    /// Direct-process coefficient, s⁻¹·K⁻¹.
    pub a_dir: f64,
    /// Raman coefficient, s⁻¹·K⁻⁴.
    pub a_raman: f64,
}

impl T1Model {
    pub fn new(a_dir: f64, a_raman: f64) -> Result<Self> {
        if a_dir < 0.0 || a_raman < 0.0 {
            return Err(SpinError::InvalidParameter("rate coefficients must be ≥ 0".into()));
        }
        Ok(T1Model { a_dir, a_raman })
    }
}

/// T₁(T) in seconds. Returns +∞ when both coefficients vanish (no
/// relaxation channel).
pub fn t1_eval(m: &T1Model, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(SpinError::DomainError(format!("temperature must be positive, got {t}")));
    }
    let rate = m.a_dir * t + m.a_raman * t.powi(4);
    Ok(if rate == 0.0 { f64::INFINITY } else { 1.0 / rate })
}

/// T₁ fit report; negative best-fit coefficients are clipped to zero and
/// flagged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct T1Fit {
    pub model: T1Model,
    /// 1σ uncertainties (A_dir, A_Raman) from the weighted normal matrix.
    pub sigma: (f64, f64),
    pub clipped: bool,
}

/// Linear least squares in the rate domain: 1/T₁ against the {T, T⁴}
/// basis, with optional per-point weights on T₁.
pub fn t1_fit(data: &[(f64, f64)], sigma_t1: Option<&[f64]>) -> Result<T1Fit> {
    if data.len() < 3 {
        return Err(SpinError::InvalidParameter("T₁ fit needs at least 3 temperatures".into()));
    }
    if let Some(s) = sigma_t1 {
        if s.len() != data.len() || s.iter().any(|&x| !(x > 0.0)) {
            return Err(SpinError::InvalidParameter("bad σ array".into()));
        }
    }
    // Rate-domain weights: σ_rate = σ_T1 / T1².
    let mut s11 = 0.0;
    let mut s14 = 0.0;
    let mut s44 = 0.0;
    let mut b1 = 0.0;
    let mut b4 = 0.0;
    for (i, &(t, t1)) in data.iter().enumerate() {
        if !(t > 0.0 && t1 > 0.0) {
            return Err(SpinError::InvalidParameter(format!("bad point (T={t}, T1={t1})")));
        }
        let rate = 1.0 / t1;
        let w = match sigma_t1 {
            Some(s) => {
                let sr = s[i] / (t1 * t1);
                1.0 / (sr * sr)
            }
            None => 1.0,
        };
        let (x1, x4) = (t, t.powi(4));
        s11 += w * x1 * x1;
        s14 += w * x1 * x4;
        s44 += w * x4 * x4;
        b1 += w * x1 * rate;
        b4 += w * x4 * rate;
    }
    let det = s11 * s44 - s14 * s14;
    if det.abs() < 1e-300 {
        return Err(SpinError::FitFailure("degenerate T/T⁴ design matrix".into()));
    }
    let mut a_dir = (s44 * b1 - s14 * b4) / det;
    let mut a_raman = (s11 * b4 - s14 * b1) / det;
    let mut clipped = false;
    if a_dir < 0.0 {
        clipped = true;
        log::warn!("A_dir fitted negative ({a_dir:.3e}); clipping to 0");
        a_dir = 0.0;
        a_raman = (b4 / s44).max(0.0);
    } else if a_raman < 0.0 {
        clipped = true;
        log::warn!("A_Raman fitted negative ({a_raman:.3e}); clipping to 0");
        a_raman = 0.0;
        a_dir = (b1 / s11).max(0.0);
    }
    let sigma = ((s44 / det).max(0.0).sqrt(), (s11 / det).max(0.0).sqrt());
    Ok(T1Fit { model: T1Model { a_dir, a_raman }, sigma, clipped })
}

/// Rabi frequency of the clock transition under a resonant drive with
/// component b_z along the anisotropy axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RabiFrequency {
    /// Linear frequency Ω_R/2π, Hz.
    pub linear_hz: f64,
    /// Angular frequency Ω_R, rad/s.
    pub angular_rad_s: f64,
}

/// Ω_R ≈ 2 g μ_B b_z S / ħ between the tunnel-split states.
pub fn rabi_frequency(g: f64, b_z: f64, spin: f64) -> Result<RabiFrequency> {
    if !(b_z > 0.0) {
        return Err(SpinError::DomainError(format!("drive amplitude must be positive, got {b_z}")));
    }
    let linear_hz = 2.0 * g * spin * b_z * MU_B_GHZ_PER_TESLA * 1e9;
    Ok(RabiFrequency { linear_hz, angular_rad_s: 2.0 * std::f64::consts::PI * linear_hz })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn debye() -> ColeColeParams {
        ColeColeParams::new(1.0, 0.2, 1e-4, 1.0).unwrap()
    }

    #[test]
    fn static_and_adiabatic_limits() {
        let p = debye();
        let (re, im) = cole_cole_eval(&p, 0.0);
        assert_eq!((re, im), (p.chi_t, 0.0));
        let (re, im) = cole_cole_eval(&p, 1e12);
        assert_relative_eq!(re, p.chi_s, max_relative = 1e-6);
        assert!(im.abs() < 1e-6);
    }

    #[test]
    fn debye_peak_at_omega_tau_one() {
        let p = debye();
        let (_, im) = cole_cole_eval(&p, 1.0 / p.tau);
        assert_relative_eq!(im, (p.chi_t - p.chi_s) / 2.0, max_relative = 1e-12);
        // It is the maximum.
        for &f in &[0.3, 0.7, 1.5, 3.0] {
            let (_, other) = cole_cole_eval(&p, f / p.tau);
            assert!(other <= im + 1e-15);
        }
    }

    #[test]
    fn chi_im_nonnegative() {
        let p = ColeColeParams::new(0.8, 0.1, 3e-3, 0.7).unwrap();
        for i in 0..200 {
            let w = 10f64.powf(-2.0 + 8.0 * i as f64 / 200.0);
            let (_, im) = cole_cole_eval(&p, w);
            assert!(im >= 0.0);
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(ColeColeParams::new(0.5, 0.6, 1e-4, 1.0).is_err());
        assert!(ColeColeParams::new(1.0, 0.2, 0.0, 1.0).is_err());
        assert!(ColeColeParams::new(1.0, 0.2, 1e-4, 1.5).is_err());
        assert!(ColeColeParams::new(1.0, 0.2, 1e-4, 0.0).is_err());
    }

    #[test]
    fn kramers_kronig_consistency_for_debye() {
        // χ′(ω) − χ_S = (2/π) PV ∫₀^∞ x·χ″(x)/(x²−ω²) dx, checked at a few
        // frequencies with the smooth-subtraction form of the PV integral.
        let p = debye();
        for &w in &[0.3 / p.tau, 1.0 / p.tau, 4.0 / p.tau] {
            let chi_im = |x: f64| cole_cole_eval(&p, x).1;
            let target = chi_im(w);
            let integrand = |x: f64| {
                if (x - w).abs() < 1e-300 {
                    return 0.0;
                }
                (x * chi_im(x) - w * target) / (x * x - w * w)
            };
            // Dense log grid over ±4 decades around ω.
            let n = 20_000;
            let (a, b) = ((w * 1e-4f64).ln(), (w * 1e4f64).ln());
            let mut integral = 0.0;
            let mut prev_x = a.exp();
            let mut prev_f = integrand(prev_x) * prev_x;
            for i in 1..=n {
                let x = (a + (b - a) * i as f64 / n as f64).exp();
                let f = integrand(x) * x; // d x = x d(ln x)
                integral += 0.5 * (f + prev_f) * ((x / prev_x).ln());
                prev_x = x;
                prev_f = f;
            }
            let chi_re_kk = p.chi_s + 2.0 / std::f64::consts::PI * integral;
            let chi_re = cole_cole_eval(&p, w).0;
            assert!(
                (chi_re_kk - chi_re).abs() <= 0.01 * (chi_re - p.chi_s).abs().max(1e-4),
                "ω = {w}: KK {chi_re_kk} vs direct {chi_re}"
            );
        }
    }

    fn synthesize(p: &ColeColeParams, n: usize, noise: f64, seed: u64) -> Vec<AcPoint> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| {
                let w = 10f64.powf(
                    (1.0 / p.tau).log10() - 2.0 + 4.0 * i as f64 / (n - 1) as f64,
                );
                let (re, im) = cole_cole_eval(p, w);
                let eps = |r: &mut ChaCha8Rng| {
                    if noise == 0.0 {
                        0.0
                    } else {
                        noise * (r.gen::<f64>() - 0.5) * 2.0
                    }
                };
                AcPoint {
                    omega: w,
                    chi_re: re * (1.0 + eps(&mut rng)),
                    chi_im: im * (1.0 + eps(&mut rng)),
                    sigma: None,
                }
            })
            .collect()
    }

    #[test]
    fn noiseless_cole_cole_round_trip() {
        let truth = ColeColeParams::new(1.0, 0.2, 1e-4, 0.97).unwrap();
        let data = synthesize(&truth, 20, 0.0, 0);
        let fitted = cole_cole_fit(&data, &FitOptions::default()).unwrap();
        assert!(!fitted.ill_conditioned);
        assert_relative_eq!(fitted.params.chi_t, truth.chi_t, max_relative = 0.01);
        assert_relative_eq!(fitted.params.chi_s, truth.chi_s, max_relative = 0.01);
        assert_relative_eq!(fitted.params.tau, truth.tau, max_relative = 0.01);
        assert_relative_eq!(fitted.params.beta, truth.beta, max_relative = 0.01);
    }

    #[test]
    fn noisy_cole_cole_tau_within_five_percent() {
        // 1% uniform noise, 100 trials: τ recovered within 5%.
        let truth = ColeColeParams::new(1.0, 0.2, 1e-4, 0.97).unwrap();
        let opts = FitOptions { starts: 6, ..FitOptions::default() };
        for trial in 0..100 {
            let data = synthesize(&truth, 20, 0.01, 1000 + trial);
            let fitted = cole_cole_fit(&data, &opts).unwrap();
            assert!(
                (fitted.params.tau - truth.tau).abs() <= 0.05 * truth.tau,
                "trial {trial}: τ = {}",
                fitted.params.tau
            );
        }
    }

    #[test]
    fn cole_cole_scale_equivariance() {
        let truth = ColeColeParams::new(0.9, 0.15, 2e-4, 0.9).unwrap();
        let data = synthesize(&truth, 16, 0.0, 0);
        let scaled: Vec<AcPoint> = data
            .iter()
            .map(|p| AcPoint { chi_re: 3.0 * p.chi_re, chi_im: 3.0 * p.chi_im, ..*p })
            .collect();
        let a = cole_cole_fit(&data, &FitOptions::default()).unwrap();
        let b = cole_cole_fit(&scaled, &FitOptions::default()).unwrap();
        assert_relative_eq!(b.params.chi_t, 3.0 * a.params.chi_t, max_relative = 1e-6);
        assert_relative_eq!(b.params.chi_s, 3.0 * a.params.chi_s, max_relative = 1e-5);
        assert_relative_eq!(b.params.tau, a.params.tau, max_relative = 1e-6);
        assert_relative_eq!(b.params.beta, a.params.beta, max_relative = 1e-6);
    }

    #[test]
    fn flat_chi_im_is_flagged() {
        let data: Vec<AcPoint> = (0..10)
            .map(|i| AcPoint {
                omega: 10f64.powi(i),
                chi_re: 1.0,
                chi_im: 0.0,
                sigma: None,
            })
            .collect();
        assert!(matches!(
            cole_cole_fit(&data, &FitOptions::default()),
            Err(SpinError::FitFailure(_))
        ));
    }

    #[test]
    fn unbracketed_peak_is_ill_conditioned() {
        // Only the low-frequency flank: χ″ still rising at the window edge.
        let truth = ColeColeParams::new(1.0, 0.2, 1e-4, 1.0).unwrap();
        let data: Vec<AcPoint> = (0..8)
            .map(|i| {
                let w = 10f64.powf(1.0 + 0.3 * i as f64);
                let (re, im) = cole_cole_eval(&truth, w);
                AcPoint { omega: w, chi_re: re, chi_im: im, sigma: None }
            })
            .collect();
        let fitted = cole_cole_fit(&data, &FitOptions::default()).unwrap();
        assert!(fitted.ill_conditioned);
    }

    #[test]
    fn t1_scaling_laws() {
        // Pure Raman: halving T multiplies T₁ by 16.
        let raman = T1Model::new(0.0, 300.0).unwrap();
        let r = t1_eval(&raman, 2.0).unwrap() / t1_eval(&raman, 4.0).unwrap();
        assert_relative_eq!(r, 16.0, max_relative = 1e-12);
        // Pure direct: doubling T halves T₁.
        let direct = T1Model::new(10.0, 0.0).unwrap();
        let r = t1_eval(&direct, 2.0).unwrap() / t1_eval(&direct, 4.0).unwrap();
        assert_relative_eq!(r, 2.0, max_relative = 1e-12);
        // No channel → infinite T₁.
        let none = T1Model::new(0.0, 0.0).unwrap();
        assert!(t1_eval(&none, 2.0).unwrap().is_infinite());
    }

    #[test]
    fn raman_dominated_magnitude_at_2k() {
        // A_dir = 10 s⁻¹K⁻¹, A_Raman = 600 s⁻¹K⁻⁴ → T₁(2 K) ≈ 100 μs.
        let m = T1Model::new(10.0, 600.0).unwrap();
        let t1 = t1_eval(&m, 2.0).unwrap();
        assert!((3e-5..3e-4).contains(&t1), "T₁(2 K) = {t1}");
        // High-T log-log slope of the rate → 4.
        let slope = ((1.0 / t1_eval(&m, 40.0).unwrap()) / (1.0 / t1_eval(&m, 20.0).unwrap()))
            .ln()
            / 2f64.ln();
        assert_relative_eq!(slope, 4.0, epsilon = 0.01);
    }

    #[test]
    fn t1_fit_round_trips() {
        let truth = T1Model::new(10.0, 300.0).unwrap();
        let data: Vec<(f64, f64)> = (0..9)
            .map(|i| {
                let t = 2.0 + 0.5 * i as f64;
                (t, t1_eval(&truth, t).unwrap())
            })
            .collect();
        let fit = t1_fit(&data, None).unwrap();
        assert!(!fit.clipped);
        assert_relative_eq!(fit.model.a_dir, truth.a_dir, max_relative = 1e-9);
        assert_relative_eq!(fit.model.a_raman, truth.a_raman, max_relative = 1e-9);

        // Pure Raman data: A_dir comes out zero (possibly clipped to it).
        let raman = T1Model::new(0.0, 250.0).unwrap();
        let data: Vec<(f64, f64)> =
            (0..7).map(|i| { let t = 1.5 + 0.7 * i as f64; (t, t1_eval(&raman, t).unwrap()) }).collect();
        let fit = t1_fit(&data, None).unwrap();
        assert!(fit.model.a_dir.abs() < 1e-8 * fit.model.a_raman);
        assert_relative_eq!(fit.model.a_raman, 250.0, max_relative = 1e-9);
    }

    #[test]
    fn rabi_examples() {
        // b_z = 1 mT, g = 2, S = 1 → 5.60×10⁷ Hz (≈ 18 ns π-rotations),
        // orders of magnitude below the claim-level GHz but the formula
        // value is what ships.
        let r = rabi_frequency(2.0, 1e-3, 1.0).unwrap();
        assert_relative_eq!(r.linear_hz, 5.60e7, max_relative = 2e-3);
        assert_relative_eq!(r.angular_rad_s, 2.0 * std::f64::consts::PI * r.linear_hz, max_relative = 1e-12);

        let doubled = rabi_frequency(2.0, 2e-3, 1.0).unwrap();
        assert_relative_eq!(doubled.linear_hz, 2.0 * r.linear_hz, max_relative = 1e-12);

        assert_eq!(rabi_frequency(2.0, 1e-3, 0.0).unwrap().linear_hz, 0.0);
        assert!(rabi_frequency(2.0, 0.0, 1.0).is_err());
    }
}
