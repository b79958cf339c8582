//! Equilibrium thermodynamics of discrete level spectra.
//!
//! Specific heat, magnetization and susceptibilities follow from canonical
//! Boltzmann averages over a [`LevelSet`]; the two-level Schottky peak
//! relations, the Debye lattice term and the hyperfine bound are the
//! closed-form companions used to read gaps off measured curves.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpinError};
use crate::spincore::{build_hamiltonian, diagonalize, FieldVector, LevelSet, SpinSystem};
use crate::units::{CM3_PER_MOL_PER_MUB_PER_TESLA, CURIE_CM3K_PER_MOL};

/// Strictly increasing temperatures, all positive (kelvin).
#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureGrid {
    temps: Vec<f64>,
}

impl TemperatureGrid {
    /// An empty grid is allowed and yields empty curves downstream.
    pub fn new(temps: Vec<f64>) -> Result<Self> {
        if temps.is_empty() {
            return Ok(TemperatureGrid { temps });
        }
        if temps[0] <= 0.0 || !temps[0].is_finite() {
            return Err(SpinError::InvalidParameter("temperatures must be positive".into()));
        }
        for w in temps.windows(2) {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return Err(SpinError::InvalidParameter(
                    "temperature grid must be strictly increasing".into(),
                ));
            }
        }
        Ok(TemperatureGrid { temps })
    }

    pub fn linear(t_min: f64, t_max: f64, n: usize) -> Result<Self> {
        if n < 2 || t_min <= 0.0 || t_max <= t_min {
            return Err(SpinError::InvalidParameter(format!(
                "bad linear grid: [{t_min}, {t_max}] with {n} points"
            )));
        }
        let step = (t_max - t_min) / (n - 1) as f64;
        TemperatureGrid::new((0..n).map(|i| t_min + step * i as f64).collect())
    }

    pub fn log(t_min: f64, t_max: f64, n: usize) -> Result<Self> {
        if n < 2 || t_min <= 0.0 || t_max <= t_min {
            return Err(SpinError::InvalidParameter(format!(
                "bad log grid: [{t_min}, {t_max}] with {n} points"
            )));
        }
        let (a, b) = (t_min.ln(), t_max.ln());
        let step = (b - a) / (n - 1) as f64;
        TemperatureGrid::new((0..n).map(|i| (a + step * i as f64).exp()).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.temps
    }

    pub fn len(&self) -> usize {
        self.temps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.temps.is_empty()
    }
}

/// Which observable a curve carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    SpecificHeat,
    Magnetization,
    ChiIsothermal,
    ChiVanVleck,
    ChiTProduct,
}

impl Observable {
    pub fn label(&self) -> &'static str {
        match self {
            Observable::SpecificHeat => "c_over_R",
            Observable::Magnetization => "M_muB",
            Observable::ChiIsothermal => "chi_T_cm3_mol",
            Observable::ChiVanVleck => "chi_S_cm3_mol",
            Observable::ChiTProduct => "chiT_cm3K_mol",
        }
    }
}

/// One simulated curve: abscissa (T in K, H in T, or angle in degrees),
/// values, and enough metadata to label the output file.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermoCurve {
    pub x: Vec<f64>,
    pub values: Vec<f64>,
    pub observable: Observable,
    /// Applied field magnitude in tesla, when meaningful.
    pub field_t: f64,
    /// Orientation scheme label, e.g. "single(0)" or "powder(350)".
    pub scheme: String,
}

impl ThermoCurve {
    pub fn new(
        x: Vec<f64>,
        values: Vec<f64>,
        observable: Observable,
        field_t: f64,
        scheme: impl Into<String>,
    ) -> Result<Self> {
        if x.len() != values.len() {
            return Err(SpinError::InvalidParameter(format!(
                "curve length mismatch: {} abscissa vs {} values",
                x.len(),
                values.len()
            )));
        }
        if observable == Observable::SpecificHeat && values.iter().any(|&v| v < -1e-12) {
            return Err(SpinError::InvalidParameter("specific heat must be non-negative".into()));
        }
        Ok(ThermoCurve { x, values, observable, field_t, scheme: scheme.into() })
    }

    /// Adds a constant to every value (e.g. a TIP contribution to χ).
    pub fn add_constant(&mut self, offset: f64) {
        for v in &mut self.values {
            *v += offset;
        }
    }

    /// Peak location refined by a local quadratic fit; `None` when the
    /// maximum sits on the grid boundary.
    pub fn peak(&self) -> Option<(f64, f64)> {
        peak_location(&self.x, &self.values)
    }
}

/// Quadratic-refined position of the maximum of y(x); `None` at boundaries.
pub fn peak_location(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    if x.len() != y.len() || x.len() < 3 {
        return None;
    }
    let mut k = 0;
    for (i, &v) in y.iter().enumerate() {
        if v > y[k] {
            k = i;
        }
    }
    if k == 0 || k == y.len() - 1 {
        return None;
    }
    let (x0, x1, x2) = (x[k - 1], x[k], x[k + 1]);
    let (y0, y1, y2) = (y[k - 1], y[k], y[k + 1]);
    // Lagrange parabola through the three bracketing points.
    let d0 = (x1 - x0) * (y1 - y2);
    let d2 = (x1 - x2) * (y1 - y0);
    let denom = d0 - d2;
    if denom.abs() < 1e-300 {
        return Some((x1, y1));
    }
    let xp = x1 - 0.5 * ((x1 - x0) * d0 - (x1 - x2) * d2) / denom;
    // Value of the same parabola at xp.
    let l0 = (xp - x1) * (xp - x2) / ((x0 - x1) * (x0 - x2));
    let l1 = (xp - x0) * (xp - x2) / ((x1 - x0) * (x1 - x2));
    let l2 = (xp - x0) * (xp - x1) / ((x2 - x0) * (x2 - x1));
    Some((xp, l0 * y0 + l1 * y1 + l2 * y2))
}

/// Boltzmann weights over ground-shifted energies; underflows cleanly to 0.
fn boltzmann_weights(energies: &[f64], t: f64) -> Vec<f64> {
    let mut w: Vec<f64> = energies.iter().map(|&e| (-e / t).exp()).collect();
    let z: f64 = w.iter().sum();
    for x in &mut w {
        *x /= z;
    }
    w
}

/// c/R at one temperature from energy fluctuations.
pub fn specific_heat_at(levels: &LevelSet, t: f64) -> f64 {
    let p = boltzmann_weights(levels.energies(), t);
    let mean: f64 = levels.energies().iter().zip(&p).map(|(&e, &w)| e * w).sum();
    let mean_sq: f64 = levels.energies().iter().zip(&p).map(|(&e, &w)| e * e * w).sum();
    ((mean_sq - mean * mean) / (t * t)).max(0.0)
}

/// Canonical specific heat c/R over a grid, exact for any level count.
pub fn specific_heat(levels: &LevelSet, grid: &TemperatureGrid) -> ThermoCurve {
    let values: Vec<f64> = grid.as_slice().iter().map(|&t| specific_heat_at(levels, t)).collect();
    ThermoCurve::new(grid.as_slice().to_vec(), values, Observable::SpecificHeat, 0.0, "levels")
        .expect("lengths match by construction")
}

/// Entropy S/R = ln Z + ⟨E⟩/T (shift-invariant).
pub fn entropy_over_r(levels: &LevelSet, t: f64) -> f64 {
    let w: Vec<f64> = levels.energies().iter().map(|&e| (-e / t).exp()).collect();
    let z: f64 = w.iter().sum();
    let mean: f64 =
        levels.energies().iter().zip(&w).map(|(&e, &x)| e * x).sum::<f64>() / z;
    z.ln() + mean / t
}

/// Root of y·tanh(y) = 1, bisected to full double precision.
pub fn schottky_root() -> f64 {
    static ROOT: OnceLock<f64> = OnceLock::new();
    *ROOT.get_or_init(|| {
        let f = |y: f64| y * y.tanh() - 1.0;
        let (mut lo, mut hi) = (1.0f64, 1.5f64);
        debug_assert!(f(lo) < 0.0 && f(hi) > 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-16 {
                break;
            }
        }
        0.5 * (lo + hi)
    })
}

/// Temperature of the two-level Schottky maximum for a gap Δ (kelvin):
/// k_B T₀ = Δ/(2y*) with y* the root of y·tanh(y) = 1, i.e. T₀ ≃ 0.42 Δ.
pub fn t0_from_gap(delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(SpinError::DomainError(format!("gap must be positive, got {delta}")));
    }
    Ok(delta / (2.0 * schottky_root()))
}

/// Exact inverse of [`t0_from_gap`], using the same root constant.
pub fn gap_from_t0(t0: f64) -> Result<f64> {
    if !(t0 > 0.0) {
        return Err(SpinError::DomainError(format!("T0 must be positive, got {t0}")));
    }
    Ok(t0 * 2.0 * schottky_root())
}

/// Signed magnetization along a fixed unit direction, at field h·dir.
/// Hellmann–Feynman form: Boltzmann average of ⟨i|μ̂·dir|i⟩, in μ_B.
pub(crate) fn magnetization_along(
    sys: &SpinSystem,
    dir: [f64; 3],
    h: f64,
    t: f64,
) -> Result<f64> {
    if !(t > 0.0) {
        return Err(SpinError::DomainError(format!("temperature must be positive, got {t}")));
    }
    let field = FieldVector::new(dir[0] * h, dir[1] * h, dir[2] * h)?;
    let levels = crate::spincore::levels_with_moments(sys, &field)?;
    let mu = levels.moment_along(dir)?;
    let p = boltzmann_weights(levels.energies(), t);
    Ok(p.iter().enumerate().map(|(i, &w)| w * mu[(i, i)].re).sum())
}

/// Equilibrium moment projected on the field direction, μ_B per molecule.
/// Returns 0 at zero field (no projection direction) by convention.
pub fn magnetization(sys: &SpinSystem, field: &FieldVector, t: f64) -> Result<f64> {
    match field.direction() {
        None => {
            if !(t > 0.0) {
                return Err(SpinError::DomainError(format!(
                    "temperature must be positive, got {t}"
                )));
            }
            Ok(0.0)
        }
        Some(dir) => magnetization_along(sys, dir, field.magnitude(), t),
    }
}

fn differentiation_direction(field: &FieldVector) -> [f64; 3] {
    // At exactly zero field the derivative direction defaults to z.
    field.direction().unwrap_or([0.0, 0.0, 1.0])
}

/// Isothermal susceptibility χ_T = ∂M/∂H by central finite difference,
/// cm³·mol⁻¹. Step is 1e-4·|H|, or 1e-5 T at zero field.
pub fn susceptibility_isothermal(sys: &SpinSystem, field: &FieldVector, t: f64) -> Result<f64> {
    let dir = differentiation_direction(field);
    let h = field.magnitude();
    let step = if h > 0.0 { 1e-4 * h } else { 1e-5 };
    let m_plus = magnetization_along(sys, dir, h + step, t)?;
    let m_minus = magnetization_along(sys, dir, h - step, t)?;
    Ok((m_plus - m_minus) / (2.0 * step) * CM3_PER_MOL_PER_MUB_PER_TESLA)
}

/// Groups level indices into quasi-degenerate clusters with the van Vleck
/// tolerance of 1e-7 K.
fn van_vleck_groups(energies: &[f64]) -> Vec<Vec<usize>> {
    const TOL: f64 = 1e-7;
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, &e) in energies.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if (e - energies[*g.last().unwrap()]).abs() <= TOL => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    groups
}

/// Van Vleck (adiabatic) susceptibility χ_S at frozen populations,
/// cm³·mol⁻¹: χ_S ∝ 2 Σ_i p_i Σ_{j≠i} |⟨i|μ̂_h|j⟩|²/(E_j−E_i).
///
/// Quasi-degenerate blocks (gaps < 1e-7 K) are first rotated so μ̂ is
/// diagonal inside each block; Kramers doublets then contribute no
/// singular terms.
pub fn susceptibility_vanvleck(sys: &SpinSystem, field: &FieldVector, t: f64) -> Result<f64> {
    susceptibility_vanvleck_opts(sys, field, t, true)
}

/// As [`susceptibility_vanvleck`], with degenerate-block handling optional.
/// With handling disabled, a quasi-degenerate pair carrying a nonzero
/// moment matrix element is reported as a singular-term error.
pub fn susceptibility_vanvleck_opts(
    sys: &SpinSystem,
    field: &FieldVector,
    t: f64,
    degenerate_handling: bool,
) -> Result<f64> {
    if !(t > 0.0) {
        return Err(SpinError::DomainError(format!("temperature must be positive, got {t}")));
    }
    let dir = differentiation_direction(field);
    let levels = crate::spincore::levels_with_moments(sys, field)?;
    let energies = levels.energies();
    let n = energies.len();
    let mut mu = levels.moment_along(dir)?;
    let groups = van_vleck_groups(energies);

    if degenerate_handling {
        // Diagonalize μ̂ inside each degenerate block (degenerate
        // perturbation theory); off-diagonal intra-block elements vanish.
        for g in &groups {
            if g.len() < 2 {
                continue;
            }
            let m = g.len();
            let mut block = crate::linalg::CMatrix::zeros(m, m);
            for (a, &i) in g.iter().enumerate() {
                for (b, &j) in g.iter().enumerate() {
                    block[(a, b)] = mu[(i, j)];
                }
            }
            let (_, w) = crate::linalg::hermitian_eigen(&block)?;
            // μ ← W† μ W on the block's rows/columns.
            let cols: Vec<_> = g.iter().map(|&j| mu.column(j).into_owned()).collect();
            for (b, &j) in g.iter().enumerate() {
                let mut new_col = nalgebra::DVector::zeros(n);
                for (a, col) in cols.iter().enumerate() {
                    new_col += col * w[(a, b)];
                }
                mu.set_column(j, &new_col);
            }
            let rows: Vec<_> = g.iter().map(|&i| mu.row(i).into_owned()).collect();
            for (b, &i) in g.iter().enumerate() {
                let mut new_row = nalgebra::RowDVector::zeros(n);
                for (a, row) in rows.iter().enumerate() {
                    new_row += row * w[(a, b)].conj();
                }
                mu.set_row(i, &new_row);
            }
        }
    }

    let group_of = {
        let mut idx = vec![0usize; n];
        for (gi, g) in groups.iter().enumerate() {
            for &i in g {
                idx[i] = gi;
            }
        }
        idx
    };
    let p = boltzmann_weights(energies, t);
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if group_of[i] == group_of[j] {
                if !degenerate_handling && i != j {
                    let m = mu[(i, j)].norm();
                    if m > 1e-10 {
                        return Err(SpinError::SingularTerm {
                            i,
                            j,
                            gap_kelvin: energies[j] - energies[i],
                            moment_mub: m,
                        });
                    }
                }
                continue;
            }
            let gap = energies[j] - energies[i];
            sum += p[i] * mu[(i, j)].norm_sqr() / gap;
        }
    }
    Ok(2.0 * CURIE_CM3K_PER_MOL * sum)
}

/// χ·T curve over a grid at fixed field, cm³·mol⁻¹·K, with an additive TIP.
pub fn chi_t_product_curve(
    sys: &SpinSystem,
    field: &FieldVector,
    grid: &TemperatureGrid,
    tip_cm3_mol: f64,
) -> Result<ThermoCurve> {
    let mut values = Vec::with_capacity(grid.len());
    for &t in grid.as_slice() {
        let chi = susceptibility_isothermal(sys, field, t)? + tip_cm3_mol;
        values.push(chi * t);
    }
    ThermoCurve::new(
        grid.as_slice().to_vec(),
        values,
        Observable::ChiTProduct,
        field.magnitude(),
        "single",
    )
}

/// Debye-model lattice specific heat per mole of atoms:
/// c/R = 9 (T/θ_D)³ ∫₀^{θ_D/T} x⁴eˣ/(eˣ−1)² dx.
pub fn debye_specific_heat(theta_d: f64, grid: &TemperatureGrid) -> Result<ThermoCurve> {
    if !(theta_d > 0.0) {
        return Err(SpinError::DomainError(format!(
            "Debye temperature must be positive, got {theta_d}"
        )));
    }
    let values: Vec<f64> = grid
        .as_slice()
        .iter()
        .map(|&t| {
            let u = theta_d / t;
            let integral = debye_integral(u);
            9.0 * integral / (u * u * u)
        })
        .collect();
    ThermoCurve::new(grid.as_slice().to_vec(), values, Observable::SpecificHeat, 0.0, "debye")
}

fn debye_integrand(x: f64) -> f64 {
    if x < 1e-6 {
        // x⁴eˣ/(eˣ−1)² → x² as x → 0.
        return x * x;
    }
    let s = (0.5 * x).sinh();
    x * x * x * x / (4.0 * s * s)
}

/// ∫₀^u x⁴eˣ/(eˣ−1)² dx by adaptive Simpson to 1e-8 relative accuracy.
fn debye_integral(u: f64) -> f64 {
    // The integrand decays as x⁴e⁻ˣ; beyond x = 60 the remainder is < 1e-18.
    let upper = u.min(60.0);
    adaptive_simpson(&debye_integrand, 0.0, upper, 1e-9, 24)
}

/// Recursive adaptive Simpson quadrature with relative tolerance.
pub(crate) fn adaptive_simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
    max_depth: u32,
) -> f64 {
    fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(a, fa, m, fm, flm);
        let right = simpson(m, fm, b, fb, frm);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol * (left + right).abs().max(1e-300) {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, flm, left, tol, depth - 1)
                + recurse(f, m, fm, b, fb, frm, right, tol, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = simpson(a, fa, b, fb, fm);
    recurse(f, a, fa, b, fb, fm, whole, rel_tol, max_depth)
}

/// Which hyperfine spectrum to use for the specific-heat bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HyperfineMode {
    /// Exact spectrum of A_hf S·I, dimension (2S+1)(2I+1).
    FullSpectrum,
    /// Hyperfine levels ±S·A_hf·m_I inside the m_S = ±S ground doublet.
    GroundDoubletProjected,
}

/// Specific-heat contribution of the hyperfine interaction alone. Used to
/// bound how much of a measured low-T anomaly nuclear spins can explain.
pub fn hyperfine_specific_heat_bound(
    a_kelvin: f64,
    spin: f64,
    nuclear_spin: f64,
    grid: &TemperatureGrid,
    mode: HyperfineMode,
) -> Result<ThermoCurve> {
    let levels = hyperfine_levels(a_kelvin, spin, nuclear_spin, mode)?;
    let mut curve = specific_heat(&levels, grid);
    curve.scheme = "hyperfine".into();
    Ok(curve)
}

fn hyperfine_levels(
    a_kelvin: f64,
    spin: f64,
    nuclear_spin: f64,
    mode: HyperfineMode,
) -> Result<LevelSet> {
    match mode {
        HyperfineMode::FullSpectrum => {
            let el = crate::spincore::spin_operators(spin)?;
            let nuc = crate::spincore::spin_operators(nuclear_spin)?;
            let h = (el.sx.kronecker(&nuc.sx)
                + el.sy.kronecker(&nuc.sy)
                + el.sz.kronecker(&nuc.sz))
            .map(|z| z * a_kelvin);
            diagonalize(&h)
        }
        HyperfineMode::GroundDoubletProjected => {
            let ni = (2.0 * nuclear_spin).round() as i64;
            let mut energies = Vec::with_capacity(2 * (ni as usize + 1));
            for k in 0..=ni {
                let m_i = nuclear_spin - k as f64;
                energies.push(a_kelvin * spin * m_i);
                energies.push(-a_kelvin * spin * m_i);
            }
            LevelSet::from_energies(energies)
        }
    }
}

/// Zero-field specific heat of a spin system over a grid (no orientation
/// average needed: H = 0 has no lab direction).
pub fn zero_field_specific_heat(sys: &SpinSystem, grid: &TemperatureGrid) -> Result<ThermoCurve> {
    let levels = diagonalize(&build_hamiltonian(sys, &FieldVector::ZERO)?)?;
    Ok(specific_heat(&levels, grid))
}
