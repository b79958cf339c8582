//! Lab-frame ↔ molecular-frame handling for oriented ensembles.
//!
//! The g tensor stays diagonal in the molecular frame; orientation effects
//! enter by rotating the applied field into each molecule's frame and
//! averaging the resulting observables. Supported ensembles: a single fixed
//! angle, easy axes spread in a cone about the field, a deterministic
//! random powder (Fibonacci lattice), the four symmetry-related sites of a
//! P2₁/n crystal, and a field-rotation sweep about the ab-plane normal.

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SpinError};
use crate::spincore::{build_hamiltonian, diagonalize, FieldVector, SpinSystem};
use crate::thermo::{
    specific_heat_at, ThermoCurve, Observable, TemperatureGrid,
};
use crate::units::CM3_PER_MOL_PER_MUB_PER_TESLA;

const GOLDEN_ANGLE: f64 = 2.399963229728653; // 2π(2 − φ)

/// Point-group operation of the crystal, an orthogonal 3×3 matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryOp {
    pub matrix: Matrix3<f64>,
    pub label: SymmetryLabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryLabel {
    Identity,
    Inversion,
    C2B,
    MirrorAc,
}

impl SymmetryOp {
    pub fn new(matrix: Matrix3<f64>, label: SymmetryLabel) -> Result<Self> {
        let gram = matrix.transpose() * matrix;
        let defect = (gram - Matrix3::identity()).abs().max();
        if defect > 1e-12 {
            return Err(SpinError::InvalidParameter(format!(
                "symmetry op {label:?} is not orthogonal (defect {defect:.2e})"
            )));
        }
        let det = matrix.determinant();
        if (det.abs() - 1.0).abs() > 1e-12 {
            return Err(SpinError::InvalidParameter(format!(
                "symmetry op {label:?} has determinant {det}"
            )));
        }
        Ok(SymmetryOp { matrix, label })
    }
}

/// The four point operations of P2₁/n acting on vectors expressed along
/// (â, b̂, â×b̂): identity, inversion, 2-fold axis along b, mirror ac.
pub fn p21n_point_ops() -> Vec<SymmetryOp> {
    let ops = [
        (Matrix3::identity(), SymmetryLabel::Identity),
        (Matrix3::from_diagonal(&Vector3::new(-1.0, -1.0, -1.0)), SymmetryLabel::Inversion),
        (Matrix3::from_diagonal(&Vector3::new(-1.0, 1.0, -1.0)), SymmetryLabel::C2B),
        (Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, 1.0)), SymmetryLabel::MirrorAc),
    ];
    ops.into_iter()
        .map(|(m, l)| SymmetryOp::new(m, l).expect("builtin ops are orthogonal"))
        .collect()
}

/// How molecular frames are distributed relative to the lab field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case", deny_unknown_fields)]
pub enum OrientationScheme {
    /// Field at fixed polar/azimuthal angles in the molecular frame.
    Single {
        theta_deg: f64,
        #[serde(default)]
        phi_deg: f64,
    },
    /// Easy axes spread uniformly (in solid angle) within a cone of the
    /// given aperture about the field direction.
    Cone {
        aperture_deg: f64,
        #[serde(default = "default_points")]
        n: usize,
    },
    /// Deterministic quasi-uniform sphere sampling (Fibonacci lattice).
    Powder {
        #[serde(default = "default_points")]
        n: usize,
    },
    /// Four P2₁/n-related molecular sites; the field vector is given in
    /// crystal coordinates (â, b̂, â×b̂).
    CrystalSites { easy_axis_polar_deg: f64 },
    /// Field rotating in the ab plane (crystal coordinates), observable
    /// evaluated per angle and averaged over the four sites.
    RotationSweep {
        easy_axis_polar_deg: f64,
        angles_deg: Vec<f64>,
    },
}

fn default_points() -> usize {
    350
}

impl OrientationScheme {
    pub fn label(&self) -> String {
        match self {
            OrientationScheme::Single { theta_deg, phi_deg } => {
                format!("single({theta_deg},{phi_deg})")
            }
            OrientationScheme::Cone { aperture_deg, n } => format!("cone({aperture_deg},{n})"),
            OrientationScheme::Powder { n } => format!("powder({n})"),
            OrientationScheme::CrystalSites { easy_axis_polar_deg } => {
                format!("crystal({easy_axis_polar_deg})")
            }
            OrientationScheme::RotationSweep { easy_axis_polar_deg, .. } => {
                format!("sweep({easy_axis_polar_deg})")
            }
        }
    }
}

/// Rotation whose third column is the unit vector at (θ, φ): it maps the
/// lab z axis onto that direction, so H_mol = Rᵀ·H_lab for a molecule whose
/// easy axis points along (θ, φ) in the lab.
fn rotation_for_direction(theta: f64, phi: f64) -> Matrix3<f64> {
    let (st, ct) = (theta.sin(), theta.cos());
    let (sp, cp) = (phi.sin(), phi.cos());
    Matrix3::from_columns(&[
        Vector3::new(ct * cp, ct * sp, -st),
        Vector3::new(-sp, cp, 0.0),
        Vector3::new(st * cp, st * sp, ct),
    ])
}

/// One ensemble member: H_mol = frame · H_lab, plus its weight.
pub type Orientation = (Matrix3<f64>, f64);

/// Expands a scheme into an explicit list of (frame, weight) pairs.
/// Weights are uniform and sum to 1.
pub fn generate_orientations(scheme: &OrientationScheme) -> Result<Vec<Orientation>> {
    match scheme {
        OrientationScheme::Single { theta_deg, phi_deg } => {
            let r = rotation_for_direction(theta_deg.to_radians(), phi_deg.to_radians());
            Ok(vec![(r.transpose(), 1.0)])
        }
        OrientationScheme::Cone { aperture_deg, n } => {
            if !(0.0..=90.0).contains(aperture_deg) {
                return Err(SpinError::DomainError(format!(
                    "cone aperture must lie in [0°, 90°], got {aperture_deg}"
                )));
            }
            if *n == 0 {
                return Err(SpinError::InvalidParameter("cone needs n ≥ 1".into()));
            }
            let aperture = aperture_deg.to_radians();
            if aperture == 0.0 {
                return Ok(vec![(Matrix3::identity(), 1.0)]);
            }
            let cap = 1.0 - aperture.cos();
            let w = 1.0 / *n as f64;
            Ok((0..*n)
                .map(|i| {
                    let u = 1.0 - cap * (i as f64 + 0.5) / *n as f64;
                    let theta = u.clamp(-1.0, 1.0).acos();
                    let phi = GOLDEN_ANGLE * i as f64;
                    (rotation_for_direction(theta, phi).transpose(), w)
                })
                .collect())
        }
        OrientationScheme::Powder { n } => {
            if *n == 0 {
                return Err(SpinError::InvalidParameter("powder needs n ≥ 1".into()));
            }
            let w = 1.0 / *n as f64;
            Ok((0..*n)
                .map(|i| {
                    let u = 1.0 - 2.0 * (i as f64 + 0.5) / *n as f64;
                    let theta = u.clamp(-1.0, 1.0).acos();
                    let phi = GOLDEN_ANGLE * i as f64;
                    (rotation_for_direction(theta, phi).transpose(), w)
                })
                .collect())
        }
        OrientationScheme::CrystalSites { easy_axis_polar_deg } => {
            let frames = crystal_site_frames(*easy_axis_polar_deg, &p21n_point_ops())?;
            let w = 1.0 / frames.len() as f64;
            Ok(frames.into_iter().map(|f| (f, w)).collect())
        }
        OrientationScheme::RotationSweep { easy_axis_polar_deg, .. } => {
            let frames = crystal_site_frames(*easy_axis_polar_deg, &p21n_point_ops())?;
            let w = 1.0 / frames.len() as f64;
            Ok(frames.into_iter().map(|f| (f, w)).collect())
        }
    }
}

/// Molecular frames of the four symmetry-related sites. The reference site
/// has its easy axis z in the ac plane, tilted by the given polar angle
/// from the ab-plane normal, and its y axis along b. Rows of each frame are
/// the molecular axes in crystal coordinates, so H_mol = F·H_crystal.
pub fn crystal_site_frames(
    easy_axis_polar_deg: f64,
    ops: &[SymmetryOp],
) -> Result<Vec<Matrix3<f64>>> {
    let t = easy_axis_polar_deg.to_radians();
    let z_mol = Vector3::new(t.sin(), 0.0, t.cos());
    let y_mol = Vector3::new(0.0, 1.0, 0.0);
    let x_mol = y_mol.cross(&z_mol);
    let base = Matrix3::from_rows(&[x_mol.transpose(), y_mol.transpose(), z_mol.transpose()]);
    ops.iter()
        .map(|op| {
            // Axis vectors transform as O·axis ⇒ frame rows pick up Oᵀ.
            SymmetryOp::new(op.matrix, op.label)?;
            Ok(base * op.matrix.transpose())
        })
        .collect()
}

/// Observables that can be orientation-averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AveragedObservable {
    SpecificHeat,
    Magnetization,
    ChiIsothermal,
    ChiVanVleck,
}

impl AveragedObservable {
    fn to_observable(self) -> Observable {
        match self {
            AveragedObservable::SpecificHeat => Observable::SpecificHeat,
            AveragedObservable::Magnetization => Observable::Magnetization,
            AveragedObservable::ChiIsothermal => Observable::ChiIsothermal,
            AveragedObservable::ChiVanVleck => Observable::ChiVanVleck,
        }
    }
}

fn field_in_frame(frame: &Matrix3<f64>, h_lab: &Vector3<f64>) -> Result<FieldVector> {
    let h = frame * h_lab;
    FieldVector::new(h.x, h.y, h.z)
}

/// Observable values over the temperature grid for one molecular-frame
/// field. Magnetization and χ are projected on the lab field direction.
fn observable_over_grid(
    sys: &SpinSystem,
    field: &FieldVector,
    observable: AveragedObservable,
    grid: &TemperatureGrid,
) -> Result<Vec<f64>> {
    match observable {
        AveragedObservable::SpecificHeat => {
            let levels = diagonalize(&build_hamiltonian(sys, field)?)?;
            Ok(grid.as_slice().iter().map(|&t| specific_heat_at(&levels, t)).collect())
        }
        AveragedObservable::Magnetization => {
            grid.as_slice()
                .iter()
                .map(|&t| crate::thermo::magnetization(sys, field, t))
                .collect()
        }
        AveragedObservable::ChiIsothermal => {
            // Two eigensolves per orientation, shared across the T grid.
            let dir = field.direction().unwrap_or([0.0, 0.0, 1.0]);
            let h = field.magnitude();
            let step = if h > 0.0 { 1e-4 * h } else { 1e-5 };
            let up = crate::spincore::levels_with_moments(
                sys,
                &FieldVector::new(dir[0] * (h + step), dir[1] * (h + step), dir[2] * (h + step))?,
            )?;
            let down = crate::spincore::levels_with_moments(
                sys,
                &FieldVector::new(dir[0] * (h - step), dir[1] * (h - step), dir[2] * (h - step))?,
            )?;
            let mu_up = up.moment_along(dir)?;
            let mu_down = down.moment_along(dir)?;
            Ok(grid
                .as_slice()
                .iter()
                .map(|&t| {
                    let m = |lv: &crate::spincore::LevelSet, mu: &crate::linalg::CMatrix| {
                        let w: Vec<f64> =
                            lv.energies().iter().map(|&e| (-e / t).exp()).collect();
                        let z: f64 = w.iter().sum();
                        w.iter().enumerate().map(|(i, &x)| x * mu[(i, i)].re).sum::<f64>() / z
                    };
                    (m(&up, &mu_up) - m(&down, &mu_down)) / (2.0 * step)
                        * CM3_PER_MOL_PER_MUB_PER_TESLA
                })
                .collect())
        }
        AveragedObservable::ChiVanVleck => grid
            .as_slice()
            .iter()
            .map(|&t| crate::thermo::susceptibility_vanvleck(sys, field, t))
            .collect(),
    }
}

/// Weighted orientation average of an observable over a temperature grid.
///
/// For `RotationSweep` the abscissa is the rotation angle in degrees
/// (evaluated at the first grid temperature, field magnitude |H_lab|,
/// rotating from â at 0° to b̂ at 90°); for every other scheme the abscissa
/// is temperature. Curves are averaged, never the gaps: effective gaps
/// should be read off the averaged curve's peak.
pub fn averaged_observable(
    sys: &SpinSystem,
    scheme: &OrientationScheme,
    observable: AveragedObservable,
    grid: &TemperatureGrid,
    h_lab: &FieldVector,
) -> Result<ThermoCurve> {
    if let OrientationScheme::RotationSweep { angles_deg, .. } = scheme {
        return rotation_sweep(sys, scheme, observable, angles_deg, grid, h_lab);
    }

    let lab = Vector3::new(h_lab.x, h_lab.y, h_lab.z);
    // Relative-to-field ensembles take only the field magnitude; the
    // distribution already encodes the direction statistics.
    let lab = match scheme {
        OrientationScheme::Single { .. }
        | OrientationScheme::Cone { .. }
        | OrientationScheme::Powder { .. } => Vector3::new(0.0, 0.0, h_lab.magnitude()),
        _ => lab,
    };
    let orientations = generate_orientations(scheme)?;
    let per: Vec<Result<Vec<f64>>> = orientations
        .par_iter()
        .map(|(frame, _)| {
            let field = field_in_frame(frame, &lab)?;
            observable_over_grid(sys, &field, observable, grid)
        })
        .collect();

    let mut values = vec![0.0; grid.len()];
    for ((_, w), row) in orientations.iter().zip(per) {
        let row = row?;
        for (acc, v) in values.iter_mut().zip(row) {
            *acc += w * v;
        }
    }
    ThermoCurve::new(
        grid.as_slice().to_vec(),
        values,
        observable.to_observable(),
        h_lab.magnitude(),
        scheme.label(),
    )
}

fn rotation_sweep(
    sys: &SpinSystem,
    scheme: &OrientationScheme,
    observable: AveragedObservable,
    angles_deg: &[f64],
    grid: &TemperatureGrid,
    h_lab: &FieldVector,
) -> Result<ThermoCurve> {
    if angles_deg.is_empty() {
        return Err(SpinError::InvalidParameter("rotation sweep needs angles".into()));
    }
    let t = grid.as_slice()[0];
    let h = h_lab.magnitude();
    let frames = generate_orientations(scheme)?;
    let single_t = TemperatureGrid::new(vec![t])?;
    let values: Vec<Result<f64>> = angles_deg
        .par_iter()
        .map(|a| {
            let rad = a.to_radians();
            let lab = Vector3::new(h * rad.cos(), h * rad.sin(), 0.0);
            let mut acc = 0.0;
            for (frame, w) in &frames {
                let field = field_in_frame(frame, &lab)?;
                acc += w * observable_over_grid(sys, &field, observable, &single_t)?[0];
            }
            Ok(acc)
        })
        .collect();
    let values = values.into_iter().collect::<Result<Vec<f64>>>()?;
    ThermoCurve::new(
        angles_deg.to_vec(),
        values,
        observable.to_observable(),
        h,
        scheme.label(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermo::{gap_from_t0, specific_heat, zero_field_specific_heat};
    use crate::units::cm1_to_kelvin;
    use approx::assert_relative_eq;

    fn complex4_like() -> SpinSystem {
        SpinSystem::new(1.0, cm1_to_kelvin(-2.96), cm1_to_kelvin(0.06), [2.16; 3]).unwrap()
    }

    #[test]
    fn cone_zero_aperture_is_single_axis() {
        let list = generate_orientations(&OrientationScheme::Cone { aperture_deg: 0.0, n: 50 })
            .unwrap();
        assert_eq!(list.len(), 1);
        assert_relative_eq!((list[0].0 - Matrix3::identity()).abs().max(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn cone_aperture_out_of_range() {
        assert!(generate_orientations(&OrientationScheme::Cone { aperture_deg: 120.0, n: 10 })
            .is_err());
        assert!(generate_orientations(&OrientationScheme::Cone { aperture_deg: -5.0, n: 10 })
            .is_err());
    }

    #[test]
    fn powder_mean_projection_vanishes() {
        for &n in &[100usize, 350, 1000] {
            let list = generate_orientations(&OrientationScheme::Powder { n }).unwrap();
            assert_eq!(list.len(), n);
            let mut mean = 0.0;
            for (frame, w) in &list {
                // ẑ_mol · ĥ where the lab field is along lab z.
                let h_mol = frame * Vector3::new(0.0, 0.0, 1.0);
                mean += w * h_mol.z;
            }
            assert!(
                mean.abs() < 3.0 / (n as f64).sqrt(),
                "n = {n}: |mean| = {}",
                mean.abs()
            );
        }
    }

    #[test]
    fn weights_sum_to_one() {
        for scheme in [
            OrientationScheme::Single { theta_deg: 52.6, phi_deg: 10.0 },
            OrientationScheme::Cone { aperture_deg: 30.0, n: 77 },
            OrientationScheme::Powder { n: 123 },
            OrientationScheme::CrystalSites { easy_axis_polar_deg: 52.6 },
        ] {
            let total: f64 =
                generate_orientations(&scheme).unwrap().iter().map(|(_, w)| w).sum();
            assert_relative_eq!(total, 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn full_cone_matches_random_powder() {
        let sys = complex4_like();
        let grid = TemperatureGrid::linear(0.4, 6.0, 60).unwrap();
        let h = FieldVector::along_z(1.0);
        let cone = averaged_observable(
            &sys,
            &OrientationScheme::Cone { aperture_deg: 90.0, n: 400 },
            AveragedObservable::SpecificHeat,
            &grid,
            &h,
        )
        .unwrap();
        let powder = averaged_observable(
            &sys,
            &OrientationScheme::Powder { n: 400 },
            AveragedObservable::SpecificHeat,
            &grid,
            &h,
        )
        .unwrap();
        for (a, b) in cone.values.iter().zip(&powder.values) {
            // Hemisphere ensemble vs full sphere: equal up to sampling error.
            assert!((a - b).abs() <= 0.02 * b.abs().max(0.01), "{a} vs {b}");
        }
    }

    #[test]
    fn single_orientation_equals_direct_call() {
        let sys = complex4_like();
        let grid = TemperatureGrid::linear(0.4, 6.0, 40).unwrap();
        let avg = averaged_observable(
            &sys,
            &OrientationScheme::Single { theta_deg: 0.0, phi_deg: 0.0 },
            AveragedObservable::SpecificHeat,
            &grid,
            &FieldVector::along_z(0.5),
        )
        .unwrap();
        let levels =
            diagonalize(&build_hamiltonian(&sys, &FieldVector::along_z(0.5)).unwrap()).unwrap();
        let direct = specific_heat(&levels, &grid);
        for (a, b) in avg.values.iter().zip(&direct.values) {
            assert_relative_eq!(a, b, max_relative = 1e-12, epsilon = 1e-14);
        }
    }

    #[test]
    fn isotropic_system_is_orientation_blind() {
        let sys = SpinSystem::new(1.0, 0.0, 0.0, [2.0; 3]).unwrap();
        let grid = TemperatureGrid::linear(0.5, 5.0, 20).unwrap();
        let h = FieldVector::along_z(1.0);
        let single = averaged_observable(
            &sys,
            &OrientationScheme::Single { theta_deg: 0.0, phi_deg: 0.0 },
            AveragedObservable::SpecificHeat,
            &grid,
            &h,
        )
        .unwrap();
        let powder = averaged_observable(
            &sys,
            &OrientationScheme::Powder { n: 64 },
            AveragedObservable::SpecificHeat,
            &grid,
            &h,
        )
        .unwrap();
        for (a, b) in single.values.iter().zip(&powder.values) {
            assert_relative_eq!(a, b, max_relative = 1e-10, epsilon = 1e-12);
        }
    }

    #[test]
    fn crystal_sites_field_along_b_equivalent() {
        let sys = complex4_like();
        let frames = crystal_site_frames(52.6, &p21n_point_ops()).unwrap();
        assert_eq!(frames.len(), 4);

        let check = |lab: Vector3<f64>, max_distinct: usize| {
            let mut spectra: Vec<Vec<f64>> = Vec::new();
            for f in &frames {
                let field = field_in_frame(f, &lab).unwrap();
                let levels =
                    diagonalize(&build_hamiltonian(&sys, &field).unwrap()).unwrap();
                spectra.push(levels.energies().to_vec());
            }
            let mut distinct: Vec<Vec<f64>> = Vec::new();
            'outer: for s in spectra {
                for d in &distinct {
                    if s.iter().zip(d).all(|(a, b)| (a - b).abs() < 1e-10) {
                        continue 'outer;
                    }
                }
                distinct.push(s);
            }
            assert!(
                distinct.len() <= max_distinct,
                "{} distinct spectra for field {:?}",
                distinct.len(),
                lab
            );
        };

        // Field along b: all four sites identical.
        check(Vector3::new(0.0, 0.8, 0.0), 1);
        // Field in the ac plane: identical.
        check(Vector3::new(0.5, 0.0, 0.9), 1);
        // Generic direction: inversion pairs always coincide.
        check(Vector3::new(0.4, 0.5, 0.6), 2);
    }

    #[test]
    fn non_orthogonal_op_rejected() {
        let mut m = Matrix3::identity();
        m[(0, 1)] = 0.1;
        assert!(SymmetryOp::new(m, SymmetryLabel::Identity).is_err());
    }

    #[test]
    fn rotation_sweep_period_and_extrema() {
        // Complex-4-like crystal: M(θ) minimal along b (90°), maximal
        // along a (0°), with 180° periodicity.
        let sys = complex4_like();
        let angles: Vec<f64> = (0..=36).map(|i| i as f64 * 10.0).collect();
        let grid = TemperatureGrid::new(vec![5.0]).unwrap();
        let sweep = averaged_observable(
            &sys,
            &OrientationScheme::RotationSweep {
                easy_axis_polar_deg: 52.6,
                angles_deg: angles.clone(),
            },
            AveragedObservable::Magnetization,
            &grid,
            &FieldVector::new(0.1, 0.0, 0.0).unwrap(),
        )
        .unwrap();
        let m = &sweep.values;
        let at = |deg: f64| m[(deg / 10.0).round() as usize];
        // 180° period.
        for i in 0..18 {
            assert_relative_eq!(m[i], m[i + 18], max_relative = 1e-9);
        }
        // Extrema at the crystal axes.
        let min = m.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = m.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_relative_eq!(at(90.0), min, max_relative = 1e-9);
        assert_relative_eq!(at(0.0), max, max_relative = 1e-9);
        assert!(max > min * 1.05, "sweep should modulate: {min}..{max}");
    }

    #[test]
    fn effective_gap_from_single_angle_curve() {
        // Peak of the averaged curve → gap via 0.417 relation must
        // reproduce the aligned-field construction when the scheme is a
        // single angle.
        let sys =
            SpinSystem::new(1.0, cm1_to_kelvin(-100.0), cm1_to_kelvin(1.45), [2.2; 3]).unwrap();
        let grid = TemperatureGrid::linear(0.8, 6.0, 1500).unwrap();
        let curve = averaged_observable(
            &sys,
            &OrientationScheme::Single { theta_deg: 0.0, phi_deg: 0.0 },
            AveragedObservable::SpecificHeat,
            &grid,
            &FieldVector::along_z(1.0),
        )
        .unwrap();
        let (t_peak, _) = curve.peak().unwrap();
        let gap = gap_from_t0(t_peak).unwrap();
        let expect = crate::spincore::zeeman_gap(&sys, 1.0);
        assert_relative_eq!(gap, expect, max_relative = 5e-3);
    }

    #[test]
    fn zero_field_powder_average_is_trivial() {
        let sys = complex4_like();
        let grid = TemperatureGrid::linear(0.4, 6.0, 30).unwrap();
        let avg = averaged_observable(
            &sys,
            &OrientationScheme::Powder { n: 16 },
            AveragedObservable::SpecificHeat,
            &grid,
            &FieldVector::ZERO,
        )
        .unwrap();
        let direct = zero_field_specific_heat(&sys, &grid).unwrap();
        for (a, b) in avg.values.iter().zip(&direct.values) {
            assert_relative_eq!(a, b, max_relative = 1e-10, epsilon = 1e-13);
        }
    }

    #[test]
    fn scheme_json_round_trip() {
        let json = r#"{"scheme":"cone","aperture_deg":30.0,"n":350}"#;
        let scheme: OrientationScheme = serde_json::from_str(json).unwrap();
        assert_eq!(scheme, OrientationScheme::Cone { aperture_deg: 30.0, n: 350 });
        assert!(serde_json::from_str::<OrientationScheme>(
            r#"{"scheme":"cone","aperture_deg":30.0,"bogus":1}"#
        )
        .is_err());
        let json = r#"{"scheme":"crystal_sites","easy_axis_polar_deg":52.6}"#;
        assert!(serde_json::from_str::<OrientationScheme>(json).is_ok());
    }
}
