//! Published parameter sets for the three studied complexes.
//!
//! Only values stated in the source study are encoded; placeholders (the
//! axial D and g of complex 1 are cited to earlier EPR work without being
//! restated) are listed in `assumed` and chosen large enough to push the
//! m_S = 0 Schottky far above the measured window.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpinError};
use crate::spincore::SpinSystem;
use crate::units::cm1_to_kelvin;

/// A named parameter set plus the companion quantities used by the
/// reproduction commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub name: String,
    pub system: SpinSystem,
    /// Parameter names whose values are placeholders, not published fits.
    pub assumed: Vec<String>,
    /// Intermolecular coupling J (kelvin) for the crystal lattice.
    pub lattice_coupling_kelvin: Option<f64>,
    /// Effective Ising moment of the low doublet for Monte Carlo runs.
    pub m_eff: Option<f64>,
    /// Temperature-independent paramagnetism, cm³·mol⁻¹.
    pub tip_cm3_mol: Option<f64>,
    /// Easy-axis polar angle from the ab-plane normal, degrees.
    pub easy_axis_polar_deg: Option<f64>,
    /// Debye temperature of the lattice term, kelvin.
    pub debye_theta_kelvin: Option<f64>,
}

fn base(name: &str, system: SpinSystem) -> Preset {
    Preset {
        name: name.into(),
        system,
        assumed: Vec::new(),
        lattice_coupling_kelvin: None,
        m_eff: None,
        tip_cm3_mol: None,
        easy_axis_polar_deg: None,
        debye_theta_kelvin: None,
    }
}

/// S = 1 Ni complex with the large easy-axis anisotropy and Δ = 2E =
/// 2.9 cm⁻¹. D and g are placeholders (`assumed`): D = −100 cm⁻¹ keeps the
/// m_S = 0 anomaly above 40 K as required, g = 2.2.
pub fn complex1() -> Preset {
    let system = SpinSystem::new(
        1.0,
        cm1_to_kelvin(-100.0),
        cm1_to_kelvin(1.45),
        [2.2, 2.2, 2.2],
    )
    .expect("static preset");
    let mut p = base("complex1", system);
    p.assumed = vec!["D".into(), "g".into()];
    p.debye_theta_kelvin = Some(72.0);
    p.lattice_coupling_kelvin = Some(cm1_to_kelvin(-0.035));
    p.m_eff = Some(1.0);
    p
}

/// S = 3/2 Co Kramers analogue: D = −8.31 cm⁻¹, E ≈ 0, intermolecular
/// J = −0.035 cm⁻¹ acting on the ±3/2 doublet, hyperfine A_hf = 14 mK to
/// the I = 7/2 nucleus. g is not restated in the source (assumed 2.0).
pub fn complex2() -> Preset {
    let system = SpinSystem::new(1.5, cm1_to_kelvin(-8.31), 0.0, [2.0, 2.0, 2.0])
        .expect("static preset")
        .with_hyperfine(0.014, 3.5)
        .expect("static preset");
    let mut p = base("complex2", system);
    p.assumed = vec!["g".into()];
    p.lattice_coupling_kelvin = Some(cm1_to_kelvin(-0.035));
    p.m_eff = Some(1.5);
    p.debye_theta_kelvin = Some(72.0);
    p
}

/// Octahedral S = 1 complex, magnetometry branch: D = −2.96 cm⁻¹,
/// |E| = 0.06 cm⁻¹, g = 2.16, TIP = 1e-4 cm³·mol⁻¹, easy axis at 52.6°
/// from the ab-plane normal.
pub fn complex4() -> Preset {
    let system = SpinSystem::new(
        1.0,
        cm1_to_kelvin(-2.96),
        cm1_to_kelvin(0.06),
        [2.16, 2.16, 2.16],
    )
    .expect("static preset");
    let mut p = base("complex4", system);
    p.tip_cm3_mol = Some(1e-4);
    p.easy_axis_polar_deg = Some(52.6);
    p
}

/// Complex 4, heat-capacity branch: D ≈ −2.71 cm⁻¹ with Δ = 2E ≈
/// 0.21 cm⁻¹ read off the low-T anomaly. Same g, TIP and axis direction.
pub fn complex4_heatcap() -> Preset {
    let system = SpinSystem::new(
        1.0,
        cm1_to_kelvin(-2.71),
        cm1_to_kelvin(0.105),
        [2.16, 2.16, 2.16],
    )
    .expect("static preset");
    let mut p = base("complex4_hc", system);
    p.tip_cm3_mol = Some(1e-4);
    p.easy_axis_polar_deg = Some(52.6);
    p
}

/// Complex 4, the positive-D local minimum of the powder magnetization
/// fit: D = +2.11 cm⁻¹, |E| = 0.09 cm⁻¹. Kept for sign-discrimination
/// demonstrations; single-crystal heat capacity rejects it.
pub fn complex4_positive() -> Preset {
    let system = SpinSystem::new(
        1.0,
        cm1_to_kelvin(2.11),
        cm1_to_kelvin(0.09),
        [2.16, 2.16, 2.16],
    )
    .expect("static preset");
    let mut p = base("complex4_pos", system);
    p.tip_cm3_mol = Some(1e-4);
    p.easy_axis_polar_deg = Some(52.6);
    p
}

/// Looks a preset up by name.
pub fn by_name(name: &str) -> Result<Preset> {
    match name {
        "complex1" => Ok(complex1()),
        "complex2" => Ok(complex2()),
        "complex4" => Ok(complex4()),
        "complex4_hc" => Ok(complex4_heatcap()),
        "complex4_pos" => Ok(complex4_positive()),
        other => Err(SpinError::InvalidParameter(format!(
            "unknown preset '{other}' (complex1, complex2, complex4, complex4_hc, complex4_pos)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spincore::clock_gap;
    use crate::units::{kelvin_to_cm1, kelvin_to_ghz};
    use approx::assert_relative_eq;

    #[test]
    fn complex1_gap_is_2_9_cm1() {
        let p = complex1();
        let delta = clock_gap(&p.system).unwrap();
        assert_relative_eq!(kelvin_to_cm1(delta), 2.9, max_relative = 1e-12);
        // The fixed conversions give 86.9 GHz for 2.9 cm⁻¹ (the source
        // quotes 83.5 GHz alongside; the converted value is reported).
        assert_relative_eq!(kelvin_to_ghz(delta), 86.94, epsilon = 0.01);
        assert!(p.assumed.contains(&"D".to_string()));
    }

    #[test]
    fn complex2_doublet_gap_is_2d() {
        let p = complex2();
        let levels = crate::spincore::diagonalize(
            &crate::spincore::build_hamiltonian(&p.system, &crate::spincore::FieldVector::ZERO)
                .unwrap(),
        )
        .unwrap();
        // 32 hyperfine-split levels; the electronic doublet gap is 2|D|.
        assert_eq!(levels.dimension(), 32);
        let gap = levels.energies()[16] - levels.energies()[0];
        assert_relative_eq!(kelvin_to_cm1(gap), 16.62, epsilon = 0.02);
    }

    #[test]
    fn complex4_clock_gap_near_6_ghz() {
        let p = complex4_heatcap();
        let delta = clock_gap(&p.system).unwrap();
        assert_relative_eq!(kelvin_to_cm1(delta), 0.21, max_relative = 1e-12);
        assert!((5.8..6.8).contains(&kelvin_to_ghz(delta)));
    }

    #[test]
    fn lookup_by_name() {
        for name in ["complex1", "complex2", "complex4", "complex4_hc", "complex4_pos"] {
            assert_eq!(by_name(name).unwrap().name, by_name(name).unwrap().name);
        }
        assert!(by_name("complex9").is_err());
    }
}
