//! Single-molecule spin Hamiltonians in the |S, m_S⟩ (⊗ |I, m_I⟩) basis.
//!
//! The model is H = μ_B Σ_α g_α H_α S_α + D S_z² + E (S_x² − S_y²), with an
//! optional isotropic hyperfine term A_hf S·I. Energies are kelvin, fields
//! tesla, and the field lives in the molecular anisotropy frame (the g
//! tensor stays diagonal; orientation handling rotates the field instead).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SpinError};
use crate::linalg::{hermitian_eigen, hermiticity_defect, CMatrix};
use crate::units::{EnergyValue, MU_B_KELVIN_PER_TESLA};

/// Default tolerance used to group nearly equal levels into degenerate sets.
pub const DEGENERACY_TOL_KELVIN: f64 = 1e-8;

fn check_half_integer(label: &str, s: f64, min: f64) -> Result<()> {
    let doubled = 2.0 * s;
    if !s.is_finite() || (doubled - doubled.round()).abs() > 1e-9 || s < min - 1e-12 {
        return Err(SpinError::InvalidSpin(format!(
            "{label} = {s} must be a half-integer ≥ {min}"
        )));
    }
    Ok(())
}

/// Isotropic hyperfine coupling to one nuclear spin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperfine {
    /// Coupling constant A_hf in kelvin.
    pub a_kelvin: f64,
    /// Nuclear spin quantum number.
    pub nuclear_spin: f64,
}

/// One molecule's spin Hamiltonian parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpinSystemSpec", into = "SpinSystemSpec")]
pub struct SpinSystem {
    /// Electronic spin quantum number (half-integers allowed).
    pub spin: f64,
    /// Axial ZFS parameter D, kelvin.
    pub d_kelvin: f64,
    /// Rhombic ZFS parameter E, kelvin.
    pub e_kelvin: f64,
    /// Principal g values (g_x, g_y, g_z).
    pub g: [f64; 3],
    /// Optional hyperfine coupling.
    pub hyperfine: Option<Hyperfine>,
}

impl SpinSystem {
    pub fn new(spin: f64, d_kelvin: f64, e_kelvin: f64, g: [f64; 3]) -> Result<Self> {
        let sys = SpinSystem { spin, d_kelvin, e_kelvin, g, hyperfine: None };
        sys.validate()?;
        Ok(sys)
    }

    pub fn with_hyperfine(mut self, a_kelvin: f64, nuclear_spin: f64) -> Result<Self> {
        self.hyperfine = Some(Hyperfine { a_kelvin, nuclear_spin });
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        check_half_integer("S", self.spin, 0.5)?;
        for (v, name) in [(self.d_kelvin, "D"), (self.e_kelvin, "E")] {
            if !v.is_finite() {
                return Err(SpinError::InvalidParameter(format!("{name} must be finite")));
            }
        }
        if self.g.iter().any(|g| !g.is_finite()) {
            return Err(SpinError::InvalidParameter("g values must be finite".into()));
        }
        if let Some(hf) = &self.hyperfine {
            check_half_integer("I", hf.nuclear_spin, 0.5)?;
            if !hf.a_kelvin.is_finite() {
                return Err(SpinError::InvalidParameter("A_hf must be finite".into()));
            }
        }
        if self.e_kelvin.abs() > self.d_kelvin.abs() / 3.0 + 1e-15 && self.d_kelvin != 0.0 {
            log::warn!(
                "|E| = {} K exceeds |D|/3 = {} K: outside the conventional ZFS frame",
                self.e_kelvin.abs(),
                self.d_kelvin.abs() / 3.0
            );
        }
        Ok(())
    }

    /// Hilbert-space dimension (2S+1)(2I+1).
    pub fn dimension(&self) -> usize {
        let ds = (2.0 * self.spin).round() as usize + 1;
        let di = self
            .hyperfine
            .as_ref()
            .map(|hf| (2.0 * hf.nuclear_spin).round() as usize + 1)
            .unwrap_or(1);
        ds * di
    }
}

/// JSON wire format: energies carry explicit units, unknown keys rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpinSystemSpec {
    #[serde(rename = "S")]
    spin: f64,
    #[serde(rename = "D")]
    d: EnergyValue,
    #[serde(rename = "E")]
    e: EnergyValue,
    g: [f64; 3],
    #[serde(skip_serializing_if = "Option::is_none")]
    hyperfine: Option<HyperfineSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HyperfineSpec {
    #[serde(rename = "A")]
    a: EnergyValue,
    #[serde(rename = "I")]
    nuclear_spin: f64,
}

impl TryFrom<SpinSystemSpec> for SpinSystem {
    type Error = SpinError;

    fn try_from(spec: SpinSystemSpec) -> Result<Self> {
        let mut sys = SpinSystem {
            spin: spec.spin,
            d_kelvin: spec.d.to_kelvin()?,
            e_kelvin: spec.e.to_kelvin()?,
            g: spec.g,
            hyperfine: None,
        };
        if let Some(hf) = spec.hyperfine {
            sys.hyperfine = Some(Hyperfine {
                a_kelvin: hf.a.to_kelvin()?,
                nuclear_spin: hf.nuclear_spin,
            });
        }
        sys.validate()?;
        Ok(sys)
    }
}

impl From<SpinSystem> for SpinSystemSpec {
    fn from(sys: SpinSystem) -> Self {
        SpinSystemSpec {
            spin: sys.spin,
            d: EnergyValue::kelvin(sys.d_kelvin),
            e: EnergyValue::kelvin(sys.e_kelvin),
            g: sys.g,
            hyperfine: sys.hyperfine.map(|hf| HyperfineSpec {
                a: EnergyValue::kelvin(hf.a_kelvin),
                nuclear_spin: hf.nuclear_spin,
            }),
        }
    }
}

/// Magnetic field in tesla, components in the molecular frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl FieldVector {
    pub const ZERO: FieldVector = FieldVector { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(SpinError::InvalidParameter("field components must be finite".into()));
        }
        Ok(FieldVector { x, y, z })
    }

    pub fn along_z(h: f64) -> Self {
        FieldVector { x: 0.0, y: 0.0, z: h }
    }

    pub fn magnitude(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Unit vector along the field; `None` at zero field.
    pub fn direction(&self) -> Option<[f64; 3]> {
        let m = self.magnitude();
        if m == 0.0 {
            None
        } else {
            Some([self.x / m, self.y / m, self.z / m])
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        FieldVector { x: self.x * factor, y: self.y * factor, z: self.z * factor }
    }
}

/// Spin operator matrices in the |S, m⟩ basis with m = S, S−1, …, −S.
#[derive(Debug, Clone)]
pub struct SpinOperators {
    pub sx: CMatrix,
    pub sy: CMatrix,
    pub sz: CMatrix,
}

/// Standard angular-momentum matrices for a half-integer spin.
pub fn spin_operators(spin: f64) -> Result<SpinOperators> {
    check_half_integer("S", spin, 0.5)?;
    let dim = (2.0 * spin).round() as usize + 1;
    let m_of = |idx: usize| spin - idx as f64;

    let mut sz = CMatrix::zeros(dim, dim);
    let mut sp = CMatrix::zeros(dim, dim); // raising operator
    for i in 0..dim {
        let m = m_of(i);
        sz[(i, i)] = Complex64::new(m, 0.0);
        if i + 1 < dim {
            // ⟨m+1|S₊|m⟩ with m = m_of(i+1); row i is m_of(i) = m+1.
            let m_low = m_of(i + 1);
            let elem = (spin * (spin + 1.0) - m_low * (m_low + 1.0)).sqrt();
            sp[(i, i + 1)] = Complex64::new(elem, 0.0);
        }
    }
    let sm = sp.adjoint();
    let sx = (&sp + &sm).map(|z| z * 0.5);
    let sy = (&sp - &sm).map(|z| z * Complex64::new(0.0, -0.5));
    Ok(SpinOperators { sx, sy, sz })
}

/// Builds the full Hamiltonian matrix in kelvin for one molecule at one field.
pub fn build_hamiltonian(sys: &SpinSystem, field: &FieldVector) -> Result<CMatrix> {
    sys.validate()?;
    let ops = spin_operators(sys.spin)?;
    let dim_s = ops.sz.nrows();

    let mut h = CMatrix::zeros(dim_s, dim_s);
    let zeeman = MU_B_KELVIN_PER_TESLA;
    h += ops.sx.map(|z| z * (zeeman * sys.g[0] * field.x));
    h += ops.sy.map(|z| z * (zeeman * sys.g[1] * field.y));
    h += ops.sz.map(|z| z * (zeeman * sys.g[2] * field.z));
    h += (&ops.sz * &ops.sz).map(|z| z * sys.d_kelvin);
    let sx2 = &ops.sx * &ops.sx;
    let sy2 = &ops.sy * &ops.sy;
    h += (sx2 - sy2).map(|z| z * sys.e_kelvin);

    if let Some(hf) = &sys.hyperfine {
        let nuc = spin_operators(hf.nuclear_spin)?;
        let dim_i = nuc.sz.nrows();
        let eye_i = CMatrix::identity(dim_i, dim_i);
        let mut full = h.kronecker(&eye_i);
        full += (ops.sx.kronecker(&nuc.sx)
            + ops.sy.kronecker(&nuc.sy)
            + ops.sz.kronecker(&nuc.sz))
        .map(|z| z * hf.a_kelvin);
        h = full;
    }

    debug_assert!(hermiticity_defect(&h) <= 1e-12);
    Ok(h)
}

/// Eigenvalues and eigenvectors of one Hamiltonian, ground level shifted to 0.
#[derive(Debug, Clone)]
pub struct LevelSet {
    energies: Vec<f64>,
    ground_energy: f64,
    degeneracy_tol: f64,
    eigenvectors: Option<CMatrix>,
    moments: Option<[CMatrix; 3]>,
}

impl LevelSet {
    /// Level energies in kelvin, ascending, with energies[0] = 0.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Absolute energy of the ground level before the shift (kelvin).
    pub fn ground_energy(&self) -> f64 {
        self.ground_energy
    }

    pub fn dimension(&self) -> usize {
        self.energies.len()
    }

    pub fn degeneracy_tol(&self) -> f64 {
        self.degeneracy_tol
    }

    /// Eigenvectors as columns, in the same order as `energies`.
    pub fn eigenvectors(&self) -> Option<&CMatrix> {
        self.eigenvectors.as_ref()
    }

    /// Moment matrices ⟨i|μ̂_α|j⟩ in μ_B, α = x, y, z.
    pub fn moments(&self) -> Option<&[CMatrix; 3]> {
        self.moments.as_ref()
    }

    /// Builds a level set from bare energies (no eigenvectors), e.g. for
    /// closed-form spectra. Energies need not be sorted or shifted.
    pub fn from_energies(mut energies: Vec<f64>) -> Result<Self> {
        if energies.is_empty() {
            return Err(SpinError::InvalidParameter("empty level set".into()));
        }
        energies.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let ground = energies[0];
        for e in &mut energies {
            *e -= ground;
        }
        Ok(LevelSet {
            energies,
            ground_energy: ground,
            degeneracy_tol: DEGENERACY_TOL_KELVIN,
            eigenvectors: None,
            moments: None,
        })
    }

    /// Groups level indices into degenerate sets using the stored tolerance.
    pub fn degenerate_groups(&self) -> Vec<Vec<usize>> {
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for (i, &e) in self.energies.iter().enumerate() {
            match groups.last_mut() {
                Some(g) if (e - self.energies[*g.last().unwrap()]).abs() <= self.degeneracy_tol => {
                    g.push(i)
                }
                _ => groups.push(vec![i]),
            }
        }
        groups
    }

    /// Ground-state degeneracy at the stored tolerance.
    pub fn ground_degeneracy(&self) -> usize {
        self.degenerate_groups()[0].len()
    }

    /// Attaches moment matrices μ̂_α = −g_α S_α (electron spin only; the
    /// nuclear moment is neglected) expressed in the eigenbasis.
    pub fn with_moments(mut self, sys: &SpinSystem) -> Result<Self> {
        let v = self.eigenvectors.as_ref().ok_or_else(|| {
            SpinError::ContractViolation("moment matrices need stored eigenvectors".into())
        })?;
        let ops = spin_operators(sys.spin)?;
        let lift = |op: &CMatrix| -> CMatrix {
            match &sys.hyperfine {
                Some(hf) => {
                    let dim_i = (2.0 * hf.nuclear_spin).round() as usize + 1;
                    op.kronecker(&CMatrix::identity(dim_i, dim_i))
                }
                None => op.clone(),
            }
        };
        let mut mats = Vec::with_capacity(3);
        for (op, g) in [(&ops.sx, sys.g[0]), (&ops.sy, sys.g[1]), (&ops.sz, sys.g[2])] {
            let mu = lift(op).map(|z| z * (-g));
            mats.push(v.adjoint() * mu * v);
        }
        self.moments = Some([mats.remove(0), mats.remove(0), mats.remove(0)]);
        Ok(self)
    }

    /// Moment matrix projected on a unit direction, ⟨i|μ̂·ĥ|j⟩ in μ_B.
    pub fn moment_along(&self, dir: [f64; 3]) -> Result<CMatrix> {
        let m = self.moments.as_ref().ok_or_else(|| {
            SpinError::ContractViolation("moment matrices not attached".into())
        })?;
        Ok(m[0].map(|z| z * dir[0]) + m[1].map(|z| z * dir[1]) + m[2].map(|z| z * dir[2]))
    }
}

/// Diagonalizes a Hermitian Hamiltonian (kelvin) into a LevelSet.
pub fn diagonalize(h: &CMatrix) -> Result<LevelSet> {
    let (w, v) = hermitian_eigen(h)?;
    let ground = w[0];
    let energies = w.iter().map(|e| e - ground).collect();
    Ok(LevelSet {
        energies,
        ground_energy: ground,
        degeneracy_tol: DEGENERACY_TOL_KELVIN,
        eigenvectors: Some(v),
        moments: None,
    })
}

/// Levels of one system at one field, with moment matrices attached.
pub fn levels_with_moments(sys: &SpinSystem, field: &FieldVector) -> Result<LevelSet> {
    diagonalize(&build_hamiltonian(sys, field)?)?.with_moments(sys)
}

/// Quantum tunnelling gap Δ = 2|E| of an easy-axis S = 1 system.
pub fn clock_gap(sys: &SpinSystem) -> Result<f64> {
    if (sys.spin - 1.0).abs() > 1e-12 {
        return Err(SpinError::UnsupportedFormula(format!(
            "clock gap Δ = 2|E| holds for S = 1; got S = {} (diagonalize instead)",
            sys.spin
        )));
    }
    if sys.d_kelvin >= 0.0 {
        log::warn!("clock gap formula assumes easy-axis D < 0; D = {} K", sys.d_kelvin);
    }
    Ok(2.0 * sys.e_kelvin.abs())
}

/// Field-dependent gap ħω = √((2 g_z μ_B S H_z)² + Δ²) near the anti-crossing.
pub fn zeeman_gap(sys: &SpinSystem, h_z: f64) -> f64 {
    let delta = 2.0 * sys.e_kelvin.abs();
    let zeeman = 2.0 * sys.g[2] * MU_B_KELVIN_PER_TESLA * sys.spin * h_z;
    (zeeman * zeeman + delta * delta).sqrt()
}
