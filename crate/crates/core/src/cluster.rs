//! Exact diagonalization of small coupled-spin clusters: a central molecule
//! plus its in-plane neighbors, each carrying the single-molecule
//! Hamiltonian, coupled by Ising bonds −(1/2) J_ij (S_z)_i (S_z)_j. Shows
//! how a tunnelling gap larger than the interaction scale pushes spin-spin
//! signatures out of the low-temperature specific heat.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SpinError};
use crate::linalg::{hermitian_eigen, symmetric_eigenvalues, CMatrix, RMatrix};
use crate::spincore::{build_hamiltonian, spin_operators, FieldVector, LevelSet, SpinSystem};
use crate::thermo::{specific_heat, TemperatureGrid, ThermoCurve};

/// Hard cap on the product Hilbert-space dimension.
pub const DIMENSION_CAP: usize = 10_000;

/// Bond topologies for the 6+1 in-plane cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterTopology {
    /// Center–neighbor bonds only.
    Star,
    /// Center–neighbor plus neighbor–neighbor ring bonds (default).
    StarRing,
}

/// JSON wire form of a cluster: one shared molecule replicated over
/// `n_sites`, an explicit bond list (i, j, J_ij in kelvin) and a field.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterSpec {
    pub system: crate::spincore::SpinSystem,
    pub n_sites: usize,
    pub bonds: Vec<(usize, usize, f64)>,
    #[serde(default)]
    pub field: [f64; 3],
}

/// A finite cluster of spins with Ising couplings.
#[derive(Debug, Clone)]
pub struct ClusterModel {
    pub sites: Vec<SpinSystem>,
    /// Undirected bonds (i, j, J_ij in kelvin), each listed once.
    pub bonds: Vec<(usize, usize, f64)>,
    pub field: FieldVector,
}

impl ClusterModel {
    pub fn new(
        sites: Vec<SpinSystem>,
        bonds: Vec<(usize, usize, f64)>,
        field: FieldVector,
    ) -> Result<Self> {
        if sites.is_empty() {
            return Err(SpinError::InvalidParameter("cluster needs at least one site".into()));
        }
        let mut dim: usize = 1;
        for s in &sites {
            s.validate()?;
            dim = dim.saturating_mul(s.dimension());
            if dim > DIMENSION_CAP {
                return Err(SpinError::ResourceLimit(format!(
                    "cluster dimension exceeds the cap of {DIMENSION_CAP}"
                )));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for &(i, j, _) in &bonds {
            if i >= sites.len() || j >= sites.len() || i == j {
                return Err(SpinError::InvalidParameter(format!("bad bond ({i}, {j})")));
            }
            let key = (i.min(j), i.max(j));
            if !seen.insert(key) {
                return Err(SpinError::InvalidParameter(format!("duplicate bond ({i}, {j})")));
            }
        }
        Ok(ClusterModel { sites, bonds, field })
    }

    /// The 6+1 cluster: a shared molecule on every site, center index 0,
    /// all bonds carrying the same J.
    pub fn six_plus_one(
        molecule: SpinSystem,
        coupling_kelvin: f64,
        topology: ClusterTopology,
        field: FieldVector,
    ) -> Result<Self> {
        let mut bonds: Vec<(usize, usize, f64)> =
            (1..=6).map(|k| (0, k, coupling_kelvin)).collect();
        if topology == ClusterTopology::StarRing {
            for k in 1..=6usize {
                let next = if k == 6 { 1 } else { k + 1 };
                bonds.push((k, next, coupling_kelvin));
            }
        }
        ClusterModel::new(vec![molecule; 7], bonds, field)
    }

    pub fn dimension(&self) -> usize {
        self.sites.iter().map(|s| s.dimension()).product()
    }

    /// Builds a cluster from its JSON wire form.
    pub fn from_spec(spec: &ClusterSpec) -> Result<Self> {
        if spec.n_sites == 0 {
            return Err(SpinError::InvalidParameter("cluster needs at least one site".into()));
        }
        let field = FieldVector::new(spec.field[0], spec.field[1], spec.field[2])?;
        ClusterModel::new(vec![spec.system.clone(); spec.n_sites], spec.bonds.clone(), field)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ClusterSpec = serde_json::from_str(text)
            .map_err(|e| SpinError::ParseError(format!("cluster model: {e}")))?;
        ClusterModel::from_spec(&spec)
    }
}

/// Dense cluster Hamiltonian, stored real when the product basis allows it
/// (zero field or no y field component on any site).
#[derive(Debug, Clone)]
pub enum ClusterHamiltonian {
    Real(RMatrix),
    Complex(CMatrix),
}

impl ClusterHamiltonian {
    pub fn dimension(&self) -> usize {
        match self {
            ClusterHamiltonian::Real(m) => m.nrows(),
            ClusterHamiltonian::Complex(m) => m.nrows(),
        }
    }

    /// Full spectrum in kelvin, ascending. The complex path embeds
    /// H = A + iB into the real symmetric [[A, −B], [B, A]], whose
    /// spectrum doubles every eigenvalue.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        match self {
            ClusterHamiltonian::Real(m) => symmetric_eigenvalues(m.clone()),
            ClusterHamiltonian::Complex(m) => {
                let n = m.nrows();
                if n <= 64 {
                    return Ok(hermitian_eigen(m)?.0);
                }
                let mut big = RMatrix::zeros(2 * n, 2 * n);
                for i in 0..n {
                    for j in 0..n {
                        let z = m[(i, j)];
                        big[(i, j)] = z.re;
                        big[(n + i, n + j)] = z.re;
                        big[(i, n + j)] = -z.im;
                        big[(n + i, j)] = z.im;
                    }
                }
                let w = symmetric_eigenvalues(big)?;
                Ok(w.into_iter().step_by(2).collect())
            }
        }
    }
}

/// Mixed-radix strides: state index s = Σ_k idx_k·stride_k.
fn strides(dims: &[usize]) -> Vec<usize> {
    let mut st = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        st[k] = st[k + 1] * dims[k + 1];
    }
    st
}

/// Builds H = Σ_k 1⊗…⊗h_k⊗…⊗1 − (1/2) Σ_bonds J_ij (S_z)_i (S_z)_j in the
/// m_S product basis.
pub fn build_cluster_hamiltonian(model: &ClusterModel) -> Result<ClusterHamiltonian> {
    let n_sites = model.sites.len();
    let dims: Vec<usize> = model.sites.iter().map(|s| s.dimension()).collect();
    let total: usize = dims.iter().product();
    if total > DIMENSION_CAP {
        return Err(SpinError::ResourceLimit(format!(
            "cluster dimension {total} exceeds the cap of {DIMENSION_CAP}"
        )));
    }
    let st = strides(&dims);

    let site_h: Vec<CMatrix> = model
        .sites
        .iter()
        .map(|s| build_hamiltonian(s, &model.field))
        .collect::<Result<_>>()?;
    let max_im = site_h
        .iter()
        .flat_map(|h| h.iter())
        .map(|z| z.im.abs())
        .fold(0.0, f64::max);
    let scale = site_h
        .iter()
        .flat_map(|h| h.iter())
        .map(|z| z.norm())
        .fold(1e-300, f64::max);
    let is_real = max_im <= 1e-14 * scale;

    // S_z eigenvalues per site level index (m = S … −S), hyperfine included.
    let m_values: Vec<Vec<f64>> = model
        .sites
        .iter()
        .map(|s| {
            let ops = spin_operators(s.spin)?;
            let di = s
                .hyperfine
                .as_ref()
                .map(|hf| (2.0 * hf.nuclear_spin).round() as usize + 1)
                .unwrap_or(1);
            let mut v = Vec::with_capacity(ops.sz.nrows() * di);
            for a in 0..ops.sz.nrows() {
                for _ in 0..di {
                    v.push(ops.sz[(a, a)].re);
                }
            }
            Ok(v)
        })
        .collect::<Result<_>>()?;

    // Diagonal bond part.
    let mut diag = vec![0.0f64; total];
    for s in 0..total {
        let mut rem = s;
        let mut idx = vec![0usize; n_sites];
        for k in 0..n_sites {
            idx[k] = rem / st[k];
            rem %= st[k];
        }
        let mut e = 0.0;
        for &(i, j, jij) in &model.bonds {
            e -= 0.5 * jij * m_values[i][idx[i]] * m_values[j][idx[j]];
        }
        diag[s] = e;
    }

    // Single-site terms lifted by identity on every other factor.
    let add_site_terms = |put: &mut dyn FnMut(usize, usize, Complex64)| {
        for k in 0..n_sites {
            let h = &site_h[k];
            let dk = dims[k];
            let outer = total / dk;
            for a in 0..dk {
                for b in 0..dk {
                    let z = h[(a, b)];
                    if z.norm() == 0.0 {
                        continue;
                    }
                    // Enumerate the joint index of all other sites.
                    for o in 0..outer {
                        // Decompose o over the other sites and rebuild the
                        // full index with site k set to a (row) and b (col).
                        let mut rem = o;
                        let mut row = 0usize;
                        let mut col = 0usize;
                        for l in 0..n_sites {
                            if l == k {
                                continue;
                            }
                            let il = rem % dims[l];
                            rem /= dims[l];
                            row += il * st[l];
                            col += il * st[l];
                        }
                        row += a * st[k];
                        col += b * st[k];
                        put(row, col, z);
                    }
                }
            }
        }
    };

    if is_real {
        let mut h = RMatrix::zeros(total, total);
        for s in 0..total {
            h[(s, s)] = diag[s];
        }
        add_site_terms(&mut |r, c, z| h[(r, c)] += z.re);
        Ok(ClusterHamiltonian::Real(h))
    } else {
        let mut h = CMatrix::zeros(total, total);
        for s in 0..total {
            h[(s, s)] = Complex64::new(diag[s], 0.0);
        }
        add_site_terms(&mut |r, c, z| h[(r, c)] += z);
        Ok(ClusterHamiltonian::Complex(h))
    }
}

/// Full cluster spectrum as a LevelSet (ground shifted to zero).
pub fn cluster_levels(model: &ClusterModel) -> Result<LevelSet> {
    let h = build_cluster_hamiltonian(model)?;
    LevelSet::from_energies(h.eigenvalues()?)
}

/// Specific heat per mole of sites from the full cluster spectrum.
pub fn cluster_specific_heat(model: &ClusterModel, grid: &TemperatureGrid) -> Result<ThermoCurve> {
    let levels = cluster_levels(model)?;
    let mut curve = specific_heat(&levels, grid);
    let n = model.sites.len() as f64;
    for v in &mut curve.values {
        *v /= n;
    }
    curve.scheme = format!("cluster({})", model.sites.len());
    Ok(curve)
}

/// Ratio Δ/ε with ε = Z|J|S²/2, the spin-spin interaction scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecouplingRatio {
    pub ratio: f64,
    pub epsilon_kelvin: f64,
    /// True when Δ > ε: the lattice sits in the quantum-paramagnet regime
    /// and never orders.
    pub quantum_paramagnet: bool,
}

/// Quantum-decoupling figure of merit. J = 0 yields an infinite ratio
/// (flagged by `quantum_paramagnet`), not an error.
pub fn quantum_decoupling_ratio(
    delta_kelvin: f64,
    z: usize,
    coupling_kelvin: f64,
    spin: f64,
) -> DecouplingRatio {
    let epsilon = z as f64 * coupling_kelvin.abs() * spin * spin / 2.0;
    if epsilon == 0.0 {
        return DecouplingRatio {
            ratio: f64::INFINITY,
            epsilon_kelvin: 0.0,
            quantum_paramagnet: true,
        };
    }
    let ratio = delta_kelvin / epsilon;
    DecouplingRatio { ratio, epsilon_kelvin: epsilon, quantum_paramagnet: ratio > 1.0 }
}

/// Ground-state expectation ⟨S_z,total⟩ of a real cluster Hamiltonian by
/// shifted inverse iteration (the ground level must be non-degenerate).
pub fn ground_state_sz_total(model: &ClusterModel) -> Result<f64> {
    let built = build_cluster_hamiltonian(model)?;
    let (h, w) = match &built {
        ClusterHamiltonian::Real(m) => (m, built.eigenvalues()?),
        ClusterHamiltonian::Complex(_) => {
            return Err(SpinError::UnsupportedFormula(
                "ground-state ⟨S_z⟩ is computed on the real (no y-field) path".into(),
            ))
        }
    };
    let n = h.nrows();
    let gap = w[1] - w[0];
    if gap < 1e-8 {
        return Err(SpinError::ContractViolation(format!(
            "ground state is degenerate within {gap} K; ⟨S_z⟩ is basis-dependent"
        )));
    }
    // Inverse iteration around a shift just below the ground level. The
    // start vector must not be symmetry-orthogonal to the ground state, so
    // use a deterministic pseudo-random fill rather than a uniform one.
    let shift = w[0] - 1e-4 * gap.max(1e-6);
    let mut shifted = h.clone();
    for i in 0..n {
        shifted[(i, i)] -= shift;
    }
    let lu = shifted.lu();
    let mut state = 0x2545f4914f6cdd1du64;
    let mut v = DVector::from_fn(n, |_, _| {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    });
    v /= v.norm();
    for _ in 0..8 {
        v = lu
            .solve(&v)
            .ok_or_else(|| SpinError::ContractViolation("inverse iteration failed".into()))?;
        v /= v.norm();
    }
    let rayleigh = (h * &v).dot(&v);
    if (rayleigh - w[0]).abs() > 1e-6 * (1.0 + w[0].abs()) {
        return Err(SpinError::ContractViolation(format!(
            "inverse iteration did not converge: Rayleigh {rayleigh} vs ground {}",
            w[0]
        )));
    }

    let dims: Vec<usize> = model.sites.iter().map(|s| s.dimension()).collect();
    let st = strides(&dims);
    let m_values: Vec<Vec<f64>> = model
        .sites
        .iter()
        .map(|s| {
            let ops = spin_operators(s.spin).expect("validated");
            let di = s
                .hyperfine
                .as_ref()
                .map(|hf| (2.0 * hf.nuclear_spin).round() as usize + 1)
                .unwrap_or(1);
            let mut out = Vec::new();
            for a in 0..ops.sz.nrows() {
                for _ in 0..di {
                    out.push(ops.sz[(a, a)].re);
                }
            }
            out
        })
        .collect();
    let mut expect = 0.0;
    for s in 0..n {
        let amp2 = v[s] * v[s];
        let mut rem = s;
        for k in 0..dims.len() {
            let ik = rem / st[k];
            rem %= st[k];
            expect += amp2 * m_values[k][ik];
        }
    }
    Ok(expect)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spincore::diagonalize;
    use crate::units::cm1_to_kelvin;
    use approx::assert_relative_eq;

    fn s1_site(d: f64, e: f64) -> SpinSystem {
        SpinSystem::new(1.0, d, e, [2.2; 3]).unwrap()
    }

    #[test]
    fn single_site_reduces_to_spincore() {
        let sys = s1_site(-10.0, 0.5);
        let model = ClusterModel::new(vec![sys.clone()], vec![], FieldVector::ZERO).unwrap();
        let cluster = cluster_levels(&model).unwrap();
        let direct =
            diagonalize(&build_hamiltonian(&sys, &FieldVector::ZERO).unwrap()).unwrap();
        for (a, b) in cluster.energies().iter().zip(direct.energies()) {
            assert_relative_eq!(a, b, max_relative = 1e-10, epsilon = 1e-12);
        }
    }

    #[test]
    fn two_site_bond_spectrum_by_hand() {
        // D = E = H = 0, one bond J: levels −(J/2)m₁m₂ over m ∈ {−1,0,1}².
        let j = -0.8;
        let free = SpinSystem::new(1.0, 0.0, 0.0, [2.0; 3]).unwrap();
        let model =
            ClusterModel::new(vec![free.clone(), free], vec![(0, 1, j)], FieldVector::ZERO)
                .unwrap();
        let h = build_cluster_hamiltonian(&model).unwrap();
        assert_eq!(h.dimension(), 9);
        let mut expect: Vec<f64> = [-1.0f64, 0.0, 1.0]
            .iter()
            .flat_map(|&m1| [-1.0f64, 0.0, 1.0].iter().map(move |&m2| -(j / 2.0) * m1 * m2))
            .collect();
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let got = h.eigenvalues().unwrap();
        for (a, b) in got.iter().zip(&expect) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn seven_site_dimension_and_cap() {
        let model = ClusterModel::six_plus_one(
            s1_site(-5.0, 0.1),
            -0.05,
            ClusterTopology::StarRing,
            FieldVector::ZERO,
        )
        .unwrap();
        assert_eq!(model.dimension(), 2187);
        assert_eq!(model.bonds.len(), 12);

        // Cap: 9 S=1 sites would be 19683 > 10⁴.
        let too_big = ClusterModel::new(
            vec![s1_site(-5.0, 0.1); 9],
            vec![],
            FieldVector::ZERO,
        );
        assert!(matches!(too_big, Err(SpinError::ResourceLimit(_))));
    }

    #[test]
    fn bond_validation() {
        let s = s1_site(-5.0, 0.1);
        assert!(ClusterModel::new(vec![s.clone(); 2], vec![(0, 0, 1.0)], FieldVector::ZERO)
            .is_err());
        assert!(ClusterModel::new(vec![s.clone(); 2], vec![(0, 5, 1.0)], FieldVector::ZERO)
            .is_err());
        assert!(ClusterModel::new(
            vec![s; 2],
            vec![(0, 1, 1.0), (1, 0, 0.5)],
            FieldVector::ZERO
        )
        .is_err());
    }

    #[test]
    fn zero_coupling_factorizes() {
        // Z_cluster = Π Z_site within 1e-10 relative at 10 temperatures.
        let site = s1_site(-7.0, 0.9);
        let model = ClusterModel::new(vec![site.clone(); 3], vec![], FieldVector::ZERO).unwrap();
        let cluster = cluster_levels(&model).unwrap();
        let single =
            diagonalize(&build_hamiltonian(&site, &FieldVector::ZERO).unwrap()).unwrap();
        for i in 1..=10 {
            let t = 0.4 * i as f64;
            let zc: f64 = cluster
                .energies()
                .iter()
                .map(|&e| (-(e + cluster.ground_energy() * 0.0) / t).exp())
                .sum();
            // Shift-corrected absolute partition functions.
            let zc_abs = zc * (-(cluster.ground_energy()) / t).exp();
            let zs: f64 = single
                .energies()
                .iter()
                .map(|&e| (-(e + single.ground_energy()) / t).exp())
                .sum();
            assert_relative_eq!(zc_abs, zs.powi(3), max_relative = 1e-10);
        }

        // And the specific heat per site equals the single-molecule one.
        let grid = TemperatureGrid::linear(0.5, 8.0, 25).unwrap();
        let c_cluster = cluster_specific_heat(&model, &grid).unwrap();
        let c_single = specific_heat(&single, &grid);
        for (a, b) in c_cluster.values.iter().zip(&c_single.values) {
            assert_relative_eq!(a, b, max_relative = 1e-9, epsilon = 1e-12);
        }
    }

    #[test]
    fn parity_symmetry_at_zero_field() {
        // Spectrum invariant under a global spin flip, level by level.
        let site = s1_site(-4.0, 0.6);
        let model = ClusterModel::new(
            vec![site.clone(); 3],
            vec![(0, 1, -0.3), (1, 2, -0.3), (0, 2, 0.2)],
            FieldVector::ZERO,
        )
        .unwrap();
        let h = build_cluster_hamiltonian(&model).unwrap();
        let w = h.eigenvalues().unwrap();

        // Flip: site index m → (d−1−m) on every site.
        let dims: Vec<usize> = model.sites.iter().map(|s| s.dimension()).collect();
        let st = strides(&dims);
        let total = model.dimension();
        let flip = |s: usize| -> usize {
            let mut rem = s;
            let mut out = 0;
            for k in 0..dims.len() {
                let ik = rem / st[k];
                rem %= st[k];
                out += (dims[k] - 1 - ik) * st[k];
            }
            out
        };
        let hm = match h {
            ClusterHamiltonian::Real(m) => m,
            _ => unreachable!("zero field is real"),
        };
        let mut flipped = RMatrix::zeros(total, total);
        for i in 0..total {
            for j in 0..total {
                flipped[(flip(i), flip(j))] = hm[(i, j)];
            }
        }
        let w_flip = symmetric_eigenvalues(flipped).unwrap();
        for (a, b) in w.iter().zip(&w_flip) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn ground_state_structure_vs_gap() {
        // Δ ≫ ε: unique ground state with ⟨S_z,tot⟩ = 0.
        // Δ = 0: ground manifold at least doubly degenerate.
        let j = -0.3;
        let gapped = ClusterModel::new(
            vec![s1_site(-30.0, 2.0); 3],
            vec![(0, 1, j), (1, 2, j), (0, 2, j)],
            FieldVector::ZERO,
        )
        .unwrap();
        let levels = cluster_levels(&gapped).unwrap();
        assert!(levels.energies()[1] - levels.energies()[0] > 1e-8);
        let sz = ground_state_sz_total(&gapped).unwrap();
        assert!(sz.abs() < 1e-8, "⟨S_z,tot⟩ = {sz}");

        let classical = ClusterModel::new(
            vec![s1_site(-30.0, 0.0); 3],
            vec![(0, 1, j), (1, 2, j), (0, 2, j)],
            FieldVector::ZERO,
        )
        .unwrap();
        let levels = cluster_levels(&classical).unwrap();
        assert!(levels.ground_degeneracy() >= 2);
    }

    #[test]
    fn decoupling_ratio_examples() {
        // Paper values: Δ = 2.9 cm⁻¹, Z = 12, J = −0.035 cm⁻¹, S = 1
        // → ε = 0.21 cm⁻¹ and Δ/ε ≈ 13.8 (order 10).
        let r = quantum_decoupling_ratio(
            cm1_to_kelvin(2.9),
            12,
            cm1_to_kelvin(-0.035),
            1.0,
        );
        assert_relative_eq!(r.epsilon_kelvin, cm1_to_kelvin(0.21), max_relative = 1e-12);
        assert_relative_eq!(r.ratio, 2.9 / 0.21, max_relative = 1e-12);
        assert!(r.quantum_paramagnet);

        assert_eq!(quantum_decoupling_ratio(0.0, 12, -0.05, 1.0).ratio, 0.0);
        let doubled = quantum_decoupling_ratio(2.0, 12, -0.05, 1.0).ratio;
        let single = quantum_decoupling_ratio(1.0, 12, -0.05, 1.0).ratio;
        assert_relative_eq!(doubled, 2.0 * single, max_relative = 1e-12);

        let free = quantum_decoupling_ratio(1.0, 12, 0.0, 1.0);
        assert!(free.ratio.is_infinite() && free.quantum_paramagnet);
    }

    #[test]
    fn complex_path_matches_real_path() {
        // With E = 0 and isotropic g, a field along x and a field along y
        // of equal magnitude share a spectrum; only the storage differs.
        let site = s1_site(-6.0, 0.0);
        let bonds = vec![(0usize, 1usize, -0.4)];
        let real_model = ClusterModel::new(
            vec![site.clone(); 2],
            bonds.clone(),
            FieldVector::new(0.7, 0.0, 0.2).unwrap(),
        )
        .unwrap();
        let complex_model = ClusterModel::new(
            vec![site; 2],
            bonds,
            FieldVector::new(0.0, 0.7, 0.2).unwrap(),
        )
        .unwrap();
        let wr = build_cluster_hamiltonian(&real_model).unwrap();
        assert!(matches!(wr, ClusterHamiltonian::Real(_)));
        let wc = build_cluster_hamiltonian(&complex_model).unwrap();
        assert!(matches!(wc, ClusterHamiltonian::Complex(_)));
        let wr = wr.eigenvalues().unwrap();
        let wc = wc.eigenvalues().unwrap();
        for (a, b) in wr.iter().zip(&wc) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn cluster_json_round_trip() {
        let json = r#"{
            "system": {"S":1.0,"D":{"value":-100,"unit":"cm-1"},"E":{"value":1.45,"unit":"cm-1"},"g":[2.2,2.2,2.2]},
            "n_sites": 3,
            "bonds": [[0,1,-0.05],[1,2,-0.05]],
            "field": [0.0,0.0,0.1]
        }"#;
        let model = ClusterModel::from_json(json).unwrap();
        assert_eq!(model.dimension(), 27);
        assert_eq!(model.bonds.len(), 2);
        assert!(ClusterModel::from_json(r#"{"bogus":1}"#).is_err());
    }

    #[test]
    fn complex_embedding_large_dimension() {
        // Force the 2n×2n embedding path (dim > 64) and cross-check it
        // against the complex Jacobi on the same 81-dim matrix.
        let site = s1_site(-3.0, 0.4);
        let model = ClusterModel::new(
            vec![site; 4],
            vec![(0, 1, -0.2), (1, 2, -0.2), (2, 3, -0.2)],
            FieldVector::new(0.0, 0.5, 0.1).unwrap(),
        )
        .unwrap();
        let h = build_cluster_hamiltonian(&model).unwrap();
        let w_embed = h.eigenvalues().unwrap();
        let w_jacobi = match &h {
            ClusterHamiltonian::Complex(m) => hermitian_eigen(m).unwrap().0,
            _ => unreachable!(),
        };
        assert_eq!(w_embed.len(), 81);
        for (a, b) in w_embed.iter().zip(&w_jacobi) {
            assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()), "{a} vs {b}");
        }
    }
}
