//! Single-flip Metropolis Monte Carlo for the intermolecular Ising model
//! H_int = −(J/2) Σ_i Σ_{j∈Z(i)} S_{i,z} S_{j,z} on a finite periodic
//! lattice, with the spins restricted to the two states S_z = ±m_eff of the
//! lowest doublet. Produces the interaction specific heat, order
//! parameters, and an ordering-temperature estimate.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SpinError};
use crate::thermo::peak_location;

/// Number of blocks used for the blocking error analysis.
const BLOCKS: usize = 32;

/// Finite periodic lattice with a user-supplied neighbor-offset adjacency.
#[derive(Debug, Clone)]
pub struct IsingLattice {
    dims: [usize; 3],
    offsets: Vec<[i64; 3]>,
    /// Coupling J in kelvin (J < 0 is antiferromagnetic).
    pub coupling_kelvin: f64,
    /// Effective Ising moment: the physical S_z is m_eff·σ with σ = ±1.
    pub m_eff: f64,
    spins: Vec<i8>,
    neighbors: Vec<u32>,
    parity: Vec<i8>,
}

impl IsingLattice {
    pub fn new(
        dims: [usize; 3],
        offsets: Vec<[i64; 3]>,
        coupling_kelvin: f64,
        m_eff: f64,
    ) -> Result<Self> {
        if dims.iter().any(|&l| l == 0) {
            return Err(SpinError::InvalidParameter("lattice dimensions must be ≥ 1".into()));
        }
        if offsets.is_empty() {
            return Err(SpinError::InvalidParameter("offset list is empty".into()));
        }
        let reduce = |o: &[i64; 3]| -> [i64; 3] {
            [
                o[0].rem_euclid(dims[0] as i64),
                o[1].rem_euclid(dims[1] as i64),
                o[2].rem_euclid(dims[2] as i64),
            ]
        };
        let reduced: Vec<[i64; 3]> = offsets.iter().map(reduce).collect();
        for (o, r) in offsets.iter().zip(&reduced) {
            if *r == [0, 0, 0] {
                return Err(SpinError::InvalidParameter(format!(
                    "offset {o:?} is a self-offset on this lattice"
                )));
            }
            let neg = reduce(&[-o[0], -o[1], -o[2]]);
            if !reduced.contains(&neg) {
                return Err(SpinError::InvalidParameter(format!(
                    "offset list not closed under negation: missing −{o:?}"
                )));
            }
        }

        let n = dims[0] * dims[1] * dims[2];
        let z = offsets.len();
        let mut neighbors = vec![0u32; n * z];
        let mut parity = vec![0i8; n];
        for x in 0..dims[0] {
            for y in 0..dims[1] {
                for zc in 0..dims[2] {
                    let i = (x * dims[1] + y) * dims[2] + zc;
                    parity[i] = if (x + y + zc) % 2 == 0 { 1 } else { -1 };
                    for (k, o) in offsets.iter().enumerate() {
                        let nx = (x as i64 + o[0]).rem_euclid(dims[0] as i64) as usize;
                        let ny = (y as i64 + o[1]).rem_euclid(dims[1] as i64) as usize;
                        let nz = (zc as i64 + o[2]).rem_euclid(dims[2] as i64) as usize;
                        neighbors[i * z + k] = ((nx * dims[1] + ny) * dims[2] + nz) as u32;
                    }
                }
            }
        }
        Ok(IsingLattice {
            dims,
            offsets,
            coupling_kelvin,
            m_eff,
            spins: vec![1; n],
            neighbors,
            parity,
        })
    }

    /// 12 face-diagonal offsets of a face-centred arrangement. For J < 0
    /// this adjacency is geometrically frustrated, like the crystal lattice
    /// it stands in for. Use even L so the two cubic sublattices decouple
    /// cleanly across the periodic boundary.
    pub fn fcc12(l: usize, coupling_kelvin: f64, m_eff: f64) -> Result<Self> {
        let mut offsets = Vec::with_capacity(12);
        for (a, b) in [(1i64, 1i64), (1, -1), (-1, 1), (-1, -1)] {
            offsets.push([a, b, 0]);
            offsets.push([a, 0, b]);
            offsets.push([0, a, b]);
        }
        IsingLattice::new([l, l, l], offsets, coupling_kelvin, m_eff)
    }

    /// Z = 12 bipartite adjacency: the six cubic-axis offsets plus six body
    /// diagonals, all flipping the (x+y+z) parity. Unfrustrated for either
    /// sign of J; use even L.
    pub fn bipartite12(l: usize, coupling_kelvin: f64, m_eff: f64) -> Result<Self> {
        let offsets = vec![
            [1, 0, 0],
            [-1, 0, 0],
            [0, 1, 0],
            [0, -1, 0],
            [0, 0, 1],
            [0, 0, -1],
            [1, 1, 1],
            [-1, -1, -1],
            [1, 1, -1],
            [-1, -1, 1],
            [1, -1, 1],
            [-1, 1, -1],
        ];
        IsingLattice::new([l, l, l], offsets, coupling_kelvin, m_eff)
    }

    /// 2D square lattice (one layer), the Onsager benchmark geometry.
    pub fn square(l: usize, coupling_kelvin: f64, m_eff: f64) -> Result<Self> {
        let offsets = vec![[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0]];
        IsingLattice::new([l, l, 1], offsets, coupling_kelvin, m_eff)
    }

    /// Named presets accepted in configuration files.
    pub fn preset(name: &str, l: usize, coupling_kelvin: f64, m_eff: f64) -> Result<Self> {
        match name {
            "fcc12" => IsingLattice::fcc12(l, coupling_kelvin, m_eff),
            "bipartite12" => IsingLattice::bipartite12(l, coupling_kelvin, m_eff),
            "square" => IsingLattice::square(l, coupling_kelvin, m_eff),
            other => Err(SpinError::InvalidParameter(format!(
                "unknown lattice preset '{other}' (expected fcc12, bipartite12 or square)"
            ))),
        }
    }

    pub fn sites(&self) -> usize {
        self.spins.len()
    }

    /// Coordination number Z (offset-list length).
    pub fn coordination(&self) -> usize {
        self.offsets.len()
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn set_spins(&mut self, spins: Vec<i8>) -> Result<()> {
        if spins.len() != self.spins.len() || spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(SpinError::InvalidParameter("bad spin configuration".into()));
        }
        self.spins = spins;
        Ok(())
    }

    /// Total energy in kelvin: E = −(J·m_eff²/2)·Σ_i Σ_{j∈Z(i)} σ_i σ_j,
    /// the 1/2 compensating the double visit of every bond.
    pub fn energy(&self) -> f64 {
        let k = self.coupling_kelvin * self.m_eff * self.m_eff;
        let z = self.offsets.len();
        let mut sum = 0i64;
        for i in 0..self.spins.len() {
            let si = self.spins[i] as i64;
            for n in 0..z {
                sum += si * self.spins[self.neighbors[i * z + n] as usize] as i64;
            }
        }
        -(k / 2.0) * sum as f64
    }

    /// One deterministic-order Metropolis sweep at temperature `t`, for
    /// callers that drive their own measurement loop. Returns the total
    /// energy change in kelvin.
    pub fn metropolis_sweep<R: Rng>(&mut self, t: f64, rng: &mut R) -> f64 {
        if !(t > 0.0) {
            return 0.0;
        }
        let k = self.coupling_kelvin * self.m_eff * self.m_eff;
        let mut delta = 0.0;
        sweep(self, k, t, &mut delta, rng);
        delta
    }
}

/// Total lattice energy of the current configuration (kelvin).
pub fn mc_energy(lattice: &IsingLattice) -> f64 {
    lattice.energy()
}

/// Per-temperature observables with blocking error bars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McRecord {
    pub t: f64,
    /// ⟨E⟩ per site, kelvin.
    pub energy_per_site: f64,
    pub err_energy: f64,
    /// c/R = (⟨E²⟩−⟨E⟩²)/(N T²).
    pub c_over_r: f64,
    pub err_c: f64,
    /// ⟨|m|⟩ with m = Σσ/N.
    pub m_uniform: f64,
    /// ⟨|m_s|⟩ with m_s the parity-staggered magnetization.
    pub m_staggered: f64,
    pub err_m_staggered: f64,
    /// Binder cumulant U = 1 − ⟨m⁴⟩/3⟨m²⟩² of the order parameter
    /// (staggered for J < 0, uniform otherwise).
    pub binder: f64,
}

/// Output of one annealed Metropolis run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McResult {
    pub records: Vec<McRecord>,
    pub sweeps: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub sites: usize,
    pub linear_size: usize,
    /// Largest |incremental − recomputed| energy drift seen, kelvin.
    pub max_energy_drift: f64,
}

/// Annealed single-flip Metropolis: temperatures are visited from the
/// highest down, reusing the configuration; records are returned in
/// ascending-temperature order. `sweeps` measurement sweeps follow
/// `burn_in` discarded sweeps at every temperature. Deterministic for a
/// fixed seed.
pub fn metropolis_run(
    lattice: &mut IsingLattice,
    t_grid: &[f64],
    sweeps: usize,
    burn_in: usize,
    seed: u64,
) -> Result<McResult> {
    if t_grid.is_empty() || t_grid.iter().any(|&t| !(t > 0.0)) {
        return Err(SpinError::InvalidParameter("temperatures must be positive".into()));
    }
    if sweeps < BLOCKS {
        return Err(SpinError::InvalidParameter(format!(
            "need at least {BLOCKS} measurement sweeps for blocking, got {sweeps}"
        )));
    }

    let mut temps: Vec<f64> = t_grid.to_vec();
    temps.sort_by(|a, b| b.partial_cmp(a).unwrap());

    let n = lattice.sites();
    let k = lattice.coupling_kelvin * lattice.m_eff * lattice.m_eff;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut energy = lattice.energy();
    let mut max_drift = 0.0f64;
    let mut records = Vec::with_capacity(temps.len());

    for &t in &temps {
        // Burn-in.
        for _ in 0..burn_in {
            sweep(lattice, k, t, &mut energy, &mut rng);
        }
        // Measurement, accumulated in 32 blocks.
        let per_block = sweeps / BLOCKS;
        let mut blocks_e = [0.0f64; BLOCKS];
        let mut blocks_e2 = [0.0f64; BLOCKS];
        let mut blocks_ms = [0.0f64; BLOCKS];
        let mut blocks_mu = [0.0f64; BLOCKS];
        let mut m2_total = 0.0f64;
        let mut m4_total = 0.0f64;
        let mut sweeps_done = 0usize;
        for b in 0..BLOCKS {
            let this_block = if b == BLOCKS - 1 { sweeps - per_block * (BLOCKS - 1) } else { per_block };
            for _ in 0..this_block {
                sweep(lattice, k, t, &mut energy, &mut rng);
                sweeps_done += 1;
                if sweeps_done % 1000 == 0 {
                    let fresh = lattice.energy();
                    max_drift = max_drift.max((energy - fresh).abs());
                    energy = fresh;
                }
                blocks_e[b] += energy;
                blocks_e2[b] += energy * energy;
                let (mu, ms) = magnetizations(lattice);
                blocks_mu[b] += mu.abs();
                blocks_ms[b] += ms.abs();
                let order = if lattice.coupling_kelvin < 0.0 { ms } else { mu };
                m2_total += order * order;
                m4_total += order * order * order * order;
            }
            let cnt = this_block.max(1) as f64;
            blocks_e[b] /= cnt;
            blocks_e2[b] /= cnt;
            blocks_mu[b] /= cnt;
            blocks_ms[b] /= cnt;
        }

        let mean = |x: &[f64; BLOCKS]| x.iter().sum::<f64>() / BLOCKS as f64;
        let err = |x: &[f64; BLOCKS]| {
            let m = mean(x);
            let var = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (BLOCKS as f64 - 1.0);
            (var / BLOCKS as f64).sqrt()
        };
        let e_mean = mean(&blocks_e);
        let e2_mean = mean(&blocks_e2);
        let c_blocks: [f64; BLOCKS] = std::array::from_fn(|b| {
            ((blocks_e2[b] - blocks_e[b] * blocks_e[b]) / (n as f64 * t * t)).max(0.0)
        });
        let m2 = m2_total / sweeps as f64;
        let m4 = m4_total / sweeps as f64;
        let binder = if m2 > 0.0 { 1.0 - m4 / (3.0 * m2 * m2) } else { 0.0 };

        records.push(McRecord {
            t,
            energy_per_site: e_mean / n as f64,
            err_energy: err(&blocks_e) / n as f64,
            c_over_r: ((e2_mean - e_mean * e_mean) / (n as f64 * t * t)).max(0.0),
            err_c: err(&c_blocks),
            m_uniform: mean(&blocks_mu),
            m_staggered: mean(&blocks_ms),
            err_m_staggered: err(&blocks_ms),
            binder,
        });
    }

    records.reverse();
    Ok(McResult {
        records,
        sweeps,
        burn_in,
        seed,
        sites: n,
        linear_size: lattice.dims()[0],
        max_energy_drift: max_drift,
    })
}

#[inline]
fn sweep<R: Rng>(lattice: &mut IsingLattice, k: f64, t: f64, energy: &mut f64, rng: &mut R) {
    let n = lattice.spins.len();
    let z = lattice.offsets.len();
    for i in 0..n {
        let mut local = 0i32;
        for nb in 0..z {
            local += lattice.spins[lattice.neighbors[i * z + nb] as usize] as i32;
        }
        // Flipping σ_i changes E by 2·K·σ_i·Σ_j σ_j.
        let delta = 2.0 * k * lattice.spins[i] as f64 * local as f64;
        if delta <= 0.0 || rng.gen::<f64>() < (-delta / t).exp() {
            lattice.spins[i] = -lattice.spins[i];
            *energy += delta;
        }
    }
}

fn magnetizations(lattice: &IsingLattice) -> (f64, f64) {
    let n = lattice.spins.len() as f64;
    let mut mu = 0i64;
    let mut ms = 0i64;
    for (s, p) in lattice.spins.iter().zip(&lattice.parity) {
        mu += *s as i64;
        ms += (*s as i64) * (*p as i64);
    }
    (mu as f64 / n, ms as f64 / n)
}

/// Ordering-temperature estimate from the c(T) peak and, when several
/// sizes are supplied, from Binder-cumulant crossings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TnEstimate {
    /// Peak of c(T) by local quadratic fit: (T_N, uncertainty).
    pub c_peak: Option<(f64, f64)>,
    /// Mean Binder crossing over size pairs: (T_N, spread).
    pub binder_crossing: Option<(f64, f64)>,
    /// Set when the maximum sits on the grid boundary.
    pub inconclusive: bool,
}

/// Estimates T_N from one or more runs (one per lattice size).
pub fn estimate_tn(results: &[McResult]) -> Result<TnEstimate> {
    if results.is_empty() {
        return Err(SpinError::InvalidParameter("no Monte Carlo results".into()));
    }
    let largest = results
        .iter()
        .max_by_key(|r| r.sites)
        .expect("nonempty");
    let ts: Vec<f64> = largest.records.iter().map(|r| r.t).collect();
    let cs: Vec<f64> = largest.records.iter().map(|r| r.c_over_r).collect();
    let c_peak = peak_location(&ts, &cs).map(|(tp, _)| {
        // Uncertainty: local grid spacing around the maximum.
        let k = ts.iter().position(|&t| t >= tp).unwrap_or(1).clamp(1, ts.len() - 1);
        (tp, (ts[k] - ts[k - 1]).abs())
    });

    let mut crossings = Vec::new();
    for a in 0..results.len() {
        for b in (a + 1)..results.len() {
            if results[a].sites == results[b].sites {
                continue;
            }
            if let Some(tc) = binder_crossing(&results[a], &results[b]) {
                crossings.push(tc);
            }
        }
    }
    let binder_est = if crossings.is_empty() {
        None
    } else {
        let mean = crossings.iter().sum::<f64>() / crossings.len() as f64;
        let spread = crossings
            .iter()
            .map(|c| (c - mean).abs())
            .fold(0.0, f64::max)
            .max(ts.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max));
        Some((mean, spread))
    };

    Ok(TnEstimate { c_peak, binder_crossing: binder_est, inconclusive: c_peak.is_none() })
}

fn binder_crossing(a: &McResult, b: &McResult) -> Option<f64> {
    // Interpolate U_small − U_large on the common grid and find a sign change.
    let mut shared: Vec<(f64, f64)> = Vec::new();
    for ra in &a.records {
        if let Some(rb) = b.records.iter().find(|r| (r.t - ra.t).abs() < 1e-12) {
            shared.push((ra.t, ra.binder - rb.binder));
        }
    }
    for w in shared.windows(2) {
        let ((t0, d0), (t1, d1)) = (w[0], w[1]);
        if d0 == 0.0 {
            return Some(t0);
        }
        if d0 * d1 < 0.0 {
            return Some(t0 + (t1 - t0) * d0 / (d0 - d1));
        }
    }
    None
}
