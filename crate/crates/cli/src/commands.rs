//! Subcommand handlers: load inputs, dispatch to the engine, write CSVs.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use spinclock_core::cluster::{self, ClusterModel, ClusterTopology};
use spinclock_core::csvio;
use spinclock_core::error::{Result, SpinError};
use spinclock_core::fitting::{self, Dataset, FitOptions, ResponseKind};
use spinclock_core::latticemc::{estimate_tn, metropolis_run, IsingLattice};
use spinclock_core::orientation::{averaged_observable, AveragedObservable, OrientationScheme};
use spinclock_core::presets::{self, Preset};
use spinclock_core::relaxation;
use spinclock_core::spincore::{
    build_hamiltonian, clock_gap, diagonalize, FieldVector, SpinSystem,
};
use spinclock_core::thermo::{
    self, debye_specific_heat, gap_from_t0, TemperatureGrid,
};
use spinclock_core::units::{cm1_to_kelvin, kelvin_to_cm1, kelvin_to_ghz};

/// Model selection shared by most commands: a named preset or a JSON file.
#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Named preset: complex1, complex2, complex4, complex4_hc, complex4_pos.
    #[arg(long, conflicts_with = "model")]
    pub preset: Option<String>,
    /// SpinSystem JSON file (see README for the schema).
    #[arg(long)]
    pub model: Option<PathBuf>,
}

impl ModelArgs {
    pub fn load(&self) -> Result<(SpinSystem, Option<Preset>)> {
        match (&self.preset, &self.model) {
            (Some(name), None) => {
                let p = presets::by_name(name)?;
                Ok((p.system.clone(), Some(p)))
            }
            (None, Some(path)) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    SpinError::InvalidParameter(format!("cannot read {}: {e}", path.display()))
                })?;
                let sys: SpinSystem = serde_json::from_str(&text).map_err(|e| {
                    SpinError::ParseError(format!("{}: {e}", path.display()))
                })?;
                Ok((sys, None))
            }
            _ => Err(SpinError::InvalidParameter(
                "specify exactly one of --preset or --model".into(),
            )),
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    /// Lowest temperature, kelvin.
    #[arg(long, default_value_t = 0.35)]
    pub tmin: f64,
    /// Highest temperature, kelvin.
    #[arg(long, default_value_t = 20.0)]
    pub tmax: f64,
    /// Number of grid points.
    #[arg(long, default_value_t = 400)]
    pub n: usize,
    /// Use a linear grid instead of the default logarithmic one.
    #[arg(long, default_value_t = false)]
    pub linear: bool,
}

impl GridArgs {
    pub fn build(&self) -> Result<TemperatureGrid> {
        if self.linear {
            TemperatureGrid::linear(self.tmin, self.tmax, self.n)
        } else {
            TemperatureGrid::log(self.tmin, self.tmax, self.n)
        }
    }
}

fn parse_scheme(json: &Option<String>, aperture: Option<f64>) -> Result<OrientationScheme> {
    if let Some(text) = json {
        return serde_json::from_str(text)
            .map_err(|e| SpinError::ParseError(format!("orientation scheme: {e}")));
    }
    Ok(match aperture {
        Some(a) if a > 0.0 => OrientationScheme::Cone { aperture_deg: a, n: 350 },
        Some(_) => OrientationScheme::Single { theta_deg: 0.0, phi_deg: 0.0 },
        None => OrientationScheme::Single { theta_deg: 0.0, phi_deg: 0.0 },
    })
}

#[derive(Args, Debug)]
pub struct LevelsArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Field components Hx,Hy,Hz in tesla (molecular frame).
    #[arg(long, default_value = "0,0,0", value_parser = parse_triple)]
    pub field: (f64, f64, f64),
    /// Output file name.
    #[arg(long, default_value = "levels.csv")]
    pub out: String,
}

fn parse_triple(s: &str) -> std::result::Result<(f64, f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err("expected Hx,Hy,Hz".into());
    }
    let mut v = [0.0; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p.trim().parse().map_err(|_| format!("bad number '{p}'"))?;
    }
    Ok((v[0], v[1], v[2]))
}

pub fn levels(outdir: &Path, args: LevelsArgs) -> Result<()> {
    let (sys, preset) = args.model.load()?;
    let field = FieldVector::new(args.field.0, args.field.1, args.field.2)?;
    let levels = diagonalize(&build_hamiltonian(&sys, &field)?)?;
    let path = outdir.join(&args.out);
    csvio::write_atomic(&path, &csvio::levels_to_csv(&levels, field.magnitude(), "molecular"))?;

    println!("dimension: {}", levels.dimension());
    let e = levels.energies();
    if e.len() >= 2 {
        let gap = e
            .iter()
            .find(|&&x| x > levels.degeneracy_tol())
            .copied()
            .unwrap_or(0.0);
        println!(
            "first gap: {:.6} K = {:.6} cm-1 = {:.4} GHz",
            gap,
            kelvin_to_cm1(gap),
            kelvin_to_ghz(gap)
        );
    }
    if (sys.spin - 1.0).abs() < 1e-12 && sys.d_kelvin < 0.0 {
        let delta = clock_gap(&sys)?;
        println!(
            "clock gap 2|E|: {:.6} K = {:.6} cm-1 = {:.4} GHz",
            delta,
            kelvin_to_cm1(delta),
            kelvin_to_ghz(delta)
        );
    }
    if sys.spin == 1.5 {
        let doublet = e[e.len() / 2] - e[0];
        println!(
            "Kramers doublet gap 2|D|: {:.6} K = {:.6} cm-1",
            doublet,
            kelvin_to_cm1(doublet)
        );
    }
    if let Some(p) = preset {
        if !p.assumed.is_empty() {
            println!("note: placeholder (non-published) parameters: {}", p.assumed.join(", "));
        }
    }
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Args, Debug)]
pub struct HeatcapArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Applied field magnitude, tesla.
    #[arg(long, default_value_t = 0.0)]
    pub field: f64,
    /// Orientation scheme JSON, e.g. {"scheme":"powder","n":350}.
    #[arg(long)]
    pub scheme: Option<String>,
    /// Cone aperture shortcut in degrees (0 = aligned).
    #[arg(long)]
    pub aperture: Option<f64>,
    /// Add the Debye lattice term of the preset (θ_D) to a second column file.
    #[arg(long, default_value_t = false)]
    pub debye: bool,
    #[arg(long, default_value = "heatcap.csv")]
    pub out: String,
}

pub fn heatcap(outdir: &Path, args: HeatcapArgs) -> Result<()> {
    let (sys, preset) = args.model.load()?;
    let grid = args.grid.build()?;
    let scheme = parse_scheme(&args.scheme, args.aperture)?;
    let curve = averaged_observable(
        &sys,
        &scheme,
        AveragedObservable::SpecificHeat,
        &grid,
        &FieldVector::along_z(args.field),
    )?;
    let path = outdir.join(&args.out);
    csvio::write_curve(&path, &curve)?;
    if let Some((t0, c0)) = curve.peak() {
        println!("c/R peak: {:.4} at T0 = {:.4} K", c0, t0);
        println!(
            "effective gap via k_B T0/0.41678: {:.4} K = {:.4} cm-1",
            gap_from_t0(t0)?,
            kelvin_to_cm1(gap_from_t0(t0)?)
        );
    } else {
        println!("c/R peak: outside the grid");
    }
    if args.debye {
        let theta = preset
            .as_ref()
            .and_then(|p| p.debye_theta_kelvin)
            .ok_or_else(|| SpinError::InvalidParameter("no Debye θ_D for this model".into()))?;
        let lattice = debye_specific_heat(theta, &grid)?;
        let dpath = outdir.join(format!("debye_{}", args.out));
        csvio::write_curve(&dpath, &lattice)?;
        println!("wrote {}", dpath.display());
    }
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Args, Debug)]
pub struct MagnetizeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Isotherm temperatures in kelvin, comma-separated.
    #[arg(long, default_value = "2,4,6", value_delimiter = ',')]
    pub temps: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub hmin: f64,
    #[arg(long, default_value_t = 5.0)]
    pub hmax: f64,
    #[arg(long, default_value_t = 25)]
    pub n: usize,
    /// Orientation scheme JSON; default random powder of 350 points.
    #[arg(long)]
    pub scheme: Option<String>,
    /// Output prefix; one CSV per temperature.
    #[arg(long, default_value = "magnetize")]
    pub out: String,
}

pub fn magnetize(outdir: &Path, args: MagnetizeArgs) -> Result<()> {
    let (sys, _) = args.model.load()?;
    let scheme = match &args.scheme {
        Some(_) => parse_scheme(&args.scheme, None)?,
        None => OrientationScheme::Powder { n: 350 },
    };
    if args.n < 2 || args.hmax <= args.hmin {
        return Err(SpinError::InvalidParameter("bad field grid".into()));
    }
    for &t in &args.temps {
        let grid = TemperatureGrid::new(vec![t])?;
        let step = (args.hmax - args.hmin) / (args.n - 1) as f64;
        let hs: Vec<f64> = (0..args.n).map(|i| args.hmin + step * i as f64).collect();
        let mut values = Vec::with_capacity(hs.len());
        for &h in &hs {
            let c = averaged_observable(
                &sys,
                &scheme,
                AveragedObservable::Magnetization,
                &grid,
                &FieldVector::along_z(h),
            )?;
            values.push(c.values[0]);
        }
        let curve = thermo::ThermoCurve::new(
            hs,
            values,
            thermo::Observable::Magnetization,
            0.0,
            scheme.label(),
        )?;
        let path = outdir.join(format!("{}_t{:.3}.csv", args.out, t));
        csvio::write_curve(&path, &curve)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

#[derive(Args, Debug)]
pub struct SusceptArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Measuring field, tesla.
    #[arg(long, default_value_t = 0.1)]
    pub field: f64,
    /// Observable: chit (χ·T), chi (χ_T) or vanvleck (χ_S).
    #[arg(long, default_value = "chit")]
    pub kind: String,
    /// TIP added to χ, cm³/mol; defaults to the preset value when present.
    #[arg(long)]
    pub tip: Option<f64>,
    /// Orientation scheme JSON; default powder.
    #[arg(long)]
    pub scheme: Option<String>,
    #[arg(long, default_value = "suscept.csv")]
    pub out: String,
}

pub fn suscept(outdir: &Path, args: SusceptArgs) -> Result<()> {
    let (sys, preset) = args.model.load()?;
    let grid = args.grid.build()?;
    let scheme = match &args.scheme {
        Some(_) => parse_scheme(&args.scheme, None)?,
        None => OrientationScheme::Powder { n: 350 },
    };
    let tip = args.tip.or_else(|| preset.as_ref().and_then(|p| p.tip_cm3_mol)).unwrap_or(0.0);
    let observable = match args.kind.as_str() {
        "chit" | "chi" => AveragedObservable::ChiIsothermal,
        "vanvleck" => AveragedObservable::ChiVanVleck,
        other => {
            return Err(SpinError::InvalidParameter(format!(
                "unknown susceptibility kind '{other}' (chit, chi, vanvleck)"
            )))
        }
    };
    let mut curve = averaged_observable(
        &sys,
        &scheme,
        observable,
        &grid,
        &FieldVector::along_z(args.field),
    )?;
    curve.add_constant(tip);
    if args.kind == "chit" {
        for (v, t) in curve.values.iter_mut().zip(curve.x.iter()) {
            *v *= t;
        }
        curve.observable = thermo::Observable::ChiTProduct;
    }
    let path = outdir.join(&args.out);
    csvio::write_curve(&path, &curve)?;
    let first = curve.values.first().unwrap();
    let last = curve.values.last().unwrap();
    println!("{}: {:.4} at {:.3} K … {:.4} at {:.3} K", curve.observable.label(), first, curve.x[0], last, curve.x[curve.x.len()-1]);
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Args, Debug)]
pub struct PowderArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Observable: specific_heat, magnetization, chi_isothermal, chi_van_vleck.
    #[arg(long, default_value = "specific_heat")]
    pub observable: String,
    #[arg(long, default_value_t = 0.0)]
    pub field: f64,
    /// Orientation scheme JSON; overrides --aperture.
    #[arg(long)]
    pub scheme: Option<String>,
    /// Cone aperture in degrees (90 ≈ random powder).
    #[arg(long)]
    pub aperture: Option<f64>,
    #[arg(long, default_value = "powder.csv")]
    pub out: String,
}

pub fn powder(outdir: &Path, args: PowderArgs) -> Result<()> {
    let (sys, _) = args.model.load()?;
    let grid = args.grid.build()?;
    let scheme = if args.scheme.is_some() {
        parse_scheme(&args.scheme, None)?
    } else if let Some(a) = args.aperture {
        parse_scheme(&None, Some(a))?
    } else {
        OrientationScheme::Powder { n: 350 }
    };
    let observable = match args.observable.as_str() {
        "specific_heat" => AveragedObservable::SpecificHeat,
        "magnetization" => AveragedObservable::Magnetization,
        "chi_isothermal" => AveragedObservable::ChiIsothermal,
        "chi_van_vleck" => AveragedObservable::ChiVanVleck,
        other => {
            return Err(SpinError::InvalidParameter(format!("unknown observable '{other}'")))
        }
    };
    let curve = averaged_observable(
        &sys,
        &scheme,
        observable,
        &grid,
        &FieldVector::along_z(args.field),
    )?;
    let path = outdir.join(&args.out);
    csvio::write_curve(&path, &curve)?;
    if observable == AveragedObservable::SpecificHeat {
        if let Some((t0, c0)) = curve.peak() {
            println!("averaged c/R peak: {:.4} at T0 = {:.4} K", c0, t0);
        }
    }
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Args, Debug)]
pub struct McArgs {
    /// Lattice preset: fcc12, bipartite12 or square.
    #[arg(long, default_value = "fcc12")]
    pub lattice: String,
    /// Custom neighbor-offset list as JSON, e.g. [[1,0,0],[-1,0,0]];
    /// overrides --lattice.
    #[arg(long)]
    pub offsets: Option<String>,
    /// Linear size L (even for the Z = 12 presets).
    #[arg(long, default_value_t = 10)]
    pub l: usize,
    /// Coupling J in cm⁻¹ (negative = antiferromagnetic).
    #[arg(long, allow_hyphen_values = true, default_value_t = -0.035)]
    pub j_cm1: f64,
    /// Effective Ising moment.
    #[arg(long, default_value_t = 1.5)]
    pub m_eff: f64,
    #[arg(long, default_value_t = 0.08)]
    pub tmin: f64,
    #[arg(long, default_value_t = 0.45)]
    pub tmax: f64,
    /// Number of temperatures.
    #[arg(long, default_value_t = 26)]
    pub nt: usize,
    /// Measurement sweeps per temperature.
    #[arg(long, default_value_t = 20_000)]
    pub sweeps: usize,
    /// Discarded burn-in sweeps per temperature.
    #[arg(long, default_value_t = 5_000)]
    pub burnin: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value = "mc.csv")]
    pub out: String,
}

pub fn mc(outdir: &Path, args: McArgs) -> Result<()> {
    if args.nt < 2 || args.tmax <= args.tmin {
        return Err(SpinError::InvalidParameter("bad temperature grid".into()));
    }
    let j_kelvin = cm1_to_kelvin(args.j_cm1);
    let mut lattice = match &args.offsets {
        Some(text) => {
            let offsets: Vec<[i64; 3]> = serde_json::from_str(text)
                .map_err(|e| SpinError::ParseError(format!("offset list: {e}")))?;
            IsingLattice::new([args.l, args.l, args.l], offsets, j_kelvin, args.m_eff)?
        }
        None => IsingLattice::preset(&args.lattice, args.l, j_kelvin, args.m_eff)?,
    };
    let temps: Vec<f64> = (0..args.nt)
        .map(|i| args.tmin + (args.tmax - args.tmin) * i as f64 / (args.nt - 1) as f64)
        .collect();
    let result = metropolis_run(&mut lattice, &temps, args.sweeps, args.burnin, args.seed)?;
    let path = outdir.join(&args.out);
    csvio::write_mc(&path, &result)?;
    let est = estimate_tn(std::slice::from_ref(&result))?;
    match est.c_peak {
        Some((tn, err)) => println!("c-peak T_N estimate: {:.4} ± {:.4} K", tn, err),
        None => println!("c-peak T_N estimate: inconclusive (peak at grid boundary)"),
    }
    println!("energy bookkeeping drift: {:.3e} K", result.max_energy_drift);
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Args, Debug)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Full ClusterModel JSON file (system, n_sites, bonds, field);
    /// overrides --preset/--model and the topology flags.
    #[arg(long)]
    pub cluster_json: Option<PathBuf>,
    /// Intermolecular coupling J in kelvin for every bond.
    #[arg(long, allow_hyphen_values = true, default_value_t = -0.0504)]
    pub j_kelvin: f64,
    /// Bond topology: star or star_ring.
    #[arg(long, default_value = "star_ring")]
    pub topology: String,
    /// Field along the shared molecular z axis, tesla.
    #[arg(long, default_value_t = 0.0)]
    pub hz: f64,
    #[arg(long, default_value_t = 0.02)]
    pub tmin: f64,
    #[arg(long, default_value_t = 5.0)]
    pub tmax: f64,
    #[arg(long, default_value_t = 220)]
    pub n: usize,
    #[arg(long, default_value = "cluster")]
    pub out: String,
}

pub fn cluster(outdir: &Path, args: ClusterArgs) -> Result<()> {
    let model = match &args.cluster_json {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                SpinError::InvalidParameter(format!("cannot read {}: {e}", path.display()))
            })?;
            ClusterModel::from_json(&text)?
        }
        None => {
            let (sys, _) = args.model.load()?;
            let topology = match args.topology.as_str() {
                "star" => ClusterTopology::Star,
                "star_ring" => ClusterTopology::StarRing,
                other => {
                    return Err(SpinError::InvalidParameter(format!(
                        "unknown topology '{other}' (star, star_ring)"
                    )))
                }
            };
            ClusterModel::six_plus_one(
                sys,
                args.j_kelvin,
                topology,
                FieldVector::along_z(args.hz),
            )?
        }
    };
    let sys = model.sites[0].clone();
    println!("cluster dimension: {}", model.dimension());
    let grid = TemperatureGrid::log(args.tmin, args.tmax, args.n)?;
    let t_start = std::time::Instant::now();
    let levels = cluster::cluster_levels(&model)?;
    println!("diagonalized in {:.1?}", t_start.elapsed());
    let mut curve = thermo::specific_heat(&levels, &grid);
    for v in &mut curve.values {
        *v /= model.sites.len() as f64;
    }
    curve.scheme = format!("cluster({})", model.sites.len());
    let cpath = outdir.join(format!("{}_heatcap.csv", args.out));
    csvio::write_curve(&cpath, &curve)?;
    let lpath = outdir.join(format!("{}_levels.csv", args.out));
    csvio::write_atomic(&lpath, &csvio::levels_to_csv(&levels, args.hz, "cluster"))?;

    let delta = if (sys.spin - 1.0).abs() < 1e-12 { 2.0 * sys.e_kelvin.abs() } else { 0.0 };
    let ratio = cluster::quantum_decoupling_ratio(delta, 12, args.j_kelvin, sys.spin);
    println!(
        "decoupling: Δ = {:.4} K, ε = Z|J|S²/2 = {:.4} K, Δ/ε = {:.2}{}",
        delta,
        ratio.epsilon_kelvin,
        ratio.ratio,
        if ratio.quantum_paramagnet { " (quantum paramagnet regime)" } else { "" }
    );
    println!("wrote {}", cpath.display());
    println!("wrote {}", lpath.display());
    Ok(())
}

#[derive(Args, Debug)]
pub struct RelaxArgs {
    /// ac-susceptibility CSV (f_Hz,chi_re,chi_im[,sigma]): Cole-Cole fit.
    #[arg(long, conflicts_with = "t1")]
    pub ac: Option<PathBuf>,
    /// T1 CSV (T_K,T1_s[,sigma]): direct+Raman fit.
    #[arg(long)]
    pub t1: Option<PathBuf>,
    #[arg(long, default_value_t = 16)]
    pub starts: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "relax")]
    pub out: String,
}

pub fn relax(outdir: &Path, args: RelaxArgs) -> Result<()> {
    let opts = FitOptions { starts: args.starts, seed: args.seed, ..FitOptions::default() };
    match (&args.ac, &args.t1) {
        (Some(path), None) => {
            let text = fs::read_to_string(path).map_err(|e| {
                SpinError::InvalidParameter(format!("cannot read {}: {e}", path.display()))
            })?;
            let data = csvio::read_ac_csv(&text)?;
            let fitted = relaxation::cole_cole_fit(&data, &opts)?;
            println!(
                "Cole-Cole: chi_T = {:.6}, chi_S = {:.6}, tau = {:.6e} s, beta = {:.4}{}",
                fitted.params.chi_t,
                fitted.params.chi_s,
                fitted.params.tau,
                fitted.params.beta,
                if fitted.ill_conditioned { " [ill-conditioned: peak not bracketed]" } else { "" }
            );
            let jpath = outdir.join(format!("{}_cole_cole.json", args.out));
            csvio::write_atomic(&jpath, &serde_json::to_string_pretty(&fitted).unwrap())?;
            // Fitted model sampled at the data frequencies.
            let mut txt = String::from("# cole_cole_fit,0.00000000e0,model\nf_Hz,chi_re,chi_im\n");
            for p in &data {
                let (re, im) = relaxation::cole_cole_eval(&fitted.params, p.omega);
                txt.push_str(&format!(
                    "{},{},{}\n",
                    csvio::fmt(p.omega / (2.0 * std::f64::consts::PI)),
                    csvio::fmt(re),
                    csvio::fmt(im)
                ));
            }
            let cpath = outdir.join(format!("{}_cole_cole.csv", args.out));
            csvio::write_atomic(&cpath, &txt)?;
            println!("wrote {}", jpath.display());
            println!("wrote {}", cpath.display());
            Ok(())
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| {
                SpinError::InvalidParameter(format!("cannot read {}: {e}", path.display()))
            })?;
            let (data, sigma) = csvio::read_t1_csv(&text)?;
            let fitted = relaxation::t1_fit(&data, sigma.as_deref())?;
            println!(
                "1/T1 = A_dir·T + A_Raman·T⁴: A_dir = {:.4} ± {:.4} s⁻¹K⁻¹, A_Raman = {:.4} ± {:.4} s⁻¹K⁻⁴{}",
                fitted.model.a_dir,
                fitted.sigma.0,
                fitted.model.a_raman,
                fitted.sigma.1,
                if fitted.clipped { " [negative coefficient clipped]" } else { "" }
            );
            let t1_2k = relaxation::t1_eval(&fitted.model, 2.0)?;
            println!("T1(2 K) = {:.3e} s", t1_2k);
            let jpath = outdir.join(format!("{}_t1.json", args.out));
            csvio::write_atomic(&jpath, &serde_json::to_string_pretty(&fitted).unwrap())?;
            println!("wrote {}", jpath.display());
            Ok(())
        }
        _ => Err(SpinError::InvalidParameter("specify exactly one of --ac or --t1".into())),
    }
}

/// JSON form of a fit problem: kind-specific knobs plus multi-start
/// settings, all optional except the kind.
#[derive(Debug, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitProblemSpec {
    pub kind: String,
    #[serde(default)]
    pub g: Option<f64>,
    #[serde(default)]
    pub spin: Option<f64>,
    #[serde(default)]
    pub d_bounds_cm1: Option<(f64, f64)>,
    #[serde(default)]
    pub e_max_cm1: Option<f64>,
    #[serde(default)]
    pub orientations: Option<usize>,
    #[serde(default)]
    pub starts: Option<usize>,
    #[serde(default)]
    pub max_evals: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Fit kind: zfs_powder, axis_angle or chi_t.
    #[arg(long, required_unless_present = "problem")]
    pub kind: Option<String>,
    /// FitProblem JSON file; flag values act as fallbacks.
    #[arg(long)]
    pub problem: Option<PathBuf>,
    /// Response CSV: T_K,H_T,value[,sigma].
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Fixed g for zfs_powder.
    #[arg(long, default_value_t = 2.16)]
    pub g: f64,
    /// Spin quantum number for zfs_powder.
    #[arg(long, default_value_t = 1.0)]
    pub spin: f64,
    /// D search bounds in cm⁻¹ for zfs_powder.
    #[arg(long, allow_hyphen_values = true, default_value_t = -6.0)]
    pub d_min_cm1: f64,
    #[arg(long, default_value_t = 6.0)]
    pub d_max_cm1: f64,
    /// |E| upper bound in cm⁻¹.
    #[arg(long, default_value_t = 0.8)]
    pub e_max_cm1: f64,
    /// Powder resolution of the forward model.
    #[arg(long, default_value_t = 120)]
    pub orientations: usize,
    #[arg(long, default_value_t = 16)]
    pub starts: usize,
    #[arg(long, default_value_t = 2000)]
    pub max_evals: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "fit")]
    pub out: String,
}

pub fn fit(outdir: &Path, mut args: FitArgs) -> Result<()> {
    if let Some(path) = &args.problem {
        let text = fs::read_to_string(path).map_err(|e| {
            SpinError::InvalidParameter(format!("cannot read {}: {e}", path.display()))
        })?;
        let spec: FitProblemSpec = serde_json::from_str(&text)
            .map_err(|e| SpinError::ParseError(format!("{}: {e}", path.display())))?;
        args.kind = Some(spec.kind);
        if let Some(g) = spec.g { args.g = g; }
        if let Some(sp) = spec.spin { args.spin = sp; }
        if let Some((lo, hi)) = spec.d_bounds_cm1 {
            args.d_min_cm1 = lo;
            args.d_max_cm1 = hi;
        }
        if let Some(e) = spec.e_max_cm1 { args.e_max_cm1 = e; }
        if let Some(n) = spec.orientations { args.orientations = n; }
        if let Some(st) = spec.starts { args.starts = st; }
        if let Some(seed) = spec.seed { args.seed = seed; }
        if let Some(me) = spec.max_evals { args.max_evals = me; }
    }
    let kind = args.kind.clone().ok_or_else(|| {
        SpinError::InvalidParameter("missing fit kind (flag --kind or problem JSON)".into())
    })?;
    let text = fs::read_to_string(&args.data).map_err(|e| {
        SpinError::InvalidParameter(format!("cannot read {}: {e}", args.data.display()))
    })?;
    let points = csvio::read_response_csv(&text)?;
    let opts = FitOptions {
        starts: args.starts,
        seed: args.seed,
        max_evals: args.max_evals,
        ..FitOptions::default()
    };

    match kind.as_str() {
        "zfs_powder" => {
            let data = vec![Dataset::new(ResponseKind::Magnetization, points)?];
            let report = fitting::fit_zfs_powder_magnetization(
                &data,
                args.g,
                args.spin,
                (cm1_to_kelvin(args.d_min_cm1), cm1_to_kelvin(args.d_max_cm1)),
                cm1_to_kelvin(args.e_max_cm1),
                args.orientations,
                &opts,
            )?;
            if let Some((d, e, r)) = report.negative_branch {
                println!(
                    "D<0 branch: D = {:.4} cm-1, |E| = {:.4} cm-1, residual {:.3e}",
                    kelvin_to_cm1(d),
                    kelvin_to_cm1(e),
                    r
                );
            }
            if let Some((d, e, r)) = report.positive_branch {
                println!(
                    "D>0 branch: D = {:.4} cm-1, |E| = {:.4} cm-1, residual {:.3e}",
                    kelvin_to_cm1(d),
                    kelvin_to_cm1(e),
                    r
                );
            }
            println!("powder magnetization cannot fix the sign of D; both minima reported");
            write_fit_outputs(outdir, &args.out, &report.fit)?;
            Ok(())
        }
        "axis_angle" => {
            let (sys, _) = args.model.load()?;
            // Group rows into one dataset per field value.
            let mut fields: Vec<f64> = Vec::new();
            let mut sets: Vec<Vec<fitting::DataPoint>> = Vec::new();
            for p in points {
                match fields.iter().position(|&h| (h - p.h).abs() < 1e-12) {
                    Some(i) => sets[i].push(p),
                    None => {
                        fields.push(p.h);
                        sets.push(vec![p]);
                    }
                }
            }
            let datasets: Vec<Dataset> = sets
                .into_iter()
                .map(|pts| Dataset::new(ResponseKind::HeatCapacity, pts))
                .collect::<Result<_>>()?;
            let report = fitting::fit_axis_angle_from_heatcap(&datasets, &fields, &sys, &opts)?;
            println!("easy-axis polar angle: {:.2}°", report.angle_deg);
            write_fit_outputs(outdir, &args.out, &report.fit)?;
            Ok(())
        }
        "chi_t" => {
            let (sys, _) = args.model.load()?;
            let field = points.first().map(|p| p.h).unwrap_or(0.1);
            let data = Dataset::new(ResponseKind::ChiTProduct, points)?;
            let result = fitting::fit_chi_t(&data, &sys, field, true, &opts)?;
            println!(
                "g = {:.4}, TIP = {:.3e} cm³/mol, residual {:.3e}",
                result.best[0], result.best[1], result.residual
            );
            write_fit_outputs(outdir, &args.out, &result)?;
            Ok(())
        }
        other => Err(SpinError::InvalidParameter(format!(
            "unknown fit kind '{other}' (zfs_powder, axis_angle, chi_t)"
        ))),
    }
}

fn write_fit_outputs(outdir: &Path, prefix: &str, fit: &fitting::FitResult) -> Result<()> {
    let jpath = outdir.join(format!("{prefix}_report.json"));
    csvio::write_atomic(&jpath, &serde_json::to_string_pretty(fit).unwrap())?;
    let mut txt = String::from("# fit_starts\nstart,residual,converged\n");
    for o in &fit.outcomes {
        txt.push_str(&format!("{},{},{}\n", o.start_index, csvio::fmt(o.residual), o.converged));
    }
    let spath = outdir.join(format!("{prefix}_starts.csv"));
    csvio::write_atomic(&spath, &txt)?;
    let mut txt = String::from("# fit_residuals\npoint,residual\n");
    for (i, r) in fit.residuals.iter().enumerate() {
        txt.push_str(&format!("{},{}\n", i, csvio::fmt(*r)));
    }
    let rpath = outdir.join(format!("{prefix}_residuals.csv"));
    csvio::write_atomic(&rpath, &txt)?;
    println!("wrote {}", jpath.display());
    println!("wrote {}", spath.display());
    println!("wrote {}", rpath.display());
    Ok(())
}

#[derive(Args, Debug)]
pub struct RabiArgs {
    #[arg(long, default_value_t = 2.0)]
    pub g: f64,
    /// Drive amplitude along the anisotropy axis, tesla.
    #[arg(long, default_value_t = 1e-3)]
    pub bz: f64,
    /// Spin quantum number.
    #[arg(long = "S", alias = "spin", default_value_t = 1.0)]
    pub spin: f64,
}

pub fn rabi(args: RabiArgs) -> Result<()> {
    let r = relaxation::rabi_frequency(args.g, args.bz, args.spin)?;
    println!("Rabi frequency: {:.3e} Hz (angular {:.3e} rad/s)", r.linear_hz, r.angular_rad_s);
    if r.linear_hz > 0.0 {
        println!("pi-rotation time: {:.3e} s", 0.5 / r.linear_hz);
    }
    Ok(())
}
