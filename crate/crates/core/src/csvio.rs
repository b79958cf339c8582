//! CSV emit/ingest with a fixed dialect: comma separators, "." decimals,
//! "#"-prefixed metadata lines, UTF-8, LF endings, 9 significant digits.
//! Output files are written atomically (temp in the target directory, then
//! rename), so a failed run never leaves a partial file behind.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Result, SpinError};
use crate::latticemc::McResult;
use crate::relaxation::AcPoint;
use crate::spincore::LevelSet;
use crate::thermo::ThermoCurve;

/// Formats with 9 significant digits, stable across runs.
pub fn fmt(x: f64) -> String {
    if x == 0.0 {
        "0.00000000e0".into()
    } else {
        format!("{x:.8e}")
    }
}

/// Writes bytes atomically: temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("out"),
        std::process::id()
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Curve CSV: `# observable,field_T,scheme` then `x,value` rows.
pub fn curve_to_csv(curve: &ThermoCurve) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# {},{},{}\n",
        curve.observable.label(),
        fmt(curve.field_t),
        curve.scheme
    ));
    out.push_str("x,value\n");
    for (x, v) in curve.x.iter().zip(&curve.values) {
        out.push_str(&format!("{},{}\n", fmt(*x), fmt(*v)));
    }
    out
}

pub fn write_curve(path: &Path, curve: &ThermoCurve) -> Result<()> {
    write_atomic(path, &curve_to_csv(curve))
}

/// Level report CSV: `index,energy_K,energy_cm1,energy_GHz`.
pub fn levels_to_csv(levels: &LevelSet, field_t: f64, scheme: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!("# levels,{},{}\n", fmt(field_t), scheme));
    out.push_str("index,energy_K,energy_cm1,energy_GHz\n");
    for (i, &e) in levels.energies().iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            i,
            fmt(e),
            fmt(crate::units::kelvin_to_cm1(e)),
            fmt(crate::units::kelvin_to_ghz(e))
        ));
    }
    out
}

/// Monte Carlo CSV: `T,E,c,err_c,m_stag,binder` per the wire contract.
pub fn mc_to_csv(result: &McResult) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# mc,sites={},L={},sweeps={},burn_in={},seed={}\n",
        result.sites, result.linear_size, result.sweeps, result.burn_in, result.seed
    ));
    out.push_str("T,E,c,err_c,m_stag,binder\n");
    for r in &result.records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt(r.t),
            fmt(r.energy_per_site),
            fmt(r.c_over_r),
            fmt(r.err_c),
            fmt(r.m_staggered),
            fmt(r.binder)
        ));
    }
    out
}

pub fn write_mc(path: &Path, result: &McResult) -> Result<()> {
    write_atomic(path, &mc_to_csv(result))
}

fn parse_f64(tok: &str, line_no: usize) -> Result<f64> {
    tok.trim().parse::<f64>().map_err(|_| {
        SpinError::ParseError(format!("line {line_no}: '{tok}' is not a number"))
    })
}

fn data_rows(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn looks_like_header(line: &str) -> bool {
    line.split(',').next().map_or(false, |tok| tok.trim().parse::<f64>().is_err())
}

/// ac-susceptibility CSV with columns `f_Hz,chi_re,chi_im[,sigma]`.
/// Frequencies are linear (instrument convention); ω = 2πf internally.
pub fn read_ac_csv(text: &str) -> Result<Vec<AcPoint>> {
    let mut out = Vec::new();
    for (n, line) in data_rows(text) {
        if out.is_empty() && looks_like_header(line) {
            continue;
        }
        let toks: Vec<&str> = line.split(',').collect();
        if toks.len() < 3 {
            return Err(SpinError::ParseError(format!(
                "line {n}: expected f_Hz,chi_re,chi_im[,sigma]"
            )));
        }
        let f_hz = parse_f64(toks[0], n)?;
        out.push(AcPoint {
            omega: 2.0 * std::f64::consts::PI * f_hz,
            chi_re: parse_f64(toks[1], n)?,
            chi_im: parse_f64(toks[2], n)?,
            sigma: if toks.len() > 3 { Some(parse_f64(toks[3], n)?) } else { None },
        });
    }
    if out.is_empty() {
        return Err(SpinError::ParseError("no data rows found".into()));
    }
    Ok(out)
}

/// T₁ CSV with columns `T_K,T1_s[,sigma]`.
pub fn read_t1_csv(text: &str) -> Result<(Vec<(f64, f64)>, Option<Vec<f64>>)> {
    let mut data = Vec::new();
    let mut sigmas = Vec::new();
    for (n, line) in data_rows(text) {
        if data.is_empty() && looks_like_header(line) {
            continue;
        }
        let toks: Vec<&str> = line.split(',').collect();
        if toks.len() < 2 {
            return Err(SpinError::ParseError(format!("line {n}: expected T_K,T1_s[,sigma]")));
        }
        data.push((parse_f64(toks[0], n)?, parse_f64(toks[1], n)?));
        if toks.len() > 2 {
            sigmas.push(parse_f64(toks[2], n)?);
        }
    }
    if data.is_empty() {
        return Err(SpinError::ParseError("no data rows found".into()));
    }
    let sigmas = if sigmas.len() == data.len() { Some(sigmas) } else { None };
    Ok((data, sigmas))
}

/// Response-data CSV with columns `T_K,H_T,value[,sigma]`, shared by the
/// magnetization and heat-capacity fit inputs.
pub fn read_response_csv(text: &str) -> Result<Vec<crate::fitting::DataPoint>> {
    let mut out = Vec::new();
    for (n, line) in data_rows(text) {
        if out.is_empty() && looks_like_header(line) {
            continue;
        }
        let toks: Vec<&str> = line.split(',').collect();
        if toks.len() < 3 {
            return Err(SpinError::ParseError(format!(
                "line {n}: expected T_K,H_T,value[,sigma]"
            )));
        }
        out.push(crate::fitting::DataPoint {
            t: parse_f64(toks[0], n)?,
            h: parse_f64(toks[1], n)?,
            value: parse_f64(toks[2], n)?,
            sigma: if toks.len() > 3 { Some(parse_f64(toks[3], n)?) } else { None },
        });
    }
    if out.is_empty() {
        return Err(SpinError::ParseError("no data rows found".into()));
    }
    Ok(out)
}
