//! CSV tables. Numbers are written with 17 significant digits and missing
//! values as `NA`.

use std::fmt::Write as _;
use std::path::Path;

use chemokin_core::diagnostics::{BimodalityPoint, GridProfile, Slice};
use chemokin_core::fv::ExksState;
use chemokin_core::Dim;

use crate::error::{Error, Result};

pub const NA: &str = "NA";
pub const PROFILE_1D_HEADER: &str = "x,rho,rho_f,rho_g,xi_plus,xi_minus,xi_bar";
pub const PROFILE_2D_HEADER: &str = "x1,x2,rho,rho_f,rho_g,xi_bar";
pub const BIMODALITY_HEADER: &str = "param,rho_dd,rho_g_dd,source";

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| NA.to_string(), num)
}

fn join(fields: &[String]) -> String {
    fields.join(",")
}

pub fn profile(p: &GridProfile) -> String {
    let mut s = String::new();
    match p.dim {
        Dim::One => {
            s.push_str(PROFILE_1D_HEADER);
            s.push('\n');
            for i in 0..p.total_cells() {
                let row = [
                    num(p.center(i)[0]),
                    num(p.rho[i]),
                    num(p.rho_f[i]),
                    num(p.rho_g[i]),
                    opt(p.xi_plus[i]),
                    opt(p.xi_minus[i]),
                    opt(p.xi_bar[i]),
                ];
                let _ = writeln!(s, "{}", join(&row));
            }
        }
        Dim::Two => {
            s.push_str(PROFILE_2D_HEADER);
            s.push('\n');
            for i in 0..p.total_cells() {
                let c = p.center(i);
                let row = [
                    num(c[0]),
                    num(c[1]),
                    num(p.rho[i]),
                    num(p.rho_f[i]),
                    num(p.rho_g[i]),
                    opt(p.xi_bar[i]),
                ];
                let _ = writeln!(s, "{}", join(&row));
            }
        }
    }
    s
}

pub fn bimodality(points: &[BimodalityPoint]) -> String {
    let mut s = format!("{BIMODALITY_HEADER}\n");
    for p in points {
        let _ = writeln!(s, "{},{},{},{}", num(p.param), num(p.rho_dd), num(p.rho_g_dd), p.source);
    }
    s
}

/// The `(x, m)` density of an extended-model state.
pub fn h_field(state: &ExksState) -> String {
    let mut s = String::from("x,m,h\n");
    let (xs, ms) = (state.x_centers(), state.m_centers());
    for (i, x) in xs.iter().enumerate() {
        for (k, m) in ms.iter().enumerate() {
            let _ = writeln!(s, "{},{},{}", num(*x), num(*m), num(state.h[i * state.n_m + k]));
        }
    }
    s
}

pub fn slice(sl: &Slice) -> String {
    let mut s = String::from("coord,rho,rho_f,rho_g,xi_bar\n");
    for i in 0..sl.coord.len() {
        let row = [num(sl.coord[i]), num(sl.rho[i]), num(sl.rho_f[i]), num(sl.rho_g[i]), opt(sl.xi_bar[i])];
        let _ = writeln!(s, "{}", join(&row));
    }
    s
}

/// Long-format overlay of several 1D density profiles.
pub fn overlay(series: &[(f64, &str, &GridProfile)]) -> String {
    let mut s = String::from("param,source,x,rho\n");
    for (param, source, p) in series {
        for i in 0..p.total_cells() {
            let _ = writeln!(s, "{},{},{},{}", num(*param), source, num(p.center(i)[0]), num(p.rho[i]));
        }
    }
    s
}

/// Two-column `quantity,value` report.
pub fn report(rows: &[(String, Option<f64>)]) -> String {
    let mut s = String::from("quantity,value\n");
    for (k, v) in rows {
        let _ = writeln!(s, "{k},{}", opt(*v));
    }
    s
}

fn parse_field(path: &Path, line: usize, v: &str) -> Result<Option<f64>> {
    if v == NA {
        return Ok(None);
    }
    v.trim().parse::<f64>().map(Some).map_err(|_| Error::Input {
        path: path.to_path_buf(),
        msg: format!("line {line}: bad number `{v}`"),
    })
}

/// Reads a profile table written by [`profile`].
pub fn read_profile(path: &Path) -> Result<GridProfile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |msg: String| Error::Input { path: path.to_path_buf(), msg };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty file".into()))?.trim();
    let dim = match header {
        PROFILE_1D_HEADER => Dim::One,
        PROFILE_2D_HEADER => Dim::Two,
        other => return Err(bad(format!("unrecognised header `{other}`"))),
    };
    let width = header.split(',').count();
    let mut cols: Vec<Vec<Option<f64>>> = vec![Vec::new(); width];
    for (n, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != width {
            return Err(bad(format!("line {}: expected {width} fields", n + 2)));
        }
        for (c, f) in fields.iter().enumerate() {
            cols[c].push(parse_field(path, n + 2, f)?);
        }
    }
    let dense = |c: usize, name: &str| -> Result<Vec<f64>> {
        cols[c].iter().map(|v| v.ok_or_else(|| bad(format!("`{name}` has missing values")))).collect()
    };
    let rows = cols[0].len();
    let (n_cells, x) = match dim {
        Dim::One => (rows, dense(0, "x")?),
        Dim::Two => {
            let n = (rows as f64).sqrt().round() as usize;
            if n * n != rows {
                return Err(bad(format!("{rows} rows do not form a square lattice")));
            }
            (n, dense(0, "x1")?[..n].to_vec())
        }
    };
    if n_cells < 2 {
        return Err(bad("need at least two cells per axis".into()));
    }
    let dx = x[1] - x[0];
    let off = if dim == Dim::One { 0 } else { 1 };
    let (rho_f, rho_g) = (dense(2 + off, "rho_f")?, dense(3 + off, "rho_g")?);
    let (xi_plus, xi_minus, xi_bar) = match dim {
        Dim::One => (cols[4].clone(), cols[5].clone(), cols[6].clone()),
        Dim::Two => (vec![None; rows], vec![None; rows], cols[5].clone()),
    };
    Ok(GridProfile {
        dim,
        n_cells,
        domain_length: dx * n_cells as f64,
        rho: dense(1 + off, "rho")?,
        rho_f,
        rho_g,
        xi_plus,
        xi_minus,
        xi_bar,
        snapshots: 1,
        window: 0.0,
    })
}
