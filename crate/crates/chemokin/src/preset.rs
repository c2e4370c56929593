//! Named experiment bundles, one per figure.

use std::fmt::Write as _;

use chemokin_core::diagnostics::{
    diffusion_layer_marker, peak_position, radial_profile, rescale_collapse, slice_2d, Axis,
    BimodalityPoint, GridProfile, Normalization, ScaledProfile, Source,
};
use rayon::prelude::*;

use crate::config::{parse_config, EngineKind, RunConfig, Scale};
use crate::csv::{self, num};
use crate::error::{Error, Result};
use crate::manifest::OutFile;
use crate::run::{execute, Executed};

pub const PRESETS: [&str; 9] = ["fig1a", "fig1b", "fig2", "fig3a", "fig3b", "fig4", "fig5", "fig6", "fig7"];

#[derive(Debug, Clone)]
pub struct Preset {
    pub name: &'static str,
    pub scale: Scale,
    /// `(run name, parameter value, config)`
    pub runs: Vec<(String, f64, RunConfig)>,
}

struct Builder {
    scale: Scale,
    runs: Vec<(String, f64, RunConfig)>,
}

impl Builder {
    fn add(&mut self, name: String, param: f64, text: String) -> Result<()> {
        let seed = self.runs.len() + 1;
        let cfg = parse_config(&format!("{text} scale={} seed={seed}", self.scale.as_str()))?;
        self.runs.push((name, param, cfg));
        Ok(())
    }
}

fn engines(with_exks: bool) -> &'static [&'static str] {
    if with_exks {
        &["mc", "exks"]
    } else {
        &["mc"]
    }
}

pub fn preset(name: &str, scale: Scale) -> Result<Preset> {
    let mut b = Builder { scale, runs: Vec::new() };
    let volcano = "epsilon=0.1 nu=0.3 delta=1.25 chi=0.7";
    let name: &'static str = match PRESETS.iter().find(|&&p| p == name) {
        Some(&p) => p,
        None => return Err(Error::config(format!("unknown preset `{name}` (known: {})", PRESETS.join(", ")))),
    };
    match name {
        "fig1a" => {
            for a in [0.25, 1.0, 4.0] {
                for e in ["mc", "ks"] {
                    b.add(format!("{e}_alpha{a}"), a, format!("engine={e} scaling=small alpha={a} {volcano}"))?;
                }
            }
        }
        "fig1b" | "fig2" => {
            for beta in [0.2, 0.5, 1.0, 2.0] {
                for e in engines(true) {
                    b.add(format!("{e}_beta{beta}"), beta, format!("engine={e} scaling=large beta={beta} {volcano}"))?;
                }
            }
        }
        "fig3a" => {
            for tau in [0.02, 0.05, 0.1, 1.0, 5.0, 10.0, 20.0] {
                // the m-grid step limit makes β = τ ε below 0.1 impractical
                for e in engines(tau >= 1.0) {
                    b.add(format!("{e}_tau{tau}"), tau, format!("engine={e} tau={tau} {volcano}"))?;
                }
            }
        }
        "fig3b" => {
            for nu in [0.0, 0.05, 0.1, 0.2, 0.3, 0.5] {
                for e in engines(true) {
                    b.add(format!("{e}_nu{nu}"), nu, format!("engine={e} tau=10 epsilon=0.1 nu={nu} delta=1.25 chi=0.7"))?;
                }
            }
        }
        "fig4" => {
            b.add("mc_2d".into(), 10.0, "engine=mc dim=2 epsilon=0.1 tau=10 nu=0.3 delta=0.1 chi=0.9".into())?;
        }
        "fig5" => {
            for tau in [1.0, 5.0, 10.0] {
                for e in engines(true) {
                    b.add(format!("{e}_tau{tau}"), tau, format!("engine={e} tau={tau} epsilon=0.1 nu=0.3 delta=0.25 chi=0.7"))?;
                }
            }
        }
        "fig6" => {
            for beta in [0.5, 1.0, 2.0] {
                for e in engines(true) {
                    b.add(format!("{e}_beta{beta}"), beta, format!("engine={e} scaling=large beta={beta} epsilon=0.1 nu=0.3 delta=0.25 chi=0.7"))?;
                }
            }
        }
        "fig7" => {
            for beta in [0.2, 0.5, 1.0] {
                b.add(format!("exks_beta{beta}"), beta, format!("engine=exks scaling=large beta={beta} epsilon=0.1 nu=0.3 delta=0.25 chi=0.7"))?;
                for eps in [0.2, 0.1, 0.05] {
                    b.add(format!("mc_beta{beta}_eps{eps}"), beta, format!("engine=mc scaling=large beta={beta} epsilon={eps} nu=0.3 delta=0.25 chi=0.7"))?;
                }
            }
        }
        _ => unreachable!(),
    }
    Ok(Preset { name, scale, runs: b.runs })
}

fn source(e: EngineKind) -> &'static str {
    match e {
        EngineKind::Mc => "MC",
        EngineKind::Ks => "KS",
        EngineKind::Exks => "ExKS",
    }
}

fn l1(a: &GridProfile, b: &GridProfile) -> f64 {
    a.rho.iter().zip(&b.rho).map(|(x, y)| (x - y).abs()).sum::<f64>() * a.dx()
}

fn bimodality_table(p: &Preset, done: &[Executed]) -> Result<OutFile> {
    let mut pts = Vec::new();
    for ((_, param, cfg), ex) in p.runs.iter().zip(done) {
        let src = match cfg.engine {
            EngineKind::Exks => Source::Exks,
            _ => Source::Mc,
        };
        pts.push(BimodalityPoint::from_profile(*param, &ex.profile, src)?);
    }
    // by parameter, then engine
    pts.sort_by(|a, b| a.param.total_cmp(&b.param).then((a.source as u8).cmp(&(b.source as u8))));
    Ok(OutFile::new("bimodality.csv", csv::bimodality(&pts)))
}

fn overlay(p: &Preset, done: &[Executed]) -> OutFile {
    let series: Vec<(f64, &str, &GridProfile)> = p
        .runs
        .iter()
        .zip(done)
        .map(|((_, param, cfg), ex)| (*param, source(cfg.engine), &ex.profile))
        .collect();
    OutFile::new("overlay.csv", csv::overlay(&series))
}

/// Pairs each MC run with the continuum run sharing its parameter value.
fn pairs<'a>(p: &'a Preset, done: &'a [Executed]) -> Vec<(f64, &'a RunConfig, &'a Executed, &'a Executed)> {
    let cont: Vec<_> = p.runs.iter().zip(done).filter(|((_, _, c), _)| c.engine != EngineKind::Mc).collect();
    p.runs
        .iter()
        .zip(done)
        .filter(|((_, _, c), _)| c.engine == EngineKind::Mc)
        .filter_map(|((_, param, c), mc)| {
            cont.iter().find(|((_, q, _), _)| q == param).map(|(_, ex)| (*param, c, mc, *ex))
        })
        .collect()
}

/// Derived tables for a finished preset.
pub fn post_process(p: &Preset, done: &[Executed]) -> Result<Vec<OutFile>> {
    let mut out = Vec::new();
    match p.name {
        "fig1a" | "fig1b" => {
            out.push(overlay(p, done));
            let mut s = String::from("param,l1_mc_continuum,rho0_mc,rho0_continuum\n");
            for (param, _, mc, cont) in pairs(p, done) {
                let mid = |g: &GridProfile| 0.5 * (g.rho[g.n_cells / 2 - 1] + g.rho[g.n_cells / 2]);
                let _ = writeln!(s, "{},{},{},{}", num(param), num(l1(&mc.profile, &cont.profile)), num(mid(&mc.profile)), num(mid(&cont.profile)));
            }
            out.push(OutFile::new("comparison.csv", s));
        }
        "fig2" | "fig3a" | "fig3b" => out.push(bimodality_table(p, done)?),
        "fig4" => {
            let prof = &done[0].profile;
            let centre = 0.0;
            out.push(OutFile::new("slice_x1.csv", csv::slice(&slice_2d(prof, Axis::X1, centre)?)));
            let mut s = String::from("r,rho,rho_f,rho_g\n");
            let (r, rf, rg) = (
                radial_profile(prof, &prof.rho)?,
                radial_profile(prof, &prof.rho_f)?,
                radial_profile(prof, &prof.rho_g)?,
            );
            for i in 0..r.len() {
                let _ = writeln!(s, "{},{},{},{}", num(r[i].0), num(r[i].1), num(rf[i].1), num(rg[i].1));
            }
            out.push(OutFile::new("radial.csv", s));
        }
        "fig5" => {
            let mut s = String::from("tau,marker\n");
            for tau in [1.0, 5.0, 10.0] {
                let _ = writeln!(s, "{},{}", num(tau), num(diffusion_layer_marker(0.1, tau)));
            }
            out.push(OutFile::new("markers.csv", s));
        }
        "fig6" => {
            let mut scaled = Vec::new();
            let mut rows = Vec::new();
            let mut table = String::from("beta,source,x_rescaled,rho,rho_g,xi_bar\n");
            for ((_, beta, cfg), ex) in p.runs.iter().zip(done) {
                let g = &ex.profile;
                let x = g.axis_centers();
                let root = beta.sqrt();
                for i in 0..x.len() {
                    let _ = writeln!(table, "{},{},{},{},{},{}", num(*beta), source(cfg.engine), num(x[i] / root), num(g.rho[i]), num(g.rho_g[i]), csv::opt(g.xi_bar[i]));
                }
                if cfg.engine == EngineKind::Exks {
                    let half = x.len() / 2;
                    let peak = peak_position(&x[half..], &g.rho[half..]).map(|v| v / root);
                    rows.push((format!("peak_x_rescaled_beta{beta}"), peak));
                    rows.push((format!("cell_width_rescaled_beta{beta}"), Some(g.dx() / root)));
                    scaled.push(ScaledProfile { beta: *beta, x, rho: g.rho.clone() });
                }
            }
            rows.insert(0, ("collapse_error_peak_norm".into(), Some(rescale_collapse(&scaled, Normalization::Peak)?)));
            out.push(OutFile::new("rescaled.csv", table));
            out.push(OutFile::new("collapse.csv", csv::report(&rows)));
        }
        "fig7" => {
            let mut s = String::from("beta,epsilon,l1_mc_exks\n");
            for ((_, beta, cfg), ex) in p.runs.iter().zip(done) {
                if cfg.engine != EngineKind::Mc {
                    continue;
                }
                let cont = p.runs.iter().zip(done).find(|((_, b, c), _)| b == beta && c.engine == EngineKind::Exks);
                if let Some((_, c)) = cont {
                    let _ = writeln!(s, "{},{},{}", num(*beta), num(cfg.params.epsilon()), num(l1(&ex.profile, &c.profile)));
                }
            }
            out.push(OutFile::new("convergence.csv", s));
        }
        _ => {}
    }
    Ok(out)
}

/// Executes every run of the preset on the current rayon pool.
pub fn run_preset(p: &Preset) -> Result<(Vec<Executed>, Vec<OutFile>)> {
    let done = p
        .runs
        .par_iter()
        .map(|(name, _, cfg)| execute(cfg, name))
        .collect::<Result<Vec<_>>>()?;
    let mut files: Vec<OutFile> = done.iter().flat_map(|e| e.files.iter().cloned()).collect();
    files.extend(post_process(p, &done)?);
    Ok((done, files))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_resolve() {
        for name in PRESETS {
            for scale in [Scale::Smoke, Scale::Desk, Scale::Full] {
                let p = preset(name, scale).unwrap();
                assert!(!p.runs.is_empty(), "{name}");
                let mut names: Vec<_> = p.runs.iter().map(|r| r.0.clone()).collect();
                names.sort();
                names.dedup();
                assert_eq!(names.len(), p.runs.len(), "{name}: run names collide");
            }
        }
        assert!(preset("fig9", Scale::Desk).is_err());
    }

    #[test]
    fn figure_parameters() {
        let p = preset("fig1b", Scale::Desk).unwrap();
        let (_, beta, c) = &p.runs[2];
        assert_eq!(*beta, 0.5);
        assert!((c.params.tau() - 5.0).abs() < 1e-12);
        let p = preset("fig4", Scale::Full).unwrap();
        match &p.runs[0].2.job {
            crate::config::Job::Mc(m) => assert_eq!(m.n_particles, 18_000_000),
            _ => panic!(),
        }
        let p = preset("fig7", Scale::Desk).unwrap();
        assert_eq!(p.runs.len(), 12);
    }
}
