use std::collections::BTreeMap;
use std::time::Instant;

use chemokin_core::diagnostics::GridProfile;
use chemokin_core::fv::{ExksSolver, ExksState, KsAlpha, KsSolver, KsState};
use chemokin_core::mc::{McEngine, McOutput};
use serde_json::{json, Value};

use crate::config::{Job, RunConfig};
use crate::csv;
use crate::error::Result;
use crate::manifest::{OutFile, RunRecord};
use crate::parallel::run_mc;

/// Result of one engine run.
#[derive(Debug, Clone)]
pub struct Executed {
    pub record: RunRecord,
    pub profile: GridProfile,
    pub files: Vec<OutFile>,
    pub detail: Detail,
}

#[derive(Debug, Clone)]
pub enum Detail {
    Mc(Box<McOutput>),
    Ks(KsState),
    Exks(ExksState),
}

fn f(x: f64) -> Value {
    json!(x)
}

fn mu_hat(cfg: &RunConfig) -> Value {
    // ν = 0 is an instantaneous restart; μ̂ is infinite
    cfg.params.mu_hat().map_or_else(|| json!("inf"), f)
}

fn common(cfg: &RunConfig) -> BTreeMap<String, Value> {
    let p = &cfg.params;
    let mut m = BTreeMap::new();
    m.insert("engine".into(), json!(cfg.engine.as_str()));
    m.insert("dim".into(), json!(p.dim().get()));
    m.insert("epsilon".into(), f(p.epsilon()));
    m.insert("nu".into(), f(p.nu()));
    m.insert("mu_hat".into(), mu_hat(cfg));
    m.insert("delta".into(), f(p.delta()));
    m.insert("chi".into(), f(p.chi()));
    m.insert("L".into(), f(p.domain_length()));
    m.insert("c_d".into(), f(p.c_d()));
    m.insert("sigma_nu".into(), f(p.sigma_nu()));
    m.insert("seed".into(), json!(cfg.seed));
    m
}

/// Runs `cfg`. Output files are named after `name`.
pub fn execute(cfg: &RunConfig, name: &str) -> Result<Executed> {
    let start = Instant::now();
    let mut resolved = common(cfg);
    let mut stats = BTreeMap::new();
    let mut files = Vec::new();
    let (profile, detail) = match &cfg.job {
        Job::Mc(c) => {
            let engine = McEngine::new(c.clone())?;
            let s = engine.schedule();
            resolved.insert("tau".into(), f(cfg.params.tau()));
            resolved.insert("dt".into(), f(c.dt));
            resolved.insert("n_particles".into(), json!(c.n_particles));
            resolved.insert("cells".into(), json!(c.n_cells));
            resolved.insert("particles_per_cell".into(), json!(c.per_cell()));
            resolved.insert("t_end".into(), f(c.t_end));
            resolved.insert("avg_window".into(), f(c.avg_window));
            resolved.insert("snapshot_stride".into(), json!(s.stride));
            resolved.insert("n_steps".into(), json!(s.n_steps));
            resolved.insert("snapshots".into(), json!(s.snapshots));
            resolved.insert("stop_probability_max".into(), f(c.max_stop_probability()));
            resolved.insert("restart_probability".into(), c.restart_probability().map_or(json!("always"), f));
            let out = run_mc(&engine)?;
            stats.insert("particle_steps".into(), json!(out.stats.particle_steps() as u64));
            stats.insert("observations".into(), json!(out.stats.observations));
            stats.insert("tumbling_fraction".into(), f(out.stats.tumbling_fraction()));
            stats.insert("mass".into(), f(out.profile.mass()));
            (out.profile.clone(), Detail::Mc(Box::new(out)))
        }
        Job::Ks { alpha, grid } => {
            let solver = KsSolver::new(&cfg.params, *alpha, grid)?;
            resolved.insert(
                "alpha".into(),
                match alpha {
                    KsAlpha::Finite(a) => f(*a),
                    KsAlpha::Infinite => json!("inf"),
                },
            );
            if matches!(alpha, KsAlpha::Finite(_)) {
                resolved.insert("tau".into(), f(cfg.params.tau()));
            }
            resolved.insert("drift".into(), f(alpha.drift(&cfg.params)?));
            resolved.insert("cells".into(), json!(grid.n_x));
            resolved.insert("dt".into(), f(solver.dt()));
            resolved.insert("n_steps".into(), json!(solver.steps()));
            resolved.insert("t_end".into(), f(grid.t_end));
            let st = solver.run(KsState::uniform(cfg.params.domain_length(), grid.n_x))?;
            stats.insert("residual".into(), f(st.residual));
            stats.insert("mass".into(), f(st.mass()));
            // running and tumbling cells are in local balance at this order
            let run_share = 1.0 / cfg.params.sigma_nu();
            let rho_f: Vec<f64> = st.rho.iter().map(|r| r * run_share).collect();
            let rho_g: Vec<f64> = st.rho.iter().zip(&rho_f).map(|(r, rf)| r - rf).collect();
            let n = st.rho.len();
            let p = GridProfile::from_continuum(st.length, rho_f, rho_g, vec![None; n])?;
            (p, Detail::Ks(st))
        }
        Job::Exks { beta, grid, init } => {
            let solver = ExksSolver::new(&cfg.params, *beta, grid)?;
            resolved.insert("beta".into(), f(*beta));
            resolved.insert("tau".into(), f(cfg.params.tau()));
            resolved.insert("cells".into(), json!(grid.n_x));
            resolved.insert("m_cells".into(), json!(grid.n_m));
            resolved.insert("m_half_width".into(), f(grid.m_half_width));
            resolved.insert("dm".into(), f(grid.dm()));
            resolved.insert("dt".into(), f(solver.dt()));
            resolved.insert("dt_limit".into(), f(solver.stable_dt()));
            resolved.insert("n_steps".into(), json!(solver.steps()));
            resolved.insert("t_end".into(), f(grid.t_end));
            let st = solver.run(ExksState::new(cfg.params.domain_length(), grid, *init)?)?;
            stats.insert("residual".into(), f(st.residual));
            stats.insert("mass".into(), f(st.mass()));
            stats.insert("edge_mass_fraction".into(), f(st.edge_mass_fraction()));
            files.push(OutFile::new(format!("{name}_h.csv"), csv::h_field(&st)));
            (st.profile(&cfg.params)?, Detail::Exks(st))
        }
    };
    stats.insert("wall_clock_s".into(), f(start.elapsed().as_secs_f64()));
    files.insert(0, OutFile::new(format!("{name}.csv"), csv::profile(&profile)));
    Ok(Executed {
        record: RunRecord { name: name.to_string(), config: cfg.to_text(), resolved, stats },
        profile,
        files,
        detail,
    })
}
