//! Flat `key=value` run configuration.
//!
//! Pairs are separated by whitespace or newlines and `#` starts a comment.
//! Every key a run depends on is materialised when the text is parsed, so
//! [`RunConfig::to_text`] gives a complete description that parses back to
//! the same run.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use chemokin_core::fv::{ExksInit, GridSpec, KsAlpha};
use chemokin_core::mc::McConfig;
use chemokin_core::{Dim, ModelParams, ScalingMode};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineKind {
    Mc,
    Ks,
    Exks,
}

impl EngineKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EngineKind::Mc => "mc",
            EngineKind::Ks => "ks",
            EngineKind::Exks => "exks",
        }
    }
}

/// Size profile used to fill in defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scale {
    /// Seconds-long runs for wiring checks. Not physically converged.
    Smoke,
    #[default]
    Desk,
    Full,
}

impl Scale {
    pub fn as_str(self) -> &'static str {
        match self {
            Scale::Smoke => "smoke",
            Scale::Desk => "desk",
            Scale::Full => "full",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "smoke" => Some(Scale::Smoke),
            "desk" => Some(Scale::Desk),
            "full" => Some(Scale::Full),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Job {
    Mc(McConfig),
    Ks { alpha: KsAlpha, grid: GridSpec },
    Exks { beta: f64, grid: GridSpec, init: ExksInit },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub engine: EngineKind,
    pub scale: Scale,
    /// `None` only for a KS run with `alpha=inf`.
    pub scaling: Option<ScalingMode>,
    pub params: ModelParams,
    pub allow_chi_zero: bool,
    pub seed: u64,
    pub job: Job,
}

const COMMON: &[&str] = &[
    "engine", "scale", "dim", "epsilon", "scaling", "tau", "alpha", "beta", "nu", "delta", "chi",
    "L", "allow_chi_zero", "seed",
];
const MC_KEYS: &[&str] = &["particles", "cells", "dt", "t_end", "avg_window", "snapshot_stride"];
const KS_KEYS: &[&str] = &["cells", "dt", "t_end"];
const EXKS_KEYS: &[&str] = &["cells", "m_cells", "m_half_width", "dt", "t_end", "init"];

/// Splits the document into an ordered key map. Duplicates and malformed
/// tokens are errors.
pub fn tokenize(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split_whitespace() {
            let (k, v) = tok.split_once('=').ok_or_else(|| {
                Error::config(format!("line {}: expected key=value, got `{tok}`", lineno + 1))
            })?;
            if k.is_empty() || v.is_empty() {
                return Err(Error::config(format!("line {}: empty key or value in `{tok}`", lineno + 1)));
            }
            if out.insert(k.to_string(), v.to_string()).is_some() {
                return Err(Error::config(format!("duplicate key `{k}`")));
            }
        }
    }
    Ok(out)
}

struct Keys {
    map: BTreeMap<String, String>,
}

impl Keys {
    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn required(&mut self, key: &str) -> Result<String> {
        self.take(key).ok_or_else(|| Error::config(format!("missing required key `{key}`")))
    }

    fn float(&mut self, key: &str) -> Result<Option<f64>> {
        self.take(key).map(|v| parse_f64(key, &v)).transpose()
    }

    fn required_float(&mut self, key: &str) -> Result<f64> {
        let v = self.required(key)?;
        parse_f64(key, &v)
    }

    fn uint(&mut self, key: &str) -> Result<Option<u64>> {
        self.take(key)
            .map(|v| v.parse::<u64>().map_err(|_| Error::config(format!("`{key}`: expected a non-negative integer, got `{v}`"))))
            .transpose()
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(Error::config(format!("`{key}`: expected a finite number, got `{v}`"))),
    }
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::config(format!("`{key}`: expected true or false, got `{v}`"))),
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let map = tokenize(text)?;
    let engine = match map.get("engine").map(String::as_str) {
        Some("mc") => EngineKind::Mc,
        Some("ks") => EngineKind::Ks,
        Some("exks") => EngineKind::Exks,
        Some(other) => return Err(Error::config(format!("`engine`: unknown engine `{other}`"))),
        None => return Err(Error::config("missing required key `engine`")),
    };
    let extra = match engine {
        EngineKind::Mc => MC_KEYS,
        EngineKind::Ks => KS_KEYS,
        EngineKind::Exks => EXKS_KEYS,
    };
    if let Some(k) = map.keys().find(|k| !COMMON.contains(&k.as_str()) && !extra.contains(&k.as_str())) {
        let known = MC_KEYS.iter().chain(KS_KEYS).chain(EXKS_KEYS).any(|x| x == k);
        return Err(Error::config(if known {
            format!("key `{k}` does not apply to engine {}", engine.as_str())
        } else {
            format!("unknown key `{k}`")
        }));
    }
    let mut keys = Keys { map };
    keys.take("engine");

    let scale = match keys.take("scale") {
        Some(s) => Scale::parse(&s).ok_or_else(|| Error::config(format!("`scale`: unknown scale `{s}`")))?,
        None => Scale::default(),
    };
    let dim = match keys.uint("dim")?.unwrap_or(1) {
        1 => Dim::One,
        2 if engine == EngineKind::Mc => Dim::Two,
        2 => return Err(Error::config("`dim`: the continuum solvers are one-dimensional")),
        d => return Err(Error::config(format!("`dim`: must be 1 or 2, got {d}"))),
    };
    let epsilon = keys.required_float("epsilon")?;
    let nu = keys.required_float("nu")?;
    let delta = keys.required_float("delta")?;
    let chi = keys.required_float("chi")?;
    let length = keys.float("L")?.unwrap_or(10.0);
    let allow_chi_zero = keys.take("allow_chi_zero").map(|v| parse_bool("allow_chi_zero", &v)).transpose()?.unwrap_or(false);
    let seed = keys.uint("seed")?.unwrap_or(1);
    if chi == 0.0 && !allow_chi_zero {
        return Err(Error::config("`chi`: must lie in (0, 1); chi=0 needs allow_chi_zero=true"));
    }

    let scaling_name = keys.take("scaling").unwrap_or_else(|| "direct".into());
    let (tau_s, alpha_s, beta_s) = (keys.take("tau"), keys.take("alpha"), keys.take("beta"));
    let (own, others): (&str, [(&str, &Option<String>); 2]) = match scaling_name.as_str() {
        "direct" => ("tau", [("alpha", &alpha_s), ("beta", &beta_s)]),
        "small" => ("alpha", [("tau", &tau_s), ("beta", &beta_s)]),
        "large" => ("beta", [("tau", &tau_s), ("alpha", &alpha_s)]),
        other => return Err(Error::config(format!("`scaling`: unknown mode `{other}` (direct, small or large)"))),
    };
    if let Some((k, _)) = others.iter().find(|(_, v)| v.is_some()) {
        return Err(Error::config(format!("key `{k}` conflicts with scaling={scaling_name} (which takes `{own}`)")));
    }
    let raw = match scaling_name.as_str() {
        "direct" => tau_s,
        "small" => alpha_s,
        _ => beta_s,
    }
    .ok_or_else(|| Error::config(format!("missing required key `{own}` for scaling={scaling_name}")))?;

    let scaling = if raw == "inf" {
        if engine != EngineKind::Ks || own != "alpha" {
            return Err(Error::config("`alpha=inf` is only accepted by the ks engine"));
        }
        None
    } else {
        let v = parse_f64(own, &raw)?;
        Some(match own {
            "tau" => ScalingMode::Direct(v),
            "alpha" => ScalingMode::SmallAdaptation(v),
            _ => ScalingMode::LargeAdaptation(v),
        })
    };
    // KS with α = ∞ never reads τ; any valid value will do.
    let tau = match scaling {
        Some(mode) => mode.resolve(epsilon)?,
        None => epsilon,
    };
    let params = ModelParams::new(epsilon, tau, nu, delta, chi)?.with_domain_length(length)?.with_dim(dim);

    let job = match engine {
        EngineKind::Mc => Job::Mc(mc_job(&mut keys, params, scale, seed)?),
        EngineKind::Ks => {
            let alpha = match scaling {
                None => KsAlpha::Infinite,
                Some(ScalingMode::SmallAdaptation(a)) => KsAlpha::Finite(a),
                Some(_) => KsAlpha::Finite(tau / epsilon),
            };
            let t_end = keys.float("t_end")?.unwrap_or(match scale {
                Scale::Smoke => 0.2 * length * length,
                _ => 2.0 * length * length,
            });
            let mut grid = GridSpec::ks(keys.uint("cells")?.unwrap_or(100) as usize, t_end);
            grid.dt = keys.float("dt")?;
            Job::Ks { alpha, grid }
        }
        EngineKind::Exks => {
            let beta = match scaling {
                Some(ScalingMode::LargeAdaptation(b)) => b,
                _ => tau * epsilon,
            };
            let mut grid = match scale {
                Scale::Full => GridSpec::exks_reference(),
                Scale::Desk => GridSpec::exks(100, 800, 5.0, 25.0),
                Scale::Smoke => GridSpec::exks(100, 100, 5.0, 2.0),
            };
            if let Some(n) = keys.uint("cells")? {
                grid.n_x = n as usize;
            }
            if let Some(k) = keys.uint("m_cells")? {
                grid.n_m = k as usize;
            }
            if let Some(y) = keys.float("m_half_width")? {
                grid.m_half_width = y;
            }
            if let Some(t) = keys.float("t_end")? {
                grid.t_end = t;
            }
            if let Some(dt) = keys.float("dt")? {
                grid.dt = Some(dt);
            }
            let init = match keys.take("init").as_deref() {
                None | Some("triangle") => ExksInit::Triangle,
                Some("flat") => ExksInit::Flat,
                Some(other) => return Err(Error::config(format!("`init`: unknown initial state `{other}`"))),
            };
            Job::Exks { beta, grid, init }
        }
    };
    debug_assert!(keys.map.is_empty(), "unconsumed keys: {:?}", keys.map);
    Ok(RunConfig { engine, scale, scaling, params, allow_chi_zero, seed, job })
}

/// Seconds-long MC settings: a few thousand particles over a short horizon.
pub fn smoke_mc(params: ModelParams, seed: u64) -> McConfig {
    let mut c = McConfig::desk(params, seed);
    let (n, horizon) = match params.dim() {
        Dim::One => (4_000, 0.02),
        Dim::Two => (10_000, 0.01),
    };
    let l2e = params.domain_length() * params.domain_length() / params.epsilon();
    c.n_particles = n;
    c.t_end = snap(horizon * l2e, c.dt);
    c.avg_window = snap(0.5 * c.t_end, c.dt);
    c.with_rounded_particles()
}

fn snap(t: f64, dt: f64) -> f64 {
    (t / dt).round().max(1.0) * dt
}

fn mc_job(keys: &mut Keys, params: ModelParams, scale: Scale, seed: u64) -> Result<McConfig> {
    let mut c = match scale {
        Scale::Smoke => smoke_mc(params, seed),
        Scale::Desk => McConfig::desk(params, seed),
        Scale::Full => McConfig::full(params, seed),
    };
    if let Some(n) = keys.uint("cells")? {
        c.n_cells = n as usize;
    }
    if let Some(n) = keys.uint("particles")? {
        c.n_particles = n as usize;
    }
    if let Some(dt) = keys.float("dt")? {
        c.dt = dt;
    }
    if let Some(t) = keys.float("t_end")? {
        c.t_end = t;
    }
    if let Some(w) = keys.float("avg_window")? {
        c.avg_window = w;
    }
    if let Some(s) = keys.uint("snapshot_stride")? {
        c.snapshot_stride = s;
    }
    let c = c.with_rounded_particles();
    c.validate()?;
    Ok(c)
}

impl RunConfig {
    /// Canonical document with every input materialised. Numbers use the
    /// shortest representation that parses back to the same `f64`.
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k}={v}");
        };
        kv("engine", self.engine.as_str().into());
        kv("scale", self.scale.as_str().into());
        kv("dim", p.dim().get().to_string());
        kv("epsilon", p.epsilon().to_string());
        match self.scaling {
            Some(ScalingMode::Direct(t)) => {
                kv("scaling", "direct".into());
                kv("tau", t.to_string());
            }
            Some(ScalingMode::SmallAdaptation(a)) => {
                kv("scaling", "small".into());
                kv("alpha", a.to_string());
            }
            Some(ScalingMode::LargeAdaptation(b)) => {
                kv("scaling", "large".into());
                kv("beta", b.to_string());
            }
            None => {
                kv("scaling", "small".into());
                kv("alpha", "inf".into());
            }
        }
        kv("nu", p.nu().to_string());
        kv("delta", p.delta().to_string());
        kv("chi", p.chi().to_string());
        kv("L", p.domain_length().to_string());
        kv("allow_chi_zero", self.allow_chi_zero.to_string());
        kv("seed", self.seed.to_string());
        match &self.job {
            Job::Mc(c) => {
                kv("particles", c.n_particles.to_string());
                kv("cells", c.n_cells.to_string());
                kv("dt", c.dt.to_string());
                kv("t_end", c.t_end.to_string());
                kv("avg_window", c.avg_window.to_string());
                kv("snapshot_stride", c.snapshot_stride.to_string());
            }
            Job::Ks { grid, .. } => {
                kv("cells", grid.n_x.to_string());
                if let Some(dt) = grid.dt {
                    kv("dt", dt.to_string());
                }
                kv("t_end", grid.t_end.to_string());
            }
            Job::Exks { grid, init, .. } => {
                kv("cells", grid.n_x.to_string());
                kv("m_cells", grid.n_m.to_string());
                kv("m_half_width", grid.m_half_width.to_string());
                if let Some(dt) = grid.dt {
                    kv("dt", dt.to_string());
                }
                kv("t_end", grid.t_end.to_string());
                kv(
                    "init",
                    match init {
                        ExksInit::Triangle => "triangle",
                        ExksInit::Flat => "flat",
                    }
                    .into(),
                );
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG1B: &str = "engine=mc dim=1 epsilon=0.1 scaling=large beta=1 nu=0.3 delta=1.25 chi=0.7 L=10 seed=42";

    #[test]
    fn resolves_large_scaling() {
        let c = parse_config(FIG1B).unwrap();
        assert!((c.params.tau() - 10.0).abs() < 1e-12);
        assert_eq!(c.seed, 42);
        match &c.job {
            Job::Mc(m) => {
                assert_eq!(m.n_particles, 100_000);
                assert_eq!(m.dt, 1e-3);
            }
            _ => panic!("wrong job"),
        }
    }

    #[test]
    fn missing_key_is_named() {
        let err = parse_config("engine=mc nu=0.3 delta=1.25 chi=0.7 tau=1").unwrap_err();
        assert!(err.to_string().contains("`epsilon`"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unknown_and_misplaced_keys() {
        let e = parse_config(&format!("{FIG1B} colour=blue")).unwrap_err();
        assert!(e.to_string().contains("unknown key `colour`"));
        let e = parse_config(&format!("{FIG1B} m_cells=200")).unwrap_err();
        assert!(e.to_string().contains("does not apply"));
        let e = parse_config(&format!("{FIG1B} seed=3")).unwrap_err();
        assert!(e.to_string().contains("duplicate"));
    }

    #[test]
    fn scaling_conflicts() {
        let e = parse_config("engine=mc epsilon=0.1 scaling=large beta=1 tau=3 nu=0 delta=1 chi=0.5").unwrap_err();
        assert!(e.to_string().contains("conflicts"), "{e}");
        let e = parse_config("engine=mc epsilon=0.1 scaling=small beta=1 nu=0 delta=1 chi=0.5").unwrap_err();
        assert!(e.to_string().contains("conflicts"), "{e}");
    }

    #[test]
    fn chi_zero_needs_flag() {
        let base = "engine=mc epsilon=0.1 tau=1 nu=0.3 delta=1 chi=0";
        assert!(parse_config(base).is_err());
        let c = parse_config(&format!("{base} allow_chi_zero=true")).unwrap();
        assert_eq!(c.params.chi(), 0.0);
        assert!(parse_config("engine=mc epsilon=0.1 tau=1 nu=0.3 delta=1 chi=1").is_err());
    }

    #[test]
    fn comments_and_lines() {
        let text = "# volcano run\nengine=exks   # solver\nepsilon=0.1\nscaling=large\nbeta=0.5\n\nnu=0.3 delta=0.25 chi=0.7\nm_cells=200\n";
        let c = parse_config(text).unwrap();
        match c.job {
            Job::Exks { beta, grid, .. } => {
                assert_eq!(beta, 0.5);
                assert_eq!(grid.n_m, 200);
                assert_eq!(grid.n_x, 100);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn canonical_text_round_trips() {
        for text in [
            FIG1B,
            "engine=mc dim=2 epsilon=0.1 tau=10 nu=0.3 delta=0.1 chi=0.9 scale=smoke",
            "engine=ks epsilon=0.1 scaling=small alpha=inf nu=0 delta=1.25 chi=0.7",
            "engine=ks epsilon=0.1 scaling=small alpha=0.25 nu=0.3 delta=1.25 chi=0.7 dt=0.001",
            "engine=exks epsilon=0.1 scaling=large beta=2 nu=0.3 delta=0.25 chi=0.7 init=flat scale=full",
        ] {
            let c = parse_config(text).unwrap();
            let again = parse_config(&c.to_text()).unwrap();
            assert_eq!(c, again, "{text}");
            assert_eq!(c.to_text(), again.to_text());
        }
    }

    #[test]
    fn ks_alpha_from_other_scalings() {
        let c = parse_config("engine=ks epsilon=0.1 tau=0.4 nu=0.3 delta=1.25 chi=0.7").unwrap();
        match c.job {
            Job::Ks { alpha: KsAlpha::Finite(a), .. } => assert!((a - 4.0).abs() < 1e-12),
            _ => panic!(),
        }
        assert!(parse_config("engine=mc epsilon=0.1 scaling=small alpha=inf nu=0.3 delta=1 chi=0.5").is_err());
        assert!(parse_config("engine=exks dim=2 epsilon=0.1 tau=1 nu=0.3 delta=1 chi=0.5").is_err());
    }

    #[test]
    fn bad_numbers() {
        let e = parse_config("engine=mc epsilon=abc tau=1 nu=0.3 delta=1 chi=0.5").unwrap_err();
        assert!(e.to_string().contains("`epsilon`"));
        let e = parse_config("engine=mc epsilon=0.1 tau=1 nu=0.3 delta=1 chi=0.5 dt=0.5").unwrap_err();
        assert_eq!(e.exit_code(), 3, "{e}");
        assert!(parse_config("engine=mc epsilon").is_err());
    }
}
