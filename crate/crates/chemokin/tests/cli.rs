use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chemokin::manifest::{RunManifest, MANIFEST_FILE};

fn chemokin(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chemokin"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env("CHEMOKIN_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn run_dir(o: &Output) -> PathBuf {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    PathBuf::from(String::from_utf8(o.stdout.clone()).unwrap().trim())
}

const MC: &str = "# smoke run\nengine=mc dim=1 epsilon=0.1 scaling=large beta=1\nnu=0.3 delta=1.25 chi=0.7 L=10 seed=42 scale=smoke\n";

#[test]
fn mc_run_writes_profile_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("a.conf");
    std::fs::write(&cfg, MC).unwrap();
    let dir = run_dir(&chemokin(tmp.path(), &["mc-run", cfg.to_str().unwrap()]));
    let body = std::fs::read_to_string(dir.join("mc.csv")).unwrap();
    assert!(body.starts_with("x,rho,rho_f,rho_g,xi_plus,xi_minus,xi_bar\n"));
    assert_eq!(body.lines().count(), 101);

    let m = RunManifest::load(&dir.join(MANIFEST_FILE)).unwrap();
    let r = &m.runs[0];
    assert_eq!(r.resolved["tau"].as_f64().unwrap(), 10.0);
    assert!((r.resolved["mu_hat"].as_f64().unwrap() - 10.0 / 3.0).abs() < 1e-12);
    assert_eq!(r.resolved["seed"].as_u64().unwrap(), 42);
    assert!(m.verify(&dir).is_empty());

    // the manifest alone repeats the run byte for byte
    let again = run_dir(&chemokin(tmp.path(), &["mc-run", dir.join(MANIFEST_FILE).to_str().unwrap()]));
    assert_ne!(again, dir);
    assert_eq!(std::fs::read(again.join("mc.csv")).unwrap(), body.as_bytes());
    let verify = chemokin(tmp.path(), &["diag", "verify", dir.to_str().unwrap()]);
    assert!(verify.status.success());
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.conf");
    std::fs::write(&bad, "engine=mc nu=0.3 delta=1 chi=0.5 tau=1\n").unwrap();
    let o = chemokin(tmp.path(), &["mc-run", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("epsilon"));

    let cfl = tmp.path().join("cfl.conf");
    std::fs::write(&cfl, "engine=ks epsilon=0.1 scaling=small alpha=1 nu=0.3 delta=1.25 chi=0.7 dt=1\n").unwrap();
    assert_eq!(chemokin(tmp.path(), &["ks-run", cfl.to_str().unwrap()]).status.code(), Some(3));

    // wrong subcommand for the engine
    let ks = tmp.path().join("ks.conf");
    std::fs::write(&ks, "engine=ks epsilon=0.1 scaling=small alpha=1 nu=0.3 delta=1.25 chi=0.7\n").unwrap();
    assert_eq!(chemokin(tmp.path(), &["mc-run", ks.to_str().unwrap()]).status.code(), Some(2));
    // nothing is left behind by failed runs
    let leftovers: Vec<_> = std::fs::read_dir(tmp.path()).unwrap().filter(|e| e.as_ref().unwrap().path().is_dir()).collect();
    assert!(leftovers.is_empty());
}

#[test]
fn ks_and_exks_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let ks = tmp.path().join("ks.conf");
    std::fs::write(&ks, "engine=ks epsilon=0.1 scaling=small alpha=1 nu=0.3 delta=1.25 chi=0.7 t_end=150\n").unwrap();
    let dir = run_dir(&chemokin(tmp.path(), &["ks-run", ks.to_str().unwrap()]));
    let p = chemokin::csv::read_profile(&dir.join("ks.csv")).unwrap();
    assert!((p.mass() - 10.0).abs() < 1e-10);
    let ratio = p.rho[50] / p.rho[60];
    assert!((ratio - (0.28f64).exp()).abs() < 1e-3, "{ratio}");

    let ex = tmp.path().join("exks.conf");
    std::fs::write(&ex, "engine=exks epsilon=0.1 scaling=large beta=1 nu=0.3 delta=1.25 chi=0.7 scale=smoke\n").unwrap();
    let dir = run_dir(&chemokin(tmp.path(), &["exks-run", ex.to_str().unwrap()]));
    let h = std::fs::read_to_string(dir.join("exks_h.csv")).unwrap();
    assert!(h.starts_with("x,m,h\n"));
    assert_eq!(h.lines().count(), 1 + 100 * 100);
}

#[test]
fn sweep_reports_partial_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let cfgs = tmp.path().join("cfgs");
    std::fs::create_dir(&cfgs).unwrap();
    std::fs::write(cfgs.join("ok.conf"), MC).unwrap();
    std::fs::write(cfgs.join("broken.conf"), "engine=mc epsilon=0.1\n").unwrap();
    let out = tmp.path().join("runs");
    let o = chemokin(&out, &["sweep", cfgs.to_str().unwrap(), "--jobs", "2"]);
    assert_eq!(o.status.code(), Some(4));
    let dir = PathBuf::from(String::from_utf8(o.stdout).unwrap().trim());
    let idx = std::fs::read_to_string(dir.join("index.csv")).unwrap();
    assert!(idx.contains("ok.conf,ok,0,"));
    assert!(idx.contains("broken.conf,failed,2,"));
    assert!(dir.join("ok.csv").exists());

    let empty = tmp.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    assert!(chemokin(&out, &["sweep", empty.to_str().unwrap()]).status.success());
}

#[test]
fn preset_smoke_and_diagnostics() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = run_dir(&chemokin(tmp.path(), &["preset", "fig6", "--scale", "smoke"]));
    for f in ["mc_beta0.5.csv", "exks_beta2_h.csv", "rescaled.csv", "collapse.csv", MANIFEST_FILE] {
        assert!(dir.join(f).exists(), "{f}");
    }
    let m = RunManifest::load(&dir.join(MANIFEST_FILE)).unwrap();
    assert_eq!(m.runs.len(), 6);
    assert_eq!(m.command, "preset fig6 --scale smoke");

    let arg = |b: &str, f: &str| format!("{b}={}", dir.join(f).display());
    let o = chemokin(tmp.path(), &["diag", "bimodality", "--source", "exks", &arg("0.5", "exks_beta0.5.csv"), &arg("1", "exks_beta1.csv")]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("param,rho_dd,rho_g_dd,source\n"), "{text}");
    assert!(text.contains(",ExKS\n"));
    let o = chemokin(tmp.path(), &["diag", "collapse", &arg("1", "exks_beta1.csv")]);
    assert!(String::from_utf8(o.stdout).unwrap().contains("collapse_error,0.0000000000000000e0"));
    let o = chemokin(tmp.path(), &["diag", "marker", "--epsilon", "0.1", "--tau", "10"]);
    assert_eq!(String::from_utf8(o.stdout).unwrap().trim().parse::<f64>().unwrap(), 1.0);

    let two = run_dir(&chemokin(tmp.path(), &["preset", "fig4", "--scale", "smoke"]));
    let o = chemokin(tmp.path(), &["diag", "slice", two.join("mc_2d.csv").to_str().unwrap(), "--value", "0"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 51, "{text}");
    assert_eq!(chemokin(tmp.path(), &["preset", "fig99"]).status.code(), Some(2));
}
