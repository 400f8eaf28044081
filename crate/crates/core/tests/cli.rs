use std::fs;
use std::path::Path;
use std::process::Command;

use robust_bcs::cli::config::Config;
use robust_bcs::cli::report::{summarize, summary_csv};
use robust_bcs::cli::surrogate::{self, Case, SurrogateRun, SurrogateSpec};
use robust_bcs::cli::sweep::{run_sweep, SweepSpec};
use robust_bcs::cli::{csv, matrix_io};
use robust_bcs::metrics::{acceptance_rate, DEFAULT_THRESHOLDS};
use robust_bcs::solvers::Variant;

const SWEEP_CONFIG: &str = "\
# small grid
n = 64
spikes = 4
spike_kind = gaussian
k = 20:10:30
noise = 0, 0.05
algorithms = so_star, bottom_up_fixed, top_down
trials = 3
seed = 11
";

fn rbcs(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_rbcs")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn sweep_output_is_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sweep.cfg", SWEEP_CONFIG);
    let mut outputs = Vec::new();
    for threads in ["1", "3", "1"] {
        let out = dir.path().join(format!("run{}.csv", outputs.len()));
        let o = rbcs(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap(), "--threads", threads]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(fs::read(&out).unwrap());
        assert!(dir.path().join(format!("run{}_summary.csv", outputs.len() - 1)).exists());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
    let text = String::from_utf8(outputs[0].clone()).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 2 * 3 * 3);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sweep.cfg", SWEEP_CONFIG);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(rbcs(&["sweep", "--config", &cfg, "--out", a.to_str().unwrap()]).status.success());
    assert!(rbcs(&["sweep", "--config", &cfg, "--out", b.to_str().unwrap(), "--seed", "12"]).status.success());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn single_cell_gives_one_row_and_one_summary_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "one.cfg", "n = 32\nspikes = 2\nk = 16\nnoise = 0\nalgorithms = so\ntrials = 1\n");
    let out = dir.path().join("one.csv");
    assert!(rbcs(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()]).status.success());
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 2);
    let rep = rbcs(&["report", out.to_str().unwrap()]);
    assert!(rep.status.success());
    assert_eq!(String::from_utf8(rep.stdout).unwrap().lines().count(), 2);
}

#[test]
fn summaries_survive_a_csv_round_trip() {
    let spec = SweepSpec::from_config(&Config::parse(SWEEP_CONFIG, Path::new("inline")).unwrap()).unwrap();
    let records = run_sweep(&spec, Some(2)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    csv::write(&path, &records).unwrap();
    let back = csv::read(&path).unwrap();
    assert_eq!(
        summary_csv(&summarize(&records, &DEFAULT_THRESHOLDS).unwrap(), &DEFAULT_THRESHOLDS),
        summary_csv(&summarize(&back, &DEFAULT_THRESHOLDS).unwrap(), &DEFAULT_THRESHOLDS)
    );
    let rows = summarize(&back, &DEFAULT_THRESHOLDS).unwrap();
    let first: Vec<_> = back
        .iter()
        .filter(|r| r.algorithm == rows[0].algorithm && r.k_meas == rows[0].k && r.noise_pct == rows[0].noise_pct)
        .cloned()
        .collect();
    for (i, t) in DEFAULT_THRESHOLDS.iter().enumerate() {
        assert_eq!(rows[0].acceptance[i], acceptance_rate(&first, *t).unwrap());
    }
}

#[test]
fn reconstruct_writes_mean_and_std_per_sample() {
    let dir = tempfile::tempdir().unwrap();
    let theta = "1 0 0 0.5\n0 1 0 0.5\n0 0 1 0.5\n";
    let t = write(dir.path(), "theta.txt", theta);
    let y = write(dir.path(), "y.txt", "# measurements\n0\n2\n0\n");
    let out = dir.path().join("x.txt");
    let o = rbcs(&["reconstruct", "--theta", &t, "--y", &y, "--variant", "so_star", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = matrix_io::read_matrix(&out).unwrap();
    assert_eq!(m.shape(), (4, 2));
    assert!((m[(1, 0)] - 2.0).abs() < 1e-3);
    assert!(m.column(1).iter().all(|s| *s >= 0.0));
}

#[test]
fn configuration_and_io_errors_fail_the_process() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.cfg", "n = 64\nbogus = 1\n");
    let out = dir.path().join("o.csv");
    let o = rbcs(&["sweep", "--config", &bad, "--out", out.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));
    let missing = dir.path().join("missing.cfg");
    assert!(!rbcs(&["sweep", "--config", missing.to_str().unwrap(), "--out", "x.csv"]).status.success());
    let good = write(dir.path(), "good.cfg", "n = 32\nspikes = 2\nk = 16\nnoise = 0\nalgorithms = so\ntrials = 1\n");
    let unwritable = dir.path().join("no/such/dir/o.csv");
    assert!(!rbcs(&["sweep", "--config", &good, "--out", unwritable.to_str().unwrap()]).status.success());
    let broken = write(dir.path(), "broken.csv", "not,a,header\n");
    let o = rbcs(&["report", &broken]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains(":1:"));
}

#[test]
fn surrogate_command_writes_both_cases() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.cfg",
        "total_len = 1024\nsegment_len = 128\nsegments = 2\nk = 64\nalgorithms = so, bottom_up_fixed\n",
    );
    let out = dir.path().join("s.csv");
    let o = rbcs(&["surrogate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let recs = csv::read(&out).unwrap();
    assert_eq!(recs.len(), 2 * 2 * 2);
    assert!(recs.iter().any(|r| r.algorithm == "case1:so"));
    assert!(recs.iter().any(|r| r.algorithm == "case2:bottom_up_fixed"));
}

#[test]
fn nearly_square_projection_recovers_a_thresholded_segment() {
    let spec = SurrogateSpec { total_len: 2048, segment_len: 64, amplitude: 1e-4, ..SurrogateSpec::default() };
    let run = SurrogateRun { signal: spec.clone(), k_values: vec![63], ..SurrogateRun::default() };
    let segs = surrogate::segments(&spec).unwrap();
    let (idx, seg) = segs
        .iter()
        .enumerate()
        .filter(|(_, s)| s.survivors > 0)
        .min_by_key(|(_, s)| s.survivors)
        .unwrap();
    assert!(seg.survivors <= 16, "{}", seg.survivors);
    let phi = surrogate::shared_projection(&spec, 63).unwrap();
    let rec = surrogate::run_segment(&run, seg, idx, &phi, Case::Denoised, Variant::SoStar).unwrap();
    assert!(rec.recon_error < 1e-6, "{}", rec.recon_error);
}
