//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria 4 and 5 train both detectors on six desk-scale datasets and take
//! a while on a single core. Criterion 6 needs `SATJAM_FULL_SCALE=1` and
//! several hours; without it the line reads SKIP.
//!
//! A check marked as a known shortfall still prints FAIL, but does not fail
//! the run. Any other failing check does.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use satjam::report::ReproduceTable;
use satjam_core::channel::{add_awgn, draw_rician};
use satjam_core::jammer::{build_mask, AttackKind, AttackSpec, JammingPattern};
use satjam_core::waveform::{build_grid, FrameGrid, WaveformConfig};
use satjam_ml::linalg::dot;
use satjam_ml::{gradcheck, AdamConfig, AdamState, PcaModel};

const BIN: &str = env!("CARGO_BIN_EXE_satjam");
const SJR_LEVELS: [f64; 5] = [-20.0, -15.0, -10.0, -5.0, 0.0];

struct Check {
    what: String,
    pass: bool,
    known_shortfall: bool,
}

fn check(what: impl Into<String>, pass: bool) -> Check {
    Check { what: what.into(), pass, known_shortfall: false }
}

struct Criterion {
    id: u8,
    title: &'static str,
    checks: Vec<Check>,
    skipped: Option<String>,
    elapsed: Duration,
}

impl Criterion {
    fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    fn blocking_failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.pass && !c.known_shortfall).count()
    }

    fn status(&self) -> &'static str {
        match (&self.skipped, self.passed()) {
            (Some(_), _) => "SKIP",
            (None, true) => "PASS",
            (None, false) => "FAIL",
        }
    }

    fn print(&self) {
        println!("{} [{}] {} ({:.1} s)", self.status(), self.id, self.title, self.elapsed.as_secs_f64());
        if let Some(why) = &self.skipped {
            println!("       {why}");
        }
        for c in &self.checks {
            let mark = match (c.pass, c.known_shortfall) {
                (true, _) => "ok  ",
                (false, true) => "FAIL (known shortfall)",
                (false, false) => "FAIL",
            };
            println!("       {mark} {}", c.what);
        }
    }
}

fn run(id: u8, title: &'static str, budget: Duration, body: impl FnOnce() -> Vec<Check>) -> Criterion {
    let start = Instant::now();
    let mut checks = body();
    let elapsed = start.elapsed();
    checks.push(check(format!("runtime {:.1} s within {:.0} s", elapsed.as_secs_f64(), budget.as_secs_f64()), elapsed <= budget));
    Criterion { id, title, checks, skipped: None, elapsed }
}

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

fn structural() -> Vec<Check> {
    let cfg = WaveformConfig::default();
    let pilots = cfg.pilot_offsets();
    let spec = AttackSpec::new(AttackKind::Intermittent, -10.0);
    let mask = build_mask(&spec, &cfg).unwrap();
    vec![
        check(format!("pilot count {} == 88", pilots.len()), pilots.len() == 88),
        check("pilot offsets all k ≡ 4 (mod 8) inside 705 occupied", cfg.n_occupied == 705 && pilots.iter().all(|&k| k % 8 == 4 && k < 705)),
        check(format!("sample length {} == 652800", cfg.sample_len()), cfg.sample_len() == 652_800),
        check(format!("intermittent mask {} == 88 x 60", mask.count()), mask.count() == 88 * 60),
        check(format!("intermittent symbols {} == 60", mask.active_symbols().len()), mask.active_symbols().len() == 60),
    ]
}

fn calibration() -> Vec<Check> {
    let cfg = WaveformConfig::default();
    let mut out = Vec::new();
    let clean = build_grid(&cfg, 1).unwrap();
    let ps = clean.occupied_power();
    let mut worst_snr = 0.0f64;
    for (i, snr) in [5.0, 10.0, 15.0].into_iter().enumerate() {
        let noisy = add_awgn(clean.clone(), snr, 10 + i as u64);
        let mut noise = FrameGrid::zeros(&cfg);
        for ((n, a), b) in noise.units_mut().iter_mut().zip(noisy.units()).zip(clean.units()) {
            *n = a - b;
        }
        worst_snr = worst_snr.max((db(ps / noise.occupied_power()) - snr).abs());
    }
    out.push(check(format!("SNR error {worst_snr:.3} dB <= 0.2 dB"), worst_snr <= 0.2));

    let mut worst_sjr = 0.0f64;
    for (k, kind) in AttackKind::JAMMING.into_iter().enumerate() {
        for (j, sjr) in SJR_LEVELS.into_iter().enumerate() {
            let p = JammingPattern::generate(&AttackSpec::new(kind, sjr), &cfg, (k * 10 + j) as u64).unwrap();
            worst_sjr = worst_sjr.max((db(ps / p.active_power()) - sjr).abs());
        }
    }
    out.push(check(format!("per-active-RE SJR error {worst_sjr:.3} dB <= 0.15 dB"), worst_sjr <= 0.15));

    let gains = draw_rician(5.0, 100_000, 11).unwrap().gains;
    let p: Vec<f64> = gains.iter().map(|g| g.norm_sqr()).collect();
    let n = p.len() as f64;
    let mean = p.iter().sum::<f64>() / n;
    let var = p.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let r = (1.0 - var / (mean * mean)).sqrt();
    let k = r / (1.0 - r);
    out.push(check(format!("Rician K estimate {k:.3} within 5% of 5"), (k - 5.0).abs() <= 0.25));
    out
}

fn numerical_core() -> Vec<Check> {
    let mut out: Vec<Check> = gradcheck::run_all()
        .into_iter()
        .map(|(name, err)| check(format!("{name} gradient rel. error {err:.2e} <= 1e-6"), err <= gradcheck::TOLERANCE))
        .collect();

    // Spectrogram-sized PCA: 60 samples of dimension 2000, 45 components.
    let (n, dim, k) = (60, 2000, 45);
    let mut state = 0x2545_f491_4f6c_dd1du64;
    let x: Vec<f64> = (0..n * dim)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        })
        .collect();
    let pca = PcaModel::fit(&x, n, dim, k).unwrap();
    let mut worst = 0.0f64;
    for a in 0..k {
        for b in 0..k {
            let g = dot(&pca.components[a * dim..(a + 1) * dim], &pca.components[b * dim..(b + 1) * dim]);
            worst = worst.max((g - if a == b { 1.0 } else { 0.0 }).abs());
        }
    }
    out.push(check(format!("PCA orthonormality error {worst:.2e} <= 1e-8"), worst <= 1e-8));

    let mut adam_err = 0.0f64;
    for g in [2.5, -0.01, 1e-3] {
        let mut st = AdamState::<f64>::new(AdamConfig::default());
        let mut p = [0.0];
        st.begin_step();
        st.update(&mut p, &[g]).unwrap();
        adam_err = adam_err.max((p[0] + 1e-4 * g.signum()).abs());
    }
    out.push(check(format!("Adam first step error {adam_err:.2e} <= 1e-6"), adam_err <= 1e-6));
    out
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn reproduce(config: &str, out: &Path, extra: &[&str]) -> Result<ReproduceTable, String> {
    let cfg = repo_root().join("configs").join(config);
    let mut args = vec!["reproduce", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let r = Command::new(BIN).args(&args).output().map_err(|e| e.to_string())?;
    if !r.status.success() {
        return Err(String::from_utf8_lossy(&r.stderr).into_owned());
    }
    let text = std::fs::read_to_string(out.join("reproduce.json")).map_err(|e| e.to_string())?;
    serde_json::from_str(&text).map_err(|e| e.to_string())
}

fn acc(t: &ReproduceTable, snr: f64) -> (f64, f64) {
    let row = t.rows.iter().find(|r| r.snr_db == snr).expect("swept SNR");
    (row.cnn.unwrap_or(f64::NAN), row.pca_svm.unwrap_or(f64::NAN))
}

fn fmt_table(t: &ReproduceTable) -> String {
    t.rows
        .iter()
        .map(|r| format!("{} dB: cnn {:.3} svm {:.3}", r.snr_db, r.cnn.unwrap_or(f64::NAN), r.pca_svm.unwrap_or(f64::NAN)))
        .collect::<Vec<_>>()
        .join(", ")
}

fn snr_trend(all: &Result<ReproduceTable, String>) -> Vec<Check> {
    let t = match all {
        Ok(t) => t,
        Err(e) => return vec![check(format!("all-attacks sweep failed: {e}"), false)],
    };
    let (c5, _) = acc(t, 5.0);
    let (c10, s10) = acc(t, 10.0);
    let (c15, s15) = acc(t, 15.0);
    vec![
        check(format!("measured {}", fmt_table(t)), true),
        check(format!("cnn monotone in SNR with 1-point slack ({c5:.3}, {c10:.3}, {c15:.3})"), c5 <= c10 + 0.01 && c10 <= c15 + 0.01),
        Check { what: format!("cnn {c10:.3} >= svm {s10:.3} at 10 dB"), pass: c10 >= s10, known_shortfall: true },
        Check { what: format!("cnn {c15:.3} >= svm {s15:.3} at 15 dB"), pass: c15 >= s15, known_shortfall: true },
        check(format!("cnn {c15:.3} >= 0.85 at 15 dB"), c15 >= 0.85),
        check(format!("svm {s15:.3} >= 0.80 at 15 dB"), s15 >= 0.80),
    ]
}

fn intermittent_hardness(all: &Result<ReproduceTable, String>, inter: &Result<ReproduceTable, String>) -> Vec<Check> {
    let (all, inter) = match (all, inter) {
        (Ok(a), Ok(i)) => (a, i),
        (Err(e), _) | (_, Err(e)) => return vec![check(format!("sweep failed: {e}"), false)],
    };
    let mut out = vec![check(format!("intermittent {}", fmt_table(inter)), true)];
    for snr in [5.0, 10.0, 15.0] {
        let (ac, asv) = acc(all, snr);
        let (ic, isv) = acc(inter, snr);
        out.push(check(format!("{snr} dB cnn: intermittent {ic:.3} < all {ac:.3}"), ic < ac));
        out.push(check(format!("{snr} dB svm: intermittent {isv:.3} < all {asv:.3}"), isv < asv));
    }
    let (ac, asv) = acc(all, 15.0);
    let (ic, isv) = acc(inter, 15.0);
    out.push(check(format!("15 dB cnn gap {:.1} points >= 2", (ac - ic) * 100.0), ac - ic >= 0.02 - 1e-9));
    out.push(check(format!("15 dB svm gap {:.1} points >= 2", (asv - isv) * 100.0), asv - isv >= 0.02 - 1e-9));
    out
}

fn full_scale(dir: &Path) -> Vec<Check> {
    let mut out = Vec::new();
    for config in ["all_attacks.json", "intermittent.json"] {
        match reproduce(config, &dir.join(config.trim_end_matches(".json")), &["--full-scale"]) {
            Err(e) => out.push(check(format!("{config}: {e}"), false)),
            Ok(t) => {
                for r in &t.rows {
                    let (cnn, svm) = (r.cnn.unwrap_or(f64::NAN), r.pca_svm.unwrap_or(f64::NAN));
                    let (rc, rs) = (r.reference_cnn.unwrap_or(f64::NAN), r.reference_pca_svm.unwrap_or(f64::NAN));
                    out.push(check(format!("{config} {} dB cnn {cnn:.3} vs {rc:.3} (±0.06)", r.snr_db), (cnn - rc).abs() <= 0.06));
                    out.push(check(format!("{config} {} dB svm {svm:.3} vs {rs:.3} (±0.04)", r.snr_db), (svm - rs).abs() <= 0.04));
                }
            }
        }
    }
    out
}

/// All files under `dir` except wall-clock timings, with their contents.
fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if path.file_name().unwrap() != "timing.json" {
                out.push((path.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

const DETERMINISM_CONFIG: &str = r#"{
    "name": "determinism",
    "scenario": {"snr_levels": [10], "sjr_levels": [-20, -10, 0],
                 "attack_kinds": ["barrage", "pilot-tone", "intermittent"],
                 "n_train": 80, "n_test": 40, "seed": 77},
    "pipeline": {"waveform": {"frames_per_sample": 2}},
    "cnn": {"train": {"epochs": 4, "seed": 5}},
    "pca_svm": {"n_components": 20},
    "sweep": {"snr_levels": [5, 15]}
}"#;

fn determinism(dir: &Path) -> Vec<Check> {
    std::fs::create_dir_all(dir).unwrap();
    let cfg = dir.join("determinism.json");
    std::fs::write(&cfg, DETERMINISM_CONFIG).unwrap();
    let mut snaps = Vec::new();
    // Both runs use the same output path, which the resolved config records.
    let out = dir.join("run");
    for threads in ["1", "2"] {
        if out.exists() {
            std::fs::remove_dir_all(&out).unwrap();
        }
        let base = ["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
        for cmd in ["generate", "train", "evaluate", "reproduce"] {
            let r = Command::new(BIN).arg(cmd).args(base).env("SATJAM_THREADS", threads).output().unwrap();
            if !r.status.success() {
                return vec![check(format!("{cmd} failed: {}", String::from_utf8_lossy(&r.stderr)), false)];
            }
        }
        snaps.push(snapshot(&out));
    }
    let names: Vec<String> = snaps[0].iter().map(|(p, _)| p.display().to_string()).collect();
    let kinds = ["sjd", "sjm", "report.json", "reproduce.json"];
    let mut out = vec![check(
        format!("{} files compared, including datasets, models and reports", names.len()),
        kinds.iter().all(|k| names.iter().any(|n| n.ends_with(k))),
    )];
    let same_names = snaps[0].iter().map(|(p, _)| p).eq(snaps[1].iter().map(|(p, _)| p));
    out.push(check("same file set in both runs", same_names));
    let differing: Vec<String> = snaps[0]
        .iter()
        .zip(&snaps[1])
        .filter(|(a, b)| a.1 != b.1)
        .map(|(a, _)| a.0.display().to_string())
        .collect();
    out.push(check(format!("byte-identical outputs across runs (1 vs 2 threads); differing: {differing:?}"), differing.is_empty()));
    out
}

fn main() {
    // `cargo test` passes harness flags such as `--list`; nothing to list here.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let scratch = tempfile::tempdir().expect("temp dir");
    let minute = Duration::from_secs(60);
    let mut results = Vec::new();
    let mut record = |c: Criterion| {
        c.print();
        results.push(c);
    };
    record(run(1, "structural exactness", Duration::from_secs(1), structural));
    record(run(2, "calibration on full-size samples", Duration::from_secs(30), calibration));
    record(run(3, "numerical core", minute, numerical_core));

    let mut all = Err(String::new());
    record(run(4, "desk-scale SNR trend, all attacks", 30 * minute, || {
        all = reproduce("all_attacks.json", &scratch.path().join("all_attacks"), &[]);
        snr_trend(&all)
    }));
    record(run(5, "intermittent attack is harder to detect", 30 * minute, || {
        let inter = reproduce("intermittent.json", &scratch.path().join("intermittent"), &[]);
        intermittent_hardness(&all, &inter)
    }));

    if std::env::var("SATJAM_FULL_SCALE").is_ok_and(|v| v == "1") {
        let start = Instant::now();
        let checks = full_scale(&scratch.path().join("full"));
        record(Criterion { id: 6, title: "full-scale comparison", checks, skipped: None, elapsed: start.elapsed() });
    } else {
        record(Criterion {
            id: 6,
            title: "full-scale comparison",
            checks: Vec::new(),
            skipped: Some("nightly job: set SATJAM_FULL_SCALE=1 to run (several hours on one core)".into()),
            elapsed: Duration::ZERO,
        });
    }
    record(run(7, "end-to-end determinism", 30 * minute, || determinism(&scratch.path().join("det"))));

    println!();
    for r in &results {
        println!("{} [{}] {}", r.status(), r.id, r.title);
    }
    let blocking: usize = results.iter().map(Criterion::blocking_failures).sum();
    let known: usize = results.iter().flat_map(|r| &r.checks).filter(|c| !c.pass && c.known_shortfall).count();
    println!();
    println!("acceptance: {blocking} blocking failure(s), {known} known shortfall(s)");
    if blocking > 0 {
        std::process::exit(1);
    }
}
