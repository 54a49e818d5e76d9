//! Evaluation reports and the reproduction table.

use std::fmt::Write as _;

use satjam_core::dataset::Dataset;
use satjam_core::jammer::AttackKind;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

/// Rounds an accuracy to a tenth of a percentage point.
pub fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bucket {
    pub key: String,
    pub n: usize,
    pub accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorReport {
    pub detector: String,
    pub n_test: usize,
    pub accuracy: f64,
    /// Rows are true classes (clean, jammed), columns predicted classes.
    pub confusion: [[usize; 2]; 2],
    /// Detection rate of jammed samples at each SJR level.
    pub per_sjr: Vec<Bucket>,
    /// Accuracy per attack kind; `none` covers the clean samples.
    pub per_attack: Vec<Bucket>,
    pub per_snr: Vec<Bucket>,
}

impl DetectorReport {
    pub fn new(detector: &str, ds: &Dataset, predicted: &[u8]) -> Self {
        assert_eq!(predicted.len(), ds.len());
        let mut confusion = [[0usize; 2]; 2];
        for (&t, &p) in ds.labels.iter().zip(predicted) {
            confusion[t as usize][p as usize] += 1;
        }
        let correct: Vec<bool> = ds.labels.iter().zip(predicted).map(|(a, b)| a == b).collect();
        let tags: Vec<_> = ds.manifest.records.iter().map(|r| r.tag).collect();

        let bucket = |key: &dyn Fn(usize) -> Option<(f64, String)>| {
            let mut groups: Vec<(f64, String, usize, usize)> = Vec::new();
            for (i, &ok) in correct.iter().enumerate() {
                let Some((order, name)) = key(i) else { continue };
                match groups.iter_mut().find(|g| g.1 == name) {
                    Some(g) => {
                        g.2 += 1;
                        g.3 += ok as usize;
                    }
                    None => groups.push((order, name, 1, ok as usize)),
                }
            }
            groups.sort_by(|a, b| a.0.total_cmp(&b.0));
            groups
                .into_iter()
                .map(|(_, key, n, hit)| Bucket { key, n, accuracy: round3(hit as f64 / n as f64) })
                .collect::<Vec<_>>()
        };
        let per_sjr = bucket(&|i| tags[i].sjr_db.map(|s| (s, format!("{s}"))));
        let per_attack = bucket(&|i| {
            let kinds = [AttackKind::None, AttackKind::Barrage, AttackKind::PilotTone, AttackKind::Intermittent];
            let order = kinds.iter().position(|&k| k == tags[i].attack).unwrap_or(0) as f64;
            Some((order, tags[i].attack.name().to_string()))
        });
        let per_snr = bucket(&|i| Some((tags[i].snr_db, format!("{}", tags[i].snr_db))));

        DetectorReport {
            detector: detector.to_string(),
            n_test: ds.len(),
            accuracy: round3(correct.iter().filter(|&&c| c).count() as f64 / ds.len().max(1) as f64),
            confusion,
            per_sjr,
            per_attack,
            per_snr,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub split: String,
    pub config: ExperimentConfig,
    pub detectors: Vec<DetectorReport>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn table(&self) -> String {
        let mut s = format!("{} ({} split)\n", self.config.name, self.split);
        for d in &self.detectors {
            let _ = writeln!(s, "  {:<8} accuracy {:5.1}%  (n = {})", d.detector, d.accuracy * 100.0, d.n_test);
            let _ = writeln!(
                s,
                "           confusion  clean: {:>5} {:>5}   jammed: {:>5} {:>5}",
                d.confusion[0][0], d.confusion[0][1], d.confusion[1][0], d.confusion[1][1]
            );
            for (title, buckets) in [("SJR dB", &d.per_sjr), ("attack", &d.per_attack), ("SNR dB", &d.per_snr)] {
                let cells: Vec<String> =
                    buckets.iter().map(|b| format!("{}: {:.1}%", b.key, b.accuracy * 100.0)).collect();
                let _ = writeln!(s, "           {title:<8} {}", cells.join("  "));
            }
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReproduceRow {
    pub snr_db: f64,
    pub cnn: Option<f64>,
    pub pca_svm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_cnn: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_pca_svm: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReproduceTable {
    pub version: String,
    pub config: ExperimentConfig,
    pub rows: Vec<ReproduceRow>,
}

impl ReproduceTable {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes") + "\n"
    }

    pub fn to_csv(&self) -> String {
        let f = |v: Option<f64>| v.map(|x| format!("{x:.3}")).unwrap_or_default();
        let mut s = String::from("snr_db,cnn,pca_svm,reference_cnn,reference_pca_svm\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                r.snr_db,
                f(r.cnn),
                f(r.pca_svm),
                f(r.reference_cnn),
                f(r.reference_pca_svm)
            );
        }
        s
    }

    pub fn table(&self) -> String {
        let f = |v: Option<f64>| v.map(|x| format!("{:6.1}%", x * 100.0)).unwrap_or_else(|| "     -".into());
        let mut s = format!("{}\n  SNR dB      CNN  PCA+SVM  | ref CNN  ref SVM\n", self.config.name);
        for r in &self.rows {
            let _ = writeln!(
                s,
                "  {:>6}  {} {}  | {} {}",
                r.snr_db,
                f(r.cnn),
                f(r.pca_svm),
                f(r.reference_cnn),
                f(r.reference_pca_svm)
            );
        }
        s
    }
}
