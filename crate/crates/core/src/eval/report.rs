use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adjectives::adjective_index;
use crate::error::{Error, Result};

pub const REPORT_VERSION: u32 = 1;

/// AUC of one adjective; `None` when its split was infeasible.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdjectiveAuc {
    pub adjective: String,
    pub auc: Option<f64>,
}

/// Per-adjective results of one split seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRun {
    pub seed: u64,
    /// Single-line description of the training configuration, without seeds.
    pub config: String,
    pub results: Vec<AdjectiveAuc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdjectiveRow {
    pub adjective: String,
    /// One entry per seed, in the report's seed order.
    pub per_seed: Vec<Option<f64>>,
    /// Mean over the seeds that produced an AUC.
    pub mean: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub seeds: Vec<u64>,
    pub rows: Vec<AdjectiveRow>,
    /// Unweighted mean over adjectives with a defined AUC.
    pub mean_auc: f64,
    pub fingerprint: String,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| x.to_string())
}

fn mean_of(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn parse_kv(text: &str, origin: &Path, format: &str) -> Result<Vec<(String, String)>> {
    let err = |reason: String| Error::Parse {
        path: origin.display().to_string(),
        reason,
    };
    let mut pairs = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| err(format!("line {}: expected key=value", n + 1)))?;
        pairs.push((k.to_string(), v.to_string()));
    }
    match pairs.first() {
        Some((k, v)) if k == "format" && v == format => {}
        _ => {
            return Err(Error::UnsupportedFormat {
                path: origin.display().to_string(),
                reason: format!("expected `format={format}` on the first line"),
            })
        }
    }
    match pairs.get(1) {
        Some((k, v)) if k == "version" && v.parse::<u32>().ok() == Some(REPORT_VERSION) => {}
        Some((k, v)) if k == "version" => {
            return Err(Error::UnsupportedFormat {
                path: origin.display().to_string(),
                reason: format!("unsupported version {v}"),
            })
        }
        _ => return Err(err("missing version line".into())),
    }
    Ok(pairs.split_off(2))
}

fn parse_auc(v: &str, key: &str, origin: &Path) -> Result<Option<f64>> {
    if v == "n/a" {
        return Ok(None);
    }
    let x: f64 = v.parse().map_err(|_| Error::Parse {
        path: origin.display().to_string(),
        reason: format!("`{key}`: `{v}` is not a number"),
    })?;
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Parse {
            path: origin.display().to_string(),
            reason: format!("`{key}`: AUC {x} outside [0, 1]"),
        });
    }
    Ok(Some(x))
}

impl EvalRun {
    pub fn mean_auc(&self) -> Option<f64> {
        mean_of(self.results.iter().filter_map(|r| r.auc))
    }

    /// Key-value text, one record per line.
    pub fn to_text(&self) -> String {
        let mut s = format!("format=haptic-eval\nversion={REPORT_VERSION}\nseed={}\nconfig={}\n", self.seed, self.config);
        for r in &self.results {
            let _ = writeln!(s, "auc.{}={}", r.adjective, fmt_opt(r.auc));
        }
        let _ = writeln!(s, "mean={}", fmt_opt(self.mean_auc()));
        s
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let err = |reason: String| Error::Parse {
            path: origin.display().to_string(),
            reason,
        };
        let (mut seed, mut config, mut results) = (None, None, Vec::new());
        for (k, v) in parse_kv(text, origin, "haptic-eval")? {
            match k.as_str() {
                "seed" => seed = Some(v.parse::<u64>().map_err(|_| err(format!("bad seed `{v}`")))?),
                "config" => config = Some(v),
                "mean" => {}
                _ => {
                    let adjective = k
                        .strip_prefix("auc.")
                        .ok_or_else(|| err(format!("unknown key `{k}`")))?;
                    adjective_index(adjective).map_err(|_| err(format!("unknown adjective `{adjective}`")))?;
                    results.push(AdjectiveAuc {
                        adjective: adjective.to_string(),
                        auc: parse_auc(&v, &k, origin)?,
                    });
                }
            }
        }
        Ok(Self {
            seed: seed.ok_or_else(|| err("missing `seed`".into()))?,
            config: config.ok_or_else(|| err("missing `config`".into()))?,
            results,
        })
    }

    /// Fixed-width table followed by the mean.
    pub fn to_table(&self) -> String {
        let mut s = String::from("adjective      auc\n");
        for r in &self.results {
            let _ = writeln!(s, "{:<14} {}", r.adjective, r.auc.map_or("n/a".into(), |a| format!("{a:.4}")));
        }
        let _ = writeln!(s, "{:<14} {}", "mean", self.mean_auc().map_or("n/a".into(), |a| format!("{a:.4}")));
        s
    }
}

/// Averages runs over seeds: per adjective first, then over adjectives.
pub fn aggregate(runs: &[EvalRun]) -> Result<EvalReport> {
    let first = runs
        .first()
        .ok_or_else(|| Error::InvalidInput("no runs to aggregate".into()))?;
    let names: Vec<&str> = first.results.iter().map(|r| r.adjective.as_str()).collect();
    let mut table: BTreeMap<&str, Vec<Option<f64>>> = names.iter().map(|n| (*n, Vec::new())).collect();
    if table.len() != names.len() {
        return Err(Error::InvalidInput(format!("seed {} repeats an adjective", first.seed)));
    }
    for (k, run) in runs.iter().enumerate() {
        if run.config != first.config {
            return Err(Error::InvalidInput(format!(
                "seed {} was run with a different configuration",
                run.seed
            )));
        }
        if run.results.len() != names.len() {
            return Err(Error::InvalidInput(format!(
                "seed {} has {} adjectives, seed {} has {}",
                run.seed,
                run.results.len(),
                first.seed,
                names.len()
            )));
        }
        for r in &run.results {
            table
                .get_mut(r.adjective.as_str())
                .ok_or_else(|| Error::InvalidInput(format!("adjective `{}` missing from seed {}", r.adjective, first.seed)))?
                .push(r.auc);
        }
        if let Some((name, _)) = table.iter().find(|(_, v)| v.len() != k + 1) {
            return Err(Error::InvalidInput(format!("adjective `{name}` missing from seed {}", run.seed)));
        }
    }
    let rows: Vec<AdjectiveRow> = names
        .iter()
        .map(|n| {
            let per_seed = table[n].clone();
            AdjectiveRow {
                adjective: n.to_string(),
                mean: mean_of(per_seed.iter().flatten().copied()),
                per_seed,
            }
        })
        .collect();
    let mean_auc = mean_of(rows.iter().filter_map(|r| r.mean))
        .ok_or_else(|| Error::UndefinedAuc("no adjective produced an AUC".into()))?;
    let seeds: Vec<u64> = runs.iter().map(|r| r.seed).collect();
    let mut hasher = Sha256::new();
    hasher.update(first.config.as_bytes());
    for s in &seeds {
        hasher.update(s.to_le_bytes());
    }
    let fingerprint = hasher.finalize().iter().map(|b| format!("{b:02x}")).collect();
    Ok(EvalReport {
        seeds,
        rows,
        mean_auc,
        fingerprint,
    })
}

impl EvalReport {
    /// Machine-readable key-value records.
    pub fn to_text(&self) -> String {
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        let mut s = format!(
            "format=haptic-report\nversion={REPORT_VERSION}\nfingerprint={}\nseeds={}\nmean_auc={}\n",
            self.fingerprint,
            seeds.join(","),
            self.mean_auc
        );
        for r in &self.rows {
            let _ = writeln!(s, "adjective.{}.mean={}", r.adjective, fmt_opt(r.mean));
            for (seed, v) in self.seeds.iter().zip(&r.per_seed) {
                let _ = writeln!(s, "adjective.{}.seed.{seed}={}", r.adjective, fmt_opt(*v));
            }
        }
        s
    }

    /// One row per adjective plus a final mean row.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("adjective,mean");
        for seed in &self.seeds {
            let _ = write!(s, ",seed_{seed}");
        }
        s.push('\n');
        for r in &self.rows {
            let _ = write!(s, "{},{}", r.adjective, fmt_opt(r.mean));
            for v in &r.per_seed {
                let _ = write!(s, ",{}", fmt_opt(*v));
            }
            s.push('\n');
        }
        let _ = writeln!(s, "mean,{}{}", self.mean_auc, ",".repeat(self.seeds.len()));
        s
    }

    pub fn to_table(&self) -> String {
        let mut s = format!("{:<14} {:>7}", "adjective", "mean");
        for seed in &self.seeds {
            let _ = write!(s, " {:>7}", format!("s{seed}"));
        }
        s.push('\n');
        let cell = |v: Option<f64>| v.map_or("n/a".into(), |a| format!("{a:.4}"));
        for r in &self.rows {
            let _ = write!(s, "{:<14} {:>7}", r.adjective, cell(r.mean));
            for v in &r.per_seed {
                let _ = write!(s, " {:>7}", cell(*v));
            }
            s.push('\n');
        }
        let _ = writeln!(s, "{:<14} {:>7.4}", "mean", self.mean_auc);
        s
    }
}
