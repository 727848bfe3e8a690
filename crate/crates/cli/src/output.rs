//! CSV and JSON writers. Floats go out with 17 significant digits.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use gibbslab::limits::LawKind;
use gibbslab::stats::{histogram, ExperimentReport, Values};
use serde::Serialize;

pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

/// One row per replicate value.
pub fn write_values(path: &Path, report: &ExperimentReport) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["group", "instance_seed", "index", "value"])?;
    for (gi, g) in report.groups.iter().enumerate() {
        let seed = g.instance_seed.map(|s| s.to_string()).unwrap_or_default();
        let vals: Vec<String> = match &g.values {
            Values::Reals(v) => v.iter().map(|&x| fmt_f64(x)).collect(),
            Values::Counts(v) => v.iter().map(|c| c.to_string()).collect(),
        };
        for (i, v) in vals.iter().enumerate() {
            w.write_record([gi.to_string(), seed.clone(), i.to_string(), v.clone()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Histogram against the pmf for Poisson laws; empirical against predicted
/// CDF at each value for normal laws.
pub fn write_plot_data(path: &Path, report: &ExperimentReport) -> Result<bool> {
    let Some(law) = &report.predicted else { return Ok(false) };
    let mut w = writer(path)?;
    match law.kind {
        LawKind::Poisson { .. } => {
            w.write_record(["group", "k", "empirical_pmf", "predicted_pmf"])?;
            for (gi, g) in report.groups.iter().enumerate() {
                let Values::Counts(c) = &g.values else { continue };
                if c.is_empty() {
                    continue;
                }
                let h = histogram(c);
                let total = c.len() as f64;
                for k in 0..h.len() + 3 {
                    let emp = h.get(k).copied().unwrap_or(0) as f64 / total;
                    let pmf = law.pmf(k as u64).unwrap_or(f64::NAN);
                    w.write_record([gi.to_string(), k.to_string(), fmt_f64(emp), fmt_f64(pmf)])?;
                }
            }
        }
        LawKind::Normal { .. } => {
            w.write_record(["group", "value", "empirical_cdf", "predicted_cdf"])?;
            for (gi, g) in report.groups.iter().enumerate() {
                let mut v = g.values.as_f64();
                v.sort_by(f64::total_cmp);
                let n = v.len() as f64;
                for (i, &x) in v.iter().enumerate() {
                    w.write_record([gi.to_string(), fmt_f64(x), fmt_f64((i + 1) as f64 / n), fmt_f64(law.cdf(x))])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(true)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    Ok(())
}

pub struct Paths {
    pub values: PathBuf,
    pub plot: PathBuf,
    pub summary: PathBuf,
}

impl Paths {
    pub fn new(dir: &Path, prefix: &str) -> Self {
        Self {
            values: dir.join(format!("{prefix}.csv")),
            plot: dir.join(format!("{prefix}_plot.csv")),
            summary: dir.join(format!("{prefix}.json")),
        }
    }
}
