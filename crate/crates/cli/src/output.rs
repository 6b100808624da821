use std::fs::File;
use std::path::Path;

use anyhow::{Context, Result};
use sigmal::brownian::EstimatorResult;
use sigmal::validation::CheckOutcome;

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))
}

/// Full float precision keeps reruns byte-identical and lossless.
fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn write_validation(path: &Path, checks: &[CheckOutcome]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["check_name", "status", "max_error"])?;
    for c in checks {
        w.write_record([c.name.as_str(), if c.passed { "pass" } else { "fail" }, &num(c.max_error)])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per checkpoint. Runs that excluded too many paths get
/// `unstable` in the last column.
pub fn write_convergence(path: &Path, runs: &[(String, EstimatorResult)]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["n", "estimator_tag", "estimate", "std_error", "flag"])?;
    for (tag, r) in runs {
        let flag = if r.unstable() { "unstable" } else { "" };
        for c in &r.checkpoints {
            w.write_record([&c.n.to_string(), tag, &num(c.estimate), &num(c.std_error), flag])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Bin {
    pub left: f64,
    pub right: f64,
    pub count: usize,
}

/// Equal-width bins spanning the finite samples.
pub fn histogram(xs: &[f64], bins: usize) -> Vec<Bin> {
    let finite: Vec<f64> = xs.iter().copied().filter(|x| x.is_finite()).collect();
    if finite.is_empty() || bins == 0 {
        return Vec::new();
    }
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0usize; bins];
    for x in finite {
        let k = (((x - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| Bin { left: lo + k as f64 * width, right: lo + (k + 1) as f64 * width, count })
        .collect()
}

pub fn write_histograms(path: &Path, hists: &[(String, Vec<Bin>)]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["bin_left", "bin_right", "count", "tag"])?;
    for (tag, bins) in hists {
        for b in bins {
            w.write_record([&num(b.left), &num(b.right), &b.count.to_string(), tag])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_rows(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_counts_everything_once() {
        let xs = [0.0, 0.1, 0.5, 0.99, 1.0, f64::NAN];
        let h = histogram(&xs, 4);
        assert_eq!(h.len(), 4);
        assert_eq!(h.iter().map(|b| b.count).sum::<usize>(), 5);
        assert_eq!(h[3].count, 2);
        assert_eq!(h[0].left, 0.0);
        assert_eq!(h[3].right, 1.0);
    }
}
