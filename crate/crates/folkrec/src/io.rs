//! Dataset, triple and metrics files.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use folkrec_core::dataset::{parse_folksonomy, parse_triples, triples, DatasetSample};
use folkrec_core::EvalReport;

use crate::error::{Error, Result};

/// Reads a tab-separated dataset file; the sample is named after the file
/// stem.
pub fn parse_folksonomy_file(path: &Path) -> Result<DatasetSample> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    parse_folksonomy(name, &text).map_err(|source| Error::Dataset { path: path.to_path_buf(), source })
}

pub fn write_sample(sample: &DatasetSample, path: &Path) -> Result<()> {
    write_atomic(path, sample.to_text().as_bytes())
}

/// Writes one `user<TAB>resource<TAB>tag` line per assignment and returns the
/// line count.
pub fn export_triples(sample: &DatasetSample, path: &Path) -> Result<usize> {
    let lines = triples(sample);
    let mut out = String::new();
    for t in &lines {
        out.push_str(&t.to_line());
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())?;
    Ok(lines.len())
}

/// Reads an exported triple file, regrouping consecutive lines into posts.
pub fn read_triples(path: &Path) -> Result<DatasetSample> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    parse_triples(name, &text).map_err(|source| Error::Dataset { path: path.to_path_buf(), source })
}

/// Deterministic metrics listing: every metric at every cutoff, then the
/// request count and the model size.
pub fn render_report(report: &EvalReport) -> String {
    let mut out = String::new();
    let names = ["recall", "precision", "f1", "mrr", "map", "ndcg", "aild", "aip"];
    for (i, name) in names.iter().enumerate() {
        for m in &report.metrics {
            let _ = writeln!(out, "{name}@{}\t{:.6}", m.k, m.values()[i].1);
        }
    }
    let _ = writeln!(out, "n_test\t{}", report.n_test_requests);
    let _ = writeln!(out, "entities\t{}", report.entity_count);
    out
}

/// Timing and memory lines. These vary between runs and are kept out of the
/// metrics file.
pub fn render_costs(report: &EvalReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "runtime_ms\t{:.6}", report.runtime_ms_total);
    let _ = writeln!(out, "runtime_ms_per_request\t{:.6}", report.runtime_ms_per_request);
    let _ = writeln!(out, "build_ms\t{:.6}", report.build_ms);
    if let Some(rss) = report.rss_peak_bytes {
        let _ = writeln!(out, "rss_peak_bytes\t{rss}");
    }
    let _ = writeln!(out, "parallel\t{}", report.parallel);
    out
}

pub fn write_report(report: &EvalReport, path: &Path) -> Result<()> {
    write_atomic(path, render_report(report).as_bytes())
}

/// Cost file next to a metrics file: `x.txt` -> `x_cost.txt`.
pub fn cost_path(metrics_path: &Path) -> std::path::PathBuf {
    let stem = metrics_path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    metrics_path.with_file_name(format!("{stem}_cost.txt"))
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use folkrec_core::eval::CutoffMetrics;

    fn report(n: usize) -> EvalReport {
        EvalReport {
            algorithm: "mp".into(),
            metrics: vec![CutoffMetrics { k: 10, recall: 0.5, ..Default::default() }],
            primary_k: 10,
            n_test_requests: n,
            build_ms: 1.0,
            runtime_ms_total: 2.0,
            runtime_ms_per_request: 0.5,
            entity_count: 9,
            rss_peak_bytes: None,
            parallel: false,
        }
    }

    #[test]
    fn report_lines() {
        let text = render_report(&report(4));
        assert!(text.starts_with("recall@10\t0.500000\n"));
        assert!(text.contains("n_test\t4\n"));
        assert!(text.contains("aip@10\t0.000000\n"));
        assert_eq!(text.lines().count(), 10);
        assert!(render_costs(&report(4)).contains("runtime_ms\t2.000000"));
    }

    #[test]
    fn io_errors_surface() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("nope.txt");
        assert!(matches!(parse_folksonomy_file(&missing), Err(Error::Io { .. })));
        let bad = dir.path().join("bad.txt");
        std::fs::write(&bad, "u\tr\tten\ta\n").unwrap();
        assert!(matches!(parse_folksonomy_file(&bad), Err(Error::Dataset { .. })));
        // writing into a path whose parent is a file fails
        let blocked = bad.join("child.txt");
        assert!(export_triples(&DatasetSample::empty("e"), &blocked).is_err());
    }

    #[test]
    fn export_counts_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.tsv");
        assert_eq!(export_triples(&DatasetSample::empty("e"), &path).unwrap(), 0);
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "");
    }

    #[test]
    fn cost_file_sits_next_to_metrics() {
        assert_eq!(cost_path(Path::new("bib/metrics/s_cf.txt")), Path::new("bib/metrics/s_cf_cost.txt"));
    }
}
