//! CSV and JSON artifacts. Floats are written with 17 significant digits.

use super::experiments::{component_names, RunOutput};
use crate::error::Result;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

/// The CSV rendering of a run: header row then one row per sample.
pub fn to_csv(out: &RunOutput) -> String {
    let (qn, pn) = component_names(out.summary.config.problem);
    let mut header: Vec<String> = ["step", "tau", "t"].iter().map(|s| s.to_string()).collect();
    header.extend(qn.iter().chain(&pn).map(|s| s.to_string()));
    header.push("invariant".into());
    header.push("evaluations".into());
    header.extend(out.columns.iter().map(|c| c.name.clone()));
    let mut s = header.join(",");
    s.push('\n');
    for (i, row) in out.trajectory.iter().enumerate() {
        let _ = write!(s, "{},{:.16e},{:.16e}", row.step, row.tau, row.t);
        for v in row.q.iter().chain(&row.p) {
            let _ = write!(s, ",{v:.16e}");
        }
        match row.invariant {
            Some(v) => {
                let _ = write!(s, ",{v:.16e}");
            }
            None => s.push(','),
        }
        let _ = write!(s, ",{}", row.evaluations);
        for c in &out.columns {
            let _ = write!(s, ",{:.16e}", c.values[i]);
        }
        s.push('\n');
    }
    s
}

/// Path of the JSON summary written beside a CSV file.
pub fn summary_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Writes `<path>` (CSV) and its JSON summary; returns the summary path.
pub fn write_outputs(path: &Path, out: &RunOutput) -> Result<PathBuf> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, to_csv(out))?;
    let json = summary_path(path);
    fs::write(&json, serde_json::to_string_pretty(&out.summary)?)?;
    Ok(json)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{ConfigOverrides, ExperimentConfig};
    use crate::harness::experiments::run;

    #[test]
    fn csv_round_trips_and_is_deterministic() {
        let o = ConfigOverrides::from_json_str(r#"{"orbits": 0.2}"#).unwrap();
        let cfg = ExperimentConfig::from_layers(&[o]).unwrap();
        let a = to_csv(&run(&cfg).unwrap());
        let b = to_csv(&run(&cfg).unwrap());
        assert_eq!(a, b);
        let mut lines = a.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(&header[..4], &["step", "tau", "t", "t_coord"]);
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first.len(), header.len());
        let r: f64 = first[4].parse().unwrap();
        assert_eq!(r, 42.0);
        let out = run(&cfg).unwrap();
        let last: Vec<&str> = a.lines().last().unwrap().split(',').collect();
        let pphi: f64 = last[8].parse().unwrap();
        assert_eq!(pphi, out.trajectory.last().unwrap().p[2]);
    }

    #[test]
    fn outputs_land_beside_each_other() {
        let dir = tempfile::tempdir().unwrap();
        let o = ConfigOverrides::from_json_str(r#"{"problem": "harmonic", "t-end": 0.1}"#).unwrap();
        let cfg = ExperimentConfig::from_layers(&[o]).unwrap();
        let path = dir.path().join("sub/run.csv");
        let json = write_outputs(&path, &run(&cfg).unwrap()).unwrap();
        assert!(path.exists());
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(json).unwrap()).unwrap();
        assert_eq!(v["evaluations"], 80);
    }
}
