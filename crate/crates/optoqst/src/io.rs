//! File formats for datasets, results and reports. All writers are
//! deterministic: floats use the shortest round-trip representation, so a
//! rerun with the same seed produces byte-identical files and a read-back
//! recovers the exact values.

use std::fmt::Write as _;
use std::path::Path;

use crate::aonn::{PhaseSample, PhaseSource};
use crate::error::{Error, Result};
use crate::holography::{GswState, SpotTargets};
use crate::qst::{AggregateRow, ExperimentResult, QstDataset};
use crate::quantum::AmplitudeParams;

fn format_error(path: &Path, reason: impl Into<String>) -> Error {
    Error::Format {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

fn parse_f64(path: &Path, line: usize, cell: &str) -> Result<f64> {
    cell.trim()
        .parse::<f64>()
        .map_err(|e| format_error(path, format!("line {line}: {e}")))
}

/// Dataset CSV: header names the Pauli strings then the parameter slots
/// (a1_re, a2_re, a2_im, ...), one record per row.
pub fn write_qst_dataset_csv(dataset: &QstDataset, path: impl AsRef<Path>) -> Result<()> {
    let mut text = String::new();
    let mut header: Vec<String> = dataset
        .pauli_set
        .iter()
        .map(|p| p.to_string())
        .collect();
    header.push("a1_re".into());
    for k in 2..=(dataset.target_dim() + 1) / 2 {
        header.push(format!("a{k}_re"));
        header.push(format!("a{k}_im"));
    }
    text.push_str(&header.join(","));
    text.push('\n');
    for (c, p) in &dataset.records {
        let cells: Vec<String> = c
            .iter()
            .chain(p.values())
            .map(|v| format!("{v}"))
            .collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Reads back the record rows of a dataset CSV given the expected input
/// width; the Pauli set itself travels in the provenance sidecar.
pub fn read_qst_dataset_records(
    path: impl AsRef<Path>,
    input_dim: usize,
) -> Result<Vec<(Vec<f64>, AmplitudeParams)>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| format_error(path, "missing header"))?;
    let width = header.split(',').count();
    if width <= input_dim {
        return Err(format_error(
            path,
            format!("{width} columns cannot hold {input_dim} inputs plus targets"),
        ));
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        let values = line
            .split(',')
            .map(|cell| parse_f64(path, idx + 1, cell))
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != width {
            return Err(format_error(path, format!("ragged row at line {}", idx + 1)));
        }
        let (inputs, targets) = values.split_at(input_dim);
        records.push((inputs.to_vec(), AmplitudeParams::new(targets.to_vec())?));
    }
    Ok(records)
}

/// Per-cell results CSV: n, m, set_seed, mean_fidelity, std_fidelity.
pub fn write_results_csv(results: &[ExperimentResult], path: impl AsRef<Path>) -> Result<()> {
    let mut text = String::from("n,m,set_seed,mean_fidelity,std_fidelity\n");
    for r in results {
        writeln!(
            text,
            "{},{},{},{},{}",
            r.n, r.m, r.set, r.mean_fidelity, r.std_fidelity
        )
        .expect("writing to string");
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Plot-ready aggregation: one row per swept m (and the UDA row), error bar
/// = standard deviation over the sampled sets.
pub fn write_aggregate_csv(rows: &[AggregateRow], path: impl AsRef<Path>) -> Result<()> {
    let mut text = String::from("n,m,kind,mean_fidelity,std_over_sets\n");
    for a in rows {
        writeln!(
            text,
            "{},{},{},{},{}",
            a.n,
            a.m,
            if a.uda { "uda" } else { "random" },
            a.mean_fidelity,
            a.std_over_sets
        )
        .expect("writing to string");
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Loss trace CSV: iteration, mse.
pub fn write_loss_trace_csv(trace: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let mut text = String::from("iteration,mse\n");
    for (i, loss) in trace.iter().enumerate() {
        writeln!(text, "{},{}", i + 1, loss).expect("writing to string");
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Phase dataset CSV: theta, x, y, z, source.
pub fn write_phase_dataset_csv(samples: &[PhaseSample], path: impl AsRef<Path>) -> Result<()> {
    let mut text = String::from("theta,x,y,z,source\n");
    for s in samples {
        writeln!(
            text,
            "{},{},{},{},{}",
            s.theta, s.c[0], s.c[1], s.c[2], s.source
        )
        .expect("writing to string");
    }
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_phase_dataset_csv(path: impl AsRef<Path>) -> Result<Vec<PhaseSample>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let mut samples = Vec::new();
    for (idx, line) in text.lines().enumerate().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 5 {
            return Err(format_error(path, format!("line {}: need 5 columns", idx + 1)));
        }
        let source = match cells[4].trim() {
            "simulated-optics" => PhaseSource::SimulatedOptics,
            "simulated-circuit" => PhaseSource::circuit(),
            other => {
                return Err(format_error(
                    path,
                    format!("line {}: unknown source {other:?}", idx + 1),
                ))
            }
        };
        samples.push(PhaseSample {
            theta: parse_f64(path, idx + 1, cells[0])?,
            c: [
                parse_f64(path, idx + 1, cells[1])?,
                parse_f64(path, idx + 1, cells[2])?,
                parse_f64(path, idx + 1, cells[3])?,
            ],
            source,
        });
    }
    Ok(samples)
}

/// Prediction CSV matching the tomography plots: theta_true, theta_pred, source.
pub fn write_predictions_csv(
    rows: &[(f64, f64, PhaseSource)],
    path: impl AsRef<Path>,
) -> Result<()> {
    let mut text = String::from("theta_true,theta_pred,source\n");
    for (truth, pred, source) in rows {
        writeln!(text, "{truth},{pred},{source}").expect("writing to string");
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Spot report CSV: u, v, i_target, i_measured, ratio.
pub fn write_spot_report_csv(
    targets: &SpotTargets,
    state: &GswState,
    path: impl AsRef<Path>,
) -> Result<()> {
    let mut text = String::from("u,v,i_target,i_measured,ratio\n");
    for (k, &(u, v)) in targets.positions().iter().enumerate() {
        let t = targets.intensities()[k];
        let m = state.achieved[k];
        writeln!(text, "{u},{v},{t},{m},{}", m / t).expect("writing to string");
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Reads hologram targets from CSV rows of (u, v, weight); a header line is
/// allowed and skipped.
pub fn read_spot_targets_csv(path: impl AsRef<Path>) -> Result<SpotTargets> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let mut spots = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if idx == 0 && trimmed.chars().any(|c| c.is_ascii_alphabetic()) {
            continue; // header
        }
        let cells: Vec<&str> = trimmed.split(',').collect();
        if cells.len() != 3 {
            return Err(format_error(
                path,
                format!("line {}: need u,v,weight", idx + 1),
            ));
        }
        let u = cells[0].trim().parse::<usize>().map_err(|e| {
            format_error(path, format!("line {}: {e}", idx + 1))
        })?;
        let v = cells[1].trim().parse::<usize>().map_err(|e| {
            format_error(path, format!("line {}: {e}", idx + 1))
        })?;
        let w = parse_f64(path, idx + 1, cells[2])?;
        spots.push((u, v, w));
    }
    SpotTargets::new(spots)
}

/// Writes a provenance sidecar: the fully resolved configuration as pretty
/// JSON with a trailing newline.
pub fn write_provenance_json(
    value: &impl serde::Serialize,
    path: impl AsRef<Path>,
) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{PauliSet, ShotModel};
    use crate::qst::generate_dataset;

    #[test]
    fn qst_dataset_csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        let set = PauliSet::uda(2).unwrap();
        let ds = generate_dataset(2, &set, 25, 7, ShotModel::Exact).unwrap();
        write_qst_dataset_csv(&ds, &path).unwrap();

        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("IX,IY,IZ,XI,YX,YY,YZ,ZX,ZY,ZZ,a1_re,a2_re,a2_im"));

        let records = read_qst_dataset_records(&path, ds.input_dim()).unwrap();
        assert_eq!(records.len(), ds.len());
        for ((c1, p1), (c2, p2)) in ds.records.iter().zip(&records) {
            assert_eq!(c1, c2);
            assert_eq!(p1.values(), p2.values());
        }
    }

    #[test]
    fn dataset_csv_is_byte_stable() {
        let dir = tempfile::tempdir().unwrap();
        let set = PauliSet::enumerate(1).unwrap();
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        let ds1 = generate_dataset(1, &set, 40, 3, ShotModel::Exact).unwrap();
        let ds2 = generate_dataset(1, &set, 40, 3, ShotModel::Exact).unwrap();
        write_qst_dataset_csv(&ds1, &a).unwrap();
        write_qst_dataset_csv(&ds2, &b).unwrap();
        assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    }

    #[test]
    fn phase_dataset_round_trip() {
        use crate::aonn::{make_phase_dataset, PhaseSource};
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("phase.csv");
        let data = make_phase_dataset(12, 5, PhaseSource::SimulatedOptics).unwrap();
        write_phase_dataset_csv(&data, &path).unwrap();
        let back = read_phase_dataset_csv(&path).unwrap();
        assert_eq!(data, back);
    }

    #[test]
    fn spot_targets_csv_reads_with_and_without_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("targets.csv");
        std::fs::write(&path, "u,v,weight\n10,20,1.0\n30,40,3.0\n").unwrap();
        let targets = read_spot_targets_csv(&path).unwrap();
        assert_eq!(targets.positions(), &[(10, 20), (30, 40)]);
        assert!((targets.intensities()[1] - 0.75).abs() < 1e-15);

        std::fs::write(&path, "10,20,1.0\n").unwrap();
        assert_eq!(read_spot_targets_csv(&path).unwrap().len(), 1);

        std::fs::write(&path, "10,20\n").unwrap();
        assert!(read_spot_targets_csv(&path).is_err());
    }
}
