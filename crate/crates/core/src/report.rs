//! Rendering of evaluation reports: a TOML document with the full result,
//! CSV time series, and CSV population grids. All numbers carry units in
//! the column headers or key names.

use crate::error::{Error, Result};
use crate::status::{CellState, EvaluationReport, MetGrid, ReductionGrid};

/// Full report as a TOML document.
pub fn report_toml(report: &EvaluationReport) -> Result<String> {
    toml::to_string(report).map_err(|e| Error::Scenario(format!("cannot serialize report: {e}")))
}

/// Strength time series of every analyzed joint:
/// `time_s,joint,F_cem_Nm,normalized_strength,phase_index`.
pub fn timeseries_csv(report: &EvaluationReport) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record([
            "time_s",
            "joint",
            "F_cem_Nm",
            "normalized_strength",
            "phase_index",
        ])
        .map_err(csv_err)?;
    for joint in &report.joints {
        for sample in &joint.series {
            writer
                .write_record([
                    format!("{}", sample.t_s),
                    joint.label.clone(),
                    format!("{:.6}", sample.f_cem_nm),
                    format!("{:.6}", sample.normalized),
                    format!("{}", sample.phase_index),
                ])
                .map_err(csv_err)?;
        }
    }
    finish(writer)
}

fn offset_label(offset: f64) -> String {
    if offset == 0.0 {
        "m".to_string()
    } else if offset == 1.0 {
        "m+sigma_m".to_string()
    } else if offset == -1.0 {
        "m-sigma_m".to_string()
    } else if offset > 0.0 {
        format!("m+{offset}sigma_m")
    } else {
        format!("m-{}sigma_m", -offset)
    }
}

fn z_label(z: f64) -> String {
    if z == 0.0 {
        "S".to_string()
    } else if z == 1.0 {
        "S+sigma".to_string()
    } else if z == -1.0 {
        "S-sigma".to_string()
    } else if z > 0.0 {
        format!("S+{z}sigma")
    } else {
        format!("S-{}sigma", -z)
    }
}

/// Endurance grid as CSV, rows = resistance selectors, columns = strength
/// percentiles. Cells in seconds; `overload` / `undefined` where endurance
/// does not exist.
pub fn met_grid_csv(grid: &MetGrid) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["met_s".to_string()];
    header.extend(grid.z_grid.iter().map(|&z| z_label(z)));
    writer.write_record(&header).map_err(csv_err)?;
    for (row_idx, row) in grid.cells.iter().enumerate() {
        let mut record = vec![offset_label(grid.resistance_offsets[row_idx])];
        for cell in row {
            record.push(match cell.state {
                CellState::Overloaded => "overload".to_string(),
                CellState::UndefinedResistance => "undefined".to_string(),
                CellState::NoLoad => "unlimited".to_string(),
                _ => format!("{:.2}", cell.met_s.unwrap_or(f64::NAN)),
            });
        }
        writer.write_record(&record).map_err(csv_err)?;
    }
    finish(writer)
}

/// Reduction grid as CSV, cells in percent; `-` marks cells that cannot
/// sustain the load for the grid duration.
pub fn reduction_grid_csv(grid: &ReductionGrid) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec![format!("reduction_pct_at_{}s", grid.at_s)];
    header.extend(grid.z_grid.iter().map(|&z| z_label(z)));
    writer.write_record(&header).map_err(csv_err)?;
    for (row_idx, row) in grid.cells.iter().enumerate() {
        let mut record = vec![offset_label(grid.resistance_offsets[row_idx])];
        for cell in row {
            record.push(match cell.state {
                CellState::Ok => format!("{:.1}", cell.reduction.unwrap_or(f64::NAN) * 100.0),
                CellState::NoLoad => "0.0".to_string(),
                CellState::Overloaded => "overload".to_string(),
                CellState::UndefinedResistance => "undefined".to_string(),
                CellState::NotSustained => "-".to_string(),
            });
        }
        writer.write_record(&record).map_err(csv_err)?;
    }
    finish(writer)
}

/// Human-readable summary.
pub fn summary_text(report: &EvaluationReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "scenario duration: {} s\n",
        report.total_duration_s
    ));
    out.push_str(&format!(
        "root reaction force: [{:.3}, {:.3}, {:.3}] N\n",
        report.root_reaction_n[0], report.root_reaction_n[1], report.root_reaction_n[2]
    ));
    if let Some(limiting) = &report.limiting_joint {
        out.push_str(&format!("limiting joint: {limiting}\n"));
    }
    for warning in &report.warnings {
        out.push_str(&format!("warning: {warning}\n"));
    }
    for joint in &report.joints {
        out.push_str(&format!("\n[{}]\n", joint.label));
        out.push_str(&format!("  moment: {:.4} N*m\n", joint.moment_nm));
        out.push_str(&format!(
            "  capacity: {:.3} N*m mean, {:.3} N*m at subject percentile\n",
            joint.mean_strength_nm, joint.subject_strength_nm
        ));
        out.push_str(&format!("  relative load f_MVC: {:.4}\n", joint.f_mvc));
        match joint.met_s {
            Some(met) => out.push_str(&format!(
                "  maximum endurance time: {met:.1} s ({:.3} min)\n",
                met / 60.0
            )),
            None if joint.overloaded => out.push_str("  immediate overload (f_MVC > 1)\n"),
            None => out.push_str("  no load; capacity does not decay\n"),
        }
        let delta = report.status_delta_nm.get(&joint.label).copied();
        if let Some(delta) = delta {
            out.push_str(&format!("  strength change over scenario: {delta:.3} N*m\n"));
        }
    }
    out
}

fn csv_err(e: csv::Error) -> Error {
    Error::Scenario(format!("csv rendering failed: {e}"))
}

fn finish(writer: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Scenario(format!("csv rendering failed: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Scenario(format!("csv not utf-8: {e}")))
}
