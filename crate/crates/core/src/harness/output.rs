use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use plotters::prelude::*;
use serde::{Deserialize, Serialize};

use super::sweep::{SweepRow, SweepSpec, SweepTable};
use super::trial::EstimatorKind;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Everything needed to replay a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub spec: SweepSpec,
    pub version: String,
    pub timestamp_unix: u64,
    pub format: OutputFormat,
    pub failed_trials: usize,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }
}

/// `<out>.manifest.json` next to the results file.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out
        .file_name()
        .map(|s| s.to_os_string())
        .unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn write_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(file);
    writer
        .write_record([
            "axisValue",
            "estimator",
            "meanNmseDb",
            "stderr",
            "muPhi",
            "supportHitRate",
            "trials",
            "seed",
        ])
        .map_err(|e| Error::Format(e.to_string()))?;
    for row in rows {
        writer
            .serialize(row)
            .map_err(|e| Error::Format(e.to_string()))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

/// Parse a results CSV written by [`emit_results`].
pub fn read_csv(path: &Path) -> Result<Vec<SweepRow>> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    reader
        .deserialize()
        .map(|r| r.map_err(|e| Error::Format(e.to_string())))
        .collect()
}

/// Write the table in `format` to `path`, plus the run manifest and an
/// optional SVG plot.
pub fn emit_results(
    table: &SweepTable,
    spec: &SweepSpec,
    format: OutputFormat,
    path: &Path,
    plot: Option<&Path>,
) -> Result<()> {
    match format {
        OutputFormat::Csv => write_csv(&table.rows, path)?,
        OutputFormat::Json => {
            let text = serde_json::to_string_pretty(&table.rows)
                .map_err(|e| Error::Format(e.to_string()))?;
            std::fs::write(path, text).map_err(|e| Error::io(path, e))?;
        }
    }
    let manifest = RunManifest {
        spec: spec.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        format,
        failed_trials: table.failures.len(),
    };
    let mpath = manifest_path(path);
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Format(e.to_string()))?;
    std::fs::write(&mpath, text).map_err(|e| Error::io(&mpath, e))?;
    if let Some(p) = plot {
        write_plot(table, p)?;
    }
    Ok(())
}

/// Line chart of mean NMSE against the sweep axis, one series per estimator.
pub fn write_plot(table: &SweepTable, path: &Path) -> Result<()> {
    let plot_err =
        |e: &dyn std::fmt::Display| Error::Format(format!("plot {}: {e}", path.display()));
    let points: Vec<(f64, f64)> = table
        .rows
        .iter()
        .filter_map(|r| r.mean_nmse_db.map(|m| (r.axis_value, m)))
        .collect();
    if points.is_empty() {
        return Err(Error::Format("nothing to plot".into()));
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for (x, y) in &points {
        x0 = x0.min(*x);
        x1 = x1.max(*x);
        y0 = y0.min(*y);
        y1 = y1.max(*y);
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    let pad = ((y1 - y0) * 0.1).max(1.0);

    let root = SVGBackend::new(path, (800, 500)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| plot_err(&e))?;
    let mut chart = ChartBuilder::on(&root)
        .margin(20)
        .x_label_area_size(40)
        .y_label_area_size(50)
        .build_cartesian_2d(x0..x1, (y0 - pad)..(y1 + pad))
        .map_err(|e| plot_err(&e))?;
    chart
        .configure_mesh()
        .x_desc(table.axis.label())
        .y_desc("NMSE (dB)")
        .draw()
        .map_err(|e| plot_err(&e))?;
    for (i, kind) in EstimatorKind::ALL.into_iter().enumerate() {
        let series: Vec<(f64, f64)> = table
            .series(kind)
            .into_iter()
            .filter_map(|(x, y)| y.map(|y| (x, y)))
            .collect();
        if series.is_empty() {
            continue;
        }
        let color = Palette99::pick(i).to_rgba();
        chart
            .draw_series(LineSeries::new(series, color.stroke_width(2)))
            .map_err(|e| plot_err(&e))?
            .label(kind.label())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(|e| plot_err(&e))?;
    root.present().map_err(|e| plot_err(&e))
}
