use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ExperimentReport, SweepPoint};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmitFormat {
    Csv,
    Json,
    Svg,
}

impl std::str::FromStr for EmitFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "csv" => Ok(EmitFormat::Csv),
            "json" => Ok(EmitFormat::Json),
            "svg" => Ok(EmitFormat::Svg),
            other => Err(format!("unknown format '{other}' (expected csv|json|svg)")),
        }
    }
}

/// Write `report` into directory `dir` and return the paths written.
///
/// * csv: `ratios.csv` (`replicate, seed, alg_size, opt_value, cr`) and, when the
///   trajectory comparison ran, `trajectory.csv`
///   (`t, tau, size_over_n, h_tau, y0_over_n..yK_over_n, z0..zK`).
/// * json: `report.json`.
/// * svg: `trajectory_h.svg` and one `trajectory_k{k}.svg` per level, plus `cr.svg`
///   when ratios exist.
pub fn emit(report: &ExperimentReport, format: EmitFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    match format {
        EmitFormat::Csv => {
            let p = dir.join("ratios.csv");
            fs::write(&p, ratios_csv(report)?)?;
            out.push(p);
            if let Some(t) = &report.trajectory {
                let p = dir.join("trajectory.csv");
                fs::write(&p, trajectory_csv(&t.rows)?)?;
                out.push(p);
            }
        }
        EmitFormat::Json => {
            let p = dir.join("report.json");
            fs::write(&p, report.to_json()?)?;
            out.push(p);
        }
        EmitFormat::Svg => {
            if let Some(t) = &report.trajectory {
                let size: Vec<_> = t.rows.iter().map(|r| (r.tau, r.size_over_n)).collect();
                let h: Vec<_> = t.rows.iter().map(|r| (r.tau, r.h_tau)).collect();
                let p = dir.join("trajectory_h.svg");
                fs::write(
                    &p,
                    svg_line_chart(
                        "matching size",
                        "tau = t/n",
                        "size / n",
                        &[Series::new("ALG/n", size), Series::new("h(tau)", h).dashed()],
                    ),
                )?;
                out.push(p);
                let levels = t.rows.first().map_or(0, |r| r.z.len());
                for k in 0..levels {
                    let y: Vec<_> = t.rows.iter().map(|r| (r.tau, r.y_over_n[k])).collect();
                    let z: Vec<_> = t.rows.iter().map(|r| (r.tau, r.z[k])).collect();
                    let p = dir.join(format!("trajectory_k{k}.svg"));
                    fs::write(
                        &p,
                        svg_line_chart(
                            &format!("budget level {k}"),
                            "tau = t/n",
                            "fraction of nodes",
                            &[
                                Series::new(&format!("Y{k}/n"), y),
                                Series::new(&format!("z{k}"), z).dashed(),
                            ],
                        ),
                    )?;
                    out.push(p);
                }
            }
            let crs: Vec<_> = report
                .replicates
                .iter()
                .filter_map(|r| r.cr.map(|c| (r.replicate as f64, c)))
                .collect();
            if !crs.is_empty() {
                let p = dir.join("cr.svg");
                fs::write(
                    &p,
                    svg_line_chart("ratio per replicate", "replicate", "ALG/OPT", &[Series::new("cr", crs)]),
                )?;
                out.push(p);
            }
        }
    }
    Ok(out)
}

/// `sweep.csv` (`T, ratio_of_means, cr_mean, cr_ci_low, cr_ci_high`) and `cr_vs_T.svg`.
pub fn emit_sweep(points: &[SweepPoint], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["T", "ratio_of_means", "cr_mean", "cr_ci_low", "cr_ci_high"])?;
    for p in points {
        let c = p.cr.as_ref();
        w.write_record([
            p.horizon.to_string(),
            opt_cell(p.ratio_of_means),
            opt_cell(c.map(|c| c.mean)),
            opt_cell(c.map(|c| c.ci_low)),
            opt_cell(c.map(|c| c.ci_high)),
        ])?;
    }
    let csv_path = dir.join("sweep.csv");
    fs::write(&csv_path, w.into_inner().map_err(|e| e.into_error())?)?;
    let pts: Vec<_> = points
        .iter()
        .filter_map(|p| p.ratio_of_means.map(|r| ((p.horizon as f64).log10(), r)))
        .collect();
    let svg_path = dir.join("cr_vs_T.svg");
    fs::write(
        &svg_path,
        svg_line_chart("ratio vs horizon", "log10 T", "E[ALG]/E[OPT]", &[Series::new("cr", pts)]),
    )?;
    Ok(vec![csv_path, svg_path])
}

fn opt_cell(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn ratios_csv(report: &ExperimentReport) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["replicate", "seed", "alg_size", "opt_value", "cr"])?;
    for r in &report.replicates {
        w.write_record([
            r.replicate.to_string(),
            r.seed.to_string(),
            r.alg_size.to_string(),
            opt_cell(r.opt_value),
            opt_cell(r.cr),
        ])?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

fn trajectory_csv(rows: &[super::TrajectoryRow]) -> Result<Vec<u8>> {
    let levels = rows.first().map_or(0, |r| r.z.len());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut head: Vec<String> = ["t", "tau", "size_over_n", "h_tau"].map(String::from).to_vec();
    head.extend((0..levels).map(|k| format!("y{k}_over_n")));
    head.extend((0..levels).map(|k| format!("z{k}")));
    w.write_record(&head)?;
    for r in rows {
        let mut rec = vec![
            r.t.to_string(),
            r.tau.to_string(),
            r.size_over_n.to_string(),
            r.h_tau.to_string(),
        ];
        rec.extend(r.y_over_n.iter().map(f64::to_string));
        rec.extend(r.z.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

#[derive(Clone, Debug)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

impl Series {
    pub fn new(name: &str, points: Vec<(f64, f64)>) -> Self {
        Self {
            name: name.into(),
            points,
            dashed: false,
        }
    }

    pub fn dashed(mut self) -> Self {
        self.dashed = true;
        self
    }
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Minimal fixed-size SVG line chart. Output depends only on the inputs.
pub fn svg_line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (w, h, l, r, t, b) = (640.0, 400.0, 60.0, 20.0, 30.0, 45.0);
    let pts = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts.filter(|p| p.0.is_finite() && p.1.is_finite()) {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x0 > x1 {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-12 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-12 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let sx = |x: f64| l + (x - x0) / (x1 - x0) * (w - l - r);
    let sy = |y: f64| h - b - (y - y0) / (y1 - y0) * (h - t - b);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="18" text-anchor="middle">{}</text>"#, w / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<path d="M{l} {t} V{} H{}" fill="none" stroke="black"/>"#,
        h - b,
        w - r
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#,
            sx(xv),
            h - b + 15.0,
            fmt_tick(xv)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#,
            l - 4.0,
            sy(yv) + 4.0,
            fmt_tick(yv)
        );
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, w / 2.0, h - 8.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        h / 2.0,
        h / 2.0,
        escape(y_label)
    );
    for (i, se) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut d = String::new();
        for (j, &(x, y)) in se.points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()).enumerate() {
            let _ = write!(d, "{}{:.2} {:.2}", if j == 0 { "M" } else { " L" }, sx(x), sy(y));
        }
        let dash = if se.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(s, r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#);
        let ly = t + 14.0 + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly}" fill="{color}">{}</text>"#,
            w - r - 110.0,
            escape(&se.name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn fmt_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-3) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}
