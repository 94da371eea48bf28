//! Static SVG figures for driver outputs.
//!
//! The charts are intentionally plain: axes with min/max tick labels, one
//! polyline per series, and a legend. Output text depends only on the data,
//! so figures are as reproducible as the CSVs.

use std::fmt::Write as _;

use crate::experiments::config::Driver;
use crate::experiments::output::{Cell, ResultTable};
use crate::experiments::Report;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl LineChart {
    fn transform(&self, (x, y): (f64, f64)) -> Option<(f64, f64)> {
        let tx = if self.log_x { x.log10() } else { x };
        let ty = if self.log_y { y.log10() } else { y };
        (tx.is_finite() && ty.is_finite()).then_some((tx, ty))
    }

    pub fn to_svg(&self) -> String {
        let pts: Vec<(f64, f64)> = self.series.iter().flat_map(|s| s.points.iter().filter_map(|&p| self.transform(p))).collect();
        let (mut x0, mut x1, mut y0, mut y1) = pts.iter().fold(
            (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
            |(a, b, c, d), &(x, y)| (a.min(x), b.max(x), c.min(y), d.max(y)),
        );
        if pts.is_empty() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 == x0 {
            x1 = x0 + 1.0;
        }
        if y1 == y0 {
            y1 = y0 + 1.0;
        }
        let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
        let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
        let label = |v: f64, log: bool| if log { format!("1e{v:.1}") } else { format!("{v:.3}") };

        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#);
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(&self.title));
        let _ = writeln!(
            s,
            r#"<path d="M{m},{m} L{m},{b} L{r},{b}" fill="none" stroke="black"/>"#,
            m = MARGIN,
            b = HEIGHT - MARGIN,
            r = WIDTH - MARGIN
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 15.0, escape(&self.x_label));
        let _ = writeln!(
            s,
            r#"<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        );
        let _ = writeln!(s, r#"<text x="{MARGIN}" y="{}" text-anchor="middle">{}</text>"#, HEIGHT - MARGIN + 16.0, label(x0, self.log_x));
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH - MARGIN, HEIGHT - MARGIN + 16.0, label(x1, self.log_x));
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, MARGIN - 4.0, HEIGHT - MARGIN, label(y0, self.log_y));
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, MARGIN - 4.0, MARGIN + 4.0, label(y1, self.log_y));
        for (i, series) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let path: Vec<String> = series
                .points
                .iter()
                .filter_map(|&p| self.transform(p))
                .map(|(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            if !path.is_empty() {
                let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, path.join(" "));
            }
            let ly = MARGIN + 16.0 * i as f64;
            let _ = writeln!(s, r#"<rect x="{}" y="{}" width="12" height="3" fill="{color}"/>"#, WIDTH - MARGIN - 150.0, ly - 4.0);
            let _ = writeln!(s, r#"<text x="{}" y="{ly}">{}</text>"#, WIDTH - MARGIN - 134.0, escape(&series.name));
        }
        s.push_str("</svg>\n");
        s
    }
}

fn text(c: &Cell) -> String {
    match c {
        Cell::Text(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Groups rows of `table` into series keyed by the listed columns.
fn grouped(table: &ResultTable, keys: &[&str], x: &str, y: &str) -> Vec<Series> {
    let idx: Vec<usize> = keys.iter().filter_map(|k| table.column_index(k)).collect();
    let (Some(xi), Some(yi)) = (table.column_index(x), table.column_index(y)) else {
        return Vec::new();
    };
    let mut out: Vec<Series> = Vec::new();
    for row in &table.rows {
        let name = idx.iter().map(|&i| text(&row[i])).collect::<Vec<_>>().join(" ");
        let point = (row[xi].as_f64().unwrap_or(f64::NAN), row[yi].as_f64().unwrap_or(f64::NAN));
        match out.iter_mut().find(|s| s.name == name) {
            Some(s) => s.points.push(point),
            None => out.push(Series { name, points: vec![point] }),
        }
    }
    out
}

fn chart(title: &str, x_label: &str, y_label: &str, log_x: bool, log_y: bool, series: Vec<Series>) -> LineChart {
    LineChart {
        title: title.into(),
        x_label: x_label.into(),
        y_label: y_label.into(),
        log_x,
        log_y,
        series,
    }
}

/// Figures for a driver report as `(file stem, svg)` pairs.
pub fn figures(driver: Driver, report: &Report) -> Vec<(String, String)> {
    let mut out = Vec::new();
    match driver {
        Driver::Cdf => {
            if let Some(t) = report.table("cdf_curve") {
                let c = chart("Sum-rate CDF", "sum rate [bit/s/Hz]", "CDF", false, false, grouped(t, &["scheme", "r_cell_km"], "rate", "probability"));
                out.push(("cdf".to_string(), c.to_svg()));
            }
        }
        Driver::BoundChain => {
            if let Some(t) = report.table("bound_chain") {
                let series = ["empirical_rate", "submatrix_bound", "equispaced_bound", "cluster_bound", "surrogate_bound"]
                    .iter()
                    .flat_map(|col| {
                        grouped(t, &[], "n", col).into_iter().map(move |mut s| {
                            s.name = col.to_string();
                            s
                        })
                    })
                    .collect();
                out.push(("bound_chain".to_string(), chart("Bound chain", "max load n", "sum rate [bit/s/Hz]", false, true, series).to_svg()));
            }
        }
        Driver::GainMap => {
            if let Some(t) = report.table("gain_map") {
                let c = chart("STAB gain over ZF", "q", "mean gain [bit/s/Hz]", false, false, grouped(t, &["p"], "q", "gain_mean"));
                out.push(("gain_map".to_string(), c.to_svg()));
            }
        }
        Driver::PowerSweep => {
            if let Some(t) = report.table("power_sweep") {
                let c = chart("Average sum rate", "P [dBm]", "sum rate [bit/s/Hz]", false, false, grouped(t, &["scheme"], "tx_power_dbm", "mean_rate"));
                out.push(("power_sweep".to_string(), c.to_svg()));
            }
        }
        Driver::Maxload => {
            if let Some(t) = report.table("maxload") {
                let mut series = grouped(t, &[], "m", "mean_max_load");
                series.extend(grouped(t, &[], "m", "predicted"));
                if series.len() == 2 {
                    series[0].name = "empirical".into();
                    series[1].name = "predicted".into();
                }
                out.push(("maxload".to_string(), chart("Maximum load", "M", "max load", true, true, series).to_svg()));
            }
        }
        Driver::TuneAlpha => {
            if let Some(t) = report.table("alpha_tuning") {
                let c = chart("Threshold tuning", "alpha", "mean sum rate", false, false, grouped(t, &["scheme", "tx_power_dbm"], "alpha", "mean_rate"));
                out.push(("alpha_tuning".to_string(), c.to_svg()));
            }
        }
    }
    out
}
