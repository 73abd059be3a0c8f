//! CSV time series, SVG plots and the small tabular reports.
//!
//! Plots are rendered from CSV rows only, with a fixed layout and fixed
//! number formatting, so identical input gives byte-identical SVG.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::circuit::RecordRow;
use crate::filter::{f_hat, f_time, quadrature_grid, FilterParams};
use crate::jump::{energy_basis_entries, exact_jump, ground_residual, quadrature_jump};
use crate::linalg::operator_norm;
use crate::models::Problem;
use crate::{Error, Result};

pub const CSV_COLUMNS: [&str; 8] =
    ["step", "time", "h_time", "a_gates", "energy_mean", "energy_se", "overlap_mean", "overlap_se"];

fn csv_err(e: csv::Error) -> Error {
    Error::Csv(e.to_string())
}

pub fn rows_to_csv(rows: &[RecordRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Csv(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Csv(e.to_string()))
}

/// Parses a time series; every documented column must be present and there
/// must be at least one row.
pub fn csv_to_rows(text: &str) -> Result<Vec<RecordRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers().map_err(csv_err)?.clone();
    let missing: Vec<&str> = CSV_COLUMNS.iter().copied().filter(|c| !headers.iter().any(|h| h == *c)).collect();
    if !missing.is_empty() {
        return Err(Error::Csv(format!("missing columns: {}", missing.join(", "))));
    }
    let rows = r.deserialize().collect::<std::result::Result<Vec<RecordRow>, _>>().map_err(csv_err)?;
    if rows.is_empty() {
        return Err(Error::Csv("no data rows".into()));
    }
    Ok(rows)
}

pub fn read_csv(path: &Path) -> Result<Vec<RecordRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Csv(format!("cannot read {}: {e}", path.display())))?;
    csv_to_rows(&text)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    EnergyTime,
    OverlapTime,
    EnergyHtime,
    OverlapHtime,
}

impl PlotKind {
    pub const ALL: [PlotKind; 4] = [PlotKind::EnergyTime, PlotKind::OverlapTime, PlotKind::EnergyHtime, PlotKind::OverlapHtime];

    pub fn name(self) -> &'static str {
        match self {
            PlotKind::EnergyTime => "energy-time",
            PlotKind::OverlapTime => "overlap-time",
            PlotKind::EnergyHtime => "energy-htime",
            PlotKind::OverlapHtime => "overlap-htime",
        }
    }

    fn x(self, r: &RecordRow) -> f64 {
        match self {
            PlotKind::EnergyTime | PlotKind::OverlapTime => r.time,
            _ => r.h_time,
        }
    }

    fn y(self, r: &RecordRow) -> (f64, f64) {
        match self {
            PlotKind::EnergyTime | PlotKind::EnergyHtime => (r.energy_mean, r.energy_se),
            _ => (r.overlap_mean, r.overlap_se),
        }
    }

    fn labels(self) -> (&'static str, &'static str) {
        let x = match self {
            PlotKind::EnergyTime | PlotKind::OverlapTime => "Lindblad simulation time",
            _ => "Hamiltonian simulation time",
        };
        let y = match self {
            PlotKind::EnergyTime | PlotKind::EnergyHtime => "energy",
            _ => "ground-state overlap",
        };
        (x, y)
    }
}

impl FromStr for PlotKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        PlotKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown plot kind '{s}' (expected energy-time, overlap-time, energy-htime or overlap-htime)")))
    }
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 55.0;

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * lo.abs().max(1.0) {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Mean curves with shaded `+-1 SE` bands for one or more labelled series
/// on a shared canvas.
pub fn plot_svg(series: &[(String, Vec<RecordRow>)], kind: PlotKind) -> String {
    let all = || series.iter().flat_map(|(_, rows)| rows.iter());
    let (x0, x1) = range(all().map(|r| kind.x(r)));
    let (y0, y1) = range(all().flat_map(|r| {
        let (m, se) = kind.y(r);
        [m - se, m + se]
    }));
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * (W - LEFT - RIGHT);
    let py = |y: f64| H - BOTTOM - (y - y0) / (y1 - y0) * (H - TOP - BOTTOM);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - LEFT - RIGHT,
        H - TOP - BOTTOM
    );
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        let (gx, gy) = (px(fx), py(fy));
        let _ = writeln!(s, r##"<line x1="{gx:.2}" y1="{:.2}" x2="{gx:.2}" y2="{:.2}" stroke="#999"/>"##, H - BOTTOM, H - BOTTOM + 5.0);
        let _ = writeln!(s, r#"<text x="{gx:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, H - BOTTOM + 18.0, tick(fx));
        let _ = writeln!(s, r##"<line x1="{:.2}" y1="{gy:.2}" x2="{LEFT}" y2="{gy:.2}" stroke="#999"/>"##, LEFT - 5.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 8.0, gy + 4.0, tick(fy));
    }
    let (xl, yl) = kind.labels();
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{xl}</text>"#, LEFT + (W - LEFT - RIGHT) / 2.0, H - 12.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{0:.2}" text-anchor="middle" transform="rotate(-90 16 {0:.2})">{yl}</text>"#,
        TOP + (H - TOP - BOTTOM) / 2.0
    );
    for (idx, (label, rows)) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let upper = rows.iter().map(|r| (px(kind.x(r)), py(kind.y(r).0 + kind.y(r).1)));
        let lower = rows.iter().rev().map(|r| (px(kind.x(r)), py(kind.y(r).0 - kind.y(r).1)));
        let band: Vec<String> = upper.chain(lower).map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(s, r#"<polygon points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#, band.join(" "));
        let line: Vec<String> = rows.iter().map(|r| format!("{:.2},{:.2}", px(kind.x(r)), py(kind.y(r).0))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, line.join(" "));
        let ly = TOP + 16.0 + 16.0 * idx as f64;
        let _ = writeln!(s, r#"<line x1="{0:.2}" y1="{ly:.2}" x2="{1:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#, W - RIGHT - 150.0, W - RIGHT - 130.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, W - RIGHT - 125.0, ly + 4.0, escape(label));
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

/// `(omega, f_hat)` on `points` frequencies spanning the passband and some
/// positive frequencies, and `(s, Re f, Im f)` on the quadrature grid.
pub fn filter_tables(p: &FilterParams, points: usize) -> Result<(String, String)> {
    let points = points.max(2);
    let lo = -(p.a() + 6.0 * p.delta_a());
    let hi = p.b() + 6.0 * p.delta_b();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["omega", "f_hat"]).map_err(csv_err)?;
    for k in 0..points {
        let omega = lo + (hi - lo) * k as f64 / (points - 1) as f64;
        w.write_record([omega.to_string(), f_hat(omega, p).to_string()]).map_err(csv_err)?;
    }
    let freq = String::from_utf8(w.into_inner().map_err(|e| Error::Csv(e.to_string()))?).map_err(|e| Error::Csv(e.to_string()))?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["s", "re_f", "im_f"]).map_err(csv_err)?;
    for &s in &quadrature_grid(p).nodes {
        let f = f_time(s, p);
        w.write_record([s.to_string(), f.re.to_string(), f.im.to_string()]).map_err(csv_err)?;
    }
    let time = String::from_utf8(w.into_inner().map_err(|e| Error::Csv(e.to_string()))?).map_err(|e| Error::Csv(e.to_string()))?;
    Ok((freq, time))
}

/// `|K|`, `|K psi_0|`, `|K - K_s|` and the energy-basis entries of `K` above
/// `threshold`, as rows `quantity,i,j,value`.
pub fn jump_report(problem: &Problem, p: &FilterParams, threshold: f64) -> Result<String> {
    let k = exact_jump(&problem.spectrum, &problem.coupling, p)?;
    let ks = quadrature_jump(&problem.spectrum, &problem.coupling, p)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["quantity", "i", "j", "value"]).map_err(csv_err)?;
    let scalar = |w: &mut csv::Writer<Vec<u8>>, name: &str, v: f64| w.write_record([name, "", "", &v.to_string()]).map_err(csv_err);
    scalar(&mut w, "norm_k", operator_norm(k.matrix())?)?;
    scalar(&mut w, "norm_a", operator_norm(problem.coupling.matrix())?)?;
    scalar(&mut w, "ground_residual", ground_residual(&k, &problem.spectrum))?;
    scalar(&mut w, "quadrature_error", operator_norm(&(k.matrix() - ks.matrix()))?)?;
    for (i, j, v) in energy_basis_entries(&k, &problem.spectrum, threshold) {
        w.write_record(["entry".to_string(), i.to_string(), j.to_string(), v.norm().to_string()]).map_err(csv_err)?;
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::Csv(e.to_string()))?).map_err(|e| Error::Csv(e.to_string()))
}
