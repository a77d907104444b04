//! CSV emission and a small built-in SVG line plot.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{mean_std, Algorithm, PowerRow, ResultRow, ResultTable};
use crate::error::{Error, Result};

/// Files written by [`emit_report`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub csv: PathBuf,
    pub svg: PathBuf,
    /// Raw and seed-averaged per-frame power, present when learners ran.
    pub power_csv: Option<PathBuf>,
    pub power_mean_csv: Option<PathBuf>,
    pub power_svg: Option<PathBuf>,
}

/// Writes `<name>.csv` and `<name>.svg` (plus power files for learners) into `dir`.
pub fn emit_report(table: &ResultTable, dir: impl AsRef<Path>) -> Result<Report> {
    if table.rows.is_empty() {
        return Err(Error::Experiment("result table has no rows".into()));
    }
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let csv = dir.join(format!("{}.csv", table.name));
    write_results_csv(&table.rows, &csv)?;
    let svg = dir.join(format!("{}.svg", table.name));
    let series = nsd_series(&table.rows);
    write_text(
        &svg,
        &render_svg(&table.name, table.axis.label(), "NSD", &series),
    )?;

    let mut report = Report {
        csv,
        svg,
        power_csv: None,
        power_mean_csv: None,
        power_svg: None,
    };
    if !table.power.is_empty() {
        let raw = dir.join(format!("{}_power.csv", table.name));
        write_rows(&table.power, &raw)?;
        let means = power_means(&table.power);
        let mean_path = dir.join(format!("{}_power_mean.csv", table.name));
        write_rows(&means, &mean_path)?;
        let power_svg = dir.join(format!("{}_power.svg", table.name));
        let series = power_series(&table.power);
        let title = format!("{} power", table.name);
        write_text(
            &power_svg,
            &render_svg(&title, "frame", "mean power (W)", &series),
        )?;
        report.power_csv = Some(raw);
        report.power_mean_csv = Some(mean_path);
        report.power_svg = Some(power_svg);
    }
    Ok(report)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_rows<T: serde::Serialize>(rows: &[T], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Columns: axis_value, algorithm, seed, nsd, runtime_ms.
pub fn write_results_csv(rows: &[ResultRow], path: impl AsRef<Path>) -> Result<()> {
    write_rows(rows, path.as_ref())
}

pub fn load_results_csv(path: impl AsRef<Path>) -> Result<Vec<ResultRow>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let rows = r.deserialize().collect::<Result<Vec<ResultRow>, _>>()?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
struct PowerMean {
    axis_value: f64,
    algorithm: Algorithm,
    frame: usize,
    mean_pc: f64,
    std_pc: f64,
}

fn power_means(rows: &[PowerRow]) -> Vec<PowerMean> {
    let mut groups: BTreeMap<(u64, Algorithm, usize), (f64, Vec<f64>)> = BTreeMap::new();
    for r in rows {
        groups
            .entry((ordered(r.axis_value), r.algorithm, r.frame))
            .or_insert_with(|| (r.axis_value, Vec::new()))
            .1
            .push(r.mean_pc);
    }
    groups
        .into_iter()
        .filter_map(|((_, algorithm, frame), (axis_value, v))| {
            let (mean_pc, std_pc) = mean_std(&v)?;
            Some(PowerMean {
                axis_value,
                algorithm,
                frame,
                mean_pc,
                std_pc,
            })
        })
        .collect()
}

/// Key that sorts like the float for finite values.
fn ordered(x: f64) -> u64 {
    let bits = x.to_bits();
    if bits >> 63 == 1 {
        !bits
    } else {
        bits | 1 << 63
    }
}

/// One plotted line: label and (x, mean, std) points sorted by x.
pub type Series = (String, Vec<(f64, f64, f64)>);

/// Mean and standard deviation of NSD per algorithm and axis value.
pub fn nsd_series(rows: &[ResultRow]) -> Vec<Series> {
    let mut groups: BTreeMap<Algorithm, Points> = BTreeMap::new();
    for r in rows {
        groups
            .entry(r.algorithm)
            .or_default()
            .entry(ordered(r.axis_value))
            .or_insert_with(|| (r.axis_value, Vec::new()))
            .1
            .push(r.nsd);
    }
    collect_series(groups.into_iter().map(|(a, g)| (a.to_string(), g)))
}

/// Samples keyed by the sort key of their x value.
type Points = BTreeMap<u64, (f64, Vec<f64>)>;

fn power_series(rows: &[PowerRow]) -> Vec<Series> {
    let mut groups: BTreeMap<(u64, Algorithm), (f64, Points)> = BTreeMap::new();
    for r in rows {
        let frame = r.frame as f64 + 1.0;
        groups
            .entry((ordered(r.axis_value), r.algorithm))
            .or_insert_with(|| (r.axis_value, BTreeMap::new()))
            .1
            .entry(ordered(frame))
            .or_insert_with(|| (frame, Vec::new()))
            .1
            .push(r.mean_pc);
    }
    let many = groups
        .keys()
        .map(|k| k.0)
        .collect::<std::collections::BTreeSet<_>>()
        .len()
        > 1;
    collect_series(groups.into_iter().map(|((_, a), (v, g))| {
        let label = if many {
            format!("{a} @ {v}")
        } else {
            a.to_string()
        };
        (label, g)
    }))
}

fn collect_series(groups: impl Iterator<Item = (String, Points)>) -> Vec<Series> {
    groups
        .map(|(label, points)| {
            let pts = points
                .into_values()
                .filter_map(|(x, v)| mean_std(&v).map(|(m, s)| (x, m, s)))
                .collect();
            (label, pts)
        })
        .collect()
}

const PALETTE: [&str; 9] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#17becf",
];

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Smallest 1, 2 or 5 times a power of ten that is at least `raw`.
fn nice_step(raw: f64) -> f64 {
    let base = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|f| f * base)
        .find(|&s| s >= raw * (1.0 - 1e-12))
        .unwrap_or(10.0 * base)
}

/// Line plot of mean values with a shaded band of one standard deviation.
pub fn render_svg(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let points = series.iter().flat_map(|s| s.1.iter());
    let (mut x0, mut x1, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for &(x, m, s) in points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y1 = y1.max(m + s);
    }
    if !x0.is_finite() {
        (x0, x1) = (0.0, 1.0);
    }
    if x1 - x0 <= 0.0 {
        (x0, x1) = (x0 - 1.0, x1 + 1.0);
    }
    let y_step = nice_step(if y1 > 0.0 { y1 } else { 1.0 } / 5.0);
    let y_ticks = (y1 / y_step).ceil().max(1.0) as usize;
    let y1 = y_ticks as f64 * y_step;
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| TOP + plot_h - y.max(0.0) / y1 * plot_h;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        out,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + plot_w / 2.0,
        escape(title)
    );
    let _ = writeln!(
        out,
        r#"<path d="M{LEFT:.2},{TOP:.2} V{:.2} H{:.2}" fill="none" stroke="black"/>"#,
        TOP + plot_h,
        LEFT + plot_w
    );
    for i in 0..=5 {
        let xv = x0 + i as f64 / 5.0 * (x1 - x0);
        let px = sx(xv);
        let _ = writeln!(
            out,
            r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + plot_h,
            TOP + plot_h + 5.0,
            TOP + plot_h + 19.0,
            tick_label(xv)
        );
    }
    for i in 0..=y_ticks {
        let yv = i as f64 * y_step;
        let py = sy(yv);
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{LEFT:.2}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            py + 4.0,
            tick_label(yv)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        escape(y_label)
    );

    for (idx, (label, pts)) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        if pts.is_empty() {
            continue;
        }
        let mut band = String::new();
        for &(x, m, s) in pts {
            let _ = write!(band, "{:.2},{:.2} ", sx(x), sy(m + s));
        }
        for &(x, m, s) in pts.iter().rev() {
            let _ = write!(band, "{:.2},{:.2} ", sx(x), sy(m - s));
        }
        let _ = writeln!(
            out,
            r#"<polygon points="{}" fill="{color}" fill-opacity="0.15" stroke="none"/>"#,
            band.trim_end()
        );
        let line: Vec<String> = pts
            .iter()
            .map(|&(x, m, _)| format!("{:.2},{:.2}", sx(x), sy(m)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            line.join(" ")
        );
        for &(x, m, _) in pts {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                sx(x),
                sy(m)
            );
        }
        let ly = TOP + 10.0 + idx as f64 * 18.0;
        let lx = LEFT + plot_w + 15.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(label)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::super::SweepAxis;
    use super::*;

    fn table() -> ResultTable {
        let mut rows = Vec::new();
        for (i, a) in [Algorithm::Bms, Algorithm::Opt].into_iter().enumerate() {
            for v in [10.0, 20.0] {
                for s in 0..3u64 {
                    rows.push(ResultRow {
                        axis_value: v,
                        algorithm: a,
                        seed: s,
                        nsd: v * 0.7 + i as f64 + s as f64 / 3.0,
                        runtime_ms: 0.1 * s as f64,
                    });
                }
            }
        }
        ResultTable {
            name: "fig".into(),
            axis: SweepAxis::Devices,
            rows,
            power: vec![
                PowerRow {
                    axis_value: 10.0,
                    algorithm: Algorithm::Pl,
                    seed: 0,
                    frame: 0,
                    mean_pc: 0.5,
                },
                PowerRow {
                    axis_value: 10.0,
                    algorithm: Algorithm::Pl,
                    seed: 1,
                    frame: 0,
                    mean_pc: 0.25,
                },
            ],
            errors: Vec::new(),
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let t = table();
        let r = emit_report(&t, dir.path()).unwrap();
        assert_eq!(load_results_csv(&r.csv).unwrap(), t.rows);
        let header = std::fs::read_to_string(&r.csv).unwrap();
        assert!(header.starts_with("axis_value,algorithm,seed,nsd,runtime_ms\n"));
        let means = std::fs::read_to_string(r.power_mean_csv.unwrap()).unwrap();
        assert!(means.contains("10.0,pl,0,0.375,0.125"));
    }

    #[test]
    fn awkward_floats_survive() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        let rows = vec![ResultRow {
            axis_value: 0.1 + 0.2,
            algorithm: Algorithm::Ql,
            seed: u64::MAX,
            nsd: 1.0 / 3.0,
            runtime_ms: 1e-300,
        }];
        write_results_csv(&rows, &path).unwrap();
        assert_eq!(load_results_csv(&path).unwrap(), rows);
    }

    #[test]
    fn empty_table_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = table();
        t.rows.clear();
        assert!(emit_report(&t, dir.path().join("out")).is_err());
        assert!(!dir.path().join("out").exists());
    }

    #[test]
    fn svg_has_one_line_per_algorithm() {
        let t = table();
        let svg = render_svg("t", "m", "NSD", &nsd_series(&t.rows));
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("<polygon").count(), 2);
        assert!(svg.contains(">bms</text>"));
    }

    #[test]
    fn series_statistics() {
        let s = nsd_series(&table().rows);
        assert_eq!(s[0].0, "bms");
        let (x, m, sd) = s[0].1[0];
        assert_eq!(x, 10.0);
        assert!((m - (7.0 + 1.0 / 3.0)).abs() < 1e-12);
        assert!((sd - (2.0f64 / 27.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn nice_steps() {
        assert_eq!(nice_step(4.255), 5.0);
        assert_eq!(nice_step(0.013), 0.02);
        assert_eq!(nice_step(1.0), 1.0);
        assert_eq!(nice_step(120.0), 200.0);
    }

    #[test]
    fn ordered_key_sorts_like_floats() {
        let v = [-3.5, -0.0, 0.0, 1e-9, 2.0, 1e300];
        for w in v.windows(2) {
            assert!(ordered(w[0]) <= ordered(w[1]));
        }
    }
}
