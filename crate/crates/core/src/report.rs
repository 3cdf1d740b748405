//! CSV output of convergence tables and SVG log-log plots.
//!
//! CSV schema (LF line endings, floats with 17 significant digits):
//!
//! ```text
//! problem,method,p,h,samples,error,stderr,seed
//! ```
//!
//! `stderr` is the standard error `sample_std / sqrt(samples)` of the
//! estimate.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::{fit_loglog, ConvergenceTable};

pub const CSV_HEADER: [&str; 8] = ["problem", "method", "p", "h", "samples", "error", "stderr", "seed"];

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes the table as CSV to any sink.
pub fn write_csv_to<W: Write>(tables: &[&ConvergenceTable], sink: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink);
    w.write_record(CSV_HEADER)?;
    for table in tables {
        for row in &table.rows {
            w.write_record([
                table.problem.clone(),
                table.method.name().to_string(),
                float(table.p),
                float(row.h),
                row.samples.to_string(),
                float(row.error),
                float(row.std_error()),
                table.master_seed.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes one or more tables to `path`, replacing the file.
pub fn write_csv(tables: &[&ConvergenceTable], path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path)?;
    write_csv_to(tables, BufWriter::new(file))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub problem: String,
    pub method: String,
    pub p: f64,
    pub h: f64,
    pub samples: usize,
    pub error: f64,
    pub stderr: f64,
    pub seed: u64,
}

pub fn read_csv_from<R: Read>(source: R) -> Result<Vec<CsvRow>> {
    let mut r = csv::ReaderBuilder::new().from_reader(source);
    let header = r.headers().map_err(|e| Error::Malformed(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != CSV_HEADER {
        return Err(Error::Malformed(format!(
            "expected header '{}', got '{}'",
            CSV_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::Malformed(e.to_string()))?;
        let line = i + 2;
        let num = |k: usize| -> Result<f64> {
            rec[k].trim().parse().map_err(|_| {
                Error::Malformed(format!(
                    "line {line}: column '{}' is not a number: '{}'",
                    CSV_HEADER[k], &rec[k]
                ))
            })
        };
        let int = |k: usize| -> Result<u64> {
            rec[k].trim().parse().map_err(|_| {
                Error::Malformed(format!(
                    "line {line}: column '{}' is not an integer: '{}'",
                    CSV_HEADER[k], &rec[k]
                ))
            })
        };
        rows.push(CsvRow {
            problem: rec[0].to_string(),
            method: rec[1].to_string(),
            p: num(2)?,
            h: num(3)?,
            samples: int(4)? as usize,
            error: num(5)?,
            stderr: num(6)?,
            seed: int(7)?,
        });
    }
    Ok(rows)
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<CsvRow>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::Malformed(format!("cannot open {}: {e}", path.display())))?;
    read_csv_from(file)
}

/// One plotted polyline.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub problem: String,
    pub method: String,
    /// `(n, log2 error)` with `h = 2^{-n}`; rows with zero error are skipped.
    pub points: Vec<(f64, f64)>,
    pub slope: Option<f64>,
}

/// Groups rows by `(problem, method)` in order of first appearance.
pub fn series(rows: &[CsvRow]) -> Vec<Series> {
    let mut out: Vec<Series> = Vec::new();
    let mut raw: Vec<Vec<(f64, f64)>> = Vec::new();
    for row in rows {
        let idx = match out
            .iter()
            .position(|s| s.problem == row.problem && s.method == row.method)
        {
            Some(i) => i,
            None => {
                out.push(Series {
                    problem: row.problem.clone(),
                    method: row.method.clone(),
                    points: Vec::new(),
                    slope: None,
                });
                raw.push(Vec::new());
                out.len() - 1
            }
        };
        if row.error > 0.0 && row.h > 0.0 {
            out[idx].points.push((-row.h.log2(), row.error.log2()));
            raw[idx].push((row.h, row.error));
        }
    }
    for (s, pts) in out.iter_mut().zip(&raw) {
        s.slope = match pts.len() {
            0 | 1 => None,
            2 => Some((pts[1].1.log2() - pts[0].1.log2()) / (pts[1].0.log2() - pts[0].0.log2())),
            _ => fit_loglog(pts).ok().map(|f| f.slope),
        };
    }
    out
}

const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Self-contained SVG: `x = n` with `h = 2^{-n}`, `y = log2(error)`.
pub fn render_svg(rows: &[CsvRow]) -> Result<String> {
    if rows.len() < 2 {
        return Err(Error::Malformed(format!(
            "a plot needs at least 2 rows, got {}",
            rows.len()
        )));
    }
    let groups = series(rows);
    let pts: Vec<(f64, f64)> = groups.iter().flat_map(|s| s.points.iter().copied()).collect();
    if pts.is_empty() {
        return Err(Error::Malformed("no row has a positive error".into()));
    }
    let (w, h) = (760.0, 500.0);
    let (left, right, top, bottom) = (70.0, 250.0, 30.0, 60.0);
    let x_lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min).floor();
    let x_hi = pts
        .iter()
        .map(|p| p.0)
        .fold(f64::NEG_INFINITY, f64::max)
        .ceil()
        .max(x_lo + 1.0);
    let y_lo = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min).floor();
    let y_hi = pts
        .iter()
        .map(|p| p.1)
        .fold(f64::NEG_INFINITY, f64::max)
        .ceil()
        .max(y_lo + 1.0);
    let pw = w - left - right;
    let ph = h - top - bottom;
    let sx = |x: f64| left + (x - x_lo) / (x_hi - x_lo) * pw;
    let sy = |y: f64| top + (y_hi - y) / (y_hi - y_lo) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    let x_step = ((x_hi - x_lo) / 12.0).ceil().max(1.0);
    let mut x = x_lo;
    while x <= x_hi + 1e-9 {
        let px = sx(x);
        let _ = writeln!(
            svg,
            r##"<line x1="{px:.2}" y1="{top}" x2="{px:.2}" y2="{:.2}" stroke="#dddddd"/>"##,
            top + ph
        );
        let _ = writeln!(
            svg,
            r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{x}</text>"#,
            top + ph + 18.0
        );
        x += x_step;
    }
    let y_step = ((y_hi - y_lo) / 10.0).ceil().max(1.0);
    let mut y = y_lo;
    while y <= y_hi + 1e-9 {
        let py = sy(y);
        let _ = writeln!(
            svg,
            r##"<line x1="{left}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#dddddd"/>"##,
            left + pw
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{y}</text>"#,
            left - 6.0,
            py + 4.0
        );
        y += y_step;
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">n  (h = 2^-n)</text>"#,
        left + pw / 2.0,
        h - 18.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">log2(error)</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    );
    for (i, s) in groups.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            path.join(" ")
        );
        for &(x, y) in &s.points {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                sx(x),
                sy(y)
            );
        }
        let slope = s.slope.map_or("n/a".to_string(), |v| format!("{v:.3}"));
        let ly = top + 14.0 + 34.0 * i as f64;
        let lx = left + pw + 16.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}">{} slope={slope}</text>"#,
            lx + 26.0,
            ly + 4.0,
            escape(&s.method)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="10">{}</text>"#,
            lx + 26.0,
            ly + 18.0,
            escape(&s.problem)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Reads a convergence CSV and writes its log-log plot.
pub fn emit_plot(csv_path: impl AsRef<Path>, svg_path: impl AsRef<Path>) -> Result<()> {
    let rows = read_csv(csv_path)?;
    let svg = render_svg(&rows)?;
    std::fs::write(svg_path, svg)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::ConvergenceRow;
    use crate::solvers::Method;

    fn table(method: Method, order: f64, n: u32) -> ConvergenceTable {
        ConvergenceTable {
            problem: "jump[T=1]".into(),
            method,
            p: 2.0,
            master_seed: 7,
            rows: (3..3 + n)
                .map(|k| {
                    let h = 2f64.powi(-(k as i32));
                    ConvergenceRow {
                        h,
                        error: 0.5 * h.powf(order),
                        sample_std: 0.1,
                        samples: 100,
                    }
                })
                .collect(),
            reseeds: Vec::new(),
        }
    }

    fn to_string(tables: &[&ConvergenceTable]) -> String {
        let mut buf = Vec::new();
        write_csv_to(tables, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn csv_layout() {
        let t = table(Method::RandRk2, 1.5, 3);
        let s = to_string(&[&t]);
        assert_eq!(s.lines().count(), 4);
        assert!(!s.contains('\r'));
        let mut lines = s.lines();
        assert_eq!(lines.next().unwrap(), "problem,method,p,h,samples,error,stderr,seed");
        assert_eq!(
            lines.next().unwrap(),
            "jump[T=1],rand-rk2,2.0000000000000000e0,1.2500000000000000e-1,100,2.2097086912079612e-2,1.0000000000000000e-2,7"
        );
    }

    #[test]
    fn empty_table_is_header_only() {
        let mut t = table(Method::RandEuler, 1.0, 0);
        t.rows.clear();
        assert_eq!(to_string(&[&t]), "problem,method,p,h,samples,error,stderr,seed\n");
    }

    #[test]
    fn csv_round_trip_preserves_values() {
        let t = table(Method::RandEuler, 0.9, 5);
        let rows = read_csv_from(to_string(&[&t]).as_bytes()).unwrap();
        assert_eq!(rows.len(), 5);
        for (r, src) in rows.iter().zip(&t.rows) {
            assert_eq!(r.h.to_bits(), src.h.to_bits());
            assert_eq!(r.error.to_bits(), src.error.to_bits());
            assert_eq!(r.seed, 7);
        }
    }

    #[test]
    fn malformed_csv() {
        assert!(matches!(
            read_csv_from("a,b\n1,2\n".as_bytes()),
            Err(Error::Malformed(_))
        ));
        let bad = "problem,method,p,h,samples,error,stderr,seed\nx,y,2,oops,1,1,1,1\n";
        assert!(matches!(read_csv_from(bad.as_bytes()), Err(Error::Malformed(_))));
    }

    #[test]
    fn plot_series_and_slopes() {
        let a = table(Method::RandEuler, 1.0, 5);
        let b = table(Method::RandRk2, 1.5, 5);
        let rows = read_csv_from(to_string(&[&a, &b]).as_bytes()).unwrap();
        let s = series(&rows);
        assert_eq!(s.len(), 2);
        assert!((s[0].slope.unwrap() - 1.0).abs() < 1e-12);
        assert!((s[1].slope.unwrap() - 1.5).abs() < 1e-12);
        let svg = render_svg(&rows).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("slope=1.500"));
        let single = read_csv_from(to_string(&[&a]).as_bytes()).unwrap();
        assert_eq!(render_svg(&single).unwrap().matches("<polyline").count(), 1);
    }

    #[test]
    fn plot_needs_two_rows() {
        let a = table(Method::RandEuler, 1.0, 1);
        let rows = read_csv_from(to_string(&[&a]).as_bytes()).unwrap();
        assert!(matches!(render_svg(&rows), Err(Error::Malformed(_))));
    }
}
