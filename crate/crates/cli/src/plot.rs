use std::fmt::Write;

use crate::error::{CliError, CliResult};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 450.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const TICKS: usize = 5;
const PALETTE: [&str; 6] = ["#1f77b4", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2"];
const DASHED_COLOUR: &str = "#ff7f0e";

/// A parsed scan CSV: the first column is the abscissa.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

pub fn read_table(bytes: &[u8]) -> CliResult<Table> {
    let mut reader = csv::Reader::from_reader(bytes);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header.len() < 2 || header.iter().any(String::is_empty) {
        return Err(CliError::Io("CSV needs a header with an abscissa and at least one series".into()));
    }
    let mut columns = vec![Vec::new(); header.len()];
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != header.len() {
            return Err(CliError::Io(format!("row {} has {} fields, expected {}", i + 1, record.len(), header.len())));
        }
        for (col, field) in columns.iter_mut().zip(record.iter()) {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| CliError::Io(format!("row {}: '{field}' is not a number", i + 1)))?;
            if !v.is_finite() {
                return Err(CliError::Io(format!("row {}: non-finite value", i + 1)));
            }
            col.push(v);
        }
    }
    if columns[0].len() < 2 {
        return Err(CliError::Io("CSV needs at least two data rows".into()));
    }
    Ok(Table { header, columns })
}

fn span(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.to_string() }
}

/// Line plot of every series against the first column. A series named
/// `c_s` is drawn dashed. Output depends only on the table.
pub fn render_svg(table: &Table) -> String {
    let xs = &table.columns[0];
    let (x0, x1) = (xs.iter().copied().fold(f64::INFINITY, f64::min), xs.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    let (x0, x1) = if x1 > x0 { (x0, x1) } else { (x0 - 0.5, x1 + 0.5) };
    let (y0, y1) = span(table.columns[1..].iter().flatten().copied());
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=TICKS {
        let t = i as f64 / TICKS as f64;
        let (xv, yv) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
        let (sx, sy) = (px(xv), py(yv));
        let _ = writeln!(svg, r#"<line x1="{sx:.2}" y1="{:.2}" x2="{sx:.2}" y2="{:.2}" stroke="black"/>"#, TOP + ph, TOP + ph + 5.0);
        let _ = writeln!(svg, r#"<text x="{sx:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, TOP + ph + 20.0, tick_label(xv));
        let _ = writeln!(svg, r#"<line x1="{:.2}" y1="{sy:.2}" x2="{LEFT}" y2="{sy:.2}" stroke="black"/>"#, LEFT - 5.0);
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 8.0, sy + 4.0, tick_label(yv));
    }
    let series_names = table.header[1..].join(", ");
    let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, HEIGHT - 15.0, escape(&table.header[0]));
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(&series_names)
    );

    let mut palette = PALETTE.iter().cycle();
    for (k, (name, ys)) in table.header[1..].iter().zip(&table.columns[1..]).enumerate() {
        let dashed = name == "c_s";
        let colour = if dashed { DASHED_COLOUR } else { palette.next().unwrap() };
        let dash = if dashed { r#" stroke-dasharray="8 5""# } else { "" };
        let points: Vec<String> = xs.iter().zip(ys).map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="2"{dash} points="{}"/>"#,
            points.join(" ")
        );
        let ly = TOP + 15.0 + 20.0 * k as f64;
        let lx = LEFT + pw + 15.0;
        let _ = writeln!(svg, r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{colour}" stroke-width="2"{dash}/>"#, lx + 30.0);
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 36.0, ly + 4.0, escape(name));
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG3: &str = "r,c_s,c_h,double_homodyne\n0,0.75,1.25,1.25\n0.5,0.57,0.62,0.62\n1,0.39,0.39,0.39\n";

    #[test]
    fn parses_and_renders() {
        let t = read_table(FIG3.as_bytes()).unwrap();
        assert_eq!(t.header, ["r", "c_s", "c_h", "double_homodyne"]);
        let svg = render_svg(&t);
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert_eq!(svg.matches("stroke-dasharray").count(), 2);
        assert!(svg.contains(">double_homodyne</text>"));
        assert_eq!(svg, render_svg(&t));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(read_table(b"").is_err());
        assert!(read_table(b"r,c_s\n").is_err());
        assert!(read_table(b"r,c_s\n0,1\n1,x\n").is_err());
        assert!(read_table(b"r,c_s\n0,1\n1\n").is_err());
    }
}
