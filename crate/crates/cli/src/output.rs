//! CSV and SVG serialization of curve sets. Both are deterministic: fixed
//! number formatting, LF line endings, no timestamps.

use std::fmt::Write as _;

use phonon_dephasing::Curve;

use crate::error::CliError;

pub const ABSCISSA: &str = "t_over_tau_d";

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Shortest round-trip form; scientific notation outside `[1e-3, 1e6)`.
pub fn short(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-3..1e6).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

pub fn header_lines(meta: &[(String, String)]) -> String {
    let mut s = String::new();
    for (k, v) in meta {
        // keep every header entry on one line
        let v = v.replace(['\n', '\r'], " ");
        let _ = writeln!(s, "# {k}={v}");
    }
    s
}

fn check_shared_abscissa(curves: &[Curve]) -> Result<(), CliError> {
    let Some(first) = curves.first() else {
        return Err(CliError::Usage("nothing to write".into()));
    };
    if curves
        .iter()
        .any(|c| c.abscissa != first.abscissa || !c.is_well_formed())
    {
        return Err(CliError::Usage("curves do not share one time grid".into()));
    }
    Ok(())
}

/// `# key=value` header, then `t_over_tau_d,<label...>`, one row per sample.
pub fn curves_to_csv(curves: &[Curve], meta: &[(String, String)]) -> Result<String, CliError> {
    check_shared_abscissa(curves)?;
    let mut s = header_lines(meta);
    for c in curves {
        let _ = writeln!(s, "# column.{}={}", c.label, c.quantity);
        for (k, v) in &c.meta {
            let _ = writeln!(s, "# {}.{k}={v}", c.label);
        }
    }
    s.push_str(ABSCISSA);
    for c in curves {
        s.push(',');
        s.push_str(&c.label);
    }
    s.push('\n');
    for (i, x) in curves[0].abscissa.iter().enumerate() {
        s.push_str(&num(*x));
        for c in curves {
            s.push(',');
            s.push_str(&num(c.values[i]));
        }
        s.push('\n');
    }
    Ok(s)
}

/// A parsed CSV curve file: header entries, column names, rows.
#[derive(Debug, Clone)]
pub struct CsvTable {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

/// Reads back what [`curves_to_csv`] writes.
pub fn parse_csv(text: &str) -> Result<CsvTable, String> {
    let mut meta = Vec::new();
    let mut columns = None;
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if let Some(rest) = line.strip_prefix("# ") {
            let (k, v) = rest
                .split_once('=')
                .ok_or(format!("line {}: bad header", n + 1))?;
            meta.push((k.to_string(), v.to_string()));
        } else if columns.is_none() {
            columns = Some(line.split(',').map(str::to_string).collect::<Vec<_>>());
        } else {
            let row = line
                .split(',')
                .map(|f| f.parse::<f64>().map_err(|e| format!("line {}: {e}", n + 1)))
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
    }
    Ok(CsvTable {
        meta,
        columns: columns.ok_or("no column line")?,
        rows,
    })
}

const PALETTE: &[&str] = &[
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// Roughly five round tick values covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let start = (lo / step).ceil() as i64;
    let end = (hi / step).floor() as i64;
    (start..=end).map(|i| i as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    let s = format!("{:.6}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

/// Minimal line plot: frame, ticks, one polyline per curve and a legend.
pub fn curves_to_svg(curves: &[Curve], title: &str, y_label: &str) -> Result<String, CliError> {
    check_shared_abscissa(curves)?;
    let (w, h) = (800.0, 500.0);
    let (left, right, top, bottom) = (80.0, 20.0, 40.0, 60.0);
    let (pw, ph) = (w - left - right, h - top - bottom);
    let xs = &curves[0].abscissa;
    let (x0, x1) = (xs[0], xs[xs.len() - 1]);
    let mut y0 = f64::INFINITY;
    let mut y1 = f64::NEG_INFINITY;
    for v in curves.iter().flat_map(|c| c.values.iter()) {
        y0 = y0.min(*v);
        y1 = y1.max(*v);
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let pad = 0.05 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let sx = |x: f64| left + (x - x0) / (x1 - x0).max(f64::MIN_POSITIVE) * pw;
    let sy = |y: f64| top + (y1 - y) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    );
    let _ = writeln!(s, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}</text>",
        w / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        "<rect x=\"{left}\" y=\"{top}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" stroke=\"black\"/>"
    );
    for t in ticks(x0, x1) {
        let x = sx(t);
        let _ = writeln!(
            s,
            "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"black\"/><text x=\"{x:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>",
            top + ph,
            top + ph + 5.0,
            top + ph + 20.0,
            tick_label(t)
        );
    }
    for t in ticks(y0, y1) {
        let y = sy(t);
        let _ = writeln!(
            s,
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{left:.2}\" y2=\"{y:.2}\" stroke=\"black\"/><text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">{}</text>",
            left - 5.0,
            left - 8.0,
            y + 4.0,
            tick_label(t)
        );
    }
    if y0 < 0.0 && y1 > 0.0 {
        let y = sy(0.0);
        let _ = writeln!(
            s,
            "<line x1=\"{left:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#999\" stroke-dasharray=\"4 4\"/>",
            left + pw
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">t/τ_d</text>",
        left + pw / 2.0,
        h - 15.0
    );
    let _ = writeln!(
        s,
        "<text x=\"20\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 20 {:.2})\">{}</text>",
        top + ph / 2.0,
        top + ph / 2.0,
        escape(y_label)
    );
    for (i, c) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut pts = String::new();
        for (x, y) in c.abscissa.iter().zip(&c.values) {
            let _ = write!(pts, "{:.2},{:.2} ", sx(*x), sy(*y));
        }
        let _ = writeln!(
            s,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            pts.trim_end()
        );
        let ly = top + 15.0 + 18.0 * i as f64;
        let lx = left + pw - 170.0;
        let _ = writeln!(
            s,
            "<line x1=\"{lx:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{color}\" stroke-width=\"2\"/><text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>",
            lx + 25.0,
            lx + 30.0,
            ly + 4.0,
            escape(&c.label)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
