//! Self-contained SVG line plots. Output depends only on the input data, so
//! identical data yields byte-identical files.

use std::fmt::Write as _;

use crate::error::{Error, Result};

const PANEL_W: f64 = 480.0;
const PANEL_H: f64 = 360.0;
const MARGIN_L: f64 = 72.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 52.0;
const TITLE_H: f64 = 30.0;
const PALETTE: [&str; 8] = [
    "#1f4e9c", "#c0392b", "#2e8b57", "#8e44ad", "#d68910", "#17a2b8", "#5d6d7e", "#000000",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineStyle {
    Solid,
    Dashed,
    DashDot,
    Dotted,
}

impl LineStyle {
    fn dasharray(self) -> Option<&'static str> {
        match self {
            LineStyle::Solid => None,
            LineStyle::Dashed => Some("8 5"),
            LineStyle::DashDot => Some("9 4 2 4"),
            LineStyle::Dotted => Some("2 4"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub style: LineStyle,
    /// Palette index; defaults to the series position.
    pub color: Option<usize>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>, style: LineStyle) -> Self {
        Self {
            label: label.into(),
            points,
            style,
            color: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Marker {
    pub x: f64,
    pub y: f64,
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LegendPos {
    #[default]
    TopRight,
    TopLeft,
    BottomRight,
    BottomLeft,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    pub markers: Vec<Marker>,
    /// Horizontal reference lines with labels.
    pub hlines: Vec<(f64, String)>,
    pub x_range: Option<(f64, f64)>,
    pub y_range: Option<(f64, f64)>,
    pub legend: LegendPos,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Figure {
    pub title: String,
    pub panels: Vec<Panel>,
    /// Free-form lines embedded as XML comments (parameters, provenance).
    pub notes: Vec<String>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn comment(s: &str) -> String {
    s.replace("--", "- -")
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    if hi - lo <= 1e-12 * lo.abs().max(hi.abs()).max(1e-300) {
        let d = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
        return (lo - d, hi + d);
    }
    let pad = 0.04 * (hi - lo);
    (lo - pad, hi + pad)
}

fn data_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
}

/// Tick positions with a 1-2-5 step giving roughly `target` intervals.
pub fn nice_ticks(lo: f64, hi: f64, target: usize) -> (Vec<f64>, f64) {
    let raw = (hi - lo) / target.max(1) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    ((first..=last).map(|k| k as f64 * step).collect(), step)
}

fn tick_label(v: f64, step: f64) -> String {
    let v = if v.abs() < 1e-9 * step { 0.0 } else { v };
    if step >= 1e5 || (step < 1e-4 && v != 0.0) {
        return format!("{v:e}");
    }
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    format!("{v:.decimals$}")
}

struct Frame {
    ox: f64,
    oy: f64,
    w: f64,
    h: f64,
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        self.ox + (x - self.x.0) / (self.x.1 - self.x.0) * self.w
    }

    fn py(&self, y: f64) -> f64 {
        self.oy + self.h - (y - self.y.0) / (self.y.1 - self.y.0) * self.h
    }

    fn inside(&self, x: f64, y: f64) -> bool {
        x.is_finite() && y.is_finite() && x >= self.x.0 && x <= self.x.1 && y >= self.y.0 && y <= self.y.1
    }
}

fn validate(fig: &Figure) -> Result<()> {
    if fig.panels.is_empty() {
        return Err(Error::Usage("figure has no panels".into()));
    }
    for p in &fig.panels {
        if p.series.is_empty() {
            return Err(Error::Usage(format!("panel `{}` has no series", p.title)));
        }
        for s in &p.series {
            let finite = s.points.iter().filter(|(x, y)| x.is_finite() && y.is_finite()).count();
            if finite < 2 {
                return Err(Error::Usage(format!(
                    "series `{}` in panel `{}` needs at least two finite points (has {finite})",
                    s.label, p.title
                )));
            }
        }
    }
    Ok(())
}

fn render_panel(out: &mut String, p: &Panel, left: f64, top: f64) {
    let x = p
        .x_range
        .unwrap_or_else(|| padded_pair(data_range(p.series.iter().flat_map(|s| s.points.iter().map(|q| q.0)))));
    let y = p.y_range.unwrap_or_else(|| {
        padded_pair(data_range(
            p.series
                .iter()
                .flat_map(|s| s.points.iter().map(|q| q.1))
                .chain(p.hlines.iter().map(|h| h.0))
                .chain(p.markers.iter().map(|m| m.y)),
        ))
    });
    let f = Frame {
        ox: left + MARGIN_L,
        oy: top + MARGIN_T,
        w: PANEL_W - MARGIN_L - MARGIN_R,
        h: PANEL_H - MARGIN_T - MARGIN_B,
        x,
        y,
    };
    let _ = writeln!(out, "<g>");
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">{}</text>"#,
        f.ox + f.w / 2.0,
        top + 22.0,
        escape(&p.title)
    );
    let _ = writeln!(
        out,
        r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#333" stroke-width="1"/>"##,
        f.ox, f.oy, f.w, f.h
    );
    let (xt, xs) = nice_ticks(x.0, x.1, 6);
    for t in xt {
        let px = f.px(t);
        let _ = writeln!(
            out,
            r##"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="#ddd" stroke-width="0.6"/><text x="{px:.2}" y="{:.2}" text-anchor="middle" font-size="11">{}</text>"##,
            f.oy,
            f.oy + f.h,
            f.oy + f.h + 15.0,
            tick_label(t, xs)
        );
    }
    let (yt, ys) = nice_ticks(y.0, y.1, 6);
    for t in yt {
        let py = f.py(t);
        let _ = writeln!(
            out,
            r##"<line x1="{:.2}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#ddd" stroke-width="0.6"/><text x="{:.2}" y="{:.2}" text-anchor="end" font-size="11">{}</text>"##,
            f.ox,
            f.ox + f.w,
            f.ox - 5.0,
            py + 4.0,
            tick_label(t, ys)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12">{}</text>"#,
        f.ox + f.w / 2.0,
        f.oy + f.h + 36.0,
        escape(&p.x_label)
    );
    let (lx, ly) = (left + 16.0, f.oy + f.h / 2.0);
    let _ = writeln!(
        out,
        r#"<text x="{lx:.2}" y="{ly:.2}" text-anchor="middle" font-size="12" transform="rotate(-90 {lx:.2} {ly:.2})">{}</text>"#,
        escape(&p.y_label)
    );
    for (v, label) in &p.hlines {
        if *v < y.0 || *v > y.1 {
            continue;
        }
        let py = f.py(*v);
        let _ = writeln!(
            out,
            r##"<line x1="{:.2}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#888" stroke-width="0.8" stroke-dasharray="3 3"/><text x="{:.2}" y="{:.2}" font-size="10" fill="#555">{}</text>"##,
            f.ox,
            f.ox + f.w,
            f.ox + 4.0,
            py - 3.0,
            escape(label)
        );
    }
    let legend_w = 12.0 + 6.2 * p.series.iter().map(|s| s.label.chars().count()).max().unwrap_or(0) as f64 + 34.0;
    let legend_h = 8.0 + 16.0 * p.series.len() as f64;
    let (lx, ly0) = match p.legend {
        LegendPos::TopRight => (f.ox + f.w - legend_w - 6.0, f.oy + 6.0),
        LegendPos::TopLeft => (f.ox + 6.0, f.oy + 6.0),
        LegendPos::BottomRight => (f.ox + f.w - legend_w - 6.0, f.oy + f.h - legend_h - 6.0),
        LegendPos::BottomLeft => (f.ox + 6.0, f.oy + f.h - legend_h - 6.0),
    };
    let mut legend = format!(
        r##"<rect x="{lx:.2}" y="{ly0:.2}" width="{legend_w:.2}" height="{legend_h:.2}" fill="white" fill-opacity="0.85" stroke="#bbb" stroke-width="0.6"/>"##
    );
    legend.push('\n');
    for (i, s) in p.series.iter().enumerate() {
        let color = PALETTE[s.color.unwrap_or(i) % PALETTE.len()];
        let dash = s
            .style
            .dasharray()
            .map(|d| format!(r#" stroke-dasharray="{d}""#))
            .unwrap_or_default();
        let mut runs: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
        for &(a, b) in &s.points {
            if f.inside(a, b) {
                runs.last_mut().expect("nonempty").push((f.px(a), f.py(b)));
            } else if !runs.last().expect("nonempty").is_empty() {
                runs.push(Vec::new());
            }
        }
        for run in runs.iter().filter(|r| r.len() >= 2) {
            let pts: Vec<String> = run.iter().map(|(a, b)| format!("{a:.2},{b:.2}")).collect();
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.6"{dash} points="{}"/>"#,
                pts.join(" ")
            );
        }
        let ly = ly0 + 16.0 + 16.0 * i as f64;
        let _ = writeln!(
            legend,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="1.6"{dash}/><text x="{:.2}" y="{ly:.2}" font-size="11">{}</text>"#,
            lx + 6.0,
            ly - 4.0,
            lx + 32.0,
            ly - 4.0,
            lx + 38.0,
            escape(&s.label)
        );
    }
    for m in &p.markers {
        if !f.inside(m.x, m.y) {
            continue;
        }
        let (px, py) = (f.px(m.x), f.py(m.y));
        let _ = writeln!(
            out,
            r##"<circle cx="{px:.2}" cy="{py:.2}" r="3.2" fill="#000"/><text x="{:.2}" y="{:.2}" font-size="10">{}</text>"##,
            px + 4.0,
            py - 5.0,
            escape(&m.label)
        );
    }
    out.push_str(&legend);
    let _ = writeln!(out, "</g>");
}

fn padded_pair((lo, hi): (f64, f64)) -> (f64, f64) {
    padded(lo, hi)
}

/// Renders the panels side by side into one SVG document.
pub fn render_svg(fig: &Figure) -> Result<String> {
    validate(fig)?;
    let width = PANEL_W * fig.panels.len() as f64;
    let height = PANEL_H + TITLE_H;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="Helvetica, Arial, sans-serif">"#
    );
    let _ = writeln!(out, "<!-- generated by barotropic-ns {} -->", crate::output::VERSION);
    for note in &fig.notes {
        let _ = writeln!(out, "<!-- {} -->", comment(note));
    }
    for p in &fig.panels {
        for s in &p.series {
            let (x0, x1) = data_range(s.points.iter().map(|q| q.0));
            let (y0, y1) = data_range(s.points.iter().map(|q| q.1));
            let _ = writeln!(
                out,
                "<!-- series {}: {} points, x in [{x0}, {x1}], y in [{y0}, {y1}] -->",
                comment(&s.label),
                s.points.len()
            );
        }
    }
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="20" text-anchor="middle" font-size="15">{}</text>"#,
        width / 2.0,
        escape(&fig.title)
    );
    for (i, p) in fig.panels.iter().enumerate() {
        render_panel(&mut out, p, PANEL_W * i as f64, TITLE_H);
    }
    out.push_str("</svg>\n");
    Ok(out)
}
