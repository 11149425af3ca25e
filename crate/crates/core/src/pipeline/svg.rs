//! SVG rendering of a coherence field: `rho2` heatmap over (time, log2 period), cone of
//! influence shading, significance contour and phase arrows.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::wavelet::CoherenceField;

#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapStyle {
    pub width: f64,
    pub height: f64,
    /// Wider series are block-averaged down to this many columns.
    pub max_columns: usize,
    /// One arrow per `arrow_time_step x arrow_scale_step` block of cells.
    pub arrow_time_step: usize,
    pub arrow_scale_step: usize,
    pub color_levels: usize,
    pub title: String,
}

impl Default for HeatmapStyle {
    fn default() -> Self {
        Self {
            width: 900.0,
            height: 420.0,
            max_columns: 400,
            arrow_time_step: 16,
            arrow_scale_step: 4,
            color_levels: 64,
            title: String::new(),
        }
    }
}

const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 70.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 40.0;

const VIRIDIS: [(f64, [f64; 3]); 5] = [
    (0.0, [68.0, 1.0, 84.0]),
    (0.25, [59.0, 82.0, 139.0]),
    (0.5, [33.0, 145.0, 140.0]),
    (0.75, [94.0, 201.0, 98.0]),
    (1.0, [253.0, 231.0, 37.0]),
];

/// Viridis-like ramp for `v` in `[0, 1]`.
pub fn colormap(v: f64) -> [u8; 3] {
    let v = if v.is_finite() { v.clamp(0.0, 1.0) } else { 0.0 };
    let k = VIRIDIS
        .iter()
        .position(|(x, _)| *x >= v)
        .unwrap_or(VIRIDIS.len() - 1)
        .max(1);
    let (x0, c0) = VIRIDIS[k - 1];
    let (x1, c1) = VIRIDIS[k];
    let t = (v - x0) / (x1 - x0);
    let mut out = [0u8; 3];
    for i in 0..3 {
        out[i] = (c0[i] + t * (c1[i] - c0[i])).round() as u8;
    }
    out
}

fn hex([r, g, b]: [u8; 3]) -> String {
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Layout {
    x0: f64,
    y0: f64,
    pw: f64,
    ph: f64,
    n: usize,
    rows: usize,
    log_p0: f64,
    log_p1: f64,
}

impl Layout {
    fn time_x(&self, t: f64) -> f64 {
        self.x0 + t / self.n as f64 * self.pw
    }

    fn row_y(&self, j: f64) -> f64 {
        self.y0 + j / self.rows as f64 * self.ph
    }

    /// Rows are evenly spaced in log2 period, so a period maps to a fractional row centre.
    fn period_y(&self, period: f64) -> f64 {
        if !(period > 0.0) {
            return self.y0;
        }
        let span = (self.log_p1 - self.log_p0).max(f64::EPSILON);
        let frac = if self.rows > 1 {
            (period.log2() - self.log_p0) / span * (self.rows - 1) as f64 + 0.5
        } else {
            0.5
        };
        self.row_y(frac).clamp(self.y0, self.y0 + self.ph)
    }
}

fn fmt2(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

/// Renders the field as an SVG document.
pub fn heatmap_svg(field: &CoherenceField, style: &HeatmapStyle) -> Result<String> {
    let rows = field.num_scales();
    let n = field.n;
    if rows == 0 || n == 0 || field.rho2.shape() != (rows, n) {
        return Err(Error::Shape("coherence field is empty or inconsistent".into()));
    }
    if let Some(i) = field.rho2.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let periods = field.grid.fourier_periods();
    let layout = Layout {
        x0: MARGIN_LEFT,
        y0: MARGIN_TOP,
        pw: style.width - MARGIN_LEFT - MARGIN_RIGHT,
        ph: style.height - MARGIN_TOP - MARGIN_BOTTOM,
        n,
        rows,
        log_p0: periods[0].log2(),
        log_p1: periods[rows - 1].log2(),
    };
    let block = n.div_ceil(style.max_columns.max(1));
    let cols = n.div_ceil(block);
    let levels = style.color_levels.max(2);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = style.width,
        h = style.height
    );
    svg.push_str(concat!(
        "<defs><marker id=\"arrowhead\" markerWidth=\"6\" markerHeight=\"6\" refX=\"5\" refY=\"3\" ",
        "orient=\"auto\"><path d=\"M0,0 L6,3 L0,6 Z\" fill=\"black\"/></marker></defs>\n"
    ));
    if !style.title.is_empty() {
        let _ = writeln!(
            svg,
            r#"<text class="title" x="{}" y="18" font-size="13" text-anchor="middle">{}</text>"#,
            fmt2(layout.x0 + layout.pw / 2.0),
            escape(&style.title)
        );
    }

    // heatmap: block-average columns, quantise colours and merge horizontal runs
    svg.push_str("<g class=\"heatmap\" shape-rendering=\"crispEdges\">\n");
    for j in 0..rows {
        let row = field.rho2.row(j);
        let quantised: Vec<usize> = (0..cols)
            .map(|c| {
                let cells = &row[c * block..((c + 1) * block).min(n)];
                let mean = cells.iter().sum::<f64>() / cells.len() as f64;
                ((mean.clamp(0.0, 1.0) * (levels - 1) as f64).round()) as usize
            })
            .collect();
        let mut c = 0;
        while c < cols {
            let level = quantised[c];
            let mut end = c + 1;
            while end < cols && quantised[end] == level {
                end += 1;
            }
            let x = layout.time_x((c * block) as f64);
            let x_end = layout.time_x(((end * block).min(n)) as f64);
            let y = layout.row_y(j as f64);
            let _ = writeln!(
                svg,
                r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{}"/>"#,
                fmt2(x),
                fmt2(y),
                fmt2(x_end - x),
                fmt2(layout.row_y(j as f64 + 1.0) - y),
                hex(colormap(level as f64 / (levels - 1) as f64))
            );
            c = end;
        }
    }
    svg.push_str("</g>\n");

    // significance contour on the block grid: a block counts when at least half its
    // cells are significant
    let sig_block: Vec<bool> = (0..rows)
        .flat_map(|j| {
            let row = field.significant.row(j);
            (0..cols).map(move |c| {
                let cells = &row[c * block..((c + 1) * block).min(n)];
                2 * cells.iter().filter(|&&s| s).count() >= cells.len()
            })
        })
        .collect();
    let sig = |j: isize, c: isize| -> bool {
        j >= 0 && c >= 0 && (j as usize) < rows && (c as usize) < cols && sig_block[j as usize * cols + c as usize]
    };
    let mut contour = String::new();
    for j in 0..rows as isize {
        for c in 0..cols as isize {
            if !sig(j, c) {
                continue;
            }
            let xl = fmt2(layout.time_x((c as usize * block) as f64));
            let xr = fmt2(layout.time_x(((c as usize + 1) * block).min(n) as f64));
            let yt = fmt2(layout.row_y(j as f64));
            let yb = fmt2(layout.row_y(j as f64 + 1.0));
            if !sig(j - 1, c) {
                let _ = write!(contour, "M{xl},{yt}H{xr}");
            }
            if !sig(j + 1, c) {
                let _ = write!(contour, "M{xl},{yb}H{xr}");
            }
            if !sig(j, c - 1) {
                let _ = write!(contour, "M{xl},{yt}V{yb}");
            }
            if !sig(j, c + 1) {
                let _ = write!(contour, "M{xr},{yt}V{yb}");
            }
        }
    }
    let _ = writeln!(
        svg,
        r#"<path class="significance" d="{contour}" fill="none" stroke="black" stroke-width="1.2"/>"#
    );

    // cone of influence: shade everything at periods longer than the local limit
    let bottom = layout.y0 + layout.ph;
    let mut coi = format!("M{},{}", fmt2(layout.x0), fmt2(bottom));
    for (t, &p) in field.coi.iter().enumerate() {
        let _ = write!(
            coi,
            "L{},{}",
            fmt2(layout.time_x(t as f64 + 0.5)),
            fmt2(layout.period_y(p))
        );
    }
    let _ = write!(coi, "L{},{}Z", fmt2(layout.x0 + layout.pw), fmt2(bottom));
    let _ = writeln!(
        svg,
        r#"<path class="coi" d="{coi}" fill="white" fill-opacity="0.45" stroke="white" stroke-dasharray="4,3"/>"#
    );

    // phase arrows: east is in phase, north is +pi/2; only drawn on significant cells
    let arrow_len = 0.8
        * (layout.pw / n as f64 * style.arrow_time_step as f64)
            .min(layout.ph / rows as f64 * style.arrow_scale_step as f64)
            .min(14.0);
    svg.push_str("<g class=\"phase-arrows\" stroke=\"black\" stroke-width=\"1\">\n");
    let ts = style.arrow_time_step.max(1);
    let ss = style.arrow_scale_step.max(1);
    for bj in 0..rows.div_ceil(ss) {
        let j = (bj * ss + ss / 2).min(rows - 1);
        for bt in 0..n.div_ceil(ts) {
            let t = (bt * ts + ts / 2).min(n - 1);
            if !*field.significant.get(j, t) || *field.phase_indeterminate.get(j, t) {
                continue;
            }
            let theta = *field.phase.get(j, t);
            if !theta.is_finite() {
                continue;
            }
            let cx = layout.time_x(t as f64 + 0.5);
            let cy = layout.row_y(j as f64 + 0.5);
            let (dx, dy) = (arrow_len / 2.0 * theta.cos(), -arrow_len / 2.0 * theta.sin());
            let _ = writeln!(
                svg,
                r#"<line class="phase-arrow" x1="{}" y1="{}" x2="{}" y2="{}" marker-end="url(#arrowhead)"/>"#,
                fmt2(cx - dx),
                fmt2(cy - dy),
                fmt2(cx + dx),
                fmt2(cy + dy)
            );
        }
    }
    svg.push_str("</g>\n");

    // axes
    let _ = writeln!(
        svg,
        r#"<rect class="frame" x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        fmt2(layout.x0),
        fmt2(layout.y0),
        fmt2(layout.pw),
        fmt2(layout.ph)
    );
    svg.push_str("<g class=\"axis-y\" font-size=\"10\" text-anchor=\"end\">\n");
    let mut k = periods[0].log2().ceil() as i32;
    while (k as f64) <= periods[rows - 1].log2() + 1e-9 {
        let y = fmt2(layout.period_y(2f64.powi(k)));
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="black"/><text x="{}" y="{y}" dy="3">{}</text>"#,
            fmt2(layout.x0 - 4.0),
            fmt2(layout.x0),
            fmt2(layout.x0 - 6.0),
            2u64.pow(k.max(0) as u32)
        );
        k += 1;
    }
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{}" transform="rotate(-90 14 {})" text-anchor="middle">Period</text>"#,
        fmt2(layout.y0 + layout.ph / 2.0),
        fmt2(layout.y0 + layout.ph / 2.0)
    );
    svg.push_str("</g>\n<g class=\"axis-x\" font-size=\"10\" text-anchor=\"middle\">\n");
    let step = nice_step(n);
    let mut t = 0;
    while t <= n {
        let x = fmt2(layout.time_x(t as f64));
        let _ = writeln!(
            svg,
            r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="black"/><text x="{x}" y="{}">{t}</text>"#,
            fmt2(bottom),
            fmt2(bottom + 4.0),
            fmt2(bottom + 15.0)
        );
        t += step;
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}">Time</text>"#,
        fmt2(layout.x0 + layout.pw / 2.0),
        fmt2(bottom + 32.0)
    );
    svg.push_str("</g>\n");

    // colour bar
    let bar_x = layout.x0 + layout.pw + 15.0;
    svg.push_str("<g class=\"colorbar\" font-size=\"10\">\n");
    for i in 0..levels {
        let v = i as f64 / (levels - 1) as f64;
        let y = layout.y0 + (1.0 - (i + 1) as f64 / levels as f64) * layout.ph;
        let _ = writeln!(
            svg,
            r#"<rect x="{}" y="{}" width="14" height="{}" fill="{}"/>"#,
            fmt2(bar_x),
            fmt2(y),
            fmt2(layout.ph / levels as f64 + 0.5),
            hex(colormap(v))
        );
    }
    for v in [0.0, 0.5, 1.0] {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" dy="3">{v:.1}</text>"#,
            fmt2(bar_x + 18.0),
            fmt2(layout.y0 + (1.0 - v) * layout.ph)
        );
    }
    svg.push_str("</g>\n</svg>\n");
    Ok(svg)
}

fn nice_step(n: usize) -> usize {
    let raw = (n as f64 / 8.0).max(1.0);
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    step as usize
}

pub fn render_heatmap(field: &CoherenceField, path: impl AsRef<Path>, style: &HeatmapStyle) -> Result<()> {
    let path = path.as_ref();
    let svg = heatmap_svg(field, style)?;
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}
