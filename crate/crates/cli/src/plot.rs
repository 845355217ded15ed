//! Minimal SVG renderers. Plots are derived views of the CSVs, never the
//! source of truth.

const W: f64 = 640.0;
const H: f64 = 480.0;
const ML: f64 = 70.0;
const MR: f64 = 20.0;
const MT: f64 = 40.0;
const MB: f64 = 50.0;

fn frame(title: &str, xlabel: &str, ylabel: &str, body: &str) -> String {
    format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">
<rect width="{W}" height="{H}" fill="white"/>
<text x="{tx}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{title}</text>
<text x="{tx}" y="{bl}" text-anchor="middle" font-family="sans-serif" font-size="12">{xlabel}</text>
<text x="16" y="{ty}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 16 {ty})">{ylabel}</text>
<rect x="{ML}" y="{MT}" width="{pw}" height="{ph}" fill="none" stroke="black"/>
{body}
</svg>
"#,
        tx = ML + (W - ML - MR) / 2.0,
        ty = MT + (H - MT - MB) / 2.0,
        bl = H - 12.0,
        pw = W - ML - MR,
        ph = H - MT - MB,
    )
}

struct Scale {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Scale {
    fn of(points: &[(f64, f64)]) -> Scale {
        let mut s = Scale {
            x0: f64::INFINITY,
            x1: f64::NEG_INFINITY,
            y0: f64::INFINITY,
            y1: f64::NEG_INFINITY,
        };
        for &(x, y) in points {
            s.x0 = s.x0.min(x);
            s.x1 = s.x1.max(x);
            s.y0 = s.y0.min(y);
            s.y1 = s.y1.max(y);
        }
        if s.x1 <= s.x0 {
            s.x1 = s.x0 + 1.0;
        }
        if s.y1 <= s.y0 {
            s.y1 = s.y0 + 1.0;
        }
        s
    }

    fn px(&self, x: f64) -> f64 {
        ML + (x - self.x0) / (self.x1 - self.x0) * (W - ML - MR)
    }

    fn py(&self, y: f64) -> f64 {
        H - MB - (y - self.y0) / (self.y1 - self.y0) * (H - MT - MB)
    }
}

fn axis_labels(s: &Scale) -> String {
    format!(
        r#"<text x="{ML}" y="{b}" font-family="sans-serif" font-size="10">{x0:.3e}</text>
<text x="{r}" y="{b}" text-anchor="end" font-family="sans-serif" font-size="10">{x1:.3e}</text>
<text x="{l2}" y="{bb}" text-anchor="end" font-family="sans-serif" font-size="10">{y0:.3e}</text>
<text x="{l2}" y="{t}" text-anchor="end" font-family="sans-serif" font-size="10">{y1:.3e}</text>
"#,
        b = H - MB + 16.0,
        r = W - MR,
        l2 = ML - 4.0,
        bb = H - MB,
        t = MT + 10.0,
        x0 = s.x0,
        x1 = s.x1,
        y0 = s.y0,
        y1 = s.y1,
    )
}

/// Connected line plot in linear coordinates.
pub fn svg_line(points: &[(f64, f64)], title: &str, xlabel: &str, ylabel: &str) -> String {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .collect();
    if pts.is_empty() {
        return frame(title, xlabel, ylabel, "");
    }
    let s = Scale::of(&pts);
    let path: Vec<String> = pts
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", s.px(x), s.py(y)))
        .collect();
    let body = format!(
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>
{}"#,
        path.join(" "),
        axis_labels(&s)
    );
    frame(title, xlabel, ylabel, &body)
}

/// Scatter of log10 x against log10 y, with an optional fitted power law
/// drawn through the data range.
pub fn svg_scatter_loglog(
    points: &[(f64, f64)],
    fit: Option<(f64, f64)>,
    title: &str,
    xlabel: &str,
    ylabel: &str,
) -> String {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|&(x, y)| (x.log10(), y.log10()))
        .collect();
    if pts.is_empty() {
        return frame(title, xlabel, ylabel, "");
    }
    let s = Scale::of(&pts);
    let mut body = String::new();
    if let Some((slope, intercept)) = fit {
        // the fit is in natural log; convert to the log10 frame
        let ln10 = std::f64::consts::LN_10;
        let y_at = |lx: f64| slope * lx + intercept / ln10;
        body.push_str(&format!(
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="darkorange" stroke-width="1.5"/>
"#,
            s.px(s.x0),
            s.py(y_at(s.x0)),
            s.px(s.x1),
            s.py(y_at(s.x1)),
        ));
    }
    for &(x, y) in &pts {
        body.push_str(&format!(
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>
"#,
            s.px(x),
            s.py(y)
        ));
    }
    body.push_str(&axis_labels(&s));
    frame(
        title,
        &format!("log10 {xlabel}"),
        &format!("log10 {ylabel}"),
        &body,
    )
}
