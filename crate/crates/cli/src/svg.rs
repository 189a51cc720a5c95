//! Minimal standalone SVG writer for log-log error plots.

/// One plotted series: label plus (x, y) samples, all positive.
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 60.0;

fn decades(lo: f64, hi: f64) -> Vec<f64> {
    let mut ticks = Vec::new();
    let mut e = lo.log10().floor() as i32;
    while 10f64.powi(e) <= hi * 1.0001 {
        let t = 10f64.powi(e);
        if t >= lo * 0.9999 {
            ticks.push(t);
        }
        e += 1;
    }
    ticks
}

/// Render a log-log plot. Out-of-range or non-finite points are dropped.
pub fn loglog_plot(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .filter(|(x, y)| x.is_finite() && y.is_finite() && *x > 0.0 && *y > 0.0)
        .collect();
    let (mut x_lo, mut x_hi, mut y_lo, mut y_hi) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for (x, y) in &pts {
        x_lo = x_lo.min(*x);
        x_hi = x_hi.max(*x);
        y_lo = y_lo.min(*y);
        y_hi = y_hi.max(*y);
    }
    if pts.is_empty() {
        x_lo = 1e-3;
        x_hi = 1.0;
        y_lo = 1e-3;
        y_hi = 1.0;
    }
    let pad = 1.15;
    x_lo /= pad;
    x_hi *= pad;
    y_lo /= pad;
    y_hi *= pad;
    let to_px = |x: f64, y: f64| -> (f64, f64) {
        let fx = (x.ln() - x_lo.ln()) / (x_hi.ln() - x_lo.ln());
        let fy = (y.ln() - y_lo.ln()) / (y_hi.ln() - y_lo.ln());
        (MARGIN + fx * (W - 2.0 * MARGIN), H - MARGIN - fy * (H - 2.0 * MARGIN))
    };

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\">\n<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\" \
         font-family=\"sans-serif\">{title}</text>\n",
        W / 2.0
    ));
    // frame
    out.push_str(&format!(
        "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{}\" height=\"{}\" fill=\"none\" \
         stroke=\"black\"/>\n",
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    ));
    // decade grid and labels
    for t in decades(x_lo, x_hi) {
        let (px, _) = to_px(t, y_lo * pad);
        out.push_str(&format!(
            "<line x1=\"{px}\" y1=\"{MARGIN}\" x2=\"{px}\" y2=\"{}\" stroke=\"#cccccc\" \
             stroke-dasharray=\"3,3\"/>\n<text x=\"{px}\" y=\"{}\" text-anchor=\"middle\" \
             font-size=\"11\" font-family=\"sans-serif\">1e{}</text>\n",
            H - MARGIN,
            H - MARGIN + 16.0,
            t.log10().round() as i32
        ));
    }
    for t in decades(y_lo, y_hi) {
        let (_, py) = to_px(x_lo * pad, t);
        out.push_str(&format!(
            "<line x1=\"{MARGIN}\" y1=\"{py}\" x2=\"{}\" y2=\"{py}\" stroke=\"#cccccc\" \
             stroke-dasharray=\"3,3\"/>\n<text x=\"{}\" y=\"{}\" text-anchor=\"end\" \
             font-size=\"11\" font-family=\"sans-serif\">1e{}</text>\n",
            W - MARGIN,
            MARGIN - 6.0,
            py + 4.0,
            t.log10().round() as i32
        ));
    }
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\" \
         font-family=\"sans-serif\">{x_label}</text>\n",
        W / 2.0,
        H - 12.0
    ));
    out.push_str(&format!(
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\" \
         font-family=\"sans-serif\" transform=\"rotate(-90 16 {})\">{y_label}</text>\n",
        H / 2.0,
        H / 2.0
    ));

    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = s
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite() && *x > 0.0 && *y > 0.0)
            .map(|&(x, y)| {
                let (px, py) = to_px(x, y);
                format!("{px:.2},{py:.2}")
            })
            .collect();
        if path.is_empty() {
            continue;
        }
        out.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            path.join(" ")
        ));
        for p in &path {
            let mut it = p.split(',');
            let (px, py) = (it.next().unwrap(), it.next().unwrap());
            out.push_str(&format!(
                "<circle cx=\"{px}\" cy=\"{py}\" r=\"2.5\" fill=\"{color}\"/>\n"
            ));
        }
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" font-family=\"sans-serif\" \
             fill=\"{color}\">{}</text>\n",
            W - MARGIN + 6.0,
            MARGIN + 16.0 * (i as f64 + 1.0),
            s.label
        ));
    }
    out.push_str("</svg>\n");
    out
}
