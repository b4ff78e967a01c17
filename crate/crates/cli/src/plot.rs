//! Standalone SVG emission, deterministic for fixed input.

/// One named curve of a growth plot.
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 56.0;

fn svg_header() -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\">\n<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    )
}

fn empty_plot(title: &str) -> String {
    let mut out = svg_header();
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"monospace\" \
         font-size=\"14\">{title}: no data</text>\n</svg>\n",
        W / 2.0,
        H / 2.0
    ));
    out
}

const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Log-scale growth curves: count against radius.
pub fn growth_curve(series: &[Series]) -> String {
    let finite: Vec<&Series> = series.iter().filter(|s| !s.points.is_empty()).collect();
    if finite.is_empty() {
        return empty_plot("growth");
    }
    let xmax = finite
        .iter()
        .flat_map(|s| s.points.iter().map(|(x, _)| *x))
        .fold(1.0f64, f64::max);
    let ymax = finite
        .iter()
        .flat_map(|s| s.points.iter().map(|(_, y)| *y))
        .fold(1.0f64, f64::max)
        .ln();
    let sx = |x: f64| MARGIN + (W - 2.0 * MARGIN) * x / xmax;
    let sy = |y: f64| H - MARGIN - (H - 2.0 * MARGIN) * y.max(1.0).ln() / ymax;
    let mut out = svg_header();
    out.push_str(&format!(
        "<line x1=\"{m:.1}\" y1=\"{b:.1}\" x2=\"{r:.1}\" y2=\"{b:.1}\" stroke=\"black\"/>\n\
         <line x1=\"{m:.1}\" y1=\"{t:.1}\" x2=\"{m:.1}\" y2=\"{b:.1}\" stroke=\"black\"/>\n\
         <text x=\"{cx:.1}\" y=\"{lb:.1}\" text-anchor=\"middle\" font-family=\"monospace\" \
         font-size=\"12\">radius</text>\n\
         <text x=\"14\" y=\"{cy:.1}\" text-anchor=\"middle\" font-family=\"monospace\" \
         font-size=\"12\" transform=\"rotate(-90 14 {cy:.1})\">log count</text>\n",
        m = MARGIN,
        b = H - MARGIN,
        r = W - MARGIN,
        t = MARGIN,
        cx = W / 2.0,
        lb = H - 18.0,
        cy = H / 2.0,
    ));
    for (i, s) in finite.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = s
            .points
            .iter()
            .enumerate()
            .map(|(k, (x, y))| {
                format!("{}{:.2},{:.2}", if k == 0 { "M" } else { "L" }, sx(*x), sy(*y))
            })
            .collect();
        out.push_str(&format!(
            "<path d=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            path.join(" ")
        ));
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"12\" \
             fill=\"{color}\">{}</text>\n",
            MARGIN + 8.0,
            MARGIN + 16.0 + 16.0 * i as f64,
            s.label
        ));
    }
    out.push_str("</svg>\n");
    out
}

/// Scatter of 2-d projections of embedded points.
pub fn embedding_scatter(points: &[(f64, f64)]) -> String {
    if points.is_empty() {
        return empty_plot("embedding scatter");
    }
    let (mut xlo, mut xhi, mut ylo, mut yhi) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for (x, y) in points {
        xlo = xlo.min(*x);
        xhi = xhi.max(*x);
        ylo = ylo.min(*y);
        yhi = yhi.max(*y);
    }
    let xspan = (xhi - xlo).max(1e-9);
    let yspan = (yhi - ylo).max(1e-9);
    let sx = |x: f64| MARGIN + (W - 2.0 * MARGIN) * (x - xlo) / xspan;
    let sy = |y: f64| H - MARGIN - (H - 2.0 * MARGIN) * (y - ylo) / yspan;
    let mut out = svg_header();
    for (x, y) in points {
        out.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"1.4\" fill=\"#1f77b4\" fill-opacity=\"0.6\"/>\n",
            sx(*x),
            sy(*y)
        ));
    }
    out.push_str("</svg>\n");
    out
}

/// Histogram of distortion ratios.
pub fn distortion_histogram(values: &[f64], bins: usize) -> String {
    if values.is_empty() || bins == 0 {
        return empty_plot("distortion");
    }
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(1e-12);
    let mut counts = vec![0usize; bins];
    for v in values {
        let b = (((v - lo) / span) * bins as f64).floor() as usize;
        counts[b.min(bins - 1)] += 1;
    }
    let cmax = *counts.iter().max().unwrap() as f64;
    let bw = (W - 2.0 * MARGIN) / bins as f64;
    let mut out = svg_header();
    for (i, c) in counts.iter().enumerate() {
        let h = (H - 2.0 * MARGIN) * (*c as f64) / cmax;
        out.push_str(&format!(
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" \
             fill=\"#2ca02c\" stroke=\"black\" stroke-width=\"0.4\"/>\n",
            MARGIN + bw * i as f64,
            H - MARGIN - h,
            bw,
            h
        ));
    }
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"monospace\" \
         font-size=\"12\">distortion ratio [{lo:.4}, {hi:.4}]</text>\n",
        W / 2.0,
        H - 18.0
    ));
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plots_are_deterministic_and_handle_empty_data() {
        let series = vec![Series {
            label: "net".into(),
            points: vec![(1.0, 3.0), (2.0, 9.0), (3.0, 27.0)],
        }];
        let a = growth_curve(&series);
        let b = growth_curve(&series);
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));

        let empty = growth_curve(&[]);
        assert!(empty.contains("no data"));
        assert!(distortion_histogram(&[], 10).contains("no data"));
        assert!(embedding_scatter(&[]).contains("no data"));
    }
}
