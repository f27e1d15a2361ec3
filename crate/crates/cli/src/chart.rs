//! Minimal deterministic SVG line charts: series overlays plus trade
//! markers. Identical input always yields byte-identical output.

use thiserror::Error;

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 48.0;

pub const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#7f7f7f",
];

#[derive(Debug, Error)]
pub enum ChartError {
    #[error("nothing to draw: no overlay supplies data")]
    EmptyInput,
}

/// One polyline; `values` are plotted against their index.
#[derive(Debug, Clone)]
pub struct SeriesOverlay {
    pub label: String,
    pub color: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkerKind {
    Entry,
    Exit,
}

/// A trade marker at bar `index`, drawn on the price scale.
#[derive(Debug, Clone)]
pub struct TradeMarker {
    pub index: usize,
    pub price: f64,
    pub kind: MarkerKind,
}

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders overlays and markers into a complete standalone SVG document.
pub fn emit_svg_chart(
    title: &str,
    x_labels: (&str, &str),
    overlays: &[SeriesOverlay],
    markers: &[TradeMarker],
) -> Result<String, ChartError> {
    let n = overlays.iter().map(|o| o.values.len()).max().unwrap_or(0);
    if n == 0 {
        return Err(ChartError::EmptyInput);
    }

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for overlay in overlays {
        for &v in &overlay.values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    for marker in markers {
        lo = lo.min(marker.price);
        hi = hi.max(marker.price);
    }
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(ChartError::EmptyInput);
    }
    if hi - lo < 1e-12 {
        // Flat data still deserves a visible line mid-chart.
        lo -= 1.0;
        hi += 1.0;
    }
    let pad = (hi - lo) * 0.05;
    let (lo, hi) = (lo - pad, hi + pad);

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x = |i: usize| {
        if n == 1 {
            MARGIN_LEFT + plot_w / 2.0
        } else {
            MARGIN_LEFT + plot_w * i as f64 / (n - 1) as f64
        }
    };
    let y = |v: f64| MARGIN_TOP + plot_h * (1.0 - (v - lo) / (hi - lo));

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n",
        fmt(WIDTH / 2.0),
        escape(title)
    ));

    // Axes and horizontal gridlines with value labels.
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#333333\"/>\n",
        fmt(MARGIN_LEFT),
        fmt(MARGIN_TOP),
        fmt(MARGIN_LEFT),
        fmt(HEIGHT - MARGIN_BOTTOM)
    ));
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#333333\"/>\n",
        fmt(MARGIN_LEFT),
        fmt(HEIGHT - MARGIN_BOTTOM),
        fmt(WIDTH - MARGIN_RIGHT),
        fmt(HEIGHT - MARGIN_BOTTOM)
    ));
    for tick in 0..=4 {
        let value = lo + (hi - lo) * tick as f64 / 4.0;
        let ty = y(value);
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#dddddd\"/>\n",
            fmt(MARGIN_LEFT),
            fmt(ty),
            fmt(WIDTH - MARGIN_RIGHT),
            fmt(ty)
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
            fmt(MARGIN_LEFT - 6.0),
            fmt(ty + 4.0),
            fmt(value)
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
        fmt(MARGIN_LEFT),
        fmt(HEIGHT - MARGIN_BOTTOM + 20.0),
        escape(x_labels.0)
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
        fmt(WIDTH - MARGIN_RIGHT),
        fmt(HEIGHT - MARGIN_BOTTOM + 20.0),
        escape(x_labels.1)
    ));

    for (oi, overlay) in overlays.iter().enumerate() {
        if overlay.values.is_empty() {
            continue;
        }
        let points: Vec<String> = overlay
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| format!("{},{}", fmt(x(i)), fmt(y(v))))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            overlay.color,
            points.join(" ")
        ));
        // Legend swatch and label.
        let ly = MARGIN_TOP + 16.0 * oi as f64;
        svg.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"4\" fill=\"{}\"/>\n",
            fmt(MARGIN_LEFT + 8.0),
            fmt(ly),
            overlay.color
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
            fmt(MARGIN_LEFT + 26.0),
            fmt(ly + 6.0),
            escape(&overlay.label)
        ));
    }

    for marker in markers {
        let (fill, class) = match marker.kind {
            MarkerKind::Entry => ("#2ca02c", "entry"),
            MarkerKind::Exit => ("#d62728", "exit"),
        };
        svg.push_str(&format!(
            "<circle class=\"{class}\" cx=\"{}\" cy=\"{}\" r=\"5\" fill=\"{fill}\" stroke=\"black\"/>\n",
            fmt(x(marker.index)),
            fmt(y(marker.price))
        ));
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}
