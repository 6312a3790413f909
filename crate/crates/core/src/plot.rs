//! Deterministic SVG rendering of delay curves: fixed canvas, linear axes,
//! one polyline per curve with extrapolated segments dashed, and a legend in
//! input order. The output is plain text with no timestamps or randomness,
//! so identical inputs render byte-identical files.

use crate::error::{Error, Result};
use crate::fitting::Curve;

/// One labeled curve to draw.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSeries {
    /// Legend label.
    pub label: String,
    /// The curve; all series in one plot must share a time unit.
    pub curve: Curve,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 520.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 24.0;
const MARGIN_BOTTOM: f64 = 56.0;
const N_TICKS: usize = 6;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

/// Renders the series to a standalone SVG document.
pub fn render_svg(series: &[PlotSeries]) -> Result<String> {
    if series.is_empty() {
        return Err(Error::Domain("plot requires at least one curve".into()));
    }
    let unit = series[0].curve.time_unit;
    if series.iter().any(|s| s.curve.time_unit != unit) {
        return Err(Error::UnitMismatch);
    }
    if series.iter().any(|s| s.curve.is_empty()) {
        return Err(Error::EmptyDataset);
    }

    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for s in series {
        for &x in &s.curve.f_grid {
            x_min = x_min.min(x);
            x_max = x_max.max(x);
        }
        for &y in &s.curve.values {
            if !y.is_finite() {
                return Err(Error::Domain("curve contains a non-finite value".into()));
            }
            y_min = y_min.min(y);
            y_max = y_max.max(y);
        }
    }
    let y_span = y_max - y_min;
    let y_pad = if y_span > 0.0 {
        0.05 * y_span
    } else if y_max != 0.0 {
        0.05 * y_max.abs()
    } else {
        1.0
    };
    y_min -= y_pad;
    y_max += y_pad;

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let px = |x: f64| {
        if x_max > x_min {
            MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w
        } else {
            MARGIN_LEFT + 0.5 * plot_w
        }
    };
    let py = |y: f64| MARGIN_TOP + (y_max - y) / (y_max - y_min) * plot_h;

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    out.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"#ffffff\"/>\n"
    ));

    let x_axis_y = HEIGHT - MARGIN_BOTTOM;
    out.push_str(&format!(
        "  <line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#000000\" stroke-width=\"1\"/>\n",
        MARGIN_LEFT,
        x_axis_y,
        WIDTH - MARGIN_RIGHT,
        x_axis_y
    ));
    out.push_str(&format!(
        "  <line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#000000\" stroke-width=\"1\"/>\n",
        MARGIN_LEFT, MARGIN_TOP, MARGIN_LEFT, x_axis_y
    ));

    for k in 0..N_TICKS {
        let t = k as f64 / (N_TICKS - 1) as f64;
        let xv = x_min + t * (x_max - x_min);
        let xp = px(xv);
        out.push_str(&format!(
            "  <line x1=\"{xp:.2}\" y1=\"{:.2}\" x2=\"{xp:.2}\" y2=\"{:.2}\" stroke=\"#000000\" stroke-width=\"1\"/>\n",
            x_axis_y,
            x_axis_y + 5.0
        ));
        out.push_str(&format!(
            "  <text x=\"{xp:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
            x_axis_y + 18.0,
            fmt_tick(xv)
        ));

        let yv = y_min + t * (y_max - y_min);
        let yp = py(yv);
        out.push_str(&format!(
            "  <line x1=\"{:.2}\" y1=\"{yp:.2}\" x2=\"{:.2}\" y2=\"{yp:.2}\" stroke=\"#000000\" stroke-width=\"1\"/>\n",
            MARGIN_LEFT - 5.0,
            MARGIN_LEFT
        ));
        out.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
            MARGIN_LEFT - 8.0,
            yp + 4.0,
            fmt_tick(yv)
        ));
    }

    out.push_str(&format!(
        "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">F (au)</text>\n",
        MARGIN_LEFT + 0.5 * plot_w,
        HEIGHT - 14.0
    ));
    out.push_str(&format!(
        "  <text x=\"18\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.2})\">delay ({unit})</text>\n",
        MARGIN_TOP + 0.5 * plot_h,
        MARGIN_TOP + 0.5 * plot_h
    ));

    for (idx, s) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let c = &s.curve;
        if c.len() == 1 {
            out.push_str(&format!(
                "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>\n",
                px(c.f_grid[0]),
                py(c.values[0])
            ));
            continue;
        }
        // Segments with an extrapolated endpoint are dashed; runs of equal
        // style merge into one polyline.
        let dashed = |i: usize| c.extrapolated_mask[i] || c.extrapolated_mask[i + 1];
        let mut start = 0usize;
        while start + 1 < c.len() {
            let style = dashed(start);
            let mut end = start;
            while end + 1 < c.len() && dashed(end) == style {
                end += 1;
            }
            let mut points = String::new();
            for i in start..=end {
                if i > start {
                    points.push(' ');
                }
                points.push_str(&format!("{:.2},{:.2}", px(c.f_grid[i]), py(c.values[i])));
            }
            let dash = if style { " stroke-dasharray=\"6 4\"" } else { "" };
            out.push_str(&format!(
                "  <polyline points=\"{points}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{dash}/>\n"
            ));
            start = end;
        }
    }

    let legend_x = WIDTH - MARGIN_RIGHT - 170.0;
    for (idx, s) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let y = MARGIN_TOP + 14.0 + 18.0 * idx as f64;
        out.push_str(&format!(
            "  <line x1=\"{legend_x:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            legend_x + 20.0
        ));
        out.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            legend_x + 26.0,
            y + 4.0,
            xml_escape(&s.label)
        ));
    }

    out.push_str("</svg>\n");
    Ok(out)
}

/// Renders and writes the SVG to a file.
pub fn write_svg(path: &std::path::Path, series: &[PlotSeries]) -> Result<()> {
    let svg = render_svg(series)?;
    std::fs::write(path, svg)?;
    Ok(())
}

fn fmt_tick(x: f64) -> String {
    let s = format!("{x:.6}");
    let trimmed = s.trim_end_matches('0').trim_end_matches('.');
    if trimmed.is_empty() || trimmed == "-" {
        "0".into()
    } else {
        trimmed.into()
    }
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::TimeUnit;

    fn curve(grid: &[f64], values: &[f64], unit: TimeUnit, mask: Option<Vec<bool>>) -> Curve {
        let mask = mask.unwrap_or_else(|| vec![false; grid.len()]);
        Curve::new(grid.to_vec(), values.to_vec(), unit, mask).unwrap()
    }

    fn assert_well_formed(svg: &str) {
        let mut reader = quick_xml::Reader::from_str(svg);
        loop {
            match reader.read_event() {
                Ok(quick_xml::events::Event::Eof) => break,
                Ok(_) => {}
                Err(e) => panic!("malformed SVG: {e}"),
            }
        }
    }

    #[test]
    fn renders_two_curves_with_legend() {
        let a = PlotSeries {
            label: "model".into(),
            curve: curve(&[0.05, 0.06, 0.07], &[1.0, 0.8, 0.6], TimeUnit::Atomic, None),
        };
        let b = PlotSeries {
            label: "data".into(),
            curve: curve(&[0.05, 0.06, 0.07], &[1.1, 0.7, 0.5], TimeUnit::Atomic, None),
        };
        let svg = render_svg(&[a, b]).unwrap();
        assert_well_formed(&svg);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains(">model</text>"));
        assert!(svg.contains(">data</text>"));
        assert!(svg.contains("delay (au)"));
        assert!(svg.contains("F (au)"));
        assert!(!svg.contains("stroke-dasharray"));
    }

    #[test]
    fn attosecond_unit_reaches_axis_label() {
        let s = PlotSeries {
            label: "c".into(),
            curve: curve(&[0.05, 0.06], &[1.0, 2.0], TimeUnit::Attosecond, None),
        };
        let svg = render_svg(&[s]).unwrap();
        assert!(svg.contains("delay (as)"));
    }

    #[test]
    fn extrapolated_segments_are_dashed() {
        let s = PlotSeries {
            label: "c".into(),
            curve: curve(
                &[0.05, 0.06, 0.07, 0.08],
                &[1.0, 0.9, 0.8, 0.7],
                TimeUnit::Atomic,
                Some(vec![false, false, false, true]),
            ),
        };
        let svg = render_svg(&[s]).unwrap();
        assert_well_formed(&svg);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("stroke-dasharray=\"6 4\"").count(), 1);
    }

    #[test]
    fn single_point_becomes_a_marker() {
        let s = PlotSeries {
            label: "pt".into(),
            curve: curve(&[0.06], &[1.0], TimeUnit::Atomic, None),
        };
        let svg = render_svg(&[s]).unwrap();
        assert_well_formed(&svg);
        assert!(svg.contains("<circle"));
        assert!(!svg.contains("<polyline"));
    }

    #[test]
    fn mixed_units_are_rejected() {
        let a = PlotSeries {
            label: "a".into(),
            curve: curve(&[0.05, 0.06], &[1.0, 2.0], TimeUnit::Atomic, None),
        };
        let b = PlotSeries {
            label: "b".into(),
            curve: curve(&[0.05, 0.06], &[1.0, 2.0], TimeUnit::Attosecond, None),
        };
        assert!(matches!(render_svg(&[a, b]), Err(Error::UnitMismatch)));
    }

    #[test]
    fn labels_are_escaped() {
        let s = PlotSeries {
            label: "a<b&c".into(),
            curve: curve(&[0.05, 0.06], &[1.0, 1.0], TimeUnit::Atomic, None),
        };
        let svg = render_svg(&[s]).unwrap();
        assert_well_formed(&svg);
        assert!(svg.contains("a&lt;b&amp;c"));
    }

    #[test]
    fn flat_and_empty_edge_cases() {
        // A constant curve still spans a nonzero y range after padding.
        let s = PlotSeries {
            label: "flat".into(),
            curve: curve(&[0.05, 0.06], &[0.0, 0.0], TimeUnit::Atomic, None),
        };
        let svg = render_svg(&[s]).unwrap();
        assert_well_formed(&svg);
        assert!(matches!(render_svg(&[]), Err(Error::Domain(_))));
    }

    #[test]
    fn identical_inputs_render_identical_bytes() {
        let s = PlotSeries {
            label: "c".into(),
            curve: curve(&[0.05, 0.06, 0.07], &[1.0, 0.8, 0.9], TimeUnit::Atomic, None),
        };
        assert_eq!(render_svg(&[s.clone()]).unwrap(), render_svg(&[s]).unwrap());
    }

    #[test]
    fn tick_labels_are_trimmed() {
        assert_eq!(fmt_tick(0.05), "0.05");
        assert_eq!(fmt_tick(1.0), "1");
        assert_eq!(fmt_tick(0.0), "0");
        assert_eq!(fmt_tick(-0.125), "-0.125");
    }
}
