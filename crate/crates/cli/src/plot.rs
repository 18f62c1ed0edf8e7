//! Log-log SVG of a report's series with its fitted power laws.

use plotters::prelude::*;

use critnls_core::verify::{ExperimentReport, Series};

use crate::error::{CliError, Result};

const SIZE: (u32, u32) = (960, 640);
const LEGEND_ENTRIES: usize = 14;

fn positive(s: &Series) -> Vec<(f64, f64)> {
    s.x.iter().zip(&s.y).filter(|(x, y)| x.is_finite() && y.is_finite() && **x > 0.0 && **y > 0.0).map(|(x, y)| (*x, *y)).collect()
}

/// Padded range on a log axis.
fn span(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo == hi {
        (lo / 2.0, hi * 2.0)
    } else {
        let pad = (hi / lo).powf(0.04);
        (lo / pad, hi * pad)
    }
}

fn err(e: impl std::fmt::Display) -> CliError {
    CliError::Plot(e.to_string())
}

/// `None` when the report has nothing positive to draw.
pub fn render(report: &ExperimentReport) -> Result<Option<String>> {
    let curves: Vec<(&str, Vec<(f64, f64)>)> =
        report.series.iter().map(|s| (s.label.as_str(), positive(s))).filter(|c| !c.1.is_empty()).collect();
    if curves.is_empty() {
        return Ok(None);
    }
    let fits: Vec<(String, [(f64, f64); 2])> = report
        .fits
        .iter()
        .filter(|f| f.slope.is_finite() && f.intercept.is_finite() && f.range.0 > 0.0 && f.range.1 > f.range.0)
        .map(|f| {
            let at = |x: f64| (x, (f.intercept + f.slope * x.ln()).exp());
            (format!("fit {}: slope {:.3}", f.label, f.slope), [at(f.range.0), at(f.range.1)])
        })
        .collect();
    let points = || curves.iter().flat_map(|c| c.1.iter().copied()).chain(fits.iter().flat_map(|f| f.1));
    let (x0, x1) = span(points().map(|p| p.0));
    let (y0, y1) = span(points().map(|p| p.1));

    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, SIZE).into_drawing_area();
        root.fill(&WHITE).map_err(err)?;
        let title = format!("{}: {:?}", report.id, report.verdict).to_lowercase();
        let mut chart = ChartBuilder::on(&root)
            .caption(title, ("sans-serif", 20))
            .margin(14)
            .x_label_area_size(40)
            .y_label_area_size(70)
            .build_cartesian_2d((x0..x1).log_scale(), (y0..y1).log_scale())
            .map_err(err)?;
        chart.configure_mesh().x_labels(8).y_labels(8).draw().map_err(err)?;

        let mut entries = 0;
        for (i, (label, pts)) in curves.iter().enumerate() {
            let color = Palette99::pick(i).to_rgba();
            let line = chart.draw_series(LineSeries::new(pts.iter().copied(), color.stroke_width(1))).map_err(err)?;
            if entries < LEGEND_ENTRIES {
                line.label(*label).legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], color.stroke_width(2)));
                entries += 1;
            }
            chart.draw_series(pts.iter().map(|&p| Circle::new(p, 2, color.filled()))).map_err(err)?;
        }
        for (label, seg) in &fits {
            let line = chart.draw_series(DashedLineSeries::new(seg.iter().copied(), 6, 4, BLACK.stroke_width(1))).map_err(err)?;
            if entries < LEGEND_ENTRIES {
                line.label(label.as_str()).legend(|(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], BLACK.stroke_width(1)));
                entries += 1;
            }
        }
        chart
            .configure_series_labels()
            .position(SeriesLabelPosition::LowerLeft)
            .label_font(("sans-serif", 11))
            .background_style(WHITE.mix(0.85))
            .border_style(BLACK)
            .draw()
            .map_err(err)?;
        root.present().map_err(err)?;
    }
    Ok(Some(svg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use critnls_core::verify::{Fit, Sweep};

    fn report() -> ExperimentReport {
        let sweep = Sweep { dims: vec![3], seeds: vec![], schedule: vec![], description: String::new() };
        ExperimentReport::new("t", sweep, vec![])
    }

    #[test]
    fn nothing_positive_means_no_plot() {
        let mut r = report();
        r.series("zero", vec![0.0, 1.0], vec![1.0, 0.0]);
        assert!(render(&r).unwrap().is_none());
    }

    #[test]
    fn draws_series_and_fits_deterministically() {
        let mut r = report();
        let x = vec![1.0, 10.0, 100.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| v.powf(-1.5)).collect();
        r.fit(Fit::power_law("decay", &x, &y), "decay");
        r.series("decay", x, y);
        let a = render(&r).unwrap().unwrap();
        assert!(a.starts_with("<svg") && a.contains("slope -1.500"), "{a}");
        assert_eq!(a, render(&r).unwrap().unwrap());
    }
}
