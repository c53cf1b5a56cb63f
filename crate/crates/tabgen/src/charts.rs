//! Real-versus-synthetic frequency tables and static SVG renderings.

use std::fmt::Write as _;

use tabgen_core::metrics::FidelityReport;
use tabgen_core::table::{ColumnData, DataTable};

/// Equal-width bins used for continuous columns in charts.
pub const CHART_BINS: usize = 20;

/// One bar group: label, real frequency, synthetic frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct Bar {
    pub label: String,
    pub real: f64,
    pub synth: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnChart {
    pub column: String,
    pub continuous: bool,
    pub bars: Vec<Bar>,
}

fn relative(counts: &[usize]) -> Vec<f64> {
    let n: usize = counts.iter().sum();
    counts
        .iter()
        .map(|&c| if n == 0 { 0.0 } else { c as f64 / n as f64 })
        .collect()
}

fn bin_counts(values: &[Option<f64>], lo: f64, hi: f64, bins: usize) -> Vec<usize> {
    let mut counts = vec![0; bins];
    let span = hi - lo;
    for x in values.iter().flatten() {
        let b = if span > 0.0 {
            (((x - lo) / span) * bins as f64).floor().clamp(0.0, (bins - 1) as f64) as usize
        } else {
            0
        };
        counts[b] += 1;
    }
    counts
}

/// Frequencies for column `c`. Continuous columns use [`CHART_BINS`] bins
/// over the real range; synthetic values outside it fall in the edge bins.
pub fn column_chart(real: &DataTable, synth: &DataTable, c: usize) -> ColumnChart {
    let spec = real.spec(c);
    match (real.column(c), synth.column(c)) {
        (ColumnData::Continuous(r), ColumnData::Continuous(s)) => {
            let (lo, hi) = r
                .iter()
                .flatten()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
            let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 0.0) };
            let width = (hi - lo) / CHART_BINS as f64;
            let rf = relative(&bin_counts(r, lo, hi, CHART_BINS));
            let sf = relative(&bin_counts(s, lo, hi, CHART_BINS));
            let bars = (0..CHART_BINS)
                .map(|b| Bar {
                    label: format!("[{}, {})", lo + b as f64 * width, lo + (b + 1) as f64 * width),
                    real: rf[b],
                    synth: sf[b],
                })
                .collect();
            ColumnChart {
                column: spec.name.clone(),
                continuous: true,
                bars,
            }
        }
        (ColumnData::Categorical(r), ColumnData::Categorical(s)) => {
            let k = spec.categories.len();
            let count = |v: &[Option<u32>]| {
                let mut counts = vec![0; k];
                for i in v.iter().flatten() {
                    counts[*i as usize] += 1;
                }
                relative(&counts)
            };
            let (rf, sf) = (count(r), count(s));
            let bars = spec
                .categories
                .iter()
                .enumerate()
                .map(|(i, label)| Bar {
                    label: label.clone(),
                    real: rf[i],
                    synth: sf[i],
                })
                .collect();
            ColumnChart {
                column: spec.name.clone(),
                continuous: false,
                bars,
            }
        }
        _ => unreachable!("schemas are checked before charting"),
    }
}

pub fn chart_csv(chart: &ColumnChart) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let head = if chart.continuous { "bin" } else { "category" };
    w.write_record([head, "real", "synthetic"]).expect("in-memory write");
    for b in &chart.bars {
        w.write_record([b.label.clone(), format!("{}", b.real), format!("{}", b.synth)])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

const REAL_COLOR: &str = "#1f77b4";
const SYNTH_COLOR: &str = "#ff7f0e";

/// Grouped bars, real on the left of each group.
pub fn chart_svg(chart: &ColumnChart) -> String {
    let (w, h) = (640.0, 320.0);
    let (left, right, top, bottom) = (50.0, 10.0, 30.0, 60.0);
    let plot_w = w - left - right;
    let plot_h = h - top - bottom;
    let n = chart.bars.len().max(1) as f64;
    let peak = chart
        .bars
        .iter()
        .map(|b| b.real.max(b.synth))
        .fold(0.0, f64::max)
        .max(1e-12);
    let group = plot_w / n;
    let bar = group * 0.4;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="18" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        w / 2.0,
        escape(&chart.column)
    );
    let _ = writeln!(
        s,
        r#"<line x1="{left}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        top + plot_h,
        left + plot_w,
        top + plot_h
    );
    let _ = writeln!(s, r#"<line x1="{left}" y1="{top}" x2="{left}" y2="{}" stroke="black"/>"#, top + plot_h);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="10" text-anchor="end">{:.3}</text>"#,
        left - 4.0,
        top + 4.0,
        peak
    );
    for (i, b) in chart.bars.iter().enumerate() {
        let x0 = left + i as f64 * group + group * 0.1;
        for (k, (v, color)) in [(b.real, REAL_COLOR), (b.synth, SYNTH_COLOR)].into_iter().enumerate() {
            let bh = v / peak * plot_h;
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{color}"/>"#,
                x0 + k as f64 * bar,
                top + plot_h - bh,
                bar,
                bh
            );
        }
        if chart.bars.len() <= 30 {
            let cx = x0 + bar;
            let cy = top + plot_h + 12.0;
            let _ = writeln!(
                s,
                r#"<text x="{cx:.2}" y="{cy:.2}" font-family="sans-serif" font-size="8" text-anchor="end" transform="rotate(-45 {cx:.2} {cy:.2})">{}</text>"#,
                escape(&b.label)
            );
        }
    }
    let ly = h - 10.0;
    let _ = writeln!(s, r#"<rect x="{left}" y="{}" width="10" height="10" fill="{REAL_COLOR}"/>"#, ly - 9.0);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{ly}" font-family="sans-serif" font-size="10">real</text>"#,
        left + 14.0
    );
    let _ = writeln!(
        s,
        r#"<rect x="{}" y="{}" width="10" height="10" fill="{SYNTH_COLOR}"/>"#,
        left + 60.0,
        ly - 9.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{ly}" font-family="sans-serif" font-size="10">synthetic</text>"#,
        left + 74.0
    );
    s.push_str("</svg>\n");
    s
}

/// Pair-trend matrix as a grey-scale heat map: darker is more similar.
pub fn heatmap_svg(report: &FidelityReport) -> String {
    let names: Vec<&str> = report.columns.iter().map(|c| c.name.as_str()).collect();
    let n = names.len();
    let cell = 40.0;
    let margin = 110.0;
    let size = margin + cell * n as f64 + 10.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    for (i, name) in names.iter().enumerate() {
        let c = margin + (i as f64 + 0.5) * cell;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{c:.2}" font-family="sans-serif" font-size="10" text-anchor="end" dominant-baseline="middle">{}</text>"#,
            margin - 4.0,
            escape(name)
        );
        let _ = writeln!(
            s,
            r#"<text x="{c:.2}" y="{}" font-family="sans-serif" font-size="10" text-anchor="start" transform="rotate(-60 {c:.2} {})">{}</text>"#,
            margin - 4.0,
            margin - 4.0,
            escape(name)
        );
    }
    for i in 0..n {
        for j in 0..n {
            let x = margin + j as f64 * cell;
            let y = margin + i as f64 * cell;
            match report.pairs[i][j] {
                Some(v) => {
                    let g = (255.0 * (1.0 - v.clamp(0.0, 1.0))).round() as u8;
                    let text = if g < 128 { "white" } else { "black" };
                    let _ = writeln!(
                        s,
                        r#"<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="rgb({g},{g},{g})" stroke="white"/>"#
                    );
                    let _ = writeln!(
                        s,
                        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="9" fill="{text}" text-anchor="middle" dominant-baseline="middle">{v:.2}</text>"#,
                        x + cell / 2.0,
                        y + cell / 2.0
                    );
                }
                None => {
                    let _ = writeln!(
                        s,
                        r#"<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="none" stroke="rgb(204,204,204)"/>"#
                    );
                }
            }
        }
    }
    s.push_str("</svg>\n");
    s
}

/// File-name-safe stem for a column.
pub fn file_stem(index: usize, name: &str) -> String {
    let clean: String = name
        .chars()
        .map(|ch| if ch.is_ascii_alphanumeric() || ch == '-' || ch == '_' { ch } else { '_' })
        .collect();
    format!("{index:02}_{clean}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use tabgen_core::table::ColumnSpec;

    fn tables() -> (DataTable, DataTable) {
        let schema = vec![ColumnSpec::continuous("x"), ColumnSpec::categorical("c", ["a", "b"])];
        let real = DataTable::new(
            schema.clone(),
            vec![
                ColumnData::Continuous((0..=20).map(|i| Some(i as f64)).collect()),
                ColumnData::Categorical((0..=20).map(|i| Some((i % 4 == 0) as u32)).collect()),
            ],
        )
        .unwrap();
        let synth = DataTable::new(
            schema,
            vec![
                ColumnData::Continuous(vec![Some(-5.0), Some(100.0)]),
                ColumnData::Categorical(vec![Some(0), Some(0)]),
            ],
        )
        .unwrap();
        (real, synth)
    }

    #[test]
    fn continuous_chart_has_twenty_bins_and_clamps() {
        let (r, s) = tables();
        let c = column_chart(&r, &s, 0);
        assert_eq!(c.bars.len(), CHART_BINS);
        assert!((c.bars.iter().map(|b| b.real).sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(c.bars[0].synth, 0.5);
        assert_eq!(c.bars[CHART_BINS - 1].synth, 0.5);
    }

    #[test]
    fn categorical_chart_frequencies() {
        let (r, s) = tables();
        let c = column_chart(&r, &s, 1);
        assert_eq!(c.bars.len(), 2);
        assert_eq!(c.bars[0].synth, 1.0);
        assert!((c.bars[1].real - 6.0 / 21.0).abs() < 1e-12);
        let csv = chart_csv(&c);
        assert!(csv.starts_with("category,real,synthetic\n"));
    }

    #[test]
    fn svg_is_well_formed_enough() {
        let (r, s) = tables();
        let svg = chart_svg(&column_chart(&r, &s, 0));
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<rect").count(), 2 * CHART_BINS + 2);
    }

    #[test]
    fn stems_are_safe() {
        assert_eq!(file_stem(3, "a b/c"), "03_a_b_c");
    }
}
