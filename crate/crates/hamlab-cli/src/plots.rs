//! Plot emission. Every suite report gets a gnuplot-ready data file and a
//! rendering script next to its CSV tables; `--svg` additionally writes a
//! dependency-free SVG of the same series.

use hamlab::bounds::CsvTable;
use std::fmt::Write as _;

/// Which table and columns a suite's headline plot draws.
pub struct PlotSpec {
    pub table: &'static str,
    pub x: &'static str,
    pub y: &'static str,
    /// Columns whose joined values name a series.
    pub series: &'static [&'static str],
}

pub fn suite_plot_spec(suite: &str) -> Option<PlotSpec> {
    let spec = |table, x, y, series| {
        Some(PlotSpec {
            table,
            x,
            y,
            series,
        })
    };
    match suite {
        "oracle" => spec("oracle", "n", "float_dev", &["m"]),
        "dominant" => spec("dominant", "n", "epsilon", &["m"]),
        "decay" => spec("decay", "n", "d_min", &["m"]),
        "square-sum" => spec("square_sum", "n", "sup_r", &["m", "t", "family"]),
        "reparam" => spec("reparam", "n", "sup_diff", &["m", "P"]),
        "bigkchoice" => spec("bigkchoice", "n", "c_star", &["m"]),
        "blbound" => spec("blbound", "n", "c_star", &["m"]),
        "transfer" => spec("transfer", "n", "c_star", &["m"]),
        "ns" => spec("ns", "n", "c1", &["m"]),
        "weak11" => spec("weak11", "n", "delta0_witness", &["m", "op"]),
        "norms" => spec("norms", "n", "best", &["m", "p"]),
        _ => None,
    }
}

/// One labeled line: finite points sorted by x.
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Numeric value of a CSV cell: decimal (including `inf`) or `num/den`.
pub fn parse_cell(s: &str) -> Option<f64> {
    if let Ok(v) = s.parse::<f64>() {
        return Some(v);
    }
    let (p, q) = s.split_once('/')?;
    let p: f64 = p.trim().parse().ok()?;
    let q: f64 = q.trim().parse().ok()?;
    Some(p / q)
}

/// Group a table's rows into plot series per the spec, keeping only finite
/// points. Series appear in first-occurrence order; points sort by x.
pub fn extract_series(table: &CsvTable, spec: &PlotSpec) -> Vec<Series> {
    let col = |name: &str| table.header.iter().position(|h| h == name);
    let (Some(xi), Some(yi)) = (col(spec.x), col(spec.y)) else {
        return Vec::new();
    };
    let group_cols: Vec<(usize, &str)> = spec
        .series
        .iter()
        .filter_map(|name| col(name).map(|i| (i, *name)))
        .collect();
    let mut out: Vec<Series> = Vec::new();
    for row in &table.rows {
        let (Some(x), Some(y)) = (
            row.get(xi).and_then(|c| parse_cell(c)),
            row.get(yi).and_then(|c| parse_cell(c)),
        ) else {
            continue;
        };
        if !x.is_finite() || !y.is_finite() {
            continue;
        }
        let label = if group_cols.is_empty() {
            spec.y.to_string()
        } else {
            group_cols
                .iter()
                .map(|(i, name)| format!("{name}={}", row[*i]))
                .collect::<Vec<_>>()
                .join(" ")
        };
        match out.iter_mut().find(|s| s.label == label) {
            Some(s) => s.points.push((x, y)),
            None => out.push(Series {
                label,
                points: vec![(x, y)],
            }),
        }
    }
    for s in &mut out {
        s.points
            .sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite x"));
    }
    out.retain(|s| !s.points.is_empty());
    out
}

/// Space-separated data blocks, one per series, separated by two blank
/// lines so gnuplot's `index` selects them.
pub fn render_dat(series: &[Series]) -> String {
    let mut out = String::new();
    for (i, s) in series.iter().enumerate() {
        if i > 0 {
            out.push_str("\n\n");
        }
        let _ = writeln!(out, "# {}", s.label);
        for (x, y) in &s.points {
            let _ = writeln!(out, "{x} {y}");
        }
    }
    out
}

fn log2_axis(points: impl Iterator<Item = f64> + Clone) -> bool {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for v in points {
        min = min.min(v);
        max = max.max(v);
    }
    min > 0.0 && max / min >= 8.0
}

/// A gnuplot script that renders `dat_file` to `svg_out`.
pub fn render_plt(
    title: &str,
    xlab: &str,
    ylab: &str,
    dat_file: &str,
    svg_out: &str,
    series: &[Series],
) -> String {
    let quote = |s: &str| s.replace('\'', "''");
    let mut out = String::new();
    let _ = writeln!(out, "# Render with: gnuplot <this file>   (writes {svg_out})");
    let _ = writeln!(
        out,
        "set terminal svg size 920,560 dynamic background '#ffffff'"
    );
    let _ = writeln!(out, "set output '{}'", quote(svg_out));
    let _ = writeln!(out, "set title '{}'", quote(title));
    let _ = writeln!(out, "set xlabel '{}'", quote(xlab));
    let _ = writeln!(out, "set ylabel '{}'", quote(ylab));
    let _ = writeln!(out, "set key outside right top");
    let _ = writeln!(out, "set grid");
    if log2_axis(series.iter().flat_map(|s| s.points.iter().map(|p| p.0))) {
        let _ = writeln!(out, "set logscale x 2");
    }
    out.push_str("plot ");
    for (i, s) in series.iter().enumerate() {
        if i > 0 {
            out.push_str(", \\\n     ");
        }
        let _ = write!(
            out,
            "'{}' index {i} using 1:2 with linespoints title '{}'",
            quote(dat_file),
            quote(&s.label)
        );
    }
    out.push('\n');
    out
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
    "#bcbd22", "#7f7f7f",
];

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if v.abs() >= 1e5 || v.abs() < 1e-3 {
        return format!("{v:.2e}");
    }
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

/// A self-contained SVG line chart of the same series the gnuplot script
/// draws. Byte-deterministic for a given input.
pub fn render_svg(title: &str, xlab: &str, ylab: &str, series: &[Series]) -> String {
    const W: f64 = 920.0;
    const H: f64 = 560.0;
    const L: f64 = 82.0;
    const R: f64 = 200.0;
    const T: f64 = 48.0;
    const B: f64 = 58.0;
    let pw = W - L - R;
    let ph = H - T - B;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {W} {H}\" \
         font-family=\"system-ui, sans-serif\">"
    );
    let _ = writeln!(svg, "<rect width=\"{W}\" height=\"{H}\" fill=\"#ffffff\"/>");
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"24\" font-size=\"16\" text-anchor=\"middle\">{}</text>",
        L + pw / 2.0,
        esc(title)
    );

    let pts: Vec<(f64, f64)> = series.iter().flat_map(|s| s.points.iter().copied()).collect();
    if pts.is_empty() {
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\">no finite data</text>",
            L + pw / 2.0,
            T + ph / 2.0
        );
        svg.push_str("</svg>\n");
        return svg;
    }

    let logx = log2_axis(pts.iter().map(|p| p.0));
    let tx = |x: f64| if logx { x.log2() } else { x };
    let (mut x0, mut x1) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
            (a.min(tx(p.0)), b.max(tx(p.0)))
        });
    let (mut y0, mut y1) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
            (a.min(p.1), b.max(p.1))
        });
    if x1 - x0 < 1e-12 {
        x0 -= 1.0;
        x1 += 1.0;
    }
    if y1 - y0 < 1e-12 {
        let pad = y0.abs().max(1.0) * 0.1;
        y0 -= pad;
        y1 += pad;
    } else {
        let pad = (y1 - y0) * 0.06;
        y0 -= pad;
        y1 += pad;
    }
    let fx = |x: f64| L + (tx(x) - x0) / (x1 - x0) * pw;
    let fy = |y: f64| T + ph - (y - y0) / (y1 - y0) * ph;

    // Frame and gridlines with tick labels.
    let _ = writeln!(
        svg,
        "<rect x=\"{L}\" y=\"{T}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" stroke=\"#444444\"/>"
    );
    let xticks: Vec<f64> = if logx {
        let lo = x0.ceil() as i64;
        let hi = x1.floor() as i64;
        let step = (((hi - lo) as usize + 8) / 9).max(1) as i64;
        (lo..=hi)
            .step_by(step as usize)
            .map(|k| (k as f64).exp2())
            .collect()
    } else {
        (0..=4).map(|i| x0 + (x1 - x0) * i as f64 / 4.0).collect()
    };
    for xv in &xticks {
        let px = fx(*xv);
        let _ = writeln!(
            svg,
            "<line x1=\"{px:.2}\" y1=\"{T}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"#dddddd\"/>",
            T + ph
        );
        let _ = writeln!(
            svg,
            "<text x=\"{px:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"middle\">{}</text>",
            T + ph + 16.0,
            fmt_tick(*xv)
        );
    }
    for i in 0..=4 {
        let yv = y0 + (y1 - y0) * i as f64 / 4.0;
        let py = fy(yv);
        let _ = writeln!(
            svg,
            "<line x1=\"{L}\" y1=\"{py:.2}\" x2=\"{:.2}\" y2=\"{py:.2}\" stroke=\"#dddddd\"/>",
            L + pw
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\">{}</text>",
            L - 6.0,
            py + 4.0,
            fmt_tick(yv)
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">{}</text>",
        L + pw / 2.0,
        H - 14.0,
        esc(xlab)
    );
    let _ = writeln!(
        svg,
        "<text x=\"18\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\" \
         transform=\"rotate(-90 18 {:.2})\">{}</text>",
        T + ph / 2.0,
        T + ph / 2.0,
        esc(ylab)
    );

    // Series: polyline plus point markers, palette cycling.
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if s.points.len() >= 2 {
            let path: Vec<String> = s
                .points
                .iter()
                .map(|(x, y)| format!("{:.2},{:.2}", fx(*x), fy(*y)))
                .collect();
            let _ = writeln!(
                svg,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.6\"/>",
                path.join(" ")
            );
        }
        for (x, y) in &s.points {
            let _ = writeln!(
                svg,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.6\" fill=\"{color}\"/>",
                fx(*x),
                fy(*y)
            );
        }
        let ly = T + 12.0 + i as f64 * 17.0;
        let _ = writeln!(
            svg,
            "<line x1=\"{:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" \
             stroke=\"{color}\" stroke-width=\"2\"/>",
            W - R + 10.0,
            W - R + 30.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\">{}</text>",
            W - R + 36.0,
            ly + 4.0,
            esc(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo_table() -> CsvTable {
        let mut t = CsvTable::new("decay", &["m", "n", "d_min", "ln_m"]);
        t.push(vec!["2".into(), "8".into(), "0.5".into(), "0.69".into()]);
        t.push(vec!["2".into(), "16".into(), "0.4".into(), "0.69".into()]);
        t.push(vec!["3".into(), "8".into(), "0.7".into(), "1.09".into()]);
        t.push(vec!["3".into(), "16".into(), "inf".into(), "1.09".into()]);
        t
    }

    #[test]
    fn series_group_by_label_and_drop_nonfinite_points() {
        let spec = suite_plot_spec("decay").unwrap();
        let series = extract_series(&demo_table(), &spec);
        assert_eq!(series.len(), 2);
        assert_eq!(series[0].label, "m=2");
        assert_eq!(series[0].points, vec![(8.0, 0.5), (16.0, 0.4)]);
        assert_eq!(series[1].points, vec![(8.0, 0.7)]);
    }

    #[test]
    fn dat_blocks_are_separated_by_two_blank_lines() {
        let spec = suite_plot_spec("decay").unwrap();
        let dat = render_dat(&extract_series(&demo_table(), &spec));
        assert!(dat.contains("# m=2\n8 0.5\n16 0.4\n\n\n# m=3\n"));
    }

    #[test]
    fn cells_parse_as_decimals_or_ratios() {
        assert_eq!(parse_cell("0.25"), Some(0.25));
        assert_eq!(parse_cell("1/4"), Some(0.25));
        assert_eq!(parse_cell("-1/8"), Some(-0.125));
        assert!(parse_cell("inf").unwrap().is_infinite());
        assert_eq!(parse_cell("x"), None);
    }

    #[test]
    fn scripts_and_svg_reference_every_series() {
        let spec = suite_plot_spec("decay").unwrap();
        let series = extract_series(&demo_table(), &spec);
        let plt = render_plt("decay", "n", "d_min", "plot.dat", "render.svg", &series);
        assert!(plt.contains("'plot.dat' index 0") && plt.contains("index 1"));
        assert!(plt.contains("title 'm=3'"));
        assert!(plt.contains("set output 'render.svg'"));
        let svg = render_svg("decay", "n", "d_min", &series);
        assert!(svg.contains("m=2") && svg.contains("m=3"));
        assert_eq!(svg, render_svg("decay", "n", "d_min", &series));
    }
}
