//! Minimal deterministic SVG charts with CSV twins.

use std::fmt::Write;

const WIDTH: f64 = 820.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 44.0;
const BOTTOM: f64 = 56.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub values: Vec<f64>,
}

impl Series {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        Series {
            name: name.into(),
            values,
        }
    }
}

/// Labelled vertical separator.
#[derive(Debug, Clone, PartialEq)]
pub struct Marker {
    pub x: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x: Vec<f64>,
    pub series: Vec<Series>,
    pub markers: Vec<Marker>,
}

/// Grouped bars, one group per category and one bar per series.
#[derive(Debug, Clone, PartialEq)]
pub struct BarChart {
    pub title: String,
    pub y_label: String,
    pub categories: Vec<String>,
    pub series: Vec<Series>,
}

pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c if c.is_control() => out.push(' '),
            c => out.push(c),
        }
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Rounded tick positions covering `[lo, hi]`.
pub fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let (lo, hi) = if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, lo + 0.5)
    };
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let step = mag
        * if norm < 1.5 {
            1.0
        } else if norm < 3.0 {
            2.0
        } else if norm < 7.0 {
            5.0
        } else {
            10.0
        };
    let first = (lo / step).floor() as i64;
    let last = (hi / step).ceil() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn tick_label(v: f64, step: f64) -> String {
    let decimals = if step >= 1.0 {
        0
    } else {
        (-step.log10()).ceil() as usize
    };
    let s = format!("{:.*}", decimals, v);
    // avoid "-0"
    if s.trim_start_matches('-')
        .chars()
        .all(|c| c == '0' || c == '.')
    {
        s.trim_start_matches('-').to_owned()
    } else {
        s
    }
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    ticks: Vec<f64>,
}

impl Frame {
    fn new(x0: f64, x1: f64, values: impl Iterator<Item = f64>) -> Self {
        let (mut lo, mut hi) = (0.0f64, 0.0f64);
        for v in values.filter(|v| v.is_finite()) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let ticks = nice_ticks(lo, hi);
        let (y0, y1) = (ticks[0], *ticks.last().expect("at least one tick"));
        let x1 = if x1 > x0 { x1 } else { x0 + 1.0 };
        Frame {
            x0,
            x1,
            y0,
            y1,
            ticks,
        }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn open(out: &mut String, title: &str, y_label: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        out,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
        (WIDTH - RIGHT + LEFT) / 2.0,
        escape(title)
    );
    let _ = writeln!(
        out,
        r#"<text transform="translate(18 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
        (HEIGHT - BOTTOM + TOP) / 2.0,
        escape(y_label)
    );
}

fn y_axis(out: &mut String, f: &Frame) {
    let step = if f.ticks.len() > 1 {
        f.ticks[1] - f.ticks[0]
    } else {
        1.0
    };
    for &t in &f.ticks {
        let y = f.py(t);
        let _ = writeln!(
            out,
            r##"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e0e0e0"/>"##,
            WIDTH - RIGHT
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            y + 4.0,
            tick_label(t, step)
        );
    }
    let _ = writeln!(
        out,
        r##"<line x1="{LEFT:.2}" y1="{TOP:.2}" x2="{LEFT:.2}" y2="{:.2}" stroke="#333"/>"##,
        HEIGHT - BOTTOM
    );
    let zero = f.py(0.0);
    let _ = writeln!(
        out,
        r##"<line x1="{LEFT:.2}" y1="{zero:.2}" x2="{:.2}" y2="{zero:.2}" stroke="#333"/>"##,
        WIDTH - RIGHT
    );
}

fn legend(out: &mut String, names: impl Iterator<Item = String>) {
    for (i, name) in names.enumerate() {
        let y = TOP + 8.0 + 18.0 * i as f64;
        let x = WIDTH - RIGHT + 14.0;
        let _ = writeln!(
            out,
            r#"<rect x="{x:.2}" y="{:.2}" width="12" height="12" fill="{}"/>"#,
            y - 10.0,
            PALETTE[i % PALETTE.len()]
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{y:.2}">{}</text>"#,
            x + 18.0,
            escape(&name)
        );
    }
}

impl LineChart {
    pub fn to_svg(&self) -> String {
        let x0 = self.x.first().copied().unwrap_or(0.0);
        let x1 = self.x.last().copied().unwrap_or(1.0);
        let f = Frame::new(
            x0,
            x1,
            self.series.iter().flat_map(|s| s.values.iter().copied()),
        );
        let mut out = String::new();
        open(&mut out, &self.title, &self.y_label);
        y_axis(&mut out, &f);
        let xticks = nice_ticks(x0, x1);
        let xstep = if xticks.len() > 1 {
            xticks[1] - xticks[0]
        } else {
            1.0
        };
        for &xt in &xticks {
            if xt < x0 || xt > x1 {
                continue;
            }
            let x = f.px(xt);
            let _ = writeln!(
                out,
                r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                HEIGHT - BOTTOM + 16.0,
                tick_label(xt, xstep)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            (WIDTH - RIGHT + LEFT) / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        for m in &self.markers {
            let x = f.px(m.x);
            let _ = writeln!(
                out,
                r##"<line x1="{x:.2}" y1="{TOP:.2}" x2="{x:.2}" y2="{:.2}" stroke="#999" stroke-dasharray="4 3"/>"##,
                HEIGHT - BOTTOM
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
                x + 4.0,
                TOP + 12.0,
                escape(&m.label)
            );
        }
        for (i, s) in self.series.iter().enumerate() {
            let mut d = String::new();
            for (j, (x, y)) in self.x.iter().zip(&s.values).enumerate() {
                let _ = write!(
                    d,
                    "{}{:.2},{:.2}",
                    if j == 0 { "M" } else { " L" },
                    f.px(*x),
                    f.py(*y)
                );
            }
            let _ = writeln!(
                out,
                r#"<path d="{d}" fill="none" stroke="{}" stroke-width="1.6"/>"#,
                PALETTE[i % PALETTE.len()]
            );
        }
        legend(&mut out, self.series.iter().map(|s| s.name.clone()));
        out.push_str("</svg>\n");
        out
    }

    /// One row per x value, values printed with `decimals` places.
    pub fn to_csv(&self, decimals: usize) -> String {
        let mut out = csv_field(&self.x_label);
        for s in &self.series {
            out.push(',');
            out.push_str(&csv_field(&s.name));
        }
        out.push('\n');
        for (j, x) in self.x.iter().enumerate() {
            let _ = write!(out, "{x}");
            for s in &self.series {
                let _ = write!(
                    out,
                    ",{:.*}",
                    decimals,
                    s.values.get(j).copied().unwrap_or(f64::NAN)
                );
            }
            out.push('\n');
        }
        out
    }
}

impl BarChart {
    pub fn to_svg(&self) -> String {
        let n = self.categories.len().max(1) as f64;
        let f = Frame::new(
            0.0,
            n,
            self.series.iter().flat_map(|s| s.values.iter().copied()),
        );
        let mut out = String::new();
        open(&mut out, &self.title, &self.y_label);
        y_axis(&mut out, &f);
        let group = (WIDTH - LEFT - RIGHT) / n;
        let bar = group * 0.8 / self.series.len().max(1) as f64;
        let zero = f.py(0.0);
        for (c, cat) in self.categories.iter().enumerate() {
            let gx = LEFT + group * c as f64 + group * 0.1;
            for (i, s) in self.series.iter().enumerate() {
                let v = s.values.get(c).copied().unwrap_or(0.0);
                let y = f.py(v);
                let _ = writeln!(
                    out,
                    r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                    gx + bar * i as f64,
                    y.min(zero),
                    bar,
                    (y - zero).abs(),
                    PALETTE[i % PALETTE.len()]
                );
            }
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                LEFT + group * (c as f64 + 0.5),
                HEIGHT - BOTTOM + 16.0,
                escape(cat)
            );
        }
        legend(&mut out, self.series.iter().map(|s| s.name.clone()));
        out.push_str("</svg>\n");
        out
    }

    pub fn to_csv(&self, decimals: usize) -> String {
        let mut out = String::from("category");
        for s in &self.series {
            out.push(',');
            out.push_str(&csv_field(&s.name));
        }
        out.push('\n');
        for (c, cat) in self.categories.iter().enumerate() {
            out.push_str(&csv_field(cat));
            for s in &self.series {
                let _ = write!(
                    out,
                    ",{:.*}",
                    decimals,
                    s.values.get(c).copied().unwrap_or(f64::NAN)
                );
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_cover_the_range() {
        let t = nice_ticks(-3.2, 17.0);
        assert!(t[0] <= -3.2 && *t.last().unwrap() >= 17.0);
        assert_eq!(t[1] - t[0], 5.0);
        let flat = nice_ticks(0.0, 0.0);
        assert!(flat.len() >= 2);
    }

    #[test]
    fn labels_drop_negative_zero() {
        assert_eq!(tick_label(-0.0, 0.5), "0.0");
        assert_eq!(tick_label(-1e-17, 1.0), "0");
        assert_eq!(tick_label(2.5, 0.5), "2.5");
    }

    #[test]
    fn text_is_escaped() {
        let c = BarChart {
            title: "a<b & \"c\"".into(),
            y_label: "EUR".into(),
            categories: vec!["x&y".into()],
            series: vec![Series::new("s", vec![1.0])],
        };
        let svg = c.to_svg();
        assert!(svg.contains("a&lt;b &amp; &quot;c&quot;"));
        assert!(svg.contains("x&amp;y"));
        assert_eq!(c.to_csv(2), "category,s\nx&y,1.00\n");
    }

    #[test]
    fn line_chart_is_deterministic() {
        let c = LineChart {
            title: "t".into(),
            x_label: "hour".into(),
            y_label: "kW".into(),
            x: (0..4).map(f64::from).collect(),
            series: vec![Series::new("a", vec![0.0, 1.0, 0.5, -0.25])],
            markers: vec![Marker {
                x: 2.0,
                label: "m".into(),
            }],
        };
        assert_eq!(c.to_svg(), c.to_svg());
        assert_eq!(c.to_csv(3), "hour,a\n0,0.000\n1,1.000\n2,0.500\n3,-0.250\n");
        assert_eq!(c.to_svg().matches("<path").count(), 1);
    }
}
