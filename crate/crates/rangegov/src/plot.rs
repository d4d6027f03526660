//! SVG charts drawn from a metrics report, each with a CSV twin holding
//! the plotted numbers. Coordinates are printed at fixed precision so the
//! same report always gives the same bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::formats::series::write_table;
use crate::metrics::Metrics;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Funding,
    Density,
    Depth,
    Range,
}

impl FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<PlotKind> {
        match s {
            "funding" => Ok(PlotKind::Funding),
            "density" => Ok(PlotKind::Density),
            "depth" => Ok(PlotKind::Depth),
            "range" => Ok(PlotKind::Range),
            _ => Err(Error::Usage(format!("unknown plot kind `{s}`"))),
        }
    }
}

/// Named columns sharing one x axis.
struct Chart {
    title: String,
    x_label: &'static str,
    x: Vec<f64>,
    series: Vec<(&'static str, Vec<Option<f64>>)>,
    /// Vertical marker: `(id, x)`.
    marker: Option<(&'static str, f64)>,
}

impl Chart {
    fn csv(&self) -> Result<Vec<u8>> {
        let mut header = vec![self.x_label];
        header.extend(self.series.iter().map(|(n, _)| *n));
        let rows: Vec<Vec<Option<f64>>> = (0..self.x.len())
            .map(|i| {
                let mut r = vec![Some(self.x[i])];
                r.extend(self.series.iter().map(|(_, ys)| ys[i]));
                r
            })
            .collect();
        let mut out = Vec::new();
        write_table(&mut out, &header, &rows).map_err(|e| Error::Usage(e.to_string()))?;
        Ok(out)
    }

    fn svg(&self) -> String {
        let ys = self.series.iter().flat_map(|(_, v)| v.iter().flatten().copied());
        let (y0, y1) = bounds(ys);
        let (x0, x1) = bounds(self.x.iter().copied());
        let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
        let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{MARGIN}" y="24" font-size="14">{}</text>"#, escape(&self.title));
        let _ = writeln!(
            s,
            r#"<g id="axes" stroke="black"><line x1="{m}" y1="{b}" x2="{r}" y2="{b}"/><line x1="{m}" y1="{t}" x2="{m}" y2="{b}"/></g>"#,
            m = MARGIN,
            b = HEIGHT - MARGIN,
            r = WIDTH - MARGIN,
            t = MARGIN
        );
        let _ = writeln!(
            s,
            r#"<g font-size="10"><text x="{m}" y="{yb}">{}</text><text x="{r}" y="{yb}" text-anchor="end">{}</text><text x="4" y="{yt}">{}</text><text x="4" y="{ybot}">{}</text></g>"#,
            num(x0),
            num(x1),
            num(y1),
            num(y0),
            m = MARGIN,
            r = WIDTH - MARGIN,
            yb = HEIGHT - MARGIN + 14.0,
            yt = MARGIN,
            ybot = HEIGHT - MARGIN
        );
        for (k, (name, ys)) in self.series.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            // Gaps in the data break the line into separate runs.
            let mut d = String::new();
            let mut pen_down = false;
            for (x, y) in self.x.iter().zip(ys) {
                match y {
                    Some(y) => {
                        let _ = write!(d, "{}{:.2},{:.2} ", if pen_down { "L" } else { "M" }, px(*x), py(*y));
                        pen_down = true;
                    }
                    None => pen_down = false,
                }
            }
            let _ = writeln!(
                s,
                r#"<path id="{name}" d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                d.trim_end()
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" font-size="10" fill="{color}">{name}</text>"#,
                WIDTH - MARGIN - 120.0,
                MARGIN + 12.0 * (k as f64 + 1.0)
            );
        }
        if let Some((id, x)) = self.marker {
            let _ = writeln!(
                s,
                r#"<g id="{id}" data-price="{}"><line x1="{:.2}" y1="{t}" x2="{:.2}" y2="{b}" stroke="black" stroke-dasharray="4 3"/></g>"#,
                num(x),
                px(x),
                px(x),
                t = MARGIN,
                b = HEIGHT - MARGIN
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

/// Finite min and max, widened when degenerate so scaling never divides by 0.
fn bounds(xs: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) =
        xs.filter(|x| x.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !(lo <= hi) {
        (0.0, 1.0)
    } else if lo == hi {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.01 };
        (lo - pad, hi + pad)
    } else {
        (lo, hi)
    }
}

fn num(x: f64) -> String {
    format!("{x:.6}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn missing(what: &str) -> Error {
    Error::Missing(format!("the metrics report has no {what} table"))
}

fn chart(m: &Metrics, kind: PlotKind, instrument: &str) -> Result<Chart> {
    Ok(match kind {
        PlotKind::Funding => {
            let c = m.cost.as_ref().ok_or_else(|| missing("cost"))?;
            Chart {
                title: format!("{instrument} funding per 8h"),
                x_label: "open_time",
                x: c.rows.iter().map(|r| r.open_time as f64).collect(),
                series: vec![
                    ("rate_8h", c.rows.iter().map(|r| r.rate_8h).collect()),
                    ("cumulative_7d", c.rows.iter().map(|r| r.cumulative_7d).collect()),
                ],
                marker: None,
            }
        }
        PlotKind::Density => {
            let p = m.positioning.as_ref().ok_or_else(|| missing("positioning"))?;
            let d = &p.density;
            Chart {
                title: format!("{instrument} liquidation density"),
                x_label: "price",
                x: d.grid.iter().map(|g| g.0).collect(),
                series: vec![("density", d.grid.iter().map(|g| Some(g.1)).collect())],
                marker: d.peak_price().map(|x| ("peak", x)),
            }
        }
        PlotKind::Depth => {
            let l = m.liquidity.as_ref().ok_or_else(|| missing("liquidity"))?;
            let s = m.structural.as_ref();
            let mut series = vec![
                ("bid_p75", l.rows.iter().map(|r| r.bid_p75).collect::<Vec<_>>()),
                ("bid_p25", l.rows.iter().map(|r| r.bid_p25).collect()),
                ("ask_p25", l.rows.iter().map(|r| r.ask_p25).collect()),
                ("ask_p75", l.rows.iter().map(|r| r.ask_p75).collect()),
            ];
            if let Some(s) = s.filter(|s| s.rows.len() == l.rows.len()) {
                series.push(("close", s.rows.iter().map(|r| Some(r.close)).collect()));
            }
            Chart {
                title: format!("{instrument} depth bands"),
                x_label: "open_time",
                x: l.rows.iter().map(|r| r.open_time as f64).collect(),
                series,
                marker: None,
            }
        }
        PlotKind::Range => {
            let s = m.structural.as_ref().ok_or_else(|| missing("structural"))?;
            Chart {
                title: format!("{instrument} range"),
                x_label: "open_time",
                x: s.rows.iter().map(|r| r.open_time as f64).collect(),
                series: vec![
                    ("close", s.rows.iter().map(|r| Some(r.close)).collect()),
                    ("range_upper", s.rows.iter().map(|r| r.range_upper).collect()),
                    ("range_lower", s.rows.iter().map(|r| r.range_lower).collect()),
                ],
                marker: None,
            }
        }
    })
}

/// Write `<out>` as SVG and its twin alongside with a `.csv` extension.
/// Returns the twin's path.
pub fn render(m: &Metrics, kind: PlotKind, instrument: &str, out: &Path) -> Result<PathBuf> {
    let c = chart(m, kind, instrument)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(out, c.svg()).map_err(|e| Error::io(out, e))?;
    let twin = out.with_extension("csv");
    fs::write(&twin, c.csv()?).map_err(|e| Error::io(&twin, e))?;
    Ok(twin)
}
