//! Plain SVG renderings: top-down track, projected 3D track and
//! error-versus-sample curves. Output bytes depend only on the inputs.

use std::fmt::Write as _;

use super::evaluate::EvalReport;
use super::replay::Trajectory;
use crate::error::{Error, Result};

const W: f64 = 720.0;
const H: f64 = 540.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Debug, Clone, Copy)]
struct Frame {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    xr: (f64, f64),
    yr: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        self.x0 + (x - self.xr.0) / (self.xr.1 - self.xr.0) * self.w
    }
    fn py(&self, y: f64) -> f64 {
        self.y0 + self.h - (y - self.yr.0) / (self.yr.1 - self.yr.0) * self.h
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn range(values: impl Iterator<Item = f64>) -> Result<(f64, f64)> {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::Config("nothing finite to plot".into()));
    }
    if hi - lo < 1e-9 {
        let pad = lo.abs().max(1.0) * 0.05;
        return Ok((lo - pad, hi + pad));
    }
    Ok((lo, hi))
}

/// Tick positions on a 1-2-5 grid covering `r`, and the widened range.
fn ticks(r: (f64, f64), target: usize) -> (Vec<f64>, (f64, f64)) {
    let raw = (r.1 - r.0) / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let lo = (r.0 / step).floor() * step;
    let hi = (r.1 / step).ceil() * step;
    let n = ((hi - lo) / step).round() as usize;
    ((0..=n).map(|i| lo + i as f64 * step).collect(), (lo, hi))
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

struct Svg {
    out: String,
}

impl Svg {
    fn new(title: &str) -> Self {
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(out, r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="15">{}</text>"#, W / 2.0, esc(title));
        Self { out }
    }

    fn axes(&mut self, f: &Frame, xt: &[f64], yt: &[f64], xlabel: &str, ylabel: &str) {
        let o = &mut self.out;
        let _ = writeln!(
            o,
            r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
            f.x0, f.y0, f.w, f.h
        );
        for &x in xt {
            let px = f.px(x);
            let _ = writeln!(
                o,
                r##"<line x1="{px:.1}" y1="{:.1}" x2="{px:.1}" y2="{:.1}" stroke="#ddd"/><text x="{px:.1}" y="{:.1}" text-anchor="middle">{}</text>"##,
                f.y0,
                f.y0 + f.h,
                f.y0 + f.h + 15.0,
                fmt_tick(x)
            );
        }
        for &y in yt {
            let py = f.py(y);
            let _ = writeln!(
                o,
                r##"<line x1="{:.1}" y1="{py:.1}" x2="{:.1}" y2="{py:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"##,
                f.x0,
                f.x0 + f.w,
                f.x0 - 5.0,
                py + 4.0,
                fmt_tick(y)
            );
        }
        let _ = writeln!(
            o,
            r#"<text class="xlabel" x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            f.x0 + f.w / 2.0,
            f.y0 + f.h + 34.0,
            esc(xlabel)
        );
        let (lx, ly) = (f.x0 - 52.0, f.y0 + f.h / 2.0);
        let _ = writeln!(
            o,
            r#"<text class="ylabel" x="{lx:.1}" y="{ly:.1}" text-anchor="middle" transform="rotate(-90 {lx:.1} {ly:.1})">{}</text>"#,
            esc(ylabel)
        );
    }

    fn series(&mut self, label: &str, color: &str, pts: impl Iterator<Item = (f64, f64)>) {
        let mut path = String::new();
        for (i, (x, y)) in pts.enumerate() {
            let _ = write!(path, "{}{x:.2},{y:.2}", if i == 0 { "" } else { " " });
        }
        let _ = writeln!(
            self.out,
            r#"<polyline class="series" data-label="{}" points="{path}" fill="none" stroke="{color}" stroke-width="1.2"/>"#,
            esc(label)
        );
    }

    fn legend(&mut self, x: f64, y: f64, entries: &[(String, &str)]) {
        for (i, (label, color)) in entries.iter().enumerate() {
            let yy = y + 16.0 * i as f64;
            let _ = writeln!(
                self.out,
                r#"<line x1="{x:.1}" y1="{yy:.1}" x2="{:.1}" y2="{yy:.1}" stroke="{color}" stroke-width="2"/><text class="legend" x="{:.1}" y="{:.1}">{}</text>"#,
                x + 20.0,
                x + 25.0,
                yy + 4.0,
                esc(label)
            );
        }
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

fn non_empty(traj: &Trajectory) -> Result<()> {
    if traj.rows.is_empty() {
        return Err(Error::Config("trajectory has no rows to plot".into()));
    }
    Ok(())
}

/// Top-down north/east track, estimate against truth.
pub fn track_svg(traj: &Trajectory, title: &str) -> Result<String> {
    non_empty(traj)?;
    let er = range(traj.rows.iter().flat_map(|r| [r.est.east, r.truth.east]))?;
    let nr = range(traj.rows.iter().flat_map(|r| [r.est.north, r.truth.north]))?;
    let (xt, xr) = ticks(er, 6);
    let (yt, yr) = ticks(nr, 6);
    let f = Frame {
        x0: 80.0,
        y0: 40.0,
        w: W - 110.0,
        h: H - 100.0,
        xr,
        yr,
    };
    let mut s = Svg::new(title);
    s.axes(&f, &xt, &yt, "east (m)", "north (m)");
    s.series("ground truth", COLORS[0], traj.rows.iter().map(|r| (f.px(r.truth.east), f.py(r.truth.north))));
    s.series("dead reckoning", COLORS[1], traj.rows.iter().map(|r| (f.px(r.est.east), f.py(r.est.north))));
    s.legend(f.x0 + 10.0, f.y0 + 15.0, &[("ground truth".into(), COLORS[0]), ("dead reckoning".into(), COLORS[1])]);
    Ok(s.finish())
}

/// Oblique projection of the north/east/depth track.
pub fn track3d_svg(traj: &Trajectory, title: &str) -> Result<String> {
    non_empty(traj)?;
    let (ca, sa) = (30f64.to_radians().cos(), 30f64.to_radians().sin());
    // screen x from east and north, screen y from north and height (−down)
    let horiz = range(traj.rows.iter().flat_map(|r| [r.est.east, r.truth.east, r.est.north, r.truth.north]))?;
    let depth = range(traj.rows.iter().flat_map(|r| [r.est.down, r.truth.down]))?;
    // depth is stretched to a third of the horizontal extent
    let zs = (horiz.1 - horiz.0) / 3.0 / (depth.1 - depth.0);
    let proj = |e: f64, n: f64, d: f64| (e * ca - n * ca, (e + n) * sa - d * zs);
    let pts: Vec<(f64, f64)> = traj
        .rows
        .iter()
        .flat_map(|r| [proj(r.est.east, r.est.north, r.est.down), proj(r.truth.east, r.truth.north, r.truth.down)])
        .collect();
    let xr = range(pts.iter().map(|p| p.0))?;
    let yr = range(pts.iter().map(|p| p.1))?;
    let f = Frame {
        x0: 40.0,
        y0: 40.0,
        w: W - 80.0,
        h: H - 90.0,
        xr,
        yr,
    };
    let mut s = Svg::new(title);
    let _ = writeln!(
        s.out,
        r#"<text class="xlabel" x="{:.1}" y="{:.1}" text-anchor="middle">projection: east (m) right-up, north (m) left-up, depth (m) down, depth scale x{:.1}</text>"#,
        W / 2.0,
        H - 20.0,
        zs
    );
    let p = |e: f64, n: f64, d: f64| {
        let (x, y) = proj(e, n, d);
        (f.px(x), f.py(y))
    };
    s.series("ground truth", COLORS[0], traj.rows.iter().map(|r| p(r.truth.east, r.truth.north, r.truth.down)));
    s.series("dead reckoning", COLORS[1], traj.rows.iter().map(|r| p(r.est.east, r.est.north, r.est.down)));
    s.legend(f.x0 + 10.0, f.y0 + 15.0, &[("ground truth".into(), COLORS[0]), ("dead reckoning".into(), COLORS[1])]);
    Ok(s.finish())
}

/// North and east positioning error against sample index, one labelled
/// series per report in each panel.
pub fn error_svg(reports: &[EvalReport], title: &str) -> Result<String> {
    if reports.is_empty() || reports.iter().any(|r| r.errors.is_empty()) {
        return Err(Error::Config("empty error series".into()));
    }
    let n_max = reports.iter().map(|r| r.errors.len()).max().unwrap_or(1) as f64 - 1.0;
    let (xt, xr) = ticks((0.0, n_max.max(1.0)), 6);
    let mut s = Svg::new(title);
    let panel_h = (H - 130.0) / 2.0;
    for (pi, (name, get)) in [
        ("north error (m)", (|e: &crate::frames::PositionError| e.n_error) as fn(&_) -> f64),
        ("east error (m)", |e: &crate::frames::PositionError| e.e_error),
    ]
    .into_iter()
    .enumerate()
    {
        let yr0 = range(reports.iter().flat_map(|r| r.errors.iter().map(get)).chain([0.0]))?;
        let (yt, yr) = ticks(yr0, 4);
        let f = Frame {
            x0: 80.0,
            y0: 40.0 + pi as f64 * (panel_h + 45.0),
            w: W - 110.0,
            h: panel_h,
            xr,
            yr,
        };
        s.axes(&f, &xt, &yt, "sample", name);
        for (ri, r) in reports.iter().enumerate() {
            let color = COLORS[ri % COLORS.len()];
            s.series(&r.label, color, r.errors.iter().enumerate().map(|(k, e)| (f.px(k as f64), f.py(get(e)))));
        }
        if pi == 0 {
            let entries: Vec<(String, &str)> = reports
                .iter()
                .enumerate()
                .map(|(i, r)| (r.label.clone(), COLORS[i % COLORS.len()]))
                .collect();
            s.legend(f.x0 + 10.0, f.y0 + 15.0, &entries);
        }
    }
    Ok(s.finish())
}
