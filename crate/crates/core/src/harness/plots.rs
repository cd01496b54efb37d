//! Self-contained SVG line plots plus tab-separated curve data.
//!
//! Figure roles: `fig2`/`fig3` BER vs SNR for SISO and STBC (log axis),
//! `fig4`/`fig5`/`fig6` link throughput vs SNR for SISO, STBC and SM, and
//! `fig7` the AMC envelopes of all modes with the STBC/SM switching point.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::metrics::{Envelope, SweepResult};
use crate::params::MimoMode;

const W: f64 = 720.0;
const H: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub series: Vec<Series>,
    /// Vertical markers `(x, label)`.
    pub markers: Vec<(f64, String)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag)
}

impl LinePlot {
    fn y_value(&self, y: f64) -> f64 {
        if self.log_y {
            y.log10()
        } else {
            y
        }
    }

    pub fn to_svg(&self) -> String {
        let all: Vec<(f64, f64)> = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().copied())
            .filter(|&(x, y)| x.is_finite() && y.is_finite() && (!self.log_y || y > 0.0))
            .collect();
        let (mut x0, mut x1) = all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
            (a.min(p.0), b.max(p.0))
        });
        let (mut y0, mut y1) = all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
            let v = self.y_value(p.1);
            (a.min(v), b.max(v))
        });
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 <= x0 {
            x1 = x0 + 1.0;
        }
        if self.log_y {
            y0 = y0.floor();
            y1 = y1.ceil().max(y0 + 1.0);
        } else {
            y0 = y0.min(0.0);
            if y1 <= y0 {
                y1 = y0 + 1.0;
            }
            y1 *= 1.05;
        }
        let pw = W - LEFT - RIGHT;
        let ph = H - TOP - BOTTOM;
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |v: f64| TOP + (1.0 - (v - y0) / (y1 - y0)) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
            LEFT + pw / 2.0,
            escape(&self.title)
        );
        // grid and ticks
        let xs = nice_step(x1 - x0);
        let mut x = (x0 / xs).ceil() * xs;
        while x <= x1 + 1e-9 {
            let px = sx(x);
            let _ = writeln!(
                s,
                r##"<line x1="{px:.1}" y1="{TOP}" x2="{px:.1}" y2="{:.1}" stroke="#ddd"/><text x="{px:.1}" y="{:.1}" text-anchor="middle">{}</text>"##,
                TOP + ph,
                TOP + ph + 18.0,
                fmt_tick(x)
            );
            x += xs;
        }
        let ys = if self.log_y { 1.0 } else { nice_step(y1 - y0) };
        let mut v = (y0 / ys).ceil() * ys;
        while v <= y1 + 1e-9 {
            let py = sy(v);
            let label = if self.log_y {
                format!("1e{}", v.round() as i64)
            } else {
                fmt_tick(v)
            };
            let _ = writeln!(
                s,
                r##"<line x1="{LEFT}" y1="{py:.1}" x2="{:.1}" y2="{py:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">{label}</text>"##,
                LEFT + pw,
                LEFT - 6.0,
                py + 4.0
            );
            v += ys;
        }
        let _ = writeln!(
            s,
            r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            H - 15.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text transform="translate(20 {:.1}) rotate(-90)" text-anchor="middle">{}</text>"#,
            TOP + ph / 2.0,
            escape(&self.y_label)
        );
        // curves and legend
        for (i, series) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let pts: Vec<String> = series
                .points
                .iter()
                .filter(|&&(x, y)| x.is_finite() && y.is_finite() && (!self.log_y || y > 0.0))
                .map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(self.y_value(y))))
                .collect();
            if !pts.is_empty() {
                let _ = writeln!(
                    s,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1.8" points="{}"/>"#,
                    pts.join(" ")
                );
                for p in &pts {
                    let (cx, cy) = p.split_once(',').expect("formatted pair");
                    let _ = writeln!(s, r#"<circle cx="{cx}" cy="{cy}" r="2.5" fill="{color}"/>"#);
                }
            }
            let ly = TOP + 14.0 + 18.0 * i as f64;
            let lx = LEFT + pw + 12.0;
            let _ = writeln!(
                s,
                r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
                lx + 22.0,
                lx + 28.0,
                ly + 4.0,
                escape(&series.name)
            );
        }
        for (x, label) in &self.markers {
            if *x < x0 || *x > x1 {
                continue;
            }
            let px = sx(*x);
            let _ = writeln!(
                s,
                r#"<line x1="{px:.1}" y1="{TOP}" x2="{px:.1}" y2="{:.1}" stroke="black" stroke-dasharray="5,4"/><text x="{:.1}" y="{:.1}">{}</text>"#,
                TOP + ph,
                px + 4.0,
                TOP + 14.0,
                escape(label)
            );
        }
        s.push_str("</svg>\n");
        s
    }

    /// Tab-separated `series x y` rows.
    pub fn to_data(&self) -> String {
        let mut s = format!("# {}\n# series\t{}\t{}\n", self.title, self.x_label, self.y_label);
        for series in &self.series {
            for (x, y) in &series.points {
                let _ = writeln!(s, "{}\t{x}\t{y}", series.name);
            }
        }
        for (x, label) in &self.markers {
            let _ = writeln!(s, "# marker\t{x}\t{label}");
        }
        s
    }
}

fn fmt_tick(v: f64) -> String {
    let r = (v * 1000.0).round() / 1000.0;
    if r == r.trunc() {
        format!("{}", r as i64)
    } else {
        format!("{r}")
    }
}

pub fn ber_plot(sweep: &SweepResult, mode: MimoMode, title: &str) -> LinePlot {
    LinePlot {
        title: title.to_string(),
        x_label: "SNR (dB)".into(),
        y_label: "BER".into(),
        log_y: true,
        series: sweep
            .profiles(mode)
            .into_iter()
            .map(|p| Series {
                name: p.to_string(),
                points: sweep.curve(mode, p).iter().map(|m| (m.snr_db, m.ber_floored())).collect(),
            })
            .collect(),
        markers: vec![],
    }
}

pub fn throughput_plot(sweep: &SweepResult, mode: MimoMode, title: &str) -> LinePlot {
    LinePlot {
        title: title.to_string(),
        x_label: "SNR (dB)".into(),
        y_label: "Throughput (Mbit/s)".into(),
        log_y: false,
        series: sweep
            .profiles(mode)
            .into_iter()
            .map(|p| Series {
                name: p.to_string(),
                points: sweep
                    .curve(mode, p)
                    .iter()
                    .map(|m| (m.snr_db, m.throughput_bps / 1e6))
                    .collect(),
            })
            .collect(),
        markers: vec![],
    }
}

pub fn envelope_plot(envelopes: &[Envelope], switching_point_db: Option<f64>) -> LinePlot {
    LinePlot {
        title: "AMC envelopes".into(),
        x_label: "SNR (dB)".into(),
        y_label: "Spectral efficiency (bit/s/Hz)".into(),
        log_y: false,
        series: envelopes
            .iter()
            .map(|e| Series {
                name: e.mode.name().to_uppercase(),
                points: e.snr_db.iter().copied().zip(e.smoothed_bpshz.iter().copied()).collect(),
            })
            .collect(),
        markers: switching_point_db
            .map(|x| vec![(x, format!("switch {x:.1} dB"))])
            .unwrap_or_default(),
    }
}

/// Writes every figure whose data is present; returns the files written.
pub fn emit_plots(
    sweep: &SweepResult,
    envelopes: &[Envelope],
    switching_point_db: Option<f64>,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    if sweep.is_empty() {
        return Err(Error::IncompleteSweep("nothing to plot".into()));
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let modes = sweep.modes();
    let mut figs: Vec<(&str, LinePlot)> = Vec::new();
    let has = |m| modes.contains(&m);
    if has(MimoMode::Siso) {
        figs.push(("fig2", ber_plot(sweep, MimoMode::Siso, "BER, SISO")));
    }
    if has(MimoMode::Stbc2x2) {
        figs.push(("fig3", ber_plot(sweep, MimoMode::Stbc2x2, "BER, 2x2 STBC")));
    }
    if has(MimoMode::Siso) {
        figs.push(("fig4", throughput_plot(sweep, MimoMode::Siso, "Throughput, SISO")));
    }
    if has(MimoMode::Stbc2x2) {
        figs.push(("fig5", throughput_plot(sweep, MimoMode::Stbc2x2, "Throughput, 2x2 STBC")));
    }
    if has(MimoMode::Sm2x2) {
        figs.push(("fig6", throughput_plot(sweep, MimoMode::Sm2x2, "Throughput, 2x2 SM")));
    }
    if !envelopes.is_empty() {
        figs.push(("fig7", envelope_plot(envelopes, switching_point_db)));
    }
    let mut written = Vec::new();
    for (name, plot) in figs {
        for (ext, body) in [("svg", plot.to_svg()), ("dat", plot.to_data())] {
            let path = dir.join(format!("{name}.{ext}"));
            std::fs::write(&path, body).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            written.push(path);
        }
    }
    Ok(written)
}
