//! Hand-written SVG plots drawn from the grid and dataset CSV files.

use std::fmt::Write as _;

use crate::error::CliError;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN: f64 = 48.0;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GridColumns {
    pub x: Vec<f64>,
    pub true_f: Vec<f64>,
    pub mean: Vec<f64>,
    pub std_total: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Points {
    pub train: Vec<(f64, f64)>,
    pub test: Vec<(f64, f64)>,
}

fn bad(what: &str, detail: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("malformed {what} CSV: {detail}"))
}

pub fn parse_grid(text: &str) -> Result<GridColumns, CliError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers().map_err(|e| bad("grid", e))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name).ok_or_else(|| bad("grid", format!("no `{name}` column")));
    let idx = [col("x")?, col("true_f")?, col("mean")?, col("std_total")?];
    let mut g = GridColumns::default();
    for rec in r.records() {
        let rec = rec.map_err(|e| bad("grid", e))?;
        let v: Vec<f64> = idx
            .iter()
            .map(|&i| rec[i].parse::<f64>().map_err(|e| bad("grid", e)))
            .collect::<Result<_, _>>()?;
        g.x.push(v[0]);
        g.true_f.push(v[1]);
        g.mean.push(v[2]);
        g.std_total.push(v[3]);
    }
    Ok(g)
}

pub fn parse_points(text: &str) -> Result<Points, CliError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut p = Points::default();
    for rec in r.records() {
        let rec = rec.map_err(|e| bad("dataset", e))?;
        let x = rec[0].parse::<f64>().map_err(|e| bad("dataset", e))?;
        let y = rec[1].parse::<f64>().map_err(|e| bad("dataset", e))?;
        match &rec[2] {
            "test" => p.test.push((x, y)),
            _ => p.train.push((x, y)),
        }
    }
    Ok(p)
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn polyline(out: &mut String, frame: &Frame, xs: &[f64], ys: &[f64], style: &str) {
    let pts: Vec<String> = xs.iter().zip(ys).map(|(&x, &y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y))).collect();
    let _ = writeln!(out, r#"<polyline fill="none" {style} points="{}"/>"#, pts.join(" "));
}

/// Data scatter, true curve, predictive mean and the mean ± 2 std band.
pub fn render(title: &str, grid: &GridColumns, points: &Points) -> String {
    let upper: Vec<f64> = grid.mean.iter().zip(&grid.std_total).map(|(m, s)| m + 2.0 * s).collect();
    let lower: Vec<f64> = grid.mean.iter().zip(&grid.std_total).map(|(m, s)| m - 2.0 * s).collect();
    let ys = points.train.iter().chain(&points.test).map(|p| p.1).chain(grid.true_f.iter().copied()).chain(upper.iter().copied()).chain(lower.iter().copied());
    let (mut y0, mut y1) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !(y1 > y0) {
        y0 -= 1.0;
        y1 += 1.0;
    }
    let pad = 0.05 * (y1 - y0);
    let x0 = grid.x.first().copied().unwrap_or(0.0);
    let x1 = grid.x.last().copied().filter(|&v| v > x0).unwrap_or(x0 + 1.0);
    let frame = Frame { x0, x1, y0: y0 - pad, y1: y1 + pad };

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{title}</text>"#, WIDTH / 2.0);

    let mut band: Vec<String> = grid.x.iter().zip(&upper).map(|(&x, &y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y))).collect();
    band.extend(grid.x.iter().zip(&lower).rev().map(|(&x, &y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y))));
    let _ = writeln!(s, r##"<polygon fill="#4c72b0" fill-opacity="0.2" stroke="none" points="{}"/>"##, band.join(" "));

    for (pts, colour) in [(&points.train, "#555555"), (&points.test, "#dd8452")] {
        for &(x, y) in pts.iter() {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="1.6" fill="{colour}" fill-opacity="0.6"/>"#, frame.px(x), frame.py(y));
        }
    }
    polyline(&mut s, &frame, &grid.x, &grid.true_f, r##"stroke="#2ca02c" stroke-width="1.5" stroke-dasharray="6 4""##);
    polyline(&mut s, &frame, &grid.x, &grid.mean, r##"stroke="#4c72b0" stroke-width="2""##);

    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(s, r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#, r - l, b - t);
    let _ = writeln!(s, r#"<text x="{l}" y="{}" text-anchor="middle">{}</text>"#, b + 16.0, frame.x0);
    let _ = writeln!(s, r#"<text x="{r}" y="{}" text-anchor="middle">{}</text>"#, b + 16.0, frame.x1);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{:.2}</text>"#, l - 4.0, b, frame.y0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{:.2}</text>"#, l - 4.0, t + 4.0, frame.y1);
    let legend = [("#2ca02c", "true"), ("#4c72b0", "mean ± 2 std"), ("#555555", "train"), ("#dd8452", "test")];
    for (i, (colour, label)) in legend.iter().enumerate() {
        let y = t + 16.0 + 16.0 * i as f64;
        let _ = writeln!(s, r#"<rect x="{}" y="{}" width="10" height="10" fill="{colour}"/>"#, l + 8.0, y - 9.0);
        let _ = writeln!(s, r#"<text x="{}" y="{y}">{label}</text>"#, l + 24.0);
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_every_point() {
        let grid = parse_grid("x,true_f,mean,std_epistemic,std_total\n-1,1,0.9,0,0.1\n1,1,1.1,0,0.2\n").unwrap();
        let pts = parse_points("x,y,split\n0,1,train\n0.5,1.2,test\n").unwrap();
        let svg = render("t", &grid, &pts);
        assert_eq!(svg.matches("<circle").count(), 2);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn missing_column_is_reported() {
        assert!(parse_grid("x,mean\n0,1\n").is_err());
    }
}
