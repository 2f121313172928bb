//! SVG figures, each with a CSV file holding the plotted numbers.

use std::path::{Path, PathBuf};

use plotters::prelude::*;
use rayon::prelude::*;

use gaplab_core::gap::gap_report;
use gaplab_core::model::weighted_norm;
use gaplab_core::modulus::ratio_profile;
use gaplab_core::{cs, log_derivative_profile, solve_model, ModelParams, SolveOptions};

use crate::output::sig;
use crate::{CliError, Result};

const SIZE: (u32, u32) = (720, 480);
const PALETTE: [RGBColor; 4] = [RGBColor(31, 119, 180), RGBColor(214, 39, 40), RGBColor(44, 160, 44), RGBColor(148, 103, 189)];

struct Series {
    name: String,
    points: Vec<(f64, f64)>,
}

struct Figure {
    stem: &'static str,
    title: String,
    x_label: &'static str,
    y_label: &'static str,
    series: Vec<Series>,
}

pub fn write_all(out_dir: &Path, p: &ModelParams) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|source| CliError::Io { path: out_dir.to_path_buf(), source })?;
    let figures = vec![gap_vs_d()?, gap_vs_n()?, eigenfunctions(p)?, profiles(p)?];
    let mut written = Vec::new();
    for f in &figures {
        written.push(write_svg(out_dir, f)?);
        written.push(write_csv(out_dir, f)?);
    }
    Ok(written)
}

fn gap_vs_d() -> Result<Figure> {
    let ds: Vec<f64> = (0..=60).map(|j| 0.1 + 3.0 * f64::from(j) / 60.0).collect();
    let mut series = Vec::new();
    for n in [2, 3, 4] {
        let points = ds
            .par_iter()
            .map(|&d| Ok((d, gap_report(&ModelParams::new(n, 1.0, d)?, &SolveOptions::default())?.normalized_gap)))
            .collect::<Result<Vec<_>>>()?;
        series.push(Series { name: format!("n = {n}"), points });
    }
    Ok(Figure {
        stem: "gap_vs_d",
        title: "Normalized gap, K = 1".into(),
        x_label: "D",
        y_label: "D^2 (lambda2 - lambda1) / pi^2",
        series,
    })
}

fn gap_vs_n() -> Result<Figure> {
    let points = (2..=9u32)
        .into_par_iter()
        .map(|n| Ok((f64::from(n), gap_report(&ModelParams::new(n, 1.0, 1.57)?, &SolveOptions::default())?.normalized_gap)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Figure {
        stem: "gap_vs_n",
        title: "Normalized gap, K = 1, D = 1.57".into(),
        x_label: "n",
        y_label: "D^2 (lambda2 - lambda1) / pi^2",
        series: vec![Series { name: "computed".into(), points }],
    })
}

fn every<T: Copy>(v: &[T], target: usize) -> Vec<T> {
    let step = (v.len() / target).max(1);
    let mut out: Vec<T> = v.iter().step_by(step).copied().collect();
    if !(v.len() - 1).is_multiple_of(step) {
        out.push(v[v.len() - 1]);
    }
    out
}

fn eigenfunctions(p: &ModelParams) -> Result<Figure> {
    let r = solve_model(p, &SolveOptions::default())?;
    let nodes = r.nodes();
    let mut series: Vec<Series> = r
        .pairs
        .iter()
        .map(|e| Series {
            name: format!("phi{}", e.index),
            points: every(&nodes.iter().copied().zip(e.samples.iter().copied()).collect::<Vec<_>>(), 200),
        })
        .collect();
    if p.n == 3 {
        // Closed form for n = 3, scaled to unit weighted norm and matched in sign.
        let raw: Vec<f64> = nodes.iter().map(|&s| (std::f64::consts::PI * s / p.d).cos() / cs(p.k, s)).collect();
        let scale = weighted_norm(p, &r.grid, &raw);
        let mid = nodes.len() / 2;
        let sign = r.pairs[0].samples[mid].signum();
        let exact: Vec<(f64, f64)> = nodes.iter().zip(&raw).map(|(&s, &v)| (s, sign * v / scale)).collect();
        series.push(Series { name: "cos(pi s/D)/cs(s)".into(), points: every(&exact, 200) });
    }
    Ok(Figure {
        stem: "eigenfunctions",
        title: format!("Eigenfunctions, n = {}, K = {}, D = {}", p.n, p.k, p.d),
        x_label: "s",
        y_label: "phi",
        series,
    })
}

fn profiles(p: &ModelParams) -> Result<Figure> {
    let r = solve_model(p, &SolveOptions::default())?;
    let f = log_derivative_profile(&r)?;
    let w = ratio_profile(&r)?;
    let fp: Vec<(f64, f64)> = f.s_nodes.iter().copied().zip(f.f_values.iter().copied()).collect();
    let wp: Vec<(f64, f64)> = w.s_nodes.iter().copied().zip(w.w_values.iter().copied()).collect();
    Ok(Figure {
        stem: "profiles",
        title: format!("Log-derivative and ratio profiles, n = {}, K = {}, D = {}", p.n, p.k, p.d),
        x_label: "s",
        y_label: "value",
        series: vec![
            Series { name: "(log phi1)'".into(), points: every(&fp, 200) },
            Series { name: "(log phi2/phi1)'".into(), points: every(&wp, 200) },
        ],
    })
}

fn bounds(f: &Figure) -> ((f64, f64), (f64, f64)) {
    let pts = f.series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let pad = 0.05 * (y1 - y0).max(1e-9);
    ((x0, x1), (y0 - pad, y1 + pad))
}

fn write_svg(dir: &Path, f: &Figure) -> Result<PathBuf> {
    let path = dir.join(format!("{}.svg", f.stem));
    let plot_err = |e: &dyn std::fmt::Display| CliError::Plot { path: path.clone(), detail: e.to_string() };
    let ((x0, x1), (y0, y1)) = bounds(f);
    {
        let root = SVGBackend::new(&path, SIZE).into_drawing_area();
        root.fill(&WHITE).map_err(|e| plot_err(&e))?;
        let mut chart = ChartBuilder::on(&root)
            .caption(&f.title, ("sans-serif", 20))
            .margin(12)
            .x_label_area_size(40)
            .y_label_area_size(60)
            .build_cartesian_2d(x0..x1, y0..y1)
            .map_err(|e| plot_err(&e))?;
        chart
            .configure_mesh()
            .x_desc(f.x_label)
            .y_desc(f.y_label)
            .draw()
            .map_err(|e| plot_err(&e))?;
        for (i, s) in f.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            chart
                .draw_series(LineSeries::new(s.points.iter().copied(), color.stroke_width(2)))
                .map_err(|e| plot_err(&e))?
                .label(s.name.clone())
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], color.stroke_width(2)));
        }
        chart
            .configure_series_labels()
            .background_style(WHITE.mix(0.8))
            .border_style(BLACK)
            .draw()
            .map_err(|e| plot_err(&e))?;
        root.present().map_err(|e| plot_err(&e))?;
    }
    Ok(path)
}

fn write_csv(dir: &Path, f: &Figure) -> Result<PathBuf> {
    let path = dir.join(format!("{}.csv", f.stem));
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["series", f.x_label, "value"])?;
    for s in &f.series {
        for &(x, y) in &s.points {
            w.write_record([s.name.as_str(), &sig(x), &sig(y)])?;
        }
    }
    w.flush().map_err(|source| CliError::Io { path: path.clone(), source })?;
    Ok(path)
}
