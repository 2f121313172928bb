use rayon::prelude::*;
use serde_json::{json, Value};

use gaplab_core::ball::{ball_hessian_check, gap_comparison_check};
use gaplab_core::gap::{classify, sweep_params, GapReport, MONOTONE_TOL};
use gaplab_core::geometry::{dr_expansion_check, jacobi_orthogonality, second_derivative_in_r_check};
use gaplab_core::{ball_spectrum, solve_model, BallSpec, ModelParams, SolveOptions, SweepAxis, VariationProbe};

use crate::args::{parse_values, Cli, Command, ModelArgs, OutputArgs};
use crate::output::{emit, num, sig, Report};
use crate::{plot, suite, tables, CliError, Result};

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve { model, solver, output } => {
            let p = ModelParams::new(model.require_n()?, model.require_k()?, model.require_d()?)?;
            write(&solve_report(&p, &solver.options()?)?, &output)
        }
        Command::Sweep { model, axis, values, solver, output, jobs } => {
            let opts = solver.options()?;
            let axis: SweepAxis = axis.parse()?;
            let values = parse_values(&values)?;
            let report = with_jobs(jobs, || sweep_report(&model, axis, &values, &opts))?;
            write(&report, &output)
        }
        Command::Ball { n, k, radius, solver, output } => {
            let b = BallSpec::new(n, k, radius)?;
            write(&ball_report(&b, &solver.options()?)?, &output)
        }
        Command::Geometry { n, k, d, output } => write(&geometry_report(n, k, d)?, &output),
        Command::Verify { filter, inject_fault, jobs, output } => {
            let groups = suite::parse_filter(filter.as_deref())?;
            let checks = with_jobs(jobs, || suite::run_suite(&groups, inject_fault))?;
            let report = suite::report(&checks);
            write(&report, &output)?;
            let failed = checks.iter().filter(|c| c.status == suite::Status::Fail).count();
            if failed > 0 {
                return Err(CliError::Failed(format!("{failed} of {} checks failed", checks.len())));
            }
            Ok(())
        }
        Command::ReproduceTables { scheme, jobs, output } => {
            let cells = with_jobs(jobs, || tables::reproduce(scheme))?;
            write(&tables::report(&cells, scheme), &output)?;
            let bad = cells.iter().filter(|c| !c.within_tolerance()).count();
            if bad > 0 {
                return Err(CliError::Failed(format!("{bad} table cells exceed their tolerance")));
            }
            Ok(())
        }
        Command::Plot { out, n, k, d, jobs } => {
            let p = ModelParams::new(n, k, d)?;
            let written = with_jobs(jobs, || plot::write_all(&out, &p))?;
            let text: String = written.iter().map(|f| format!("{}\n", f.display())).collect();
            emit(&text, None)
        }
    }
}

fn write(report: &Report, out: &OutputArgs) -> Result<()> {
    emit(&report.render(out.format)?, out.out.as_deref())
}

/// Runs `f` on a dedicated pool when a worker count is given.
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match jobs {
        None => f(),
        Some(0) => Err(CliError::Usage("--jobs must be at least 1".into())),
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {j} workers: {e}")))?
            .install(f),
    }
}

pub const SOLVE_FIELDS: [&str; 10] =
    ["n", "K", "D", "lambda1", "lambda2", "gap", "normalized_gap", "method", "grid_m", "residual"];

pub fn solve_report(p: &ModelParams, opts: &SolveOptions) -> Result<Report> {
    let r = solve_model(p, opts)?;
    let g = GapReport::from_solve(&r, opts.grid_m);
    let mut rep = Report::new(SOLVE_FIELDS);
    rep.push(vec![
        p.n.to_string(),
        sig(p.k),
        sig(p.d),
        sig(g.lambda1),
        sig(g.lambda2),
        sig(g.gap),
        sig(g.normalized_gap),
        r.method.as_str().to_string(),
        opts.grid_m.to_string(),
        sig(r.residual),
    ]);
    rep.json = json!({
        "n": p.n,
        "K": num(p.k),
        "D": num(p.d),
        "lambda1": num(g.lambda1),
        "lambda2": num(g.lambda2),
        "gap": num(g.gap),
        "normalized_gap": num(g.normalized_gap),
        "method": r.method.as_str(),
        "grid_m": opts.grid_m,
        "residual": num(r.residual),
    });
    if let Some(a) = r.agreement {
        rep.notes.push(format!("shooting/tridiagonal agreement: {}", sig(a)));
    }
    if r.near_singular {
        rep.notes.push("near the singular diameter: eigenvalues from shooting".into());
    }
    Ok(rep)
}

fn sweep_report(model: &ModelArgs, axis: SweepAxis, values: &[f64], opts: &SolveOptions) -> Result<Report> {
    let base = match axis {
        SweepAxis::D => ModelParams { n: model.require_n()?, k: model.require_k()?, d: model.d.unwrap_or(1.0) },
        SweepAxis::N => ModelParams { n: model.n.unwrap_or(1), k: model.require_k()?, d: model.require_d()? },
    };
    if values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(CliError::Usage("sweep values must be strictly increasing".into()));
    }
    let points = values
        .par_iter()
        .map(|&v| {
            let p = sweep_params(axis, v, &base)?;
            Ok(GapReport::from_solve(&solve_model(&p, opts)?, opts.grid_m))
        })
        .collect::<Result<Vec<GapReport>>>()?;
    let ng: Vec<f64> = points.iter().map(|g| g.normalized_gap).collect();
    let verdict = classify(&ng, MONOTONE_TOL);

    let mut rep = Report::new(["n", "K", "D", "lambda1", "lambda2", "gap", "normalized_gap", "method"]);
    let mut rows = Vec::with_capacity(points.len());
    for g in &points {
        rep.push(vec![
            g.params.n.to_string(),
            sig(g.params.k),
            sig(g.params.d),
            sig(g.lambda1),
            sig(g.lambda2),
            sig(g.gap),
            sig(g.normalized_gap),
            g.convergence.method.as_str().to_string(),
        ]);
        rows.push(json!({
            "n": g.params.n,
            "K": num(g.params.k),
            "D": num(g.params.d),
            "lambda1": num(g.lambda1),
            "lambda2": num(g.lambda2),
            "gap": num(g.gap),
            "normalized_gap": num(g.normalized_gap),
            "method": g.convergence.method.as_str(),
        }));
    }
    let axis_name = match axis {
        SweepAxis::D => "D",
        SweepAxis::N => "n",
    };
    rep.notes.push(format!("normalized gap along {axis_name}: {}", verdict.as_str()));
    rep.json = json!({ "axis": axis_name, "grid_m": opts.grid_m, "verdict": verdict.as_str(), "points": rows });
    Ok(rep)
}

fn ball_report(b: &BallSpec, opts: &SolveOptions) -> Result<Report> {
    let spec = ball_spectrum(b)?;
    let mut rep = Report::new(["quantity", "value"]);
    let mut json = json!({
        "n": b.n,
        "K": num(b.k),
        "R": num(b.radius),
        "lambda1": num(spec.lambda1),
        "lambda2": num(spec.lambda2),
        "gap": num(spec.gap()),
        "mode2": { "ell": spec.mode2.0, "radial_index": spec.mode2.1 },
        "second_radial": num(spec.second_radial),
        "first_dipole": num(spec.first_dipole),
        "first_quadrupole": num(spec.first_quadrupole),
        "dipole_below_radial": spec.dipole_below_radial,
    });
    let mut kv = |k: &str, v: String| rep.push(vec![k.to_string(), v]);
    kv("lambda1", sig(spec.lambda1));
    kv("lambda2", sig(spec.lambda2));
    kv("gap", sig(spec.gap()));
    kv("mode2", format!("ell={} radial={}", spec.mode2.0, spec.mode2.1));
    kv("second radial (ell=0)", sig(spec.second_radial));
    kv("first dipole (ell=1)", sig(spec.first_dipole));
    kv("first quadrupole (ell=2)", sig(spec.first_quadrupole));

    // The comparison statements need a convex ball of diameter at most pi/(2 sqrt K).
    match gap_comparison_check(b, opts) {
        Ok(v) => {
            let h = ball_hessian_check(b, opts)?;
            let mut margins = serde_json::Map::new();
            for (name, m) in v.margins() {
                kv(&format!("margin: {name}"), sig(m));
                margins.insert(name.replace(' ', "_"), num(m));
            }
            kv("model lambda1", sig(v.model_lambda1));
            kv("model lambda2", sig(v.model_lambda2));
            kv("max radial log-Hessian", sig(h.max_radial));
            kv("max tangential log-Hessian", sig(h.max_tangential));
            kv("comparison holds", v.passes().to_string());
            kv("Hessian bound holds", h.holds.to_string());
            json["comparison"] = json!({
                "model_lambda1": num(v.model_lambda1),
                "model_lambda2": num(v.model_lambda2),
                "margins": Value::Object(margins),
                "passes": v.passes(),
                "hessian": {
                    "max_radial": num(h.max_radial),
                    "max_tangential": num(h.max_tangential),
                    "centre_value": num(h.centre_value),
                    "holds": h.holds,
                },
            });
        }
        Err(gaplab_core::GapError::Precondition(msg)) => {
            rep.notes.push(format!("comparison skipped: {msg}"));
            json["comparison"] = Value::Null;
        }
        Err(e) => return Err(e.into()),
    }
    rep.json = json;
    Ok(rep)
}

fn geometry_report(n: usize, k: f64, d0: f64) -> Result<Report> {
    let probe = VariationProbe::canonical(n, k, d0, 0)?;
    let dr = dr_expansion_check(&probe)?;
    let sd = second_derivative_in_r_check(&probe)?;
    let jac = jacobi_orthogonality(&probe, 20)?;
    let mut rep = Report::new(["quantity", "value", "target"]);
    rep.push(vec!["d_r r^2 coefficient".into(), sig(dr.coefficient), sig(dr.target)]);
    rep.push(vec!["first variation of length".into(), sig(dr.first_variation), "0".into()]);
    for e in &sd.endpoints {
        rep.push(vec![format!("second r-derivative at s={}", sig(e.s)), sig(e.tangential), sig(sd.target)]);
        rep.push(vec![format!("normal components at s={}", sig(e.s)), sig(e.normal_max), "0".into()]);
    }
    rep.push(vec!["<gamma', J'> max".into(), sig(jac), "0".into()]);
    rep.json = json!({
        "n": n,
        "K": num(k),
        "d0": num(d0),
        "dr_coefficient": num(dr.coefficient),
        "dr_target": num(dr.target),
        "dr_relative_error": num(dr.relative_error),
        "first_variation": num(dr.first_variation),
        "second_derivative_target": num(sd.target),
        "endpoints": sd.endpoints.iter().map(|e| json!({
            "s": num(e.s),
            "tangential": num(e.tangential),
            "normal_max": num(e.normal_max),
        })).collect::<Vec<_>>(),
        "jacobi_orthogonality": num(jac),
    });
    Ok(rep)
}
