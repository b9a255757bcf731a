use std::fs;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{json, Value};

use pcf_besov::besov::{lambda_norm, region_curves, NormConfig};
use pcf_besov::critical::{bounds_check, critical_curve, p_grid};
use pcf_besov::function::{harmonic_extend, PiecewiseHarmonic};
use pcf_besov::io::{csv_string, matrix_market, read_vertex_function, vertex_id_map, write_vertex_function, Cell};
use pcf_besov::laplacian::cell_energy;
use pcf_besov::pcf::{presets, Budget, FractalDescriptor};
use pcf_besov::report::parse_exponent;
use pcf_besov::resistance::ResistanceSolver;
use pcf_besov::spectral::{
    divergence_diagnostic, equivalence_experiment, heat_besov_norm, neumann_eigs, tent_family, FamilySpec,
    HeatConfig, DENSE_LIMIT,
};
use pcf_besov::{Error, Fractal, Method};

use crate::args::*;
use crate::store::Part;

/// Eigenpairs kept for the heat method above the dense limit.
const HEAT_TRUNCATION: usize = 400;

pub struct Output {
    pub parts: Vec<Part>,
    /// Printed to stderr and copied into the manifest.
    pub summary: Value,
}

fn single(suffix: &str, bytes: impl Into<Vec<u8>>, summary: Value) -> Output {
    Output { parts: vec![Part { suffix: suffix.into(), bytes: bytes.into() }], summary }
}

pub fn load_descriptor(common: &Common) -> Result<FractalDescriptor> {
    match (&common.preset, &common.descriptor) {
        (Some(name), None) => Ok(presets::by_name(name)?),
        (None, Some(path)) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Ok(FractalDescriptor::from_json(&text)?)
        }
        _ => bail!(Error::InvalidArgument("give exactly one of --preset and --descriptor".into())),
    }
}

fn build(desc: &FractalDescriptor, common: &Common, level: usize) -> Result<Fractal> {
    let mut budget = Budget::default();
    if let Some(c) = common.budget_cells {
        budget.cells = c;
    }
    if let Some(v) = common.budget_vertices {
        budget.vertices = v;
    }
    Ok(Fractal::with_budget(desc, level, budget)?)
}

fn exponent(s: &str, what: &str) -> Result<f64> {
    parse_exponent(s).ok_or_else(|| anyhow!(Error::InvalidArgument(format!("{what} = {s:?} is not a number >= 1 or inf"))))
}

pub fn run(cmd: &Command, desc: &FractalDescriptor) -> Result<Output> {
    match cmd {
        Command::Info(a) => info(desc, a),
        Command::Partition(a) => partition(desc, a),
        Command::Laplacian(a) => laplacian(desc, a),
        Command::Extend(a) => extend(desc, a),
        Command::Resistance(a) => resistance(desc, a),
        Command::BesovNorm(a) => besov(desc, a),
        Command::Regions(a) => regions(desc, a),
        Command::CriticalCurve(a) => curve(desc, a),
        Command::Spectrum(a) => spectrum(desc, a),
        Command::Equivalence(a) => equivalence(desc, a),
    }
}

fn info(desc: &FractalDescriptor, a: &InfoArgs) -> Result<Output> {
    let fr = build(desc, &a.common, a.level)?;
    let hs = fr.structure();
    let levels: Vec<Value> = (0..=a.level)
        .map(|m| json!({"level": m, "cells": fr.table(m).cell_count(), "vertices": fr.table(m).vertex_count()}))
        .collect();
    let dims = fr.dims();
    let v = json!({
        "name": desc.name(),
        "branches": desc.branches(),
        "v0": desc.v0size(),
        "boundary": desc.boundary(),
        "r": desc.weights(),
        "d_h": dims.d_h,
        "d_w": dims.d_w,
        "d_s": dims.d_s,
        "trace_residual": hs.trace_residual(),
        "harmonic_structure_verified": hs.trace_residual() <= 1e-10,
        "alpha": hs.alpha(),
        "branch_measures": hs.branch_measures(),
        "levels": levels,
    });
    let text = serde_json::to_string_pretty(&v)? + "\n";
    Ok(single("json", text, json!({"d_h": dims.d_h, "d_w": dims.d_w, "d_s": dims.d_s})))
}

fn partition(desc: &FractalDescriptor, a: &LevelArgs) -> Result<Output> {
    let fr = build(desc, &a.common, a.level)?;
    let part = fr.table(a.level).partition();
    let n = desc.branches();
    let rows: Vec<Vec<Cell>> = part
        .words()
        .iter()
        .enumerate()
        .map(|(k, w)| {
            vec![
                Cell::from(k),
                Cell::Text(w.display(n).to_string()),
                Cell::from(w.len()),
                Cell::from(part.resistances()[k]),
                Cell::from(part.measures()[k]),
            ]
        })
        .collect();
    let csv = csv_string(&["cell", "word", "length", "resistance", "measure"], &rows);
    Ok(single("csv", csv, json!({"cells": part.len()})))
}

fn laplacian(desc: &FractalDescriptor, a: &LevelArgs) -> Result<Output> {
    let fr = build(desc, &a.common, a.level)?;
    let op = fr.laplacian(a.level);
    let comment = format!("graph Laplacian of {} at level {}\nrow i is vertex i-1 of the id map", desc.name(), a.level);
    let mtx = matrix_market(op.matrix(), &comment);
    let ids = vertex_id_map(&fr, a.level);
    Ok(Output {
        parts: vec![Part { suffix: "mtx".into(), bytes: mtx.into() }, Part { suffix: "ids.csv".into(), bytes: ids.into() }],
        summary: json!({"vertices": op.n(), "nonzeros": op.matrix().nnz()}),
    })
}

fn extend(desc: &FractalDescriptor, a: &ExtendArgs) -> Result<Output> {
    let fr = build(desc, &a.common, a.level)?;
    let h = harmonic_extend(&fr, &a.boundary, a.level)?;
    let energy = cell_energy(desc, fr.table(a.level), &h.values)?;
    Ok(single("csv", write_vertex_function(&h.values), json!({"vertices": h.values.len(), "energy": energy})))
}

fn resistance(desc: &FractalDescriptor, a: &ResistanceArgs) -> Result<Output> {
    let fr = build(desc, &a.common, a.level)?;
    let n = fr.table(a.level).vertex_count();
    for v in std::iter::once(a.from).chain(a.to) {
        if v >= n {
            bail!(Error::InvalidArgument(format!("vertex {v} not in level {} ({n} vertices)", a.level)));
        }
    }
    let solver = ResistanceSolver::new(&fr, a.level)?;
    let rows: Vec<Vec<Cell>> = match a.to {
        Some(y) => vec![vec![Cell::from(a.from), Cell::from(y), Cell::from(solver.resistance(a.from, y)?)]],
        None => {
            let diag = solver.green_diagonal()?;
            let rs = solver.resistances_from(a.from, &diag)?;
            rs.iter().enumerate().map(|(y, &r)| vec![Cell::from(a.from), Cell::from(y), Cell::from(r)]).collect()
        }
    };
    Ok(single("csv", csv_string(&["from", "to", "resistance"], &rows), json!({"pairs": rows.len()})))
}

fn besov_function(fr: &Fractal, a: &BesovArgs) -> Result<Vec<f64>> {
    let n = fr.table(a.level).vertex_count();
    let values = if let Some(path) = &a.function {
        let file = fs::File::open(path).with_context(|| format!("reading {}", path.display()))?;
        read_vertex_function(file)?
    } else if let Some(c) = a.constant {
        vec![c; n]
    } else if let Some(b) = &a.boundary {
        harmonic_extend(fr, b, a.level)?.values
    } else if let Some(seed) = a.seed {
        let family = FamilySpec::random_tent(fr, 1, seed, a.sigma);
        tent_family(fr, &family, a.level).remove(0).values
    } else {
        bail!(Error::InvalidArgument("give --function, --constant, --boundary or a --seed for a random function".into()));
    };
    if values.len() != n {
        bail!(Error::DimensionMismatch { expected: n, got: values.len() });
    }
    Ok(values)
}

fn besov(desc: &FractalDescriptor, a: &BesovArgs) -> Result<Output> {
    let method = Method::parse(&a.method)
        .ok_or_else(|| anyhow!(Error::InvalidArgument(format!("unknown method {:?}", a.method))))?;
    let p = exponent(&a.p, "p")?;
    let q = exponent(&a.q, "q")?;
    let working = a.working_level.unwrap_or(a.level + 1);
    let top = if method == Method::Direct { working.max(a.level) } else { a.level };
    let fr = build(desc, &a.common, top)?;
    let values = besov_function(&fr, a)?;
    let mut report = if method == Method::Heat {
        let n = values.len();
        let count = if n <= DENSE_LIMIT { n } else { HEAT_TRUNCATION };
        let spec = neumann_eigs(&fr, a.level, count)?;
        let mut rep = heat_besov_norm(&fr, &spec, &values, p, q, a.sigma, HeatConfig::default())?;
        if count < n {
            rep.warnings.push(format!("heat semigroup truncated to the lowest {count} of {n} eigenpairs"));
        }
        rep
    } else {
        let f = PiecewiseHarmonic::from_vertex(fr.table(a.level), &values)?;
        let cfg = NormConfig::new(a.level).with_working_level(working);
        lambda_norm(&fr, &f, method, p, q, a.sigma, cfg)?
    };
    report.seed = a.seed;
    let summary = json!({"value": report.value, "seminorm": report.seminorm, "warnings": report.warnings});
    Ok(single("json", report.to_json() + "\n", summary))
}

fn curve_csv(est: &pcf_besov::critical::CurveEstimate) -> String {
    let rows: Vec<Vec<Cell>> = est
        .points
        .iter()
        .map(|c| {
            vec![c.p, c.inv_p, c.lambda_hat, c.c_hat, c.c_lo, c.c_hi, c.fit_residual].into_iter().map(Cell::from).collect()
        })
        .collect();
    csv_string(&["p", "inv_p", "lambda_hat", "C_hat", "C_lo", "C_hi", "fit_residual"], &rows)
}

fn curve(desc: &FractalDescriptor, a: &CurveArgs) -> Result<Output> {
    if a.pcount == 0 || a.pmin > a.pmax {
        bail!(Error::InvalidArgument("need pmin <= pmax and pcount >= 1".into()));
    }
    let fr = build(desc, &a.common, a.levels)?;
    let grid = p_grid(a.pmin, a.pmax, a.pcount);
    let est = critical_curve(&fr, &grid, a.levels, a.seed)?;
    // The structural checks need the value at p = 2.
    let checks = if est.point(2.0).is_some() {
        bounds_check(&est)
    } else {
        let mut with_two = grid.clone();
        with_two.push(2.0);
        with_two.sort_by(f64::total_cmp);
        bounds_check(&critical_curve(&fr, &with_two, a.levels, a.seed)?)
    };
    let summary = json!({"bounds_checks": checks.checks, "all_passed": checks.passed()});
    Ok(single("csv", curve_csv(&est), summary))
}

fn regions(desc: &FractalDescriptor, a: &RegionsArgs) -> Result<Output> {
    if a.pcount < 2 {
        bail!(Error::InvalidArgument("pcount must be at least 2".into()));
    }
    let fr = build(desc, &a.common, a.levels)?;
    let lo = 1.0 / 64.0;
    let inv_p: Vec<f64> = (0..a.pcount).map(|k| lo + (1.0 - lo) * k as f64 / (a.pcount - 1) as f64).collect();
    let ps: Vec<f64> = inv_p.iter().map(|s| 1.0 / s).collect();
    let est = critical_curve(&fr, &ps, a.levels, a.seed)?;
    let c_hat: Vec<f64> = est.points.iter().map(|c| c.c_hat).collect();
    let rows: Vec<Vec<Cell>> = region_curves(fr.dims(), &inv_p, &c_hat)?
        .into_iter()
        .map(|r| vec![r.inv_p, r.l1, r.l2, r.c_hat, r.c_lower, r.c_upper].into_iter().map(Cell::from).collect())
        .collect();
    let csv = csv_string(&["inv_p", "L1", "L2", "C_hat", "C_lower", "C_upper"], &rows);
    Ok(single("csv", csv, json!({"rows": rows.len()})))
}

fn spectrum(desc: &FractalDescriptor, a: &SpectrumArgs) -> Result<Output> {
    let fr = build(desc, &a.common, a.level)?;
    let n = fr.table(a.level).vertex_count();
    let spec = neumann_eigs(&fr, a.level, a.count.min(n))?;
    let rows: Vec<Vec<Cell>> = spec.values.iter().enumerate().map(|(k, &l)| vec![Cell::from(k), Cell::from(l)]).collect();
    let summary = json!({
        "count": spec.count(),
        "max_residual": spec.max_residual(&fr.laplacian(a.level)),
        "orthonormality_error": spec.orthonormality_error(),
    });
    Ok(single("csv", csv_string(&["index", "lambda"], &rows), summary))
}

fn equivalence(desc: &FractalDescriptor, a: &EquivalenceArgs) -> Result<Output> {
    let q = exponent(&a.q, "q")?;
    let top = a.level + if a.divergence { 2 } else { 1 };
    let fr = build(desc, &a.common, top)?;
    let c_est = match a.c_estimate {
        Some(c) => c,
        None => critical_curve(&fr, &[a.p], top, a.seed)?.points[0].c_hat,
    };
    let heat = HeatConfig::default();
    let (text, summary) = if a.divergence {
        let family = FamilySpec::NearHarmonic { count: a.n, seed: a.seed, perturbation: a.perturbation };
        let rep = divergence_diagnostic(&fr, a.p, q, a.sigma, c_est, &family, a.level, heat)?;
        let s = json!({"fires": rep.fires, "heat_change": rep.heat_change, "warnings": rep.warnings});
        (serde_json::to_string_pretty(&rep)?, s)
    } else {
        let family = FamilySpec::random_tent(&fr, a.n, a.seed, a.sigma);
        let rep = equivalence_experiment(&fr, a.p, q, a.sigma, c_est, &family, a.level, heat)?;
        let s = json!({
            "region": rep.region.label(),
            "method": rep.method.name(),
            "spread": [rep.coarse.spread, rep.fine.spread],
            "stable": rep.stable,
            "warnings": rep.warnings,
        });
        (serde_json::to_string_pretty(&rep)?, s)
    };
    Ok(single("json", text + "\n", summary))
}
