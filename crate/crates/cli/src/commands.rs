use std::fmt::Write as _;

use hofer_core::constructions::{
    calibrate_transport_time, default_loop, default_swap_with, two_pipe_schedule, Calibration,
    CalibrationOptions,
};
use hofer_core::flow::{
    hofer_energy, integrate_flow, trajectory_class, IntegratorOptions, TransportReport,
};
use hofer_core::geometry::{build_sphere, Disk};
use hofer_core::homology::{l_a_bounds, Basis, H1Class};
use hofer_core::reeb::{
    build_contour_tree, find_median, rho_normalized, rho_raw, rho_vector, MedianLocation,
    ReebOptions,
};
use serde_json::{json, Value};

use crate::acceptance;
use crate::config::{ConstructKind, RunConfig, Settings};
use crate::error::{config, CliError, Result};
use crate::report::Output;

fn reeb_options(s: &Settings) -> ReebOptions {
    ReebOptions {
        slabs: s.slabs,
        grid: s.grid,
    }
}

pub fn rho(cfg: &RunConfig, s: &Settings, out: &mut Output) -> Result<()> {
    let (s1, s2) = s.levels()?;
    let names: Vec<String> = match &cfg.rho {
        Some(r) => r.fields.clone(),
        None => cfg.fields.keys().cloned().collect(),
    };
    if names.is_empty() {
        return Err(config("`rho` needs at least one field"));
    }
    let sweep = cfg.rho.as_ref().map_or(&[][..], |r| &r.sweep[..]);
    for &v in sweep {
        if !(v > s1 && v <= 2.0 * s.a - 1.0 + 1e-12) {
            return Err(config(format!("sweep value s2 = {v} outside (s1, 2A - 1]")));
        }
    }
    let opts = reeb_options(s);
    let mut values = Vec::new();
    for name in &names {
        let h = cfg.field(name, s.grid)?;
        let raw = rho_raw(&h, s.a, s1, s2, &opts)?;
        let normalized = rho_normalized(&h, s.a, s1, s2, &opts)?;
        values.push(json!({ "field": name, "rho_raw": raw, "rho_normalized": normalized }));
        if !sweep.is_empty() {
            let rows = sweep
                .iter()
                .map(|&v| Ok((v, rho_raw(&h, s.a, s1, v, &opts)?)))
                .collect::<Result<Vec<_>>>()?;
            out.csv(&format!("sweep_{name}.csv"), &["s2", "rho_raw"], &rows)?;
        }
    }
    let mut body = json!({ "values": values });
    if let Some(v) = cfg.rho.as_ref().and_then(|r| r.vector.as_ref()) {
        let h = cfg.field(&v.field, s.grid)?;
        let domain = Disk::with_area(v.center, v.area);
        let coeffs = rho_vector(&h, domain, &v.punctures, s.a, s1, s2, &opts)?;
        body["vector"] =
            json!({ "field": v.field, "punctures": v.punctures, "coefficients": coeffs });
    }
    out.report("rho.json", "rho", s, body)
}

pub fn reeb(cfg: &RunConfig, s: &Settings, out: &mut Output) -> Result<()> {
    let rc = cfg
        .reeb
        .as_ref()
        .ok_or_else(|| config("`reeb` needs a [reeb] section"))?;
    let h = cfg.field(&rc.field, s.grid)?;
    let sphere = build_sphere(&h, rc.s, s.a)?;
    let tree = build_contour_tree(&sphere, s.slabs)?;
    let median = find_median(&tree)?;

    let mut dot = String::from("graph reeb {\n");
    for (k, n) in tree.nodes().iter().enumerate() {
        let _ = if n.atom > 0.0 {
            writeln!(
                dot,
                "  n{k} [label=\"{:.6}\\natom {:.6}\"];",
                n.value, n.atom
            )
        } else {
            writeln!(dot, "  n{k} [label=\"{:.6}\"];", n.value)
        };
    }
    for (e, a) in tree.arcs().iter().enumerate() {
        let _ = writeln!(
            dot,
            "  n{} -- n{} [label=\"a{e} {:.6}\"];",
            a.lo,
            a.hi,
            a.measure()
        );
    }
    dot.push_str("}\n");
    out.text("reeb.dot", &dot)?;

    let rows: Vec<_> = tree
        .arcs()
        .iter()
        .enumerate()
        .map(|(e, a)| {
            let (lo, hi) = a.levels();
            (e, a.lo, a.hi, lo, hi, a.measure())
        })
        .collect();
    out.csv(
        "reeb_arcs.csv",
        &["arc", "lo", "hi", "lo_value", "hi_value", "measure"],
        &rows,
    )?;

    let location = match median.location {
        MedianLocation::Node(v) => json!({ "node": v }),
        MedianLocation::Arc { arc, level } => json!({ "arc": arc, "level": level }),
    };
    let body = json!({
        "field": rc.field,
        "s": rc.s,
        "nodes": tree.nodes().len(),
        "arcs": tree.arcs().len(),
        "total_measure": tree.total_measure(),
        "median": {
            "location": location,
            "value": median.value,
            "max_component": median.max_component,
        },
    });
    out.report("reeb.json", "reeb", s, body)
}

pub fn simulate(cfg: &RunConfig, s: &Settings, out: &mut Output) -> Result<()> {
    let sc = cfg
        .simulate
        .as_ref()
        .ok_or_else(|| config("`simulate` needs a [simulate] section"))?;
    if !(sc.duration.is_finite() && sc.duration != 0.0) {
        return Err(config("simulate.duration must be finite and nonzero"));
    }
    if sc.points.is_empty() {
        return Err(config("simulate.points is empty"));
    }
    let h = cfg.field(&sc.field, s.grid)?;
    let opts = IntegratorOptions::with_step(s.step);
    let disk = sc.disk.map(|[x, y, r]| Disk::new([x, y], r));
    let mut runs = Vec::new();
    for (k, &p) in sc.points.iter().enumerate() {
        let tr = integrate_flow(&h, p, sc.duration, &opts)?;
        let rows: Vec<_> = tr
            .times
            .iter()
            .zip(&tr.points)
            .map(|(&t, q)| (t, q[0], q[1]))
            .collect();
        let name = format!("trajectory_{k}.csv");
        out.csv(&name, &["t", "θ", "h"], &rows)?;
        let winding = disk.map(|d| match trajectory_class(&tr, &sc.punctures, d) {
            Ok(w) => json!({ "windings": w.windings, "residuals": w.residuals }),
            Err(e) => json!({ "error": e.to_string() }),
        });
        runs.push(json!({
            "start": p,
            "end": tr.end(),
            "steps": tr.times.len() - 1,
            "fallback_steps": tr.fallback_steps,
            "file": name,
            "winding": winding,
        }));
    }
    let body = json!({
        "field": sc.field,
        "duration": sc.duration,
        "energy": hofer_energy(&h, sc.duration.abs())?,
        "trajectories": runs,
    });
    out.report("simulate.json", "simulate", s, body)
}

pub fn transport_json(r: &TransportReport) -> Value {
    json!({
        "time": r.time,
        "symmetric_difference": r.symmetric_difference,
        "source_area": r.source_area,
        "target_area": r.target_area,
        "image_area": r.image_area,
        "area_drift": r.area_drift,
        "interior_inside": r.interior_inside,
        "boundary_samples": r.boundary_samples,
        "resolved": r.resolved,
        "fallback_steps": r.fallback_steps,
        "tolerance": r.tolerance,
        "pass": r.pass,
    })
}

fn calibration_json(c: &Calibration, area: f64) -> Value {
    json!({
        "time": c.time,
        "excess": c.time - area,
        "mismatch": c.mismatch,
        "relative_mismatch": c.relative_mismatch,
        "evaluations": c.evaluations,
        "transport": transport_json(&c.report),
    })
}

pub fn construct(cfg: &RunConfig, s: &Settings, out: &mut Output) -> Result<()> {
    let cc = cfg
        .construct
        .as_ref()
        .ok_or_else(|| config("`construct` needs a [construct] section"))?;
    let a = cc.area;
    if !(a > 0.0 && a < 1.0) {
        return Err(config(format!("construct.area = {a} must lie in (0, 1)")));
    }
    if !(cc.width_factor > 0.0 && cc.width_factor <= 1.0) {
        return Err(config("construct.width_factor must lie in (0, 1]"));
    }
    if cc.kind == ConstructKind::TwoPipe && !matches!(cc.sign, -1 | 1) {
        return Err(config("construct.sign must be 1 or -1"));
    }
    let opts = CalibrationOptions::default();
    let window = (0.5 * a, 2.0 * a);
    let body = match cc.kind {
        ConstructKind::Swap => {
            let c = default_swap_with(a, s.grid, cc.width_factor)?;
            let cal = calibrate_transport_time(&c.field, c.source, c.target, window, &opts)?;
            json!({
                "kind": "swap",
                "area": a,
                "width": c.spec.width,
                "pipe_length": c.pipe_length,
                "tube_area": c.tube_area,
                "energy": hofer_energy(&c.field, cal.time)?,
                "stages": [calibration_json(&cal, a)],
            })
        }
        ConstructKind::Loop => {
            let (c, p) = default_loop(a, s.grid)?;
            let cal = calibrate_transport_time(&c.field, c.source, c.source, window, &opts)?;
            let tr = integrate_flow(
                &c.field,
                c.source.center,
                cal.time,
                &IntegratorOptions::with_step(s.step),
            )?;
            let w = trajectory_class(&tr, &[p], c.source)?;
            json!({
                "kind": "loop",
                "area": a,
                "width": c.spec.width,
                "pipe_length": c.pipe_length,
                "puncture": p,
                "energy": hofer_energy(&c.field, cal.time)?,
                "windings": w.windings,
                "stages": [calibration_json(&cal, a)],
            })
        }
        ConstructKind::TwoPipe => {
            let sched = two_pipe_schedule(a, cc.sign, s.grid, &opts)?;
            let w = sched.class(&IntegratorOptions::with_step(s.step))?;
            let stages: Vec<_> = sched
                .calibrations
                .iter()
                .map(|c| calibration_json(c, a))
                .collect();
            json!({
                "kind": "two-pipe",
                "area": a,
                "sign": cc.sign,
                "punctures": sched.punctures,
                "energy": sched.energy()?,
                "windings": w.windings,
                "stages": stages,
            })
        }
    };
    out.report("construct.json", "construct", s, body)
}

pub fn bounds(cfg: &RunConfig, s: &Settings, out: &mut Output) -> Result<()> {
    let surface = cfg.surface()?;
    let bc = cfg
        .bounds
        .as_ref()
        .ok_or_else(|| config("`bounds` needs a [bounds] section"))?;
    let basis = Basis::for_surface(&surface).map_err(|e| config(e.to_string()))?;
    let levels = s.explicit_levels()?;
    let mut reports = Vec::new();
    for c in &bc.classes {
        let alpha = H1Class::new(basis.clone(), c.clone()).map_err(|e| config(e.to_string()))?;
        let r = l_a_bounds(&surface, s.a, &alpha, levels)?;
        reports.push(json!({
            "class": c,
            "lower": r.lower.value,
            "lower_source": format!("{:?}", r.lower.source),
            "upper": r.upper.value,
            "upper_source": format!("{:?}", r.upper.source),
            "conjectured_stable": r.conjectured_stable,
            "lipschitz_constant": r.lipschitz_constant,
        }));
    }
    let body = json!({
        "surface": {
            "genus": surface.genus,
            "punctures": surface.punctures,
            "area": surface.area,
        },
        "bounds": reports,
    });
    out.report("bounds.json", "bounds", s, body)
}

/// Runs the acceptance criteria, printing one line each.
pub fn verify(cfg: &RunConfig, s: &Settings, out: &mut Output) -> Result<()> {
    let ids: Vec<u8> = match cfg.verify.as_ref().map(|v| v.criteria.clone()) {
        Some(v) if !v.is_empty() => v,
        _ => acceptance::CRITERIA.iter().map(|c| c.0).collect(),
    };
    if let Some(bad) = ids.iter().find(|&&i| acceptance::title(i).is_none()) {
        return Err(config(format!("unknown criterion {bad}")));
    }
    let mut results = Vec::new();
    for &id in &ids {
        let o = acceptance::run(id, s.seed);
        println!("{}", o.line());
        results.push(o);
    }
    let failed = results.iter().filter(|o| !o.pass).count();
    let body = json!({
        "criteria": results
            .iter()
            .map(|o| json!({ "id": o.id, "title": o.title, "pass": o.pass, "detail": o.detail }))
            .collect::<Vec<_>>(),
        "failed": failed,
    });
    out.report("verify.json", "verify", s, body)?;
    if failed > 0 {
        return Err(CliError::Acceptance {
            failed,
            total: results.len(),
        });
    }
    Ok(())
}
