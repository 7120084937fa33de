use emscatter::diagnostics::{self, QResidualMode};
use emscatter::many_body;
use emscatter::one_body::{self, GammaFrame, GammaMatrix};
use serde_json::json;

use crate::config::RunConfig;
use crate::output::{complex3, complex3_header, json_c3, json_f, json_m3, real3, Artifacts};
use crate::CliError;

pub fn one_body(cfg: &RunConfig) -> Result<(), CliError> {
    let wave = cfg.wave()?;
    let mesh = cfg.mesh()?;
    let points = cfg.evaluation_points(&mesh)?;
    log::info!("one-body: {} collocation points", mesh.len());
    let solution = one_body::solve_one_body(&mesh, &wave, cfg.gamma_source(), cfg.solver)?;
    let out = Artifacts::new(&cfg.output.dir, cfg.to_json())?;

    let j_header = format!("x,y,z,nx,ny,nz,w,{}", complex3_header("J"));
    let j_rows = (0..mesh.len()).map(|i| {
        format!(
            "{},{},{},{}",
            real3(mesh.points()[i]),
            real3(mesh.normals()[i]),
            emscatter::io::fmt_f64(mesh.weights()[i]),
            complex3(solution.current.values[i])
        )
    });
    out.csv("J.csv", &j_header, j_rows)?;

    let report = &solution.current.report;
    out.json(
        "Q.json",
        json!({
            "points": mesh.len(),
            "q_exact": json_c3(solution.q_exact),
            "q_asymptotic": json_c3(solution.q_asymptotic),
            "gamma": json_m3(&solution.gamma.gamma),
            "tau": json_m3(&solution.gamma.tau),
            "solver": {
                "iterations": report.iterations,
                "final_residual": json_f(report.final_residual),
                "converged": report.converged,
            },
        }),
    )?;

    let center = mesh.center();
    let mut e_rows = Vec::with_capacity(points.len());
    for &x in &points {
        let ee = solution.e_exact(&mesh, &wave, x)?;
        let ea = solution.e_asymptotic(&mesh, &wave, x)?;
        let rel = (ee - ea).norm() / ee.norm();
        e_rows.push(format!(
            "{},{},{},{},{}",
            emscatter::io::fmt_f64((x - center).norm()),
            real3(x),
            complex3(ee),
            complex3(ea),
            emscatter::io::fmt_f64(rel)
        ));
    }
    let e_header = format!("distance,x,y,z,{},{},relative_error", complex3_header("Ee"), complex3_header("Ea"));
    out.csv("E_table.csv", &e_header, e_rows)?;

    let v = diagnostics::validate(&mesh, &wave, &solution, QResidualMode::Applied, &points)?;
    out.json(
        "validation.json",
        json!({
            "points": mesh.len(),
            "tangentiality_max": json_f(v.tangentiality_max),
            "q_residual": json_f(v.q_residual_rel),
            "q_exact_vs_asymptotic": json_f(v.q_asym_rel),
            "e_exact_vs_asymptotic": v.e_asym_rel.iter().map(|(d, e)| json!({"distance": json_f(*d), "error": json_f(*e)})).collect::<Vec<_>>(),
        }),
    )?;
    println!(
        "P={} Q_e=({}) |Qe-Qa|/|Qe|={:.3e} GMRES {} its",
        mesh.len(),
        emscatter::io::fmt_c64(solution.q_exact.z),
        v.q_asym_rel,
        report.iterations
    );
    Ok(())
}

pub fn many_body(cfg: &RunConfig) -> Result<(), CliError> {
    let wave = cfg.wave()?;
    let layout = cfg.layout()?;
    let gamma = GammaMatrix::sphere();
    log::info!("many-body: {} particles", layout.len());
    let solution = many_body::solve_effective_field(&layout, &wave, &gamma, cfg.many_body.tau_mode, cfg.solver)?;
    let fields = many_body::effective_field_at_centers(&layout, &wave, &solution);
    let probe = cfg.probe(&layout);
    let error = many_body::error_estimate_many(&layout, &wave, &solution, probe)?;
    let norm = many_body::field_norm(&fields);
    let out = Artifacts::new(&cfg.output.dir, cfg.to_json())?;

    let c_rows = layout
        .centers()
        .iter()
        .zip(layout.volumes())
        .map(|(c, v)| format!("{},{}", real3(*c), emscatter::io::fmt_f64(*v)));
    out.csv("centers.csv", "x,y,z,volume", c_rows)?;
    let e_rows = layout.centers().iter().zip(&fields).enumerate().map(|(i, (c, e))| format!("{i},{},{}", real3(*c), complex3(*e)));
    out.csv("E_centers.csv", &format!("index,x,y,z,{}", complex3_header("E")), e_rows)?;
    out.json(
        "summary.json",
        json!({
            "particles": layout.len(),
            "norm_e": json_f(norm),
            "error_estimate": json_f(error),
            "probe": [json_f(probe.x), json_f(probe.y), json_f(probe.z)],
            "solver": {
                "iterations": solution.report.iterations,
                "final_residual": json_f(solution.report.final_residual),
                "converged": solution.report.converged,
            },
        }),
    )?;
    println!("M={} norm of E {:.4e} error {:.4e}", layout.len(), norm, error);
    Ok(())
}

pub fn gamma(cfg: &RunConfig) -> Result<(), CliError> {
    let mesh = cfg.mesh()?;
    let local = one_body::gamma_numeric(&mesh, GammaFrame::Local)?;
    let global = one_body::gamma_numeric(&mesh, GammaFrame::Global)?;
    let out = Artifacts::new(&cfg.output.dir, cfg.to_json())?;
    let body = |g: &GammaMatrix| json!({"gamma": json_m3(&g.gamma), "tau": json_m3(&g.tau)});
    out.json(
        "gamma.json",
        json!({
            "points": mesh.len(),
            "local": body(&local),
            "global": body(&global),
            "sphere": body(&GammaMatrix::sphere()),
        }),
    )?;
    let d = local.gamma.diagonal();
    println!("P={} local-frame Gamma diag ({:.6}, {:.6}, {:.6})", mesh.len(), d[0].re, d[1].re, d[2].re);
    Ok(())
}

pub fn mesh_export(cfg: &RunConfig) -> Result<(), CliError> {
    let mesh = cfg.mesh()?;
    let out = Artifacts::new(&cfg.output.dir, cfg.to_json())?;
    let rows = (0..mesh.len()).map(|i| {
        format!("{},{},{}", real3(mesh.points()[i]), real3(mesh.normals()[i]), emscatter::io::fmt_f64(mesh.weights()[i]))
    });
    out.csv("mesh.csv", "x,y,z,nx,ny,nz,w", rows)?;
    println!("P={} area {:.6e} volume {:.6e}", mesh.len(), mesh.area(), mesh.volume());
    Ok(())
}
