//! Reruns the published experiments and writes the computed values next to
//! the published ones.

use emscatter::diagnostics;
use emscatter::geometry::{m_phi_for_points, mesh_cube, mesh_ellipsoid, mesh_sphere, WeightRule};
use emscatter::io::fmt_f64;
use emscatter::linalg::GmresOptions;
use emscatter::many_body::{self, lattice_layout, Domain, TauMode};
use emscatter::one_body::{self, GammaFrame, GammaMatrix, GammaSource, OneBodySolution};
use emscatter::{CVec3, CollocationMesh, IncidentWave, Vec3};
use serde_json::json;

use crate::config::RunConfig;
use crate::output::Artifacts;
use crate::CliError;

pub const TABLES: [&str; 7] = ["q-sphere", "e-sphere", "e-ellipsoid", "e-cube", "sweep-1386", "many-27", "many-1000"];

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub quantity: String,
    pub parameter: String,
    pub published: f64,
    pub computed: f64,
}

impl Row {
    fn new(quantity: impl Into<String>, parameter: impl Into<String>, published: f64, computed: f64) -> Self {
        Self { quantity: quantity.into(), parameter: parameter.into(), published, computed }
    }

    pub fn deviation(&self) -> f64 {
        (self.computed - self.published).abs() / self.published.abs()
    }
}

struct Ctx {
    wave: IncidentWave,
    solver: GmresOptions,
    points: Option<usize>,
}

impl Ctx {
    fn m_phi(&self, default_points: usize) -> Result<usize, CliError> {
        let p = self.points.unwrap_or(default_points);
        m_phi_for_points(p).ok_or_else(|| CliError::Config(format!("no band layout gives {p} collocation points")))
    }

    fn solve(&self, mesh: &CollocationMesh, gamma: GammaSource) -> Result<OneBodySolution, CliError> {
        Ok(one_body::solve_one_body(mesh, &self.wave, gamma, self.solver)?)
    }

    fn e_error(&self, mesh: &CollocationMesh, s: &OneBodySolution, x: Vec3) -> Result<f64, CliError> {
        let e = diagnostics::check_e_asymptotic(mesh, &self.wave, &s.current, s.q_asymptotic, mesh.center(), &[x])?;
        Ok(e[0].1)
    }

    fn q_residual(&self, mesh: &CollocationMesh, s: &OneBodySolution) -> Result<f64, CliError> {
        let gq = one_body::gamma_applied(mesh, &s.current);
        Ok(diagnostics::check_q_residual_applied(s.q_exact, gq, mesh, &self.wave)?)
    }
}

fn diag(s: f64) -> Vec3 {
    Vec3::new(s, s, s)
}

fn at(x: Vec3) -> String {
    format!("x=({:.3e} {:.3e} {:.3e})", x.x, x.y, x.z)
}

/// Appends rows for the nonzero published parts of a field value.
fn field_rows(rows: &mut Vec<Row>, name: &str, x: Vec3, got: CVec3, published: [(f64, f64); 3]) {
    for (p, (re, im)) in published.into_iter().enumerate() {
        let comp = ["x", "y", "z"][p];
        if re != 0.0 {
            rows.push(Row::new(format!("{name}_{comp}.re"), at(x), re, got[p].re));
        }
        if im != 0.0 {
            rows.push(Row::new(format!("{name}_{comp}.im"), at(x), im, got[p].im));
        }
    }
}

fn sphere_run(ctx: &Ctx) -> Result<(CollocationMesh, OneBodySolution), CliError> {
    let mesh = mesh_sphere(1e-9, ctx.m_phi(766)?, WeightRule::EqualArea)?;
    let s = ctx.solve(&mesh, GammaSource::SphereAnalytic)?;
    Ok((mesh, s))
}

fn q_sphere(ctx: &Ctx) -> Result<Vec<Row>, CliError> {
    let (mesh, s) = sphere_run(ctx)?;
    let p = format!("P={} a=1e-9", mesh.len());
    Ok(vec![
        Row::new("Q_e_z.im*1e21", &p, 0.3925, s.q_exact.z.im * 1e21),
        Row::new("Q_a_z.im*1e21", &p, 0.3760, s.q_asymptotic.z.im * 1e21),
        Row::new("|Q_e-Q_a|/|Q_e|", &p, 4.21e-2, diagnostics::check_q_asymptotic(s.q_exact, s.q_asymptotic)?),
    ])
}

fn e_sphere(ctx: &Ctx) -> Result<Vec<Row>, CliError> {
    let (mesh, s) = sphere_run(ctx)?;
    let published = [
        (1e-8, [(1.0, 0.0010), (0.0001, 0.0), (0.0004, 0.0)], 4.67e-4),
        (1e-7, [(0.9999, 0.0105), (0.0, 0.0), (0.0, 0.0)], 4.67e-7),
        (1e-6, [(0.9945, 0.1045), (0.0, 0.0), (0.0, 0.0)], 4.70e-10),
    ];
    let mut rows = Vec::new();
    for (d, e, err) in published {
        let x = diag(d);
        field_rows(&mut rows, "E_e", x, s.e_exact(&mesh, &ctx.wave, x)?, e);
        field_rows(&mut rows, "E_a", x, s.e_asymptotic(&mesh, &ctx.wave, x)?, [e[0], (0.0, 0.0), (0.0, 0.0)]);
        rows.push(Row::new("|E_e-E_a|/|E_e|", at(x), err, ctx.e_error(&mesh, &s, x)?));
    }
    Ok(rows)
}

fn e_ellipsoid(ctx: &Ctx) -> Result<Vec<Row>, CliError> {
    let gamma = GammaSource::Numeric(GammaFrame::Local);
    let m_phi = ctx.m_phi(1052)?;
    let mesh = mesh_ellipsoid(1e-8, 1e-9, 1e-9, m_phi, WeightRule::EqualArea)?;
    let s = ctx.solve(&mesh, gamma)?;
    let mut rows = Vec::new();
    let published = [
        (1e-7, (0.9998, 0.0010), (1.0, 0.0010), 1.73e-4),
        (1e-6, (0.9999, 0.0105), (0.9999, 0.0105), 1.73e-7),
        (1e-5, (0.9945, 0.1045), (0.9945, 0.1045), 1.73e-10),
    ];
    for (d, ee, ea, err) in published {
        let x = Vec3::new(d, 0.1 * d, 0.1 * d);
        field_rows(&mut rows, "E_e", x, s.e_exact(&mesh, &ctx.wave, x)?, [ee, (0.0, 0.0), (0.0, 0.0)]);
        field_rows(&mut rows, "E_a", x, s.e_asymptotic(&mesh, &ctx.wave, x)?, [ea, (0.0, 0.0), (0.0, 0.0)]);
        rows.push(Row::new("|E_e-E_a|/|E_e|", at(x), err, ctx.e_error(&mesh, &s, x)?));
    }
    rows.push(Row::new("|Q+GQ-RHS|/|RHS|", format!("P={}", mesh.len()), 0.14, ctx.q_residual(&mesh, &s)?));
    if ctx.points.is_none() {
        let fine = mesh_ellipsoid(1e-8, 1e-9, 1e-9, 18, WeightRule::EqualArea)?;
        let sf = ctx.solve(&fine, gamma)?;
        rows.push(Row::new("|Q+GQ-RHS|/|RHS|", format!("P={}", fine.len()), 0.036, ctx.q_residual(&fine, &sf)?));
    }
    let x = diag(1e-7);
    for ((a, b), err) in [(1e-7, 1e-8), (1e-8, 1e-9), (1e-9, 1e-10), (1e-10, 1e-11)].into_iter().zip([2.65e-2, 2.76e-5, 2.76e-8, 2.76e-11]) {
        let mesh = mesh_ellipsoid(a, b, b, m_phi, WeightRule::EqualArea)?;
        let s = ctx.solve(&mesh, gamma)?;
        rows.push(Row::new("|E_e-E_a|/|E_e|", format!("a={a:e} b=c={b:e} {}", at(x)), err, ctx.e_error(&mesh, &s, x)?));
    }
    Ok(rows)
}

fn e_cube(ctx: &Ctx) -> Result<Vec<Row>, CliError> {
    let gamma = GammaSource::Numeric(GammaFrame::Local);
    let cube = |a: f64| -> Result<(CollocationMesh, OneBodySolution), CliError> {
        let mesh = mesh_cube(a, 10, diag(a))?;
        let s = ctx.solve(&mesh, gamma)?;
        Ok((mesh, s))
    };
    let (mesh, s) = cube(1e-7)?;
    let mut rows = Vec::new();
    let published = [
        (1e-4, [(-0.5, -0.8660), (0.0, 0.0), (0.0, 0.0)]),
        (1e-5, [(0.5, 0.8660), (0.0, 0.0), (0.0, 0.0)]),
        (1e-6, [(0.9945, 0.1045), (0.0006, 0.0), (0.0006, 0.0)]),
    ];
    for (d, e) in published {
        let x = diag(d);
        field_rows(&mut rows, "E_e", x, s.e_exact(&mesh, &ctx.wave, x)?, e);
        field_rows(&mut rows, "E_a", x, s.e_asymptotic(&mesh, &ctx.wave, x)?, [e[0], (0.0, 0.0), (0.0, 0.0)]);
    }
    for (d, err) in [(1e-3, 1.19e-8), (1e-4, 1.19e-7), (1e-5, 1.52e-6), (1e-6, 8.64e-4)] {
        let x = diag(d);
        rows.push(Row::new("|E_e-E_a|/|E_e|", at(x), err, ctx.e_error(&mesh, &s, x)?));
    }
    rows.push(Row::new("|Q+GQ-RHS|/|RHS|", format!("P={}", mesh.len()), 1.13e-2, ctx.q_residual(&mesh, &s)?));
    let x = diag(1e-6);
    for (a, err) in [(1e-8, 6.49e-7), (1e-9, 6.32e-10)] {
        let (mesh, s) = cube(a)?;
        rows.push(Row::new("|E_e-E_a|/|E_e|", format!("a={a:e} {}", at(x)), err, ctx.e_error(&mesh, &s, x)?));
    }
    Ok(rows)
}

fn sweep_1386(ctx: &Ctx) -> Result<Vec<Row>, CliError> {
    let m_phi = ctx.m_phi(1386)?;
    let x = diag(1e-5);
    let mut rows = Vec::new();
    let published = [(1e-7, 1.08e-6, 1.96e-2), (1e-8, 1.08e-9, 1.96e-2), (1e-9, 1.08e-12, 1.96e-2), (1e-10, 1.12e-15, 1.89e-2)];
    for (a, e_err, q_err) in published {
        let mesh = mesh_sphere(a, m_phi, WeightRule::EqualArea)?;
        let s = ctx.solve(&mesh, GammaSource::SphereAnalytic)?;
        let p = format!("P={} a={a:e}", mesh.len());
        rows.push(Row::new("|E_e-E_a|/|E_e|", format!("{p} {}", at(x)), e_err, ctx.e_error(&mesh, &s, x)?));
        rows.push(Row::new("|Q_e-Q_a|/|Q_e|", p, q_err, diagnostics::check_q_asymptotic(s.q_exact, s.q_asymptotic)?));
    }
    Ok(rows)
}

fn many(ctx: &Ctx, m: usize, a: f64) -> Result<many_body::ManyBodyResult, CliError> {
    let layout = lattice_layout(m, 1e-7, a, Domain::unit_cube())?;
    Ok(many_body::run_many_body(&layout, &ctx.wave, &GammaMatrix::sphere(), TauMode::Diagonal, ctx.solver)?)
}

/// (Im E_x, Re E_y, Im E_y) at the 27 centers for a = 1e-11.
const FIELD_27: [(f64, f64, f64); 27] = [
    (1.01e-14, 5.69e-17, -1.01e-14),
    (1.19e-14, 0.0, 0.0),
    (1.01e-14, -5.69e-17, 1.01e-14),
    (1.05e-2, 1.24e-16, -1.19e-14),
    (1.05e-2, 0.0, 0.0),
    (1.05e-2, -1.24e-16, 1.19e-14),
    (2.09e-2, 1.54e-16, -1.01e-14),
    (2.09e-2, 0.0, 0.0),
    (2.09e-2, -1.54e-16, 1.01e-14),
    (1.19e-14, 6.63e-17, -1.19e-14),
    (1.40e-14, 0.0, 0.0),
    (1.19e-14, -6.63e-17, 1.19e-14),
    (1.05e-2, 1.47e-16, -1.40e-14),
    (1.05e-2, 0.0, 0.0),
    (1.05e-2, -1.47e-16, 1.40e-14),
    (2.09e-2, 1.82e-16, -1.19e-14),
    (2.09e-2, 0.0, 0.0),
    (2.09e-2, -1.82e-16, 1.19e-14),
    (1.01e-14, 5.69e-17, -1.01e-14),
    (1.19e-14, 0.0, 0.0),
    (1.01e-14, -5.69e-17, 1.01e-14),
    (1.05e-2, 1.24e-16, -1.19e-14),
    (1.05e-2, 0.0, 0.0),
    (1.05e-2, -1.24e-16, 1.19e-14),
    (2.09e-2, 1.54e-16, -1.01e-14),
    (2.09e-2, 0.0, 0.0),
    (2.09e-2, -1.54e-16, 1.01e-14),
];

fn many_27(ctx: &Ctx) -> Result<Vec<Row>, CliError> {
    let mut rows = Vec::new();
    for (a, err) in [(1e-8, 8.16e-6), (1e-9, 8.16e-10), (1e-10, 8.16e-14), (1e-11, 8.16e-18)] {
        let r = many(ctx, 27, a)?;
        let p = format!("M=27 d=1e-7 a={a:e}");
        rows.push(Row::new("norm of E", &p, 5.20, r.norm));
        rows.push(Row::new("error of E", &p, err, r.error_estimate));
        if a == 1e-11 {
            for (i, (e, &(ex_im, ey_re, ey_im))) in r.fields.iter().zip(FIELD_27.iter()).enumerate() {
                let q = format!("{p} center {i}");
                rows.push(Row::new("E_x.re", &q, 1.0, e.x.re));
                rows.push(Row::new("E_x.im", &q, ex_im, e.x.im));
                if ey_re != 0.0 {
                    rows.push(Row::new("E_y.re", &q, ey_re, e.y.re));
                    rows.push(Row::new("E_y.im", &q, ey_im, e.y.im));
                }
            }
        }
    }
    Ok(rows)
}

fn many_1000(ctx: &Ctx) -> Result<Vec<Row>, CliError> {
    let mut rows = Vec::new();
    for (a, err) in [(1e-8, 3.02e-4), (1e-9, 3.02e-8), (1e-10, 3.02e-12), (1e-11, 3.02e-16)] {
        let r = many(ctx, 1000, a)?;
        let p = format!("M=1000 d=1e-7 a={a:e}");
        rows.push(Row::new("norm of E", &p, 31.6, r.norm));
        rows.push(Row::new("error of E", &p, err, r.error_estimate));
    }
    Ok(rows)
}

pub fn compute(table: &str, cfg: &RunConfig) -> Result<Vec<Row>, CliError> {
    let ctx = Ctx { wave: cfg.wave()?, solver: cfg.solver, points: cfg.mesh.points };
    match table {
        "q-sphere" => q_sphere(&ctx),
        "e-sphere" => e_sphere(&ctx),
        "e-ellipsoid" => e_ellipsoid(&ctx),
        "e-cube" => e_cube(&ctx),
        "sweep-1386" => sweep_1386(&ctx),
        "many-27" => many_27(&ctx),
        "many-1000" => many_1000(&ctx),
        other => Err(CliError::Config(format!("unknown table '{other}'; expected one of {}", TABLES.join(", ")))),
    }
}

pub fn run(table: &str, cfg: &RunConfig) -> Result<(), CliError> {
    let rows = compute(table, cfg)?;
    let echo = json!({"table": table, "run": cfg.to_json()});
    let out = Artifacts::new(&cfg.output.dir, echo)?;
    let lines = rows.iter().map(|r| {
        format!(
            "{},{},{},{},{}",
            r.quantity,
            r.parameter,
            fmt_f64(r.published),
            fmt_f64(r.computed),
            fmt_f64(r.deviation())
        )
    });
    out.csv(&format!("{table}.csv"), "quantity,parameter,published,computed,relative_deviation", lines)?;
    let worst = rows.iter().map(Row::deviation).fold(0.0, f64::max);
    println!("{table}: {} values, largest relative deviation {worst:.3e}", rows.len());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_table_is_a_config_error() {
        assert!(matches!(compute("nope", &RunConfig::default()), Err(CliError::Config(_))));
    }

    #[test]
    fn zero_points_is_a_config_error() {
        let mut cfg = RunConfig::default();
        cfg.mesh.points = Some(0);
        assert!(matches!(compute("q-sphere", &cfg), Err(CliError::Config(_))));
    }

    #[test]
    fn many_27_matches_within_factor_two() {
        let rows = compute("many-27", &RunConfig::default()).unwrap();
        let errors: Vec<&Row> = rows.iter().filter(|r| r.quantity == "error of E").collect();
        assert_eq!(errors.len(), 4);
        for r in errors {
            let ratio = r.computed / r.published;
            assert!((0.5..=2.0).contains(&ratio), "{r:?}");
        }
    }

    #[test]
    fn deviation_is_relative() {
        let r = Row::new("q", "p", 2.0, 2.5);
        assert_eq!(r.deviation(), 0.25);
    }
}
