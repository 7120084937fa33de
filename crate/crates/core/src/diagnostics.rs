//! Validation quantities for a solved one-body problem and convergence
//! sweeps over mesh resolution or body size.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{ShapeSpec, WeightRule};
use crate::io::fmt_f64;
use crate::linalg::GmresOptions;
use crate::one_body::{self, GammaSource, OneBodySolution, SurfaceCurrent};
use crate::vector::{CMat3, CVec3, Vec3};
use crate::wave::IncidentWave;
use crate::CollocationMesh;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub tangentiality_max: f64,
    pub q_residual_rel: f64,
    pub q_asym_rel: f64,
    /// (|x − x₁|, |E_e − E_a|/|E_e|) per evaluation point.
    pub e_asym_rel: Vec<(f64, f64)>,
}

/// How ΓQ enters the Q-residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QResidualMode {
    /// Σ_t Γ(t) J(t) Δ_t, the defining integral of ΓQ.
    #[default]
    Applied,
    /// The constant Γ of the solution times Q_e.
    Constant,
}

/// maxᵢ |J(i)·N(i)| / maxᵢ |J(i)|.
pub fn check_tangentiality(current: &SurfaceCurrent, mesh: &CollocationMesh) -> Result<f64> {
    let jmax = current.values.iter().map(|j| j.norm()).fold(0.0, f64::max);
    if jmax == 0.0 {
        return Err(Error::ZeroNorm("surface current is identically zero"));
    }
    let normal = current
        .values
        .iter()
        .zip(mesh.normals())
        .map(|(j, &n)| j.dot_real(n).norm())
        .fold(0.0, f64::max);
    Ok(normal / jmax)
}

fn moment_rhs(mesh: &CollocationMesh, wave: &IncidentWave) -> Result<CVec3> {
    let rhs = wave.curl_e0(mesh.center()) * -mesh.volume();
    if rhs.norm() == 0.0 {
        return Err(Error::ZeroNorm("right-hand side −|D|∇×E₀ vanishes"));
    }
    Ok(rhs)
}

/// |Q + ΓQ − (−|D|∇×E₀)| / |−|D|∇×E₀| with a constant Γ.
pub fn check_q_residual(q: CVec3, gamma: &CMat3, mesh: &CollocationMesh, wave: &IncidentWave) -> Result<f64> {
    check_q_residual_applied(q, gamma.mul_vec(q), mesh, wave)
}

/// Same residual with ΓQ supplied directly.
pub fn check_q_residual_applied(
    q: CVec3,
    gamma_q: CVec3,
    mesh: &CollocationMesh,
    wave: &IncidentWave,
) -> Result<f64> {
    let rhs = moment_rhs(mesh, wave)?;
    Ok((q + gamma_q - rhs).norm() / rhs.norm())
}

/// |Q_e − Q_a| / |Q_e|.
pub fn check_q_asymptotic(q_exact: CVec3, q_asym: CVec3) -> Result<f64> {
    let n = q_exact.norm();
    if n == 0.0 {
        return Err(Error::ZeroNorm("exact moment is zero"));
    }
    Ok((q_exact - q_asym).norm() / n)
}

/// Relative error between the quadrature field and the dipole field at
/// each point.
pub fn check_e_asymptotic(
    mesh: &CollocationMesh,
    wave: &IncidentWave,
    current: &SurfaceCurrent,
    q_asym: CVec3,
    center: Vec3,
    points: &[Vec3],
) -> Result<Vec<(f64, f64)>> {
    points
        .iter()
        .map(|&x| {
            let exact = one_body::field_e_exact(mesh, wave, current, x)?;
            let asym = one_body::field_e_asymptotic(wave, q_asym, center, x)?;
            Ok(((x - center).norm(), (exact - asym).norm() / exact.norm()))
        })
        .collect()
}

/// Point at `distance` from `center` along `direction`.
pub fn evaluation_point(center: Vec3, direction: Vec3, distance: f64) -> Result<Vec3> {
    let dir = direction.normalized().ok_or(Error::ZeroNorm("evaluation direction"))?;
    Ok(center + dir * distance)
}

pub fn validate(
    mesh: &CollocationMesh,
    wave: &IncidentWave,
    solution: &OneBodySolution,
    mode: QResidualMode,
    points: &[Vec3],
) -> Result<ValidationReport> {
    let gamma_q = match mode {
        QResidualMode::Applied => one_body::gamma_applied(mesh, &solution.current),
        QResidualMode::Constant => solution.gamma.gamma.mul_vec(solution.q_exact),
    };
    Ok(ValidationReport {
        tangentiality_max: check_tangentiality(&solution.current, mesh)?,
        q_residual_rel: check_q_residual_applied(solution.q_exact, gamma_q, mesh, wave)?,
        q_asym_rel: check_q_asymptotic(solution.q_exact, solution.q_asymptotic)?,
        e_asym_rel: check_e_asymptotic(
            mesh,
            wave,
            &solution.current,
            solution.q_asymptotic,
            mesh.center(),
            points,
        )?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SweepAxis {
    /// m_φ for banded shapes, points per edge for cubes.
    Resolution(Vec<usize>),
    /// Characteristic size in cm.
    Size(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub weight_rule: WeightRule,
    pub gamma: GammaSource,
    pub q_residual: QResidualMode,
    /// Distances from the body center at which E is compared.
    pub distances: Vec<f64>,
    pub direction: Vec3,
    pub solver: GmresOptions,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            weight_rule: WeightRule::EqualArea,
            gamma: GammaSource::SphereAnalytic,
            q_residual: QResidualMode::Applied,
            distances: vec![],
            direction: Vec3::new(1.0, 1.0, 1.0),
            solver: GmresOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub points: usize,
    pub size: f64,
    pub report: ValidationReport,
}

/// Runs the one-body pipeline for every entry of the sweep axis.
pub fn convergence_sweep(
    base: &ShapeSpec,
    axis: &SweepAxis,
    wave: &IncidentWave,
    opts: &SweepOptions,
) -> Result<Vec<SweepRow>> {
    let shapes: Vec<ShapeSpec> = match axis {
        SweepAxis::Resolution(ns) => ns.iter().map(|&n| base.with_resolution(n)).collect::<Result<_>>()?,
        SweepAxis::Size(sizes) => sizes.iter().map(|&s| base.scaled_to(s)).collect::<Result<_>>()?,
    };
    if shapes.is_empty() {
        return Err(invalid("sweep axis is empty"));
    }
    shapes
        .iter()
        .map(|shape| {
            let mesh = shape.build(opts.weight_rule)?;
            let solution = one_body::solve_one_body(&mesh, wave, opts.gamma, opts.solver)?;
            let points = opts
                .distances
                .iter()
                .map(|&d| evaluation_point(mesh.center(), opts.direction, d))
                .collect::<Result<Vec<_>>>()?;
            let report = validate(&mesh, wave, &solution, opts.q_residual, &points)?;
            Ok(SweepRow { points: mesh.len(), size: shape.size().unwrap_or(f64::NAN), report })
        })
        .collect()
}

/// One row per case: P, size, the scalar errors, then one column per distance.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> io::Result<()> {
    let distances: Vec<f64> = rows.first().map(|r| r.report.e_asym_rel.iter().map(|e| e.0).collect()).unwrap_or_default();
    write!(out, "points,size,tangentiality,q_residual,q_asymptotic")?;
    for d in &distances {
        write!(out, ",e_error@{}", fmt_f64(*d))?;
    }
    writeln!(out)?;
    for r in rows {
        write!(
            out,
            "{},{},{},{},{}",
            r.points,
            fmt_f64(r.size),
            fmt_f64(r.report.tangentiality_max),
            fmt_f64(r.report.q_residual_rel),
            fmt_f64(r.report.q_asym_rel)
        )?;
        for (_, e) in &r.report.e_asym_rel {
            write!(out, ",{}", fmt_f64(*e))?;
        }
        writeln!(out)?;
    }
    Ok(())
}
