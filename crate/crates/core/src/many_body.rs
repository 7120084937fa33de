//! Scattering by many small bodies through their effective fields.
//!
//! For bodies at centers x_m with volumes |D_m| the amplitudes A_m solve
//!
//! A_m + Σ_{j≠m} τ [k² g(x_m,x_j) I + ∇∇g(x_m,x_j)] |D_j| A_j = τ ∇×E₀(x_m),
//!
//! and Q_m = −|D_m| A_m. The field outside the bodies is
//! E(x) = E₀(x) + Σ_m ∇g(x,x_m) × Q_m.

use std::f64::consts::PI;
use std::io::{self, BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::io::fmt_f64;
use crate::kernel::{self, full_at, gradient_at};
use crate::linalg::{self, CMatrix, GmresOptions, LinearOperator, SolveReport};
use crate::one_body::GammaMatrix;
use crate::vector::{CMat3, CVec3, Vec3, C64, I};
use crate::wave::IncidentWave;

/// Axis-aligned box containing the bodies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub min: Vec3,
    pub max: Vec3,
}

impl Domain {
    pub fn new(min: Vec3, max: Vec3) -> Result<Self> {
        if !(min.x < max.x && min.y < max.y && min.z < max.z) {
            return Err(invalid("domain box must have positive extent"));
        }
        Ok(Self { min, max })
    }

    /// [0, 1]³ in cm.
    pub fn unit_cube() -> Self {
        Self { min: Vec3::ZERO, max: Vec3::new(1.0, 1.0, 1.0) }
    }

    pub fn contains(&self, p: Vec3) -> bool {
        (0..3).all(|q| p[q] >= self.min[q] && p[q] <= self.max[q])
    }
}

impl Default for Domain {
    fn default() -> Self {
        Self::unit_cube()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManyBodyLayout {
    centers: Vec<Vec3>,
    radius: f64,
    spacing: f64,
    volumes: Vec<f64>,
    domain: Domain,
}

fn min_pair_distance(centers: &[Vec3]) -> f64 {
    centers
        .par_iter()
        .enumerate()
        .map(|(i, &p)| centers[i + 1..].iter().map(|&q| (p - q).norm()).fold(f64::INFINITY, f64::min))
        .reduce(|| f64::INFINITY, f64::min)
}

impl ManyBodyLayout {
    /// Bodies of radius `radius` at explicit centers. Volumes default to
    /// (4/3)πa³; the spacing is the smallest center distance.
    pub fn new(centers: Vec<Vec3>, radius: f64, volumes: Option<Vec<f64>>, domain: Domain) -> Result<Self> {
        if centers.is_empty() {
            return Err(invalid("layout needs at least one center"));
        }
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(invalid(format!("radius must be non-negative, got {radius}")));
        }
        let volumes = volumes.unwrap_or_else(|| vec![4.0 / 3.0 * PI * radius.powi(3); centers.len()]);
        if volumes.len() != centers.len() || volumes.iter().any(|&v| !(v >= 0.0)) {
            return Err(invalid("need one non-negative volume per center"));
        }
        if let Some(p) = centers.iter().find(|p| !domain.contains(**p)) {
            return Err(invalid(format!("center {p:?} lies outside the domain")));
        }
        let spacing = min_pair_distance(&centers);
        if spacing.is_finite() {
            let threshold = kernel::min_separation(centers[0], centers[0]);
            if spacing < threshold {
                return Err(Error::CoincidentPoints { distance: spacing, threshold });
            }
            if radius >= spacing {
                return Err(invalid(format!("radius {radius:e} must be below the spacing {spacing:e}")));
            }
            if radius / spacing > 0.1 {
                log::warn!("a/d = {:.3} exceeds 0.1; bodies are not well separated", radius / spacing);
            }
        }
        Ok(Self { centers, radius, spacing, volumes, domain })
    }

    /// Replaces every volume by c_D·a³.
    pub fn with_shape_constant(mut self, c_d: f64) -> Result<Self> {
        if !(c_d > 0.0) {
            return Err(invalid("shape constant must be positive"));
        }
        let v = c_d * self.radius.powi(3);
        self.volumes.iter_mut().for_each(|x| *x = v);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn centers(&self) -> &[Vec3] {
        &self.centers
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Smallest distance between two centers (infinite for one body).
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Writes `x,y,z,volume` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "x,y,z,volume")?;
        for (c, v) in self.centers.iter().zip(&self.volumes) {
            writeln!(out, "{},{},{},{}", fmt_f64(c.x), fmt_f64(c.y), fmt_f64(c.z), fmt_f64(*v))?;
        }
        Ok(())
    }

    /// Reads `x,y,z[,volume]` rows; a header line is skipped if present.
    pub fn read_csv<R: BufRead>(input: R, radius: f64, domain: Domain) -> Result<Self> {
        let mut centers = Vec::new();
        let mut volumes = Vec::new();
        let mut with_volume = None;
        for (n, line) in input.lines().enumerate() {
            let line = line.map_err(|e| invalid(format!("reading centers: {e}")))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
            let values = match parsed {
                Ok(v) => v,
                Err(_) if n == 0 => continue,
                Err(e) => return Err(invalid(format!("line {}: {e}", n + 1))),
            };
            if !(values.len() == 3 || values.len() == 4) {
                return Err(invalid(format!("line {}: expected 3 or 4 columns", n + 1)));
            }
            let has_v = values.len() == 4;
            if *with_volume.get_or_insert(has_v) != has_v {
                return Err(invalid(format!("line {}: inconsistent column count", n + 1)));
            }
            centers.push(Vec3::new(values[0], values[1], values[2]));
            if has_v {
                volumes.push(values[3]);
            }
        }
        Self::new(centers, radius, with_volume.unwrap_or(false).then_some(volumes), domain)
    }
}

/// n×n×n lattice with spacing `d` anchored at the domain's minimum corner:
/// x_(i,j,l) = min + (i, j, l)·d, with i running fastest.
pub fn lattice_layout(m: usize, d: f64, a: f64, domain: Domain) -> Result<ManyBodyLayout> {
    let n = (m as f64).cbrt().round() as usize;
    if m == 0 || n * n * n != m {
        return Err(invalid(format!("M = {m} is not a perfect cube; pass explicit centers instead")));
    }
    if !(d > 0.0) {
        return Err(invalid("spacing must be positive"));
    }
    let span = d * (n - 1) as f64;
    if (0..3).any(|q| domain.min[q] + span > domain.max[q]) {
        return Err(invalid(format!("a {n}x{n}x{n} lattice with spacing {d:e} does not fit in the domain")));
    }
    let mut centers = Vec::with_capacity(m);
    for l in 0..n {
        for j in 0..n {
            for i in 0..n {
                centers.push(domain.min + Vec3::new(i as f64, j as f64, l as f64) * d);
            }
        }
    }
    let mut layout = ManyBodyLayout::new(centers, a, None, domain)?;
    if n == 1 {
        layout.spacing = d;
    }
    Ok(layout)
}

/// How τ multiplies each coupling block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TauMode {
    /// Row group p is scaled by τ(p,p) only.
    #[default]
    Diagonal,
    /// The full 3×3 τ.
    Full,
}

fn tau_for(gamma: &GammaMatrix, mode: TauMode) -> CMat3 {
    match mode {
        TauMode::Diagonal => CMat3::diag(gamma.tau.diagonal()),
        TauMode::Full => gamma.tau,
    }
}

/// k² g(x,t) I + ∇∇g(x,t).
fn coupling(k: f64, d: Vec3) -> CMat3 {
    let (g, _, hess) = full_at(k, d);
    hess.add(&CMat3::identity().scale(g * (k * k)))
}

/// Matrix-free form of the effective-field system.
pub struct ManyBodyOperator<'a> {
    layout: &'a ManyBodyLayout,
    k: f64,
    tau: CMat3,
}

impl<'a> ManyBodyOperator<'a> {
    pub fn new(layout: &'a ManyBodyLayout, k: f64, gamma: &GammaMatrix, mode: TauMode) -> Self {
        Self { layout, k, tau: tau_for(gamma, mode) }
    }

    fn block(&self, m: usize, j: usize) -> CMat3 {
        let c = self.layout.centers();
        self.tau.mul_mat(&coupling(self.k, c[m] - c[j])).scale(C64::new(self.layout.volumes[j], 0.0))
    }
}

impl LinearOperator for ManyBodyOperator<'_> {
    fn dim(&self) -> usize {
        3 * self.layout.len()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let c = self.layout.centers();
        let vols = self.layout.volumes();
        y.par_chunks_mut(3).enumerate().for_each(|(m, ym)| {
            let mut acc = CVec3::ZERO;
            for j in 0..c.len() {
                if j == m {
                    continue;
                }
                let xj = CVec3::new(x[3 * j], x[3 * j + 1], x[3 * j + 2]);
                acc += coupling(self.k, c[m] - c[j]).mul_vec(xj) * vols[j];
            }
            let acc = self.tau.mul_vec(acc);
            ym[0] = x[3 * m] + acc.x;
            ym[1] = x[3 * m + 1] + acc.y;
            ym[2] = x[3 * m + 2] + acc.z;
        });
    }
}

/// Dense 3M×3M matrix of the effective-field system.
pub fn assemble_dense(layout: &ManyBodyLayout, k: f64, gamma: &GammaMatrix, mode: TauMode) -> CMatrix {
    let op = ManyBodyOperator::new(layout, k, gamma, mode);
    let n = layout.len();
    let mut a = CMatrix::zeros(3 * n, 3 * n);
    a.rows_mut_par().enumerate().for_each(|(row, out)| {
        let (m, p) = (row / 3, row % 3);
        for j in 0..n {
            if j == m {
                out[3 * j + p] = C64::new(1.0, 0.0);
                continue;
            }
            let b = op.block(m, j);
            for q in 0..3 {
                out[3 * j + q] = b.get(p, q);
            }
        }
    });
    a
}

/// A₀ₘ = τ ∇×E₀(x_m), interleaved.
pub fn rhs(layout: &ManyBodyLayout, wave: &IncidentWave, gamma: &GammaMatrix, mode: TauMode) -> Vec<C64> {
    let tau = tau_for(gamma, mode);
    layout.centers().iter().flat_map(|&c| tau.mul_vec(wave.curl_e0(c)).to_array()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveFieldSolution {
    pub a: Vec<CVec3>,
    pub q: Vec<CVec3>,
    pub report: SolveReport,
}

impl EffectiveFieldSolution {
    fn from_vector(layout: &ManyBodyLayout, x: &[C64], report: SolveReport) -> Self {
        let a: Vec<CVec3> = x.chunks_exact(3).map(|c| CVec3::new(c[0], c[1], c[2])).collect();
        let q = a.iter().zip(layout.volumes()).map(|(a, &v)| *a * -v).collect();
        Self { a, q, report }
    }
}

pub fn solve_effective_field(
    layout: &ManyBodyLayout,
    wave: &IncidentWave,
    gamma: &GammaMatrix,
    mode: TauMode,
    opts: GmresOptions,
) -> Result<EffectiveFieldSolution> {
    let op = ManyBodyOperator::new(layout, wave.wavenumber(), gamma, mode);
    let (x, report) = linalg::solve_gmres(&op, &rhs(layout, wave, gamma, mode), opts)?;
    report.ensure_converged()?;
    Ok(EffectiveFieldSolution::from_vector(layout, &x, report))
}

/// LU on the dense system, for cross-checks on small layouts.
pub fn solve_effective_field_direct(
    layout: &ManyBodyLayout,
    wave: &IncidentWave,
    gamma: &GammaMatrix,
    mode: TauMode,
) -> Result<EffectiveFieldSolution> {
    let a = assemble_dense(layout, wave.wavenumber(), gamma, mode);
    let b = rhs(layout, wave, gamma, mode);
    let x = linalg::solve_direct(&a, &b)?;
    let final_residual = linalg::relative_residual(&a, &x, &b);
    let report = SolveReport { iterations: 1, final_residual, converged: true, history: vec![] };
    Ok(EffectiveFieldSolution::from_vector(layout, &x, report))
}

fn scattered(k: f64, centers: &[Vec3], q: &[CVec3], x: Vec3, skip: Option<usize>) -> CVec3 {
    centers
        .iter()
        .zip(q)
        .enumerate()
        .filter(|(j, _)| Some(*j) != skip)
        .fold(CVec3::ZERO, |acc, (_, (&c, &qj))| acc + gradient_at(k, x - c).cross(qj))
}

/// Effective field at each center: E₀(x_m) + Σ_{j≠m} ∇g(x_m,x_j) × Q_j.
pub fn effective_field_at_centers(
    layout: &ManyBodyLayout,
    wave: &IncidentWave,
    solution: &EffectiveFieldSolution,
) -> Vec<CVec3> {
    let k = wave.wavenumber();
    let c = layout.centers();
    (0..c.len()).into_par_iter().map(|m| wave.e0(c[m]) + scattered(k, c, &solution.q, c[m], Some(m))).collect()
}

fn check_off_centers(layout: &ManyBodyLayout, x: Vec3) -> Result<()> {
    for &c in layout.centers() {
        kernel::green_static(x, c)?;
    }
    Ok(())
}

/// E(x) = E₀(x) + Σ_m ∇g(x,x_m) × Q_m.
pub fn field_e_many(
    layout: &ManyBodyLayout,
    wave: &IncidentWave,
    solution: &EffectiveFieldSolution,
    x: Vec3,
) -> Result<CVec3> {
    Ok(wave.e0(x) + scattered_e_many(layout, wave, solution, x)?)
}

/// The scattered part Σ_m ∇g(x,x_m) × Q_m alone.
pub fn scattered_e_many(
    layout: &ManyBodyLayout,
    wave: &IncidentWave,
    solution: &EffectiveFieldSolution,
    x: Vec3,
) -> Result<CVec3> {
    check_off_centers(layout, x)?;
    Ok(scattered(wave.wavenumber(), layout.centers(), &solution.q, x, None))
}

/// H(x) = [∇×E₀(x) + Σ_m (k² g(x,x_m) Q_m + (Q_m·∇)∇g(x,x_m))] / (iωμ).
pub fn field_h_many(
    layout: &ManyBodyLayout,
    wave: &IncidentWave,
    solution: &EffectiveFieldSolution,
    x: Vec3,
) -> Result<CVec3> {
    check_off_centers(layout, x)?;
    let k = wave.wavenumber();
    let curl = layout
        .centers()
        .iter()
        .zip(&solution.q)
        .fold(wave.curl_e0(x), |acc, (&c, &q)| acc + coupling(k, x - c).mul_vec(q));
    Ok(curl.scale(C64::new(1.0, 0.0) / (I * wave.omega() * wave.mu())))
}

/// (1/4π)(a k²/d + a k/d² + a/d³) Σ_m |Q_m| with d = min_m |x − x_m|.
pub fn error_estimate_many(
    layout: &ManyBodyLayout,
    wave: &IncidentWave,
    solution: &EffectiveFieldSolution,
    x: Vec3,
) -> Result<f64> {
    let d = layout.centers().iter().map(|&c| (x - c).norm()).fold(f64::INFINITY, f64::min);
    if !(d > 0.0) {
        return Err(invalid("error estimate needs a point away from every center"));
    }
    let (a, k) = (layout.radius(), wave.wavenumber());
    let total: f64 = solution.q.iter().map(|q| q.norm()).sum();
    Ok((a * k * k / d + a * k / (d * d) + a / (d * d * d)) * total / (4.0 * PI))
}

/// Default probe for the error estimate: one spacing before the first
/// center along −x.
pub fn default_probe(layout: &ManyBodyLayout) -> Vec3 {
    layout.centers()[0] - Vec3::new(layout.spacing(), 0.0, 0.0)
}

/// Euclidean norm of the 3M complex components.
pub fn field_norm(fields: &[CVec3]) -> f64 {
    fields.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt()
}

/// Everything a many-body run produces.
#[derive(Debug, Clone)]
pub struct ManyBodyResult {
    pub solution: EffectiveFieldSolution,
    pub fields: Vec<CVec3>,
    pub norm: f64,
    pub error_estimate: f64,
    pub probe: Vec3,
}

pub fn run_many_body(
    layout: &ManyBodyLayout,
    wave: &IncidentWave,
    gamma: &GammaMatrix,
    mode: TauMode,
    opts: GmresOptions,
) -> Result<ManyBodyResult> {
    let solution = solve_effective_field(layout, wave, gamma, mode, opts)?;
    let fields = effective_field_at_centers(layout, wave, &solution);
    let probe = default_probe(layout);
    let error_estimate = error_estimate_many(layout, wave, &solution, probe)?;
    Ok(ManyBodyResult { norm: field_norm(&fields), solution, fields, error_estimate, probe })
}
