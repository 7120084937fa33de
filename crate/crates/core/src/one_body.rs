//! Scattering by one perfectly conducting body.
//!
//! The surface current J solves
//!
//! J(tᵢ) + 2 Σ_{j≠i} [∇g(tᵢ,tⱼ)(N(tᵢ)·J(tⱼ)) − J(tⱼ)(∇g(tᵢ,tⱼ)·N(tᵢ))] Δⱼ = −2 N(tᵢ)×E₀(tᵢ),
//!
//! with unknowns interleaved per point as (X₁,Y₁,Z₁,X₂,…). The self term is
//! dropped. The scattered field is E − E₀ = ∇×∫_S g(x,t)J(t)dt.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::CollocationMesh;
use crate::kernel::{self, full_at, gradient_at, static_gradient_at};
use crate::linalg::{self, CMatrix, GmresOptions, LinearOperator, SolveReport};
use crate::vector::{CMat3, CVec3, Vec3, C64, I, ZERO};
use crate::wave::IncidentWave;

/// Solved surface current, one J(tᵢ) per collocation point.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceCurrent {
    pub values: Vec<CVec3>,
    pub report: SolveReport,
}

/// Γ and τ = (I + Γ)⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaMatrix {
    pub gamma: CMat3,
    pub tau: CMat3,
}

impl GammaMatrix {
    pub fn new(gamma: CMat3) -> Result<Self> {
        let shifted = CMat3::identity().add(&gamma);
        let tau = shifted
            .inverse()
            .ok_or(Error::SingularMatrix { column: 0, pivot: shifted.determinant().norm() })?;
        Ok(Self { gamma, tau })
    }

    /// Sphere value diag(−1/3, −1/3, 1/6), third axis along the source
    /// normal; τ = diag(3/2, 3/2, 6/7).
    pub fn sphere() -> Self {
        let r = |v: f64| C64::new(v, 0.0);
        Self {
            gamma: CMat3::diag([r(-1.0 / 3.0), r(-1.0 / 3.0), r(1.0 / 6.0)]),
            tau: CMat3::diag([r(1.5), r(1.5), r(6.0 / 7.0)]),
        }
    }
}

/// Frame in which per-source Γ(t) is averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaFrame {
    /// Rotate Γ(t) so its third axis is N(t) before averaging.
    #[default]
    Local,
    /// Average Γ(t) in the global Cartesian frame.
    Global,
}

/// Which Γ feeds the asymptotic moment.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaSource {
    #[default]
    SphereAnalytic,
    Numeric(GammaFrame),
}

impl GammaSource {
    pub fn resolve(self, mesh: &CollocationMesh) -> Result<GammaMatrix> {
        match self {
            GammaSource::SphereAnalytic => Ok(GammaMatrix::sphere()),
            GammaSource::Numeric(frame) => gamma_numeric(mesh, frame),
        }
    }
}

fn check_distinct(mesh: &CollocationMesh) -> Result<()> {
    let pts = mesh.points();
    pts.par_iter().enumerate().try_for_each(|(i, &p)| {
        for &q in &pts[i + 1..] {
            let r = (p - q).norm();
            let threshold = kernel::min_separation(p, q);
            if r < threshold {
                return Err(Error::CoincidentPoints { distance: r, threshold });
            }
        }
        Ok(())
    })
}

fn warn_if_large(mesh: &CollocationMesh, k: f64) {
    let ka = k * mesh.bounding_radius();
    if ka >= 0.1 {
        log::warn!("k*a = {ka:.3} is not small; the asymptotic formulas lose accuracy");
    }
}

/// Matrix-free form of the one-body system.
pub struct OneBodyOperator<'a> {
    mesh: &'a CollocationMesh,
    k: f64,
}

impl<'a> OneBodyOperator<'a> {
    pub fn new(mesh: &'a CollocationMesh, k: f64) -> Result<Self> {
        check_distinct(mesh)?;
        Ok(Self { mesh, k })
    }

    /// Row block i: the 3 equations at collocation point i.
    fn row(&self, i: usize, x: &[C64]) -> [C64; 3] {
        let pts = self.mesh.points();
        let (ti, ni) = (pts[i], self.mesh.normals()[i]);
        let mut acc = CVec3::ZERO;
        for (j, (&tj, &w)) in pts.iter().zip(self.mesh.weights()).enumerate() {
            if j == i {
                continue;
            }
            let jj = CVec3::new(x[3 * j], x[3 * j + 1], x[3 * j + 2]);
            let grad = gradient_at(self.k, ti - tj);
            acc += (grad * jj.dot_real(ni) - jj * grad.dot_real(ni)) * w;
        }
        [x[3 * i] + 2.0 * acc.x, x[3 * i + 1] + 2.0 * acc.y, x[3 * i + 2] + 2.0 * acc.z]
    }
}

impl LinearOperator for OneBodyOperator<'_> {
    fn dim(&self) -> usize {
        3 * self.mesh.len()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        y.par_chunks_mut(3).enumerate().for_each(|(i, yi)| yi.copy_from_slice(&self.row(i, x)));
    }
}

/// Dense 3P×3P matrix of the one-body system.
pub fn assemble_dense(mesh: &CollocationMesh, k: f64) -> Result<CMatrix> {
    check_distinct(mesh)?;
    let n = mesh.len();
    let mut a = CMatrix::zeros(3 * n, 3 * n);
    let pts = mesh.points();
    a.rows_mut_par().enumerate().for_each(|(row, out)| {
        let (i, p) = (row / 3, row % 3);
        let ni = mesh.normals()[i];
        for (j, (&tj, &w)) in pts.iter().zip(mesh.weights()).enumerate() {
            if j == i {
                out[3 * j + p] = C64::new(1.0, 0.0);
                continue;
            }
            let grad = gradient_at(k, pts[i] - tj);
            let gn = grad.dot_real(ni);
            for q in 0..3 {
                let delta = if p == q { gn } else { ZERO };
                out[3 * j + q] = 2.0 * w * (grad[p] * ni[q] - delta);
            }
        }
    });
    Ok(a)
}

/// F(i) = −2 N(tᵢ) × E₀(tᵢ), interleaved.
pub fn rhs(mesh: &CollocationMesh, wave: &IncidentWave) -> Vec<C64> {
    mesh.points()
        .iter()
        .zip(mesh.normals())
        .flat_map(|(&p, &n)| (n.to_complex().cross(wave.e0(p)) * -2.0).to_array())
        .collect()
}

fn unpack(x: &[C64]) -> Vec<CVec3> {
    x.chunks_exact(3).map(|c| CVec3::new(c[0], c[1], c[2])).collect()
}

/// Solves for J with restarted GMRES. Non-convergence is an error.
pub fn solve_current(mesh: &CollocationMesh, wave: &IncidentWave, opts: GmresOptions) -> Result<SurfaceCurrent> {
    warn_if_large(mesh, wave.wavenumber());
    let op = OneBodyOperator::new(mesh, wave.wavenumber())?;
    let (x, report) = linalg::solve_gmres(&op, &rhs(mesh, wave), opts)?;
    report.ensure_converged()?;
    Ok(SurfaceCurrent { values: unpack(&x), report })
}

/// Solves for J by LU on the dense matrix.
pub fn solve_current_direct(mesh: &CollocationMesh, wave: &IncidentWave) -> Result<SurfaceCurrent> {
    let a = assemble_dense(mesh, wave.wavenumber())?;
    let b = rhs(mesh, wave);
    let x = linalg::solve_direct(&a, &b)?;
    let final_residual = linalg::relative_residual(&a, &x, &b);
    let report = SolveReport { iterations: 1, final_residual, converged: true, history: vec![] };
    Ok(SurfaceCurrent { values: unpack(&x), report })
}

/// Q = Σᵢ J(tᵢ) Δᵢ.
pub fn moment_q_exact(current: &SurfaceCurrent, mesh: &CollocationMesh) -> CVec3 {
    current.values.iter().zip(mesh.weights()).fold(CVec3::ZERO, |acc, (j, &w)| acc + *j * w)
}

/// Γ_pq(t) = Σ_{s≠t} ∂g₀(s,t)/∂s_p N_q(s) w_s at source point `t`.
pub fn gamma_at(mesh: &CollocationMesh, t: usize, weights: &[f64]) -> [[f64; 3]; 3] {
    let pts = mesh.points();
    let mut g = [[0.0; 3]; 3];
    for (s, ((&ps, &ns), &w)) in pts.iter().zip(mesh.normals()).zip(weights).enumerate() {
        if s == t {
            continue;
        }
        let dg = static_gradient_at(ps - pts[t]);
        for p in 0..3 {
            for q in 0..3 {
                g[p][q] += dg[p] * ns[q] * w;
            }
        }
    }
    g
}

/// Orthonormal rows (e₁, e₂, N) of a frame whose third axis is `n`.
fn local_frame(n: Vec3) -> [Vec3; 3] {
    let helper = if n.x.abs() < 0.9 { Vec3::new(1.0, 0.0, 0.0) } else { Vec3::new(0.0, 1.0, 0.0) };
    let e1 = helper.cross(n).normalized().expect("helper is not parallel to n");
    [e1, n.cross(e1), n]
}

/// Constant Γ as the area-weighted mean of Γ(t) over source points, using
/// surface-element weights and the static kernel.
pub fn gamma_numeric(mesh: &CollocationMesh, frame: GammaFrame) -> Result<GammaMatrix> {
    check_distinct(mesh)?;
    let w = mesh.surface_elements();
    let total: [[f64; 3]; 3] = (0..mesh.len())
        .into_par_iter()
        .map(|t| {
            let g = gamma_at(mesh, t, w);
            let g = match frame {
                GammaFrame::Global => g,
                GammaFrame::Local => {
                    let r = local_frame(mesh.normals()[t]);
                    let mut out = [[0.0; 3]; 3];
                    for a in 0..3 {
                        for b in 0..3 {
                            for p in 0..3 {
                                for q in 0..3 {
                                    out[a][b] += r[a][p] * g[p][q] * r[b][q];
                                }
                            }
                        }
                    }
                    out
                }
            };
            g.map(|row| row.map(|v| v * w[t]))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold([[0.0; 3]; 3], |mut acc, g| {
            for p in 0..3 {
                for q in 0..3 {
                    acc[p][q] += g[p][q];
                }
            }
            acc
        });
    let area: f64 = w.iter().sum();
    GammaMatrix::new(CMat3::from_real(total.map(|row| row.map(|v| v / area))))
}

/// ΓQ evaluated through its defining integral, Σ_t Γ(t) J(t) Δ_t, with the
/// solver weights.
pub fn gamma_applied(mesh: &CollocationMesh, current: &SurfaceCurrent) -> CVec3 {
    let w = mesh.weights();
    let parts: Vec<CVec3> = (0..mesh.len())
        .into_par_iter()
        .map(|t| CMat3::from_real(gamma_at(mesh, t, w)).mul_vec(current.values[t]) * w[t])
        .collect();
    parts.into_iter().fold(CVec3::ZERO, |a, b| a + b)
}

/// Q_a = −|D| τ ∇×E₀(center).
pub fn moment_q_asymptotic(mesh: &CollocationMesh, wave: &IncidentWave, gamma: &GammaMatrix) -> CVec3 {
    gamma.tau.mul_vec(wave.curl_e0(mesh.center())) * -mesh.volume()
}

/// E(x) = E₀(x) + Σⱼ ∇g(x,tⱼ) × J(tⱼ) Δⱼ for x outside the bounding sphere.
pub fn field_e_exact(mesh: &CollocationMesh, wave: &IncidentWave, current: &SurfaceCurrent, x: Vec3) -> Result<CVec3> {
    Ok(wave.e0(x) + scattered_e_exact(mesh, wave, current, x)?)
}

/// The scattered part Σⱼ ∇g(x,tⱼ) × J(tⱼ) Δⱼ alone.
pub fn scattered_e_exact(
    mesh: &CollocationMesh,
    wave: &IncidentWave,
    current: &SurfaceCurrent,
    x: Vec3,
) -> Result<CVec3> {
    let radius = mesh.bounding_radius();
    let distance = (x - mesh.center()).norm();
    if distance <= radius {
        return Err(Error::InsideBody { distance, radius });
    }
    let k = wave.wavenumber();
    let parts: Vec<CVec3> = mesh
        .points()
        .par_iter()
        .zip(mesh.weights())
        .zip(&current.values)
        .map(|((&t, &w), &j)| gradient_at(k, x - t).cross(j) * w)
        .collect();
    Ok(parts.into_iter().fold(CVec3::ZERO, |a, b| a + b))
}

/// E(x) = E₀(x) + ∇g(x,center) × Q.
pub fn field_e_asymptotic(wave: &IncidentWave, q: CVec3, center: Vec3, x: Vec3) -> Result<CVec3> {
    let g = kernel::green(wave.wavenumber(), x, center)?;
    Ok(wave.e0(x) + g.gradient.cross(q))
}

/// H(x) = [∇×E₀(x) + k² g(x,c) Q + (Q·∇)∇g(x,c)] / (iωμ).
pub fn field_h(wave: &IncidentWave, q: CVec3, center: Vec3, x: Vec3) -> Result<CVec3> {
    let k = wave.wavenumber();
    kernel::green(k, x, center)?;
    let (g, _, hess) = full_at(k, x - center);
    let curl = wave.curl_e0(x) + q.scale(g * (k * k)) + hess.mul_vec(q);
    Ok(curl.scale(C64::new(1.0, 0.0) / (I * wave.omega() * wave.mu())))
}

/// Everything the one-body pipeline produces for one mesh and wave.
#[derive(Debug, Clone)]
pub struct OneBodySolution {
    pub current: SurfaceCurrent,
    pub q_exact: CVec3,
    pub q_asymptotic: CVec3,
    pub gamma: GammaMatrix,
}

impl OneBodySolution {
    pub fn e_exact(&self, mesh: &CollocationMesh, wave: &IncidentWave, x: Vec3) -> Result<CVec3> {
        field_e_exact(mesh, wave, &self.current, x)
    }

    pub fn e_asymptotic(&self, mesh: &CollocationMesh, wave: &IncidentWave, x: Vec3) -> Result<CVec3> {
        field_e_asymptotic(wave, self.q_asymptotic, mesh.center(), x)
    }
}

pub fn solve_one_body(
    mesh: &CollocationMesh,
    wave: &IncidentWave,
    gamma: GammaSource,
    opts: GmresOptions,
) -> Result<OneBodySolution> {
    let gamma = gamma.resolve(mesh)?;
    let current = solve_current(mesh, wave, opts)?;
    let q_exact = moment_q_exact(&current, mesh);
    let q_asymptotic = moment_q_asymptotic(mesh, wave, &gamma);
    Ok(OneBodySolution { current, q_exact, q_asymptotic, gamma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{mesh_cube, mesh_sphere, WeightRule};

    fn two_point_mesh() -> CollocationMesh {
        CollocationMesh::new(
            vec![Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.0, 0.0, -1.0)],
            vec![Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.0, 0.0, -1.0)],
            vec![0.5, 0.25],
            vec![0.5, 0.25],
            1.0,
            Vec3::ZERO,
        )
        .unwrap()
    }

    #[test]
    fn static_pair_block_by_hand() {
        // t₁ − t₂ = (0,0,2): ∇g₀ = −(0,0,2)/(4π·8), N(1) = e_z.
        let a = assemble_dense(&two_point_mesh(), 0.0).unwrap();
        let gz = -2.0 / (4.0 * std::f64::consts::PI * 8.0);
        let w = 0.25;
        // Block (1,2)[p][q] = 2[G_p N_q − δ_pq G·N] w.
        let expect = [[-2.0 * gz * w, 0.0, 0.0], [0.0, -2.0 * gz * w, 0.0], [0.0, 0.0, 0.0]];
        for p in 0..3 {
            for q in 0..3 {
                assert!((a[(p, 3 + q)] - C64::new(expect[p][q], 0.0)).norm() < 1e-15);
            }
        }
        for p in 0..6 {
            assert_eq!(a[(p, p)], C64::new(1.0, 0.0));
        }
    }

    #[test]
    fn matrix_free_matches_dense() {
        let mesh = mesh_sphere(1e-9, 4, WeightRule::EqualArea).unwrap();
        let k = 1.0472e5;
        let dense = assemble_dense(&mesh, k).unwrap();
        let from_op = CMatrix::from_operator(&OneBodyOperator::new(&mesh, k).unwrap());
        let scale = dense.as_slice().iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (a, b) in dense.as_slice().iter().zip(from_op.as_slice()) {
            assert!((a - b).norm() <= 1e-14 * scale);
        }
    }

    #[test]
    fn rhs_is_minus_two_n_cross_amplitude_at_zero_phase() {
        let mesh = two_point_mesh();
        let wave = IncidentWave::reference();
        let f = rhs(&mesh, &wave);
        // N = e_z, 𝓔 = e_x, α·t = 0 → F = −2 e_z × e_x = (0, −2, 0).
        assert_eq!(&f[..3], &[ZERO, C64::new(-2.0, 0.0), ZERO]);
    }

    #[test]
    fn zero_field_gives_zero_current() {
        let mesh = mesh_sphere(1e-9, 4, WeightRule::EqualArea).unwrap();
        let wave = IncidentWave::reference().with_amplitude(Vec3::ZERO).unwrap();
        let j = solve_current(&mesh, &wave, GmresOptions::default()).unwrap();
        assert!(j.values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn constant_current_moment() {
        let mesh = mesh_cube(1.0, 3, Vec3::ZERO).unwrap();
        let c = CVec3::new(C64::new(1.0, 2.0), ZERO, C64::new(0.0, -1.0));
        let cur = SurfaceCurrent { values: vec![c; mesh.len()], report: SolveReport::trivial() };
        let q = moment_q_exact(&cur, &mesh);
        assert!((q - c * 24.0).norm() < 1e-12);
    }

    #[test]
    fn sphere_tau_is_inverse() {
        let g = GammaMatrix::sphere();
        let built = GammaMatrix::new(g.gamma).unwrap();
        assert!((built.tau.max_abs() - 1.5).abs() < 1e-15);
        let prod = g.tau.mul_mat(&CMat3::identity().add(&g.gamma));
        assert!(prod.add(&CMat3::identity().scale(C64::new(-1.0, 0.0))).max_abs() < 1e-15);
    }

    #[test]
    fn singular_gamma_rejected() {
        let g = CMat3::diag([C64::new(-1.0, 0.0), ZERO, ZERO]);
        assert!(matches!(GammaMatrix::new(g), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn sphere_gamma_local_and_global() {
        let mesh = mesh_sphere(1e-9, 12, WeightRule::EqualArea).unwrap();
        let local = gamma_numeric(&mesh, GammaFrame::Local).unwrap();
        let want = GammaMatrix::sphere().gamma;
        for p in 0..3 {
            for q in 0..3 {
                assert!((local.gamma.get(p, q) - want.get(p, q)).norm() <= 5e-2);
            }
        }
        // Rotation average of a sphere's Γ(t) is isotropic with trace −1/2.
        let global = gamma_numeric(&mesh, GammaFrame::Global).unwrap();
        assert!((global.gamma.trace().re + 0.5).abs() < 5e-2);
    }

    #[test]
    fn asymptotic_moment_for_reference_sphere() {
        let a = 1e-9;
        let mesh = mesh_sphere(a, 12, WeightRule::EqualArea).unwrap();
        let wave = IncidentWave::reference();
        let q = moment_q_asymptotic(&mesh, &wave, &GammaMatrix::sphere());
        let want = 6.0 / 7.0 * wave.wavenumber() * 4.0 / 3.0 * std::f64::consts::PI * a.powi(3);
        assert!((q.z - I * want).norm() <= 1e-12 * want);
        assert_eq!(q.x.norm() + q.y.norm(), 0.0);
    }

    #[test]
    fn solve_is_linear_in_amplitude() {
        let mesh = mesh_sphere(1e-9, 5, WeightRule::EqualArea).unwrap();
        let w1 = IncidentWave::reference();
        let w2 = w1.with_amplitude(Vec3::new(-3.0, 0.0, 2.0)).unwrap();
        let opts = GmresOptions { tol: 1e-13, ..Default::default() };
        let j1 = solve_current(&mesh, &w1, opts).unwrap();
        let j2 = solve_current(&mesh, &w2, opts).unwrap();
        let w3 = w1.with_amplitude(Vec3::new(-2.0, 0.0, 2.0)).unwrap();
        let j3 = solve_current(&mesh, &w3, opts).unwrap();
        let scale = j3.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for i in 0..mesh.len() {
            assert!((j1.values[i] + j2.values[i] - j3.values[i]).norm() <= 1e-10 * scale);
        }
    }

    #[test]
    fn exact_field_without_current_is_incident() {
        let mesh = mesh_sphere(1e-9, 4, WeightRule::EqualArea).unwrap();
        let wave = IncidentWave::reference();
        let cur = SurfaceCurrent { values: vec![CVec3::ZERO; mesh.len()], report: SolveReport::trivial() };
        let x = Vec3::new(1e-7, 2e-7, 0.0);
        assert_eq!(field_e_exact(&mesh, &wave, &cur, x).unwrap(), wave.e0(x));
        let inside = field_e_exact(&mesh, &wave, &cur, Vec3::new(1e-10, 0.0, 0.0));
        assert!(matches!(inside, Err(Error::InsideBody { .. })));
    }

    #[test]
    fn far_field_decays_like_inverse_distance() {
        let mesh = mesh_sphere(1e-9, 6, WeightRule::EqualArea).unwrap();
        let wave = IncidentWave::reference();
        let cur = solve_current(&mesh, &wave, GmresOptions::default()).unwrap();
        let k = wave.wavenumber();
        let dir = Vec3::new(1.0, 1.0, 1.0).normalized().unwrap();
        let scat = |r: f64| {
            scattered_e_exact(&mesh, &wave, &cur, dir * r).unwrap().norm()
        };
        let ratio = scat(1e3 / k) / scat(2e3 / k);
        assert!((ratio - 2.0).abs() < 0.01, "ratio {ratio}");
    }

    #[test]
    fn h_without_moment_is_incident() {
        let wave = IncidentWave::reference();
        let x = Vec3::new(1e-6, -2e-6, 5e-7);
        let h = field_h(&wave, CVec3::ZERO, Vec3::ZERO, x).unwrap();
        assert!((h - wave.h0(x)).norm() <= 1e-15 * h.norm());
        assert!(field_h(&wave, CVec3::ZERO, x, x).is_err());
    }

    fn e_total(wave: &IncidentWave, q: CVec3, x: Vec3) -> CVec3 {
        field_e_asymptotic(wave, q, Vec3::ZERO, x).unwrap()
    }

    #[test]
    fn h_is_curl_of_e_and_divergence_free() {
        let wave = IncidentWave::reference();
        let k = wave.wavenumber();
        let q = CVec3::new(C64::new(0.3, -0.1), C64::new(-0.2, 0.4), C64::new(0.0, 1.0)) * 1e-8;
        let x = Vec3::new(1.0, -2.0, 0.5).normalized().unwrap() * (3.0 / k);
        let h = 1e-4 / k;
        let d = |p: usize| {
            let e = Vec3::axis(p) * h;
            (e_total(&wave, q, x + e) - e_total(&wave, q, x - e)) * (0.5 / h)
        };
        let (dx, dy, dz) = (d(0), d(1), d(2));
        let curl = CVec3::new(dy.z - dz.y, dz.x - dx.z, dx.y - dy.x);
        let fd = curl.scale(C64::new(1.0, 0.0) / (I * wave.omega() * wave.mu()));
        let exact = field_h(&wave, q, Vec3::ZERO, x).unwrap();
        assert!((fd - exact).norm() <= 1e-5 * exact.norm());

        let hd = |p: usize| {
            let e = Vec3::axis(p) * h;
            (field_h(&wave, q, Vec3::ZERO, x + e).unwrap()[p] - field_h(&wave, q, Vec3::ZERO, x - e).unwrap()[p])
                / (2.0 * h)
        };
        let div = hd(0) + hd(1) + hd(2);
        let scale = exact.norm() * k;
        assert!(div.norm() <= 1e-6 * scale);
    }
}
