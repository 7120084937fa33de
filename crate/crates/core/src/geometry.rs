//! Collocation meshes: points, outward unit normals, quadrature weights and
//! body volume for spheres, ellipsoids, cubes and parametric surfaces.
//!
//! Spheres and ellipsoids are partitioned into latitude bands
//! φⱼ = jπ/(m_φ+1), j = 1..m_φ, with m_θ(φⱼ) = ⌊m_φ + |φⱼ − π/2|·6m_φ⌋
//! longitudes θᵢ = 2πi/m_θ per band, plus the two poles. Bands near the
//! poles therefore carry more points than the equator.

use std::f64::consts::PI;
use std::io::{self, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::io::fmt_f64;
use crate::vector::Vec3;

/// How the per-point quadrature weights Δⱼ used by the integral equation
/// are assigned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightRule {
    /// Every point gets the same share of the total surface area.
    #[default]
    EqualArea,
    /// Parametric surface element |∂f/∂θ × ∂f/∂φ|ΔθΔφ per point, pole caps
    /// take the remaining area.
    SurfaceElement,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollocationMesh {
    points: Vec<Vec3>,
    normals: Vec<Vec3>,
    weights: Vec<f64>,
    surface_elements: Vec<f64>,
    area: f64,
    volume: f64,
    center: Vec3,
}

impl CollocationMesh {
    /// Assembles a mesh from raw parts and checks its invariants.
    pub fn new(
        points: Vec<Vec3>,
        normals: Vec<Vec3>,
        weights: Vec<f64>,
        surface_elements: Vec<f64>,
        volume: f64,
        center: Vec3,
    ) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(invalid("mesh has no points"));
        }
        if normals.len() != n || weights.len() != n || surface_elements.len() != n {
            return Err(invalid("points, normals and weights must have equal length"));
        }
        if let Some(i) = normals.iter().position(|nrm| (nrm.norm() - 1.0).abs() > 1e-12) {
            return Err(invalid(format!("normal {i} is not a unit vector")));
        }
        if let Some(i) = weights.iter().chain(&surface_elements).position(|&w| !(w > 0.0)) {
            return Err(invalid(format!("weight {i} is not positive")));
        }
        if !(volume > 0.0) {
            return Err(invalid("body volume must be positive"));
        }
        let area = surface_elements.iter().sum();
        Ok(Self { points, normals, weights, surface_elements, area, volume, center })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn normals(&self) -> &[Vec3] {
        &self.normals
    }

    /// Quadrature weights Δⱼ used by the integral equation and by Q = ΣJΔ.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Geometric surface-element weights; they always sum to the surface area.
    pub fn surface_elements(&self) -> &[f64] {
        &self.surface_elements
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// Reference point x₁ inside the body.
    pub fn center(&self) -> Vec3 {
        self.center
    }

    /// Largest distance from the center to a collocation point.
    pub fn bounding_radius(&self) -> f64 {
        self.points.iter().map(|p| (*p - self.center).norm()).fold(0.0, f64::max)
    }

    pub fn translated(&self, offset: Vec3) -> Self {
        let mut m = self.clone();
        m.points.iter_mut().for_each(|p| *p += offset);
        m.center += offset;
        m
    }

    /// Same geometry with the solver weights replaced per `rule`.
    pub fn with_weight_rule(&self, rule: WeightRule) -> Self {
        let mut m = self.clone();
        m.weights = match rule {
            WeightRule::EqualArea => vec![self.area / self.len() as f64; self.len()],
            WeightRule::SurfaceElement => self.surface_elements.clone(),
        };
        m
    }

    /// Writes `x,y,z,nx,ny,nz,w` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "x,y,z,nx,ny,nz,w")?;
        for ((p, n), w) in self.points.iter().zip(&self.normals).zip(&self.weights) {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                fmt_f64(p.x),
                fmt_f64(p.y),
                fmt_f64(p.z),
                fmt_f64(n.x),
                fmt_f64(n.y),
                fmt_f64(n.z),
                fmt_f64(*w)
            )?;
        }
        Ok(())
    }
}

/// One latitude band of the polar-refined partition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub phi: f64,
    pub m_theta: usize,
}

/// Latitude bands for a given m_φ.
pub fn polar_bands(m_phi: usize) -> Vec<Band> {
    let mf = m_phi as f64;
    (1..=m_phi)
        .map(|j| {
            let phi = j as f64 * PI / (mf + 1.0);
            let m_theta = (mf + (phi - PI / 2.0).abs() * 6.0 * mf).floor() as usize;
            Band { phi, m_theta }
        })
        .collect()
}

/// Total point count P = Σⱼ m_θ(φⱼ) + 2 for a given m_φ.
pub fn point_count(m_phi: usize) -> usize {
    polar_bands(m_phi).iter().map(|b| b.m_theta).sum::<usize>() + 2
}

/// The m_φ whose band partition has exactly `target` points, if any.
pub fn m_phi_for_points(target: usize) -> Option<usize> {
    (2..)
        .map(|m| (m, point_count(m)))
        .take_while(|&(_, p)| p <= target)
        .find(|&(_, p)| p == target)
        .map(|(m, _)| m)
}

fn check_m_phi(m_phi: usize) -> Result<()> {
    if m_phi < 2 {
        return Err(invalid(format!("m_phi must be at least 2, got {m_phi}")));
    }
    Ok(())
}

fn check_length(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(invalid(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

/// Sphere of radius `a` centered at the origin.
pub fn mesh_sphere(a: f64, m_phi: usize, rule: WeightRule) -> Result<CollocationMesh> {
    check_length("radius", a)?;
    mesh_ellipsoid(a, a, a, m_phi, rule)
}

/// Ellipsoid with semi-axes `a`, `b`, `c` along x, y, z, centered at the origin.
///
/// Points are (a cosθ sinφ, b sinθ sinφ, c cosφ) and normals are the
/// normalized (cosθ sinφ/a, sinθ sinφ/b, cosφ/c).
pub fn mesh_ellipsoid(a: f64, b: f64, c: f64, m_phi: usize, rule: WeightRule) -> Result<CollocationMesh> {
    check_length("semi-axis a", a)?;
    check_length("semi-axis b", b)?;
    check_length("semi-axis c", c)?;
    check_m_phi(m_phi)?;
    let surface = EllipsoidSurface { a, b, c };
    let area = ellipsoid_area(a, b, c);
    let dphi = PI / (m_phi as f64 + 1.0);

    let mut points = Vec::new();
    let mut normals = Vec::new();
    let mut elements = Vec::new();
    for band in polar_bands(m_phi) {
        let dtheta = 2.0 * PI / band.m_theta as f64;
        let (sp, cp) = band.phi.sin_cos();
        for i in 1..=band.m_theta {
            let theta = i as f64 * dtheta;
            let (st, ct) = theta.sin_cos();
            points.push(Vec3::new(a * ct * sp, b * st * sp, c * cp));
            let n = Vec3::new(ct * sp / a, st * sp / b, cp / c);
            normals.push(n.normalized().expect("ellipsoid normal is nonzero"));
            elements.push(surface.jacobian(theta, band.phi) * dtheta * dphi);
        }
    }
    let cap = 0.5 * (area - elements.iter().sum::<f64>());
    debug_assert!(cap > 0.0);
    points.push(Vec3::new(0.0, 0.0, c));
    normals.push(Vec3::new(0.0, 0.0, 1.0));
    points.push(Vec3::new(0.0, 0.0, -c));
    normals.push(Vec3::new(0.0, 0.0, -1.0));
    elements.extend([cap, cap]);

    let volume = 4.0 / 3.0 * PI * a * b * c;
    finish(points, normals, elements, area, volume, Vec3::ZERO, rule)
}

fn finish(
    points: Vec<Vec3>,
    normals: Vec<Vec3>,
    elements: Vec<f64>,
    area: f64,
    volume: f64,
    center: Vec3,
    rule: WeightRule,
) -> Result<CollocationMesh> {
    let p = points.len();
    let weights = match rule {
        WeightRule::EqualArea => vec![area / p as f64; p],
        WeightRule::SurfaceElement => elements.clone(),
    };
    let mut mesh = CollocationMesh::new(points, normals, weights, elements, volume, center)?;
    mesh.area = area;
    Ok(mesh)
}

/// Cube with half side `a_half` centered at `center`: `n_per_face`² points
/// at the cell centers of each face, normals ±e_p, weights (2a/n)².
pub fn mesh_cube(a_half: f64, n_per_face: usize, center: Vec3) -> Result<CollocationMesh> {
    check_length("half side", a_half)?;
    if n_per_face < 2 {
        return Err(invalid(format!("n_per_face must be at least 2, got {n_per_face}")));
    }
    let h = 2.0 * a_half / n_per_face as f64;
    let coords: Vec<f64> = (0..n_per_face).map(|i| -a_half + h * (i as f64 + 0.5)).collect();
    let p = 6 * n_per_face * n_per_face;
    let mut points = Vec::with_capacity(p);
    let mut normals = Vec::with_capacity(p);
    for axis in 0..3 {
        let (u_axis, v_axis) = ((axis + 1) % 3, (axis + 2) % 3);
        for sign in [1.0, -1.0] {
            for &u in &coords {
                for &v in &coords {
                    let mut q = Vec3::ZERO;
                    q[axis] = sign * a_half;
                    q[u_axis] = u;
                    q[v_axis] = v;
                    points.push(center + q);
                    normals.push(Vec3::axis(axis) * sign);
                }
            }
        }
    }
    let side = 2.0 * a_half;
    let elements = vec![h * h; p];
    finish(points, normals, elements, 6.0 * side * side, side.powi(3), center, WeightRule::SurfaceElement)
}

/// A surface given by a map f(u, v).
pub trait ParametricSurface: Send + Sync {
    fn point(&self, u: f64, v: f64) -> Vec3;

    fn u_range(&self) -> (f64, f64);

    fn v_range(&self) -> (f64, f64);

    fn tangent_u(&self, u: f64, v: f64) -> Vec3 {
        let h = 1e-6 * (self.u_range().1 - self.u_range().0);
        (self.point(u + h, v) - self.point(u - h, v)) * (0.5 / h)
    }

    fn tangent_v(&self, u: f64, v: f64) -> Vec3 {
        let h = 1e-6 * (self.v_range().1 - self.v_range().0);
        (self.point(u, v + h) - self.point(u, v - h)) * (0.5 / h)
    }

    fn jacobian(&self, u: f64, v: f64) -> f64 {
        self.tangent_u(u, v).cross(self.tangent_v(u, v)).norm()
    }
}

/// Ellipsoid (a cos u sin v, b sin u sin v, c cos v), u ∈ [0, 2π], v ∈ [0, π].
#[derive(Debug, Clone, Copy)]
pub struct EllipsoidSurface {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl ParametricSurface for EllipsoidSurface {
    fn point(&self, u: f64, v: f64) -> Vec3 {
        let (su, cu) = u.sin_cos();
        let (sv, cv) = v.sin_cos();
        Vec3::new(self.a * cu * sv, self.b * su * sv, self.c * cv)
    }

    fn u_range(&self) -> (f64, f64) {
        (0.0, 2.0 * PI)
    }

    fn v_range(&self) -> (f64, f64) {
        (0.0, PI)
    }

    fn tangent_u(&self, u: f64, v: f64) -> Vec3 {
        let (su, cu) = u.sin_cos();
        let sv = v.sin();
        Vec3::new(-self.a * su * sv, self.b * cu * sv, 0.0)
    }

    fn tangent_v(&self, u: f64, v: f64) -> Vec3 {
        let (su, cu) = u.sin_cos();
        let (sv, cv) = v.sin_cos();
        Vec3::new(self.a * cu * cv, self.b * su * cv, -self.c * sv)
    }
}

/// How a parametric domain is sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sampling {
    /// Cell midpoints of an `nu` × `nv` tensor grid.
    Grid { nu: usize, nv: usize },
    /// The polar band partition, u playing θ and v playing φ, plus two poles
    /// at v = v_min and v = v_max.
    PolarBands { m_phi: usize },
}

/// A body to be meshed.
#[derive(Clone)]
pub enum ShapeSpec {
    Sphere { radius: f64, m_phi: usize },
    Ellipsoid { a: f64, b: f64, c: f64, m_phi: usize },
    Cube { half_side: f64, n_per_face: usize },
    Parametric { surface: Arc<dyn ParametricSurface>, sampling: Sampling },
}

impl std::fmt::Debug for ShapeSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ShapeSpec::Sphere { radius, m_phi } => write!(f, "Sphere {{ radius: {radius}, m_phi: {m_phi} }}"),
            ShapeSpec::Ellipsoid { a, b, c, m_phi } => {
                write!(f, "Ellipsoid {{ a: {a}, b: {b}, c: {c}, m_phi: {m_phi} }}")
            }
            ShapeSpec::Cube { half_side, n_per_face } => {
                write!(f, "Cube {{ half_side: {half_side}, n_per_face: {n_per_face} }}")
            }
            ShapeSpec::Parametric { sampling, .. } => write!(f, "Parametric {{ sampling: {sampling:?} }}"),
        }
    }
}

impl ShapeSpec {
    /// Builds the mesh. The cube is placed with one vertex at the origin in
    /// the first octant; the other shapes are centered at the origin.
    pub fn build(&self, rule: WeightRule) -> Result<CollocationMesh> {
        match self {
            ShapeSpec::Sphere { radius, m_phi } => mesh_sphere(*radius, *m_phi, rule),
            ShapeSpec::Ellipsoid { a, b, c, m_phi } => mesh_ellipsoid(*a, *b, *c, *m_phi, rule),
            ShapeSpec::Cube { half_side, n_per_face } => {
                let h = *half_side;
                mesh_cube(h, *n_per_face, Vec3::new(h, h, h))
            }
            ShapeSpec::Parametric { surface, sampling } => mesh_parametric(surface.as_ref(), *sampling, rule),
        }
    }
}

impl ShapeSpec {
    /// Characteristic size: radius, largest semi-axis or half side.
    pub fn size(&self) -> Option<f64> {
        match self {
            ShapeSpec::Sphere { radius, .. } => Some(*radius),
            ShapeSpec::Ellipsoid { a, b, c, .. } => Some(a.max(*b).max(*c)),
            ShapeSpec::Cube { half_side, .. } => Some(*half_side),
            ShapeSpec::Parametric { .. } => None,
        }
    }

    /// Same shape with its characteristic size set to `size`, aspect kept.
    pub fn scaled_to(&self, size: f64) -> Result<ShapeSpec> {
        let s = match self.size() {
            Some(cur) => size / cur,
            None => return Err(invalid("parametric shapes cannot be rescaled")),
        };
        Ok(match self.clone() {
            ShapeSpec::Sphere { m_phi, .. } => ShapeSpec::Sphere { radius: size, m_phi },
            ShapeSpec::Ellipsoid { a, b, c, m_phi } => ShapeSpec::Ellipsoid { a: a * s, b: b * s, c: c * s, m_phi },
            ShapeSpec::Cube { n_per_face, .. } => ShapeSpec::Cube { half_side: size, n_per_face },
            other => other,
        })
    }

    /// Same shape with m_φ (or points per cube edge) replaced.
    pub fn with_resolution(&self, n: usize) -> Result<ShapeSpec> {
        Ok(match self.clone() {
            ShapeSpec::Sphere { radius, .. } => ShapeSpec::Sphere { radius, m_phi: n },
            ShapeSpec::Ellipsoid { a, b, c, .. } => ShapeSpec::Ellipsoid { a, b, c, m_phi: n },
            ShapeSpec::Cube { half_side, .. } => ShapeSpec::Cube { half_side, n_per_face: n },
            ShapeSpec::Parametric { .. } => return Err(invalid("parametric shapes have no single resolution")),
        })
    }
}

/// Meshes a star-shaped parametric surface.
///
/// Normals are the normalized cross product of the parametric tangents,
/// flipped when they point toward the centroid of the sample points. The
/// volume comes from the divergence theorem, (1/3)Σ (p − c)·N Δ.
pub fn mesh_parametric(
    surface: &dyn ParametricSurface,
    sampling: Sampling,
    rule: WeightRule,
) -> Result<CollocationMesh> {
    let (u0, u1) = surface.u_range();
    let (v0, v1) = surface.v_range();
    if !(u1 > u0 && v1 > v0) {
        return Err(invalid("parametric ranges must be non-empty"));
    }
    // (u, v, surface element)
    let mut samples: Vec<(f64, f64, f64)> = Vec::new();
    let mut poles: Vec<(f64, f64)> = Vec::new();
    match sampling {
        Sampling::Grid { nu, nv } => {
            if nu < 2 || nv < 2 {
                return Err(invalid("parametric grid needs at least 2x2 cells"));
            }
            let (du, dv) = ((u1 - u0) / nu as f64, (v1 - v0) / nv as f64);
            for i in 0..nu {
                for j in 0..nv {
                    let (u, v) = (u0 + (i as f64 + 0.5) * du, v0 + (j as f64 + 0.5) * dv);
                    samples.push((u, v, surface.jacobian(u, v) * du * dv));
                }
            }
        }
        Sampling::PolarBands { m_phi } => {
            check_m_phi(m_phi)?;
            let scale_v = (v1 - v0) / PI;
            let scale_u = (u1 - u0) / (2.0 * PI);
            let dv = (v1 - v0) / (m_phi as f64 + 1.0);
            for band in polar_bands(m_phi) {
                let v = v0 + band.phi * scale_v;
                let du = (u1 - u0) / band.m_theta as f64;
                for i in 1..=band.m_theta {
                    let u = u0 + i as f64 * 2.0 * PI / band.m_theta as f64 * scale_u;
                    samples.push((u, v, surface.jacobian(u, v) * du * dv));
                }
            }
            poles.push((u0, v0));
            poles.push((u0, v1));
        }
    }

    let n_total = samples.len() + poles.len();
    let mut points = Vec::with_capacity(n_total);
    let mut raw_normals = Vec::with_capacity(n_total);
    let mut elements = Vec::with_capacity(n_total);
    for &(u, v, w) in &samples {
        let n = surface.tangent_u(u, v).cross(surface.tangent_v(u, v));
        let scale = surface.tangent_u(u, v).norm() * surface.tangent_v(u, v).norm();
        if !(n.norm() > 1e-12 * scale) {
            return Err(Error::DegenerateJacobian { u, v });
        }
        points.push(surface.point(u, v));
        raw_normals.push(n.normalized().unwrap());
        elements.push(w);
    }
    let dv = if let Sampling::PolarBands { m_phi } = sampling { (v1 - v0) / (m_phi as f64 + 1.0) } else { 0.0 };
    for &(u, v) in &poles {
        // Pole normal from the ring of tangent-plane normals just off the pole.
        let off = if v == v0 { v0 + 1e-4 * dv } else { v1 - 1e-4 * dv };
        let mut acc = Vec3::ZERO;
        for s in 0..8 {
            let uu = u0 + (u1 - u0) * s as f64 / 8.0;
            if let Some(n) = surface.tangent_u(uu, off).cross(surface.tangent_v(uu, off)).normalized() {
                acc += n;
            }
        }
        let n = acc.normalized().ok_or(Error::DegenerateJacobian { u, v })?;
        points.push(surface.point(u, v));
        raw_normals.push(n);
        // Cap between the pole and half a band.
        let (va, vb) = if v == v0 { (v0, v0 + 0.5 * dv) } else { (v1 - 0.5 * dv, v1) };
        elements.push(integrate_patch(surface, (u0, u1), (va, vb)));
    }

    let centroid = points.iter().fold(Vec3::ZERO, |acc, p| acc + *p) * (1.0 / points.len() as f64);
    let normals: Vec<Vec3> = points
        .iter()
        .zip(&raw_normals)
        .map(|(p, n)| if (*p - centroid).dot(*n) < 0.0 { -*n } else { *n })
        .collect();
    let area: f64 = elements.iter().sum();
    let volume = points
        .iter()
        .zip(&normals)
        .zip(&elements)
        .map(|((p, n), w)| (*p - centroid).dot(*n) * w)
        .sum::<f64>()
        / 3.0;
    finish(points, normals, elements, area, volume, centroid, rule)
}

fn integrate_patch(surface: &dyn ParametricSurface, (u0, u1): (f64, f64), (v0, v1): (f64, f64)) -> f64 {
    let (nodes, weights) = gauss_legendre(24);
    let nu = 64;
    let du = (u1 - u0) / nu as f64;
    let mut total = 0.0;
    for (x, w) in nodes.iter().zip(&weights) {
        let v = 0.5 * (v0 + v1) + 0.5 * (v1 - v0) * x;
        for i in 0..nu {
            let u = u0 + (i as f64 + 0.5) * du;
            total += w * 0.5 * (v1 - v0) * du * surface.jacobian(u, v);
        }
    }
    total
}

/// Surface area of the ellipsoid with semi-axes a, b, c.
pub fn ellipsoid_area(a: f64, b: f64, c: f64) -> f64 {
    if a == b && b == c {
        return 4.0 * PI * a * a;
    }
    // Trapezoid in θ (periodic) times Gauss–Legendre in φ.
    let (nodes, weights) = gauss_legendre(96);
    let n_theta = 512;
    let dtheta = 2.0 * PI / n_theta as f64;
    let mut total = 0.0;
    for (x, w) in nodes.iter().zip(&weights) {
        let phi = 0.5 * PI * (x + 1.0);
        let (sp, cp) = phi.sin_cos();
        let mut ring = 0.0;
        for i in 0..n_theta {
            let (st, ct) = (i as f64 * dtheta).sin_cos();
            let s = (b * c * ct * sp).powi(2) + (a * c * st * sp).powi(2) + (a * b * cp).powi(2);
            ring += sp * s.sqrt();
        }
        total += w * 0.5 * PI * ring * dtheta;
    }
    total
}

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_rule_hits_reference_point_counts() {
        assert_eq!(m_phi_for_points(766), Some(12));
        assert_eq!(m_phi_for_points(1052), Some(14));
        assert_eq!(m_phi_for_points(1386), Some(16));
        assert_eq!(m_phi_for_points(1762), Some(18));
        assert_eq!(m_phi_for_points(767), None);
        assert_eq!(point_count(2), 18);
    }

    #[test]
    fn sphere_points_on_surface_with_radial_normals() {
        let a = 1e-9;
        let m = mesh_sphere(a, 12, WeightRule::EqualArea).unwrap();
        assert_eq!(m.len(), 766);
        for (p, n) in m.points().iter().zip(m.normals()) {
            assert!((p.norm() - a).abs() <= 1e-12 * a);
            assert!((*p * (1.0 / a) - *n).norm() < 1e-12);
            assert!(p.dot(*n) > 0.0);
        }
        assert!((m.volume() - 4.0 / 3.0 * PI * a.powi(3)).abs() < 1e-12 * m.volume());
    }

    #[test]
    fn sphere_weights_sum_to_area() {
        let a = 2.0;
        for rule in [WeightRule::EqualArea, WeightRule::SurfaceElement] {
            let m = mesh_sphere(a, 12, rule).unwrap();
            let s: f64 = m.weights().iter().sum();
            assert!((s / (4.0 * PI * a * a) - 1.0).abs() < 0.02);
            assert!(m.weights().iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn band_elements_converge_to_area_monotonically() {
        let area = 4.0 * PI;
        let mut prev = f64::INFINITY;
        for m_phi in [4, 8, 16, 32] {
            let mesh = mesh_sphere(1.0, m_phi, WeightRule::SurfaceElement).unwrap();
            let bands: f64 = mesh.surface_elements()[..mesh.len() - 2].iter().sum();
            let err = (bands - area).abs();
            assert!(err < prev);
            prev = err;
        }
    }

    #[test]
    fn degenerate_ellipsoid_matches_sphere() {
        let s = mesh_sphere(1.5, 10, WeightRule::SurfaceElement).unwrap();
        let e = mesh_ellipsoid(1.5, 1.5, 1.5, 10, WeightRule::SurfaceElement).unwrap();
        for i in 0..s.len() {
            assert!((s.points()[i] - e.points()[i]).norm() < 1e-12);
            assert!((s.normals()[i] - e.normals()[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn ellipsoid_normals_orthogonal_to_fd_tangents() {
        let (a, b, c) = (1e-8, 1e-9, 1e-9);
        let m = mesh_ellipsoid(a, b, c, 14, WeightRule::EqualArea).unwrap();
        assert_eq!(m.len(), 1052);
        let surf = EllipsoidSurface { a, b, c };
        let h = 1e-6;
        for band in polar_bands(14).iter().take(3) {
            for i in 1..=band.m_theta {
                let th = i as f64 * 2.0 * PI / band.m_theta as f64;
                let n = Vec3::new(th.cos() * band.phi.sin() / a, th.sin() * band.phi.sin() / b, band.phi.cos() / c)
                    .normalized()
                    .unwrap();
                let ft = (surf.point(th + h, band.phi) - surf.point(th - h, band.phi)) * (0.5 / h);
                let fp = (surf.point(th, band.phi + h) - surf.point(th, band.phi - h)) * (0.5 / h);
                assert!(n.dot(ft).abs() <= 1e-10 * ft.norm());
                assert!(n.dot(fp).abs() <= 1e-10 * fp.norm());
            }
        }
    }

    #[test]
    fn ellipsoid_area_of_spheroid() {
        // Prolate spheroid closed form.
        let (a, c) = (1.0f64, 3.0f64);
        let e = (1.0 - a * a / (c * c)).sqrt();
        let exact = 2.0 * PI * a * a * (1.0 + c / (a * e) * e.asin());
        assert!((ellipsoid_area(a, a, c) - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn cube_tiles_faces_exactly() {
        let a = 1e-7;
        let center = Vec3::new(a, a, a);
        let m = mesh_cube(a, 10, center).unwrap();
        assert_eq!(m.len(), 600);
        let s: f64 = m.weights().iter().sum();
        assert!((s - 6.0 * (2.0 * a).powi(2)).abs() <= 1e-12 * s);
        for (p, n) in m.points().iter().zip(m.normals()) {
            let d = *p - center;
            assert!((d.max_abs() - a).abs() <= 1e-15 * 10.0 * a.max(1e-300) + 1e-22);
            let on_face = (0..3).filter(|&q| (d[q].abs() - a).abs() < 1e-12 * a).count();
            assert_eq!(on_face, 1);
            assert!(d.dot(*n) > 0.0);
        }
        assert!((m.volume() - 8.0 * a.powi(3)).abs() < 1e-12 * m.volume());
    }

    #[test]
    fn invalid_inputs() {
        assert!(mesh_sphere(1.0, 1, WeightRule::EqualArea).is_err());
        assert!(mesh_sphere(-1.0, 4, WeightRule::EqualArea).is_err());
        assert!(mesh_ellipsoid(1.0, 0.0, 1.0, 4, WeightRule::EqualArea).is_err());
        assert!(mesh_cube(1.0, 1, Vec3::ZERO).is_err());
    }

    struct PlainSphere(f64);

    impl ParametricSurface for PlainSphere {
        fn point(&self, u: f64, v: f64) -> Vec3 {
            Vec3::new(u.cos() * v.sin(), u.sin() * v.sin(), v.cos()) * self.0
        }
        fn u_range(&self) -> (f64, f64) {
            (0.0, 2.0 * PI)
        }
        fn v_range(&self) -> (f64, f64) {
            (0.0, PI)
        }
    }

    #[test]
    fn parametric_sphere_reproduces_band_mesh() {
        let a = 1e-3;
        let direct = mesh_sphere(a, 12, WeightRule::EqualArea).unwrap();
        let param = mesh_parametric(&PlainSphere(a), Sampling::PolarBands { m_phi: 12 }, WeightRule::EqualArea).unwrap();
        assert_eq!(direct.len(), param.len());
        for i in 0..direct.len() {
            assert!((direct.points()[i] - param.points()[i]).norm() <= 1e-10 * a);
            assert!((direct.normals()[i] - param.normals()[i]).norm() <= 1e-8);
        }
        let v = 4.0 / 3.0 * PI * a.powi(3);
        assert!((param.volume() / v - 1.0).abs() < 0.02);
    }

    #[test]
    fn parametric_ellipsoid_volume() {
        let (a, b, c) = (3.0, 1.0, 2.0);
        let m = mesh_parametric(&EllipsoidSurface { a, b, c }, Sampling::Grid { nu: 64, nv: 32 }, WeightRule::SurfaceElement)
            .unwrap();
        let v = 4.0 / 3.0 * PI * a * b * c;
        assert!((m.volume() / v - 1.0).abs() < 0.02);
        for (p, n) in m.points().iter().zip(m.normals()) {
            assert!((*p - m.center()).dot(*n) > 0.0);
        }
    }

    struct Pinched;

    impl ParametricSurface for Pinched {
        fn point(&self, u: f64, _v: f64) -> Vec3 {
            Vec3::new(u, 0.0, 0.0)
        }
        fn u_range(&self) -> (f64, f64) {
            (0.0, 1.0)
        }
        fn v_range(&self) -> (f64, f64) {
            (0.0, 1.0)
        }
    }

    #[test]
    fn degenerate_jacobian_is_an_error() {
        let r = mesh_parametric(&Pinched, Sampling::Grid { nu: 4, nv: 4 }, WeightRule::EqualArea);
        assert!(matches!(r, Err(Error::DegenerateJacobian { .. })));
    }

    #[test]
    fn csv_export_has_one_row_per_point() {
        let m = mesh_cube(1.0, 2, Vec3::ZERO).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 24);
        assert!(text.starts_with("x,y,z,nx,ny,nz,w\n"));
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
    }
}
