//! Mesh generators for the manifold families used throughout the crate.
//!
//! All generated vertices lie exactly on the family geometry (up to rounding);
//! cells are flat simplices, so volumes converge at second order in `h`.

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{BoundaryFace, EmbeddedMesh, FaceTag};
use crate::error::{invalid, Error, Result};
use crate::spheres::unit_ball_volume;

/// Minimum number of boundary vertices required on the small `eps`-sphere.
const MIN_EPS_VERTICES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum FamilyVariant {
    /// `{eps < |x| < delta}` in `R^n`; Steklov on the inner sphere, Neumann on the outer.
    AnnulusFlat { n: usize, eps: f64, delta: f64 },
    /// Ball of radius `delta` in `R^n`, Steklov boundary.
    BallFlat { n: usize, delta: f64 },
    /// `S^1_radius x [0, length]` in `R^3`, both boundary circles Steklov.
    CylinderSurface { radius: f64, length: f64 },
    /// `A(eps, delta) x S^1_R` in `R^{n+2}`; tags as for the annulus.
    ProductAnnulusCircle { n: usize, eps: f64, delta: f64, circle_radius: f64 },
    /// The closed-up annulus: flat annulus at `x_{n+1} = -1`, flat `delta`-ball at
    /// `x_{n+1} = 1`, joined by the revolution wall `|x| = delta + sqrt(1 - x_{n+1}^2)`.
    /// Single boundary component, the `eps`-sphere at height `-1`.
    RevolutionClosure { n: usize, eps: f64, delta: f64 },
    /// Closed sphere `S^{n-1}_eps` in `R^n`.
    SphereBoundary { n: usize, eps: f64 },
    /// Standard torus in `R^3` with the given major and minor radii.
    Torus { major: f64, minor: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyDescriptor {
    #[serde(flatten)]
    pub variant: FamilyVariant,
    /// Target edge length.
    pub resolution: f64,
}

impl FamilyDescriptor {
    pub fn new(variant: FamilyVariant, resolution: f64) -> Self {
        FamilyDescriptor { variant, resolution }
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.resolution;
        if !(h > 0.0 && h.is_finite()) {
            return invalid(format!("resolution must be positive, got {h}"));
        }
        let order = |eps: f64, delta: f64| -> Result<()> {
            if !(eps > 0.0 && eps < delta && delta.is_finite()) {
                return invalid(format!("need 0 < eps < delta, got eps={eps}, delta={delta}"));
            }
            Ok(())
        };
        match self.variant {
            FamilyVariant::AnnulusFlat { n, eps, delta } => {
                dim_in(n, 2, 3, "annulus")?;
                order(eps, delta)
            }
            FamilyVariant::BallFlat { n, delta } => {
                dim_in(n, 2, 3, "ball")?;
                positive(delta, "delta")
            }
            FamilyVariant::CylinderSurface { radius, length } => {
                positive(radius, "radius")?;
                positive(length, "length")
            }
            FamilyVariant::ProductAnnulusCircle { n, eps, delta, circle_radius } => {
                if n < 2 {
                    return invalid("product annulus needs n >= 2");
                }
                order(eps, delta)?;
                positive(circle_radius, "circle radius")
            }
            FamilyVariant::RevolutionClosure { n, eps, delta } => {
                if n < 2 {
                    return invalid("revolution closure needs n >= 2");
                }
                order(eps, delta)
            }
            FamilyVariant::SphereBoundary { n, eps } => {
                dim_in(n, 2, 3, "sphere")?;
                positive(eps, "eps")
            }
            FamilyVariant::Torus { major, minor } => {
                positive(minor, "minor radius")?;
                if !(major > minor) {
                    return invalid("torus needs major > minor");
                }
                Ok(())
            }
        }
    }

    /// Exact `n`-dimensional volume of the family manifold.
    pub fn exact_volume(&self) -> f64 {
        match self.variant {
            FamilyVariant::AnnulusFlat { n, eps, delta } => {
                unit_ball_volume(n) * (delta.powi(n as i32) - eps.powi(n as i32))
            }
            FamilyVariant::BallFlat { n, delta } => unit_ball_volume(n) * delta.powi(n as i32),
            FamilyVariant::CylinderSurface { radius, length } => 2.0 * PI * radius * length,
            FamilyVariant::ProductAnnulusCircle { n, eps, delta, circle_radius } => {
                unit_ball_volume(n) * (delta.powi(n as i32) - eps.powi(n as i32)) * 2.0 * PI * circle_radius
            }
            FamilyVariant::RevolutionClosure { eps, delta, .. } => {
                PI * (delta * delta - eps * eps) + PI * delta * delta + 2.0 * PI * (PI * delta + 2.0)
            }
            FamilyVariant::SphereBoundary { n, eps } => {
                n as f64 * unit_ball_volume(n) * eps.powi(n as i32 - 1)
            }
            FamilyVariant::Torus { major, minor } => 4.0 * PI * PI * major * minor,
        }
    }

    /// Exact volume of the Steklov-tagged boundary, `0` for closed families.
    pub fn exact_steklov_volume(&self) -> f64 {
        let sphere = |n: usize, r: f64| n as f64 * unit_ball_volume(n) * r.powi(n as i32 - 1);
        match self.variant {
            FamilyVariant::AnnulusFlat { n, eps, .. } => sphere(n, eps),
            FamilyVariant::BallFlat { n, delta } => sphere(n, delta),
            FamilyVariant::CylinderSurface { radius, .. } => 4.0 * PI * radius,
            FamilyVariant::ProductAnnulusCircle { n, eps, circle_radius, .. } => {
                sphere(n, eps) * 2.0 * PI * circle_radius
            }
            FamilyVariant::RevolutionClosure { eps, .. } => 2.0 * PI * eps,
            FamilyVariant::SphereBoundary { .. } | FamilyVariant::Torus { .. } => 0.0,
        }
    }
}

/// Circle radius making `|S^{n-1}_eps x S^1_R| = 1`.
pub fn unit_boundary_circle_radius(n: usize, eps: f64) -> f64 {
    1.0 / (2.0 * PI * n as f64 * unit_ball_volume(n) * eps.powi(n as i32 - 1))
}

fn dim_in(n: usize, lo: usize, hi: usize, what: &str) -> Result<()> {
    if n < lo || n > hi {
        return Err(Error::Unsupported(format!("{what} meshes are available for n in {lo}..={hi}, got {n}")));
    }
    Ok(())
}

fn positive(x: f64, what: &str) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return invalid(format!("{what} must be positive, got {x}"));
    }
    Ok(())
}

fn check_eps_resolution(eps: f64, h: f64) -> Result<usize> {
    let count = (2.0 * PI * eps / h).ceil() as usize;
    if count < MIN_EPS_VERTICES {
        return Err(Error::ResolutionTooCoarse(format!(
            "h = {h} puts only {count} vertices on the eps-sphere of radius {eps} (need {MIN_EPS_VERTICES})"
        )));
    }
    Ok(count)
}

pub fn generate_mesh(desc: &FamilyDescriptor) -> Result<EmbeddedMesh> {
    desc.validate()?;
    let h = desc.resolution;
    match desc.variant {
        FamilyVariant::AnnulusFlat { n: 2, eps, delta } => {
            check_eps_resolution(eps, h)?;
            let layers = ((delta - eps) / h).ceil().max(1.0) as usize;
            let profile: Vec<(f64, f64)> =
                (0..=layers).map(|j| (eps + (delta - eps) * j as f64 / layers as f64, 0.0)).collect();
            let rev = revolve_profile(&profile, h, false);
            let last = rev.rings.len() - 1;
            let mut faces = ring_faces(&rev.rings[0], FaceTag::Steklov);
            faces.extend(ring_faces(&rev.rings[last], FaceTag::Neumann));
            EmbeddedMesh::new(2, 2, rev.vertices, rev.triangles, faces)
        }
        FamilyVariant::BallFlat { n: 2, delta } => {
            let layers = (delta / h).ceil().max(1.0) as usize;
            let profile: Vec<(f64, f64)> =
                (0..=layers).map(|j| (delta * j as f64 / layers as f64, 0.0)).collect();
            let rev = revolve_profile(&profile, h, false);
            let faces = ring_faces(rev.rings.last().unwrap(), FaceTag::Steklov);
            EmbeddedMesh::new(2, 2, rev.vertices, rev.triangles, faces)
        }
        FamilyVariant::AnnulusFlat { eps, delta, .. } => {
            check_eps_resolution(eps, h)?;
            let q = (PI * eps / (4.0 * h)).ceil().max(1.0) as usize;
            let layers = ((delta - eps) / h).ceil().max(1.0) as usize;
            cube_mapped_solid(q, layers, eps, delta)
        }
        FamilyVariant::BallFlat { delta, .. } => {
            let half = (PI * delta / (4.0 * h)).ceil().max(1.0) as usize;
            cube_mapped_solid(0, half, 0.0, delta)
        }
        FamilyVariant::CylinderSurface { radius, length } => cylinder(radius, length, h),
        FamilyVariant::ProductAnnulusCircle { n, eps, delta, circle_radius } => {
            if n != 2 {
                return Err(Error::Unsupported(format!(
                    "product annulus meshes are built for n = 2 only (got n = {n}); use the separated-mode oracles"
                )));
            }
            check_eps_resolution(eps, h)?;
            product_annulus_circle(eps, delta, circle_radius, h)
        }
        FamilyVariant::RevolutionClosure { n, eps, delta } => {
            if n != 2 {
                return Err(Error::Unsupported(format!(
                    "revolution-closure meshes are built for n = 2 only (got n = {n})"
                )));
            }
            check_eps_resolution(eps, h)?;
            revolution_closure(eps, delta, h)
        }
        FamilyVariant::SphereBoundary { n: 2, eps } => {
            let count = check_eps_resolution(eps, h)?;
            let vertices = (0..count)
                .map(|j| {
                    let t = 2.0 * PI * j as f64 / count as f64;
                    vec![eps * t.cos(), eps * t.sin()]
                })
                .collect();
            let cells = (0..count).map(|j| vec![j, (j + 1) % count]).collect();
            EmbeddedMesh::new(2, 1, vertices, cells, Vec::new())
        }
        FamilyVariant::SphereBoundary { eps, .. } => {
            check_eps_resolution(eps, h)?;
            icosphere(eps, h)
        }
        FamilyVariant::Torus { major, minor } => torus(major, minor, h),
    }
}

struct Revolved {
    vertices: Vec<Vec<f64>>,
    triangles: Vec<Vec<usize>>,
    rings: Vec<Vec<usize>>,
}

/// Sweeps a profile polyline `(rho, z)` around the axis. Each profile point becomes
/// a ring of about `2 pi rho / h` vertices (a single pole when `rho = 0`) and
/// consecutive rings are zipped into triangles. With `embed_z = false` the result
/// is planar (`z` ignored).
fn revolve_profile(profile: &[(f64, f64)], h: f64, embed_z: bool) -> Revolved {
    let mut vertices = Vec::new();
    let mut rings: Vec<Vec<usize>> = Vec::with_capacity(profile.len());
    let mut offsets = Vec::with_capacity(profile.len());
    for (i, &(rho, z)) in profile.iter().enumerate() {
        let count = if rho <= 0.0 { 1 } else { ((2.0 * PI * rho / h).ceil() as usize).max(6) };
        let offset = if i % 2 == 1 { PI / count as f64 } else { 0.0 };
        let mut ring = Vec::with_capacity(count);
        for j in 0..count {
            let t = offset + 2.0 * PI * j as f64 / count as f64;
            ring.push(vertices.len());
            let mut p = vec![rho * t.cos(), rho * t.sin()];
            if embed_z {
                p.push(z);
            }
            vertices.push(p);
        }
        rings.push(ring);
        offsets.push(offset);
    }
    let mut triangles = Vec::new();
    for i in 0..rings.len() - 1 {
        zip_rings(&rings[i], offsets[i], &rings[i + 1], offsets[i + 1], &mut triangles);
    }
    Revolved { vertices, triangles, rings }
}

fn zip_rings(a: &[usize], a0: f64, b: &[usize], b0: f64, out: &mut Vec<Vec<usize>>) {
    let (na, nb) = (a.len(), b.len());
    if na == 1 || nb == 1 {
        let (pole, ring) = if na == 1 { (a[0], b) } else { (b[0], a) };
        for k in 0..ring.len() {
            out.push(vec![pole, ring[k], ring[(k + 1) % ring.len()]]);
        }
        return;
    }
    let da = 2.0 * PI / na as f64;
    let db = 2.0 * PI / nb as f64;
    // ring-b index nearest to a[0]
    let rel = (a0 - b0).rem_euclid(2.0 * PI);
    let k0 = ((rel / db).round() as usize) % nb;
    let mut tb0 = b0 + k0 as f64 * db;
    while tb0 - a0 > PI {
        tb0 -= 2.0 * PI;
    }
    while a0 - tb0 > PI {
        tb0 += 2.0 * PI;
    }
    let (mut i, mut k) = (0usize, 0usize);
    while i < na || k < nb {
        let advance_a = if i == na {
            false
        } else if k == nb {
            true
        } else {
            a0 + (i + 1) as f64 * da < tb0 + (k + 1) as f64 * db
        };
        let bi = |k: usize| b[(k0 + k) % nb];
        if advance_a {
            out.push(vec![a[i % na], a[(i + 1) % na], bi(k)]);
            i += 1;
        } else {
            out.push(vec![a[i % na], bi(k + 1), bi(k)]);
            k += 1;
        }
    }
}

fn ring_faces(ring: &[usize], tag: FaceTag) -> Vec<BoundaryFace> {
    (0..ring.len())
        .map(|j| BoundaryFace { indices: vec![ring[j], ring[(j + 1) % ring.len()]], tag })
        .collect()
}

/// Facets occurring in exactly one cell, in deterministic (first-seen) order.
fn boundary_facets(cells: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
    let facets_of = |cell: &Vec<usize>| -> Vec<Vec<usize>> {
        (0..cell.len())
            .map(|skip| (0..cell.len()).filter(|&j| j != skip).map(|j| cell[j]).collect())
            .collect()
    };
    for cell in cells {
        for f in facets_of(cell) {
            let mut key = f.clone();
            key.sort_unstable();
            *counts.entry(key).or_insert(0) += 1;
        }
    }
    let mut out = Vec::new();
    for cell in cells {
        for f in facets_of(cell) {
            let mut key = f.clone();
            key.sort_unstable();
            if counts.get(&key) == Some(&1) {
                out.push(f);
            }
        }
    }
    out
}

fn cylinder(radius: f64, length: f64, h: f64) -> Result<EmbeddedMesh> {
    let nt = ((2.0 * PI * radius / h).ceil() as usize).max(8);
    let nz = ((length / h).ceil() as usize).max(1);
    let mut vertices = Vec::with_capacity(nt * (nz + 1));
    for iz in 0..=nz {
        let z = length * iz as f64 / nz as f64;
        for it in 0..nt {
            let t = 2.0 * PI * it as f64 / nt as f64;
            vertices.push(vec![radius * t.cos(), radius * t.sin(), z]);
        }
    }
    let id = |it: usize, iz: usize| iz * nt + it % nt;
    let mut cells = Vec::with_capacity(2 * nt * nz);
    for iz in 0..nz {
        for it in 0..nt {
            let (a, b, c, d) = (id(it, iz), id(it + 1, iz), id(it + 1, iz + 1), id(it, iz + 1));
            if (it + iz) % 2 == 0 {
                cells.push(vec![a, b, c]);
                cells.push(vec![a, c, d]);
            } else {
                cells.push(vec![a, b, d]);
                cells.push(vec![b, c, d]);
            }
        }
    }
    let mut faces = Vec::with_capacity(2 * nt);
    for iz in [0, nz] {
        for it in 0..nt {
            faces.push(BoundaryFace { indices: vec![id(it, iz), id(it + 1, iz)], tag: FaceTag::Steklov });
        }
    }
    EmbeddedMesh::new(3, 2, vertices, cells, faces)
}

fn torus(major: f64, minor: f64, h: f64) -> Result<EmbeddedMesh> {
    let nu = ((2.0 * PI * major / h).ceil() as usize).max(8);
    let nv = ((2.0 * PI * minor / h).ceil() as usize).max(8);
    let mut vertices = Vec::with_capacity(nu * nv);
    for iu in 0..nu {
        let u = 2.0 * PI * iu as f64 / nu as f64;
        for iv in 0..nv {
            let v = 2.0 * PI * iv as f64 / nv as f64;
            let rho = major + minor * v.cos();
            vertices.push(vec![rho * u.cos(), rho * u.sin(), minor * v.sin()]);
        }
    }
    let id = |iu: usize, iv: usize| (iu % nu) * nv + iv % nv;
    let mut cells = Vec::with_capacity(2 * nu * nv);
    for iu in 0..nu {
        for iv in 0..nv {
            let (a, b, c, d) = (id(iu, iv), id(iu + 1, iv), id(iu + 1, iv + 1), id(iu, iv + 1));
            cells.push(vec![a, b, c]);
            cells.push(vec![a, c, d]);
        }
    }
    EmbeddedMesh::new(3, 2, vertices, cells, Vec::new())
}

fn icosphere(radius: f64, h: f64) -> Result<EmbeddedMesh> {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut pts: Vec<[f64; 3]> = vec![
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    for p in pts.iter_mut() {
        let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        for x in p.iter_mut() {
            *x /= r;
        }
    }
    let mut tris: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    let mut edge = 1.0515 * radius;
    while edge > h {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(tris.len() * 4);
        let mut midpoint = |a: usize, b: usize, pts: &mut Vec<[f64; 3]>| -> usize {
            let key = (a.min(b), a.max(b));
            *mid.entry(key).or_insert_with(|| {
                let mut p = [0.0; 3];
                for d in 0..3 {
                    p[d] = 0.5 * (pts[a][d] + pts[b][d]);
                }
                let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                pts.push([p[0] / r, p[1] / r, p[2] / r]);
                pts.len() - 1
            })
        };
        for t in &tris {
            let ab = midpoint(t[0], t[1], &mut pts);
            let bc = midpoint(t[1], t[2], &mut pts);
            let ca = midpoint(t[2], t[0], &mut pts);
            next.push([t[0], ab, ca]);
            next.push([t[1], bc, ab]);
            next.push([t[2], ca, bc]);
            next.push([ab, bc, ca]);
        }
        tris = next;
        edge *= 0.5;
    }
    let vertices = pts.iter().map(|p| p.iter().map(|x| x * radius).collect()).collect();
    let cells = tris.iter().map(|t| t.to_vec()).collect();
    EmbeddedMesh::new(3, 2, vertices, cells, Vec::new())
}

fn revolution_closure(eps: f64, delta: f64, h: f64) -> Result<EmbeddedMesh> {
    let mut profile = Vec::new();
    let n1 = ((delta - eps) / h).ceil().max(1.0) as usize;
    for j in 0..n1 {
        profile.push((eps + (delta - eps) * j as f64 / n1 as f64, -1.0));
    }
    let n2 = (PI / h).ceil().max(2.0) as usize;
    for j in 0..n2 {
        let t = -PI / 2.0 + PI * j as f64 / n2 as f64;
        let (rho, z) = if j == 0 { (delta, -1.0) } else { (delta + t.cos(), t.sin()) };
        profile.push((rho, z));
    }
    let n3 = (delta / h).ceil().max(1.0) as usize;
    for j in 0..=n3 {
        profile.push((delta * (1.0 - j as f64 / n3 as f64), 1.0));
    }
    let rev = revolve_profile(&profile, h, true);
    let faces = ring_faces(&rev.rings[0], FaceTag::Steklov);
    Ok(EmbeddedMesh::new(3, 2, rev.vertices, rev.triangles, faces)?
        .with_metadata("seam_heights", vec![-1.0, 1.0])
        .with_metadata("seam_radii", vec![delta, delta]))
}

/// Solid ball (`inner_half = 0`) or spherical shell in `R^3`, built from a Kuhn
/// (six-tetrahedra) subdivision of a cube grid mapped radially onto the sphere(s).
/// The shell keeps the grid cells outside an inner cube of `2 * inner_half` cells
/// per side; `layers` cells separate the inner cube from the outer surface.
fn cube_mapped_solid(inner_half: usize, layers: usize, eps: f64, delta: f64) -> Result<EmbeddedMesh> {
    let n = 2 * (inner_half + layers);
    let np = n + 1;
    let vid = |i: usize, j: usize, k: usize| (i * np + j) * np + k;
    let grid = |i: usize| -1.0 + 2.0 * i as f64 / n as f64;
    let a = inner_half as f64 / (inner_half + layers) as f64;
    let lo = layers;
    let hi = layers + 2 * inner_half;
    let inside_inner = |i: usize, j: usize, k: usize| {
        inner_half > 0 && (lo..hi).contains(&i) && (lo..hi).contains(&j) && (lo..hi).contains(&k)
    };
    let mut raw = vec![[0.0; 3]; np * np * np];
    let mut used = vec![false; np * np * np];
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut tets_raw = Vec::with_capacity(6 * n * n * n);
    for i in 0..=n {
        for j in 0..=n {
            for k in 0..=n {
                raw[vid(i, j, k)] = [grid(i), grid(j), grid(k)];
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if inside_inner(i, j, k) {
                    continue;
                }
                for p in &perms {
                    let mut c = [i, j, k];
                    let mut tet = vec![vid(c[0], c[1], c[2])];
                    for &axis in p {
                        c[axis] += 1;
                        tet.push(vid(c[0], c[1], c[2]));
                    }
                    for &v in &tet {
                        used[v] = true;
                    }
                    tets_raw.push(tet);
                }
            }
        }
    }
    let map = |p: [f64; 3]| -> [f64; 3] {
        let s = p[0].abs().max(p[1].abs()).max(p[2].abs());
        let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        if r == 0.0 {
            return [0.0; 3];
        }
        let rad = if inner_half == 0 { delta * s } else { eps + (s - a) / (1.0 - a) * (delta - eps) };
        [p[0] / r * rad, p[1] / r * rad, p[2] / r * rad]
    };
    let mut renumber = vec![usize::MAX; raw.len()];
    let mut vertices = Vec::new();
    let mut mapped = Vec::new();
    for (idx, &u) in used.iter().enumerate() {
        if u {
            renumber[idx] = vertices.len();
            let q = map(raw[idx]);
            mapped.push(q);
            vertices.push(q.to_vec());
        }
    }
    let orient = |p: &[[f64; 3]; 4]| -> f64 {
        let e = |a: usize| [p[a][0] - p[0][0], p[a][1] - p[0][1], p[a][2] - p[0][2]];
        let (u, v, w) = (e(1), e(2), e(3));
        u[0] * (v[1] * w[2] - v[2] * w[1]) - u[1] * (v[0] * w[2] - v[2] * w[0]) + u[2] * (v[0] * w[1] - v[1] * w[0])
    };
    let mut cells = Vec::with_capacity(tets_raw.len());
    for (c, t) in tets_raw.iter().enumerate() {
        let before = orient(&[raw[t[0]], raw[t[1]], raw[t[2]], raw[t[3]]]);
        let tet: Vec<usize> = t.iter().map(|&v| renumber[v]).collect();
        let after = orient(&[mapped[tet[0]], mapped[tet[1]], mapped[tet[2]], mapped[tet[3]]]);
        if before.signum() != after.signum() || after == 0.0 {
            return Err(Error::ResolutionTooCoarse(format!("radial map inverted tetrahedron {c}")));
        }
        cells.push(tet);
    }
    let mid = 0.5 * (eps + delta);
    let faces = boundary_facets(&cells)
        .into_iter()
        .map(|f| {
            let r = f
                .iter()
                .map(|&v| mapped[v].iter().map(|x| x * x).sum::<f64>().sqrt())
                .sum::<f64>()
                / 3.0;
            let tag = if inner_half > 0 && r < mid { FaceTag::Steklov } else if inner_half > 0 {
                FaceTag::Neumann
            } else {
                FaceTag::Steklov
            };
            BoundaryFace { indices: f, tag }
        })
        .collect();
    EmbeddedMesh::new(3, 3, vertices, cells, faces)
}

fn product_annulus_circle(eps: f64, delta: f64, circle_radius: f64, h: f64) -> Result<EmbeddedMesh> {
    let layers = ((delta - eps) / h).ceil().max(1.0) as usize;
    let profile: Vec<(f64, f64)> =
        (0..=layers).map(|j| (eps + (delta - eps) * j as f64 / layers as f64, 0.0)).collect();
    let base = revolve_profile(&profile, h, false);
    let nc = ((2.0 * PI * circle_radius / h).ceil() as usize).max(16);
    let nb = base.vertices.len();
    let mut vertices = Vec::with_capacity(nb * nc);
    for j in 0..nc {
        let t = 2.0 * PI * j as f64 / nc as f64;
        for p in &base.vertices {
            vertices.push(vec![p[0], p[1], circle_radius * t.cos(), circle_radius * t.sin()]);
        }
    }
    let id = |v: usize, layer: usize| (layer % nc) * nb + v;
    let mut cells = Vec::with_capacity(3 * base.triangles.len() * nc);
    for j in 0..nc {
        for tri in &base.triangles {
            let mut s = tri.clone();
            s.sort_unstable();
            let (a, b, c) = (s[0], s[1], s[2]);
            // Prism split keyed on base indices so that shared quads agree.
            cells.push(vec![id(a, j), id(b, j), id(c, j), id(a, j + 1)]);
            cells.push(vec![id(b, j), id(c, j), id(a, j + 1), id(b, j + 1)]);
            cells.push(vec![id(c, j), id(a, j + 1), id(b, j + 1), id(c, j + 1)]);
        }
    }
    let mid = 0.5 * (eps + delta);
    let faces = boundary_facets(&cells)
        .into_iter()
        .map(|f| {
            let r = f.iter().map(|&v| vertices[v][0].hypot(vertices[v][1])).sum::<f64>() / f.len() as f64;
            let tag = if r < mid { FaceTag::Steklov } else { FaceTag::Neumann };
            BoundaryFace { indices: f, tag }
        })
        .collect();
    EmbeddedMesh::new(4, 3, vertices, cells, faces)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mesh(variant: FamilyVariant, h: f64) -> EmbeddedMesh {
        generate_mesh(&FamilyDescriptor::new(variant, h)).unwrap()
    }

    #[test]
    fn annulus_tags_match_boundary_conditions() {
        let m = mesh(FamilyVariant::AnnulusFlat { n: 2, eps: 1.0, delta: 2.0 }, 0.05);
        let st = m.boundary_volume(FaceTag::Steklov);
        let ne = m.boundary_volume(FaceTag::Neumann);
        assert!((st - 2.0 * PI).abs() < 2e-3, "steklov length {st}");
        assert!((ne - 4.0 * PI).abs() < 4e-3, "neumann length {ne}");
        assert!((m.volume() - 3.0 * PI).abs() < 1e-2);
        for f in m.boundary_faces() {
            for &v in &f.indices {
                let r = m.vertex(v)[0].hypot(m.vertex(v)[1]);
                let expect = if f.tag == FaceTag::Steklov { 1.0 } else { 2.0 };
                assert!((r - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cylinder_areas() {
        let m = mesh(FamilyVariant::CylinderSurface { radius: 1.0, length: 1.0 }, 0.05);
        assert!((m.volume() - 2.0 * PI).abs() < 5e-3);
        assert!((m.boundary_volume(FaceTag::Steklov) - 4.0 * PI).abs() < 1e-2);
        assert_eq!(m.boundary_components(), 2);
    }

    #[test]
    fn revolution_closure_has_one_boundary_circle() {
        for (eps, delta) in [(0.5, 2.0), (0.2, 1.0), (0.3, 3.0)] {
            let m = mesh(FamilyVariant::RevolutionClosure { n: 2, eps, delta }, 0.05);
            assert_eq!(m.boundary_components(), 1);
            for f in m.boundary_faces() {
                for &v in &f.indices {
                    let p = m.vertex(v);
                    assert!((p[0].hypot(p[1]) - eps).abs() < 1e-12);
                    assert!((p[2] + 1.0).abs() < 1e-12);
                }
            }
            assert!(m.boundary_of_boundary_is_empty());
        }
    }

    #[test]
    fn revolution_closure_vertices_lie_on_the_three_pieces() {
        let (eps, delta) = (0.5, 2.0);
        let m = mesh(FamilyVariant::RevolutionClosure { n: 2, eps, delta }, 0.1);
        for p in m.vertices() {
            let rho = p[0].hypot(p[1]);
            let z = p[2];
            let on_bottom = (z + 1.0).abs() < 1e-12 && rho >= eps - 1e-12 && rho <= delta + 1e-12;
            let on_top = (z - 1.0).abs() < 1e-12 && rho <= delta + 1e-12;
            let wall = (rho - (delta + (1.0 - z * z).max(0.0).sqrt())).abs() < 1e-12;
            assert!(on_bottom || on_top || wall, "stray vertex {p:?}");
        }
    }

    #[test]
    fn rejects_coarse_eps() {
        let d = FamilyDescriptor::new(FamilyVariant::AnnulusFlat { n: 2, eps: 0.1, delta: 1.0 }, 0.2);
        assert!(matches!(generate_mesh(&d), Err(Error::ResolutionTooCoarse(_))));
    }

    #[test]
    fn rejects_bad_descriptors() {
        for v in [
            FamilyVariant::AnnulusFlat { n: 2, eps: 2.0, delta: 1.0 },
            FamilyVariant::CylinderSurface { radius: 1.0, length: -1.0 },
            FamilyVariant::ProductAnnulusCircle { n: 2, eps: 0.5, delta: 1.0, circle_radius: 0.0 },
        ] {
            assert!(generate_mesh(&FamilyDescriptor::new(v, 0.1)).is_err());
        }
        let d = FamilyDescriptor::new(FamilyVariant::BallFlat { n: 2, delta: 1.0 }, 0.0);
        assert!(generate_mesh(&d).is_err());
    }

    #[test]
    fn shell_and_ball_in_three_dimensions() {
        let ball = mesh(FamilyVariant::BallFlat { n: 3, delta: 1.0 }, 0.15);
        let exact = 4.0 * PI / 3.0;
        assert!((ball.volume() - exact).abs() / exact < 0.05, "ball volume {}", ball.volume());
        assert_eq!(ball.boundary_components(), 1);
        let shell = mesh(FamilyVariant::AnnulusFlat { n: 3, eps: 1.0, delta: 2.0 }, 0.2);
        assert_eq!(shell.boundary_components(), 2);
        let st = shell.boundary_volume(FaceTag::Steklov);
        assert!((st - 4.0 * PI).abs() / (4.0 * PI) < 0.05);
        assert!(shell.boundary_of_boundary_is_empty());
    }

    #[test]
    fn product_boundary_has_unit_volume() {
        let eps = 0.5;
        let r = unit_boundary_circle_radius(2, eps);
        let d = FamilyDescriptor::new(
            FamilyVariant::ProductAnnulusCircle { n: 2, eps, delta: 1.0, circle_radius: r },
            0.06,
        );
        assert!((d.exact_steklov_volume() - 1.0).abs() < 1e-14);
        let m = generate_mesh(&d).unwrap();
        assert_eq!(m.intrinsic_dim(), 3);
        assert_eq!(m.ambient_dim(), 4);
        assert!((m.boundary_volume(FaceTag::Steklov) - 1.0).abs() < 0.01);
        assert!((m.volume() - d.exact_volume()).abs() / d.exact_volume() < 0.01);
        assert!(m.boundary_of_boundary_is_empty());
    }

    #[test]
    fn sphere_boundaries_are_closed() {
        let c = mesh(FamilyVariant::SphereBoundary { n: 2, eps: 1.0 }, 0.1);
        assert!(c.boundary_faces().is_empty());
        assert!((c.volume() - 2.0 * PI).abs() < 0.01);
        let s = mesh(FamilyVariant::SphereBoundary { n: 3, eps: 1.0 }, 0.1);
        assert!((s.volume() - 4.0 * PI).abs() / (4.0 * PI) < 0.01);
        let t = mesh(FamilyVariant::Torus { major: 2.0, minor: 0.5 }, 0.1);
        assert!((t.volume() - 4.0 * PI * PI).abs() / (4.0 * PI * PI) < 0.01);
    }
}
