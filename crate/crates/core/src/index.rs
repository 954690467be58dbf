//! Intersection indices of meshes with affine planes: exact per-simplex counting,
//! seeded random search, algebraic degree bounds and a ball-concentration audit.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{dist, EmbeddedMesh, FamilyVariant};
use crate::spheres::unit_sphere_area;

/// Barycentric margin for a transverse hit.
pub const TAU_BARY: f64 = 1e-9;
/// Largest accepted condition number of a per-simplex system.
pub const KAPPA_MAX: f64 = 1e10;

/// `{x : N x = b}` with orthonormal rows `N` (`codim x m`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffinePlane {
    pub normal_rows: Vec<Vec<f64>>,
    pub offset: Vec<f64>,
}

impl AffinePlane {
    pub fn new(normal_rows: Vec<Vec<f64>>, offset: Vec<f64>) -> Result<Self> {
        let c = normal_rows.len();
        if c == 0 {
            return invalid("a plane needs at least one normal row");
        }
        let m = normal_rows[0].len();
        if normal_rows.iter().any(|r| r.len() != m) || offset.len() != c || c > m {
            return invalid("inconsistent plane dimensions");
        }
        for i in 0..c {
            for j in 0..c {
                let g: f64 = normal_rows[i].iter().zip(&normal_rows[j]).map(|(a, b)| a * b).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                if (g - target).abs() > 1e-12 {
                    return invalid("normal rows are not orthonormal");
                }
            }
        }
        Ok(AffinePlane { normal_rows, offset })
    }

    /// Orthonormalizes `rows` (Gram-Schmidt, twice) and takes the plane through `point`.
    pub fn through_point(rows: Vec<Vec<f64>>, point: &[f64]) -> Result<Self> {
        let mut q: Vec<Vec<f64>> = Vec::with_capacity(rows.len());
        for mut r in rows {
            for _ in 0..2 {
                for prev in &q {
                    let d: f64 = r.iter().zip(prev).map(|(a, b)| a * b).sum();
                    for (x, p) in r.iter_mut().zip(prev) {
                        *x -= d * p;
                    }
                }
            }
            let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !(norm > 1e-10) {
                return invalid("normal rows are linearly dependent");
            }
            q.push(r.iter().map(|x| x / norm).collect());
        }
        let offset = q.iter().map(|r| r.iter().zip(point).map(|(a, b)| a * b).sum()).collect();
        Ok(AffinePlane { normal_rows: q, offset })
    }

    pub fn codim(&self) -> usize {
        self.normal_rows.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.normal_rows[0].len()
    }

    /// The point of the plane closest to the origin.
    pub fn base_point(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.ambient_dim()];
        for (r, b) in self.normal_rows.iter().zip(&self.offset) {
            for (xi, ri) in x.iter_mut().zip(r) {
                *xi += b * ri;
            }
        }
        x
    }
}

/// Number of simplices met transversally by `plane`; near-degenerate hits are an
/// error so the caller can resample.
pub fn plane_mesh_intersections(plane: &AffinePlane, mesh: &EmbeddedMesh) -> Result<usize> {
    IntersectionCounter::new(mesh).count(plane)
}

struct Leaf {
    center: Vec<f64>,
    radius: f64,
    cells: Vec<usize>,
}

/// Cells grouped into bounding spheres for repeated plane counts on one mesh.
pub struct IntersectionCounter<'m> {
    mesh: &'m EmbeddedMesh,
    leaves: Vec<Leaf>,
}

impl<'m> IntersectionCounter<'m> {
    const LEAF_SIZE: usize = 32;

    pub fn new(mesh: &'m EmbeddedMesh) -> Self {
        let m = mesh.ambient_dim();
        let centroids: Vec<Vec<f64>> = mesh
            .cells()
            .map(|cell| (0..m).map(|d| cell.iter().map(|&v| mesh.vertex(v)[d]).sum::<f64>() / cell.len() as f64).collect())
            .collect();
        let mut leaves = Vec::new();
        let mut stack = vec![(0..mesh.num_cells()).collect::<Vec<usize>>()];
        while let Some(mut cells) = stack.pop() {
            if cells.len() > Self::LEAF_SIZE {
                let spread = |d: usize| {
                    let (lo, hi) = cells.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &c| {
                        (lo.min(centroids[c][d]), hi.max(centroids[c][d]))
                    });
                    hi - lo
                };
                let axis = (0..m).max_by(|&a, &b| spread(a).total_cmp(&spread(b))).unwrap_or(0);
                cells.sort_by(|&a, &b| centroids[a][axis].total_cmp(&centroids[b][axis]));
                let right = cells.split_off(cells.len() / 2);
                stack.push(cells);
                stack.push(right);
                continue;
            }
            let center: Vec<f64> =
                (0..m).map(|d| cells.iter().map(|&c| centroids[c][d]).sum::<f64>() / cells.len() as f64).collect();
            let radius = cells
                .iter()
                .flat_map(|&c| mesh.cell(c).iter())
                .map(|&v| dist(&center, mesh.vertex(v)))
                .fold(0.0, f64::max);
            leaves.push(Leaf { center, radius, cells });
        }
        IntersectionCounter { mesh, leaves }
    }

    pub fn count(&self, plane: &AffinePlane) -> Result<usize> {
        let mesh = self.mesh;
        let n = mesh.intrinsic_dim();
        if plane.codim() != n {
            return Err(Error::CodimMismatch { plane_codim: plane.codim(), mesh_dim: n });
        }
        if plane.ambient_dim() != mesh.ambient_dim() {
            return invalid("plane and mesh live in different ambient dimensions");
        }
        let c = n;
        let k = n + 1;
        let residual = |p: &[f64], row: usize| -> f64 {
            plane.normal_rows[row].iter().zip(p).map(|(a, x)| a * x).sum::<f64>() - plane.offset[row]
        };
        let mut proj = vec![0.0; k * c];
        let mut count = 0;
        for leaf in &self.leaves {
            let d2: f64 = (0..c).map(|row| residual(&leaf.center, row).powi(2)).sum();
            if d2 > leaf.radius * leaf.radius * (1.0 + 1e-9) + 1e-300 {
                continue;
            }
            'cells: for &ci in &leaf.cells {
                let cell = mesh.cell(ci);
                for (j, &v) in cell.iter().enumerate() {
                    for row in 0..c {
                        proj[j * c + row] = residual(mesh.vertex(v), row);
                    }
                }
                for row in 0..c {
                    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                    for j in 0..k {
                        lo = lo.min(proj[j * c + row]);
                        hi = hi.max(proj[j * c + row]);
                    }
                    if lo > 0.0 || hi < 0.0 {
                        continue 'cells;
                    }
                }
                // Unknowns: barycentric weights; equations N V l = b and sum l = 1,
                // written with residuals so the right-hand side is e_{n+1}.
                let a = DMatrix::from_fn(k, k, |row, j| if row == c { 1.0 } else { proj[j * c + row] });
                let rhs = DVector::from_fn(k, |i, _| if i == c { 1.0 } else { 0.0 });
                let Some(inv) = a.clone().try_inverse() else {
                    return Err(Error::NonTransverse(format!("singular system on cell {ci}")));
                };
                let cond = norm_one(&a) * norm_one(&inv);
                if !(cond <= KAPPA_MAX) {
                    return Err(Error::NonTransverse(format!("condition number {cond:e} on cell {ci}")));
                }
                let lambda = inv * rhs;
                let min = lambda.iter().copied().fold(f64::INFINITY, f64::min);
                if min > TAU_BARY {
                    count += 1;
                } else if min >= -TAU_BARY {
                    return Err(Error::NonTransverse(format!("hit within {TAU_BARY:e} of the boundary of cell {ci}")));
                }
            }
        }
        Ok(count)
    }
}

fn norm_one(a: &DMatrix<f64>) -> f64 {
    (0..a.ncols()).map(|j| a.column(j).iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexOptions {
    pub samples: usize,
    pub seed: u64,
    pub hill_climb: bool,
    /// Must equal the mesh dimension when given.
    pub codim: Option<usize>,
    pub hill_climb_rounds: usize,
    /// Bounding-box inflation for offsets, relative to each side.
    pub inflation: f64,
}

impl IndexOptions {
    pub fn new(samples: usize, seed: u64) -> Self {
        IndexOptions { samples, seed, hill_climb: false, codim: None, hill_climb_rounds: 200, inflation: 0.1 }
    }

    pub fn with_hill_climb(mut self, on: bool) -> Self {
        self.hill_climb = on;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEstimate {
    pub sampled_max: usize,
    pub samples: usize,
    pub hill_climb_improvements: usize,
    pub degree_upper_bound: Option<u64>,
    pub witness_plane: AffinePlane,
    pub degeneracy_rejections: usize,
    /// Transverse count -> number of random samples with that count.
    pub histogram: BTreeMap<usize, usize>,
    /// `(samples drawn, running max)` at every power of two and at the last sample.
    pub sensitivity: Vec<(usize, usize)>,
}

fn gaussian_rows(rng: &mut ChaCha8Rng, c: usize, m: usize) -> Vec<Vec<f64>> {
    (0..c).map(|_| (0..m).map(|_| StandardNormal.sample(&mut *rng)).collect()).collect()
}

/// Random search for planes meeting the mesh often, with optional hill climbing
/// from the best sample. The result is a lower estimate with a recountable witness.
pub fn estimate_index(mesh: &EmbeddedMesh, opts: &IndexOptions) -> Result<IndexEstimate> {
    let n = mesh.intrinsic_dim();
    let m = mesh.ambient_dim();
    if let Some(c) = opts.codim {
        if c != n {
            return Err(Error::CodimMismatch { plane_codim: c, mesh_dim: n });
        }
    }
    if opts.samples < 1 {
        return invalid("need at least one sample");
    }
    let (lo, hi) = mesh.bounding_box();
    let pad: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| (b - a).max(1e-12) * opts.inflation).collect();
    let counter = IntersectionCounter::new(mesh);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut histogram = BTreeMap::new();
    let mut sensitivity = Vec::new();
    let mut best: Option<(usize, AffinePlane)> = None;
    let mut drawn = 0;
    let mut rejections = 0;
    while drawn < opts.samples {
        let rows = gaussian_rows(&mut rng, n, m);
        let point: Vec<f64> = (0..m).map(|d| rng.random_range(lo[d] - pad[d]..=hi[d] + pad[d])).collect();
        let plane = AffinePlane::through_point(rows, &point);
        let outcome = plane.and_then(|p| counter.count(&p).map(|k| (k, p)));
        match outcome {
            Ok((k, p)) => {
                drawn += 1;
                *histogram.entry(k).or_insert(0) += 1;
                if best.as_ref().is_none_or(|(b, _)| k > *b) {
                    best = Some((k, p));
                }
                if drawn.is_power_of_two() || drawn == opts.samples {
                    sensitivity.push((drawn, best.as_ref().map_or(0, |b| b.0)));
                }
            }
            Err(Error::NonTransverse(_)) | Err(Error::InvalidParameter(_)) => {
                rejections += 1;
                if rejections > 10 * opts.samples {
                    return Err(Error::AllSamplesDegenerate { rejections });
                }
            }
            Err(e) => return Err(e),
        }
    }
    let (mut best_k, mut best_plane) = best.expect("at least one accepted sample");
    let mut improvements = 0;
    if opts.hill_climb {
        let diag = dist(&lo, &hi).max(1e-12);
        let mut step = 0.1 * diag;
        let mut turn = 0.1;
        for round in 0..opts.hill_climb_rounds {
            if round > 0 && round % 50 == 0 {
                step *= 0.5;
                turn *= 0.5;
            }
            let base = best_plane.base_point();
            let point: Vec<f64> = base.iter().map(|x| x + step * rng.sample::<f64, _>(StandardNormal)).collect();
            let rows: Vec<Vec<f64>> = best_plane
                .normal_rows
                .iter()
                .map(|r| r.iter().map(|x| x + turn * rng.sample::<f64, _>(StandardNormal)).collect())
                .collect();
            let Ok(candidate) = AffinePlane::through_point(rows, &point) else { continue };
            match counter.count(&candidate) {
                Ok(k) if k > best_k => {
                    best_k = k;
                    best_plane = candidate;
                    improvements += 1;
                }
                Ok(_) => {}
                Err(Error::NonTransverse(_)) => rejections += 1,
                Err(e) => return Err(e),
            }
        }
    }
    Ok(IndexEstimate {
        sampled_max: best_k,
        samples: drawn,
        hill_climb_improvements: improvements,
        degree_upper_bound: None,
        witness_plane: best_plane,
        degeneracy_rejections: rejections,
        histogram,
        sensitivity,
    })
}

/// Product of the degrees of one piece's defining polynomials.
pub fn degree_product(degrees: &[u64]) -> Result<u64> {
    if degrees.is_empty() || degrees.contains(&0) {
        return invalid("degrees must be a nonempty list of positive integers");
    }
    Ok(degrees.iter().product())
}

/// Sum over pieces of the per-piece degree products.
pub fn degree_upper_bound(pieces: &[Vec<u64>]) -> Result<u64> {
    if pieces.is_empty() {
        return invalid("need at least one piece");
    }
    pieces.iter().map(|p| degree_product(p)).sum()
}

/// Degree bounds for a family manifold and for its Steklov boundary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyIndexBounds {
    /// Defining-polynomial degrees of every piece of the manifold.
    pub mesh_pieces: Vec<Vec<u64>>,
    pub mesh: u64,
    pub steklov_pieces: Option<Vec<Vec<u64>>>,
    pub steklov: Option<u64>,
}

/// Degree bounds for codim-`n` planes against the manifold and codim-`(n-1)`
/// planes against its Steklov boundary. Flat domains count as degree 1.
pub fn family_index_bounds(variant: &FamilyVariant) -> FamilyIndexBounds {
    let (mesh_pieces, steklov_pieces): (Vec<Vec<u64>>, Option<Vec<Vec<u64>>>) = match variant {
        FamilyVariant::AnnulusFlat { .. } | FamilyVariant::BallFlat { .. } => (vec![vec![1]], Some(vec![vec![2]])),
        FamilyVariant::CylinderSurface { .. } => (vec![vec![2]], Some(vec![vec![2, 1], vec![2, 1]])),
        FamilyVariant::ProductAnnulusCircle { .. } => (vec![vec![2]], Some(vec![vec![2, 2]])),
        FamilyVariant::RevolutionClosure { .. } => (vec![vec![1], vec![1], vec![4]], Some(vec![vec![2, 1]])),
        FamilyVariant::SphereBoundary { .. } => (vec![vec![2]], None),
        FamilyVariant::Torus { .. } => (vec![vec![4]], None),
    };
    let sum = |pieces: &[Vec<u64>]| pieces.iter().map(|p| p.iter().product::<u64>()).sum();
    FamilyIndexBounds {
        mesh: sum(&mesh_pieces),
        steklov: steklov_pieces.as_deref().map(sum),
        mesh_pieces,
        steklov_pieces,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationAudit {
    pub trials: usize,
    pub index_bound: u64,
    pub worst_ratio: f64,
    pub worst_center: Vec<f64>,
    pub worst_radius: f64,
}

/// Barycentric sample weights covering a simplex with equal-weight cells: segment
/// and triangle subdivisions for `n <= 2` (at least 1000 points), random points
/// otherwise.
fn simplex_weights(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    match n {
        1 => (0..1000)
            .map(|i| {
                let t = (i as f64 + 0.5) / 1000.0;
                vec![1.0 - t, t]
            })
            .collect(),
        2 => {
            let l = 32;
            let lf = l as f64;
            let mut out = Vec::with_capacity(l * l);
            for i in 0..l {
                for j in 0..l - i {
                    let (a, b) = (i as f64, j as f64);
                    out.push(vec![(a + 1.0 / 3.0) / lf, (b + 1.0 / 3.0) / lf, 1.0 - (a + b + 2.0 / 3.0) / lf]);
                    if i + j + 1 < l {
                        out.push(vec![(a + 2.0 / 3.0) / lf, (b + 2.0 / 3.0) / lf, 1.0 - (a + b + 4.0 / 3.0) / lf]);
                    }
                }
            }
            out
        }
        _ => (0..1000)
            .map(|_| {
                let e: Vec<f64> = (0..=n).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
                let s: f64 = e.iter().sum();
                e.iter().map(|x| x / s).collect()
            })
            .collect(),
    }
}

/// Fraction of the sample points of `pts` within `r` of `center`.
fn inside_fraction(pts: &[&[f64]], weights: &[Vec<f64>], center: &[f64], r: f64) -> f64 {
    let m = center.len();
    let mut rel: Vec<f64> = Vec::with_capacity(pts.len() * m);
    for p in pts {
        rel.extend(p.iter().zip(center).map(|(a, c)| a - c));
    }
    let r2 = r * r;
    let hit = weights
        .iter()
        .filter(|w| {
            let mut d2 = 0.0;
            for d in 0..m {
                let x: f64 = w.iter().enumerate().map(|(j, wj)| wj * rel[j * m + d]).sum();
                d2 += x * x;
            }
            d2 <= r2
        })
        .count();
    hit as f64 / weights.len() as f64
}

/// Worst ratio `|N cap B(x,r)| / ((i/2) |S^q| r^q)` over random balls near the mesh.
pub fn concentration_audit(mesh: &EmbeddedMesh, index_bound: u64, trials: usize, seed: u64) -> Result<ConcentrationAudit> {
    if trials < 1 || index_bound < 1 {
        return invalid("need trials >= 1 and a positive index bound");
    }
    let q = mesh.intrinsic_dim();
    let m = mesh.ambient_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let volumes: Vec<f64> = (0..mesh.num_cells()).map(|c| mesh.cell_volume(c)).collect();
    let total: f64 = volumes.iter().sum();
    let cumulative: Vec<f64> = volumes.iter().scan(0.0, |acc, v| { *acc += v; Some(*acc) }).collect();
    let centroids: Vec<(Vec<f64>, f64)> = mesh
        .cells()
        .map(|cell| {
            let c: Vec<f64> = (0..m).map(|d| cell.iter().map(|&v| mesh.vertex(v)[d]).sum::<f64>() / cell.len() as f64).collect();
            let rho = cell.iter().map(|&v| dist(&c, mesh.vertex(v))).fold(0.0, f64::max);
            (c, rho)
        })
        .collect();
    let (lo, hi) = mesh.bounding_box();
    let diam = dist(&lo, &hi);
    let scale = unit_sphere_area(q) * index_bound as f64 / 2.0;
    let mut weights = simplex_weights(q, &mut rng);
    let mut audit = ConcentrationAudit { trials, index_bound, worst_ratio: 0.0, worst_center: vec![0.0; m], worst_radius: 0.0 };
    for _ in 0..trials {
        let pick = rng.random::<f64>() * total;
        let cell_idx = cumulative.partition_point(|&c| c < pick).min(mesh.num_cells() - 1);
        let pts: Vec<&[f64]> = mesh.cell(cell_idx).iter().map(|&v| mesh.vertex(v)).collect();
        let e: Vec<f64> = (0..=q).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
        let es: f64 = e.iter().sum();
        let r = diam * 10f64.powf(rng.random_range(-2.0..0.3));
        let center: Vec<f64> = (0..m)
            .map(|d| {
                let on: f64 = e.iter().zip(&pts).map(|(w, p)| w / es * p[d]).sum();
                on + 0.1 * r * rng.sample::<f64, _>(StandardNormal)
            })
            .collect();
        let mut inside = 0.0;
        for (c, (cen, rho)) in centroids.iter().enumerate() {
            let d = dist(cen, &center);
            if d > r + rho {
                continue;
            }
            if d + rho <= r {
                inside += volumes[c];
                continue;
            }
            let cpts: Vec<&[f64]> = mesh.cell(c).iter().map(|&v| mesh.vertex(v)).collect();
            if q > 2 {
                weights = simplex_weights(q, &mut rng);
            }
            inside += volumes[c] * inside_fraction(&cpts, &weights, &center, r);
        }
        let ratio = inside / (scale * r.powi(q as i32));
        if ratio > audit.worst_ratio {
            audit.worst_ratio = ratio;
            audit.worst_center = center;
            audit.worst_radius = r;
        }
    }
    Ok(audit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{generate_mesh, FamilyDescriptor};

    fn circle(h: f64) -> EmbeddedMesh {
        generate_mesh(&FamilyDescriptor::new(FamilyVariant::SphereBoundary { n: 2, eps: 1.0 }, h)).unwrap()
    }

    #[test]
    fn horizontal_line_meets_circle_twice() {
        let m = circle(0.01);
        let plane = AffinePlane::new(vec![vec![0.0, 1.0]], vec![0.0123]).unwrap();
        assert_eq!(plane_mesh_intersections(&plane, &m).unwrap(), 2);
        let far = AffinePlane::new(vec![vec![0.0, 1.0]], vec![5.0]).unwrap();
        assert_eq!(plane_mesh_intersections(&far, &m).unwrap(), 0);
    }

    #[test]
    fn vertex_hits_are_flagged() {
        let m = circle(0.5);
        // the generator places vertex 0 at (1, 0)
        let plane = AffinePlane::new(vec![vec![0.0, 1.0]], vec![0.0]).unwrap();
        assert!(matches!(plane_mesh_intersections(&plane, &m), Err(Error::NonTransverse(_))));
    }

    #[test]
    fn circle_index_and_parity() {
        let m = circle(0.05);
        let est = estimate_index(&m, &IndexOptions::new(1000, 7)).unwrap();
        assert_eq!(est.sampled_max, 2);
        assert!(est.histogram.keys().all(|k| k % 2 == 0));
        assert_eq!(plane_mesh_intersections(&est.witness_plane, &m).unwrap(), 2);
    }

    #[test]
    fn estimates_are_deterministic() {
        let m = circle(0.1);
        let a = estimate_index(&m, &IndexOptions::new(200, 11).with_hill_climb(true)).unwrap();
        let b = estimate_index(&m, &IndexOptions::new(200, 11).with_hill_climb(true)).unwrap();
        assert_eq!(a, b);
        let c = estimate_index(&m, &IndexOptions::new(200, 11)).unwrap();
        assert_eq!(c.sensitivity.last(), Some(&(200, c.sampled_max)));
        assert_eq!(c.sensitivity.len(), 9);
        assert!(c.sensitivity.windows(2).all(|w| w[0].1 <= w[1].1));
    }

    #[test]
    fn codim_mismatch_is_reported() {
        let s = generate_mesh(&FamilyDescriptor::new(FamilyVariant::SphereBoundary { n: 3, eps: 1.0 }, 0.5)).unwrap();
        let opts = IndexOptions { codim: Some(1), ..IndexOptions::new(10, 1) };
        assert!(matches!(estimate_index(&s, &opts), Err(Error::CodimMismatch { plane_codim: 1, mesh_dim: 2 })));
        let line = AffinePlane::new(vec![vec![1.0, 0.0, 0.0]], vec![0.1]).unwrap();
        assert!(plane_mesh_intersections(&line, &s).is_err());
    }

    #[test]
    fn degree_arithmetic() {
        assert_eq!(degree_product(&[1, 2]).unwrap(), 2);
        assert_eq!(degree_product(&[4, 2]).unwrap(), 8);
        assert_eq!(degree_upper_bound(&[vec![1, 2], vec![1, 2], vec![4, 2]]).unwrap(), 12);
        assert!(degree_upper_bound(&[vec![]]).is_err());
        let torus = family_index_bounds(&FamilyVariant::Torus { major: 1.0, minor: 0.3 });
        assert_eq!((torus.mesh, torus.steklov), (4, None));
        let cyl = family_index_bounds(&FamilyVariant::CylinderSurface { radius: 1.0, length: 1.0 });
        assert_eq!((cyl.mesh, cyl.steklov), (2, Some(4)));
    }

    #[test]
    fn circle_concentration() {
        let m = circle(0.05);
        let audit = concentration_audit(&m, 2, 500, 5).unwrap();
        assert!(audit.worst_ratio <= 1.0, "{audit:?}");
    }

    #[test]
    fn flat_disk_concentration() {
        let d = generate_mesh(&FamilyDescriptor::new(FamilyVariant::BallFlat { n: 2, delta: 1.0 }, 0.1)).unwrap();
        let d3 = d.map_vertices(|p| vec![p[0], p[1], 0.0]).unwrap();
        let audit = concentration_audit(&d3, 1, 200, 9).unwrap();
        assert!(audit.worst_ratio <= 1.0, "{audit:?}");
    }
}
