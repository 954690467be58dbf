//! Disjoint well-separated boundary sets, the tent test functions built on them,
//! and the variational upper bound on `sigma_k` they certify.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::ConstantsConfig;
use crate::error::{invalid, Error, Result};
use crate::geometry::{dist, EmbeddedMesh, FaceTag};
use crate::spectral::{self, cell_gradient_norms, ProblemKind, SpectralProblem};
use crate::spheres::unit_sphere_area;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub vertex: usize,
    pub position: Vec<f64>,
    pub weight: f64,
}

/// Lumped boundary volume: each Steklov vertex carries a `1/n` share of the
/// adjacent Steklov facets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryMeasure {
    pub atoms: Vec<Atom>,
    pub total: f64,
}

impl BoundaryMeasure {
    pub fn from_mesh(mesh: &EmbeddedMesh) -> Result<Self> {
        let mut weights = vec![0.0; mesh.num_vertices()];
        for face in mesh.boundary_faces().iter().filter(|f| f.tag == FaceTag::Steklov) {
            let share = mesh.face_volume(face) / face.indices.len() as f64;
            for &v in &face.indices {
                weights[v] += share;
            }
        }
        let atoms: Vec<Atom> = weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(v, &w)| Atom { vertex: v, position: mesh.vertex(v).to_vec(), weight: w })
            .collect();
        if atoms.is_empty() {
            return Err(Error::InvalidMesh("mesh has no Steklov boundary".into()));
        }
        let total = atoms.iter().map(|a| a.weight).sum();
        Ok(BoundaryMeasure { atoms, total })
    }

    /// Builds a measure from explicit atoms; `vertex` fields are taken as given.
    pub fn from_atoms(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() || atoms.iter().any(|a| !(a.weight > 0.0)) {
            return invalid("a measure needs atoms with positive weights");
        }
        let total = atoms.iter().map(|a| a.weight).sum();
        Ok(BoundaryMeasure { atoms, total })
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    fn d(&self, a: usize, b: usize) -> f64 {
        dist(&self.atoms[a].position, &self.atoms[b].position)
    }

    /// Atoms within `radius` of atom `a`, itself included.
    fn ball(&self, a: usize, radius: f64) -> Vec<usize> {
        (0..self.len()).filter(|&b| self.d(a, b) <= radius).collect()
    }

    /// Largest `mu(B(x, r))` over atom centers `x`.
    pub fn max_ball_measure(&self, r: f64) -> f64 {
        (0..self.len())
            .map(|a| self.ball(a, r).iter().map(|&b| self.atoms[b].weight).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// `(|Sigma| / (2 C^2 |S^{n-1}| i (2k+2)))^{1/(n-1)}`.
pub fn choose_radius(total_boundary_volume: f64, i_sigma: f64, k: usize, n: usize, c_cover: f64) -> Result<f64> {
    if !(total_boundary_volume > 0.0 && i_sigma > 0.0 && k >= 1 && n >= 2 && c_cover > 0.0) {
        return invalid("choose_radius needs positive arguments and n >= 2");
    }
    let den = 2.0 * c_cover * c_cover * unit_sphere_area(n - 1) * i_sigma * (2 * k + 2) as f64;
    Ok((total_boundary_volume / den).powf(1.0 / (n as f64 - 1.0)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackingSets {
    pub r: f64,
    pub c_cover: f64,
    pub target_measure: f64,
    pub sets: Vec<Vec<usize>>,
    pub set_measures: Vec<f64>,
    pub separation: f64,
}

#[derive(PartialEq)]
struct Candidate(f64, usize);

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

/// Checks `sup mu(B(x,r)) <= total / (4 C^2 K)` at atom centers, then grows the sets.
pub fn build_packing(measure: &BoundaryMeasure, r: f64, k_sets: usize, c_cover: f64) -> Result<PackingSets> {
    let limit = measure.total / (4.0 * c_cover * c_cover * k_sets as f64);
    let worst = measure.max_ball_measure(r);
    if worst > limit {
        return Err(Error::HypothesisViolated(format!(
            "an r-ball carries measure {worst:.6e} > {limit:.6e} = total/(4 C^2 K); reduce r"
        )));
    }
    grow_sets(measure, r, k_sets, c_cover)
}

/// Greedy construction without the ball-measure hypothesis: seed at the heaviest
/// free atom, absorb free atoms within `r` of the set nearest-first until the
/// target `total/(2 C K)` is reached, then block every free atom closer than `3r`.
pub fn grow_sets(measure: &BoundaryMeasure, r: f64, k_sets: usize, c_cover: f64) -> Result<PackingSets> {
    if !(r > 0.0) || k_sets == 0 || !(c_cover > 0.0) {
        return invalid("need r > 0, K >= 1 and C > 0");
    }
    #[derive(Clone, Copy, PartialEq)]
    enum State {
        Free,
        Used,
        Blocked,
    }
    let na = measure.len();
    let target = measure.total / (2.0 * c_cover * k_sets as f64);
    let mut state = vec![State::Free; na];
    let mut sets = Vec::with_capacity(k_sets);
    let mut set_measures = Vec::with_capacity(k_sets);
    for _ in 0..k_sets {
        let seed = (0..na)
            .filter(|&a| state[a] == State::Free)
            .max_by(|&a, &b| measure.atoms[a].weight.total_cmp(&measure.atoms[b].weight).then(b.cmp(&a)));
        let Some(seed) = seed else {
            sets.push(Vec::new());
            set_measures.push(0.0);
            continue;
        };
        let mut set = Vec::new();
        let mut mass = 0.0;
        let mut heap = BinaryHeap::new();
        let mut queued = vec![false; na];
        heap.push(Candidate(0.0, seed));
        queued[seed] = true;
        while mass < target {
            let Some(Candidate(_, a)) = heap.pop() else { break };
            state[a] = State::Used;
            set.push(a);
            mass += measure.atoms[a].weight;
            for b in measure.ball(a, r) {
                if state[b] == State::Free && !queued[b] {
                    queued[b] = true;
                    heap.push(Candidate(measure.d(seed, b), b));
                }
            }
        }
        for &a in &set {
            for b in 0..na {
                if state[b] == State::Free && measure.d(a, b) < 3.0 * r {
                    state[b] = State::Blocked;
                }
            }
        }
        sets.push(set);
        set_measures.push(mass);
    }
    if set_measures.iter().any(|&m| m < target) {
        return Err(Error::PackingFailed { achieved: set_measures, target });
    }
    let mut separation = f64::INFINITY;
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            for &a in &sets[i] {
                for &b in &sets[j] {
                    separation = separation.min(measure.d(a, b));
                }
            }
        }
    }
    if separation < 3.0 * r {
        return Err(Error::PackingFailed { achieved: set_measures, target });
    }
    Ok(PackingSets { r, c_cover, target_measure: target, sets, set_measures, separation })
}

/// Largest number of `r/2`-balls a greedy cover needs for the atoms inside
/// sampled `r`-balls centered at atoms. Each step takes the uncovered atom `p`
/// farthest from the center `x` and covers it with the ball of radius `r/2`
/// centered on the segment from `p` toward `x`, at distance `r/2` from `p`.
pub fn empirical_covering_constant(measure: &BoundaryMeasure, r: f64, samples: usize, seed: u64) -> Result<usize> {
    if !(r > 0.0) || samples == 0 {
        return invalid("need r > 0 and samples >= 1");
    }
    let reach = 0.5 * r * (1.0 + 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 1;
    for _ in 0..samples {
        let x = rng.random_range(0..measure.len());
        let center = &measure.atoms[x].position;
        let inside = measure.ball(x, r);
        let mut covered = vec![false; inside.len()];
        let mut count = 0;
        while let Some(pi) = (0..inside.len())
            .filter(|&i| !covered[i])
            .max_by(|&i, &j| measure.d(x, inside[i]).total_cmp(&measure.d(x, inside[j])))
        {
            let p = &measure.atoms[inside[pi]].position;
            let dp = dist(p, center);
            let q: Vec<f64> = if dp > 0.0 {
                p.iter().zip(center).map(|(a, b)| a + 0.5 * r * (b - a) / dp).collect()
            } else {
                p.clone()
            };
            for (i, &a) in inside.iter().enumerate() {
                if dist(&q, &measure.atoms[a].position) <= reach {
                    covered[i] = true;
                }
            }
            covered[pi] = true;
            count += 1;
        }
        worst = worst.max(count);
    }
    Ok(worst)
}

/// Empirical constants for certifying `sigma_k`: starting from `C = 2`, measures the
/// covering constant at the radius that `C` implies until it stops growing.
pub fn empirical_config(mesh: &EmbeddedMesh, k: usize, i_sigma: f64, seed: u64) -> Result<ConstantsConfig> {
    let measure = BoundaryMeasure::from_mesh(mesh)?;
    let n = mesh.intrinsic_dim();
    let mut c = 2usize;
    for _ in 0..8 {
        let r = choose_radius(measure.total, i_sigma, k, n, c as f64)?;
        let measured = empirical_covering_constant(&measure, r, 1000, seed)?;
        if measured <= c {
            break;
        }
        c = measured;
    }
    Ok(ConstantsConfig::empirical(c as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackingCertificate {
    pub k: usize,
    pub r: f64,
    pub c_cover: f64,
    pub i_sigma: f64,
    pub target_measure: f64,
    /// Atom indices of every set `A_i`.
    pub sets: Vec<Vec<usize>>,
    /// Mesh vertices of the atoms in every set.
    pub set_vertices: Vec<Vec<usize>>,
    pub set_measures: Vec<f64>,
    pub separation: f64,
    /// Rayleigh quotient of every tent function `g_i`.
    pub quotients: Vec<f64>,
    /// Mesh volume of the closed support of every `g_i`.
    pub support_volumes: Vec<f64>,
    /// The `k+1` sets whose tent functions enter the bound.
    pub selected: Vec<usize>,
    pub certified_bound: f64,
    /// Largest per-simplex `|grad g_i| * r` over the selected functions.
    pub max_gradient_ratio: f64,
    /// Whether every such ratio stays within the cell's [`interpolation_factor`].
    pub lipschitz_ok: bool,
    pub fem_sigma_k: f64,
    pub valid: bool,
    #[serde(skip)]
    pub test_vectors: Vec<Vec<f64>>,
}

fn steklov_edge_length(mesh: &EmbeddedMesh) -> f64 {
    let mut h: f64 = 0.0;
    for face in mesh.boundary_faces().iter().filter(|f| f.tag == FaceTag::Steklov) {
        for (i, &a) in face.indices.iter().enumerate() {
            for &b in &face.indices[i + 1..] {
                h = h.max(dist(mesh.vertex(a), mesh.vertex(b)));
            }
        }
    }
    h
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Distance from `p` to the segment or triangle spanned by `face`; larger faces
/// fall back to their vertices.
fn face_distance(p: &[f64], face: &[&[f64]]) -> f64 {
    match face.len() {
        1 => dist(p, face[0]),
        2 => {
            let (a, b) = (face[0], face[1]);
            let ab = sub(b, a);
            let t = (dot(&sub(p, a), &ab) / dot(&ab, &ab)).clamp(0.0, 1.0);
            let q: Vec<f64> = a.iter().zip(&ab).map(|(x, d)| x + t * d).collect();
            dist(p, &q)
        }
        3 => {
            let (a, b, c) = (face[0], face[1], face[2]);
            let (ab, ac, ap) = (sub(b, a), sub(c, a), sub(p, a));
            let (d00, d01, d11) = (dot(&ab, &ab), dot(&ab, &ac), dot(&ac, &ac));
            let (d20, d21) = (dot(&ap, &ab), dot(&ap, &ac));
            let den = d00 * d11 - d01 * d01;
            let v = (d11 * d20 - d01 * d21) / den;
            let w = (d00 * d21 - d01 * d20) / den;
            if v >= 0.0 && w >= 0.0 && v + w <= 1.0 {
                let q: Vec<f64> = (0..p.len()).map(|i| a[i] + v * ab[i] + w * ac[i]).collect();
                dist(p, &q)
            } else {
                face_distance(p, &[a, b]).min(face_distance(p, &[b, c])).min(face_distance(p, &[a, c]))
            }
        }
        _ => face.iter().map(|q| dist(p, q)).fold(f64::INFINITY, f64::min),
    }
}

/// Largest gradient norm of a linear function on the simplex `pts` whose
/// increments along every edge are at most the edge length.
pub fn interpolation_factor(pts: &[&[f64]]) -> f64 {
    let n = pts.len() - 1;
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    for p in &pts[1..] {
        let mut e = sub(p, pts[0]);
        for _ in 0..2 {
            for b in &basis {
                let d = dot(&e, b);
                e.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
            }
        }
        let norm = dot(&e, &e).sqrt();
        basis.push(e.iter().map(|x| x / norm).collect());
    }
    let local: Vec<Vec<f64>> = pts.iter().map(|p| basis.iter().map(|b| dot(&sub(p, pts[0]), b)).collect()).collect();
    let mut dirs = Vec::new();
    for a in 0..=n {
        for b in a + 1..=n {
            let u = sub(&local[b], &local[a]);
            let l = dot(&u, &u).sqrt();
            dirs.push(u.iter().map(|x| x / l).collect::<Vec<f64>>());
        }
    }
    let mut best: f64 = 0.0;
    let mut pick = Vec::with_capacity(n);
    fn choose(start: usize, total: usize, need: usize, pick: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if pick.len() == need {
            f(pick);
            return;
        }
        for i in start..total {
            pick.push(i);
            choose(i + 1, total, need, pick, f);
            pick.pop();
        }
    }
    choose(0, dirs.len(), n, &mut pick, &mut |rows| {
        let u = DMatrix::from_fn(n, n, |i, j| dirs[rows[i]][j]);
        let Some(lu) = u.clone().try_inverse() else { return };
        for signs in 0..(1u32 << n) {
            let rhs = DVector::from_fn(n, |i, _| if signs >> i & 1 == 1 { -1.0 } else { 1.0 });
            let x = &lu * rhs;
            if dirs.iter().all(|d| dot(d, x.as_slice()).abs() <= 1.0 + 1e-9) {
                best = best.max(x.norm());
            }
        }
    });
    best
}

/// Tent function `max(0, 1 - d(v, A)/r)` at every mesh vertex, where `A` is the
/// union of the given boundary faces (single points allowed).
pub fn tent_function(mesh: &EmbeddedMesh, faces: &[Vec<&[f64]>], r: f64) -> Vec<f64> {
    let m = mesh.ambient_dim();
    let points: Vec<&[f64]> = faces.iter().flatten().copied().collect();
    let center: Vec<f64> = (0..m).map(|d| points.iter().map(|p| p[d]).sum::<f64>() / points.len() as f64).collect();
    let reach = points.iter().map(|p| dist(p, &center)).fold(0.0, f64::max) + r;
    mesh.vertices()
        .map(|v| {
            if dist(v, &center) >= reach {
                return 0.0;
            }
            let d = faces.iter().map(|f| face_distance(v, f)).fold(f64::INFINITY, f64::min);
            (1.0 - d / r).max(0.0)
        })
        .collect()
}

/// Atoms of `set` together with the Steklov facets all of whose vertices lie in it.
fn set_faces<'m>(mesh: &'m EmbeddedMesh, vertices: &[usize]) -> Vec<Vec<&'m [f64]>> {
    let mut member = vec![false; mesh.num_vertices()];
    for &v in vertices {
        member[v] = true;
    }
    let mut faces: Vec<Vec<&[f64]>> = vertices.iter().map(|&v| vec![mesh.vertex(v)]).collect();
    for face in mesh.boundary_faces().iter().filter(|f| f.tag == FaceTag::Steklov) {
        if face.indices.iter().all(|&v| member[v]) {
            faces.push(face.indices.iter().map(|&v| mesh.vertex(v)).collect());
        }
    }
    faces
}

/// Builds `2k+2` sets at the radius implied by `config`, evaluates their tent
/// functions and bounds `sigma_k` by the largest quotient among the `k+1` with the
/// smallest supports. The bound is checked against the finite-element `sigma_k`.
pub fn certify_sigma_k(mesh: &EmbeddedMesh, k: usize, config: &ConstantsConfig, i_sigma: f64) -> Result<PackingCertificate> {
    certify_sigma_k_against(mesh, k, config, i_sigma, None)
}

/// As [`certify_sigma_k`], checking against already computed eigenvalues
/// `sigma_0, sigma_1, ...` when given.
pub fn certify_sigma_k_against(
    mesh: &EmbeddedMesh,
    k: usize,
    config: &ConstantsConfig,
    i_sigma: f64,
    fem_eigenvalues: Option<&[f64]>,
) -> Result<PackingCertificate> {
    if k == 0 {
        return invalid("k must be at least 1");
    }
    config.validate()?;
    if !(i_sigma > 0.0) {
        return invalid("i(Sigma) must be positive");
    }
    let measure = BoundaryMeasure::from_mesh(mesh)?;
    let n = mesh.intrinsic_dim();
    let r = choose_radius(measure.total, i_sigma, k, n, config.c_cover)?;
    let h = steklov_edge_length(mesh);
    if !(h < r) {
        return Err(Error::ResolutionTooCoarse(format!(
            "packing radius r = {r:.3e} is not above the boundary edge length {h:.3e}; \
             refine the mesh or use measured constants"
        )));
    }
    let k_sets = 2 * k + 2;
    let packing = build_packing(&measure, r, k_sets, config.c_cover)?;
    let ops = spectral::assemble(mesh)?;
    let set_vertices: Vec<Vec<usize>> =
        packing.sets.iter().map(|s| s.iter().map(|&a| measure.atoms[a].vertex).collect()).collect();
    let vectors: Vec<Vec<f64>> = set_vertices
        .iter()
        .map(|verts| tent_function(mesh, &set_faces(mesh, verts), r))
        .collect();
    let mut quotients = Vec::with_capacity(k_sets);
    let mut support_volumes = vec![0.0; k_sets];
    let mut owner: Vec<Option<usize>> = vec![None; mesh.num_vertices()];
    for (i, g) in vectors.iter().enumerate() {
        quotients.push(ops.rayleigh_quotient(g)?);
        for (v, &x) in g.iter().enumerate() {
            if x > 0.0 {
                owner[v] = Some(i);
            }
        }
    }
    for c in 0..mesh.num_cells() {
        let cell = mesh.cell(c);
        let mut touching: Vec<usize> = cell.iter().filter_map(|&v| owner[v]).collect();
        touching.sort_unstable();
        touching.dedup();
        if touching.len() > 1 {
            return Err(Error::ResolutionTooCoarse(format!(
                "cell {c} meets the supports of tent functions {touching:?}"
            )));
        }
        if let Some(&i) = touching.first() {
            support_volumes[i] += mesh.cell_volume(c);
        }
    }
    let mut order: Vec<usize> = (0..k_sets).collect();
    order.sort_by(|&a, &b| support_volumes[a].total_cmp(&support_volumes[b]).then(a.cmp(&b)));
    let mut selected: Vec<usize> = order[..k + 1].to_vec();
    selected.sort_unstable();
    let certified_bound = selected.iter().map(|&i| quotients[i]).fold(0.0, f64::max);
    let mut max_gradient_ratio: f64 = 0.0;
    let mut lipschitz_ok = true;
    for &i in &selected {
        for (c, grad) in cell_gradient_norms(mesh, &vectors[i]).into_iter().enumerate() {
            if grad == 0.0 {
                continue;
            }
            let ratio = grad * r;
            max_gradient_ratio = max_gradient_ratio.max(ratio);
            let pts: Vec<&[f64]> = mesh.cell(c).iter().map(|&v| mesh.vertex(v)).collect();
            if ratio > interpolation_factor(&pts) * (1.0 + 1e-9) {
                lipschitz_ok = false;
            }
        }
    }
    let fem_sigma_k = match fem_eigenvalues {
        Some(values) if values.len() > k => values[k],
        Some(_) => return invalid(format!("need at least {} eigenvalues", k + 1)),
        None => {
            let kind =
                if mesh.boundary_volume(FaceTag::Neumann) > 0.0 { ProblemKind::SteklovNeumann } else { ProblemKind::Steklov };
            spectral::solve_with_operators(&SpectralProblem::new(mesh, kind, k), &ops)?.eigenvalues[k]
        }
    };
    let valid = fem_sigma_k <= certified_bound + 1e-8 * certified_bound.max(1.0);
    let test_vectors = selected.iter().map(|&i| vectors[i].clone()).collect();
    Ok(PackingCertificate {
        k,
        r,
        c_cover: config.c_cover,
        i_sigma,
        target_measure: packing.target_measure,
        sets: packing.sets,
        set_vertices,
        set_measures: packing.set_measures,
        separation: packing.separation,
        quotients,
        support_volumes,
        selected,
        certified_bound,
        max_gradient_ratio,
        lipschitz_ok,
        fem_sigma_k,
        valid,
        test_vectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{generate_mesh, FamilyDescriptor, FamilyVariant};

    fn circle_measure(segments: usize) -> BoundaryMeasure {
        let w = 2.0 * std::f64::consts::PI / segments as f64;
        let atoms = (0..segments)
            .map(|i| {
                let t = w * i as f64;
                Atom { vertex: i, position: vec![t.cos(), t.sin()], weight: w }
            })
            .collect();
        BoundaryMeasure::from_atoms(atoms).unwrap()
    }

    #[test]
    fn radius_arithmetic() {
        let tau = 2.0 * std::f64::consts::PI;
        let r = choose_radius(tau, 2.0, 1, 2, 2.0).unwrap();
        assert!((r - 1.0 / 64.0).abs() < 1e-15);
        let ambient = choose_radius(tau, 2.0, 1, 2, 32f64.powi(3)).unwrap();
        assert!((ambient * 32f64.powi(6) * 16.0 - 1.0).abs() < 1e-12);
        let mut last = f64::INFINITY;
        for k in 1..20 {
            let r = choose_radius(3.0, 2.0, k, 3, 5.0).unwrap();
            assert!(r < last);
            last = r;
        }
    }

    #[test]
    fn four_arcs_on_circle() {
        let mu = circle_measure(4000);
        let p = grow_sets(&mu, 0.05, 4, 2.0).unwrap();
        assert_eq!(p.sets.len(), 4);
        let tau = 2.0 * std::f64::consts::PI;
        for m in &p.set_measures {
            assert!(*m >= tau / 16.0);
        }
        assert!(p.separation >= 0.15);
    }

    #[test]
    fn single_set_reaches_target() {
        let mu = circle_measure(2000);
        let p = build_packing(&mu, 0.01, 1, 2.0).unwrap();
        assert!(p.set_measures[0] >= mu.total / 4.0);
    }

    #[test]
    fn heavy_atom_violates_hypothesis() {
        let mut mu = circle_measure(100);
        mu.atoms[0].weight = mu.total;
        let mu = BoundaryMeasure::from_atoms(mu.atoms).unwrap();
        assert!(matches!(build_packing(&mu, 1e-4, 4, 2.0), Err(Error::HypothesisViolated(_))));
    }

    #[test]
    fn circle_covering_constant_is_small() {
        let mu = circle_measure(2000);
        let c = empirical_covering_constant(&mu, 0.05, 200, 3).unwrap();
        assert_eq!(c, 2);
    }

    #[test]
    fn measure_total_matches_boundary_volume() {
        let m = generate_mesh(&FamilyDescriptor::new(FamilyVariant::BallFlat { n: 2, delta: 1.0 }, 0.2)).unwrap();
        let mu = BoundaryMeasure::from_mesh(&m).unwrap();
        assert!((mu.total - m.boundary_volume(FaceTag::Steklov)).abs() < 1e-10);
    }

    #[test]
    fn disk_certificate_is_valid() {
        let m = generate_mesh(&FamilyDescriptor::new(FamilyVariant::BallFlat { n: 2, delta: 1.0 }, 0.012)).unwrap();
        let cfg = empirical_config(&m, 1, 2.0, 1).unwrap();
        let cert = certify_sigma_k(&m, 1, &cfg, 2.0).map_err(|e| format!("{cfg:?} {e}")).unwrap();
        assert!(cert.valid, "{} vs {}", cert.fem_sigma_k, cert.certified_bound);
        assert!(cert.certified_bound.is_finite());
        assert!(cert.lipschitz_ok, "{}", cert.max_gradient_ratio);
        assert_eq!(cert.selected.len(), 2);
    }

    #[test]
    fn interpolation_factors() {
        let right = interpolation_factor(&[&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        assert!((right - 2f64.sqrt()).abs() < 1e-12);
        let s3 = 3f64.sqrt();
        let equi = interpolation_factor(&[&[0.0, 0.0], &[2.0, 0.0], &[1.0, s3]]);
        assert!((equi - 2.0 / s3).abs() < 1e-12);
        assert!((interpolation_factor(&[&[0.0], &[0.3]]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ambient_constants_are_unresolvable() {
        let m = generate_mesh(&FamilyDescriptor::new(FamilyVariant::BallFlat { n: 2, delta: 1.0 }, 0.2)).unwrap();
        let err = certify_sigma_k(&m, 1, &ConstantsConfig::ambient(2), 2.0).unwrap_err();
        assert!(matches!(err, Error::ResolutionTooCoarse(_)));
    }
}
