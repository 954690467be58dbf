//! Piecewise-linear finite elements for the Steklov and mixed Steklov-Neumann
//! problems, reduced to the Steklov boundary by a discrete Dirichlet-to-Neumann map.

mod eigen;

use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{factorial, EmbeddedMesh, FaceTag};
use crate::sparse::{CsrMatrix, SparseCholesky};

/// Boundary sizes up to this use the dense route under [`EigenMethod::Auto`].
pub const DENSE_BOUNDARY_LIMIT: usize = 1500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    Steklov,
    SteklovNeumann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EigenMethod {
    Auto,
    Dense,
    Subspace,
}

/// Stiffness and Steklov boundary mass over all mesh vertices.
#[derive(Debug, Clone)]
pub struct Operators {
    pub stiffness: CsrMatrix,
    pub boundary_mass: CsrMatrix,
}

impl Operators {
    pub fn rayleigh_quotient(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.stiffness.dim() {
            return invalid(format!(
                "vector has {} entries, mesh has {} vertices",
                values.len(),
                self.stiffness.dim()
            ));
        }
        let den = self.boundary_mass.quadratic_form(values);
        let scale = values.iter().map(|v| v * v).sum::<f64>();
        if !(den > 1e-300 && den > 1e-14 * scale * self.boundary_mass.norm_inf()) {
            return Err(Error::VanishingBoundaryTrace);
        }
        Ok(self.stiffness.quadratic_form(values).max(0.0) / den)
    }
}

/// Edge matrix of a simplex and the inverse Gram matrix of its tangent frame.
fn tangent_frame(points: &[&[f64]]) -> Option<(f64, DMatrix<f64>)> {
    let n = points.len() - 1;
    let m = points[0].len();
    let e = DMatrix::from_fn(m, n, |r, c| points[c + 1][r] - points[0][r]);
    let g = e.transpose() * &e;
    let det = g.determinant();
    if !(det > 0.0) {
        return None;
    }
    let ginv = g.try_inverse()?;
    Some((det.sqrt() / factorial(n), ginv))
}

fn local_stiffness(points: &[&[f64]]) -> Option<(f64, DMatrix<f64>)> {
    let n = points.len() - 1;
    let (vol, ginv) = tangent_frame(points)?;
    let d = DMatrix::from_fn(n + 1, n, |r, c| if r == 0 { -1.0 } else if r == c + 1 { 1.0 } else { 0.0 });
    Some((vol, (&d * ginv * d.transpose()) * vol))
}

pub fn assemble(mesh: &EmbeddedMesh) -> Result<Operators> {
    let nv = mesh.num_vertices();
    let mut k_trip = Vec::with_capacity(mesh.num_cells() * (mesh.intrinsic_dim() + 1).pow(2));
    for c in 0..mesh.num_cells() {
        let cell = mesh.cell(c);
        let pts: Vec<&[f64]> = cell.iter().map(|&i| mesh.vertex(i)).collect();
        let (vol, k) = local_stiffness(&pts).ok_or(Error::DegenerateCell { cell: c, volume: 0.0 })?;
        if !(vol > 0.0) {
            return Err(Error::DegenerateCell { cell: c, volume: vol });
        }
        for a in 0..cell.len() {
            for b in 0..cell.len() {
                k_trip.push((cell[a], cell[b], k[(a, b)]));
            }
        }
    }
    let mut b_trip = Vec::new();
    for face in mesh.boundary_faces().iter().filter(|f| f.tag == FaceTag::Steklov) {
        let d = face.indices.len() - 1;
        let vol = mesh.face_volume(face);
        let denom = ((d + 1) * (d + 2)) as f64;
        for (a, &i) in face.indices.iter().enumerate() {
            for (b, &j) in face.indices.iter().enumerate() {
                let w = if a == b { 2.0 } else { 1.0 };
                b_trip.push((i, j, vol * w / denom));
            }
        }
    }
    Ok(Operators {
        stiffness: CsrMatrix::from_triplets(nv, &k_trip),
        boundary_mass: CsrMatrix::from_triplets(nv, &b_trip),
    })
}

/// Per-cell gradient norms of the piecewise-linear interpolant of `values`.
pub fn cell_gradient_norms(mesh: &EmbeddedMesh, values: &[f64]) -> Vec<f64> {
    (0..mesh.num_cells())
        .map(|c| {
            let cell = mesh.cell(c);
            let pts: Vec<&[f64]> = cell.iter().map(|&i| mesh.vertex(i)).collect();
            let (_, ginv) = tangent_frame(&pts).expect("validated mesh has no degenerate cells");
            let g = nalgebra::DVector::from_fn(cell.len() - 1, |i, _| values[cell[i + 1]] - values[cell[0]]);
            (g.transpose() * ginv * &g)[(0, 0)].max(0.0).sqrt()
        })
        .collect()
}

/// `(v^T K v) / (v^T B v)` for nodal values `v`.
pub fn rayleigh_quotient(mesh: &EmbeddedMesh, values: &[f64]) -> Result<f64> {
    assemble(mesh)?.rayleigh_quotient(values)
}

#[derive(Debug, Clone)]
pub struct SpectralProblem<'a> {
    pub mesh: &'a EmbeddedMesh,
    pub kind: ProblemKind,
    /// `k_max`; eigenvalues `sigma_0..=sigma_kmax` are computed.
    pub num_eigenvalues: usize,
    /// Bound on the normwise backward error of every reported pair.
    pub tolerance: f64,
    pub method: EigenMethod,
    pub keep_vectors: bool,
}

impl<'a> SpectralProblem<'a> {
    pub fn new(mesh: &'a EmbeddedMesh, kind: ProblemKind, k_max: usize) -> Self {
        SpectralProblem { mesh, kind, num_eigenvalues: k_max, tolerance: 1e-8, method: EigenMethod::Auto, keep_vectors: false }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn with_method(mut self, method: EigenMethod) -> Self {
        self.method = method;
        self
    }

    pub fn with_vectors(mut self, keep: bool) -> Self {
        self.keep_vectors = keep;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_eigenvalues < 1 {
            return invalid("k_max must be at least 1");
        }
        if !(self.tolerance > 0.0) {
            return invalid("solver tolerance must be positive");
        }
        if !self.mesh.has_steklov() {
            return invalid("mesh has no Steklov-tagged boundary faces");
        }
        if self.kind == ProblemKind::Steklov
            && self.mesh.boundary_faces().iter().any(|f| f.tag != FaceTag::Steklov)
        {
            return invalid("pure Steklov problem posed on a mesh with Neumann faces");
        }
        let nb = self.mesh.steklov_vertices().len();
        if nb <= self.num_eigenvalues {
            return invalid(format!(
                "k_max = {} needs more than {} Steklov boundary vertices",
                self.num_eigenvalues, nb
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralResult {
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub interior_dofs: usize,
    pub boundary_dofs: usize,
    pub method: EigenMethod,
    pub iterations: usize,
    /// Steklov vertex indices, the row order of the boundary traces.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary_vertices: Option<Vec<usize>>,
    /// One B-normalized trace per eigenvalue.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigenvectors_boundary: Option<Vec<Vec<f64>>>,
}

impl SpectralResult {
    /// CSV with one row per boundary vertex: `vertex,sigma_0,sigma_1,...`.
    pub fn write_traces_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let (Some(verts), Some(vecs)) = (&self.boundary_vertices, &self.eigenvectors_boundary) else {
            return invalid("result carries no eigenvectors");
        };
        write!(w, "vertex")?;
        for k in 0..vecs.len() {
            write!(w, ",sigma_{k}")?;
        }
        writeln!(w)?;
        for (row, v) in verts.iter().enumerate() {
            write!(w, "{v}")?;
            for vec in vecs {
                write!(w, ",{:e}", vec[row])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// The Steklov / rest partition of the vertices with local index maps.
pub(crate) struct Partition {
    pub gamma: Vec<usize>,
    pub interior: Vec<usize>,
    pub gamma_local: Vec<Option<usize>>,
    pub interior_local: Vec<Option<usize>>,
}

impl Partition {
    pub fn new(mesh: &EmbeddedMesh) -> Self {
        let nv = mesh.num_vertices();
        let gamma = mesh.steklov_vertices();
        let mut gamma_local = vec![None; nv];
        for (i, &g) in gamma.iter().enumerate() {
            gamma_local[g] = Some(i);
        }
        let interior: Vec<usize> = (0..nv).filter(|&v| gamma_local[v].is_none()).collect();
        let mut interior_local = vec![None; nv];
        for (i, &v) in interior.iter().enumerate() {
            interior_local[v] = Some(i);
        }
        Partition { gamma, interior, gamma_local, interior_local }
    }
}

pub fn solve_steklov(problem: &SpectralProblem) -> Result<SpectralResult> {
    problem.validate()?;
    let ops = assemble(problem.mesh)?;
    solve_with_operators(problem, &ops)
}

pub fn solve_with_operators(problem: &SpectralProblem, ops: &Operators) -> Result<SpectralResult> {
    problem.validate()?;
    let part = Partition::new(problem.mesh);
    let count = problem.num_eigenvalues + 1;
    let method = match problem.method {
        EigenMethod::Auto if part.gamma.len() <= DENSE_BOUNDARY_LIMIT => EigenMethod::Dense,
        EigenMethod::Auto => EigenMethod::Subspace,
        m => m,
    };
    let pairs = match method {
        EigenMethod::Dense => eigen::dense_route(ops, &part, count)?,
        _ => eigen::subspace_route(ops, &part, count, problem.tolerance)?,
    };
    if let Some(&r) = pairs.residuals.iter().find(|r| !(**r <= problem.tolerance)) {
        return Err(Error::NoConvergence { iterations: pairs.iterations, residual: r });
    }
    Ok(SpectralResult {
        eigenvalues: pairs.values,
        residuals: pairs.residuals,
        interior_dofs: part.interior.len(),
        boundary_dofs: part.gamma.len(),
        method,
        iterations: pairs.iterations,
        boundary_vertices: problem.keep_vectors.then(|| part.gamma.clone()),
        eigenvectors_boundary: problem.keep_vectors.then_some(pairs.vectors),
    })
}

/// Discrete harmonic extension of a Steklov-boundary trace to all vertices.
pub fn harmonic_extension(mesh: &EmbeddedMesh, ops: &Operators, trace: &[f64]) -> Result<Vec<f64>> {
    let part = Partition::new(mesh);
    if trace.len() != part.gamma.len() {
        return invalid("trace length differs from the Steklov vertex count");
    }
    let mut full = vec![0.0; mesh.num_vertices()];
    for (i, &g) in part.gamma.iter().enumerate() {
        full[g] = trace[i];
    }
    if part.interior.is_empty() {
        return Ok(full);
    }
    let kii = ops.stiffness.block_triplets(&part.interior, &part.interior_local);
    let chol = SparseCholesky::factor(part.interior.len(), &kii)?;
    let rhs: Vec<f64> = part
        .interior
        .iter()
        .map(|&v| -ops.stiffness.row(v).filter_map(|(j, k)| part.gamma_local[j].map(|g| k * trace[g])).sum::<f64>())
        .collect();
    let x = chol.solve_columns(&rhs, 1);
    for (i, &v) in part.interior.iter().enumerate() {
        full[v] = x[i];
    }
    Ok(full)
}

/// Compares two spectra as sorted multisets: equal lengths and every pair within
/// `atol + rtol * |reference|`.
pub fn spectra_match(computed: &[f64], reference: &[f64], atol: f64, rtol: f64) -> bool {
    if computed.len() != reference.len() {
        return false;
    }
    let mut a = computed.to_vec();
    let mut b = reference.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= atol + rtol * y.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{generate_mesh, BoundaryFace, FamilyDescriptor, FamilyVariant};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn disk(h: f64) -> EmbeddedMesh {
        generate_mesh(&FamilyDescriptor::new(FamilyVariant::BallFlat { n: 2, delta: 1.0 }, h)).unwrap()
    }

    #[test]
    fn triangle_stiffness_annihilates_constants() {
        let v = vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]];
        let faces = [[0, 1], [1, 2], [2, 0]]
            .iter()
            .map(|f| BoundaryFace { indices: f.to_vec(), tag: FaceTag::Steklov })
            .collect();
        let m = EmbeddedMesh::new(3, 2, v, vec![vec![0, 1, 2]], faces).unwrap();
        let ops = assemble(&m).unwrap();
        for s in ops.stiffness.row_sums() {
            assert!(s.abs() < 1e-15);
        }
        assert!(ops.stiffness.asymmetry() < 1e-15);
    }

    #[test]
    fn operators_are_positive_semidefinite() {
        let m = disk(0.2);
        let ops = assemble(&m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let v: Vec<f64> = (0..m.num_vertices()).map(|_| rng.random_range(-1.0..1.0)).collect();
            assert!(ops.stiffness.quadratic_form(&v) >= -1e-12);
            assert!(ops.boundary_mass.quadratic_form(&v) >= 0.0);
        }
    }

    #[test]
    fn two_element_interval() {
        let v = vec![vec![0.0, 0.0], vec![0.5, 0.0], vec![1.0, 0.0]];
        let faces = vec![
            BoundaryFace { indices: vec![0], tag: FaceTag::Steklov },
            BoundaryFace { indices: vec![2], tag: FaceTag::Steklov },
        ];
        let m = EmbeddedMesh::new(2, 1, v, vec![vec![0, 1], vec![1, 2]], faces).unwrap();
        let res = solve_steklov(&SpectralProblem::new(&m, ProblemKind::Steklov, 1)).unwrap();
        assert!(res.eigenvalues[0].abs() < 1e-12);
        assert!((res.eigenvalues[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn disk_spectrum_and_rayleigh_quotients() {
        let m = disk(0.05);
        let ops = assemble(&m).unwrap();
        let res = solve_with_operators(&SpectralProblem::new(&m, ProblemKind::Steklov, 6).with_vectors(true), &ops)
            .unwrap();
        assert!(spectra_match(&res.eigenvalues, &[0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0], 1e-8, 1e-2));
        let ones = vec![1.0; m.num_vertices()];
        assert!(ops.rayleigh_quotient(&ones).unwrap() < 1e-12);
        let x1: Vec<f64> = m.vertices().map(|p| p[0]).collect();
        assert!((ops.rayleigh_quotient(&x1).unwrap() - 1.0).abs() < 1e-2);
        let trace = &res.eigenvectors_boundary.as_ref().unwrap()[1];
        let u = harmonic_extension(&m, &ops, trace).unwrap();
        let q = ops.rayleigh_quotient(&u).unwrap();
        assert!((q - res.eigenvalues[1]).abs() < 1e-9 * q.max(1.0));
    }

    #[test]
    fn subspace_route_agrees_with_dense() {
        let m = disk(0.08);
        let ops = assemble(&m).unwrap();
        let base = SpectralProblem::new(&m, ProblemKind::Steklov, 8).with_tolerance(1e-9);
        let d = solve_with_operators(&base.clone().with_method(EigenMethod::Dense), &ops).unwrap();
        let s = solve_with_operators(&base.with_method(EigenMethod::Subspace), &ops).unwrap();
        for (a, b) in d.eigenvalues.iter().zip(&s.eigenvalues) {
            assert!((a - b).abs() < 1e-7 * a.max(1.0), "{a} vs {b}");
        }
        assert_eq!(s.method, EigenMethod::Subspace);
    }

    #[test]
    fn zero_trace_is_rejected() {
        let m = disk(0.2);
        let boundary = m.steklov_vertices();
        let v: Vec<f64> = (0..m.num_vertices()).map(|i| if boundary.contains(&i) { 0.0 } else { 1.0 }).collect();
        assert!(matches!(rayleigh_quotient(&m, &v), Err(Error::VanishingBoundaryTrace)));
    }

    #[test]
    fn kmax_must_fit_the_boundary() {
        let m = disk(0.3);
        let nb = m.steklov_vertices().len();
        assert!(solve_steklov(&SpectralProblem::new(&m, ProblemKind::Steklov, nb)).is_err());
    }

    #[test]
    fn traces_csv_has_header_and_rows() {
        let m = disk(0.3);
        let res = solve_steklov(&SpectralProblem::new(&m, ProblemKind::Steklov, 2).with_vectors(true)).unwrap();
        let mut out = Vec::new();
        res.write_traces_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("vertex,sigma_0,sigma_1,sigma_2\n"));
        assert_eq!(text.lines().count(), 1 + res.boundary_dofs);
    }
}
