//! Embedded simplicial meshes in `R^m`, family generators and geometric summaries.

mod families;
mod summary;

pub use families::{generate_mesh, unit_boundary_circle_radius, FamilyDescriptor, FamilyVariant};
pub use summary::{family_injectivity_radius, geometric_summary, GeometricSummary};

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Current version of the mesh document schema.
pub const MESH_DOCUMENT_VERSION: u32 = 1;

/// Relative volume threshold below which a simplex counts as degenerate.
const DEGENERACY_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FaceTag {
    Steklov,
    Neumann,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFace {
    pub indices: Vec<usize>,
    pub tag: FaceTag,
}

/// The on-disk form of an [`EmbeddedMesh`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeshDocument {
    pub version: u32,
    pub ambient_dim: usize,
    pub intrinsic_dim: usize,
    pub vertices: Vec<Vec<f64>>,
    pub cells: Vec<Vec<usize>>,
    pub boundary_faces: Vec<BoundaryFace>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, Vec<f64>>,
}

/// A simplicial `n`-dimensional mesh with vertices in `R^m` and tagged boundary faces.
///
/// Construction validates the mesh: valid indices, non-degenerate cells, every
/// boundary face a facet of exactly one cell and every interior facet shared by
/// exactly two. Meshes are immutable afterwards.
#[derive(Debug, Clone)]
pub struct EmbeddedMesh {
    ambient_dim: usize,
    intrinsic_dim: usize,
    coords: Vec<f64>,
    cells: Vec<usize>,
    boundary_faces: Vec<BoundaryFace>,
    metadata: BTreeMap<String, Vec<f64>>,
}

/// `n`-dimensional volume of the simplex spanned by `points` (n = points.len() - 1),
/// from the Gram determinant of its edge vectors. Zero iff degenerate.
pub fn simplex_volume(points: &[&[f64]]) -> f64 {
    assert!(!points.is_empty(), "a simplex needs at least one vertex");
    let n = points.len() - 1;
    if n == 0 {
        return 1.0;
    }
    let m = points[0].len();
    assert!(n <= m, "simplex dimension exceeds ambient dimension");
    let edges = DMatrix::from_fn(m, n, |r, c| points[c + 1][r] - points[0][r]);
    let gram = edges.transpose() * &edges;
    let det = gram.determinant().max(0.0);
    det.sqrt() / factorial(n)
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

fn sorted(face: &[usize]) -> Vec<usize> {
    let mut f = face.to_vec();
    f.sort_unstable();
    f
}

impl EmbeddedMesh {
    pub fn new(
        ambient_dim: usize,
        intrinsic_dim: usize,
        vertices: Vec<Vec<f64>>,
        cells: Vec<Vec<usize>>,
        boundary_faces: Vec<BoundaryFace>,
    ) -> Result<Self> {
        if ambient_dim < 2 {
            return Err(Error::InvalidMesh(format!("ambient dimension {ambient_dim} < 2")));
        }
        if intrinsic_dim < 1 || intrinsic_dim > ambient_dim {
            return Err(Error::InvalidMesh(format!(
                "intrinsic dimension {intrinsic_dim} not in 1..={ambient_dim}"
            )));
        }
        let mut coords = Vec::with_capacity(vertices.len() * ambient_dim);
        for (i, v) in vertices.iter().enumerate() {
            if v.len() != ambient_dim {
                return Err(Error::InvalidMesh(format!(
                    "vertex {i} has {} coordinates, expected {ambient_dim}",
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidMesh(format!("vertex {i} has a non-finite coordinate")));
            }
            coords.extend_from_slice(v);
        }
        let mut flat_cells = Vec::with_capacity(cells.len() * (intrinsic_dim + 1));
        for (c, cell) in cells.iter().enumerate() {
            if cell.len() != intrinsic_dim + 1 {
                return Err(Error::InvalidMesh(format!(
                    "cell {c} has {} vertices, expected {}",
                    cell.len(),
                    intrinsic_dim + 1
                )));
            }
            flat_cells.extend_from_slice(cell);
        }
        let mesh = EmbeddedMesh {
            ambient_dim,
            intrinsic_dim,
            coords,
            cells: flat_cells,
            boundary_faces,
            metadata: BTreeMap::new(),
        };
        mesh.validate()?;
        Ok(mesh)
    }

    fn validate(&self) -> Result<()> {
        let nv = self.num_vertices();
        let n = self.intrinsic_dim;
        if self.cells.is_empty() {
            return Err(Error::InvalidMesh("mesh has no cells".into()));
        }
        for (c, cell) in self.cells().enumerate() {
            if let Some(&bad) = cell.iter().find(|&&i| i >= nv) {
                return Err(Error::InvalidMesh(format!("cell {c} references vertex {bad} of {nv}")));
            }
            let mut s = cell.to_vec();
            s.sort_unstable();
            s.dedup();
            if s.len() != cell.len() {
                return Err(Error::InvalidMesh(format!("cell {c} repeats a vertex")));
            }
            let vol = self.cell_volume(c);
            let scale = self.max_edge(cell).powi(n as i32);
            if !(vol > DEGENERACY_RTOL * scale) {
                return Err(Error::DegenerateCell { cell: c, volume: vol });
            }
        }
        let counts = self.facet_counts();
        if let Some((f, k)) = counts.iter().find(|(_, &k)| k > 2) {
            return Err(Error::InvalidMesh(format!("facet {f:?} is shared by {k} cells")));
        }
        let mut tagged: HashMap<Vec<usize>, usize> = HashMap::new();
        for (i, face) in self.boundary_faces.iter().enumerate() {
            if face.indices.len() != n {
                return Err(Error::InvalidMesh(format!(
                    "boundary face {i} has {} vertices, expected {n}",
                    face.indices.len()
                )));
            }
            let key = sorted(&face.indices);
            match counts.get(&key) {
                Some(1) => {}
                Some(_) => {
                    return Err(Error::InvalidMesh(format!(
                        "boundary face {i} {key:?} is an interior facet"
                    )))
                }
                None => {
                    return Err(Error::InvalidMesh(format!(
                        "boundary face {i} {key:?} is not a facet of any cell"
                    )))
                }
            }
            if tagged.insert(key.clone(), i).is_some() {
                return Err(Error::InvalidMesh(format!("boundary face {key:?} listed twice")));
            }
        }
        if let Some((f, _)) = counts.iter().find(|(f, &k)| k == 1 && !tagged.contains_key(*f)) {
            return Err(Error::InvalidMesh(format!("boundary facet {f:?} carries no tag")));
        }
        Ok(())
    }

    /// Number of cells containing each (sorted) facet.
    fn facet_counts(&self) -> HashMap<Vec<usize>, usize> {
        let mut counts = HashMap::with_capacity(self.num_cells() * 2);
        for cell in self.cells() {
            for skip in 0..cell.len() {
                let mut f: Vec<usize> = (0..cell.len()).filter(|&j| j != skip).map(|j| cell[j]).collect();
                f.sort_unstable();
                *counts.entry(f).or_insert(0) += 1;
            }
        }
        counts
    }

    fn max_edge(&self, idx: &[usize]) -> f64 {
        let mut best = 0.0_f64;
        for a in 0..idx.len() {
            for b in a + 1..idx.len() {
                best = best.max(dist(self.vertex(idx[a]), self.vertex(idx[b])));
            }
        }
        best
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.intrinsic_dim
    }

    pub fn num_vertices(&self) -> usize {
        self.coords.len() / self.ambient_dim
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len() / (self.intrinsic_dim + 1)
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.coords[i * self.ambient_dim..(i + 1) * self.ambient_dim]
    }

    pub fn vertices(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.ambient_dim)
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        let k = self.intrinsic_dim + 1;
        &self.cells[c * k..(c + 1) * k]
    }

    pub fn cells(&self) -> impl Iterator<Item = &[usize]> {
        self.cells.chunks_exact(self.intrinsic_dim + 1)
    }

    pub fn boundary_faces(&self) -> &[BoundaryFace] {
        &self.boundary_faces
    }

    pub fn metadata(&self) -> &BTreeMap<String, Vec<f64>> {
        &self.metadata
    }

    pub fn with_metadata(mut self, key: impl Into<String>, values: Vec<f64>) -> Self {
        self.metadata.insert(key.into(), values);
        self
    }

    pub fn cell_volume(&self, c: usize) -> f64 {
        let pts: Vec<&[f64]> = self.cell(c).iter().map(|&i| self.vertex(i)).collect();
        simplex_volume(&pts)
    }

    pub fn face_volume(&self, face: &BoundaryFace) -> f64 {
        let pts: Vec<&[f64]> = face.indices.iter().map(|&i| self.vertex(i)).collect();
        simplex_volume(&pts)
    }

    /// Total `n`-dimensional volume.
    pub fn volume(&self) -> f64 {
        (0..self.num_cells()).map(|c| self.cell_volume(c)).sum()
    }

    /// Total `(n-1)`-dimensional volume of the faces carrying `tag`.
    pub fn boundary_volume(&self, tag: FaceTag) -> f64 {
        self.boundary_faces
            .iter()
            .filter(|f| f.tag == tag)
            .map(|f| self.face_volume(f))
            .sum()
    }

    pub fn has_steklov(&self) -> bool {
        self.boundary_faces.iter().any(|f| f.tag == FaceTag::Steklov)
    }

    /// Sorted vertex indices touched by faces carrying `tag`.
    pub fn tagged_vertices(&self, tag: FaceTag) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .boundary_faces
            .iter()
            .filter(|f| f.tag == tag)
            .flat_map(|f| f.indices.iter().copied())
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn steklov_vertices(&self) -> Vec<usize> {
        self.tagged_vertices(FaceTag::Steklov)
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let m = self.ambient_dim;
        let mut lo = vec![f64::INFINITY; m];
        let mut hi = vec![f64::NEG_INFINITY; m];
        for v in self.vertices() {
            for d in 0..m {
                lo[d] = lo[d].min(v[d]);
                hi[d] = hi[d].max(v[d]);
            }
        }
        (lo, hi)
    }

    /// Longest edge over all cells.
    pub fn max_cell_edge(&self) -> f64 {
        self.cells().map(|c| self.max_edge(c)).fold(0.0, f64::max)
    }

    /// Number of connected components of the boundary (faces linked through shared
    /// `(n-2)`-subfaces). For `n = 1` every boundary vertex is its own component.
    pub fn boundary_components(&self) -> usize {
        let faces = &self.boundary_faces;
        if faces.is_empty() {
            return 0;
        }
        let mut parent: Vec<usize> = (0..faces.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        if self.intrinsic_dim >= 2 {
            let mut owner: HashMap<Vec<usize>, usize> = HashMap::new();
            for (i, f) in faces.iter().enumerate() {
                for skip in 0..f.indices.len() {
                    let mut sub: Vec<usize> = f
                        .indices
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != skip)
                        .map(|(_, &v)| v)
                        .collect();
                    sub.sort_unstable();
                    match owner.get(&sub) {
                        Some(&j) => {
                            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                            parent[a] = b;
                        }
                        None => {
                            owner.insert(sub, i);
                        }
                    }
                }
            }
        }
        (0..faces.len()).filter(|&i| find(&mut parent, i) == i).count()
    }

    /// Whether every `(n-2)`-face of the boundary occurs an even number of times.
    pub fn boundary_of_boundary_is_empty(&self) -> bool {
        if self.intrinsic_dim < 2 {
            return true;
        }
        let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
        for f in &self.boundary_faces {
            for skip in 0..f.indices.len() {
                let mut sub: Vec<usize> = f
                    .indices
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != skip)
                    .map(|(_, &v)| v)
                    .collect();
                sub.sort_unstable();
                *counts.entry(sub).or_insert(0) += 1;
            }
        }
        counts.values().all(|k| k % 2 == 0)
    }

    /// Applies `map` to every vertex (which may change the ambient dimension) and
    /// revalidates.
    pub fn map_vertices<F>(&self, map: F) -> Result<EmbeddedMesh>
    where
        F: Fn(&[f64]) -> Vec<f64>,
    {
        let vertices: Vec<Vec<f64>> = self.vertices().map(map).collect();
        let m = vertices.first().map_or(self.ambient_dim, Vec::len);
        let mut out = EmbeddedMesh::new(
            m,
            self.intrinsic_dim,
            vertices,
            self.cells().map(<[usize]>::to_vec).collect(),
            self.boundary_faces.clone(),
        )?;
        out.metadata = self.metadata.clone();
        Ok(out)
    }

    /// Homothety `x -> t x`.
    pub fn scaled(&self, t: f64) -> Result<EmbeddedMesh> {
        self.map_vertices(|p| p.iter().map(|x| x * t).collect())
    }

    /// Same mesh with boundary tags reassigned by `retag(face_index, face)`.
    pub fn retagged<F>(&self, retag: F) -> Result<EmbeddedMesh>
    where
        F: Fn(usize, &BoundaryFace) -> FaceTag,
    {
        let faces = self
            .boundary_faces
            .iter()
            .enumerate()
            .map(|(i, f)| BoundaryFace { indices: f.indices.clone(), tag: retag(i, f) })
            .collect();
        let out = EmbeddedMesh {
            ambient_dim: self.ambient_dim,
            intrinsic_dim: self.intrinsic_dim,
            coords: self.coords.clone(),
            cells: self.cells.clone(),
            boundary_faces: faces,
            metadata: self.metadata.clone(),
        };
        out.validate()?;
        Ok(out)
    }

    /// Sub-mesh made of the cells with `keep[c] == true`. Original boundary faces
    /// keep their tags; facets exposed by the removal are tagged `cut_tag`. Unused
    /// vertices are dropped and the rest renumbered in their original order.
    pub fn restrict_cells(&self, keep: &[bool], cut_tag: FaceTag) -> Result<EmbeddedMesh> {
        if keep.len() != self.num_cells() {
            return Err(Error::InvalidParameter("keep mask length differs from cell count".into()));
        }
        let original: HashMap<Vec<usize>, FaceTag> = self
            .boundary_faces
            .iter()
            .map(|f| (sorted(&f.indices), f.tag))
            .collect();
        let mut counts: HashMap<Vec<usize>, (usize, Vec<usize>)> = HashMap::new();
        let mut used = vec![false; self.num_vertices()];
        for (c, cell) in self.cells().enumerate() {
            if !keep[c] {
                continue;
            }
            for &v in cell {
                used[v] = true;
            }
            for skip in 0..cell.len() {
                let f: Vec<usize> = (0..cell.len()).filter(|&j| j != skip).map(|j| cell[j]).collect();
                let e = counts.entry(sorted(&f)).or_insert((0, f));
                e.0 += 1;
            }
        }
        let mut renumber = vec![usize::MAX; self.num_vertices()];
        let mut vertices = Vec::new();
        for (i, &u) in used.iter().enumerate() {
            if u {
                renumber[i] = vertices.len();
                vertices.push(self.vertex(i).to_vec());
            }
        }
        let cells = self
            .cells()
            .enumerate()
            .filter(|(c, _)| keep[*c])
            .map(|(_, cell)| cell.iter().map(|&v| renumber[v]).collect())
            .collect();
        let mut faces: Vec<(Vec<usize>, BoundaryFace)> = counts
            .into_iter()
            .filter(|(_, (k, _))| *k == 1)
            .map(|(key, (_, f))| {
                let tag = original.get(&key).copied().unwrap_or(cut_tag);
                let indices = f.iter().map(|&v| renumber[v]).collect();
                (key, BoundaryFace { indices, tag })
            })
            .collect();
        faces.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out = EmbeddedMesh::new(
            self.ambient_dim,
            self.intrinsic_dim,
            vertices,
            cells,
            faces.into_iter().map(|(_, f)| f).collect(),
        )?;
        out.metadata = self.metadata.clone();
        Ok(out)
    }

    pub fn to_document(&self) -> MeshDocument {
        MeshDocument {
            version: MESH_DOCUMENT_VERSION,
            ambient_dim: self.ambient_dim,
            intrinsic_dim: self.intrinsic_dim,
            vertices: self.vertices().map(<[f64]>::to_vec).collect(),
            cells: self.cells().map(<[usize]>::to_vec).collect(),
            boundary_faces: self.boundary_faces.clone(),
            metadata: self.metadata.clone(),
        }
    }

    pub fn from_document(doc: MeshDocument) -> Result<Self> {
        if doc.version != MESH_DOCUMENT_VERSION {
            return Err(Error::InvalidMesh(format!(
                "unsupported mesh document version {} (expected {MESH_DOCUMENT_VERSION})",
                doc.version
            )));
        }
        let mut mesh = EmbeddedMesh::new(
            doc.ambient_dim,
            doc.intrinsic_dim,
            doc.vertices,
            doc.cells,
            doc.boundary_faces,
        )?;
        mesh.metadata = doc.metadata;
        Ok(mesh)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_document())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_document(serde_json::from_str(text)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_triangles() -> EmbeddedMesh {
        let v = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]];
        let cells = vec![vec![0, 1, 2], vec![0, 2, 3]];
        let faces = [[0, 1], [1, 2], [2, 3], [3, 0]]
            .iter()
            .map(|f| BoundaryFace { indices: f.to_vec(), tag: FaceTag::Steklov })
            .collect();
        EmbeddedMesh::new(2, 2, v, cells, faces).unwrap()
    }

    /// Cayley-Menger determinant for a tetrahedron with all edges of length `a`.
    fn cayley_menger_tet_volume(d2: [[f64; 4]; 4]) -> f64 {
        let mut cm = DMatrix::zeros(5, 5);
        for i in 0..5 {
            for j in 0..5 {
                cm[(i, j)] = if i == j {
                    0.0
                } else if i == 0 || j == 0 {
                    1.0
                } else {
                    d2[i - 1][j - 1]
                };
            }
        }
        (cm.determinant() / 288.0).sqrt()
    }

    #[test]
    fn simplex_volume_examples() {
        let tri: [&[f64]; 3] = [&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]];
        assert!((simplex_volume(&tri) - 0.5).abs() < 1e-15);
        let seg: [&[f64]; 2] = [&[0.0, 0.0], &[3.0, 4.0]];
        assert!((simplex_volume(&seg) - 5.0).abs() < 1e-15);

        let s = 1.0 / 3f64.sqrt();
        let h = (2.0f64 / 3.0).sqrt();
        let p: [[f64; 3]; 4] =
            [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, 3f64.sqrt() / 2.0, 0.0], [0.5, s / 2.0, h]];
        let mut d2 = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                d2[i][j] = (0..3).map(|k| (p[i][k] - p[j][k]).powi(2)).sum();
            }
        }
        let oracle = cayley_menger_tet_volume(d2);
        assert!((oracle - 2f64.sqrt() / 12.0).abs() < 1e-12);
        let pts: Vec<&[f64]> = p.iter().map(|q| &q[..]).collect();
        assert!((simplex_volume(&pts) - oracle).abs() < 1e-12);
    }

    #[test]
    fn degenerate_simplex_has_zero_volume() {
        let tri: [&[f64]; 3] = [&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0]];
        assert!(simplex_volume(&tri) < 1e-14);
    }

    #[test]
    fn rejects_degenerate_cell() {
        let v = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]];
        let faces = [[0, 1], [1, 2], [0, 2]]
            .iter()
            .map(|f| BoundaryFace { indices: f.to_vec(), tag: FaceTag::Steklov })
            .collect();
        let err = EmbeddedMesh::new(2, 2, v, vec![vec![0, 1, 2]], faces).unwrap_err();
        assert!(matches!(err, Error::DegenerateCell { cell: 0, .. }));
    }

    #[test]
    fn rejects_untagged_or_interior_faces() {
        let v = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]];
        let cells = vec![vec![0, 1, 2], vec![0, 2, 3]];
        let mk = |fs: &[[usize; 2]]| -> Vec<BoundaryFace> {
            fs.iter().map(|f| BoundaryFace { indices: f.to_vec(), tag: FaceTag::Steklov }).collect()
        };
        assert!(EmbeddedMesh::new(2, 2, v.clone(), cells.clone(), mk(&[[0, 1], [1, 2], [2, 3]])).is_err());
        assert!(EmbeddedMesh::new(
            2,
            2,
            v.clone(),
            cells.clone(),
            mk(&[[0, 1], [1, 2], [2, 3], [3, 0], [0, 2]])
        )
        .is_err());
        assert!(EmbeddedMesh::new(2, 2, v, vec![vec![0, 1, 7]], mk(&[])).is_err());
    }

    #[test]
    fn totals_and_components() {
        let m = two_triangles();
        assert!((m.volume() - 1.0).abs() < 1e-15);
        assert!((m.boundary_volume(FaceTag::Steklov) - 4.0).abs() < 1e-15);
        assert_eq!(m.boundary_components(), 1);
        assert!(m.boundary_of_boundary_is_empty());
        assert_eq!(m.steklov_vertices(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn document_round_trip_preserves_bits() {
        let m = two_triangles().map_vertices(|p| vec![p[0] * 0.1 + 1e-17, p[1] / 3.0]).unwrap();
        let back = EmbeddedMesh::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(m.coords, back.coords);
        assert_eq!(m.cells, back.cells);
        assert_eq!(m.boundary_faces, back.boundary_faces);
    }

    #[test]
    fn document_version_is_checked() {
        let mut doc = two_triangles().to_document();
        doc.version = 99;
        assert!(EmbeddedMesh::from_document(doc).is_err());
    }

    #[test]
    fn restriction_tags_cut_faces() {
        let m = two_triangles();
        let sub = m.restrict_cells(&[true, false], FaceTag::Neumann).unwrap();
        assert_eq!(sub.num_vertices(), 3);
        assert_eq!(sub.num_cells(), 1);
        let neumann: Vec<_> = sub.boundary_faces().iter().filter(|f| f.tag == FaceTag::Neumann).collect();
        assert_eq!(neumann.len(), 1);
        assert!((sub.boundary_volume(FaceTag::Neumann) - 2f64.sqrt()).abs() < 1e-15);
    }
}
