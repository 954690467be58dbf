use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{EmbeddedMesh, FaceTag, FamilyDescriptor, FamilyVariant};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricSummary {
    pub intrinsic_dim: usize,
    pub volume_m: f64,
    /// Steklov boundary volume; for a closed mesh, the mesh itself plays the role of the boundary.
    pub volume_sigma: f64,
    pub injectivity_radius_sigma: Option<f64>,
    /// `|Sigma| / |M|^((n-1)/n)`, absent for closed meshes.
    pub isoperimetric_ratio: Option<f64>,
    pub boundary_components: usize,
}

/// Analytic injectivity radius of the Steklov boundary of a family.
pub fn family_injectivity_radius(variant: &FamilyVariant) -> Option<f64> {
    match *variant {
        FamilyVariant::SphereBoundary { eps, .. } => Some(PI * eps),
        FamilyVariant::ProductAnnulusCircle { eps, circle_radius, .. } => Some(PI * eps.min(circle_radius)),
        FamilyVariant::CylinderSurface { radius, .. } => Some(PI * radius),
        FamilyVariant::AnnulusFlat { eps, .. } | FamilyVariant::RevolutionClosure { eps, .. } => Some(PI * eps),
        FamilyVariant::BallFlat { delta, .. } => Some(PI * delta),
        FamilyVariant::Torus { .. } => None,
    }
}

pub fn geometric_summary(mesh: &EmbeddedMesh, desc: Option<&FamilyDescriptor>) -> GeometricSummary {
    let n = mesh.intrinsic_dim();
    let volume_m = mesh.volume();
    let closed = mesh.boundary_faces().is_empty();
    let volume_sigma = if closed { volume_m } else { mesh.boundary_volume(FaceTag::Steklov) };
    let isoperimetric_ratio =
        (!closed).then(|| volume_sigma / volume_m.powf((n as f64 - 1.0) / n as f64));
    GeometricSummary {
        intrinsic_dim: n,
        volume_m,
        volume_sigma,
        injectivity_radius_sigma: desc.and_then(|d| family_injectivity_radius(&d.variant)),
        isoperimetric_ratio,
        boundary_components: mesh.boundary_components(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{families::unit_boundary_circle_radius, generate_mesh};

    #[test]
    fn unit_disk_summary() {
        let d = FamilyDescriptor::new(FamilyVariant::BallFlat { n: 2, delta: 1.0 }, 0.02);
        let m = generate_mesh(&d).unwrap();
        let s = geometric_summary(&m, None);
        assert!((s.volume_m - PI).abs() < 2e-3);
        assert!((s.volume_sigma - 2.0 * PI).abs() < 2e-3);
        let iso = s.isoperimetric_ratio.unwrap();
        assert!((iso - 2.0 * PI / PI.sqrt()).abs() < 2e-3);
        assert!(s.injectivity_radius_sigma.is_none());
    }

    #[test]
    fn product_injectivity_radius() {
        let v = FamilyVariant::ProductAnnulusCircle { n: 2, eps: 0.1, delta: 1.0, circle_radius: 1.0 };
        assert!((family_injectivity_radius(&v).unwrap() - 0.1 * PI).abs() < 1e-15);
        let r = unit_boundary_circle_radius(3, 0.7);
        let v = FamilyVariant::ProductAnnulusCircle { n: 3, eps: 0.7, delta: 1.0, circle_radius: r };
        assert!((FamilyDescriptor::new(v, 0.1).exact_steklov_volume() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn closed_sphere_summary() {
        let d = FamilyDescriptor::new(FamilyVariant::SphereBoundary { n: 2, eps: 2.0 }, 0.05);
        let s = geometric_summary(&generate_mesh(&d).unwrap(), Some(&d));
        assert!((s.injectivity_radius_sigma.unwrap() - 2.0 * PI).abs() < 1e-15);
        assert!(s.isoperimetric_ratio.is_none());
        assert_eq!(s.boundary_components, 0);
    }
}
