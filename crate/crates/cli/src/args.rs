use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use steklov_core::geometry::FamilyVariant;
use steklov_core::spectral::{EigenMethod, ProblemKind};

#[derive(Debug, Parser, Serialize)]
#[command(name = "steklab", version, about = "Steklov eigenvalues, intersection indices and explicit upper bounds")]
pub struct Cli {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,

    /// Thread partition for sampling stages.
    #[arg(long, global = true, env = "STEKLAB_THREADS", default_value_t = 1)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Generate a family mesh and summarize its geometry.
    Mesh(MeshArgs),
    /// Finite-element Steklov spectrum of a mesh file.
    Spectrum(SpectrumArgs),
    /// Closed-form and one-dimensional reference values.
    Oracle {
        #[command(subcommand)]
        oracle: OracleCommand,
    },
    /// Random-plane estimate of the intersection index.
    Index(IndexArgs),
    /// Packing certificate for sigma_k.
    Certify(CertifyArgs),
    /// Evaluate the explicit upper bounds.
    Bounds(BoundsArgs),
    /// Table-producing experiments.
    Experiment {
        #[command(subcommand)]
        experiment: ExperimentCommand,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Ball,
    Annulus,
    Cylinder,
    Product,
    RevolutionClosure,
    Sphere,
    Torus,
}

#[derive(Debug, Args, Serialize)]
pub struct FamilyArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    /// Cylinder radius.
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Cylinder length.
    #[arg(long = "L", default_value_t = 1.0)]
    pub length: f64,
    /// Radius of the circle factor of a product.
    #[arg(long, default_value_t = 1.0)]
    pub circle_radius: f64,
    #[arg(long, default_value_t = 1.0)]
    pub major: f64,
    #[arg(long, default_value_t = 0.4)]
    pub minor: f64,
    /// Target edge length.
    #[arg(long, default_value_t = 0.05)]
    pub h: f64,
}

impl FamilyArgs {
    pub fn variant(&self) -> FamilyVariant {
        let (n, eps, delta) = (self.n, self.eps, self.delta);
        match self.family {
            Family::Ball => FamilyVariant::BallFlat { n, delta },
            Family::Annulus => FamilyVariant::AnnulusFlat { n, eps, delta },
            Family::Cylinder => FamilyVariant::CylinderSurface { radius: self.radius, length: self.length },
            Family::Product => FamilyVariant::ProductAnnulusCircle { n, eps, delta, circle_radius: self.circle_radius },
            Family::RevolutionClosure => FamilyVariant::RevolutionClosure { n, eps, delta },
            Family::Sphere => FamilyVariant::SphereBoundary { n, eps },
            Family::Torus => FamilyVariant::Torus { major: self.major, minor: self.minor },
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct MeshArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Mesh document to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KindArg {
    Steklov,
    SteklovNeumann,
}

impl From<KindArg> for ProblemKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Steklov => ProblemKind::Steklov,
            KindArg::SteklovNeumann => ProblemKind::SteklovNeumann,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Auto,
    Dense,
    Subspace,
}

impl From<MethodArg> for EigenMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Auto => EigenMethod::Auto,
            MethodArg::Dense => EigenMethod::Dense,
            MethodArg::Subspace => EigenMethod::Subspace,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long, value_enum, default_value_t = KindArg::Steklov)]
    pub kind: KindArg,
    #[arg(long = "kmax", default_value_t = 6)]
    pub k_max: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
    /// CSV of boundary traces, one row per Steklov vertex.
    #[arg(long)]
    pub traces: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleCommand {
    /// Mixed eigenvalue of the annulus for a sphere harmonic of degree `mode`.
    AnnulusSn {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 1)]
        mode: usize,
    },
    /// Steklov spectrum of `S^{n-1}_radius x [0, L]`.
    Cylinder {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long = "L")]
        length: f64,
        #[arg(long, default_value_t = 6)]
        count: usize,
    },
    /// Constant of the mixed-eigenvalue lower bound on the blown-up products.
    BlowupConstant {
        #[arg(long)]
        n: usize,
    },
    /// Separated-mode mixed eigenvalue from the radial solver.
    SeparatedMode {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        delta: f64,
        /// Sphere eigenvalue of the mode.
        #[arg(long)]
        mu: f64,
        /// Circle eigenvalue of the mode.
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        #[arg(long, default_value_t = 2000)]
        radial_resolution: usize,
    },
}

#[derive(Debug, Args, Serialize)]
pub struct IndexArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub hill_climb: bool,
    #[arg(long, default_value_t = 200)]
    pub hill_climb_rounds: usize,
    /// Degrees of the defining polynomials of one piece, comma separated. Repeat for
    /// further pieces.
    #[arg(long)]
    pub degrees: Vec<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct ConstantsArgs {
    /// Use the ambient covering constant `32^m`.
    #[arg(long, alias = "paper-constants", conflicts_with = "c_cover")]
    pub ambient_constants: bool,
    /// Fixed covering constant. Without either flag it is measured on the mesh, or set
    /// to `32^m` when no mesh is given.
    #[arg(long)]
    pub c_cover: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub d_n: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct CertifyArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Intersection index of the Steklov boundary.
    #[arg(long, default_value_t = 2.0)]
    pub i_sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub constants: ConstantsArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    All,
    Volume,
    Injectivity,
    Isoperimetric,
}

#[derive(Debug, Args, Serialize)]
pub struct BoundsArgs {
    /// Read dimensions and volumes from a mesh document.
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    /// Read i(M) from an index report.
    #[arg(long)]
    pub index: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub volume_m: Option<f64>,
    #[arg(long)]
    pub volume_sigma: Option<f64>,
    #[arg(long)]
    pub i_m: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    pub i_sigma: f64,
    /// Injectivity radius of the Steklov boundary.
    #[arg(long)]
    pub r0: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = BoundKind::All)]
    pub bound: BoundKind,
    /// Computed sigma_k to check against the bounds.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Compute sigma_k on the mesh.
    #[arg(long, requires = "mesh", conflicts_with = "sigma")]
    pub compute: bool,
    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
    /// Confirm that the isoperimetric form is the volume bound rescaled.
    #[arg(long)]
    pub check_corollary: bool,
    #[command(flatten)]
    pub constants: ConstantsArgs,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentCommand {
    /// Power-law fit of a mesh spectrum.
    Asymptotics {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long, default_value_t = 20)]
        k_lo: usize,
        #[arg(long, default_value_t = 60)]
        k_hi: usize,
        #[arg(long, value_enum, default_value_t = KindArg::Steklov)]
        kind: KindArg,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Mode minima on the blown-up annulus products.
    Blowup {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.4, 0.2, 0.1])]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 12)]
        max_degree: usize,
        #[arg(long, default_value_t = 12)]
        max_circle_mode: usize,
        #[arg(long, default_value_t = 2000)]
        radial_resolution: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Growth of sigma_2k on the long-cylinder sequence.
    Obstruction {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        /// Defaults to `1 + beta`.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 10)]
        kmin: usize,
        #[arg(long, default_value_t = 200)]
        kmax: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}
