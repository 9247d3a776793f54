use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use spectral_lattice::eigensolve::DEFAULT_TOL;
use spectral_lattice::geometry::ShapeSpec;
use spectral_lattice::harness::{self, Algorithm, AnalyticRequest, InputSource, PipelineParams};

#[derive(Parser)]
#[command(name = "spectral-lattice", version, about = "Laplace-Beltrami spectra of point clouds and meshes")]
struct Cli {
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated test surface as a point cloud (and mesh).
    Generate {
        #[arg(long)]
        shape: String,
        #[arg(long)]
        density: u32,
        /// Cloud file, .xyz or .ply.
        #[arg(long)]
        out: PathBuf,
        /// Mesh file, .off or .obj.
        #[arg(long)]
        mesh_out: Option<PathBuf>,
    },
    /// Build the lattice shell and report its statistics.
    Voxelize {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value = "cloud-lattice")]
        algorithm: AlgorithmArg,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        n: u32,
        /// Lattice sites as ply-ascii.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        adjacency_out: Option<PathBuf>,
    },
    /// Smallest nonzero Laplace-Beltrami eigenvalues.
    Eigs {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        solve: SolveArgs,
        #[arg(long, default_value_t = 0.05)]
        r: f64,
        #[arg(long, default_value_t = 40)]
        n: u32,
        /// JSON report; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory for one ply-ascii scalar field per eigenvector.
        #[arg(long)]
        export_eigenfunctions: Option<PathBuf>,
        /// Matrix Market dump of the stiffness matrix.
        #[arg(long)]
        matrix_out: Option<PathBuf>,
    },
    /// Convergence study over a grid of (r, n) cells.
    Sweep {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        solve: SolveArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        r: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u32>,
        /// Run cells concurrently.
        #[arg(long)]
        parallel: bool,
        /// CSV destination; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form spectrum of the unit sphere or the cone.
    Analytic {
        shape: AnalyticShape,
        /// Number of sphere eigenvalues.
        #[arg(long, default_value_t = 10)]
        k: usize,
        /// Cone slope.
        #[arg(long, default_value_t = 1.0)]
        h: f64,
        /// Largest cone eigenvalue magnitude.
        #[arg(long, default_value_t = 102.01)]
        cutoff: f64,
        /// Largest Bessel index for the cone.
        #[arg(long, default_value_t = 9)]
        n_max: u32,
        #[arg(long)]
        positive: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pair computed eigenvalues with analytic ones and report relative errors.
    Compare {
        /// eigs JSON report or spectrum CSV.
        #[arg(long)]
        computed: PathBuf,
        /// Spectrum CSV as written by `analytic`.
        #[arg(long)]
        analytic: PathBuf,
        /// Grouping tolerance for the multiplicity column.
        #[arg(long, default_value_t = harness::DEFAULT_GROUP_RELTOL)]
        reltol: f64,
        /// Exit with status 2 when any relative error exceeds this.
        #[arg(long)]
        gate: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct InputArgs {
    /// Generated surface: sphere, ellipsoid[:a,b,c], cone[:h], cube,
    /// tetrahedron3, tetrahedron4, torus[:R,rho], icosphere.
    #[arg(long, conflicts_with_all = ["cloud", "mesh"], requires = "density")]
    shape: Option<String>,
    #[arg(long)]
    density: Option<u32>,
    /// Point cloud file (.xyz, .ply).
    #[arg(long, conflicts_with = "mesh")]
    cloud: Option<PathBuf>,
    /// Triangle mesh file (.off, .obj).
    #[arg(long)]
    mesh: Option<PathBuf>,
}

impl InputArgs {
    fn source(&self) -> anyhow::Result<InputSource> {
        if let Some(s) = &self.shape {
            let kind = harness::parse_shape_kind(s)?;
            let density = self.density.context("--density is required with --shape")?;
            return Ok(InputSource::Shape(ShapeSpec::new(kind, density)?));
        }
        if let Some(p) = &self.cloud {
            return Ok(InputSource::Cloud(p.clone()));
        }
        if let Some(p) = &self.mesh {
            return Ok(InputSource::Mesh(p.clone()));
        }
        bail!("one of --shape, --cloud or --mesh is required")
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, default_value = "cloud-lattice")]
    algorithm: AlgorithmArg,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Seed of the eigensolver's starting block.
    #[arg(long, default_value_t = 0x5eed)]
    seed: u64,
    /// Report eigenvalue magnitudes instead of negative values.
    #[arg(long)]
    positive: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    MeshCotangent,
    MeshLattice,
    CloudLattice,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::MeshCotangent => Algorithm::MeshCotangent,
            AlgorithmArg::MeshLattice => Algorithm::MeshLattice,
            AlgorithmArg::CloudLattice => Algorithm::CloudLattice,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AnalyticShape {
    Sphere,
    Cone,
}

fn print_json<T: serde::Serialize>(value: &T) -> anyhow::Result<()> {
    serde_json::to_writer_pretty(io::stdout().lock(), value)?;
    println!();
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Generate {
            shape,
            density,
            out,
            mesh_out,
        } => {
            let spec = ShapeSpec::new(harness::parse_shape_kind(&shape)?, density)?;
            let summary = harness::cmd_generate(&harness::GenerateRequest {
                shape: spec,
                cloud_out: out,
                mesh_out,
            })?;
            println!("{} points", summary.point_count);
        }
        Command::Voxelize {
            input,
            algorithm,
            r,
            n,
            out,
            adjacency_out,
        } => {
            let summary = harness::cmd_voxelize(&harness::VoxelizeRequest {
                input: input.source()?,
                algorithm: algorithm.into(),
                r,
                n,
                out,
                adjacency_out,
            })?;
            print_json(&summary)?;
        }
        Command::Eigs {
            input,
            solve,
            r,
            n,
            out,
            export_eigenfunctions,
            matrix_out,
        } => {
            let mut params = PipelineParams::new(solve.algorithm.into(), r, n, solve.k);
            params.tol = solve.tol;
            params.seed = solve.seed;
            params.positive = solve.positive;
            let print = out.is_none();
            let report = harness::cmd_eigs(&harness::EigsRequest {
                input: input.source()?,
                params,
                out,
                export_eigenfunctions,
                matrix_out,
            })?;
            if print {
                print_json(&report)?;
            } else {
                eprintln!(
                    "{} unknowns, {} components, wall {:.2}s, cpu {:.2}s",
                    report.vertex_count, report.component_count, report.wall_seconds, report.cpu_seconds
                );
            }
        }
        Command::Sweep {
            input,
            solve,
            r,
            n,
            parallel,
            out,
        } => {
            let spec = harness::SweepSpec {
                input: input.source()?,
                algorithm: solve.algorithm.into(),
                r_values: r,
                n_values: n,
                k: solve.k,
                tol: solve.tol,
                seed: solve.seed,
                positive: solve.positive,
                parallel,
                out: out.clone(),
            };
            let rows = harness::cmd_sweep(&spec)?;
            if out.is_none() {
                harness::write_sweep_csv(io::stdout().lock(), &rows, spec.k)?;
            }
            let failed = rows.iter().filter(|r| r.status != "ok").count();
            if failed > 0 {
                eprintln!("{failed} of {} cells failed", rows.len());
            }
        }
        Command::Analytic {
            shape,
            k,
            h,
            cutoff,
            n_max,
            positive,
            out,
        } => {
            let req = match shape {
                AnalyticShape::Sphere => AnalyticRequest::Sphere { k },
                AnalyticShape::Cone => AnalyticRequest::Cone { h, cutoff, n_max },
            };
            let rows = harness::cmd_analytic(req, positive, out.as_deref())?;
            if out.is_none() {
                harness::write_spectrum_csv(io::stdout().lock(), &rows)?;
            }
        }
        Command::Compare {
            computed,
            analytic,
            reltol,
            gate,
            out,
        } => {
            let print = out.is_none();
            let summary = harness::cmd_compare(&harness::CompareRequest {
                computed,
                analytic,
                reltol,
                gate,
                out,
            })?;
            if print {
                harness::write_comparison_csv(io::stdout().lock(), &summary.rows)?;
            }
            eprintln!(
                "compared {} pairs, max relative error {:.4e}",
                summary.rows.len(),
                summary.max_relative_error
            );
            if !summary.passed {
                eprintln!("max relative error exceeds gate {}", gate.unwrap_or_default());
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
