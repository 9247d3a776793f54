//! Command-line pipelines: shape generation, voxelization, eigen-solves,
//! `(r, n)` sweeps, analytic spectra and comparison against them.

mod compare;

use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};
use rayon::prelude::*;
use serde::Serialize;

use crate::eigensolve::{self, EigenGroup, SolveOptions, SpectrumResult};
use crate::geometry::io::{self as gio, CloudFormat, MeshFormat};
use crate::geometry::{Point3, PointCloud, ShapeKind, ShapeSpec, TriangleMesh};
use crate::lattice::{self, LatticeGraph, LatticeStats, VoxelizeOptions};
use crate::operators::{self, ScaledOperatorPair};
use crate::timing::Stopwatch;

pub use compare::{
    analytic_csv, cmd_analytic, cmd_compare, compare_values, read_computed, read_spectrum_csv,
    write_comparison_csv, write_spectrum_csv, AnalyticRequest, CompareRequest, CompareSummary,
    ComparisonRow, SpectrumRow,
};

/// Overrides the voxelizer's vertex cap.
pub const MAX_VERTS_ENV: &str = "SPECTRAL_LATTICE_MAX_VERTS";
/// Relative spread used when grouping reported eigenvalues.
pub const DEFAULT_GROUP_RELTOL: f64 = 0.06;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    MeshCotangent,
    MeshLattice,
    CloudLattice,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::MeshCotangent => "mesh-cotangent",
            Algorithm::MeshLattice => "mesh-lattice",
            Algorithm::CloudLattice => "cloud-lattice",
        }
    }

    pub fn uses_lattice(self) -> bool {
        self != Algorithm::MeshCotangent
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        match s {
            "mesh-cotangent" => Ok(Algorithm::MeshCotangent),
            "mesh-lattice" => Ok(Algorithm::MeshLattice),
            "cloud-lattice" => Ok(Algorithm::CloudLattice),
            _ => bail!("unknown algorithm '{s}' (mesh-cotangent, mesh-lattice, cloud-lattice)"),
        }
    }
}

/// Parses `name[:p1,p2,...]`, e.g. `sphere`, `ellipsoid:3,3,1`, `cone:1`,
/// `torus:2,0.5`.
pub fn parse_shape_kind(s: &str) -> anyhow::Result<ShapeKind> {
    let (name, args) = match s.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (s, None),
    };
    let params: Vec<f64> = match args {
        Some(a) => a
            .split(',')
            .map(|t| t.trim().parse::<f64>().with_context(|| format!("bad shape parameter '{t}'")))
            .collect::<anyhow::Result<_>>()?,
        None => Vec::new(),
    };
    let want = |count: usize, defaults: &[f64]| -> anyhow::Result<Vec<f64>> {
        match params.len() {
            0 => Ok(defaults.to_vec()),
            c if c == count => Ok(params.clone()),
            c => bail!("shape '{name}' takes {count} parameters, got {c}"),
        }
    };
    Ok(match name {
        "sphere" => {
            want(0, &[])?;
            ShapeKind::Sphere
        }
        "ellipsoid" => {
            let p = want(3, &[3.0, 3.0, 1.0])?;
            ShapeKind::Ellipsoid { a: p[0], b: p[1], c: p[2] }
        }
        "cone" => ShapeKind::Cone { h: want(1, &[1.0])?[0] },
        "cube" => {
            want(0, &[])?;
            ShapeKind::Cube
        }
        "tetrahedron3" => {
            want(0, &[])?;
            ShapeKind::Tetrahedron3
        }
        "tetrahedron4" => {
            want(0, &[])?;
            ShapeKind::Tetrahedron4
        }
        "torus" => {
            let p = want(2, &[2.0, 0.5])?;
            ShapeKind::Torus { major: p[0], minor: p[1] }
        }
        "icosphere" => {
            want(0, &[])?;
            ShapeKind::Icosphere
        }
        _ => bail!("unknown shape '{name}'"),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum InputSource {
    Shape(ShapeSpec),
    Cloud(PathBuf),
    Mesh(PathBuf),
}

impl InputSource {
    pub fn describe(&self) -> String {
        match self {
            InputSource::Shape(s) => s.descriptor(),
            InputSource::Cloud(p) | InputSource::Mesh(p) => p.display().to_string(),
        }
    }
}

/// Geometry ready for a pipeline. Clouds are taken from mesh vertices when a
/// lattice is built from a mesh-only input.
#[derive(Clone, Debug)]
pub struct Geometry {
    pub label: String,
    pub cloud: Option<PointCloud>,
    pub mesh: Option<TriangleMesh>,
}

pub fn load_geometry(source: &InputSource, algorithm: Algorithm) -> anyhow::Result<Geometry> {
    let label = source.describe();
    let (cloud, mesh) = match source {
        InputSource::Shape(spec) => match algorithm {
            Algorithm::CloudLattice => (Some(spec.cloud()?), None),
            _ => {
                let mesh = spec
                    .mesh()?
                    .ok_or_else(|| anyhow!("shape {} has no mesh generator", spec.name()))?;
                (None, Some(mesh))
            }
        },
        InputSource::Cloud(path) => {
            if algorithm != Algorithm::CloudLattice {
                bail!("{algorithm} needs a mesh input, got a point cloud");
            }
            let cloud = gio::load_cloud(path, CloudFormat::from_path(path)?)
                .with_context(|| format!("reading {}", path.display()))?;
            (Some(cloud), None)
        }
        InputSource::Mesh(path) => {
            let loaded = gio::load_mesh(path, MeshFormat::from_path(path)?)
                .with_context(|| format!("reading {}", path.display()))?;
            for w in &loaded.warnings {
                log::warn!("{}: {w}", path.display());
            }
            match algorithm {
                Algorithm::CloudLattice => (Some(loaded.mesh.vertex_cloud()), None),
                _ => (None, Some(loaded.mesh)),
            }
        }
    };
    Ok(Geometry { label, cloud, mesh })
}

/// Voxelizer options with the cap taken from [`MAX_VERTS_ENV`] when set.
pub fn voxelize_options() -> anyhow::Result<VoxelizeOptions> {
    let mut opts = VoxelizeOptions::default();
    if let Ok(v) = std::env::var(MAX_VERTS_ENV) {
        opts.max_verts = v
            .trim()
            .parse()
            .with_context(|| format!("{MAX_VERTS_ENV}='{v}' is not a positive integer"))?;
    }
    Ok(opts)
}

pub fn build_lattice(
    geom: &Geometry,
    algorithm: Algorithm,
    r: f64,
    n: u32,
    opts: &VoxelizeOptions,
) -> anyhow::Result<LatticeGraph> {
    let g = match algorithm {
        Algorithm::CloudLattice => {
            let cloud = geom.cloud.as_ref().ok_or_else(|| anyhow!("no point cloud loaded"))?;
            lattice::voxelize_cloud_with(cloud, r, n, opts)?
        }
        Algorithm::MeshLattice => {
            let mesh = geom.mesh.as_ref().ok_or_else(|| anyhow!("no mesh loaded"))?;
            lattice::voxelize_mesh_with(mesh, r, n, opts)?
        }
        Algorithm::MeshCotangent => bail!("mesh-cotangent does not build a lattice"),
    };
    Ok(g)
}

#[derive(Clone, Copy, Debug)]
pub struct PipelineParams {
    pub algorithm: Algorithm,
    /// Shell thickness and lattice density; ignored by mesh-cotangent.
    pub r: f64,
    pub n: u32,
    pub k: usize,
    pub tol: f64,
    pub seed: u64,
    /// Report `+λ` magnitudes instead of the negative Laplacian eigenvalues.
    pub positive: bool,
    pub keep_vectors: bool,
}

impl PipelineParams {
    pub fn new(algorithm: Algorithm, r: f64, n: u32, k: usize) -> Self {
        Self {
            algorithm,
            r,
            n,
            k,
            tol: eigensolve::DEFAULT_TOL,
            seed: SolveOptions::default().seed,
            positive: false,
            keep_vectors: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StageTiming {
    pub stage: &'static str,
    pub wall_seconds: f64,
    pub cpu_seconds: f64,
}

/// Machine-readable result of one pipeline run.
#[derive(Clone, Debug, Serialize)]
pub struct EigsReport {
    pub algorithm: Algorithm,
    pub input: String,
    pub r: Option<f64>,
    pub n: Option<u32>,
    pub k: usize,
    pub tol: f64,
    pub seed: u64,
    pub positive: bool,
    pub eigenvalues: Vec<f64>,
    pub matrix_eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub groups: Vec<EigenGroup>,
    pub vertex_count: usize,
    pub edge_count: usize,
    pub component_count: usize,
    pub lattice: Option<LatticeStats>,
    pub solver: String,
    pub iterations: usize,
    pub stages: Vec<StageTiming>,
    /// Whole pipeline, the tables' "Elapsed Time".
    pub wall_seconds: f64,
    /// Process CPU time summed over threads, the tables' "CPU Time".
    pub cpu_seconds: f64,
}

/// Everything a run produced, including what the report leaves out.
pub struct PipelineRun {
    pub report: EigsReport,
    pub spectrum: SpectrumResult,
    pub pair: ScaledOperatorPair,
    /// Positions carrying the eigenvector entries.
    pub points: Vec<Point3>,
}

fn timed<T>(
    stages: &mut Vec<StageTiming>,
    stage: &'static str,
    f: impl FnOnce() -> anyhow::Result<T>,
) -> anyhow::Result<T> {
    let clock = Stopwatch::start();
    let out = f().with_context(|| format!("stage '{stage}' failed"))?;
    stages.push(StageTiming {
        stage,
        wall_seconds: clock.wall_seconds(),
        cpu_seconds: clock.cpu_seconds(),
    });
    Ok(out)
}

pub fn run_pipeline(geom: &Geometry, params: &PipelineParams) -> anyhow::Result<PipelineRun> {
    let clock = Stopwatch::start();
    let mut stages = Vec::new();
    let alg = params.algorithm;

    let (pair, points, stats) = if alg.uses_lattice() {
        let opts = voxelize_options()?;
        let g = timed(&mut stages, "voxelize", || {
            build_lattice(geom, alg, params.r, params.n, &opts)
        })?;
        let pair = timed(&mut stages, "assemble", || Ok(operators::graph_laplacian(&g)))?;
        let stats = g.stats();
        (pair, g.positions(), Some(stats))
    } else {
        let mesh = geom.mesh.as_ref().ok_or_else(|| anyhow!("no mesh loaded"))?;
        let pair = timed(&mut stages, "assemble", || Ok(operators::cotangent_laplacian(mesh)?))?;
        (pair, mesh.vertices().to_vec(), None)
    };

    let opts = SolveOptions {
        tol: params.tol,
        seed: params.seed,
        keep_vectors: params.keep_vectors,
        max_iterations: None,
    };
    let mut spectrum = timed(&mut stages, "solve", || {
        Ok(eigensolve::smallest_nonzero_with(&pair, params.k, &opts)?)
    })?;
    spectrum.meta.algorithm = alg.name().to_string();
    spectrum.meta.shape = Some(geom.label.clone());
    if alg.uses_lattice() {
        spectrum.meta.r = Some(params.r);
        spectrum.meta.n = Some(params.n);
    }

    let sign = if params.positive { -1.0 } else { 1.0 };
    let eigenvalues: Vec<f64> = spectrum.eigenvalues.iter().map(|v| sign * v).collect();
    let edge_count = match &stats {
        Some(s) => s.edge_count,
        None => (pair.stiffness.nnz() - pair.dim()) / 2,
    };
    let report = EigsReport {
        algorithm: alg,
        input: geom.label.clone(),
        r: spectrum.meta.r,
        n: spectrum.meta.n,
        k: params.k,
        tol: params.tol,
        seed: params.seed,
        positive: params.positive,
        groups: eigensolve::group_values(&eigenvalues, DEFAULT_GROUP_RELTOL),
        eigenvalues,
        matrix_eigenvalues: spectrum.matrix_eigenvalues.clone(),
        residuals: spectrum.residuals.clone(),
        vertex_count: pair.dim(),
        edge_count,
        component_count: pair.component_count,
        lattice: stats,
        solver: spectrum.meta.solver.clone(),
        iterations: spectrum.meta.iterations,
        stages,
        wall_seconds: clock.wall_seconds(),
        cpu_seconds: clock.cpu_seconds(),
    };
    Ok(PipelineRun {
        report,
        spectrum,
        pair,
        points,
    })
}

fn ensure_parent(path: &Path) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    ensure_parent(path)?;
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug)]
pub struct GenerateRequest {
    pub shape: ShapeSpec,
    pub cloud_out: PathBuf,
    /// Written only when the shape has a mesh generator.
    pub mesh_out: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GenerateSummary {
    pub shape: String,
    pub point_count: usize,
    pub mesh_vertices: Option<usize>,
    pub mesh_faces: Option<usize>,
}

pub fn cmd_generate(req: &GenerateRequest) -> anyhow::Result<GenerateSummary> {
    let cloud = req.shape.cloud()?;
    ensure_parent(&req.cloud_out)?;
    gio::save_cloud(&req.cloud_out, &cloud, CloudFormat::from_path(&req.cloud_out)?)
        .with_context(|| format!("writing {}", req.cloud_out.display()))?;
    let mut summary = GenerateSummary {
        shape: req.shape.descriptor(),
        point_count: cloud.len(),
        mesh_vertices: None,
        mesh_faces: None,
    };
    if let Some(path) = &req.mesh_out {
        match req.shape.mesh()? {
            Some(mesh) => {
                ensure_parent(path)?;
                gio::save_mesh(path, &mesh, MeshFormat::from_path(path)?)
                    .with_context(|| format!("writing {}", path.display()))?;
                summary.mesh_vertices = Some(mesh.vertices().len());
                summary.mesh_faces = Some(mesh.faces().len());
            }
            None => log::warn!("{} has no mesh generator; skipping {}", req.shape.name(), path.display()),
        }
    }
    Ok(summary)
}

#[derive(Clone, Debug)]
pub struct VoxelizeRequest {
    pub input: InputSource,
    pub algorithm: Algorithm,
    pub r: f64,
    pub n: u32,
    /// ply-ascii of the lattice sites.
    pub out: Option<PathBuf>,
    /// One `u v` pair per line.
    pub adjacency_out: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VoxelizeSummary {
    pub input: String,
    pub r: f64,
    pub n: u32,
    #[serde(flatten)]
    pub stats: LatticeStats,
    pub wall_seconds: f64,
    pub cpu_seconds: f64,
}

pub fn cmd_voxelize(req: &VoxelizeRequest) -> anyhow::Result<VoxelizeSummary> {
    if !req.algorithm.uses_lattice() {
        bail!("voxelize needs mesh-lattice or cloud-lattice");
    }
    let geom = load_geometry(&req.input, req.algorithm).context("stage 'load' failed")?;
    let clock = Stopwatch::start();
    let g = build_lattice(&geom, req.algorithm, req.r, req.n, &voxelize_options()?)
        .context("stage 'voxelize' failed")?;
    let (wall_seconds, cpu_seconds) = (clock.wall_seconds(), clock.cpu_seconds());
    if let Some(path) = &req.out {
        ensure_parent(path)?;
        let mut w = BufWriter::new(File::create(path)?);
        g.write_ply(&mut w)?;
        w.flush()?;
    }
    if let Some(path) = &req.adjacency_out {
        ensure_parent(path)?;
        let mut w = BufWriter::new(File::create(path)?);
        g.write_adjacency(&mut w)?;
        w.flush()?;
    }
    Ok(VoxelizeSummary {
        input: geom.label,
        r: req.r,
        n: req.n,
        stats: g.stats(),
        wall_seconds,
        cpu_seconds,
    })
}

#[derive(Clone, Debug)]
pub struct EigsRequest {
    pub input: InputSource,
    pub params: PipelineParams,
    /// JSON report destination.
    pub out: Option<PathBuf>,
    /// Directory receiving one ply-ascii scalar field per eigenvector.
    pub export_eigenfunctions: Option<PathBuf>,
    /// Matrix Market dump of the stiffness matrix.
    pub matrix_out: Option<PathBuf>,
}

pub fn eigenfunction_path(dir: &Path, index: usize) -> PathBuf {
    dir.join(format!("eigenfunction_{:02}.ply", index + 1))
}

pub fn cmd_eigs(req: &EigsRequest) -> anyhow::Result<EigsReport> {
    let geom = load_geometry(&req.input, req.params.algorithm).context("stage 'load' failed")?;
    let mut params = req.params;
    params.keep_vectors = req.export_eigenfunctions.is_some();
    let run = run_pipeline(&geom, &params)?;

    if let Some(dir) = &req.export_eigenfunctions {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let vectors = run.spectrum.eigenvectors.as_ref().ok_or_else(|| anyhow!("eigenvectors were not kept"))?;
        for (i, v) in vectors.iter().enumerate() {
            let path = eigenfunction_path(dir, i);
            gio::save_scalar_field(&path, &run.points, v)
                .with_context(|| format!("stage 'export' failed writing {}", path.display()))?;
        }
    }
    if let Some(path) = &req.matrix_out {
        ensure_parent(path)?;
        let mut w = BufWriter::new(File::create(path)?);
        run.pair.stiffness.write_matrix_market(&mut w)?;
        w.flush()?;
    }
    if let Some(path) = &req.out {
        write_json(path, &run.report)?;
    }
    Ok(run.report)
}

/// Axes of a convergence study.
#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub input: InputSource,
    pub algorithm: Algorithm,
    pub r_values: Vec<f64>,
    pub n_values: Vec<u32>,
    pub k: usize,
    pub tol: f64,
    pub seed: u64,
    pub positive: bool,
    /// Run cells concurrently.
    pub parallel: bool,
    pub out: Option<PathBuf>,
}

impl SweepSpec {
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.r_values.is_empty() || self.n_values.is_empty() {
            bail!("sweep needs at least one r and one n value");
        }
        if self.k == 0 {
            bail!("k must be at least 1");
        }
        if let Some(r) = self.r_values.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            bail!("r values must be positive, got {r}");
        }
        if self.n_values.contains(&0) {
            bail!("n values must be positive");
        }
        Ok(())
    }

    /// Cells in output order: r blocks, n ascending within each block.
    pub fn cells(&self) -> Vec<(f64, u32)> {
        self.r_values
            .iter()
            .flat_map(|&r| self.n_values.iter().map(move |&n| (r, n)))
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub r: f64,
    pub n: u32,
    pub status: &'static str,
    pub vertex_count: Option<usize>,
    pub edge_count: Option<usize>,
    pub component_count: Option<usize>,
    pub wall_seconds: f64,
    pub cpu_seconds: f64,
    pub eigenvalues: Vec<f64>,
    pub message: String,
}

fn sweep_cell(geom: &Geometry, spec: &SweepSpec, r: f64, n: u32) -> SweepRow {
    let mut params = PipelineParams::new(spec.algorithm, r, n, spec.k);
    params.tol = spec.tol;
    params.seed = spec.seed;
    params.positive = spec.positive;
    let clock = Stopwatch::start();
    match run_pipeline(geom, &params) {
        Ok(run) => {
            let rep = run.report;
            SweepRow {
                r,
                n,
                status: "ok",
                vertex_count: Some(rep.vertex_count),
                edge_count: Some(rep.edge_count),
                component_count: Some(rep.component_count),
                wall_seconds: rep.wall_seconds,
                cpu_seconds: rep.cpu_seconds,
                eigenvalues: rep.eigenvalues,
                message: String::new(),
            }
        }
        Err(e) => {
            log::warn!("sweep cell r={r} n={n} failed: {e:#}");
            SweepRow {
                r,
                n,
                status: "error",
                vertex_count: None,
                edge_count: None,
                component_count: None,
                wall_seconds: clock.wall_seconds(),
                cpu_seconds: clock.cpu_seconds(),
                eigenvalues: Vec::new(),
                message: format!("{e:#}"),
            }
        }
    }
}

/// Runs every cell; a failing cell is recorded in its row and the sweep goes on.
pub fn cmd_sweep(spec: &SweepSpec) -> anyhow::Result<Vec<SweepRow>> {
    spec.validate()?;
    let geom = load_geometry(&spec.input, spec.algorithm).context("stage 'load' failed")?;
    let cells = spec.cells();
    let rows: Vec<SweepRow> = if spec.parallel {
        cells.par_iter().map(|&(r, n)| sweep_cell(&geom, spec, r, n)).collect()
    } else {
        cells.iter().map(|&(r, n)| sweep_cell(&geom, spec, r, n)).collect()
    };
    if let Some(path) = &spec.out {
        ensure_parent(path)?;
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_sweep_csv(file, &rows, spec.k)?;
    }
    Ok(rows)
}

pub fn sweep_header(k: usize) -> Vec<String> {
    let mut h: Vec<String> = [
        "r",
        "n",
        "status",
        "vertex_count",
        "edge_count",
        "component_count",
        "wall_seconds",
        "cpu_seconds",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    h.extend((1..=k).map(|i| format!("lambda_{i}")));
    h.push("message".into());
    h
}

pub fn write_sweep_csv<W: Write>(w: W, rows: &[SweepRow], k: usize) -> anyhow::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(sweep_header(k))?;
    let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
    for row in rows {
        let mut rec = vec![
            row.r.to_string(),
            row.n.to_string(),
            row.status.to_string(),
            opt(row.vertex_count),
            opt(row.edge_count),
            opt(row.component_count),
            format!("{:.6}", row.wall_seconds),
            format!("{:.6}", row.cpu_seconds),
        ];
        for i in 0..k {
            rec.push(row.eigenvalues.get(i).map(|v| format!("{v:.10e}")).unwrap_or_default());
        }
        rec.push(row.message.clone());
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}
