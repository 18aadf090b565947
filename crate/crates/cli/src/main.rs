use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use senc_core::closure::{close_selected, LoopSelection};
use senc_core::energy::{BodySdf, EnergyModel, EnergyParams};
use senc_core::gradcheck::{gradcheck, GradcheckOptions};
use senc_core::obj::{load_obj, save_obj, save_tagged_obj};
use senc_core::pipeline::run_pipeline;
use senc_core::proximity::build_self_collision_edges;
use senc_core::report::AnalysisReport;
use senc_core::sim::run_sequence;
use senc_core::{Diagnostic, Error, TriMesh, Vec3};

mod scene;

use scene::Scene;

/// Thread count for parallel sections; unset means one per core.
const THREADS_ENV: &str = "SENC_THREADS";

#[derive(Parser)]
#[command(name = "senc", version, about = "Self-intersection analysis and penetration-resolving cloth simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect self-intersections, extract penetration regions and report the volume loss.
    Analyze {
        #[arg(long)]
        input: PathBuf,
        /// `all`, `none` or a comma-separated list of boundary loop indices.
        #[arg(long, default_value = "all")]
        close_loops: String,
        /// JSON report path; stdout when absent.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Remeshed OBJ with penetration faces in their own material group.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Loss gradient per input vertex as little-endian f64, row-major.
        #[arg(long)]
        gradient: Option<PathBuf>,
    },
    /// Close boundary loops with centroid fans.
    Close {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value = "all")]
        close_loops: String,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// List non-edge vertex pairs closer than the radius.
    Edges {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0.02)]
        radius: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compare analytic gradients with central finite differences.
    Gradcheck {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// TOML file with energy parameters.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value = "all")]
        close_loops: String,
        /// Random displacement relative to the bounding-box diagonal.
        #[arg(long, default_value_t = 1e-3)]
        perturbation: f64,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Deliberately corrupt one term's gradient.
        #[arg(long, hide = true)]
        corrupt: Option<String>,
    },
    /// Run a scene by minimizing the incremental potential each frame.
    Simulate {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// TOML file overriding the scene's energy parameters.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        dump_frames: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

enum Failure {
    Parse(String),
    Other(String),
    /// The report was written but degenerate geometry was skipped.
    Degenerate,
    /// The report was written and records a failed check.
    CheckFailed,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } | Error::Json(_) => Failure::Parse(e.to_string()),
            other => Failure::Other(other.to_string()),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::Other(format!("{}: {e}", path.display()))
}

fn load(path: &Path) -> Result<TriMesh, Failure> {
    let loaded = load_obj(path).map_err(|e| match e {
        Error::Io(io) => io_err(path, io),
        other => Failure::from(other),
    })?;
    for w in &loaded.warnings {
        eprintln!("warning: {}: {}", path.display(), w.detail);
    }
    Ok(loaded.mesh)
}

/// A malformed `--close-loops` value is a parse error like a malformed file.
fn selection(text: &str) -> Result<LoopSelection, Failure> {
    LoopSelection::parse(text).map_err(|e| Failure::Parse(e.to_string()))
}

fn read_params(path: &Path) -> Result<EnergyParams, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    toml::from_str(&text).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn emit(value: &impl Serialize, path: Option<&Path>) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Other(e.to_string()))?;
    text.push('\n');
    match path {
        Some(p) => fs::write(p, text).map_err(|e| io_err(p, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Other(e.to_string())),
    }
}

fn write_gradient(grad: &[Vec3], path: &Path) -> Result<(), Failure> {
    let mut bytes = Vec::with_capacity(grad.len() * 24);
    for g in grad {
        for k in 0..3 {
            bytes.extend_from_slice(&g[k].to_le_bytes());
        }
    }
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

#[derive(Serialize)]
struct CloseReport {
    schema_version: u32,
    boundary_loops: usize,
    closed_loops: Vec<ClosedLoop>,
    output_vertices: usize,
    output_faces: usize,
    diagnostics: Vec<Diagnostic>,
}

#[derive(Serialize)]
struct ClosedLoop {
    centroid_vertex: usize,
    boundary: Vec<usize>,
}

#[derive(Serialize)]
struct EdgesReport {
    schema_version: u32,
    radius: f64,
    count: usize,
    pairs: Vec<[usize; 2]>,
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Analyze {
            input,
            close_loops,
            report,
            output,
            gradient,
        } => {
            let mesh = load(&input)?;
            let selection = selection(&close_loops)?;
            let result = run_pipeline(&mesh, &selection)?;
            let rep = AnalysisReport::new(mesh.num_faces(), mesh.num_vertices(), &result);
            emit(&rep, report.as_deref())?;
            if let Some(path) = output {
                save_tagged_obj(&result.remesh.mesh, &AnalysisReport::penetration_mask(&result), path)?;
            }
            if let Some(path) = gradient {
                write_gradient(&result.loss.gradient, &path)?;
            }
            if result.has_degeneracies() {
                return Err(Failure::Degenerate);
            }
            Ok(())
        }
        Command::Close {
            input,
            output,
            close_loops,
            report,
        } => {
            let mesh = load(&input)?;
            let selection = selection(&close_loops)?;
            let (closed, loops) = close_selected(&mesh, &selection)?;
            save_obj(&closed.closed_mesh, &output)?;
            let rep = CloseReport {
                schema_version: senc_core::report::SCHEMA_VERSION,
                boundary_loops: loops.len(),
                closed_loops: closed
                    .centroids
                    .iter()
                    .map(|c| ClosedLoop {
                        centroid_vertex: c.vertex,
                        boundary: c.boundary.clone(),
                    })
                    .collect(),
                output_vertices: closed.closed_mesh.num_vertices(),
                output_faces: closed.closed_mesh.num_faces(),
                diagnostics: closed.warnings,
            };
            if report.is_some() {
                emit(&rep, report.as_deref())?;
            }
            Ok(())
        }
        Command::Edges { input, radius, output } => {
            let mesh = load(&input)?;
            let set = build_self_collision_edges(&mesh, radius)?;
            let rep = EdgesReport {
                schema_version: senc_core::report::SCHEMA_VERSION,
                radius: set.radius,
                count: set.pairs.len(),
                pairs: set.pairs,
            };
            emit(&rep, output.as_deref())
        }
        Command::Gradcheck {
            input,
            seed,
            params,
            close_loops,
            perturbation,
            report,
            corrupt,
        } => {
            let mesh = load(&input)?.rest_from_current();
            let params = match params {
                Some(p) => read_params(&p)?,
                None => EnergyParams::default(),
            };
            let selection = selection(&close_loops)?;
            let options = GradcheckOptions {
                seed,
                perturbation,
                corrupt,
                ..Default::default()
            };
            let rep = gradcheck(&mesh, &params, &BodySdf::default(), &selection, &options)?;
            for t in &rep.terms {
                if let Some(n) = &t.notice {
                    eprintln!("notice: {}: {n}", t.term);
                }
            }
            emit(&rep, report.as_deref())?;
            if rep.passed {
                Ok(())
            } else {
                Err(Failure::CheckFailed)
            }
        }
        Command::Simulate {
            scene,
            steps,
            seed,
            params,
            dump_frames,
            report,
        } => {
            let mut sc = Scene::load(&scene)?;
            if let Some(p) = params {
                sc.params = read_params(&p)?;
            }
            if let Some(s) = steps {
                sc.config.steps = s;
            }
            if let Some(s) = seed {
                sc.config.seed = s;
            }
            let mesh = sc.mesh(&scene, load)?;
            let model = EnergyModel::new(&mesh, sc.params.clone(), sc.body.clone())?.with_loops(sc.loops()?);
            if let Some(dir) = &dump_frames {
                fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
            }
            let rep = run_sequence(&model, mesh.vertices(), &sc.config, |frame, state| {
                if let Some(dir) = &dump_frames {
                    let posed = mesh.with_positions(state.x_curr.clone())?;
                    save_obj(&posed, dir.join(format!("frame_{frame:04}.obj")))?;
                }
                Ok(())
            })?;
            emit(&rep, report.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        // only fails if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Parse(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Degenerate) => ExitCode::from(3),
        Err(Failure::CheckFailed) => ExitCode::from(1),
        Err(Failure::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
