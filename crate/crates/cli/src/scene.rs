use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use senc_core::closure::LoopSelection;
use senc_core::energy::{BodySdf, EnergyParams};
use senc_core::sim::SimConfig;
use senc_core::TriMesh;

use crate::Failure;

/// Simulation input. Paths are relative to the scene file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    pub mesh: PathBuf,
    /// Same topology as `mesh`; its positions define the rest shape. The
    /// initial positions are used when absent.
    #[serde(default)]
    pub rest_mesh: Option<PathBuf>,
    #[serde(default)]
    pub body: BodySdf,
    #[serde(default)]
    pub params: EnergyParams,
    /// `all`, `none` or a comma-separated list of boundary loop indices.
    #[serde(default = "default_loops")]
    pub close_loops: String,
    #[serde(default)]
    pub config: SimConfig,
}

fn default_loops() -> String {
    "all".into()
}

impl Scene {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = fs::read_to_string(path).map_err(|e| crate::io_err(path, e))?;
        serde_json::from_str(&text).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
    }

    pub fn loops(&self) -> Result<LoopSelection, Failure> {
        crate::selection(&self.close_loops)
    }

    /// Initial mesh with its rest shape attached.
    pub fn mesh(&self, scene_path: &Path, load: impl Fn(&Path) -> Result<TriMesh, Failure>) -> Result<TriMesh, Failure> {
        let base = scene_path.parent().unwrap_or(Path::new("."));
        let mesh = load(&base.join(&self.mesh))?;
        match &self.rest_mesh {
            None => Ok(mesh.rest_from_current()),
            Some(r) => {
                let rest = load(&base.join(r))?;
                if rest.faces() != mesh.faces() {
                    return Err(Failure::Other("rest mesh topology differs from the initial mesh".into()));
                }
                Ok(mesh.with_rest(rest.vertices().to_vec())?)
            }
        }
    }
}
