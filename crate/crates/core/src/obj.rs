//! Minimal ASCII OBJ reader/writer (`v` and `f` records only).

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Diagnostic, DiagnosticKind, Error, Result};
use crate::mesh::TriMesh;
use crate::Vec3;

#[derive(Debug, Clone)]
pub struct LoadedMesh {
    pub mesh: TriMesh,
    pub warnings: Vec<Diagnostic>,
}

pub fn load_obj(path: impl AsRef<Path>) -> Result<LoadedMesh> {
    let text = std::fs::read_to_string(path)?;
    parse_obj(&text)
}

pub fn parse_obj(text: &str) -> Result<LoadedMesh> {
    let mut vertices = Vec::new();
    let mut polygons: Vec<(usize, Vec<usize>)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        let mut it = content.split_whitespace();
        match it.next() {
            Some("v") => {
                let coords: Vec<f64> = it
                    .take(3)
                    .map(|s| {
                        s.parse::<f64>().map_err(|e| Error::Parse {
                            line,
                            message: format!("bad coordinate {s:?}: {e}"),
                        })
                    })
                    .collect::<Result<_>>()?;
                if coords.len() != 3 {
                    return Err(Error::Parse {
                        line,
                        message: "vertex needs three coordinates".into(),
                    });
                }
                vertices.push(Vec3::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let mut idx = Vec::new();
                for tok in it {
                    let head = tok.split('/').next().unwrap_or("");
                    let raw: i64 = head.parse().map_err(|e| Error::Parse {
                        line,
                        message: format!("bad face index {tok:?}: {e}"),
                    })?;
                    let resolved = if raw > 0 {
                        raw - 1
                    } else if raw < 0 {
                        vertices.len() as i64 + raw
                    } else {
                        -1
                    };
                    if resolved < 0 || resolved as usize >= vertices.len() {
                        return Err(Error::Parse {
                            line,
                            message: format!("face index {raw} out of range"),
                        });
                    }
                    idx.push(resolved as usize);
                }
                if idx.len() < 3 {
                    return Err(Error::Parse {
                        line,
                        message: "face needs at least three vertices".into(),
                    });
                }
                polygons.push((line, idx));
            }
            _ => {}
        }
    }

    let mut warnings = Vec::new();
    let mut faces = Vec::new();
    let mut seen = HashSet::new();
    for (line, poly) in polygons {
        // fan triangulation
        for k in 1..poly.len() - 1 {
            let f = [poly[0], poly[k], poly[k + 1]];
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                warnings.push(Diagnostic::new(
                    DiagnosticKind::SkippedFace,
                    format!("line {line}: repeated index in {f:?}"),
                ));
                continue;
            }
            let mut key = f;
            let r = (0..3).min_by_key(|&i| f[i]).unwrap();
            key.rotate_left(r);
            if !seen.insert(key) {
                warnings.push(Diagnostic::new(
                    DiagnosticKind::DuplicateFace,
                    format!("line {line}: duplicate face {f:?}"),
                ));
                continue;
            }
            faces.push(f);
        }
    }
    if faces.is_empty() {
        return Err(Error::EmptyMesh);
    }
    let mesh = TriMesh::new(vertices, faces)?;
    let bad = mesh.topology().non_manifold_edges();
    if !bad.is_empty() {
        return Err(Error::NonManifoldEdges { edges: bad });
    }
    Ok(LoadedMesh { mesh, warnings })
}

/// Nine significant digits per coordinate.
pub fn format_coord(x: f64) -> String {
    format!("{x:.8e}")
}

pub fn to_obj_string(mesh: &TriMesh) -> String {
    let mut out = String::with_capacity(mesh.num_vertices() * 48 + mesh.num_faces() * 24);
    for v in mesh.vertices() {
        let _ = writeln!(
            out,
            "v {} {} {}",
            format_coord(v.x),
            format_coord(v.y),
            format_coord(v.z)
        );
    }
    for f in mesh.faces() {
        let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    out
}

pub fn save_obj(mesh: &TriMesh, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_obj_string(mesh))?;
    Ok(())
}

/// Writes the mesh with faces grouped under two materials, plus the `.mtl`
/// file next to it. Faces in `tagged` use the `penetration` material.
pub fn save_tagged_obj(mesh: &TriMesh, tagged: &[bool], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mtl_path = path.with_extension("mtl");
    let mtl_name = mtl_path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "tags.mtl".into());
    let mut out = format!("mtllib {mtl_name}\n");
    for v in mesh.vertices() {
        let _ = writeln!(
            out,
            "v {} {} {}",
            format_coord(v.x),
            format_coord(v.y),
            format_coord(v.z)
        );
    }
    for (name, want) in [("surface", false), ("penetration", true)] {
        let _ = writeln!(out, "usemtl {name}");
        for (fi, f) in mesh.faces().iter().enumerate() {
            if tagged.get(fi).copied().unwrap_or(false) == want {
                let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
            }
        }
    }
    std::fs::write(path, out)?;
    std::fs::write(
        mtl_path,
        "newmtl surface\nKd 0.8 0.8 0.8\n\nnewmtl penetration\nKd 0.9 0.1 0.1\n",
    )?;
    Ok(())
}
