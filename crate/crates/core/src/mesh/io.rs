//! Versioned JSON mesh files.

use serde::{Deserialize, Serialize};

use super::{Face, SimplicialMesh, VertexId};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimplexRecord {
    pub v: Vec<VertexId>,
    pub tag: usize,
    pub level: u32,
}

/// On-disk layout. Each coordinate is a `[numerator, exponent]` pair
/// meaning `numerator / 2^exponent`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshFile {
    pub version: u32,
    pub dim: usize,
    pub vertices: Vec<Vec<Dyadic>>,
    pub simplices: Vec<SimplexRecord>,
    #[serde(default)]
    pub gamma_faces: Vec<Face>,
}

impl MeshFile {
    pub fn from_mesh(mesh: &SimplicialMesh) -> Self {
        MeshFile {
            version: FORMAT_VERSION,
            dim: mesh.dim(),
            vertices: (0..mesh.num_vertices() as VertexId).map(|v| mesh.vertex(v).to_vec()).collect(),
            simplices: mesh
                .active_ids()
                .into_iter()
                .map(|s| {
                    let t = mesh.simplex(s);
                    SimplexRecord {
                        v: t.vertices().to_vec(),
                        tag: t.tag(),
                        level: t.level(),
                    }
                })
                .collect(),
            gamma_faces: mesh.gamma_faces().iter().cloned().collect(),
        }
    }

    pub fn into_mesh(self) -> Result<SimplicialMesh> {
        if self.version != FORMAT_VERSION {
            return Err(Error::InvalidMesh(format!("unsupported format version {}", self.version)));
        }
        let simplices = self.simplices.into_iter().map(|r| (r.v, r.tag, r.level)).collect();
        SimplicialMesh::from_parts(self.dim, self.vertices, simplices, self.gamma_faces)
    }
}

/// Serializes the active mesh. Ancestry is not stored.
pub fn to_json(mesh: &SimplicialMesh) -> String {
    serde_json::to_string(&MeshFile::from_mesh(mesh)).expect("mesh serialization cannot fail")
}

/// Parses and validates a mesh file.
pub fn from_json(text: &str) -> Result<SimplicialMesh> {
    let file: MeshFile = serde_json::from_str(text)?;
    file.into_mesh()
}
