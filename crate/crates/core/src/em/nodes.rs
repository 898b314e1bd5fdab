use crate::scene::{Patch, Quadrature, SceneGeometry, Vec3};

/// Quadrature node on the surface.
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    /// Local position (m).
    pub position: Vec3,
    /// Quadrature weight (m²).
    pub weight: f64,
    /// Owning patch: RIS patches first (`0..P`), wall patches after.
    pub patch: usize,
    /// Integer coordinates on the node lattice, used for finite differences.
    pub lattice: (i64, i64),
}

/// Nodes of every patch, in patch order.
pub fn surface_nodes(scene: &SceneGeometry) -> Vec<Node> {
    let mut out = Vec::new();
    for (idx, patch) in scene.patches().enumerate() {
        push_patch_nodes(&mut out, idx, patch, scene.quadrature);
    }
    out
}

fn push_patch_nodes(out: &mut Vec<Node>, idx: usize, patch: &Patch, rule: Quadrature) {
    match rule {
        Quadrature::Centroid => out.push(Node {
            position: patch.center,
            weight: patch.area(),
            patch: idx,
            lattice: patch.cell,
        }),
        Quadrature::Sub2x2 => {
            let [sx, sy] = patch.size;
            for b in 0..2i64 {
                for a in 0..2i64 {
                    let off = Vec3::new((a as f64 - 0.5) * sx / 2.0, (b as f64 - 0.5) * sy / 2.0, 0.0);
                    out.push(Node {
                        position: patch.center + off,
                        weight: patch.area() / 4.0,
                        patch: idx,
                        lattice: (2 * patch.cell.0 + a, 2 * patch.cell.1 + b),
                    });
                }
            }
        }
    }
}
