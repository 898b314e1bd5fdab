use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::nodes::{surface_nodes, Node};
use crate::scene::{SceneGeometry, Vec3};
use crate::C64;

/// Incident fields at the surface nodes for unit excitation of each BS element.
#[derive(Debug, Clone)]
pub struct IncidenceMatrix {
    /// Co-polar electric field `G(r_m, r_n)`: the incident field at node `n`
    /// from element `m` is `e[(n, m)] · χ̂`. Shape nodes × M.
    pub e: DMatrix<C64>,
    /// Magnetic field components (x, y, z), each nodes × M:
    /// `H = G (k̂ × χ̂)/η0` with `k̂` the unit vector from element to node.
    pub h: [DMatrix<C64>; 3],
    pub nodes: Vec<Node>,
}

impl IncidenceMatrix {
    pub fn num_nodes(&self) -> usize {
        self.e.nrows()
    }

    pub fn num_elements(&self) -> usize {
        self.e.ncols()
    }

    pub fn magnetic(&self, n: usize, m: usize) -> [C64; 3] {
        [self.h[0][(n, m)], self.h[1][(n, m)], self.h[2][(n, m)]]
    }
}

/// Scalar free-space kernel `exp(−j k0 d)/(4π d)`.
pub fn green(k0: f64, a: &Vec3, b: &Vec3) -> C64 {
    let d = (a - b).norm();
    C64::from_polar(1.0 / (4.0 * PI * d), -k0 * d)
}

pub fn incidence_matrix(scene: &SceneGeometry) -> IncidenceMatrix {
    let nodes = surface_nodes(scene);
    let (n_nodes, m) = (nodes.len(), scene.num_elements());
    let chi = scene.polarization;
    let mut e = DMatrix::zeros(n_nodes, m);
    let mut h = [DMatrix::zeros(n_nodes, m), DMatrix::zeros(n_nodes, m), DMatrix::zeros(n_nodes, m)];
    for (j, el) in scene.bs_elements.iter().enumerate() {
        for (i, node) in nodes.iter().enumerate() {
            let g = green(scene.k0, el, &node.position);
            let k_hat = (node.position - el).normalize();
            let hv = k_hat.cross(&chi) / scene.eta0;
            e[(i, j)] = g;
            for c in 0..3 {
                h[c][(i, j)] = g * hv[c];
            }
        }
    }
    IncidenceMatrix { e, h, nodes }
}
