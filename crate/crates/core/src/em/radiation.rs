use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::nodes::Node;
use crate::scene::{SceneGeometry, Vec3};
use crate::C64;

/// Far-field kernel from every surface node to every observation point.
///
/// `kernel[(l, n)] = (j k0 / 4π) · exp(−j k0 |r_l|)/|r_l| · exp(j k0 r̂_l·r̃_n) · w_n`
/// with `r_l` measured from the RIS center and `w_n` the node weight. The
/// vector part of the radiated field is applied by [`RadiationMatrix::project`].
#[derive(Debug, Clone)]
pub struct RadiationMatrix {
    pub kernel: DMatrix<C64>,
    /// Unit direction `r̂_l` (local frame) of each observation point.
    pub directions: Vec<Vec3>,
    /// `η0 ((χ̂·r̂) r̂ − χ̂)`: co-polar weight applied to the electric current.
    electric_weight: Vec<Vec3>,
    /// `χ̂ × r̂`: co-polar weight applied to the magnetic current.
    magnetic_weight: Vec<Vec3>,
}

impl RadiationMatrix {
    /// Builds the kernel for observation points given in global coordinates.
    pub fn new(scene: &SceneGeometry, nodes: &[Node], points: &[Vec3]) -> Self {
        let k0 = scene.k0;
        let chi = scene.polarization;
        let mut kernel = DMatrix::zeros(points.len(), nodes.len());
        let mut directions = Vec::with_capacity(points.len());
        let mut electric_weight = Vec::with_capacity(points.len());
        let mut magnetic_weight = Vec::with_capacity(points.len());
        for (l, p) in points.iter().enumerate() {
            let r = scene.frame.to_local(p);
            let dist = r.norm();
            let r_hat = r / dist;
            let lead = C64::new(0.0, k0 / (4.0 * PI)) * C64::from_polar(1.0 / dist, -k0 * dist);
            for (n, node) in nodes.iter().enumerate() {
                kernel[(l, n)] = lead * C64::from_polar(node.weight, k0 * r_hat.dot(&node.position));
            }
            electric_weight.push((r_hat * chi.dot(&r_hat) - chi) * scene.eta0);
            magnetic_weight.push(chi.cross(&r_hat));
            directions.push(r_hat);
        }
        Self { kernel, directions, electric_weight, magnetic_weight }
    }

    pub fn num_points(&self) -> usize {
        self.kernel.nrows()
    }

    pub fn num_nodes(&self) -> usize {
        self.kernel.ncols()
    }

    /// Co-polar component `χ̂ · (r̂ × [η0 r̂ × Je + Jh])` seen from point `l`.
    pub fn project(&self, l: usize, je: &[C64; 3], jh: &[C64; 3]) -> C64 {
        let (we, wh) = (&self.electric_weight[l], &self.magnetic_weight[l]);
        (0..3).map(|c| je[c] * we[c] + jh[c] * wh[c]).sum()
    }

    pub fn electric_weight(&self, l: usize) -> &Vec3 {
        &self.electric_weight[l]
    }

    pub fn magnetic_weight(&self, l: usize) -> &Vec3 {
        &self.magnetic_weight[l]
    }
}
