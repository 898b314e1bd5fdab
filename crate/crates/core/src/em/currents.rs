use std::collections::HashMap;

use super::incidence::IncidenceMatrix;
use super::nodes::Node;
use super::{RisConfiguration, TangentialGradient};
use crate::error::{Error, Result};
use crate::scene::SceneGeometry;
use crate::units::{EPS0, MU0};
use crate::C64;

/// Equivalent electric (A/m) and magnetic (V/m) surface currents at a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceCurrent {
    pub je: [C64; 3],
    pub jh: [C64; 3],
}

/// Finite-difference weights of `∂x` and `∂y` on the node lattice.
///
/// `rows[t]` lists `(n, wx, wy)` such that `∂x q(t) ≈ Σ wx q(n)` and
/// `∂y q(t) ≈ Σ wy q(n)`. Central differences inside, one-sided at edges,
/// zero where a node has no neighbour along an axis.
#[derive(Debug, Clone)]
pub(crate) struct Stencil {
    pub rows: Vec<Vec<(usize, f64, f64)>>,
}

impl Stencil {
    pub fn new(nodes: &[Node]) -> Self {
        let index: HashMap<(i64, i64), usize> = nodes.iter().enumerate().map(|(i, n)| (n.lattice, i)).collect();
        let rows = nodes
            .iter()
            .enumerate()
            .map(|(t, node)| {
                let (i, j) = node.lattice;
                let mut row: Vec<(usize, f64, f64)> = Vec::new();
                let mut add = |n: usize, wx: f64, wy: f64| match row.iter_mut().find(|e| e.0 == n) {
                    Some(e) => {
                        e.1 += wx;
                        e.2 += wy;
                    }
                    None => row.push((n, wx, wy)),
                };
                let x = |n: usize| nodes[n].position.x;
                let y = |n: usize| nodes[n].position.y;
                match (index.get(&(i + 1, j)).copied(), index.get(&(i - 1, j)).copied()) {
                    (Some(p), Some(m)) => {
                        let h = x(p) - x(m);
                        add(p, 1.0 / h, 0.0);
                        add(m, -1.0 / h, 0.0);
                    }
                    (Some(p), None) => {
                        let h = x(p) - x(t);
                        add(p, 1.0 / h, 0.0);
                        add(t, -1.0 / h, 0.0);
                    }
                    (None, Some(m)) => {
                        let h = x(t) - x(m);
                        add(t, 1.0 / h, 0.0);
                        add(m, -1.0 / h, 0.0);
                    }
                    (None, None) => {}
                }
                match (index.get(&(i, j + 1)).copied(), index.get(&(i, j - 1)).copied()) {
                    (Some(p), Some(m)) => {
                        let h = y(p) - y(m);
                        add(p, 0.0, 1.0 / h);
                        add(m, 0.0, -1.0 / h);
                    }
                    (Some(p), None) => {
                        let h = y(p) - y(t);
                        add(p, 0.0, 1.0 / h);
                        add(t, 0.0, -1.0 / h);
                    }
                    (None, Some(m)) => {
                        let h = y(t) - y(m);
                        add(t, 0.0, 1.0 / h);
                        add(m, 0.0, -1.0 / h);
                    }
                    (None, None) => {}
                }
                row
            })
            .collect();
        Self { rows }
    }

    /// Columns of the stencil: for each source node, the targets it feeds.
    pub fn transpose(&self) -> Vec<Vec<(usize, f64, f64)>> {
        let mut out = vec![Vec::new(); self.rows.len()];
        for (t, row) in self.rows.iter().enumerate() {
            for &(n, wx, wy) in row {
                out[n].push((t, wx, wy));
            }
        }
        out
    }
}

/// Surface currents at every node for one BS element.
///
/// `element` selects the column of `incidence`. RIS nodes take the entry of
/// their configured state, wall nodes the wall entry.
pub fn patch_currents(
    scene: &SceneGeometry,
    table: &super::SusceptibilityTable,
    config: &RisConfiguration,
    incidence: &IncidenceMatrix,
    element: usize,
) -> Result<Vec<SurfaceCurrent>> {
    config.validate(scene.num_ris(), table.num_states())?;
    if element >= incidence.num_elements() {
        return Err(Error::dim(format!("element {element} out of {}", incidence.num_elements())));
    }
    let nodes = &incidence.nodes;
    let entries: Vec<_> = nodes
        .iter()
        .map(|n| match config.states().get(n.patch) {
            Some(&s) => *table.entry(s).expect("validated state"),
            None => table.wall,
        })
        .collect();
    let f = scene.surface_model.averaging.factor();
    let omega = 2.0 * std::f64::consts::PI * scene.f0;
    let je_scale = C64::new(0.0, omega * EPS0);
    let jh_scale = C64::new(0.0, omega * MU0);
    let chi = scene.polarization;
    let e = |n: usize| incidence.e[(n, element)] * f;
    let h = |n: usize| incidence.magnetic(n, element).map(|c| c * f);

    let mut out: Vec<SurfaceCurrent> = (0..nodes.len())
        .map(|n| {
            let (k, en, hn) = (&entries[n], e(n), h(n));
            let je = [je_scale * k.ke[0] * en * chi.x, je_scale * k.ke[1] * en * chi.y, C64::default()];
            let jh = [jh_scale * k.kh[0] * hn[0], jh_scale * k.kh[1] * hn[1], C64::default()];
            SurfaceCurrent { je, jh }
        })
        .collect();

    if scene.surface_model.tangential_gradient == TangentialGradient::FiniteDifference {
        let qh: Vec<C64> = (0..nodes.len()).map(|n| entries[n].kh[2] * h(n)[2]).collect();
        let qe: Vec<C64> = (0..nodes.len()).map(|n| entries[n].ke[2] * e(n) * chi.z).collect();
        let stencil = Stencil::new(nodes);
        for (t, row) in stencil.rows.iter().enumerate() {
            let mut g = [C64::default(); 4];
            for &(n, wx, wy) in row {
                g[0] += qh[n] * wx;
                g[1] += qh[n] * wy;
                g[2] += qe[n] * wx;
                g[3] += qe[n] * wy;
            }
            out[t].je[0] += je_scale * g[1];
            out[t].je[1] -= je_scale * g[0];
            out[t].jh[0] -= jh_scale * g[3];
            out[t].jh[1] += jh_scale * g[2];
        }
    }
    Ok(out)
}
