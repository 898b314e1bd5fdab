use nalgebra::{DMatrix, DVector};

use super::currents::{patch_currents, Stencil};
use super::incidence::{incidence_matrix, IncidenceMatrix};
use super::radiation::RadiationMatrix;
use super::table::{StateEntry, SusceptibilityTable};
use super::{RisConfiguration, TangentialGradient};
use crate::error::{Error, Result};
use crate::scene::{SceneGeometry, Vec3};
use crate::units::{EPS0, MU0};
use crate::C64;

/// End-to-end channel Υ (L users × M BS elements).
#[derive(Debug, Clone, PartialEq)]
pub struct CascadedChannel(pub DMatrix<C64>);

impl CascadedChannel {
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn num_users(&self) -> usize {
        self.0.nrows()
    }

    pub fn num_elements(&self) -> usize {
        self.0.ncols()
    }
}

/// Υ by the direct chain: incident field, surface currents, radiation.
pub fn cascaded_matrix(
    scene: &SceneGeometry,
    table: &SusceptibilityTable,
    config: &RisConfiguration,
    incidence: &IncidenceMatrix,
    radiation: &RadiationMatrix,
) -> Result<CascadedChannel> {
    check_shapes(scene, incidence, radiation)?;
    let (l_users, m) = (radiation.num_points(), incidence.num_elements());
    let mut out = DMatrix::zeros(l_users, m);
    for el in 0..m {
        let currents = patch_currents(scene, table, config, incidence, el)?;
        for l in 0..l_users {
            out[(l, el)] = currents
                .iter()
                .enumerate()
                .map(|(n, j)| radiation.kernel[(l, n)] * radiation.project(l, &j.je, &j.jh))
                .sum();
        }
    }
    Ok(CascadedChannel(out))
}

/// `F = Υ·A`: field of every beam at every user.
pub fn far_fields(channel: &CascadedChannel, weights: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    if channel.num_elements() != weights.nrows() {
        return Err(Error::dim(format!(
            "channel has {} columns, weights have {} rows",
            channel.num_elements(),
            weights.nrows()
        )));
    }
    Ok(&channel.0 * weights)
}

fn check_shapes(scene: &SceneGeometry, incidence: &IncidenceMatrix, radiation: &RadiationMatrix) -> Result<()> {
    if incidence.num_nodes() != radiation.num_nodes() {
        return Err(Error::dim(format!(
            "incidence has {} nodes, radiation has {}",
            incidence.num_nodes(),
            radiation.num_nodes()
        )));
    }
    if incidence.num_elements() != scene.num_elements() {
        return Err(Error::dim("incidence matrix does not match the BS array"));
    }
    if incidence.nodes.last().is_some_and(|n| n.patch >= scene.num_ris() + scene.num_wall()) {
        return Err(Error::dim("incidence matrix built for a different surface"));
    }
    Ok(())
}

/// Rank-1 pieces of one node: Υ gains `Σ_j K_j · u_j · v_{g(j)}ᵀ` with
/// `g = [e, e, e, hx, hy, hz]` over the components `Kex, Key, Kez, Khx, Khy, Khz`.
#[derive(Debug, Clone)]
struct NodeTerms {
    patch: usize,
    u: [Option<DVector<C64>>; 6],
    v: [DVector<C64>; 4],
}

const FIELD_OF: [usize; 6] = [0, 0, 0, 1, 2, 3];

impl NodeTerms {
    fn add_to(&self, entry: &StateEntry, out: &mut DMatrix<C64>) {
        let k = entry.components();
        let mut u: [Option<DVector<C64>>; 4] = Default::default();
        for (j, uj) in self.u.iter().enumerate() {
            if let Some(uj) = uj {
                if k[j] == C64::default() {
                    continue;
                }
                let slot = &mut u[FIELD_OF[j]];
                match slot {
                    Some(acc) => acc.axpy(k[j], uj, C64::new(1.0, 0.0)),
                    None => *slot = Some(uj * k[j]),
                }
            }
        }
        for (g, ug) in u.iter().enumerate() {
            if let Some(ug) = ug {
                out.ger(C64::new(1.0, 0.0), ug, &self.v[g], C64::new(1.0, 0.0));
            }
        }
    }
}

/// Largest `P · 2^B · L · M` for which every per-state patch term is cached.
const CACHE_LIMIT: usize = 4_000_000;

#[derive(Debug, Clone)]
enum Storage {
    /// `terms[p * S + (s − 1)]` is patch `p`'s contribution in state `s`.
    PerState(Vec<DMatrix<C64>>),
    /// Rank-1 pieces of every RIS node, combined on demand.
    Nodes { nodes: Vec<NodeTerms>, first: Vec<usize> },
}

/// Υ decomposed into a fixed wall part plus one term per RIS patch and state.
///
/// `Υ(s) = Υ_wall + Σ_p T_p(s_p)`; the chain is linear in every patch's
/// susceptibilities, so the decomposition is exact.
#[derive(Debug, Clone)]
pub struct PatchResponses {
    fixed: DMatrix<C64>,
    storage: Storage,
    table: SusceptibilityTable,
    num_patches: usize,
}

impl PatchResponses {
    /// Builds incidence and radiation for the given global user points.
    pub fn new(scene: &SceneGeometry, table: &SusceptibilityTable, users: &[Vec3]) -> Result<Self> {
        let incidence = incidence_matrix(scene);
        let radiation = RadiationMatrix::new(scene, &incidence.nodes, users);
        Self::from_parts(scene, table, &incidence, &radiation)
    }

    pub fn from_parts(
        scene: &SceneGeometry,
        table: &SusceptibilityTable,
        incidence: &IncidenceMatrix,
        radiation: &RadiationMatrix,
    ) -> Result<Self> {
        check_shapes(scene, incidence, radiation)?;
        let (l_users, m) = (radiation.num_points(), incidence.num_elements());
        let num_patches = scene.num_ris();
        let terms = node_terms(scene, incidence, radiation);

        let mut fixed = DMatrix::zeros(l_users, m);
        for t in terms.iter().filter(|t| t.patch >= num_patches) {
            t.add_to(&table.wall, &mut fixed);
        }
        let ris: Vec<NodeTerms> = terms.into_iter().filter(|t| t.patch < num_patches).collect();
        let mut first = vec![ris.len(); num_patches + 1];
        for (i, t) in ris.iter().enumerate().rev() {
            first[t.patch] = i;
        }
        for p in (0..num_patches).rev() {
            first[p] = first[p].min(first[p + 1]);
        }

        let s = table.states.len();
        let storage = if num_patches * s * l_users * m <= CACHE_LIMIT {
            let mut cache = Vec::with_capacity(num_patches * s);
            for p in 0..num_patches {
                for entry in &table.states {
                    let mut t = DMatrix::zeros(l_users, m);
                    for node in &ris[first[p]..first[p + 1]] {
                        node.add_to(entry, &mut t);
                    }
                    cache.push(t);
                }
            }
            Storage::PerState(cache)
        } else {
            Storage::Nodes { nodes: ris, first }
        };
        Ok(Self { fixed, storage, table: table.clone(), num_patches })
    }

    pub fn num_users(&self) -> usize {
        self.fixed.nrows()
    }

    pub fn num_elements(&self) -> usize {
        self.fixed.ncols()
    }

    pub fn num_patches(&self) -> usize {
        self.num_patches
    }

    pub fn num_states(&self) -> u16 {
        self.table.num_states()
    }

    /// Contribution of everything that is not RIS (the wall).
    pub fn fixed_part(&self) -> &DMatrix<C64> {
        &self.fixed
    }

    /// Contribution `T_p(s)` of patch `p` in state `s`.
    pub fn patch_term(&self, p: usize, s: u16) -> Result<DMatrix<C64>> {
        let entry = self
            .table
            .entry(s)
            .ok_or(Error::StateOutOfRange { patch: p, state: s, max: self.num_states() })?;
        if p >= self.num_patches {
            return Err(Error::dim(format!("patch {p} out of {}", self.num_patches)));
        }
        Ok(match &self.storage {
            Storage::PerState(cache) => cache[p * self.table.states.len() + usize::from(s - 1)].clone(),
            Storage::Nodes { nodes, first } => {
                let mut t = DMatrix::zeros(self.num_users(), self.num_elements());
                for node in &nodes[first[p]..first[p + 1]] {
                    node.add_to(entry, &mut t);
                }
                t
            }
        })
    }

    pub fn channel(&self, config: &RisConfiguration) -> Result<CascadedChannel> {
        config.validate(self.num_patches, self.num_states())?;
        let mut out = self.fixed.clone();
        match &self.storage {
            Storage::PerState(cache) => {
                let s_count = self.table.states.len();
                let acc = out.as_mut_slice();
                for (p, &s) in config.states().iter().enumerate() {
                    let t = cache[p * s_count + usize::from(s - 1)].as_slice();
                    for (a, b) in acc.iter_mut().zip(t) {
                        *a += b;
                    }
                }
            }
            Storage::Nodes { nodes, first } => {
                for (p, &s) in config.states().iter().enumerate() {
                    let entry = self.table.entry(s).expect("validated state");
                    for node in &nodes[first[p]..first[p + 1]] {
                        node.add_to(entry, &mut out);
                    }
                }
            }
        }
        Ok(CascadedChannel(out))
    }
}

fn node_terms(scene: &SceneGeometry, incidence: &IncidenceMatrix, radiation: &RadiationMatrix) -> Vec<NodeTerms> {
    let nodes = &incidence.nodes;
    let l_users = radiation.num_points();
    let f = scene.surface_model.averaging.factor();
    let omega = 2.0 * std::f64::consts::PI * scene.f0;
    let je_scale = C64::new(0.0, omega * EPS0);
    let jh_scale = C64::new(0.0, omega * MU0);
    let chi = scene.polarization;
    let gradients = (scene.surface_model.tangential_gradient == TangentialGradient::FiniteDifference)
        .then(|| Stencil::new(nodes).transpose());

    nodes
        .iter()
        .enumerate()
        .map(|(n, node)| {
            let e = incidence.e.row(n).transpose() * C64::from(f);
            let h = |c: usize| incidence.h[c].row(n).transpose() * C64::from(f);
            let local = |scale: C64, weight: &dyn Fn(usize) -> f64| {
                DVector::from_fn(l_users, |l, _| radiation.kernel[(l, n)] * scale * weight(l))
            };
            let mut u: [Option<DVector<C64>>; 6] = Default::default();
            if chi.x != 0.0 {
                u[0] = Some(local(je_scale * chi.x, &|l| radiation.electric_weight(l).x));
            }
            if chi.y != 0.0 {
                u[1] = Some(local(je_scale * chi.y, &|l| radiation.electric_weight(l).y));
            }
            u[3] = Some(local(jh_scale, &|l| radiation.magnetic_weight(l).x));
            u[4] = Some(local(jh_scale, &|l| radiation.magnetic_weight(l).y));
            if let Some(cols) = &gradients {
                let targets = &cols[n];
                if !targets.is_empty() {
                    u[5] = Some(DVector::from_fn(l_users, |l, _| {
                        let w = radiation.electric_weight(l);
                        let s: C64 = targets
                            .iter()
                            .map(|&(t, wx, wy)| radiation.kernel[(l, t)] * (w.x * wy - w.y * wx))
                            .sum();
                        je_scale * s
                    }));
                    if chi.z != 0.0 {
                        u[2] = Some(DVector::from_fn(l_users, |l, _| {
                            let w = radiation.magnetic_weight(l);
                            let s: C64 = targets
                                .iter()
                                .map(|&(t, wx, wy)| radiation.kernel[(l, t)] * (w.y * wx - w.x * wy))
                                .sum();
                            jh_scale * chi.z * s
                        }));
                    }
                }
            }
            NodeTerms { patch: node.patch, u, v: [e, h(0), h(1), h(2)] }
        })
        .collect()
}
