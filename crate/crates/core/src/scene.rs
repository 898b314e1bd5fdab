//! Static scene geometry and per-step user snapshots.
//!
//! The wall and the RIS lie in the local `z = 0` plane of a surface frame whose
//! origin is the RIS center and whose normal is the local `+z` axis. Base
//! station elements, patches and the polarization vector are stored in local
//! coordinates; user positions stay in global coordinates and are mapped
//! through [`Frame::to_local`] when a radiation matrix is built.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::em::SurfaceModel;
use crate::error::{Error, Result};
use crate::units;

pub type Vec3 = Vector3<f64>;

/// Rectangle in the global ground plane holding the users.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserArea {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl UserArea {
    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn depth(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        const TOL: f64 = 1e-9;
        x >= self.x_min - TOL && x <= self.x_max + TOL && y >= self.y_min - TOL && y <= self.y_max + TOL
    }
}

impl Default for UserArea {
    fn default() -> Self {
        Self { x_min: -60.0, x_max: 60.0, y_min: 10.0, y_max: 90.0 }
    }
}

/// Surface quadrature rule used to discretise the radiation integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrature {
    /// One node at each patch centroid, weighted by the patch area.
    #[default]
    Centroid,
    /// Four nodes per patch on a 2×2 sub-grid, each weighted by a quarter of the area.
    Sub2x2,
}

/// Geometry section of the run configuration.
///
/// Defaults reproduce the full-size benchmark (3.5 GHz, 30×30 BS array,
/// 45×45-atom RIS on a 6×7 m² wall, BS at (−20, 20, 5) m).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneConfig {
    pub f0_hz: f64,
    pub bs_rows: usize,
    pub bs_cols: usize,
    /// Element spacing; half a wavelength when omitted.
    pub bs_spacing_m: Option<f64>,
    /// Array center in global coordinates.
    pub bs_position: [f64; 3],
    /// Array boresight in global coordinates; points at the RIS center when omitted.
    pub bs_boresight: Option<[f64; 3]>,
    /// BS antenna polarization in global coordinates (normalised on build).
    pub polarization: [f64; 3],
    pub ris_rows: usize,
    pub ris_cols: usize,
    pub ris_width_m: f64,
    pub ris_height_m: f64,
    pub wall_width_m: f64,
    pub wall_height_m: f64,
    /// Wall center relative to the RIS center, in local (x, y).
    pub wall_offset_m: [f64; 2],
    /// Global position of the RIS center.
    pub surface_origin: [f64; 3],
    /// Global direction of the local x axis (along the wall).
    pub surface_u: [f64; 3],
    /// Global outward normal of the wall.
    pub surface_normal: [f64; 3],
    pub user_area: UserArea,
    pub user_height_m: f64,
    pub min_separation_m: f64,
    pub quadrature: Quadrature,
    /// Field averaging and tangential-gradient options of the surface model.
    pub surface_model: SurfaceModel,
    /// Total radiated BS power Λ (dBm).
    pub power_dbm: f64,
    /// Receiver noise power σ² (dBm).
    pub noise_dbm: f64,
    /// Noise levels used by `sweep-noise` (dBm).
    pub noise_sweep_dbm: Vec<f64>,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            f0_hz: 3.5e9,
            bs_rows: 30,
            bs_cols: 30,
            bs_spacing_m: None,
            bs_position: [-20.0, 20.0, 5.0],
            bs_boresight: None,
            polarization: [1.0, 0.0, 0.0],
            ris_rows: 45,
            ris_cols: 45,
            ris_width_m: 1.93,
            ris_height_m: 1.93,
            wall_width_m: 6.0,
            wall_height_m: 7.0,
            wall_offset_m: [0.0, 0.0],
            surface_origin: [0.0, 0.0, 5.0],
            surface_u: [1.0, 0.0, 0.0],
            surface_normal: [0.0, 1.0, 0.0],
            user_area: UserArea::default(),
            user_height_m: 1.5,
            min_separation_m: 0.1,
            quadrature: Quadrature::Centroid,
            surface_model: SurfaceModel::default(),
            power_dbm: 46.0,
            noise_dbm: -96.0,
            noise_sweep_dbm: vec![-96.0, -76.0, -56.0],
        }
    }
}

/// Rigid transform between the global frame and the local surface frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub origin: Vec3,
    /// Local x axis in global coordinates.
    pub u: Vec3,
    /// Local y axis in global coordinates.
    pub v: Vec3,
    /// Local z axis (wall normal) in global coordinates.
    pub n: Vec3,
}

impl Frame {
    pub fn new(origin: Vec3, u: Vec3, normal: Vec3) -> Result<Self> {
        let u = unit(u).ok_or_else(|| Error::Scene("surface_u must be non-zero".into()))?;
        let n = unit(normal).ok_or_else(|| Error::Scene("surface_normal must be non-zero".into()))?;
        if u.dot(&n).abs() > 1e-9 {
            return Err(Error::Scene("surface_u must be orthogonal to surface_normal".into()));
        }
        let v = n.cross(&u);
        Ok(Self { origin, u, v, n })
    }

    pub fn to_local(&self, p: &Vec3) -> Vec3 {
        let d = p - self.origin;
        Vec3::new(d.dot(&self.u), d.dot(&self.v), d.dot(&self.n))
    }

    pub fn dir_to_local(&self, d: &Vec3) -> Vec3 {
        Vec3::new(d.dot(&self.u), d.dot(&self.v), d.dot(&self.n))
    }

    pub fn to_global(&self, p: &Vec3) -> Vec3 {
        self.origin + self.u * p.x + self.v * p.y + self.n * p.z
    }
}

fn unit(v: Vec3) -> Option<Vec3> {
    let n = v.norm();
    (n.is_finite() && n > 0.0).then(|| v / n)
}

/// One rectangular surface patch in local coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub center: Vec3,
    /// Extent along local x and y (m). Clipped wall edge patches are smaller.
    pub size: [f64; 2],
    pub normal: Vec3,
    /// Integer cell index on the lattice shared by RIS and wall patches.
    pub cell: (i64, i64),
}

impl Patch {
    pub fn area(&self) -> f64 {
        self.size[0] * self.size[1]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneGeometry {
    pub f0: f64,
    pub k0: f64,
    pub eta0: f64,
    /// BS element positions in local coordinates.
    pub bs_elements: Vec<Vec3>,
    /// Unit polarization vector in local coordinates.
    pub polarization: Vec3,
    pub ris_patches: Vec<Patch>,
    pub wall_patches: Vec<Patch>,
    /// (rows, cols) of the RIS grid; patch `p = row * cols + col`.
    pub ris_grid: (usize, usize),
    /// RIS extent (width, height) in m.
    pub ris_size: [f64; 2],
    pub user_area: UserArea,
    pub user_height: f64,
    pub min_separation: f64,
    pub frame: Frame,
    pub quadrature: Quadrature,
    pub surface_model: SurfaceModel,
}

impl SceneGeometry {
    pub fn num_elements(&self) -> usize {
        self.bs_elements.len()
    }

    pub fn num_ris(&self) -> usize {
        self.ris_patches.len()
    }

    pub fn num_wall(&self) -> usize {
        self.wall_patches.len()
    }

    /// RIS patches followed by wall patches.
    pub fn patches(&self) -> impl Iterator<Item = &Patch> {
        self.ris_patches.iter().chain(self.wall_patches.iter())
    }

    /// Copy of the scene with the wall removed, so only the RIS radiates.
    pub fn without_wall(&self) -> Self {
        Self { wall_patches: Vec::new(), ..self.clone() }
    }

    /// Copy of the scene in which the RIS area is re-labelled as wall.
    pub fn ris_as_wall(&self) -> Self {
        let mut wall = self.ris_patches.clone();
        wall.extend(self.wall_patches.iter().cloned());
        Self { ris_patches: Vec::new(), wall_patches: wall, ris_grid: (0, 0), ..self.clone() }
    }

    /// Global point at user height.
    pub fn user_point(&self, x: f64, y: f64) -> Vec3 {
        Vec3::new(x, y, self.user_height)
    }
}

/// Builds and validates the scene.
pub fn build_scene(cfg: &SceneConfig) -> Result<SceneGeometry> {
    let positive = |name: &str, v: f64| {
        if v.is_finite() && v > 0.0 {
            Ok(())
        } else {
            Err(Error::Scene(format!("{name} must be positive, got {v}")))
        }
    };
    positive("f0_hz", cfg.f0_hz)?;
    positive("ris_width_m", cfg.ris_width_m)?;
    positive("ris_height_m", cfg.ris_height_m)?;
    positive("wall_width_m", cfg.wall_width_m)?;
    positive("wall_height_m", cfg.wall_height_m)?;
    if cfg.bs_rows == 0 || cfg.bs_cols == 0 {
        return Err(Error::Scene("BS array needs at least one element (M >= 1)".into()));
    }
    if cfg.ris_rows == 0 || cfg.ris_cols == 0 {
        return Err(Error::Scene("RIS grid needs at least one meta-atom".into()));
    }
    if !(cfg.min_separation_m >= 0.0) || !cfg.user_height_m.is_finite() {
        return Err(Error::Scene("user height and minimum separation must be finite and non-negative".into()));
    }
    let a = &cfg.user_area;
    if !(a.x_max > a.x_min && a.y_max > a.y_min) {
        return Err(Error::Scene("user area must have positive extent".into()));
    }

    let k0 = units::wavenumber(cfg.f0_hz);
    let lambda = units::wavelength(cfg.f0_hz);
    let frame = Frame::new(
        Vec3::from(cfg.surface_origin),
        Vec3::from(cfg.surface_u),
        Vec3::from(cfg.surface_normal),
    )?;

    let polarization = unit(frame.dir_to_local(&Vec3::from(cfg.polarization)))
        .ok_or_else(|| Error::Scene("polarization must be non-zero".into()))?;

    let spacing = cfg.bs_spacing_m.unwrap_or(lambda / 2.0);
    positive("bs_spacing_m", spacing)?;
    let bs_elements = bs_layout(cfg, spacing, &frame)?;

    let (w, h) = (cfg.ris_width_m, cfg.ris_height_m);
    let (dx, dy) = (w / cfg.ris_cols as f64, h / cfg.ris_rows as f64);
    let normal = Vec3::z();
    let mut ris_patches = Vec::with_capacity(cfg.ris_rows * cfg.ris_cols);
    for j in 0..cfg.ris_rows {
        for i in 0..cfg.ris_cols {
            ris_patches.push(Patch {
                center: Vec3::new(-w / 2.0 + (i as f64 + 0.5) * dx, -h / 2.0 + (j as f64 + 0.5) * dy, 0.0),
                size: [dx, dy],
                normal,
                cell: (i as i64, j as i64),
            });
        }
    }

    let [ox, oy] = cfg.wall_offset_m;
    let wall = [
        ox - cfg.wall_width_m / 2.0,
        ox + cfg.wall_width_m / 2.0,
        oy - cfg.wall_height_m / 2.0,
        oy + cfg.wall_height_m / 2.0,
    ];
    let tol = 1e-9 * w.max(h);
    if wall[0] > -w / 2.0 + tol || wall[1] < w / 2.0 - tol || wall[2] > -h / 2.0 + tol || wall[3] < h / 2.0 - tol {
        return Err(Error::Scene(format!(
            "RIS ({w} x {h} m) does not fit inside the wall ({} x {} m, offset [{ox}, {oy}])",
            cfg.wall_width_m, cfg.wall_height_m
        )));
    }
    let wall_patches = tile_wall(wall, [w, h], [dx, dy], (cfg.ris_cols, cfg.ris_rows));

    Ok(SceneGeometry {
        f0: cfg.f0_hz,
        k0,
        eta0: units::free_space_impedance(),
        bs_elements,
        polarization,
        ris_patches,
        wall_patches,
        ris_grid: (cfg.ris_rows, cfg.ris_cols),
        ris_size: [w, h],
        user_area: cfg.user_area,
        user_height: cfg.user_height_m,
        min_separation: cfg.min_separation_m,
        frame,
        quadrature: cfg.quadrature,
        surface_model: cfg.surface_model,
    })
}

/// Uniform planar array centered on `bs_position` with its broadside along the boresight.
fn bs_layout(cfg: &SceneConfig, spacing: f64, frame: &Frame) -> Result<Vec<Vec3>> {
    let center = Vec3::from(cfg.bs_position);
    let boresight = match cfg.bs_boresight {
        Some(b) => Vec3::from(b),
        None => frame.origin - center,
    };
    let b = unit(boresight).ok_or_else(|| Error::Scene("BS boresight is degenerate".into()))?;
    let up = Vec3::z();
    let a1 = unit(b.cross(&up)).unwrap_or_else(Vec3::x);
    let a2 = unit(a1.cross(&b)).unwrap_or_else(Vec3::y);
    let (rows, cols) = (cfg.bs_rows, cfg.bs_cols);
    let mut out = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let p = center
                + a1 * ((c as f64 - (cols as f64 - 1.0) / 2.0) * spacing)
                + a2 * ((r as f64 - (rows as f64 - 1.0) / 2.0) * spacing);
            out.push(frame.to_local(&p));
        }
    }
    Ok(out)
}

/// Covers the wall minus the RIS with cells on the RIS lattice, clipping at the wall edge.
fn tile_wall(wall: [f64; 4], ris: [f64; 2], pitch: [f64; 2], ris_cells: (usize, usize)) -> Vec<Patch> {
    let (x0, y0) = (-ris[0] / 2.0, -ris[1] / 2.0);
    let [dx, dy] = pitch;
    let i_lo = ((wall[0] - x0) / dx).floor() as i64;
    let i_hi = ((wall[1] - x0) / dx).ceil() as i64;
    let j_lo = ((wall[2] - y0) / dy).floor() as i64;
    let j_hi = ((wall[3] - y0) / dy).ceil() as i64;
    let min_extent = 1e-9;
    let mut out = Vec::new();
    for j in j_lo..j_hi {
        for i in i_lo..i_hi {
            if (0..ris_cells.0 as i64).contains(&i) && (0..ris_cells.1 as i64).contains(&j) {
                continue;
            }
            let cx0 = (x0 + i as f64 * dx).max(wall[0]);
            let cx1 = (x0 + (i + 1) as f64 * dx).min(wall[1]);
            let cy0 = (y0 + j as f64 * dy).max(wall[2]);
            let cy1 = (y0 + (j + 1) as f64 * dy).min(wall[3]);
            let (sx, sy) = (cx1 - cx0, cy1 - cy0);
            if sx <= min_extent * dx || sy <= min_extent * dy {
                continue;
            }
            out.push(Patch {
                center: Vec3::new((cx0 + cx1) / 2.0, (cy0 + cy1) / 2.0, 0.0),
                size: [sx, sy],
                normal: Vec3::z(),
                cell: (i, j),
            });
        }
    }
    out
}

/// User positions (global coordinates) at one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct UserSnapshot {
    /// 1-based time-step index.
    pub step: usize,
    pub positions: Vec<Vec3>,
}

impl UserSnapshot {
    pub fn num_users(&self) -> usize {
        self.positions.len()
    }

    /// Checks the snapshot against the user area, height and minimum separation.
    pub fn validate(&self, area: &UserArea, height: f64, min_separation: f64) -> Result<()> {
        if self.positions.is_empty() {
            return Err(Error::Trajectory(format!("step {} has no users", self.step)));
        }
        for (l, p) in self.positions.iter().enumerate() {
            if !p.iter().all(|v| v.is_finite()) {
                return Err(Error::Trajectory(format!("step {} user {}: non-finite position", self.step, l + 1)));
            }
            if !area.contains(p.x, p.y) {
                return Err(Error::Trajectory(format!(
                    "step {} user {}: ({}, {}) outside the user area",
                    self.step,
                    l + 1,
                    p.x,
                    p.y
                )));
            }
            if (p.z - height).abs() > 1e-6 {
                return Err(Error::Trajectory(format!(
                    "step {} user {}: height {} differs from user height {height}",
                    self.step,
                    l + 1,
                    p.z
                )));
            }
        }
        for a in 0..self.positions.len() {
            for b in a + 1..self.positions.len() {
                let d = (self.positions[a] - self.positions[b]).norm();
                if d < min_separation || d == 0.0 {
                    return Err(Error::Trajectory(format!(
                        "step {}: users {} and {} are {d} m apart (minimum {min_separation})",
                        self.step,
                        a + 1,
                        b + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper_like() -> SceneConfig {
        SceneConfig { bs_rows: 4, bs_cols: 4, ..SceneConfig::default() }
    }

    #[test]
    fn full_size_counts() {
        let scene = build_scene(&SceneConfig::default()).unwrap();
        assert_eq!(scene.num_elements(), 900);
        assert_eq!(scene.num_ris(), 2025);
        assert!((scene.ris_patches[0].size[0] - 1.93 / 45.0).abs() < 1e-15);
        assert!((scene.k0 - 73.354_575_768).abs() < 1e-6);
    }

    #[test]
    fn tiling_areas() {
        let cfg = SceneConfig { wall_offset_m: [0.7, -1.1], ..paper_like() };
        let scene = build_scene(&cfg).unwrap();
        let ris: f64 = scene.ris_patches.iter().map(Patch::area).sum();
        assert!((ris - 1.93 * 1.93).abs() / (1.93 * 1.93) < 1e-9);
        let wall: f64 = scene.wall_patches.iter().map(Patch::area).sum();
        let expect = 6.0 * 7.0 - 1.93 * 1.93;
        assert!((wall - expect).abs() / expect < 1e-9, "{wall} vs {expect}");
        // no wall patch overlaps the RIS
        for p in &scene.wall_patches {
            let inside = p.center.x.abs() < 1.93 / 2.0 && p.center.y.abs() < 1.93 / 2.0;
            assert!(!inside);
        }
    }

    #[test]
    fn ris_grid_is_symmetric() {
        let scene = build_scene(&paper_like()).unwrap();
        for p in &scene.ris_patches {
            let mirrored = Vec3::new(-p.center.x, -p.center.y, 0.0);
            assert!(scene.ris_patches.iter().any(|q| (q.center - mirrored).norm() < 1e-9));
        }
    }

    #[test]
    fn ris_larger_than_wall_is_rejected() {
        let cfg = SceneConfig { ris_width_m: 2.0, ris_height_m: 2.0, wall_width_m: 1.0, wall_height_m: 1.0, ..paper_like() };
        assert!(matches!(build_scene(&cfg), Err(Error::Scene(_))));
    }

    #[test]
    fn non_positive_dimensions_are_rejected() {
        for cfg in [
            SceneConfig { f0_hz: 0.0, ..paper_like() },
            SceneConfig { ris_width_m: -1.0, ..paper_like() },
            SceneConfig { bs_rows: 0, ..paper_like() },
        ] {
            assert!(build_scene(&cfg).is_err());
        }
    }

    #[test]
    fn deterministic_build() {
        let a = build_scene(&paper_like()).unwrap();
        let b = build_scene(&paper_like()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn frame_round_trip_and_units() {
        let scene = build_scene(&paper_like()).unwrap();
        assert!((scene.polarization.norm() - 1.0).abs() < 1e-12);
        assert!((scene.ris_patches[0].normal.norm() - 1.0).abs() < 1e-12);
        let g = Vec3::new(3.0, 17.0, 1.5);
        let back = scene.frame.to_global(&scene.frame.to_local(&g));
        assert!((back - g).norm() < 1e-12);
        // the BS is in front of the wall
        assert!(scene.bs_elements.iter().all(|e| e.z > 0.0));
    }

    #[test]
    fn bs_array_faces_ris_with_half_wave_spacing() {
        let scene = build_scene(&paper_like()).unwrap();
        let lambda = units::wavelength(3.5e9);
        let d = (scene.bs_elements[1] - scene.bs_elements[0]).norm();
        assert!((d - lambda / 2.0).abs() < 1e-12);
        let centroid: Vec3 = scene.bs_elements.iter().sum::<Vec3>() / 16.0;
        let to_ris = (-centroid).normalize();
        let across = (scene.bs_elements[1] - scene.bs_elements[0]).normalize();
        assert!(across.dot(&to_ris).abs() < 1e-12);
    }

    #[test]
    fn snapshot_validation() {
        let area = UserArea::default();
        let ok = UserSnapshot { step: 1, positions: vec![Vec3::new(0.0, 20.0, 1.5), Vec3::new(5.0, 30.0, 1.5)] };
        assert!(ok.validate(&area, 1.5, 0.1).is_ok());
        let close = UserSnapshot { step: 1, positions: vec![Vec3::new(0.0, 20.0, 1.5), Vec3::new(0.05, 20.0, 1.5)] };
        assert!(close.validate(&area, 1.5, 0.1).is_err());
        let outside = UserSnapshot { step: 1, positions: vec![Vec3::new(100.0, 20.0, 1.5)] };
        assert!(outside.validate(&area, 1.5, 0.1).is_err());
    }
}
