use nalgebra::DMatrix;

use super::cascade::{cascaded_matrix, far_fields};
use super::incidence::incidence_matrix;
use super::radiation::RadiationMatrix;
use super::table::SusceptibilityTable;
use super::RisConfiguration;
use crate::error::{Error, Result};
use crate::scene::{SceneGeometry, Vec3};
use crate::C64;

/// Received power of one beam sampled on a regular grid over the user area.
#[derive(Debug, Clone, PartialEq)]
pub struct FootprintGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Power (W), row-major with `x` fastest: `power[iy * xs.len() + ix]`.
    pub power: Vec<f64>,
}

impl FootprintGrid {
    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.power[iy * self.xs.len() + ix]
    }

    /// `(x, y, power)` in row-major order.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.ys
            .iter()
            .enumerate()
            .flat_map(move |(iy, &y)| self.xs.iter().enumerate().map(move |(ix, &x)| (x, y, self.at(ix, iy))))
    }
}

/// Evenly spaced samples including both end points.
fn samples(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// `|F_b|²` of beam `beam` over an `nx × ny` grid spanning the user area at user height.
pub fn footprint(
    scene: &SceneGeometry,
    table: &SusceptibilityTable,
    config: &RisConfiguration,
    weights: &DMatrix<C64>,
    nx: usize,
    ny: usize,
    beam: usize,
) -> Result<FootprintGrid> {
    if nx < 2 || ny < 2 {
        return Err(Error::Param(format!("footprint grid must be at least 2x2, got {nx}x{ny}")));
    }
    if beam >= weights.ncols() {
        return Err(Error::dim(format!("beam {beam} out of {}", weights.ncols())));
    }
    let area = &scene.user_area;
    let xs = samples(area.x_min, area.x_max, nx);
    let ys = samples(area.y_min, area.y_max, ny);
    let points: Vec<Vec3> = ys.iter().flat_map(|&y| xs.iter().map(move |&x| scene.user_point(x, y))).collect();
    let incidence = incidence_matrix(scene);
    let radiation = RadiationMatrix::new(scene, &incidence.nodes, &points);
    let channel = cascaded_matrix(scene, table, config, &incidence, &radiation)?;
    let column = weights.columns(beam, 1).into_owned();
    let field = far_fields(&channel, &column)?;
    let power = field.iter().map(|f| f.norm_sqr()).collect();
    Ok(FootprintGrid { xs, ys, power })
}
