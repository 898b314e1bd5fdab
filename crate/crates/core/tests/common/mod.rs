#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use merisc::config::Setup;
use merisc::em::{calibrate_state_table, PhaseLaw, RisConfiguration, StateEntry, SusceptibilityTable, WallModel};
use merisc::scene::{build_scene, SceneConfig, SceneGeometry, UserArea, UserSnapshot, Vec3};
use merisc::C64;
use nalgebra::DMatrix;

pub fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

pub fn desk_setup(seed: u64) -> Setup {
    Setup::load(&configs_dir().join("paper_desk.toml"), seed).unwrap()
}

/// Four one-bit atoms, a 2x2 BS array and two users.
pub fn tiny_scene_config() -> SceneConfig {
    SceneConfig {
        bs_rows: 2,
        bs_cols: 2,
        bs_position: [-2.0, 3.0, 2.5],
        ris_rows: 2,
        ris_cols: 2,
        ris_width_m: 0.0857,
        ris_height_m: 0.0857,
        wall_width_m: 0.4,
        wall_height_m: 0.4,
        surface_origin: [0.0, 0.0, 2.0],
        user_area: UserArea { x_min: -3.0, x_max: 3.0, y_min: 2.0, y_max: 6.0 },
        min_separation_m: 0.5,
        ..SceneConfig::default()
    }
}

pub fn tiny() -> (SceneGeometry, SusceptibilityTable, UserSnapshot) {
    let cfg = tiny_scene_config();
    let scene = build_scene(&cfg).unwrap();
    let table = calibrate_state_table(1, 0.9, PhaseLaw::default(), cfg.f0_hz, &WallModel::default()).unwrap();
    let snap = UserSnapshot { step: 1, positions: vec![Vec3::new(-1.0, 4.0, 1.5), Vec3::new(1.5, 3.0, 1.5)] };
    (scene, table, snap)
}

pub fn desk_config_text() -> String {
    std::fs::read_to_string(configs_dir().join("paper_desk.toml")).unwrap()
}

pub fn parse_desk(extra: &str) -> merisc::config::RunConfig {
    let text = format!("{}\n{extra}", desk_config_text());
    merisc::config::parse_config_str(&text, &configs_dir()).unwrap()
}

/// Cascaded channel written out element by element from the field model:
/// scalar incident field along the BS polarization at every patch centroid,
/// surface currents from the diagonal susceptibilities, and the co-polar
/// component of the radiated far field at each user.
pub fn oracle_channel(
    scene: &SceneGeometry,
    table: &SusceptibilityTable,
    config: &RisConfiguration,
    users: &[Vec3],
) -> DMatrix<C64> {
    let k0 = scene.k0;
    let eta = scene.eta0;
    let chi = scene.polarization;
    let j = C64::new(0.0, 1.0);
    let mut patches: Vec<(Vec3, f64, StateEntry)> = Vec::new();
    for (p, patch) in scene.ris_patches.iter().enumerate() {
        patches.push((patch.center, patch.size[0] * patch.size[1], *table.entry(config.0[p]).unwrap()));
    }
    for patch in &scene.wall_patches {
        patches.push((patch.center, patch.size[0] * patch.size[1], table.wall));
    }
    DMatrix::from_fn(users.len(), scene.bs_elements.len(), |l, m| {
        let r = scene.frame.to_local(&users[l]);
        let dist = r.norm();
        let rh = r / dist;
        let ew = (rh * chi.dot(&rh) - chi) * eta;
        let hw = chi.cross(&rh);
        let src = scene.bs_elements[m];
        let mut sum = C64::new(0.0, 0.0);
        for (pos, area, k) in &patches {
            let d = (pos - src).norm();
            let g = (-j * k0 * d).exp() / (4.0 * PI * d);
            let kh = (pos - src) / d;
            let h = kh.cross(&chi) / eta;
            // ω ε0 = k0 / η0 and ω μ0 = k0 η0
            let je = [j * (k0 / eta) * k.ke[0] * g * chi.x, j * (k0 / eta) * k.ke[1] * g * chi.y];
            let jh = [j * (k0 * eta) * k.kh[0] * g * h.x, j * (k0 * eta) * k.kh[1] * g * h.y];
            let proj = je[0] * ew.x + je[1] * ew.y + jh[0] * hw.x + jh[1] * hw.y;
            sum += *area * (j * k0 * rh.dot(pos)).exp() * proj;
        }
        j * k0 / (4.0 * PI) * (-j * k0 * dist).exp() / dist * sum
    })
}

/// Worst-user throughput from the oracle channel, with zero-forcing through
/// the normal equations `Υᴴ (Υ Υᴴ)⁻¹` and equal power per beam.
pub fn oracle_worst(channel: &DMatrix<C64>, total_power: f64, noise_power: f64) -> f64 {
    let l = channel.nrows();
    let h = channel.adjoint();
    let gram = channel * &h;
    let mut w = h * gram.try_inverse().expect("full row rank");
    for mut c in w.column_iter_mut() {
        let n = c.norm();
        c *= C64::from((total_power / l as f64).sqrt() / n);
    }
    let f = channel * w;
    (0..l)
        .map(|u| {
            let s = f[(u, u)].norm_sqr();
            let i: f64 = (0..l).filter(|&b| b != u).map(|b| f[(u, b)].norm_sqr()).sum();
            (1.0 + s / (i + l as f64 * noise_power / total_power)).log2()
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn all_configs(patches: usize, states: u16) -> Vec<RisConfiguration> {
    let mut out = vec![RisConfiguration(Vec::new())];
    for _ in 0..patches {
        out = out
            .into_iter()
            .flat_map(|c| {
                (1..=states).map(move |s| {
                    let mut v = c.0.clone();
                    v.push(s);
                    RisConfiguration(v)
                })
            })
            .collect();
    }
    out
}

pub fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
