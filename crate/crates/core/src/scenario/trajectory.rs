use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::{UserArea, UserSnapshot, Vec3};
use crate::seeds;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryKind {
    Aperiodic,
    Periodic { period: usize },
    Imported,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub kind: TrajectoryKind,
    pub snapshots: Vec<UserSnapshot>,
}

/// Pedestrian motion limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Mobility {
    /// Maximum speed (m/s).
    pub v_max: f64,
    /// Time between steps (s).
    pub dt: f64,
}

impl Default for Mobility {
    fn default() -> Self {
        Self { v_max: 1.5, dt: 1.0 }
    }
}

impl Mobility {
    pub fn max_step(&self) -> f64 {
        self.v_max * self.dt
    }
}

/// Where users may stand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ground {
    pub area: UserArea,
    pub height: f64,
    pub min_separation: f64,
}

impl Ground {
    fn point(&self, x: f64, y: f64) -> Vec3 {
        Vec3::new(x, y, self.height)
    }

    fn random_point(&self, rng: &mut seeds::Rng) -> Vec3 {
        let a = &self.area;
        self.point(rng.gen_range(a.x_min..=a.x_max), rng.gen_range(a.y_min..=a.y_max))
    }

    fn too_close(&self, p: &Vec3, others: &[Vec3]) -> bool {
        others.iter().any(|o| (p - o).norm() < self.min_separation.max(f64::MIN_POSITIVE))
    }
}

const PLACEMENT_TRIES: usize = 1000;

impl Trajectory {
    pub fn num_steps(&self) -> usize {
        self.snapshots.len()
    }

    pub fn num_users(&self) -> usize {
        self.snapshots.first().map_or(0, UserSnapshot::num_users)
    }

    /// Largest displacement of any user between consecutive steps.
    pub fn max_displacement(&self) -> f64 {
        self.snapshots
            .windows(2)
            .flat_map(|w| w[0].positions.iter().zip(&w[1].positions).map(|(a, b)| (a - b).norm()))
            .fold(0.0, f64::max)
    }
}

/// Random-waypoint walks: every user heads to a uniform waypoint at full
/// speed and draws a new one on arrival. A user whose move would come closer
/// than the minimum separation to another user waits in place.
pub fn gen_aperiodic(
    ground: &Ground,
    num_users: usize,
    num_steps: usize,
    mobility: &Mobility,
    rng: &mut seeds::Rng,
) -> Result<Trajectory> {
    if num_users == 0 || num_steps == 0 {
        return Err(Error::Trajectory("need at least one user and one step".into()));
    }
    let mut positions: Vec<Vec3> = Vec::with_capacity(num_users);
    for _ in 0..num_users {
        let p = (0..PLACEMENT_TRIES)
            .map(|_| ground.random_point(rng))
            .find(|p| !ground.too_close(p, &positions))
            .ok_or_else(|| Error::Trajectory("cannot place users with the requested separation".into()))?;
        positions.push(p);
    }
    let mut waypoints: Vec<Vec3> = (0..num_users).map(|_| ground.random_point(rng)).collect();
    let mut snapshots = vec![UserSnapshot { step: 1, positions: positions.clone() }];
    let reach = mobility.max_step();
    for step in 2..=num_steps {
        for l in 0..num_users {
            let here = positions[l];
            let to_go = waypoints[l] - here;
            let dist = to_go.norm();
            let (next, arrived) = if dist <= reach { (waypoints[l], true) } else { (here + to_go * (reach / dist), false) };
            let others: Vec<Vec3> = positions.iter().enumerate().filter(|&(k, _)| k != l).map(|(_, p)| *p).collect();
            if next != here && ground.too_close(&next, &others) {
                continue;
            }
            positions[l] = next;
            if arrived {
                waypoints[l] = ground.random_point(rng);
            }
        }
        snapshots.push(UserSnapshot { step, positions: positions.clone() });
    }
    Ok(Trajectory { kind: TrajectoryKind::Aperiodic, snapshots })
}

/// A closed polygon through random waypoints, shrunk about its centroid so
/// that one lap takes at most `period` steps, sampled at equal arc length.
fn random_loop(ground: &Ground, period: usize, mobility: &Mobility, rng: &mut seeds::Rng) -> Vec<Vec3> {
    let corners = rng.gen_range(3..=5);
    let mut pts: Vec<Vec3> = (0..corners).map(|_| ground.random_point(rng)).collect();
    let centroid = pts.iter().sum::<Vec3>() / corners as f64;
    let perimeter = |pts: &[Vec3]| (0..pts.len()).map(|i| (pts[(i + 1) % pts.len()] - pts[i]).norm()).sum::<f64>();
    let budget = mobility.max_step() * period as f64;
    let len = perimeter(&pts);
    if len > budget {
        let shrink = budget / len;
        pts.iter_mut().for_each(|p| *p = centroid + (*p - centroid) * shrink);
    }
    let len = perimeter(&pts);
    let mut out = Vec::with_capacity(period);
    for k in 0..period {
        let mut s = len * k as f64 / period as f64;
        let mut i = 0;
        loop {
            let edge = pts[(i + 1) % corners] - pts[i];
            let e = edge.norm();
            if s <= e || i == corners - 1 {
                let t = if e > 0.0 { (s / e).min(1.0) } else { 0.0 };
                out.push(pts[i] + edge * t);
                break;
            }
            s -= e;
            i += 1;
        }
    }
    out
}

/// Every user repeats its own closed loop with the given period.
pub fn gen_periodic(
    ground: &Ground,
    num_users: usize,
    num_steps: usize,
    period: usize,
    mobility: &Mobility,
    rng: &mut seeds::Rng,
) -> Result<Trajectory> {
    if period < 2 {
        return Err(Error::Trajectory(format!("period must be at least 2, got {period}")));
    }
    if period > num_steps {
        return Err(Error::Trajectory(format!("period {period} exceeds the {num_steps} steps")));
    }
    if num_users == 0 {
        return Err(Error::Trajectory("need at least one user".into()));
    }
    let mut loops: Vec<Vec<Vec3>> = Vec::with_capacity(num_users);
    for _ in 0..num_users {
        let lp = (0..PLACEMENT_TRIES)
            .map(|_| random_loop(ground, period, mobility, rng))
            .find(|lp| {
                loops.iter().all(|other| (0..period).all(|k| !ground.too_close(&lp[k], &[other[k]])))
            })
            .ok_or_else(|| Error::Trajectory("cannot build loops with the requested separation".into()))?;
        loops.push(lp);
    }
    let snapshots = (1..=num_steps)
        .map(|step| UserSnapshot { step, positions: loops.iter().map(|lp| lp[(step - 1) % period]).collect() })
        .collect();
    Ok(Trajectory { kind: TrajectoryKind::Periodic { period }, snapshots })
}

pub const TRAJECTORY_HEADER: [&str; 5] = ["step", "user", "x", "y", "z"];

/// Writes `step,user,x,y,z` rows (1-based step and user, meters).
pub fn export_trajectory<W: Write>(traj: &Trajectory, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(TRAJECTORY_HEADER)?;
    for snap in &traj.snapshots {
        for (l, p) in snap.positions.iter().enumerate() {
            out.write_record([
                snap.step.to_string(),
                (l + 1).to_string(),
                p.x.to_string(),
                p.y.to_string(),
                p.z.to_string(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads a trajectory CSV. Lines starting with `#` are ignored. Steps must be
/// contiguous from 1 and list the same users `1..L`; moves faster than
/// `mobility` allows are logged, not rejected.
pub fn import_trajectory<R: Read>(r: R, mobility: &Mobility) -> Result<Trajectory> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(r);
    let header = reader.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != TRAJECTORY_HEADER {
        return Err(Error::Trajectory(format!("expected header step,user,x,y,z, got {}", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut snapshots: Vec<UserSnapshot> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(i + 2, |p| p.line() as usize);
        let bad = |what: &str| Error::Trajectory(format!("line {line}: {what}"));
        if rec.len() != 5 {
            return Err(bad(&format!("expected 5 fields, got {}", rec.len())));
        }
        let int = |k: usize| rec[k].parse::<usize>().map_err(|_| bad(&format!("invalid {} '{}'", TRAJECTORY_HEADER[k], &rec[k])));
        let num = |k: usize| {
            rec[k]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(&format!("invalid {} '{}'", TRAJECTORY_HEADER[k], &rec[k])))
        };
        let (step, user) = (int(0)?, int(1)?);
        let p = Vec3::new(num(2)?, num(3)?, num(4)?);
        match snapshots.last_mut() {
            Some(s) if s.step == step => {
                if user != s.positions.len() + 1 {
                    return Err(bad(&format!("expected user {}, got {user}", s.positions.len() + 1)));
                }
                s.positions.push(p);
            }
            last => {
                let expected = last.map_or(1, |s| s.step + 1);
                if step != expected {
                    return Err(bad(&format!("expected step {expected}, got {step}")));
                }
                if user != 1 {
                    return Err(bad(&format!("step {step} must start with user 1")));
                }
                snapshots.push(UserSnapshot { step, positions: vec![p] });
            }
        }
    }
    let Some(first) = snapshots.first() else {
        return Err(Error::Trajectory("trajectory file has no rows".into()));
    };
    let users = first.num_users();
    if let Some(s) = snapshots.iter().find(|s| s.num_users() != users) {
        return Err(Error::Trajectory(format!("step {} has {} users, step 1 has {users}", s.step, s.num_users())));
    }
    let traj = Trajectory { kind: TrajectoryKind::Imported, snapshots };
    let fastest = traj.max_displacement();
    if fastest > mobility.max_step() * (1.0 + 1e-9) {
        log::warn!("imported trajectory moves {fastest:.3} m in one step, more than {:.3} m", mobility.max_step());
    }
    Ok(traj)
}
