use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hte::{IterationLog, IterationRecord};
use crate::profile::RadialProfile;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerronOptions {
    pub tau_nodes: usize,
    pub t_nodes: usize,
    /// Left edge of the sheet; defaults to twice the leftmost breakpoint (at most `-1`).
    pub tau_min: Option<f64>,
    /// Sweeps stop once a full pass changes no value by more than this.
    pub tolerance: f64,
    pub max_passes: usize,
    /// Largest `|di|` of the lattice directions `(di, dj)` swept.
    pub max_direction: i64,
    /// Largest `dj` of the lattice directions.
    pub max_direction_t: i64,
}

impl Default for PerronOptions {
    fn default() -> Self {
        PerronOptions { tau_nodes: 512, t_nodes: 64, tau_min: None, tolerance: 1e-7, max_passes: 20_000, max_direction: 32, max_direction_t: 4 }
    }
}

/// Discrete maximal envelope `Psi(tau_i, t_j)` on a uniform grid of the `(tau, t)` plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerronSheet {
    pub taus: Vec<f64>,
    pub ts: Vec<f64>,
    /// Row-major, one row per `t`.
    pub values: Vec<f64>,
    pub passes: usize,
    /// Every value lies between `max(u0 - t|u1|, u1 - (1-t)|u0|)` and `(1-t) u0 + t u1`.
    pub bounds_ok: bool,
    /// Every `t`-row is convex and nondecreasing in `tau`.
    pub slices_ok: bool,
}

impl PerronSheet {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.taus.len() + i]
    }

    pub fn row(&self, j: usize) -> &[f64] {
        let n = self.taus.len();
        &self.values[j * n..(j + 1) * n]
    }

    /// Largest gap to a family of profiles evaluated at the sheet's `t` values.
    pub fn sup_distance(&self, mut family: impl FnMut(f64) -> Result<RadialProfile>) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (j, &t) in self.ts.iter().enumerate() {
            let g = family(t)?;
            for (i, &tau) in self.taus.iter().enumerate() {
                worst = worst.max((g.value(tau) - self.value(i, j)).abs());
            }
        }
        Ok(worst)
    }

    /// CSV matrix: header row of `tau` values, then one row per `t` led by `t`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for tau in &self.taus {
            out.push_str(&format!(",{tau}"));
        }
        out.push('\n');
        for (j, t) in self.ts.iter().enumerate() {
            out.push_str(&t.to_string());
            for v in self.row(j) {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Replaces `ys` by its lower convex envelope over equally spaced abscissae; returns the largest
/// decrease.
fn lower_envelope(ys: &mut [f64], hull: &mut Vec<usize>) -> f64 {
    hull.clear();
    for k in 0..ys.len() {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (b - a) as f64 * (ys[k] - ys[a]) - (ys[b] - ys[a]) * (k - a) as f64;
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(k);
    }
    let mut change: f64 = 0.0;
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        let slope = (ys[b] - ys[a]) / (b - a) as f64;
        for k in a + 1..b {
            let v = ys[a] + slope * (k - a) as f64;
            if v < ys[k] {
                change = change.max(ys[k] - v);
                ys[k] = v;
            }
        }
    }
    change
}

/// Radial Perron construction of the geodesic joining `u0` and `u1`.
///
/// The sheet starts at the upper barrier `(1-t) u0 + t u1`, which carries the boundary data on
/// all four edges, and is lowered by repeated lower-convex-envelope passes along rows, columns
/// and lattice lines until a full pass moves nothing by more than the tolerance.
pub fn perron_geodesic(u0: &RadialProfile, u1: &RadialProfile, options: &PerronOptions) -> Result<PerronSheet> {
    if u0.coordinate() != u1.coordinate() {
        return Err(Error::Coordinate(format!("{:?} vs {:?}", u0.coordinate(), u1.coordinate())));
    }
    let (nx, nt) = (options.tau_nodes, options.t_nodes);
    if nx < 3 || nt < 3 {
        return Err(Error::Domain("the Perron grid needs at least 3 nodes per axis".into()));
    }
    let first = u0.breakpoints().first().into_iter().chain(u1.breakpoints().first()).fold(-0.5f64, |a, &b| a.min(b));
    let tau_min = options.tau_min.unwrap_or(2.0 * first);
    if !(tau_min < 0.0) {
        return Err(Error::Domain(format!("left edge {tau_min} must be negative")));
    }
    let taus: Vec<f64> = (0..nx).map(|i| tau_min * (1.0 - i as f64 / (nx - 1) as f64)).collect();
    let ts: Vec<f64> = (0..nt).map(|j| j as f64 / (nt - 1) as f64).collect();
    let a: Vec<f64> = taus.iter().map(|&x| u0.value(x)).collect();
    let b: Vec<f64> = taus.iter().map(|&x| u1.value(x)).collect();
    let mut values = vec![0.0; nx * nt];
    for (j, &t) in ts.iter().enumerate() {
        for i in 0..nx {
            values[j * nx + i] = (1.0 - t) * a[i] + t * b[i];
        }
    }

    let mut directions: Vec<(i64, i64)> = vec![(1, 0), (0, 1)];
    for dj in 1..=options.max_direction_t {
        for di in -options.max_direction..=options.max_direction {
            if di != 0 && gcd(di, dj) == 1 {
                directions.push((di, dj));
            }
        }
    }
    let mut lines: Vec<Vec<usize>> = Vec::new();
    for &(di, dj) in &directions {
        for j in 0..nt as i64 {
            for i in 0..nx as i64 {
                let (pi, pj) = (i - di, j - dj);
                let inside = |x: i64, y: i64| x >= 0 && y >= 0 && x < nx as i64 && y < nt as i64;
                if inside(pi, pj) {
                    continue;
                }
                let mut line = Vec::new();
                let (mut x, mut y) = (i, j);
                while inside(x, y) {
                    line.push(y as usize * nx + x as usize);
                    x += di;
                    y += dj;
                }
                if line.len() >= 3 {
                    lines.push(line);
                }
            }
        }
    }

    let mut log = IterationLog::default();
    let mut buffer = Vec::new();
    let mut hull = Vec::new();
    let mut passes = 0;
    loop {
        let mut change: f64 = 0.0;
        for line in &lines {
            buffer.clear();
            buffer.extend(line.iter().map(|&k| values[k]));
            let c = lower_envelope(&mut buffer, &mut hull);
            if c > 0.0 {
                change = change.max(c);
                for (&k, &v) in line.iter().zip(&buffer) {
                    values[k] = v;
                }
            }
        }
        passes += 1;
        log.records.push(IterationRecord { iteration: passes, residual: change, sup_change: change, j: 0.0, energy: 0.0 });
        if change < options.tolerance {
            break;
        }
        if passes >= options.max_passes {
            return Err(Error::Iteration {
                message: format!("Perron sweep still moving by {change:e} after {passes} passes"),
                log: Box::new(log),
            });
        }
    }

    let scale = u0.sup_norm().max(u1.sup_norm()).max(1.0);
    let slack = 1e-9 * scale;
    let (n0, n1) = (u0.sup_norm(), u1.sup_norm());
    let mut bounds_ok = true;
    for (j, &t) in ts.iter().enumerate() {
        for i in 0..nx {
            let v = values[j * nx + i];
            let lower = (a[i] - t * n1).max(b[i] - (1.0 - t) * n0);
            let upper = (1.0 - t) * a[i] + t * b[i];
            bounds_ok &= v >= lower - slack && v <= upper + slack;
        }
    }
    let slices_ok = (0..nt).all(|j| {
        let row = &values[j * nx..(j + 1) * nx];
        row.windows(2).all(|w| w[1] >= w[0] - slack) && row.windows(3).all(|w| w[0] + w[2] - 2.0 * w[1] >= -slack)
    });
    Ok(PerronSheet { taus, ts, values, passes, bounds_ok, slices_ok })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coords::Coordinate;

    #[test]
    fn equal_endpoints_give_a_constant_sheet() {
        let c = Coordinate::new(2, 2).unwrap();
        let u = RadialProfile::new(c, vec![-1.0, -0.4], vec![0.0, 0.5, 1.5]).unwrap();
        let opts = PerronOptions { tau_nodes: 64, t_nodes: 9, ..Default::default() };
        let sheet = perron_geodesic(&u, &u, &opts).unwrap();
        let gap = sheet.sup_distance(|_| Ok(u.clone())).unwrap();
        assert!(gap < 1e-12);
        assert!(sheet.bounds_ok && sheet.slices_ok);
    }

    #[test]
    fn envelope_of_equally_spaced_points() {
        let mut ys = vec![0.0, 3.0, 1.0, 2.0, 0.0];
        let mut hull = Vec::new();
        let change = lower_envelope(&mut ys, &mut hull);
        assert_eq!(ys, vec![0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(change, 3.0);
    }
}
