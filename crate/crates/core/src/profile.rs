use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::coords::Coordinate;
use crate::error::{Error, Result};

/// Convex nondecreasing piecewise-linear function of a radial coordinate, anchored at `g(0) = 0`.
///
/// `slopes[i]` is the slope on `(breakpoints[i-1], breakpoints[i])`, with `slopes[0]` on the
/// left ray and the last slope on `(breakpoints[K-1], 0)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileData", into = "ProfileData")]
pub struct RadialProfile {
    coordinate: Coordinate,
    breakpoints: Vec<f64>,
    slopes: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ProfileData {
    coordinate: Coordinate,
    breakpoints: Vec<f64>,
    slopes: Vec<f64>,
}

impl TryFrom<ProfileData> for RadialProfile {
    type Error = Error;

    fn try_from(d: ProfileData) -> Result<Self> {
        Coordinate::new(d.coordinate.n, d.coordinate.q)?;
        RadialProfile::new(d.coordinate, d.breakpoints, d.slopes)
    }
}

impl From<RadialProfile> for ProfileData {
    fn from(g: RadialProfile) -> Self {
        ProfileData { coordinate: g.coordinate, breakpoints: g.breakpoints, slopes: g.slopes }
    }
}

fn accumulate(breakpoints: &[f64], slopes: &[f64]) -> Vec<f64> {
    let k = breakpoints.len();
    let mut vals = vec![0.0; k];
    let mut right = 0.0;
    let mut right_value = 0.0;
    for i in (0..k).rev() {
        let v = right_value - slopes[i + 1] * (right - breakpoints[i]);
        vals[i] = v;
        right = breakpoints[i];
        right_value = v;
    }
    vals
}

/// Slope-change size below which two adjacent pieces are treated as one line.
const MERGE_REL: f64 = 1e-13;

impl RadialProfile {
    /// Validated profile. Breakpoints with equal slopes on both sides are dropped.
    pub fn new(coordinate: Coordinate, breakpoints: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        if slopes.len() != breakpoints.len() + 1 {
            return Err(Error::Domain(format!(
                "{} breakpoints need {} slopes, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                slopes.len()
            )));
        }
        if breakpoints.iter().chain(slopes.iter()).any(|x| !x.is_finite()) {
            return Err(Error::Domain("breakpoints and slopes must be finite".into()));
        }
        if let Some(&last) = breakpoints.last() {
            if last > 0.0 {
                return Err(Error::Boundary(format!("breakpoint {last} lies outside the ball")));
            }
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("breakpoints must be strictly increasing".into()));
        }
        if slopes[0] < 0.0 {
            return Err(Error::Convexity(format!("leftmost slope {} is negative (decreasing profile)", slopes[0])));
        }
        if let Some(i) = slopes.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::Convexity(format!(
                "slope drops from {} to {} at breakpoint {}",
                slopes[i], slopes[i + 1], breakpoints[i]
            )));
        }
        let mut bps = Vec::with_capacity(breakpoints.len());
        let mut sls = vec![slopes[0]];
        for (i, &b) in breakpoints.iter().enumerate() {
            if slopes[i + 1] != *sls.last().unwrap() {
                bps.push(b);
                sls.push(slopes[i + 1]);
            }
        }
        let values = accumulate(&bps, &sls);
        Ok(RadialProfile { coordinate, breakpoints: bps, slopes: sls, values })
    }

    pub fn zero(coordinate: Coordinate) -> Self {
        RadialProfile { coordinate, breakpoints: vec![], slopes: vec![0.0], values: vec![] }
    }

    /// `max(slope * tau, level)` for `slope > 0` and `level < 0`.
    pub fn kink(coordinate: Coordinate, slope: f64, level: f64) -> Result<Self> {
        if !(slope > 0.0) || !(level < 0.0) {
            return Err(Error::Domain(format!("kink needs slope > 0 and level < 0, got {slope}, {level}")));
        }
        RadialProfile::new(coordinate, vec![level / slope], vec![0.0, slope])
    }

    pub fn coordinate(&self) -> Coordinate {
        self.coordinate
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn is_zero(&self) -> bool {
        self.breakpoints.is_empty() && self.slopes[0] == 0.0
    }

    /// True when the leftmost slope vanishes, so the profile is bounded.
    pub fn is_bounded(&self) -> bool {
        self.slopes[0] == 0.0
    }

    pub fn last_slope(&self) -> f64 {
        *self.slopes.last().unwrap()
    }

    /// Values at the breakpoints, accumulated from the anchor at zero.
    pub fn breakpoint_values(&self) -> Vec<f64> {
        self.values.clone()
    }

    /// Exact piecewise-linear value. Arguments above zero extend the last piece.
    pub fn value(&self, tau: f64) -> f64 {
        if tau == f64::NEG_INFINITY {
            return self.value_at_minus_infinity();
        }
        let idx = self.breakpoints.partition_point(|&b| b <= tau);
        match self.values.get(idx) {
            Some(&v) => v - self.slopes[idx] * (self.breakpoints[idx] - tau),
            None => -self.slopes[idx] * (0.0 - tau),
        }
    }

    /// Limit at the center of the ball; `-inf` when the leftmost slope is positive.
    pub fn value_at_minus_infinity(&self) -> f64 {
        if self.slopes[0] > 0.0 {
            return f64::NEG_INFINITY;
        }
        match self.breakpoints.first() {
            Some(_) => self.values[0],
            None => 0.0,
        }
    }

    /// Supremum norm `sup |g|`.
    pub fn sup_norm(&self) -> f64 {
        -self.value_at_minus_infinity()
    }

    /// Slope of the piece containing `tau` (right-continuous at breakpoints).
    pub fn slope_at(&self, tau: f64) -> f64 {
        self.slopes[self.breakpoints.partition_point(|&b| b <= tau)]
    }

    fn check_same(&self, other: &RadialProfile) -> Result<()> {
        if self.coordinate != other.coordinate {
            return Err(Error::Coordinate(format!(
                "profiles tagged {:?} and {:?}",
                self.coordinate, other.coordinate
            )));
        }
        Ok(())
    }

    /// `alpha * g1 + beta * g2` for nonnegative weights.
    pub fn combine(alpha: f64, g1: &RadialProfile, beta: f64, g2: &RadialProfile) -> Result<RadialProfile> {
        g1.check_same(g2)?;
        if !(alpha >= 0.0 && beta >= 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(Error::Domain(format!("combination weights must be nonnegative, got {alpha}, {beta}")));
        }
        let bps = merged_breakpoints(&[g1, g2]);
        let mut slopes = Vec::with_capacity(bps.len() + 1);
        slopes.push(alpha * g1.slopes[0] + beta * g2.slopes[0]);
        for &b in &bps {
            slopes.push(alpha * g1.slope_at(b) + beta * g2.slope_at(b));
        }
        for i in 1..slopes.len() {
            if slopes[i] < slopes[i - 1] {
                slopes[i] = slopes[i - 1];
            }
        }
        RadialProfile::new(g1.coordinate, bps, slopes)
    }

    /// Sum of several profiles sharing a coordinate.
    pub fn sum(profiles: &[&RadialProfile]) -> Result<RadialProfile> {
        let first = profiles.first().ok_or_else(|| Error::Domain("empty sum".into()))?;
        let mut acc = RadialProfile::zero(first.coordinate);
        for g in profiles {
            acc = RadialProfile::combine(1.0, &acc, 1.0, g)?;
        }
        Ok(acc)
    }

    pub fn scale(&self, alpha: f64) -> Result<RadialProfile> {
        RadialProfile::combine(alpha, self, 0.0, self)
    }

    /// Pointwise maximum, itself convex.
    pub fn pointwise_max(u: &RadialProfile, v: &RadialProfile) -> Result<RadialProfile> {
        u.check_same(v)?;
        let xs = candidate_points(&[u, v]);
        let ys: Vec<f64> = xs.iter().map(|&x| u.value(x).max(v.value(x))).collect();
        let left = match xs.first() {
            Some(&x0) => {
                if u.value(x0 - 1.0) >= v.value(x0 - 1.0) {
                    u.slopes[0]
                } else {
                    v.slopes[0]
                }
            }
            None => u.slopes[0].min(v.slopes[0]),
        };
        let tol = 1e-12 * (1.0 + u.sup_norm().max(v.sup_norm()));
        from_points(u.coordinate, &xs, &ys, left, tol)
    }

    /// `sup |u - v|` over `tau <= 0`, attained at a breakpoint or on the left ray.
    pub fn sup_distance(u: &RadialProfile, v: &RadialProfile) -> f64 {
        let mut d = (u.value_at_minus_infinity() - v.value_at_minus_infinity()).abs();
        if d.is_nan() {
            d = f64::INFINITY;
        }
        for &x in merged_breakpoints(&[u, v]).iter() {
            d = d.max((u.value(x) - v.value(x)).abs());
        }
        d
    }

    /// Breakpoint and slope agreement within an absolute tolerance.
    pub fn approx_eq(&self, other: &RadialProfile, tol: f64) -> bool {
        self.coordinate == other.coordinate
            && self.breakpoints.len() == other.breakpoints.len()
            && self.breakpoints.iter().zip(&other.breakpoints).all(|(a, b)| (a - b).abs() <= tol)
            && self.slopes.iter().zip(&other.slopes).all(|(a, b)| (a - b).abs() <= tol)
    }

    /// `u <= v + tol` everywhere on `tau <= 0`.
    pub fn le(u: &RadialProfile, v: &RadialProfile, tol: f64) -> bool {
        if u.value_at_minus_infinity() > v.value_at_minus_infinity() + tol {
            return false;
        }
        merged_breakpoints(&[u, v]).iter().all(|&x| u.value(x) <= v.value(x) + tol)
    }

    /// Total order used to make set-like operations independent of argument order.
    pub fn canonical_cmp(&self, other: &RadialProfile) -> Ordering {
        let key = |g: &RadialProfile| -> Vec<u64> {
            let mut k: Vec<u64> = vec![g.breakpoints.len() as u64];
            k.extend(g.breakpoints.iter().map(|x| x.to_bits()));
            k.extend(g.slopes.iter().map(|x| x.to_bits()));
            k
        };
        key(self).cmp(&key(other))
    }
}

/// Sorted union of the breakpoints of several profiles (exact duplicates removed).
pub fn merged_breakpoints(profiles: &[&RadialProfile]) -> Vec<f64> {
    let mut all: Vec<f64> = profiles.iter().flat_map(|g| g.breakpoints.iter().copied()).collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    all
}

/// Breakpoints of all profiles together with every pairwise graph crossing.
///
/// The pointwise minimum and maximum of the profiles are linear between consecutive points.
pub fn candidate_points(profiles: &[&RadialProfile]) -> Vec<f64> {
    let bps = merged_breakpoints(profiles);
    let mut pts = bps.clone();
    let k = profiles.len();
    if k < 2 {
        return pts;
    }
    let mut nodes = bps.clone();
    nodes.push(0.0);
    nodes.dedup();
    let vals: Vec<Vec<f64>> = profiles.iter().map(|g| nodes.iter().map(|&x| g.value(x)).collect()).collect();
    for i in 0..k {
        for j in (i + 1)..k {
            let d0 = vals[i][0] - vals[j][0];
            let ds = profiles[i].slopes[0] - profiles[j].slopes[0];
            if ds != 0.0 {
                let x = nodes[0] - d0 / ds;
                if x < nodes[0] {
                    pts.push(x);
                }
            }
            for w in 0..nodes.len() - 1 {
                let da = vals[i][w] - vals[j][w];
                let db = vals[i][w + 1] - vals[j][w + 1];
                if (da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0) {
                    let x = nodes[w] + (nodes[w + 1] - nodes[w]) * (da / (da - db));
                    if x > nodes[w] && x < nodes[w + 1] {
                        pts.push(x);
                    }
                }
            }
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Greatest convex minorant of the polyline through `(xs, ys)` and `(0, 0)`, continued to the
/// left by a ray of slope `left_slope`.
///
/// Points at `x > 0` are ignored. If some input point lies above the minorant by more than
/// `tol`, the data is reported as non-convex.
pub fn from_points(coordinate: Coordinate, xs: &[f64], ys: &[f64], left_slope: f64, tol: f64) -> Result<RadialProfile> {
    let hull = convex_minorant(xs, ys, left_slope)?;
    if tol.is_finite() {
        let g = &hull;
        let mut worst = 0.0f64;
        let mut at = 0.0;
        for (&x, &y) in xs.iter().zip(ys) {
            if x <= 0.0 {
                let dev = y - g.value_at_coordinate_free(x);
                if dev > worst {
                    worst = dev;
                    at = x;
                }
            }
        }
        if worst > tol {
            return Err(Error::Convexity(format!("data exceeds its convex minorant by {worst:e} at {at}")));
        }
    }
    RadialProfile::new(coordinate, hull.breakpoints, hull.slopes)
}

struct RawHull {
    breakpoints: Vec<f64>,
    slopes: Vec<f64>,
    values: Vec<f64>,
}

impl RawHull {
    fn value_at_coordinate_free(&self, x: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|&b| b <= x);
        if idx == self.breakpoints.len() {
            self.slopes[idx] * x
        } else {
            self.values[idx] - self.slopes[idx] * (self.breakpoints[idx] - x)
        }
    }
}

fn convex_minorant(xs: &[f64], ys: &[f64], left_slope: f64) -> Result<RawHull> {
    if xs.len() != ys.len() {
        return Err(Error::Domain("point lists differ in length".into()));
    }
    let mut pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, _)| **x < 0.0)
        .map(|(&x, &y)| (x, y))
        .collect();
    if pts.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::Domain("non-finite sample point".into()));
    }
    if let Some(i) = xs.iter().position(|&x| x == 0.0) {
        if ys[i] > 0.0 {
            return Err(Error::Boundary(format!("value {} at the boundary is positive", ys[i])));
        }
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut dedup: Vec<(f64, f64)> = Vec::with_capacity(pts.len() + 2);
    for p in pts {
        match dedup.last_mut() {
            Some(last) if (p.0 - last.0).abs() <= 1e-14 * (1.0 + p.0.abs()) => {
                last.1 = last.1.min(p.1);
            }
            _ => dedup.push(p),
        }
    }
    let first = dedup.first().copied().unwrap_or((0.0, 0.0));
    let mut chain: Vec<(f64, f64)> = Vec::with_capacity(dedup.len() + 2);
    chain.push((first.0 - 1.0, first.1 - left_slope));
    for p in dedup.into_iter().chain(std::iter::once((0.0, 0.0))) {
        while chain.len() >= 2 {
            let a = chain[chain.len() - 2];
            let b = chain[chain.len() - 1];
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross <= 0.0 {
                chain.pop();
            } else {
                break;
            }
        }
        chain.push(p);
    }
    // Merge pieces whose slopes agree to rounding.
    let mut i = 1;
    while i + 1 < chain.len() {
        let s1 = if i == 1 { left_slope } else { slope(chain[i - 1], chain[i]) };
        let s2 = slope(chain[i], chain[i + 1]);
        if (s2 - s1).abs() <= MERGE_REL * (1.0 + s1.abs().max(s2.abs())) {
            chain.remove(i);
        } else {
            i += 1;
        }
    }
    let mut breakpoints = Vec::new();
    let mut values = Vec::new();
    let mut slopes = vec![left_slope];
    for w in 1..chain.len() - 1 {
        breakpoints.push(chain[w].0);
        values.push(chain[w].1);
        let s = slope(chain[w], chain[w + 1]).max(*slopes.last().unwrap());
        slopes.push(s);
    }
    Ok(RawHull { breakpoints, slopes, values })
}

fn slope(a: (f64, f64), b: (f64, f64)) -> f64 {
    (b.1 - a.1) / (b.0 - a.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c22() -> Coordinate {
        Coordinate::new(2, 2).unwrap()
    }

    #[test]
    fn single_kink_profile() {
        let g = RadialProfile::new(c22(), vec![-0.7], vec![0.0, 1.0]).unwrap();
        assert_eq!(g.value(-0.7), -0.7);
        assert_eq!(g.value(f64::NEG_INFINITY), -0.7);
        assert_eq!(g.value(-5.0), -0.7);
        assert_eq!(g.value(0.0), 0.0);
        assert_eq!(g.value(-0.2), -0.2);
    }

    #[test]
    fn doubled_slope_value() {
        let g = RadialProfile::kink(c22(), 2.0, -1.0).unwrap();
        assert_eq!(g.value(-0.25), -0.5);
        assert_eq!(g.breakpoints(), &[-0.5]);
    }

    #[test]
    fn zero_profile_and_rejections() {
        let z = RadialProfile::new(c22(), vec![], vec![0.0]).unwrap();
        assert!(z.is_zero());
        assert!(matches!(RadialProfile::new(c22(), vec![-1.0], vec![1.0, 0.0]), Err(Error::Convexity(_))));
        assert!(matches!(RadialProfile::new(c22(), vec![0.5], vec![0.0, 1.0]), Err(Error::Boundary(_))));
        assert!(matches!(RadialProfile::new(c22(), vec![], vec![-1.0]), Err(Error::Convexity(_))));
    }

    #[test]
    fn redundant_breakpoints_are_dropped() {
        let g = RadialProfile::new(c22(), vec![-2.0, -1.0], vec![0.0, 0.0, 1.0]).unwrap();
        assert_eq!(g.breakpoints(), &[-1.0]);
    }

    #[test]
    fn sum_of_two_kinks() {
        let a = -0.5;
        let b = -1.5;
        let ga = RadialProfile::new(c22(), vec![a], vec![0.0, 1.0]).unwrap();
        let gb = RadialProfile::new(c22(), vec![b], vec![0.0, 1.0]).unwrap();
        let s = RadialProfile::combine(1.0, &ga, 1.0, &gb).unwrap();
        assert_eq!(s.breakpoints(), &[b, a]);
        assert_eq!(s.slopes(), &[0.0, 1.0, 2.0]);
        for i in 0..200 {
            let t = -3.0 + 3.0 * i as f64 / 199.0;
            let direct = t.max(a) + t.max(b);
            assert!((s.value(t) - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn combine_identity_and_scaling() {
        let g = RadialProfile::new(c22(), vec![-2.0, -0.3], vec![0.0, 0.5, 3.0]).unwrap();
        let z = RadialProfile::zero(c22());
        assert_eq!(RadialProfile::combine(1.0, &g, 1.0, &z).unwrap(), g);
        let t = RadialProfile::combine(2.5, &g, 0.0, &g).unwrap();
        assert_eq!(t.slopes(), &[0.0, 1.25, 7.5]);
    }

    #[test]
    fn mismatched_coordinates_fail() {
        let g = RadialProfile::zero(c22());
        let h = RadialProfile::zero(Coordinate::new(2, 1).unwrap());
        assert!(matches!(RadialProfile::combine(1.0, &g, 1.0, &h), Err(Error::Coordinate(_))));
    }

    #[test]
    fn pointwise_max_of_crossing_kinks() {
        let u = RadialProfile::kink(c22(), 1.0, -1.0).unwrap();
        let v = RadialProfile::kink(c22(), 2.0, -0.8).unwrap();
        let m = RadialProfile::pointwise_max(&u, &v).unwrap();
        for i in 0..300 {
            let t = -3.0 + 3.0 * i as f64 / 299.0;
            assert!((m.value(t) - u.value(t).max(v.value(t))).abs() < 1e-13);
        }
    }

    #[test]
    fn convex_minorant_repairs_only_small_defects() {
        let c = c22();
        let xs = [-2.0, -1.0, -0.5];
        let ys = [-1.0, -0.5 + 1e-12, -0.25];
        let g = from_points(c, &xs, &ys, 0.0, 1e-9).unwrap();
        assert!((g.value(-1.0) + 0.5).abs() < 1e-11);
        let bad = [-1.0, -0.2, -0.25];
        assert!(matches!(from_points(c, &xs, &bad, 0.0, 1e-9), Err(Error::Convexity(_))));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let g = RadialProfile::new(c22(), vec![-1.2345678901234567, -0.1], vec![0.0, 0.3333333333333333, 2.5]).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        let back: RadialProfile = serde_json::from_str(&s).unwrap();
        assert_eq!(g, back);
        let bad = r#"{"coordinate":{"n":2,"q":2},"breakpoints":[-1.0],"slopes":[1.0,0.5]}"#;
        assert!(serde_json::from_str::<RadialProfile>(bad).is_err());
    }
}
