use serde::{Deserialize, Serialize};

use crate::coords::Coordinate;
use crate::error::{Error, Result};
use crate::profile::RadialProfile;

/// Convex conjugate `g*(p) = sup_{tau <= 0} (p tau - g(tau))` of a profile.
///
/// The conjugate is piecewise linear on `[points[0], points[K]]`, with slope `slopes[i]` on
/// `[points[i], points[i+1]]`, and identically zero from `points[K]` on. The slopes of `g*`
/// are the breakpoints of `g` and vice versa, which makes the round trip exact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualProfile {
    coordinate: Coordinate,
    points: Vec<f64>,
    slopes: Vec<f64>,
}

impl DualProfile {
    pub fn coordinate(&self) -> Coordinate {
        self.coordinate
    }

    /// Breakpoints in the slope variable `p`; the first is the left end of the domain.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn domain_start(&self) -> f64 {
        self.points[0]
    }

    /// Largest slope of the primal profile; the conjugate vanishes beyond it.
    pub fn p_max(&self) -> f64 {
        *self.points.last().unwrap()
    }

    /// Slope of the conjugate on the piece starting at `p` (zero past the last point).
    pub fn slope_at(&self, p: f64) -> f64 {
        let idx = self.points.partition_point(|&x| x <= p);
        if idx == 0 || idx > self.slopes.len() {
            0.0
        } else {
            self.slopes[idx - 1]
        }
    }

    /// `g*(p)`; `+inf` left of the domain.
    pub fn value(&self, p: f64) -> f64 {
        if p < self.points[0] {
            return f64::INFINITY;
        }
        let k = self.slopes.len();
        let mut acc = 0.0;
        for i in (0..k).rev() {
            let (lo, hi) = (self.points[i], self.points[i + 1]);
            if p >= hi {
                break;
            }
            acc -= self.slopes[i] * (hi - lo.max(p));
        }
        acc
    }

    /// `(1 - t) a + t b` for conjugates in the same coordinate, exact at `t = 0` and `t = 1`.
    pub fn interpolate(a: &DualProfile, b: &DualProfile, t: f64) -> Result<DualProfile> {
        if a.coordinate != b.coordinate {
            return Err(Error::Coordinate(format!("{:?} vs {:?}", a.coordinate, b.coordinate)));
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!("interpolation parameter {t} outside [0, 1]")));
        }
        if t == 0.0 {
            return Ok(a.clone());
        }
        if t == 1.0 {
            return Ok(b.clone());
        }
        let start = a.points[0].max(b.points[0]);
        let mut pts: Vec<f64> = a.points.iter().chain(&b.points).copied().filter(|&p| p >= start).collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let mut points = vec![pts[0]];
        let mut slopes: Vec<f64> = Vec::new();
        for w in pts.windows(2) {
            let s = (1.0 - t) * a.slope_at(w[0]) + t * b.slope_at(w[0]);
            if slopes.last() == Some(&s) {
                *points.last_mut().unwrap() = w[1];
            } else {
                slopes.push(s);
                points.push(w[1]);
            }
        }
        for i in 1..slopes.len() {
            if slopes[i] <= slopes[i - 1] {
                return Err(Error::Convexity(format!("interpolated conjugate loses convexity at p = {}", points[i])));
            }
        }
        Ok(DualProfile { coordinate: a.coordinate, points, slopes })
    }
}

pub fn legendre(g: &RadialProfile) -> DualProfile {
    DualProfile {
        coordinate: g.coordinate(),
        points: g.slopes().to_vec(),
        slopes: g.breakpoints().to_vec(),
    }
}

pub fn legendre_inverse(d: &DualProfile) -> Result<RadialProfile> {
    RadialProfile::new(d.coordinate, d.slopes.clone(), d.points.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c() -> Coordinate {
        Coordinate::new(2, 2).unwrap()
    }

    fn brute_conjugate(g: &RadialProfile, p: f64) -> f64 {
        let lo = g.breakpoints().first().copied().unwrap_or(0.0) - 2.0;
        (0..=200_000)
            .map(|i| lo * (1.0 - i as f64 / 200_000.0))
            .map(|tau| p * tau - g.value(tau))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn kink_conjugate_is_affine() {
        let a = -0.8;
        let g = RadialProfile::kink(c(), 1.0, a).unwrap();
        let d = legendre(&g);
        for i in 0..=10 {
            let p = i as f64 / 10.0;
            assert!((d.value(p) - a * (p - 1.0)).abs() < 1e-15);
            assert!((d.value(p) - brute_conjugate(&g, p)).abs() < 2e-5);
        }
        assert_eq!(d.value(1.5), 0.0);
    }

    #[test]
    fn zero_profile_has_point_domain() {
        let d = legendre(&RadialProfile::zero(c()));
        assert_eq!(d.points(), &[0.0]);
        assert_eq!(d.value(0.0), 0.0);
        assert_eq!(legendre_inverse(&d).unwrap(), RadialProfile::zero(c()));
    }

    #[test]
    fn conjugate_matches_brute_force_for_three_pieces() {
        let g = RadialProfile::new(c(), vec![-2.0, -0.7], vec![0.0, 0.4, 1.5]).unwrap();
        let d = legendre(&g);
        for i in 0..=30 {
            let p = 1.5 * i as f64 / 30.0;
            assert!((d.value(p) - brute_conjugate(&g, p)).abs() < 3e-5, "p = {p}");
        }
        assert_eq!(legendre_inverse(&d).unwrap(), g);
    }

    #[test]
    fn interpolated_kinks_move_the_breakpoint() {
        let (a, b) = (-1.0, -0.25);
        let da = legendre(&RadialProfile::kink(c(), 1.0, a).unwrap());
        let db = legendre(&RadialProfile::kink(c(), 1.0, b).unwrap());
        let mid = legendre_inverse(&DualProfile::interpolate(&da, &db, 0.5).unwrap()).unwrap();
        assert_eq!(mid, RadialProfile::kink(c(), 1.0, 0.5 * (a + b)).unwrap());
    }
}
