use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Radial coordinate of order `q` in complex dimension `n`.
///
/// For `q = n` the coordinate is `ln s`; for `q < n` it is `1 - s^(2 - 2n/q)`.
/// Both vanish at `s = 1` and decrease to `-inf` as `s -> 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Coordinate {
    pub n: usize,
    pub q: usize,
}

impl Coordinate {
    pub fn new(n: usize, q: usize) -> Result<Self> {
        if n < 2 || q < 1 || q > n {
            return Err(Error::Params(format!("need n > 1 and 1 <= q <= n, got n = {n}, q = {q}")));
        }
        Ok(Coordinate { n, q })
    }

    /// Exponent `2 - 2n/q`; zero marks the logarithmic case.
    pub fn exponent(&self) -> f64 {
        if self.q == self.n {
            0.0
        } else {
            2.0 - 2.0 * self.n as f64 / self.q as f64
        }
    }

    pub fn is_log(&self) -> bool {
        self.q == self.n
    }

    pub fn tau(&self, s: f64) -> Result<f64> {
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::Domain(format!("radius {s} outside (0, 1]")));
        }
        Ok(self.tau_unchecked(s))
    }

    /// Coordinate of a radius without range checks; radii above 1 extend the map smoothly.
    pub fn tau_unchecked(&self, s: f64) -> f64 {
        if self.is_log() {
            s.ln()
        } else {
            1.0 - s.powf(self.exponent())
        }
    }

    pub fn radius(&self, tau: f64) -> Result<f64> {
        if tau.is_nan() || tau > 0.0 {
            return Err(Error::Domain(format!("coordinate {tau} is positive")));
        }
        Ok(self.radius_unchecked(tau))
    }

    pub fn radius_unchecked(&self, tau: f64) -> f64 {
        if self.is_log() {
            tau.exp()
        } else {
            (1.0 - tau).powf(1.0 / self.exponent())
        }
    }

    /// Map a coordinate value of `self` to the coordinate of order `other.q`.
    pub fn transport(&self, tau: f64, other: &Coordinate) -> f64 {
        if self == other {
            return tau;
        }
        if tau == f64::NEG_INFINITY {
            return tau;
        }
        other.tau_unchecked(self.radius_unchecked(tau))
    }
}

/// `tau_q(s)`, the order-`q` radial coordinate of the radius `s`.
pub fn tau_of_radius(s: f64, n: usize, q: usize) -> Result<f64> {
    Coordinate::new(n, q)?.tau(s)
}

/// Dimension, Hessian order and the total-mass normalization constant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HessianParams {
    n: usize,
    m: usize,
    c: f64,
}

impl HessianParams {
    /// Parameters with the normalization constant looked up (and measured if needed).
    pub fn new(n: usize, m: usize) -> Result<Self> {
        Coordinate::new(n, m)?;
        let c = crate::constant::hessian_constant(n, m)?;
        Ok(HessianParams { n, m, c })
    }

    pub fn with_constant(n: usize, m: usize, c: f64) -> Result<Self> {
        Coordinate::new(n, m)?;
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Params(format!("normalization constant must be positive, got {c}")));
        }
        if m == n && c != crate::constant::monge_ampere_constant(n) {
            return Err(Error::Params("for m = n the constant is fixed to (2 pi)^n".into()));
        }
        Ok(HessianParams { n, m, c })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// The coordinate in which energies of order `m` are computed.
    pub fn coordinate(&self) -> Coordinate {
        Coordinate { n: self.n, q: self.m }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchor_and_formula_values() {
        assert_eq!(tau_of_radius(1.0, 2, 1).unwrap(), 0.0);
        assert_eq!(tau_of_radius(1.0, 3, 3).unwrap(), 0.0);
        assert_eq!(tau_of_radius(0.5, 2, 1).unwrap(), -3.0);
        assert!((tau_of_radius((-1.0f64).exp(), 2, 2).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn radius_outside_unit_interval_is_rejected() {
        assert!(matches!(tau_of_radius(0.0, 2, 1), Err(Error::Domain(_))));
        assert!(matches!(tau_of_radius(1.5, 2, 2), Err(Error::Domain(_))));
        assert!(matches!(tau_of_radius(f64::NAN, 2, 2), Err(Error::Domain(_))));
    }

    #[test]
    fn radius_inverts_tau() {
        for (n, q) in [(2, 1), (2, 2), (3, 1), (3, 2), (4, 3)] {
            let c = Coordinate::new(n, q).unwrap();
            for s in [1e-3, 0.1, 0.5, 0.9, 1.0] {
                let t = c.tau(s).unwrap();
                assert!((c.radius(t).unwrap() - s).abs() < 1e-12 * s.max(1e-3));
            }
        }
    }

    #[test]
    fn invalid_orders_are_rejected() {
        assert!(Coordinate::new(1, 1).is_err());
        assert!(Coordinate::new(3, 0).is_err());
        assert!(Coordinate::new(3, 4).is_err());
    }
}
