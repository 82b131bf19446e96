use crate::coords::Coordinate;
use crate::error::{Error, Result};
use crate::profile::{from_points, RadialProfile};

/// Largest defect the convex repair is allowed to absorb, relative to `max(1, sup |g|)`.
pub const REPAIR_TOL: f64 = 1e-9;

/// Re-expresses a bounded profile in the order-`q_to` coordinate.
///
/// The function `g(tau_from(s))` is sampled at `resolution` radii (half equispaced in the target
/// coordinate, half equispaced in `s`, plus the images of all breakpoints) and replaced by the
/// chord interpolant, which is piecewise linear in the new coordinate.
pub fn reparameterize(g: &RadialProfile, q_to: usize, resolution: usize) -> Result<RadialProfile> {
    let from = g.coordinate();
    let to = Coordinate::new(from.n, q_to)?;
    if from == to {
        return Ok(g.clone());
    }
    if !g.is_bounded() {
        return Err(Error::UnboundedMass(g.slopes()[0]));
    }
    if g.is_zero() {
        return Ok(RadialProfile::zero(to));
    }
    if resolution < 4 {
        return Err(Error::Domain(format!("resolution {resolution} is too small")));
    }
    let images: Vec<f64> = g.breakpoints().iter().map(|&b| from.transport(b, &to)).collect();
    let lo = images[0];
    let s_lo = to.radius_unchecked(lo);
    let half = resolution / 2;
    let mut xs: Vec<f64> = images.clone();
    for i in 0..half {
        xs.push(lo * (1.0 - i as f64 / half as f64));
    }
    let rest = resolution - half;
    for i in 0..rest {
        let s = s_lo + (1.0 - s_lo) * i as f64 / rest as f64;
        xs.push(to.tau_unchecked(s).min(0.0));
    }
    xs.retain(|&x| x >= lo && x < 0.0);
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let ys: Vec<f64> = xs
        .iter()
        .map(|&x| {
            match images.iter().position(|&b| b == x) {
                Some(k) => g.value(g.breakpoints()[k]),
                None => g.value(to.transport(x, &from).min(0.0)),
            }
        })
        .collect();
    let tol = REPAIR_TOL * g.sup_norm().max(1.0);
    from_points(to, &xs, &ys, 0.0, tol).map_err(|e| match e {
        Error::Convexity(msg) => Error::Membership(format!("not convex in the order-{q_to} coordinate: {msg}")),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_zero() {
        let c = Coordinate::new(3, 2).unwrap();
        let g = RadialProfile::kink(c, 1.5, -0.3).unwrap();
        assert_eq!(reparameterize(&g, 2, 64).unwrap(), g);
        let z = reparameterize(&RadialProfile::zero(c), 1, 64).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.coordinate(), Coordinate::new(3, 1).unwrap());
    }

    #[test]
    fn higher_order_kink_moves_to_lower_order() {
        let c = Coordinate::new(2, 2).unwrap();
        let g = RadialProfile::kink(c, 1.0, -0.5).unwrap();
        let h = reparameterize(&g, 1, 512).unwrap();
        let to = Coordinate::new(2, 1).unwrap();
        for i in 0..50 {
            let s = 0.05 + 0.95 * i as f64 / 49.0;
            let exact = g.value(c.tau_unchecked(s));
            let approx = h.value(to.tau_unchecked(s));
            assert!(approx >= exact - 1e-12);
            assert!(approx - exact < 1e-4);
        }
    }

    #[test]
    fn lower_order_line_is_not_higher_order_convex() {
        let c = Coordinate::new(2, 1).unwrap();
        let g = RadialProfile::kink(c, 1.0, -1.0).unwrap();
        assert!(matches!(reparameterize(&g, 2, 256), Err(Error::Membership(_))));
    }
}
