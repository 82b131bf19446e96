use crate::coords::HessianParams;
use crate::error::{Error, Result};
use crate::measure::hessian_measure;
use crate::profile::{candidate_points, from_points, RadialProfile};

/// `P(u_1, ..., u_k)`: the greatest convex nondecreasing minorant of `min_i u_i`.
///
/// The pointwise minimum is linear between consecutive breakpoints and graph crossings, so its
/// lower convex hull over those points is exact. Inputs are put in a canonical order first,
/// which makes the result independent of argument order bit for bit.
pub fn rooftop_p(profiles: &[&RadialProfile]) -> Result<RadialProfile> {
    let first = profiles.first().ok_or_else(|| Error::Domain("rooftop of an empty list".into()))?;
    let coord = first.coordinate();
    if let Some(g) = profiles.iter().find(|g| g.coordinate() != coord) {
        return Err(Error::Coordinate(format!("{:?} vs {:?}", coord, g.coordinate())));
    }
    let mut sorted: Vec<&RadialProfile> = profiles.to_vec();
    sorted.sort_by(|a, b| a.canonical_cmp(b));
    sorted.dedup_by(|a, b| a == b);
    if let Some(low) = sorted.iter().find(|g| sorted.iter().all(|h| RadialProfile::le(g, h, 0.0))) {
        return Ok((*low).clone());
    }
    let xs = candidate_points(&sorted);
    let ys: Vec<f64> = xs
        .iter()
        .map(|&x| sorted.iter().map(|g| g.value(x)).fold(f64::INFINITY, f64::min))
        .collect();
    let probe = xs[0] - 1.0;
    let left = sorted
        .iter()
        .min_by(|a, b| a.value(probe).total_cmp(&b.value(probe)))
        .map(|g| g.slopes()[0])
        .unwrap_or(0.0);
    from_points(coord, &xs, &ys, left, f64::INFINITY)
}

/// One atom of `H_m(P(u, v))` against the masses the minimum principle allows there.
#[derive(Clone, Debug, PartialEq)]
pub struct ContactAtom {
    pub tau: f64,
    pub mass: f64,
    pub allowed: f64,
    pub touches_u: bool,
    pub touches_v: bool,
}

/// Checks `H_m(P(u,v)) <= 1_{P=u} H_m(u) + 1_{P=v} H_m(v)` atom by atom.
///
/// Contact is decided by value equality within `1e-10` of the sup scale; an atom touching both
/// graphs may draw on both measures.
pub fn minimum_principle_atoms(u: &RadialProfile, v: &RadialProfile, params: &HessianParams) -> Result<Vec<ContactAtom>> {
    let p = rooftop_p(&[u, v])?;
    let hp = hessian_measure(&p, params)?;
    let hu = hessian_measure(u, params)?;
    let hv = hessian_measure(v, params)?;
    let scale = u.sup_norm().max(v.sup_norm()).max(1.0);
    Ok(hp
        .atoms()
        .iter()
        .map(|a| {
            let pv = p.value(a.tau);
            let touches_u = (pv - u.value(a.tau)).abs() <= 1e-10 * scale;
            let touches_v = (pv - v.value(a.tau)).abs() <= 1e-10 * scale;
            let mut allowed = 0.0;
            if touches_u {
                allowed += hu.mass_at(a.tau);
            }
            if touches_v {
                allowed += hv.mass_at(a.tau);
            }
            ContactAtom { tau: a.tau, mass: a.mass, allowed, touches_u, touches_v }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coords::Coordinate;

    fn c() -> Coordinate {
        Coordinate::new(2, 2).unwrap()
    }

    #[test]
    fn ordered_and_equal_inputs() {
        let u = RadialProfile::kink(c(), 1.0, -1.0).unwrap();
        let v = RadialProfile::kink(c(), 1.0, -0.5).unwrap();
        assert_eq!(rooftop_p(&[&u, &u]).unwrap(), u);
        assert_eq!(rooftop_p(&[&u, &v]).unwrap(), u);
        assert_eq!(rooftop_p(&[&v, &u]).unwrap(), u);
    }

    #[test]
    fn crossing_kinks_give_the_hull() {
        let u = RadialProfile::kink(c(), 1.0, -1.0).unwrap();
        let v = RadialProfile::kink(c(), 2.0, -0.6).unwrap();
        let p = rooftop_p(&[&u, &v]).unwrap();
        assert_eq!(p.breakpoints(), &[-1.0, -0.3]);
        assert!((p.slopes()[1] - 4.0 / 7.0).abs() < 1e-15);
        assert_eq!(p.slopes()[2], 2.0);
        assert_eq!(rooftop_p(&[&v, &u]).unwrap(), p);
        for i in 0..100 {
            let t = -3.0 + 3.0 * i as f64 / 99.0;
            assert!(p.value(t) <= u.value(t).min(v.value(t)) + 1e-15);
        }
        // max(2 tau, -1) lies below max(tau, -1), so that pair is ordered.
        let low = RadialProfile::kink(c(), 2.0, -1.0).unwrap();
        assert_eq!(rooftop_p(&[&u, &low]).unwrap(), low);
    }

    #[test]
    fn minimum_principle_on_crossing_pair() {
        let params = HessianParams::new(2, 2).unwrap();
        let u = RadialProfile::new(c(), vec![-2.0, -0.5], vec![0.0, 0.2, 2.0]).unwrap();
        let v = RadialProfile::kink(c(), 1.0, -0.9).unwrap();
        for a in minimum_principle_atoms(&u, &v, &params).unwrap() {
            assert!(a.mass <= a.allowed * (1.0 + 1e-12), "{a:?}");
        }
    }
}
