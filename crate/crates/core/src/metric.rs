use serde::{Deserialize, Serialize};

use crate::coords::HessianParams;
use crate::energy::{energy_difference, energy_ew};
use crate::error::{Error, Result};
use crate::profile::{merged_breakpoints, RadialProfile};
use crate::rooftop::rooftop_p;

/// `d(u, v) = E_w(u) + E_w(v) - 2 E_w(P(u, v))`.
pub fn metric_d(u: &RadialProfile, v: &RadialProfile, w: &RadialProfile, params: &HessianParams) -> Result<f64> {
    if u == v {
        return Ok(0.0);
    }
    let p = rooftop_p(&[u, v])?;
    let eu = energy_ew(u, w, params)?.value;
    let ev = energy_ew(v, w, params)?.value;
    let ep = energy_ew(&p, w, params)?.value;
    Ok((eu + ev - 2.0 * ep).max(0.0))
}

/// `d(u, v) = (E(u) - E(P)) + (E(v) - E(P))` with both differences from the mixed-measure sum
/// over `u - P` and `v - P`. Agrees with [`metric_d`] for every weight and keeps full relative
/// accuracy when `d` is small compared with the energies.
pub fn metric_d_cocycle(u: &RadialProfile, v: &RadialProfile, params: &HessianParams) -> Result<f64> {
    if u == v {
        return Ok(0.0);
    }
    let p = rooftop_p(&[u, v])?;
    Ok((energy_difference(u, &p, params)? + energy_difference(v, &p, params)?).max(0.0))
}

/// `cap_m` of the closed ball of radius `r`: the mass of `max(tau / (-tau_m(r)), -1)`.
pub fn capacity_ball(r: f64, params: &HessianParams) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Domain(format!("radius {r} outside (0, 1)")));
    }
    let depth = -params.coordinate().tau(r)?;
    Ok(params.c() / depth.powi(params.m() as i32))
}

/// Capacity of `{|u_j - u| > eps}` intersected with the closed ball of radius `k_radius`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityEntry {
    pub index: usize,
    /// Outer radius of the set, `None` when it is empty.
    pub outer_radius: Option<f64>,
    pub capacity: f64,
}

/// The sets are unions of annuli read off the piecewise-linear difference. A radial
/// extremal function that is `-1` on a sphere is `-1` on the whole ball inside it, so each set
/// has the capacity of the ball through its outermost point.
pub fn capacity_convergence_check(seq: &[RadialProfile], limit: &RadialProfile, eps: f64, k_radius: f64, params: &HessianParams) -> Result<Vec<CapacityEntry>> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("threshold {eps} must be positive")));
    }
    let coord = params.coordinate();
    let tau_k = coord.tau(k_radius)?;
    seq.iter()
        .enumerate()
        .map(|(index, g)| {
            let outer = outermost_exceedance(g, limit, eps, tau_k)?;
            let (outer_radius, capacity) = match outer {
                Some(t) => {
                    let r = coord.radius(t)?;
                    (Some(r), capacity_ball(r, params)?)
                }
                None => (None, 0.0),
            };
            Ok(CapacityEntry { index, outer_radius, capacity })
        })
        .collect()
}

/// Largest `tau <= tau_k` with `|g - h|(tau) > eps` (its closure), if any.
fn outermost_exceedance(g: &RadialProfile, h: &RadialProfile, eps: f64, tau_k: f64) -> Result<Option<f64>> {
    if g.coordinate() != h.coordinate() {
        return Err(Error::Coordinate(format!("{:?} vs {:?}", g.coordinate(), h.coordinate())));
    }
    let diff = |t: f64| (g.value(t) - h.value(t)).abs();
    let mut nodes: Vec<f64> = merged_breakpoints(&[g, h]).into_iter().filter(|&x| x < tau_k).collect();
    nodes.push(tau_k);
    let mut best: Option<f64> = None;
    if g.value_at_minus_infinity() == f64::NEG_INFINITY || h.value_at_minus_infinity() == f64::NEG_INFINITY {
        best = Some(f64::NEG_INFINITY);
    } else if (g.value_at_minus_infinity() - h.value_at_minus_infinity()).abs() > eps {
        best = Some(nodes[0].min(tau_k));
    }
    for w in nodes.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (da, db) = (diff(a), diff(b));
        if db > eps {
            best = Some(b);
        } else if da > eps {
            // The signed difference is affine on [a, b]; find where |.| drops to eps.
            let sa = g.value(a) - h.value(a);
            let sb = g.value(b) - h.value(b);
            let target = if sa > 0.0 { eps } else { -eps };
            best = Some(a + (b - a) * (sa - target) / (sa - sb));
        }
    }
    if nodes.len() == 1 && diff(tau_k) > eps {
        best = Some(tau_k);
    }
    Ok(best)
}

/// Result of the completeness construction applied to a finite sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct CauchyLimit {
    pub limit: RadialProfile,
    /// Indices of the subsequence with `d(u_{j_k}, u_{j_{k+1}}) <= 2^-k`.
    pub selected: Vec<usize>,
    /// `v_k = P(u_{j_k}, u_{j_{k+1}}, ...)`, increasing in `k`.
    pub envelopes: Vec<RadialProfile>,
    /// True when the last envelopes agree to `1e-10` in breakpoints and slopes.
    pub stabilized: bool,
}

/// Rebuilds the limit of a `d`-Cauchy sequence through rooftop envelopes of its tails.
///
/// A subsequence with increments below `2^-k` is selected first. From the last selected term
/// backwards, `v_k = P(u_{j_k}, v_{k+1})` is the envelope of the whole tail; the `v_k` increase
/// to the limit.
pub fn cauchy_limit(seq: &[RadialProfile], w: &RadialProfile, params: &HessianParams) -> Result<CauchyLimit> {
    if seq.is_empty() {
        return Err(Error::NotCauchy("empty sequence".into()));
    }
    let mut last_error = Error::NotCauchy("no subsequence with summable increments".into());
    for start in 0..seq.len() {
        let selected = select_summable(seq, start, w, params)?;
        if seq.len() > 1 && selected.len() < 2 {
            continue;
        }
        let mut envelopes: Vec<RadialProfile> = vec![seq[*selected.last().unwrap()].clone()];
        for &j in selected.iter().rev().skip(1) {
            let next = rooftop_p(&[&seq[j], envelopes.last().unwrap()])?;
            envelopes.push(next);
        }
        envelopes.reverse();
        let limit = envelopes.last().unwrap().clone();
        // Every term from the last selected increment on must sit near the limit.
        let k = selected.len();
        let from = selected[k.saturating_sub(2)];
        let bound = 2f64.powi(-(k as i32 - 2));
        let mut far = None;
        for (j, g) in seq.iter().enumerate().skip(from) {
            let dist = metric_d(g, &limit, w, params)?;
            if dist > bound {
                far = Some((j, dist));
                break;
            }
        }
        if let Some((j, dist)) = far {
            last_error = Error::NotCauchy(format!("term {j} is {dist:e} away from the envelope limit"));
            continue;
        }
        let stabilized = envelopes.len() >= 2 && envelopes[envelopes.len() - 2].approx_eq(&limit, 1e-10);
        return Ok(CauchyLimit { limit, selected, envelopes, stabilized });
    }
    Err(last_error)
}

fn select_summable(seq: &[RadialProfile], start: usize, w: &RadialProfile, params: &HessianParams) -> Result<Vec<usize>> {
    let mut selected = vec![start];
    let mut threshold = 1.0;
    for j in start + 1..seq.len() {
        let last = *selected.last().unwrap();
        if metric_d(&seq[last], &seq[j], w, params)? <= threshold {
            selected.push(j);
            threshold *= 0.5;
        }
    }
    Ok(selected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ball_capacities() {
        let p = HessianParams::new(2, 2).unwrap();
        let c = 4.0 * PI * PI;
        assert!((capacity_ball((-1.0f64).exp(), &p).unwrap() - c).abs() < 1e-12 * c);
        assert!((capacity_ball((-2.0f64).exp(), &p).unwrap() - c / 4.0).abs() < 1e-12 * c);
        assert!(capacity_ball(1.0, &p).is_err());
        let mut prev = 0.0;
        for i in 1..100 {
            let cap = capacity_ball(i as f64 / 100.0, &p).unwrap();
            assert!(cap > prev);
            prev = cap;
        }
    }

    #[test]
    fn distance_to_zero_is_scaled_energy() {
        let p = HessianParams::new(3, 3).unwrap();
        let u = RadialProfile::new(p.coordinate(), vec![-2.0, -0.4], vec![0.0, 0.3, 1.1]).unwrap();
        let z = RadialProfile::zero(p.coordinate());
        let d = metric_d(&u, &z, &z, &p).unwrap();
        let e1 = crate::measure::e1_energy(&u, &p).unwrap();
        assert!((d - e1 / 4.0).abs() < 1e-12 * e1);
        assert_eq!(metric_d(&u, &u, &z, &p).unwrap(), 0.0);
    }

    #[test]
    fn constant_sequence_capacity_is_zero() {
        let p = HessianParams::new(2, 2).unwrap();
        let u = RadialProfile::kink(p.coordinate(), 1.0, -1.0).unwrap();
        let seq = vec![u.clone(); 4];
        for e in capacity_convergence_check(&seq, &u, 1e-3, 0.5, &p).unwrap() {
            assert_eq!(e.capacity, 0.0);
        }
    }

    #[test]
    fn cauchy_limit_of_kinks() {
        let p = HessianParams::new(2, 2).unwrap();
        let z = RadialProfile::zero(p.coordinate());
        let seq: Vec<RadialProfile> = (0..40)
            .map(|j| RadialProfile::kink(p.coordinate(), 1.0, -1.0 - 2f64.powi(-j)).unwrap())
            .collect();
        let res = cauchy_limit(&seq, &z, &p).unwrap();
        let target = RadialProfile::kink(p.coordinate(), 1.0, -1.0).unwrap();
        assert!(metric_d(&res.limit, &target, &z, &p).unwrap() < 1e-8);
        let constant = vec![target.clone(); 5];
        assert_eq!(cauchy_limit(&constant, &z, &p).unwrap().limit, target);
        let wild: Vec<RadialProfile> = (0..10)
            .map(|j| RadialProfile::kink(p.coordinate(), 1.0, if j % 2 == 0 { -1.0 } else { -2.0 }).unwrap())
            .collect();
        assert!(matches!(cauchy_limit(&wild, &z, &p), Err(Error::NotCauchy(_))));
    }
}
