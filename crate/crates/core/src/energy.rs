use serde::{Deserialize, Serialize};

use crate::coords::HessianParams;
use crate::error::Result;
use crate::measure::{e1_energy, hessian_measure, integrate, mixed_measure};
use crate::profile::RadialProfile;
use crate::rooftop::rooftop_p;

/// `E_w(u)` together with its `m + 1` mixed summands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub value: f64,
    /// `(j, int (u - w) (dd^c u)^j ^ (dd^c w)^(m-j) ^ beta^(n-m))`
    pub terms: Vec<(usize, f64)>,
}

fn mixed_terms(a: &RadialProfile, b: &RadialProfile, params: &HessianParams) -> Result<Vec<(usize, f64)>> {
    let m = params.m();
    (0..=m)
        .map(|j| {
            let mut factors = vec![a; j];
            factors.extend(std::iter::repeat(b).take(m - j));
            let mu = mixed_measure(&factors, params)?;
            Ok((j, integrate(a, b, &mu)?))
        })
        .collect()
}

/// Weighted energy `E_w(u) = (1/(m+1)) sum_j int (u - w)(dd^c u)^j ^ (dd^c w)^(m-j) ^ beta^(n-m)`.
pub fn energy_ew(u: &RadialProfile, w: &RadialProfile, params: &HessianParams) -> Result<EnergyReport> {
    let terms = mixed_terms(u, w, params)?;
    let value = terms.iter().map(|(_, x)| x).sum::<f64>() / (params.m() + 1) as f64;
    Ok(EnergyReport { value, terms })
}

/// `E(u) - E(v)` through the cocycle sum, independent of any weight.
pub fn energy_difference(u: &RadialProfile, v: &RadialProfile, params: &HessianParams) -> Result<f64> {
    let terms = mixed_terms(u, v, params)?;
    Ok(terms.iter().map(|(_, x)| x).sum::<f64>() / (params.m() + 1) as f64)
}

/// Aubin functional `I(a, b) = int (a - b)(H_m(b) - H_m(a))`.
pub fn aubin_i(a: &RadialProfile, b: &RadialProfile, params: &HessianParams) -> Result<f64> {
    let hb = hessian_measure(b, params)?;
    let ha = hessian_measure(a, params)?;
    Ok(integrate(a, b, &hb)? - integrate(a, b, &ha)?)
}

/// Value of the energy norm at the decomposition `u - v`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormValue {
    /// `e_{1,m}(u + v)`
    pub energy: f64,
    /// `e_{1,m}(u + v)^(1/(m+1))`, an upper bound for the norm of `u - v`.
    pub root: f64,
}

pub fn norm_energy_difference(u: &RadialProfile, v: &RadialProfile, params: &HessianParams) -> Result<NormValue> {
    let energy = e1_energy(&RadialProfile::combine(1.0, u, 1.0, v)?, params)?;
    Ok(NormValue { energy, root: energy.powf(1.0 / (params.m() + 1) as f64) })
}

/// Energy along the affine segment `t -> (1-t)u + tv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentReport {
    pub t: Vec<f64>,
    pub f: Vec<f64>,
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    /// Centered differences; `None` where the stencil leaves `[0, 1]`.
    pub fd_first: Vec<Option<f64>>,
    pub fd_second: Vec<Option<f64>>,
}

/// Step of the centered differences in [`segment_report`].
pub const SEGMENT_STEP: f64 = 1e-3;

fn segment_point(u: &RadialProfile, v: &RadialProfile, t: f64) -> Result<RadialProfile> {
    RadialProfile::combine(1.0 - t, u, t, v)
}

pub fn segment_report(u: &RadialProfile, v: &RadialProfile, w: &RadialProfile, ts: &[f64], params: &HessianParams) -> Result<SegmentReport> {
    let m = params.m();
    let f_at = |t: f64| -> Result<f64> { Ok(energy_ew(&segment_point(u, v, t)?, w, params)?.value) };
    let mut rep = SegmentReport { t: ts.to_vec(), f: vec![], first: vec![], second: vec![], fd_first: vec![], fd_second: vec![] };
    for &t in ts {
        let h = segment_point(u, v, t)?;
        rep.f.push(f_at(t)?);
        rep.first.push(integrate(v, u, &hessian_measure(&h, params)?)?);
        let second = if m == 1 {
            let mu = hessian_measure(u, params)?;
            let nu = hessian_measure(v, params)?;
            integrate(v, u, &nu)? - integrate(v, u, &mu)?
        } else {
            let mut with_u = vec![u];
            with_u.extend(std::iter::repeat(&h).take(m - 1));
            let mut with_v = vec![v];
            with_v.extend(std::iter::repeat(&h).take(m - 1));
            integrate(v, u, &mixed_measure(&with_v, params)?)? - integrate(v, u, &mixed_measure(&with_u, params)?)?
        };
        rep.second.push(m as f64 * second);
        let d = SEGMENT_STEP;
        if t - 2.0 * d >= 0.0 && t + 2.0 * d <= 1.0 {
            let mid = *rep.f.last().unwrap();
            let (l2, l1, r1, r2) = (f_at(t - 2.0 * d)?, f_at(t - d)?, f_at(t + d)?, f_at(t + 2.0 * d)?);
            rep.fd_first.push(Some((l2 - 8.0 * l1 + 8.0 * r1 - r2) / (12.0 * d)));
            rep.fd_second.push(Some((-l2 + 16.0 * l1 - 30.0 * mid + 16.0 * r1 - r2) / (12.0 * d * d)));
        } else {
            rep.fd_first.push(None);
            rep.fd_second.push(None);
        }
    }
    Ok(rep)
}

/// `t -> E_w(P((1-t)u + tv, v))` and the derivative formula `int (v - min(u,v)) H_m(psi_t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopePathPoint {
    pub t: f64,
    pub fd_derivative: f64,
    pub formula: f64,
}

pub fn envelope_path_derivative(u: &RadialProfile, v: &RadialProfile, w: &RadialProfile, ts: &[f64], step: f64, params: &HessianParams) -> Result<Vec<EnvelopePathPoint>> {
    let psi = |t: f64| -> Result<RadialProfile> { rooftop_p(&[&segment_point(u, v, t)?, v]) };
    let e = |t: f64| -> Result<f64> { Ok(energy_ew(&psi(t)?, w, params)?.value) };
    ts.iter()
        .map(|&t| {
            let fd = (e(t + step)? - e(t - step)?) / (2.0 * step);
            let mu = hessian_measure(&psi(t)?, params)?;
            let formula = mu
                .atoms()
                .iter()
                .map(|a| {
                    let (uu, vv) = (u.value(a.tau), v.value(a.tau));
                    (vv - uu.min(vv)) * a.mass
                })
                .sum();
            Ok(EnvelopePathPoint { t, fd_derivative: fd, formula })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_itself_has_zero_energy() {
        let p = HessianParams::new(2, 2).unwrap();
        let w = RadialProfile::new(p.coordinate(), vec![-1.5, -0.2], vec![0.0, 0.5, 1.0]).unwrap();
        assert_eq!(energy_ew(&w, &w, &p).unwrap().value, 0.0);
    }

    #[test]
    fn zero_weight_gives_scaled_e1() {
        for (n, m) in [(2, 2), (3, 3), (2, 1), (3, 2)] {
            let p = HessianParams::new(n, m).unwrap();
            let u = RadialProfile::new(p.coordinate(), vec![-1.5, -0.2], vec![0.0, 0.5, 1.0]).unwrap();
            let zero = RadialProfile::zero(p.coordinate());
            let e = energy_ew(&u, &zero, &p).unwrap();
            let expected = -e1_energy(&u, &p).unwrap() / (m + 1) as f64;
            assert!((e.value / expected - 1.0).abs() < 1e-12);
            assert_eq!(e.terms.len(), m + 1);
        }
    }

    #[test]
    fn aubin_of_kinks_is_positive() {
        let p = HessianParams::new(2, 2).unwrap();
        let a = RadialProfile::kink(p.coordinate(), 1.0, -1.0).unwrap();
        let b = RadialProfile::kink(p.coordinate(), 1.0, -0.3).unwrap();
        assert_eq!(aubin_i(&a, &a, &p).unwrap(), 0.0);
        assert!((aubin_i(&a, &b, &p).unwrap() - 0.7 * p.c()).abs() < 1e-12 * p.c());
    }

    #[test]
    fn norm_of_single_profile_is_root_energy() {
        let p = HessianParams::new(2, 2).unwrap();
        let u = RadialProfile::kink(p.coordinate(), 1.0, -0.5).unwrap();
        let z = RadialProfile::zero(p.coordinate());
        let nv = norm_energy_difference(&u, &z, &p).unwrap();
        assert!((nv.energy - e1_energy(&u, &p).unwrap()).abs() < 1e-12);
        assert_eq!(norm_energy_difference(&z, &z, &p).unwrap().root, 0.0);
    }
}
