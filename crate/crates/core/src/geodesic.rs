//! Weak geodesics between radial profiles by linear interpolation of Legendre conjugates.

use serde::{Deserialize, Serialize};

use crate::coords::{Coordinate, HessianParams};
use crate::dual::{legendre, legendre_inverse, DualProfile};
use crate::energy::energy_ew;
use crate::error::{Error, Result};
use crate::measure::e1_energy;
use crate::metric::{capacity_convergence_check, metric_d};
use crate::profile::RadialProfile;
use crate::reparam::reparameterize;

/// Radial coordinate in which the conjugates are interpolated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterpolationCoordinate {
    /// Order `m`, the coordinate in which the energy is computed.
    #[default]
    Energy,
    /// Order `m + 1`; coincides with `Energy` when `m = n`.
    Higher,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicOptions {
    pub coordinate: InterpolationCoordinate,
    /// Sample count used when a profile changes coordinate.
    pub resolution: usize,
}

impl Default for GeodesicOptions {
    fn default() -> Self {
        GeodesicOptions { coordinate: InterpolationCoordinate::Energy, resolution: DEFAULT_RESOLUTION }
    }
}

pub const DEFAULT_RESOLUTION: usize = 2048;

#[derive(Clone, Debug, PartialEq)]
pub struct Geodesic {
    params: HessianParams,
    endpoints: [RadialProfile; 2],
    duals: [DualProfile; 2],
    options: GeodesicOptions,
}

impl Geodesic {
    pub fn params(&self) -> &HessianParams {
        &self.params
    }

    /// Endpoints as supplied.
    pub fn endpoints(&self) -> &[RadialProfile; 2] {
        &self.endpoints
    }

    pub fn duals(&self) -> &[DualProfile; 2] {
        &self.duals
    }

    pub fn options(&self) -> &GeodesicOptions {
        &self.options
    }

    /// Coordinate of the interpolated conjugates.
    pub fn interpolation_coordinate(&self) -> Coordinate {
        self.duals[0].coordinate()
    }
}

fn interpolation_order(params: &HessianParams, choice: InterpolationCoordinate) -> usize {
    match choice {
        InterpolationCoordinate::Energy => params.m(),
        InterpolationCoordinate::Higher => (params.m() + 1).min(params.n()),
    }
}

/// Checks that `u` is convex in the order-`(m+1)` coordinate and returns it there.
fn higher_member(u: &RadialProfile, params: &HessianParams, resolution: usize) -> Result<RadialProfile> {
    let n = params.n();
    let m = params.m();
    if u.coordinate().n != n {
        return Err(Error::Coordinate(format!("profile lives in dimension {}, expected {n}", u.coordinate().n)));
    }
    let q = (m + 1).min(n);
    if u.coordinate().q < m {
        return Err(Error::Coordinate(format!("profile coordinate order {} is below m = {m}", u.coordinate().q)));
    }
    if u.coordinate().q == q {
        return Ok(u.clone());
    }
    if u.coordinate().q > q {
        return Err(Error::Coordinate(format!("profile coordinate order {} exceeds {q}", u.coordinate().q)));
    }
    reparameterize(u, q, resolution)
}

/// The weak geodesic joining `u0` and `u1`.
///
/// Endpoints are accepted in the order-`m` or order-`(m+1)` coordinate and must be convex in
/// the order-`(m+1)` coordinate; otherwise the result is a membership error.
pub fn weak_geodesic(u0: &RadialProfile, u1: &RadialProfile, params: &HessianParams, options: GeodesicOptions) -> Result<Geodesic> {
    let q = interpolation_order(params, options.coordinate);
    let mut duals = Vec::with_capacity(2);
    for u in [u0, u1] {
        let member = higher_member(u, params, options.resolution)?;
        let base = if u.coordinate().q == q { u.clone() } else { reparameterize(&member, q, options.resolution)? };
        duals.push(legendre(&base));
    }
    let d1 = duals.pop().unwrap();
    let d0 = duals.pop().unwrap();
    Ok(Geodesic { params: *params, endpoints: [u0.clone(), u1.clone()], duals: [d0, d1], options })
}

/// `phi_t` in the interpolation coordinate: the inverse conjugate of `(1-t) g_0* + t g_1*`.
pub fn geodesic_profile(g: &Geodesic, t: f64) -> Result<RadialProfile> {
    legendre_inverse(&DualProfile::interpolate(&g.duals[0], &g.duals[1], t)?)
}

/// `phi_t` in the order-`m` coordinate, ready for energy and metric evaluation.
pub fn geodesic_eval(g: &Geodesic, t: f64) -> Result<RadialProfile> {
    let phi = geodesic_profile(g, t)?;
    if phi.coordinate() == g.params.coordinate() {
        Ok(phi)
    } else {
        reparameterize(&phi, g.params.m(), g.options.resolution)
    }
}

/// Panels per affine piece in [`smooth_e1`].
const SIMPSON_PANELS: usize = 4000;

/// `e_{1,m}` of a profile given in a coordinate of order `q >= m`.
///
/// Read in the order-`m` coordinate the profile is `g(T(tau))` with `T` convex and smooth, so its
/// Hessian measure has atoms at the images of the breakpoints plus a density on every piece.
/// The atoms are summed exactly and the densities integrated by composite Simpson rules.
pub fn smooth_e1(g: &RadialProfile, params: &HessianParams) -> Result<f64> {
    let from = g.coordinate();
    let base = params.coordinate();
    if from.n != base.n || from.q < base.q {
        return Err(Error::Coordinate(format!("{from:?} cannot be read in {base:?}")));
    }
    if from == base {
        return e1_energy(g, params);
    }
    if !g.is_bounded() {
        return Err(Error::UnboundedMass(g.slopes()[0]));
    }
    let m = params.m() as i32;
    let pm = base.exponent();
    let derivs = |tau: f64| -> (f64, f64) {
        let x = 1.0 - tau;
        if from.is_log() {
            (-1.0 / (pm * x), -1.0 / (pm * x * x))
        } else {
            let alpha = from.exponent() / pm;
            (alpha * x.powf(alpha - 1.0), -alpha * (alpha - 1.0) * x.powf(alpha - 2.0))
        }
    };
    let bps = g.breakpoints();
    let slopes = g.slopes();
    let images: Vec<f64> = bps.iter().map(|&b| from.transport(b, &base)).collect();
    let mut total = 0.0;
    for (k, (&b, &tau)) in bps.iter().zip(&images).enumerate() {
        let (d1, _) = derivs(tau);
        total += -g.value(b) * (slopes[k + 1].powi(m) - slopes[k].powi(m)) * d1.powi(m);
    }
    for k in 0..images.len() {
        let sigma = slopes[k + 1];
        let (lo, hi) = (images[k], if k + 1 < images.len() { images[k + 1] } else { 0.0 });
        let f = |tau: f64| {
            let (d1, d2) = derivs(tau);
            -g.value(base.transport(tau, &from).min(0.0)) * m as f64 * sigma.powi(m) * d1.powi(m - 1) * d2
        };
        let h = (hi - lo) / SIMPSON_PANELS as f64;
        let mut acc = f(lo) + f(hi);
        for i in 1..SIMPSON_PANELS {
            acc += f(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        total += acc * h / 3.0;
    }
    Ok(params.c() * total)
}

/// Energies and distance of the endpoints against which an audit measures deviations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReference {
    pub energy_start: f64,
    pub energy_end: f64,
    pub distance: f64,
}

/// Resolution multiplier of the reference distance for endpoints that must be reparameterized.
pub const REFERENCE_REFINEMENT: usize = 16;

/// Endpoint reference values.
///
/// Piecewise-linear endpoints in the order-`m` coordinate give exact values. Otherwise the
/// energies come from [`smooth_e1`] and the distance from a reparameterization at
/// [`REFERENCE_REFINEMENT`] times the geodesic's resolution.
pub fn audit_reference(g: &Geodesic, w: &RadialProfile) -> Result<AuditReference> {
    let params = &g.params;
    let [u0, u1] = &g.endpoints;
    let ew = e1_energy(w, params)?;
    let scale = (params.m() + 1) as f64;
    let e0 = (ew - smooth_e1(u0, params)?) / scale;
    let e1 = (ew - smooth_e1(u1, params)?) / scale;
    let lift = |u: &RadialProfile| -> Result<RadialProfile> {
        if u.coordinate() == params.coordinate() {
            Ok(u.clone())
        } else {
            reparameterize(u, params.m(), g.options.resolution * REFERENCE_REFINEMENT)
        }
    };
    let distance = metric_d(&lift(u0)?, &lift(u1)?, w, params)?;
    Ok(AuditReference { energy_start: e0, energy_end: e1, distance })
}

/// Outcome of [`geodesic_audit`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicAudit {
    pub samples: Vec<f64>,
    /// `E_w(phi_t)` at each sample.
    pub energies: Vec<f64>,
    /// `d(phi_0, phi_t)` at each sample.
    pub distances: Vec<f64>,
    /// Per-sample linearity deviation relative to the energy span.
    pub linearity_by_sample: Vec<f64>,
    pub linearity: f64,
    /// Largest `|d(phi_s, phi_t) - |t - s| D| / D` over sample pairs.
    pub metric: f64,
    /// Smallest margin of `phi_t` over `max(u0 - t|u1|, u1 - (1-t)|u0|)` on the check grid.
    pub lower_bound_margin: f64,
    /// Smallest margin of `(1-t) phi_0 + t phi_1` over `phi_t` on the check grid.
    pub upper_bound_margin: f64,
    /// `phi_t -> phi_0` and `phi_t -> phi_1` in capacity along `t = 2^-k`.
    pub capacity_ok: bool,
    pub reference: AuditReference,
}

/// Slack of the pointwise bound checks.
pub const BOUND_SLACK: f64 = 1e-10;
/// Points of the pointwise bound grid.
pub const BOUND_GRID: usize = 10_000;

impl GeodesicAudit {
    pub fn deviation(&self) -> f64 {
        self.linearity.max(self.metric)
    }

    pub fn bounds_hold(&self) -> bool {
        self.lower_bound_margin >= -BOUND_SLACK && self.upper_bound_margin >= -BOUND_SLACK
    }

    /// Trace with columns `t,energy,distance,linearity_deviation`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,energy,distance,linearity_deviation\n");
        for i in 0..self.samples.len() {
            out.push_str(&format!(
                "{},{:e},{:e},{:e}\n",
                self.samples[i], self.energies[i], self.distances[i], self.linearity_by_sample[i]
            ));
        }
        out
    }
}

/// Bound-check grid in the order-`m` coordinate covering every breakpoint of the inputs.
fn bound_grid(profiles: &[&RadialProfile], base: &Coordinate) -> Vec<f64> {
    let lo = profiles
        .iter()
        .filter_map(|p| p.breakpoints().first().map(|&b| p.coordinate().transport(b, base)))
        .fold(-1.0f64, f64::min);
    let lo = 2.0 * lo;
    (0..BOUND_GRID).map(|i| lo * (1.0 - i as f64 / (BOUND_GRID - 1) as f64)).collect()
}

fn value_in(u: &RadialProfile, tau: f64, base: &Coordinate) -> f64 {
    u.value(base.transport(tau, &u.coordinate()).min(0.0))
}

pub fn geodesic_audit(g: &Geodesic, ts: &[f64], w: &RadialProfile) -> Result<GeodesicAudit> {
    let reference = audit_reference(g, w)?;
    geodesic_audit_with(g, ts, w, reference)
}

/// [`geodesic_audit`] against given reference values.
pub fn geodesic_audit_with(g: &Geodesic, ts: &[f64], w: &RadialProfile, reference: AuditReference) -> Result<GeodesicAudit> {
    let params = &g.params;
    if ts.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(Error::Domain("audit samples must lie in [0, 1]".into()));
    }
    let profiles: Vec<RadialProfile> = ts.iter().map(|&t| geodesic_eval(g, t)).collect::<Result<_>>()?;
    let energies: Vec<f64> = profiles.iter().map(|p| Ok(energy_ew(p, w, params)?.value)).collect::<Result<_>>()?;
    let (e0, e1) = (reference.energy_start, reference.energy_end);
    let span = (e0 - e1).abs().max(e0.abs()).max(e1.abs()).max(f64::MIN_POSITIVE);
    let linearity_by_sample: Vec<f64> =
        ts.iter().zip(&energies).map(|(&t, &e)| (e - ((1.0 - t) * e0 + t * e1)).abs() / span).collect();
    let linearity = linearity_by_sample.iter().copied().fold(0.0, f64::max);

    let start = geodesic_eval(g, 0.0)?;
    let distances: Vec<f64> = profiles.iter().map(|p| metric_d(&start, p, w, params)).collect::<Result<_>>()?;
    let big_d = reference.distance;
    let mut metric: f64 = 0.0;
    for i in 0..ts.len() {
        for j in i + 1..ts.len() {
            let d = metric_d(&profiles[i], &profiles[j], w, params)?;
            let dev = (d - (ts[j] - ts[i]).abs() * big_d).abs();
            metric = metric.max(if big_d > 0.0 { dev / big_d } else { dev });
        }
    }

    let base = params.coordinate();
    let [u0, u1] = &g.endpoints;
    let (n0, n1) = (u0.sup_norm(), u1.sup_norm());
    let end = geodesic_eval(g, 1.0)?;
    let grid = bound_grid(&[u0, u1], &base);
    let mut lower_bound_margin = f64::INFINITY;
    let mut upper_bound_margin = f64::INFINITY;
    for (&t, phi) in ts.iter().zip(&profiles) {
        for &tau in &grid {
            let (a, b) = (value_in(u0, tau, &base), value_in(u1, tau, &base));
            let v = phi.value(tau);
            lower_bound_margin = lower_bound_margin.min(v - (a - t * n1).max(b - (1.0 - t) * n0));
            upper_bound_margin = upper_bound_margin.min((1.0 - t) * start.value(tau) + t * end.value(tau) - v);
        }
    }

    let capacity_ok = capacity_proxy(g, w)?;
    Ok(GeodesicAudit {
        samples: ts.to_vec(),
        energies,
        distances,
        linearity_by_sample,
        linearity,
        metric,
        lower_bound_margin,
        upper_bound_margin,
        capacity_ok,
        reference,
    })
}

/// `phi_t` approaches each endpoint in capacity: along `t = 2^-k` the capacities of the
/// exceedance sets for a fixed threshold reach zero and stay there.
fn capacity_proxy(g: &Geodesic, _w: &RadialProfile) -> Result<bool> {
    let params = &g.params;
    let ends = [geodesic_eval(g, 0.0)?, geodesic_eval(g, 1.0)?];
    let eps = 1e-3 * ends[0].sup_norm().max(ends[1].sup_norm()).max(1e-12);
    for (side, end) in ends.iter().enumerate() {
        let seq: Vec<RadialProfile> = (1..=24)
            .map(|k| {
                let h = 0.5f64.powi(k);
                geodesic_eval(g, if side == 0 { h } else { 1.0 - h })
            })
            .collect::<Result<_>>()?;
        let entries = capacity_convergence_check(&seq, end, eps, 0.5, params)?;
        let caps: Vec<f64> = entries.iter().map(|e| e.capacity).collect();
        let first_zero = caps.iter().position(|&c| c == 0.0);
        let settles = first_zero.is_some_and(|k| caps[k..].iter().all(|&c| c == 0.0));
        if !settles {
            return Ok(false);
        }
    }
    Ok(true)
}

/// One sample of [`geodesic_contraction_check`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionRow {
    pub t: f64,
    /// `d(phi_t, psi_t)`
    pub lhs: f64,
    /// `(1-t) d(u0, v0) + t d(u1, v1)`
    pub rhs: f64,
    pub ok: bool,
}

/// Relative slack of the contraction inequality.
pub const CONTRACTION_SLACK: f64 = 1e-8;

/// Compares the distance of two geodesics with the interpolated endpoint distances.
#[allow(clippy::too_many_arguments)]
pub fn geodesic_contraction_check(
    u0: &RadialProfile,
    u1: &RadialProfile,
    v0: &RadialProfile,
    v1: &RadialProfile,
    ts: &[f64],
    w: &RadialProfile,
    params: &HessianParams,
    options: GeodesicOptions,
) -> Result<Vec<ContractionRow>> {
    let gu = weak_geodesic(u0, u1, params, options)?;
    let gv = weak_geodesic(v0, v1, params, options)?;
    let d0 = metric_d(&geodesic_eval(&gu, 0.0)?, &geodesic_eval(&gv, 0.0)?, w, params)?;
    let d1 = metric_d(&geodesic_eval(&gu, 1.0)?, &geodesic_eval(&gv, 1.0)?, w, params)?;
    let mut scale = d0.max(d1);
    for p in [&gu, &gv] {
        for t in [0.0, 1.0] {
            scale = scale.max(energy_ew(&geodesic_eval(p, t)?, w, params)?.value.abs());
        }
    }
    ts.iter()
        .map(|&t| {
            let lhs = metric_d(&geodesic_eval(&gu, t)?, &geodesic_eval(&gv, t)?, w, params)?;
            let rhs = (1.0 - t) * d0 + t * d1;
            Ok(ContractionRow { t, lhs, rhs, ok: lhs <= rhs + CONTRACTION_SLACK * scale })
        })
        .collect()
}

/// Geodesics between the terms of two decreasing sequences, evaluated at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneLimit {
    /// `phi_t` for the last pair, the best available approximation of the limit.
    pub profile: RadialProfile,
    pub terms: Vec<RadialProfile>,
    /// Whether `phi_t^j` decreased in `j` at every breakpoint.
    pub decreasing: bool,
    /// Sup distance between the last two terms.
    pub last_step: f64,
}

pub fn monotone_geodesic_limit(
    us: &[RadialProfile],
    vs: &[RadialProfile],
    t: f64,
    params: &HessianParams,
    options: GeodesicOptions,
) -> Result<MonotoneLimit> {
    if us.is_empty() || us.len() != vs.len() {
        return Err(Error::Domain("sequences must be nonempty and of equal length".into()));
    }
    for seq in [us, vs] {
        for pair in seq.windows(2) {
            if !RadialProfile::le(&pair[1], &pair[0], 1e-12) {
                return Err(Error::Domain("sequence is not decreasing".into()));
            }
        }
    }
    let terms: Vec<RadialProfile> = us
        .iter()
        .zip(vs)
        .map(|(u, v)| geodesic_eval(&weak_geodesic(u, v, params, options)?, t))
        .collect::<Result<_>>()?;
    let decreasing = terms.windows(2).all(|p| RadialProfile::le(&p[1], &p[0], 1e-10));
    let last_step = match terms.len() {
        1 => 0.0,
        k => RadialProfile::sup_distance(&terms[k - 1], &terms[k - 2]),
    };
    Ok(MonotoneLimit { profile: terms.last().unwrap().clone(), terms, decreasing, last_step })
}

/// Audit deviation at each resolution, against one reference computed above the finest.
pub fn resolution_sweep(
    u0: &RadialProfile,
    u1: &RadialProfile,
    w: &RadialProfile,
    ts: &[f64],
    resolutions: &[usize],
    params: &HessianParams,
) -> Result<Vec<(usize, GeodesicAudit)>> {
    let finest = resolutions.iter().copied().max().ok_or_else(|| Error::Domain("no resolutions".into()))?;
    let top = weak_geodesic(u0, u1, params, GeodesicOptions { resolution: finest, ..Default::default() })?;
    let reference = audit_reference(&top, w)?;
    resolutions
        .iter()
        .map(|&r| {
            let g = weak_geodesic(u0, u1, params, GeodesicOptions { resolution: r, ..Default::default() })?;
            Ok((r, geodesic_audit_with(&g, ts, w, reference)?))
        })
        .collect()
}

/// `t_i = i / (count - 1)`.
pub fn uniform_samples(count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..count).map(|i| i as f64 / (count - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, m: usize) -> HessianParams {
        HessianParams::new(n, m).unwrap()
    }

    #[test]
    fn kink_endpoints_move_the_kink_linearly() {
        let p = params(2, 2);
        let u0 = RadialProfile::kink(p.coordinate(), 1.0, -1.0).unwrap();
        let u1 = RadialProfile::kink(p.coordinate(), 1.0, -0.5).unwrap();
        let g = weak_geodesic(&u0, &u1, &p, GeodesicOptions::default()).unwrap();
        assert_eq!(geodesic_eval(&g, 0.0).unwrap(), u0);
        assert_eq!(geodesic_eval(&g, 1.0).unwrap(), u1);
        let mid = geodesic_eval(&g, 0.5).unwrap();
        let expected = RadialProfile::kink(p.coordinate(), 1.0, -0.75).unwrap();
        assert!(RadialProfile::sup_distance(&mid, &expected) < 1e-15);
    }

    #[test]
    fn zero_to_kink() {
        let p = params(3, 3);
        let u1 = RadialProfile::kink(p.coordinate(), 1.0, -0.6).unwrap();
        let g = weak_geodesic(&RadialProfile::zero(p.coordinate()), &u1, &p, GeodesicOptions::default()).unwrap();
        let phi = geodesic_eval(&g, 0.25).unwrap();
        let expected = RadialProfile::kink(p.coordinate(), 1.0, -0.15).unwrap();
        assert!(RadialProfile::sup_distance(&phi, &expected) < 1e-15);
    }

    #[test]
    fn lower_order_lines_are_not_members() {
        let p = params(2, 1);
        let u = RadialProfile::kink(p.coordinate(), 1.0, -1.0).unwrap();
        let z = RadialProfile::zero(p.coordinate());
        assert!(matches!(weak_geodesic(&u, &z, &p, GeodesicOptions::default()), Err(Error::Membership(_))));
    }

    #[test]
    fn smooth_energy_matches_fine_reparameterization() {
        let p = params(3, 2);
        let hi = Coordinate::new(3, 3).unwrap();
        let g = RadialProfile::new(hi, vec![-1.2, -0.3], vec![0.0, 0.5, 1.5]).unwrap();
        let exact = smooth_e1(&g, &p).unwrap();
        let mut prev = f64::INFINITY;
        for r in [512, 2048, 8192] {
            let err = (e1_energy(&reparameterize(&g, 2, r).unwrap(), &p).unwrap() - exact).abs() / exact;
            assert!(err < prev);
            prev = err;
        }
        assert!(prev < 1e-5, "{prev}");
    }

    #[test]
    fn constant_geodesic_has_zero_deviation() {
        let p = params(2, 2);
        let u = RadialProfile::new(p.coordinate(), vec![-1.0, -0.2], vec![0.0, 0.5, 2.0]).unwrap();
        let g = weak_geodesic(&u, &u, &p, GeodesicOptions::default()).unwrap();
        let audit = geodesic_audit(&g, &uniform_samples(5), &RadialProfile::zero(p.coordinate())).unwrap();
        assert_eq!(audit.metric, 0.0);
        assert!(audit.linearity < 1e-15);
        assert!(audit.bounds_hold() && audit.capacity_ok);
    }
}
