//! Brute-force numerics on a log-spaced radius grid.
//!
//! Radial functions are sampled, mollified in `ln s`, differentiated by fourth-order centered
//! differences and pushed through the eigenvalue decomposition of the complex Hessian. Nothing
//! here reads atoms or slopes of a profile except through point evaluation.

mod perron;

pub use perron::{perron_geodesic, PerronOptions, PerronSheet};

use std::f64::consts::PI;

use crate::coords::Coordinate;
use crate::error::{Error, Result};
use crate::profile::RadialProfile;

pub const DEFAULT_NODES: usize = 4096;
pub const RADIUS_FLOOR: f64 = 1e-6;
/// Full support of the smoothing bump, in grid cells.
pub const MOLLIFY_WIDTH: usize = 8;

/// Radial samples `f(s_i)` on log-spaced radii in `[RADIUS_FLOOR, 1]`, padded by a halo of
/// nodes on both sides so that smoothing and differencing never run off the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    n: usize,
    nodes: usize,
    halo: usize,
    step: f64,
    values: Vec<f64>,
}

impl GridFunction {
    /// Samples `f` (a function of the radius) on `nodes` interior radii.
    pub fn from_fn(n: usize, nodes: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if nodes < 16 {
            return Err(Error::Domain(format!("grid needs at least 16 nodes, got {nodes}")));
        }
        let halo = MOLLIFY_WIDTH / 2 + 10;
        let step = -RADIUS_FLOOR.ln() / (nodes - 1) as f64;
        let total = nodes + 2 * halo;
        let values = (0..total)
            .map(|i| {
                let rho = RADIUS_FLOOR.ln() + (i as f64 - halo as f64) * step;
                f(rho.exp())
            })
            .collect();
        Ok(GridFunction { n, nodes, halo, step, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.nodes
    }

    pub fn is_empty(&self) -> bool {
        self.nodes == 0
    }

    /// Spacing in `ln s`.
    pub fn step(&self) -> f64 {
        self.step
    }

    fn rho_at(&self, i: usize) -> f64 {
        RADIUS_FLOOR.ln() + (i as f64 - self.halo as f64) * self.step
    }

    /// Interior radii, increasing from `RADIUS_FLOOR` to 1.
    pub fn radii(&self) -> Vec<f64> {
        (0..self.nodes).map(|i| self.rho_at(i + self.halo).exp()).collect()
    }

    /// Interior samples.
    pub fn values(&self) -> &[f64] {
        &self.values[self.halo..self.halo + self.nodes]
    }

    fn same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.n != other.n || self.nodes != other.nodes {
            return Err(Error::Domain("grid functions live on different grids".into()));
        }
        Ok(())
    }

    fn map_values(&self, values: Vec<f64>) -> GridFunction {
        GridFunction { values, ..self.clone() }
    }
}

/// Samples a profile at the radii of a grid; node values are exact profile values.
pub fn sample_radial(g: &RadialProfile, nodes: usize) -> Result<GridFunction> {
    let coord = g.coordinate();
    GridFunction::from_fn(coord.n, nodes, |s| g.value(coord.tau_unchecked(s)))
}

fn smoothing_kernel(width: usize) -> Vec<f64> {
    let half = (width / 2).max(1) as f64;
    let reach = width / 2;
    let raw: Vec<f64> = (0..=2 * reach)
        .map(|j| {
            let x = (j as f64 - reach as f64) / half;
            (1.0 - x * x).max(0.0).powi(3)
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

fn smoothed(f: &GridFunction, width: usize) -> Vec<f64> {
    let kernel = smoothing_kernel(width);
    let reach = kernel.len() / 2;
    let total = f.values.len();
    let mut smooth = f.values.clone();
    if reach > 0 {
        for (i, out) in smooth.iter_mut().enumerate().take(total - reach).skip(reach) {
            *out = kernel.iter().enumerate().map(|(j, w)| w * f.values[i + j - reach]).sum();
        }
    }
    smooth
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Eigenvalues of the complex Hessian of `f(|z|)` at the interior nodes, from fourth-order
/// differences of the raw samples: tangential `f'(s)/(2s)` (multiplicity `n - 1`) and radial
/// `(f''(s) + f'(s)/s)/4`.
pub fn radial_eigenvalues(f: &GridFunction) -> (Vec<f64>, Vec<f64>) {
    let h = f.step;
    let v = &f.values;
    let mut tangential = Vec::with_capacity(f.nodes);
    let mut radial = Vec::with_capacity(f.nodes);
    for i in f.halo..f.halo + f.nodes {
        let (a, b, c, d, e) = (v[i - 2], v[i - 1], v[i], v[i + 1], v[i + 2]);
        let d1 = (a - 8.0 * b + 8.0 * d - e) / (12.0 * h);
        let d2 = (-a + 16.0 * b - 30.0 * c + 16.0 * d - e) / (12.0 * h * h);
        let s2 = (2.0 * f.rho_at(i)).exp();
        tangential.push(d1 / (2.0 * s2));
        radial.push(d2 / (4.0 * s2));
    }
    (tangential, radial)
}

/// Degree-`m` elementary symmetric combination of per-factor eigenvalues, with the tangential
/// eigenvalue counted `n - 1` times, divided by `binom(n, m)`.
pub fn mixed_symmetric(n: usize, tangential: &[f64], radial: &[f64]) -> f64 {
    let m = tangential.len();
    let prod: f64 = tangential.iter().product();
    let mut cross = 0.0;
    for k in 0..m {
        let others: f64 = tangential.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, x)| x).product();
        cross += radial[k] * others;
    }
    (binomial(n - 1, m) * prod + binomial(n - 1, m - 1) * cross / m as f64) / binomial(n, m)
}

/// Flux of the un-normalized mixed density at grid indices `lo..hi`.
///
/// With `t_i = f_i'/2` and `r_i = f_i''/4` (derivatives in `ln s`), the symmetric combination
/// times the volume factor `s^(2n)` equals `d/d ln s [prod f_i' s^(2n-2m)] / (n 2^(m+1))`. The
/// flux in brackets is discretized with centered differences of the mollified samples; it is
/// exactly constant where every factor is maximal and nondecreasing for subharmonic samples.
fn mixed_flux(factors: &[&GridFunction], width: usize, lo: usize, hi: usize) -> Result<Vec<f64>> {
    let first = factors.first().ok_or_else(|| Error::Arity { expected: 1, got: 0 })?;
    for f in factors {
        first.same_grid(f)?;
    }
    let n = first.n;
    let m = factors.len();
    if m > n {
        return Err(Error::Arity { expected: n, got: m });
    }
    let h = first.step;
    let smooth: Vec<Vec<f64>> = factors.iter().map(|f| smoothed(f, width)).collect();
    Ok((lo..hi)
        .map(|i| {
            let prod: f64 = smooth.iter().map(|v| (v[i + 1] - v[i - 1]) / (2.0 * h)).product();
            prod * ((2 * (n - m)) as f64 * first.rho_at(i)).exp()
        })
        .collect())
}

fn flux_constant(n: usize, m: usize) -> f64 {
    1.0 / (n as f64 * 2f64.powi(m as i32 + 1))
}

fn raw_mixed_density(factors: &[&GridFunction], width: usize) -> Result<Vec<f64>> {
    raw_mixed_density_beyond(factors, width, 0)
}

/// Raw density at the interior nodes followed by `beyond` nodes outside the unit sphere.
fn raw_mixed_density_beyond(factors: &[&GridFunction], width: usize, beyond: usize) -> Result<Vec<f64>> {
    let first = factors.first().ok_or_else(|| Error::Arity { expected: 1, got: 0 })?;
    let h = first.step;
    let flux = mixed_flux(factors, width, first.halo - 1, first.halo + first.nodes + beyond + 1)?;
    let k = flux_constant(first.n, factors.len());
    let values: Vec<f64> = (1..flux.len() - 1).map(|j| k * (flux[j + 1] - flux[j - 1]) / (2.0 * h)).collect();
    let largest = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if let Some(i) = values.iter().position(|&v| v < -1e-8 * largest) {
        return Err(Error::NegativeMass { tau: first.rho_at(i + first.halo), mass: values[i], scale: largest });
    }
    Ok(values.into_iter().map(|v| v.max(0.0)).collect())
}

/// Slope of sampled data on one grid cell, possibly with a single interior kink at fraction
/// `split` of the cell.
#[derive(Clone, Copy, Debug)]
struct CellSlope {
    split: f64,
    left: f64,
    right: f64,
}

impl CellSlope {
    fn at(&self, frac: f64) -> f64 {
        if frac < self.split {
            self.left
        } else {
            self.right
        }
    }
}

/// A second difference counts as a kink when it dominates both neighbours by this factor.
const ISOLATION: f64 = 1e3;

/// Cell slopes in the coordinate `xs`, with subcell resolution of isolated kinks: a cell whose
/// two end nodes carry the only significant second differences nearby is split where the
/// extended neighbouring lines meet.
fn cell_slopes(values: &[f64], xs: &[f64], first_cell: usize, cells: usize) -> Vec<CellSlope> {
    let slope = |c: usize| (values[c + 1] - values[c]) / (xs[c + 1] - xs[c]);
    let jump = |c: usize| slope(c) - slope(c - 1);
    (first_cell..first_cell + cells)
        .map(|c| {
            let own = slope(c);
            let plain = CellSlope { split: 0.0, left: own, right: own };
            let (into, out) = (jump(c), jump(c + 1));
            let quiet = jump(c - 1).abs().max(jump(c + 2).abs());
            if into.signum() != out.signum() || into.abs().min(out.abs()) <= ISOLATION * quiet {
                return plain;
            }
            let (left, right) = (slope(c - 1), slope(c + 1));
            let split = (right - own) / (right - left);
            if (0.0..=1.0).contains(&split) {
                CellSlope { split, left, right }
            } else {
                plain
            }
        })
        .collect()
}

/// `int phi d(mixed measure)` for `phi = sum c_k f_k`, in divergence form: the boundary flux
/// term minus `int phi' F`, evaluated in the coordinate `tau_m` where the flux of the factors
/// is `|p|^m prod g_i'`.
pub fn pair_with_mixed(phi: &[(f64, &GridFunction)], factors: &[&GridFunction]) -> Result<f64> {
    let first = factors.first().ok_or_else(|| Error::Arity { expected: 1, got: 0 })?;
    for f in factors.iter().chain(phi.iter().map(|(_, f)| f)) {
        first.same_grid(f)?;
    }
    let (n, m) = (first.n, factors.len());
    if m > n {
        return Err(Error::Arity { expected: n, got: m });
    }
    let coord = Coordinate::new(n, m)?;
    let xs: Vec<f64> = (0..first.values.len()).map(|i| coord.tau_unchecked(first.rho_at(i).exp())).collect();
    let start = first.halo;
    let cells = first.nodes - 1;
    let slopes = |f: &GridFunction| cell_slopes(&f.values, &xs, start, cells);
    let phi_cells: Vec<(f64, Vec<CellSlope>)> = phi.iter().map(|(c, f)| (*c, slopes(f))).collect();
    let factor_cells: Vec<Vec<CellSlope>> = factors.iter().map(|f| slopes(f)).collect();
    let flux_at = |c: usize, frac: f64| -> f64 { factor_cells.iter().map(|fc| fc[c].at(frac)).product() };
    let phi_slope = |c: usize, frac: f64| -> f64 { phi_cells.iter().map(|(k, fc)| k * fc[c].at(frac)).sum() };
    let phi_value = |i: usize| -> f64 { phi.iter().map(|(k, f)| k * f.values[start + i]).sum() };
    let mut interior = 0.0;
    let mut cuts = Vec::new();
    for c in 0..cells {
        cuts.clear();
        cuts.extend([0.0, 1.0]);
        cuts.extend(phi_cells.iter().map(|(_, fc)| fc[c].split));
        cuts.extend(factor_cells.iter().map(|fc| fc[c].split));
        cuts.sort_by(f64::total_cmp);
        let width = xs[start + c + 1] - xs[start + c];
        for pair in cuts.windows(2) {
            if pair[1] > pair[0] {
                let mid = 0.5 * (pair[0] + pair[1]);
                interior += (pair[1] - pair[0]) * width * phi_slope(c, mid) * flux_at(c, mid);
            }
        }
    }
    let boundary = phi_value(cells) * flux_at(cells - 1, 1.0) - phi_value(0) * flux_at(0, 0.0);
    let weight = if coord.is_log() { 1.0 } else { coord.exponent().abs().powi(m as i32) };
    let scale = normalization(n, first.nodes)?;
    Ok(scale * flux_constant(n, m) * weight * (boundary - interior))
}

fn trapezoid(step: f64, values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    if v.len() < 2 {
        return 0.0;
    }
    let inner: f64 = v[1..v.len() - 1].iter().sum();
    step * (inner + 0.5 * (v[0] + v[v.len() - 1]))
}

/// Multiplier turning raw densities into Hessian masses: the smoothed unit kink of the
/// Monge-Ampere case must carry `(2 pi)^n`.
pub fn normalization(n: usize, nodes: usize) -> Result<f64> {
    let coord = Coordinate::new(n, n)?;
    let kink = RadialProfile::kink(coord, 1.0, -1.0)?;
    let g = sample_radial(&kink, nodes)?;
    let factors = vec![&g; n];
    let raw = raw_mixed_density(&factors, MOLLIFY_WIDTH)?;
    let mass = trapezoid(g.step, raw.into_iter());
    Ok((2.0 * PI).powi(n as i32) / mass)
}

/// Normalized mixed Hessian density (mass per unit `ln s`) of `factors.len()` slots.
pub fn mixed_density_fd(factors: &[&GridFunction], width: usize) -> Result<Vec<f64>> {
    let first = factors.first().ok_or_else(|| Error::Arity { expected: 1, got: 0 })?;
    let scale = normalization(first.n, first.nodes)?;
    Ok(raw_mixed_density(factors, width)?.into_iter().map(|x| x * scale).collect())
}

/// Normalized `H_m` density of a single function, per unit `ln s`.
pub fn hessian_density_fd(f: &GridFunction, m: usize, width: usize) -> Result<Vec<f64>> {
    if m == 0 || m > f.n {
        return Err(Error::Params(format!("order {m} invalid for n = {}", f.n)));
    }
    mixed_density_fd(&vec![f; m], width)
}

/// `int h dmu` for interior samples `h` and a density per unit `ln s`.
pub fn integrate_density(f: &GridFunction, h: &[f64], density: &[f64]) -> f64 {
    trapezoid(f.step, h.iter().zip(density).map(|(a, b)| a * b))
}

/// Nodes past the unit sphere over which [`total_mass`] integrates.
const OUTER_REACH: usize = MOLLIFY_WIDTH / 2 + 2;

/// Mass of `H_m(f)` on the closed unit ball.
///
/// Samples outside the unit sphere continue the last affine piece of the profile and carry no
/// mass, so the quadrature runs a few nodes past it to collect what the mollifier moved there.
pub fn total_mass(f: &GridFunction, m: usize) -> Result<f64> {
    if m == 0 || m > f.n {
        return Err(Error::Params(format!("order {m} invalid for n = {}", f.n)));
    }
    let scale = normalization(f.n, f.nodes)?;
    let raw = raw_mixed_density_beyond(&vec![f; m], MOLLIFY_WIDTH, OUTER_REACH)?;
    Ok(scale * trapezoid(f.step, raw.into_iter()))
}

/// Mass of `H_m(f)` on the shells between consecutive radii of `cuts` (increasing, clamped to
/// the grid), as the difference of the fluxes through the bounding spheres.
pub fn shell_masses(f: &GridFunction, m: usize, cuts: &[f64]) -> Result<Vec<f64>> {
    let n = f.n;
    if m == 0 || m > n {
        return Err(Error::Params(format!("order {m} invalid for n = {n}")));
    }
    let coord = Coordinate::new(n, m)?;
    let xs: Vec<f64> = (0..f.values.len()).map(|i| coord.tau_unchecked(f.rho_at(i).exp())).collect();
    let (start, cells) = (f.halo, f.nodes - 1);
    let slopes = cell_slopes(&f.values, &xs, start, cells);
    let weight = if coord.is_log() { 1.0 } else { coord.exponent().abs().powi(m as i32) };
    let scale = normalization(n, f.nodes)? * flux_constant(n, m) * weight;
    let flux = |radius: f64| -> f64 {
        let rho = radius.ln().clamp(f.rho_at(start), f.rho_at(start + cells));
        let pos = (rho - f.rho_at(start)) / f.step;
        let c = (pos.floor() as usize).min(cells - 1);
        let x = coord.tau_unchecked(rho.exp());
        let frac = ((x - xs[start + c]) / (xs[start + c + 1] - xs[start + c])).clamp(0.0, 1.0);
        scale * slopes[c].at(frac).powi(m as i32)
    };
    Ok(cuts.windows(2).map(|w| flux(w[1]) - flux(w[0])).collect())
}

/// Measured mass of the unit kink `max(tau_m, -1)`; this defines the constant for `m < n`.
pub fn kink_mass(n: usize, m: usize, nodes: usize) -> Result<f64> {
    let coord = Coordinate::new(n, m)?;
    let kink = RadialProfile::kink(coord, 1.0, -1.0)?;
    total_mass(&sample_radial(&kink, nodes)?, m)
}

pub fn oracle_e1(u: &GridFunction, m: usize) -> Result<f64> {
    pair_with_mixed(&[(-1.0, u)], &vec![u; m])
}

/// `E_w(u)` by quadrature against the mixed measures of `u` and `w`.
pub fn oracle_energy(u: &GridFunction, w: &GridFunction, m: usize) -> Result<f64> {
    u.same_grid(w)?;
    let mut total = 0.0;
    for j in 0..=m {
        let mut factors = vec![u; j];
        factors.extend(std::iter::repeat(w).take(m - j));
        total += pair_with_mixed(&[(1.0, u), (-1.0, w)], &factors)?;
    }
    Ok(total / (m + 1) as f64)
}

/// `int (a - b)(H_m(b) - H_m(a))`.
pub fn oracle_aubin_i(a: &GridFunction, b: &GridFunction, m: usize) -> Result<f64> {
    a.same_grid(b)?;
    let diff = [(1.0, a), (-1.0, b)];
    Ok(pair_with_mixed(&diff, &vec![b; m])? - pair_with_mixed(&diff, &vec![a; m])?)
}

/// Greatest minorant of `min(u, v)` convex in `tau_m`, from the grid nodes together with the
/// subcell kink points of `u` and `v`, sampled back onto the nodes.
pub fn oracle_envelope(u: &GridFunction, v: &GridFunction, m: usize) -> Result<GridFunction> {
    u.same_grid(v)?;
    let coord = Coordinate::new(u.n, m)?;
    let total = u.values.len();
    let xs: Vec<f64> = (0..total).map(|i| coord.tau_unchecked(u.rho_at(i).exp())).collect();
    let (start, cells) = (u.halo, u.nodes - 1);
    let su = cell_slopes(&u.values, &xs, start, cells);
    let sv = cell_slopes(&v.values, &xs, start, cells);
    let at = |f: &GridFunction, cs: &[CellSlope], c: usize, frac: f64| -> f64 {
        let width = xs[start + c + 1] - xs[start + c];
        let cell = cs[c];
        let base = f.values[start + c];
        if frac <= cell.split {
            base + cell.left * frac * width
        } else {
            base + (cell.left * cell.split + cell.right * (frac - cell.split)) * width
        }
    };
    let last = start + u.nodes - 1;
    let mut points: Vec<(f64, f64)> = (0..=last).map(|i| (xs[i], u.values[i].min(v.values[i]))).collect();
    for c in 0..cells {
        for split in [su[c].split, sv[c].split] {
            if split > 0.0 && split < 1.0 {
                let x = xs[start + c] + split * (xs[start + c + 1] - xs[start + c]);
                points.push((x, at(u, &su, c, split).min(at(v, &sv, c, split))));
            }
        }
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for &pt in &points {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 - a.0) * (pt.1 - a.1) - (b.1 - a.1) * (pt.0 - a.0);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    let mut values = vec![0.0; total];
    let mut seg = 0;
    for (i, out) in values.iter_mut().enumerate() {
        while seg + 2 < hull.len() && hull[seg + 1].0 <= xs[i] {
            seg += 1;
        }
        let (a, b) = (hull[seg], hull[(seg + 1).min(hull.len() - 1)]);
        *out = if b.0 == a.0 { a.1 } else { a.1 + (b.1 - a.1) * (xs[i] - a.0) / (b.0 - a.0) };
    }
    Ok(u.map_values(values))
}

/// `d(u, v)` from quadrature energies and the grid envelope.
pub fn oracle_metric(u: &GridFunction, v: &GridFunction, w: &GridFunction, m: usize) -> Result<f64> {
    let p = oracle_envelope(u, v, m)?;
    Ok(oracle_energy(u, w, m)? + oracle_energy(v, w, m)? - 2.0 * oracle_energy(&p, w, m)?)
}

/// `int_B |u - v| dV` with the Lebesgue volume of `C^n`.
pub fn oracle_l1(u: &GridFunction, v: &GridFunction) -> Result<f64> {
    u.same_grid(v)?;
    let n = u.n;
    let sphere = 2.0 * PI.powi(n as i32) / (1..n).map(|k| k as f64).product::<f64>();
    let weights: Vec<f64> = (0..u.nodes).map(|i| (2.0 * n as f64 * u.rho_at(i + u.halo)).exp()).collect();
    let diff: Vec<f64> = u.values().iter().zip(v.values()).map(|(a, b)| (a - b).abs()).collect();
    Ok(sphere * integrate_density(u, &diff, &weights))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampled_kink_is_exact_at_nodes() {
        let c = Coordinate::new(2, 2).unwrap();
        let g = RadialProfile::kink(c, 1.0, -0.5).unwrap();
        let f = sample_radial(&g, 512).unwrap();
        for (s, v) in f.radii().iter().zip(f.values()) {
            assert_eq!(*v, g.value(c.tau_unchecked(*s)));
        }
        let z = sample_radial(&RadialProfile::zero(c), 128).unwrap();
        assert!(z.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn normalization_matches_closed_form() {
        for n in 2..=3 {
            let expected = 2.0 * n as f64 * (4.0 * PI).powi(n as i32);
            let got = normalization(n, DEFAULT_NODES).unwrap();
            assert!((got / expected - 1.0).abs() < 1e-3, "n = {n}: {got} vs {expected}");
        }
    }

    #[test]
    fn smooth_quadratic_mass_is_resolution_stable() {
        // |z|^2 inside the ball, continued affinely in the order-m coordinate outside it
        let outside = [|s: f64| 2.0 - 1.0 / (s * s), |s: f64| 1.0 + 2.0 * s.ln()];
        for m in 1..=2 {
            let f = |s: f64| if s <= 1.0 { s * s } else { outside[m - 1](s) };
            let a = total_mass(&GridFunction::from_fn(2, 2048, f).unwrap(), m).unwrap();
            let b = total_mass(&GridFunction::from_fn(2, 4096, f).unwrap(), m).unwrap();
            assert!(a > 0.0);
            assert!((a / b - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn flux_form_agrees_with_eigenvalues_on_smooth_data() {
        for (n, m) in [(2, 1), (2, 2), (3, 2)] {
            let f = GridFunction::from_fn(n, 4096, |s| s.powi(4) + s * s).unwrap();
            let d = hessian_density_fd(&f, m, 0).unwrap();
            let scale = normalization(n, 4096).unwrap();
            let (t, r) = radial_eigenvalues(&f);
            let radii = f.radii();
            for i in (100..4000).step_by(97) {
                let direct = scale * mixed_symmetric(n, &vec![t[i]; m], &vec![r[i]; m]) * radii[i].powi(2 * n as i32);
                assert!((d[i] / direct - 1.0).abs() < 1e-3, "n={n} m={m} i={i}: {} vs {direct}", d[i]);
            }
        }
    }

    #[test]
    fn l1_of_identical_functions_vanishes() {
        let c = Coordinate::new(2, 2).unwrap();
        let f = sample_radial(&RadialProfile::kink(c, 2.0, -1.0).unwrap(), 256).unwrap();
        assert_eq!(oracle_l1(&f, &f).unwrap(), 0.0);
        assert_eq!(oracle_energy(&f, &f, 2).unwrap(), 0.0);
    }
}
