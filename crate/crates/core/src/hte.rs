//! Radial Hessian-type equations `H_m(phi) = F(phi, tau) mu` on atomic data.
//!
//! The unknowns are the log-masses `z_k` of `H_m(phi)` at the atoms. The profile is rebuilt
//! from the masses in double-double arithmetic, which keeps `e^{j phi}` meaningful for `j`
//! in the billions, and the fixed-point equation `z = ln(F(phi(z)) mu)` is solved by damped
//! Newton steps.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::coords::HessianParams;
use crate::error::{Error, Result};
use crate::measure::{hessian_measure, AtomicMeasure, ATOM_MERGE_TOL};
use crate::profile::{merged_breakpoints, RadialProfile};

/// `weight * exp(rate * (x - anchor))`, one summand of an atom's target mass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MassTerm {
    pub weight: f64,
    pub rate: f64,
    pub anchor: TwoFloat,
}

/// Atom locations and, per atom, the nondecreasing target mass `F(x, tau_k) mu_k` as a sum of
/// exponentials in `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct HteProblem {
    params: HessianParams,
    locations: Vec<f64>,
    terms: Vec<Vec<MassTerm>>,
}

impl HteProblem {
    pub fn new(params: HessianParams, locations: Vec<f64>, terms: Vec<Vec<MassTerm>>) -> Result<Self> {
        if locations.len() != terms.len() {
            return Err(Error::Domain("one term list per atom is required".into()));
        }
        if locations.windows(2).any(|w| w[0] >= w[1]) || locations.last().is_some_and(|&t| t > 0.0) {
            return Err(Error::Domain("atom locations must increase and stay in the ball".into()));
        }
        for t in terms.iter().flatten() {
            if !(t.weight >= 0.0) || !(t.rate >= 0.0) || !t.weight.is_finite() || !t.rate.is_finite() {
                return Err(Error::Domain("mass terms need finite nonnegative weights and rates".into()));
            }
        }
        let keep: Vec<bool> = terms.iter().map(|ts| ts.iter().any(|t| t.weight > 0.0)).collect();
        let locations = locations.iter().zip(&keep).filter(|(_, k)| **k).map(|(x, _)| *x).collect();
        let terms = terms
            .into_iter()
            .zip(&keep)
            .filter(|(_, k)| **k)
            .map(|(ts, _)| ts.into_iter().filter(|t| t.weight > 0.0).collect())
            .collect();
        Ok(HteProblem { params, locations, terms })
    }

    /// `F = 1`: the Dirichlet problem for `mu`.
    pub fn unit(mu: &AtomicMeasure, params: &HessianParams) -> Result<Self> {
        let locations = mu.atoms().iter().map(|a| a.tau).collect();
        let terms = mu
            .atoms()
            .iter()
            .map(|a| vec![MassTerm { weight: a.mass, rate: 0.0, anchor: TwoFloat::from(0.0) }])
            .collect();
        HteProblem::new(*params, locations, terms)
    }

    /// `H_m(phi) = sum_s exp(j (phi - s)) H_m(s)` over the given sources.
    pub fn exponential(sources: &[&RadialProfile], j: f64, params: &HessianParams) -> Result<Self> {
        let measures: Vec<AtomicMeasure> = sources.iter().map(|s| hessian_measure(s, params)).collect::<Result<_>>()?;
        let mut locations: Vec<f64> = Vec::new();
        for mu in &measures {
            locations.extend(mu.atoms().iter().map(|a| a.tau));
        }
        locations.sort_by(f64::total_cmp);
        locations.dedup_by(|a, b| (*a - *b).abs() <= ATOM_MERGE_TOL * (1.0 + a.abs()));
        let terms = locations
            .iter()
            .map(|&tau| {
                sources
                    .iter()
                    .zip(&measures)
                    .filter_map(|(s, mu)| {
                        let mass = mu.mass_at(tau);
                        (mass > 0.0).then(|| MassTerm { weight: mass, rate: j, anchor: value_dd(s, tau) })
                    })
                    .collect()
            })
            .collect();
        HteProblem::new(*params, locations, terms)
    }

    pub fn locations(&self) -> &[f64] {
        &self.locations
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    /// `ln(F(x, tau_k) mu_k)` and its derivative in `x`.
    fn log_target(&self, k: usize, x: TwoFloat) -> (f64, f64) {
        let exps: Vec<(f64, f64, f64)> = self.terms[k]
            .iter()
            .map(|t| {
                let gap = if t.rate == 0.0 { 0.0 } else { to_f64(x - t.anchor) };
                (t.weight.ln() + t.rate * gap, t.rate, t.weight)
            })
            .collect();
        let top = exps.iter().map(|e| e.0).fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        let mut dsum = 0.0;
        for (e, rate, _) in &exps {
            let p = (e - top).exp();
            sum += p;
            dsum += rate * p;
        }
        (top + sum.ln(), dsum / sum)
    }
}

/// Profile value in double-double, accumulated from the anchor at zero.
pub fn value_dd(g: &RadialProfile, tau: f64) -> TwoFloat {
    let bps = g.breakpoints();
    let slopes = g.slopes();
    let mut acc = TwoFloat::from(0.0);
    let mut right = 0.0;
    for i in (0..bps.len()).rev() {
        let lo = bps[i].max(tau);
        if lo >= right {
            break;
        }
        acc -= TwoFloat::new_sub(right, lo) * slopes[i + 1];
        right = lo;
        if tau >= bps[i] {
            return acc;
        }
    }
    if tau < right {
        acc -= TwoFloat::new_sub(right, tau) * slopes[0];
    }
    acc
}

fn to_f64(x: TwoFloat) -> f64 {
    x.hi() + x.lo()
}

const LN2_HI: f64 = std::f64::consts::LN_2;
const LN2_LO: f64 = 2.319_046_813_846_299_6e-17;

/// `exp(z)` to double-double accuracy for an exactly given `f64` argument.
pub fn exp_dd(z: f64) -> Option<TwoFloat> {
    if z < -708.0 {
        return Some(TwoFloat::from(0.0));
    }
    if !(z <= 709.0) {
        return None;
    }
    let k = (z / LN2_HI).round();
    let r = TwoFloat::from(z) - TwoFloat::new_mul(LN2_HI, k) - TwoFloat::from(LN2_LO * k);
    let mut term = TwoFloat::from(1.0);
    let mut sum = TwoFloat::from(1.0);
    for i in 1..=27 {
        term = term * r / (i as f64);
        sum += term;
    }
    let scale = 2f64.powi(k as i32);
    Some(TwoFloat::from(sum.hi() * scale) + TwoFloat::from(sum.lo() * scale))
}

/// `a^(1/m)` in double-double: an `f64` root refined by one Newton step.
fn root_dd(a: TwoFloat, m: usize) -> TwoFloat {
    if a.hi() <= 0.0 {
        return TwoFloat::from(0.0);
    }
    if m == 1 {
        return a;
    }
    let y0 = TwoFloat::from(a.hi().powf(1.0 / m as f64));
    let mut pow = TwoFloat::from(1.0);
    for _ in 0..m - 1 {
        pow = pow * y0;
    }
    y0 - (pow * y0 - a) / (pow * m as f64)
}

/// Per-iteration trace of a solve.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub residual: f64,
    pub sup_change: f64,
    pub j: f64,
    pub energy: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationLog {
    pub records: Vec<IterationRecord>,
    /// `(j, phi_j >= phi_{j/2} - 1e-10 at every atom)` for each step of a schedule.
    pub monotone: Vec<(f64, bool)>,
    /// `(j, target masses stayed finite and bounded by the source masses)`.
    pub bounded: Vec<(f64, bool)>,
}

impl IterationLog {
    /// Trace as CSV with columns `iteration,residual,sup_change,j`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,residual,sup_change,j\n");
        for r in &self.records {
            out.push_str(&format!("{},{:e},{:e},{}\n", r.iteration, r.residual, r.sup_change, r.j));
        }
        out
    }

    pub fn all_monotone(&self) -> bool {
        self.monotone.iter().all(|(_, ok)| *ok)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HteOptions {
    pub max_iter: usize,
    /// Allowed per-atom mass mismatch relative to the total mass.
    pub mass_tol: f64,
    /// Smallest damping factor tried before giving up.
    pub min_damping: f64,
}

impl Default for HteOptions {
    fn default() -> Self {
        HteOptions { max_iter: 200, mass_tol: 1e-10, min_damping: 2f64.powi(-40) }
    }
}

/// Converged state of a solve.
#[derive(Clone, Debug, PartialEq)]
pub struct HteSolution {
    pub profile: RadialProfile,
    /// `phi(tau_k)` at the atoms.
    pub values: Vec<f64>,
    pub log_masses: Vec<f64>,
    pub log: IterationLog,
}

struct State {
    z: Vec<f64>,
    mass: Vec<TwoFloat>,
    x: Vec<TwoFloat>,
    /// `sum_{l >= q} dtau_l S_l / (m C_l)`
    tail: Vec<f64>,
    slopes: Vec<f64>,
    residual: Vec<f64>,
    deriv: Vec<f64>,
}

impl State {
    fn max_residual(&self) -> f64 {
        self.residual.iter().fold(0.0f64, |a, r| a.max(r.abs()))
    }

    /// Every residual is within what one ulp in each log-mass can move it.
    fn at_roundoff(&self) -> bool {
        let k = self.z.len();
        (0..k).all(|r| {
            let spread: f64 = (0..k)
                .map(|c| (self.deriv[r] * to_f64(self.mass[c]) * self.tail[r.max(c)]).abs() * (1.0 + self.z[c].abs()))
                .sum();
            self.residual[r].abs() <= 4e-15 * (1.0 + self.z[r].abs()) + 4e-15 * spread
        })
    }

    fn converged(&self, tol: f64) -> bool {
        self.mass_mismatch() <= tol || self.at_roundoff()
    }

    fn mass_mismatch(&self) -> f64 {
        let masses: Vec<f64> = self.mass.iter().map(|m| to_f64(*m)).collect();
        let total: f64 = masses.iter().sum();
        let worst = masses
            .iter()
            .zip(&self.residual)
            .map(|(m, r)| m * (-r).exp_m1().abs())
            .fold(0.0f64, f64::max);
        if total > 0.0 {
            worst / total
        } else {
            0.0
        }
    }
}

fn evaluate(problem: &HteProblem, z: Vec<f64>) -> Option<State> {
    let k = problem.len();
    let m = problem.params.m();
    let c = problem.params.c();
    let mut mass = Vec::with_capacity(k);
    for &zk in &z {
        mass.push(exp_dd(zk)?);
    }
    let mut cumulative = TwoFloat::from(0.0);
    let mut slopes_dd = Vec::with_capacity(k);
    let mut cum = Vec::with_capacity(k);
    for mk in &mass {
        cumulative += *mk;
        cum.push(cumulative);
        slopes_dd.push(root_dd(cumulative / c, m));
    }
    let loc = &problem.locations;
    let mut x = vec![TwoFloat::from(0.0); k];
    let mut tail = vec![0.0; k];
    let mut acc = TwoFloat::from(0.0);
    let mut tacc = 0.0;
    for l in (0..k).rev() {
        let right = if l + 1 < k { loc[l + 1] } else { 0.0 };
        let width = TwoFloat::new_sub(right, loc[l]);
        acc -= slopes_dd[l] * width;
        x[l] = acc;
        let cl = to_f64(cum[l]);
        if cl > 0.0 {
            tacc += to_f64(width) * to_f64(slopes_dd[l]) / (m as f64 * cl);
        }
        tail[l] = tacc;
    }
    let mut residual = Vec::with_capacity(k);
    let mut deriv = Vec::with_capacity(k);
    for i in 0..k {
        let (lt, dl) = problem.log_target(i, x[i]);
        if !lt.is_finite() {
            return None;
        }
        residual.push(z[i] - lt);
        deriv.push(dl);
    }
    let slopes = slopes_dd.iter().map(|s| to_f64(*s)).collect();
    Some(State { z, mass, x, tail, slopes, residual, deriv })
}

fn state_profile(problem: &HteProblem, state: &State) -> Result<RadialProfile> {
    let mut slopes = vec![0.0];
    slopes.extend(state.slopes.iter().copied());
    for i in 1..slopes.len() {
        slopes[i] = slopes[i].max(slopes[i - 1]);
    }
    RadialProfile::new(problem.params.coordinate(), problem.locations.clone(), slopes)
}

fn newton(problem: &HteProblem, z0: Vec<f64>, opts: &HteOptions, j: f64, log: &mut IterationLog) -> Result<State> {
    let k = problem.len();
    let fail = |msg: String, log: &IterationLog| Error::Iteration { message: msg, log: Box::new(log.clone()) };
    let mut state = evaluate(problem, z0).ok_or_else(|| fail("initial masses overflow".into(), log))?;
    for iteration in 0..opts.max_iter {
        if state.converged(opts.mass_tol) {
            return Ok(state);
        }
        let jac = DMatrix::from_fn(k, k, |r, c| {
            let d = if r == c { 1.0 } else { 0.0 };
            d + state.deriv[r] * to_f64(state.mass[c]) * state.tail[r.max(c)]
        });
        let rhs = DVector::from_iterator(k, state.residual.iter().map(|r| -r));
        let step = jac.lu().solve(&rhs).ok_or_else(|| fail("singular Newton matrix".into(), log))?;
        let before = state.max_residual();
        let mut damping = 1.0;
        let next = loop {
            let z: Vec<f64> = state.z.iter().zip(step.iter()).map(|(z, s)| z + damping * s).collect();
            if let Some(trial) = evaluate(problem, z) {
                if trial.max_residual() < before || trial.converged(opts.mass_tol) {
                    break trial;
                }
            }
            damping *= 0.5;
            if damping < opts.min_damping {
                return Err(fail(format!("line search stalled at residual {before:e}"), log));
            }
        };
        let sup_change = next.x.iter().zip(&state.x).map(|(a, b)| to_f64(*a - *b).abs()).fold(0.0, f64::max);
        state = next;
        let energy: f64 = state
            .mass
            .iter()
            .zip(&state.x)
            .map(|(mk, xk)| -to_f64(*xk) * to_f64(*mk))
            .sum();
        log.records.push(IterationRecord { iteration, residual: state.max_residual(), sup_change, j, energy });
    }
    if state.converged(opts.mass_tol) {
        return Ok(state);
    }
    Err(fail(format!("no convergence in {} iterations (mismatch {:e})", opts.max_iter, state.mass_mismatch()), log))
}

/// Initial log-masses `ln(F(phi_init(tau_k)) mu_k)`: one substitution step from `phi_init`.
fn start_from(problem: &HteProblem, init: &RadialProfile) -> Vec<f64> {
    problem
        .locations
        .iter()
        .enumerate()
        .map(|(k, &tau)| problem.log_target(k, value_dd(init, tau)).0)
        .collect()
}

/// Solves `H_m(phi) = F(phi) mu` starting from `phi_init`.
pub fn hte_solve(problem: &HteProblem, init: &RadialProfile, opts: &HteOptions) -> Result<HteSolution> {
    hte_solve_from(problem, start_from(problem, init), opts, 0.0)
}

fn hte_solve_from(problem: &HteProblem, z0: Vec<f64>, opts: &HteOptions, j: f64) -> Result<HteSolution> {
    let mut log = IterationLog::default();
    if problem.is_empty() {
        return Ok(HteSolution { profile: RadialProfile::zero(problem.params.coordinate()), values: vec![], log_masses: vec![], log });
    }
    let state = newton(problem, z0, opts, j, &mut log)?;
    Ok(HteSolution {
        profile: state_profile(problem, &state)?,
        values: state.x.iter().map(|x| to_f64(*x)).collect(),
        log_masses: state.z.clone(),
        log,
    })
}

/// Doubling schedule `1, 2, 4, ..., j_max`.
pub fn doubling_schedule(j_max: f64) -> Vec<f64> {
    let mut out = vec![1.0];
    while *out.last().unwrap() * 2.0 <= j_max {
        out.push(out.last().unwrap() * 2.0);
    }
    out
}

/// Result of the `j -> infinity` continuation for the rooftop envelope.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeRun {
    pub profile: RadialProfile,
    pub log: IterationLog,
    /// Largest `j` actually solved.
    pub j_final: f64,
    /// Sup distance of the last two iterates at the atoms.
    pub last_change: f64,
    /// `phi <= min(u, v) + 1e-10` at every breakpoint of the three profiles.
    pub dominated: bool,
    /// A second start at the final `j` converged to the same values within `1e-8`.
    pub unique: bool,
}

/// Stops once successive `j` give profiles within this sup distance.
pub const SCHEDULE_STOP: f64 = 1e-8;

/// Solves `H_m(phi_j) = e^{j(phi_j - u)} H_m(u) + e^{j(phi_j - v)} H_m(v)` along the schedule.
pub fn envelope_via_hte(u: &RadialProfile, v: &RadialProfile, schedule: &[f64], params: &HessianParams) -> Result<EnvelopeRun> {
    if schedule.is_empty() || schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("the j-schedule must be nonempty and increasing".into()));
    }
    let opts = HteOptions::default();
    let mut log = IterationLog::default();
    let base = HteProblem::exponential(&[u, v], 0.0, params)?;
    if base.is_empty() {
        return Ok(EnvelopeRun {
            profile: RadialProfile::zero(params.coordinate()),
            log,
            j_final: schedule[0],
            last_change: 0.0,
            dominated: true,
            unique: true,
        });
    }
    let mut z: Vec<f64> = (0..base.len()).map(|k| base.log_target(k, TwoFloat::from(0.0)).0).collect();
    let mut previous: Option<Vec<f64>> = None;
    let mut last_change = f64::INFINITY;
    let mut current: Option<(HteSolution, HteProblem)> = None;
    let mut j_final = schedule[0];
    for &j in schedule {
        let problem = HteProblem::exponential(&[u, v], j, params)?;
        let mut sol = hte_solve_from(&problem, z.clone(), &opts, j)?;
        log.records.append(&mut sol.log.records);
        let bounded = sol
            .values
            .iter()
            .enumerate()
            .all(|(k, &x)| problem.terms[k].iter().all(|t| to_f64(TwoFloat::from(x) - t.anchor) <= 1e-10));
        log.bounded.push((j, bounded));
        if let Some(prev) = &previous {
            let ok = sol.values.iter().zip(prev).all(|(a, b)| *a >= b - 1e-10);
            log.monotone.push((j, ok));
            last_change = sol.values.iter().zip(prev).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        }
        z = sol.log_masses.clone();
        previous = Some(sol.values.clone());
        j_final = j;
        current = Some((sol, problem));
        if last_change < SCHEDULE_STOP {
            break;
        }
    }
    let (sol, problem) = current.expect("schedule is nonempty");
    let shifted: Vec<f64> = z.iter().map(|x| x + std::f64::consts::LN_2).collect();
    let unique = match hte_solve_from(&problem, shifted, &opts, j_final) {
        Ok(other) => other.values.iter().zip(&sol.values).all(|(a, b)| (a - b).abs() <= 1e-8),
        Err(_) => false,
    };
    let phi = sol.profile;
    let scale = u.sup_norm().max(v.sup_norm()).max(1.0);
    let dominated = merged_breakpoints(&[&phi, u, v])
        .iter()
        .all(|&t| phi.value(t) <= u.value(t).min(v.value(t)) + 1e-10 * scale);
    Ok(EnvelopeRun { profile: phi, log, j_final, last_change, dominated, unique })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::dirichlet_solve;
    use crate::rooftop::rooftop_p;

    #[test]
    fn double_double_exponential() {
        let e = exp_dd(1.0).unwrap();
        assert_eq!(e.hi(), std::f64::consts::E);
        assert!((e.lo() - 1.445_646_891_729_250_2e-16).abs() < 1e-31);
        assert_eq!(exp_dd(0.0).unwrap(), TwoFloat::from(1.0));
        assert_eq!(exp_dd(-800.0).unwrap().hi(), 0.0);
        assert!(exp_dd(800.0).is_none());
    }

    #[test]
    fn dd_values_match_profile_values() {
        let c = crate::coords::Coordinate::new(2, 2).unwrap();
        let g = RadialProfile::new(c, vec![-2.0, -0.5], vec![0.0, 0.5, 1.5]).unwrap();
        for t in [-3.0, -2.0, -1.0, -0.5, -0.25, 0.0] {
            assert!((to_f64(value_dd(&g, t)) - g.value(t)).abs() < 1e-15);
        }
    }

    #[test]
    fn unit_field_reproduces_dirichlet_problem() {
        let p = HessianParams::new(2, 2).unwrap();
        let g = RadialProfile::new(p.coordinate(), vec![-2.0, -0.5], vec![0.0, 0.5, 1.5]).unwrap();
        let mu = hessian_measure(&g, &p).unwrap();
        let problem = HteProblem::unit(&mu, &p).unwrap();
        let sol = hte_solve(&problem, &RadialProfile::zero(p.coordinate()), &HteOptions::default()).unwrap();
        let direct = dirichlet_solve(&mu, &p).unwrap();
        assert!(RadialProfile::sup_distance(&sol.profile, &direct) < 1e-14);
    }

    #[test]
    fn diagonal_exponential_field_fixes_the_source() {
        let p = HessianParams::new(3, 3).unwrap();
        let u = RadialProfile::new(p.coordinate(), vec![-1.5, -0.4], vec![0.0, 0.7, 1.2]).unwrap();
        let problem = HteProblem::exponential(&[&u], 8.0, &p).unwrap();
        let sol = hte_solve(&problem, &RadialProfile::zero(p.coordinate()), &HteOptions::default()).unwrap();
        assert!(RadialProfile::sup_distance(&sol.profile, &u) < 1e-12);
    }

    #[test]
    fn crossing_pair_envelope() {
        let p = HessianParams::new(2, 2).unwrap();
        let u = RadialProfile::kink(p.coordinate(), 1.0, -1.0).unwrap();
        let v = RadialProfile::kink(p.coordinate(), 2.0, -0.6).unwrap();
        let run = envelope_via_hte(&u, &v, &doubling_schedule(2f64.powi(40)), &p).unwrap();
        let hull = rooftop_p(&[&u, &v]).unwrap();
        assert!(RadialProfile::sup_distance(&run.profile, &hull) < 1e-6);
        assert!(run.log.all_monotone());
        assert!(run.dominated && run.unique);
    }
}
