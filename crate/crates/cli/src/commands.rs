use anyhow::Result;

use hessmetric::energy::{energy_difference, energy_ew, segment_report};
use hessmetric::geodesic::{geodesic_audit, weak_geodesic, GeodesicOptions};
use hessmetric::hte::{doubling_schedule, envelope_via_hte};
use hessmetric::metric::{capacity_ball, capacity_convergence_check, metric_d, metric_d_cocycle};
use hessmetric::oracle::{sample_radial, total_mass, DEFAULT_NODES};
use hessmetric::report::{CheckRow, Provenance};
use hessmetric::reproduce::{reproduce, ReproduceOptions, Reproduction};
use hessmetric::rooftop::{minimum_principle_atoms, rooftop_p};
use hessmetric::suite;
use hessmetric::{e1_energy, RadialProfile};

use crate::scenario::Scenario;

/// Flags shared by every subcommand.
#[derive(Clone, Debug)]
pub struct Settings {
    pub seed: u64,
    pub resolution: usize,
    pub tolerance: Option<f64>,
}

impl Settings {
    fn tol(&self, scenario: &Scenario, default: f64) -> f64 {
        self.tolerance.or(scenario.tolerance).unwrap_or(default)
    }
}

fn describe(s: &Scenario) -> String {
    format!("n={}, m={}, w={}", s.params.n(), s.params.m(), s.weight_name)
}

/// Energies of every named profile, each against an independent formula.
pub fn energy(s: &Scenario, set: &Settings) -> Result<Vec<CheckRow>> {
    let p = &s.params;
    let k = (p.m() + 1) as f64;
    let zero = RadialProfile::zero(p.coordinate());
    let tol = set.tol(s, 1e-9);
    let mut rows = Vec::new();
    for (name, u) in &s.profiles {
        let inputs = format!("{}; u={name}", describe(s));
        let ew = energy_ew(u, &s.weight, p)?.value;
        rows.push(CheckRow::close("E_w(u)", inputs.clone(), energy_difference(u, &s.weight, p)?, ew, tol, Provenance::Paper));
        let e1 = e1_energy(u, p)?;
        rows.push(CheckRow::close("e1(u)", inputs, k * metric_d(u, &zero, &zero, p)?, e1, tol, Provenance::Paper));
    }
    for (a, b) in &s.pairs {
        let seg = segment_report(s.profile(a), s.profile(b), &s.weight, &s.ts, p)?;
        let scale = e1_energy(s.profile(a), p)?.max(e1_energy(s.profile(b), p)?).max(f64::MIN_POSITIVE);
        let concavity = seg.second.iter().fold(0.0f64, |acc, x| acc.max(*x)) / scale;
        let inputs = format!("{}; segment {a} -> {b}; {} samples", describe(s), s.ts.len());
        rows.push(CheckRow::deviation("max f''(t) / scale along the segment", inputs.clone(), concavity.max(0.0), 1e-8, Provenance::Paper));
        let worst = seg
            .first
            .iter()
            .zip(&seg.fd_first)
            .filter_map(|(f, fd)| fd.map(|fd| (f - fd).abs() / f.abs().max(1e-3 * scale)))
            .fold(0.0, f64::max);
        rows.push(CheckRow::deviation("closed-form f' vs centered differences", inputs, worst, 1e-4, Provenance::Derived));
    }
    Ok(rows)
}

/// Distances between the requested pairs.
pub fn metric(s: &Scenario, set: &Settings) -> Result<Vec<CheckRow>> {
    let p = &s.params;
    let tol = set.tol(s, 1e-9);
    let mut rows = Vec::new();
    for (a, b) in &s.pairs {
        let (u, v) = (s.profile(a), s.profile(b));
        let inputs = format!("{}; u={a}, v={b}", describe(s));
        let d = metric_d(u, v, &s.weight, p)?;
        rows.push(CheckRow::close("d(u,v)", inputs.clone(), metric_d_cocycle(u, v, p)?, d, tol, Provenance::Paper));
        rows.push(CheckRow::flag("d(u,v) = d(v,u) exactly", inputs.clone(), d == metric_d(v, u, &s.weight, p)?, Provenance::Paper));
        let pr = rooftop_p(&[u, v])?;
        let split = metric_d(u, &pr, &s.weight, p)? + metric_d(v, &pr, &s.weight, p)?;
        rows.push(CheckRow::close("d(u,P(u,v)) + d(v,P(u,v))", inputs, d, split, tol, Provenance::Paper));
    }
    Ok(rows)
}

/// Largest combined breakpoint count handed to the continuation solver, whose Newton steps
/// factor a dense matrix of that size.
pub const ENVELOPE_ATOM_LIMIT: usize = 400;

/// Rooftop envelopes by the hull and by the exponential-field continuation.
pub fn envelope(s: &Scenario, set: &Settings) -> Result<Vec<CheckRow>> {
    let p = &s.params;
    for (a, b) in &s.pairs {
        let atoms = s.profile(a).breakpoints().len() + s.profile(b).breakpoints().len();
        if atoms > ENVELOPE_ATOM_LIMIT {
            anyhow::bail!("pair {a}, {b} has {atoms} breakpoints, above the envelope limit {ENVELOPE_ATOM_LIMIT}; lower --resolution");
        }
    }
    let schedule = doubling_schedule(2f64.powi(40));
    let tol = set.tol(s, 1e-6);
    let mut rows = Vec::new();
    for (a, b) in &s.pairs {
        let (u, v) = (s.profile(a), s.profile(b));
        let inputs = format!("{}; u={a}, v={b}", describe(s));
        let run = envelope_via_hte(u, v, &schedule, p)?;
        let hull = rooftop_p(&[u, v])?;
        let scale = u.sup_norm().max(v.sup_norm()).max(1.0);
        let gap = RadialProfile::sup_distance(&run.profile, &hull) / scale;
        rows.push(CheckRow::deviation("sup |HTE envelope - hull| / scale", inputs.clone(), gap, tol, Provenance::Derived));
        rows.push(CheckRow::flag("HTE iterates nondecreasing in j", inputs.clone(), run.log.all_monotone(), Provenance::Paper));
        rows.push(CheckRow::flag("HTE solution below min(u,v)", inputs.clone(), run.dominated, Provenance::Paper));
        let excess = minimum_principle_atoms(u, v, p)?.iter().map(|a| (a.mass - a.allowed).max(0.0)).fold(0.0, f64::max) / p.c();
        rows.push(CheckRow::deviation("minimum principle atom excess / c", inputs, excess, 1e-10, Provenance::Paper));
    }
    Ok(rows)
}

/// Geodesic audits for the requested pairs.
pub fn geodesic(s: &Scenario, set: &Settings) -> Result<(Vec<CheckRow>, Vec<(String, String)>)> {
    let p = &s.params;
    let exact = p.m() == p.n();
    let tol = set.tol(s, if exact { 1e-8 } else { 1e-4 });
    let options = GeodesicOptions { resolution: set.resolution, ..GeodesicOptions::default() };
    let mut rows = Vec::new();
    let mut traces = Vec::new();
    for (a, b) in &s.pairs {
        let inputs = format!("{}; {a} -> {b}; resolution {}", describe(s), set.resolution);
        let g = weak_geodesic(s.declared(a), s.declared(b), p, options)?;
        let audit = geodesic_audit(&g, &s.ts, &s.weight)?;
        rows.push(CheckRow::deviation("E_w linearity deviation", inputs.clone(), audit.linearity, tol, Provenance::Paper));
        rows.push(CheckRow::deviation("geodesic equation deviation", inputs.clone(), audit.metric, tol, Provenance::Paper));
        rows.push(CheckRow::flag("pointwise bounds along the geodesic", inputs.clone(), audit.bounds_hold(), Provenance::Paper));
        rows.push(CheckRow::flag("endpoint convergence in capacity", inputs, audit.capacity_ok, Provenance::Paper));
        traces.push((format!("geodesic_{a}_{b}"), audit.to_csv()));
    }
    Ok((rows, traces))
}

/// Capacity of `{u < -eps}` inside the ball `K`, checked against the oracle mass of the extremal
/// function of the outer ball.
pub fn capacity(s: &Scenario, set: &Settings) -> Result<Vec<CheckRow>> {
    let p = &s.params;
    let zero = RadialProfile::zero(p.coordinate());
    let tol = set.tol(s, 1e-2);
    let mut rows = Vec::new();
    for (name, u) in &s.profiles {
        let entry = capacity_convergence_check(std::slice::from_ref(u), &zero, s.eps, s.k_radius, p)?.remove(0);
        let inputs = format!("{}; u={name}; eps={}; K=ball({})", describe(s), s.eps, s.k_radius);
        match entry.outer_radius {
            Some(r) => {
                let depth = -p.coordinate().tau(r)?;
                let extremal = RadialProfile::kink(p.coordinate(), 1.0 / depth, -1.0)?;
                let oracle = total_mass(&sample_radial(&extremal, DEFAULT_NODES)?, p.m())?;
                rows.push(CheckRow::close("cap_m({u < -eps} in K)", inputs.clone(), oracle, entry.capacity, tol, Provenance::Derived));
                rows.push(CheckRow::close("capacity equals that of the outer ball", inputs, capacity_ball(r, p)?, entry.capacity, 1e-12, Provenance::Derived));
            }
            None => rows.push(CheckRow::near("cap_m({u < -eps} in K) of an empty set", inputs, 0.0, entry.capacity, 0.0, Provenance::Trivial)),
        }
    }
    Ok(rows)
}

pub fn run_reproduction(id: &str, n: usize, m: Option<usize>, jmax: usize, set: &Settings) -> Result<Reproduction> {
    let options = ReproduceOptions { n, m, jmax, resolution: set.resolution, tolerance: set.tolerance };
    Ok(reproduce(id, &options)?)
}

/// Every property suite followed by every reproduction with its default parameters.
pub fn selftest(s: &Scenario, set: &Settings) -> Result<Vec<CheckRow>> {
    let c = &s.counts;
    let seed = set.seed;
    let mut rows = Vec::new();
    rows.extend(suite::core_suite(seed, c.core.unwrap_or(200))?);
    rows.extend(suite::measure_suite(seed.wrapping_add(1), c.measure.unwrap_or(200))?);
    rows.extend(suite::metric_suite(seed.wrapping_add(2), c.metric.unwrap_or(1000))?);
    rows.extend(suite::envelope_suite(seed.wrapping_add(3), c.envelope.unwrap_or(200))?);
    rows.extend(suite::energy_suite(seed.wrapping_add(4), c.energy.unwrap_or(200))?);
    rows.extend(suite::oracle_suite(seed.wrapping_add(5), c.oracle.unwrap_or(50), DEFAULT_NODES)?);
    rows.extend(suite::geodesic_suite(seed.wrapping_add(6), c.geodesic_kinks.unwrap_or(20), c.geodesic_smooth.unwrap_or(4))?);
    rows.extend(suite::convergence_suite()?);
    for id in hessmetric::reproduce::EXAMPLE_IDS {
        for n in [2, 3] {
            rows.extend(run_reproduction(id, n, None, 50, set)?.checks);
        }
    }
    rows.extend(run_reproduction("geodesic-kinks", 2, Some(1), 50, set)?.checks);
    Ok(rows)
}
