//! Randomized property suites. Each suite folds its instances into a few worst-case rows.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::coords::{tau_of_radius, Coordinate, HessianParams};
use crate::dual::{legendre, legendre_inverse};
use crate::energy::{aubin_i, energy_difference, energy_ew, envelope_path_derivative, segment_report};
use crate::error::Result;
use crate::geodesic::{
    geodesic_audit, geodesic_contraction_check, geodesic_profile, resolution_sweep, uniform_samples, weak_geodesic,
    GeodesicOptions,
};
use crate::hte::{doubling_schedule, envelope_via_hte};
use crate::measure::{dirichlet_solve, e1_energy, hessian_measure, integrate, mixed_measure, AtomicMeasure};
use crate::metric::{capacity_convergence_check, cauchy_limit, metric_d, metric_d_cocycle};
use crate::oracle::{
    kink_mass, oracle_aubin_i, oracle_e1, oracle_energy, oracle_l1, oracle_metric, sample_radial, shell_masses, total_mass,
    PerronOptions, DEFAULT_NODES, RADIUS_FLOOR,
};
use crate::profile::RadialProfile;
use crate::random::{random_crossing_pair, random_kink, random_ordered_pair, random_profile, seeded, ProfileShape};
use crate::report::{CheckRow, Provenance};
use crate::rooftop::{minimum_principle_atoms, rooftop_p};

/// `(n, m)` combinations visited in turn by the random suites.
pub const PARAM_SETS: [(usize, usize); 4] = [(2, 2), (3, 3), (2, 1), (3, 2)];

fn params_at(i: usize) -> Result<HessianParams> {
    let (n, m) = PARAM_SETS[i % PARAM_SETS.len()];
    HessianParams::new(n, m)
}

/// Running maximum that remembers where it was attained.
struct Worst {
    value: f64,
    at: String,
}

impl Worst {
    fn new() -> Self {
        Worst { value: 0.0, at: String::from("-") }
    }

    fn see(&mut self, value: f64, at: impl FnOnce() -> String) {
        if value > self.value || value.is_nan() {
            self.value = value;
            self.at = at();
        }
    }

    fn row(&self, quantity: &str, count: usize, tolerance: f64, provenance: Provenance) -> CheckRow {
        CheckRow::deviation(quantity, format!("instances={count}; worst at {}", self.at), self.value, tolerance, provenance)
    }
}

/// Failure counter for yes/no properties.
struct Failures {
    count: usize,
    first: Option<String>,
}

impl Failures {
    fn new() -> Self {
        Failures { count: 0, first: None }
    }

    fn check(&mut self, ok: bool, at: impl FnOnce() -> String) {
        if !ok {
            self.count += 1;
            if self.first.is_none() {
                self.first = Some(at());
            }
        }
    }

    fn row(&self, quantity: &str, total: usize, provenance: Provenance) -> CheckRow {
        let inputs = match &self.first {
            Some(at) => format!("instances={total}; failures={}; first at {at}", self.count),
            None => format!("instances={total}; failures=0"),
        };
        CheckRow::flag(quantity, inputs, self.count == 0, provenance)
    }
}

fn rel(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / scale.max(f64::MIN_POSITIVE)
}

fn shape() -> ProfileShape {
    ProfileShape::default()
}

/// Profile arithmetic, coordinates and conjugates.
pub fn core_suite(seed: u64, count: usize) -> Result<Vec<CheckRow>> {
    let mut rng = seeded(seed);
    let mut involution = Failures::new();
    let mut bilinear = Worst::new();
    let mut bounded = Failures::new();
    for i in 0..count {
        let p = params_at(i)?;
        let c = p.coordinate();
        let g1 = random_profile(&mut rng, c, &shape());
        let g2 = random_profile(&mut rng, c, &shape());
        involution.check(legendre_inverse(&legendre(&g1)).as_ref() == Ok(&g1), || format!("instance {i}"));
        let (alpha, beta) = (rng.gen_range(0.1..3.0), rng.gen_range(0.1..3.0));
        let h = RadialProfile::combine(alpha, &g1, beta, &g2)?;
        let scale = alpha * g1.sup_norm() + beta * g2.sup_norm();
        for _ in 0..100 {
            let tau = rng.gen_range(-4.0..0.0);
            let dev = rel(h.value(tau), alpha * g1.value(tau) + beta * g2.value(tau), scale);
            bilinear.see(dev, || format!("instance {i}, tau {tau}"));
        }
        let bound: f64 = g1
            .breakpoints()
            .iter()
            .enumerate()
            .map(|(k, b)| (g1.slopes()[k + 1] - g1.slopes()[k]) * b.abs())
            .sum();
        let taus: Vec<f64> = g1.breakpoints().iter().copied().chain((0..20).map(|k| -0.25 * k as f64)).collect();
        let ok = taus.iter().all(|&t| g1.value(t).abs() <= bound * (1.0 + 1e-12));
        bounded.check(ok, || format!("instance {i}"));
    }
    let mut coordinate = Failures::new();
    for &(n, _) in &PARAM_SETS {
        for q in 1..=n {
            let mut prev = f64::NEG_INFINITY;
            let mut ok = tau_of_radius(1.0, n, q)? == 0.0;
            for k in 1..=1000 {
                let t = tau_of_radius(k as f64 / 1000.0, n, q)?;
                ok &= t > prev;
                prev = t;
            }
            coordinate.check(ok, || format!("n={n}, q={q}"));
        }
    }
    Ok(vec![
        involution.row("legendre involution exact", count, Provenance::Trivial),
        bilinear.row("combine is bilinear pointwise", count, 1e-12, Provenance::Trivial),
        bounded.row("bounded profile estimate", count, Provenance::Trivial),
        coordinate.row("radial coordinate increasing with tau(1) = 0", 9, Provenance::Trivial),
    ])
}

fn atomwise_gap(a: &AtomicMeasure, b: &AtomicMeasure) -> f64 {
    let diff = a.merge(&b.scaled(-1.0));
    diff.atoms().iter().map(|x| x.mass.abs()).fold(0.0, f64::max)
}

/// Hessian measures: mass identity, polarization, multilinearity, Holder, comparison principle.
pub fn measure_suite(seed: u64, count: usize) -> Result<Vec<CheckRow>> {
    let mut rng = seeded(seed);
    let mut mass = Worst::new();
    let mut symmetry = Worst::new();
    let mut additivity = Worst::new();
    let mut holder = Worst::new();
    let mut comparison = Worst::new();
    let mut round_trip = Worst::new();
    for i in 0..count {
        let p = params_at(i)?;
        let m = p.m();
        let c = p.coordinate();
        let g = random_profile(&mut rng, c, &shape());
        let mu = hessian_measure(&g, &p)?;
        mass.see(rel(mu.total_mass(), p.c() * g.last_slope().powi(m as i32), mu.total_mass()), || format!("instance {i}"));

        let back = dirichlet_solve(&mu, &p)?;
        let mut dev = if back.breakpoints() == g.breakpoints() { 0.0 } else { f64::INFINITY };
        for (a, b) in back.slopes().iter().zip(g.slopes()) {
            dev = dev.max(rel(*a, *b, b.abs().max(f64::MIN_POSITIVE)) / f64::EPSILON);
        }
        if back.slopes().len() != g.slopes().len() {
            dev = f64::INFINITY;
        }
        round_trip.see(dev, || format!("instance {i}"));

        let factors: Vec<RadialProfile> = (0..m).map(|_| random_profile(&mut rng, c, &shape())).collect();
        let refs: Vec<&RadialProfile> = factors.iter().collect();
        let base = mixed_measure(&refs, &p)?;
        let scale = base.total_mass();
        let mut shuffled = refs.clone();
        shuffled.shuffle(&mut rng);
        symmetry.see(atomwise_gap(&base, &mixed_measure(&shuffled, &p)?) / scale, || format!("instance {i}"));

        let extra = random_profile(&mut rng, c, &shape());
        let sum = RadialProfile::combine(1.0, refs[0], 1.0, &extra)?;
        let mut with_sum = refs.clone();
        with_sum[0] = &sum;
        let mut with_extra = refs.clone();
        with_extra[0] = &extra;
        let split = mixed_measure(&refs, &p)?.merge(&mixed_measure(&with_extra, &p)?);
        let joined = mixed_measure(&with_sum, &p)?;
        additivity.see(atomwise_gap(&split, &joined) / joined.total_mass(), || format!("instance {i}"));

        let u0 = random_profile(&mut rng, c, &shape());
        let lhs: f64 = base.atoms().iter().map(|a| -u0.value(a.tau) * a.mass).sum();
        let mut rhs = e1_energy(&u0, &p)?.powf(1.0 / (m + 1) as f64);
        for f in &factors {
            rhs *= e1_energy(f, &p)?.powf(1.0 / (m + 1) as f64);
        }
        holder.see(((lhs - rhs) / rhs).max(0.0), || format!("instance {i}"));

        let (u, v) = random_crossing_pair(&mut rng, c, &shape());
        let delta = 1e-12 * u.sup_norm().max(v.sup_norm());
        let below = |tau: f64| u.value(tau) < v.value(tau) - delta;
        let hv: f64 = hessian_measure(&v, &p)?.atoms().iter().filter(|a| below(a.tau)).map(|a| a.mass).sum();
        let hu: f64 = hessian_measure(&u, &p)?.atoms().iter().filter(|a| below(a.tau)).map(|a| a.mass).sum();
        comparison.see(((hv - hu) / p.c()).max(0.0), || format!("instance {i}"));
    }
    Ok(vec![
        mass.row("total mass equals c * last slope^m", count, 1e-12, Provenance::Derived),
        round_trip.row("dirichlet_solve inverts hessian_measure (ulps)", count, 4.0, Provenance::Trivial),
        symmetry.row("mixed measure symmetric under permutations", count, 1e-10, Provenance::Derived),
        additivity.row("mixed measure additive in a slot", count, 1e-10, Provenance::Derived),
        holder.row("Holder energy inequality excess", count, 1e-10, Provenance::Paper),
        comparison.row("comparison principle excess on {u < v}", count, 1e-10, Provenance::Paper),
    ])
}

/// Metric axioms and the distance identities on random triples.
pub fn metric_suite(seed: u64, count: usize) -> Result<Vec<CheckRow>> {
    let mut rng = seeded(seed);
    let mut nonneg = Failures::new();
    let mut symmetry = Failures::new();
    let mut identity = Failures::new();
    let mut triangle = Worst::new();
    let mut sandwich = Worst::new();
    let mut pythagoras = Worst::new();
    let mut to_zero = Worst::new();
    let mut ordered = Worst::new();
    let mut weight = Worst::new();
    let mut cocycle = Worst::new();
    let mut contraction = Worst::new();
    let mut max_rooftop = Worst::new();
    let mut neg_energy = Worst::new();
    for i in 0..count {
        let p = params_at(i)?;
        let c = p.coordinate();
        let zero = RadialProfile::zero(c);
        let u = random_profile(&mut rng, c, &shape());
        let v = random_profile(&mut rng, c, &shape());
        let psi = random_profile(&mut rng, c, &shape());
        let w = random_profile(&mut rng, c, &shape());
        let k = (p.m() + 1) as f64;
        let scale = [&u, &v, &psi].iter().map(|g| e1_energy(g, &p)).collect::<Result<Vec<_>>>()?.into_iter().fold(0.0, f64::max) / k;

        let duv = metric_d(&u, &v, &zero, &p)?;
        let dvu = metric_d(&v, &u, &zero, &p)?;
        let dup = metric_d(&u, &psi, &zero, &p)?;
        let dpv = metric_d(&psi, &v, &zero, &p)?;
        nonneg.check(duv >= 0.0 && dup >= 0.0 && dpv >= 0.0, || format!("instance {i}"));
        symmetry.check(duv == dvu, || format!("instance {i}"));
        let distinct = u != v;
        identity.check(metric_d(&u, &u, &zero, &p)? == 0.0 && (duv > 0.0) == distinct, || format!("instance {i}"));
        triangle.see(((duv - dup - dpv) / scale).max(0.0), || format!("instance {i}"));

        let top = psi.clone();
        let mid = rooftop_p(&[&psi, &v])?;
        let low = rooftop_p(&[&psi, &v, &u])?;
        let lhs = metric_d(&low, &top, &zero, &p)?;
        let rhs = metric_d(&low, &mid, &zero, &p)? + metric_d(&mid, &top, &zero, &p)?;
        sandwich.see(rel(lhs, rhs, lhs.max(scale * 1e-6)), || format!("instance {i}"));
        let e_top = energy_ew(&top, &w, &p)?.value;
        let e_low = energy_ew(&low, &w, &p)?.value;
        ordered.see(rel(lhs, e_top - e_low, lhs.max((scale + e_top.abs() + e_low.abs()) * 1e-6)), || format!("instance {i}"));

        let pr = rooftop_p(&[&u, &v])?;
        let split = metric_d(&u, &pr, &zero, &p)? + metric_d(&v, &pr, &zero, &p)?;
        pythagoras.see(rel(duv, split, duv), || format!("instance {i}"));

        let e1 = e1_energy(&u, &p)?;
        to_zero.see(rel(metric_d(&u, &zero, &zero, &p)?, e1 / k, e1 / k), || format!("instance {i}"));

        let duv_w = metric_d(&u, &v, &w, &p)?;
        weight.see(rel(duv, duv_w, duv), || format!("instance {i}"));
        cocycle.see(rel(duv, metric_d_cocycle(&u, &v, &p)?, duv), || format!("instance {i}"));

        let contracted = metric_d(&rooftop_p(&[&u, &psi])?, &rooftop_p(&[&v, &psi])?, &zero, &p)?;
        contraction.see(((contracted - duv) / scale).max(0.0), || format!("instance {i}"));

        let hi = RadialProfile::pointwise_max(&u, &v)?;
        let gap = metric_d(&v, &pr, &zero, &p)? - metric_d(&hi, &u, &zero, &p)?;
        max_rooftop.see((gap / scale).max(0.0), || format!("instance {i}"));

        let ew = energy_ew(&u, &w, &p)?.value;
        neg_energy.see(((-ew - metric_d(&u, &w, &zero, &p)?) / scale).max(0.0), || format!("instance {i}"));
    }
    Ok(vec![
        nonneg.row("d is nonnegative", count, Provenance::Paper),
        symmetry.row("d is exactly symmetric", count, Provenance::Paper),
        identity.row("d(u,v) = 0 exactly when u = v", count, Provenance::Paper),
        triangle.row("triangle inequality excess / scale", count, 1e-9, Provenance::Paper),
        sandwich.row("d(u,v) = d(u,psi) + d(psi,v) for u <= psi <= v", count, 1e-9, Provenance::Paper),
        ordered.row("d(u,v) = E_w(v) - E_w(u) for u <= v", count, 1e-9, Provenance::Paper),
        pythagoras.row("d(u,v) = d(u,P) + d(v,P)", count, 1e-9, Provenance::Paper),
        to_zero.row("d(u,0) = e1(u)/(m+1)", count, 1e-9, Provenance::Paper),
        weight.row("d independent of the weight", count, 1e-9, Provenance::Paper),
        cocycle.row("weighted d equals the mixed-sum form", count, 1e-9, Provenance::Paper),
        contraction.row("rooftop contraction excess / scale", count, 1e-9, Provenance::Paper),
        max_rooftop.row("d(max(u,v),u) >= d(v,P(u,v)) excess / scale", count, 1e-9, Provenance::Paper),
        neg_energy.row("-E_w(u) <= d(u,w) excess / scale", count, 1e-9, Provenance::Paper),
    ])
}

/// Rooftop envelope by the hull against the exponential-field continuation.
pub fn envelope_suite(seed: u64, count: usize) -> Result<Vec<CheckRow>> {
    let mut rng = seeded(seed);
    let schedule = doubling_schedule(2f64.powi(40));
    let mut agreement = Worst::new();
    let mut monotone = Failures::new();
    let mut dominated = Failures::new();
    let mut unique = Failures::new();
    let mut bounded = Failures::new();
    let mut min_principle = Worst::new();
    let mut domination = Failures::new();
    for i in 0..count {
        let p = params_at(i)?;
        let c = p.coordinate();
        let (u, v) = match i % 5 {
            0 => random_ordered_pair(&mut rng, c, &shape()),
            _ => random_crossing_pair(&mut rng, c, &shape()),
        };
        let run = envelope_via_hte(&u, &v, &schedule, &p)?;
        let hull = rooftop_p(&[&u, &v])?;
        let scale = u.sup_norm().max(v.sup_norm()).max(1.0);
        agreement.see(RadialProfile::sup_distance(&run.profile, &hull) / scale, || format!("instance {i}"));
        monotone.check(run.log.all_monotone(), || format!("instance {i}"));
        dominated.check(run.dominated, || format!("instance {i}"));
        unique.check(run.unique, || format!("instance {i}"));
        bounded.check(run.log.bounded.iter().all(|(_, ok)| *ok), || format!("instance {i}"));
        for atom in minimum_principle_atoms(&u, &v, &p)? {
            let excess = (atom.mass - atom.allowed).max(0.0) / p.c();
            min_principle.see(excess, || format!("instance {i}, tau {}", atom.tau));
        }
        // No atom of H_m(phi) in {phi < v} forces phi >= v.
        let phi = &run.profile;
        let tol = 1e-6 * scale;
        let free = hessian_measure(phi, &p)?.atoms().iter().all(|a| phi.value(a.tau) >= v.value(a.tau) - tol);
        if free {
            domination.check(RadialProfile::le(&v, phi, 2.0 * tol), || format!("instance {i}"));
        }
    }
    Ok(vec![
        agreement.row("sup |HTE envelope - hull rooftop| / scale", count, 1e-6, Provenance::Derived),
        monotone.row("HTE iterates nondecreasing in j", count, Provenance::Paper),
        dominated.row("HTE solutions below min(u, v)", count, Provenance::Paper),
        unique.row("second start converges to the same solution", count, Provenance::Paper),
        bounded.row("exponential field bounded along the iteration", count, Provenance::Derived),
        min_principle.row("minimum principle atom excess / c", count, 1e-10, Provenance::Paper),
        domination.row("domination principle on solver outputs", count, Provenance::Paper),
    ])
}

/// Concavity along segments and the basic energy identities.
pub fn energy_suite(seed: u64, count: usize) -> Result<Vec<CheckRow>> {
    let mut rng = seeded(seed);
    let ts: Vec<f64> = (1..10).map(|k| k as f64 / 10.0).collect();
    let mut concavity = Worst::new();
    let mut first = Worst::new();
    let mut second = Worst::new();
    let mut cocycle = Worst::new();
    let mut gradient = Worst::new();
    let mut ordered = Worst::new();
    let mut e1_bounds = Worst::new();
    let mut antisymmetry = Worst::new();
    let mut own_weight = Failures::new();
    let mut zero_weight = Worst::new();
    let mut aubin = Worst::new();
    let mut path = Worst::new();
    for i in 0..count {
        let p = params_at(i)?;
        let c = p.coordinate();
        let k = (p.m() + 1) as f64;
        let u = random_profile(&mut rng, c, &shape());
        let v = random_profile(&mut rng, c, &shape());
        let w = random_profile(&mut rng, c, &shape());
        let scale = [&u, &v, &w].iter().map(|g| e1_energy(g, &p)).collect::<Result<Vec<_>>>()?.into_iter().fold(0.0, f64::max);

        let seg = segment_report(&u, &v, &w, &ts, &p)?;
        for j in 0..ts.len() {
            concavity.see((seg.second[j] / scale).max(0.0), || format!("instance {i}, t {}", ts[j]));
            if let (Some(fd1), Some(fd2)) = (seg.fd_first[j], seg.fd_second[j]) {
                first.see(rel(seg.first[j], fd1, seg.first[j].abs().max(1e-3 * scale)), || format!("instance {i}, t {}", ts[j]));
                second.see(rel(seg.second[j], fd2, seg.second[j].abs().max(1e-3 * scale)), || format!("instance {i}, t {}", ts[j]));
            }
        }

        let eu = energy_ew(&u, &w, &p)?.value;
        let ev = energy_ew(&v, &w, &p)?.value;
        let diff = energy_difference(&u, &v, &p)?;
        cocycle.see(rel(eu - ev, diff, scale), || format!("instance {i}"));
        let lo = integrate(&u, &v, &hessian_measure(&u, &p)?)?;
        let hi = integrate(&u, &v, &hessian_measure(&v, &p)?)?;
        gradient.see(((lo - diff).max(diff - hi) / scale).max(0.0), || format!("instance {i}"));

        let (low, high) = random_ordered_pair(&mut rng, c, &shape());
        let gap = energy_ew(&high, &w, &p)?.value - energy_ew(&low, &w, &p)?.value;
        let base = integrate(&high, &low, &hessian_measure(&low, &p)?)?;
        ordered.see(((base / k - gap).max(gap - base) / scale).max(0.0), || format!("instance {i}"));
        aubin.see(
            {
                let ai = aubin_i(&high, &low, &p)?;
                let bound = k * metric_d(&high, &low, &w, &p)?;
                ((-ai).max(ai - bound) / scale).max(0.0)
            },
            || format!("instance {i}"),
        );

        let bound = e1_energy(&RadialProfile::combine(1.0, &u, 1.0, &w)?, &p)? / k;
        e1_bounds.see(((eu.abs() - bound) / scale).max(0.0), || format!("instance {i}"));
        antisymmetry.see(rel(eu, -energy_ew(&w, &u, &p)?.value, scale), || format!("instance {i}"));
        own_weight.check(energy_ew(&w, &w, &p)?.value == 0.0, || format!("instance {i}"));
        let zero = RadialProfile::zero(c);
        zero_weight.see(rel(energy_ew(&u, &zero, &p)?.value, -e1_energy(&u, &p)? / k, scale), || format!("instance {i}"));

        if i % 4 == 0 {
            for pt in envelope_path_derivative(&u, &v, &w, &[0.3, 0.6], 1e-6, &p)? {
                path.see(rel(pt.fd_derivative, pt.formula, pt.formula.abs().max(1e-3 * scale)), || format!("instance {i}, t {}", pt.t));
            }
        }
    }
    Ok(vec![
        concavity.row("segment f'' / scale (concavity)", count, 1e-8, Provenance::Paper),
        first.row("closed-form f' vs centered difference", count, 1e-4, Provenance::Derived),
        second.row("closed-form f'' vs centered difference", count, 1e-4, Provenance::Derived),
        cocycle.row("E_w(u) - E_w(v) equals the mixed sum", count, 1e-9, Provenance::Paper),
        gradient.row("int (u-v) H(u) <= E_w(u) - E_w(v) <= int (u-v) H(v)", count, 1e-9, Provenance::Paper),
        ordered.row("ordered sandwich for v <= u", count, 1e-9, Provenance::Paper),
        e1_bounds.row("|E_w(u)| <= e1(u + w)/(m+1)", count, 1e-9, Provenance::Paper),
        antisymmetry.row("E_w(u) = -E_u(w)", count, 1e-9, Provenance::Paper),
        own_weight.row("E_w(w) = 0", count, Provenance::Paper),
        zero_weight.row("E_0(u) = -e1(u)/(m+1)", count, 1e-9, Provenance::Paper),
        aubin.row("0 <= I(u1,u2) <= (m+1) d(u1,u2) for u1 >= u2", count, 1e-9, Provenance::Paper),
        path.row("envelope path derivative formula vs differences", count.div_ceil(4), 1e-4, Provenance::Paper),
    ])
}

/// Minimum spacing, in grid cells of `ln s`, between breakpoints of oracle-suite instances.
/// Node values cannot resolve two kinks inside one cell.
pub const RESOLVABLE_CELLS: f64 = 4.0;

fn resolvable(profiles: &[&RadialProfile], c: Coordinate, gap: f64) -> Result<bool> {
    let mut logs = Vec::new();
    for g in profiles {
        for tau in g.breakpoints() {
            logs.push(c.radius(*tau)?.ln());
        }
    }
    logs.sort_by(f64::total_cmp);
    Ok(logs.windows(2).all(|w| w[1] - w[0] >= gap))
}

/// Exact calculus against grid quadrature.
pub fn oracle_suite(seed: u64, count: usize, nodes: usize) -> Result<Vec<CheckRow>> {
    let mut rng = seeded(seed);
    let mut totals = Worst::new();
    let mut masses = Worst::new();
    let mut e1 = Worst::new();
    let mut ew = Worst::new();
    let mut aubin = Worst::new();
    let mut dist = Worst::new();
    for i in 0..count {
        let p = params_at(i)?;
        let (m, c) = (p.m(), p.coordinate());
        let small = ProfileShape { max_breakpoints: 3, depth: 2.0, max_slope_step: 1.5 };
        let gap = RESOLVABLE_CELLS * -RADIUS_FLOOR.ln() / (nodes - 1) as f64;
        let (u, v, w) = loop {
            let (u, v) = random_crossing_pair(&mut rng, c, &small);
            let w = random_profile(&mut rng, c, &small);
            if resolvable(&[&u, &v, &w], c, gap)? {
                break (u, v, w);
            }
        };
        let (gu, gv, gw) = (sample_radial(&u, nodes)?, sample_radial(&v, nodes)?, sample_radial(&w, nodes)?);

        let mu = hessian_measure(&u, &p)?;
        let exact_mass = mu.total_mass();
        totals.see(rel(total_mass(&gu, m)?, exact_mass, exact_mass), || format!("instance {i}"));
        let taus: Vec<f64> = mu.atoms().iter().map(|a| a.tau).collect();
        let mut cuts = vec![RADIUS_FLOOR];
        for pair in taus.windows(2) {
            cuts.push(c.radius(0.5 * (pair[0] + pair[1]))?);
        }
        cuts.push(1.0 + 1e-9);
        for (atom, measured) in mu.atoms().iter().zip(shell_masses(&gu, m, &cuts)?) {
            masses.see(rel(measured, atom.mass, atom.mass), || format!("instance {i}, tau {}", atom.tau));
        }
        let exact_e1 = e1_energy(&u, &p)?;
        e1.see(rel(oracle_e1(&gu, m)?, exact_e1, exact_e1), || format!("instance {i}"));
        let exact_ew = energy_ew(&u, &w, &p)?.value;
        let scale = exact_e1.max(e1_energy(&w, &p)?) / (m + 1) as f64;
        ew.see(rel(oracle_energy(&gu, &gw, m)?, exact_ew, exact_ew.abs().max(0.1 * scale)), || format!("instance {i}"));
        let exact_i = aubin_i(&u, &v, &p)?;
        aubin.see(rel(oracle_aubin_i(&gu, &gv, m)?, exact_i, exact_i.max(0.1 * scale)), || format!("instance {i}"));
        let exact_d = metric_d(&u, &v, &w, &p)?;
        dist.see(rel(oracle_metric(&gu, &gv, &gw, m)?, exact_d, exact_d.max(0.1 * scale)), || format!("instance {i}"));
    }
    let mut rows = vec![
        totals.row("oracle total mass", count, 1e-2, Provenance::Derived),
        masses.row("oracle atom masses", count, 1e-2, Provenance::Derived),
        e1.row("oracle e1", count, 1e-2, Provenance::Derived),
        ew.row("oracle E_w", count, 1e-2, Provenance::Derived),
        aubin.row("oracle I", count, 1e-2, Provenance::Derived),
        dist.row("oracle d", count, 1e-2, Provenance::Derived),
    ];
    for (n, m) in [(2usize, 1usize), (3, 2)] {
        let coarse = kink_mass(n, m, nodes)?;
        let fine = kink_mass(n, m, 2 * nodes)?;
        rows.push(CheckRow::close(
            &format!("c_{{{n},{m}}} under resolution doubling"),
            format!("nodes={nodes} -> {}", 2 * nodes),
            coarse,
            fine,
            3e-3,
            Provenance::Derived,
        ));
    }
    Ok(rows)
}

/// Geodesics: exact kink families, reparameterized families, contraction and the Perron oracle.
pub fn geodesic_suite(seed: u64, kink_count: usize, smooth_count: usize) -> Result<Vec<CheckRow>> {
    let mut rng = seeded(seed);
    let ts = uniform_samples(21);
    let mut kink_linearity = Worst::new();
    let mut kink_metric = Worst::new();
    let mut bounds = Failures::new();
    let mut contraction = Failures::new();
    let mut capacity = Failures::new();
    for i in 0..kink_count {
        let n = 2 + i % 2;
        let p = HessianParams::new(n, n)?;
        let c = p.coordinate();
        let (u0, u1, v0, v1) = (random_kink(&mut rng, c), random_kink(&mut rng, c), random_kink(&mut rng, c), random_kink(&mut rng, c));
        let w = if i % 2 == 0 { RadialProfile::zero(c) } else { random_kink(&mut rng, c) };
        let g = weak_geodesic(&u0, &u1, &p, GeodesicOptions::default())?;
        let audit = geodesic_audit(&g, &ts, &w)?;
        kink_linearity.see(audit.linearity, || format!("kink instance {i}"));
        kink_metric.see(audit.metric, || format!("kink instance {i}"));
        bounds.check(audit.bounds_hold(), || format!("kink instance {i}"));
        capacity.check(audit.capacity_ok, || format!("kink instance {i}"));
        let rows = geodesic_contraction_check(&u0, &u1, &v0, &v1, &ts, &w, &p, GeodesicOptions::default())?;
        contraction.check(rows.iter().all(|r| r.ok), || format!("kink instance {i}"));
    }

    let p = HessianParams::new(2, 1)?;
    let higher = Coordinate::new(2, 2)?;
    let shallow = ProfileShape { max_breakpoints: 3, depth: 2.0, max_slope_step: 1.5 };
    let mut smooth_dev = Worst::new();
    let mut shrinking = Failures::new();
    for i in 0..smooth_count {
        let u0 = random_profile(&mut rng, higher, &shallow);
        let u1 = random_profile(&mut rng, higher, &shallow);
        let w = RadialProfile::zero(p.coordinate());
        let sweep = resolution_sweep(&u0, &u1, &w, &ts, &[512, 1024, 2048], &p)?;
        let devs: Vec<f64> = sweep.iter().map(|(_, a)| a.deviation()).collect();
        smooth_dev.see(*devs.last().unwrap(), || format!("smooth instance {i}"));
        shrinking.check(devs.windows(2).all(|d| d[1] < d[0]), || format!("smooth instance {i}: {devs:?}"));
        for (_, audit) in &sweep {
            bounds.check(audit.bounds_hold(), || format!("smooth instance {i}"));
            capacity.check(audit.capacity_ok, || format!("smooth instance {i}"));
        }
        let v0 = random_profile(&mut rng, higher, &shallow);
        let v1 = random_profile(&mut rng, higher, &shallow);
        let rows = geodesic_contraction_check(&u0, &u1, &v0, &v1, &uniform_samples(6), &w, &p, GeodesicOptions::default())?;
        contraction.check(rows.iter().all(|r| r.ok), || format!("smooth instance {i}"));
    }

    let p = HessianParams::new(2, 2)?;
    let c = p.coordinate();
    let u0 = RadialProfile::kink(c, 1.0, -1.0)?;
    let u1 = RadialProfile::kink(c, 1.0, -0.5)?;
    let sheet = crate::oracle::perron_geodesic(&u0, &u1, &PerronOptions::default())?;
    let g = weak_geodesic(&u0, &u1, &p, GeodesicOptions::default())?;
    let gap = sheet.sup_distance(|t| geodesic_profile(&g, t))?;
    let scale = u0.sup_norm().max(u1.sup_norm());

    let total = kink_count + 3 * smooth_count;
    Ok(vec![
        kink_linearity.row("kink family E_w linearity deviation", kink_count, 1e-8, Provenance::Paper),
        kink_metric.row("kink family geodesic equation deviation", kink_count, 1e-8, Provenance::Paper),
        smooth_dev.row("n=2 m=1 audit deviation at resolution 2048", smooth_count, 1e-4, Provenance::Paper),
        shrinking.row("n=2 m=1 deviation shrinks under doubling", smooth_count, Provenance::Derived),
        bounds.row("pointwise bounds along geodesics", total, Provenance::Paper),
        capacity.row("endpoint convergence in capacity", total, Provenance::Paper),
        contraction.row("geodesic contraction inequality", kink_count + smooth_count, Provenance::Paper),
        CheckRow::at_most("Legendre vs Perron sup distance / scale", "512x64, max(tau,-1) to max(tau,-0.5)".into(), 5e-3, gap / scale, 0.0, Provenance::Derived),
        CheckRow::flag("Perron sheet within bounds and convex", "512x64".into(), sheet.bounds_ok && sheet.slices_ok, Provenance::Paper),
    ])
}

/// Tail behaviour of a sequence of nonnegative numbers: tends to zero numerically.
fn vanishes(xs: &[f64], reference: f64) -> bool {
    xs.last().is_some_and(|&x| x <= 1e-5 * reference.max(f64::MIN_POSITIVE))
}

/// One family of the convergence characterization.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceCase {
    pub name: String,
    pub d: Vec<f64>,
    pub l1: Vec<f64>,
    pub energy_gap: Vec<f64>,
    pub d_converges: bool,
    pub l1_converges: bool,
    pub energy_converges: bool,
}

impl ConvergenceCase {
    /// `d -> 0` exactly when `L^1 -> 0` and the energies converge.
    pub fn consistent(&self) -> bool {
        self.d_converges == (self.l1_converges && self.energy_converges)
    }
}

fn convergence_case(name: &str, seq: &[RadialProfile], limit: &RadialProfile, w: &RadialProfile, p: &HessianParams) -> Result<ConvergenceCase> {
    let gl = sample_radial(limit, DEFAULT_NODES)?;
    let el = energy_ew(limit, w, p)?.value;
    let mut case = ConvergenceCase {
        name: name.into(),
        d: vec![],
        l1: vec![],
        energy_gap: vec![],
        d_converges: false,
        l1_converges: false,
        energy_converges: false,
    };
    for g in seq {
        case.d.push(metric_d(g, limit, w, p)?);
        case.l1.push(oracle_l1(&sample_radial(g, DEFAULT_NODES)?, &gl)?);
        case.energy_gap.push((energy_ew(g, w, p)?.value - el).abs());
    }
    let scale = e1_energy(&seq[0], p)?.max(e1_energy(limit, p)?);
    let l1_scale = case.l1.iter().copied().fold(0.0, f64::max).max(limit.sup_norm());
    case.d_converges = vanishes(&case.d, scale);
    case.l1_converges = vanishes(&case.l1, l1_scale);
    case.energy_converges = vanishes(&case.energy_gap, scale);
    Ok(case)
}

/// Families exhibiting both directions of the convergence characterization.
pub fn convergence_cases(n: usize) -> Result<Vec<ConvergenceCase>> {
    let p = HessianParams::new(n, n)?;
    let c = p.coordinate();
    let zero = RadialProfile::zero(c);
    let target = RadialProfile::kink(c, 1.0, -1.0)?;
    let ks = 1..=30;
    let rising: Vec<RadialProfile> = ks.clone().map(|k| RadialProfile::kink(c, 1.0, -1.0 - 0.5f64.powi(k))).collect::<Result<_>>()?;
    let falling: Vec<RadialProfile> = ks.clone().map(|k| RadialProfile::kink(c, 1.0, -1.0 + 0.5f64.powi(k))).collect::<Result<_>>()?;
    let capacity: Vec<RadialProfile> = (0..=20)
        .map(|k| {
            let j = 2f64.powi(k);
            RadialProfile::kink(c, j.powf(1.0 / n as f64), -1.0 / j)
        })
        .collect::<Result<_>>()?;
    // Same energy as the target but a different function.
    let twin = RadialProfile::kink(c, 2.0, -(0.5f64.powi(n as i32)))?;
    let constant = vec![twin; 5];
    Ok(vec![
        convergence_case("max(tau, -1 - 2^-k) increasing", &rising, &target, &zero, &p)?,
        convergence_case("max(tau, -1 + 2^-k) decreasing", &falling, &target, &zero, &p)?,
        convergence_case("max(j^(1/n) tau, -1/j) to 0", &capacity, &zero, &zero, &p)?,
        convergence_case("equal-energy profile vs max(tau,-1)", &constant, &target, &zero, &p)?,
    ])
}

/// The convergence characterization, capacity convergence without `d`-convergence, monotone
/// continuity of `d` and the completeness construction.
pub fn convergence_suite() -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    for n in [2usize, 3] {
        for case in convergence_cases(n)? {
            rows.push(CheckRow::flag(
                "d-convergence iff L1-convergence and energy convergence",
                format!(
                    "n={n}; {}; d->0: {}; L1->0: {}; E converges: {}",
                    case.name, case.d_converges, case.l1_converges, case.energy_converges
                ),
                case.consistent(),
                Provenance::Paper,
            ));
        }
        let p = HessianParams::new(n, n)?;
        let c = p.coordinate();
        let zero = RadialProfile::zero(c);
        let seq: Vec<RadialProfile> = (0..=20)
            .map(|k| {
                let j = 2f64.powi(k);
                RadialProfile::kink(c, j.powf(1.0 / n as f64), -1.0 / j)
            })
            .collect::<Result<_>>()?;
        let caps = capacity_convergence_check(&seq, &zero, 0.05, 0.5, &p)?;
        let d_values: Vec<f64> = seq.iter().map(|g| metric_d(g, &zero, &zero, &p)).collect::<Result<_>>()?;
        let d_const = d_values.iter().all(|d| rel(*d, monge_ampere_mass(n) / (n + 1) as f64, *d) < 1e-9);
        let cap_zero = caps.last().is_some_and(|e| e.capacity == 0.0) && caps[0].capacity > 0.0;
        rows.push(CheckRow::flag(
            "capacity convergence without d-convergence",
            format!("n={n}; max(j^(1/n) tau, -1/j), j=2^k; eps=0.05; K=ball(1/2)"),
            d_const && cap_zero,
            Provenance::Paper,
        ));

        let a = RadialProfile::kink(c, 1.0, -1.2)?;
        let b = RadialProfile::kink(c, 2.0, -0.7)?;
        let target = metric_d(&a, &b, &zero, &p)?;
        let mut gaps = Vec::new();
        for k in 1..=30 {
            let h = 0.5f64.powi(k);
            let aj = RadialProfile::kink(c, 1.0, -1.2 + h * 0.1)?;
            let bj = RadialProfile::kink(c, 2.0, -0.7 - h * 0.1)?;
            gaps.push((metric_d(&aj, &bj, &zero, &p)? - target).abs());
        }
        rows.push(CheckRow::deviation(
            "d(u_j,v_j) -> d(u,v) along monotone sequences",
            format!("n={n}; kinks shifted by 0.1*2^-k, k=30"),
            *gaps.last().unwrap() / target,
            1e-8,
            Provenance::Paper,
        ));

        let cauchy: Vec<RadialProfile> = (1..=30).map(|k| RadialProfile::kink(c, 1.0, -1.0 - 0.5f64.powi(k))).collect::<Result<_>>()?;
        let lim = cauchy_limit(&cauchy, &zero, &p)?;
        rows.push(CheckRow::deviation(
            "completeness construction recovers the limit",
            format!("n={n}; max(tau, -1 - 2^-k), k=1..30"),
            RadialProfile::sup_distance(&lim.limit, &RadialProfile::kink(c, 1.0, -1.0)?),
            1e-8,
            Provenance::Derived,
        ));
    }
    Ok(rows)
}

fn monge_ampere_mass(n: usize) -> f64 {
    crate::constant::monge_ampere_constant(n)
}
