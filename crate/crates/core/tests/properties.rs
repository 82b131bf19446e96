use proptest::prelude::*;

use hessmetric::energy::{energy_difference, energy_ew};
use hessmetric::geodesic::{geodesic_profile, weak_geodesic, GeodesicOptions};
use hessmetric::metric::metric_d;
use hessmetric::rooftop::rooftop_p;
use hessmetric::{dirichlet_solve, e1_energy, hessian_measure, legendre, legendre_inverse, HessianParams, RadialProfile};

const ORDERS: [(usize, usize); 4] = [(2, 2), (3, 3), (2, 1), (3, 2)];

fn params() -> impl Strategy<Value = HessianParams> {
    (0..ORDERS.len()).prop_map(|i| HessianParams::new(ORDERS[i].0, ORDERS[i].1).unwrap())
}

/// Breakpoints in `(-3, -0.02)` at least `1e-3` apart and positive slope increments.
fn pieces() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    prop::collection::vec((-3.0f64..-0.02, 0.05f64..2.0), 1..5).prop_map(|raw| {
        let mut raw = raw;
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        raw.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-3);
        let mut slopes = vec![0.0];
        for (_, step) in &raw {
            slopes.push(slopes.last().unwrap() + step);
        }
        (raw.into_iter().map(|(b, _)| b).collect(), slopes)
    })
}

fn profile_for(p: &HessianParams, (bps, slopes): (Vec<f64>, Vec<f64>)) -> RadialProfile {
    RadialProfile::new(p.coordinate(), bps, slopes).unwrap()
}

fn instance(count: usize) -> impl Strategy<Value = (HessianParams, Vec<RadialProfile>)> {
    (params(), prop::collection::vec(pieces(), count))
        .prop_map(|(p, raw)| (p, raw.into_iter().map(|r| profile_for(&p, r)).collect()))
}

fn scale(p: &HessianParams, gs: &[RadialProfile]) -> f64 {
    gs.iter().map(|g| e1_energy(g, p).unwrap()).fold(1.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conjugation_is_an_involution((_, gs) in instance(1)) {
        prop_assert_eq!(legendre_inverse(&legendre(&gs[0])).unwrap(), gs[0].clone());
    }

    #[test]
    fn dirichlet_problem_recovers_the_profile((p, gs) in instance(1)) {
        let back = dirichlet_solve(&hessian_measure(&gs[0], &p).unwrap(), &p).unwrap();
        prop_assert!(back.approx_eq(&gs[0], 1e-9));
    }

    #[test]
    fn total_mass_is_read_off_the_last_slope((p, gs) in instance(1)) {
        let mass = hessian_measure(&gs[0], &p).unwrap().total_mass();
        let expected = p.c() * gs[0].last_slope().powi(p.m() as i32);
        prop_assert!((mass - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn metric_axioms((p, gs) in instance(3)) {
        let zero = RadialProfile::zero(p.coordinate());
        let (u, v, psi) = (&gs[0], &gs[1], &gs[2]);
        let s = scale(&p, &gs);
        let duv = metric_d(u, v, &zero, &p).unwrap();
        prop_assert!(duv >= 0.0);
        prop_assert_eq!(duv, metric_d(v, u, &zero, &p).unwrap());
        prop_assert_eq!(metric_d(u, u, &zero, &p).unwrap(), 0.0);
        let detour = metric_d(u, psi, &zero, &p).unwrap() + metric_d(psi, v, &zero, &p).unwrap();
        prop_assert!(duv <= detour + 1e-9 * s);
    }

    #[test]
    fn distance_does_not_depend_on_the_weight((p, gs) in instance(3)) {
        let zero = RadialProfile::zero(p.coordinate());
        let a = metric_d(&gs[0], &gs[1], &zero, &p).unwrap();
        let b = metric_d(&gs[0], &gs[1], &gs[2], &p).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * scale(&p, &gs));
    }

    #[test]
    fn rooftop_is_below_both_and_idempotent((_, gs) in instance(2)) {
        let pr = rooftop_p(&[&gs[0], &gs[1]]).unwrap();
        prop_assert!(RadialProfile::le(&pr, &gs[0], 1e-12));
        prop_assert!(RadialProfile::le(&pr, &gs[1], 1e-12));
        prop_assert!(rooftop_p(&[&pr, &gs[0]]).unwrap().approx_eq(&pr, 1e-12));
    }

    #[test]
    fn energy_is_monotone_and_a_cocycle((p, gs) in instance(3)) {
        let (u, v, w) = (&gs[0], &gs[1], &gs[2]);
        let s = scale(&p, &gs);
        let low = rooftop_p(&[u, v]).unwrap();
        let e_low = energy_ew(&low, w, &p).unwrap().value;
        let e_u = energy_ew(u, w, &p).unwrap().value;
        prop_assert!(e_low <= e_u + 1e-9 * s);
        let diff = energy_difference(u, v, &p).unwrap();
        prop_assert!((e_u - energy_ew(v, w, &p).unwrap().value - diff).abs() <= 1e-9 * s);
    }

    #[test]
    fn geodesic_starts_and_ends_at_its_endpoints((p, gs) in instance(2)) {
        prop_assume!(p.m() == p.n());
        let g = weak_geodesic(&gs[0], &gs[1], &p, GeodesicOptions::default()).unwrap();
        prop_assert!(geodesic_profile(&g, 0.0).unwrap().approx_eq(&gs[0], 1e-12));
        prop_assert!(geodesic_profile(&g, 1.0).unwrap().approx_eq(&gs[1], 1e-12));
    }
}
