//! Closed-form reference values and frozen oracle measurements.

use std::f64::consts::PI;

use hessmetric::metric::{capacity_ball, metric_d};
use hessmetric::oracle::{kink_mass, DEFAULT_NODES};
use hessmetric::{e1_energy, hessian_constant, HessianParams, RadialProfile};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs()
}

#[test]
fn measured_constants_are_frozen() {
    // oracle mass of max(tau_m, -1) at 4096 nodes
    assert!(close(hessian_constant(2, 1).unwrap(), 157.92128424, 1e-8));
    assert!(close(hessian_constant(3, 2).unwrap(), 496.11238653, 1e-8));
}

#[test]
fn measured_constants_track_the_flux_formula() {
    for (n, m) in [(2usize, 1usize), (3, 2)] {
        let analytic = (4.0 * PI).powi(n as i32) * (n as f64 / m as f64 - 1.0).powi(m as i32);
        assert!(close(kink_mass(n, m, DEFAULT_NODES).unwrap(), analytic, 1e-4), "{n},{m}");
    }
}

#[test]
fn intro_energy_of_a_sum_of_kinks() {
    for n in [2usize, 3] {
        let p = HessianParams::new(n, n).unwrap();
        let c = p.coordinate();
        for (a, b) in [(-2.0, -0.5), (-1.0, -0.25), (-3.0, -2.5)] {
            let sum = RadialProfile::sum(&[&RadialProfile::kink(c, 1.0, a).unwrap(), &RadialProfile::kink(c, 1.0, b).unwrap()]).unwrap();
            let expected = (2.0 * PI).powi(n as i32) * (b - a + 2f64.powi(n as i32 + 1) * -b);
            assert!(close(e1_energy(&sum, &p).unwrap(), expected, 1e-12), "n={n} a={a} b={b}");
        }
    }
}

#[test]
fn capacity_example_distance_is_constant() {
    for n in [2usize, 3] {
        let p = HessianParams::new(n, n).unwrap();
        let c = p.coordinate();
        let zero = RadialProfile::zero(c);
        for j in [1.0f64, 7.0, 50.0] {
            let u = RadialProfile::kink(c, j.powf(1.0 / n as f64), -1.0 / j).unwrap();
            let expected = (2.0 * PI).powi(n as i32) / (n + 1) as f64;
            assert!(close(metric_d(&u, &zero, &zero, &p).unwrap(), expected, 1e-12));
        }
    }
}

#[test]
fn ball_capacity_in_the_monge_ampere_case() {
    let p = HessianParams::new(2, 2).unwrap();
    let r: f64 = 0.5;
    assert!(close(capacity_ball(r, &p).unwrap(), (2.0 * PI).powi(2) / r.ln().powi(2), 1e-14));
}
