use serde::{Deserialize, Serialize};

use crate::coords::HessianParams;
use crate::error::{Error, Result};
use crate::profile::RadialProfile;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub tau: f64,
    pub mass: f64,
}

/// Finite sum of point masses on spheres `{tau = tau_k}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AtomicMeasure {
    atoms: Vec<Atom>,
}

/// Locations closer than this (relative) are treated as the same sphere when merging.
pub const ATOM_MERGE_TOL: f64 = 1e-12;

impl AtomicMeasure {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.iter().any(|a| !a.tau.is_finite() || !a.mass.is_finite()) {
            return Err(Error::Domain("atoms must be finite".into()));
        }
        if let Some(a) = atoms.iter().find(|a| a.mass < 0.0) {
            return Err(Error::Domain(format!("negative mass {} at {}", a.mass, a.tau)));
        }
        if let Some(a) = atoms.iter().find(|a| a.tau > 0.0) {
            return Err(Error::Boundary(format!("atom at {} lies outside the ball", a.tau)));
        }
        if atoms.windows(2).any(|w| w[0].tau >= w[1].tau) {
            return Err(Error::Domain("atom locations must be strictly increasing".into()));
        }
        Ok(AtomicMeasure { atoms })
    }

    pub fn empty() -> Self {
        AtomicMeasure { atoms: Vec::new() }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    /// Mass of the atom at `tau`, zero when there is none.
    pub fn mass_at(&self, tau: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| (a.tau - tau).abs() <= ATOM_MERGE_TOL * (1.0 + tau.abs()))
            .map(|a| a.mass)
            .sum()
    }

    /// Sum of two measures with nearby locations identified.
    pub fn merge(&self, other: &AtomicMeasure) -> AtomicMeasure {
        let mut all: Vec<Atom> = self.atoms.iter().chain(&other.atoms).copied().collect();
        all.sort_by(|a, b| a.tau.total_cmp(&b.tau));
        let mut out: Vec<Atom> = Vec::with_capacity(all.len());
        for a in all {
            match out.last_mut() {
                Some(last) if (a.tau - last.tau).abs() <= ATOM_MERGE_TOL * (1.0 + a.tau.abs()) => last.mass += a.mass,
                _ => out.push(a),
            }
        }
        AtomicMeasure { atoms: out }
    }

    pub fn scaled(&self, factor: f64) -> AtomicMeasure {
        AtomicMeasure {
            atoms: self.atoms.iter().map(|a| Atom { tau: a.tau, mass: a.mass * factor }).collect(),
        }
    }
}

fn check_tag(g: &RadialProfile, params: &HessianParams) -> Result<()> {
    if g.coordinate() != params.coordinate() {
        return Err(Error::Coordinate(format!(
            "profile is piecewise linear in {:?}, the operator needs {:?}",
            g.coordinate(),
            params.coordinate()
        )));
    }
    Ok(())
}

/// `H_m(g)`: one atom per breakpoint, carrying `c (sigma_k^m - sigma_{k-1}^m)`.
pub fn hessian_measure(g: &RadialProfile, params: &HessianParams) -> Result<AtomicMeasure> {
    check_tag(g, params)?;
    if !g.is_bounded() {
        return Err(Error::UnboundedMass(g.slopes()[0]));
    }
    let m = params.m() as i32;
    let c = params.c();
    let slopes = g.slopes();
    let atoms = g
        .breakpoints()
        .iter()
        .enumerate()
        .map(|(k, &tau)| Atom { tau, mass: c * (slopes[k + 1].powi(m) - slopes[k].powi(m)) })
        .collect();
    Ok(AtomicMeasure { atoms })
}

/// `dd^c g_1 ^ ... ^ dd^c g_m ^ beta^(n-m)` by polarization of pure powers.
pub fn mixed_measure(factors: &[&RadialProfile], params: &HessianParams) -> Result<AtomicMeasure> {
    let m = params.m();
    if factors.len() != m {
        return Err(Error::Arity { expected: m, got: factors.len() });
    }
    for g in factors {
        check_tag(g, params)?;
        if !g.is_bounded() {
            return Err(Error::UnboundedMass(g.slopes()[0]));
        }
    }
    if m == 1 {
        return hessian_measure(factors[0], params);
    }
    let factorial: f64 = (1..=m).map(|k| k as f64).product();
    let mut signed: Vec<Atom> = Vec::new();
    let mut scale = 0.0f64;
    for mask in 1u32..(1u32 << m) {
        let members: Vec<&RadialProfile> = (0..m).filter(|i| mask & (1 << i) != 0).map(|i| factors[i]).collect();
        let sign = if (m - members.len()) % 2 == 0 { 1.0 } else { -1.0 };
        let sum = RadialProfile::sum(&members)?;
        let h = hessian_measure(&sum, params)?;
        scale = scale.max(h.total_mass());
        signed.extend(h.atoms.iter().map(|a| Atom { tau: a.tau, mass: sign * a.mass / factorial }));
    }
    let merged = AtomicMeasure { atoms: Vec::new() }.merge(&AtomicMeasure { atoms: signed });
    let floor = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let mut atoms = Vec::with_capacity(merged.atoms.len());
    for a in merged.atoms {
        if a.mass < -floor {
            return Err(Error::NegativeMass { tau: a.tau, mass: a.mass, scale });
        }
        if a.mass > floor {
            atoms.push(a);
        }
    }
    Ok(AtomicMeasure { atoms })
}

/// `int (u - w) dmu`, evaluated exactly at the atoms.
pub fn integrate(u: &RadialProfile, w: &RadialProfile, mu: &AtomicMeasure) -> Result<f64> {
    if u.coordinate() != w.coordinate() {
        return Err(Error::Coordinate(format!("{:?} vs {:?}", u.coordinate(), w.coordinate())));
    }
    Ok(mu.atoms.iter().map(|a| (u.value(a.tau) - w.value(a.tau)) * a.mass).sum())
}

/// `e_{1,m}(g) = int (-g) H_m(g)`.
pub fn e1_energy(g: &RadialProfile, params: &HessianParams) -> Result<f64> {
    let mu = hessian_measure(g, params)?;
    Ok(mu.atoms.iter().map(|a| -g.value(a.tau) * a.mass).sum())
}

/// The bounded profile whose Hessian measure is `mu`.
pub fn dirichlet_solve(mu: &AtomicMeasure, params: &HessianParams) -> Result<RadialProfile> {
    let mu = AtomicMeasure::new(mu.atoms.clone())?;
    let m = params.m() as f64;
    let mut cumulative = 0.0;
    let mut slopes = vec![0.0];
    for a in &mu.atoms {
        cumulative += a.mass;
        slopes.push((cumulative / params.c()).powf(1.0 / m));
    }
    let breakpoints = mu.atoms.iter().map(|a| a.tau).collect();
    RadialProfile::new(params.coordinate(), breakpoints, slopes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn mp(n: usize) -> HessianParams {
        HessianParams::new(n, n).unwrap()
    }

    #[test]
    fn kink_carries_full_constant() {
        let p = mp(2);
        let g = RadialProfile::kink(p.coordinate(), 1.0, -0.4).unwrap();
        let mu = hessian_measure(&g, &p).unwrap();
        assert_eq!(mu.atoms().len(), 1);
        assert_eq!(mu.atoms()[0].tau, -0.4);
        assert!((mu.total_mass() - 4.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn doubled_slope_quadruples_mass() {
        let p = mp(2);
        let g = RadialProfile::kink(p.coordinate(), 2.0, -1.0).unwrap();
        let mu = hessian_measure(&g, &p).unwrap();
        assert_eq!(mu.atoms()[0].tau, -0.5);
        assert!((mu.total_mass() - 16.0 * PI * PI).abs() < 1e-10);
    }

    #[test]
    fn unbounded_profile_rejected() {
        let p = mp(2);
        let g = RadialProfile::new(p.coordinate(), vec![], vec![1.0]).unwrap();
        assert!(matches!(hessian_measure(&g, &p), Err(Error::UnboundedMass(_))));
    }

    #[test]
    fn mixed_measure_of_two_kinks() {
        let p = mp(2);
        let (a, b) = (-0.5, -1.5);
        let ga = RadialProfile::kink(p.coordinate(), 1.0, a).unwrap();
        let gb = RadialProfile::kink(p.coordinate(), 1.0, b).unwrap();
        let mu = mixed_measure(&[&ga, &gb], &p).unwrap();
        let c = 4.0 * PI * PI;
        // d(f_a' f_b') puts everything where the product of slopes jumps, at the larger kink.
        assert_eq!(mu.atoms().len(), 1);
        assert_eq!(mu.mass_at(b), 0.0);
        assert!((mu.mass_at(a) - c).abs() < 1e-10 * c);
        let zero = RadialProfile::zero(p.coordinate());
        assert!(mixed_measure(&[&ga, &zero], &p).unwrap().is_empty());
        assert!(matches!(mixed_measure(&[&ga], &p), Err(Error::Arity { expected: 2, got: 1 })));
    }

    #[test]
    fn intro_energy_of_two_kinks() {
        for n in 2..=3 {
            let p = mp(n);
            let (a, b) = (-1.3, -0.4);
            let g = RadialProfile::combine(
                1.0,
                &RadialProfile::kink(p.coordinate(), 1.0, a).unwrap(),
                1.0,
                &RadialProfile::kink(p.coordinate(), 1.0, b).unwrap(),
            )
            .unwrap();
            let expected = (2.0 * PI).powi(n as i32) * (b - a + 2f64.powi(n as i32 + 1) * (-b));
            let got = e1_energy(&g, &p).unwrap();
            assert!((got / expected - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dirichlet_round_trip() {
        let p = mp(3);
        assert!(dirichlet_solve(&AtomicMeasure::empty(), &p).unwrap().is_zero());
        let single = AtomicMeasure::new(vec![Atom { tau: -0.7, mass: p.c() }]).unwrap();
        assert_eq!(dirichlet_solve(&single, &p).unwrap(), RadialProfile::kink(p.coordinate(), 1.0, -0.7).unwrap());
        let g = RadialProfile::new(p.coordinate(), vec![-2.0, -0.5], vec![0.0, 0.5, 1.25]).unwrap();
        let back = dirichlet_solve(&hessian_measure(&g, &p).unwrap(), &p).unwrap();
        assert_eq!(back.breakpoints(), g.breakpoints());
        for (x, y) in back.slopes().iter().zip(g.slopes()) {
            assert!((x - y).abs() <= 4.0 * f64::EPSILON * y.abs());
        }
    }

    #[test]
    fn measure_json_shape() {
        let mu = AtomicMeasure::new(vec![Atom { tau: -1.0, mass: 2.5 }]).unwrap();
        assert_eq!(serde_json::to_string(&mu).unwrap(), r#"[{"tau":-1.0,"mass":2.5}]"#);
    }
}
