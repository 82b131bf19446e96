//! Seeded generators of random profiles for property runs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coords::Coordinate;
use crate::profile::RadialProfile;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Size limits of generated profiles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileShape {
    pub max_breakpoints: usize,
    /// Breakpoints are drawn from `[-depth, -0.02]`.
    pub depth: f64,
    /// Upper bound for each slope increment.
    pub max_slope_step: f64,
}

impl Default for ProfileShape {
    fn default() -> Self {
        ProfileShape { max_breakpoints: 4, depth: 2.5, max_slope_step: 1.5 }
    }
}

/// A bounded profile with between one and `max_breakpoints` kinks.
pub fn random_profile<R: Rng>(rng: &mut R, coordinate: Coordinate, shape: &ProfileShape) -> RadialProfile {
    loop {
        let k = rng.gen_range(1..=shape.max_breakpoints.max(1));
        let mut bps: Vec<f64> = (0..k).map(|_| rng.gen_range(-shape.depth..-0.02)).collect();
        bps.sort_by(f64::total_cmp);
        bps.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
        let mut slopes = vec![0.0];
        for _ in 0..bps.len() {
            let step = rng.gen_range(0.05..shape.max_slope_step);
            slopes.push(slopes.last().unwrap() + step);
        }
        if let Ok(g) = RadialProfile::new(coordinate, bps, slopes) {
            return g;
        }
    }
}

/// `max(slope * tau, level)` with random slope and level.
pub fn random_kink<R: Rng>(rng: &mut R, coordinate: Coordinate) -> RadialProfile {
    let slope = rng.gen_range(0.2..2.5);
    let level = rng.gen_range(-2.0..-0.05);
    RadialProfile::kink(coordinate, slope, level).expect("slope and level are in range")
}

/// `(lower, upper)` with `lower <= upper` everywhere.
pub fn random_ordered_pair<R: Rng>(rng: &mut R, coordinate: Coordinate, shape: &ProfileShape) -> (RadialProfile, RadialProfile) {
    let upper = random_profile(rng, coordinate, shape);
    let gap = random_profile(rng, coordinate, shape);
    let lower = RadialProfile::combine(1.0, &upper, 1.0, &gap).expect("same coordinate");
    (lower, upper)
}

/// Two profiles whose graphs cross at least once.
pub fn random_crossing_pair<R: Rng>(rng: &mut R, coordinate: Coordinate, shape: &ProfileShape) -> (RadialProfile, RadialProfile) {
    loop {
        let u = random_profile(rng, coordinate, shape);
        let v = random_profile(rng, coordinate, shape);
        if !RadialProfile::le(&u, &v, 0.0) && !RadialProfile::le(&v, &u, 0.0) {
            return (u, v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_reproducible() {
        let c = Coordinate::new(3, 2).unwrap();
        let shape = ProfileShape::default();
        let a = random_profile(&mut seeded(7), c, &shape);
        let b = random_profile(&mut seeded(7), c, &shape);
        assert_eq!(a, b);
        let (lo, hi) = random_ordered_pair(&mut seeded(8), c, &shape);
        assert!(RadialProfile::le(&lo, &hi, 0.0));
    }
}
