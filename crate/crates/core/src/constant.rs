use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::oracle;

/// Environment variable naming the JSON file that persists measured constants.
pub const CACHE_ENV: &str = "HESSMETRIC_CACHE";

/// Grid size used when a constant has to be measured.
pub const CONSTANT_NODES: usize = 4096;

static MEMORY: OnceLock<Mutex<HashMap<(usize, usize), f64>>> = OnceLock::new();

/// `(2 pi)^n`, the Monge-Ampere mass of `max(ln|z|, a)`.
pub fn monge_ampere_constant(n: usize) -> f64 {
    (2.0 * PI).powi(n as i32)
}

/// Total Hessian mass of the unit-slope kink `max(tau_m, -1)`.
///
/// Exact for `m = n`. Otherwise the value is measured once by the grid oracle, then served from
/// memory and, when `HESSMETRIC_CACHE` is set, from that file.
pub fn hessian_constant(n: usize, m: usize) -> Result<f64> {
    if n < 2 || m < 1 || m > n {
        return Err(Error::Params(format!("need n > 1 and 1 <= m <= n, got n = {n}, m = {m}")));
    }
    if m == n {
        return Ok(monge_ampere_constant(n));
    }
    let memory = MEMORY.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = memory.lock().unwrap_or_else(|e| e.into_inner());
    if let Some(&c) = guard.get(&(n, m)) {
        return Ok(c);
    }
    let path = std::env::var_os(CACHE_ENV).map(PathBuf::from);
    let mut file_map = path.as_ref().map(|p| read_cache(p)).unwrap_or_default();
    let key = format!("{n},{m}");
    let c = match file_map.get(&key) {
        Some(&c) if c.is_finite() && c > 0.0 => c,
        _ => {
            let c = oracle::kink_mass(n, m, CONSTANT_NODES)?;
            if let Some(p) = &path {
                file_map.insert(key, c);
                write_cache(p, &file_map)?;
            }
            c
        }
    };
    guard.insert((n, m), c);
    Ok(c)
}

fn read_cache(path: &PathBuf) -> HashMap<String, f64> {
    std::fs::read_to_string(path)
        .ok()
        .and_then(|s| serde_json::from_str(&s).ok())
        .unwrap_or_default()
}

fn write_cache(path: &PathBuf, map: &HashMap<String, f64>) -> Result<()> {
    let sorted: std::collections::BTreeMap<_, _> = map.iter().collect();
    let text = serde_json::to_string_pretty(&sorted).map_err(|e| Error::Io(e.to_string()))?;
    crate::report::write_atomic(path, text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_order_constants_are_exact() {
        assert_eq!(hessian_constant(2, 2).unwrap(), (2.0 * PI).powi(2));
        assert_eq!(hessian_constant(3, 3).unwrap(), (2.0 * PI).powi(3));
    }

    #[test]
    fn measured_constant_is_memoized() {
        let a = hessian_constant(2, 1).unwrap();
        let b = hessian_constant(2, 1).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert!(a > 0.0);
    }

    #[test]
    fn bad_orders_rejected() {
        assert!(hessian_constant(2, 3).is_err());
        assert!(hessian_constant(1, 1).is_err());
    }
}
