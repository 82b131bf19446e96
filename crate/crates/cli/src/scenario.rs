use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use hessmetric::reparam::reparameterize;
use hessmetric::{Coordinate, HessianParams, RadialProfile};

/// A profile as written in a scenario file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    /// Defaults to the order-`m` coordinate of the scenario.
    pub coordinate: Option<Coordinate>,
    pub breakpoints: Option<Vec<f64>>,
    pub slopes: Option<Vec<f64>>,
    /// Shorthand for `max(slope * tau, level)`.
    pub kink: Option<KinkSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KinkSpec {
    pub slope: f64,
    pub level: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Counts {
    pub core: Option<usize>,
    pub measure: Option<usize>,
    pub metric: Option<usize>,
    pub envelope: Option<usize>,
    pub energy: Option<usize>,
    pub oracle: Option<usize>,
    pub geodesic_kinks: Option<usize>,
    pub geodesic_smooth: Option<usize>,
}

/// Raw scenario file. Every field is optional so that `{}` is a valid scenario.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub n: Option<usize>,
    pub m: Option<usize>,
    #[serde(default)]
    pub profiles: BTreeMap<String, ProfileSpec>,
    /// Name of the weight profile; the zero profile when absent.
    pub weight: Option<String>,
    /// Pairs of profile names; all unordered pairs when absent.
    pub pairs: Option<Vec<(String, String)>>,
    /// Samples in `[0, 1]` for segment and geodesic reports.
    pub ts: Option<Vec<f64>>,
    pub eps: Option<f64>,
    pub k_radius: Option<f64>,
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub counts: Counts,
}

/// A scenario with every reference resolved.
#[derive(Debug)]
pub struct Scenario {
    pub params: HessianParams,
    /// Profiles in the order-`m` coordinate.
    pub profiles: BTreeMap<String, RadialProfile>,
    /// Profiles in the coordinate they were written in.
    pub declared: BTreeMap<String, RadialProfile>,
    pub weight: RadialProfile,
    pub weight_name: String,
    pub pairs: Vec<(String, String)>,
    pub ts: Vec<f64>,
    pub eps: f64,
    pub k_radius: f64,
    pub tolerance: Option<f64>,
    pub counts: Counts,
}

impl Scenario {
    pub fn profile(&self, name: &str) -> &RadialProfile {
        &self.profiles[name]
    }

    pub fn declared(&self, name: &str) -> &RadialProfile {
        &self.declared[name]
    }
}

/// Parses scenario text; syntax and type errors carry the line, column and field path.
///
/// Profiles written in a coordinate of higher order are resampled into the order-`m` one with
/// `resolution` radii.
pub fn parse(text: &str, origin: &str, resolution: usize) -> Result<Scenario> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: ScenarioFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let inner = e.inner();
        let path = e.path().to_string();
        let field = if path == "." { String::new() } else { format!(" at field `{path}`") };
        anyhow!("{origin}:{}:{}{field}: {inner}", inner.line(), inner.column())
    })?;
    resolve(raw, origin, resolution)
}

pub fn load(path: &Path, resolution: usize) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read scenario {}", path.display()))?;
    parse(&text, &path.display().to_string(), resolution)
}

/// The scenario used when no file is given.
pub fn empty() -> Result<Scenario> {
    resolve(ScenarioFile::default(), "<empty scenario>", hessmetric::geodesic::DEFAULT_RESOLUTION)
}

fn build_profile(spec: &ProfileSpec, default: Coordinate) -> std::result::Result<RadialProfile, String> {
    let coordinate = match spec.coordinate {
        Some(c) => Coordinate::new(c.n, c.q).map_err(|e| e.to_string())?,
        None => default,
    };
    match (&spec.kink, &spec.breakpoints, &spec.slopes) {
        (Some(k), None, None) => RadialProfile::kink(coordinate, k.slope, k.level).map_err(|e| e.to_string()),
        (None, Some(b), Some(s)) => RadialProfile::new(coordinate, b.clone(), s.clone()).map_err(|e| e.to_string()),
        (None, None, Some(s)) if s.len() == 1 => RadialProfile::new(coordinate, vec![], s.clone()).map_err(|e| e.to_string()),
        _ => Err("give either `kink` or both `breakpoints` and `slopes`".into()),
    }
}

fn resolve(raw: ScenarioFile, origin: &str, resolution: usize) -> Result<Scenario> {
    let n = raw.n.unwrap_or(2);
    let m = raw.m.unwrap_or(n);
    let params = HessianParams::new(n, m).map_err(|e| anyhow!("{origin}: fields `n`, `m`: {e}"))?;
    let mut profiles = BTreeMap::new();
    let mut declared = BTreeMap::new();
    for (name, spec) in &raw.profiles {
        let g = build_profile(spec, params.coordinate()).map_err(|e| anyhow!("{origin}: field `profiles.{name}`: {e}"))?;
        let c = g.coordinate();
        if c.n != n || c.q < m {
            bail!("{origin}: field `profiles.{name}.coordinate`: order {} in dimension {} does not fit n = {n}, m = {m}", c.q, c.n);
        }
        let native = if c.q == m { g.clone() } else { reparameterize(&g, m, resolution).map_err(|e| anyhow!("{origin}: field `profiles.{name}`: {e}"))? };
        profiles.insert(name.clone(), native);
        declared.insert(name.clone(), g);
    }
    let known = |name: &str, field: &str| -> Result<()> {
        if profiles.contains_key(name) {
            Ok(())
        } else {
            bail!("{origin}: field `{field}`: unknown profile `{name}`")
        }
    };
    let (weight, weight_name) = match &raw.weight {
        Some(name) => {
            known(name, "weight")?;
            (profiles[name].clone(), name.clone())
        }
        None => (RadialProfile::zero(params.coordinate()), "0".to_string()),
    };
    let pairs = match raw.pairs {
        Some(pairs) => {
            for (k, (a, b)) in pairs.iter().enumerate() {
                known(a, &format!("pairs[{k}][0]"))?;
                known(b, &format!("pairs[{k}][1]"))?;
            }
            pairs
        }
        None => {
            let names: Vec<&String> = profiles.keys().collect();
            let mut all = Vec::new();
            for (i, a) in names.iter().enumerate() {
                for b in &names[i + 1..] {
                    all.push(((*a).clone(), (*b).clone()));
                }
            }
            all
        }
    };
    let ts = raw.ts.unwrap_or_else(|| hessmetric::geodesic::uniform_samples(21));
    if let Some(t) = ts.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        bail!("{origin}: field `ts`: sample {t} outside [0, 1]");
    }
    let positive = |value: Option<f64>, field: &str, default: f64| -> Result<f64> {
        match value {
            Some(x) if !(x > 0.0) => bail!("{origin}: field `{field}`: must be positive, got {x}"),
            Some(x) => Ok(x),
            None => Ok(default),
        }
    };
    let eps = positive(raw.eps, "eps", 0.05)?;
    let k_radius = positive(raw.k_radius, "k_radius", 0.5)?;
    if k_radius >= 1.0 {
        bail!("{origin}: field `k_radius`: must lie in (0, 1), got {k_radius}");
    }
    let tolerance = raw.tolerance.map(|t| positive(Some(t), "tolerance", t)).transpose()?;
    Ok(Scenario { params, profiles, declared, weight, weight_name, pairs, ts, eps, k_radius, tolerance, counts: raw.counts })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_a_scenario() {
        let s = parse("{}", "t", 256).unwrap();
        assert_eq!(s.params.n(), 2);
        assert!(s.profiles.is_empty());
        assert_eq!(s.ts.len(), 21);
    }

    #[test]
    fn syntax_error_reports_line_and_column() {
        let err = parse("{\n  \"n\": 2,\n  \"m\": ,\n}", "bad.json", 256).unwrap_err().to_string();
        assert!(err.starts_with("bad.json:3:8"), "{err}");
    }

    #[test]
    fn type_error_reports_field() {
        let err = parse("{\"profiles\": {\"u\": {\"kink\": {\"slope\": \"x\", \"level\": -1}}}}", "s", 256).unwrap_err().to_string();
        assert!(err.contains("profiles.u.kink.slope"), "{err}");
    }

    #[test]
    fn unknown_reference_is_rejected() {
        let err = parse("{\"weight\": \"w\"}", "s", 256).unwrap_err().to_string();
        assert!(err.contains("unknown profile `w`"), "{err}");
    }

    #[test]
    fn higher_order_profiles_are_resampled() {
        let text = r#"{"n": 2, "m": 1, "profiles": {"u": {"coordinate": {"n": 2, "q": 2}, "kink": {"slope": 1, "level": -1}}}}"#;
        let s = parse(text, "s", 256).unwrap();
        assert_eq!(s.declared("u").coordinate().q, 2);
        assert_eq!(s.profile("u").coordinate().q, 1);
    }

    #[test]
    fn invalid_coordinate_is_rejected() {
        let text = r#"{"n": 2, "profiles": {"u": {"coordinate": {"n": 2, "q": 3}, "kink": {"slope": 1, "level": -1}}}}"#;
        assert!(parse(text, "s", 256).unwrap_err().to_string().contains("profiles.u"));
    }

    #[test]
    fn nonconvex_profile_names_the_field() {
        let text = r#"{"profiles": {"u": {"breakpoints": [-1, -0.5], "slopes": [0, 2, 1]}}}"#;
        let err = parse(text, "s", 256).unwrap_err().to_string();
        assert!(err.contains("profiles.u"), "{err}");
    }
}
