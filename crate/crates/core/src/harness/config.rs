//! JSON experiment configuration with up-front validation.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::grid::TorusGrid;
use crate::norms::{check_exponent, deserialize_extended, serialize_extended, NormParams, Space, WeightKind};

use super::catalog::{default_specs, FunctionSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    PartitionCheck,
    RetractCheck,
    Norm,
    EmbedSweep,
    InterpVerify,
    BernsteinSweep,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::PartitionCheck,
        Suite::RetractCheck,
        Suite::Norm,
        Suite::EmbedSweep,
        Suite::InterpVerify,
        Suite::BernsteinSweep,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::PartitionCheck => "partition-check",
            Suite::RetractCheck => "retract-check",
            Suite::Norm => "norm",
            Suite::EmbedSweep => "embed-sweep",
            Suite::InterpVerify => "interp-verify",
            Suite::BernsteinSweep => "bernstein-sweep",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite {s}")))
    }
}

/// Exponent in `[1, ∞]`; JSON accepts numbers and `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Exponent(pub f64);

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        serialize_extended(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        deserialize_extended(d).map(Exponent)
    }
}

fn inf() -> Exponent {
    Exponent(f64::INFINITY)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub d: usize,
    #[serde(rename = "P")]
    pub periods: u32,
    #[serde(rename = "N")]
    pub samples: usize,
}

impl GridConfig {
    pub fn grid(&self) -> Result<TorusGrid> {
        TorusGrid::new(self.d, self.periods, self.samples).map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionConfig {
    #[serde(rename = "K")]
    pub truncation: u32,
    #[serde(rename = "J")]
    pub top: u32,
    #[serde(default)]
    pub bump_radius: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PartitionCheckParams {
    pub tolerance: f64,
}

impl Default for PartitionCheckParams {
    fn default() -> Self {
        Self { tolerance: 1e-12 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RetractCheckParams {
    pub tolerance: f64,
    /// Random synthesis orders per function.
    pub permutations: usize,
    pub order_tolerance: f64,
    pub extended_tolerance: f64,
    /// Bump radius of the re-splitting partition in units of `√d`.
    pub resplit_radius: f64,
}

impl Default for RetractCheckParams {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            permutations: 3,
            order_tolerance: 1e-12,
            extended_tolerance: 1e-11,
            resplit_radius: 2.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormSuiteParams {
    pub spaces: Vec<Space>,
    pub p: Vec<Exponent>,
    pub q: Vec<Exponent>,
    pub s: Vec<f64>,
}

impl Default for NormSuiteParams {
    fn default() -> Self {
        Self {
            spaces: vec![Space::B, Space::M, Space::E],
            p: vec![Exponent(1.0), Exponent(2.0), inf()],
            q: vec![Exponent(1.0), Exponent(2.0), inf()],
            s: vec![0.0, 0.5, 1.0],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QsCase {
    pub s0: f64,
    pub s1: f64,
    pub q0: Exponent,
    pub q1: Exponent,
    pub p: Exponent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmbedSweepParams {
    pub p_pairs: Vec<(Exponent, Exponent)>,
    pub s: Vec<f64>,
    pub q: Vec<Exponent>,
    pub qs_cases: Vec<QsCase>,
    /// Repeat the `p` sweep on the `(2N, P)` and `(2N, 2P)` grids.
    pub refine: bool,
    pub stability: f64,
    pub qs_tolerance: f64,
}

impl Default for EmbedSweepParams {
    fn default() -> Self {
        let e = Exponent;
        let qs = |s0, s1, q0: f64, q1: f64, p: f64| QsCase {
            s0,
            s1,
            q0: e(q0),
            q1: e(q1),
            p: e(p),
        };
        Self {
            p_pairs: vec![(e(1.0), e(2.0)), (e(1.0), inf()), (e(2.0), e(4.0)), (e(2.0), inf()), (e(2.0), e(2.0))],
            s: vec![0.0, 1.0],
            q: vec![e(1.0), e(2.0)],
            qs_cases: vec![
                qs(1.0, 0.0, 2.0, 2.0, 2.0),
                qs(1.0, 1.0, 1.0, f64::INFINITY, 2.0),
                qs(0.5, -0.5, 1.0, 2.0, 1.0),
                qs(2.0, 0.0, 1.0, f64::INFINITY, f64::INFINITY),
                qs(0.0, 0.0, 2.0, 4.0, 4.0),
                qs(1.0, 1.0, 2.0, 2.0, 2.0),
            ],
            refine: true,
            stability: 0.05,
            qs_tolerance: 1e-12,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointConfig {
    pub p: Exponent,
    pub q: Exponent,
    pub s: f64,
}

impl EndpointConfig {
    pub fn params(&self, weight: WeightKind) -> Result<NormParams> {
        NormParams::new(self.p.0, self.q.0, self.s, weight).map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterpCase {
    pub theta: f64,
    pub end0: EndpointConfig,
    pub end1: EndpointConfig,
}

fn case(theta: f64, a: (f64, f64, f64), b: (f64, f64, f64)) -> InterpCase {
    let ep = |(p, q, s): (f64, f64, f64)| EndpointConfig {
        p: Exponent(p),
        q: Exponent(q),
        s,
    };
    InterpCase {
        theta,
        end0: ep(a),
        end1: ep(b),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InterpVerifyParams {
    /// Parameter triples for the sequence-space certificates.
    pub cases: Vec<InterpCase>,
    pub weights: Vec<WeightKind>,
    pub elements_per_case: usize,
    pub element_indices: usize,
    pub element_radius: i32,
    pub element_cells: usize,
    pub perturbations: usize,
    pub upper_tolerance: f64,
    pub lower_tolerance: f64,
    /// Parameter triples for the log-convexity ratios over the catalog.
    pub log_convexity: Vec<InterpCase>,
    pub log_convexity_bound: f64,
    /// Certify the analysis sequences of catalog functions (`d = 1` only).
    pub sequence_side: bool,
}

impl Default for InterpVerifyParams {
    fn default() -> Self {
        let inf = f64::INFINITY;
        Self {
            cases: vec![
                case(0.5, (1.0, 1.0, 0.0), (inf, inf, 0.0)),
                case(0.5, (2.0, 2.0, 0.0), (2.0, 2.0, 2.0)),
                case(0.3, (1.0, 2.0, 0.5), (4.0, 1.0, -1.0)),
                case(0.25, (2.0, 1.0, -1.0), (3.0, inf, 2.0)),
                case(0.7, (inf, 2.0, 0.5), (inf, 3.0, -0.5)),
                case(0.6, (1.5, 3.0, 1.0), (6.0, 1.5, 0.0)),
            ],
            weights: vec![WeightKind::Exponential, WeightKind::Polynomial],
            elements_per_case: 5,
            element_indices: 6,
            element_radius: 4,
            element_cells: 3,
            perturbations: 32,
            upper_tolerance: 1e-10,
            lower_tolerance: 1e-6,
            log_convexity: vec![
                case(0.5, (1.0, 1.0, 0.0), (2.0, 2.0, 1.0)),
                case(0.25, (2.0, 1.0, 0.0), (inf, 2.0, 1.0)),
                case(0.5, (1.0, 2.0, 1.0), (4.0, inf, -1.0)),
                case(0.3, (2.0, 2.0, 0.5), (2.0, 4.0, 1.5)),
                case(0.8, (1.5, 1.0, -0.5), (3.0, 3.0, 0.5)),
                case(0.5, (inf, 1.0, 0.0), (1.0, 2.0, 1.0)),
                case(0.4, (2.0, 2.0, 1.0), (2.0, 2.0, 1.0)),
                case(0.5, (inf, inf, 0.5), (inf, inf, 0.5)),
            ],
            log_convexity_bound: 1.0 + 1e-12,
            sequence_side: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BernsteinSweepParams {
    pub centers: Vec<Vec<i32>>,
    pub p_pairs: Vec<(Exponent, Exponent)>,
    /// Also sweep the nonzero pieces of the catalog functions.
    pub catalog_pieces: bool,
    pub refine: bool,
    pub stability: f64,
    pub invariance_tolerance: f64,
}

impl Default for BernsteinSweepParams {
    fn default() -> Self {
        let e = Exponent;
        Self {
            centers: Vec::new(),
            p_pairs: vec![(e(1.0), e(2.0)), (e(1.0), e(4.0)), (e(1.0), inf()), (e(2.0), inf()), (e(4.0), inf())],
            catalog_pieces: true,
            refine: true,
            stability: 0.05,
            invariance_tolerance: 1e-10,
        }
    }
}

/// Twelve centres spread over the cube `|k|_∞ <= 6`.
pub fn default_centers(dim: usize) -> Vec<Vec<i32>> {
    let base: [i32; 12] = [0, 1, -1, 2, -3, 4, -4, 5, -5, 6, 3, -6];
    (0..12)
        .map(|i| (0..dim).map(|a| base[(i + 5 * a) % 12]).collect())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub suite: Option<Suite>,
    pub grid: GridConfig,
    pub partition: PartitionConfig,
    /// Names from the default catalog; absent means all of them.
    #[serde(default)]
    pub catalog: Option<Vec<String>>,
    #[serde(default)]
    pub extra_functions: Vec<FunctionSpec>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub partition_check: PartitionCheckParams,
    #[serde(default)]
    pub retract_check: RetractCheckParams,
    #[serde(default)]
    pub norm: NormSuiteParams,
    #[serde(default)]
    pub embed_sweep: EmbedSweepParams,
    #[serde(default)]
    pub interp_verify: InterpVerifyParams,
    #[serde(default)]
    pub bernstein_sweep: BernsteinSweepParams,
}

impl ExperimentConfig {
    /// Desk-scale defaults: `d = 1` uses `N = 2048, P = 16, K = 12, J = 4`,
    /// `d = 2` uses `N = 192, P = 5, K = 10, J = 3`.
    pub fn desk(dim: usize) -> Result<Self> {
        let (grid, partition) = match dim {
            1 => (
                GridConfig {
                    d: 1,
                    periods: 16,
                    samples: 2048,
                },
                PartitionConfig {
                    truncation: 12,
                    top: 4,
                    bump_radius: None,
                },
            ),
            2 => (
                GridConfig {
                    d: 2,
                    periods: 5,
                    samples: 192,
                },
                PartitionConfig {
                    truncation: 10,
                    top: 3,
                    bump_radius: None,
                },
            ),
            _ => return Err(Error::Config(format!("no desk defaults for d = {dim}"))),
        };
        Ok(Self {
            suite: None,
            grid,
            partition,
            catalog: None,
            extra_functions: Vec::new(),
            seed: 0,
            output: None,
            workers: None,
            partition_check: Default::default(),
            retract_check: Default::default(),
            norm: Default::default(),
            embed_sweep: Default::default(),
            interp_verify: Default::default(),
            bernstein_sweep: Default::default(),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Specs selected by `catalog` plus `extra_functions`.
    pub fn function_specs(&self) -> Result<Vec<FunctionSpec>> {
        let defaults = default_specs(self.grid.d);
        let mut out = match &self.catalog {
            None => defaults,
            Some(names) => names
                .iter()
                .map(|n| {
                    defaults
                        .iter()
                        .find(|s| s.name() == n)
                        .cloned()
                        .ok_or_else(|| Error::Config(format!("unknown catalog function {n}")))
                })
                .collect::<Result<Vec<_>>>()?,
        };
        out.extend(self.extra_functions.iter().cloned());
        let mut names: Vec<&str> = out.iter().map(|s| s.name()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("duplicate catalog function names".into()));
        }
        Ok(out)
    }

    /// Parameter checks that need no computation beyond building the grid.
    pub fn validate(&self, suite: Suite) -> Result<()> {
        let cfg = |e: Error| Error::Config(e.to_string());
        if let Some(s) = self.suite {
            if s != suite {
                return Err(Error::Config(format!("config is for suite {s}, not {suite}")));
            }
        }
        let grid = self.grid.grid()?;
        self.function_specs()?;
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be positive".into()));
        }
        let exps = |list: &[Exponent]| list.iter().try_for_each(|e| check_exponent("p", e.0).map_err(cfg));
        match suite {
            Suite::PartitionCheck | Suite::RetractCheck => {}
            Suite::Norm => {
                exps(&self.norm.p)?;
                exps(&self.norm.q)?;
                if self.norm.s.iter().any(|s| !s.is_finite()) {
                    return Err(Error::Config("smoothness values must be finite".into()));
                }
            }
            Suite::EmbedSweep => {
                let p = &self.embed_sweep;
                for (a, b) in &p.p_pairs {
                    exps(&[*a, *b])?;
                    if a.0 > b.0 {
                        return Err(Error::Config(format!("p pair ({}, {}) is decreasing", a.0, b.0)));
                    }
                }
                exps(&p.q)?;
                for c in &p.qs_cases {
                    exps(&[c.q0, c.q1, c.p])?;
                    if c.s1 > c.s0 || c.q0.0 > c.q1.0 {
                        return Err(Error::Config(format!("case {c:?} needs s1 <= s0 and q0 <= q1")));
                    }
                }
            }
            Suite::InterpVerify => {
                let p = &self.interp_verify;
                for c in p.cases.iter().chain(&p.log_convexity) {
                    if !(c.theta > 0.0 && c.theta < 1.0) {
                        return Err(Error::Config(format!("theta {} outside (0, 1)", c.theta)));
                    }
                    c.end0.params(WeightKind::Exponential)?;
                    c.end1.params(WeightKind::Exponential)?;
                }
                for c in &p.cases {
                    if c.end0.q.0.is_infinite() && c.end1.q.0.is_infinite() {
                        return Err(Error::Config("certificate cases need min(q0, q1) < inf".into()));
                    }
                }
                for c in &p.log_convexity {
                    if c.end0.q.0.is_infinite() && c.end0 != c.end1 {
                        return Err(Error::Config("log-convexity cases need q0 < inf".into()));
                    }
                }
                if p.element_indices == 0 || p.element_cells == 0 {
                    return Err(Error::Config("random elements need indices and cells".into()));
                }
                let side = (2 * p.element_radius.max(0) + 1) as usize;
                if p.element_indices > side.pow(grid.dim() as u32) {
                    return Err(Error::Config("element_indices exceeds the index cube".into()));
                }
            }
            Suite::BernsteinSweep => {
                let p = &self.bernstein_sweep;
                for (a, b) in &p.p_pairs {
                    exps(&[*a, *b])?;
                    if a.0 > b.0 {
                        return Err(Error::Config(format!("p pair ({}, {}) is decreasing", a.0, b.0)));
                    }
                }
                for c in &p.centers {
                    if c.len() != grid.dim() {
                        return Err(Error::Config(format!("center {c:?} has the wrong dimension")));
                    }
                    if c.iter().any(|v| v.unsigned_abs() > self.partition.truncation) {
                        return Err(Error::Config(format!("center {c:?} lies outside the family")));
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let text = r#"{"grid": {"d": 1, "P": 4, "N": 128}, "partition": {"K": 8, "J": 2}}"#;
        let c = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(c.retract_check, RetractCheckParams::default());
        assert_eq!(c.function_specs().unwrap().len(), 14);
        c.validate(Suite::PartitionCheck).unwrap();
    }

    #[test]
    fn unknown_fields_and_bad_values_are_rejected() {
        let bad = r#"{"grid": {"d": 1, "P": 4, "N": 128}, "partition": {"K": 8, "J": 2}, "colour": 1}"#;
        assert!(matches!(ExperimentConfig::from_json(bad), Err(Error::Config(_))));
        let mut c = ExperimentConfig::desk(1).unwrap();
        c.norm.p = vec![Exponent(0.5)];
        assert!(c.validate(Suite::Norm).is_err());
        assert!(c.validate(Suite::PartitionCheck).is_ok());
        c.suite = Some(Suite::Norm);
        assert!(c.validate(Suite::PartitionCheck).is_err());

        let mut c = ExperimentConfig::desk(1).unwrap();
        c.catalog = Some(vec!["nope".into()]);
        assert!(c.validate(Suite::RetractCheck).is_err());
        let mut c = ExperimentConfig::desk(2).unwrap();
        c.bernstein_sweep.centers = vec![vec![1]];
        assert!(c.validate(Suite::BernsteinSweep).is_err());
        let mut c = ExperimentConfig::desk(1).unwrap();
        c.interp_verify.cases[0] = case(1.0, (1.0, 1.0, 0.0), (2.0, 2.0, 0.0));
        assert!(c.validate(Suite::InterpVerify).is_err());
    }

    #[test]
    fn exponents_accept_inf() {
        let e: Vec<Exponent> = serde_json::from_str(r#"[1, 2.5, "inf"]"#).unwrap();
        assert_eq!(e[2].0, f64::INFINITY);
        assert_eq!(serde_json::to_string(&e).unwrap(), r#"[1.0,2.5,"inf"]"#);
        let full = serde_json::to_string(&ExperimentConfig::desk(2).unwrap()).unwrap();
        assert_eq!(ExperimentConfig::from_json(&full).unwrap(), ExperimentConfig::desk(2).unwrap());
    }

    #[test]
    fn suite_names() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("other".parse::<Suite>().is_err());
        assert_eq!(default_centers(2).len(), 12);
        let mut c = default_centers(1);
        c.sort();
        c.dedup();
        assert_eq!(c.len(), 12);
    }
}
