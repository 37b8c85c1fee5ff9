//! TOML config files for experiments, single solves, radius estimates and
//! oracle checks. Unknown keys are rejected. Relative file paths are
//! resolved against the directory of the config file.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{BoxSpec, EvalSpec, ExperimentSpec, GroundTruthSpec, MapErrorMode, OptimizerSpec, StepRule, TargetSpec};
use crate::cost::CostFunction;
use crate::error::{Error, Result};
use crate::measures::{DiscreteTarget, MixtureComponent, SourceMeasure};
use crate::optim::{AdamParams, Variant};
use crate::projection::Compact;

fn cfg_err(section: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("[{section}] {msg}"))
}

fn need<T>(v: Option<T>, section: &str, key: &str, kind: &str) -> Result<T> {
    v.ok_or_else(|| cfg_err(section, format!("kind = {kind:?} requires `{key}`")))
}

fn parse_toml<'de, T: Deserialize<'de>>(text: &'de str) -> Result<T> {
    toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

/// Reads a config file, mapping a missing file to a config error that
/// names the path.
pub fn read_config_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostSection {
    pub kind: String,
    pub p: Option<f64>,
}

impl CostSection {
    pub fn resolve(&self) -> Result<CostFunction> {
        match self.kind.as_str() {
            "quadratic" => Ok(CostFunction::quadratic()),
            "power" => {
                let p = need(self.p, "cost", "p", "power")?;
                CostFunction::power(p).map_err(|e| cfg_err("cost", e))
            }
            k => Err(cfg_err("cost", format!("unknown kind {k:?} (expected quadratic or power)"))),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSection {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub scale: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    pub kind: String,
    pub dim: Option<usize>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub mean: Option<Vec<f64>>,
    pub scale: Option<f64>,
    pub exponent: Option<f64>,
    pub delta: Option<f64>,
    pub components: Option<Vec<ComponentSection>>,
}

impl SourceSection {
    pub fn resolve(&self) -> Result<SourceMeasure> {
        let s = "source";
        let k = self.kind.as_str();
        let m = match k {
            "uniform_cube" => SourceMeasure::uniform_cube(
                need(self.dim, s, "dim", k)?,
                self.lo.unwrap_or(0.0),
                self.hi.unwrap_or(1.0),
            ),
            "gaussian" => SourceMeasure::gaussian(need(self.mean.clone(), s, "mean", k)?, self.scale.unwrap_or(1.0)),
            "heavy_tail" => {
                let dim = need(self.dim, s, "dim", k)?;
                // default (1 + |x|)^-(d+3)
                SourceMeasure::heavy_tail(dim, self.exponent.unwrap_or(dim as f64 + 3.0))
            }
            "sqrt_density" => Ok(SourceMeasure::SqrtDensity1D),
            "perturbed_uniform" => SourceMeasure::perturbed_uniform(need(self.delta, s, "delta", k)?),
            "mixture" => SourceMeasure::mixture(
                need(self.components.as_ref(), s, "components", k)?
                    .iter()
                    .map(|c| MixtureComponent { weight: c.weight, mean: c.mean.clone(), scale: c.scale })
                    .collect(),
            ),
            _ => {
                return Err(cfg_err(
                    s,
                    format!(
                        "unknown kind {k:?} (expected uniform_cube, gaussian, heavy_tail, sqrt_density, perturbed_uniform or mixture)"
                    ),
                ))
            }
        };
        m.map_err(|e| cfg_err(s, e))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSection {
    pub kind: String,
    pub m: Option<usize>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub file: Option<PathBuf>,
    pub points: Option<Vec<Vec<f64>>>,
    pub weights: Option<Vec<f64>>,
}

impl TargetSection {
    fn fixed(&self, base: &Path) -> Result<DiscreteTarget> {
        let s = "target";
        match self.kind.as_str() {
            "file" => {
                let path = base.join(need(self.file.as_ref(), s, "file", "file")?);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| cfg_err(s, format!("cannot read target file {}: {e}", path.display())))?;
                DiscreteTarget::parse(&text).map_err(|e| cfg_err(s, format!("{}: {e}", path.display())))
            }
            "points" => {
                let pts = need(self.points.as_ref(), s, "points", "points")?;
                let d = pts.first().map_or(0, Vec::len);
                if d == 0 || pts.iter().any(|p| p.len() != d) {
                    return Err(cfg_err(s, "points must be nonempty rows of equal length"));
                }
                let flat: Vec<f64> = pts.iter().flatten().copied().collect();
                let w = self.weights.clone().unwrap_or_else(|| vec![1.0; pts.len()]);
                DiscreteTarget::new(flat, d, w).map_err(|e| cfg_err(s, e))
            }
            k => Err(cfg_err(s, format!("kind {k:?} is not a fixed target (expected file or points)"))),
        }
    }

    fn resolve(&self, base: &Path) -> Result<TargetSpec> {
        if self.kind == "uniform_cube" {
            let m = need(self.m, "target", "m", "uniform_cube")?;
            let (lo, hi) = (self.lo.unwrap_or(0.0), self.hi.unwrap_or(1.0));
            if m == 0 || !(lo < hi) {
                return Err(cfg_err("target", "uniform_cube needs m >= 1 and lo < hi"));
            }
            return Ok(TargetSpec::UniformCube { m, lo, hi });
        }
        self.fixed(base).map(TargetSpec::Fixed)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruthSection {
    pub kind: String,
    pub scale: Option<f64>,
    pub n_reference: Option<usize>,
}

impl GroundTruthSection {
    fn resolve(&self) -> Result<GroundTruthSpec> {
        let s = "ground_truth";
        match self.kind.as_str() {
            "random" => Ok(GroundTruthSpec::Random {
                scale: need(self.scale, s, "scale", "random")?,
                n_reference: self.n_reference,
            }),
            "oracle" => Ok(GroundTruthSpec::Oracle1D),
            k => Err(cfg_err(s, format!("unknown kind {k:?} (expected random or oracle)"))),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSection {
    pub kind: String,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub center: Option<Vec<f64>>,
    pub radius: Option<f64>,
    pub delta: Option<f64>,
    pub max_samples: Option<usize>,
}

impl BoxSection {
    pub fn resolve(&self, dim: usize) -> Result<BoxSpec> {
        let s = "box";
        let k = self.kind.as_str();
        Ok(match k {
            "cube" => BoxSpec::Compact(Compact::cube_uniform(dim, need(self.lo, s, "lo", k)?, need(self.hi, s, "hi", k)?)),
            "ball" => BoxSpec::Compact(Compact::Ball {
                center: self.center.clone().unwrap_or_else(|| vec![0.0; dim]),
                radius: need(self.radius, s, "radius", k)?,
            }),
            "source_ball" => BoxSpec::SourceBall,
            "central_interval" => BoxSpec::CentralInterval,
            "estimated" => BoxSpec::Estimated { delta: self.delta.unwrap_or(0.05), max_samples: self.max_samples },
            "radius" => BoxSpec::Radius(need(self.radius, s, "radius", k)?),
            _ => {
                return Err(cfg_err(
                    s,
                    format!("unknown kind {k:?} (expected cube, ball, source_ball, central_interval, estimated or radius)"),
                ))
            }
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Gamma {
    Value(f64),
    Rule(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    pub name: Option<String>,
    pub variant: Option<String>,
    pub gamma1: Option<Gamma>,
    pub b: Option<f64>,
    pub batch: Option<usize>,
    pub iters: u64,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub eps: Option<f64>,
}

impl OptimizerSection {
    pub fn resolve(&self) -> Result<OptimizerSpec> {
        let s = "optimizer";
        let variant = Variant::parse(self.variant.as_deref().unwrap_or("psgd")).map_err(|e| cfg_err(s, e))?;
        let gamma1 = match &self.gamma1 {
            None => StepRule::Diam,
            Some(Gamma::Value(v)) => StepRule::Fixed(*v),
            Some(Gamma::Rule(r)) => match r.as_str() {
                "diam" => StepRule::Diam,
                "general" => StepRule::General,
                _ => return Err(cfg_err(s, format!("gamma1 {r:?}: expected a number, \"diam\" or \"general\""))),
            },
        };
        let b = self.b.unwrap_or(if gamma1 == StepRule::General { 0.5 } else { 0.75 });
        let d = AdamParams::default();
        Ok(OptimizerSpec {
            name: self.name.clone().unwrap_or_else(|| variant.name().to_string()),
            variant,
            gamma1,
            b,
            batch: self.batch.unwrap_or(1),
            iters: self.iters,
            adam: AdamParams {
                beta1: self.beta1.unwrap_or(d.beta1),
                beta2: self.beta2.unwrap_or(d.beta2),
                eps: self.eps.unwrap_or(d.eps),
            },
        })
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct EvalSection {
    pub n_eval: Option<usize>,
    pub p: Option<f64>,
    pub window_decades: Option<f64>,
    pub map_error: Option<String>,
    pub timing: Option<bool>,
}

impl EvalSection {
    fn resolve(&self) -> Result<EvalSpec> {
        let d = EvalSpec::default();
        let map_error = match self.map_error.as_deref() {
            None | Some("mc") => MapErrorMode::MonteCarlo,
            Some("exact") => MapErrorMode::Exact,
            Some(k) => return Err(cfg_err("eval", format!("map_error {k:?}: expected mc or exact"))),
        };
        Ok(EvalSpec {
            n_eval: self.n_eval.unwrap_or(d.n_eval),
            p: self.p.unwrap_or(d.p),
            window_decades: self.window_decades.unwrap_or(d.window_decades),
            map_error,
            timing: self.timing.unwrap_or(d.timing),
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub repeats: Option<usize>,
    pub cost: CostSection,
    pub source: SourceSection,
    pub target: TargetSection,
    pub ground_truth: GroundTruthSection,
    #[serde(rename = "box")]
    pub box_: BoxSection,
    #[serde(default)]
    pub eval: EvalSection,
    pub optimizer: Vec<OptimizerSection>,
}

impl ExperimentFile {
    pub fn parse(text: &str) -> Result<Self> {
        parse_toml(text)
    }

    pub fn resolve(&self, base: &Path) -> Result<ExperimentSpec> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) || self.name == "." || self.name == ".." {
            return Err(Error::Config(format!("name {:?} is not a plain directory name", self.name)));
        }
        let source = self.source.resolve()?;
        Ok(ExperimentSpec {
            name: self.name.clone(),
            seed: self.seed,
            repeats: self.repeats.unwrap_or(10),
            cost: self.cost.resolve()?,
            target: self.target.resolve(base)?,
            ground_truth: self.ground_truth.resolve()?,
            box_spec: self.box_.resolve(source.dim())?,
            eval: self.eval.resolve()?,
            optimizers: self.optimizer.iter().map(OptimizerSection::resolve).collect::<Result<_>>()?,
            source,
        })
    }
}

/// Loads and resolves an experiment config file.
pub fn load_experiment(path: &Path) -> Result<ExperimentSpec> {
    let text = read_config_file(path)?;
    ExperimentFile::parse(&text)?.resolve(path.parent().unwrap_or(Path::new(".")))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveFile {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub timing: bool,
    pub cost: CostSection,
    pub source: SourceSection,
    pub target: TargetSection,
    #[serde(rename = "box")]
    pub box_: BoxSection,
    pub optimizer: OptimizerSection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveSpec {
    pub seed: u64,
    pub timing: bool,
    pub cost: CostFunction,
    pub source: SourceMeasure,
    pub target: DiscreteTarget,
    pub box_spec: BoxSpec,
    pub optimizer: OptimizerSpec,
}

impl SolveFile {
    pub fn resolve(&self, base: &Path) -> Result<SolveSpec> {
        let source = self.source.resolve()?;
        let target = self.target.fixed(base)?;
        if target.dim() != source.dim() {
            return Err(Error::Config(format!(
                "target points are {}-dimensional but the source is {}-dimensional",
                target.dim(),
                source.dim()
            )));
        }
        Ok(SolveSpec {
            seed: self.seed,
            timing: self.timing,
            cost: self.cost.resolve()?,
            box_spec: self.box_.resolve(source.dim())?,
            optimizer: self.optimizer.resolve()?,
            target,
            source,
        })
    }
}

pub fn load_solve(path: &Path) -> Result<SolveSpec> {
    let text = read_config_file(path)?;
    parse_toml::<SolveFile>(&text)?.resolve(path.parent().unwrap_or(Path::new(".")))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadiusFile {
    #[serde(default)]
    pub seed: u64,
    pub w_min: Option<f64>,
    pub delta: f64,
    pub max_samples: Option<usize>,
    pub source: SourceSection,
    pub cost: Option<CostSection>,
    pub target: Option<TargetSection>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadiusSpec {
    pub seed: u64,
    pub w_min: f64,
    pub delta: f64,
    pub max_samples: Option<usize>,
    pub source: SourceMeasure,
    /// Cost and target for the resulting box radius, when given.
    pub problem: Option<(CostFunction, DiscreteTarget)>,
}

impl RadiusFile {
    pub fn resolve(&self, base: &Path) -> Result<RadiusSpec> {
        let source = self.source.resolve()?;
        let target = self.target.as_ref().map(|t| t.fixed(base)).transpose()?;
        let w_min = match (self.w_min, &target) {
            (Some(w), _) => w,
            (None, Some(t)) => t.min_weight(),
            (None, None) => return Err(Error::Config("w_min is required when no target is given".into())),
        };
        if !(w_min > 0.0 && w_min <= 1.0) {
            return Err(Error::Config(format!("w_min must be in (0, 1], got {w_min}")));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!("delta must be in (0, 1), got {}", self.delta)));
        }
        let problem = match (&self.cost, target) {
            (Some(c), Some(t)) => {
                if t.dim() != source.dim() {
                    return Err(Error::Config("target and source dimensions differ".into()));
                }
                Some((c.resolve()?, t))
            }
            (None, None) => None,
            _ => return Err(Error::Config("give both [cost] and [target] for a box radius, or neither".into())),
        };
        Ok(RadiusSpec { seed: self.seed, w_min, delta: self.delta, max_samples: self.max_samples, source, problem })
    }
}

pub fn load_radius(path: &Path) -> Result<RadiusSpec> {
    let text = read_config_file(path)?;
    parse_toml::<RadiusFile>(&text)?.resolve(path.parent().unwrap_or(Path::new(".")))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbSection {
    pub index: usize,
    pub amount: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleCheckFile {
    #[serde(default)]
    pub seed: u64,
    pub n_mc: Option<usize>,
    pub source: SourceSection,
    pub target: TargetSection,
    pub perturb: Option<PerturbSection>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheckSpec {
    pub seed: u64,
    pub n_mc: usize,
    pub source: SourceMeasure,
    pub target: DiscreteTarget,
    /// Added to one coordinate of `g*` before checking (negative control).
    pub perturb: Option<(usize, f64)>,
}

impl OracleCheckFile {
    pub fn resolve(&self, base: &Path) -> Result<OracleCheckSpec> {
        let source = self.source.resolve()?;
        if source.dim() != 1 {
            return Err(Error::Config("oracle checks need a 1-D source".into()));
        }
        let target = self.target.fixed(base)?;
        if target.dim() != 1 {
            return Err(Error::Config("oracle checks need a 1-D target".into()));
        }
        let perturb = self.perturb.as_ref().map(|p| (p.index, p.amount));
        if let Some((i, _)) = perturb {
            if i >= target.len() {
                return Err(Error::Config(format!("perturb.index {i} is out of range for M = {}", target.len())));
            }
        }
        Ok(OracleCheckSpec { seed: self.seed, n_mc: self.n_mc.unwrap_or(100_000), source, target, perturb })
    }
}

pub fn load_oracle_check(path: &Path) -> Result<OracleCheckSpec> {
    let text = read_config_file(path)?;
    parse_toml::<OracleCheckFile>(&text)?.resolve(path.parent().unwrap_or(Path::new(".")))
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
name = "ex"
seed = 7
repeats = 3

[cost]
kind = "power"
p = 1.5

[source]
kind = "uniform_cube"
dim = 10

[target]
kind = "uniform_cube"
m = 20

[ground_truth]
kind = "random"
scale = 0.1
n_reference = 1_000_000

[box]
kind = "cube"
lo = 0.0
hi = 1.0

[eval]
n_eval = 1000

[[optimizer]]
name = "psgd"
iters = 1000

[[optimizer]]
name = "sadam"
variant = "s-adam"
gamma1 = 0.5
iters = 1000
"#;

    #[test]
    fn experiment_round_trip() {
        let spec = ExperimentFile::parse(EXAMPLE).unwrap().resolve(Path::new(".")).unwrap();
        assert_eq!(spec.seed, 7);
        assert_eq!(spec.cost.p(), 1.5);
        assert_eq!(spec.source.dim(), 10);
        assert_eq!(spec.optimizers.len(), 2);
        assert_eq!(spec.optimizers[0].gamma1, StepRule::Diam);
        assert_eq!(spec.optimizers[0].b, 0.75);
        assert_eq!(spec.optimizers[1].variant, Variant::SAdamProjected);
        assert_eq!(spec.optimizers[1].gamma1, StepRule::Fixed(0.5));
        assert_eq!(spec.ground_truth, GroundTruthSpec::Random { scale: 0.1, n_reference: Some(1_000_000) });
        assert!(spec.warnings().is_empty());
        assert_eq!(spec.noise_floor(), 25.0 * 20.0 / 1e6);
    }

    #[test]
    fn unknown_keys_are_errors() {
        let bad = EXAMPLE.replace("n_eval = 1000", "n_eval = 1000\nn_evals = 3");
        assert!(matches!(ExperimentFile::parse(&bad), Err(Error::Config(_))));
        let bad = EXAMPLE.replace("kind = \"power\"", "kind = \"cubic\"");
        let e = ExperimentFile::parse(&bad).unwrap().resolve(Path::new(".")).unwrap_err();
        assert!(e.to_string().contains("cubic"));
    }

    #[test]
    fn floats_parse_bit_exact() {
        let text = EXAMPLE.replace("scale = 0.1", "scale = 0.30000000000000004");
        let spec = ExperimentFile::parse(&text).unwrap().resolve(Path::new(".")).unwrap();
        match spec.ground_truth {
            GroundTruthSpec::Random { scale, .. } => assert_eq!(scale.to_bits(), (0.1f64 + 0.2).to_bits()),
            _ => unreachable!(),
        }
    }

    #[test]
    fn missing_target_file_names_the_path() {
        let text = r#"
[cost]
kind = "quadratic"
[source]
kind = "sqrt_density"
[target]
kind = "file"
file = "no/such/target.txt"
[box]
kind = "radius"
radius = 1.0
[optimizer]
iters = 10
"#;
        let e = parse_toml::<SolveFile>(text).unwrap().resolve(Path::new("/tmp")).unwrap_err();
        assert!(matches!(e, Error::Config(_)));
        assert!(e.to_string().contains("/tmp/no/such/target.txt"), "{e}");
    }

    #[test]
    fn radius_and_oracle_configs() {
        let r: RadiusFile = parse_toml("delta = 0.1\nw_min = 0.2\n[source]\nkind = \"gaussian\"\nmean = [0.0]\n").unwrap();
        let spec = r.resolve(Path::new(".")).unwrap();
        assert_eq!(spec.w_min, 0.2);
        assert!(spec.problem.is_none());
        let bad: RadiusFile = parse_toml("delta = 1.5\nw_min = 0.2\n[source]\nkind = \"sqrt_density\"\n").unwrap();
        assert!(bad.resolve(Path::new(".")).is_err());

        let o: OracleCheckFile = parse_toml(
            "[source]\nkind = \"gaussian\"\nmean = [0.3]\n[target]\nkind = \"points\"\npoints = [[0.0], [1.0]]\n[perturb]\nindex = 1\namount = 0.1\n",
        )
        .unwrap();
        let spec = o.resolve(Path::new(".")).unwrap();
        assert_eq!(spec.target.weights(), &[0.5, 0.5]);
        assert_eq!(spec.perturb, Some((1, 0.1)));
    }
}
