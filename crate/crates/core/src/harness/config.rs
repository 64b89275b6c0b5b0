use super::targets::TargetFunction;
use crate::basis::BasisFamily;
use crate::error::{Error, Result};
use crate::lsq::{PlanRule, SamplingPlan, ScalingKind, ScalingRule, Solver};
use crate::multiindex::SpaceKind;
use crate::sampling::{derive_trial_seed, Distribution, MappingSpec};
use crate::uqmodels::{EllipticCoefficient, OdeSolveMode};

/// Default effective-support radius for the Laguerre/Gamma study: `e^{-y}`
/// drops below `2^{-52}` at `y = 52 ln 2`.
pub const ODE_DEFAULT_RADIUS: f64 = 36.043_653_389_117_15;

/// Stream index for the evaluation grid of convergence runs.
const EVAL_STREAM: u64 = u64::MAX - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    Condnum,
    Converge,
    UqOde,
    UqElliptic,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Condnum => "condnum",
            ExperimentKind::Converge => "converge",
            ExperimentKind::UqOde => "uq-ode",
            ExperimentKind::UqElliptic => "uq-elliptic",
        }
    }
}

impl std::str::FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "condnum" => Ok(ExperimentKind::Condnum),
            "converge" => Ok(ExperimentKind::Converge),
            "uq-ode" => Ok(ExperimentKind::UqOde),
            "uq-elliptic" => Ok(ExperimentKind::UqElliptic),
            other => Err(Error::Parameter(format!("unknown experiment '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistKind {
    Gaussian,
    Exponential,
    UniformSym,
    UniformPos,
    Mapped,
}

impl DistKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DistKind::Gaussian => "gaussian",
            DistKind::Exponential => "exponential",
            DistKind::UniformSym => "uniform-sym",
            DistKind::UniformPos => "uniform-pos",
            DistKind::Mapped => "mapped",
        }
    }
}

impl std::str::FromStr for DistKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(DistKind::Gaussian),
            "exponential" => Ok(DistKind::Exponential),
            "uniform-sym" => Ok(DistKind::UniformSym),
            "uniform-pos" => Ok(DistKind::UniformPos),
            "mapped" => Ok(DistKind::Mapped),
            other => Err(Error::Parameter(format!("unknown distribution '{other}'"))),
        }
    }
}

/// Full description of a sweep over `q = q_min..=q_max`.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub family: BasisFamily,
    pub space: SpaceKind,
    pub dim: usize,
    pub q_min: u32,
    pub q_max: u32,
    pub plan: SamplingPlan,
    pub dist: DistKind,
    pub map_r: u8,
    pub l: f64,
    pub scaling: ScalingRule,
    pub reps: usize,
    pub seed: u64,
    pub target: Option<TargetFunction>,
    pub solver: Solver,
    pub n_eval: usize,
    pub eval_seed: Option<u64>,
    pub beta: f64,
    pub t: f64,
    pub ode_mode: OdeSolveMode,
    pub coefficient: EllipticCoefficient,
    pub x0: f64,
    pub n_elems: usize,
    pub ref_nodes: usize,
}

impl ExperimentConfig {
    /// Defaults for each experiment kind.
    pub fn new(kind: ExperimentKind) -> Self {
        let base = Self {
            kind,
            family: BasisFamily::HermiteFunc,
            space: SpaceKind::TotalDegree,
            dim: 1,
            q_min: 0,
            q_max: 10,
            plan: SamplingPlan {
                rule: PlanRule::Linear,
                c: 6.0,
            },
            dist: DistKind::Mapped,
            map_r: 0,
            l: 8.0,
            scaling: ScalingRule::none(),
            reps: 100,
            seed: 0,
            target: None,
            solver: Solver::Qr,
            n_eval: crate::lsq::DEFAULT_EVAL_POINTS,
            eval_seed: None,
            beta: 1.5,
            t: 1.0,
            ode_mode: OdeSolveMode::Analytic,
            coefficient: EllipticCoefficient::ThreeParamLognormal,
            x0: 0.25,
            n_elems: 256,
            ref_nodes: 25,
        };
        match kind {
            ExperimentKind::Condnum => base,
            ExperimentKind::Converge => Self {
                plan: SamplingPlan {
                    rule: PlanRule::Quadratic,
                    c: 6.0,
                },
                scaling: ScalingRule {
                    kind: ScalingKind::Quantile,
                    radius: 3.0,
                    mu: 0.98,
                },
                q_max: 30,
                ..base
            },
            ExperimentKind::UqOde => Self {
                family: BasisFamily::LaguerreFunc,
                plan: SamplingPlan {
                    rule: PlanRule::Quadratic,
                    c: 5.0,
                },
                map_r: 1,
                l: 64.0,
                scaling: ScalingRule {
                    kind: ScalingKind::Quantile,
                    radius: ODE_DEFAULT_RADIUS,
                    mu: 0.995,
                },
                q_max: 20,
                ..base
            },
            ExperimentKind::UqElliptic => Self {
                dim: 3,
                plan: SamplingPlan {
                    rule: PlanRule::Linear,
                    c: 10.0,
                },
                l: 4.0,
                q_max: 6,
                ..base
            },
        }
    }

    pub fn distribution(&self) -> Result<Distribution> {
        Ok(match self.dist {
            DistKind::Gaussian => Distribution::Gaussian,
            DistKind::Exponential => Distribution::Exponential,
            DistKind::UniformSym => Distribution::UniformSym,
            DistKind::UniformPos => Distribution::UniformPos,
            DistKind::Mapped => Distribution::MappedUniform(MappingSpec::new(self.map_r, self.l)?),
        })
    }

    pub fn eval_seed(&self) -> u64 {
        self.eval_seed.unwrap_or_else(|| derive_trial_seed(self.seed, EVAL_STREAM))
    }

    pub fn q_values(&self) -> std::ops::RangeInclusive<u32> {
        self.q_min..=self.q_max
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Parameter(msg));
        if self.reps == 0 {
            return bad("reps must be >= 1".into());
        }
        if self.q_min > self.q_max {
            return bad(format!("empty q range {}..={}", self.q_min, self.q_max));
        }
        if self.dim == 0 {
            return bad("dim must be >= 1".into());
        }
        if self.n_eval == 0 {
            return bad("n-eval must be >= 1".into());
        }
        SamplingPlan::new(self.plan.rule, self.plan.c)?;
        if self.scaling.kind != ScalingKind::None {
            ScalingRule::new(self.scaling.kind, self.scaling.radius, self.scaling.mu)?;
        }
        let dist = self.distribution()?;
        let nonnegative = matches!(dist, Distribution::Exponential | Distribution::UniformPos)
            || matches!(dist, Distribution::MappedUniform(m) if m.r() == 1);
        if self.family.is_laguerre() && !nonnegative {
            return bad(format!("{} needs points on the half line, got {}", self.family.as_str(), dist.label()));
        }
        match self.kind {
            ExperimentKind::Condnum => {}
            ExperimentKind::Converge => match &self.target {
                None => return bad("converge needs a target".into()),
                Some(t) if !t.supports_dim(self.dim) => {
                    return bad(format!("target {t} is not defined in dimension {}", self.dim))
                }
                Some(_) => {}
            },
            ExperimentKind::UqOde => {
                if !(self.t >= 0.0 && self.t.is_finite() && self.beta.is_finite()) {
                    return bad(format!("invalid ODE parameters beta={}, t={}", self.beta, self.t));
                }
                if self.dist != DistKind::Mapped || self.map_r != 1 {
                    return bad("uq-ode uses algebraically mapped points (dist=mapped, map-r=1)".into());
                }
            }
            ExperimentKind::UqElliptic => {
                if self.dist != DistKind::Mapped || self.map_r != 0 {
                    return bad("uq-elliptic uses logarithmically mapped points (dist=mapped, map-r=0)".into());
                }
                if !(self.x0 > 0.0 && self.x0 < 1.0) {
                    return bad(format!("x0 must lie in (0, 1), got {}", self.x0));
                }
                if self.n_elems < 2 {
                    return bad("n-elems must be >= 2".into());
                }
                if !(6..=40).contains(&self.ref_nodes) {
                    return bad(format!("ref-nodes must lie in 6..=40, got {}", self.ref_nodes));
                }
            }
        }
        Ok(())
    }

    /// `key=value` pairs (keys as CLI flag names) for the CSV header.
    pub fn describe(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = Vec::new();
        let mut put = |k: &str, v: String| out.push((k.to_string(), v));
        put("experiment", self.kind.as_str().into());
        put("basis", self.family.as_str().into());
        put("space", self.space.as_str().into());
        put("dim", self.dim.to_string());
        put("qmin", self.q_min.to_string());
        put("qmax", self.q_max.to_string());
        put("rule", self.plan.rule.as_str().into());
        put("c", self.plan.c.to_string());
        put("dist", self.dist.as_str().into());
        if self.dist == DistKind::Mapped {
            put("map-r", self.map_r.to_string());
            put("L", self.l.to_string());
        }
        put("seed", self.seed.to_string());
        put("solver", self.solver.as_str().into());
        match self.kind {
            ExperimentKind::Condnum => put("reps", self.reps.to_string()),
            ExperimentKind::Converge => {
                put("scaling", self.scaling.kind.as_str().into());
                put("M", self.scaling.radius.to_string());
                put("mu", self.scaling.mu.to_string());
                put("target", self.target.as_ref().map(ToString::to_string).unwrap_or_default());
                put("n-eval", self.n_eval.to_string());
                put("eval-seed", self.eval_seed().to_string());
            }
            ExperimentKind::UqOde => {
                put("scaling", self.scaling.kind.as_str().into());
                put("M", self.scaling.radius.to_string());
                put("mu", self.scaling.mu.to_string());
                put("beta", self.beta.to_string());
                put("t", self.t.to_string());
                put("ode-mode", self.ode_mode.as_str().into());
            }
            ExperimentKind::UqElliptic => {
                put("coefficient", self.coefficient.label());
                put("x0", self.x0.to_string());
                put("n-elems", self.n_elems.to_string());
                put("ref-nodes", self.ref_nodes.to_string());
            }
        }
        out
    }
}

/// Parses flat `key = value` text; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parameter(format!("config line {}: expected key = value", lineno + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || k.contains(char::is_whitespace) {
            return Err(Error::Parameter(format!("config line {}: bad key '{k}'", lineno + 1)));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}
