//! Run configuration: defaults, an optional `key=value` file, and command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use paradiag_core::allatonce::ObjectiveKind;
use paradiag_core::precond::{DEFAULT_TERMINAL_ALPHA, DEFAULT_TRACKING_ALPHA};

pub const DEFAULT_M: usize = 32;
pub const DEFAULT_T_REF: f64 = 2.0;
pub const DEFAULT_GAMMA: f64 = 0.05;
pub const DEFAULT_D: f64 = 0.1;
pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 25;
pub const DEFAULT_L_VALUES: [usize; 3] = [30, 100, 300];
/// Largest L run without `--allow-large-l`.
pub const DESK_L_MAX: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equation {
    /// 1D Laplacian with isolated ends, `M = m` cells.
    Diffusion1d,
    /// Periodic 2D heat equation on an `m × m` grid.
    Diffusion2d,
    /// Periodic `−dΔ + ∂₁ + ∂₂` on an `m × m` grid.
    AdvDiff2d,
}

impl FromStr for Equation {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "diffusion1d" => Equation::Diffusion1d,
            "diffusion2d" => Equation::Diffusion2d,
            "advdiff2d" => Equation::AdvDiff2d,
            _ => bail!("unknown equation '{s}' (diffusion1d | diffusion2d | advdiff2d)"),
        })
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Equation::Diffusion1d => "diffusion1d",
            Equation::Diffusion2d => "diffusion2d",
            Equation::AdvDiff2d => "advdiff2d",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleMode {
    /// Fixed τ, growing horizon.
    Horizon,
    /// Fixed horizon, shrinking τ.
    Timestep,
}

impl FromStr for ScaleMode {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "horizon" => ScaleMode::Horizon,
            "timestep" => ScaleMode::Timestep,
            _ => bail!("unknown scale mode '{s}' (horizon | timestep)"),
        })
    }
}

impl fmt::Display for ScaleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScaleMode::Horizon => "horizon",
            ScaleMode::Timestep => "timestep",
        })
    }
}

pub fn parse_objective(s: &str) -> Result<ObjectiveKind> {
    Ok(match s {
        "tracking" => ObjectiveKind::Tracking,
        "terminal" => ObjectiveKind::Terminal,
        _ => bail!("unknown objective '{s}' (tracking | terminal)"),
    })
}

pub fn objective_name(k: ObjectiveKind) -> &'static str {
    match k {
        ObjectiveKind::Tracking => "tracking",
        ObjectiveKind::Terminal => "terminal",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub objective: ObjectiveKind,
    pub equation: Equation,
    /// Grid side (2D) or number of cells (1D).
    pub m: usize,
    pub l: usize,
    pub t_ref: f64,
    pub gamma: f64,
    pub d: f64,
    pub alpha: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub scale_mode: ScaleMode,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(objective: ObjectiveKind, equation: Equation) -> Self {
        Self {
            objective,
            equation,
            m: DEFAULT_M,
            l: DEFAULT_L_VALUES[0],
            t_ref: DEFAULT_T_REF,
            gamma: DEFAULT_GAMMA,
            d: DEFAULT_D,
            alpha: default_alpha(objective),
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            scale_mode: ScaleMode::Horizon,
            out: None,
        }
    }

    /// Spatial unknowns per time block.
    pub fn spatial_order(&self) -> usize {
        match self.equation {
            Equation::Diffusion1d => self.m,
            _ => self.m * self.m,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, name: &str| -> Result<()> {
            if !(v > 0.0 && v.is_finite()) {
                bail!("{name} must be positive and finite, got {v}");
            }
            Ok(())
        };
        if self.m < 2 {
            bail!("m must be at least 2");
        }
        if self.l < 2 {
            bail!("L must be at least 2");
        }
        positive(self.t_ref, "T_ref")?;
        positive(self.gamma, "gamma")?;
        positive(self.tol, "tol")?;
        if self.equation == Equation::AdvDiff2d {
            positive(self.d, "d")?;
        }
        if !self.alpha.is_finite() || self.alpha == 0.0 {
            bail!("alpha must be finite and non-zero");
        }
        if self.objective == ObjectiveKind::Tracking && self.alpha.abs() != 1.0 {
            bail!("tracking needs |alpha| = 1, got {}", self.alpha);
        }
        if self.max_iter == 0 {
            bail!("max_iter must be at least 1");
        }
        Ok(())
    }
}

pub fn default_alpha(objective: ObjectiveKind) -> f64 {
    match objective {
        ObjectiveKind::Tracking => DEFAULT_TRACKING_ALPHA,
        ObjectiveKind::Terminal => DEFAULT_TERMINAL_ALPHA,
    }
}

/// Every setting as an optional override, so that a file and the command line can be layered.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub objective: Option<ObjectiveKind>,
    pub equation: Option<Equation>,
    pub m: Option<usize>,
    pub l: Option<Vec<usize>>,
    pub t_ref: Option<f64>,
    pub gamma: Option<f64>,
    pub d: Option<f64>,
    pub alpha: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub scale_mode: Option<ScaleMode>,
    pub out: Option<PathBuf>,
}

impl Overrides {
    /// `self` wins wherever it is set.
    pub fn or(self, other: Overrides) -> Overrides {
        Overrides {
            objective: self.objective.or(other.objective),
            equation: self.equation.or(other.equation),
            m: self.m.or(other.m),
            l: self.l.or(other.l),
            t_ref: self.t_ref.or(other.t_ref),
            gamma: self.gamma.or(other.gamma),
            d: self.d.or(other.d),
            alpha: self.alpha.or(other.alpha),
            tol: self.tol.or(other.tol),
            max_iter: self.max_iter.or(other.max_iter),
            scale_mode: self.scale_mode.or(other.scale_mode),
            out: self.out.or(other.out),
        }
    }

    /// Resolve against defaults; `l` takes the first listed value.
    pub fn resolve(&self) -> RunConfig {
        let objective = self.objective.unwrap_or(ObjectiveKind::Tracking);
        let mut cfg = RunConfig::new(objective, self.equation.unwrap_or(Equation::Diffusion2d));
        if let Some(m) = self.m {
            cfg.m = m;
        }
        if let Some(l) = self.l.as_ref().and_then(|v| v.first()) {
            cfg.l = *l;
        }
        cfg.t_ref = self.t_ref.unwrap_or(cfg.t_ref);
        cfg.gamma = self.gamma.unwrap_or(cfg.gamma);
        cfg.d = self.d.unwrap_or(cfg.d);
        cfg.alpha = self.alpha.unwrap_or(cfg.alpha);
        cfg.tol = self.tol.unwrap_or(cfg.tol);
        cfg.max_iter = self.max_iter.unwrap_or(cfg.max_iter);
        cfg.scale_mode = self.scale_mode.unwrap_or(cfg.scale_mode);
        cfg.out = self.out.clone();
        cfg
    }

    /// Parse `key = value` lines; `#` starts a comment. Keys accept `-` or `_`.
    pub fn parse_kv(text: &str) -> Result<Overrides> {
        let mut o = Overrides::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .with_context(|| format!("line {}: expected key=value", no + 1))?;
            let (k, v) = (k.trim().replace('_', "-").to_ascii_lowercase(), v.trim());
            let ctx = || format!("line {}: bad value for '{k}'", no + 1);
            match k.as_str() {
                "objective" => o.objective = Some(parse_objective(v).with_context(ctx)?),
                "equation" => o.equation = Some(v.parse().with_context(ctx)?),
                "m" => o.m = Some(v.parse().with_context(ctx)?),
                "l" => o.l = Some(parse_list(v).with_context(ctx)?),
                "t-ref" => o.t_ref = Some(v.parse().with_context(ctx)?),
                "gamma" => o.gamma = Some(v.parse().with_context(ctx)?),
                "d" => o.d = Some(v.parse().with_context(ctx)?),
                "alpha" => o.alpha = Some(v.parse().with_context(ctx)?),
                "tol" => o.tol = Some(v.parse().with_context(ctx)?),
                "max-iter" => o.max_iter = Some(v.parse().with_context(ctx)?),
                "scale-mode" => o.scale_mode = Some(v.parse().with_context(ctx)?),
                "out" => o.out = Some(PathBuf::from(v)),
                _ => bail!("line {}: unknown key '{k}'", no + 1),
            }
        }
        Ok(o)
    }

    pub fn from_file(path: &Path) -> Result<Overrides> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse_kv(&text).with_context(|| format!("in {}", path.display()))
    }
}

/// Comma-separated list, e.g. `30,100,300`.
pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    let v = s
        .split(',')
        .map(|x| x.trim())
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<T>().with_context(|| format!("cannot parse '{x}'")))
        .collect::<Result<Vec<_>>>()?;
    if v.is_empty() {
        bail!("empty list");
    }
    Ok(v)
}
