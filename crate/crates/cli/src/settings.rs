//! Run settings shared by the subcommands.
//!
//! Every value may come from a TOML file passed with `--config` or from a
//! flag; flags win. Keys in the file use the flag names with underscores.

use std::path::Path;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use spdreg::field::FunctionalParams;
use spdreg::optim::{GradMode, Objective, SolverConfig};
use spdreg::synth::{DEFAULT_A0, DEFAULT_B};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveArg {
    /// Double-integral regularizer with the log-Euclidean metric.
    Loglog,
    /// Double-integral regularizer with the Euclidean metric.
    Euclid,
    /// First-order Sobolev comparison functional.
    Sobolev,
}

impl From<ObjectiveArg> for Objective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::Loglog => Objective::LogEuclidean,
            ObjectiveArg::Euclid => Objective::Euclidean,
            ObjectiveArg::Sobolev => Objective::Sobolev,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum GradArg {
    Analytic,
    Fd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PhantomArg {
    Staircase,
    MainDirection,
}

/// Optional overrides; `None` means "not given here".
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Distance exponent p > 1
    #[arg(long)]
    pub p: Option<f64>,
    /// Fractional order s in (0, 1)
    #[arg(long)]
    pub s: Option<f64>,
    /// Weight of the double-integral regularizer
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Weight of the Sobolev term
    #[arg(long)]
    pub beta: Option<f64>,
    /// 1 gates pairs with the mollifier, 0 uses all pairs
    #[arg(long)]
    pub l: Option<u8>,
    /// Mollifier radius in pixels
    #[arg(long)]
    pub nrho: Option<usize>,
    /// Log-ball radius
    #[arg(long)]
    pub z: Option<f64>,
    /// Lower eigenvalue clamp
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, value_enum)]
    pub objective: Option<ObjectiveArg>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long, value_enum)]
    pub grad_mode: Option<GradArg>,
    #[arg(long)]
    pub fd_step: Option<f64>,
    #[arg(long)]
    pub armijo_c: Option<f64>,
    #[arg(long)]
    pub backtrack_factor: Option<f64>,
    #[arg(long)]
    pub init_step: Option<f64>,
    /// Quasi-Newton memory, 0 for plain projected gradient
    #[arg(long)]
    pub memory: Option<usize>,
    #[arg(long, value_enum)]
    pub phantom: Option<PhantomArg>,
    /// Grid size of the phantom
    #[arg(long)]
    pub n: Option<usize>,
    /// Rician noise variance
    #[arg(long)]
    pub sigma2: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// b-value
    #[arg(long)]
    pub b: Option<f64>,
    /// Unweighted signal
    #[arg(long)]
    pub a0: Option<f64>,
}

macro_rules! merge_fields {
    ($a:expr, $b:expr, $($f:ident),*) => {
        Settings { $($f: $a.$f.or($b.$f)),* }
    };
}

impl Settings {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    /// Values from `self`, falling back to `base`.
    pub fn over(&self, base: &Settings) -> Settings {
        merge_fields!(
            self,
            base,
            p,
            s,
            alpha,
            beta,
            l,
            nrho,
            z,
            epsilon,
            objective,
            max_iters,
            rel_tol,
            grad_mode,
            fd_step,
            armijo_c,
            backtrack_factor,
            init_step,
            memory,
            phantom,
            n,
            sigma2,
            seed,
            b,
            a0
        )
    }

    pub fn params(&self) -> FunctionalParams {
        let d = FunctionalParams::default();
        FunctionalParams {
            p: self.p.unwrap_or(d.p),
            s: self.s.unwrap_or(d.s),
            alpha: self.alpha.unwrap_or(d.alpha),
            beta: self.beta.unwrap_or(d.beta),
            l: self.l.unwrap_or(d.l),
            n_rho: self.nrho.unwrap_or(d.n_rho),
            z: self.z.unwrap_or(d.z),
            epsilon: self.epsilon.unwrap_or(d.epsilon),
        }
    }

    pub fn solver(&self) -> SolverConfig {
        let d = SolverConfig::default();
        SolverConfig {
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            grad_mode: match self.grad_mode {
                Some(GradArg::Fd) => GradMode::FiniteDifference,
                Some(GradArg::Analytic) => GradMode::Analytic,
                None => d.grad_mode,
            },
            fd_step: self.fd_step.unwrap_or(d.fd_step),
            armijo_c: self.armijo_c.unwrap_or(d.armijo_c),
            backtrack_factor: self.backtrack_factor.unwrap_or(d.backtrack_factor),
            init_step: self.init_step.unwrap_or(d.init_step),
            memory: self.memory.unwrap_or(d.memory),
            rel_tol: self.rel_tol.unwrap_or(d.rel_tol),
        }
    }

    /// Every field filled in, defaults where nothing was given.
    pub fn resolved(&self) -> Settings {
        let p = self.params();
        let c = self.solver();
        Settings {
            p: Some(p.p),
            s: Some(p.s),
            alpha: Some(p.alpha),
            beta: Some(p.beta),
            l: Some(p.l),
            nrho: Some(p.n_rho),
            z: Some(p.z),
            epsilon: Some(p.epsilon),
            objective: Some(self.objective()),
            max_iters: Some(c.max_iters),
            rel_tol: Some(c.rel_tol),
            grad_mode: Some(match c.grad_mode {
                GradMode::Analytic => GradArg::Analytic,
                GradMode::FiniteDifference => GradArg::Fd,
            }),
            fd_step: Some(c.fd_step),
            armijo_c: Some(c.armijo_c),
            backtrack_factor: Some(c.backtrack_factor),
            init_step: Some(c.init_step),
            memory: Some(c.memory),
            phantom: Some(self.phantom()),
            n: Some(self.n()),
            sigma2: Some(self.sigma2()),
            seed: Some(self.seed()),
            b: Some(self.b()),
            a0: Some(self.a0()),
        }
    }

    pub fn phantom(&self) -> PhantomArg {
        self.phantom.unwrap_or(PhantomArg::Staircase)
    }

    pub fn n(&self) -> usize {
        self.n.unwrap_or(10)
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2.unwrap_or(0.0)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn b(&self) -> f64 {
        self.b.unwrap_or(DEFAULT_B)
    }

    pub fn a0(&self) -> f64 {
        self.a0.unwrap_or(DEFAULT_A0)
    }

    pub fn objective(&self) -> ObjectiveArg {
        self.objective.unwrap_or(ObjectiveArg::Loglog)
    }

    /// Applies one `name=value` sweep entry.
    pub fn with_value(&self, name: &str, value: f64) -> Result<Settings, CliError> {
        let mut s = self.clone();
        match name {
            "alpha" => s.alpha = Some(value),
            "beta" => s.beta = Some(value),
            "p" => s.p = Some(value),
            "s" => s.s = Some(value),
            other => return Err(CliError::Usage(format!("cannot sweep over '{other}'"))),
        }
        Ok(s)
    }
}
