//! Run configuration: command-line flags over a TOML file over defaults.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use phasecat::bell::{ChshAngles, HomodyneWindow, DEFAULT_SEED};
use phasecat::interferometer::Branch;
use phasecat::loss::{LossModel, LossPlacement};

use crate::expr::{Expr, ExprList};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    #[default]
    BeforeKerr,
    AfterKerr,
}

impl From<Placement> for LossPlacement {
    fn from(p: Placement) -> Self {
        match p {
            Placement::BeforeKerr => LossPlacement::BeforeKerr,
            Placement::AfterKerr => LossPlacement::AfterKerr,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Finite Hermite-function sum.
    #[default]
    Hermite,
    /// Coherent-ring phase integral with radius `--r`.
    PhaseIntegral,
}

/// Every tunable, each optional so that flags and file can be layered.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Settings {
    /// Photon number N of the input state.
    #[arg(long)]
    pub n: Option<usize>,
    /// Kerr phase θ in radians, e.g. `pi/4`.
    #[arg(long)]
    pub theta: Option<Expr>,
    /// Coherent-ring radius for `--method phase-integral` [default: sqrt(n)].
    #[arg(long)]
    pub r: Option<Expr>,
    /// Window centre on x₁ [default: sqrt(n)].
    #[arg(long)]
    pub x1m: Option<Expr>,
    /// Window centre on x₂ [default: sqrt(n)].
    #[arg(long)]
    pub x2m: Option<Expr>,
    /// Full window width on each axis; 0 is the point limit.
    #[arg(long)]
    pub dx: Option<Expr>,
    #[arg(long)]
    pub sigma_a: Option<Expr>,
    #[arg(long)]
    pub sigma_a_prime: Option<Expr>,
    #[arg(long)]
    pub sigma_b: Option<Expr>,
    #[arg(long)]
    pub sigma_b_prime: Option<Expr>,
    /// Mean photon loss per path.
    #[arg(long, conflicts_with = "eta")]
    pub nbar: Option<Expr>,
    /// Transmissivity of each path.
    #[arg(long)]
    pub eta: Option<Expr>,
    /// Where the loss sits relative to the Kerr media.
    #[arg(long, value_enum)]
    pub placement: Option<Placement>,
    /// Resolution: points per axis, fringe samples or sweep points.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Half-width of the wavefunction grid.
    #[arg(long)]
    pub extent: Option<Expr>,
    /// Branch index k for `wavefunction` (1 = ++, 2 = +-, 3 = -+, 4 = --).
    #[arg(long)]
    pub branch: Option<usize>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// Remote settings σ₂ for `fringe`.
    #[arg(long)]
    pub sigma2: Option<ExprList>,
    /// Photon numbers for `chsh-max`, comma separated.
    #[arg(long)]
    pub ns: Option<PhotonNumbers>,
    /// Window widths for `chsh-max`; may use `n`.
    #[arg(long)]
    pub dx_list: Option<ExprList>,
    /// Largest mean loss in `loss-sweep` [default: min(0.5, 0.99 N/2)].
    #[arg(long)]
    pub nbar_max: Option<Expr>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// TOML file with any of the keys above.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Worker threads [default: all cores].
    #[arg(long)]
    pub threads: Option<usize>,
}

macro_rules! layer {
    ($top:expr, $bottom:expr, $($field:ident),+ $(,)?) => {
        Settings {
            $($field: $top.$field.or($bottom.$field),)+
        }
    };
}

impl Settings {
    /// Fields set here win over `other`.
    pub fn over(self, other: Settings) -> Settings {
        layer!(
            self, other, n, theta, r, x1m, x2m, dx, sigma_a, sigma_a_prime, sigma_b, sigma_b_prime, nbar, eta,
            placement, grid, extent, branch, method, sigma2, ns, dx_list, nbar_max, out, format, config, threads,
        )
    }

    pub fn from_file(path: &Path) -> Result<Settings, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Input(format!("config {}: {e}", path.display())))
    }

    /// Flags layered over the `--config` file, if one was given.
    pub fn layered(self) -> Result<Settings, CliError> {
        match &self.config {
            Some(path) => {
                let file = Settings::from_file(path)?;
                if file.nbar.is_some() && file.eta.is_some() {
                    return Err(CliError::Input("config sets both nbar and eta".into()));
                }
                // a flag for one loss parameter displaces the file's other one
                let file = if self.nbar.is_some() || self.eta.is_some() {
                    Settings {
                        nbar: None,
                        eta: None,
                        ..file
                    }
                } else {
                    file
                };
                Ok(self.over(file))
            }
            None => Ok(self),
        }
    }
}

/// Loss as the user stated it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossSpec {
    None,
    Nbar(f64),
    Eta(f64),
}

/// Fully resolved configuration; echoed into every output file.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct RunConfig {
    pub command: String,
    pub n: usize,
    pub theta: f64,
    pub r: f64,
    pub x1m: f64,
    pub x2m: f64,
    pub dx: f64,
    pub sigma_a: f64,
    pub sigma_a_prime: f64,
    pub sigma_b: f64,
    pub sigma_b_prime: f64,
    pub loss: LossSpec,
    pub placement: Placement,
    pub grid: Option<usize>,
    pub extent: f64,
    pub branch: usize,
    pub method: Method,
    pub sigma2: Vec<f64>,
    pub ns: Vec<usize>,
    /// Unevaluated, since entries may depend on each N.
    pub dx_list: Vec<String>,
    pub nbar_max: Option<f64>,
    pub format: Format,
    #[serde(skip)]
    pub dx_exprs: Vec<Expr>,
    #[serde(skip)]
    pub centre_exprs: (Expr, Expr),
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub threads: Option<usize>,
}

fn input<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Input(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(from = "Vec<usize>")]
pub struct PhotonNumbers(pub Vec<usize>);

impl From<Vec<usize>> for PhotonNumbers {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

impl std::str::FromStr for PhotonNumbers {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        text.split(',')
            .map(|s| s.trim().parse::<usize>().map_err(|_| format!("bad photon number `{}`", s.trim())))
            .collect::<Result<_, _>>()
            .map(PhotonNumbers)
    }
}

impl RunConfig {
    pub fn resolve(command: &str, s: Settings) -> Result<RunConfig, CliError> {
        let n = s.n.unwrap_or(4);
        if n == 0 {
            return Err(CliError::Input(
                "N must be at least 1: with no photons there are no Kerr branches".into(),
            ));
        }
        let default_sqrt: Expr = "sqrt(n)".parse().expect("valid");
        let ev = |e: Option<Expr>, fallback: Expr| input(e.unwrap_or(fallback).eval(n));
        let theta = ev(s.theta, Expr::number(std::f64::consts::FRAC_PI_4))?;
        let r = ev(s.r, default_sqrt.clone())?;
        let centre_exprs = (
            s.x1m.unwrap_or_else(|| default_sqrt.clone()),
            s.x2m.unwrap_or_else(|| default_sqrt.clone()),
        );
        let x1m = input(centre_exprs.0.eval(n))?;
        let x2m = input(centre_exprs.1.eval(n))?;
        let dx = ev(s.dx, Expr::number(0.0))?;
        let sigma_a = ev(s.sigma_a, Expr::number(DEFAULT_SEED.a))?;
        let sigma_a_prime = ev(s.sigma_a_prime, Expr::number(DEFAULT_SEED.a_prime))?;
        let sigma_b = ev(s.sigma_b, Expr::number(DEFAULT_SEED.b))?;
        let sigma_b_prime = ev(s.sigma_b_prime, Expr::number(DEFAULT_SEED.b_prime))?;
        let loss = match (s.nbar, s.eta) {
            (Some(_), Some(_)) => return Err(CliError::Input("give --nbar or --eta, not both".into())),
            (Some(v), None) => LossSpec::Nbar(input(v.eval(n))?),
            (None, Some(v)) => LossSpec::Eta(input(v.eval(n))?),
            (None, None) => LossSpec::None,
        };
        let branch = s.branch.unwrap_or(1);
        input(Branch::from_index(branch))?;
        let sigma2 = match s.sigma2 {
            Some(list) => list.0.iter().map(|e| input(e.eval(n))).collect::<Result<_, _>>()?,
            None => vec![0.0, std::f64::consts::PI],
        };
        let ns = match s.ns {
            Some(list) => list.0,
            None => vec![1, 2, 4, 8, 12, 24],
        };
        if ns.contains(&0) {
            return Err(CliError::Input("--ns entries must be at least 1".into()));
        }
        let dx_exprs = match s.dx_list {
            Some(list) => list.0,
            None => ["0", "0.1*sqrt(n)", "0.2*sqrt(n)"].iter().map(|t| t.parse().expect("valid")).collect(),
        };
        let nbar_max = s.nbar_max.map(|e| input(e.eval(n))).transpose()?;
        if matches!(s.threads, Some(0)) {
            return Err(CliError::Input("--threads must be at least 1".into()));
        }
        if matches!(s.grid, Some(0)) {
            return Err(CliError::Input("--grid must be at least 1".into()));
        }
        let cfg = RunConfig {
            command: command.to_string(),
            n,
            theta,
            r,
            x1m,
            x2m,
            dx,
            sigma_a,
            sigma_a_prime,
            sigma_b,
            sigma_b_prime,
            loss,
            placement: s.placement.unwrap_or_default(),
            grid: s.grid,
            extent: ev(s.extent, Expr::number(8.0))?,
            branch,
            method: s.method.unwrap_or_default(),
            sigma2,
            ns,
            dx_list: dx_exprs.iter().map(|e| e.source().to_string()).collect(),
            nbar_max,
            format: s.format.unwrap_or_default(),
            dx_exprs,
            centre_exprs,
            out: s.out,
            threads: s.threads,
        };
        cfg.window()?;
        cfg.loss_model()?;
        Ok(cfg)
    }

    pub fn window(&self) -> Result<HomodyneWindow, CliError> {
        Ok(HomodyneWindow::new(self.x1m, self.x2m, self.dx)?)
    }

    pub fn angles(&self) -> ChshAngles {
        ChshAngles::new(self.sigma_a, self.sigma_a_prime, self.sigma_b, self.sigma_b_prime)
    }

    pub fn loss_model(&self) -> Result<LossModel, CliError> {
        let model = match self.loss {
            LossSpec::None => LossModel::lossless(),
            LossSpec::Nbar(v) => LossModel::from_mean_loss(v, self.n)?,
            LossSpec::Eta(v) => LossModel::from_eta(v)?,
        };
        Ok(model.with_placement(self.placement.into()))
    }

    /// Window for another photon number, re-evaluating `n`-dependent
    /// centres and the given width.
    pub fn window_for(&self, n: usize, dx: &Expr) -> Result<HomodyneWindow, CliError> {
        let x1m = input(self.centre_exprs.0.eval(n))?;
        let x2m = input(self.centre_exprs.1.eval(n))?;
        Ok(HomodyneWindow::new(x1m, x2m, input(dx.eval(n))?)?)
    }

    pub fn grid_or(&self, default: usize) -> usize {
        self.grid.unwrap_or(default)
    }
}
