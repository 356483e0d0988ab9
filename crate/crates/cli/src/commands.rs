use rayon::prelude::*;

use phasecat::bell::{
    angle_grid, chsh_map, fringe, optimize_chsh, HomodyneWindow, Postselection, FRINGE_SAMPLES,
};
use phasecat::interferometer::{branch_state, hermite_amplitude, phase_integral_amplitude, Branch};
use phasecat::loss::{chsh_vs_loss, lossy_postselection, LossModel};
use phasecat::states::CoherentRing;

use crate::config::{LossSpec, Method, RunConfig};
use crate::output::{Cell, Table};
use crate::CliError;

const ANGLE_COLUMNS: [&str; 4] = ["sigma_a", "sigma_a_prime", "sigma_b", "sigma_b_prime"];

fn loss_for(cfg: &RunConfig, n: usize) -> Result<LossModel, CliError> {
    let model = match cfg.loss {
        LossSpec::None => LossModel::lossless(),
        LossSpec::Nbar(v) => LossModel::from_mean_loss(v, n)?,
        LossSpec::Eta(v) => LossModel::from_eta(v)?,
    };
    Ok(model.with_placement(cfg.placement.into()))
}

fn postselection(cfg: &RunConfig, n: usize, window: HomodyneWindow) -> Result<Postselection, CliError> {
    let loss = loss_for(cfg, n)?;
    if loss.is_lossless() {
        Ok(Postselection::lossless(n, cfg.theta, window)?)
    } else {
        Ok(lossy_postselection(n, cfg.theta, window, &loss)?)
    }
}

/// `count` evenly spaced points on `[lo, hi]`; a single point sits at the middle.
fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect()
}

pub fn wavefunction(cfg: &RunConfig) -> Result<Table, CliError> {
    if cfg.loss != LossSpec::None {
        return Err(CliError::Input("wavefunction plots lossless branch states; drop --nbar/--eta".into()));
    }
    let branch = Branch::from_index(cfg.branch)?;
    let state = branch_state(cfg.n, cfg.theta, branch)?;
    let ring_grid = CoherentRing::default_grid(cfg.n);
    let axis = linspace(-cfg.extent, cfg.extent, cfg.grid_or(161));
    let rows: Vec<Vec<Vec<Cell>>> = axis
        .par_iter()
        .map(|&x1| {
            axis.iter()
                .map(|&x2| {
                    let amp = match cfg.method {
                        Method::Hermite => hermite_amplitude(&state, x1, x2)?,
                        Method::PhaseIntegral => {
                            phase_integral_amplitude(cfg.n, cfg.r, cfg.theta, branch, x1, x2, ring_grid)?
                        }
                    };
                    Ok(vec![x1.into(), x2.into(), amp.norm_sqr().into()])
                })
                .collect::<Result<Vec<_>, CliError>>()
        })
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(&["x1", "x2", "density"]);
    rows.into_iter().flatten().for_each(|r| table.push(r));
    Ok(table)
}

pub fn fringe_curves(cfg: &RunConfig) -> Result<Table, CliError> {
    let post = postselection(cfg, cfg.n, cfg.window()?)?;
    let samples = cfg.grid_or(FRINGE_SAMPLES);
    let mut table = Table::new(&["sigma2", "sigma1", "p", "p_over_pmax"]);
    for &sigma2 in &cfg.sigma2 {
        let curve = fringe(&post, sigma2, samples);
        let p_max = curve.iter().map(|&(_, p)| p).fold(0.0, f64::max);
        if p_max <= 0.0 {
            return Err(CliError::Input(format!("window sees no |0101> events at sigma2 = {sigma2}")));
        }
        for (sigma1, p) in curve {
            table.push(vec![sigma2.into(), sigma1.into(), p.into(), (p / p_max).into()]);
        }
    }
    Ok(table)
}

pub fn chsh_map_table(cfg: &RunConfig) -> Result<Table, CliError> {
    let post = postselection(cfg, cfg.n, cfg.window()?)?;
    let grid = angle_grid(cfg.grid_or(65));
    let map = chsh_map(&post, cfg.sigma_a, cfg.sigma_b, &grid, &grid)?;
    let mut table = Table::new(&["sigma_a_prime", "sigma_b_prime", "abs_s"]);
    for (i, &a) in map.a_primes.iter().enumerate() {
        for (j, &b) in map.b_primes.iter().enumerate() {
            table.push(vec![a.into(), b.into(), map.get(i, j).into()]);
        }
    }
    Ok(table)
}

pub fn chsh_max(cfg: &RunConfig) -> Result<Table, CliError> {
    let jobs: Vec<(usize, usize)> = (0..cfg.dx_exprs.len())
        .flat_map(|d| cfg.ns.iter().map(move |&n| (d, n)))
        .collect();
    let rows: Vec<Vec<Cell>> = jobs
        .par_iter()
        .map(|&(d, n)| {
            let window = cfg.window_for(n, &cfg.dx_exprs[d])?;
            let best = optimize_chsh(&postselection(cfg, n, window)?, cfg.angles())?;
            let a = best.angles;
            Ok(vec![
                n.into(),
                window.x1m.into(),
                window.x2m.into(),
                window.delta_x.into(),
                best.s_max.into(),
                a.a.into(),
                a.a_prime.into(),
                a.b.into(),
                a.b_prime.into(),
            ])
        })
        .collect::<Result<_, CliError>>()?;
    let mut columns = vec!["n", "x1m", "x2m", "dx", "s_max"];
    columns.extend(ANGLE_COLUMNS);
    let mut table = Table::new(&columns);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

pub fn loss_sweep(cfg: &RunConfig) -> Result<Table, CliError> {
    if cfg.loss != LossSpec::None {
        return Err(CliError::Input("loss-sweep scans the loss itself; use --nbar-max instead of --nbar/--eta".into()));
    }
    let limit = cfg.n as f64 / 2.0;
    let n_bar_max = cfg.nbar_max.unwrap_or(f64::min(0.5, 0.99 * limit));
    if !(0.0..limit).contains(&n_bar_max) {
        return Err(CliError::Input(format!(
            "--nbar-max must lie in [0, N/2) = [0, {limit}), got {n_bar_max}"
        )));
    }
    let grid = linspace(0.0, n_bar_max, cfg.grid_or(21));
    let window = cfg.window()?;
    let points: Vec<Vec<Cell>> = grid
        .par_iter()
        .map(|&n_bar| {
            let point = chsh_vs_loss(cfg.n, cfg.theta, window, cfg.placement.into(), &[n_bar], cfg.angles())?
                .remove(0);
            let a = point.optimum.angles;
            Ok(vec![
                point.n_bar.into(),
                point.eta.into(),
                point.optimum.s_max.into(),
                a.a.into(),
                a.a_prime.into(),
                a.b.into(),
                a.b_prime.into(),
            ])
        })
        .collect::<Result<_, CliError>>()?;
    let mut columns = vec!["n_bar", "eta", "s_max"];
    columns.extend(ANGLE_COLUMNS);
    let mut table = Table::new(&columns);
    points.into_iter().for_each(|r| table.push(r));
    Ok(table)
}
