//! Self-checks behind `phasecat validate`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use phasecat::bell::{ChshAngles, HomodyneWindow, Postselection, TSIRELSON};
use phasecat::interferometer::{
    branch_state, closed_form_amplitude, detector_outcome, hermite_amplitude, phase_integral_amplitude,
    Branch, BranchFamily, HermiteScratch, Pattern,
};
use phasecat::loss::reference::BruteForce;
use phasecat::loss::{lossy_pattern_probability, LossModel, LossPlacement, LossyBranches};
use phasecat::special_fn::composite_gauss_legendre;
use phasecat::states::{reconstruct_number_state, CoherentRing};
use phasecat::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    /// Worst value seen.
    pub value: f64,
    /// Largest acceptable `value`.
    pub limit: f64,
    /// Set when the check could not run at all.
    pub error: Option<String>,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.value <= self.limit
    }
}

fn result(name: &'static str, limit: f64, run: impl FnOnce() -> Result<f64, Error>) -> CheckResult {
    match run() {
        Ok(value) => CheckResult {
            name,
            value,
            limit,
            error: None,
        },
        Err(e) => CheckResult {
            name,
            value: f64::NAN,
            limit,
            error: Some(e.to_string()),
        },
    }
}

fn amplitude_oracle() -> Result<f64, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut worst: f64 = 0.0;
    for n in [1usize, 2, 4, 8] {
        for theta in [0.0, PI / 7.0, PI / 4.0] {
            for branch in Branch::ALL {
                let state = branch_state(n, theta, branch)?;
                for _ in 0..25 {
                    let (x1, x2) = (rng.gen_range(-6.0..6.0), rng.gen_range(-6.0..6.0));
                    let h = hermite_amplitude(&state, x1, x2)?;
                    let p = phase_integral_amplitude(
                        n,
                        (n as f64).sqrt(),
                        theta,
                        branch,
                        x1,
                        x2,
                        CoherentRing::default_grid(n),
                    )?;
                    worst = worst.max((h - p).norm() / h.norm().max(1e-12));
                }
            }
        }
    }
    Ok(worst)
}

fn closed_form() -> Result<f64, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let mut worst: f64 = 0.0;
    for n in [1usize, 4, 24] {
        for branch in [Branch::PlusPlus, Branch::MinusMinus] {
            let state = branch_state(n, PI / 4.0, branch)?;
            for _ in 0..25 {
                let (x1, x2) = (rng.gen_range(-8.0..8.0), rng.gen_range(-8.0..8.0));
                let closed = closed_form_amplitude(&state, x1, x2)?.expect("diagonal branch");
                worst = worst.max((hermite_amplitude(&state, x1, x2)? - closed).norm());
            }
        }
    }
    Ok(worst)
}

fn ring_resolution() -> Result<f64, Error> {
    let mut worst: f64 = 0.0;
    for n in [1usize, 4, 24, 60] {
        worst = worst.max(1.0 - reconstruct_number_state(&CoherentRing::standard(n)?)?.overlap);
    }
    Ok(worst)
}

fn normalization() -> Result<f64, Error> {
    let mut worst: f64 = 0.0;
    for n in [1usize, 4, 24] {
        let half = (n as f64).sqrt() + 6.0;
        let rule = composite_gauss_legendre(10, 20, -half, half)?;
        let family = BranchFamily::lossless(n, PI / 4.0);
        let outcomes = Pattern::ALL.map(|p| detector_outcome(p, 0.8, -2.0));
        let partial: Vec<f64> = rule
            .iter()
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&(x1, w1)| {
                let mut scratch = HermiteScratch::default();
                let mut acc = 0.0;
                for (x2, w2) in rule.iter() {
                    scratch.fill(n, x1, x2)?;
                    let amps = family.amplitudes(&scratch.x1, &scratch.x2);
                    acc += w1 * w2 * outcomes.iter().map(|o| o.combine(&amps).norm_sqr()).sum::<f64>();
                }
                Ok(acc)
            })
            .collect::<Result<_, Error>>()?;
        worst = worst.max((partial.iter().sum::<f64>() - 1.0).abs());
    }
    Ok(worst)
}

/// Largest `|S|` over random settings, windows and photon numbers.
fn random_chsh(draws: usize, seed: u64, theta: Option<f64>) -> Result<f64, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let configs: Vec<_> = (0..draws)
        .map(|_| {
            let n = rng.gen_range(1..=8);
            let th = theta.unwrap_or_else(|| rng.gen_range(0.0..PI));
            let (x1m, x2m) = (rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
            let dx = if rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(0.01..0.6) };
            let angles = ChshAngles::new(
                rng.gen_range(-PI..PI),
                rng.gen_range(-PI..PI),
                rng.gen_range(-PI..PI),
                rng.gen_range(-PI..PI),
            );
            (n, th, x1m, x2m, dx, angles)
        })
        .collect();
    let values: Vec<f64> = configs
        .par_iter()
        .map(|&(n, th, x1m, x2m, dx, angles)| {
            let post = Postselection::lossless(n, th, HomodyneWindow::new(x1m, x2m, dx)?)?;
            match post.chsh(&angles) {
                Ok(s) => Ok(s.abs()),
                Err(Error::DegenerateWindow(_)) => Ok(0.0),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_, Error>>()?;
    Ok(values.into_iter().fold(0.0, f64::max))
}

const PLACEMENTS: [LossPlacement; 2] = [LossPlacement::BeforeKerr, LossPlacement::AfterKerr];

fn trace_preservation() -> Result<f64, Error> {
    let mut worst: f64 = 0.0;
    for n in 1..=4 {
        for eta in [0.95, 0.6, 0.2] {
            for placement in PLACEMENTS {
                let loss = LossModel::from_eta(eta)?.with_placement(placement);
                worst = worst.max((LossyBranches::new(n, PI / 4.0, loss)?.total_weight() - 1.0).abs());
                let reference = BruteForce::new(n, PI / 4.0, &loss)?;
                for branch in Branch::ALL {
                    worst = worst.max((reference.branch_norm(branch) - 1.0).abs());
                }
            }
        }
    }
    Ok(worst)
}

fn brute_force_loss() -> Result<f64, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let mut worst: f64 = 0.0;
    for n in 1..=3 {
        for eta in [0.9, 0.6] {
            for placement in PLACEMENTS {
                let loss = LossModel::from_eta(eta)?.with_placement(placement);
                let reference = BruteForce::new(n, PI / 4.0, &loss)?;
                for _ in 0..8 {
                    let (s1, s2) = (rng.gen_range(-PI..PI), rng.gen_range(-PI..PI));
                    let (x1, x2) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
                    let window = HomodyneWindow::point(x1, x2)?;
                    for pattern in Pattern::ALL {
                        let fast = lossy_pattern_probability(n, PI / 4.0, s1, s2, pattern, &window, &loss)?;
                        worst = worst.max((fast - reference.density(s1, s2, pattern, x1, x2)).abs());
                    }
                }
            }
        }
    }
    Ok(worst)
}

pub fn run_checks() -> Vec<CheckResult> {
    vec![
        result("hermite vs phase-integral amplitude (relative)", 1e-8, amplitude_oracle),
        result("closed-form diagonal branches", 1e-12, closed_form),
        result("coherent-ring resolution: 1 - overlap", 1e-10, ring_resolution),
        result("four-outcome normalization", 1e-6, normalization),
        result("max |S| over 10^4 random draws", TSIRELSON + 1e-6, || random_chsh(10_000, 20, None)),
        result("max |S| at theta = 0 over 10^3 draws", 2.0 + 1e-9, || random_chsh(1_000, 21, Some(0.0))),
        result("loss channel trace preservation", 1e-10, trace_preservation),
        result("lossy densities vs four-mode simulation", 1e-9, brute_force_loss),
    ]
}

pub fn report(results: &[CheckResult]) -> String {
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut s = format!("{:<width$}  {:>12}  {:>12}  result\n", "check", "worst", "limit");
    for r in results {
        let verdict = if r.passed() { "PASS" } else { "FAIL" };
        match &r.error {
            None => s.push_str(&format!("{:<width$}  {:>12.4e}  {:>12.4e}  {verdict}\n", r.name, r.value, r.limit)),
            Some(e) => s.push_str(&format!("{:<width$}  {:>12}  {:>12.4e}  {verdict} ({e})\n", r.name, "-", r.limit)),
        }
    }
    s
}
