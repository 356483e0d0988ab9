//! Photon loss as a beam splitter in each path into an unobserved
//! environment mode.
//!
//! Each environment record `(l₁, l₂)` (photons lost from beams 1 and 2) is
//! orthogonal to every other record, so records add incoherently. Inside one
//! record the four Kerr branches stay coherent: the environment holds Fock
//! states `|l₁, l₂⟩` with no branch label. What depends on the placement of
//! the loss is the phase each branch carries:
//!
//! * [`LossPlacement::BeforeKerr`] (the physical layout: loss right after the
//!   first beam splitter): only the `N − l₁ − l₂` surviving photons pass
//!   the Kerr media, so the branch phases act on the reduced indices.
//! * [`LossPlacement::AfterKerr`]: all `N` photons acquire the Kerr phase
//!   and the lost ones take `e^{iθ(s₁l₁ + s₂l₂)}` with them. That factor is
//!   branch dependent, hence not a global phase of the record; it acts like
//!   a record-dependent shift of the `σ` settings.
//!
//! The two placements therefore agree only when `2θ l` is a multiple of `2π`
//! for every record that carries weight.

use alloc::vec::Vec;

use num_complex::Complex64 as C64;
use num_traits::Float;

use crate::bell::{pattern_probability, optimize_chsh, AmplitudeSource, BranchGram, ChshAngles, HomodyneWindow, OptimizedChsh, Postselection};
use crate::error::Error;
use crate::interferometer::{Branch, BranchFamily, HermiteScratch, Pattern};
use crate::special_fn::log_binomial;
use crate::states::split_magnitude;

pub mod reference;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LossPlacement {
    #[default]
    BeforeKerr,
    AfterKerr,
}

/// Identical intensity transmissivity `η` in both paths.
///
/// The mean loss `n̄ = (1 − η) N / 2` counts photons lost from *one* path
/// (each beam carries `N/2` photons on average), so `0 ≤ n̄ < N/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossModel {
    eta: f64,
    placement: LossPlacement,
}

impl LossModel {
    pub fn lossless() -> Self {
        Self {
            eta: 1.0,
            placement: LossPlacement::default(),
        }
    }

    pub fn from_eta(eta: f64) -> Result<Self, Error> {
        if !eta.is_finite() || eta <= 0.0 || eta > 1.0 {
            return Err(Error::Transmissivity(eta));
        }
        Ok(Self {
            eta,
            placement: LossPlacement::default(),
        })
    }

    pub fn from_mean_loss(n_bar: f64, n_total: usize) -> Result<Self, Error> {
        let limit = n_total as f64 / 2.0;
        if n_total == 0 || !n_bar.is_finite() || n_bar < 0.0 || n_bar >= limit {
            return Err(Error::MeanLoss { n_bar, n: n_total, limit });
        }
        Self::from_eta(1.0 - n_bar / limit)
    }

    pub fn with_placement(mut self, placement: LossPlacement) -> Self {
        self.placement = placement;
        self
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn placement(&self) -> LossPlacement {
        self.placement
    }

    pub fn mean_loss(&self, n_total: usize) -> f64 {
        (1.0 - self.eta) * n_total as f64 / 2.0
    }

    pub fn is_lossless(&self) -> bool {
        self.eta == 1.0
    }
}

/// Amplitude `√(C(n,l) η^{n−l} (1−η)^l)` for losing exactly `l` of `n` photons.
pub fn kraus_weight(n: usize, l: usize, eta: f64) -> Result<f64, Error> {
    if l > n {
        return Err(Error::Domain("cannot lose more photons than present"));
    }
    if !eta.is_finite() || eta <= 0.0 || eta > 1.0 {
        return Err(Error::Transmissivity(eta));
    }
    if l == 0 {
        return Ok((0.5 * n as f64 * eta.ln()).exp());
    }
    if eta == 1.0 {
        return Ok(0.0);
    }
    let log_w = log_binomial(n, l)? + (n - l) as f64 * eta.ln() + l as f64 * (1.0 - eta).ln();
    Ok((0.5 * log_w).exp())
}

/// Branch amplitudes conditioned on one environment record.
#[derive(Debug, Clone, PartialEq)]
pub struct LossRecord {
    /// Photons lost from beams 1 and 2.
    pub lost: (usize, usize),
    /// Sector with `N − l₁ − l₂` photons; magnitudes carry the Kraus weights.
    pub family: BranchFamily,
}

impl LossRecord {
    /// Summed `|coefficient|²` of one branch (identical for all branches).
    pub fn weight(&self) -> f64 {
        self.family.magnitudes.iter().map(|a| a * a).sum()
    }

    /// Full coefficient vector of one branch, entry `n` multiplying
    /// `|N′ − n, n⟩` in the system modes.
    pub fn branch_coefficients(&self, branch: Branch) -> Vec<C64> {
        let k = branch as usize;
        let (s1, s2) = branch.signs();
        let np = self.family.n_total;
        let theta = self.family.theta;
        let extra = self.family.extra_phase[k];
        self.family
            .magnitudes
            .iter()
            .enumerate()
            .map(|(n, &a)| extra * C64::from_polar(a, theta * (s1 * (np - n) as f64 + s2 * n as f64)))
            .collect()
    }
}

/// All environment records of the lossy branch states.
#[derive(Debug, Clone, PartialEq)]
pub struct LossyBranches {
    pub n_total: usize,
    pub theta: f64,
    pub loss: LossModel,
    pub records: Vec<LossRecord>,
}

impl LossyBranches {
    pub fn new(n_total: usize, theta: f64, loss: LossModel) -> Result<Self, Error> {
        if n_total < 1 {
            return Err(Error::Domain("branch states need N >= 1"));
        }
        if !theta.is_finite() {
            return Err(Error::NonFinite("Kerr phase"));
        }
        let eta = loss.eta();
        let mut records = Vec::new();
        for l1 in 0..=n_total {
            for l2 in 0..=(n_total - l1) {
                if loss.is_lossless() && (l1 > 0 || l2 > 0) {
                    continue;
                }
                let np = n_total - l1 - l2;
                // n counts surviving photons in mode 2; before loss mode 2 held n + l2
                let mut magnitudes = Vec::with_capacity(np + 1);
                for n in 0..=np {
                    let n2 = n + l2;
                    let n1 = n_total - n2;
                    let a = split_magnitude(n_total, n2) * kraus_weight(n1, l1, eta)? * kraus_weight(n2, l2, eta)?;
                    magnitudes.push(a);
                }
                let extra_phase = match loss.placement() {
                    LossPlacement::BeforeKerr => [C64::new(1.0, 0.0); 4],
                    LossPlacement::AfterKerr => Branch::ALL.map(|b| {
                        let (s1, s2) = b.signs();
                        C64::from_polar(1.0, theta * (s1 * l1 as f64 + s2 * l2 as f64))
                    }),
                };
                records.push(LossRecord {
                    lost: (l1, l2),
                    family: BranchFamily {
                        n_total: np,
                        theta,
                        magnitudes,
                        extra_phase,
                    },
                });
            }
        }
        Ok(Self {
            n_total,
            theta,
            loss,
            records,
        })
    }

    /// `Σ_records Σ_n |c_n|²` for any single branch; 1 for a trace-preserving channel.
    pub fn total_weight(&self) -> f64 {
        self.records.iter().map(LossRecord::weight).sum()
    }
}

impl AmplitudeSource for LossyBranches {
    fn max_order(&self) -> usize {
        self.n_total
    }

    fn accumulate(&self, scratch: &HermiteScratch, weight: f64, gram: &mut BranchGram) {
        for record in &self.records {
            let amps = record.family.amplitudes(&scratch.x1, &scratch.x2);
            gram.add_outer(&amps, weight);
        }
    }
}

pub fn lossy_postselection(n_total: usize, theta: f64, window: HomodyneWindow, loss: &LossModel) -> Result<Postselection, Error> {
    let source = LossyBranches::new(n_total, theta, *loss)?;
    Postselection::from_source(n_total, theta, window, &source)
}

/// `Σ_{l₁,l₂} ∬_window |Σ_k g_k ψ_k^{(l₁,l₂)}|²`.
pub fn lossy_pattern_probability(
    n_total: usize,
    theta: f64,
    sigma1: f64,
    sigma2: f64,
    pattern: Pattern,
    window: &HomodyneWindow,
    loss: &LossModel,
) -> Result<f64, Error> {
    let source = LossyBranches::new(n_total, theta, *loss)?;
    pattern_probability(&source, sigma1, sigma2, pattern, window)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossCurvePoint {
    pub n_bar: f64,
    pub eta: f64,
    pub optimum: OptimizedChsh,
}

/// Optimized `|S|` at each mean loss of `n_bar_grid`, point window only.
pub fn chsh_vs_loss(
    n_total: usize,
    theta: f64,
    window: HomodyneWindow,
    placement: LossPlacement,
    n_bar_grid: &[f64],
    seed: ChshAngles,
) -> Result<Vec<LossCurvePoint>, Error> {
    if !window.is_point() {
        return Err(Error::Domain("loss sweep assumes a point window (delta_x = 0)"));
    }
    n_bar_grid
        .iter()
        .map(|&n_bar| {
            let optimum = optimized_at(n_total, theta, window, placement, n_bar, seed)?;
            let eta = LossModel::from_mean_loss(n_bar, n_total)?.eta();
            Ok(LossCurvePoint { n_bar, eta, optimum })
        })
        .collect()
}

fn optimized_at(
    n_total: usize,
    theta: f64,
    window: HomodyneWindow,
    placement: LossPlacement,
    n_bar: f64,
    seed: ChshAngles,
) -> Result<OptimizedChsh, Error> {
    let loss = LossModel::from_mean_loss(n_bar, n_total)?.with_placement(placement);
    optimize_chsh(&lossy_postselection(n_total, theta, window, &loss)?, seed)
}

/// Slack above 2 that still counts as "no violation"; a deterministic local
/// strategy sits at exactly `|S| = 2`.
pub const VIOLATION_SLACK: f64 = 1e-9;

/// Smallest mean loss at which the optimized `|S|` no longer exceeds 2,
/// bracketed in `[lo, hi]` and bisected to `tol`. `None` if already absent
/// at `lo` or still present at `hi`.
pub fn violation_threshold(
    n_total: usize,
    theta: f64,
    window: HomodyneWindow,
    placement: LossPlacement,
    seed: ChshAngles,
    (mut lo, mut hi): (f64, f64),
    tol: f64,
) -> Result<Option<f64>, Error> {
    let violates = |n_bar: f64| -> Result<bool, Error> {
        Ok(optimized_at(n_total, theta, window, placement, n_bar, seed)?.s_max > 2.0 + VIOLATION_SLACK)
    };
    if !violates(lo)? || violates(hi)? {
        return Ok(None);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if violates(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn kraus_examples() {
        assert_eq!(kraus_weight(7, 0, 1.0).unwrap(), 1.0);
        assert_eq!(kraus_weight(7, 2, 1.0).unwrap(), 0.0);
        assert!((kraus_weight(1, 1, 0.9).unwrap() - 0.1f64.sqrt()).abs() < 1e-15);
        assert!(kraus_weight(2, 3, 0.5).is_err());
        assert!(kraus_weight(2, 1, 0.0).is_err());
        assert!(kraus_weight(2, 1, 1.5).is_err());
    }

    #[test]
    fn kraus_weights_are_a_distribution() {
        for &eta in &[1e-3, 0.2, 0.5, 0.9, 0.999, 1.0] {
            for n in 0..=60 {
                let s: f64 = (0..=n).map(|l| kraus_weight(n, l, eta).unwrap().powi(2)).sum();
                assert!((s - 1.0).abs() < 1e-12, "n={n} eta={eta} s={s}");
            }
        }
    }

    #[test]
    fn loss_model_mapping() {
        let m = LossModel::from_mean_loss(0.1, 1).unwrap();
        assert!((m.eta() - 0.8).abs() < 1e-15);
        assert!((m.mean_loss(1) - 0.1).abs() < 1e-15);
        assert!(LossModel::from_mean_loss(0.0, 4).unwrap().is_lossless());
        assert!(LossModel::from_mean_loss(2.0, 4).is_err());
        assert!(LossModel::from_mean_loss(-0.1, 4).is_err());
        assert!(LossModel::from_eta(0.0).is_err());
        assert!(LossModel::from_eta(1.01).is_err());
    }

    #[test]
    fn channel_is_trace_preserving() {
        for &eta in &[0.3, 0.9, 1.0] {
            for placement in [LossPlacement::BeforeKerr, LossPlacement::AfterKerr] {
                let loss = LossModel::from_eta(eta).unwrap().with_placement(placement);
                let lb = LossyBranches::new(6, 0.7, loss).unwrap();
                assert!((lb.total_weight() - 1.0).abs() < 1e-10);
                for b in Branch::ALL {
                    let s: f64 = lb
                        .records
                        .iter()
                        .flat_map(|r| r.branch_coefficients(b))
                        .map(|c| c.norm_sqr())
                        .sum();
                    assert!((s - 1.0).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn unit_transmissivity_is_lossless() {
        let w = HomodyneWindow::new(1.1, 0.4, 0.3).unwrap();
        for p in Pattern::ALL {
            let a = lossy_pattern_probability(4, PI / 4.0, 0.3, 1.2, p, &w, &LossModel::lossless()).unwrap();
            let b = crate::bell::window_probability(4, PI / 4.0, 0.3, 1.2, p, &w).unwrap();
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn placements_agree_when_lost_phases_are_trivial() {
        let w = HomodyneWindow::point(0.8, 1.3).unwrap();
        for theta in [0.0, PI] {
            let before = LossModel::from_eta(0.7).unwrap();
            let after = before.with_placement(LossPlacement::AfterKerr);
            for p in Pattern::ALL {
                let a = lossy_pattern_probability(3, theta, 0.4, -0.9, p, &w, &before).unwrap();
                let b = lossy_pattern_probability(3, theta, 0.4, -0.9, p, &w, &after).unwrap();
                assert!((a - b).abs() < 1e-14, "theta={theta}");
            }
        }
    }

    #[test]
    fn placements_differ_for_generic_kerr_phase() {
        let w = HomodyneWindow::point(0.8, 1.3).unwrap();
        let before = LossModel::from_eta(0.7).unwrap();
        let after = before.with_placement(LossPlacement::AfterKerr);
        let a = lossy_pattern_probability(3, PI / 4.0, 0.4, -0.9, Pattern::D2D4, &w, &before).unwrap();
        let b = lossy_pattern_probability(3, PI / 4.0, 0.4, -0.9, Pattern::D2D4, &w, &after).unwrap();
        assert!((a - b).abs() > 1e-6);
    }

    #[test]
    fn sweep_requires_point_window() {
        let w = HomodyneWindow::new(1.0, 1.0, 0.1).unwrap();
        assert!(chsh_vs_loss(1, PI / 4.0, w, LossPlacement::BeforeKerr, &[0.0], crate::bell::DEFAULT_SEED).is_err());
    }
}
