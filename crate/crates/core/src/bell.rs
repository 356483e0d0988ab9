//! Homodyne postselection, CHSH correlators and setting optimization.
//!
//! Every detector-pattern probability is a quadratic form in the four
//! branch multipliers, `P = g† G g`, where the branch Gram matrix
//! `G_jk = ∬_window ψ_j* ψ_k` does not depend on the `σ` settings. A
//! [`Postselection`] integrates `G` once and then evaluates probabilities,
//! correlators and `S` for any settings without touching the wavefunctions.

use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use num_complex::Complex64 as C64;

use crate::error::Error;
use crate::interferometer::{detector_outcome, BranchFamily, HermiteScratch, Pattern};
use crate::simplex::{self, SimplexOptions};
use crate::special_fn::gauss_legendre;

/// Tsirelson bound `2√2`.
pub const TSIRELSON: f64 = 2.0 * SQRT_2;

/// Accepted homodyne square: `|x₁ − x1m| ≤ Δx/2`, `|x₂ − x2m| ≤ Δx/2`.
///
/// `delta_x = 0` is the point limit: probabilities become densities and the
/// common `Δx²` factor drops out of every ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomodyneWindow {
    pub x1m: f64,
    pub x2m: f64,
    /// Full width on each axis.
    pub delta_x: f64,
    pub quadrature_order: usize,
}

impl HomodyneWindow {
    pub const DEFAULT_ORDER: usize = 16;

    pub fn new(x1m: f64, x2m: f64, delta_x: f64) -> Result<Self, Error> {
        Self::with_order(x1m, x2m, delta_x, Self::DEFAULT_ORDER)
    }

    pub fn point(x1m: f64, x2m: f64) -> Result<Self, Error> {
        Self::new(x1m, x2m, 0.0)
    }

    pub fn with_order(x1m: f64, x2m: f64, delta_x: f64, quadrature_order: usize) -> Result<Self, Error> {
        if !x1m.is_finite() || !x2m.is_finite() || !delta_x.is_finite() {
            return Err(Error::NonFinite("homodyne window"));
        }
        if delta_x < 0.0 {
            return Err(Error::Domain("window width must be non-negative"));
        }
        if quadrature_order < 1 {
            return Err(Error::Domain("window quadrature order must be at least 1"));
        }
        Ok(Self {
            x1m,
            x2m,
            delta_x,
            quadrature_order,
        })
    }

    pub fn is_point(&self) -> bool {
        self.delta_x == 0.0
    }
}

/// CHSH settings `(σ_A, σ′_A, σ_B, σ′_B)` in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshAngles {
    pub a: f64,
    pub a_prime: f64,
    pub b: f64,
    pub b_prime: f64,
}

impl ChshAngles {
    pub fn new(a: f64, a_prime: f64, b: f64, b_prime: f64) -> Self {
        Self { a, a_prime, b, b_prime }
    }

    fn from_slice(x: &[f64]) -> Self {
        Self::new(x[0], x[1], x[2], x[3])
    }

    fn to_array(self) -> [f64; 4] {
        [self.a, self.a_prime, self.b, self.b_prime]
    }

    /// Every angle mapped into `(−π, π]`.
    pub fn reduced(self) -> Self {
        let [a, ap, b, bp] = self.to_array().map(reduce_angle);
        Self::new(a, ap, b, bp)
    }
}

/// Maps an angle into `(−π, π]`.
pub fn reduce_angle(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut r = x % two_pi;
    if r <= -PI {
        r += two_pi;
    } else if r > PI {
        r -= two_pi;
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSettings {
    pub n_total: usize,
    pub theta: f64,
    pub angles: ChshAngles,
    pub window: HomodyneWindow,
}

/// Branch Gram matrix `G_jk = Σ w ψ_j* ψ_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchGram(pub [[C64; 4]; 4]);

impl Default for BranchGram {
    fn default() -> Self {
        BranchGram([[C64::new(0.0, 0.0); 4]; 4])
    }
}

impl BranchGram {
    pub fn add_outer(&mut self, amps: &[C64; 4], weight: f64) {
        for j in 0..4 {
            let aj = amps[j].conj() * weight;
            for k in 0..4 {
                self.0[j][k] += aj * amps[k];
            }
        }
    }

    /// `g† G g`.
    pub fn quadratic_form(&self, g: &[C64; 4]) -> f64 {
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..4 {
            let mut row = C64::new(0.0, 0.0);
            for k in 0..4 {
                row += self.0[j][k] * g[k];
            }
            acc += g[j].conj() * row;
        }
        acc.re.max(0.0)
    }

    pub fn trace(&self) -> f64 {
        (0..4).map(|k| self.0[k][k].re).sum()
    }

    fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut m = 0.0f64;
        for j in 0..4 {
            for k in 0..4 {
                m = m.max((self.0[j][k] - other.0[j][k]).norm());
            }
        }
        m
    }
}

/// Anything that yields branch amplitudes at a quadrature point, possibly as
/// several mutually incoherent records.
pub trait AmplitudeSource {
    /// Hermite order needed at each point.
    fn max_order(&self) -> usize;
    /// Adds `weight · Σ_records ψ*ψ` at the point held by `scratch`.
    fn accumulate(&self, scratch: &HermiteScratch, weight: f64, gram: &mut BranchGram);
}

impl AmplitudeSource for BranchFamily {
    fn max_order(&self) -> usize {
        self.n_total
    }

    fn accumulate(&self, scratch: &HermiteScratch, weight: f64, gram: &mut BranchGram) {
        let amps = self.amplitudes(&scratch.x1, &scratch.x2);
        gram.add_outer(&amps, weight);
    }
}

const WINDOW_REL_TOL: f64 = 1e-8;

fn gram_with_order<S: AmplitudeSource + ?Sized>(
    source: &S,
    window: &HomodyneWindow,
    order: usize,
) -> Result<BranchGram, Error> {
    let mut gram = BranchGram::default();
    let mut scratch = HermiteScratch::default();
    let order_h = source.max_order();
    if window.is_point() {
        scratch.fill(order_h, window.x1m, window.x2m)?;
        source.accumulate(&scratch, 1.0, &mut gram);
        return Ok(gram);
    }
    let h = window.delta_x / 2.0;
    let r1 = gauss_legendre(order, window.x1m - h, window.x1m + h)?;
    let r2 = gauss_legendre(order, window.x2m - h, window.x2m + h)?;
    for (x1, w1) in r1.iter() {
        for (x2, w2) in r2.iter() {
            scratch.fill(order_h, x1, x2)?;
            source.accumulate(&scratch, w1 * w2, &mut gram);
        }
    }
    Ok(gram)
}

/// Integrates the branch Gram matrix over `window`. For finite windows the
/// rule is repeated at twice the order and a relative change above `1e−8`
/// (against the trace) is reported as [`Error::WindowNotConverged`].
pub fn integrate_gram<S: AmplitudeSource + ?Sized>(source: &S, window: &HomodyneWindow) -> Result<BranchGram, Error> {
    let base = gram_with_order(source, window, window.quadrature_order)?;
    if window.is_point() {
        return Ok(base);
    }
    let fine = gram_with_order(source, window, 2 * window.quadrature_order)?;
    let scale = fine.trace();
    if scale > 0.0 {
        let relative_change = fine.max_abs_diff(&base) / scale;
        if relative_change > WINDOW_REL_TOL {
            return Err(Error::WindowNotConverged { relative_change });
        }
    }
    Ok(fine)
}

/// Postselected statistics for one `(N, θ, window)` configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Postselection {
    pub n_total: usize,
    pub theta: f64,
    pub window: HomodyneWindow,
    pub gram: BranchGram,
}

const DEGENERATE_FLOOR: f64 = 1e-300;

impl Postselection {
    pub fn lossless(n_total: usize, theta: f64, window: HomodyneWindow) -> Result<Self, Error> {
        if n_total < 1 {
            return Err(Error::Domain("postselection needs N >= 1"));
        }
        if !theta.is_finite() {
            return Err(Error::NonFinite("Kerr phase"));
        }
        let family = BranchFamily::lossless(n_total, theta);
        Self::from_source(n_total, theta, window, &family)
    }

    pub fn from_source<S: AmplitudeSource + ?Sized>(
        n_total: usize,
        theta: f64,
        window: HomodyneWindow,
        source: &S,
    ) -> Result<Self, Error> {
        Ok(Self {
            n_total,
            theta,
            window,
            gram: integrate_gram(source, &window)?,
        })
    }

    pub fn probability(&self, pattern: Pattern, sigma1: f64, sigma2: f64) -> f64 {
        self.gram
            .quadratic_form(&detector_outcome(pattern, sigma1, sigma2).multipliers)
    }

    /// Probabilities in [`Pattern::ALL`] order.
    pub fn probabilities(&self, sigma1: f64, sigma2: f64) -> [f64; 4] {
        Pattern::ALL.map(|p| self.probability(p, sigma1, sigma2))
    }

    /// Probability (or density, for a point window) of landing in the window
    /// with any detector pattern.
    pub fn acceptance(&self) -> f64 {
        self.probabilities(0.0, 0.0).iter().sum()
    }

    /// `⟨ab⟩` at settings `(σ₁, σ₂)`.
    pub fn correlator(&self, sigma1: f64, sigma2: f64) -> Result<f64, Error> {
        let probs = self.probabilities(sigma1, sigma2);
        let total: f64 = probs.iter().sum();
        if total < DEGENERATE_FLOOR {
            return Err(Error::DegenerateWindow(total));
        }
        let signed: f64 = Pattern::ALL
            .iter()
            .zip(probs)
            .map(|(p, pr)| {
                let (a, b) = p.chsh_signs();
                f64::from(a * b) * pr
            })
            .sum();
        Ok((signed / total).clamp(-1.0, 1.0))
    }

    /// `S = ⟨ab⟩ + ⟨a′b⟩ + ⟨ab′⟩ − ⟨a′b′⟩` (signed).
    pub fn chsh(&self, angles: &ChshAngles) -> Result<f64, Error> {
        Ok(self.correlator(angles.a, angles.b)? + self.correlator(angles.a_prime, angles.b)?
            + self.correlator(angles.a, angles.b_prime)?
            - self.correlator(angles.a_prime, angles.b_prime)?)
    }
}

pub fn window_probability(
    n_total: usize,
    theta: f64,
    sigma1: f64,
    sigma2: f64,
    pattern: Pattern,
    window: &HomodyneWindow,
) -> Result<f64, Error> {
    let family = BranchFamily::lossless(n_total, theta);
    pattern_probability(&family, sigma1, sigma2, pattern, window)
}

/// Single-pattern window probability with the convergence check applied to
/// the pattern probability itself.
pub(crate) fn pattern_probability<S: AmplitudeSource + ?Sized>(
    source: &S,
    sigma1: f64,
    sigma2: f64,
    pattern: Pattern,
    window: &HomodyneWindow,
) -> Result<f64, Error> {
    let g = detector_outcome(pattern, sigma1, sigma2).multipliers;
    let base = gram_with_order(source, window, window.quadrature_order)?.quadratic_form(&g);
    if window.is_point() {
        return Ok(base);
    }
    let fine = gram_with_order(source, window, 2 * window.quadrature_order)?.quadratic_form(&g);
    if fine > 0.0 {
        let relative_change = (fine - base).abs() / fine;
        if relative_change > WINDOW_REL_TOL {
            return Err(Error::WindowNotConverged { relative_change });
        }
    }
    Ok(fine)
}

pub fn correlator(n_total: usize, theta: f64, sigma1: f64, sigma2: f64, window: &HomodyneWindow) -> Result<f64, Error> {
    Postselection::lossless(n_total, theta, *window)?.correlator(sigma1, sigma2)
}

pub fn chsh(settings: &MeasurementSettings) -> Result<f64, Error> {
    Postselection::lossless(settings.n_total, settings.theta, settings.window)?.chsh(&settings.angles)
}

/// Probability per pulse that the homodyne pair lands in a finite window,
/// summed over all four detector patterns.
pub fn postselection_rate(
    n_total: usize,
    theta: f64,
    sigma1: f64,
    sigma2: f64,
    window: &HomodyneWindow,
) -> Result<f64, Error> {
    if window.is_point() {
        return Err(Error::Domain("postselection rate needs a finite window"));
    }
    let post = Postselection::lossless(n_total, theta, *window)?;
    Ok(post.probabilities(sigma1, sigma2).iter().sum())
}

/// `res` evenly spaced angles covering `[−π, π]` inclusive; a single sample is `0`.
pub fn angle_grid(res: usize) -> Vec<f64> {
    match res {
        0 => Vec::new(),
        1 => alloc::vec![0.0],
        _ => (0..res)
            .map(|i| -PI + 2.0 * PI * i as f64 / (res - 1) as f64)
            .collect(),
    }
}

/// `|S|` over a grid of `(σ′_A, σ′_B)`, row-major in `σ′_A`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChshMap {
    pub sigma_a: f64,
    pub sigma_b: f64,
    pub a_primes: Vec<f64>,
    pub b_primes: Vec<f64>,
    pub values: Vec<f64>,
}

impl ChshMap {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.b_primes.len() + j]
    }

    /// Largest value and its flattened index; ties go to the lowest index.
    pub fn argmax(&self) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, &v) in self.values.iter().enumerate() {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
        best
    }
}

pub fn chsh_map(
    post: &Postselection,
    sigma_a: f64,
    sigma_b: f64,
    a_primes: &[f64],
    b_primes: &[f64],
) -> Result<ChshMap, Error> {
    let mut values = Vec::with_capacity(a_primes.len() * b_primes.len());
    for &ap in a_primes {
        for &bp in b_primes {
            values.push(post.chsh(&ChshAngles::new(sigma_a, ap, sigma_b, bp))?.abs());
        }
    }
    Ok(ChshMap {
        sigma_a,
        sigma_b,
        a_primes: a_primes.to_vec(),
        b_primes: b_primes.to_vec(),
        values,
    })
}

/// Coarse-grid resolution of the `(σ′_A, σ′_B)` scan in [`optimize_chsh`].
pub const COARSE_GRID: usize = 65;

/// Default seed: the fixed `σ_A = 0`, `σ_B = π` used for the coarse scan.
pub const DEFAULT_SEED: ChshAngles = ChshAngles {
    a: 0.0,
    a_prime: 0.0,
    b: PI,
    b_prime: 0.0,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizedChsh {
    /// Best `|S|` found.
    pub s_max: f64,
    /// Settings reaching it, reduced into `(−π, π]`.
    pub angles: ChshAngles,
    pub seed_value: f64,
    /// `false` when neither stage beat the seed.
    pub improved: bool,
    pub evaluations: usize,
}

/// Maximizes `|S|` in two stages: a `65×65` scan of `(σ′_A, σ′_B)` with the
/// seed's `σ_A`, `σ_B` held fixed, then Nelder–Mead over all four angles
/// from the best cell, restarted once from its own optimum. Converges when
/// the simplex diameter drops below `1e−6` rad.
pub fn optimize_chsh(post: &Postselection, seed: ChshAngles) -> Result<OptimizedChsh, Error> {
    let seed_value = post.chsh(&seed)?.abs();
    let grid = angle_grid(COARSE_GRID);
    let map = chsh_map(post, seed.a, seed.b, &grid, &grid)?;
    let (idx, grid_best) = map.argmax().expect("non-empty grid");
    let mut start = ChshAngles::new(seed.a, grid[idx / grid.len()], seed.b, grid[idx % grid.len()]);
    let mut best_value = grid_best;
    if seed_value > grid_best {
        start = seed;
        best_value = seed_value;
    }
    let mut evaluations = map.values.len() + 1;

    let objective = |x: &[f64]| -> Result<f64, Error> { Ok(-post.chsh(&ChshAngles::from_slice(x))?.abs()) };
    let mut x = start.to_array().to_vec();
    for step in [0.5, 0.1] {
        let opts = SimplexOptions {
            initial_step: step,
            ..SimplexOptions::default()
        };
        let r = simplex::minimize(objective, &x, &opts)?;
        evaluations += r.evaluations;
        if -r.value > best_value {
            best_value = -r.value;
            x = r.x;
        }
    }
    let angles = ChshAngles::from_slice(&x).reduced();
    Ok(OptimizedChsh {
        s_max: best_value,
        angles,
        seed_value,
        improved: best_value > seed_value,
        evaluations,
    })
}

/// Convenience wrapper: lossless optimization at `(N, θ, window)`.
pub fn optimize_lossless(n_total: usize, theta: f64, window: HomodyneWindow, seed: ChshAngles) -> Result<OptimizedChsh, Error> {
    optimize_chsh(&Postselection::lossless(n_total, theta, window)?, seed)
}

/// Minimum number of `σ₁` samples in a fringe sweep.
pub const FRINGE_SAMPLES: usize = 256;

/// `P_{D2D4}(σ₁)` at `samples` equally spaced `σ₁ ∈ [0, 2π)`.
pub fn fringe(post: &Postselection, sigma2: f64, samples: usize) -> Vec<(f64, f64)> {
    (0..samples)
        .map(|i| {
            let s1 = 2.0 * PI * i as f64 / samples as f64;
            (s1, post.probability(Pattern::D2D4, s1, sigma2))
        })
        .collect()
}

/// `(P_max − P_min) / (P_max + P_min)` of the `|0101⟩` fringe in `σ₁`.
pub fn fringe_visibility(post: &Postselection, sigma2: f64) -> Result<f64, Error> {
    let curve = fringe(post, sigma2, FRINGE_SAMPLES);
    let (lo, hi) = curve
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, p)| (lo.min(p), hi.max(p)));
    if lo + hi < DEGENERATE_FLOOR {
        return Err(Error::DegenerateWindow(lo + hi));
    }
    Ok((hi - lo) / (hi + lo))
}
