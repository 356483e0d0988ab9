//! Brute-force lossy simulation on the full four-mode Fock space.
//!
//! Modes are `(beam 1, beam 2, environment 1, environment 2)`, each cut off
//! at `N` photons. Every optical element is built as the matrix exponential
//! of its generator on the two modes it touches, the environment is traced
//! out explicitly, and quadrature amplitudes use raw Hermite polynomials.
//! It shares no code path with [`LossyBranches`](super::LossyBranches) and
//! is only meant for small `N`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64 as C64;
use num_traits::Float;

use super::{LossModel, LossPlacement};
use crate::error::Error;
use crate::interferometer::{detector_outcome, Branch, Pattern};

/// Largest photon number the brute-force simulation accepts.
pub const MAX_REFERENCE_PHOTONS: usize = 4;

#[derive(Debug, Clone)]
struct DenseMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl DenseMatrix {
    fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = C64::new(1.0, 0.0);
        }
        m
    }

    fn at(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.dim + c]
    }

    fn mul(&self, other: &Self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += a * other.data[k * n + c];
                }
            }
        }
        out
    }

    fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }

    fn norm_one(&self) -> f64 {
        (0..self.dim)
            .map(|c| (0..self.dim).map(|r| self.at(r, c).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Scaling and squaring with a truncated Taylor series.
    fn expm(&self) -> Self {
        let norm = self.norm_one();
        let mut squarings = 0;
        while norm / f64::powi(2.0, squarings) > 0.25 {
            squarings += 1;
        }
        let mut a = self.clone();
        a.scale(1.0 / f64::powi(2.0, squarings));
        let mut result = Self::identity(self.dim);
        let mut term = Self::identity(self.dim);
        for k in 1..=24 {
            term = term.mul(&a);
            term.scale(1.0 / k as f64);
            for (r, t) in result.data.iter_mut().zip(&term.data) {
                *r += t;
            }
        }
        for _ in 0..squarings {
            result = result.mul(&result);
        }
        result
    }
}

/// Generator on two modes (each `0..d`), index `m * d + n`, built from the
/// ladder action `a†b |m, n⟩ = √((m+1) n) |m+1, n−1⟩`.
fn two_mode_generator(d: usize, coef_ab: C64, coef_ba: C64) -> DenseMatrix {
    // G = coef_ab · a†b + coef_ba · b†a
    let dim = d * d;
    let mut g = DenseMatrix::zeros(dim);
    for m in 0..d {
        for n in 0..d {
            let col = m * d + n;
            if n >= 1 && m + 1 < d {
                let row = (m + 1) * d + (n - 1);
                g.data[row * dim + col] += coef_ab * (((m + 1) * n) as f64).sqrt();
            }
            if m >= 1 && n + 1 < d {
                let row = (m - 1) * d + (n + 1);
                g.data[row * dim + col] += coef_ba * ((m * (n + 1)) as f64).sqrt();
            }
        }
    }
    g
}

/// Four-mode state vector, index `((n1 d + n2) d + e1) d + e2`.
#[derive(Debug, Clone)]
struct FourModeState {
    d: usize,
    amp: Vec<C64>,
}

impl FourModeState {
    fn index(&self, modes: [usize; 4]) -> usize {
        ((modes[0] * self.d + modes[1]) * self.d + modes[2]) * self.d + modes[3]
    }

    fn apply_pair(&mut self, first: usize, second: usize, u: &DenseMatrix) {
        let d = self.d;
        let mut out = vec![C64::new(0.0, 0.0); self.amp.len()];
        let mut modes = [0usize; 4];
        for flat in 0..self.amp.len() {
            let v = self.amp[flat];
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            let mut rest = flat;
            for k in (0..4).rev() {
                modes[k] = rest % d;
                rest /= d;
            }
            let col = modes[first] * d + modes[second];
            for row in 0..d * d {
                let coef = u.at(row, col);
                if coef == C64::new(0.0, 0.0) {
                    continue;
                }
                let mut target = modes;
                target[first] = row / d;
                target[second] = row % d;
                let idx = self.index(target);
                out[idx] += coef * v;
            }
        }
        self.amp = out;
    }

    fn apply_phase<F: Fn([usize; 4]) -> f64>(&mut self, phase: F) {
        let d = self.d;
        for flat in 0..self.amp.len() {
            let mut modes = [0usize; 4];
            let mut rest = flat;
            for k in (0..4).rev() {
                modes[k] = rest % d;
                rest /= d;
            }
            self.amp[flat] *= C64::from_polar(1.0, phase(modes));
        }
    }
}

/// `⟨x|n⟩` from the explicit Hermite polynomial.
fn number_state_wavefunction(n: usize, x: f64) -> f64 {
    let mut h_prev = 1.0;
    let mut h = 2.0 * x;
    let hn = match n {
        0 => 1.0,
        _ => {
            for k in 1..n {
                let next = 2.0 * x * h - 2.0 * k as f64 * h_prev;
                h_prev = h;
                h = next;
            }
            h
        }
    };
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    let norm = (f64::powi(2.0, n as i32) * fact * PI.sqrt()).sqrt();
    (-x * x / 2.0).exp() * hn / norm
}

/// Branch states after every optical element, one four-mode vector per
/// branch in [`Branch::ALL`] order.
fn evolve(n_total: usize, theta: f64, loss: &LossModel) -> [FourModeState; 4] {
    let d = n_total + 1;
    let mut state = FourModeState {
        d,
        amp: vec![C64::new(0.0, 0.0); d * d * d * d],
    };
    let start = state.index([n_total, 0, 0, 0]);
    state.amp[start] = C64::new(1.0, 0.0);

    // a₁† → (a₁† + i a₂†)/√2: exp(i π/4 (a₁†a₂ + a₂†a₁))
    let i = C64::new(0.0, 1.0);
    let mut gen = two_mode_generator(d, i, i);
    gen.scale(PI / 4.0);
    state.apply_pair(0, 1, &gen.expm());
    // undo the reflection phase on path 2
    state.apply_phase(|m| -PI / 2.0 * m[1] as f64);

    let loss_unitary = {
        let beta = loss.eta().sqrt().acos();
        // a† → cos β a† + sin β e†: exp(β (e†a − a†e)) = exp(β (b†a − a†b))
        let mut g = two_mode_generator(d, C64::new(-1.0, 0.0), C64::new(1.0, 0.0));
        g.scale(beta);
        g.expm()
    };
    let apply_loss = |s: &mut FourModeState| {
        s.apply_pair(0, 2, &loss_unitary);
        s.apply_pair(1, 3, &loss_unitary);
    };

    if loss.placement() == LossPlacement::BeforeKerr {
        apply_loss(&mut state);
    }
    Branch::ALL.map(|b| {
        let (s1, s2) = b.signs();
        let mut s = state.clone();
        s.apply_phase(|m| theta * (s1 * m[0] as f64 + s2 * m[1] as f64));
        if loss.placement() == LossPlacement::AfterKerr {
            apply_loss(&mut s);
        }
        s
    })
}

/// Reference joint density of detector pattern and quadratures `(x₁, x₂)`,
/// with the environment traced out.
pub fn brute_force_pattern_density(
    n_total: usize,
    theta: f64,
    sigma1: f64,
    sigma2: f64,
    pattern: Pattern,
    x1: f64,
    x2: f64,
    loss: &LossModel,
) -> Result<f64, Error> {
    Ok(BruteForce::new(n_total, theta, loss)?.density(sigma1, sigma2, pattern, x1, x2))
}

/// Evolved four-mode branch states, reusable across evaluation points.
#[derive(Debug, Clone)]
pub struct BruteForce {
    n_total: usize,
    branches: [FourModeState; 4],
}

impl BruteForce {
    pub fn new(n_total: usize, theta: f64, loss: &LossModel) -> Result<Self, Error> {
        if !(1..=MAX_REFERENCE_PHOTONS).contains(&n_total) {
            return Err(Error::PhotonNumber {
                n: n_total,
                max: MAX_REFERENCE_PHOTONS,
            });
        }
        Ok(Self {
            n_total,
            branches: evolve(n_total, theta, loss),
        })
    }

    /// Squared norm of one branch over the whole four-mode space.
    pub fn branch_norm(&self, branch: Branch) -> f64 {
        self.branches[branch as usize].amp.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn density(&self, sigma1: f64, sigma2: f64, pattern: Pattern, x1: f64, x2: f64) -> f64 {
        let d = self.n_total + 1;
        let g = detector_outcome(pattern, sigma1, sigma2).multipliers;
        let phi1: Vec<f64> = (0..d).map(|n| number_state_wavefunction(n, x1)).collect();
        let phi2: Vec<f64> = (0..d).map(|n| number_state_wavefunction(n, x2)).collect();
        let mut total = 0.0;
        for e1 in 0..d {
            for e2 in 0..d {
                let mut amp = C64::new(0.0, 0.0);
                for (gk, branch) in g.iter().zip(&self.branches) {
                    let mut proj = C64::new(0.0, 0.0);
                    for n1 in 0..d {
                        for n2 in 0..d {
                            proj += branch.amp[branch.index([n1, n2, e1, e2])] * (phi1[n1] * phi2[n2]);
                        }
                    }
                    amp += gk * proj;
                }
                total += amp.norm_sqr();
            }
        }
        total
    }
}
