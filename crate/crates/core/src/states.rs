//! Input number state, its coherent-ring resolution, and the two-mode state
//! leaving the balanced beam splitter.
//!
//! Quadratures are dimensionless with `x̂ = (â + â†)/√2`.

use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use num_complex::Complex64 as C64;
use num_traits::Float;

use crate::error::Error;
use crate::special_fn::{log_binomial, log_factorial};

/// Largest photon number accepted by state constructors.
pub const MAX_PHOTONS: usize = 200;

/// Coefficients over the fixed-`N` two-mode sector; entry `n` multiplies
/// `|N − n, n⟩` (mode 1 holds `N − n` photons, mode 2 holds `n`).
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeFockVector {
    total_photons: usize,
    coefficients: Vec<C64>,
    physical: bool,
}

impl TwoModeFockVector {
    /// Wraps `coefficients` (length `N + 1`). `physical` marks a state that
    /// is expected to be unit-norm; conditioned or weighted vectors pass
    /// `false` and carry their norm explicitly.
    pub fn new(coefficients: Vec<C64>, physical: bool) -> Result<Self, Error> {
        if coefficients.is_empty() {
            return Err(Error::Domain("two-mode vector needs at least one coefficient"));
        }
        if coefficients.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite("Fock coefficient"));
        }
        Ok(Self {
            total_photons: coefficients.len() - 1,
            coefficients,
            physical,
        })
    }

    pub fn total_photons(&self) -> usize {
        self.total_photons
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.coefficients
    }

    pub fn is_physical(&self) -> bool {
        self.physical
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `⟨x₁, x₂ | ψ⟩` given tables of `ψ_m(x₁)` and `ψ_n(x₂)` covering order `N`.
    pub fn position_amplitude(&self, psi_x1: &[f64], psi_x2: &[f64]) -> C64 {
        let n_tot = self.total_photons;
        self.coefficients
            .iter()
            .enumerate()
            .map(|(n, c)| c * (psi_x1[n_tot - n] * psi_x2[n]))
            .sum()
    }
}

/// `√(C(N, n) / 2^N)`, the beam-splitter amplitude magnitude.
pub(crate) fn split_magnitude(n_total: usize, n: usize) -> f64 {
    let lb = log_binomial(n_total, n).expect("index within range");
    (0.5 * (lb - n_total as f64 * core::f64::consts::LN_2)).exp()
}

fn check_photons(n: usize) -> Result<(), Error> {
    if n > MAX_PHOTONS {
        return Err(Error::PhotonNumber { n, max: MAX_PHOTONS });
    }
    Ok(())
}

/// `|N, 0⟩` after `a₁† → (a₁† + i a₂†)/√2`: coefficient `i^n √(C(N,n)/2^N)`.
pub fn split_number_state(n_total: usize) -> Result<TwoModeFockVector, Error> {
    check_photons(n_total)?;
    let coefficients = (0..=n_total)
        .map(|n| i_pow(n) * split_magnitude(n_total, n))
        .collect();
    TwoModeFockVector::new(coefficients, true)
}

/// Same state after the `−π/2` phase shift on path 2 that removes the
/// reflection factor: both modes then carry identical coherent amplitudes
/// on the coherent ring, and coefficients are real and positive.
pub fn compensated_split_state(n_total: usize) -> Result<TwoModeFockVector, Error> {
    check_photons(n_total)?;
    let coefficients = (0..=n_total)
        .map(|n| C64::new(split_magnitude(n_total, n), 0.0))
        .collect();
    TwoModeFockVector::new(coefficients, true)
}

pub(crate) fn i_pow(n: usize) -> C64 {
    match n % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// Log-polar value `exp(log_magnitude) · e^{i phase}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogPolar {
    pub log_magnitude: f64,
    pub phase: f64,
}

impl LogPolar {
    pub fn to_complex(self) -> C64 {
        C64::from_polar(self.log_magnitude.exp(), self.phase)
    }
}

/// Weight of the coherent state `|R e^{iφ}⟩` in the ring resolution of `|N⟩`:
/// `e^{R²/2} e^{−iNφ} √(N!) / (2π R^N)`, in log-polar form.
pub fn f_phi_log(n_total: usize, r: f64, phi: f64) -> Result<LogPolar, Error> {
    if n_total < 1 {
        return Err(Error::Domain("ring weight needs N >= 1"));
    }
    check_photons(n_total)?;
    if !r.is_finite() || !phi.is_finite() {
        return Err(Error::NonFinite("ring amplitude or phase"));
    }
    if r <= 0.0 {
        return Err(Error::Domain("ring amplitude R must be positive"));
    }
    let nf = n_total as f64;
    let log_magnitude = 0.5 * r * r + 0.5 * log_factorial(n_total) - (2.0 * PI).ln() - nf * r.ln();
    Ok(LogPolar {
        log_magnitude,
        phase: -nf * phi,
    })
}

pub fn f_phi(n_total: usize, r: f64, phi: f64) -> Result<C64, Error> {
    f_phi_log(n_total, r, phi).map(LogPolar::to_complex)
}

/// Log-polar `⟨x | α₀ e^{iφ}⟩`, the displaced Gaussian
/// `π^{−1/4} e^{i p₀ x} e^{−(x−x₀)²/2} e^{−i x₀ p₀/2}` with
/// `x₀ = √2 α₀ cos φ`, `p₀ = √2 α₀ sin φ`. The `e^{−i x₀ p₀/2}` phase is
/// required for superpositions of different coherent states.
pub fn coherent_wavefunction_log(alpha0: f64, phi: f64, x: f64) -> LogPolar {
    let x0 = SQRT_2 * alpha0 * phi.cos();
    let p0 = SQRT_2 * alpha0 * phi.sin();
    let d = x - x0;
    LogPolar {
        log_magnitude: -0.25 * PI.ln() - 0.5 * d * d,
        phase: p0 * x - 0.5 * x0 * p0,
    }
}

pub fn coherent_wavefunction(alpha0: f64, phi: f64, x: f64) -> Result<C64, Error> {
    if !alpha0.is_finite() || !phi.is_finite() || !x.is_finite() {
        return Err(Error::NonFinite("coherent wavefunction argument"));
    }
    if alpha0 < 0.0 {
        return Err(Error::Domain("coherent amplitude must be non-negative"));
    }
    Ok(coherent_wavefunction_log(alpha0, phi, x).to_complex())
}

/// Ring of coherent states resolving `|N⟩`, sampled on a uniform φ grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentRing {
    n_total: usize,
    radius: f64,
    phase_grid: usize,
}

impl CoherentRing {
    /// Grid size that resolves the `e^{−iNφ}` oscillation of the ring weight.
    pub fn default_grid(n_total: usize) -> usize {
        8 * n_total + 64
    }

    /// `R = √N` and the default grid.
    pub fn standard(n_total: usize) -> Result<Self, Error> {
        Self::new(n_total, (n_total as f64).sqrt(), Self::default_grid(n_total))
    }

    /// Any positive `R` and grid size are accepted; grids below
    /// [`CoherentRing::default_grid`] may alias, which
    /// [`reconstruct_number_state`] reports.
    pub fn new(n_total: usize, radius: f64, phase_grid: usize) -> Result<Self, Error> {
        if n_total < 1 {
            return Err(Error::Domain("coherent ring needs N >= 1"));
        }
        check_photons(n_total)?;
        if !radius.is_finite() || radius <= 0.0 {
            return Err(Error::Domain("ring amplitude R must be positive"));
        }
        if phase_grid < 1 {
            return Err(Error::Domain("phase grid must have at least one sample"));
        }
        Ok(Self {
            n_total,
            radius,
            phase_grid,
        })
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn phase_grid(&self) -> usize {
        self.phase_grid
    }

    /// Trapezoid samples `(φ_j, 2π/M)` on `[0, 2π)`.
    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> {
        let m = self.phase_grid;
        let h = 2.0 * PI / m as f64;
        (0..m).map(move |j| (h * j as f64, h))
    }
}

/// Single-mode state obtained by integrating the coherent ring.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    /// Fock coefficients `0..=cutoff`.
    pub coefficients: Vec<C64>,
    /// Mass beyond the cutoff.
    pub tail_mass: f64,
    /// `|c_N|² / Σ|c|²`.
    pub overlap: f64,
}

const RING_TAIL_LIMIT: f64 = 1e-12;
const RING_OVERLAP_FLOOR: f64 = 1.0 - 1e-10;

/// Integrates `∫₀^{2π} dφ f_φ |R e^{iφ}⟩` on the ring's trapezoid grid and
/// expands in the Fock basis up to `4N + 40` photons.
///
/// Fails with [`Error::Truncation`] when the mass beyond the cutoff
/// exceeds `1e−12` and with [`Error::Aliased`] when the reconstruction
/// differs from `|N⟩` by more than `1e−10` in fidelity.
pub fn reconstruct_number_state(ring: &CoherentRing) -> Result<Reconstruction, Error> {
    let n_total = ring.n_total;
    let r = ring.radius;
    let cutoff = 4 * n_total + 40;
    // c_m = Σ_j w f(φ_j) e^{−R²/2} R^m e^{i m φ_j} / √m!
    let coefficient = |m: usize| -> Result<C64, Error> {
        let log_coh = -0.5 * r * r + m as f64 * r.ln() - 0.5 * log_factorial(m);
        let mut acc = C64::new(0.0, 0.0);
        for (phi, w) in ring.samples() {
            let f = f_phi_log(n_total, r, phi)?;
            acc += C64::from_polar(w * (f.log_magnitude + log_coh).exp(), f.phase + m as f64 * phi);
        }
        Ok(acc)
    };
    let coefficients = (0..=cutoff).map(coefficient).collect::<Result<Vec<_>, _>>()?;

    // Beyond the cutoff the coefficient magnitudes fall like R^m/√m!.
    let mut tail_mass = 0.0;
    let mut m = cutoff + 1;
    loop {
        let c = coefficient(m)?.norm_sqr();
        tail_mass += c;
        if (c < 1e-40 && m > cutoff + 8) || m > cutoff + 400 {
            break;
        }
        m += 1;
    }
    if tail_mass > RING_TAIL_LIMIT {
        return Err(Error::Truncation { tail_mass });
    }

    let norm: f64 = coefficients.iter().map(|c| c.norm_sqr()).sum::<f64>() + tail_mass;
    let overlap = coefficients[n_total].norm_sqr() / norm;
    if overlap < RING_OVERLAP_FLOOR {
        return Err(Error::Aliased { overlap });
    }
    Ok(Reconstruction {
        coefficients,
        tail_mass,
        overlap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn vacuum_passes_through() {
        let s = split_number_state(0).unwrap();
        assert_eq!(s.coefficients(), &[C64::new(1.0, 0.0)]);
    }

    #[test]
    fn single_photon_split() {
        let s = split_number_state(1).unwrap();
        let h = 0.5f64.sqrt();
        assert_relative_eq!(s.coefficients()[0].re, h, max_relative = 1e-15);
        assert_relative_eq!(s.coefficients()[1].im, h, max_relative = 1e-15);
        assert_eq!(s.coefficients()[1].re, 0.0);
    }

    #[test]
    fn four_photon_split_magnitudes() {
        // (a1† + i a2†)^4 / √(4! 2^4) expanded by hand: C(4,n) i^n √((4−n)! n!) / √(4!·16)
        let s = split_number_state(4).unwrap();
        let expect = [0.25, 0.5, 0.612_372_435_695_794_5, 0.5, 0.25];
        for (n, (c, e)) in s.coefficients().iter().zip(expect).enumerate() {
            assert_relative_eq!(c.norm(), e, max_relative = 1e-14);
            let phase = i_pow(n);
            assert!((c / c.norm() - phase).norm() < 1e-15);
        }
    }

    #[test]
    fn split_preserves_norm() {
        for n in 0..=60 {
            let s = split_number_state(n).unwrap();
            assert!((s.norm_sqr() - 1.0).abs() < 1e-14, "n={n}");
        }
    }

    #[test]
    fn split_rejects_excess_photons() {
        assert!(matches!(split_number_state(201), Err(Error::PhotonNumber { .. })));
    }

    #[test]
    fn ring_weight_examples() {
        // e²·√24/(2π·16)
        let f = f_phi(4, 2.0, 0.0).unwrap();
        assert_relative_eq!(f.re, 0.360_076_462_779_525_8, max_relative = 1e-12);
        assert!(f.im.abs() < 1e-16);
        let m0 = f.norm();
        for k in 0..13 {
            let phi = 0.37 * k as f64;
            assert_relative_eq!(f_phi(4, 2.0, phi).unwrap().norm(), m0, max_relative = 1e-13);
        }
        assert!(f_phi(4, 0.0, 0.0).is_err());
        assert!(f_phi(4, -1.0, 0.0).is_err());
    }

    #[test]
    fn ring_weight_survives_large_arguments() {
        let f = f_phi_log(200, 30.0, 0.1).unwrap();
        assert!(f.log_magnitude.is_finite());
    }

    #[test]
    fn coherent_wavefunction_special_points() {
        let c = PI.powf(-0.25);
        for &x in &[-1.0, 0.0, 2.5] {
            let v = coherent_wavefunction(0.0, 1.3, x).unwrap();
            assert_relative_eq!(v.re, c * (-0.5 * x * x).exp(), max_relative = 1e-14);
            assert!(v.im.abs() < 1e-15);
        }
        let v = coherent_wavefunction(1.0, 0.0, SQRT_2).unwrap();
        assert_relative_eq!(v.re, c, max_relative = 1e-14);
        assert!(v.im.abs() < 1e-15);
        let v = coherent_wavefunction(1.0, PI / 2.0, 0.0).unwrap();
        assert_relative_eq!(v.re, c, max_relative = 1e-14);
        assert!(v.im.abs() < 1e-15);
        assert!(coherent_wavefunction(-1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn coherent_wavefunction_normalized() {
        let rule_for = |x0: f64| crate::special_fn::composite_gauss_legendre(20, 16, x0 - 10.0, x0 + 10.0).unwrap();
        for &(a, phi) in &[(0.0, 0.0), (1.0, 0.3), (2.5, 2.0), (4.0, -1.1)] {
            let x0 = SQRT_2 * a * f64::cos(phi);
            let r = rule_for(x0);
            let s = r.integrate(|x| coherent_wavefunction(a, phi, x).unwrap().norm_sqr());
            assert!((s - 1.0).abs() < 1e-10, "a={a} phi={phi} s={s}");
        }
    }

    #[test]
    fn ring_reconstructs_single_photon() {
        let ring = CoherentRing::new(1, 1.0, 128).unwrap();
        let rec = reconstruct_number_state(&ring).unwrap();
        assert!((rec.coefficients[1] - C64::new(1.0, 0.0)).norm() < 1e-12);
        for (m, c) in rec.coefficients.iter().enumerate() {
            if m != 1 {
                assert!(c.norm() < 1e-12, "m={m} {c}");
            }
        }
    }

    #[test]
    fn ring_reconstructs_four_photons() {
        let ring = CoherentRing::new(4, 2.0, 128).unwrap();
        let rec = reconstruct_number_state(&ring).unwrap();
        assert!(rec.overlap >= 1.0 - 1e-10);
    }

    #[test]
    fn coarse_ring_is_flagged() {
        let ring = CoherentRing::new(1, 1.0, 8).unwrap();
        match reconstruct_number_state(&ring) {
            Err(Error::Aliased { overlap }) => assert!(overlap < 1.0 - 1e-10),
            Err(Error::Truncation { .. }) => {}
            other => panic!("undersampled ring passed: {other:?}"),
        }
    }

    #[test]
    fn default_grid_reconstructs_up_to_24() {
        for n in [1, 2, 5, 12, 24] {
            let ring = CoherentRing::standard(n).unwrap();
            let rec = reconstruct_number_state(&ring).unwrap();
            assert!(rec.overlap >= 1.0 - 1e-10, "n={n} overlap={}", rec.overlap);
        }
    }
}
