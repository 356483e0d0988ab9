//! Kerr-phase branches, detector outcomes and joint quadrature amplitudes.
//!
//! # Conventions
//!
//! A branch is labelled by the Kerr sign applied to each beam: `s₁` for the
//! beam entering interferometer A, `s₂` for B. `+` means the single photon
//! took the path containing the Kerr medium (the path that also carries the
//! variable phase `σ`). Starting from the compensated split state
//! `Σ_n √(C(N,n)/2^N) |N−n, n⟩`, the beam phases `e^{iθ(s₁ n̂₁ + s₂ n̂₂)}` give
//!
//! ```text
//! ψ_k = p_k Σ_n q_k^n √(C(N,n)/2^N) |N−n, n⟩,   p_k = e^{i s₁ N θ},   q_k = e^{i (s₂ − s₁) θ}
//! ```
//!
//! | k | branch | p_k         | q_k        |
//! |---|--------|-------------|------------|
//! | 1 | `++`   | `e^{iNθ}`   | 1          |
//! | 2 | `+−`   | `e^{iNθ}`   | `e^{−2iθ}` |
//! | 3 | `−+`   | `e^{−iNθ}`  | `e^{+2iθ}` |
//! | 4 | `−−`   | `e^{−iNθ}`  | 1          |
//!
//! These were fixed by matching [`phase_integral_amplitude`], which
//! integrates the coherent-ring representation directly. With the Fock
//! index counting photons in mode 2, `q₂ = e^{−2iθ}` (not `e^{+2iθ}`).
//!
//! The `σ` phases, the reflection factors `i` and the overall `1/4` from the
//! two single-photon beam splitters live in [`DetectorOutcome`], so each
//! branch amplitude here is a unit-norm two-mode wavefunction.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use num_complex::Complex64 as C64;
use num_traits::Float;

use crate::error::Error;
use crate::special_fn::fill_hermite_functions;
use crate::states::{coherent_wavefunction_log, f_phi_log, split_magnitude, CoherentRing, TwoModeFockVector};

/// Kerr-sign history of the two beams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    PlusPlus,
    PlusMinus,
    MinusPlus,
    MinusMinus,
}

impl Branch {
    pub const ALL: [Branch; 4] = [Branch::PlusPlus, Branch::PlusMinus, Branch::MinusPlus, Branch::MinusMinus];

    /// 1-based index used in the tables above.
    pub fn from_index(k: usize) -> Result<Self, Error> {
        match k {
            1 => Ok(Branch::PlusPlus),
            2 => Ok(Branch::PlusMinus),
            3 => Ok(Branch::MinusPlus),
            4 => Ok(Branch::MinusMinus),
            _ => Err(Error::InvalidBranch(k)),
        }
    }

    pub fn index(self) -> usize {
        self as usize + 1
    }

    /// Kerr signs `(s₁, s₂)`.
    pub fn signs(self) -> (f64, f64) {
        match self {
            Branch::PlusPlus => (1.0, 1.0),
            Branch::PlusMinus => (1.0, -1.0),
            Branch::MinusPlus => (-1.0, 1.0),
            Branch::MinusMinus => (-1.0, -1.0),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Branch::PlusPlus => "++",
            Branch::PlusMinus => "+-",
            Branch::MinusPlus => "-+",
            Branch::MinusMinus => "--",
        }
    }

    /// Global phase `p_k`.
    pub fn prefactor(self, n_total: usize, theta: f64) -> C64 {
        C64::from_polar(1.0, self.signs().0 * n_total as f64 * theta)
    }

    /// Per-photon ratio `q_k`.
    pub fn ratio(self, theta: f64) -> C64 {
        let (s1, s2) = self.signs();
        C64::from_polar(1.0, (s2 - s1) * theta)
    }
}

/// One Kerr branch: `p_k Σ_n q_k^n √(C(N,n)/2^N) |N−n, n⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchState {
    pub branch: Branch,
    pub n_total: usize,
    pub theta: f64,
    pub prefactor: C64,
    pub ratio: C64,
    /// Includes `q_k^n` but not `p_k`.
    pub fock: TwoModeFockVector,
}

pub fn branch_state(n_total: usize, theta: f64, branch: Branch) -> Result<BranchState, Error> {
    if n_total < 1 {
        return Err(Error::Domain("branch states need N >= 1"));
    }
    if !theta.is_finite() {
        return Err(Error::NonFinite("Kerr phase"));
    }
    let base = crate::states::compensated_split_state(n_total)?;
    let ratio = branch.ratio(theta);
    let (s1, s2) = branch.signs();
    let coefficients = base
        .coefficients()
        .iter()
        .enumerate()
        // q^n evaluated as a single polar phase to keep |q^n| = 1 exactly
        .map(|(n, c)| c * C64::from_polar(1.0, (s2 - s1) * theta * n as f64))
        .collect();
    Ok(BranchState {
        branch,
        n_total,
        theta,
        prefactor: branch.prefactor(n_total, theta),
        ratio,
        fock: TwoModeFockVector::new(coefficients, true)?,
    })
}

/// Which pair of single-photon detectors fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pattern {
    /// `|1010⟩`
    D1D3,
    /// `|1001⟩`
    D1D4,
    /// `|0110⟩`
    D2D3,
    /// `|0101⟩`
    D2D4,
}

impl Pattern {
    pub const ALL: [Pattern; 4] = [Pattern::D1D3, Pattern::D1D4, Pattern::D2D3, Pattern::D2D4];

    /// `a = +1` for D1, `−1` for D2; `b = +1` for D3, `−1` for D4.
    pub fn chsh_signs(self) -> (i8, i8) {
        match self {
            Pattern::D1D3 => (1, 1),
            Pattern::D1D4 => (1, -1),
            Pattern::D2D3 => (-1, 1),
            Pattern::D2D4 => (-1, -1),
        }
    }

    pub fn ket(self) -> &'static str {
        match self {
            Pattern::D1D3 => "1010",
            Pattern::D1D4 => "1001",
            Pattern::D2D3 => "0110",
            Pattern::D2D4 => "0101",
        }
    }

    /// Pattern seen after exchanging the two arms.
    pub fn swapped(self) -> Self {
        match self {
            Pattern::D1D4 => Pattern::D2D3,
            Pattern::D2D3 => Pattern::D1D4,
            p => p,
        }
    }
}

/// Branch weights for one detector pattern at settings `(σ₁, σ₂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorOutcome {
    pub pattern: Pattern,
    pub chsh_signs: (i8, i8),
    /// Indexed like [`Branch::ALL`].
    pub multipliers: [C64; 4],
}

impl DetectorOutcome {
    pub fn combine(&self, branch_amplitudes: &[C64; 4]) -> C64 {
        self.multipliers
            .iter()
            .zip(branch_amplitudes)
            .map(|(g, a)| g * a)
            .sum()
    }
}

/// Multipliers from propagating each branch through the output beam
/// splitters: transmission contributes 1, reflection `i`, and the `σ` phase
/// sits on the `+` path of each interferometer.
pub fn detector_outcome(pattern: Pattern, sigma1: f64, sigma2: f64) -> DetectorOutcome {
    let i = C64::new(0.0, 1.0);
    let one = C64::new(1.0, 0.0);
    let e1 = C64::from_polar(1.0, sigma1);
    let e2 = C64::from_polar(1.0, sigma2);
    // Amplitude for a photon on path `+`/`−` of one interferometer to reach
    // the first (D1/D3) or second (D2/D4) detector, including the input
    // splitter (transmit to `+`, reflect to `−`).
    let arm = |plus: bool, first: bool, phase: C64| -> C64 {
        let entry = if plus { one } else { i };
        let exit = if plus == first { one } else { i };
        let shift = if plus { phase } else { one };
        entry * exit * shift * 0.5
    };
    let (a_first, b_first) = match pattern {
        Pattern::D1D3 => (true, true),
        Pattern::D1D4 => (true, false),
        Pattern::D2D3 => (false, true),
        Pattern::D2D4 => (false, false),
    };
    let mut multipliers = [C64::new(0.0, 0.0); 4];
    for (slot, branch) in multipliers.iter_mut().zip(Branch::ALL) {
        let (s1, s2) = branch.signs();
        *slot = arm(s1 > 0.0, a_first, e1) * arm(s2 > 0.0, b_first, e2);
    }
    DetectorOutcome {
        pattern,
        chsh_signs: pattern.chsh_signs(),
        multipliers,
    }
}

/// All four branches of one two-mode Fock sector, with real magnitudes and
/// an optional extra phase per branch.
///
/// `ψ_k(x₁,x₂) = extra_k p_k Σ_n q_k^n a_n ψ_{N−n}(x₁) ψ_n(x₂)`. The lossless
/// case has `a_n = √(C(N,n)/2^N)` and no extra phase; photon-loss records
/// use the same structure with reduced `N` and Kraus-weighted magnitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchFamily {
    pub n_total: usize,
    pub theta: f64,
    pub magnitudes: Vec<f64>,
    pub extra_phase: [C64; 4],
}

impl BranchFamily {
    pub fn lossless(n_total: usize, theta: f64) -> Self {
        Self {
            n_total,
            theta,
            magnitudes: (0..=n_total).map(|n| split_magnitude(n_total, n)).collect(),
            extra_phase: [C64::new(1.0, 0.0); 4],
        }
    }

    /// Evaluates all branches from Hermite tables of order `≥ N` at `x₁`, `x₂`.
    pub fn amplitudes(&self, psi_x1: &[f64], psi_x2: &[f64]) -> [C64; 4] {
        let n_tot = self.n_total;
        let q = C64::from_polar(1.0, 2.0 * self.theta);
        // q^n for the −+ branch; +− uses the conjugate because the
        // magnitudes and Hermite products are real.
        let mut diag = 0.0;
        let mut cross = C64::new(0.0, 0.0);
        let mut qn = C64::new(1.0, 0.0);
        for (n, &a) in self.magnitudes.iter().enumerate() {
            let b = a * psi_x1[n_tot - n] * psi_x2[n];
            diag += b;
            cross += qn * b;
            qn *= q;
            if n % 16 == 15 {
                qn = C64::from_polar(1.0, 2.0 * self.theta * (n + 1) as f64);
            }
        }
        let p_plus = C64::from_polar(1.0, n_tot as f64 * self.theta);
        let p_minus = p_plus.conj();
        [
            self.extra_phase[0] * p_plus * diag,
            self.extra_phase[1] * p_plus * cross.conj(),
            self.extra_phase[2] * p_minus * cross,
            self.extra_phase[3] * p_minus * diag,
        ]
    }
}

/// Scratch Hermite tables for repeated point evaluations.
#[derive(Debug, Default, Clone)]
pub struct HermiteScratch {
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
}

impl HermiteScratch {
    pub fn fill(&mut self, order: usize, x1: f64, x2: f64) -> Result<(), Error> {
        if !x1.is_finite() || !x2.is_finite() {
            return Err(Error::NonFinite("quadrature point"));
        }
        fill_hermite_functions(x1, order, &mut self.x1);
        fill_hermite_functions(x2, order, &mut self.x2);
        Ok(())
    }
}

/// `ψ_k(x₁, x₂)` by the Hermite-function sum over the branch's Fock vector.
pub fn hermite_amplitude(branch: &BranchState, x1: f64, x2: f64) -> Result<C64, Error> {
    let mut scratch = HermiteScratch::default();
    scratch.fill(branch.n_total, x1, x2)?;
    Ok(branch.prefactor * branch.fock.position_amplitude(&scratch.x1, &scratch.x2))
}

/// `ψ_k` for `k ∈ {++, −−}` via the Hermite addition theorem: the branch is
/// `|N⟩` in the sum mode `u = (x₁+x₂)/√2` times vacuum in `v = (x₁−x₂)/√2`.
/// Returns `None` for the cross branches.
pub fn closed_form_amplitude(branch: &BranchState, x1: f64, x2: f64) -> Result<Option<C64>, Error> {
    if !matches!(branch.branch, Branch::PlusPlus | Branch::MinusMinus) {
        return Ok(None);
    }
    let u = (x1 + x2) * FRAC_1_SQRT_2;
    let v = (x1 - x2) * FRAC_1_SQRT_2;
    let mut scratch = HermiteScratch::default();
    scratch.fill(branch.n_total, u, v)?;
    Ok(Some(branch.prefactor * (scratch.x1[branch.n_total] * scratch.x2[0])))
}

const PHASE_INTEGRAL_TOL: f64 = 1e-9;

/// `ψ_k(x₁, x₂)` straight from the coherent-ring representation:
///
/// ```text
/// ∫₀^{2π} dφ f_φ ⟨x₁| R/√2 e^{i(φ + s₁θ)}⟩ ⟨x₂| R/√2 e^{i(φ + s₂θ)}⟩
/// ```
///
/// on a uniform trapezoid grid of `phase_grid` points (≥ `8N + 64`).
/// The integral is repeated on a doubled grid; a change above `1e−9`
/// returns [`Error::PhaseIntegralNotConverged`].
pub fn phase_integral_amplitude(
    n_total: usize,
    r: f64,
    theta: f64,
    branch: Branch,
    x1: f64,
    x2: f64,
    phase_grid: usize,
) -> Result<C64, Error> {
    if n_total < 1 {
        return Err(Error::Domain("branch states need N >= 1"));
    }
    if phase_grid < CoherentRing::default_grid(n_total) {
        return Err(Error::Domain("phase grid must have at least 8N + 64 samples"));
    }
    if !theta.is_finite() || !x1.is_finite() || !x2.is_finite() {
        return Err(Error::NonFinite("phase integral argument"));
    }
    let coarse = ring_integral(n_total, r, theta, branch, x1, x2, phase_grid)?;
    let fine = ring_integral(n_total, r, theta, branch, x1, x2, 2 * phase_grid)?;
    let change = (fine - coarse).norm();
    if change > PHASE_INTEGRAL_TOL {
        return Err(Error::PhaseIntegralNotConverged { change });
    }
    Ok(fine)
}

fn ring_integral(
    n_total: usize,
    r: f64,
    theta: f64,
    branch: Branch,
    x1: f64,
    x2: f64,
    phase_grid: usize,
) -> Result<C64, Error> {
    let ring = CoherentRing::new(n_total, r, phase_grid)?;
    let (s1, s2) = branch.signs();
    let alpha = r / SQRT_2;
    let mut acc = C64::new(0.0, 0.0);
    for (phi, w) in ring.samples() {
        let f = f_phi_log(n_total, r, phi)?;
        let c1 = coherent_wavefunction_log(alpha, phi + s1 * theta, x1);
        let c2 = coherent_wavefunction_log(alpha, phi + s2 * theta, x2);
        let log_mag = f.log_magnitude + c1.log_magnitude + c2.log_magnitude;
        acc += C64::from_polar(w * log_mag.exp(), f.phase + c1.phase + c2.phase);
    }
    Ok(acc)
}

/// Amplitude of one detector pattern at `(x₁, x₂)`: `Σ_k g_k ψ_k`.
pub fn outcome_amplitude(
    n_total: usize,
    theta: f64,
    sigma1: f64,
    sigma2: f64,
    pattern: Pattern,
    x1: f64,
    x2: f64,
) -> Result<C64, Error> {
    if n_total < 1 {
        return Err(Error::Domain("branch states need N >= 1"));
    }
    let family = BranchFamily::lossless(n_total, theta);
    let mut scratch = HermiteScratch::default();
    scratch.fill(n_total, x1, x2)?;
    let amps = family.amplitudes(&scratch.x1, &scratch.x2);
    Ok(detector_outcome(pattern, sigma1, sigma2).combine(&amps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn branch_indices_round_trip() {
        for b in Branch::ALL {
            assert_eq!(Branch::from_index(b.index()).unwrap(), b);
        }
        assert_eq!(Branch::from_index(0), Err(Error::InvalidBranch(0)));
        assert_eq!(Branch::from_index(5), Err(Error::InvalidBranch(5)));
    }

    #[test]
    fn zero_kerr_phase_makes_branches_identical() {
        let reference = branch_state(5, 0.0, Branch::PlusPlus).unwrap();
        for b in Branch::ALL {
            let s = branch_state(5, 0.0, b).unwrap();
            assert_eq!(s.prefactor, c(1.0, 0.0));
            assert_eq!(s.fock, reference.fock);
        }
        for (n, coef) in reference.fock.coefficients().iter().enumerate() {
            assert!((coef.re - split_magnitude(5, n)).abs() < 1e-16);
        }
    }

    #[test]
    fn branch_ratios_and_norms() {
        let theta = 0.3;
        for b in Branch::ALL {
            let s = branch_state(7, theta, b).unwrap();
            assert!((s.ratio.norm() - 1.0).abs() < 1e-15);
            assert!((s.fock.norm_sqr() - 1.0).abs() < 1e-12);
        }
        let q2 = branch_state(7, theta, Branch::PlusMinus).unwrap().ratio;
        let q3 = branch_state(7, theta, Branch::MinusPlus).unwrap().ratio;
        assert!(close(q2, q3.conj(), 1e-15));
        assert!(close(q2, C64::from_polar(1.0, -2.0 * theta), 1e-15));
    }

    #[test]
    fn commensurate_kerr_phase_has_unit_prefactor() {
        let s = branch_state(24, PI / 4.0, Branch::PlusPlus).unwrap();
        assert!(close(s.prefactor, c(1.0, 0.0), 1e-12));
    }

    #[test]
    fn outcome_multipliers_match_propagated_state() {
        let (s1, s2) = (0.7, -1.9);
        let e = |x: f64| C64::from_polar(1.0, x);
        let i = c(0.0, 1.0);
        let g = detector_outcome(Pattern::D2D4, s1, s2).multipliers;
        let expect = [e(s1 + s2), e(s1), e(s2), c(1.0, 0.0)].map(|v| v * (i * i) * 0.25);
        for (a, b) in g.iter().zip(expect) {
            assert!(close(*a, b, 1e-15));
        }
        let g = detector_outcome(Pattern::D1D3, s1, s2).multipliers;
        let expect = [e(s1 + s2), -e(s1), -e(s2), c(1.0, 0.0)].map(|v| v * 0.25);
        for (a, b) in g.iter().zip(expect) {
            assert!(close(*a, b, 1e-15));
        }
        let g = detector_outcome(Pattern::D1D4, s1, s2).multipliers;
        let expect = [i * e(s1 + s2), i * e(s1), -i * e(s2), -i].map(|v| v * 0.25);
        for (a, b) in g.iter().zip(expect) {
            assert!(close(*a, b, 1e-15));
        }
        let g = detector_outcome(Pattern::D2D3, s1, s2).multipliers;
        let expect = [i * e(s1 + s2), -i * e(s1), i * e(s2), -i].map(|v| v * 0.25);
        for (a, b) in g.iter().zip(expect) {
            assert!(close(*a, b, 1e-15));
        }
    }

    #[test]
    fn multipliers_have_quarter_modulus() {
        for p in Pattern::ALL {
            for &(s1, s2) in &[(0.0, 0.0), (1.0, 2.0), (-3.0, 0.4)] {
                for g in detector_outcome(p, s1, s2).multipliers {
                    assert!((g.norm() - 0.25).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn multiplier_matrix_is_unitary_up_to_scale() {
        // Rows: patterns, columns: branches. 2·G must be unitary.
        let rows: Vec<[C64; 4]> = Pattern::ALL
            .iter()
            .map(|&p| detector_outcome(p, 0.4, 1.3).multipliers)
            .collect();
        for j in 0..4 {
            for k in 0..4 {
                let s: C64 = rows.iter().map(|r| r[j].conj() * r[k] * 4.0).sum();
                let expect = if j == k { 1.0 } else { 0.0 };
                assert!(close(s, c(expect, 0.0), 1e-14), "{j}{k} {s}");
            }
        }
    }

    #[test]
    fn single_photon_amplitude_vanishes_at_origin() {
        let s = branch_state(1, 0.0, Branch::PlusPlus).unwrap();
        assert!(hermite_amplitude(&s, 0.0, 0.0).unwrap().norm() < 1e-16);
        let v = phase_integral_amplitude(1, 1.0, 0.0, Branch::PlusPlus, 0.0, 0.0, 72).unwrap();
        assert!(v.norm() < 1e-10);
    }

    #[test]
    fn family_matches_branch_states() {
        let (n, theta) = (9, 0.41);
        let fam = BranchFamily::lossless(n, theta);
        let mut scratch = HermiteScratch::default();
        for &(x1, x2) in &[(0.3, -1.2), (2.0, 2.5), (-3.1, 0.8)] {
            scratch.fill(n, x1, x2).unwrap();
            let amps = fam.amplitudes(&scratch.x1, &scratch.x2);
            for (b, a) in Branch::ALL.iter().zip(amps) {
                let s = branch_state(n, theta, *b).unwrap();
                let h = hermite_amplitude(&s, x1, x2).unwrap();
                assert!(close(a, h, 1e-14), "{b:?}");
            }
        }
    }

    #[test]
    fn cross_branches_swap_under_mode_exchange() {
        let (n, theta) = (6, 0.77);
        let pm = branch_state(n, theta, Branch::PlusMinus).unwrap();
        let mp = branch_state(n, theta, Branch::MinusPlus).unwrap();
        for &(x1, x2) in &[(0.3, -1.2), (2.0, 2.5), (-3.1, 0.8)] {
            let a = hermite_amplitude(&pm, x1, x2).unwrap();
            let b = hermite_amplitude(&mp, x2, x1).unwrap();
            assert!(close(a, b, 1e-14));
        }
    }

    #[test]
    fn zero_theta_outcome_factorizes() {
        let (n, x1, x2) = (3, 0.9, 1.7);
        let base = branch_state(n, 0.0, Branch::PlusPlus).unwrap();
        let psi = hermite_amplitude(&base, x1, x2).unwrap();
        let i = c(0.0, 1.0);
        for &(s1, s2) in &[(0.0, 0.0), (0.5, 2.0), (-1.0, 3.0)] {
            let e1 = C64::from_polar(1.0, s1);
            let e2 = C64::from_polar(1.0, s2);
            // per-interferometer factors (+ path phase, − path reflection)
            let first = |e: C64| (e + i * i) * 0.5;
            let second = |e: C64| (e * i + i) * 0.5;
            for p in Pattern::ALL {
                let (a, b) = p.chsh_signs();
                let fa = if a > 0 { first(e1) } else { second(e1) };
                let fb = if b > 0 { first(e2) } else { second(e2) };
                let got = outcome_amplitude(n, 0.0, s1, s2, p, x1, x2).unwrap();
                assert!(close(got, fa * fb * psi, 1e-14), "{p:?}");
            }
        }
    }

    #[test]
    fn phase_integral_rejects_coarse_grid() {
        assert!(phase_integral_amplitude(4, 2.0, 0.1, Branch::PlusPlus, 0.0, 0.0, 20).is_err());
    }
}
