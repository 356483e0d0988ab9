use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use phasecat::bell::{
    fringe_visibility, reduce_angle, ChshAngles, HomodyneWindow, Postselection, TSIRELSON,
};
use phasecat::interferometer::{detector_outcome, outcome_amplitude, BranchFamily, HermiteScratch, Pattern};
use phasecat::loss::{lossy_postselection, LossModel};
use phasecat::special_fn::composite_gauss_legendre;
use phasecat::Error;

fn random_angles(rng: &mut ChaCha8Rng) -> ChshAngles {
    ChshAngles::new(
        rng.gen_range(-PI..PI),
        rng.gen_range(-PI..PI),
        rng.gen_range(-PI..PI),
        rng.gen_range(-PI..PI),
    )
}

fn random_window(rng: &mut ChaCha8Rng) -> HomodyneWindow {
    let x1m = rng.gen_range(-4.0..4.0);
    let x2m = rng.gen_range(-4.0..4.0);
    if rng.gen_bool(0.5) {
        HomodyneWindow::point(x1m, x2m).unwrap()
    } else {
        HomodyneWindow::new(x1m, x2m, rng.gen_range(0.01..0.6)).unwrap()
    }
}

/// CHSH value for one random draw, `None` when the window catches nothing.
fn draw(rng: &mut ChaCha8Rng, theta: Option<f64>) -> Option<f64> {
    let n = rng.gen_range(1..=8);
    let theta = theta.unwrap_or_else(|| rng.gen_range(0.0..PI));
    let angles = random_angles(rng);
    let post = Postselection::lossless(n, theta, random_window(rng)).unwrap();
    match post.chsh(&angles) {
        Ok(s) => Some(s),
        Err(Error::DegenerateWindow(_)) => None,
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn chsh_respects_tsirelson_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        if let Some(s) = draw(&mut rng, None) {
            worst = worst.max(s.abs());
        }
    }
    assert!(worst <= TSIRELSON + 1e-9, "{worst}");
}

#[test]
fn no_kerr_phase_means_no_violation() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1_000 {
        if let Some(s) = draw(&mut rng, Some(0.0)) {
            assert!(s.abs() <= 2.0 + 1e-9, "{s}");
        }
    }
}

#[test]
fn outcome_probabilities_are_complete() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in [1usize, 4, 24] {
        let half = (n as f64).sqrt() + 6.0;
        let rule = composite_gauss_legendre(10, 20, -half, half).unwrap();
        let family = BranchFamily::lossless(n, PI / 4.0);
        let (s1, s2) = (rng.gen_range(-PI..PI), rng.gen_range(-PI..PI));
        let outcomes = Pattern::ALL.map(|p| detector_outcome(p, s1, s2));
        let mut scratch = HermiteScratch::default();
        let mut total = 0.0;
        for (x1, w1) in rule.iter() {
            for (x2, w2) in rule.iter() {
                scratch.fill(n, x1, x2).unwrap();
                let amps = family.amplitudes(&scratch.x1, &scratch.x2);
                total += w1 * w2 * outcomes.iter().map(|o| o.combine(&amps).norm_sqr()).sum::<f64>();
            }
        }
        assert!((total - 1.0).abs() < 1e-6, "N={n}: {total}");
    }
}

#[test]
fn narrow_window_tends_to_point_density() {
    let eps = 1e-3;
    for (n, x1, x2) in [(1usize, 0.3, -0.8), (4, 2.0, 2.0), (24, 24f64.sqrt(), 24f64.sqrt())] {
        let point = Postselection::lossless(n, PI / 4.0, HomodyneWindow::point(x1, x2).unwrap()).unwrap();
        let narrow = Postselection::lossless(n, PI / 4.0, HomodyneWindow::new(x1, x2, eps).unwrap()).unwrap();
        for pattern in Pattern::ALL {
            let dens = point.probability(pattern, 0.4, 2.2);
            let prob = narrow.probability(pattern, 0.4, 2.2);
            let scale = point.acceptance() * eps * eps;
            assert!((prob - dens * eps * eps).abs() <= 1e-5 * scale, "N={n} {pattern:?}");
        }
    }
}

#[test]
fn loss_lowers_fringe_visibility() {
    let window = HomodyneWindow::point(2.0, 2.0).unwrap();
    let visibility = |eta: f64| {
        let loss = LossModel::from_eta(eta).unwrap();
        fringe_visibility(&lossy_postselection(4, PI / 4.0, window, &loss).unwrap(), 0.0).unwrap()
    };
    // records with different survivor numbers fringe at different offsets,
    // so the decay is only monotone while one loss event dominates
    let values: Vec<f64> = [1.0, 0.98, 0.95, 0.9].iter().map(|&e| visibility(e)).collect();
    for pair in values.windows(2) {
        assert!(pair[1] < pair[0], "{values:?}");
    }
    for eta in [0.7, 0.5, 0.3] {
        assert!(visibility(eta) < values[0]);
    }
}

#[test]
fn mode_exchange_swaps_settings_and_results() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let n = rng.gen_range(1..=10);
        let (s1, s2) = (rng.gen_range(-PI..PI), rng.gen_range(-PI..PI));
        let (x1, x2) = (rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
        for pattern in Pattern::ALL {
            let a = outcome_amplitude(n, 0.6, s1, s2, pattern, x1, x2).unwrap().norm_sqr();
            let b = outcome_amplitude(n, 0.6, s2, s1, pattern.swapped(), x2, x1).unwrap().norm_sqr();
            assert!((a - b).abs() <= 1e-12 * a.max(1e-300) + 1e-300, "{a} vs {b}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn window_probabilities_are_sub_normalized(
        n in 1usize..12,
        theta in 0.0..PI,
        x1m in -5.0..5.0f64,
        x2m in -5.0..5.0f64,
        dx in 0.01..1.0f64,
        s1 in -PI..PI,
        s2 in -PI..PI,
    ) {
        let post = Postselection::lossless(n, theta, HomodyneWindow::new(x1m, x2m, dx).unwrap()).unwrap();
        let probs = post.probabilities(s1, s2);
        prop_assert!(probs.iter().all(|&p| p >= -1e-15));
        prop_assert!(probs.iter().sum::<f64>() <= 1.0 + 1e-12);
        // the pattern sum does not depend on the settings
        prop_assert!((probs.iter().sum::<f64>() - post.acceptance()).abs() <= 1e-12);
    }

    #[test]
    fn correlator_is_bounded_and_periodic(
        n in 1usize..12,
        theta in 0.0..PI,
        x1m in -3.0..3.0f64,
        x2m in -3.0..3.0f64,
        s1 in -PI..PI,
        s2 in -PI..PI,
    ) {
        let post = Postselection::lossless(n, theta, HomodyneWindow::point(x1m, x2m).unwrap()).unwrap();
        if let Ok(e) = post.correlator(s1, s2) {
            prop_assert!((-1.0..=1.0).contains(&e));
            let shifted = post.correlator(s1 + 2.0 * PI, s2 - 2.0 * PI).unwrap();
            prop_assert!((e - shifted).abs() <= 1e-9);
        }
    }

    #[test]
    fn reduced_angles_land_in_half_open_interval(x in -100.0..100.0f64) {
        let r = reduce_angle(x);
        prop_assert!(r > -PI && r <= PI);
        prop_assert!(((x - r) / (2.0 * PI)).fract().abs() < 1e-9 || (1.0 - ((x - r) / (2.0 * PI)).fract().abs()) < 1e-9);
    }
}

#[test]
fn without_kerr_phase_the_fringe_ignores_the_remote_setting() {
    use phasecat::bell::fringe;
    let post = Postselection::lossless(4, 0.0, HomodyneWindow::point(1.5, 0.5).unwrap()).unwrap();
    let peak = |sigma2: f64| {
        fringe(&post, sigma2, 256)
            .into_iter()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap()
            .0
    };
    let reference = peak(0.0);
    for sigma2 in [0.7, 1.9, 2.8] {
        assert!((peak(sigma2) - reference).abs() < 1e-12, "σ₂={sigma2}");
    }
}
