//! Acceptance gates for the modelled QKD/PKD physics: cutoff separation,
//! the PKD factor-of-two, QBER bands and scaling, the optimized
//! mean-photon-number trajectory, Monte-Carlo/analytic agreement, optimizer
//! correctness against brute force, and output determinism.
//!
//! Each test prints one `[acceptance] <gate>: PASS` line (visible with
//! `cargo test --test acceptance -- --nocapture`) and enforces its runtime
//! budget.

use std::time::Instant;

use keyrate::report::{csv_string, mc_validate};
use keyrate::sweep::{optimal_ppm_mu, run_sweep};
use keyrate::{optimize_mu, OptimizeSpec, Protocol, RatePoint, SweepConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const QKD_PKD_PAIRS: [(Protocol, Protocol); 3] = [
    (Protocol::DecoyBb84, Protocol::PpmPkd),
    (Protocol::Bbm92, Protocol::HeraldedPkd),
    (Protocol::SpsBb84, Protocol::SpsPkd),
];

fn points_for(points: &[RatePoint], protocol: Protocol) -> Vec<&RatePoint> {
    points.iter().filter(|p| p.protocol == protocol).collect()
}

/// Every QKD protocol hits exactly zero rate at or below 70 dB, while its
/// PKD counterpart keeps a positive rate to a strictly higher loss.
#[test]
fn key_rate_cutoffs_separate_qkd_from_pkd() {
    let started = Instant::now();
    let cfg = SweepConfig {
        loss_stop_db: 90.0,
        ..SweepConfig::default()
    };
    let result = run_sweep(&cfg).unwrap();

    for (qkd, pkd) in QKD_PKD_PAIRS {
        let qkd_points = points_for(&result.points, qkd);
        let pkd_points = points_for(&result.points, pkd);

        let first_zero_qkd = qkd_points
            .iter()
            .find(|p| p.bits_per_pulse == 0.0)
            .unwrap_or_else(|| panic!("{qkd} never reaches zero by 90 dB"));
        assert!(
            first_zero_qkd.loss_db <= 70.0,
            "{qkd} first hits zero at {} dB, expected <= 70 dB",
            first_zero_qkd.loss_db
        );

        let last_positive = |pts: &[&RatePoint]| {
            pts.iter()
                .filter(|p| p.bits_per_pulse > 0.0)
                .map(|p| p.loss_db)
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let qkd_cutoff = last_positive(&qkd_points);
        let pkd_cutoff = last_positive(&pkd_points);
        assert!(
            pkd_cutoff > qkd_cutoff,
            "{pkd} cutoff {pkd_cutoff} dB must strictly exceed {qkd} cutoff {qkd_cutoff} dB"
        );
    }

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}, budget 5 s");
    println!("[acceptance] qkd/pkd cutoff separation: PASS ({elapsed:?})");
}

/// Removing basis sifting and the collective-attack privacy-amplification
/// term at least doubles the rate on single-photon and pair hardware, and
/// the doubling is tight (within [2.0, 2.3]) where the error rate is lowest.
#[test]
fn pkd_rate_at_least_doubles_qkd_rate() {
    let started = Instant::now();
    let result = run_sweep(&SweepConfig::default()).unwrap();

    let hardware = [
        (Protocol::SpsBb84, Protocol::SpsPkd),
        (Protocol::Bbm92, Protocol::HeraldedPkd),
    ];
    let mut lowest_qber: Option<(f64, f64)> = None; // (qber, ratio)
    for (qkd, pkd) in hardware {
        let qkd_points = points_for(&result.points, qkd);
        let pkd_points = points_for(&result.points, pkd);
        for (q, p) in qkd_points.iter().zip(&pkd_points) {
            assert_eq!(q.loss_db, p.loss_db);
            if q.bits_per_pulse > 0.0 {
                let ratio = p.bits_per_pulse / q.bits_per_pulse;
                assert!(
                    ratio >= 2.0 - 1e-9,
                    "{pkd}/{qkd} at {} dB: ratio {ratio} < 2",
                    q.loss_db
                );
                if lowest_qber.is_none_or(|(best, _)| q.qber < best) {
                    lowest_qber = Some((q.qber, ratio));
                }
            }
        }
    }
    let (qber, ratio) = lowest_qber.expect("no positive QKD point found");
    assert!(
        (2.0..=2.3).contains(&ratio),
        "at the lowest-QBER point (qber = {qber}) the ratio is {ratio}, expected in [2.0, 2.3]"
    );

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}, budget 1 s");
    println!(
        "[acceptance] pkd factor-of-two (tight ratio {ratio:.6} at qber {qber:.3e}): PASS ({elapsed:?})"
    );
}

/// Pair-source QBER stays within the expected band across 20-60 dB.
///
/// KNOWN FAILURE: with a 1e8/s pair rate and a 1 ns coincidence window, the
/// accidental-to-true ratio has a loss-independent floor of
/// r_p * tau = 0.1, which already puts the QBER floor at
/// 0.5 * 0.1 / 1.1 = 0.04545 > 0.045 before any detector noise, and dark
/// counts raise it further with loss (0.0456 at 20 dB, 0.39 at 60 dB). The
/// band below is therefore unsatisfiable for this hardware configuration;
/// the assertion is kept as specified rather than widened to mask it.
#[test]
fn pair_source_qber_within_band_20_to_60_db() {
    let started = Instant::now();
    let result = run_sweep(&SweepConfig::default()).unwrap();
    let mut violations = Vec::new();
    for p in &result.points {
        if p.protocol != Protocol::Bbm92 && p.protocol != Protocol::HeraldedPkd {
            continue;
        }
        if p.loss_db < 20.0 || p.loss_db > 60.0 {
            continue;
        }
        if !(0.025..=0.045).contains(&p.qber) {
            violations.push((p.protocol, p.loss_db, p.qber));
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}, budget 1 s");
    assert!(
        violations.is_empty(),
        "pair-source QBER leaves [0.025, 0.045] at {} of 82 points; \
         first: {:?}, worst: {:?} (accidental floor r_p*tau/2(1+r_p*tau) = 0.04545 \
         already exceeds the band's upper edge)",
        violations.len(),
        violations.first().unwrap(),
        violations
            .iter()
            .max_by(|a, b| a.2.total_cmp(&b.2))
            .unwrap()
    );
    println!("[acceptance] pair-source qber band: PASS ({elapsed:?})");
}

/// While accidentals are far below true coincidences, the pair-source QBER
/// scales linearly with the coincidence window: doubling the window doubles
/// the QBER within 5%.
#[test]
fn pair_qber_scales_linearly_with_window() {
    let started = Instant::now();
    // A 0.05 ns base window keeps accidentals ~200x below true coincidences.
    let qber_at = |tau: f64| {
        let cfg = SweepConfig {
            loss_start_db: 20.0,
            loss_stop_db: 20.0,
            gate_window: tau,
            protocols: vec![Protocol::Bbm92],
            ..SweepConfig::default()
        };
        run_sweep(&cfg).unwrap().points[0].qber
    };
    let q1 = qber_at(5e-11);
    let q2 = qber_at(1e-10);
    let ratio = q2 / q1;
    assert!(
        (1.9..=2.1).contains(&ratio),
        "QBER(2 tau)/QBER(tau) = {ratio}, expected in [1.9, 2.1]"
    );
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}, budget 1 s");
    println!(
        "[acceptance] qber linear in coincidence window (ratio {ratio:.4}): PASS ({elapsed:?})"
    );
}

/// The optimized PPM mean photon number stays in [0.40, 0.52] over the
/// 20-70 dB sweep and never increases with loss. Agreement with the
/// reference endpoint values (0.4701 at 20 dB, 0.4583 at 70 dB) is reported
/// but not gated, since the privacy-amplification form behind them is not
/// pinned down by this model.
#[test]
fn optimized_mean_photon_number_trajectory() {
    let started = Instant::now();
    let cfg = SweepConfig::default();
    let mut previous = f64::INFINITY;
    let mut mu_20 = 0.0;
    let mut mu_70 = 0.0;
    for loss in 20..=70 {
        let loss_db = loss as f64;
        let (_, mu) = optimal_ppm_mu(&cfg, loss_db).unwrap();
        assert!(
            (0.40..=0.52).contains(&mu),
            "mu_opt = {mu} at {loss_db} dB leaves [0.40, 0.52]"
        );
        assert!(
            mu <= previous,
            "mu_opt increased from {previous} to {mu} at {loss_db} dB"
        );
        previous = mu;
        if loss == 20 {
            mu_20 = mu;
        }
        if loss == 70 {
            mu_70 = mu;
        }
    }
    let delta_20 = (mu_20 - 0.4701) / 0.4701 * 100.0;
    let delta_70 = (mu_70 - 0.4583) / 0.4583 * 100.0;
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 10.0,
        "took {elapsed:?}, budget 10 s"
    );
    println!(
        "[acceptance] mu_opt trajectory (mu(20dB) = {mu_20:.6}, {delta_20:+.1}% vs 0.4701; \
         mu(70dB) = {mu_70:.6}, {delta_70:+.1}% vs 0.4583): PASS ({elapsed:?})"
    );
}

/// Monte-Carlo estimates at 1e7 trials match the analytic gain/error models
/// within three standard errors for each hardware family at 20, 40, 60 dB.
#[test]
fn monte_carlo_agrees_with_analytic_models() {
    let started = Instant::now();
    let cfg = SweepConfig::default();
    let protocols = [Protocol::DecoyBb84, Protocol::Bbm92, Protocol::SpsBb84];
    for (i, protocol) in protocols.into_iter().enumerate() {
        for (j, loss_db) in [20.0, 40.0, 60.0].into_iter().enumerate() {
            let seed = 0xACC0 + (i * 3 + j) as u64;
            let v = mc_validate(&cfg, protocol, loss_db, 10_000_000, seed).unwrap();
            assert!(
                v.passed(),
                "{protocol} at {loss_db} dB disagrees with its simulation:\n{}",
                v.render()
            );
        }
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 120.0,
        "took {elapsed:?}, budget 2 min"
    );
    println!("[acceptance] monte-carlo/analytic agreement: PASS ({elapsed:?})");
}

/// On 50 randomized smooth unimodal objectives the optimizer lands within
/// 10x tolerance of a one-million-point brute-force grid argmax.
#[test]
fn optimizer_matches_brute_force_grid() {
    let started = Instant::now();
    let spec = OptimizeSpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0b5e55ed);
    for case in 0..50 {
        let centre = rng.gen_range(0.05..1.95);
        let width = rng.gen_range(0.02..0.6);
        let amp = rng.gen_range(0.1..5.0);
        let objective = |x: f64| amp * (-((x - centre) / width).powi(2)).exp();

        let (mu, _) = optimize_mu(objective, &spec).unwrap();

        let n = 1_000_000usize;
        let mut best = (0.0f64, objective(0.0));
        for i in 1..=n {
            let x = 2.0 * i as f64 / n as f64;
            let v = objective(x);
            if v > best.1 {
                best = (x, v);
            }
        }
        assert!(
            (mu - best.0).abs() < 10.0 * spec.tolerance,
            "case {case}: optimizer {mu} vs brute force {}",
            best.0
        );
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 30.0,
        "took {elapsed:?}, budget 30 s"
    );
    println!("[acceptance] optimizer vs brute-force grid: PASS ({elapsed:?})");
}

/// Identical configurations produce byte-identical sweep CSV and identical
/// Monte-Carlo validation tables.
#[test]
fn deterministic_outputs() {
    let started = Instant::now();
    let cfg = SweepConfig::default();
    let first = csv_string(&run_sweep(&cfg).unwrap());
    let second = csv_string(&run_sweep(&cfg).unwrap());
    assert_eq!(first, second, "sweep CSV must be byte-identical");

    let t1 = mc_validate(&cfg, Protocol::Bbm92, 30.0, 1_000_000, 77)
        .unwrap()
        .render();
    let t2 = mc_validate(&cfg, Protocol::Bbm92, 30.0, 1_000_000, 77)
        .unwrap()
        .render();
    assert_eq!(
        t1, t2,
        "validation tables must be identical for equal seeds"
    );

    let elapsed = started.elapsed();
    println!("[acceptance] deterministic outputs: PASS ({elapsed:?})");
}
