//! Optical-channel and detector primitives shared by every protocol model.
//!
//! Converts link-budget inputs (total loss in dB, detector quantum efficiency,
//! coincidence/gate window, source rate) into the per-pulse and per-window
//! probabilities the rate models consume: channel transmissivity, the
//! noise-click yield per gate window, and the binary entropy function that
//! prices error correction and privacy amplification.
//!
//! The loss axis is total link loss from transmitter aperture to receiver
//! detector input; detector efficiency is a separate multiplicative factor so
//! either bookkeeping convention can be matched by the caller.

use crate::{valid_nonneg, valid_pos, ModelError};

/// Link-budget parameters for one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Total link loss in dB (transmitter aperture to receiver detector input).
    pub loss_db: f64,
    /// Receiver detector quantum efficiency, in `[0, 1]`.
    pub detector_efficiency: f64,
    /// Coincidence/gate window in seconds.
    pub gate_window: f64,
    /// Pulse or pair-event rate of the source, per second.
    pub source_rate: f64,
}

impl ChannelParams {
    pub fn new(
        loss_db: f64,
        detector_efficiency: f64,
        gate_window: f64,
        source_rate: f64,
    ) -> Result<Self, ModelError> {
        if !valid_nonneg(loss_db) {
            return Err(ModelError::out_of_range(
                "loss_db",
                loss_db,
                "finite and >= 0",
            ));
        }
        if !(0.0..=1.0).contains(&detector_efficiency) {
            return Err(ModelError::out_of_range(
                "detector_efficiency",
                detector_efficiency,
                "in [0, 1]",
            ));
        }
        if !valid_pos(gate_window) {
            return Err(ModelError::out_of_range(
                "gate_window",
                gate_window,
                "finite and > 0",
            ));
        }
        if !valid_pos(source_rate) {
            return Err(ModelError::out_of_range(
                "source_rate",
                source_rate,
                "finite and > 0",
            ));
        }
        Ok(Self {
            loss_db,
            detector_efficiency,
            gate_window,
            source_rate,
        })
    }

    /// Linear channel transmissivity `t = 10^(-loss_db/10)`, in `(0, 1]`.
    pub fn transmissivity(&self) -> f64 {
        10f64.powf(-self.loss_db / 10.0)
    }
}

/// Noise count rates of one detector site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorNoise {
    /// Dark counts per second.
    pub dark_rate: f64,
    /// Background (stray-light) counts per second.
    pub background_rate: f64,
}

impl DetectorNoise {
    pub fn new(dark_rate: f64, background_rate: f64) -> Result<Self, ModelError> {
        if !valid_nonneg(dark_rate) {
            return Err(ModelError::out_of_range(
                "dark_rate",
                dark_rate,
                "finite and >= 0",
            ));
        }
        if !valid_nonneg(background_rate) {
            return Err(ModelError::out_of_range(
                "background_rate",
                background_rate,
                "finite and >= 0",
            ));
        }
        Ok(Self {
            dark_rate,
            background_rate,
        })
    }

    /// Combined noise counts per second.
    pub fn total_rate(&self) -> f64 {
        self.dark_rate + self.background_rate
    }
}

/// Per-gate-window noise statistics.
///
/// `y0` is the probability of a noise click in one gate window; `e0` is the
/// error fraction of a noise click, fixed at 1/2 because noise clicks carry
/// no basis correlation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseYield {
    pub y0: f64,
    pub e0: f64,
}

impl NoiseYield {
    /// Build directly from a noise-click probability.
    pub fn new(y0: f64) -> Result<Self, ModelError> {
        if !(0.0..=1.0).contains(&y0) {
            return Err(ModelError::out_of_range("y0", y0, "in [0, 1]"));
        }
        Ok(Self { y0, e0: 0.5 })
    }

    /// A noiseless detector.
    pub fn noiseless() -> Self {
        Self { y0: 0.0, e0: 0.5 }
    }
}

/// Converts a loss in dB to a linear transmissivity `10^(-loss_db/10)`.
///
/// Strictly decreasing in `loss_db`; rejects negative losses.
pub fn db_to_transmissivity(loss_db: f64) -> Result<f64, ModelError> {
    if !valid_nonneg(loss_db) {
        return Err(ModelError::out_of_range(
            "loss_db",
            loss_db,
            "finite and >= 0",
        ));
    }
    Ok(10f64.powf(-loss_db / 10.0))
}

/// Inverse of [`db_to_transmissivity`]: `-10 * log10(t)` for `t` in `(0, 1]`.
pub fn transmissivity_to_db(transmissivity: f64) -> Result<f64, ModelError> {
    if !(transmissivity > 0.0 && transmissivity <= 1.0) {
        return Err(ModelError::out_of_range(
            "transmissivity",
            transmissivity,
            "in (0, 1]",
        ));
    }
    Ok(-10.0 * transmissivity.log10())
}

/// Noise-click yield for one gate window: `y0 = min(1, rate * window)`.
///
/// Saturation clamps at 1 rather than erroring; a blinded detector is a valid
/// degenerate operating point.
pub fn noise_yield(noise: &DetectorNoise, gate_window: f64) -> Result<NoiseYield, ModelError> {
    if !valid_pos(gate_window) {
        return Err(ModelError::out_of_range(
            "gate_window",
            gate_window,
            "finite and > 0",
        ));
    }
    let y0 = (noise.total_rate() * gate_window).min(1.0);
    Ok(NoiseYield { y0, e0: 0.5 })
}

/// Binary entropy `H2(x) = -x log2 x - (1-x) log2(1-x)` with `0 log2 0 = 0`.
pub fn binary_entropy(x: f64) -> Result<f64, ModelError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(ModelError::out_of_range("x", x, "in [0, 1]"));
    }
    Ok(h2(x))
}

/// Unchecked binary entropy for internal rate formulas; callers guarantee
/// `x` in `[0, 1]`.
pub(crate) fn h2(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn db_conversion_reference_points() {
        assert_eq!(db_to_transmissivity(0.0).unwrap(), 1.0);
        assert!((db_to_transmissivity(20.0).unwrap() - 0.01).abs() < 1e-17);
        assert!((db_to_transmissivity(70.0).unwrap() - 1.0e-7).abs() < 1e-21);
        assert!(db_to_transmissivity(-1.0).is_err());
    }

    #[test]
    fn db_conversion_strictly_decreasing() {
        let mut prev = f64::INFINITY;
        for i in 0..=200 {
            let t = db_to_transmissivity(i as f64 * 0.5).unwrap();
            assert!(t < prev, "not decreasing at {} dB", i as f64 * 0.5);
            prev = t;
        }
    }

    #[test]
    fn db_round_trip() {
        for i in 0..=1000 {
            let loss = i as f64 * 0.1;
            let back = transmissivity_to_db(db_to_transmissivity(loss).unwrap()).unwrap();
            assert!(
                (back - loss).abs() < 1e-9,
                "round trip at {loss} dB gave {back}"
            );
        }
    }

    #[test]
    fn noise_yield_ground_detector() {
        // 2500 dark + 1000 background counts/s over a 1 ns window.
        let ground = DetectorNoise::new(2500.0, 1000.0).unwrap();
        let y = noise_yield(&ground, 1e-9).unwrap();
        assert!((y.y0 - 3.5e-6).abs() < 1e-20);
        assert_eq!(y.e0, 0.5);
    }

    #[test]
    fn noise_yield_zero_and_saturated() {
        let quiet = DetectorNoise::new(0.0, 0.0).unwrap();
        assert_eq!(noise_yield(&quiet, 5e-9).unwrap().y0, 0.0);

        let blinded = DetectorNoise::new(1e9, 0.0).unwrap();
        assert_eq!(noise_yield(&blinded, 10e-9).unwrap().y0, 1.0);
    }

    #[test]
    fn noise_yield_linear_below_clamp() {
        let ground = DetectorNoise::new(2500.0, 1000.0).unwrap();
        for exp in 0..12 {
            let tau = 1e-12 * 10f64.powi(exp / 3);
            let y1 = noise_yield(&ground, tau).unwrap().y0;
            let y2 = noise_yield(&ground, 2.0 * tau).unwrap().y0;
            if y2 < 1.0 {
                assert_eq!(y2, 2.0 * y1, "doubling the window at tau = {tau}");
            }
        }
    }

    #[test]
    fn binary_entropy_reference_points() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        // Reference value evaluated with 50-digit arithmetic.
        assert!((binary_entropy(0.11).unwrap() - 0.499915958164528).abs() < 1e-12);
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.1).is_err());
    }

    #[test]
    fn binary_entropy_symmetric_and_bounded() {
        for i in 0..=1000 {
            let x = i as f64 * 1e-3;
            let a = binary_entropy(x).unwrap();
            let b = binary_entropy(1.0 - x).unwrap();
            assert!((a - b).abs() < 1e-12, "asymmetry at x = {x}");
            assert!((0.0..=1.0).contains(&a));
        }
    }

    #[test]
    fn channel_params_validation() {
        assert!(ChannelParams::new(20.0, 1.0, 1e-9, 1e8).is_ok());
        assert!(ChannelParams::new(-1.0, 1.0, 1e-9, 1e8).is_err());
        assert!(ChannelParams::new(20.0, 1.5, 1e-9, 1e8).is_err());
        assert!(ChannelParams::new(20.0, 1.0, 0.0, 1e8).is_err());
        assert!(ChannelParams::new(20.0, 1.0, 1e-9, 0.0).is_err());
        assert!(ChannelParams::new(f64::NAN, 1.0, 1e-9, 1e8).is_err());
    }

    #[test]
    fn transmissivity_in_unit_interval() {
        for loss in [0.0, 3.0, 20.0, 70.0, 100.0] {
            let ch = ChannelParams::new(loss, 1.0, 1e-9, 1e8).unwrap();
            let t = ch.transmissivity();
            assert!(t > 0.0 && t <= 1.0);
        }
    }
}
