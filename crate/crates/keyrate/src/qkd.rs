//! Asymptotic secret-key-rate models for the three QKD protocols:
//! decoy-state BB84 on a weak-coherent-pulse source, BBM92 on an entangled
//! pair source, and BB84 on an ideal single-photon source.
//!
//! All rates are asymptotic (infinite-key) and use the standard
//! infinite-decoy-limit estimates for the single-photon yield and error rate.
//! Negative analytic rates are clamped to zero and flagged so loss sweeps
//! traverse the cutoff smoothly instead of erroring.

use crate::channel::{h2, ChannelParams, DetectorNoise, NoiseYield};
use crate::{valid_nonneg, valid_pos, ModelError};

/// Protocol identifiers, in the canonical reporting order: the three QKD
/// protocols followed by their PKD counterparts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Protocol {
    /// Decoy-state BB84 on a weak coherent pulse source.
    DecoyBb84,
    /// Entanglement-based BB84 on a photon-pair source.
    Bbm92,
    /// BB84 on an ideal single-photon source.
    SpsBb84,
    /// Pulse-position-modulated PKD on a weak coherent pulse source.
    PpmPkd,
    /// Heralded-photon PKD on a photon-pair source.
    HeraldedPkd,
    /// Single-photon PKD.
    SpsPkd,
}

impl Protocol {
    pub const ALL: [Protocol; 6] = [
        Protocol::DecoyBb84,
        Protocol::Bbm92,
        Protocol::SpsBb84,
        Protocol::PpmPkd,
        Protocol::HeraldedPkd,
        Protocol::SpsPkd,
    ];

    /// Stable textual identifier used by the CLI and the CSV schema.
    pub fn id(&self) -> &'static str {
        match self {
            Protocol::DecoyBb84 => "decoy_bb84",
            Protocol::Bbm92 => "bbm92",
            Protocol::SpsBb84 => "sps_bb84",
            Protocol::PpmPkd => "ppm_pkd",
            Protocol::HeraldedPkd => "heralded_pkd",
            Protocol::SpsPkd => "sps_pkd",
        }
    }

    pub fn from_id(id: &str) -> Option<Protocol> {
        Protocol::ALL.iter().copied().find(|p| p.id() == id)
    }

    /// The PKD protocol sharing this QKD protocol's source hardware, if any.
    pub fn pkd_counterpart(&self) -> Option<Protocol> {
        match self {
            Protocol::DecoyBb84 => Some(Protocol::PpmPkd),
            Protocol::Bbm92 => Some(Protocol::HeraldedPkd),
            Protocol::SpsBb84 => Some(Protocol::SpsPkd),
            _ => None,
        }
    }

    pub fn is_pkd(&self) -> bool {
        matches!(
            self,
            Protocol::PpmPkd | Protocol::HeraldedPkd | Protocol::SpsPkd
        )
    }
}

impl std::fmt::Display for Protocol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

/// One evaluated operating point of one protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub protocol: Protocol,
    pub loss_db: f64,
    /// Mean photon number used at this point; `None` for sources where it
    /// does not apply (pair and single-photon sources).
    pub mu: Option<f64>,
    /// Quantum bit error rate, conditioned to `[0, 0.5]`.
    pub qber: f64,
    /// Secret bits per emitted pulse (or pair event), never negative.
    pub bits_per_pulse: f64,
    /// Secret bits per second: `bits_per_pulse * source_rate`.
    pub bits_per_second: f64,
    /// True when the analytic rate was negative and clamped to zero.
    pub clamped: bool,
}

impl RatePoint {
    /// Builds a point from a raw (possibly negative) per-pulse rate,
    /// clamping and flagging as needed.
    pub(crate) fn from_raw(
        protocol: Protocol,
        loss_db: f64,
        mu: Option<f64>,
        qber: f64,
        raw_bits_per_pulse: f64,
        source_rate: f64,
    ) -> Self {
        let clamped = raw_bits_per_pulse < 0.0;
        let bits_per_pulse = raw_bits_per_pulse.max(0.0);
        RatePoint {
            protocol,
            loss_db,
            mu,
            qber: qber.clamp(0.0, 0.5),
            bits_per_pulse,
            bits_per_second: bits_per_pulse * source_rate,
            clamped,
        }
    }

    /// A degenerate zero-rate point (no detections at all).
    pub(crate) fn zero(protocol: Protocol, loss_db: f64, mu: Option<f64>) -> Self {
        RatePoint {
            protocol,
            loss_db,
            mu,
            qber: 0.0,
            bits_per_pulse: 0.0,
            bits_per_second: 0.0,
            clamped: false,
        }
    }
}

/// Error-correction inefficiency `f_E >= 1` applied to the Shannon limit
/// `H2(QBER)` of the reconciliation cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorCorrectionModel {
    pub efficiency: f64,
}

impl ErrorCorrectionModel {
    pub fn new(efficiency: f64) -> Result<Self, ModelError> {
        if !(efficiency.is_finite() && efficiency >= 1.0) {
            return Err(ModelError::out_of_range(
                "f_ec",
                efficiency,
                "finite and >= 1",
            ));
        }
        Ok(Self { efficiency })
    }
}

impl Default for ErrorCorrectionModel {
    fn default() -> Self {
        Self { efficiency: 1.16 }
    }
}

/// Weak-coherent-pulse source running the decoy-state protocol.
///
/// Decoy and vacuum pulses contribute no key in the asymptotic limit; they
/// enter the rate only through the signal fraction `p_signal`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WcpDecoyParams {
    /// Mean photon number of signal pulses.
    pub mu_signal: f64,
    /// Mean photon number of decoy pulses.
    pub mu_decoy: f64,
    pub p_signal: f64,
    pub p_decoy: f64,
    pub p_vacuum: f64,
    /// Misalignment error probability of a signal detection (`e_det`).
    /// Zero under perfect visibility.
    pub misalignment: f64,
}

impl WcpDecoyParams {
    pub fn new(
        mu_signal: f64,
        mu_decoy: f64,
        p_signal: f64,
        p_decoy: f64,
        p_vacuum: f64,
        misalignment: f64,
    ) -> Result<Self, ModelError> {
        if !valid_nonneg(mu_decoy) {
            return Err(ModelError::out_of_range(
                "mu_decoy",
                mu_decoy,
                "finite and >= 0",
            ));
        }
        if !(mu_signal.is_finite() && mu_signal > mu_decoy) {
            return Err(ModelError::out_of_range(
                "mu_signal",
                mu_signal,
                "> mu_decoy",
            ));
        }
        for (name, p) in [
            ("p_signal", p_signal),
            ("p_decoy", p_decoy),
            ("p_vacuum", p_vacuum),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(ModelError::out_of_range(name, p, "in [0, 1]"));
            }
        }
        let sum = p_signal + p_decoy + p_vacuum;
        if (sum - 1.0).abs() > 1e-12 {
            return Err(ModelError::out_of_range(
                "p_signal + p_decoy + p_vacuum",
                sum,
                "= 1 within 1e-12",
            ));
        }
        if !(0.0..=0.5).contains(&misalignment) {
            return Err(ModelError::out_of_range(
                "misalignment",
                misalignment,
                "in [0, 0.5]",
            ));
        }
        Ok(Self {
            mu_signal,
            mu_decoy,
            p_signal,
            p_decoy,
            p_vacuum,
            misalignment,
        })
    }
}

impl Default for WcpDecoyParams {
    fn default() -> Self {
        Self {
            mu_signal: 0.8,
            mu_decoy: 0.1,
            p_signal: 0.5,
            p_decoy: 0.25,
            p_vacuum: 0.25,
            misalignment: 0.0,
        }
    }
}

/// Photon-pair source parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSourceParams {
    /// Raw pair-generation rate, pairs per second.
    pub pair_rate: f64,
    /// Total source-side (heralding) detection efficiency.
    pub herald_efficiency: f64,
    /// Polarisation-correlation error of a true coincidence; zero under
    /// perfect visibility.
    pub intrinsic_error: f64,
}

impl PairSourceParams {
    pub fn new(
        pair_rate: f64,
        herald_efficiency: f64,
        intrinsic_error: f64,
    ) -> Result<Self, ModelError> {
        if !valid_pos(pair_rate) {
            return Err(ModelError::out_of_range(
                "pair_rate",
                pair_rate,
                "finite and > 0",
            ));
        }
        if !(0.0..=1.0).contains(&herald_efficiency) {
            return Err(ModelError::out_of_range(
                "herald_efficiency",
                herald_efficiency,
                "in [0, 1]",
            ));
        }
        if !(0.0..=0.5).contains(&intrinsic_error) {
            return Err(ModelError::out_of_range(
                "intrinsic_error",
                intrinsic_error,
                "in [0, 0.5]",
            ));
        }
        Ok(Self {
            pair_rate,
            herald_efficiency,
            intrinsic_error,
        })
    }
}

impl Default for PairSourceParams {
    fn default() -> Self {
        Self {
            pair_rate: 1e8,
            herald_efficiency: 0.25,
            intrinsic_error: 0.0,
        }
    }
}

/// Per-pulse detection statistics of a prepare-and-measure link: overall
/// gain (click probability per pulse) and the error fraction of a click.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelStats {
    pub gain: f64,
    pub qber: f64,
}

/// Singles, coincidence, and accidental rates of a pair-source link, all in
/// events per second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairStats {
    /// Source-side singles rate `S1` (heralding detections plus noise).
    pub singles_source: f64,
    /// Receiver-side singles rate `S2` (transmitted photons plus noise).
    pub singles_receiver: f64,
    /// True coincidence rate `C`.
    pub true_rate: f64,
    /// Accidental coincidence rate `A = S1 * S2 * tau`.
    pub accidental_rate: f64,
    /// Error fraction of a detected coincidence.
    pub qber: f64,
}

impl PairStats {
    /// Total detected coincidence rate `C + A`, per second.
    pub fn coincidence_rate(&self) -> f64 {
        self.true_rate + self.accidental_rate
    }

    /// Detection probability per window of width `tau`: `(C + A) * tau`.
    pub fn window_gain(&self, tau: f64) -> f64 {
        (self.coincidence_rate() * tau).min(1.0)
    }
}

/// Overall gain and error rate of the decoy-state signal pulses.
///
/// With `eta = t * eta_det` and signal mean photon number `mu`:
/// `Q_mu = 1 - (1 - y0) e^(-eta mu)` and
/// `E_mu = (e0 y0 + e_det (1 - e^(-eta mu))) / Q_mu`.
pub fn decoy_bb84_stats(
    ch: &ChannelParams,
    noise: &NoiseYield,
    wcp: &WcpDecoyParams,
) -> ChannelStats {
    let eta = ch.transmissivity() * ch.detector_efficiency;
    // signal_hit = 1 - e^(-eta mu), evaluated without cancellation.
    let signal_hit = -(-eta * wcp.mu_signal).exp_m1();
    let absorb = 1.0 - signal_hit;
    let gain = signal_hit + noise.y0 * absorb;
    if gain <= 0.0 {
        return ChannelStats {
            gain: 0.0,
            qber: 0.0,
        };
    }
    let qber = (noise.e0 * noise.y0 + wcp.misalignment * signal_hit) / gain;
    ChannelStats { gain, qber }
}

/// Decoy-state BB84 secret-key rate.
///
/// Uses the infinite-decoy-limit single-photon estimates
/// `Y1 = y0 + eta - y0 eta`, `Q1 = Y1 mu e^(-mu)`,
/// `e1 = (e0 y0 + e_det eta) / Y1`, and the asymptotic key formula
///
/// ```text
/// R = q_sift * p_signal * max(0, Q1 (1 - H2(e1)) - Q_mu f_E H2(E_mu))
/// ```
///
/// with `q_sift = 1/2`. The reported QBER is the overall signal error `E_mu`.
pub fn decoy_bb84_rate(
    ch: &ChannelParams,
    noise: &NoiseYield,
    wcp: &WcpDecoyParams,
    ec: &ErrorCorrectionModel,
) -> RatePoint {
    let eta = ch.transmissivity() * ch.detector_efficiency;
    let mu = Some(wcp.mu_signal);

    let single_yield = noise.y0 + eta - noise.y0 * eta;
    if single_yield <= 0.0 {
        // Zero channel and zero noise: nothing is ever detected.
        return RatePoint::zero(Protocol::DecoyBb84, ch.loss_db, mu);
    }
    let stats = decoy_bb84_stats(ch, noise, wcp);
    if stats.gain <= 0.0 {
        return RatePoint::zero(Protocol::DecoyBb84, ch.loss_db, mu);
    }

    let single_gain = single_yield * wcp.mu_signal * (-wcp.mu_signal).exp();
    let single_error = (noise.e0 * noise.y0 + wcp.misalignment * eta) / single_yield;

    let q_sift = 0.5;
    let raw = q_sift
        * wcp.p_signal
        * (single_gain * (1.0 - h2(single_error)) - stats.gain * ec.efficiency * h2(stats.qber));
    RatePoint::from_raw(
        Protocol::DecoyBb84,
        ch.loss_db,
        mu,
        stats.qber,
        raw,
        ch.source_rate,
    )
}

/// Singles, coincidence, and accidental statistics of a pair-source link.
///
/// The source-side detector sees `S1 = r_p eta_s + n_src` singles per second,
/// the receiver `S2 = r_p t eta_det + n_rx`. True coincidences arrive at
/// `C = r_p eta_s t eta_det`; accidentals at `A = S1 S2 tau`. Accidentals are
/// indistinguishable from true coincidences at the detector, so they count
/// toward the detected rate and contribute errors with weight 1/2:
/// `QBER = (e0 A + e_intrinsic C) / (C + A)`.
pub fn pair_stats(
    ch: &ChannelParams,
    noise_src: &DetectorNoise,
    noise_rx: &DetectorNoise,
    pair: &PairSourceParams,
) -> PairStats {
    let t = ch.transmissivity();
    let singles_source = pair.pair_rate * pair.herald_efficiency + noise_src.total_rate();
    let singles_receiver = pair.pair_rate * t * ch.detector_efficiency + noise_rx.total_rate();
    let true_rate = pair.pair_rate * pair.herald_efficiency * t * ch.detector_efficiency;
    let accidental_rate = singles_source * singles_receiver * ch.gate_window;
    let detected = true_rate + accidental_rate;
    let qber = if detected > 0.0 {
        (0.5 * accidental_rate + pair.intrinsic_error * true_rate) / detected
    } else {
        0.0
    };
    PairStats {
        singles_source,
        singles_receiver,
        true_rate,
        accidental_rate,
        qber,
    }
}

/// BBM92 (entanglement-based BB84) secret-key rate.
///
/// ```text
/// R = q_sift * (C + A) * max(0, 1 - (1 + f_E) H2(QBER))
/// ```
///
/// per second, with `q_sift = 1/2` for basis reconciliation; per-pulse values
/// are normalised by the pair rate.
pub fn bbm92_rate(
    ch: &ChannelParams,
    noise_src: &DetectorNoise,
    noise_rx: &DetectorNoise,
    pair: &PairSourceParams,
    ec: &ErrorCorrectionModel,
) -> RatePoint {
    let stats = pair_stats(ch, noise_src, noise_rx, pair);
    let detected = stats.coincidence_rate();
    if detected <= 0.0 {
        return RatePoint::zero(Protocol::Bbm92, ch.loss_db, None);
    }
    let q_sift = 0.5;
    let raw_bps = q_sift * detected * (1.0 - (1.0 + ec.efficiency) * h2(stats.qber));
    let raw_bpp = raw_bps / pair.pair_rate;
    RatePoint::from_raw(
        Protocol::Bbm92,
        ch.loss_db,
        None,
        stats.qber,
        raw_bpp,
        pair.pair_rate,
    )
}

/// Gain and error rate of an ideal single-photon link.
///
/// `Q = 1 - (1 - y0)(1 - eta)`; errors come only from noise clicks with no
/// surviving photon: `E = e0 y0 (1 - eta) / Q`.
pub fn sps_stats(ch: &ChannelParams, noise: &NoiseYield) -> ChannelStats {
    let eta = ch.transmissivity() * ch.detector_efficiency;
    // 1 - (1 - y0)(1 - eta), expanded to avoid cancellation at high loss.
    let gain = noise.y0 + eta - noise.y0 * eta;
    if gain <= 0.0 {
        return ChannelStats {
            gain: 0.0,
            qber: 0.0,
        };
    }
    let qber = noise.e0 * noise.y0 * (1.0 - eta) / gain;
    ChannelStats { gain, qber }
}

/// BB84 on an ideal single-photon source: no decoy states are needed because
/// multi-photon pulses never occur.
///
/// ```text
/// R = q_sift * Q * max(0, 1 - f_E H2(E) - H2(E))
/// ```
pub fn sps_bb84_rate(
    ch: &ChannelParams,
    noise: &NoiseYield,
    ec: &ErrorCorrectionModel,
) -> RatePoint {
    let stats = sps_stats(ch, noise);
    if stats.gain <= 0.0 {
        return RatePoint::zero(Protocol::SpsBb84, ch.loss_db, None);
    }
    let q_sift = 0.5;
    let raw = q_sift * stats.gain * (1.0 - ec.efficiency * h2(stats.qber) - h2(stats.qber));
    RatePoint::from_raw(
        Protocol::SpsBb84,
        ch.loss_db,
        None,
        stats.qber,
        raw,
        ch.source_rate,
    )
}
