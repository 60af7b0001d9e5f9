//! Key-rate models for the three PKD protocols: relaxed-threat-model
//! counterparts of the QKD protocols that use a single encoding basis (no
//! sifting) and apply privacy amplification only against multi-photon
//! leakage.
//!
//! The pair-source and single-photon PKD protocols share their detection
//! statistics with BBM92 and single-photon BB84; only the post-processing
//! differs. The pulse-position-modulated WCP protocol prices multi-photon
//! leakage through a privacy-amplification factor `g(zeta)` of the combined
//! variable `zeta = mu (1 - t)`.

use crate::channel::{h2, ChannelParams, DetectorNoise, NoiseYield};
use crate::qkd::{
    pair_stats, sps_stats, ChannelStats, ErrorCorrectionModel, PairSourceParams, Protocol,
    RatePoint,
};
use crate::{valid_nonneg, ModelError};

/// Privacy-amplification model `g(zeta)` for the PPM protocol.
///
/// Pluggable so an alternative analytic form can be substituted without
/// touching callers. The default `zeta * e^(-2 zeta)` reproduces the
/// multi-photon tagging cost of a WCP source without decoy states and puts
/// the optimal mean photon number near 1/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PaModel {
    /// `g(zeta) = zeta * e^(-2 zeta)`.
    #[default]
    ZetaExp2,
}

impl PaModel {
    pub fn id(&self) -> &'static str {
        match self {
            PaModel::ZetaExp2 => "zeta_exp2",
        }
    }

    pub fn from_id(id: &str) -> Option<PaModel> {
        match id {
            "zeta_exp2" => Some(PaModel::ZetaExp2),
            _ => None,
        }
    }

    pub fn evaluate(&self, zeta: f64) -> f64 {
        match self {
            PaModel::ZetaExp2 => zeta * (-2.0 * zeta).exp(),
        }
    }
}

/// PPM PKD operating point: the optimised combination `zeta = mu (1 - t)`
/// and the privacy-amplification model evaluating it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PpmPkdParams {
    pub zeta: f64,
    pub pa_model: PaModel,
}

impl PpmPkdParams {
    pub fn new(zeta: f64, pa_model: PaModel) -> Result<Self, ModelError> {
        if !valid_nonneg(zeta) {
            return Err(ModelError::out_of_range("zeta", zeta, "finite and >= 0"));
        }
        Ok(Self { zeta, pa_model })
    }
}

/// Click statistics of the PPM link: per-slot click probability
/// `p_click + y0` with `p_click = mu t eta`, and the noise-driven QBER
/// `e0 y0 / (p_click + y0)` (a noise click in the wrong time slot flips the
/// bit with probability 1/2).
pub fn ppm_stats(ch: &ChannelParams, noise: &NoiseYield, mu: f64) -> ChannelStats {
    let p_click = mu * ch.transmissivity() * ch.detector_efficiency;
    let gain = (p_click + noise.y0).min(1.0);
    let qber = if gain > 0.0 {
        (noise.e0 * noise.y0 / gain).clamp(0.0, 0.5)
    } else {
        0.0
    };
    ChannelStats { gain, qber }
}

/// Pulse-position-modulated PKD on a WCP source.
///
/// ```text
/// R = g(zeta) * t/(1-t) * eta * max(0, 1 - H2(QBER) f_E) * f_source
/// ```
///
/// bits per second, where `eta` is the detector efficiency and
/// `mu = zeta / (1 - t)`. Requires `0 < t < 1` (strictly positive loss).
pub fn ppm_pkd_rate(
    ch: &ChannelParams,
    noise: &NoiseYield,
    params: &PpmPkdParams,
    ec: &ErrorCorrectionModel,
) -> Result<RatePoint, ModelError> {
    let t = ch.transmissivity();
    if t >= 1.0 {
        return Err(ModelError::out_of_range(
            "transmissivity",
            t,
            "< 1 (loss_db must be > 0 for the PPM protocol)",
        ));
    }
    let mu = params.zeta / (1.0 - t);
    let stats = ppm_stats(ch, noise, mu);
    let ec_factor = 1.0 - h2(stats.qber) * ec.efficiency;
    let envelope = params.pa_model.evaluate(params.zeta)
        * (t / (1.0 - t))
        * ch.detector_efficiency
        * ch.source_rate;
    let raw_bps = envelope * ec_factor;
    let raw_bpp = raw_bps / ch.source_rate;
    Ok(RatePoint::from_raw(
        Protocol::PpmPkd,
        ch.loss_db,
        Some(mu),
        stats.qber,
        raw_bpp,
        ch.source_rate,
    ))
}

/// Heralded-photon PKD on a pair source.
///
/// Shares the coincidence statistics of [`crate::qkd::bbm92_rate`] exactly,
/// but with no basis sifting and no privacy-amplification entropy term:
///
/// ```text
/// R = (C + A) * max(0, 1 - f_E H2(QBER))
/// ```
pub fn heralded_pkd_rate(
    ch: &ChannelParams,
    noise_src: &DetectorNoise,
    noise_rx: &DetectorNoise,
    pair: &PairSourceParams,
    ec: &ErrorCorrectionModel,
) -> RatePoint {
    let stats = pair_stats(ch, noise_src, noise_rx, pair);
    let detected = stats.coincidence_rate();
    if detected <= 0.0 {
        return RatePoint::zero(Protocol::HeraldedPkd, ch.loss_db, None);
    }
    let raw_bps = detected * (1.0 - ec.efficiency * h2(stats.qber));
    let raw_bpp = raw_bps / pair.pair_rate;
    RatePoint::from_raw(
        Protocol::HeraldedPkd,
        ch.loss_db,
        None,
        stats.qber,
        raw_bpp,
        pair.pair_rate,
    )
}

/// Single-photon PKD: single-photon BB84 statistics with no sifting factor
/// and no privacy-amplification term.
///
/// ```text
/// R = Q * max(0, 1 - f_E H2(E))
/// ```
pub fn sps_pkd_rate(
    ch: &ChannelParams,
    noise: &NoiseYield,
    ec: &ErrorCorrectionModel,
) -> RatePoint {
    let stats = sps_stats(ch, noise);
    if stats.gain <= 0.0 {
        return RatePoint::zero(Protocol::SpsPkd, ch.loss_db, None);
    }
    let raw = stats.gain * (1.0 - ec.efficiency * h2(stats.qber));
    RatePoint::from_raw(
        Protocol::SpsPkd,
        ch.loss_db,
        None,
        stats.qber,
        raw,
        ch.source_rate,
    )
}
