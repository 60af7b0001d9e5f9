//! Serialization of sweep results to CSV and of Monte-Carlo validations to
//! pass/fail tables.
//!
//! Floating-point values are written in Rust's shortest round-trip decimal
//! form, so re-parsing a CSV reproduces every field exactly and identical
//! inputs produce byte-identical output.

use std::io::{self, Write};

use crate::channel::noise_yield;
use crate::mc::{simulate_pairs, simulate_sps, simulate_wcp, McConfig, McError, McScenario};
use crate::pkd::ppm_stats;
use crate::qkd::{decoy_bb84_stats, pair_stats, sps_stats, Protocol};
use crate::sweep::{optimal_ppm_mu, SweepConfig, SweepError, SweepResult};

/// Header of the sweep CSV schema.
pub const CSV_HEADER: &str = "protocol,loss_db,mu,qber,bits_per_pulse,bits_per_second,clamped";

/// Largest |z| accepted when comparing empirical to analytic statistics.
pub const Z_THRESHOLD: f64 = 3.0;

#[derive(Debug, thiserror::Error)]
pub enum EmitError {
    #[error("write failed after {bytes_written} bytes: {source}")]
    Io {
        bytes_written: u64,
        #[source]
        source: io::Error,
    },
}

struct CountingWriter<W: Write> {
    inner: W,
    bytes: u64,
}

impl<W: Write> CountingWriter<W> {
    fn write_all(&mut self, buf: &[u8]) -> Result<(), EmitError> {
        match self.inner.write_all(buf) {
            Ok(()) => {
                self.bytes += buf.len() as u64;
                Ok(())
            }
            Err(source) => Err(EmitError::Io {
                bytes_written: self.bytes,
                source,
            }),
        }
    }
}

/// Writes `header + one row per point + trailing newline` to `sink`.
///
/// Row order follows the result's point order; write failures report how
/// many bytes were already written.
pub fn emit_csv<W: Write>(result: &SweepResult, sink: W) -> Result<(), EmitError> {
    let mut w = CountingWriter {
        inner: sink,
        bytes: 0,
    };
    w.write_all(CSV_HEADER.as_bytes())?;
    w.write_all(b"\n")?;
    let mut row = String::new();
    for p in &result.points {
        row.clear();
        row.push_str(p.protocol.id());
        row.push(',');
        row.push_str(&p.loss_db.to_string());
        row.push(',');
        if let Some(mu) = p.mu {
            row.push_str(&mu.to_string());
        }
        row.push(',');
        row.push_str(&p.qber.to_string());
        row.push(',');
        row.push_str(&p.bits_per_pulse.to_string());
        row.push(',');
        row.push_str(&p.bits_per_second.to_string());
        row.push(',');
        row.push_str(if p.clamped { "true" } else { "false" });
        row.push('\n');
        w.write_all(row.as_bytes())?;
    }
    Ok(())
}

/// [`emit_csv`] into a `String`.
pub fn csv_string(result: &SweepResult) -> String {
    let mut buf = Vec::new();
    emit_csv(result, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV output is ASCII")
}

/// One analytic-vs-empirical comparison row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McComparison {
    pub metric: &'static str,
    pub analytic: f64,
    pub empirical: f64,
    /// Standard error used for the z-score.
    pub se: f64,
    pub z: f64,
}

/// Result of validating one protocol at one loss against its simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct McValidation {
    pub protocol: Protocol,
    pub loss_db: f64,
    pub n_pulses: u64,
    pub seed: u64,
    pub rng: &'static str,
    pub n_clicks: u64,
    pub rows: Vec<McComparison>,
}

impl McValidation {
    pub fn max_abs_z(&self) -> f64 {
        self.rows.iter().map(|r| r.z.abs()).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.max_abs_z() <= Z_THRESHOLD
    }

    /// Deterministic pass/fail table.
    pub fn render(&self) -> String {
        let mut out = format!(
            "protocol={} loss_db={} n={} seed={} rng={} clicks={}\n",
            self.protocol.id(),
            self.loss_db,
            self.n_pulses,
            self.seed,
            self.rng,
            self.n_clicks
        );
        out.push_str("metric  analytic  empirical  se  z  verdict\n");
        for r in &self.rows {
            let verdict = if r.z.abs() <= Z_THRESHOLD {
                "PASS"
            } else {
                "FAIL"
            };
            out.push_str(&format!(
                "{}  {}  {}  {}  {}  {}\n",
                r.metric, r.analytic, r.empirical, r.se, r.z, verdict
            ));
        }
        out.push_str(&format!(
            "result: {} (max |z| = {}, threshold {})\n",
            if self.passed() { "PASS" } else { "FAIL" },
            self.max_abs_z(),
            Z_THRESHOLD
        ));
        out
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ValidateError {
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error(transparent)]
    Mc(#[from] McError),
    #[error("{0}")]
    Model(#[from] crate::ModelError),
}

/// Compares the one-sample z-score of `empirical` against `analytic`.
///
/// The gain test uses the analytic probability in the standard error (a
/// one-sample proportion test, stable at low counts); the QBER test uses the
/// analytic error fraction over the observed click count. With no clicks
/// there is no error information and the QBER row is vacuous (z = 0).
fn z_rows(
    analytic_gain: f64,
    analytic_qber: f64,
    est_gain: f64,
    est_qber: f64,
    n: u64,
    n_clicks: u64,
) -> Vec<McComparison> {
    let gain_se = (analytic_gain * (1.0 - analytic_gain) / n as f64).sqrt();
    let gain_z = if gain_se > 0.0 {
        (est_gain - analytic_gain) / gain_se
    } else if est_gain == analytic_gain {
        0.0
    } else {
        f64::INFINITY
    };
    let qber_se = if n_clicks > 0 {
        (analytic_qber * (1.0 - analytic_qber) / n_clicks as f64).sqrt()
    } else {
        0.0
    };
    let qber_z = if qber_se > 0.0 {
        (est_qber - analytic_qber) / qber_se
    } else if est_qber == analytic_qber {
        0.0
    } else {
        f64::INFINITY
    };
    vec![
        McComparison {
            metric: "gain",
            analytic: analytic_gain,
            empirical: est_gain,
            se: gain_se,
            z: gain_z,
        },
        McComparison {
            metric: "qber",
            analytic: analytic_qber,
            empirical: est_qber,
            se: qber_se,
            z: qber_z,
        },
    ]
}

/// Runs the protocol-appropriate simulation and compares its empirical gain
/// and QBER to the analytic model at the same operating point.
pub fn mc_validate(
    cfg: &SweepConfig,
    protocol: Protocol,
    loss_db: f64,
    n_pulses: u64,
    seed: u64,
) -> Result<McValidation, ValidateError> {
    cfg.validate()?;
    let ch = crate::channel::ChannelParams::new(
        loss_db,
        cfg.detector_efficiency,
        cfg.gate_window,
        cfg.source_rate,
    )?;
    let rx_yield = noise_yield(&cfg.ground_noise, cfg.gate_window)?;

    let (est, analytic_gain, analytic_qber) = match protocol {
        Protocol::DecoyBb84 => {
            let mc = McConfig::new(n_pulses, seed, McScenario::Wcp)?;
            let stats = decoy_bb84_stats(&ch, &rx_yield, &cfg.wcp);
            let est = simulate_wcp(&mc, &ch, &rx_yield, cfg.wcp.mu_signal, cfg.wcp.misalignment)?;
            (est, stats.gain, stats.qber)
        }
        Protocol::PpmPkd => {
            let (_, mu) = optimal_ppm_mu(cfg, loss_db)?;
            let mc = McConfig::new(n_pulses, seed, McScenario::Wcp)?;
            let stats = ppm_stats(&ch, &rx_yield, mu);
            let est = simulate_wcp(&mc, &ch, &rx_yield, mu, 0.0)?;
            (est, stats.gain, stats.qber)
        }
        Protocol::Bbm92 | Protocol::HeraldedPkd => {
            let mc = McConfig::new(n_pulses, seed, McScenario::Pair)?;
            let stats = pair_stats(&ch, &cfg.space_noise, &cfg.ground_noise, &cfg.pair);
            let est = simulate_pairs(&mc, &ch, &cfg.pair, &cfg.space_noise, &cfg.ground_noise)?;
            (est, stats.window_gain(cfg.gate_window), stats.qber)
        }
        Protocol::SpsBb84 | Protocol::SpsPkd => {
            let mc = McConfig::new(n_pulses, seed, McScenario::Sps)?;
            let stats = sps_stats(&ch, &rx_yield);
            let est = simulate_sps(&mc, &ch, &rx_yield)?;
            (est, stats.gain, stats.qber)
        }
    };

    Ok(McValidation {
        protocol,
        loss_db,
        n_pulses,
        seed,
        rng: est.rng,
        n_clicks: est.n_clicks,
        rows: z_rows(
            analytic_gain,
            analytic_qber,
            est.gain_hat,
            est.qber_hat,
            n_pulses,
            est.n_clicks,
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::run_sweep;

    #[test]
    fn single_point_csv_is_header_plus_one_row() {
        let cfg = SweepConfig {
            loss_start_db: 30.0,
            loss_stop_db: 30.0,
            protocols: vec![Protocol::SpsBb84],
            ..SweepConfig::default()
        };
        let result = run_sweep(&cfg).unwrap();
        let text = csv_string(&result);
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with(CSV_HEADER));
        assert!(text.ends_with('\n'));
        assert!(text.lines().nth(1).unwrap().starts_with("sps_bb84,30,"));
    }

    #[test]
    fn default_sweep_emits_307_lines() {
        let result = run_sweep(&SweepConfig::default()).unwrap();
        let text = csv_string(&result);
        assert_eq!(text.lines().count(), 1 + 6 * 51);
        assert!(text.ends_with('\n'));
    }

    #[test]
    fn csv_is_byte_deterministic() {
        let result = run_sweep(&SweepConfig::default()).unwrap();
        assert_eq!(csv_string(&result), csv_string(&result));
    }

    #[test]
    fn csv_round_trips_every_field_to_full_precision() {
        let result = run_sweep(&SweepConfig::default()).unwrap();
        let text = csv_string(&result);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        for (line, point) in lines.zip(&result.points) {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 7);
            assert_eq!(fields[0], point.protocol.id());
            assert_eq!(fields[1].parse::<f64>().unwrap(), point.loss_db);
            match point.mu {
                Some(mu) => assert_eq!(fields[2].parse::<f64>().unwrap(), mu),
                None => assert!(fields[2].is_empty()),
            }
            assert_eq!(fields[3].parse::<f64>().unwrap(), point.qber);
            assert_eq!(fields[4].parse::<f64>().unwrap(), point.bits_per_pulse);
            assert_eq!(fields[5].parse::<f64>().unwrap(), point.bits_per_second);
            assert_eq!(fields[6] == "true", point.clamped);
        }
    }

    #[test]
    fn write_failures_report_bytes_written() {
        struct FailAfter {
            remaining: usize,
        }
        impl io::Write for FailAfter {
            fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
                if buf.len() <= self.remaining {
                    self.remaining -= buf.len();
                    Ok(buf.len())
                } else {
                    Err(io::Error::other("sink full"))
                }
            }
            fn flush(&mut self) -> io::Result<()> {
                Ok(())
            }
        }
        let result = run_sweep(&SweepConfig::default()).unwrap();
        // The header plus newline fits; the first row does not.
        let sink = FailAfter {
            remaining: CSV_HEADER.len() + 1,
        };
        match emit_csv(&result, sink) {
            Err(EmitError::Io { bytes_written, .. }) => {
                assert_eq!(bytes_written, (CSV_HEADER.len() + 1) as u64);
            }
            Ok(()) => panic!("expected a write failure"),
        }
    }

    #[test]
    fn every_protocol_maps_to_a_passing_simulation() {
        let cfg = SweepConfig::default();
        for protocol in Protocol::ALL {
            let v = mc_validate(&cfg, protocol, 30.0, 1_000_000, 55).unwrap();
            assert!(v.passed(), "{protocol}:\n{}", v.render());
        }
    }

    #[test]
    fn mc_validation_renders_deterministic_pass_tables() {
        let cfg = SweepConfig::default();
        let a = mc_validate(&cfg, Protocol::SpsBb84, 30.0, 200_000, 9).unwrap();
        let b = mc_validate(&cfg, Protocol::SpsBb84, 30.0, 200_000, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.render(), b.render());
        assert!(a.passed(), "table:\n{}", a.render());
        assert!(a.render().contains("chacha8"));
        assert_eq!(a.rows.len(), 2);
    }
}
