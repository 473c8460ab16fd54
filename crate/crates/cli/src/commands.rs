//! Command implementations and CSV emission.
//!
//! Column order is stable: command-specific keys, then n, m, bit where
//! applicable, then probability columns, then the seed. Floats carry nine
//! significant digits; output uses LF line endings.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use cfc_core::detect::{click_probabilities, sample_bit_transmission, TrialRng};
use cfc_core::message::{transmit_message, BitmapMessage, EncodingConfig};
use cfc_core::{message, pbm, ClickProbabilities64, NoiseParams64};

use crate::config::{Command, RunConfig};
use crate::{CliError, InputError, UsageError};

/// Nine significant digits, locale-free.
fn fmt9(x: f64) -> String {
    format!("{x:.8e}")
}

fn channel(n: usize, noise: &NoiseParams64) -> Result<ClickProbabilities64, UsageError> {
    let spec = noise
        .protocol_spec(n, false)
        .map_err(|e| UsageError(e.to_string()))?;
    click_probabilities(&spec, noise).map_err(|e| UsageError(e.to_string()))
}

/// Write to the configured path, or stdout when none is set.
fn emit(output_path: Option<&Path>, data: &str) -> Result<(), InputError> {
    match output_path {
        Some(path) => fs::write(path, data)
            .map_err(|e| InputError(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{data}");
            Ok(())
        }
    }
}

pub fn dispatch(cfg: RunConfig) -> Result<(), CliError> {
    match cfg.command {
        Command::Theory => {
            let csv = cmd_theory(&cfg)?;
            emit(cfg.output_path.as_deref(), &csv)?;
        }
        Command::Sweep => {
            let csv = cmd_sweep(&cfg)?;
            emit(cfg.output_path.as_deref(), &csv)?;
        }
        Command::Transmit => {
            let csv = cmd_transmit(&cfg)?;
            emit(cfg.output_path.as_deref(), &csv)?;
        }
        Command::Image => {
            let (csv, received) = cmd_image(&cfg)?;
            let out = cfg.output_path.as_deref().expect("image requires --out");
            emit(Some(out), &received)?;
            print!("{csv}");
        }
    }
    Ok(())
}

/// Closed-form error and violation curves over the (n, m) grid.
fn cmd_theory(cfg: &RunConfig) -> Result<String, CliError> {
    let mut out = String::new();
    out.push_str("n,m,p1_err,p0_err,avg_err_exact,avg_err_approx,violation,seed\n");
    for &n in &cfg.n_list {
        let probs = channel(n, &cfg.noise)?;
        let p1_err = 1.0 - probs.p_click_bit1;
        let p0_err = probs.p_click_bit0;
        for &m in &cfg.m_list {
            let exact = message::avg_bit_error(m, p1_err, p0_err, true);
            let approx = message::avg_bit_error(m, p1_err, p0_err, false);
            let violation =
                message::violation_probability(m, p0_err, cfg.noise.detector_efficiency)
                    .map_err(|e| UsageError(e.to_string()))?;
            writeln!(
                out,
                "{n},{m},{},{},{},{},{},{}",
                fmt9(p1_err),
                fmt9(p0_err),
                fmt9(exact),
                fmt9(approx),
                fmt9(violation),
                cfg.seed
            )
            .expect("string write");
        }
    }
    Ok(out)
}

/// 95% Wilson score interval.
fn wilson(successes: u64, trials: u64) -> (f64, f64) {
    let z = 1.96f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    (center - half, center + half)
}

/// Monte Carlo bit-error rates over the (n, m, bit) grid.
///
/// Cell `(n, m, bit)` draws from stream `cell_index`, so rows do not
/// depend on evaluation order.
fn cmd_sweep(cfg: &RunConfig) -> Result<String, CliError> {
    let mut out = String::new();
    out.push_str("n,m,bit,trials,errors,err_rate,wilson_lo,wilson_hi,err_theory,seed\n");
    let mut cell_index = 0u64;
    for &n in &cfg.n_list {
        let probs = channel(n, &cfg.noise)?;
        for &m in &cfg.m_list {
            for bit in [false, true] {
                let mut rng = TrialRng::new(cfg.seed, cell_index);
                let mut errors = 0u64;
                for _ in 0..cfg.trials {
                    let received = sample_bit_transmission(bit, m, &probs, &mut rng)
                        .map_err(|e| UsageError(e.to_string()))?;
                    if received != bit {
                        errors += 1;
                    }
                }
                let err_rate = errors as f64 / cfg.trials as f64;
                let (lo, hi) = wilson(errors, cfg.trials as u64);
                let err_theory = if bit {
                    (1.0 - probs.p_click_bit1).powi(m as i32)
                } else {
                    1.0 - (1.0 - probs.p_click_bit0).powi(m as i32)
                };
                writeln!(
                    out,
                    "{n},{m},{},{},{errors},{},{},{},{},{}",
                    u8::from(bit),
                    cfg.trials,
                    fmt9(err_rate),
                    fmt9(lo),
                    fmt9(hi),
                    fmt9(err_theory),
                    cfg.seed
                )
                .expect("string write");
                cell_index += 1;
            }
        }
    }
    Ok(out)
}

/// Stream tag for the seed-derived message content, distinct from the
/// transmission streams.
const MESSAGE_STREAM: u64 = 0x4D53_4721;

fn transmit_once(
    msg: &BitmapMessage,
    n: usize,
    m: usize,
    cfg: &RunConfig,
) -> Result<message::TransmissionReport, CliError> {
    let encoding = EncodingConfig {
        photons_per_bit: m,
        num_beamsplitters: n,
    };
    transmit_message(msg, &encoding, &cfg.noise, &TrialRng::new(cfg.seed, 0))
        .map_err(|e| CliError::Usage(e.to_string()))
}

/// Send a random bit string and report one CSV row.
fn cmd_transmit(cfg: &RunConfig) -> Result<String, CliError> {
    let n = cfg.single_n()?;
    let m = cfg.single_m()?;
    let mut gen = TrialRng::new(cfg.seed, MESSAGE_STREAM);
    let bits: Vec<bool> = (0..cfg.bits).map(|_| gen.next_bool(0.5)).collect();
    let msg = BitmapMessage::new(cfg.bits, 1, bits).map_err(|e| UsageError(e.to_string()))?;
    let report = transmit_once(&msg, n, m, cfg)?;

    let mut out = String::new();
    out.push_str("bits,n,m,fidelity,avg_bit_error,violation_bit0,violation_total,seed\n");
    writeln!(
        out,
        "{},{n},{m},{},{},{},{},{}",
        cfg.bits,
        fmt9(report.fidelity),
        fmt9(report.avg_bit_error),
        fmt9(report.violation_prob_bit0),
        fmt9(report.violation_prob_total),
        cfg.seed
    )
    .expect("string write");
    Ok(out)
}

/// Send an image file; returns (report CSV, received image text).
fn cmd_image(cfg: &RunConfig) -> Result<(String, String), CliError> {
    let n = cfg.single_n()?;
    let m = cfg.single_m()?;
    let path = cfg.input_path.as_deref().expect("image requires --in");
    let text = fs::read_to_string(path)
        .map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))?;
    let msg = pbm::decode(&text).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    let report = transmit_once(&msg, n, m, cfg)?;

    let received_bits: Vec<bool> = report.bits.iter().map(|(_, r)| *r).collect();
    let received = BitmapMessage::new(msg.width(), msg.height(), received_bits)
        .expect("received image matches sent dimensions");

    let mut out = String::new();
    out.push_str("width,height,n,m,fidelity,violation_bit0,violation_total,seed\n");
    writeln!(
        out,
        "{},{},{n},{m},{},{},{},{}",
        msg.width(),
        msg.height(),
        fmt9(report.fidelity),
        fmt9(report.violation_prob_bit0),
        fmt9(report.violation_prob_total),
        cfg.seed
    )
    .expect("string write");
    Ok((out, pbm::encode(&received)))
}
