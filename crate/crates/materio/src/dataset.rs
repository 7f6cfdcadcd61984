//! Supervised training sets from sweep logs.
//!
//! Drive frequencies are rank-encoded: 1-based position in the log's
//! ascending frequency set, with 0 for grounded pins and for the output pin.
//! The target is one of the three signal transforms of the response buffer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::signal::{lzw_compressibility, norm_peak_freq, ones_ratio};
use crate::sweep::{Drive, RecordLog};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetKind {
    /// Proportion of ones in the middle section.
    Ratio,
    /// Normalized peak position of the middle-section spectrum.
    PeakFrequency,
    /// LZW code count relative to the per-length worst case.
    Compressibility,
}

impl TargetKind {
    pub fn parse(name: &str) -> Result<TargetKind> {
        match name.to_ascii_lowercase().as_str() {
            "ratio" => Ok(TargetKind::Ratio),
            "peak-frequency" | "peakfrequency" | "frequency" => Ok(TargetKind::PeakFrequency),
            "compressibility" => Ok(TargetKind::Compressibility),
            other => Err(Error::invalid(format!(
                "unknown target `{other}`; valid: ratio, peak-frequency, compressibility"
            ))),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            TargetKind::Ratio => "ratio",
            TargetKind::PeakFrequency => "peak-frequency",
            TargetKind::Compressibility => "compressibility",
        }
    }
}

/// One training sample: rank-encoded drives and a scalar target in [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedSample<F> {
    /// Per-pin frequency rank in {0..K}; 0 marks grounded and output pins.
    pub x: Vec<u8>,
    pub target: F,
    /// Index of the pin the target was measured on.
    pub active_output: u8,
}

/// Rank of a drive in the ascending frequency set (0 for grounded).
fn rank_of(drive: &Drive, frequency_set: &[f64]) -> Result<u8> {
    match drive {
        Drive::Grounded => Ok(0),
        Drive::Frequency(f) => frequency_set
            .iter()
            .position(|g| g == f)
            .map(|i| (i + 1) as u8)
            .ok_or_else(|| {
                Error::invalid(format!("drive frequency {f} missing from the log's set"))
            }),
    }
}

pub fn build_dataset<F: Real>(
    log: &RecordLog,
    target_kind: TargetKind,
) -> Result<Vec<EncodedSample<F>>> {
    let mut samples = Vec::with_capacity(log.records.len());
    for record in &log.records {
        let mut x = vec![0u8; log.pin_count];
        for (&pin, drive) in &record.config.drives {
            x[pin as usize] = rank_of(drive, &log.frequency_set)?;
        }
        x[record.config.output_pin as usize] = 0;
        let target = match target_kind {
            TargetKind::Ratio => ones_ratio::<F>(&record.buffer)?,
            TargetKind::PeakFrequency => norm_peak_freq::<F>(&record.buffer)?,
            TargetKind::Compressibility => lzw_compressibility::<F>(&record.buffer)?,
        };
        samples.push(EncodedSample {
            x,
            target,
            active_output: record.config.output_pin,
        });
    }
    Ok(samples)
}

/// Mean and variance of the targets; the variance is the MSE of the best
/// constant predictor.
pub fn target_variance<F: Real>(samples: &[EncodedSample<F>]) -> (F, F) {
    let n = F::from_usize_lossy(samples.len().max(1));
    let mean = samples.iter().map(|s| s.target).sum::<F>() / n;
    let var = samples
        .iter()
        .map(|s| (s.target - mean) * (s.target - mean))
        .sum::<F>()
        / n;
    (mean, var)
}
