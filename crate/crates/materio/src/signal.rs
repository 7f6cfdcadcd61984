//! Buffer-to-scalar transforms: spectral peak classification for gate
//! mining plus the three surrogate training targets.

use crate::dft::{half_spectrum, Spectrum};
use crate::error::{Error, Result};
use crate::lzw;
use crate::num::Real;
use crate::substrate::SampleBuffer;

/// Non-DC magnitudes below this fraction of the DC magnitude mean the
/// signal is treated as constant.
const CONSTANT_SIGNAL_RATIO: f64 = 1e-9;

/// Central section of the buffer: indices `[floor(N/4), floor(3N/4))`.
pub fn middle_section(buffer: &SampleBuffer) -> Result<SampleBuffer> {
    let n = buffer.len();
    if n < 4 {
        return Err(Error::BufferTooShort { len: n, min: 4 });
    }
    let lo = n / 4;
    let hi = 3 * n / 4;
    Ok(SampleBuffer {
        bits: buffer.bits[lo..hi].to_vec(),
        sample_rate_hz: buffer.sample_rate_hz,
        start_time_s: buffer.start_time_s + lo as f64 / buffer.sample_rate_hz,
    })
}

fn bits_as_samples<F: Real>(buffer: &SampleBuffer) -> Vec<F> {
    buffer
        .bits
        .iter()
        .map(|&b| if b != 0 { F::one() } else { F::zero() })
        .collect()
}

fn spectrum_with_dc<F: Real>(buffer: &SampleBuffer) -> (F, Spectrum<F>) {
    let samples = bits_as_samples::<F>(buffer);
    let dc = samples.iter().cloned().sum::<F>();
    let spectrum = half_spectrum(&samples, buffer.sample_rate_hz);
    (dc.abs(), spectrum)
}

fn is_constant<F: Real>(dc: F, spectrum: &Spectrum<F>) -> bool {
    let ceiling = dc * F::from_f64_lossy(CONSTANT_SIGNAL_RATIO);
    spectrum.magnitudes.iter().all(|&m| m <= ceiling)
}

/// Frequency of the maximum-magnitude non-DC bin of the half-spectrum, in
/// hertz. Constant signals report 0 Hz; ties break toward the lower
/// frequency.
pub fn fft_peak<F: Real>(buffer: &SampleBuffer) -> Result<f64> {
    let n = buffer.len();
    if n < 8 {
        return Err(Error::BufferTooShort { len: n, min: 8 });
    }
    let (dc, spectrum) = spectrum_with_dc::<F>(buffer);
    if is_constant(dc, &spectrum) {
        return Ok(0.0);
    }
    let peak = spectrum.argmax().expect("half-spectrum is nonempty");
    Ok(spectrum.bin_center_hz(peak))
}

/// True iff the spectral peak lies strictly nearer the true-encoding
/// frequency than the false-encoding frequency. Exact ties read as false.
pub fn classify_output<F: Real>(
    buffer: &SampleBuffer,
    f_false: f64,
    f_true: f64,
) -> Result<bool> {
    if f_false == f_true {
        return Err(Error::invalid("frequency pair must be distinct"));
    }
    let peak = fft_peak::<F>(buffer)?;
    Ok((peak - f_true).abs() < (peak - f_false).abs())
}

/// Proportion of ones in the middle section.
///
/// Computed from the smaller of the two bit counts so that a buffer and its
/// complement sum to exactly 1.
pub fn ones_ratio<F: Real>(buffer: &SampleBuffer) -> Result<F> {
    let middle = middle_section(buffer)?;
    let n = middle.len();
    let ones = middle.bits.iter().filter(|&&b| b != 0).count();
    let zeros = n - ones;
    let ratio = if ones <= zeros {
        F::from_usize_lossy(ones) / F::from_usize_lossy(n)
    } else {
        F::one() - F::from_usize_lossy(zeros) / F::from_usize_lossy(n)
    };
    Ok(ratio)
}

/// Peak position of the middle-section half-spectrum, normalized so that
/// 0.0 is a constant signal and 1.0 is the alternating sequence 0101...
pub fn norm_peak_freq<F: Real>(buffer: &SampleBuffer) -> Result<F> {
    let middle = middle_section(buffer)?;
    let n = middle.len();
    if n < 8 {
        return Err(Error::BufferTooShort { len: n, min: 8 });
    }
    let (dc, spectrum) = spectrum_with_dc::<F>(&middle);
    if is_constant(dc, &spectrum) {
        return Ok(F::zero());
    }
    let peak = spectrum.argmax().expect("half-spectrum is nonempty");
    Ok(F::from_usize_lossy(peak + 1) / F::from_usize_lossy(spectrum.magnitudes.len()))
}

/// LZW code count of the middle-section bit string relative to the
/// worst case for that length, clipped to [0, 1]. High values point to
/// irregular outputs.
pub fn lzw_compressibility<F: Real>(buffer: &SampleBuffer) -> Result<F> {
    let middle = middle_section(buffer)?;
    if middle.is_empty() {
        return Err(Error::BufferTooShort { len: 0, min: 1 });
    }
    let count = lzw::code_count(&middle.bits);
    let worst = lzw::worst_case_count(middle.len()).max(1);
    let ratio = F::from_usize_lossy(count) / F::from_usize_lossy(worst);
    Ok(ratio.min(F::one()).max(F::zero()))
}
