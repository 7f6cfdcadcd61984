//! Discrete Fourier transform over generic scalars.
//!
//! Mixed-radix Cooley-Tukey: the length is split by its smallest prime
//! factor at each level, with a direct transform at prime lengths. All
//! twiddles for a given length come from one precomputed table, so repeat
//! transforms of equal-length buffers are cheap.

use num_complex::Complex;

use crate::num::Real;

/// Half-spectrum magnitudes with the DC bin removed.
///
/// `magnitudes[k]` is the magnitude of bin `k + 1`; its center frequency is
/// `(k + 1) * bin_width_hz`. Length is `floor(N / 2)` for an `N`-sample input.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum<F> {
    pub magnitudes: Vec<F>,
    pub bin_width_hz: f64,
}

impl<F: Real> Spectrum<F> {
    /// Index of the maximum-magnitude bin; ties resolve to the lower frequency.
    pub fn argmax(&self) -> Option<usize> {
        let mut best: Option<(usize, F)> = None;
        for (i, &m) in self.magnitudes.iter().enumerate() {
            match best {
                Some((_, bm)) if m <= bm => {}
                _ => best = Some((i, m)),
            }
        }
        best.map(|(i, _)| i)
    }

    /// Center frequency of bin index `i` (0 = first non-DC bin).
    pub fn bin_center_hz(&self, i: usize) -> f64 {
        (i + 1) as f64 * self.bin_width_hz
    }
}

/// Reusable transform plan for a fixed length.
pub struct Dft<F> {
    n: usize,
    twiddles: Vec<Complex<F>>,
}

impl<F: Real> Dft<F> {
    pub fn new(n: usize) -> Self {
        let mut twiddles = Vec::with_capacity(n.max(1));
        let n_f = F::from_usize_lossy(n.max(1));
        for k in 0..n.max(1) {
            let angle = -(F::one() + F::one()) * F::PI() * F::from_usize_lossy(k) / n_f;
            twiddles.push(Complex::new(angle.cos(), angle.sin()));
        }
        Dft { n, twiddles }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Forward transform of a real-valued signal.
    pub fn forward_real(&self, input: &[F]) -> Vec<Complex<F>> {
        assert_eq!(input.len(), self.n, "input length must match the plan");
        let buf: Vec<Complex<F>> = input.iter().map(|&x| Complex::new(x, F::zero())).collect();
        let mut out = vec![Complex::new(F::zero(), F::zero()); self.n];
        self.recurse(&buf, &mut out, self.n, 1, 0);
        out
    }

    /// Twiddle `exp(-2*pi*i*j/n)` for the plan length, `j` taken mod n.
    fn twiddle(&self, j: usize) -> Complex<F> {
        self.twiddles[j % self.n]
    }

    /// Transforms `input[offset], input[offset+stride], ...` (`len` points)
    /// into `out[..len]`. The stride equals `n / len`, so twiddles at this
    /// level are table entries at multiples of the stride.
    fn recurse(
        &self,
        input: &[Complex<F>],
        out: &mut [Complex<F>],
        len: usize,
        stride: usize,
        offset: usize,
    ) {
        if len == 1 {
            out[0] = input[offset];
            return;
        }
        let p = smallest_prime_factor(len);
        if p == len {
            // prime length: direct transform
            for (k, slot) in out.iter_mut().enumerate().take(len) {
                let mut acc = Complex::new(F::zero(), F::zero());
                for j in 0..len {
                    acc = acc + input[offset + j * stride] * self.twiddle(j * k * stride);
                }
                *slot = acc;
            }
            return;
        }
        let m = len / p;
        // transform the p decimated subsequences
        let mut subs = vec![Complex::new(F::zero(), F::zero()); len];
        for r in 0..p {
            let (head, _) = subs[r * m..].split_at_mut(m);
            self.recurse(input, head, m, stride * p, offset + r * stride);
        }
        // combine: X[k] = sum_r W_n^{r k} * S_r[k mod m]
        for (k, slot) in out.iter_mut().enumerate().take(len) {
            let mut acc = Complex::new(F::zero(), F::zero());
            for r in 0..p {
                acc = acc + subs[r * m + (k % m)] * self.twiddle(r * k * stride);
            }
            *slot = acc;
        }
    }
}

fn smallest_prime_factor(n: usize) -> usize {
    if n % 2 == 0 {
        return 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return d;
        }
        d += 2;
    }
    n
}

/// Half-spectrum of a real signal: bins `1..=floor(N/2)`, DC removed.
pub fn half_spectrum<F: Real>(samples: &[F], sample_rate_hz: f64) -> Spectrum<F> {
    let n = samples.len();
    let full = Dft::new(n).forward_real(samples);
    let magnitudes = full[1..=n / 2].iter().map(|c| c.norm()).collect();
    Spectrum {
        magnitudes,
        bin_width_hz: sample_rate_hz / n as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Textbook quadratic-cost DFT, the independent reference.
    fn naive_dft(input: &[f64]) -> Vec<Complex<f64>> {
        let n = input.len();
        (0..n)
            .map(|k| {
                let mut acc = Complex::new(0.0, 0.0);
                for (j, &x) in input.iter().enumerate() {
                    let angle = -2.0 * std::f64::consts::PI * (j * k) as f64 / n as f64;
                    acc += Complex::new(x * angle.cos(), x * angle.sin());
                }
                acc
            })
            .collect()
    }

    fn pseudo_random(n: usize, seed: u64) -> Vec<f64> {
        // splitmix64 stream, mapped to [0, 1)
        let mut state = seed;
        (0..n)
            .map(|_| {
                state = state.wrapping_add(0x9E3779B97F4A7C15);
                let mut z = state;
                z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
                z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
                z = z ^ (z >> 31);
                (z >> 11) as f64 / (1u64 << 53) as f64
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft_across_lengths() {
        for &n in &[1usize, 2, 3, 4, 5, 8, 12, 16, 17, 20, 80, 97, 160] {
            let signal = pseudo_random(n, n as u64 + 7);
            let fast = Dft::new(n).forward_real(&signal);
            let slow = naive_dft(&signal);
            for (a, b) in fast.iter().zip(slow.iter()) {
                assert!(
                    (a - b).norm() < 1e-9 * (n as f64),
                    "n={n}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn half_spectrum_has_floor_n_over_2_bins() {
        for &n in &[8usize, 9, 80, 160] {
            let signal = pseudo_random(n, 3);
            let spec = half_spectrum(&signal, 5000.0);
            assert_eq!(spec.magnitudes.len(), n / 2);
            assert!((spec.bin_width_hz - 5000.0 / n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn argmax_breaks_ties_toward_lower_frequency() {
        let spec = Spectrum::<f64> {
            magnitudes: vec![1.0, 3.0, 3.0, 0.5],
            bin_width_hz: 10.0,
        };
        assert_eq!(spec.argmax(), Some(1));
        assert_eq!(spec.bin_center_hz(1), 20.0);
    }

    #[test]
    fn pure_tone_lands_in_its_bin() {
        // 500 Hz cosine sampled at 5000 Hz over 160 samples: bin 16 exactly
        let n = 160;
        let rate = 5000.0;
        let signal: Vec<f64> = (0..n)
            .map(|k| (2.0 * std::f64::consts::PI * 500.0 * k as f64 / rate).cos())
            .collect();
        let spec = half_spectrum(&signal, rate);
        let peak = spec.argmax().unwrap();
        assert_eq!(spec.bin_center_hz(peak), 500.0);
    }
}
