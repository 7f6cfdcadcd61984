//! Seeded electrical model of the electrode dish.
//!
//! The substrate is a resistive network over the electrode pins: a symmetric
//! linear conductance matrix, optional piecewise-linear branch elements
//! (diode / threshold switch / memristive switch), and optional conductance
//! drift keyed to schedule time. Driven pins connect to their square-wave
//! sources through a series resistor; the designated output pin is read at
//! high impedance and digitally thresholded.
//!
//! Pins that are neither driven nor the output float freely — a model with
//! more pins than the sweep addresses gains internal circuit nodes, which is
//! how the crafted fixtures build mechanisms.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::seeds::splitmix64;
use crate::solve::LuFactors;
use crate::sweep::{Drive, StimulusConfig};

pub type PinId = u8;

/// Leak to ground on every node, in siemens. Keeps the nodal system
/// nonsingular when pins float; six orders below the agar conductances.
const LEAK_S: f64 = 1e-10;

/// Cap on fixed-point passes over element on/off states per sample.
const MAX_STATE_PASSES: usize = 100;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum SubstrateKind {
    AgarOnly,
    PhysarumAgar,
    PhysarumMinimalAgar,
    Custom,
}

#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub enum ElementMode<F> {
    /// Conducts when the forward branch voltage exceeds the threshold.
    Diode,
    /// Conducts when the branch voltage magnitude exceeds the threshold,
    /// in either direction.
    Threshold,
    /// Threshold switch whose conductance is scaled by an internal state:
    /// the state depletes while the element conducts and recovers while it
    /// is off. State is local to one measurement buffer.
    Memristive { deplete_tau_s: F, recover_tau_s: F },
}

/// Conduction state of one element during the nodal fixed point. Branches
/// carry `g * (v - threshold)` past the forward threshold (and the mirrored
/// current past the reverse threshold for bidirectional modes), the usual
/// piecewise-linear companion form.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Conduction {
    Off,
    Forward,
    Reverse,
}

#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct NonlinearElement<F> {
    pub edge: (PinId, PinId),
    pub threshold_voltage: F,
    pub mode: ElementMode<F>,
    pub on_conductance_s: F,
}

#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct Drift<F> {
    pub half_life_s: F,
    /// Lower bound on the decay factor, in (0, 1].
    pub floor_fraction: F,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct SubstrateModel<F> {
    pub kind: SubstrateKind,
    pub pin_count: usize,
    /// Row-major pin_count x pin_count symmetric matrix, zero diagonal.
    conductance: Vec<F>,
    pub nonlinear_elements: Vec<NonlinearElement<F>>,
    pub drift: Option<Drift<F>>,
    pub series_resistance_ohm: F,
    pub high_level_v: F,
    pub low_level_v: F,
    pub digital_threshold_v: F,
    pub seed: u64,
}

/// Digitally-thresholded response of one measurement.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct SampleBuffer {
    /// Bit per sample instant, 0 or 1.
    pub bits: Vec<u8>,
    pub sample_rate_hz: f64,
    pub start_time_s: f64,
}

impl SampleBuffer {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.bits.len() as f64 / self.sample_rate_hz
    }
}

impl<F: Real> SubstrateModel<F> {
    /// Builds a model from an explicit edge list; absent edges are zero.
    pub fn custom(
        kind: SubstrateKind,
        pin_count: usize,
        edges: &[(PinId, PinId, F)],
        nonlinear_elements: Vec<NonlinearElement<F>>,
        drift: Option<Drift<F>>,
        seed: u64,
    ) -> Result<Self> {
        let mut conductance = vec![F::zero(); pin_count * pin_count];
        for &(a, b, g) in edges {
            let (a, b) = (a as usize, b as usize);
            if a >= pin_count || b >= pin_count || a == b {
                return Err(Error::invalid(format!("bad edge ({a}, {b})")));
            }
            conductance[a * pin_count + b] = g;
            conductance[b * pin_count + a] = g;
        }
        let model = SubstrateModel {
            kind,
            pin_count,
            conductance,
            nonlinear_elements,
            drift,
            series_resistance_ohm: F::from_f64_lossy(4700.0),
            high_level_v: F::from_f64_lossy(3.3),
            low_level_v: F::zero(),
            digital_threshold_v: F::from_f64_lossy(0.75),
            seed,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn conductance_between(&self, a: PinId, b: PinId) -> F {
        self.conductance[a as usize * self.pin_count + b as usize]
    }

    /// Scales every linear conductance in place (used by preset builders).
    pub fn scale_conductances(&mut self, factor: F) {
        for g in &mut self.conductance {
            *g *= factor;
        }
    }

    pub fn with_drift(mut self, drift: Option<Drift<F>>) -> Self {
        self.drift = drift;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.pin_count;
        if n < 3 {
            return Err(Error::invalid(format!("pin_count {n} < 3")));
        }
        if self.conductance.len() != n * n {
            return Err(Error::invalid("conductance matrix size mismatch"));
        }
        for i in 0..n {
            if self.conductance[i * n + i] != F::zero() {
                return Err(Error::invalid("conductance diagonal must be zero"));
            }
            for j in 0..n {
                let g = self.conductance[i * n + j];
                if g < F::zero() || !g.is_finite() {
                    return Err(Error::invalid("conductances must be finite and non-negative"));
                }
                if g != self.conductance[j * n + i] {
                    return Err(Error::invalid("conductance matrix must be symmetric"));
                }
            }
        }
        if self.kind == SubstrateKind::AgarOnly && !self.nonlinear_elements.is_empty() {
            return Err(Error::invalid("AgarOnly substrates carry no nonlinear elements"));
        }
        for element in &self.nonlinear_elements {
            let (a, b) = element.edge;
            if a as usize >= n || b as usize >= n || a == b {
                return Err(Error::invalid(format!("element edge ({a}, {b}) invalid")));
            }
            if element.on_conductance_s <= F::zero() {
                return Err(Error::invalid("element on-conductance must be positive"));
            }
            if element.threshold_voltage < F::zero() {
                return Err(Error::invalid("element threshold must be non-negative"));
            }
            if let ElementMode::Memristive {
                deplete_tau_s,
                recover_tau_s,
            } = element.mode
            {
                if deplete_tau_s <= F::zero() || recover_tau_s <= F::zero() {
                    return Err(Error::invalid("memristive time constants must be positive"));
                }
            }
        }
        if let Some(d) = &self.drift {
            if d.half_life_s <= F::zero() {
                return Err(Error::invalid("drift half-life must be positive"));
            }
            if d.floor_fraction <= F::zero() || d.floor_fraction > F::one() {
                return Err(Error::invalid("drift floor must lie in (0, 1]"));
            }
        }
        if self.series_resistance_ohm <= F::zero() {
            return Err(Error::invalid("series resistance must be positive"));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String>
    where
        F: Serialize,
    {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self>
    where
        F: serde::de::DeserializeOwned,
    {
        let model: SubstrateModel<F> = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    /// Drift factor applied to the linear conductances at a schedule time.
    fn drift_factor(&self, start_time_s: f64) -> F {
        match &self.drift {
            None => F::one(),
            Some(d) => {
                let t = F::from_f64_lossy(start_time_s);
                let decay = (-(t / d.half_life_s)).exp2();
                decay.max(d.floor_fraction)
            }
        }
    }

    /// Runs the sampled nodal solve, returning bits and the analog trace at
    /// the output pin. `simulate` is the public face; the analog trace backs
    /// the in-crate property tests and the inspection tooling.
    #[doc(hidden)]
    pub fn trace(
        &self,
        config: &StimulusConfig,
        duration_s: f64,
        sample_rate_hz: f64,
    ) -> Result<(Vec<u8>, Vec<F>)> {
        let n = self.pin_count;
        if config.output_pin as usize >= n {
            return Err(Error::invalid(format!(
                "output pin {} outside model with {} pins",
                config.output_pin, n
            )));
        }
        if config.drives.contains_key(&config.output_pin) {
            return Err(Error::invalid("output pin must not carry a drive"));
        }
        let mut max_freq = 0.0f64;
        for (&pin, drive) in &config.drives {
            if pin as usize >= n {
                return Err(Error::invalid(format!(
                    "driven pin {pin} outside model with {n} pins"
                )));
            }
            if let Drive::Frequency(f) = drive {
                if *f <= 0.0 || !f.is_finite() {
                    return Err(Error::invalid(format!("drive frequency {f} invalid")));
                }
                max_freq = max_freq.max(*f);
            }
        }
        if sample_rate_hz < 2.0 * max_freq {
            return Err(Error::invalid(format!(
                "sample rate {sample_rate_hz} Hz below Nyquist of highest drive {max_freq} Hz"
            )));
        }
        if !(sample_rate_hz > 0.0) || !(duration_s > 0.0) {
            return Err(Error::invalid("duration and sample rate must be positive"));
        }
        let samples = (duration_s * sample_rate_hz).round() as usize;
        if samples == 0 {
            return Err(Error::invalid("buffer would hold zero samples"));
        }

        let drift = self.drift_factor(config.scheduled_time_s);
        let series_g = F::one() / self.series_resistance_ohm;
        let leak = F::from_f64_lossy(LEAK_S);
        let elements = &self.nonlinear_elements;

        // Sorted drive list: (pin, cycles-per-sample or None for grounded).
        // Phase advances as k * (f / rate): one rounding per drive keeps the
        // half-period boundary samples consistent across the whole buffer.
        let drives: Vec<(usize, Option<f64>)> = config
            .drives
            .iter()
            .map(|(&pin, drive)| {
                (
                    pin as usize,
                    match drive {
                        Drive::Grounded => None,
                        Drive::Frequency(f) => Some(*f / sample_rate_hz),
                    },
                )
            })
            .collect();

        // Linear part of the stamp (drift applied), without elements.
        let mut base = vec![F::zero(); n * n];
        for i in 0..n {
            let mut diag = leak;
            for j in 0..n {
                if i == j {
                    continue;
                }
                let g = self.conductance[i * n + j] * drift;
                base[i * n + j] = -g;
                diag += g;
            }
            base[i * n + i] = diag;
        }
        for &(pin, _) in &drives {
            base[pin * n + pin] += series_g;
        }
        // With no elements the matrix never changes: factor once.
        let fixed_lu = if elements.is_empty() {
            Some(LuFactors::new(base.clone(), n)?)
        } else {
            None
        };

        let mut conduction = vec![Conduction::Off; elements.len()];
        let mut mem_state = vec![F::one(); elements.len()];
        let dt = F::from_f64_lossy(1.0 / sample_rate_hz);
        let mut bits = Vec::with_capacity(samples);
        let mut analog = Vec::with_capacity(samples);
        let mut sources = vec![F::zero(); n];

        for k in 0..samples {
            for &(pin, cycles_per_sample) in &drives {
                sources[pin] = match cycles_per_sample {
                    None => F::zero(),
                    Some(q) => {
                        if (k as f64 * q).fract() < 0.5 {
                            self.high_level_v
                        } else {
                            self.low_level_v
                        }
                    }
                };
            }

            // fixed point over element conduction states, warm-started from
            // the previous sample's converged state
            let mut volts = self.solve_state(
                &base,
                fixed_lu.as_ref(),
                &drives,
                &sources,
                series_g,
                &conduction,
                &mem_state,
            )?;
            // flip one mismatched element per pass; simultaneous flips can
            // two-cycle on paired elements
            let mut passes = 0;
            loop {
                let mut flipped = false;
                for (idx, element) in elements.iter().enumerate() {
                    let v = volts[element.edge.0 as usize] - volts[element.edge.1 as usize];
                    let th = element.threshold_voltage;
                    let bidirectional = !matches!(element.mode, ElementMode::Diode);
                    let next = if v > th {
                        Conduction::Forward
                    } else if bidirectional && v < -th {
                        Conduction::Reverse
                    } else if v == th || (bidirectional && v == -th) {
                        // exactly at threshold: element keeps its prior state
                        conduction[idx]
                    } else {
                        Conduction::Off
                    };
                    if next != conduction[idx] {
                        conduction[idx] = next;
                        flipped = true;
                        break;
                    }
                }
                passes += 1;
                if !flipped || passes >= MAX_STATE_PASSES {
                    break;
                }
                volts = self.solve_state(
                    &base,
                    fixed_lu.as_ref(),
                    &drives,
                    &sources,
                    series_g,
                    &conduction,
                    &mem_state,
                )?;
            }

            let v_out = volts[config.output_pin as usize];
            analog.push(v_out);
            bits.push(u8::from(v_out >= self.digital_threshold_v));

            // TODO remove: temporary instrumentation
            if std::env::var_os("MATERIO_TRACE").is_some() && k < 24 {
                eprintln!(
                    "k={k} sources={:?} volts={:?} conduction={conduction:?} mem={mem_state:?} passes={passes}",
                    sources
                        .iter()
                        .map(|s| format!("{:.2}", s.to_f64_lossy()))
                        .collect::<Vec<_>>(),
                    volts
                        .iter()
                        .map(|v| format!("{:.3}", v.to_f64_lossy()))
                        .collect::<Vec<_>>(),
                );
            }

            // memristive state integration over the buffer
            for (idx, element) in elements.iter().enumerate() {
                if let ElementMode::Memristive {
                    deplete_tau_s,
                    recover_tau_s,
                } = element.mode
                {
                    if conduction[idx] != Conduction::Off {
                        mem_state[idx] *= (-(dt / deplete_tau_s)).exp();
                    } else {
                        let s = mem_state[idx];
                        mem_state[idx] = F::one() - (F::one() - s) * (-(dt / recover_tau_s)).exp();
                    }
                }
            }
        }
        Ok((bits, analog))
    }

    #[allow(clippy::too_many_arguments)]
    fn solve_state(
        &self,
        base: &[F],
        fixed_lu: Option<&LuFactors<F>>,
        drives: &[(usize, Option<f64>)],
        sources: &[F],
        series_g: F,
        conduction: &[Conduction],
        mem_state: &[F],
    ) -> Result<Vec<F>> {
        let n = self.pin_count;
        let mut b = vec![F::zero(); n];
        for &(pin, _) in drives {
            b[pin] = series_g * sources[pin];
        }
        if let Some(lu) = fixed_lu {
            return Ok(lu.solve(&b));
        }
        let mut a = base.to_vec();
        for (idx, element) in self.nonlinear_elements.iter().enumerate() {
            if conduction[idx] == Conduction::Off {
                continue;
            }
            let g = match element.mode {
                ElementMode::Memristive { .. } => element.on_conductance_s * mem_state[idx],
                _ => element.on_conductance_s,
            };
            let (i, j) = (element.edge.0 as usize, element.edge.1 as usize);
            a[i * n + j] -= g;
            a[j * n + i] -= g;
            a[i * n + i] += g;
            a[j * n + j] += g;
            // companion offset: current is g * (v - th) past the threshold,
            // so the threshold enters the right-hand side
            let shift = g * element.threshold_voltage;
            match conduction[idx] {
                Conduction::Forward => {
                    b[i] += shift;
                    b[j] -= shift;
                }
                Conduction::Reverse => {
                    b[i] -= shift;
                    b[j] += shift;
                }
                Conduction::Off => unreachable!(),
            }
        }
        Ok(LuFactors::new(a, n)?.solve(&b))
    }
}

/// Maps a stimulus configuration at a schedule time to an output bit buffer.
///
/// Pure function of its arguments: repeat calls return identical buffers.
pub fn simulate<F: Real>(
    model: &SubstrateModel<F>,
    config: &StimulusConfig,
    duration_s: f64,
    sample_rate_hz: f64,
) -> Result<SampleBuffer> {
    let (bits, _) = model.trace(config, duration_s, sample_rate_hz)?;
    Ok(SampleBuffer {
        bits,
        sample_rate_hz,
        start_time_s: config.scheduled_time_s,
    })
}

fn preset_seed(kind: SubstrateKind, pin_count: usize, seed: u64) -> u64 {
    let tag = match kind {
        SubstrateKind::AgarOnly => 1u64,
        SubstrateKind::PhysarumAgar => 2,
        SubstrateKind::PhysarumMinimalAgar => 3,
        SubstrateKind::Custom => 4,
    };
    splitmix64(seed ^ (tag << 56) ^ ((pin_count as u64) << 40))
}

/// Builds one of the preset substrate models.
///
/// `AgarOnly` is a purely linear mesh. `PhysarumAgar` adds seeded nonlinear
/// elements along a random tube path plus conductance drift.
/// `PhysarumMinimalAgar` is the same with the linear background scaled far
/// down, leaving some pin pairs effectively disconnected. `Custom` models
/// are loaded from JSON, not built here.
pub fn make_substrate<F: Real>(
    kind: SubstrateKind,
    pin_count: usize,
    seed: u64,
) -> Result<SubstrateModel<F>> {
    if pin_count < 3 {
        return Err(Error::invalid(format!("pin_count {pin_count} < 3")));
    }
    if kind == SubstrateKind::Custom {
        return Err(Error::invalid(
            "Custom substrates are defined in JSON files, not generated",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(preset_seed(kind, pin_count, seed));
    let base_g = 1e-4;
    let background_scale = match kind {
        SubstrateKind::AgarOnly => 1.0,
        SubstrateKind::PhysarumAgar => 0.6,
        SubstrateKind::PhysarumMinimalAgar => 0.08,
        SubstrateKind::Custom => unreachable!(),
    };

    let mut edges: Vec<(PinId, PinId, F)> = Vec::new();
    for i in 0..pin_count {
        for j in (i + 1)..pin_count {
            let u: f64 = rng.random();
            let g = base_g * background_scale * (0.4 + 0.8 * u);
            edges.push((i as PinId, j as PinId, F::from_f64_lossy(g)));
        }
    }

    let mut elements = Vec::new();
    let mut drift = None;
    if kind != SubstrateKind::AgarOnly {
        // tube path over a random connected subset of pins
        let mut pins: Vec<PinId> = (0..pin_count as PinId).collect();
        for i in (1..pins.len()).rev() {
            let j = rng.random_range(0..=i);
            pins.swap(i, j);
        }
        let max_tube = pin_count.min(7);
        let tube_len = rng.random_range(4..=max_tube.max(4));
        for pair in pins[..tube_len.min(pin_count)].windows(2) {
            let mode = match rng.random_range(0..3u8) {
                0 => ElementMode::Threshold,
                1 => ElementMode::Diode,
                _ => ElementMode::Memristive {
                    deplete_tau_s: F::from_f64_lossy(rng.random_range(3e-4..1.5e-3)),
                    recover_tau_s: F::from_f64_lossy(rng.random_range(2e-4..1e-3)),
                },
            };
            elements.push(NonlinearElement {
                edge: (pair[0], pair[1]),
                threshold_voltage: F::from_f64_lossy(rng.random_range(0.9..2.2)),
                mode,
                on_conductance_s: F::from_f64_lossy(base_g * rng.random_range(1.5..4.0)),
            });
        }
        drift = Some(Drift {
            half_life_s: F::from_f64_lossy(1200.0),
            floor_fraction: F::from_f64_lossy(0.05),
        });
    }

    SubstrateModel::custom(kind, pin_count, &edges, elements, drift, seed)
}

/// Convenience constructor for sweep configs in tests and fixtures.
pub fn config_from_drives(
    drives: BTreeMap<PinId, Drive>,
    output_pin: PinId,
    freq_pair: (f64, f64),
    scheduled_time_s: f64,
) -> StimulusConfig {
    StimulusConfig {
        drives,
        output_pin,
        freq_pair,
        scheduled_time_s,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dft::half_spectrum;

    fn single_drive_config(pin: PinId, freq: f64, output: PinId) -> StimulusConfig {
        let mut drives = BTreeMap::new();
        drives.insert(pin, Drive::Frequency(freq));
        config_from_drives(drives, output, (freq, freq * 2.0), 0.0)
    }

    #[test]
    fn agar_only_has_no_elements_and_is_deterministic() {
        let a: SubstrateModel<f64> =
            make_substrate(SubstrateKind::AgarOnly, 9, 1).unwrap();
        let b: SubstrateModel<f64> =
            make_substrate(SubstrateKind::AgarOnly, 9, 1).unwrap();
        assert!(a.nonlinear_elements.is_empty());
        assert_eq!(a, b);
        let c: SubstrateModel<f64> = make_substrate(SubstrateKind::AgarOnly, 9, 2).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn physarum_presets_have_elements() {
        for seed in [7u64, 8, 9] {
            let m: SubstrateModel<f64> =
                make_substrate(SubstrateKind::PhysarumAgar, 9, seed).unwrap();
            assert!(!m.nonlinear_elements.is_empty());
            assert!(m.drift.is_some());
            let minimal: SubstrateModel<f64> =
                make_substrate(SubstrateKind::PhysarumMinimalAgar, 9, seed).unwrap();
            assert!(!minimal.nonlinear_elements.is_empty());
            // minimal agar: linear background far weaker
            assert!(minimal.conductance_between(0, 1) < m.conductance_between(0, 1));
        }
    }

    #[test]
    fn pin_count_below_three_rejected() {
        assert!(make_substrate::<f64>(SubstrateKind::AgarOnly, 2, 1).is_err());
    }

    #[test]
    fn all_grounded_yields_all_zero_buffer() {
        let model: SubstrateModel<f64> =
            make_substrate(SubstrateKind::PhysarumAgar, 9, 3).unwrap();
        let mut drives = BTreeMap::new();
        for pin in 0..8u8 {
            drives.insert(pin, Drive::Grounded);
        }
        let config = config_from_drives(drives, 8, (250.0, 500.0), 0.0);
        let buffer = simulate(&model, &config, 0.032, 5000.0).unwrap();
        assert_eq!(buffer.len(), 160);
        assert!(buffer.bits.iter().all(|&b| b == 0));
    }

    #[test]
    fn buffer_length_is_duration_times_rate() {
        let model: SubstrateModel<f64> = make_substrate(SubstrateKind::AgarOnly, 9, 1).unwrap();
        let config = single_drive_config(0, 500.0, 8);
        let buffer = simulate(&model, &config, 0.032, 5000.0).unwrap();
        assert_eq!(buffer.len(), 160);
    }

    #[test]
    fn nyquist_violation_rejected() {
        let model: SubstrateModel<f64> = make_substrate(SubstrateKind::AgarOnly, 9, 1).unwrap();
        let config = single_drive_config(0, 2500.0, 8);
        assert!(simulate(&model, &config, 0.032, 4000.0).is_err());
        assert!(simulate(&model, &config, 0.032, 5000.0).is_ok());
    }

    #[test]
    fn output_pin_must_not_be_driven() {
        let model: SubstrateModel<f64> = make_substrate(SubstrateKind::AgarOnly, 9, 1).unwrap();
        let mut config = single_drive_config(0, 500.0, 8);
        config.output_pin = 0;
        assert!(simulate(&model, &config, 0.032, 5000.0).is_err());
    }

    #[test]
    fn direct_edge_peaks_at_drive_frequency() {
        // 3-pin custom linear model: strong edge 0-2, pin 1 grounded weakly
        let model: SubstrateModel<f64> = SubstrateModel::custom(
            SubstrateKind::Custom,
            3,
            &[(0, 2, 1e-3), (1, 2, 1e-6)],
            vec![],
            None,
            0,
        )
        .unwrap();
        let mut drives = BTreeMap::new();
        drives.insert(0u8, Drive::Frequency(500.0));
        drives.insert(1u8, Drive::Grounded);
        let config = config_from_drives(drives, 2, (250.0, 500.0), 0.0);
        let buffer = simulate(&model, &config, 0.032, 5000.0).unwrap();

        // independent check: closed-form 2-node divider + reference DFT
        let gs = 1.0 / 4700.0;
        let g02 = 1e-3;
        let g12 = 1e-6;
        // node1 (grounded drive) and node2 (output) both load node 0
        // solve the 3x3 by hand per sample
        let expected: Vec<f64> = (0..160)
            .map(|k| {
                let s0 = if (k as f64 * (500.0 / 5000.0)).fract() < 0.5 {
                    3.3
                } else {
                    0.0
                };
                // unknowns v0, v1, v2; leak negligible but kept for parity
                let leak = 1e-10;
                // v1 row: gs*(0 - v1) + g12*(v2 - v1) = leak*v1
                // v0 row: gs*(s0 - v0) + g02*(v2 - v0) = leak*v0
                // v2 row: g02*(v0 - v2) + g12*(v1 - v2) = leak*v2
                // iterate a tiny fixed point for the reference
                let mut v = [0.0f64; 3];
                for _ in 0..200 {
                    let v0 = (gs * s0 + g02 * v[2]) / (gs + g02 + leak);
                    let v1 = (g12 * v[2]) / (gs + g12 + leak);
                    let v2 = (g02 * v[0] + g12 * v[1]) / (g02 + g12 + leak);
                    v = [v0, v1, v2];
                }
                if v[2] >= 0.75 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let got: Vec<f64> = buffer.bits.iter().map(|&b| b as f64).collect();
        assert_eq!(got, expected);

        let spec = half_spectrum(&got, 5000.0);
        let peak = spec.bin_center_hz(spec.argmax().unwrap());
        assert_eq!(peak, 500.0);
    }

    #[test]
    fn simulate_is_referentially_transparent() {
        let model: SubstrateModel<f64> =
            make_substrate(SubstrateKind::PhysarumAgar, 9, 11).unwrap();
        let config = single_drive_config(2, 1000.0, 5);
        let a = simulate(&model, &config, 0.032, 5000.0).unwrap();
        let b = simulate(&model, &config, 0.032, 5000.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn drift_shrinks_amplitude_monotonically() {
        let model: SubstrateModel<f64> = make_substrate(SubstrateKind::AgarOnly, 9, 5)
            .unwrap()
            .with_drift(Some(Drift {
                half_life_s: 100.0,
                floor_fraction: 0.01,
            }));
        let mut last_amp = f64::INFINITY;
        for start in [0.0, 50.0, 150.0, 400.0] {
            let mut config = single_drive_config(0, 500.0, 8);
            config.scheduled_time_s = start;
            let (_, analog) = model.trace(&config, 0.032, 5000.0).unwrap();
            let amp = analog.iter().cloned().fold(0.0f64, f64::max);
            assert!(
                amp <= last_amp + 1e-12,
                "amplitude grew with drift: {amp} after {last_amp}"
            );
            last_amp = amp;
        }
    }

    #[test]
    fn linear_substrate_scales_with_drive_voltage() {
        let mut model: SubstrateModel<f64> = make_substrate(SubstrateKind::AgarOnly, 9, 5).unwrap();
        let config = single_drive_config(0, 500.0, 8);
        let (_, analog1) = model.trace(&config, 0.032, 5000.0).unwrap();
        model.high_level_v *= 2.0;
        let (_, analog2) = model.trace(&config, 0.032, 5000.0).unwrap();
        for (a, b) in analog1.iter().zip(analog2.iter()) {
            assert!((b - 2.0 * a).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn symmetric_models_are_pin_permutation_invariant() {
        // uniform mesh: swapping the roles of pins 0 and 1 changes nothing
        let edges: Vec<(PinId, PinId, f64)> = (0..9u8)
            .flat_map(|i| ((i + 1)..9).map(move |j| (i, j, 8e-5)))
            .collect();
        let model: SubstrateModel<f64> =
            SubstrateModel::custom(SubstrateKind::Custom, 9, &edges, vec![], None, 0).unwrap();
        let mut drives = BTreeMap::new();
        drives.insert(0u8, Drive::Frequency(500.0));
        drives.insert(1u8, Drive::Frequency(2500.0));
        for pin in 2..8u8 {
            drives.insert(pin, Drive::Grounded);
        }
        let config = config_from_drives(drives.clone(), 8, (500.0, 2500.0), 0.0);
        let buffer_a = simulate(&model, &config, 0.032, 5000.0).unwrap();

        let mut swapped = BTreeMap::new();
        swapped.insert(0u8, Drive::Frequency(2500.0));
        swapped.insert(1u8, Drive::Frequency(500.0));
        for pin in 2..8u8 {
            swapped.insert(pin, Drive::Grounded);
        }
        let config_b = config_from_drives(swapped, 8, (500.0, 2500.0), 0.0);
        let buffer_b = simulate(&model, &config_b, 0.032, 5000.0).unwrap();
        assert_eq!(buffer_a, buffer_b);
    }

    #[test]
    fn json_round_trip_preserves_model() {
        let model: SubstrateModel<f64> =
            make_substrate(SubstrateKind::PhysarumAgar, 9, 21).unwrap();
        let text = model.to_json().unwrap();
        let back: SubstrateModel<f64> = SubstrateModel::from_json(&text).unwrap();
        assert_eq!(model, back);
    }
}
