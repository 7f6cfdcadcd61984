//! Scheduler-style exhaustive sweep over stimulus configurations.
//!
//! The sweep enumerates every (output pin, ordered frequency pair, binary
//! drive word) combination, shuffles the order, lays the configurations out
//! on a schedule, and simulates each one at a sample rate of twice its
//! highest drive frequency.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::substrate::{simulate, PinId, SampleBuffer, SubstrateModel};

#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub enum Drive {
    Grounded,
    /// Square wave at the given frequency, 50% duty, phase 0 at buffer start.
    Frequency(f64),
}

/// Per-pin drive assignment plus schedule slot; the unit of the sweep.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct StimulusConfig {
    pub drives: BTreeMap<PinId, Drive>,
    pub output_pin: PinId,
    /// (f_false, f_true) in hertz.
    pub freq_pair: (f64, f64),
    pub scheduled_time_s: f64,
}

impl StimulusConfig {
    /// Highest square-wave frequency among the drives, falling back to the
    /// frequency pair when nothing is frequency-driven.
    pub fn max_drive_freq(&self) -> f64 {
        let driven = self
            .drives
            .values()
            .filter_map(|d| match d {
                Drive::Frequency(f) => Some(*f),
                Drive::Grounded => None,
            })
            .fold(0.0f64, f64::max);
        if driven > 0.0 {
            driven
        } else {
            self.freq_pair.0.max(self.freq_pair.1)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.drives.contains_key(&self.output_pin) {
            return Err(Error::invalid("output pin must not carry a drive"));
        }
        let (ff, ft) = self.freq_pair;
        if ff == ft {
            return Err(Error::invalid("frequency pair must be distinct"));
        }
        for drive in self.drives.values() {
            if let Drive::Frequency(f) = drive {
                if *f != ff && *f != ft {
                    return Err(Error::invalid(format!(
                        "drive frequency {f} outside the pair ({ff}, {ft})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One simulated measurement: the stimulus and the thresholded response.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub config: StimulusConfig,
    pub buffer: SampleBuffer,
    /// Completion time on the simulated schedule clock.
    pub wall_time_s: f64,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct RecordLog {
    pub records: Vec<ResponseRecord>,
    /// Ascending distinct drive frequencies.
    pub frequency_set: Vec<f64>,
    pub pin_count: usize,
    pub seed: u64,
}

impl RecordLog {
    pub fn validate(&self) -> Result<()> {
        if !self
            .frequency_set
            .windows(2)
            .all(|w| w[0] < w[1])
            || self.frequency_set.iter().any(|&f| f <= 0.0)
        {
            return Err(Error::invalid(
                "frequency set must be strictly ascending and positive",
            ));
        }
        for record in &self.records {
            if record.buffer.start_time_s != record.config.scheduled_time_s {
                return Err(Error::invalid("buffer start must equal scheduled time"));
            }
        }
        Ok(())
    }
}

/// Closed-form sweep size: outputs x ordered frequency pairs x drive words.
pub fn config_count(pin_count: usize, freq_count: usize) -> u64 {
    (pin_count as u64)
        * (freq_count as u64)
        * (freq_count as u64 - 1)
        * (1u64 << (pin_count - 1))
}

fn validate_frequency_set(frequency_set: &[f64]) -> Result<()> {
    if frequency_set.len() < 2 {
        return Err(Error::invalid("need at least two frequencies"));
    }
    if frequency_set.iter().any(|f| !(*f > 0.0)) {
        return Err(Error::invalid("frequencies must be positive"));
    }
    if !frequency_set.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::invalid("frequency set must be strictly ascending"));
    }
    Ok(())
}

/// Enumerates every stimulus configuration in canonical order.
///
/// For each output pin, each ordered pair of distinct frequencies
/// (f_false, f_true), and each binary word over the remaining pins (bit 0:
/// drive at f_false, bit 1: drive at f_true), one configuration is emitted.
/// Word bit k corresponds to the k-th input pin in ascending order.
/// Schedule times are provisional (canonical index times the step);
/// [`shuffle_order`] re-lays them out after permuting.
pub fn enumerate_configs(
    pin_count: usize,
    frequency_set: &[f64],
    buffer_duration_s: f64,
    seconds_per_config: f64,
) -> Result<Vec<StimulusConfig>> {
    if pin_count < 3 {
        return Err(Error::invalid(format!("pin_count {pin_count} < 3")));
    }
    if pin_count > 24 {
        return Err(Error::invalid("pin_count too large to enumerate"));
    }
    validate_frequency_set(frequency_set)?;
    if !(seconds_per_config > 0.0) {
        return Err(Error::invalid("seconds_per_config must be positive"));
    }
    if seconds_per_config < buffer_duration_s {
        return Err(Error::invalid(
            "schedule step must cover the measurement duration",
        ));
    }

    let mut configs =
        Vec::with_capacity(config_count(pin_count, frequency_set.len()) as usize);
    let mut index = 0u64;
    for output in 0..pin_count as PinId {
        let input_pins: Vec<PinId> =
            (0..pin_count as PinId).filter(|&p| p != output).collect();
        for (i, &f_false) in frequency_set.iter().enumerate() {
            for (j, &f_true) in frequency_set.iter().enumerate() {
                if i == j {
                    continue;
                }
                for word in 0u32..(1u32 << input_pins.len()) {
                    let mut drives = BTreeMap::new();
                    for (bit, &pin) in input_pins.iter().enumerate() {
                        let f = if word >> bit & 1 == 1 { f_true } else { f_false };
                        drives.insert(pin, Drive::Frequency(f));
                    }
                    configs.push(StimulusConfig {
                        drives,
                        output_pin: output,
                        freq_pair: (f_false, f_true),
                        scheduled_time_s: index as f64 * seconds_per_config,
                    });
                    index += 1;
                }
            }
        }
    }
    Ok(configs)
}

/// Seeded uniform permutation. The multiset of schedule times is preserved:
/// after permuting, times are re-assigned in ascending order so the new list
/// order is the execution order.
pub fn shuffle_order(mut configs: Vec<StimulusConfig>, seed: u64) -> Vec<StimulusConfig> {
    let mut times: Vec<f64> = configs.iter().map(|c| c.scheduled_time_s).collect();
    times.sort_by(f64::total_cmp);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..configs.len()).rev() {
        let j = rng.random_range(0..=i);
        configs.swap(i, j);
    }
    for (config, t) in configs.iter_mut().zip(times) {
        config.scheduled_time_s = t;
    }
    configs
}

/// Simulates every configuration in order at twice its highest drive
/// frequency and assembles the log.
pub fn run_sweep<F: Real>(
    model: &SubstrateModel<F>,
    configs: &[StimulusConfig],
    buffer_duration_s: f64,
    seed: u64,
) -> Result<RecordLog> {
    if configs.is_empty() {
        return Err(Error::invalid("no configurations to sweep"));
    }
    let mut frequency_set: Vec<f64> = Vec::new();
    for config in configs {
        for &f in [config.freq_pair.0, config.freq_pair.1].iter() {
            if !frequency_set.contains(&f) {
                frequency_set.push(f);
            }
        }
    }
    frequency_set.sort_by(f64::total_cmp);

    let mut records = Vec::with_capacity(configs.len());
    for (index, config) in configs.iter().enumerate() {
        let tag = |e: Error| Error::ConfigFailed {
            index,
            source: Box::new(e),
        };
        config.validate().map_err(tag)?;
        let rate = 2.0 * config.max_drive_freq();
        let buffer = simulate(model, config, buffer_duration_s, rate).map_err(tag)?;
        records.push(ResponseRecord {
            config: config.clone(),
            buffer,
            wall_time_s: config.scheduled_time_s + buffer_duration_s,
        });
    }
    Ok(RecordLog {
        records,
        frequency_set,
        pin_count: model.pin_count,
        seed,
    })
}

/// Enumerate, shuffle, and lay out the full sweep for a model.
pub fn prepare_sweep(
    pin_count: usize,
    frequency_set: &[f64],
    buffer_duration_s: f64,
    seconds_per_config: f64,
    seed: u64,
) -> Result<Vec<StimulusConfig>> {
    let configs = enumerate_configs(
        pin_count,
        frequency_set,
        buffer_duration_s,
        seconds_per_config,
    )?;
    Ok(shuffle_order(configs, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::substrate::{make_substrate, SubstrateKind};
    use std::collections::HashSet;

    const FREQS: [f64; 4] = [250.0, 500.0, 1000.0, 2500.0];

    #[test]
    fn nine_pin_four_frequency_count() {
        let configs = enumerate_configs(9, &FREQS, 0.032, 0.15).unwrap();
        assert_eq!(configs.len(), 27_648);
        assert_eq!(config_count(9, 4), 27_648);
    }

    #[test]
    fn small_case_count_and_no_self_drive() {
        let configs = enumerate_configs(3, &FREQS[..2], 0.032, 0.15).unwrap();
        assert_eq!(configs.len(), 24);
        for config in &configs {
            assert!(!config.drives.contains_key(&config.output_pin));
            assert_eq!(config.drives.len(), 2);
            config.validate().unwrap();
        }
    }

    #[test]
    fn closed_form_matches_brute_force_enumeration() {
        // brute-force oracle: count distinct (output, pair, word) tuples
        for pin_count in 3..=9usize {
            for freq_count in 2..=4usize {
                let freqs = &FREQS[..freq_count];
                let mut seen = HashSet::new();
                for output in 0..pin_count {
                    for fi in 0..freq_count {
                        for fj in 0..freq_count {
                            if fi == fj {
                                continue;
                            }
                            for word in 0u32..(1 << (pin_count - 1)) {
                                seen.insert((output, fi, fj, word));
                            }
                        }
                    }
                }
                let configs = enumerate_configs(pin_count, freqs, 0.032, 0.15).unwrap();
                assert_eq!(configs.len(), seen.len());
                assert_eq!(configs.len() as u64, config_count(pin_count, freq_count));
            }
        }
    }

    #[test]
    fn every_stratum_holds_a_full_word_block() {
        let configs = enumerate_configs(5, &FREQS[..3], 0.032, 0.15).unwrap();
        let mut strata: std::collections::HashMap<(PinId, u64, u64), usize> =
            std::collections::HashMap::new();
        for config in &configs {
            let key = (
                config.output_pin,
                config.freq_pair.0.to_bits(),
                config.freq_pair.1.to_bits(),
            );
            *strata.entry(key).or_default() += 1;
        }
        assert_eq!(strata.len(), 5 * 3 * 2);
        assert!(strata.values().all(|&count| count == 1 << 4));
    }

    #[test]
    fn shuffle_is_deterministic_and_preserves_content() {
        let configs = enumerate_configs(4, &FREQS[..2], 0.032, 0.15).unwrap();
        let a = shuffle_order(configs.clone(), 5);
        let b = shuffle_order(configs.clone(), 5);
        assert_eq!(a, b);
        let c = shuffle_order(configs.clone(), 6);
        assert_ne!(a, c);

        // multiset of drive assignments unchanged, times re-sorted ascending
        let strip = |list: &[StimulusConfig]| {
            let mut v: Vec<(Vec<(PinId, u64)>, PinId, u64, u64)> = list
                .iter()
                .map(|cfg| {
                    (
                        cfg.drives
                            .iter()
                            .map(|(&p, d)| {
                                (
                                    p,
                                    match d {
                                        Drive::Grounded => 0,
                                        Drive::Frequency(f) => f.to_bits(),
                                    },
                                )
                            })
                            .collect(),
                        cfg.output_pin,
                        cfg.freq_pair.0.to_bits(),
                        cfg.freq_pair.1.to_bits(),
                    )
                })
                .collect();
            v.sort();
            v
        };
        assert_eq!(strip(&configs), strip(&a));
        assert!(a.windows(2).all(|w| w[0].scheduled_time_s < w[1].scheduled_time_s));
    }

    #[test]
    fn shuffle_of_empty_list_is_empty() {
        assert!(shuffle_order(Vec::new(), 3).is_empty());
    }

    #[test]
    fn sweep_records_in_schedule_order_with_doubled_rate() {
        let model = make_substrate::<f64>(SubstrateKind::AgarOnly, 3, 1).unwrap();
        let configs = prepare_sweep(3, &FREQS[..2], 0.032, 0.15, 9).unwrap();
        let log = run_sweep(&model, &configs, 0.032, 9).unwrap();
        assert_eq!(log.records.len(), 24);
        log.validate().unwrap();
        assert!(log
            .records
            .windows(2)
            .all(|w| w[0].config.scheduled_time_s < w[1].config.scheduled_time_s));
        for record in &log.records {
            let expected = 2.0 * record.config.max_drive_freq();
            assert_eq!(record.buffer.sample_rate_hz, expected);
            assert_eq!(record.buffer.len(), (0.032 * expected).round() as usize);
        }
        assert_eq!(log.frequency_set, vec![250.0, 500.0]);
    }

    #[test]
    fn all_high_config_samples_at_5_khz() {
        let model = make_substrate::<f64>(SubstrateKind::AgarOnly, 3, 1).unwrap();
        let mut drives = BTreeMap::new();
        drives.insert(0u8, Drive::Frequency(2500.0));
        drives.insert(1u8, Drive::Frequency(2500.0));
        let config = StimulusConfig {
            drives,
            output_pin: 2,
            freq_pair: (250.0, 2500.0),
            scheduled_time_s: 0.0,
        };
        let log = run_sweep(&model, &[config], 0.032, 0).unwrap();
        assert_eq!(log.records[0].buffer.sample_rate_hz, 5000.0);
    }

    #[test]
    fn rerun_is_bit_identical() {
        let model = make_substrate::<f64>(SubstrateKind::PhysarumAgar, 4, 2).unwrap();
        let configs = prepare_sweep(4, &FREQS[..2], 0.032, 0.15, 7).unwrap();
        let log_a = run_sweep(&model, &configs, 0.032, 7).unwrap();
        let log_b = run_sweep(&model, &configs, 0.032, 7).unwrap();
        assert_eq!(log_a, log_b);
    }

    #[test]
    fn schedule_step_must_cover_duration() {
        assert!(enumerate_configs(3, &FREQS[..2], 0.2, 0.15).is_err());
    }
}
