//! Mining sweep logs for two-input Boolean gates.
//!
//! Every record is classified once (spectral peak of the middle section,
//! nearest-frequency rule). For each ordered input pin pair, output pin,
//! frequency pair, and fixed context of the remaining pins, the four records
//! realizing the FF/FT/TF/TT corners form a truth group; complete groups
//! match exactly one of the 16 gates.

use std::collections::BTreeMap;
use std::fmt;

use crate::gates::GateType;
use crate::num::Real;
use crate::signal::{classify_output, middle_section};
use crate::substrate::PinId;
use crate::sweep::{Drive, RecordLog};

/// The four response corners of one (inputs, output, frequencies, context)
/// combination.
#[derive(Clone, Debug, PartialEq)]
pub struct TruthGroup {
    pub input_a: PinId,
    pub input_b: PinId,
    pub output_pin: PinId,
    pub freq_pair: (f64, f64),
    /// Fixed drives of the non-input, non-output pins.
    pub context: BTreeMap<PinId, Drive>,
    /// Classified outcomes ordered (FF, FT, TF, TT).
    pub outcomes: [bool; 4],
    /// Earliest schedule time among the four corner records.
    pub first_seen_s: f64,
}

/// Gate occurrence counts for one substrate sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct GateCensus {
    counts: [u64; 16],
    pub substrate_label: String,
}

impl GateCensus {
    pub fn new(substrate_label: impl Into<String>) -> Self {
        GateCensus {
            counts: [0; 16],
            substrate_label: substrate_label.into(),
        }
    }

    pub fn with_counts(pairs: &[(GateType, u64)], substrate_label: impl Into<String>) -> Self {
        let mut census = GateCensus::new(substrate_label);
        for &(gate, count) in pairs {
            census.counts[(gate.id - 1) as usize] = count;
        }
        census
    }

    pub fn count(&self, gate: GateType) -> u64 {
        self.counts[(gate.id - 1) as usize]
    }

    pub fn add(&mut self, gate: GateType) {
        self.counts[(gate.id - 1) as usize] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// One rank of the gate difficulty hierarchy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HierarchyEntry {
    pub gate: GateType,
    pub count: u64,
    /// True when this gate has the same count as the previous entry, i.e.
    /// the strict order does not separate them.
    pub tied_with_previous: bool,
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
struct GroupKey {
    output: PinId,
    f_false_bits: u64,
    f_true_bits: u64,
    input_a: PinId,
    input_b: PinId,
    context: Vec<(PinId, DriveKey)>,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
enum DriveKey {
    Grounded,
    Frequency(u64),
}

fn drive_key(drive: &Drive) -> DriveKey {
    match drive {
        Drive::Grounded => DriveKey::Grounded,
        Drive::Frequency(f) => DriveKey::Frequency(f.to_bits()),
    }
}

struct PartialGroup {
    outcomes: [Option<bool>; 4],
    first_seen_s: f64,
    context: BTreeMap<PinId, Drive>,
}

/// Collects every complete truth group in the log.
///
/// Records whose buffers are too short to classify are ignored, as are
/// groups missing any of the four corners. Both orders of each input pair
/// appear as separate (corner-swapped) groups.
pub fn group_records<F: Real>(log: &RecordLog) -> Vec<TruthGroup> {
    // classify each record once; the result is shared by every group the
    // record participates in
    let mut classified: Vec<Option<bool>> = Vec::with_capacity(log.records.len());
    for record in &log.records {
        let (ff, ft) = record.config.freq_pair;
        let outcome = middle_section(&record.buffer)
            .and_then(|midd| classify_output::<F>(&midd, ff, ft));
        classified.push(outcome.ok());
    }

    let mut groups: BTreeMap<GroupKey, PartialGroup> = BTreeMap::new();
    for (record, outcome) in log.records.iter().zip(&classified) {
        let Some(outcome) = *outcome else { continue };
        let config = &record.config;
        let (f_false, f_true) = config.freq_pair;
        // frequency-driven pins can act as inputs; grounded pins only as context
        let pins: Vec<(PinId, f64)> = config
            .drives
            .iter()
            .filter_map(|(&pin, drive)| match drive {
                Drive::Frequency(f) => Some((pin, *f)),
                Drive::Grounded => None,
            })
            .collect();
        for &(pin_a, freq_a) in &pins {
            for &(pin_b, freq_b) in &pins {
                if pin_a == pin_b {
                    continue;
                }
                let corner = (usize::from(freq_a == f_true) << 1) | usize::from(freq_b == f_true);
                let context: BTreeMap<PinId, Drive> = config
                    .drives
                    .iter()
                    .filter(|(&p, _)| p != pin_a && p != pin_b)
                    .map(|(&p, d)| (p, *d))
                    .collect();
                let key = GroupKey {
                    output: config.output_pin,
                    f_false_bits: f_false.to_bits(),
                    f_true_bits: f_true.to_bits(),
                    input_a: pin_a,
                    input_b: pin_b,
                    context: context.iter().map(|(&p, d)| (p, drive_key(d))).collect(),
                };
                let entry = groups.entry(key).or_insert_with(|| PartialGroup {
                    outcomes: [None; 4],
                    first_seen_s: f64::INFINITY,
                    context,
                });
                // first occurrence of a corner wins; duplicates are ignored
                if entry.outcomes[corner].is_none() {
                    entry.outcomes[corner] = Some(outcome);
                    entry.first_seen_s = entry.first_seen_s.min(config.scheduled_time_s);
                }
            }
        }
    }

    groups
        .into_iter()
        .filter_map(|(key, partial)| {
            let outcomes = [
                partial.outcomes[0]?,
                partial.outcomes[1]?,
                partial.outcomes[2]?,
                partial.outcomes[3]?,
            ];
            Some(TruthGroup {
                input_a: key.input_a,
                input_b: key.input_b,
                output_pin: key.output,
                freq_pair: (
                    f64::from_bits(key.f_false_bits),
                    f64::from_bits(key.f_true_bits),
                ),
                context: partial.context,
                outcomes,
                first_seen_s: partial.first_seen_s,
            })
        })
        .collect()
}

/// The unique gate whose truth row equals the group's outcomes.
pub fn match_truth_table(group: &TruthGroup) -> GateType {
    GateType::from_truth_row(group.outcomes)
}

/// Counts of `match_truth_table` over all complete groups in the log.
pub fn gate_census<F: Real>(log: &RecordLog) -> GateCensus {
    let label = format!("pins{}-seed{}", log.pin_count, log.seed);
    let mut census = GateCensus::new(label);
    for group in group_records::<F>(log) {
        census.add(match_truth_table(&group));
    }
    census
}

/// Entry (a, b) counts matched groups of the gate with input_a = a and
/// input_b = b. Symmetric gates fill the matrix symmetrically because both
/// input orders match.
pub fn xor_pin_matrix(
    groups: &[TruthGroup],
    gate: GateType,
    pin_count: usize,
) -> Vec<Vec<u64>> {
    let mut matrix = vec![vec![0u64; pin_count]; pin_count];
    for group in groups {
        if match_truth_table(group) == gate {
            matrix[group.input_a as usize][group.input_b as usize] += 1;
        }
    }
    matrix
}

/// Matched-group counts binned by discovery time. Bins start at 0 and run
/// contiguously to the last occupied bin; empty input gives an empty list.
pub fn temporal_histogram(
    groups: &[TruthGroup],
    gate: GateType,
    bin_width_s: f64,
) -> Vec<(f64, u64)> {
    assert!(bin_width_s > 0.0, "bin width must be positive");
    let mut counts: Vec<u64> = Vec::new();
    for group in groups {
        if match_truth_table(group) != gate {
            continue;
        }
        let bin = (group.first_seen_s / bin_width_s).floor() as usize;
        if counts.len() <= bin {
            counts.resize(bin + 1, 0);
        }
        counts[bin] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| (i as f64 * bin_width_s, c))
        .collect()
}

/// Gates sorted by descending census count; ties break toward the lower id
/// and are flagged.
pub fn difficulty_hierarchy(
    census: &GateCensus,
    gates_of_interest: &[GateType],
) -> Vec<HierarchyEntry> {
    let mut ranked: Vec<(GateType, u64)> = gates_of_interest
        .iter()
        .map(|&g| (g, census.count(g)))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.id.cmp(&b.0.id)));
    ranked
        .iter()
        .enumerate()
        .map(|(i, &(gate, count))| HierarchyEntry {
            gate,
            count,
            tied_with_previous: i > 0 && ranked[i - 1].1 == count,
        })
        .collect()
}

/// Renders a hierarchy as `A ▷ B ▷ C`, joining tied entries with `=`.
pub fn hierarchy_string(entries: &[HierarchyEntry]) -> String {
    let mut out = String::new();
    for (i, entry) in entries.iter().enumerate() {
        if i > 0 {
            out.push_str(if entry.tied_with_previous { " = " } else { " ▷ " });
        }
        out.push_str(entry.gate.short_name());
    }
    out
}

impl fmt::Display for HierarchyEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.gate.short_name(), self.count)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::substrate::{make_substrate, SampleBuffer, SubstrateKind};
    use crate::sweep::{prepare_sweep, run_sweep, ResponseRecord, StimulusConfig};

    /// Hand-built log where the output buffer follows the square wave driven
    /// on a chosen pin (all-zero when that pin is the output), so groups
    /// realize that pin's projection gate.
    fn projection_log(follow_pin: PinId) -> RecordLog {
        let freqs = [250.0, 500.0];
        let configs = prepare_sweep(3, &freqs, 0.032, 0.15, 1).unwrap();
        let records: Vec<ResponseRecord> = configs
            .iter()
            .map(|config| {
                let rate = 2.0 * config.max_drive_freq();
                let n = (0.032 * rate).round() as usize;
                let bits: Vec<u8> = match config.drives.get(&follow_pin) {
                    Some(Drive::Frequency(f)) => {
                        let q = f / rate;
                        (0..n).map(|k| u8::from((k as f64 * q).fract() < 0.5)).collect()
                    }
                    _ => vec![0; n],
                };
                ResponseRecord {
                    config: config.clone(),
                    buffer: SampleBuffer {
                        bits,
                        sample_rate_hz: rate,
                        start_time_s: config.scheduled_time_s,
                    },
                    wall_time_s: config.scheduled_time_s + 0.032,
                }
            })
            .collect();
        RecordLog {
            records,
            frequency_set: freqs.to_vec(),
            pin_count: 3,
            seed: 1,
        }
    }

    #[test]
    fn full_enumeration_yields_complete_groups() {
        let log = projection_log(0);
        let groups = group_records::<f64>(&log);
        // 3 outputs x 2 ordered pairs x 2 ordered freq pairs x empty context
        assert_eq!(groups.len(), 3 * 2 * 2);
        for group in &groups {
            assert_ne!(group.input_a, group.input_b);
            assert_ne!(group.input_a, group.output_pin);
            assert_ne!(group.input_b, group.output_pin);
        }
    }

    #[test]
    fn projection_substrate_mines_projection_gates() {
        let log = projection_log(0);
        let census = gate_census::<f64>(&log);
        assert_eq!(census.total(), 12);
        // pin 0 as input a: gate "x"; as input b: gate "y". When pin 0 is
        // the output the buffer is constant: peak 0 Hz reads false for the
        // (250, 500) pair and true for (500, 250), where f_true is nearer.
        let x = GateType::from_id(13).unwrap();
        let y = GateType::from_id(11).unwrap();
        assert_eq!(census.count(x), 4);
        assert_eq!(census.count(y), 4);
        assert_eq!(census.count(GateType::CONSTANT_FALSE), 2);
        assert_eq!(census.count(GateType::CONSTANT_TRUE), 2);
    }

    #[test]
    fn deleting_a_record_drops_exactly_its_groups() {
        let mut log = projection_log(0);
        let full_groups = group_records::<f64>(&log).len();
        let removed = log.records.remove(5);
        let remaining = group_records::<f64>(&log);
        // the removed record was one corner of several groups; none survive
        // incomplete, and unrelated groups are untouched
        for group in &remaining {
            let (ff, ft) = group.freq_pair;
            assert!(
                !(group.output_pin == removed.config.output_pin
                    && (ff, ft) == removed.config.freq_pair
                    && group_contains_word(group, &removed.config)),
                "group containing the removed record survived"
            );
        }
        assert!(remaining.len() < full_groups);
    }

    fn group_contains_word(group: &TruthGroup, config: &StimulusConfig) -> bool {
        // does this group's (inputs + context) cover the record's drive word?
        config.drives.iter().all(|(&pin, drive)| {
            if pin == group.input_a || pin == group.input_b {
                true
            } else {
                group.context.get(&pin) == Some(drive)
            }
        })
    }

    #[test]
    fn ordered_pairs_swap_ft_tf_corners() {
        let log = projection_log(0);
        let groups = group_records::<f64>(&log);
        for group in &groups {
            let mirrored = groups.iter().find(|other| {
                other.input_a == group.input_b
                    && other.input_b == group.input_a
                    && other.output_pin == group.output_pin
                    && other.freq_pair == group.freq_pair
            });
            let mirrored = mirrored.expect("mirror group exists");
            assert_eq!(group.outcomes[0], mirrored.outcomes[0]);
            assert_eq!(group.outcomes[1], mirrored.outcomes[2]);
            assert_eq!(group.outcomes[2], mirrored.outcomes[1]);
            assert_eq!(group.outcomes[3], mirrored.outcomes[3]);
            assert_eq!(
                match_truth_table(group).swap_inputs(),
                match_truth_table(mirrored)
            );
        }
    }

    #[test]
    fn census_total_equals_group_count_on_simulated_sweep() {
        let model = make_substrate::<f64>(SubstrateKind::PhysarumAgar, 5, 4).unwrap();
        let configs = prepare_sweep(5, &[250.0, 500.0, 1000.0], 0.032, 0.15, 4).unwrap();
        let log = run_sweep(&model, &configs, 0.032, 4).unwrap();
        let groups = group_records::<f64>(&log);
        let census = gate_census::<f64>(&log);
        assert_eq!(census.total(), groups.len() as u64);
        // full enumeration leaves no incomplete groups:
        // outputs x ordered pin pairs x ordered freq pairs x context words
        let expected = 5 * (4 * 3) * (3 * 2) * (1 << 2);
        assert_eq!(groups.len(), expected);
    }

    #[test]
    fn empty_log_gives_empty_census() {
        let log = RecordLog {
            records: vec![],
            frequency_set: vec![250.0, 500.0],
            pin_count: 3,
            seed: 0,
        };
        assert_eq!(gate_census::<f64>(&log).total(), 0);
        assert!(group_records::<f64>(&log).is_empty());
    }

    #[test]
    fn xor_matrix_is_symmetric_and_zero_when_absent() {
        let log = projection_log(0);
        let groups = group_records::<f64>(&log);
        let matrix = xor_pin_matrix(&groups, GateType::XOR, 3);
        assert!(matrix.iter().flatten().all(|&c| c == 0));

        // projection gates land symmetrically? x is not symmetric, so check
        // the general contract instead: entry (a,b) counts ordered pairs
        let x = GateType::from_id(13).unwrap();
        let mx = xor_pin_matrix(&groups, x, 3);
        let total: u64 = mx.iter().flatten().sum();
        assert_eq!(total, 4);
    }

    #[test]
    fn histogram_bins_by_first_seen() {
        let mut groups = group_records::<f64>(&projection_log(0));
        groups.truncate(2);
        groups[0].first_seen_s = 10.0;
        groups[1].first_seen_s = 15.0;
        let gate = match_truth_table(&groups[0]);
        groups[1].outcomes = groups[0].outcomes;
        let hist = temporal_histogram(&groups, gate, 60.0);
        assert_eq!(hist, vec![(0.0, 2)]);
        assert!(temporal_histogram(&[], GateType::XOR, 60.0).is_empty());
    }

    #[test]
    fn hierarchy_orders_by_count_with_flagged_ties() {
        let census = GateCensus::with_counts(
            &[
                (GateType::AND, 564),
                (GateType::OR, 536),
                (GateType::NAND, 10),
                (GateType::NOR, 8),
                (GateType::XOR, 4),
                (GateType::XNOR, 0),
            ],
            "reference",
        );
        let order = difficulty_hierarchy(&census, &GateType::searchable());
        let names: Vec<&str> = order.iter().map(|e| e.gate.short_name()).collect();
        assert_eq!(names, ["AND", "OR", "NAND", "NOR", "XOR", "XNOR"]);
        assert!(order.iter().all(|e| !e.tied_with_previous));
        assert_eq!(
            hierarchy_string(&order),
            "AND ▷ OR ▷ NAND ▷ NOR ▷ XOR ▷ XNOR"
        );

        let tied = GateCensus::with_counts(
            &[(GateType::AND, 5), (GateType::OR, 5), (GateType::XOR, 1)],
            "tied",
        );
        let order = difficulty_hierarchy(
            &tied,
            &[GateType::XOR, GateType::OR, GateType::AND],
        );
        assert_eq!(order[0].gate, GateType::AND); // lower id first on tie
        assert!(!order[0].tied_with_previous);
        assert!(order[1].tied_with_previous);
        assert_eq!(hierarchy_string(&order), "AND = OR ▷ XOR");
    }

    #[test]
    fn single_gate_census_matches_single_gate() {
        let census = GateCensus::with_counts(&[(GateType::NOR, 3)], "single");
        let order = difficulty_hierarchy(&census, &[GateType::NOR]);
        assert_eq!(order.len(), 1);
        assert_eq!(order[0].gate, GateType::NOR);
    }
}
