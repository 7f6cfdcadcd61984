// Scratch exploration tool for tuning crafted substrates. Not part of the
// shipped surface; run with: cargo run --release --bin explore -- <cmd>

use std::collections::BTreeMap;

use materio::gates::GateType;
use materio::miner::{gate_census, group_records, match_truth_table};
use materio::signal::{classify_output, middle_section, ones_ratio};
use materio::substrate::{
    make_substrate, simulate, Drift, ElementMode, NonlinearElement, SubstrateKind, SubstrateModel,
};
use materio::sweep::{prepare_sweep, run_sweep, Drive, StimulusConfig};

const FREQS: [f64; 4] = [250.0, 500.0, 1000.0, 2500.0];

fn census_line(model: &SubstrateModel<f64>, label: &str, pins: usize) {
    let configs = prepare_sweep(pins, &FREQS, 0.032, 0.15, 1).unwrap();
    let log = run_sweep(model, &configs, 0.032, 1).unwrap();
    let census = gate_census::<f64>(&log);
    let counts: Vec<String> = GateType::searchable()
        .iter()
        .map(|&g| format!("{}={}", g.short_name(), census.count(g)))
        .collect();
    println!("{label}: total={} {}", census.total(), counts.join(" "));
}

fn corner_configs(
    a: u8,
    b: u8,
    out: u8,
    theta: &[u8],
    sweep_pins: usize,
) -> Vec<StimulusConfig> {
    let config_pins: Vec<u8> = (0..sweep_pins as u8)
        .filter(|&p| p != a && p != b && p != out)
        .collect();
    (0..4usize)
        .map(|corner| {
            let mut drives = BTreeMap::new();
            let fa = if corner & 2 != 0 { FREQS[3] } else { FREQS[0] };
            let fb = if corner & 1 != 0 { FREQS[3] } else { FREQS[0] };
            drives.insert(a, Drive::Frequency(fa));
            drives.insert(b, Drive::Frequency(fb));
            for (&pin, &rank) in config_pins.iter().zip(theta.iter()) {
                drives.insert(pin, Drive::Frequency(FREQS[(rank - 1) as usize]));
            }
            StimulusConfig {
                drives,
                output_pin: out,
                freq_pair: (FREQS[0], FREQS[3]),
                scheduled_time_s: 0.0,
            }
        })
        .collect()
}

fn measure(
    model: &SubstrateModel<f64>,
    a: u8,
    b: u8,
    out: u8,
    theta: &[u8],
) -> (Vec<f64>, Vec<bool>) {
    let mut ratios = Vec::new();
    let mut classes = Vec::new();
    for config in corner_configs(a, b, out, theta, 9) {
        let rate = 2.0 * config.max_drive_freq();
        let buffer = simulate(model, &config, 0.032, rate).unwrap();
        ratios.push(ones_ratio::<f64>(&buffer).unwrap());
        let mid = middle_section(&buffer).unwrap();
        classes.push(classify_output::<f64>(&mid, FREQS[0], FREQS[3]).unwrap());
    }
    (ratios, classes)
}

fn quadruple(model: &SubstrateModel<f64>, a: u8, b: u8, out: u8, theta: &[u8]) {
    let (ratios, classes) = measure(model, a, b, out, theta);
    println!(
        "  alloc=({a},{b},{out}) theta={theta:?} ratios={:.3?} classes={classes:?}",
        ratios
    );
}

fn crafted_and(
    th: f64,
    g_on: f64,
    tau_d: f64,
    tau_r: f64,
    g_comb: f64,
    g_drain: f64,
) -> SubstrateModel<f64> {
    // pins 0..8 sweep; internal: 9 = MA (input 0's branch), 10 = MB.
    // Each branch node drains through diodes into config pins, which
    // conduct only when those pins sit low, so dead branches read ~0.
    // The output is the plain midpoint of the two branch nodes: one live
    // branch against a dead one stays under the digital threshold.
    let mem = |edge: (u8, u8)| NonlinearElement {
        edge,
        threshold_voltage: th,
        mode: ElementMode::Memristive {
            deplete_tau_s: tau_d,
            recover_tau_s: tau_r,
        },
        on_conductance_s: g_on,
    };
    let drain = |node: u8, pin: u8| NonlinearElement {
        edge: (node, pin),
        threshold_voltage: 0.05,
        mode: ElementMode::Diode,
        on_conductance_s: g_drain,
    };
    let or_tap = |node: u8| NonlinearElement {
        edge: (node, 7),
        threshold_voltage: 0.25,
        mode: ElementMode::Diode,
        on_conductance_s: 0.5e-4,
    };
    let elements = vec![
        mem((0, 9)),
        mem((1, 10)),
        drain(9, 2),
        drain(9, 3),
        drain(9, 4),
        drain(10, 5),
        drain(10, 6),
        drain(10, 2),
        // OR output on pin 7 via diode taps from both branches
        or_tap(9),
        or_tap(10),
        drain(7, 4),
    ];
    let edges = vec![(8u8, 9u8, g_comb), (8, 10, g_comb)];
    SubstrateModel::custom(SubstrateKind::Custom, 11, &edges, elements, None, 0).unwrap()
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match args.first().map(String::as_str) {
        Some("agar") => {
            for seed in 1..=4u64 {
                let model = make_substrate::<f64>(SubstrateKind::AgarOnly, 9, seed).unwrap();
                census_line(&model, &format!("agar seed {seed}"), 9);
            }
        }
        Some("presets") => {
            for seed in 1..=8u64 {
                let model = make_substrate::<f64>(SubstrateKind::PhysarumAgar, 9, seed).unwrap();
                census_line(&model, &format!("physarum seed {seed}"), 9);
            }
            for seed in 1..=4u64 {
                let model =
                    make_substrate::<f64>(SubstrateKind::PhysarumMinimalAgar, 9, seed).unwrap();
                census_line(&model, &format!("minimal seed {seed}"), 9);
            }
        }
        Some("and-probe") => {
            // score candidates on the ratio-AND quadruple plus classification
            let mut best: Vec<(f64, String)> = Vec::new();
            for &th in &[1.8, 1.9, 2.0] {
                for &g_on in &[2e-3, 4e-3] {
                    for &tau_d in &[2e-5] {
                        for &tau_r in &[5e-5] {
                            for &g_drain in &[0.5e-4, 0.6e-4, 0.8e-4, 1.0e-4] {
                                for &g_comb in &[0.8e-5, 1.2e-5, 2e-5]  {
                                    let model =
                                        crafted_and(th, g_on, tau_d, tau_r, g_comb, g_drain);
                                    let mut worst = 0.0f64;
                                    let mut class_ok = true;
                                    for theta in [[1, 2, 3, 4, 2, 3], [2, 3, 4, 1, 2, 3]] {
                                        let (ratios, classes) =
                                            measure(&model, 0, 1, 8, &theta);
                                        let targets = [0.0, 0.0, 0.0, 0.5];
                                        let e: f64 = ratios
                                            .iter()
                                            .zip(targets.iter())
                                            .map(|(r, t)| 0.5 * (r - t) * (r - t))
                                            .sum();
                                        worst = worst.max(e);
                                        class_ok &=
                                            classes == [false, false, false, true];
                                    }
                                    let desc = format!(
                                        "th={th} g_on={g_on} tau_d={tau_d} tau_r={tau_r} g_drain={g_drain} g_comb={g_comb} classok={class_ok}"
                                    );
                                    best.push((worst + if class_ok { 0.0 } else { 1.0 }, desc));
                                }
                            }
                        }
                    }
                }
            }
            best.sort_by(|a, b| a.0.total_cmp(&b.0));
            for (e, desc) in best.iter().take(12) {
                println!("E={e:.4} {desc}");
            }
        }
        Some("mini") => {
            // A=0 at 2500 Hz, drain pin 1 at 1000 Hz, MA=2 observed
            let model: SubstrateModel<f64> = SubstrateModel::custom(
                SubstrateKind::Custom,
                3,
                &[],
                vec![
                    NonlinearElement {
                        edge: (0, 2),
                        threshold_voltage: 1.9,
                        mode: ElementMode::Memristive {
                            deplete_tau_s: 2e-5,
                            recover_tau_s: 5e-5,
                        },
                        on_conductance_s: 8e-4,
                    },
                    NonlinearElement {
                        edge: (2, 1),
                        threshold_voltage: 0.05,
                        mode: ElementMode::Diode,
                        on_conductance_s: 1.8e-4,
                    },
                ],
                None,
                0,
            )
            .unwrap();
            let mut drives = BTreeMap::new();
            drives.insert(0u8, Drive::Frequency(2500.0));
            drives.insert(1u8, Drive::Frequency(1000.0));
            let config = StimulusConfig {
                drives,
                output_pin: 2,
                freq_pair: (250.0, 2500.0),
                scheduled_time_s: 0.0,
            };
            let (_, analog) = model.trace(&config, 0.032, 5000.0).unwrap();
            let head: Vec<String> = analog.iter().take(24).map(|v| format!("{v:.2}")).collect();
            println!("MA: {}", head.join(" "));
        }
        Some("trace") => {
            let model = crafted_and(1.9, 4e-3, 2e-5, 5e-5, 1.2e-5, 0.6e-4);
            let theta = [2u8, 3, 4, 2, 3, 4];
            let corner: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0);
            let config = corner_configs(0, 1, 8, &theta, 9).remove(corner);
            for probe_pin in [8u8, 7, 9, 10] {
                let mut c = config.clone();
                c.output_pin = probe_pin;
                c.drives.remove(&probe_pin);
                // keep the original drive set minus the probe pin; pin 8 is
                // already the output so only 7 changes the drive layout
                let (_, analog) = model.trace(&c, 0.032, 5000.0).unwrap();
                let head: Vec<String> =
                    analog.iter().take(24).map(|v| format!("{v:.2}")).collect();
                println!("pin {probe_pin}: {}", head.join(" "));
            }
        }
        Some("and-detail") => {
            let model = crafted_and(1.9, 4e-3, 2e-5, 5e-5, 1.2e-5, 0.6e-4);
            for theta in [
                [2, 3, 2, 3, 2, 3],
                [2, 3, 4, 2, 3, 4],
                [1, 2, 3, 4, 2, 3],
                [4, 3, 2, 2, 3, 4],
            ] {
                quadruple(&model, 0, 1, 8, &theta);
                quadruple(&model, 0, 1, 7, &theta);
            }
        }
        Some("and-census") => {
            let model = crafted_and(1.4, 1.0e-3, 1.5e-4, 1.0e-4, 2e-4, 2.5e-4);
            census_line(&model, "crafted AND", 9);
        }
        Some("groups") => {
            // which gates appear where on a preset
            let seed: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1);
            let model = make_substrate::<f64>(SubstrateKind::PhysarumAgar, 9, seed).unwrap();
            let configs = prepare_sweep(9, &FREQS, 0.032, 0.15, 1).unwrap();
            let log = run_sweep(&model, &configs, 0.032, 1).unwrap();
            let groups = group_records::<f64>(&log);
            let mut by_gate: BTreeMap<&str, usize> = BTreeMap::new();
            for g in &groups {
                *by_gate.entry(match_truth_table(g).short_name()).or_default() += 1;
            }
            println!("{by_gate:?}");
        }
        Some("xor-groups") => {
            let seed: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(2);
            let model = make_substrate::<f64>(SubstrateKind::PhysarumAgar, 9, seed).unwrap();
            println!("elements:");
            for e in &model.nonlinear_elements {
                println!("  {e:?}");
            }
            let configs = prepare_sweep(9, &FREQS, 0.032, 0.15, 1).unwrap();
            let log = run_sweep(&model, &configs, 0.032, 1).unwrap();
            let groups = group_records::<f64>(&log);
            for g in &groups {
                if match_truth_table(g) == GateType::XOR {
                    println!(
                        "XOR a={} b={} out={} fp=({},{}) ctx={:?} t={:.1}",
                        g.input_a, g.input_b, g.output_pin, g.freq_pair.0, g.freq_pair.1,
                        g.context, g.first_seen_s
                    );
                }
            }
        }
        _ => eprintln!("commands: agar | presets | and-probe | and-census | groups <seed> | xor-groups <seed>"),
    }
}
