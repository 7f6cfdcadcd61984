//! Seeded random search over training hyperparameters.
//!
//! Draw distributions: learning rate log-uniform over [1e-3, 1e-1], hidden
//! layer count uniform over 1..=8, units per layer from {50, 100, 200, 500},
//! hidden activation from {tanh, relu, logistic}.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dataset::EncodedSample;
use crate::error::{Error, Result};
use crate::mlp::{best_val_mse, train, Activation, EpochStats, Mlp, TrainConfig};
use crate::num::Real;
use crate::seeds::sub_seed;

pub const UNIT_CHOICES: [usize; 4] = [50, 100, 200, 500];
pub const LAYER_RANGE: std::ops::RangeInclusive<usize> = 1..=8;
pub const LEARNING_RATE_RANGE: (f64, f64) = (1e-3, 1e-1);

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HyperDraw {
    pub learning_rate: f64,
    pub n_layers: usize,
    pub units_per_layer: usize,
    pub activation: Activation,
}

/// One draw from the search distributions.
pub fn draw_hyper(rng: &mut ChaCha8Rng) -> HyperDraw {
    let (lo, hi) = LEARNING_RATE_RANGE;
    let learning_rate = (rng.random_range(lo.ln()..hi.ln())).exp();
    let n_layers = rng.random_range(LAYER_RANGE);
    let units_per_layer = UNIT_CHOICES[rng.random_range(0..UNIT_CHOICES.len())];
    let activation = match rng.random_range(0..3u8) {
        0 => Activation::Tanh,
        1 => Activation::Relu,
        _ => Activation::Logistic,
    };
    HyperDraw {
        learning_rate,
        n_layers,
        units_per_layer,
        activation,
    }
}

/// Network stack for a draw: `pin_count` inputs and outputs, logistic
/// output layer, hidden layers per the draw.
pub fn surrogate_for_draw<F: Real>(
    pin_count: usize,
    draw: &HyperDraw,
    seed: u64,
) -> Result<Mlp<F>> {
    let mut dims = Vec::with_capacity(draw.n_layers + 2);
    dims.push(pin_count);
    dims.extend(std::iter::repeat_n(draw.units_per_layer, draw.n_layers));
    dims.push(pin_count);
    Mlp::init(&dims, draw.activation, Activation::Logistic, seed)
}

#[derive(Clone, Debug, Serialize)]
pub struct HyperRunSummary {
    pub run: usize,
    pub draw: HyperDraw,
    pub val_mse: f64,
    pub epochs: usize,
}

pub struct HyperSearchOutcome<F> {
    pub best: HyperDraw,
    pub best_val_mse: f64,
    pub best_run: usize,
    pub model: Mlp<F>,
    pub best_history: Vec<EpochStats>,
    pub runs: Vec<HyperRunSummary>,
}

/// Runs `n_runs` seeded draws, trains each, and keeps the model with the
/// lowest validation MSE (ties resolve to the earliest run).
///
/// `template` supplies everything but the learning rate, which comes from
/// each draw; per-run train seeds derive from `seed` and the run index.
pub fn hyper_search<F: Real>(
    data: &[EncodedSample<F>],
    n_runs: usize,
    seed: u64,
    template: &TrainConfig,
) -> Result<HyperSearchOutcome<F>> {
    if n_runs == 0 {
        return Err(Error::invalid("need at least one hyper-search run"));
    }
    let pin_count = data
        .first()
        .map(|s| s.x.len())
        .ok_or_else(|| Error::invalid("empty dataset"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, "hyper-draws"));
    let draws: Vec<HyperDraw> = (0..n_runs).map(|_| draw_hyper(&mut rng)).collect();

    let mut best: Option<(usize, f64)> = None;
    let mut best_model: Option<(Mlp<F>, Vec<EpochStats>)> = None;
    let mut runs = Vec::with_capacity(n_runs);
    for (run, draw) in draws.iter().enumerate() {
        let init_seed = sub_seed(seed, &format!("init-{run}"));
        let model = surrogate_for_draw::<F>(pin_count, draw, init_seed)?;
        let cfg = TrainConfig {
            learning_rate: draw.learning_rate,
            seed: sub_seed(seed, &format!("train-{run}")),
            ..*template
        };
        let (trained, history) = train(model, data, &cfg)?;
        let val = best_val_mse(&history);
        runs.push(HyperRunSummary {
            run,
            draw: *draw,
            val_mse: val,
            epochs: history.len(),
        });
        if best.is_none_or(|(_, b)| val < b) {
            best = Some((run, val));
            best_model = Some((trained, history));
        }
    }
    let (best_run, best_val) = best.expect("at least one run");
    let (model, best_history) = best_model.expect("at least one run");
    Ok(HyperSearchOutcome {
        best: draws[best_run],
        best_val_mse: best_val,
        best_run,
        model,
        best_history,
        runs,
    })
}
