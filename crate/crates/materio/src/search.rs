//! Gradient search over the surrogate's configuration inputs for settings
//! that make the model compute a requested two-input Boolean gate.
//!
//! Inputs encode False as rank 1 and True as rank 4; outputs encode False
//! as 0.0 and True as 0.5. The error over the four truth-table corners is
//! the sum of squared halves; its gradient with respect to the six
//! configuration values comes from backpropagation through the network
//! inputs. Continuous solutions are rounded half-away-from-zero and clipped
//! to {1, 2, 3, 4} before the discrete error is measured.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gates::GateType;
use crate::mlp::Mlp;
use crate::num::Real;
use crate::substrate::PinId;

/// Input encodings for the gate corners.
pub const FALSE_RANK: u8 = 1;
pub const TRUE_RANK: u8 = 4;
/// Output encodings.
pub const FALSE_LEVEL: f64 = 0.0;
pub const TRUE_LEVEL: f64 = 0.5;

/// Assignment of two input pins and one output pin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Allocation {
    pub input_a: PinId,
    pub input_b: PinId,
    pub output: PinId,
}

impl Allocation {
    pub fn new(input_a: PinId, input_b: PinId, output: PinId) -> Result<Allocation> {
        if input_a == input_b || input_a == output || input_b == output {
            return Err(Error::invalid("allocation pins must be distinct"));
        }
        Ok(Allocation {
            input_a,
            input_b,
            output,
        })
    }

    /// Configuration pins: everything but the two inputs and the output,
    /// ascending.
    pub fn config_pins(&self, pin_count: usize) -> Vec<PinId> {
        (0..pin_count as PinId)
            .filter(|&p| p != self.input_a && p != self.input_b && p != self.output)
            .collect()
    }
}

/// Gate to search for plus the fixed corner encodings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GateTask {
    pub gate: GateType,
    /// (False, True) input ranks.
    pub input_encoding: (u8, u8),
    /// (False, True) output levels.
    pub output_encoding: (f64, f64),
}

impl GateTask {
    pub fn new(gate: GateType) -> Result<GateTask> {
        if !GateType::searchable().contains(&gate) {
            return Err(Error::invalid(format!(
                "gate {} is not searchable; choose one of AND, OR, NAND, NOR, XOR, XNOR",
                gate.short_name()
            )));
        }
        Ok(GateTask {
            gate,
            input_encoding: (FALSE_RANK, TRUE_RANK),
            output_encoding: (FALSE_LEVEL, TRUE_LEVEL),
        })
    }

    /// Encoded target for corner index 0..4 (FF, FT, TF, TT).
    pub fn target<F: Real>(&self, corner: usize) -> F {
        if self.gate.truth_row[corner] {
            F::from_f64_lossy(self.output_encoding.1)
        } else {
            F::from_f64_lossy(self.output_encoding.0)
        }
    }

    fn input_rank(&self, high: bool) -> u8 {
        if high {
            self.input_encoding.1
        } else {
            self.input_encoding.0
        }
    }
}

/// Search knobs. Defaults: 1000 starts probed for 10 iterations, the best
/// refined for 500, step 0.1 with halving on error increase.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SearchParams {
    pub n_starts: usize,
    pub probe_iters: usize,
    pub refine_iters: usize,
    pub step: f64,
    pub seed: u64,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            n_starts: 1000,
            probe_iters: 10,
            refine_iters: 500,
            step: 0.1,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchResult<F> {
    pub allocation: Allocation,
    pub gate: GateType,
    pub theta_continuous: Vec<F>,
    pub theta_discrete: Vec<u8>,
    pub error_continuous: F,
    pub error_discrete: F,
    /// Model outputs at the four corners of the discretized configuration.
    pub truth_outputs: [F; 4],
}

fn check_allocation<F: Real>(model: &Mlp<F>, alloc: &Allocation) -> Result<usize> {
    let pins = model.input_dim();
    for pin in [alloc.input_a, alloc.input_b, alloc.output] {
        if pin as usize >= pins {
            return Err(Error::invalid(format!(
                "allocation pin {pin} outside the {pins}-pin surrogate"
            )));
        }
    }
    if alloc.input_a == alloc.input_b
        || alloc.input_a == alloc.output
        || alloc.input_b == alloc.output
    {
        return Err(Error::invalid("allocation pins must be distinct"));
    }
    Ok(pins)
}

/// Input vector for one corner: encoded inputs at the allocation's input
/// pins, theta at the configuration pins, 0 at the output pin.
fn corner_input<F: Real>(
    alloc: &Allocation,
    config_pins: &[PinId],
    theta: &[F],
    task: &GateTask,
    corner: usize,
    pins: usize,
) -> Vec<F> {
    let mut x = vec![F::zero(); pins];
    let a_high = corner & 2 != 0;
    let b_high = corner & 1 != 0;
    x[alloc.input_a as usize] = F::from_usize_lossy(task.input_rank(a_high) as usize);
    x[alloc.input_b as usize] = F::from_usize_lossy(task.input_rank(b_high) as usize);
    for (&pin, &value) in config_pins.iter().zip(theta.iter()) {
        x[pin as usize] = value;
    }
    x
}

/// Sum over the four corners of half the squared output error.
pub fn gate_error<F: Real>(
    model: &Mlp<F>,
    alloc: &Allocation,
    theta: &[F],
    task: &GateTask,
) -> Result<F> {
    let pins = check_allocation(model, alloc)?;
    let config_pins = alloc.config_pins(pins);
    if theta.len() != config_pins.len() {
        return Err(Error::DimensionMismatch {
            expected: config_pins.len(),
            got: theta.len(),
        });
    }
    let half = F::from_f64_lossy(0.5);
    let mut total = F::zero();
    for corner in 0..4 {
        let x = corner_input(alloc, &config_pins, theta, task, corner, pins);
        let out = model.forward(&x)?[alloc.output as usize];
        let err = out - task.target::<F>(corner);
        total += half * err * err;
    }
    Ok(total)
}

/// Exact gradient of [`gate_error`] with respect to theta, by
/// backpropagation through the network inputs, summed over the corners.
pub fn config_gradient<F: Real>(
    model: &Mlp<F>,
    alloc: &Allocation,
    theta: &[F],
    task: &GateTask,
) -> Result<Vec<F>> {
    let pins = check_allocation(model, alloc)?;
    let config_pins = alloc.config_pins(pins);
    if theta.len() != config_pins.len() {
        return Err(Error::DimensionMismatch {
            expected: config_pins.len(),
            got: theta.len(),
        });
    }
    let mut ws = model.workspace();
    let mut grad = vec![F::zero(); theta.len()];
    let mut output_grad = vec![F::zero(); model.output_dim()];
    for corner in 0..4 {
        let x = corner_input(alloc, &config_pins, theta, task, corner, pins);
        model.forward_cached(&x, &mut ws);
        let out = model.cached_output(&ws)[alloc.output as usize];
        for slot in output_grad.iter_mut() {
            *slot = F::zero();
        }
        output_grad[alloc.output as usize] = out - task.target::<F>(corner);
        let input_grad = model.backward(&mut ws, &output_grad, None);
        for (slot, &pin) in grad.iter_mut().zip(config_pins.iter()) {
            *slot += input_grad[pin as usize];
        }
    }
    Ok(grad)
}

/// Plain gradient descent on theta with per-iteration step halving: a step
/// that would increase the error is retried at half size up to 10 times and
/// skipped if still worse.
pub fn local_search<F: Real>(
    model: &Mlp<F>,
    alloc: &Allocation,
    theta0: &[F],
    task: &GateTask,
    iters: usize,
    step: f64,
) -> Result<Vec<F>> {
    if iters == 0 {
        return Err(Error::invalid("need at least one descent iteration"));
    }
    let mut theta = theta0.to_vec();
    let mut error = gate_error(model, alloc, &theta, task)?;
    if !error.is_finite() {
        return Err(Error::AllStartsDiverged(1));
    }
    for _ in 0..iters {
        let grad = config_gradient(model, alloc, &theta, task)?;
        let mut scale = F::from_f64_lossy(step);
        let half = F::from_f64_lossy(0.5);
        for _ in 0..=10 {
            let candidate: Vec<F> = theta
                .iter()
                .zip(grad.iter())
                .map(|(&t, &g)| t - scale * g)
                .collect();
            let cand_error = gate_error(model, alloc, &candidate, task)?;
            if cand_error.is_finite() && cand_error < error {
                theta = candidate;
                error = cand_error;
                break;
            }
            scale *= half;
        }
    }
    Ok(theta)
}

/// Round half away from zero, then clip to the drive-encoding set {1..4}.
pub fn discretize<F: Real>(theta: &[F]) -> Vec<u8> {
    theta
        .iter()
        .map(|&t| {
            let rounded = t.round().to_f64_lossy();
            rounded.clamp(1.0, 4.0) as u8
        })
        .collect()
}

/// Multistart gradient search for one allocation: seeded uniform starts in
/// [1, 4]^k, short probes, one long refinement of the best probe, then
/// discretization.
pub fn multistart_search<F: Real>(
    model: &Mlp<F>,
    alloc: &Allocation,
    task: &GateTask,
    params: &SearchParams,
) -> Result<SearchResult<F>> {
    if params.n_starts == 0 {
        return Err(Error::invalid("need at least one start"));
    }
    let pins = check_allocation(model, alloc)?;
    let config_pins = alloc.config_pins(pins);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let mut best: Option<(F, Vec<F>)> = None;
    for _ in 0..params.n_starts {
        let theta0: Vec<F> = (0..config_pins.len())
            .map(|_| F::from_f64_lossy(rng.random_range(1.0..4.0)))
            .collect();
        let probed = match local_search(model, alloc, &theta0, task, params.probe_iters, params.step)
        {
            Ok(theta) => theta,
            Err(Error::AllStartsDiverged(_)) => continue,
            Err(e) => return Err(e),
        };
        let error = gate_error(model, alloc, &probed, task)?;
        if !error.is_finite() {
            continue;
        }
        // strict comparison keeps the earliest start on ties
        if best.as_ref().is_none_or(|(b, _)| error < *b) {
            best = Some((error, probed));
        }
    }
    let (_, survivor) = best.ok_or(Error::AllStartsDiverged(params.n_starts))?;

    let refined = local_search(model, alloc, &survivor, task, params.refine_iters, params.step)?;
    let error_continuous = gate_error(model, alloc, &refined, task)?;
    let theta_discrete = discretize(&refined);
    let theta_disc_f: Vec<F> = theta_discrete
        .iter()
        .map(|&t| F::from_usize_lossy(t as usize))
        .collect();
    let error_discrete = gate_error(model, alloc, &theta_disc_f, task)?;
    let mut truth_outputs = [F::zero(); 4];
    for (corner, slot) in truth_outputs.iter_mut().enumerate() {
        let x = corner_input(alloc, &config_pins, &theta_disc_f, task, corner, pins);
        *slot = model.forward(&x)?[alloc.output as usize];
    }
    Ok(SearchResult {
        allocation: *alloc,
        gate: task.gate,
        theta_continuous: refined,
        theta_discrete,
        error_continuous,
        error_discrete,
        truth_outputs,
    })
}

/// All distinct (unordered input pair, output) assignments over the pins:
/// `pins * C(pins - 1, 2)` allocations, 252 for nine pins.
pub fn default_allocations(pin_count: usize) -> Vec<Allocation> {
    let mut out = Vec::new();
    for output in 0..pin_count as PinId {
        for a in 0..pin_count as PinId {
            if a == output {
                continue;
            }
            for b in (a + 1)..pin_count as PinId {
                if b == output {
                    continue;
                }
                out.push(Allocation {
                    input_a: a,
                    input_b: b,
                    output,
                });
            }
        }
    }
    out
}

pub struct AllocationSearch<F> {
    pub best: SearchResult<F>,
    pub per_allocation: Vec<SearchResult<F>>,
}

/// Runs the multistart search for every allocation and returns the
/// lowest-discrete-error result (ties resolve to the earliest allocation),
/// keeping the full per-allocation table.
pub fn search_all_allocations<F: Real>(
    model: &Mlp<F>,
    task: &GateTask,
    allocations: &[Allocation],
    params: &SearchParams,
) -> Result<AllocationSearch<F>> {
    if allocations.is_empty() {
        return Err(Error::invalid("no allocations to search"));
    }
    let mut per_allocation: Vec<SearchResult<F>> = Vec::with_capacity(allocations.len());
    let mut best_index = 0usize;
    for (i, alloc) in allocations.iter().enumerate() {
        let seed = crate::seeds::sub_seed(params.seed, &format!("alloc-{i}"));
        let result = multistart_search(model, alloc, task, &SearchParams { seed, ..*params })?;
        per_allocation.push(result);
        if per_allocation[i].error_discrete < per_allocation[best_index].error_discrete {
            best_index = i;
        }
    }
    Ok(AllocationSearch {
        best: per_allocation[best_index].clone(),
        per_allocation,
    })
}
