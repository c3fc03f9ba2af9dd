//! Finite-difference oracle for the hand-written backward passes.
//!
//! Every trainable parameter is perturbed by `±h` and the central
//! difference of the cross-entropy loss is compared against the analytic
//! gradient. Run this on `f64` models: the check accumulates in 64-bit
//! either way, but 32-bit forward noise at `h = 1e-3` eats the margin.

use alloc::string::String;
use alloc::vec::Vec;

use super::model::Model;
use super::tensor::Real;
use super::train::softmax_xent_batch;

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub checked: usize,
    /// `layer/param-slot/index` of the worst parameter.
    pub worst: String,
}

fn batch_loss<T: Real>(model: &mut Model<T>, x: &[T], labels: &[u8]) -> f64 {
    let logits = model.forward_logits(x, labels.len());
    softmax_xent_batch(&logits, labels).0
}

/// Compare analytic gradients against central finite differences with
/// step `h` for every trainable parameter.
#[allow(clippy::needless_range_loop)]
pub fn grad_check<T: Real>(
    model: &mut Model<T>,
    x: &[T],
    labels: &[u8],
    h: f64,
) -> GradCheckReport {
    let batch = labels.len();
    // analytic pass
    model.zero_grads();
    let logits = model.forward_logits(x, batch);
    let (_, dlogits, _) = softmax_xent_batch(&logits, labels);
    model.backward_from_logits(&dlogits, batch);
    let analytic: Vec<Vec<f64>> = model
        .layers
        .iter_mut()
        .flat_map(|l| {
            l.params_grads()
                .into_iter()
                .map(|(_, g)| g.iter().map(|&v| v.into_f64()).collect::<Vec<f64>>())
                .collect::<Vec<_>>()
        })
        .collect();

    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        checked: 0,
        worst: String::new(),
    };
    let step = T::from_f64(h);
    let mut slot = 0usize;
    for li in 0..model.layers.len() {
        let nparams = {
            let mut v = Vec::new();
            for (p, _) in model.layers[li].params_grads() {
                v.push(p.len());
            }
            v
        };
        for (pi, &len) in nparams.iter().enumerate() {
            for idx in 0..len {
                let orig = {
                    let mut pg = model.layers[li].params_grads();
                    let val = pg[pi].0[idx];
                    pg[pi].0[idx] = val + step;
                    val
                };
                let up = batch_loss(model, x, labels);
                {
                    let mut pg = model.layers[li].params_grads();
                    pg[pi].0[idx] = orig - step;
                }
                let down = batch_loss(model, x, labels);
                {
                    let mut pg = model.layers[li].params_grads();
                    pg[pi].0[idx] = orig;
                }
                let numeric = (up - down) / (2.0 * h);
                let a = analytic[slot][idx];
                let denom = a.abs().max(numeric.abs()).max(1e-8);
                let rel = (a - numeric).abs() / denom;
                if rel > report.max_rel_error {
                    report.max_rel_error = rel;
                    report.worst = alloc::format!("layer{li}/p{pi}/{idx}");
                }
                report.checked += 1;
            }
            slot += 1;
        }
    }
    model.zero_grads();
    report
}
