//! Key prediction against a locked target and attack scoring.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::Serialize;

use crate::ann::{Model, Real};
use crate::dataset::Scenario;
use crate::extract::{lve, ExtractError, ExtractionParams};
use crate::netlist::{Key, Netlist};

#[derive(Debug, Clone, PartialEq)]
pub enum DeployError {
    Extract(ExtractError),
    ShapeMismatch {
        vector_len: usize,
        model_input: usize,
    },
}

impl fmt::Display for DeployError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeployError::Extract(e) => write!(f, "{e}"),
            DeployError::ShapeMismatch {
                vector_len,
                model_input,
            } => {
                write!(
                    f,
                    "locality length {vector_len} does not fit model input {model_input}"
                )
            }
        }
    }
}

impl core::error::Error for DeployError {}

impl From<ExtractError> for DeployError {
    fn from(e: ExtractError) -> Self {
        DeployError::Extract(e)
    }
}

/// Raw deployment result: the assembled key plus per-bit probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Deployment {
    pub key: Key,
    /// `[p(bit 0), p(bit 1)]` per key input, in key order.
    pub probabilities: Vec<[f64; 2]>,
    /// Model invocations performed (one per key input).
    pub predictions_made: usize,
}

/// Predict every key bit of a locked netlist independently and assemble the
/// key in key-input order. Equal class probabilities resolve to bit 0.
pub fn deploy<T: Real>(
    model: &Model<T>,
    target_locked: &Netlist,
    params: &ExtractionParams,
) -> Result<Deployment, DeployError> {
    let model_input = model.input_shape.len();
    if params.l_vec != model_input {
        return Err(DeployError::ShapeMismatch {
            vector_len: params.l_vec,
            model_input,
        });
    }
    let vectors = lve(target_locked, params, None)?;
    let mut bits = Vec::with_capacity(vectors.len());
    let mut probabilities = Vec::with_capacity(vectors.len());
    for v in &vectors {
        let x: Vec<T> = v.formatted.iter().map(|&f| T::from_f64(f as f64)).collect();
        let (bit, probs) = model.predict(&x);
        bits.push(bit);
        probabilities.push(probs);
    }
    Ok(Deployment {
        predictions_made: bits.len(),
        key: Key::from_bits(bits),
        probabilities,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyLengthMismatch {
    pub predicted: usize,
    pub actual: usize,
}

impl fmt::Display for KeyLengthMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "predicted key has {} bits, actual has {}",
            self.predicted, self.actual
        )
    }
}

impl core::error::Error for KeyLengthMismatch {}

/// Key prediction accuracy: percentage of agreeing bits.
pub fn kpa(predicted: &Key, actual: &Key) -> Result<f64, KeyLengthMismatch> {
    if predicted.len() != actual.len() {
        return Err(KeyLengthMismatch {
            predicted: predicted.len(),
            actual: actual.len(),
        });
    }
    let agree = predicted
        .bits()
        .iter()
        .zip(actual.bits())
        .filter(|(a, b)| a == b)
        .count();
    Ok(100.0 * agree as f64 / predicted.len() as f64)
}

/// Final attack output.
#[derive(Debug, Clone, Serialize)]
pub struct AttackReport {
    pub scenario: Scenario,
    pub model: String,
    pub target_id: String,
    pub predicted_key: Key,
    pub probabilities: Vec<[f64; 2]>,
    /// Only present when the ground-truth key was supplied for scoring.
    pub kpa: Option<f64>,
    pub predictions_made: usize,
    pub seed: u64,
    /// Wall-clock stage timings, filled by the pipeline layer.
    pub timing_ms: Option<u64>,
}
