//! Model assembly: layer stacks, the fixed-frame CNN family, the two MLP
//! configurations, prediction and a versioned JSON serialization.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use super::layers::{Conv2d, Dense, Layer, MaxPool, Relu, Shape, Softmax};
use super::tensor::Real;
use crate::dataset::Scenario;
use crate::seed;

/// CNN input geometry: formatted vectors reshaped row-major to 20x20x1.
pub const CNN_INPUT_HW: (usize, usize) = (20, 20);
/// Filters in the fixed input convolution.
pub const INPUT_CONV_FILTERS: usize = 64;
/// Filters in every internal convolution.
pub const INTERNAL_CONV_FILTERS: usize = 128;
/// Units in the fixed dense layer before the output.
pub const DENSE_UNITS: usize = 128;
/// Output classes (key bit 0 / 1).
pub const CLASSES: usize = 2;
/// Formatted locality length and MLP input width.
pub const INPUT_LEN: usize = 400;
/// Maximum number of internal layers in a CNN architecture.
pub const MAX_INTERNAL_LAYERS: usize = 7;

/// One evolvable internal layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InternalLayer {
    Conv,
    Pool,
}

/// The decoded architecture: an ordered list of internal layers placed
/// between the fixed frame (input conv 64 in front, dense 128 + softmax
/// output behind, flatten before the dense).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct CnnArchitecture {
    pub internal: Vec<InternalLayer>,
}

impl CnnArchitecture {
    pub fn new(internal: Vec<InternalLayer>) -> Self {
        debug_assert!(internal.len() <= MAX_INTERNAL_LAYERS);
        CnnArchitecture { internal }
    }

    /// Number of internal layers.
    pub fn depth(&self) -> usize {
        self.internal.len()
    }

    /// Compact text form, e.g. `conv-conv-pool` or `empty`.
    pub fn describe(&self) -> String {
        if self.internal.is_empty() {
            return String::from("empty");
        }
        let parts: Vec<&str> = self
            .internal
            .iter()
            .map(|l| match l {
                InternalLayer::Conv => "conv",
                InternalLayer::Pool => "pool",
            })
            .collect();
        parts.join("-")
    }

    /// Stable 64-bit hash of the architecture (FNV-1a over the description).
    pub fn hash(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        for b in self.describe().as_bytes() {
            h ^= *b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        h
    }
}

impl fmt::Display for CnnArchitecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BuildError {
    /// A layer would shrink a spatial dimension below 1.
    SpatialUnderflow {
        layer_index: usize,
        h: usize,
        w: usize,
    },
}

impl fmt::Display for BuildError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuildError::SpatialUnderflow { layer_index, h, w } => {
                write!(
                    f,
                    "internal layer {layer_index} underflows spatial dims {h}x{w}"
                )
            }
        }
    }
}

impl core::error::Error for BuildError {}

/// Training provenance kept with a model.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ModelMeta {
    pub init_seed: u64,
    pub train_seed: u64,
    pub epochs_trained: usize,
    pub loss_curve: Vec<f64>,
    pub accuracy_curve: Vec<f64>,
    /// Human-readable architecture tag (`mlp-gss`, `cnn:empty`, ...).
    pub architecture: String,
}

/// A feedforward stack. The last layer is always softmax; training drives
/// the pre-softmax logits directly.
#[derive(Debug, Clone)]
pub struct Model<T> {
    pub layers: Vec<Layer<T>>,
    pub input_shape: Shape,
    pub meta: ModelMeta,
}

impl<T: Real> Model<T> {
    /// Assemble and He-initialize a stack. Panics if the shapes do not
    /// chain; builders validate beforehand.
    pub fn new(
        input_shape: Shape,
        layers: Vec<Layer<T>>,
        init_seed: u64,
        architecture: String,
    ) -> Self {
        let mut m = Model {
            layers,
            input_shape,
            meta: ModelMeta {
                init_seed,
                architecture,
                ..ModelMeta::default()
            },
        };
        let mut shape = input_shape;
        for (i, l) in m.layers.iter().enumerate() {
            shape = l
                .out_shape(shape)
                .unwrap_or_else(|| panic!("layer {i} does not accept its input shape"));
        }
        let mut rng = seed::rng(seed::derive(init_seed, &[0x1417]));
        for l in m.layers.iter_mut() {
            l.init_weights(&mut rng);
        }
        m
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.param_count()).sum()
    }

    /// Shapes flowing between layers, input first.
    fn shape_chain(&self) -> Vec<Shape> {
        let mut shapes = vec![self.input_shape];
        for l in &self.layers {
            let s = *shapes.last().unwrap();
            shapes.push(l.out_shape(s).expect("validated at construction"));
        }
        shapes
    }

    /// Training forward pass up to the logits (caches activations).
    pub fn forward_logits(&mut self, x: &[T], batch: usize) -> Vec<T> {
        let shapes = self.shape_chain();
        let mut cur = x.to_vec();
        for (i, l) in self.layers.iter_mut().enumerate() {
            if matches!(l, Layer::Softmax(_)) && i == shapes.len() - 2 {
                break;
            }
            cur = l.forward(&cur, batch, shapes[i]);
        }
        cur
    }

    /// Backward pass from logit gradients; parameter gradients accumulate.
    pub fn backward_from_logits(&mut self, dlogits: &[T], batch: usize) {
        let shapes = self.shape_chain();
        let mut cur = dlogits.to_vec();
        let last = self.layers.len() - 1;
        for i in (0..self.layers.len()).rev() {
            if i == last && matches!(self.layers[i], Layer::Softmax(_)) {
                continue;
            }
            match self.layers[i].backward(&cur, batch, shapes[i + 1], i > 0) {
                Some(dx) => cur = dx,
                None => break,
            }
        }
    }

    /// Read-only inference: identical math to the training path, no caches.
    pub fn apply(&self, x: &[T], batch: usize) -> Vec<T> {
        let shapes = self.shape_chain();
        let mut cur = x.to_vec();
        for (i, l) in self.layers.iter().enumerate() {
            cur = l.eval(&cur, batch, shapes[i]);
        }
        cur
    }

    /// Read-only logits: the stack without its trailing softmax.
    pub fn eval_logits(&self, x: &[T], batch: usize) -> Vec<T> {
        let shapes = self.shape_chain();
        let mut cur = x.to_vec();
        for (i, l) in self.layers.iter().enumerate() {
            if i + 1 == self.layers.len() && matches!(l, Layer::Softmax(_)) {
                break;
            }
            cur = l.eval(&cur, batch, shapes[i]);
        }
        cur
    }

    /// Class probabilities for one input.
    pub fn predict(&self, x: &[T]) -> (bool, [f64; CLASSES]) {
        let p = self.apply(x, 1);
        let probs = [p[0].into_f64(), p[1].into_f64()];
        // argmax with ties resolving to bit 0
        (probs[1] > probs[0], probs)
    }

    pub fn zero_grads(&mut self) {
        for l in self.layers.iter_mut() {
            for (_, g) in l.params_grads() {
                for v in g.iter_mut() {
                    *v = T::zero();
                }
            }
        }
    }
}

// ----------------------------------------------------------------------
// Builders
// ----------------------------------------------------------------------

/// MLP widths per scenario: 400x1000x256x2 (generalized-set) and
/// 400x512x128x2 (self-referencing), ReLU hidden activations, softmax out.
pub fn mlp_widths(scenario: Scenario) -> [usize; 4] {
    match scenario {
        Scenario::Gss => [INPUT_LEN, 1000, 256, CLASSES],
        Scenario::Srs => [INPUT_LEN, 512, 128, CLASSES],
    }
}

pub fn build_mlp<T: Real>(scenario: Scenario, init_seed: u64) -> Model<T> {
    let w = mlp_widths(scenario);
    let layers = vec![
        Layer::Dense(Dense::new(w[0], w[1])),
        Layer::Relu(Relu::default()),
        Layer::Dense(Dense::new(w[1], w[2])),
        Layer::Relu(Relu::default()),
        Layer::Dense(Dense::new(w[2], w[3])),
        Layer::Softmax(Softmax::default()),
    ];
    Model::new(
        Shape::Flat(w[0]),
        layers,
        init_seed,
        format!("mlp-{scenario}"),
    )
}

/// Spatial plan of an architecture over a given input: validates every
/// internal layer fits and returns the flatten width. No weights touched.
pub fn cnn_shape_plan(
    arch: &CnnArchitecture,
    input_hw: (usize, usize),
) -> Result<usize, BuildError> {
    let (mut h, mut w) = input_hw;
    if h < 3 || w < 3 {
        return Err(BuildError::SpatialUnderflow {
            layer_index: 0,
            h,
            w,
        });
    }
    h -= 2;
    w -= 2;
    let mut c = INPUT_CONV_FILTERS;
    for (i, il) in arch.internal.iter().enumerate() {
        match il {
            InternalLayer::Conv => {
                if h < 3 || w < 3 {
                    return Err(BuildError::SpatialUnderflow {
                        layer_index: i,
                        h,
                        w,
                    });
                }
                h -= 2;
                w -= 2;
                c = INTERNAL_CONV_FILTERS;
            }
            InternalLayer::Pool => {
                if h < 2 || w < 2 {
                    return Err(BuildError::SpatialUnderflow {
                        layer_index: i,
                        h,
                        w,
                    });
                }
                h -= 1;
                w -= 1;
            }
        }
    }
    Ok(h * w * c)
}

/// Instantiate the fixed frame around an internal layer list:
/// conv(64) -> internal layers -> flatten -> dense(128) -> dense(2) softmax.
pub fn build_cnn<T: Real>(arch: &CnnArchitecture, init_seed: u64) -> Result<Model<T>, BuildError> {
    cnn_shape_plan(arch, CNN_INPUT_HW)?;
    let (mut h, mut w) = CNN_INPUT_HW;
    let mut c = 1;
    let mut layers: Vec<Layer<T>> = Vec::new();
    layers.push(Layer::Conv2d(Conv2d::new(h, w, c, INPUT_CONV_FILTERS)));
    layers.push(Layer::Relu(Relu::default()));
    h -= 2;
    w -= 2;
    c = INPUT_CONV_FILTERS;
    for il in arch.internal.iter() {
        match il {
            InternalLayer::Conv => {
                layers.push(Layer::Conv2d(Conv2d::new(h, w, c, INTERNAL_CONV_FILTERS)));
                layers.push(Layer::Relu(Relu::default()));
                h -= 2;
                w -= 2;
                c = INTERNAL_CONV_FILTERS;
            }
            InternalLayer::Pool => {
                layers.push(Layer::MaxPool(MaxPool::new(h, w, c)));
                h -= 1;
                w -= 1;
            }
        }
    }
    layers.push(Layer::Flatten);
    layers.push(Layer::Dense(Dense::new(h * w * c, DENSE_UNITS)));
    layers.push(Layer::Relu(Relu::default()));
    layers.push(Layer::Dense(Dense::new(DENSE_UNITS, CLASSES)));
    layers.push(Layer::Softmax(Softmax::default()));
    Ok(Model::new(
        Shape::Hwc {
            h: CNN_INPUT_HW.0,
            w: CNN_INPUT_HW.1,
            c: 1,
        },
        layers,
        init_seed,
        format!("cnn:{arch}"),
    ))
}

// ----------------------------------------------------------------------
// Serialization (versioned JSON, weights stored as 64-bit floats)
// ----------------------------------------------------------------------

const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    input_shape: ShapeFile,
    layers: Vec<LayerFile>,
    meta: ModelMeta,
}

#[derive(Serialize, Deserialize, Clone, Copy)]
#[serde(untagged)]
enum ShapeFile {
    Flat(usize),
    Hwc(usize, usize, usize),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum LayerFile {
    Dense {
        input: usize,
        output: usize,
        w: String,
        b: String,
    },
    Conv2d {
        h: usize,
        w: usize,
        c: usize,
        filters: usize,
        k: String,
        b: String,
    },
    Maxpool {
        h: usize,
        w: usize,
        c: usize,
    },
    Relu,
    Flatten,
    Softmax,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelIoError {
    Json(String),
    Version { found: u32, expected: u32 },
    BadBlob,
}

impl fmt::Display for ModelIoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelIoError::Json(e) => write!(f, "model JSON: {e}"),
            ModelIoError::Version { found, expected } => {
                write!(f, "model format version {found}, expected {expected}")
            }
            ModelIoError::BadBlob => f.write_str("weight blob is not valid base64 f64 data"),
        }
    }
}

impl core::error::Error for ModelIoError {}

fn encode_blob<T: Real>(vals: &[T]) -> String {
    use base64::Engine;
    let mut bytes = Vec::with_capacity(vals.len() * 8);
    for v in vals {
        bytes.extend_from_slice(&v.into_f64().to_le_bytes());
    }
    base64::engine::general_purpose::STANDARD.encode(bytes)
}

fn decode_blob<T: Real>(s: &str, expect: usize) -> Result<Vec<T>, ModelIoError> {
    use base64::Engine;
    let bytes = base64::engine::general_purpose::STANDARD
        .decode(s)
        .map_err(|_| ModelIoError::BadBlob)?;
    if bytes.len() != expect * 8 {
        return Err(ModelIoError::BadBlob);
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| T::from_f64(f64::from_le_bytes(c.try_into().unwrap())))
        .collect())
}

impl<T: Real> Model<T> {
    pub fn to_json(&self) -> String {
        let layers = self
            .layers
            .iter()
            .map(|l| match l {
                Layer::Dense(d) => LayerFile::Dense {
                    input: d.in_dim,
                    output: d.out_dim,
                    w: encode_blob(&d.w),
                    b: encode_blob(&d.b),
                },
                Layer::Conv2d(c) => LayerFile::Conv2d {
                    h: c.in_h,
                    w: c.in_w,
                    c: c.in_c,
                    filters: c.filters,
                    k: encode_blob(&c.k),
                    b: encode_blob(&c.b),
                },
                Layer::MaxPool(p) => LayerFile::Maxpool {
                    h: p.in_h,
                    w: p.in_w,
                    c: p.c,
                },
                Layer::Relu(_) => LayerFile::Relu,
                Layer::Flatten => LayerFile::Flatten,
                Layer::Softmax(_) => LayerFile::Softmax,
            })
            .collect();
        let file = ModelFile {
            format_version: FORMAT_VERSION,
            input_shape: match self.input_shape {
                Shape::Flat(n) => ShapeFile::Flat(n),
                Shape::Hwc { h, w, c } => ShapeFile::Hwc(h, w, c),
            },
            layers,
            meta: self.meta.clone(),
        };
        serde_json::to_string(&file).expect("model serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, ModelIoError> {
        let file: ModelFile =
            serde_json::from_str(s).map_err(|e| ModelIoError::Json(format!("{e}")))?;
        if file.format_version != FORMAT_VERSION {
            return Err(ModelIoError::Version {
                found: file.format_version,
                expected: FORMAT_VERSION,
            });
        }
        let mut layers: Vec<Layer<T>> = Vec::with_capacity(file.layers.len());
        for lf in file.layers {
            layers.push(match lf {
                LayerFile::Dense {
                    input,
                    output,
                    w,
                    b,
                } => {
                    let mut d = Dense::new(input, output);
                    d.w = decode_blob(&w, input * output)?;
                    d.b = decode_blob(&b, output)?;
                    Layer::Dense(d)
                }
                LayerFile::Conv2d {
                    h,
                    w,
                    c,
                    filters,
                    k,
                    b,
                } => {
                    let mut cv = Conv2d::new(h, w, c, filters);
                    cv.k = decode_blob(&k, 9 * c * filters)?;
                    cv.b = decode_blob(&b, filters)?;
                    Layer::Conv2d(cv)
                }
                LayerFile::Maxpool { h, w, c } => Layer::MaxPool(MaxPool::new(h, w, c)),
                LayerFile::Relu => Layer::Relu(Relu::default()),
                LayerFile::Flatten => Layer::Flatten,
                LayerFile::Softmax => Layer::Softmax(Softmax::default()),
            });
        }
        Ok(Model {
            layers,
            input_shape: match file.input_shape {
                ShapeFile::Flat(n) => Shape::Flat(n),
                ShapeFile::Hwc(h, w, c) => Shape::Hwc { h, w, c },
            },
            meta: file.meta,
        })
    }
}
