//! Locality-vector extraction: fixed-geometry integer encodings of the
//! subgraph around each key gate, plus formatting and image export.
//!
//! For key input `i`, the extractor finds the key gate `KG` it feeds and the
//! data-side driver `G` on the key gate's other pin, then concatenates three
//! sections: a backward window rooted at `G` (codes prepended, so positions
//! run from netlist inputs toward outputs), the key gate's own code, and a
//! forward window rooted at `KG` (codes appended). Each visited gate
//! contributes a fixed number of child slots (`f_in` backward, `f_out`
//! forward); missing neighbors fill their slot with code 0, and the window
//! is the depth-bounded tree unrolling, so the vector geometry is identical
//! for every locality and the raw vector can be decoded back into the
//! window it came from.
//!
//! Two depth interpretations are provided. `Levels` counts breadth-first
//! generations and emits the full padded tree of each generation; with the
//! canonical parameters (depths 5/5, widths 2/3) the raw vector has
//! 62 + 1 + 363 = 426 entries, trimmed to 400. `Nodes` counts dequeued
//! gates, emitting `f * (depth - 1)` entries per direction.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::netlist::{GateId, GateType, Key, Netlist};

/// Gate-type encoding: NOT=1, AND=2, NAND=3, OR=4, XOR=5, NOR=6, XNOR=7,
/// BUF=8, FF=9. Interface markers carry no code.
pub fn encode_gate(t: GateType) -> Result<u8, UnencodableType> {
    use GateType::*;
    match t {
        Not => Ok(1),
        And => Ok(2),
        Nand => Ok(3),
        Or => Ok(4),
        Xor => Ok(5),
        Nor => Ok(6),
        Xnor => Ok(7),
        Buf => Ok(8),
        Ff => Ok(9),
        Input | KeyInput | Output => Err(UnencodableType(t)),
    }
}

/// Largest gate code; formatted vectors divide by this.
pub const MAX_CODE: u8 = 9;

/// The empty-location code used for missing neighbors and interface markers.
pub const EMPTY_CODE: u8 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnencodableType(pub GateType);

impl fmt::Display for UnencodableType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} has no locality encoding", self.0)
    }
}

impl core::error::Error for UnencodableType {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DepthMode {
    /// Depth counts breadth-first generations; every generation is emitted
    /// as a full padded level.
    Levels,
    /// Depth counts dequeued gates, as in a plain bounded BFS; `depth - 1`
    /// gates emit their padded children.
    Nodes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Backward,
    Forward,
}

/// Extraction geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionParams {
    /// Backward window depth.
    pub d_b: usize,
    /// Forward window depth.
    pub d_f: usize,
    /// Fan-in slots per gate in the backward window.
    pub f_in: usize,
    /// Fan-out slots per gate in the forward window.
    pub f_out: usize,
    pub depth_mode: DepthMode,
    /// Formatted vector length.
    pub l_vec: usize,
}

impl Default for ExtractionParams {
    fn default() -> Self {
        ExtractionParams {
            d_b: 5,
            d_f: 5,
            f_in: 2,
            f_out: 3,
            depth_mode: DepthMode::Levels,
            l_vec: 400,
        }
    }
}

impl ExtractionParams {
    /// Parameter sanity: depths >= 1, `f_in >= 2`, `f_out >= 1`, `l_vec >= 1`.
    pub fn check(&self) -> Result<(), ExtractError> {
        if self.d_b < 1 || self.d_f < 1 || self.f_in < 2 || self.f_out < 1 || self.l_vec < 1 {
            return Err(ExtractError::BadParams);
        }
        Ok(())
    }

    fn dir_len(&self, depth: usize, fan: usize) -> usize {
        match self.depth_mode {
            DepthMode::Levels => {
                let mut total = 0usize;
                let mut level = 1usize;
                for _ in 0..depth {
                    level *= fan;
                    total += level;
                }
                total
            }
            DepthMode::Nodes => fan * (depth - 1),
        }
    }

    /// Entries contributed by the backward section.
    pub fn backward_len(&self) -> usize {
        self.dir_len(self.d_b, self.f_in)
    }

    /// Entries contributed by the forward section.
    pub fn forward_len(&self) -> usize {
        self.dir_len(self.d_f, self.f_out)
    }

    /// Raw vector length: backward + center + forward.
    pub fn raw_len(&self) -> usize {
        self.backward_len() + 1 + self.forward_len()
    }

    /// Index of the key-gate code in both raw and formatted vectors
    /// (trimming and padding only touch the tail).
    pub fn center_index(&self) -> usize {
        self.backward_len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtractError {
    BadParams,
    NoKeyInputs,
    /// A key input must feed exactly one gate.
    KeyInputFanout {
        key_input: GateId,
        consumers: usize,
    },
    /// The gate fed by a key input must be an XOR or XNOR.
    KeyGateNotXorLike {
        key_input: GateId,
        gate: GateId,
        gtype: GateType,
    },
    /// The raw vector is still longer than `l_vec` after removing every
    /// trailing empty entry.
    IncompressibleOverflow {
        nonzero_len: usize,
        l_vec: usize,
    },
    /// Raw length does not match the params geometry (reconstruction).
    GeometryMismatch {
        raw_len: usize,
        expected: usize,
    },
}

impl fmt::Display for ExtractError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtractError::BadParams => f.write_str("invalid extraction parameters"),
            ExtractError::NoKeyInputs => f.write_str("netlist has no key inputs"),
            ExtractError::KeyInputFanout {
                key_input,
                consumers,
            } => {
                write!(
                    f,
                    "key input {key_input} feeds {consumers} gates (need exactly 1)"
                )
            }
            ExtractError::KeyGateNotXorLike {
                key_input,
                gate,
                gtype,
            } => {
                write!(
                    f,
                    "key input {key_input} feeds {gtype} {gate}, not an XOR/XNOR"
                )
            }
            ExtractError::IncompressibleOverflow { nonzero_len, l_vec } => {
                write!(
                    f,
                    "raw vector non-empty prefix {nonzero_len} exceeds target length {l_vec}"
                )
            }
            ExtractError::GeometryMismatch { raw_len, expected } => {
                write!(
                    f,
                    "raw vector length {raw_len} does not match geometry length {expected}"
                )
            }
        }
    }
}

impl core::error::Error for ExtractError {}

/// One extracted locality.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalityVector {
    /// Which key input this window describes.
    pub key_index: usize,
    /// Key bit, when an activation key was supplied.
    pub label: Option<bool>,
    /// Integer codes: backward section, center, forward section.
    pub raw: Vec<u8>,
    /// Length-`l_vec` sequence, codes divided by 9.
    pub formatted: Vec<f32>,
}

/// The code a window slot stores for an (optional) gate: markers and missing
/// neighbors are empty.
fn window_code(n: &Netlist, id: Option<GateId>) -> u8 {
    match id {
        None => EMPTY_CODE,
        Some(id) => encode_gate(n.gate(id).gtype).unwrap_or(EMPTY_CODE),
    }
}

/// Child slots of a window node: fan-in pins (backward) or consumers in
/// ascending id order (forward), padded or truncated to the fan width.
/// Interface markers and empty slots expand to empty slots.
fn padded_children(
    n: &Netlist,
    id: Option<GateId>,
    dir: Direction,
    fan: usize,
) -> Vec<Option<GateId>> {
    let mut out = vec![None; fan];
    if let Some(id) = id {
        let g = n.gate(id);
        if !g.gtype.is_source() {
            let neighbors: &[GateId] = match dir {
                Direction::Backward => &g.fanin,
                Direction::Forward => &g.fanout,
            };
            for (slot, &c) in out.iter_mut().zip(neighbors.iter()) {
                *slot = Some(c);
            }
        }
    }
    out
}

/// The window as emitted by the search, block by block: one block per
/// generation (`Levels`) or per dequeued gate (`Nodes`). Used by the
/// reconstruction oracle; [`bfs_extract`] flattens it.
pub fn window_blocks(
    n: &Netlist,
    dir: Direction,
    root: GateId,
    params: &ExtractionParams,
) -> Vec<Vec<u8>> {
    let (depth, fan) = match dir {
        Direction::Backward => (params.d_b, params.f_in),
        Direction::Forward => (params.d_f, params.f_out),
    };
    let mut blocks = Vec::new();
    match params.depth_mode {
        DepthMode::Levels => {
            let mut frontier: Vec<Option<GateId>> = vec![Some(root)];
            for _ in 0..depth {
                let mut next = Vec::with_capacity(frontier.len() * fan);
                let mut codes = Vec::with_capacity(frontier.len() * fan);
                for &node in &frontier {
                    for child in padded_children(n, node, dir, fan) {
                        codes.push(window_code(n, child));
                        next.push(child);
                    }
                }
                blocks.push(codes);
                frontier = next;
            }
        }
        DepthMode::Nodes => {
            // dequeued gate number `step` emits its padded children
            let mut queue: Vec<Option<GateId>> = vec![Some(root)];
            for step in 0..depth.saturating_sub(1) {
                let node = queue[step];
                let mut codes = Vec::with_capacity(fan);
                for child in padded_children(n, node, dir, fan) {
                    codes.push(window_code(n, child));
                    queue.push(child);
                }
                blocks.push(codes);
            }
        }
    }
    blocks
}

/// Breadth-first window extraction from `root`. Backward windows prepend
/// each visited code, forward windows append, so the flattened sequence is
/// ordered from netlist inputs toward outputs.
pub fn bfs_extract(
    n: &Netlist,
    dir: Direction,
    root: GateId,
    params: &ExtractionParams,
) -> Vec<u8> {
    let blocks = window_blocks(n, dir, root, params);
    let mut out: Vec<u8> = Vec::new();
    match dir {
        Direction::Forward => {
            for b in blocks {
                out.extend(b);
            }
        }
        Direction::Backward => {
            // prepending each emitted code reverses the emission sequence
            for b in blocks {
                for c in b {
                    out.insert(0, c);
                }
            }
        }
    }
    out
}

/// Window blocks on each side of the center code.
pub type WindowSections = (Vec<Vec<u8>>, u8, Vec<Vec<u8>>);

/// Invert the flattening: split a raw vector back into backward blocks,
/// center code and forward blocks.
pub fn reconstruct_window(
    raw: &[u8],
    params: &ExtractionParams,
) -> Result<WindowSections, ExtractError> {
    if raw.len() != params.raw_len() {
        return Err(ExtractError::GeometryMismatch {
            raw_len: raw.len(),
            expected: params.raw_len(),
        });
    }
    let block_sizes = |depth: usize, fan: usize| -> Vec<usize> {
        match params.depth_mode {
            DepthMode::Levels => (1..=depth).map(|l| fan.pow(l as u32)).collect(),
            DepthMode::Nodes => vec![fan; depth - 1],
        }
    };
    let bwd_total = params.backward_len();
    let (bwd_flat, rest) = raw.split_at(bwd_total);
    let center = rest[0];
    let fwd_flat = &rest[1..];

    // backward: the flat section is the reversed emission sequence
    let mut emission: Vec<u8> = bwd_flat.iter().rev().copied().collect();
    let mut backward = Vec::new();
    for size in block_sizes(params.d_b, params.f_in) {
        let tail: Vec<u8> = emission.drain(..size).collect();
        backward.push(tail);
    }
    let mut forward = Vec::new();
    let mut off = 0;
    for size in block_sizes(params.d_f, params.f_out) {
        forward.push(fwd_flat[off..off + size].to_vec());
        off += size;
    }
    Ok((backward, center, forward))
}

/// Identify key gate and data-side driver for one key input.
fn key_gate_of(n: &Netlist, key_input: GateId) -> Result<(GateId, GateId), ExtractError> {
    let fanout = &n.gate(key_input).fanout;
    if fanout.len() != 1 {
        return Err(ExtractError::KeyInputFanout {
            key_input,
            consumers: fanout.len(),
        });
    }
    let kg = fanout[0];
    let g = n.gate(kg);
    if !matches!(g.gtype, GateType::Xor | GateType::Xnor) {
        return Err(ExtractError::KeyGateNotXorLike {
            key_input,
            gate: kg,
            gtype: g.gtype,
        });
    }
    // data side: the first pin that is not this key input (falls back to the
    // other pin when both read key inputs, e.g. after run collapsing)
    let data = g
        .fanin
        .iter()
        .copied()
        .find(|&p| n.gate(p).gtype != GateType::KeyInput)
        .or_else(|| g.fanin.iter().copied().find(|&p| p != key_input))
        .unwrap_or(key_input);
    Ok((kg, data))
}

/// Extract one locality per key input; when `key` is given each locality is
/// labeled with its bit.
pub fn lve(
    n: &Netlist,
    params: &ExtractionParams,
    key: Option<&Key>,
) -> Result<Vec<LocalityVector>, ExtractError> {
    params.check()?;
    if n.key_inputs.is_empty() {
        return Err(ExtractError::NoKeyInputs);
    }
    let mut out = Vec::with_capacity(n.key_inputs.len());
    for (i, &key_input) in n.key_inputs.iter().enumerate() {
        let (kg, data) = key_gate_of(n, key_input)?;
        let mut raw = bfs_extract(n, Direction::Backward, data, params);
        raw.push(encode_gate(n.gate(kg).gtype).expect("key gate is XOR/XNOR"));
        raw.extend(bfs_extract(n, Direction::Forward, kg, params));
        let formatted = format_vector(&raw, params.l_vec)?;
        out.push(LocalityVector {
            key_index: i,
            label: key.map(|k| k.bit(i)),
            raw,
            formatted,
        });
    }
    Ok(out)
}

/// Fit a raw vector to `l_vec` entries and normalize to `[0, 1]`.
///
/// Overlong vectors lose empty entries from the tail (the deep end of the
/// forward section) and only from the tail, so positional structure is
/// preserved; if the non-empty prefix alone exceeds `l_vec` the vector is
/// incompressible and an error is returned. Short vectors are zero-padded.
pub fn format_vector(raw: &[u8], l_vec: usize) -> Result<Vec<f32>, ExtractError> {
    let mut codes: Vec<u8> = raw.to_vec();
    if codes.len() > l_vec {
        let nonzero_len = raw.len() - raw.iter().rev().take_while(|&&c| c == EMPTY_CODE).count();
        if nonzero_len > l_vec {
            return Err(ExtractError::IncompressibleOverflow { nonzero_len, l_vec });
        }
        codes.truncate(l_vec);
    } else {
        codes.resize(l_vec, EMPTY_CODE);
    }
    Ok(codes
        .into_iter()
        .map(|c| c as f32 / MAX_CODE as f32)
        .collect())
}

/// Row-major 8-bit grayscale image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn pixel(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    /// Mean pixel value per row.
    pub fn row_profile(&self) -> Vec<f64> {
        (0..self.height)
            .map(|r| {
                let row = &self.pixels[r * self.width..(r + 1) * self.width];
                row.iter().map(|&p| p as f64).sum::<f64>() / self.width as f64
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ImageError {
    NoVectors,
    UnequalLengths,
}

impl fmt::Display for ImageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ImageError::NoVectors => f.write_str("no vectors to export"),
            ImageError::UnequalLengths => f.write_str("vectors have different formatted lengths"),
        }
    }
}

impl core::error::Error for ImageError {}

/// Stack formatted vectors as image columns: width = vector count, height =
/// vector length, pixel = round(value * 255). With `group_by_label` one
/// image per present label is produced (keyed `Some(bit)`), otherwise a
/// single combined image keyed `None`.
pub fn export_image(
    vectors: &[LocalityVector],
    group_by_label: bool,
) -> Result<Vec<(Option<bool>, GrayImage)>, ImageError> {
    if vectors.is_empty() {
        return Err(ImageError::NoVectors);
    }
    let height = vectors[0].formatted.len();
    if vectors.iter().any(|v| v.formatted.len() != height) {
        return Err(ImageError::UnequalLengths);
    }
    let render = |vs: &[&LocalityVector]| -> GrayImage {
        let width = vs.len();
        let mut pixels = vec![0u8; width * height];
        for (col, v) in vs.iter().enumerate() {
            for (row, &val) in v.formatted.iter().enumerate() {
                // values are in [0, 1]; +0.5 rounds to nearest
                pixels[row * width + col] = (val * 255.0 + 0.5) as u8;
            }
        }
        GrayImage {
            width,
            height,
            pixels,
        }
    };
    if group_by_label {
        let mut out = Vec::new();
        for lbl in [false, true] {
            let group: Vec<&LocalityVector> =
                vectors.iter().filter(|v| v.label == Some(lbl)).collect();
            if !group.is_empty() {
                out.push((Some(lbl), render(&group)));
            }
        }
        if out.is_empty() {
            return Err(ImageError::NoVectors);
        }
        Ok(out)
    } else {
        let all: Vec<&LocalityVector> = vectors.iter().collect();
        Ok(vec![(None, render(&all))])
    }
}

/// Pearson chi-square statistic for a 2x2 contingency table.
pub fn chi_square_2x2(table: [[u64; 2]; 2]) -> f64 {
    let row: [f64; 2] = [
        (table[0][0] + table[0][1]) as f64,
        (table[1][0] + table[1][1]) as f64,
    ];
    let col: [f64; 2] = [
        (table[0][0] + table[1][0]) as f64,
        (table[0][1] + table[1][1]) as f64,
    ];
    let total = row[0] + row[1];
    let mut chi2 = 0.0;
    for r in 0..2 {
        for c in 0..2 {
            let expected = row[r] * col[c] / total;
            if expected > 0.0 {
                let d = table[r][c] as f64 - expected;
                chi2 += d * d / expected;
            }
        }
    }
    chi2
}
