//! Layer implementations with hand-written forward and backward passes.
//!
//! Activations flow as flat row-major buffers with an explicit batch
//! dimension; image-shaped activations use HWC layout (channel fastest), so
//! flattening is free. Gradients accumulate into per-layer buffers and are
//! drained by the optimizer after each step.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use super::tensor::{matmul, matmul_acc, softmax_rows, transpose, Real};

/// Activation geometry between layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Flat(usize),
    Hwc { h: usize, w: usize, c: usize },
}

impl Shape {
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        match *self {
            Shape::Flat(n) => n,
            Shape::Hwc { h, w, c } => h * w * c,
        }
    }
}

// ----------------------------------------------------------------------
// Dense
// ----------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct Dense<T> {
    pub in_dim: usize,
    pub out_dim: usize,
    /// `[in_dim, out_dim]` row-major.
    pub w: Vec<T>,
    pub b: Vec<T>,
    pub gw: Vec<T>,
    pub gb: Vec<T>,
    cache_x: Vec<T>,
}

impl<T: Real> Dense<T> {
    pub fn new(in_dim: usize, out_dim: usize) -> Self {
        Dense {
            in_dim,
            out_dim,
            w: vec![T::zero(); in_dim * out_dim],
            b: vec![T::zero(); out_dim],
            gw: vec![T::zero(); in_dim * out_dim],
            gb: vec![T::zero(); out_dim],
            cache_x: Vec::new(),
        }
    }

    pub fn eval(&self, x: &[T], batch: usize) -> Vec<T> {
        let mut y = vec![T::zero(); batch * self.out_dim];
        matmul(x, &self.w, &mut y, batch, self.in_dim, self.out_dim);
        for row in y.chunks_mut(self.out_dim) {
            for (v, &b) in row.iter_mut().zip(&self.b) {
                *v += b;
            }
        }
        y
    }

    fn forward(&mut self, x: &[T], batch: usize) -> Vec<T> {
        let y = self.eval(x, batch);
        self.cache_x = x.to_vec();
        y
    }

    fn backward(&mut self, dy: &[T], batch: usize, compute_dx: bool) -> Option<Vec<T>> {
        let xt = transpose(&self.cache_x, batch, self.in_dim);
        matmul_acc(&xt, dy, &mut self.gw, self.in_dim, batch, self.out_dim);
        for row in dy.chunks(self.out_dim) {
            for (g, &d) in self.gb.iter_mut().zip(row) {
                *g += d;
            }
        }
        if !compute_dx {
            return None;
        }
        let wt = transpose(&self.w, self.in_dim, self.out_dim);
        let mut dx = vec![T::zero(); batch * self.in_dim];
        matmul(dy, &wt, &mut dx, batch, self.out_dim, self.in_dim);
        Some(dx)
    }
}

// ----------------------------------------------------------------------
// Conv2d (3x3 kernel, valid padding, stride 1)
// ----------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct Conv2d<T> {
    pub in_h: usize,
    pub in_w: usize,
    pub in_c: usize,
    pub filters: usize,
    /// `[9 * in_c, filters]` row-major; patch columns ordered (dr, dc, ch).
    pub k: Vec<T>,
    pub b: Vec<T>,
    pub gk: Vec<T>,
    pub gb: Vec<T>,
    cache_x: Vec<T>,
}

impl<T: Real> Conv2d<T> {
    pub fn new(in_h: usize, in_w: usize, in_c: usize, filters: usize) -> Self {
        Conv2d {
            in_h,
            in_w,
            in_c,
            filters,
            k: vec![T::zero(); 9 * in_c * filters],
            b: vec![T::zero(); filters],
            gk: vec![T::zero(); 9 * in_c * filters],
            gb: vec![T::zero(); filters],
            cache_x: Vec::new(),
        }
    }

    pub fn out_hw(&self) -> (usize, usize) {
        (self.in_h - 2, self.in_w - 2)
    }

    fn im2col(&self, x: &[T], buf: &mut [T]) {
        let (oh, ow) = self.out_hw();
        let (w, c) = (self.in_w, self.in_c);
        let cols = 9 * c;
        for orow in 0..oh {
            for ocol in 0..ow {
                let row = &mut buf[(orow * ow + ocol) * cols..(orow * ow + ocol + 1) * cols];
                for dr in 0..3 {
                    let src = ((orow + dr) * w + ocol) * c;
                    row[dr * 3 * c..(dr * 3 + 3) * c].copy_from_slice(&x[src..src + 3 * c]);
                }
            }
        }
    }

    pub fn eval(&self, x: &[T], batch: usize) -> Vec<T> {
        let (oh, ow) = self.out_hw();
        let in_len = self.in_h * self.in_w * self.in_c;
        let out_len = oh * ow * self.filters;
        let cols = 9 * self.in_c;
        let mut patches = vec![T::zero(); oh * ow * cols];
        let mut y = vec![T::zero(); batch * out_len];
        for s in 0..batch {
            self.im2col(&x[s * in_len..(s + 1) * in_len], &mut patches);
            let ys = &mut y[s * out_len..(s + 1) * out_len];
            matmul(&patches, &self.k, ys, oh * ow, cols, self.filters);
            for row in ys.chunks_mut(self.filters) {
                for (v, &b) in row.iter_mut().zip(&self.b) {
                    *v += b;
                }
            }
        }
        y
    }

    fn forward(&mut self, x: &[T], batch: usize) -> Vec<T> {
        let y = self.eval(x, batch);
        self.cache_x = x.to_vec();
        y
    }

    fn backward(&mut self, dy: &[T], batch: usize, compute_dx: bool) -> Option<Vec<T>> {
        let (oh, ow) = self.out_hw();
        let in_len = self.in_h * self.in_w * self.in_c;
        let out_len = oh * ow * self.filters;
        let cols = 9 * self.in_c;
        let mut patches = vec![T::zero(); oh * ow * cols];
        let mut dx = if compute_dx {
            vec![T::zero(); batch * in_len]
        } else {
            Vec::new()
        };
        let kt = if compute_dx {
            transpose(&self.k, cols, self.filters)
        } else {
            Vec::new()
        };
        let mut dpatch = if compute_dx {
            vec![T::zero(); oh * ow * cols]
        } else {
            Vec::new()
        };
        for s in 0..batch {
            let xs = &self.cache_x[s * in_len..(s + 1) * in_len];
            let dys = &dy[s * out_len..(s + 1) * out_len];
            self.im2col(xs, &mut patches);
            let pt = transpose(&patches, oh * ow, cols);
            matmul_acc(&pt, dys, &mut self.gk, cols, oh * ow, self.filters);
            for row in dys.chunks(self.filters) {
                for (g, &d) in self.gb.iter_mut().zip(row) {
                    *g += d;
                }
            }
            if compute_dx {
                matmul(dys, &kt, &mut dpatch, oh * ow, self.filters, cols);
                // scatter-add the patch gradients back to input positions
                let dxs = &mut dx[s * in_len..(s + 1) * in_len];
                let (w, c) = (self.in_w, self.in_c);
                for orow in 0..oh {
                    for ocol in 0..ow {
                        let row = &dpatch[(orow * ow + ocol) * cols..(orow * ow + ocol + 1) * cols];
                        for dr in 0..3 {
                            let dst = ((orow + dr) * w + ocol) * c;
                            for (t, &v) in dxs[dst..dst + 3 * c]
                                .iter_mut()
                                .zip(&row[dr * 3 * c..(dr * 3 + 3) * c])
                            {
                                *t += v;
                            }
                        }
                    }
                }
            }
        }
        compute_dx.then_some(dx)
    }
}

// ----------------------------------------------------------------------
// MaxPool (2x2 window, stride 1)
// ----------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct MaxPool {
    pub in_h: usize,
    pub in_w: usize,
    pub c: usize,
    /// Flat input index of the winning element, per output element.
    argmax: Vec<u32>,
}

impl MaxPool {
    pub fn new(in_h: usize, in_w: usize, c: usize) -> Self {
        MaxPool {
            in_h,
            in_w,
            c,
            argmax: Vec::new(),
        }
    }

    pub fn out_hw(&self) -> (usize, usize) {
        (self.in_h - 1, self.in_w - 1)
    }

    fn forward<T: Real>(&mut self, x: &[T], batch: usize) -> Vec<T> {
        let (oh, ow) = self.out_hw();
        let (w, c) = (self.in_w, self.c);
        let in_len = self.in_h * w * c;
        let out_len = oh * ow * c;
        let mut y = vec![T::zero(); batch * out_len];
        self.argmax = vec![0u32; batch * out_len];
        for s in 0..batch {
            let xs = &x[s * in_len..(s + 1) * in_len];
            for r in 0..oh {
                for cc in 0..ow {
                    for ch in 0..c {
                        // scan order fixes the winner on ties: first-seen wins
                        let mut best_idx = (r * w + cc) * c + ch;
                        let mut best = xs[best_idx];
                        for (dr, dc) in [(0usize, 1usize), (1, 0), (1, 1)] {
                            let idx = ((r + dr) * w + cc + dc) * c + ch;
                            if xs[idx] > best {
                                best = xs[idx];
                                best_idx = idx;
                            }
                        }
                        let o = s * out_len + (r * ow + cc) * c + ch;
                        y[o] = best;
                        self.argmax[o] = (s * in_len + best_idx) as u32;
                    }
                }
            }
        }
        y
    }

    fn backward<T: Real>(&mut self, dy: &[T], batch: usize) -> Vec<T> {
        let in_len = self.in_h * self.in_w * self.c;
        let mut dx = vec![T::zero(); batch * in_len];
        for (i, &d) in dy.iter().enumerate() {
            dx[self.argmax[i] as usize] += d;
        }
        dx
    }

    pub fn eval<T: Real>(&self, x: &[T], batch: usize) -> Vec<T> {
        let (oh, ow) = self.out_hw();
        let (w, c) = (self.in_w, self.c);
        let in_len = self.in_h * w * c;
        let out_len = oh * ow * c;
        let mut y = vec![T::zero(); batch * out_len];
        for s in 0..batch {
            let xs = &x[s * in_len..(s + 1) * in_len];
            for r in 0..oh {
                for cc in 0..ow {
                    for ch in 0..c {
                        let mut best = xs[(r * w + cc) * c + ch];
                        for (dr, dc) in [(0usize, 1usize), (1, 0), (1, 1)] {
                            let v = xs[((r + dr) * w + cc + dc) * c + ch];
                            if v > best {
                                best = v;
                            }
                        }
                        y[s * out_len + (r * ow + cc) * c + ch] = best;
                    }
                }
            }
        }
        y
    }
}

// ----------------------------------------------------------------------
// Relu / Flatten / Softmax
// ----------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct Relu<T> {
    cache_x: Vec<T>,
}

impl<T> Default for Relu<T> {
    fn default() -> Self {
        Relu {
            cache_x: Vec::new(),
        }
    }
}

impl<T: Real> Relu<T> {
    fn forward(&mut self, x: &[T]) -> Vec<T> {
        self.cache_x = x.to_vec();
        x.iter()
            .map(|&v| if v > T::zero() { v } else { T::zero() })
            .collect()
    }

    fn backward(&self, dy: &[T]) -> Vec<T> {
        dy.iter()
            .zip(&self.cache_x)
            .map(|(&d, &x)| if x > T::zero() { d } else { T::zero() })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct Softmax<T> {
    cache_p: Vec<T>,
}

impl<T> Default for Softmax<T> {
    fn default() -> Self {
        Softmax {
            cache_p: Vec::new(),
        }
    }
}

impl<T: Real> Softmax<T> {
    fn forward(&mut self, x: &[T], rows: usize, n: usize) -> Vec<T> {
        let mut p = x.to_vec();
        softmax_rows(&mut p, rows, n);
        self.cache_p = p.clone();
        p
    }

    fn backward(&self, dy: &[T], rows: usize, n: usize) -> Vec<T> {
        let mut dx = vec![T::zero(); dy.len()];
        for r in 0..rows {
            let p = &self.cache_p[r * n..(r + 1) * n];
            let d = &dy[r * n..(r + 1) * n];
            let dot = p
                .iter()
                .zip(d)
                .fold(T::zero(), |acc, (&pi, &di)| acc + pi * di);
            for i in 0..n {
                dx[r * n + i] = p[i] * (d[i] - dot);
            }
        }
        dx
    }
}

// ----------------------------------------------------------------------
// Layer enum
// ----------------------------------------------------------------------

#[derive(Debug, Clone)]
pub enum Layer<T> {
    Dense(Dense<T>),
    Conv2d(Conv2d<T>),
    MaxPool(MaxPool),
    Relu(Relu<T>),
    Flatten,
    Softmax(Softmax<T>),
}

impl<T: Real> Layer<T> {
    /// Output shape for a given input shape; `None` when incompatible.
    pub fn out_shape(&self, input: Shape) -> Option<Shape> {
        match self {
            Layer::Dense(d) => (input.len() == d.in_dim).then_some(Shape::Flat(d.out_dim)),
            Layer::Conv2d(cv) => match input {
                Shape::Hwc { h, w, c } if h == cv.in_h && w == cv.in_w && c == cv.in_c => {
                    let (oh, ow) = cv.out_hw();
                    Some(Shape::Hwc {
                        h: oh,
                        w: ow,
                        c: cv.filters,
                    })
                }
                _ => None,
            },
            Layer::MaxPool(p) => match input {
                Shape::Hwc { h, w, c } if h == p.in_h && w == p.in_w && c == p.c => {
                    let (oh, ow) = p.out_hw();
                    Some(Shape::Hwc { h: oh, w: ow, c })
                }
                _ => None,
            },
            Layer::Relu(_) | Layer::Softmax(_) => Some(input),
            Layer::Flatten => Some(Shape::Flat(input.len())),
        }
    }

    pub fn forward(&mut self, x: &[T], batch: usize, shape: Shape) -> Vec<T> {
        match self {
            Layer::Dense(d) => d.forward(x, batch),
            Layer::Conv2d(c) => c.forward(x, batch),
            Layer::MaxPool(p) => p.forward(x, batch),
            Layer::Relu(r) => r.forward(x),
            Layer::Flatten => x.to_vec(),
            Layer::Softmax(s) => {
                let n = shape.len();
                s.forward(x, batch, n)
            }
        }
    }

    /// Read-only inference: same math as `forward`, no caches touched.
    pub fn eval(&self, x: &[T], batch: usize, shape: Shape) -> Vec<T> {
        match self {
            Layer::Dense(d) => d.eval(x, batch),
            Layer::Conv2d(c) => c.eval(x, batch),
            Layer::MaxPool(p) => p.eval(x, batch),
            Layer::Relu(_) => x
                .iter()
                .map(|&v| if v > T::zero() { v } else { T::zero() })
                .collect(),
            Layer::Flatten => x.to_vec(),
            Layer::Softmax(_) => {
                let mut p = x.to_vec();
                softmax_rows(&mut p, batch, shape.len());
                p
            }
        }
    }

    pub fn backward(
        &mut self,
        dy: &[T],
        batch: usize,
        shape: Shape,
        compute_dx: bool,
    ) -> Option<Vec<T>> {
        match self {
            Layer::Dense(d) => d.backward(dy, batch, compute_dx),
            Layer::Conv2d(c) => c.backward(dy, batch, compute_dx),
            Layer::MaxPool(p) => compute_dx.then(|| p.backward(dy, batch)),
            Layer::Relu(r) => compute_dx.then(|| r.backward(dy)),
            Layer::Flatten => compute_dx.then(|| dy.to_vec()),
            Layer::Softmax(s) => {
                let n = shape.len();
                compute_dx.then(|| s.backward(dy, batch, n))
            }
        }
    }

    /// `(params, grads)` pairs for the optimizer.
    pub fn params_grads(&mut self) -> Vec<(&mut Vec<T>, &mut Vec<T>)> {
        match self {
            Layer::Dense(d) => vec![(&mut d.w, &mut d.gw), (&mut d.b, &mut d.gb)],
            Layer::Conv2d(c) => vec![(&mut c.k, &mut c.gk), (&mut c.b, &mut c.gb)],
            _ => Vec::new(),
        }
    }

    /// He-style uniform fan-in initialization; biases stay zero.
    pub fn init_weights(&mut self, rng: &mut ChaCha12Rng) {
        let (fan_in, w) = match self {
            Layer::Dense(d) => (d.in_dim, &mut d.w),
            Layer::Conv2d(c) => (9 * c.in_c, &mut c.k),
            _ => return,
        };
        let limit = num_traits::Float::sqrt(6.0 / fan_in as f64);
        for v in w.iter_mut() {
            let u: f64 = rng.gen();
            *v = T::from_f64((2.0 * u - 1.0) * limit);
        }
    }

    pub fn param_count(&self) -> usize {
        match self {
            Layer::Dense(d) => d.w.len() + d.b.len(),
            Layer::Conv2d(c) => c.k.len() + c.b.len(),
            _ => 0,
        }
    }
}
