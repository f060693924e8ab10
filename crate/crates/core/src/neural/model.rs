//! Recurrent cells, the dense head, and exact backpropagation through time.
//!
//! All weights live in one flat parameter vector; [`TensorSpec`] records the
//! name, shape and offset of each row-major tensor inside it. Gate weights of
//! a cell are stacked along the row axis:
//!
//! | kind | `w_x`        | `w_h`                  | `u_h`     | `b`  |
//! |------|--------------|------------------------|-----------|------|
//! | rnn  | `H × 1`      | `H × H`                | -         | `H`  |
//! | lstm | `4H × 1` (input, forget, candidate, output) | `4H × H` | - | `4H` |
//! | gru  | `3H × 1` (update, reset, candidate) | `2H × H` (update, reset) | `H × H` | `3H` |
//!
//! The final hidden state passes through (optional) dropout, an optional
//! leaky-ReLU dense layer, and a linear output layer of `output_days` units.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::window::{WindowedDataset, DEFAULT_SEQUENCE_LENGTH};
use crate::error::{Error, Result};

/// Features per time step (the RV value itself).
pub const INPUT_FEATURES: usize = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    Rnn,
    Lstm,
    Gru,
}

impl CellKind {
    pub const ALL: [CellKind; 3] = [CellKind::Rnn, CellKind::Lstm, CellKind::Gru];

    fn gate_count(self) -> usize {
        match self {
            CellKind::Rnn => 1,
            CellKind::Lstm => 4,
            CellKind::Gru => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CellKind::Rnn => "rnn",
            CellKind::Lstm => "lstm",
            CellKind::Gru => "gru",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    pub kind: CellKind,
    pub hidden_units: usize,
    pub dense_units: Option<usize>,
    pub output_days: usize,
    pub sequence_length: usize,
    pub dropout_rate: f64,
    pub leaky_slope: f64,
}

impl Architecture {
    /// GRU: 16 units, dense 4 with leaky ReLU; LSTM and RNN: 8 units. All
    /// with dropout 0.2 and sequence length 12.
    pub fn default_for(kind: CellKind, output_days: usize) -> Self {
        let (hidden_units, dense_units) = match kind {
            CellKind::Gru => (16, Some(4)),
            CellKind::Lstm | CellKind::Rnn => (8, None),
        };
        Self {
            kind,
            hidden_units,
            dense_units,
            output_days,
            sequence_length: DEFAULT_SEQUENCE_LENGTH,
            dropout_rate: 0.2,
            leaky_slope: 0.3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden_units == 0 || self.output_days == 0 || self.sequence_length == 0 || self.dense_units == Some(0) {
            return Err(Error::invalid("layer sizes and sequence length must be positive"));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::invalid(format!("dropout rate must lie in [0, 1), got {}", self.dropout_rate)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorSpec {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub offset: usize,
}

impl TensorSpec {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

#[derive(Clone, Copy, Debug)]
struct Offsets {
    wx: usize,
    wh: usize,
    uh: usize,
    b: usize,
    wd: usize,
    bd: usize,
    wo: usize,
    bo: usize,
}

fn build_layout(arch: &Architecture) -> (Vec<TensorSpec>, Offsets) {
    let h = arch.hidden_units;
    let g = arch.kind.gate_count();
    let mut layout = Vec::new();
    let mut offset = 0;
    let mut push = |name: &str, rows: usize, cols: usize| {
        layout.push(TensorSpec { name: name.to_string(), rows, cols, offset });
        offset += rows * cols;
        offset - rows * cols
    };
    let wx = push("w_x", g * h, INPUT_FEATURES);
    let wh = match arch.kind {
        CellKind::Gru => push("w_h", 2 * h, h),
        _ => push("w_h", g * h, h),
    };
    let uh = match arch.kind {
        CellKind::Gru => push("u_h", h, h),
        _ => usize::MAX,
    };
    let b = push("b", g * h, 1);
    let (wd, bd, head_in) = match arch.dense_units {
        Some(d) => (push("w_dense", d, h), push("b_dense", d, 1), d),
        None => (usize::MAX, usize::MAX, h),
    };
    let wo = push("w_out", arch.output_days, head_in);
    let bo = push("b_out", arch.output_days, 1);
    (layout, Offsets { wx, wh, uh, b, wd, bd, wo, bo })
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `out[r] += Σ_c w[r, c] v[c]`
#[inline]
fn gemv_acc(w: &[f64], cols: usize, v: &[f64], out: &mut [f64]) {
    for (r, o) in out.iter_mut().enumerate() {
        let row = &w[r * cols..(r + 1) * cols];
        let mut s = 0.0;
        for (a, b) in row.iter().zip(v) {
            s += a * b;
        }
        *o += s;
    }
}

/// `out[c] += Σ_r w[r, c] d[r]`
#[inline]
fn gemv_t_acc(w: &[f64], cols: usize, d: &[f64], out: &mut [f64]) {
    for (r, dr) in d.iter().enumerate() {
        if *dr == 0.0 {
            continue;
        }
        let row = &w[r * cols..(r + 1) * cols];
        for (o, a) in out.iter_mut().zip(row) {
            *o += a * dr;
        }
    }
}

/// `g[r, c] += d[r] v[c]`
#[inline]
fn outer_acc(g: &mut [f64], cols: usize, d: &[f64], v: &[f64]) {
    for (r, dr) in d.iter().enumerate() {
        if *dr == 0.0 {
            continue;
        }
        let row = &mut g[r * cols..(r + 1) * cols];
        for (o, b) in row.iter_mut().zip(v) {
            *o += dr * b;
        }
    }
}

/// Everything a forward pass records for the backward pass.
#[derive(Clone, Debug, Default)]
pub struct Trace {
    steps: usize,
    hidden: usize,
    gates_per_step: usize,
    xs: Vec<f64>,
    hs: Vec<f64>,
    cs: Vec<f64>,
    gates: Vec<f64>,
    head_in: Vec<f64>,
    dense_pre: Vec<f64>,
    dense_out: Vec<f64>,
    pub output: Vec<f64>,
}

impl Trace {
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Hidden state after step `t` (`t = 0` is the initial state).
    pub fn hidden_state(&self, t: usize) -> &[f64] {
        &self.hs[t * self.hidden..(t + 1) * self.hidden]
    }

    /// LSTM cell state after step `t`; empty for other kinds.
    pub fn cell_state(&self, t: usize) -> &[f64] {
        if self.cs.is_empty() {
            return &[];
        }
        &self.cs[t * self.hidden..(t + 1) * self.hidden]
    }

    /// Activated gate values at step `t` (1-based, like `hidden_state`), in
    /// the stacking order of the kind.
    pub fn gate_values(&self, t: usize) -> &[f64] {
        let w = self.gates_per_step;
        &self.gates[(t - 1) * w..t * w]
    }

    pub fn hidden_states(&self) -> Vec<Vec<f64>> {
        (1..=self.steps).map(|t| self.hidden_state(t).to_vec()).collect()
    }

    pub fn cell_states(&self) -> Vec<Vec<f64>> {
        if self.cs.is_empty() {
            return Vec::new();
        }
        (1..=self.steps).map(|t| self.cell_state(t).to_vec()).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    /// Weighted batch-mean squared error.
    pub loss: f64,
    pub values: Vec<f64>,
}

impl Gradients {
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|g| g * g).sum::<f64>().sqrt()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecurrentModel {
    arch: Architecture,
    layout: Vec<TensorSpec>,
    offsets: Offsets,
    params: Vec<f64>,
}

impl PartialEq for Offsets {
    fn eq(&self, other: &Self) -> bool {
        self.wx == other.wx && self.wo == other.wo && self.bo == other.bo
    }
}

impl RecurrentModel {
    /// All-zero weights.
    pub fn zeros(arch: Architecture) -> Result<Self> {
        arch.validate()?;
        let (layout, offsets) = build_layout(&arch);
        let n = layout.iter().map(TensorSpec::len).sum();
        Ok(Self { arch, layout, offsets, params: vec![0.0; n] })
    }

    /// Glorot-uniform weights (per gate block) and zero biases.
    pub fn init(arch: Architecture, seed: u64) -> Result<Self> {
        let mut model = Self::zeros(arch)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gates = model.arch.kind.gate_count();
        for spec in model.layout.clone() {
            if spec.cols == 1 && spec.name.starts_with('b') {
                continue;
            }
            let (fan_in, fan_out) = match spec.name.as_str() {
                "w_x" => (spec.cols, spec.rows / gates),
                "w_h" | "u_h" => (spec.cols, spec.cols),
                _ => (spec.cols, spec.rows),
            };
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for p in &mut model.params[spec.range()] {
                *p = rng.random_range(-limit..limit);
            }
        }
        Ok(model)
    }

    /// Rebuilds a model from a flat parameter vector in layout order.
    pub fn from_params(arch: Architecture, params: Vec<f64>) -> Result<Self> {
        let mut model = Self::zeros(arch)?;
        if params.len() != model.params.len() {
            return Err(Error::Shape(format!("expected {} parameters, got {}", model.params.len(), params.len())));
        }
        model.params = params;
        Ok(model)
    }

    pub fn architecture(&self) -> &Architecture {
        &self.arch
    }

    pub fn kind(&self) -> CellKind {
        self.arch.kind
    }

    pub fn layout(&self) -> &[TensorSpec] {
        &self.layout
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn tensor(&self, name: &str) -> Option<&[f64]> {
        self.layout.iter().find(|t| t.name == name).map(|t| &self.params[t.range()])
    }

    pub fn tensor_mut(&mut self, name: &str) -> Option<&mut [f64]> {
        let range = self.layout.iter().find(|t| t.name == name)?.range();
        Some(&mut self.params[range])
    }

    fn check_input(&self, x: &[f64], h0: Option<&[f64]>) -> Result<()> {
        if x.is_empty() || x.len() % INPUT_FEATURES != 0 {
            return Err(Error::Shape(format!("input sequence of length {} is not a whole number of steps", x.len())));
        }
        if let Some(h0) = h0 {
            if h0.len() != self.arch.hidden_units {
                return Err(Error::Shape(format!("initial state has {} units, model has {}", h0.len(), self.arch.hidden_units)));
            }
        }
        Ok(())
    }

    /// Inference forward pass from a zero initial state.
    pub fn forward(&self, x: &[f64]) -> Result<Trace> {
        self.forward_with(x, None, None)
    }

    /// Forward pass with an optional injected initial hidden state and an
    /// optional dropout mask on the final hidden state.
    pub fn forward_with(&self, x: &[f64], h0: Option<&[f64]>, mask: Option<&[f64]>) -> Result<Trace> {
        self.check_input(x, h0)?;
        if let Some(m) = mask {
            if m.len() != self.arch.hidden_units {
                return Err(Error::Shape("dropout mask must cover every hidden unit".into()));
            }
        }
        let mut trace = Trace::default();
        self.forward_into(x, h0, mask, &mut trace);
        Ok(trace)
    }

    fn forward_into(&self, x: &[f64], h0: Option<&[f64]>, mask: Option<&[f64]>, tr: &mut Trace) {
        let h = self.arch.hidden_units;
        let steps = x.len() / INPUT_FEATURES;
        let g = self.arch.kind.gate_count();
        let p = &self.params;
        let o = self.offsets;

        tr.steps = steps;
        tr.hidden = h;
        tr.gates_per_step = g * h;
        tr.xs.clear();
        tr.xs.extend_from_slice(x);
        tr.hs.clear();
        tr.hs.resize((steps + 1) * h, 0.0);
        if let Some(h0) = h0 {
            tr.hs[..h].copy_from_slice(h0);
        }
        tr.gates.clear();
        tr.gates.resize(steps * g * h, 0.0);
        tr.cs.clear();
        if self.arch.kind == CellKind::Lstm {
            tr.cs.resize((steps + 1) * h, 0.0);
        }

        let wx = &p[o.wx..o.wx + g * h * INPUT_FEATURES];
        let bias = &p[o.b..o.b + g * h];
        for t in 0..steps {
            let xt = &x[t * INPUT_FEATURES..(t + 1) * INPUT_FEATURES];
            let (prev_hs, next_hs) = tr.hs.split_at_mut((t + 1) * h);
            let hp = &prev_hs[t * h..];
            let hn = &mut next_hs[..h];
            let gates = &mut tr.gates[t * g * h..(t + 1) * g * h];
            gates.copy_from_slice(bias);
            gemv_acc(wx, INPUT_FEATURES, xt, gates);
            match self.arch.kind {
                CellKind::Rnn => {
                    gemv_acc(&p[o.wh..o.wh + h * h], h, hp, gates);
                    for (a, hv) in gates.iter_mut().zip(hn.iter_mut()) {
                        *a = a.tanh();
                        *hv = *a;
                    }
                }
                CellKind::Lstm => {
                    gemv_acc(&p[o.wh..o.wh + 4 * h * h], h, hp, gates);
                    let (cprev, cnext) = tr.cs.split_at_mut((t + 1) * h);
                    let cp = &cprev[t * h..];
                    for j in 0..h {
                        let i = sigmoid(gates[j]);
                        let f = sigmoid(gates[h + j]);
                        let c = gates[2 * h + j].tanh();
                        let og = sigmoid(gates[3 * h + j]);
                        gates[j] = i;
                        gates[h + j] = f;
                        gates[2 * h + j] = c;
                        gates[3 * h + j] = og;
                        let cn = f * cp[j] + i * c;
                        cnext[j] = cn;
                        hn[j] = og * cn.tanh();
                    }
                }
                CellKind::Gru => {
                    gemv_acc(&p[o.wh..o.wh + 2 * h * h], h, hp, &mut gates[..2 * h]);
                    for a in &mut gates[..2 * h] {
                        *a = sigmoid(*a);
                    }
                    let mut rh = [0.0f64; 64];
                    let mut rh_vec;
                    let rh: &mut [f64] = if h <= 64 {
                        &mut rh[..h]
                    } else {
                        rh_vec = vec![0.0; h];
                        &mut rh_vec
                    };
                    for j in 0..h {
                        rh[j] = gates[h + j] * hp[j];
                    }
                    gemv_acc(&p[o.uh..o.uh + h * h], h, rh, &mut gates[2 * h..]);
                    for j in 0..h {
                        let n = gates[2 * h + j].tanh();
                        gates[2 * h + j] = n;
                        let z = gates[j];
                        hn[j] = (1.0 - z) * hp[j] + z * n;
                    }
                }
            }
        }

        // head
        let h_last = &tr.hs[steps * h..];
        tr.head_in.clear();
        match mask {
            Some(m) => tr.head_in.extend(h_last.iter().zip(m).map(|(a, b)| a * b)),
            None => tr.head_in.extend_from_slice(h_last),
        }
        let out_n = self.arch.output_days;
        tr.output.clear();
        tr.output.extend_from_slice(&p[o.bo..o.bo + out_n]);
        match self.arch.dense_units {
            Some(d) => {
                tr.dense_pre.clear();
                tr.dense_pre.extend_from_slice(&p[o.bd..o.bd + d]);
                gemv_acc(&p[o.wd..o.wd + d * h], h, &tr.head_in, &mut tr.dense_pre);
                let slope = self.arch.leaky_slope;
                tr.dense_out.clear();
                tr.dense_out.extend(tr.dense_pre.iter().map(|a| if *a > 0.0 { *a } else { slope * a }));
                gemv_acc(&p[o.wo..o.wo + out_n * d], d, &tr.dense_out, &mut tr.output);
            }
            None => gemv_acc(&p[o.wo..o.wo + out_n * h], h, &tr.head_in, &mut tr.output),
        }
    }

    /// Accumulates `∂L/∂θ` into `grad` given `∂L/∂y` for one traced sample.
    fn backward(&self, tr: &Trace, dy: &[f64], mask: Option<&[f64]>, grad: &mut [f64], scratch: &mut Scratch) {
        let h = self.arch.hidden_units;
        let g = self.arch.kind.gate_count();
        let p = &self.params;
        let o = self.offsets;
        let out_n = self.arch.output_days;

        grad[o.bo..o.bo + out_n].iter_mut().zip(dy).for_each(|(a, b)| *a += b);
        scratch.dh.clear();
        scratch.dh.resize(h, 0.0);
        match self.arch.dense_units {
            Some(d) => {
                outer_acc(&mut grad[o.wo..o.wo + out_n * d], d, dy, &tr.dense_out);
                scratch.dd.clear();
                scratch.dd.resize(d, 0.0);
                gemv_t_acc(&p[o.wo..o.wo + out_n * d], d, dy, &mut scratch.dd);
                let slope = self.arch.leaky_slope;
                for (da, pre) in scratch.dd.iter_mut().zip(&tr.dense_pre) {
                    if *pre <= 0.0 {
                        *da *= slope;
                    }
                }
                grad[o.bd..o.bd + d].iter_mut().zip(&scratch.dd).for_each(|(a, b)| *a += b);
                outer_acc(&mut grad[o.wd..o.wd + d * h], h, &scratch.dd, &tr.head_in);
                gemv_t_acc(&p[o.wd..o.wd + d * h], h, &scratch.dd, &mut scratch.dh);
            }
            None => {
                outer_acc(&mut grad[o.wo..o.wo + out_n * h], h, dy, &tr.head_in);
                gemv_t_acc(&p[o.wo..o.wo + out_n * h], h, dy, &mut scratch.dh);
            }
        }
        if let Some(m) = mask {
            scratch.dh.iter_mut().zip(m).for_each(|(a, b)| *a *= b);
        }

        scratch.dz.clear();
        scratch.dz.resize(g * h, 0.0);
        scratch.dc.clear();
        scratch.dc.resize(h, 0.0);
        scratch.dprev.clear();
        scratch.dprev.resize(h, 0.0);
        scratch.tmp.clear();
        scratch.tmp.resize(h, 0.0);

        for t in (0..tr.steps).rev() {
            let xt = &tr.xs[t * INPUT_FEATURES..(t + 1) * INPUT_FEATURES];
            let hp = &tr.hs[t * h..(t + 1) * h];
            let gates = &tr.gates[t * g * h..(t + 1) * g * h];
            let dh = &scratch.dh;
            let dz = &mut scratch.dz;
            scratch.dprev.iter_mut().for_each(|v| *v = 0.0);
            match self.arch.kind {
                CellKind::Rnn => {
                    for j in 0..h {
                        let a = gates[j];
                        dz[j] = dh[j] * (1.0 - a * a);
                    }
                    outer_acc(&mut grad[o.wh..o.wh + h * h], h, dz, hp);
                    gemv_t_acc(&p[o.wh..o.wh + h * h], h, dz, &mut scratch.dprev);
                }
                CellKind::Lstm => {
                    let cp = &tr.cs[t * h..(t + 1) * h];
                    let cn = &tr.cs[(t + 1) * h..(t + 2) * h];
                    for j in 0..h {
                        let (i, f, c, og) = (gates[j], gates[h + j], gates[2 * h + j], gates[3 * h + j]);
                        let tc = cn[j].tanh();
                        let d_o = dh[j] * tc;
                        let dcell = scratch.dc[j] + dh[j] * og * (1.0 - tc * tc);
                        dz[j] = dcell * c * i * (1.0 - i);
                        dz[h + j] = dcell * cp[j] * f * (1.0 - f);
                        dz[2 * h + j] = dcell * i * (1.0 - c * c);
                        dz[3 * h + j] = d_o * og * (1.0 - og);
                        scratch.dc[j] = dcell * f;
                    }
                    outer_acc(&mut grad[o.wh..o.wh + 4 * h * h], h, dz, hp);
                    gemv_t_acc(&p[o.wh..o.wh + 4 * h * h], h, dz, &mut scratch.dprev);
                }
                CellKind::Gru => {
                    let rh = &mut scratch.tmp;
                    for j in 0..h {
                        let (z, r, n) = (gates[j], gates[h + j], gates[2 * h + j]);
                        dz[2 * h + j] = dh[j] * z * (1.0 - n * n);
                        dz[j] = dh[j] * (n - hp[j]) * z * (1.0 - z);
                        scratch.dprev[j] = dh[j] * (1.0 - z);
                        rh[j] = r * hp[j];
                    }
                    outer_acc(&mut grad[o.uh..o.uh + h * h], h, &dz[2 * h..], rh);
                    // reuse tmp as d(r ⊙ h_prev)
                    rh.iter_mut().for_each(|v| *v = 0.0);
                    gemv_t_acc(&p[o.uh..o.uh + h * h], h, &dz[2 * h..], rh);
                    for j in 0..h {
                        let r = gates[h + j];
                        dz[h + j] = rh[j] * hp[j] * r * (1.0 - r);
                        scratch.dprev[j] += rh[j] * r;
                    }
                    outer_acc(&mut grad[o.wh..o.wh + 2 * h * h], h, &dz[..2 * h], hp);
                    gemv_t_acc(&p[o.wh..o.wh + 2 * h * h], h, &dz[..2 * h], &mut scratch.dprev);
                }
            }
            outer_acc(&mut grad[o.wx..o.wx + g * h * INPUT_FEATURES], INPUT_FEATURES, dz, xt);
            grad[o.b..o.b + g * h].iter_mut().zip(dz.iter()).for_each(|(a, b)| *a += b);
            std::mem::swap(&mut scratch.dh, &mut scratch.dprev);
        }
    }

    /// Forecast for one input window (no dropout).
    pub fn predict_raw(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward(x)?.output)
    }
}

#[derive(Default)]
struct Scratch {
    dh: Vec<f64>,
    dd: Vec<f64>,
    dz: Vec<f64>,
    dc: Vec<f64>,
    dprev: Vec<f64>,
    tmp: Vec<f64>,
}

/// Reusable buffers for repeated batch gradient evaluations.
#[derive(Default)]
pub struct GradWorkspace {
    trace: Trace,
    scratch: Scratch,
    dy: Vec<f64>,
}

/// Gradient of `weight × mean_samples(mean_outputs((y - target)²))` over the
/// samples `indices` of `data`. `masks`, when given, holds one dropout mask of
/// `hidden_units` values per listed sample.
pub fn backprop_weighted(
    model: &RecurrentModel,
    data: &WindowedDataset,
    indices: &[usize],
    masks: Option<&[f64]>,
    weight: f64,
    ws: &mut GradWorkspace,
) -> Result<Gradients> {
    if indices.is_empty() {
        return Err(Error::invalid("batch is empty"));
    }
    if data.output_days() != model.arch.output_days {
        return Err(Error::Shape(format!(
            "dataset has {} outputs, model has {}",
            data.output_days(),
            model.arch.output_days
        )));
    }
    let h = model.arch.hidden_units;
    if let Some(m) = masks {
        if m.len() != indices.len() * h {
            return Err(Error::Shape("one dropout mask per sample is required".into()));
        }
    }
    let mut grad = vec![0.0; model.params.len()];
    let scale = weight / (indices.len() * model.arch.output_days) as f64;
    let mut sse = 0.0;
    for (k, &i) in indices.iter().enumerate() {
        let mask = masks.map(|m| &m[k * h..(k + 1) * h]);
        model.forward_into(data.input(i), None, mask, &mut ws.trace);
        ws.dy.clear();
        for (y, t) in ws.trace.output.iter().zip(data.target(i)) {
            let e = y - t;
            sse += e * e;
            ws.dy.push(2.0 * scale * e);
        }
        model.backward(&ws.trace, &ws.dy, mask, &mut grad, &mut ws.scratch);
    }
    Ok(Gradients { loss: scale * sse, values: grad })
}

/// Exact batch-mean MSE gradient without dropout.
pub fn backprop(model: &RecurrentModel, data: &WindowedDataset, indices: &[usize]) -> Result<Gradients> {
    backprop_weighted(model, data, indices, None, 1.0, &mut GradWorkspace::default())
}

/// Batch-mean squared error without dropout.
pub fn batch_loss(model: &RecurrentModel, data: &WindowedDataset, indices: &[usize]) -> Result<f64> {
    let mut sse = 0.0;
    let mut trace = Trace::default();
    for &i in indices {
        model.forward_into(data.input(i), None, None, &mut trace);
        sse += trace.output.iter().zip(data.target(i)).map(|(y, t)| (y - t) * (y - t)).sum::<f64>();
    }
    Ok(sse / (indices.len() * model.arch.output_days) as f64)
}

fn expect_kind(model: &RecurrentModel, kind: CellKind) -> Result<()> {
    if model.kind() != kind {
        return Err(Error::Shape(format!("expected a {} model, got {}", kind.name(), model.kind().name())));
    }
    Ok(())
}

/// Hidden states `h_1..h_T` and the head output of an RNN.
pub fn rnn_forward(model: &RecurrentModel, x: &[f64]) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    expect_kind(model, CellKind::Rnn)?;
    let tr = model.forward(x)?;
    Ok((tr.hidden_states(), tr.output))
}

/// Hidden states, cell states and the head output of an LSTM.
pub fn lstm_forward(model: &RecurrentModel, x: &[f64]) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<f64>)> {
    expect_kind(model, CellKind::Lstm)?;
    let tr = model.forward(x)?;
    Ok((tr.hidden_states(), tr.cell_states(), tr.output))
}

/// Hidden states and the head output of a GRU.
pub fn gru_forward(model: &RecurrentModel, x: &[f64]) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    expect_kind(model, CellKind::Gru)?;
    let tr = model.forward(x)?;
    Ok((tr.hidden_states(), tr.output))
}
