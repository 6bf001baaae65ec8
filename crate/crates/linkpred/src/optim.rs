//! First-order optimizers: SGD, Adagrad, Adadelta, Adam, Adamax.
//!
//! One [`OptimizerState`] owns the accumulators for one parameter tensor.
//! Dense tensors use [`OptimizerState::step`]; embedding matrices use the
//! row-sparse [`OptimizerState::step_row`], which keeps a per-row step
//! counter so bias correction only advances for rows that were touched.

use std::io::{Read, Write};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    Sgd,
    Adagrad,
    Adadelta,
    Adam,
    Adamax,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 5] = [
        OptimizerKind::Sgd,
        OptimizerKind::Adagrad,
        OptimizerKind::Adadelta,
        OptimizerKind::Adam,
        OptimizerKind::Adamax,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Adagrad => "adagrad",
            OptimizerKind::Adadelta => "adadelta",
            OptimizerKind::Adam => "adam",
            OptimizerKind::Adamax => "adamax",
        }
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sgd" => Ok(OptimizerKind::Sgd),
            "adagrad" => Ok(OptimizerKind::Adagrad),
            "adadelta" => Ok(OptimizerKind::Adadelta),
            "adam" => Ok(OptimizerKind::Adam),
            "adamax" => Ok(OptimizerKind::Adamax),
            other => Err(Error::Config(format!("unknown optimizer kind {other:?}"))),
        }
    }
}

/// Hyperparameters. `learning_rate` is ignored by Adadelta, which derives
/// its step size from the squared-delta average.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub gamma: f64,
    pub epsilon: f64,
}

impl OptimizerConfig {
    /// Defaults per kind. Learning rates: 0.001 (Adam, Adamax), 0.05
    /// (Adagrad), 1.0 (Adadelta, unused), 0.025 (SGD). Epsilon 1e-8 except
    /// Adadelta's 1e-6; gamma 0.95; beta1 0.9; beta2 0.999.
    pub fn new(kind: OptimizerKind) -> Self {
        let learning_rate = match kind {
            OptimizerKind::Sgd => 0.025,
            OptimizerKind::Adagrad => 0.05,
            OptimizerKind::Adadelta => 1.0,
            OptimizerKind::Adam | OptimizerKind::Adamax => 0.001,
        };
        let epsilon = match kind {
            OptimizerKind::Adadelta => 1e-6,
            _ => 1e-8,
        };
        OptimizerConfig { kind, learning_rate, beta1: 0.9, beta2: 0.999, gamma: 0.95, epsilon }
    }

    pub fn parse(kind: &str) -> Result<Self> {
        Ok(Self::new(kind.parse()?))
    }

    pub fn with_learning_rate(mut self, lr: f64) -> Self {
        self.learning_rate = lr;
        self
    }

    /// Set one hyperparameter by config key (`lr`, `beta1`, `beta2`,
    /// `gamma`, `eps`).
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        match key {
            "lr" => self.learning_rate = value,
            "beta1" => self.beta1 = value,
            "beta2" => self.beta2 = value,
            "gamma" => self.gamma = value,
            "eps" => self.epsilon = value,
            other => return Err(Error::Config(format!("unknown optimizer key {other:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config(format!(
                "optimizer.lr must be positive, got {}",
                self.learning_rate
            )));
        }
        for (name, value) in [("beta1", self.beta1), ("beta2", self.beta2), ("gamma", self.gamma)]
        {
            if !(0.0..1.0).contains(&value) {
                return Err(Error::Config(format!("optimizer.{name} must lie in [0, 1), got {value}")));
            }
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Config("optimizer.eps must be positive".into()));
        }
        Ok(())
    }
}

/// Per-tensor optimizer state. Accumulators are allocated lazily per kind:
/// `v` squared-gradient sum or moving average, `s` first moment, `d`
/// squared-delta average (Adadelta) or infinity-norm accumulator (Adamax).
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    cfg: OptimizerConfig,
    dim: usize,
    rows: usize,
    t: u64,
    row_t: Vec<u64>,
    v: Vec<f64>,
    s: Vec<f64>,
    d: Vec<f64>,
}

/// Build an optimizer for a flat parameter tensor of length `len`.
pub fn make_optimizer(cfg: OptimizerConfig, len: usize) -> Result<OptimizerState> {
    cfg.validate()?;
    Ok(OptimizerState::allocate(cfg, 1, len))
}

/// Build an optimizer for a `rows x dim` matrix updated row-by-row.
pub fn make_rowwise_optimizer(cfg: OptimizerConfig, rows: usize, dim: usize) -> Result<OptimizerState> {
    cfg.validate()?;
    let mut state = OptimizerState::allocate(cfg, rows, dim);
    state.row_t = vec![0; rows];
    Ok(state)
}

impl OptimizerState {
    fn allocate(cfg: OptimizerConfig, rows: usize, dim: usize) -> Self {
        let len = rows * dim;
        let (need_v, need_s, need_d) = match cfg.kind {
            OptimizerKind::Sgd => (false, false, false),
            OptimizerKind::Adagrad => (true, false, false),
            OptimizerKind::Adadelta => (true, false, true),
            OptimizerKind::Adam => (true, true, false),
            OptimizerKind::Adamax => (false, true, true),
        };
        OptimizerState {
            cfg,
            dim,
            rows,
            t: 0,
            row_t: Vec::new(),
            v: if need_v { vec![0.0; len] } else { Vec::new() },
            s: if need_s { vec![0.0; len] } else { Vec::new() },
            d: if need_d { vec![0.0; len] } else { Vec::new() },
        }
    }

    pub fn kind(&self) -> OptimizerKind {
        self.cfg.kind
    }

    pub fn config(&self) -> &OptimizerConfig {
        &self.cfg
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    pub fn learning_rate(&self) -> f64 {
        self.cfg.learning_rate
    }

    /// Adjust the learning rate mid-run (used by the skip-gram trainer's
    /// linear SGD decay).
    pub fn set_learning_rate(&mut self, lr: f64) {
        self.cfg.learning_rate = lr;
    }

    /// One dense update. Increments the step counter by exactly 1.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        let len = self.rows * self.dim;
        if params.len() != len || grads.len() != len {
            return Err(Error::ShapeMismatch(format!(
                "optimizer holds {} values, got params {} / grads {}",
                len,
                params.len(),
                grads.len()
            )));
        }
        check_finite(grads)?;
        self.t += 1;
        let t = self.t;
        let cfg = self.cfg;
        update_slice(&cfg, t, params, grads, &mut self.v, &mut self.s, &mut self.d);
        Ok(())
    }

    /// Sparse update of a single row of a `rows x dim` parameter matrix.
    /// Bias correction (Adam, Adamax) runs on the row's own step counter.
    pub fn step_row(&mut self, row: usize, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if row >= self.rows || params.len() != self.dim || grads.len() != self.dim {
            return Err(Error::ShapeMismatch(format!(
                "row {row} of {} rows, params {} / grads {} vs dim {}",
                self.rows,
                params.len(),
                grads.len(),
                self.dim
            )));
        }
        check_finite(grads)?;
        if self.row_t.is_empty() {
            self.row_t = vec![0; self.rows];
        }
        self.row_t[row] += 1;
        self.t += 1;
        let t = self.row_t[row];
        let cfg = self.cfg;
        let span = row * self.dim..(row + 1) * self.dim;
        update_slice(
            &cfg,
            t,
            params,
            grads,
            slice_or_empty(&mut self.v, span.clone()),
            slice_or_empty(&mut self.s, span.clone()),
            slice_or_empty(&mut self.d, span),
        );
        Ok(())
    }

    /// Serialize bit-exactly (little-endian f64 payload).
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(b"OPTSTATE1\n")?;
        writeln!(
            w,
            "{} {} {} {} {} {} {} {} {}",
            self.cfg.kind.name(),
            hexf(self.cfg.learning_rate),
            hexf(self.cfg.beta1),
            hexf(self.cfg.beta2),
            hexf(self.cfg.gamma),
            hexf(self.cfg.epsilon),
            self.rows,
            self.dim,
            self.t
        )?;
        writeln!(w, "{}", self.row_t.len())?;
        for chunk in &self.row_t {
            w.write_all(&chunk.to_le_bytes())?;
        }
        for tensor in [&self.v, &self.s, &self.d] {
            w.write_all(&(tensor.len() as u64).to_le_bytes())?;
            for x in tensor {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<OptimizerState> {
        let mut text = Vec::new();
        // read header two lines byte-by-byte to keep the rest binary
        read_line(&mut r, &mut text)?;
        if text != b"OPTSTATE1" {
            return Err(Error::Parse { line: 1, message: "bad optimizer state magic".into() });
        }
        text.clear();
        read_line(&mut r, &mut text)?;
        let header = String::from_utf8_lossy(&text).to_string();
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 9 {
            return Err(Error::Parse { line: 2, message: "bad optimizer state header".into() });
        }
        let kind: OptimizerKind = parts[0].parse()?;
        let mut cfg = OptimizerConfig::new(kind);
        cfg.learning_rate = unhexf(parts[1])?;
        cfg.beta1 = unhexf(parts[2])?;
        cfg.beta2 = unhexf(parts[3])?;
        cfg.gamma = unhexf(parts[4])?;
        cfg.epsilon = unhexf(parts[5])?;
        let rows: usize = parse_num(parts[6])?;
        let dim: usize = parse_num(parts[7])?;
        let t: u64 = parse_num(parts[8])?;

        text.clear();
        read_line(&mut r, &mut text)?;
        let row_t_len: usize = parse_num(String::from_utf8_lossy(&text).trim())?;
        let mut row_t = Vec::with_capacity(row_t_len);
        let mut buf8 = [0u8; 8];
        for _ in 0..row_t_len {
            r.read_exact(&mut buf8)?;
            row_t.push(u64::from_le_bytes(buf8));
        }
        let mut tensors = Vec::new();
        for _ in 0..3 {
            r.read_exact(&mut buf8)?;
            let len = u64::from_le_bytes(buf8) as usize;
            let mut tensor = Vec::with_capacity(len);
            for _ in 0..len {
                r.read_exact(&mut buf8)?;
                tensor.push(f64::from_le_bytes(buf8));
            }
            tensors.push(tensor);
        }
        let d = tensors.pop().unwrap();
        let s = tensors.pop().unwrap();
        let v = tensors.pop().unwrap();
        Ok(OptimizerState { cfg, dim, rows, t, row_t, v, s, d })
    }
}

fn slice_or_empty(tensor: &mut [f64], span: std::ops::Range<usize>) -> &mut [f64] {
    if tensor.is_empty() {
        tensor
    } else {
        &mut tensor[span]
    }
}

/// Raw pointers into a rowwise state's accumulators, for the lock-free
/// shared-update training mode. Null when the kind does not use a tensor.
#[derive(Clone, Copy)]
pub(crate) struct RawRowState {
    pub cfg: OptimizerConfig,
    pub dim: usize,
    pub v: *mut f64,
    pub s: *mut f64,
    pub d: *mut f64,
    pub row_t: *mut u64,
}

unsafe impl Send for RawRowState {}
unsafe impl Sync for RawRowState {}

impl RawRowState {
    /// One racy row update. Caller guarantees `row < rows` and that any
    /// concurrent access to the same row is an accepted data race.
    ///
    /// # Safety
    /// The pointers must outlive the call and index a matrix with at least
    /// `(row + 1) * dim` elements per non-null tensor.
    pub(crate) unsafe fn update_row(&self, row: usize, params: &mut [f64], grads: &[f64]) {
        let t = {
            let rt = self.row_t.add(row);
            *rt += 1;
            *rt
        };
        let span = |ptr: *mut f64| {
            if ptr.is_null() {
                &mut [] as &mut [f64]
            } else {
                std::slice::from_raw_parts_mut(ptr.add(row * self.dim), self.dim)
            }
        };
        update_slice(&self.cfg, t, params, grads, span(self.v), span(self.s), span(self.d));
    }
}

impl OptimizerState {
    /// Expose accumulators for the shared-update mode. The state must have
    /// been built with [`make_rowwise_optimizer`].
    pub(crate) fn raw_row_state(&mut self) -> RawRowState {
        assert!(!self.row_t.is_empty() || self.rows > 0);
        if self.row_t.is_empty() {
            self.row_t = vec![0; self.rows];
        }
        let grab = |t: &mut Vec<f64>| {
            if t.is_empty() {
                std::ptr::null_mut()
            } else {
                t.as_mut_ptr()
            }
        };
        RawRowState {
            cfg: self.cfg,
            dim: self.dim,
            v: grab(&mut self.v),
            s: grab(&mut self.s),
            d: grab(&mut self.d),
            row_t: self.row_t.as_mut_ptr(),
        }
    }

    /// Fold per-thread step totals back in after a shared-update run so the
    /// global counter stays meaningful.
    pub(crate) fn add_steps(&mut self, steps: u64) {
        self.t += steps;
    }
}

/// The five update rules over one contiguous span. `t` is the step count
/// used for bias correction (global for dense, per-row for sparse).
fn update_slice(
    cfg: &OptimizerConfig,
    t: u64,
    params: &mut [f64],
    grads: &[f64],
    v: &mut [f64],
    s: &mut [f64],
    d: &mut [f64],
) {
    let lr = cfg.learning_rate;
    let eps = cfg.epsilon;
    match cfg.kind {
        OptimizerKind::Sgd => {
            for (w, &g) in params.iter_mut().zip(grads) {
                *w -= lr * g;
            }
        }
        OptimizerKind::Adagrad => {
            for i in 0..params.len() {
                let g = grads[i];
                v[i] += g * g;
                params[i] -= lr * g / (v[i] + eps).sqrt();
            }
        }
        OptimizerKind::Adadelta => {
            let gamma = cfg.gamma;
            for i in 0..params.len() {
                let g = grads[i];
                v[i] = gamma * v[i] + (1.0 - gamma) * g * g;
                let delta = -((d[i] + eps).sqrt() / (v[i] + eps).sqrt()) * g;
                d[i] = gamma * d[i] + (1.0 - gamma) * delta * delta;
                params[i] += delta;
            }
        }
        OptimizerKind::Adam => {
            let (b1, b2) = (cfg.beta1, cfg.beta2);
            let bias1 = 1.0 - b1.powi(t as i32);
            let bias2 = 1.0 - b2.powi(t as i32);
            for i in 0..params.len() {
                let g = grads[i];
                s[i] = b1 * s[i] + (1.0 - b1) * g;
                v[i] = b2 * v[i] + (1.0 - b2) * g * g;
                let s_hat = s[i] / bias1;
                let v_hat = v[i] / bias2;
                params[i] -= lr * s_hat / (v_hat.sqrt() + eps);
            }
        }
        OptimizerKind::Adamax => {
            let (b1, b2) = (cfg.beta1, cfg.beta2);
            let bias1 = 1.0 - b1.powi(t as i32);
            for i in 0..params.len() {
                let g = grads[i];
                s[i] = b1 * s[i] + (1.0 - b1) * g;
                d[i] = (b2 * d[i]).max(g.abs());
                params[i] -= lr / bias1 * s[i] / (d[i] + eps);
            }
        }
    }
}

fn check_finite(grads: &[f64]) -> Result<()> {
    if grads.iter().all(|g| g.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numerical("non-finite gradient passed to optimizer".into()))
    }
}

fn hexf(x: f64) -> String {
    format!("{:016x}", x.to_bits())
}

fn unhexf(s: &str) -> Result<f64> {
    u64::from_str_radix(s, 16)
        .map(f64::from_bits)
        .map_err(|e| Error::Parse { line: 2, message: format!("bad f64 hex: {e}") })
}

fn parse_num<T: FromStr>(s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>().map_err(|e| Error::Parse { line: 2, message: format!("bad number {s:?}: {e}") })
}

fn read_line<R: Read>(r: &mut R, out: &mut Vec<u8>) -> Result<()> {
    let mut byte = [0u8; 1];
    loop {
        r.read_exact(&mut byte)?;
        if byte[0] == b'\n' {
            return Ok(());
        }
        out.push(byte[0]);
    }
}
