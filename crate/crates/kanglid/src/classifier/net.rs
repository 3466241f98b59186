//! The network math: a single-layer LSTM over subword vectors, followed by
//! optional batch normalization, dropout and a softmax output layer. All in
//! f64, all hand-written, so gradients can be checked against finite
//! differences and runs are bit-reproducible across machines.
//!
//! Conventions:
//! - gate order inside the fused LSTM matrices is [input, forget, cell, output];
//! - padded time steps (mask 0) carry hidden and cell state through unchanged,
//!   so a padded batch row equals the unpadded sequence;
//! - batch norm uses biased batch variance in training and running statistics
//!   in evaluation.

use ndarray::{s, Array1, Array2, Array3, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Variance floor inside batch norm.
pub const BN_EPS: f64 = 1e-5;
/// Fraction of the batch statistic folded into the running statistic.
pub const BN_MOMENTUM: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmParams {
    /// (input_size, 4 * hidden)
    pub w_ih: Array2<f64>,
    /// (hidden, 4 * hidden)
    pub w_hh: Array2<f64>,
    /// (4 * hidden,)
    pub b: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchNormParams {
    pub gamma: Array1<f64>,
    pub beta: Array1<f64>,
    pub running_mean: Array1<f64>,
    pub running_var: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputParams {
    /// (hidden, num_classes)
    pub w: Array2<f64>,
    /// (num_classes,)
    pub b: Array1<f64>,
}

/// Every learnable tensor of the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub lstm: LstmParams,
    pub batch_norm: Option<BatchNormParams>,
    pub output: OutputParams,
}

fn glorot(rng: &mut impl Rng, rows: usize, cols: usize) -> Array2<f64> {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    Array2::from_shape_fn((rows, cols), |_| rng.random_range(-limit..limit))
}

impl Params {
    /// Glorot-uniform weight init; biases zero except the forget gate's,
    /// which starts at 1 so early training does not flush cell state.
    pub fn init(
        rng: &mut impl Rng,
        input_size: usize,
        hidden: usize,
        num_classes: usize,
        batch_norm: bool,
    ) -> Params {
        let w_ih = glorot(rng, input_size, 4 * hidden);
        let w_hh = glorot(rng, hidden, 4 * hidden);
        let mut b = Array1::zeros(4 * hidden);
        b.slice_mut(s![hidden..2 * hidden]).fill(1.0);
        let w = glorot(rng, hidden, num_classes);
        Params {
            lstm: LstmParams { w_ih, w_hh, b },
            batch_norm: batch_norm.then(|| BatchNormParams {
                gamma: Array1::ones(hidden),
                beta: Array1::zeros(hidden),
                running_mean: Array1::zeros(hidden),
                running_var: Array1::ones(hidden),
            }),
            output: OutputParams {
                w,
                b: Array1::zeros(num_classes),
            },
        }
    }

    pub fn input_size(&self) -> usize {
        self.lstm.w_ih.nrows()
    }

    pub fn hidden_size(&self) -> usize {
        self.lstm.w_hh.nrows()
    }

    pub fn num_classes(&self) -> usize {
        self.output.w.ncols()
    }

    /// Trainable parameter count (running statistics excluded).
    pub fn trainable_count(&self) -> usize {
        let mut n = self.lstm.w_ih.len() + self.lstm.w_hh.len() + self.lstm.b.len();
        if let Some(bn) = &self.batch_norm {
            n += bn.gamma.len() + bn.beta.len();
        }
        n + self.output.w.len() + self.output.b.len()
    }

    /// Flat views of the trainable tensors, in a fixed order shared with
    /// [`Grads::flat`]. Arrays stay standard-layout for the model's lifetime.
    pub fn flat_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = vec![
            self.lstm.w_ih.as_slice_mut().expect("standard layout"),
            self.lstm.w_hh.as_slice_mut().expect("standard layout"),
            self.lstm.b.as_slice_mut().expect("standard layout"),
        ];
        if let Some(bn) = &mut self.batch_norm {
            out.push(bn.gamma.as_slice_mut().expect("standard layout"));
            out.push(bn.beta.as_slice_mut().expect("standard layout"));
        }
        out.push(self.output.w.as_slice_mut().expect("standard layout"));
        out.push(self.output.b.as_slice_mut().expect("standard layout"));
        out
    }
}

/// Gradients of the loss with respect to every trainable tensor.
#[derive(Debug, Clone)]
pub struct Grads {
    pub w_ih: Array2<f64>,
    pub w_hh: Array2<f64>,
    pub b: Array1<f64>,
    pub gamma: Option<Array1<f64>>,
    pub beta: Option<Array1<f64>>,
    pub w_out: Array2<f64>,
    pub b_out: Array1<f64>,
}

impl Grads {
    /// Flat views matching [`Params::flat_mut`] order.
    pub fn flat(&self) -> Vec<&[f64]> {
        let mut out = vec![
            self.w_ih.as_slice().expect("standard layout"),
            self.w_hh.as_slice().expect("standard layout"),
            self.b.as_slice().expect("standard layout"),
        ];
        if let Some(g) = &self.gamma {
            out.push(g.as_slice().expect("standard layout"));
        }
        if let Some(b) = &self.beta {
            out.push(b.as_slice().expect("standard layout"));
        }
        out.push(self.w_out.as_slice().expect("standard layout"));
        out.push(self.b_out.as_slice().expect("standard layout"));
        out
    }
}

/// Head layout: where dropout sits relative to batch norm.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DropoutPlacement {
    /// LSTM → batch norm → dropout → output layer.
    #[default]
    AfterBatchNorm,
    /// LSTM → dropout → batch norm → output layer.
    BeforeBatchNorm,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

struct StepCache {
    x: Array2<f64>,
    h_prev: Array2<f64>,
    c_prev: Array2<f64>,
    i: Array2<f64>,
    f: Array2<f64>,
    g: Array2<f64>,
    o: Array2<f64>,
    tanh_c: Array2<f64>,
    /// (batch, 1) validity column for this step.
    m: Array2<f64>,
}

struct BnCache {
    x: Array2<f64>,
    x_hat: Array2<f64>,
    mean: Array1<f64>,
    var: Array1<f64>,
}

/// Everything the backward pass needs, retained from one training forward.
pub struct Cache {
    steps: Vec<StepCache>,
    bn: Option<BnCache>,
    dropout_mask: Option<Array2<f64>>,
    placement: DropoutPlacement,
    pre_output: Array2<f64>,
    probs: Array2<f64>,
    /// Batch statistics for the running-average update, when BN is active.
    pub batch_mean: Option<Array1<f64>>,
    pub batch_var: Option<Array1<f64>>,
}

impl Cache {
    pub fn probs(&self) -> &Array2<f64> {
        &self.probs
    }
}

/// Run the LSTM over (batch, steps, input) with a (batch, steps) mask of
/// 1.0/0.0 and return the final hidden state (batch, hidden).
fn lstm_forward(
    params: &LstmParams,
    vectors: &Array3<f64>,
    mask: &Array2<f64>,
    cache: Option<&mut Vec<StepCache>>,
) -> Array2<f64> {
    let (batch, steps, _input) = vectors.dim();
    let hidden = params.w_hh.nrows();
    let mut h = Array2::zeros((batch, hidden));
    let mut c = Array2::zeros((batch, hidden));
    let mut caches = cache;
    for t in 0..steps {
        let x = vectors.slice(s![.., t, ..]).to_owned();
        let z = x.dot(&params.w_ih) + h.dot(&params.w_hh) + &params.b;
        let i = z.slice(s![.., 0..hidden]).mapv(sigmoid);
        let f = z.slice(s![.., hidden..2 * hidden]).mapv(sigmoid);
        let g = z.slice(s![.., 2 * hidden..3 * hidden]).mapv(f64::tanh);
        let o = z.slice(s![.., 3 * hidden..4 * hidden]).mapv(sigmoid);
        let c_cand = &f * &c + &i * &g;
        let tanh_c = c_cand.mapv(f64::tanh);
        let h_cand = &o * &tanh_c;
        let m = mask.slice(s![.., t..t + 1]).to_owned();
        let keep = m.mapv(|v| 1.0 - v);
        let h_next = &m * &h_cand + &keep * &h;
        let c_next = &m * &c_cand + &keep * &c;
        if let Some(list) = caches.as_deref_mut() {
            list.push(StepCache {
                x,
                h_prev: h.clone(),
                c_prev: c.clone(),
                i,
                f,
                g,
                o,
                tanh_c,
                m,
            });
        }
        h = h_next;
        c = c_next;
    }
    h
}

fn log_softmax(logits: &Array2<f64>) -> Array2<f64> {
    let mut out = logits.clone();
    for mut row in out.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        row.mapv_inplace(|v| v - max);
        let lse = row.mapv(f64::exp).sum().ln();
        row.mapv_inplace(|v| v - lse);
    }
    out
}

/// Mean cross-entropy of one-hot `targets` under `log_probs`.
pub fn cross_entropy(log_probs: &Array2<f64>, targets: &Array2<f64>) -> f64 {
    -(targets * log_probs).sum() / targets.nrows() as f64
}

/// Sample an inverted-dropout mask: entries 0 with probability `rate`,
/// otherwise 1/(1-rate), so expectations match evaluation mode.
pub fn dropout_mask(rng: &mut impl Rng, rows: usize, cols: usize, rate: f64) -> Array2<f64> {
    let keep = 1.0 - rate;
    Array2::from_shape_fn((rows, cols), |_| {
        if rng.random::<f64>() < keep {
            1.0 / keep
        } else {
            0.0
        }
    })
}

fn bn_train(bn: &BatchNormParams, x: Array2<f64>) -> (Array2<f64>, BnCache) {
    let mean = x.mean_axis(Axis(0)).unwrap();
    let centered = &x - &mean;
    let var = centered.mapv(|v| v * v).mean_axis(Axis(0)).unwrap();
    let std_inv = var.mapv(|v| 1.0 / (v + BN_EPS).sqrt());
    let x_hat = &centered * &std_inv;
    let y = &x_hat * &bn.gamma + &bn.beta;
    (
        y,
        BnCache {
            x,
            x_hat,
            mean,
            var,
        },
    )
}

fn bn_eval(bn: &BatchNormParams, x: &Array2<f64>) -> Array2<f64> {
    let std_inv = bn.running_var.mapv(|v| 1.0 / (v + BN_EPS).sqrt());
    (x - &bn.running_mean) * std_inv * &bn.gamma + &bn.beta
}

impl BatchNormParams {
    /// Fold one batch's statistics into the running averages.
    pub fn update_running(&mut self, mean: &Array1<f64>, var: &Array1<f64>) {
        self.running_mean = &self.running_mean * (1.0 - BN_MOMENTUM) + mean * BN_MOMENTUM;
        self.running_var = &self.running_var * (1.0 - BN_MOMENTUM) + var * BN_MOMENTUM;
    }
}

/// Training-mode forward pass. Pure: running statistics are reported in the
/// cache, not applied, so callers decide when to fold them in.
pub fn forward_train(
    params: &Params,
    vectors: &Array3<f64>,
    mask: &Array2<f64>,
    dropout_mask: Option<Array2<f64>>,
    placement: DropoutPlacement,
    targets: &Array2<f64>,
) -> (f64, Cache) {
    let mut steps = Vec::with_capacity(vectors.dim().1);
    let h = lstm_forward(&params.lstm, vectors, mask, Some(&mut steps));

    let mut bn_cache = None;
    let mut batch_mean = None;
    let mut batch_var = None;
    let mut apply_bn = |x: Array2<f64>| -> Array2<f64> {
        match &params.batch_norm {
            Some(bn) => {
                let (y, cache) = bn_train(bn, x);
                batch_mean = Some(cache.mean.clone());
                batch_var = Some(cache.var.clone());
                bn_cache = Some(cache);
                y
            }
            None => x,
        }
    };
    let apply_dropout = |x: Array2<f64>| -> Array2<f64> {
        match &dropout_mask {
            Some(m) => x * m,
            None => x,
        }
    };
    let pre_output = match placement {
        DropoutPlacement::AfterBatchNorm => apply_dropout(apply_bn(h)),
        DropoutPlacement::BeforeBatchNorm => apply_bn(apply_dropout(h)),
    };

    let logits = pre_output.dot(&params.output.w) + &params.output.b;
    let log_probs = log_softmax(&logits);
    let probs = log_probs.mapv(f64::exp);
    let loss = cross_entropy(&log_probs, targets);
    (
        loss,
        Cache {
            steps,
            bn: bn_cache,
            dropout_mask,
            placement,
            pre_output,
            probs,
            batch_mean,
            batch_var,
        },
    )
}

/// Evaluation-mode probabilities: no dropout, batch norm on running stats.
pub fn forward_eval(params: &Params, vectors: &Array3<f64>, mask: &Array2<f64>) -> Array2<f64> {
    let h = lstm_forward(&params.lstm, vectors, mask, None);
    let a = match &params.batch_norm {
        Some(bn) => bn_eval(bn, &h),
        None => h,
    };
    let logits = a.dot(&params.output.w) + &params.output.b;
    log_softmax(&logits).mapv(f64::exp)
}

/// Evaluation-mode mean cross-entropy and probabilities.
pub fn eval_loss(
    params: &Params,
    vectors: &Array3<f64>,
    mask: &Array2<f64>,
    targets: &Array2<f64>,
) -> (f64, Array2<f64>) {
    let probs = forward_eval(params, vectors, mask);
    let log_probs = probs.mapv(|p| p.max(f64::MIN_POSITIVE).ln());
    (cross_entropy(&log_probs, targets), probs)
}

fn bn_backward(
    bn: &BatchNormParams,
    cache: &BnCache,
    dy: &Array2<f64>,
) -> (Array2<f64>, Array1<f64>, Array1<f64>) {
    let n = cache.x.nrows() as f64;
    let std_inv = cache.var.mapv(|v| 1.0 / (v + BN_EPS).sqrt());
    let dgamma = (dy * &cache.x_hat).sum_axis(Axis(0));
    let dbeta = dy.sum_axis(Axis(0));
    let dxhat = dy * &bn.gamma;
    let centered = &cache.x - &cache.mean;
    let dvar = (&dxhat * &centered).sum_axis(Axis(0)) * std_inv.mapv(|v| -0.5 * v * v * v);
    let dmean = (&dxhat * &std_inv.mapv(|v| -v)).sum_axis(Axis(0))
        + &dvar * centered.sum_axis(Axis(0)).mapv(|v| -2.0 * v / n);
    let dx = &dxhat * &std_inv + &centered * &dvar.mapv(|v| 2.0 * v / n) + &dmean / n;
    (dx, dgamma, dbeta)
}

/// Backward pass for one training forward.
pub fn backward(params: &Params, cache: &Cache, targets: &Array2<f64>) -> Grads {
    let batch = targets.nrows() as f64;
    let hidden = params.hidden_size();

    // output layer
    let dlogits = (&cache.probs - targets) / batch;
    let w_out = cache.pre_output.t().dot(&dlogits);
    let b_out = dlogits.sum_axis(Axis(0));
    let d_pre = dlogits.dot(&params.output.w.t());

    // head, reversed
    let mut gamma = None;
    let mut beta = None;
    let mut bn_back = |dy: Array2<f64>| -> Array2<f64> {
        match (&params.batch_norm, &cache.bn) {
            (Some(bn), Some(bn_cache)) => {
                let (dx, dg, db) = bn_backward(bn, bn_cache, &dy);
                gamma = Some(dg);
                beta = Some(db);
                dx
            }
            _ => dy,
        }
    };
    let drop_back = |dy: Array2<f64>| -> Array2<f64> {
        match &cache.dropout_mask {
            Some(m) => dy * m,
            None => dy,
        }
    };
    let mut dh = match cache.placement {
        DropoutPlacement::AfterBatchNorm => bn_back(drop_back(d_pre)),
        DropoutPlacement::BeforeBatchNorm => drop_back(bn_back(d_pre)),
    };

    // backprop through time
    let mut w_ih = Array2::zeros(params.lstm.w_ih.raw_dim());
    let mut w_hh = Array2::zeros(params.lstm.w_hh.raw_dim());
    let mut b = Array1::zeros(params.lstm.b.raw_dim());
    let mut dc: Array2<f64> = Array2::zeros((targets.nrows(), hidden));
    for step in cache.steps.iter().rev() {
        let keep = step.m.mapv(|v| 1.0 - v);
        let dh_cand = &step.m * &dh;
        let dc_cand_masked = &step.m * &dc;
        let dtanh = &dh_cand * &step.o;
        let dc_cand = dc_cand_masked + dtanh * step.tanh_c.mapv(|v| 1.0 - v * v);
        let d_o = &dh_cand * &step.tanh_c;
        let d_i = &dc_cand * &step.g;
        let d_f = &dc_cand * &step.c_prev;
        let d_g = &dc_cand * &step.i;

        let dz_i = d_i * step.i.mapv(|v| v * (1.0 - v));
        let dz_f = d_f * step.f.mapv(|v| v * (1.0 - v));
        let dz_g = d_g * step.g.mapv(|v| 1.0 - v * v);
        let dz_o = d_o * step.o.mapv(|v| v * (1.0 - v));
        let mut dz = Array2::zeros((targets.nrows(), 4 * hidden));
        dz.slice_mut(s![.., 0..hidden]).assign(&dz_i);
        dz.slice_mut(s![.., hidden..2 * hidden]).assign(&dz_f);
        dz.slice_mut(s![.., 2 * hidden..3 * hidden]).assign(&dz_g);
        dz.slice_mut(s![.., 3 * hidden..4 * hidden]).assign(&dz_o);

        w_ih += &step.x.t().dot(&dz);
        w_hh += &step.h_prev.t().dot(&dz);
        b += &dz.sum_axis(Axis(0));

        dh = dz.dot(&params.lstm.w_hh.t()) + &keep * &dh;
        dc = &step.f * &dc_cand + &keep * &dc;
    }

    Grads {
        w_ih,
        w_hh,
        b,
        gamma,
        beta,
        w_out,
        b_out,
    }
}
