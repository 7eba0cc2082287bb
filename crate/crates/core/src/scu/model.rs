//! Parameters, forward pass and backpropagation of the SSVEP convolutional unit.
//!
//! Pipeline per epoch: temporal convolution over all nine channels (valid
//! padding) → batch norm → ReLU → max-pool → inverted dropout → dense → softmax.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::ScuHyperparams;
use crate::error::ModelError;
use crate::num::{axpy, dot, Scalar};
use crate::signal::{EegEpoch, StimulusClass, N_CHANNELS, N_CLASSES, N_SAMPLES, SAMPLE_RATE_HZ};

pub const BN_EPS: f64 = 1e-5;
/// Weight on the previous running statistic.
pub const BN_MOMENTUM: f64 = 0.9;

/// Learnable tensors, in file and optimizer order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ParamTensor {
    ConvWeights,
    ConvBias,
    BnGamma,
    BnBeta,
    DenseWeights,
    DenseBias,
}

impl ParamTensor {
    pub const ALL: [ParamTensor; 6] = [
        ParamTensor::ConvWeights,
        ParamTensor::ConvBias,
        ParamTensor::BnGamma,
        ParamTensor::BnBeta,
        ParamTensor::DenseWeights,
        ParamTensor::DenseBias,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ParamTensor::ConvWeights => "conv_weights",
            ParamTensor::ConvBias => "conv_bias",
            ParamTensor::BnGamma => "bn_gamma",
            ParamTensor::BnBeta => "bn_beta",
            ParamTensor::DenseWeights => "dense_weights",
            ParamTensor::DenseBias => "dense_bias",
        }
    }

    /// Whether the L2 penalty applies.
    pub fn is_decayed(self) -> bool {
        matches!(self, ParamTensor::ConvWeights | ParamTensor::DenseWeights)
    }

    fn slot(self) -> usize {
        self as usize
    }
}

/// Which batch-norm statistics a pass uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormStats {
    /// Statistics of the current batch, differentiated through.
    Batch,
    /// Stored running statistics, treated as constants.
    Running,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PassMode {
    pub norm: NormStats,
    /// Seed for the dropout mask; `None` disables dropout.
    pub dropout_seed: Option<u64>,
}

impl PassMode {
    pub fn training(dropout_seed: u64) -> Self {
        Self {
            norm: NormStats::Batch,
            dropout_seed: Some(dropout_seed),
        }
    }

    pub fn inference() -> Self {
        Self {
            norm: NormStats::Running,
            dropout_seed: None,
        }
    }
}

/// One gradient tensor per [`ParamTensor`].
#[derive(Clone, Debug, PartialEq)]
pub struct ScuGradients<T> {
    tensors: [Vec<T>; 6],
}

impl<T: Scalar> ScuGradients<T> {
    pub fn get(&self, t: ParamTensor) -> &[T] {
        &self.tensors[t.slot()]
    }

    fn get_mut(&mut self, t: ParamTensor) -> &mut Vec<T> {
        &mut self.tensors[t.slot()]
    }
}

/// Per-filter statistics observed in a batch-statistics pass.
#[derive(Clone, Debug, PartialEq)]
pub struct BatchStats<T> {
    pub mean: Vec<T>,
    /// Unbiased variance, as folded into the running estimate.
    pub var_unbiased: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScuModel<T> {
    pub hyperparams: ScuHyperparams,
    /// `n_filters × 9 × kernel`
    pub conv_weights: Vec<T>,
    pub conv_bias: Vec<T>,
    pub bn_gamma: Vec<T>,
    pub bn_beta: Vec<T>,
    pub bn_running_mean: Vec<T>,
    pub bn_running_var: Vec<T>,
    /// `3 × feature_len`, feature index = filter · pooled_len + position.
    pub dense_weights: Vec<T>,
    pub dense_bias: Vec<T>,
    pub training_mode: bool,
    pub(crate) trained: bool,
}

/// Output of one training-mode pass.
pub(crate) struct TrainStep<T> {
    pub loss: T,
    pub grads: ScuGradients<T>,
    pub stats: Option<BatchStats<T>>,
    pub probs: Vec<[T; N_CLASSES]>,
}

/// Everything the backward pass needs from a forward pass.
struct Trace<T> {
    batch: usize,
    /// `B × L × (C·K)`
    patches: Vec<T>,
    /// `B × F × L`
    xhat: Vec<T>,
    inv_std: Vec<T>,
    mean: Vec<T>,
    var: Vec<T>,
    /// Winning conv position for every pooled value, `B × F × P`.
    pool_idx: Vec<u32>,
    /// `B × D`, after dropout.
    features: Vec<T>,
    /// Dropout scale per feature (`0` or `1/(1−p)`); empty when disabled.
    mask: Vec<T>,
    /// `B × 3`
    log_probs: Vec<T>,
}

impl<T: Scalar> ScuModel<T> {
    /// Fresh model with He-initialized convolution and Glorot-initialized
    /// dense weights drawn from `hp.rng_seed`.
    pub fn new(hp: ScuHyperparams) -> Result<Self, ModelError> {
        hp.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(hp.rng_seed);
        let fan_in = (N_CHANNELS * hp.conv_kernel) as f64;
        let conv_std = (2.0 / fan_in).sqrt();
        let conv_weights = (0..hp.n_filters * N_CHANNELS * hp.conv_kernel)
            .map(|_| T::lit(conv_std * rng.sample::<f64, _>(StandardNormal)))
            .collect();
        let d = hp.feature_len();
        let limit = (6.0 / (d + N_CLASSES) as f64).sqrt();
        let dense_weights = (0..N_CLASSES * d)
            .map(|_| T::lit(rng.random_range(-limit..limit)))
            .collect();
        let f = hp.n_filters;
        Ok(Self {
            conv_weights,
            conv_bias: vec![T::zero(); f],
            bn_gamma: vec![T::one(); f],
            bn_beta: vec![T::zero(); f],
            bn_running_mean: vec![T::zero(); f],
            bn_running_var: vec![T::one(); f],
            dense_weights,
            dense_bias: vec![T::zero(); N_CLASSES],
            hyperparams: hp,
            training_mode: false,
            trained: false,
        })
    }

    /// All-zero weights and biases with identity batch norm.
    pub fn zeros(hp: ScuHyperparams) -> Result<Self, ModelError> {
        let mut m = Self::new(hp)?;
        m.conv_weights.iter_mut().for_each(|w| *w = T::zero());
        m.dense_weights.iter_mut().for_each(|w| *w = T::zero());
        Ok(m)
    }

    pub fn is_trained(&self) -> bool {
        self.trained
    }

    /// Marks externally-set weights as ready for `predict`.
    pub fn mark_trained(&mut self) {
        self.trained = true;
    }

    pub fn param(&self, t: ParamTensor) -> &[T] {
        match t {
            ParamTensor::ConvWeights => &self.conv_weights,
            ParamTensor::ConvBias => &self.conv_bias,
            ParamTensor::BnGamma => &self.bn_gamma,
            ParamTensor::BnBeta => &self.bn_beta,
            ParamTensor::DenseWeights => &self.dense_weights,
            ParamTensor::DenseBias => &self.dense_bias,
        }
    }

    pub fn param_mut(&mut self, t: ParamTensor) -> &mut [T] {
        match t {
            ParamTensor::ConvWeights => &mut self.conv_weights,
            ParamTensor::ConvBias => &mut self.conv_bias,
            ParamTensor::BnGamma => &mut self.bn_gamma,
            ParamTensor::BnBeta => &mut self.bn_beta,
            ParamTensor::DenseWeights => &mut self.dense_weights,
            ParamTensor::DenseBias => &mut self.dense_bias,
        }
    }

    /// Expected length of each tensor under the model's hyperparameters.
    pub fn expected_len(&self, t: ParamTensor) -> usize {
        let hp = &self.hyperparams;
        match t {
            ParamTensor::ConvWeights => hp.n_filters * N_CHANNELS * hp.conv_kernel,
            ParamTensor::ConvBias | ParamTensor::BnGamma | ParamTensor::BnBeta => hp.n_filters,
            ParamTensor::DenseWeights => N_CLASSES * hp.feature_len(),
            ParamTensor::DenseBias => N_CLASSES,
        }
    }

    pub fn check_shapes(&self) -> Result<(), ModelError> {
        for t in ParamTensor::ALL {
            if self.param(t).len() != self.expected_len(t) {
                return Err(ModelError::Shape(format!(
                    "{} has {} values, expected {}",
                    t.name(),
                    self.param(t).len(),
                    self.expected_len(t)
                )));
            }
        }
        let f = self.hyperparams.n_filters;
        if self.bn_running_mean.len() != f || self.bn_running_var.len() != f {
            return Err(ModelError::Shape("running statistics length mismatch".into()));
        }
        if self.bn_running_var.iter().any(|v| !(*v > T::zero())) {
            return Err(ModelError::Shape("bn_running_var must be strictly positive".into()));
        }
        Ok(())
    }

    /// Class probabilities for one epoch.
    ///
    /// With `inference = false` the pass uses this epoch's own batch-norm
    /// statistics and a dropout mask drawn from the model seed.
    pub fn forward(&self, epoch: &EegEpoch<T>, inference: bool) -> Result<[T; N_CLASSES], ModelError> {
        let mode = if inference {
            PassMode::inference()
        } else {
            PassMode::training(self.hyperparams.rng_seed)
        };
        Ok(self.forward_batch(&[epoch], &mode)?[0])
    }

    /// Class probabilities for a batch under an explicit pass mode.
    pub fn forward_batch(
        &self,
        epochs: &[&EegEpoch<T>],
        mode: &PassMode,
    ) -> Result<Vec<[T; N_CLASSES]>, ModelError> {
        let trace = self.run_forward(epochs, mode)?;
        Ok(trace
            .log_probs
            .chunks_exact(N_CLASSES)
            .map(|lp| [lp[0].exp(), lp[1].exp(), lp[2].exp()])
            .collect())
    }

    /// Dense-layer inputs (pooled activations after dropout), one row per epoch.
    pub fn features(&self, epochs: &[&EegEpoch<T>], mode: &PassMode) -> Result<Vec<Vec<T>>, ModelError> {
        let trace = self.run_forward(epochs, mode)?;
        Ok(trace
            .features
            .chunks_exact(self.hyperparams.feature_len())
            .map(<[T]>::to_vec)
            .collect())
    }

    /// Mean cross-entropy plus the L2 penalty.
    pub fn loss(
        &self,
        batch: &[(&EegEpoch<T>, StimulusClass)],
        mode: &PassMode,
    ) -> Result<T, ModelError> {
        let epochs: Vec<_> = batch.iter().map(|(e, _)| *e).collect();
        let trace = self.run_forward(&epochs, mode)?;
        Ok(self.loss_from_trace(&trace, batch))
    }

    /// Loss and the gradient of every learnable tensor by backpropagation.
    pub fn loss_and_gradients(
        &self,
        batch: &[(&EegEpoch<T>, StimulusClass)],
        mode: &PassMode,
    ) -> Result<(T, ScuGradients<T>), ModelError> {
        let step = self.loss_gradients_stats(batch, mode)?;
        Ok((step.loss, step.grads))
    }

    /// ReLU on/off states and max-pool winners of a pass. Two parameter
    /// settings with equal patterns lie on the same smooth piece of the loss.
    pub fn activation_pattern(
        &self,
        epochs: &[&EegEpoch<T>],
        mode: &PassMode,
    ) -> Result<Vec<u32>, ModelError> {
        let trace = self.run_forward(epochs, mode)?;
        let mut pattern = trace.pool_idx.clone();
        let l = self.hyperparams.conv_len();
        let f = self.hyperparams.n_filters;
        for (i, x) in trace.xhat.iter().enumerate() {
            let filter = (i / l) % f;
            pattern.push((self.bn_gamma[filter] * *x + self.bn_beta[filter] > T::zero()) as u32);
        }
        Ok(pattern)
    }

    pub(crate) fn loss_gradients_stats(
        &self,
        batch: &[(&EegEpoch<T>, StimulusClass)],
        mode: &PassMode,
    ) -> Result<TrainStep<T>, ModelError> {
        let epochs: Vec<_> = batch.iter().map(|(e, _)| *e).collect();
        let trace = self.run_forward(&epochs, mode)?;
        let loss = self.loss_from_trace(&trace, batch);
        let grads = self.backward(&trace, batch, mode);
        let stats = (mode.norm == NormStats::Batch).then(|| {
            let m = (trace.batch * self.hyperparams.conv_len()) as f64;
            let correction = if m > 1.0 { T::lit(m / (m - 1.0)) } else { T::one() };
            BatchStats {
                mean: trace.mean.clone(),
                var_unbiased: trace.var.iter().map(|v| *v * correction).collect(),
            }
        });
        let probs = trace
            .log_probs
            .chunks_exact(N_CLASSES)
            .map(|lp| [lp[0].exp(), lp[1].exp(), lp[2].exp()])
            .collect();
        Ok(TrainStep { loss, grads, stats, probs })
    }

    fn loss_from_trace(&self, trace: &Trace<T>, batch: &[(&EegEpoch<T>, StimulusClass)]) -> T {
        let nll = batch
            .iter()
            .enumerate()
            .map(|(b, (_, y))| -trace.log_probs[b * N_CLASSES + y.index()])
            .sum::<T>()
            / T::lit(batch.len() as f64);
        nll + T::lit(self.hyperparams.l2_scale) * self.l2_norm_sq()
    }

    /// Sum of squared conv and dense weights.
    pub fn l2_norm_sq(&self) -> T {
        ParamTensor::ALL
            .iter()
            .filter(|t| t.is_decayed())
            .map(|t| self.param(*t).iter().map(|w| *w * *w).sum::<T>())
            .sum()
    }

    fn run_forward(&self, epochs: &[&EegEpoch<T>], mode: &PassMode) -> Result<Trace<T>, ModelError> {
        if epochs.is_empty() {
            return Err(ModelError::Shape("empty batch".into()));
        }
        self.check_shapes()?;
        if let Some(e) = epochs.iter().find(|e| e.sample_rate_hz() != SAMPLE_RATE_HZ) {
            return Err(ModelError::Shape(format!(
                "epoch sampled at {} Hz, model expects {SAMPLE_RATE_HZ} Hz",
                e.sample_rate_hz()
            )));
        }
        let hp = &self.hyperparams;
        let (bsz, f, k, s) = (epochs.len(), hp.n_filters, hp.conv_kernel, hp.conv_stride);
        let (l, p, pool, d) = (hp.conv_len(), hp.pooled_len(), hp.pool_size, hp.feature_len());
        let ck = N_CHANNELS * k;

        let mut patches = vec![T::zero(); bsz * l * ck];
        for (b, epoch) in epochs.iter().enumerate() {
            let x = epoch.as_slice();
            for t in 0..l {
                let row = &mut patches[(b * l + t) * ck..(b * l + t + 1) * ck];
                for c in 0..N_CHANNELS {
                    let start = c * N_SAMPLES + t * s;
                    row[c * k..(c + 1) * k].copy_from_slice(&x[start..start + k]);
                }
            }
        }

        let mut conv = vec![T::zero(); bsz * f * l];
        for b in 0..bsz {
            for fi in 0..f {
                let w = &self.conv_weights[fi * ck..(fi + 1) * ck];
                let out = &mut conv[(b * f + fi) * l..(b * f + fi + 1) * l];
                for (t, o) in out.iter_mut().enumerate() {
                    let patch = &patches[(b * l + t) * ck..(b * l + t + 1) * ck];
                    *o = self.conv_bias[fi] + dot(w, patch);
                }
            }
        }

        let (mean, var) = match mode.norm {
            NormStats::Batch => {
                let m = T::lit((bsz * l) as f64);
                let mut mean = vec![T::zero(); f];
                let mut var = vec![T::zero(); f];
                for fi in 0..f {
                    let rows = (0..bsz).map(|b| &conv[(b * f + fi) * l..(b * f + fi + 1) * l]);
                    let mu = rows.clone().map(|r| r.iter().copied().sum::<T>()).sum::<T>() / m;
                    let v = rows
                        .map(|r| r.iter().map(|x| (*x - mu) * (*x - mu)).sum::<T>())
                        .sum::<T>()
                        / m;
                    mean[fi] = mu;
                    var[fi] = v;
                }
                (mean, var)
            }
            NormStats::Running => (self.bn_running_mean.clone(), self.bn_running_var.clone()),
        };
        let inv_std: Vec<T> = var.iter().map(|v| (*v + T::lit(BN_EPS)).sqrt().recip()).collect();

        // conv becomes xhat in place.
        let mut xhat = conv;
        let mut pool_idx = vec![0u32; bsz * f * p];
        let mut pooled = vec![T::zero(); bsz * d];
        for b in 0..bsz {
            for fi in 0..f {
                let row = &mut xhat[(b * f + fi) * l..(b * f + fi + 1) * l];
                row.iter_mut().for_each(|x| *x = (*x - mean[fi]) * inv_std[fi]);
                let (g, beta) = (self.bn_gamma[fi], self.bn_beta[fi]);
                for pi in 0..p {
                    let mut best = pi * pool;
                    let mut best_val = T::neg_infinity();
                    for t in pi * pool..(pi + 1) * pool {
                        let a = (g * row[t] + beta).max(T::zero());
                        if a > best_val {
                            best_val = a;
                            best = t;
                        }
                    }
                    pool_idx[(b * f + fi) * p + pi] = best as u32;
                    pooled[b * d + fi * p + pi] = best_val;
                }
            }
        }

        let mut mask = Vec::new();
        if let Some(seed) = mode.dropout_seed {
            let rate = hp.dropout_rate;
            if rate > 0.0 {
                let keep_scale = T::lit(1.0 / (1.0 - rate));
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                mask = (0..bsz * d)
                    .map(|_| {
                        if rng.random::<f64>() < rate {
                            T::zero()
                        } else {
                            keep_scale
                        }
                    })
                    .collect();
                pooled.iter_mut().zip(&mask).for_each(|(v, m)| *v = *v * *m);
            }
        }
        let features = pooled;

        let mut log_probs = vec![T::zero(); bsz * N_CLASSES];
        for b in 0..bsz {
            let feat = &features[b * d..(b + 1) * d];
            let mut logits = [T::zero(); N_CLASSES];
            for (j, logit) in logits.iter_mut().enumerate() {
                *logit = self.dense_bias[j] + dot(&self.dense_weights[j * d..(j + 1) * d], feat);
            }
            let mx = logits.iter().copied().fold(T::neg_infinity(), T::max);
            let lse = mx + logits.iter().map(|z| (*z - mx).exp()).sum::<T>().ln();
            for j in 0..N_CLASSES {
                log_probs[b * N_CLASSES + j] = logits[j] - lse;
            }
        }

        Ok(Trace {
            batch: bsz,
            patches,
            xhat,
            inv_std,
            mean,
            var,
            pool_idx,
            features,
            mask,
            log_probs,
        })
    }

    fn backward(
        &self,
        trace: &Trace<T>,
        batch: &[(&EegEpoch<T>, StimulusClass)],
        mode: &PassMode,
    ) -> ScuGradients<T> {
        let hp = &self.hyperparams;
        let (bsz, f, l, p, d) = (trace.batch, hp.n_filters, hp.conv_len(), hp.pooled_len(), hp.feature_len());
        let ck = N_CHANNELS * hp.conv_kernel;
        let mut g = ScuGradients {
            tensors: ParamTensor::ALL.map(|t| vec![T::zero(); self.expected_len(t)]),
        };
        let inv_b = T::lit(1.0 / bsz as f64);

        // Softmax + cross-entropy.
        let mut dlogits = vec![T::zero(); bsz * N_CLASSES];
        for (b, (_, y)) in batch.iter().enumerate() {
            for j in 0..N_CLASSES {
                let target = if j == y.index() { T::one() } else { T::zero() };
                dlogits[b * N_CLASSES + j] = (trace.log_probs[b * N_CLASSES + j].exp() - target) * inv_b;
            }
        }

        // Dense layer.
        let mut dfeat = vec![T::zero(); bsz * d];
        {
            let dw = g.get_mut(ParamTensor::DenseWeights);
            for b in 0..bsz {
                let feat = &trace.features[b * d..(b + 1) * d];
                for j in 0..N_CLASSES {
                    axpy(dlogits[b * N_CLASSES + j], feat, &mut dw[j * d..(j + 1) * d]);
                }
            }
        }
        {
            let db = g.get_mut(ParamTensor::DenseBias);
            for b in 0..bsz {
                for j in 0..N_CLASSES {
                    db[j] = db[j] + dlogits[b * N_CLASSES + j];
                }
            }
        }
        for b in 0..bsz {
            let out = &mut dfeat[b * d..(b + 1) * d];
            for j in 0..N_CLASSES {
                axpy(dlogits[b * N_CLASSES + j], &self.dense_weights[j * d..(j + 1) * d], out);
            }
        }
        if !trace.mask.is_empty() {
            dfeat.iter_mut().zip(&trace.mask).for_each(|(g, m)| *g = *g * *m);
        }

        // Max-pool routes to the winner, ReLU gates, then batch norm.
        let mut dz = vec![T::zero(); bsz * f * l];
        for b in 0..bsz {
            for fi in 0..f {
                let (gamma, beta) = (self.bn_gamma[fi], self.bn_beta[fi]);
                for pi in 0..p {
                    let t = trace.pool_idx[(b * f + fi) * p + pi] as usize;
                    let at = (b * f + fi) * l + t;
                    if gamma * trace.xhat[at] + beta > T::zero() {
                        dz[at] = dz[at] + dfeat[b * d + fi * p + pi];
                    }
                }
            }
        }

        let m = T::lit((bsz * l) as f64);
        let mut dconv = vec![T::zero(); bsz * f * l];
        for fi in 0..f {
            let rows = |b: usize| (b * f + fi) * l..(b * f + fi + 1) * l;
            let mut sum_dz = T::zero();
            let mut sum_dz_xhat = T::zero();
            for b in 0..bsz {
                let r = rows(b);
                sum_dz = sum_dz + dz[r.clone()].iter().copied().sum::<T>();
                sum_dz_xhat = sum_dz_xhat + dot(&dz[r.clone()], &trace.xhat[r]);
            }
            g.get_mut(ParamTensor::BnGamma)[fi] = sum_dz_xhat;
            g.get_mut(ParamTensor::BnBeta)[fi] = sum_dz;

            let gamma = self.bn_gamma[fi];
            let scale = gamma * trace.inv_std[fi];
            for b in 0..bsz {
                let r = rows(b);
                match mode.norm {
                    NormStats::Batch => {
                        // d/dx of normalized value with batch mean and variance.
                        let (mean_dz, mean_dzx) = (sum_dz / m, sum_dz_xhat / m);
                        for t in r {
                            dconv[t] = scale * (dz[t] - mean_dz - trace.xhat[t] * mean_dzx);
                        }
                    }
                    NormStats::Running => {
                        for t in r {
                            dconv[t] = scale * dz[t];
                        }
                    }
                }
            }
        }

        let mut dconv_w = vec![T::zero(); f * ck];
        let mut dconv_b = vec![T::zero(); f];
        for b in 0..bsz {
            for fi in 0..f {
                let row = &dconv[(b * f + fi) * l..(b * f + fi + 1) * l];
                let dw = &mut dconv_w[fi * ck..(fi + 1) * ck];
                for (t, gval) in row.iter().enumerate() {
                    if *gval != T::zero() {
                        axpy(*gval, &trace.patches[(b * l + t) * ck..(b * l + t + 1) * ck], dw);
                    }
                }
                dconv_b[fi] = dconv_b[fi] + row.iter().copied().sum::<T>();
            }
        }
        *g.get_mut(ParamTensor::ConvWeights) = dconv_w;
        *g.get_mut(ParamTensor::ConvBias) = dconv_b;

        let two_l2 = T::lit(2.0 * hp.l2_scale);
        for t in ParamTensor::ALL.into_iter().filter(|t| t.is_decayed()) {
            let w = self.param(t);
            let gt = g.get_mut(t);
            axpy(two_l2, w, gt);
        }
        g
    }

    /// Folds observed batch statistics into the running estimates.
    pub(crate) fn update_running_stats(&mut self, stats: &BatchStats<T>) {
        let keep = T::lit(BN_MOMENTUM);
        let take = T::one() - keep;
        for fi in 0..self.hyperparams.n_filters {
            self.bn_running_mean[fi] = keep * self.bn_running_mean[fi] + take * stats.mean[fi];
            self.bn_running_var[fi] = keep * self.bn_running_var[fi] + take * stats.var_unbiased[fi];
        }
    }
}
