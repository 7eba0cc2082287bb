use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::signal::N_SAMPLES;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScuHyperparams {
    /// Temporal kernel length (samples).
    pub conv_kernel: usize,
    pub conv_stride: usize,
    pub n_filters: usize,
    pub pool_size: usize,
    pub dropout_rate: f64,
    /// Coefficient on the summed squared conv and dense weights.
    pub l2_scale: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub rng_seed: u64,
}

impl Default for ScuHyperparams {
    fn default() -> Self {
        Self {
            conv_kernel: 10,
            conv_stride: 4,
            n_filters: 16,
            pool_size: 2,
            dropout_rate: 0.5,
            l2_scale: 0.004,
            learning_rate: 1e-3,
            batch_size: 16,
            epochs: 50,
            rng_seed: 0,
        }
    }
}

impl ScuHyperparams {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    /// Valid-convolution output length: `floor((1500 − kernel) / stride) + 1`.
    pub fn conv_len(&self) -> usize {
        (N_SAMPLES - self.conv_kernel) / self.conv_stride + 1
    }

    pub fn pooled_len(&self) -> usize {
        self.conv_len() / self.pool_size
    }

    /// Width of the dense layer's input.
    pub fn feature_len(&self) -> usize {
        self.n_filters * self.pooled_len()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: &str| Err(ModelError::Parameter(m.to_string()));
        if self.conv_kernel == 0 || self.conv_kernel > N_SAMPLES {
            return bad("conv_kernel must lie in 1..=1500");
        }
        if self.conv_stride == 0 {
            return bad("conv_stride must be >= 1");
        }
        if self.n_filters == 0 {
            return bad("n_filters must be >= 1");
        }
        if self.pool_size == 0 || self.pooled_len() == 0 {
            return bad("pool_size must be >= 1 and leave at least one pooled value");
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return bad("dropout_rate must lie in [0, 1)");
        }
        if !(self.l2_scale.is_finite() && self.l2_scale >= 0.0) {
            return bad("l2_scale must be finite and >= 0");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning_rate must be finite and > 0");
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return bad("batch_size and epochs must be >= 1");
        }
        Ok(())
    }
}
