//! Text model file.
//!
//! ```text
//! SCU v1
//! scalar=f32
//! conv_kernel=10
//! ...
//! conv_weights 16x9x10 -1.23456789e-1 ...
//! ```
//!
//! Values are written in scientific notation with 9 significant digits for
//! `f32` (17 for `f64`), which is enough to read back the identical bits.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::model::{ParamTensor, ScuModel};
use super::ScuHyperparams;
use crate::error::ModelError;
use crate::num::Scalar;
use crate::signal::N_CHANNELS;

pub const MODEL_HEADER: &str = "SCU v1";

const RUNNING_MEAN: &str = "bn_running_mean";
const RUNNING_VAR: &str = "bn_running_var";

fn dims<T: Scalar>(model: &ScuModel<T>, name: &str) -> Vec<usize> {
    let hp = &model.hyperparams;
    match name {
        "conv_weights" => vec![hp.n_filters, N_CHANNELS, hp.conv_kernel],
        "dense_weights" => vec![3, hp.feature_len()],
        "dense_bias" => vec![3],
        _ => vec![hp.n_filters],
    }
}

fn tensor_names() -> Vec<&'static str> {
    let mut names: Vec<_> = ParamTensor::ALL.iter().map(|t| t.name()).collect();
    names.insert(4, RUNNING_MEAN);
    names.insert(5, RUNNING_VAR);
    names
}

fn values<'a, T: Scalar>(model: &'a ScuModel<T>, name: &str) -> &'a [T] {
    match name {
        RUNNING_MEAN => &model.bn_running_mean,
        RUNNING_VAR => &model.bn_running_var,
        _ => model.param(ParamTensor::ALL.into_iter().find(|t| t.name() == name).unwrap()),
    }
}

fn values_mut<'a, T: Scalar>(model: &'a mut ScuModel<T>, name: &str) -> &'a mut Vec<T> {
    match name {
        RUNNING_MEAN => &mut model.bn_running_mean,
        RUNNING_VAR => &mut model.bn_running_var,
        "conv_weights" => &mut model.conv_weights,
        "conv_bias" => &mut model.conv_bias,
        "bn_gamma" => &mut model.bn_gamma,
        "bn_beta" => &mut model.bn_beta,
        "dense_weights" => &mut model.dense_weights,
        _ => &mut model.dense_bias,
    }
}

pub fn model_to_string<T: Scalar>(model: &ScuModel<T>) -> String {
    let hp = &model.hyperparams;
    let mut out = String::new();
    writeln!(out, "{MODEL_HEADER}").unwrap();
    writeln!(out, "scalar={}", T::NAME).unwrap();
    for (k, v) in [
        ("conv_kernel", hp.conv_kernel.to_string()),
        ("conv_stride", hp.conv_stride.to_string()),
        ("n_filters", hp.n_filters.to_string()),
        ("pool_size", hp.pool_size.to_string()),
        ("dropout_rate", format!("{:e}", hp.dropout_rate)),
        ("l2_scale", format!("{:e}", hp.l2_scale)),
        ("learning_rate", format!("{:e}", hp.learning_rate)),
        ("batch_size", hp.batch_size.to_string()),
        ("epochs", hp.epochs.to_string()),
        ("rng_seed", hp.rng_seed.to_string()),
        ("training_mode", model.training_mode.to_string()),
        ("trained", model.trained.to_string()),
    ] {
        writeln!(out, "{k}={v}").unwrap();
    }
    let precision = T::SIG_DIGITS - 1;
    for name in tensor_names() {
        let shape: Vec<String> = dims(model, name).iter().map(|d| d.to_string()).collect();
        write!(out, "{name} {}", shape.join("x")).unwrap();
        for v in values(model, name) {
            write!(out, " {v:.precision$e}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn model_from_str<T: Scalar>(text: &str) -> Result<ScuModel<T>, ModelError> {
    let err = |line: usize, message: String| ModelError::Format { line, message };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));
    match lines.next() {
        Some((_, MODEL_HEADER)) => {}
        Some((n, other)) => return Err(err(n, format!("expected header {MODEL_HEADER:?}, found {other:?}"))),
        None => return Err(err(1, "empty model file".into())),
    }

    let mut keys: HashMap<&str, (usize, &str)> = HashMap::new();
    let mut tensors: HashMap<&str, (usize, &str, Vec<&str>)> = HashMap::new();
    for (n, line) in lines {
        if line.is_empty() {
            continue;
        }
        if let Some((k, v)) = line.split_once('=') {
            keys.insert(k.trim(), (n, v.trim()));
            continue;
        }
        let mut parts = line.split_ascii_whitespace();
        let name = parts.next().unwrap();
        let shape = parts
            .next()
            .ok_or_else(|| err(n, format!("tensor {name} has no dimensions")))?;
        if tensors.insert(name, (n, shape, parts.collect())).is_some() {
            return Err(err(n, format!("tensor {name} appears twice")));
        }
    }

    let (n, scalar) = keys
        .get("scalar")
        .copied()
        .ok_or_else(|| err(0, "missing key scalar".into()))?;
    if scalar != T::NAME {
        return Err(err(n, format!("file stores {scalar}, loading as {}", T::NAME)));
    }
    let int = |k: &str| field::<u64>(&keys, k);
    let num = |k: &str| field::<f64>(&keys, k);
    let flag = |k: &str| field::<bool>(&keys, k);

    let hp = ScuHyperparams {
        conv_kernel: int("conv_kernel")? as usize,
        conv_stride: int("conv_stride")? as usize,
        n_filters: int("n_filters")? as usize,
        pool_size: int("pool_size")? as usize,
        dropout_rate: num("dropout_rate")?,
        l2_scale: num("l2_scale")?,
        learning_rate: num("learning_rate")?,
        batch_size: int("batch_size")? as usize,
        epochs: int("epochs")? as usize,
        rng_seed: int("rng_seed")?,
    };
    hp.validate().map_err(|e| err(0, e.to_string()))?;

    let mut model = ScuModel::<T>::zeros(hp)?;
    model.training_mode = flag("training_mode")?;
    model.trained = flag("trained")?;
    for name in tensor_names() {
        let (n, shape, raw) = tensors
            .remove(name)
            .ok_or_else(|| err(0, format!("missing tensor {name}")))?;
        let expected: Vec<String> = dims(&model, name).iter().map(|d| d.to_string()).collect();
        let expected = expected.join("x");
        if shape != expected {
            return Err(err(n, format!("{name} has dimensions {shape}, expected {expected}")));
        }
        let parsed: Vec<T> = raw
            .iter()
            .map(|v| v.parse::<T>().map_err(|_| err(n, format!("bad number {v:?} in {name}"))))
            .collect::<Result<_, _>>()?;
        let target = values_mut(&mut model, name);
        if parsed.len() != target.len() {
            return Err(err(
                n,
                format!("{name} holds {} values, dimensions need {}", parsed.len(), target.len()),
            ));
        }
        *target = parsed;
    }
    if let Some((name, (n, ..))) = tensors.into_iter().next() {
        return Err(err(n, format!("unknown tensor {name}")));
    }
    model.check_shapes().map_err(|e| err(0, e.to_string()))?;
    Ok(model)
}

fn field<V: std::str::FromStr>(keys: &HashMap<&str, (usize, &str)>, k: &str) -> Result<V, ModelError> {
    let (line, v) = keys.get(k).copied().ok_or_else(|| ModelError::Format {
        line: 0,
        message: format!("missing key {k}"),
    })?;
    v.parse().map_err(|_| ModelError::Format {
        line,
        message: format!("bad value {v:?} for {k}"),
    })
}

pub fn save_model<T: Scalar>(model: &ScuModel<T>, path: &Path) -> Result<(), ModelError> {
    fs::write(path, model_to_string(model)).map_err(|source| ModelError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_model<T: Scalar>(path: &Path) -> Result<ScuModel<T>, ModelError> {
    let text = fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    model_from_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model<T: Scalar>() -> ScuModel<T> {
        let mut m = ScuModel::<T>::new(ScuHyperparams { n_filters: 2, ..Default::default() }.with_seed(4)).unwrap();
        m.bn_running_var[1] = T::lit(0.37);
        m.bn_running_mean[0] = T::lit(-1.5e-7);
        m.trained = true;
        m
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let m = model::<f32>();
        assert_eq!(model_from_str::<f32>(&model_to_string(&m)).unwrap(), m);
        let m = model::<f64>();
        assert_eq!(model_from_str::<f64>(&model_to_string(&m)).unwrap(), m);
    }

    #[test]
    fn missing_running_var_is_format_error() {
        let text: String = model_to_string(&model::<f32>())
            .lines()
            .filter(|l| !l.starts_with(RUNNING_VAR))
            .map(|l| format!("{l}\n"))
            .collect();
        match model_from_str::<f32>(&text) {
            Err(ModelError::Format { message, .. }) => assert!(message.contains(RUNNING_VAR)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn version_and_dimension_mismatch() {
        let text = model_to_string(&model::<f32>());
        assert!(matches!(
            model_from_str::<f32>(&text.replacen("SCU v1", "SCU v2", 1)),
            Err(ModelError::Format { line: 1, .. })
        ));
        assert!(matches!(
            model_from_str::<f32>(&text.replace("dense_bias 3", "dense_bias 4")),
            Err(ModelError::Format { .. })
        ));
        assert!(matches!(model_from_str::<f64>(&text), Err(ModelError::Format { .. })));
    }
}
