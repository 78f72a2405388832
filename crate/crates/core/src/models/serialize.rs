//! Model files: a JSON container with the config and named weight arrays.
//!
//! Weights are written as base64 of the little-endian f64 bytes, so a file
//! saved by any build reloads to bitwise-identical forward passes. Plain
//! float lists are also accepted on load (serde_json round-trips f64
//! exactly).

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::tensor::Tensor;

use super::{ModelConfig, ModelError, ModelParams};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct WeightJson {
    name: String,
    shape: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    data_b64: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    data: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    version: u32,
    config: ModelConfig,
    input_channels: Vec<usize>,
    weights: Vec<WeightJson>,
}

pub fn model_to_json(params: &ModelParams) -> String {
    let names = params.tensor_names();
    let weights = params
        .tensors()
        .iter()
        .zip(names)
        .map(|(t, name)| {
            let mut bytes = Vec::with_capacity(t.len() * 8);
            for v in t.data() {
                bytes.extend_from_slice(&v.to_le_bytes());
            }
            WeightJson {
                name,
                shape: t.shape().to_vec(),
                data_b64: Some(B64.encode(bytes)),
                data: None,
            }
        })
        .collect();
    serde_json::to_string(&ModelJson {
        version: MODEL_FORMAT_VERSION,
        config: params.config.clone(),
        input_channels: params.input_channels.clone(),
        weights,
    })
    .expect("model serialization cannot fail")
}

fn decode_weight(w: &WeightJson) -> Result<Tensor, ModelError> {
    let data: Vec<f64> = if let Some(b64) = &w.data_b64 {
        let bytes = B64
            .decode(b64)
            .map_err(|e| ModelError::BadModelFile(format!("weight {}: {e}", w.name)))?;
        if bytes.len() % 8 != 0 {
            return Err(ModelError::BadModelFile(format!(
                "weight {}: byte length {} not a multiple of 8",
                w.name,
                bytes.len()
            )));
        }
        bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect()
    } else if let Some(values) = &w.data {
        values.clone()
    } else {
        return Err(ModelError::BadModelFile(format!(
            "weight {} has neither data_b64 nor data",
            w.name
        )));
    };
    Ok(Tensor::new(w.shape.clone(), data)?)
}

pub fn model_from_json(text: &str) -> Result<ModelParams, ModelError> {
    let json: ModelJson = serde_json::from_str(text)
        .map_err(|e| ModelError::BadModelFile(format!("parse error: {e}")))?;
    if json.version != MODEL_FORMAT_VERSION {
        return Err(ModelError::BadModelFile(format!(
            "unsupported version {}",
            json.version
        )));
    }
    let mut params = ModelParams::init(&json.config, &json.input_channels, 0)?;
    let names = params.tensor_names();
    if names.len() != json.weights.len() {
        return Err(ModelError::BadModelFile(format!(
            "expected {} weight arrays, file has {}",
            names.len(),
            json.weights.len()
        )));
    }
    for (slot, (expected_name, w)) in params
        .tensors_mut()
        .into_iter()
        .zip(names.iter().zip(&json.weights))
    {
        if &w.name != expected_name {
            return Err(ModelError::BadModelFile(format!(
                "weight order mismatch: expected {expected_name}, found {}",
                w.name
            )));
        }
        let tensor = decode_weight(w)?;
        if tensor.shape() != slot.shape() {
            return Err(ModelError::BadModelFile(format!(
                "weight {expected_name}: shape {:?} does not match config-derived {:?}",
                tensor.shape(),
                slot.shape()
            )));
        }
        *slot = tensor;
    }
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::Hypergraph;
    use crate::models::{nlm_forward, ModelFamily};

    #[test]
    fn save_load_reproduces_bitwise_forwards() {
        let g = Hypergraph::from_edge_list(4, &[(0, 1), (1, 2), (2, 3)], &[], false).unwrap();
        let cfg = ModelConfig::new(ModelFamily::Nlm, 2, 3, 8);
        let params = ModelParams::init_for_graph(&cfg, &g, 123).unwrap();
        let before = nlm_forward(&params, &g).unwrap();
        let text = model_to_json(&params);
        let reloaded = model_from_json(&text).unwrap();
        assert_eq!(params, reloaded);
        let after = nlm_forward(&reloaded, &g).unwrap();
        assert_eq!(before, after);
    }

    #[test]
    fn plain_float_lists_are_accepted() {
        let cfg = ModelConfig::new(ModelFamily::Nlm, 1, 1, 2);
        let params = ModelParams::init(&cfg, &[1, 0, 2], 7).unwrap();
        let mut json: serde_json::Value =
            serde_json::from_str(&model_to_json(&params)).unwrap();
        // Rewrite every weight as a plain float list.
        for w in json["weights"].as_array_mut().unwrap() {
            let b64 = w["data_b64"].as_str().unwrap().to_string();
            let bytes = B64.decode(b64).unwrap();
            let floats: Vec<f64> = bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            w.as_object_mut().unwrap().remove("data_b64");
            w["data"] = serde_json::json!(floats);
        }
        let reloaded = model_from_json(&json.to_string()).unwrap();
        assert_eq!(params, reloaded);
    }
}
