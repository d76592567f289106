use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tract_onnx::prelude::*;

use super::{Activation, GraphOutputs, InferenceGraph, CONV_FINAL, LOGITS, POOLED};
use crate::error::{Error, Result};

/// `<model>.outputs.json`: the named outputs a graph file exposes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub model: String,
    pub graph: String,
    /// NCHW, batch 1.
    pub input_shape: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalization: Option<Normalization>,
    pub outputs: Vec<SidecarOutput>,
    /// Hex SHA-256 of the graph file; checked when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sha256: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub mean: [f64; 3],
    pub std: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SidecarOutput {
    pub name: String,
    pub shape: Vec<usize>,
}

impl Sidecar {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let sc: Sidecar =
            serde_json::from_str(&text).map_err(|e| Error::Model(format!("{}: {e}", path.display())))?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_shape.len() != 4 || self.input_shape[0] != 1 || self.input_shape[1] != 3 {
            return Err(Error::Model(format!("{}: input shape must be [1, 3, H, W]", self.model)));
        }
        for required in [CONV_FINAL, POOLED, LOGITS] {
            let out = self
                .output(required)
                .ok_or_else(|| Error::Model(format!("{}: missing required output `{required}`", self.model)))?;
            let rank_ok = match required {
                CONV_FINAL => out.shape.len() == 4,
                _ => out.shape.len() == 2,
            };
            if !rank_ok || out.shape[0] != 1 {
                return Err(Error::Model(format!("{}: output `{required}` has shape {:?}", self.model, out.shape)));
            }
        }
        Ok(())
    }

    pub fn output(&self, name: &str) -> Option<&SidecarOutput> {
        self.outputs.iter().find(|o| o.name == name)
    }
}

/// An ONNX graph executed on the CPU through `tract`.
pub struct OnnxGraph {
    sidecar: Sidecar,
    fingerprint: String,
    plan: TypedSimplePlan<TypedModel>,
}

impl std::fmt::Debug for OnnxGraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OnnxGraph")
            .field("model", &self.sidecar.model)
            .field("fingerprint", &self.fingerprint)
            .finish()
    }
}

fn model_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Model(format!("{}: {e}", path.display()))
}

impl OnnxGraph {
    /// Loads `<dir>/<stem>.onnx` with its `<stem>.outputs.json` sidecar.
    pub fn load_named(dir: &Path, stem: &str) -> Result<Self> {
        OnnxGraph::load(&dir.join(format!("{stem}.onnx")))
    }

    pub fn load(graph_path: &Path) -> Result<Self> {
        let sidecar_path = sidecar_path(graph_path);
        let sidecar = Sidecar::read(&sidecar_path)?;
        let bytes = std::fs::read(graph_path).map_err(|e| Error::io(graph_path, e))?;
        let digest = hex::encode(Sha256::digest(&bytes));
        if let Some(expected) = &sidecar.sha256 {
            if !expected.eq_ignore_ascii_case(&digest) {
                return Err(model_err(graph_path, "checksum does not match sidecar"));
            }
        }

        let names: Vec<&str> = sidecar.outputs.iter().map(|o| o.name.as_str()).collect();
        let input_fact = f32::fact(sidecar.input_shape.clone());
        let model = tract_onnx::onnx()
            .model_for_read(&mut bytes.as_slice())
            .and_then(|m| m.with_input_fact(0, input_fact.into()))
            .and_then(|m| m.with_output_names(&names))
            .and_then(|m| m.into_optimized())
            .map_err(|e| model_err(graph_path, e))?;

        for (i, out) in sidecar.outputs.iter().enumerate() {
            let fact = model.output_fact(i).map_err(|e| model_err(graph_path, e))?;
            let shape = fact.shape.as_concrete().map(|s| s.to_vec());
            if shape.as_deref() != Some(out.shape.as_slice()) {
                return Err(model_err(
                    graph_path,
                    format!("output `{}` has shape {:?}, sidecar declares {:?}", out.name, shape, out.shape),
                ));
            }
        }
        let plan = model.into_runnable().map_err(|e| model_err(graph_path, e))?;
        Ok(OnnxGraph {
            fingerprint: digest[..16].to_string(),
            sidecar,
            plan,
        })
    }

    pub fn sidecar(&self) -> &Sidecar {
        &self.sidecar
    }

    fn run(&self, input: &[f32]) -> Result<TVec<TValue>> {
        let shape = &self.sidecar.input_shape;
        let expected: usize = shape.iter().product();
        if input.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: input.len(),
            });
        }
        let tensor = Tensor::from_shape(shape, input).map_err(|e| Error::Inference(e.to_string()))?;
        self.plan
            .run(tvec!(tensor.into()))
            .map_err(|e| Error::Inference(e.to_string()))
    }

    fn output_index(&self, name: &str) -> Option<usize> {
        self.sidecar.outputs.iter().position(|o| o.name == name)
    }

    fn activation(&self, outputs: &TVec<TValue>, name: &str) -> Result<Activation> {
        let i = self.output_index(name).ok_or_else(|| Error::UnknownLayer(name.to_string()))?;
        let shape = &self.sidecar.outputs[i].shape;
        let view = outputs[i].as_slice::<f32>().map_err(|e| Error::Inference(e.to_string()))?;
        let (c, h, w) = match shape.as_slice() {
            [1, c, h, w] => (*c, *h, *w),
            [1, c] => (*c, 1, 1),
            other => return Err(Error::Model(format!("output `{name}` has unsupported shape {other:?}"))),
        };
        Activation::new(c, h, w, view.to_vec())
    }

    fn vector(&self, outputs: &TVec<TValue>, name: &str) -> Result<Vec<f32>> {
        let i = self.output_index(name).ok_or_else(|| Error::UnknownLayer(name.to_string()))?;
        Ok(outputs[i]
            .as_slice::<f32>()
            .map_err(|e| Error::Inference(e.to_string()))?
            .to_vec())
    }
}

/// `foo.onnx` → `foo.outputs.json`.
pub fn sidecar_path(graph_path: &Path) -> PathBuf {
    graph_path.with_extension("outputs.json")
}

impl InferenceGraph for OnnxGraph {
    fn graph_id(&self) -> &str {
        &self.sidecar.model
    }

    fn fingerprint(&self) -> String {
        self.fingerprint.clone()
    }

    fn input_size(&self) -> (usize, usize) {
        (self.sidecar.input_shape[3], self.sidecar.input_shape[2])
    }

    fn forward(&self, input: &[f32]) -> Result<GraphOutputs> {
        let outputs = self.run(input)?;
        Ok(GraphOutputs {
            conv_final: self.activation(&outputs, CONV_FINAL)?,
            pooled: self.vector(&outputs, POOLED)?,
            logits: self.vector(&outputs, LOGITS)?,
        })
    }

    fn layers(&self) -> Vec<String> {
        self.sidecar
            .outputs
            .iter()
            .filter(|o| o.shape.len() == 4)
            .map(|o| o.name.clone())
            .collect()
    }

    fn tap(&self, input: &[f32], layer: &str) -> Result<Activation> {
        if !self.layers().iter().any(|l| l == layer) {
            return Err(Error::UnknownLayer(layer.to_string()));
        }
        let outputs = self.run(input)?;
        self.activation(&outputs, layer)
    }
}
