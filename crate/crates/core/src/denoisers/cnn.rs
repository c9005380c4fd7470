//! Untrained convolutional stack `F_L ∘ … ∘ F₁` over multichannel
//! sequences, with weights loaded from a binary file.
//!
//! Signals are time-major: sample `n`, channel `c` lives at `n·d + c`.
//! A convolution layer computes `z'_n = Σ_k H_k z_{n−k}` with zero history
//! before `n = 0`.
//!
//! # Weight file
//!
//! ```text
//! bytes 0..8    magic "PNPCNN01"
//! bytes 8..12   header length H, u32 little-endian
//! bytes 12..12+H  UTF-8 JSON header
//! remaining     f64 little-endian weights
//! ```
//!
//! The header is
//! `{"input_channels": d0, "layers": [{"kind": "conv", "in_channels": a,
//! "out_channels": b, "taps": k}, {"kind": "relu"}, {"kind": "sigmoid"}]}`.
//! Weights of every conv layer follow in layer order, each stored as
//! `taps × out_channels × in_channels` with the input channel fastest.

use std::path::Path;

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"PNPCNN01";

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Conv(ConvLayer),
    Relu,
    Sigmoid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvLayer {
    pub in_channels: usize,
    pub out_channels: usize,
    pub taps: usize,
    /// `taps × out × in`, input channel fastest.
    pub weights: Vec<f64>,
}

impl ConvLayer {
    pub fn new(in_channels: usize, out_channels: usize, taps: usize, weights: Vec<f64>) -> Result<Self> {
        if in_channels == 0 || out_channels == 0 || taps == 0 {
            return Err(Error::InvalidParameter("empty convolution layer".into()));
        }
        Error::check_len(taps * out_channels * in_channels, weights.len())?;
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("convolution weights".into()));
        }
        Ok(ConvLayer {
            in_channels,
            out_channels,
            taps,
            weights,
        })
    }

    fn weight(&self, k: usize, o: usize, i: usize) -> f64 {
        self.weights[(k * self.out_channels + o) * self.in_channels + i]
    }

    fn apply(&self, z: &[f64]) -> Vec<f64> {
        let t = z.len() / self.in_channels;
        let mut out = vec![0.0; t * self.out_channels];
        for n in 0..t {
            for k in 0..self.taps.min(n + 1) {
                let src = &z[(n - k) * self.in_channels..(n - k + 1) * self.in_channels];
                for o in 0..self.out_channels {
                    let acc: f64 = (0..self.in_channels).map(|i| self.weight(k, o, i) * src[i]).sum();
                    out[n * self.out_channels + o] += acc;
                }
            }
        }
        out
    }

    /// `max_θ σ_max(Σ_k H_k e^{−ikθ})` over `grid` frequencies.
    pub fn lipschitz_bound(&self, grid: usize) -> f64 {
        (0..grid)
            .map(|g| {
                let theta = 2.0 * std::f64::consts::PI * g as f64 / grid as f64;
                let h = DMatrix::from_fn(self.out_channels, self.in_channels, |o, i| {
                    (0..self.taps)
                        .map(|k| Complex::from_polar(self.weight(k, o, i), -(k as f64) * theta))
                        .sum::<Complex<f64>>()
                });
                h.singular_values().max()
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CnnStack {
    pub input_channels: usize,
    pub layers: Vec<Layer>,
}

impl CnnStack {
    /// Validates that channel counts chain and that the output has as many
    /// channels as the input.
    pub fn new(input_channels: usize, layers: Vec<Layer>) -> Result<Self> {
        if input_channels == 0 {
            return Err(Error::InvalidParameter("zero input channels".into()));
        }
        let mut channels = input_channels;
        for (idx, layer) in layers.iter().enumerate() {
            if let Layer::Conv(c) = layer {
                if c.in_channels != channels {
                    return Err(Error::InvalidParameter(format!(
                        "layer {idx} expects {} channels, receives {channels}",
                        c.in_channels
                    )));
                }
                channels = c.out_channels;
            }
        }
        if channels != input_channels {
            return Err(Error::InvalidParameter(format!(
                "stack maps {input_channels} channels to {channels}"
            )));
        }
        Ok(CnnStack {
            input_channels,
            layers,
        })
    }

    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        self.layers.iter().fold(r.to_vec(), |z, layer| match layer {
            Layer::Conv(c) => c.apply(&z),
            Layer::Relu => z.into_iter().map(|v| v.max(0.0)).collect(),
            Layer::Sigmoid => z.into_iter().map(|v| 1.0 / (1.0 + (-v).exp())).collect(),
        })
    }

    /// Product of per-layer Lipschitz constants (activations count as 1).
    pub fn lipschitz_bound(&self, grid: usize) -> f64 {
        self.layers
            .iter()
            .map(|l| match l {
                Layer::Conv(c) => c.lipschitz_bound(grid),
                _ => 1.0,
            })
            .product()
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::decode(&std::fs::read(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.encode())?;
        Ok(())
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 12 || &bytes[..8] != MAGIC {
            return Err(Error::Format("missing CNN weight-file magic".into()));
        }
        let header_len = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let header_bytes = bytes
            .get(12..12 + header_len)
            .ok_or_else(|| Error::Format("truncated CNN header".into()))?;
        let header: Header = serde_json::from_slice(header_bytes)
            .map_err(|e| Error::Format(format!("CNN header: {e}")))?;
        let mut floats = bytes[12 + header_len..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
        if (bytes.len() - 12 - header_len) % 8 != 0 {
            return Err(Error::Format("weight payload is not a whole number of f64".into()));
        }
        let mut layers = Vec::with_capacity(header.layers.len());
        for spec in header.layers {
            layers.push(match spec {
                LayerHeader::Conv {
                    in_channels,
                    out_channels,
                    taps,
                } => {
                    let count = in_channels * out_channels * taps;
                    let weights: Vec<f64> = floats.by_ref().take(count).collect();
                    if weights.len() != count {
                        return Err(Error::Format("truncated weight payload".into()));
                    }
                    Layer::Conv(ConvLayer::new(in_channels, out_channels, taps, weights)?)
                }
                LayerHeader::Relu => Layer::Relu,
                LayerHeader::Sigmoid => Layer::Sigmoid,
            });
        }
        if floats.next().is_some() {
            return Err(Error::Format("trailing weights after last layer".into()));
        }
        CnnStack::new(header.input_channels, layers)
    }

    pub fn encode(&self) -> Vec<u8> {
        let header = Header {
            input_channels: self.input_channels,
            layers: self
                .layers
                .iter()
                .map(|l| match l {
                    Layer::Conv(c) => LayerHeader::Conv {
                        in_channels: c.in_channels,
                        out_channels: c.out_channels,
                        taps: c.taps,
                    },
                    Layer::Relu => LayerHeader::Relu,
                    Layer::Sigmoid => LayerHeader::Sigmoid,
                })
                .collect(),
        };
        let json = serde_json::to_vec(&header).expect("header serializes");
        let mut out = MAGIC.to_vec();
        out.extend((json.len() as u32).to_le_bytes());
        out.extend(json);
        for layer in &self.layers {
            if let Layer::Conv(c) = layer {
                for w in &c.weights {
                    out.extend(w.to_le_bytes());
                }
            }
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    input_channels: usize,
    layers: Vec<LayerHeader>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum LayerHeader {
    Conv {
        in_channels: usize,
        out_channels: usize,
        taps: usize,
    },
    Relu,
    Sigmoid,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_conv(channels: usize) -> ConvLayer {
        let mut w = vec![0.0; channels * channels];
        for c in 0..channels {
            w[c * channels + c] = 1.0;
        }
        ConvLayer::new(channels, channels, 1, w).unwrap()
    }

    #[test]
    fn identity_kernel_is_identity() {
        let stack = CnnStack::new(2, vec![Layer::Conv(identity_conv(2))]).unwrap();
        let r = [1.0, -2.0, 0.5, 4.0];
        assert_eq!(stack.apply(&r), r.to_vec());
    }

    #[test]
    fn relu_kills_negative_input() {
        let stack = CnnStack::new(1, vec![Layer::Relu]).unwrap();
        assert_eq!(stack.apply(&[-1.0, -0.5, -3.0]), vec![0.0; 3]);
    }

    #[test]
    fn channel_mismatch_rejected() {
        let c = ConvLayer::new(1, 3, 2, vec![0.1; 6]).unwrap();
        assert!(CnnStack::new(1, vec![Layer::Conv(c.clone())]).is_err());
        assert!(CnnStack::new(2, vec![Layer::Conv(c)]).is_err());
    }

    #[test]
    fn weight_file_roundtrip() {
        let up = ConvLayer::new(1, 2, 3, vec![0.1, -0.2, 0.3, 0.4, -0.5, 0.6]).unwrap();
        let down = ConvLayer::new(2, 1, 2, vec![0.7, 0.8, -0.9, 1.0]).unwrap();
        let stack = CnnStack::new(1, vec![Layer::Conv(up), Layer::Relu, Layer::Conv(down), Layer::Sigmoid]).unwrap();
        let bytes = stack.encode();
        assert_eq!(CnnStack::decode(&bytes).unwrap(), stack);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.bin");
        stack.write(&path).unwrap();
        assert_eq!(CnnStack::read(&path).unwrap(), stack);
    }

    #[test]
    fn unknown_activation_rejected() {
        let header = br#"{"input_channels":1,"layers":[{"kind":"tanh"}]}"#;
        let mut bytes = MAGIC.to_vec();
        bytes.extend((header.len() as u32).to_le_bytes());
        bytes.extend_from_slice(header);
        assert!(matches!(CnnStack::decode(&bytes), Err(Error::Format(_))));
    }

    #[test]
    fn truncated_payload_rejected() {
        let stack = CnnStack::new(1, vec![Layer::Conv(identity_conv(1))]).unwrap();
        let mut bytes = stack.encode();
        bytes.truncate(bytes.len() - 8);
        assert!(CnnStack::decode(&bytes).is_err());
    }
}
