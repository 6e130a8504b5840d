//! Network as an ordered layer list with externally owned parameter storage.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::layers::{self, LayerSpec};
use super::scalar::Real;
use super::tensor::Tensor;
use super::NnError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub input_shape: Vec<usize>,
    pub layers: Vec<LayerSpec>,
}

impl NetworkSpec {
    pub fn new(input_shape: &[usize], layers: Vec<LayerSpec>) -> Result<Self, NnError> {
        let spec = Self {
            input_shape: input_shape.to_vec(),
            layers,
        };
        spec.output_shape()?;
        Ok(spec)
    }

    /// Shape produced by the full layer chain; errors if any adjacent pair is
    /// incompatible.
    pub fn output_shape(&self) -> Result<Vec<usize>, NnError> {
        let mut shape = self.input_shape.clone();
        for (idx, layer) in self.layers.iter().enumerate() {
            shape = layer
                .output_shape(&shape)
                .map_err(|_| NnError::InvalidSpec {
                    layer: idx,
                    detail: format!("{layer} cannot accept input shape {shape:?}"),
                })?;
        }
        Ok(shape)
    }
}

/// Feed-forward network; owns one parameter tensor list per layer.
#[derive(Debug, Clone)]
pub struct Network<S: Real = f32> {
    spec: NetworkSpec,
    params: Vec<Vec<Tensor<S>>>,
}

/// Per-layer inputs captured by [`Network::forward_cached`] for the backward
/// pass.
pub struct ForwardCache<S: Real> {
    layer_inputs: Vec<Tensor<S>>,
    pub output: Tensor<S>,
}

impl<S: Real> Network<S> {
    /// Fan-in-scaled uniform init, deterministic under `seed`. Biases start
    /// at zero.
    pub fn seeded(spec: NetworkSpec, seed: u64) -> Result<Self, NnError> {
        spec.output_shape()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = spec
            .layers
            .iter()
            .map(|layer| {
                let fan_in = layer.fan_in().max(1);
                let limit = 1.0 / (fan_in as f64).sqrt();
                layer
                    .param_shapes()
                    .iter()
                    .enumerate()
                    .map(|(pi, shape)| {
                        let mut t = Tensor::zeros(shape);
                        if pi == 0 {
                            for v in t.data_mut() {
                                *v = S::from_f64(rng.random_range(-limit..limit));
                            }
                        }
                        t
                    })
                    .collect()
            })
            .collect();
        Ok(Self { spec, params })
    }

    /// All parameters zero; forward output of a linear stack is then zero.
    pub fn zeroed(spec: NetworkSpec) -> Result<Self, NnError> {
        spec.output_shape()?;
        let params = spec
            .layers
            .iter()
            .map(|layer| layer.param_shapes().iter().map(|s| Tensor::zeros(s)).collect())
            .collect();
        Ok(Self { spec, params })
    }

    pub fn from_params(spec: NetworkSpec, params: Vec<Vec<Tensor<S>>>) -> Result<Self, NnError> {
        spec.output_shape()?;
        for (idx, (layer, p)) in spec.layers.iter().zip(&params).enumerate() {
            let expected = layer.param_shapes();
            if expected.len() != p.len()
                || expected
                    .iter()
                    .zip(p)
                    .any(|(shape, tensor)| shape.as_slice() != tensor.shape())
            {
                return Err(NnError::InvalidSpec {
                    layer: idx,
                    detail: format!("parameter shapes do not match {layer}"),
                });
            }
        }
        Ok(Self { spec, params })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn params(&self) -> &[Vec<Tensor<S>>] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Vec<Tensor<S>>] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params
            .iter()
            .flat_map(|l| l.iter().map(Tensor::numel))
            .sum()
    }

    /// Copy all parameters from another network with the same spec.
    pub fn copy_params_from(&mut self, other: &Self) {
        debug_assert_eq!(self.spec, other.spec);
        self.params = other.params.clone();
    }

    pub fn cast<T: Real>(&self) -> Network<T> {
        Network {
            spec: self.spec.clone(),
            params: self
                .params
                .iter()
                .map(|l| l.iter().map(Tensor::cast).collect())
                .collect(),
        }
    }

    /// Pure forward pass.
    pub fn forward(&self, input: &Tensor<S>) -> Result<Tensor<S>, NnError> {
        if input.shape() != self.spec.input_shape.as_slice() {
            return Err(NnError::ShapeMismatch {
                expected: self.spec.input_shape.clone(),
                found: input.shape().to_vec(),
            });
        }
        let mut x = input.clone();
        for (layer, params) in self.spec.layers.iter().zip(&self.params) {
            x = layers::forward_owned(layer, params, x)?;
        }
        Ok(x)
    }

    /// Forward over a batch of equally shaped inputs; output gains a leading
    /// batch dimension.
    pub fn forward_batch(&self, inputs: &[Tensor<S>]) -> Result<Tensor<S>, NnError> {
        let out_shape = self.spec.output_shape()?;
        let per = out_shape.iter().product::<usize>();
        let mut data = Vec::with_capacity(per * inputs.len());
        for input in inputs {
            data.extend_from_slice(self.forward(input)?.data());
        }
        let mut shape = vec![inputs.len()];
        shape.extend(out_shape);
        Tensor::from_vec(&shape, data)
    }

    pub fn forward_cached(&self, input: &Tensor<S>) -> Result<ForwardCache<S>, NnError> {
        if input.shape() != self.spec.input_shape.as_slice() {
            return Err(NnError::ShapeMismatch {
                expected: self.spec.input_shape.clone(),
                found: input.shape().to_vec(),
            });
        }
        let mut layer_inputs = Vec::with_capacity(self.spec.layers.len());
        let mut x = input.clone();
        for (layer, params) in self.spec.layers.iter().zip(&self.params) {
            let y = layers::forward(layer, params, &x)?;
            layer_inputs.push(x);
            x = y;
        }
        Ok(ForwardCache {
            layer_inputs,
            output: x,
        })
    }

    /// Backpropagate `grad_out` through the cached pass, accumulating into
    /// `grads` (same nesting as `params`). Returns the input gradient.
    pub fn backward(
        &self,
        cache: &ForwardCache<S>,
        grad_out: &Tensor<S>,
        grads: &mut [Vec<Tensor<S>>],
    ) -> Tensor<S> {
        let mut g = grad_out.clone();
        for idx in (0..self.spec.layers.len()).rev() {
            g = layers::backward(
                &self.spec.layers[idx],
                &self.params[idx],
                &cache.layer_inputs[idx],
                &g,
                &mut grads[idx],
            );
        }
        g
    }

    pub fn zero_grads(&self) -> Vec<Vec<Tensor<S>>> {
        self.spec
            .layers
            .iter()
            .map(|layer| layer.param_shapes().iter().map(|s| Tensor::zeros(s)).collect())
            .collect()
    }
}
