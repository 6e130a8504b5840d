//! Adam optimizer and the masked Huber regression step used by both agents.

use super::network::Network;
use super::scalar::Real;
use super::tensor::Tensor;
use super::NnError;

/// Per-parameter first-order optimizer with bias-corrected moment estimates.
#[derive(Debug, Clone)]
pub struct Adam<S: Real = f32> {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: u64,
    m: Vec<Vec<Tensor<S>>>,
    v: Vec<Vec<Tensor<S>>>,
}

impl<S: Real> Adam<S> {
    pub fn new(net: &Network<S>, learning_rate: f64) -> Self {
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            m: net.zero_grads(),
            v: net.zero_grads(),
        }
    }

    pub fn apply(&mut self, net: &mut Network<S>, grads: &[Vec<Tensor<S>>]) {
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        let lr = S::from_f64(self.learning_rate * bc2.sqrt() / bc1);
        let b1 = S::from_f64(self.beta1);
        let b1c = S::from_f64(1.0 - self.beta1);
        let b2 = S::from_f64(self.beta2);
        let b2c = S::from_f64(1.0 - self.beta2);
        let eps = S::from_f64(self.epsilon);
        for (li, layer) in net.params_mut().iter_mut().enumerate() {
            for (pi, param) in layer.iter_mut().enumerate() {
                let g = grads[li][pi].data();
                let m = self.m[li][pi].data_mut();
                let v = self.v[li][pi].data_mut();
                let p = param.data_mut();
                for i in 0..p.len() {
                    m[i] = b1 * m[i] + b1c * g[i];
                    v[i] = b2 * v[i] + b2c * g[i] * g[i];
                    p[i] = p[i] - lr * m[i] / (v[i].sqrt() + eps);
                }
            }
        }
    }
}

/// Huber loss value at residual `d` with threshold 1.
pub fn huber<S: Real>(d: S) -> S {
    let a = d.abs();
    if a <= S::ONE {
        S::from_f64(0.5) * d * d
    } else {
        a - S::from_f64(0.5)
    }
}

/// Derivative of [`huber`]: the residual clipped to [-1, 1].
pub fn huber_grad<S: Real>(d: S) -> S {
    if d > S::ONE {
        S::ONE
    } else if d < -S::ONE {
        -S::ONE
    } else {
        d
    }
}

/// One training sample: an input and the output entries it supervises.
/// Each target is (flat output index, target value); only those entries
/// contribute to the loss.
pub struct MaskedSample<S: Real> {
    pub input: Tensor<S>,
    pub targets: Vec<(usize, S)>,
}

/// Masked Huber regression over a batch followed by one optimizer update.
/// Loss is the mean Huber value over all masked entries in the batch.
pub fn train_step<S: Real>(
    net: &mut Network<S>,
    batch: &[MaskedSample<S>],
    opt: &mut Adam<S>,
) -> Result<f64, NnError> {
    let count: usize = batch.iter().map(|s| s.targets.len()).sum();
    if count == 0 {
        return Ok(0.0);
    }
    let scale = S::from_f64(1.0 / count as f64);
    let mut grads = net.zero_grads();
    let mut loss = 0.0f64;
    for sample in batch {
        let cache = net.forward_cached(&sample.input)?;
        let mut grad_out = Tensor::zeros(cache.output.shape());
        for &(idx, target) in &sample.targets {
            if !target.is_finite() {
                return Err(NnError::Diverged);
            }
            let d = cache.output.data()[idx] - target;
            loss += huber(d).to_f64();
            grad_out.data_mut()[idx] = huber_grad(d) * scale;
        }
        net.backward(&cache, &grad_out, &mut grads);
    }
    if grads
        .iter()
        .any(|layer| layer.iter().any(|t| !t.all_finite()))
    {
        return Err(NnError::Diverged);
    }
    opt.apply(net, &grads);
    Ok(loss / count as f64)
}
