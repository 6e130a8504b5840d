//! Layer kinds and their forward/backward kernels.
//!
//! Convolutions are lowered to im2col + a small GEMM whose inner loop runs
//! over contiguous rows, which is what the autovectorizer wants.

use serde::{Deserialize, Serialize};

use super::scalar::Real;
use super::tensor::Tensor;
use super::NnError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LayerSpec {
    Dense {
        input: usize,
        output: usize,
    },
    Conv2d {
        in_ch: usize,
        out_ch: usize,
        kernel: usize,
        stride: usize,
        pad: usize,
    },
    Relu,
    /// Nearest-neighbor upsampling by an integer factor.
    Upsample {
        factor: usize,
    },
}

impl std::fmt::Display for LayerSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LayerSpec::Dense { input, output } => write!(f, "dense({input}->{output})"),
            LayerSpec::Conv2d {
                in_ch,
                out_ch,
                kernel,
                stride,
                pad,
            } => write!(f, "conv({in_ch}->{out_ch},{kernel}x{kernel},s{stride},p{pad})"),
            LayerSpec::Relu => write!(f, "relu"),
            LayerSpec::Upsample { factor } => write!(f, "upsample(x{factor})"),
        }
    }
}

impl LayerSpec {
    /// Output shape for a given input shape, or an error when incompatible.
    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>, NnError> {
        match *self {
            LayerSpec::Dense { input: ni, output } => {
                if input != [ni] {
                    return Err(NnError::ShapeMismatch {
                        expected: vec![ni],
                        found: input.to_vec(),
                    });
                }
                Ok(vec![output])
            }
            LayerSpec::Conv2d {
                in_ch,
                out_ch,
                kernel,
                stride,
                pad,
            } => {
                let [c, h, w] = *input else {
                    return Err(NnError::ShapeMismatch {
                        expected: vec![in_ch, 0, 0],
                        found: input.to_vec(),
                    });
                };
                if c != in_ch || h + 2 * pad < kernel || w + 2 * pad < kernel {
                    return Err(NnError::ShapeMismatch {
                        expected: vec![in_ch, kernel, kernel],
                        found: input.to_vec(),
                    });
                }
                let oh = (h + 2 * pad - kernel) / stride + 1;
                let ow = (w + 2 * pad - kernel) / stride + 1;
                Ok(vec![out_ch, oh, ow])
            }
            LayerSpec::Relu => Ok(input.to_vec()),
            LayerSpec::Upsample { factor } => {
                let [c, h, w] = *input else {
                    return Err(NnError::ShapeMismatch {
                        expected: vec![0, 0, 0],
                        found: input.to_vec(),
                    });
                };
                Ok(vec![c, h * factor, w * factor])
            }
        }
    }

    /// Shapes of this layer's parameter tensors (weights then bias).
    pub fn param_shapes(&self) -> Vec<Vec<usize>> {
        match *self {
            LayerSpec::Dense { input, output } => vec![vec![output, input], vec![output]],
            LayerSpec::Conv2d {
                in_ch,
                out_ch,
                kernel,
                ..
            } => vec![vec![out_ch, in_ch, kernel, kernel], vec![out_ch]],
            LayerSpec::Relu | LayerSpec::Upsample { .. } => vec![],
        }
    }

    /// Fan-in used for init scaling.
    pub fn fan_in(&self) -> usize {
        match *self {
            LayerSpec::Dense { input, .. } => input,
            LayerSpec::Conv2d { in_ch, kernel, .. } => in_ch * kernel * kernel,
            _ => 0,
        }
    }
}

// ---------------------------------------------------------------------------
// GEMM kernels
// ---------------------------------------------------------------------------

/// c_row += av * b_row, the shared vector kernel.
#[inline]
fn axpy<S: Real>(av: S, b_row: &[S], c_row: &mut [S]) {
    for (c, &b) in c_row.iter_mut().zip(b_row) {
        *c += av * b;
    }
}

/// c += a * b for row-major a (m x k), b (k x n), c (m x n).
fn gemm<S: Real>(m: usize, k: usize, n: usize, a: &[S], b: &[S], c: &mut [S]) {
    for i in 0..m {
        let a_row = &a[i * k..(i + 1) * k];
        let c_row = &mut c[i * n..(i + 1) * n];
        for (kk, &av) in a_row.iter().enumerate() {
            axpy(av, &b[kk * n..(kk + 1) * n], c_row);
        }
    }
}

/// c += a * b^T for row-major a (m x k), b (n x k), c (m x n).
fn gemm_nt<S: Real>(m: usize, k: usize, n: usize, a: &[S], b: &[S], c: &mut [S]) {
    for i in 0..m {
        let a_row = &a[i * k..(i + 1) * k];
        for j in 0..n {
            let b_row = &b[j * k..(j + 1) * k];
            let mut acc = S::ZERO;
            for (&av, &bv) in a_row.iter().zip(b_row) {
                acc += av * bv;
            }
            c[i * n + j] += acc;
        }
    }
}

/// c += a^T * b for row-major a (k x m), b (k x n), c (m x n).
fn gemm_tn<S: Real>(m: usize, k: usize, n: usize, a: &[S], b: &[S], c: &mut [S]) {
    for kk in 0..k {
        let a_row = &a[kk * m..(kk + 1) * m];
        let b_row = &b[kk * n..(kk + 1) * n];
        for (i, &av) in a_row.iter().enumerate() {
            axpy(av, b_row, &mut c[i * n..(i + 1) * n]);
        }
    }
}

// ---------------------------------------------------------------------------
// im2col
// ---------------------------------------------------------------------------

struct ConvGeom {
    in_ch: usize,
    h: usize,
    w: usize,
    kernel: usize,
    stride: usize,
    pad: usize,
    oh: usize,
    ow: usize,
}

impl ConvGeom {
    fn new(spec: &LayerSpec, input_shape: &[usize]) -> Self {
        let LayerSpec::Conv2d {
            in_ch,
            kernel,
            stride,
            pad,
            ..
        } = *spec
        else {
            unreachable!()
        };
        let (h, w) = (input_shape[1], input_shape[2]);
        ConvGeom {
            in_ch,
            h,
            w,
            kernel,
            stride,
            pad,
            oh: (h + 2 * pad - kernel) / stride + 1,
            ow: (w + 2 * pad - kernel) / stride + 1,
        }
    }

    fn col_rows(&self) -> usize {
        self.in_ch * self.kernel * self.kernel
    }

    fn col_len(&self) -> usize {
        self.col_rows() * self.oh * self.ow
    }

    fn phases_len(&self) -> usize {
        if self.stride == 2 {
            2 * self.in_ch * self.h * self.w.div_ceil(2)
        } else {
            0
        }
    }
}

fn im2col<S: Real>(g: &ConvGeom, input: &[S], col: &mut [S], phases: &mut [S]) {
    let plane = g.oh * g.ow;
    // Valid ox range for a kernel column: 0 <= ox*stride + kx - pad < w.
    let ox_range = |kx: usize| -> (usize, usize) {
        let lo = if kx < g.pad {
            (g.pad - kx).div_ceil(g.stride)
        } else {
            0
        };
        let hi_excl = (g.w + g.pad - kx).div_ceil(g.stride).min(g.ow);
        (lo.min(g.ow), hi_excl.max(lo.min(g.ow)))
    };
    // Stride 2 reads become contiguous copies of even/odd column phases.
    let phase_len = g.w.div_ceil(2);
    if g.stride == 2 {
        for c in 0..g.in_ch {
            for iy in 0..g.h {
                let src = &input[(c * g.h + iy) * g.w..(c * g.h + iy + 1) * g.w];
                let base = (c * g.h + iy) * phase_len;
                let (even, odd) = phases.split_at_mut(g.in_ch * g.h * phase_len);
                for (j, pair) in src.chunks(2).enumerate() {
                    even[base + j] = pair[0];
                    if pair.len() == 2 {
                        odd[base + j] = pair[1];
                    }
                }
            }
        }
    }
    for c in 0..g.in_ch {
        let in_plane = &input[c * g.h * g.w..(c + 1) * g.h * g.w];
        for ky in 0..g.kernel {
            for kx in 0..g.kernel {
                let row_idx = (c * g.kernel + ky) * g.kernel + kx;
                let out_row = &mut col[row_idx * plane..(row_idx + 1) * plane];
                let (lo, hi) = ox_range(kx);
                for oy in 0..g.oh {
                    let iy = (oy * g.stride + ky) as isize - g.pad as isize;
                    let dst = &mut out_row[oy * g.ow..(oy + 1) * g.ow];
                    if iy < 0 || iy >= g.h as isize {
                        dst.iter_mut().for_each(|v| *v = S::ZERO);
                        continue;
                    }
                    let iy = iy as usize;
                    dst[..lo].iter_mut().for_each(|v| *v = S::ZERO);
                    dst[hi..].iter_mut().for_each(|v| *v = S::ZERO);
                    if lo >= hi {
                        continue;
                    }
                    let ix0 = lo * g.stride + kx - g.pad;
                    if g.stride == 1 {
                        let src_row = &in_plane[iy * g.w..(iy + 1) * g.w];
                        dst[lo..hi].copy_from_slice(&src_row[ix0..ix0 + (hi - lo)]);
                    } else if g.stride == 2 {
                        let parity = ix0 & 1;
                        let j0 = ix0 >> 1;
                        let base = (parity * g.in_ch * g.h + c * g.h + iy) * phase_len + j0;
                        dst[lo..hi].copy_from_slice(&phases[base..base + (hi - lo)]);
                    } else {
                        let src_row = &in_plane[iy * g.w..(iy + 1) * g.w];
                        let mut ix = ix0;
                        for d in dst[lo..hi].iter_mut() {
                            *d = src_row[ix];
                            ix += g.stride;
                        }
                    }
                }
            }
        }
    }
}

fn col2im<S: Real>(g: &ConvGeom, col: &[S], input_grad: &mut [S]) {
    let plane = g.oh * g.ow;
    for c in 0..g.in_ch {
        let in_plane = &mut input_grad[c * g.h * g.w..(c + 1) * g.h * g.w];
        for ky in 0..g.kernel {
            for kx in 0..g.kernel {
                let row_idx = (c * g.kernel + ky) * g.kernel + kx;
                let src_row = &col[row_idx * plane..(row_idx + 1) * plane];
                for oy in 0..g.oh {
                    let iy = (oy * g.stride + ky) as isize - g.pad as isize;
                    if iy < 0 || iy >= g.h as isize {
                        continue;
                    }
                    let dst = &mut in_plane[iy as usize * g.w..(iy as usize + 1) * g.w];
                    for ox in 0..g.ow {
                        let ix = (ox * g.stride + kx) as isize - g.pad as isize;
                        if ix >= 0 && (ix as usize) < g.w {
                            dst[ix as usize] += src_row[oy * g.ow + ox];
                        }
                    }
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Forward / backward
// ---------------------------------------------------------------------------

/// Forward pass that may reuse the input's storage for layers that preserve
/// shape. The policy-inference path burns most of its time allocating and
/// faulting fresh hundred-kilobyte buffers otherwise.
pub(super) fn forward_owned<S: Real>(
    spec: &LayerSpec,
    params: &[Tensor<S>],
    input: Tensor<S>,
) -> Result<Tensor<S>, NnError> {
    if matches!(spec, LayerSpec::Relu) {
        let mut t = input;
        for v in t.data_mut() {
            *v = v.maximum(S::ZERO);
        }
        return Ok(t);
    }
    forward(spec, params, &input)
}

pub(super) fn forward<S: Real>(
    spec: &LayerSpec,
    params: &[Tensor<S>],
    input: &Tensor<S>,
) -> Result<Tensor<S>, NnError> {
    let out_shape = spec.output_shape(input.shape())?;
    let mut out = Tensor::zeros(&out_shape);
    match *spec {
        LayerSpec::Dense { input: ni, output } => {
            let w = params[0].data();
            let b = params[1].data();
            let x = input.data();
            let y = out.data_mut();
            for o in 0..output {
                let w_row = &w[o * ni..(o + 1) * ni];
                let mut acc = b[o];
                for i in 0..ni {
                    acc += w_row[i] * x[i];
                }
                y[o] = acc;
            }
        }
        LayerSpec::Conv2d { out_ch, .. } => {
            let g = ConvGeom::new(spec, input.shape());
            let plane = g.oh * g.ow;
            S::with_scratch(g.col_len() + g.phases_len(), |buf| {
                let (col, phases) = buf.split_at_mut(g.col_len());
                im2col(&g, input.data(), col, phases);
                gemm(
                    out_ch,
                    g.col_rows(),
                    plane,
                    params[0].data(),
                    col,
                    out.data_mut(),
                );
            });
            for (oc, &bias) in params[1].data().iter().enumerate().take(out_ch) {
                for v in &mut out.data_mut()[oc * plane..(oc + 1) * plane] {
                    *v += bias;
                }
            }
        }
        LayerSpec::Relu => {
            out = Tensor::from_vec(
                &out_shape,
                input.data().iter().map(|&x| x.maximum(S::ZERO)).collect(),
            )?;
        }
        LayerSpec::Upsample { factor } => {
            let [c, h, w] = *input.shape() else { unreachable!() };
            let (oh, ow) = (h * factor, w * factor);
            let x = input.data();
            let y = out.data_mut();
            for ch in 0..c {
                for sy in 0..h {
                    let src = &x[(ch * h + sy) * w..(ch * h + sy + 1) * w];
                    for ry in 0..factor {
                        let iy = sy * factor + ry;
                        let dst = &mut y[(ch * oh + iy) * ow..(ch * oh + iy + 1) * ow];
                        for (sx, &v) in src.iter().enumerate() {
                            dst[sx * factor..(sx + 1) * factor]
                                .iter_mut()
                                .for_each(|d| *d = v);
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Returns (parameter gradients, input gradient). Parameter gradients are
/// accumulated into `param_grads`, which must match the layer's param shapes.
pub(super) fn backward<S: Real>(
    spec: &LayerSpec,
    params: &[Tensor<S>],
    input: &Tensor<S>,
    grad_out: &Tensor<S>,
    param_grads: &mut [Tensor<S>],
) -> Tensor<S> {
    let mut grad_in = Tensor::zeros(input.shape());
    match *spec {
        LayerSpec::Dense { input: ni, output } => {
            let w = params[0].data();
            let x = input.data();
            let dy = grad_out.data();
            {
                let dw = param_grads[0].data_mut();
                for o in 0..output {
                    let g = dy[o];
                    let dw_row = &mut dw[o * ni..(o + 1) * ni];
                    for i in 0..ni {
                        dw_row[i] += g * x[i];
                    }
                }
            }
            {
                let db = param_grads[1].data_mut();
                for o in 0..output {
                    db[o] += dy[o];
                }
            }
            let dx = grad_in.data_mut();
            for o in 0..output {
                let g = dy[o];
                let w_row = &w[o * ni..(o + 1) * ni];
                for i in 0..ni {
                    dx[i] += g * w_row[i];
                }
            }
        }
        LayerSpec::Conv2d { out_ch, .. } => {
            let g = ConvGeom::new(spec, input.shape());
            let plane = g.oh * g.ow;
            let rows = g.col_rows();
            S::with_scratch(2 * g.col_len() + g.phases_len(), |buf| {
                let (col, rest) = buf.split_at_mut(g.col_len());
                let (dcol, phases) = rest.split_at_mut(g.col_len());
                im2col(&g, input.data(), col, phases);
                // dW += dY * col^T
                gemm_nt(
                    out_ch,
                    plane,
                    rows,
                    grad_out.data(),
                    col,
                    param_grads[0].data_mut(),
                );
                // dcol = W^T * dY, then scatter back to the input grid
                dcol.iter_mut().for_each(|v| *v = S::ZERO);
                gemm_tn(rows, out_ch, plane, params[0].data(), grad_out.data(), dcol);
                col2im(&g, dcol, grad_in.data_mut());
            });
            // db += row sums of dY
            for (oc, db) in param_grads[1].data_mut().iter_mut().enumerate().take(out_ch) {
                let mut acc = S::ZERO;
                for v in &grad_out.data()[oc * plane..(oc + 1) * plane] {
                    acc += *v;
                }
                *db += acc;
            }
        }
        LayerSpec::Relu => {
            for ((dx, &x), &dy) in grad_in
                .data_mut()
                .iter_mut()
                .zip(input.data())
                .zip(grad_out.data())
            {
                *dx = if x > S::ZERO { dy } else { S::ZERO };
            }
        }
        LayerSpec::Upsample { factor } => {
            let [c, h, w] = *input.shape() else { unreachable!() };
            let (oh, ow) = (h * factor, w * factor);
            let dy = grad_out.data();
            let dx = grad_in.data_mut();
            for ch in 0..c {
                for sy in 0..h {
                    let dst = &mut dx[(ch * h + sy) * w..(ch * h + sy + 1) * w];
                    for ry in 0..factor {
                        let iy = sy * factor + ry;
                        let src = &dy[(ch * oh + iy) * ow..(ch * oh + iy + 1) * ow];
                        for (sx, d) in dst.iter_mut().enumerate() {
                            for &v in &src[sx * factor..(sx + 1) * factor] {
                                *d += v;
                            }
                        }
                    }
                }
            }
        }
    }
    grad_in
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conv_output_shape() {
        let spec = LayerSpec::Conv2d {
            in_ch: 2,
            out_ch: 8,
            kernel: 3,
            stride: 2,
            pad: 1,
        };
        assert_eq!(spec.output_shape(&[2, 64, 64]).unwrap(), vec![8, 32, 32]);
        assert!(spec.output_shape(&[3, 64, 64]).is_err());
    }

    #[test]
    fn identity_one_by_one_conv_passes_input_through() {
        let spec = LayerSpec::Conv2d {
            in_ch: 1,
            out_ch: 1,
            kernel: 1,
            stride: 1,
            pad: 0,
        };
        let w = Tensor::from_vec(&[1, 1, 1, 1], vec![1.0f64]).unwrap();
        let b = Tensor::zeros(&[1]);
        let x = Tensor::from_vec(&[1, 3, 3], (0..9).map(f64::from).collect()).unwrap();
        let y = forward(&spec, &[w, b], &x).unwrap();
        assert_eq!(y.data(), x.data());
    }

    #[test]
    fn upsample_backward_sums_blocks() {
        let spec = LayerSpec::Upsample { factor: 2 };
        let x = Tensor::<f64>::zeros(&[1, 2, 2]);
        let dy = Tensor::from_vec(&[1, 4, 4], vec![1.0; 16]).unwrap();
        let dx = backward(&spec, &[], &x, &dy, &mut []);
        assert!(dx.data().iter().all(|&v| (v - 4.0).abs() < 1e-12));
    }
}

#[doc(hidden)]
pub mod bench_hooks {
    use super::*;

    pub fn im2col_s2(input: &[f32], col: &mut [f32]) {
        let g = ConvGeom {
            in_ch: 8,
            h: 64,
            w: 64,
            kernel: 3,
            stride: 2,
            pad: 1,
            oh: 32,
            ow: 32,
        };
        im2col(&g, input, col, &mut []);
    }

    pub fn gemm_f32(m: usize, k: usize, n: usize, a: &[f32], b: &[f32], c: &mut [f32]) {
        gemm(m, k, n, a, b, c);
    }
}
