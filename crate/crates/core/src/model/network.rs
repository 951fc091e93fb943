//! Compact 3D CNN mapping the stacked view ROIs to relevance scores in (0, 1).
//!
//! Stages: 3×3×3 convolutions with stride 2 and zero padding 1, each followed
//! by ReLU; global average pooling; one dense layer; sigmoid.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::real::{sigmoid, Real};
use super::Parameters;
use crate::error::{Error, Result};

const KERNEL: usize = 3;
const TAPS: usize = KERNEL * KERNEL * KERNEL;

/// Output extent of a stride-2, padding-1, kernel-3 convolution.
pub fn conv_out_dims(dims: [usize; 3]) -> [usize; 3] {
    dims.map(|n| (n - 1) / 2 + 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conv3d<R> {
    pub in_channels: usize,
    pub out_channels: usize,
    /// `[out][in][kz][ky][kx]`.
    pub weight: Vec<R>,
    pub bias: Vec<R>,
}

impl<R: Real> Conv3d<R> {
    pub fn zeros(in_channels: usize, out_channels: usize) -> Self {
        Self {
            in_channels,
            out_channels,
            weight: vec![R::zero(); out_channels * in_channels * TAPS],
            bias: vec![R::zero(); out_channels],
        }
    }

    fn forward(&self, input: &[R], dims: [usize; 3]) -> (Vec<R>, [usize; 3]) {
        let od = conv_out_dims(dims);
        let [d, h, w] = dims;
        let out_vox = od[0] * od[1] * od[2];
        let mut out = vec![R::zero(); self.out_channels * out_vox];
        for oc in 0..self.out_channels {
            let plane = &mut out[oc * out_vox..(oc + 1) * out_vox];
            plane.iter_mut().for_each(|v| *v = self.bias[oc]);
            for ic in 0..self.in_channels {
                let src = &input[ic * d * h * w..(ic + 1) * d * h * w];
                let kern = &self.weight[(oc * self.in_channels + ic) * TAPS..][..TAPS];
                for_each_tap(dims, od, |o, i, t| plane[o] += kern[t] * src[i]);
            }
        }
        (out, od)
    }

    /// Accumulates parameter gradients into `grad` and returns the input gradient.
    fn backward(&self, input: &[R], dims: [usize; 3], grad_out: &[R], grad: &mut Conv3d<R>) -> Vec<R> {
        let od = conv_out_dims(dims);
        let in_vox = dims[0] * dims[1] * dims[2];
        let out_vox = od[0] * od[1] * od[2];
        let mut grad_in = vec![R::zero(); self.in_channels * in_vox];
        for oc in 0..self.out_channels {
            let g = &grad_out[oc * out_vox..(oc + 1) * out_vox];
            grad.bias[oc] += g.iter().copied().sum::<R>();
            for ic in 0..self.in_channels {
                let src = &input[ic * in_vox..(ic + 1) * in_vox];
                let base = (oc * self.in_channels + ic) * TAPS;
                let kern = &self.weight[base..base + TAPS];
                let gk = &mut grad.weight[base..base + TAPS];
                let gi = &mut grad_in[ic * in_vox..(ic + 1) * in_vox];
                for_each_tap(dims, od, |o, i, t| {
                    gk[t] += g[o] * src[i];
                    gi[i] += g[o] * kern[t];
                });
            }
        }
        grad_in
    }
}

/// Calls `f(out_index, in_index, tap)` for every in-bounds kernel tap.
#[inline]
fn for_each_tap(dims: [usize; 3], od: [usize; 3], mut f: impl FnMut(usize, usize, usize)) {
    let [d, h, w] = dims;
    for oz in 0..od[0] {
        for kz in 0..KERNEL {
            let Some(iz) = (2 * oz + kz).checked_sub(1).filter(|&z| z < d) else { continue };
            for oy in 0..od[1] {
                for ky in 0..KERNEL {
                    let Some(iy) = (2 * oy + ky).checked_sub(1).filter(|&y| y < h) else { continue };
                    for ox in 0..od[2] {
                        let o = (oz * od[1] + oy) * od[2] + ox;
                        for kx in 0..KERNEL {
                            let Some(ix) = (2 * ox + kx).checked_sub(1).filter(|&x| x < w) else { continue };
                            f(o, (iz * h + iy) * w + ix, (kz * KERNEL + ky) * KERNEL + kx);
                        }
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense<R> {
    pub inputs: usize,
    pub outputs: usize,
    /// Row-major `[output][input]`.
    pub weight: Vec<R>,
    pub bias: Vec<R>,
}

impl<R: Real> Dense<R> {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self { inputs, outputs, weight: vec![R::zero(); inputs * outputs], bias: vec![R::zero(); outputs] }
    }
}

/// Intermediate activations of one forward pass, kept for backpropagation.
#[derive(Debug, Clone)]
pub struct NetworkTrace<R> {
    /// Post-ReLU output of each stage, preceded by the input.
    pub activations: Vec<Vec<R>>,
    pub dims: Vec<[usize; 3]>,
    pub pooled: Vec<R>,
    pub relevance: Vec<R>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightingNetwork<R> {
    pub input_dims: [usize; 3],
    pub convs: Vec<Conv3d<R>>,
    pub dense: Dense<R>,
}

impl<R: Real> WeightingNetwork<R> {
    /// All-zero parameters. `channels` lists the input channel count followed
    /// by each stage's width, e.g. `[3, 8, 16, 32]`.
    pub fn zeros(input_dims: [usize; 3], channels: &[usize], outputs: usize) -> Result<Self> {
        if channels.len() < 2 || channels.contains(&0) || input_dims.contains(&0) {
            return Err(Error::InvalidConfig("network needs an input and at least one stage".into()));
        }
        let convs = channels.windows(2).map(|w| Conv3d::zeros(w[0], w[1])).collect();
        let last = *channels.last().unwrap_or(&1);
        Ok(Self { input_dims, convs, dense: Dense::zeros(last, outputs) })
    }

    /// Conv weights uniform in ±1/√fan_in; dense weights uniform in
    /// ±dense_scale/√fan_in (0 starts every relevance at 0.5); zero biases.
    pub fn init<G: Rng + ?Sized>(
        input_dims: [usize; 3],
        channels: &[usize],
        outputs: usize,
        dense_scale: f64,
        rng: &mut G,
    ) -> Result<Self> {
        let mut net = Self::zeros(input_dims, channels, outputs)?;
        for conv in &mut net.convs {
            let bound = 1.0 / libm::sqrt((conv.in_channels * TAPS) as f64);
            conv.weight.iter_mut().for_each(|w| *w = R::of(rng.random_range(-bound..bound)));
        }
        let bound = dense_scale / libm::sqrt(net.dense.inputs as f64);
        if bound > 0.0 {
            net.dense.weight.iter_mut().for_each(|w| *w = R::of(rng.random_range(-bound..bound)));
        }
        Ok(net)
    }

    pub fn input_channels(&self) -> usize {
        self.convs[0].in_channels
    }

    pub fn outputs(&self) -> usize {
        self.dense.outputs
    }

    pub fn input_len(&self) -> usize {
        self.input_channels() * self.input_dims.iter().product::<usize>()
    }

    pub fn forward_trace(&self, input: &[R]) -> Result<NetworkTrace<R>> {
        if input.len() != self.input_len() {
            return Err(Error::LengthMismatch { expected: self.input_len(), actual: input.len() });
        }
        let mut activations = vec![input.to_vec()];
        let mut dims = vec![self.input_dims];
        for (stage, conv) in self.convs.iter().enumerate() {
            let (mut out, od) = conv.forward(&activations[stage], dims[stage]);
            out.iter_mut().for_each(|v| *v = v.max(R::zero()));
            if out.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { layer: CONV_LAYERS[stage.min(CONV_LAYERS.len() - 1)] });
            }
            activations.push(out);
            dims.push(od);
        }
        let last = activations.last().map(Vec::as_slice).unwrap_or(&[]);
        let vox = dims.last().map(|d| d.iter().product::<usize>()).unwrap_or(1);
        let inv = R::one() / R::of(vox as f64);
        let pooled: Vec<R> = last.chunks(vox).map(|c| c.iter().copied().sum::<R>() * inv).collect();
        let relevance: Vec<R> = (0..self.dense.outputs)
            .map(|o| {
                let row = &self.dense.weight[o * self.dense.inputs..(o + 1) * self.dense.inputs];
                sigmoid(self.dense.bias[o] + row.iter().zip(&pooled).map(|(&w, &h)| w * h).sum::<R>())
            })
            .collect();
        if relevance.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { layer: "dense" });
        }
        Ok(NetworkTrace { activations, dims, pooled, relevance })
    }

    /// q = G(x).
    pub fn forward(&self, input: &[R]) -> Result<Vec<R>> {
        Ok(self.forward_trace(input)?.relevance)
    }

    /// Backpropagates dL/dq through the sigmoid, dense layer, pooling and
    /// convolution stages, accumulating into `grad`.
    pub fn backward(&self, trace: &NetworkTrace<R>, grad_relevance: &[R], grad: &mut WeightingNetwork<R>) {
        let inputs = self.dense.inputs;
        let mut grad_pooled = vec![R::zero(); inputs];
        for o in 0..self.dense.outputs {
            let q = trace.relevance[o];
            let gu = grad_relevance[o] * q * (R::one() - q);
            if gu == R::zero() {
                continue;
            }
            grad.dense.bias[o] += gu;
            let row = &self.dense.weight[o * inputs..(o + 1) * inputs];
            let grow = &mut grad.dense.weight[o * inputs..(o + 1) * inputs];
            for c in 0..inputs {
                grow[c] += gu * trace.pooled[c];
                grad_pooled[c] += gu * row[c];
            }
        }
        let stages = self.convs.len();
        let vox = trace.dims[stages].iter().product::<usize>();
        let inv = R::one() / R::of(vox as f64);
        let mut grad_act: Vec<R> = (0..inputs * vox).map(|i| grad_pooled[i / vox] * inv).collect();
        for stage in (0..stages).rev() {
            // ReLU: gradient passes where the stage output is positive.
            let out = &trace.activations[stage + 1];
            grad_act.iter_mut().zip(out).for_each(|(g, &a)| {
                if a <= R::zero() {
                    *g = R::zero();
                }
            });
            grad_act =
                self.convs[stage].backward(&trace.activations[stage], trace.dims[stage], &grad_act, &mut grad.convs[stage]);
        }
    }

    /// Same parameters in another scalar type.
    pub fn cast<S: Real>(&self) -> WeightingNetwork<S> {
        let conv = |c: &Conv3d<R>| Conv3d {
            in_channels: c.in_channels,
            out_channels: c.out_channels,
            weight: cast_slice(&c.weight),
            bias: cast_slice(&c.bias),
        };
        WeightingNetwork {
            input_dims: self.input_dims,
            convs: self.convs.iter().map(conv).collect(),
            dense: Dense {
                inputs: self.dense.inputs,
                outputs: self.dense.outputs,
                weight: cast_slice(&self.dense.weight),
                bias: cast_slice(&self.dense.bias),
            },
        }
    }

    /// Same architecture with every parameter zero.
    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.blocks_mut().into_iter().for_each(|b| b.iter_mut().for_each(|v| *v = R::zero()));
        z
    }
}

pub(crate) fn cast_slice<R: Real, S: Real>(v: &[R]) -> Vec<S> {
    v.iter().map(|x| S::of(x.as_f64())).collect()
}

const CONV_LAYERS: [&str; 6] = ["conv1", "conv2", "conv3", "conv4", "conv5", "conv6+"];

impl<R> Parameters<R> for WeightingNetwork<R> {
    fn blocks(&self) -> Vec<&[R]> {
        let mut out: Vec<&[R]> = Vec::new();
        for c in &self.convs {
            out.push(&c.weight);
            out.push(&c.bias);
        }
        out.push(&self.dense.weight);
        out.push(&self.dense.bias);
        out
    }

    fn blocks_mut(&mut self) -> Vec<&mut [R]> {
        let mut out: Vec<&mut [R]> = Vec::new();
        for c in &mut self.convs {
            out.push(&mut c.weight);
            out.push(&mut c.bias);
        }
        out.push(&mut self.dense.weight);
        out.push(&mut self.dense.bias);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn output_dims_halve() {
        assert_eq!(conv_out_dims([8, 14, 24]), [4, 7, 12]);
        assert_eq!(conv_out_dims([1, 2, 3]), [1, 1, 2]);
    }

    #[test]
    fn zero_parameters_give_half() {
        let net = WeightingNetwork::<f64>::zeros([4, 8, 8], &[3, 8, 16, 32], 330).unwrap();
        let q = net.forward(&vec![0.3; 3 * 256]).unwrap();
        assert_eq!(q.len(), 330);
        assert!(q.iter().all(|&v| v == 0.5));
    }

    #[test]
    fn bias_shift_moves_one_output() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut net = WeightingNetwork::<f64>::init([4, 8, 8], &[3, 4, 4], 10, 1.0, &mut rng).unwrap();
        let x: Vec<f64> = (0..3 * 256).map(|i| ((i * 37) % 11) as f64 / 11.0 - 0.5).collect();
        let trace = net.forward_trace(&x).unwrap();
        let base = trace.relevance.clone();
        net.dense.bias[4] += 0.7;
        let moved = net.forward(&x).unwrap();
        for (i, (&a, &b)) in base.iter().zip(&moved).enumerate() {
            if i == 4 {
                let row = &net.dense.weight[4 * 4..5 * 4];
                let z = row.iter().zip(&trace.pooled).map(|(w, h)| w * h).sum::<f64>() + 0.7;
                assert!((b - sigmoid(z)).abs() < 1e-15);
            } else {
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn wrong_input_length() {
        let net = WeightingNetwork::<f32>::zeros([2, 2, 2], &[3, 2], 4).unwrap();
        assert!(matches!(net.forward(&[0.0; 5]), Err(Error::LengthMismatch { .. })));
    }
}
