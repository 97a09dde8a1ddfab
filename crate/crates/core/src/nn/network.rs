//! Two-headed convolutional policy/value network with hand-written
//! backpropagation.
//!
//! Layout: two 3x3 same-padding convolutions with ReLU, two dense ReLU layers
//! with dropout, then a softmax policy head over the move space and a tanh
//! value head. Activations are stored position-major, channel-minor, so a
//! convolution is an im2col copy followed by one matrix product.

use std::fmt;

use rand::distributions::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::game::{GameKind, GameState};
use crate::mcts::{Evaluation, Evaluator};

pub trait Scalar: num_traits::Float + num_traits::FromPrimitive + Default + Send + Sync + fmt::Debug + 'static {
    /// `C = alpha * A B + beta * C` with explicit strides.
    ///
    /// # Safety
    /// Every element the sizes and strides address must lie inside the
    /// buffers behind `a`, `b` and `c`.
    #[allow(clippy::too_many_arguments)]
    unsafe fn gemm(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: *const Self,
        rsa: isize,
        csa: isize,
        b: *const Self,
        rsb: isize,
        csb: isize,
        beta: Self,
        c: *mut Self,
        rsc: isize,
        csc: isize,
    );

    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("representable")
    }

    fn f64(self) -> f64 {
        self.to_f64().expect("finite cast")
    }
}

impl Scalar for f32 {
    unsafe fn gemm(
        m: usize,
        k: usize,
        n: usize,
        alpha: f32,
        a: *const f32,
        rsa: isize,
        csa: isize,
        b: *const f32,
        rsb: isize,
        csb: isize,
        beta: f32,
        c: *mut f32,
        rsc: isize,
        csc: isize,
    ) {
        matrixmultiply::sgemm(m, k, n, alpha, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc)
    }
}

impl Scalar for f64 {
    unsafe fn gemm(
        m: usize,
        k: usize,
        n: usize,
        alpha: f64,
        a: *const f64,
        rsa: isize,
        csa: isize,
        b: *const f64,
        rsb: isize,
        csb: isize,
        beta: f64,
        c: *mut f64,
        rsc: isize,
        csc: isize,
    ) {
        matrixmultiply::dgemm(m, k, n, alpha, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc)
    }
}

/// `C (m x n) = op(A) op(B)`, or `C += op(A) op(B)` when `accumulate`.
/// Row-major storage; a transposed operand is stored as its transpose.
#[allow(clippy::too_many_arguments)]
pub(crate) fn matmul<T: Scalar>(
    m: usize,
    k: usize,
    n: usize,
    a: &[T],
    a_t: bool,
    b: &[T],
    b_t: bool,
    c: &mut [T],
    accumulate: bool,
) {
    assert_eq!(a.len(), m * k);
    assert_eq!(b.len(), k * n);
    assert_eq!(c.len(), m * n);
    if m == 0 || n == 0 {
        return;
    }
    let (rsa, csa) = if a_t { (1, m as isize) } else { (k as isize, 1) };
    let (rsb, csb) = if b_t { (1, k as isize) } else { (n as isize, 1) };
    let beta = if accumulate { T::one() } else { T::zero() };
    // SAFETY: the asserts above bound every index the strides can reach.
    unsafe {
        T::gemm(
            m,
            k,
            n,
            T::one(),
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

pub const CONV1_W: usize = 0;
pub const CONV1_B: usize = 1;
pub const CONV2_W: usize = 2;
pub const CONV2_B: usize = 3;
pub const FC1_W: usize = 4;
pub const FC1_B: usize = 5;
pub const FC2_W: usize = 6;
pub const FC2_B: usize = 7;
pub const POLICY_W: usize = 8;
pub const POLICY_B: usize = 9;
pub const VALUE_W: usize = 10;
pub const VALUE_B: usize = 11;
pub const NUM_TENSORS: usize = 12;

pub const TENSOR_NAMES: [&str; NUM_TENSORS] = [
    "conv1.weight",
    "conv1.bias",
    "conv2.weight",
    "conv2.bias",
    "fc1.weight",
    "fc1.bias",
    "fc2.weight",
    "fc2.bias",
    "policy.weight",
    "policy.bias",
    "value.weight",
    "value.bias",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NetShape {
    pub kind: GameKind,
    pub size: usize,
    pub channels: usize,
    pub hidden: usize,
}

impl NetShape {
    pub const CHANNELS: usize = 64;
    pub const HIDDEN: usize = 128;

    /// The standard architecture for a game and board size.
    pub fn new(kind: GameKind, size: usize) -> Self {
        NetShape {
            kind,
            size,
            channels: Self::CHANNELS,
            hidden: Self::HIDDEN,
        }
    }

    pub fn with_widths(kind: GameKind, size: usize, channels: usize, hidden: usize) -> Self {
        NetShape {
            kind,
            size,
            channels,
            hidden,
        }
    }

    pub fn positions(&self) -> usize {
        self.size * self.size
    }

    pub fn action_size(&self) -> usize {
        self.kind.action_size(self.size)
    }

    /// `(rows, cols)` of every tensor in declaration order; biases have one row.
    pub fn tensor_shapes(&self) -> [(usize, usize); NUM_TENSORS] {
        let c = self.channels;
        let h = self.hidden;
        [
            (9, c),
            (1, c),
            (9 * c, c),
            (1, c),
            (c * self.positions(), h),
            (1, h),
            (h, h),
            (1, h),
            (h, self.action_size()),
            (1, self.action_size()),
            (h, 1),
            (1, 1),
        ]
    }

    pub fn describe(&self) -> String {
        let c = self.channels;
        let h = self.hidden;
        format!(
            "{}:{}|conv3x3:1->{c}|conv3x3:{c}->{c}|fc:{}->{h}|fc:{h}->{h}|policy:{h}->{}|value:{h}->1|tanh",
            self.kind,
            self.size,
            c * self.positions(),
            self.action_size()
        )
    }

    /// Stable 64-bit digest of the architecture description.
    pub fn hash(&self) -> u64 {
        let digest = Sha256::digest(self.describe().as_bytes());
        u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub policy: Vec<f64>,
    pub value: f64,
}

#[derive(Clone, PartialEq)]
pub struct Network<T: Scalar> {
    shape: NetShape,
    params: Vec<Vec<T>>,
}

impl<T: Scalar> fmt::Debug for Network<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Network({}, {} params)", self.shape.describe(), self.num_params())
    }
}

pub type Model = Network<f32>;

/// Inputs and targets for a minibatch, flattened row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Batch<T> {
    pub len: usize,
    pub inputs: Vec<T>,
    pub pis: Vec<T>,
    pub zs: Vec<T>,
}

/// Dropout for one forward pass: masks are drawn from `seed`, so the same
/// spec always produces the same masks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dropout {
    pub rate: f64,
    pub seed: u64,
}

pub(crate) const LOG_FLOOR: f64 = 1e-12;

struct Activations<T> {
    cols1: Vec<T>,
    h1: Vec<T>,
    cols2: Vec<T>,
    h2: Vec<T>,
    a3: Vec<T>,
    mask3: Vec<T>,
    d3: Vec<T>,
    a4: Vec<T>,
    mask4: Vec<T>,
    d4: Vec<T>,
    log_p: Vec<T>,
    v: Vec<T>,
}

impl<T: Scalar> Network<T> {
    /// Fresh parameters: He-uniform for ReLU layers, Glorot-uniform for the
    /// heads, zero biases.
    pub fn new<R: Rng + ?Sized>(shape: NetShape, rng: &mut R) -> Self {
        let shapes = shape.tensor_shapes();
        let params = shapes
            .iter()
            .enumerate()
            .map(|(i, &(rows, cols))| {
                if i % 2 == 1 {
                    return vec![T::zero(); rows * cols];
                }
                let bound = if i >= POLICY_W {
                    (6.0 / (rows + cols) as f64).sqrt()
                } else {
                    (6.0 / rows as f64).sqrt()
                };
                let dist = Uniform::new_inclusive(-bound, bound);
                (0..rows * cols).map(|_| T::of(dist.sample(rng))).collect()
            })
            .collect();
        Network { shape, params }
    }

    pub fn seeded(shape: NetShape, seed: u64) -> Self {
        Self::new(shape, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn from_params(shape: NetShape, params: Vec<Vec<T>>) -> Result<Self> {
        let shapes = shape.tensor_shapes();
        if params.len() != NUM_TENSORS {
            return Err(Error::Shape(format!(
                "expected {NUM_TENSORS} tensors, got {}",
                params.len()
            )));
        }
        for (i, (p, (r, c))) in params.iter().zip(shapes).enumerate() {
            if p.len() != r * c {
                return Err(Error::Shape(format!(
                    "{} has {} values, expected {}",
                    TENSOR_NAMES[i],
                    p.len(),
                    r * c
                )));
            }
        }
        Ok(Network { shape, params })
    }

    pub fn shape(&self) -> &NetShape {
        &self.shape
    }

    pub fn params(&self) -> &[Vec<T>] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Vec<T>] {
        &mut self.params
    }

    pub fn num_params(&self) -> usize {
        self.params.iter().map(Vec::len).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().flatten().all(|x| x.is_finite())
    }

    /// Inference on one encoded position (dropout off).
    pub fn predict(&self, input: &[f32]) -> Result<Prediction> {
        if input.len() != self.shape.positions() {
            return Err(Error::Shape(format!(
                "input has {} cells, network expects {}",
                input.len(),
                self.shape.positions()
            )));
        }
        let inputs: Vec<T> = input.iter().map(|&x| T::of(x as f64)).collect();
        let act = self.forward(1, &inputs, None);
        Ok(Prediction {
            policy: act.log_p.iter().map(|lp| lp.f64().exp()).collect(),
            value: act.v[0].f64(),
        })
    }

    /// Inference on a batch of encoded positions.
    pub fn predict_batch(&self, inputs: &[T], len: usize) -> Vec<Prediction> {
        let a = self.shape.action_size();
        let act = self.forward(len, inputs, None);
        (0..len)
            .map(|b| Prediction {
                policy: act.log_p[b * a..(b + 1) * a].iter().map(|lp| lp.f64().exp()).collect(),
                value: act.v[b].f64(),
            })
            .collect()
    }

    /// Mean loss over a batch without dropout.
    pub fn batch_loss(&self, batch: &Batch<T>) -> f64 {
        let act = self.forward(batch.len, &batch.inputs, None);
        self.loss_terms(batch, &act).0
    }

    /// Mean batch loss and its gradient with respect to every parameter.
    pub fn loss_and_grad(&self, batch: &Batch<T>, dropout: Option<Dropout>) -> (f64, Vec<Vec<T>>) {
        let act = self.forward(batch.len, &batch.inputs, dropout);
        let (loss, dlogits, dv) = self.loss_terms(batch, &act);
        (loss, self.backward(batch.len, &act, &dlogits, &dv))
    }

    fn loss_terms(&self, batch: &Batch<T>, act: &Activations<T>) -> (f64, Vec<T>, Vec<T>) {
        let a = self.shape.action_size();
        let bsz = batch.len;
        let inv_b = T::of(1.0 / bsz as f64);
        let floor = T::of(LOG_FLOOR.ln());
        let mut loss = 0.0;
        let mut dlogits = vec![T::zero(); bsz * a];
        let mut dv = vec![T::zero(); bsz];
        for b in 0..bsz {
            let v = act.v[b];
            let z = batch.zs[b];
            let mut l = (v - z) * (v - z);
            dv[b] = T::of(2.0) * (v - z) * inv_b;
            let lp = &act.log_p[b * a..(b + 1) * a];
            let pi = &batch.pis[b * a..(b + 1) * a];
            let mut unclamped_mass = T::zero();
            for j in 0..a {
                if lp[j] > floor {
                    l = l - pi[j] * lp[j];
                    unclamped_mass = unclamped_mass + pi[j];
                } else {
                    l = l - pi[j] * floor;
                }
            }
            for j in 0..a {
                let p = lp[j].exp();
                let own = if lp[j] > floor { pi[j] } else { T::zero() };
                dlogits[b * a + j] = (p * unclamped_mass - own) * inv_b;
            }
            loss += l.f64();
        }
        (loss / bsz as f64, dlogits, dv)
    }

    fn forward(&self, bsz: usize, inputs: &[T], dropout: Option<Dropout>) -> Activations<T> {
        let NetShape {
            size,
            channels: ch,
            hidden: h,
            ..
        } = self.shape;
        let pos = size * size;
        let a = self.shape.action_size();
        let p = &self.params;
        assert_eq!(inputs.len(), bsz * pos);

        let cols1 = im2col(inputs, bsz, size, 1);
        let mut h1 = vec![T::zero(); bsz * pos * ch];
        matmul(bsz * pos, 9, ch, &cols1, false, &p[CONV1_W], false, &mut h1, false);
        add_bias_relu(&mut h1, &p[CONV1_B], true);

        let cols2 = im2col(&h1, bsz, size, ch);
        let mut h2 = vec![T::zero(); bsz * pos * ch];
        matmul(bsz * pos, 9 * ch, ch, &cols2, false, &p[CONV2_W], false, &mut h2, false);
        add_bias_relu(&mut h2, &p[CONV2_B], true);

        let mut rng = dropout.map(|d| ChaCha8Rng::seed_from_u64(d.seed));
        let rate = dropout.map_or(0.0, |d| d.rate);

        let mut a3 = vec![T::zero(); bsz * h];
        matmul(bsz, pos * ch, h, &h2, false, &p[FC1_W], false, &mut a3, false);
        add_bias_relu(&mut a3, &p[FC1_B], true);
        let mask3 = dropout_mask(bsz * h, rate, rng.as_mut());
        let d3: Vec<T> = a3.iter().zip(&mask3).map(|(&x, &m)| x * m).collect();

        let mut a4 = vec![T::zero(); bsz * h];
        matmul(bsz, h, h, &d3, false, &p[FC2_W], false, &mut a4, false);
        add_bias_relu(&mut a4, &p[FC2_B], true);
        let mask4 = dropout_mask(bsz * h, rate, rng.as_mut());
        let d4: Vec<T> = a4.iter().zip(&mask4).map(|(&x, &m)| x * m).collect();

        let mut logits = vec![T::zero(); bsz * a];
        matmul(bsz, h, a, &d4, false, &p[POLICY_W], false, &mut logits, false);
        add_bias_relu(&mut logits, &p[POLICY_B], false);
        for row in logits.chunks_mut(a) {
            log_softmax_in_place(row);
        }

        let mut v = vec![T::zero(); bsz];
        matmul(bsz, h, 1, &d4, false, &p[VALUE_W], false, &mut v, false);
        for x in &mut v {
            *x = (*x + p[VALUE_B][0]).tanh();
        }

        Activations {
            cols1,
            h1,
            cols2,
            h2,
            a3,
            mask3,
            d3,
            a4,
            mask4,
            d4,
            log_p: logits,
            v,
        }
    }

    fn backward(&self, bsz: usize, act: &Activations<T>, dlogits: &[T], dv: &[T]) -> Vec<Vec<T>> {
        let NetShape {
            size,
            channels: ch,
            hidden: h,
            ..
        } = self.shape;
        let pos = size * size;
        let a = self.shape.action_size();
        let p = &self.params;
        let mut g: Vec<Vec<T>> = p.iter().map(|t| vec![T::zero(); t.len()]).collect();

        let dvz: Vec<T> = dv.iter().zip(&act.v).map(|(&d, &v)| d * (T::one() - v * v)).collect();

        matmul(h, bsz, a, &act.d4, true, dlogits, false, &mut g[POLICY_W], false);
        column_sums(dlogits, a, &mut g[POLICY_B]);
        matmul(h, bsz, 1, &act.d4, true, &dvz, false, &mut g[VALUE_W], false);
        g[VALUE_B][0] = dvz.iter().fold(T::zero(), |s, &x| s + x);

        let mut dd4 = vec![T::zero(); bsz * h];
        matmul(bsz, a, h, dlogits, false, &p[POLICY_W], true, &mut dd4, false);
        matmul(bsz, 1, h, &dvz, false, &p[VALUE_W], true, &mut dd4, true);
        let dz4: Vec<T> = dd4
            .iter()
            .zip(&act.mask4)
            .zip(&act.a4)
            .map(|((&d, &m), &x)| if x > T::zero() { d * m } else { T::zero() })
            .collect();

        matmul(h, bsz, h, &act.d3, true, &dz4, false, &mut g[FC2_W], false);
        column_sums(&dz4, h, &mut g[FC2_B]);

        let mut dd3 = vec![T::zero(); bsz * h];
        matmul(bsz, h, h, &dz4, false, &p[FC2_W], true, &mut dd3, false);
        let dz3: Vec<T> = dd3
            .iter()
            .zip(&act.mask3)
            .zip(&act.a3)
            .map(|((&d, &m), &x)| if x > T::zero() { d * m } else { T::zero() })
            .collect();

        let flat = pos * ch;
        matmul(flat, bsz, h, &act.h2, true, &dz3, false, &mut g[FC1_W], false);
        column_sums(&dz3, h, &mut g[FC1_B]);

        let mut dz2 = vec![T::zero(); bsz * flat];
        matmul(bsz, h, flat, &dz3, false, &p[FC1_W], true, &mut dz2, false);
        relu_backward(&mut dz2, &act.h2);

        let rows = bsz * pos;
        matmul(9 * ch, rows, ch, &act.cols2, true, &dz2, false, &mut g[CONV2_W], false);
        column_sums(&dz2, ch, &mut g[CONV2_B]);

        let mut dcols2 = vec![T::zero(); rows * 9 * ch];
        matmul(rows, ch, 9 * ch, &dz2, false, &p[CONV2_W], true, &mut dcols2, false);
        let mut dz1 = col2im(&dcols2, bsz, size, ch);
        relu_backward(&mut dz1, &act.h1);

        matmul(9, rows, ch, &act.cols1, true, &dz1, false, &mut g[CONV1_W], false);
        column_sums(&dz1, ch, &mut g[CONV1_B]);
        g
    }
}

impl Evaluator for Model {
    fn evaluate(&self, state: &GameState) -> Result<Evaluation> {
        let pred = self.predict(&state.encode().to_f32())?;
        Ok(Evaluation {
            policy: pred.policy,
            value: pred.value,
        })
    }
}

fn add_bias_relu<T: Scalar>(x: &mut [T], bias: &[T], relu: bool) {
    for row in x.chunks_mut(bias.len()) {
        for (v, &b) in row.iter_mut().zip(bias) {
            *v = *v + b;
            if relu && *v < T::zero() {
                *v = T::zero();
            }
        }
    }
}

fn relu_backward<T: Scalar>(grad: &mut [T], out: &[T]) {
    for (g, &o) in grad.iter_mut().zip(out) {
        if o <= T::zero() {
            *g = T::zero();
        }
    }
}

fn column_sums<T: Scalar>(x: &[T], width: usize, out: &mut [T]) {
    out.iter_mut().for_each(|o| *o = T::zero());
    for row in x.chunks(width) {
        for (o, &v) in out.iter_mut().zip(row) {
            *o = *o + v;
        }
    }
}

fn log_softmax_in_place<T: Scalar>(row: &mut [T]) {
    let max = row.iter().copied().fold(T::neg_infinity(), T::max);
    let sum = row.iter().fold(T::zero(), |s, &x| s + (x - max).exp());
    let lse = max + sum.ln();
    row.iter_mut().for_each(|x| *x = *x - lse);
}

fn dropout_mask<T: Scalar>(len: usize, rate: f64, rng: Option<&mut ChaCha8Rng>) -> Vec<T> {
    match rng {
        Some(rng) if rate > 0.0 => {
            let keep = T::of(1.0 / (1.0 - rate));
            (0..len)
                .map(|_| if rng.gen::<f64>() < rate { T::zero() } else { keep })
                .collect()
        }
        _ => vec![T::one(); len],
    }
}

/// Unfolds 3x3 same-padded neighbourhoods: one row per (sample, position),
/// `9 * channels` columns ordered (kernel row, kernel col, channel).
fn im2col<T: Scalar>(x: &[T], bsz: usize, n: usize, ch: usize) -> Vec<T> {
    let pos = n * n;
    let width = 9 * ch;
    let mut cols = vec![T::zero(); bsz * pos * width];
    for b in 0..bsz {
        for r in 0..n {
            for c in 0..n {
                let row = (b * pos + r * n + c) * width;
                for kr in 0..3 {
                    let rr = r as isize + kr as isize - 1;
                    if rr < 0 || rr >= n as isize {
                        continue;
                    }
                    for kc in 0..3 {
                        let cc = c as isize + kc as isize - 1;
                        if cc < 0 || cc >= n as isize {
                            continue;
                        }
                        let src = (b * pos + rr as usize * n + cc as usize) * ch;
                        let dst = row + (kr * 3 + kc) * ch;
                        cols[dst..dst + ch].copy_from_slice(&x[src..src + ch]);
                    }
                }
            }
        }
    }
    cols
}

/// Adjoint of [`im2col`].
fn col2im<T: Scalar>(cols: &[T], bsz: usize, n: usize, ch: usize) -> Vec<T> {
    let pos = n * n;
    let width = 9 * ch;
    let mut x = vec![T::zero(); bsz * pos * ch];
    for b in 0..bsz {
        for r in 0..n {
            for c in 0..n {
                let row = (b * pos + r * n + c) * width;
                for kr in 0..3 {
                    let rr = r as isize + kr as isize - 1;
                    if rr < 0 || rr >= n as isize {
                        continue;
                    }
                    for kc in 0..3 {
                        let cc = c as isize + kc as isize - 1;
                        if cc < 0 || cc >= n as isize {
                            continue;
                        }
                        let dst = (b * pos + rr as usize * n + cc as usize) * ch;
                        let src = row + (kr * 3 + kc) * ch;
                        for i in 0..ch {
                            x[dst + i] = x[dst + i] + cols[src + i];
                        }
                    }
                }
            }
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_transposes() {
        // A = [[1,2,3],[4,5,6]], B = [[1,0],[0,1],[1,1]]
        let a = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let b = [1.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let mut c = [0.0f64; 4];
        matmul(2, 3, 2, &a, false, &b, false, &mut c, false);
        assert_eq!(c, [4.0, 5.0, 10.0, 11.0]);
        // Aᵀ stored as 3x2.
        let at = [1.0, 4.0, 2.0, 5.0, 3.0, 6.0];
        let bt = [1.0, 0.0, 1.0, 0.0, 1.0, 1.0];
        let mut c2 = [0.0f64; 4];
        matmul(2, 3, 2, &at, true, &bt, true, &mut c2, false);
        assert_eq!(c2, c);
        matmul(2, 3, 2, &a, false, &b, false, &mut c2, true);
        assert_eq!(c2, [8.0, 10.0, 20.0, 22.0]);
    }

    #[test]
    fn col2im_is_adjoint_of_im2col() {
        let (bsz, n, ch) = (2, 3, 2);
        let x: Vec<f64> = (0..bsz * n * n * ch).map(|i| (i as f64 * 0.37).sin()).collect();
        let y: Vec<f64> = (0..bsz * n * n * 9 * ch).map(|i| (i as f64 * 0.11).cos()).collect();
        let lhs: f64 = im2col(&x, bsz, n, ch).iter().zip(&y).map(|(a, b)| a * b).sum();
        let rhs: f64 = x.iter().zip(col2im(&y, bsz, n, ch)).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn architecture_hash_depends_on_game_and_size() {
        let a = NetShape::new(GameKind::Othello, 6);
        let b = NetShape::new(GameKind::Gobang, 6);
        let c = NetShape::new(GameKind::Othello, 8);
        assert_ne!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash(), NetShape::new(GameKind::Othello, 6).hash());
    }

    #[test]
    fn predict_rejects_wrong_shape() {
        let net = Model::seeded(NetShape::with_widths(GameKind::Gobang, 4, 2, 3), 0);
        assert!(matches!(net.predict(&[0.0; 9]), Err(Error::Shape(_))));
    }
}
