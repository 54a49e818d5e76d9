//! Analytic gradients vs central finite differences, in double precision.
//!
//! Each check returns the worst relative error it saw, over input and
//! parameter gradients, on several random shapes up to 6x6.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exec::Exec;
use crate::layers::*;
use crate::tensor::Tensor;

const H: f64 = 1e-5;
/// Largest acceptable relative error.
pub const TOLERANCE: f64 = 1e-6;

/// |a - n| / max(|a|, |n|, 1e-2): relative, with a floor so gradients that are
/// zero up to rounding are compared absolutely.
fn rel_err(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(1e-2)
}

fn loss_of(layer: &mut Layer<f64>, x: &Tensor<f64>, r: &[f64], mode: Mode) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut pass = Pass { mode, rng: &mut rng, exec: Exec::Sequential };
    let y = layer.forward(x, &mut pass).unwrap();
    y.data().iter().zip(r).map(|(a, b)| a * b).sum()
}

fn param_slots(layer: &mut Layer<f64>) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut out = Vec::new();
    layer.visit_params(&mut |p, g| out.push((p.to_vec(), g.to_vec())));
    out
}

fn set_param(layer: &mut Layer<f64>, slot: usize, idx: usize, value: f64) {
    let mut s = 0;
    layer.visit_params(&mut |p, _| {
        if s == slot {
            p[idx] = value;
        }
        s += 1;
    });
}

/// Worst relative error over input and parameter gradients of one layer,
/// for the scalar loss `sum(r * forward(x))` with a random `r`.
fn check(layer: &mut Layer<f64>, x: Tensor<f64>, mode: Mode, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fwd_rng = ChaCha8Rng::seed_from_u64(99);
    let y = layer
        .forward(&x, &mut Pass { mode, rng: &mut fwd_rng, exec: Exec::Sequential })
        .unwrap();
    let r: Vec<f64> = (0..y.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let dx = layer.backward(&Tensor::from_vec(y.shape(), r.clone()).unwrap(), Exec::Sequential).unwrap();
    let slots = param_slots(layer);

    let mut worst = 0.0f64;
    let mut xp = x.clone();
    for i in 0..x.len() {
        let v = x.data()[i];
        xp.data_mut()[i] = v + H;
        let lp = loss_of(layer, &xp, &r, mode);
        xp.data_mut()[i] = v - H;
        let lm = loss_of(layer, &xp, &r, mode);
        xp.data_mut()[i] = v;
        worst = worst.max(rel_err(dx.data()[i], (lp - lm) / (2.0 * H)));
    }
    for (s, (params, grads)) in slots.iter().enumerate() {
        for j in 0..params.len() {
            set_param(layer, s, j, params[j] + H);
            let lp = loss_of(layer, &x, &r, mode);
            set_param(layer, s, j, params[j] - H);
            let lm = loss_of(layer, &x, &r, mode);
            set_param(layer, s, j, params[j]);
            worst = worst.max(rel_err(grads[j], (lp - lm) / (2.0 * H)));
        }
    }
    worst
}

fn random_tensor(shape: &[usize], rng: &mut ChaCha8Rng) -> Tensor<f64> {
    let n = shape.iter().product();
    Tensor::from_vec(shape, (0..n).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap()
}

/// Values bounded away from zero so ReLU kinks are never crossed.
fn away_from_zero(shape: &[usize], rng: &mut ChaCha8Rng) -> Tensor<f64> {
    random_tensor(shape, rng).map(|v| if v >= 0.0 { v + 0.01 } else { v - 0.01 })
}

/// Distinct values at least 0.01 apart so max-pool argmaxes are stable.
fn distinct(shape: &[usize], rng: &mut ChaCha8Rng) -> Tensor<f64> {
    let n: usize = shape.iter().product();
    let mut vals: Vec<f64> = (0..n).map(|i| i as f64 * 0.05 - 1.0).collect();
    for i in (1..n).rev() {
        vals.swap(i, rng.random_range(0..=i));
    }
    Tensor::from_vec(shape, vals).unwrap()
}

fn shapes(rng: &mut ChaCha8Rng) -> Vec<(usize, usize, usize, usize)> {
    (0..4)
        .map(|_| (rng.random_range(2..=3), rng.random_range(1..=3), rng.random_range(2..=6), rng.random_range(2..=6)))
        .collect()
}

pub fn conv2d() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for (b, c, h, w) in shapes(&mut rng) {
        let out = rng.random_range(1..=3);
        let mut layer = Layer::Conv(Conv2d::new(c, out, 3, &mut rng));
        if let Layer::Conv(l) = &mut layer {
            l.bias.iter_mut().for_each(|v| *v = rng.random_range(-0.5..0.5));
        }
        let x = random_tensor(&[b, c, h, w], &mut rng);
        worst = worst.max(check(&mut layer, x, Mode::Train, 10));
    }
    worst
}

pub fn batchnorm() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for (b, c, h, w) in shapes(&mut rng) {
        let mut bn = BatchNorm::new(c);
        bn.gamma.iter_mut().for_each(|v| *v = rng.random_range(0.5..1.5));
        bn.beta.iter_mut().for_each(|v| *v = rng.random_range(-0.5..0.5));
        let mut layer = Layer::BatchNorm(bn);
        let x = random_tensor(&[b, c, h, w], &mut rng);
        worst = worst.max(check(&mut layer, x, Mode::Train, 11));
    }
    let mut layer = Layer::BatchNorm(BatchNorm::new(4));
    let x = random_tensor(&[5, 4], &mut rng);
    worst.max(check(&mut layer, x, Mode::Train, 12))
}

pub fn dense() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..4 {
        let (b, f, o) = (rng.random_range(1..=6), rng.random_range(1..=6), rng.random_range(1..=6));
        let mut layer = Layer::Dense(Dense::new(f, o, &mut rng));
        let x = random_tensor(&[b, f], &mut rng);
        worst = worst.max(check(&mut layer, x, Mode::Train, 13));
    }
    worst
}

pub fn relu() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for (b, c, h, w) in shapes(&mut rng) {
        let mut layer = Layer::Relu(Relu::default());
        let x = away_from_zero(&[b, c, h, w], &mut rng);
        worst = worst.max(check(&mut layer, x, Mode::Train, 14));
    }
    worst
}

pub fn maxpool() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for (b, c, h, w) in shapes(&mut rng) {
        let mut layer = Layer::MaxPool(MaxPool2d::new(2));
        let x = distinct(&[b, c, h, w], &mut rng);
        worst = worst.max(check(&mut layer, x, Mode::Train, 15));
    }
    worst
}

pub fn dropout() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for (b, c, h, w) in shapes(&mut rng) {
        let mut layer = Layer::Dropout(Dropout::new(0.5));
        let x = random_tensor(&[b, c, h, w], &mut rng);
        worst = worst.max(check(&mut layer, x, Mode::Train, 16));
    }
    worst
}

pub fn flatten() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut layer = Layer::Flatten(Flatten::default());
    let x = random_tensor(&[2, 3, 4, 5], &mut rng);
    check(&mut layer, x, Mode::Train, 17)
}

pub fn softmax_ce() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for _ in 0..4 {
        let (b, k) = (rng.random_range(1..=6), rng.random_range(2..=6));
        let logits = random_tensor(&[b, k], &mut rng);
        let labels: Vec<usize> = (0..b).map(|_| rng.random_range(0..k)).collect();
        let (_, grad, _) = softmax_cross_entropy(&logits, &labels).unwrap();
        let mut lp = logits.clone();
        for i in 0..logits.len() {
            let v = logits.data()[i];
            lp.data_mut()[i] = v + H;
            let (a, _, _) = softmax_cross_entropy(&lp, &labels).unwrap();
            lp.data_mut()[i] = v - H;
            let (m, _, _) = softmax_cross_entropy(&lp, &labels).unwrap();
            lp.data_mut()[i] = v;
            worst = worst.max(rel_err(grad.data()[i], (a - m) / (2.0 * H)));
        }
    }
    worst
}

/// A conv -> bn -> flatten -> dense stack under softmax cross-entropy,
/// input gradient checked end to end.
pub fn stacked_network() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut layers: Vec<Layer<f64>> = vec![
        Layer::Conv(Conv2d::new(1, 2, 3, &mut rng)),
        Layer::BatchNorm(BatchNorm::new(2)),
        Layer::Flatten(Flatten::default()),
        Layer::Dense(Dense::new(2 * 4 * 4, 2, &mut rng)),
    ];
    let x = random_tensor(&[3, 1, 4, 4], &mut rng);
    let labels = [0usize, 1, 1];
    let run = |layers: &mut Vec<Layer<f64>>, x: &Tensor<f64>| {
        let mut r = ChaCha8Rng::seed_from_u64(0);
        let mut pass = Pass { mode: Mode::Train, rng: &mut r, exec: Exec::Sequential };
        let mut a = x.clone();
        for l in layers.iter_mut() {
            a = l.forward(&a, &mut pass).unwrap();
        }
        softmax_cross_entropy(&a, &labels).unwrap()
    };
    let (_, mut g, _) = run(&mut layers, &x);
    for l in layers.iter_mut().rev() {
        g = l.backward(&g, Exec::Sequential).unwrap();
    }
    let mut worst = 0.0f64;
    let mut xp = x.clone();
    for i in 0..x.len() {
        let v = x.data()[i];
        xp.data_mut()[i] = v + H;
        let (a, _, _) = run(&mut layers, &xp);
        xp.data_mut()[i] = v - H;
        let (m, _, _) = run(&mut layers, &xp);
        xp.data_mut()[i] = v;
        worst = worst.max(rel_err(g.data()[i], (a - m) / (2.0 * H)));
    }
    worst
}

/// Every check, by name.
pub fn run_all() -> Vec<(&'static str, f64)> {
    vec![
        ("conv2d", conv2d()),
        ("batchnorm", batchnorm()),
        ("dense", dense()),
        ("relu", relu()),
        ("maxpool", maxpool()),
        ("dropout", dropout()),
        ("flatten", flatten()),
        ("softmax_ce", softmax_ce()),
        ("stacked", stacked_network()),
    ]
}
