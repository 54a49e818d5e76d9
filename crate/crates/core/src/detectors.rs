//! The two jamming detectors: a lightweight CNN on spectrogram images and a
//! PCA + linear SVM baseline.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use satjam_ml::layers::{BatchNorm, Conv2d, Dense, Dropout, Flatten, MaxPool2d, Pass, Relu};
use satjam_ml::{
    softmax_cross_entropy, AdamConfig, AdamState, Exec, Layer, Mode, ModelParams, NamedTensor, PcaModel, SvmConfig,
    SvmModel, Tensor,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::features::IMAGE_SIZE;
use crate::seed;

pub const N_CLASSES: usize = 2;
/// Images per inference batch.
const PREDICT_CHUNK: usize = 32;
/// Scale applied to the Glorot-uniform init of the logit layer, so the
/// softmax starts near uniform.
pub const HEAD_INIT_GAIN: f32 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "layer", rename_all = "kebab-case")]
pub enum LayerSpec {
    /// Stride 1, same padding.
    Conv { filters: usize, kernel: usize },
    BatchNorm,
    Relu,
    MaxPool { size: usize },
    Dropout { p: f64 },
    Flatten,
    Dense { units: usize },
}

/// Declarative CNN. The softmax head is implied by the loss and by
/// prediction; the last layer must produce [`N_CLASSES`] logits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CnnArch {
    /// `[channels, height, width]`
    pub input: [usize; 3],
    pub layers: Vec<LayerSpec>,
}

impl CnnArch {
    /// Three conv blocks (8, 16, 32 filters) with batch norm, ReLU and 2x2
    /// pooling, dropout, then a 60-unit hidden layer and the 2-way head.
    pub fn reference() -> Self {
        use LayerSpec::*;
        let mut layers = Vec::new();
        for filters in [8, 16, 32] {
            layers.extend([Conv { filters, kernel: 3 }, BatchNorm, Relu, MaxPool { size: 2 }]);
        }
        layers.extend([Dropout { p: 0.5 }, Flatten, Dense { units: 60 }, Relu, Dense { units: N_CLASSES }]);
        CnnArch { input: [1, IMAGE_SIZE, IMAGE_SIZE], layers }
    }

    pub fn input_len(&self) -> usize {
        self.input.iter().product()
    }

    /// Per-sample output shape of every layer.
    pub fn shapes(&self) -> Result<Vec<Vec<usize>>> {
        let bad = |i: usize, why: String| Error::Config(format!("layer {i}: {why}"));
        if self.input.iter().any(|&d| d == 0) {
            return Err(Error::Config(format!("empty input shape {:?}", self.input)));
        }
        let mut shape = self.input.to_vec();
        let mut out = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate() {
            shape = match *layer {
                LayerSpec::Conv { filters, kernel } => {
                    if shape.len() != 3 {
                        return Err(bad(i, "conv needs a [c, h, w] input".into()));
                    }
                    if kernel != 3 || filters == 0 {
                        return Err(bad(i, format!("conv must be 3x3 with filters > 0, got {kernel}x{kernel}/{filters}")));
                    }
                    vec![filters, shape[1], shape[2]]
                }
                LayerSpec::MaxPool { size } => {
                    if shape.len() != 3 || size == 0 || shape[1] < size || shape[2] < size {
                        return Err(bad(i, format!("cannot pool {shape:?} by {size}")));
                    }
                    vec![shape[0], shape[1] / size, shape[2] / size]
                }
                LayerSpec::Dropout { p } => {
                    if !(0.0..1.0).contains(&p) {
                        return Err(bad(i, format!("dropout probability {p} outside [0, 1)")));
                    }
                    shape
                }
                LayerSpec::Flatten => vec![shape.iter().product()],
                LayerSpec::Dense { units } => {
                    if shape.len() != 1 || units == 0 {
                        return Err(bad(i, "dense needs a flat input and units > 0".into()));
                    }
                    vec![units]
                }
                LayerSpec::BatchNorm | LayerSpec::Relu => shape,
            };
            out.push(shape.clone());
        }
        if shape != [N_CLASSES] {
            return Err(Error::Config(format!("network output {shape:?}, expected [{N_CLASSES}]")));
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        self.shapes().map(|_| ())
    }

    /// Trainable parameter count.
    pub fn param_count(&self) -> Result<usize> {
        let shapes = self.shapes()?;
        let mut prev = self.input.to_vec();
        let mut total = 0;
        for (layer, shape) in self.layers.iter().zip(shapes) {
            total += match *layer {
                LayerSpec::Conv { filters, kernel } => filters * (prev[0] * kernel * kernel + 1),
                LayerSpec::BatchNorm => 2 * prev[0],
                LayerSpec::Dense { units } => units * (prev[0] + 1),
                _ => 0,
            };
            prev = shape;
        }
        Ok(total)
    }

    fn build(&self, rng: &mut ChaCha8Rng) -> Result<Vec<Layer<f32>>> {
        let shapes = self.shapes()?;
        let mut prev = self.input.to_vec();
        let mut layers = Vec::with_capacity(self.layers.len());
        for (spec, shape) in self.layers.iter().zip(shapes) {
            layers.push(match *spec {
                LayerSpec::Conv { filters, kernel } => Layer::Conv(Conv2d::new(prev[0], filters, kernel, rng)),
                LayerSpec::BatchNorm => Layer::BatchNorm(BatchNorm::new(prev[0])),
                LayerSpec::Relu => Layer::Relu(Relu::default()),
                LayerSpec::MaxPool { size } => Layer::MaxPool(MaxPool2d::new(size)),
                LayerSpec::Dropout { p } => Layer::Dropout(Dropout::new(p)),
                LayerSpec::Flatten => Layer::Flatten(Flatten::default()),
                LayerSpec::Dense { units } => Layer::Dense(Dense::new(prev[0], units, rng)),
            });
            prev = shape;
        }
        if let Some(Layer::Dense(head)) = layers.last_mut() {
            head.weight.iter_mut().for_each(|w| *w *= HEAD_INIT_GAIN);
        }
        Ok(layers)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Share of the training set held out for model selection.
    pub val_fraction: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let adam = AdamConfig::default();
        TrainConfig {
            lr: adam.lr,
            beta1: adam.beta1,
            beta2: adam.beta2,
            eps: adam.eps,
            batch_size: 40,
            epochs: 50,
            val_fraction: 0.1,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn adam(&self) -> AdamConfig {
        AdamConfig { lr: self.lr, beta1: self.beta1, beta2: self.beta2, eps: self.eps }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size < 2 {
            return Err(Error::Config("batch size must be at least 2 for batch norm".into()));
        }
        if self.epochs == 0 {
            return Err(Error::Config("need at least one epoch".into()));
        }
        if !(self.lr > 0.0) || !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) || !(self.eps > 0.0) {
            return Err(Error::Config("Adam needs lr > 0, betas in [0, 1) and eps > 0".into()));
        }
        if !(0.0..0.5).contains(&self.val_fraction) {
            return Err(Error::Config(format!("validation fraction {} outside [0, 0.5)", self.val_fraction)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    /// 1-based.
    pub epoch: usize,
    /// Mean training cross-entropy over the epoch.
    pub loss: f64,
    /// Accuracy of the training-mode forward passes.
    pub train_acc: f64,
    pub val_acc: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub epochs: Vec<EpochStats>,
    /// Epoch whose parameters were kept.
    pub best_epoch: usize,
}

impl TrainTrace {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epoch,loss,train_acc,val_acc\n");
        for e in &self.epochs {
            let val = e.val_acc.map(|v| format!("{v:.6}")).unwrap_or_default();
            s.push_str(&format!("{},{:.6},{:.6},{}\n", e.epoch, e.loss, e.train_acc, val));
        }
        s
    }
}

/// Labels and class probabilities for a batch of images.
#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub labels: Vec<u8>,
    /// Row-major `n x N_CLASSES`.
    pub probs: Vec<f32>,
}

#[derive(Clone, Debug)]
pub struct Cnn {
    pub arch: CnnArch,
    layers: Vec<Layer<f32>>,
}

impl Cnn {
    /// Freshly initialized network.
    pub fn new(arch: CnnArch, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = arch.build(&mut rng)?;
        Ok(Cnn { arch, layers })
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    fn batch_tensor(&self, pixels: &[f32], rows: &[usize]) -> Tensor<f32> {
        let len = self.arch.input_len();
        let data = rows.iter().flat_map(|&i| pixels[i * len..(i + 1) * len].iter().copied()).collect();
        let [c, h, w] = self.arch.input;
        Tensor::from_vec(&[rows.len(), c, h, w], data).expect("sized above")
    }

    fn forward(&mut self, x: &Tensor<f32>, pass: &mut Pass<'_>) -> Result<Tensor<f32>> {
        let mut a = x.clone();
        for layer in &mut self.layers {
            a = layer.forward(&a, pass)?;
        }
        Ok(a)
    }

    fn check_input(&self, pixels: &[f32]) -> Result<usize> {
        let len = self.arch.input_len();
        if pixels.len() % len != 0 {
            return Err(Error::Shape(format!("{} pixels is not a whole number of {len}-pixel images", pixels.len())));
        }
        Ok(pixels.len() / len)
    }

    /// Inference-mode prediction. Each image is processed independently, so
    /// the result does not depend on batching or on `exec`.
    pub fn predict(&self, pixels: &[f32], exec: Exec) -> Result<Prediction> {
        let n = self.check_input(pixels)?;
        let chunks: Vec<Vec<usize>> =
            (0..n).collect::<Vec<_>>().chunks(PREDICT_CHUNK).map(<[usize]>::to_vec).collect();
        let outputs = exec.map_slice(&chunks, |rows| -> Result<Vec<f32>> {
            let mut net = self.clone();
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let mut pass = Pass { mode: Mode::Infer, rng: &mut rng, exec: Exec::Sequential };
            let logits = net.forward(&net.batch_tensor(pixels, rows), &mut pass)?;
            Ok(satjam_ml::layers::softmax(&logits).into_data())
        });
        let mut probs = Vec::with_capacity(n * N_CLASSES);
        for out in outputs {
            probs.extend(out?);
        }
        let labels = probs.chunks(N_CLASSES).map(|p| argmax(p) as u8).collect();
        Ok(Prediction { labels, probs })
    }

    pub fn to_params(&self) -> ModelParams {
        let mut tensors = Vec::new();
        for (i, layer) in self.layers.iter().enumerate() {
            let kind = layer_kind(layer);
            for t in layer.tensors() {
                tensors.push(NamedTensor { name: format!("{i}.{kind}.{}", t.name), shape: t.shape, data: t.data.to_vec() });
            }
        }
        ModelParams { header: json!({ "model": "cnn", "arch": self.arch }), tensors }
    }

    pub fn from_params(params: &ModelParams) -> Result<Self> {
        expect_model(params, "cnn")?;
        let arch: CnnArch = serde_json::from_value(params.header["arch"].clone())
            .map_err(|e| Error::Config(format!("bad cnn architecture in model header: {e}")))?;
        let mut net = Cnn::new(arch, 0)?;
        let mut expected = 0;
        for (i, layer) in net.layers.iter_mut().enumerate() {
            let kind = layer_kind(layer);
            let names: Vec<&str> = layer.tensors().iter().map(|t| t.name).collect();
            for (slot, name) in layer.tensors_mut().into_iter().zip(names) {
                let full = format!("{i}.{kind}.{name}");
                let t = params.tensor(&full)?;
                if t.data.len() != slot.len() {
                    return Err(Error::Shape(format!("{full}: {} values, architecture needs {}", t.data.len(), slot.len())));
                }
                slot.copy_from_slice(&t.data);
                expected += 1;
            }
        }
        if expected != params.tensors.len() {
            return Err(Error::Shape(format!("model has {} tensors, architecture uses {expected}", params.tensors.len())));
        }
        Ok(net)
    }
}

fn layer_kind<T>(layer: &Layer<T>) -> &'static str {
    match layer {
        Layer::Conv(_) => "conv",
        Layer::BatchNorm(_) => "bn",
        Layer::Relu(_) => "relu",
        Layer::MaxPool(_) => "pool",
        Layer::Dropout(_) => "dropout",
        Layer::Flatten(_) => "flatten",
        Layer::Dense(_) => "dense",
    }
}

fn argmax(p: &[f32]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = i;
        }
    }
    best
}

fn check_labels(labels: &[u8], pixels: usize, len: usize) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::Training("empty training set".into()));
    }
    if pixels != labels.len() * len {
        return Err(Error::Shape(format!("{pixels} pixels for {} images of {len}", labels.len())));
    }
    if labels.iter().any(|&l| l as usize >= N_CLASSES) {
        return Err(Error::Shape("labels must be 0 or 1".into()));
    }
    if !(labels.contains(&0) && labels.contains(&1)) {
        return Err(Error::Training("training set needs both classes".into()));
    }
    Ok(())
}

fn accuracy(pred: &[u8], labels: &[u8]) -> f64 {
    pred.iter().zip(labels).filter(|(a, b)| a == b).count() as f64 / labels.len().max(1) as f64
}

/// Trains a CNN with Adam on softmax cross-entropy and returns the network
/// from the epoch with the best held-out accuracy (earliest on ties; the
/// last epoch when nothing is held out).
pub fn cnn_train(pixels: &[f32], labels: &[u8], arch: &CnnArch, cfg: &TrainConfig, exec: Exec) -> Result<(Cnn, TrainTrace)> {
    cfg.validate()?;
    let mut net = Cnn::new(arch.clone(), seed::derive(cfg.seed, 1, 0))?;
    check_labels(labels, pixels.len(), arch.input_len())?;
    let n = labels.len();

    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(seed::derive(cfg.seed, 2, 0));
    let mut dropout_rng = ChaCha8Rng::seed_from_u64(seed::derive(cfg.seed, 3, 0));
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut shuffle_rng);
    let mut n_val = (n as f64 * cfg.val_fraction).round() as usize;
    if n - n_val < 2 {
        n_val = 0;
    }
    let (val_rows, train_rows) = order.split_at(n_val);
    let mut train_rows = train_rows.to_vec();
    let val_pixels: Vec<f32> = net.batch_tensor(pixels, val_rows).into_data();
    let val_labels: Vec<u8> = val_rows.iter().map(|&i| labels[i]).collect();

    let mut adam = AdamState::new(cfg.adam());
    let mut trace = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(f64, usize, Vec<Layer<f32>>)> = None;
    for epoch in 1..=cfg.epochs {
        train_rows.shuffle(&mut shuffle_rng);
        let (mut loss_sum, mut correct, mut seen) = (0.0, 0usize, 0usize);
        for rows in train_rows.chunks(cfg.batch_size) {
            if rows.len() < 2 {
                continue;
            }
            let x = net.batch_tensor(pixels, rows);
            let y: Vec<usize> = rows.iter().map(|&i| labels[i] as usize).collect();
            let mut pass = Pass { mode: Mode::Train, rng: &mut dropout_rng, exec };
            let logits = net.forward(&x, &mut pass)?;
            let (loss, grad, probs) = softmax_cross_entropy(&logits, &y)?;
            if !loss.is_finite() {
                return Err(Error::Training(format!("non-finite loss at epoch {epoch}")));
            }
            let mut g = grad;
            for layer in net.layers.iter_mut().rev() {
                g = layer.backward(&g, exec)?;
            }
            adam.begin_step();
            let mut status = Ok(());
            for layer in &mut net.layers {
                layer.visit_params(&mut |p, gr| {
                    if status.is_ok() {
                        status = adam.update(p, gr);
                    }
                });
            }
            status?;
            loss_sum += loss as f64 * rows.len() as f64;
            seen += rows.len();
            correct += probs.data().chunks(N_CLASSES).zip(&y).filter(|(p, &t)| argmax(p) == t).count();
        }
        net.layers.iter_mut().for_each(Layer::clear_cache);
        let val_acc = if n_val > 0 { Some(accuracy(&net.predict(&val_pixels, exec)?.labels, &val_labels)) } else { None };
        trace.push(EpochStats {
            epoch,
            loss: loss_sum / seen.max(1) as f64,
            train_acc: correct as f64 / seen.max(1) as f64,
            val_acc,
        });
        let score = val_acc.unwrap_or(0.0);
        let improved = match &best {
            None => true,
            Some((b, _, _)) => score > *b || val_acc.is_none(),
        };
        if improved {
            best = Some((score, epoch, net.layers.clone()));
        }
    }
    let (_, best_epoch, layers) = best.expect("at least one epoch");
    net.layers = layers;
    Ok((net, TrainTrace { epochs: trace, best_epoch }))
}

pub fn cnn_train_dataset(ds: &Dataset, arch: &CnnArch, cfg: &TrainConfig, exec: Exec) -> Result<(Cnn, TrainTrace)> {
    cnn_train(&ds.pixel_matrix(), &ds.labels, arch, cfg, exec)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
#[serde(deny_unknown_fields)]
pub struct PcaSvmConfig {
    pub n_components: usize,
    pub c: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for PcaSvmConfig {
    fn default() -> Self {
        PcaSvmConfig { n_components: 45, c: 1.0, epochs: 200, seed: 0 }
    }
}

/// PCA projection followed by a linear SVM. Parameters are held at `f32`
/// precision so a saved model predicts exactly like the trained one.
#[derive(Clone, Debug, PartialEq)]
pub struct PcaSvm {
    pub pca: PcaModel,
    pub svm: SvmModel,
}

impl PcaSvm {
    pub fn dim(&self) -> usize {
        self.pca.dim
    }

    /// Signed SVM scores of the projected images.
    pub fn decide(&self, pixels: &[f32], exec: Exec) -> Result<Vec<f64>> {
        let dim = self.dim();
        if pixels.len() % dim != 0 {
            return Err(Error::Shape(format!("{} pixels is not a whole number of {dim}-pixel images", pixels.len())));
        }
        let rows: Vec<&[f32]> = pixels.chunks(dim).collect();
        Ok(exec.map_slice(&rows, |r| self.svm.decide(&self.pca.project(r))))
    }

    /// Label 1 (jammed) for non-negative scores.
    pub fn predict(&self, pixels: &[f32], exec: Exec) -> Result<Vec<u8>> {
        Ok(self.decide(pixels, exec)?.into_iter().map(|s| u8::from(s >= 0.0)).collect())
    }

    pub fn to_params(&self) -> ModelParams {
        let (k, dim) = (self.pca.n_components(), self.dim());
        let t = |name: &str, shape: Vec<usize>, data: &[f64]| NamedTensor {
            name: name.into(),
            shape,
            data: data.iter().map(|&v| v as f32).collect(),
        };
        ModelParams {
            header: json!({
                "model": "pca-svm",
                "kernel": "linear",
                "c": self.svm.c_param,
                "total_variance": self.pca.total_variance,
            }),
            tensors: vec![
                t("pca.mean", vec![dim], &self.pca.mean),
                t("pca.components", vec![k, dim], &self.pca.components),
                t("pca.explained_variance", vec![k], &self.pca.explained_variance),
                t("svm.w", vec![k], &self.svm.w),
                t("svm.b", vec![1], &[self.svm.b]),
            ],
        }
    }

    pub fn from_params(params: &ModelParams) -> Result<Self> {
        expect_model(params, "pca-svm")?;
        let get = |name: &str| -> Result<Vec<f64>> {
            Ok(params.tensor(name)?.data.iter().map(|&v| v as f64).collect())
        };
        let mean = get("pca.mean")?;
        let components = get("pca.components")?;
        let explained_variance = get("pca.explained_variance")?;
        let w = get("svm.w")?;
        let b = get("svm.b")?;
        let (dim, k) = (mean.len(), explained_variance.len());
        if dim == 0 || components.len() != k * dim || w.len() != k || b.len() != 1 {
            return Err(Error::Shape(format!(
                "inconsistent pca-svm tensors: mean {dim}, components {}, variances {k}, w {}, b {}",
                components.len(),
                w.len(),
                b.len()
            )));
        }
        let num = |key: &str| {
            params.header[key].as_f64().ok_or_else(|| Error::Config(format!("model header lacks numeric '{key}'")))
        };
        Ok(PcaSvm {
            pca: PcaModel { dim, mean, components, explained_variance, total_variance: num("total_variance")? },
            svm: SvmModel { w, b: b[0], c_param: num("c")?, kernel: satjam_ml::svm::Kernel::Linear },
        })
    }
}

/// Fits PCA on the training images only, then trains the SVM on the
/// projections.
pub fn pca_svm_train(pixels: &[f32], labels: &[u8], dim: usize, cfg: &PcaSvmConfig) -> Result<PcaSvm> {
    check_labels(labels, pixels.len(), dim)?;
    let n = labels.len();
    let pca = PcaModel::fit(pixels, n, dim, cfg.n_components)?.to_f32_precision();
    let k = pca.n_components();
    let z: Vec<f64> = pixels.chunks(dim).flat_map(|r| pca.project(r)).collect();
    let y: Vec<i8> = labels.iter().map(|&l| if l == 1 { 1 } else { -1 }).collect();
    let mut svm = SvmModel::train(&z, n, k, &y, SvmConfig { c: cfg.c, epochs: cfg.epochs, seed: cfg.seed })?;
    svm.w.iter_mut().for_each(|v| *v = *v as f32 as f64);
    svm.b = svm.b as f32 as f64;
    Ok(PcaSvm { pca, svm })
}

pub fn pca_svm_train_dataset(ds: &Dataset, cfg: &PcaSvmConfig) -> Result<PcaSvm> {
    pca_svm_train(&ds.pixel_matrix(), &ds.labels, IMAGE_SIZE * IMAGE_SIZE, cfg)
}

fn expect_model(params: &ModelParams, kind: &str) -> Result<()> {
    match params.header["model"].as_str() {
        Some(k) if k == kind => Ok(()),
        other => Err(Error::Config(format!("expected a {kind} model, file holds {other:?}"))),
    }
}

/// Either trained detector, as loaded from a model file.
#[derive(Clone, Debug)]
pub enum Detector {
    Cnn(Cnn),
    PcaSvm(PcaSvm),
}

impl Detector {
    pub fn name(&self) -> &'static str {
        match self {
            Detector::Cnn(_) => "cnn",
            Detector::PcaSvm(_) => "pca-svm",
        }
    }

    pub fn predict(&self, pixels: &[f32], exec: Exec) -> Result<Vec<u8>> {
        match self {
            Detector::Cnn(m) => Ok(m.predict(pixels, exec)?.labels),
            Detector::PcaSvm(m) => m.predict(pixels, exec),
        }
    }

    pub fn to_params(&self) -> ModelParams {
        match self {
            Detector::Cnn(m) => m.to_params(),
            Detector::PcaSvm(m) => m.to_params(),
        }
    }

    pub fn from_params(params: &ModelParams) -> Result<Self> {
        match params.header["model"].as_str() {
            Some("cnn") => Ok(Detector::Cnn(Cnn::from_params(params)?)),
            Some("pca-svm") => Ok(Detector::PcaSvm(PcaSvm::from_params(params)?)),
            other => Err(Error::Config(format!("unknown model kind {other:?}"))),
        }
    }
}
