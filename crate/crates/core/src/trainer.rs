//! Joint optimization of the weighting network and classifier, checkpoint
//! selection on validation AUC, and selection of the inference threshold T.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{self, EvalReport};
use crate::model::{
    loss_and_gradients, pair_index, sample_loss, Classifier, FingerprintModel, InteractionMode, JointGradients, ModelConfig,
    Parameters,
    Prediction, Real, Sample, StandardizationStats, DEFAULT_CHANNELS,
};
use crate::optim::{Adam, AdamConfig};
use crate::radiomics::{extract_study_features, Family, DEFAULT_BINS};
use crate::volume::{extract_roi, resize_trilinear, PatchGrid, RoiSpec, Study, Task};

/// Decision cutoff on ĉ used when scoring thresholds and reporting accuracy.
pub const DECISION_CUTOFF: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub task: Task,
    pub epochs: usize,
    pub batch_size: usize,
    /// Step size for the network and the classifier bias.
    pub learning_rate: f64,
    /// Multipliers of `learning_rate` for the linear and pairwise terms.
    pub linear_lr_scale: f64,
    pub pairwise_lr_scale: f64,
    /// L2 penalty λ/2·‖θ‖² on the linear classifier weights.
    pub weight_decay: f64,
    /// The pairwise weights get λ · pairwise_decay_scale · 3JK.
    pub pairwise_decay_scale: f64,
    /// L2 penalty on the dense layer of the weighting network, pulling
    /// relevance logits toward zero.
    pub network_decay: f64,
    /// Dense-layer init range as a multiple of 1/√fan_in.
    pub dense_init_scale: f64,
    pub adam: AdamConfig,
    pub seed: u64,
    pub roi: RoiSpec,
    pub grid: PatchGrid,
    pub n_bins: usize,
    pub interaction: InteractionMode,
    pub channels: Vec<usize>,
    /// Epochs without a validation AUC improvement before stopping.
    pub patience: usize,
    pub train_fraction: f64,
    pub selection: bool,
    pub families: Vec<Family>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            task: Task::Acl,
            epochs: 60,
            batch_size: 16,
            learning_rate: 1e-3,
            linear_lr_scale: 1.0,
            pairwise_lr_scale: 1e-3,
            weight_decay: 3.0,
            pairwise_decay_scale: 1.0,
            network_decay: 0.0,
            dense_init_scale: 0.0,
            adam: AdamConfig::default(),
            seed: 0,
            roi: RoiSpec::default(),
            grid: PatchGrid::cube(2).expect("2×2×2 is valid"),
            n_bins: DEFAULT_BINS,
            interaction: InteractionMode::Full,
            channels: DEFAULT_CHANNELS.to_vec(),
            patience: 10,
            train_fraction: 0.8,
            selection: true,
            families: Family::ALL.to_vec(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if !(self.learning_rate > 0.0) || !(self.linear_lr_scale > 0.0) || !(self.pairwise_lr_scale > 0.0) {
            return bad("learning rates must be positive");
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad("train_fraction must lie in (0, 1)");
        }
        if [self.weight_decay, self.pairwise_decay_scale, self.network_decay].iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return bad("weight_decay must be finite and ≥ 0");
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return bad("epochs and batch_size must be positive");
        }
        if self.n_bins == 0 {
            return bad("n_bins must be positive");
        }
        self.roi.validate()
    }

    /// Per-block step sizes in parameter order.
    fn learning_rates<R: Real>(&self, model: &FingerprintModel<R>) -> Vec<f64> {
        let mut lrs = vec![self.learning_rate; model.network.blocks().len()];
        lrs.push(self.learning_rate);
        lrs.push(self.learning_rate * self.linear_lr_scale);
        lrs.push(self.learning_rate * self.pairwise_lr_scale);
        lrs
    }
}

/// A study reduced to what training and inference need.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreparedStudy {
    pub study_id: String,
    pub labels: BTreeMap<Task, u8>,
    /// Raw f ∈ R^{3JK}.
    pub features: Vec<f64>,
    /// Stacked axial/coronal/sagittal ROIs, each z-scored on its own.
    pub roi: Vec<f64>,
    pub roi_dims: [usize; 3],
}

impl PreparedStudy {
    /// Pairs precomputed features with the network input. The ROIs are
    /// resampled to `roi_dims` when given and different.
    pub fn new(study: &Study, features: Vec<f64>, roi: &RoiSpec, roi_dims: Option<[usize; 3]>) -> Result<Self> {
        let (stack, dims) = roi_stack(study, roi, roi_dims)?;
        Ok(Self { study_id: study.study_id.clone(), labels: study.labels.clone(), features, roi: stack, roi_dims: dims })
    }

    /// Extracts features sequentially and builds the network input.
    pub fn extract(study: &Study, roi: &RoiSpec, grid: &PatchGrid, n_bins: usize, roi_dims: Option<[usize; 3]>) -> Result<Self> {
        let f = extract_study_features(study, roi, grid, n_bins)?;
        Self::new(study, f.values, roi, roi_dims)
    }

    pub fn label(&self, task: Task) -> Option<u8> {
        self.labels.get(&task).copied()
    }
}

/// Channel-stacked ROI, each channel shifted and scaled to zero mean and unit
/// standard deviation (constant channels become zero).
pub fn roi_stack(study: &Study, roi: &RoiSpec, target: Option<[usize; 3]>) -> Result<(Vec<f64>, [usize; 3])> {
    let mut out = Vec::new();
    let mut dims = [0; 3];
    for v in &study.views {
        let mut r = extract_roi(v, roi)?;
        if let Some(t) = target {
            r = resize_trilinear(&r, t)?;
        }
        dims = r.dims();
        let x = r.voxels();
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let std = libm::sqrt(x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n);
        let inv = if std > 0.0 { 1.0 / std } else { 0.0 };
        out.extend(x.iter().map(|v| (v - mean) * inv));
    }
    Ok((out, dims))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
}

/// Per-class shuffle, first round(fraction · n_class) of each class to training.
pub fn stratified_split(labels: &[u8], train_fraction: f64, seed: u64) -> Split {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut train = Vec::new();
    let mut val = Vec::new();
    for class in [0u8, 1] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        let n_train = libm::round(train_fraction * idx.len() as f64) as usize;
        train.extend_from_slice(&idx[..n_train.min(idx.len())]);
        val.extend_from_slice(&idx[n_train.min(idx.len())..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    Split { train, val }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_auc: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub records: Vec<EpochRecord>,
    /// Epoch of the retained checkpoint.
    pub best_epoch: usize,
}

/// A trained per-task model with the preprocessing it expects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub task: Task,
    pub roi: RoiSpec,
    pub model: FingerprintModel<f32>,
}

impl ModelBundle {
    /// Prediction from precomputed raw features and a prepared ROI stack.
    pub fn predict_prepared(&self, study: &PreparedStudy, threshold: Option<f64>) -> Result<Prediction> {
        let z = self.model.prepare_features(&study.features)?;
        let roi: Vec<f32> = study.roi.iter().map(|&v| v as f32).collect();
        self.model.predict(&z, &roi, threshold)
    }

    pub fn relevance(&self, study: &PreparedStudy) -> Result<Vec<f32>> {
        let roi: Vec<f32> = study.roi.iter().map(|&v| v as f32).collect();
        self.model.relevance(&roi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSelection {
    pub threshold: f64,
    pub youden: f64,
    pub candidates: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub bundle: ModelBundle,
    pub history: TrainHistory,
    pub split: Split,
    pub selection: ThresholdSelection,
    /// Inference-path metrics on the validation split at the selected T.
    pub validation: EvalReport,
}

/// Features and ROI of one study in the model's scalar type.
#[derive(Debug, Clone)]
pub struct ModelInput<R> {
    pub features: Vec<R>,
    pub roi: Vec<R>,
    pub label: u8,
}

impl<R: Real> ModelInput<R> {
    pub fn new(model: &FingerprintModel<R>, study: &PreparedStudy, task: Task) -> Result<Self> {
        let label = study
            .label(task)
            .ok_or_else(|| Error::InvalidConfig(alloc::format!("study {} has no {task} label", study.study_id)))?;
        Ok(Self {
            features: model.prepare_features(&study.features)?,
            roi: study.roi.iter().map(|&v| R::of(v)).collect(),
            label,
        })
    }

    pub fn sample(&self) -> Sample<'_, R> {
        Sample { features: &self.features, roi: &self.roi, label: self.label }
    }
}

fn task_labels(data: &[PreparedStudy], task: Task) -> Result<Vec<u8>> {
    data.iter()
        .map(|s| s.label(task).ok_or_else(|| Error::InvalidConfig(alloc::format!("study {} has no {task} label", s.study_id))))
        .collect()
}

fn require_both_classes(labels: impl Iterator<Item = u8>, what: &str) -> Result<()> {
    let (mut pos, mut neg) = (0, 0);
    for l in labels {
        if l == 1 {
            pos += 1
        } else {
            neg += 1
        }
    }
    if pos == 0 || neg == 0 {
        return Err(Error::DegenerateLabels(alloc::format!("{what} has {pos} positive and {neg} negative studies")));
    }
    Ok(())
}

/// Trains one task model. Deterministic given `data` order and `cfg`.
pub fn train(data: &[PreparedStudy], cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::InvalidConfig("empty dataset".into()));
    }
    let labels = task_labels(data, cfg.task)?;
    let split = stratified_split(&labels, cfg.train_fraction, cfg.seed);
    require_both_classes(split.train.iter().map(|&i| labels[i]), "training split")?;
    require_both_classes(split.val.iter().map(|&i| labels[i]), "validation split")?;

    let stats = StandardizationStats::<f32>::fit(split.train.iter().map(|&i| data[i].features.as_slice()))?;
    let model_cfg = ModelConfig {
        roi_dims: data[0].roi_dims,
        grid: cfg.grid,
        n_bins: cfg.n_bins,
        channels: cfg.channels.clone(),
        interaction: cfg.interaction,
        selection: cfg.selection,
        families: cfg.families.clone(),
        dense_init_scale: cfg.dense_init_scale,
    };
    let mut init_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    init_rng.set_stream(2);
    let mut model = FingerprintModel::<f32>::init(model_cfg, stats, &mut init_rng)?;

    let train_set: Vec<ModelInput<f32>> =
        split.train.iter().map(|&i| ModelInput::new(&model, &data[i], cfg.task)).collect::<Result<_>>()?;
    let val_set: Vec<ModelInput<f32>> =
        split.val.iter().map(|&i| ModelInput::new(&model, &data[i], cfg.task)).collect::<Result<_>>()?;

    let lrs = cfg.learning_rates(&model);
    let decay = Decay {
        linear: cfg.weight_decay as f32,
        pairwise: (cfg.weight_decay * cfg.pairwise_decay_scale * model.dim() as f64) as f32,
        dense: cfg.network_decay as f32,
    };
    let mut adam = Adam::new(cfg.adam, &model);
    let mut grads = model.zero_gradients();
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    shuffle_rng.set_stream(3);
    let mut order: Vec<usize> = (0..train_set.len()).collect();

    let mut history = TrainHistory::default();
    let mut best: Option<(f64, FingerprintModel<f32>)> = None;
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            grads.clear();
            let w = 1.0 / batch.len() as f32;
            for &i in batch {
                loss_sum += loss_and_gradients(&model, train_set[i].sample(), &mut grads, w)?.as_f64();
            }
            add_weight_decay(&model, &mut grads, &decay);
            adam.step(&mut model, &grads, &lrs)?;
        }
        let (val_loss, val_auc) = weighted_validation(&model, &val_set)?;
        history.records.push(EpochRecord { epoch, train_loss: loss_sum / train_set.len() as f64, val_loss, val_auc });
        if best.as_ref().is_none_or(|(auc, _)| val_auc > *auc) {
            best = Some((val_auc, model.clone()));
            history.best_epoch = epoch;
        }
        if epoch - history.best_epoch >= cfg.patience {
            break;
        }
    }
    let mut model = best.map(|(_, m)| m).unwrap_or(model);

    let selection = select_threshold(&model, &val_set)?;
    model.threshold = selection.threshold;
    let scores: Vec<f64> = val_set
        .iter()
        .map(|s| Ok(model.predict(&s.features, &s.roi, None)?.probability))
        .collect::<Result<_>>()?;
    let val_labels: Vec<u8> = val_set.iter().map(|s| s.label).collect();
    let validation = metrics::evaluate(&scores, &val_labels, DECISION_CUTOFF)?;
    Ok(TrainOutcome {
        bundle: ModelBundle { task: cfg.task, roi: cfg.roi, model },
        history,
        split,
        selection,
        validation,
    })
}

struct Decay<R> {
    linear: R,
    pairwise: R,
    dense: R,
}

fn add_weight_decay<R: Real>(model: &FingerprintModel<R>, grads: &mut JointGradients<R>, decay: &Decay<R>) {
    fn add<R: Real>(grad: &mut [R], params: &[R], lambda: R) {
        if lambda > R::zero() {
            grad.iter_mut().zip(params).for_each(|(g, &p)| *g += lambda * p);
        }
    }
    let (c, dense) = (&model.classifier, &model.network.dense);
    add(&mut grads.classifier.linear, &c.linear, decay.linear);
    add(&mut grads.classifier.pairwise, &c.pairwise, decay.pairwise);
    add(&mut grads.network.dense.weight, &dense.weight, decay.dense);
    add(&mut grads.network.dense.bias, &dense.bias, decay.dense);
}

/// Mean loss and AUC of the training path (f ⊙ q) on `set`.
fn weighted_validation<R: Real>(model: &FingerprintModel<R>, set: &[ModelInput<R>]) -> Result<(f64, f64)> {
    let mut loss = 0.0;
    let mut scores = Vec::with_capacity(set.len());
    for s in set {
        loss += sample_loss(model, s.sample())?.as_f64();
        let q = model.relevance(&s.roi)?;
        scores.push(model.predict_weighted(&s.features, &q)?.probability);
    }
    let labels: Vec<u8> = set.iter().map(|s| s.label).collect();
    Ok((loss / set.len() as f64, metrics::auc(&scores, &labels)?))
}

/// Incremental logit of one study as features leave the mask.
struct MaskedLogit<'a, R> {
    classifier: &'a Classifier<R>,
    x: Vec<f64>,
    /// Pair-eligible features (all for full mode, the top-m set otherwise).
    in_pairs: Vec<bool>,
    /// h_i = Σ_{l active, l≠i} θ_il x_l over currently kept features.
    h: Vec<f64>,
    z: f64,
}

impl<'a, R: Real> MaskedLogit<'a, R> {
    fn new(classifier: &'a Classifier<R>, features: &[R], q: &[R]) -> Self {
        let c = classifier;
        let d = c.dim();
        let x: Vec<f64> = features.iter().map(|v| v.as_f64()).collect();
        let mut in_pairs = vec![false; d];
        if c.mode != InteractionMode::None {
            c.active_set(q).into_iter().for_each(|i| in_pairs[i] = true);
        }
        let mut h = vec![0.0; d];
        let mut z = c.bias[0].as_f64();
        for i in 0..d {
            z += c.linear[i].as_f64() * x[i];
        }
        for i in (0..d).filter(|&i| in_pairs[i] && x[i] != 0.0) {
            for l in (i + 1..d).filter(|&l| in_pairs[l] && x[l] != 0.0) {
                let t = c.pairwise[pair_index(i, l, d)].as_f64();
                h[i] += t * x[l];
                h[l] += t * x[i];
                z += t * x[i] * x[l];
            }
        }
        Self { classifier, x, in_pairs, h, z }
    }

    fn remove(&mut self, i: usize) {
        let c = self.classifier;
        let xi = self.x[i];
        if xi == 0.0 {
            return;
        }
        self.z -= xi * (c.linear[i].as_f64() + if self.in_pairs[i] { self.h[i] } else { 0.0 });
        if self.in_pairs[i] {
            let d = self.x.len();
            for l in (0..d).filter(|&l| l != i && self.in_pairs[l]) {
                let (a, b) = if i < l { (i, l) } else { (l, i) };
                self.h[l] -= c.pairwise[pair_index(a, b, d)].as_f64() * xi;
            }
        }
        self.x[i] = 0.0;
    }
}

/// One validation study as seen by the threshold sweep.
#[derive(Debug, Clone)]
pub struct RelevanceCase<'a, R> {
    pub features: &'a [R],
    pub relevance: Vec<f64>,
    pub label: u8,
}

/// Chooses T maximizing Youden's index of fingerprint predictions (ĉ ≥ 0.5)
/// over every distinct validation relevance value plus {0, 1}; ties go to the
/// smallest T.
pub fn select_threshold<R: Real>(model: &FingerprintModel<R>, val: &[ModelInput<R>]) -> Result<ThresholdSelection> {
    let cases = val
        .iter()
        .map(|s| {
            let relevance = model.relevance(&s.roi)?.iter().map(|v| v.as_f64()).collect();
            Ok(RelevanceCase { features: &s.features, relevance, label: s.label })
        })
        .collect::<Result<Vec<_>>>()?;
    sweep_threshold(&model.classifier, &cases)
}

/// The sweep behind [`select_threshold`] for precomputed relevance. Exact:
/// each study's logit is updated as features leave the mask.
pub fn sweep_threshold<R: Real>(classifier: &Classifier<R>, cases: &[RelevanceCase<'_, R>]) -> Result<ThresholdSelection> {
    require_both_classes(cases.iter().map(|s| s.label), "validation set")?;
    let mut candidates = vec![0.0, 1.0];
    let mut studies = Vec::with_capacity(cases.len());
    for s in cases {
        let q = &s.relevance;
        if q.len() != classifier.dim() || s.features.len() != classifier.dim() {
            return Err(Error::LengthMismatch { expected: classifier.dim(), actual: q.len().min(s.features.len()) });
        }
        candidates.extend(q.iter().copied().filter(|v| (0.0..=1.0).contains(v)));
        let rq: Vec<R> = q.iter().map(|&v| R::of(v)).collect();
        let mut order: Vec<usize> = (0..q.len()).collect();
        order.sort_by(|&a, &b| q[a].total_cmp(&q[b]));
        studies.push((MaskedLogit::new(classifier, s.features, &rq), q, order, 0usize));
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let labels: Vec<u8> = cases.iter().map(|s| s.label).collect();
    let mut best = ThresholdSelection { threshold: 0.0, youden: f64::NEG_INFINITY, candidates: candidates.len() };
    let mut scores = vec![0.0; cases.len()];
    for &t in &candidates {
        for (k, (logit, q, order, next)) in studies.iter_mut().enumerate() {
            // Mask is q_i ≥ t: drop everything strictly below.
            while *next < order.len() && q[order[*next]] < t {
                logit.remove(order[*next]);
                *next += 1;
            }
            scores[k] = if logit.z >= 0.0 { 1.0 } else { 0.0 };
        }
        let j = metrics::confusion(&scores, &labels, DECISION_CUTOFF)?.youden().unwrap_or(f64::NEG_INFINITY);
        if j > best.youden {
            best.youden = j;
            best.threshold = t;
        }
    }
    Ok(best)
}
