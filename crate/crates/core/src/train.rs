//! Mini-batch training with early stopping, evaluation, and data splits.

use std::f64::consts::TAU;
use std::io::Write;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::autodiff::{adjoint_sweep, readout_values, Head};
use crate::circuit::{Architecture, CircuitTemplate, ParamVector};
use crate::codec::Decoder;
use crate::error::{Error, Result};
use crate::optim::AdamState;
use crate::statevector::Statevector;

/// Random streams derived from one seed.
pub mod streams {
    pub const PARAM_INIT: u64 = 0;
    pub const BATCHES: u64 = 1;
    pub const TRAIN_VAL_SPLIT: u64 = 2;
    pub const TRAIN_TEST_SPLIT: u64 = 3;
    pub const SUBSAMPLE: u64 = 4;
    pub const VQE: u64 = 5;
}

pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One input state with its class.
#[derive(Debug, Clone)]
pub struct Example {
    pub input: Statevector,
    pub label: usize,
}

/// A circuit template with its classical readout head.
#[derive(Debug, Clone)]
pub struct Classifier {
    pub template: CircuitTemplate,
    pub head: Head,
}

/// Result of one forward/backward pass on an example.
#[derive(Debug, Clone)]
pub struct ExampleGrad {
    pub loss: f64,
    pub grad: Vec<f64>,
    pub predicted: usize,
}

impl Classifier {
    pub fn new(architecture: Architecture, decoder: Decoder, n_classes: usize) -> Result<Self> {
        let template = architecture.build()?;
        if template.readout.is_empty() {
            return Err(Error::InvalidArgument(format!("{architecture} has no readout qubits")));
        }
        let capacity = 1usize << template.readout.len();
        if n_classes < 2 || n_classes > capacity {
            return Err(Error::InvalidArgument(format!(
                "{n_classes} classes do not fit {} readout qubits",
                template.readout.len()
            )));
        }
        Ok(Classifier { template, head: Head::new(decoder, n_classes) })
    }

    pub fn n_params(&self) -> usize {
        self.template.n_params
    }

    pub fn predict(&self, params: &ParamVector, input: &Statevector) -> Result<usize> {
        let out = self.template.run(params, input)?;
        self.head.predict(&readout_values(self.head.decoder, &out, &self.template.readout)?)
    }

    pub fn loss(&self, params: &ParamVector, example: &Example) -> Result<f64> {
        let out = self.template.run(params, &example.input)?;
        let values = readout_values(self.head.decoder, &out, &self.template.readout)?;
        Ok(self.head.loss_and_slope(&values, example.label)?.0)
    }

    /// Loss, adjoint gradient and prediction from a single forward pass.
    pub fn loss_and_grad(&self, params: &ParamVector, example: &Example) -> Result<ExampleGrad> {
        let t = &self.template;
        let out = t.run(params, &example.input)?;
        let values = readout_values(self.head.decoder, &out, &t.readout)?;
        let (loss, slope) = self.head.loss_and_slope(&values, example.label)?;
        let predicted = self.head.predict(&values)?;
        let lambda = crate::autodiff::Observable::apply(
            &self.head.slope_observable(t.n_qubits, &t.readout, &slope),
            &out,
        )?;
        let grad = adjoint_sweep(t, params, out, lambda);
        Ok(ExampleGrad { loss, grad, predicted })
    }

    /// Mean loss and gradient over a batch. Examples are processed in
    /// parallel and reduced in index order.
    pub fn batch_loss_and_grad(
        &self,
        params: &ParamVector,
        batch: &[&Example],
    ) -> Result<(f64, Vec<f64>, usize)> {
        if batch.is_empty() {
            return Err(Error::EmptyDataset("batch"));
        }
        let per_example: Vec<ExampleGrad> = batch
            .par_iter()
            .map(|ex| self.loss_and_grad(params, ex))
            .collect::<Result<_>>()?;
        let mut grad = vec![0.0; self.n_params()];
        let mut loss = 0.0;
        let mut correct = 0;
        for (eg, ex) in per_example.iter().zip(batch) {
            loss += eg.loss;
            for (g, e) in grad.iter_mut().zip(&eg.grad) {
                *g += e;
            }
            correct += usize::from(eg.predicted == ex.label);
        }
        let n = batch.len() as f64;
        grad.iter_mut().for_each(|g| *g /= n);
        Ok((loss / n, grad, correct))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monitor {
    ValAccuracy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    /// Batches per epoch; 0 means one full pass over the training set.
    pub batches_per_epoch: usize,
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub monitor: Monitor,
    pub seed: u64,
}

impl TrainConfig {
    /// Digit-recognition settings: batches of 20, 10 batches per epoch.
    pub fn mnist(seed: u64) -> Self {
        TrainConfig {
            batch_size: 20,
            batches_per_epoch: 10,
            learning_rate: 0.001,
            max_epochs: 1000,
            patience: 100,
            monitor: Monitor::ValAccuracy,
            seed,
        }
    }

    /// Phase-recognition settings: batches of 8, full passes.
    pub fn xxz(seed: u64) -> Self {
        TrainConfig {
            batch_size: 8,
            batches_per_epoch: 0,
            learning_rate: 0.001,
            max_epochs: 1000,
            patience: 250,
            monitor: Monitor::ValAccuracy,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.batch_size == 0 {
            return bad("batch_size must be >= 1".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if self.max_epochs == 0 {
            return bad("max_epochs must be >= 1".into());
        }
        if self.patience == 0 || self.patience > self.max_epochs {
            return bad(format!("patience must be in 1..={}, got {}", self.max_epochs, self.patience));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_acc: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub records: Vec<EpochRecord>,
}

impl TrainHistory {
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "epoch,train_loss,train_acc,val_acc,seconds")?;
        for r in &self.records {
            writeln!(w, "{},{},{},{},{:.6}", r.epoch, r.train_loss, r.train_acc, r.val_acc, r.seconds)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters of the best validation epoch.
    pub params: ParamVector,
    /// Optimizer state after the last completed epoch.
    pub adam: AdamState,
    /// Parameters after the last completed epoch (resume point).
    pub last_params: ParamVector,
    pub best_val_accuracy: f64,
    pub best_epoch: usize,
    pub history: TrainHistory,
}

/// Uniform angles in `[0, 2π)` from the seed's init stream.
pub fn init_params(n_params: usize, seed: u64) -> ParamVector {
    let mut rng = rng_for(seed, streams::PARAM_INIT);
    ParamVector((0..n_params).map(|_| rng.random_range(0.0..TAU)).collect())
}

/// Endless stream of example indices drawn without replacement, reshuffled
/// after each full pass.
struct BatchStream {
    order: Vec<usize>,
    pos: usize,
    rng: ChaCha8Rng,
}

impl BatchStream {
    fn new(n: usize, seed: u64) -> Self {
        let mut rng = rng_for(seed, streams::BATCHES);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        BatchStream { order, pos: 0, rng }
    }

    fn next_batch(&mut self, size: usize) -> Vec<usize> {
        let mut batch = Vec::with_capacity(size);
        while batch.len() < size {
            if self.pos == self.order.len() {
                self.order.shuffle(&mut self.rng);
                self.pos = 0;
            }
            let take = (size - batch.len()).min(self.order.len() - self.pos);
            batch.extend_from_slice(&self.order[self.pos..self.pos + take]);
            self.pos += take;
        }
        batch
    }
}

pub fn train(
    classifier: &Classifier,
    config: &TrainConfig,
    train_set: &[Example],
    val_set: &[Example],
) -> Result<TrainOutcome> {
    train_from(classifier, config, train_set, val_set, None)
}

/// Trains from `start` (parameters and optimizer state) when given,
/// otherwise from the seeded uniform initialization.
pub fn train_from(
    classifier: &Classifier,
    config: &TrainConfig,
    train_set: &[Example],
    val_set: &[Example],
    start: Option<(ParamVector, AdamState)>,
) -> Result<TrainOutcome> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(Error::EmptyDataset("training set"));
    }
    if val_set.is_empty() {
        return Err(Error::EmptyDataset("validation set"));
    }
    let n_params = classifier.n_params();
    let (mut params, mut adam) = match start {
        Some((p, a)) => {
            p.validate_for(&classifier.template)?;
            if a.m.len() != n_params {
                return Err(Error::Dimension { expected: n_params, actual: a.m.len() });
            }
            (p, a)
        }
        None => (init_params(n_params, config.seed), AdamState::new(n_params)),
    };
    let batches_per_epoch = if config.batches_per_epoch == 0 {
        train_set.len().div_ceil(config.batch_size)
    } else {
        config.batches_per_epoch
    };
    let batch_size = config.batch_size.min(train_set.len());
    let mut stream = BatchStream::new(train_set.len(), config.seed);

    let mut history = TrainHistory::default();
    let mut best = (f64::NEG_INFINITY, params.clone(), 0);
    let mut since_best = 0;
    for epoch in 1..=config.max_epochs {
        let started = Instant::now();
        let (mut loss_sum, mut correct, mut seen) = (0.0, 0, 0);
        for _ in 0..batches_per_epoch {
            let batch: Vec<&Example> = stream.next_batch(batch_size).into_iter().map(|i| &train_set[i]).collect();
            let (loss, grad, ok) = classifier.batch_loss_and_grad(&params, &batch)?;
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::Numerical(format!("non-finite loss or gradient at epoch {epoch}")));
            }
            adam.step(&mut params.0, &grad, config.learning_rate)?;
            loss_sum += loss * batch.len() as f64;
            correct += ok;
            seen += batch.len();
        }
        let val_acc = evaluate(classifier, &params, val_set)?;
        history.records.push(EpochRecord {
            epoch,
            train_loss: loss_sum / seen as f64,
            train_acc: correct as f64 / seen as f64,
            val_acc,
            seconds: started.elapsed().as_secs_f64(),
        });
        if val_acc > best.0 {
            best = (val_acc, params.clone(), epoch);
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= config.patience {
                break;
            }
        }
    }
    Ok(TrainOutcome {
        params: best.1,
        adam,
        last_params: params,
        best_val_accuracy: best.0,
        best_epoch: best.2,
        history,
    })
}

pub fn predictions(classifier: &Classifier, params: &ParamVector, dataset: &[Example]) -> Result<Vec<usize>> {
    dataset.par_iter().map(|ex| classifier.predict(params, &ex.input)).collect()
}

/// Fraction of examples classified correctly.
pub fn evaluate(classifier: &Classifier, params: &ParamVector, dataset: &[Example]) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset("evaluation set"));
    }
    let preds = predictions(classifier, params, dataset)?;
    let correct = preds.iter().zip(dataset).filter(|(p, ex)| **p == ex.label).count();
    Ok(correct as f64 / dataset.len() as f64)
}

/// `matrix[true][predicted]` counts.
pub fn confusion_matrix(
    classifier: &Classifier,
    params: &ParamVector,
    dataset: &[Example],
) -> Result<Vec<Vec<usize>>> {
    let n = classifier.head.n_classes;
    let mut m = vec![vec![0; n]; n];
    for (p, ex) in predictions(classifier, params, dataset)?.into_iter().zip(dataset) {
        if ex.label >= n {
            return Err(Error::InvalidArgument(format!("label {} outside 0..{n}", ex.label)));
        }
        m[ex.label][p] += 1;
    }
    Ok(m)
}

/// `keep` distinct indices of `0..n` drawn at random, in ascending order.
pub fn subsample(n: usize, keep: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    idx.truncate(keep.min(n));
    idx.sort_unstable();
    idx
}

/// Shuffled 11:1 train/validation index split.
pub fn split_train_val(n: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng_for(seed, streams::TRAIN_VAL_SPLIT));
    let n_val = ((n as f64) / 12.0).round().max(1.0) as usize;
    let n_val = n_val.min(n.saturating_sub(1));
    let val = idx.split_off(n - n_val);
    (idx, val)
}

/// Per-class shuffled split keeping `train_fraction` of each class for
/// training; both index lists come back sorted.
pub fn stratified_split(labels: &[usize], train_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = rng_for(seed, streams::TRAIN_TEST_SPLIT);
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for class in 0..n_classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        let n_train = (members.len() as f64 * train_fraction).round() as usize;
        test.extend_from_slice(&members[n_train..]);
        members.truncate(n_train);
        train.extend(members);
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

/// One seeded trial: 11:1 train/validation split of `pool`, training with
/// early stopping, then accuracy of the best parameters on `test`.
#[derive(Debug, Clone)]
pub struct Trial {
    pub outcome: TrainOutcome,
    pub test_accuracy: f64,
    pub train_indices: Vec<usize>,
    pub val_indices: Vec<usize>,
}

pub fn run_trial(classifier: &Classifier, config: &TrainConfig, pool: &[Example], test: &[Example]) -> Result<Trial> {
    let (train_idx, val_idx) = split_train_val(pool.len(), config.seed);
    let pick = |idx: &[usize]| idx.iter().map(|&i| pool[i].clone()).collect::<Vec<_>>();
    let outcome = train(classifier, config, &pick(&train_idx), &pick(&val_idx))?;
    let test_accuracy = evaluate(classifier, &outcome.params, test)?;
    Ok(Trial { outcome, test_accuracy, train_indices: train_idx, val_indices: val_idx })
}

pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::encode_qubit;
    use crate::gates::BlockKind;

    fn toy_examples(n: usize, seed: u64) -> Vec<Example> {
        let mut rng = rng_for(seed, 99);
        (0..n)
            .map(|i| {
                let label = i % 4;
                let features: Vec<f64> = (0..8)
                    .map(|j| if j % 4 == label { 0.9 } else { rng.random_range(0.0..0.3) })
                    .collect();
                Example { input: encode_qubit(&features).unwrap(), label }
            })
            .collect()
    }

    #[test]
    fn config_validation() {
        let mut c = TrainConfig::mnist(0);
        assert!(c.validate().is_ok());
        c.patience = 0;
        assert!(c.validate().is_err());
        c = TrainConfig::xxz(0);
        c.patience = 2000;
        assert!(c.validate().is_err());
        c = TrainConfig::xxz(0);
        c.batch_size = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn batch_stream_covers_without_replacement() {
        let mut s = BatchStream::new(10, 3);
        let mut first_pass: Vec<usize> = (0..5).flat_map(|_| s.next_batch(2)).collect();
        first_pass.sort_unstable();
        assert_eq!(first_pass, (0..10).collect::<Vec<_>>());
        assert_eq!(s.next_batch(15).len(), 15);
    }

    #[test]
    fn single_example_overfits() {
        let clf = Classifier::new(Architecture::Ttn(BlockKind::GeneralSU4), Decoder::Binary, 4).unwrap();
        let data = toy_examples(1, 1);
        let config = TrainConfig { batch_size: 1, batches_per_epoch: 1, learning_rate: 0.05, max_epochs: 60, patience: 60, monitor: Monitor::ValAccuracy, seed: 4 };
        let out = train(&clf, &config, &data, &data).unwrap();
        let first = out.history.records[0].train_loss;
        let last = clf.loss(&out.last_params, &data[0]).unwrap();
        assert!(last < first, "{last} !< {first}");
    }

    #[test]
    fn batch_gradient_is_mean_of_example_gradients() {
        let clf = Classifier::new(Architecture::Mera(BlockKind::GeneralSO4), Decoder::Amplitude, 4).unwrap();
        let data = toy_examples(6, 2);
        let params = init_params(clf.n_params(), 8);
        let refs: Vec<&Example> = data.iter().collect();
        let (loss, grad, _) = clf.batch_loss_and_grad(&params, &refs).unwrap();
        let singles: Vec<ExampleGrad> = data.iter().map(|e| clf.loss_and_grad(&params, e).unwrap()).collect();
        let mean_loss = singles.iter().map(|s| s.loss).sum::<f64>() / 6.0;
        assert!((loss - mean_loss).abs() < 1e-12);
        for k in 0..clf.n_params() {
            let m = singles.iter().map(|s| s.grad[k]).sum::<f64>() / 6.0;
            assert!((grad[k] - m).abs() < 1e-12);
        }
    }

    #[test]
    fn training_is_deterministic_and_restores_best() {
        let clf = Classifier::new(Architecture::Ttn(BlockKind::SimpleReal), Decoder::Binary, 4).unwrap();
        let data = toy_examples(40, 5);
        let (tr, va) = data.split_at(32);
        let config = TrainConfig { batch_size: 8, batches_per_epoch: 0, learning_rate: 0.05, max_epochs: 15, patience: 5, monitor: Monitor::ValAccuracy, seed: 11 };
        let a = train(&clf, &config, tr, va).unwrap();
        let b = train(&clf, &config, tr, va).unwrap();
        assert_eq!(a.params, b.params);
        let strip = |h: &TrainHistory| h.records.iter().map(|r| (r.epoch, r.train_loss.to_bits(), r.train_acc.to_bits(), r.val_acc.to_bits())).collect::<Vec<_>>();
        assert_eq!(strip(&a.history), strip(&b.history));

        let best = a.history.records.iter().map(|r| r.val_acc).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(a.best_val_accuracy, best);
        assert_eq!(evaluate(&clf, &a.params, va).unwrap(), best);
        let first_best = a.history.records.iter().find(|r| r.val_acc == best).unwrap().epoch;
        assert_eq!(a.best_epoch, first_best);
    }

    #[test]
    fn early_stop_respects_patience() {
        let clf = Classifier::new(Architecture::Ttn(BlockKind::SimpleReal), Decoder::Binary, 4).unwrap();
        let data = toy_examples(16, 6);
        let config = TrainConfig { batch_size: 4, batches_per_epoch: 1, learning_rate: 1e-9, max_epochs: 50, patience: 3, monitor: Monitor::ValAccuracy, seed: 0 };
        let out = train(&clf, &config, &data[..12], &data[12..]).unwrap();
        // A negligible learning rate never improves on epoch 1.
        assert_eq!(out.best_epoch, 1);
        assert_eq!(out.history.records.len(), 4);
    }

    #[test]
    fn empty_sets_rejected() {
        let clf = Classifier::new(Architecture::Ttn(BlockKind::SimpleReal), Decoder::Binary, 4).unwrap();
        let data = toy_examples(4, 1);
        assert!(matches!(train(&clf, &TrainConfig::mnist(0), &[], &data), Err(Error::EmptyDataset(_))));
        assert!(matches!(evaluate(&clf, &ParamVector::zeros(16), &[]), Err(Error::EmptyDataset(_))));
    }

    #[test]
    fn constructed_state_counts_as_correct() {
        // Zero parameters leave |0...0> unchanged: binary outputs (1, 1) = class 3.
        let clf = Classifier::new(Architecture::Ttn(BlockKind::SimpleReal), Decoder::Binary, 4).unwrap();
        let ex = Example { input: Statevector::new_zero_state(8).unwrap(), label: 3 };
        assert_eq!(evaluate(&clf, &ParamVector::zeros(16), &[ex]).unwrap(), 1.0);
    }

    #[test]
    fn confusion_rows_sum_to_class_counts() {
        let clf = Classifier::new(Architecture::Mera(BlockKind::GeneralSU4), Decoder::Binary, 4).unwrap();
        let data = toy_examples(22, 9);
        let m = confusion_matrix(&clf, &init_params(clf.n_params(), 1), &data).unwrap();
        for class in 0..4 {
            let count = data.iter().filter(|e| e.label == class).count();
            assert_eq!(m[class].iter().sum::<usize>(), count);
        }
    }

    #[test]
    fn splits() {
        let (tr, va) = split_train_val(120, 1);
        assert_eq!((tr.len(), va.len()), (110, 10));
        let mut all: Vec<usize> = tr.iter().chain(&va).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..120).collect::<Vec<_>>());

        let labels: Vec<usize> = (0..300).map(|i| [0, 1, 1, 2][i % 4]).collect();
        let (tr, te) = stratified_split(&labels, 2.0 / 3.0, 3);
        assert_eq!(tr.len() + te.len(), 300);
        for class in 0..3 {
            let n_tr = tr.iter().filter(|&&i| labels[i] == class).count();
            let n_all = labels.iter().filter(|&&l| l == class).count();
            assert_eq!(n_tr, (n_all as f64 * 2.0 / 3.0).round() as usize);
        }
    }

    #[test]
    fn history_csv_header() {
        let h = TrainHistory { records: vec![EpochRecord { epoch: 1, train_loss: 0.5, train_acc: 0.25, val_acc: 0.5, seconds: 0.1 }] };
        let mut buf = Vec::new();
        h.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("epoch,train_loss,train_acc,val_acc,seconds\n1,0.5,0.25,0.5,"));
    }

    #[test]
    fn mean_std_sample() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-15);
    }
}
