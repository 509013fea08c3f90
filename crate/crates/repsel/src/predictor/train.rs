//! Training loops for the committee and anticipation networks. Every sample
//! draws a fresh program uniformly from the space, labels a dataset with it,
//! splits off a random subset, and asks the network about one held-out
//! example.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::core::{Example, ProgramSpace};
use crate::domains::{nb_dfa, DfaSpace, DrawingSpace, OrderingSpace, SpaceConfig};
use crate::error::{Error, Result};
use crate::predictor::encode::Arch;
use crate::predictor::nn::{Adam, Grads, Mlp, OutputKind, Target};
use crate::predictor::{NeuralModel, TrainMeta};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelForm {
    Committee,
    Anticipation,
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub samples: u64,
    pub lr: f64,
    pub seed: u64,
    pub batch: usize,
    pub form: ModelForm,
    /// Strings per sampled task (DFA domain only).
    pub dfa_dataset_size: usize,
    /// Inclusive string length range for sampled DFA tasks.
    pub dfa_len_range: (usize, usize),
}

impl TrainConfig {
    pub fn new(samples: u64, lr: f64, seed: u64) -> Self {
        TrainConfig {
            samples,
            lr,
            seed,
            batch: 32,
            form: ModelForm::Committee,
            dfa_dataset_size: 50,
            dfa_len_range: (5, 10),
        }
    }
}

/// One generated training sample: the neighbors the network may consult, a
/// held-out query, its true output, and (for the anticipation form) a
/// sampled wrong output.
#[derive(Debug, Clone)]
pub struct TrainSample<I, O> {
    pub neighbors: Vec<Example<I, O>>,
    pub query_x: I,
    pub target_y: O,
    pub negative_y: Option<O>,
}

fn sample_split<R: Rng, I: Clone, O: Clone>(
    data: &mut Vec<Example<I, O>>,
    rng: &mut R,
) -> (Vec<Example<I, O>>, Example<I, O>) {
    data.shuffle(rng);
    let subset_len = rng.gen_range(0..data.len());
    let query = data[data.len() - 1].clone();
    (data[..subset_len].to_vec(), query)
}

fn gen_ordering_sample<R: Rng>(
    space: &OrderingSpace,
    negative: bool,
    rng: &mut R,
) -> TrainSample<(u8, u8), bool> {
    let ord = rng.gen_range(0..space.space_size());
    let hidden = space.params_from_ordinal(ord);
    let n = space.n() as u8;
    let mut data: Vec<Example<(u8, u8), bool>> = Vec::with_capacity(n as usize * (n as usize - 1));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                data.push(Example::new((i, j), space.evaluate(&hidden, &(i, j))));
            }
        }
    }
    let (neighbors, query) = sample_split(&mut data, rng);
    TrainSample {
        neighbors,
        query_x: query.input,
        target_y: query.output,
        negative_y: negative.then_some(!query.output),
    }
}

fn gen_dfa_sample<R: Rng>(
    space: &DfaSpace,
    cfg: &TrainConfig,
    k: usize,
    negative: bool,
    rng: &mut R,
) -> TrainSample<String, bool> {
    let ord = rng.gen_range(0..space.space_size());
    let hidden = space.params_from_ordinal(ord);
    let mut seen = std::collections::HashSet::new();
    let mut data: Vec<Example<String, bool>> = Vec::with_capacity(cfg.dfa_dataset_size);
    while data.len() < cfg.dfa_dataset_size {
        let len = rng.gen_range(cfg.dfa_len_range.0..=cfg.dfa_len_range.1);
        let s: String = (0..len).map(|_| if rng.gen_bool(0.5) { '1' } else { '0' }).collect();
        if seen.insert(s.clone()) {
            let out = space.evaluate(&hidden, &s);
            data.push(Example::new(s, out));
        }
    }
    let (subset, query) = sample_split(&mut data, rng);
    let neighbors = nb_dfa(&subset, &query.input, k);
    TrainSample {
        neighbors,
        query_x: query.input,
        target_y: query.output,
        negative_y: negative.then_some(!query.output),
    }
}

fn gen_draw_sample<R: Rng>(
    space: &DrawingSpace,
    negative: bool,
    rng: &mut R,
) -> TrainSample<(u8, u8), bool> {
    let ord = rng.gen_range(0..space.space_size());
    let hidden = space.params_from_ordinal(ord);
    let grid = space.render(&hidden);
    let mut data: Vec<Example<(u8, u8), bool>> = Vec::new();
    for r in 0..space.height() {
        for c in 0..space.width() {
            data.push(Example::new((r, c), grid.get(r, c)));
        }
    }
    let (neighbors, query) = sample_split(&mut data, rng);
    TrainSample {
        neighbors,
        query_x: query.input,
        target_y: query.output,
        negative_y: negative.then_some(!query.output),
    }
}

enum DomainTrainer<'a> {
    Ordering(&'a OrderingSpace),
    Dfa(&'a DfaSpace),
    Drawing(&'a DrawingSpace),
}

impl DomainTrainer<'_> {
    fn encode<R: Rng>(
        &self,
        arch: &Arch,
        cfg: &TrainConfig,
        negative: bool,
        rng: &mut R,
    ) -> Result<(Vec<f64>, bool, Option<Vec<f64>>)> {
        match self {
            DomainTrainer::Ordering(space) => {
                let s = gen_ordering_sample(space, negative, rng);
                let y = if negative { Some(s.target_y) } else { None };
                let feat = arch.encode_ordering(&s.neighbors, &s.query_x, y)?;
                let neg = match s.negative_y {
                    Some(ny) => Some(arch.encode_ordering(&s.neighbors, &s.query_x, Some(ny))?),
                    None => None,
                };
                Ok((feat, s.target_y, neg))
            }
            DomainTrainer::Dfa(space) => {
                let Arch::DfaFf { k, .. } = arch else {
                    return Err(Error::ShapeMismatch("dfa trainer needs a dfa_ff arch".into()));
                };
                let s = gen_dfa_sample(space, cfg, *k, negative, rng);
                let y = if negative { Some(s.target_y) } else { None };
                let feat = arch.encode_dfa(&s.neighbors, &s.query_x, y)?;
                let neg = match s.negative_y {
                    Some(ny) => Some(arch.encode_dfa(&s.neighbors, &s.query_x, Some(ny))?),
                    None => None,
                };
                Ok((feat, s.target_y, neg))
            }
            DomainTrainer::Drawing(space) => {
                let Arch::DrawConv { window, width, height, .. } = arch else {
                    return Err(Error::ShapeMismatch("drawing trainer needs a draw_conv arch".into()));
                };
                let s = gen_draw_sample(space, negative, rng);
                let cells =
                    crate::domains::nb_draw(&s.neighbors, *width, *height, &s.query_x, *window)?;
                let y = if negative { Some(s.target_y) } else { None };
                let feat = arch.encode_draw(&cells, y)?;
                let neg = match s.negative_y {
                    Some(ny) => Some(arch.encode_draw(&cells, Some(ny))?),
                    None => None,
                };
                Ok((feat, s.target_y, neg))
            }
        }
    }
}

/// Trains a network for the given space config. Deterministic for a fixed
/// config: the sample stream, initialization, and updates all come from one
/// seeded generator.
pub fn train_committee(space: &SpaceConfig, arch: Arch, cfg: &TrainConfig) -> Result<NeuralModel> {
    let ordering_space;
    let dfa_space;
    let drawing_space;
    let trainer = match space {
        SpaceConfig::Ordering { n } => {
            ordering_space = OrderingSpace::new(*n)?;
            DomainTrainer::Ordering(&ordering_space)
        }
        SpaceConfig::Dfa { num_states } => {
            dfa_space = DfaSpace::new(*num_states)?;
            DomainTrainer::Dfa(&dfa_space)
        }
        SpaceConfig::Drawing { width, height, grammar } => {
            drawing_space = DrawingSpace::new(*width, *height, grammar.clone())?;
            DomainTrainer::Drawing(&drawing_space)
        }
    };

    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let negative = cfg.form == ModelForm::Anticipation;
    let (input_dim, wirings, out) = match cfg.form {
        ModelForm::Committee => {
            (arch.committee_input_dim(), arch.committee_wirings(), OutputKind::Softmax)
        }
        ModelForm::Anticipation => {
            (arch.anticipation_input_dim(), arch.anticipation_wirings(), OutputKind::Sigmoid)
        }
    };
    let mut mlp = Mlp::new(input_dim, &wirings, out, &mut rng);
    let mut adam = Adam::new(&mlp, cfg.lr);
    let mut acc = Grads::zeros_like(&mlp);
    let mut in_batch = 0usize;

    for step in 0..cfg.samples {
        let (features, target_y, neg_features) = trainer.encode(&arch, cfg, negative, &mut rng)?;
        let loss = match cfg.form {
            ModelForm::Committee => {
                let (loss, grads) = mlp.loss_and_grads(&features, Target::Class(target_y as usize))?;
                acc.accumulate(&grads);
                loss
            }
            ModelForm::Anticipation => {
                let (pos_loss, pos_grads) = mlp.loss_and_grads(&features, Target::Binary(true))?;
                acc.accumulate(&pos_grads);
                let neg = neg_features.expect("anticipation always has a negative");
                let (neg_loss, neg_grads) = mlp.loss_and_grads(&neg, Target::Binary(false))?;
                acc.accumulate(&neg_grads);
                pos_loss + neg_loss
            }
        };
        if !loss.is_finite() {
            return Err(Error::DivergedLoss { step });
        }
        in_batch += 1;
        if in_batch == cfg.batch {
            acc.scale(1.0 / in_batch as f64);
            adam.step(&mut mlp, &acc);
            acc = Grads::zeros_like(&mlp);
            in_batch = 0;
        }
    }
    if in_batch > 0 {
        acc.scale(1.0 / in_batch as f64);
        adam.step(&mut mlp, &acc);
    }

    Ok(NeuralModel {
        mlp,
        arch: arch.clone(),
        form: cfg.form,
        meta: TrainMeta {
            form: cfg.form,
            params: arch,
            lr: cfg.lr,
            samples: cfg.samples,
            batch: cfg.batch,
            seed: cfg.seed,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_samples_returns_initialization() {
        let cfg = TrainConfig::new(0, 1e-3, 42);
        let space = SpaceConfig::Ordering { n: 3 };
        let arch = Arch::OrderingFc { n: 3, hidden: vec![8] };
        let a = train_committee(&space, arch.clone(), &cfg).unwrap();
        // Fresh init from the same seed matches exactly.
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let fresh = Mlp::new(
            arch.committee_input_dim(),
            &arch.committee_wirings(),
            OutputKind::Softmax,
            &mut rng,
        );
        for (la, lb) in a.mlp.layers.iter().zip(&fresh.layers) {
            assert_eq!(la.w, lb.w);
            assert_eq!(la.b, lb.b);
        }
    }

    #[test]
    fn training_is_seed_deterministic() {
        let cfg = TrainConfig::new(100, 1e-3, 7);
        let space = SpaceConfig::Ordering { n: 4 };
        let arch = Arch::OrderingFc { n: 4, hidden: vec![16] };
        let a = train_committee(&space, arch.clone(), &cfg).unwrap();
        let b = train_committee(&space, arch, &cfg).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    }

    #[test]
    fn anticipation_training_runs_and_outputs_probabilities() {
        let mut cfg = TrainConfig::new(64, 1e-3, 3);
        cfg.form = ModelForm::Anticipation;
        let space = SpaceConfig::Ordering { n: 3 };
        let arch = Arch::OrderingFc { n: 3, hidden: vec![8] };
        let model = train_committee(&space, arch, &cfg).unwrap();
        let p = model.predict_ordering(&[], &(0, 1), true).unwrap();
        assert!(p > 0.0 && p < 1.0);
    }

    #[test]
    fn model_file_round_trip() {
        let mut cfg = TrainConfig::new(50, 1e-3, 9);
        cfg.dfa_len_range = (1, 6);
        let space = SpaceConfig::Dfa { num_states: 2 };
        let arch = Arch::DfaFf { k: 3, max_len: 6, encoder: 8, head: 8 };
        let model = train_committee(&space, arch, &cfg).unwrap();
        let json = model.to_json().unwrap();
        let back = NeuralModel::from_json(&json).unwrap();
        assert_eq!(back.to_json().unwrap(), json);
        // Same predictions after the round trip.
        let neigh = vec![Example::new("01".to_string(), true)];
        let a = model.predict_dfa(&neigh, "0", true).unwrap();
        let b = back.predict_dfa(&neigh, "0", true).unwrap();
        assert_eq!(a, b);
    }
}
