//! Anticipation-probability models: the exact enumeration-based posterior
//! and trained neural committee/anticipation networks.

pub mod encode;
pub mod nn;
pub mod train;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::core::{count, positives, Constraint, Dataset, Example, ProgramSpace};
use crate::domains::drawing::WindowCell;
use crate::domains::{nb_dfa, nb_draw, DfaSpace, DrawingSpace, OrderingSpace};
use crate::error::{Error, Result};
pub use encode::Arch;
pub use nn::{Adam, Grads, LayerWiring, Mlp, OutputKind, Target};
pub use train::{train_committee, ModelForm, TrainConfig, TrainSample};

/// Estimator of the probability that a program maps `x` to `y`, conditioned
/// on consistency with the selected subset.
pub trait Predictor<S: ProgramSpace + ?Sized> {
    fn predict(
        &self,
        subset: &Dataset<S::Input, S::Output>,
        x: &S::Input,
        y: &S::Output,
    ) -> Result<f64>;
}

impl<S: ProgramSpace + ?Sized, P: Predictor<S> + ?Sized> Predictor<S> for &P {
    fn predict(
        &self,
        subset: &Dataset<S::Input, S::Output>,
        x: &S::Input,
        y: &S::Output,
    ) -> Result<f64> {
        (**self).predict(subset, x, y)
    }
}

/// The exact posterior under a uniform program prior:
/// c(subset + (x,y)) / c(subset).
pub struct ExactPosterior<'a, S> {
    space: &'a S,
    cap: u64,
}

impl<'a, S: ProgramSpace> ExactPosterior<'a, S> {
    pub fn new(space: &'a S, cap: u64) -> Self {
        ExactPosterior { space, cap }
    }
}

impl<S: ProgramSpace> Predictor<S> for ExactPosterior<'_, S> {
    fn predict(
        &self,
        subset: &Dataset<S::Input, S::Output>,
        x: &S::Input,
        y: &S::Output,
    ) -> Result<f64> {
        exact_predict(self.space, subset, x, y, self.cap)
    }
}

/// Exact anticipation probability via two oracle counts. Errors when the
/// subset itself is unsatisfiable.
pub fn exact_predict<S: ProgramSpace + ?Sized>(
    space: &S,
    subset: &Dataset<S::Input, S::Output>,
    x: &S::Input,
    y: &S::Output,
    cap: u64,
) -> Result<f64> {
    let base = positives(subset);
    let c_subset = count(space, &base, cap)?;
    if c_subset == 0 {
        return Err(Error::UnsatisfiableSubset);
    }
    let mut extended = base;
    extended.push(Constraint::positive(Example::new(x.clone(), y.clone())));
    let c_ext = count(space, &extended, cap)?;
    debug_assert!(c_ext <= c_subset);
    Ok(c_ext as f64 / c_subset as f64)
}

/// A trained network plus everything needed to reuse it: architecture,
/// committee/anticipation form, and the training metadata.
#[derive(Debug, Clone)]
pub struct NeuralModel {
    pub mlp: Mlp,
    pub arch: Arch,
    pub form: ModelForm,
    pub meta: TrainMeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainMeta {
    pub form: ModelForm,
    pub params: Arch,
    pub lr: f64,
    pub samples: u64,
    pub batch: usize,
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
struct LayerFile {
    w: Vec<Vec<f64>>,
    b: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    arch: String,
    version: u32,
    layers: Vec<LayerFile>,
    meta: TrainMeta,
}

impl NeuralModel {
    /// Distribution over outputs (committee form), indexed false=0, true=1.
    pub fn committee_dist(&self, features: &[f64]) -> Result<Vec<f64>> {
        if self.form != ModelForm::Committee {
            return Err(Error::ShapeMismatch("model is not a committee network".into()));
        }
        self.mlp.predict_dist(features)
    }

    /// Plausibility of an encoded (neighbors, x, y) tuple (anticipation
    /// form), in (0, 1).
    pub fn anticipation_prob(&self, features: &[f64]) -> Result<f64> {
        if self.form != ModelForm::Anticipation {
            return Err(Error::ShapeMismatch("model is not an anticipation network".into()));
        }
        self.mlp.predict_prob(features)
    }

    /// Probability assigned to output `y` for the given query, whichever
    /// form the model has.
    fn prob_of(&self, committee_features: Option<Vec<f64>>, pair_features: Vec<f64>, y: bool) -> Result<f64> {
        match self.form {
            ModelForm::Committee => {
                let dist = self.mlp.predict_dist(&committee_features.expect("committee features"))?;
                Ok(dist[y as usize])
            }
            ModelForm::Anticipation => self.mlp.predict_prob(&pair_features),
        }
    }

    pub fn predict_ordering(
        &self,
        neighbors: &[Example<(u8, u8), bool>],
        x: &(u8, u8),
        y: bool,
    ) -> Result<f64> {
        let committee = match self.form {
            ModelForm::Committee => Some(self.arch.encode_ordering(neighbors, x, None)?),
            ModelForm::Anticipation => None,
        };
        let pair = self.arch.encode_ordering(neighbors, x, Some(y))?;
        self.prob_of(committee, pair, y)
    }

    pub fn predict_dfa(
        &self,
        neighbors: &[Example<String, bool>],
        x: &str,
        y: bool,
    ) -> Result<f64> {
        let committee = match self.form {
            ModelForm::Committee => Some(self.arch.encode_dfa(neighbors, x, None)?),
            ModelForm::Anticipation => None,
        };
        let pair = self.arch.encode_dfa(neighbors, x, Some(y))?;
        self.prob_of(committee, pair, y)
    }

    pub fn predict_draw(&self, window: &[WindowCell], y: bool) -> Result<f64> {
        let committee = match self.form {
            ModelForm::Committee => Some(self.arch.encode_draw(window, None)?),
            ModelForm::Anticipation => None,
        };
        let pair = self.arch.encode_draw(window, Some(y))?;
        self.prob_of(committee, pair, y)
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let file = ModelFile {
            arch: self.arch.id().to_string(),
            version: 1,
            layers: self
                .mlp
                .layers
                .iter()
                .map(|l| LayerFile {
                    w: l.w.chunks(l.in_dim).map(|r| r.to_vec()).collect(),
                    b: l.b.clone(),
                })
                .collect(),
            meta: self.meta.clone(),
        };
        let json = serde_json::to_string(&file)?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile {
            arch: self.arch.id().to_string(),
            version: 1,
            layers: self
                .mlp
                .layers
                .iter()
                .map(|l| LayerFile {
                    w: l.w.chunks(l.in_dim).map(|r| r.to_vec()).collect(),
                    b: l.b.clone(),
                })
                .collect(),
            meta: self.meta.clone(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        let json = std::fs::read_to_string(path)?;
        Self::from_json(&json)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(json)?;
        if file.version != 1 {
            return Err(Error::ShapeMismatch(format!("unknown model version {}", file.version)));
        }
        let arch = file.meta.params.clone();
        if arch.id() != file.arch {
            return Err(Error::ShapeMismatch(format!(
                "arch id {} does not match parameters {}",
                file.arch,
                arch.id()
            )));
        }
        let form = file.meta.form;
        let (input_dim, wirings, out) = match form {
            ModelForm::Committee => {
                (arch.committee_input_dim(), arch.committee_wirings(), OutputKind::Softmax)
            }
            ModelForm::Anticipation => {
                (arch.anticipation_input_dim(), arch.anticipation_wirings(), OutputKind::Sigmoid)
            }
        };
        if file.layers.len() != wirings.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} layers in file, architecture has {}",
                file.layers.len(),
                wirings.len()
            )));
        }
        let mut layers = Vec::with_capacity(wirings.len());
        let mut prev = 0usize;
        for (lf, wiring) in file.layers.into_iter().zip(&wirings) {
            let in_dim = prev + (wiring.raw_end - wiring.raw_start);
            if lf.w.len() != wiring.out_dim
                || lf.w.iter().any(|r| r.len() != in_dim)
                || lf.b.len() != wiring.out_dim
            {
                return Err(Error::ShapeMismatch("layer dimensions do not match".into()));
            }
            if lf.w.iter().flatten().chain(lf.b.iter()).any(|v| !v.is_finite()) {
                return Err(Error::ShapeMismatch("non-finite weight in model file".into()));
            }
            layers.push(nn::Dense {
                w: lf.w.into_iter().flatten().collect(),
                b: lf.b,
                in_dim,
                wiring: *wiring,
            });
            prev = wiring.out_dim;
        }
        Ok(NeuralModel {
            mlp: Mlp { layers, out, input_dim },
            arch,
            form,
            meta: file.meta,
        })
    }
}

/// A trained model adapted to the `Predictor` interface, applying the
/// domain's neighborhood function before encoding.
pub struct NnPredictor {
    pub model: NeuralModel,
}

impl NnPredictor {
    pub fn new(model: NeuralModel) -> Self {
        NnPredictor { model }
    }
}

impl Predictor<OrderingSpace> for NnPredictor {
    fn predict(&self, subset: &Dataset<(u8, u8), bool>, x: &(u8, u8), y: &bool) -> Result<f64> {
        self.model.predict_ordering(subset.examples(), x, *y)
    }
}

impl Predictor<DfaSpace> for NnPredictor {
    fn predict(&self, subset: &Dataset<String, bool>, x: &String, y: &bool) -> Result<f64> {
        let Arch::DfaFf { k, .. } = &self.model.arch else {
            return Err(Error::ShapeMismatch("model does not encode strings".into()));
        };
        let neighbors = nb_dfa(subset.examples(), x, *k);
        self.model.predict_dfa(&neighbors, x, *y)
    }
}

impl Predictor<DrawingSpace> for NnPredictor {
    fn predict(&self, subset: &Dataset<(u8, u8), bool>, x: &(u8, u8), y: &bool) -> Result<f64> {
        let Arch::DrawConv { window, width, height, .. } = self.model.arch else {
            return Err(Error::ShapeMismatch("model does not encode pixel windows".into()));
        };
        let cells = nb_draw(subset.examples(), width, height, x, window)?;
        self.model.predict_draw(&cells, *y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::count;

    #[test]
    fn exact_predict_symmetry_and_forcing() {
        let space = OrderingSpace::new(3).unwrap();
        let empty: Dataset<(u8, u8), bool> = Dataset::new();
        // No information: both orders equally likely.
        let p = exact_predict(&space, &empty, &(0, 1), &true, u64::MAX).unwrap();
        assert_eq!(p, 0.5);

        let chain = Dataset::from_examples(vec![
            Example::new((0u8, 1u8), true),
            Example::new((1u8, 2u8), true),
        ])
        .unwrap();
        // Transitivity forces (0,2).
        assert_eq!(exact_predict(&space, &chain, &(0, 2), &true, u64::MAX).unwrap(), 1.0);
        assert_eq!(exact_predict(&space, &chain, &(2, 0), &true, u64::MAX).unwrap(), 0.0);
    }

    #[test]
    fn exact_predict_unsatisfiable_subset() {
        let space = OrderingSpace::new(3).unwrap();
        let bad = Dataset::from_examples(vec![
            Example::new((0u8, 1u8), true),
            Example::new((1u8, 0u8), true),
        ])
        .unwrap();
        assert!(matches!(
            exact_predict(&space, &bad, &(0, 2), &true, u64::MAX),
            Err(Error::UnsatisfiableSubset)
        ));
    }

    #[test]
    fn exact_predict_is_a_count_ratio() {
        use rand::{Rng, SeedableRng};
        let space = OrderingSpace::new(4).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..30 {
            let hidden = space.params_from_ordinal(rng.gen_range(0..24));
            let mut subset: Dataset<(u8, u8), bool> = Dataset::new();
            for _ in 0..rng.gen_range(0..4) {
                let i = rng.gen_range(0..4u8);
                let mut j = rng.gen_range(0..4u8);
                while j == i {
                    j = rng.gen_range(0..4u8);
                }
                let out = space.evaluate(&hidden, &(i, j));
                let _ = subset.push(Example::new((i, j), out));
            }
            let x = (0u8, 3u8);
            if subset.contains_input(&x) {
                continue;
            }
            let y = rng.gen_bool(0.5);
            let p = exact_predict(&space, &subset, &x, &y, u64::MAX).unwrap();
            let base = positives(&subset);
            let c0 = count(&space, &base, u64::MAX).unwrap();
            let mut ext = base.clone();
            ext.push(Constraint::positive(Example::new(x, y)));
            let c1 = count(&space, &ext, u64::MAX).unwrap();
            // Integer identity: p * c(D') == c(D' + e) exactly.
            assert_eq!(p * c0 as f64, c1 as f64);
        }
    }
}
