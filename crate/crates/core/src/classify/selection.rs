use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Classifier, ClassifierKind, Model};
use crate::dataset::{Dataset, FeatureKind, Observation};
use crate::error::{Error, Result};

/// Where the discrete context value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContextKey {
    /// A discrete feature column (its code).
    Column(usize),
    /// The observation's group tag.
    Group,
}

impl ContextKey {
    fn value(self, obs: &Observation) -> Option<u32> {
        match self {
            ContextKey::Column(c) => obs.features.get(c).map(|&v| v as u32),
            ContextKey::Group => obs.group,
        }
    }
}

/// One specialised classifier per context value plus a global fallback.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionModel {
    key: ContextKey,
    specialised: BTreeMap<u32, Model>,
    fallback: Model,
}

impl SelectionModel {
    /// Groups with fewer rows than there are classes are left to the fallback.
    pub fn fit(train: &Dataset, key: ContextKey, base: ClassifierKind) -> Result<SelectionModel> {
        if let ContextKey::Column(c) = key {
            let col = train
                .schema()
                .columns()
                .get(c)
                .ok_or_else(|| Error::UnknownColumn(format!("#{c}")))?;
            if col.kind != FeatureKind::Discrete {
                return Err(Error::Config(format!(
                    "selection column `{}` must be discrete",
                    col.name
                )));
            }
        }
        let fallback = base.fit(train)?;
        let mut values: Vec<u32> = train
            .observations()
            .iter()
            .filter_map(|o| key.value(o))
            .collect();
        values.sort_unstable();
        values.dedup();
        let min_rows = train.schema().n_classes();
        let mut specialised = BTreeMap::new();
        for v in values {
            let subset = train.filter(|o| key.value(o) == Some(v));
            if subset.len() >= min_rows {
                specialised.insert(v, base.fit(&subset)?);
            }
        }
        Ok(SelectionModel {
            key,
            specialised,
            fallback,
        })
    }

    pub fn contexts(&self) -> Vec<u32> {
        self.specialised.keys().copied().collect()
    }

    pub fn fallback(&self) -> &Model {
        &self.fallback
    }

    pub fn model_for(&self, context: Option<u32>) -> &Model {
        context
            .and_then(|c| self.specialised.get(&c))
            .unwrap_or(&self.fallback)
    }

    /// Predicts with the specialised classifier for `context`, or the fallback.
    pub fn predict_in_context(&self, obs: &Observation, context: Option<u32>) -> Result<usize> {
        self.model_for(context).predict(obs)
    }
}

impl Classifier for SelectionModel {
    fn n_classes(&self) -> usize {
        self.fallback.n_classes()
    }

    fn n_features(&self) -> usize {
        self.fallback.n_features()
    }

    fn predict(&self, obs: &Observation) -> Result<usize> {
        self.predict_in_context(obs, self.key.value(obs))
    }
}
