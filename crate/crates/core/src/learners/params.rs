use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Bool(bool),
    Number(f64),
    Text(String),
}

impl From<f64> for ParamValue {
    fn from(v: f64) -> Self {
        ParamValue::Number(v)
    }
}

impl From<usize> for ParamValue {
    fn from(v: usize) -> Self {
        ParamValue::Number(v as f64)
    }
}

impl From<bool> for ParamValue {
    fn from(v: bool) -> Self {
        ParamValue::Bool(v)
    }
}

impl From<&str> for ParamValue {
    fn from(v: &str) -> Self {
        ParamValue::Text(v.to_string())
    }
}

/// Hyperparameter overrides keyed by name.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Hyperparams(BTreeMap<String, ParamValue>);

impl Hyperparams {
    pub fn insert(&mut self, key: &str, value: ParamValue) {
        self.0.insert(key.to_string(), value);
    }

    pub fn get(&self, key: &str) -> Option<&ParamValue> {
        self.0.get(key)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn reader<'a>(&'a self, learner: &'a str, allowed: &[&str]) -> Result<Reader<'a>> {
        if let Some(k) = self.0.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::hyper(learner, format!("unknown hyperparameter {k:?}")));
        }
        Ok(Reader {
            learner,
            params: self,
        })
    }
}

pub(crate) struct Reader<'a> {
    learner: &'a str,
    params: &'a Hyperparams,
}

impl Reader<'_> {
    pub fn f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.params.get(key) {
            None => Ok(default),
            Some(ParamValue::Number(v)) if v.is_finite() => Ok(*v),
            Some(other) => Err(Error::hyper(
                self.learner,
                format!("{key} must be a finite number, got {other:?}"),
            )),
        }
    }

    pub fn f64_in(&self, key: &str, default: f64, lo: f64, hi: f64) -> Result<f64> {
        let v = self.f64(key, default)?;
        if !(lo..=hi).contains(&v) {
            return Err(Error::hyper(
                self.learner,
                format!("{key} = {v} outside [{lo}, {hi}]"),
            ));
        }
        Ok(v)
    }

    pub fn count(&self, key: &str, default: usize, min: usize) -> Result<usize> {
        let v = match self.params.get(key) {
            None => return Ok(default.max(min)),
            Some(ParamValue::Number(v)) => *v,
            Some(other) => {
                return Err(Error::hyper(
                    self.learner,
                    format!("{key} must be an integer, got {other:?}"),
                ))
            }
        };
        if v.fract() != 0.0 || v < min as f64 || !v.is_finite() {
            return Err(Error::hyper(
                self.learner,
                format!("{key} must be an integer >= {min}, got {v}"),
            ));
        }
        Ok(v as usize)
    }

    pub fn optional_count(&self, key: &str, min: usize) -> Result<Option<usize>> {
        match self.params.get(key) {
            None => Ok(None),
            Some(_) => self.count(key, min, min).map(Some),
        }
    }

    pub fn bool(&self, key: &str, default: bool) -> Result<bool> {
        match self.params.get(key) {
            None => Ok(default),
            Some(ParamValue::Bool(b)) => Ok(*b),
            Some(other) => Err(Error::hyper(
                self.learner,
                format!("{key} must be a boolean, got {other:?}"),
            )),
        }
    }

    pub fn text<'b>(&'b self, key: &str, default: &'b str) -> Result<&'b str> {
        match self.params.get(key) {
            None => Ok(default),
            Some(ParamValue::Text(s)) => Ok(s),
            Some(other) => Err(Error::hyper(
                self.learner,
                format!("{key} must be a string, got {other:?}"),
            )),
        }
    }
}
