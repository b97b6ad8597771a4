use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// One labeled, uniformly sampled, univariate time series. Values are
/// finite and the length is fixed at construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    id: String,
    label: String,
    values: Vec<f64>,
}

impl TimeSeries {
    /// Requires at least two finite values.
    pub fn new(
        id: impl Into<String>,
        label: impl Into<String>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let id = id.into();
        if values.len() < 2 {
            return Err(Error::InvalidSeries {
                id,
                message: format!("length {} < 2", values.len()),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSeries {
                id,
                message: format!("non-finite value at index {pos}"),
            });
        }
        Ok(Self {
            id,
            label: label.into(),
            values,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // length >= 2 by construction
    }
}

/// A named train/test collection sharing one class set.
///
/// `classes` is the lexicographically ordered union of labels seen in either
/// split, which makes every "first/lowest" tie-break in the crate
/// deterministic.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dataset {
    name: String,
    train: Vec<TimeSeries>,
    test: Vec<TimeSeries>,
    classes: Vec<String>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, train: Vec<TimeSeries>, test: Vec<TimeSeries>) -> Self {
        let classes: BTreeSet<&str> = train
            .iter()
            .chain(&test)
            .map(|s| s.label())
            .collect();
        let classes = classes.into_iter().map(String::from).collect();
        Self {
            name: name.into(),
            train,
            test,
            classes,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn train(&self) -> &[TimeSeries] {
        &self.train
    }

    pub fn test(&self) -> &[TimeSeries] {
        &self.test
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    /// Labels that occur in the test split but never in training. Such
    /// series can never be predicted correctly; callers may want to warn.
    pub fn labels_missing_from_train(&self) -> Vec<String> {
        let train_labels: BTreeSet<&str> = self.train.iter().map(|s| s.label()).collect();
        self.classes
            .iter()
            .filter(|c| !train_labels.contains(c.as_str()))
            .cloned()
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(id: &str, label: &str, values: &[f64]) -> TimeSeries {
        TimeSeries::new(id, label, values.to_vec()).unwrap()
    }

    #[test]
    fn rejects_non_finite_and_short() {
        assert!(TimeSeries::new("a", "1", vec![1.0]).is_err());
        assert!(TimeSeries::new("a", "1", vec![1.0, f64::NAN]).is_err());
        assert!(TimeSeries::new("a", "1", vec![1.0, f64::INFINITY]).is_err());
        assert!(TimeSeries::new("a", "1", vec![1.0, 2.0]).is_ok());
    }

    #[test]
    fn classes_are_sorted_union() {
        let d = Dataset::new(
            "toy",
            vec![ts("t0", "b", &[0.0, 1.0]), ts("t1", "a", &[0.0, 1.0])],
            vec![ts("e0", "c", &[0.0, 1.0])],
        );
        assert_eq!(d.classes(), &["a", "b", "c"]);
        assert_eq!(d.labels_missing_from_train(), vec!["c".to_string()]);
    }
}
