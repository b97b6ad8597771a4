//! Pooled-covariance linear discriminant classification over feature
//! subsets, with one-vs-one voting for multiclass problems.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::features::ops::solve_dense;
use crate::features::FeatureMatrix;
use crate::Result;

/// How class priors enter the discriminant offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorMode {
    /// Equal priors: single-feature thresholds sit at distribution
    /// midpoints.
    #[default]
    Uniform,
    /// Priors from training class frequencies.
    Empirical,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LdaOptions {
    pub priors: PriorMode,
}

/// One linear decision function between an unordered class pair.
/// `g(x) = weights . x + offset`; non-negative votes for `class_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseRule {
    pub class_a: usize,
    pub class_b: usize,
    pub weights: Vec<f64>,
    pub offset: f64,
}

impl PairwiseRule {
    fn discriminant(&self, row: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(row)
            .map(|(w, x)| w * x)
            .sum::<f64>()
            + self.offset
    }
}

/// A fitted discriminant: C*(C-1)/2 pairwise linear rules over the selected
/// features, sharing one pooled covariance estimate. Immutable once fitted.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearClassifier {
    feature_ids: Vec<String>,
    class_order: Vec<String>,
    pairwise_rules: Vec<PairwiseRule>,
    regularization: f64,
    priors: PriorMode,
}

/// Fit the discriminant from all-real feature columns and row labels.
///
/// The within-class covariance is pooled across all classes once (n - C
/// denominator) and reused for every pairwise rule, with a ridge term
/// lambda = 1e-8 * trace/d on the diagonal so rank-deficient feature sets
/// (duplicated columns, singleton classes) stay solvable.
pub fn fit_lda(
    columns: &[&[f64]],
    labels: &[String],
    feature_ids: &[String],
    opts: LdaOptions,
) -> Result<LinearClassifier> {
    let d = columns.len();
    if d == 0 || d != feature_ids.len() {
        return Err(Error::InvalidParameter(
            "need at least one feature column with a matching id".into(),
        ));
    }
    let n = labels.len();
    for col in columns {
        if col.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: col.len(),
            });
        }
    }

    let mut class_order: Vec<String> = labels.to_vec();
    class_order.sort();
    class_order.dedup();
    let c = class_order.len();
    if c < 2 {
        return Err(Error::TooFewClasses(c));
    }

    let class_of: Vec<usize> = labels
        .iter()
        .map(|l| class_order.binary_search(l).expect("label in class_order"))
        .collect();
    let mut counts = vec![0usize; c];
    for &cl in &class_of {
        counts[cl] += 1;
    }
    if let Some(missing) = counts.iter().position(|&n| n == 0) {
        return Err(Error::ClassMissing(class_order[missing].clone()));
    }

    // class means
    let mut means = vec![vec![0.0; d]; c];
    for (row, &cl) in class_of.iter().enumerate() {
        for (j, col) in columns.iter().enumerate() {
            means[cl][j] += col[row];
        }
    }
    for (mean, &count) in means.iter_mut().zip(&counts) {
        for v in mean.iter_mut() {
            *v /= count as f64;
        }
    }

    // pooled within-class covariance
    let mut sigma = vec![0.0; d * d];
    for (row, &cl) in class_of.iter().enumerate() {
        for i in 0..d {
            let di = columns[i][row] - means[cl][i];
            for j in i..d {
                let dj = columns[j][row] - means[cl][j];
                sigma[i * d + j] += di * dj;
            }
        }
    }
    let denom = if n > c { (n - c) as f64 } else { 1.0 };
    for i in 0..d {
        for j in i..d {
            sigma[i * d + j] /= denom;
            sigma[j * d + i] = sigma[i * d + j];
        }
    }

    let trace: f64 = (0..d).map(|i| sigma[i * d + i]).sum();
    let mut lambda = 1e-8 * trace / d as f64;
    if !(lambda > 0.0) {
        lambda = 1e-8;
    }
    for i in 0..d {
        sigma[i * d + i] += lambda;
    }

    let mut pairwise_rules = Vec::with_capacity(c * (c - 1) / 2);
    for a in 0..c {
        for b in a + 1..c {
            let mut lhs = sigma.clone();
            let mut rhs: Vec<f64> = (0..d).map(|j| means[a][j] - means[b][j]).collect();
            let weights = solve_dense(&mut lhs, &mut rhs, d).ok_or_else(|| {
                Error::Singular(format!(
                    "pooled covariance for pair ({}, {})",
                    class_order[a], class_order[b]
                ))
            })?;
            let midpoint: f64 = (0..d)
                .map(|j| weights[j] * (means[a][j] + means[b][j]))
                .sum::<f64>()
                / 2.0;
            let prior_shift = match opts.priors {
                PriorMode::Uniform => 0.0,
                PriorMode::Empirical => (counts[a] as f64 / counts[b] as f64).ln(),
            };
            pairwise_rules.push(PairwiseRule {
                class_a: a,
                class_b: b,
                weights,
                offset: prior_shift - midpoint,
            });
        }
    }

    Ok(LinearClassifier {
        feature_ids: feature_ids.to_vec(),
        class_order,
        pairwise_rules,
        regularization: lambda,
        priors: opts.priors,
    })
}

impl LinearClassifier {
    pub fn feature_ids(&self) -> &[String] {
        &self.feature_ids
    }

    pub fn class_order(&self) -> &[String] {
        &self.class_order
    }

    pub fn pairwise_rules(&self) -> &[PairwiseRule] {
        &self.pairwise_rules
    }

    pub fn regularization(&self) -> f64 {
        self.regularization
    }

    /// Assemble a classifier from parts (used by persistence and tests).
    pub fn from_parts(
        feature_ids: Vec<String>,
        class_order: Vec<String>,
        pairwise_rules: Vec<PairwiseRule>,
        regularization: f64,
        priors: PriorMode,
    ) -> Self {
        Self {
            feature_ids,
            class_order,
            pairwise_rules,
            regularization,
            priors,
        }
    }

    /// Evaluate every pairwise rule and return the class with the most
    /// votes. Vote ties break by the largest summed signed margin among the
    /// tied classes, then by class order.
    pub fn predict(&self, row: &[f64]) -> Result<&str> {
        if row.len() != self.feature_ids.len() {
            return Err(Error::DimensionMismatch {
                expected: self.feature_ids.len(),
                got: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "cannot score a row with non-finite values".into(),
            ));
        }
        let c = self.class_order.len();
        let mut votes = vec![0usize; c];
        let mut margins = vec![0.0f64; c];
        for rule in &self.pairwise_rules {
            let g = rule.discriminant(row);
            if g >= 0.0 {
                votes[rule.class_a] += 1;
            } else {
                votes[rule.class_b] += 1;
            }
            margins[rule.class_a] += g;
            margins[rule.class_b] -= g;
        }
        let best_votes = *votes.iter().max().expect("at least one class");
        let winner = (0..c)
            .filter(|&i| votes[i] == best_votes)
            .max_by(|&i, &j| {
                margins[i]
                    .total_cmp(&margins[j])
                    // prefer the earlier class on exact margin ties
                    .then(j.cmp(&i))
            })
            .expect("non-empty candidate set");
        Ok(&self.class_order[winner])
    }

    /// Misclassification rate over dense all-real columns.
    pub fn error_rate(&self, columns: &[&[f64]], labels: &[String]) -> Result<f64> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::EmptyInput("no rows to score".into()));
        }
        let mut row = vec![0.0; columns.len()];
        let mut errors = 0usize;
        for r in 0..n {
            for (j, col) in columns.iter().enumerate() {
                row[j] = col[r];
            }
            if self.predict(&row)? != labels[r] {
                errors += 1;
            }
        }
        Ok(errors as f64 / n as f64)
    }

    /// Score a feature matrix using this classifier's feature ids. Rows
    /// whose selected features hold special values cannot be scored and are
    /// counted as misclassified; their series ids are returned.
    pub fn score_matrix(&self, matrix: &FeatureMatrix) -> Result<ScoreReport> {
        let n = matrix.n_rows();
        if n == 0 {
            return Err(Error::EmptyInput("no rows to score".into()));
        }
        let mut errors = 0usize;
        let mut unscorable = Vec::new();
        for r in 0..n {
            match matrix.row_values(r, &self.feature_ids)? {
                Some(row) => {
                    if self.predict(&row)? != matrix.labels()[r] {
                        errors += 1;
                    }
                }
                None => {
                    unscorable.push(matrix.series_ids()[r].clone());
                    errors += 1;
                }
            }
        }
        Ok(ScoreReport {
            error_rate: errors as f64 / n as f64,
            unscorable,
        })
    }

    /// Persist as JSON with numbers carried as decimal strings of 17
    /// significant digits, so reloaded weights are bit-exact.
    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        let doc = ClassifierDoc {
            feature_ids: self.feature_ids.clone(),
            class_order: self.class_order.clone(),
            pairwise_rules: self
                .pairwise_rules
                .iter()
                .map(|r| RuleDoc {
                    class_a: self.class_order[r.class_a].clone(),
                    class_b: self.class_order[r.class_b].clone(),
                    weights: r.weights.iter().map(|v| format!("{v:.16e}")).collect(),
                    offset: format!("{:.16e}", r.offset),
                })
                .collect(),
            regularization: format!("{:.16e}", self.regularization),
            priors: self.priors,
        };
        serde_json::to_writer_pretty(w, &doc)?;
        Ok(())
    }

    pub fn read_json<R: Read>(r: R) -> Result<Self> {
        let doc: ClassifierDoc = serde_json::from_reader(r)?;
        let parse = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::InvalidParameter(format!("bad number {s:?}")))
        };
        let class_index = |name: &str| -> Result<usize> {
            doc.class_order
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| Error::InvalidParameter(format!("unknown class {name:?}")))
        };
        let mut rules = Vec::with_capacity(doc.pairwise_rules.len());
        for r in &doc.pairwise_rules {
            rules.push(PairwiseRule {
                class_a: class_index(&r.class_a)?,
                class_b: class_index(&r.class_b)?,
                weights: r
                    .weights
                    .iter()
                    .map(|s| parse(s))
                    .collect::<Result<Vec<f64>>>()?,
                offset: parse(&r.offset)?,
            });
        }
        Ok(Self {
            feature_ids: doc.feature_ids,
            class_order: doc.class_order,
            pairwise_rules: rules,
            regularization: parse(&doc.regularization)?,
            priors: doc.priors,
        })
    }
}

/// Outcome of scoring a matrix: the rate plus the ids that were counted as
/// errors because a selected feature came out special.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreReport {
    pub error_rate: f64,
    pub unscorable: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct ClassifierDoc {
    feature_ids: Vec<String>,
    class_order: Vec<String>,
    pairwise_rules: Vec<RuleDoc>,
    regularization: String,
    priors: PriorMode,
}

#[derive(Serialize, Deserialize)]
struct RuleDoc {
    class_a: String,
    class_b: String,
    weights: Vec<String>,
    offset: String,
}

/// Convenience: fit on the columns and report the resubstitution rate.
pub fn resubstitution_rate(
    columns: &[&[f64]],
    labels: &[String],
    feature_ids: &[String],
    opts: LdaOptions,
) -> Result<f64> {
    fit_lda(columns, labels, feature_ids, opts)?.error_rate(columns, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn labels(spec: &[(&str, usize)]) -> Vec<String> {
        spec.iter()
            .flat_map(|(l, n)| std::iter::repeat(l.to_string()).take(*n))
            .collect()
    }

    #[test]
    fn one_feature_threshold_at_midpoint() {
        // class A at {0, 0.1}, class B at {10, 10.1}: equal spreads, so the
        // boundary is the midpoint 5.05
        let col = [0.0, 0.1, 10.0, 10.1];
        let labels = labels(&[("A", 2), ("B", 2)]);
        let clf = fit_lda(
            &[&col],
            &labels,
            &["f".to_string()],
            LdaOptions::default(),
        )
        .unwrap();
        assert_eq!(clf.pairwise_rules().len(), 1);
        let rule = &clf.pairwise_rules()[0];
        let threshold = -rule.offset / rule.weights[0];
        assert_relative_eq!(threshold, 5.05, epsilon = 1e-9);
        assert_eq!(clf.predict(&[0.05]).unwrap(), "A");
        assert_eq!(clf.predict(&[7.0]).unwrap(), "B");
        assert_relative_eq!(clf.error_rate(&[&col], &labels).unwrap(), 0.0);
    }

    #[test]
    fn duplicated_column_matches_single_column_fit() {
        let col = [0.0, 1.0, 0.5, 9.0, 10.0, 9.5];
        let labels = labels(&[("A", 3), ("B", 3)]);
        let single = fit_lda(&[&col], &labels, &["f".into()], LdaOptions::default()).unwrap();
        let doubled = fit_lda(
            &[&col, &col],
            &labels,
            &["f".into(), "f2".into()],
            LdaOptions::default(),
        )
        .unwrap();
        for x in [-3.0, 0.2, 4.7, 5.0, 5.3, 12.0] {
            assert_eq!(
                single.predict(&[x]).unwrap(),
                doubled.predict(&[x, x]).unwrap(),
                "x = {x}"
            );
        }
    }

    #[test]
    fn two_class_voting_reduces_to_single_rule() {
        let c0 = [0.0, 1.0, 8.0, 9.0];
        let c1 = [1.0, 0.0, 1.0, 0.0];
        let labels = labels(&[("A", 2), ("B", 2)]);
        let clf = fit_lda(
            &[&c0, &c1],
            &labels,
            &["f0".into(), "f1".into()],
            LdaOptions::default(),
        )
        .unwrap();
        for row in [[0.4, 0.3], [7.5, 0.9], [4.4, 0.1]] {
            let rule = &clf.pairwise_rules()[0];
            let expected = if rule.discriminant(&row) >= 0.0 {
                "A"
            } else {
                "B"
            };
            assert_eq!(clf.predict(&row).unwrap(), expected);
        }
    }

    #[test]
    fn three_class_cycle_resolved_by_margin() {
        // constant discriminants build a vote cycle: A beats B by 1,
        // B beats C by 2, C beats A by 4; the summed margins are
        // A: 1-4 = -3, B: -1+2 = 1, C: 4-2 = 2, so C wins
        let rules = vec![
            PairwiseRule {
                class_a: 0,
                class_b: 1,
                weights: vec![0.0],
                offset: 1.0,
            },
            PairwiseRule {
                class_a: 0,
                class_b: 2,
                weights: vec![0.0],
                offset: -4.0,
            },
            PairwiseRule {
                class_a: 1,
                class_b: 2,
                weights: vec![0.0],
                offset: 2.0,
            },
        ];
        let clf = LinearClassifier::from_parts(
            vec!["f".into()],
            vec!["A".into(), "B".into(), "C".into()],
            rules,
            0.0,
            PriorMode::Uniform,
        );
        assert_eq!(clf.predict(&[0.0]).unwrap(), "C");
    }

    #[test]
    fn class_with_no_rows_is_an_error() {
        let col = [0.0, 1.0];
        let labels = vec!["A".to_string(), "A".to_string()];
        let err = fit_lda(&[&col], &labels, &["f".into()], LdaOptions::default());
        assert!(matches!(err, Err(Error::TooFewClasses(1))));
    }

    #[test]
    fn special_in_row_is_an_error() {
        let col = [0.0, 1.0, 10.0, 11.0];
        let labels = labels(&[("A", 2), ("B", 2)]);
        let clf = fit_lda(&[&col], &labels, &["f".into()], LdaOptions::default()).unwrap();
        assert!(clf.predict(&[f64::NAN]).is_err());
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let col = [0.0, 0.1, 0.7, 9.0, 10.0, 11.5];
        let labels = labels(&[("x", 3), ("y", 3)]);
        let clf = fit_lda(&[&col], &labels, &["f".into()], LdaOptions::default()).unwrap();
        let mut buf = Vec::new();
        clf.write_json(&mut buf).unwrap();
        let back = LinearClassifier::read_json(buf.as_slice()).unwrap();
        assert_eq!(clf, back);
    }
}
