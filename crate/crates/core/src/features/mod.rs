//! The feature catalog: named operations mapping a series to one scalar,
//! batch computation over a dataset, and special-value filtering.

pub mod ops;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::series::TimeSeries;
use crate::stats;
use crate::value::{FeatureValue, SpecialKind};
use crate::Result;

pub use ops::MotifPattern;

/// Which corner of the literature a feature comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureFamily {
    Distribution,
    Correlation,
    Spectral,
    Stationarity,
    Entropy,
    Motif,
    Trend,
    ModelFit,
}

impl FeatureFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            FeatureFamily::Distribution => "distribution",
            FeatureFamily::Correlation => "correlation",
            FeatureFamily::Spectral => "spectral",
            FeatureFamily::Stationarity => "stationarity",
            FeatureFamily::Entropy => "entropy",
            FeatureFamily::Motif => "motif",
            FeatureFamily::Trend => "trend",
            FeatureFamily::ModelFit => "model-fit",
        }
    }
}

/// Declared runtime scaling in the series length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostClass {
    Linear,
    Superlinear,
}

/// The concrete computation behind a descriptor, parameters included.
#[derive(Debug, Clone, PartialEq)]
enum FeatureKind {
    Trev { tau: usize },
    MotifFreq { pattern: MotifPattern },
    CumsumMedian,
    SpectralQ90Mel,
    StatAv { window: usize },
    ApproxEntropy { m: usize, r_frac: f64 },
    Acf { tau: usize },
    AcfFirstZero,
    AutoMutualInfo { tau: usize, bins: usize },
    EntropyHist { bins: usize },
    LempelZiv,
    Mean,
    Std,
    Skewness,
    Kurtosis,
    OutlierFrac { k: f64 },
    ArCoeff { order: usize, index: usize },
    ArResidRatio { order: usize },
}

/// One named operation in the catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureDescriptor {
    id: String,
    family: FeatureFamily,
    cost_class: CostClass,
    kind: FeatureKind,
}

impl FeatureDescriptor {
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn family(&self) -> FeatureFamily {
        self.family
    }

    pub fn cost_class(&self) -> CostClass {
        self.cost_class
    }

    /// Parameter map for reports; complete for the feature's formula.
    pub fn params(&self) -> BTreeMap<String, f64> {
        let mut p = BTreeMap::new();
        match &self.kind {
            FeatureKind::Trev { tau } | FeatureKind::Acf { tau } => {
                p.insert("tau".into(), *tau as f64);
            }
            FeatureKind::MotifFreq { pattern } => {
                // pattern encoded as 4 bits, up = 1, most significant first
                let code = pattern.0.iter().fold(0.0, |acc, s| {
                    acc * 2.0 + if *s == ops::Step::Up { 1.0 } else { 0.0 }
                });
                p.insert("pattern".into(), code);
            }
            FeatureKind::StatAv { window } => {
                p.insert("window".into(), *window as f64);
            }
            FeatureKind::ApproxEntropy { m, r_frac } => {
                p.insert("m".into(), *m as f64);
                p.insert("r_frac".into(), *r_frac);
            }
            FeatureKind::AutoMutualInfo { tau, bins } => {
                p.insert("tau".into(), *tau as f64);
                p.insert("bins".into(), *bins as f64);
            }
            FeatureKind::EntropyHist { bins } => {
                p.insert("bins".into(), *bins as f64);
            }
            FeatureKind::OutlierFrac { k } => {
                p.insert("k".into(), *k);
            }
            FeatureKind::ArCoeff { order, index } => {
                p.insert("order".into(), *order as f64);
                p.insert("index".into(), *index as f64);
            }
            FeatureKind::ArResidRatio { order } => {
                p.insert("order".into(), *order as f64);
            }
            FeatureKind::CumsumMedian
            | FeatureKind::SpectralQ90Mel
            | FeatureKind::AcfFirstZero
            | FeatureKind::LempelZiv
            | FeatureKind::Mean
            | FeatureKind::Std
            | FeatureKind::Skewness
            | FeatureKind::Kurtosis => {}
        }
        p
    }

    /// Apply the feature to raw series values.
    pub fn evaluate(&self, x: &[f64]) -> FeatureValue {
        match &self.kind {
            FeatureKind::Trev { tau } => ops::trev(x, *tau),
            FeatureKind::MotifFreq { pattern } => ops::motif_freq(x, *pattern),
            FeatureKind::CumsumMedian => ops::cumsum_median(x),
            FeatureKind::SpectralQ90Mel => ops::spectral_q90_mel(x),
            FeatureKind::StatAv { window } => ops::stat_av(x, *window),
            FeatureKind::ApproxEntropy { m, r_frac } => ops::approx_entropy(x, *m, *r_frac),
            FeatureKind::Acf { tau } => ops::acf(x, *tau),
            FeatureKind::AcfFirstZero => ops::acf_first_zero(x),
            FeatureKind::AutoMutualInfo { tau, bins } => ops::automutual_info(x, *tau, *bins),
            FeatureKind::EntropyHist { bins } => ops::entropy_hist(x, *bins),
            FeatureKind::LempelZiv => ops::lempel_ziv(x),
            FeatureKind::Mean => FeatureValue::from_f64(stats::mean(x)),
            FeatureKind::Std => FeatureValue::from_f64(stats::sample_std(x)),
            FeatureKind::Skewness => ops::skewness(x),
            FeatureKind::Kurtosis => ops::kurtosis(x),
            FeatureKind::OutlierFrac { k } => ops::outlier_frac(x, *k),
            FeatureKind::ArCoeff { order, index } => match ops::ar_fit(x, *order) {
                Some((coeffs, _)) => FeatureValue::from_f64(coeffs[*index]),
                None => FeatureValue::domain_error(),
            },
            FeatureKind::ArResidRatio { order } => match ops::ar_fit(x, *order) {
                Some((_, ratio)) => FeatureValue::from_f64(ratio),
                None => FeatureValue::domain_error(),
            },
        }
    }
}

/// The default catalog: roughly sixty features spanning distribution shape,
/// linear correlation, spectral content, stationarity, entropy/complexity,
/// local motifs, trend, and autoregressive fits.
pub fn default_catalog() -> Vec<FeatureDescriptor> {
    use CostClass::{Linear, Superlinear};
    use FeatureFamily::*;

    let mut cat = Vec::new();
    let mut push = |id: String, family, cost_class, kind| {
        cat.push(FeatureDescriptor {
            id,
            family,
            cost_class,
            kind,
        });
    };

    push("mean".into(), Distribution, Linear, FeatureKind::Mean);
    push("std".into(), Distribution, Linear, FeatureKind::Std);
    push("skewness".into(), Distribution, Linear, FeatureKind::Skewness);
    push("kurtosis".into(), Distribution, Linear, FeatureKind::Kurtosis);
    for k in [2.0, 3.0] {
        push(
            format!("outlier_frac_k{}", k as u32),
            Distribution,
            Linear,
            FeatureKind::OutlierFrac { k },
        );
    }
    for tau in 1..=10 {
        push(
            format!("acf_tau{tau}"),
            Correlation,
            Linear,
            FeatureKind::Acf { tau },
        );
    }
    push(
        "acf_first_zero".into(),
        Correlation,
        Superlinear,
        FeatureKind::AcfFirstZero,
    );
    for tau in [1, 2, 3] {
        push(
            format!("trev_tau{tau}"),
            Correlation,
            Linear,
            FeatureKind::Trev { tau },
        );
    }
    push(
        "spectral_q90_mel".into(),
        Spectral,
        Superlinear,
        FeatureKind::SpectralQ90Mel,
    );
    for window in [5, 10, 25] {
        push(
            format!("stat_av_l{window}"),
            Stationarity,
            Linear,
            FeatureKind::StatAv { window },
        );
    }
    push(
        "apen_m2_r02".into(),
        Entropy,
        Superlinear,
        FeatureKind::ApproxEntropy { m: 2, r_frac: 0.2 },
    );
    for tau in [1, 2, 3] {
        push(
            format!("ami_tau{tau}_b10"),
            Entropy,
            Linear,
            FeatureKind::AutoMutualInfo { tau, bins: 10 },
        );
    }
    for bins in [5, 10] {
        push(
            format!("entropy_hist_b{bins}"),
            Entropy,
            Linear,
            FeatureKind::EntropyHist { bins },
        );
    }
    push(
        "lempel_ziv".into(),
        Entropy,
        Superlinear,
        FeatureKind::LempelZiv,
    );
    for pattern in MotifPattern::all() {
        push(
            format!("motif4_{}", pattern.code()),
            Motif,
            Linear,
            FeatureKind::MotifFreq { pattern },
        );
    }
    push(
        "cumsum_median".into(),
        Trend,
        Linear,
        FeatureKind::CumsumMedian,
    );
    for order in 1..=3usize {
        for index in 0..order {
            push(
                format!("ar{}_a{}", order, index + 1),
                ModelFit,
                Linear,
                FeatureKind::ArCoeff { order, index },
            );
        }
        push(
            format!("ar{order}_resid_ratio"),
            ModelFit,
            Linear,
            FeatureKind::ArResidRatio { order },
        );
    }
    cat
}

/// Restrict a catalog to the given ids, in catalog order.
pub fn catalog_subset(
    catalog: &[FeatureDescriptor],
    ids: &[String],
) -> Result<Vec<FeatureDescriptor>> {
    for id in ids {
        if !catalog.iter().any(|d| d.id() == id.as_str()) {
            return Err(Error::UnknownFeature(id.clone()));
        }
    }
    Ok(catalog
        .iter()
        .filter(|d| ids.iter().any(|id| id.as_str() == d.id()))
        .cloned()
        .collect())
}

/// Stable fingerprint of a catalog (ids, families, cost classes, params),
/// recorded in reports so results name the exact feature set.
pub fn catalog_hash(catalog: &[FeatureDescriptor]) -> String {
    let mut text = String::new();
    for d in catalog {
        let _ = write!(text, "{}|{}|{:?}|", d.id(), d.family().as_str(), d.cost_class());
        for (k, v) in d.params() {
            let _ = write!(text, "{k}={v};");
        }
        text.push('\n');
    }
    let digest = Sha256::digest(text.as_bytes());
    digest[..6].iter().map(|b| format!("{b:02x}")).collect()
}

/// The series x feature table of computed values, with per-row labels so it
/// can round-trip through the CSV cache on its own.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    series_ids: Vec<String>,
    labels: Vec<String>,
    feature_ids: Vec<String>,
    cells: Vec<FeatureValue>, // row-major
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.series_ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.feature_ids.len()
    }

    pub fn series_ids(&self) -> &[String] {
        &self.series_ids
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn feature_ids(&self) -> &[String] {
        &self.feature_ids
    }

    pub fn get(&self, row: usize, col: usize) -> FeatureValue {
        self.cells[row * self.feature_ids.len() + col]
    }

    pub fn row(&self, row: usize) -> &[FeatureValue] {
        let w = self.feature_ids.len();
        &self.cells[row * w..(row + 1) * w]
    }

    pub fn col_index(&self, id: &str) -> Option<usize> {
        self.feature_ids.iter().position(|f| f == id)
    }

    pub fn column(&self, col: usize) -> impl Iterator<Item = FeatureValue> + '_ {
        let w = self.feature_ids.len();
        self.cells[col..].iter().step_by(w).copied()
    }

    /// Extract all-real columns for the given feature ids; errors if any
    /// requested column holds a special value.
    pub fn dense_columns(&self, ids: &[String]) -> Result<Vec<Vec<f64>>> {
        ids.iter()
            .map(|id| {
                let col = self
                    .col_index(id)
                    .ok_or_else(|| Error::UnknownFeature(id.clone()))?;
                self.column(col)
                    .map(|v| v.as_real().ok_or_else(|| Error::SpecialInColumn(id.clone())))
                    .collect()
            })
            .collect()
    }

    /// Values of the given feature ids for one row; `None` if any is special.
    pub fn row_values(&self, row: usize, ids: &[String]) -> Result<Option<Vec<f64>>> {
        let mut out = Vec::with_capacity(ids.len());
        for id in ids {
            let col = self
                .col_index(id)
                .ok_or_else(|| Error::UnknownFeature(id.clone()))?;
            match self.get(row, col) {
                FeatureValue::Real(v) => out.push(v),
                FeatureValue::Special(_) => return Ok(None),
            }
        }
        Ok(Some(out))
    }

    /// Write the CSV cache: `series_id,label,<feature ids...>`, one row per
    /// series, specials as the literal token `NA`. Reals are formatted with
    /// the shortest representation that parses back bit-exactly.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "series_id,label")?;
        for id in &self.feature_ids {
            write!(w, ",{id}")?;
        }
        writeln!(w)?;
        for r in 0..self.n_rows() {
            write!(w, "{},{}", self.series_ids[r], self.labels[r])?;
            for v in self.row(r) {
                match v {
                    FeatureValue::Real(x) => write!(w, ",{x}")?,
                    FeatureValue::Special(_) => write!(w, ",NA")?,
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Parse the CSV cache. `NA` comes back as a domain-error special (the
    /// cache does not preserve which kind of special was produced).
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut lines = BufReader::new(r).lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::EmptyInput("feature cache".into()))??;
        let mut fields = header.split(',');
        if fields.next() != Some("series_id") || fields.next() != Some("label") {
            return Err(Error::Parse {
                path: "feature cache".into(),
                line: 1,
                message: "header must start with series_id,label".into(),
            });
        }
        let feature_ids: Vec<String> = fields.map(String::from).collect();

        let mut series_ids = Vec::new();
        let mut labels = Vec::new();
        let mut cells = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let lineno = i + 2;
            let mut fields = line.split(',');
            let id = fields.next().unwrap_or_default();
            let label = fields.next().ok_or_else(|| Error::Parse {
                path: "feature cache".into(),
                line: lineno,
                message: "missing label field".into(),
            })?;
            let mut row = Vec::with_capacity(feature_ids.len());
            for tok in fields {
                if tok == "NA" {
                    row.push(FeatureValue::Special(SpecialKind::DomainError));
                } else {
                    let v: f64 = tok.parse().map_err(|_| Error::Parse {
                        path: "feature cache".into(),
                        line: lineno,
                        message: format!("bad numeric token {tok:?}"),
                    })?;
                    if !v.is_finite() {
                        return Err(Error::Parse {
                            path: "feature cache".into(),
                            line: lineno,
                            message: format!("non-finite value {tok:?}"),
                        });
                    }
                    row.push(FeatureValue::Real(v));
                }
            }
            if row.len() != feature_ids.len() {
                return Err(Error::Parse {
                    path: "feature cache".into(),
                    line: lineno,
                    message: format!(
                        "expected {} values, got {}",
                        feature_ids.len(),
                        row.len()
                    ),
                });
            }
            series_ids.push(id.to_string());
            labels.push(label.to_string());
            cells.extend(row);
        }
        if series_ids.is_empty() {
            return Err(Error::EmptyInput("feature cache".into()));
        }
        Ok(Self {
            series_ids,
            labels,
            feature_ids,
            cells,
        })
    }
}

/// Evaluate every catalog feature on every series. Rows are computed in
/// parallel; the result is identical to serial cell-by-cell evaluation, and
/// per-cell failures surface as specials without aborting the batch.
pub fn compute_matrix(
    catalog: &[FeatureDescriptor],
    series: &[TimeSeries],
) -> Result<FeatureMatrix> {
    if catalog.is_empty() {
        return Err(Error::EmptyInput("feature catalog".into()));
    }
    let cells: Vec<FeatureValue> = series
        .par_iter()
        .flat_map_iter(|s| {
            catalog
                .iter()
                .map(move |d| d.evaluate(s.values()))
        })
        .collect();
    Ok(FeatureMatrix {
        series_ids: series.iter().map(|s| s.id().to_string()).collect(),
        labels: series.iter().map(|s| s.label().to_string()).collect(),
        feature_ids: catalog.iter().map(|d| d.id().to_string()).collect(),
        cells,
    })
}

/// Ids of features whose column is special-free over the given matrix.
/// The caller picks the scope by choosing which rows went in (train-only
/// or train+test).
pub fn filter_special_values(matrix: &FeatureMatrix) -> Vec<String> {
    (0..matrix.n_cols())
        .filter(|&c| matrix.column(c).all(|v| v.is_real()))
        .map(|c| matrix.feature_ids()[c].clone())
        .collect()
}

/// Intersection of two valid-feature lists, preserving the first's order.
pub fn intersect_valid(a: &[String], b: &[String]) -> Vec<String> {
    a.iter().filter(|id| b.contains(id)).cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_ids_unique_and_sized() {
        let cat = default_catalog();
        let mut ids: Vec<_> = cat.iter().map(|d| d.id().to_string()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), cat.len());
        // "roughly sixty" features; the exact count is pinned so catalog
        // drift shows up in review
        assert_eq!(cat.len(), 57);
        assert!(cat.iter().any(|d| d.id() == "trev_tau3"));
        assert!(cat.iter().any(|d| d.id() == "motif4_dudu"));
    }

    #[test]
    fn catalog_hash_stable_and_sensitive() {
        let cat = default_catalog();
        assert_eq!(catalog_hash(&cat), catalog_hash(&default_catalog()));
        let trimmed = &cat[1..];
        assert_ne!(catalog_hash(&cat), catalog_hash(trimmed));
    }
}
