//! JSON model files.
//!
//! ```json
//! {
//!   "dimension": 8,
//!   "metric": "standard",
//!   "hypercomplex": "standard",
//!   "structure_constants": [{"i": 1, "j": 2, "k": 3, "value": 0.5}],
//!   "tolerance": 1e-8
//! }
//! ```
//!
//! Indices are 1-based. An entry with i > j is read as its skew partner.
//! Matrices are row-major, nested or flat.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{HgError, Result};
use crate::model::{JacobiPolicy, LieAlgebraModel, PointModel, StructureConstants};
use crate::tensor::{standard_hypercomplex, ComplexStructure, Dim, HypercomplexTriple, Metric, Tensor3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Named(String),
    Nested(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TripleSpec {
    Named(String),
    Matrices([MatrixSpec; 3]),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub dimension: usize,
    pub metric: MatrixSpec,
    pub hypercomplex: TripleSpec,
    #[serde(default)]
    pub structure_constants: Vec<Entry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

fn matrix(spec: &MatrixSpec, d: usize, what: &str) -> Result<DMatrix<f64>> {
    match spec {
        MatrixSpec::Named(s) => Err(HgError::InvalidArgument(format!("{what}: unknown name {s:?}"))),
        MatrixSpec::Nested(rows) => {
            if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                return Err(HgError::InvalidArgument(format!("{what}: expected a {d}x{d} matrix")));
            }
            Ok(DMatrix::from_fn(d, d, |r, c| rows[r][c]))
        }
        MatrixSpec::Flat(v) => {
            if v.len() != d * d {
                return Err(HgError::InvalidArgument(format!(
                    "{what}: expected {} entries, found {}",
                    d * d,
                    v.len()
                )));
            }
            Ok(DMatrix::from_row_slice(d, d, v))
        }
    }
}

fn is_standard(s: &str) -> bool {
    s.eq_ignore_ascii_case("standard")
}

fn nested(m: &DMatrix<f64>) -> MatrixSpec {
    MatrixSpec::Nested(m.row_iter().map(|r| r.iter().copied().collect()).collect())
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    fn structure(&self, dim: Dim) -> Result<(Metric, HypercomplexTriple)> {
        let d = dim.ambient();
        let g = match &self.metric {
            MatrixSpec::Named(s) if is_standard(s) => Metric::standard(dim),
            spec => Metric::new(matrix(spec, d, "metric")?)?,
        };
        let h = match &self.hypercomplex {
            TripleSpec::Named(s) if is_standard(s) => standard_hypercomplex(dim),
            TripleSpec::Named(s) => return Err(HgError::InvalidArgument(format!("hypercomplex: unknown name {s:?}"))),
            TripleSpec::Matrices(ms) => {
                let [a, b, c] = ms;
                HypercomplexTriple::new(
                    ComplexStructure::new(matrix(a, d, "J1")?)?,
                    ComplexStructure::new(matrix(b, d, "J2")?)?,
                    ComplexStructure::new(matrix(c, d, "J3")?)?,
                )?
            }
        };
        Ok((g, h))
    }

    /// Skew-completes the listed entries.
    pub fn structure_constants(&self) -> Result<StructureConstants> {
        let d = self.dimension;
        let mut t = Tensor3::zeros(d);
        let mut set = vec![false; d * d * d];
        for e in &self.structure_constants {
            let (i, j, k) = (e.i, e.j, e.k);
            if [i, j, k].iter().any(|&x| x == 0 || x > d) {
                return Err(HgError::InvalidArgument(format!(
                    "structure constant index (i, j, k) = ({i}, {j}, {k}) out of range 1..={d}"
                )));
            }
            if i == j {
                if e.value != 0.0 {
                    return Err(HgError::NonSkew { i, j, k });
                }
                continue;
            }
            let (a, b, v) = if i < j { (i - 1, j - 1, e.value) } else { (j - 1, i - 1, -e.value) };
            let o = t.offset([a, b, k - 1]);
            if set[o] && t[[a, b, k - 1]] != v {
                return Err(HgError::NonSkew { i, j, k });
            }
            set[o] = true;
            t[[a, b, k - 1]] = v;
            t[[b, a, k - 1]] = -v;
        }
        StructureConstants::new(t)
    }

    pub fn into_model(&self, policy: JacobiPolicy) -> Result<LieAlgebraModel> {
        let dim = Dim::from_ambient(self.dimension)?;
        let (g, h) = self.structure(dim)?;
        LieAlgebraModel::new(self.structure_constants()?, g, h, policy)
    }

    pub fn from_model(m: &LieAlgebraModel, tolerance: Option<f64>) -> Self {
        let d = m.d();
        let metric = if *m.metric() == Metric::standard(m.dim()) {
            MatrixSpec::Named("standard".into())
        } else {
            nested(m.metric().components())
        };
        let h = m.hypercomplex();
        let hypercomplex = if *h == standard_hypercomplex(m.dim()) {
            TripleSpec::Named("standard".into())
        } else {
            TripleSpec::Matrices(std::array::from_fn(|a| nested(h.matrix(a))))
        };
        let c = m.structure_constants();
        let mut entries = Vec::new();
        for i in 0..d {
            for j in (i + 1)..d {
                for k in 0..d {
                    let value = c.get(i, j, k);
                    if value != 0.0 {
                        entries.push(Entry {
                            i: i + 1,
                            j: j + 1,
                            k: k + 1,
                            value,
                        });
                    }
                }
            }
        }
        Self {
            dimension: d,
            metric,
            hypercomplex,
            structure_constants: entries,
            tolerance,
        }
    }
}

/// Reads and validates a model file; returns the model and its tolerance, if any.
pub fn read_model(path: &Path) -> Result<(LieAlgebraModel, Option<f64>)> {
    let text = std::fs::read_to_string(path)?;
    let file = ModelFile::parse(&text)?;
    Ok((file.into_model(JacobiPolicy::Reject)?, file.tolerance))
}

pub fn write_model(path: &Path, m: &LieAlgebraModel, tolerance: Option<f64>) -> Result<()> {
    std::fs::write(path, ModelFile::from_model(m, tolerance).to_json()?)?;
    Ok(())
}

/// Point data: F₁ and F₂ as flat row-major arrays, (g, H) as in model files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointModelFile {
    pub dimension: usize,
    pub metric: MatrixSpec,
    pub hypercomplex: TripleSpec,
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
}

impl PointModelFile {
    pub fn from_point_model(p: &PointModel) -> Self {
        let shell = ModelFile::from_model(&LieAlgebraModel::abelian(p.dim()), None);
        let h = p.hypercomplex();
        let metric = if *p.metric() == Metric::standard(p.dim()) {
            shell.metric
        } else {
            nested(p.metric().components())
        };
        let hypercomplex = if *h == standard_hypercomplex(p.dim()) {
            shell.hypercomplex
        } else {
            TripleSpec::Matrices(std::array::from_fn(|a| nested(h.matrix(a))))
        };
        Self {
            dimension: p.dim().ambient(),
            metric,
            hypercomplex,
            f1: p.f1().as_slice().to_vec(),
            f2: p.f2().as_slice().to_vec(),
        }
    }

    pub fn into_point_model(&self) -> Result<PointModel> {
        let dim = Dim::from_ambient(self.dimension)?;
        let shell = ModelFile {
            dimension: self.dimension,
            metric: self.metric.clone(),
            hypercomplex: self.hypercomplex.clone(),
            structure_constants: Vec::new(),
            tolerance: None,
        };
        let (g, h) = shell.structure(dim)?;
        let d = dim.ambient();
        PointModel::new(g, h, Tensor3::from_vec(d, self.f1.clone())?, Tensor3::from_vec(d, self.f2.clone())?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::random_model;

    fn minimal(entries: &str) -> String {
        format!(r#"{{"dimension": 4, "metric": "standard", "hypercomplex": "standard", "structure_constants": [{entries}]}}"#)
    }

    #[test]
    fn abelian_file_parses() {
        let m = ModelFile::parse(&minimal("")).unwrap().into_model(JacobiPolicy::Reject).unwrap();
        assert_eq!(m.structure_constants().tensor().max_abs(), 0.0);
    }

    #[test]
    fn lower_entry_is_skew_partner() {
        let a = ModelFile::parse(&minimal(r#"{"i": 2, "j": 1, "k": 2, "value": 1.5}"#)).unwrap();
        let c = a.structure_constants().unwrap();
        assert_eq!(c.get(0, 1, 1), -1.5);
        assert_eq!(c.get(1, 0, 1), 1.5);
    }

    #[test]
    fn conflicting_entries_name_the_index() {
        let f = ModelFile::parse(&minimal(
            r#"{"i": 1, "j": 2, "k": 3, "value": 1.0}, {"i": 2, "j": 1, "k": 3, "value": 1.0}"#,
        ))
        .unwrap();
        match f.structure_constants() {
            Err(HgError::NonSkew { i: 2, j: 1, k: 3 }) => {}
            other => panic!("{other:?}"),
        }
        let f = ModelFile::parse(&minimal(r#"{"i": 3, "j": 3, "k": 1, "value": 2.0}"#)).unwrap();
        assert!(matches!(f.structure_constants(), Err(HgError::NonSkew { i: 3, j: 3, k: 1 })));
    }

    #[test]
    fn syntax_error_carries_location() {
        let err = ModelFile::parse("{\n  \"dimension\": 4,\n  oops\n}").unwrap_err();
        match err {
            HgError::Json(e) => assert_eq!(e.line(), 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn flat_and_nested_metric_agree() {
        let dim = Dim::new(1).unwrap();
        let g = Metric::standard(dim);
        let flat: Vec<f64> = g.components().transpose().iter().copied().collect();
        let a = ModelFile {
            metric: MatrixSpec::Flat(flat),
            ..ModelFile::from_model(&LieAlgebraModel::abelian(dim), None)
        };
        let b = ModelFile {
            metric: nested(g.components()),
            ..a.clone()
        };
        let (ga, _) = a.structure(dim).unwrap();
        let (gb, _) = b.structure(dim).unwrap();
        assert_eq!(ga, gb);
        assert_eq!(ga, g);
    }

    #[test]
    fn written_model_reparses_bit_identically() {
        for seed in 0..6 {
            let m = random_model(Dim::new(1 + (seed as usize % 2)).unwrap(), seed);
            let text = ModelFile::from_model(&m, Some(1e-9)).to_json().unwrap();
            let back = ModelFile::parse(&text).unwrap();
            assert_eq!(back.tolerance, Some(1e-9));
            let m2 = back.into_model(JacobiPolicy::Reject).unwrap();
            let a = m.structure_constants().tensor().as_slice();
            let b = m2.structure_constants().tensor().as_slice();
            assert!(a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }

    #[test]
    fn point_model_file_reparses() {
        let p = crate::model::sample_point_model(Dim::new(1).unwrap(), 4);
        let text = PointModelFile::from_point_model(&p).to_json().unwrap();
        let back: PointModelFile = serde_json::from_str(&text).unwrap();
        let q = back.into_point_model().unwrap();
        assert_eq!(q.f1(), p.f1());
        assert_eq!(q.f2(), p.f2());
    }
}
