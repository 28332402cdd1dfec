//! Class membership by thresholded residuals, projections of point data onto
//! class conditions, and the identity suite of W₁₃₃ = W₁(J₁) ∩ W₃(J₂) ∩ W₃(J₃).

use std::fmt;
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::constraints::Condition;
use crate::error::HgError;
use crate::model::{PointModel, PointModelSpace};
use crate::residual::{GatedResiduals, Residual, ResidualMap};
use crate::structural::{f_scale, square_norms};
use crate::tensor::{Dim, HypercomplexTriple, Metric, Tensor3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassLabel {
    G1J1,
    W1J1,
    W3J2,
    W3J3,
    W0J1,
    W0J2,
    W0J3,
    K,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; 8] = [
        ClassLabel::G1J1,
        ClassLabel::W1J1,
        ClassLabel::W3J2,
        ClassLabel::W3J3,
        ClassLabel::W0J1,
        ClassLabel::W0J2,
        ClassLabel::W0J3,
        ClassLabel::K,
    ];

    pub const W133: [ClassLabel; 3] = [ClassLabel::W1J1, ClassLabel::W3J2, ClassLabel::W3J3];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::G1J1 => "G1(J1)",
            ClassLabel::W1J1 => "W1(J1)",
            ClassLabel::W3J2 => "W3(J2)",
            ClassLabel::W3J3 => "W3(J3)",
            ClassLabel::W0J1 => "W0(J1)",
            ClassLabel::W0J2 => "W0(J2)",
            ClassLabel::W0J3 => "W0(J3)",
            ClassLabel::K => "K",
        }
    }

    /// The linear conditions on F-data defining the class.
    pub fn conditions(self) -> Vec<Condition> {
        match self {
            ClassLabel::G1J1 => vec![Condition::G1],
            ClassLabel::W1J1 => vec![Condition::W1],
            ClassLabel::W3J2 => vec![Condition::W3(1)],
            ClassLabel::W3J3 => vec![Condition::W3(2)],
            ClassLabel::W0J1 => vec![Condition::W0(0)],
            ClassLabel::W0J2 => vec![Condition::W0(1)],
            ClassLabel::W0J3 => vec![Condition::W0(2)],
            ClassLabel::K => vec![Condition::W0(0), Condition::W0(1), Condition::W0(2)],
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassLabel {
    type Err = HgError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s.chars().filter(|c| !c.is_whitespace() && *c != '(' && *c != ')').collect();
        ClassLabel::ALL
            .into_iter()
            .find(|l| l.as_str().replace(['(', ')'], "").eq_ignore_ascii_case(&norm))
            .ok_or_else(|| HgError::InvalidArgument(format!("unknown class label '{s}'")))
    }
}

/// A search or projection target: a set of labels, optionally demanding strictness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassTarget {
    pub labels: Vec<ClassLabel>,
    pub strict: bool,
}

impl ClassTarget {
    pub fn w133(strict: bool) -> Self {
        Self {
            labels: ClassLabel::W133.to_vec(),
            strict,
        }
    }

    pub fn conditions(&self) -> Vec<Condition> {
        self.labels.iter().flat_map(|l| l.conditions()).collect()
    }

    pub fn is_w133(&self) -> bool {
        ClassLabel::W133.iter().all(|l| self.labels.contains(l))
    }
}

impl FromStr for ClassTarget {
    type Err = HgError;

    /// Accepts `W133`, `W133-strict`, or a comma-separated list of labels.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "w133" => return Ok(Self::w133(false)),
            "w133-strict" | "w133strict" | "strict-w133" => return Ok(Self::w133(true)),
            _ => {}
        }
        let labels = t
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<ClassLabel>, _>>()?;
        if labels.is_empty() {
            return Err(HgError::InvalidArgument("empty class target".into()));
        }
        Ok(Self { labels, strict: false })
    }
}

impl fmt::Display for ClassTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_w133() && self.labels.len() == 3 {
            return f.write_str(if self.strict { "W133-strict" } else { "W133" });
        }
        let names: Vec<&str> = self.labels.iter().map(|l| l.as_str()).collect();
        f.write_str(&names.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassEntry {
    pub label: ClassLabel,
    pub residual: Residual,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub tol: f64,
    pub entries: Vec<ClassEntry>,
    /// In W₁₃₃ and in none of the W₀(J_α).
    pub strict: bool,
}

impl ClassificationReport {
    pub fn entry(&self, label: ClassLabel) -> &ClassEntry {
        self.entries
            .iter()
            .find(|e| e.label == label)
            .expect("every label is present")
    }

    pub fn residual(&self, label: ClassLabel) -> f64 {
        self.entry(label).residual.relative()
    }

    pub fn passes(&self, label: ClassLabel) -> bool {
        self.entry(label).pass
    }

    pub fn is_w133(&self) -> bool {
        ClassLabel::W133.iter().all(|&l| self.passes(l))
    }

    pub fn satisfies(&self, target: &ClassTarget) -> bool {
        target.labels.iter().all(|&l| self.passes(l)) && (!target.strict || self.strict)
    }

    /// The most specific summary: K, strict W133, W133, or the list of passing labels.
    pub fn summary(&self) -> String {
        if self.passes(ClassLabel::K) {
            "K".into()
        } else if self.strict {
            "W133 (strict)".into()
        } else if self.is_w133() {
            "W133".into()
        } else {
            let pass: Vec<&str> = self
                .entries
                .iter()
                .filter(|e| e.pass)
                .map(|e| e.label.as_str())
                .collect();
            if pass.is_empty() {
                "none".into()
            } else {
                pass.join(", ")
            }
        }
    }
}

/// Class residuals of F-data, each normalized by the largest F component.
pub fn class_residuals(f: &[Tensor3; 3], h: &HypercomplexTriple, tol: f64) -> ClassificationReport {
    let s = f_scale(f);
    let j1 = h.matrix(0);
    let f1 = &f[0];
    // (x, y, z) ↦ F₁(x,z,y) − F₁(J₁x,J₁z,y) − F₁(J₁z,J₁x,y) + F₁(z,x,y)
    let f1_xzy = f1.permuted([0, 2, 1]);
    let hyb = f1.substitute(0, j1).substitute(1, j1);
    let polar = &(&(&f1_xzy - &hyb.permuted([0, 2, 1])) - &hyb.permuted([2, 0, 1])) + &f1.permuted([2, 0, 1]);
    let raw = |label: ClassLabel| -> f64 {
        match label {
            ClassLabel::G1J1 => 0.5 * polar.max_abs(),
            ClassLabel::W1J1 => (f1 + &f1.permuted([1, 0, 2])).max_abs(),
            ClassLabel::W3J2 => f[1].cyclic_sum().max_abs(),
            ClassLabel::W3J3 => f[2].cyclic_sum().max_abs(),
            ClassLabel::W0J1 => f[0].max_abs(),
            ClassLabel::W0J2 => f[1].max_abs(),
            ClassLabel::W0J3 => f[2].max_abs(),
            ClassLabel::K => f_scale(f),
        }
    };
    let mut entries: Vec<ClassEntry> = ClassLabel::ALL
        .into_iter()
        .map(|label| {
            let residual = Residual::new(raw(label), s);
            ClassEntry {
                label,
                residual,
                pass: residual.passes(tol),
            }
        })
        .collect();
    // W₁ ⊂ G₁; the halved polarization is dominated by the W₁ residual, so
    // only rounding could separate the verdicts
    let w1 = entries[1].pass;
    entries[0].pass |= w1;
    let pass = |l: ClassLabel| entries.iter().any(|e| e.label == l && e.pass);
    let w133 = ClassLabel::W133.iter().all(|&l| pass(l));
    let any_w0 = [ClassLabel::W0J1, ClassLabel::W0J2, ClassLabel::W0J3]
        .iter()
        .any(|&l| pass(l));
    let strict = w133 && !any_w0;
    ClassificationReport { tol, entries, strict }
}

#[derive(Debug, Clone)]
pub struct Projection {
    pub model: PointModel,
    /// Dimension of the intersection of the requested class nullspaces.
    pub nullspace_dim: usize,
    /// The intersection is {0}.
    pub trivial_only: bool,
}

/// Euclidean orthogonal projection of (F₁, F₂) onto the requested classes.
pub fn project_to_classes(p: &PointModel, classes: &[ClassLabel]) -> Projection {
    let conds: Vec<Condition> = classes.iter().flat_map(|l| l.conditions()).collect();
    let space = PointModelSpace::new(p.metric(), p.hypercomplex(), &conds);
    let model = space.project(p);
    Projection {
        model,
        nullspace_dim: space.dim(),
        trivial_only: space.dim() == 0,
    }
}

/// Dimension of the space of admissible point data in all the given classes.
pub fn class_nullspace_dim(dim: Dim, classes: &[ClassLabel]) -> usize {
    let conds: Vec<Condition> = classes.iter().flat_map(|l| l.conditions()).collect();
    PointModelSpace::standard(dim, &conds).dim()
}

/// Identities of F-data in W₁₃₃, each as a residual normalized by the largest F component.
pub fn w133_identity_suite(f: &[Tensor3; 3], h: &HypercomplexTriple, tol: f64) -> GatedResiduals {
    let report = class_residuals(f, h, tol);
    let precondition_met = report.is_w133();
    if !precondition_met {
        warn!("identity suite evaluated on data outside W133");
    }
    let s = f_scale(f);
    let [j1, j2, j3] = [h.matrix(0), h.matrix(1), h.matrix(2)];
    let [f1, f2, f3] = [&f[0], &f[1], &f[2]];
    let mut out = ResidualMap::new();
    let mut eq = |label: &str, lhs: Tensor3, rhs: Tensor3| {
        out.insert(label, Residual::new((&lhs - &rhs).max_abs(), s));
    };
    let sub2 = |t: &Tensor3, a: usize, b: usize, m: &nalgebra::DMatrix<f64>| t.substitute(a, m).substitute(b, m);

    eq("F1(x,y,z) = -F1(y,x,z)", f1.clone(), -f1.permuted([1, 0, 2]));
    eq("F1(x,y,z) = -F1(J1x,J1y,z)", f1.clone(), -sub2(f1, 0, 1, j1));
    eq("F1(x,y,z) = -F1(J1x,y,J1z)", f1.clone(), -sub2(f1, 0, 2, j1));
    eq("F1(x,y,z) = -F1(x,J1y,J1z)", f1.clone(), -sub2(f1, 1, 2, j1));
    eq("F1(J1x,y,z) = F1(x,J1y,z)", f1.substitute(0, j1), f1.substitute(1, j1));
    eq("F1(x,J1y,z) = F1(x,y,J1z)", f1.substitute(1, j1), f1.substitute(2, j1));

    eq("F1(J2x,J2y,z) = -F1(J3x,J3y,z)", sub2(f1, 0, 1, j2), -sub2(f1, 0, 1, j3));
    eq("F1(J2x,y,J2z) = -F1(J3x,y,J3z)", sub2(f1, 0, 2, j2), -sub2(f1, 0, 2, j3));
    eq("F1(x,J2y,J2z) = -F1(x,J3y,J3z)", sub2(f1, 1, 2, j2), -sub2(f1, 1, 2, j3));
    eq("F2(x,y,z) = F2(x,J1y,J1z)", f2.clone(), sub2(f2, 1, 2, j1));
    eq("F2(x,y,z) = F2(x,J3y,J3z)", f2.clone(), sub2(f2, 1, 2, j3));
    eq("F3(x,y,z) = F3(x,J1y,J1z)", f3.clone(), sub2(f3, 1, 2, j1));
    eq("F3(x,y,z) = F3(x,J2y,J2z)", f3.clone(), sub2(f3, 1, 2, j2));

    eq(
        "F1(J2x,J3y,z) = F1(J3x,J2y,z)",
        f1.substitute(0, j2).substitute(1, j3),
        f1.substitute(0, j3).substitute(1, j2),
    );
    eq(
        "F1(J2x,y,J3z) = F1(J3x,y,J2z)",
        f1.substitute(0, j2).substitute(2, j3),
        f1.substitute(0, j3).substitute(2, j2),
    );
    eq(
        "F1(x,J2y,J3z) = F1(x,J3y,J2z)",
        f1.substitute(1, j2).substitute(2, j3),
        f1.substitute(1, j3).substitute(2, j2),
    );
    eq("F2(x,y,J1z) = -F2(x,J1y,z)", f2.substitute(2, j1), -f2.substitute(1, j1));
    eq("F2(x,y,J3z) = -F2(x,J3y,z)", f2.substitute(2, j3), -f2.substitute(1, j3));
    eq("F3(x,y,J1z) = -F3(x,J1y,z)", f3.substitute(2, j1), -f3.substitute(1, j1));
    eq("F3(x,y,J2z) = -F3(x,J2y,z)", f3.substitute(2, j2), -f3.substitute(1, j2));

    eq(
        "2F2(x,y,z) = F1(x,y,J3z) - F1(x,J3y,z)",
        f2.scaled(2.0),
        &f1.substitute(2, j3) - &f1.substitute(1, j3),
    );
    eq(
        "2F3(x,y,z) = F1(x,J2y,z) - F1(x,y,J2z)",
        f3.scaled(2.0),
        &f1.substitute(1, j2) - &f1.substitute(2, j2),
    );
    eq("F2(x,y,z) = -F3(J1x,y,z)", f2.clone(), -f3.substitute(0, j1));
    eq(
        "F1(x,y,J1z) + F2(x,y,J2z) + F3(x,y,J3z) = 0",
        &(&f1.substitute(2, j1) + &f2.substitute(2, j2)) + &f3.substitute(2, j3),
        Tensor3::zeros(f1.dim()),
    );
    GatedResiduals {
        residuals: out,
        precondition_met,
    }
}

/// ‖∇J₂‖² = ‖∇J₃‖² and ‖∇J₁‖² = −2‖∇J₂‖² = −2‖∇J₃‖², from F-data alone.
/// Normalized by the largest Frobenius² of the F_α.
pub fn w133_norm_relations(f: &[Tensor3; 3], g: &Metric) -> ResidualMap {
    let [n1, n2, n3] = square_norms(f, g);
    let scale = f.iter().map(|t| t.frobenius().powi(2)).fold(0.0, f64::max);
    let mut out = ResidualMap::new();
    out.insert("|nabla J2|^2 = |nabla J3|^2", Residual::new((n2 - n3).abs(), scale));
    out.insert("|nabla J1|^2 = -2|nabla J2|^2", Residual::new((n1 + 2.0 * n2).abs(), scale));
    out.insert("|nabla J1|^2 = -2|nabla J3|^2", Residual::new((n1 + 2.0 * n3).abs(), scale));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionAdvisory {
    pub ambient: usize,
    pub target: String,
    pub nullspace_dim: usize,
    pub message: Option<String>,
}

/// Nullspace dimension of the target classes in admissible point data, with
/// an advisory when W₁₃₃ collapses (below dimension 8).
pub fn dimension_gate(dim: Dim, target: &ClassTarget) -> DimensionAdvisory {
    let nullspace_dim = class_nullspace_dim(dim, &target.labels);
    let message = if target.is_w133() && dim.ambient() < 8 {
        Some("class collapses below dimension 8".to_string())
    } else if nullspace_dim == 0 {
        Some("only zero F-data is admissible".to_string())
    } else {
        None
    };
    DimensionAdvisory {
        ambient: dim.ambient(),
        target: target.to_string(),
        nullspace_dim,
        message,
    }
}
