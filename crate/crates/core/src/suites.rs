//! Reports for a model: classification, identity suites, connection and
//! curvature, and the rank facts of a dimension.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classify::{
    class_nullspace_dim, class_residuals, w133_identity_suite, w133_norm_relations, ClassLabel, ClassificationReport,
};
use crate::connection::{natural_skew_deformation_dim, ConnectionAnalysis};
use crate::curvature::{kahler_like_nullspace_standard, CurvatureAnalysis, KahlerConstraints, Trichotomy};
use crate::error::HgError;
use crate::model::{LieAlgebraModel, PointModelSpace};
use crate::report::{Report, Section};
use crate::residual::{GatedResiduals, Residual, ResidualMap, CURVATURE_TOL_FACTOR};
use crate::structural::{fundamental_identity_residuals, nijenhuis, square_norms, structural_f_via_forms, LieGeometry};
use crate::tensor::{check_structure, standard_hypercomplex, Dim, Metric};

pub const CLASS_PRECONDITION: &str = "class precondition";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Identities,
    Connection,
    Curvature,
    All,
}

impl FromStr for Suite {
    type Err = HgError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "identities" => Ok(Suite::Identities),
            "connection" => Ok(Suite::Connection),
            "curvature" => Ok(Suite::Curvature),
            "all" => Ok(Suite::All),
            other => Err(HgError::InvalidArgument(format!("unknown suite {other:?}"))),
        }
    }
}

/// Everything computed once per model.
pub struct Analysis<'a> {
    pub model: &'a LieAlgebraModel,
    pub tol: f64,
    pub geo: LieGeometry,
    pub classes: ClassificationReport,
}

impl<'a> Analysis<'a> {
    pub fn new(model: &'a LieAlgebraModel, tol: f64) -> Self {
        let geo = LieGeometry::new(model);
        let classes = class_residuals(&geo.f, model.hypercomplex(), tol);
        Self {
            model,
            tol,
            geo,
            classes,
        }
    }

    pub fn connection(&self) -> ConnectionAnalysis {
        ConnectionAnalysis::new(self.model, &self.geo, &self.classes)
    }

    pub fn curvature(&self, conn: &ConnectionAnalysis) -> CurvatureAnalysis {
        CurvatureAnalysis::new(self.model, &self.geo, conn, &self.classes)
    }

    fn structure_section(&self) -> Section {
        let mut checks = check_structure(self.model.metric(), self.model.hypercomplex()).unwrap_or_default();
        checks.insert("Jacobi identity", self.model.structure_constants().jacobi_residual());
        Section::new("structure").residuals(&checks, self.tol)
    }

    fn classes_section(&self) -> Section {
        let mut s = Section::new("classes");
        for e in &self.classes.entries {
            s = s.info(e.label.as_str(), Some(e.residual.relative()), if e.pass { "in" } else { "out" });
        }
        s.text("class", self.classes.summary())
    }

    pub fn classify_report(&self) -> Report {
        let mut r = Report::new("classification", self.tol);
        r.push(self.structure_section());
        r.push(self.classes_section());
        let norms = square_norms(&self.geo.f, self.model.metric());
        let mut info = Section::new("invariants");
        for (a, v) in norms.iter().enumerate() {
            info = info.value(format!("|nabla J{}|^2", a + 1), *v);
        }
        let nj = nijenhuis(self.model, self.model.hypercomplex().j(0));
        info = info.value("max |N_J1|", nj.tensor.max_abs());
        r.push(info);
        r
    }

    fn identity_sections(&self) -> Vec<Section> {
        let h = self.model.hypercomplex();
        let mut routes = ResidualMap::new();
        for a in 0..3 {
            let other = structural_f_via_forms(self.model, &self.geo.gamma, a);
            routes.insert(format!("F{} via nabla J = via nabla g{}", a + 1, a + 1), self.geo.f[a].residual_against(&other));
        }
        let mut out = vec![
            Section::new("structural tensors")
                .residuals(&routes, self.tol)
                .residuals(&fundamental_identity_residuals(&self.geo.f, h), self.tol),
            Section::new("Ricci identity").residuals(
                &crate::curvature::ricci_identity_residual(&self.geo.gamma, &self.geo.r, &self.geo.f, h),
                self.tol * CURVATURE_TOL_FACTOR,
            ),
        ];
        let mut suite = w133_identity_suite(&self.geo.f, h, self.tol);
        suite.residuals.extend(w133_norm_relations(&self.geo.f, self.model.metric()));
        suite.precondition_met = self.classes.is_w133();
        out.push(Section::new("W133 identities").gated(&suite, self.tol, CLASS_PRECONDITION));
        out
    }

    fn connection_sections(&self, conn: &ConnectionAnalysis) -> Vec<Section> {
        vec![
            Section::new("connection (any model)").residuals(&conn.universal, self.tol),
            Section::new("KT-potentials").gated(&conn.potentials, self.tol, CLASS_PRECONDITION),
            Section::new("connection D on W133").gated(&conn.w133, self.tol * CURVATURE_TOL_FACTOR, CLASS_PRECONDITION),
        ]
    }

    fn curvature_sections(&self, curv: &CurvatureAnalysis) -> Vec<Section> {
        let ct = self.tol * CURVATURE_TOL_FACTOR;
        let mut out = vec![
            Section::new("curvature (any model)").residuals(&curv.universal, ct),
            Section::new("nearly Kahler curvature").gated(&curv.nearly_kahler, ct, CLASS_PRECONDITION),
            Section::new("hypercomplex curvature").gated(&curv.hyper, ct, CLASS_PRECONDITION),
            Section::new("scalar curvatures").gated(&curv.scalar_relations, ct, CLASS_PRECONDITION),
            Section::new("curvature of D").gated(&curv.kr, ct, CLASS_PRECONDITION),
        ];
        let t = &curv.trichotomy;
        let branch = GatedResiduals {
            residuals: t.branch.clone(),
            precondition_met: self.classes.is_w133(),
        };
        let mut s = Section::new("strong / weak / flat");
        if self.classes.is_w133() {
            s = s.text("verdict", t.verdict.as_str());
        } else {
            s = s.skipped("verdict", CLASS_PRECONDITION);
        }
        s = s.gated(&branch, ct, CLASS_PRECONDITION);
        out.push(s);
        out
    }

    pub fn verify_report(&self, suite: Suite) -> Report {
        let mut r = Report::new(format!("verification ({})", format!("{suite:?}").to_lowercase()), self.tol);
        r.push(self.structure_section());
        r.push(Section::new("class").text("class", self.classes.summary()));
        if matches!(suite, Suite::Identities | Suite::All) {
            self.identity_sections().into_iter().for_each(|s| r.push(s));
        }
        if matches!(suite, Suite::Connection | Suite::Curvature | Suite::All) {
            let conn = self.connection();
            if matches!(suite, Suite::Connection | Suite::All) {
                self.connection_sections(&conn).into_iter().for_each(|s| r.push(s));
            }
            if matches!(suite, Suite::Curvature | Suite::All) {
                let curv = self.curvature(&conn);
                self.curvature_sections(&curv).into_iter().for_each(|s| r.push(s));
            }
        }
        r
    }

    pub fn connection_report(&self) -> Report {
        let conn = self.connection();
        let mut r = Report::new("connection", self.tol);
        r.push(Section::new("class").text("class", self.classes.summary()));
        let g = self.model.metric();
        r.push(
            Section::new("tensors")
                .value("max |Q|", conn.phkt.potential().tensor().max_abs())
                .value("max |D|", conn.d.tensor().max_abs())
                .value("max |T|", conn.torsion.tensor().max_abs())
                .value("|T|^2", conn.torsion.square_norm(g))
                .value("T total antisymmetry", conn.torsion.antisymmetry_residual().relative()),
        );
        self.connection_sections(&conn).into_iter().for_each(|s| r.push(s));
        r
    }

    pub fn curvature_report(&self) -> Report {
        let conn = self.connection();
        let curv = self.curvature(&conn);
        let mut r = Report::new("curvature", self.tol);
        r.push(Section::new("class").text("class", self.classes.summary()));
        let sc = &curv.scalars;
        let t = &curv.trichotomy;
        r.push(
            Section::new("scalars")
                .value("tau", sc.tau)
                .value("tau**1", sc.tau_star[0])
                .value("tau**2", sc.tau_star[1])
                .value("tau**3", sc.tau_star[2])
                .value("tau^D", sc.tau_d)
                .value("|nabla J1|^2", sc.nabla_j_norms[0])
                .value("|nabla J2|^2", sc.nabla_j_norms[1])
                .value("|nabla J3|^2", sc.nabla_j_norms[2])
                .value("|T|^2", sc.torsion_norm),
        );
        r.push(
            Section::new("magnitudes")
                .value("max |S A1|", t.s_a1)
                .value("max |nabla T|", t.nabla_t)
                .value("max |K|", t.k)
                .value("max |R|", t.r)
                .value("max(|K|,|R|) / |S A1|", t.coherence),
        );
        self.curvature_sections(&curv).into_iter().for_each(|s| r.push(s));
        r
    }

    /// True when the model is strictly W133 and its D is not flat.
    pub fn is_weak(&self) -> Option<bool> {
        if !self.classes.is_w133() {
            return None;
        }
        let conn = self.connection();
        Some(self.curvature(&conn).trichotomy.verdict == Trichotomy::Weak)
    }
}

/// Rank facts of the standard structure in dimension 4n.
pub fn nullspace_report(dim: Dim) -> Report {
    use ClassLabel::*;
    let mut r = Report::new(format!("nullspace dimensions, dim {}", dim.ambient()), 0.0);
    let kl = kahler_like_nullspace_standard(dim, KahlerConstraints::Hypercomplex);
    let kh = kahler_like_nullspace_standard(dim, KahlerConstraints::HermitianOnly);
    r.push(
        Section::new("curvature-like tensors")
            .count_check("Kahler-like for J1, J2, J3", kl, 0)
            .count("Kahler-like for J1 only", kh),
    );
    let universal = PointModelSpace::standard(dim, &[]).dim();
    let w3 = class_nullspace_dim(dim, &[W3J2, W3J3]);
    let w3g = class_nullspace_dim(dim, &[W3J2, W3J3, G1J1]);
    let w3f = class_nullspace_dim(dim, &[W3J2, W3J3, W0J1]);
    let w133 = class_nullspace_dim(dim, &ClassLabel::W133);
    let mut s = Section::new("point data")
        .count("admissible F-data", universal)
        .count("W3(J2) and W3(J3)", w3)
        .count_check("W3(J2) and W3(J3) lie in G1(J1)", w3g, w3)
        .count_check("W3(J2) and W3(J3) with F1 = 0", w3f, 0)
        .count("W133", w133);
    for (a, l) in [W0J1, W0J2, W0J3].into_iter().enumerate() {
        let mut ls = ClassLabel::W133.to_vec();
        ls.push(l);
        let v = class_nullspace_dim(dim, &ls);
        s = s.count_check(format!("W133 with F{} = 0", a + 1), v, 0);
    }
    r.push(s);
    let g = Metric::standard(dim);
    let h = standard_hypercomplex(dim);
    let u = natural_skew_deformation_dim(&g, &h);
    r.push(Section::new("connections").count_check("natural deformations keeping the torsion skew", u, 0));
    r
}

/// Residual summary used by the acceptance suite and the FFI.
pub fn worst(map: &ResidualMap) -> Residual {
    map.iter().map(|(_, r)| *r).fold(Residual::zero(), |a, b| if b.relative() > a.relative() { b } else { a })
}
