//! Curvature of ∇ and D, the A_α tensors, curvature identities, scalar
//! curvatures and the Kähler-like nullspace.

use log::warn;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::classify::{ClassLabel, ClassificationReport};
use crate::connection::ConnectionAnalysis;
use crate::linalg::{ConstraintSystem, LinExpr};
use crate::model::{covariant_derivative3, curvature, curvature_symmetry_residuals, ConnectionCoefficients, LieAlgebraModel};
use crate::residual::{GatedResiduals, Residual, ResidualMap};
use crate::structural::{f_scale, square_norms, LieGeometry};
use crate::tensor::{Dim, HypercomplexTriple, Metric, Tensor2, Tensor3, Tensor4, EPSILON};

/// A(x, y, z, w) = g((∇_x J) y, (∇_z J) w) from the covariant form F of ∇J.
pub fn a_tensor(f: &Tensor3, g: &Metric) -> Tensor4 {
    let d = f.dim();
    let m = DMatrix::from_fn(d * d, d, |r, p| f[[r / d, r % d, p]]);
    let a = &m * g.inverse() * m.transpose();
    Tensor4::from_fn(d, |[x, y, z, w]| a[(x * d + y, z * d + w)])
}

/// The three A_α.
#[derive(Debug, Clone, PartialEq)]
pub struct ATensors(pub [Tensor4; 3]);

impl ATensors {
    pub fn new(f: &[Tensor3; 3], g: &Metric) -> Self {
        Self(std::array::from_fn(|a| a_tensor(&f[a], g)))
    }

    pub fn get(&self, alpha: usize) -> &Tensor4 {
        &self.0[alpha]
    }

    pub fn pair_symmetry_residual(&self) -> Residual {
        self.0
            .iter()
            .map(|a| a.residual_against(&a.permuted([2, 3, 0, 1])))
            .fold(Residual::zero(), Residual::max)
    }
}

/// Which Kähler-like relations enter the nullspace computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KahlerConstraints {
    /// L(x,y,z,w) = ε_α L(x,y,J_αz,J_αw) for α = 1, 2, 3.
    Hypercomplex,
    /// Only the relation for J₁.
    HermitianOnly,
}

fn idx4(d: usize, [x, y, z, w]: [usize; 4]) -> usize {
    ((x * d + y) * d + z) * d + w
}

/// Linear system on the d⁴ components of a curvature-like tensor that is
/// Kähler-like for the chosen structures.
pub fn kahler_like_system(g: &Metric, h: &HypercomplexTriple, which: KahlerConstraints) -> ConstraintSystem {
    let d = g.dim();
    let mut sys = ConstraintSystem::new(d.pow(4));
    let alphas: &[usize] = match which {
        KahlerConstraints::Hypercomplex => &[0, 1, 2],
        KahlerConstraints::HermitianOnly => &[0],
    };
    for x in 0..d {
        for y in 0..d {
            for z in 0..d {
                for w in 0..d {
                    let me = idx4(d, [x, y, z, w]);
                    let mut e = LinExpr::var(me);
                    e.push(idx4(d, [y, x, z, w]), 1.0);
                    sys.push(e);
                    let mut e = LinExpr::var(me);
                    e.push(idx4(d, [x, y, w, z]), 1.0);
                    sys.push(e);
                    let mut e = LinExpr::var(me);
                    e.push(idx4(d, [y, z, x, w]), 1.0);
                    e.push(idx4(d, [z, x, y, w]), 1.0);
                    sys.push(e);
                    for &a in alphas {
                        let j = h.matrix(a);
                        let mut e = LinExpr::var(me);
                        for p in 0..d {
                            for q in 0..d {
                                let c = j[(p, z)] * j[(q, w)];
                                if c != 0.0 {
                                    e.push(idx4(d, [x, y, p, q]), -EPSILON[a] * c);
                                }
                            }
                        }
                        sys.push(e);
                    }
                }
            }
        }
    }
    sys
}

/// Dimension of the space of Kähler-like curvature-like tensors.
pub fn kahler_like_nullspace(g: &Metric, h: &HypercomplexTriple, which: KahlerConstraints) -> usize {
    kahler_like_system(g, h, which).nullspace().dim()
}

/// Same, for the standard structure of the given dimension.
pub fn kahler_like_nullspace_standard(dim: Dim, which: KahlerConstraints) -> usize {
    let g = Metric::standard(dim);
    let h = crate::tensor::standard_hypercomplex(dim);
    kahler_like_nullspace(&g, &h, which)
}

fn j_pair(t: &Tensor4, j: &DMatrix<f64>) -> Tensor4 {
    t.substitute(2, j).substitute(3, j)
}

/// R(x,y,J₁z,J₁w) − R(x,y,z,w) = A₁ and R(J₁x,J₁y,J₁z,J₁w) = R.
pub fn nearly_kahler_residuals(r: &Tensor4, a1: &Tensor4, h: &HypercomplexTriple) -> ResidualMap {
    let j = h.matrix(0);
    let rj = j_pair(r, j);
    let mut out = ResidualMap::new();
    out.insert("R(x,y,J1z,J1w) - R(x,y,z,w) = A1(x,y,z,w)", (&rj - r).residual_against(a1));
    let full = rj.substitute(0, j).substitute(1, j);
    out.insert("R(J1x,J1y,J1z,J1w) = R(x,y,z,w)", full.residual_against(r));
    out
}

/// (∇_xF_α)(y,z,J_αw) − (∇_yF_α)(x,z,J_αw) = R(x,y,J_αz,J_αw) − ε_α R(x,y,z,w).
pub fn ricci_identity_residual(
    gamma: &ConnectionCoefficients,
    r: &Tensor4,
    f: &[Tensor3; 3],
    h: &HypercomplexTriple,
) -> ResidualMap {
    let mut out = ResidualMap::new();
    for a in 0..3 {
        let j = h.matrix(a);
        let nf = covariant_derivative3(gamma, &f[a]).substitute(3, j);
        let lhs = &nf - &nf.permuted([1, 0, 2, 3]);
        let rhs = &j_pair(r, j) - &r.scaled(EPSILON[a]);
        out.insert(format!("Ricci identity for F{}", a + 1), lhs.residual_against(&rhs));
    }
    out
}

/// The hypercomplex curvature identity and its two corollaries.
pub fn hyper_curvature_residuals(r: &Tensor4, a: &ATensors, h: &HypercomplexTriple) -> ResidualMap {
    let rj: [Tensor4; 3] = std::array::from_fn(|k| j_pair(r, h.matrix(k)));
    let s = a.0.iter().fold(Tensor4::zeros(r.dim()), |acc, t| {
        acc + (&t.permuted([0, 2, 1, 3]) - &t.permuted([1, 2, 0, 3]))
    });
    let a1 = a.get(0);
    let mut out = ResidualMap::new();
    let lhs = &(&(r + &rj[0]) + &rj[1]) + &rj[2];
    out.insert("R + sum_a R(x,y,Jaz,Jaw) = sum_a {Aa(x,z,y,w) - Aa(y,z,x,w)}", lhs.residual_against(&s));
    for k in [1, 2] {
        let lhs = (r + &rj[k]).scaled(2.0);
        let rhs = &(&s - a1) - &j_pair(a1, h.matrix(k));
        out.insert(
            format!("2R + 2R(x,y,J{0}z,J{0}w) = sum_a {{...}} - A1 - A1(x,y,J{0}z,J{0}w)", k + 1),
            lhs.residual_against(&rhs),
        );
    }
    out.insert(
        "A1(x,y,J2z,J2w) = -A1(x,y,J3z,J3w)",
        j_pair(a1, h.matrix(1)).residual_against(&j_pair(a1, h.matrix(2)).scaled(-1.0)),
    );
    out
}

/// Σ g^{ij} g^{ks} T(e_i, e_k, e_s, e_j).
fn full_trace(t: &Tensor4, g: &Metric) -> f64 {
    let d = t.dim();
    let gi = g.inverse();
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            let gij = gi[(i, j)];
            if gij == 0.0 {
                continue;
            }
            for k in 0..d {
                for l in 0..d {
                    s += gij * gi[(k, l)] * t[[i, k, l, j]];
                }
            }
        }
    }
    s
}

/// ρ(y, z) = Σ g^{ij} T(e_i, y, z, e_j).
pub fn ricci_contraction(t: &Tensor4, g: &Metric) -> Tensor2 {
    let d = t.dim();
    let gi = g.inverse();
    Tensor2::from_fn(d, |[y, z]| {
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                s += gi[(i, j)] * t[[i, y, z, j]];
            }
        }
        s
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarReport {
    pub tau: f64,
    pub tau_star: [f64; 3],
    pub tau_d: f64,
    #[serde(skip)]
    pub rho_d: Option<Tensor2>,
    pub nabla_j_norms: [f64; 3],
    pub torsion_norm: f64,
}

impl ScalarReport {
    pub fn new(r: &Tensor4, k: &Tensor4, f: &[Tensor3; 3], torsion_norm: f64, g: &Metric, h: &HypercomplexTriple) -> Self {
        Self {
            tau: full_trace(r, g),
            tau_star: std::array::from_fn(|a| full_trace(&j_pair(r, h.matrix(a)), g)),
            tau_d: full_trace(k, g),
            rho_d: Some(ricci_contraction(k, g)),
            nabla_j_norms: square_norms(f, g),
            torsion_norm,
        }
    }

    /// The scalar relations on W₁₃₃ and the symmetry of ρ^D, normalized by the
    /// largest quantity involved.
    pub fn relations(&self, h: &HypercomplexTriple) -> ResidualMap {
        let (t, [s1, s2, s3], [n1, n2, n3]) = (self.tau, self.tau_star, self.nabla_j_norms);
        let scale = [t, s1, s2, s3, n1, n2, n3, self.tau_d, self.torsion_norm]
            .iter()
            .map(|v| v.abs())
            .fold(0.0, f64::max);
        let rel = |v: f64| Residual::new(v.abs(), scale);
        let mut out = ResidualMap::new();
        out.insert("tau - tau**1 = |nabla J1|^2", rel(t - s1 - n1));
        out.insert("tau + tau**2 = -1/2 |nabla J2|^2", rel(t + s2 + 0.5 * n2));
        out.insert("tau + tau**3 = -1/2 |nabla J3|^2", rel(t + s3 + 0.5 * n3));
        out.insert("|nabla J2|^2 = |nabla J3|^2", rel(n2 - n3));
        out.insert("|nabla J1|^2 = -2|nabla J2|^2", rel(n1 + 2.0 * n2));
        out.insert("3 tau + tau**1 = -4 tau**2", rel(3.0 * t + s1 + 4.0 * s2));
        out.insert("3 tau + tau**1 = -4 tau**3", rel(3.0 * t + s1 + 4.0 * s3));
        out.insert("tau^D = tau - 1/4 |T|^2", rel(self.tau_d - t + 0.25 * self.torsion_norm));
        out.insert("|T|^2 = |nabla J1|^2", rel(self.torsion_norm - n1));
        if let Some(rho) = &self.rho_d {
            let m = rho.to_matrix();
            let j = h.matrix(0);
            let rj = j.transpose() * &m * j;
            let s = crate::tensor::max_abs_matrix(&m);
            out.insert("rho^D symmetric", Residual::new(crate::tensor::max_abs_matrix(&(&m - m.transpose())), s));
            out.insert("rho^D J1-invariant", Residual::new(crate::tensor::max_abs_matrix(&(&rj - &m)), s));
        }
        out
    }
}

/// K = R + ¼A₁ + ¼𝔖A₁.
pub fn kr_relation_residual(k: &Tensor4, r: &Tensor4, a1: &Tensor4) -> Residual {
    let rhs = &(r + &a1.scaled(0.25)) + &a1.cyclic_sum().scaled(0.25);
    k.residual_against(&rhs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Trichotomy {
    /// 𝔖A₁ = 0; then ∇T = 0 and D is flat.
    StrongFlat,
    Weak,
}

impl Trichotomy {
    pub fn as_str(self) -> &'static str {
        match self {
            Trichotomy::StrongFlat => "strong/flat",
            Trichotomy::Weak => "weak",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrichotomyReport {
    pub verdict: Trichotomy,
    pub s_a1: f64,
    pub nabla_t: f64,
    pub k: f64,
    pub r: f64,
    pub torsion_norm: f64,
    pub nabla_j_norms: [f64; 3],
    /// max(|K|, |R|) / |𝔖A₁|, the constant in the coherence bound.
    pub coherence: f64,
    /// In the strong/flat branch: K, R, A₁ and ‖T‖² vanish (the last means the
    /// torsion is isotropic). Empty in the weak branch.
    pub branch: ResidualMap,
    /// 𝔖K = 𝔖A₁, the first Bianchi identity with torsion.
    pub bianchi: Residual,
}

pub fn strong_weak_flat_report(
    r: &Tensor4,
    k: &Tensor4,
    a1: &Tensor4,
    nabla_t: &Tensor4,
    f: &[Tensor3; 3],
    t: &Tensor3,
    g: &Metric,
    tol: f64,
) -> TrichotomyReport {
    let s = f_scale(f).powi(2);
    let sa1 = a1.cyclic_sum();
    let s_a1 = sa1.max_abs();
    let torsion_norm = crate::structural::square_norm(t, g);
    let verdict = if Residual::new(s_a1, s).passes(tol) {
        Trichotomy::StrongFlat
    } else {
        Trichotomy::Weak
    };
    let mut branch = ResidualMap::new();
    if verdict == Trichotomy::StrongFlat {
        branch.insert("K = 0", Residual::new(k.max_abs(), s));
        branch.insert("R = 0", Residual::new(r.max_abs(), s));
        branch.insert("A1 = 0", Residual::new(a1.max_abs(), s));
        branch.insert("|T|^2 = 0", Residual::new(torsion_norm.abs(), t.frobenius().powi(2)));
    }
    TrichotomyReport {
        verdict,
        s_a1,
        nabla_t: nabla_t.max_abs(),
        k: k.max_abs(),
        r: r.max_abs(),
        torsion_norm,
        nabla_j_norms: square_norms(f, g),
        coherence: k.max_abs().max(r.max_abs()) / s_a1.max(f64::MIN_POSITIVE),
        branch,
        bianchi: k.cyclic_sum().residual_against(&sa1),
    }
}

/// Curvature-level objects of a model and all curvature checks.
#[derive(Debug, Clone)]
pub struct CurvatureAnalysis {
    pub k: Tensor4,
    pub a: ATensors,
    /// Hold on every model.
    pub universal: ResidualMap,
    pub nearly_kahler: GatedResiduals,
    pub hyper: GatedResiduals,
    pub scalars: ScalarReport,
    pub scalar_relations: GatedResiduals,
    pub kr: GatedResiduals,
    pub trichotomy: TrichotomyReport,
}

impl CurvatureAnalysis {
    pub fn new(
        m: &LieAlgebraModel,
        geo: &LieGeometry,
        conn: &ConnectionAnalysis,
        verdicts: &ClassificationReport,
    ) -> Self {
        let g = m.metric();
        let h = m.hypercomplex();
        let r = &geo.r;
        let k = curvature(m, &conn.d);
        let a = ATensors::new(&geo.f, g);
        let w1 = verdicts.passes(ClassLabel::W1J1);
        let w133 = verdicts.is_w133();
        if !w133 {
            warn!("curvature identities of W133 evaluated on a model outside the class");
        }

        let mut universal = curvature_symmetry_residuals(r);
        universal.insert("K(x,y,z,w) = -K(y,x,z,w)", Residual::new((&k + &k.permuted([1, 0, 2, 3])).max_abs(), k.max_abs()));
        universal.insert("A(x,y,z,w) = A(z,w,x,y)", a.pair_symmetry_residual());
        universal.extend(ricci_identity_residual(&geo.gamma, r, &geo.f, h));

        let t = conn.torsion.tensor();
        let scalars = ScalarReport::new(r, &k, &geo.f, conn.torsion.square_norm(g), g, h);
        let nabla_t = covariant_derivative3(&geo.gamma, t);
        let mut kr = ResidualMap::new();
        kr.insert("K = R + 1/4 A1 + 1/4 S A1", kr_relation_residual(&k, r, a.get(0)));
        let trichotomy = strong_weak_flat_report(r, &k, a.get(0), &nabla_t, &geo.f, t, g, verdicts.tol);
        kr.insert("S K = S A1", trichotomy.bianchi);

        Self {
            nearly_kahler: GatedResiduals {
                residuals: nearly_kahler_residuals(r, a.get(0), h),
                precondition_met: w1,
            },
            hyper: GatedResiduals {
                residuals: hyper_curvature_residuals(r, &a, h),
                precondition_met: w133,
            },
            scalar_relations: GatedResiduals {
                residuals: scalars.relations(h),
                precondition_met: w133,
            },
            kr: GatedResiduals {
                residuals: kr,
                precondition_met: w133,
            },
            k,
            a,
            universal,
            scalars,
            trichotomy,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::class_residuals;
    use crate::model::random_model;
    use proptest::prelude::*;

    fn analyse(m: &LieAlgebraModel) -> (LieGeometry, ConnectionAnalysis, CurvatureAnalysis) {
        let geo = LieGeometry::new(m);
        let rep = class_residuals(&geo.f, m.hypercomplex(), 1e-8);
        let conn = ConnectionAnalysis::new(m, &geo, &rep);
        let curv = CurvatureAnalysis::new(m, &geo, &conn, &rep);
        (geo, conn, curv)
    }

    #[test]
    fn a_tensor_matches_direct_contraction() {
        let m = random_model(Dim::new(1).unwrap(), 3);
        let geo = LieGeometry::new(&m);
        let g = m.metric();
        let d = m.d();
        // g((∇_x J) y, (∇_z J) w) from the (1,2) form directly
        let n = &geo.nabla_j[1];
        let direct = Tensor4::from_fn(d, |[x, y, z, w]| {
            let mut s = 0.0;
            for p in 0..d {
                for q in 0..d {
                    s += n[[x, y, p]] * g.get(p, q) * n[[z, w, q]];
                }
            }
            s
        });
        assert!(a_tensor(&geo.f[1], g).residual_against(&direct).relative() < 1e-12);
    }

    #[test]
    fn flat_model_everything_vanishes() {
        let m = LieAlgebraModel::abelian(Dim::new(1).unwrap());
        let (_, _, c) = analyse(&m);
        assert_eq!(c.k.max_abs(), 0.0);
        assert_eq!(c.trichotomy.verdict, Trichotomy::StrongFlat);
        assert_eq!(c.scalars.tau, 0.0);
        for map in [&c.universal, &c.hyper.residuals, &c.scalar_relations.residuals, &c.kr.residuals] {
            assert!(map.iter().all(|(_, r)| r.raw == 0.0));
        }
    }

    #[test]
    fn kahler_like_nullspace_is_trivial() {
        for n in [1, 2] {
            assert_eq!(kahler_like_nullspace_standard(Dim::new(n).unwrap(), KahlerConstraints::Hypercomplex), 0);
        }
    }

    #[test]
    fn hermitian_only_kahler_curvature_is_nontrivial() {
        // Kähler curvature tensors in complex dimension m: (m(m+1)/2)², m = 2
        let dim = kahler_like_nullspace_standard(Dim::new(1).unwrap(), KahlerConstraints::HermitianOnly);
        assert_eq!(dim, 9);
    }

    #[test]
    fn perturbed_connection_breaks_ricci_identity() {
        let m = random_model(Dim::new(1).unwrap(), 2);
        let geo = LieGeometry::new(&m);
        let d = m.d();
        let bump = Tensor3::from_fn(d, |[i, j, k]| if (i + 2 * j + k) % 3 == 0 { 0.3 } else { 0.0 });
        let gamma = ConnectionCoefficients::new(geo.gamma.tensor() + &bump);
        let r = curvature(&m, &gamma);
        let f: [Tensor3; 3] = std::array::from_fn(|a| {
            crate::model::nabla_j(&gamma, m.hypercomplex().j(a)).contract_slot(2, m.metric().components())
        });
        let res = ricci_identity_residual(&gamma, &r, &f, m.hypercomplex());
        assert!(res.worst() > 1e-3);
    }

    #[test]
    fn random_model_breaks_nearly_kahler_identity() {
        let m = random_model(Dim::new(1).unwrap(), 5);
        let (_, _, c) = analyse(&m);
        assert!(!c.nearly_kahler.precondition_met);
        assert!(c.nearly_kahler.residuals.worst() > 1e-3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn universal_curvature_identities(seed in 0u64..10_000, n in 1usize..=2) {
            let m = random_model(Dim::new(n).unwrap(), seed);
            let (_, _, c) = analyse(&m);
            for (label, r) in c.universal.iter() {
                prop_assert!(r.relative() < 1e-7, "{} {}", label, r.relative());
            }
        }
    }
}
