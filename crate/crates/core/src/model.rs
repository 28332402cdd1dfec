//! Concrete almost (H,G)-manifolds: left-invariant geometry on a Lie algebra,
//! and pointwise first-order F-data.

use log::warn;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::constraints::{universal_conditions, Condition, FLayout, FSpace};
use crate::error::{HgError, Result};
use crate::linalg::Nullspace;
use crate::residual::{Residual, ResidualMap, DEFAULT_TOL};
use crate::tensor::{
    check_structure, describe_failures, standard_hypercomplex, ComplexStructure, Dim,
    HypercomplexTriple, Metric, Tensor3, Tensor4,
};

/// Structure constants with `C[[i, j, k]]` = C^k_ij, i.e. [e_i, e_j] = Σ_k C^k_ij e_k.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureConstants(Tensor3);

impl StructureConstants {
    /// Accepts a tensor that is exactly skew in its first two slots.
    /// The reported (i, j, k) are 1-based.
    pub fn new(t: Tensor3) -> Result<Self> {
        let d = t.dim();
        for i in 0..d {
            for j in i..d {
                for k in 0..d {
                    let (a, b) = (t[[i, j, k]], t[[j, i, k]]);
                    let bad = if i == j { a != 0.0 } else { a != -b };
                    if bad {
                        return Err(HgError::NonSkew {
                            i: i + 1,
                            j: j + 1,
                            k: k + 1,
                        });
                    }
                }
            }
        }
        Ok(Self(t))
    }

    pub fn zeros(d: usize) -> Self {
        Self(Tensor3::zeros(d))
    }

    /// Builds C from its i < j entries; the skew partners are filled in.
    pub fn from_upper(d: usize, entries: impl IntoIterator<Item = (usize, usize, usize, f64)>) -> Self {
        let mut t = Tensor3::zeros(d);
        for (i, j, k, v) in entries {
            assert!(i < j, "from_upper expects i < j");
            t[[i, j, k]] = v;
            t[[j, i, k]] = -v;
        }
        Self(t)
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn tensor(&self) -> &Tensor3 {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.0[[i, j, k]]
    }

    /// Components of [x, y] for component vectors x, y.
    pub fn bracket(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut out = vec![0.0; d];
        for i in 0..d {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                let s = x[i] * y[j];
                if s == 0.0 {
                    continue;
                }
                for (k, o) in out.iter_mut().enumerate() {
                    *o += s * self.0[[i, j, k]];
                }
            }
        }
        out
    }

    /// The Jacobiator J[i,j,k,m] = m-component of 𝔖_{ijk} [[e_i, e_j], e_k].
    pub fn jacobiator(&self) -> Tensor4 {
        let d = self.dim();
        let c = &self.0;
        // P[i,j,k,m] = Σ_l C^l_ij C^m_lk
        let p = Tensor4::from_fn(d, |[i, j, k, m]| (0..d).map(|l| c[[i, j, l]] * c[[l, k, m]]).sum());
        p.cyclic_sum()
    }

    /// Max Jacobiator component against |C|².
    pub fn jacobi_residual(&self) -> Residual {
        let s = self.0.max_abs();
        Residual::new(self.jacobiator().max_abs(), s * s)
    }

    /// Structure constants in the basis e'_i = Σ_a A[(a, i)] e_a.
    pub fn change_basis(&self, a: &DMatrix<f64>) -> Result<Self> {
        let d = self.dim();
        let inv = a.clone().try_inverse().ok_or_else(|| {
            HgError::InvalidArgument("basis change matrix is singular".into())
        })?;
        let c = &self.0;
        // push each slot through in turn to stay O(d⁴)
        let s1 = Tensor3::from_fn(d, |[i, b, cc]| (0..d).map(|a0| a[(a0, i)] * c[[a0, b, cc]]).sum());
        let s2 = Tensor3::from_fn(d, |[i, j, cc]| (0..d).map(|b| a[(b, j)] * s1[[i, b, cc]]).sum());
        let mut out = Tensor3::from_fn(d, |[i, j, k]| (0..d).map(|cc| inv[(k, cc)] * s2[[i, j, cc]]).sum());
        // restore exact skew symmetry lost to rounding
        for i in 0..d {
            for k in 0..d {
                out[[i, i, k]] = 0.0;
            }
            for j in (i + 1)..d {
                for k in 0..d {
                    let v = 0.5 * (out[[i, j, k]] - out[[j, i, k]]);
                    out[[i, j, k]] = v;
                    out[[j, i, k]] = -v;
                }
            }
        }
        Ok(Self(out))
    }

    /// Flattens the i < j entries (k fastest) into a parameter vector.
    pub fn to_params(&self) -> Vec<f64> {
        let d = self.dim();
        let mut out = Vec::with_capacity(param_count(d));
        for i in 0..d {
            for j in (i + 1)..d {
                for k in 0..d {
                    out.push(self.0[[i, j, k]]);
                }
            }
        }
        out
    }

    pub fn from_params(d: usize, p: &[f64]) -> Self {
        assert_eq!(p.len(), param_count(d));
        let mut it = p.iter();
        let mut entries = Vec::with_capacity(p.len());
        for i in 0..d {
            for j in (i + 1)..d {
                for k in 0..d {
                    entries.push((i, j, k, *it.next().unwrap()));
                }
            }
        }
        Self::from_upper(d, entries)
    }
}

/// Number of independent skew structure constants in dimension d.
pub fn param_count(d: usize) -> usize {
    d * d * (d - 1) / 2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JacobiPolicy {
    #[default]
    Reject,
    Warn,
}

/// A Lie algebra with constant metric and hypercomplex triple.
#[derive(Debug, Clone)]
pub struct LieAlgebraModel {
    dim: Dim,
    c: StructureConstants,
    g: Metric,
    h: HypercomplexTriple,
}

impl LieAlgebraModel {
    pub fn new(
        c: StructureConstants,
        g: Metric,
        h: HypercomplexTriple,
        policy: JacobiPolicy,
    ) -> Result<Self> {
        let dim = Dim::from_ambient(c.dim())?;
        for other in [g.dim(), h.dim()] {
            if other != c.dim() {
                return Err(HgError::DimensionMismatch {
                    expected: c.dim(),
                    found: other,
                });
            }
        }
        let checks = check_structure(&g, &h)?;
        if !checks.all_pass(DEFAULT_TOL) {
            return Err(HgError::IncompatibleStructure(describe_failures(&checks, DEFAULT_TOL)));
        }
        let jac = c.jacobi_residual();
        if !jac.passes(DEFAULT_TOL) {
            match policy {
                JacobiPolicy::Reject => return Err(HgError::Jacobi(jac.relative())),
                JacobiPolicy::Warn => warn!("Jacobi identity fails: relative residual {:e}", jac.relative()),
            }
        }
        Ok(Self { dim, c, g, h })
    }

    /// Standard (g, H) on the given structure constants.
    pub fn standard(c: StructureConstants, policy: JacobiPolicy) -> Result<Self> {
        let dim = Dim::from_ambient(c.dim())?;
        Self::new(c, Metric::standard(dim), standard_hypercomplex(dim), policy)
    }

    /// The abelian algebra with the standard structure.
    pub fn abelian(dim: Dim) -> Self {
        Self {
            dim,
            c: StructureConstants::zeros(dim.ambient()),
            g: Metric::standard(dim),
            h: standard_hypercomplex(dim),
        }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn d(&self) -> usize {
        self.dim.ambient()
    }

    pub fn structure_constants(&self) -> &StructureConstants {
        &self.c
    }

    pub fn metric(&self) -> &Metric {
        &self.g
    }

    pub fn hypercomplex(&self) -> &HypercomplexTriple {
        &self.h
    }

    pub fn with_structure_constants(&self, c: StructureConstants, policy: JacobiPolicy) -> Result<Self> {
        Self::new(c, self.g.clone(), self.h.clone(), policy)
    }
}

/// Connection coefficients with `Γ[[i, j, k]]` = k-component of ∇_{e_i} e_j.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionCoefficients(Tensor3);

impl ConnectionCoefficients {
    pub fn new(t: Tensor3) -> Self {
        Self(t)
    }

    pub fn tensor(&self) -> &Tensor3 {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    /// The matrix of ∇_{e_i} acting on constant components: `(Γ_i)[(k, j)] = Γ^k_ij`.
    pub fn matrix(&self, i: usize) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |k, j| self.0[[i, j, k]])
    }

    pub fn matrices(&self) -> Vec<DMatrix<f64>> {
        (0..self.dim()).map(|i| self.matrix(i)).collect()
    }

    /// Γ + g⁻¹Q, i.e. the connection with g(D_x y, z) = g(∇_x y, z) + Q(x, y, z).
    pub fn shifted(&self, q: &Tensor3, g: &Metric) -> Self {
        Self(&self.0 + &q.contract_slot(2, g.inverse()))
    }

    /// Residual of ∇g = 0: (∇_i g)(j, k) = −Γ^m_ij g_mk − Γ^m_ik g_jm.
    pub fn metric_residual(&self, g: &Metric) -> Residual {
        let lowered = self.0.contract_slot(2, g.components());
        let ng = &lowered + &lowered.permuted([0, 2, 1]);
        Residual::new(ng.max_abs(), lowered.max_abs())
    }

    /// Residual of Γ(x, y) − Γ(y, x) = [x, y].
    pub fn torsion_free_residual(&self, c: &StructureConstants) -> Residual {
        let t = &(&self.0 - &self.0.permuted([1, 0, 2])) - c.tensor();
        Residual::new(t.max_abs(), self.0.max_abs().max(c.tensor().max_abs()))
    }
}

/// The Levi-Civita connection via the Koszul formula
/// 2g(∇_x y, z) = g([x,y],z) − g([y,z],x) + g([z,x],y) on left-invariant fields.
pub fn levi_civita(m: &LieAlgebraModel) -> ConnectionCoefficients {
    levi_civita_from(m.c.tensor(), &m.g)
}

/// Koszul formula on raw structure constants; no Jacobi requirement.
pub fn levi_civita_from(c: &Tensor3, g: &Metric) -> ConnectionCoefficients {
    // cl[i,j,k] = g([e_i, e_j], e_k)
    let cl = c.contract_slot(2, g.components());
    let lower = Tensor3::from_fn(c.dim(), |[i, j, k]| 0.5 * (cl[[i, j, k]] - cl[[j, k, i]] + cl[[k, i, j]]));
    ConnectionCoefficients(lower.contract_slot(2, g.inverse()))
}

/// F-data of raw structure constants with respect to (g, H). Linear in `c`.
pub fn f_data_from(c: &Tensor3, g: &Metric, h: &HypercomplexTriple) -> [Tensor3; 3] {
    let conn = levi_civita_from(c, g);
    std::array::from_fn(|a| nabla_j(&conn, h.j(a)).contract_slot(2, g.components()))
}

/// R(x, y, z, w) = g(R(x,y)z, w) for R(x,y) = [∇_x, ∇_y] − ∇_{[x,y]}.
/// Applied to any connection on the model, e.g. D to obtain K.
pub fn curvature(m: &LieAlgebraModel, conn: &ConnectionCoefficients) -> Tensor4 {
    let d = m.d();
    let gm = conn.matrices();
    let c = m.c.tensor();
    let g = m.g.components();
    let mut out = Tensor4::zeros(d);
    for i in 0..d {
        for j in 0..d {
            let mut r = &gm[i] * &gm[j] - &gm[j] * &gm[i];
            for (mm, gamma_m) in gm.iter().enumerate() {
                let s = c[[i, j, mm]];
                if s != 0.0 {
                    r -= gamma_m * s;
                }
            }
            // R(i,j,k,l) = Σ_p r[(p,k)] g[(p,l)]
            let low = g * r;
            for k in 0..d {
                for l in 0..d {
                    out[[i, j, k, l]] = low[(l, k)];
                }
            }
        }
    }
    out
}

/// `N[[i, j, k]]` = k-component of (∇_{e_i} J) e_j = (Γ_i J − J Γ_i)[(k, j)].
pub fn nabla_j(conn: &ConnectionCoefficients, j: &ComplexStructure) -> Tensor3 {
    let d = conn.dim();
    let jm = j.matrix();
    let mut out = Tensor3::zeros(d);
    for i in 0..d {
        let gi = conn.matrix(i);
        let comm = &gi * jm - jm * &gi;
        for a in 0..d {
            for k in 0..d {
                out[[i, a, k]] = comm[(k, a)];
            }
        }
    }
    out
}

/// (∇_i T)(j, k) for a constant-component 2-tensor.
pub fn covariant_derivative2(conn: &ConnectionCoefficients, t: &DMatrix<f64>) -> Tensor3 {
    let d = conn.dim();
    let gam = &conn.0;
    Tensor3::from_fn(d, |[i, j, k]| {
        -(0..d)
            .map(|m| gam[[i, j, m]] * t[(m, k)] + gam[[i, k, m]] * t[(j, m)])
            .sum::<f64>()
    })
}

/// (∇_i T)(j, k, l) for a constant-component 3-tensor.
pub fn covariant_derivative3(conn: &ConnectionCoefficients, t: &Tensor3) -> Tensor4 {
    let d = conn.dim();
    let gam = &conn.0;
    Tensor4::from_fn(d, |[i, j, k, l]| {
        -(0..d)
            .map(|m| {
                gam[[i, j, m]] * t[[m, k, l]] + gam[[i, k, m]] * t[[j, m, l]] + gam[[i, l, m]] * t[[j, k, m]]
            })
            .sum::<f64>()
    })
}

/// Antisymmetries, first Bianchi identity and pair symmetry of a (0,4) curvature tensor.
pub fn curvature_symmetry_residuals(r: &Tensor4) -> ResidualMap {
    let s = r.max_abs();
    let mut out = ResidualMap::new();
    out.insert("R(x,y,z,w) = -R(y,x,z,w)", Residual::new((r + &r.permuted([1, 0, 2, 3])).max_abs(), s));
    out.insert("R(x,y,z,w) = -R(x,y,w,z)", Residual::new((r + &r.permuted([0, 1, 3, 2])).max_abs(), s));
    out.insert("first Bianchi identity", Residual::new(r.cyclic_sum().max_abs(), s));
    out.insert("R(x,y,z,w) = R(z,w,x,y)", Residual::new((r - &r.permuted([2, 3, 0, 1])).max_abs(), s));
    out
}

/// Pointwise first-order data: F₁ and F₂ free within their identities, F₃ derived.
#[derive(Debug, Clone)]
pub struct PointModel {
    dim: Dim,
    g: Metric,
    h: HypercomplexTriple,
    f1: Tensor3,
    f2: Tensor3,
}

impl PointModel {
    pub fn new(g: Metric, h: HypercomplexTriple, f1: Tensor3, f2: Tensor3) -> Result<Self> {
        let dim = Dim::from_ambient(g.dim())?;
        for other in [h.dim(), f1.dim(), f2.dim()] {
            if other != g.dim() {
                return Err(HgError::DimensionMismatch {
                    expected: g.dim(),
                    found: other,
                });
            }
        }
        Ok(Self { dim, g, h, f1, f2 })
    }

    pub fn zero(dim: Dim) -> Self {
        let d = dim.ambient();
        Self {
            dim,
            g: Metric::standard(dim),
            h: standard_hypercomplex(dim),
            f1: Tensor3::zeros(d),
            f2: Tensor3::zeros(d),
        }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn metric(&self) -> &Metric {
        &self.g
    }

    pub fn hypercomplex(&self) -> &HypercomplexTriple {
        &self.h
    }

    pub fn f1(&self) -> &Tensor3 {
        &self.f1
    }

    pub fn f2(&self) -> &Tensor3 {
        &self.f2
    }

    /// F₃(x,y,z) = F₁(x,J₂y,z) − F₂(x,y,J₁z).
    pub fn derive_f3(&self) -> Tensor3 {
        &self.f1.substitute(1, self.h.matrix(1)) - &self.f2.substitute(2, self.h.matrix(0))
    }

    /// The other interrelation line: F₃(x,y,z) = −F₂(x,J₁y,z) + ε₂F₁(x,y,J₂z).
    pub fn derive_f3_alt(&self) -> Tensor3 {
        -(&self.f2.substitute(1, self.h.matrix(0)) + &self.f1.substitute(2, self.h.matrix(1)))
    }

    pub fn f_data(&self) -> [Tensor3; 3] {
        [self.f1.clone(), self.f2.clone(), self.derive_f3()]
    }

    /// The unknown vector of the point layout.
    pub fn to_vector(&self) -> Vec<f64> {
        self.f1.as_slice().iter().chain(self.f2.as_slice()).copied().collect()
    }

    pub fn with_vector(&self, u: &[f64]) -> Result<Self> {
        let d = self.g.dim();
        let block = d * d * d;
        if u.len() != 2 * block {
            return Err(HgError::DimensionMismatch {
                expected: 2 * block,
                found: u.len(),
            });
        }
        Ok(Self {
            f1: Tensor3::from_vec(d, u[..block].to_vec())?,
            f2: Tensor3::from_vec(d, u[block..].to_vec())?,
            ..self.clone()
        })
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            f1: self.f1.scaled(s),
            f2: self.f2.scaled(s),
            ..self.clone()
        }
    }
}

/// Admissible point data under the universal identities plus optional extra
/// conditions, as an explicit orthonormal basis.
#[derive(Debug, Clone)]
pub struct PointModelSpace {
    g: Metric,
    h: HypercomplexTriple,
    nullspace: Nullspace,
}

impl PointModelSpace {
    pub fn new(g: &Metric, h: &HypercomplexTriple, extra: &[Condition]) -> Self {
        let space = FSpace::new(h, FLayout::Point);
        let mut conds = universal_conditions();
        conds.extend_from_slice(extra);
        let nullspace = space.system(&conds).nullspace();
        Self {
            g: g.clone(),
            h: h.clone(),
            nullspace,
        }
    }

    pub fn standard(dim: Dim, extra: &[Condition]) -> Self {
        Self::new(&Metric::standard(dim), &standard_hypercomplex(dim), extra)
    }

    pub fn dim(&self) -> usize {
        self.nullspace.dim()
    }

    pub fn nullspace(&self) -> &Nullspace {
        &self.nullspace
    }

    fn model_from(&self, u: &[f64]) -> PointModel {
        let d = self.g.dim();
        let block = d * d * d;
        PointModel {
            dim: Dim::from_ambient(d).expect("validated at construction"),
            g: self.g.clone(),
            h: self.h.clone(),
            f1: Tensor3::from_vec(d, u[..block].to_vec()).expect("block size"),
            f2: Tensor3::from_vec(d, u[block..].to_vec()).expect("block size"),
        }
    }

    /// Gaussian coefficients in the orthonormal basis, seeded.
    pub fn sample(&self, seed: u64) -> PointModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs: Vec<f64> = (0..self.dim()).map(|_| rng.sample(StandardNormal)).collect();
        self.model_from(&self.nullspace.combine(&coeffs))
    }

    /// Euclidean orthogonal projection of (F₁, F₂) onto the space.
    pub fn project(&self, p: &PointModel) -> PointModel {
        self.model_from(&self.nullspace.project(&p.to_vector()))
    }
}

/// A seeded sample of admissible point data with the standard structure.
pub fn sample_point_model(dim: Dim, seed: u64) -> PointModel {
    PointModelSpace::standard(dim, &[]).sample(seed)
}

/// Families of Lie algebras used to produce random valid models.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LieFamily {
    /// R ⋉ R^{d−1} with a random derivation.
    AlmostAbelian,
    /// Brackets land in a central subspace.
    TwoStepNilpotent,
    /// so(3) ⊕ R^{d−3}.
    Compact,
    /// sl(2, R) ⊕ R^{d−3}.
    Split,
}

impl LieFamily {
    pub const ALL: [LieFamily; 4] = [
        LieFamily::AlmostAbelian,
        LieFamily::TwoStepNilpotent,
        LieFamily::Compact,
        LieFamily::Split,
    ];
}

fn normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Structure constants of a random member of `family`, written in a random basis.
pub fn random_structure_constants(d: usize, family: LieFamily, rng: &mut impl Rng) -> StructureConstants {
    let mut e = Vec::new();
    match family {
        LieFamily::AlmostAbelian => {
            for i in 1..d {
                for k in 1..d {
                    e.push((0, i, k, normal(rng)));
                }
            }
        }
        LieFamily::TwoStepNilpotent => {
            let centre = (d / 4).max(1);
            let free = d - centre;
            for i in 0..free {
                for j in (i + 1)..free {
                    for k in free..d {
                        e.push((i, j, k, normal(rng)));
                    }
                }
            }
        }
        LieFamily::Compact => {
            e.extend([(0, 1, 2, 1.0), (1, 2, 0, 1.0), (0, 2, 1, -1.0)]);
        }
        LieFamily::Split => {
            // basis (h, x, y): [h,x] = 2x, [h,y] = −2y, [x,y] = h
            e.extend([(0, 1, 1, 2.0), (0, 2, 2, -2.0), (1, 2, 0, 1.0)]);
        }
    }
    let c = StructureConstants::from_upper(d, e);
    let a = DMatrix::from_fn(d, d, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id + 0.5 * normal(rng) / (d as f64).sqrt()
    });
    let changed = c.change_basis(&a).unwrap_or(c);
    let s = changed.tensor().max_abs();
    if s > 0.0 {
        StructureConstants(changed.tensor().scaled(1.0 / s))
    } else {
        changed
    }
}

/// A seeded random valid model with the standard structure; the family cycles with the seed.
pub fn random_model(dim: Dim, seed: u64) -> LieAlgebraModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let family = LieFamily::ALL[(seed % 4) as usize];
    let c = random_structure_constants(dim.ambient(), family, &mut rng);
    LieAlgebraModel::standard(c, JacobiPolicy::Reject).expect("generated algebras satisfy Jacobi")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn koszul_oracle(m: &LieAlgebraModel) -> Tensor3 {
        // Γ^k_ij from 2g(∇_i e_j, e_l) evaluated with brackets as vectors
        let d = m.d();
        let g = m.metric().components();
        let gi = m.metric().inverse();
        let c = m.structure_constants();
        let e = |i: usize| -> Vec<f64> { (0..d).map(|a| if a == i { 1.0 } else { 0.0 }).collect() };
        let gv = |u: &[f64], v: &[f64]| -> f64 {
            let mut s = 0.0;
            for a in 0..d {
                for b in 0..d {
                    s += u[a] * g[(a, b)] * v[b];
                }
            }
            s
        };
        let mut low = Tensor3::zeros(d);
        for i in 0..d {
            for j in 0..d {
                for l in 0..d {
                    let t1 = gv(&c.bracket(&e(i), &e(j)), &e(l));
                    let t2 = gv(&c.bracket(&e(j), &e(l)), &e(i));
                    let t3 = gv(&c.bracket(&e(l), &e(i)), &e(j));
                    low[[i, j, l]] = 0.5 * (t1 - t2 + t3);
                }
            }
        }
        Tensor3::from_fn(d, |[i, j, k]| (0..d).map(|l| gi[(k, l)] * low[[i, j, l]]).sum())
    }

    #[test]
    fn abelian_is_flat() {
        let m = LieAlgebraModel::abelian(Dim::new(2).unwrap());
        let gam = levi_civita(&m);
        assert_eq!(gam.tensor().max_abs(), 0.0);
        assert_eq!(curvature(&m, &gam).max_abs(), 0.0);
        for a in 0..3 {
            assert_eq!(nabla_j(&gam, m.hypercomplex().j(a)).max_abs(), 0.0);
        }
    }

    #[test]
    fn levi_civita_matches_koszul_oracle() {
        for seed in 0..8 {
            let m = random_model(Dim::new(1 + (seed as usize % 2)).unwrap(), seed);
            let gam = levi_civita(&m);
            let oracle = koszul_oracle(&m);
            assert!(gam.tensor().residual_against(&oracle).relative() < 1e-12);
            assert!(gam.metric_residual(m.metric()).relative() < 1e-10);
            assert!(gam.torsion_free_residual(m.structure_constants()).relative() < 1e-10);
        }
    }

    #[test]
    fn non_skew_is_reported_one_based() {
        let mut t = Tensor3::zeros(4);
        t[[0, 1, 2]] = 1.0;
        t[[1, 0, 2]] = 0.5;
        match StructureConstants::new(t) {
            Err(HgError::NonSkew { i, j, k }) => assert_eq!((i, j, k), (1, 2, 3)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn jacobi_violation_rejected_or_warned() {
        // [e0,e1] = e1, [e1,e2] = e0: the cyclic sum on (e0,e1,e2) is e0
        let c = StructureConstants::from_upper(4, [(0, 1, 1, 1.0), (1, 2, 0, 1.0)]);
        assert!(c.jacobi_residual().relative() > 1e-3);
        assert!(matches!(
            LieAlgebraModel::standard(c.clone(), JacobiPolicy::Reject),
            Err(HgError::Jacobi(_))
        ));
        assert!(LieAlgebraModel::standard(c, JacobiPolicy::Warn).is_ok());
    }

    #[test]
    fn nabla_j_anticommutes_with_j() {
        let m = random_model(Dim::new(2).unwrap(), 5);
        let gam = levi_civita(&m);
        for a in 0..3 {
            let j = m.hypercomplex().matrix(a);
            let n = nabla_j(&gam, m.hypercomplex().j(a));
            // (∇J)J + J(∇J) = 0 as (1,2)-tensors
            let lhs = &n.substitute(1, j) + &n.contract_slot(2, j);
            assert!(lhs.max_abs() < 1e-10 * n.max_abs().max(1.0));
        }
    }

    #[test]
    fn point_model_space_matches_pointwise_image() {
        // Admissible first-order data is exactly {F_α(x,y,z) = g([ω_x, J_α]y, z) : ω_x ∈ so(g)},
        // computed here as the rank of that linear map.
        for (n, expected) in [(1usize, 20usize), (2, 176)] {
            let dim = Dim::new(n).unwrap();
            let d = dim.ambient();
            let g = Metric::standard(dim);
            let h = standard_hypercomplex(dim);
            let mut cols = Vec::new();
            for x in 0..d {
                for p in 0..d {
                    for q in (p + 1)..d {
                        let mut w = DMatrix::zeros(d, d);
                        w[(p, q)] = 1.0;
                        w[(q, p)] = -1.0;
                        let om = g.inverse() * w.transpose();
                        let mut col = vec![0.0; 2 * d * d * d];
                        for a in 0..2 {
                            let mm = &om * h.matrix(a) - h.matrix(a) * &om;
                            let low = g.components() * mm;
                            for y in 0..d {
                                for z in 0..d {
                                    col[a * d * d * d + (x * d + y) * d + z] = low[(z, y)];
                                }
                            }
                        }
                        cols.push(col);
                    }
                }
            }
            let m = DMatrix::from_fn(2 * d * d * d, cols.len(), |r, c| cols[c][r]);
            let image = crate::linalg::rank(&m.transpose());
            let space = PointModelSpace::standard(dim, &[]);
            assert_eq!(image, expected);
            assert_eq!(space.dim(), expected);
        }
    }

    #[test]
    fn sampling_is_deterministic_and_admissible() {
        let dim = Dim::new(2).unwrap();
        let a = sample_point_model(dim, 0);
        let b = sample_point_model(dim, 0);
        assert_eq!(a.to_vector(), b.to_vector());
        assert!(a.f1().max_abs() > 0.1);
        let f3 = a.derive_f3();
        let alt = a.derive_f3_alt();
        assert!(f3.residual_against(&alt).relative() < 1e-10);
        // F₃ symmetric in slots 2,3 and J₃-invariant there
        assert!((&f3 - &f3.permuted([0, 2, 1])).max_abs() < 1e-10);
        let j3 = a.hypercomplex().matrix(2);
        assert!((&f3 - &f3.substitute(1, j3).substitute(2, j3)).max_abs() < 1e-10);
    }

    #[test]
    fn point_space_invariant_under_block_permutation() {
        // swapping the two quaternionic blocks preserves g and H, so dimensions agree
        let dim = Dim::new(2).unwrap();
        let perm = DMatrix::from_fn(8, 8, |i, j| if i == (j + 4) % 8 { 1.0 } else { 0.0 });
        let g = Metric::new(perm.transpose() * Metric::standard(dim).components() * &perm).unwrap();
        let h0 = standard_hypercomplex(dim);
        let js: Vec<ComplexStructure> = (0..3)
            .map(|a| ComplexStructure::new(perm.transpose() * h0.matrix(a) * &perm).unwrap())
            .collect();
        let [j1, j2, j3]: [ComplexStructure; 3] = js.try_into().unwrap();
        let h = HypercomplexTriple::new(j1, j2, j3).unwrap();
        assert_eq!(PointModelSpace::new(&g, &h, &[]).dim(), 176);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn curvature_symmetries_hold(seed in 0u64..1000, n in 1usize..=2) {
            let m = random_model(Dim::new(n).unwrap(), seed);
            let r = curvature(&m, &levi_civita(&m));
            for (label, res) in curvature_symmetry_residuals(&r).iter() {
                prop_assert!(res.relative() < 1e-8, "{} {}", label, res.relative());
            }
        }

        #[test]
        fn derive_f3_is_linear(seed in 0u64..1000, s in -3.0f64..3.0) {
            let p = sample_point_model(Dim::new(1).unwrap(), seed);
            let lhs = p.scaled(s).derive_f3();
            let rhs = p.derive_f3().scaled(s);
            prop_assert!((&lhs - &rhs).max_abs() <= 1e-12 * (1.0 + rhs.max_abs()));
        }

        #[test]
        fn random_models_satisfy_jacobi(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for fam in LieFamily::ALL {
                let c = random_structure_constants(8, fam, &mut rng);
                prop_assert!(c.jacobi_residual().relative() < 1e-12);
            }
        }
    }
}
