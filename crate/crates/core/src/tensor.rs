//! Dense multilinear algebra on a 4n-dimensional real vector space carrying a
//! neutral metric and an almost hypercomplex triple.
//!
//! Matrices follow the convention `m[(i, j)]` = i-th component of `m e_j`.
//! Covariant tensors are stored row-major in their slot order.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{HgError, Result};
use crate::residual::{Residual, ResidualMap};

/// Eigenvalues below this magnitude count as zero when computing a signature.
pub const SIGNATURE_ZERO: f64 = 1e-10;
/// Metrics with a condition number above this trigger a warning.
pub const CONDITION_WARN: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dim {
    n: usize,
}

impl Dim {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(HgError::InvalidDimension(0));
        }
        Ok(Self { n })
    }

    pub fn from_ambient(d: usize) -> Result<Self> {
        if d == 0 || !d.is_multiple_of(4) {
            return Err(HgError::InvalidDimension(d));
        }
        Ok(Self { n: d / 4 })
    }

    /// Quaternionic dimension n.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Real dimension d = 4n.
    pub fn ambient(&self) -> usize {
        4 * self.n
    }
}

/// ε_α: +1 for the Hermitian structure J₁, −1 for the Norden structures J₂, J₃.
pub const EPSILON: [f64; 3] = [1.0, -1.0, -1.0];

/// Cyclic successors (β, γ) of α in (0, 1, 2).
pub fn cyclic(alpha: usize) -> (usize, usize) {
    ((alpha + 1) % 3, (alpha + 2) % 3)
}

pub fn max_abs_matrix(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    components: DMatrix<f64>,
    inverse: DMatrix<f64>,
    signature: (usize, usize),
    condition: f64,
}

impl Metric {
    /// Builds a metric from a symmetric invertible matrix. Any signature is
    /// accepted here; neutrality is checked where it matters.
    pub fn new(components: DMatrix<f64>) -> Result<Self> {
        let d = components.nrows();
        if components.ncols() != d {
            return Err(HgError::DimensionMismatch {
                expected: d,
                found: components.ncols(),
            });
        }
        let asym = max_abs_matrix(&(&components - components.transpose()));
        let scale = max_abs_matrix(&components);
        if asym > 1e-12 * scale.max(1.0) {
            return Err(HgError::NotSymmetric(asym));
        }
        let inverse = components
            .clone()
            .lu()
            .try_inverse()
            .ok_or(HgError::SingularMetric)?;
        let svals = components.clone().singular_values();
        let smax = svals.max();
        let smin = svals.min();
        if smin <= 0.0 || smin < 1e-14 * smax {
            return Err(HgError::SingularMetric);
        }
        let condition = smax / smin;
        if condition > CONDITION_WARN {
            log::warn!("metric condition number {condition:e} exceeds {CONDITION_WARN:e}");
        }
        let eig = components.clone().symmetric_eigen();
        let pos = eig.eigenvalues.iter().filter(|&&v| v > SIGNATURE_ZERO).count();
        let neg = eig.eigenvalues.iter().filter(|&&v| v < -SIGNATURE_ZERO).count();
        Ok(Self {
            components,
            inverse,
            signature: (pos, neg),
            condition,
        })
    }

    /// diag(+1, +1, −1, −1) repeated n times.
    pub fn standard(dim: Dim) -> Self {
        let d = dim.ambient();
        let mut g = DMatrix::zeros(d, d);
        for i in 0..d {
            g[(i, i)] = if i % 4 < 2 { 1.0 } else { -1.0 };
        }
        // diagonal ±1: its own inverse, exactly
        Self {
            inverse: g.clone(),
            components: g,
            signature: (2 * dim.n(), 2 * dim.n()),
            condition: 1.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.components.nrows()
    }

    pub fn components(&self) -> &DMatrix<f64> {
        &self.components
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    pub fn signature(&self) -> (usize, usize) {
        self.signature
    }

    pub fn is_neutral(&self) -> bool {
        let (p, q) = self.signature;
        p == q && p + q == self.dim()
    }

    pub fn condition_number(&self) -> f64 {
        self.condition
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.components[(i, j)]
    }

    pub fn inv(&self, i: usize, j: usize) -> f64 {
        self.inverse[(i, j)]
    }

    /// Max-norm of g·g⁻¹ − I.
    pub fn inverse_residual(&self) -> f64 {
        let d = self.dim();
        max_abs_matrix(&(&self.components * &self.inverse - DMatrix::identity(d, d)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexStructure {
    matrix: DMatrix<f64>,
}

impl ComplexStructure {
    /// Accepts a square matrix with J² = −I to 1e−8 relative.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let d = matrix.nrows();
        if matrix.ncols() != d {
            return Err(HgError::DimensionMismatch {
                expected: d,
                found: matrix.ncols(),
            });
        }
        let cs = Self { matrix };
        let r = cs.square_residual();
        if r > 1e-8 * max_abs_matrix(&cs.matrix).powi(2).max(1.0) {
            return Err(HgError::NotComplexStructure(r));
        }
        Ok(cs)
    }

    pub fn from_matrix_unchecked(matrix: DMatrix<f64>) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    /// Max-norm of J² + I.
    pub fn square_residual(&self) -> f64 {
        let d = self.dim();
        max_abs_matrix(&(&self.matrix * &self.matrix + DMatrix::identity(d, d)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypercomplexTriple {
    structures: [ComplexStructure; 3],
}

impl HypercomplexTriple {
    /// Groups three complex structures of equal dimension. The quaternionic
    /// relations are not enforced here; see [`check_structure`].
    pub fn new(j1: ComplexStructure, j2: ComplexStructure, j3: ComplexStructure) -> Result<Self> {
        let d = j1.dim();
        for j in [&j2, &j3] {
            if j.dim() != d {
                return Err(HgError::DimensionMismatch {
                    expected: d,
                    found: j.dim(),
                });
            }
        }
        Dim::from_ambient(d)?;
        Ok(Self {
            structures: [j1, j2, j3],
        })
    }

    pub fn dim(&self) -> usize {
        self.structures[0].dim()
    }

    /// J_α for α ∈ {0, 1, 2} (i.e. J₁, J₂, J₃).
    pub fn j(&self, alpha: usize) -> &ComplexStructure {
        &self.structures[alpha]
    }

    pub fn matrix(&self, alpha: usize) -> &DMatrix<f64> {
        self.structures[alpha].matrix()
    }

    pub fn epsilon(&self, alpha: usize) -> f64 {
        EPSILON[alpha]
    }

    /// Max over cyclic (α, β, γ) of the residuals of J_α = J_β J_γ = −J_γ J_β.
    pub fn quaternionic_residual(&self) -> f64 {
        (0..3)
            .map(|a| {
                let (b, c) = cyclic(a);
                let ja = self.matrix(a);
                let jb = self.matrix(b);
                let jc = self.matrix(c);
                let r1 = max_abs_matrix(&(ja - jb * jc));
                let r2 = max_abs_matrix(&(ja + jc * jb));
                r1.max(r2)
            })
            .fold(0.0, f64::max)
    }
}

/// The standard triple on R^{4n}, block-repeated from the 4-dimensional table.
pub fn standard_hypercomplex(dim: Dim) -> HypercomplexTriple {
    // (source, [(J1 target, sign), (J2 ...), (J3 ...)]) within one 4-block
    const TABLE: [[(usize, f64); 3]; 4] = [
        [(1, 1.0), (2, 1.0), (3, -1.0)],
        [(0, -1.0), (3, 1.0), (2, 1.0)],
        [(3, -1.0), (0, -1.0), (1, -1.0)],
        [(2, 1.0), (1, -1.0), (0, 1.0)],
    ];
    let d = dim.ambient();
    let mut mats = [DMatrix::zeros(d, d), DMatrix::zeros(d, d), DMatrix::zeros(d, d)];
    for k in 0..dim.n() {
        for (src, row) in TABLE.iter().enumerate() {
            for (alpha, &(dst, sign)) in row.iter().enumerate() {
                mats[alpha][(4 * k + dst, 4 * k + src)] = sign;
            }
        }
    }
    let [m1, m2, m3] = mats;
    HypercomplexTriple {
        structures: [
            ComplexStructure::from_matrix_unchecked(m1),
            ComplexStructure::from_matrix_unchecked(m2),
            ComplexStructure::from_matrix_unchecked(m3),
        ],
    }
}

pub fn standard_metric(dim: Dim) -> Metric {
    Metric::standard(dim)
}

/// Residuals of the (H,G)-structure axioms: J_α² = −I, the quaternionic
/// relations, and ε_α g(J_α x, J_α y) = g(x, y) for each α.
pub fn check_structure(g: &Metric, h: &HypercomplexTriple) -> Result<ResidualMap> {
    if g.dim() != h.dim() {
        return Err(HgError::DimensionMismatch {
            expected: g.dim(),
            found: h.dim(),
        });
    }
    let mut out = ResidualMap::new();
    let jscale = (0..3)
        .map(|a| max_abs_matrix(h.matrix(a)))
        .fold(0.0, f64::max);
    for a in 0..3 {
        out.insert(
            format!("J{}^2 = -I", a + 1),
            Residual::new(h.j(a).square_residual(), jscale * jscale),
        );
    }
    out.insert(
        "quaternionic relations",
        Residual::new(h.quaternionic_residual(), jscale * jscale),
    );
    let gm = g.components();
    let gscale = max_abs_matrix(gm);
    for a in 0..3 {
        let j = h.matrix(a);
        let pulled = j.transpose() * gm * j * EPSILON[a];
        out.insert(
            format!("metric compatibility J{}", a + 1),
            Residual::new(max_abs_matrix(&(pulled - gm)), gscale * jscale * jscale),
        );
    }
    Ok(out)
}

/// The associated bilinear forms g_α(x, y) = g(J_α x, y) as matrices.
pub fn associated_forms(g: &Metric, h: &HypercomplexTriple) -> Result<[DMatrix<f64>; 3]> {
    let residuals = check_structure(g, h)?;
    if !residuals.all_pass(1e-8) {
        return Err(HgError::IncompatibleStructure(describe_failures(&residuals, 1e-8)));
    }
    Ok(std::array::from_fn(|a| h.matrix(a).transpose() * g.components()))
}

pub(crate) fn describe_failures(map: &ResidualMap, tol: f64) -> String {
    map.iter()
        .filter(|(_, r)| !r.passes(tol))
        .map(|(k, r)| format!("{k}: {:e}", r.relative()))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Counts (positive, negative) eigenvalues of a symmetric matrix.
pub fn signature_of(m: &DMatrix<f64>) -> (usize, usize) {
    let eig = m.clone().symmetric_eigen();
    let pos = eig.eigenvalues.iter().filter(|&&v| v > SIGNATURE_ZERO).count();
    let neg = eig.eigenvalues.iter().filter(|&&v| v < -SIGNATURE_ZERO).count();
    (pos, neg)
}

/// A dense rank-R real tensor over a d-dimensional space.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<const R: usize> {
    dim: usize,
    data: Vec<f64>,
}

pub type Tensor2 = Tensor<2>;
pub type Tensor3 = Tensor<3>;
pub type Tensor4 = Tensor<4>;

impl<const R: usize> Tensor<R> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim.pow(R as u32)],
        }
    }

    pub fn from_vec(dim: usize, data: Vec<f64>) -> Result<Self> {
        let len = dim.pow(R as u32);
        if data.len() != len {
            return Err(HgError::DimensionMismatch {
                expected: len,
                found: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut([usize; R]) -> f64) -> Self {
        let len = dim.pow(R as u32);
        let mut data = Vec::with_capacity(len);
        let mut idx = [0usize; R];
        for _ in 0..len {
            data.push(f(idx));
            for s in (0..R).rev() {
                idx[s] += 1;
                if idx[s] < dim {
                    break;
                }
                idx[s] = 0;
            }
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn offset(&self, idx: [usize; R]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    /// `out(a₀, …) = self(a_{perm[0]}, a_{perm[1]}, …)`.
    pub fn permuted(&self, perm: [usize; R]) -> Self {
        Self::from_fn(self.dim, |idx| self[std::array::from_fn(|s| idx[perm[s]])])
    }

    /// Feeds `m e_j` into one slot: `out(…, e_j, …) = self(…, m e_j, …)`.
    pub fn substitute(&self, slot: usize, m: &DMatrix<f64>) -> Self {
        let d = self.dim;
        Self::from_fn(d, |mut idx| {
            let j = idx[slot];
            let mut acc = 0.0;
            for k in 0..d {
                let c = m[(k, j)];
                if c != 0.0 {
                    idx[slot] = k;
                    acc += c * self[idx];
                }
            }
            acc
        })
    }

    /// Contracts one slot against a matrix: `out(…, a, …) = Σ_b m[(a, b)] self(…, b, …)`.
    /// With `m = g⁻¹` this raises an index, with `m = g` it lowers one.
    pub fn contract_slot(&self, slot: usize, m: &DMatrix<f64>) -> Self {
        self.substitute(slot, &m.transpose())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// Cyclic sum over the first three slots.
    pub fn cyclic_sum(&self) -> Self {
        assert!(R >= 3, "cyclic sum needs at least three slots");
        let p1: [usize; R] = std::array::from_fn(|s| match s {
            0 => 1,
            1 => 2,
            2 => 0,
            s => s,
        });
        let p2: [usize; R] = std::array::from_fn(|s| match s {
            0 => 2,
            1 => 0,
            2 => 1,
            s => s,
        });
        self + &self.permuted(p1) + self.permuted(p2)
    }

    /// max|self − other| against the larger of the two magnitudes.
    pub fn residual_against(&self, other: &Self) -> Residual {
        Residual::new((self - other).max_abs(), self.max_abs().max(other.max_abs()))
    }
}

impl<const R: usize> Index<[usize; R]> for Tensor<R> {
    type Output = f64;
    #[inline]
    fn index(&self, idx: [usize; R]) -> &f64 {
        &self.data[self.offset(idx)]
    }
}

impl<const R: usize> IndexMut<[usize; R]> for Tensor<R> {
    #[inline]
    fn index_mut(&mut self, idx: [usize; R]) -> &mut f64 {
        let o = self.offset(idx);
        &mut self.data[o]
    }
}

fn zip_with<const R: usize>(a: &Tensor<R>, b: &Tensor<R>, f: impl Fn(f64, f64) -> f64) -> Tensor<R> {
    assert_eq!(a.dim, b.dim, "tensor dimensions differ");
    Tensor {
        dim: a.dim,
        data: a.data.iter().zip(&b.data).map(|(&x, &y)| f(x, y)).collect(),
    }
}

impl<const R: usize> Add<&Tensor<R>> for &Tensor<R> {
    type Output = Tensor<R>;
    fn add(self, rhs: &Tensor<R>) -> Tensor<R> {
        zip_with(self, rhs, |x, y| x + y)
    }
}

impl<const R: usize> Add<Tensor<R>> for Tensor<R> {
    type Output = Tensor<R>;
    fn add(self, rhs: Tensor<R>) -> Tensor<R> {
        &self + &rhs
    }
}

impl<const R: usize> Add<Tensor<R>> for &Tensor<R> {
    type Output = Tensor<R>;
    fn add(self, rhs: Tensor<R>) -> Tensor<R> {
        self + &rhs
    }
}

impl<const R: usize> Sub<&Tensor<R>> for &Tensor<R> {
    type Output = Tensor<R>;
    fn sub(self, rhs: &Tensor<R>) -> Tensor<R> {
        zip_with(self, rhs, |x, y| x - y)
    }
}

impl<const R: usize> Sub<Tensor<R>> for Tensor<R> {
    type Output = Tensor<R>;
    fn sub(self, rhs: Tensor<R>) -> Tensor<R> {
        &self - &rhs
    }
}

impl<const R: usize> Sub<Tensor<R>> for &Tensor<R> {
    type Output = Tensor<R>;
    fn sub(self, rhs: Tensor<R>) -> Tensor<R> {
        self - &rhs
    }
}

impl<const R: usize> Mul<f64> for &Tensor<R> {
    type Output = Tensor<R>;
    fn mul(self, s: f64) -> Tensor<R> {
        self.scaled(s)
    }
}

impl<const R: usize> Mul<f64> for Tensor<R> {
    type Output = Tensor<R>;
    fn mul(self, s: f64) -> Tensor<R> {
        self.scaled(s)
    }
}

impl<const R: usize> Neg for Tensor<R> {
    type Output = Tensor<R>;
    fn neg(self) -> Tensor<R> {
        self.scaled(-1.0)
    }
}

impl<const R: usize> Neg for &Tensor<R> {
    type Output = Tensor<R>;
    fn neg(self) -> Tensor<R> {
        self.scaled(-1.0)
    }
}

impl Tensor2 {
    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        Self::from_fn(m.nrows(), |[i, j]| m[(i, j)])
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self[[i, j]])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis_image(j: &DMatrix<f64>, src: usize) -> Vec<(usize, f64)> {
        (0..j.nrows())
            .filter(|&i| j[(i, src)] != 0.0)
            .map(|i| (i, j[(i, src)]))
            .collect()
    }

    #[test]
    fn standard_table_n1() {
        let h = standard_hypercomplex(Dim::new(1).unwrap());
        assert_eq!(basis_image(h.matrix(0), 0), vec![(1, 1.0)]);
        assert_eq!(basis_image(h.matrix(1), 0), vec![(2, 1.0)]);
        assert_eq!(basis_image(h.matrix(2), 0), vec![(3, -1.0)]);
        assert_eq!(basis_image(h.matrix(2), 3), vec![(0, 1.0)]);
    }

    #[test]
    fn standard_triple_is_exactly_quaternionic() {
        for n in 1..=3 {
            let h = standard_hypercomplex(Dim::new(n).unwrap());
            assert_eq!(h.quaternionic_residual(), 0.0);
            for a in 0..3 {
                assert_eq!(h.j(a).square_residual(), 0.0);
                for b in 0..3 {
                    if a != b {
                        let ab = h.matrix(a) * h.matrix(b);
                        let ba = h.matrix(b) * h.matrix(a);
                        assert_eq!(ab, -ba);
                    }
                }
            }
        }
    }

    #[test]
    fn standard_metric_signature_and_compatibility() {
        for n in 1..=2 {
            let dim = Dim::new(n).unwrap();
            let g = standard_metric(dim);
            assert_eq!(g.signature(), (2 * n, 2 * n));
            assert_eq!(signature_of(g.components()), (2 * n, 2 * n));
            let r = check_structure(&g, &standard_hypercomplex(dim)).unwrap();
            for (label, res) in r.iter() {
                assert_eq!(res.raw, 0.0, "{label}");
            }
        }
    }

    #[test]
    fn hand_checked_compatibility_n1() {
        // g(J1x,J1y) = g, g(J2x,J2y) = -g, g(J3x,J3y) = -g entry by entry
        let dim = Dim::new(1).unwrap();
        let g = standard_metric(dim);
        let h = standard_hypercomplex(dim);
        for (a, sign) in [(0, 1.0), (1, -1.0), (2, -1.0)] {
            let j = h.matrix(a);
            for x in 0..4 {
                for y in 0..4 {
                    let mut gjj = 0.0;
                    for p in 0..4 {
                        for q in 0..4 {
                            gjj += j[(p, x)] * j[(q, y)] * g.get(p, q);
                        }
                    }
                    assert_eq!(gjj, sign * g.get(x, y));
                }
            }
        }
    }

    #[test]
    fn lorentzian_like_metric_breaks_compatibility() {
        let dim = Dim::new(1).unwrap();
        let g = Metric::new(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            1.0, 1.0, 1.0, -1.0,
        ])))
        .unwrap();
        assert_eq!(g.signature(), (3, 1));
        assert!(!g.is_neutral());
        let r = check_structure(&g, &standard_hypercomplex(dim)).unwrap();
        let worst = (1..=3)
            .map(|a| r.get(&format!("metric compatibility J{a}")).unwrap().raw)
            .fold(0.0, f64::max);
        assert!(worst > 0.0);
    }

    #[test]
    fn swapped_triple_breaks_quaternionic_relations() {
        let dim = Dim::new(1).unwrap();
        let h = standard_hypercomplex(dim);
        let swapped = HypercomplexTriple::new(h.j(0).clone(), h.j(2).clone(), h.j(1).clone()).unwrap();
        let r = check_structure(&standard_metric(dim), &swapped).unwrap();
        assert!(r.get("quaternionic relations").unwrap().raw > 0.0);
    }

    #[test]
    fn associated_forms_symmetry_types() {
        for n in 1..=2 {
            let dim = Dim::new(n).unwrap();
            let g = standard_metric(dim);
            let h = standard_hypercomplex(dim);
            let [g1, g2, g3] = associated_forms(&g, &h).unwrap();
            assert_eq!(max_abs_matrix(&(&g1 + g1.transpose())), 0.0);
            assert_eq!(max_abs_matrix(&(&g2 - g2.transpose())), 0.0);
            assert_eq!(max_abs_matrix(&(&g3 - g3.transpose())), 0.0);
            assert_eq!(signature_of(&g2), (2 * n, 2 * n));
            assert_eq!(signature_of(&g3), (2 * n, 2 * n));
            // g_α(x, y) = −ε_α g(x, J_α y)
            for a in 0..3 {
                let rhs = -EPSILON[a] * (g.components() * h.matrix(a));
                let ga = [&g1, &g2, &g3][a];
                assert_eq!(max_abs_matrix(&(ga - rhs)), 0.0);
            }
        }
    }

    #[test]
    fn metric_rejects_bad_input() {
        assert!(matches!(
            Metric::new(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0])),
            Err(HgError::NotSymmetric(_))
        ));
        assert!(matches!(
            Metric::new(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0])),
            Err(HgError::SingularMetric)
        ));
        assert!(Dim::from_ambient(6).is_err());
        assert!(Dim::new(0).is_err());
    }

    #[test]
    fn tensor_permute_and_substitute() {
        let t = Tensor3::from_fn(3, |[i, j, k]| (100 * i + 10 * j + k) as f64);
        let p = t.permuted([0, 2, 1]);
        assert_eq!(p[[1, 2, 0]], t[[1, 0, 2]]);
        let m = DMatrix::from_fn(3, 3, |i, j| if (i + 1) % 3 == j { 2.0 } else { 0.0 });
        // m e_j = 2 e_{j-1}
        let s = t.substitute(1, &m);
        assert_eq!(s[[0, 1, 2]], 2.0 * t[[0, 0, 2]]);
    }

    #[test]
    fn raise_then_lower_is_identity() {
        let g = Metric::new(DMatrix::from_row_slice(
            4,
            4,
            &[2.0, 0.5, 0.0, 0.1, 0.5, -1.0, 0.2, 0.0, 0.0, 0.2, 1.5, 0.3, 0.1, 0.0, 0.3, -3.0],
        ))
        .unwrap();
        let t = Tensor3::from_fn(4, |[i, j, k]| ((i * 7 + j * 3 + k) % 5) as f64 - 2.0);
        let back = t.contract_slot(1, g.inverse()).contract_slot(1, g.components());
        assert!((&back - &t).max_abs() <= 1e-12 * t.max_abs());
    }
}
