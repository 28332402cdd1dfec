//! Homogeneous linear constraint systems and their nullspaces.
//!
//! Rows are sparse. Two-term rows with equal-magnitude coefficients (the
//! symmetry relations produced by signed-permutation structures) are solved
//! exactly by a signed union-find; whatever remains is handled by SVD on the
//! reduced coordinates with rank threshold [`RANK_THRESHOLD`] × σ_max.

use std::collections::HashSet;

use nalgebra::DMatrix;

/// Relative singular-value cutoff used for every rank decision.
pub const RANK_THRESHOLD: f64 = 1e-9;

/// A sparse linear functional Σ cᵢ uᵢ.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinExpr {
    terms: Vec<(usize, f64)>,
}

impl LinExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn var(i: usize) -> Self {
        Self {
            terms: vec![(i, 1.0)],
        }
    }

    pub fn push(&mut self, i: usize, c: f64) {
        if c != 0.0 {
            self.terms.push((i, c));
        }
    }

    pub fn add_scaled(&mut self, other: &LinExpr, s: f64) {
        if s == 0.0 {
            return;
        }
        for &(i, c) in &other.terms {
            self.terms.push((i, c * s));
        }
    }

    /// Merges repeated variables and drops exact zeros; terms end up sorted.
    pub fn normalized(mut self) -> Self {
        self.terms.sort_by_key(|t| t.0);
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(self.terms.len());
        for (i, c) in self.terms {
            match out.last_mut() {
                Some(last) if last.0 == i => last.1 += c,
                _ => out.push((i, c)),
            }
        }
        // cancellation noise from ±1 arithmetic is exact; anything tiny is real roundoff
        out.retain(|t| t.1.abs() > 1e-14);
        Self { terms: out }
    }

    pub fn terms(&self) -> &[(usize, f64)] {
        &self.terms
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        self.terms.iter().map(|&(i, c)| c * u[i]).sum()
    }
}

#[derive(Debug, Clone)]
pub struct ConstraintSystem {
    unknowns: usize,
    rows: Vec<LinExpr>,
    seen: HashSet<Vec<(usize, u64)>>,
}

impl ConstraintSystem {
    pub fn new(unknowns: usize) -> Self {
        Self {
            unknowns,
            rows: Vec::new(),
            seen: HashSet::new(),
        }
    }

    pub fn unknowns(&self) -> usize {
        self.unknowns
    }

    pub fn rows(&self) -> &[LinExpr] {
        &self.rows
    }

    /// Adds the constraint `expr = 0`. Empty and duplicate rows (up to an
    /// overall sign) are dropped.
    pub fn push(&mut self, expr: LinExpr) {
        let expr = expr.normalized();
        if expr.terms.is_empty() {
            return;
        }
        let sign = if expr.terms[0].1 < 0.0 { -1.0 } else { 1.0 };
        let key: Vec<(usize, u64)> = expr
            .terms
            .iter()
            .map(|&(i, c)| (i, (c * sign).to_bits()))
            .collect();
        if self.seen.insert(key) {
            self.rows.push(expr);
        }
    }

    pub fn extend(&mut self, other: &ConstraintSystem) {
        for r in &other.rows {
            self.push(r.clone());
        }
    }

    /// Max |row · u| over all rows.
    pub fn residual(&self, u: &[f64]) -> f64 {
        self.rows.iter().map(|r| r.eval(u).abs()).fold(0.0, f64::max)
    }

    pub fn nullspace(&self) -> Nullspace {
        let (mut basis, rest) = self.union_find_basis();
        if !rest.is_empty() && basis.ncols() > 0 {
            let reduced = DMatrix::from_fn(rest.len(), basis.ncols(), |r, c| {
                rest[r]
                    .terms
                    .iter()
                    .map(|&(i, coef)| coef * basis[(i, c)])
                    .sum::<f64>()
            });
            let null = dense_nullspace(&reduced);
            basis = &basis * null;
        }
        Nullspace { basis }
    }

    /// Exact reduction by the two-term equal-magnitude rows. Returns an
    /// orthonormal basis of their solution space and the unprocessed rows.
    fn union_find_basis(&self) -> (DMatrix<f64>, Vec<&LinExpr>) {
        let n = self.unknowns;
        let mut uf = SignedUnionFind::new(n);
        let mut rest = Vec::new();
        for row in &self.rows {
            match row.terms[..] {
                [(i, _)] => uf.force_zero(i),
                [(i, a), (j, b)] if (a.abs() - b.abs()).abs() <= 1e-14 * a.abs() => {
                    // a u_i + b u_j = 0  ⇒  u_i = −(b/a) u_j
                    let s = if (a > 0.0) == (b > 0.0) { -1.0 } else { 1.0 };
                    uf.relate(i, j, s);
                }
                _ => rest.push(row),
            }
        }
        let classes = uf.classes();
        let mut basis = DMatrix::zeros(n, classes.len());
        for (c, members) in classes.iter().enumerate() {
            let norm = (members.len() as f64).sqrt();
            for &(i, s) in members {
                basis[(i, c)] = s / norm;
            }
        }
        (basis, rest)
    }
}

/// Orthonormal basis (columns) of a solution space.
#[derive(Debug, Clone)]
pub struct Nullspace {
    basis: DMatrix<f64>,
}

impl Nullspace {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Euclidean orthogonal projection of `u` onto the space.
    pub fn project(&self, u: &[f64]) -> Vec<f64> {
        let v = nalgebra::DVector::from_column_slice(u);
        let coeffs = self.basis.transpose() * v;
        (&self.basis * coeffs).iter().copied().collect()
    }

    /// The element with the given coordinates in the basis.
    pub fn combine(&self, coeffs: &[f64]) -> Vec<f64> {
        let c = nalgebra::DVector::from_column_slice(coeffs);
        (&self.basis * c).iter().copied().collect()
    }
}

/// Orthonormal basis of ker(m) from a full SVD, with rank threshold relative
/// to the largest singular value.
pub fn dense_nullspace(m: &DMatrix<f64>) -> DMatrix<f64> {
    let cols = m.ncols();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    // tall systems: same singular structure as their triangular factor
    let square = if m.nrows() > cols {
        m.clone().qr().r()
    } else {
        let mut padded = DMatrix::zeros(cols, cols);
        padded.rows_mut(0, m.nrows()).copy_from(m);
        padded
    };
    let svd = square.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return DMatrix::identity(cols, cols);
    }
    let cutoff = RANK_THRESHOLD * smax;
    let null_rows: Vec<usize> = (0..cols)
        .filter(|&r| svd.singular_values[r] <= cutoff)
        .collect();
    DMatrix::from_fn(cols, null_rows.len(), |i, c| v_t[(null_rows[c], i)])
}

/// Numerical rank with the crate-wide threshold.
pub fn rank(m: &DMatrix<f64>) -> usize {
    m.ncols() - dense_nullspace(m).ncols()
}

struct SignedUnionFind {
    parent: Vec<usize>,
    // sign of this node relative to its parent
    sign: Vec<f64>,
    zero: Vec<bool>,
}

impl SignedUnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            sign: vec![1.0; n],
            zero: vec![false; n],
        }
    }

    /// Root of `i` and the sign s with u_i = s · u_root.
    fn find(&mut self, i: usize) -> (usize, f64) {
        let p = self.parent[i];
        if p == i {
            return (i, 1.0);
        }
        let (root, ps) = self.find(p);
        self.parent[i] = root;
        self.sign[i] *= ps;
        (root, self.sign[i])
    }

    fn force_zero(&mut self, i: usize) {
        let (r, _) = self.find(i);
        self.zero[r] = true;
    }

    /// Records u_i = s · u_j.
    fn relate(&mut self, i: usize, j: usize, s: f64) {
        let (ri, si) = self.find(i);
        let (rj, sj) = self.find(j);
        if ri == rj {
            // si u_r = s sj u_r: inconsistent signs force zero
            if si != s * sj {
                self.zero[ri] = true;
            }
            return;
        }
        // u_ri = si u_i = si s sj u_rj
        self.parent[ri] = rj;
        self.sign[ri] = si * s * sj;
        if self.zero[ri] {
            self.zero[rj] = true;
        }
    }

    fn classes(&mut self) -> Vec<Vec<(usize, f64)>> {
        let n = self.parent.len();
        let mut by_root: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for i in 0..n {
            let (r, s) = self.find(i);
            by_root[r].push((i, s));
        }
        by_root
            .into_iter()
            .enumerate()
            .filter(|(r, members)| !self.zero[*r] && !members.is_empty())
            .map(|(_, members)| members)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn expr(terms: &[(usize, f64)]) -> LinExpr {
        let mut e = LinExpr::new();
        for &(i, c) in terms {
            e.push(i, c);
        }
        e
    }

    #[test]
    fn antisymmetric_pairs() {
        // u0 = -u1, u2 = u3, u4 = -u4
        let mut s = ConstraintSystem::new(5);
        s.push(expr(&[(0, 1.0), (1, 1.0)]));
        s.push(expr(&[(2, 1.0), (3, -1.0)]));
        s.push(expr(&[(4, 1.0), (4, 1.0)]));
        let ns = s.nullspace();
        assert_eq!(ns.dim(), 2);
        let v = ns.combine(&[1.0, 2.0]);
        assert!(s.residual(&v) < 1e-15);
        assert_eq!(v[4], 0.0);
    }

    #[test]
    fn sign_cycle_forces_zero() {
        let mut s = ConstraintSystem::new(3);
        s.push(expr(&[(0, 1.0), (1, -1.0)]));
        s.push(expr(&[(1, 1.0), (2, -1.0)]));
        s.push(expr(&[(2, 1.0), (0, 1.0)]));
        assert_eq!(s.nullspace().dim(), 0);
    }

    #[test]
    fn duplicates_are_dropped() {
        let mut s = ConstraintSystem::new(2);
        s.push(expr(&[(0, 1.0), (1, 2.0)]));
        s.push(expr(&[(0, -1.0), (1, -2.0)]));
        s.push(expr(&[(1, 0.0)]));
        assert_eq!(s.rows().len(), 1);
        assert_eq!(s.nullspace().dim(), 1);
    }

    #[test]
    fn wide_dense_system() {
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]);
        let n = dense_nullspace(&m);
        assert_eq!(n.ncols(), 2);
        assert!((&m * &n).abs().max() < 1e-14);
    }

    proptest! {
        #[test]
        fn nullspace_matches_dense_rank(seed in 0u64..200) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = 8;
            let mut sys = ConstraintSystem::new(n);
            let mut dense_rows = Vec::new();
            for _ in 0..rng.random_range(1..10) {
                let k = rng.random_range(1..4);
                let mut e = LinExpr::new();
                let mut row = vec![0.0; n];
                for _ in 0..k {
                    let i = rng.random_range(0..n);
                    let c = [1.0, -1.0, 0.5, 2.0][rng.random_range(0..4)];
                    e.push(i, c);
                    row[i] += c;
                }
                sys.push(e);
                dense_rows.extend(row);
            }
            let m = DMatrix::from_row_slice(dense_rows.len() / n, n, &dense_rows);
            let ns = sys.nullspace();
            prop_assert_eq!(ns.dim(), n - rank(&m));
            let b = ns.basis();
            prop_assert!((b.transpose() * b - DMatrix::identity(ns.dim(), ns.dim())).abs().max() < 1e-12);
            prop_assert!((&m * b).abs().max() < 1e-12);
        }
    }
}
