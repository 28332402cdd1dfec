//! Search for left-invariant models in a target class.
//!
//! F-data depends linearly on the structure constants once (g, H) is fixed,
//! so the class conditions cut out a linear subspace L of C-space. The search
//! runs Levenberg–Marquardt on the Jacobi identity inside L, with a
//! normalization row that keeps it away from C = 0 (and, for strict targets,
//! away from F₁ = 0).

use log::{debug, info};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::classify::{class_residuals, dimension_gate, ClassTarget, ClassificationReport, DimensionAdvisory};
use crate::constraints::{FLayout, FSpace};
use crate::error::{HgError, Result};
use crate::linalg::{ConstraintSystem, LinExpr};
use crate::model::{f_data_from, param_count, JacobiPolicy, LieAlgebraModel, StructureConstants};
use crate::residual::DEFAULT_TOL;
use crate::tensor::{standard_hypercomplex, Dim, Metric, Tensor3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub restarts: usize,
    /// Levenberg–Marquardt iterations per restart.
    pub budget: usize,
    /// Stop once this many non-trivial models are certified.
    pub max_models: usize,
    /// Certification threshold on the optimizer penalty.
    pub threshold: f64,
    pub polish_steps: usize,
    /// Tolerance of the re-certification by classify.
    pub tol: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            restarts: 32,
            budget: 200,
            max_models: 1,
            threshold: 1e-12,
            polish_steps: 10,
            tol: DEFAULT_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyRecord {
    pub restart: usize,
    pub iteration: usize,
    pub penalty: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone)]
pub struct FoundModel {
    pub model: LieAlgebraModel,
    /// None for the trivial abelian candidate.
    pub restart: Option<usize>,
    pub iterations: usize,
    /// Jacobi² + Σ target-class residual², all relative.
    pub penalty: f64,
    pub report: ClassificationReport,
    /// max|F₁| / max|C|.
    pub f1_ratio: f64,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub target: ClassTarget,
    pub dim: Dim,
    pub seed: u64,
    pub subspace_dim: usize,
    pub advisory: DimensionAdvisory,
    /// Sorted by penalty.
    pub models: Vec<FoundModel>,
    /// Lowest optimizer penalty seen over all restarts.
    pub best_penalty: f64,
    /// Accepted steps of every restart.
    pub log: Vec<PenaltyRecord>,
}

/// Strict targets additionally require max|F₁| above this fraction of max|C|.
pub const STRICT_F1_RATIO: f64 = 0.1;

/// The linear subspace of structure constants whose F-data lies in the target classes.
#[derive(Debug, Clone)]
pub struct ClassSubspace {
    d: usize,
    /// Orthonormal columns in parameter space.
    basis: DMatrix<f64>,
    /// Structure constants of each basis column.
    tensors: Vec<Tensor3>,
    /// F₁ of each basis column, flattened (d³ × k).
    f1: DMatrix<f64>,
}

fn param_index(d: usize, i: usize, j: usize, k: usize) -> usize {
    // pairs (i, j), i < j, in row order
    let pair = i * d - i * (i + 1) / 2 + (j - i - 1);
    pair * d + k
}

impl ClassSubspace {
    pub fn new(dim: Dim, target: &ClassTarget) -> Self {
        let d = dim.ambient();
        let g = Metric::standard(dim);
        let h = standard_hypercomplex(dim);
        let np = param_count(d);
        let block = d * d * d;
        // rows[f] = sparse list of (param, coefficient) giving F-component f
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); 3 * block];
        for i in 0..d {
            for j in (i + 1)..d {
                for k in 0..d {
                    let p = param_index(d, i, j, k);
                    let c = StructureConstants::from_upper(d, [(i, j, k, 1.0)]);
                    let f = f_data_from(c.tensor(), &g, &h);
                    for (a, fa) in f.iter().enumerate() {
                        for (o, v) in fa.as_slice().iter().enumerate() {
                            if *v != 0.0 {
                                rows[a * block + o].push((p, *v));
                            }
                        }
                    }
                }
            }
        }
        let fs = FSpace::new(&h, FLayout::Full);
        let class_sys = fs.system(&target.conditions());
        let mut sys = ConstraintSystem::new(np);
        let mut acc = vec![0.0; np];
        let mut touched = Vec::new();
        for row in class_sys.rows() {
            for &(fi, coef) in row.terms() {
                for &(p, v) in &rows[fi] {
                    if acc[p] == 0.0 {
                        touched.push(p);
                    }
                    acc[p] += coef * v;
                }
            }
            let mut e = LinExpr::new();
            for &p in &touched {
                e.push(p, acc[p]);
                acc[p] = 0.0;
            }
            touched.clear();
            let e = e.normalized();
            if !e.terms().is_empty() {
                sys.push(e);
            }
        }
        let basis = sys.nullspace().basis().clone();
        let k = basis.ncols();
        let tensors = (0..k)
            .map(|q| StructureConstants::from_params(d, basis.column(q).as_slice()).tensor().clone())
            .collect();
        let f1 = DMatrix::from_fn(block, k, |r, q| rows[r].iter().map(|&(p, v)| v * basis[(p, q)]).sum());
        Self { d, basis, tensors, f1 }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient(&self) -> usize {
        self.basis.nrows()
    }

    /// Structure constants at coordinates `u`.
    pub fn structure_constants(&self, u: &[f64]) -> StructureConstants {
        let params = &self.basis * DVector::from_column_slice(u);
        StructureConstants::from_params(self.d, params.as_slice())
    }

    /// Rank of the linear map u ↦ F₁ on the subspace.
    pub fn f1_rank(&self) -> usize {
        crate::linalg::rank(&self.f1)
    }

    fn combine(&self, u: &[f64]) -> Tensor3 {
        let mut c = Tensor3::zeros(self.d);
        for (t, &w) in self.tensors.iter().zip(u) {
            if w != 0.0 {
                for (o, v) in c.as_mut_slice().iter_mut().zip(t.as_slice()) {
                    *o += w * v;
                }
            }
        }
        c
    }
}

/// Independent Jacobiator components: i < j < k, all m.
fn jacobi_rows(d: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for i in 0..d {
        for j in (i + 1)..d {
            for k in (j + 1)..d {
                out.push([i, j, k]);
            }
        }
    }
    out
}

/// 𝔖_{ijk} Σ_l a[i,j,l] b[l,k,m] on the listed triples; the Jacobiator is the
/// case a = b.
fn bilinear(a: &Tensor3, b: &Tensor3, triples: &[[usize; 3]], out: &mut [f64]) {
    let d = a.dim();
    for (t, &[i, j, k]) in triples.iter().enumerate() {
        for m in 0..d {
            let mut s = 0.0;
            for l in 0..d {
                s += a[[i, j, l]] * b[[l, k, m]] + a[[j, k, l]] * b[[l, i, m]] + a[[k, i, l]] * b[[l, j, m]];
            }
            out[t * d + m] = s;
        }
    }
}

struct Problem<'a> {
    space: &'a ClassSubspace,
    triples: Vec<[usize; 3]>,
    strict: bool,
}

impl Problem<'_> {
    fn rows(&self) -> usize {
        self.triples.len() * self.space.d + 1
    }

    fn residual(&self, u: &[f64]) -> DVector<f64> {
        let c = self.space.combine(u);
        let mut r = DVector::zeros(self.rows());
        let n = r.len() - 1;
        bilinear(&c, &c, &self.triples, &mut r.as_mut_slice()[..n]);
        r[n] = self.norm_sq(u) - 1.0;
        r
    }

    fn norm_sq(&self, u: &[f64]) -> f64 {
        let v = DVector::from_column_slice(u);
        if self.strict {
            (&self.space.f1 * v).norm_squared()
        } else {
            v.norm_squared()
        }
    }

    fn jacobian(&self, u: &[f64]) -> DMatrix<f64> {
        let c = self.space.combine(u);
        let rows = self.rows();
        let n = rows - 1;
        let mut jac = DMatrix::zeros(rows, u.len());
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        let v = DVector::from_column_slice(u);
        let norm_grad: DVector<f64> = if self.strict {
            (self.space.f1.transpose() * (&self.space.f1 * &v)) * 2.0
        } else {
            &v * 2.0
        };
        for (q, t) in self.space.tensors.iter().enumerate() {
            bilinear(&c, t, &self.triples, &mut a);
            bilinear(t, &c, &self.triples, &mut b);
            let mut col = jac.column_mut(q);
            for r in 0..n {
                col[r] = a[r] + b[r];
            }
            col[n] = norm_grad[q];
        }
        jac
    }
}

/// Solves (JᵀJ + λ diag(JᵀJ)) δ = −Jᵀr.
fn lm_step(jac: &DMatrix<f64>, r: &DVector<f64>, lambda: f64) -> Option<DVector<f64>> {
    let mut a = jac.transpose() * jac;
    let g = jac.transpose() * r;
    let floor = a.diagonal().max() * 1e-14 + f64::MIN_POSITIVE;
    for i in 0..a.nrows() {
        let di = a[(i, i)].max(floor);
        a[(i, i)] += lambda * di;
    }
    a.cholesky().map(|ch| -ch.solve(&g))
}

/// Minimum-norm Gauss–Newton step, truncating singular values below
/// `cut` relative to the largest.
fn gn_step(jac: &DMatrix<f64>, r: &DVector<f64>, cut: f64) -> Option<DVector<f64>> {
    let svd = jac.clone().svd(true, true);
    svd.solve(&(-r), cut * svd.singular_values.max()).ok()
}

struct RestartResult {
    u: Vec<f64>,
    penalty: f64,
    iterations: usize,
}

fn run_restart(prob: &Problem, mut u: Vec<f64>, restart: usize, opts: &SearchOptions, log: &mut Vec<PenaltyRecord>) -> RestartResult {
    let mut r = prob.residual(&u);
    let mut pen = r.norm_squared();
    let mut lambda = 1e-3;
    let mut iterations = 0;
    log.push(PenaltyRecord {
        restart,
        iteration: 0,
        penalty: pen,
        lambda,
    });
    while iterations < opts.budget && pen >= opts.threshold {
        iterations += 1;
        let jac = prob.jacobian(&u);
        let mut accepted = false;
        for _ in 0..12 {
            let Some(step) = lm_step(&jac, &r, lambda) else {
                lambda *= 4.0;
                continue;
            };
            let trial: Vec<f64> = u.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let rt = prob.residual(&trial);
            let pt = rt.norm_squared();
            if pt < pen {
                u = trial;
                r = rt;
                pen = pt;
                lambda = (lambda / 3.0).max(1e-15);
                accepted = true;
                log.push(PenaltyRecord {
                    restart,
                    iteration: iterations,
                    penalty: pen,
                    lambda,
                });
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            break;
        }
    }
    if pen < opts.threshold {
        for _ in 0..opts.polish_steps {
            let jac = prob.jacobian(&u);
            // Gauss–Newton at a few truncation levels, then small-λ LM; keep the best
            let gn = [1e-12, 1e-10, 1e-8].into_iter().filter_map(|cut| gn_step(&jac, &r, cut));
            let lm = [1e-12, 1e-9, 1e-6].into_iter().filter_map(|l| lm_step(&jac, &r, l));
            let best = gn
                .chain(lm)
                .map(|step| {
                    let trial: Vec<f64> = u.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
                    let rt = prob.residual(&trial);
                    (rt.norm_squared(), trial, rt)
                })
                .min_by(|a, b| a.0.total_cmp(&b.0));
            match best {
                Some((pt, trial, rt)) if pt < pen => {
                    u = trial;
                    r = rt;
                    pen = pt;
                }
                _ => {
                    debug!("polish stalled at {pen:e}");
                    break;
                }
            }
        }
    }
    debug!("restart {restart}: final penalty {pen:e}");
    RestartResult { u, penalty: pen, iterations }
}

fn certify(
    c: StructureConstants,
    target: &ClassTarget,
    tol: f64,
    restart: Option<usize>,
    iterations: usize,
) -> Option<FoundModel> {
    let model = match LieAlgebraModel::standard(c, JacobiPolicy::Reject) {
        Ok(m) => m,
        Err(e) => {
            debug!("candidate rejected: {e}");
            return None;
        }
    };
    let f = f_data_from(model.structure_constants().tensor(), model.metric(), model.hypercomplex());
    let report = class_residuals(&f, model.hypercomplex(), tol);
    if !report.satisfies(target) {
        debug!("candidate fails re-certification: {}", report.summary());
        return None;
    }
    let cmax = model.structure_constants().tensor().max_abs();
    let f1_ratio = if cmax > 0.0 { f[0].max_abs() / cmax } else { 0.0 };
    if target.strict && f1_ratio <= STRICT_F1_RATIO {
        debug!("candidate rejected: F1 ratio {f1_ratio:e}");
        return None;
    }
    let jac = model.structure_constants().jacobi_residual().relative();
    let penalty = jac * jac + target.labels.iter().map(|&l| report.residual(l).powi(2)).sum::<f64>();
    Some(FoundModel {
        model,
        restart,
        iterations,
        penalty,
        report,
        f1_ratio,
    })
}

/// Searches the standard (g, H) of the given dimension for models in `target`.
pub fn search_class(target: &ClassTarget, dim: Dim, seed: u64, opts: &SearchOptions) -> Result<SearchOutcome> {
    let advisory = dimension_gate(dim, target);
    if target.is_w133() && dim.ambient() < 8 {
        return Err(HgError::InvalidArgument(format!(
            "target {target} needs dimension at least 8, got {}",
            dim.ambient()
        )));
    }
    let space = ClassSubspace::new(dim, target);
    info!("class subspace of C-space: {} of {}", space.dim(), space.ambient());
    let mut models = Vec::new();
    let mut log = Vec::new();
    let mut best_penalty = f64::INFINITY;
    if !target.strict {
        let trivial = StructureConstants::zeros(dim.ambient());
        if let Some(m) = certify(trivial, target, opts.tol, None, 0) {
            best_penalty = 0.0;
            models.push(m);
        }
    }
    let prob = Problem {
        space: &space,
        triples: jacobi_rows(dim.ambient()),
        strict: target.strict,
    };
    let usable = if target.strict { space.f1_rank() > 0 } else { space.dim() > 0 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut found = 0;
    if usable {
        for restart in 0..opts.restarts {
            let mut u: Vec<f64> = (0..space.dim()).map(|_| StandardNormal.sample(&mut rng)).collect();
            let n = prob.norm_sq(&u).sqrt();
            if n > 0.0 {
                u.iter_mut().for_each(|v| *v /= n);
            }
            let res = run_restart(&prob, u, restart, opts, &mut log);
            debug!("restart {restart}: penalty {:e} after {} iterations", res.penalty, res.iterations);
            best_penalty = best_penalty.min(res.penalty);
            if res.penalty >= opts.threshold {
                continue;
            }
            let c = space.structure_constants(&res.u);
            let scale = c.tensor().max_abs();
            let c = StructureConstants::new(c.tensor().scaled(1.0 / scale))?;
            if let Some(m) = certify(c, target, opts.tol, Some(restart), res.iterations) {
                models.push(m);
                found += 1;
                if found >= opts.max_models {
                    break;
                }
            }
        }
    }
    models.sort_by(|a, b| a.penalty.total_cmp(&b.penalty));
    Ok(SearchOutcome {
        target: target.clone(),
        dim,
        seed,
        subspace_dim: space.dim(),
        advisory,
        models,
        best_penalty,
        log,
    })
}

/// Adds seeded skew noise of the given size to C, then takes one minimum-norm
/// Newton step back towards the Jacobi variety. The result is accepted with a
/// warning if the Jacobi identity still fails.
pub fn perturb(m: &LieAlgebraModel, magnitude: f64, seed: u64) -> Result<LieAlgebraModel> {
    if magnitude == 0.0 {
        return Ok(m.clone());
    }
    if magnitude < 0.0 || !magnitude.is_finite() {
        return Err(HgError::InvalidArgument(format!("perturbation magnitude {magnitude}")));
    }
    let d = m.d();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = m.structure_constants().to_params();
    for v in p.iter_mut() {
        let z: f64 = StandardNormal.sample(&mut rng);
        *v += magnitude * z;
    }
    let c = StructureConstants::from_params(d, &p);
    let triples = jacobi_rows(d);
    let n = triples.len() * d;
    let mut r = vec![0.0; n];
    bilinear(c.tensor(), c.tensor(), &triples, &mut r);
    let np = p.len();
    let mut jac = DMatrix::zeros(n, np);
    let (mut a, mut b) = (vec![0.0; n], vec![0.0; n]);
    for q in 0..np {
        let mut e = vec![0.0; np];
        e[q] = 1.0;
        let t = StructureConstants::from_params(d, &e);
        bilinear(c.tensor(), t.tensor(), &triples, &mut a);
        bilinear(t.tensor(), c.tensor(), &triples, &mut b);
        for row in 0..n {
            jac[(row, q)] = a[row] + b[row];
        }
    }
    let r = DVector::from_vec(r);
    let p = match gn_step(&jac, &r, 1e-12) {
        Some(step) if n > 0 => p.iter().zip(step.iter()).map(|(a, b)| a + b).collect(),
        _ => p,
    };
    m.with_structure_constants(StructureConstants::from_params(d, &p), JacobiPolicy::Warn)
}
