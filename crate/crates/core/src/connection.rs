//! KT-potentials, the combined connection D with totally skew-symmetric
//! torsion, and the differential properties of its torsion.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::curvature::a_tensor;
use crate::model::{
    covariant_derivative2, covariant_derivative3, nabla_j, ConnectionCoefficients, LieAlgebraModel,
};
use crate::residual::{GatedResiduals, Residual, ResidualMap};
use crate::structural::square_norm;
use crate::linalg::rank;
use crate::tensor::{ComplexStructure, HypercomplexTriple, Metric, Tensor2, Tensor3, Tensor4, EPSILON};
use nalgebra::DMatrix;

/// Difference tensor Q(x, y, z) = g(D_x y − ∇_x y, z).
#[derive(Debug, Clone, PartialEq)]
pub struct Potential(pub Tensor3);

impl Potential {
    pub fn tensor(&self) -> &Tensor3 {
        &self.0
    }

    pub fn antisymmetry_residual(&self) -> Residual {
        total_antisymmetry(&self.0)
    }
}

/// T(x, y, z) = g(T(x, y), z).
#[derive(Debug, Clone, PartialEq)]
pub struct TorsionTensor(pub Tensor3);

impl TorsionTensor {
    pub fn tensor(&self) -> &Tensor3 {
        &self.0
    }

    pub fn antisymmetry_residual(&self) -> Residual {
        total_antisymmetry(&self.0)
    }

    pub fn square_norm(&self, g: &Metric) -> f64 {
        square_norm(&self.0, g)
    }
}

/// Deviation of a 3-tensor from being a 3-form.
pub fn total_antisymmetry(t: &Tensor3) -> Residual {
    let r = (t + &t.permuted([1, 0, 2]))
        .max_abs()
        .max((t + &t.permuted([0, 2, 1])).max_abs());
    Residual::new(r, t.max_abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KtMode {
    /// ½{F₁(x,y,J₁z) + F₁(y,z,J₁x) − F₁(z,x,J₁y)}, valid on G₁(J₁).
    General,
    /// ½F₁(x,y,J₁z), valid on W₁(J₁).
    NearlyKahler,
}

/// The potential of the KT-connection of (J₁, g).
pub fn kt_potential_hermitian(f1: &Tensor3, j1: &ComplexStructure, mode: KtMode) -> Potential {
    let g = f1.substitute(2, j1.matrix());
    let q = match mode {
        KtMode::General => &(&g + &g.permuted([1, 2, 0])) - &g.permuted([2, 0, 1]),
        KtMode::NearlyKahler => g,
    };
    Potential(q.scaled(0.5))
}

/// The potential of the KT-connection of a Norden pair (J_α, g): −¼ 𝔖 F_α(x,y,J_αz).
pub fn kt_potential_norden(fa: &Tensor3, ja: &ComplexStructure) -> Potential {
    Potential(fa.substitute(2, ja.matrix()).cyclic_sum().scaled(-0.25))
}

#[derive(Debug, Clone)]
pub struct PhktPotential {
    /// −½Q₁ + Q₂ + Q₃ from the three KT-potentials.
    pub combined: Potential,
    /// ½F₁(x,y,J₁z).
    pub closed_form: Potential,
    pub disagreement: Residual,
}

impl PhktPotential {
    pub fn potential(&self) -> &Potential {
        &self.closed_form
    }
}

pub fn phkt_potential(q1: &Potential, q2: &Potential, q3: &Potential, f1: &Tensor3, j1: &ComplexStructure) -> PhktPotential {
    let combined = Potential(&(&q1.0.scaled(-0.5) + &q2.0) + &q3.0);
    let closed_form = kt_potential_hermitian(f1, j1, KtMode::NearlyKahler);
    let disagreement = combined.0.residual_against(&closed_form.0);
    PhktPotential {
        combined,
        closed_form,
        disagreement,
    }
}

/// All potentials from F-data; Q₁ uses the general formula.
pub fn phkt_from_f(f: &[Tensor3; 3], h: &HypercomplexTriple) -> PhktPotential {
    let q1 = kt_potential_hermitian(&f[0], h.j(0), KtMode::General);
    let q2 = kt_potential_norden(&f[1], h.j(1));
    let q3 = kt_potential_norden(&f[2], h.j(2));
    phkt_potential(&q1, &q2, &q3, &f[0], h.j(0))
}

/// D = ∇ + g⁻¹Q.
pub fn connection_d(gamma: &ConnectionCoefficients, q: &Potential, g: &Metric) -> ConnectionCoefficients {
    gamma.shifted(&q.0, g)
}

/// D_x y = ∇_x y − ½J₁(∇_xJ₁)y, from the (1,2) form of ∇J₁.
pub fn connection_d_endomorphism(
    gamma: &ConnectionCoefficients,
    nabla_j1: &Tensor3,
    j1: &ComplexStructure,
) -> ConnectionCoefficients {
    ConnectionCoefficients::new(gamma.tensor() - &nabla_j1.contract_slot(2, j1.matrix()).scaled(0.5))
}

/// Residuals of DJ_α = 0, Dg = 0 and Dg_α = 0.
pub fn naturality_residuals(d: &ConnectionCoefficients, g: &Metric, h: &HypercomplexTriple) -> ResidualMap {
    let scale = d.tensor().max_abs() * g.components().abs().max();
    let mut out = ResidualMap::new();
    for a in 0..3 {
        out.insert(format!("D J{}", a + 1), Residual::new(nabla_j(d, h.j(a)).max_abs(), scale));
    }
    out.insert("D g", Residual::new(covariant_derivative2(d, g.components()).max_abs(), scale));
    for a in 0..3 {
        let ga = h.matrix(a).transpose() * g.components();
        out.insert(format!("D g{}", a + 1), Residual::new(covariant_derivative2(d, &ga).max_abs(), scale));
    }
    out
}

/// T(x,y) = D_x y − D_y x − [x,y], lowered with g.
pub fn torsion(d: &ConnectionCoefficients, m: &LieAlgebraModel) -> TorsionTensor {
    let dt = d.tensor();
    let v = &(dt - &dt.permuted([1, 0, 2])) - m.structure_constants().tensor();
    TorsionTensor(v.contract_slot(2, m.metric().components()))
}

/// Exterior derivative of a left-invariant 3-form from brackets alone:
/// dω(x₀..x₃) = Σ_{i<j} (−1)^{i+j} ω([x_i, x_j], …).
pub fn exterior_derivative_intrinsic(omega: &Tensor3, m: &LieAlgebraModel) -> Tensor4 {
    let d = omega.dim();
    let c = m.structure_constants().tensor();
    // B(a, b, k, l) = ω([e_a, e_b], e_k, e_l)
    let b = Tensor4::from_fn(d, |[a, bb, k, l]| (0..d).map(|mm| c[[a, bb, mm]] * omega[[mm, k, l]]).sum());
    const TERMS: [(f64, [usize; 4]); 6] = [
        (-1.0, [0, 1, 2, 3]),
        (1.0, [0, 2, 1, 3]),
        (-1.0, [0, 3, 1, 2]),
        (-1.0, [1, 2, 0, 3]),
        (1.0, [1, 3, 0, 2]),
        (-1.0, [2, 3, 0, 1]),
    ];
    TERMS
        .iter()
        .fold(Tensor4::zeros(d), |acc, (s, p)| acc + b.permuted(*p).scaled(*s))
}

/// dω(x₀..x₃) = Σ_i (−1)^i (∇_{x_i}ω)(…) from the covariant derivative of ω.
pub fn exterior_derivative_nabla(nabla_omega: &Tensor4) -> Tensor4 {
    const TERMS: [(f64, [usize; 4]); 4] = [
        (1.0, [0, 1, 2, 3]),
        (-1.0, [1, 0, 2, 3]),
        (1.0, [2, 0, 1, 3]),
        (-1.0, [3, 0, 1, 2]),
    ];
    let d = nabla_omega.dim();
    TERMS
        .iter()
        .fold(Tensor4::zeros(d), |acc, (s, p)| acc + nabla_omega.permuted(*p).scaled(*s))
}

/// δT(y, z) = −Σ g^{ij} (∇_{e_i} T)(e_j, y, z).
pub fn codifferential(nabla_t: &Tensor4, g: &Metric) -> Tensor2 {
    let d = nabla_t.dim();
    let gi = g.inverse();
    Tensor2::from_fn(d, |[y, z]| {
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                s += gi[(i, j)] * nabla_t[[i, j, y, z]];
            }
        }
        -s
    })
}

/// DT = 0, ∇T = ½𝔖A₁, dT = 2𝔖A₁ (with dT from brackets), δT = 0, and the
/// agreement of the two exterior-derivative formulas.
pub fn torsion_derivatives(
    m: &LieAlgebraModel,
    gamma: &ConnectionCoefficients,
    d: &ConnectionCoefficients,
    t: &TorsionTensor,
    a1: &Tensor4,
) -> ResidualMap {
    let tt = t.tensor();
    let dt = covariant_derivative3(d, tt);
    let nt = covariant_derivative3(gamma, tt);
    let sa = a1.cyclic_sum();
    let d_int = exterior_derivative_intrinsic(tt, m);
    let d_nab = exterior_derivative_nabla(&nt);
    let delta = codifferential(&nt, m.metric());
    let mut out = ResidualMap::new();
    out.insert("D T = 0", Residual::new(dt.max_abs(), tt.max_abs() * d.tensor().max_abs()));
    out.insert("nabla T = 1/2 S A1", nt.residual_against(&sa.scaled(0.5)));
    out.insert("dT = 2 S A1", d_int.residual_against(&sa.scaled(2.0)));
    out.insert("delta T = 0", Residual::new(delta.max_abs(), nt.max_abs()));
    out.insert("dT intrinsic = dT via nabla", d_int.residual_against(&d_nab));
    out
}

/// Dimension of the space of 3-tensors P such that D + g⁻¹P is still natural
/// (preserves g and every J_α) and still has totally skew torsion. Zero
/// means the natural connection with skew torsion is unique at that point.
pub fn natural_skew_deformation_dim(g: &Metric, h: &HypercomplexTriple) -> usize {
    let d = g.dim();
    let n3 = d * d * d;
    type LinearMap = Box<dyn Fn(&Tensor3) -> Tensor3>;
    let maps: Vec<LinearMap> = {
        let mut v: Vec<LinearMap> = vec![
            Box::new(|p: &Tensor3| p + &p.permuted([1, 0, 2])),
            Box::new(|p: &Tensor3| p + &p.permuted([0, 2, 1])),
        ];
        for (a, e) in EPSILON.into_iter().enumerate() {
            // P(x, J y, z) = −ε g(A_x y, J z) when A_x commutes with J
            let j = h.matrix(a).clone();
            v.push(Box::new(move |p: &Tensor3| &p.substitute(1, &j) + &p.substitute(2, &j).scaled(e)));
        }
        v
    };
    let mut mat = DMatrix::zeros(maps.len() * n3, n3);
    for col in 0..n3 {
        let mut basis = Tensor3::zeros(d);
        basis.as_mut_slice()[col] = 1.0;
        for (b, f) in maps.iter().enumerate() {
            for (r, v) in f(&basis).as_slice().iter().enumerate() {
                mat[(b * n3 + r, col)] = *v;
            }
        }
    }
    n3 - rank(&mat)
}

/// Every connection-level object of a model and its checks.
#[derive(Debug, Clone)]
pub struct ConnectionAnalysis {
    pub q1_general: Potential,
    pub q1_reduced: Potential,
    pub q2: Potential,
    pub q3: Potential,
    pub phkt: PhktPotential,
    pub d: ConnectionCoefficients,
    pub torsion: TorsionTensor,
    /// Identities of each KT-potential, gated on the class it is defined for.
    pub potentials: GatedResiduals,
    /// Naturality, skew torsion, potential agreement and torsion derivatives, gated on W₁₃₃.
    pub w133: GatedResiduals,
    /// Identities that hold on any model.
    pub universal: ResidualMap,
}

impl ConnectionAnalysis {
    /// `g1`, `w1` and `w133` are the class verdicts of the model's F-data.
    pub fn new(
        m: &LieAlgebraModel,
        geo: &crate::structural::LieGeometry,
        verdicts: &crate::classify::ClassificationReport,
    ) -> Self {
        use crate::classify::ClassLabel;
        let h = m.hypercomplex();
        let g = m.metric();
        let f = &geo.f;
        let q1_general = kt_potential_hermitian(&f[0], h.j(0), KtMode::General);
        let q1_reduced = kt_potential_hermitian(&f[0], h.j(0), KtMode::NearlyKahler);
        let q2 = kt_potential_norden(&f[1], h.j(1));
        let q3 = kt_potential_norden(&f[2], h.j(2));
        let phkt = phkt_potential(&q1_general, &q2, &q3, &f[0], h.j(0));
        let d = connection_d(&geo.gamma, phkt.potential(), g);
        let d_end = connection_d_endomorphism(&geo.gamma, &geo.nabla_j[0], h.j(0));
        let torsion = torsion(&d, m);

        let mut universal = ResidualMap::new();
        universal.insert("D = nabla + g^-1 Q vs nabla - 1/2 J1 (nabla J1)", d.tensor().residual_against(d_end.tensor()));
        let q = phkt.potential().tensor();
        let t_expected = q - &q.permuted([1, 0, 2]);
        universal.insert("T(x,y,z) = Q(x,y,z) - Q(y,x,z)", torsion.tensor().residual_against(&t_expected));

        let mut pot = ResidualMap::new();
        pot.insert("Q1 skew (G1(J1))", q1_general.antisymmetry_residual());
        pot.insert("Q1 general = Q1 reduced (W1(J1))", q1_general.0.residual_against(&q1_reduced.0));
        pot.insert("Q2 skew (W3(J2))", q2.antisymmetry_residual());
        pot.insert("Q3 skew (W3(J3))", q3.antisymmetry_residual());
        let pot_ok = verdicts.passes(ClassLabel::W1J1)
            && verdicts.passes(ClassLabel::W3J2)
            && verdicts.passes(ClassLabel::W3J3);

        let w133_ok = verdicts.is_w133();
        if !w133_ok {
            warn!("connection D evaluated outside W133; its identities are not expected to hold");
        }
        let mut w = naturality_residuals(&d, g, h);
        w.insert("-1/2 Q1 + Q2 + Q3 = 1/2 F1(x,y,J1z)", phkt.disagreement);
        w.insert("Q skew", phkt.potential().antisymmetry_residual());
        w.insert("T skew", torsion.antisymmetry_residual());
        w.insert("T = 2Q", torsion.tensor().residual_against(&q.scaled(2.0)));
        let nt = torsion.square_norm(g);
        let n1 = square_norm(&f[0], g);
        let nscale = f[0].frobenius().powi(2);
        w.insert("|T|^2 = |nabla J1|^2", Residual::new((nt - n1).abs(), nscale));
        let a1 = a_tensor(&f[0], g);
        w.extend(torsion_derivatives(m, &geo.gamma, &d, &torsion, &a1));

        Self {
            q1_general,
            q1_reduced,
            q2,
            q3,
            phkt,
            d,
            torsion,
            potentials: GatedResiduals {
                residuals: pot,
                precondition_met: pot_ok,
            },
            w133: GatedResiduals {
                residuals: w,
                precondition_met: w133_ok,
            },
            universal,
        }
    }
}
