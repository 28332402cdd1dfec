//! Linear constraints on structural-tensor data.
//!
//! F-data is a vector of unknowns holding the components of F₁, F₂ and, in
//! the full layout, F₃. In the point layout F₃ is not stored; every
//! occurrence of F₃ expands through F₃(x,y,z) = F₁(x,J₂y,z) − F₂(x,y,J₁z).

use crate::linalg::{ConstraintSystem, LinExpr};
use crate::tensor::{cyclic, HypercomplexTriple, EPSILON};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FLayout {
    /// Unknowns F₁, F₂ (2d³); F₃ derived.
    Point,
    /// Unknowns F₁, F₂, F₃ (3d³).
    Full,
}

/// One term c · F_α(S₀ e_x, S₁ e_y, S₂ e_z), where S_s is J_{subs[s]} or the identity.
#[derive(Debug, Clone, Copy)]
pub struct Term {
    pub coef: f64,
    pub alpha: usize,
    pub args: [usize; 3],
    pub subs: [Option<usize>; 3],
}

pub fn term(coef: f64, alpha: usize, args: [usize; 3], subs: [Option<usize>; 3]) -> Term {
    Term {
        coef,
        alpha,
        args,
        subs,
    }
}

/// A linear condition on F-data, imposed for every basis triple (x, y, z).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Condition {
    /// The three symmetry identities of F_α.
    Fundamental(usize),
    /// Both interrelation lines for the cyclic triple starting at α.
    Interrelation(usize),
    W1,
    G1,
    W3(usize),
    W0(usize),
}

impl Condition {
    /// The defining expressions, each of which must vanish.
    pub fn expressions(self, x: usize, y: usize, z: usize) -> Vec<Vec<Term>> {
        const N: Option<usize> = None;
        match self {
            Condition::Fundamental(a) => {
                let e = EPSILON[a];
                let j = Some(a);
                vec![
                    vec![term(1.0, a, [x, y, z], [N; 3]), term(e, a, [x, z, y], [N; 3])],
                    vec![term(1.0, a, [x, y, z], [N; 3]), term(e, a, [x, y, z], [N, j, j])],
                    vec![term(1.0, a, [x, y, z], [N, j, N]), term(-e, a, [x, y, z], [N, N, j])],
                ]
            }
            Condition::Interrelation(a) => {
                let (b, c) = cyclic(a);
                vec![
                    vec![
                        term(1.0, a, [x, y, z], [N; 3]),
                        term(-1.0, b, [x, y, z], [N, Some(c), N]),
                        term(EPSILON[b], c, [x, y, z], [N, N, Some(b)]),
                    ],
                    vec![
                        term(1.0, a, [x, y, z], [N; 3]),
                        term(1.0, c, [x, y, z], [N, Some(b), N]),
                        term(-EPSILON[c], b, [x, y, z], [N, N, Some(c)]),
                    ],
                ]
            }
            Condition::W1 => vec![vec![
                term(1.0, 0, [x, y, z], [N; 3]),
                term(1.0, 0, [y, x, z], [N; 3]),
            ]],
            Condition::G1 => {
                let j = Some(0);
                vec![vec![
                    term(1.0, 0, [x, z, y], [N; 3]),
                    term(-1.0, 0, [x, z, y], [j, j, N]),
                    term(-1.0, 0, [z, x, y], [j, j, N]),
                    term(1.0, 0, [z, x, y], [N; 3]),
                ]]
            }
            Condition::W3(a) => vec![vec![
                term(1.0, a, [x, y, z], [N; 3]),
                term(1.0, a, [y, z, x], [N; 3]),
                term(1.0, a, [z, x, y], [N; 3]),
            ]],
            Condition::W0(a) => vec![vec![term(1.0, a, [x, y, z], [N; 3])]],
        }
    }
}

/// Maps terms of F-data onto the unknowns of a layout.
#[derive(Debug, Clone, Copy)]
pub struct FSpace<'a> {
    d: usize,
    layout: FLayout,
    h: &'a HypercomplexTriple,
}

impl<'a> FSpace<'a> {
    pub fn new(h: &'a HypercomplexTriple, layout: FLayout) -> Self {
        Self {
            d: h.dim(),
            layout,
            h,
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn layout(&self) -> FLayout {
        self.layout
    }

    pub fn block(&self) -> usize {
        self.d * self.d * self.d
    }

    pub fn unknowns(&self) -> usize {
        match self.layout {
            FLayout::Point => 2 * self.block(),
            FLayout::Full => 3 * self.block(),
        }
    }

    fn offset(&self, alpha: usize, [x, y, z]: [usize; 3]) -> usize {
        alpha * self.block() + (x * self.d + y) * self.d + z
    }

    /// F_α(e_x, e_y, e_z) as a functional on the unknowns.
    pub fn entry(&self, alpha: usize, args: [usize; 3]) -> LinExpr {
        match (self.layout, alpha) {
            (FLayout::Point, 2) => {
                let mut e = LinExpr::new();
                self.add_term(&mut e, term(1.0, 0, args, [None, Some(1), None]));
                self.add_term(&mut e, term(-1.0, 1, args, [None, None, Some(0)]));
                e
            }
            _ => LinExpr::var(self.offset(alpha, args)),
        }
    }

    pub fn add_term(&self, out: &mut LinExpr, t: Term) {
        let mut args = t.args;
        self.expand(out, &t, 0, &mut args, t.coef);
    }

    // Expands J-substituted slots one at a time: J e_j = Σ_k J[(k, j)] e_k.
    fn expand(&self, out: &mut LinExpr, t: &Term, slot: usize, args: &mut [usize; 3], coef: f64) {
        if slot == 3 {
            out.add_scaled(&self.entry(t.alpha, *args), coef);
            return;
        }
        match t.subs[slot] {
            None => self.expand(out, t, slot + 1, args, coef),
            Some(b) => {
                let j = self.h.matrix(b);
                let src = t.args[slot];
                for k in 0..self.d {
                    let c = j[(k, src)];
                    if c != 0.0 {
                        args[slot] = k;
                        self.expand(out, t, slot + 1, args, coef * c);
                    }
                }
                args[slot] = src;
            }
        }
    }

    pub fn expression(&self, terms: &[Term]) -> LinExpr {
        let mut e = LinExpr::new();
        for &t in terms {
            self.add_term(&mut e, t);
        }
        e
    }

    pub fn push_condition(&self, sys: &mut ConstraintSystem, cond: Condition) {
        let d = self.d;
        for x in 0..d {
            for y in 0..d {
                for z in 0..d {
                    for terms in cond.expressions(x, y, z) {
                        sys.push(self.expression(&terms));
                    }
                }
            }
        }
    }

    pub fn system(&self, conditions: &[Condition]) -> ConstraintSystem {
        let mut sys = ConstraintSystem::new(self.unknowns());
        for &c in conditions {
            self.push_condition(&mut sys, c);
        }
        sys
    }
}

/// Identities satisfied by the structural tensors of every almost (H,G)-manifold.
pub fn universal_conditions() -> Vec<Condition> {
    (0..3)
        .map(Condition::Fundamental)
        .chain((0..3).map(Condition::Interrelation))
        .collect()
}

/// Conditions defining W₁(J₁) ∩ W₃(J₂) ∩ W₃(J₃).
pub fn w133_conditions() -> Vec<Condition> {
    vec![Condition::W1, Condition::W3(1), Condition::W3(2)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{standard_hypercomplex, Dim};

    #[test]
    fn point_entry_for_f3_expands_to_two_terms() {
        let h = standard_hypercomplex(Dim::new(1).unwrap());
        let s = FSpace::new(&h, FLayout::Point);
        let e = s.entry(2, [0, 0, 0]).normalized();
        // F₃(e0,e0,e0) = F₁(e0, J₂e0, e0) − F₂(e0, e0, J₁e0) = F₁(0,2,0) − F₂(0,0,1)
        assert_eq!(e.terms(), &[(8, 1.0), (64 + 1, -1.0)]);
    }

    #[test]
    fn full_layout_counts() {
        let h = standard_hypercomplex(Dim::new(1).unwrap());
        let s = FSpace::new(&h, FLayout::Full);
        assert_eq!(s.unknowns(), 192);
        let sys = s.system(&[Condition::W0(0), Condition::W0(1), Condition::W0(2)]);
        assert_eq!(sys.nullspace().dim(), 0);
    }

    #[test]
    fn w1_alone_leaves_slot3_free() {
        // F₁ antisymmetric in its first two slots, nothing else: d · d(d−1)/2 free entries
        let h = standard_hypercomplex(Dim::new(1).unwrap());
        let s = FSpace::new(&h, FLayout::Full);
        let sys = s.system(&[Condition::W1, Condition::W0(1), Condition::W0(2)]);
        assert_eq!(sys.nullspace().dim(), 4 * 6);
    }
}
