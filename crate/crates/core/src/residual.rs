//! Residual bookkeeping shared by every verification routine.
//!
//! A residual is a raw max-norm discrepancy together with the magnitude of the
//! data it was measured against. Verdicts compare the relative value to a
//! tolerance; the denominator never drops below [`ABS_FLOOR`].

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

/// Default relative pass tolerance for first-order checks.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Absolute floor applied to every residual denominator.
pub const ABS_FLOOR: f64 = 1e-10;
/// Curvature-level checks run at this multiple of the first-order tolerance.
pub const CURVATURE_TOL_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub raw: f64,
    pub scale: f64,
}

impl Residual {
    pub fn new(raw: f64, scale: f64) -> Self {
        Self { raw, scale }
    }

    pub fn zero() -> Self {
        Self { raw: 0.0, scale: 0.0 }
    }

    pub fn relative(&self) -> f64 {
        self.raw / self.scale.max(ABS_FLOOR)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.relative() <= tol
    }

    /// Combine two residuals by taking the worse raw value over the larger scale.
    pub fn max(self, other: Residual) -> Residual {
        Residual {
            raw: self.raw.max(other.raw),
            scale: self.scale.max(other.scale),
        }
    }
}

/// Ordered label → residual map.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResidualMap(pub IndexMap<String, Residual>);

impl ResidualMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, label: impl Into<String>, r: Residual) {
        self.0.insert(label.into(), r);
    }

    pub fn get(&self, label: &str) -> Option<&Residual> {
        self.0.get(label)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Residual)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn extend(&mut self, other: ResidualMap) {
        self.0.extend(other.0);
    }

    /// Largest relative residual in the map (0 when empty).
    pub fn worst(&self) -> f64 {
        self.0.values().map(Residual::relative).fold(0.0, f64::max)
    }

    pub fn all_pass(&self, tol: f64) -> bool {
        self.0.values().all(|r| r.passes(tol))
    }
}

/// Residuals of identities that are only claimed under a class precondition.
/// They are computed regardless; `precondition_met` records whether they are expected to pass.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GatedResiduals {
    pub residuals: ResidualMap,
    pub precondition_met: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_over_zero_is_zero() {
        assert_eq!(Residual::zero().relative(), 0.0);
        assert!(Residual::zero().passes(0.0));
    }

    #[test]
    fn floor_applies() {
        let r = Residual::new(1e-12, 0.0);
        assert!((r.relative() - 1e-2).abs() < 1e-15);
    }

    #[test]
    fn worst_picks_largest_relative() {
        let mut m = ResidualMap::new();
        m.insert("a", Residual::new(1.0, 10.0));
        m.insert("b", Residual::new(1.0, 2.0));
        assert_eq!(m.worst(), 0.5);
        assert!(!m.all_pass(0.4));
        assert!(m.all_pass(0.5));
    }
}
