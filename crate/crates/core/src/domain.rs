//! Invariant open domains built from origin-centred pieces.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::FiniteGroupRep;
use crate::linalg::{to_vec, Vector};
use crate::numerics::stream_rng;

/// Open subset of ℝᵈ. Each node has a signed margin function, positive
/// inside and 1-Lipschitz, so membership is `margin > 0` and the closure is
/// `margin >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainExpr {
    FullSpace,
    Ball { r: f64 },
    Annulus { r1: f64, r2: f64 },
    PuncturedSpace,
    /// Ball around an arbitrary center; not invariant on its own.
    OffsetBall { center: Vec<f64>, r: f64 },
    /// `a` minus the closure of `b`.
    Difference { a: Box<DomainExpr>, b: Box<DomainExpr> },
    Union { items: Vec<DomainExpr> },
    Intersection { items: Vec<DomainExpr> },
}

impl DomainExpr {
    pub fn margin(&self, z: &Vector) -> f64 {
        match self {
            DomainExpr::FullSpace => f64::INFINITY,
            DomainExpr::Ball { r } => r - z.norm(),
            DomainExpr::Annulus { r1, r2 } => {
                let n = z.norm();
                (n - r1).min(r2 - n)
            }
            DomainExpr::PuncturedSpace => z.norm(),
            DomainExpr::OffsetBall { center, r } => {
                let d: f64 = z.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                r - d.sqrt()
            }
            DomainExpr::Difference { a, b } => a.margin(z).min(-b.margin(z)),
            DomainExpr::Union { items } => {
                items.iter().map(|e| e.margin(z)).fold(f64::NEG_INFINITY, f64::max)
            }
            DomainExpr::Intersection { items } => {
                items.iter().map(|e| e.margin(z)).fold(f64::INFINITY, f64::min)
            }
        }
    }

    pub fn contains(&self, z: &Vector) -> bool {
        self.margin(z) > 0.0
    }

    pub fn contains_origin(&self, dim: usize) -> bool {
        self.contains(&Vector::zeros(dim))
    }

    pub fn difference(a: DomainExpr, b: DomainExpr) -> DomainExpr {
        DomainExpr::Difference { a: Box::new(a), b: Box::new(b) }
    }

    /// Sampled invariance check: membership must agree at x and gx for every
    /// generator, except at points within 1e-9 of the boundary.
    pub fn validate_invariant(&self, g: &FiniteGroupRep, bbox: f64, seed: u64) -> Result<()> {
        let mut rng = stream_rng(seed, 0xd0);
        let d = g.dim();
        for _ in 0..200 {
            let x = Vector::from_fn(d, |_, _| rng.gen_range(-bbox..bbox));
            let mx = self.margin(&x);
            for &gen in g.generators() {
                let gx = g.act(gen, &x);
                let mg = self.margin(&gx);
                if (mx > 0.0) != (mg > 0.0) && mx.abs().min(mg.abs()) > 1e-9 {
                    return Err(Error::NotInvariant { witness: to_vec(&x), residual: (mx - mg).abs() });
                }
            }
        }
        Ok(())
    }

    pub fn check_dim(&self, d: usize) -> Result<()> {
        match self {
            DomainExpr::OffsetBall { center, .. } if center.len() != d => {
                Err(Error::DimensionMismatch { expected: d, got: center.len() })
            }
            DomainExpr::Difference { a, b } => {
                a.check_dim(d)?;
                b.check_dim(d)
            }
            DomainExpr::Union { items } | DomainExpr::Intersection { items } => {
                items.iter().try_for_each(|e| e.check_dim(d))
            }
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vector;

    #[test]
    fn membership() {
        let ann = DomainExpr::Annulus { r1: 1.0, r2: 2.0 };
        assert!(ann.contains(&vector(&[1.5, 0.0])));
        assert!(!ann.contains(&vector(&[0.5, 0.0])));
        let p = DomainExpr::PuncturedSpace;
        assert!(!p.contains(&vector(&[0.0, 0.0])));
        let diff = DomainExpr::difference(DomainExpr::Ball { r: 2.0 }, DomainExpr::Ball { r: 1.0 });
        // the closed inner ball is removed
        assert!(!diff.contains(&vector(&[1.0, 0.0])));
        assert!(diff.contains(&vector(&[1.0 + 1e-9, 0.0])));
        assert!(!DomainExpr::Ball { r: 0.0 }.contains(&vector(&[0.0])));
    }

    #[test]
    fn invariance_sampling() {
        let g = FiniteGroupRep::dihedral(3).unwrap();
        let ok = DomainExpr::Union {
            items: vec![DomainExpr::Ball { r: 0.5 }, DomainExpr::Annulus { r1: 1.0, r2: 2.0 }],
        };
        ok.validate_invariant(&g, 2.5, 1).unwrap();
        let bad = DomainExpr::OffsetBall { center: vec![1.0, 0.0], r: 0.5 };
        assert!(matches!(bad.validate_invariant(&g, 1.5, 1), Err(Error::NotInvariant { .. })));
    }

    #[test]
    fn serde_round_trip() {
        let e = DomainExpr::difference(DomainExpr::FullSpace, DomainExpr::Ball { r: 0.1 });
        let s = serde_json::to_string(&e).unwrap();
        assert_eq!(serde_json::from_str::<DomainExpr>(&s).unwrap(), e);
    }
}
