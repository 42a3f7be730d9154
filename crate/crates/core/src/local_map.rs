//! Gradient local maps: a source potential, a stack of perturbation layers
//! and a list of domain cuts.

use serde::{Deserialize, Serialize};

use crate::domain::DomainExpr;
use crate::error::{Error, Result};
use crate::group::FiniteGroupRep;
use crate::linalg::{dist, to_vec, Matrix, Vector};
use crate::numerics::halton;
use crate::perturbation::Layer;
use crate::poly::Polynomial;
use crate::stratification::Stratum;

const FD_STEP: f64 = 1e-6;

/// Where the unperturbed potential comes from.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Source {
    Empty,
    Potential {
        poly: Polynomial,
        domain: DomainExpr,
    },
    /// φ(z) = ½(z−c)ᵀA(z−c) on the ball of the given radius around each center.
    Quadratic {
        centers: Vec<Vector>,
        forms: Vec<Matrix>,
        radius: f64,
    },
    /// φ(x+v) = k(y) + ½|v|² on a tube over balls in each conjugate sheet,
    /// where y are the sheet coordinates of x.
    Lift {
        sheets: Vec<Matrix>,
        k: Polynomial,
        centers: Vec<Vector>,
        rho: f64,
        eps: f64,
    },
    Union(Vec<LocalGradientMap>),
}

/// Domain restrictions applied after the layers.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Cut {
    /// Removes the union of the given subspaces.
    RemoveStratum { projectors: Vec<Matrix> },
    /// Removes the closure of an open set.
    RemoveClosed { set: DomainExpr },
    /// Removes the closed tube of radius `frac·ε` of layer `layer`.
    RemoveTube { layer: usize, frac: f64 },
    /// Keeps only the open tube of radius `frac·ε` of layer `layer`.
    KeepTube { layer: usize, frac: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalGradientMap {
    pub dim: usize,
    pub source: Source,
    pub layers: Vec<Layer>,
    pub cuts: Vec<Cut>,
}

fn on_subspace(p: &Matrix, z: &Vector) -> bool {
    dist(z, &(p * z)) <= 1e-12 * (1.0 + z.norm())
}

impl LocalGradientMap {
    pub fn empty(dim: usize) -> Self {
        LocalGradientMap { dim, source: Source::Empty, layers: Vec::new(), cuts: Vec::new() }
    }

    pub fn from_potential(poly: Polynomial, domain: DomainExpr) -> Self {
        LocalGradientMap {
            dim: poly.dim(),
            source: Source::Potential { poly, domain },
            layers: Vec::new(),
            cuts: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        match &self.source {
            Source::Empty => true,
            Source::Union(parts) => parts.iter().all(|p| p.is_empty()),
            _ => false,
        }
    }

    fn source_contains(&self, z: &Vector) -> bool {
        match &self.source {
            Source::Empty => false,
            Source::Potential { domain, .. } => domain.contains(z),
            Source::Quadratic { centers, radius, .. } => centers.iter().any(|c| dist(z, c) < *radius),
            Source::Lift { sheets, centers, rho, eps, .. } => sheets.iter().any(|m| {
                let y = m.transpose() * z;
                let v = z - m * &y;
                v.norm() < *eps && centers.iter().any(|c| dist(&y, c) < *rho)
            }),
            Source::Union(parts) => parts.iter().any(|p| p.contains(z)),
        }
    }

    fn cut_allows(&self, cut: &Cut, z: &Vector) -> bool {
        match cut {
            Cut::RemoveStratum { projectors } => !projectors.iter().any(|p| on_subspace(p, z)),
            Cut::RemoveClosed { set } => set.margin(z) < 0.0,
            Cut::RemoveTube { layer, frac } => self.layers[*layer].cylinder(z, *frac) > 0.0,
            Cut::KeepTube { layer, frac } => self.layers[*layer].cylinder(z, *frac) < 0.0,
        }
    }

    pub fn contains(&self, z: &Vector) -> bool {
        z.len() == self.dim
            && self.source_contains(z)
            && self.layers.iter().all(|l| !l.in_shell(z))
            && self.cuts.iter().all(|c| self.cut_allows(c, z))
    }

    fn source_value_grad(&self, z: &Vector) -> Result<(f64, Vector)> {
        let outside = || Error::OutsideDomain { point: to_vec(z) };
        match &self.source {
            Source::Empty => Err(outside()),
            Source::Potential { poly, domain } => {
                if !domain.contains(z) {
                    return Err(outside());
                }
                Ok(poly.value_grad(z))
            }
            Source::Quadratic { centers, forms, radius } => {
                let k = centers.iter().position(|c| dist(z, c) < *radius).ok_or_else(outside)?;
                let d = z - &centers[k];
                let g = &forms[k] * &d;
                Ok((0.5 * d.dot(&g), g))
            }
            Source::Lift { sheets, k, centers, rho, eps } => {
                for m in sheets {
                    let y = m.transpose() * z;
                    let v = z - m * &y;
                    if v.norm() < *eps && centers.iter().any(|c| dist(&y, c) < *rho) {
                        let (kv, kg) = k.value_grad(&y);
                        return Ok((kv + 0.5 * v.norm_squared(), m * kg + v));
                    }
                }
                Err(outside())
            }
            Source::Union(parts) => {
                parts.iter().find(|p| p.contains(z)).ok_or_else(outside)?.value_grad(z)
            }
        }
    }

    fn eval_level(&self, z: &Vector, level: usize) -> Result<(f64, Vector)> {
        if level == 0 {
            return self.source_value_grad(z);
        }
        self.layers[level - 1].eval(z, |w| self.eval_level(w, level - 1))
    }

    /// Potential value and gradient at a point of the domain.
    pub fn value_grad(&self, z: &Vector) -> Result<(f64, Vector)> {
        if !self.contains(z) {
            return Err(Error::OutsideDomain { point: to_vec(z) });
        }
        self.eval_level(z, self.layers.len())
    }

    pub fn grad(&self, z: &Vector) -> Result<Vector> {
        Ok(self.value_grad(z)?.1)
    }

    /// Hessian: exact for layer-free polynomial and quadratic sources,
    /// central differences of the gradient otherwise.
    pub fn hessian(&self, z: &Vector) -> Result<Matrix> {
        if !self.contains(z) {
            return Err(Error::OutsideDomain { point: to_vec(z) });
        }
        if self.layers.is_empty() {
            match &self.source {
                Source::Potential { poly, .. } => return Ok(poly.hessian(z)),
                Source::Quadratic { centers, forms, radius } => {
                    if let Some(k) = centers.iter().position(|c| dist(z, c) < *radius) {
                        return Ok(forms[k].clone());
                    }
                }
                _ => {}
            }
        }
        let d = self.dim;
        let mut h = Matrix::zeros(d, d);
        for i in 0..d {
            let mut a = z.clone();
            let mut b = z.clone();
            a[i] += FD_STEP;
            b[i] -= FD_STEP;
            let ga = self.eval_level(&a, self.layers.len())?.1;
            let gb = self.eval_level(&b, self.layers.len())?.1;
            h.set_column(i, &((ga - gb) / (2.0 * FD_STEP)));
        }
        Ok((&h + h.transpose()) * 0.5)
    }

    pub fn evaluate(&self, z: &Vector) -> Result<(f64, Vector, Matrix)> {
        let (v, g) = self.value_grad(z)?;
        Ok((v, g, self.hessian(z)?))
    }

    fn source_margin(&self, z: &Vector, skip: Option<usize>, pad: f64) -> f64 {
        match &self.source {
            Source::Empty => f64::NEG_INFINITY,
            Source::Potential { domain, .. } => domain.margin(z) - pad,
            Source::Quadratic { centers, radius, .. } => {
                centers.iter().map(|c| radius - dist(z, c)).fold(f64::NEG_INFINITY, f64::max) - pad
            }
            Source::Lift { sheets, centers, rho, eps, .. } => {
                sheets
                    .iter()
                    .map(|m| {
                        let y = m.transpose() * z;
                        let v = (z - m * &y).norm();
                        let d = centers.iter().map(|c| dist(&y, c) - rho).fold(f64::INFINITY, f64::min);
                        -(d.max(v - eps))
                    })
                    .fold(f64::NEG_INFINITY, f64::max)
                    - pad
            }
            Source::Union(parts) => {
                parts.iter().map(|p| p.region_margin(z, skip, pad)).fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    /// Signed clearance used to delimit degree regions: positive away from
    /// the (padded) source boundary, the cuts, the padded shells of every
    /// layer and the inner bands of layers of other orbit types.
    pub fn region_margin(&self, z: &Vector, skip_class: Option<usize>, pad: f64) -> f64 {
        let mut m = self.source_margin(z, skip_class, pad);
        for cut in &self.cuts {
            let c = match cut {
                Cut::RemoveStratum { projectors } => {
                    projectors.iter().map(|p| dist(z, &(p * z))).fold(f64::INFINITY, f64::min)
                }
                Cut::RemoveClosed { set } => -set.margin(z),
                Cut::RemoveTube { layer, frac } => self.layers[*layer].cylinder(z, *frac),
                Cut::KeepTube { layer, frac } => -self.layers[*layer].cylinder(z, *frac),
            };
            m = m.min(c);
        }
        for l in &self.layers {
            m = m.min(l.shell_margin(z));
            if Some(l.tube.class_id) != skip_class {
                m = m.min(l.cylinder(z, 1.0 / 3.0));
            }
        }
        m
    }

    /// Appends a domain cut.
    pub fn with_cut(mut self, cut: Cut) -> Self {
        self.cuts.push(cut);
        self
    }
}

/// Checks |φ(gx) − φ(x)| ≤ 1e−8·(1+|φ(x)|) at 500 quasi-random points for all generators.
pub fn validate_invariance(poly: &Polynomial, g: &FiniteGroupRep, bbox: f64) -> Result<()> {
    let d = g.dim();
    let mut worst: Option<(Vec<f64>, f64)> = None;
    for i in 0..500 {
        let x = Vector::from_iterator(d, halton(i, d).into_iter().map(|u| (2.0 * u - 1.0) * bbox));
        let fx = poly.value(&x);
        for &gen in g.generators() {
            let r = (poly.value(&g.act(gen, &x)) - fx).abs();
            if r > 1e-8 * (1.0 + fx.abs()) && worst.as_ref().map_or(true, |w| r > w.1) {
                worst = Some((to_vec(&x), r));
            }
        }
    }
    match worst {
        Some((witness, residual)) => Err(Error::NotInvariant { witness, residual }),
        None => Ok(()),
    }
}

/// Builds ∇φ on Ω after validating invariance of φ and of Ω.
pub fn make_map(g: &FiniteGroupRep, omega: &DomainExpr, poly: Polynomial, bbox: f64) -> Result<LocalGradientMap> {
    if poly.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), got: poly.dim() });
    }
    omega.check_dim(g.dim())?;
    validate_invariance(&poly, g, bbox)?;
    omega.validate_invariant(g, bbox, 0)?;
    Ok(LocalGradientMap::from_potential(poly, omega.clone()))
}

/// Largest ‖∇φ(Q_g x) − Q_g∇φ(x)‖ over quasi-random domain points.
pub fn equivariance_residual(f: &LocalGradientMap, g: &FiniteGroupRep, bbox: f64, samples: u64) -> f64 {
    let d = f.dim;
    let mut worst: f64 = 0.0;
    for i in 0..samples * 20 {
        let x = Vector::from_iterator(d, halton(i, d).into_iter().map(|u| (2.0 * u - 1.0) * bbox));
        let Ok(gx) = f.grad(&x) else { continue };
        for e in 0..g.order() {
            if let Ok(gy) = f.grad(&g.act(e, &x)) {
                worst = worst.max((gy - g.act(e, &gx)).norm());
            }
        }
    }
    worst
}

/// A gradient map viewed in the coordinates of a stratum chart.
pub struct StratumField<'a> {
    pub map: &'a LocalGradientMap,
    pub basis: &'a Matrix,
}

impl StratumField<'_> {
    pub fn value_grad(&self, y: &Vector) -> Result<(f64, Vector)> {
        let (v, g) = self.map.value_grad(&(self.basis * y))?;
        Ok((v, self.basis.transpose() * g))
    }

    /// Normal part of the ambient gradient at a stratum point; zero by equivariance.
    pub fn normal_residual(&self, y: &Vector) -> Result<f64> {
        let g = self.map.grad(&(self.basis * y))?;
        Ok((&g - self.basis * (self.basis.transpose() * &g)).norm())
    }
}

pub fn restrict_to_stratum<'a>(f: &'a LocalGradientMap, stratum: &'a Stratum) -> StratumField<'a> {
    StratumField { map: f, basis: &stratum.basis }
}

/// Disjoint union; overlap is detected by sampling both domains.
pub fn disjoint_union(f: LocalGradientMap, g: LocalGradientMap, bbox: f64) -> Result<LocalGradientMap> {
    if f.dim != g.dim {
        return Err(Error::DimensionMismatch { expected: f.dim, got: g.dim });
    }
    if f.is_empty() {
        return Ok(g);
    }
    if g.is_empty() {
        return Ok(f);
    }
    let d = f.dim;
    let mut probes: Vec<Vector> = (0..4000)
        .map(|i| Vector::from_iterator(d, halton(i, d).into_iter().map(|u| (2.0 * u - 1.0) * bbox)))
        .collect();
    for m in [&f, &g] {
        for (c, r) in anchors(m) {
            for i in 0..200 {
                let u = halton(i, d);
                probes.push(&c + Vector::from_iterator(d, u.into_iter().map(|s| (2.0 * s - 1.0) * r)));
            }
        }
    }
    if let Some(w) = probes.iter().find(|z| f.contains(z) && g.contains(z)) {
        return Err(Error::DomainsOverlap { witness: to_vec(w) });
    }
    Ok(LocalGradientMap { dim: d, source: Source::Union(vec![f, g]), layers: Vec::new(), cuts: Vec::new() })
}

/// Centers and radii of small source pieces, so overlap sampling reaches them.
fn anchors(m: &LocalGradientMap) -> Vec<(Vector, f64)> {
    match &m.source {
        Source::Quadratic { centers, radius, .. } => centers.iter().map(|c| (c.clone(), *radius)).collect(),
        Source::Lift { sheets, centers, rho, eps, .. } => sheets
            .iter()
            .flat_map(|s| centers.iter().map(move |c| (s * c, rho + eps)))
            .collect(),
        Source::Union(parts) => parts.iter().flat_map(anchors).collect(),
        _ => Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vector;

    #[test]
    fn make_map_examples() {
        let z2 = FiniteGroupRep::antipodal(1).unwrap();
        let f = make_map(&z2, &DomainExpr::FullSpace, Polynomial::parse("x1^2/2", 1).unwrap(), 2.5).unwrap();
        let (v, g, h) = f.evaluate(&vector(&[3.0])).unwrap();
        assert_eq!((v, g[0], h[(0, 0)]), (4.5, 3.0, 1.0));
        let odd = make_map(&z2, &DomainExpr::FullSpace, Polynomial::parse("x1^3", 1).unwrap(), 2.5);
        assert!(matches!(odd, Err(Error::NotInvariant { .. })));
        let d3 = FiniteGroupRep::dihedral(3).unwrap();
        make_map(&d3, &DomainExpr::FullSpace, Polynomial::parse("(x1^2+x2^2)^2", 2).unwrap(), 2.5).unwrap();
    }

    #[test]
    fn outside_domain() {
        let f = LocalGradientMap::from_potential(
            Polynomial::parse("x1^2", 1).unwrap(),
            DomainExpr::Ball { r: 1.0 },
        );
        assert!(matches!(f.value_grad(&vector(&[2.0])), Err(Error::OutsideDomain { .. })));
    }

    #[test]
    fn gradients_of_invariant_potentials_are_tangent_to_strata() {
        let g = FiniteGroupRep::symmetric(3).unwrap();
        let f = make_map(
            &g,
            &DomainExpr::FullSpace,
            Polynomial::parse("(x1^2+x2^2+x3^2)^2 - x1*x2*x3 + x1+x2+x3", 3).unwrap(),
            2.5,
        )
        .unwrap();
        let l = crate::group::subgroup_lattice(&g);
        for s in &l.subgroups {
            let field = StratumField { map: &f, basis: &s.fixed.basis };
            for i in 0..100 {
                let y = Vector::from_iterator(s.fixed.dim(), halton(i, s.fixed.dim()).into_iter().map(|u| 4.0 * u - 2.0));
                assert!(field.normal_residual(&y).unwrap() <= 1e-8 * (1.0 + y.norm().powi(3)));
            }
        }
        assert!(equivariance_residual(&f, &g, 2.0, 10) < 1e-7);
    }

    #[test]
    fn serialization_round_trip() {
        let f = LocalGradientMap::from_potential(
            Polynomial::parse("x1^4 - 3*x1^2*x2^2 + x2", 2).unwrap(),
            DomainExpr::Ball { r: 2.0 },
        )
        .with_cut(Cut::RemoveClosed { set: DomainExpr::Ball { r: 0.1 } });
        let s = serde_json::to_string(&f).unwrap();
        let back: LocalGradientMap = serde_json::from_str(&s).unwrap();
        for i in 0..50 {
            let z = Vector::from_iterator(2, halton(i, 2).into_iter().map(|u| 3.0 * u - 1.5));
            match (f.value_grad(&z), back.value_grad(&z)) {
                (Ok(a), Ok(b)) => {
                    assert!((a.0 - b.0).abs() <= 1e-12);
                    assert!((a.1 - b.1).norm() <= 1e-12);
                }
                (Err(_), Err(_)) => {}
                _ => panic!("membership changed after round trip"),
            }
        }
    }

    #[test]
    fn union_with_empty_is_identity() {
        let f = LocalGradientMap::from_potential(Polynomial::parse("x1^2", 1).unwrap(), DomainExpr::Ball { r: 1.0 });
        let u = disjoint_union(f.clone(), LocalGradientMap::empty(1), 2.5).unwrap();
        assert!(matches!(u.source, Source::Potential { .. }));
        let overlap = disjoint_union(f.clone(), f, 2.5);
        assert!(matches!(overlap, Err(Error::DomainsOverlap { .. })));
    }
}
