//! Canonical maps: orbit-normal and sink maps around a single orbit, lifts
//! of stratum potentials to (H)-normal maps, restrictions, and the named
//! example catalog.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::DomainExpr;
use crate::error::{Error, Result};
use crate::group::{fixed_subspace, subgroup_lattice, FiniteGroupRep, GroupSpec};
use crate::linalg::{to_vec, vector, Matrix, Vector};
use crate::local_map::{LocalGradientMap, Source};
use crate::numerics::{halton, stream_rng, Numerics};
use crate::poly::Polynomial;
use crate::stratification::Stratum;
use crate::theta::{radial_s1_line, theta, theta_radial_s1, Setting, ThetaVector};
use crate::zeros::newton;

/// Orbit of x with the form transported along it: A_{gx} = g A gᵀ.
fn orbit_with_forms(g: &FiniteGroupRep, x: &Vector, form: &Matrix) -> Result<(Vec<Vector>, Vec<Matrix>)> {
    let orbit = g.orbit(x)?;
    let mut forms = Vec::with_capacity(orbit.len());
    for p in &orbit {
        let e = (0..g.order())
            .find(|&e| (g.act(e, x) - p).norm() <= 1e-9 * (1.0 + p.norm()))
            .expect("orbit point is an image of x");
        let m = g.matrix(e);
        forms.push(m * form * m.transpose());
    }
    Ok((orbit, forms))
}

/// Balls of radius eps around the orbit must be disjoint, inside Ω and
/// clear of every fixed subspace not containing their centers.
fn check_orbit_balls(g: &FiniteGroupRep, omega: &DomainExpr, orbit: &[Vector], eps: f64) -> Result<()> {
    let wide = |reason: String| Err(Error::TubeTooWide { reason });
    for (i, p) in orbit.iter().enumerate() {
        for q in &orbit[i + 1..] {
            if (p - q).norm() <= 2.0 * eps {
                return wide(format!("orbit points {:?} and {:?} closer than 2ε", to_vec(p), to_vec(q)));
            }
        }
        if omega.margin(p) <= eps {
            return wide(format!("ball around {:?} leaves Ω", to_vec(p)));
        }
    }
    let lattice = subgroup_lattice(g);
    let p = &orbit[0];
    for s in &lattice.subgroups {
        let d = s.fixed.distance(p);
        if d > 1e-9 * (1.0 + p.norm()) && d <= eps {
            return wide(format!("ball around {:?} meets a fixed subspace of higher isotropy", to_vec(p)));
        }
    }
    Ok(())
}

/// f(z) = z − p on the ball B(p, ε) around each point p of the orbit of x.
pub fn orbit_normal(g: &FiniteGroupRep, omega: &DomainExpr, x: &Vector, eps: f64) -> Result<LocalGradientMap> {
    let d = g.dim();
    let (centers, forms) = orbit_with_forms(g, x, &Matrix::identity(d, d))?;
    check_orbit_balls(g, omega, &centers, eps)?;
    Ok(LocalGradientMap { dim: d, source: Source::Quadratic { centers, forms, radius: eps }, layers: vec![], cuts: vec![] })
}

/// Like `orbit_normal`, but the potential is flipped along one direction of
/// the fixed space of x, so each zero has stratum index −1.
pub fn sink_orbit(g: &FiniteGroupRep, omega: &DomainExpr, x: &Vector, eps: f64) -> Result<LocalGradientMap> {
    let d = g.dim();
    let iso = g.isotropy_mask(x)?;
    let fixed = fixed_subspace(g, iso);
    if fixed.dim() == 0 {
        return Err(Error::Config("sink orbit needs a point with positive-dimensional fixed space".into()));
    }
    let u = fixed.basis.column(0).into_owned();
    let form = Matrix::identity(d, d) - &u * u.transpose() * 2.0;
    let (centers, forms) = orbit_with_forms(g, x, &form)?;
    check_orbit_balls(g, omega, &centers, eps)?;
    Ok(LocalGradientMap { dim: d, source: Source::Quadratic { centers, forms, radius: eps }, layers: vec![], cuts: vec![] })
}

/// φ(x+v) = k(y) + ½|v|² over balls of radius ρ (in the stratum) around the
/// Weyl orbit of `centers`, copied to every conjugate fixed subspace.
pub fn h_normal_lift(
    g: &FiniteGroupRep,
    omega: &DomainExpr,
    st: &Stratum,
    k: Polynomial,
    centers: &[Vector],
    rho: f64,
    eps: f64,
) -> Result<LocalGradientMap> {
    if k.dim() != st.dim() {
        return Err(Error::DimensionMismatch { expected: st.dim(), got: k.dim() });
    }
    let wide = |reason: String| Err(Error::TubeTooWide { reason });
    let mut orbit: Vec<Vector> = Vec::new();
    for c in centers {
        for (_, w) in &st.weyl {
            let wc = w * c;
            if !orbit.iter().any(|o| (o - &wc).norm() <= 1e-9) {
                orbit.push(wc);
            }
        }
    }
    for i in 0..200u64 {
        let y = Vector::from_iterator(st.dim(), halton(i, st.dim()).into_iter().map(|u| (2.0 * u - 1.0) * st.bbox));
        for (_, w) in &st.weyl {
            let r = (k.value(&(w * &y)) - k.value(&y)).abs();
            if r > 1e-8 * (1.0 + k.value(&y).abs()) {
                return Err(Error::NotInvariant { witness: to_vec(&y), residual: r });
            }
        }
    }
    for c in &orbit {
        if st.wall_distance(c) <= rho + eps || omega.margin(&st.to_ambient(c)) <= rho + eps {
            return wide(format!("tube over {:?} reaches a wall or leaves Ω", to_vec(c)));
        }
    }
    let mut sheets: Vec<Matrix> = Vec::new();
    for e in 0..g.order() {
        let b = g.matrix(e) * &st.basis;
        let p = &b * b.transpose();
        if !sheets.iter().any(|s| (s * s.transpose() - &p).norm() <= 1e-9) {
            sheets.push(b);
        }
    }
    let map = LocalGradientMap {
        dim: g.dim(),
        source: Source::Lift { sheets: sheets.clone(), k, centers: orbit.clone(), rho, eps },
        layers: vec![],
        cuts: vec![],
    };
    // sampled tube points must lie over exactly one sheet
    let mut rng = stream_rng(0, 0x11f7);
    for _ in 0..500 {
        let s = &sheets[rng.gen_range(0..sheets.len())];
        let c = &orbit[rng.gen_range(0..orbit.len())];
        let dy = Vector::from_fn(st.dim(), |_, _| rng.gen_range(-1.0..1.0)).normalize() * (rho * rng.gen::<f64>());
        let dv = Vector::from_fn(g.dim(), |_, _| rng.gen_range(-1.0..1.0));
        let dv = &dv - s * (s.transpose() * &dv);
        let dv = if dv.norm() > 1e-9 { dv.normalize() * (eps * rng.gen::<f64>()) } else { dv };
        let z = s * (c + dy) + dv;
        let hits = sheets
            .iter()
            .filter(|m| {
                let y = m.transpose() * &z;
                (&z - *m * &y).norm() < eps && orbit.iter().any(|o| (&y - o).norm() < rho)
            })
            .count();
        if hits != 1 {
            return wide(format!("tube point {:?} lies over {hits} sheets", to_vec(&z)));
        }
    }
    Ok(map)
}

/// l restricted to D_l ∖ cl Y, after checking that no zero of l lies in cl Y.
pub fn restrict_off(l: &LocalGradientMap, y: Option<&DomainExpr>, num: &Numerics) -> Result<LocalGradientMap> {
    let Some(y) = y else { return Ok(l.clone()) };
    let d = l.dim;
    let field = |z: &Vector| l.grad(z).ok();
    for i in 0..4000u64 {
        let z = Vector::from_iterator(d, halton(i, d).into_iter().map(|u| (2.0 * u - 1.0) * num.bbox));
        if y.margin(&z) < -num.grid_h || !l.contains(&z) {
            continue;
        }
        if let Some((p, r)) = newton(&field, &z, num.newton_tol, 50) {
            if r <= num.zero_thresh && y.margin(&p) >= -1e-9 && l.contains(&p) {
                return Err(Error::ZeroOnY { witness: to_vec(&p) });
            }
        }
    }
    Ok(l.clone().with_cut(crate::local_map::Cut::RemoveClosed { set: y.clone() }))
}

/// ∇(λφ) for a layer-free map.
pub fn scaled(f: &LocalGradientMap, lambda: f64) -> Result<LocalGradientMap> {
    if !f.layers.is_empty() {
        return Err(Error::Config("cannot scale a perturbed map".into()));
    }
    let source = match &f.source {
        Source::Empty => Source::Empty,
        Source::Potential { poly, domain } => Source::Potential { poly: poly.scale(lambda), domain: domain.clone() },
        Source::Quadratic { centers, forms, radius } => Source::Quadratic {
            centers: centers.clone(),
            forms: forms.iter().map(|m| m * lambda).collect(),
            radius: *radius,
        },
        Source::Lift { .. } => return Err(Error::Config("lifted maps have a fixed normal part".into())),
        Source::Union(parts) => Source::Union(parts.iter().map(|p| scaled(p, lambda)).collect::<Result<_>>()?),
    };
    Ok(LocalGradientMap { dim: f.dim, source, layers: vec![], cuts: f.cuts.clone() })
}

/// A pinned example with its expected Θ and where that value comes from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    pub map: CatalogMap,
    pub expected: ThetaVector,
    pub provenance: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CatalogMap {
    Finite { group: GroupSpec, omega: DomainExpr, map: LocalGradientMap },
    /// Radial S¹ map; the potential is a polynomial in s = r².
    Circle { weights: Vec<i64>, phi_of_s: Polynomial, punctured: bool },
}

impl CatalogEntry {
    pub fn setting(&self, num: &Numerics) -> Result<Option<Setting>> {
        match &self.map {
            CatalogMap::Finite { group, omega, .. } => {
                Ok(Some(Setting::new(group.build()?, omega.clone(), num.clone())?))
            }
            CatalogMap::Circle { .. } => Ok(None),
        }
    }

    /// Setting and map the recursion runs on; circle entries are reduced to
    /// the line.
    pub fn problem(&self, num: &Numerics) -> Result<(Setting, LocalGradientMap)> {
        match &self.map {
            CatalogMap::Finite { map, .. } => Ok((self.setting(num)?.unwrap(), map.clone())),
            CatalogMap::Circle { weights, phi_of_s, punctured } => {
                let (s, f, _) = radial_s1_line(weights, phi_of_s, *punctured, num)?;
                Ok((s, f))
            }
        }
    }

    pub fn compute(&self, num: &Numerics) -> Result<ThetaVector> {
        match &self.map {
            CatalogMap::Finite { map, .. } => Ok(theta(&self.setting(num)?.unwrap(), map)?.0),
            CatalogMap::Circle { weights, phi_of_s, punctured } => {
                theta_radial_s1(weights, phi_of_s, *punctured, num)
            }
        }
    }
}

pub const CATALOG: &[&str] = &[
    "z2_line_min",
    "z2_line_max",
    "z2_plane_doublewell",
    "d3_axis_orbit_normal",
    "s3_perm_radial",
    "s1_dancer_plus",
    "s1_dancer_minus",
    "s1_ring",
    "trivial_identity",
];

fn finite(group: GroupSpec, omega: DomainExpr, poly: &str) -> Result<CatalogMap> {
    let g = group.build()?;
    let map = crate::local_map::make_map(&g, &omega, Polynomial::parse(poly, g.dim())?, 2.5)?;
    Ok(CatalogMap::Finite { group, omega, map })
}

pub fn catalog(name: &str) -> Result<CatalogEntry> {
    let one_d = "1-D oracle: explicit perturbed potential, critical points and boundary signs";
    let entry = |map, expected, provenance: &str| CatalogEntry {
        name: name.to_string(),
        map,
        expected,
        provenance: provenance.to_string(),
    };
    let e = |v: i64| {
        let mut t = ThetaVector::zero(Some(1));
        t.entries.insert(("(e)".into(), "q0".into()), v);
        t
    };
    let s = Polynomial::var(1, 0);
    Ok(match name {
        "z2_line_min" => entry(
            finite(GroupSpec::Antipodal { dim: 1 }, DomainExpr::FullSpace, "x1^2/2")?,
            e(0),
            one_d,
        ),
        "z2_line_max" => entry(
            finite(GroupSpec::Antipodal { dim: 1 }, DomainExpr::FullSpace, "-x1^2/2")?,
            e(-1),
            one_d,
        ),
        "z2_plane_doublewell" => entry(
            finite(GroupSpec::Antipodal { dim: 2 }, DomainExpr::PuncturedSpace, "(x1^2-1)^2 + x2^2")?,
            ThetaVector::unit(None, "(e)", "q0"),
            "orbit counting: one free orbit {(±1,0)} of index +1",
        ),
        "d3_axis_orbit_normal" => {
            let group = GroupSpec::Dihedral { n: 3 };
            let g = group.build()?;
            let x = vector(&[1.0, 0.0]);
            let map = orbit_normal(&g, &DomainExpr::FullSpace, &x, 0.2)?;
            let setting = Setting::new(g, DomainExpr::FullSpace, Numerics::default())?;
            let (orbit_type, comp) = setting.locate(&x)?;
            entry(
                CatalogMap::Finite { group, omega: DomainExpr::FullSpace, map },
                ThetaVector::unit(Some(0), &orbit_type, &comp),
                "normalization axiom: orbit-normal maps give unit vectors",
            )
        }
        "s3_perm_radial" => entry(
            finite(GroupSpec::Symmetric { n: 3 }, DomainExpr::FullSpace, "(x1^2+x2^2+x3^2)/2")?,
            ThetaVector::unit(None, "(D3)", "q0"),
            "single nondegenerate minimum at the origin, which lies in the fixed line of S3",
        ),
        "s1_dancer_plus" => entry(
            CatalogMap::Circle { weights: vec![1], phi_of_s: s.scale(0.5), punctured: false },
            e(0),
            one_d,
        ),
        "s1_dancer_minus" => entry(
            CatalogMap::Circle { weights: vec![1], phi_of_s: s.scale(-0.5), punctured: false },
            e(-1),
            one_d,
        ),
        "s1_ring" => entry(
            CatalogMap::Circle { weights: vec![1], phi_of_s: Polynomial::parse("(x1-1)^2/4", 1)?, punctured: true },
            ThetaVector::unit(None, "(e)", "q0"),
            "single nondegenerate minimum of r ↦ (r²−1)²/4 on (0, ∞)",
        ),
        "trivial_identity" => entry(
            finite(GroupSpec::Trivial { dim: 2 }, DomainExpr::Ball { r: 1.0 }, "(x1^2+x2^2)/2")?,
            ThetaVector::unit(None, "(e)", "q0"),
            "direct: degree of the identity",
        ),
        _ => return Err(Error::UnknownName(name.to_string())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d3_orbit_normal_has_three_disks() {
        let g = FiniteGroupRep::dihedral(3).unwrap();
        let f = orbit_normal(&g, &DomainExpr::FullSpace, &vector(&[1.0, 0.0]), 0.2).unwrap();
        let Source::Quadratic { centers, .. } = &f.source else { panic!() };
        assert_eq!(centers.len(), 3);
        for c in centers {
            let z = c + vector(&[0.05, -0.03]);
            assert!((f.grad(&z).unwrap() - (&z - c)).norm() < 1e-15);
        }
        assert!(!f.contains(&vector(&[0.0, 0.0])));
        let wide = orbit_normal(&g, &DomainExpr::FullSpace, &vector(&[1.0, 0.0]), 0.9);
        assert!(matches!(wide, Err(Error::TubeTooWide { .. })));
    }

    #[test]
    fn restrict_off_rules() {
        let num = Numerics::default();
        let f = LocalGradientMap::from_potential(Polynomial::parse("x1^2/2", 1).unwrap(), DomainExpr::Ball { r: 2.0 });
        let same = restrict_off(&f, None, &num).unwrap();
        assert!(same.cuts.is_empty());
        let hit = restrict_off(&f, Some(&DomainExpr::Ball { r: 0.5 }), &num);
        assert!(matches!(hit, Err(Error::ZeroOnY { .. })));
        let miss = restrict_off(&f, Some(&DomainExpr::OffsetBall { center: vec![1.0], r: 0.3 }), &num).unwrap();
        assert!(!miss.contains(&vector(&[1.0])));
    }

    #[test]
    fn unknown_catalog_name() {
        assert!(matches!(catalog("nope"), Err(Error::UnknownName(_))));
    }

    #[test]
    fn catalog_values() {
        let num = Numerics::default();
        for name in CATALOG {
            let entry = catalog(name).unwrap();
            let got = entry.compute(&num).unwrap();
            assert_eq!(got, entry.expected, "{name}: got {got}, expected {}", entry.expected);
        }
    }
}
