//! Zero orbits and intersection numbers of a gradient field restricted to a
//! stratum, per component and per Weyl-quotient component.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::degree::Region;
use crate::error::{Error, Result};
use crate::linalg::{to_vec, Vector};
use crate::local_map::LocalGradientMap;
use crate::numerics::Numerics;
use crate::stratification::Stratum;
use crate::zeros::{morse_index, multi_start, newton};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroRecord {
    /// Stratum coordinates.
    pub point: Vec<f64>,
    /// Sign of det of the stratum Hessian; 0 when degenerate.
    pub index: i8,
    pub component: usize,
    pub quotient: String,
    pub class_id: usize,
}

/// Everything computed about f on one stratum.
#[derive(Debug, Clone)]
pub struct StratumDegrees {
    pub component_degrees: BTreeMap<usize, i64>,
    pub zeros: Vec<ZeroRecord>,
    /// Centers of finest cells that may hold zeros not reached by Newton
    /// (degenerate zero sets), in stratum coordinates.
    pub unresolved: Vec<Vector>,
    pub boundary_min: f64,
    pub newton_failures: usize,
}

impl StratumDegrees {
    /// Sum of indices over a component, or None if some zero there is degenerate.
    pub fn morse_sum(&self, component: usize) -> Option<i64> {
        let mut s = 0i64;
        for z in self.zeros.iter().filter(|z| z.component == component) {
            if z.index == 0 {
                return None;
            }
            s += z.index as i64;
        }
        if self.unresolved.is_empty() {
            Some(s)
        } else {
            None
        }
    }

    /// Degree of the quotient component q: deg(representative) / |Stab|.
    pub fn quotient_value(&self, st: &Stratum, q: usize) -> Result<i64> {
        let quot = &st.quotients[q];
        let deg = self.component_degrees.get(&quot.representative).copied().unwrap_or(0);
        let stab = quot.stabilizer as i64;
        if deg % stab != 0 {
            return Err(Error::DivisibilityViolation { value: deg, stab: quot.stabilizer });
        }
        Ok(deg / stab)
    }

    /// True when the quotient component carries zeros or a nonzero degree.
    pub fn quotient_active(&self, st: &Stratum, q: usize) -> bool {
        let members = &st.quotients[q].members;
        members.iter().any(|c| self.component_degrees.get(c).copied().unwrap_or(0) != 0)
            || self.zeros.iter().any(|z| members.contains(&z.component))
            || self.unresolved.iter().any(|y| st.component_of(y).is_some_and(|c| members.contains(&c)))
    }
}

/// Region of the stratum chart where degrees are taken: inside the domain
/// of f (with margin), off the walls and inside the bounding ball.
pub fn stratum_margin(f: &LocalGradientMap, st: &Stratum, num: &Numerics, y: &Vector) -> f64 {
    f.region_margin(&st.to_ambient(y), Some(st.class_id), num.pad())
        .min(st.wall_distance(y))
        .min(st.bbox - y.norm())
}

fn chart_field<'a>(f: &'a LocalGradientMap, st: &'a Stratum) -> impl Fn(&Vector) -> Option<Vector> + Sync + 'a {
    move |y: &Vector| f.grad(&st.to_ambient(y)).ok().map(|g| st.to_coords(&g))
}

fn root_cells(k: usize) -> f64 {
    match k {
        1 => 64.0,
        2 => 32.0,
        _ => 16.0,
    }
}

/// Component degrees of f on the stratum, with polished zeros.
pub fn stratum_degrees(f: &LocalGradientMap, st: &Stratum, num: &Numerics) -> Result<StratumDegrees> {
    let k = st.dim();
    let b = st.bbox;
    let margin = |y: &Vector| stratum_margin(f, st, num, y);
    let field = chart_field(f, st);
    let label = |y: &Vector| if margin(y) > 0.0 { st.component_of(y) } else { None };
    let region = Region {
        lo: vec![-b; k],
        hi: vec![b; k],
        root: 2.0 * b / root_cells(k),
        s_min: num.grid_h / 8.0,
        margin: &margin,
        field: &field,
        label: &label,
    };
    let res = region.degrees()?;
    // one seed per cluster of candidate cells
    let mut seeds: Vec<Vector> = Vec::new();
    for c in &res.candidates {
        if !seeds.iter().any(|s| (s - &c.center).norm() < 0.25 * num.grid_h) {
            seeds.push(c.center.clone());
        }
    }
    let (mut zeros, failures) = find_zeros(f, st, num, &seeds);
    complete_orbits(f, st, num, &mut zeros)?;
    let dedupe = 10.0 * num.grid_h;
    let unresolved: Vec<Vector> = res
        .candidates
        .iter()
        .filter(|c| c.min_norm <= 10.0 * num.zero_thresh.sqrt())
        .filter(|c| !zeros.iter().any(|z| (&Vector::from_vec(z.point.clone()) - &c.center).norm() <= dedupe))
        .map(|c| c.center.clone())
        .collect();
    Ok(StratumDegrees {
        component_degrees: res.degrees,
        zeros,
        unresolved,
        boundary_min: res.boundary_min,
        newton_failures: failures,
    })
}

/// Multi-start Newton on the stratum chart from the given seeds.
pub fn find_zeros(f: &LocalGradientMap, st: &Stratum, num: &Numerics, seeds: &[Vector]) -> (Vec<ZeroRecord>, usize) {
    let field = chart_field(f, st);
    let keep = |y: &Vector| stratum_margin(f, st, num, y) > 0.0 && st.locate(y).is_ok();
    let (pts, failures) = multi_start(&field, seeds, num.newton_tol, num.zero_thresh, 1e-3 * num.grid_h, &keep);
    let recs = pts.iter().map(|y| record(&field, st, y)).collect();
    (recs, failures)
}

fn record(field: &dyn Fn(&Vector) -> Option<Vector>, st: &Stratum, y: &Vector) -> ZeroRecord {
    let (component, quotient) = st.locate(y).expect("zero kept only inside the stratum");
    ZeroRecord {
        point: to_vec(y),
        index: morse_index(field, y),
        component,
        quotient: st.quotient_name(quotient).to_string(),
        class_id: st.class_id,
    }
}

/// Adds Weyl images of found zeros that Newton missed. Orbit-mates must
/// share their local degree, so disagreeing Hessian signs mark the whole
/// orbit degenerate; the component degrees come from the cover either way.
fn complete_orbits(f: &LocalGradientMap, st: &Stratum, num: &Numerics, zeros: &mut Vec<ZeroRecord>) -> Result<()> {
    let field = chart_field(f, st);
    let tol = 1e-2 * num.grid_h;
    let find = |zeros: &[ZeroRecord], p: &Vector| {
        zeros.iter().position(|z| (&Vector::from_vec(z.point.clone()) - p).norm() <= tol)
    };
    let mut i = 0;
    while i < zeros.len() {
        let y = Vector::from_vec(zeros[i].point.clone());
        let mut mates = vec![i];
        for (_, w) in &st.weyl {
            let wy = w * &y;
            if let Some(j) = find(zeros, &wy) {
                mates.push(j);
                continue;
            }
            match newton(&field, &wy, num.newton_tol, 50) {
                Some((p, r)) if r <= num.zero_thresh && (&p - &wy).norm() <= tol && st.locate(&p).is_ok() => {
                    zeros.push(record(&field, st, &p));
                    mates.push(zeros.len() - 1);
                }
                _ => match field(&wy) {
                    // a slowly converging degenerate zero: keep the exact image
                    Some(g) if g.norm() <= num.zero_thresh.sqrt() && st.locate(&wy).is_ok() => {
                        let mut rec = record(&field, st, &wy);
                        rec.index = 0;
                        zeros.push(rec);
                        mates.push(zeros.len() - 1);
                    }
                    _ => {
                        return Err(Error::DegenerateUnresolved(format!(
                            "Weyl image {:?} of a zero is not a zero",
                            wy.as_slice()
                        )))
                    }
                },
            }
        }
        if mates.iter().any(|&j| zeros[j].index != zeros[i].index) {
            for &j in &mates {
                zeros[j].index = 0;
            }
        }
        i += 1;
    }
    zeros.sort_by(|a, b| a.point.partial_cmp(&b.point).unwrap());
    Ok(())
}

/// Degree of f on one component of the stratum.
pub fn intersection_number(f: &LocalGradientMap, st: &Stratum, component: usize, num: &Numerics) -> Result<i64> {
    let d = stratum_degrees(f, st, num)?;
    Ok(d.component_degrees.get(&component).copied().unwrap_or(0))
}

/// Intersection number of the induced field on the quotient component.
pub fn quotient_intersection(f: &LocalGradientMap, st: &Stratum, quotient: &str, num: &Numerics) -> Result<i64> {
    let q = st
        .quotients
        .iter()
        .position(|q| q.name == quotient)
        .ok_or_else(|| Error::UnknownName(quotient.to_string()))?;
    stratum_degrees(f, st, num)?.quotient_value(st, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainExpr;
    use crate::group::{subgroup_lattice, FiniteGroupRep};
    use crate::poly::Polynomial;
    use crate::stratification::{build_stratum, iso_types};

    fn generic_stratum(g: &FiniteGroupRep, omega: &DomainExpr, num: &Numerics) -> Stratum {
        let l = subgroup_lattice(g);
        let o = iso_types(g, &l, omega, num).unwrap();
        let e = *o.classes.last().unwrap();
        build_stratum(g, &l, omega, e, num).unwrap()
    }

    #[test]
    fn double_well_under_antipodal_plane_action() {
        let num = Numerics::default();
        let g = FiniteGroupRep::antipodal(2).unwrap();
        let omega = DomainExpr::Ball { r: 2.0 };
        let f = LocalGradientMap::from_potential(Polynomial::parse("(x1^2-1)^2 + x2^2", 2).unwrap(), omega.clone());
        let st = generic_stratum(&g, &omega, &num);
        let d = stratum_degrees(&f, &st, &num).unwrap();
        assert_eq!(d.zeros.len(), 2);
        assert!(d.zeros.iter().all(|z| z.index == 1));
        assert_eq!(st.quotients.len(), 1);
        assert_eq!(st.quotients[0].stabilizer, 2);
        // orbit counting: one free orbit of index-+1 zeros
        assert_eq!(d.quotient_value(&st, 0).unwrap(), 1);
        assert_eq!(d.morse_sum(0), Some(2));
    }

    #[test]
    fn half_lines_of_the_z2_line() {
        let num = Numerics::default();
        let g = FiniteGroupRep::antipodal(1).unwrap();
        let omega = DomainExpr::FullSpace;
        let f = LocalGradientMap::from_potential(Polynomial::parse("(x1^2-1)^2", 1).unwrap(), omega.clone());
        let st = generic_stratum(&g, &omega, &num);
        assert_eq!(st.components.len(), 2);
        assert_eq!(st.quotients.len(), 1);
        let d = stratum_degrees(&f, &st, &num).unwrap();
        for c in 0..2 {
            assert_eq!(d.component_degrees[&c], 1);
        }
        assert_eq!(quotient_intersection(&f, &st, "q0", &num).unwrap(), 1);
    }

    #[test]
    fn zero_free_field_has_no_entries() {
        let num = Numerics::default();
        let g = FiniteGroupRep::trivial(2);
        let omega = DomainExpr::Ball { r: 1.0 };
        let f = LocalGradientMap::from_potential(Polynomial::parse("x1", 2).unwrap(), omega.clone());
        let st = generic_stratum(&g, &omega, &num);
        let d = stratum_degrees(&f, &st, &num).unwrap();
        assert!(d.zeros.is_empty());
        assert_eq!(d.quotient_value(&st, 0).unwrap(), 0);
        assert!(!d.quotient_active(&st, 0));
    }

    #[test]
    fn saddle_and_degenerate_minimum() {
        let num = Numerics::default();
        let g = FiniteGroupRep::trivial(2);
        let omega = DomainExpr::Ball { r: 2.0 };
        let st = generic_stratum(&g, &omega, &num);
        let saddle = LocalGradientMap::from_potential(Polynomial::parse("x1^2 - x2^2", 2).unwrap(), omega.clone());
        assert_eq!(intersection_number(&saddle, &st, 0, &num).unwrap(), -1);
        // ring potential: radial field, outward on the boundary
        let ring = LocalGradientMap::from_potential(
            Polynomial::parse("(x1^2+x2^2)^2/4 - (x1^2+x2^2)/2", 2).unwrap(),
            omega.clone(),
        );
        assert_eq!(intersection_number(&ring, &st, 0, &num).unwrap(), 1);
    }
}
