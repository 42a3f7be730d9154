//! The invariant Θ: the stratum-by-stratum recursion f₁ = f,
//! f_{i+1} = (f_i)^c, quotient intersection numbers per step and the
//! origin slot θ₁₁. Also the reduction of the S¹ radial case to the line.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domain::DomainExpr;
use crate::error::{Error, Result};
use crate::group::{subgroup_lattice, CircleRep, FiniteGroupRep, SubgroupLattice};
use crate::linalg::Vector;
use crate::local_map::LocalGradientMap;
use crate::numerics::{stream_rng, Numerics};
use crate::perturbation::{perturb, select_tube, split, HomotopyFamily, TubeRequest, TubeSpec};
use crate::poly::Polynomial;
use crate::quotient_degree::{stratum_degrees, ZeroRecord};
use crate::stratification::{build_stratum, iso_types, OrbitTypeLattice, Stratum};

/// Group, domain and the stratification data every Θ computation needs.
#[derive(Debug, Clone)]
pub struct Setting {
    pub group: FiniteGroupRep,
    pub lattice: SubgroupLattice,
    pub omega: DomainExpr,
    pub num: Numerics,
    pub iso: OrbitTypeLattice,
    pub strata: BTreeMap<usize, Stratum>,
}

impl Setting {
    pub fn new(group: FiniteGroupRep, omega: DomainExpr, num: Numerics) -> Result<Self> {
        omega.check_dim(group.dim())?;
        let lattice = subgroup_lattice(&group);
        let iso = iso_types(&group, &lattice, &omega, &num)?;
        let mut strata = BTreeMap::new();
        for (&c, &d) in iso.classes.iter().zip(&iso.dims) {
            if d > 0 {
                strata.insert(c, build_stratum(&group, &lattice, &omega, c, &num)?);
            }
        }
        Ok(Setting { group, lattice, omega, num, iso, strata })
    }

    pub fn with_numerics(&self, num: Numerics) -> Self {
        Setting { num, ..self.clone() }
    }

    pub fn dim(&self) -> usize {
        self.group.dim()
    }

    /// Stratum and quotient name of a point of Ω.
    pub fn locate(&self, z: &Vector) -> Result<(String, String)> {
        let rec = self.lattice.isotropy(&self.group, z)?;
        let st = self
            .strata
            .get(&rec.class_id)
            .ok_or_else(|| Error::NotInStratum { class: self.lattice.label(rec.class_id) })?;
        // move the point into the representative's fixed space
        let (_, q) = (0..self.group.order())
            .map(|e| self.group.act(e, z))
            .find_map(|p| {
                let y = st.to_coords(&p);
                if (st.to_ambient(&y) - &p).norm() <= 1e-9 * (1.0 + p.norm()) {
                    st.locate(&y).ok()
                } else {
                    None
                }
            })
            .ok_or_else(|| Error::NotInStratum { class: st.label.clone() })?;
        Ok((st.label.clone(), st.quotient_name(q).to_string()))
    }
}

/// Θ(f): integers keyed by (orbit type, quotient component) plus θ₁₁.
#[derive(Debug, Clone, Default)]
pub struct ThetaVector {
    pub theta11: Option<u8>,
    pub entries: BTreeMap<(String, String), i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaEntry {
    pub orbit_type: String,
    pub component: String,
    pub value: i64,
}

#[derive(Serialize, Deserialize)]
struct ThetaRepr {
    theta11: Option<u8>,
    entries: Vec<ThetaEntry>,
}

impl Serialize for ThetaVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ThetaRepr { theta11: self.theta11, entries: self.entry_list() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ThetaVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ThetaRepr::deserialize(d)?;
        Ok(ThetaVector {
            theta11: r.theta11,
            entries: r.entries.into_iter().map(|e| ((e.orbit_type, e.component), e.value)).collect(),
        })
    }
}

/// Equality as elements of the direct sum: missing entries count as 0.
impl PartialEq for ThetaVector {
    fn eq(&self, other: &Self) -> bool {
        self.theta11 == other.theta11 && self.nonzero() == other.nonzero()
    }
}

impl Eq for ThetaVector {}

impl ThetaVector {
    pub fn zero(theta11: Option<u8>) -> Self {
        ThetaVector { theta11, entries: BTreeMap::new() }
    }

    pub fn unit(theta11: Option<u8>, orbit_type: &str, component: &str) -> Self {
        let mut v = Self::zero(theta11);
        v.entries.insert((orbit_type.to_string(), component.to_string()), 1);
        v
    }

    pub fn get(&self, orbit_type: &str, component: &str) -> i64 {
        self.entries.get(&(orbit_type.to_string(), component.to_string())).copied().unwrap_or(0)
    }

    pub fn nonzero(&self) -> BTreeMap<(String, String), i64> {
        self.entries.iter().filter(|(_, v)| **v != 0).map(|(k, v)| (k.clone(), *v)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.theta11.unwrap_or(0) == 0 && self.nonzero().is_empty()
    }

    pub fn entry_list(&self) -> Vec<ThetaEntry> {
        self.entries
            .iter()
            .map(|((o, c), v)| ThetaEntry { orbit_type: o.clone(), component: c.clone(), value: *v })
            .collect()
    }

    pub fn negated(&self) -> Self {
        ThetaVector { theta11: self.theta11, entries: self.entries.iter().map(|(k, v)| (k.clone(), -v)).collect() }
    }
}

impl std::fmt::Display for ThetaVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.theta11 {
            Some(t) => write!(f, "theta11={t}")?,
            None => write!(f, "theta11=-")?,
        }
        for ((o, c), v) in &self.entries {
            write!(f, " {o}/{c}={v}")?;
        }
        Ok(())
    }
}

/// Entrywise sum; θ₁₁ is the maximum, and 1 + 1 is undefined.
pub fn theta_add(a: &ThetaVector, b: &ThetaVector) -> Result<ThetaVector> {
    let theta11 = match (a.theta11, b.theta11) {
        (Some(1), Some(1)) => return Err(Error::AdditionUndefined),
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, y) => x.or(y),
    };
    let mut entries = a.entries.clone();
    for (k, v) in &b.entries {
        *entries.entry(k.clone()).or_insert(0) += v;
    }
    Ok(ThetaVector { theta11, entries })
}

/// One tube in the recursion, without the sheet geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeSummary {
    pub centers: usize,
    pub rho: f64,
    pub eps: f64,
    pub whole: bool,
    pub shell_margin: f64,
    pub halvings: usize,
}

impl From<&TubeSpec> for TubeSummary {
    fn from(t: &TubeSpec) -> Self {
        TubeSummary {
            centers: t.centers().count(),
            rho: t.rho,
            eps: t.eps,
            whole: t.whole,
            shell_margin: t.margin,
            halvings: t.halvings,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub orbit_type: String,
    pub stratum_dim: usize,
    pub quotient_values: BTreeMap<String, i64>,
    pub zeros: Vec<ZeroRecord>,
    pub unresolved: usize,
    pub newton_failures: usize,
    pub tube: Option<TubeSummary>,
    /// Sampled points of the next domain that were found outside this one.
    pub shrink_violations: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RecursionTrace {
    pub steps: Vec<StepRecord>,
}

/// Θ(f) by the literal recursion over Iso(Ω) in maximal-first order.
pub fn theta(setting: &Setting, f: &LocalGradientMap) -> Result<(ThetaVector, RecursionTrace)> {
    if f.dim != setting.dim() {
        return Err(Error::DimensionMismatch { expected: setting.dim(), got: f.dim });
    }
    let num = &setting.num;
    let mut out = ThetaVector::default();
    let mut trace = RecursionTrace::default();
    let mut fi = f.clone();
    let n = setting.iso.classes.len();
    for (i, (&class_id, &dim)) in setting.iso.classes.iter().zip(&setting.iso.dims).enumerate() {
        let label = setting.lattice.label(class_id);
        let step = |e: Error| e.at_step(i, &label);
        let mut rec = StepRecord {
            step: i,
            orbit_type: label.clone(),
            stratum_dim: dim,
            quotient_values: BTreeMap::new(),
            zeros: Vec::new(),
            unresolved: 0,
            newton_failures: 0,
            tube: None,
            shrink_violations: 0,
        };
        let req = if dim == 0 {
            let at_origin = fi.contains(&Vector::zeros(setting.dim()));
            out.theta11 = Some(at_origin as u8);
            TubeRequest { class_id, class_label: label.clone(), stratum: None, zeros: Vec::new(), origin_zero: at_origin }
        } else {
            let st = &setting.strata[&class_id];
            let sd = stratum_degrees(&fi, st, num).map_err(step)?;
            for (q, quot) in st.quotients.iter().enumerate() {
                for &m in &quot.members {
                    let (a, b) = (sd.component_degrees.get(&m), sd.component_degrees.get(&quot.representative));
                    if a.copied().unwrap_or(0) != b.copied().unwrap_or(0) {
                        return Err(step(Error::DegenerateUnresolved(format!(
                            "Weyl-related components of {} carry different degrees",
                            quot.name
                        ))));
                    }
                }
                if sd.quotient_active(st, q) {
                    let v = sd.quotient_value(st, q).map_err(step)?;
                    rec.quotient_values.insert(quot.name.clone(), v);
                    out.entries.insert((label.clone(), quot.name.clone()), v);
                }
            }
            let mut zeros: Vec<Vector> = sd.zeros.iter().map(|z| Vector::from_vec(z.point.clone())).collect();
            zeros.extend(sd.unresolved.iter().cloned());
            rec.unresolved = sd.unresolved.len();
            rec.newton_failures = sd.newton_failures;
            rec.zeros = sd.zeros;
            TubeRequest { class_id, class_label: label.clone(), stratum: Some(st), zeros, origin_zero: false }
        };
        if i + 1 < n {
            let tube = select_tube(&fi, &setting.group, &req, num).map_err(step)?;
            let (fp, _) = perturb(&fi, &tube, num.bump);
            let (_, fc, _) = split(&fp, &tube);
            rec.shrink_violations = shrink_violations(&fi, &fc, num, i as u64);
            rec.tube = Some(TubeSummary::from(&tube));
            fi = fc;
        }
        trace.steps.push(rec);
    }
    Ok((out, trace))
}

/// Samples points of D_next and counts those outside D_prev.
fn shrink_violations(prev: &LocalGradientMap, next: &LocalGradientMap, num: &Numerics, step: u64) -> usize {
    use rand::Rng;
    let mut rng = stream_rng(num.seed, 0x5e00 + step);
    let d = prev.dim;
    (0..200)
        .map(|_| Vector::from_fn(d, |_, _| rng.gen_range(-num.bbox..num.bbox)))
        .filter(|z| next.contains(z) && !prev.contains(z))
        .count()
}

/// The first tube of the recursion that is not empty, applied to f itself.
pub struct FirstStep {
    pub step: usize,
    pub tube: TubeSpec,
    pub perturbed: LocalGradientMap,
    pub family: HomotopyFamily,
}

impl FirstStep {
    /// (f^n, f^a) of the perturbed map.
    pub fn split(&self) -> (LocalGradientMap, LocalGradientMap) {
        let (fnorm, _, fa) = split(&self.perturbed, &self.tube);
        (fnorm, fa)
    }
}

pub fn first_perturbation(setting: &Setting, f: &LocalGradientMap) -> Result<Option<FirstStep>> {
    let num = &setting.num;
    for (i, (&class_id, &dim)) in setting.iso.classes.iter().zip(&setting.iso.dims).enumerate() {
        let label = setting.lattice.label(class_id);
        let req = if dim == 0 {
            let at_origin = f.contains(&Vector::zeros(setting.dim()));
            TubeRequest { class_id, class_label: label.clone(), stratum: None, zeros: Vec::new(), origin_zero: at_origin }
        } else {
            let st = &setting.strata[&class_id];
            let sd = stratum_degrees(f, st, num).map_err(|e| e.at_step(i, &label))?;
            let mut zeros: Vec<Vector> = sd.zeros.iter().map(|z| Vector::from_vec(z.point.clone())).collect();
            zeros.extend(sd.unresolved.iter().cloned());
            TubeRequest { class_id, class_label: label.clone(), stratum: Some(st), zeros, origin_zero: false }
        };
        let tube = select_tube(f, &setting.group, &req, num).map_err(|e| e.at_step(i, &label))?;
        if tube.is_empty() {
            continue;
        }
        let (perturbed, family) = perturb(f, &tube, num.bump);
        return Ok(Some(FirstStep { step: i, tube, perturbed, family }));
    }
    Ok(None)
}

/// The line problem equivalent to a radial S¹-map: the ±1 action on ℝ, the
/// even potential x ↦ φ(x²), and the label standing for the (ℤ_k) type.
pub fn radial_s1_line(
    weights: &[i64],
    phi_of_s: &Polynomial,
    punctured: bool,
    num: &Numerics,
) -> Result<(Setting, LocalGradientMap, String)> {
    let rep = CircleRep::new(weights.to_vec(), 0)?;
    let k = rep.generic_isotropy_order()?;
    if phi_of_s.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: phi_of_s.dim() });
    }
    let x2 = Polynomial::var(1, 0).pow(2);
    let mut psi = Polynomial::zero(1);
    for (exp, c) in phi_of_s.terms() {
        psi = psi.add(&x2.pow(exp[0]).scale(c));
    }
    let omega = if punctured { DomainExpr::PuncturedSpace } else { DomainExpr::FullSpace };
    let setting = Setting::new(FiniteGroupRep::antipodal(1)?, omega.clone(), num.clone())?;
    let label = if k == 1 { "(e)".to_string() } else { format!("(Z{k})") };
    Ok((setting, LocalGradientMap::from_potential(psi, omega), label))
}

/// Θ of a radial S¹-map on ℂ or ℂ∖{0}. The potential is a polynomial in
/// s = r² (one variable). The orbit space of ℂ∖{0} is (0, ∞) ∋ r, so the
/// computation is that of the even potential x ↦ φ(x²) under ±1 on the line,
/// with the (e) stratum of the line standing for the (ℤ_k) stratum.
pub fn theta_radial_s1(weights: &[i64], phi_of_s: &Polynomial, punctured: bool, num: &Numerics) -> Result<ThetaVector> {
    let (setting, f, label) = radial_s1_line(weights, phi_of_s, punctured, num)?;
    let (line, _) = theta(&setting, &f)?;
    let mut out = ThetaVector::zero(line.theta11);
    for ((_, comp), v) in line.entries {
        out.entries.insert((label.clone(), comp), v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn addition_rules() {
        let a = ThetaVector::unit(Some(0), "(e)", "q0");
        assert_eq!(theta_add(&a, &ThetaVector::zero(Some(0))).unwrap(), a);
        let s = theta_add(&a, &a.negated()).unwrap();
        assert_eq!(s.get("(e)", "q0"), 0);
        assert!(s.is_zero());
        let one = ThetaVector::zero(Some(1));
        assert_eq!(theta_add(&one, &one), Err(Error::AdditionUndefined));
        assert_eq!(theta_add(&one, &a).unwrap().theta11, Some(1));
    }

    #[test]
    fn json_shape() {
        let v = ThetaVector::unit(None, "(Z2)", "q1");
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"{"theta11":null,"entries":[{"orbit_type":"(Z2)","component":"q1","value":1}]}"#);
        assert_eq!(serde_json::from_str::<ThetaVector>(&s).unwrap(), v);
    }

    fn line(poly: &str) -> ThetaVector {
        let setting =
            Setting::new(FiniteGroupRep::antipodal(1).unwrap(), DomainExpr::FullSpace, Numerics::default()).unwrap();
        let f = LocalGradientMap::from_potential(Polynomial::parse(poly, 1).unwrap(), DomainExpr::FullSpace);
        theta(&setting, &f).unwrap().0
    }

    #[test]
    fn z2_line_minimum_and_maximum() {
        let min = line("x1^2/2");
        assert_eq!(min.theta11, Some(1));
        assert_eq!(min.get("(e)", "q0"), 0);
        let max = line("-x1^2/2");
        assert_eq!(max.theta11, Some(1));
        assert_eq!(max.get("(e)", "q0"), -1);
    }

    #[test]
    fn empty_map_is_zero() {
        let setting =
            Setting::new(FiniteGroupRep::dihedral(3).unwrap(), DomainExpr::FullSpace, Numerics::default()).unwrap();
        let (t, _) = theta(&setting, &LocalGradientMap::empty(2)).unwrap();
        assert_eq!(t.theta11, Some(0));
        assert!(t.is_zero());
    }

    #[test]
    fn circle_radial_reduces_to_the_line() {
        let num = Numerics::default();
        let s = Polynomial::var(1, 0);
        let plus = theta_radial_s1(&[2], &s.scale(0.5), false, &num).unwrap();
        assert_eq!((plus.theta11, plus.get("(Z2)", "q0")), (Some(1), 0));
        let minus = theta_radial_s1(&[2], &s.scale(-0.5), false, &num).unwrap();
        assert_eq!((minus.theta11, minus.get("(Z2)", "q0")), (Some(1), -1));
        let ring = Polynomial::parse("(x1-1)^2/4", 1).unwrap();
        let r = theta_radial_s1(&[1], &ring, true, &num).unwrap();
        assert_eq!((r.theta11, r.get("(e)", "q0")), (None, 1));
        assert!(matches!(theta_radial_s1(&[1, 2], &ring, true, &num), Err(Error::UnsupportedRep(_))));
    }
}
