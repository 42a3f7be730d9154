//! The acceptance checks, runnable from the CLI and from the test suite.

use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::degree::kronecker_degree;
use crate::domain::DomainExpr;
use crate::error::{Error, Result};
use crate::factory::{catalog, orbit_normal, scaled, sink_orbit, CATALOG};
use crate::group::{FiniteGroupRep, GroupSpec};
use crate::linalg::{sym_eigenvalues, to_vec, vector, Vector};
use crate::local_map::{disjoint_union, Cut, LocalGradientMap};
use crate::numerics::{stream_rng, with_pool_size, BumpKind, Numerics};
use crate::perturbation::verify_partition;
use crate::poly::Polynomial;
use crate::quotient_degree::stratum_degrees;
use crate::theta::{first_perturbation, radial_s1_line, theta, theta_add, theta_radial_s1, Setting, ThetaVector};
use crate::zeros::{jacobian, multi_start};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    All,
    Axioms,
    Degree,
    Partition,
}

impl Suite {
    pub fn criteria(self) -> &'static [u8] {
        match self {
            Suite::All => &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10],
            Suite::Axioms => &[1, 2, 3, 4, 5, 6, 8],
            Suite::Degree => &[7],
            Suite::Partition => &[9],
        }
    }

    pub fn parse(s: &str) -> Option<Suite> {
        match s {
            "all" => Some(Suite::All),
            "axioms" => Some(Suite::Axioms),
            "degree" => Some(Suite::Degree),
            "partition" => Some(Suite::Partition),
            _ => None,
        }
    }
}

/// Outcome of one criterion. Contains nothing that depends on timing or on
/// the worker count, so result files can be compared byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    pub failures: Vec<String>,
    pub notes: Vec<String>,
}

impl CriterionResult {
    fn new(id: u8) -> Self {
        CriterionResult { id, name: name(id).to_string(), passed: false, cases: 0, failures: vec![], notes: vec![] }
    }

    fn case(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn error(&mut self, context: &str, e: Error) {
        self.cases += 1;
        self.failures.push(format!("{context}: {e}"));
    }

    fn finish(mut self) -> Self {
        self.passed = self.failures.is_empty() && self.cases > 0;
        self
    }
}

pub fn name(id: u8) -> &'static str {
    match id {
        1 => "normalization",
        2 => "additivity",
        3 => "vanishing",
        4 => "split consistency",
        5 => "z2 line",
        6 => "circle radial",
        7 => "degree oracles",
        8 => "quotient division",
        9 => "partition",
        10 => "determinism",
        _ => "unknown",
    }
}

/// Wall-clock budget in seconds, where one is set.
pub fn time_limit(id: u8) -> Option<f64> {
    match id {
        1 => Some(30.0),
        2 => Some(60.0),
        5 | 6 => Some(5.0),
        7 => Some(120.0),
        9 => Some(30.0),
        _ => None,
    }
}

#[derive(Debug, Clone)]
pub struct TimedResult {
    pub result: CriterionResult,
    pub seconds: f64,
}

impl TimedResult {
    pub fn in_time(&self) -> bool {
        time_limit(self.result.id).map_or(true, |l| self.seconds < l)
    }

    pub fn passed(&self) -> bool {
        self.result.passed && self.in_time()
    }

    pub fn line(&self) -> String {
        let limit = time_limit(self.result.id).map(|l| format!(" (limit {l:.0} s)")).unwrap_or_default();
        let mut s = format!(
            "criterion {:>2} {:<18} {}  {} cases, {} failures, {:.2} s{}",
            self.result.id,
            self.result.name,
            if self.passed() { "PASS" } else { "FAIL" },
            self.result.cases,
            self.result.failures.len(),
            self.seconds,
            limit
        );
        if !self.in_time() {
            s.push_str("  over time");
        }
        s
    }
}

pub fn run_criterion(id: u8, num: &Numerics) -> TimedResult {
    let start = Instant::now();
    let result = match id {
        1 => normalization(num),
        2 => additivity(num),
        3 => vanishing(num),
        4 => split_consistency(num),
        5 => z2_line(num),
        6 => circle_radial(num),
        7 => degree_oracles(num),
        8 => quotient_division(num),
        9 => partition(num),
        10 => determinism(num),
        _ => {
            let mut r = CriterionResult::new(id);
            r.failures.push("no such criterion".into());
            r
        }
    };
    TimedResult { result, seconds: start.elapsed().as_secs_f64() }
}

/// Runs a suite on a pool of the given size.
pub fn run_suite(suite: Suite, num: &Numerics, pool: usize) -> Vec<TimedResult> {
    with_pool_size(pool, || suite.criteria().iter().map(|&id| run_criterion(id, num)).collect())
}

/// The machine-readable results file.
pub fn results_json(suite: Suite, results: &[TimedResult]) -> String {
    #[derive(Serialize)]
    struct File<'a> {
        schema: &'static str,
        suite: Suite,
        passed: bool,
        criteria: Vec<&'a CriterionResult>,
    }
    let file = File {
        schema: "egdeg/1",
        suite,
        passed: results.iter().all(|r| r.result.passed),
        criteria: results.iter().map(|r| &r.result).collect(),
    };
    serde_json::to_string_pretty(&file).expect("results serialize")
}

// ---------------------------------------------------------------------------
// helpers

fn test_groups() -> Vec<(&'static str, FiniteGroupRep)> {
    vec![
        ("antipodal(1)", FiniteGroupRep::antipodal(1).unwrap()),
        ("antipodal(2)", FiniteGroupRep::antipodal(2).unwrap()),
        ("dihedral(3)", FiniteGroupRep::dihedral(3).unwrap()),
        ("symmetric(3)", FiniteGroupRep::symmetric(3).unwrap()),
        ("cyclic(4)", FiniteGroupRep::cyclic(4).unwrap()),
    ]
}

fn origin_slot(setting: &Setting) -> Option<u8> {
    setting.iso.dims.contains(&0).then_some(0)
}

/// A point of the quotient component q of the stratum of `class_id`, away
/// from walls and from the origin.
fn sample_point(setting: &Setting, class_id: usize, q: usize, rng: &mut ChaCha8Rng) -> Vector {
    let st = &setting.strata[&class_id];
    let k = st.dim();
    let r = 2.0f64.min(0.8 * st.bbox);
    for _ in 0..5000 {
        let y = Vector::from_fn(k, |_, _| rng.gen_range(-r..r));
        if y.norm() < 0.4 || y.norm() > r || st.wall_distance(&y) < 0.3 {
            continue;
        }
        if setting.omega.margin(&st.to_ambient(&y)) < 0.3 {
            continue;
        }
        if matches!(st.locate(&y), Ok((_, qq)) if qq == q) {
            return st.to_ambient(&y);
        }
    }
    st.to_ambient(&st.components[st.quotients[q].representative].interior)
}

/// A ball radius that passes the orbit-normal validity checks.
fn orbit_eps(setting: &Setting, x: &Vector) -> f64 {
    let g = &setting.group;
    let orbit = g.orbit(x).expect("generic sample");
    let mut m: f64 = 0.25;
    for (i, p) in orbit.iter().enumerate() {
        for q in &orbit[i + 1..] {
            m = m.min((p - q).norm() / 2.0);
        }
        m = m.min(setting.omega.margin(p));
    }
    for s in &setting.lattice.subgroups {
        let d = s.fixed.distance(x);
        if d > 1e-9 {
            m = m.min(d);
        }
    }
    0.8 * m
}

struct OrbitMap {
    map: LocalGradientMap,
    orbit: Vec<Vector>,
    eps: f64,
    sign: i64,
    class_id: usize,
    quotient: usize,
}

fn random_orbit_map(setting: &Setting, rng: &mut ChaCha8Rng, allow_sink: bool) -> Result<OrbitMap> {
    let classes: Vec<usize> = setting.strata.keys().copied().collect();
    let class_id = classes[rng.gen_range(0..classes.len())];
    let st = &setting.strata[&class_id];
    let quotient = rng.gen_range(0..st.quotients.len());
    let x = sample_point(setting, class_id, quotient, rng);
    let eps = orbit_eps(setting, &x);
    let sink = allow_sink && rng.gen_bool(0.5);
    let map = if sink {
        sink_orbit(&setting.group, &setting.omega, &x, eps)?
    } else {
        orbit_normal(&setting.group, &setting.omega, &x, eps)?
    };
    Ok(OrbitMap { map, orbit: setting.group.orbit(&x)?, eps, sign: if sink { -1 } else { 1 }, class_id, quotient })
}

fn separated(a: &OrbitMap, b: &OrbitMap) -> bool {
    a.orbit.iter().all(|p| b.orbit.iter().all(|q| (p - q).norm() > a.eps + b.eps + 0.05))
}

fn expected_unit(setting: &Setting, m: &OrbitMap) -> ThetaVector {
    let st = &setting.strata[&m.class_id];
    let mut v = ThetaVector::zero(origin_slot(setting));
    v.entries.insert((st.label.clone(), st.quotient_name(m.quotient).to_string()), m.sign);
    v
}

// ---------------------------------------------------------------------------
// criteria

fn normalization(num: &Numerics) -> CriterionResult {
    let mut r = CriterionResult::new(1);
    let mut rng = stream_rng(num.seed, 0xc1);
    for (gname, g) in test_groups() {
        let setting = match Setting::new(g, DomainExpr::FullSpace, num.clone()) {
            Ok(s) => s,
            Err(e) => {
                r.error(gname, e);
                continue;
            }
        };
        for (&class_id, st) in &setting.strata {
            for q in 0..st.quotients.len() {
                let x = sample_point(&setting, class_id, q, &mut rng);
                let eps = orbit_eps(&setting, &x);
                let run = orbit_normal(&setting.group, &setting.omega, &x, eps).and_then(|f| theta(&setting, &f));
                let want = ThetaVector::unit(origin_slot(&setting), &st.label, st.quotient_name(q));
                match run {
                    Ok((got, _)) => r.case(got == want, || format!("{gname} {}/q{q} at {:?}: got {got}", st.label, to_vec(&x))),
                    Err(e) => r.error(&format!("{gname} {}/q{q}", st.label), e),
                }
            }
        }
    }
    r.finish()
}

fn additivity(num: &Numerics) -> CriterionResult {
    let mut r = CriterionResult::new(2);
    let mut rng = stream_rng(num.seed, 0xc2);
    let settings: Vec<(&str, Setting)> = test_groups()
        .into_iter()
        .map(|(n, g)| (n, Setting::new(g, DomainExpr::FullSpace, num.clone()).expect("test setting")))
        .collect();
    for pair in 0..20 {
        let (gname, setting) = &settings[pair % settings.len()];
        let mut run = || -> Result<(ThetaVector, ThetaVector)> {
            let a = random_orbit_map(setting, &mut rng, true)?;
            let mut b = random_orbit_map(setting, &mut rng, true)?;
            let mut tries = 0;
            while !separated(&a, &b) {
                tries += 1;
                if tries > 200 {
                    return Err(Error::Config("no disjoint partner found".into()));
                }
                b = random_orbit_map(setting, &mut rng, true)?;
            }
            let u = disjoint_union(a.map.clone(), b.map.clone(), num.bbox)?;
            let lhs = theta(setting, &u)?.0;
            let (ta, tb) = (theta(setting, &a.map)?.0, theta(setting, &b.map)?.0);
            if ta != expected_unit(setting, &a) || tb != expected_unit(setting, &b) {
                return Err(Error::Config(format!("summands {ta} and {tb} are not the expected units")));
            }
            Ok((lhs, theta_add(&ta, &tb)?))
        };
        match run() {
            Ok((lhs, rhs)) => r.case(lhs == rhs, || format!("pair {pair} ({gname}): {lhs} vs {rhs}")),
            Err(e) => r.error(&format!("pair {pair} ({gname})"), e),
        }
    }
    r.finish()
}

/// Maps without zeros, together with their settings.
fn zero_free_maps(num: &Numerics) -> Result<Vec<(String, Setting, LocalGradientMap)>> {
    let full = DomainExpr::FullSpace;
    let pot = |s: &str, d: usize, dom: DomainExpr| -> Result<LocalGradientMap> {
        Ok(LocalGradientMap::from_potential(Polynomial::parse(s, d)?, dom))
    };
    let annulus = DomainExpr::Annulus { r1: 0.5, r2: 2.0 };
    let mut out = Vec::new();
    let mut push = |name: &str, g: FiniteGroupRep, omega: &DomainExpr, f: LocalGradientMap| -> Result<()> {
        out.push((name.to_string(), Setting::new(g, omega.clone(), num.clone())?, f));
        Ok(())
    };
    push("z2 line radial on annulus", FiniteGroupRep::antipodal(1)?, &full, pot("x1^2/2", 1, annulus.clone())?)?;
    push("z2 plane radial on annulus", FiniteGroupRep::antipodal(2)?, &full, pot("(x1^2+x2^2)/2", 2, annulus.clone())?)?;
    push("d3 radial on annulus", FiniteGroupRep::dihedral(3)?, &full, pot("(x1^2+x2^2)/2", 2, annulus.clone())?)?;
    push("s3 radial on annulus", FiniteGroupRep::symmetric(3)?, &full, pot("(x1^2+x2^2+x3^2)/2", 3, annulus)?)?;
    let inner = DomainExpr::difference(DomainExpr::Ball { r: 0.5 }, DomainExpr::Ball { r: 0.1 });
    push(
        "z4 mexican hat inside the ring",
        FiniteGroupRep::cyclic(4)?,
        &full,
        pot("(x1^2+x2^2)^2/4 - (x1^2+x2^2)/2", 2, inner)?,
    )?;
    let holes = |pts: &[Vec<f64>], r: f64| DomainExpr::Union {
        items: pts.iter().map(|c| DomainExpr::OffsetBall { center: c.clone(), r }).collect(),
    };
    let dw = pot("(x1^2-1)^2 + x2^2", 2, DomainExpr::PuncturedSpace)?
        .with_cut(Cut::RemoveClosed { set: holes(&[vec![1.0, 0.0], vec![-1.0, 0.0]], 0.2) });
    push("z2 double well off its zeros", FiniteGroupRep::antipodal(2)?, &DomainExpr::PuncturedSpace, dw)?;
    let d3 = FiniteGroupRep::dihedral(3)?;
    let x = vector(&[1.0, 0.0]);
    let on = orbit_normal(&d3, &full, &x, 0.2)?;
    let orbit: Vec<Vec<f64>> = d3.orbit(&x)?.iter().map(to_vec).collect();
    push("d3 orbit-normal off its orbit", d3.clone(), &full, on.with_cut(Cut::RemoveClosed { set: holes(&orbit, 0.1) }))?;
    let y = vector(&[0.8, 0.6]);
    let sk = sink_orbit(&d3, &full, &y, 0.1)?;
    let orbit: Vec<Vec<f64>> = d3.orbit(&y)?.iter().map(to_vec).collect();
    push("d3 sink off its orbit", d3, &full, sk.with_cut(Cut::RemoveClosed { set: holes(&orbit, 0.05) }))?;
    push(
        "s3 radial off the origin",
        FiniteGroupRep::symmetric(3)?,
        &full,
        pot("(x1^2+x2^2+x3^2)/2", 3, DomainExpr::difference(DomainExpr::FullSpace, DomainExpr::Ball { r: 0.3 }))?,
    )?;
    push(
        "trivial group, ball away from the minimum",
        FiniteGroupRep::trivial(2),
        &full,
        pot("(x1^2+x2^2)/2", 2, DomainExpr::OffsetBall { center: vec![1.0, 1.0], r: 0.5 })?,
    )?;
    Ok(out)
}

fn vanishing(num: &Numerics) -> CriterionResult {
    let mut r = CriterionResult::new(3);
    for (gname, g) in test_groups() {
        let d = g.dim();
        match Setting::new(g, DomainExpr::FullSpace, num.clone()).and_then(|s| theta(&s, &LocalGradientMap::empty(d))) {
            Ok((t, _)) => r.case(t.is_zero(), || format!("empty map over {gname}: {t}")),
            Err(e) => r.error(&format!("empty map over {gname}"), e),
        }
    }
    match zero_free_maps(num) {
        Ok(maps) => {
            for (name, setting, f) in maps {
                match theta(&setting, &f) {
                    Ok((t, trace)) => {
                        let zeros: usize = trace.steps.iter().map(|s| s.zeros.len()).sum();
                        r.case(t.is_zero() && zeros == 0, || format!("{name}: {t}, {zeros} zeros"))
                    }
                    Err(e) => r.error(&name, e),
                }
            }
        }
        Err(e) => r.error("building zero-free maps", e),
    }
    r.finish()
}

fn catalog_problem(name: &str, num: &Numerics) -> Result<(Setting, LocalGradientMap)> {
    catalog(name)?.problem(num)
}

fn split_consistency(num: &Numerics) -> CriterionResult {
    let mut r = CriterionResult::new(4);
    for name in CATALOG {
        let (setting, f) = match catalog_problem(name, num) {
            Ok(p) => p,
            Err(e) => {
                r.error(name, e);
                continue;
            }
        };
        let base = match theta(&setting, &f) {
            Ok((t, _)) => t,
            Err(e) => {
                r.error(name, e);
                continue;
            }
        };
        let split = || -> Result<Option<ThetaVector>> {
            let Some(step) = first_perturbation(&setting, &f)? else { return Ok(None) };
            let (fnorm, fa) = step.split();
            Ok(Some(theta_add(&theta(&setting, &fnorm)?.0, &theta(&setting, &fa)?.0)?))
        };
        match split() {
            Ok(Some(sum)) => r.case(sum == base, || format!("{name}: f^n + f^a = {sum}, f = {base}")),
            Ok(None) => r.case(base.is_zero(), || format!("{name}: no zeros but {base}")),
            Err(e) => r.error(&format!("{name} split"), e),
        }
        for lambda in [0.5, 2.0, 7.0] {
            match scaled(&f, lambda).and_then(|g| theta(&setting, &g)) {
                Ok((t, _)) => r.case(t == base, || format!("{name} scaled by {lambda}: {t} vs {base}")),
                Err(e) => r.error(&format!("{name} scaled by {lambda}"), e),
            }
        }
        let quintic = setting.with_numerics(Numerics { bump: BumpKind::Quintic, ..num.clone() });
        match theta(&quintic, &f) {
            Ok((t, _)) => r.case(t == base, || format!("{name} with quintic bump: {t} vs {base}")),
            Err(e) => r.error(&format!("{name} quintic"), e),
        }
    }
    r.finish()
}

/// Brute-force degree of the perturbed potential along the half-line.
///
/// Builds ψ(v) = φ(μ(v)v) + ω(v) for v < ε and ψ = φ beyond, with μ the
/// cubic smoothstep and ω the well function written out again here, samples
/// it on a fine grid of (0, b] and counts minima (+1) and maxima (−1) from
/// sign changes of the increments. The count must agree with the boundary
/// signs; the common value is returned. With `eps = None` the potential is
/// used unperturbed.
pub fn half_line_oracle(phi: &dyn Fn(f64) -> f64, eps: Option<f64>, b: f64) -> std::result::Result<i64, String> {
    let psi = |v: f64| -> f64 {
        let Some(e) = eps else { return phi(v) };
        if v >= e {
            return phi(v);
        }
        let mu = if v <= 2.0 * e / 3.0 {
            0.0
        } else {
            let u = (v - 2.0 * e / 3.0) / (e / 3.0);
            3.0 * u * u - 2.0 * u * u * u
        };
        let om = if v <= e / 3.0 {
            v * v / 2.0 - e * e / 9.0
        } else if v <= 2.0 * e / 3.0 {
            -(v - 2.0 * e / 3.0).powi(2) / 2.0
        } else {
            0.0
        };
        phi(mu * v) + om
    };
    let fine = eps.unwrap_or(b / 100.0).min(b / 100.0);
    let mut grid: Vec<f64> = (1..=4000).map(|i| fine * 1.5 * i as f64 / 4000.0).collect();
    let start = *grid.last().unwrap();
    grid.extend((1..=4000).map(|i| start + (b - start) * i as f64 / 4000.0));
    let signs: Vec<i8> = grid
        .windows(2)
        .map(|w| {
            let d = psi(w[1]) - psi(w[0]);
            if d > 0.0 {
                1
            } else if d < 0.0 {
                -1
            } else {
                0
            }
        })
        .filter(|&s| s != 0)
        .collect();
    let first = *signs.first().ok_or("flat potential")?;
    let last = *signs.last().unwrap();
    let mut count = 0i64;
    for w in signs.windows(2) {
        match (w[0], w[1]) {
            (-1, 1) => count += 1,
            (1, -1) => count -= 1,
            _ => {}
        }
    }
    let boundary = (last as i64 - first as i64) / 2;
    if count != boundary {
        return Err(format!("critical count {count} disagrees with boundary degree {boundary}"));
    }
    Ok(count)
}

fn line_case(r: &mut CriterionResult, label: &str, setting: &Setting, f: &LocalGradientMap, phi: &dyn Fn(f64) -> f64) {
    let run = theta(setting, f);
    let (t, trace) = match run {
        Ok(x) => x,
        Err(e) => return r.error(label, e),
    };
    let eps = trace.steps.iter().find_map(|s| s.tube.as_ref().filter(|t| t.centers > 0 || t.whole).map(|t| t.eps));
    match half_line_oracle(phi, eps, setting.num.bbox) {
        Ok(want) => {
            let want_t11 = origin_slot(setting).map(|_| 1);
            r.notes.push(format!("{label}: oracle {want}, theta {t}"));
            r.case(t.get("(e)", "q0") == want && t.theta11 == want_t11, || format!("{label}: {t}, oracle {want}"))
        }
        Err(e) => r.case(false, || format!("{label}: oracle failed: {e}")),
    }
}

fn z2_line(num: &Numerics) -> CriterionResult {
    let mut r = CriterionResult::new(5);
    let setting = match Setting::new(FiniteGroupRep::antipodal(1).unwrap(), DomainExpr::FullSpace, num.clone()) {
        Ok(s) => s,
        Err(e) => {
            r.error("setting", e);
            return r.finish();
        }
    };
    for (label, sign, pinned) in [("x^2/2", 1.0, 0), ("-x^2/2", -1.0, -1)] {
        let f = LocalGradientMap::from_potential(
            Polynomial::var(1, 0).pow(2).scale(sign / 2.0),
            DomainExpr::FullSpace,
        );
        let phi = move |v: f64| sign * v * v / 2.0;
        line_case(&mut r, label, &setting, &f, &phi);
        // the oracle's own value is pinned as well
        let tube_eps = 0.01;
        r.case(half_line_oracle(&phi, Some(tube_eps), num.bbox) == Ok(pinned), || format!("{label}: oracle not {pinned}"));
    }
    r.finish()
}

fn circle_radial(num: &Numerics) -> CriterionResult {
    let mut r = CriterionResult::new(6);
    let s = Polynomial::var(1, 0);
    let cases: [(&str, Polynomial, bool, Box<dyn Fn(f64) -> f64>, Option<u8>); 3] = [
        ("r^2/2 on C", s.scale(0.5), false, Box::new(|v: f64| v * v / 2.0), Some(1)),
        ("-r^2/2 on C", s.scale(-0.5), false, Box::new(|v: f64| -v * v / 2.0), Some(1)),
        (
            "(r^2-1)^2/4 on C minus 0",
            Polynomial::parse("(x1-1)^2/4", 1).unwrap(),
            true,
            Box::new(|v: f64| (v * v - 1.0).powi(2) / 4.0),
            None,
        ),
    ];
    for (label, phi_s, punctured, phi, t11) in cases {
        let run = || -> Result<(ThetaVector, Option<f64>)> {
            let t = theta_radial_s1(&[1], &phi_s, punctured, num)?;
            let (setting, f, _) = radial_s1_line(&[1], &phi_s, punctured, num)?;
            let (_, trace) = theta(&setting, &f)?;
            let eps = trace.steps.iter().find_map(|s| s.tube.as_ref().filter(|t| t.whole || t.centers > 0).map(|t| t.eps));
            Ok((t, eps))
        };
        match run() {
            Ok((t, eps)) => match half_line_oracle(&*phi, eps, num.bbox) {
                Ok(want) => {
                    r.notes.push(format!("{label}: oracle {want}, theta {t}"));
                    r.case(t.get("(e)", "q0") == want && t.theta11 == t11, || format!("{label}: {t}, oracle {want}"))
                }
                Err(e) => r.case(false, || format!("{label}: oracle failed: {e}")),
            },
            Err(e) => r.error(label, e),
        }
    }
    // the pair (1, 0) / (1, -1) differs although both maps are equivariantly
    // homotopic as non-gradient maps; the multi-weight case is out of scope
    r.case(
        matches!(theta_radial_s1(&[1, 2], &s, false, num), Err(Error::UnsupportedRep(_))),
        || "multi-weight input accepted".into(),
    );
    r.finish()
}

/// All monomials of degree 2..=4 with random coefficients.
fn random_potential(rng: &mut ChaCha8Rng, d: usize) -> Polynomial {
    let mut p = Polynomial::zero(d);
    let vars: Vec<Polynomial> = (0..d).map(|i| Polynomial::var(d, i)).collect();
    let mut exps: Vec<Vec<u32>> = vec![vec![]];
    for _ in 0..d {
        exps = exps.into_iter().flat_map(|e| (0..=4u32).map(move |k| [e.clone(), vec![k]].concat())).collect();
    }
    for e in exps {
        let deg: u32 = e.iter().sum();
        if !(2..=4).contains(&deg) {
            continue;
        }
        let mut m = Polynomial::constant(d, rng.gen_range(-1.0..1.0));
        for (i, &k) in e.iter().enumerate() {
            m = m.mul(&vars[i].pow(k));
        }
        p = p.add(&m);
    }
    p
}

fn degree_oracles(num: &Numerics) -> CriterionResult {
    let mut r = CriterionResult::new(7);
    for d in 1..=3usize {
        let mut rng = stream_rng(num.seed, 0xc7 + d as u64);
        let (lo, hi) = (vec![-1.0; d], vec![1.0; d]);
        let per_axis: usize = [0, 200, 30, 12][d];
        let seeds: Vec<Vector> = (0..per_axis.pow(d as u32))
            .map(|mut i| {
                Vector::from_fn(d, |_, _| {
                    let c = i % per_axis;
                    i /= per_axis;
                    -1.0 + (c as f64 + 0.5) * 2.0 / per_axis as f64
                })
            })
            .collect();
        let (mut accepted, mut rejected) = (0, 0);
        while accepted < 25 && rejected < 500 {
            let p = random_potential(&mut rng, d);
            let field = |x: &Vector| Some(p.value_grad(x).1);
            let inside = |x: &Vector| x.iter().all(|c| c.abs() < 1.0 - 1e-3);
            let (zeros, _) = multi_start(&field, &seeds, 1e-12, 1e-9, 1e-6, &inside);
            let mut indices = Vec::new();
            let mut degenerate = false;
            for z in &zeros {
                let j = jacobian(&field, z).unwrap();
                let ev = sym_eigenvalues(&j);
                if ev.iter().any(|e| e.abs() < 1e-2) {
                    degenerate = true;
                }
                indices.push(if ev.iter().filter(|e| **e < 0.0).count() % 2 == 0 { 1 } else { -1 });
            }
            // boundary clearance, so both oracles are well posed
            let near_boundary = zeros.iter().any(|z| z.iter().any(|c| c.abs() > 0.95));
            if degenerate || near_boundary {
                rejected += 1;
                continue;
            }
            let morse: i64 = indices.iter().sum();
            match kronecker_degree(&|x: &Vector| p.value_grad(x).1, &lo, &hi) {
                Ok(k) => {
                    accepted += 1;
                    r.case(k == morse, || format!("dim {d} field {accepted}: Morse sum {morse}, Kronecker {k}"));
                }
                Err(_) => rejected += 1,
            }
        }
        r.notes.push(format!("dim {d}: {accepted} fields compared, {rejected} rejected as degenerate or ill-posed"));
        if accepted < 25 {
            r.case(false, || format!("dim {d}: only {accepted} admissible fields"));
        }
    }
    r.finish()
}

fn quotient_division(num: &Numerics) -> CriterionResult {
    let mut r = CriterionResult::new(8);
    let mut rng = stream_rng(num.seed, 0xc8);
    let groups: Vec<(&str, Result<FiniteGroupRep>)> = vec![
        ("antipodal(2)", FiniteGroupRep::antipodal(2)),
        ("cyclic(4)", FiniteGroupRep::cyclic(4)),
        ("cyclic(3)", FiniteGroupRep::cyclic(3)),
        ("antipodal(3)", FiniteGroupRep::antipodal(3)),
        ("dihedral(3)", FiniteGroupRep::dihedral(3)),
        ("symmetric(3)", FiniteGroupRep::symmetric(3)),
        ("dihedral(4)", FiniteGroupRep::dihedral(4)),
        (
            "half-turn about an axis",
            GroupSpec::Generators { dim: 3, matrices: vec![vec![-1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 1.0]] }.build(),
        ),
        ("antipodal(1)", FiniteGroupRep::antipodal(1)),
        ("cyclic(6)", FiniteGroupRep::cyclic(6)),
    ];
    for (gname, g) in groups {
        let run = || -> Result<Vec<(String, bool)>> {
            let setting = Setting::new(g?, DomainExpr::FullSpace, num.clone())?;
            let classes: Vec<usize> = setting.strata.keys().copied().collect();
            let class_id = classes[rng.gen_range(0..classes.len())];
            let st = &setting.strata[&class_id];
            // one to three orbits in this stratum, kept apart
            let mut parts: Vec<OrbitMap> = Vec::new();
            let n = rng.gen_range(1..=3);
            let mut tries = 0;
            while parts.len() < n && tries < 300 {
                tries += 1;
                let q = rng.gen_range(0..st.quotients.len());
                let x = sample_point(&setting, class_id, q, &mut rng);
                let eps = orbit_eps(&setting, &x);
                let sink = rng.gen_bool(0.5);
                let map = if sink {
                    sink_orbit(&setting.group, &setting.omega, &x, eps)?
                } else {
                    orbit_normal(&setting.group, &setting.omega, &x, eps)?
                };
                let cand = OrbitMap { map, orbit: setting.group.orbit(&x)?, eps, sign: if sink { -1 } else { 1 }, class_id, quotient: q };
                if parts.iter().all(|p| separated(p, &cand)) {
                    parts.push(cand);
                }
            }
            let mut f = LocalGradientMap::empty(setting.dim());
            for p in &parts {
                f = disjoint_union(f, p.map.clone(), num.bbox)?;
            }
            let sd = stratum_degrees(&f, st, num)?;
            let mut checks = Vec::new();
            for (q, quot) in st.quotients.iter().enumerate() {
                // orbit counting: each orbit meeting the quotient component counts once
                let oracle: i64 = parts.iter().filter(|p| p.quotient == q).map(|p| p.sign).sum();
                let orbits_here = parts.iter().filter(|p| p.quotient == q).count();
                let ic = sd.component_degrees.get(&quot.representative).copied().unwrap_or(0);
                let zeros_in_c = sd.zeros.iter().filter(|z| z.component == quot.representative).count();
                let iq = sd.quotient_value(st, q)?;
                let stab = quot.stabilizer as i64;
                let ok = ic == stab * oracle && iq == oracle && zeros_in_c == quot.stabilizer * orbits_here;
                checks.push((
                    format!(
                        "{gname} {} {}: I_C={ic} |Stab|={stab} I_q={iq} oracle={oracle} zeros in C={zeros_in_c}",
                        st.label, quot.name
                    ),
                    ok,
                ));
            }
            Ok(checks)
        };
        match run() {
            Ok(checks) => {
                let all = checks.iter().all(|c| c.1);
                let summary = checks.iter().map(|c| c.0.clone()).collect::<Vec<_>>().join("; ");
                r.notes.push(summary.clone());
                r.case(all, || summary);
            }
            Err(e) => r.error(gname, e),
        }
    }
    r.finish()
}

fn partition(num: &Numerics) -> CriterionResult {
    let mut r = CriterionResult::new(9);
    for name in ["z2_line_max", "d3_axis_orbit_normal"] {
        let run = || -> Result<crate::perturbation::PartitionReport> {
            let (setting, f) = catalog_problem(name, num)?;
            let step = first_perturbation(&setting, &f)?.ok_or(Error::Config("no zeros to perturb around".into()))?;
            verify_partition(&step.family, 1000, num)
        };
        match run() {
            Ok(rep) => {
                r.notes.push(format!(
                    "{name}: samples A/B/C/D = {}/{}/{}/{}, zero pairs A/B = {}/{}, C margin = {:.6e}",
                    rep.a.samples, rep.b.samples, rep.c.samples, rep.d.samples, rep.a.zero_pairs, rep.b.zero_pairs, rep.c.min_norm
                ));
                r.case(rep.violations() == 0 && rep.c.min_norm > 0.0 && rep.c.samples >= 1000, || {
                    format!("{name}: {} violations, C margin {:e}", rep.violations(), rep.c.min_norm)
                });
            }
            Err(e) => r.error(name, e),
        }
    }
    r.finish()
}

fn determinism(num: &Numerics) -> CriterionResult {
    let mut r = CriterionResult::new(10);
    let one = results_json(Suite::Axioms, &run_suite(Suite::Axioms, num, 1));
    let four = results_json(Suite::Axioms, &run_suite(Suite::Axioms, num, 4));
    r.notes.push(format!("results file of {} bytes", one.len()));
    r.case(one == four, || "axioms results differ between pools of 1 and 4 workers".into());
    r.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_on_the_line() {
        assert_eq!(half_line_oracle(&|v| v * v / 2.0, Some(0.1), 2.5), Ok(0));
        assert_eq!(half_line_oracle(&|v| -v * v / 2.0, Some(0.1), 2.5), Ok(-1));
        assert_eq!(half_line_oracle(&|v| (v * v - 1.0).powi(2) / 4.0, None, 2.5), Ok(1));
        assert_eq!(half_line_oracle(&|v| -(v * v - 1.0).powi(2) / 4.0, None, 2.5), Ok(-1));
    }

    #[test]
    fn suites() {
        assert_eq!(Suite::parse("axioms").unwrap().criteria(), &[1, 2, 3, 4, 5, 6, 8]);
        assert!(Suite::parse("bogus").is_none());
    }
}
