//! The perturbation f ↦ f_{U,ε}: bump and well functions, tubes around
//! zero sets on a stratum, the potential family φ_t and the split into the
//! normal, complementary and outer parts.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::FiniteGroupRep;
use crate::linalg::{dist, Matrix, Vector};
use crate::local_map::{Cut, LocalGradientMap};
use crate::numerics::{stream_rng, BumpKind, Numerics};
use crate::stratification::Stratum;

fn check_range(s: f64, eps: f64) -> Result<()> {
    if !(0.0..=eps).contains(&s) {
        return Err(Error::OutOfRange { s, eps });
    }
    Ok(())
}

/// ω on [0, ε].
pub fn well_omega(s: f64, eps: f64) -> Result<f64> {
    check_range(s, eps)?;
    Ok(omega(s, eps))
}

/// μ on [0, ε] with the given smoothstep profile.
pub fn bump_mu(s: f64, eps: f64, kind: BumpKind) -> Result<f64> {
    check_range(s, eps)?;
    Ok(mu(s, eps, kind).0)
}

pub(crate) fn omega(s: f64, eps: f64) -> f64 {
    if s <= eps / 3.0 {
        0.5 * s * s - eps * eps / 9.0
    } else if s <= 2.0 * eps / 3.0 {
        let u = s - 2.0 * eps / 3.0;
        -0.5 * u * u
    } else {
        0.0
    }
}

pub(crate) fn omega_prime(s: f64, eps: f64) -> f64 {
    if s <= eps / 3.0 {
        s
    } else if s <= 2.0 * eps / 3.0 {
        -(s - 2.0 * eps / 3.0)
    } else {
        0.0
    }
}

/// (μ, μ') at s; μ vanishes up to 2ε/3 and equals 1 from ε on.
pub(crate) fn mu(s: f64, eps: f64, kind: BumpKind) -> (f64, f64) {
    let a = 2.0 * eps / 3.0;
    if s <= a {
        return (0.0, 0.0);
    }
    if s >= eps {
        return (1.0, 0.0);
    }
    let w = eps / 3.0;
    let u = (s - a) / w;
    match kind {
        BumpKind::Cubic => (u * u * (3.0 - 2.0 * u), 6.0 * u * (1.0 - u) / w),
        BumpKind::Quintic => (
            u * u * u * (u * (6.0 * u - 15.0) + 10.0),
            30.0 * u * u * (u - 1.0) * (u - 1.0) / w,
        ),
    }
}

/// Balls of U lying in one conjugate fixed subspace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sheet {
    pub projector: Matrix,
    pub centers: Vec<Vector>,
}

/// The pair (U, ε). `whole` marks U equal to an entire zero-dimensional
/// stratum, whose shell B^ε is empty.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TubeSpec {
    pub class_id: usize,
    pub class_label: String,
    pub sheets: Vec<Sheet>,
    pub rho: f64,
    pub whole: bool,
    pub eps: f64,
    /// Smallest |f| sampled on the padded shell.
    pub margin: f64,
    pub halvings: usize,
}

impl TubeSpec {
    pub fn is_empty(&self) -> bool {
        !self.whole && self.sheets.iter().all(|s| s.centers.is_empty())
    }

    pub fn centers(&self) -> impl Iterator<Item = &Vector> {
        self.sheets.iter().flat_map(|s| s.centers.iter())
    }

    fn eta(&self) -> f64 {
        self.eps.min(self.rho) / 6.0
    }
}

/// One level of the potential stack: φ_t built on top of the levels below.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Layer {
    pub tube: TubeSpec,
    pub bump: BumpKind,
    pub t: f64,
}

struct Split {
    sheet: usize,
    x: Vector,
    v: Vector,
    s: f64,
}

impl Layer {
    fn dist_to_centers(&self, sheet: &Sheet, x: &Vector) -> f64 {
        sheet.centers.iter().map(|c| dist(x, c)).fold(f64::INFINITY, f64::min)
    }

    fn decompose(&self, z: &Vector) -> Option<Split> {
        let tube = &self.tube;
        let mut best: Option<Split> = None;
        for (k, sh) in tube.sheets.iter().enumerate() {
            let x = &sh.projector * z;
            let v = z - &x;
            let s = v.norm();
            if s >= tube.eps {
                continue;
            }
            if !tube.whole && self.dist_to_centers(sh, &x) >= tube.rho {
                continue;
            }
            if best.as_ref().map_or(true, |b| s < b.s) {
                best = Some(Split { sheet: k, x, v, s });
            }
        }
        best
    }

    /// max(distance of the base point past ∂U, |v| − frac·ε), minimized over
    /// sheets: negative exactly on the open tube U^{frac·ε}.
    pub fn cylinder(&self, z: &Vector, frac: f64) -> f64 {
        let tube = &self.tube;
        let mut m = f64::INFINITY;
        for sh in &tube.sheets {
            let x = &sh.projector * z;
            let s = (z - &x).norm();
            let r = s - frac * tube.eps;
            let c = if tube.whole { r } else { (self.dist_to_centers(sh, &x) - tube.rho).max(r) };
            m = m.min(c);
        }
        m
    }

    /// Positive outside the padded shell around B^ε.
    pub fn shell_margin(&self, z: &Vector) -> f64 {
        let tube = &self.tube;
        if tube.whole {
            return f64::INFINITY;
        }
        let eta = tube.eta();
        let mut m = f64::INFINITY;
        for sh in &tube.sheets {
            if sh.centers.is_empty() {
                continue;
            }
            let x = &sh.projector * z;
            let s = (z - &x).norm();
            let d = self.dist_to_centers(sh, &x) - tube.rho;
            m = m.min((d.abs() - eta).max(s - tube.eps - eta));
        }
        m
    }

    /// Membership in the closed shell B^ε = {x+v : x∈∂U, |v|≤ε}.
    pub fn in_shell(&self, z: &Vector) -> bool {
        let tube = &self.tube;
        if tube.whole {
            return false;
        }
        tube.sheets.iter().any(|sh| {
            let x = &sh.projector * z;
            let s = (z - &x).norm();
            !sh.centers.is_empty() && s <= tube.eps && self.dist_to_centers(sh, &x) == tube.rho
        })
    }

    /// φ_t and its gradient, given the potential of the levels below.
    pub fn eval(&self, z: &Vector, prev: impl Fn(&Vector) -> Result<(f64, Vector)>) -> Result<(f64, Vector)> {
        let Some(sp) = self.decompose(z) else { return prev(z) };
        let eps = self.tube.eps;
        let (a, c) = if self.t <= 0.5 { (2.0 * self.t, 0.0) } else { (1.0, 2.0 * self.t - 1.0) };
        if sp.s == 0.0 || a == 0.0 {
            let (val, g) = prev(z)?;
            if sp.s == 0.0 {
                return Ok((val + c * omega(0.0, eps), g));
            }
            let w = c * omega_prime(sp.s, eps) / sp.s;
            return Ok((val + c * omega(sp.s, eps), g + &sp.v * w));
        }
        let (m0, dm0) = mu(sp.s, eps, self.bump);
        let m = a * m0 + 1.0 - a;
        let dm = a * dm0;
        let w = &sp.x + &sp.v * m;
        let (val, g) = prev(&w)?;
        let p = &self.tube.sheets[sp.sheet].projector;
        let pg = p * &g;
        let ng = &g - &pg;
        let radial = dm * sp.v.dot(&g) / sp.s + c * omega_prime(sp.s, eps) / sp.s;
        let grad = pg + ng * m + &sp.v * radial;
        Ok((val + c * omega(sp.s, eps), grad))
    }

    /// r_{2t} for t ≤ ½ and r₁ for t ≥ ½, applied to a tube point.
    pub fn retract(&self, z: &Vector) -> Vector {
        let Some(sp) = self.decompose(z) else { return z.clone() };
        let a = (2.0 * self.t).min(1.0);
        if a == 0.0 {
            return z.clone();
        }
        let m = a * mu(sp.s, self.tube.eps, self.bump).0 + 1.0 - a;
        &sp.x + &sp.v * m
    }

    /// Bounds on the singular values of the retraction's derivative: it is
    /// the identity along the stratum, m on the normal space and m + aμ′s
    /// along v.
    pub fn retract_gain(&self, z: &Vector) -> (f64, f64) {
        let Some(sp) = self.decompose(z) else { return (1.0, 1.0) };
        let a = (2.0 * self.t).min(1.0);
        let (mu, dmu) = mu(sp.s, self.tube.eps, self.bump);
        let m = a * mu + 1.0 - a;
        let radial = m + a * dmu * sp.s;
        (m.min(1.0), radial.max(1.0))
    }
}

/// Base point and normal vector of a tube point.
pub fn tube_decompose(z: &Vector, tube: &TubeSpec, all_conjugates: &[Matrix]) -> Result<(Vector, Vector)> {
    let layer = Layer { tube: tube.clone(), bump: BumpKind::Cubic, t: 1.0 };
    let sp = layer.decompose(z).ok_or(Error::Outside)?;
    let mut dists: Vec<f64> = all_conjugates.iter().map(|p| (z - p * z).norm()).collect();
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if dists.len() >= 2 && dists[1] - dists[0] <= tube.eps / 10.0 {
        return Err(Error::AmbiguousProjection { gap: dists[1] - dists[0] });
    }
    Ok((sp.x, sp.v))
}

fn random_unit(rng: &mut impl Rng, d: usize) -> Vector {
    loop {
        let v = Vector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Random vector orthogonal to the range of `p` with norm below `r`.
fn random_normal(rng: &mut impl Rng, p: &Matrix, r: f64) -> Vector {
    let d = p.nrows();
    let k = d - p.trace().round() as usize;
    if k == 0 {
        return Vector::zeros(d);
    }
    loop {
        let v = random_unit(rng, d);
        let n = &v - p * &v;
        if n.norm() > 1e-3 {
            let len = r * rng.gen_range(0.0f64..1.0).powf(1.0 / k as f64);
            return n.normalize() * len;
        }
    }
}

/// Where to put the tube: the stratum and the zeros of f on it.
pub struct TubeRequest<'a> {
    pub class_id: usize,
    pub class_label: String,
    /// None for the zero-dimensional stratum {0}.
    pub stratum: Option<&'a Stratum>,
    /// Zeros in stratum coordinates (ignored for the origin, where only
    /// `origin_zero` matters).
    pub zeros: Vec<Vector>,
    pub origin_zero: bool,
}

/// Chooses U as balls of a common radius ρ around the orbit of the zeros and
/// halves ε from ρ until the tube fits the domain, the shell is zero-free and
/// projections are unambiguous.
pub fn select_tube(f: &LocalGradientMap, g: &FiniteGroupRep, req: &TubeRequest, num: &Numerics) -> Result<TubeSpec> {
    let d = g.dim();
    let pad = num.pad();
    let fail = |halvings: usize, reason: String| Error::TubeSelectionFailed {
        class: req.class_label.clone(),
        halvings,
        reason,
    };
    let margin_at = |z: &Vector| f.region_margin(z, Some(req.class_id), pad);

    let (sheets, rho, whole) = match req.stratum {
        None => {
            if !req.origin_zero {
                return Ok(empty_tube(req, num));
            }
            (vec![Sheet { projector: Matrix::zeros(d, d), centers: Vec::new() }], 0.0, true)
        }
        Some(st) => {
            if req.zeros.is_empty() {
                return Ok(empty_tube(req, num));
            }
            let mut rho = num.grid_h;
            for y in &req.zeros {
                rho = rho.min(st.wall_distance(y)).min(margin_at(&st.to_ambient(y))).min(st.bbox - y.norm());
            }
            rho *= 0.45;
            if rho <= 1e-9 {
                return Err(fail(0, format!("zeros touch the stratum boundary (rho = {rho:.3e})")));
            }
            let mut sheets: Vec<Sheet> =
                st.conjugates.iter().map(|c| Sheet { projector: c.projector.clone(), centers: Vec::new() }).collect();
            for y in &req.zeros {
                let c = st.to_ambient(y);
                for e in 0..g.order() {
                    let gc = g.act(e, &c);
                    let k = sheets
                        .iter()
                        .position(|s| (&gc - &s.projector * &gc).norm() <= 1e-9 * (1.0 + gc.norm()))
                        .ok_or_else(|| fail(0, "orbit point in no conjugate subspace".into()))?;
                    if !sheets[k].centers.iter().any(|p| (p - &gc).norm() <= 1e-12 * (1.0 + gc.norm())) {
                        sheets[k].centers.push(gc);
                    }
                }
            }
            (sheets, rho, false)
        }
    };

    let mut eps = if whole { 0.45 * num.grid_h.min(margin_at(&Vector::zeros(d))) } else { rho };
    if !(eps > 1e-12) {
        return Err(fail(0, "origin too close to the domain boundary".into()));
    }
    let projectors: Vec<Matrix> = sheets.iter().map(|s| s.projector.clone()).collect();
    let mut last_reason = String::new();
    for halvings in 0..=num.max_halvings {
        let tube = TubeSpec {
            class_id: req.class_id,
            class_label: req.class_label.clone(),
            sheets: sheets.clone(),
            rho,
            whole,
            eps,
            margin: f64::INFINITY,
            halvings,
        };
        match validate_tube(f, g, &tube, &projectors, req.class_id, num, halvings as u64) {
            Ok(margin) => return Ok(TubeSpec { margin, ..tube }),
            Err(reason) => last_reason = reason,
        }
        eps *= 0.5;
    }
    Err(fail(num.max_halvings, last_reason))
}

fn empty_tube(req: &TubeRequest, num: &Numerics) -> TubeSpec {
    TubeSpec {
        class_id: req.class_id,
        class_label: req.class_label.clone(),
        sheets: Vec::new(),
        rho: 0.0,
        whole: false,
        eps: num.grid_h,
        margin: f64::INFINITY,
        halvings: 0,
    }
}

/// Sample-based checks; returns the shell margin or the reason for rejection.
fn validate_tube(
    f: &LocalGradientMap,
    g: &FiniteGroupRep,
    tube: &TubeSpec,
    projectors: &[Matrix],
    class_id: usize,
    num: &Numerics,
    attempt: u64,
) -> std::result::Result<f64, String> {
    let d = g.dim();
    let pad = num.pad();
    let mut rng = stream_rng(num.seed, 0x7b00 + 64 * class_id as u64 + attempt);
    let layer = Layer { tube: tube.clone(), bump: num.bump, t: 1.0 };
    let occupied: Vec<&Sheet> = tube.sheets.iter().filter(|s| tube.whole || !s.centers.is_empty()).collect();
    for _ in 0..num.samples {
        let sh = occupied[rng.gen_range(0..occupied.len())];
        let base = if tube.whole {
            Vector::zeros(d)
        } else {
            let c = &sh.centers[rng.gen_range(0..sh.centers.len())];
            let u = &sh.projector * random_unit(&mut rng, d);
            let u = if u.norm() > 1e-9 { u.normalize() * (tube.rho * rng.gen_range(0.0f64..1.0)) } else { u * 0.0 };
            c + u
        };
        let z = &base + random_normal(&mut rng, &sh.projector, tube.eps);
        if !f.contains(&z) || f.region_margin(&z, Some(class_id), pad) <= 0.0 {
            return Err(format!("tube point {:?} leaves the admissible domain", z.as_slice()));
        }
        if layer.decompose(&z).is_none() {
            continue;
        }
        if projectors.len() >= 2 {
            let mut dists: Vec<f64> = projectors.iter().map(|p| (&z - p * &z).norm()).collect();
            dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if dists[1] - dists[0] <= tube.eps / 10.0 {
                return Err(format!("ambiguous projection at {:?}", z.as_slice()));
            }
        }
    }
    if tube.whole {
        return Ok(f64::INFINITY);
    }
    let eta = tube.eta();
    let mut margin = f64::INFINITY;
    let mut checked = 0;
    let mut tries = 0;
    while checked < num.samples && tries < 20 * num.samples {
        tries += 1;
        let sh = occupied[rng.gen_range(0..occupied.len())];
        let c = &sh.centers[rng.gen_range(0..sh.centers.len())];
        let u = &sh.projector * random_unit(&mut rng, d);
        if u.norm() < 1e-9 {
            continue;
        }
        let x = c + u.normalize() * (tube.rho + eta * rng.gen_range(-1.0..1.0));
        if (layer.dist_to_centers(sh, &x) - tube.rho).abs() >= eta {
            continue;
        }
        let z = &x + random_normal(&mut rng, &sh.projector, tube.eps + eta);
        checked += 1;
        match f.grad(&z) {
            Ok(gz) => margin = margin.min(gz.norm()),
            Err(_) => return Err(format!("shell point {:?} outside the domain", z.as_slice())),
        }
    }
    if margin <= 10.0 * num.zero_thresh {
        return Err(format!("f nearly vanishes on the shell (min |f| = {margin:.3e})"));
    }
    Ok(margin)
}

/// Appends the layer realizing f_{U,ε}. An empty tube leaves f unchanged.
pub fn perturb(f: &LocalGradientMap, tube: &TubeSpec, bump: BumpKind) -> (LocalGradientMap, HomotopyFamily) {
    let mut out = f.clone();
    if !tube.is_empty() {
        out.layers.push(Layer { tube: tube.clone(), bump, t: 1.0 });
    }
    let family = HomotopyFamily { base: f.clone(), perturbed: out.clone() };
    (out, family)
}

/// The three restrictions of f_{U,ε}: to U^{ε/3}, off the stratum, and off
/// the closure of U^{ε/3} as well.
pub fn split(perturbed: &LocalGradientMap, tube: &TubeSpec) -> (LocalGradientMap, LocalGradientMap, LocalGradientMap) {
    let remove = Cut::RemoveStratum { projectors: tube.sheets.iter().map(|s| s.projector.clone()).collect() };
    if tube.is_empty() {
        let fc = perturbed.clone().with_cut(remove);
        return (LocalGradientMap::empty(perturbed.dim), fc.clone(), fc);
    }
    let layer = perturbed.layers.len() - 1;
    let fnorm = perturbed.clone().with_cut(Cut::KeepTube { layer, frac: 1.0 / 3.0 });
    let fc = perturbed.clone().with_cut(remove);
    let fa = fc.clone().with_cut(Cut::RemoveTube { layer, frac: 1.0 / 3.0 });
    (fnorm, fc, fa)
}

/// h(t, ·) = ∇φ_t between f off B^ε (t = 0) and f_{U,ε} (t = 1).
#[derive(Debug, Clone)]
pub struct HomotopyFamily {
    pub base: LocalGradientMap,
    pub perturbed: LocalGradientMap,
}

impl HomotopyFamily {
    pub fn layer(&self) -> Option<&Layer> {
        if self.perturbed.layers.len() > self.base.layers.len() {
            self.perturbed.layers.last()
        } else {
            None
        }
    }

    pub fn at(&self, t: f64) -> LocalGradientMap {
        let mut m = self.perturbed.clone();
        if self.layer().is_some() {
            m.layers.last_mut().unwrap().t = t;
        }
        m
    }

    pub fn h(&self, t: f64, z: &Vector) -> Result<Vector> {
        self.at(t).grad(z)
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct RegionStats {
    pub samples: usize,
    pub violations: usize,
    /// Samples where both sides of the zero test vanish.
    pub zero_pairs: usize,
    pub min_norm: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct PartitionReport {
    pub a: RegionStats,
    pub b: RegionStats,
    pub c: RegionStats,
    pub d: RegionStats,
}

impl PartitionReport {
    pub fn violations(&self) -> usize {
        self.a.violations + self.b.violations + self.c.violations + self.d.violations
    }
}

/// Samples the four regions A, B, C, D of I×U^ε and checks the zero
/// characterizations. A tenth of the A and B samples are placed where f
/// vanishes after retraction, so the "iff" is exercised in both directions.
/// C is sampled with t in (½, 1]: at t = ½ the ω term is switched off and
/// h vanishes over zeros of f.
pub fn verify_partition(family: &HomotopyFamily, n: usize, num: &Numerics) -> Result<PartitionReport> {
    let Some(layer) = family.layer() else { return Ok(PartitionReport::default()) };
    let tube = &layer.tube;
    let d = family.base.dim;
    let thr = num.zero_thresh;
    let mut rng = stream_rng(num.seed, 0x9a27);
    let sheets: Vec<&Sheet> = tube.sheets.iter().filter(|s| tube.whole || !s.centers.is_empty()).collect();
    let eps = tube.eps;
    let f = &family.base;

    let draw = |rng: &mut rand_chacha::ChaCha8Rng, lo: f64, hi: f64, on_zero: bool| -> Vector {
        let sh = sheets[rng.gen_range(0..sheets.len())];
        let base = if tube.whole {
            Vector::zeros(d)
        } else {
            let c = sh.centers[rng.gen_range(0..sh.centers.len())].clone();
            if on_zero {
                c
            } else {
                let u = &sh.projector * random_unit(rng, d);
                if u.norm() > 1e-9 { c + u.normalize() * (tube.rho * rng.gen_range(0.0f64..0.999)) } else { c }
            }
        };
        let dir = random_normal(rng, &sh.projector, 1.0);
        if dir.norm() == 0.0 {
            return base;
        }
        let len = if hi > lo { rng.gen_range(lo..hi) } else { lo };
        base + dir.normalize() * len
    };

    let mut report = PartitionReport::default();
    // h = Drᵀ f(r): it vanishes with f(r), and otherwise its size is bounded
    // below by the smallest singular value of Dr
    let iff = |stats: &mut RegionStats, h: &Vector, fr: &Vector, (lo, hi): (f64, f64)| {
        stats.samples += 1;
        let ok = if fr.norm() <= thr {
            stats.zero_pairs += 1;
            h.norm() <= hi * thr
        } else {
            h.norm() > 0.0 && h.norm() >= 0.5 * lo * fr.norm()
        };
        if !ok {
            stats.violations += 1;
        }
        stats.min_norm = stats.min_norm.min(h.norm());
    };
    report.a.min_norm = f64::INFINITY;
    report.b.min_norm = f64::INFINITY;
    report.c.min_norm = f64::INFINITY;
    report.d.min_norm = f64::INFINITY;

    for i in 0..n {
        // A: t in [0, 1/2], z in U^eps
        let targeted = i % 10 == 0;
        let (t, z) = if targeted {
            (0.5, draw(&mut rng, 0.0, 2.0 * eps / 3.0, true))
        } else {
            (rng.gen_range(0.0..=0.5), draw(&mut rng, 0.0, eps * 0.999, false))
        };
        let ht = family.at(t);
        let h = ht.grad(&z)?;
        let l = ht.layers.last().unwrap();
        iff(&mut report.a, &h, &f.grad(&l.retract(&z))?, l.retract_gain(&z));

        // B: t in [1/2, 1], 2eps/3 <= |v| < eps
        let (t, z) = if targeted {
            (rng.gen_range(0.5..=1.0), draw(&mut rng, 2.0 * eps / 3.0, 2.0 * eps / 3.0, true))
        } else {
            (rng.gen_range(0.5..=1.0), draw(&mut rng, 2.0 * eps / 3.0, eps * 0.999, false))
        };
        let ht = family.at(t);
        let h = ht.grad(&z)?;
        let l = ht.layers.last().unwrap();
        iff(&mut report.b, &h, &f.grad(&l.retract(&z))?, l.retract_gain(&z));

        // C: t in (1/2, 1], 0 < |v| < 2eps/3
        let t = 0.5 + rng.gen_range(1e-3..=0.5);
        let z = draw(&mut rng, 1e-6 * eps, 2.0 * eps / 3.0 * 0.999, i % 10 == 0);
        let h = family.at(t).grad(&z)?;
        report.c.samples += 1;
        report.c.min_norm = report.c.min_norm.min(h.norm());
        if h.norm() <= thr {
            report.c.violations += 1;
        }

        // D: t in [1/2, 1], z in U
        let t = rng.gen_range(0.5..=1.0);
        let z = draw(&mut rng, 0.0, 0.0, i % 10 == 0);
        let h = family.at(t).grad(&z)?;
        let fz = f.grad(&z)?;
        report.d.samples += 1;
        report.d.min_norm = report.d.min_norm.min(h.norm());
        if (&h - &fz).norm() > 1e-12 * (1.0 + fz.norm()) {
            report.d.violations += 1;
        }
    }
    let first = [("A", &report.a), ("B", &report.b), ("C", &report.c), ("D", &report.d)]
        .into_iter()
        .find(|(_, s)| s.violations > 0);
    if let Some((name, s)) = first {
        return Err(Error::PartitionViolation {
            region: name.chars().next().unwrap(),
            detail: format!("{} of {} samples violate the characterization", s.violations, s.samples),
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vector;

    #[test]
    fn omega_values() {
        let e = 0.3;
        assert_eq!(well_omega(0.0, e).unwrap(), -e * e / 9.0);
        assert!((well_omega(e / 3.0, e).unwrap() + e * e / 18.0).abs() < 1e-15);
        assert_eq!(well_omega(2.0 * e / 3.0, e).unwrap(), 0.0);
        assert_eq!(well_omega(0.9 * e, e).unwrap(), 0.0);
        assert!(matches!(well_omega(1.1 * e, e), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn omega_prime_shape() {
        let e = 1.0;
        assert_eq!(omega_prime(0.0, e), 0.0);
        assert_eq!(omega_prime(2.0 * e / 3.0, e), 0.0);
        for i in 1..1000 {
            let s = 2.0 * e / 3.0 * i as f64 / 1000.0;
            assert!(omega_prime(s, e) > 0.0);
        }
        // C¹ at ε/3
        let h = 1e-7;
        let left = (omega(e / 3.0, e) - omega(e / 3.0 - h, e)) / h;
        let right = (omega(e / 3.0 + h, e) - omega(e / 3.0, e)) / h;
        assert!((left - right).abs() < 1e-5);
    }

    #[test]
    fn mu_values() {
        let e = 0.6;
        for kind in [BumpKind::Cubic, BumpKind::Quintic] {
            assert_eq!(bump_mu(2.0 * e / 3.0, e, kind).unwrap(), 0.0);
            assert_eq!(bump_mu(e, e, kind).unwrap(), 1.0);
            assert!((bump_mu(5.0 * e / 6.0, e, kind).unwrap() - 0.5).abs() < 1e-15);
        }
        // the retraction never lengthens v
        for i in 0..=1000 {
            let s = e * i as f64 / 1000.0;
            for t in [0.0, 0.3, 1.0] {
                let mt = t * mu(s, e, BumpKind::Cubic).0 + 1.0 - t;
                assert!((0.0..=1.0).contains(&mt));
            }
        }
    }

    fn z2_line_tube(eps: f64) -> TubeSpec {
        TubeSpec {
            class_id: 1,
            class_label: "(Z2)".into(),
            sheets: vec![Sheet { projector: Matrix::zeros(1, 1), centers: Vec::new() }],
            rho: 0.0,
            whole: true,
            eps,
            margin: f64::INFINITY,
            halvings: 0,
        }
    }

    #[test]
    fn perturbed_line_gradient_is_omega_prime() {
        use crate::domain::DomainExpr;
        use crate::poly::Polynomial;
        let eps = 0.3;
        let f = LocalGradientMap::from_potential(Polynomial::parse("x1^2/2", 1).unwrap(), DomainExpr::FullSpace);
        let (fp, _) = perturb(&f, &z2_line_tube(eps), BumpKind::Cubic);
        let g = fp.grad(&vector(&[eps / 6.0])).unwrap();
        assert!((g[0] - eps / 6.0).abs() < 1e-15);
    }

    #[test]
    fn perturbed_max_matches_explicit_formula() {
        use crate::domain::DomainExpr;
        use crate::poly::Polynomial;
        let eps = 0.3;
        let f = LocalGradientMap::from_potential(Polynomial::parse("-x1^2/2", 1).unwrap(), DomainExpr::FullSpace);
        let (fp, _) = perturb(&f, &z2_line_tube(eps), BumpKind::Cubic);
        for i in 1..100 {
            let v = eps * i as f64 / 100.0;
            let m = mu(v, eps, BumpKind::Cubic).0;
            let want = -m * m * v * v / 2.0 + omega(v, eps);
            assert!((fp.value_grad(&vector(&[v])).unwrap().0 - want).abs() < 1e-15);
        }
    }

    #[test]
    fn decomposition_on_the_x_axis() {
        let p = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let tube = TubeSpec {
            class_id: 0,
            class_label: "(Z2)".into(),
            sheets: vec![Sheet { projector: p.clone(), centers: vec![vector(&[0.5, 0.0])] }],
            rho: 0.2,
            whole: false,
            eps: 0.5,
            margin: 1.0,
            halvings: 0,
        };
        let (x, v) = tube_decompose(&vector(&[0.5, 0.1]), &tube, &[p.clone()]).unwrap();
        assert_eq!(x.as_slice(), &[0.5, 0.0]);
        assert_eq!(v.as_slice(), &[0.0, 0.1]);
        assert!(matches!(tube_decompose(&vector(&[0.5, 0.9]), &tube, &[p]), Err(Error::Outside)));
    }

    #[test]
    fn tie_between_reflection_axes_is_ambiguous() {
        let axis = |a: f64| {
            let u = vector(&[a.cos(), a.sin()]);
            &u * u.transpose()
        };
        let ps = [axis(0.0), axis(std::f64::consts::PI / 3.0), axis(2.0 * std::f64::consts::PI / 3.0)];
        let tube = TubeSpec {
            class_id: 0,
            class_label: "(Z2)".into(),
            sheets: vec![Sheet { projector: ps[0].clone(), centers: vec![vector(&[0.3, 0.0])] }],
            rho: 0.2,
            whole: false,
            eps: 0.3,
            margin: 1.0,
            halvings: 0,
        };
        // on the bisector of the first two axes
        let b = std::f64::consts::PI / 6.0;
        let z = vector(&[0.3 * b.cos(), 0.3 * b.sin()]);
        assert!(matches!(tube_decompose(&z, &tube, &ps), Err(Error::AmbiguousProjection { .. })));
    }
}
