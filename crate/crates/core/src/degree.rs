//! Brouwer degree from boundary data in dimensions 1 to 3.
//!
//! A region is given by a 1-Lipschitz margin function (positive inside). It is
//! covered by an adaptive tree of cells: cells that cannot contain a zero of
//! the field are dropped near the boundary, cells that might are refined.
//! The degree is the sign sum (1-D), the winding number (2-D) or the
//! normalized solid angle (3-D) of the field over the faces separating kept
//! leaves from everything else, accumulated per component label.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::{FRAC_PI_4, PI};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::Vector;

const MAX_EDGE_DEPTH: u32 = 40;
/// Cells may contain a zero when min|g| ≤ SAFETY·L·diam.
const SAFETY: f64 = 4.0;
/// Same test for cells well inside the region. These only steer the Newton
/// seeds, the degree never depends on them.
const INTERIOR_SAFETY: f64 = 2.0;

type Key = (u8, [i64; 3]);

#[derive(Debug, Clone, Copy, PartialEq)]
enum Node {
    Kept(usize),
    Dropped,
    Internal,
}

/// Inputs of a region computation.
pub struct Region<'a> {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Edge length of root cells (the box is split into whole root cells).
    pub root: f64,
    pub s_min: f64,
    pub margin: &'a (dyn Fn(&Vector) -> f64 + Sync),
    pub field: &'a (dyn Fn(&Vector) -> Option<Vector> + Sync),
    pub label: &'a (dyn Fn(&Vector) -> Option<usize> + Sync),
}

#[derive(Debug, Clone)]
pub struct Candidate {
    pub center: Vector,
    pub size: f64,
    pub min_norm: f64,
}

#[derive(Debug, Clone, Default)]
pub struct RegionResult {
    pub degrees: BTreeMap<usize, i64>,
    /// Finest cells that may hold a zero.
    pub candidates: Vec<Candidate>,
    /// Smallest |field| seen on boundary faces.
    pub boundary_min: f64,
    pub leaves: usize,
}

struct Cell {
    level: u8,
    idx: [i64; 3],
}

struct Classified {
    inside: Option<bool>, // Some(true) full, Some(false) empty, None mixed
    may_zero: bool,
    min_norm: f64,
}

impl Region<'_> {
    fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Root cells per axis; unused axes count 1.
    fn counts(&self) -> [i64; 3] {
        let mut n = [1; 3];
        for (i, v) in n.iter_mut().enumerate().take(self.dim()) {
            *v = ((self.hi[i] - self.lo[i]) / self.root).round().max(1.0) as i64;
        }
        n
    }

    /// Cell edge lengths at a level; unused axes are 0.
    fn sizes(&self, level: u8) -> [f64; 3] {
        let n = self.counts();
        let mut s = [0.0; 3];
        for (i, v) in s.iter_mut().enumerate().take(self.dim()) {
            *v = (self.hi[i] - self.lo[i]) / n[i] as f64 / (1u64 << level) as f64;
        }
        s
    }

    fn corner(&self, level: u8, idx: &[i64; 3]) -> Vector {
        let s = self.sizes(level);
        Vector::from_fn(self.dim(), |i, _| self.lo[i] + idx[i] as f64 * s[i])
    }

    fn center(&self, c: &Cell) -> Vector {
        let s = self.sizes(c.level);
        Vector::from_fn(self.dim(), |i, _| self.lo[i] + (c.idx[i] as f64 + 0.5) * s[i])
    }

    fn samples(&self, c: &Cell) -> Vec<Vector> {
        let d = self.dim();
        let s = self.sizes(c.level);
        let base = self.corner(c.level, &c.idx);
        let mut pts: Vec<Vector> = (0..1usize << d)
            .map(|m| Vector::from_fn(d, |i, _| base[i] + if m >> i & 1 == 1 { s[i] } else { 0.0 }))
            .collect();
        pts.push(self.center(c));
        pts
    }

    fn classify(&self, c: &Cell) -> Classified {
        let s = self.sizes(c.level);
        let diam = s.iter().map(|v| v * v).sum::<f64>().sqrt();
        let center = self.center(c);
        let m = (self.margin)(&center);
        let inside = if m > 0.5 * diam {
            Some(true)
        } else if m < -0.5 * diam {
            Some(false)
        } else {
            None
        };
        if inside == Some(false) {
            return Classified { inside, may_zero: false, min_norm: f64::INFINITY };
        }
        let pts = self.samples(c);
        let vals: Vec<(Vector, Vector)> = pts
            .into_iter()
            .filter(|p| inside == Some(true) || (self.margin)(p) > 0.0)
            .filter_map(|p| (self.field)(&p).map(|g| (p, g)))
            .collect();
        let min_norm = vals.iter().map(|(_, g)| g.norm()).fold(f64::INFINITY, f64::min);
        let mut lip: f64 = 0.0;
        for a in 0..vals.len() {
            for b in a + 1..vals.len() {
                let dx = (&vals[a].0 - &vals[b].0).norm();
                if dx > 0.0 {
                    lip = lip.max((&vals[a].1 - &vals[b].1).norm() / dx);
                }
            }
        }
        let safety = if inside == Some(true) { INTERIOR_SAFETY } else { SAFETY };
        let may_zero = vals.len() < 2 || min_norm <= safety * lip * diam;
        Classified { inside, may_zero, min_norm }
    }

    /// Adaptive cover of the region; returns the leaf table.
    fn cover(&self) -> Result<(HashMap<Key, Node>, Vec<(Cell, usize, bool, f64)>)> {
        let d = self.dim();
        if d == 0 || d > 3 {
            return Err(Error::DimensionUnsupported { dim: d });
        }
        let n = self.counts();
        let root_size = self.sizes(0)[..d].iter().cloned().fold(f64::INFINITY, f64::min);
        let mut max_level = 0u8;
        while root_size / (1u64 << max_level) as f64 > self.s_min && max_level < 40 {
            max_level += 1;
        }
        let mut level_cells: Vec<Cell> = Vec::new();
        let total: i64 = n.iter().product();
        for flat in 0..total {
            let mut idx = [0i64; 3];
            let mut f = flat;
            for i in (0..d).rev() {
                idx[i] = f % n[i];
                f /= n[i];
            }
            level_cells.push(Cell { level: 0, idx });
        }
        let mut table: HashMap<Key, Node> = HashMap::new();
        let mut kept: Vec<(Cell, usize, bool, f64)> = Vec::new();
        let mut total_cells = 0usize;
        while !level_cells.is_empty() {
            total_cells += level_cells.len();
            if total_cells > 20_000_000 {
                return Err(Error::RefinementOverflow("region cover exceeded 2e7 cells".into()));
            }
            let classes: Vec<Classified> = level_cells.par_iter().map(|c| self.classify(c)).collect();
            let mut next = Vec::new();
            for (c, cl) in level_cells.into_iter().zip(classes) {
                let key = (c.level, c.idx);
                let at_bottom = c.level >= max_level;
                if cl.inside == Some(false) {
                    table.insert(key, Node::Dropped);
                } else if !cl.may_zero {
                    if cl.inside == Some(true) {
                        table.insert(key, Node::Kept(usize::MAX));
                        kept.push((c, 0, false, cl.min_norm));
                    } else {
                        // zero-free sliver of the boundary: leaving it out keeps the degree
                        table.insert(key, Node::Dropped);
                    }
                } else if !at_bottom {
                    table.insert(key, Node::Internal);
                    for m in 0..1usize << d {
                        let mut idx = [0i64; 3];
                        for i in 0..d {
                            idx[i] = 2 * c.idx[i] + (m >> i & 1) as i64;
                        }
                        next.push(Cell { level: c.level + 1, idx });
                    }
                } else if cl.inside == Some(true) {
                    table.insert(key, Node::Kept(usize::MAX));
                    kept.push((c, 0, true, cl.min_norm));
                } else {
                    // a finest cell straddling the boundary: a zero here sits on
                    // the boundary itself (e.g. on a stratum wall) and is not ours
                    table.insert(key, Node::Dropped);
                }
            }
            level_cells = next;
        }
        // labels
        let labels: Vec<Option<usize>> = kept
            .par_iter()
            .map(|(c, _, may_zero, _)| {
                let ctr = self.center(c);
                (self.label)(&ctr).or_else(|| {
                    if *may_zero {
                        self.samples(c).iter().find_map(|p| if (self.margin)(p) > 0.0 { (self.label)(p) } else { None })
                    } else {
                        None
                    }
                })
            })
            .collect();
        let mut out = Vec::with_capacity(kept.len());
        for ((c, _, may_zero, mn), lab) in kept.into_iter().zip(labels) {
            match lab {
                Some(l) => {
                    table.insert((c.level, c.idx), Node::Kept(l));
                    out.push((c, l, may_zero, mn));
                }
                None if !may_zero => {
                    table.insert((c.level, c.idx), Node::Dropped);
                }
                None => {
                    return Err(Error::DegenerateUnresolved(format!(
                        "cell near {:?} may hold a zero but lies in no component",
                        self.center(&c).as_slice()
                    )))
                }
            }
        }
        Ok((table, out))
    }

    fn lookup(&self, table: &HashMap<Key, Node>, level: u8, idx: [i64; 3]) -> Node {
        let d = self.dim();
        let n = self.counts();
        let mut lv = level;
        let mut id = idx;
        loop {
            for i in 0..d {
                let lim = n[i] << lv;
                if id[i] < 0 || id[i] >= lim {
                    return Node::Dropped;
                }
            }
            if let Some(&node) = table.get(&(lv, id)) {
                return node;
            }
            if lv == 0 {
                return Node::Dropped;
            }
            lv -= 1;
            for i in 0..d {
                id[i] = id[i].div_euclid(2);
            }
        }
    }

    /// Boundary pieces of one face of a kept leaf, as (level, idx) of the
    /// finest cell on our side whose face is boundary.
    fn boundary_faces(
        &self,
        table: &HashMap<Key, Node>,
        label: usize,
        level: u8,
        idx: [i64; 3],
        axis: usize,
        dir: i64,
        out: &mut Vec<(u8, [i64; 3])>,
    ) {
        let mut nb = idx;
        nb[axis] += dir;
        match self.lookup(table, level, nb) {
            Node::Kept(l) if l == label => {}
            Node::Kept(_) | Node::Dropped => out.push((level, idx)),
            Node::Internal => {
                // only reachable when the neighbour at this exact level is split
                let d = self.dim();
                for m in 0..1usize << d {
                    if (m >> axis & 1) as i64 != if dir > 0 { 1 } else { 0 } {
                        continue;
                    }
                    let mut child = [0i64; 3];
                    for i in 0..d {
                        child[i] = 2 * idx[i] + (m >> i & 1) as i64;
                    }
                    self.boundary_faces(table, label, level + 1, child, axis, dir, out);
                }
            }
        }
    }

    pub fn degrees(&self) -> Result<RegionResult> {
        let (table, kept) = self.cover()?;
        let d = self.dim();
        let contributions: Vec<Result<(usize, f64, f64)>> = kept
            .par_iter()
            .map(|(c, label, _, _)| {
                let mut acc = 0.0;
                let mut min_norm = f64::INFINITY;
                for axis in 0..d {
                    for dir in [-1i64, 1] {
                        let mut faces = Vec::new();
                        self.boundary_faces(&table, *label, c.level, c.idx, axis, dir, &mut faces);
                        for (lv, id) in faces {
                            let (v, mn) = self.face_integral(lv, &id, axis, dir)?;
                            acc += v;
                            min_norm = min_norm.min(mn);
                        }
                    }
                }
                Ok((*label, acc, min_norm))
            })
            .collect();
        let mut sums: BTreeMap<usize, f64> = BTreeMap::new();
        let mut boundary_min = f64::INFINITY;
        for c in contributions {
            let (l, v, mn) = c?;
            *sums.entry(l).or_insert(0.0) += v;
            boundary_min = boundary_min.min(mn);
        }
        let norm = match d {
            1 => 1.0,
            2 => 2.0 * PI,
            _ => 4.0 * PI,
        };
        let mut degrees = BTreeMap::new();
        for (l, s) in sums {
            let x = s / norm;
            let r = x.round();
            if (x - r).abs() > 0.2 {
                return Err(Error::RefinementOverflow(format!("non-integer boundary degree {x:.4} for label {l}")));
            }
            degrees.insert(l, r as i64);
        }
        let candidates = kept
            .iter()
            .filter(|(_, _, may_zero, _)| *may_zero)
            .map(|(c, _, _, mn)| Candidate {
                center: self.center(c),
                size: self.sizes(c.level).iter().cloned().fold(0.0, f64::max),
                min_norm: *mn,
            })
            .collect();
        Ok(RegionResult { degrees, candidates, boundary_min, leaves: kept.len() })
    }

    /// Contribution of one outward face of the cell (level, idx).
    fn face_integral(&self, level: u8, idx: &[i64; 3], axis: usize, dir: i64) -> Result<(f64, f64)> {
        let d = self.dim();
        let s = self.sizes(level);
        let mut base = self.corner(level, idx);
        if dir > 0 {
            base[axis] += s[axis];
        }
        let field = |p: &Vector| -> Result<Vector> {
            (self.field)(p).ok_or_else(|| Error::DegenerateUnresolved(format!("boundary point {:?} outside the domain", p.as_slice())))
        };
        match d {
            1 => {
                let g = field(&base)?;
                let m = g[0].abs();
                if m == 0.0 {
                    return Err(Error::MarginTooSmall { margin: 0.0 });
                }
                Ok((dir as f64 * g[0].signum() * 0.5, m))
            }
            2 => {
                // counter-clockwise traversal of the cell boundary
                let other = 1 - axis;
                let mut a = base.clone();
                let mut b = base.clone();
                b[other] += s[other];
                // for +x and -y faces the positive direction along the other axis is CCW
                let ccw_forward = (axis == 0 && dir > 0) || (axis == 1 && dir < 0);
                if !ccw_forward {
                    std::mem::swap(&mut a, &mut b);
                }
                edge_angle(&field, &a, &b)
            }
            _ => {
                let b_ax = (axis + 1) % 3;
                let c_ax = (axis + 2) % 3;
                let p0 = base.clone();
                let mut p1 = base.clone();
                p1[b_ax] += s[b_ax];
                let mut p2 = p1.clone();
                p2[c_ax] += s[c_ax];
                let mut p3 = base.clone();
                p3[c_ax] += s[c_ax];
                let (t1, t2) = if dir > 0 { ((&p0, &p1, &p2), (&p0, &p2, &p3)) } else { ((&p0, &p2, &p1), (&p0, &p3, &p2)) };
                let (a1, m1) = triangle_solid_angle(&field, t1.0, t1.1, t1.2)?;
                let (a2, m2) = triangle_solid_angle(&field, t2.0, t2.1, t2.2)?;
                Ok((a1 + a2, m1.min(m2)))
            }
        }
    }
}

/// Change of arg(g) along the segment a→b, refined until steps are below π/4.
pub fn edge_angle(field: &dyn Fn(&Vector) -> Result<Vector>, a: &Vector, b: &Vector) -> Result<(f64, f64)> {
    let ga = field(a)?;
    let gb = field(b)?;
    let mut min_norm = ga.norm().min(gb.norm());
    let total = edge_rec(field, a, b, &ga, &gb, 0, &mut min_norm)?;
    Ok((total, min_norm))
}

fn angle_between(ga: &Vector, gb: &Vector) -> f64 {
    let cross = ga[0] * gb[1] - ga[1] * gb[0];
    let dot = ga[0] * gb[0] + ga[1] * gb[1];
    cross.atan2(dot)
}

fn edge_rec(
    field: &dyn Fn(&Vector) -> Result<Vector>,
    a: &Vector,
    b: &Vector,
    ga: &Vector,
    gb: &Vector,
    depth: u32,
    min_norm: &mut f64,
) -> Result<f64> {
    if ga.norm() == 0.0 || gb.norm() == 0.0 {
        return Err(Error::MarginTooSmall { margin: 0.0 });
    }
    let da = angle_between(ga, gb);
    if da.abs() < FRAC_PI_4 && depth >= 1 {
        return Ok(da);
    }
    if depth >= MAX_EDGE_DEPTH {
        return Err(Error::RefinementOverflow("edge subdivision".into()));
    }
    let m = (a + b) * 0.5;
    let gm = field(&m)?;
    *min_norm = min_norm.min(gm.norm());
    Ok(edge_rec(field, a, &m, ga, &gm, depth + 1, min_norm)? + edge_rec(field, &m, b, &gm, gb, depth + 1, min_norm)?)
}

/// Oriented solid angle of the spherical triangle spanned by unit vectors.
fn solid_angle(a: &Vector, b: &Vector, c: &Vector) -> f64 {
    let num = a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0]);
    let den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    2.0 * num.atan2(den)
}

/// Solid angle swept by the normalized field over a flat triangle, with
/// midpoint subdivision until the image triangle is small.
pub fn triangle_solid_angle(
    field: &dyn Fn(&Vector) -> Result<Vector>,
    a: &Vector,
    b: &Vector,
    c: &Vector,
) -> Result<(f64, f64)> {
    let ga = field(a)?;
    let gb = field(b)?;
    let gc = field(c)?;
    let mut min_norm = ga.norm().min(gb.norm()).min(gc.norm());
    let v = tri_rec(field, [a, b, c], [&ga, &gb, &gc], 0, &mut min_norm)?;
    Ok((v, min_norm))
}

fn tri_rec(
    field: &dyn Fn(&Vector) -> Result<Vector>,
    p: [&Vector; 3],
    g: [&Vector; 3],
    depth: u32,
    min_norm: &mut f64,
) -> Result<f64> {
    if g.iter().any(|v| v.norm() == 0.0) {
        return Err(Error::MarginTooSmall { margin: 0.0 });
    }
    let u: Vec<Vector> = g.iter().map(|v| v.normalize()).collect();
    let max_angle = [(0, 1), (1, 2), (2, 0)]
        .iter()
        .map(|&(i, j)| u[i].dot(&u[j]).clamp(-1.0, 1.0).acos())
        .fold(0.0, f64::max);
    if max_angle < PI / 8.0 {
        return Ok(solid_angle(&u[0], &u[1], &u[2]));
    }
    if depth >= 24 {
        return Err(Error::RefinementOverflow("triangle subdivision".into()));
    }
    let m01 = (p[0] + p[1]) * 0.5;
    let m12 = (p[1] + p[2]) * 0.5;
    let m20 = (p[2] + p[0]) * 0.5;
    let g01 = field(&m01)?;
    let g12 = field(&m12)?;
    let g20 = field(&m20)?;
    *min_norm = min_norm.min(g01.norm()).min(g12.norm()).min(g20.norm());
    Ok(tri_rec(field, [p[0], &m01, &m20], [g[0], &g01, &g20], depth + 1, min_norm)?
        + tri_rec(field, [&m01, p[1], &m12], [&g01, g[1], &g12], depth + 1, min_norm)?
        + tri_rec(field, [&m20, &m12, p[2]], [&g20, &g12, g[2]], depth + 1, min_norm)?
        + tri_rec(field, [&m01, &m12, &m20], [&g01, &g12, &g20], depth + 1, min_norm)?)
}

/// Degree of a field on an axis-aligned box from its values on the boundary.
pub fn kronecker_degree(field: &dyn Fn(&Vector) -> Vector, lo: &[f64], hi: &[f64]) -> Result<i64> {
    let d = lo.len();
    if d == 0 || d > 3 {
        return Err(Error::DimensionUnsupported { dim: d });
    }
    let f = |p: &Vector| -> Result<Vector> { Ok(field(p)) };
    let corner = |m: usize| Vector::from_fn(d, |i, _| if m >> i & 1 == 1 { hi[i] } else { lo[i] });
    let total = match d {
        1 => {
            let (a, b) = (field(&corner(0))[0], field(&corner(1))[0]);
            if a == 0.0 || b == 0.0 {
                return Err(Error::MarginTooSmall { margin: 0.0 });
            }
            (b.signum() - a.signum()) / 2.0
        }
        2 => {
            let ring = [corner(0), corner(1), corner(3), corner(2)];
            let mut s = 0.0;
            for k in 0..4 {
                s += edge_angle(&f, &ring[k], &ring[(k + 1) % 4])?.0;
            }
            s / (2.0 * PI)
        }
        _ => {
            let mut s = 0.0;
            for axis in 0..3 {
                for dir in [-1.0, 1.0] {
                    let b_ax = (axis + 1) % 3;
                    let c_ax = (axis + 2) % 3;
                    let mut p0 = corner(0);
                    if dir > 0.0 {
                        p0[axis] = hi[axis];
                    }
                    let mut p1 = p0.clone();
                    p1[b_ax] = hi[b_ax];
                    let mut p2 = p1.clone();
                    p2[c_ax] = hi[c_ax];
                    let mut p3 = p0.clone();
                    p3[c_ax] = hi[c_ax];
                    let (t1, t2) = if dir > 0.0 { ((&p0, &p1, &p2), (&p0, &p2, &p3)) } else { ((&p0, &p2, &p1), (&p0, &p3, &p2)) };
                    s += triangle_solid_angle(&f, t1.0, t1.1, t1.2)?.0;
                    s += triangle_solid_angle(&f, t2.0, t2.1, t2.2)?.0;
                }
            }
            s / (4.0 * PI)
        }
    };
    let r = total.round();
    if (total - r).abs() > 0.2 {
        return Err(Error::RefinementOverflow(format!("boundary degree {total:.4} is not near an integer")));
    }
    Ok(r as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vector;

    #[test]
    fn identity_and_antipodal() {
        for d in 1..=3 {
            let lo = vec![-1.0; d];
            let hi = vec![1.0; d];
            assert_eq!(kronecker_degree(&|x: &Vector| x.clone(), &lo, &hi).unwrap(), 1);
            let sign = if d % 2 == 0 { 1 } else { -1 };
            assert_eq!(kronecker_degree(&|x: &Vector| -x.clone(), &lo, &hi).unwrap(), sign);
        }
    }

    #[test]
    fn saddle_and_winding_two() {
        let saddle = |x: &Vector| vector(&[2.0 * x[0], -2.0 * x[1]]);
        assert_eq!(kronecker_degree(&saddle, &[-1.0, -1.0], &[1.0, 1.0]).unwrap(), -1);
        // z ↦ z² has degree 2
        let sq = |x: &Vector| vector(&[x[0] * x[0] - x[1] * x[1], 2.0 * x[0] * x[1]]);
        assert_eq!(kronecker_degree(&sq, &[-1.0, -1.0], &[1.0, 1.0]).unwrap(), 2);
    }

    #[test]
    fn zero_on_boundary_is_an_error() {
        let f = |x: &Vector| vector(&[x[0] - 1.0]);
        assert!(matches!(kronecker_degree(&f, &[-1.0], &[1.0]), Err(Error::MarginTooSmall { .. })));
    }

    fn ball_region<'a>(
        d: usize,
        margin: &'a (dyn Fn(&Vector) -> f64 + Sync),
        field: &'a (dyn Fn(&Vector) -> Option<Vector> + Sync),
        label: &'a (dyn Fn(&Vector) -> Option<usize> + Sync),
    ) -> Region<'a> {
        Region { lo: vec![-2.0; d], hi: vec![2.0; d], root: 0.25, s_min: 0.01, margin, field, label }
    }

    #[test]
    fn region_degree_of_double_well_in_plane() {
        // φ = (x²+y²)²/4 − (x²+y²)/2 has a max at 0 and a circle of minima
        let field = |z: &Vector| {
            let r2 = z.norm_squared();
            Some(z * (r2 - 1.0))
        };
        let margin = |z: &Vector| 1.9 - z.norm();
        let label = |_: &Vector| Some(0);
        let res = ball_region(2, &margin, &field, &label).degrees().unwrap();
        assert_eq!(res.degrees[&0], 1);
        assert!(!res.candidates.is_empty());
    }

    #[test]
    fn region_degrees_per_label() {
        // two half-lines of ℝ∖{0}; field x on each, so degree +1 only where the zero... none here
        let field = |z: &Vector| Some(vector(&[z[0] * z[0] - 1.0]));
        let margin = |z: &Vector| (1.9 - z[0].abs()).min(z[0].abs() - 0.1);
        let label = |z: &Vector| Some(if z[0] > 0.0 { 1 } else { 0 });
        let res = ball_region(1, &margin, &field, &label).degrees().unwrap();
        // x²−1 crosses upward at +1 and downward at −1
        assert_eq!(res.degrees[&1], 1);
        assert_eq!(res.degrees[&0], -1);
    }

    #[test]
    fn region_degree_3d_antipodal_shell() {
        let field = |z: &Vector| Some(-z.clone());
        let margin = |z: &Vector| 1.5 - z.norm();
        let label = |_: &Vector| Some(0);
        let res = ball_region(3, &margin, &field, &label).degrees().unwrap();
        assert_eq!(res.degrees[&0], -1);
        // annulus region without the zero: degree 0
        let margin2 = |z: &Vector| (1.5 - z.norm()).min(z.norm() - 0.5);
        let res = ball_region(3, &margin2, &field, &label).degrees().unwrap();
        assert_eq!(res.degrees.get(&0).copied().unwrap_or(0), 0);
    }
}
