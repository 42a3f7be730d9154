//! Orbit types present in a domain and grid charts of their strata.

use std::collections::VecDeque;

use crate::domain::DomainExpr;
use crate::error::{Error, Result};
use crate::group::{FiniteGroupRep, SubgroupLattice, SubgroupRecord};
use crate::linalg::{null_space, Matrix, Subspace, Vector};
use crate::numerics::Numerics;

/// Iso(Ω) in maximal-first order.
#[derive(Debug, Clone)]
pub struct OrbitTypeLattice {
    /// Class ids, ordered by decreasing subgroup order then class id.
    pub classes: Vec<usize>,
    pub witnesses: Vec<Vector>,
    pub dims: Vec<usize>,
    pub warnings: Vec<String>,
}

impl OrbitTypeLattice {
    pub fn position(&self, class_id: usize) -> Option<usize> {
        self.classes.iter().position(|&c| c == class_id)
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

/// Strict supergroup fixed spaces inside `V^H`, expressed in the coordinates of `basis`.
fn walls_in(lattice: &SubgroupLattice, h: &SubgroupRecord) -> Vec<Subspace> {
    let b = &h.fixed.basis;
    let mut out: Vec<Subspace> = Vec::new();
    for k in lattice.strict_supergroups(h.mask) {
        let w = Subspace::from_basis(b.transpose() * &k.fixed.basis);
        if !out.iter().any(|o| o.same_as(&w, 1e-9)) {
            out.push(w);
        }
    }
    out
}

fn wall_distance(walls: &[Subspace], y: &Vector) -> f64 {
    walls.iter().map(|w| w.distance(y)).fold(f64::INFINITY, f64::min)
}

pub fn iso_types(
    g: &FiniteGroupRep,
    lattice: &SubgroupLattice,
    omega: &DomainExpr,
    num: &Numerics,
) -> Result<OrbitTypeLattice> {
    let mut found: Vec<(usize, Vector, usize)> = Vec::new();
    let mut warnings = Vec::new();
    for class in &lattice.classes {
        let rep = lattice.representative(class.id);
        let k = rep.fixed.dim();
        if k == 0 {
            // only the origin, whose isotropy is all of G
            let origin = Vector::zeros(g.dim());
            if rep.order == g.order() && omega.contains(&origin) {
                found.push((class.id, origin, 0));
            }
            continue;
        }
        let walls = walls_in(lattice, rep);
        if walls.iter().any(|w| w.dim() == k) {
            // V^H coincides with the fixed space of a larger group: H is never an isotropy group
            continue;
        }
        match scan_witness(g, rep, &walls, omega, num) {
            Some(x) => found.push((class.id, x, k)),
            None => warnings.push(format!(
                "{}",
                Error::NoWitness { class: lattice.label(class.id) }
            )),
        }
    }
    found.sort_by_key(|(c, _, _)| (std::cmp::Reverse(lattice.class(*c).order), *c));
    Ok(OrbitTypeLattice {
        classes: found.iter().map(|f| f.0).collect(),
        witnesses: found.iter().map(|f| f.1.clone()).collect(),
        dims: found.iter().map(|f| f.2).collect(),
        warnings,
    })
}

/// Grid scan over `V^H`, slightly offset so grid points avoid the walls.
fn scan_witness(
    g: &FiniteGroupRep,
    rep: &SubgroupRecord,
    walls: &[Subspace],
    omega: &DomainExpr,
    num: &Numerics,
) -> Option<Vector> {
    let k = rep.fixed.dim();
    let n = cells_per_axis(k, num);
    let step = 2.0 * num.bbox / n as f64;
    let offsets = [0.371, 0.613, 0.227];
    let total = n.pow(k as u32);
    for flat in 0..total {
        let idx = unflatten(flat, n, k);
        let y = Vector::from_fn(k, |i, _| -num.bbox + (idx[i] as f64 + offsets[i % 3]) * step);
        if y.norm() >= num.bbox || wall_distance(walls, &y) < 1e-6 {
            continue;
        }
        let z = rep.fixed.embed(&y);
        if !omega.contains(&z) {
            continue;
        }
        if let Ok(mask) = g.isotropy_mask(&z) {
            if mask == rep.mask {
                return Some(z);
            }
        }
    }
    None
}

fn cells_per_axis(k: usize, num: &Numerics) -> usize {
    let cap = match k {
        1 => 400,
        2 => 160,
        _ => 64,
    };
    ((2.0 * num.bbox / num.grid_h).ceil() as usize).clamp(4, cap)
}

fn unflatten(mut flat: usize, n: usize, k: usize) -> Vec<usize> {
    let mut idx = vec![0; k];
    for i in (0..k).rev() {
        idx[i] = flat % n;
        flat /= n;
    }
    idx
}

fn flatten(idx: &[usize], n: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * n + i)
}

#[derive(Debug, Clone)]
pub struct Component {
    /// Lexicographically smallest marked grid point.
    pub label: Vec<f64>,
    pub sign: Vec<i8>,
    pub cells: usize,
    /// A marked point far from the component boundary.
    pub interior: Vector,
}

#[derive(Debug, Clone)]
pub struct Quotient {
    pub name: String,
    pub representative: usize,
    pub members: Vec<usize>,
    pub stabilizer: usize,
}

/// Grid chart of Ω_H for a class representative H with dim V^H ≥ 1.
#[derive(Debug, Clone)]
pub struct Stratum {
    pub class_id: usize,
    pub label: String,
    pub basis: Matrix,
    pub conjugates: Vec<Subspace>,
    pub walls: Vec<Subspace>,
    pub hyperplanes: Vec<Vector>,
    pub h: f64,
    pub n: usize,
    pub bbox: f64,
    grid: Vec<i32>,
    pub components: Vec<Component>,
    /// Weyl coset representatives and their action on stratum coordinates.
    pub weyl: Vec<(usize, Matrix)>,
    pub weyl_perm: Vec<Vec<usize>>,
    pub component_quotient: Vec<usize>,
    pub stabilizer_orders: Vec<usize>,
    pub quotients: Vec<Quotient>,
}

struct GridChart {
    n: usize,
    h: f64,
    grid: Vec<i32>,
    components: Vec<Component>,
}

pub fn build_stratum(
    g: &FiniteGroupRep,
    lattice: &SubgroupLattice,
    omega: &DomainExpr,
    class_id: usize,
    num: &Numerics,
) -> Result<Stratum> {
    let rep = lattice.representative(class_id);
    let k = rep.fixed.dim();
    assert!(k >= 1, "zero-dimensional strata have no chart");
    let basis = rep.fixed.basis.clone();
    let walls = walls_in(lattice, rep);
    let hyperplanes: Vec<Vector> = walls
        .iter()
        .filter(|w| w.dim() + 1 == k)
        .map(|w| {
            let ns = null_space(&w.basis.transpose(), 1e-9);
            let n = ns.basis.column(0).into_owned();
            // deterministic orientation: first nonzero coordinate positive
            let s = n.iter().find(|v| v.abs() > 1e-9).map(|v| v.signum()).unwrap_or(1.0);
            n * s
        })
        .collect();

    let n = cells_per_axis(k, num);
    let chart = flood(&basis, &walls, &hyperplanes, omega, num.bbox, n);
    if num.refine_check {
        let fine = flood(&basis, &walls, &hyperplanes, omega, num.bbox, 2 * n);
        if fine.components.len() != chart.components.len() {
            return Err(Error::ResolutionTooCoarse {
                class: lattice.label(class_id),
                coarse: chart.components.len(),
                fine: fine.components.len(),
            });
        }
    }

    let weyl: Vec<(usize, Matrix)> = rep
        .weyl_coset_reps
        .iter()
        .map(|&w| (w, basis.transpose() * g.matrix(w) * &basis))
        .collect();
    let mut st = Stratum {
        class_id,
        label: lattice.label(class_id),
        basis,
        conjugates: lattice.conjugate_subspaces(class_id),
        walls,
        hyperplanes,
        h: chart.h,
        n: chart.n,
        bbox: num.bbox,
        grid: chart.grid,
        components: chart.components,
        weyl,
        weyl_perm: Vec::new(),
        component_quotient: Vec::new(),
        stabilizer_orders: Vec::new(),
        quotients: Vec::new(),
    };
    st.weyl_perm = st
        .weyl
        .iter()
        .map(|(_, a)| {
            st.components
                .iter()
                .map(|c| st.component_of(&(a * &c.interior)).ok_or_else(|| Error::NotInStratum { class: st.label.clone() }))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    st.build_quotients();
    Ok(st)
}

fn flood(
    basis: &Matrix,
    walls: &[Subspace],
    hyperplanes: &[Vector],
    omega: &DomainExpr,
    bbox: f64,
    n: usize,
) -> GridChart {
    let k = basis.ncols();
    let h = 2.0 * bbox / n as f64;
    let total = n.pow(k as u32);
    let center = |idx: &[usize]| Vector::from_fn(k, |i, _| -bbox + (idx[i] as f64 + 0.5) * h);
    let mut marked = vec![false; total];
    let mut depth = vec![0.0; total];
    let mut y = Vector::zeros(k);
    let mut z = Vector::zeros(basis.nrows());
    for flat in 0..total {
        let mut f = flat;
        for i in (0..k).rev() {
            y[i] = -bbox + ((f % n) as f64 + 0.5) * h;
            f /= n;
        }
        if y.norm() >= bbox {
            continue;
        }
        let wd = wall_distance(walls, &y);
        if wd <= h {
            continue;
        }
        z.gemv(1.0, basis, &y, 0.0);
        let om = omega.margin(&z);
        if om > 0.0 {
            marked[flat] = true;
            depth[flat] = wd.min(om).min(bbox - y.norm());
        }
    }
    let mut grid = vec![-1i32; total];
    let mut components = Vec::new();
    for start in 0..total {
        if !marked[start] || grid[start] >= 0 {
            continue;
        }
        let id = components.len() as i32;
        let mut queue = VecDeque::from([start]);
        grid[start] = id;
        let mut cells = 0;
        let mut best = start;
        while let Some(c) = queue.pop_front() {
            cells += 1;
            if depth[c] > depth[best] {
                best = c;
            }
            let idx = unflatten(c, n, k);
            for axis in 0..k {
                for delta in [-1i64, 1] {
                    let j = idx[axis] as i64 + delta;
                    if j < 0 || j >= n as i64 {
                        continue;
                    }
                    let mut nb = idx.clone();
                    nb[axis] = j as usize;
                    let f = flatten(&nb, n);
                    if marked[f] && grid[f] < 0 {
                        grid[f] = id;
                        queue.push_back(f);
                    }
                }
            }
        }
        let label_pt = center(&unflatten(start, n, k));
        components.push(Component {
            label: label_pt.iter().copied().collect(),
            sign: sign_vector(hyperplanes, &label_pt),
            cells,
            interior: center(&unflatten(best, n, k)),
        });
    }
    GridChart { n, h, grid, components }
}

fn sign_vector(hyperplanes: &[Vector], y: &Vector) -> Vec<i8> {
    hyperplanes.iter().map(|n| if n.dot(y) >= 0.0 { 1 } else { -1 }).collect()
}

impl Stratum {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn weyl_order(&self) -> usize {
        self.weyl.len()
    }

    pub fn to_ambient(&self, y: &Vector) -> Vector {
        &self.basis * y
    }

    pub fn to_coords(&self, z: &Vector) -> Vector {
        self.basis.transpose() * z
    }

    pub fn wall_distance(&self, y: &Vector) -> f64 {
        wall_distance(&self.walls, y)
    }

    fn cell_of(&self, y: &Vector) -> Option<Vec<i64>> {
        let idx: Vec<i64> = y.iter().map(|v| ((v + self.bbox) / self.h).floor() as i64).collect();
        Some(idx)
    }

    /// Component of a stratum point: by the sign vector when it is unique,
    /// else by the nearest marked cell with that sign vector.
    pub fn component_of(&self, y: &Vector) -> Option<usize> {
        let sign = sign_vector(&self.hyperplanes, y);
        let mut same = self.components.iter().enumerate().filter(|(_, c)| c.sign == sign);
        let first = same.next()?;
        if same.next().is_none() {
            return Some(first.0);
        }
        let k = self.dim();
        let base = self.cell_of(y)?;
        let mut best: Option<(f64, usize)> = None;
        let reach = 3i64;
        let span = (2 * reach + 1) as usize;
        for flat in 0..span.pow(k as u32) {
            let off = unflatten(flat, span, k);
            let idx: Vec<i64> = base.iter().zip(&off).map(|(b, o)| b + *o as i64 - reach).collect();
            if idx.iter().any(|&i| i < 0 || i >= self.n as i64) {
                continue;
            }
            let f = flatten(&idx.iter().map(|&i| i as usize).collect::<Vec<_>>(), self.n);
            let c = self.grid[f];
            if c < 0 || self.components[c as usize].sign != sign {
                continue;
            }
            let center = Vector::from_fn(k, |i, _| -self.bbox + (idx[i] as f64 + 0.5) * self.h);
            let d = (&center - y).norm();
            if best.map_or(true, |(bd, _)| d < bd) {
                best = Some((d, c as usize));
            }
        }
        best.map(|b| b.1)
    }

    /// (component, quotient) indices of a point given in stratum coordinates.
    pub fn locate(&self, y: &Vector) -> Result<(usize, usize)> {
        let not_in = || Error::NotInStratum { class: self.label.clone() };
        if self.wall_distance(y) <= 1e-9 * (1.0 + y.norm()) || y.norm() >= self.bbox {
            return Err(not_in());
        }
        let c = self.component_of(y).ok_or_else(not_in)?;
        Ok((c, self.component_quotient[c]))
    }

    fn build_quotients(&mut self) {
        let nc = self.components.len();
        let mut assigned = vec![usize::MAX; nc];
        let mut raw: Vec<Vec<usize>> = Vec::new();
        for c in 0..nc {
            if assigned[c] != usize::MAX {
                continue;
            }
            let mut orbit: Vec<usize> = self.weyl_perm.iter().map(|p| p[c]).collect();
            orbit.push(c);
            orbit.sort();
            orbit.dedup();
            for &m in &orbit {
                assigned[m] = raw.len();
            }
            raw.push(orbit);
        }
        let lex = |a: &usize, b: &usize| {
            self.components[*a].label.partial_cmp(&self.components[*b].label).unwrap()
        };
        let mut quotients: Vec<(usize, Vec<usize>)> = raw
            .into_iter()
            .map(|orbit| (*orbit.iter().min_by(|a, b| lex(a, b)).unwrap(), orbit))
            .collect();
        quotients.sort_by(|a, b| lex(&a.0, &b.0));
        self.stabilizer_orders =
            (0..nc).map(|c| self.weyl_perm.iter().filter(|p| p[c] == c).count()).collect();
        self.component_quotient = vec![0; nc];
        self.quotients = quotients
            .into_iter()
            .enumerate()
            .map(|(j, (rep, members))| {
                for &m in &members {
                    self.component_quotient[m] = j;
                }
                Quotient { name: format!("q{j}"), representative: rep, stabilizer: self.stabilizer_orders[rep], members }
            })
            .collect();
    }

    pub fn quotient_name(&self, q: usize) -> &str {
        &self.quotients[q].name
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::subgroup_lattice;
    use crate::linalg::vector;

    fn setup(g: &FiniteGroupRep, omega: &DomainExpr) -> (SubgroupLattice, OrbitTypeLattice) {
        let l = subgroup_lattice(g);
        let o = iso_types(g, &l, omega, &Numerics::default()).unwrap();
        (l, o)
    }

    #[test]
    fn d3_punctured_plane() {
        let g = FiniteGroupRep::dihedral(3).unwrap();
        let omega = DomainExpr::PuncturedSpace;
        let (l, o) = setup(&g, &omega);
        let names: Vec<String> = o.classes.iter().map(|&c| l.label(c)).collect();
        assert_eq!(names, ["(Z2)", "(e)"]);

        let num = Numerics::default();
        let refl = build_stratum(&g, &l, &omega, o.classes[0], &num).unwrap();
        assert_eq!(refl.components.len(), 2);
        assert_eq!(refl.quotients.len(), 2);

        let free = build_stratum(&g, &l, &omega, o.classes[1], &num).unwrap();
        assert_eq!(free.components.len(), 6);
        assert_eq!(free.quotients.len(), 1);
        assert!(free.stabilizer_orders.iter().all(|&s| s == 1));
        assert!(matches!(free.locate(&vector(&[1.0, 0.0])), Err(Error::NotInStratum { .. })));
    }

    #[test]
    fn z2_line_and_plane() {
        let g = FiniteGroupRep::antipodal(1).unwrap();
        let (l, o) = setup(&g, &DomainExpr::FullSpace);
        assert_eq!(o.classes.len(), 2);
        assert_eq!(o.dims, [0, 1]);
        let st = build_stratum(&g, &l, &DomainExpr::FullSpace, o.classes[1], &Numerics::default()).unwrap();
        let (ca, qa) = st.locate(&vector(&[-0.5])).unwrap();
        let (cb, qb) = st.locate(&vector(&[0.5])).unwrap();
        assert_ne!(ca, cb);
        assert_eq!(qa, qb);

        let g2 = FiniteGroupRep::antipodal(2).unwrap();
        let (l2, o2) = setup(&g2, &DomainExpr::FullSpace);
        let st = build_stratum(&g2, &l2, &DomainExpr::FullSpace, o2.classes[1], &Numerics::default()).unwrap();
        assert_eq!(st.components.len(), 1);
        assert_eq!(st.stabilizer_orders, [2]);
        assert_eq!(st.quotients.len(), 1);
    }

    #[test]
    fn empty_domain_has_no_types() {
        let g = FiniteGroupRep::dihedral(3).unwrap();
        let (_, o) = setup(&g, &DomainExpr::Ball { r: 0.0 });
        assert!(o.is_empty());
    }

    #[test]
    fn orbit_size_times_stabilizer_is_weyl_order() {
        let g = FiniteGroupRep::symmetric(3).unwrap();
        let omega = DomainExpr::FullSpace;
        let (l, o) = setup(&g, &omega);
        let names: Vec<String> = o.classes.iter().map(|&c| l.label(c)).collect();
        assert_eq!(names, ["(D3)", "(Z2)", "(e)"]);
        for &c in &o.classes {
            let st = build_stratum(&g, &l, &omega, c, &Numerics::default()).unwrap();
            for q in &st.quotients {
                assert_eq!(q.members.len() * q.stabilizer, st.weyl_order());
            }
        }
    }

    #[test]
    fn weyl_action_composes() {
        let g = FiniteGroupRep::dihedral(4).unwrap();
        let omega = DomainExpr::FullSpace;
        let (l, o) = setup(&g, &omega);
        let free = *o.classes.last().unwrap();
        let st = build_stratum(&g, &l, &omega, free, &Numerics::default()).unwrap();
        assert_eq!(st.components.len(), 8);
        let rep = l.representative(free);
        let idx_of = |e: usize| st.weyl.iter().position(|(w, _)| *w == e).unwrap();
        for a in 0..st.weyl.len() {
            for b in 0..st.weyl.len() {
                let ab = g.mul(st.weyl[a].0, st.weyl[b].0);
                // trivial H: cosets are single elements
                assert_eq!(rep.order, 1);
                let pab = &st.weyl_perm[idx_of(ab)];
                for c in 0..st.components.len() {
                    assert_eq!(pab[c], st.weyl_perm[a][st.weyl_perm[b][c]]);
                }
            }
        }
    }
}
