//! Finite orthogonal group actions: closure, subgroup lattice, conjugacy
//! classes, normalizers, Weyl groups, fixed subspaces, isotropy and orbits.

use std::collections::{BTreeSet, HashMap};
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{max_abs, null_space, Matrix, Subspace, Vector};

/// Tolerance of the orthogonality test on construction.
pub const ORTHO_TOL: f64 = 1e-9;
/// Two transforms are the same element iff their max-norm distance is below this.
pub const IDENT_TOL: f64 = 1e-8;
/// Lower band of the isotropy test, relative to `1 + |x|`.
pub const ISO_TOL: f64 = 1e-7;
/// Upper band of the isotropy test; residuals between the bands are ambiguous.
pub const ISO_AMBIGUOUS: f64 = 1e-5;
pub const DEFAULT_CAP: usize = 64;

/// Bit set over group element indices (groups are capped at 64 elements).
pub type Mask = u64;

#[derive(Debug, Clone)]
pub struct OrthogonalTransform {
    matrix: Matrix,
}

impl OrthogonalTransform {
    /// Validates orthogonality and re-orthonormalizes through the polar factor.
    pub fn new(matrix: Matrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), got: matrix.ncols() });
        }
        let d = matrix.nrows();
        let residual = max_abs(&(matrix.transpose() * &matrix - Matrix::identity(d, d)));
        if residual > ORTHO_TOL {
            return Err(Error::NotOrthogonal { residual });
        }
        let svd = matrix.svd(true, true);
        let q = svd.u.unwrap() * svd.v_t.unwrap();
        Ok(OrthogonalTransform { matrix: q })
    }

    pub fn from_rows(d: usize, rows: &[f64]) -> Result<Self> {
        if rows.len() != d * d {
            return Err(Error::DimensionMismatch { expected: d * d, got: rows.len() });
        }
        Self::new(Matrix::from_row_slice(d, d, rows))
    }

    pub fn identity(d: usize) -> Self {
        OrthogonalTransform { matrix: Matrix::identity(d, d) }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn approx_eq(&self, other: &Matrix) -> bool {
        max_abs(&(&self.matrix - other)) <= IDENT_TOL
    }
}

pub fn rotation2(angle: f64) -> OrthogonalTransform {
    let (s, c) = angle.sin_cos();
    OrthogonalTransform { matrix: Matrix::from_row_slice(2, 2, &[c, -s, s, c]) }
}

pub fn reflection_x2() -> OrthogonalTransform {
    OrthogonalTransform { matrix: Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]) }
}

pub fn permutation_matrix(perm: &[usize]) -> OrthogonalTransform {
    let n = perm.len();
    let mut m = Matrix::zeros(n, n);
    for (i, &p) in perm.iter().enumerate() {
        m[(p, i)] = 1.0;
    }
    OrthogonalTransform { matrix: m }
}

/// A finite group of orthogonal matrices with its multiplication table.
#[derive(Debug, Clone)]
pub struct FiniteGroupRep {
    elements: Vec<OrthogonalTransform>,
    mul_table: Vec<Vec<usize>>,
    inv_table: Vec<usize>,
    generators: Vec<usize>,
    dim: usize,
    name: String,
}

/// Closes a generator set under multiplication (identity first, then BFS order).
pub fn close_group(generators: &[OrthogonalTransform], cap: usize) -> Result<FiniteGroupRep> {
    let dim = generators.first().map(|g| g.dim()).unwrap_or(0);
    FiniteGroupRep::generate(dim, generators, cap, "custom")
}

impl FiniteGroupRep {
    pub fn generate(
        dim: usize,
        generators: &[OrthogonalTransform],
        cap: usize,
        name: &str,
    ) -> Result<Self> {
        for g in generators {
            if g.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: g.dim() });
            }
        }
        let mut elements = vec![OrthogonalTransform::identity(dim)];
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for g in generators {
                let p = elements[i].matrix() * g.matrix();
                if !elements.iter().any(|e| e.approx_eq(&p)) {
                    if elements.len() >= cap {
                        return Err(Error::ClosureOverflow { cap });
                    }
                    elements.push(OrthogonalTransform { matrix: p });
                    queue.push_back(elements.len() - 1);
                }
            }
        }
        let n = elements.len();
        let find = |m: &Matrix, elements: &[OrthogonalTransform]| -> Result<usize> {
            let hits: Vec<usize> =
                (0..elements.len()).filter(|&k| elements[k].approx_eq(m)).collect();
            match hits.len() {
                1 => Ok(hits[0]),
                _ => Err(Error::ClosureOverflow { cap }),
            }
        };
        let mut mul_table = vec![vec![0usize; n]; n];
        for a in 0..n {
            for b in 0..n {
                let p = elements[a].matrix() * elements[b].matrix();
                mul_table[a][b] = find(&p, &elements)?;
            }
        }
        let inv_table: Vec<usize> =
            (0..n).map(|a| (0..n).find(|&b| mul_table[a][b] == 0).unwrap_or(0)).collect();
        let gen_idx = generators
            .iter()
            .map(|g| find(g.matrix(), &elements))
            .collect::<Result<Vec<_>>>()?;
        Ok(FiniteGroupRep { elements, mul_table, inv_table, generators: gen_idx, dim, name: name.into() })
    }

    /// Rotations by multiples of 2π/n on ℝ².
    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("cyclic(0)".into()));
        }
        Self::generate(2, &[rotation2(2.0 * PI / n as f64)], DEFAULT_CAP, &format!("cyclic({n})"))
    }

    /// Symmetries of the regular n-gon on ℝ², generated by a rotation and the
    /// reflection across the x-axis.
    pub fn dihedral(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("dihedral(0)".into()));
        }
        Self::generate(
            2,
            &[rotation2(2.0 * PI / n as f64), reflection_x2()],
            DEFAULT_CAP,
            &format!("dihedral({n})"),
        )
    }

    /// Permutation matrices of Sₙ acting on ℝⁿ.
    pub fn symmetric(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("symmetric(0)".into()));
        }
        let mut gens = Vec::new();
        if n >= 2 {
            let mut t: Vec<usize> = (0..n).collect();
            t.swap(0, 1);
            gens.push(permutation_matrix(&t));
            let c: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
            gens.push(permutation_matrix(&c));
        }
        Self::generate(n, &gens, DEFAULT_CAP, &format!("symmetric({n})"))
    }

    /// {±I} on ℝᵈ.
    pub fn antipodal(d: usize) -> Result<Self> {
        let m = -Matrix::identity(d, d);
        Self::generate(d, &[OrthogonalTransform { matrix: m }], DEFAULT_CAP, &format!("antipodal({d})"))
    }

    pub fn trivial(d: usize) -> Self {
        Self::generate(d, &[], DEFAULT_CAP, &format!("trivial({d})")).expect("trivial group")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn element(&self, i: usize) -> &OrthogonalTransform {
        &self.elements[i]
    }

    pub fn matrix(&self, i: usize) -> &Matrix {
        self.elements[i].matrix()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul_table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv_table[a]
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn mul_table(&self) -> &[Vec<usize>] {
        &self.mul_table
    }

    pub fn act(&self, g: usize, x: &Vector) -> Vector {
        self.elements[g].matrix() * x
    }

    pub fn element_order(&self, g: usize) -> usize {
        let mut k = 1;
        let mut cur = g;
        while cur != 0 {
            cur = self.mul(cur, g);
            k += 1;
        }
        k
    }

    pub fn full_mask(&self) -> Mask {
        if self.order() == 64 {
            u64::MAX
        } else {
            (1u64 << self.order()) - 1
        }
    }

    /// Smallest subgroup containing `mask`.
    pub fn closure(&self, mask: Mask) -> Mask {
        let mut cur = mask | 1;
        loop {
            let mut next = cur;
            for a in members(cur) {
                for b in members(cur) {
                    next |= 1u64 << self.mul(a, b);
                }
            }
            if next == cur {
                return cur;
            }
            cur = next;
        }
    }

    pub fn conjugate_mask(&self, g: usize, mask: Mask) -> Mask {
        let gi = self.inv(g);
        members(mask).fold(0, |acc, h| acc | 1u64 << self.mul(self.mul(g, h), gi))
    }

    /// Elements fixing `x` under the two-band tolerance.
    pub fn isotropy_mask(&self, x: &Vector) -> Result<Mask> {
        let scale = 1.0 + x.norm();
        let mut mask = 0u64;
        for g in 0..self.order() {
            let r = (self.act(g, x) - x).norm();
            if r <= ISO_TOL * scale {
                mask |= 1u64 << g;
            } else if r < ISO_AMBIGUOUS * scale {
                return Err(Error::IsotropyAmbiguous { residual: r });
            }
        }
        Ok(mask)
    }

    /// Orbit of `x`, deduplicated; its size times the isotropy order equals |G|.
    pub fn orbit(&self, x: &Vector) -> Result<Vec<Vector>> {
        let iso = self.isotropy_mask(x)?;
        let tol = IDENT_TOL * (1.0 + x.norm());
        let mut pts: Vec<Vector> = Vec::new();
        for g in 0..self.order() {
            let y = self.act(g, x);
            if !pts.iter().any(|p| (p - &y).amax() <= tol) {
                pts.push(y);
            }
        }
        let expected = self.order() / iso.count_ones() as usize;
        assert_eq!(pts.len(), expected, "orbit-stabilizer count mismatch");
        Ok(pts)
    }
}

pub fn members(mask: Mask) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| mask >> i & 1 == 1)
}

#[derive(Debug, Clone)]
pub struct SubgroupRecord {
    pub mask: Mask,
    pub member_indices: Vec<usize>,
    pub order: usize,
    pub normalizer_indices: Vec<usize>,
    pub weyl_coset_reps: Vec<usize>,
    pub fixed: Subspace,
    pub class_id: usize,
}

impl SubgroupRecord {
    pub fn weyl_order(&self) -> usize {
        self.weyl_coset_reps.len()
    }
}

#[derive(Debug, Clone)]
pub struct ConjugacyClass {
    pub id: usize,
    pub name: String,
    pub order: usize,
    /// Indices into the subgroup list, sorted.
    pub members: Vec<usize>,
    /// The member with lexicographically smallest element list.
    pub representative: usize,
}

/// All subgroups grouped into conjugacy classes, with the subconjugacy order.
#[derive(Debug, Clone)]
pub struct SubgroupLattice {
    pub subgroups: Vec<SubgroupRecord>,
    pub classes: Vec<ConjugacyClass>,
    /// `leq[a][b]` iff class `a` is subconjugate to class `b`.
    pub leq: Vec<Vec<bool>>,
    index: HashMap<Mask, usize>,
}

pub fn fixed_subspace(g: &FiniteGroupRep, mask: Mask) -> Subspace {
    let d = g.dim();
    let elems: Vec<usize> = members(mask).collect();
    let mut stacked = Matrix::zeros(elems.len() * d, d);
    for (k, &e) in elems.iter().enumerate() {
        let block = g.matrix(e) - Matrix::identity(d, d);
        stacked.view_mut((k * d, 0), (d, d)).copy_from(&block);
    }
    null_space(&stacked, 1e-9)
}

pub fn subgroup_lattice(g: &FiniteGroupRep) -> SubgroupLattice {
    let n = g.order();
    let cyclic: BTreeSet<Mask> = (0..n).map(|e| g.closure(1u64 << e)).collect();
    let mut all: BTreeSet<Mask> = cyclic.clone();
    let mut frontier: Vec<Mask> = cyclic.iter().copied().collect();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &a in &frontier {
            for &c in &cyclic {
                if a & c == c {
                    continue;
                }
                let j = g.closure(a | c);
                if all.insert(j) {
                    next.push(j);
                }
            }
        }
        frontier = next;
    }
    let masks: Vec<Mask> = all.into_iter().collect();

    // conjugacy classes
    let mut class_of: HashMap<Mask, usize> = HashMap::new();
    let mut raw_classes: Vec<Vec<Mask>> = Vec::new();
    for &m in &masks {
        if class_of.contains_key(&m) {
            continue;
        }
        let conj: BTreeSet<Mask> = (0..n).map(|x| g.conjugate_mask(x, m)).collect();
        let id = raw_classes.len();
        for &c in &conj {
            class_of.insert(c, id);
        }
        raw_classes.push(conj.into_iter().collect());
    }
    let member_list = |m: Mask| -> Vec<usize> { members(m).collect() };
    // sort classes by (order, representative element list)
    let mut keyed: Vec<(usize, Vec<usize>, Vec<Mask>)> = raw_classes
        .into_iter()
        .map(|cl| {
            let rep = cl.iter().map(|&m| member_list(m)).min().unwrap();
            (rep.len(), rep, cl)
        })
        .collect();
    keyed.sort();

    // subgroup records, ordered by class then member list
    let mut subgroups = Vec::new();
    let mut index = HashMap::new();
    let mut classes = Vec::new();
    for (cid, (order, rep_list, cl)) in keyed.iter().enumerate() {
        let mut sorted: Vec<Mask> = cl.clone();
        sorted.sort_by_key(|&m| member_list(m));
        let mut member_ids = Vec::new();
        let mut representative = 0;
        for m in sorted {
            let normalizer: Vec<usize> = (0..n).filter(|&x| g.conjugate_mask(x, m) == m).collect();
            let mut covered = 0u64;
            let mut reps = Vec::new();
            for &x in &normalizer {
                if covered >> x & 1 == 1 {
                    continue;
                }
                reps.push(x);
                for h in members(m) {
                    covered |= 1u64 << g.mul(x, h);
                }
            }
            let rec = SubgroupRecord {
                mask: m,
                member_indices: member_list(m),
                order: *order,
                normalizer_indices: normalizer,
                weyl_coset_reps: reps,
                fixed: fixed_subspace(g, m),
                class_id: cid,
            };
            if &rec.member_indices == rep_list {
                representative = subgroups.len();
            }
            index.insert(m, subgroups.len());
            member_ids.push(subgroups.len());
            subgroups.push(rec);
        }
        classes.push(ConjugacyClass {
            id: cid,
            name: String::new(),
            order: *order,
            members: member_ids,
            representative,
        });
    }

    let nc = classes.len();
    let mut leq = vec![vec![false; nc]; nc];
    for a in 0..nc {
        for b in 0..nc {
            let kb = subgroups[classes[b].representative].mask;
            leq[a][b] = classes[a].members.iter().any(|&s| subgroups[s].mask & kb == subgroups[s].mask);
        }
    }

    let names = class_names(g, &subgroups, &classes);
    for (c, name) in classes.iter_mut().zip(names) {
        c.name = name;
    }
    SubgroupLattice { subgroups, classes, leq, index }
}

fn class_names(g: &FiniteGroupRep, subgroups: &[SubgroupRecord], classes: &[ConjugacyClass]) -> Vec<String> {
    let base: Vec<String> = classes
        .iter()
        .map(|c| {
            let h = &subgroups[c.representative];
            let n = h.order;
            if n == 1 {
                return "e".to_string();
            }
            let orders: Vec<usize> = h.member_indices.iter().map(|&e| g.element_order(e)).collect();
            if orders.contains(&n) {
                return format!("Z{n}");
            }
            if n % 2 == 0 {
                let half = n / 2;
                // dihedral: a cyclic subgroup of index two, all other elements involutions
                let rot: Vec<usize> = h
                    .member_indices
                    .iter()
                    .copied()
                    .filter(|&e| half % g.element_order(e) == 0)
                    .collect();
                let has_cyclic_half = orders.contains(&half) || half == 1;
                let others_involutions = h
                    .member_indices
                    .iter()
                    .filter(|e| !rot.contains(e))
                    .all(|&e| g.element_order(e) == 2);
                if has_cyclic_half && rot.len() == half && others_involutions {
                    return format!("D{half}");
                }
            }
            format!("G{n}")
        })
        .collect();
    let mut out = base.clone();
    for (i, name) in base.iter().enumerate() {
        let same: Vec<usize> = (0..base.len()).filter(|&j| &base[j] == name).collect();
        if same.len() > 1 {
            let k = same.iter().position(|&j| j == i).unwrap();
            out[i] = format!("{name}{}", (b'a' + k as u8) as char);
        }
    }
    out
}

impl SubgroupLattice {
    pub fn class(&self, id: usize) -> &ConjugacyClass {
        &self.classes[id]
    }

    pub fn representative(&self, class_id: usize) -> &SubgroupRecord {
        &self.subgroups[self.classes[class_id].representative]
    }

    pub fn by_mask(&self, mask: Mask) -> Option<&SubgroupRecord> {
        self.index.get(&mask).map(|&i| &self.subgroups[i])
    }

    pub fn label(&self, class_id: usize) -> String {
        format!("({})", self.classes[class_id].name)
    }

    /// Distinct fixed subspaces of the subgroups conjugate to the class representative.
    pub fn conjugate_subspaces(&self, class_id: usize) -> Vec<Subspace> {
        let mut out: Vec<Subspace> = Vec::new();
        for &s in &self.classes[class_id].members {
            let f = &self.subgroups[s].fixed;
            if !out.iter().any(|o| o.same_as(f, 1e-9)) {
                out.push(f.clone());
            }
        }
        out
    }

    /// Subgroups strictly containing `mask`.
    pub fn strict_supergroups(&self, mask: Mask) -> impl Iterator<Item = &SubgroupRecord> {
        self.subgroups.iter().filter(move |s| s.mask != mask && s.mask & mask == mask)
    }

    /// Isotropy subgroup of `x`, matched to an enumerated subgroup.
    pub fn isotropy(&self, g: &FiniteGroupRep, x: &Vector) -> Result<&SubgroupRecord> {
        let mask = g.isotropy_mask(x)?;
        self.by_mask(mask).ok_or(Error::IsotropyAmbiguous { residual: f64::NAN })
    }
}

/// Serializable description of a finite group action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupSpec {
    Cyclic { n: usize },
    Dihedral { n: usize },
    Symmetric { n: usize },
    Antipodal { dim: usize },
    Trivial { dim: usize },
    /// Generator matrices in row-major order.
    Generators { dim: usize, matrices: Vec<Vec<f64>> },
}

impl GroupSpec {
    pub fn build(&self) -> Result<FiniteGroupRep> {
        match self {
            GroupSpec::Cyclic { n } => FiniteGroupRep::cyclic(*n),
            GroupSpec::Dihedral { n } => FiniteGroupRep::dihedral(*n),
            GroupSpec::Symmetric { n } => FiniteGroupRep::symmetric(*n),
            GroupSpec::Antipodal { dim } => FiniteGroupRep::antipodal(*dim),
            GroupSpec::Trivial { dim } => Ok(FiniteGroupRep::trivial(*dim)),
            GroupSpec::Generators { dim, matrices } => {
                let gens = matrices
                    .iter()
                    .map(|m| {
                        if m.len() != dim * dim {
                            return Err(Error::DimensionMismatch { expected: dim * dim, got: m.len() });
                        }
                        OrthogonalTransform::from_rows(*dim, m)
                    })
                    .collect::<Result<Vec<_>>>()?;
                FiniteGroupRep::generate(*dim, &gens, DEFAULT_CAP, "custom")
            }
        }
    }
}

/// S¹ acting on ℂ^k ⊕ ℝ^m with the given rotation speeds. Only a single
/// weight with no trivial summand is evaluated numerically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleRep {
    pub weights: Vec<i64>,
    pub trivial_dim: usize,
}

impl CircleRep {
    pub fn new(weights: Vec<i64>, trivial_dim: usize) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|&w| w == 0) {
            return Err(Error::UnsupportedRep("weights must be nonzero and nonempty".into()));
        }
        Ok(CircleRep { weights, trivial_dim })
    }

    /// Isotropy of a nonzero point in the single-weight representation.
    pub fn generic_isotropy_order(&self) -> Result<u64> {
        match (self.weights.as_slice(), self.trivial_dim) {
            ([k], 0) => Ok(k.unsigned_abs()),
            _ => Err(Error::UnsupportedRep(format!("{:?} + R^{}", self.weights, self.trivial_dim))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vector;

    /// Brute-force subgroup count: every subset closed under the table.
    fn brute_subgroups(g: &FiniteGroupRep) -> Vec<Mask> {
        let n = g.order();
        assert!(n <= 12);
        (0u64..1 << n)
            .filter(|&m| m & 1 == 1)
            .filter(|&m| members(m).all(|a| members(m).all(|b| m >> g.mul(a, b) & 1 == 1)))
            .collect()
    }

    #[test]
    fn antipodal_line_has_order_two() {
        let g = FiniteGroupRep::antipodal(1).unwrap();
        assert_eq!(g.order(), 2);
        assert_eq!(g.inv(1), 1);
    }

    #[test]
    fn d3_by_closure() {
        let g = close_group(&[rotation2(2.0 * PI / 3.0), reflection_x2()], 64).unwrap();
        assert_eq!(g.order(), 6);
        assert_eq!(brute_subgroups(&g).len(), 6);
    }

    #[test]
    fn closure_overflow() {
        let err = close_group(&[rotation2(2.0 * PI / 3.0)], 2).unwrap_err();
        assert_eq!(err, Error::ClosureOverflow { cap: 2 });
    }

    #[test]
    fn not_orthogonal_rejected() {
        let m = Matrix::from_row_slice(2, 2, &[1.0, 1e-6, 0.0, 1.0]);
        assert!(matches!(OrthogonalTransform::new(m), Err(Error::NotOrthogonal { .. })));
    }

    #[test]
    fn lattice_z2_and_d3() {
        let z2 = FiniteGroupRep::antipodal(1).unwrap();
        let l = subgroup_lattice(&z2);
        assert_eq!(l.classes.len(), 2);
        assert!(l.leq[0][1] && !l.leq[1][0]);

        let d3 = FiniteGroupRep::dihedral(3).unwrap();
        let l = subgroup_lattice(&d3);
        assert_eq!(l.subgroups.len(), brute_subgroups(&d3).len());
        let names: Vec<&str> = l.classes.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["e", "Z2", "Z3", "D3"]);
        assert_eq!(l.classes[1].members.len(), 3);
    }

    #[test]
    fn s3_perm_matches_d3_lattice() {
        let s3 = FiniteGroupRep::symmetric(3).unwrap();
        assert_eq!(s3.order(), 6);
        let l = subgroup_lattice(&s3);
        let orders: Vec<usize> = l.classes.iter().map(|c| c.order).collect();
        assert_eq!(orders, [1, 2, 3, 6]);
        assert_eq!(l.classes[1].members.len(), 3);
        let full = l.representative(3);
        assert_eq!(full.fixed.dim(), 1);
        let s = 1.0 / 3f64.sqrt();
        for i in 0..3 {
            assert!((full.fixed.basis[(i, 0)] - s).abs() < 1e-12);
        }
    }

    #[test]
    fn weyl_groups() {
        let d3 = FiniteGroupRep::dihedral(3).unwrap();
        let l = subgroup_lattice(&d3);
        for s in &l.subgroups {
            assert_eq!(s.weyl_coset_reps.len() * s.order, s.normalizer_indices.len());
        }
        // reflection subgroups are self-normalizing, the trivial group has W = D3
        assert_eq!(l.representative(1).weyl_order(), 1);
        assert_eq!(l.representative(0).weyl_order(), 6);
        assert_eq!(l.representative(2).weyl_order(), 2);
    }

    #[test]
    fn fixed_subspace_of_reflection_is_x_axis() {
        let d3 = FiniteGroupRep::dihedral(3).unwrap();
        let l = subgroup_lattice(&d3);
        let refl = l
            .subgroups
            .iter()
            .find(|s| s.order == 2 && (s.fixed.basis[(1, 0)]).abs() < 1e-12)
            .expect("x-axis reflection");
        assert!((refl.fixed.basis[(0, 0)] - 1.0).abs() < 1e-12);
        let triv = l.representative(0);
        assert!(max_abs(&(&triv.fixed.basis - Matrix::identity(2, 2))) < 1e-12);
    }

    #[test]
    fn isotropy_examples() {
        let s3 = FiniteGroupRep::symmetric(3).unwrap();
        let l = subgroup_lattice(&s3);
        assert_eq!(l.isotropy(&s3, &vector(&[1.0, 1.0, 1.0])).unwrap().order, 6);
        let h = l.isotropy(&s3, &vector(&[1.0, 1.0, 0.0])).unwrap();
        assert_eq!(h.order, 2);
        // the non-identity element swaps the first two coordinates
        let t = h.member_indices[1];
        let y = s3.act(t, &vector(&[1.0, 2.0, 3.0]));
        assert_eq!(y.as_slice(), &[2.0, 1.0, 3.0]);

        let d3 = FiniteGroupRep::dihedral(3).unwrap();
        let l = subgroup_lattice(&d3);
        assert!(matches!(
            l.isotropy(&d3, &vector(&[1.0, 1e-6])),
            Err(Error::IsotropyAmbiguous { .. })
        ));
    }

    #[test]
    fn orbits() {
        let z2 = FiniteGroupRep::antipodal(1).unwrap();
        let o = z2.orbit(&vector(&[1.0])).unwrap();
        assert_eq!(o.len(), 2);
        let d3 = FiniteGroupRep::dihedral(3).unwrap();
        assert_eq!(d3.orbit(&vector(&[1.0, 0.0])).unwrap().len(), 3);
        assert_eq!(d3.orbit(&vector(&[0.0, 0.0])).unwrap().len(), 1);
        assert_eq!(d3.orbit(&vector(&[0.3, 0.7])).unwrap().len(), 6);
    }

    #[test]
    fn conjugates_stay_in_class() {
        let g = FiniteGroupRep::dihedral(4).unwrap();
        let l = subgroup_lattice(&g);
        for s in &l.subgroups {
            for x in 0..g.order() {
                let c = g.conjugate_mask(x, s.mask);
                assert_eq!(l.by_mask(c).unwrap().class_id, s.class_id);
            }
        }
    }

    #[test]
    fn fixed_dims_monotone() {
        let g = FiniteGroupRep::symmetric(3).unwrap();
        let l = subgroup_lattice(&g);
        for a in 0..l.classes.len() {
            for b in 0..l.classes.len() {
                if l.leq[a][b] {
                    assert!(l.representative(b).fixed.dim() <= l.representative(a).fixed.dim());
                }
            }
        }
    }

    #[test]
    fn multiplication_table_is_associative() {
        use rand::{Rng, SeedableRng};
        let g = FiniteGroupRep::symmetric(4).unwrap();
        assert_eq!(g.order(), 24);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let (a, b, c) = (rng.gen_range(0..24), rng.gen_range(0..24), rng.gen_range(0..24));
            assert_eq!(g.mul(g.mul(a, b), c), g.mul(a, g.mul(b, c)));
        }
    }
}
