//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// |a − b| without allocating.
pub fn dist(a: &Vector, b: &Vector) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn vector(xs: &[f64]) -> Vector {
    Vector::from_column_slice(xs)
}

/// A linear subspace of the ambient space, stored by an orthonormal basis and
/// its orthogonal projector.
#[derive(Debug, Clone)]
pub struct Subspace {
    pub basis: Matrix,
    pub projector: Matrix,
}

impl Subspace {
    pub fn from_basis(basis: Matrix) -> Self {
        let projector = &basis * basis.transpose();
        Subspace { basis, projector }
    }

    pub fn zero(dim: usize) -> Self {
        Subspace { basis: Matrix::zeros(dim, 0), projector: Matrix::zeros(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn project(&self, z: &Vector) -> Vector {
        &self.projector * z
    }

    pub fn distance(&self, z: &Vector) -> f64 {
        let n = z.len();
        let mut s = 0.0;
        for i in 0..n {
            let mut r = z[i];
            for j in 0..n {
                r -= self.projector[(i, j)] * z[j];
            }
            s += r * r;
        }
        s.sqrt()
    }

    /// Coordinates of `z` in the stored basis.
    pub fn coords(&self, z: &Vector) -> Vector {
        self.basis.transpose() * z
    }

    pub fn embed(&self, y: &Vector) -> Vector {
        &self.basis * y
    }

    pub fn same_as(&self, other: &Subspace, tol: f64) -> bool {
        self.dim() == other.dim() && max_abs(&(&self.projector - &other.projector)) <= tol
    }
}

/// Canonical orthonormal basis of the range of a projector: Gram-Schmidt on
/// the projected standard basis vectors, in order.
pub fn canonical_basis(projector: &Matrix, rank: usize) -> Matrix {
    let d = projector.nrows();
    let mut cols: Vec<Vector> = Vec::with_capacity(rank);
    for i in 0..d {
        if cols.len() == rank {
            break;
        }
        let mut w = projector.column(i).into_owned();
        for c in &cols {
            let dot = c.dot(&w);
            w -= c * dot;
        }
        // second pass for stability
        for c in &cols {
            let dot = c.dot(&w);
            w -= c * dot;
        }
        let n = w.norm();
        if n > 1e-6 {
            cols.push(w / n);
        }
    }
    if cols.is_empty() {
        Matrix::zeros(d, 0)
    } else {
        Matrix::from_columns(&cols)
    }
}

/// Null space of a stacked matrix via SVD with an absolute singular-value cutoff.
pub fn null_space(stacked: &Matrix, cutoff: f64) -> Subspace {
    let d = stacked.ncols();
    if stacked.nrows() == 0 {
        return Subspace::from_basis(Matrix::identity(d, d));
    }
    let svd = stacked.clone().svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let mut projector = Matrix::zeros(d, d);
    let mut rank = 0;
    // rows of v_t beyond the number of singular values span part of the kernel too
    let nsv = svd.singular_values.len();
    for r in 0..v_t.nrows() {
        let s = if r < nsv { svd.singular_values[r] } else { 0.0 };
        if s <= cutoff {
            let row = v_t.row(r).transpose();
            projector += &row * row.transpose();
            rank += 1;
        }
    }
    if v_t.nrows() < d {
        // thin SVD of a wide system: complete the kernel from the complement
        let mut range = Matrix::zeros(d, d);
        for r in 0..v_t.nrows() {
            let row = v_t.row(r).transpose();
            range += &row * row.transpose();
        }
        let comp = Matrix::identity(d, d) - range;
        let extra = d - v_t.nrows();
        projector += &comp;
        rank += extra;
    }
    let basis = canonical_basis(&projector, rank);
    Subspace::from_basis(basis)
}

/// Symmetric eigenvalues (ascending).
pub fn sym_eigenvalues(m: &Matrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals
}

pub fn to_vec(v: &Vector) -> Vec<f64> {
    v.iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_reflection() {
        // reflection across the x-axis: kernel of (R - I) is the x-axis
        let r = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let ns = null_space(&(r - Matrix::identity(2, 2)), 1e-9);
        assert_eq!(ns.dim(), 1);
        assert!((ns.basis[(0, 0)] - 1.0).abs() < 1e-12);
        assert!(ns.basis[(1, 0)].abs() < 1e-12);
    }

    #[test]
    fn canonical_basis_of_diagonal() {
        let p = Matrix::from_element(3, 3, 1.0 / 3.0);
        let b = canonical_basis(&p, 1);
        let s = 1.0 / 3f64.sqrt();
        for i in 0..3 {
            assert!((b[(i, 0)] - s).abs() < 1e-12);
        }
    }
}
