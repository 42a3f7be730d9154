//! Multi-start damped Newton for zeros of gradient fields.

use rayon::prelude::*;

use crate::linalg::{sym_eigenvalues, Matrix, Vector};

const FD_STEP: f64 = 1e-6;

/// Symmetrized central-difference Jacobian of a gradient field.
pub fn jacobian(field: &dyn Fn(&Vector) -> Option<Vector>, x: &Vector) -> Option<Matrix> {
    let d = x.len();
    let mut j = Matrix::zeros(d, d);
    for i in 0..d {
        let mut a = x.clone();
        let mut b = x.clone();
        a[i] += FD_STEP;
        b[i] -= FD_STEP;
        j.set_column(i, &((field(&a)? - field(&b)?) / (2.0 * FD_STEP)));
    }
    Some((&j + j.transpose()) * 0.5)
}

/// Sign of det of the Jacobian, or 0 when it is numerically singular.
pub fn morse_index(field: &dyn Fn(&Vector) -> Option<Vector>, x: &Vector) -> i8 {
    let Some(j) = jacobian(field, x) else { return 0 };
    let ev = sym_eigenvalues(&j);
    let scale = ev.iter().fold(1e-300_f64, |a, v| a.max(v.abs()));
    if ev.iter().any(|v| v.abs() <= 1e-6 * scale.max(1.0)) {
        return 0;
    }
    if ev.iter().filter(|v| **v < 0.0).count() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Levenberg–Marquardt damped Newton. Returns the polished point and its residual.
pub fn newton(
    field: &dyn Fn(&Vector) -> Option<Vector>,
    x0: &Vector,
    tol: f64,
    max_iter: usize,
) -> Option<(Vector, f64)> {
    let mut x = x0.clone();
    let mut g = field(&x)?;
    let mut r = g.norm();
    let mut lambda = 1e-6;
    let d = x.len();
    for _ in 0..max_iter {
        if r <= tol * 1e-2 {
            break;
        }
        let Some(j) = jacobian(field, &x) else { break };
        let jt = j.transpose();
        let mut improved = false;
        for _ in 0..30 {
            let a = &jt * &j + Matrix::identity(d, d) * lambda;
            let Some(step) = a.lu().solve(&(-(&jt * &g))) else {
                lambda *= 10.0;
                continue;
            };
            let xn = &x + &step;
            if let Some(gn) = field(&xn) {
                let rn = gn.norm();
                if rn < r {
                    let small = step.norm() <= tol * (1.0 + x.norm());
                    x = xn;
                    g = gn;
                    r = rn;
                    lambda = (lambda / 3.0).max(1e-12);
                    improved = true;
                    if small {
                        return Some((x, r));
                    }
                    break;
                }
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
    }
    Some((x, r))
}

/// Newton from every seed; keeps points with residual ≤ `accept` that satisfy
/// `keep`, sorted lexicographically and deduplicated at `dedupe`.
pub fn multi_start(
    field: &(dyn Fn(&Vector) -> Option<Vector> + Sync),
    seeds: &[Vector],
    tol: f64,
    accept: f64,
    dedupe: f64,
    keep: &(dyn Fn(&Vector) -> bool + Sync),
) -> (Vec<Vector>, usize) {
    let results: Vec<Option<(Vector, f64)>> = seeds.par_iter().map(|s| newton(field, s, tol, 100)).collect();
    let mut failures = 0;
    let mut pts: Vec<Vector> = Vec::new();
    for r in results {
        match r {
            Some((x, res)) if res <= accept && keep(&x) => pts.push(x),
            _ => failures += 1,
        }
    }
    pts.sort_by(|a, b| a.as_slice().partial_cmp(b.as_slice()).unwrap());
    let mut out: Vec<Vector> = Vec::new();
    for p in pts {
        if !out.iter().any(|q| (q - &p).norm() <= dedupe) {
            out.push(p);
        }
    }
    (out, failures)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vector;

    #[test]
    fn double_well_zeros_and_indices() {
        // φ = (x²−1)² + y²
        let f = |z: &Vector| Some(vector(&[4.0 * z[0] * (z[0] * z[0] - 1.0), 2.0 * z[1]]));
        let seeds: Vec<Vector> = (0..9)
            .flat_map(|i| (0..9).map(move |j| vector(&[-2.0 + 0.5 * i as f64, -2.0 + 0.5 * j as f64])))
            .collect();
        let (zs, _) = multi_start(&f, &seeds, 1e-12, 1e-9, 1e-4, &|z: &Vector| z.norm() < 3.0);
        assert_eq!(zs.len(), 3);
        let idx: Vec<i8> = zs.iter().map(|z| morse_index(&f, z)).collect();
        assert_eq!(idx, [1, -1, 1]);
        assert!((zs[0][0] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn no_zeros() {
        let f = |z: &Vector| Some(vector(&[1.0 + z[0] * z[0]]));
        let (zs, fails) = multi_start(&f, &[vector(&[0.0]), vector(&[1.0])], 1e-12, 1e-9, 1e-4, &|_: &Vector| true);
        assert!(zs.is_empty());
        assert_eq!(fails, 2);
    }

    #[test]
    fn degenerate_zero_has_index_zero() {
        let f = |z: &Vector| Some(vector(&[z[0].powi(3)]));
        assert_eq!(morse_index(&f, &vector(&[0.0])), 0);
    }
}
