//! Small dense linear algebra on rank-2 tensors, real and jet valued.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::jet::Jet;
use crate::tensor::Tensor;

fn to_matrix(t: &Tensor<f64>) -> DMatrix<f64> {
    let n = t.n();
    DMatrix::from_fn(n, n, |i, j| t[[i, j]])
}

/// Inverse by full-pivot LU, `None` if singular.
pub fn inverse(t: &Tensor<f64>) -> Option<Tensor<f64>> {
    let n = t.n();
    let inv = to_matrix(t).full_piv_lu().try_inverse()?;
    Some(Tensor::fn2(n, |i, j| inv[(i, j)]))
}

pub fn determinant(t: &Tensor<f64>) -> f64 {
    to_matrix(t).full_piv_lu().determinant()
}

/// Eigenvalues of the symmetric part, ascending.
pub fn symmetric_eigenvalues(t: &Tensor<f64>) -> Vec<f64> {
    let m = to_matrix(t);
    let sym = (&m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// 2-norm condition number of a symmetric matrix.
pub fn symmetric_condition(t: &Tensor<f64>) -> f64 {
    let ev = symmetric_eigenvalues(t);
    let max = ev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min = ev.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn matmul_jet(a: &Tensor<Jet>, b: &Tensor<Jet>) -> Tensor<Jet> {
    let n = a.n();
    Tensor::fn2(n, |i, j| {
        let mut s = Jet::zero(a[[0, 0]].layout());
        for k in 0..n {
            s.add_mul(1.0, &a[[i, k]], &b[[k, j]]);
        }
        s
    })
}

/// Inverse of a jet matrix given the inverse of its value.
///
/// With `g = g0 + D` and `X = g0^{-1}`, the inverse is `Σ (-X D)^k X`, and the
/// series terminates because `D` has no constant term.
pub fn inverse_jet(g: &Tensor<Jet>, inv0: &Tensor<f64>) -> Tensor<Jet> {
    let n = g.n();
    let layout = g[[0, 0]].layout().clone();
    let (vx, vy) = g.data().iter().fold((i32::MAX, i32::MAX), |(a, b), j| {
        let (p, q) = j.valid_orders();
        (a.min(p), b.min(q))
    });
    let x = Tensor::fn2(n, |i, j| Jet::constant(&layout, inv0[[i, j]]));
    let d = g.map(|j| j.add_scalar(-j.val()));
    let p = matmul_jet(&x, &d).map(|j| -j);
    let mut term = x.clone();
    let mut acc = x;
    let steps = (vx.max(0) + vy.max(0)) as usize;
    for _ in 0..steps {
        term = matmul_jet(&p, &term);
        acc = Tensor::fn2(n, |i, j| &acc[[i, j]] + &term[[i, j]]);
    }
    Tensor::fn2(n, |i, j| (&acc[[i, j]] + &acc[[j, i]]).scale(0.5))
}

/// Determinant of a jet matrix by permutation expansion (n <= 4).
pub fn determinant_jet(g: &Tensor<Jet>) -> Jet {
    let n = g.n();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = Jet::zero(g[[0, 0]].layout());
    permutations(&mut perm, 0, &mut |p| {
        let sign = permutation_sign(p);
        let mut prod = g[[0, p[0]]].clone();
        for (i, &pi) in p.iter().enumerate().skip(1) {
            prod = &prod * &g[[i, pi]];
        }
        total.add_assign(&prod.scale(sign));
    });
    total
}

fn permutations(p: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permutations(p, k + 1, f);
        p.swap(k, i);
    }
}

fn permutation_sign(p: &[usize]) -> f64 {
    let mut inversions = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}
