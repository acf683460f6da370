//! Dense square tensors stored row-major, all indices ranging over `0..n`.

use std::ops::{Index, IndexMut};

use crate::error::JetError;
use crate::jet::Jet;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    n: usize,
    rank: usize,
    data: Vec<T>,
}

impl<T> Tensor<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn shape(&self) -> Vec<usize> {
        vec![self.n; self.rank]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn from_vec(n: usize, rank: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), n.pow(rank as u32), "tensor data length");
        Tensor { n, rank, data }
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank);
        idx.iter().fold(0, |acc, &i| {
            debug_assert!(i < self.n);
            acc * self.n + i
        })
    }

    pub fn get(&self, idx: &[usize]) -> &T {
        &self.data[self.offset(idx)]
    }

    pub fn get_mut(&mut self, idx: &[usize]) -> &mut T {
        let o = self.offset(idx);
        &mut self.data[o]
    }

    /// Builds a tensor by calling `f` on every index tuple in row-major order.
    pub fn from_fn(n: usize, rank: usize, mut f: impl FnMut(&[usize]) -> T) -> Self {
        let total = n.pow(rank as u32);
        let mut data = Vec::with_capacity(total);
        let mut idx = vec![0usize; rank];
        for _ in 0..total {
            data.push(f(&idx));
            for slot in (0..rank).rev() {
                idx[slot] += 1;
                if idx[slot] < n {
                    break;
                }
                idx[slot] = 0;
            }
        }
        Tensor { n, rank, data }
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Tensor<U> {
        Tensor { n: self.n, rank: self.rank, data: self.data.iter().map(f).collect() }
    }

    pub fn try_map<U, E>(&self, f: impl FnMut(&T) -> Result<U, E>) -> Result<Tensor<U>, E> {
        Ok(Tensor { n: self.n, rank: self.rank, data: self.data.iter().map(f).collect::<Result<_, _>>()? })
    }
}

impl<T: Clone> Tensor<T> {
    pub fn filled(n: usize, rank: usize, v: T) -> Self {
        Tensor { n, rank, data: vec![v; n.pow(rank as u32)] }
    }

    pub fn fn1(n: usize, mut f: impl FnMut(usize) -> T) -> Self {
        Tensor::from_fn(n, 1, |i| f(i[0]))
    }

    pub fn fn2(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        Tensor::from_fn(n, 2, |i| f(i[0], i[1]))
    }

    pub fn fn3(n: usize, mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        Tensor::from_fn(n, 3, |i| f(i[0], i[1], i[2]))
    }

    pub fn fn4(n: usize, mut f: impl FnMut(usize, usize, usize, usize) -> T) -> Self {
        Tensor::from_fn(n, 4, |i| f(i[0], i[1], i[2], i[3]))
    }

    pub fn fn5(n: usize, mut f: impl FnMut(usize, usize, usize, usize, usize) -> T) -> Self {
        Tensor::from_fn(n, 5, |i| f(i[0], i[1], i[2], i[3], i[4]))
    }

    /// Reorders indices: slot `s` of the result is slot `perm[s]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.rank);
        let mut src = vec![0; self.rank];
        Tensor::from_fn(self.n, self.rank, |idx| {
            for (s, &p) in perm.iter().enumerate() {
                src[p] = idx[s];
            }
            self.get(&src).clone()
        })
    }
}

impl<T, const R: usize> Index<[usize; R]> for Tensor<T> {
    type Output = T;
    fn index(&self, idx: [usize; R]) -> &T {
        self.get(&idx)
    }
}

impl<T, const R: usize> IndexMut<[usize; R]> for Tensor<T> {
    fn index_mut(&mut self, idx: [usize; R]) -> &mut T {
        self.get_mut(&idx)
    }
}

impl Tensor<f64> {
    pub fn zeros(n: usize, rank: usize) -> Self {
        Tensor::filled(n, rank, 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    pub fn plus(&self, o: &Self) -> Self {
        assert_eq!(self.data.len(), o.data.len());
        Tensor { n: self.n, rank: self.rank, data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect() }
    }

    pub fn minus(&self, o: &Self) -> Self {
        self.plus(&o.scaled(-1.0))
    }

    pub fn max_diff(&self, o: &Self) -> f64 {
        self.minus(o).max_abs()
    }
}

impl Tensor<Jet> {
    pub fn value(&self) -> Result<Tensor<f64>, JetError> {
        self.try_map(|j| j.value())
    }

    /// `∂_{y^k}` of every component, derivative index first.
    pub fn grad_y(&self) -> Tensor<Jet> {
        let n = self.n;
        Tensor::from_fn(n, self.rank + 1, |idx| self.get(&idx[1..]).d_y(idx[0]))
    }

    /// `∂_{x^k}` of every component, derivative index first.
    pub fn grad_x(&self) -> Tensor<Jet> {
        let n = self.n;
        Tensor::from_fn(n, self.rank + 1, |idx| self.get(&idx[1..]).d_x(idx[0]))
    }
}

/// Sum over `0..n` of a real-valued term.
pub fn sum(n: usize, f: impl FnMut(usize) -> f64) -> f64 {
    (0..n).map(f).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_major_and_permute() {
        let t = Tensor::fn3(2, |i, j, k| (100 * i + 10 * j + k) as f64);
        assert_eq!(t.data()[5], 101.0);
        assert_eq!(t[[1, 0, 1]], 101.0);
        let p = t.permute(&[2, 0, 1]);
        assert_eq!(p[[1, 0, 0]], t[[0, 0, 1]]);
        assert_eq!(Tensor::<f64>::zeros(3, 0).data().len(), 1);
    }
}
