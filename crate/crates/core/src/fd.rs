//! Central finite-difference estimates of mixed partials.
//!
//! Used as an independent check on jet arithmetic. Each variable gets a
//! fourth-order accurate central stencil for its own derivative order and the
//! stencils are combined as a tensor product.

/// Accuracy order of every stencil below.
pub const STENCIL_ACCURACY: usize = 4;

/// Highest total derivative order with a stencil.
pub const MAX_ORDER: usize = 4;

// (offset, weight) pairs for derivative orders 0..=4.
const STENCILS: [&[(i32, f64)]; 5] = [
    &[(0, 1.0)],
    &[(-2, 1.0 / 12.0), (-1, -8.0 / 12.0), (1, 8.0 / 12.0), (2, -1.0 / 12.0)],
    &[(-2, -1.0 / 12.0), (-1, 16.0 / 12.0), (0, -30.0 / 12.0), (1, 16.0 / 12.0), (2, -1.0 / 12.0)],
    &[(-3, 1.0 / 8.0), (-2, -1.0), (-1, 13.0 / 8.0), (1, -13.0 / 8.0), (2, 1.0), (3, -1.0 / 8.0)],
    &[
        (-3, -1.0 / 6.0),
        (-2, 2.0),
        (-1, -13.0 / 2.0),
        (0, 28.0 / 3.0),
        (1, -13.0 / 2.0),
        (2, 2.0),
        (3, -1.0 / 6.0),
    ],
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdEstimate {
    pub value: f64,
    pub step: f64,
    /// Truncation error is `O(step^accuracy)`.
    pub accuracy: usize,
    /// Number of function evaluations used.
    pub evaluations: usize,
}

/// A step balancing truncation against roundoff for a derivative of total order `order`.
pub fn default_step(order: usize) -> f64 {
    let e = 1.0 / (order.max(1) + STENCIL_ACCURACY) as f64;
    f64::EPSILON.powf(e)
}

/// Estimates `∂^α_x ∂^β_y f` at `(x, y)`, `α` and `β` given as per-variable counts.
///
/// Panics when the total order exceeds [`MAX_ORDER`] or the multi-indices do not
/// match the point's dimensions.
pub fn fd_oracle(
    f: &dyn Fn(&[f64], &[f64]) -> f64,
    x: &[f64],
    y: &[f64],
    alpha: &[u8],
    beta: &[u8],
    step: Option<f64>,
) -> FdEstimate {
    assert_eq!(alpha.len(), x.len(), "one x order per coordinate");
    assert_eq!(beta.len(), y.len(), "one y order per coordinate");
    let orders: Vec<usize> = alpha.iter().chain(beta).map(|&o| o as usize).collect();
    let total: usize = orders.iter().sum();
    assert!(total <= MAX_ORDER, "no stencil for total order {total}");
    let h = step.unwrap_or_else(|| default_step(total));
    let active: Vec<usize> = (0..orders.len()).filter(|&v| orders[v] > 0).collect();

    let nx = x.len();
    let mut px = x.to_vec();
    let mut py = y.to_vec();
    let mut acc = 0.0;
    let mut evaluations = 0;
    let mut cursor = vec![0usize; active.len()];
    loop {
        let mut w = 1.0;
        px.copy_from_slice(x);
        py.copy_from_slice(y);
        for (slot, &v) in active.iter().enumerate() {
            let (off, wt) = STENCILS[orders[v]][cursor[slot]];
            w *= wt;
            let shift = off as f64 * h;
            if v < nx {
                px[v] += shift;
            } else {
                py[v - nx] += shift;
            }
        }
        acc += w * f(&px, &py);
        evaluations += 1;

        let mut s = 0;
        loop {
            if s == active.len() {
                return FdEstimate { value: acc / h.powi(total as i32), step: h, accuracy: STENCIL_ACCURACY, evaluations };
            }
            cursor[s] += 1;
            if cursor[s] < STENCILS[orders[active[s]]].len() {
                break;
            }
            cursor[s] = 0;
            s += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_reproduce_monomials() {
        for (m, st) in STENCILS.iter().enumerate() {
            for p in 0..=(m + 3).min(7) {
                let s: f64 = st.iter().map(|(o, w)| w * (*o as f64).powi(p as i32)).sum();
                let fact: f64 = (1..=p).map(|k| k as f64).product();
                let expect = if p == m { fact } else { 0.0 };
                assert!((s - expect).abs() < 1e-12, "order {m} power {p}: {s}");
            }
        }
    }

    #[test]
    fn univariate_examples() {
        let sq = |_: &[f64], y: &[f64]| y[0] * y[0];
        assert!((fd_oracle(&sq, &[], &[3.0], &[], &[1], Some(1e-4)).value - 6.0).abs() < 1e-7);
        let s = |_: &[f64], y: &[f64]| y[0].sin();
        assert!(fd_oracle(&s, &[], &[0.0], &[], &[2], Some(1e-3)).value.abs() < 1e-6);
        let e = |_: &[f64], y: &[f64]| y[0].exp();
        let d = fd_oracle(&e, &[], &[1.0], &[], &[1], Some(1e-4));
        assert!((d.value - std::f64::consts::E).abs() < 1e-7);
        assert_eq!(d.accuracy, 4);
    }

    #[test]
    fn mixed_partial() {
        let f = |x: &[f64], y: &[f64]| x[0] * x[0] * y[0].sin() * y[1];
        let d = fd_oracle(&f, &[0.7], &[0.3, 1.1], &[1], &[2, 1], None);
        let exact = 2.0 * 0.7 * -(0.3f64.sin());
        assert!((d.value - exact).abs() < 1e-6, "{}", d.value);
        assert_eq!(d.evaluations, 4 * 5 * 4);
    }
}
