//! Small numerical helpers shared by the solvers.

use crate::C64;

/// `sin(x)/x`, continued through the origin.
pub fn sinc(x: C64) -> C64 {
    if x.norm() < 1e-4 {
        let x2 = x * x;
        C64::new(1.0, 0.0) - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// `sinh(x)/x`, continued through the origin.
pub fn sinhc(x: C64) -> C64 {
    if x.norm() < 1e-4 {
        let x2 = x * x;
        C64::new(1.0, 0.0) + x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sinh() / x
    }
}

const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Composite five-point Gauss-Legendre quadrature on `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * width;
        let half = 0.5 * width;
        let mut s = 0.0;
        for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
            s += w * f(mid + half * x);
        }
        total += s * half;
    }
    total
}

/// Trapezoid rule on uniformly spaced samples.
pub fn trapezoid(values: &[f64], step: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = values[1..n - 1].iter().sum();
            step * (inner + 0.5 * (values[0] + values[n - 1]))
        }
    }
}

/// Solves a dense complex linear system in place by partial-pivot Gaussian
/// elimination. Returns `None` when a pivot vanishes.
pub fn solve_complex(a: &mut [C64], b: &mut [C64], n: usize) -> Option<()> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].norm();
        for row in col + 1..n {
            let v = a[row * n + col].norm();
            if v > best {
                best = v;
                piv = row;
            }
        }
        if !(best > 0.0) || !best.is_finite() {
            return None;
        }
        if piv != col {
            for j in 0..n {
                a.swap(col * n + j, piv * n + j);
            }
            b.swap(col, piv);
        }
        let inv = C64::new(1.0, 0.0) / a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] * inv;
            if factor == C64::new(0.0, 0.0) {
                continue;
            }
            for j in col..n {
                let v = a[col * n + j];
                a[row * n + j] -= factor * v;
            }
            let v = b[col];
            b[row] -= factor * v;
        }
    }
    for col in (0..n).rev() {
        let mut s = b[col];
        for j in col + 1..n {
            s -= a[col * n + j] * b[j];
        }
        b[col] = s / a[col * n + col];
    }
    Some(())
}

/// Determinant of a dense complex matrix by LU with partial pivoting.
pub fn determinant(mut a: alloc::vec::Vec<C64>, n: usize) -> C64 {
    let mut det = C64::new(1.0, 0.0);
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].norm();
        for row in col + 1..n {
            let v = a[row * n + col].norm();
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best == 0.0 {
            return C64::new(0.0, 0.0);
        }
        if piv != col {
            for j in 0..n {
                a.swap(col * n + j, piv * n + j);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        for row in col + 1..n {
            let factor = a[row * n + col] / p;
            for j in col..n {
                let v = a[col * n + j];
                a[row * n + j] -= factor * v;
            }
        }
    }
    det
}
