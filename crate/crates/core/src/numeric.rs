//! Root finding and small dense linear algebra shared by the solvers.

use crate::error::{Error, Result};
use crate::Real;

/// Brent's bracketing root finder on `[a, b]` with `f(a)` and `f(b)` of
/// opposite signs. Returns the root and the number of iterations.
pub fn brent<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    b: T,
    fa: T,
    fb: T,
    max_iter: usize,
) -> Result<(T, usize)> {
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    if fa == T::zero() {
        return Ok((a, 0));
    }
    if fb == T::zero() {
        return Ok((b, 0));
    }
    if (fa > T::zero()) == (fb > T::zero()) {
        return Err(Error::NoSolution(
            "brent: interval does not bracket a root".into(),
        ));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for iter in 1..=max_iter {
        if (fb > T::zero()) == (fc > T::zero()) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = two * T::epsilon() * b.abs() + T::min_positive_value();
        let m = half * (c - b);
        if m.abs() <= tol || fb == T::zero() {
            return Ok((b, iter));
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * m * s;
                q = T::one() - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (two * m * qq * (qq - r) - (b - a) * (r - T::one()));
                q = (qq - T::one()) * (r - T::one()) * (s - T::one());
            }
            if p > T::zero() {
                q = -q;
            } else {
                p = -p;
            }
            if two * p < (T::lit(3.0) * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b = if d.abs() > tol {
            b + d
        } else if m > T::zero() {
            b + tol
        } else {
            b - tol
        };
        fb = f(b);
        if !fb.is_finite() {
            return Err(Error::NoSolution("brent: non-finite function value".into()));
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual: fb.abs().to_f64().unwrap_or(f64::NAN),
        residuals: vec![],
    })
}

fn opposite<T: Real>(x: T, y: T) -> bool {
    (x < T::zero() && y > T::zero()) || (x > T::zero() && y < T::zero())
}

/// Expands geometrically from `seed > 0` in both directions until a sign
/// change of `f` is found between consecutive points. The change nearest to
/// the seed (in expansion steps) wins.
pub fn expand_bracket<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    seed: T,
    growth: T,
    max_steps: usize,
) -> Option<(T, T, T, T)> {
    let f0 = f(seed);
    if f0 == T::zero() {
        return Some((seed, seed, f0, f0));
    }
    let (mut lo, mut flo) = (seed, f0);
    let (mut hi, mut fhi) = (seed, f0);
    let (mut lo_live, mut hi_live) = (f0.is_finite(), f0.is_finite());
    for _ in 0..max_steps {
        if !lo_live && !hi_live {
            break;
        }
        if hi_live {
            let x = hi * growth;
            let fx = f(x);
            if !x.is_finite() || !fx.is_finite() {
                hi_live = false;
            } else {
                if opposite(fhi, fx) || fx == T::zero() {
                    return Some((hi, x, fhi, fx));
                }
                hi = x;
                fhi = fx;
            }
        }
        if lo_live {
            let x = lo / growth;
            let fx = f(x);
            if x <= T::zero() || !fx.is_finite() {
                lo_live = false;
            } else {
                if opposite(flo, fx) || fx == T::zero() {
                    return Some((x, lo, fx, flo));
                }
                lo = x;
                flo = fx;
            }
        }
    }
    None
}

/// All sign changes of `f` over the geometric grid `growth^k`,
/// `k = -k_max ..= k_max`. Points where `f` is undefined break the chain.
pub fn log_grid_brackets<T: Real, F: FnMut(T) -> Option<T>>(
    mut f: F,
    center: T,
    growth: T,
    k_max: i32,
) -> Vec<(T, T, T, T)> {
    let mut out = Vec::new();
    let mut prev: Option<(T, T)> = None;
    for k in -k_max..=k_max {
        let x = center * growth.powi(k);
        let fx = f(x).filter(|v| v.is_finite());
        match (prev, fx) {
            (Some((px, pf)), Some(v)) => {
                if v == T::zero() {
                    out.push((x, x, v, v));
                } else if opposite(pf, v) {
                    out.push((px, x, pf, v));
                }
            }
            (None, Some(v)) if v == T::zero() => out.push((x, x, v, v)),
            _ => {}
        }
        prev = fx.map(|v| (x, v));
    }
    out
}

/// Number of geometric steps needed to span `span` on each side of the centre.
pub fn span_steps<T: Real>(growth: T) -> i32 {
    let span = if T::epsilon() < T::lit(1e-10) {
        T::lit(1e15)
    } else {
        T::lit(1e7)
    };
    (span.ln() / growth.ln()).ceil().to_i32().unwrap_or(64)
}

/// Solves `a x = b` for a small dense system by Gaussian elimination with
/// partial pivoting. `a` is row-major `n x n`.
pub fn solve_dense<T: Real>(mut a: Vec<T>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    debug_assert_eq!(a.len(), n * n);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| {
            a[i * n + col]
                .abs()
                .partial_cmp(&a[j * n + col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[piv * n + col] == T::zero() || !a[piv * n + col].is_finite() {
            return None;
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            b.swap(col, piv);
        }
        for row in col + 1..n {
            let factor = a[row * n + col] / a[col * n + col];
            for k in col..n {
                let v = a[col * n + k];
                a[row * n + k] -= factor * v;
            }
            let v = b[col];
            b[row] -= factor * v;
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s -= a[row * n + k] * x[k];
        }
        x[row] = s / a[row * n + row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

pub fn max_norm<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

/// Outcome of [`damped_newton`].
#[derive(Debug, Clone)]
pub struct NewtonOutcome<T> {
    pub x: Vec<T>,
    pub residual: T,
    pub iterations: usize,
    pub converged: bool,
}

/// Damped Newton iteration on `f(x) = 0` with a central-difference Jacobian.
///
/// `f` returns `None` where it is undefined; such trial points are treated as
/// overshoot. Steps are capped at `max_step` in max-norm. After reaching
/// `tol` a few extra iterations polish the root while the residual keeps
/// decreasing.
pub fn damped_newton<T: Real, F: Fn(&[T]) -> Option<Vec<T>>>(
    f: &F,
    x0: &[T],
    tol: T,
    max_iter: usize,
    damping: T,
    max_step: T,
) -> NewtonOutcome<T> {
    let n = x0.len();
    let fd_step = T::lit(1e-6).max(T::epsilon().cbrt());
    let mut x = x0.to_vec();
    let mut fx = match f(&x) {
        Some(v) => v,
        None => {
            return NewtonOutcome {
                x,
                residual: T::infinity(),
                iterations: 0,
                converged: false,
            }
        }
    };
    let mut norm = max_norm(&fx);
    let mut polish = 0;
    for iter in 1..=max_iter {
        if norm <= tol {
            polish += 1;
            if polish > 3 || norm == T::zero() {
                return NewtonOutcome {
                    x,
                    residual: norm,
                    iterations: iter - 1,
                    converged: true,
                };
            }
        }
        let mut jac = vec![T::zero(); n * n];
        for j in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            let h = fd_step * T::one().max(x[j].abs());
            xp[j] += h;
            xm[j] -= h;
            let (Some(fp), Some(fm)) = (f(&xp), f(&xm)) else {
                return NewtonOutcome {
                    x,
                    residual: norm,
                    iterations: iter,
                    converged: norm <= tol,
                };
            };
            for i in 0..n {
                jac[i * n + j] = (fp[i] - fm[i]) / (h + h);
            }
        }
        let rhs: Vec<T> = fx.iter().map(|v| -*v).collect();
        let Some(mut step) = solve_dense(jac, rhs) else {
            break;
        };
        let len = max_norm(&step);
        if len > max_step {
            let s = max_step / len;
            step.iter_mut().for_each(|v| *v *= s);
        }
        let mut lambda = damping;
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<T> = x.iter().zip(&step).map(|(a, s)| *a + lambda * *s).collect();
            if let Some(ft) = f(&trial) {
                let tn = max_norm(&ft);
                if tn.is_finite() && tn < norm {
                    x = trial;
                    fx = ft;
                    norm = tn;
                    accepted = true;
                    break;
                }
            }
            lambda *= T::lit(0.5);
        }
        if !accepted {
            return NewtonOutcome {
                x,
                residual: norm,
                iterations: iter,
                converged: norm <= tol,
            };
        }
    }
    NewtonOutcome {
        x,
        residual: norm,
        iterations: max_iter,
        converged: norm <= tol,
    }
}
