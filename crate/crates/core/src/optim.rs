//! Small unconstrained minimizers: Nelder–Mead and BFGS with central
//! difference gradients.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimOptions<T> {
    pub max_iters: usize,
    /// Hard cap on objective evaluations, gradients included.
    pub max_evals: usize,
    /// Stop once an iteration improves the value by less than this.
    pub f_tol: T,
    /// Central-difference step for gradients.
    pub grad_step: T,
}

impl<T: Real> Default for OptimOptions<T> {
    fn default() -> Self {
        Self {
            max_iters: 200,
            max_evals: 100_000,
            f_tol: T::lit(1e-12),
            grad_step: T::lit(1e-5),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimResult<T> {
    pub x: Vec<T>,
    pub value: T,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// The iteration or evaluation cap stopped the run.
    pub budget_exhausted: bool,
}

struct Counted<F> {
    f: F,
    evals: AtomicUsize,
}

impl<F> Counted<F> {
    fn call<T: Real>(&self, x: &[T]) -> T
    where
        F: Fn(&[T]) -> T,
    {
        self.evals.fetch_add(1, Ordering::Relaxed);
        let v = (self.f)(x);
        if v.is_nan() {
            T::infinity()
        } else {
            v
        }
    }

    fn count(&self) -> usize {
        self.evals.load(Ordering::Relaxed)
    }
}

/// Nelder–Mead simplex search from `x0` with initial edge length `step`.
pub fn nelder_mead<T, F>(f: F, x0: &[T], step: T, opts: &OptimOptions<T>) -> OptimResult<T>
where
    T: Real,
    F: Fn(&[T]) -> T,
{
    let f = Counted {
        f,
        evals: AtomicUsize::new(0),
    };
    let n = x0.len();
    let mut simplex: Vec<(Vec<T>, T)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f.call(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] = x[i] + step;
        let v = f.call(&x);
        simplex.push((x, v));
    }
    let (alpha, gamma, rho, sigma) = (T::one(), T::lit(2.0), T::lit(0.5), T::lit(0.5));
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iters && f.count() < opts.max_evals {
        iterations += 1;
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        if (worst - best).abs() <= opts.f_tol {
            converged = true;
            break;
        }
        let inv_n = T::one() / T::from_usize(n).unwrap();
        let centroid: Vec<T> = (0..n)
            .map(|j| simplex[..n].iter().map(|p| p.0[j]).sum::<T>() * inv_n)
            .collect();
        let along = |t: T| -> Vec<T> { (0..n).map(|j| centroid[j] + t * (simplex[n].0[j] - centroid[j])).collect() };
        let xr = along(-alpha);
        let fr = f.call(&xr);
        if fr < simplex[0].1 {
            let xe = along(-gamma);
            let fe = f.call(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst {
                let xc = along(-rho);
                let fc = f.call(&xc);
                (xc, fc)
            } else {
                let xc = along(rho);
                let fc = f.call(&xc);
                (xc, fc)
            };
            if fc < worst.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let x_best = simplex[0].0.clone();
                for p in simplex.iter_mut().skip(1) {
                    p.0 = (0..n).map(|j| x_best[j] + sigma * (p.0[j] - x_best[j])).collect();
                    p.1 = f.call(&p.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    let (x, value) = simplex.swap_remove(0);
    OptimResult {
        x,
        value,
        iterations,
        evaluations: f.count(),
        converged,
        budget_exhausted: !converged,
    }
}

/// Central-difference gradient, coordinates evaluated in parallel.
pub fn central_gradient<T, F>(f: &F, x: &[T], h: T) -> Vec<T>
where
    T: Real,
    F: Fn(&[T]) -> T + Sync,
{
    let two_h = h + h;
    (0..x.len())
        .into_par_iter()
        .map(|i| {
            let mut xp = x.to_vec();
            xp[i] = x[i] + h;
            let fp = f(&xp);
            xp[i] = x[i] - h;
            let fm = f(&xp);
            (fp - fm) / two_h
        })
        .collect()
}

/// BFGS with an Armijo backtracking line search and central-difference
/// gradients.
pub fn bfgs<T, F>(f: F, x0: &[T], opts: &OptimOptions<T>) -> OptimResult<T>
where
    T: Real,
    F: Fn(&[T]) -> T + Sync,
{
    let h = opts.grad_step;
    let evals = AtomicUsize::new(0);
    let fg = |x: &[T]| {
        evals.fetch_add(2 * x.len(), Ordering::Relaxed);
        (f(x), central_gradient(&f, x, h))
    };
    let mut r = bfgs_with_gradient(fg, |x: &[T]| f(x), x0, opts);
    r.evaluations = evals.load(Ordering::Relaxed) + r.evaluations;
    r
}

/// BFGS driven by a caller-supplied value-and-gradient `fg`; `f` evaluates
/// the value alone during line searches. Evaluation counts include both.
pub fn bfgs_with_gradient<T, FG, F>(fg: FG, f: F, x0: &[T], opts: &OptimOptions<T>) -> OptimResult<T>
where
    T: Real,
    FG: Fn(&[T]) -> (T, Vec<T>),
    F: Fn(&[T]) -> T,
{
    let f = Counted {
        f,
        evals: AtomicUsize::new(0),
    };
    let fg_count = AtomicUsize::new(0);
    let eval_fg = |x: &[T]| {
        fg_count.fetch_add(1, Ordering::Relaxed);
        let (v, g) = fg(x);
        (if v.is_nan() { T::infinity() } else { v }, g)
    };
    let used = || f.count() + fg_count.load(Ordering::Relaxed);
    let n = x0.len();
    let mut x = x0.to_vec();
    let (mut fx, mut g) = eval_fg(&x);
    // inverse Hessian approximation, row-major
    let mut hinv = vec![T::zero(); n * n];
    for i in 0..n {
        hinv[i * n + i] = T::one();
    }
    let mut iterations = 0;
    let mut converged = false;
    let dot = |a: &[T], b: &[T]| a.iter().zip(b).map(|(&u, &v)| u * v).sum::<T>();
    while iterations < opts.max_iters && used() < opts.max_evals {
        iterations += 1;
        let mut p: Vec<T> = (0..n).map(|i| -dot(&hinv[i * n..(i + 1) * n], &g)).collect();
        let mut slope = dot(&p, &g);
        if !(slope < T::zero()) {
            // lost descent: restart from steepest descent
            for i in 0..n {
                for j in 0..n {
                    hinv[i * n + j] = if i == j { T::one() } else { T::zero() };
                }
            }
            p = g.iter().map(|&v| -v).collect();
            slope = dot(&p, &g);
        }
        if slope.abs() <= T::epsilon() {
            converged = true;
            break;
        }
        let mut step = T::one();
        let mut accepted = None;
        for _ in 0..40 {
            let xn: Vec<T> = x.iter().zip(&p).map(|(&a, &b)| a + step * b).collect();
            let fnew = f.call(&xn);
            if fnew <= fx + T::lit(1e-4) * step * slope {
                accepted = Some(xn);
                break;
            }
            step = step * T::lit(0.5);
        }
        let Some(xn) = accepted else {
            converged = true;
            break;
        };
        let (fnew, gn) = eval_fg(&xn);
        let s: Vec<T> = xn.iter().zip(&x).map(|(&a, &b)| a - b).collect();
        let y: Vec<T> = gn.iter().zip(&g).map(|(&a, &b)| a - b).collect();
        let improvement = fx - fnew;
        x = xn;
        fx = fnew;
        g = gn;
        let sy = dot(&s, &y);
        if sy > T::epsilon() {
            let hy: Vec<T> = (0..n).map(|i| dot(&hinv[i * n..(i + 1) * n], &y)).collect();
            let yhy = dot(&y, &hy);
            let r = T::one() / sy;
            let k = (T::one() + yhy * r) * r;
            for i in 0..n {
                for j in 0..n {
                    hinv[i * n + j] = hinv[i * n + j] + k * s[i] * s[j] - r * (hy[i] * s[j] + s[i] * hy[j]);
                }
            }
        }
        if improvement.abs() <= opts.f_tol {
            converged = true;
            break;
        }
    }
    OptimResult {
        x,
        value: fx,
        iterations,
        evaluations: used(),
        converged,
        budget_exhausted: !converged,
    }
}
