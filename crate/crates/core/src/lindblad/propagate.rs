use std::io::{self, Write};

use super::generator::Lindbladian;
use super::schedule::Grid;
use super::superop::Superoperator;
use crate::error::{Error, Result};
use crate::linalg::{check_state, expm_action, min_eigenvalue, Operator};
use crate::scalar::Real;

/// How each step's exponential is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Method {
    /// Dense propagators for small or constant generators, the Taylor
    /// action otherwise.
    #[default]
    Auto,
    /// `exp(Δt·S)` of the `d² × d²` superoperator by scaling and squaring.
    Dense,
    /// Taylor series applied directly to the operator.
    Action,
}

#[derive(Clone, Copy, Debug)]
pub struct PropagateOptions {
    pub method: Method,
    /// Keep every `record_stride`-th state; must divide the step count.
    pub record_stride: usize,
    /// Record the smallest eigenvalue seen at recorded nodes.
    pub monitor_negativity: bool,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        Self {
            method: Method::Auto,
            record_stride: 1,
            monitor_negativity: false,
        }
    }
}

impl PropagateOptions {
    pub fn with_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride.max(1);
        self
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn monitored(mut self) -> Self {
        self.monitor_negativity = true;
        self
    }
}

/// Numerical health of a propagation run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostics<T> {
    /// Largest `|Tr ρ − 1|` observed before renormalization.
    pub max_trace_drift: T,
    /// Smallest eigenvalue over the recorded nodes, when monitored.
    pub min_eigenvalue: Option<T>,
    pub steps: usize,
}

/// Density matrices on a uniform time grid.
#[derive(Clone, Debug)]
pub struct Trajectory<T> {
    pub t0: T,
    /// Spacing between recorded states.
    pub step: T,
    pub states: Vec<Operator<T>>,
    pub diagnostics: Diagnostics<T>,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn time(&self, k: usize) -> T {
        self.t0 + self.step * T::from_usize(k).unwrap()
    }

    pub fn times(&self) -> Vec<T> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }

    pub fn end_time(&self) -> T {
        self.time(self.len() - 1)
    }

    pub fn grid(&self) -> Grid<T> {
        Grid {
            t0: self.t0,
            step: self.step,
            len: self.len(),
        }
    }

    pub fn first(&self) -> &Operator<T> {
        &self.states[0]
    }

    pub fn last(&self) -> &Operator<T> {
        &self.states[self.len() - 1]
    }

    /// Writes `t, re(rho_00), im(rho_00), re(rho_01), …` in row-major order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let d = self.states.first().map_or(0, Operator::rows);
        let mut header = String::from("t");
        for i in 0..d {
            for j in 0..d {
                header.push_str(&format!(",re_rho_{i}{j},im_rho_{i}{j}"));
            }
        }
        writeln!(w, "{header}")?;
        for (k, rho) in self.states.iter().enumerate() {
            write!(w, "{:.16e}", self.time(k))?;
            for z in rho.as_slice() {
                write!(w, ",{:.16e},{:.16e}", z.re, z.im)?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Propagates `rho0` from `t0` to `t1` in `steps` midpoint exponential steps.
///
/// Each step applies `exp(Δt·ℒ(t_mid))`. The state is symmetrized and its
/// trace renormalized after every step; negative eigenvalues are reported
/// through [`Diagnostics`] rather than clipped.
pub fn propagate<T: Real>(
    l: &Lindbladian<T>,
    rho0: &Operator<T>,
    t0: T,
    t1: T,
    steps: usize,
    opts: PropagateOptions,
) -> Result<Trajectory<T>> {
    check_span(t0, t1, steps)?;
    if rho0.rows() != l.dim() {
        return Err(Error::DimensionMismatch {
            context: "propagate",
            expected: l.dim(),
            found: rho0.rows(),
        });
    }
    check_state(rho0, T::lit(1e-8))?;
    let stride = opts.record_stride.max(1);
    if steps % stride != 0 {
        return Err(Error::InvalidArgument(format!(
            "record_stride {stride} does not divide steps {steps}"
        )));
    }
    let dt = (t1 - t0) / T::from_usize(steps).unwrap();
    let mut stepper = Stepper::new(l, t0, dt, opts.method)?;

    let mut rho = rho0.clone();
    let mut states = Vec::with_capacity(steps / stride + 2);
    let mut diag = Diagnostics {
        max_trace_drift: T::zero(),
        min_eigenvalue: None,
        steps,
    };
    let mut record = |rho: &Operator<T>, diag: &mut Diagnostics<T>| -> Result<()> {
        if opts.monitor_negativity {
            let m = min_eigenvalue(rho)?;
            diag.min_eigenvalue = Some(diag.min_eigenvalue.map_or(m, |p: T| p.min(m)));
        }
        states.push(rho.clone());
        Ok(())
    };
    record(&rho, &mut diag)?;
    for k in 0..steps {
        let next = stepper.step(k, &rho)?;
        let tr = next.trace();
        let t_next = t0 + dt * T::from_usize(k + 1).unwrap();
        if !next.is_finite() || !tr.re.is_finite() || tr.re <= T::zero() {
            return Err(Error::NonFinite {
                last_good_time: (t_next - dt).as_f64(),
            });
        }
        diag.max_trace_drift = diag.max_trace_drift.max((tr.re - T::one()).abs());
        rho = next.hermitian_part().scale_re(T::one() / tr.re);
        if (k + 1) % stride == 0 {
            record(&rho, &mut diag)?;
        }
    }
    Ok(Trajectory {
        t0,
        step: dt * T::from_usize(stride).unwrap(),
        states,
        diagnostics: diag,
    })
}

/// Evolves an arbitrary operator (no symmetrization or renormalization).
pub fn evolve<T: Real>(
    l: &Lindbladian<T>,
    x: &Operator<T>,
    t0: T,
    t1: T,
    steps: usize,
    method: Method,
) -> Result<Operator<T>> {
    if t1 == t0 {
        return Ok(x.clone());
    }
    check_span(t0, t1, steps)?;
    let dt = (t1 - t0) / T::from_usize(steps).unwrap();
    let mut stepper = Stepper::new(l, t0, dt, method)?;
    let mut y = x.clone();
    for k in 0..steps {
        y = stepper.step(k, &y)?;
        if !y.is_finite() {
            return Err(Error::NonFinite {
                last_good_time: (t0 + dt * T::from_usize(k).unwrap()).as_f64(),
            });
        }
    }
    Ok(y)
}

/// Hilbert–Schmidt adjoint of the flow `t0 → t1`, applied to `x`.
pub fn evolve_adjoint<T: Real>(
    l: &Lindbladian<T>,
    x: &Operator<T>,
    t0: T,
    t1: T,
    steps: usize,
) -> Result<Operator<T>> {
    if t1 == t0 {
        return Ok(x.clone());
    }
    check_span(t0, t1, steps)?;
    let dt = (t1 - t0) / T::from_usize(steps).unwrap();
    let half = T::lit(0.5);
    let mut y = x.clone();
    let constant = l.is_constant().then(|| l.at(t0));
    for k in (0..steps).rev() {
        let tm = t0 + dt * (T::from_usize(k).unwrap() + half);
        let g = match &constant {
            Some(g) => g.clone(),
            None => l.at(tm),
        };
        y = expm_action(|z| g.apply_adjoint(z), &y, dt, g.norm_bound());
        if !y.is_finite() {
            return Err(Error::NonFinite {
                last_good_time: tm.as_f64(),
            });
        }
    }
    Ok(y)
}

/// Propagator of the flow `t0 → t1` as a superoperator: the time-ordered
/// product of the per-step exponentials.
pub fn channel_from<T: Real>(l: &Lindbladian<T>, t0: T, t1: T, steps: usize) -> Result<Superoperator<T>> {
    if t1 == t0 {
        return Ok(Superoperator::identity(l.dim()));
    }
    check_span(t0, t1, steps)?;
    if l.is_constant() {
        return Ok(l.to_superoperator(t0).exp(t1 - t0));
    }
    let dt = (t1 - t0) / T::from_usize(steps).unwrap();
    let half = T::lit(0.5);
    let mut acc = Superoperator::identity(l.dim());
    for k in 0..steps {
        let tm = t0 + dt * (T::from_usize(k).unwrap() + half);
        let p = l.to_superoperator(tm).exp(dt);
        acc = p.compose(&acc);
        if !acc.matrix().is_finite() {
            return Err(Error::NonFinite {
                last_good_time: (tm - dt * half).as_f64(),
            });
        }
    }
    Ok(acc)
}

fn check_span<T: Real>(t0: T, t1: T, steps: usize) -> Result<()> {
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::InvalidArgument("propagation needs finite t1 > t0".into()));
    }
    Ok(())
}

enum Kind<T> {
    Fixed(Superoperator<T>),
    DenseEachStep,
    Action,
}

/// One midpoint exponential step at a time.
struct Stepper<'a, T> {
    l: &'a Lindbladian<T>,
    t0: T,
    dt: T,
    kind: Kind<T>,
    constant: Option<super::generator::Generator<T>>,
}

impl<'a, T: Real> Stepper<'a, T> {
    fn new(l: &'a Lindbladian<T>, t0: T, dt: T, method: Method) -> Result<Self> {
        l.grid()?;
        let d = l.dim();
        let kind = match (method, l.is_constant()) {
            (Method::Action, _) => Kind::Action,
            (Method::Dense, true) => Kind::Fixed(l.to_superoperator(t0).exp(dt)),
            (Method::Dense, false) => Kind::DenseEachStep,
            (Method::Auto, true) if d <= 16 => Kind::Fixed(l.to_superoperator(t0).exp(dt)),
            (Method::Auto, false) if d <= 2 => Kind::DenseEachStep,
            (Method::Auto, _) => Kind::Action,
        };
        let constant = l.is_constant().then(|| l.at(t0));
        Ok(Self {
            l,
            t0,
            dt,
            kind,
            constant,
        })
    }

    fn step(&mut self, k: usize, x: &Operator<T>) -> Result<Operator<T>> {
        let tm = self.t0 + self.dt * (T::from_usize(k).unwrap() + T::lit(0.5));
        Ok(match &self.kind {
            Kind::Fixed(p) => p.apply(x),
            Kind::DenseEachStep => self.l.to_superoperator(tm).exp(self.dt).apply(x),
            Kind::Action => match &self.constant {
                Some(g) => expm_action(|z| g.apply(z), x, self.dt, g.norm_bound()),
                None => {
                    let g = self.l.at(tm);
                    expm_action(|z| g.apply(z), x, self.dt, g.norm_bound())
                }
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{sigma_minus, sigma_x, sigma_z, trace_distance, DensityMatrix};
    use crate::scalar::c;

    #[test]
    fn zero_generator_is_constant() {
        let rho = DensityMatrix::<f64>::basis(2, 1);
        let tr = propagate(&Lindbladian::zero(2), &rho, 0.0, 1.0, 10, Default::default()).unwrap();
        assert_eq!(tr.len(), 11);
        for s in &tr.states {
            assert!(s.max_abs_diff(&rho) < 1e-15);
        }
    }

    #[test]
    fn rotation_by_pi_about_z() {
        let s = 0.5f64.sqrt();
        let plus = DensityMatrix::pure(&[c(s, 0.0), c(s, 0.0)]).unwrap();
        let minus = DensityMatrix::pure(&[c(s, 0.0), c(-s, 0.0)]).unwrap();
        let l = Lindbladian::constant(sigma_z::<f64>(), vec![]).unwrap();
        // exp(−iσ_z t) rotates the Bloch vector by 2t, so t = π/2 reaches −x
        for method in [Method::Dense, Method::Action] {
            let tr = propagate(
                &l,
                &plus,
                0.0,
                std::f64::consts::FRAC_PI_2,
                100,
                PropagateOptions::default().with_method(method),
            )
            .unwrap();
            assert!(trace_distance(tr.last(), &minus).unwrap() < 1e-6);
        }
    }

    #[test]
    fn stride_keeps_endpoints() {
        let l = Lindbladian::constant(sigma_x::<f64>(), vec![sigma_minus::<f64>().scale_re(0.3)]).unwrap();
        let rho = DensityMatrix::<f64>::basis(2, 0);
        let full = propagate(&l, &rho, 0.0, 2.0, 40, Default::default()).unwrap();
        let thin = propagate(&l, &rho, 0.0, 2.0, 40, PropagateOptions::default().with_stride(8)).unwrap();
        assert_eq!(thin.len(), 6);
        assert!((thin.step - 0.4).abs() < 1e-15);
        assert!(thin.last().max_abs_diff(full.last()) < 1e-14);
        assert!(propagate(&l, &rho, 0.0, 2.0, 40, PropagateOptions::default().with_stride(7)).is_err());
    }

    #[test]
    fn channel_from_identity_for_empty_span() {
        let l = Lindbladian::constant(sigma_x::<f64>(), vec![]).unwrap();
        let s = channel_from(&l, 0.3, 0.3, 5).unwrap();
        assert_eq!(s, Superoperator::identity(2));
    }

    #[test]
    fn non_finite_generator_aborts() {
        let bad = Operator::<f64>::from_fn(2, 2, |i, j| if i == j { c(f64::NAN, 0.0) } else { c(0.0, 0.0) });
        let l = Lindbladian::constant(Operator::zeros(2, 2), vec![bad]).unwrap();
        let err = propagate(&l, &DensityMatrix::basis(2, 0), 0.0, 1.0, 4, Default::default()).unwrap_err();
        assert!(matches!(err, Error::NonFinite { last_good_time } if last_good_time == 0.0));
    }

    #[test]
    fn csv_header_and_rows() {
        let tr = propagate(
            &Lindbladian::<f64>::zero(2),
            &DensityMatrix::basis(2, 0),
            0.0,
            1.0,
            2,
            Default::default(),
        )
        .unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "t,re_rho_00,im_rho_00,re_rho_01,im_rho_01,re_rho_10,im_rho_10,re_rho_11,im_rho_11");
        assert_eq!(lines.len(), 4);
        assert!(lines[2].starts_with("5.0000000000000000e-1,1.0000000000000000e0"));
    }
}
