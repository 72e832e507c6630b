use crate::error::{Error, Result};
use crate::linalg::Operator;
use crate::scalar::Real;

/// An operator-valued function of time: either constant, or sampled on a
/// uniform grid and linearly interpolated between nodes.
#[derive(Clone, Debug)]
pub enum Schedule<T> {
    Constant(Operator<T>),
    Sampled(SampledSchedule<T>),
}

/// Samples `values[k]` at `t0 + k·step`.
#[derive(Clone, Debug)]
pub struct SampledSchedule<T> {
    pub t0: T,
    pub step: T,
    pub values: Vec<Operator<T>>,
}

/// Uniform time grid `t0, t0 + step, …` with `len` nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid<T> {
    pub t0: T,
    pub step: T,
    pub len: usize,
}

impl<T: Real> Grid<T> {
    pub fn time(&self, k: usize) -> T {
        self.t0 + self.step * T::from_usize(k).unwrap()
    }

    pub fn end(&self) -> T {
        self.time(self.len.saturating_sub(1))
    }

    /// Same grid up to a relative tolerance on the spacing.
    pub fn matches(&self, other: &Grid<T>) -> bool {
        let tol = T::lit(1e-9) * self.step.abs().max(T::epsilon());
        self.len == other.len && (self.t0 - other.t0).abs() <= tol && (self.step - other.step).abs() <= tol
    }
}

impl<T: Real> SampledSchedule<T> {
    pub fn new(t0: T, step: T, values: Vec<Operator<T>>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("sampled schedule needs at least one node".into()));
        }
        if values.len() > 1 && !(step > T::zero()) {
            return Err(Error::InvalidArgument("sampled schedule step must be positive".into()));
        }
        let d = values[0].rows();
        if let Some(bad) = values.iter().find(|v| v.rows() != d || !v.is_square()) {
            return Err(Error::DimensionMismatch {
                context: "SampledSchedule",
                expected: d,
                found: bad.rows(),
            });
        }
        Ok(Self { t0, step, values })
    }

    pub fn grid(&self) -> Grid<T> {
        Grid {
            t0: self.t0,
            step: self.step,
            len: self.values.len(),
        }
    }

    /// Value at `t`; outside the grid the end values are held.
    pub fn at(&self, t: T) -> Operator<T> {
        let n = self.values.len();
        if n == 1 {
            return self.values[0].clone();
        }
        let pos = (t - self.t0) / self.step;
        if !(pos > T::zero()) {
            return self.values[0].clone();
        }
        let last = T::from_usize(n - 1).unwrap();
        if pos >= last {
            return self.values[n - 1].clone();
        }
        let i = pos.floor().to_usize().unwrap().min(n - 2);
        let frac = pos - T::from_usize(i).unwrap();
        let snap = T::lit(1e-9);
        if frac <= snap {
            return self.values[i].clone();
        }
        if frac >= T::one() - snap {
            return self.values[i + 1].clone();
        }
        &self.values[i].scale_re(T::one() - frac) + &self.values[i + 1].scale_re(frac)
    }
}

impl<T: Real> Schedule<T> {
    pub fn dim(&self) -> usize {
        match self {
            Schedule::Constant(op) => op.rows(),
            Schedule::Sampled(s) => s.values[0].rows(),
        }
    }

    pub fn at(&self, t: T) -> Operator<T> {
        match self {
            Schedule::Constant(op) => op.clone(),
            Schedule::Sampled(s) => s.at(t),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Schedule::Constant(_))
    }

    pub fn grid(&self) -> Option<Grid<T>> {
        match self {
            Schedule::Constant(_) => None,
            Schedule::Sampled(s) => Some(s.grid()),
        }
    }

    /// Applies `f` to every stored sample.
    pub fn map(&self, f: impl Fn(&Operator<T>) -> Operator<T>) -> Self {
        match self {
            Schedule::Constant(op) => Schedule::Constant(f(op)),
            Schedule::Sampled(s) => Schedule::Sampled(SampledSchedule {
                t0: s.t0,
                step: s.step,
                values: s.values.iter().map(f).collect(),
            }),
        }
    }

    /// Same samples on a new time axis.
    pub fn regrid(&self, t0: T, step: T) -> Self {
        match self {
            Schedule::Constant(op) => Schedule::Constant(op.clone()),
            Schedule::Sampled(s) => Schedule::Sampled(SampledSchedule {
                t0,
                step,
                values: s.values.clone(),
            }),
        }
    }

    pub fn samples(&self) -> &[Operator<T>] {
        match self {
            Schedule::Constant(op) => std::slice::from_ref(op),
            Schedule::Sampled(s) => &s.values,
        }
    }
}

impl<T> From<Operator<T>> for Schedule<T> {
    fn from(op: Operator<T>) -> Self {
        Schedule::Constant(op)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{sigma_x, sigma_z};

    #[test]
    fn linear_interpolation_between_nodes() {
        let s = SampledSchedule::new(0.0, 1.0, vec![sigma_x::<f64>(), sigma_z::<f64>()]).unwrap();
        let mid = s.at(0.5);
        let expect = (&sigma_x::<f64>() + &sigma_z::<f64>()).scale_re(0.5);
        assert!(mid.max_abs_diff(&expect) < 1e-15);
        assert_eq!(s.at(-1.0), sigma_x());
        assert_eq!(s.at(7.0), sigma_z());
        assert_eq!(s.at(1.0), sigma_z());
    }

    #[test]
    fn rejects_empty_and_ragged() {
        assert!(SampledSchedule::<f64>::new(0.0, 1.0, vec![]).is_err());
        assert!(SampledSchedule::new(0.0, 1.0, vec![sigma_x::<f64>(), Operator::identity(3)]).is_err());
    }
}
