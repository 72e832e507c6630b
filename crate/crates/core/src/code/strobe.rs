use std::io::{self, Write};

use super::basis::CodeBasis;
use super::noise::NoiseModel;
use crate::error::{Error, Result};
use crate::lindblad::{Channel, Generator};
use crate::linalg::{expm_action, uhlmann_fidelity, Operator, PauliString};
use crate::petz::PetzMap;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Waveform {
    Sin,
    Cos,
}

/// `coeff · wave(freq · t) · P_L`.
#[derive(Clone, Debug, PartialEq)]
pub struct DriveTerm<T> {
    pub coeff: T,
    pub freq: T,
    pub waveform: Waveform,
    pub pauli: PauliString,
}

impl<T: Real> DriveTerm<T> {
    pub fn amplitude(&self, t: T) -> T {
        let phase = self.freq * t;
        self.coeff
            * match self.waveform {
                Waveform::Sin => phase.sin(),
                Waveform::Cos => phase.cos(),
            }
    }
}

/// Logical Hamiltonian lifted through a code basis.
#[derive(Clone, Debug)]
pub struct LogicalDrive<T> {
    terms: Vec<(DriveTerm<T>, Operator<T>)>,
    dim: usize,
}

impl<T: Real> LogicalDrive<T> {
    pub fn new(terms: &[DriveTerm<T>], code: &CodeBasis<T>) -> Result<Self> {
        let terms = terms
            .iter()
            .map(|t| Ok((t.clone(), code.logical_pauli(&t.pauli)?)))
            .collect::<Result<_>>()?;
        Ok(Self {
            terms,
            dim: code.physical_dim(),
        })
    }

    pub fn at(&self, t: T) -> Operator<T> {
        let mut h = Operator::zeros(self.dim, self.dim);
        for (term, op) in &self.terms {
            let a = term.amplitude(t);
            if a != T::zero() {
                h += &op.scale_re(a);
            }
        }
        h
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StrobeOptions<T> {
    /// Interval `δt` between recoveries.
    pub dt: T,
    /// Total time `T`, a multiple of `δt`.
    pub total: T,
    /// Midpoint substeps per interval for the driven evolution.
    pub substeps: usize,
    pub eps: T,
}

impl<T: Real> StrobeOptions<T> {
    pub fn new(dt: T, total: T) -> Self {
        Self {
            dt,
            total,
            substeps: 20,
            eps: T::lit(1e-12),
        }
    }

    fn intervals(&self) -> Result<usize> {
        if !(self.dt > T::zero()) || !(self.total >= T::zero()) || self.substeps == 0 {
            return Err(Error::InvalidArgument(format!(
                "strobe needs dt > 0, T ≥ 0 and substeps ≥ 1 (dt={}, T={})",
                self.dt, self.total
            )));
        }
        let k = (self.total / self.dt).round();
        if (k * self.dt - self.total).abs() > T::lit(1e-9) * self.total.max(T::one()) {
            return Err(Error::InvalidArgument(format!(
                "T = {} is not a multiple of dt = {}",
                self.total, self.dt
            )));
        }
        Ok(k.to_usize().unwrap_or(0))
    }
}

/// Which of the three paired runs a trace belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    NoiseFree,
    Noisy,
    Recovered,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::NoiseFree, Variant::Noisy, Variant::Recovered];

    pub fn label(self) -> &'static str {
        match self {
            Variant::NoiseFree => "noise-free",
            Variant::Noisy => "noisy",
            Variant::Recovered => "recovered",
        }
    }
}

/// Traces sampled at the strobe nodes `t_k = k δt`.
#[derive(Clone, Debug)]
pub struct StrobeReport<T> {
    pub times: Vec<T>,
    /// Logical Pauli strings, table order (identity first).
    pub observables: Vec<PauliString>,
    /// `values[variant][observable][node]`, variants in [`Variant::ALL`] order.
    pub values: [Vec<Vec<T>>; 3],
    /// Fidelity to the noise-free state.
    pub fidelity_noisy: Vec<T>,
    pub fidelity_recovered: Vec<T>,
}

impl<T: Real> StrobeReport<T> {
    fn index(v: Variant) -> usize {
        Variant::ALL.iter().position(|&x| x == v).unwrap()
    }

    pub fn trace(&self, variant: Variant, observable: &PauliString) -> Option<&[T]> {
        let j = self.observables.iter().position(|p| p == observable)?;
        Some(&self.values[Self::index(variant)][j])
    }

    /// RMS deviation of `variant` from the noise-free trace.
    pub fn rms_deviation(&self, variant: Variant, observable: &PauliString) -> Option<T> {
        let a = self.trace(variant, observable)?;
        let b = self.trace(Variant::NoiseFree, observable)?;
        let n = T::from_usize(a.len()).unwrap();
        Some((a.iter().zip(b).map(|(x, y)| (*x - *y).powi(2)).sum::<T>() / n).sqrt())
    }

    /// Nodes where the recovered fidelity falls below the no-recovery one by
    /// more than `tol`.
    pub fn dominance_violations(&self, tol: T) -> Vec<usize> {
        (0..self.times.len())
            .filter(|&k| self.fidelity_recovered[k] < self.fidelity_noisy[k] - tol)
            .collect()
    }

    /// Long format `t,observable,value,variant`; fidelities appear as the
    /// observable `fidelity`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,observable,value,variant")?;
        for (k, t) in self.times.iter().enumerate() {
            for v in Variant::ALL {
                for (j, p) in self.observables.iter().enumerate() {
                    writeln!(w, "{t:.16e},{p},{:.16e},{}", self.values[Self::index(v)][j][k], v.label())?;
                }
            }
            writeln!(w, "{t:.16e},fidelity,{:.16e},noisy", self.fidelity_noisy[k])?;
            writeln!(w, "{t:.16e},fidelity,{:.16e},recovered", self.fidelity_recovered[k])?;
        }
        Ok(())
    }
}

/// Midpoint-exponential evolution under `H(t)` plus fixed jumps.
fn driven_step<T: Real>(
    drive: &LogicalDrive<T>,
    jumps: &[Operator<T>],
    rho: &Operator<T>,
    t0: T,
    dt: T,
    substeps: usize,
) -> Result<Operator<T>> {
    let h = dt / T::from_usize(substeps).unwrap();
    let mut y = rho.clone();
    for s in 0..substeps {
        let tm = t0 + h * (T::from_usize(s).unwrap() + T::lit(0.5));
        let g = Generator::new(drive.at(tm), jumps.to_vec());
        y = expm_action(|z| g.apply(z), &y, h, g.norm_bound());
        if !y.is_finite() {
            return Err(Error::NonFinite {
                last_good_time: t0.as_f64(),
            });
        }
    }
    let tr = y.trace().re;
    Ok(y.hermitian_part().scale_re(T::one() / tr))
}

/// Runs the noise-free, noisy and recovered evolutions of `|0…0⟩_L` side by
/// side. The recovered run applies the Petz channel of the bare noise over
/// `δt` after every driven interval.
pub fn strobe_run<T: Real>(
    code: &CodeBasis<T>,
    terms: &[DriveTerm<T>],
    noise: &NoiseModel<T>,
    opts: &StrobeOptions<T>,
) -> Result<StrobeReport<T>> {
    let intervals = opts.intervals()?;
    if noise.dim() != code.physical_dim() {
        return Err(Error::DimensionMismatch {
            context: "strobe_run",
            expected: code.physical_dim(),
            found: noise.dim(),
        });
    }
    let n_logical = code
        .n_logical()
        .ok_or_else(|| Error::InvalidArgument(format!("logical dimension {} is not 2^n", code.dim())))?;
    let drive = LogicalDrive::new(terms, code)?;
    let jumps = noise.jumps()?;
    let n_dt = noise.channel(opts.dt)?;
    let recovery = PetzMap::new(&n_dt, &code.maximally_mixed(), opts.eps)?;
    let observables: Vec<PauliString> = PauliString::all(n_logical).collect();
    let lifted: Vec<Operator<T>> = observables
        .iter()
        .map(|p| code.logical_pauli(p))
        .collect::<Result<_>>()?;

    let init = code.transition(0, 0);
    let mut states = [init.clone(), init.clone(), init];
    let mut report = StrobeReport {
        times: Vec::with_capacity(intervals + 1),
        values: std::array::from_fn(|_| vec![Vec::with_capacity(intervals + 1); observables.len()]),
        observables,
        fidelity_noisy: Vec::with_capacity(intervals + 1),
        fidelity_recovered: Vec::with_capacity(intervals + 1),
    };
    let record = |report: &mut StrobeReport<T>, states: &[Operator<T>; 3], t: T| -> Result<()> {
        report.times.push(t);
        for (v, rho) in states.iter().enumerate() {
            for (j, p) in lifted.iter().enumerate() {
                report.values[v][j].push(p.trace_product(rho).re);
            }
        }
        report.fidelity_noisy.push(uhlmann_fidelity(&states[0], &states[1])?);
        report.fidelity_recovered.push(uhlmann_fidelity(&states[0], &states[2])?);
        Ok(())
    };
    record(&mut report, &states, T::zero())?;
    for k in 0..intervals {
        let t0 = opts.dt * T::from_usize(k).unwrap();
        states[0] = driven_step(&drive, &[], &states[0], t0, opts.dt, opts.substeps)?;
        states[1] = driven_step(&drive, &jumps, &states[1], t0, opts.dt, opts.substeps)?;
        let noisy = driven_step(&drive, &jumps, &states[2], t0, opts.dt, opts.substeps)?;
        let rec = recovery.apply(&noisy)?.hermitian_part();
        let tr = rec.trace().re;
        if !(tr > T::zero()) || !rec.is_finite() {
            return Err(Error::NonFinite {
                last_good_time: t0.as_f64(),
            });
        }
        states[2] = rec.scale_re(T::one() / tr);
        record(&mut report, &states, t0 + opts.dt)?;
    }
    Ok(report)
}
