use std::sync::Arc;

use super::basis::CodeBasis;
use super::noise::NoiseModel;
use crate::error::{Error, Result};
use crate::lindblad::{evolve, propagate, Method, PropagateOptions, Schedule, Superoperator};
use crate::linalg::{sqrt_on_support, Operator};
use crate::petz::experiment::GRADED_LEVELS;
use crate::petz::{build_reverse_generator, petz_channel, reverse_generator_at};
use crate::scalar::Real;

/// Petz recovery of `noise` with reference `π_d^𝒞`, built directly from the
/// channel.
pub fn petz_code_channel<T: Real>(noise: &Superoperator<T>, code: &CodeBasis<T>, eps: T) -> Result<Superoperator<T>> {
    if noise.dim() != code.physical_dim() {
        return Err(Error::DimensionMismatch {
            context: "petz_code_channel",
            expected: code.physical_dim(),
            found: noise.dim(),
        });
    }
    petz_channel(noise, &code.maximally_mixed(), eps)
}

/// The same recovery obtained by integrating the reverse generator along the
/// forward trajectory of `π_d^𝒞` under `model` for time `dt`.
///
/// `steps` uniform intervals are used; when the reference is rank deficient
/// the final backward interval is refined geometrically, as for single
/// trajectories.
pub fn petz_code_channel_continuous<T: Real>(
    model: &NoiseModel<T>,
    dt: T,
    code: &CodeBasis<T>,
    eps: T,
    steps: usize,
) -> Result<Superoperator<T>> {
    let dim = code.physical_dim();
    if model.dim() != dim {
        return Err(Error::DimensionMismatch {
            context: "petz_code_channel_continuous",
            expected: dim,
            found: model.dim(),
        });
    }
    let l = model.lindbladian()?;
    if dt == T::zero() || l.jumps().is_empty() {
        return Ok(Superoperator::identity(dim));
    }
    let pi = code.maximally_mixed();
    let forward = Arc::new(propagate(&l, &pi, T::zero(), dt, steps, PropagateOptions::default())?);
    let zero = Schedule::Constant(Operator::zeros(dim, dim));
    let jumps: Vec<Schedule<T>> = l.jumps().to_vec();
    let rev = build_reverse_generator(forward.clone(), &zero, &jumps, eps)?.lindbladian()?;
    let h = forward.step;
    let half = T::lit(0.5);
    let graded = sqrt_on_support(&pi, eps)?.rank() < sqrt_on_support(&forward.states[1], eps)?.rank();
    let uniform = if graded { steps - 1 } else { steps };
    let mut acc = Superoperator::identity(dim);
    for k in 0..uniform {
        let tm = h * (T::from_usize(k).unwrap() + half);
        acc = rev.to_superoperator(tm).exp(h).compose(&acc);
    }
    if graded {
        let ops: Vec<Operator<T>> = l.jumps().iter().map(|j| j.at(T::zero())).collect();
        let mut hi = h;
        for level in 0..=GRADED_LEVELS {
            let lo = if level == GRADED_LEVELS { T::zero() } else { hi * half };
            let mid = (hi + lo) * half;
            let gamma = evolve(&l, &pi, T::zero(), mid, 1, Method::Dense)?.hermitian_part();
            let g = reverse_generator_at(&gamma, &Operator::zeros(dim, dim), &ops, eps)?;
            acc = g.to_superoperator().exp(hi - lo).compose(&acc);
            hi = lo;
        }
    }
    if !acc.matrix().is_finite() {
        return Err(Error::NonFinite {
            last_good_time: dt.as_f64(),
        });
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_noise_gives_identity_on_code() {
        let code = CodeBasis::<f64>::bit_flip();
        let r = petz_code_channel(&Superoperator::identity(8), &code, 1e-10).unwrap();
        let x = &code.transition(0, 1) + &code.transition(1, 1).scale_re(0.3);
        assert!(r.apply(&x).max_abs_diff(&x) < 1e-14);
        let m = NoiseModel::composite(1.0, 0.2, 3).unwrap();
        let z = petz_code_channel_continuous(&m, 0.0, &code, 1e-10, 10).unwrap();
        assert!(z.max_abs_diff(&Superoperator::identity(8)) < 1e-15);
    }
}
