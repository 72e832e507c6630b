use super::eigen::{herm_eig, psd_sqrt};
use super::matrix::Operator;
use crate::error::Result;
use crate::scalar::Real;

/// Uhlmann fidelity `F(ρ, σ) = Tr[(√σ ρ √σ)^{1/2}]`, clamped to `[0, 1]`.
///
/// Square roots of round-off sized eigenvalues would cap the accuracy of
/// `1 − F` near pure states, so two closed forms take precedence: for qubits
/// `F² = Tr(ρσ) + 2√(det ρ · det σ)`, and when either argument is pure
/// `F = ⟨ψ|ρ|ψ⟩^{1/2}`.
pub fn uhlmann_fidelity<T: Real>(rho: &Operator<T>, sigma: &Operator<T>) -> Result<T> {
    if rho.rows() == 2 && sigma.rows() == 2 {
        return Ok(qubit_fidelity(rho, sigma));
    }
    if let Some(f) = pure_shortcut(rho, sigma)?.or(pure_shortcut(sigma, rho)?) {
        return Ok(f);
    }
    let s = psd_sqrt(sigma)?;
    let m = s.matmul(rho).matmul(&s).hermitian_part();
    let e = herm_eig(&m)?;
    // eigenvalues at roundoff level would contribute O(√ε) through the root
    let top = e.values.iter().fold(T::zero(), |a, &l| a.max(l.abs()));
    let floor = top * T::epsilon() * T::lit(8.0 * e.dim() as f64);
    let f: T = e.values.iter().filter(|&&l| l > floor).map(|&l| l.sqrt()).sum();
    Ok(f.min(T::one()).max(T::zero()))
}

fn qubit_fidelity<T: Real>(rho: &Operator<T>, sigma: &Operator<T>) -> T {
    let det = |m: &Operator<T>| (m[(0, 0)].re * m[(1, 1)].re - m[(0, 1)].norm_sqr()).max(T::zero());
    let overlap = rho.trace_product(sigma).re;
    let f2 = overlap + T::lit(2.0) * (det(rho) * det(sigma)).sqrt();
    f2.max(T::zero()).sqrt().min(T::one())
}

fn pure_shortcut<T: Real>(pure: &Operator<T>, other: &Operator<T>) -> Result<Option<T>> {
    let e = herm_eig(pure)?;
    let n = e.dim();
    let top = e.values[n - 1];
    let rest: T = e.values[..n - 1].iter().map(|v| v.abs()).sum();
    if rest > T::epsilon() * T::lit(100.0) || (top - T::one()).abs() > T::lit(1e3) * T::epsilon() {
        return Ok(None);
    }
    let psi = e.vectors.column(n - 1);
    let v = other.matvec(&psi);
    let overlap = psi
        .iter()
        .zip(&v)
        .fold(T::zero(), |acc, (a, b)| acc + (a.conj() * b).re);
    Ok(Some(overlap.max(T::zero()).sqrt().min(T::one())))
}

/// Trace distance `½‖ρ − σ‖₁`.
pub fn trace_distance<T: Real>(rho: &Operator<T>, sigma: &Operator<T>) -> Result<T> {
    let e = herm_eig(&(rho - sigma).hermitian_part())?;
    Ok(e.values.iter().map(|v| v.abs()).sum::<T>() * T::lit(0.5))
}
