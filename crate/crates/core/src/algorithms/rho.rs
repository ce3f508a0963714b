//! Per-stage contraction factors of the variance-reduced solvers.

use crate::error::{Error, Result};

fn check_common(eta: f64, m: usize, lipschitz: f64, gamma: f64) -> Result<()> {
    if m == 0 {
        return Err(Error::Usage("inner loop length m must be at least 1".into()));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InfeasibleParameters(format!("gamma = {gamma} must be > 0")));
    }
    if !(lipschitz >= 0.0 && lipschitz.is_finite() && eta.is_finite()) {
        return Err(Error::InfeasibleParameters(format!(
            "eta = {eta}, L = {lipschitz} must be finite and L >= 0"
        )));
    }
    Ok(())
}

/// Contraction factor of the block variance-reduced method; needs `eta > 2L`.
pub fn compute_rho_orbcdvd(eta: f64, m: usize, lipschitz: f64, gamma: f64, num_blocks: usize) -> Result<f64> {
    check_common(eta, m, lipschitz, gamma)?;
    if num_blocks == 0 {
        return Err(Error::Usage("J must be at least 1".into()));
    }
    if eta <= 2.0 * lipschitz {
        return Err(Error::InfeasibleParameters(format!(
            "eta = {eta} must exceed 2L = {}",
            2.0 * lipschitz
        )));
    }
    let (l, m, j) = (lipschitz, m as f64, num_blocks as f64);
    let denom = (eta - 2.0 * l) * m;
    Ok(l * (m + 1.0) / denom + (eta - l) * j / denom - 1.0 / m
        + eta * (eta - l) * j / (denom * gamma))
}

/// Contraction factor of proximal SVRG with step `1/eta`; needs `eta > 4L`.
pub fn compute_rho_svrg(eta: f64, m: usize, lipschitz: f64, gamma: f64) -> Result<f64> {
    check_common(eta, m, lipschitz, gamma)?;
    if eta <= 4.0 * lipschitz {
        return Err(Error::InfeasibleParameters(format!(
            "eta = {eta} must exceed 4L = {}",
            4.0 * lipschitz
        )));
    }
    let (l, m) = (lipschitz, m as f64);
    let denom = (eta - 4.0 * l) * m;
    Ok(eta * eta / (gamma * denom) + 4.0 * l * (m + 1.0) / denom)
}

/// `ceil(18 J L / gamma)`, the inner-loop length that makes the block
/// variance-reduced rate a constant below one at `eta = 4L`.
pub fn auto_inner_length(num_blocks: usize, lipschitz: f64, gamma: f64) -> Result<usize> {
    if !(gamma > 0.0 && gamma.is_finite()) || !(lipschitz > 0.0 && lipschitz.is_finite()) {
        return Err(Error::InfeasibleParameters(format!(
            "automatic m needs L > 0 and gamma > 0 (got L = {lipschitz}, gamma = {gamma})"
        )));
    }
    let m = (18.0 * num_blocks as f64 * (lipschitz / gamma)).ceil();
    Ok((m as usize).max(1))
}
