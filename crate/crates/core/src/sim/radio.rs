use super::config::PathLoss;

/// Mean received power in dBm at `distance_m`, plus a shadowing offset.
pub fn received_power_dbm(distance_m: f64, pl: &PathLoss, shadowing_db: f64) -> f64 {
    let d = distance_m.max(1e-3);
    pl.pr_d0_dbm - 10.0 * pl.eta * (d / pl.d0_m).log10() + shadowing_db
}

/// Probability that a packet is received.
///
/// Each packet sees an extra Normal(0, sigma_db) fade and is received iff
/// the faded power exceeds the sensitivity, so the ratio is
/// `Phi((P_r - sensitivity) / sigma_db)`.
pub fn link_prr(distance_m: f64, pl: &PathLoss, shadowing_db: f64) -> f64 {
    let margin = received_power_dbm(distance_m, pl, shadowing_db) - pl.sensitivity_dbm;
    if pl.sigma_db == 0.0 {
        return if margin > 0.0 { 1.0 } else { 0.0 };
    }
    let z = margin / pl.sigma_db;
    (0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)).clamp(0.0, 1.0)
}
