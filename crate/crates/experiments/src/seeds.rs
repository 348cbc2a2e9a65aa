use robust_lowrank::rng::{derive_key, tag};

/// Seed of trial `trial` in grid cell `(p_idx, m_idx)`; independent of how
/// trials are scheduled.
pub fn trial_seed(base: u64, p_idx: usize, m_idx: usize, trial: usize) -> u64 {
    derive_key(&[base, tag::TRIAL, p_idx as u64, m_idx as u64, trial as u64])
}
