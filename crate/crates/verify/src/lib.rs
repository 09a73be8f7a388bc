//! The ten acceptance criteria of the necklace toolkit, shared by the
//! `necklace verify` subcommand and the `acceptance` test target, plus the
//! rayon-backed batch helpers used by both.

use std::time::Instant;

mod criteria;
pub mod parallel;

pub use parallel::{init_threads, nodal_mesh_par, RayonMap, THREADS_ENV};

/// Seed used when the caller does not supply one.
pub const DEFAULT_SEED: u64 = 2024;

/// Criteria run by `verify --quick`: everything except the reduced-energy
/// minimisation and the nodal mesh at resolution 192.
pub const QUICK: [u8; 8] = [1, 2, 3, 4, 5, 6, 7, 8];

/// All criteria in order.
pub const ALL: [u8; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

/// Result of one criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    /// Measured quantities; deterministic for a fixed seed.
    pub detail: String,
    /// Wall-clock time.
    pub seconds: f64,
}

/// Short name of criterion `id`, or `None` outside `1..=10`.
pub fn criterion_name(id: u8) -> Option<&'static str> {
    criteria::TABLE.iter().find(|c| c.0 == id).map(|c| c.1)
}

/// Runs criterion `id` with the given sampling seed.
///
/// # Panics
/// If `id` is not in `1..=10`.
pub fn run_criterion(id: u8, seed: u64) -> Outcome {
    let &(_, name, f) = criteria::TABLE.iter().find(|c| c.0 == id).expect("criterion id in 1..=10");
    let start = Instant::now();
    let (pass, detail) = match f(seed) {
        Ok(c) => (c.pass, c.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    Outcome { id, name, pass, detail, seconds: start.elapsed().as_secs_f64() }
}

/// Runs the given criteria in order, calling `on_done` after each one.
pub fn run_all<F: FnMut(&Outcome)>(ids: &[u8], seed: u64, mut on_done: F) -> Vec<Outcome> {
    ids.iter()
        .map(|&id| {
            let o = run_criterion(id, seed);
            on_done(&o);
            o
        })
        .collect()
}
