//! Rayon-backed batch evaluation.

use std::sync::Once;

use necklace_core::crown::Profile;
use necklace_core::energy::BatchMap;
use necklace_core::nodal::{nodal_slab, Bbox, NodalMesh, MIN_RESOLUTION};
use necklace_core::{Error, Result};
use rayon::prelude::*;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "NECKLACE_THREADS";

static POOL: Once = Once::new();

/// Sizes the global pool from `NECKLACE_THREADS` on first use. Invalid or
/// zero values fall back to rayon's default.
pub fn init_threads() {
    POOL.call_once(|| {
        let n = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&n| n > 0);
        if let Some(n) = n {
            // A pool built earlier by the host program wins.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    });
}

/// [`BatchMap`] over the global rayon pool; results keep index order.
#[derive(Debug, Clone, Copy, Default)]
pub struct RayonMap;

impl BatchMap for RayonMap {
    fn map(&self, n: usize, f: &(dyn Fn(usize) -> f64 + Sync)) -> Vec<f64> {
        init_threads();
        (0..n).into_par_iter().map(f).collect()
    }
}

/// [`necklace_core::nodal::nodal_mesh`] with slabs scanned in parallel.
/// The result is identical to the sequential scan.
pub fn nodal_mesh_par<P: Profile + Sync + ?Sized>(profile: &P, bbox: Bbox, resolution: usize) -> Result<NodalMesh> {
    if resolution < MIN_RESOLUTION {
        return Err(Error::Domain("nodal mesh resolution must be at least 16"));
    }
    init_threads();
    let slabs: Vec<_> = (0..=resolution).into_par_iter().map(|i| nodal_slab(profile, bbox, resolution, i)).collect();
    Ok(NodalMesh::from_slabs(bbox, resolution, slabs))
}
