//! Temporal Hanbury Brown–Twiss measurement.
//!
//! A thermal intensity trace with coherence time `τ0` drives two photon
//! counters; a start–stop converter histograms the delay from each start to
//! the first following stop, and `g²(τ)` is recovered from the histogram.
//!
//! This module works in `f64` only: event times span many orders of
//! magnitude (sub-picosecond jitter over millisecond runs).

mod detector;
mod g2;
mod hbt;
mod histogram;
mod trace;

pub use detector::{thin_photons, DetectorSpec, PhotonThinner};
pub use g2::{estimate_coherence_time, estimate_g2, G2Estimate};
pub use hbt::{simulate_arrivals, simulate_hbt, ArrivalPair, HbtConfig};
pub use histogram::{start_stop_histogram, CoincidenceHistogram};
pub use trace::{simulate_intensity_trace, ThermalTrace};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent generator for one purpose (`stream`) under `seed`.
pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
