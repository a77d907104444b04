//! Benchmark groupers adapted to the per-slot NSD setting: gain-sorted
//! clustering (online) and independent-set pairing (offline, `M = 2`).

mod ath;
mod zz;

pub use ath::{ath_clusters, ath_frame};
pub use zz::{zz_frame, PairGraph, PairNode};
