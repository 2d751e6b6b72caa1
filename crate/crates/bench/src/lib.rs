//! Fixtures shared by the benchmarks.

use qiseg::{build_pipeline, samples, Circuit, ThresholdConfig};

/// Two-threshold pipeline over the 4×4 demo image.
pub fn demo_pipeline() -> Circuit {
    let config = ThresholdConfig::two_threshold(3, 2, 4, None).expect("valid thresholds");
    build_pipeline(&samples::demo_4x4(), &config).expect("pipeline builds")
}
