//! Quantum threshold segmentation of NEQR-encoded gray-scale images.
//!
//! The crate builds reversible circuits that encode an image ([`neqr`]),
//! compare every pixel against a threshold with a reset-reuse comparator
//! ([`comparator`]) and overwrite each band with its output level
//! ([`segmentation`]). Circuits run on a dense statevector simulator
//! ([`statevector`]) or on an exact basis-branch backend ([`tracked`]), and
//! their gate cost is tallied per stage by [`cost`].
//!
//! ```
//! use qiseg::{samples, segmentation, tracked, neqr, ThresholdConfig};
//!
//! let image = samples::demo_4x4();
//! let config = ThresholdConfig::two_threshold(3, 2, 4, None).unwrap();
//! let circuit = segmentation::build_pipeline(&image, &config).unwrap();
//! let map = tracked::run_tracked(&circuit).unwrap();
//! let out = neqr::decode(&map, circuit.layout().unwrap()).unwrap();
//! assert_eq!(out, segmentation::classical_segment(&image, &config).unwrap());
//! ```

pub mod circuit;
pub mod comparator;
pub mod cost;
pub mod image;
pub mod neqr;
pub mod qasm;
pub mod report;
pub mod samples;
pub mod segmentation;
pub mod statevector;
pub mod tracked;

pub use circuit::{Circuit, CircuitError, Control, GateKind, GateOp, Polarity, RegisterLayout};
pub use comparator::{build_comparator, ComparatorSpec};
pub use cost::{quantum_cost, CostLedger, CostSelection};
pub use image::{ImageError, ImageGray};
pub use report::CostReport;
pub use segmentation::{build_pipeline, classical_segment, ThresholdConfig};
pub use statevector::{sample_shots, Histogram, QuantumState};
pub use tracked::{run_tracked, BranchMap};
