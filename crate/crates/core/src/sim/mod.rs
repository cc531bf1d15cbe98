//! Circuit simulators: exact state-vector and density-matrix evaluation, and
//! seeded trajectory sampling.

mod density;
mod exact;
mod noise;
mod statevector;
mod trajectory;
mod variant;

pub use density::DensityMatrix;
pub use exact::{
    simulate_exact, simulate_exact_capped, simulate_exact_noisy, DEFAULT_DENSITY_CAP, DEFAULT_EXACT_CAP,
};
pub use noise::{NoiseModel, QubitNoise};
pub use statevector::{gate_matrix, StateVector};
pub use trajectory::{derive_seed, sample_counts, simulate_noisy, Counts, DEFAULT_TRAJECTORY_CAP};
pub use variant::{run_variant, ExecMode, VariantResult};
