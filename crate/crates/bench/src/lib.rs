//! Shared inputs for the solver benchmarks.

use qubolin_core::instances::generate_uniform;
use qubolin_core::QuboInstance;

/// Dense random instance with the benchmark coefficient ranges.
pub fn dense_instance(n: usize, seed: u64) -> QuboInstance {
    generate_uniform(n, (-20, 20), (-20, 20), 1.0, seed).expect("valid generator arguments")
}
