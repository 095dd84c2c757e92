//! Fixtures shared by the benchmarks.

use std::f64::consts::PI;

use loopsteer::SystemParams;

/// Strong-coupling point with constructive interference.
pub fn constructive_point() -> SystemParams {
    SystemParams::new(1.0, 1.0, 5.0, 1.5, 1.5 * PI, 8.3, 10.0)
}

/// Weak-coupling thermal point at a general phase.
pub fn thermal_point() -> SystemParams {
    SystemParams {
        nbar_c: 2.0,
        ..SystemParams::new(1.0, 1.0, 2.0, 0.4, 1.0, 3.2, 5.0)
    }
}
