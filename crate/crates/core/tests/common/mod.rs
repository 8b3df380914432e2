#![allow(dead_code)]

use frankfit::{BivariateSample, UnitPair};

/// The fixed 25-pair dataset drawn at θ = 1.
pub const FIXED_SAMPLE: [(f64, f64); 25] = [
    (0.2876, 0.7468),
    (0.4090, 0.8699),
    (0.9405, 0.0713),
    (0.5281, 0.8920),
    (0.5514, 0.4700),
    (0.9568, 0.5657),
    (0.6776, 0.6132),
    (0.1029, 0.8543),
    (0.2461, 0.0342),
    (0.3279, 0.9445),
    (0.8895, 0.7651),
    (0.6405, 0.9948),
    (0.6557, 0.7358),
    (0.5441, 0.6027),
    (0.2892, 0.1259),
    (0.9630, 0.9340),
    (0.6907, 0.8209),
    (0.0246, 0.3652),
    (0.7585, 0.2672),
    (0.3182, 0.2048),
    (0.1428, 0.3343),
    (0.4137, 0.3518),
    (0.1524, 0.1053),
    (0.2330, 0.4025),
    (0.2660, 0.8230),
];

pub fn fixed_sample() -> BivariateSample {
    FIXED_SAMPLE.iter().map(|&(a, b)| UnitPair::new(a, b).unwrap()).collect()
}

pub fn sample_of(pairs: &[(f64, f64)]) -> BivariateSample {
    pairs.iter().map(|&(a, b)| UnitPair::new(a, b).unwrap()).collect()
}
