//! Shared fan fixtures for unit tests.

use crate::arith::{q, qi, Q};
use crate::lattice::{LatticePoint, StackyFan, StackyFanData};

/// d = 1: cone over the segment [0,1], rays v1 = (0,1), v2 = (1,1).
pub fn segment() -> StackyFan {
    StackyFan::new(StackyFanData {
        rank: 2,
        points: vec![LatticePoint::from_i64(&[0, 1]), LatticePoint::from_i64(&[1, 1])],
        max_cones: vec![vec![0, 1]],
        psi: vec![qi(0), qi(0)],
    })
    .expect("valid fixture")
}

/// Local P^2: the crepant resolution fan of C^3/Z_3.
pub fn local_p2() -> StackyFan {
    StackyFan::new(StackyFanData {
        rank: 3,
        points: vec![
            LatticePoint::from_i64(&[1, 0, 1]),
            LatticePoint::from_i64(&[0, 1, 1]),
            LatticePoint::from_i64(&[-1, -1, 1]),
            LatticePoint::from_i64(&[0, 0, 1]),
        ],
        max_cones: vec![vec![0, 1, 3], vec![1, 2, 3], vec![0, 2, 3]],
        psi: vec![qi(0), qi(0), qi(0), qi(-1)],
    })
    .expect("valid fixture")
}

/// C^3/Z_3 with the coarse (unsubdivided) cone.
pub fn c3_z3() -> StackyFan {
    StackyFan::new(StackyFanData {
        rank: 3,
        points: vec![
            LatticePoint::from_i64(&[1, 0, 1]),
            LatticePoint::from_i64(&[0, 1, 1]),
            LatticePoint::from_i64(&[-1, -1, 1]),
        ],
        max_cones: vec![vec![0, 1, 2]],
        psi: vec![qi(0), qi(0), qi(0)],
    })
    .expect("valid fixture")
}

pub fn all_fans() -> Vec<(&'static str, StackyFan)> {
    vec![
        ("segment", segment()),
        ("local_p2", local_p2()),
        ("c3_z3", c3_z3()),
    ]
}

/// Convenience: rational vector from (num, den) pairs.
pub fn qs(v: &[(i64, i64)]) -> Vec<Q> {
    v.iter().map(|&(n, d)| q(n, d)).collect()
}
