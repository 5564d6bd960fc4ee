#![allow(dead_code)]

use qhm_core::lie::{AlgebraVector, GroupElement, LieGroupModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const SEED: u64 = 0xC0FFEE;

pub fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED)
}

pub fn models() -> [LieGroupModel; 3] {
    [LieGroupModel::su2(), LieGroupModel::sl2r(), LieGroupModel::torus(2)]
}

/// Coordinates of `g X g⁻¹` by direct matrix conjugation and re-expansion.
pub fn conjugate_oracle(m: &LieGroupModel, g: &GroupElement, xi: &AlgebraVector) -> AlgebraVector {
    let inv = g.matrix.clone().try_inverse().unwrap();
    m.coords(&(&g.matrix * m.to_matrix(xi) * inv))
}
