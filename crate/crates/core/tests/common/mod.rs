#![allow(dead_code)]

use cocycle_lab::cocycle::{make_schrodinger, right_rotate, GroupTag, RandomProduct, TrigMatrixMap, TrigPoly};
use cocycle_lab::linalg::Matrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn poly(rng: &mut ChaCha8Rng, c0: f64, degree: usize, amp: f64) -> TrigPoly {
    let cos = (0..degree).map(|_| rng.gen_range(-amp..amp)).collect();
    let sin = (0..degree).map(|_| rng.gen_range(-amp..amp)).collect();
    TrigPoly::new(c0, cos, sin)
}

/// `c·I + small degree-`degree` terms`, invertible by diagonal dominance.
pub fn general_map(rng: &mut ChaCha8Rng, d: usize, degree: usize) -> TrigMatrixMap {
    let scale = rng.gen_range(1.5..3.0);
    let amp = 0.6 / (d * (2 * degree + 1)) as f64;
    let entries = (0..d * d)
        .map(|e| {
            let c0 = if e / d == e % d {
                scale
            } else {
                rng.gen_range(-0.5..0.5) / d as f64
            };
            poly(rng, c0, degree, amp)
        })
        .collect();
    TrigMatrixMap::new(d, entries, GroupTag::General).expect("diagonally dominant")
}

/// Schrödinger map rotated on the right by a random angle.
pub fn sl2_map(rng: &mut ChaCha8Rng) -> TrigMatrixMap {
    let c0 = rng.gen_range(-3.0..3.0);
    let phi = poly(rng, c0, 2, 0.8);
    right_rotate(&make_schrodinger(&phi).unwrap(), rng.gen_range(0.0..1.0)).unwrap()
}

pub fn angles(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(0.05..0.95)).collect()
}

pub fn general_tuple(seed: u64, d: usize, n_maps: usize) -> RandomProduct {
    let mut r = rng(seed);
    let maps = (0..n_maps).map(|_| general_map(&mut r, d, 1)).collect();
    let raw: Vec<f64> = (0..n_maps).map(|_| r.gen_range(0.5..1.5)).collect();
    let total: f64 = raw.iter().sum();
    let mut weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let head: f64 = weights[..n_maps - 1].iter().sum();
    weights[n_maps - 1] = 1.0 - head;
    RandomProduct::new(angles(&mut r, n_maps), maps, weights).unwrap()
}

pub fn sl2_tuple(seed: u64, n_maps: usize) -> RandomProduct {
    let mut r = rng(seed);
    let maps = (0..n_maps).map(|_| sl2_map(&mut r)).collect();
    RandomProduct::uniform(angles(&mut r, n_maps), maps).unwrap()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, d: usize) -> Matrix {
    Matrix::from_fn(d, d, |_, _| rng.gen_range(-2.0..2.0))
}
