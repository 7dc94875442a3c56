#![allow(dead_code)]

use polar_idma::polar::InformationSet;
use polar_idma::Bit;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `F^{(x)n}` for `F = [[1, 0], [1, 1]]`, built by explicit Kronecker products.
pub fn kron_power(n: usize) -> Vec<Vec<Bit>> {
    let f = [[1u8, 0], [1, 1]];
    let mut g: Vec<Vec<Bit>> = vec![vec![1]];
    for _ in 0..n {
        let m = g.len();
        let mut next = vec![vec![0; 2 * m]; 2 * m];
        for (a, frow) in f.iter().enumerate() {
            for (b, &fv) in frow.iter().enumerate() {
                for i in 0..m {
                    for j in 0..m {
                        next[a * m + i][b * m + j] = fv & g[i][j];
                    }
                }
            }
        }
        g = next;
    }
    g
}

/// Row vector times matrix over GF(2).
pub fn gf2_mul(u: &[Bit], g: &[Vec<Bit>]) -> Vec<Bit> {
    let mut x = vec![0; g[0].len()];
    for (row, &ui) in g.iter().zip(u) {
        if ui == 1 {
            for (xj, &gj) in x.iter_mut().zip(row) {
                *xj ^= gj;
            }
        }
    }
    x
}

/// Encoding by the generator matrix restricted to the information rows.
pub fn oracle_encode(u: &[Bit], info: &InformationSet, g: &[Vec<Bit>]) -> Vec<Bit> {
    let rows: Vec<Vec<Bit>> = (0..info.len())
        .filter(|&i| info.is_info(i))
        .map(|i| g[i].clone())
        .collect();
    gf2_mul(u, &rows)
}

/// Bits of `m`, least significant first.
pub fn bits_of(m: usize, k: usize) -> Vec<Bit> {
    (0..k).map(|i| ((m >> i) & 1) as Bit).collect()
}

/// Every information set of length `n` with at least one information bit.
pub fn all_codes(n: usize) -> impl Iterator<Item = InformationSet> {
    (1usize..(1 << n)).map(move |m| {
        InformationSet::new((0..n).map(|i| (m >> i) & 1 == 1).collect()).unwrap()
    })
}

pub fn random_bits(len: usize, rng: &mut ChaCha8Rng) -> Vec<Bit> {
    (0..len).map(|_| rng.random_range(0..=1)).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
