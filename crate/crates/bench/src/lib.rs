//! Fixtures shared by the benchmarks in `benches/`.

use tourlens::simulate::{gen_dla_tree, TreeParams};
use tourlens::DataMatrix;

/// A tree dataset of `n` rows in `p` columns with a fixed seed.
pub fn tree(n: usize, p: usize) -> DataMatrix {
    gen_dla_tree(&TreeParams {
        n,
        p,
        seed: 17,
        ..Default::default()
    })
    .expect("valid tree parameters")
    .data
}
