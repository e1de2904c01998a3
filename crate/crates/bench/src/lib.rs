//! Seeded fixtures shared by the benchmarks.

use qlde::experiment::random_table;
use qlde::mpoly::{interpolate_lde, DataTable};
use qlde::qsim::build_qlde_state;
use qlde::{Field, LdeParams, MultiPoly, QuantumState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub struct Fixture {
    pub params: LdeParams,
    pub data: DataTable,
    pub lde: MultiPoly,
    pub state: QuantumState,
}

/// A random data table over GF(2^a)^d with its LDE and quantum LDE.
pub fn fixture(a: u32, d: usize, h_size: usize, seed: u64) -> Fixture {
    let params = LdeParams::new(Field::with_degree(a).expect("supported degree"), d, h_size).expect("valid parameters");
    let data = random_table(&params, &mut ChaCha8Rng::seed_from_u64(seed)).expect("enumerable domain");
    let lde = interpolate_lde(&params, &data).expect("full table");
    let state = build_qlde_state(&params, &data).expect("full table");
    Fixture { params, data, lde, state }
}
