#![allow(dead_code)]

use nbsplan::cluster::apply_clustering;
use nbsplan::grid::{Cell, GridDims};
use nbsplan::instance::{instance_from_json, Instance};
use nbsplan::solver::decision_units;
use nbsplan::{generate_synthetic, SyntheticConfig};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const ONE_CELL: &str = r#"{
    "dims": {"width": 1, "height": 1, "resolution": 10.0},
    "nbs": [{"id": "GW", "name": "Green Wall", "unit_cost": 7890.0}],
    "measures": [{"id": "temp_max", "unit": "degC", "field": [[30.0]]}],
    "kernels": [{"measure": "temp_max", "nbs": "GW", "size": [1, 1], "rows": [[2.7]]}],
    "fairness_kernels": [{"nbs": "GW", "size": [1, 1], "rows": [[6.0]]}],
    "forbidden": {"GW": []},
    "pre_existing": {"GW": []},
    "population": [[7.0]],
    "budget": 10000.0,
    "weights": {"peak": {"temp_max": 0.25}, "average": {"temp_max": 0.25}, "cost": 0.25, "fairness": 0.25},
    "clusters": {}
}"#;

pub fn one_cell() -> Instance {
    instance_from_json(ONE_CELL).unwrap()
}

/// Small synthetic instance thinned by forbidding cells until the oracle
/// has at most `cap` decision units. Urban parks, when sampled, are
/// clustered with the default size bounds.
pub fn capped_instance(seed: u64, cap: usize) -> Instance {
    let side = [3, 4, 5, 6][(seed % 4) as usize];
    let mut cfg = SyntheticConfig::new(seed, GridDims::new(side, side));
    cfg.nbs_count = 1 + (seed % 2) as usize;
    cfg.measure_count = 1 + ((seed / 2) % 2) as usize;
    let mut inst = generate_synthetic(&cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let mut cells: Vec<Cell> = inst.dims.cells().collect();
    cells.shuffle(&mut rng);
    let park = inst.nbs_index("UP");
    loop {
        if let Some(t) = park {
            inst.clusters[t] = None;
            apply_clustering(&mut inst, &[t], 5, 50);
        }
        if decision_units(&inst).count() <= cap {
            break;
        }
        let c = cells.pop().expect("forbidding every cell leaves no units");
        for t in 0..inst.nbs.len() {
            if !inst.is_pre_existing(t, c) {
                *inst.masks.forbidden[t].at_mut(c) = true;
            }
        }
    }
    inst.validate().unwrap();
    inst
}
