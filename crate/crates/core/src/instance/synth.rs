use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Instance, Masks, NbsType, ObjectiveWeights, Population, UcMeasure};
use crate::catalog;
use crate::error::InstanceError;
use crate::grid::{Cell, GridDims, Matrix};
use crate::kernel::default_kernel_set;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub dims: GridDims,
    pub nbs_count: usize,
    pub measure_count: usize,
    pub forbidden_fraction: f64,
    pub pre_existing_fraction: f64,
}

impl SyntheticConfig {
    pub fn new(seed: u64, dims: GridDims) -> Self {
        Self {
            seed,
            dims,
            nbs_count: 4,
            measure_count: 4,
            forbidden_fraction: 0.4,
            pre_existing_fraction: 0.05,
        }
    }
}

/// Sum of a few Gaussian bumps, normalized to a peak of one.
fn bump_surface(rng: &mut ChaCha8Rng, dims: GridDims) -> Matrix<f64> {
    let (w, h) = (dims.width as f64, dims.height as f64);
    let scale = w.max(h);
    let bumps: Vec<(f64, f64, f64, f64)> = (0..rng.gen_range(2..=5))
        .map(|_| {
            (
                rng.gen_range(0.0..w),
                rng.gen_range(0.0..h),
                rng.gen_range(0.1..0.35) * scale + 0.5,
                rng.gen_range(0.3..1.0),
            )
        })
        .collect();
    let raw = Matrix::from_fn(dims.width, dims.height, |i, j| {
        bumps
            .iter()
            .map(|&(ci, cj, sigma, amp)| {
                let d2 = (i as f64 - ci).powi(2) + (j as f64 - cj).powi(2);
                amp * (-d2 / (2.0 * sigma * sigma)).exp()
            })
            .sum::<f64>()
    });
    let peak = raw.max().unwrap_or(1.0).max(f64::MIN_POSITIVE);
    raw.map(|&v| v / peak)
}

/// Deterministic random instance drawn from the catalog.
///
/// Observed fields are smooth bump surfaces plus uniform noise, clipped at
/// zero. Each cell is forbidden for every type with probability
/// `forbidden_fraction`, otherwise pre-existing for one random type with
/// probability `pre_existing_fraction`.
pub fn generate_synthetic(cfg: &SyntheticConfig) -> Result<Instance, InstanceError> {
    let bad = |msg: String| Err(InstanceError::Generator(msg));
    let (f, p) = (cfg.forbidden_fraction, cfg.pre_existing_fraction);
    if !(0.0..=1.0).contains(&f) || !(0.0..=1.0).contains(&p) || f + p > 1.0 + 1e-12 {
        return bad(format!(
            "fractions must lie in [0, 1] and sum to at most 1, got {f} and {p}"
        ));
    }
    if cfg.nbs_count == 0 || cfg.nbs_count > catalog::NBS_IDS.len() {
        return bad(format!(
            "nbs count must be in 1..={}, got {}",
            catalog::NBS_IDS.len(),
            cfg.nbs_count
        ));
    }
    if cfg.measure_count > catalog::MEASURE_IDS.len() {
        return bad(format!(
            "measure count must be at most {}, got {}",
            catalog::MEASURE_IDS.len(),
            cfg.measure_count
        ));
    }
    cfg.dims
        .validate()
        .map_err(|e| InstanceError::Generator(e.to_string()))?;
    let dims = cfg.dims;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut nbs_pick = sample(&mut rng, catalog::NBS_IDS.len(), cfg.nbs_count).into_vec();
    nbs_pick.sort_unstable();
    let mut measure_pick =
        sample(&mut rng, catalog::MEASURE_IDS.len(), cfg.measure_count).into_vec();
    measure_pick.sort_unstable();

    let nbs: Vec<NbsType> = nbs_pick
        .iter()
        .map(|&t| {
            let info = &catalog::NBS_CATALOG[t];
            NbsType {
                id: info.id.into(),
                name: info.name.into(),
                unit_cost: info.total_per_m2 * dims.cell_area(),
            }
        })
        .collect();

    let measures: Vec<UcMeasure> = measure_pick
        .iter()
        .map(|&u| {
            let info = &catalog::MEASURE_CATALOG[u];
            let (lo, hi) = info.observed_range;
            let base = lo.max(0.0);
            let span = hi - base;
            let surface = bump_surface(&mut rng, dims);
            let field = surface
                .map(|&s| (base + 0.85 * span * s + 0.15 * span * rng.gen::<f64>()).max(0.0));
            UcMeasure {
                id: info.id.into(),
                unit: info.unit.into(),
                field,
                delta: None,
            }
        })
        .collect();

    let set = default_kernel_set();
    let kernels = measures
        .iter()
        .map(|m| {
            nbs.iter()
                .map(|n| {
                    set.measure_kernel(&m.id, &n.id)
                        .expect("catalog pair")
                        .clone()
                })
                .collect()
        })
        .collect();
    let fairness_kernels = nbs
        .iter()
        .map(|n| set.fairness_kernel(&n.id).expect("catalog nbs").clone())
        .collect();

    let mut masks = Masks::empty(dims, nbs.len());
    for c in dims.cells().collect::<Vec<Cell>>() {
        let r: f64 = rng.gen();
        if r < f {
            for layer in &mut masks.forbidden {
                *layer.at_mut(c) = true;
            }
        } else if r < f + p {
            let t = rng.gen_range(0..nbs.len());
            *masks.pre_existing[t].at_mut(c) = true;
        }
    }

    let density = bump_surface(&mut rng, dims).map(|&s| s + 0.05 * rng.gen::<f64>());
    let population = Population::normalized(density)?;

    let max_cost = nbs.iter().map(|n| n.unit_cost).fold(0.0, f64::max);
    let budget = rng.gen_range(0.30..=0.50) * max_cost * dims.cell_count() as f64;

    let inst = Instance {
        dims,
        weights: ObjectiveWeights::equal(measures.len()),
        clusters: vec![None; nbs.len()],
        nbs,
        measures,
        kernels,
        fairness_kernels,
        masks,
        population,
        budget,
    };
    inst.validate()?;
    Ok(inst)
}

/// Forbids cells, in an order drawn from `seed`, until the exhaustive
/// oracle would face at most `cap` decision units. Cells are forbidden for
/// every type. Existing cluster partitions are dropped; clustering afterwards
/// never adds units. Returns the number of cells forbidden.
pub fn thin_to_units(inst: &mut Instance, cap: usize, seed: u64) -> usize {
    inst.clusters.iter_mut().for_each(|p| *p = None);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells: Vec<Cell> = inst.dims.cells().collect();
    cells.shuffle(&mut rng);
    let mut units = crate::solver::decision_units(inst).count();
    let mut touched = 0;
    while units > cap {
        let Some(c) = cells.pop() else { break };
        let before: usize = (0..inst.nbs.len())
            .filter(|&t| inst.is_eligible(t, c))
            .count();
        if before == 0 {
            continue;
        }
        for layer in &mut inst.masks.forbidden {
            *layer.at_mut(c) = true;
        }
        units -= before;
        touched += 1;
    }
    touched
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(seed: u64) -> SyntheticConfig {
        SyntheticConfig::new(seed, GridDims::new(12, 9))
    }

    #[test]
    fn thinning_reaches_the_cap() {
        let mut inst = generate_synthetic(&cfg(3)).unwrap();
        let mut again = inst.clone();
        thin_to_units(&mut inst, 16, 9);
        assert!(crate::solver::decision_units(&inst).count() <= 16);
        inst.validate().unwrap();
        thin_to_units(&mut again, 16, 9);
        assert_eq!(inst, again);
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(
            generate_synthetic(&cfg(1)).unwrap(),
            generate_synthetic(&cfg(1)).unwrap()
        );
        assert_ne!(
            generate_synthetic(&cfg(1)).unwrap(),
            generate_synthetic(&cfg(2)).unwrap()
        );
    }

    #[test]
    fn fully_forbidden() {
        let c = SyntheticConfig {
            forbidden_fraction: 1.0,
            pre_existing_fraction: 0.0,
            ..cfg(3)
        };
        let inst = generate_synthetic(&c).unwrap();
        for t in 0..inst.nbs.len() {
            assert!(inst.masks.forbidden[t].iter().all(|&b| b));
            assert!(inst.masks.pre_existing[t].iter().all(|&b| !b));
        }
    }

    #[test]
    fn equal_weights_and_budget_range() {
        let inst = generate_synthetic(&cfg(4)).unwrap();
        assert_eq!(inst.measures.len(), 4);
        for &w in inst
            .weights
            .peak
            .iter()
            .chain(&inst.weights.average)
            .chain([&inst.weights.cost, &inst.weights.fairness])
        {
            assert!((w - 0.1).abs() < 1e-15);
        }
        let max_cost = inst.nbs.iter().map(|n| n.unit_cost).fold(0.0, f64::max);
        let ratio = inst.budget / (max_cost * 108.0);
        assert!((0.30..=0.50).contains(&ratio), "{ratio}");
    }

    #[test]
    fn impossible_fractions_rejected() {
        let c = SyntheticConfig {
            forbidden_fraction: 0.8,
            pre_existing_fraction: 0.3,
            ..cfg(1)
        };
        assert!(matches!(
            generate_synthetic(&c),
            Err(InstanceError::Generator(_))
        ));
        let c = SyntheticConfig {
            forbidden_fraction: -0.1,
            ..cfg(1)
        };
        assert!(generate_synthetic(&c).is_err());
    }

    #[test]
    fn fields_nonnegative() {
        let inst = generate_synthetic(&cfg(9)).unwrap();
        for m in &inst.measures {
            assert!(m.field.iter().all(|&v| v >= 0.0 && v.is_finite()));
        }
    }
}
