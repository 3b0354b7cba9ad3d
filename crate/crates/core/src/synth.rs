//! Seeded synthetic score tables.
//!
//! Each configuration gets a latent quality per dataset mixing a shared
//! component (weight `rho`) with a dataset-specific one, so `rho = 1` makes
//! every dataset agree on the ordering and `rho = 0` makes them independent.
//! Scores are `100 * sigmoid(latent)`, always in `(0, 100)`.

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};
use crate::model::{ConfigSpace, Context, Hyperparameter, Kind, ScoreRecord, ScoreTable, Split};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOptions {
    pub datasets: usize,
    pub train_sizes: Vec<u64>,
    /// Cross-dataset correlation of configuration quality, in `[0, 1]`.
    pub rho: f64,
    /// Spread of latent quality; larger values separate configurations more.
    pub scale: f64,
    /// Standard deviation of the per-training-size perturbation.
    pub size_noise: f64,
    /// Standard deviation of validation noise around the test latent.
    pub split_noise: f64,
    /// Fraction of records dropped at random, for partial grids.
    pub drop_rate: f64,
    pub seed: u64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            datasets: 10,
            train_sizes: vec![1000, 10000],
            rho: 0.6,
            scale: 1.0,
            size_noise: 0.2,
            split_noise: 0.1,
            drop_rate: 0.0,
            seed: 0,
        }
    }
}

pub fn dataset_name(i: usize) -> String {
    format!("ds{:02}", i + 1)
}

/// Space of categorical hyperparameters `h1, h2, ...` with the given domain
/// sizes and values `v1, v2, ...`.
pub fn synth_space(domain_sizes: &[usize]) -> Result<ConfigSpace> {
    let hps = domain_sizes
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let values: Vec<String> = (1..=n).map(|v| format!("v{v}")).collect();
            Hyperparameter::new(format!("h{}", i + 1), Kind::Categorical, &values)
        })
        .collect::<Result<Vec<_>>>()?;
    ConfigSpace::new("synthetic", hps)
}

fn check(options: &SynthOptions) -> Result<()> {
    let bad = |what: &str| Err(Error::InvalidArgument(what.to_string()));
    if options.datasets == 0 {
        return bad("datasets must be at least 1");
    }
    if options.train_sizes.is_empty() || options.train_sizes.contains(&0) {
        return bad("train sizes must be non-empty and positive");
    }
    if !(0.0..=1.0).contains(&options.rho) {
        return bad("rho must lie in [0, 1]");
    }
    if !(0.0..1.0).contains(&options.drop_rate) {
        return bad("drop rate must lie in [0, 1)");
    }
    for (name, v) in [
        ("scale", options.scale),
        ("size noise", options.size_noise),
        ("split noise", options.split_noise),
    ] {
        if !v.is_finite() || v < 0.0 {
            return bad(&format!("{name} must be finite and non-negative"));
        }
    }
    Ok(())
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn synth_table(space: &ConfigSpace, options: &SynthOptions) -> Result<ScoreTable> {
    check(options)?;
    let grid = space.grid()?;
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(options.seed);
    let normal = |rng: &mut Xoshiro256PlusPlus| -> f64 { rng.sample(StandardNormal) };

    let shared: Vec<f64> = grid.iter().map(|_| normal(&mut rng)).collect();
    let private_weight = (1.0 - options.rho * options.rho).sqrt();
    let mut table = ScoreTable::new(space.clone());
    for d in 0..options.datasets {
        let name = dataset_name(d);
        let offset = 0.5 * normal(&mut rng);
        let latent: Vec<f64> = shared
            .iter()
            .map(|&g| options.rho * g + private_weight * normal(&mut rng))
            .collect();
        for &size in &options.train_sizes {
            let context = Context::new(name.as_str(), size);
            for (config, &q) in grid.iter().zip(&latent) {
                let test = offset + options.scale * (q + options.size_noise * normal(&mut rng));
                let validation = test + options.split_noise * normal(&mut rng);
                for (split, x) in [(Split::Validation, validation), (Split::Test, test)] {
                    // Always draw so that drop_rate does not shift later scores.
                    let u: f64 = rng.random();
                    if u < options.drop_rate {
                        continue;
                    }
                    table.insert(ScoreRecord {
                        context: context.clone(),
                        split,
                        config: config.clone(),
                        score: 100.0 * sigmoid(x),
                    })?;
                }
            }
        }
    }
    Ok(table)
}
