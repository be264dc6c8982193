//! Fast-gradient perturbation of the cluster embeddings versus a random
//! perturbation of the same size.

use arladv::corpus::EncodedDocument;
use arladv::model::{
    adversarial_step, objective_j1, objective_j2, ModelParams, ObjectiveConfig, Perturbation,
};
use arladv::trainer::sample_negatives;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> arladv::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let params = ModelParams::new(
        Array2::from_shape_fn((8, 30), |_| rng.random_range(-1.0..1.0)),
        Array2::from_shape_fn((8, 4), |_| rng.random_range(-1.0..1.0)),
    )?;
    let batch: Vec<EncodedDocument> = (0..6)
        .map(|i| EncodedDocument::new(i, (0..5).map(|_| rng.random_range(0..30)).collect()))
        .collect();
    let negatives = sample_negatives(6, 5, &mut rng);

    for epsilon in [0.1, 0.5, 2.0] {
        let cfg = ObjectiveConfig {
            epsilon,
            ..ObjectiveConfig::default()
        };
        let adv = adversarial_step(&params, &batch, &negatives, &cfg)?;
        let random = Perturbation::random_sphere(8, 4, epsilon, &mut rng);
        println!(
            "eps {epsilon}: J1 {:.4}, J2 adversarial {:.4}, J2 random {:.4}, column norms {:?}",
            objective_j1(&params, &batch, &negatives, &cfg)?,
            objective_j2(&params, &adv, &batch, &negatives, &cfg)?,
            objective_j2(&params, &random, &batch, &negatives, &cfg)?,
            adv.column_norms()
                .iter()
                .map(|n| format!("{n:.3}"))
                .collect::<Vec<_>>()
        );
    }
    Ok(())
}
