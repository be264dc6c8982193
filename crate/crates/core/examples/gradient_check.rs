//! Compare analytic gradients of the combined objective with central
//! finite differences on a random instance.

use arladv::corpus::EncodedDocument;
use arladv::model::{adversarial_step, gradients, objective_total, ModelParams, ObjectiveConfig};
use arladv::trainer::sample_negatives;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> arladv::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (k, m, v) = (8, 4, 30);
    let params = ModelParams::new(
        Array2::from_shape_fn((k, v), |_| rng.random_range(-1.0..1.0)),
        Array2::from_shape_fn((k, m), |_| rng.random_range(-1.0..1.0)),
    )?;
    let batch: Vec<EncodedDocument> = (0..6)
        .map(|i| EncodedDocument::new(i, (0..4).map(|_| rng.random_range(0..v)).collect()))
        .collect();
    let negatives = sample_negatives(batch.len(), 5, &mut rng);
    let cfg = ObjectiveConfig {
        epsilon: 0.5,
        ..ObjectiveConfig::default()
    };

    let pert = adversarial_step(&params, &batch, &negatives, &cfg)?;
    let analytic = gradients(&params, &pert, &batch, &negatives, &cfg)?;
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for row in 0..k {
        for col in 0..m {
            let mut plus = params.clone();
            plus.clusters[[row, col]] += h;
            let mut minus = params.clone();
            minus.clusters[[row, col]] -= h;
            let numeric = (objective_total(&plus, &pert, &batch, &negatives, &cfg)?
                - objective_total(&minus, &pert, &batch, &negatives, &cfg)?)
                / (2.0 * h);
            let a = analytic.clusters[[row, col]];
            worst = worst.max((a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6));
        }
        for &t in &batch[0].token_ids {
            let mut plus = params.clone();
            plus.words[[row, t]] += h;
            let mut minus = params.clone();
            minus.words[[row, t]] -= h;
            let numeric = (objective_total(&plus, &pert, &batch, &negatives, &cfg)?
                - objective_total(&minus, &pert, &batch, &negatives, &cfg)?)
                / (2.0 * h);
            let a = analytic.words[[row, t]];
            worst = worst.max((a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6));
        }
    }
    println!("max relative error {worst:.3e}");
    Ok(())
}
