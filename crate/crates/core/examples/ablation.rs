//! Train every ablation variant on a noisy planted corpus and compare NMI.
//!
//! Usage: cargo run --release --example ablation [-- SEEDS]

use arladv::cli::ablation_variants;
use arladv::metrics::score;
use arladv::synth::PlantedConfig;
use arladv::trainer::{train, TrainConfig};

fn main() -> arladv::Result<()> {
    let seeds: u64 = std::env::args()
        .nth(1)
        .map_or(3, |s| s.parse().expect("seed count"));
    let corpus = PlantedConfig {
        background_noise: 0.2,
        ..PlantedConfig::default()
    }
    .generate()
    .corpus()?;
    let labels = corpus.labels.clone().expect("planted labels");
    let base = TrainConfig {
        clusters: 5,
        dim: 32,
        ..TrainConfig::default()
    };
    for (name, config) in ablation_variants(&base) {
        let mut nmis = Vec::new();
        for seed in 1..=seeds {
            let (_, result) = train(
                &corpus,
                &TrainConfig {
                    seed,
                    ..config.clone()
                },
            )?;
            nmis.push(score(&labels, &result.assignments)?.nmi);
        }
        let mean = nmis.iter().sum::<f64>() / nmis.len() as f64;
        println!("{name:<22} mean NMI {mean:.4}");
    }
    Ok(())
}
