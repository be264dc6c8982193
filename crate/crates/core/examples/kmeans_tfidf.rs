//! The TF-IDF + k-means baseline on a planted corpus.

use arladv::metrics::score;
use arladv::synth::PlantedConfig;
use arladv::trainer::{baseline_kmeans_tfidf, TrainConfig};

fn main() -> arladv::Result<()> {
    let corpus = PlantedConfig::default().generate().corpus()?;
    let labels = corpus.labels.clone().expect("planted labels");
    for seed in 1..=3 {
        let config = TrainConfig {
            clusters: 5,
            seed,
            ..TrainConfig::default()
        };
        let result = baseline_kmeans_tfidf(&corpus, &config)?;
        let s = score(&labels, &result.assignments)?;
        println!(
            "seed {seed}: nmi {:.4} ari {:.4} acc {:.4}",
            s.nmi, s.ari, s.acc
        );
    }
    Ok(())
}
