//! Save trained parameters and reload them for inference.

use arladv::checkpoint::Checkpoint;
use arladv::synth::PlantedConfig;
use arladv::trainer::{extract_assignments, train, TrainConfig};

fn main() -> arladv::Result<()> {
    let corpus = PlantedConfig {
        documents: 200,
        ..PlantedConfig::default()
    }
    .generate()
    .corpus()?;
    let config = TrainConfig {
        clusters: 5,
        dim: 16,
        epochs: 5,
        ..TrainConfig::default()
    };
    let (params, result) = train(&corpus, &config)?;

    let path = std::env::temp_dir().join("arladv-checkpoint-example.json");
    Checkpoint::new(&params, &corpus.vocabulary, &config).save(&path)?;
    let loaded = Checkpoint::load(&path)?;
    loaded.check_vocabulary(&corpus.vocabulary)?;
    let again = extract_assignments(&loaded.params()?, &corpus);
    println!(
        "saved {} ({}x{} words, {} clusters); reloaded assignments identical: {}",
        path.display(),
        loaded.dim,
        loaded.vocab_size,
        loaded.num_clusters,
        again.assignments == result.assignments
    );
    Ok(())
}
