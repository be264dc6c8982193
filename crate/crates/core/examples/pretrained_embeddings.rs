//! Initialize word embeddings from a word2vec text file.
//!
//! Writes topic-informative vectors for a planted corpus, then trains from
//! them. With informative initial vectors the planted partition survives
//! training in every mode.

use arladv::embeddings::{load_word2vec, write_word2vec};
use arladv::metrics::score;
use arladv::synth::PlantedConfig;
use arladv::trainer::{train, Init, Mode, TrainConfig};

fn main() -> arladv::Result<()> {
    let planted = PlantedConfig::default();
    let corpus = planted.generate().corpus()?;
    let labels = corpus.labels.clone().expect("planted labels");
    let dir = std::env::temp_dir().join("arladv-pretrained-example");
    std::fs::create_dir_all(&dir).map_err(|e| arladv::Error::Config(e.to_string()))?;
    let path = dir.join("vectors.txt");
    let vectors = planted.informative_embeddings(&corpus.vocabulary, 32, 1.0, 0.5);
    write_word2vec(&path, &corpus.vocabulary, vectors.view())?;
    println!(
        "wrote {} vectors to {}",
        load_word2vec(&path)?.len(),
        path.display()
    );

    for mode in Mode::ALL {
        let config = TrainConfig {
            clusters: 5,
            dim: 32,
            mode,
            init: Init::Pretrained(path.clone()),
            ..TrainConfig::default()
        };
        let (_, result) = train(&corpus, &config)?;
        let s = score(&labels, &result.assignments)?;
        println!(
            "{mode:<14} nmi {:.4} mean max prob {:.4}",
            s.nmi,
            result.mean_max_prob()
        );
    }
    Ok(())
}
