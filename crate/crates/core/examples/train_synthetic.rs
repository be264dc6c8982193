//! Train ARL-Adv on a planted five-topic corpus and score it.
//!
//! Usage: cargo run --release --example train_synthetic [-- SEED [MODE]]

use arladv::metrics::score;
use arladv::synth::PlantedConfig;
use arladv::trainer::{train, Mode, TrainConfig};

fn main() -> arladv::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));
    let mode: Mode = args.next().map_or(Ok(Mode::ArlAdv), |s| s.parse())?;

    let corpus = PlantedConfig::default().generate().corpus()?;
    let config = TrainConfig {
        clusters: 5,
        dim: 32,
        batch_size: 64,
        seed,
        mode,
        ..TrainConfig::default()
    };
    let start = std::time::Instant::now();
    let (_, result) = train(&corpus, &config)?;
    let labels = corpus.labels.as_ref().expect("planted labels");
    let s = score(labels, &result.assignments)?;
    println!(
        "mode {mode} seed {seed}: nmi {:.4} ari {:.4} acc {:.4} mean max prob {:.4} ({:.2}s)",
        s.nmi,
        s.ari,
        s.acc,
        result.mean_max_prob(),
        start.elapsed().as_secs_f64()
    );
    println!(
        "objective: first {:.4} last {:.4}",
        result.history.first().copied().unwrap_or(f64::NAN),
        result.history.last().copied().unwrap_or(f64::NAN)
    );
    Ok(())
}
