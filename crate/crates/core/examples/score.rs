//! NMI, ARI and ACC for two labelings.
//!
//! Usage: cargo run --example score [-- TRUE_FILE PRED_FILE]

use arladv::corpus::read_labels;
use arladv::metrics::{contingency, score};

fn main() -> arladv::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (truth, pred) = if args.len() == 2 {
        (
            read_labels(args[0].as_ref())?,
            read_labels(args[1].as_ref())?,
        )
    } else {
        (vec![0, 0, 0, 1, 1, 1, 2, 2], vec![7, 7, 3, 3, 3, 3, 9, 9])
    };
    let table = contingency(&truth, &pred)?;
    println!("contingency {:?}", table.counts);
    let s = score(&truth, &pred)?;
    println!("nmi {:.4} ari {:.4} acc {:.4}", s.nmi, s.ari, s.acc);
    Ok(())
}
