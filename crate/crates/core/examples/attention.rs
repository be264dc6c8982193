//! One forward pass by hand: document embedding, attention over clusters,
//! reconstruction, relevance and the two losses.

use arladv::corpus::EncodedDocument;
use arladv::model::{attention, doc_embed, loss_pairwise, loss_pointwise, reconstruct, relevance};
use ndarray::array;

fn main() -> arladv::Result<()> {
    // K = 2 dimensions, V = 4 words, M = 2 clusters
    let words = array![[1.0, 0.9, 0.0, 0.1], [0.0, 0.1, 1.0, 0.8]];
    let clusters = array![[3.0, 0.0], [0.0, 3.0]];

    let doc = EncodedDocument::new(0, vec![0, 1]);
    let other = EncodedDocument::new(1, vec![2, 3]);
    let d = doc_embed(words.view(), &doc);
    let d_neg = doc_embed(words.view(), &other);
    let attn = attention(clusters.view(), &d);
    let r = reconstruct(clusters.view(), &attn);
    let rel = relevance(&d, &r);

    println!("document embedding {:?}", d.vector.to_vec());
    println!(
        "attention {:?} -> cluster {}",
        attn.probs.to_vec(),
        attn.argmax()
    );
    println!("reconstruction {:?}", r.vector.to_vec());
    println!("relevance {rel:.4}");
    println!(
        "pairwise loss {:.4}",
        loss_pairwise(rel, &[relevance(&d, &d_neg)], 1.0)?
    );
    println!("pointwise loss {:.4}", loss_pointwise(rel));
    Ok(())
}
