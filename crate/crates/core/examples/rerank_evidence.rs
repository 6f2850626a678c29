// Rerank BM25 candidates by embedding cosine similarity. Vectors come from
// an in-memory fixture here; `HttpEmbeddings` talks to a real
// `/embeddings` endpoint.
//
//     cargo run --example rerank_evidence

use std::error::Error;

use ttsfc::retrieval::{build_index, rerank, Bm25Params, EvidenceDoc, FixtureEmbeddings};

pub fn run() -> Result<(), Box<dyn Error>> {
    let docs = vec![
        EvidenceDoc::new("a", "Wind turbines supplied a quarter of the region's power."),
        EvidenceDoc::new("b", "Power prices in the region rose by a quarter."),
        EvidenceDoc::new("c", "Solar and wind together supplied 40 percent of power."),
    ];
    let claim = "Wind power supplied a quarter of the region's electricity.";
    let index = build_index(docs.clone(), Bm25Params::default())?;
    let candidates = index.search_docs(claim, 10);
    println!("bm25 order:   {:?}", candidates.iter().map(|d| d.doc_id.as_str()).collect::<Vec<_>>());

    // toy 3-d embeddings: axis 0 = wind, axis 1 = prices, axis 2 = solar
    let embeddings = FixtureEmbeddings::new([
        (claim.to_string(), vec![0.9, 0.1, 0.1]),
        (docs[0].text.clone(), vec![0.95, 0.05, 0.0]),
        (docs[1].text.clone(), vec![0.1, 0.99, 0.0]),
        (docs[2].text.clone(), vec![0.6, 0.0, 0.8]),
    ]);
    let ranked = rerank("claim-1", claim, &candidates, 2, &embeddings)?;
    for hit in &ranked.hits {
        println!("reranked:     {}  cos={:.4}", hit.doc_id, hit.score);
    }
    assert_eq!(ranked.hits[0].doc_id, "a");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
