// Build a BM25 index over a small corpus, query it, and persist it as a
// BMIX file.
//
//     cargo run --example bm25_search

use std::error::Error;

use ttsfc::retrieval::{build_index, load_index, save_index, Bm25Params, EvidenceDoc};

pub fn run() -> Result<(), Box<dyn Error>> {
    let corpus = [
        ("pf-1", "The unemployment rate fell to 3.1 percent in the city last year."),
        ("pf-2", "City officials reported unemployment near 4 percent."),
        ("pf-3", "The state budget devoted 40 percent to education."),
        ("pf-4", "Education spending rose while the budget shrank."),
        ("pf-5", "A new bridge opened downtown."),
    ];
    let docs: Vec<EvidenceDoc> = corpus.iter().map(|(id, text)| EvidenceDoc::new(*id, *text)).collect();
    let index = build_index(docs, Bm25Params::default())?;
    println!("{} documents, {} terms", index.doc_count(), index.terms().count());

    for query in ["unemployment rate in the city", "education budget"] {
        println!("\n{query}");
        for (doc_id, score) in index.search(query, 3) {
            println!("  {doc_id}  {score:.4}");
        }
    }

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("corpus.bmix");
    save_index(&path, &index)?;
    let reloaded = load_index(&path)?;
    assert_eq!(reloaded.search("education", 5), index.search("education", 5));
    println!("\nsaved and reloaded {} bytes", std::fs::metadata(&path)?.len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
