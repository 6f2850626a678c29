//! Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any
//! fails. Every expected value comes from an oracle written here, not from
//! the library under test.
//!
//!     cargo test --test acceptance

use std::collections::{BTreeMap, HashMap, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ttsfc::complexity::{classify, first_principal_component, fit_prototypes, LatentStack, LayerRange};
use ttsfc::evalkit::{cohen_kappa, cost_report, evaluate, upper_bound};
use ttsfc::gateway::{FrameTemplate, PromptTemplate, ReplayEntry, ReplayTransport, SamplingConfig, WILDCARD_KEY};
use ttsfc::retrieval::{build_index, rerank, tokenize, Bm25Params, EvidenceDoc, FixtureEmbeddings};
use ttsfc::strategies::{select_bon, select_majority, Pipeline, StrategyConfig};
use ttsfc::verifier::{build_training_data, positive_rate, ScoreError, ScoreItem, ScoringProvider};
use ttsfc::{ClaimRecord, Level, ReasoningPath, RunRecord, Strategy, Verdict};

type Check = Result<String, String>;
type Named = (&'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn e2e_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/e2e")
}

// ---------------------------------------------------------------- 1

fn oracle_component(rows: &[Vec<f64>]) -> Vec<f64> {
    let (n, h) = (rows.len(), rows[0].len());
    let x = DMatrix::from_fn(n, h, |i, j| rows[i][j]);
    let mean = x.row_mean();
    let centered = DMatrix::from_fn(n, h, |i, j| x[(i, j)] - mean[j]);
    let cov = centered.transpose() * &centered / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);
    let top = eig.eigenvalues.imax();
    let mut u: Vec<f64> = eig.eigenvectors.column(top).iter().copied().collect();
    let proj: f64 = rows.iter().map(|r| r.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>()).sum();
    if proj < 0.0 {
        u.iter_mut().for_each(|v| *v = -*v);
    }
    u
}

fn cos(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

fn pca_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let started = Instant::now();
    let mut worst = f64::INFINITY;
    for trial in 0..100 {
        let n = rng.gen_range(5..=50);
        let h = rng.gen_range(2..=32);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..h).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let got = first_principal_component(&rows).map_err(|e| format!("trial {trial}: {e}"))?;
        let c = cos(&got.direction, &oracle_component(&rows));
        worst = worst.min(c);
        ensure!(c >= 1.0 - 1e-6, "trial {trial} (n={n}, h={h}): cosine {c}");
    }
    let elapsed = started.elapsed();
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!("min cosine {worst:.12}, {elapsed:.2?}"))
}

// ---------------------------------------------------------------- 2

const LAYERS: usize = 4;
const HIDDEN: usize = 8;

/// Class k puts its energy on axis 2l+k at layer l, with a random scale.
fn separable_stack(rng: &mut ChaCha8Rng, id: String, class: usize) -> LatentStack {
    let mut data = vec![0.0; LAYERS * HIDDEN];
    for l in 0..LAYERS {
        let scale = rng.gen_range(1.0..3.0);
        for j in 0..HIDDEN {
            data[l * HIDDEN + j] = rng.gen_range(-0.1..0.1);
        }
        data[l * HIDDEN + (2 * l + class) % HIDDEN] += scale;
    }
    LatentStack::new(id, LAYERS, HIDDEN, data).unwrap()
}

fn dataset(rng: &mut ChaCha8Rng, per_class: usize, tag: &str) -> (Vec<LatentStack>, Vec<Level>) {
    let mut stacks = Vec::new();
    let mut labels = Vec::new();
    for class in 0..2 {
        for i in 0..per_class {
            stacks.push(separable_stack(rng, format!("{tag}-{class}-{i}"), class));
            labels.push(if class == 0 { Level::Level0 } else { Level::Level1 });
        }
    }
    (stacks, labels)
}

/// Fits on `stacks` under `train_labels`, scores on `test` against `truth`.
fn accuracy(stacks: &[LatentStack], train_labels: &[Level], test: &[LatentStack], truth: &[Level]) -> Result<f64, String> {
    let map: HashMap<String, Level> = stacks
        .iter()
        .zip(train_labels)
        .map(|(s, &l)| (s.claim_id().to_string(), l))
        .collect();
    let protos = fit_prototypes(stacks, &map, LayerRange::default()).map_err(|e| e.to_string())?;
    let mut right = 0;
    for (s, &want) in test.iter().zip(truth) {
        right += usize::from(classify(s, &protos).map_err(|e| e.to_string())?.level == want);
    }
    Ok(right as f64 / test.len() as f64)
}

fn classifier_fidelity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (train, labels) = dataset(&mut rng, 50, "train");
    let (test, truth) = dataset(&mut rng, 50, "test");
    let train_acc = accuracy(&train, &labels, &train, &labels)?;
    let test_acc = accuracy(&train, &labels, &test, &truth)?;
    ensure!(train_acc == 1.0 && test_acc == 1.0, "separable accuracy {train_acc} / {test_acc}");

    let mut total = 0.0;
    for _ in 0..200 {
        let mut shuffled = labels.clone();
        shuffled.shuffle(&mut rng);
        total += accuracy(&train, &shuffled, &test, &truth)?;
    }
    let mean = total / 200.0;
    ensure!((mean - 0.5).abs() <= 0.10, "shuffled-label mean accuracy {mean}");
    Ok(format!("separable 100%, shuffled labels {:.1}% over 200 trials", 100.0 * mean))
}

// ---------------------------------------------------------------- 3, 5

/// Scores True paths 0.9 and everything else 0.2.
struct VerdictScorer;

impl ScoringProvider for VerdictScorer {
    fn score(&self, items: &[ScoreItem]) -> Result<Vec<f64>, ScoreError> {
        Ok(items
            .iter()
            .map(|it| if it.verdict == Verdict::True { 0.9 } else { 0.2 })
            .collect())
    }
}

fn wildcard_replay(completions: &[String]) -> ReplayTransport {
    ReplayTransport::new(completions.iter().enumerate().map(|(seq, content)| ReplayEntry {
        key_hash: WILDCARD_KEY.into(),
        seq: seq as u64,
        content: content.clone(),
    }))
}

fn run_claims(
    chat: &ReplayTransport,
    claims: &[ClaimRecord],
    cfg: &StrategyConfig,
    levels: Option<&HashMap<String, Level>>,
) -> Result<Vec<RunRecord>, String> {
    let template = PromptTemplate::fact_checking();
    let decomposition = FrameTemplate::decomposition();
    let pipeline = Pipeline {
        template: &template,
        decomposition: &decomposition,
        chat,
        scorer: Some(&VerdictScorer),
        sampling: SamplingConfig::default(),
        score_with_evidence: false,
        deterministic: true,
    };
    let evidence: HashMap<String, Vec<EvidenceDoc>> = claims
        .iter()
        .map(|c| (c.id.clone(), vec![EvidenceDoc::new(format!("{}-doc", c.id), "Some evidence text.")]))
        .collect();
    pipeline
        .run_batch(claims, &evidence, cfg, levels, 2)
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())
}

fn strategy_semantics() -> Check {
    let mut completions: Vec<String> = (0..9)
        .map(|i| format!("[Label]: Conflicting\n[Justification]: mixed reading {i}"))
        .collect();
    completions.insert(4, "[Label]: True\n[Justification]: the record supports it".into());
    let claim = ClaimRecord::new("c", "A claim.", Some(Verdict::True)).map_err(|e| e.to_string())?;

    let sc = run_claims(&wildcard_replay(&completions), std::slice::from_ref(&claim), &StrategyConfig::new(Strategy::SelfConsistency, 10), None)?;
    let bon = run_claims(&wildcard_replay(&completions), std::slice::from_ref(&claim), &StrategyConfig::new(Strategy::BoN, 10), None)?;
    let (sc, bon) = (&sc[0], &bon[0]);
    ensure!(sc.paths().len() == 10 && bon.paths().len() == 10, "expected 10 paths");
    ensure!(sc.final_verdict() == Verdict::Conflicting, "SC chose {}", sc.final_verdict());
    ensure!(bon.final_verdict() == Verdict::True, "BoN chose {}", bon.final_verdict());
    ensure!(bon.chosen_index() == 4, "BoN chose path {}", bon.chosen_index());
    Ok("SC -> Conflicting, BoN -> True".into())
}

fn adaptive_accounting() -> Check {
    let completions: Vec<String> = (0..10)
        .map(|i| format!("[Label]: False\n[Justification]: reading {i}"))
        .collect();
    let claims: Vec<ClaimRecord> = (0..100)
        .map(|i| ClaimRecord::new(format!("c{i:03}"), format!("Claim number {i}."), Some(Verdict::False)).unwrap())
        .collect();
    let levels: HashMap<String, Level> = claims
        .iter()
        .enumerate()
        .map(|(i, c)| (c.id.clone(), if i % 5 < 2 { Level::Level0 } else { Level::Level1 }))
        .collect();
    let adaptive = run_claims(&wildcard_replay(&completions), &claims, &StrategyConfig::new(Strategy::AdaptiveBoN, 10), Some(&levels))?;
    let bon = run_claims(&wildcard_replay(&completions), &claims, &StrategyConfig::new(Strategy::BoN, 10), None)?;

    let per_claim = adaptive.iter().map(RunRecord::llm_calls).sum::<u64>() as f64 / claims.len() as f64;
    let report = cost_report(&adaptive, &bon).map_err(|e| e.to_string())?;
    ensure!(per_claim == 6.4, "adaptive calls per claim {per_claim}");
    ensure!(report.a.mean_calls == 6.4 && report.b.mean_calls == 10.0, "means {} / {}", report.a.mean_calls, report.b.mean_calls);
    ensure!(report.calls_ratio == 1.5625, "ratio {}", report.calls_ratio);
    Ok(format!("{per_claim} vs {} calls per claim, ratio {}", report.b.mean_calls, report.calls_ratio))
}

// ---------------------------------------------------------------- 4

fn random_run(rng: &mut ChaCha8Rng, id: &str, m: usize, strategy: Strategy) -> (RunRecord, RunRecord) {
    let paths: Vec<ReasoningPath> = (0..m)
        .map(|_| ReasoningPath::new("", Verdict::ALL[rng.gen_range(0..3)], ""))
        .collect();
    let scores: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..1.0)).collect();
    let (bi, bv) = select_bon(&paths, &scores).unwrap();
    let (si, sv) = select_majority(&paths).unwrap();
    let bon = RunRecord::new(id, strategy, vec![], paths.clone(), bi, bv, m as u64, 0).unwrap();
    let sc = RunRecord::new(id, Strategy::SelfConsistency, vec![], paths, si, sv, m as u64, 0).unwrap();
    (bon, sc)
}

fn upper_bound_dominance() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for fixture in 0..500 {
        let m = if fixture % 5 == 0 { 1 } else { rng.gen_range(1..=10) };
        let claims = rng.gen_range(5..=30);
        let mut gold = HashMap::new();
        let (mut bon, mut sc) = (Vec::new(), Vec::new());
        for c in 0..claims {
            let id = format!("f{fixture}-c{c}");
            gold.insert(id.clone(), Verdict::ALL[rng.gen_range(0..3)]);
            let (b, s) = random_run(&mut rng, &id, m, Strategy::BoN);
            bon.push(b);
            sc.push(s);
        }
        let acc = |runs: &[RunRecord]| evaluate(runs, &gold).map(|r| r.accuracy).map_err(|e| e.to_string());
        let ub = upper_bound(&bon, &gold).map_err(|e| e.to_string())?.accuracy;
        // the oracle only reads paths, so both run sets must agree
        let ub_sc = upper_bound(&sc, &gold).map_err(|e| e.to_string())?.accuracy;
        let (a_bon, a_sc) = (acc(&bon)?, acc(&sc)?);
        ensure!(ub == ub_sc, "fixture {fixture}: upper bounds differ");
        ensure!(ub >= a_bon && ub >= a_sc, "fixture {fixture}: {ub} < {a_bon} or {a_sc}");
        if m == 1 {
            ensure!(ub == a_bon && ub == a_sc, "fixture {fixture}: m=1 but {ub} vs {a_bon} / {a_sc}");
        }
    }
    Ok("500 fixtures".into())
}

// ---------------------------------------------------------------- 6

fn runs_from_pairs(pairs: &[(Verdict, Verdict)]) -> (Vec<RunRecord>, HashMap<String, Verdict>) {
    let mut gold = HashMap::new();
    let runs = pairs
        .iter()
        .enumerate()
        .map(|(i, &(g, p))| {
            let id = format!("m{i}");
            gold.insert(id.clone(), g);
            RunRecord::new(id, Strategy::Top1, vec![], vec![ReasoningPath::new("", p, "")], 0, p, 1, 0).unwrap()
        })
        .collect();
    (runs, gold)
}

fn metrics_by_hand() -> Check {
    use Verdict::*;
    // gold rows x predicted columns
    let counts = [[5, 4, 1], [2, 6, 2], [1, 1, 3]];
    let mut pairs = Vec::new();
    for (g, row) in counts.iter().enumerate() {
        for (p, &n) in row.iter().enumerate() {
            pairs.extend(std::iter::repeat_n((Verdict::ALL[g], Verdict::ALL[p]), n));
        }
    }
    let (runs, gold) = runs_from_pairs(&pairs);
    let r = evaluate(&runs, &gold).map_err(|e| e.to_string())?;
    // T: P 5/8, R 5/10; F: P 6/11, R 6/10; C: P 3/6, R 3/5
    let (t, f, c) = (5.0 / 9.0, 4.0 / 7.0, 6.0 / 11.0);
    let expected = [
        ("T-F1", r.t_f1, t),
        ("F-F1", r.f_f1, f),
        ("C-F1", r.c_f1, c),
        ("M-F1", r.macro_f1, (t + f + c) / 3.0),
        ("W-F1", r.weighted_f1, (10.0 * t + 10.0 * f + 5.0 * c) / 25.0),
    ];
    for (name, got, want) in expected {
        ensure!((got - want).abs() <= 1e-9, "{name}: {got} vs {want}");
    }

    // p_o = 3/4, p_e = 1/2*1/4 + 1/2*3/4 = 1/2
    let a = [True, True, False, False];
    let b = [True, False, False, False];
    let k = cohen_kappa(&a, &b).map_err(|e| e.to_string())?;
    ensure!((k - 50.0).abs() <= 1e-9, "kappa {k}");
    // p_o = 4/6, p_e = 2/6*3/6 + 2/6*2/6 + 2/6*1/6 = 1/3
    let a = [True, True, False, False, Conflicting, Conflicting];
    let b = [True, True, False, Conflicting, Conflicting, False];
    let k = cohen_kappa(&a, &b).map_err(|e| e.to_string())?;
    ensure!((k - 50.0).abs() <= 1e-9, "three-class kappa {k}");
    let x = [True, False, Conflicting, True, False];
    let self_k = cohen_kappa(&x, &x).map_err(|e| e.to_string())?;
    ensure!(self_k == 100.0, "self kappa {self_k}");
    Ok("five F1 values and kappa within 1e-9, kappa(x, x) = 100".into())
}

// ---------------------------------------------------------------- 7

const VOCAB: [&str; 24] = [
    "tax", "budget", "school", "crime", "police", "wage", "jobs", "rent", "bridge", "vaccine", "river", "trade",
    "senator", "governor", "mayor", "percent", "million", "year", "state", "city", "county", "law", "bill", "vote",
];

/// Textbook BM25 (Lucene idf, no (k1+1) factor) over every document.
fn exhaustive_bm25(docs: &[EvidenceDoc], query: &str, p: Bm25Params) -> Vec<(String, f64)> {
    let toks: Vec<Vec<String>> = docs.iter().map(|d| d.text.split(' ').map(str::to_owned).collect()).collect();
    let n = docs.len() as f64;
    let avg = toks.iter().map(Vec::len).sum::<usize>() as f64 / n;
    let mut terms: Vec<&str> = Vec::new();
    for t in query.split(' ') {
        if !terms.contains(&t) {
            terms.push(t);
        }
    }
    let mut out = Vec::new();
    for (d, doc_toks) in docs.iter().zip(&toks) {
        let mut score = 0.0;
        let mut matched = false;
        for &t in &terms {
            let tf = doc_toks.iter().filter(|x| *x == t).count() as f64;
            if tf == 0.0 {
                continue;
            }
            matched = true;
            let df = toks.iter().filter(|dt| dt.iter().any(|x| x == t)).count() as f64;
            let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
            score += idf * tf / (tf + p.k1 * (1.0 - p.b + p.b * doc_toks.len() as f64 / avg));
        }
        if matched {
            out.push((d.doc_id.clone(), score));
        }
    }
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}

fn retrieval_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let docs: Vec<EvidenceDoc> = (0..50)
        .map(|i| {
            let len = rng.gen_range(3..=25);
            let words: Vec<&str> = (0..len).map(|_| VOCAB[rng.gen_range(0..VOCAB.len())]).collect();
            EvidenceDoc::new(format!("d{i:02}"), words.join(" "))
        })
        .collect();
    // the oracle splits on spaces; make sure that agrees with the tokenizer
    for d in &docs {
        ensure!(tokenize(&d.text).join(" ") == d.text, "fixture text is not pre-tokenized");
    }
    let params = Bm25Params::default();
    let index = build_index(docs.clone(), params).map_err(|e| e.to_string())?;
    let mut queries = 0;
    for q in 0..40 {
        let len = rng.gen_range(1..=6);
        let query: Vec<&str> = (0..len).map(|_| VOCAB[rng.gen_range(0..VOCAB.len())]).collect();
        let query = query.join(" ");
        let all = exhaustive_bm25(&docs, &query, params);
        for k in [1, 5, 10, 50] {
            let got = index.search(&query, k);
            let want: Vec<_> = all.iter().take(k).cloned().collect();
            ensure!(got == want, "query {q} {query:?} top-{k}: {got:?} vs {want:?}");
        }
        queries += 1;
    }

    // rerank: random embeddings, brute-force cosine ordering
    let dim = 16;
    let mut vectors: Vec<(String, Vec<f64>)> = docs
        .iter()
        .map(|d| (d.text.clone(), (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()))
        .collect();
    let claim = "claim text for reranking";
    let query_vec: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    vectors.push((claim.into(), query_vec.clone()));
    let by_text: HashMap<String, Vec<f64>> = vectors.iter().cloned().collect();
    let provider = FixtureEmbeddings::new(vectors);
    for keep in [1, 3, 10, 50] {
        let got = rerank("c", claim, &docs, keep, &provider).map_err(|e| e.to_string())?;
        let mut want: Vec<(String, f64)> = docs.iter().map(|d| (d.doc_id.clone(), cos(&query_vec, &by_text[&d.text]))).collect();
        want.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        want.truncate(keep);
        let got: Vec<(String, f64)> = got.hits.into_iter().map(|h| (h.doc_id, h.score)).collect();
        ensure!(got == want, "rerank top-{keep}: {got:?} vs {want:?}");
    }
    Ok(format!("{queries} queries x 4 cutoffs exact, rerank matches brute-force cosine"))
}

// ---------------------------------------------------------------- 8

fn verifier_positive_rate() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut claims = Vec::new();
    let mut runs = Vec::new();
    let (mut correct, mut total) = (0u64, 0u64);
    for i in 0..200 {
        let gold = Verdict::ALL[rng.gen_range(0..3)];
        let id = format!("v{i}");
        claims.push(ClaimRecord::new(&id, format!("Claim {i}."), Some(gold)).unwrap());
        let m = rng.gen_range(1..=10);
        let paths: Vec<ReasoningPath> = (0..m)
            .map(|j| ReasoningPath::new(format!("path {j}"), Verdict::ALL[rng.gen_range(0..3)], ""))
            .collect();
        correct += paths.iter().filter(|p| p.predicted == gold).count() as u64;
        total += m as u64;
        let v = paths[0].predicted;
        runs.push(RunRecord::new(id, Strategy::BoN, vec![], paths, 0, v, m as u64, 0).unwrap());
    }
    let examples = build_training_data(&runs, &claims, None).map_err(|e| e.to_string())?;
    let rate = positive_rate(&examples).ok_or("no examples")?;
    let micro = correct as f64 / total as f64;
    ensure!(examples.len() as u64 == total, "{} examples for {total} paths", examples.len());
    ensure!(rate == micro, "positive rate {rate} vs micro accuracy {micro}");
    Ok(format!("{rate} over {total} paths"))
}

// ---------------------------------------------------------------- 9

const RUN_FIELDS: [&str; 8] = [
    "claim_id", "strategy", "evidence_ids", "paths", "chosen_index", "final_verdict", "llm_calls", "wall_ms",
];

fn check_run_schema(line: &str) -> Result<(), String> {
    let v: serde_json::Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let obj = v.as_object().ok_or("record is not an object")?;
    let keys: HashSet<&str> = obj.keys().map(String::as_str).collect();
    ensure!(keys == RUN_FIELDS.into_iter().collect(), "fields {keys:?}");
    ensure!(obj["claim_id"].is_string() && obj["strategy"].is_string(), "bad id/strategy types");
    ensure!(obj["evidence_ids"].as_array().is_some_and(|a| a.iter().all(|x| x.is_string())), "bad evidence_ids");
    ensure!(obj["chosen_index"].is_u64() && obj["llm_calls"].is_u64() && obj["wall_ms"].is_u64(), "bad counters");
    let paths = obj["paths"].as_array().ok_or("paths not an array")?;
    ensure!(!paths.is_empty(), "no paths");
    for p in paths {
        let p = p.as_object().ok_or("path is not an object")?;
        ensure!(p["justification"].is_string() && p["raw_response"].is_string(), "bad path text fields");
        ensure!(p.get("score").is_none_or(|s| s.as_f64().is_some_and(|s| (0.0..=1.0).contains(&s))), "bad score");
    }
    // typed parse enforces the cross-field invariants
    let r: RunRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
    ensure!(r.strategy() == Strategy::AdaptiveBoN, "strategy {}", r.strategy());
    Ok(())
}

fn ttsfc(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_ttsfc"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(out.status.success(), "ttsfc {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    Ok(out.stdout)
}

fn same_report(got: &serde_json::Value, want: &serde_json::Value, what: &str) -> Result<(), String> {
    let want = want.as_object().ok_or("bad expected report")?;
    for (k, w) in want {
        let g = &got[k];
        let equal = match (g.as_f64(), w.as_f64()) {
            (Some(a), Some(b)) if !g.is_u64() => a.to_bits() == b.to_bits(),
            _ => g == w,
        };
        ensure!(equal, "{what}.{k}: {g} vs expected {w}");
    }
    Ok(())
}

fn end_to_end() -> Check {
    let dir = e2e_dir();
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let f = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let t = |name: &str| tmp.path().join(name).to_string_lossy().into_owned();
    let (claims, evidence, levels) = (f("claims.jsonl"), f("evidence.jsonl"), f("levels.jsonl"));
    let replay = format!("replay:{}", f("replay.jsonl"));
    let scorer = format!("fixture:{}", f("scores.jsonl"));

    let started = Instant::now();
    ttsfc(&[
        "--deterministic", "run", "--strategy", "adaptive", "--m", "10", "--claims", &claims, "--evidence", &evidence,
        "--levels", &levels, "--transport", &replay, "--scorer", &scorer, "--out", &t("adaptive.jsonl"),
    ])?;
    let elapsed = started.elapsed();
    ensure!(elapsed < Duration::from_secs(5), "adaptive run took {elapsed:?}");
    let text = std::fs::read_to_string(t("adaptive.jsonl")).map_err(|e| e.to_string())?;
    let lines: Vec<&str> = text.lines().collect();
    ensure!(lines.len() == 20, "{} records", lines.len());
    for (i, line) in lines.iter().enumerate() {
        check_run_schema(line).map_err(|e| format!("record {i}: {e}"))?;
    }

    ttsfc(&[
        "--deterministic", "run", "--strategy", "bon", "--m", "10", "--claims", &claims, "--evidence", &evidence,
        "--transport", &replay, "--scorer", &scorer, "--out", &t("bon.jsonl"),
    ])?;
    let eval = |out: &str| {
        ttsfc(&[
            "--deterministic", "eval", "--runs", &t("adaptive.jsonl"), "--claims", &claims, "--upper-bound",
            "--compare", &t("bon.jsonl"), "--out", out,
        ])
    };
    eval(&t("eval1.json"))?;
    eval(&t("eval2.json"))?;
    let first = std::fs::read(t("eval1.json")).map_err(|e| e.to_string())?;
    let second = std::fs::read(t("eval2.json")).map_err(|e| e.to_string())?;
    ensure!(first == second, "eval output differs between runs");

    let got: serde_json::Value = serde_json::from_slice(&first).map_err(|e| e.to_string())?;
    let want: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("expected_eval.json")).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    same_report(&got["report"], &want["adaptive"], "adaptive")?;
    same_report(&got["compare"]["report"], &want["bon"], "bon")?;
    same_report(&got["upper_bound"]["report"], &want["upper_bound"], "upper_bound")?;
    let ratio = got["compare"]["cost"]["calls_ratio"].as_f64().ok_or("no calls ratio")?;
    ensure!(ratio.to_bits() == want["calls_ratio"].as_f64().unwrap_or(f64::NAN).to_bits(), "calls ratio {ratio}");
    Ok(format!("20 claims in {elapsed:.2?}, eval matches precomputed metrics bit-for-bit"))
}

// ----------------------------------------------------------------

fn main() {
    let checks: [Named; 9] = [
        ("pca matches eigendecomposition oracle", pca_oracle),
        ("prototype classifier fidelity", classifier_fidelity),
        ("strategy semantics: SC vs BoN", strategy_semantics),
        ("upper bound dominates BoN and SC", upper_bound_dominance),
        ("adaptive call accounting", adaptive_accounting),
        ("metrics and kappa by hand", metrics_by_hand),
        ("bm25 and rerank vs exhaustive oracle", retrieval_oracle),
        ("verifier positive rate = path accuracy", verifier_positive_rate),
        ("end-to-end replay run and eval", end_to_end),
    ];
    let mut results = BTreeMap::new();
    for (i, (name, check)) in checks.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("[{tag}] {}. {name}: {detail}", i + 1);
        results.insert(i, outcome.is_ok());
    }
    let failed = results.values().filter(|ok| !**ok).count();
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
