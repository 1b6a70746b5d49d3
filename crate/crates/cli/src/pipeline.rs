//! Subcommand implementations: corpus ingestion, selection, training,
//! summarization, evaluation, and the PENMAN round-trip check.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use amr_summ::amr::{parse_penman, read_corpus, serialize_penman, AmrGraph, CorpusError};
use amr_summ::decoder::{decode, score, summary_graph, CostSpec, Model};
use amr_summ::features::{CorpusStats, GraphFeatures};
use amr_summ::metrics::{abstractiveness, graph_node_edge_prf, rouge_n, rouge_su4, smatch, Prf};
use amr_summ::selector::{
    build_training_instances, spectral_select, ReferenceSentence, SentenceRecord, TokenStats,
};
use amr_summ::source_graph::{build_source_graph, collapse_entities, MentionClusters};
use amr_summ::text::tokenize;
use amr_summ::trainer::{load_model, save_model, train, TrainConfig, TrainError};

use crate::config::PipelineConfig;
use crate::CliError;

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> CliError {
        match e {
            TrainError::Config(msg) => CliError::Config(msg),
            TrainError::NoInstances => CliError::EmptyWork("no training instances".into()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> CliError {
        CliError::Data(e.to_string())
    }
}

/// Load the document cluster: for every `*.txt` in the corpus directory
/// (one sentence per line) a parallel `*.amr` corpus file must exist with
/// one PENMAN block per sentence.
pub fn load_corpus(dir: &Path) -> Result<Vec<SentenceRecord>, CliError> {
    let mut txt_files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::Data(format!("cannot list {}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "txt"))
        .collect();
    txt_files.sort();
    if txt_files.is_empty() {
        return Err(CliError::Data(format!(
            "no .txt documents in {}",
            dir.display()
        )));
    }
    let mut records = Vec::new();
    for (doc, txt_path) in txt_files.iter().enumerate() {
        let amr_path = txt_path.with_extension("amr");
        let text = std::fs::read_to_string(txt_path)
            .map_err(|e| CliError::Data(format!("{}: {e}", txt_path.display())))?;
        let sentences: Vec<&str> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect();
        let blocks = read_corpus(&amr_path)?;
        if blocks.len() != sentences.len() {
            return Err(CliError::Data(format!(
                "{}: {} sentences but {} AMR blocks in {}",
                txt_path.display(),
                sentences.len(),
                blocks.len(),
                amr_path.display()
            )));
        }
        for (sent, (line, block)) in sentences.iter().zip(blocks).enumerate() {
            let mut graph = block.graph;
            if graph.sentence().is_none() {
                graph.metadata.push(("snt".to_string(), line.to_string()));
            }
            records.push(SentenceRecord::new(doc, sent, line, graph));
        }
    }
    Ok(records)
}

fn load_term_file(path: &Option<PathBuf>) -> Result<HashSet<String>, CliError> {
    let Some(path) = path else {
        return Ok(HashSet::new());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(text
        .lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty())
        .collect())
}

/// Write via a temp file and rename so partially written outputs never
/// appear under the final name.
fn atomic_write(path: &Path, content: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|e| CliError::Data(format!("{}: {e}", parent.display())))?;
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, content).map_err(|e| CliError::Data(format!("{}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(())
}

fn require<'a>(p: &'a Option<PathBuf>, name: &str) -> Result<&'a Path, CliError> {
    p.as_deref()
        .ok_or_else(|| CliError::Config(format!("{name} must be set")))
}

/// `select`: spectral clustering over all corpus sentences; writes one
/// cluster file per topic aspect.
pub fn cmd_select(cfg: &PipelineConfig) -> Result<(), CliError> {
    let corpus_dir = require(&cfg.corpus_dir, "corpus_dir")?;
    let records = load_corpus(corpus_dir)?;
    let stoplist = load_term_file(&cfg.stoplist)?;
    let stats = TokenStats::build(&records, &stoplist);
    let clusters = spectral_select(&records, cfg.m, cfg.n, cfg.seed, &stats)
        .map_err(|e| CliError::Data(e.to_string()))?;
    for (k, cluster) in clusters.iter().enumerate() {
        let mut out = String::new();
        writeln!(out, "# ::cluster {k}").unwrap();
        for r in cluster {
            writeln!(out, "{}\t{}\t{}", r.doc, r.sent, r.text).unwrap();
        }
        atomic_write(&cfg.out.join(format!("cluster_{k}.tsv")), &out)?;
    }
    eprintln!("select\tclusters\t{}", clusters.len());
    Ok(())
}

/// `train`: build training instances from reference summaries, run
/// subgradient training, and write the model file.
pub fn cmd_train(cfg: &PipelineConfig) -> Result<(), CliError> {
    let corpus_dir = require(&cfg.corpus_dir, "corpus_dir")?;
    let refs_path = require(&cfg.refs, "refs")?;
    let model_path = require(&cfg.model, "model")?;
    let records = load_corpus(corpus_dir)?;
    let refs = read_corpus(refs_path)?;
    let references: Vec<ReferenceSentence> = refs
        .into_iter()
        .enumerate()
        .map(|(i, block)| ReferenceSentence {
            id: block
                .meta("id")
                .map(str::to_string)
                .unwrap_or_else(|| format!("ref.{i}")),
            amr: block.graph,
        })
        .collect();
    let stoplist = load_term_file(&cfg.stoplist)?;
    let events = load_term_file(&cfg.events)?;
    let stats = TokenStats::build(&records, &stoplist);
    let instances = build_training_instances(
        &references,
        &records,
        cfg.metric,
        cfg.n,
        &events,
        &stats,
        cfg.seed,
    );
    if instances.is_empty() {
        return Err(CliError::EmptyWork("no training instances constructible".into()));
    }
    for inst in &instances {
        eprintln!("instance\t{}\tcoverage\t{:.3}", inst.id, inst.coverage);
    }
    let train_cfg = TrainConfig {
        loss: cfg.loss,
        epochs: cfg.epochs,
        step_size: cfg.step_size,
        seed: cfg.seed,
        averaging: cfg.averaging,
        expansion_cap: cfg.expansion_cap,
    };
    let report = train(&instances, cfg.budget, &train_cfg)?;
    for (k, loss) in report.epoch_losses.iter().enumerate() {
        eprintln!("epoch\t{k}\tloss\t{loss}");
    }
    for w in &report.warnings {
        eprintln!("warning\t{w}");
    }
    if let Some(parent) = model_path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| CliError::Data(format!("{}: {e}", parent.display())))?;
        }
    }
    save_model(&report.model, model_path)?;
    eprintln!("train\tmodel\t{}", model_path.display());
    Ok(())
}

struct Cluster {
    id: usize,
    members: Vec<(usize, usize)>,
}

fn read_cluster_files(dir: &Path) -> Result<Vec<Cluster>, CliError> {
    let mut files: Vec<(usize, PathBuf)> = std::fs::read_dir(dir)
        .map_err(|e| CliError::Data(format!("cannot list {}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter_map(|p| {
            let k: usize = p
                .file_name()
                .and_then(|n| n.to_str())
                .and_then(|n| n.strip_prefix("cluster_"))
                .and_then(|n| n.strip_suffix(".tsv"))
                .and_then(|n| n.parse().ok())?;
            Some((k, p))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Data(format!(
            "no cluster files in {} (run `select` first)",
            dir.display()
        )));
    }
    let mut clusters = Vec::new();
    for (id, path) in files.iter().map(|(k, p)| (*k, p)) {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let mut members = Vec::new();
        for line in text.lines() {
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split('\t');
            let (Some(doc), Some(sent)) = (fields.next(), fields.next()) else {
                return Err(CliError::Data(format!("{}: malformed line", path.display())));
            };
            let doc: usize = doc
                .parse()
                .map_err(|_| CliError::Data(format!("{}: bad doc index", path.display())))?;
            let sent: usize = sent
                .parse()
                .map_err(|_| CliError::Data(format!("{}: bad sentence index", path.display())))?;
            members.push((doc, sent));
        }
        clusters.push(Cluster { id, members });
    }
    Ok(clusters)
}

/// Remap global-corpus mention clusters onto a cluster-local sentence
/// list; mentions outside the cluster are dropped.
fn localize_corefs(
    corefs: &MentionClusters,
    members: &[(usize, usize)],
    records: &[SentenceRecord],
) -> MentionClusters {
    let global_of_member: Vec<usize> = members
        .iter()
        .map(|&(doc, sent)| {
            records
                .iter()
                .position(|r| r.doc == doc && r.sent == sent)
                .expect("cluster member present in corpus")
        })
        .collect();
    let clusters = corefs
        .clusters
        .iter()
        .map(|cluster| {
            cluster
                .iter()
                .filter_map(|&(global, span)| {
                    global_of_member
                        .iter()
                        .position(|&g| g == global)
                        .map(|local| (local, span))
                })
                .collect()
        })
        .filter(|c: &std::collections::BTreeSet<_>| !c.is_empty())
        .collect();
    MentionClusters { clusters }
}

struct ClusterSummary {
    id: usize,
    penman: String,
    score: f64,
    nodes: usize,
    optimal: bool,
}

/// Drop the synthetic ROOT wrapper when it has exactly one child, so the
/// emitted PENMAN is a plain AMR expression. With several selected
/// aspects ROOT stays, since PENMAN needs a single root.
fn strip_synthetic_root(g: AmrGraph) -> AmrGraph {
    if g.nodes[g.root].label != "ROOT" {
        return g;
    }
    let children: Vec<usize> = g.outgoing(g.root).map(|(_, e)| e.target).collect();
    if children.len() != 1 {
        return g;
    }
    let mut out = AmrGraph::new(0);
    let mut remap = vec![usize::MAX; g.nodes.len()];
    for (i, node) in g.nodes.iter().enumerate() {
        if i == g.root {
            continue;
        }
        remap[i] = out.add_node(node.clone());
    }
    for e in &g.edges {
        if e.source == g.root {
            continue;
        }
        out.add_edge(remap[e.source], &e.label, remap[e.target]);
    }
    out.root = remap[children[0]];
    out
}

fn summarize_cluster(
    cluster: &Cluster,
    records: &[SentenceRecord],
    corefs: Option<&MentionClusters>,
    events: &HashSet<String>,
    model: &Model,
    cfg: &PipelineConfig,
) -> Result<ClusterSummary, CliError> {
    let selected: Vec<&SentenceRecord> = cluster
        .members
        .iter()
        .map(|&(doc, sent)| {
            records
                .iter()
                .find(|r| r.doc == doc && r.sent == sent)
                .ok_or_else(|| {
                    CliError::Data(format!("cluster {} references unknown sentence {doc}:{sent}", cluster.id))
                })
        })
        .collect::<Result<_, _>>()?;
    if selected.is_empty() {
        return Err(CliError::Data(format!("cluster {} is empty", cluster.id)));
    }
    let graphs: Vec<AmrGraph> = selected.iter().map(|r| r.amr.clone()).collect();
    let local_corefs = corefs.map(|c| localize_corefs(c, &cluster.members, records));
    let graph = build_source_graph(&graphs, local_corefs.as_ref())
        .map_err(|e| CliError::Data(e.to_string()))?;
    let mut by_doc: std::collections::BTreeMap<usize, Vec<AmrGraph>> = Default::default();
    for r in &selected {
        by_doc.entry(r.doc).or_default().push(collapse_entities(&r.amr));
    }
    let doc_graphs: Vec<Vec<AmrGraph>> = by_doc.into_values().collect();
    let stats = CorpusStats::build(&doc_graphs, events.clone());
    let features = GraphFeatures::extract(&graph, &stats);
    let decoded = decode(&graph, model, &features, None::<&CostSpec>, cfg.expansion_cap);
    if !decoded.optimal && cfg.strict {
        return Err(CliError::StrictDecode(format!(
            "cluster {}: decode hit the expansion cap",
            cluster.id
        )));
    }
    if !decoded.optimal {
        eprintln!(
            "warning\tcluster {}\tdecode hit the expansion cap; using best found",
            cluster.id
        );
    }
    let amr = strip_synthetic_root(summary_graph(&graph, &decoded.selection));
    let penman = serialize_penman(&amr).map_err(|e| CliError::Data(e.to_string()))?;
    let content_nodes = decoded.selection.content_node_count(&graph);
    let model_score =
        score(&decoded.selection, &graph, model, &features).map_err(|e| CliError::Data(e.to_string()))?;
    Ok(ClusterSummary {
        id: cluster.id,
        penman,
        score: model_score,
        nodes: content_nodes,
        optimal: decoded.optimal,
    })
}

/// `summarize`: per cluster, build the source graph, decode a summary
/// subtree with the trained model, and write PENMAN blocks plus a report.
pub fn cmd_summarize(cfg: &PipelineConfig) -> Result<(), CliError> {
    let corpus_dir = require(&cfg.corpus_dir, "corpus_dir")?;
    let model_path = require(&cfg.model, "model")?;
    let model = load_model(model_path)?;
    let records = load_corpus(corpus_dir)?;
    let clusters = read_cluster_files(&cfg.out)?;
    let corefs = match &cfg.coref {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            Some(MentionClusters::parse(&text).map_err(|e| CliError::Data(e.to_string()))?)
        }
        None => None,
    };
    let events = load_term_file(&cfg.events)?;

    let summaries: Vec<Result<ClusterSummary, CliError>> = if cfg.jobs > 1 {
        let mut results: Vec<Option<Result<ClusterSummary, CliError>>> =
            (0..clusters.len()).map(|_| None).collect();
        std::thread::scope(|scope| {
            for (chunk, slot_chunk) in clusters
                .chunks(cfg.jobs.max(1))
                .zip(results.chunks_mut(cfg.jobs.max(1)))
            {
                // chunks are processed with one thread per cluster
                let mut handles = Vec::new();
                for (cluster, slot) in chunk.iter().zip(slot_chunk.iter_mut()) {
                    let records = &records;
                    let corefs = corefs.as_ref();
                    let events = &events;
                    let model = &model;
                    handles.push(scope.spawn(move || {
                        *slot = Some(summarize_cluster(cluster, records, corefs, events, model, cfg));
                    }));
                }
                for h in handles {
                    h.join().expect("worker thread");
                }
            }
        });
        results.into_iter().map(|r| r.expect("slot filled")).collect()
    } else {
        clusters
            .iter()
            .map(|c| summarize_cluster(c, &records, corefs.as_ref(), &events, &model, cfg))
            .collect()
    };

    let mut penman_out = String::new();
    let mut report = String::from("cluster\tscore\tnodes\toptimal\n");
    for summary in summaries {
        let s = summary?;
        writeln!(penman_out, "# ::cluster {}", s.id).unwrap();
        penman_out.push_str(&s.penman);
        penman_out.push_str("\n\n");
        writeln!(report, "{}\t{}\t{}\t{}", s.id, s.score, s.nodes, s.optimal).unwrap();
    }
    atomic_write(&cfg.out.join("summary.amr"), &penman_out)?;
    atomic_write(&cfg.out.join("report.tsv"), &report)?;
    eprintln!("summarize\toutput\t{}", cfg.out.join("summary.amr").display());
    Ok(())
}

fn fmt_row(out: &mut String, instance: &str, metric: &str, p: Prf) {
    writeln!(
        out,
        "{instance}\t{metric}\t{:.4}\t{:.4}\t{:.4}",
        p.precision, p.recall, p.f1
    )
    .unwrap();
}

/// `evaluate`: node/edge P/R/F and Smatch between aligned prediction and
/// reference AMR files; ROUGE and abstractiveness when text files are
/// supplied. The report goes to stdout as a TSV table with a
/// macro-averaged footer per metric.
pub fn cmd_evaluate(cfg: &PipelineConfig) -> Result<(), CliError> {
    let pred_path = require(&cfg.predictions, "predictions")?;
    let ref_path = require(&cfg.references, "references")?;
    let preds = read_corpus(pred_path)?;
    let refs = read_corpus(ref_path)?;
    if preds.is_empty() && !refs.is_empty() {
        // No predictions at all: emit zero rows, succeed.
        let mut out = String::from("instance\tmetric\tP\tR\tF\n");
        for (i, _) in refs.iter().enumerate() {
            for metric in ["nodes", "edges", "smatch"] {
                fmt_row(&mut out, &format!("{i}"), metric, Prf::ZERO);
            }
        }
        for metric in ["nodes", "edges", "smatch"] {
            fmt_row(&mut out, "avg", metric, Prf::ZERO);
        }
        print!("{out}");
        return Ok(());
    }
    if preds.len() != refs.len() {
        return Err(CliError::Data(format!(
            "misaligned files: {} predictions vs {} references",
            preds.len(),
            refs.len()
        )));
    }

    let texts: Option<(Vec<String>, Vec<String>)> = match (&cfg.pred_text, &cfg.ref_text) {
        (Some(p), Some(r)) => {
            let read_lines = |path: &Path| -> Result<Vec<String>, CliError> {
                Ok(std::fs::read_to_string(path)
                    .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
                    .lines()
                    .map(str::to_string)
                    .collect())
            };
            let (pt, rt) = (read_lines(p)?, read_lines(r)?);
            if pt.len() != preds.len() || rt.len() != preds.len() {
                return Err(CliError::Data(
                    "text files are not aligned with the AMR files".into(),
                ));
            }
            Some((pt, rt))
        }
        _ => None,
    };
    let sources: Option<Vec<Vec<String>>> = match &cfg.corpus_dir {
        Some(dir) => Some(
            load_corpus(dir)?
                .into_iter()
                .map(|r| r.tokens)
                .collect(),
        ),
        None => None,
    };

    let mut out = String::from("instance\tmetric\tP\tR\tF\n");
    let mut sums: std::collections::BTreeMap<&str, (f64, f64, f64)> = Default::default();
    let add = |sums: &mut std::collections::BTreeMap<&str, (f64, f64, f64)>,
                   metric: &'static str,
                   p: Prf| {
        let e = sums.entry(metric).or_insert((0.0, 0.0, 0.0));
        e.0 += p.precision;
        e.1 += p.recall;
        e.2 += p.f1;
    };
    let n = preds.len();
    for (i, (pred, reference)) in preds.iter().zip(&refs).enumerate() {
        let (nodes, edges) = graph_node_edge_prf(&pred.graph, &reference.graph);
        let sm = smatch(&pred.graph, &reference.graph, 4, cfg.seed).prf;
        fmt_row(&mut out, &format!("{i}"), "nodes", nodes);
        fmt_row(&mut out, &format!("{i}"), "edges", edges);
        fmt_row(&mut out, &format!("{i}"), "smatch", sm);
        add(&mut sums, "nodes", nodes);
        add(&mut sums, "edges", edges);
        add(&mut sums, "smatch", sm);
        if let Some((pt, rt)) = &texts {
            let cand = tokenize(&pt[i]);
            let reference_tokens = vec![tokenize(&rt[i])];
            let r1 = rouge_n(&cand, &reference_tokens, 1).expect("n=1 supported");
            let r2 = rouge_n(&cand, &reference_tokens, 2).expect("n=2 supported");
            let su4 = rouge_su4(&cand, &reference_tokens);
            fmt_row(&mut out, &format!("{i}"), "rouge-1", r1);
            fmt_row(&mut out, &format!("{i}"), "rouge-2", r2);
            fmt_row(&mut out, &format!("{i}"), "rouge-su4", su4);
            add(&mut sums, "rouge-1", r1);
            add(&mut sums, "rouge-2", r2);
            add(&mut sums, "rouge-su4", su4);
            if let Some(sources) = &sources {
                for k in 1..=3usize {
                    let a = abstractiveness(&cand, sources, k);
                    let p = Prf { precision: a, recall: a, f1: a };
                    let name: &'static str = match k {
                        1 => "abst-1",
                        2 => "abst-2",
                        _ => "abst-3",
                    };
                    fmt_row(&mut out, &format!("{i}"), name, p);
                    add(&mut sums, name, p);
                }
            }
        }
    }
    for (metric, (p, r, f)) in sums {
        writeln!(
            out,
            "avg\t{metric}\t{:.4}\t{:.4}\t{:.4}",
            p / n as f64,
            r / n as f64,
            f / n as f64
        )
        .unwrap();
    }
    print!("{out}");
    Ok(())
}

/// `penman`: parse every block of a corpus file, serialize it back, and
/// verify the round trip is isomorphic.
pub fn cmd_penman(file: &Path) -> Result<(), CliError> {
    let blocks = read_corpus(file)?;
    if blocks.is_empty() {
        return Err(CliError::EmptyWork(format!(
            "{} contains no PENMAN blocks",
            file.display()
        )));
    }
    for (i, block) in blocks.iter().enumerate() {
        let text = serialize_penman(&block.graph)
            .map_err(|e| CliError::Data(format!("block {i}: {e}")))?;
        let back = parse_penman(&text).map_err(|e| CliError::Data(format!("block {i}: {e}")))?;
        if !block.graph.isomorphic(&back) {
            return Err(CliError::Data(format!(
                "block {i}: round trip is not isomorphic"
            )));
        }
        println!(
            "block {i}: ok ({} nodes, {} edges, {} reentrancies)",
            block.graph.nodes.len(),
            block.graph.edges.len(),
            block.graph.reentrant_nodes().len()
        );
    }
    Ok(())
}
