//! CLI half of acceptance criterion 10: the select -> train -> summarize
//! -> evaluate chain runs on the shipped toy corpus within the time
//! budget, exits 0 at every step, and produces re-parseable PENMAN.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use amr_summ::amr::read_corpus_str;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_amr-summ"))
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/toy")
}

#[test]
fn criterion_10b_end_to_end_cli_chain() {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("chain");
    if dir.exists() {
        fs::remove_dir_all(&dir).unwrap();
    }
    fs::create_dir_all(dir.join("docs")).unwrap();
    let src = fixtures();
    for entry in fs::read_dir(src.join("docs")).unwrap() {
        let p = entry.unwrap().path();
        fs::copy(&p, dir.join("docs").join(p.file_name().unwrap())).unwrap();
    }
    for f in ["refs.amr", "stoplist.txt", "events.txt", "toy.conf"] {
        fs::copy(src.join(f), dir.join(f)).unwrap();
    }

    let start = Instant::now();
    for step in ["select", "train", "summarize"] {
        let out = bin()
            .args(["--config", "toy.conf", step])
            .current_dir(&dir)
            .output()
            .expect("binary runs");
        assert_eq!(
            out.status.code(),
            Some(0),
            "{step} failed:\n{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let eval = bin()
        .args([
            "--config",
            "toy.conf",
            "evaluate",
            "--predictions",
            "out/summary.amr",
            "--references",
            "refs.amr",
        ])
        .current_dir(&dir)
        .output()
        .expect("binary runs");
    assert_eq!(
        eval.status.code(),
        Some(0),
        "evaluate failed:\n{}",
        String::from_utf8_lossy(&eval.stderr)
    );
    let elapsed = start.elapsed();

    // The PENMAN output re-parses cleanly.
    let summary = fs::read_to_string(dir.join("out/summary.amr")).unwrap();
    let blocks = read_corpus_str(&summary).expect("summary parses");
    let reparse_ok = !blocks.is_empty() && blocks.iter().all(|b| b.graph.validate().is_ok());
    let within_time = elapsed.as_secs_f64() < 30.0;

    let ok = reparse_ok && within_time;
    println!(
        "acceptance 10 (end-to-end CLI chain): {} [{} PENMAN blocks re-parsed, {elapsed:?}]",
        if ok { "PASS" } else { "FAIL" },
        blocks.len()
    );
    assert!(ok);

    // The chained outputs feed the evaluator without manual edits and the
    // report carries every expected metric row.
    let stdout = String::from_utf8_lossy(&eval.stdout);
    for metric in ["nodes", "edges", "smatch"] {
        assert!(stdout.contains(&format!("avg\t{metric}")));
    }
}
