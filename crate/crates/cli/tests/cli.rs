use std::path::Path;
use std::process::{Command, Output};
use std::sync::Arc;

use blankcrack_core::Language;
use blankcrack_service::{load_corpora, Game, ManualClock, ServiceConfig};

fn run(args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_blankcrack"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

const ANIMALS: [&str; 4] = ["hyena", "jackal", "wolf", "fox"];

fn write_corpus(dir: &Path) -> std::path::PathBuf {
    let mut text = String::new();
    for w in ANIMALS {
        for place in ["river", "forest", "village", "desert", "mountain", "lake"] {
            text.push_str(&format!("The {w} slept near the {place}.\n"));
        }
    }
    let path = dir.join("books.txt");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn ingest_then_series_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path());
    let snap = dir.path().join("en.snap");
    let out = run(&[
        "ingest",
        "--lang",
        "en",
        "--genre",
        "books",
        "--out",
        snap.to_str().unwrap(),
        corpus.to_str().unwrap(),
    ]);
    assert!(stdout(&out).starts_with("24 sentences"), "{}", stdout(&out));

    let series = dir.path().join("series.txt");
    std::fs::write(&series, "# animals\nhyena\njackal\nwolf\nfox\nunicorn\n").unwrap();
    let out = run(&["series-pairs", "--snapshot", snap.to_str().unwrap(), "--series", series.to_str().unwrap()]);
    let lines: Vec<serde_json::Value> = stdout(&out)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 6);
    assert!(lines.iter().all(|p| p["origin"] == "manual"));
}

#[test]
fn mine_pairs_from_embeddings() {
    let dir = tempfile::tempdir().unwrap();
    let vectors = dir.path().join("vec.txt");
    std::fs::write(&vectors, "4 2\ncat 1 0\ncats 1 0.01\ndog 0.9 0.1\ncar -1 0\n").unwrap();
    let out = run(&["mine-pairs", "--lang", "en", "--embeddings", vectors.to_str().unwrap(), "--top", "2"]);
    let pairs: Vec<serde_json::Value> = stdout(&out)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(pairs.len(), 2);
    // cat/cats share a stem and are skipped
    assert_eq!((pairs[0]["word_a"].as_str(), pairs[0]["word_b"].as_str()), (Some("cats"), Some("dog")));
    assert_eq!((pairs[1]["word_a"].as_str(), pairs[1]["word_b"].as_str()), (Some("cat"), Some("dog")));
    assert_eq!(pairs[0]["origin"], "embedding_mined");
}

#[test]
fn stats_on_the_fixture() {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/annotation_log.csv");
    let out = run(&["stats", fixture.to_str().unwrap(), "--json"]);
    let body: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(body["histogram"]["distinct_pairs"], 1656);
    let text = stdout(&run(&["stats", fixture.to_str().unwrap()]));
    assert!(text.contains("fr"), "{text}");
}

#[test]
fn export_and_evaluate_a_journal() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path());
    let series = dir.path().join("series.txt");
    std::fs::write(&series, "# animals\nhyena\njackal\nwolf\nfox\n").unwrap();
    let config_path = dir.path().join("service.toml");
    std::fs::write(
        &config_path,
        format!(
            "journal = \"events.jsonl\"\npassword_rounds = 1\nseed = 3\n\n[[languages]]\ncode = \"en\"\nseries = \"series.txt\"\ncorpus = [{{ path = \"{}\", genre = \"books\" }}]\n",
            corpus.file_name().unwrap().to_str().unwrap()
        ),
    )
    .unwrap();

    let config = ServiceConfig::load(&config_path).unwrap();
    let corpora = load_corpora(&config).unwrap();
    let game = Game::open(config, corpora, Arc::new(ManualClock::new(0))).unwrap();
    assert_eq!(game.seed_pairs().unwrap(), 6);
    let p = game.register("alice", "secret", Language::En).unwrap();
    for _ in 0..4 {
        let r = game.serve_riddle(p, None, None).unwrap();
        let choice = r.payload.options[0].clone();
        game.submit_answer(p, r.payload.riddle_id, &choice).unwrap();
    }
    drop(game);

    let journal = dir.path().join("events.jsonl");
    let csv = stdout(&run(&["export-log", "--journal", journal.to_str().unwrap()]));
    assert_eq!(csv.lines().count(), 5);

    let snap = dir.path().join("en.snap");
    run(&["ingest", "--lang", "en", "--genre", "books", "--out", snap.to_str().unwrap(), corpus.to_str().unwrap()]);
    let corpus_arg = format!("en={}", snap.display());
    let j = journal.to_str().unwrap();
    let report = stdout(&run(&[
        "cstp-eval", "--journal", j, "--corpus", &corpus_arg, "--oracle", "coin", "--seed", "7", "--rule", "direct", "--json",
    ]));
    let body: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(body["overall"]["n"], 4);

    let csv_path = dir.path().join("log.csv");
    std::fs::write(&csv_path, &csv).unwrap();
    let report = stdout(&run(&[
        "cstp-eval", "--journal", j, "--log", csv_path.to_str().unwrap(), "--corpus", &corpus_arg, "--oracle", "counts", "--alpha", "1.0",
    ]));
    assert!(!report.is_empty());

    let oracle = "while read -r tag cap term rest; do echo 0.5; done";
    let report = stdout(&run(&[
        "cstp-eval", "--journal", j, "--corpus", &corpus_arg, "--oracle", "external", "--oracle-cmd", oracle, "--json",
    ]));
    let body: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(body["overall"]["model_ties"], 4);

    let failed = Command::new(env!("CARGO_BIN_EXE_blankcrack"))
        .args(["cstp-eval", "--journal", j, "--corpus", &corpus_arg, "--oracle", "external"])
        .output()
        .unwrap();
    assert!(!failed.status.success());
}
