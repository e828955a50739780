mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::{canned_reply, fixture, StubServer};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sapphire-novelty"));
    cmd.env_remove("SAPPHIRE_EMBED_URL");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fixture_args(format: &str) -> Vec<String> {
    vec![
        "--past".into(),
        path(&fixture("past.jsonl")).into(),
        "--current".into(),
        path(&fixture("current.jsonl")).into(),
        "--backend".into(),
        "fixture".into(),
        "--fixtures".into(),
        path(&fixture("similarities.tsv")).into(),
        "--format".into(),
        format.into(),
    ]
}

fn assess(sub: &str, format: &str) -> Output {
    bin().arg(sub).args(fixture_args(format)).output().unwrap()
}

fn golden(name: &str, actual: &str) {
    let file = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    if std::env::var_os("BLESS").is_some() {
        std::fs::write(&file, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&file).unwrap_or_else(|_| panic!("missing golden file {}", file.display()));
    assert_eq!(
        actual, expected,
        "output differs from {name}; rerun with BLESS=1 to update"
    );
}

#[test]
fn validate_exit_codes() {
    let ok = run(&[
        "validate",
        path(&fixture("past.jsonl")),
        path(&fixture("current.jsonl")),
    ]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    assert!(stdout(&ok).contains("ok (2 problems)"));

    let dir = tempfile::tempdir().unwrap();
    let dup = dir.path().join("dup.jsonl");
    let line = std::fs::read_to_string(fixture("past.jsonl"))
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_owned();
    std::fs::write(&dup, format!("{line}\n{line}\n")).unwrap();
    let bad = run(&["validate", path(&dup)]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("duplicate id 'PS1'"));

    let missing = run(&["validate", "/nonexistent/corpus.jsonl"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn assess_table_matches_golden() {
    let out = assess("assess", "table");
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let row = |label: &str| -> Vec<String> {
        let line = text.lines().find(|l| l.starts_with(label)).unwrap();
        line[label.len()..].split_whitespace().map(str::to_owned).collect()
    };
    assert!(text.contains("backend: fixture"));
    assert!(text.contains("action gate threshold: 0.7"));
    // first block is PS1 against PS3, PS4, PS5
    assert_eq!(row("Constructs/ Comparison pair"), ["PS1-PS3", "PS1-PS4", "PS1-PS5"]);
    let ps1_ps3: Vec<String> = [
        "Action",
        "State Change",
        "Phenomena",
        "Effect",
        "Input",
        "oRgan",
        "Parts",
        "Avg. Novelty",
    ]
    .iter()
    .map(|l| row(l)[0].clone())
    .collect();
    assert_eq!(ps1_ps3, ["0", "0.686", "0.519", "0", "0.699", "0.796", "0.613", "0.55"]);
    assert!(text.contains("Cumulative Decision on Novelty  Medium Novelty"));
    golden("kettle_fixture_table.txt", &text);
}

#[test]
fn rank_prints_summary_only() {
    let out = assess("rank", "table");
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(!text.contains("Comparison of"));
    let ranked: Vec<&str> = text
        .lines()
        .skip_while(|l| !l.starts_with("Rank "))
        .skip(1)
        .map(|l| l.split_whitespace().nth(1).unwrap())
        .collect();
    assert_eq!(ranked, ["PS5", "PS4", "PS3"]);

    let json: serde_json::Value = serde_json::from_slice(&assess("rank", "json").stdout).unwrap();
    assert_eq!(json["ranked"][0]["current_id"], "PS5");
    assert!(json["ranked"][0].get("assessments").is_none());
}

#[test]
fn formats_carry_the_same_scores() {
    let table = stdout(&assess("assess", "table"));
    let csv_text = stdout(&assess("assess", "csv"));
    let json: serde_json::Value = serde_json::from_slice(&assess("assess", "json").stdout).unwrap();

    assert!(csv_text.starts_with("# backend=fixture threshold=0.7\n"));
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(csv_text.as_bytes());
    let headers = reader.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    let pairs: Vec<&csv::StringRecord> = rows.iter().filter(|r| &r[0] == "pair").collect();
    assert_eq!(pairs.len(), 6);

    for ranked in json["ranked"].as_array().unwrap() {
        for a in ranked["assessments"].as_array().unwrap() {
            let (p, c) = (a["past_id"].as_str().unwrap(), a["current_id"].as_str().unwrap());
            let row = pairs.iter().find(|r| &r[1] == p && &r[2] == c).unwrap();
            let json_avg = a["average_novelty"].as_f64().unwrap();
            let csv_avg: f64 = row[col("avg_novelty")].parse().unwrap();
            assert_eq!(json_avg.to_bits(), csv_avg.to_bits());
            for (key, value) in a["construct_novelty"].as_object().unwrap() {
                let csv_value: f64 = row[col(key)].parse().unwrap();
                assert_eq!(value.as_f64().unwrap().to_bits(), csv_value.to_bits());
            }
            // the table shows the same average at two decimals
            let header = table.lines().find(|l| l.contains(&format!("{p}-{c}"))).unwrap();
            let column = header.split_whitespace().position(|t| t == format!("{p}-{c}")).unwrap() - 3;
            let avg_row = table
                .lines()
                .skip_while(|l| *l != header)
                .find(|l| l.starts_with("Avg. Novelty"))
                .unwrap();
            let shown = avg_row["Avg. Novelty".len()..].split_whitespace().nth(column).unwrap();
            assert_eq!(shown, sapphire_novelty::report::format_average(json_avg));
        }
    }
}

#[test]
fn out_files_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    for format in ["table", "csv", "json"] {
        let files: Vec<PathBuf> = (0..2).map(|i| dir.path().join(format!("{format}{i}"))).collect();
        for f in &files {
            let o = bin()
                .arg("assess")
                .args(fixture_args(format))
                .args(["--out", path(f)])
                .output()
                .unwrap();
            assert_eq!(o.status.code(), Some(0));
            assert!(o.stdout.is_empty());
        }
        assert_eq!(std::fs::read(&files[0]).unwrap(), std::fs::read(&files[1]).unwrap());
    }
}

#[test]
fn identical_corpora_score_zero() {
    let dir = tempfile::tempdir().unwrap();
    let line = std::fs::read_to_string(fixture("current.jsonl"))
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_owned();
    let past = dir.path().join("past.jsonl");
    let current = dir.path().join("current.jsonl");
    std::fs::write(&past, line.replace("\"current\"", "\"past\"") + "\n").unwrap();
    std::fs::write(&current, line + "\n").unwrap();
    for backend in ["lexical", "fixture"] {
        let o = run(&[
            "assess",
            "--past",
            path(&past),
            "--current",
            path(&current),
            "--backend",
            backend,
            "--fixtures",
            path(&fixture("similarities.tsv")),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let text = stdout(&o);
        assert!(text.contains("Avg. Novelty                    0.00"), "{text}");
        assert!(text.contains("Low Novelty"));
        assert!(text
            .lines()
            .any(|l| l.split_whitespace().collect::<Vec<_>>() == ["1", "PS3", "0.00", "Low", "Novelty", "PS3"]));
    }
}

#[test]
fn missing_fixture_pair_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let pins = dir.path().join("pins.tsv");
    let full = std::fs::read_to_string(fixture("similarities.tsv")).unwrap();
    std::fs::write(
        &pins,
        full.lines()
            .filter(|l| !l.starts_with("Worn lid gasket\tLoose"))
            .collect::<Vec<_>>()
            .join("\n"),
    )
    .unwrap();
    let o = run(&[
        "assess",
        "--past",
        path(&fixture("past.jsonl")),
        "--current",
        path(&fixture("current.jsonl")),
        "--backend",
        "fixture",
        "--fixtures",
        path(&pins),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(
        err.contains("Worn lid gasket") && err.contains("Loose-fitting lid"),
        "{err}"
    );
}

#[test]
fn unmatched_problems_are_listed() {
    let dir = tempfile::tempdir().unwrap();
    let current = dir.path().join("current.jsonl");
    std::fs::write(
        &current,
        r#"{"id":"X1","label":"","provenance":"current","source":"","context":"","constructs":{"action":"tough to clean","parts":"base"}}"#.to_owned() + "\n",
    )
    .unwrap();
    let o = run(&[
        "assess",
        "--past",
        path(&fixture("past.jsonl")),
        "--current",
        path(&current),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("Unmatched"));
    assert!(text.trim_end().ends_with("X1"));
}

#[test]
fn data_and_usage_errors() {
    let (past, current) = (fixture("past.jsonl"), fixture("current.jsonl"));
    let base = ["assess", "--past", path(&past), "--current", path(&current)];
    let o = bin().args(base).args(["--threshold", "1.5"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = bin().args(base).args(["--backend", "fixture"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = bin().args(base).args(["--backend", "remote"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    // past file given as current: lenient mode skips every record, strict mode rejects
    let o = run(&["assess", "--past", path(&past), "--current", path(&past)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("does not match corpus role"));
    let o = run(&["assess", "--past", path(&past), "--current", path(&past), "--strict"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&[
        "assess",
        "--past",
        "/nonexistent.jsonl",
        "--current",
        path(&fixture("current.jsonl")),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn remote_backend_reads_endpoint_from_env() {
    let server = StubServer::start(|_, body| (200, canned_reply(body)));
    let o = bin()
        .env("SAPPHIRE_EMBED_URL", &server.url)
        .args([
            "rank",
            "--past",
            path(&fixture("past.jsonl")),
            "--current",
            path(&fixture("current.jsonl")),
        ])
        .args(["--backend", "remote", "--format", "json", "--threshold", "0.9"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let json: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(json["backend"], "remote_embedding");
    assert_eq!(json["ranked"].as_array().unwrap().len(), 3);
    // every distinct construct text is embedded once, in a single batch
    assert_eq!(server.request_count(), 1);
}

#[test]
fn oscore_outputs() {
    for (n, m, expected) in [("2", "8", "0.7500"), ("0", "5", "1.0000"), ("5", "5", "0.0000")] {
        let o = run(&["oscore", n, m]);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout(&o), format!("{expected}\n"));
    }
    for (n, m) in [("6", "5"), ("0", "0"), ("-1", "5"), ("x", "5")] {
        assert_eq!(run(&["oscore", n, m]).status.code(), Some(1), "n={n} m={m}");
    }
}

#[test]
fn import_survey_writes_a_valid_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("survey.jsonl");
    let o = run(&[
        "import-survey",
        path(&fixture("survey.csv")),
        "--context",
        "electric kettle",
        "--out",
        path(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = run(&["validate", path(&out)]);
    assert_eq!(v.status.code(), Some(0));
    assert!(stdout(&v).contains("ok (3 problems)"));
}
