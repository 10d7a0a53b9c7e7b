use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn relwsd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relwsd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn path(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

fn token(w: &str, tag: &str) -> Value {
    json!({"surface": w, "lemma": w, "tag": tag})
}

/// Filler words around `inner`, long enough to pass the sentence filter.
fn sentence(inner: &[(&str, &str)]) -> Vec<Value> {
    let mut t = vec![
        token("wczoraj", "adv"),
        token("stary", "adj:sg:nom:m1:pos"),
        token("sąsiad", "subst:sg:nom:m1"),
        token("opowiadał", "praet:sg:m1:imperf"),
    ];
    t.extend(inner.iter().map(|(w, tag)| token(w, tag)));
    for (w, tag) in [
        ("długo", "adv"),
        ("i", "conj"),
        ("spokojnie", "adv"),
        ("o", "prep:loc"),
        ("dawnych", "adj:pl:loc:m3:pos"),
        ("czasach", "subst:pl:loc:m3"),
        ("oraz", "conj"),
        ("ludziach", "subst:pl:loc:m1"),
        ("z", "prep:gen"),
        ("okolicy", "subst:sg:gen:f"),
        ("nad", "prep:inst"),
        ("rzeką", "subst:sg:inst:f"),
        ("pod", "prep:inst"),
        ("wysokimi", "adj:pl:inst:n:pos"),
        ("drzewami", "subst:pl:inst:n"),
        ("przy", "prep:loc"),
        ("starej", "adj:sg:loc:f:pos"),
        ("drodze", "subst:sg:loc:f"),
        (".", "interp"),
    ] {
        t.push(token(w, tag));
    }
    t
}

fn write_lines(p: &Path, lines: &[Value]) {
    let text: String = lines.iter().map(|l| format!("{l}\n")).collect();
    fs::write(p, text).unwrap();
}

/// `zamek#1` has the monosemous child `warownia`, `zamek#2` the
/// monosemous hypernym `mechanizm`.
fn fixture(dir: &Path) {
    write_lines(
        &dir.join("wordnet.jsonl"),
        &[
            json!({"synset_id": "zamek1", "units": [{"lemma": "zamek", "sense": 1}]}),
            json!({"synset_id": "warownia", "units": [{"lemma": "warownia", "sense": 1}], "hypernyms": ["zamek1"]}),
            json!({"synset_id": "mechanizm", "units": [{"lemma": "mechanizm", "sense": 1}]}),
            json!({"synset_id": "zamek2", "units": [{"lemma": "zamek", "sense": 2}], "hypernyms": ["mechanizm"]}),
        ],
    );
    write_lines(
        &dir.join("corpus.jsonl"),
        &[
            json!({"doc_id": "a", "sentences": [sentence(&[("warownia", "subst:sg:nom:f"), ("mury", "subst:pl:nom:m3")]), sentence(&[("warownia", "subst:sg:nom:f"), ("mury", "subst:pl:nom:m3")])]}),
            json!({"doc_id": "b", "sentences": [sentence(&[("mechanizm", "subst:sg:nom:m3"), ("drzwi", "subst:pl:gen:n")])]}),
            json!({"doc_id": "c", "sentences": [sentence(&[("warownia", "subst:sg:nom:f"), ("mury", "subst:pl:nom:m3")]), [token("za", "prep:acc"), token("krótkie", "adj:sg:acc:n:pos")]]}),
        ],
    );
}

fn model(dir: &Path) -> Value {
    serde_json::from_slice(&fs::read(dir.join("models/zamek.json")).unwrap()).unwrap()
}

#[test]
fn train_counts_match_hand_tally() {
    let tmp = tempfile::tempdir().unwrap();
    fixture(tmp.path());
    let (wn, corpus, out) = (
        tmp.path().join("wordnet.jsonl"),
        tmp.path().join("corpus.jsonl"),
        tmp.path().join("out"),
    );
    let o = relwsd(&[
        "train",
        "--wordnet",
        path(&wn),
        "--corpus",
        path(&corpus),
        "--word",
        "zamek",
        "--level",
        "2",
        "--out",
        path(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let m = model(&out);
    let senses = m["senses"].as_array().unwrap();
    assert_eq!(senses[0]["sense"], 1);
    assert_eq!(senses[0]["n"], 3);
    assert_eq!(senses[1]["n"], 1);
    // the word before every relative is `opowiadał`
    assert_eq!(senses[0]["counts"]["Lp-1=opowiadał"], 3);
    assert_eq!(senses[1]["counts"]["Lp-1=opowiadał"], 1);
    assert_eq!(senses[0]["counts"]["Lp+1=mury"], 3);
    assert_eq!(senses[1]["counts"]["Lp+1=drzwi"], 1);
    assert!(senses[0]["counts"].get("L=mechanizm").is_none());

    let stats: Value = serde_json::from_slice(&fs::read(out.join("stats.json")).unwrap()).unwrap();
    assert_eq!(stats["documents"], 3);
    assert_eq!(stats["sentences"], 5);
    assert_eq!(stats["qualified"], 4);
    assert!(out.join("manifest.json").is_file());
}

#[test]
fn classify_labels_and_flags_unknown_words() {
    let tmp = tempfile::tempdir().unwrap();
    fixture(tmp.path());
    let (wn, corpus, out) = (
        tmp.path().join("wordnet.jsonl"),
        tmp.path().join("corpus.jsonl"),
        tmp.path().join("out"),
    );
    let o = relwsd(&[
        "train",
        "--wordnet",
        path(&wn),
        "--corpus",
        path(&corpus),
        "--word",
        "zamek",
        "--features",
        "L",
        "--out",
        path(&out),
    ]);
    assert_eq!(code(&o), 0);

    let input = tmp.path().join("input.jsonl");
    let castle = [token("zamek", "subst:sg:nom:m3"), token("mury", "subst:pl:nom:m3")];
    let lock = [token("zamek", "subst:sg:nom:m3"), token("drzwi", "subst:pl:gen:n")];
    write_lines(
        &input,
        &[
            json!({"word": "zamek", "span_start": 0, "tokens": castle}),
            json!({"word": "zamek", "span_start": 0, "tokens": lock}),
            json!({"word": "klucz", "span_start": 0, "tokens": [token("klucz", "subst:sg:nom:m3")]}),
        ],
    );
    let cls = tmp.path().join("cls");
    let o = relwsd(&[
        "classify",
        "--models",
        path(&out),
        "--input",
        path(&input),
        "--out",
        path(&cls),
    ]);
    assert_eq!(code(&o), 6, "unknown word makes the run partial");
    let preds: Vec<Value> = fs::read_to_string(cls.join("predictions.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(preds.len(), 3);
    assert_eq!(preds[0]["sense"], 1);
    assert_eq!(preds[1]["sense"], 2);
    assert!(preds[2]["sense"].is_null());
    assert_eq!(preds[2]["error"], "no model");
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    fixture(tmp.path());
    let wn = tmp.path().join("wordnet.jsonl");
    let out = tmp.path().join("out");

    let missing = relwsd(&[
        "train",
        "--wordnet",
        path(&wn),
        "--corpus",
        "/nonexistent/corpus.jsonl",
        "--word",
        "zamek",
        "--out",
        path(&out),
    ]);
    assert_eq!(code(&missing), 3);

    let ok = relwsd(&[
        "relatives",
        "--wordnet",
        path(&wn),
        "--word",
        "zamek",
        "--out",
        path(&out),
    ]);
    assert_eq!(code(&ok), 0);
    let o = relwsd(&[
        "train",
        "--wordnet",
        path(&wn),
        "--corpus",
        path(&wn),
        "--word",
        "zamek",
        "--features",
        "L,X",
        "--out",
        path(&out),
    ]);
    assert_eq!(code(&o), 2);
    let o = relwsd(&[
        "relatives",
        "--wordnet",
        path(&wn),
        "--word",
        "nieznany",
        "--out",
        path(&out),
    ]);
    assert_eq!(code(&o), 2);

    let broken = tmp.path().join("broken.jsonl");
    fs::write(&broken, "{\"synset_id\": \n").unwrap();
    let o = relwsd(&[
        "relatives",
        "--wordnet",
        path(&broken),
        "--word",
        "zamek",
        "--out",
        path(&out),
    ]);
    assert_eq!(code(&o), 4);

    let o = relwsd(&["synth", "--senses", "1", "--out", path(&out)]);
    assert_eq!(code(&o), 2);
}

#[test]
fn replay_rejects_changed_inputs() {
    let tmp = tempfile::tempdir().unwrap();
    fixture(tmp.path());
    let (wn, corpus, out) = (
        tmp.path().join("wordnet.jsonl"),
        tmp.path().join("corpus.jsonl"),
        tmp.path().join("out"),
    );
    assert_eq!(
        code(&relwsd(&[
            "train",
            "--wordnet",
            path(&wn),
            "--corpus",
            path(&corpus),
            "--word",
            "zamek",
            "--out",
            path(&out)
        ])),
        0
    );
    let again = tmp.path().join("again");
    let manifest = out.join("manifest.json");
    assert_eq!(
        code(&relwsd(&[
            "replay",
            "--manifest",
            path(&manifest),
            "--out",
            path(&again)
        ])),
        0
    );
    assert_eq!(
        fs::read(&manifest).unwrap(),
        fs::read(again.join("manifest.json")).unwrap()
    );

    fs::write(&corpus, "").unwrap();
    let o = relwsd(&[
        "replay",
        "--manifest",
        path(&manifest),
        "--out",
        path(&tmp.path().join("third")),
    ]);
    assert_eq!(code(&o), 4);
}
