use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jointparse")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn fixture(name: &str) -> String {
    format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn generated_trees_score_perfectly_against_themselves() {
    let dir = tempfile::tempdir().unwrap();
    let bank = dir.path().join("synth.joint");
    let o = run(&["generate", "--count", "20", "--seed", "5", "--out", p(&bank)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("trees 20"), "{}", stdout(&o));
    let json = dir.path().join("r.json");
    let o = run(&["eval", "--gold", p(&bank), "--pred", p(&bank), "--json", p(&json)]);
    assert!(o.status.success());
    let table = stdout(&o);
    assert_eq!(table.lines().filter(|l| l.ends_with("100.00")).count(), 7, "{table}");
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["documents"].as_array().unwrap().len(), 20);
    assert_eq!(report["micro"]["rel_f1"], 100.0);
}

#[test]
fn eval_rejects_mismatched_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.joint");
    let b = dir.path().join("b.joint");
    assert!(run(&["generate", "--count", "3", "--out", p(&a)]).status.success());
    assert!(run(&["generate", "--count", "2", "--out", p(&b)]).status.success());
    assert_eq!(run(&["eval", "--gold", p(&a), "--pred", p(&b)]).status.code(), Some(1));
    fs::write(&b, "(S (NP a)").unwrap();
    assert_eq!(run(&["eval", "--gold", p(&a), "--pred", p(&b)]).status.code(), Some(1));
    let missing = dir.path().join("missing.joint");
    assert_eq!(run(&["eval", "--gold", p(&a), "--pred", p(&missing)]).status.code(), Some(2));
}

#[test]
fn verify_oracle_passes() {
    let o = run(&["verify", "--oracle", "--states", "300", "--max-tokens", "5"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("oracle: 300 states"));
    assert_eq!(run(&["verify"]).status.code(), Some(1));
}

#[test]
fn convert_empty_directories() {
    let dir = tempfile::tempdir().unwrap();
    let (ptb, rst) = (dir.path().join("ptb"), dir.path().join("rst"));
    fs::create_dir_all(&ptb).unwrap();
    fs::create_dir_all(&rst).unwrap();
    let out = dir.path().join("out.joint");
    let o = run(&["convert", "--ptb", p(&ptb), "--rst", p(&rst), "--out", p(&out)]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("trees 0"), "{}", stdout(&o));
    assert!(stdout(&o).contains("dropped 0"));
    assert_eq!(fs::read_to_string(&out).unwrap(), "");
    let gone = dir.path().join("nowhere");
    assert_eq!(run(&["convert", "--ptb", p(&gone), "--rst", p(&rst), "--out", p(&out)]).status.code(), Some(2));
}

#[test]
fn convert_generated_corpus_and_drop_misaligned() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    let expected = dir.path().join("expected.joint");
    let o = run(&["generate", "--count", "12", "--seed", "40", "--corpus", p(&corpus), "--out", p(&expected)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let out = dir.path().join("converted.joint");
    let dropped = dir.path().join("dropped.txt");
    let (ptb, rst) = (corpus.join("ptb"), corpus.join("rst"));
    let args = [
        "convert", "--ptb", p(&ptb), "--rst", p(&rst),
        "--out", p(&out), "--dropped", p(&dropped),
    ];
    let o = run(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(&out).unwrap(), fs::read_to_string(&expected).unwrap());
    assert_eq!(fs::read_to_string(&dropped).unwrap(), "");

    // an EDU text that no longer matches the words of its document
    let victim = corpus.join("rst/synth_00003.out.dis");
    let text = fs::read_to_string(&victim).unwrap();
    let start = text.find("_!").unwrap() + 2;
    fs::write(&victim, format!("{}zzz {}", &text[..start], &text[start..])).unwrap();
    // a document without constituency trees
    fs::remove_file(corpus.join("ptb/synth_00007.mrg")).unwrap();

    let o = run(&args);
    assert!(o.status.success());
    assert!(stdout(&o).contains("trees 10"), "{}", stdout(&o));
    assert!(stdout(&o).contains("dropped 2"));
    let listed = fs::read_to_string(&dropped).unwrap();
    let ids: Vec<&str> = listed.lines().map(|l| l.split('\t').next().unwrap()).collect();
    assert_eq!(ids, ["synth_00003", "synth_00007"]);
    assert!(listed.contains("no constituency file"));
}

#[test]
fn convert_worked_examples() {
    let dir = tempfile::tempdir().unwrap();
    let (ptb, rst) = (dir.path().join("ptb"), dir.path().join("rst"));
    fs::create_dir_all(&ptb).unwrap();
    fs::create_dir_all(&rst).unwrap();
    for k in ["costa_rica", "metals"] {
        fs::copy(fixture(&format!("{k}.mrg")), ptb.join(format!("{k}.mrg"))).unwrap();
        fs::copy(fixture(&format!("{k}.dis")), rst.join(format!("{k}.out.dis"))).unwrap();
    }
    let out = dir.path().join("examples.joint");
    assert!(run(&["convert", "--ptb", p(&ptb), "--rst", p(&rst), "--out", p(&out)]).status.success());
    let expected = format!(
        "{}\n\n{}\n\n",
        fs::read_to_string(fixture("costa_rica.joint")).unwrap().trim(),
        fs::read_to_string(fixture("metals.joint")).unwrap().trim()
    );
    assert_eq!(fs::read_to_string(&out).unwrap(), expected);
}

#[test]
fn bad_config_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let bank = dir.path().join("b.joint");
    assert!(run(&["generate", "--count", "3", "--out", p(&bank)]).status.success());
    let cfg = dir.path().join("c.json");
    let out = dir.path().join("run");
    for bad in [
        r#"{"train": {"beta": 2.0}}"#,
        r#"{"train": {"betta": 0.5}}"#,
        r#"{"model": {"lstm_dim": 0}}"#,
        r#"{"train": {"dev_size": 3}}"#,
        "not json",
    ] {
        fs::write(&cfg, bad).unwrap();
        let o = run(&["train", "--config", p(&cfg), "--treebank", p(&bank), "--out", p(&out)]);
        assert_eq!(o.status.code(), Some(1), "{bad}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(run(&["train", "--out", p(&out)]).status.code(), Some(1));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
}

#[test]
fn overfit_costa_rica_and_parse_it_back() {
    let dir = tempfile::tempdir().unwrap();
    let bank = dir.path().join("costa_rica.joint");
    fs::copy(fixture("costa_rica.joint"), &bank).unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(
        &cfg,
        r#"{
  "model": {"word_dim": 16, "lstm_dim": 32, "hidden_dim": 64},
  "train": {"epochs": 80, "dropout": 0.0, "unk_replace": 0.0, "dev_size": 0, "optimizer": {"learning_rate": 0.01}},
  "eval": {"keep_epochs": false}
}"#,
    )
    .unwrap();
    let out = dir.path().join("run");
    let o = run(&["train", "--config", p(&cfg), "--treebank", p(&bank), "--out", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("dev 100.00"), "{}", stdout(&o));
    for f in ["best.ckpt", "config.json", "train.log"] {
        assert!(out.join(f).exists(), "{f}");
    }
    assert!(!out.join("epoch-1.ckpt").exists());

    let tokens = dir.path().join("costa_rica.tok");
    fs::write(
        &tokens,
        "Costa Rica had been negotiating with U.S. banks but the debt plan was rushed to completion\nin order to be announced at the meeting\n",
    )
    .unwrap();
    let model = out.join("best.ckpt");
    let o = run(&["parse", "--model", p(&model), "--input", p(&tokens)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let expected = fs::read_to_string(fixture("costa_rica.joint")).unwrap();
    assert_eq!(stdout(&o), format!("{}\n\n", expected.trim()));

    let edus = dir.path().join("costa_rica.edus");
    fs::write(&edus, "0:8 8:16 16:24\n").unwrap();
    let o = run(&["parse", "--model", p(&model), "--input", p(&tokens), "--gold-edus", p(&edus)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let parsed = stdout(&o);
    assert!(parsed.starts_with("(Background-> (EDU "), "{parsed}");
    assert!(parsed.contains("(<-Purpose (EDU "), "{parsed}");

    fs::write(&model, "{}").unwrap();
    assert_eq!(run(&["parse", "--model", p(&model), "--input", p(&tokens)]).status.code(), Some(1));
}
