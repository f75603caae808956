//! The `vpg` binary end to end: outputs, written files and exit codes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus").join(name)
}

fn vpg(args: &[&dyn AsRef<std::ffi::OsStr>]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vpg")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn tokens(dir: &TempDir, name: &str, lines: &[&str]) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, lines.iter().map(|l| format!("{l}\n")).collect::<String>()).unwrap();
    p
}

#[test]
fn parse_prints_fig2_forest() {
    let d = TempDir::new().unwrap();
    let t = tokens(&d, "w.tok", &["'a'", "'c'", "'d'", "'b'"]);
    let o = vpg(&[&"parse", &corpus("fig2.vpg"), &t, &"--forest"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "[1] (l,f) --<'a'--> (a,t)\n[2] (a,t) --'c'--> (d,t)\n[3] (d,t) --'d'--> (e,t)\n[4] ((l,f),(a,t)) --'b'>--> (l,f)\n"
    );
}

#[test]
fn parse_counts_ambiguous_trees() {
    let d = TempDir::new().unwrap();
    let t = tokens(&d, "w.tok", &["'c'", "'d'", "'c'", "'d'", "'c'", "'d'"]);
    let o = vpg(&[&"parse", &corpus("g2.vpg"), &t, &"--count"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "8");
    let all = vpg(&[&"parse", &corpus("g2.vpg"), &t, &"--all-trees", &"100"]);
    assert_eq!(stdout(&all).lines().count(), 8);
}

#[test]
fn rejection_exits_one() {
    let d = TempDir::new().unwrap();
    let t = tokens(&d, "w.tok", &["'c'"]);
    for cmd in ["recognize", "parse"] {
        let o = vpg(&[&cmd, &corpus("fig2.vpg"), &t]);
        assert_eq!(o.status.code(), Some(1), "{cmd}");
    }
}

#[test]
fn unknown_token_and_missing_file_exit_two() {
    let d = TempDir::new().unwrap();
    let t = tokens(&d, "w.tok", &["'zz'"]);
    assert_eq!(vpg(&[&"recognize", &corpus("fig2.vpg"), &t]).status.code(), Some(2));
    assert_eq!(vpg(&[&"recognize", &d.path().join("none.vpg"), &t]).status.code(), Some(2));
    assert_eq!(vpg(&[&"frobnicate"]).status.code(), Some(2));
}

#[test]
fn validate_reports_left_recursion() {
    let bad = vpg(&[&"validate", &corpus("left_rec.tcfg")]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("l -> l") || stdout(&bad).contains("l -> l"));
    assert_eq!(vpg(&[&"validate", &corpus("json.tcfg")]).status.code(), Some(0));
}

#[test]
fn translate_writes_vpg_sidecar_and_stages() {
    let d = TempDir::new().unwrap();
    let out = d.path().join("f.vpg");
    let stages = d.path().join("stages");
    let o = vpg(&[&"translate", &corpus("appendix_f.tcfg"), &"-o", &out, &"--dump-stages", &stages]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        fs::read_to_string(&out).unwrap(),
        "l = 'c' _g2 ;\n_g2 = <'a' _g1 'b'> e ;\n_g1 = 'c' e ;\na = 'c' e ;\ne = ;\n"
    );
    assert!(d.path().join("f.vpg.actions").exists());
    for f in ["desugared.tcfg", "simple.tcfg", "linear.tcfg", "out.vpg", "actions.tsv"] {
        assert!(stages.join(f).exists(), "{f}");
    }
    // The translated grammar with its sidecar rebuilds source-grammar trees.
    let t = tokens(&d, "w.tok", &["'c'", "'a'\tx", "'c'", "'b'"]);
    let tree = vpg(&[&"parse", &out, &t, &"--cfg-tree"]);
    assert_eq!(stdout(&tree).trim(), "(l (a 'c') x (a 'c') e⁰ 'b' e⁰)");
}

#[test]
fn built_bundle_parses_like_the_grammar() {
    let d = TempDir::new().unwrap();
    let pda = d.path().join("fig2.pda");
    assert_eq!(vpg(&[&"build", &corpus("fig2.vpg"), &"-o", &pda]).status.code(), Some(0));
    let t = tokens(&d, "w.tok", &["'a'", "'c'", "'d'", "'b'"]);
    let from_bundle = vpg(&[&"parse", &pda, &t]);
    let from_source = vpg(&[&"parse", &corpus("fig2.vpg"), &t]);
    assert_eq!(from_bundle.status.code(), Some(0));
    assert_eq!(stdout(&from_bundle), stdout(&from_source));
}

#[test]
fn recognize_debug_shows_pending_call() {
    let d = TempDir::new().unwrap();
    let t = tokens(&d, "w.tok", &["'a'"]);
    let o = vpg(&[&"recognize", &corpus("pending_calls.vpg"), &t, &"--debug"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("stack [{(l,l)},<'a']·⊥"), "{}", stdout(&o));
}

#[test]
fn html_optional_endtags_flag() {
    let d = TempDir::new().unwrap();
    let t = tokens(&d, "w.tok", &["TagOpen", "TagOpen", "TagClose"]);
    let plain = vpg(&[&"recognize", &corpus("html.tcfg"), &t]);
    let fixed = vpg(&[&"recognize", &corpus("html.tcfg"), &t, &"--html-optional-endtags"]);
    assert_ne!(plain.status.code(), Some(0));
    assert_eq!(fixed.status.code(), Some(0), "{}", String::from_utf8_lossy(&fixed.stderr));
}

#[test]
fn bench_writes_csv() {
    let d = TempDir::new().unwrap();
    let csv = d.path().join("b.csv");
    let o = vpg(&[&"bench", &corpus("json.tcfg"), &"--sizes", &"1e3,2e3", &"--reps", &"1", &"-o", &csv]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().skip(1).all(|l| l.starts_with("json,")));
}
