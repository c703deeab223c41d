//! Tokenizer output frozen in `tests/golden/tokenize.out`.
//! Run with `BLESS=1` to regenerate after an intended change.

use std::fs;
use std::path::Path;

use blankcrack_core::corpus::tokenize;
use blankcrack_core::Language;

fn render() -> String {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let input = fs::read_to_string(dir.join("tokenize.in")).unwrap();
    let mut out = String::new();
    for line in input.lines().filter(|l| !l.is_empty()) {
        let (code, text) = line.split_once('\t').unwrap();
        let lang: Language = code.parse().unwrap();
        out.push_str(&format!("{code}\t{text}\t{}\n", tokenize(text, lang).join(" | ")));
    }
    out
}

#[test]
fn tokenizer_matches_golden_file() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/tokenize.out");
    let actual = render();
    if std::env::var_os("BLESS").is_some() {
        fs::write(&path, &actual).unwrap();
    }
    let expected = fs::read_to_string(&path).expect("golden file missing; run with BLESS=1");
    for (e, a) in expected.lines().zip(actual.lines()) {
        assert_eq!(e, a);
    }
    assert_eq!(expected.lines().count(), actual.lines().count());
}
