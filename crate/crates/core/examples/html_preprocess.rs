//! HTML with optional end tags: the token preprocessor keeps the first k
//! open tags as calls (k = number of close tags) and makes the rest plain.
//!
//! ```bash
//! cargo run --example html_preprocess
//! ```

use vpg::corpus;
use vpg::grammar::parse_tagged_cfg;
use vpg::tokens::{html_optional_endtags, parse_tokens, resolve, write_tokens};
use vpg::translate::{translate, DEFAULT_ITER_CAP};
use vpg::Compiled;

// <html><body><p>one<p>two<br></body></html>
const TOKENS: &str = "TagOpen\t<html>\nTagOpen\t<body>\nTagOpen\t<p>\nHTML_TEXT\tone\nTagOpen\t<p>\nHTML_TEXT\ttwo\n\
TagSingle\t<br>\nTagClose\t</body>\nTagClose\t</html>\n";

fn main() {
    let t = translate(&parse_tagged_cfg(corpus::HTML_TCFG).unwrap(), DEFAULT_ITER_CAP).unwrap();
    let c = Compiled::new(t.vpg, t.actions);
    let mut records = parse_tokens(TOKENS).unwrap();

    let raw = resolve(&c.vpg, &records).unwrap();
    println!("as lexed: {}", c.recognize(&raw).map_or_else(|r| format!("reject ({r})"), |_| "accept".into()));

    html_optional_endtags(&mut records).unwrap();
    print!("\nafter preprocessing:\n{}", write_tokens(&records));
    let ids = resolve(&c.vpg, &records).unwrap();
    let parsed = c.parse(&ids).unwrap();
    let idx = c.index(&parsed.forest);
    println!("\naccept, {} tree(s)", idx.count());
    let lexemes: Vec<_> = records.iter().map(|r| r.lexeme.clone()).collect();
    println!("{}", c.cfg_tree(&idx.first_tree().unwrap(), &lexemes).unwrap().to_sexpr());
}
