//! Token files: one record per line, `NAME` or `NAME<TAB>lexeme`, with the
//! lexeme backslash-escaped (`\t`, `\n`, `\\`). Blank lines are skipped.

use thiserror::Error;

use crate::grammar::{TermId, Vpg};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenRecord {
    pub name: String,
    pub lexeme: Option<String>,
    /// 1-based line and column of the name.
    pub line: usize,
    pub col: usize,
}

impl TokenRecord {
    pub fn new(name: impl Into<String>, lexeme: Option<String>) -> Self {
        TokenRecord { name: name.into(), lexeme, line: 0, col: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TokenError {
    #[error("{line}:{col}: bad escape `\\{ch}`")]
    BadEscape { line: usize, col: usize, ch: char },
    #[error("{line}:{col}: unknown terminal `{name}`")]
    UnknownTerminal { line: usize, col: usize, name: String },
    #[error("{closes} closing tags but only {opens} opening tags")]
    MoreCloseThanOpen { opens: usize, closes: usize },
}

pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\\' => out.push_str("\\\\"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(s: &str, line: usize, col: usize) -> Result<String, TokenError> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars().enumerate();
    while let Some((k, c)) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some((_, 't')) => out.push('\t'),
            Some((_, 'n')) => out.push('\n'),
            Some((_, '\\')) => out.push('\\'),
            Some((_, ch)) => return Err(TokenError::BadEscape { line, col: col + k, ch }),
            None => return Err(TokenError::BadEscape { line, col: col + s.chars().count(), ch: ' ' }),
        }
    }
    Ok(out)
}

pub fn parse_tokens(text: &str) -> Result<Vec<TokenRecord>, TokenError> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        let indent = raw.len() - raw.trim_start_matches(' ').len();
        let body = &raw[indent..];
        if body.trim().is_empty() {
            continue;
        }
        let (name, lexeme) = match body.split_once('\t') {
            Some((n, lx)) => (n, Some(unescape(lx, line, indent + n.chars().count() + 2)?)),
            None => (body, None),
        };
        out.push(TokenRecord { name: name.trim_end().to_string(), lexeme, line, col: indent + 1 });
    }
    Ok(out)
}

pub fn write_tokens(records: &[TokenRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&r.name);
        if let Some(lx) = &r.lexeme {
            out.push('\t');
            out.push_str(&escape(lx));
        }
        out.push('\n');
    }
    out
}

/// Looks a record's name up in `g`. A bare name also matches the quoted
/// literal of the same spelling, so `{` finds `'{'`.
pub fn resolve(g: &Vpg, records: &[TokenRecord]) -> Result<Vec<TermId>, TokenError> {
    records
        .iter()
        .map(|r| {
            g.term(&r.name).or_else(|| g.term(&format!("'{}'", r.name))).ok_or_else(|| TokenError::UnknownTerminal {
                line: r.line,
                col: r.col,
                name: r.name.clone(),
            })
        })
        .collect()
}

pub const TAG_OPEN: &str = "TagOpen";
pub const TAG_CLOSE: &str = "TagClose";
pub const TAG_PLAIN: &str = "TagPlain";

/// With `k` closing tags, the first `k` opening tags stay calls and every
/// later opening tag becomes a plain `TagPlain`.
pub fn html_optional_endtags(records: &mut [TokenRecord]) -> Result<(), TokenError> {
    let opens = records.iter().filter(|r| r.name == TAG_OPEN).count();
    let closes = records.iter().filter(|r| r.name == TAG_CLOSE).count();
    if closes > opens {
        return Err(TokenError::MoreCloseThanOpen { opens, closes });
    }
    records.iter_mut().filter(|r| r.name == TAG_OPEN).skip(closes).for_each(|r| r.name = TAG_PLAIN.to_string());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn names(rs: &[TokenRecord]) -> Vec<&str> {
        rs.iter().map(|r| r.name.as_str()).collect()
    }

    #[test]
    fn reads_names_and_lexemes() {
        let rs = parse_tokens("'a'\nSTRING\t\"x\\ty\"\n\n  B\n").unwrap();
        assert_eq!(names(&rs), ["'a'", "STRING", "B"]);
        assert_eq!(rs[1].lexeme.as_deref(), Some("\"x\ty\""));
        assert_eq!((rs[2].line, rs[2].col), (4, 3));
    }

    #[test]
    fn bad_escape_has_position() {
        assert_eq!(parse_tokens("A\tok\\q").unwrap_err(), TokenError::BadEscape { line: 1, col: 5, ch: 'q' });
    }

    #[test]
    fn html_three_opens_two_closes() {
        let mut rs: Vec<TokenRecord> = ["TagOpen", "TagOpen", "TagOpen", "TagClose", "TagClose"]
            .iter()
            .map(|n| TokenRecord::new(*n, None))
            .collect();
        html_optional_endtags(&mut rs).unwrap();
        assert_eq!(names(&rs), ["TagOpen", "TagOpen", "TagPlain", "TagClose", "TagClose"]);
    }

    #[test]
    fn html_balanced_is_unchanged() {
        let mut rs: Vec<TokenRecord> =
            ["TagOpen", "HTML_TEXT", "TagClose"].iter().map(|n| TokenRecord::new(*n, None)).collect();
        let before = rs.clone();
        html_optional_endtags(&mut rs).unwrap();
        assert_eq!(rs, before);
    }

    #[test]
    fn html_more_closes_is_an_error() {
        let mut rs = vec![TokenRecord::new("TagClose", None)];
        assert_eq!(html_optional_endtags(&mut rs).unwrap_err(), TokenError::MoreCloseThanOpen { opens: 0, closes: 1 });
    }

    proptest! {
        #[test]
        fn lexemes_round_trip(lx in "[a-z\\t\\n\\\\ ]{0,12}") {
            let rs = vec![TokenRecord { name: "X".into(), lexeme: Some(lx), line: 1, col: 1 }];
            prop_assert_eq!(parse_tokens(&write_tokens(&rs)).unwrap(), rs);
        }
    }
}
