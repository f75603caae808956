//! Synthetic token streams and phase timings.
//!
//! Generators emit terminal names of the bundled JSON and XML grammars. The
//! `nested` generator is `[` repeated `size / 2` times followed by as many
//! `]`, which drives the stack to depth `size / 2`.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::extract::ForestIndex;
use crate::grammar::TermId;
use crate::pipeline::Compiled;
use crate::tokens::{resolve, TokenError, TokenRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    Json,
    Xml,
    Nested,
}

impl FromStr for Generator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Generator::Json),
            "xml" => Ok(Generator::Xml),
            "nested" => Ok(Generator::Nested),
            _ => Err(format!("unknown generator `{s}` (json, xml, nested)")),
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Generator::Json => "json",
            Generator::Xml => "xml",
            Generator::Nested => "nested",
        })
    }
}

const JSON_SCALARS: [&str; 5] = ["STRING", "NUMBER", "'true'", "'false'", "'null'"];

fn json_value(rng: &mut StdRng, depth: usize, out: &mut Vec<&'static str>) {
    let pick = if depth >= 6 { 0 } else { rng.gen_range(0..10) };
    match pick {
        0..=5 => out.push(JSON_SCALARS[rng.gen_range(0..JSON_SCALARS.len())]),
        6..=7 => {
            out.push("'{'");
            for k in 0..rng.gen_range(0..5) {
                if k > 0 {
                    out.push("','");
                }
                out.extend(["STRING", "':'"]);
                json_value(rng, depth + 1, out);
            }
            out.push("'}'");
        }
        _ => {
            out.push("'['");
            for k in 0..rng.gen_range(0..5) {
                if k > 0 {
                    out.push("','");
                }
                json_value(rng, depth + 1, out);
            }
            out.push("']'");
        }
    }
}

fn xml_element(rng: &mut StdRng, depth: usize, out: &mut Vec<&'static str>) {
    if depth >= 8 || rng.gen_bool(0.3) {
        out.push("SingleTag");
        return;
    }
    out.push("OpenTag");
    let mut text_ok = true;
    for _ in 0..rng.gen_range(0..5) {
        if text_ok && rng.gen_bool(0.5) {
            out.push("TEXT");
        }
        xml_element(rng, depth + 1, out);
        text_ok = true;
    }
    if text_ok && rng.gen_bool(0.5) {
        out.push("TEXT");
    }
    out.push("CloseTag");
}

/// A stream of roughly `size` token names; never shorter than `size`
/// except for `nested`, which rounds down to an even count.
pub fn generate(gen: Generator, size: usize, seed: u64) -> Vec<&'static str> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(size + 64);
    match gen {
        Generator::Json => {
            out.push("'['");
            json_value(&mut rng, 1, &mut out);
            while out.len() + 1 < size {
                out.push("','");
                json_value(&mut rng, 1, &mut out);
            }
            out.push("']'");
        }
        Generator::Xml => {
            out.push("OpenTag");
            while out.len() + 1 < size {
                xml_element(&mut rng, 1, &mut out);
            }
            out.push("CloseTag");
        }
        Generator::Nested => {
            let d = size / 2;
            out.extend(std::iter::repeat_n("'['", d));
            out.extend(std::iter::repeat_n("']'", d));
        }
    }
    out
}

pub fn generate_records(gen: Generator, size: usize, seed: u64) -> Vec<TokenRecord> {
    generate(gen, size, seed).into_iter().map(|n| TokenRecord::new(n, None)).collect()
}

pub fn generate_ids(c: &Compiled, gen: Generator, size: usize, seed: u64) -> Result<Vec<TermId>, TokenError> {
    resolve(&c.vpg, &generate_records(gen, size, seed))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub generator: Generator,
    pub tokens: usize,
    pub parser: Duration,
    pub pruner: Duration,
    pub extract: Duration,
    pub max_depth: usize,
}

impl BenchRow {
    pub const CSV_HEADER: &'static str =
        "generator,tokens,parser_s,pruner_s,extract_s,parser_tok_per_s,pruner_tok_per_s,extract_tok_per_s,max_depth";

    pub fn to_csv(&self) -> String {
        let rate = |d: Duration| self.tokens as f64 / d.as_secs_f64().max(1e-9);
        format!(
            "{},{},{:.6},{:.6},{:.6},{:.0},{:.0},{:.0},{}",
            self.generator,
            self.tokens,
            self.parser.as_secs_f64(),
            self.pruner.as_secs_f64(),
            self.extract.as_secs_f64(),
            rate(self.parser),
            rate(self.pruner),
            rate(self.extract),
            self.max_depth
        )
    }

    pub fn parse_and_prune(&self) -> Duration {
        self.parser + self.pruner
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Tokens(#[from] TokenError),
    #[error("generated input rejected: {0}")]
    Rejected(String),
}

/// Times parser, pruner and first-tree extraction on one stream. Each phase
/// keeps its fastest of `reps` runs.
pub fn bench_one(c: &Compiled, gen: Generator, size: usize, seed: u64, reps: usize) -> Result<BenchRow, BenchError> {
    Ok(bench(c, gen, &[size], seed, reps)?.remove(0))
}

fn time_once(c: &Compiled, w: &[TermId], row: &mut BenchRow) -> Result<(), BenchError> {
    let g = &c.vpg;
    let t0 = Instant::now();
    let run = c.parser.run(g, w).map_err(|e| BenchError::Rejected(e.to_string()))?;
    let t1 = Instant::now();
    let pruned = c.pruner.run(&run.forest).map_err(|e| BenchError::Rejected(e.to_string()))?;
    let t2 = Instant::now();
    let states = pruned.iter().map(|&i| c.pruner.state(i)).collect();
    let tree = ForestIndex::new(g, states).first_tree();
    let t3 = Instant::now();
    if tree.is_none() {
        return Err(BenchError::Rejected("no complete tree".into()));
    }
    row.parser = row.parser.min(t1 - t0);
    row.pruner = row.pruner.min(t2 - t1);
    row.extract = row.extract.min(t3 - t2);
    row.max_depth = run.max_depth;
    Ok(())
}

/// One row per size. Repetitions cycle through all sizes in turn, so a
/// slow stretch on a shared machine does not skew one size against another.
pub fn bench(
    c: &Compiled,
    gen: Generator,
    sizes: &[usize],
    seed: u64,
    reps: usize,
) -> Result<Vec<BenchRow>, BenchError> {
    let inputs = sizes.iter().map(|&n| generate_ids(c, gen, n, seed)).collect::<Result<Vec<_>, _>>()?;
    let mut rows: Vec<BenchRow> = inputs
        .iter()
        .map(|w| BenchRow {
            generator: gen,
            tokens: w.len(),
            parser: Duration::MAX,
            pruner: Duration::MAX,
            extract: Duration::MAX,
            max_depth: 0,
        })
        .collect();
    for _ in 0..reps.max(1) {
        for (w, row) in inputs.iter().zip(&mut rows) {
            time_once(c, w, row)?;
        }
    }
    Ok(rows)
}

pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(BenchRow::CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::grammar::parse_tagged_cfg;
    use crate::translate::{translate, DEFAULT_ITER_CAP};

    fn compiled(src: &str) -> Compiled {
        let t = translate(&parse_tagged_cfg(src).unwrap(), DEFAULT_ITER_CAP).unwrap();
        Compiled::new(t.vpg, t.actions)
    }

    #[test]
    fn generators_are_seeded() {
        assert_eq!(generate(Generator::Json, 500, 7), generate(Generator::Json, 500, 7));
        assert_ne!(generate(Generator::Json, 500, 7), generate(Generator::Json, 500, 8));
    }

    #[test]
    fn generated_streams_are_accepted() {
        let json = compiled(corpus::JSON_TCFG);
        let xml = compiled(corpus::XML_TCFG);
        for seed in 0..5 {
            for (c, gen) in [(&json, Generator::Json), (&xml, Generator::Xml), (&json, Generator::Nested)] {
                let w = generate_ids(c, gen, 300, seed).unwrap();
                assert!(w.len() >= 300 || gen == Generator::Nested);
                assert!(c.recognize(&w).is_ok(), "{gen} seed {seed}");
            }
        }
    }

    #[test]
    fn csv_row_has_every_column() {
        let c = compiled(corpus::JSON_TCFG);
        let rows = bench(&c, Generator::Json, &[1000], 1, 1).unwrap();
        let csv = to_csv(&rows);
        let line = csv.lines().nth(1).unwrap();
        assert_eq!(line.split(',').count(), BenchRow::CSV_HEADER.split(',').count());
        assert!(line.starts_with("json,"));
    }

    #[test]
    fn nested_depth() {
        let c = compiled(corpus::JSON_TCFG);
        let row = bench_one(&c, Generator::Nested, 20_000, 0, 1).unwrap();
        assert_eq!(row.max_depth, 10_000);
    }
}
