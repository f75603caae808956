//! Parser, pruner and extraction throughput on generated JSON token streams.
//!
//! ```bash
//! cargo run --release --example bench_json                 # 1e5, 2e5, 4e5 tokens
//! cargo run --release --example bench_json -- 50000 100000
//! ```

use vpg::bench::{bench, to_csv, Generator};
use vpg::corpus;
use vpg::grammar::parse_tagged_cfg;
use vpg::translate::{translate, DEFAULT_ITER_CAP};
use vpg::Compiled;

fn main() {
    let mut sizes: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    if sizes.is_empty() {
        sizes = vec![100_000, 200_000, 400_000];
    }
    let t = translate(&parse_tagged_cfg(corpus::JSON_TCFG).unwrap(), DEFAULT_ITER_CAP).unwrap();
    let c = Compiled::new(t.vpg, t.actions);
    println!(
        "JSON VPG: {} rules; parser PDA {} states; pruner PDA {} states\n",
        c.vpg.rules().len(),
        c.parser.states().len(),
        c.pruner.states().len()
    );
    let rows = bench(&c, Generator::Json, &sizes, 1, 3).unwrap();
    print!("{}", to_csv(&rows));
    for w in rows.windows(2) {
        let r = w[1].parse_and_prune().as_secs_f64() / w[0].parse_and_prune().as_secs_f64();
        println!("{} -> {} tokens: parser+pruner x{r:.2}", w[0].tokens, w[1].tokens);
    }
    let nested = bench(&c, Generator::Nested, &[20_000], 1, 1).unwrap();
    println!("nested input of {} tokens: stack depth {}", nested[0].tokens, nested[0].max_depth);
}
