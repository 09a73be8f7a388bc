//! Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero when
//! any criterion fails.

use necklace_verify::{run_all, ALL, DEFAULT_SEED};

fn main() {
    println!("running {} acceptance criteria (seed {DEFAULT_SEED})", ALL.len());
    let outcomes = run_all(&ALL, DEFAULT_SEED, |o| {
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {verdict} [{}] {} ({:.2} s)", o.id, o.name, o.detail, o.seconds);
    });
    let failed: Vec<String> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id.to_string()).collect();
    println!();
    if failed.is_empty() {
        println!("acceptance result: ok. {} passed; 0 failed", outcomes.len());
    } else {
        println!(
            "acceptance result: FAILED. {} passed; {} failed (criteria {})",
            outcomes.len() - failed.len(),
            failed.len(),
            failed.join(", ")
        );
        std::process::exit(1);
    }
}
