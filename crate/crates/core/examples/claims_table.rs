//! Runs the claim registry, optionally filtered: `cargo run --example claims_table -- hahn`.

use ceslab::claims::{run_claims, Status};

fn main() {
    let filter = std::env::args().nth(1);
    let rows = run_claims(filter.as_deref());
    for r in &rows {
        println!("{:<4} {:<28} {}", r.status.to_string(), r.claim_id, r.computed);
    }
    let fails = rows.iter().filter(|r| r.status == Status::Fail).count();
    println!("{} rows, {} failing", rows.len(), fails);
}
