//! Acceptance runner: one PASS/FAIL line per criterion, sub-check details
//! below each line. Exits non-zero when any criterion fails.
//!
//! `cargo test -p wcop --test acceptance -- 1 4` runs a subset.

use wcop::selftest::run_criteria;

fn main() {
    let ids: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let results = run_criteria(if ids.is_empty() { None } else { Some(&ids) });
    let mut failed = 0;
    for r in &results {
        let tag = if r.passed { "PASS" } else { "FAIL" };
        println!("{tag} {:>2} {} ({:.2} s)", r.id, r.name, r.seconds);
        for d in &r.details {
            println!("        {d}");
        }
        failed += usize::from(!r.passed);
    }
    println!("\n{} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
