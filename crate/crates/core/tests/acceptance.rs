//! Runs the twelve acceptance criteria, printing one line per criterion.

use conemetric::verify::{run_criterion, CRITERIA, DEFAULT_SEED};

fn main() {
    let filter: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for id in 1..=CRITERIA {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let r = run_criterion(id, DEFAULT_SEED).expect("criterion ids are in range");
        println!("{r}");
        if !r.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
