//! Planner against the greedy baseline on the bundled suite, as a CSV table.
//!
//! Both planners of a case share the seed, and both utility columns sum the
//! same number of rounds.

use stackplan::harness::{bundled_suite, compare_cases, write_comparison_csv, ComparisonRow};

pub fn run() -> stackplan::Result<Vec<ComparisonRow>> {
    let outcomes = compare_cases(&bundled_suite());
    let rows: Vec<ComparisonRow> = outcomes.into_iter().map(|o| o.row).collect();
    write_comparison_csv(&rows, std::io::stdout())?;
    Ok(rows)
}

fn main() -> stackplan::Result<()> {
    run().map(|_| ())
}
