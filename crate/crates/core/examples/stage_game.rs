//! Solve a single leader-follower matrix game three ways.
//!
//! The follower prefers to match the leader's row, so a pure commitment to
//! either row yields 2 or 3. Mixing evenly keeps the follower indifferent,
//! the optimistic tie goes to column 1, and the leader earns 3.5.

use stackplan::stage::{
    follower_best_response_set, format_stage_game, StageMatrices, StageSolution, StageSolverKind,
};

pub fn run() -> stackplan::Result<Vec<StageSolution>> {
    let m = StageMatrices::from_rows(vec![vec![2.0, 4.0], vec![1.0, 3.0]], vec![vec![1.0, 0.0], vec![0.0, 1.0]])?;
    print!("{}", format_stage_game(&m));
    let mut out = Vec::new();
    for kind in [StageSolverKind::Milp, StageSolverKind::MilpBranchAndBound, StageSolverKind::MultiLp] {
        let sol = kind.solve(&m)?;
        let br = follower_best_response_set(m.follower(), &sol.leader_policy)?;
        println!(
            "{kind:?}: policy {:?}, follower column {}, leader {:.4}, follower {:.4}, best responses {br:?}",
            sol.leader_policy.probs(),
            sol.follower_action.index(),
            sol.leader_value,
            sol.follower_value,
        );
        out.push(sol);
    }
    Ok(out)
}

fn main() -> stackplan::Result<()> {
    run().map(|_| ())
}
