//! Plan a two-stage game given by explicit tables.
//!
//! State 0 is a junction, state 1 a good room and state 2 a bad room. The
//! leader picks a door, the follower decides whether to push; the door sticks
//! with probability 0.2. Utilities differ between the players, so the
//! leader's commitment matters at the junction.

use stackplan::game::{PlayerValues, TabularGame};
use stackplan::planner::{plan, PlannerConfig, PolicyPlan};

fn pv(a: f64, b: f64) -> PlayerValues {
    PlayerValues::new(a, b)
}

pub fn build() -> TabularGame {
    let stay = |s: usize| vec![(s, 1.0)];
    TabularGame {
        horizon: 2,
        discount: 0.95,
        leader_counts: vec![2, 1, 1],
        follower_counts: vec![2, 1, 1],
        transitions: vec![
            vec![
                // door to the good room; pushing makes it open for sure
                vec![vec![(1, 0.8), (0, 0.2)], vec![(1, 1.0)]],
                // door to the bad room
                vec![vec![(2, 0.8), (0, 0.2)], vec![(2, 1.0)]],
            ],
            vec![vec![stay(1)]],
            vec![vec![stay(2)]],
        ],
        utilities: vec![
            vec![vec![pv(0.0, 1.0), pv(-0.5, 0.0)], vec![pv(1.0, 2.0), pv(0.5, 0.0)]],
            vec![vec![pv(2.0, 1.0)]],
            vec![vec![pv(-1.0, 1.5)]],
        ],
        terminal: vec![pv(0.0, 0.0), pv(3.0, 1.0), pv(-2.0, 2.0)],
    }
}

pub fn run() -> stackplan::Result<PolicyPlan<usize>> {
    let game = build();
    game.validate()?;
    let p = plan(&0, &game, &PlannerConfig::default())?;
    for t in 0..p.horizon() {
        for (s, entry) in p.stage(t) {
            let v = p.value(t, s).expect("planned state has a value");
            println!(
                "t={t} s={s}: leader policy {:?}, follower action {}, values ({:.4}, {:.4}){}",
                entry.solution.leader_policy.probs(),
                entry.solution.follower_action.index(),
                v.leader,
                v.follower,
                if entry.follower_tie { " [follower tie]" } else { "" }
            );
        }
    }
    Ok(p)
}

fn main() -> stackplan::Result<()> {
    run().map(|_| ())
}
