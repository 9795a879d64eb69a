//! Oracles shared by the integration tests. None of them call the solvers
//! under test: vertex enumeration, team value iteration and direct Bellman
//! recomputation from the game definition.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stackplan::game::{PlayerValues, StochasticGame, TabularGame};
use stackplan::planner::PolicyPlan;
use stackplan::stage::StageMatrices;

pub const VERTEX_TOL: f64 = 1e-9;

/// Gaussian elimination with partial pivoting; `None` if singular.
pub fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-10 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                if f != 0.0 {
                    for k in c..n {
                        a[r][k] -= f * a[c][k];
                    }
                    b[r] -= f * b[c];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn combinations(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::with_capacity(k), f);
}

/// Max of `c.x` over `{x : G x <= h, E x = e}` by enumerating vertices.
/// The feasible set must be bounded. `None` if it is empty.
pub fn vertex_max(c: &[f64], le: &[(Vec<f64>, f64)], eq: &[(Vec<f64>, f64)]) -> Option<f64> {
    vertex_argmax(c, le, eq).map(|(v, _)| v)
}

/// As [`vertex_max`], also returning a maximising vertex.
pub fn vertex_argmax(c: &[f64], le: &[(Vec<f64>, f64)], eq: &[(Vec<f64>, f64)]) -> Option<(f64, Vec<f64>)> {
    // all-zero equality rows are either vacuous or infeasible
    if eq.iter().any(|(g, h)| g.iter().all(|&v| v == 0.0) && *h != 0.0) {
        return None;
    }
    let eq: Vec<&(Vec<f64>, f64)> = eq.iter().filter(|(g, _)| g.iter().any(|&v| v != 0.0)).collect();
    let n = c.len();
    let need = n.checked_sub(eq.len())?;
    let mut best: Option<(f64, Vec<f64>)> = None;
    combinations(le.len(), need, &mut |pick| {
        let rows: Vec<&(Vec<f64>, f64)> = eq.iter().copied().chain(pick.iter().map(|&i| &le[i])).collect();
        let a = rows.iter().map(|r| r.0.clone()).collect();
        let b = rows.iter().map(|r| r.1).collect();
        if let Some(x) = solve_square(a, b) {
            let dot = |v: &[f64]| v.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>();
            let ok = le.iter().all(|(g, h)| dot(g) <= h + VERTEX_TOL * (1.0 + h.abs()))
                && eq.iter().all(|(g, h)| (dot(g) - h).abs() <= VERTEX_TOL * (1.0 + h.abs()));
            if ok {
                let v = dot(c);
                if best.as_ref().is_none_or(|(b, _)| v > *b) {
                    best = Some((v, x));
                }
            }
        }
    });
    best
}

/// Optimistic strong Stackelberg leader value by vertex enumeration, one
/// polytope per follower column.
pub fn stackelberg_value_oracle(m: &StageMatrices) -> f64 {
    stackelberg_oracle(m).0
}

/// Leader and follower values of the oracle's optimal commitment.
pub fn stackelberg_oracle(m: &StageMatrices) -> (f64, f64) {
    let (rows, cols) = (m.leader_actions(), m.follower_actions());
    let (ua, ub) = (m.leader(), m.follower());
    let mut best = (f64::NEG_INFINITY, f64::NAN);
    for j in 0..cols {
        let mut le: Vec<(Vec<f64>, f64)> = (0..rows)
            .map(|i| {
                let mut g = vec![0.0; rows];
                g[i] = -1.0;
                (g, 0.0)
            })
            .collect();
        for k in (0..cols).filter(|&k| k != j) {
            le.push(((0..rows).map(|i| ub.get(i, k) - ub.get(i, j)).collect(), 0.0));
        }
        let eq = vec![(vec![1.0; rows], 1.0)];
        let c: Vec<f64> = (0..rows).map(|i| ua.get(i, j)).collect();
        if let Some((v, x)) = vertex_argmax(&c, &le, &eq) {
            if v > best.0 {
                best = (v, (0..rows).map(|i| x[i] * ub.get(i, j)).sum());
            }
        }
    }
    best
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    (0..rows).map(|_| (0..cols).map(|_| rng.gen_range(lo..=hi)).collect()).collect()
}

pub fn random_stage_game(rng: &mut impl Rng, max_dim: usize) -> StageMatrices {
    let (r, c) = (rng.gen_range(1..=max_dim), rng.gen_range(1..=max_dim));
    StageMatrices::from_rows(random_matrix(rng, r, c, -10.0, 10.0), random_matrix(rng, r, c, -10.0, 10.0)).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random tabular game. Successors of each joint action are 1..=3 distinct
/// states with random weights. With `aligned` both players get the same utilities.
pub fn random_tabular_game(
    rng: &mut impl Rng,
    states: usize,
    horizon: usize,
    max_actions: usize,
    discount: f64,
    aligned: bool,
) -> TabularGame {
    let leader_counts: Vec<usize> = (0..states).map(|_| rng.gen_range(1..=max_actions)).collect();
    let follower_counts: Vec<usize> = (0..states).map(|_| rng.gen_range(1..=max_actions)).collect();
    let value = |rng: &mut dyn rand::RngCore| {
        let a = rng.gen_range(-10.0..=10.0);
        let b = if aligned { a } else { rng.gen_range(-10.0..=10.0) };
        PlayerValues::new(a, b)
    };
    let mut transitions = Vec::new();
    let mut utilities = Vec::new();
    for s in 0..states {
        let mut ts = Vec::new();
        let mut us = Vec::new();
        for _ in 0..leader_counts[s] {
            let mut ta = Vec::new();
            let mut ua = Vec::new();
            for _ in 0..follower_counts[s] {
                let k = rng.gen_range(1..=3.min(states));
                let mut succ: Vec<usize> = Vec::new();
                while succ.len() < k {
                    let t = rng.gen_range(0..states);
                    if !succ.contains(&t) {
                        succ.push(t);
                    }
                }
                let w: Vec<f64> = succ.iter().map(|_| rng.gen_range(0.1..1.0)).collect();
                let total: f64 = w.iter().sum();
                ta.push(succ.into_iter().zip(w.into_iter().map(|x| x / total)).collect());
                ua.push(value(rng));
            }
            ts.push(ta);
            us.push(ua);
        }
        transitions.push(ts);
        utilities.push(us);
    }
    let terminal = (0..states).map(|_| value(rng)).collect();
    TabularGame { horizon, discount, leader_counts, follower_counts, transitions, utilities, terminal }
}

/// Team-optimal leader value at `s0`: value iteration over joint actions.
pub fn team_value(game: &TabularGame, s0: usize) -> f64 {
    let n = game.num_states();
    let mut v: Vec<f64> = game.terminal.iter().map(|p| p.leader).collect();
    for _ in 0..game.horizon {
        v = (0..n)
            .map(|s| {
                let mut best = f64::NEG_INFINITY;
                for a in 0..game.leader_counts[s] {
                    for b in 0..game.follower_counts[s] {
                        let cont: f64 = game.transitions[s][a][b].iter().map(|&(t, p)| p * v[t]).sum();
                        best = best.max(game.utilities[s][a][b].leader + game.discount * cont);
                    }
                }
                best
            })
            .collect();
    }
    v[s0]
}

/// Largest gap between a stored value and its recomputation from the stored
/// policies, the game definition and the next-stage values.
pub fn bellman_residual<G: StochasticGame>(game: &G, plan: &PolicyPlan<G::State>) -> f64 {
    let gamma = game.discount();
    let mut worst = 0.0f64;
    for t in 0..plan.horizon() {
        for (s, entry) in plan.stage(t) {
            let la = game.leader_actions(s);
            let fa = game.follower_actions(s);
            let b = &fa[entry.solution.follower_action.index()];
            let (mut va, mut vb) = (0.0, 0.0);
            for (a, &pa) in la.iter().zip(entry.solution.leader_policy.probs()) {
                if pa == 0.0 {
                    continue;
                }
                let u = game.stage_utility(s, a, b);
                let (mut ca, mut cb) = (0.0, 0.0);
                for (s2, p) in game.transition(s, a, b).iter() {
                    let next = plan.value(t + 1, s2).expect("successor is planned");
                    ca += p * next.leader;
                    cb += p * next.follower;
                }
                va += pa * (u.leader + gamma * ca);
                vb += pa * (u.follower + gamma * cb);
            }
            let stored = plan.value(t, s).unwrap();
            worst = worst.max((stored.leader - va).abs()).max((stored.follower - vb).abs());
        }
    }
    worst
}
