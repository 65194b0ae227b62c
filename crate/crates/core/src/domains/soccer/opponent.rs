use rand::Rng;

use super::{Action, Cell, OpponentKind, SoccerState, COLUMNS, GOAL_ROWS};

/// Columns the defensive opponent never leaves once inside (with the goal
/// rows): the two columns in front of the west goal.
pub const GOAL_AREA_COLUMNS: std::ops::RangeInclusive<u8> = 0..=1;

/// One step toward `target`, closing the column gap first.
fn toward(from: Cell, target: Cell) -> Action {
    if from.col < target.col {
        Action::East
    } else if from.col > target.col {
        Action::West
    } else if from.row < target.row {
        Action::South
    } else if from.row > target.row {
        Action::North
    } else {
        Action::Stay
    }
}

fn in_goal_area(c: Cell) -> bool {
    GOAL_AREA_COLUMNS.contains(&c.col) && GOAL_ROWS.contains(&c.row)
}

/// Action of opponent `player` in `state`. Pass is never produced by the
/// scripted opponents; the random one draws it and it acts as Stay.
pub fn opponent_action(kind: OpponentKind, state: &SoccerState, player: usize, rng: &mut impl Rng) -> Action {
    let here = state.positions[player];
    match kind {
        OpponentKind::Random => Action::ALL[rng.gen_range(0..Action::ALL.len())],
        OpponentKind::Greedy => {
            if state.possessor == player {
                // Run for the east goal: along the row to column 5, into a
                // goal row, then out through the goal.
                if here.col < COLUMNS - 1 {
                    Action::East
                } else if here.row < *GOAL_ROWS.start() {
                    Action::South
                } else if here.row > *GOAL_ROWS.end() {
                    Action::North
                } else {
                    Action::East
                }
            } else {
                let ball = state.positions[state.possessor];
                if here.manhattan(ball) <= 1 {
                    Action::Stay
                } else {
                    toward(here, ball)
                }
            }
        }
        OpponentKind::Defensive => {
            if in_goal_area(here) {
                let options: Vec<Action> = [Action::Stay, Action::North, Action::South]
                    .into_iter()
                    .filter(|&a| here.offset(a).is_some_and(in_goal_area))
                    .collect();
                options[rng.gen_range(0..options.len())]
            } else {
                let front = Cell::new(
                    *GOAL_AREA_COLUMNS.end(),
                    here.row.clamp(*GOAL_ROWS.start(), *GOAL_ROWS.end()),
                );
                toward(here, front)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStreams;

    fn state(positions: &[(u8, u8)], possessor: usize) -> SoccerState {
        SoccerState {
            positions: positions.iter().map(|&(c, r)| Cell::new(c, r)).collect(),
            possessor,
            steps: 0,
            outcome: None,
        }
    }

    fn goal_distance(c: Cell) -> u8 {
        let vertical = if c.row < 1 { 1 - c.row } else { c.row.saturating_sub(3) };
        (COLUMNS - c.col) + vertical
    }

    #[test]
    fn greedy_with_ball_approaches_goal() {
        let mut rng = SeedStreams::new(0).stream(0);
        for col in 0..6 {
            for row in 0..5 {
                let s = state(&[(0, 0), (0, 1), (col, row)], 2);
                let a = opponent_action(OpponentKind::Greedy, &s, 2, &mut rng);
                let here = Cell::new(col, row);
                match here.offset(a) {
                    Some(next) => assert_eq!(goal_distance(next) + 1, goal_distance(here), "{here:?} {a:?}"),
                    None => assert!(col == 5 && GOAL_ROWS.contains(&row) && a == Action::East),
                }
            }
        }
    }

    #[test]
    fn greedy_chases_then_stays() {
        let mut rng = SeedStreams::new(0).stream(0);
        let s = state(&[(4, 3), (5, 0), (1, 1)], 0);
        assert_eq!(opponent_action(OpponentKind::Greedy, &s, 2, &mut rng), Action::East);
        let s = state(&[(1, 3), (5, 0), (1, 1)], 0);
        assert_eq!(opponent_action(OpponentKind::Greedy, &s, 2, &mut rng), Action::South);
        let s = state(&[(2, 1), (5, 0), (1, 1)], 0);
        assert_eq!(opponent_action(OpponentKind::Greedy, &s, 2, &mut rng), Action::Stay);
    }

    #[test]
    fn defensive_reaches_and_keeps_goal_area() {
        let mut rng = SeedStreams::new(1).stream(0);
        let mut s = state(&[(5, 0), (5, 4), (2, 4)], 0);
        for _ in 0..4 {
            let a = opponent_action(OpponentKind::Defensive, &s, 2, &mut rng);
            if let Some(c) = s.positions[2].offset(a) {
                s.positions[2] = c;
            }
        }
        assert!(in_goal_area(s.positions[2]));
        for _ in 0..10_000 {
            let a = opponent_action(OpponentKind::Defensive, &s, 2, &mut rng);
            assert!(matches!(a, Action::Stay | Action::North | Action::South));
            s.positions[2] = s.positions[2].offset(a).unwrap();
            assert!(in_goal_area(s.positions[2]));
        }
    }

    #[test]
    fn random_is_uniform() {
        let mut rng = SeedStreams::new(2).stream(0);
        let s = state(&[(5, 0), (5, 4), (2, 4)], 0);
        let n = 100_000;
        let mut counts = [0usize; 6];
        for _ in 0..n {
            counts[opponent_action(OpponentKind::Random, &s, 2, &mut rng).index()] += 1;
        }
        let p = 1.0 / 6.0;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        for c in counts {
            assert!((c as f64 / n as f64 - p).abs() < 3.0 * se, "{counts:?}");
        }
    }
}
