use dgd_core::domains::soccer::{
    opponent_action, Action, Cell, OpponentKind, Outcome, Soccer, SoccerConfig, SoccerState, COLUMNS, GOAL_ROWS, ROWS,
};
use dgd_core::game::Environment;
use dgd_core::rng::SeedStreams;
use rand::Rng;

fn check_invariants(game: &Soccer, state: &SoccerState) {
    let players = game.player_count();
    assert_eq!(state.positions.len(), players);
    for (i, a) in state.positions.iter().enumerate() {
        assert!(a.col < COLUMNS && a.row < ROWS);
        for b in &state.positions[i + 1..] {
            assert_ne!(a, b, "two players share a cell: {state:?}");
        }
    }
    assert!(state.possessor < players);
    assert!(state.steps <= game.config().max_steps);
}

#[test]
fn fuzzed_steps_keep_invariants() {
    let mut total = 0;
    let mut seed = 0;
    let mut goals = 0;
    let configs: Vec<SoccerConfig> = OpponentKind::ALL
        .iter()
        .flat_map(|&k| {
            [true, false].map(|pass| SoccerConfig {
                opponents: vec![k],
                pass_enabled: pass,
                ..SoccerConfig::default()
            })
        })
        .chain([SoccerConfig {
            opponents: vec![OpponentKind::Greedy, OpponentKind::Defensive],
            ..SoccerConfig::default()
        }])
        .collect();
    while total < 1_000_000 {
        let config = &configs[seed % configs.len()];
        let game = Soccer::new(config.clone()).unwrap();
        let mut rng = SeedStreams::new(seed as u64).stream(0);
        let actions = game.agent_shapes()[0].action_count;
        let mut state = game.reset(&mut rng);
        check_invariants(&game, &state);
        loop {
            let joint = [rng.gen_range(0..actions), rng.gen_range(0..actions)];
            let t = game.step(&state, &joint, &mut rng);
            total += 1;
            check_invariants(&game, &t.state);
            assert_eq!(t.done, t.state.outcome.is_some());
            match t.state.outcome {
                Some(Outcome::LearnersScore) => assert_eq!(t.reward, 1.0),
                Some(Outcome::OpponentScores) => assert_eq!(t.reward, -1.0),
                Some(Outcome::Draw) => {
                    assert_eq!(t.reward, 0.0);
                    assert_eq!(t.state.steps, config.max_steps);
                }
                None => assert_eq!(t.reward, 0.0),
            }
            if t.reward != 0.0 {
                goals += 1;
                // The scorer left through a goal mouth and still holds the ball.
                let c = t.state.positions[t.state.possessor];
                assert!(GOAL_ROWS.contains(&c.row) && (c.col == 0 || c.col == COLUMNS - 1));
            }
            state = t.state;
            if t.done {
                break;
            }
        }
        seed += 1;
    }
    assert!(goals > 100, "random play should score sometimes: {goals}");
}

#[test]
fn pass_flips_possession_next_step() {
    let game = Soccer::against(OpponentKind::Defensive);
    let mut rng = SeedStreams::new(77).stream(0);
    let mut state = game.reset(&mut rng);
    state.possessor = 0;
    let t = game.step(&state, &[5, 4], &mut rng);
    assert_eq!(t.state.possessor, 1);
}

#[test]
fn seeded_opponents_reproduce() {
    for kind in OpponentKind::ALL {
        let game = Soccer::against(kind);
        let run = |seed| {
            let mut rng = SeedStreams::new(seed).stream(0);
            let mut state = game.reset(&mut rng);
            let mut trail = vec![state.clone()];
            for _ in 0..50 {
                let t = game.step(&state, &[4, 4], &mut rng);
                state = t.state;
                trail.push(state.clone());
                if t.done {
                    break;
                }
            }
            trail
        };
        assert_eq!(run(5), run(5));
    }
}

#[test]
fn greedy_rushes_goal_in_open_field() {
    let mut rng = SeedStreams::new(0).stream(0);
    let mut state = SoccerState {
        positions: vec![Cell::new(0, 0), Cell::new(0, 4), Cell::new(1, 2)],
        possessor: 2,
        steps: 0,
        outcome: None,
    };
    let game = Soccer::against(OpponentKind::Greedy);
    let mut moves = 0;
    while state.outcome.is_none() {
        let a = opponent_action(OpponentKind::Greedy, &state, 2, &mut rng);
        let t = game.execute(&state, &[Action::Stay, Action::Stay, a], &[0, 1, 2]);
        state = t.state;
        moves += 1;
    }
    assert_eq!(state.outcome, Some(Outcome::OpponentScores));
    assert_eq!(moves, 5);
}
