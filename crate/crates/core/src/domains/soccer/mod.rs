//! Grid soccer: two learners against fixed-strategy opponents on a 6×5
//! field.
//!
//! Geometry: columns 0..=5 run west to east, rows 0..=4 north to south.
//! Both goals span rows 1..=3, just beyond column 0 (west) and column 5
//! (east). Learners start in columns 3..=5 and attack the west goal; any
//! possessor leaving the field westward through a goal row ends the game
//! with +1, eastward with -1.
//!
//! Each step every player picks an action, then the actions execute one at
//! a time in a uniformly random order. A move into an occupied cell does
//! not happen, and if the mover held the ball it goes to the player in
//! that cell. A Pass registered by the possessor on its turn hands the ball
//! to its teammate once the step ends. After `max_steps` steps the game is
//! a draw.

mod observe;
mod opponent;
mod trace;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{AgentShape, Environment, Transition};
use crate::rng::SimRng;

pub use observe::{
    decode_observation, encode_observation, CellStatus, PossessorClass, SoccerObservation, OBSERVATION_COUNT,
};
pub use opponent::{opponent_action, GOAL_AREA_COLUMNS};
pub use trace::{read_trace, record_episode, render_trace, write_trace, TraceRecord};

pub const COLUMNS: u8 = 6;
pub const ROWS: u8 = 5;
pub const GOAL_ROWS: std::ops::RangeInclusive<u8> = 1..=3;
pub const LEARNERS: usize = 2;
pub const DEFAULT_MAX_STEPS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    North,
    South,
    East,
    West,
    Stay,
    Pass,
}

impl Action {
    pub const ALL: [Action; 6] = [
        Action::North,
        Action::South,
        Action::East,
        Action::West,
        Action::Stay,
        Action::Pass,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Action> {
        Self::ALL.get(i).copied()
    }

    /// Column and row offsets of a move; zero for Stay and Pass.
    pub fn delta(self) -> (i8, i8) {
        match self {
            Action::North => (0, -1),
            Action::South => (0, 1),
            Action::East => (1, 0),
            Action::West => (-1, 0),
            Action::Stay | Action::Pass => (0, 0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OpponentKind {
    Random,
    Greedy,
    Defensive,
}

impl OpponentKind {
    pub const ALL: [OpponentKind; 3] = [OpponentKind::Random, OpponentKind::Greedy, OpponentKind::Defensive];
}

impl std::str::FromStr for OpponentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(OpponentKind::Random),
            "greedy" => Ok(OpponentKind::Greedy),
            "defensive" => Ok(OpponentKind::Defensive),
            other => Err(Error::InvalidConfig(format!("unknown opponent kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    LearnersScore,
    OpponentScores,
    Draw,
}

impl Outcome {
    pub fn reward(self) -> f64 {
        match self {
            Outcome::LearnersScore => 1.0,
            Outcome::OpponentScores => -1.0,
            Outcome::Draw => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub col: u8,
    pub row: u8,
}

impl Cell {
    pub fn new(col: u8, row: u8) -> Self {
        Self { col, row }
    }

    pub fn index(self) -> usize {
        self.row as usize * COLUMNS as usize + self.col as usize
    }

    /// The neighbouring cell in direction `action`, or `None` off the field.
    pub fn offset(self, action: Action) -> Option<Cell> {
        let (dc, dr) = action.delta();
        let col = self.col as i8 + dc;
        let row = self.row as i8 + dr;
        ((0..COLUMNS as i8).contains(&col) && (0..ROWS as i8).contains(&row)).then(|| Cell::new(col as u8, row as u8))
    }

    pub fn manhattan(self, other: Cell) -> u8 {
        self.col.abs_diff(other.col) + self.row.abs_diff(other.row)
    }
}

/// Players 0 and 1 are the learners; opponents follow.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SoccerState {
    pub positions: Vec<Cell>,
    pub possessor: usize,
    pub steps: usize,
    pub outcome: Option<Outcome>,
}

impl SoccerState {
    pub fn occupant(&self, cell: Cell) -> Option<usize> {
        self.positions.iter().position(|&c| c == cell)
    }

    pub fn is_learner(player: usize) -> bool {
        player < LEARNERS
    }

    pub fn teammate(player: usize) -> Option<usize> {
        Self::is_learner(player).then(|| 1 - player)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoccerConfig {
    pub opponents: Vec<OpponentKind>,
    pub pass_enabled: bool,
    pub max_steps: usize,
}

impl Default for SoccerConfig {
    fn default() -> Self {
        Self {
            opponents: vec![OpponentKind::Random],
            pass_enabled: true,
            max_steps: DEFAULT_MAX_STEPS,
        }
    }
}

impl SoccerConfig {
    pub fn against(kind: OpponentKind) -> Self {
        Self {
            opponents: vec![kind],
            ..Self::default()
        }
    }
}

/// Everything that happened during one step, for traces.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDetail {
    pub transition: Transition<SoccerState>,
    /// Actions of every player, learners first.
    pub actions: Vec<Action>,
    /// Players in execution order.
    pub order: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Soccer {
    config: SoccerConfig,
    shapes: Vec<AgentShape>,
}

impl Soccer {
    pub fn new(config: SoccerConfig) -> Result<Self> {
        let players = LEARNERS + config.opponents.len();
        if config.opponents.is_empty() || players > 9 {
            return Err(Error::InvalidConfig("soccer needs between 1 and 7 opponents".into()));
        }
        if config.max_steps == 0 {
            return Err(Error::InvalidConfig("soccer max_steps must be positive".into()));
        }
        let actions = if config.pass_enabled { 6 } else { 5 };
        let shapes = vec![AgentShape::new(actions, OBSERVATION_COUNT); LEARNERS];
        Ok(Self { config, shapes })
    }

    pub fn against(kind: OpponentKind) -> Self {
        Self::new(SoccerConfig::against(kind)).expect("single opponent is valid")
    }

    pub fn config(&self) -> &SoccerConfig {
        &self.config
    }

    pub fn player_count(&self) -> usize {
        LEARNERS + self.config.opponents.len()
    }

    /// Applies the learners' actions (indices into their action set) and
    /// draws opponent actions and the execution order from `rng`.
    pub fn step_detailed(
        &self,
        state: &SoccerState,
        learner_actions: &[usize],
        rng: &mut SimRng,
    ) -> Result<StepDetail> {
        if learner_actions.len() != LEARNERS {
            return Err(Error::Arity {
                what: "soccer learner actions",
                expected: LEARNERS,
                got: learner_actions.len(),
            });
        }
        let limit = self.shapes[0].action_count;
        let mut actions = Vec::with_capacity(self.player_count());
        for &a in learner_actions {
            match Action::from_index(a).filter(|_| a < limit) {
                Some(action) => actions.push(action),
                None => {
                    return Err(Error::IndexOutOfRange {
                        what: "soccer action",
                        index: a,
                        limit,
                    })
                }
            }
        }
        for (k, &kind) in self.config.opponents.iter().enumerate() {
            actions.push(opponent_action(kind, state, LEARNERS + k, rng));
        }
        let mut order: Vec<usize> = (0..self.player_count()).collect();
        order.shuffle(rng);
        let transition = self.execute(state, &actions, &order);
        Ok(StepDetail {
            transition,
            actions,
            order,
        })
    }

    /// Deterministic part of a step: executes `actions` in `order`.
    pub fn execute(&self, state: &SoccerState, actions: &[Action], order: &[usize]) -> Transition<SoccerState> {
        let mut next = state.clone();
        next.steps += 1;
        let mut pass_to = None;
        for &player in order {
            let action = actions[player];
            if action == Action::Pass {
                if next.possessor == player {
                    pass_to = SoccerState::teammate(player);
                }
                continue;
            }
            let here = next.positions[player];
            match here.offset(action) {
                Some(target) => match next.occupant(target) {
                    Some(other) => {
                        if next.possessor == player {
                            next.possessor = other;
                        }
                    }
                    None => next.positions[player] = target,
                },
                None => {
                    if next.possessor == player && GOAL_ROWS.contains(&here.row) {
                        if here.col == 0 && action == Action::West {
                            next.outcome = Some(Outcome::LearnersScore);
                        } else if here.col == COLUMNS - 1 && action == Action::East {
                            next.outcome = Some(Outcome::OpponentScores);
                        }
                    }
                    if next.outcome.is_some() {
                        break;
                    }
                }
            }
        }
        if next.outcome.is_none() {
            if let Some(mate) = pass_to {
                next.possessor = mate;
            }
            if next.steps >= self.config.max_steps {
                next.outcome = Some(Outcome::Draw);
            }
        }
        let reward = next.outcome.map_or(0.0, Outcome::reward);
        Transition {
            done: next.outcome.is_some(),
            state: next,
            reward,
        }
    }
}

fn sample_distinct(cols: std::ops::RangeInclusive<u8>, taken: &mut Vec<Cell>, rng: &mut SimRng) -> Cell {
    loop {
        let cell = Cell::new(rng.gen_range(cols.clone()), rng.gen_range(0..ROWS));
        if !taken.contains(&cell) {
            taken.push(cell);
            return cell;
        }
    }
}

impl Environment for Soccer {
    type State = SoccerState;

    fn agent_shapes(&self) -> &[AgentShape] {
        &self.shapes
    }

    fn reset(&self, rng: &mut SimRng) -> SoccerState {
        let mut positions = Vec::with_capacity(self.player_count());
        for _ in 0..LEARNERS {
            sample_distinct(3..=5, &mut positions, rng);
        }
        for _ in 0..self.config.opponents.len() {
            sample_distinct(0..=2, &mut positions, rng);
        }
        let possessor = rng.gen_range(0..self.player_count());
        SoccerState {
            positions,
            possessor,
            steps: 0,
            outcome: None,
        }
    }

    fn step(&self, state: &SoccerState, joint: &[usize], rng: &mut SimRng) -> Transition<SoccerState> {
        self.step_detailed(state, joint, rng)
            .expect("valid learner actions")
            .transition
    }

    fn observe(&self, state: &SoccerState, agent: usize, _rng: &mut SimRng) -> usize {
        encode_observation(&observe::observation_of(state, agent))
    }

    fn is_terminal(&self, state: &SoccerState) -> bool {
        state.outcome.is_some()
    }

    fn state_key(&self, state: &SoccerState) -> u64 {
        let cells = (COLUMNS * ROWS) as u64;
        let key = state
            .positions
            .iter()
            .rev()
            .fold(0u64, |acc, c| acc * cells + c.index() as u64);
        key * self.player_count() as u64 + state.possessor as u64
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

    fn soccer() -> Soccer {
        Soccer::against(OpponentKind::Random)
    }

    use Action::*;

    #[test]
    fn learner_scores_west() {
        let s = state(&[(0, 2), (4, 4), (3, 0)], 0);
        let t = soccer().execute(&s, &[West, Stay, Stay], &[0, 1, 2]);
        assert!(t.done);
        assert_eq!(t.reward, 1.0);
        assert_eq!(t.state.outcome, Some(Outcome::LearnersScore));
    }

    #[test]
    fn own_goal_and_off_field() {
        let s = state(&[(5, 1), (4, 4), (3, 0)], 0);
        let t = soccer().execute(&s, &[East, Stay, Stay], &[0, 1, 2]);
        assert_eq!(t.reward, -1.0);
        // Not a goal row: the move is cancelled.
        let s = state(&[(0, 0), (4, 4), (3, 0)], 0);
        let t = soccer().execute(&s, &[West, Stay, Stay], &[0, 1, 2]);
        assert!(!t.done);
        assert_eq!(t.state.positions, s.positions);
        // Without the ball nobody scores.
        let s = state(&[(0, 2), (4, 4), (3, 0)], 1);
        let t = soccer().execute(&s, &[West, Stay, Stay], &[0, 1, 2]);
        assert!(!t.done);
    }

    #[test]
    fn collision_hands_over_ball() {
        let s = state(&[(2, 2), (4, 4), (1, 2)], 0);
        let t = soccer().execute(&s, &[West, Stay, Stay], &[0, 1, 2]);
        assert_eq!(t.state.positions, s.positions);
        assert_eq!(t.state.possessor, 2);
        // Ball-less mover: nothing changes hands.
        let t = soccer().execute(&s, &[Stay, Stay, East], &[2, 0, 1]);
        assert_eq!(t.state.positions, s.positions);
        assert_eq!(t.state.possessor, 0);
    }

    #[test]
    fn same_target_first_mover_wins() {
        let s = state(&[(2, 2), (4, 2), (0, 0)], 0);
        let t = soccer().execute(&s, &[East, West, Stay], &[1, 0, 2]);
        assert_eq!(t.state.positions[1], Cell::new(3, 2));
        assert_eq!(t.state.positions[0], Cell::new(2, 2));
        assert_eq!(t.state.possessor, 1, "player 0 ran into player 1 with the ball");
    }

    #[test]
    fn pass_lands_after_the_step() {
        let s = state(&[(5, 0), (3, 4), (0, 0)], 0);
        let t = soccer().execute(&s, &[Pass, Stay, Stay], &[0, 1, 2]);
        assert_eq!(t.state.possessor, 1);
        // Pass without the ball does nothing.
        let t = soccer().execute(&s, &[Stay, Pass, Stay], &[0, 1, 2]);
        assert_eq!(t.state.possessor, 0);
        // The opponent's Pass is a Stay.
        let s = state(&[(5, 0), (3, 4), (0, 0)], 2);
        let t = soccer().execute(&s, &[Stay, Stay, Pass], &[0, 1, 2]);
        assert_eq!(t.state.possessor, 2);
    }

    #[test]
    fn step_cap_is_a_draw() {
        let game = Soccer::new(SoccerConfig {
            max_steps: 1,
            ..SoccerConfig::default()
        })
        .unwrap();
        let s = state(&[(5, 0), (3, 4), (0, 0)], 0);
        let t = game.execute(&s, &[Stay, Stay, Stay], &[0, 1, 2]);
        assert!(t.done);
        assert_eq!(t.reward, 0.0);
        assert_eq!(t.state.outcome, Some(Outcome::Draw));
    }

    #[test]
    fn reset_placement() {
        let game = Soccer::against(OpponentKind::Greedy);
        let mut rng = SeedStreams::new(3).stream(0);
        let mut possessors = [0usize; 3];
        for _ in 0..3000 {
            let s = game.reset(&mut rng);
            assert!(s.positions[..2].iter().all(|c| c.col >= 3));
            assert!(s.positions[2].col <= 2);
            assert_ne!(s.positions[0], s.positions[1]);
            possessors[s.possessor] += 1;
        }
        for n in possessors {
            assert!(
                (n as f64 - 1000.0).abs() < 3.0 * (3000.0f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt() + 1.0,
                "{possessors:?}"
            );
        }
    }

    #[test]
    fn action_space_sizes() {
        assert_eq!(soccer().joint_action_count(), 36);
        let no_pass = Soccer::new(SoccerConfig {
            pass_enabled: false,
            ..SoccerConfig::default()
        })
        .unwrap();
        assert_eq!(no_pass.joint_action_count(), 25);
        let mut rng = SeedStreams::new(0).stream(0);
        let s = no_pass.reset(&mut rng);
        assert!(no_pass.step_detailed(&s, &[5, 0], &mut rng).is_err());
    }

    #[test]
    fn state_keys_distinguish_possessor() {
        let game = soccer();
        let a = state(&[(5, 0), (3, 4), (0, 0)], 0);
        let mut b = a.clone();
        b.possessor = 1;
        assert_ne!(game.state_key(&a), game.state_key(&b));
    }
}
