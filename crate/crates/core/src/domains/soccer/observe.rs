use super::{Action, SoccerState};

/// 3 possessor classes × 3^4 neighbour statuses.
pub const OBSERVATION_COUNT: usize = 243;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PossessorClass {
    Me,
    Teammate,
    Opponent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellStatus {
    Open,
    OutOfField,
    Occupied,
}

/// What a learner sees: who holds the ball and its N, S, E, W neighbours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SoccerObservation {
    pub possessor: PossessorClass,
    pub neighbours: [CellStatus; 4],
}

const CLASSES: [PossessorClass; 3] = [PossessorClass::Me, PossessorClass::Teammate, PossessorClass::Opponent];
const STATUSES: [CellStatus; 3] = [CellStatus::Open, CellStatus::OutOfField, CellStatus::Occupied];
const DIRECTIONS: [Action; 4] = [Action::North, Action::South, Action::East, Action::West];

pub(super) fn observation_of(state: &SoccerState, learner: usize) -> SoccerObservation {
    let possessor = if state.possessor == learner {
        PossessorClass::Me
    } else if SoccerState::is_learner(state.possessor) {
        PossessorClass::Teammate
    } else {
        PossessorClass::Opponent
    };
    let here = state.positions[learner];
    let neighbours = DIRECTIONS.map(|d| match here.offset(d) {
        None => CellStatus::OutOfField,
        Some(c) if state.occupant(c).is_some() => CellStatus::Occupied,
        Some(_) => CellStatus::Open,
    });
    SoccerObservation { possessor, neighbours }
}

/// Mixed radix: possessor class least significant, then N, S, E, W.
pub fn encode_observation(obs: &SoccerObservation) -> usize {
    let class = CLASSES.iter().position(|&c| c == obs.possessor).expect("listed");
    obs.neighbours.iter().rev().fold(0, |acc, s| {
        acc * 3 + STATUSES.iter().position(|x| x == s).expect("listed")
    }) * 3
        + class
}

pub fn decode_observation(index: usize) -> Option<SoccerObservation> {
    if index >= OBSERVATION_COUNT {
        return None;
    }
    let possessor = CLASSES[index % 3];
    let mut rest = index / 3;
    let neighbours = [0; 4].map(|_| {
        let s = STATUSES[rest % 3];
        rest /= 3;
        s
    });
    Some(SoccerObservation { possessor, neighbours })
}

#[cfg(test)]
mod tests {
    use super::super::Cell;
    use super::*;

    #[test]
    fn encoding_is_bijective() {
        let mut seen = vec![false; OBSERVATION_COUNT];
        for i in 0..OBSERVATION_COUNT {
            let obs = decode_observation(i).unwrap();
            let j = encode_observation(&obs);
            assert_eq!(i, j);
            assert!(!seen[j]);
            seen[j] = true;
        }
        assert!(decode_observation(OBSERVATION_COUNT).is_none());
    }

    #[test]
    fn corner_sees_two_walls() {
        let state = SoccerState {
            positions: vec![Cell::new(5, 0), Cell::new(4, 0), Cell::new(0, 4)],
            possessor: 2,
            steps: 0,
            outcome: None,
        };
        let obs = observation_of(&state, 0);
        assert_eq!(obs.possessor, PossessorClass::Opponent);
        assert_eq!(
            obs.neighbours,
            [
                CellStatus::OutOfField,
                CellStatus::Open,
                CellStatus::OutOfField,
                CellStatus::Occupied
            ]
        );
        assert_eq!(observation_of(&state, 1).possessor, PossessorClass::Opponent);
    }
}
