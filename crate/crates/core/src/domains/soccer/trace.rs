use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{Cell, Outcome, Soccer, SoccerState, COLUMNS, GOAL_ROWS, LEARNERS, ROWS};
use crate::error::{Error, Result};
use crate::game::Environment;
use crate::policy::AgentPolicy;
use crate::rng::EpisodeRng;

/// One JSON line of a soccer trace. Record 0 is the kickoff position with
/// no actions; record `t` describes the state after step `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: usize,
    pub positions: Vec<[u8; 2]>,
    pub possessor: usize,
    pub actions: Vec<String>,
    pub order: Vec<usize>,
    pub reward: f64,
    pub done: Option<Outcome>,
}

impl TraceRecord {
    fn new(state: &SoccerState, actions: Vec<String>, order: Vec<usize>, reward: f64) -> Self {
        Self {
            step: state.steps,
            positions: state.positions.iter().map(|c| [c.col, c.row]).collect(),
            possessor: state.possessor,
            actions,
            order,
            reward,
            done: state.outcome,
        }
    }
}

/// Plays one game with reactive or FSC learners and records every step.
pub fn record_episode(game: &Soccer, policies: &[AgentPolicy], rng: &mut EpisodeRng) -> Result<Vec<TraceRecord>> {
    if policies.len() != LEARNERS {
        return Err(Error::Arity {
            what: "soccer policies",
            expected: LEARNERS,
            got: policies.len(),
        });
    }
    let mut state = game.reset(&mut rng.env);
    let mut internal: Vec<usize> = policies.iter().map(|p| p.initial_internal()).collect();
    let mut records = vec![TraceRecord::new(&state, Vec::new(), Vec::new(), 0.0)];
    while state.outcome.is_none() {
        let mut chosen = Vec::with_capacity(LEARNERS);
        for (i, policy) in policies.iter().enumerate() {
            let obs = game.observe(&state, i, &mut rng.env);
            let (a, n) = policy.act(obs, internal[i], &mut rng.agents[i]);
            internal[i] = n;
            chosen.push(a);
        }
        let detail = game.step_detailed(&state, &chosen, &mut rng.env)?;
        let names = detail.actions.iter().map(|a| format!("{a:?}")).collect();
        state = detail.transition.state;
        records.push(TraceRecord::new(&state, names, detail.order, detail.transition.reward));
    }
    Ok(records)
}

pub fn write_trace(records: &[TraceRecord], mut out: impl Write) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_trace(input: impl BufRead) -> Result<Vec<TraceRecord>> {
    let mut records = Vec::new();
    for line in input.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            records.push(serde_json::from_str(&line)?);
        }
    }
    Ok(records)
}

/// ASCII rendering: learners `1`, `2`, opponents `a`, `b`, ...; the
/// possessor is marked with `*`. Goal mouths are `|`.
pub fn render_trace(records: &[TraceRecord]) -> String {
    let mut out = String::from("soccer replay: learners attack the west goal\n");
    for r in records {
        let _ = writeln!(
            out,
            "step {} reward {} actions [{}]",
            r.step,
            r.reward,
            r.actions.join(" ")
        );
        for row in 0..ROWS {
            let side = if GOAL_ROWS.contains(&row) { '|' } else { ' ' };
            out.push(side);
            for col in 0..COLUMNS {
                let cell = Cell::new(col, row);
                let who = r.positions.iter().position(|p| *p == [cell.col, cell.row]);
                let glyph = match who {
                    None => ".".to_string(),
                    Some(p) => {
                        let base = if p < LEARNERS {
                            char::from(b'1' + p as u8)
                        } else {
                            char::from(b'a' + (p - LEARNERS) as u8)
                        };
                        if p == r.possessor {
                            format!("{base}*")
                        } else {
                            base.to_string()
                        }
                    }
                };
                let _ = write!(out, "{glyph:<3}");
            }
            out.push(side);
            out.push('\n');
        }
        if let Some(outcome) = r.done {
            let _ = writeln!(out, "outcome: {outcome:?} (reward {})", outcome.reward());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::OpponentKind;
    use super::*;
    use crate::policy::BoltzmannPolicy;
    use crate::rng::SeedStreams;

    #[test]
    fn trace_round_trip_and_final_reward() {
        let game = Soccer::against(OpponentKind::Greedy);
        let mut init = SeedStreams::new(4).stream(2);
        let policies: Vec<AgentPolicy> = (0..2)
            .map(|_| BoltzmannPolicy::random(243, 6, 1.0, 1.0, &mut init).into())
            .collect();
        let mut rng = EpisodeRng::new(4, 2);
        let records = record_episode(&game, &policies, &mut rng).unwrap();
        let mut buf = Vec::new();
        write_trace(&records, &mut buf).unwrap();
        let back = read_trace(&buf[..]).unwrap();
        assert_eq!(back, records);
        let last = records.last().unwrap();
        assert_eq!(last.reward, last.done.unwrap().reward());
        let text = render_trace(&back);
        assert!(text.ends_with(&format!("outcome: {:?} (reward {})\n", last.done.unwrap(), last.reward)));
    }

    #[test]
    fn empty_trace_renders_header() {
        assert_eq!(render_trace(&[]).lines().count(), 1);
    }
}
