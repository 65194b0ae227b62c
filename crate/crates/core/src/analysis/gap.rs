//! Distance from a joint distribution over two binary choices to the
//! nearest product distribution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const GRID_STEP: f64 = 1e-3;
const FINAL_STEP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapResult {
    /// Probability that agent 0 picks its first action.
    pub p: f64,
    /// Probability that agent 1 picks its first action.
    pub q: f64,
    /// `product[i][j] = Pr(agent 0 plays i) * Pr(agent 1 plays j)`.
    pub product: [[f64; 2]; 2],
    /// Total-variation distance between the target and `product`.
    pub distance: f64,
}

fn product(p: f64, q: f64) -> [[f64; 2]; 2] {
    let a = [p, 1.0 - p];
    let b = [q, 1.0 - q];
    [[a[0] * b[0], a[0] * b[1]], [a[1] * b[0], a[1] * b[1]]]
}

fn distance(target: &[[f64; 2]; 2], p: f64, q: f64) -> f64 {
    let prod = product(p, q);
    0.5 * (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .map(|(i, j)| (target[i][j] - prod[i][j]).abs())
        .sum::<f64>()
}

/// For fixed `p` the distance is convex piecewise linear in `q`, so the
/// minimum sits at an endpoint or at a point where one cell matches.
fn best_q(target: &[[f64; 2]; 2], p: f64) -> (f64, f64) {
    let a = [p, 1.0 - p];
    let mut candidates = vec![0.0, 1.0];
    for i in 0..2 {
        if a[i] > 0.0 {
            candidates.push(target[i][0] / a[i]);
            candidates.push(1.0 - target[i][1] / a[i]);
        }
    }
    candidates
        .into_iter()
        .map(|q| q.clamp(0.0, 1.0))
        .map(|q| (q, distance(target, p, q)))
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .expect("candidates are never empty")
}

/// Minimizes total variation over `p ⊗ q`: a grid over both coordinates at
/// step 1e-3, then a step-halving search on `p` (with the exact inner
/// minimum over `q`) down to step 1e-6.
pub fn factored_gap(target: &[[f64; 2]; 2]) -> Result<GapResult> {
    let flat = target.iter().flatten();
    if flat.clone().any(|&x| !(0.0..=1.0).contains(&x)) || (flat.sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDistribution {
            context: "factored gap target".into(),
            reason: "cells must be in [0, 1] and sum to 1".into(),
        });
    }

    let steps = (1.0 / GRID_STEP).round() as usize;
    let mut best = (0.0, 0.0, f64::INFINITY);
    for i in 0..=steps {
        let p = i as f64 * GRID_STEP;
        for j in 0..=steps {
            let q = j as f64 * GRID_STEP;
            let d = distance(target, p, q);
            if d < best.2 {
                best = (p, q, d);
            }
        }
    }

    let (mut p, _, _) = best;
    let (mut q, mut d) = best_q(target, p);
    if best.2 < d {
        (q, d) = (best.1, best.2);
    }
    // The product of the target's marginals is exact whenever the target
    // factors, and the grid cannot land on it to better than 1e-3.
    let marginal = target[0][0] + target[0][1];
    let (mq, md) = best_q(target, marginal);
    if md < d {
        (p, q, d) = (marginal, mq, md);
    }
    let mut step = GRID_STEP;
    while step >= FINAL_STEP {
        let mut moved = false;
        for cand in [p - step, p + step] {
            let cand = cand.clamp(0.0, 1.0);
            let (cq, cd) = best_q(target, cand);
            if cd < d {
                (p, q, d) = (cand, cq, cd);
                moved = true;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }

    Ok(GapResult {
        p,
        q,
        product: product(p, q),
        distance: d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_is_a_product() {
        let r = factored_gap(&[[0.25; 2]; 2]).unwrap();
        assert!(r.distance < 1e-12);
    }

    #[test]
    fn fully_correlated_target() {
        // (1/2)(A,A) + (1/2)(B,B): minimum at p = q = 1 - 1/√2, distance √2 - 1.
        let r = factored_gap(&[[0.5, 0.0], [0.0, 0.5]]).unwrap();
        assert!((r.distance - (2f64.sqrt() - 1.0)).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn rejects_bad_target() {
        assert!(factored_gap(&[[0.5, 0.5], [0.5, 0.0]]).is_err());
        assert!(factored_gap(&[[-0.1, 0.6], [0.5, 0.0]]).is_err());
    }
}
