//! Coarse path scores and the central/marginal/combined result scores.
//!
//! Smaller scores mean closer connections. Results are ordered by primary
//! score, then by the sum of fine weights over their edges, then by central
//! node id.

use std::cmp::Ordering;

use crate::error::{RaksError, Result};
use crate::graph::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct PathScore(pub u32);

/// Score of a path given the activation levels of its edges in order:
/// `s <- max(s, a) + 1` per edge, starting from 0.
pub fn path_score(activations: &[u32]) -> PathScore {
    PathScore(activations.iter().fold(0, |s, &a| s.max(a) + 1))
}

/// Score of a central graph: the largest keyword distance at its central node.
pub fn cg_score(keyword_distances: &[u32]) -> u32 {
    keyword_distances.iter().copied().max().unwrap_or(0)
}

/// Marginal part score: the largest distance from a marginal keyword to the
/// central keyword nodes.
pub fn marginal_score(per_marginal: &[u32]) -> u32 {
    per_marginal.iter().copied().max().unwrap_or(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Combination {
    /// `gamma * sc + (1 - gamma) * sm`
    #[default]
    Additive,
    /// `sc^gamma * sm^(1 - gamma)`, zero components taken as 1.
    Multiplicative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreParams {
    gamma: f64,
    pub combination: Combination,
}

impl Default for ScoreParams {
    fn default() -> Self {
        Self { gamma: 0.5, combination: Combination::Additive }
    }
}

impl ScoreParams {
    pub fn new(gamma: f64, combination: Combination) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(RaksError::InvalidParams(format!("gamma must lie in [0,1], got {gamma}")));
        }
        Ok(Self { gamma, combination })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// Combined score of a radial pattern graph. Accepts real-valued components
/// so callers can evaluate lower bounds with the same formula.
pub fn rpg_score(sc: f64, sm: f64, params: &ScoreParams) -> f64 {
    let g = params.gamma;
    match params.combination {
        Combination::Additive => g * sc + (1.0 - g) * sm,
        Combination::Multiplicative => {
            let sc = if sc == 0.0 { 1.0 } else { sc };
            let sm = if sm == 0.0 { 1.0 } else { sm };
            sc.powf(g) * sm.powf(1.0 - g)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankKey {
    pub primary: f64,
    pub tie_break: f64,
    pub central: NodeId,
}

impl RankKey {
    pub fn compare(&self, other: &Self) -> Ordering {
        self.primary
            .total_cmp(&other.primary)
            .then(self.tie_break.total_cmp(&other.tie_break))
            .then(self.central.cmp(&other.central))
    }
}

pub trait Ranked {
    fn rank_key(&self) -> RankKey;
}

/// Sorts into rank order. Truncation is left to the caller.
pub fn rank_results<T: Ranked>(mut results: Vec<T>) -> Vec<T> {
    results.sort_by(|a, b| a.rank_key().compare(&b.rank_key()));
    results
}

/// Sum used to break primary-score ties. Summed in the given order, which
/// callers keep sorted by edge id so the value is reproducible.
pub fn tie_break_sum(weights: impl IntoIterator<Item = f64>) -> f64 {
    weights.into_iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_score_examples() {
        assert_eq!(path_score(&[]), PathScore(0));
        assert_eq!(path_score(&[2, 1]), PathScore(4));
        assert_eq!(path_score(&[1, 5]), PathScore(6));
    }

    #[test]
    fn graph_scores() {
        assert_eq!(cg_score(&[2, 2]), 2);
        assert_eq!(cg_score(&[0]), 0);
        assert_eq!(cg_score(&[3, 1, 2]), 3);
        assert_eq!(marginal_score(&[2, 2]), 2);
        assert_eq!(marginal_score(&[4]), 4);
        assert_eq!(marginal_score(&[1, 3, 2]), 3);
    }

    #[test]
    fn combined_score() {
        let add = |g| ScoreParams::new(g, Combination::Additive).unwrap();
        assert_eq!(rpg_score(2.0, 4.0, &add(1.0)), 2.0);
        assert_eq!(rpg_score(2.0, 4.0, &add(0.0)), 4.0);
        assert_eq!(rpg_score(2.0, 4.0, &add(0.5)), 3.0);
        for g in [0.0, 0.3, 0.5, 1.0] {
            assert_eq!(rpg_score(2.0, 2.0, &add(g)), 2.0);
        }
        let mul = ScoreParams::new(0.5, Combination::Multiplicative).unwrap();
        assert!((rpg_score(4.0, 9.0, &mul) - 6.0).abs() < 1e-12);
        assert_eq!(rpg_score(0.0, 0.0, &mul), 1.0);
        assert!(ScoreParams::new(1.5, Combination::Additive).is_err());
    }

    #[derive(Debug, Clone, PartialEq)]
    struct R(f64, f64, NodeId);
    impl Ranked for R {
        fn rank_key(&self) -> RankKey {
            RankKey { primary: self.0, tie_break: self.1, central: self.2 }
        }
    }

    #[test]
    fn ranking_rules() {
        assert_eq!(rank_results(vec![R(3.0, 0.0, 0), R(2.0, 0.0, 1)]), vec![R(2.0, 0.0, 1), R(3.0, 0.0, 0)]);
        assert_eq!(rank_results(vec![R(2.0, 1.2, 0), R(2.0, 0.7, 1)]), vec![R(2.0, 0.7, 1), R(2.0, 1.2, 0)]);
        assert_eq!(rank_results(vec![R(2.0, 0.5, 9), R(2.0, 0.5, 4)]), vec![R(2.0, 0.5, 4), R(2.0, 0.5, 9)]);
    }
}
