use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::sim::Score;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewardScheme {
    Optimistic,
    Penalty,
}

impl RewardScheme {
    pub const ALL: [RewardScheme; 2] = [RewardScheme::Optimistic, RewardScheme::Penalty];

    pub fn as_str(&self) -> &'static str {
        match self {
            RewardScheme::Optimistic => "optimistic",
            RewardScheme::Penalty => "penalty",
        }
    }
}

impl fmt::Display for RewardScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RewardScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "optimistic" => Ok(RewardScheme::Optimistic),
            "penalty" => Ok(RewardScheme::Penalty),
            other => Err(format!("unknown reward scheme `{other}`")),
        }
    }
}

/// +1 when coverage strictly increased; otherwise -1 under the penalty
/// scheme and 0 under the optimistic one.
pub fn compute_reward(prev: Score, curr: Score, scheme: RewardScheme) -> i32 {
    if curr > prev {
        1
    } else if scheme == RewardScheme::Penalty {
        -1
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truth_table() {
        let half = Score::new(50, 100);
        let more = Score::from_percent_str("52.5").unwrap();
        assert_eq!(compute_reward(half, more, RewardScheme::Penalty), 1);
        assert_eq!(compute_reward(half, half, RewardScheme::Penalty), -1);
        assert_eq!(compute_reward(half, half, RewardScheme::Optimistic), 0);
        assert_eq!(compute_reward(more, half, RewardScheme::Optimistic), 0);
        assert_eq!(compute_reward(more, half, RewardScheme::Penalty), -1);
        assert_eq!(compute_reward(half, more, RewardScheme::Optimistic), 1);
    }

    #[test]
    fn equal_fractions_in_different_terms_are_not_an_increase() {
        assert_eq!(compute_reward(Score::new(1, 2), Score::new(8, 16), RewardScheme::Penalty), -1);
    }
}
