//! Bundled experiment recipes.

use crate::config::ExperimentConfig;

pub const RECIPES: &[(&str, &str)] = &[
    ("coordination", include_str!("../recipes/coordination.json")),
    ("soccer-defensive", include_str!("../recipes/soccer-defensive.json")),
    (
        "soccer-defensive-nopass",
        include_str!("../recipes/soccer-defensive-nopass.json"),
    ),
    ("soccer-greedy", include_str!("../recipes/soccer-greedy.json")),
    ("soccer-greedy-fsc", include_str!("../recipes/soccer-greedy-fsc.json")),
    (
        "soccer-greedy-nopass",
        include_str!("../recipes/soccer-greedy-nopass.json"),
    ),
    ("soccer-mixed-fsc", include_str!("../recipes/soccer-mixed-fsc.json")),
    (
        "soccer-mixed-qlearn-partial",
        include_str!("../recipes/soccer-mixed-qlearn-partial.json"),
    ),
    ("soccer-random", include_str!("../recipes/soccer-random.json")),
    (
        "soccer-random-nopass",
        include_str!("../recipes/soccer-random-nopass.json"),
    ),
    (
        "soccer-random-qlearn",
        include_str!("../recipes/soccer-random-qlearn.json"),
    ),
    (
        "soccer-random-qlearn-partial",
        include_str!("../recipes/soccer-random-qlearn-partial.json"),
    ),
];

pub fn recipe_names() -> impl Iterator<Item = &'static str> {
    RECIPES.iter().map(|(n, _)| *n)
}

pub fn recipe(name: &str) -> Option<ExperimentConfig> {
    RECIPES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| ExperimentConfig::from_json(text).expect("bundled recipes are valid"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_recipes_parse_and_match_their_names() {
        for name in recipe_names() {
            assert_eq!(recipe(name).unwrap().name, name);
        }
    }

    #[test]
    fn published_constants() {
        let c = recipe("coordination").unwrap();
        assert_eq!((c.learning_rate, c.discount, c.runs), (0.003, 0.99, 10));
        let s = recipe("soccer-greedy").unwrap();
        assert_eq!((s.learning_rate, s.discount), (0.05, 0.999));
        let q = recipe("soccer-random-qlearn").unwrap();
        assert_eq!((q.learning_rate, q.epsilon), (0.1, 0.4));
    }
}
