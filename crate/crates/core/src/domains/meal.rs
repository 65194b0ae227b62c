/// Items in the two-agent meal: agent 0 picks a drink, agent 1 a food.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MealItem {
    Vodka,
    Milk,
    Pickles,
    Cereal,
}

/// Joint distribution `target[drink][food]` with drinks (vodka, milk) and
/// foods (pickles, cereal): vodka with pickles 10% of the time, milk with
/// cereal otherwise.
pub fn meal_target_distribution() -> [[f64; 2]; 2] {
    [[0.1, 0.0], [0.0, 0.9]]
}
