use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossingDirection {
    Rising,
    Falling,
    Any,
}

/// Earliest time where the piecewise-linear interpolant of `series` passes
/// through `level` in the requested direction.
pub fn find_level_crossing(series: &[(f64, f64)], level: f64, direction: CrossingDirection) -> Option<f64> {
    series.windows(2).find_map(|w| {
        let (t0, v0) = w[0];
        let (t1, v1) = w[1];
        let rising = v0 < level && v1 >= level;
        let falling = v0 > level && v1 <= level;
        let hit = match direction {
            CrossingDirection::Rising => rising,
            CrossingDirection::Falling => falling,
            CrossingDirection::Any => rising || falling,
        };
        hit.then(|| t0 + (level - v0) / (v1 - v0) * (t1 - t0))
    })
}
