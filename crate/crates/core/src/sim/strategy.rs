use serde::Serialize;

use crate::error::{Error, Result};

/// How one agent chooses tasks and when it publishes solutions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Strategy {
    /// Work on the highest virtual reward among available tasks; share on
    /// solving.
    PpsHerding,
    /// Split effort over the available tasks maximizing `R_u a_i(u)` (under
    /// separable aptitudes, the argmax of `R_u s_u`); share on solving.
    /// `weights` are per-task and renormalized over that set; without weights,
    /// or when they vanish on it, the split is uniform.
    PpsSplit { weights: Option<Vec<f64>> },
    /// Keep solutions private for `tau` after each own solve, releasing early
    /// when another agent shares. Works like [`Strategy::PpsHerding`].
    Delay { tau: f64 },
    /// Share only once every task is known. Works like
    /// [`Strategy::PpsHerding`].
    WithholdAll,
}

impl Strategy {
    pub fn validate(&self, tasks: usize) -> Result<()> {
        match self {
            Strategy::PpsHerding | Strategy::WithholdAll => Ok(()),
            Strategy::Delay { tau } if tau.is_nan() || *tau < 0.0 => Err(Error::InvalidStrategy(
                format!("delay must be non-negative, got {tau}"),
            )),
            Strategy::Delay { .. } => Ok(()),
            Strategy::PpsSplit { weights: None } => Ok(()),
            Strategy::PpsSplit { weights: Some(w) } => {
                if w.len() != tasks {
                    return Err(Error::InvalidStrategy(format!(
                        "split has {} weights for {tasks} tasks",
                        w.len()
                    )));
                }
                if w.iter().any(|x| !x.is_finite() || *x < 0.0) || w.iter().sum::<f64>() <= 0.0 {
                    return Err(Error::InvalidStrategy(
                        "split weights must be non-negative with positive sum".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn shares_immediately(&self) -> bool {
        matches!(
            self,
            Strategy::PpsHerding | Strategy::PpsSplit { .. } | Strategy::Delay { tau: 0.0 }
        )
    }
}
