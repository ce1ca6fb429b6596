use rayon::prelude::*;
use serde::Serialize;

use super::{best_response_value, utility_profile, Caps};
use crate::error::{Error, Result};
use crate::model::checks::{coalition_members, proper_coalitions};
use crate::model::{GameSpec, EPS};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoalitionValue {
    pub members: Vec<usize>,
    /// Best value of the merged agent against the others playing PPS.
    pub value: f64,
    /// Sum of the members' PPS utilities.
    pub pps_sum: f64,
}

impl CoalitionValue {
    pub fn blocks(&self) -> bool {
        self.value > self.pps_sum + EPS
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoreReport {
    pub utilities: Vec<f64>,
    /// Value of the grand coalition, the total reward.
    pub grand_value: f64,
    /// Proper nonempty coalitions ordered by size, then member bitmask.
    pub coalitions: Vec<CoalitionValue>,
    pub in_core: bool,
    /// First blocking coalition in `coalitions` order.
    pub violator: Option<Vec<usize>>,
}

/// Checks the PPS payoff vector against every proper coalition, valuing a
/// coalition as one agent with the summed aptitudes of its members.
pub fn coalition_analysis(g: &GameSpec, caps: Caps) -> Result<CoreReport> {
    let n = g.n();
    if n > caps.coalition_limit || n > 63 {
        return Err(Error::CoalitionSpaceExceeded {
            agents: n,
            limit: caps.coalition_limit.min(63),
        });
    }
    let profile = utility_profile(g);
    let coalitions: Vec<CoalitionValue> = if n < 2 {
        Vec::new()
    } else {
        proper_coalitions(n)
            .into_par_iter()
            .map(|c| {
                let members = coalition_members(c, n);
                let merged = g.merged(c)?;
                let value = best_response_value(&merged, 0, caps)?.best_value;
                let pps_sum = members.iter().map(|&i| profile.utilities[i]).sum();
                Ok(CoalitionValue {
                    members,
                    value,
                    pps_sum,
                })
            })
            .collect::<Result<_>>()?
    };
    let violator = coalitions
        .iter()
        .find(|c| c.blocks())
        .map(|c| c.members.clone());
    let sum: f64 = profile.utilities.iter().sum();
    Ok(CoreReport {
        in_core: violator.is_none() && (sum - profile.total).abs() <= EPS,
        utilities: profile.utilities,
        grand_value: profile.total,
        coalitions,
        violator,
    })
}
