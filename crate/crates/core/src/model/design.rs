use super::{RewardVector, SaProfile};
use crate::error::{Error, Result};
use crate::network::SubtaskNetwork;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RewardDesign {
    /// `R_u = c / s_u`.
    Proportional { scale: f64 },
    /// Line only: `R_u s_u = α c` for every task but the last and `c` for the
    /// last one, so each precedence ratio is `1` or `α`.
    LineApprox { alpha: f64, scale: f64 },
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveParameter {
            name: name.to_string(),
            value,
        })
    }
}

pub fn design_rewards(
    net: &SubtaskNetwork,
    profile: &SaProfile,
    design: RewardDesign,
) -> Result<RewardVector> {
    let s = profile.simplicities();
    if s.len() != net.len() {
        return Err(Error::DimensionMismatch(format!(
            "network has {} subtasks, profile {}",
            net.len(),
            s.len()
        )));
    }
    match design {
        RewardDesign::Proportional { scale } => {
            check_positive("scale", scale)?;
            RewardVector::new(s.iter().map(|s| scale / s).collect())
        }
        RewardDesign::LineApprox { alpha, scale } => {
            let order = net.line_order().ok_or(Error::NotALine)?;
            check_positive("scale", scale)?;
            if !(alpha.is_finite() && alpha > 0.0 && alpha <= 1.0) {
                return Err(Error::NonPositiveParameter {
                    name: "alpha (must lie in (0, 1])".into(),
                    value: alpha,
                });
            }
            let last = *order.last().expect("non-empty network");
            RewardVector::new(
                (0..net.len())
                    .map(|u| {
                        let product = if u == last { scale } else { alpha * scale };
                        product / s[u]
                    })
                    .collect(),
            )
        }
    }
}
