//! Scenario files: one JSON document describing channel, array, power model
//! and constraints. Units live in field names (`_w`, `_db`, `_uW`).

use std::path::Path;

use serde::{Deserialize, Serialize};
use simo_ee::allocator::{Constraints, PowerModel};
use simo_ee::sir::{EffectiveChannel, ExplicitTopology};
use simo_ee::Scheme;

use crate::CliError;

/// Either the effective `(κ, δ)` pair or an explicit list of interferers.
///
/// Kept as one struct of optional fields rather than an untagged enum so a
/// file mixing both forms gets a precise message instead of "no variant
/// matched".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signal_path_loss: Option<f64>,
    #[serde(default, rename = "interferer_rx_powers_uW", skip_serializing_if = "Option::is_none")]
    pub interferer_rx_powers_uw: Option<Vec<f64>>,
}

impl Default for ChannelSpec {
    fn default() -> Self {
        Self {
            kappa: Some(8),
            delta_db: Some(10.0),
            signal_path_loss: None,
            interferer_rx_powers_uw: None,
        }
    }
}

/// The channel once its representation has been resolved.
#[derive(Debug, Clone)]
pub enum Channel {
    Effective(EffectiveChannel<f64>),
    Explicit(ExplicitTopology<f64>),
}

impl Channel {
    pub fn effective(&self) -> EffectiveChannel<f64> {
        match self {
            Channel::Effective(ch) => *ch,
            Channel::Explicit(topo) => topo.effective(),
        }
    }

    pub fn topology(&self) -> Option<&ExplicitTopology<f64>> {
        match self {
            Channel::Explicit(topo) => Some(topo),
            Channel::Effective(_) => None,
        }
    }
}

impl ChannelSpec {
    pub fn resolve(&self) -> Result<Channel, CliError> {
        let effective = self.kappa.is_some() || self.delta_db.is_some();
        let explicit = self.signal_path_loss.is_some() || self.interferer_rx_powers_uw.is_some();
        match (effective, explicit) {
            (true, true) => Err(CliError::Input(
                "channel: give either {kappa, delta_db} or {signal_path_loss, interferer_rx_powers_uW}, not both".into(),
            )),
            (false, false) => Err(CliError::Input("channel: no representation given".into())),
            (true, false) => {
                let (Some(kappa), Some(db)) = (self.kappa, self.delta_db) else {
                    return Err(CliError::Input("channel: kappa and delta_db must be given together".into()));
                };
                if !db.is_finite() {
                    return Err(CliError::Input(format!("channel.delta_db: not finite ({db})")));
                }
                let ch = EffectiveChannel::new(kappa, 10f64.powf(db / 10.0))
                    .map_err(|e| CliError::Input(format!("channel: {e}")))?;
                Ok(Channel::Effective(ch))
            }
            (false, true) => {
                let (Some(loss), Some(powers)) = (self.signal_path_loss, &self.interferer_rx_powers_uw) else {
                    return Err(CliError::Input(
                        "channel: signal_path_loss and interferer_rx_powers_uW must be given together".into(),
                    ));
                };
                let watts = powers.iter().map(|p| p * 1e-6).collect();
                let topo = ExplicitTopology::new(loss, watts).map_err(|e| CliError::Input(format!("channel: {e}")))?;
                Ok(Channel::Explicit(topo))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerSpec {
    pub eta: f64,
    pub p_t_w: f64,
    pub p_r_w: f64,
    pub p_syn_w: f64,
}

impl Default for PowerSpec {
    fn default() -> Self {
        let pm = PowerModel::<f64>::reference();
        Self {
            eta: pm.eta,
            p_t_w: pm.p_t,
            p_r_w: pm.p_r,
            p_syn_w: pm.p_syn,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSpec {
    pub epsilon: f64,
    pub r_min_bpshz: f64,
    pub p_min_w: f64,
    pub p_max_w: f64,
}

impl Default for ConstraintSpec {
    fn default() -> Self {
        let c = Constraints::<f64>::reference(1e-5);
        Self {
            epsilon: c.epsilon,
            r_min_bpshz: c.r_min,
            p_min_w: c.p_min,
            p_max_w: c.p_max,
        }
    }
}

fn default_antennas() -> u32 {
    8
}

fn default_scheme() -> Scheme {
    Scheme::Sc
}

/// Every field is optional; omitted ones take the reference setup
/// (κ = 8, δ = 10 dB, M = 8, SC, ε = 1e-5).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub channel: ChannelSpec,
    #[serde(default = "default_antennas")]
    pub antennas: u32,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    #[serde(default)]
    pub power_model: PowerSpec,
    #[serde(default)]
    pub constraints: ConstraintSpec,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            channel: ChannelSpec::default(),
            antennas: default_antennas(),
            scheme: default_scheme(),
            power_model: PowerSpec::default(),
            constraints: ConstraintSpec::default(),
        }
    }
}

/// Fully checked inputs ready for the library.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub channel: Channel,
    pub antennas: u32,
    pub scheme: Scheme,
    pub power: PowerModel<f64>,
    pub limits: Constraints<f64>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        // serde_json reports line and column, which is the diagnostic we want
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("scenario: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario is always serialisable")
    }

    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let channel = self.channel.resolve()?;
        if self.antennas == 0 {
            return Err(CliError::Input("antennas: must be at least 1".into()));
        }
        let p = &self.power_model;
        let power = PowerModel::new(p.eta, p.p_t_w, p.p_r_w, p.p_syn_w)
            .map_err(|e| CliError::Input(format!("power_model: {e}")))?;
        let c = &self.constraints;
        let limits = Constraints::new(c.epsilon, c.r_min_bpshz, c.p_min_w, c.p_max_w)
            .map_err(|e| CliError::Input(format!("constraints: {e}")))?;
        Ok(Resolved {
            channel,
            antennas: self.antennas,
            scheme: self.scheme,
            power,
            limits,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_reference_setup() {
        let s = Scenario::from_json("{}").unwrap();
        assert_eq!(s, Scenario::default());
        let r = s.resolve().unwrap();
        assert!((r.channel.effective().delta() - 10.0).abs() < 1e-12);
        assert_eq!(r.channel.effective().kappa(), 8);
    }

    #[test]
    fn round_trip_preserves_everything() {
        let s = Scenario::default();
        assert_eq!(Scenario::from_json(&s.to_json()).unwrap(), s);
        let explicit = Scenario {
            channel: ChannelSpec {
                kappa: None,
                delta_db: None,
                signal_path_loss: Some(1e-5),
                interferer_rx_powers_uw: Some(vec![0.5, 0.25]),
            },
            ..Scenario::default()
        };
        assert_eq!(Scenario::from_json(&explicit.to_json()).unwrap(), explicit);
    }

    #[test]
    fn mixed_channel_rejected() {
        let s = Scenario::from_json(r#"{"channel": {"kappa": 2, "delta_db": 3, "signal_path_loss": 1e-5}}"#).unwrap();
        assert!(matches!(s.resolve(), Err(CliError::Input(_))));
    }

    #[test]
    fn unknown_field_reports_position() {
        let err = Scenario::from_json("{\n  \"antenas\": 4\n}").unwrap_err().to_string();
        assert!(err.contains("antenas") && err.contains("line 2"), "{err}");
    }

    #[test]
    fn micro_watts_are_converted() {
        let s = Scenario::from_json(
            r#"{"channel": {"signal_path_loss": 1e-5, "interferer_rx_powers_uW": [0.5, 0.5]}}"#,
        )
        .unwrap();
        let r = s.resolve().unwrap();
        // δ = λ0 / Σ p_i λ_i = 1e-5 / 1e-6
        assert!((r.channel.effective().delta() - 10.0).abs() < 1e-9);
    }
}
