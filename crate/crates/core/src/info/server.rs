use crate::env::{AccessPointLayout, ControlGraph, NodeId, UNREACHABLE};

use super::{binary_entropy, InfoError, RobotChannel, SeriesConfig};

/// Heuristic estimate of the information a robot gains at its next check-in from
/// teammates' uploads, as a function of how far it is from the access points.
///
/// Every teammate message is treated as one binary observation with a constant
/// detection probability `p_d = (N−1)|F|/|E| · γ^h`, where `h` is the hop count from
/// the candidate node to the nearest access point.
#[derive(Debug, Clone, PartialEq)]
pub struct ServerInfoModel {
    pub team_size: usize,
    /// `|F| = π r_d²`.
    pub footprint_area: f64,
    /// Free area of the environment.
    pub env_area: f64,
    pub gamma: f64,
    /// Per-step probability that a given teammate checks in; `1/T_C`.
    pub rho: f64,
}

impl ServerInfoModel {
    pub fn new(team_size: usize, footprint_area: f64, env_area: f64, gamma: f64, rho: f64) -> Result<Self, InfoError> {
        if !(footprint_area > 0.0 && env_area > 0.0) {
            return Err(InfoError::Inconsistent("footprint and environment areas must be positive".into()));
        }
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(InfoError::Inconsistent(format!("discount must lie in (0, 1], got {gamma}")));
        }
        if !(0.0..=1.0).contains(&rho) {
            return Err(InfoError::Inconsistent(format!("check-in rate must lie in [0, 1], got {rho}")));
        }
        Ok(Self { team_size, footprint_area, env_area, gamma, rho })
    }

    /// Check-in rate for period `t_c`; an infinite period gives rate 0.
    pub fn rate_for_period(t_c: f64) -> f64 {
        if t_c.is_finite() && t_c > 0.0 {
            (1.0 / t_c).min(1.0)
        } else {
            0.0
        }
    }

    /// Detection probability of one teammate message, clamped to 1.
    pub fn detection_prob(&self, hops: u32) -> f64 {
        if hops == UNREACHABLE || self.team_size < 2 {
            return 0.0;
        }
        let nominal = (self.team_size - 1) as f64 * self.footprint_area / self.env_area;
        (nominal * self.gamma.powi(hops as i32)).min(1.0)
    }

    pub fn detection_prob_at(&self, q: NodeId, graph: &ControlGraph, aps: &AccessPointLayout) -> f64 {
        self.detection_prob(aps.hops_to_nearest(graph, q))
    }

    /// `E[m] = (N−1) Σ_{k=0}^{τ} (τ−k)(1−ρ)^k ρ`: expected number of teammate messages
    /// gathered at the server since the robot's last check-in `τ` steps ago.
    pub fn expected_messages(&self, tau: u64) -> f64 {
        if self.team_size < 2 || self.rho == 0.0 {
            return 0.0;
        }
        let mut sum = 0.0;
        let mut survive = 1.0;
        for k in 0..=tau {
            let term = (tau - k) as f64 * survive * self.rho;
            sum += term;
            survive *= 1.0 - self.rho;
            if survive < 1e-300 {
                break;
            }
        }
        (self.team_size - 1) as f64 * sum
    }

    /// Mutual information of a single message with constant detection probability `pd`.
    pub fn single_message_info(&self, lambda: f64, mu: f64, pd: f64, series: SeriesConfig) -> f64 {
        let p0 = (-(lambda * pd + mu)).exp();
        let hc = RobotChannel::constant(lambda, pd, series).conditional_entropy(mu);
        binary_entropy(p0) - hc
    }

    /// `E[m] · I_single` at hop distance `hops`.
    pub fn mutual_info(&self, lambda: f64, mu: f64, series: SeriesConfig, tau: u64, hops: u32) -> f64 {
        let m = self.expected_messages(tau);
        if m == 0.0 {
            return 0.0;
        }
        m * self.single_message_info(lambda, mu, self.detection_prob(hops), series)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(n: usize, rho: f64) -> ServerInfoModel {
        ServerInfoModel::new(n, std::f64::consts::PI * 25.0, 1000.0, 0.9, rho).unwrap()
    }

    #[test]
    fn expected_messages_small_case() {
        assert!((model(3, 0.5).expected_messages(3) - 4.25).abs() < 1e-12);
        assert_eq!(model(3, 0.5).expected_messages(0), 0.0);
        assert_eq!(model(1, 0.5).expected_messages(10), 0.0);
        assert_eq!(model(3, 0.0).expected_messages(10), 0.0);
    }

    #[test]
    fn expected_messages_direct_sum() {
        let m = model(4, 0.1);
        for tau in [1u64, 7, 40, 200] {
            let mut direct = 0.0;
            for k in 0..=tau {
                direct += (tau - k) as f64 * 0.9f64.powi(k as i32) * 0.1;
            }
            assert!((m.expected_messages(tau) - 3.0 * direct).abs() < 1e-9 * (1.0 + direct));
        }
    }

    #[test]
    fn detection_prob_decays_and_clamps() {
        let m = model(3, 0.1);
        let base = 2.0 * std::f64::consts::PI * 25.0 / 1000.0;
        assert!((m.detection_prob(0) - base).abs() < 1e-15);
        assert!((m.detection_prob(2) - base * 0.81).abs() < 1e-15);
        let crowded = ServerInfoModel::new(50, 100.0, 1000.0, 0.9, 0.1).unwrap();
        assert_eq!(crowded.detection_prob(0), 1.0);
        assert_eq!(m.detection_prob(UNREACHABLE), 0.0);
    }

    #[test]
    fn info_zero_without_messages_and_nonneg_otherwise() {
        let m = model(3, 0.1);
        let s = SeriesConfig::default();
        assert_eq!(m.mutual_info(5.0, 0.3, s, 0, 3), 0.0);
        let near = m.mutual_info(5.0, 0.3, s, 20, 0);
        let far = m.mutual_info(5.0, 0.3, s, 20, 15);
        assert!(near > 0.0 && far > 0.0 && near > far);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ServerInfoModel::new(3, 1.0, 10.0, 0.0, 0.1).is_err());
        assert!(ServerInfoModel::new(3, 1.0, 10.0, 0.9, 1.5).is_err());
        assert!(ServerInfoModel::new(3, 0.0, 10.0, 0.9, 0.1).is_err());
        assert_eq!(ServerInfoModel::rate_for_period(f64::INFINITY), 0.0);
        assert_eq!(ServerInfoModel::rate_for_period(40.0), 0.025);
    }
}
