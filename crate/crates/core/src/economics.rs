//! Task rewards (throughput integrals over a hexagonal region) and edge costs
//! (rotary-wing propulsion energy).

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_3, PI};
use std::sync::{Arc, Mutex};

use crate::channel::{Channel, Interferer};
use crate::demand::DemandTable;
use crate::error::Result;
use crate::quadrature::{integrate_hexagon, QuadratureOptions};
use crate::scenario::{PowerModel, Scenario};

/// Propulsion power (W) of a rotary-wing UAV at horizontal speed `speed` (m/s).
pub fn propulsion_power(speed: f64, model: &PowerModel) -> f64 {
    let PowerModel {
        lambda0,
        lambda1,
        lambda2,
        tip_speed,
        hover_induced_velocity: chi,
    } = *model;
    let v2 = speed * speed;
    let blade = lambda0 * (1.0 + 3.0 * v2 / (tip_speed * tip_speed));
    let induced_sq = (1.0 + v2 * v2 / (4.0 * chi.powi(4))).sqrt() - v2 / (2.0 * chi * chi);
    let induced = lambda1 * induced_sq.max(0.0).sqrt();
    let parasite = 0.5 * lambda2 * v2 * speed;
    blade + induced + parasite
}

/// Boundary of a flat-topped regular hexagon in polar form about its center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HexBoundary {
    pub center: [f64; 2],
    pub side: f64,
}

impl HexBoundary {
    /// Center-to-boundary distance along horizontal angle `angle` (radians).
    pub fn radius_at(&self, angle: f64) -> f64 {
        let a = angle.rem_euclid(2.0 * PI);
        let a = if a > PI { 2.0 * PI - a } else { a };
        let half = 3f64.sqrt() * self.side / 2.0;
        if a < FRAC_PI_3 {
            half / (a + FRAC_PI_3).sin()
        } else if a < 2.0 * FRAC_PI_3 {
            half / a.sin()
        } else {
            half / (a - FRAC_PI_3).sin()
        }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        let (dx, dy) = (p[0] - self.center[0], p[1] - self.center[1]);
        dx.hypot(dy) <= self.radius_at(dy.atan2(dx))
    }
}

/// Moving time, hovering time and cost of one route edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeCost {
    pub moving_time: f64,
    pub hovering_time: f64,
    pub cost: f64,
}

/// Per-UAV cost coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostRates {
    /// `P(φ0)` in watts.
    pub flight_power: f64,
    /// `P(0)` in watts.
    pub hover_power: f64,
    pub gamma_move: f64,
    pub gamma_hover: f64,
    pub slot_seconds: f64,
}

impl CostRates {
    pub fn for_uav(scenario: &Scenario, uav: usize) -> Self {
        let model = &scenario.physics.power;
        CostRates {
            flight_power: propulsion_power(scenario.fleet.uavs[uav].speed, model),
            hover_power: propulsion_power(0.0, model),
            gamma_move: scenario.economics.gamma_move,
            gamma_hover: scenario.economics.gamma_hover,
            slot_seconds: scenario.horizon.slot_seconds,
        }
    }

    /// Cost of serving one slot, `γ2 P(0) e`.
    pub fn hover_charge(&self) -> f64 {
        self.gamma_hover * self.hover_power * self.slot_seconds
    }

    /// Edge from a task in `from_slot` to one in `to_slot`.
    pub fn edge(&self, from_slot: usize, to_slot: usize) -> EdgeCost {
        assert!(to_slot > from_slot, "edges must advance in time");
        let moving_time = (to_slot - from_slot - 1) as f64 * self.slot_seconds;
        let hovering_time = self.slot_seconds;
        EdgeCost {
            moving_time,
            hovering_time,
            cost: self.gamma_move * self.flight_power * moving_time
                + self.gamma_hover * self.hover_power * hovering_time,
        }
    }
}

/// Cost of the edge between zero-based slots for UAV `uav`.
pub fn edge_cost(from_slot: usize, to_slot: usize, uav: usize, scenario: &Scenario) -> EdgeCost {
    CostRates::for_uav(scenario, uav).edge(from_slot, to_slot)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntegralKey {
    power: u64,
    /// Interferer offsets from the region center (micrometers) and power bits.
    interferers: Vec<(i64, i64, u64)>,
}

/// Throughput integrals keyed by serving power and interferer geometry.
/// Only share between models with identical channel, side length and
/// quadrature settings.
pub type IntegralCache = Arc<Mutex<HashMap<IntegralKey, f64>>>;

/// Evaluates task rewards `β Δ λ_k ∬ r dx dy`.
///
/// The throughput integral depends only on the serving power and the
/// interferers' positions relative to the region center, so it is cached on
/// that key and shared across slots and regions.
#[derive(Debug)]
pub struct RewardModel {
    channel: Channel,
    centers: Vec<[f64; 2]>,
    side: f64,
    scale: f64,
    demand: DemandTable,
    quadrature: QuadratureOptions,
    /// Interferers farther than this from a region center never reach it.
    reach: f64,
    cache: IntegralCache,
}

impl RewardModel {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        Ok(Self::with_demand(scenario, scenario.demand_table()?))
    }

    pub fn with_demand(scenario: &Scenario, demand: DemandTable) -> Self {
        let channel = Channel::from_scenario(scenario);
        let side = scenario.topology.side_length;
        RewardModel {
            reach: channel.cone_radius() + side,
            channel,
            centers: scenario.topology.centers.clone(),
            side,
            scale: scenario.economics.beta * scenario.economics.bandwidth_hz,
            demand,
            quadrature: QuadratureOptions::default(),
            cache: IntegralCache::default(),
        }
    }

    pub fn with_quadrature(mut self, opts: QuadratureOptions) -> Self {
        self.quadrature = opts;
        self.cache = IntegralCache::default();
        self
    }

    /// Uses `cache` for throughput integrals.
    pub fn with_cache(mut self, cache: IntegralCache) -> Self {
        self.cache = cache;
        self
    }

    pub fn cache(&self) -> IntegralCache {
        Arc::clone(&self.cache)
    }

    pub fn channel(&self) -> &Channel {
        &self.channel
    }

    pub fn demand(&self) -> &DemandTable {
        &self.demand
    }

    pub fn regions(&self) -> usize {
        self.centers.len()
    }

    pub fn slots(&self) -> usize {
        self.demand.slots()
    }

    pub fn hexagon(&self, region: usize) -> HexBoundary {
        HexBoundary {
            center: self.centers[region],
            side: self.side,
        }
    }

    /// Integrand of the reward: rate at `user` in `region`.
    pub fn rate_at(&self, region: usize, power: f64, interferers: &[Interferer], user: [f64; 2]) -> f64 {
        let g = self.channel.gain_between(self.centers[region], user);
        self.channel.user_rate(g, power, interferers, user)
    }

    /// `∬_{D_l} r dx dy` for a UAV hovering over `region` at `power` while
    /// the `(region, power)` pairs in `others` transmit.
    pub fn throughput_integral(&self, region: usize, power: f64, others: &[(usize, f64)]) -> Result<f64> {
        let center = self.centers[region];
        let mut interferers: Vec<Interferer> = others
            .iter()
            .map(|&(r, p)| Interferer {
                position: self.centers[r],
                power: p,
            })
            .filter(|i| {
                (i.position[0] - center[0]).hypot(i.position[1] - center[1]) <= self.reach
            })
            .collect();
        let mut key = IntegralKey {
            power: power.to_bits(),
            interferers: interferers
                .iter()
                .map(|i| {
                    (
                        ((i.position[0] - center[0]) * 1e6).round() as i64,
                        ((i.position[1] - center[1]) * 1e6).round() as i64,
                        i.power.to_bits(),
                    )
                })
                .collect(),
        };
        key.interferers.sort_unstable();
        if let Some(&v) = self.cache.lock().unwrap().get(&key) {
            return Ok(v);
        }
        // Evaluate in the canonical frame so equal keys give bit-equal values.
        interferers = key
            .interferers
            .iter()
            .map(|&(dx, dy, p)| Interferer {
                position: [dx as f64 * 1e-6, dy as f64 * 1e-6],
                power: f64::from_bits(p),
            })
            .collect();
        let channel = &self.channel;
        let value = integrate_hexagon([0.0, 0.0], self.side, &self.quadrature, |user| {
            let g = channel.gain_between([0.0, 0.0], user);
            channel.user_rate(g, power, &interferers, user)
        })?;
        self.cache.lock().unwrap().insert(key, value);
        Ok(value)
    }

    /// Reward of serving `(region, slot)` at `power` with no other UAV active.
    pub fn reward_no_interference(&self, region: usize, slot: usize, power: f64) -> Result<f64> {
        self.reward_with_interference(region, slot, power, &[])
    }

    /// Reward of serving `(region, slot)` at `power` while the UAVs in
    /// `others` (hovering region, power) transmit in the same slot.
    pub fn reward_with_interference(
        &self,
        region: usize,
        slot: usize,
        power: f64,
        others: &[(usize, f64)],
    ) -> Result<f64> {
        let lambda = self.demand.density(region, slot);
        if lambda == 0.0 {
            return Ok(0.0);
        }
        Ok(self.scale * lambda * self.throughput_integral(region, power, others)?)
    }

    /// Interference-free rewards for every task, indexed `region + L·slot`.
    pub fn reward_table(&self, power: f64) -> Result<Vec<f64>> {
        let (l, t) = (self.regions(), self.slots());
        let mut out = Vec::with_capacity(l * t);
        for slot in 0..t {
            for region in 0..l {
                out.push(self.reward_no_interference(region, slot, power)?);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::ScenarioConfig;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn reference_rotor() -> PowerModel {
        ScenarioConfig::default().build().unwrap().physics.power
    }

    #[test]
    fn hover_power_is_blade_plus_induced() {
        let m = reference_rotor();
        assert_eq!(propulsion_power(0.0, &m), m.lambda0 + m.lambda1);
        assert!((propulsion_power(0.0, &m) - 1371.32).abs() < 1e-9);
    }

    #[test]
    fn parasite_term_dominates_at_speed() {
        let m = reference_rotor();
        let parasite = |v: f64| 0.5 * m.lambda2 * v.powi(3);
        assert!((parasite(100.0) / parasite(50.0) - 8.0).abs() < 1e-12);
        assert!(propulsion_power(100.0, &m) > 4.0 * propulsion_power(50.0, &m));
    }

    #[test]
    fn power_dips_below_hover() {
        let m = reference_rotor();
        let hover = propulsion_power(0.0, &m);
        // 1-D scan over (0, 30] m/s.
        let (best_v, best_p) = (1..=3000)
            .map(|i| {
                let v = i as f64 / 100.0;
                (v, propulsion_power(v, &m))
            })
            .fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        assert!(best_p < hover, "min {best_p} at {best_v}");
        assert!(best_v > 5.0 && best_v < 30.0);
    }

    fn half_plane_contains(h: &HexBoundary, p: [f64; 2]) -> bool {
        // Flat-topped hexagon: edge normals at 30° + k·60°, apothem √3R/2.
        let apothem = 3f64.sqrt() * h.side / 2.0;
        (0..6).all(|k| {
            let a = PI / 6.0 + k as f64 * FRAC_PI_3;
            (p[0] - h.center[0]) * a.cos() + (p[1] - h.center[1]) * a.sin() <= apothem
        })
    }

    #[test]
    fn membership_matches_half_planes() {
        let h = HexBoundary {
            center: [37.0, -12.0],
            side: 150.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let apothem = 3f64.sqrt() * h.side / 2.0;
        let mut disagreements = 0;
        for _ in 0..10_000 {
            let p = [
                h.center[0] + rng.random_range(-160.0..160.0),
                h.center[1] + rng.random_range(-160.0..160.0),
            ];
            let boundary_gap = (0..6)
                .map(|k| {
                    let a = PI / 6.0 + k as f64 * FRAC_PI_3;
                    ((p[0] - h.center[0]) * a.cos() + (p[1] - h.center[1]) * a.sin() - apothem).abs()
                })
                .fold(f64::INFINITY, f64::min);
            if boundary_gap > 1e-9 && h.contains(p) != half_plane_contains(&h, p) {
                disagreements += 1;
            }
        }
        assert_eq!(disagreements, 0);
    }

    #[test]
    fn boundary_radius_range() {
        let h = HexBoundary {
            center: [0.0, 0.0],
            side: 150.0,
        };
        for i in 0..3600 {
            let a = i as f64 / 3600.0 * 2.0 * PI - PI;
            let f = h.radius_at(a);
            assert!(f >= 3f64.sqrt() * 75.0 - 1e-9 && f <= 150.0 + 1e-9);
            assert!((h.radius_at(a + FRAC_PI_3) - f).abs() < 1e-9);
        }
        assert!((h.radius_at(0.0) - 150.0).abs() < 1e-12);
        assert!((h.radius_at(PI / 6.0) - 3f64.sqrt() * 75.0).abs() < 1e-12);
    }

    #[test]
    fn edge_cost_examples() {
        let s = ScenarioConfig::default().build().unwrap();
        let rates = CostRates::for_uav(&s, 0);
        let next = edge_cost(0, 1, 0, &s);
        assert_eq!(next.moving_time, 0.0);
        assert_eq!(next.hovering_time, 60.0);
        assert!((next.cost - rates.hover_charge()).abs() < 1e-12);
        let skip = edge_cost(0, 2, 0, &s);
        assert_eq!(skip.moving_time, 60.0);
        assert!(skip.cost >= rates.hover_charge());
        // Affine in the two weights.
        let with = |g1: f64, g2: f64| {
            CostRates {
                gamma_move: g1,
                gamma_hover: g2,
                ..rates
            }
            .edge(0, 4)
            .cost
        };
        let base = with(0.0, 0.0);
        assert_eq!(base, 0.0);
        assert!((with(2.0, 3.0) - (2.0 * with(1.0, 0.0) + 3.0 * with(0.0, 1.0))).abs() < 1e-6);
    }

    #[test]
    fn reward_linear_in_demand_and_beta() {
        let mut cfg = ScenarioConfig::default();
        cfg.demand.initial_counts = Some(vec![50.0; 9]);
        let s = cfg.build().unwrap();
        let p = s.fleet.uavs[0].tx_power;
        let base = RewardModel::new(&s).unwrap().reward_no_interference(4, 0, p).unwrap();
        cfg.demand.initial_counts = Some(vec![100.0; 9]);
        let doubled = RewardModel::new(&cfg.build().unwrap())
            .unwrap()
            .reward_no_interference(4, 0, p)
            .unwrap();
        assert!((doubled / base - 2.0).abs() < 1e-12);
        cfg.economics.beta *= 2.0;
        let beta = RewardModel::new(&cfg.build().unwrap())
            .unwrap()
            .reward_no_interference(4, 0, p)
            .unwrap();
        assert!((beta / doubled - 2.0).abs() < 1e-12);
        cfg.demand.initial_counts = Some(vec![0.0; 9]);
        let zero = RewardModel::new(&cfg.build().unwrap()).unwrap();
        assert_eq!(zero.reward_no_interference(4, 0, p).unwrap(), 0.0);
    }

    /// Plain Monte-Carlo estimate of `∬ r` over region `region`: uniform
    /// samples in the bounding box, membership by half-planes.
    fn monte_carlo_integral(
        model: &RewardModel,
        region: usize,
        power: f64,
        others: &[(usize, f64)],
        samples: usize,
        rng: &mut ChaCha8Rng,
    ) -> f64 {
        let h = model.hexagon(region);
        let interferers: Vec<Interferer> = others
            .iter()
            .map(|&(r, p)| Interferer {
                position: model.centers[r],
                power: p,
            })
            .collect();
        let (w, ht) = (h.side, 3f64.sqrt() * h.side / 2.0);
        let mut sum = 0.0;
        for _ in 0..samples {
            let p = [
                h.center[0] + rng.random_range(-w..w),
                h.center[1] + rng.random_range(-ht..ht),
            ];
            if half_plane_contains(&h, p) {
                sum += model.rate_at(region, power, &interferers, p);
            }
        }
        4.0 * w * ht * sum / samples as f64
    }

    #[test]
    fn quadrature_matches_monte_carlo() {
        let s = ScenarioConfig::default().build().unwrap();
        let model = RewardModel::new(&s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let center = 4;
        let ring: Vec<usize> = (0..9).filter(|&r| r != center).collect();
        for draw in 0..20 {
            let power = crate::scenario::dbm_to_watts(rng.random_range(0.0..50.0));
            let others: Vec<(usize, f64)> = match draw % 3 {
                0 => vec![],
                1 => vec![(ring[rng.random_range(0..ring.len())], crate::scenario::dbm_to_watts(rng.random_range(0.0..50.0)))],
                _ => vec![(3, power), (5, power)],
            };
            let quad = model.throughput_integral(center, power, &others).unwrap();
            let mc = monte_carlo_integral(&model, center, power, &others, 1_000_000, &mut rng);
            assert!(((quad - mc) / mc).abs() < 5e-3, "draw {draw}: quadrature {quad} vs mc {mc}");
        }
    }

    #[test]
    fn interference_lowers_reward() {
        let s = ScenarioConfig::default().build().unwrap();
        let model = RewardModel::new(&s).unwrap();
        let p = s.fleet.uavs[0].tx_power;
        let alone = model.reward_with_interference(4, 0, p, &[]).unwrap();
        assert_eq!(alone, model.reward_no_interference(4, 0, p).unwrap());
        let one = model.reward_with_interference(4, 0, p, &[(5, p)]).unwrap();
        let louder = model.reward_with_interference(4, 0, p, &[(5, 2.0 * p)]).unwrap();
        assert!(one < alone && louder < one);
    }
}
