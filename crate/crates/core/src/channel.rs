//! Air-to-ground link model: LOS probability, average channel gain inside the
//! antenna cone, and the per-user rate under co-channel interference.
//!
//! Cone membership uses the elevation form `θ ≥ 90° − θ0/2`, which is the
//! geometry of a downward antenna whose main beam covers the region beneath
//! it. The inline gain formula is sometimes quoted with `θ ≥ θ0/2`; the two
//! disagree and only the elevation form matches a cone of radius `H tan(θ0/2)`.

use crate::scenario::{Scenario, SPEED_OF_LIGHT};

/// LOS probability for elevation `theta_deg` in degrees.
pub fn los_probability(theta_deg: f64, psi: f64, zeta: f64) -> f64 {
    1.0 / (1.0 + psi * (-zeta * (theta_deg - psi)).exp())
}

/// UAV-to-user geometry at altitude `H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub distance: f64,
    /// Elevation angle in degrees.
    pub elevation: f64,
}

impl LinkGeometry {
    pub fn new(uav: [f64; 2], user: [f64; 2], altitude: f64) -> Self {
        let horizontal = (uav[0] - user[0]).hypot(uav[1] - user[1]);
        let distance = horizontal.hypot(altitude);
        let elevation = (altitude / distance).asin().to_degrees();
        LinkGeometry {
            distance,
            elevation,
        }
    }
}

/// An active co-channel transmitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interferer {
    pub position: [f64; 2],
    pub power: f64,
}

/// Link parameters resolved from a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel {
    pub altitude: f64,
    /// Minimum elevation (degrees) inside the coverage cone.
    pub cone_elevation: f64,
    /// `4π f_c / c`.
    pub k0: f64,
    pub alpha: f64,
    pub eta_los: f64,
    pub eta_nlos: f64,
    pub psi: f64,
    pub zeta: f64,
    pub noise: f64,
}

impl Channel {
    pub fn from_scenario(s: &Scenario) -> Self {
        let p = &s.physics;
        Channel {
            altitude: s.fleet.altitude,
            cone_elevation: 90.0 - s.fleet.beamwidth.to_degrees() / 2.0,
            k0: 4.0 * std::f64::consts::PI * p.carrier_hz / SPEED_OF_LIGHT,
            alpha: p.path_loss_exponent,
            eta_los: p.eta_los,
            eta_nlos: p.eta_nlos,
            psi: p.psi,
            zeta: p.zeta,
            noise: p.noise_w,
        }
    }

    /// Horizontal radius of the coverage cone.
    pub fn cone_radius(&self) -> f64 {
        self.altitude / self.cone_elevation.to_radians().tan()
    }

    pub fn in_cone(&self, geom: &LinkGeometry) -> bool {
        geom.elevation >= self.cone_elevation
    }

    /// Average channel gain; zero outside the cone.
    pub fn gain(&self, geom: &LinkGeometry) -> f64 {
        if !self.in_cone(geom) {
            return 0.0;
        }
        let p_los = los_probability(geom.elevation, self.psi, self.zeta);
        let excess = self.eta_los * p_los + self.eta_nlos * (1.0 - p_los);
        (self.k0 * geom.distance).powf(-self.alpha) / excess
    }

    pub fn gain_between(&self, uav: [f64; 2], user: [f64; 2]) -> f64 {
        self.gain(&LinkGeometry::new(uav, user, self.altitude))
    }

    /// Rate in nats/s/Hz for a user receiving `serving_gain` at
    /// `serving_power`, with interference evaluated at the user's position.
    pub fn user_rate(
        &self,
        serving_gain: f64,
        serving_power: f64,
        interferers: &[Interferer],
        user: [f64; 2],
    ) -> f64 {
        let interference: f64 = interferers
            .iter()
            .map(|i| i.power * self.gain_between(i.position, user))
            .sum();
        (serving_power * serving_gain / (interference + self.noise)).ln_1p()
    }
}
