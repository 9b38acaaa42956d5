use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Discretised Ornstein-Uhlenbeck exploration noise with mean zero.
///
/// `x <- x + theta * (0 - x) * dt + sigma * sqrt(dt) * N(0, 1)`.
/// `sigma` shrinks geometrically per episode but never below `sigma_floor`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuNoise {
    pub x: f64,
    pub theta: f64,
    pub sigma: f64,
    pub sigma_floor: f64,
    pub decay: f64,
    pub dt: f64,
}

impl OuNoise {
    pub fn new(theta: f64, sigma: f64, sigma_floor: f64, decay: f64, dt: f64) -> Self {
        assert!(sigma_floor > 0.0, "sigma floor must be positive");
        Self {
            x: 0.0,
            theta,
            sigma: sigma.max(sigma_floor),
            sigma_floor,
            decay,
            dt,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        let eps: f64 = rng.sample(StandardNormal);
        self.x += self.theta * (0.0 - self.x) * self.dt + self.sigma * self.dt.sqrt() * eps;
        self.x
    }

    pub fn reset(&mut self) {
        self.x = 0.0;
    }

    /// Shrinks `sigma` by one episode's worth of decay.
    pub fn end_episode(&mut self) {
        self.sigma = (self.sigma * self.decay).max(self.sigma_floor);
    }

    /// Standard deviation of the recursion's stationary distribution.
    pub fn stationary_std(&self) -> f64 {
        let k = self.theta * self.dt;
        (self.sigma * self.sigma * self.dt / (2.0 * k - k * k)).sqrt()
    }
}
