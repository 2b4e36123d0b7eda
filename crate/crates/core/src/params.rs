use crate::error::{Error, Result};

/// Physical parameters of the damped rotating GP equation.
///
/// `mass_target` is the conserved squared L2 norm `||psi_0||^2`. The rotation
/// is about the third axis in 3D, so `rotation` is a signed scalar.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysParams {
    omega: Vec<f64>,
    rotation: f64,
    g: f64,
    sigma: f64,
    gamma: f64,
    mass_target: f64,
}

impl PhysParams {
    pub fn new(
        omega: Vec<f64>,
        rotation: f64,
        g: f64,
        sigma: f64,
        gamma: f64,
        mass_target: f64,
    ) -> Result<Self> {
        let d = omega.len();
        if d != 2 && d != 3 {
            return Err(Error::InvalidParams(format!(
                "need one trap frequency per axis (2 or 3), got {d}"
            )));
        }
        if omega.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidParams("trap frequencies must be positive".into()));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidParams(format!("damping gamma must be > 0, got {gamma}")));
        }
        if !rotation.is_finite() || !g.is_finite() {
            return Err(Error::InvalidParams("Omega and g must be finite".into()));
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::InvalidParams(format!("sigma must be >= 0, got {sigma}")));
        }
        if d == 3 && sigma >= 2.0 {
            return Err(Error::InvalidParams(format!(
                "sigma must be below the energy-critical power 2 in 3D, got {sigma}"
            )));
        }
        if g < 0.0 && sigma >= 2.0 / d as f64 {
            return Err(Error::InvalidParams(format!(
                "attractive coupling needs sigma < 2/d = {}, got {sigma}",
                2.0 / d as f64
            )));
        }
        if !(mass_target.is_finite() && mass_target > 0.0) {
            return Err(Error::InvalidParams(format!("mass must be > 0, got {mass_target}")));
        }
        Ok(Self {
            omega,
            rotation,
            g,
            sigma,
            gamma,
            mass_target,
        })
    }

    /// Isotropic 2D trap with unit mass.
    pub fn isotropic_2d(omega: f64, rotation: f64, g: f64, sigma: f64, gamma: f64) -> Result<Self> {
        Self::new(vec![omega, omega], rotation, g, sigma, gamma, 1.0)
    }

    pub fn dim(&self) -> usize {
        self.omega.len()
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn rotation(&self) -> f64 {
        self.rotation
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn mass_target(&self) -> f64 {
        self.mass_target
    }

    pub fn with_mass_target(&self, mass_target: f64) -> Result<Self> {
        let mut p = self.clone();
        if !(mass_target.is_finite() && mass_target > 0.0) {
            return Err(Error::InvalidParams(format!("mass must be > 0, got {mass_target}")));
        }
        p.mass_target = mass_target;
        Ok(p)
    }

    pub fn with_g(&self, g: f64) -> Result<Self> {
        Self::new(self.omega.clone(), self.rotation, g, self.sigma, self.gamma, self.mass_target)
    }

    pub fn with_rotation(&self, rotation: f64) -> Result<Self> {
        Self::new(self.omega.clone(), rotation, self.g, self.sigma, self.gamma, self.mass_target)
    }

    /// Smallest trap frequency.
    pub fn omega_min(&self) -> f64 {
        self.omega.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_isotropic(&self) -> bool {
        self.omega.iter().all(|&w| w == self.omega[0])
    }

    /// Harmonic potential `V(x) = 1/2 sum omega_j^2 x_j^2`.
    pub fn potential(&self, x: &[f64]) -> f64 {
        0.5 * self
            .omega
            .iter()
            .zip(x)
            .map(|(w, xj)| w * w * xj * xj)
            .sum::<f64>()
    }

    /// `|Omega| < omega`: the quadratic part of the energy is coercive.
    pub fn is_coercive(&self) -> bool {
        self.rotation.abs() < self.omega_min()
    }

    /// `|Omega| < omega / sqrt(2)`.
    pub fn is_slow_rotation(&self) -> bool {
        self.rotation.abs() < self.omega_min() / std::f64::consts::SQRT_2
    }

    /// Parameter range in which solutions exist globally in time.
    pub fn has_global_solutions(&self) -> bool {
        if self.g == 0.0 || self.sigma >= 0.5 {
            self.is_coercive()
        } else {
            self.is_slow_rotation()
        }
    }

    /// Constant `c` with `(H_Omega u, u) >= c (||grad u||^2 + ||x u||^2)`,
    /// or `None` outside the coercive regime.
    pub fn coercivity_constant(&self) -> Option<f64> {
        if !self.is_coercive() {
            return None;
        }
        let w = self.omega_min();
        let r2 = self.rotation * self.rotation;
        Some(0.5 * f64::min((w * w - r2) / 2.0, (1.0 - r2 / (w * w)) / 2.0))
    }

    /// Time-derivative prefactor `(i + gamma) / (1 + gamma^2)`.
    pub fn flow_coefficient(&self) -> num_complex::Complex64 {
        let den = 1.0 + self.gamma * self.gamma;
        num_complex::Complex64::new(self.gamma / den, 1.0 / den)
    }

    pub(crate) fn require_dim(&self, d: usize) -> Result<()> {
        if self.dim() == d {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!(
                "parameters are {}-dimensional but the grid is {d}-dimensional",
                self.dim()
            )))
        }
    }
}
