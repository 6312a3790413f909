//! Closed-form attoclock model: barrier geometry and the tunneling time-delays.
//!
//! Everything here is a pure function of (I_p, Z_eff, F). The quasistatic
//! effective potential along the field direction is
//! `V(x) = -Z_eff/x - x*F`, and the barrier disappears at the atomic field
//! strength `F_a = I_p^2 / (4 Z_eff)`. The algebraic barrier height
//! `delta_z = sqrt(I_p^2 - 4 Z_eff F)` drives every delay formula; the
//! geometric apex depth `I_p - 2 sqrt(Z_eff F)` differs from it in general and
//! is exposed separately as a diagnostic.

use crate::error::{Error, Result};

/// Target atom in the single-active-electron approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomicSystem {
    ip: f64,
    z_eff: f64,
}

/// Barrier geometry at one field strength, all lengths and energies in atomic units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierGeometry {
    /// Field strength the geometry was evaluated at.
    pub f: f64,
    /// Atomic field strength of the system.
    pub f_a: f64,
    /// Algebraic barrier height sqrt(I_p^2 - 4 Z_eff F); 0 at F = F_a.
    pub delta_z: f64,
    /// Barrier width delta_z / F between the entrance and exit points.
    pub d_b: f64,
    /// Inner (entrance) point (I_p - delta_z) / (2F).
    pub x_minus: f64,
    /// Outer (exit) point (I_p + delta_z) / (2F).
    pub x_plus: f64,
    /// Barrier-apex position sqrt(Z_eff / F).
    pub x_m: f64,
    /// Classical barrier width I_p / F.
    pub d_c: f64,
}

/// All model time-delays at one field strength, times in atomic units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayBreakdown {
    /// Atomic time 1 / (2 I_p), the saturation value at F = F_a.
    pub tau_a: f64,
    /// Tunnel-ionization delay tau_a * xi.
    pub tau_dion: f64,
    /// Barrier time-delay (1/2) * delta_z / (4 Z_eff F); 0 at F = F_a.
    pub tau_db: f64,
    /// Forward-channel delay 1 / (2 (I_p - delta_z)) = tau_dion + tau_db.
    pub tau_td: f64,
    /// Backward-channel delay 1 / (2 (I_p + delta_z)) = tau_dion - tau_db.
    pub tau_ti: f64,
    /// Field enhancement xi = F_a / F.
    pub xi: f64,
    /// Barrier factor lambda = delta_z / I_p; 1 in the thick-barrier limit.
    pub lambda: f64,
}

impl DelayBreakdown {
    /// Forward-channel energy scale I_p - delta_z, recovered as 1 / (2 tau_td).
    pub fn epsilon_f(&self) -> f64 {
        1.0 / (2.0 * self.tau_td)
    }
}

/// Relative width below which the squared barrier height is treated as 0.
///
/// Near F = F_a the argument I_p^2 - 4 Z_eff F is floating-point dust; the
/// clamp makes delta_z exactly 0 at the boundary instead of NaN or noise.
const DELTA_Z_CLAMP_REL: f64 = 1e-15;

impl AtomicSystem {
    /// Builds a system; both the ionization potential and the effective charge must be positive and finite.
    pub fn new(ip: f64, z_eff: f64) -> Result<Self> {
        if !(ip > 0.0) || !ip.is_finite() {
            return Err(Error::Domain(format!("ionization potential must be positive, got {ip}")));
        }
        if !(z_eff > 0.0) || !z_eff.is_finite() {
            return Err(Error::Domain(format!("effective charge must be positive, got {z_eff}")));
        }
        Ok(AtomicSystem { ip, z_eff })
    }

    /// Ionization potential in atomic units.
    pub fn ip(&self) -> f64 {
        self.ip
    }

    /// Effective nuclear charge, dimensionless.
    pub fn z_eff(&self) -> f64 {
        self.z_eff
    }

    /// Atomic field strength I_p^2 / (4 Z_eff) where the barrier is fully suppressed.
    pub fn atomic_field_strength(&self) -> f64 {
        self.ip * self.ip / (4.0 * self.z_eff)
    }

    /// Atomic time 1 / (2 I_p).
    pub fn tau_a(&self) -> f64 {
        1.0 / (2.0 * self.ip)
    }

    /// F -> 0 limit of the backward-channel delay, 1 / (4 I_p).
    pub fn weak_measurement_backreaction(&self) -> f64 {
        1.0 / (4.0 * self.ip)
    }

    /// Effective potential -Z_eff/x - x*F; singular at x = 0.
    pub fn effective_potential(&self, f: f64, x: f64) -> Result<f64> {
        if x == 0.0 {
            return Err(Error::Domain("effective potential is singular at x = 0".into()));
        }
        Ok(-self.z_eff / x - x * f)
    }

    /// Geometric apex depth I_p - 2 sqrt(Z_eff F), a diagnostic distinct from delta_z.
    pub fn apex_depth(&self, f: f64) -> Result<f64> {
        self.validate_field(f)?;
        Ok(self.ip - 2.0 * (self.z_eff * f).sqrt())
    }

    /// Barrier geometry at field strength f; valid for 0 < f <= F_a.
    pub fn barrier_geometry(&self, f: f64) -> Result<BarrierGeometry> {
        self.validate_field(f)?;
        let delta_z = self.delta_z(f);
        Ok(BarrierGeometry {
            f,
            f_a: self.atomic_field_strength(),
            delta_z,
            d_b: delta_z / f,
            x_minus: (self.ip - delta_z) / (2.0 * f),
            x_plus: (self.ip + delta_z) / (2.0 * f),
            x_m: (self.z_eff / f).sqrt(),
            d_c: self.ip / f,
        })
    }

    /// Full delay breakdown at field strength f; valid for 0 < f <= F_a.
    pub fn delay_breakdown(&self, f: f64) -> Result<DelayBreakdown> {
        self.validate_field(f)?;
        let delta_z = self.delta_z(f);
        let tau_a = self.tau_a();
        let xi = self.atomic_field_strength() / f;
        // I_p - delta_z cancels catastrophically in the weak-field limit;
        // 4 Z_eff F / (I_p + delta_z) is the same quantity without the
        // cancellation, and at the suppression boundary it is I_p exactly.
        let eps_f = if delta_z == 0.0 {
            self.ip
        } else {
            4.0 * self.z_eff * f / (self.ip + delta_z)
        };
        Ok(DelayBreakdown {
            tau_a,
            tau_dion: tau_a * xi,
            tau_db: 0.5 * delta_z / (4.0 * self.z_eff * f),
            tau_td: 1.0 / (2.0 * eps_f),
            tau_ti: 1.0 / (2.0 * (self.ip + delta_z)),
            xi,
            lambda: delta_z / self.ip,
        })
    }

    /// Barrier time-delay alone, (1/2) delta_z / (4 Z_eff F).
    pub fn barrier_delay(&self, f: f64) -> Result<f64> {
        self.validate_field(f)?;
        Ok(0.5 * self.delta_z(f) / (4.0 * self.z_eff * f))
    }

    /// Thick-barrier ratio tau_db / tau_dion = delta_z / I_p; 1 as F -> 0, 0 at F = F_a.
    pub fn thick_barrier_ratio(&self, f: f64) -> Result<f64> {
        self.validate_field(f)?;
        Ok(self.delta_z(f) / self.ip)
    }

    fn validate_field(&self, f: f64) -> Result<()> {
        if !(f > 0.0) || !f.is_finite() {
            return Err(Error::Domain(format!("field strength must be positive, got {f}")));
        }
        let f_a = self.atomic_field_strength();
        if f > f_a {
            return Err(Error::BarrierSuppressed { f, f_a });
        }
        Ok(())
    }

    /// sqrt(I_p^2 - 4 Z_eff F) with the boundary clamp; caller has validated f.
    fn delta_z(&self, f: f64) -> f64 {
        let scale = self.ip * self.ip;
        let arg = scale - 4.0 * self.z_eff * f;
        if arg.abs() <= DELTA_Z_CLAMP_REL * scale {
            0.0
        } else {
            arg.sqrt()
        }
    }
}
