//! Two-site reduced density matrix of the ground state, assembled from
//! `G_r` through the magnetization and the Toeplitz-determinant correlators.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corr::{GSeries, Method, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Tolerance on trace and positivity before a state is rejected.
pub const POSITIVITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlators {
    pub mag_z: f64,
    pub xx: f64,
    pub yy: f64,
    pub zz: f64,
    pub distance: usize,
}

impl Correlators {
    /// The same correlators after a global π rotation about x (σz → -σz).
    pub fn spin_flipped(self) -> Self {
        Self { mag_z: -self.mag_z, ..self }
    }

    /// Largest absolute difference over the four correlators.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        [
            self.mag_z - other.mag_z,
            self.xx - other.xx,
            self.yy - other.yy,
            self.zz - other.zz,
        ]
        .iter()
        .fold(0.0, |m, d| m.max(d.abs()))
    }
}

fn toeplitz_det(g: &GSeries, r: usize, shift: i64) -> f64 {
    let m = DMatrix::from_fn(r, r, |i, j| g.get(i as i64 - j as i64 + shift));
    m.determinant()
}

pub fn correlators(g: &GSeries, r: usize) -> Result<Correlators> {
    if r == 0 {
        return Err(Error::Config("two-site distance must be positive".into()));
    }
    if r > g.r_max {
        return Err(Error::Range { requested: r, available: g.r_max });
    }
    let mag_z = g.get(0);
    let ri = r as i64;
    Ok(Correlators {
        mag_z,
        xx: toeplitz_det(g, r, -1),
        yy: toeplitz_det(g, r, 1),
        zz: mag_z * mag_z - g.get(ri) * g.get(-ri),
        distance: r,
    })
}

/// The X-shaped state
///
/// ```text
/// ( u+  0   0   y- )
/// ( 0   z   y+  0  )
/// ( 0   y+  z   0  )
/// ( y-  0   0   u- )
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoSiteState {
    pub u_plus: f64,
    pub u_minus: f64,
    pub z_diag: f64,
    pub y_plus: f64,
    pub y_minus: f64,
    pub distance: usize,
}

impl TwoSiteState {
    pub fn from_correlators(c: &Correlators) -> Self {
        Self {
            u_plus: (1.0 + 2.0 * c.mag_z + c.zz) / 4.0,
            u_minus: (1.0 - 2.0 * c.mag_z + c.zz) / 4.0,
            z_diag: (1.0 - c.zz) / 4.0,
            y_plus: (c.xx + c.yy) / 4.0,
            y_minus: (c.xx - c.yy) / 4.0,
            distance: c.distance,
        }
    }

    pub fn correlators(&self) -> Correlators {
        Correlators {
            mag_z: self.mag_z(),
            xx: self.xx(),
            yy: self.yy(),
            zz: self.zz(),
            distance: self.distance,
        }
    }

    pub fn mag_z(&self) -> f64 {
        self.u_plus - self.u_minus
    }

    pub fn xx(&self) -> f64 {
        2.0 * (self.y_plus + self.y_minus)
    }

    pub fn yy(&self) -> f64 {
        2.0 * (self.y_plus - self.y_minus)
    }

    pub fn zz(&self) -> f64 {
        self.u_plus + self.u_minus - 2.0 * self.z_diag
    }

    pub fn trace(&self) -> f64 {
        self.u_plus + self.u_minus + 2.0 * self.z_diag
    }

    /// Exchanges `u+` and `u-`.
    pub fn spin_flipped(self) -> Self {
        Self { u_plus: self.u_minus, u_minus: self.u_plus, ..self }
    }

    /// Dense matrix in the basis `|00⟩, |01⟩, |10⟩, |11⟩`.
    pub fn matrix(&self) -> [[f64; 4]; 4] {
        let (a, b, z, p, m) = (self.u_plus, self.u_minus, self.z_diag, self.y_plus, self.y_minus);
        [[a, 0.0, 0.0, m], [0.0, z, p, 0.0], [0.0, p, z, 0.0], [m, 0.0, 0.0, b]]
    }

    /// Spectrum `{z ± y+, (u+ + u-)/2 ± sqrt((u+ - u-)²/4 + y-²)}`.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let mean = 0.5 * (self.u_plus + self.u_minus);
        let half = (0.25 * (self.u_plus - self.u_minus).powi(2) + self.y_minus.powi(2)).sqrt();
        [
            self.z_diag + self.y_plus,
            self.z_diag - self.y_plus,
            mean + half,
            mean - half,
        ]
    }

    /// Largest violation of the trace and positivity constraints.
    pub fn violation(&self) -> f64 {
        [
            (self.trace() - 1.0).abs(),
            -self.u_plus,
            -self.u_minus,
            -self.z_diag,
            self.y_minus.powi(2) - self.u_plus * self.u_minus,
            self.y_plus.powi(2) - self.z_diag.powi(2),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let v = self.violation();
        if v > tol || !v.is_finite() {
            return Err(Error::Consistency(format!(
                "two-site state at r = {} violates trace/positivity by {v:.3e}",
                self.distance
            )));
        }
        Ok(())
    }
}

/// State at distance `r` from an already-built series.
pub fn state_from_series(g: &GSeries, r: usize) -> Result<TwoSiteState> {
    let s = TwoSiteState::from_correlators(&correlators(g, r)?);
    s.validate(POSITIVITY_TOL)?;
    Ok(s)
}

pub fn reduced_state(params: &ModelParams, r: usize, method: Method) -> Result<TwoSiteState> {
    let g = GSeries::build(params, r, method, DEFAULT_TOL)?;
    state_from_series(&g, r)
}

/// States for `r = 1..=r_max` sharing one `G` series.
pub fn reduced_states(params: &ModelParams, r_max: usize, method: Method, tol: f64) -> Result<Vec<TwoSiteState>> {
    let g = GSeries::build(params, r_max, method, tol)?;
    (1..=r_max).into_par_iter().map(|r| state_from_series(&g, r)).collect()
}
