//! Semigroup kernel of the infinite Brownian well and the Doob-transformed
//! transition density built on it.
//!
//! With H renormalized so the ground state sits at eigenvalue zero,
//!
//!   k(t,x,y) = sum_n exp[(1 - n^2) pi^2 t / 4] sin(n pi (x+1)/2) sin(n pi (y+1)/2)
//!
//! propagates semigroup states in the well, and
//! p(t,x,y) = k(t,x,y) rho*^{1/2}(x) / rho*^{1/2}(y) is the probability-
//! conserving transition density of the trapped diffusion.

use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};

/// Ground-state profile of the infinite Brownian well, cos(pi x / 2).
pub fn ground_profile(x: f64) -> f64 {
    if x.abs() < 1.0 {
        (PI * x / 2.0).cos()
    } else {
        0.0
    }
}

/// Truncated spectral evaluator of the well kernel. The truncation is
/// driven by the first omitted coefficient: n_terms grows until
/// exp[(1 - (N+1)^2) pi^2 t / 4] < 1e-14, so short times get more terms
/// automatically.
#[derive(Debug, Clone, Copy)]
pub struct KernelEvaluator {
    t: f64,
    n_terms: usize,
}

const TAIL_BOUND: f64 = 1e-14;

impl KernelEvaluator {
    pub fn new(t: f64, n_terms: usize) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::InvalidArgument(format!("time t = {t} must be positive")));
        }
        // smallest N with (N+1)^2 > 1 + 4 ln(1/bound) / (pi^2 t)
        let needed = (1.0 + 4.0 * (1.0 / TAIL_BOUND).ln() / (PI * PI * t)).sqrt() - 1.0;
        let auto = needed.ceil().max(1.0) as usize;
        Ok(Self {
            t,
            n_terms: n_terms.max(auto),
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    /// k(t, x, y), zero whenever either argument leaves [-1, 1].
    pub fn evaluate(&self, x: f64, y: f64) -> f64 {
        if x.abs() > 1.0 || y.abs() > 1.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for n in 1..=self.n_terms {
            let nf = n as f64;
            let coeff = ((1.0 - nf * nf) * PI * PI * self.t / 4.0).exp();
            acc += coeff * (nf * PI * (x + 1.0) / 2.0).sin() * (nf * PI * (y + 1.0) / 2.0).sin();
        }
        acc
    }

    /// Doob-transformed transition density p(t, x, y) with the closed-form
    /// ground state; y must be interior so the denominator is positive.
    pub fn transition_density(&self, x: f64, y: f64) -> Result<f64> {
        self.transition_density_with(x, y, ground_profile)
    }

    /// Same with a caller-supplied rho*^{1/2} profile.
    pub fn transition_density_with(
        &self,
        x: f64,
        y: f64,
        rho_sqrt: impl Fn(f64) -> f64,
    ) -> Result<f64> {
        let denom = rho_sqrt(y);
        if !(denom > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "transition density needs an interior start point; rho*^(1/2)({y}) = {denom}"
            )));
        }
        Ok(self.evaluate(x, y) * rho_sqrt(x) / denom)
    }

    /// Three-column CSV "x,y,value" of k (or p) on a uniform mesh of
    /// `mesh` points per axis over [-1, 1].
    pub fn write_mesh_csv<W: Write>(
        &self,
        mut w: W,
        mesh: usize,
        density: bool,
    ) -> Result<()> {
        if mesh < 2 {
            return Err(Error::InvalidArgument("mesh needs at least 2 points".into()));
        }
        let node = |i: usize| -1.0 + 2.0 * i as f64 / (mesh - 1) as f64;
        writeln!(&mut w, "x,y,value").map_err(|e| Error::Config(e.to_string()))?;
        for iy in 0..mesh {
            let y = node(iy);
            if density && y.abs() >= 1.0 {
                continue; // the Doob denominator vanishes at the boundary
            }
            for ix in 0..mesh {
                let x = node(ix);
                let v = if density {
                    self.transition_density(x, y)?
                } else {
                    self.evaluate(x, y)
                };
                writeln!(&mut w, "{x:.16e},{y:.16e},{v:.16e}")
                    .map_err(|e| Error::Config(e.to_string()))?;
            }
        }
        Ok(())
    }
}

/// One-shot evaluation of the well kernel.
pub fn well_kernel(t: f64, x: f64, y: f64, n_terms: usize) -> Result<f64> {
    Ok(KernelEvaluator::new(t, n_terms)?.evaluate(x, y))
}
