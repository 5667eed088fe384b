//! Semigroup propagation exp(-Ht): explicit Euler stepping best suited to
//! the transport picture, and Strang splitting with exact kernel
//! convolution for the kinetic factor, which is unconditionally stable and
//! drives the imaginary-time relaxation to the ground state.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, NormMode};
use crate::operators::{Driver, LinearOp, Potential};

/// One recorded state of an evolution.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    pub field: Field,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceKind {
    L1,
    L2,
}

/// Time-ordered snapshots of a stepping run, with optional per-snapshot
/// distances to a reference field.
#[derive(Debug, Clone)]
pub struct EvolutionTrace {
    pub dt: f64,
    pub snapshots: Vec<Snapshot>,
    pub reference_distance: Option<(DistanceKind, Vec<f64>)>,
    pub converged: bool,
    pub steps_taken: usize,
    pub last_delta: f64,
}

impl EvolutionTrace {
    pub fn final_field(&self) -> &Field {
        &self.snapshots.last().expect("trace has snapshots").field
    }
}

/// Explicit Euler step psi <- psi - dt H psi. No normalization; callers
/// compose. Check [`euler_stability_bound`] before driving long runs.
pub fn euler_step(psi: &Field, hamiltonian: &dyn LinearOp, dt: f64) -> Result<Field> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt = {dt} must be positive")));
    }
    let hpsi = hamiltonian.apply(psi)?;
    let values = psi
        .values()
        .iter()
        .zip(hpsi.values())
        .map(|(p, hp)| p - dt * hp)
        .collect();
    Field::from_values(psi.grid(), values)
}

/// Largest explicit time step that keeps Euler stepping stable: h^2/4 for
/// the Brownian generator, h/4 for the Cauchy one.
pub fn euler_stability_bound(driver: Driver, grid: Grid) -> f64 {
    let h = grid.h();
    match driver {
        Driver::Brownian => 0.25 * h * h,
        Driver::Cauchy => 0.25 * h,
    }
}

/// Antiderivatives of the kinetic kernel: Phi(z) = int K, Psi1(z) = int z K.
fn kernel_antiderivatives(driver: Driver, dt: f64, z: f64) -> (f64, f64) {
    match driver {
        Driver::Brownian => {
            // heat kernel (4 pi dt)^{-1/2} exp(-z^2/4dt)
            let s = 2.0 * dt.sqrt();
            let phi = 0.5 * libm::erf(z / s);
            let k = (-z * z / (4.0 * dt)).exp() / (4.0 * std::f64::consts::PI * dt).sqrt();
            (phi, -2.0 * dt * k)
        }
        Driver::Cauchy => {
            // Poisson kernel (1/pi) dt / (z^2 + dt^2)
            let phi = (z / dt).atan() / std::f64::consts::PI;
            let psi1 = dt / (2.0 * std::f64::consts::PI) * (z * z + dt * dt).ln();
            (phi, psi1)
        }
    }
}

/// Convolution weights c_m such that (K_dt f)(x_i) = sum_j c_{|i-j|} f_j
/// when f is the piecewise-linear interpolant of the node values with zero
/// extension outside the grid. Exact in dt, second order in h, and valid
/// for kernels much narrower than a cell.
pub(crate) fn kinetic_weights(driver: Driver, grid: Grid, dt: f64) -> Vec<f64> {
    let n = grid.len();
    let h = grid.h();
    let mut c = vec![0.0; n];
    for (m, cm) in c.iter_mut().enumerate() {
        let mf = m as f64;
        let (phi_hi, psi_hi) = kernel_antiderivatives(driver, dt, (mf + 1.0) * h);
        let (phi_mid, psi_mid) = kernel_antiderivatives(driver, dt, mf * h);
        let (phi_lo, psi_lo) = kernel_antiderivatives(driver, dt, (mf - 1.0) * h);
        let v = (mf + 1.0) * (phi_hi - phi_mid) - (psi_hi - psi_mid) / h
            + (1.0 - mf) * (phi_mid - phi_lo)
            + (psi_mid - psi_lo) / h;
        // kernels are positive and hats nonnegative; clamp rounding noise
        *cm = v.max(0.0);
    }
    c
}

/// Precomputed Strang propagator e^{-V dt/2} K_dt e^{-V dt/2} for one grid,
/// driver, potential and time step.
pub struct StrangPropagator {
    grid: Grid,
    dt: f64,
    weights: Vec<f64>,
    half_potential: Vec<f64>,
}

impl StrangPropagator {
    pub fn new(grid: Grid, driver: Driver, potential: Potential, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt = {dt} must be positive")));
        }
        let half_potential = grid
            .nodes()
            .map(|x| match potential {
                Potential::FiniteWell { v0 } => {
                    if x.abs() < 1.0 {
                        1.0
                    } else {
                        (-0.5 * v0 * dt).exp()
                    }
                }
                // the infinite well's potential factor is the interval mask
                Potential::InfiniteWell => {
                    if x.abs() < 1.0 {
                        1.0
                    } else {
                        0.0
                    }
                }
            })
            .collect();
        Ok(Self {
            grid,
            dt,
            weights: kinetic_weights(driver, grid, dt),
            half_potential,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step(&self, psi: &Field) -> Result<Field> {
        if psi.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        let n = self.grid.len();
        let staged: Vec<f64> = psi
            .values()
            .iter()
            .zip(&self.half_potential)
            .map(|(v, p)| v * p)
            .collect();
        let mut out = vec![0.0; n];
        out.par_iter_mut().enumerate().for_each(|(i, o)| {
            let mut acc = 0.0;
            for (j, s) in staged.iter().enumerate() {
                acc += self.weights[usize::abs_diff(i, j)] * s;
            }
            *o = acc * self.half_potential[i];
        });
        let f = Field::from_values(self.grid, out)?;
        f.check_finite("Strang step")?;
        Ok(f)
    }
}

/// One Strang step without keeping the propagator around.
pub fn strang_step(psi: &Field, driver: Driver, potential: Potential, dt: f64) -> Result<Field> {
    StrangPropagator::new(psi.grid(), driver, potential, dt)?.step(psi)
}

/// Options for [`relax`].
#[derive(Debug, Clone, Copy)]
pub struct RelaxOptions {
    pub dt: f64,
    pub max_steps: usize,
    pub tol: f64,
    /// Record every k-th iterate; 0 picks a cadence of about 100 snapshots.
    pub snapshot_every: usize,
}

impl RelaxOptions {
    pub fn new(dt: f64, max_steps: usize, tol: f64) -> Self {
        Self {
            dt,
            max_steps,
            tol,
            snapshot_every: 0,
        }
    }
}

/// Renormalized semigroup relaxation: iterate the Strang propagator with
/// per-step L2 normalization until successive iterates differ by less than
/// `tol`, approximating the ground state rho*^{1/2} without knowing E1.
///
/// The start must overlap the (positive) ground state: nonnegative
/// somewhere and not identically zero.
pub fn relax(
    psi0: &Field,
    driver: Driver,
    potential: Potential,
    opts: RelaxOptions,
    reference: Option<&Field>,
) -> Result<EvolutionTrace> {
    let peak = psi0.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(peak > 0.0) {
        return Err(Error::InvalidArgument(
            "relaxation start has no positive part; it cannot overlap the ground state".into(),
        ));
    }
    let prop = StrangPropagator::new(psi0.grid(), driver, potential, opts.dt)?;
    let every = if opts.snapshot_every == 0 {
        (opts.max_steps / 100).max(1)
    } else {
        opts.snapshot_every
    };
    let mut psi = match potential {
        // make the start admissible for the restricted generator
        Potential::InfiniteWell => potential.mask(psi0).normalized(NormMode::L2)?,
        _ => psi0.normalized(NormMode::L2)?,
    };
    let mut snapshots = vec![Snapshot {
        step: 0,
        time: 0.0,
        field: psi.clone(),
    }];
    let mut distances = reference
        .map(|r| -> Result<Vec<f64>> { Ok(vec![psi.l2_distance(r)?]) })
        .transpose()?;
    let mut last_delta = f64::INFINITY;
    for k in 1..=opts.max_steps {
        let next = prop.step(&psi)?.normalized(NormMode::L2)?;
        last_delta = next.l2_distance(&psi)?;
        psi = next;
        let converged = last_delta < opts.tol;
        if k % every == 0 || converged || k == opts.max_steps {
            snapshots.push(Snapshot {
                step: k,
                time: k as f64 * opts.dt,
                field: psi.clone(),
            });
            if let (Some(d), Some(r)) = (distances.as_mut(), reference) {
                d.push(psi.l2_distance(r)?);
            }
        }
        if converged {
            return Ok(EvolutionTrace {
                dt: opts.dt,
                snapshots,
                reference_distance: distances.map(|d| (DistanceKind::L2, d)),
                converged: true,
                steps_taken: k,
                last_delta,
            });
        }
    }
    Err(Error::NoConvergence {
        steps: opts.max_steps,
        last_delta,
        tol: opts.tol,
    })
}
