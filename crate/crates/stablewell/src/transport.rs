//! Probability-density dynamics in the Doob picture: rho = Psi rho*^{1/2},
//! the transport generator L = -rho*^{1/2} H rho*^{-1/2}, explicit stepping
//! with per-step mass renormalization, and the bundled well scenarios
//! (gaussian start, configured snapshot schedules).

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::evolution::{DistanceKind, EvolutionTrace, Snapshot};
use crate::grid::{Field, Grid, NormMode};
use crate::operators::{Driver, Hamiltonian, LinearOp, Potential};
use crate::spectral::{discretize_hamiltonian, lowest_eigenpairs, solve_finite_brownian_ground};

/// Integration cutoff used for every Cauchy scenario.
pub const CAUCHY_CUTOFF: f64 = 50.0;

/// Default lattice resolution for scenario runs.
pub const DEFAULT_PPU: u32 = 40;

/// Division guard: nodes where rho*^{1/2} falls below this fraction of its
/// peak are frozen instead of divided through. The quotient field stays
/// representable well past any physical tail, so the guard only protects
/// against literal underflow to zero.
const DIVISION_FLOOR: f64 = 1e-250;

/// One figure scenario: driver, well depth, step size, gaussian start with
/// truncation, and the snapshot schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub driver: Driver,
    pub v0: f64,
    pub dt: f64,
    pub sigma: f64,
    /// Truncation half-width of the initial gaussian; for Brownian runs it
    /// is also the lattice cutoff.
    pub trunc: f64,
    pub max_steps: usize,
    pub snapshots: Vec<usize>,
}

impl ScenarioConfig {
    /// Parse the line-oriented "key = value" scenario format. All seven
    /// keys are required: driver, v0, dt, sigma, trunc, steps, snapshots.
    pub fn parse(text: &str) -> Result<Self> {
        let mut driver = None;
        let mut v0 = None;
        let mut dt = None;
        let mut sigma = None;
        let mut trunc = None;
        let mut steps = None;
        let mut snapshots: Option<Vec<usize>> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let key = key.trim();
            let value = value.trim();
            let dup = |name: &str| Error::Config(format!("duplicate key {name}"));
            match key {
                "driver" => {
                    if driver.is_some() {
                        return Err(dup(key));
                    }
                    driver = Some(match value {
                        "brownian" => Driver::Brownian,
                        "cauchy" => Driver::Cauchy,
                        other => {
                            return Err(Error::Config(format!(
                                "unknown driver '{other}' (expected brownian or cauchy)"
                            )))
                        }
                    });
                }
                "v0" | "dt" | "sigma" | "trunc" => {
                    let parsed: f64 = value
                        .parse()
                        .map_err(|_| Error::Config(format!("bad number for {key}: '{value}'")))?;
                    let slot = match key {
                        "v0" => &mut v0,
                        "dt" => &mut dt,
                        "sigma" => &mut sigma,
                        _ => &mut trunc,
                    };
                    if slot.is_some() {
                        return Err(dup(key));
                    }
                    *slot = Some(parsed);
                }
                "steps" => {
                    if steps.is_some() {
                        return Err(dup(key));
                    }
                    steps = Some(value.parse().map_err(|_| {
                        Error::Config(format!("bad step count: '{value}'"))
                    })?);
                }
                "snapshots" => {
                    if snapshots.is_some() {
                        return Err(dup(key));
                    }
                    let list: std::result::Result<Vec<usize>, _> = value
                        .split(',')
                        .map(|tok| tok.trim().parse::<usize>())
                        .collect();
                    snapshots = Some(list.map_err(|_| {
                        Error::Config(format!("bad snapshot list: '{value}'"))
                    })?);
                }
                other => return Err(Error::Config(format!("unknown key '{other}'"))),
            }
        }
        let missing = |name: &str| Error::Config(format!("missing key {name}"));
        let cfg = Self {
            driver: driver.ok_or_else(|| missing("driver"))?,
            v0: v0.ok_or_else(|| missing("v0"))?,
            dt: dt.ok_or_else(|| missing("dt"))?,
            sigma: sigma.ok_or_else(|| missing("sigma"))?,
            trunc: trunc.ok_or_else(|| missing("trunc"))?,
            max_steps: steps.ok_or_else(|| missing("steps"))?,
            snapshots: snapshots.ok_or_else(|| missing("snapshots"))?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v0 > 0.0) {
            return Err(Error::Config("v0 must be positive".into()));
        }
        if !(self.dt > 0.0) {
            return Err(Error::Config("dt must be positive".into()));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::Config("sigma must be positive".into()));
        }
        if !(self.trunc >= 1.0) {
            return Err(Error::Config("trunc must cover the well (trunc >= 1)".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::Config("steps must be positive".into()));
        }
        if self.snapshots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("snapshots must increase".into()));
        }
        if let Some(last) = self.snapshots.last() {
            if *last > self.max_steps {
                return Err(Error::Config(format!(
                    "snapshot {last} beyond step count {}",
                    self.max_steps
                )));
            }
        }
        Ok(())
    }

    /// Canonical serialization in the same "key = value" format.
    pub fn to_text(&self) -> String {
        let snaps: Vec<String> = self.snapshots.iter().map(|s| s.to_string()).collect();
        format!(
            "driver = {}\nv0 = {}\ndt = {}\nsigma = {}\ntrunc = {}\nsteps = {}\nsnapshots = {}\n",
            self.driver,
            self.v0,
            self.dt,
            self.sigma,
            self.trunc,
            self.max_steps,
            snaps.join(", ")
        )
    }

    /// Lattice for this scenario: Brownian runs live on [-trunc, trunc],
    /// Cauchy runs on the fixed [-50, 50] integration cutoff.
    pub fn grid(&self) -> Result<Grid> {
        match self.driver {
            Driver::Brownian => Grid::build(self.trunc, DEFAULT_PPU),
            Driver::Cauchy => Grid::build(CAUCHY_CUTOFF, DEFAULT_PPU),
        }
    }
}

/// rho = Psi rho*^{1/2}, L1-normalized: the Doob substitution returning a
/// probability density from a semigroup state.
pub fn doob_pdf(psi: &Field, rho_sqrt: &Field) -> Result<Field> {
    psi.same_grid(rho_sqrt)?;
    let values = psi
        .values()
        .iter()
        .zip(rho_sqrt.values())
        .map(|(a, b)| a * b)
        .collect();
    Field::from_values(psi.grid(), values)?.normalized(NormMode::L1)
}

/// Diagnostics of the negative-excursion clipping in a transport run.
#[derive(Debug, Clone, Copy, Default)]
pub struct ClipStats {
    pub nodes: usize,
    pub mass: f64,
    /// worst clipped mass in any single step
    pub max_step_mass: f64,
}

impl ClipStats {
    fn absorb(&mut self, other: &ClipStats) {
        self.nodes += other.nodes;
        self.mass += other.mass;
        self.max_step_mass = self.max_step_mass.max(other.max_step_mass);
    }
}

/// One explicit transport step rho <- normalize_L1(rho + dt L rho) with
/// L rho = -rho*^{1/2} H (rho / rho*^{1/2}). Nodes where rho*^{1/2} is
/// below the division floor are frozen and swept up by the
/// renormalization; negative excursions are clipped to zero and counted.
pub fn transport_step(
    rho: &Field,
    rho_sqrt: &Field,
    hamiltonian: &dyn LinearOp,
    dt: f64,
) -> Result<(Field, ClipStats)> {
    rho.same_grid(rho_sqrt)?;
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt = {dt} must be positive")));
    }
    let grid = rho.grid();
    let rs = rho_sqrt.values();
    let peak = rs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Err(Error::DegenerateField("L2"));
    }
    let floor = DIVISION_FLOOR * peak;
    let active: Vec<bool> = rs.iter().map(|v| *v >= floor).collect();
    let quotient: Vec<f64> = rho
        .values()
        .iter()
        .zip(rs)
        .zip(&active)
        .map(|((r, s), a)| if *a { r / s } else { 0.0 })
        .collect();
    let hq = hamiltonian.apply(&Field::from_values(grid, quotient)?)?;
    let mut next: Vec<f64> = rho
        .values()
        .iter()
        .zip(hq.values())
        .zip(rs)
        .zip(&active)
        .map(|(((r, h), s), a)| if *a { r - dt * s * h } else { *r })
        .collect();
    let mut clip = ClipStats::default();
    for (i, v) in next.iter_mut().enumerate() {
        if *v < 0.0 {
            clip.nodes += 1;
            clip.mass += grid.weight(i) * v.abs();
            *v = 0.0;
        }
    }
    clip.max_step_mass = clip.mass;
    let stepped = Field::from_values(grid, next)?.normalized(NormMode::L1)?;
    Ok((stepped, clip))
}

/// Truncated gaussian initial density: exp(-x^2 / 2 sigma^2) cut to
/// |x| <= trunc, then L1-renormalized.
pub fn initial_gaussian(grid: Grid, sigma: f64, trunc: f64) -> Result<Field> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument(format!("sigma = {sigma} must be positive")));
    }
    if trunc > grid.a() {
        return Err(Error::InvalidArgument(format!(
            "truncation half-width {trunc} exceeds the grid cutoff {}",
            grid.a()
        )));
    }
    let norm = sigma * (2.0 * PI).sqrt();
    Field::from_fn(grid, |x| {
        if x.abs() <= trunc {
            (-x * x / (2.0 * sigma * sigma)).exp() / norm
        } else {
            0.0
        }
    })?
    .normalized(NormMode::L1)
}

/// A finished scenario: the stationary state it relaxes to, the recorded
/// trace, and run diagnostics.
pub struct ScenarioRun {
    pub config: ScenarioConfig,
    pub grid: Grid,
    /// discrete (Cauchy) or closed-form (Brownian) ground state rho*^{1/2}
    pub rho_star_sqrt: Field,
    /// L1-normalized equilibrium density rho*
    pub rho_star: Field,
    pub e1: f64,
    pub trace: EvolutionTrace,
    pub clip: ClipStats,
    /// set when dt exceeds the explicit-stepping stability estimate
    pub stability_warning: bool,
}

impl ScenarioRun {
    pub fn final_l1_distance(&self) -> f64 {
        self.trace
            .reference_distance
            .as_ref()
            .map(|(_, d)| *d.last().unwrap())
            .expect("scenario traces carry distances")
    }
}

/// Run a scenario on its default lattice.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioRun> {
    let grid = config.grid()?;
    run_scenario_on(config, grid)
}

/// Run a scenario on an explicit lattice (reduced resolutions for tests).
pub fn run_scenario_on(config: &ScenarioConfig, grid: Grid) -> Result<ScenarioRun> {
    config.validate()?;
    let potential = Potential::finite_well(config.v0)?;
    let (rho_star_sqrt, e1) = match config.driver {
        Driver::Brownian => {
            let ground = solve_finite_brownian_ground(config.v0)?;
            (ground.as_field(grid)?, ground.e1)
        }
        Driver::Cauchy => {
            let matrix = discretize_hamiltonian(Driver::Cauchy, potential, grid)?;
            let set = lowest_eigenpairs(&matrix, 1)?;
            let pair = &set.pairs[0];
            (pair.eigenfunction.clone(), pair.eigenvalue)
        }
    };
    let rho_star = Field::from_values(
        grid,
        rho_star_sqrt.values().iter().map(|v| v * v).collect(),
    )?
    .normalized(NormMode::L1)?;
    let hamiltonian = Hamiltonian::shifted(config.driver, potential, e1);

    // explicit-step stability estimate including the potential step height
    let kinetic_max = match config.driver {
        Driver::Brownian => 4.0 / (grid.h() * grid.h()),
        Driver::Cauchy => 1.7 / grid.h(),
    };
    let stability_warning = config.dt > 2.0 / (kinetic_max + config.v0 - e1);

    let mut rho = initial_gaussian(grid, config.sigma, config.trunc)?;
    let mut snapshots = vec![Snapshot {
        step: 0,
        time: 0.0,
        field: rho.clone(),
    }];
    let mut distances = vec![rho.l1_distance(&rho_star)?];
    let mut clip = ClipStats::default();
    let mut want = config.snapshots.iter().copied().peekable();
    for step in 1..=config.max_steps {
        let (next, step_clip) = transport_step(&rho, &rho_star_sqrt, &hamiltonian, config.dt)?;
        clip.absorb(&step_clip);
        rho = next;
        let mut record = step == config.max_steps;
        if want.peek() == Some(&step) {
            want.next();
            record = true;
        }
        if record && snapshots.last().map(|s| s.step) != Some(step) {
            snapshots.push(Snapshot {
                step,
                time: step as f64 * config.dt,
                field: rho.clone(),
            });
            distances.push(rho.l1_distance(&rho_star)?);
        }
    }
    let steps_taken = config.max_steps;
    let last_delta = *distances.last().unwrap();
    Ok(ScenarioRun {
        config: config.clone(),
        grid,
        rho_star_sqrt,
        rho_star,
        e1,
        trace: EvolutionTrace {
            dt: config.dt,
            snapshots,
            reference_distance: Some((DistanceKind::L1, distances)),
            converged: true,
            steps_taken,
            last_delta,
        },
        clip,
        stability_warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::euler_step;
    use crate::spectral::brownian_infinite_basis;

    fn small_brownian_cfg() -> ScenarioConfig {
        ScenarioConfig {
            driver: Driver::Brownian,
            v0: 20.0,
            dt: 1e-5,
            sigma: 2.0,
            trunc: 10.0,
            max_steps: 4000,
            snapshots: vec![500, 1000, 2000, 4000],
        }
    }

    #[test]
    fn config_parses_and_round_trips() {
        let text = "# fig sample\ndriver = cauchy\nv0 = 20\ndt = 1e-3\nsigma = 2\ntrunc = 50\nsteps = 2500\nsnapshots = 10, 50, 100, 200, 400, 600, 2500\n";
        let cfg = ScenarioConfig::parse(text).unwrap();
        assert_eq!(cfg.driver, Driver::Cauchy);
        assert_eq!(cfg.snapshots.len(), 7);
        let again = ScenarioConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn config_rejects_bad_input() {
        assert!(ScenarioConfig::parse("driver = brownian\n").is_err());
        let mut cfg = small_brownian_cfg();
        cfg.snapshots = vec![100, 50];
        assert!(cfg.validate().is_err());
        cfg = small_brownian_cfg();
        cfg.snapshots = vec![100, 99999];
        assert!(cfg.validate().is_err());
        assert!(ScenarioConfig::parse("driver = levy\n").is_err());
        assert!(ScenarioConfig::parse(
            "driver = brownian\ndriver = cauchy\n"
        )
        .is_err());
    }

    #[test]
    fn doob_equilibrium_density() {
        let grid = Grid::build(2.0, 100).unwrap();
        let rs = brownian_infinite_basis(1, grid).unwrap().eigenfunction;
        let rho = doob_pdf(&rs, &rs).unwrap();
        assert!((rho.integrate() - 1.0).abs() < 1e-12);
        // rho = rho* = normalized rs^2
        let rho_star = Field::from_values(
            grid,
            rs.values().iter().map(|v| v * v).collect(),
        )
        .unwrap()
        .normalized(NormMode::L1)
        .unwrap();
        assert!(rho.sup_distance(&rho_star).unwrap() < 1e-12);
    }

    #[test]
    fn doob_preserves_positivity_and_mass() {
        let grid = Grid::build(2.0, 50).unwrap();
        let psi = Field::from_fn(grid, |x| (-(x * x)).exp()).unwrap();
        let rs = Field::from_fn(grid, |x| (-(x * x) / 2.0).exp()).unwrap();
        let rho = doob_pdf(&psi, &rs).unwrap();
        assert!(rho.values().iter().all(|v| *v >= 0.0));
        assert!((rho.integrate() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn equilibrium_is_stationary() {
        // with the discrete ground pair, rho* is a fixed point of the step
        let grid = Grid::build(1.0, 50).unwrap();
        let matrix =
            discretize_hamiltonian(Driver::Cauchy, Potential::infinite_well(), grid).unwrap();
        let pair = &lowest_eigenpairs(&matrix, 1).unwrap().pairs[0];
        let ham = Hamiltonian::shifted(
            Driver::Cauchy,
            Potential::infinite_well(),
            pair.eigenvalue,
        );
        let rho_star = Field::from_values(
            grid,
            pair.eigenfunction.values().iter().map(|v| v * v).collect(),
        )
        .unwrap()
        .normalized(NormMode::L1)
        .unwrap();
        let (next, clip) =
            transport_step(&rho_star, &pair.eigenfunction, &ham, 1e-3).unwrap();
        assert_eq!(clip.nodes, 0);
        let drift = next.sup_distance(&rho_star).unwrap();
        assert!(drift < 1e-10, "drift {drift}");
    }

    #[test]
    fn steps_conserve_mass() {
        let cfg = small_brownian_cfg();
        let grid = Grid::build(cfg.trunc, 20).unwrap();
        let run = run_scenario_on(&cfg, grid).unwrap();
        for snap in &run.trace.snapshots {
            assert!((snap.field.integrate() - 1.0).abs() < 1e-10);
            assert!(snap.field.values().iter().all(|v| *v >= 0.0));
        }
        assert!(!run.stability_warning);
    }

    #[test]
    fn distance_to_equilibrium_decays_monotonically() {
        let cfg = small_brownian_cfg();
        let grid = Grid::build(cfg.trunc, 20).unwrap();
        let run = run_scenario_on(&cfg, grid).unwrap();
        let (_, d) = run.trace.reference_distance.as_ref().unwrap();
        for w in d.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "distances not monotone: {w:?}");
        }
    }

    #[test]
    fn semigroup_and_transport_pictures_agree() {
        // evolve Psi with Euler + per-step L2 normalization, map through the
        // Doob substitution, and compare with direct transport stepping
        for driver in [Driver::Brownian, Driver::Cauchy] {
            let grid = Grid::build(5.0, 40).unwrap();
            let pot = Potential::finite_well(20.0).unwrap();
            let (rs, e1) = match driver {
                Driver::Brownian => {
                    let fg = solve_finite_brownian_ground(20.0).unwrap();
                    (fg.as_field(grid).unwrap(), fg.e1)
                }
                Driver::Cauchy => {
                    let m = discretize_hamiltonian(Driver::Cauchy, pot, grid).unwrap();
                    let set = lowest_eigenpairs(&m, 1).unwrap();
                    (set.pairs[0].eigenfunction.clone(), set.pairs[0].eigenvalue)
                }
            };
            let ham = Hamiltonian::shifted(driver, pot, e1);
            let (dt, steps) = match driver {
                Driver::Brownian => (1e-5, 2000),
                Driver::Cauchy => (1e-3, 100),
            };
            let rho0 = initial_gaussian(grid, 2.0, grid.a()).unwrap();
            let psi0 = Field::from_values(
                grid,
                rho0.values()
                    .iter()
                    .zip(rs.values())
                    .map(|(r, s)| r / s)
                    .collect(),
            )
            .unwrap();
            let mut psi = psi0.normalized(NormMode::L2).unwrap();
            let mut rho = rho0.clone();
            for _ in 0..steps {
                psi = euler_step(&psi, &ham, dt)
                    .unwrap()
                    .normalized(NormMode::L2)
                    .unwrap();
                let (next, _) = transport_step(&rho, &rs, &ham, dt).unwrap();
                rho = next;
            }
            let via_doob = doob_pdf(&psi, &rs).unwrap();
            let sup = via_doob.sup_distance(&rho).unwrap();
            assert!(sup < 1e-3, "{driver}: pictures disagree by {sup}");
        }
    }

    #[test]
    fn gaussian_truncation_and_mass() {
        let grid = Grid::build(10.0, 40).unwrap();
        let rho = initial_gaussian(grid, 2.0, 5.0).unwrap();
        assert!((rho.integrate() - 1.0).abs() < 1e-12);
        for (i, x) in grid.nodes().enumerate() {
            if x.abs() > 5.0 {
                assert_eq!(rho.values()[i], 0.0);
            }
        }
        assert!(initial_gaussian(grid, 2.0, 11.0).is_err());
    }
}
