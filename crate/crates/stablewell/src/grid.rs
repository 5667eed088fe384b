//! Uniform symmetric lattice on [-a, a] and the sampled fields living on it.
//!
//! The whole artifact works on one grid family: spacing h = 1/points_per_unit,
//! an odd number of nodes, and the well boundary +-1 (as well as 0 and +-a)
//! falling exactly on nodes. Nodes are generated as (i - a*ppu)/ppu so that
//! symmetry x_i = -x_{n-1-i} and the special points are exact in floating
//! point, not merely up to rounding.

use std::fmt;
use std::io::Write;

use crate::error::{Error, Result};

/// Default cap on the node count accepted by [`Grid::build`].
pub const DEFAULT_MAX_POINTS: usize = 1_000_000;

/// Uniform grid over [-a, a] with h = 1/ppu and n = 2 a ppu + 1 nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    a: f64,
    ppu: u32,
    n: usize,
    h: f64,
}

impl Grid {
    /// Build a grid with cutoff half-width `a` and `points_per_unit` nodes
    /// per unit length. `a` must be a whole number >= 1 so that the well
    /// boundary +-1 and the cutoff +-a sit exactly on nodes.
    pub fn build(a: f64, points_per_unit: u32) -> Result<Self> {
        Self::build_with_limit(a, points_per_unit, DEFAULT_MAX_POINTS)
    }

    pub fn build_with_limit(a: f64, points_per_unit: u32, max_points: usize) -> Result<Self> {
        if !(a >= 1.0) {
            return Err(Error::InvalidArgument(format!("cutoff a = {a} must be >= 1")));
        }
        if points_per_unit < 2 {
            return Err(Error::InvalidArgument(format!(
                "points_per_unit = {points_per_unit} must be >= 2"
            )));
        }
        let m = a * points_per_unit as f64;
        if a.fract() != 0.0 || m.fract() != 0.0 || a > (1u64 << 40) as f64 {
            return Err(Error::GridAlignment {
                a,
                ppu: points_per_unit,
            });
        }
        let half = m as usize;
        let n = 2 * half + 1;
        if n > max_points {
            return Err(Error::GridTooLarge { n, max: max_points });
        }
        Ok(Self {
            a,
            ppu: points_per_unit,
            n,
            h: 1.0 / points_per_unit as f64,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points_per_unit(&self) -> u32 {
        self.ppu
    }

    /// i-th node; exact for the symmetric lattice.
    pub fn node(&self, i: usize) -> f64 {
        let half = (self.n - 1) / 2;
        (i as f64 - half as f64) / self.ppu as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.node(i))
    }

    /// Index of x = 0.
    pub fn center_index(&self) -> usize {
        (self.n - 1) / 2
    }

    /// Indices of the well boundary nodes x = -1 and x = +1.
    pub fn unit_indices(&self) -> (usize, usize) {
        let c = self.center_index();
        (c - self.ppu as usize, c + self.ppu as usize)
    }

    /// Trapezoid quadrature weight of node i.
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.n - 1 {
            0.5 * self.h
        } else {
            self.h
        }
    }
}

/// Declared normalization of a [`Field`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormMode {
    L1,
    L2,
    None,
}

impl fmt::Display for NormMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormMode::L1 => write!(f, "L1"),
            NormMode::L2 => write!(f, "L2"),
            NormMode::None => write!(f, "none"),
        }
    }
}

/// Real-valued samples on a [`Grid`]: wavefunctions, densities, potentials.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
    norm_mode: NormMode,
}

impl Field {
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        let f = Self {
            grid,
            values,
            norm_mode: NormMode::None,
        };
        f.check_finite("Field::from_values")?;
        Ok(f)
    }

    /// Sample a function on the grid nodes.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().map(f).collect();
        Self::from_values(grid, values)
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
            norm_mode: NormMode::None,
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        self.norm_mode = NormMode::None;
        &mut self.values
    }

    pub fn norm_mode(&self) -> NormMode {
        self.norm_mode
    }

    pub(crate) fn check_finite(&self, what: &'static str) -> Result<()> {
        if self.values.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite(what))
        }
    }

    pub(crate) fn same_grid(&self, other: &Field) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Composite trapezoid integral over [-a, a].
    pub fn integrate(&self) -> f64 {
        integrate(self)
    }

    /// Trapezoid L1 norm, integral of |f|.
    pub fn l1_norm(&self) -> f64 {
        let g = &self.grid;
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| g.weight(i) * v.abs())
            .sum()
    }

    /// Trapezoid L2 norm, sqrt of the integral of f^2.
    pub fn l2_norm(&self) -> f64 {
        let g = &self.grid;
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| g.weight(i) * v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// Trapezoid inner product <self, other>.
    pub fn inner(&self, other: &Field) -> Result<f64> {
        self.same_grid(other)?;
        let g = &self.grid;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(i, (u, v))| g.weight(i) * u * v)
            .sum())
    }

    pub fn l2_distance(&self, other: &Field) -> Result<f64> {
        self.same_grid(other)?;
        let g = &self.grid;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(i, (u, v))| g.weight(i) * (u - v) * (u - v))
            .sum::<f64>()
            .sqrt())
    }

    pub fn l1_distance(&self, other: &Field) -> Result<f64> {
        self.same_grid(other)?;
        let g = &self.grid;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(i, (u, v))| g.weight(i) * (u - v).abs())
            .sum())
    }

    pub fn sup_distance(&self, other: &Field) -> Result<f64> {
        self.same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(u, v)| (u - v).abs())
            .fold(0.0, f64::max))
    }

    /// Rescale to unit norm in the requested mode. L2 fields additionally get
    /// the sign convention that the value at the node of maximal magnitude is
    /// positive (the A = +1 choice for eigenfunctions).
    pub fn normalized(&self, mode: NormMode) -> Result<Field> {
        let norm = match mode {
            NormMode::L1 => self.l1_norm(),
            NormMode::L2 => self.l2_norm(),
            NormMode::None => {
                return Err(Error::InvalidArgument(
                    "normalize requires L1 or L2".into(),
                ))
            }
        };
        if norm <= 0.0 || !norm.is_finite() {
            return Err(Error::DegenerateField(match mode {
                NormMode::L1 => "L1",
                _ => "L2",
            }));
        }
        let mut values: Vec<f64> = self.values.iter().map(|v| v / norm).collect();
        if mode == NormMode::L2 {
            let peak = values
                .iter()
                .cloned()
                .max_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap())
                .unwrap_or(0.0);
            if peak < 0.0 {
                values.iter_mut().for_each(|v| *v = -*v);
            }
        }
        let f = Field {
            grid: self.grid,
            values,
            norm_mode: mode,
        };
        f.check_finite("normalize")?;
        Ok(f)
    }

    /// Serialize as two-column CSV "x,value" with 17 significant digits,
    /// headed by the grid line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "# grid a={} h={} norm={}",
            self.grid.a, self.grid.h, self.norm_mode
        )?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{:.16e},{:.16e}", self.grid.node(i), v)?;
        }
        Ok(())
    }
}

/// Composite trapezoid value of the integral of `f` over [-a, a].
pub fn integrate(f: &Field) -> f64 {
    let g = f.grid();
    f.values()
        .iter()
        .enumerate()
        .map(|(i, v)| g.weight(i) * v)
        .sum()
}
