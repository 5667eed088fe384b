//! Motion generators and well potentials.
//!
//! Two kinetic operators drive everything: the discrete Laplacian (Brownian
//! motion, mu = 2) and the Cauchy operator T = (-Delta)^{1/2} (mu = 1),
//! the latter both free on [-a, a] and Dirichlet-restricted to the well
//! interval (-1, 1). The free mu-stable generator is provided for general
//! mu in (0, 2).
//!
//! Conventions:
//! * `apply_stable_generator` returns the negative generator
//!   -|Delta|^{mu/2} f (the right-hand side of a free transport equation);
//! * `apply_cauchy` and `apply_cauchy_restricted` return the positive
//!   operator T f, so eigenvalues of T + V are positive.
//!
//! Principal-value integrals are discretized by a midpoint sum over cells
//! |y - x| > h/2, a second-order analytic correction on the singular cell,
//! and closed-form tails for the exterior region where fields vanish.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Field;

/// Which random motion drives an evolution: mu = 2 or mu = 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Driver {
    Brownian,
    Cauchy,
}

impl std::fmt::Display for Driver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Driver::Brownian => write!(f, "brownian"),
            Driver::Cauchy => write!(f, "cauchy"),
        }
    }
}

/// Well potential over the fixed interval (-1, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Potential {
    /// V(x) = 0 for |x| < 1, V(x) = v0 for |x| >= 1.
    FiniteWell { v0: f64 },
    /// Dirichlet restriction: fields vanish identically on |x| >= 1.
    /// Never represented as a large finite step.
    InfiniteWell,
}

impl Potential {
    pub fn finite_well(v0: f64) -> Result<Self> {
        if !(v0 >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "well depth v0 = {v0} must be nonnegative"
            )));
        }
        Ok(Potential::FiniteWell { v0 })
    }

    pub fn infinite_well() -> Self {
        Potential::InfiniteWell
    }

    /// Potential value at x; only meaningful for the finite well.
    pub fn value(&self, x: f64) -> f64 {
        match self {
            Potential::FiniteWell { v0 } => {
                if x.abs() < 1.0 {
                    0.0
                } else {
                    *v0
                }
            }
            Potential::InfiniteWell => {
                if x.abs() < 1.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// Nodewise product V(x) f(x). The infinite well acts as the interval
    /// restriction instead: all nodes with |x| >= 1 are zeroed.
    pub fn apply(&self, f: &Field) -> Result<Field> {
        match self {
            Potential::FiniteWell { v0 } => {
                let g = f.grid();
                let values = f
                    .values()
                    .iter()
                    .enumerate()
                    .map(|(i, v)| if g.node(i).abs() < 1.0 { 0.0 } else { v0 * v })
                    .collect();
                Field::from_values(g, values)
            }
            Potential::InfiniteWell => Ok(self.mask(f)),
        }
    }

    /// Zero every node with |x| >= 1.
    pub fn mask(&self, f: &Field) -> Field {
        let g = f.grid();
        let values = f
            .values()
            .iter()
            .enumerate()
            .map(|(i, v)| if g.node(i).abs() < 1.0 { *v } else { 0.0 })
            .collect();
        Field::from_values(g, values).expect("masking preserves finiteness")
    }
}

/// Operator tags carried by [`LinearOp`] implementations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OpDescriptor {
    Laplacian,
    CauchyFree,
    CauchyRestricted,
    StableFree { mu: f64 },
    Multiplication,
    Composite,
}

/// A linear map on fields. All the generators here are symmetric with
/// respect to the trapezoid inner product on fields vanishing near the
/// cutoff.
pub trait LinearOp {
    fn apply(&self, f: &Field) -> Result<Field>;
    fn symmetric(&self) -> bool {
        true
    }
    fn descriptor(&self) -> OpDescriptor;
}

/// Central second difference with exterior-zero closure at the cutoff.
pub fn apply_laplacian(f: &Field) -> Result<Field> {
    let g = f.grid();
    let n = g.len();
    if n < 3 {
        return Err(Error::InvalidArgument("grid too small for a Laplacian".into()));
    }
    let h2 = g.h() * g.h();
    let v = f.values();
    let mut out = vec![0.0; n];
    for i in 0..n {
        let left = if i > 0 { v[i - 1] } else { 0.0 };
        let right = if i + 1 < n { v[i + 1] } else { 0.0 };
        out[i] = (left - 2.0 * v[i] + right) / h2;
    }
    Field::from_values(g, out)
}

/// One-dimensional stable-generator constant
/// C_mu = 2^mu Gamma((mu+1)/2) / (pi^{1/2} |Gamma(-mu/2)|).
pub fn stable_constant(mu: f64) -> Result<f64> {
    if !(mu > 0.0 && mu < 2.0) {
        return Err(Error::InvalidArgument(format!(
            "stability index mu = {mu} must lie in (0, 2)"
        )));
    }
    let c = libm::exp2(mu) * libm::tgamma((mu + 1.0) / 2.0)
        / (std::f64::consts::PI.sqrt() * libm::tgamma(-mu / 2.0).abs());
    Ok(c)
}

/// Shared principal-value core: returns C_mu times the bracketed sum of
/// Eq-style nodewise quadrature, singular-cell correction and exterior
/// tails, i.e. the negative generator -|Delta|^{mu/2} f.
fn stable_negative_generator(f: &Field, mu: f64) -> Result<Field> {
    let c_mu = stable_constant(mu)?;
    let g = f.grid();
    let n = g.len();
    if n < 3 {
        return Err(Error::InvalidArgument("grid too small".into()));
    }
    let h = g.h();
    let a = g.a();
    let v = f.values();

    // kernel table: h / (m h)^{1+mu} for integer node offsets m
    let kernel: Vec<f64> = (0..n)
        .map(|m| {
            if m == 0 {
                0.0
            } else if mu == 1.0 {
                1.0 / (m as f64 * m as f64 * h)
            } else {
                h / (m as f64 * h).powf(1.0 + mu)
            }
        })
        .collect();

    // singular-cell factor: int_{|z|<h/2} (f(y)-f(x)) / |z|^{1+mu} dz
    // ~ f''(x) (h/2)^{2-mu} / (2-mu); the odd term cancels in the PV sense.
    let sing = (0.5 * h).powf(2.0 - mu) / (2.0 - mu);
    let h2 = h * h;

    let mut out = vec![0.0; n];
    out.par_iter_mut().enumerate().for_each(|(i, o)| {
        let fi = v[i];
        let mut acc = 0.0;
        for j in 0..n {
            if j != i {
                acc += (v[j] - fi) * kernel[usize::abs_diff(i, j)];
            }
        }
        let left = if i > 0 { v[i - 1] } else { 0.0 };
        let right = if i + 1 < n { v[i + 1] } else { 0.0 };
        acc += sing * (left - 2.0 * fi + right) / h2;
        // exterior tails with f = 0 beyond the cutoff; the vanishing
        // distance at the two edge nodes is floored at half a cell.
        let x = g.node(i);
        let dr = (a - x).max(0.5 * h);
        let dl = (a + x).max(0.5 * h);
        acc -= fi * (dr.powf(-mu) + dl.powf(-mu)) / mu;
        *o = c_mu * acc;
    });
    let res = Field::from_values(g, out)?;
    res.check_finite("stable generator")?;
    Ok(res)
}

/// Negative mu-stable generator -|Delta|^{mu/2} f for mu in (0, 2).
///
/// The field is treated as exactly zero beyond the cutoff; callers should
/// pass fields that decay there or accept the truncation error.
pub fn apply_stable_generator(f: &Field, mu: f64) -> Result<Field> {
    stable_negative_generator(f, mu)
}

/// Positive Cauchy operator T f = (-Delta)^{1/2} f
/// = (1/pi) PV int (f(x) - f(x+z)) / z^2 dz with exterior-zero tails.
pub fn apply_cauchy(f: &Field) -> Result<Field> {
    let mut neg = stable_negative_generator(f, 1.0)?;
    neg.values_mut().iter_mut().for_each(|v| *v = -*v);
    Ok(neg)
}

/// Killing intensity of the Dirichlet-restricted Cauchy operator on (-1, 1):
/// kappa_D(x) = (1/pi) [1/(1-x) + 1/(1+x)]. Diverges at the boundary.
pub fn killing_intensity(x: f64) -> f64 {
    (1.0 / (1.0 - x) + 1.0 / (1.0 + x)) / std::f64::consts::PI
}

fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
}

/// Positive Cauchy operator restricted to the interval (-1, 1): the PV
/// integral runs over the interior only and the exact exterior tail folds
/// into the multiplicative killing intensity. The input must vanish on
/// |x| >= 1; the output is supported on the interior nodes.
pub fn apply_cauchy_restricted(f: &Field) -> Result<Field> {
    let g = f.grid();
    let v = f.values();
    let (lo, hi) = g.unit_indices();
    let tol = 1e-12 * max_abs(v);
    for (i, val) in v.iter().enumerate() {
        if (i <= lo || i >= hi) && val.abs() > tol {
            return Err(Error::ExteriorCondition);
        }
    }
    let h = g.h();
    let inv_pi = 1.0 / std::f64::consts::PI;
    let kernel: Vec<f64> = (0..g.len())
        .map(|m| if m == 0 { 0.0 } else { 1.0 / (m as f64 * m as f64 * h) })
        .collect();
    let mut out = vec![0.0; g.len()];
    out[lo + 1..hi]
        .par_iter_mut()
        .enumerate()
        .for_each(|(k, o)| {
            let i = lo + 1 + k;
            let fi = v[i];
            let mut acc = 0.0;
            for j in lo + 1..hi {
                if j != i {
                    acc += (fi - v[j]) * kernel[usize::abs_diff(i, j)];
                }
            }
            // singular-cell correction for the positive operator
            acc -= 0.5 * (v[i - 1] - 2.0 * fi + v[i + 1]) / h;
            let x = g.node(i);
            *o = inv_pi * acc + fi * killing_intensity(x);
        });
    let res = Field::from_values(g, out)?;
    res.check_finite("restricted Cauchy operator")?;
    Ok(res)
}

pub struct LaplacianOp;
pub struct CauchyOp;
pub struct RestrictedCauchyOp;
pub struct StableOp {
    pub mu: f64,
}
pub struct MultiplicationOp {
    pub potential: Potential,
}

impl LinearOp for LaplacianOp {
    fn apply(&self, f: &Field) -> Result<Field> {
        apply_laplacian(f)
    }
    fn descriptor(&self) -> OpDescriptor {
        OpDescriptor::Laplacian
    }
}

impl LinearOp for CauchyOp {
    fn apply(&self, f: &Field) -> Result<Field> {
        apply_cauchy(f)
    }
    fn descriptor(&self) -> OpDescriptor {
        OpDescriptor::CauchyFree
    }
}

impl LinearOp for RestrictedCauchyOp {
    fn apply(&self, f: &Field) -> Result<Field> {
        apply_cauchy_restricted(f)
    }
    fn descriptor(&self) -> OpDescriptor {
        OpDescriptor::CauchyRestricted
    }
}

impl LinearOp for StableOp {
    fn apply(&self, f: &Field) -> Result<Field> {
        apply_stable_generator(f, self.mu)
    }
    fn descriptor(&self) -> OpDescriptor {
        OpDescriptor::StableFree { mu: self.mu }
    }
}

impl LinearOp for MultiplicationOp {
    fn apply(&self, f: &Field) -> Result<Field> {
        self.potential.apply(f)
    }
    fn descriptor(&self) -> OpDescriptor {
        OpDescriptor::Multiplication
    }
}

/// H = T + V - shift. With shift = E1 the ground state sits at eigenvalue
/// zero and exp(-Ht) relaxes to it.
#[derive(Debug, Clone, Copy)]
pub struct Hamiltonian {
    pub driver: Driver,
    pub potential: Potential,
    pub shift: f64,
}

impl Hamiltonian {
    pub fn new(driver: Driver, potential: Potential) -> Self {
        Self {
            driver,
            potential,
            shift: 0.0,
        }
    }

    pub fn shifted(driver: Driver, potential: Potential, shift: f64) -> Self {
        Self {
            driver,
            potential,
            shift,
        }
    }

    fn kinetic(&self, f: &Field) -> Result<Field> {
        match (self.driver, self.potential) {
            (Driver::Brownian, Potential::FiniteWell { .. }) => {
                let mut lap = apply_laplacian(f)?;
                lap.values_mut().iter_mut().for_each(|v| *v = -*v);
                Ok(lap)
            }
            (Driver::Brownian, Potential::InfiniteWell) => {
                // Dirichlet Laplacian: exterior values must vanish; the
                // interior stencil then never sees nonzero exterior data.
                let g = f.grid();
                let tol = 1e-12 * max_abs(f.values());
                let (lo, hi) = g.unit_indices();
                for (i, val) in f.values().iter().enumerate() {
                    if (i <= lo || i >= hi) && val.abs() > tol {
                        return Err(Error::ExteriorCondition);
                    }
                }
                let mut lap = apply_laplacian(f)?;
                lap.values_mut().iter_mut().for_each(|v| *v = -*v);
                Ok(self.potential.mask(&lap))
            }
            (Driver::Cauchy, Potential::FiniteWell { .. }) => apply_cauchy(f),
            (Driver::Cauchy, Potential::InfiniteWell) => apply_cauchy_restricted(f),
        }
    }
}

impl LinearOp for Hamiltonian {
    fn apply(&self, f: &Field) -> Result<Field> {
        let mut out = self.kinetic(f)?;
        let g = f.grid();
        match self.potential {
            Potential::FiniteWell { v0 } => {
                let vals = out.values_mut();
                for (i, v) in vals.iter_mut().enumerate() {
                    let pot = if g.node(i).abs() < 1.0 { 0.0 } else { v0 };
                    *v += (pot - self.shift) * f.values()[i];
                }
            }
            Potential::InfiniteWell => {
                let (lo, hi) = g.unit_indices();
                let vals = out.values_mut();
                for i in lo + 1..hi {
                    vals[i] -= self.shift * f.values()[i];
                }
            }
        }
        out.check_finite("Hamiltonian apply")?;
        Ok(out)
    }

    fn descriptor(&self) -> OpDescriptor {
        OpDescriptor::Composite
    }
}

/// Which algebraic route to the Schroedinger compatibility potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompatForm {
    /// V = rho*^{-1/2} Delta rho*^{1/2}
    Laplacian,
    /// V = (b^2/2 + b') / 2 with b = (ln rho*)'
    Drift,
}

/// A field together with the set of nodes on which it is defined.
/// Masked nodes hold zero.
#[derive(Debug, Clone)]
pub struct MaskedField {
    pub field: Field,
    pub active: Vec<bool>,
}

impl MaskedField {
    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|a| **a).count()
    }
}

/// Schroedinger potential compatible with the equilibrium density rho*:
/// evaluated on nodes where rho* clears the positivity floor
/// 1e-12 max(rho*) together with both stencil neighbors; everything else is
/// reported masked rather than extrapolated.
pub fn compatibility_potential(rho_star: &Field, form: CompatForm) -> Result<MaskedField> {
    let g = rho_star.grid();
    let v = rho_star.values();
    if v.iter().any(|x| *x < 0.0) {
        return Err(Error::InvalidArgument(
            "compatibility potential needs a nonnegative density".into(),
        ));
    }
    let floor = 1e-12 * max_abs(v);
    if floor == 0.0 {
        return Err(Error::DegenerateField("L1"));
    }
    let n = g.len();
    let h = g.h();
    let ok = |i: usize| v[i] >= floor;
    let mut out = vec![0.0; n];
    let mut active = vec![false; n];
    for i in 1..n - 1 {
        if !(ok(i) && ok(i - 1) && ok(i + 1)) {
            continue;
        }
        out[i] = match form {
            CompatForm::Laplacian => {
                let gm = v[i - 1].sqrt();
                let gc = v[i].sqrt();
                let gp = v[i + 1].sqrt();
                (gm - 2.0 * gc + gp) / (h * h) / gc
            }
            CompatForm::Drift => {
                let lm = v[i - 1].ln();
                let lc = v[i].ln();
                let lp = v[i + 1].ln();
                let b = (lp - lm) / (2.0 * h);
                let bp = (lp - 2.0 * lc + lm) / (h * h);
                0.5 * (0.5 * b * b + bp)
            }
        };
        active[i] = true;
    }
    let field = Field::from_values(g, out)?;
    Ok(MaskedField { field, active })
}

#[cfg(test)]
pub(crate) fn smooth_window(x: f64, flat: f64, outer: f64) -> f64 {
    let ax = x.abs();
    if ax <= flat {
        1.0
    } else if ax >= outer {
        0.0
    } else {
        let t = (ax - flat) * std::f64::consts::FRAC_PI_2 / (outer - flat);
        t.cos() * t.cos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid, NormMode};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn grid_small() -> Grid {
        Grid::build(5.0, 40).unwrap()
    }

    #[test]
    fn laplacian_exact_on_quadratic() {
        let g = grid_small();
        let f = Field::from_fn(g, |x| x * x).unwrap();
        let lap = apply_laplacian(&f).unwrap();
        for i in 1..g.len() - 1 {
            assert!((lap.values()[i] - 2.0).abs() < 1e-9, "node {i}");
        }
    }

    #[test]
    fn laplacian_annihilates_constants_in_interior() {
        let g = grid_small();
        let f = Field::from_fn(g, |_| 3.7).unwrap();
        let lap = apply_laplacian(&f).unwrap();
        for i in 1..g.len() - 1 {
            assert_eq!(lap.values()[i], 0.0);
        }
    }

    #[test]
    fn laplacian_eigenfunction_identity() {
        let g = Grid::build(2.0, 200).unwrap();
        let f = Field::from_fn(g, |x| {
            if x.abs() < 1.0 {
                (PI * x / 2.0).cos()
            } else {
                0.0
            }
        })
        .unwrap();
        let lap = apply_laplacian(&f).unwrap();
        let lam = -(PI / 2.0) * (PI / 2.0);
        for (i, x) in g.nodes().enumerate() {
            if x.abs() < 0.95 {
                let want = lam * f.values()[i];
                assert!(
                    (lap.values()[i] - want).abs() < 5e-4,
                    "x = {x}: {} vs {want}",
                    lap.values()[i]
                );
            }
        }
    }

    #[test]
    fn stable_constant_at_mu_one_is_inv_pi() {
        let c = stable_constant(1.0).unwrap();
        assert!((c - 1.0 / PI).abs() < 1e-12, "C_1 = {c}");
    }

    #[test]
    fn stable_constant_rejects_bad_mu() {
        assert!(stable_constant(0.0).is_err());
        assert!(stable_constant(2.0).is_err());
        assert!(stable_constant(-0.3).is_err());
    }

    #[test]
    fn stable_mu_one_matches_negated_cauchy() {
        let g = grid_small();
        let f = Field::from_fn(g, |x| (-x * x / 2.0).exp()).unwrap();
        let s = apply_stable_generator(&f, 1.0).unwrap();
        let t = apply_cauchy(&f).unwrap();
        for i in 0..g.len() {
            assert!((s.values()[i] + t.values()[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn stable_generator_of_zero_is_zero() {
        let g = grid_small();
        let z = Field::zeros(g);
        for mu in [0.5, 1.0, 1.5] {
            let out = apply_stable_generator(&z, mu).unwrap();
            assert!(out.values().iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn cauchy_fourier_symbol() {
        // T (cos kx) = |k| cos(kx); windowed plane waves on the production grid
        let g = Grid::build(50.0, 40).unwrap();
        for k in [0.5, 1.0, 2.0] {
            let f = Field::from_fn(g, |x| (k * x).cos() * smooth_window(x, 10.0, 45.0)).unwrap();
            let tf = apply_cauchy(&f).unwrap();
            let mut worst = 0.0f64;
            for (i, x) in g.nodes().enumerate() {
                if x.abs() <= 5.0 {
                    worst = worst.max((tf.values()[i] - k * (k * x).cos()).abs());
                }
            }
            assert!(worst / k < 1e-2, "k = {k}: rel err {}", worst / k);
        }
    }

    #[test]
    fn stable_symbol_mu_one_windowed() {
        let g = Grid::build(50.0, 40).unwrap();
        let k = 1.0;
        let f = Field::from_fn(g, |x| (k * x).cos() * smooth_window(x, 10.0, 45.0)).unwrap();
        let s = apply_stable_generator(&f, 1.0).unwrap();
        for (i, x) in g.nodes().enumerate() {
            if x.abs() <= 5.0 {
                assert!((s.values()[i] + k * (k * x).cos()).abs() < 1e-2);
            }
        }
    }

    #[test]
    fn cauchy_preserves_parity() {
        let g = grid_small();
        let f = Field::from_fn(g, |x| (-x * x).exp() + 0.3 * (-(x * x) / 4.0).exp()).unwrap();
        let tf = apply_cauchy(&f).unwrap();
        let n = g.len();
        for i in 0..n {
            assert!((tf.values()[i] - tf.values()[n - 1 - i]).abs() < 1e-10);
        }
    }

    #[test]
    fn cauchy_positive_quadratic_form() {
        let g = grid_small();
        let f = Field::from_fn(g, |x| (-(x * x)).exp() * (1.0 + 0.5 * x)).unwrap();
        let tf = apply_cauchy(&f).unwrap();
        assert!(f.inner(&tf).unwrap() > 0.0);
    }

    #[test]
    fn free_operators_symmetric_on_decaying_fields() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = Grid::build(10.0, 20).unwrap();
        for _ in 0..10 {
            let coeffs: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mk = |c: &[f64]| {
                Field::from_fn(g, |x| {
                    (c[0] + c[1] * x + c[2] * x * x + c[3] * (2.0 * x).sin())
                        * (-(x * x) / 4.0).exp()
                })
                .unwrap()
            };
            let f = mk(&coeffs);
            let coeffs2: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            let q = mk(&coeffs2);
            for op in [
                Box::new(LaplacianOp) as Box<dyn LinearOp>,
                Box::new(CauchyOp),
                Box::new(StableOp { mu: 1.4 }),
            ] {
                let of = op.apply(&f).unwrap();
                let oq = op.apply(&q).unwrap();
                let lhs = f.inner(&oq).unwrap();
                let rhs = of.inner(&q).unwrap();
                let scale = f.l2_norm() * q.l2_norm();
                assert!(
                    (lhs - rhs).abs() < 1e-6 * scale,
                    "defect {} for {:?}",
                    (lhs - rhs).abs(),
                    op.descriptor()
                );
            }
        }
    }

    #[test]
    fn operators_linear_on_random_fields() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = Grid::build(5.0, 20).unwrap();
        let f = Field::from_fn(g, |x| (-(x * x)).exp() * (1.0 + x)).unwrap();
        let q = Field::from_fn(g, |x| (-(x * x) / 2.0).exp() * (3.0 * x).cos()).unwrap();
        let (alpha, beta): (f64, f64) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let combo = Field::from_values(
            g,
            f.values()
                .iter()
                .zip(q.values())
                .map(|(a, b)| alpha * a + beta * b)
                .collect(),
        )
        .unwrap();
        let t_combo = apply_cauchy(&combo).unwrap();
        let tf = apply_cauchy(&f).unwrap();
        let tq = apply_cauchy(&q).unwrap();
        for i in 0..g.len() {
            let want = alpha * tf.values()[i] + beta * tq.values()[i];
            assert!((t_combo.values()[i] - want).abs() < 1e-10);
        }
    }

    #[test]
    fn restricted_killing_intensity_at_origin() {
        assert!((killing_intensity(0.0) - 2.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn restricted_rejects_exterior_support() {
        let g = grid_small();
        let f = Field::from_fn(g, |x| (-(x * x) / 8.0).exp()).unwrap();
        assert!(matches!(
            apply_cauchy_restricted(&f),
            Err(Error::ExteriorCondition)
        ));
    }

    #[test]
    fn restricted_preserves_parity() {
        let g = Grid::build(2.0, 100).unwrap();
        let f = Field::from_fn(g, |x| {
            if x.abs() < 1.0 {
                (PI * x / 2.0).cos()
            } else {
                0.0
            }
        })
        .unwrap();
        let tf = apply_cauchy_restricted(&f).unwrap();
        let n = g.len();
        for i in 0..n {
            assert!((tf.values()[i] - tf.values()[n - 1 - i]).abs() < 1e-10);
        }
        // output supported on the interior
        let (lo, hi) = g.unit_indices();
        assert_eq!(tf.values()[lo], 0.0);
        assert_eq!(tf.values()[hi], 0.0);
    }

    #[test]
    fn restricted_symmetric_on_interior_fields() {
        let g = Grid::build(1.0, 100).unwrap();
        let mk = |k: f64| {
            Field::from_fn(g, |x| {
                if x.abs() < 1.0 {
                    (1.0 - x * x) * (k * x).cos()
                } else {
                    0.0
                }
            })
            .unwrap()
        };
        let f = mk(1.0);
        let q = mk(2.3);
        let tf = apply_cauchy_restricted(&f).unwrap();
        let tq = apply_cauchy_restricted(&q).unwrap();
        let defect = (f.inner(&tq).unwrap() - tf.inner(&q).unwrap()).abs();
        assert!(defect < 1e-8 * f.l2_norm() * q.l2_norm(), "defect {defect}");
    }

    #[test]
    fn potential_boundary_convention() {
        let pot = Potential::finite_well(5.0).unwrap();
        assert_eq!(pot.value(0.0), 0.0);
        assert_eq!(pot.value(1.0), 5.0);
        assert_eq!(pot.value(-1.0), 5.0);
        assert_eq!(pot.value(0.999), 0.0);
    }

    #[test]
    fn zero_depth_well_annihilates() {
        let g = grid_small();
        let pot = Potential::finite_well(0.0).unwrap();
        let f = Field::from_fn(g, |x| x.cos()).unwrap();
        let vf = pot.apply(&f).unwrap();
        assert!(vf.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn infinite_well_masks_exterior() {
        let g = grid_small();
        let pot = Potential::infinite_well();
        let f = Field::from_fn(g, |_| 1.0).unwrap();
        let masked = pot.apply(&f).unwrap();
        for (i, x) in g.nodes().enumerate() {
            if x.abs() >= 1.0 {
                assert_eq!(masked.values()[i], 0.0);
            } else {
                assert_eq!(masked.values()[i], 1.0);
            }
        }
    }

    #[test]
    fn compatibility_cosine_squared_density() {
        let g = Grid::build(2.0, 200).unwrap();
        let rho = Field::from_fn(g, |x| {
            if x.abs() < 1.0 {
                (PI * x / 2.0).cos().powi(2)
            } else {
                0.0
            }
        })
        .unwrap();
        let pot = compatibility_potential(&rho, CompatForm::Laplacian).unwrap();
        let want = -(PI / 2.0) * (PI / 2.0);
        for (i, x) in g.nodes().enumerate() {
            if pot.active[i] && x.abs() < 0.9 {
                assert!(
                    (pot.field.values()[i] - want).abs() < 1e-3,
                    "x = {x}: {}",
                    pot.field.values()[i]
                );
            }
        }
        // nodes near the support edge are masked, not extrapolated
        assert!(pot.active_count() < g.len());
    }

    #[test]
    fn compatibility_gaussian_both_forms() {
        let g = Grid::build(6.0, 100).unwrap();
        let rho = Field::from_fn(g, |x| (-x * x / 2.0).exp()).unwrap();
        let lap = compatibility_potential(&rho, CompatForm::Laplacian).unwrap();
        let drift = compatibility_potential(&rho, CompatForm::Drift).unwrap();
        for (i, x) in g.nodes().enumerate() {
            if !lap.active[i] || !drift.active[i] || x.abs() > 4.0 {
                continue;
            }
            let want = x * x / 4.0 - 0.5;
            assert!((lap.field.values()[i] - want).abs() < 2e-3, "lap at {x}");
            assert!((drift.field.values()[i] - want).abs() < 2e-3, "drift at {x}");
            assert!((lap.field.values()[i] - drift.field.values()[i]).abs() < 2e-3);
        }
    }

    #[test]
    fn compatibility_rejects_negative_density() {
        let g = grid_small();
        let rho = Field::from_fn(g, |x| x).unwrap();
        assert!(compatibility_potential(&rho, CompatForm::Laplacian).is_err());
    }

    #[test]
    fn hamiltonian_infinite_well_ground_state_near_zero_shift() {
        let g = Grid::build(1.0, 200).unwrap();
        let f = Field::from_fn(g, |x| {
            if x.abs() < 1.0 {
                (PI * x / 2.0).cos()
            } else {
                0.0
            }
        })
        .unwrap()
        .normalized(NormMode::L2)
        .unwrap();
        let e1 = PI * PI / 4.0;
        let ham = Hamiltonian::shifted(Driver::Brownian, Potential::infinite_well(), e1);
        let hf = ham.apply(&f).unwrap();
        // H - E1 annihilates the ground state up to O(h^2)
        assert!(hf.l2_norm() < 5e-4, "residual {}", hf.l2_norm());
    }
}
