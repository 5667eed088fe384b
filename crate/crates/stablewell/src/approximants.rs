//! Analytic approximations for the infinite Cauchy well: the corrected
//! eigenvalue rule E_n = n pi/2 - pi/8, the piecewise-matched approximate
//! eigenfunctions built from an auxiliary ramp q, a Laplace transform G of
//! the spectral density gamma, and the closed-form ground-state proposal
//! C sqrt((1 - x^2) cos(alpha x)).

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::Result;
use crate::grid::Field;
use crate::numeric::{adaptive_simpson, MonotoneCubic};

/// Ground-state phase constant alpha = 1443 pi / 4096.
pub const ALPHA: f64 = 1443.0 / 4096.0 * PI;

/// Published normalization of the ground-state formula.
pub const C_NORMALIZATION: f64 = 0.921749;

/// Corrected eigenvalue rule E_n = n pi / 2 - pi / 8. Reliable for large n
/// (one percent beyond n = 10); the n = 1 value is off by almost two
/// percent, which is exactly why the ground-state formula below exists.
pub fn approx_eigenvalue(n: usize) -> f64 {
    n as f64 * FRAC_PI_2 - PI / 8.0
}

/// Auxiliary ramp: 0 left of -1/3, quadratic splice through (0, 1/2),
/// 1 right of 1/3. Continuous, nondecreasing, q(x) + q(-x) = 1.
pub fn q_aux(x: f64) -> f64 {
    if x <= -1.0 / 3.0 {
        0.0
    } else if x < 0.0 {
        4.5 * (x + 1.0 / 3.0) * (x + 1.0 / 3.0)
    } else if x < 1.0 / 3.0 {
        1.0 - 4.5 * (x - 1.0 / 3.0) * (x - 1.0 / 3.0)
    } else {
        1.0
    }
}

const INNER_TOL: f64 = 1e-9;
// end cap width for the tan-substituted inner integral
const CAP: f64 = 1e-4;

/// Inner integral of the spectral density:
/// I(s) = int_0^infty log(1 + r s) / (1 + r^2) dr
///      = int_0^{pi/2} log(1 + s tan(theta)) dtheta.
/// The endpoint log divergence of tan is handled by a closed-form cap, so
/// the quadrature never evaluates at theta = pi/2.
pub fn inner_log_integral(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let main = adaptive_simpson(
        |theta| (s * theta.tan()).ln_1p(),
        0.0,
        FRAC_PI_2 - CAP,
        INNER_TOL,
    );
    // over the cap, tan(theta) ~ 1/(pi/2 - theta):
    // int_0^d log(1 + s/e) de = d log(1 + s/d) + s log(1 + d/s)
    let cap = CAP * (s / CAP).ln_1p() + s * (CAP / s).ln_1p();
    main + cap
}

/// gamma(s) = (1/(pi sqrt(2))) s/(1+s^2) exp(-I(s)/pi), the positive
/// density whose Laplace transform enters the eigenfunction formula.
pub fn gamma_density(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let prefactor = 1.0 / (PI * std::f64::consts::SQRT_2);
    prefactor * s / (1.0 + s * s) * (-inner_log_integral(s) / PI).exp()
}

/// G(x) = int_0^infty exp(-x s) gamma(s) ds, evaluated directly.
///
/// The range is split at s = 1 and the far half mapped by s = 1/u^2, under
/// which gamma's large-s behavior cancels exactly:
/// the identity I(s) = (pi/2) ln s + I(1/s) turns the tail into
/// (sqrt(2)/pi) int_0^1 exp(-x/u^2) exp(-I(u^2)/pi) / (1 + u^4) du,
/// a bounded smooth integrand. No truncation error is incurred.
pub fn laplace_g(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    let head = adaptive_simpson(|s| gamma_density(s) * (-x * s).exp(), 0.0, 1.0, INNER_TOL);
    let tail_integrand = |u: f64| {
        if u == 0.0 {
            // limit: exp(-x/u^2) -> 0 for x > 0, 1 at x = 0 (I(0) = 0)
            return if x == 0.0 { 1.0 } else { 0.0 };
        }
        let damp = if x == 0.0 { 1.0 } else { (-x / (u * u)).exp() };
        damp * (-inner_log_integral(u * u) / PI).exp() / (1.0 + u.powi(4))
    };
    let tail = adaptive_simpson(tail_integrand, 0.0, 1.0, INNER_TOL);
    head + std::f64::consts::SQRT_2 / PI * tail
}

/// Cached table of G on log-spaced abscissae with monotone interpolation,
/// for inner-loop evaluation of the approximate eigenfunctions. Direct
/// evaluation stays available through [`laplace_g`]; the two agree to 1e-5.
pub struct GTable {
    interp: MonotoneCubic,
    x_max: f64,
}

impl GTable {
    pub fn build(x_max: f64, points: usize) -> Result<Self> {
        let points = points.max(16);
        let lead = 1e-4_f64;
        let ratio = (x_max / lead).powf(1.0 / (points - 1) as f64);
        let mut xs = Vec::with_capacity(points + 1);
        let mut ys = Vec::with_capacity(points + 1);
        xs.push(0.0);
        ys.push(laplace_g(0.0));
        let mut x = lead;
        for _ in 0..points {
            xs.push(x.min(x_max));
            ys.push(laplace_g(x.min(x_max)));
            x *= ratio;
        }
        Ok(Self {
            interp: MonotoneCubic::new(xs, ys)?,
            x_max,
        })
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.interp.eval(x)
    }
}

/// Approximate eigenfunctions of the infinite Cauchy well:
/// psi_n(x) = q(-x) F_n(1 + x) - (-1)^n q(x) F_n(1 - x) on [-1, 1]
/// with F_n(z) = sin(E_n z + pi/8) - G(E_n z), zero outside the well.
pub struct Kwasnicki {
    table: GTable,
    n_max: usize,
}

impl Kwasnicki {
    pub fn new(n_max: usize) -> Result<Self> {
        let n_max = n_max.max(1);
        let x_max = 2.0 * approx_eigenvalue(n_max) + 1.0;
        Ok(Self {
            table: GTable::build(x_max, 400)?,
            n_max,
        })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    fn f_factor(&self, n: usize, z: f64) -> f64 {
        let e = approx_eigenvalue(n);
        (e * z + PI / 8.0).sin() - self.table.eval(e * z)
    }

    pub fn eigenfunction(&self, n: usize, x: f64) -> f64 {
        if x.abs() > 1.0 {
            return 0.0;
        }
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        q_aux(-x) * self.f_factor(n, 1.0 + x) - sign * q_aux(x) * self.f_factor(n, 1.0 - x)
    }

    /// Table-free evaluation for verification.
    pub fn eigenfunction_direct(n: usize, x: f64) -> f64 {
        if x.abs() > 1.0 {
            return 0.0;
        }
        let e = approx_eigenvalue(n);
        let f = |z: f64| (e * z + PI / 8.0).sin() - laplace_g(e * z);
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        q_aux(-x) * f(1.0 + x) - sign * q_aux(x) * f(1.0 - x)
    }
}

/// The closed-form ground-state proposal psi(x) = C sqrt((1-x^2) cos(alpha x)),
/// zero outside [-1, 1]. The radicand is nonnegative on the well since
/// alpha < pi/2.
pub fn paper_ground_state(x: f64) -> f64 {
    if x.abs() > 1.0 {
        return 0.0;
    }
    let radicand = (1.0 - x * x) * (ALPHA * x).cos();
    C_NORMALIZATION * radicand.max(0.0).sqrt()
}

/// Closed form of int_{-1}^{1} (1 - x^2) cos(alpha x) dx; its inverse
/// square root is the normalization constant of the ground-state formula.
pub fn ground_state_norm_integral() -> f64 {
    2.0 * (2.0 * ALPHA.sin() / ALPHA.powi(3) - 2.0 * ALPHA.cos() / (ALPHA * ALPHA))
}

/// Sup-norm and L2 distance of one candidate profile from the reference.
#[derive(Debug, Clone)]
pub struct CandidateReport {
    pub name: String,
    pub sup: f64,
    pub l2: f64,
}

/// Distances of candidate profiles from a numeric ground state, measured
/// over the well interior |x| <= 1 on the reference's own grid.
pub fn compare_ground_states(
    candidates: &[(&str, &dyn Fn(f64) -> f64)],
    reference: &Field,
) -> Result<Vec<CandidateReport>> {
    let grid = reference.grid();
    let mut out = Vec::with_capacity(candidates.len());
    for (name, profile) in candidates {
        let mut sup = 0.0f64;
        let mut l2 = 0.0f64;
        for (i, x) in grid.nodes().enumerate() {
            if x.abs() <= 1.0 {
                let d = profile(x) - reference.values()[i];
                sup = sup.max(d.abs());
                l2 += grid.weight(i) * d * d;
            }
        }
        out.push(CandidateReport {
            name: name.to_string(),
            sup,
            l2: l2.sqrt(),
        });
    }
    Ok(out)
}
