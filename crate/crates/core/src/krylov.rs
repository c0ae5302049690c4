//! Matrix-free LSQR and LSMR.
//!
//! Both start from `x = 0`, so iterates stay in the row space of `A` and the
//! limit is the minimum-norm least-squares solution. Stopping follows the
//! usual pair of tests:
//!
//! * `||r|| <= btol ||b|| + atol ||A|| ||x||` (compatible systems),
//! * `||A^T r|| <= atol ||A|| ||r||` (least-squares systems),
//!
//! where `||A||` is the Frobenius-norm estimate accumulated from the
//! Golub-Kahan bidiagonalisation.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A linear operator given by its action and the action of its Euclidean
/// transpose.
pub trait LinearMap {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// `y = A x`
    fn apply(&self, x: &[f64], y: &mut [f64]);
    /// `x = A^T y`
    fn apply_adjoint(&self, y: &[f64], x: &mut [f64]);
}

impl<T: LinearMap + ?Sized> LinearMap for &T {
    fn nrows(&self) -> usize {
        (**self).nrows()
    }
    fn ncols(&self) -> usize {
        (**self).ncols()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply(x, y)
    }
    fn apply_adjoint(&self, y: &[f64], x: &mut [f64]) {
        (**self).apply_adjoint(y, x)
    }
}

/// Dense matrix as a [`LinearMap`].
#[derive(Debug, Clone)]
pub struct DenseMap(pub DMatrix<f64>);

impl LinearMap for DenseMap {
    fn nrows(&self) -> usize {
        self.0.nrows()
    }
    fn ncols(&self) -> usize {
        self.0.ncols()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.0.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
    fn apply_adjoint(&self, y: &[f64], x: &mut [f64]) {
        for (j, xj) in x.iter_mut().enumerate() {
            *xj = self.0.column(j).iter().zip(y).map(|(a, b)| a * b).sum();
        }
    }
}

/// Materialises a map column by column.
pub fn to_dense(map: &dyn LinearMap) -> DMatrix<f64> {
    let (m, n) = (map.nrows(), map.ncols());
    let mut out = DMatrix::zeros(m, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; m];
    for j in 0..n {
        e[j] = 1.0;
        map.apply(&e, &mut col);
        out.column_mut(j).copy_from_slice(&col);
        e[j] = 0.0;
    }
    out
}

/// Randomised check of `<A x, y> = <x, A^T y>`; returns the relative defect.
pub fn adjoint_defect(map: &dyn LinearMap, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = (0..map.ncols()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let y: Vec<f64> = (0..map.nrows()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut ax = vec![0.0; map.nrows()];
    let mut aty = vec![0.0; map.ncols()];
    map.apply(&x, &mut ax);
    map.apply_adjoint(&y, &mut aty);
    let lhs = dot(&ax, &y);
    let rhs = dot(&x, &aty);
    let scale = norm(&ax) * norm(&y) + norm(&x) * norm(&aty);
    if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs).abs() / scale
    }
}

/// Fails with [`Error::AdjointMismatch`] if the relative defect exceeds `tol`.
pub fn check_adjoint(map: &dyn LinearMap, tol: f64) -> Result<()> {
    let defect = adjoint_defect(map, 0x5eed);
    if defect > tol {
        return Err(Error::AdjointMismatch(defect));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    ResidualTol,
    NormalTol,
    MaxIter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub iterations: usize,
    pub final_residual_norm: f64,
    /// `||A^T r||`
    pub final_normal_residual_norm: f64,
    pub stop_reason: StopReason,
    /// Recurrence estimates of `||r_k||`, one per iteration.
    pub residual_history: Vec<f64>,
    /// Recurrence estimates of `||A^T r_k||`, one per iteration.
    pub normal_residual_history: Vec<f64>,
    /// Explicit `(||r_k||, ||A^T r_k||)` per iteration, only when requested.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub true_residual_history: Vec<(f64, f64)>,
}

impl SolveStats {
    pub fn converged(&self) -> bool {
        self.stop_reason != StopReason::MaxIter
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KrylovOptions {
    pub atol: f64,
    pub btol: f64,
    /// Defaults to `4 max(rows, cols)` when `None`.
    pub max_iter: Option<usize>,
    /// Recompute the true residuals every iteration (costs two extra
    /// operator applications per step).
    pub track_true_residuals: bool,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            atol: 1e-10,
            btol: 1e-10,
            max_iter: None,
            track_true_residuals: false,
        }
    }
}

impl KrylovOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            atol: tol,
            btol: tol,
            ..Self::default()
        }
    }

    fn iteration_limit(&self, map: &dyn LinearMap) -> usize {
        self.max_iter
            .unwrap_or_else(|| 4 * map.nrows().max(map.ncols()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    #[default]
    Lsqr,
    Lsmr,
}

impl Solver {
    pub fn solve(
        self,
        map: &dyn LinearMap,
        b: &[f64],
        opts: &KrylovOptions,
    ) -> Result<(Vec<f64>, SolveStats)> {
        match self {
            Solver::Lsqr => lsqr(map, b, opts),
            Solver::Lsmr => lsmr(map, b, opts),
        }
    }
}

impl std::str::FromStr for Solver {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lsqr" => Ok(Solver::Lsqr),
            "lsmr" => Ok(Solver::Lsmr),
            other => Err(format!("unknown solver '{other}' (expected lsqr or lsmr)")),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn scale(a: &mut [f64], s: f64) {
    for v in a {
        *v *= s;
    }
}

/// Stable Givens rotation: `(c, s, r)` with `[c s; -s c] [a; b] = [r; 0]`.
fn sym_ortho(a: f64, b: f64) -> (f64, f64, f64) {
    if b == 0.0 {
        let c = if a == 0.0 { 1.0 } else { a.signum() };
        (c, 0.0, a.abs())
    } else if a == 0.0 {
        (0.0, b.signum(), b.abs())
    } else {
        let r = a.hypot(b);
        (a / r, b / r, r)
    }
}

struct Prepared {
    u: Vec<f64>,
    v: Vec<f64>,
    alpha: f64,
    beta: f64,
}

fn check_inputs(map: &dyn LinearMap, b: &[f64]) -> Result<()> {
    if b.len() != map.nrows() {
        return Err(Error::DimensionMismatch {
            expected: map.nrows(),
            actual: b.len(),
        });
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteEncountered);
    }
    check_adjoint(map, 1e-10)
}

/// First Golub-Kahan step: `beta u = b`, `alpha v = A^T u`.
fn start(map: &dyn LinearMap, b: &[f64]) -> Prepared {
    let mut u = b.to_vec();
    let beta = norm(&u);
    let mut v = vec![0.0; map.ncols()];
    let mut alpha = 0.0;
    if beta > 0.0 {
        scale(&mut u, 1.0 / beta);
        map.apply_adjoint(&u, &mut v);
        alpha = norm(&v);
        if alpha > 0.0 {
            scale(&mut v, 1.0 / alpha);
        }
    }
    Prepared { u, v, alpha, beta }
}

/// Continues the bidiagonalisation in place, returning the new
/// `(alpha, beta)`.
fn bidiag_step(
    map: &dyn LinearMap,
    u: &mut [f64],
    v: &mut [f64],
    alpha: f64,
    work_m: &mut [f64],
    work_n: &mut [f64],
) -> Result<(f64, f64)> {
    map.apply(v, work_m);
    for (ui, wi) in u.iter_mut().zip(work_m.iter()) {
        *ui = wi - alpha * *ui;
    }
    let beta = norm(u);
    let mut alpha_new = alpha;
    if beta > 0.0 {
        scale(u, 1.0 / beta);
        map.apply_adjoint(u, work_n);
        for (vi, wi) in v.iter_mut().zip(work_n.iter()) {
            *vi = wi - beta * *vi;
        }
        alpha_new = norm(v);
        if alpha_new > 0.0 {
            scale(v, 1.0 / alpha_new);
        }
    }
    if !(alpha_new.is_finite() && beta.is_finite()) {
        return Err(Error::NonFiniteEncountered);
    }
    Ok((alpha_new, beta))
}

fn true_residuals(map: &dyn LinearMap, b: &[f64], x: &[f64]) -> (f64, f64) {
    let mut ax = vec![0.0; map.nrows()];
    map.apply(x, &mut ax);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut atr = vec![0.0; map.ncols()];
    map.apply_adjoint(&r, &mut atr);
    (norm(&r), norm(&atr))
}

fn trivial_stats(beta: f64, stop_reason: StopReason) -> SolveStats {
    SolveStats {
        iterations: 0,
        final_residual_norm: beta,
        final_normal_residual_norm: 0.0,
        stop_reason,
        residual_history: Vec::new(),
        normal_residual_history: Vec::new(),
        true_residual_history: Vec::new(),
    }
}

/// LSQR of Paige and Saunders.
pub fn lsqr(
    map: &dyn LinearMap,
    b: &[f64],
    opts: &KrylovOptions,
) -> Result<(Vec<f64>, SolveStats)> {
    check_inputs(map, b)?;
    let (m, n) = (map.nrows(), map.ncols());
    let max_iter = opts.iteration_limit(map);
    let mut x = vec![0.0; n];

    let Prepared {
        mut u,
        mut v,
        mut alpha,
        mut beta,
    } = start(map, b);
    let bnorm = beta;
    if bnorm == 0.0 {
        return Ok((x, trivial_stats(0.0, StopReason::ResidualTol)));
    }
    if alpha == 0.0 {
        // b is orthogonal to the range of A.
        return Ok((x, trivial_stats(bnorm, StopReason::NormalTol)));
    }

    let mut w = v.clone();
    let mut phibar = beta;
    let mut rhobar = alpha;
    let mut anorm2 = 0.0f64;
    let mut work_m = vec![0.0; m];
    let mut work_n = vec![0.0; n];

    let mut stats = trivial_stats(bnorm, StopReason::MaxIter);
    for itn in 1..=max_iter {
        let alpha_old = alpha;
        (alpha, beta) = bidiag_step(map, &mut u, &mut v, alpha, &mut work_m, &mut work_n)?;
        anorm2 += alpha_old * alpha_old + beta * beta;

        let (c, s, rho) = sym_ortho(rhobar, beta);
        let theta = s * alpha;
        rhobar = -c * alpha;
        let phi = c * phibar;
        phibar *= s;
        let tau = s * phi;

        let t1 = phi / rho;
        let t2 = -theta / rho;
        for ((xi, wi), vi) in x.iter_mut().zip(w.iter_mut()).zip(&v) {
            *xi += t1 * *wi;
            *wi = vi + t2 * *wi;
        }

        let rnorm = phibar.abs();
        let arnorm = alpha * tau.abs();
        stats.iterations = itn;
        stats.final_residual_norm = rnorm;
        stats.final_normal_residual_norm = arnorm;
        stats.residual_history.push(rnorm);
        stats.normal_residual_history.push(arnorm);
        if opts.track_true_residuals {
            stats.true_residual_history.push(true_residuals(map, b, &x));
        }

        let anorm = anorm2.sqrt();
        let xnorm = norm(&x);
        let test1 = rnorm / bnorm;
        let test2 = if rnorm > 0.0 {
            arnorm / (anorm * rnorm)
        } else {
            0.0
        };
        let rtol = opts.btol + opts.atol * anorm * xnorm / bnorm;
        if test1 <= rtol {
            stats.stop_reason = StopReason::ResidualTol;
            break;
        }
        if test2 <= opts.atol {
            stats.stop_reason = StopReason::NormalTol;
            break;
        }
    }
    Ok((x, stats))
}

/// LSMR of Fong and Saunders (no damping).
pub fn lsmr(
    map: &dyn LinearMap,
    b: &[f64],
    opts: &KrylovOptions,
) -> Result<(Vec<f64>, SolveStats)> {
    check_inputs(map, b)?;
    let (m, n) = (map.nrows(), map.ncols());
    let max_iter = opts.iteration_limit(map);
    let mut x = vec![0.0; n];

    let Prepared {
        mut u,
        mut v,
        mut alpha,
        mut beta,
    } = start(map, b);
    let bnorm = beta;
    if bnorm == 0.0 {
        return Ok((x, trivial_stats(0.0, StopReason::ResidualTol)));
    }
    if alpha == 0.0 {
        return Ok((x, trivial_stats(bnorm, StopReason::NormalTol)));
    }

    let mut zetabar = alpha * beta;
    let mut alphabar = alpha;
    let mut rho = 1.0;
    let mut rhobar = 1.0;
    let mut cbar = 1.0;
    let mut sbar = 0.0;
    let mut h = v.clone();
    let mut hbar = vec![0.0; n];

    // Residual-norm estimation state.
    let mut betadd = beta;
    let mut betad = 0.0;
    let mut rhodold = 1.0;
    let mut tautildeold = 0.0;
    let mut thetatilde = 0.0;
    let mut zeta = 0.0;

    let mut norm_a2 = alpha * alpha;
    let mut work_m = vec![0.0; m];
    let mut work_n = vec![0.0; n];

    let mut stats = trivial_stats(bnorm, StopReason::MaxIter);
    for itn in 1..=max_iter {
        (alpha, beta) = bidiag_step(map, &mut u, &mut v, alpha, &mut work_m, &mut work_n)?;

        // Without damping the first rotation is the identity.
        let alphahat = alphabar;
        let rhoold = rho;
        let (c, s, rho_new) = sym_ortho(alphahat, beta);
        rho = rho_new;
        let thetanew = s * alpha;
        alphabar = c * alpha;

        let rhobarold = rhobar;
        let zetaold = zeta;
        let thetabar = sbar * rho;
        let rhotemp = cbar * rho;
        let (cb, sb, rb) = sym_ortho(rhotemp, thetanew);
        cbar = cb;
        sbar = sb;
        rhobar = rb;
        zeta = cbar * zetabar;
        zetabar *= -sbar;

        let hbar_coef = thetabar * rho / (rhoold * rhobarold);
        let x_coef = zeta / (rho * rhobar);
        let h_coef = thetanew / rho;
        for ((hb, hi), (xi, vi)) in hbar.iter_mut().zip(h.iter_mut()).zip(x.iter_mut().zip(&v)) {
            *hb = *hi - hbar_coef * *hb;
            *xi += x_coef * *hb;
            *hi = vi - h_coef * *hi;
        }

        // ||r|| estimate.
        let betaacute = betadd;
        let betahat = c * betaacute;
        betadd = -s * betaacute;
        let thetatildeold = thetatilde;
        let (ctildeold, stildeold, rhotildeold) = sym_ortho(rhodold, thetabar);
        thetatilde = stildeold * rhobar;
        rhodold = ctildeold * rhobar;
        betad = -stildeold * betad + ctildeold * betahat;
        tautildeold = (zetaold - thetatildeold * tautildeold) / rhotildeold;
        let taud = (zeta - thetatilde * tautildeold) / rhodold;
        let normr = ((betad - taud).powi(2) + betadd * betadd).sqrt();

        norm_a2 += beta * beta;
        let norm_a = norm_a2.sqrt();
        norm_a2 += alpha * alpha;

        let normar = zetabar.abs();
        stats.iterations = itn;
        stats.final_residual_norm = normr;
        stats.final_normal_residual_norm = normar;
        stats.residual_history.push(normr);
        stats.normal_residual_history.push(normar);
        if opts.track_true_residuals {
            stats.true_residual_history.push(true_residuals(map, b, &x));
        }

        if !normr.is_finite() || !normar.is_finite() {
            return Err(Error::NonFiniteEncountered);
        }
        let normx = norm(&x);
        let test1 = normr / bnorm;
        let test2 = if normr > 0.0 {
            normar / (norm_a * normr)
        } else {
            0.0
        };
        let rtol = opts.btol + opts.atol * norm_a * normx / bnorm;
        if test1 <= rtol {
            stats.stop_reason = StopReason::ResidualTol;
            break;
        }
        if test2 <= opts.atol {
            stats.stop_reason = StopReason::NormalTol;
            break;
        }
    }
    Ok((x, stats))
}
