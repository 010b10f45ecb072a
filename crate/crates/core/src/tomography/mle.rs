//! Poissonian maximum-likelihood reconstruction.
//!
//! The unnormalized state is `ρ̃ = L L†` with `L` lower triangular and a real
//! diagonal, so every iterate is PSD. Mean counts are `μᵢ = ⟨pᵢ|ρ̃|pᵢ⟩ = ‖L† pᵢ‖²`
//! and the objective is `Σ cᵢ ln μᵢ − μᵢ`; the trace of `ρ̃` absorbs the
//! unknown count scale. Its gradient with respect to `L` is `2 R L` with
//! `R = Σ (cᵢ/μᵢ − 1) |pᵢ⟩⟨pᵢ|`. Ascent uses L-BFGS with Armijo backtracking.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{linear_inversion_weighted, tomography_settings, TomographySet};
use crate::error::{Error, Result};
use crate::state::{c, DensityMatrix, C64};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 5000;
const LBFGS_MEMORY: usize = 10;
const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;
/// Consecutive small relative changes required before stopping.
const QUIET_STEPS: usize = 3;

#[derive(Debug, Clone)]
pub struct MleOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Starting state; linear inversion when absent.
    pub start: Option<DensityMatrix>,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            start: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MleResult {
    pub rho: DensityMatrix,
    /// Log-likelihood of `rho` at its best count scale.
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    pub initializer: String,
    /// Objective after the start and after every accepted step.
    pub history: Vec<f64>,
}

pub fn mle_reconstruct(t: &TomographySet, tol: f64, max_iter: usize) -> Result<MleResult> {
    let counts: Vec<f64> = t.counts().iter().map(|&c| c as f64).collect();
    mle_reconstruct_from(
        t.n(),
        &counts,
        &MleOptions {
            tol,
            max_iter,
            start: None,
        },
    )
}

struct Problem {
    dim: usize,
    kets: DMatrix<C64>,
    counts: Vec<f64>,
}

impl Problem {
    fn new(n: usize, counts: &[f64]) -> Result<Self> {
        let projectors = tomography_settings(n)?;
        if counts.len() != projectors.len() {
            return Err(Error::LengthMismatch {
                expected: projectors.len(),
                actual: counts.len(),
            });
        }
        if counts.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::InvalidParameter("counts must be finite and nonnegative".into()));
        }
        let dim = 1usize << n;
        let columns: Vec<DVector<C64>> = projectors.iter().map(|p| p.ket().as_dvector().clone()).collect();
        Ok(Self {
            dim,
            kets: DMatrix::from_columns(&columns),
            counts: counts.to_vec(),
        })
    }

    fn means(&self, rho_tilde: &DMatrix<C64>) -> Vec<f64> {
        let k = &self.kets;
        (0..k.ncols())
            .map(|i| {
                let p = k.column(i);
                p.dotc(&(rho_tilde * p)).re
            })
            .collect()
    }

    fn means_from_factor(&self, l: &DMatrix<C64>) -> Vec<f64> {
        let v = l.adjoint() * &self.kets;
        v.column_iter().map(|col| col.norm_squared()).collect()
    }

    fn objective(&self, mu: &[f64]) -> f64 {
        let mut total = 0.0;
        for (&c, &m) in self.counts.iter().zip(mu) {
            if c > 0.0 {
                if m <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                total += c * m.ln();
            }
            total -= m;
        }
        total
    }

    fn value(&self, l: &DMatrix<C64>) -> f64 {
        self.objective(&self.means_from_factor(l))
    }

    fn value_grad(&self, l: &DMatrix<C64>) -> (f64, DMatrix<C64>) {
        let mu = self.means_from_factor(l);
        let value = self.objective(&mu);
        let mut weighted = self.kets.clone();
        for (i, mut col) in weighted.column_iter_mut().enumerate() {
            let w = if mu[i] > 0.0 { self.counts[i] / mu[i] - 1.0 } else { -1.0 };
            col.scale_mut(w);
        }
        let r = weighted * self.kets.adjoint();
        (value, (r * l) * c(2.0, 0.0))
    }

    fn pack(&self, m: &DMatrix<C64>) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.dim * self.dim);
        for i in 0..self.dim {
            for j in 0..i {
                x.push(m[(i, j)].re);
                x.push(m[(i, j)].im);
            }
            x.push(m[(i, i)].re);
        }
        x
    }

    fn unpack(&self, x: &[f64]) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        let mut k = 0;
        for i in 0..self.dim {
            for j in 0..i {
                m[(i, j)] = c(x[k], x[k + 1]);
                k += 2;
            }
            m[(i, i)] = c(x[k], 0.0);
            k += 1;
        }
        m
    }

    /// `(−objective, −gradient)` in packed coordinates.
    fn eval(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let (v, g) = self.value_grad(&self.unpack(x));
        (-v, self.pack(&g).into_iter().map(|g| -g).collect())
    }

    /// Scale at which `s·ρ` maximizes the likelihood: `s = Σcᵢ / Σ⟨pᵢ|ρ|pᵢ⟩`.
    fn best_scale(&self, rho: &DMatrix<C64>) -> f64 {
        self.counts.iter().sum::<f64>() / self.means(rho).iter().sum::<f64>()
    }

    fn profile(&self, rho: &DMatrix<C64>) -> f64 {
        let s = self.best_scale(rho);
        let mu: Vec<f64> = self.means(rho).into_iter().map(|m| s * m).collect();
        self.objective(&mu)
    }
}

/// Log-likelihood of a normalized state at its best count scale.
pub fn log_likelihood(counts: &[f64], rho: &DensityMatrix) -> Result<f64> {
    let problem = Problem::new(rho.n(), counts)?;
    if counts.iter().sum::<f64>() <= 0.0 {
        return Err(Error::DegenerateData("all counts are zero".into()));
    }
    Ok(problem.profile(rho.matrix()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn lbfgs_direction(g: &[f64], memory: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(memory.len());
    for (s, y, rho) in memory.iter().rev() {
        let a = rho * dot(s, &q);
        q.iter_mut().zip(y).for_each(|(q, y)| *q -= a * y);
        alphas.push(a);
    }
    if let Some((s, y, _)) = memory.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|q| *q *= gamma);
    }
    for ((s, y, rho), a) in memory.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        q.iter_mut().zip(s).for_each(|(q, s)| *q += (a - b) * s);
    }
    q.iter_mut().for_each(|q| *q = -*q);
    q
}

fn initial_state(problem: &Problem, n: usize, start: Option<&DensityMatrix>) -> (DMatrix<C64>, String) {
    if let Some(rho) = start {
        return (rho.matrix().clone(), "supplied state".into());
    }
    match linear_inversion_weighted(n, problem.counts.iter().copied()).and_then(|e| e.project_to_psd()) {
        Ok(rho) => (rho.matrix().clone(), "linear inversion, PSD-projected".into()),
        Err(_) => (
            DensityMatrix::maximally_mixed(n).matrix().clone(),
            "maximally mixed (linear inversion unavailable)".into(),
        ),
    }
}

/// Reconstruction from real-valued counts (expected counts are allowed).
pub fn mle_reconstruct_from(n: usize, counts: &[f64], opts: &MleOptions) -> Result<MleResult> {
    let problem = Problem::new(n, counts)?;
    if counts.iter().sum::<f64>() <= 0.0 {
        return Err(Error::DegenerateData("all counts are zero".into()));
    }
    if let Some(s) = &opts.start {
        if s.n() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: s.n(),
            });
        }
    }
    if !(opts.tol > 0.0) || opts.max_iter == 0 {
        return Err(Error::InvalidParameter("tol and max_iter must be positive".into()));
    }

    let (rho0, mut initializer) = initial_state(&problem, n, opts.start.as_ref());
    let dim = problem.dim;
    let flat = DMatrix::<C64>::identity(dim, dim) / c(dim as f64, 0.0);
    let mut start = None;
    for eps in [0.0, 1e-6, 1e-3] {
        let mixed = &rho0 * c(1.0 - eps, 0.0) + &flat * c(eps, 0.0);
        let mixed = (&mixed + mixed.adjoint()) * c(0.5, 0.0);
        let scaled = &mixed * c(problem.best_scale(&mixed), 0.0);
        if let Some(chol) = scaled.cholesky() {
            let l = chol.l();
            if problem.value(&l).is_finite() {
                if eps > 0.0 {
                    initializer.push_str(&format!(", mixed with {eps:e}·I/d"));
                }
                start = Some(l);
                break;
            }
        }
    }
    let l0 = start.ok_or_else(|| Error::DegenerateData("no feasible starting point".into()))?;

    let mut x = problem.pack(&l0);
    let (mut f, mut g) = problem.eval(&x);
    let mut history = vec![-f];
    let mut memory: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut converged = false;
    let mut quiet = 0;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        let gnorm = dot(&g, &g).sqrt();
        if gnorm == 0.0 {
            converged = true;
            break;
        }
        let mut d = lbfgs_direction(&g, &memory);
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            memory.clear();
            d = g.iter().map(|v| -v).collect();
            slope = -gnorm * gnorm;
        }
        let mut alpha = if memory.is_empty() {
            (1.0 / gnorm).min(1.0) * (dot(&x, &x).sqrt().max(1.0))
        } else {
            1.0
        };
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(x, d)| x + alpha * d).collect();
            let (ft, gt) = problem.eval(&trial);
            if ft.is_finite() && ft <= f + ARMIJO * alpha * slope {
                accepted = Some((trial, ft, gt));
                break;
            }
            alpha *= 0.5;
        }
        let Some((xn, fnew, gn)) = accepted else {
            if memory.is_empty() {
                // no ascent direction left at working precision
                converged = true;
                break;
            }
            memory.clear();
            continue;
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() {
            if memory.len() == LBFGS_MEMORY {
                memory.pop_front();
            }
            memory.push_back((s, y, 1.0 / sy));
        }
        let rel = (fnew - f).abs() / f.abs().max(1.0);
        x = xn;
        f = fnew;
        g = gn;
        history.push(-f);
        if rel < opts.tol {
            quiet += 1;
            if quiet >= QUIET_STEPS {
                converged = true;
                break;
            }
        } else {
            quiet = 0;
        }
    }

    let l = problem.unpack(&x);
    let rho_tilde = &l * l.adjoint();
    let trace = rho_tilde.trace().re;
    let mat = rho_tilde / c(trace, 0.0);
    let mat = (&mat + mat.adjoint()) * c(0.5, 0.0);
    let rho = DensityMatrix::new(n, mat)?;
    let log_likelihood = problem.profile(rho.matrix());
    Ok(MleResult {
        rho,
        log_likelihood,
        iterations,
        converged,
        initializer,
        history,
    })
}
