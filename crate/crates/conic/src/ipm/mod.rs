//! Homogeneous self-dual interior-point method with Nesterov–Todd scaling
//! and a Mehrotra predictor–corrector.
//!
//! Iterates (x, y, z, s, τ, κ) follow the embedding
//!
//! ```text
//!   Eᵀy + Aᵀz + cτ = 0
//!   Ex − fτ        = 0
//!   Ax + s − bτ    = 0
//!   κ + cᵀx + fᵀy + bᵀz = 0,     (s, z) ∈ K × K,  τ, κ ≥ 0
//! ```
//!
//! so a solution with τ > 0 yields an optimal primal-dual pair and one with
//! κ > 0 yields a Farkas certificate of infeasibility.

mod kkt;
pub mod standard;

use std::time::Instant;

use crate::cones::{self, BlockScaling, ConeBlock};
use crate::error::ConicError;
use crate::program::ConicProgram;
use crate::registry::ConicSolver;
use crate::solution::{SolveResult, SolveStatus, SolverSettings};

use kkt::KktSystem;
use standard::{equilibrate, Equilibration, StandardForm, Trivial};

/// The built-in solver, registered as `ipm`.
#[derive(Debug, Clone, Copy, Default)]
pub struct InteriorPoint;

impl ConicSolver for InteriorPoint {
    fn name(&self) -> &'static str {
        "ipm"
    }

    fn solve(&self, program: &ConicProgram, settings: &SolverSettings) -> Result<SolveResult, ConicError> {
        program.validate()?;
        let start = Instant::now();
        let sf = match StandardForm::compile(program) {
            Ok(sf) => sf,
            Err(Trivial::Infeasible(msg)) => {
                return Ok(SolveResult {
                    status: SolveStatus::Infeasible,
                    primal: None,
                    objective: f64::INFINITY,
                    dual_objective: f64::INFINITY,
                    primal_residual: f64::NAN,
                    dual_residual: f64::NAN,
                    gap: f64::NAN,
                    iterations: 0,
                    wall_time: start.elapsed(),
                    certificate: Some(format!("presolve: {msg}")),
                })
            }
        };
        let mut res = Solver::new(sf, settings).run();
        res.wall_time = start.elapsed();
        Ok(res)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm_inf(a: &[f64]) -> f64 {
    a.iter().map(|v| v.abs()).fold(0.0, f64::max)
}

#[derive(Clone)]
struct Iterate {
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
    s: Vec<f64>,
    tau: f64,
    kappa: f64,
}

struct Direction {
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
    s: Vec<f64>,
    tau: f64,
    kappa: f64,
}

/// Unscaled convergence measures of the current iterate.
struct Measures {
    pres: f64,
    dres: f64,
    pcost: f64,
    dcost: f64,
    gap_abs: f64,
    gap_rel: f64,
}

struct Solver<'a> {
    /// Unscaled data (for residual checks and recovery).
    orig: StandardForm,
    /// Equilibrated data the iteration runs on.
    sf: StandardForm,
    eq: Equilibration,
    settings: &'a SolverSettings,
}

impl<'a> Solver<'a> {
    fn new(orig: StandardForm, settings: &'a SolverSettings) -> Self {
        let mut sf = orig.clone();
        let eq = equilibrate(&mut sf, settings.equilibrate_iters);
        Solver {
            orig,
            sf,
            eq,
            settings,
        }
    }

    fn degree(&self) -> usize {
        self.sf.blocks.iter().map(|b| b.degree()).sum()
    }

    fn unscale(&self, it: &Iterate) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
        let x: Vec<f64> = it.x.iter().zip(&self.eq.d).map(|(v, d)| v * d).collect();
        let y: Vec<f64> = it
            .y
            .iter()
            .zip(&self.eq.e_eq)
            .map(|(v, e)| v * e / self.eq.cost)
            .collect();
        let z: Vec<f64> = it
            .z
            .iter()
            .zip(&self.eq.e_cone)
            .map(|(v, e)| v * e / self.eq.cost)
            .collect();
        let s: Vec<f64> = it.s.iter().zip(&self.eq.e_cone).map(|(v, e)| v / e).collect();
        (x, y, z, s)
    }

    fn measures(&self, it: &Iterate) -> Measures {
        let o = &self.orig;
        let (x, y, z, s) = self.unscale(it);
        let tau = it.tau;
        let mut ex = vec![0.0; o.f.len()];
        o.e.mul(&x, &mut ex);
        let mut ax = vec![0.0; o.b.len()];
        o.a.mul(&x, &mut ax);
        let mut pr: f64 = 0.0;
        for i in 0..ex.len() {
            pr = pr.max((ex[i] / tau - o.f[i]).abs());
        }
        for i in 0..ax.len() {
            pr = pr.max(((ax[i] + s[i]) / tau - o.b[i]).abs());
        }
        let mut rx = vec![0.0; o.num_vars()];
        o.e.mul_t_add(&y, &mut rx);
        o.a.mul_t_add(&z, &mut rx);
        let mut dr: f64 = 0.0;
        for j in 0..rx.len() {
            dr = dr.max((rx[j] / tau + o.c[j]).abs());
        }
        // residuals relative to the data and to the terms that produce them
        let bnorm = norm_inf(&o.b)
            .max(norm_inf(&o.f))
            .max(norm_inf(&ax) / tau)
            .max(norm_inf(&ex) / tau)
            .max(norm_inf(&s) / tau);
        let mut ety = vec![0.0; o.num_vars()];
        o.e.mul_t_add(&y, &mut ety);
        let mut atz = vec![0.0; o.num_vars()];
        o.a.mul_t_add(&z, &mut atz);
        let cnorm = norm_inf(&o.c).max(norm_inf(&ety) / tau).max(norm_inf(&atz) / tau);
        let pcost = dot(&o.c, &x) / tau;
        let dcost = -(dot(&o.f, &y) + dot(&o.b, &z)) / tau;
        let gap_abs = (pcost - dcost).abs().min(dot(&s, &z) / (tau * tau));
        let gap_rel = gap_abs / pcost.abs().min(dcost.abs()).max(1.0);
        Measures {
            pres: pr / (1.0 + bnorm),
            dres: dr / (1.0 + cnorm),
            pcost,
            dcost,
            gap_abs,
            gap_rel,
        }
    }

    fn result(&self, status: SolveStatus, it: &Iterate, iters: usize, certificate: Option<String>) -> SolveResult {
        let m = self.measures(it);
        let (x, _, _, _) = self.unscale(it);
        let primal = matches!(status, SolveStatus::Optimal | SolveStatus::AlmostOptimal)
            .then(|| self.orig.expand(&x.iter().map(|v| v / it.tau).collect::<Vec<_>>()));
        let (objective, dual_objective) = match status {
            SolveStatus::Infeasible => (f64::INFINITY, f64::INFINITY),
            SolveStatus::Unbounded => (f64::NEG_INFINITY, f64::NEG_INFINITY),
            _ => (m.pcost + self.orig.c0, m.dcost + self.orig.c0),
        };
        SolveResult {
            status,
            primal,
            objective,
            dual_objective,
            primal_residual: m.pres,
            dual_residual: m.dres,
            gap: m.gap_rel,
            iterations: iters,
            wall_time: Default::default(),
            certificate,
        }
    }

    /// Farkas checks on the unscaled directions.
    fn infeasibility(&self, it: &Iterate) -> Option<(SolveStatus, String)> {
        let o = &self.orig;
        let tol = self.settings.infeas;
        if it.tau >= it.kappa {
            return None;
        }
        let (x, y, z, s) = self.unscale(it);
        let hz = dot(&o.f, &y) + dot(&o.b, &z);
        if hz < 0.0 {
            let mut r = vec![0.0; o.num_vars()];
            o.e.mul_t_add(&y, &mut r);
            o.a.mul_t_add(&z, &mut r);
            let scale = norm_inf(&y).max(norm_inf(&z)).max(1e-300);
            if -hz / scale > tol && norm_inf(&r) <= tol * -hz {
                return Some((
                    SolveStatus::Infeasible,
                    format!("dual ray with bᵀz + fᵀy = {:.3e}", hz / scale),
                ));
            }
        }
        let cx = dot(&o.c, &x);
        if cx < 0.0 {
            let mut ex = vec![0.0; o.f.len()];
            o.e.mul(&x, &mut ex);
            let mut ax = vec![0.0; o.b.len()];
            o.a.mul(&x, &mut ax);
            let scale = norm_inf(&x).max(1e-300);
            let mut r: f64 = norm_inf(&ex);
            for i in 0..ax.len() {
                r = r.max((ax[i] + s[i]).abs());
            }
            if -cx / scale > tol && r <= tol * -cx {
                return Some((
                    SolveStatus::Unbounded,
                    format!("primal ray with cᵀx = {:.3e}", cx / scale),
                ));
            }
        }
        None
    }

    fn initial_point(&self, kkt: &mut KktSystem) -> Result<Iterate, ()> {
        let sf = &self.sf;
        let (n, p, m) = (sf.num_vars(), sf.f.len(), sf.b.len());
        kkt.factor_identity(&sf.blocks).map_err(|_| ())?;
        let mut rhs = vec![0.0; n + p + m];
        rhs[n..n + p].copy_from_slice(&sf.f);
        rhs[n + p..].copy_from_slice(&sf.b);
        kkt.solve(&mut rhs);
        let x = rhs[..n].to_vec();
        let mut s: Vec<f64> = rhs[n + p..].iter().map(|v| -v).collect();
        let mut rhs = vec![0.0; n + p + m];
        for j in 0..n {
            rhs[j] = -sf.c[j];
        }
        kkt.solve(&mut rhs);
        let y = rhs[n..n + p].to_vec();
        let mut z = rhs[n + p..].to_vec();
        shift_into_cone(&sf.blocks, &mut s);
        shift_into_cone(&sf.blocks, &mut z);
        Ok(Iterate {
            x,
            y,
            z,
            s,
            tau: 1.0,
            kappa: 1.0,
        })
    }

    fn run(&self) -> SolveResult {
        let sf = &self.sf;
        let (n, p, m) = (sf.num_vars(), sf.f.len(), sf.b.len());
        let nu = self.degree() as f64;
        let mut kkt = KktSystem::new(sf, self.settings.static_reg, self.settings.refine_steps);
        let mut it = match self.initial_point(&mut kkt) {
            Ok(it) => it,
            Err(()) => {
                let dummy = Iterate {
                    x: vec![0.0; n],
                    y: vec![0.0; p],
                    z: vec![1.0; m],
                    s: vec![1.0; m],
                    tau: 1.0,
                    kappa: 1.0,
                };
                return self.result(SolveStatus::NumericalFailure, &dummy, 0, None);
            }
        };

        // right-hand side of the τ-column system is fixed: [−c; f; b]
        let mut rhs1 = vec![0.0; n + p + m];
        let mut best_status = SolveStatus::IterationLimit;
        let mut stalls = 0;
        let mut iters = self.settings.max_iters;
        // best iterate by its worst tolerance ratio, kept for stalls
        let mut best: Option<(f64, Iterate, usize)> = None;
        for iter in 0..=self.settings.max_iters {
            let meas = self.measures(&it);
            let st = self.settings;
            if meas.pres <= st.feas && meas.dres <= st.feas && (meas.gap_abs <= st.gap || meas.gap_rel <= st.gap) {
                return self.result(SolveStatus::Optimal, &it, iter, None);
            }
            let score = (meas.pres / st.reduced_feas)
                .max(meas.dres / st.reduced_feas)
                .max(meas.gap_abs.min(meas.gap_rel) / st.reduced_gap);
            match &best {
                Some((b, _, _)) if *b <= score => {
                    // precision loss after near convergence: stop early
                    if *b <= 1.0 && score > 1e3 * b.max(1e-6) {
                        iters = iter;
                        best_status = SolveStatus::NumericalFailure;
                        break;
                    }
                }
                _ => best = Some((score, it.clone(), iter)),
            }
            if let Some((status, cert)) = self.infeasibility(&it) {
                return self.result(status, &it, iter, Some(cert));
            }
            if iter == self.settings.max_iters {
                break;
            }
            iters = iter + 1;

            // residuals in scaled space
            let mut rx = vec![0.0; n];
            sf.e.mul_t_add(&it.y, &mut rx);
            sf.a.mul_t_add(&it.z, &mut rx);
            for j in 0..n {
                rx[j] += sf.c[j] * it.tau;
            }
            let mut ry = vec![0.0; p];
            sf.e.mul(&it.x, &mut ry);
            for i in 0..p {
                ry[i] = sf.f[i] * it.tau - ry[i];
            }
            let mut rz = vec![0.0; m];
            sf.a.mul(&it.x, &mut rz);
            for i in 0..m {
                rz[i] += it.s[i] - sf.b[i] * it.tau;
            }
            let rtau = it.kappa + dot(&sf.c, &it.x) + dot(&sf.f, &it.y) + dot(&sf.b, &it.z);
            let mu = (dot(&it.s, &it.z) + it.tau * it.kappa) / (nu + 1.0);

            let scalings: Vec<BlockScaling> = sf
                .blocks
                .iter()
                .map(|b| cones::nt_scaling(b, &it.s, &it.z))
                .collect();
            let mut lambda = vec![0.0; m];
            for (b, w) in sf.blocks.iter().zip(&scalings) {
                let r = b.range();
                w.mul(&it.z[r.clone()], &mut lambda[r]);
            }
            if kkt.factor_scaled(&sf.blocks, &scalings).is_err() {
                best_status = SolveStatus::NumericalFailure;
                break;
            }
            rhs1[..n].iter_mut().zip(&sf.c).for_each(|(r, c)| *r = -c);
            rhs1[n..n + p].copy_from_slice(&sf.f);
            rhs1[n + p..].copy_from_slice(&sf.b);
            let mut sol1 = rhs1.clone();
            kkt.solve(&mut sol1);

            // predictor
            let mut ds = vec![0.0; m];
            for b in &sf.blocks {
                let r = b.range();
                cones::jordan_product(b, &lambda[r.clone()], &lambda[r.clone()], &mut ds[r]);
            }
            let dkappa = it.kappa * it.tau;
            let aff = self.direction(
                &mut kkt, &it, &scalings, &lambda, &sol1, (&rx, &ry, &rz, rtau), 1.0, &ds, dkappa,
            );
            let alpha_aff = self.step_length(&it, &aff);
            let sigma = (1.0 - alpha_aff).powi(3);

            // corrector
            let mut ds = vec![0.0; m];
            for (b, w) in sf.blocks.iter().zip(&scalings) {
                let r = b.range();
                let mut t1 = vec![0.0; r.len()];
                let mut t2 = vec![0.0; r.len()];
                w.mul_inv(&aff.s[r.clone()], &mut t1);
                w.mul(&aff.z[r.clone()], &mut t2);
                let mut cross = vec![0.0; r.len()];
                cones::jordan_product(b, &t1, &t2, &mut cross);
                let mut ll = vec![0.0; r.len()];
                cones::jordan_product(b, &lambda[r.clone()], &lambda[r.clone()], &mut ll);
                for (k, i) in r.clone().enumerate() {
                    ds[i] = ll[k] + cross[k];
                }
                cones::add_identity(b, &mut ds, -sigma * mu);
            }
            let dkappa = it.kappa * it.tau + aff.kappa * aff.tau - sigma * mu;
            let dir = self.direction(
                &mut kkt,
                &it,
                &scalings,
                &lambda,
                &sol1,
                (&rx, &ry, &rz, rtau),
                1.0 - sigma,
                &ds,
                dkappa,
            );
            let alpha = (0.99 * self.step_length(&it, &dir)).min(1.0);
            if alpha < 1e-10 {
                stalls += 1;
                if stalls > 3 {
                    best_status = SolveStatus::NumericalFailure;
                    break;
                }
            } else {
                stalls = 0;
            }
            for j in 0..n {
                it.x[j] += alpha * dir.x[j];
            }
            for i in 0..p {
                it.y[i] += alpha * dir.y[i];
            }
            for i in 0..m {
                it.z[i] += alpha * dir.z[i];
                it.s[i] += alpha * dir.s[i];
            }
            it.tau += alpha * dir.tau;
            it.kappa += alpha * dir.kappa;
            if !(it.tau.is_finite() && it.kappa.is_finite()) {
                best_status = SolveStatus::NumericalFailure;
                break;
            }
            // keep the embedding normalized for the infeasible case
            let scale = it.tau + it.kappa;
            if scale > 1e8 || scale < 1e-8 {
                let k = 1.0 / scale;
                it.x.iter_mut().for_each(|v| *v *= k);
                it.y.iter_mut().for_each(|v| *v *= k);
                it.z.iter_mut().for_each(|v| *v *= k);
                it.s.iter_mut().for_each(|v| *v *= k);
                it.tau *= k;
                it.kappa *= k;
            }
        }
        if let Some((score, b, at)) = best {
            if score <= 1.0 {
                let mut r = self.result(SolveStatus::AlmostOptimal, &b, at, None);
                r.certificate = Some(format!("{best_status} after {iters} iterations"));
                return r;
            }
        }
        self.result(best_status, &it, iters, None)
    }

    #[allow(clippy::too_many_arguments)]
    fn direction(
        &self,
        kkt: &mut KktSystem,
        it: &Iterate,
        scalings: &[BlockScaling],
        lambda: &[f64],
        sol1: &[f64],
        (rx, ry, rz, rtau): (&[f64], &[f64], &[f64], f64),
        frac: f64,
        ds: &[f64],
        dkappa: f64,
    ) -> Direction {
        let sf = &self.sf;
        let (n, p, m) = (sf.num_vars(), sf.f.len(), sf.b.len());
        // λ \ d_s and W(λ \ d_s)
        let mut ldiv = vec![0.0; m];
        let mut wl = vec![0.0; m];
        for (b, w) in sf.blocks.iter().zip(scalings) {
            let r = b.range();
            cones::jordan_div(b, &lambda[r.clone()], &ds[r.clone()], &mut ldiv[r.clone()]);
            w.mul(&ldiv[r.clone()], &mut wl[r]);
        }
        let mut rhs = vec![0.0; n + p + m];
        for j in 0..n {
            rhs[j] = -frac * rx[j];
        }
        for i in 0..p {
            rhs[n + i] = frac * ry[i];
        }
        for i in 0..m {
            rhs[n + p + i] = -frac * rz[i] + wl[i];
        }
        kkt.solve(&mut rhs);
        let (x1, rest1) = sol1.split_at(n);
        let (y1, z1) = rest1.split_at(p);
        let (x2, rest2) = rhs.split_at(n);
        let (y2, z2) = rest2.split_at(p);
        let num = -frac * rtau + dkappa / it.tau - dot(&sf.c, x2) - dot(&sf.f, y2) - dot(&sf.b, z2);
        let den = dot(&sf.c, x1) + dot(&sf.f, y1) + dot(&sf.b, z1) - it.kappa / it.tau;
        let dtau = num / den;
        let dx: Vec<f64> = (0..n).map(|j| x2[j] + dtau * x1[j]).collect();
        let dy: Vec<f64> = (0..p).map(|i| y2[i] + dtau * y1[i]).collect();
        let dz: Vec<f64> = (0..m).map(|i| z2[i] + dtau * z1[i]).collect();
        // Δs = −W(λ\d_s + WΔz)
        let mut dsv = vec![0.0; m];
        for (b, w) in sf.blocks.iter().zip(scalings) {
            let r = b.range();
            let mut wdz = vec![0.0; r.len()];
            w.mul(&dz[r.clone()], &mut wdz);
            let inner: Vec<f64> = r.clone().zip(&wdz).map(|(i, v)| ldiv[i] + v).collect();
            let mut out = vec![0.0; r.len()];
            w.mul(&inner, &mut out);
            for (k, i) in r.enumerate() {
                dsv[i] = -out[k];
            }
        }
        let dkap = -(dkappa + it.kappa * dtau) / it.tau;
        Direction {
            x: dx,
            y: dy,
            z: dz,
            s: dsv,
            tau: dtau,
            kappa: dkap,
        }
    }

    fn step_length(&self, it: &Iterate, d: &Direction) -> f64 {
        let mut a: f64 = 1.0 / 0.99;
        for b in &self.sf.blocks {
            let r = b.range();
            a = a.min(cones::step_to_boundary(b, &it.s[r.clone()], &d.s[r.clone()], a));
            a = a.min(cones::step_to_boundary(b, &it.z[r.clone()], &d.z[r], a));
        }
        if d.tau < 0.0 {
            a = a.min(-it.tau / d.tau);
        }
        if d.kappa < 0.0 {
            a = a.min(-it.kappa / d.kappa);
        }
        a.min(1.0)
    }
}

fn shift_into_cone(blocks: &[ConeBlock], u: &mut [f64]) {
    if blocks.is_empty() {
        return;
    }
    let min_eig = blocks
        .iter()
        .map(|b| cones::min_eigen(b, u))
        .fold(f64::INFINITY, f64::min);
    if min_eig <= 1e-8 {
        let shift = 1.0 - min_eig;
        for b in blocks {
            cones::add_identity(b, u, shift);
        }
    }
}
