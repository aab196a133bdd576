//! Multistart augmented-Lagrangian search in unit-cube coordinates.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::halton::halton;
use super::problem::{max_violation_signed, report_value, Evaluator, Outcome};
use super::{PenaltyTrace, SolveReport, SolveStatus, SolverConfig};
use crate::model::ContinuousPoint;
use crate::nlp::Objective;

const FD_STEP: f64 = 1e-6;
const MAX_PENALTY: f64 = 1e9;
/// violation under which an iterate is worth a feasibility projection
const NEAR_FEASIBLE: f64 = 1e-4;
/// final inner stationarity tolerance
const OMEGA_MIN: f64 = 1e-8;
/// penalty stages every start gets before screening
const SCREEN_STAGES: u32 = 3;
/// minimum number of screened starts run to convergence
const FINISHED_STARTS: usize = 4;
/// unit-cube distance below which two screened starts count as one basin
const DISTINCT: f64 = 0.02;

fn violation(g: &[f64]) -> f64 {
    max_violation_signed(g).max(0.0)
}

struct Candidate {
    out: Outcome,
    feasible: bool,
    converged: bool,
}

/// Feasible beats infeasible; then lower objective; near-ties go to the
/// wider door, then the longer window.
fn better(a: &Candidate, b: &Candidate) -> bool {
    if a.feasible != b.feasible {
        return a.feasible;
    }
    if !a.feasible {
        return a.out.max_residual < b.out.max_residual;
    }
    let (fa, fb) = (a.out.objective, b.out.objective);
    let tie = 1e-9 * (fa.abs().max(fb.abs()) + 1e-12);
    if fa < fb - tie {
        return true;
    }
    if fa > fb + tie {
        return false;
    }
    match a.out.point.w_do.total_cmp(&b.out.point.w_do) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => a.out.point.l_wi > b.out.point.l_wi,
    }
}

pub(crate) fn multistart(
    ev: &Evaluator,
    cfg: &SolverConfig,
    seed: u64,
    hints: &[(ContinuousPoint, f64)],
) -> SolveReport {
    let dim = ev.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();

    if ev.is_empty_box() {
        let out = ev.outcome(&vec![0.5; dim]);
        return report(ev, &out, SolveStatus::Infeasible, 0, seed, Vec::new());
    }

    let mut starts: Vec<Vec<f64>> = hints.iter().map(|(p, b)| ev.to_unit(p, *b)).collect();
    for k in 0..cfg.starts as u64 {
        starts.push(
            (0..dim)
                .map(|i| (halton(k + 1, i) + shift[i]).fract())
                .collect(),
        );
    }

    // Screen every start with a few penalty stages, then finish the best
    // few distinct ones.
    let mut runs: Vec<Run> = starts.iter().map(|u0| Run::new(ev, u0, cfg)).collect();
    let used = runs.len() as u32;
    let feasibility = ev.problem.objective == Objective::Feasibility;
    let mut best: Option<Candidate> = None;
    let mut traces = Vec::with_capacity(runs.len());
    if feasibility {
        for mut run in runs {
            run.advance(ev, cfg, cfg.max_outer);
            let (cand, trace) = run.finish(ev, cfg);
            traces.push(trace);
            let stop = cand.feasible;
            if best.as_ref().is_none_or(|b| better(&cand, b)) {
                best = Some(cand);
            }
            if stop {
                break;
            }
        }
    } else {
        for run in runs.iter_mut() {
            run.advance(ev, cfg, SCREEN_STAGES);
        }
        let mut order: Vec<usize> = (0..runs.len()).collect();
        order.sort_by(|&a, &b| runs[a].score().total_cmp(&runs[b].score()).then(a.cmp(&b)));
        let keep = (runs.len() / 8).max(FINISHED_STARTS).min(runs.len());
        let mut chosen: Vec<usize> = Vec::with_capacity(keep);
        for &i in &order {
            if chosen.len() == keep {
                break;
            }
            let distinct = chosen.iter().all(|&j| {
                runs[i].u.iter().zip(&runs[j].u).any(|(a, b)| (a - b).abs() > DISTINCT)
            });
            if distinct {
                chosen.push(i);
            }
        }
        chosen.sort_unstable();
        let mut slots: Vec<Option<Run>> = runs.into_iter().map(Some).collect();
        for (i, slot) in slots.iter_mut().enumerate() {
            let mut run = slot.take().expect("each run taken once");
            if chosen.contains(&i) {
                run.advance(ev, cfg, cfg.max_outer);
                let (cand, trace) = run.finish(ev, cfg);
                if best.as_ref().is_none_or(|b| better(&cand, b)) {
                    best = Some(cand);
                }
                traces.push(trace);
            } else {
                traces.push(run.trace);
            }
        }
    }

    let best = best.expect("at least one start");
    let status = if best.feasible {
        if best.converged {
            SolveStatus::OptimalLocal
        } else {
            SolveStatus::Feasible
        }
    } else if !best.out.objective.is_finite() || !best.out.max_residual.is_finite() {
        SolveStatus::NumericFailure
    } else {
        SolveStatus::Infeasible
    };
    report(ev, &best.out, status, used, seed, traces)
}

fn report(
    ev: &Evaluator,
    out: &Outcome,
    status: SolveStatus,
    starts_used: u32,
    seed: u64,
    traces: Vec<PenaltyTrace>,
) -> SolveReport {
    SolveReport {
        status,
        point: out.point,
        b_fo: out.b_fo,
        objective_value: report_value(ev.problem.objective, out.objective),
        cost: out.cost,
        ee: out.ee / 1000.0,
        max_residual: out.max_residual,
        starts_used,
        seed,
        traces,
    }
}

fn candidate(ev: &Evaluator, u: &[f64], tol: f64, converged: bool) -> Candidate {
    let out = ev.outcome(u);
    let feasible = out.max_residual <= tol && out.objective.is_finite();
    Candidate {
        out,
        feasible,
        converged,
    }
}

/// State of one local search between penalty stages.
struct Run {
    u: Vec<f64>,
    f: f64,
    viol: f64,
    lam: Vec<f64>,
    rho: f64,
    omega: f64,
    stage_viol: f64,
    stages: u32,
    converged: bool,
    best_feasible: Option<(f64, Vec<f64>)>,
    /// lowest-objective iterate within `NEAR_FEASIBLE`, kept for polishing
    near: Option<(f64, Vec<f64>)>,
    stalled: u32,
    trace: PenaltyTrace,
}

impl Run {
    fn new(ev: &Evaluator, u0: &[f64], cfg: &SolverConfig) -> Self {
        let mut g = vec![0.0; ev.m];
        let u: Vec<f64> = u0.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        let f = ev.evaluate(&u, &mut g);
        let viol = violation(&g);
        Run {
            u,
            f,
            viol,
            lam: vec![0.0; ev.m],
            rho: cfg.initial_penalty,
            omega: 1e-2,
            stage_viol: viol,
            stages: 0,
            converged: false,
            best_feasible: None,
            near: None,
            stalled: 0,
            trace: PenaltyTrace::default(),
        }
    }

    fn done(&self, cfg: &SolverConfig) -> bool {
        self.converged || self.stalled >= 3 || self.stages >= cfg.max_outer
    }

    /// Screening score: objective plus a heavy violation charge.
    fn score(&self) -> f64 {
        let s = self.f + 100.0 * self.viol;
        if s.is_nan() {
            f64::INFINITY
        } else {
            s
        }
    }

    /// Runs penalty stages until `limit` stages have been done in total or
    /// the search settles. An iterate is accepted only if its violation does
    /// not exceed the accepted one, so the recorded violations never rise.
    fn advance(&mut self, ev: &Evaluator, cfg: &SolverConfig, limit: u32) {
        let tol = cfg.tolerance;
        let mut g = vec![0.0; ev.m];
        while !self.done(cfg) && self.stages < limit {
            self.stages += 1;
            let floor = self.omega <= OMEGA_MIN;
            let (u_new, stationary) =
                inner(ev, &self.u, &self.lam, self.rho, cfg.max_iterations, self.omega);
            self.omega = (self.omega * 0.1).max(OMEGA_MIN);
            let f_new = ev.evaluate(&u_new, &mut g);
            let viol_new = violation(&g);
            self.trace.penalties.push(self.rho);
            if !f_new.is_finite() || !viol_new.is_finite() {
                self.rho = (self.rho * cfg.penalty_growth).min(MAX_PENALTY);
                self.trace.violations.push(self.viol);
                continue;
            }
            if viol_new <= tol
                && self.best_feasible.as_ref().is_none_or(|(bf, _)| f_new < *bf)
            {
                self.best_feasible = Some((f_new, u_new.clone()));
            }
            if viol_new <= NEAR_FEASIBLE && self.near.as_ref().is_none_or(|(bf, _)| f_new < *bf) {
                self.near = Some((f_new, u_new.clone()));
            }
            let still = (f_new - self.f).abs() <= 1e-10 * (1.0 + f_new.abs())
                && (viol_new - self.viol).abs() <= 1e-3 * self.viol.max(tol);
            self.stalled = if still { self.stalled + 1 } else { 0 };
            for (l, gi) in self.lam.iter_mut().zip(&g) {
                *l = (*l + self.rho * gi).max(0.0);
            }
            let settled = floor
                && (stationary || self.stages >= 8)
                && viol_new <= 0.1 * tol
                && self.viol <= 0.1 * tol
                && (f_new - self.f).abs() <= 1e-10 * (1.0 + f_new.abs());
            if viol_new <= self.viol {
                self.u = u_new;
                self.viol = viol_new;
                self.f = f_new;
            }
            self.trace.violations.push(self.viol);
            if settled {
                self.converged = true;
                break;
            }
            if viol_new > 0.1 * tol && viol_new > 0.25 * self.stage_viol {
                self.rho = (self.rho * cfg.penalty_growth).min(MAX_PENALTY);
            }
            self.stage_viol = viol_new;
        }
    }

    /// Feasibility projection of the accepted iterate and of the best
    /// nearly feasible one; the best of those and any feasible stage result.
    fn finish(self, ev: &Evaluator, cfg: &SolverConfig) -> (Candidate, PenaltyTrace) {
        let tol = cfg.tolerance;
        let polished = polish(ev, &self.u, tol);
        let mut cand = candidate(ev, &polished, tol, self.converged);
        let near = self.near.map(|(_, u)| polish(ev, &u, tol));
        for u in self.best_feasible.iter().map(|(_, u)| u).chain(near.iter()) {
            let alt = candidate(ev, u, tol, self.converged);
            if better(&alt, &cand) {
                cand = alt;
            }
        }
        (cand, self.trace)
    }
}

/// Augmented-Lagrangian merit (PHR form for inequalities).
fn merit(ev: &Evaluator, u: &[f64], lam: &[f64], rho: f64, g: &mut [f64]) -> f64 {
    let f = ev.evaluate(u, g);
    let mut pen = 0.0;
    for i in 0..g.len() {
        let t = (lam[i] + rho * g[i]).max(0.0);
        pen += t * t - lam[i] * lam[i];
    }
    let v = f + pen / (2.0 * rho);
    if v.is_finite() {
        v
    } else {
        f64::INFINITY
    }
}

/// Finite-difference gradient: forward while `coarse`, central otherwise.
fn gradient(
    ev: &Evaluator,
    u: &[f64],
    phi: f64,
    coarse: bool,
    ctx: (&[f64], f64),
    g: &mut [f64],
    out: &mut DVector<f64>,
) {
    let (lam, rho) = ctx;
    let mut x = u.to_vec();
    for i in 0..u.len() {
        let xi = x[i];
        x[i] = xi + FD_STEP;
        let fp = merit(ev, &x, lam, rho, g);
        let d = if coarse {
            (fp - phi) / FD_STEP
        } else {
            x[i] = xi - FD_STEP;
            let fm = merit(ev, &x, lam, rho, g);
            (fp - fm) / (2.0 * FD_STEP)
        };
        x[i] = xi;
        out[i] = if d.is_finite() { d } else { 0.0 };
    }
}

fn project(u: &mut [f64]) {
    for v in u.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
}

/// Projected BFGS on the unit box.
/// Returns the final iterate and whether the projected-gradient test was met.
fn inner(
    ev: &Evaluator,
    u0: &[f64],
    lam: &[f64],
    rho: f64,
    max_iter: u32,
    omega: f64,
) -> (Vec<f64>, bool) {
    let n = u0.len();
    let mut g = vec![0.0; ev.m];
    let mut u = u0.to_vec();
    let mut phi = merit(ev, &u, lam, rho, &mut g);
    if !phi.is_finite() {
        return (u, false);
    }
    let mut grad = DVector::zeros(n);
    let coarse = omega > 1e-5;
    gradient(ev, &u, phi, coarse, (lam, rho), &mut g, &mut grad);
    let mut h = DMatrix::<f64>::identity(n, n);
    let mut fresh = true;
    let mut trial = vec![0.0; n];
    let mut grad_new = DVector::zeros(n);

    for _ in 0..max_iter {
        let free: Vec<bool> = (0..n)
            .map(|i| !((u[i] <= 0.0 && grad[i] > 0.0) || (u[i] >= 1.0 && grad[i] < 0.0)))
            .collect();
        let pg = (0..n)
            .filter(|&i| free[i])
            .map(|i| grad[i].abs())
            .fold(0.0, f64::max);
        if pg <= omega * (1.0 + phi.abs()) {
            return (u, true);
        }
        let mut d = DVector::zeros(n);
        for i in 0..n {
            if !free[i] {
                continue;
            }
            let mut s = 0.0;
            for j in 0..n {
                if free[j] {
                    s -= h[(i, j)] * grad[j];
                }
            }
            d[i] = s;
        }
        if grad.dot(&d) >= 0.0 {
            h.fill_with_identity();
            fresh = true;
            for i in 0..n {
                d[i] = if free[i] { -grad[i] } else { 0.0 };
            }
        }
        let dmax = d.amax();
        let mut alpha = if fresh { (0.1 / dmax).min(1.0) } else { 1.0 };
        let mut accepted = None;
        for _ in 0..40 {
            for i in 0..n {
                trial[i] = u[i] + alpha * d[i];
            }
            project(&mut trial);
            let dec: f64 = (0..n).map(|i| grad[i] * (trial[i] - u[i])).sum();
            let p = merit(ev, &trial, lam, rho, &mut g);
            if p <= phi + 1e-4 * dec && p.is_finite() {
                accepted = Some(p);
                break;
            }
            alpha *= 0.5;
        }
        let Some(p) = accepted else {
            if fresh {
                break;
            }
            h.fill_with_identity();
            fresh = true;
            continue;
        };
        let s = DVector::from_iterator(n, (0..n).map(|i| trial[i] - u[i]));
        gradient(ev, &trial, p, coarse, (lam, rho), &mut g, &mut grad_new);
        let y = &grad_new - &grad;
        let sy = s.dot(&y);
        let small_step = s.amax() <= 1e-13;
        let small_change = (phi - p).abs() <= 1e-15 * (1.0 + phi.abs());
        u.copy_from_slice(&trial);
        phi = p;
        std::mem::swap(&mut grad, &mut grad_new);
        if small_step || small_change {
            break;
        }
        if sy > 1e-12 * s.norm() * y.norm() {
            if fresh {
                h.fill_with_identity();
                h *= sy / y.dot(&y);
            }
            let r = 1.0 / sy;
            let hy = &h * &y;
            let yhy = y.dot(&hy);
            // H ← H − r(s·(Hy)ᵀ + Hy·sᵀ) + (r²·yᵀHy + r)·s·sᵀ
            h -= r * (&s * hy.transpose() + &hy * s.transpose());
            h += (r * r * yhy + r) * (&s * s.transpose());
            fresh = false;
        }
    }
    (u, false)
}

/// Minimum-norm Gauss-Newton steps onto the violated constraints.
fn polish(ev: &Evaluator, u0: &[f64], tol: f64) -> Vec<f64> {
    let n = u0.len();
    let m = ev.m;
    let mut u = u0.to_vec();
    let mut g = vec![0.0; m];
    let mut gp = vec![0.0; m];
    ev.evaluate(&u, &mut g);
    let mut viol = violation(&g);
    if !viol.is_finite() {
        return u;
    }
    let target = 0.01 * tol;
    for _ in 0..30 {
        if viol <= target {
            break;
        }
        let active: Vec<usize> = (0..m).filter(|&i| g[i] > -target).collect();
        let mut jac = DMatrix::<f64>::zeros(active.len(), n);
        let mut x = u.clone();
        for j in 0..n {
            let h = if u[j] + 1e-7 <= 1.0 { 1e-7 } else { -1e-7 };
            x[j] = u[j] + h;
            ev.evaluate(&x, &mut gp);
            x[j] = u[j];
            for (r, &i) in active.iter().enumerate() {
                jac[(r, j)] = (gp[i] - g[i]) / h;
            }
        }
        let rhs = DVector::from_iterator(active.len(), active.iter().map(|&i| -(g[i] + target)));
        let mut step = None;
        let mut cols: Vec<bool> = vec![true; n];
        for _ in 0..2 {
            let mut jc = jac.clone();
            for (j, &keep) in cols.iter().enumerate() {
                if !keep {
                    jc.column_mut(j).fill(0.0);
                }
            }
            let jjt = &jc * jc.transpose();
            let mu = 1e-12 * (1.0 + jjt.trace());
            let reg = jjt + DMatrix::identity(active.len(), active.len()) * mu;
            let Some(chol) = reg.cholesky() else { break };
            let delta = jc.transpose() * chol.solve(&rhs);
            let mut outward = false;
            for j in 0..n {
                if cols[j] && ((u[j] <= 0.0 && delta[j] < 0.0) || (u[j] >= 1.0 && delta[j] > 0.0)) {
                    cols[j] = false;
                    outward = true;
                }
            }
            step = Some(delta);
            if !outward {
                break;
            }
        }
        let Some(delta) = step else { break };
        let mut alpha = 1.0;
        let mut improved = false;
        for _ in 0..12 {
            let mut trial: Vec<f64> = (0..n).map(|j| u[j] + alpha * delta[j]).collect();
            project(&mut trial);
            ev.evaluate(&trial, &mut gp);
            let v = violation(&gp);
            if v < viol {
                u = trial;
                std::mem::swap(&mut g, &mut gp);
                viol = v;
                improved = true;
                break;
            }
            alpha *= 0.5;
        }
        if !improved {
            break;
        }
    }
    u
}
