//! Adaptive integration of `r'' = a(r)` with event location on the dense output.

mod events;
mod rk;

use serde::{Deserialize, Serialize};

pub use events::{Crossing, Event, EventKind, Watcher};

use crate::error::{Error, Result};
use crate::fields::FieldEnvironment;
use crate::roots::{brent, golden_min};
use crate::types::{TrajectoryState, Vec2, Wire};
use rk::{DenseSegment, State};

/// Event times are refined to this accuracy (s).
pub const EVENT_TIME_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorOptions {
    pub rel_tol: f64,
    /// Applied to both position (m) and velocity (m/s) components.
    pub abs_tol: f64,
    pub max_step: f64,
    /// Integration span measured from the initial time (s).
    pub max_time: f64,
    /// Size of the uniform output grid.
    pub output_points: usize,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-13,
            max_step: 1e-5,
            max_time: 0.05,
            output_points: 2000,
            max_steps: 5_000_000,
        }
    }
}

impl IntegratorOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.rel_tol) || !positive(self.abs_tol) {
            return Err(Error::invalid("integrator tolerances must be positive"));
        }
        if !positive(self.max_step) || !positive(self.max_time) {
            return Err(Error::invalid("max_step and max_time must be positive"));
        }
        if self.output_points < 2 {
            return Err(Error::invalid("output_points must be at least 2"));
        }
        Ok(())
    }

    /// Same options with both tolerances scaled by `factor`.
    pub fn scaled_tolerances(mut self, factor: f64) -> Self {
        self.rel_tol *= factor;
        self.abs_tol *= factor;
        self
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
}

/// Integrated trajectory: an output grid, the located events and the full
/// piecewise dense solution.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Uniform output grid from start to end (inclusive).
    pub states: Vec<TrajectoryState>,
    pub events: Vec<Event>,
    pub stats: StepStats,
    segments: Vec<DenseSegment>,
    start: TrajectoryState,
    end: TrajectoryState,
    terminal_event: Option<usize>,
}

impl Trajectory {
    pub fn start(&self) -> TrajectoryState {
        self.start
    }

    pub fn end(&self) -> TrajectoryState {
        self.end
    }

    pub fn duration(&self) -> f64 {
        self.end.t - self.start.t
    }

    /// The event that stopped integration, if any.
    pub fn terminal_event(&self) -> Option<&Event> {
        self.terminal_event.map(|i| &self.events[i])
    }

    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    pub fn first_event(&self, kind: EventKind) -> Option<&Event> {
        self.events_of(kind).next()
    }

    /// Dense-output state at time `t`, or `None` outside the integrated span.
    pub fn state_at(&self, t: f64) -> Option<TrajectoryState> {
        if !(t >= self.start.t && t <= self.end.t) {
            return None;
        }
        if t == self.end.t {
            return Some(self.end);
        }
        let idx = self
            .segments
            .partition_point(|s| s.t0 <= t)
            .saturating_sub(1);
        let seg = &self.segments[idx];
        Some(TrajectoryState::from_array(t, &seg.eval(t)))
    }

    /// States at the integrator's accepted step boundaries (and the end point).
    pub fn node_states(&self) -> impl Iterator<Item = TrajectoryState> + '_ {
        self.segments
            .iter()
            .map(|s| TrajectoryState::from_array(s.t0, &s.start()))
            .chain(std::iter::once(self.end))
    }

    /// `n` uniformly spaced states over the trajectory span.
    pub fn resample(&self, n: usize) -> Vec<TrajectoryState> {
        uniform_grid(self.start.t, self.end.t, n)
            .filter_map(|t| self.state_at(t))
            .collect()
    }

    /// Largest `|E(t) - E(0)| / |E(0)|` over the integrator nodes, with `E` the
    /// energy per unit mass. Falls back to the peak kinetic energy as the scale
    /// when `E(0)` vanishes.
    pub fn max_relative_energy_drift(&self, env: &FieldEnvironment) -> Result<f64> {
        let e0 = env.energy_per_mass(&self.start)?;
        let mut scale = e0.abs();
        if scale == 0.0 {
            scale = self
                .node_states()
                .map(|s| 0.5 * s.vel.norm_squared())
                .fold(0.0, f64::max);
        }
        let mut worst: f64 = 0.0;
        for s in self.node_states() {
            worst = worst.max((env.energy_per_mass(&s)? - e0).abs());
        }
        Ok(if scale > 0.0 { worst / scale } else { worst })
    }

    /// Earliest `t` in `[t_lo, t_end]` at which `f` crosses zero in the given
    /// direction, refined on the dense output.
    pub fn find_crossing<F>(&self, t_lo: f64, direction: Crossing, f: F) -> Option<f64>
    where
        F: Fn(&TrajectoryState) -> f64,
    {
        let mut prev_t = t_lo.max(self.start.t);
        let mut prev = f(&self.state_at(prev_t)?);
        let mut nodes: Vec<f64> = self
            .segments
            .iter()
            .map(|s| s.t1())
            .filter(|&t| t > prev_t && t < self.end.t)
            .collect();
        nodes.push(self.end.t);
        for t in nodes {
            let cur = f(&self.state_at(t)?);
            if direction.matches(prev, cur) {
                let g = |tt: f64| Ok(f(&self.state_at(tt).expect("inside span")));
                return brent(g, prev_t, t, EVENT_TIME_TOL, 0.0, 200)
                    .ok()
                    .map(|r| r.x);
            }
            prev_t = t;
            prev = cur;
        }
        None
    }
}

fn uniform_grid(t0: f64, t1: f64, n: usize) -> impl Iterator<Item = f64> {
    let n = n.max(2);
    (0..n).map(move |i| {
        if i == n - 1 {
            t1
        } else {
            t0 + (t1 - t0) * i as f64 / (n - 1) as f64
        }
    })
}

/// Minimum distance between the trajectory and `wire`, located as the deepest
/// local minimum of `|r - r_w|` on the dense output.
pub fn closest_approach(traj: &Trajectory, wire: &Wire) -> Result<f64> {
    let w = wire.position;
    let radial_rate = |s: &TrajectoryState| (s.pos - w).dot(s.vel);
    let dist = |t: f64| {
        traj.state_at(t)
            .map(|s| (s.pos - w).norm())
            .unwrap_or(f64::INFINITY)
    };
    let mut best: Option<f64> = None;
    let mut t_lo = traj.start.t;
    while let Some(t_min) = traj.find_crossing(t_lo, Crossing::Rising, radial_rate) {
        // polish on the distance itself, in a window around the rate root
        let seg_h = traj
            .segments
            .iter()
            .find(|s| s.t0 <= t_min && t_min <= s.t1())
            .map_or(EVENT_TIME_TOL, |s| s.h);
        let lo = (t_min - seg_h).max(traj.start.t);
        let hi = (t_min + seg_h).min(traj.end.t);
        let (_, d) = golden_min(dist, lo, hi, EVENT_TIME_TOL);
        let d = d.min(dist(t_min));
        best = Some(best.map_or(d, |b: f64| b.min(d)));
        if t_min >= traj.end.t {
            break;
        }
        t_lo = t_min + EVENT_TIME_TOL;
    }
    best.ok_or(Error::NoApproach { x: w.x, z: w.z })
}

fn rms_scaled(v: &State, y: &State, abs_tol: f64, rel_tol: f64) -> f64 {
    let sum: f64 = v
        .iter()
        .zip(y)
        .map(|(vi, yi)| (vi / (abs_tol + rel_tol * yi.abs())).powi(2))
        .sum();
    (sum / 4.0).sqrt()
}

struct WatchState {
    armed_at: Option<f64>,
    g_prev: f64,
}

/// Integrate from `init` until `opts.max_time` elapses or a terminal watcher fires.
pub fn integrate(
    env: &FieldEnvironment,
    init: TrajectoryState,
    opts: &IntegratorOptions,
    watchers: &[Watcher],
) -> Result<Trajectory> {
    opts.validate()?;
    env.validate()?;
    for w in watchers {
        w.kind.validate(env)?;
        if let Some(k) = &w.armed_after {
            k.validate(env)?;
        }
    }
    if !init.pos.is_finite() || !init.vel.is_finite() || !init.t.is_finite() {
        return Err(Error::invalid("initial state must be finite"));
    }

    let mut rhs = |_t: f64, y: &State| -> Result<State> {
        let a = env.acceleration(Vec2::new(y[0], y[1]))?;
        Ok([y[2], y[3], a.x, a.z])
    };

    let t_stop = init.t + opts.max_time;
    let mut t = init.t;
    let mut y = init.to_array();
    let mut k1 = rhs(t, &y)?;

    // initial step guess
    let mut h = {
        let d0 = rms_scaled(&y, &y, opts.abs_tol, opts.rel_tol);
        let d1 = rms_scaled(&k1, &y, opts.abs_tol, opts.rel_tol);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let h0 = h0.min(opts.max_step);
        let y1: State = std::array::from_fn(|i| y[i] + h0 * k1[i]);
        match rhs(t + h0, &y1) {
            Ok(k2) => {
                let diff: State = std::array::from_fn(|i| k2[i] - k1[i]);
                let d2 = rms_scaled(&diff, &y, opts.abs_tol, opts.rel_tol) / h0;
                let dm = d1.max(d2);
                let h1 = if dm <= 1e-15 {
                    (h0 * 1e-3).max(1e-6)
                } else {
                    (0.01 / dm).powf(0.2)
                };
                (100.0 * h0).min(h1)
            }
            Err(_) => h0 * 1e-3,
        }
    };

    let mut states_ws: Vec<WatchState> = watchers
        .iter()
        .map(|w| WatchState {
            armed_at: if w.armed_after.is_none() {
                Some(init.t)
            } else {
                None
            },
            g_prev: w.kind.residual(env, &init),
        })
        .collect();

    let mut segments: Vec<DenseSegment> = Vec::new();
    let mut events: Vec<Event> = Vec::new();
    let mut stats = StepStats::default();
    let mut terminal: Option<(usize, f64)> = None;
    let mut last_rejected = false;

    while t < t_stop && terminal.is_none() {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::TooManySteps(opts.max_steps));
        }
        let h_min = 16.0 * f64::EPSILON * t.abs().max(1e-6);
        h = h.min(opts.max_step).min(t_stop - t);
        let result = rk::step(&mut rhs, t, &y, &k1, h, opts.rel_tol, opts.abs_tol);
        let r = match result {
            Ok(r) => r,
            Err(e @ Error::Singularity { .. }) => {
                stats.rejected += 1;
                h *= 0.25;
                if h < h_min {
                    return Err(e);
                }
                last_rejected = true;
                continue;
            }
            Err(e) => return Err(e),
        };

        if !(r.err <= 1.0) {
            stats.rejected += 1;
            let factor = if r.err.is_finite() {
                (0.9 * r.err.powf(-0.2)).max(0.2)
            } else {
                0.2
            };
            h *= factor;
            if h < h_min {
                return Err(Error::StepFailure { t, h });
            }
            last_rejected = true;
            continue;
        }

        stats.accepted += 1;
        let t0 = t;
        let t1 = if h == t_stop - t { t_stop } else { t + h };
        let seg = r.dense;
        let end_state = TrajectoryState::from_array(t1, &r.y1);

        // event search on this segment
        let eval = |tt: f64| TrajectoryState::from_array(tt, &seg.eval(tt));
        let locate = |w: &Watcher, lo: f64, g_lo: f64, g_hi: f64| -> Option<f64> {
            if !w.direction.matches(g_lo, g_hi) {
                return None;
            }
            if g_hi == 0.0 {
                return Some(t1);
            }
            brent(
                |tt| Ok(w.kind.residual(env, &eval(tt))),
                lo,
                t1,
                EVENT_TIME_TOL,
                0.0,
                200,
            )
            .ok()
            .map(|root| root.x)
        };

        let g_end: Vec<f64> = watchers
            .iter()
            .map(|w| w.kind.residual(env, &end_state))
            .collect();
        let mut pending: Vec<(f64, usize)> = Vec::new();
        for (i, w) in watchers.iter().enumerate() {
            if states_ws[i].armed_at.is_some() {
                if let Some(te) = locate(w, t0, states_ws[i].g_prev, g_end[i]) {
                    pending.push((te, i));
                }
            }
        }

        let mut cut = t1;
        while let Some(pos) = pending
            .iter()
            .enumerate()
            .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
            .map(|(p, _)| p)
        {
            let (te, i) = pending.swap_remove(pos);
            let state = eval(te);
            let kind = watchers[i].kind;
            events.push(Event { kind, t: te, state });
            if watchers[i].terminal {
                terminal = Some((events.len() - 1, te));
                cut = te;
                break;
            }
            for (j, w) in watchers.iter().enumerate() {
                if states_ws[j].armed_at.is_none() && w.armed_after == Some(kind) {
                    states_ws[j].armed_at = Some(te);
                    let g_lo = w.kind.residual(env, &state);
                    if let Some(tj) = locate(w, te, g_lo, g_end[j]) {
                        if tj > te {
                            pending.push((tj, j));
                        }
                    }
                }
            }
        }

        segments.push(seg);
        for (ws, g) in states_ws.iter_mut().zip(&g_end) {
            ws.g_prev = *g;
        }
        if terminal.is_some() {
            t = cut;
            break;
        }

        t = t1;
        y = r.y1;
        k1 = r.k7;
        let mut factor = if r.err == 0.0 {
            5.0
        } else {
            (0.9 * r.err.powf(-0.2)).clamp(0.2, 5.0)
        };
        if last_rejected {
            factor = factor.min(1.0);
        }
        last_rejected = false;
        h *= factor;
    }

    let end = match terminal {
        Some((idx, _)) => events[idx].state,
        None => TrajectoryState::from_array(t, &y),
    };
    let mut traj = Trajectory {
        states: Vec::new(),
        events,
        stats,
        segments,
        start: init,
        end,
        terminal_event: terminal.map(|(i, _)| i),
    };
    traj.states = traj.resample(opts.output_points);
    Ok(traj)
}
