use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::FieldEnvironment;
use crate::types::TrajectoryState;

/// Conditions watched during integration. Each kind defines a scalar residual
/// whose zero crossing marks the event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    /// Local minimum of the distance to a wire: `(r - r_w) . v` crosses zero upwards.
    ClosestApproach { wire: usize },
    /// `x` crosses the given value.
    PlaneCrossingX { x: f64 },
    /// `z` crosses the given value.
    PlaneCrossingZ { z: f64 },
    /// Vertical velocity component crosses zero.
    VelocityHorizontal,
    /// Distance to a wire crosses the given radius.
    WireDistance { wire: usize, radius: f64 },
}

impl EventKind {
    pub(crate) fn residual(&self, env: &FieldEnvironment, s: &TrajectoryState) -> f64 {
        match *self {
            EventKind::ClosestApproach { wire } => (s.pos - env.wires[wire].position).dot(s.vel),
            EventKind::PlaneCrossingX { x } => s.pos.x - x,
            EventKind::PlaneCrossingZ { z } => s.pos.z - z,
            EventKind::VelocityHorizontal => s.vel.z,
            EventKind::WireDistance { wire, radius } => {
                (s.pos - env.wires[wire].position).norm() - radius
            }
        }
    }

    fn wire(&self) -> Option<usize> {
        match *self {
            EventKind::ClosestApproach { wire } | EventKind::WireDistance { wire, .. } => {
                Some(wire)
            }
            _ => None,
        }
    }

    pub(crate) fn validate(&self, env: &FieldEnvironment) -> Result<()> {
        if let Some(w) = self.wire() {
            if w >= env.wires.len() {
                return Err(Error::invalid(format!(
                    "event references wire {w} but environment has {} wires",
                    env.wires.len()
                )));
            }
        }
        Ok(())
    }

    /// Short label used in CSV output.
    pub fn label(&self) -> String {
        match *self {
            EventKind::ClosestApproach { wire } => format!("closest_approach[{wire}]"),
            EventKind::PlaneCrossingX { x } => format!("plane_crossing_x[{x:e}]"),
            EventKind::PlaneCrossingZ { z } => format!("plane_crossing_z[{z:e}]"),
            EventKind::VelocityHorizontal => "velocity_horizontal".to_string(),
            EventKind::WireDistance { wire, radius } => format!("wire_distance[{wire},{radius:e}]"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Crossing {
    Any,
    Rising,
    Falling,
}

impl Crossing {
    pub(crate) fn matches(self, before: f64, after: f64) -> bool {
        let rising = before < 0.0 && after >= 0.0;
        let falling = before > 0.0 && after <= 0.0;
        match self {
            Crossing::Any => rising || falling,
            Crossing::Rising => rising,
            Crossing::Falling => falling,
        }
    }
}

/// An event specification handed to the integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Watcher {
    pub kind: EventKind,
    pub direction: Crossing,
    /// Stop the integration when this watcher fires.
    pub terminal: bool,
    /// Only watch after an event of this kind has been recorded.
    pub armed_after: Option<EventKind>,
}

impl Watcher {
    pub fn new(kind: EventKind) -> Self {
        let direction = match kind {
            EventKind::ClosestApproach { .. } => Crossing::Rising,
            _ => Crossing::Any,
        };
        Self {
            kind,
            direction,
            terminal: false,
            armed_after: None,
        }
    }

    pub fn terminal(mut self) -> Self {
        self.terminal = true;
        self
    }

    pub fn direction(mut self, direction: Crossing) -> Self {
        self.direction = direction;
        self
    }

    pub fn after(mut self, kind: EventKind) -> Self {
        self.armed_after = Some(kind);
        self
    }
}

/// A located event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub kind: EventKind,
    pub t: f64,
    pub state: TrajectoryState,
}
