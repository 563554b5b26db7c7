//! Time grids for path simulation.

use crate::error::{Error, Result};

/// Strictly increasing grid of time points from 0 to the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    nodes: Vec<f64>,
}

impl TimeGrid {
    /// Uniform grid with `n_steps` steps of size `horizon / n_steps`.
    pub fn uniform(horizon: f64, n_steps: usize) -> Result<Self> {
        if !(horizon > 0.0) || n_steps == 0 {
            return Err(Error::InvalidGrid(format!(
                "uniform grid needs horizon > 0 and at least one step, got horizon = {horizon}, steps = {n_steps}"
            )));
        }
        let dt = horizon / n_steps as f64;
        let mut nodes: Vec<f64> = (0..=n_steps).map(|i| i as f64 * dt).collect();
        *nodes.last_mut().unwrap() = horizon;
        Ok(TimeGrid { nodes })
    }

    /// Uniform grid from a step size; `horizon / dt` must be close to an integer.
    pub fn uniform_dt(horizon: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidGrid(format!("dt must be positive, got {dt}")));
        }
        let n = (horizon / dt).round();
        if n < 1.0 || ((horizon / dt) - n).abs() > 1e-6 {
            return Err(Error::InvalidGrid(format!(
                "horizon {horizon} is not an integer multiple of dt {dt}"
            )));
        }
        Self::uniform(horizon, n as usize)
    }

    /// Geometrically refined grid: step sizes grow by `growth` per step away
    /// from 0, rescaled so the last node is exactly the horizon.
    pub fn geometric(horizon: f64, n_steps: usize, growth: f64) -> Result<Self> {
        if !(horizon > 0.0) || n_steps == 0 || !(growth > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "geometric grid needs horizon > 0, steps > 0, growth > 0; got {horizon}, {n_steps}, {growth}"
            )));
        }
        let mut raw = Vec::with_capacity(n_steps + 1);
        let mut acc = 0.0;
        raw.push(0.0);
        let mut step = 1.0;
        for _ in 0..n_steps {
            acc += step;
            raw.push(acc);
            step *= growth;
        }
        let scale = horizon / acc;
        let mut nodes: Vec<f64> = raw.into_iter().map(|x| x * scale).collect();
        *nodes.last_mut().unwrap() = horizon;
        Ok(TimeGrid { nodes })
    }

    /// Build from explicit nodes; validates the grid invariants.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidGrid("need at least two nodes".into()));
        }
        if nodes[0] != 0.0 {
            return Err(Error::InvalidGrid(format!(
                "first node must be 0, got {}",
                nodes[0]
            )));
        }
        for w in nodes.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidGrid(format!(
                    "nodes must be strictly increasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(TimeGrid { nodes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn horizon(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Number of steps (nodes minus one).
    pub fn steps(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn dt(&self, step: usize) -> f64 {
        self.nodes[step + 1] - self.nodes[step]
    }

    /// Step size if the grid is uniform (within rounding), else `None`.
    pub fn uniform_step(&self) -> Option<f64> {
        let dt = self.dt(0);
        for i in 0..self.steps() {
            if (self.dt(i) - dt).abs() > 1e-9 * dt.max(1.0) {
                return None;
            }
        }
        Some(dt)
    }
}
