//! Path simulation for every process in the model family: the stiff
//! mean-reverting diffusion X, its rescaled time-changed companion, the
//! squared sandwich diffusions, CIR and squared Bessel processes, and
//! noise-coupled pairs for comparison experiments.
//!
//! The stiff drift -(c L / eps) g(M x / eps) makes explicit Euler unstable
//! once dt is comparable to eps^2, so the default scheme solves the drift
//! implicitly; the implicit step has a unique root because g is nondecreasing,
//! and the one-step map is monotone in the previous state.

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::invariant::BracketSide;
use crate::model::{sample_coefficients, CoefficientModel, CoefficientPaths, ReversionFunction, ScalingConfig};
use crate::rng::{NoiseChannel, PathStreams};

/// Discretization scheme for the stiff diffusion X.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    ExplicitEm,
    TamedEm,
    DriftImplicit,
}

impl Scheme {
    pub fn id(&self) -> &'static str {
        match self {
            Scheme::ExplicitEm => "explicit_em",
            Scheme::TamedEm => "tamed_em",
            Scheme::DriftImplicit => "drift_implicit",
        }
    }
}

/// Scheme plus root-finding budget for the implicit variant.
#[derive(Debug, Clone, Copy)]
pub struct SchemeSelector {
    pub scheme: Scheme,
    pub root_tol: f64,
    pub max_iter: usize,
}

impl SchemeSelector {
    pub fn new(scheme: Scheme) -> Self {
        SchemeSelector {
            scheme,
            root_tol: 1e-12,
            max_iter: 100,
        }
    }

    pub fn drift_implicit() -> Self {
        Self::new(Scheme::DriftImplicit)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.root_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "root tolerance must be positive, got {}",
                self.root_tol
            )));
        }
        Ok(())
    }
}

impl Default for SchemeSelector {
    fn default() -> Self {
        Self::drift_implicit()
    }
}

/// A discretized trajectory together with the noise increments that produced
/// it, so any path can be replayed bit-for-bit.
#[derive(Debug, Clone)]
pub struct SamplePath {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
    pub noise_increments: Vec<f64>,
    pub channel_id: u64,
    pub scheme_id: String,
}

impl SamplePath {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn terminal(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// CSV export with columns t, value, noise_increment (the last increment
    /// column is empty on the final node), 17 significant digits.
    pub fn to_csv(&self) -> String {
        use crate::report::fmt_g17;
        let mut out = String::from("t,value,noise_increment\n");
        for (i, &t) in self.grid.nodes().iter().enumerate() {
            let inc = self
                .noise_increments
                .get(i)
                .map(|&w| fmt_g17(w))
                .unwrap_or_default();
            out.push_str(&format!("{},{},{}\n", fmt_g17(t), fmt_g17(self.values[i]), inc));
        }
        out
    }

    /// Binary columnar dump: a 16-byte header (magic "MRPATH01", node count
    /// as little-endian u64) followed by three little-endian f64 columns —
    /// grid nodes, values, and noise increments (one fewer than nodes).
    pub fn to_binary_columns(&self) -> Vec<u8> {
        let n = self.values.len();
        let mut out = Vec::with_capacity(16 + 8 * (2 * n + self.noise_increments.len()));
        out.extend_from_slice(b"MRPATH01");
        out.extend_from_slice(&(n as u64).to_le_bytes());
        for column in [self.grid.nodes(), &self.values, &self.noise_increments] {
            for v in column {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    /// Parse a binary columnar dump written by [`Self::to_binary_columns`].
    pub fn from_binary_columns(bytes: &[u8]) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        if bytes.len() < 16 || &bytes[..8] != b"MRPATH01" {
            return Err(Error::Misuse("not a path dump: bad header".to_string()));
        }
        let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
        let expected = 16 + 8 * (2 * n + n.saturating_sub(1));
        if bytes.len() != expected {
            return Err(Error::Misuse(format!(
                "path dump length mismatch: got {}, expected {expected}",
                bytes.len()
            )));
        }
        let read = |offset: usize, count: usize| -> Vec<f64> {
            (0..count)
                .map(|i| {
                    let at = offset + 8 * i;
                    f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap())
                })
                .collect()
        };
        let nodes = read(16, n);
        let values = read(16 + 8 * n, n);
        let increments = read(16 + 16 * n, n.saturating_sub(1));
        Ok((nodes, values, increments))
    }
}

fn gaussian_increments(channel: &NoiseChannel, grid: &TimeGrid) -> Vec<f64> {
    (0..grid.steps())
        .map(|i| grid.dt(i).sqrt() * channel.standard_normal(i as u64))
        .collect()
}

/// Solve x + a * g(b x) = rhs for the unique root (g odd and nondecreasing
/// makes the left side strictly increasing with slope >= 1). Safeguarded
/// Newton against the bracket [min(rhs, 0), max(rhs, 0)].
pub fn implicit_drift_root(
    rf: &ReversionFunction,
    a: f64,
    b: f64,
    rhs: f64,
    tol: f64,
    max_iter: usize,
) -> Result<f64> {
    debug_assert!(a >= 0.0 && b > 0.0);
    let scale = rhs.abs().max(1.0);
    let mut lo = rhs.min(0.0);
    let mut hi = rhs.max(0.0);
    let mut x = rhs;
    for _ in 0..max_iter {
        let fx = x + a * rf.g(b * x) - rhs;
        if fx.abs() <= tol * scale {
            return Ok(x);
        }
        if fx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let slope = 1.0 + a * b * rf.g_prime(b * x).max(0.0);
        let mut next = x - fx / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (hi - lo) <= f64::EPSILON * (lo.abs() + hi.abs() + 1e-300) {
            return Ok(0.5 * (lo + hi));
        }
        x = next;
    }
    Err(Error::Misuse(format!(
        "implicit drift solve did not converge within {max_iter} iterations (rhs = {rhs})"
    )))
}

/// How the reported state relates to the internal Euler state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateOutput {
    /// Report the raw Euler state.
    Raw,
    /// Full truncation for square-root diffusions: the internal state may dip
    /// below zero, coefficients read max(state, 0), and the reported path is
    /// the positive part. The reported mean is then unbiased whenever the
    /// drift is affine in the truncated state.
    PositivePart,
}

/// Generic explicit Euler driver: drift and diffusion take (t, state).
/// Passing recorded increments replays a path exactly.
pub fn integrate_path(
    grid: &TimeGrid,
    x0: f64,
    drift: impl Fn(f64, f64) -> f64,
    diffusion: impl Fn(f64, f64) -> f64,
    output: StateOutput,
    increments: &[f64],
) -> Result<Vec<f64>> {
    if increments.len() != grid.steps() {
        return Err(Error::Misuse(format!(
            "need {} increments, got {}",
            grid.steps(),
            increments.len()
        )));
    }
    let mut values = Vec::with_capacity(grid.nodes().len());
    let report = |x: f64| match output {
        StateOutput::Raw => x,
        StateOutput::PositivePart => x.max(0.0),
    };
    let mut x = x0;
    values.push(report(x));
    for i in 0..grid.steps() {
        let t = grid.nodes()[i];
        let dt = grid.dt(i);
        x = x + drift(t, x) * dt + diffusion(t, x) * increments[i];
        if !x.is_finite() {
            return Err(Error::BlowUp {
                step: i,
                t: grid.nodes()[i + 1],
                value: x,
            });
        }
        values.push(report(x));
    }
    Ok(values)
}

/// Linearized stiffness factor dt * c L M g'(0) / eps^2 of the explicit
/// scheme at the origin; values above 2 leave the stability region.
pub fn explicit_stability_factor(
    cm: &CoefficientModel,
    rf: &ReversionFunction,
    scaling: &ScalingConfig,
    dt: f64,
) -> f64 {
    let at_start = |ch: &crate::model::ChannelSpec| match ch {
        crate::model::ChannelSpec::Constant(v) => *v,
        crate::model::ChannelSpec::Polynomial { coeffs } => coeffs.first().copied().unwrap_or(0.0),
        crate::model::ChannelSpec::ClippedOu { start, floor, ceil, .. }
        | crate::model::ChannelSpec::ClippedGeometric { start, floor, ceil, .. } => {
            start.clamp(*floor, *ceil)
        }
    };
    let c = at_start(&cm.c);
    let l = at_start(&cm.l);
    let m = at_start(&cm.m);
    dt * c * l * m * rf.g_prime(0.0) / (scaling.epsilon * scaling.epsilon)
}

/// Simulate X on already-sampled coefficient paths with given increments.
pub fn simulate_x_on(
    paths: &CoefficientPaths,
    rf: &ReversionFunction,
    scaling: &ScalingConfig,
    scheme: &SchemeSelector,
    increments: &[f64],
    channel_id: u64,
) -> Result<SamplePath> {
    scheme.validate()?;
    let grid = &paths.grid;
    if increments.len() != grid.steps() {
        return Err(Error::Misuse(format!(
            "need {} increments, got {}",
            grid.steps(),
            increments.len()
        )));
    }
    let eps = scaling.epsilon;
    let mut values = Vec::with_capacity(grid.nodes().len());
    let mut x = scaling.x0();
    values.push(x);
    for i in 0..grid.steps() {
        let dt = grid.dt(i);
        let (b, c, l, m) = (paths.b[i], paths.c[i], paths.l[i], paths.m[i]);
        let dw = increments[i];
        x = match scheme.scheme {
            Scheme::ExplicitEm => {
                let drift = b - (c * l / eps) * rf.g(m * x / eps);
                x + drift * dt + c.sqrt() * dw
            }
            Scheme::TamedEm => {
                let drift = b - (c * l / eps) * rf.g(m * x / eps);
                x + drift * dt / (1.0 + dt * drift.abs()) + c.sqrt() * dw
            }
            Scheme::DriftImplicit => {
                let rhs = x + dt * b + c.sqrt() * dw;
                let a = dt * c * l / eps;
                implicit_drift_root(rf, a, m / eps, rhs, scheme.root_tol, scheme.max_iter)
                    .map_err(|e| Error::Scheme {
                        step: i,
                        t: grid.nodes()[i + 1],
                        reason: e.to_string(),
                    })?
            }
        };
        if !x.is_finite() {
            return Err(Error::BlowUp {
                step: i,
                t: grid.nodes()[i + 1],
                value: x,
            });
        }
        values.push(x);
    }
    Ok(SamplePath {
        grid: grid.clone(),
        values,
        noise_increments: increments.to_vec(),
        channel_id,
        scheme_id: scheme.scheme.id().to_string(),
    })
}

/// Simulate the stiff diffusion X on the grid. Coefficients are sampled from
/// the same per-path streams, so the whole path is a pure function of
/// (model, grid, scheme, master seed, path index).
pub fn simulate_x(
    cm: &CoefficientModel,
    rf: &ReversionFunction,
    scaling: &ScalingConfig,
    grid: &TimeGrid,
    scheme: &SchemeSelector,
    streams: &PathStreams,
) -> Result<SamplePath> {
    if scheme.scheme == Scheme::ExplicitEm {
        if let Some(dt) = grid.uniform_step() {
            let factor = explicit_stability_factor(cm, rf, scaling, dt);
            if factor > 2.0 {
                eprintln!(
                    "warning: explicit scheme stiffness factor {factor:.2} exceeds 2 at the origin \
                     linearization; expect instability (dt = {dt:.3e}, eps = {:.3e})",
                    scaling.epsilon
                );
            }
        }
    }
    let paths = sample_coefficients(cm, grid, streams)?;
    let channel = streams.driving();
    let increments = gaussian_increments(&channel, grid);
    simulate_x_on(&paths, rf, scaling, scheme, &increments, channel.stream_id)
}

/// Piecewise-linear clock map between original time and the stretched scale
/// xi = int_0^t c_s / eps^2 ds.
#[derive(Debug, Clone)]
pub struct TimeChangeMap {
    pub t_nodes: Vec<f64>,
    pub xi_nodes: Vec<f64>,
}

impl TimeChangeMap {
    pub fn xi_total(&self) -> f64 {
        *self.xi_nodes.last().unwrap()
    }

    /// Inverse clock u(xi): the original time at which the stretched clock
    /// reads xi. Clamps to the horizon beyond xi_total.
    pub fn u(&self, xi: f64) -> f64 {
        let total = self.xi_total();
        if xi <= 0.0 {
            return self.t_nodes[0];
        }
        if xi >= total {
            return *self.t_nodes.last().unwrap();
        }
        let idx = match self
            .xi_nodes
            .binary_search_by(|probe| probe.partial_cmp(&xi).unwrap())
        {
            Ok(i) => return self.t_nodes[i],
            Err(i) => i - 1,
        };
        let (x0, x1) = (self.xi_nodes[idx], self.xi_nodes[idx + 1]);
        let (t0, t1) = (self.t_nodes[idx], self.t_nodes[idx + 1]);
        t0 + (t1 - t0) * (xi - x0) / (x1 - x0)
    }

    /// Forward clock xi(t) by the same piecewise-linear rule.
    pub fn xi_of_t(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= *self.t_nodes.last().unwrap() {
            return self.xi_total();
        }
        let idx = match self
            .t_nodes
            .binary_search_by(|probe| probe.partial_cmp(&t).unwrap())
        {
            Ok(i) => return self.xi_nodes[i],
            Err(i) => i - 1,
        };
        let (t0, t1) = (self.t_nodes[idx], self.t_nodes[idx + 1]);
        let (x0, x1) = (self.xi_nodes[idx], self.xi_nodes[idx + 1]);
        x0 + (x1 - x0) * (t - t0) / (t1 - t0)
    }
}

/// Discrete clock xi_i = int_0^{t_i} c / eps^2 ds by the trapezoid rule
/// (exact for affine c), plus the invertible map between the two scales.
pub fn time_change_grid(grid: &TimeGrid, c_path: &[f64], epsilon: f64) -> Result<(f64, TimeChangeMap)> {
    if c_path.len() != grid.nodes().len() {
        return Err(Error::Misuse(format!(
            "c path has {} nodes, grid has {}",
            c_path.len(),
            grid.nodes().len()
        )));
    }
    if let Some(&bad) = c_path.iter().find(|&&v| !(v > 0.0)) {
        return Err(Error::Positivity {
            channel: "c".to_string(),
            value: bad,
            t: f64::NAN,
        });
    }
    let inv_eps2 = (epsilon * epsilon).recip();
    let mut xi_nodes = Vec::with_capacity(c_path.len());
    xi_nodes.push(0.0);
    let mut acc = 0.0;
    for i in 0..grid.steps() {
        acc += inv_eps2 * 0.5 * (c_path[i] + c_path[i + 1]) * grid.dt(i);
        xi_nodes.push(acc);
    }
    let map = TimeChangeMap {
        t_nodes: grid.nodes().to_vec(),
        xi_nodes,
    };
    Ok((map.xi_total(), map))
}

/// Step the rescaled, time-changed process on a xi-grid: drift
/// eps b/c - L g(M x) with unit volatility, the g-part solved implicitly.
fn step_xtilde(
    rf: &ReversionFunction,
    scheme: &SchemeSelector,
    x: f64,
    d_xi: f64,
    b: f64,
    c: f64,
    l: f64,
    m: f64,
    eps: f64,
    dw: f64,
    step: usize,
    xi_next: f64,
) -> Result<f64> {
    let rhs = x + d_xi * eps * b / c + dw;
    let next = implicit_drift_root(rf, d_xi * l, m, rhs, scheme.root_tol, scheme.max_iter)
        .map_err(|e| Error::Scheme {
            step,
            t: xi_next,
            reason: e.to_string(),
        })?;
    if !next.is_finite() {
        return Err(Error::BlowUp {
            step,
            t: xi_next,
            value: next,
        });
    }
    Ok(next)
}

fn simulate_xtilde_on(
    rf: &ReversionFunction,
    scaling: &ScalingConfig,
    xi_grid: &TimeGrid,
    coeff_at_node: impl Fn(usize) -> (f64, f64, f64, f64),
    scheme: &SchemeSelector,
    increments: &[f64],
    channel_id: u64,
) -> Result<SamplePath> {
    let mut values = Vec::with_capacity(xi_grid.nodes().len());
    let mut x = scaling.z0;
    values.push(x);
    for i in 0..xi_grid.steps() {
        let (b, c, l, m) = coeff_at_node(i);
        x = step_xtilde(
            rf,
            scheme,
            x,
            xi_grid.dt(i),
            b,
            c,
            l,
            m,
            scaling.epsilon,
            increments[i],
            i,
            xi_grid.nodes()[i + 1],
        )?;
        values.push(x);
    }
    Ok(SamplePath {
        grid: xi_grid.clone(),
        values,
        noise_increments: increments.to_vec(),
        channel_id,
        scheme_id: "drift_implicit".to_string(),
    })
}

/// Simulate the rescaled, time-changed process on the given xi-grid.
/// Coefficients are sampled on an internal fine time grid, the clock is built
/// from the sampled c, and channel values are read at u(xi).
pub fn simulate_x_timechanged(
    cm: &CoefficientModel,
    rf: &ReversionFunction,
    scaling: &ScalingConfig,
    xi_grid: &TimeGrid,
    streams: &PathStreams,
) -> Result<SamplePath> {
    let fine_steps = (4 * xi_grid.steps()).clamp(1000, 2_000_000);
    let t_grid = TimeGrid::uniform(cm.horizon, fine_steps)?;
    let paths = sample_coefficients(cm, &t_grid, streams)?;
    let (_, map) = time_change_grid(&t_grid, &paths.c, scaling.epsilon)?;
    let interp = |series: &[f64], t: f64| -> f64 {
        let h = cm.horizon / fine_steps as f64;
        let pos = (t / h).clamp(0.0, fine_steps as f64);
        let idx = (pos.floor() as usize).min(fine_steps - 1);
        let w = pos - idx as f64;
        series[idx] * (1.0 - w) + series[idx + 1] * w
    };
    let channel = streams.driving();
    let increments = gaussian_increments(&channel, xi_grid);
    let coeff = |i: usize| {
        let t = map.u(xi_grid.nodes()[i]);
        (
            interp(&paths.b, t),
            interp(&paths.c, t),
            interp(&paths.l, t),
            interp(&paths.m, t),
        )
    };
    let scheme = SchemeSelector::drift_implicit();
    simulate_xtilde_on(rf, scaling, xi_grid, coeff, &scheme, &increments, channel.stream_id)
}

/// Result of the constant-clock consistency check between the direct and the
/// time-changed simulations driven by consistently rescaled increments.
#[derive(Debug, Clone)]
pub struct TimeChangeCrossCheck {
    pub sup_abs_diff: f64,
    pub x_path: SamplePath,
    pub xtilde_path: SamplePath,
}

/// For constant c the clock is deterministic and the two discrete recursions
/// coincide node by node: X(u_xi) = eps * Xtilde(xi) up to root-solver
/// tolerance. Returns the supremum difference over the grid.
pub fn time_change_cross_check(
    cm: &CoefficientModel,
    rf: &ReversionFunction,
    scaling: &ScalingConfig,
    grid: &TimeGrid,
    streams: &PathStreams,
) -> Result<TimeChangeCrossCheck> {
    let c0 = cm.c.constant_value().ok_or_else(|| {
        Error::Misuse(
            "the exact time-change cross-check requires a constant c channel; stochastic clocks \
             only admit distributional comparisons"
                .to_string(),
        )
    })?;
    let scheme = SchemeSelector::drift_implicit();
    let paths = sample_coefficients(cm, grid, streams)?;
    let channel = streams.driving();
    let increments = gaussian_increments(&channel, grid);
    let x_path = simulate_x_on(&paths, rf, scaling, &scheme, &increments, channel.stream_id)?;

    let eps = scaling.epsilon;
    let xi_nodes: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&t| c0 * t / (eps * eps))
        .collect();
    let xi_grid = TimeGrid::from_nodes(xi_nodes)?;
    let rescaled: Vec<f64> = increments.iter().map(|dw| dw * c0.sqrt() / eps).collect();
    let coeff = |i: usize| (paths.b[i], paths.c[i], paths.l[i], paths.m[i]);
    let xtilde_path = simulate_xtilde_on(
        rf,
        scaling,
        &xi_grid,
        coeff,
        &scheme,
        &rescaled,
        channel.stream_id,
    )?;
    let sup_abs_diff = x_path
        .values
        .iter()
        .zip(&xtilde_path.values)
        .map(|(x, xt)| (x - eps * xt).abs())
        .fold(0.0f64, f64::max);
    Ok(TimeChangeCrossCheck {
        sup_abs_diff,
        x_path,
        xtilde_path,
    })
}

/// Squared sandwich diffusion
/// dY = (1 - 2 (l -+ delta) sqrt(Y) g((m -+ delta) sqrt(Y))) dt + 2 sqrt(Y) dB
/// with full truncation: the square root reads max(Y, 0) and each new state
/// is clamped at 0.
pub fn simulate_y_pm(
    rf: &ReversionFunction,
    y0: f64,
    l: f64,
    m: f64,
    delta: f64,
    side: BracketSide,
    grid: &TimeGrid,
    streams: &PathStreams,
) -> Result<SamplePath> {
    if !(y0 >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "y0 must be nonnegative, got {y0}"
        )));
    }
    let (ll, mm) = match side {
        BracketSide::Upper => (l - delta, m - delta),
        BracketSide::Lower => (l + delta, m + delta),
    };
    if !(ll > 0.0) || !(mm > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "shifted parameters must stay positive: l' = {ll}, m' = {mm}"
        )));
    }
    let channel = streams.driving();
    let increments = gaussian_increments(&channel, grid);
    let values = integrate_path(
        grid,
        y0,
        |_t, y| {
            let s = y.max(0.0).sqrt();
            1.0 - 2.0 * ll * s * rf.g(mm * s)
        },
        |_t, y| 2.0 * y.max(0.0).sqrt(),
        StateOutput::PositivePart,
        &increments,
    )?;
    Ok(SamplePath {
        grid: grid.clone(),
        values,
        noise_increments: increments,
        channel_id: channel.stream_id,
        scheme_id: "full_truncation_em".to_string(),
    })
}

/// CIR parameters with the standing condition 2 nu theta / sigma^2 < 1 of the
/// maximal-inequality regime and the derived exponent gamma = 2 nu / sigma^2.
#[derive(Debug, Clone, Copy)]
pub struct CirParams {
    pub nu: f64,
    pub theta: f64,
    pub sigma: f64,
    pub y0: f64,
    pub gamma: f64,
}

impl CirParams {
    pub fn new(nu: f64, theta: f64, sigma: f64, y0: f64) -> Result<Self> {
        if !(nu > 0.0 && theta > 0.0 && sigma > 0.0 && y0 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "CIR parameters must be positive: nu {nu}, theta {theta}, sigma {sigma}, y0 {y0}"
            )));
        }
        let ratio = 2.0 * nu * theta / (sigma * sigma);
        if !(ratio < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "need 2 nu theta / sigma^2 < 1, got {ratio}"
            )));
        }
        Ok(CirParams {
            nu,
            theta,
            sigma,
            y0,
            gamma: 2.0 * nu / (sigma * sigma),
        })
    }
}

/// dY = nu (theta - Y) dt + sigma sqrt(Y) dB with full truncation.
pub fn simulate_cir(params: &CirParams, grid: &TimeGrid, streams: &PathStreams) -> Result<SamplePath> {
    let channel = streams.driving();
    let increments = gaussian_increments(&channel, grid);
    let CirParams { nu, theta, sigma, .. } = *params;
    let values = integrate_path(
        grid,
        params.y0,
        |_t, y| nu * (theta - y.max(0.0)),
        |_t, y| sigma * y.max(0.0).sqrt(),
        StateOutput::PositivePart,
        &increments,
    )?;
    Ok(SamplePath {
        grid: grid.clone(),
        values,
        noise_increments: increments,
        channel_id: channel.stream_id,
        scheme_id: "full_truncation_em".to_string(),
    })
}

/// dY = dim dt + 2 sqrt(Y) dB with full truncation.
pub fn simulate_squared_bessel(
    y0: f64,
    dim: f64,
    grid: &TimeGrid,
    streams: &PathStreams,
) -> Result<SamplePath> {
    if !(y0 >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "y0 must be nonnegative, got {y0}"
        )));
    }
    let channel = streams.driving();
    let increments = gaussian_increments(&channel, grid);
    let values = integrate_path(
        grid,
        y0,
        |_t, _y| dim,
        |_t, y| 2.0 * y.max(0.0).sqrt(),
        StateOutput::PositivePart,
        &increments,
    )?;
    Ok(SamplePath {
        grid: grid.clone(),
        values,
        noise_increments: increments,
        channel_id: channel.stream_id,
        scheme_id: "full_truncation_em".to_string(),
    })
}

/// Solve y - dt * drift(t, y) = u by bracketed secant iteration (Illinois).
fn implicit_step_general(
    drift: &impl Fn(f64, f64) -> f64,
    t: f64,
    dt: f64,
    u: f64,
    step: usize,
) -> Result<f64> {
    let f = |y: f64| y - dt * drift(t, y) - u;
    let mut span = dt * (drift(t, u).abs() + 1.0);
    let (mut lo, mut hi);
    loop {
        lo = u - span;
        hi = u + span;
        if f(lo) <= 0.0 && f(hi) >= 0.0 {
            break;
        }
        span *= 2.0;
        if !span.is_finite() || span > 1e12 {
            return Err(Error::Scheme {
                step,
                t,
                reason: "implicit step could not bracket a root".to_string(),
            });
        }
    }
    let mut flo = f(lo);
    let mut fhi = f(hi);
    let scale = u.abs().max(1.0);
    for _ in 0..200 {
        let mid = if (fhi - flo).abs() > 1e-300 {
            (lo * fhi - hi * flo) / (fhi - flo)
        } else {
            0.5 * (lo + hi)
        };
        let mid = mid.clamp(lo.min(hi), lo.max(hi));
        let fmid = f(mid);
        if fmid.abs() <= 1e-13 * scale || (hi - lo).abs() <= f64::EPSILON * scale {
            return Ok(mid);
        }
        if fmid > 0.0 {
            hi = mid;
            fhi = fmid;
            flo *= 0.5;
        } else {
            lo = mid;
            flo = fmid;
            fhi *= 0.5;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Two drift-implicit paths driven by identical increments. Preconditions are
/// probed numerically: ordered starts and pointwise ordered drifts on a
/// (t, y) grid; violations are a misuse error. With ordered drifts the
/// monotone implicit step keeps the paths ordered.
pub fn coupled_pair(
    drift_low: impl Fn(f64, f64) -> f64,
    drift_high: impl Fn(f64, f64) -> f64,
    shared_noise: &NoiseChannel,
    diffusion: impl Fn(f64, f64) -> f64,
    grid: &TimeGrid,
    y0_low: f64,
    y0_high: f64,
) -> Result<(SamplePath, SamplePath)> {
    if y0_low > y0_high {
        return Err(Error::Misuse(format!(
            "starts must be ordered: y0_low = {y0_low} > y0_high = {y0_high}"
        )));
    }
    let horizon = grid.horizon();
    let y_max = y0_high.abs().max(1.0) * 4.0;
    for ti in 0..=4 {
        let t = horizon * ti as f64 / 4.0;
        for yi in 0..=40 {
            let y = y_max * yi as f64 / 40.0;
            if drift_low(t, y) > drift_high(t, y) + 1e-12 {
                return Err(Error::Misuse(format!(
                    "drift ordering violated on the probe set at (t = {t}, y = {y})"
                )));
            }
        }
    }
    let increments = gaussian_increments(shared_noise, grid);
    let mut low = Vec::with_capacity(grid.nodes().len());
    let mut high = Vec::with_capacity(grid.nodes().len());
    let (mut yl, mut yh) = (y0_low, y0_high);
    low.push(yl);
    high.push(yh);
    for i in 0..grid.steps() {
        let t = grid.nodes()[i];
        let dt = grid.dt(i);
        let ul = yl + diffusion(t, yl) * increments[i];
        let uh = yh + diffusion(t, yh) * increments[i];
        yl = implicit_step_general(&drift_low, t, dt, ul, i)?;
        yh = implicit_step_general(&drift_high, t, dt, uh, i)?;
        for y in [yl, yh] {
            if !y.is_finite() {
                return Err(Error::BlowUp {
                    step: i,
                    t: grid.nodes()[i + 1],
                    value: y,
                });
            }
        }
        low.push(yl);
        high.push(yh);
    }
    let make = |values: Vec<f64>| SamplePath {
        grid: grid.clone(),
        values,
        noise_increments: increments.clone(),
        channel_id: shared_noise.stream_id,
        scheme_id: "drift_implicit_coupled".to_string(),
    };
    Ok((make(low), make(high)))
}
