//! Model ingredients: the reversion function g and its antiderivative G, the
//! even observable f, the time-indexed coefficient channels, and grid-based
//! validation of the structural assumptions they must satisfy.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::quad::{integrate, QuadratureSpec};
use crate::rng::PathStreams;

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Odd, nondecreasing reversion function of superlinear polynomial growth,
/// together with its antiderivative and growth certificate.
#[derive(Clone)]
pub struct ReversionFunction {
    pub name: String,
    g: RealFn,
    g_prime: Option<RealFn>,
    antideriv: Option<RealFn>,
    /// Growth exponent q >= 1.
    pub q: f64,
    /// Lower bound for g(x)/x^q on probed x above the growth threshold.
    pub growth_floor: f64,
    /// Probes below this |x| are exempt from the growth check.
    pub growth_threshold: f64,
    /// Half-width of the domain on which assumptions are spot-checked.
    pub probe_range: f64,
}

impl std::fmt::Debug for ReversionFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ReversionFunction")
            .field("name", &self.name)
            .field("q", &self.q)
            .field("growth_floor", &self.growth_floor)
            .field("probe_range", &self.probe_range)
            .finish()
    }
}

impl ReversionFunction {
    pub fn new(
        name: impl Into<String>,
        g: RealFn,
        antideriv: Option<RealFn>,
        q: f64,
        growth_floor: f64,
        probe_range: f64,
    ) -> Result<Self> {
        if !(q >= 1.0) {
            return Err(Error::InvalidParameter(format!("q must be >= 1, got {q}")));
        }
        if !(growth_floor > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "growth_floor must be positive, got {growth_floor}"
            )));
        }
        if !(probe_range > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "probe_range must be positive, got {probe_range}"
            )));
        }
        Ok(ReversionFunction {
            name: name.into(),
            g,
            g_prime: None,
            antideriv,
            q,
            growth_floor,
            growth_threshold: 0.1 * probe_range,
            probe_range,
        })
    }

    pub fn with_derivative(mut self, g_prime: RealFn) -> Self {
        self.g_prime = Some(g_prime);
        self
    }

    pub fn with_growth_threshold(mut self, threshold: f64) -> Self {
        self.growth_threshold = threshold;
        self
    }

    #[inline]
    pub fn g(&self, x: f64) -> f64 {
        (self.g)(x)
    }

    /// Derivative of g; falls back to a central difference.
    #[inline]
    pub fn g_prime(&self, x: f64) -> f64 {
        match &self.g_prime {
            Some(d) => d(x),
            None => {
                let h = 1e-6 * x.abs().max(1e-3);
                ((self.g)(x + h) - (self.g)(x - h)) / (2.0 * h)
            }
        }
    }

    /// G(x) = int_0^x g; closed form when supplied, adaptive quadrature from 0
    /// (absolute tolerance 1e-10) otherwise.
    pub fn antiderivative(&self, x: f64) -> f64 {
        match &self.antideriv {
            Some(big_g) => big_g(x),
            None => self.antiderivative_delta(0.0, x),
        }
    }

    /// G(b) - G(a), evaluated as one integral when no closed form is available.
    pub fn antiderivative_delta(&self, a: f64, b: f64) -> f64 {
        if let Some(big_g) = &self.antideriv {
            return big_g(b) - big_g(a);
        }
        if a == b {
            return 0.0;
        }
        let quad_spec = QuadratureSpec {
            rel_tol: 1e-9,
            abs_tol: 1e-10,
            max_subdivisions: 2000,
        };
        let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
        let g = self.g.clone();
        match integrate(move |x| g(x), lo, hi, &quad_spec) {
            Ok(r) => sign * r.value,
            Err(_) => f64::NAN,
        }
    }

    /// Truncated variant: g is replaced by sgn(x) * min(|g(x)|, level), with
    /// the antiderivative adjusted to stay consistent.
    pub fn truncated(&self, level: f64) -> Result<ReversionFunction> {
        if !(level > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "truncation level must be positive, got {level}"
            )));
        }
        // Smallest x > 0 with g(x) >= level, by bisection on the probe range.
        let mut lo = 0.0;
        let mut hi = self.probe_range;
        let cross = if self.g(hi) < level {
            None
        } else {
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if self.g(mid) < level {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Some(0.5 * (lo + hi))
        };
        let inner = self.clone();
        let inner_g = self.clone();
        let g: RealFn = Arc::new(move |x: f64| {
            let v = inner_g.g(x);
            v.signum() * v.abs().min(level)
        });
        let antideriv: Option<RealFn> = cross.map(|xc| {
            let g_at = inner.antiderivative(xc);
            let f: RealFn = Arc::new(move |x: f64| {
                let ax = x.abs();
                if ax <= xc {
                    inner.antiderivative(ax)
                } else {
                    g_at + level * (ax - xc)
                }
            });
            f
        });
        Ok(ReversionFunction {
            name: format!("{}|trunc{}", self.name, level),
            g,
            g_prime: None,
            antideriv,
            q: 1.0,
            growth_floor: self.growth_floor,
            growth_threshold: self.growth_threshold,
            probe_range: self.probe_range,
        })
    }

    /// g(x) = sgn(x) |x|^p with antiderivative |x|^{p+1} / (p+1).
    pub fn odd_power(power: f64) -> Result<Self> {
        if !(power >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "odd_power needs power >= 1, got {power}"
            )));
        }
        let g: RealFn = Arc::new(move |x: f64| x.signum() * x.abs().powf(power));
        let big_g: RealFn = Arc::new(move |x: f64| x.abs().powf(power + 1.0) / (power + 1.0));
        let d: RealFn = Arc::new(move |x: f64| power * x.abs().powf(power - 1.0));
        Ok(Self::new(
            format!("odd_power({power})"),
            g,
            Some(big_g),
            power,
            0.5,
            10.0,
        )?
        .with_derivative(d))
    }

    pub fn linear() -> Self {
        Self::odd_power(1.0).unwrap()
    }

    /// g(x) = a x + b x^3 for a >= 0, b > 0.
    pub fn linear_plus_cubic(a: f64, b: f64) -> Result<Self> {
        if !(a >= 0.0) || !(b > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "linear_plus_cubic needs a >= 0 and b > 0, got a = {a}, b = {b}"
            )));
        }
        let g: RealFn = Arc::new(move |x: f64| a * x + b * x * x * x);
        let big_g: RealFn =
            Arc::new(move |x: f64| 0.5 * a * x * x + 0.25 * b * x * x * x * x);
        let d: RealFn = Arc::new(move |x: f64| a + 3.0 * b * x * x);
        Ok(Self::new(
            format!("linear_plus_cubic({a},{b})"),
            g,
            Some(big_g),
            3.0,
            0.5 * b,
            10.0,
        )?
        .with_derivative(d))
    }
}

/// Even observable of finite variation with a polynomial-growth certificate
/// |f(x)| <= C_f (|x|^{q'} + 1).
#[derive(Clone)]
pub struct ObservableFunction {
    pub name: String,
    f: RealFn,
    pub c_f: f64,
    pub q_prime: f64,
    pub probe_range: f64,
    /// Positive jump locations; quadrature panels are pinned here.
    pub breakpoints: Vec<f64>,
}

impl std::fmt::Debug for ObservableFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ObservableFunction")
            .field("name", &self.name)
            .field("c_f", &self.c_f)
            .field("q_prime", &self.q_prime)
            .finish()
    }
}

impl ObservableFunction {
    pub fn new(
        name: impl Into<String>,
        f: RealFn,
        c_f: f64,
        q_prime: f64,
        probe_range: f64,
    ) -> Result<Self> {
        if !(c_f > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "C_f must be positive, got {c_f}"
            )));
        }
        if !(q_prime >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "q' must be nonnegative, got {q_prime}"
            )));
        }
        if !(probe_range > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "probe_range must be positive, got {probe_range}"
            )));
        }
        Ok(ObservableFunction {
            name: name.into(),
            f,
            c_f,
            q_prime,
            probe_range,
            breakpoints: Vec::new(),
        })
    }

    pub fn with_breakpoints(mut self, breakpoints: Vec<f64>) -> Self {
        self.breakpoints = breakpoints;
        self
    }

    #[inline]
    pub fn f(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn square() -> Self {
        let f: RealFn = Arc::new(|x: f64| x * x);
        Self::new("square", f, 1.0, 2.0, 10.0).unwrap()
    }

    pub fn constant(value: f64) -> Self {
        let f: RealFn = Arc::new(move |_x: f64| value);
        Self::new(format!("constant({value})"), f, value.abs().max(1e-12), 0.0, 10.0).unwrap()
    }

    pub fn abs_power(power: f64) -> Result<Self> {
        if !(power >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "abs_power needs power >= 0, got {power}"
            )));
        }
        let f: RealFn = Arc::new(move |x: f64| x.abs().powf(power));
        Self::new(format!("abs_power({power})"), f, 1.0, power, 10.0)
    }

    /// Indicator of [-radius, radius]; finite variation with two jumps.
    pub fn indicator(radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "indicator needs radius > 0, got {radius}"
            )));
        }
        let f: RealFn = Arc::new(move |x: f64| if x.abs() <= radius { 1.0 } else { 0.0 });
        Ok(Self::new(format!("indicator({radius})"), f, 1.0, 0.0, 10.0)?
            .with_breakpoints(vec![radius]))
    }
}

/// One time-indexed coefficient channel. The stochastic variants are clipped
/// into a declared band so positivity holds by construction.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelSpec {
    Constant(f64),
    /// coeffs[0] + coeffs[1] t + coeffs[2] t^2 + ...
    Polynomial { coeffs: Vec<f64> },
    ClippedOu {
        start: f64,
        mean: f64,
        rate: f64,
        vol: f64,
        floor: f64,
        ceil: f64,
    },
    ClippedGeometric {
        start: f64,
        drift: f64,
        vol: f64,
        floor: f64,
        ceil: f64,
    },
}

impl ChannelSpec {
    pub fn is_deterministic(&self) -> bool {
        matches!(self, ChannelSpec::Constant(_) | ChannelSpec::Polynomial { .. })
    }

    pub fn constant_value(&self) -> Option<f64> {
        match self {
            ChannelSpec::Constant(v) => Some(*v),
            _ => None,
        }
    }

    fn eval_deterministic(&self, t: f64) -> Option<f64> {
        match self {
            ChannelSpec::Constant(v) => Some(*v),
            ChannelSpec::Polynomial { coeffs } => {
                let mut acc = 0.0;
                for c in coeffs.iter().rev() {
                    acc = acc * t + c;
                }
                Some(acc)
            }
            _ => None,
        }
    }

    /// Guaranteed value range on [0, horizon], used by the validator.
    fn range_on(&self, horizon: f64, probes: usize) -> (f64, f64) {
        match self {
            ChannelSpec::Constant(v) => (*v, *v),
            ChannelSpec::Polynomial { .. } => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for i in 0..=probes {
                    let t = horizon * i as f64 / probes as f64;
                    let v = self.eval_deterministic(t).unwrap();
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                (lo, hi)
            }
            ChannelSpec::ClippedOu { floor, ceil, .. }
            | ChannelSpec::ClippedGeometric { floor, ceil, .. } => (*floor, *ceil),
        }
    }

    fn sample(&self, grid: &TimeGrid, noise: &crate::rng::NoiseChannel) -> Vec<f64> {
        match self {
            ChannelSpec::Constant(_) | ChannelSpec::Polynomial { .. } => grid
                .nodes()
                .iter()
                .map(|&t| self.eval_deterministic(t).unwrap())
                .collect(),
            ChannelSpec::ClippedOu {
                start,
                mean,
                rate,
                vol,
                floor,
                ceil,
            } => {
                let mut out = Vec::with_capacity(grid.nodes().len());
                let mut x = start.clamp(*floor, *ceil);
                out.push(x);
                for i in 0..grid.steps() {
                    let dt = grid.dt(i);
                    let dw = dt.sqrt() * noise.standard_normal(i as u64);
                    x = (x + rate * (mean - x) * dt + vol * dw).clamp(*floor, *ceil);
                    out.push(x);
                }
                out
            }
            ChannelSpec::ClippedGeometric {
                start,
                drift,
                vol,
                floor,
                ceil,
            } => {
                let mut out = Vec::with_capacity(grid.nodes().len());
                let mut x = start.clamp(*floor, *ceil);
                out.push(x);
                for i in 0..grid.steps() {
                    let dt = grid.dt(i);
                    let dw = dt.sqrt() * noise.standard_normal(i as u64);
                    x = (x + drift * x * dt + vol * x * dw).clamp(*floor, *ceil);
                    out.push(x);
                }
                out
            }
        }
    }
}

pub const CHANNEL_NAMES: [&str; 6] = ["b", "c", "L", "M", "H", "K"];

/// The six coefficient channels of the model plus the optional bounded regime.
#[derive(Debug, Clone)]
pub struct CoefficientModel {
    pub b: ChannelSpec,
    pub c: ChannelSpec,
    pub l: ChannelSpec,
    pub m: ChannelSpec,
    pub h: ChannelSpec,
    pub k: ChannelSpec,
    /// kappa in (0, 1): declares c, L, M in [kappa, 1/kappa] and H, K <= 1/kappa.
    pub kappa_bounds: Option<f64>,
    pub horizon: f64,
}

impl CoefficientModel {
    /// All-constant model.
    pub fn constant(b: f64, c: f64, l: f64, m: f64, h: f64, k: f64, horizon: f64) -> Self {
        CoefficientModel {
            b: ChannelSpec::Constant(b),
            c: ChannelSpec::Constant(c),
            l: ChannelSpec::Constant(l),
            m: ChannelSpec::Constant(m),
            h: ChannelSpec::Constant(h),
            k: ChannelSpec::Constant(k),
            kappa_bounds: None,
            horizon,
        }
    }

    /// Unit model: b = 0 and every other channel constant 1.
    pub fn unit(horizon: f64) -> Self {
        Self::constant(0.0, 1.0, 1.0, 1.0, 1.0, 1.0, horizon)
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa_bounds = Some(kappa);
        self
    }

    pub fn channels(&self) -> [(&'static str, &ChannelSpec); 6] {
        [
            ("b", &self.b),
            ("c", &self.c),
            ("L", &self.l),
            ("M", &self.m),
            ("H", &self.h),
            ("K", &self.k),
        ]
    }

    pub fn is_deterministic(&self) -> bool {
        self.channels().iter().all(|(_, ch)| ch.is_deterministic())
    }

    pub fn is_constant(&self) -> bool {
        self.channels()
            .iter()
            .all(|(_, ch)| ch.constant_value().is_some())
    }
}

/// Sampled values of every channel on a common grid.
#[derive(Debug, Clone)]
pub struct CoefficientPaths {
    pub grid: TimeGrid,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub l: Vec<f64>,
    pub m: Vec<f64>,
    pub h: Vec<f64>,
    pub k: Vec<f64>,
}

/// Sample every coefficient channel on the grid. Pure in (model, grid, seed):
/// diffusion channels draw from noise streams disjoint from the path driver.
pub fn sample_coefficients(
    cm: &CoefficientModel,
    grid: &TimeGrid,
    streams: &PathStreams,
) -> Result<CoefficientPaths> {
    let sampled: Vec<Vec<f64>> = cm
        .channels()
        .iter()
        .enumerate()
        .map(|(idx, (_, ch))| ch.sample(grid, &streams.coefficient(idx as u64)))
        .collect();
    for (idx, (name, _)) in cm.channels().iter().enumerate() {
        let must_be_positive = matches!(*name, "c" | "L" | "M");
        for (node, &v) in sampled[idx].iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::MalformedFunction {
                    name: format!("coefficient {name}"),
                    at: grid.nodes()[node],
                });
            }
            if must_be_positive && !(v > 0.0) {
                return Err(Error::Positivity {
                    channel: name.to_string(),
                    value: v,
                    t: grid.nodes()[node],
                });
            }
        }
    }
    let mut it = sampled.into_iter();
    Ok(CoefficientPaths {
        grid: grid.clone(),
        b: it.next().unwrap(),
        c: it.next().unwrap(),
        l: it.next().unwrap(),
        m: it.next().unwrap(),
        h: it.next().unwrap(),
        k: it.next().unwrap(),
    })
}

/// Scaling parameters of one experiment instance.
#[derive(Debug, Clone, Copy)]
pub struct ScalingConfig {
    pub epsilon: f64,
    /// Initial value is x_0 = epsilon * z0.
    pub z0: f64,
    pub p: f64,
    pub eta: f64,
}

impl ScalingConfig {
    pub fn new(epsilon: f64, z0: f64, p: f64, eta: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        if !(p >= 1.0) {
            return Err(Error::InvalidParameter(format!("p must be >= 1, got {p}")));
        }
        if !(eta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "eta must be positive, got {eta}"
            )));
        }
        Ok(ScalingConfig { epsilon, z0, p, eta })
    }

    pub fn x0(&self) -> f64 {
        self.epsilon * self.z0
    }
}

/// Outcome of one structural check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Worst violation margin; nonpositive margins pass.
    pub worst_margin: f64,
    pub worst_location: f64,
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: &str, margin: f64, location: f64, tolerance: f64) {
        self.checks.push(CheckResult {
            name: name.to_string(),
            passed: margin <= tolerance,
            worst_margin: margin,
            worst_location: location,
        });
    }
}

pub const DEFAULT_PROBE_POINTS: usize = 10_000;

/// Log-spaced positive probes over [range * 1e-3, range].
fn probe_points(range: f64, count: usize) -> Vec<f64> {
    let lo = (range * 1e-3).ln();
    let hi = range.ln();
    let n = count.max(2);
    (0..n)
        .map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Grid-based validation of the structural assumptions on g, G, f and the
/// coefficient channels. Probes are spot checks, not proofs.
pub fn validate_model(
    rf: &ReversionFunction,
    of: &ObservableFunction,
    cm: &CoefficientModel,
) -> Result<ValidationReport> {
    validate_model_with(rf, of, cm, DEFAULT_PROBE_POINTS)
}

pub fn validate_model_with(
    rf: &ReversionFunction,
    of: &ObservableFunction,
    cm: &CoefficientModel,
    probe_count: usize,
) -> Result<ValidationReport> {
    let mut report = ValidationReport::default();
    let probes = probe_points(rf.probe_range, probe_count);

    let finite = |name: &str, x: f64, v: f64| -> Result<f64> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::MalformedFunction {
                name: name.to_string(),
                at: x,
            })
        }
    };

    // g(0) = 0
    let g0 = finite("g", 0.0, rf.g(0.0))?;
    report.push("g(0) = 0", g0.abs(), 0.0, 1e-12);

    // Oddness of g, relative tolerance 1e-12.
    let mut worst = 0.0;
    let mut at = 0.0;
    let mut g_scale: f64 = 0.0;
    for &x in &probes {
        let gp = finite("g", x, rf.g(x))?;
        let gm = finite("g", -x, rf.g(-x))?;
        g_scale = g_scale.max(gp.abs());
        let denom = gp.abs().max(gm.abs()).max(f64::MIN_POSITIVE);
        let rel = (gp + gm).abs() / denom;
        if rel > worst {
            worst = rel;
            at = x;
        }
    }
    report.push("g odd", worst, at, 1e-12);

    // g nondecreasing over the full signed probe grid.
    let mut signed: Vec<f64> = probes.iter().map(|&x| -x).collect();
    signed.reverse();
    signed.push(0.0);
    signed.extend(probes.iter().copied());
    let mut worst = f64::NEG_INFINITY;
    let mut at = 0.0;
    for w in signed.windows(2) {
        let drop = rf.g(w[0]) - rf.g(w[1]);
        if drop > worst {
            worst = drop;
            at = w[0];
        }
    }
    report.push("g nondecreasing", worst, at, 1e-12 * g_scale.max(1.0));

    // G(0) = 0 and evenness of G.
    let big_g0 = finite("G", 0.0, rf.antiderivative(0.0))?;
    report.push("G(0) = 0", big_g0.abs(), 0.0, 1e-12);
    let mut worst = 0.0;
    let mut at = 0.0;
    for &x in &probes {
        let gp = finite("G", x, rf.antiderivative(x))?;
        let gm = finite("G", -x, rf.antiderivative(-x))?;
        let denom = gp.abs().max(gm.abs()).max(f64::MIN_POSITIVE);
        let rel = (gp - gm).abs() / denom;
        if rel > worst {
            worst = rel;
            at = x;
        }
    }
    report.push("G even", worst, at, 1e-12);

    // Central difference of G against g, relative error < 1e-6.
    let mut worst = 0.0;
    let mut at = 0.0;
    for &x in &probes {
        let h = 1e-4 * x;
        let fd = rf.antiderivative_delta(x - h, x + h) / (2.0 * h);
        let gx = rf.g(x);
        let denom = gx.abs().max(fd.abs()).max(1e-9 * g_scale).max(f64::MIN_POSITIVE);
        let rel = (fd - gx).abs() / denom;
        if rel > worst {
            worst = rel;
            at = x;
        }
    }
    report.push("G' matches g", worst, at, 1e-6);

    // Growth floor above the declared threshold.
    let mut worst = f64::NEG_INFINITY;
    let mut at = 0.0;
    let mut any = false;
    for &x in &probes {
        if x < rf.growth_threshold {
            continue;
        }
        any = true;
        let deficit = rf.growth_floor - rf.g(x) / x.powf(rf.q);
        if deficit > worst {
            worst = deficit;
            at = x;
        }
    }
    if !any {
        worst = f64::INFINITY;
    }
    report.push("g growth floor", worst, at, 1e-12);

    // Evenness of f.
    let f_probes = probe_points(of.probe_range, probe_count);
    let mut worst = 0.0;
    let mut at = 0.0;
    for &x in &f_probes {
        let fp = finite("f", x, of.f(x))?;
        let fm = finite("f", -x, of.f(-x))?;
        let denom = fp.abs().max(fm.abs()).max(f64::MIN_POSITIVE);
        let rel = (fp - fm).abs() / denom;
        if rel > worst {
            worst = rel;
            at = x;
        }
    }
    report.push("f even", worst, at, 1e-12);

    // Polynomial growth certificate for f.
    let mut worst = f64::NEG_INFINITY;
    let mut at = 0.0;
    let mut f_scale: f64 = 0.0;
    for &x in &f_probes {
        let fx = of.f(x);
        f_scale = f_scale.max(fx.abs());
        let excess = fx.abs() - of.c_f * (x.abs().powf(of.q_prime) + 1.0);
        if excess > worst {
            worst = excess;
            at = x;
        }
    }
    report.push("f growth bound", worst, at, 1e-12 * f_scale.max(1.0));

    // Coefficient channels.
    let time_probes = 1000;
    for (name, ch) in cm.channels() {
        let (lo, hi) = ch.range_on(cm.horizon, time_probes);
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::MalformedFunction {
                name: format!("coefficient {name}"),
                at: f64::NAN,
            });
        }
        match name {
            "c" | "L" | "M" => {
                report.push(&format!("{name} positive"), -lo, 0.0, -f64::MIN_POSITIVE)
            }
            "H" | "K" => report.push(&format!("{name} nonnegative"), -lo, 0.0, 0.0),
            _ => {}
        }
        if let Some(kappa) = cm.kappa_bounds {
            match name {
                "c" | "L" | "M" => {
                    let margin = (kappa - lo).max(hi - 1.0 / kappa);
                    report.push(&format!("{name} within kappa band"), margin, 0.0, 0.0);
                }
                "H" | "K" => {
                    report.push(&format!("{name} below 1/kappa"), hi - 1.0 / kappa, 0.0, 0.0);
                }
                _ => {}
            }
        }
    }

    if cm.is_deterministic() {
        if cm.kappa_bounds.is_some() {
            // Constant or deterministic channels inside a declared band make
            // the exponential and polynomial moment conditions finite by
            // inspection; record that as a passing check.
            report.push("moment assumptions (deterministic case)", 0.0, 0.0, 0.0);
        }
    } else {
        report.warnings.push(
            "stochastic coefficient channels: integrability assumptions are not verified \
             numerically; ensure them for the chosen model"
                .to_string(),
        );
    }

    Ok(report)
}

/// Build a reversion function from a registry name plus numeric parameters.
pub fn reversion_from_registry(
    name: &str,
    params: &BTreeMap<String, f64>,
) -> Result<ReversionFunction> {
    let get = |key: &str, default: Option<f64>| -> Result<f64> {
        params.get(key).copied().or(default).ok_or_else(|| {
            Error::Config(format!("reversion `{name}` needs parameter `{key}`"))
        })
    };
    match name {
        "odd_power" => ReversionFunction::odd_power(get("power", Some(3.0))?),
        "linear" => Ok(ReversionFunction::linear()),
        "linear_plus_cubic" => {
            ReversionFunction::linear_plus_cubic(get("a", Some(1.0))?, get("b", Some(1.0))?)
        }
        other => Err(Error::Config(format!(
            "unknown reversion function `{other}` (known: odd_power, linear, linear_plus_cubic)"
        ))),
    }
}

/// Build an observable from a registry name plus numeric parameters.
pub fn observable_from_registry(
    name: &str,
    params: &BTreeMap<String, f64>,
) -> Result<ObservableFunction> {
    let get = |key: &str, default: Option<f64>| -> Result<f64> {
        params.get(key).copied().or(default).ok_or_else(|| {
            Error::Config(format!("observable `{name}` needs parameter `{key}`"))
        })
    };
    match name {
        "square" => Ok(ObservableFunction::square()),
        "constant" => Ok(ObservableFunction::constant(get("value", Some(1.0))?)),
        "abs_power" => ObservableFunction::abs_power(get("power", Some(2.0))?),
        "indicator" => ObservableFunction::indicator(get("radius", Some(1.0))?),
        other => Err(Error::Config(format!(
            "unknown observable `{other}` (known: square, constant, abs_power, indicator)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededNoiseSource;

    #[test]
    fn odd_monomial_passes_every_check() {
        let rf = ReversionFunction::odd_power(3.0).unwrap();
        let of = ObservableFunction::square();
        let cm = CoefficientModel::unit(1.0);
        let report = validate_model(&rf, &of, &cm).unwrap();
        assert!(report.passed(), "failed checks: {:?}", report.checks);
    }

    #[test]
    fn even_function_fails_oddness() {
        let g: RealFn = Arc::new(|x: f64| x * x);
        let rf = ReversionFunction::new("even", g, None, 2.0, 0.5, 10.0).unwrap();
        let of = ObservableFunction::square();
        let cm = CoefficientModel::unit(1.0);
        let report = validate_model_with(&rf, &of, &cm, 500).unwrap();
        assert!(!report.check("g odd").unwrap().passed);
    }

    #[test]
    fn growth_certificate_example() {
        // f(x) = x^2 + 1 with C_f = 2, q' = 2: x^2 + 1 <= 2 (x^2 + 1).
        let f: RealFn = Arc::new(|x: f64| x * x + 1.0);
        let of = ObservableFunction::new("square_plus_one", f, 2.0, 2.0, 10.0).unwrap();
        let rf = ReversionFunction::linear();
        let cm = CoefficientModel::unit(1.0);
        let report = validate_model_with(&rf, &of, &cm, 500).unwrap();
        assert!(report.check("f growth bound").unwrap().passed);
    }

    #[test]
    fn quadrature_antiderivative_matches_closed_form() {
        let g: RealFn = Arc::new(|x: f64| x.signum() * x.abs().powf(3.0));
        let rf = ReversionFunction::new("cubic_noG", g, None, 3.0, 0.5, 10.0).unwrap();
        for x in [0.5f64, 1.0, 2.0, -1.5] {
            let expected = x.abs().powi(4) / 4.0;
            assert!(
                (rf.antiderivative(x) - expected).abs() < 1e-9,
                "G({x}) = {} vs {expected}",
                rf.antiderivative(x)
            );
        }
    }

    #[test]
    fn non_finite_reversion_is_a_malformed_function_error() {
        // ln(x - 1/2) is NaN on most of the probe grid.
        let g: RealFn = Arc::new(|x: f64| (x - 0.5).ln());
        let rf = ReversionFunction::new("bad", g, None, 1.0, 0.5, 10.0).unwrap();
        let of = ObservableFunction::square();
        let cm = CoefficientModel::unit(1.0);
        assert!(matches!(
            validate_model_with(&rf, &of, &cm, 100),
            Err(Error::MalformedFunction { .. })
        ));
    }

    #[test]
    fn constant_model_sampling() {
        let cm = CoefficientModel::unit(1.0);
        let grid = TimeGrid::uniform(1.0, 10).unwrap();
        let streams = SeededNoiseSource::new(7).path(0);
        let paths = sample_coefficients(&cm, &grid, &streams).unwrap();
        assert!(paths.b.iter().all(|&v| v == 0.0));
        assert!(paths.c.iter().all(|&v| v == 1.0));
        assert_eq!(paths.k.len(), 11);
    }

    #[test]
    fn affine_c_channel() {
        let mut cm = CoefficientModel::unit(1.0);
        cm.c = ChannelSpec::Polynomial {
            coeffs: vec![1.0, 0.5],
        };
        let grid = TimeGrid::uniform(1.0, 2).unwrap();
        let streams = SeededNoiseSource::new(7).path(0);
        let paths = sample_coefficients(&cm, &grid, &streams).unwrap();
        assert_eq!(paths.c, vec![1.0, 1.25, 1.5]);
    }

    #[test]
    fn geometric_channel_deterministic_under_seed() {
        let mut cm = CoefficientModel::unit(1.0);
        cm.l = ChannelSpec::ClippedGeometric {
            start: 1.0,
            drift: 0.1,
            vol: 0.3,
            floor: 0.5,
            ceil: 2.0,
        };
        let grid = TimeGrid::uniform(1.0, 50).unwrap();
        let streams = SeededNoiseSource::new(99).path(3);
        let a = sample_coefficients(&cm, &grid, &streams).unwrap();
        let b = sample_coefficients(&cm, &grid, &streams).unwrap();
        assert_eq!(a.l, b.l);
        assert!(a.l.iter().all(|&v| (0.5..=2.0).contains(&v)));
    }

    #[test]
    fn nonpositive_c_is_rejected() {
        let mut cm = CoefficientModel::unit(1.0);
        cm.c = ChannelSpec::Polynomial {
            coeffs: vec![0.1, -1.0],
        };
        let grid = TimeGrid::uniform(1.0, 10).unwrap();
        let streams = SeededNoiseSource::new(7).path(0);
        assert!(matches!(
            sample_coefficients(&cm, &grid, &streams),
            Err(Error::Positivity { .. })
        ));
    }

    #[test]
    fn stochastic_channels_warn_on_moment_assumptions() {
        let mut cm = CoefficientModel::unit(1.0).with_kappa(0.25);
        cm.l = ChannelSpec::ClippedOu {
            start: 1.0,
            mean: 1.0,
            rate: 1.0,
            vol: 0.2,
            floor: 0.5,
            ceil: 2.0,
        };
        let rf = ReversionFunction::linear();
        let of = ObservableFunction::square();
        let report = validate_model_with(&rf, &of, &cm, 200).unwrap();
        assert!(!report.warnings.is_empty());
        // Constant case instead records the trivially-satisfied check.
        let cm2 = CoefficientModel::unit(1.0).with_kappa(0.25);
        let report2 = validate_model_with(&rf, &of, &cm2, 200).unwrap();
        assert!(report2
            .check("moment assumptions (deterministic case)")
            .is_some());
        assert!(report2.warnings.is_empty());
    }

    #[test]
    fn truncated_reversion_caps_g_and_keeps_antiderivative_consistent() {
        let rf = ReversionFunction::odd_power(3.0).unwrap();
        let tr = rf.truncated(2.0).unwrap();
        assert_eq!(tr.g(5.0), 2.0);
        assert_eq!(tr.g(-5.0), -2.0);
        assert!((tr.g(1.0) - 1.0).abs() < 1e-15);
        // d/dx G_trunc = g_trunc away from the cap point.
        for x in [0.5, 1.0, 3.0, 6.0] {
            let h = 1e-6;
            let fd = (tr.antiderivative(x + h) - tr.antiderivative(x - h)) / (2.0 * h);
            assert!((fd - tr.g(x)).abs() < 1e-6, "x = {x}: {fd} vs {}", tr.g(x));
        }
    }
}
