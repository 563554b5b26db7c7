//! Adaptive Gauss–Kronrod quadrature.
//!
//! Panels are bisected adaptively, splitting the worst error first. Ratios of
//! integrals against a common weight are evaluated on a shared panel set so
//! that a numerator proportional to the denominator yields the exact constant.

use crate::error::{Error, Result};

/// Tolerances and budget for the quadrature routines.
#[derive(Debug, Clone)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_subdivisions: 4000,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "quadrature tolerances must be positive: rel {}, abs {}",
                self.rel_tol, self.abs_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

// 15-point Kronrod abscissae on [-1, 1] (positive half) with the embedded
// 7-point Gauss rule on the odd-indexed nodes.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One Gauss–Kronrod pass over [a, b]: returns (kronrod value, |K - G|).
fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<(f64, f64)> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = eval(f, mid)?;
    let mut result_k = WGK[7] * fc;
    let mut result_g = WG[3] * fc;
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = eval(f, mid - x)?;
        let f2 = eval(f, mid + x)?;
        result_k += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            result_g += WG[j / 2] * (f1 + f2);
        }
    }
    result_k *= half;
    result_g *= half;
    Ok((result_k, (result_k - result_g).abs()))
}

fn eval<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64> {
    let y = f(x);
    if y.is_nan() {
        return Err(Error::MalformedFunction {
            name: "integrand".into(),
            at: x,
        });
    }
    Ok(y)
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn initial_panels<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
) -> Result<Vec<Panel>> {
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&x| x > a && x < b)
        .collect();
    cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    cuts.dedup();
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(a);
    edges.extend(cuts);
    edges.push(b);
    let mut panels = Vec::with_capacity(edges.len() - 1);
    for w in edges.windows(2) {
        let (value, error) = kronrod15(f, w[0], w[1])?;
        panels.push(Panel {
            a: w[0],
            b: w[1],
            value,
            error,
        });
    }
    Ok(panels)
}

fn refine<F: Fn(f64) -> f64>(
    f: &F,
    panels: &mut Vec<Panel>,
    rel_tol: f64,
    abs_tol: f64,
    max_subdivisions: usize,
) -> Result<()> {
    let mut splits = 0usize;
    loop {
        let total: f64 = panels.iter().map(|p| p.value).sum();
        let err: f64 = panels.iter().map(|p| p.error).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(());
        }
        if splits >= max_subdivisions {
            return Err(Error::QuadratureFailure(format!(
                "error {err:.3e} above tolerance after {splits} subdivisions"
            )));
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let Panel { a, b, .. } = panels[worst];
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            return Err(Error::QuadratureFailure(format!(
                "panel [{a}, {b}] cannot be split further"
            )));
        }
        let (v1, e1) = kronrod15(f, a, m)?;
        let (v2, e2) = kronrod15(f, m, b)?;
        panels[worst] = Panel {
            a,
            b: m,
            value: v1,
            error: e1,
        };
        panels.push(Panel {
            a: m,
            b,
            value: v2,
            error: e2,
        });
        splits += 1;
    }
}

fn sum_sorted(panels: &mut [Panel]) -> (f64, f64) {
    panels.sort_by(|p, q| p.a.partial_cmp(&q.a).unwrap());
    let value = panels.iter().map(|p| p.value).sum();
    let error = panels.iter().map(|p| p.error).sum();
    (value, error)
}

/// Adaptive integral of `f` over [a, b].
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<QuadResult> {
    integrate_with_breakpoints(f, a, b, &[], spec)
}

/// Adaptive integral with panel edges pinned at the given interior breakpoints.
pub fn integrate_with_breakpoints<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    spec: &QuadratureSpec,
) -> Result<QuadResult> {
    spec.validate()?;
    if !(b > a) {
        return Err(Error::InvalidParameter(format!(
            "integration bounds must satisfy a < b, got [{a}, {b}]"
        )));
    }
    let mut panels = initial_panels(&f, a, b, breakpoints)?;
    refine(&f, &mut panels, spec.rel_tol, spec.abs_tol, spec.max_subdivisions)?;
    let (value, error) = sum_sorted(&mut panels);
    Ok(QuadResult {
        value,
        error,
        panels: panels.len(),
    })
}

/// Ratio of two integrals over [a, b] sharing one panel decomposition.
///
/// The denominator drives the first adaptive phase; the numerator is then
/// evaluated on those panels and refined further only where needed. When the
/// numerator is a constant multiple of the denominator the returned ratio is
/// that constant to the last bit, because both sums run over identical panels
/// in identical order.
pub fn ratio_on_shared_panels<N, D>(
    num: N,
    den: D,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    spec: &QuadratureSpec,
) -> Result<RatioResult>
where
    N: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    spec.validate()?;
    if !(b > a) {
        return Err(Error::InvalidParameter(format!(
            "integration bounds must satisfy a < b, got [{a}, {b}]"
        )));
    }
    let mut den_panels = initial_panels(&den, a, b, breakpoints)?;
    refine(&den, &mut den_panels, spec.rel_tol, spec.abs_tol, spec.max_subdivisions)?;
    den_panels.sort_by(|p, q| p.a.partial_cmp(&q.a).unwrap());

    // Evaluate the numerator on the shared panels.
    let mut pairs: Vec<(Panel, Panel)> = Vec::with_capacity(den_panels.len());
    for dp in &den_panels {
        let (value, error) = kronrod15(&num, dp.a, dp.b)?;
        pairs.push((
            *dp,
            Panel {
                a: dp.a,
                b: dp.b,
                value,
                error,
            },
        ));
    }

    // Second phase: split only where the numerator error dominates.
    let mut splits = 0usize;
    loop {
        let num_total: f64 = pairs.iter().map(|p| p.1.value).sum();
        let num_err: f64 = pairs.iter().map(|p| p.1.error).sum();
        if num_err <= spec.abs_tol.max(spec.rel_tol * num_total.abs()) {
            break;
        }
        if splits >= spec.max_subdivisions {
            return Err(Error::QuadratureFailure(format!(
                "numerator error {num_err:.3e} above tolerance after {splits} subdivisions"
            )));
        }
        let worst = pairs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .1.error.partial_cmp(&y.1 .1.error).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let (a0, b0) = (pairs[worst].0.a, pairs[worst].0.b);
        let m = 0.5 * (a0 + b0);
        if m <= a0 || m >= b0 {
            break; // panel at rounding resolution; keep current estimate
        }
        let mut halves = Vec::with_capacity(2);
        for (lo, hi) in [(a0, m), (m, b0)] {
            let (dv, de) = kronrod15(&den, lo, hi)?;
            let (nv, ne) = kronrod15(&num, lo, hi)?;
            halves.push((
                Panel {
                    a: lo,
                    b: hi,
                    value: dv,
                    error: de,
                },
                Panel {
                    a: lo,
                    b: hi,
                    value: nv,
                    error: ne,
                },
            ));
        }
        pairs[worst] = halves[0];
        pairs.push(halves[1]);
        pairs.sort_by(|x, y| x.0.a.partial_cmp(&y.0.a).unwrap());
        splits += 1;
    }

    let den_value: f64 = pairs.iter().map(|p| p.0.value).sum();
    let den_error: f64 = pairs.iter().map(|p| p.0.error).sum();
    let num_value: f64 = pairs.iter().map(|p| p.1.value).sum();
    let num_error: f64 = pairs.iter().map(|p| p.1.error).sum();
    if !(den_value > 0.0) || !den_value.is_finite() {
        return Err(Error::QuadratureFailure(format!(
            "denominator integral must be finite and positive, got {den_value}"
        )));
    }
    Ok(RatioResult {
        ratio: num_value / den_value,
        num_value,
        den_value,
        num_error,
        den_error,
        panels: pairs.len(),
    })
}

#[derive(Debug, Clone, Copy)]
pub struct RatioResult {
    pub ratio: f64,
    pub num_value: f64,
    pub den_value: f64,
    pub num_error: f64,
    pub den_error: f64,
    pub panels: usize,
}
