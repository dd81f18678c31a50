//! Adaptive Gauss-Kronrod integration.
//!
//! One-dimensional integrals over finite intervals, the half line `[0, ∞)` and
//! the full line are handled by a globally adaptive 21-point Gauss-Kronrod
//! scheme (QUADPACK `qag` style). Infinite axes are mapped onto finite
//! intervals by a change of variables; multi-dimensional integrals are computed
//! by nesting the one-dimensional rule axis by axis, innermost axis last.
//!
//! Panel contributions are always summed in ascending order of their left
//! endpoint, so results are bitwise reproducible for a fixed spec no matter how
//! the integrand evaluations were scheduled.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::FRAC_PI_2;
use std::fmt::Debug;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported tensor-product dimension.
pub const MAX_DIMENSION: usize = 6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(String),
    #[error("invalid axis: {0}")]
    InvalidAxis(String),
    #[error("integration dimension {0} outside 1..={MAX_DIMENSION}")]
    Dimension(usize),
    #[error("tolerance not met: best estimate {value:e} with error bound {error:e}")]
    ToleranceNotMet { value: f64, error: f64 },
}

/// Accuracy targets and work limits for one integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    pub truncation_tail_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self::for_dimension(1)
    }
}

impl QuadratureSpec {
    /// Default targets: tight for d ≤ 2, relaxed for higher dimensions.
    pub fn for_dimension(d: usize) -> Self {
        if d <= 2 {
            QuadratureSpec {
                rel_tol: 1e-8,
                abs_tol: 1e-12,
                max_subdivisions: 1000,
                truncation_tail_tol: 1e-12,
            }
        } else {
            QuadratureSpec {
                rel_tol: 1e-6,
                abs_tol: 1e-10,
                max_subdivisions: 500,
                truncation_tail_tol: 1e-10,
            }
        }
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_max_subdivisions(mut self, max_subdivisions: usize) -> Self {
        self.max_subdivisions = max_subdivisions;
        self
    }

    pub fn validate(&self) -> Result<(), QuadratureError> {
        let unit = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(QuadratureError::InvalidSpec(format!(
                    "{name} must lie in (0, 1), got {v}"
                )))
            }
        };
        unit("rel_tol", self.rel_tol)?;
        unit("abs_tol", self.abs_tol)?;
        unit("truncation_tail_tol", self.truncation_tail_tol)?;
        if self.max_subdivisions == 0 {
            return Err(QuadratureError::InvalidSpec(
                "max_subdivisions must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Error target for an integral of the given magnitude.
    pub fn target(&self, magnitude: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * magnitude)
    }

    /// Spec handed to the inner levels of a nested integration.
    fn inner(&self) -> Self {
        QuadratureSpec {
            rel_tol: self.rel_tol * 0.2,
            abs_tol: self.abs_tol * 0.2,
            ..*self
        }
    }
}

/// Values the quadrature can accumulate: reals and complex numbers.
pub trait QuadValue:
    Copy + Send + Sync + Debug + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn modulus(&self) -> f64;
    fn is_finite_value(&self) -> bool;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn modulus(&self) -> f64 {
        self.abs()
    }
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn modulus(&self) -> f64 {
        self.norm()
    }
    fn is_finite_value(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult<V> {
    pub value: V,
    pub est_error: f64,
    pub evaluations: u64,
    pub converged: bool,
}

impl<V: QuadValue> IntegralResult<V> {
    /// Converts a non-converged result into [`QuadratureError::ToleranceNotMet`].
    pub fn require_converged(self) -> Result<Self, QuadratureError> {
        if self.converged {
            Ok(self)
        } else {
            Err(QuadratureError::ToleranceNotMet {
                value: self.value.modulus(),
                error: self.est_error,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisKind {
    Finite,
    HalfLine,
    FullLine,
}

/// Change of variables used to bring an axis onto a finite interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    /// No mapping. On an infinite axis this truncates at a point found by
    /// probing the integrand against `truncation_tail_tol`.
    Identity,
    /// Half line: `t = -ln u`, `u ∈ (0, 1]`. Full line: `x = -sgn(w) ln|w|`,
    /// `w ∈ [-1, 1]`, split at `w = 0`. Infinity sits at mapped zero, where
    /// floats are dense, so tails out to `|x| ≈ 700` are reachable.
    /// Meant for integrands decaying like `e^{-a|x|}` with `a ≥ 1` times a
    /// function of `e^{-|x|}`. Slower or algebraic tails become endpoint
    /// singularities in `u` that the error estimate can miss; use
    /// `RationalMap` for those.
    ExpMap,
    /// Half line: `t = (1 - u) / u`. Full line: `x = u / (1 - u²)`.
    RationalMap,
    /// Full line only: `x = tan θ`.
    Tangent,
}

/// One integration axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    kind: AxisKind,
    lower: f64,
    upper: f64,
    transform: Transform,
    breakpoints: Vec<f64>,
}

impl Axis {
    pub fn finite(a: f64, b: f64) -> Self {
        Axis {
            kind: AxisKind::Finite,
            lower: a,
            upper: b,
            transform: Transform::Identity,
            breakpoints: Vec::new(),
        }
    }

    /// `[0, ∞)` with the exponential map.
    pub fn half_line() -> Self {
        Axis {
            kind: AxisKind::HalfLine,
            lower: 0.0,
            upper: f64::INFINITY,
            transform: Transform::ExpMap,
            breakpoints: Vec::new(),
        }
    }

    /// `(-∞, ∞)` with the tangent map.
    pub fn full_line() -> Self {
        Axis {
            kind: AxisKind::FullLine,
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
            transform: Transform::Tangent,
            breakpoints: Vec::new(),
        }
    }

    pub fn with_transform(mut self, transform: Transform) -> Self {
        self.transform = transform;
        self
    }

    /// Points (in the original variable) where the integrand is not smooth.
    pub fn with_breakpoints(mut self, points: impl IntoIterator<Item = f64>) -> Self {
        self.breakpoints.extend(points);
        self
    }

    pub fn kind(&self) -> AxisKind {
        self.kind
    }

    pub fn transform(&self) -> Transform {
        self.transform
    }

    fn validate(&self) -> Result<(), QuadratureError> {
        match (self.kind, self.transform) {
            (AxisKind::Finite, Transform::Identity) => {
                if !(self.lower.is_finite() && self.upper.is_finite() && self.lower < self.upper) {
                    return Err(QuadratureError::InvalidAxis(format!(
                        "finite axis needs a < b, got [{}, {}]",
                        self.lower, self.upper
                    )));
                }
            }
            (AxisKind::Finite, t) => {
                return Err(QuadratureError::InvalidAxis(format!(
                    "transform {t:?} is only meaningful on infinite axes"
                )))
            }
            (AxisKind::HalfLine, Transform::Tangent) => {
                return Err(QuadratureError::InvalidAxis(
                    "tangent map needs a full-line axis".into(),
                ))
            }
            _ => {}
        }
        if self.breakpoints.iter().any(|p| !p.is_finite()) {
            return Err(QuadratureError::InvalidAxis("non-finite breakpoint".into()));
        }
        Ok(())
    }

    /// Interval in the mapped variable.
    fn mapped_interval(&self) -> (f64, f64) {
        match (self.kind, self.transform) {
            (AxisKind::Finite, _) => (self.lower, self.upper),
            (AxisKind::HalfLine, _) => (0.0, 1.0),
            (AxisKind::FullLine, Transform::ExpMap) => (-1.0, 1.0),
            (AxisKind::FullLine, Transform::RationalMap) => (-1.0, 1.0),
            (AxisKind::FullLine, _) => (-FRAC_PI_2, FRAC_PI_2),
        }
    }

    /// Original variable and Jacobian at mapped point `u`.
    #[inline]
    fn map(&self, u: f64) -> (f64, f64) {
        match (self.kind, self.transform) {
            (AxisKind::Finite, _) | (_, Transform::Identity) => (u, 1.0),
            (AxisKind::HalfLine, Transform::ExpMap) => (-u.ln(), 1.0 / u),
            (AxisKind::HalfLine, Transform::RationalMap) => ((1.0 - u) / u, 1.0 / (u * u)),
            (AxisKind::FullLine, Transform::ExpMap) => {
                let a = u.abs();
                (-a.ln().copysign(u), 1.0 / a)
            }
            (AxisKind::FullLine, Transform::RationalMap) => {
                let r = 1.0 - u * u;
                (u / r, (1.0 + u * u) / (r * r))
            }
            (AxisKind::FullLine, Transform::Tangent) => {
                let c = u.cos();
                (u.tan(), 1.0 / (c * c))
            }
            (AxisKind::HalfLine, Transform::Tangent) => unreachable!("rejected by validate"),
        }
    }

    fn unmap(&self, x: f64) -> f64 {
        match (self.kind, self.transform) {
            (AxisKind::Finite, _) | (_, Transform::Identity) => x,
            (AxisKind::HalfLine, Transform::ExpMap) => (-x).exp(),
            (AxisKind::HalfLine, Transform::RationalMap) => 1.0 / (1.0 + x),
            // x = 0 maps to both ends of [-1, 1]; no interior edge needed
            (AxisKind::FullLine, Transform::ExpMap) if x == 0.0 => 1.0,
            (AxisKind::FullLine, Transform::ExpMap) => (-x.abs()).exp().copysign(x),
            (AxisKind::FullLine, Transform::RationalMap) => {
                if x == 0.0 {
                    0.0
                } else {
                    ((1.0 + 4.0 * x * x).sqrt() - 1.0) / (2.0 * x)
                }
            }
            (AxisKind::FullLine, Transform::Tangent) => x.atan(),
            (AxisKind::HalfLine, Transform::Tangent) => unreachable!("rejected by validate"),
        }
    }
}

/// One evaluation of a (possibly nested) integrand: the value plus the error
/// and work carried up from inner integrations.
#[derive(Debug, Clone, Copy)]
struct Sample<V> {
    value: V,
    error: f64,
    converged: bool,
    evaluations: u64,
}

impl<V: QuadValue> Sample<V> {
    fn point(value: V) -> Self {
        Sample {
            value,
            error: 0.0,
            converged: true,
            evaluations: 1,
        }
    }

    fn zero() -> Self {
        Sample {
            value: V::zero(),
            error: 0.0,
            converged: true,
            evaluations: 0,
        }
    }
}

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[derive(Debug, Clone, Copy)]
struct Panel<V> {
    a: f64,
    b: f64,
    value: V,
    error: f64,
    converged: bool,
}

impl<V> PartialEq for Panel<V> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<V> Eq for Panel<V> {}
impl<V> PartialOrd for Panel<V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<V> Ord for Panel<V> {
    // Largest error first; ties go to the leftmost panel.
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 {
            res_asc * scale
        } else {
            res_asc
        };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

/// Applies the 21-point rule on `[a, b]`.
fn gk21<V, F>(f: &F, a: f64, b: f64, parallel: bool) -> (Panel<V>, u64)
where
    V: QuadValue,
    F: Fn(f64) -> Sample<V> + Sync,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    // abscissae: index 0 is the center, then symmetric pairs.
    let mut xs = [center; 21];
    for j in 0..10 {
        xs[1 + 2 * j] = center - half * XGK[j];
        xs[2 + 2 * j] = center + half * XGK[j];
    }
    let samples: Vec<Sample<V>> = if parallel {
        xs.par_iter().map(|&x| f(x)).collect()
    } else {
        xs.iter().map(|&x| f(x)).collect()
    };

    let fc = samples[0].value;
    let mut res_k = fc * WGK[10];
    let mut res_g = V::zero();
    let mut res_abs = fc.modulus() * WGK[10];
    let mut inner_err = samples[0].error * WGK[10];
    let mut converged = samples[0].converged;
    let mut evals = samples[0].evaluations;
    for j in 0..10 {
        let lo = &samples[1 + 2 * j];
        let hi = &samples[2 + 2 * j];
        let sum = lo.value + hi.value;
        res_k = res_k + sum * WGK[j];
        if j % 2 == 1 {
            res_g = res_g + sum * WG[j / 2];
        }
        res_abs += WGK[j] * (lo.value.modulus() + hi.value.modulus());
        inner_err += WGK[j] * (lo.error + hi.error);
        converged &= lo.converged && hi.converged;
        evals += lo.evaluations + hi.evaluations;
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[10] * (fc - mean).modulus();
    for j in 0..10 {
        res_asc += WGK[j]
            * ((samples[1 + 2 * j].value - mean).modulus()
                + (samples[2 + 2 * j].value - mean).modulus());
    }
    let err = (res_k - res_g).modulus() * half.abs();
    let abs_half = half.abs();
    let error = rescale_error(err, res_abs * abs_half, res_asc * abs_half) + inner_err * abs_half;

    let finite = samples.iter().all(|s| s.value.is_finite_value());
    (
        Panel {
            a,
            b,
            value: res_k * half,
            error: if finite { error } else { f64::INFINITY },
            converged: converged && finite,
        },
        evals,
    )
}

/// Globally adaptive integration of a sampled integrand over `[a, b]`.
fn adaptive<V, F>(
    f: &F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    spec: &QuadratureSpec,
    parallel: bool,
) -> Sample<V>
where
    V: QuadValue,
    F: Fn(f64) -> Sample<V> + Sync,
{
    let mut edges: Vec<f64> = std::iter::once(a)
        .chain(breakpoints.iter().copied().filter(|&p| p > a && p < b))
        .chain(std::iter::once(b))
        .collect();
    edges.sort_by(f64::total_cmp);
    edges.dedup();

    let mut heap = BinaryHeap::new();
    let mut evaluations = 0u64;
    for w in edges.windows(2) {
        let (panel, n) = gk21(f, w[0], w[1], parallel);
        evaluations += n;
        heap.push(panel);
    }

    let mut converged = false;
    loop {
        let (total, total_err) = heap
            .iter()
            .fold((V::zero(), 0.0), |(v, e), p| (v + p.value, e + p.error));
        if total_err <= spec.target(total.modulus()) {
            converged = true;
            break;
        }
        if heap.len() >= spec.max_subdivisions.max(edges.len() - 1) {
            break;
        }
        let worst = heap.pop().expect("at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) || !worst.error.is_finite() {
            heap.push(worst);
            break;
        }
        let (left, n1) = gk21(f, worst.a, mid, parallel);
        let (right, n2) = gk21(f, mid, worst.b, parallel);
        evaluations += n1 + n2;
        heap.push(left);
        heap.push(right);
    }

    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut value = V::zero();
    let mut error = 0.0;
    let mut inner_ok = true;
    for p in &panels {
        value = value + p.value;
        error += p.error;
        inner_ok &= p.converged;
    }
    Sample {
        value,
        error,
        converged: converged && inner_ok,
        evaluations,
    }
}

/// Finds a truncation point for an unmapped infinite axis.
fn truncation_point<V, F>(f: &F, sign: f64, tail_tol: f64) -> f64
where
    V: QuadValue,
    F: Fn(f64) -> Sample<V>,
{
    let mut t = 1.0;
    while t < 1e8 {
        let tail_bound = (0..=8)
            .map(|i| {
                let x = sign * t * (1.0 + i as f64 / 8.0);
                f(x).value.modulus()
            })
            .fold(0.0, f64::max)
            * t;
        if tail_bound < tail_tol {
            break;
        }
        t *= 2.0;
    }
    t
}

fn integrate_axis<V, F>(f: &F, axis: &Axis, spec: &QuadratureSpec, parallel: bool) -> Sample<V>
where
    V: QuadValue,
    F: Fn(f64) -> Sample<V> + Sync,
{
    if axis.transform == Transform::Identity && axis.kind != AxisKind::Finite {
        let hi = truncation_point(f, 1.0, spec.truncation_tail_tol);
        let lo = if axis.kind == AxisKind::FullLine {
            -truncation_point(f, -1.0, spec.truncation_tail_tol)
        } else {
            0.0
        };
        return adaptive(f, lo, hi, &axis.breakpoints, spec, parallel);
    }
    let (a, b) = axis.mapped_interval();
    let mut mapped_breaks: Vec<f64> = axis.breakpoints.iter().map(|&x| axis.unmap(x)).collect();
    if (axis.kind, axis.transform) == (AxisKind::FullLine, Transform::ExpMap) {
        // both infinities meet here
        mapped_breaks.push(0.0);
    }
    let g = |u: f64| {
        let (x, jac) = axis.map(u);
        if !(x.is_finite() && jac.is_finite()) {
            return Sample::zero();
        }
        let mut s = f(x);
        s.value = s.value * jac;
        s.error *= jac;
        s
    };
    adaptive(&g, a, b, &mapped_breaks, spec, parallel)
}

/// Integrates `f` along one axis.
///
/// Exhausting the subdivision budget is not an error: the result comes back
/// with `converged == false` and the caller decides.
pub fn integrate_1d<V, F>(
    f: F,
    axis: &Axis,
    spec: &QuadratureSpec,
) -> Result<IntegralResult<V>, QuadratureError>
where
    V: QuadValue,
    F: Fn(f64) -> V + Sync,
{
    spec.validate()?;
    axis.validate()?;
    let sampled = |x: f64| Sample::point(f(x));
    let s = integrate_axis(&sampled, axis, spec, false);
    Ok(IntegralResult {
        value: s.value,
        est_error: s.error,
        evaluations: s.evaluations,
        converged: s.converged,
    })
}

/// Like [`integrate_1d`] for integrands that are themselves numerical
/// results: `f` returns the value, its absolute error and a converged flag.
/// Inner errors are integrated into the reported bound and any unconverged
/// inner evaluation marks the whole result unconverged.
pub fn integrate_1d_nested<V, F>(
    f: F,
    axis: &Axis,
    spec: &QuadratureSpec,
) -> Result<IntegralResult<V>, QuadratureError>
where
    V: QuadValue,
    F: Fn(f64) -> (V, f64, bool) + Sync,
{
    spec.validate()?;
    axis.validate()?;
    let sampled = |x: f64| {
        let (value, error, converged) = f(x);
        Sample {
            value,
            error,
            converged,
            evaluations: 1,
        }
    };
    let s = integrate_axis(&sampled, axis, spec, false);
    Ok(IntegralResult {
        value: s.value,
        est_error: s.error,
        evaluations: s.evaluations,
        converged: s.converged,
    })
}

/// Integrates `f` over the tensor product of `axes` by nested adaptive rules.
///
/// `axes[0]` is the outermost variable. Evaluations on the outermost axis
/// are spread over the rayon pool, so `f` must be callable concurrently.
pub fn integrate_nd<V, F>(
    f: F,
    axes: &[Axis],
    spec: &QuadratureSpec,
) -> Result<IntegralResult<V>, QuadratureError>
where
    V: QuadValue,
    F: Fn(&[f64]) -> V + Sync,
{
    spec.validate()?;
    if axes.is_empty() || axes.len() > MAX_DIMENSION {
        return Err(QuadratureError::Dimension(axes.len()));
    }
    for axis in axes {
        axis.validate()?;
    }
    let s = nested(&f, axes, &[], spec, true);
    Ok(IntegralResult {
        value: s.value,
        est_error: s.error,
        evaluations: s.evaluations,
        converged: s.converged,
    })
}

fn nested<V, F>(
    f: &F,
    axes: &[Axis],
    prefix: &[f64],
    spec: &QuadratureSpec,
    parallel: bool,
) -> Sample<V>
where
    V: QuadValue,
    F: Fn(&[f64]) -> V + Sync,
{
    let (axis, rest) = axes.split_first().expect("non-empty axes");
    if rest.is_empty() {
        let base = prefix.to_vec();
        let leaf = |x: f64| {
            let mut p = base.clone();
            p.push(x);
            Sample::point(f(&p))
        };
        return integrate_axis(&leaf, axis, spec, parallel);
    }
    let base = prefix.to_vec();
    let inner_spec = spec.inner();
    let outer = |x: f64| {
        let mut p = base.clone();
        p.push(x);
        nested(f, rest, &p, &inner_spec, false)
    };
    integrate_axis(&outer, axis, spec, parallel)
}
