//! Globally adaptive Gauss-Kronrod (G10/K21) quadrature.
//!
//! The engine accepts an arbitrary initial partition, which is how the
//! oscillatory k-space integrals are handled: the caller lays down panels no
//! wider than the local oscillation period and the global error heap refines
//! wherever the estimate demands it. Results are summed pairwise in domain
//! order, so the returned value does not depend on refinement order or on how
//! many threads evaluated the initial panels.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Relative tolerance on the integral.
    pub rel_tol: f64,
    /// Absolute floor, in the units of the (dimensionless) integral. The
    /// effective floor is never below the rounding level of ∫|f|.
    pub abs_tol: f64,
    /// Bisections allowed on top of the initial partition.
    pub max_subdivisions: usize,
    /// Semi-infinite domains are truncated where the integrand envelope falls
    /// below this fraction of its peak.
    pub cutoff_ratio: f64,
    /// Evaluate large initial partitions on the rayon pool.
    pub parallel: bool,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-9,
            abs_tol: 1e-13,
            max_subdivisions: 100_000,
            cutoff_ratio: 1e-16,
            parallel: true,
        }
    }
}

impl QuadratureConfig {
    pub fn with_rel_tol(self, rel_tol: f64) -> Self {
        QuadratureConfig { rel_tol, ..self }
    }

    pub fn with_abs_tol(self, abs_tol: f64) -> Self {
        QuadratureConfig { abs_tol, ..self }
    }

    pub fn validate(&self) -> Result<(), QuadError> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(QuadError::InvalidConfig("rel_tol must be positive"));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(QuadError::InvalidConfig("abs_tol must be positive"));
        }
        if !(self.cutoff_ratio > 0.0 && self.cutoff_ratio < 1.0) {
            return Err(QuadError::InvalidConfig("cutoff_ratio must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// An integral value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// Estimated absolute error.
    pub error: f64,
    /// Estimate of the integral of |f|.
    pub abs_value: f64,
    pub evaluations: usize,
}

impl Estimate {
    pub fn zero() -> Self {
        Estimate {
            value: 0.0,
            error: 0.0,
            abs_value: 0.0,
            evaluations: 0,
        }
    }

    /// Multiplies value and error bounds by `factor`.
    pub fn scaled(self, factor: f64) -> Self {
        Estimate {
            value: self.value * factor,
            error: self.error * factor.abs(),
            abs_value: self.abs_value * factor.abs(),
            evaluations: self.evaluations,
        }
    }

    pub fn with_extra_error(self, extra: f64) -> Self {
        Estimate {
            error: self.error + extra.abs(),
            ..self
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadError {
    #[error("invalid quadrature configuration: {0}")]
    InvalidConfig(&'static str),

    #[error("invalid integration domain: {0}")]
    InvalidDomain(String),

    #[error("integrand is not finite near x = {x}")]
    NonFinite { x: f64 },

    #[error(
        "quadrature did not converge after {subdivisions} subdivisions: \
         achieved error {achieved:e}, requested {requested:e} (value {value:e})"
    )]
    NonConvergence {
        value: f64,
        achieved: f64,
        requested: f64,
        subdivisions: usize,
    },
}

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

/// Relative to ∫|f|, the accuracy below which refinement stops.
const ROUNDING_FLOOR: f64 = 100.0 * f64::EPSILON;

/// One panel of the partition after a 21-point Kronrod evaluation.
#[derive(Debug, Clone, Copy)]
pub struct Panel {
    pub a: f64,
    pub b: f64,
    pub value: f64,
    pub error: f64,
    pub abs_value: f64,
    /// False once the error estimate is at the rounding floor.
    refinable: bool,
}

fn rescale_error(err: f64, resabs: f64, resasc: f64) -> f64 {
    let mut err = err.abs();
    if resasc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / resasc).powf(1.5);
        err = if scale < 1.0 { resasc * scale } else { resasc };
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    err
}

/// Applies the 21-point Kronrod rule (with embedded 10-point Gauss rule) on `[a, b]`.
pub fn kronrod21<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_g = 0.0;
    let mut res_k = fc * WGK[10];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for (j, wg) in WG.iter().enumerate() {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let (f1, f2) = (f(center - dx), f(center + dx));
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_g += wg * (f1 + f2);
        res_k += WGK[jtw] * (f1 + f2);
        res_abs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let (f1, f2) = (f(center - dx), f(center + dx));
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        res_k += WGK[jtwm1] * (f1 + f2);
        res_abs += WGK[jtwm1] * (f1.abs() + f2.abs());
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let err = (res_k - res_g) * half;
    let resabs = res_abs * half.abs();
    let resasc = res_asc * half.abs();
    let error = rescale_error(err, resabs, resasc);
    let floor = 50.0 * f64::EPSILON * resabs;
    let width_ok = (b - a).abs() > 1e3 * f64::EPSILON * a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    Panel {
        a,
        b,
        value: res_k * half,
        error,
        abs_value: resabs,
        refinable: width_ok && error > floor * 1.000_001,
    }
}

/// Sums in a fixed binary-tree order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let (l, r) = xs.split_at(n / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}

#[derive(PartialEq)]
struct HeapKey(f64, usize);

impl Eq for HeapKey {}

impl PartialOrd for HeapKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapKey {
    fn cmp(&self, other: &Self) -> Ordering {
        // Largest error first; lower index wins ties.
        self.0
            .total_cmp(&other.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<F>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<Estimate, QuadError>
where
    F: Fn(f64) -> f64 + Sync,
{
    integrate_partition(f, &[a, b], cfg)
}

/// Integrates `f` over `[points[0], points[last]]`, starting from the panels
/// delimited by `points` (strictly increasing).
pub fn integrate_partition<F>(
    f: F,
    points: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Estimate, QuadError>
where
    F: Fn(f64) -> f64 + Sync,
{
    cfg.validate()?;
    if points.len() < 2 {
        return Err(QuadError::InvalidDomain(
            "need at least two breakpoints".into(),
        ));
    }
    if points.iter().any(|p| !p.is_finite()) || points.windows(2).any(|w| w[1] <= w[0]) {
        return Err(QuadError::InvalidDomain(format!(
            "breakpoints must be finite and strictly increasing ({} .. {})",
            points[0],
            points[points.len() - 1]
        )));
    }

    let mut panels: Vec<Panel> = if cfg.parallel && points.len() > 64 {
        points
            .par_windows(2)
            .map(|w| kronrod21(&f, w[0], w[1]))
            .collect()
    } else {
        points
            .windows(2)
            .map(|w| kronrod21(&f, w[0], w[1]))
            .collect()
    };
    let mut evaluations = 21 * panels.len();

    if let Some(p) = panels.iter().find(|p| !p.value.is_finite()) {
        return Err(QuadError::NonFinite {
            x: 0.5 * (p.a + p.b),
        });
    }

    let mut heap: BinaryHeap<HeapKey> = panels
        .iter()
        .enumerate()
        .filter(|(_, p)| p.refinable)
        .map(|(i, p)| HeapKey(p.error, i))
        .collect();
    let mut total: f64 = panels.iter().map(|p| p.value).sum();
    let mut total_err: f64 = panels.iter().map(|p| p.error).sum();
    let mut total_abs: f64 = panels.iter().map(|p| p.abs_value).sum();
    // No request can beat the rounding level of ∫|f|.
    let target = |v: f64, abs: f64| {
        cfg.abs_tol
            .max(cfg.rel_tol * v.abs())
            .max(ROUNDING_FLOOR * abs)
    };

    let mut subdivisions = 0;
    while total_err > target(total, total_abs) {
        let Some(HeapKey(_, idx)) = heap.pop() else {
            // Everything left sits at the rounding floor.
            break;
        };
        if subdivisions >= cfg.max_subdivisions {
            let (value, achieved) = totals(&mut panels);
            return Err(QuadError::NonConvergence {
                value,
                achieved,
                requested: target(value, total_abs),
                subdivisions,
            });
        }
        let old = panels[idx];
        let mid = 0.5 * (old.a + old.b);
        let left = kronrod21(&f, old.a, mid);
        let right = kronrod21(&f, mid, old.b);
        evaluations += 42;
        if !(left.value.is_finite() && right.value.is_finite()) {
            return Err(QuadError::NonFinite { x: mid });
        }
        total += left.value + right.value - old.value;
        total_err += left.error + right.error - old.error;
        total_abs += left.abs_value + right.abs_value - old.abs_value;
        panels[idx] = left;
        panels.push(right);
        if left.refinable {
            heap.push(HeapKey(left.error, idx));
        }
        if right.refinable {
            heap.push(HeapKey(right.error, panels.len() - 1));
        }
        subdivisions += 1;
        if subdivisions % 4096 == 0 {
            // keep the running sums from drifting
            total = panels.iter().map(|p| p.value).sum();
            total_err = panels.iter().map(|p| p.error).sum();
            total_abs = panels.iter().map(|p| p.abs_value).sum();
        }
    }

    let abs_value = pairwise_sum(&panels.iter().map(|p| p.abs_value).collect::<Vec<_>>());
    let (value, error) = totals(&mut panels);
    Ok(Estimate {
        value,
        error,
        abs_value,
        evaluations,
    })
}

fn totals(panels: &mut [Panel]) -> (f64, f64) {
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let values: Vec<f64> = panels.iter().map(|p| p.value).collect();
    let errors: Vec<f64> = panels.iter().map(|p| p.error).collect();
    (pairwise_sum(&values), pairwise_sum(&errors))
}

/// Initial partition of `[0, cutoff]` for an oscillatory integrand with a
/// decaying envelope on the half line.
#[derive(Debug, Clone)]
pub struct HalfLinePartition {
    pub points: Vec<f64>,
    /// Where the domain is truncated.
    pub cutoff: f64,
    /// Bound on the discarded tail, `envelope(cutoff)·cutoff`; valid for
    /// envelopes decaying at least like `q⁻²`.
    pub tail_bound: f64,
}

/// Builds panels of width `panel` over the bulk of the envelope, then
/// geometrically growing panels out to the point where `envelope` drops
/// below `cutoff_ratio` of its peak. `scale` is the characteristic width of
/// the envelope, used to seed the peak search.
pub fn half_line_partition(
    envelope: impl Fn(f64) -> f64,
    panel: f64,
    scale: f64,
    cutoff_ratio: f64,
) -> HalfLinePartition {
    const GROWTH: f64 = 1.1;
    const DENSE_RATIO: f64 = 1e-6;
    let mut q = scale * 1e-3;
    let mut peak = 0.0f64;
    let mut argmax = q;
    let mut dense_end = None;
    let cutoff;
    loop {
        let e = envelope(q).abs();
        if e > peak {
            peak = e;
            argmax = q;
        }
        if q > argmax {
            if dense_end.is_none() && e < DENSE_RATIO * peak {
                dense_end = Some(q);
            }
            if e < cutoff_ratio * peak {
                cutoff = q;
                break;
            }
        }
        if q > scale * 1e12 {
            cutoff = q;
            break;
        }
        q *= GROWTH;
    }
    let dense_end = dense_end.unwrap_or(cutoff).min(cutoff);

    let n_dense = (dense_end / panel).ceil().max(1.0) as usize;
    let h = dense_end / n_dense as f64;
    let mut points: Vec<f64> = (0..=n_dense).map(|i| i as f64 * h).collect();
    let mut x = dense_end;
    while x < cutoff {
        let next = (x + (0.25 * x).max(panel)).min(cutoff);
        points.push(next);
        x = next;
    }
    HalfLinePartition {
        tail_bound: envelope(cutoff).abs() * cutoff,
        points,
        cutoff,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{E, PI};

    #[test]
    fn exact_for_low_degree_polynomials() {
        let p = kronrod21(&|x: f64| 3.0 * x.powi(10) - x.powi(3) + 2.0, -1.0, 2.0);
        let exact = 3.0 / 11.0 * (2f64.powi(11) + 1.0) - (16.0 - 1.0) / 4.0 + 6.0;
        assert_relative_eq!(p.value, exact, max_relative = 1e-14);
    }

    #[test]
    fn smooth_integral_converges() {
        let cfg = QuadratureConfig::default().with_rel_tol(1e-12);
        let est = integrate(|x: f64| x.exp() * x.sin(), 0.0, 10.0, &cfg).unwrap();
        let exact = 0.5 * (1.0 + 10f64.exp() * (10f64.sin() - 10f64.cos()));
        assert!((est.value - exact).abs() <= est.error.max(1e-12 * exact.abs()));
        assert!(est.error <= 1e-12 * exact.abs() * 10.0);
    }

    #[test]
    fn endpoint_singularity_is_refined() {
        let cfg = QuadratureConfig::default().with_rel_tol(1e-10);
        let est = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, &cfg).unwrap();
        assert_relative_eq!(est.value, 2.0, max_relative = 1e-9);
    }

    #[test]
    fn half_line_oscillatory() {
        // ∫₀^∞ cos(x)/(1+x²) dx = π/(2e)
        let env = |x: f64| 1.0 / (1.0 + x * x);
        let cfg = QuadratureConfig {
            cutoff_ratio: 1e-12,
            ..Default::default()
        };
        let part = half_line_partition(env, PI, 1.0, cfg.cutoff_ratio);
        assert!(part.cutoff > 1e5);
        let est = integrate_partition(|x: f64| x.cos() / (1.0 + x * x), &part.points, &cfg)
            .unwrap()
            .with_extra_error(part.tail_bound);
        assert!((est.value - PI / (2.0 * E)).abs() < est.error + 1e-12);
        assert!((est.value - PI / (2.0 * E)).abs() < 1e-6);
    }

    #[test]
    fn partition_is_strictly_increasing() {
        let part = half_line_partition(|q: f64| q / (1.0 + q * q).powi(4), 0.3, 1.0, 1e-16);
        assert_eq!(part.points[0], 0.0);
        assert!(part.points.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(*part.points.last().unwrap(), part.cutoff);
        let peak = (1.0f64 / 7.0).sqrt() / (1.0 + 1.0 / 7.0f64).powi(4);
        assert!(part.cutoff / (1.0 + part.cutoff.powi(2)).powi(4) < 1e-16 * peak);
    }

    #[test]
    fn reports_non_convergence() {
        let cfg = QuadratureConfig {
            rel_tol: 1e-14,
            max_subdivisions: 3,
            ..Default::default()
        };
        let err = integrate(|x: f64| (50.0 * x).sin() / x.sqrt(), 0.0, 1.0, &cfg).unwrap_err();
        match err {
            QuadError::NonConvergence {
                achieved,
                requested,
                subdivisions,
                ..
            } => {
                assert_eq!(subdivisions, 3);
                assert!(achieved > requested);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_domains_and_configs() {
        let cfg = QuadratureConfig::default();
        assert!(integrate_partition(|x: f64| x, &[0.0], &cfg).is_err());
        assert!(integrate_partition(|x: f64| x, &[0.0, 1.0, 0.5], &cfg).is_err());
        assert!(integrate(|x: f64| 1.0 / x, -1.0, 1.0, &cfg).is_err());
        let bad = QuadratureConfig {
            rel_tol: 0.0,
            ..cfg
        };
        assert!(matches!(
            integrate(|x: f64| x, 0.0, 1.0, &bad),
            Err(QuadError::InvalidConfig(_))
        ));
    }

    #[test]
    fn parallel_and_serial_agree_bitwise() {
        let points: Vec<f64> = (0..=500).map(|i| i as f64 * 0.1).collect();
        let f = |x: f64| (3.0 * x).sin() * (-0.1 * x).exp();
        let par = integrate_partition(f, &points, &QuadratureConfig::default()).unwrap();
        let ser = integrate_partition(
            f,
            &points,
            &QuadratureConfig {
                parallel: false,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(par.value.to_bits(), ser.value.to_bits());
        assert_eq!(par.error.to_bits(), ser.error.to_bits());
    }

    #[test]
    fn pairwise_sum_matches_naive_for_integers() {
        let xs: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 500_500.0);
    }
}
