//! Globally adaptive 21-point Gauss-Kronrod quadrature on a partitioned interval.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Tolerances and subdivision budget for kernel quadratures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of bisections performed beyond the initial partition.
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_subdivisions: 200,
        }
    }
}

impl QuadratureConfig {
    pub fn new(rel_tol: f64, abs_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let cfg = Self {
            rel_tol,
            abs_tol,
            max_subdivisions,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::config("rel_tol", format!("must be positive, got {}", self.rel_tol)));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::config("abs_tol", format!("must be positive, got {}", self.abs_tol)));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::config("max_subdivisions", "must be at least 1"));
        }
        Ok(())
    }
}

// Kronrod abscissae on [-1, 1]; odd indices are the 10-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_208_931_630,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

/// Integral estimate with its error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    // Largest error first; ties broken by position for a deterministic order.
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    for j in 0..10 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Integrate `f` over `[breakpoints[0], breakpoints[last]]`.
///
/// The breakpoints form the initial partition; segments with the largest
/// error estimate are bisected until the summed error drops below
/// `max(abs_tol, rel_tol * |I|)` or the bisection budget runs out.
pub fn integrate<F: Fn(f64) -> f64>(f: F, breakpoints: &[f64], cfg: &QuadratureConfig) -> Result<Estimate> {
    assert!(breakpoints.len() >= 2, "need at least one interval");
    let mut heap: BinaryHeap<Segment> = breakpoints
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| gk21(&f, w[0], w[1]))
        .collect();
    let totals = |heap: &BinaryHeap<Segment>| {
        heap.iter()
            .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error))
    };
    let (mut value, mut error) = totals(&heap);
    let mut bisections = 0;
    while error > cfg.abs_tol.max(cfg.rel_tol * value.abs()) && value.is_finite() {
        if bisections >= cfg.max_subdivisions {
            return Err(Error::Quadrature {
                achieved: error,
                requested: cfg.abs_tol.max(cfg.rel_tol * value.abs()),
            });
        }
        let worst = match heap.pop() {
            Some(s) => s,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // interval exhausted in floating point
            return Err(Error::Quadrature {
                achieved: error,
                requested: cfg.abs_tol.max(cfg.rel_tol * value.abs()),
            });
        }
        let left = gk21(&f, worst.a, mid);
        let right = gk21(&f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        bisections += 1;
        // refresh the running sums now and then to shed accumulated round-off
        if bisections % 64 == 0 {
            (value, error) = totals(&heap);
        }
    }
    let mut segments = heap.into_vec();
    segments.sort_by(|l, r| l.a.total_cmp(&r.a));
    let (value, error) = segments
        .iter()
        .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
    Ok(Estimate { value, error })
}

/// Panels handled by one adaptive pass in [`integrate_chunked`].
const CHUNK_PANELS: usize = 512;

/// Like [`integrate`], but processes long partitions in fixed-size chunks so
/// the working set stays bounded. The absolute tolerance is shared evenly
/// between chunks.
pub fn integrate_chunked<F: Fn(f64) -> f64>(f: F, breakpoints: &[f64], cfg: &QuadratureConfig) -> Result<Estimate> {
    let panels = breakpoints.len().saturating_sub(1);
    if panels <= CHUNK_PANELS {
        return integrate(&f, breakpoints, cfg);
    }
    let chunks = panels.div_ceil(CHUNK_PANELS);
    let local = QuadratureConfig {
        abs_tol: cfg.abs_tol / chunks as f64,
        ..*cfg
    };
    let mut total = Estimate { value: 0.0, error: 0.0 };
    for c in 0..chunks {
        let lo = c * CHUNK_PANELS;
        let hi = ((c + 1) * CHUNK_PANELS).min(panels);
        let est = integrate(&f, &breakpoints[lo..=hi], &local)?;
        total.value += est.value;
        total.error += est.error;
    }
    Ok(total)
}

/// Breakpoints on `[0, upper]` whose spacing does not exceed `max_width`.
pub(crate) fn uniform_breakpoints(upper: f64, max_width: f64) -> Vec<f64> {
    let n = if max_width.is_finite() && max_width > 0.0 {
        ((upper / max_width).ceil() as usize).max(1)
    } else {
        1
    };
    (0..=n).map(|k| upper * k as f64 / n as f64).collect()
}
