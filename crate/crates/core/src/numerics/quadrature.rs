//! Globally adaptive Gauss–Kronrod (G10/K21) quadrature.

// Node and weight tables keep their published digits.
#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

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

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_430_066,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Gauss weights paired with the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Change of variables applied before integration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Transform {
    None,
    /// `t = lo + s/(1-s)` mapping `[lo, inf)` onto `[0, 1)`.
    SemiInfinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
    pub transform: Transform,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-11,
            max_depth: 40,
            transform: Transform::None,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tolerances(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    pub fn semi_infinite(self) -> Self {
        Self {
            transform: Transform::SemiInfinite,
            ..self
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::argument("quadrature tolerances must be positive"));
        }
        if self.max_depth < 10 {
            return Err(Error::argument("quadrature max_depth must be at least 10"));
        }
        Ok(())
    }
}

/// Integral value with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
    depth: u32,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod21<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Result<(f64, f64)> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
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
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    if !value.is_finite() {
        return Err(Error::domain(format!(
            "integrand not finite on [{lo}, {hi}]"
        )));
    }
    Ok((value, error))
}

const MAX_SEGMENTS: usize = 20_000;

fn adaptive<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<Integral> {
    let (value, error) = kronrod21(f, lo, hi)?;
    let mut heap = BinaryHeap::new();
    heap.push(Segment {
        lo,
        hi,
        value,
        error,
        depth: 0,
    });
    // Segments that may not be split any further.
    let mut frozen_value = 0.0;
    let mut frozen_error = 0.0;
    let mut total_value = value;
    let mut total_error = error;

    loop {
        let target = spec.abs_tol.max(spec.rel_tol * total_value.abs());
        if total_error <= target {
            break;
        }
        let Some(seg) = heap.pop() else {
            break;
        };
        let mid = 0.5 * (seg.lo + seg.hi);
        let splittable = seg.depth < spec.max_depth
            && mid > seg.lo
            && mid < seg.hi
            && heap.len() < MAX_SEGMENTS;
        if !splittable {
            frozen_value += seg.value;
            frozen_error += seg.error;
            continue;
        }
        let (lv, le) = kronrod21(f, seg.lo, mid)?;
        let (rv, re) = kronrod21(f, mid, seg.hi)?;
        total_value += lv + rv - seg.value;
        total_error += le + re - seg.error;
        heap.push(Segment {
            lo: seg.lo,
            hi: mid,
            value: lv,
            error: le,
            depth: seg.depth + 1,
        });
        heap.push(Segment {
            lo: mid,
            hi: seg.hi,
            value: rv,
            error: re,
            depth: seg.depth + 1,
        });
    }

    // Re-sum to shed drift from the incremental updates.
    let mut value = frozen_value;
    let mut error = frozen_error;
    for seg in heap.iter() {
        value += seg.value;
        error += seg.error;
    }
    let target = spec.abs_tol.max(spec.rel_tol * value.abs());
    if error > target {
        return Err(Error::Accuracy {
            what: format!("adaptive quadrature on [{lo}, {hi}]"),
            estimate: value,
            error_bound: error,
        });
    }
    Ok(Integral { value, error })
}

/// Integrates `f` over `[lo, hi]`; `hi` may be `+inf` when the settings carry
/// the semi-infinite transform.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<Integral> {
    spec.validate()?;
    if lo.is_nan() || hi.is_nan() || lo.is_infinite() {
        return Err(Error::domain("quadrature bounds must be numbers with finite lower end"));
    }
    if lo == hi {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
        });
    }
    if !(lo < hi) {
        return Err(Error::domain(format!("quadrature requires lo < hi, got [{lo}, {hi}]")));
    }
    match (spec.transform, hi.is_infinite()) {
        (Transform::SemiInfinite, true) => {
            let mapped = |s: f64| {
                let one_minus = 1.0 - s;
                let t = lo + s / one_minus;
                let v = f(t);
                if v == 0.0 {
                    0.0
                } else {
                    v / (one_minus * one_minus)
                }
            };
            adaptive(&mapped, 0.0, 1.0, spec)
        }
        (Transform::None, true) => Err(Error::domain(
            "infinite upper bound requires the semi-infinite transform",
        )),
        (_, false) => adaptive(&f, lo, hi, spec),
    }
}
