//! Normal-law special functions: density, tails in log space, the AS241
//! quantile and Genz's bivariate orthant probabilities.

use libm::erfc;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

pub fn norm_pdf(z: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * z * z).exp()
}

pub fn norm_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

pub fn norm_sf(z: f64) -> f64 {
    0.5 * erfc(z * FRAC_1_SQRT_2)
}

/// `ln P(Z > z)`, accurate far into the upper tail where `norm_sf` underflows.
pub fn norm_log_sf(z: f64) -> f64 {
    if z < 35.0 {
        return norm_sf(z).ln();
    }
    // Mills-ratio asymptotic series; truncation error < 1e-12 for z >= 35.
    let r = 1.0 / (z * z);
    let series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r)));
    -0.5 * z * z - z.ln() - LN_SQRT_2PI + series.ln()
}

pub fn norm_log_cdf(z: f64) -> f64 {
    norm_log_sf(-z)
}

/// Standard normal quantile (Wichura's AS241, PPND16). Relative accuracy is
/// about 1e-16 over the whole double range; returns infinities at 0 and 1.
#[allow(clippy::inconsistent_digit_grouping, clippy::excessive_precision)]
pub fn norm_ppf(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = ((((((r * 2509.080_928_730_122_7 + 33430.575_583_588_128) * r + 67265.770_927_008_7) * r + 45921.953_931_549_87) * r
            + 13_731.693_765_509_46)
            * r
            + 1971.590_950_306_551_4)
            * r
            + 133.141_667_891_784_38)
            * r
            + 3.387_132_872_796_366_5;
        let den = ((((((r * 5226.495_278_852_546 + 28729.085_735_721_943) * r + 39307.895_800_092_71) * r + 21213.794_301_586_597) * r
            + 5394.196_021_424_751)
            * r
            + 687.187_007_492_057_9)
            * r
            + 42.313_330_701_600_91)
            * r
            + 1.0;
        return q * num / den;
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    norm_ppf_tail(tail, q < 0.0)
}

/// `-norm_ppf(q)` computed without forming `1 - q`; the upper-tail inverse.
pub fn norm_isf(q: f64) -> f64 {
    -norm_ppf(q)
}

fn norm_ppf_tail(tail: f64, lower: bool) -> f64 {
    let mut r = (-tail.ln()).sqrt();
    let val = if r <= 5.0 {
        r -= 1.6;
        let num = ((((((r * 7.745_450_142_783_414e-4 + 0.022_723_844_989_269_184) * r + 0.241_780_725_177_450_6) * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_545)
            * r
            + 1.423_437_110_749_683_5;
        let den = ((((((r * 1.050_750_071_644_416_9e-9 + 5.475_938_084_995_345e-4) * r + 0.015_198_666_563_616_457) * r
            + 0.148_103_976_427_480_08)
            * r
            + 0.689_767_334_985_1)
            * r
            + 1.676_384_830_183_803_8)
            * r
            + 2.053_191_626_637_759)
            * r
            + 1.0;
        num / den
    } else {
        r -= 5.0;
        let num = ((((((r * 2.010_334_399_292_288_1e-7 + 2.711_555_568_743_487_6e-5) * r + 0.001_242_660_947_388_078_4) * r
            + 0.026_532_189_526_576_124)
            * r
            + 0.296_560_571_828_504_87)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103;
        let den = ((((((r * 2.044_263_103_389_939_7e-15 + 1.421_511_758_316_446e-7) * r + 1.846_318_317_510_054_8e-5) * r
            + 7.868_691_311_456_133e-4)
            * r
            + 0.014_875_361_290_850_615)
            * r
            + 0.136_929_880_922_735_8)
            * r
            + 0.599_832_206_555_887_9)
            * r
            + 1.0;
        num / den
    };
    if lower {
        -val
    } else {
        val
    }
}

// Gauss-Legendre half-rules (negative abscissae) used by Genz's BVND.
const GL_W: [&[f64]; 3] = [
    &[0.171_324_492_379_170_5, 0.360_761_573_048_138_4, 0.467_913_934_572_691],
    &[
        0.047_175_336_386_511_77,
        0.106_939_325_995_318_3,
        0.160_078_328_543_346_4,
        0.203_167_426_723_065_9,
        0.233_492_536_538_354_7,
        0.249_147_045_813_402_9,
    ],
    &[
        0.017_614_007_139_152_12,
        0.040_601_429_800_386_94,
        0.062_672_048_334_109_06,
        0.083_276_741_576_704_75,
        0.101_930_119_817_240_4,
        0.118_194_531_961_518_4,
        0.131_688_638_449_176_6,
        0.142_096_109_318_382_1,
        0.149_172_986_472_603_7,
        0.152_753_387_130_725_9,
    ],
];
const GL_X: [&[f64]; 3] = [
    &[-0.932_469_514_203_152_2, -0.661_209_386_466_264_7, -0.238_619_186_083_197],
    &[
        -0.981_560_634_246_719_1,
        -0.904_117_256_370_475,
        -0.769_902_674_194_305,
        -0.587_317_954_286_617_1,
        -0.367_831_498_998_180_2,
        -0.125_233_408_511_469_2,
    ],
    &[
        -0.993_128_599_185_094_9,
        -0.963_971_927_277_913_8,
        -0.912_234_428_251_326,
        -0.839_116_971_822_218_8,
        -0.746_331_906_460_150_8,
        -0.636_053_680_726_515,
        -0.510_867_001_950_827_1,
        -0.373_706_088_715_419_6,
        -0.227_785_851_141_645_1,
        -0.076_526_521_133_497_33,
    ],
];

fn gl_rule(r: f64) -> usize {
    let a = r.abs();
    if a < 0.3 {
        0
    } else if a < 0.75 {
        1
    } else {
        2
    }
}

/// `Phi2(h, k; r) - Phi(h) Phi(k)` via the Plackett integral in `asin r`.
/// Valid for `|r| < 0.925`; no cancellation against the product term.
fn bvn_excess_small_r(h: f64, k: f64, r: f64) -> f64 {
    let rule = gl_rule(r);
    let hk = h * k;
    let hs = 0.5 * (h * h + k * k);
    let asr = r.asin();
    let mut acc = 0.0;
    for (&w, &x) in GL_W[rule].iter().zip(GL_X[rule]) {
        for s in [x, -x] {
            let sn = (asr * (s + 1.0) * 0.5).sin();
            acc += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
        }
    }
    acc * asr / (4.0 * PI)
}

/// Upper orthant probability `P(X > dh, Y > dk)` for a standard bivariate
/// normal with correlation `r` (Genz, BVND). Absolute accuracy ~1e-15.
pub fn bvn_upper(dh: f64, dk: f64, r: f64) -> f64 {
    if r.abs() < 0.925 {
        return bvn_excess_small_r(-dh, -dk, r) + norm_cdf(-dh) * norm_cdf(-dk);
    }
    let rule = gl_rule(r);
    let two_pi = 2.0 * PI;
    let h = dh;
    let mut k = dk;
    let mut hk = h * k;
    if r < 0.0 {
        k = -k;
        hk = -hk;
    }
    let mut bvn = 0.0;
    if r.abs() < 1.0 {
        let as_ = (1.0 - r) * (1.0 + r);
        let mut a = as_.sqrt();
        let bs = (h - k) * (h - k);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 16.0;
        bvn = a * (-(bs / as_ + hk) / 2.0).exp() * (1.0 - c * (bs - as_) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as_ * as_ / 5.0);
        if hk > -160.0 {
            let b = bs.sqrt();
            bvn -= (-hk / 2.0).exp() * two_pi.sqrt() * norm_cdf(-b / a) * b * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
        }
        a /= 2.0;
        for (&w, &x) in GL_W[rule].iter().zip(GL_X[rule]) {
            for s in [x, -x] {
                let xs = (a * (s + 1.0)).powi(2);
                let rs = (1.0 - xs).sqrt();
                let asr = -(bs / xs + hk) / 2.0;
                if asr > -100.0 {
                    bvn += a * w * asr.exp() * ((-hk * (1.0 - rs) / (2.0 * (1.0 + rs))).exp() / rs - (1.0 + c * xs * (1.0 + d * xs)));
                }
            }
        }
        bvn = -bvn / two_pi;
    }
    if r > 0.0 {
        bvn += norm_cdf(-h.max(k));
    } else {
        bvn = -bvn;
        if k > h {
            if h < 0.0 {
                bvn += norm_cdf(k) - norm_cdf(h);
            } else {
                bvn += norm_cdf(-h) - norm_cdf(-k);
            }
        }
    }
    bvn.clamp(0.0, 1.0)
}

/// Lower orthant probability `P(X <= h, Y <= k)`.
pub fn bvn_cdf(h: f64, k: f64, r: f64) -> f64 {
    bvn_upper(-h, -k, r)
}

/// `P(X <= h, Y <= k) - Phi(h) Phi(k)`, computed without cancellation when
/// `|r| < 0.925`.
pub fn bvn_excess(h: f64, k: f64, r: f64) -> f64 {
    if r == 0.0 {
        0.0
    } else if r.abs() < 0.925 {
        bvn_excess_small_r(h, k, r)
    } else {
        bvn_cdf(h, k, r) - norm_cdf(h) * norm_cdf(k)
    }
}
