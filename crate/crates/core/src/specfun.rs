//! Macdonald function `K0` on the positive real axis and `Γ` at half-integers.

use serde::{Deserialize, Serialize};
use thiserror::Error;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082_402_431;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecFunError {
    #[error("K0 needs a positive finite argument, got {0}")]
    Domain(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpecFunResult {
    pub value: f64,
    pub est_abs_error: f64,
}

// Chebyshev coefficients of e^x √x K0(x) in u = 4/x - 1 on x ∈ [2, ∞).
// The leading coefficient is already halved.
#[allow(clippy::excessive_precision)]
const K0_CHEB: [f64; 29] = [
    1.220_151_541_032_977_727_3,
    -0.031_448_101_311_964_500_543,
    0.001_569_883_885_730_053_374_9,
    -0.000_128_495_495_816_278_026_38,
    0.000_013_949_813_718_876_499_364,
    -1.831_755_522_719_119_484_8e-6,
    2.766_813_639_445_015_076_1e-7,
    -4.660_489_897_687_947_665_6e-8,
    8.574_034_017_414_226_085_8e-9,
    -1.697_534_509_389_061_515_6e-9,
    3.577_397_281_400_328_447_2e-10,
    -7.957_489_244_477_397_037_7e-11,
    1.855_949_114_954_926_555e-11,
    -4.514_597_883_374_519_175_1e-12,
    1.140_340_588_207_344_234_7e-12,
    -2.980_096_923_148_178_354_8e-13,
    8.032_890_775_068_374_369_4e-14,
    -2.227_513_326_746_296_360_4e-14,
    6.340_076_476_276_645_966_1e-15,
    -1.848_593_377_920_907_169_4e-15,
    5.512_055_999_404_333_364_9e-16,
    -1.678_231_125_754_900_638_3e-16,
    5.210_391_777_643_554_112_5e-17,
    -1.647_580_593_984_263_281_5e-17,
    5.300_433_771_177_335_770_3e-18,
    -1.733_171_200_582_100_026_3e-18,
    5.755_109_202_882_729_346_7e-19,
    -1.939_095_605_318_355_394_6e-19,
    6.624_610_534_536_145_467_1e-20,
];

/// Splitting point between the series and the Chebyshev branch.
pub const K0_CROSSOVER: f64 = 2.0;

fn k0_series(x: f64) -> f64 {
    // K0 = -(ln(x/2) + γ) I0 + Σ_{k≥1} (x²/4)^k / (k!)² H_k
    let q = 0.25 * x * x;
    let log_term = (0.5 * x).ln() + EULER_GAMMA;
    let mut term = 1.0;
    let mut i0 = 1.0;
    let mut tail = 0.0;
    let mut harmonic = 0.0;
    for k in 1..60 {
        let kf = k as f64;
        term *= q / (kf * kf);
        harmonic += 1.0 / kf;
        i0 += term;
        tail += term * harmonic;
        if term * harmonic < 1e-18 * tail.abs().max(1e-300) {
            break;
        }
    }
    -log_term * i0 + tail
}

fn k0_scaled_cheb(x: f64) -> f64 {
    let u = 4.0 / x - 1.0;
    let two_u = 2.0 * u;
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in K0_CHEB[1..].iter().rev() {
        let b0 = two_u * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    K0_CHEB[0] + u * b1 - b2
}

/// `K0(x)` for `x > 0`, relative accuracy about 1e-14.
pub fn bessel_k0(x: f64) -> Result<SpecFunResult, SpecFunError> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(SpecFunError::Domain(x));
    }
    let value = bessel_k0_unchecked(x);
    Ok(SpecFunResult {
        value,
        est_abs_error: 8.0 * f64::EPSILON * value.abs(),
    })
}

/// `K0(x)` without the domain check. Returns `+∞` at 0.
#[inline]
pub fn bessel_k0_unchecked(x: f64) -> f64 {
    if x <= 0.0 {
        f64::INFINITY
    } else if x <= K0_CROSSOVER {
        k0_series(x)
    } else if x > 745.0 {
        0.0
    } else {
        (-x).exp() / x.sqrt() * k0_scaled_cheb(x)
    }
}

/// `Γ(two_z / 2)` for `two_z ≥ 1`, by recurrence from `Γ(1)` and `Γ(1/2)`.
pub fn gamma_half(two_z: u32) -> f64 {
    assert!(two_z >= 1, "gamma_half needs two_z >= 1");
    let (mut g, mut z2) = if two_z.is_multiple_of(2) {
        (1.0, 2)
    } else {
        (std::f64::consts::PI.sqrt(), 1)
    };
    while z2 < two_z {
        g *= z2 as f64 / 2.0;
        z2 += 2;
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    #[allow(clippy::excessive_precision)]
    fn reference_values() {
        // mpmath, 20 digits
        let cases = [
            (1e-3, 7.023_688_800_562_381_3),
            (0.1, 2.427_069_024_702_016_6),
            (1.0, 0.421_024_438_240_708_33),
            (2.0, 0.113_893_872_749_533_44),
            (2.5, 0.062_347_553_200_366_186),
            (5.0, 0.003_691_098_334_042_594_3),
            (10.0, 1.778_006_231_616_765_2e-5),
            (50.0, 3.410_167_749_789_495_5e-23),
        ];
        for (x, k) in cases {
            let v = bessel_k0(x).unwrap().value;
            assert!(((v - k) / k).abs() < 1e-13, "K0({x}) = {v}, want {k}");
        }
    }

    #[test]
    fn branches_meet_at_crossover() {
        let s = k0_series(K0_CROSSOVER);
        let c = (-K0_CROSSOVER).exp() / K0_CROSSOVER.sqrt() * k0_scaled_cheb(K0_CROSSOVER);
        assert!(((s - c) / s).abs() < 1e-13);
    }

    #[test]
    fn small_and_large_argument_regimes() {
        let x: f64 = 1e-6;
        let lead = -((x / 2.0).ln() + EULER_GAMMA);
        assert!(((bessel_k0(x).unwrap().value - lead) / lead).abs() < 1e-5);
        let x: f64 = 50.0;
        let lead = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp();
        assert!(((bessel_k0(x).unwrap().value - lead) / lead).abs() < 0.01);
    }

    #[test]
    fn domain_errors() {
        assert!(bessel_k0(0.0).is_err());
        assert!(bessel_k0(-1.0).is_err());
        assert!(bessel_k0(f64::NAN).is_err());
    }

    #[test]
    fn strictly_decreasing_on_log_grid() {
        let xs: Vec<f64> = (0..200)
            .map(|i| 10f64.powf(-6.0 + i as f64 * (50f64.log10() + 6.0) / 199.0))
            .collect();
        for w in xs.windows(2) {
            assert!(bessel_k0(w[1]).unwrap().value < bessel_k0(w[0]).unwrap().value);
        }
    }

    #[test]
    fn gamma_half_values() {
        let sp = std::f64::consts::PI.sqrt();
        assert_eq!(gamma_half(2), 1.0);
        assert_eq!(gamma_half(1), sp);
        assert_eq!(gamma_half(3), sp / 2.0);
        assert_eq!(gamma_half(8), 6.0);
        for n in 0..8u32 {
            let fact = |k: u32| (1..=k).map(f64::from).product::<f64>();
            let closed = fact(2 * n + 1) * sp / (fact(n) * 2f64.powi(2 * n as i32 + 1));
            let g = gamma_half(2 * n + 3);
            assert!(((g - closed) / closed).abs() < 1e-14);
        }
        for z2 in 1..30u32 {
            let lhs = gamma_half(z2 + 2);
            let rhs = z2 as f64 / 2.0 * gamma_half(z2);
            assert!(((lhs - rhs) / rhs).abs() <= 2.0 * f64::EPSILON);
        }
    }
}
