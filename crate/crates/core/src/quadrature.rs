//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for the odd-indexed Kronrod nodes (and the centre).
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Convergence controls.
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_intervals: usize,
}

impl<T: Real> QuadOptions<T> {
    pub fn with_tolerance(tol: f64) -> Self {
        let tol = crate::scalar::tolerance::<T>(tol);
        QuadOptions {
            abs_tol: tol * lit(1e-3),
            rel_tol: tol,
            max_intervals: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature<T> {
    pub value: T,
    pub error: T,
    pub intervals: usize,
}

struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

fn gk15<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> Segment<T> {
    let half = (b - a) * lit(0.5);
    let centre = (a + b) * lit(0.5);
    let fc = f(centre);
    let mut kronrod = fc * lit(WGK[7]);
    let mut gauss = fc * lit(WG[3]);
    for j in 0..7 {
        let dx = half * lit(XGK[j]);
        let pair = f(centre - dx) + f(centre + dx);
        kronrod = kronrod + pair * lit(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + pair * lit(WG[j / 2]);
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    Segment { a, b, value, error }
}

/// Integrates `f` over `[a, b]`, splitting the worst segment until the summed error
/// estimate meets `max(abs_tol, rel_tol * |value|)`.
pub fn integrate<T, F>(f: F, a: T, b: T, opts: QuadOptions<T>) -> Result<Quadrature<T>>
where
    T: Real,
    F: Fn(T) -> T,
{
    if a == b {
        return Ok(Quadrature {
            value: T::zero(),
            error: T::zero(),
            intervals: 0,
        });
    }
    let mut segments = vec![gk15(&f, a, b)];
    loop {
        let value: T = segments.iter().map(|s| s.value).sum();
        let error: T = segments.iter().map(|s| s.error).sum();
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        if error <= target {
            return Ok(Quadrature {
                value,
                error,
                intervals: segments.len(),
            });
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(i, _)| i)
            .expect("segment list is never empty");
        let seg = segments.swap_remove(worst);
        let mid = (seg.a + seg.b) * lit(0.5);
        if segments.len() + 2 > opts.max_intervals || mid <= seg.a || mid >= seg.b {
            return Err(Error::QuadratureFailed {
                estimate: value.to_f64().unwrap_or(f64::NAN),
                error: error.to_f64().unwrap_or(f64::NAN),
                intervals: segments.len() + 1,
            });
        }
        segments.push(gk15(&f, seg.a, mid));
        segments.push(gk15(&f, mid, seg.b));
    }
}

/// Integrates `f` over `[a, inf)` through `x = a + scale * u / (1 - u)`, `u` in `[0, 1)`.
///
/// `scale` should be of the order of the integrand's decay length.
pub fn integrate_to_infinity<T, F>(f: F, a: T, scale: T, opts: QuadOptions<T>) -> Result<Quadrature<T>>
where
    T: Real,
    F: Fn(T) -> T,
{
    let mapped = |u: T| {
        let w = T::one() - u;
        let x = a + scale * u / w;
        let jac = scale / (w * w);
        let y = f(x) * jac;
        if y.is_finite() {
            y
        } else {
            T::zero()
        }
    };
    integrate(mapped, T::zero(), T::one(), opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let q = integrate(
            |x: f64| x * x * x - 2.0 * x,
            0.0,
            3.0,
            QuadOptions::with_tolerance(1e-12),
        )
        .unwrap();
        assert!((q.value - (81.0 / 4.0 - 9.0)).abs() < 1e-13);
        assert_eq!(q.intervals, 1);
    }

    #[test]
    fn exponential_tail() {
        let q = integrate_to_infinity(|x: f64| (-x / 2.0).exp(), 1.0, 2.0, QuadOptions::with_tolerance(1e-12)).unwrap();
        let exact = 2.0 * (-0.5f64).exp();
        assert!((q.value - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn kinked_integrand_converges() {
        let q = integrate(|x: f64| (x - 0.3).abs(), 0.0, 1.0, QuadOptions::with_tolerance(1e-12)).unwrap();
        assert!((q.value - (0.045 + 0.245)).abs() < 1e-12);
    }

    #[test]
    fn f32_tolerance_floor() {
        let q = integrate(
            |x: f32| x.sin(),
            0.0,
            std::f32::consts::PI,
            QuadOptions::with_tolerance(1e-10),
        )
        .unwrap();
        assert!((q.value - 2.0).abs() < 1e-5);
    }

    #[test]
    fn non_convergence_reported() {
        let opts = QuadOptions {
            abs_tol: 0.0,
            rel_tol: 0.0,
            max_intervals: 8,
        };
        let err = integrate(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, opts).unwrap_err();
        assert!(err.is_numerical());
    }
}
