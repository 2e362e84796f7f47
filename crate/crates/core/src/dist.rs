//! Student-t and F tail probabilities via the regularized incomplete beta.

use statrs::function::beta::{beta_reg, inv_beta_reg};
use statrs::function::erf::{erfc, erfc_inv};
use statrs::function::gamma::ln_gamma;

/// Two-sided p-value P(|T| >= |t|) for Student-t with `dof` degrees of freedom.
pub fn t_two_sided_p(t: f64, dof: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return 0.0;
    }
    if t == 0.0 {
        return 1.0;
    }
    let x = dof / (dof + t * t);
    beta_reg(dof / 2.0, 0.5, x).clamp(0.0, 1.0)
}

fn t_pdf(t: f64, dof: f64) -> f64 {
    let ln_c = ln_gamma((dof + 1.0) / 2.0)
        - ln_gamma(dof / 2.0)
        - 0.5 * (dof * std::f64::consts::PI).ln();
    (ln_c - (dof + 1.0) / 2.0 * (t * t / dof).ln_1p()).exp()
}

/// Upper quantile: the `t` with P(T <= t) = `q`, for q in (0.5, 1).
pub fn t_quantile_upper(q: f64, dof: f64) -> f64 {
    assert!(q > 0.5 && q < 1.0, "quantile level out of range: {q}");
    let alpha = 2.0 * (1.0 - q);
    let x = inv_beta_reg(dof / 2.0, 0.5, alpha);
    let mut t = if x > 0.0 { (dof * (1.0 - x) / x).sqrt() } else { 1e3 };
    for _ in 0..8 {
        let step = (t_two_sided_p(t, dof) - alpha) / (2.0 * t_pdf(t, dof));
        if !step.is_finite() {
            break;
        }
        t += step;
        if step.abs() <= 1e-15 * t.abs() {
            break;
        }
    }
    t
}

/// Survival function P(F >= f) for the F distribution with (d1, d2) dof.
pub fn f_sf(f: f64, d1: f64, d2: f64) -> f64 {
    if f.is_nan() {
        return f64::NAN;
    }
    if f <= 0.0 {
        return 1.0;
    }
    if f.is_infinite() {
        return 0.0;
    }
    beta_reg(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f)).clamp(0.0, 1.0)
}

/// Two-sided standard normal p-value P(|Z| >= |z|).
pub fn normal_two_sided_p(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    erfc(z.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
}

/// Standard normal quantile for q in (0.5, 1).
pub fn normal_quantile_upper(q: f64) -> f64 {
    std::f64::consts::SQRT_2 * erfc_inv(2.0 * (1.0 - q))
}

/// Type-7 sample quantile of already sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0);
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_values() {
        // Printed t-table: t_{0.975,10} = 2.228, t_{0.975,20} = 2.086, t_{0.995,5} = 4.032
        assert!((t_quantile_upper(0.975, 10.0) - 2.228_138_851_986).abs() < 1e-9);
        assert!((t_quantile_upper(0.975, 20.0) - 2.085_963_447_265).abs() < 1e-9);
        assert!((t_quantile_upper(0.995, 5.0) - 4.032_142_983_557).abs() < 1e-9);
        assert!((t_two_sided_p(2.228_138_851_986, 10.0) - 0.05).abs() < 1e-11);
    }

    #[test]
    fn quantile_inverts_p() {
        for &dof in &[1.0, 2.5, 7.0, 112.0, 1e4] {
            for &q in &[0.6, 0.9, 0.975, 0.9995, 1.0 - 1e-9] {
                let t = t_quantile_upper(q, dof);
                let p = t_two_sided_p(t, dof);
                assert!((p - 2.0 * (1.0 - q)).abs() < 1e-10 * (2.0 * (1.0 - q)).max(1e-3), "{dof} {q}");
            }
        }
    }

    #[test]
    fn f_with_one_numerator_dof_matches_t() {
        for &t in &[0.1f64, 1.0, 2.5, 6.0] {
            for &d in &[3.0, 30.0, 300.0] {
                assert!((f_sf(t * t, 1.0, d) - t_two_sided_p(t, d)).abs() < 1e-14);
            }
        }
        // Known value: P(F(2,10) >= 4.10) ~= 0.0501
        assert!((f_sf(4.102_821, 2.0, 10.0) - 0.05).abs() < 1e-6);
    }

    #[test]
    fn normal_values() {
        assert!((normal_quantile_upper(0.975) - 1.959_963_984_540_054).abs() < 1e-12);
        let p = normal_two_sided_p(1.959_963_984_540_054);
        assert!((p - 0.05).abs() < 1e-10, "{p}");
        assert_eq!(normal_two_sided_p(0.0), 1.0);
    }

    #[test]
    fn type7_quantile() {
        let d = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&d, 0.0), 1.0);
        assert_eq!(quantile_sorted(&d, 1.0), 4.0);
        assert_eq!(quantile_sorted(&d, 0.5), 2.5);
    }
}
