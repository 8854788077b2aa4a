/// J_n(x) for n = 0..=n_max by Miller's downward recurrence, normalised with
/// J_0 + 2 Σ J_{2k} = 1.
pub fn bessel_sideband_table(x: f64, n_max: usize) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let top = n_max.max(ax.ceil() as usize);
    let mut m = top + 20 + (40.0 * top as f64).sqrt() as usize;
    if m % 2 == 1 {
        m += 1;
    }
    let mut j_next = 0.0; // J_{k+1}
    let mut j_cur = 1e-300; // J_k
    let mut norm = 0.0;
    let mut values = vec![0.0; m + 1];
    values[m] = j_cur;
    for k in (1..=m).rev() {
        let j_prev = 2.0 * k as f64 / ax * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        values[k - 1] = j_cur;
        if j_cur.abs() > 1e250 {
            for v in values.iter_mut().skip(k - 1) {
                *v *= 1e-250;
            }
            j_cur *= 1e-250;
            j_next *= 1e-250;
        }
    }
    for (k, v) in values.iter().enumerate() {
        if k == 0 {
            norm += v;
        } else if k % 2 == 0 {
            norm += 2.0 * v;
        }
    }
    for (n, o) in out.iter_mut().enumerate() {
        let v = values[n] / norm;
        *o = if x < 0.0 && n % 2 == 1 { -v } else { v };
    }
    out
}

/// Single J_n(x).
pub fn bessel_j(n: usize, x: f64) -> f64 {
    bessel_sideband_table(x, n)[n]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    /// J_n(x) = (1/π) ∫₀^π cos(nτ − x sin τ) dτ; the trapezoid rule on the
    /// periodic integrand converges geometrically.
    fn integral_oracle(n: usize, x: f64) -> f64 {
        let m = 4096;
        let h = PI / m as f64;
        let f = |t: f64| (n as f64 * t - x * t.sin()).cos();
        let mut s = 0.5 * (f(0.0) + f(PI));
        for i in 1..m {
            s += f(i as f64 * h);
        }
        s * h / PI
    }

    #[test]
    fn values_at_zero() {
        let t = bessel_sideband_table(0.0, 5);
        assert_eq!(t[0], 1.0);
        assert!(t[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn matches_integral_representation() {
        let t = bessel_sideband_table(1.0, 6);
        assert!((t[0] - 0.7652).abs() < 1e-4);
        assert!((t[1] - 0.4401).abs() < 1e-4);
        for (n, tn) in t.iter().enumerate() {
            assert!((tn - integral_oracle(n, 1.0)).abs() < 1e-8, "n={n}");
        }
        for &x in &[0.5, 3.7, 12.0, -2.5] {
            let t = bessel_sideband_table(x, 10);
            for (n, tn) in t.iter().enumerate() {
                assert!((tn - integral_oracle(n, x)).abs() < 1e-8, "x={x} n={n}");
            }
        }
    }

    proptest! {
        #[test]
        fn sum_rule(beta in -50.0f64..50.0) {
            let n_max = beta.abs().ceil() as usize + 20;
            let t = bessel_sideband_table(beta, n_max);
            let s = t[0] * t[0] + 2.0 * t[1..].iter().map(|v| v * v).sum::<f64>();
            prop_assert!((s - 1.0).abs() < 1e-9, "{}", s);
        }
    }
}
