//! Bessel functions of the first kind, integer order, real argument.
//!
//! Only what the beam pattern needs: `J_n(u) / u^n` for small `n`. The
//! ascending series is used up to [`SERIES_LIMIT`]; past that its terms grow
//! to ~1e9 before cancelling, so Miller's backward recurrence takes over.

/// Largest argument evaluated with the ascending series.
pub const SERIES_LIMIT: f64 = 12.0;

/// `J_n(u) / u^n`, finite at `u = 0` where it equals `1 / (2^n n!)`.
pub fn j_scaled(n: u32, u: f64) -> f64 {
    let u = u.abs();
    if u <= SERIES_LIMIT {
        series_scaled(n, u)
    } else {
        backward_recurrence(n, u) / u.powi(n as i32)
    }
}

/// `J_n(u)`.
pub fn j(n: u32, u: f64) -> f64 {
    let sign = if u < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
    let a = u.abs();
    if a <= SERIES_LIMIT {
        sign * series_scaled(n, a) * a.powi(n as i32)
    } else {
        sign * backward_recurrence(n, a)
    }
}

// Σ_k (-1)^k (u/2)^{2k} / (2^n k! (k+n)!)
fn series_scaled(n: u32, u: f64) -> f64 {
    let mut term = 1.0;
    for k in 1..=n {
        term /= 2.0 * k as f64;
    }
    let q = 0.25 * u * u;
    let mut sum = term;
    for k in 1..200u32 {
        term *= -q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() && k as f64 > q.sqrt() {
            break;
        }
    }
    sum
}

// Miller's algorithm, normalized with J_0 + 2 Σ J_{2k} = 1.
fn backward_recurrence(n: u32, u: f64) -> f64 {
    let start = {
        let m = (u.max(n as f64) + 30.0 + (50.0 * u).sqrt()) as u32;
        m + (m % 2)
    };
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-300; // J_k
    let mut norm = 0.0;
    let mut wanted = 0.0;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / u * cur - next;
        next = cur;
        cur = prev;
        // cur now holds J_{k-1}
        if k - 1 == n {
            wanted = cur;
        }
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            wanted *= 1e-250;
        }
    }
    norm += cur;
    wanted / norm
}

#[cfg(test)]
mod tests {
    use super::*;

    // reference values from an independent special-function library
    const REFERENCE: &[(u32, f64, f64)] = &[
        (1, 0.5, 0.242_268_457_674_873_9),
        (1, 1.0, 0.440_050_585_744_933_55),
        (1, 2.07123, 0.571_122_626_084_837_7),
        (1, 5.0, -0.327_579_137_591_465_2),
        (1, 10.0, 0.043_472_746_168_861_6),
        (1, 20.0, 0.066_833_124_175_849_93),
        (1, 29.5, -0.064_304_378_099_192_4),
        (3, 0.5, 0.002_563_729_994_587_244),
        (3, 1.0, 0.019_563_353_982_668_414),
        (3, 2.07123, 0.140_499_684_981_377_44),
        (3, 5.0, 0.364_831_230_613_667),
        (3, 10.0, 0.058_379_379_305_186_67),
        (3, 20.0, -0.098_901_394_560_449_58),
        (3, 29.5, 0.081_767_190_227_221_65),
    ];

    #[test]
    fn matches_reference_values() {
        for &(n, u, want) in REFERENCE {
            let got = j(n, u);
            assert!(
                (got - want).abs() <= 1e-10 * want.abs().max(1e-3),
                "J_{n}({u}) = {got}, want {want}"
            );
        }
    }

    #[test]
    fn series_and_recurrence_agree_on_overlap() {
        for k in 0..=40 {
            let u = 6.0 + 0.15 * k as f64;
            for n in [1, 3] {
                let a = series_scaled(n, u) * u.powi(n as i32);
                let b = backward_recurrence(n, u);
                assert!((a - b).abs() < 1e-12, "n={n} u={u}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn scaled_limit_at_zero() {
        assert_eq!(j_scaled(1, 0.0), 0.5);
        assert!((j_scaled(3, 0.0) - 1.0 / 48.0).abs() < 1e-18);
        assert!((j_scaled(3, 1e-8) - 1.0 / 48.0).abs() < 1e-18);
    }

    #[test]
    fn odd_orders_are_odd() {
        assert_eq!(j(1, -2.0), -j(1, 2.0));
        assert_eq!(j(3, -15.0), -j(3, 15.0));
    }
}
