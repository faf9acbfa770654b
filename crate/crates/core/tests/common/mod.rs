//! Shared oracles for the integration suites: a double-double Taylor oracle
//! for the complementary error function, and a chi-square goodness-of-fit
//! helper for Poisson samples. Everything here is independent of the library
//! code paths it is used to check.

#![allow(dead_code)]

/// Double-double value (hi + lo, with |lo| <= ulp(hi)/2), giving ~32
/// significant decimal digits.
#[derive(Debug, Clone, Copy)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

impl Dd {
    pub fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd { hi: s, lo: (a - (s - bb)) + (b - bb) }
}

fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    Dd { hi: p, lo: a.mul_add(b, -p) }
}

pub fn dd_add(x: Dd, y: Dd) -> Dd {
    let s = two_sum(x.hi, y.hi);
    quick_two_sum(s.hi, s.lo + x.lo + y.lo)
}

pub fn dd_neg(x: Dd) -> Dd {
    Dd { hi: -x.hi, lo: -x.lo }
}

pub fn dd_mul(x: Dd, y: Dd) -> Dd {
    let p = two_prod(x.hi, y.hi);
    quick_two_sum(p.hi, p.lo + x.hi * y.lo + x.lo * y.hi)
}

pub fn dd_div_f64(x: Dd, c: f64) -> Dd {
    let q1 = x.hi / c;
    let p = two_prod(q1, c);
    let r = dd_add(x, dd_neg(p));
    let q2 = (r.hi + r.lo) / c;
    quick_two_sum(q1, q2)
}

/// 2/sqrt(pi) in double-double (hi is the f64 rounding, lo the residual).
const TWO_OVER_SQRT_PI: Dd =
    Dd { hi: std::f64::consts::FRAC_2_SQRT_PI, lo: 1.533_545_961_316_588e-17 };

/// erf by a 200-term Maclaurin series evaluated in double-double arithmetic.
/// Truncation is below 1e-90 for |x| <= 5 and round-off stays below ~1e-22
/// even through the alternating-series cancellation at x = 5, so as an oracle
/// for absolute tolerances of 1e-12 it is decisive.
pub fn erf_dd(x: f64) -> Dd {
    let x2 = two_prod(x, x);
    let mut term = Dd::from(x); // x^{2n+1} / n!
    let mut sum = Dd::from(x); // term / (2n+1) accumulated
    for n in 1..=200u32 {
        term = dd_div_f64(dd_mul(term, dd_neg(x2)), n as f64);
        sum = dd_add(sum, dd_div_f64(term, (2 * n + 1) as f64));
    }
    dd_mul(TWO_OVER_SQRT_PI, sum)
}

/// Oracle erfc(x) = 1 - erf(x) for |x| <= 5.
pub fn erfc_oracle(x: f64) -> f64 {
    dd_add(Dd::from(1.0), dd_neg(erf_dd(x))).to_f64()
}

// ---------------------------------------------------------------------------
// Chi-square goodness of fit for Poisson counts
// ---------------------------------------------------------------------------

/// Upper critical value of the chi-square distribution at significance 0.001
/// (Wilson-Hilferty approximation; within ~1% of the exact quantile for the
/// degrees of freedom used here).
pub fn chi2_critical_999(df: f64) -> f64 {
    let z = 3.090232306167813; // standard normal 0.999 quantile
    df * (1.0 - 2.0 / (9.0 * df) + z * (2.0 / (9.0 * df)).sqrt()).powi(3)
}

/// Chi-square statistic of the draws against Poisson(lambda), with counts
/// binned so every bin has expected mass >= 5 (the open tail is lumped).
/// Returns (statistic, degrees of freedom).
pub fn poisson_chi2(lambda: f64, draws: &[u64]) -> (f64, f64) {
    let n = draws.len() as f64;
    let kmax = (lambda + 10.0 * lambda.sqrt() + 30.0) as usize;
    let mut pmf = vec![0.0f64; kmax + 1];
    pmf[0] = (-lambda).exp();
    for k in 1..=kmax {
        pmf[k] = pmf[k - 1] * lambda / k as f64;
    }

    // inclusive upper edges of bins with expected >= 5
    let mut uppers = Vec::new();
    let mut acc = 0.0;
    for (k, &p) in pmf.iter().enumerate() {
        acc += p * n;
        if acc >= 5.0 {
            uppers.push(k);
            acc = 0.0;
        }
    }
    assert!(uppers.len() >= 3, "degenerate binning for lambda = {lambda}");

    let mut expected = Vec::with_capacity(uppers.len());
    let mut lo = 0usize;
    for &hi in &uppers {
        expected.push(pmf[lo..=hi].iter().sum::<f64>() * n);
        lo = hi + 1;
    }
    // everything past the last edge (including mass beyond kmax) joins the
    // final bin
    let leftover = (1.0 - pmf[..lo].iter().sum::<f64>()) * n;
    *expected.last_mut().unwrap() += leftover;

    let last = uppers.len() - 1;
    let mut observed = vec![0.0f64; uppers.len()];
    'outer: for &d in draws {
        for (b, &hi) in uppers.iter().enumerate() {
            if (d as usize) <= hi {
                observed[b] += 1.0;
                continue 'outer;
            }
        }
        observed[last] += 1.0;
    }

    let stat = observed
        .iter()
        .zip(&expected)
        .map(|(o, e)| (o - e) * (o - e) / e)
        .sum();
    (stat, last as f64)
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(f64::MIN_POSITIVE)
}

/// Print one green line for a passed sub-check; panic with context otherwise.
pub fn check(label: &str, ok: bool, detail: String) {
    if ok {
        println!("PASS  {label}: {detail}");
    } else {
        panic!("FAIL  {label}: {detail}");
    }
}
