//! Modified Bessel function of the second kind, K_ν(x), for real order —
//! the only special function the Matérn family needs. Temme's series for
//! x ≤ 2, Steed's continued fraction for x > 2, then upward recurrence in
//! the order.

use statrs::function::gamma::gamma;

const MAXIT: usize = 10_000;
const EPS: f64 = f64::EPSILON;

/// ζ(2), ζ(3), ζ(4), ζ(5) and the Euler–Mascheroni constant, used by the
/// small-|μ| expansion of the Temme gamma coefficients.
const ZETA2: f64 = 1.644_934_066_848_226_4;
const ZETA3: f64 = 1.202_056_903_159_594_3;
const ZETA4: f64 = 1.082_323_233_711_138_2;
const ZETA5: f64 = 1.036_927_755_143_370_0;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Temme coefficients gam1(μ) = [1/Γ(1−μ) − 1/Γ(1+μ)]/(2μ) and
/// gam2(μ) = [1/Γ(1−μ) + 1/Γ(1+μ)]/2 for |μ| ≤ 1/2.
///
/// gam1 cancels catastrophically near μ = 0, so below |μ| = 1e−4 it switches
/// to the series form −e^A·(B/μ)·sinh(B)/B with A the even and B the odd part
/// of ln(1/Γ(1+μ)) = γμ − ζ₂μ²/2 + ζ₃μ³/3 − …, truncated far below f64
/// precision on that range.
fn temme_gammas(mu: f64) -> (f64, f64) {
    let gp = 1.0 / gamma(1.0 + mu); // 1/Γ(1+μ)
    let gm = 1.0 / gamma(1.0 - mu); // 1/Γ(1−μ)
    let gam2 = 0.5 * (gm + gp);
    let gam1 = if mu.abs() >= 1e-4 {
        (gm - gp) / (2.0 * mu)
    } else {
        let mu2 = mu * mu;
        let a = -ZETA2 * mu2 / 2.0 - ZETA4 * mu2 * mu2 / 4.0;
        let b = EULER_GAMMA * mu + ZETA3 * mu2 * mu / 3.0 + ZETA5 * mu2 * mu2 * mu / 5.0;
        let t = EULER_GAMMA + ZETA3 * mu2 / 3.0 + ZETA5 * mu2 * mu2 / 5.0; // B/μ
        let b2 = b * b;
        -a.exp() * t * (1.0 + b2 / 6.0 + b2 * b2 / 120.0)
    };
    (gam1, gam2)
}

/// K_ν(x) for real ν and x ≥ 0. K is even in the order, so |ν| is used.
/// Returns ∞ at x = 0 and NaN for x < 0 or non-finite input.
pub fn bessel_k(nu: f64, x: f64) -> f64 {
    if !nu.is_finite() || !x.is_finite() || x < 0.0 {
        return f64::NAN;
    }
    if x == 0.0 {
        return f64::INFINITY;
    }
    let nu = nu.abs();
    let nl = (nu + 0.5) as usize; // nearest integer
    let mu = nu - nl as f64; // in [−1/2, 1/2]
    let mu2 = mu * mu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;

    let (mut rkmu, mut rk1);
    if x <= 2.0 {
        // Temme's series for K_μ and K_{μ+1}.
        let x2 = 0.5 * x;
        let pimu = std::f64::consts::PI * mu;
        let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
        let mut d = -x2.ln();
        let mut e = mu * d;
        let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
        let (gam1, gam2) = temme_gammas(mu);
        let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let mut sum = ff;
        e = e.exp();
        let mut p = 0.5 * e * gamma(1.0 + mu);
        let mut q = 0.5 / e * gamma(1.0 - mu);
        let mut c = 1.0;
        d = x2 * x2;
        let mut sum1 = p;
        let mut converged = false;
        for i in 1..=MAXIT {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - mu2);
            c *= d / fi;
            p /= fi - mu;
            q /= fi + mu;
            let del = c * ff;
            sum += del;
            let del1 = c * (p - fi * ff);
            sum1 += del1;
            if del.abs() < sum.abs() * EPS {
                converged = true;
                break;
            }
        }
        if !converged {
            return f64::NAN;
        }
        rkmu = sum;
        rk1 = sum1 * xi2;
    } else {
        // Steed's continued fraction CF2 for K_μ and K_{μ+1}.
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut delh = d;
        let mut h = delh;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - mu2;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        let mut converged = false;
        for i in 2..=MAXIT {
            let fi = i as f64;
            a -= 2.0 * (fi - 1.0);
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh = (b * d - 1.0) * delh;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < EPS {
                converged = true;
                break;
            }
        }
        if !converged {
            return f64::NAN;
        }
        h *= a1;
        rkmu = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp() / s;
        rk1 = rkmu * (mu + x + 0.5 - h) * xi;
    }

    // March the order up from μ to ν = μ + nl.
    for i in 0..nl {
        let rktemp = (mu + (i + 1) as f64) * xi2 * rk1 + rkmu;
        rkmu = rk1;
        rk1 = rktemp;
    }
    rkmu
}
