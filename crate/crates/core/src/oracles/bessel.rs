use crate::error::{Error, Result};
use num_complex::Complex64 as C;
use std::f64::consts::PI;

const ASYMPTOTIC_RADIUS: f64 = 17.0;
const MAX_MODULUS: f64 = 1e4;
const MAX_IMAG: f64 = 700.0;

/// Bessel function of the first kind `J_n(z)`, `n = 0..=3`, complex `z`.
pub fn bessel_j(order: u32, z: C) -> Result<C> {
    if order > 3 {
        return Err(Error::Unsupported(format!("Bessel order {order}")));
    }
    let r = z.norm();
    if !r.is_finite() || r > MAX_MODULUS || z.im.abs() > MAX_IMAG {
        return Err(Error::BesselOverflow(r));
    }
    if r >= ASYMPTOTIC_RADIUS {
        return Ok(hankel(order, z));
    }
    if r - z.im.abs() < 9.2 {
        Ok(series(order, z))
    } else {
        Ok(miller(z)[order as usize])
    }
}

/// `J_0..J_3` at one argument.
pub fn bessel_j0123(z: C) -> Result<[C; 4]> {
    Ok([
        bessel_j(0, z)?,
        bessel_j(1, z)?,
        bessel_j(2, z)?,
        bessel_j(3, z)?,
    ])
}

fn series(order: u32, z: C) -> C {
    let half = z * 0.5;
    let q = -(half * half);
    let mut lead = C::new(1.0, 0.0);
    for k in 1..=order {
        lead = lead * half / k as f64;
    }
    let mut term = C::new(1.0, 0.0);
    let mut sum = term;
    for k in 1..200 {
        term = term * q / (k as f64 * (k + order) as f64);
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    lead * sum
}

/// Downward recurrence from well above the argument, normalised by
/// `J0 + 2 Σ J_2k = 1`, or by `J0 + 2 Σ (-1)^k J_2k = cos z` when the
/// imaginary part makes the terms large.
fn miller(z: C) -> [C; 4] {
    let start = 2 * ((z.norm() as usize + 40) / 2);
    let mut next = C::new(0.0, 0.0);
    let mut cur = C::new(1e-30, 0.0);
    let mut low = [C::new(0.0, 0.0); 4];
    let mut plain = C::new(0.0, 0.0);
    let mut alternating = C::new(0.0, 0.0);
    for n in (1..=start).rev() {
        // cur = J_n, compute J_{n-1}
        let prev = cur * (2.0 * n as f64) / z - next;
        next = cur;
        cur = prev;
        let m = n - 1;
        if m < 4 {
            low[m] = cur;
        }
        if m % 2 == 0 && m > 0 {
            plain += cur * 2.0;
            alternating += cur * if (m / 2) % 2 == 0 { 2.0 } else { -2.0 };
        }
        let big = cur.norm();
        if big > 1e250 {
            let s = 1e-250;
            cur *= s;
            next *= s;
            plain *= s;
            alternating *= s;
            for v in &mut low {
                *v *= s;
            }
        }
    }
    let norm = if z.im.abs() > 1.0 {
        (low[0] + alternating) / z.cos()
    } else {
        low[0] + plain
    };
    low.map(|v| v / norm)
}

/// Hankel asymptotic expansion, valid for large `|z|`.
fn hankel(order: u32, z: C) -> C {
    if z.re < 0.0 {
        let sign = if order.is_multiple_of(2) { 1.0 } else { -1.0 };
        return hankel(order, -z) * sign;
    }
    let mu = 4.0 * (order * order) as f64;
    let mut p = C::new(0.0, 0.0);
    let mut q = C::new(0.0, 0.0);
    let mut a = C::new(1.0, 0.0);
    let inv8z = 1.0 / (z * 8.0);
    let mut last = f64::INFINITY;
    for k in 0..80usize {
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            a = a * (mu - odd * odd) / k as f64 * inv8z;
        }
        let mag = a.norm();
        if mag > last {
            break;
        }
        last = mag;
        match k % 4 {
            0 => p += a,
            1 => q += a,
            2 => p -= a,
            _ => q -= a,
        }
        if mag < 1e-17 * p.norm().max(q.norm()) {
            break;
        }
    }
    let chi = z - (0.5 * order as f64 + 0.25) * PI;
    (C::new(2.0, 0.0) / (z * PI)).sqrt() * (p * chi.cos() - q * chi.sin())
}
