#![allow(dead_code)]

use std::sync::Arc;

use modpde::{generate_fbm, Constraints, EquationKind, ModulationPath, SpectralField, C64};

pub const DESK_TAU: f64 = 0.05;
pub const DESK_MODES: usize = 16;
pub const DESK_SEED: u64 = 7;

/// fBm with H = 0.3 on `[0, τ]`, 2048 segments.
pub fn desk_path() -> Arc<ModulationPath> {
    Arc::new(generate_fbm(0.3, DESK_TAU, 2049, DESK_SEED).unwrap())
}

pub fn constraints_for(eq: EquationKind) -> Constraints {
    match eq {
        EquationKind::Nls => Constraints::NONE,
        EquationKind::Dnls => Constraints::MEAN_ZERO,
        _ => Constraints::REAL_MEAN_ZERO,
    }
}

/// Unit-L² desk data: `√2 cos x` for the real equations, `0.8 e^{ix} + 0.6i e^{-2ix}` otherwise.
pub fn desk_data(eq: EquationKind, n: usize) -> SpectralField {
    let mut u = SpectralField::zeros(n, constraints_for(eq));
    if eq.preserves_reality() {
        let a = 0.5f64.sqrt();
        u.set(1, C64::new(a, 0.0));
        u.set(-1, C64::new(a, 0.0));
    } else {
        u.set(1, C64::new(0.8, 0.0));
        u.set(-2, C64::new(0.0, 0.6));
    }
    u
}

const XK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn kronrod(f: &impl Fn(f64) -> C64, lo: f64, hi: f64) -> (C64, f64) {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let fc = f(c);
    let mut k = fc * WK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let pair = f(c - h * XK[j]) + f(c + h * XK[j]);
        k += pair * WK[j];
        if j % 2 == 1 {
            g += pair * WG[j / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

/// Adaptive G7–K15 quadrature of a smooth complex integrand.
pub fn gauss_kronrod(f: &impl Fn(f64) -> C64, lo: f64, hi: f64, tol: f64) -> C64 {
    let (val, err) = kronrod(f, lo, hi);
    if err <= tol || hi - lo < 1e-15 * (1.0 + hi.abs()) {
        return val;
    }
    let mid = 0.5 * (lo + hi);
    gauss_kronrod(f, lo, mid, 0.5 * tol) + gauss_kronrod(f, mid, hi, 0.5 * tol)
}

/// Linear interpolation of the path samples, independent of the library.
pub fn interpolate(path: &ModulationPath, t: f64) -> f64 {
    let v = path.values();
    let m = (v.len() - 1) as f64;
    let x = (t / path.horizon() * m).clamp(0.0, m);
    let j = (x.floor() as usize).min(v.len() - 2);
    let s = x - j as f64;
    v[j] + s * (v[j + 1] - v[j])
}

/// `∫_r^t e^{ia w(s)} ds`, split at the path nodes and integrated by
/// adaptive Gauss–Kronrod on each piece.
pub fn phase_oracle(path: &ModulationPath, r: f64, t: f64, a: f64) -> C64 {
    let m = path.values().len() - 1;
    let dt = path.horizon() / m as f64;
    let f = |s: f64| C64::from_polar(1.0, a * interpolate(path, s));
    let mut cuts = vec![r];
    let first = (r / dt).floor() as usize + 1;
    for k in first..=m {
        let x = k as f64 * dt;
        if x >= t {
            break;
        }
        if x > r {
            cuts.push(x);
        }
    }
    cuts.push(t);
    // The integrand itself is only accurate to about eps·|a w|.
    let density = 1e-14 * (1.0 + a.abs());
    cuts.windows(2).map(|w| gauss_kronrod(&f, w[0], w[1], density * (w[1] - w[0]))).sum()
}

/// Right-hand side of the Galerkin system in the interaction representation.
fn galerkin_rhs(eq: EquationKind, w: f64, u: &[C64], nn: i64) -> Vec<C64> {
    let at = |k: i64| u[(k + nn) as usize];
    let phi = |k: i64| eq.symbol().value(k);
    let mut out = vec![C64::new(0.0, 0.0); u.len()];
    for n in -nn..=nn {
        let mut acc = C64::new(0.0, 0.0);
        if eq == EquationKind::Nls {
            for n1 in -nn..=nn {
                for n3 in -nn..=nn {
                    let n2 = n1 + n3 - n;
                    if n1 == n || n3 == n || n2.abs() > nn {
                        continue;
                    }
                    let xi = (n * n - n1 * n1 + n2 * n2 - n3 * n3) as f64;
                    acc += C64::from_polar(1.0, xi * w) * at(n1) * at(n2).conj() * at(n3);
                }
            }
            let v = at(n);
            acc = C64::new(0.0, -1.0) * acc + C64::new(0.0, 1.0) * v * v.conj() * v;
        } else if n != 0 {
            for n1 in -nn..=nn {
                let n2 = n - n1;
                if n1 == 0 || n2 == 0 || n2.abs() > nn {
                    continue;
                }
                let xi = -phi(n) + phi(n1) + phi(n2);
                acc += C64::from_polar(1.0, xi * w) * at(n1) * at(n2);
            }
            let m = if eq == EquationKind::Dnls { C64::new(n as f64, 0.0) } else { C64::new(0.0, n as f64) };
            acc *= m;
        }
        out[(n + nn) as usize] = acc;
    }
    out
}

/// Classical RK4 on the Galerkin ODE with `per_segment` steps inside every
/// linear piece of the path.
pub fn rk4_galerkin(eq: EquationKind, path: &ModulationPath, u0: &SpectralField, tau: f64, per_segment: usize) -> SpectralField {
    let nn = u0.max_mode() as i64;
    let m = path.values().len() - 1;
    let dt = path.horizon() / m as f64;
    let segments = (tau / dt).round() as usize;
    assert!((segments as f64 * dt - tau).abs() < 1e-12, "tau must be a path node");
    let h = dt / per_segment as f64;
    let mut u = u0.coeffs().to_vec();
    let axpy = |u: &[C64], k: &[C64], s: f64| -> Vec<C64> { u.iter().zip(k).map(|(a, b)| a + b * s).collect() };
    for seg in 0..segments {
        for i in 0..per_segment {
            let t = seg as f64 * dt + i as f64 * h;
            let w = |s: f64| interpolate(path, s);
            let k1 = galerkin_rhs(eq, w(t), &u, nn);
            let k2 = galerkin_rhs(eq, w(t + 0.5 * h), &axpy(&u, &k1, 0.5 * h), nn);
            let k3 = galerkin_rhs(eq, w(t + 0.5 * h), &axpy(&u, &k2, 0.5 * h), nn);
            let k4 = galerkin_rhs(eq, w(t + h), &axpy(&u, &k3, h), nn);
            for j in 0..u.len() {
                u[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
        }
    }
    SpectralField::from_coeffs(u0.max_mode(), u, Constraints::NONE).unwrap()
}
