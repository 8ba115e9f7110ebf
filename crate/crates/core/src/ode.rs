//! Small explicit integrators for planar autonomous systems.
//!
//! The semi-wave shooting only ever integrates a two-component state, so the
//! integrators work on `[f64; 2]` directly instead of a generic vector type.

pub type Planar = [f64; 2];

/// Why an adaptive integration stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stop<E> {
    /// The event callback fired after an accepted step.
    Event(E),
    /// Reached the end of the interval without an event.
    End,
    /// Step size underflowed; the integrator gave up.
    StepUnderflow,
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    pub atol: f64,
    pub rtol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveResult<E> {
    pub stop: Stop<E>,
    pub t: f64,
    pub y: Planar,
    pub steps: usize,
}

// Dormand–Prince 5(4) tableau. The systems are autonomous, so the nodes c_i are unused.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b*, the embedded error weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[inline]
fn axpy(y: &Planar, terms: &[(f64, &Planar)], h: f64) -> Planar {
    let mut out = *y;
    for (c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

/// Integrate `y' = f(y)` from `t0` to `t_end` with an adaptive Dormand–Prince
/// pair. After each accepted step `event(t, y)` is consulted; returning
/// `Some(e)` stops the integration.
pub fn integrate_adaptive<F, G, E>(
    f: F,
    t0: f64,
    y0: Planar,
    t_end: f64,
    opts: &AdaptiveOptions,
    mut event: G,
) -> AdaptiveResult<E>
where
    F: Fn(&Planar) -> Planar,
    G: FnMut(f64, &Planar) -> Option<E>,
{
    let mut t = t0;
    let mut y = y0;
    let mut h = opts.h_init.min(t_end - t0);
    let mut k1 = f(&y);
    let mut steps = 0usize;
    let h_min = 1e-14 * (t_end - t0).abs().max(1.0);

    while t < t_end {
        if steps >= opts.max_steps || h < h_min {
            return AdaptiveResult {
                stop: Stop::StepUnderflow,
                t,
                y,
                steps,
            };
        }
        let h_try = h.min(t_end - t);
        let k2 = f(&axpy(&y, &[(A21, &k1)], h_try));
        let k3 = f(&axpy(&y, &[(A31, &k1), (A32, &k2)], h_try));
        let k4 = f(&axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h_try));
        let k5 = f(&axpy(
            &y,
            &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)],
            h_try,
        ));
        let k6 = f(&axpy(
            &y,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            h_try,
        ));
        let y_new = axpy(
            &y,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
            h_try,
        );
        let k7 = f(&y_new);

        let mut err = 0.0f64;
        for i in 0..2 {
            let e = h_try
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max((e / sc).abs());
        }
        if !err.is_finite() {
            h = h_try * 0.1;
            continue;
        }

        if err <= 1.0 {
            t += h_try;
            y = y_new;
            k1 = k7;
            steps += 1;
            if let Some(e) = event(t, &y) {
                return AdaptiveResult {
                    stop: Stop::Event(e),
                    t,
                    y,
                    steps,
                };
            }
            let fac = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = (h_try * fac).min(opts.h_max);
        } else {
            let fac = (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            h = h_try * fac;
        }
    }
    AdaptiveResult {
        stop: Stop::End,
        t,
        y,
        steps,
    }
}

/// One classical fourth-order Runge–Kutta step.
#[inline]
pub fn rk4_step<F: Fn(&Planar) -> Planar>(f: &F, y: &Planar, h: f64) -> Planar {
    let k1 = f(y);
    let k2 = f(&axpy(y, &[(0.5, &k1)], h));
    let k3 = f(&axpy(y, &[(0.5, &k2)], h));
    let k4 = f(&axpy(y, &[(1.0, &k3)], h));
    axpy(
        y,
        &[
            (1.0 / 6.0, &k1),
            (1.0 / 3.0, &k2),
            (1.0 / 3.0, &k3),
            (1.0 / 6.0, &k4),
        ],
        h,
    )
}
