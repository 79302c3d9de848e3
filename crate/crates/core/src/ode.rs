//! Fixed-step classical Runge-Kutta over flat state vectors.

/// One RK4 step of `dy/dt = f(t, y)`. Errors from `f` at any stage abort the
/// step.
pub fn rk4_step<E>(
    t: f64,
    y: &[f64],
    h: f64,
    mut f: impl FnMut(f64, &[f64]) -> Result<Vec<f64>, E>,
) -> Result<Vec<f64>, E> {
    let shifted = |k: &[f64], scale: f64| -> Vec<f64> {
        y.iter().zip(k).map(|(yi, ki)| yi + scale * ki).collect()
    };
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * h, &shifted(&k1, 0.5 * h))?;
    let k3 = f(t + 0.5 * h, &shifted(&k2, 0.5 * h))?;
    let k4 = f(t + h, &shifted(&k3, h))?;
    Ok(y.iter()
        .enumerate()
        .map(|(i, yi)| yi + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    #[test]
    fn exponential_decay() {
        let h: f64 = 0.1;
        let mut y = vec![1.0];
        for step in 0..10 {
            y = rk4_step(step as f64 * h, &y, h, |_, y| {
                Ok::<_, Infallible>(vec![-y[0]])
            })
            .unwrap();
        }
        // On y' = -y one RK4 step multiplies by the degree-4 Taylor
        // polynomial of exp(-h).
        let amplification = 1.0 - h + h.powi(2) / 2.0 - h.powi(3) / 6.0 + h.powi(4) / 24.0;
        assert!((y[0] - amplification.powi(10)).abs() < 1e-15);
        // Global error is about 10 * h^5/120 * e^-1 = 3.3e-7.
        assert!((y[0] - (-1.0_f64).exp()).abs() < 4e-7, "{}", y[0]);
    }

    #[test]
    fn constant_velocity_is_exact() {
        let y = rk4_step(0.0, &[0.25, -3.0], 0.125, |_, _| {
            Ok::<_, Infallible>(vec![-1.0, 2.0])
        })
        .unwrap();
        assert_eq!(y, vec![0.25 - 0.125, -3.0 + 0.25]);
    }

    #[test]
    fn zero_step_is_identity() {
        let y0 = vec![0.1, 0.2, 0.3];
        let y = rk4_step(0.0, &y0, 0.0, |_, y| Ok::<_, Infallible>(y.to_vec())).unwrap();
        assert_eq!(y, y0);
    }

    #[test]
    fn stage_errors_abort() {
        let mut calls = 0;
        let r = rk4_step(0.0, &[1.0], 0.1, |_, _| {
            calls += 1;
            if calls == 3 {
                Err("boom")
            } else {
                Ok(vec![1.0])
            }
        });
        assert_eq!(r, Err("boom"));
    }
}
