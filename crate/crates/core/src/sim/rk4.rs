use super::SimError;

/// Classical four-stage Runge-Kutta with reusable stage buffers.
#[derive(Debug, Clone)]
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    stage: Vec<f64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        Self {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            stage: vec![0.0; dim],
        }
    }

    /// Advance `y` from `t` to `t + dt` in place.
    ///
    /// `f(t, y, dy)` writes the rate of `y` into `dy`. Fails with
    /// [`SimError::NonFiniteState`] if the new state has a NaN or infinity.
    pub fn step<F>(&mut self, mut f: F, t: f64, dt: f64, y: &mut [f64]) -> Result<(), SimError>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), SimError>,
    {
        let n = y.len();
        if self.k1.len() != n {
            *self = Self::new(n);
        }
        let half = 0.5 * dt;

        f(t, y, &mut self.k1)?;
        for i in 0..n {
            self.stage[i] = y[i] + half * self.k1[i];
        }
        f(t + half, &self.stage, &mut self.k2)?;
        for i in 0..n {
            self.stage[i] = y[i] + half * self.k2[i];
        }
        f(t + half, &self.stage, &mut self.k3)?;
        for i in 0..n {
            self.stage[i] = y[i] + dt * self.k3[i];
        }
        f(t + dt, &self.stage, &mut self.k4)?;

        let sixth = dt / 6.0;
        for i in 0..n {
            y[i] += sixth * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(SimError::NonFiniteState { t: t + dt });
        }
        Ok(())
    }
}

/// One RK4 step returning the new state.
pub fn step_rk4<F>(f: F, state: &[f64], t: f64, dt: f64) -> Result<Vec<f64>, SimError>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), SimError>,
{
    if !(dt > 0.0) {
        return Err(SimError::ConfigInvalid(format!("step {dt} must be positive")));
    }
    let mut y = state.to_vec();
    Rk4::new(y.len()).step(f, t, dt, &mut y)?;
    Ok(y)
}
