//! Leader input generators and agent plant models.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignalError {
    #[error("time {t} lies outside the table range [{first}, {last}]")]
    TableOutOfRange { t: f64, first: f64, last: f64 },
    #[error("signal has no analytic rate")]
    NoAnalyticRate,
    #[error("invalid signal: {0}")]
    Invalid(String),
}

/// The leader's exogenous input `u0(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum LeaderSignal {
    /// `amplitude * sin(angular_frequency * t + phase)`
    Sinusoid { amplitude: f64, angular_frequency: f64, phase: f64 },
    Constant { value: f64 },
    /// `constant + transient_amplitude * exp(-decay_rate * t)`
    DecayingToConstant { constant: f64, transient_amplitude: f64, decay_rate: f64 },
    /// `coefficients[0] + coefficients[1] * t`; one or two coefficients.
    Polynomial { coefficients: Vec<f64> },
    /// Piecewise-linear interpolation; holds the end values outside the knots.
    SampledTable { times: Vec<f64>, values: Vec<f64> },
}

impl LeaderSignal {
    pub fn validate(&self) -> Result<(), SignalError> {
        let finite = |xs: &[f64]| xs.iter().all(|v| v.is_finite());
        match self {
            Self::Sinusoid { amplitude, angular_frequency, phase } => {
                if !finite(&[*amplitude, *angular_frequency, *phase]) {
                    return Err(SignalError::Invalid("non-finite sinusoid parameter".into()));
                }
            }
            Self::Constant { value } => {
                if !value.is_finite() {
                    return Err(SignalError::Invalid("non-finite constant".into()));
                }
            }
            Self::DecayingToConstant { constant, transient_amplitude, decay_rate } => {
                if !finite(&[*constant, *transient_amplitude, *decay_rate]) || *decay_rate < 0.0 {
                    return Err(SignalError::Invalid(
                        "decaying signal needs finite parameters and decay_rate >= 0".into(),
                    ));
                }
            }
            Self::Polynomial { coefficients } => {
                if coefficients.is_empty() || coefficients.len() > 2 || !finite(coefficients) {
                    return Err(SignalError::Invalid(
                        "polynomial needs one or two finite coefficients".into(),
                    ));
                }
            }
            Self::SampledTable { times, values } => {
                if times.is_empty() || times.len() != values.len() {
                    return Err(SignalError::Invalid(
                        "table needs equally many (at least one) times and values".into(),
                    ));
                }
                if !finite(times) || !finite(values) {
                    return Err(SignalError::Invalid("non-finite table entry".into()));
                }
                if times.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(SignalError::Invalid("table times must strictly increase".into()));
                }
            }
        }
        Ok(())
    }

    /// `u0(t)`. Tables hold their first/last value outside the knot range;
    /// use [`LeaderSignal::input_checked`] to detect that.
    pub fn input(&self, t: f64) -> f64 {
        match self {
            Self::Sinusoid { amplitude, angular_frequency, phase } => {
                amplitude * (angular_frequency * t + phase).sin()
            }
            Self::Constant { value } => *value,
            Self::DecayingToConstant { constant, transient_amplitude, decay_rate } => {
                constant + transient_amplitude * (-decay_rate * t).exp()
            }
            Self::Polynomial { coefficients } => {
                coefficients[0] + coefficients.get(1).map_or(0.0, |c1| c1 * t)
            }
            Self::SampledTable { times, values } => interpolate(times, values, t),
        }
    }

    pub fn input_checked(&self, t: f64) -> Result<f64, SignalError> {
        if let Self::SampledTable { times, .. } = self {
            if self.is_held(t) {
                return Err(SignalError::TableOutOfRange {
                    t,
                    first: times[0],
                    last: times[times.len() - 1],
                });
            }
        }
        Ok(self.input(t))
    }

    /// Whether `input(t)` is a held end value rather than an interpolation.
    pub fn is_held(&self, t: f64) -> bool {
        match self {
            Self::SampledTable { times, .. } => t < times[0] || t > times[times.len() - 1],
            _ => false,
        }
    }

    /// Analytic `du0/dt`. Only oracles read this; followers never do.
    pub fn input_rate(&self, t: f64) -> Result<f64, SignalError> {
        match self {
            Self::Sinusoid { amplitude, angular_frequency, phase } => {
                Ok(amplitude * angular_frequency * (angular_frequency * t + phase).cos())
            }
            Self::Constant { .. } => Ok(0.0),
            Self::DecayingToConstant { transient_amplitude, decay_rate, .. } => {
                Ok(-transient_amplitude * decay_rate * (-decay_rate * t).exp())
            }
            Self::Polynomial { coefficients } => Ok(coefficients.get(1).copied().unwrap_or(0.0)),
            Self::SampledTable { .. } => Err(SignalError::NoAnalyticRate),
        }
    }

    pub fn has_analytic_rate(&self) -> bool {
        !matches!(self, Self::SampledTable { .. })
    }

    /// `sup |du0/dt|` over `t >= 0`, when finite and known in closed form.
    ///
    /// Test metadata only: no observer or controller reads it.
    pub fn rate_bound(&self) -> Option<f64> {
        match self {
            Self::Sinusoid { amplitude, angular_frequency, .. } => {
                Some((amplitude * angular_frequency).abs())
            }
            Self::Constant { .. } => Some(0.0),
            Self::DecayingToConstant { transient_amplitude, decay_rate, .. } => {
                Some((transient_amplitude * decay_rate).abs())
            }
            Self::Polynomial { coefficients } => {
                Some(coefficients.get(1).copied().unwrap_or(0.0).abs())
            }
            Self::SampledTable { .. } => None,
        }
    }

    /// `sup |d3 u0/dt3|`, used to size finite-difference tolerances.
    pub fn third_derivative_bound(&self) -> Option<f64> {
        match self {
            Self::Sinusoid { amplitude, angular_frequency, .. } => {
                Some((amplitude * angular_frequency.powi(3)).abs())
            }
            Self::Constant { .. } | Self::Polynomial { .. } => Some(0.0),
            Self::DecayingToConstant { transient_amplitude, decay_rate, .. } => {
                Some((transient_amplitude * decay_rate.powi(3)).abs())
            }
            Self::SampledTable { .. } => None,
        }
    }
}

fn interpolate(times: &[f64], values: &[f64], t: f64) -> f64 {
    let last = times.len() - 1;
    if t <= times[0] {
        return values[0];
    }
    if t >= times[last] {
        return values[last];
    }
    // first knot strictly greater than t
    let hi = times.partition_point(|&k| k <= t);
    let lo = hi - 1;
    let w = (t - times[lo]) / (times[hi] - times[lo]);
    values[lo] + w * (values[hi] - values[lo])
}

/// `dx/dt = u`
pub fn first_order_plant_rate(_x: f64, u: f64) -> f64 {
    u
}

/// `(dx/dt, dv/dt) = (v, u)`
pub fn second_order_plant_rate(_x: f64, v: f64, u: f64) -> (f64, f64) {
    (v, u)
}

/// Closed-loop state of the first-order system.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstOrderWorld {
    pub t: f64,
    pub x0: f64,
    pub x: Vec<f64>,
    /// Input-observer states: `z_i` for the adaptive and simplified
    /// observers, `uhat_{0,i}` itself for the direct observer.
    pub z: Vec<f64>,
    pub d: Vec<f64>,
    pub xhat0: Vec<f64>,
}

/// Closed-loop state of the second-order system.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderWorld {
    pub t: f64,
    pub x0: f64,
    pub v0: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub uhat0: Vec<f64>,
    pub d: Vec<f64>,
    pub zv: Vec<f64>,
    pub xhat0: Vec<f64>,
    pub zbar: Vec<f64>,
}
