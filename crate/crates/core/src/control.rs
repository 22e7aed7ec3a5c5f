//! Tracking control laws and the gain conditions that guarantee convergence.

#[derive(Debug, Clone, PartialEq)]
pub struct Gains {
    pub k1: f64,
    /// Velocity-error gain; second-order agents only.
    pub k2: Option<f64>,
    /// Observer gain shared by the leader-linked terms and the self-velocity
    /// observer.
    pub l: f64,
    /// Position-observer coupling gain.
    pub c: f64,
    /// Adaptation rates, one per follower.
    pub tau: Vec<f64>,
}

impl Gains {
    /// Convergence conditions the gains violate, as human-readable notes.
    ///
    /// Empty when `k1 > 0`, `c > 0`, `l > 0`, every `tau_i > 0` and, for
    /// second-order agents, `k2 > 0`.
    pub fn violations(&self, second_order: bool) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.k1 > 0.0) {
            out.push(format!("k1 = {} is not positive", self.k1));
        }
        if !(self.c > 0.0) {
            out.push(format!("c = {} is not positive", self.c));
        }
        if !(self.l > 0.0) {
            out.push(format!("l = {} is not positive", self.l));
        }
        if let Some((i, t)) = self.tau.iter().enumerate().find(|(_, t)| !(**t > 0.0)) {
            out.push(format!("tau[{i}] = {t} is not positive"));
        }
        if second_order {
            match self.k2 {
                None => out.push("k2 is missing".into()),
                Some(k2) if !validate_gains_second_order(self.k1, k2) => {
                    out.push(format!("(k1, k2) = ({}, {k2}) fails the Hurwitz test", self.k1))
                }
                Some(_) => {}
            }
        }
        out
    }
}

/// `u = -k1 (x - xhat0) + uhat0`
pub fn first_order_control(x: f64, xhat0: f64, uhat0: f64, k1: f64) -> f64 {
    -k1 * (x - xhat0) + uhat0
}

/// `u = -k1 (x - xhat0) - k2 (vhat - vhat0) + uhat0`
pub fn second_order_control(
    x: f64,
    xhat0: f64,
    vhat: f64,
    vhat0: f64,
    uhat0: f64,
    k1: f64,
    k2: f64,
) -> f64 {
    -k1 * (x - xhat0) - k2 * (vhat - vhat0) + uhat0
}

/// Stability of `s^2 + (a1 + i b1) s + a0 + i b0`: both roots lie in the open
/// left half-plane iff `a1 > 0` and `a1 b1 b0 + a1^2 a0 - b0^2 > 0`.
pub fn complex_quadratic_stable(a1: f64, b1: f64, a0: f64, b0: f64) -> bool {
    a1 > 0.0 && complex_quadratic_margin(a1, b1, a0, b0) > 0.0
}

/// The second quantity of [`complex_quadratic_stable`], `a1 b1 b0 + a1^2 a0 - b0^2`.
pub fn complex_quadratic_margin(a1: f64, b1: f64, a0: f64, b0: f64) -> f64 {
    a1 * b1 * b0 + a1 * a1 * a0 - b0 * b0
}

/// Each scalar block of the tracking-error matrix has characteristic
/// polynomial `s^2 + k2 s + k1`; feed it to [`complex_quadratic_stable`].
pub fn validate_gains_second_order(k1: f64, k2: f64) -> bool {
    complex_quadratic_stable(k2, 0.0, k1, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Complex;

    fn roots(a1: f64, b1: f64, a0: f64, b0: f64) -> [Complex<f64>; 2] {
        let p = Complex::new(a1, b1);
        let q = Complex::new(a0, b0);
        let disc = (p * p - q * 4.0).sqrt();
        [(-p + disc) / 2.0, (-p - disc) / 2.0]
    }

    #[test]
    fn control_laws() {
        assert_eq!(first_order_control(1.0, 0.0, 0.5, 2.0), -1.5);
        assert_eq!(first_order_control(-2.0, 3.0, 0.0, 1.0), 5.0);
        assert_eq!(first_order_control(0.4, 0.4, -0.9, 3.0), -0.9);
        assert_eq!(second_order_control(1.0, 0.0, 2.0, 0.0, 0.0, 1.0, 1.0), -3.0);
        assert_eq!(second_order_control(0.0, 0.0, 0.0, 1.0, -1.0, 5.0, 2.0), 1.0);
        assert_eq!(second_order_control(0.2, 0.2, -1.0, -1.0, 0.6, 5.0, 2.0), 0.6);
    }

    #[test]
    fn complex_quadratic_cases() {
        assert!(complex_quadratic_stable(1.0, 0.0, 1.0, 0.0));
        assert!(!complex_quadratic_stable(0.0, 0.0, 1.0, 0.0));
        assert_eq!(complex_quadratic_margin(2.0, 1.0, 1.0, 1.0), 5.0);
        assert!(complex_quadratic_stable(2.0, 1.0, 1.0, 1.0));
        assert!(roots(2.0, 1.0, 1.0, 1.0).iter().all(|r| r.re < 0.0));
    }

    #[test]
    fn second_order_gain_validation() {
        assert!(validate_gains_second_order(1.0, 1.0));
        assert!(!validate_gains_second_order(1.0, 0.0));
        assert!(!validate_gains_second_order(-1.0, 1.0));
    }

    #[test]
    fn violations_listing() {
        let g = Gains { k1: 1.0, k2: Some(1.0), l: 1.0, c: 0.5, tau: vec![1.0; 3] };
        assert!(g.violations(true).is_empty());
        let bad = Gains { k1: -1.0, k2: None, ..g.clone() };
        assert_eq!(bad.violations(false).len(), 1);
        assert_eq!(bad.violations(true).len(), 2);
    }
}
