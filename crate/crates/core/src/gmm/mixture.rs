use serde::{Deserialize, Serialize};

use crate::error::{Result, SusyError};

/// One term `c0 · exp(−c2 (x − c3)²)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub c0: f64,
    pub c2: f64,
    pub c3: f64,
}

impl Component {
    /// ∫ c0 e^{−c2 (x−c3)²} dx.
    pub fn mass(&self) -> f64 {
        self.c0 * (std::f64::consts::PI / self.c2).sqrt()
    }
}

/// ln ρ and its first four derivatives at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogDerivatives {
    pub l0: f64,
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub l4: f64,
}

/// Trial density ρ(x) = Σₙ c0ₙ exp(−c2ₙ (x − c3ₙ)²).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixture {
    components: Vec<Component>,
}

impl GaussianMixture {
    pub fn new(components: Vec<Component>) -> Result<Self> {
        if components.is_empty() {
            return Err(SusyError::InvalidArgument("mixture needs at least one component".into()));
        }
        for (i, c) in components.iter().enumerate() {
            let ok = c.c0.is_finite() && c.c0 > 0.0 && c.c2.is_finite() && c.c2 > 0.0 && c.c3.is_finite();
            if !ok {
                return Err(SusyError::InvalidArgument(format!("invalid mixture component {i}: {c:?}")));
            }
        }
        Ok(Self { components })
    }

    pub fn single(c0: f64, c2: f64, c3: f64) -> Result<Self> {
        Self::new(vec![Component { c0, c2, c3 }])
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn integral(&self) -> f64 {
        self.components.iter().map(Component::mass).sum()
    }

    /// Rescaled so that ∫ρ = 1.
    pub fn normalized(&self) -> Self {
        let z = self.integral();
        Self { components: self.components.iter().map(|c| Component { c0: c.c0 / z, ..*c }).collect() }
    }

    pub fn density(&self, x: f64) -> f64 {
        self.components.iter().map(|c| c.c0 * (-c.c2 * (x - c.c3).powi(2)).exp()).sum()
    }

    /// ln ρ(x), stable far in the tails.
    pub fn log_density(&self, x: f64) -> f64 {
        let mut max = f64::NEG_INFINITY;
        for c in &self.components {
            max = max.max(c.c0.ln() - c.c2 * (x - c.c3).powi(2));
        }
        let s: f64 = self.components.iter().map(|c| (c.c0.ln() - c.c2 * (x - c.c3).powi(2) - max).exp()).sum();
        max + s.ln()
    }

    /// Component responsibilities gₖ(x)/ρ(x) and ln ρ(x).
    pub fn responsibilities(&self, x: f64, out: &mut Vec<f64>) -> f64 {
        out.clear();
        let mut max = f64::NEG_INFINITY;
        for c in &self.components {
            let lg = c.c0.ln() - c.c2 * (x - c.c3).powi(2);
            out.push(lg);
            max = max.max(lg);
        }
        let mut s = 0.0;
        for r in out.iter_mut() {
            *r = (*r - max).exp();
            s += *r;
        }
        for r in out.iter_mut() {
            *r /= s;
        }
        max + s.ln()
    }

    /// Analytic ln ρ, (ln ρ)′, …, (ln ρ)⁗ from responsibility-weighted moments.
    pub fn log_derivatives(&self, x: f64) -> LogDerivatives {
        let mut r = Vec::with_capacity(self.components.len());
        let l0 = self.responsibilities(x, &mut r);
        let (mut m1, mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0, 0.0);
        for (c, &rk) in self.components.iter().zip(&r) {
            // d^j/dx^j e^{−c2 d²} / e^{−c2 d²} with u = −2 c2 d.
            let u = -2.0 * c.c2 * (x - c.c3);
            let a = c.c2;
            let u2 = u * u;
            m1 += rk * u;
            m2 += rk * (u2 - 2.0 * a);
            m3 += rk * (u2 * u - 6.0 * a * u);
            m4 += rk * (u2 * u2 - 12.0 * a * u2 + 12.0 * a * a);
        }
        // Cumulants of the derivative moments.
        let l1 = m1;
        let l2 = m2 - m1 * m1;
        let l3 = m3 - 3.0 * m2 * m1 + 2.0 * m1.powi(3);
        let l4 = m4 - 4.0 * m3 * m1 - 3.0 * m2 * m2 + 12.0 * m2 * m1 * m1 - 6.0 * m1.powi(4);
        LogDerivatives { l0, l1, l2, l3, l4 }
    }

    /// 64-bit FNV-1a hash of the normalized parameters, for trace snapshots.
    pub fn snapshot_hash(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for c in self.normalized().components {
            for v in [c.c0, c.c2, c.c3] {
                for b in v.to_bits().to_le_bytes() {
                    h ^= b as u64;
                    h = h.wrapping_mul(0x0000_0100_0000_01b3);
                }
            }
        }
        h
    }

    /// Points `x` with CDF(x) = pᵢ, from a cumulative trapezoid table over `[lo, hi]`.
    pub fn quantiles(&self, probs: &[f64], lo: f64, hi: f64) -> Vec<f64> {
        const TABLE: usize = 8001;
        let h = (hi - lo) / (TABLE - 1) as f64;
        let xs: Vec<f64> = (0..TABLE).map(|i| lo + i as f64 * h).collect();
        let ls: Vec<f64> = xs.iter().map(|&x| self.log_density(x)).collect();
        let lmax = ls.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let ps: Vec<f64> = ls.iter().map(|l| (l - lmax).exp()).collect();
        let mut cdf = vec![0.0; TABLE];
        for i in 1..TABLE {
            cdf[i] = cdf[i - 1] + 0.5 * h * (ps[i] + ps[i - 1]);
        }
        let total = cdf[TABLE - 1];
        probs
            .iter()
            .map(|&p| {
                let target = p.clamp(0.0, 1.0) * total;
                let j = cdf.partition_point(|&c| c < target).clamp(1, TABLE - 1);
                let (c0, c1) = (cdf[j - 1], cdf[j]);
                let t = if c1 > c0 { (target - c0) / (c1 - c0) } else { 0.5 };
                xs[j - 1] + t * h
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let h = 1e-4;
        (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
    }

    #[test]
    fn peak_and_decay() {
        let m = GaussianMixture::single(1.0, 1.0, 0.0).unwrap();
        assert_eq!(m.density(0.0), 1.0);
        assert!(m.density(40.0) == 0.0 && m.density(-40.0) == 0.0);
        assert!((m.log_density(40.0) + 1600.0).abs() < 1e-9);
    }

    #[test]
    fn mirrored_pair_is_even() {
        let m = GaussianMixture::new(vec![
            Component { c0: 0.7, c2: 2.0, c3: 1.1 },
            Component { c0: 0.7, c2: 2.0, c3: -1.1 },
        ])
        .unwrap();
        for &x in &[0.0, 0.3, 1.7, 2.9] {
            assert_eq!(m.density(x), m.density(-x));
        }
    }

    #[test]
    fn log_derivatives_match_finite_differences() {
        let m = GaussianMixture::new(vec![
            Component { c0: 0.4, c2: 3.0, c3: -0.8 },
            Component { c0: 1.1, c2: 1.5, c3: 0.5 },
            Component { c0: 0.2, c2: 6.0, c3: 1.2 },
        ])
        .unwrap();
        for &x in &[-1.3, -0.2, 0.4, 1.0, 2.2] {
            let d = m.log_derivatives(x);
            let l1 = |y: f64| m.log_derivatives(y).l1;
            let l2 = |y: f64| m.log_derivatives(y).l2;
            let l3 = |y: f64| m.log_derivatives(y).l3;
            assert!((d.l0 - m.density(x).ln()).abs() < 1e-12);
            assert!((d.l1 - fd(|y| m.log_density(y), x)).abs() < 1e-7);
            assert!((d.l2 - fd(l1, x)).abs() < 1e-6);
            assert!((d.l3 - fd(l2, x)).abs() < 1e-5);
            assert!((d.l4 - fd(l3, x)).abs() < 1e-4 * d.l4.abs().max(1.0));
        }
    }

    #[test]
    fn normalization() {
        let m = GaussianMixture::new(vec![
            Component { c0: 3.0, c2: 0.5, c3: 0.0 },
            Component { c0: 0.1, c2: 9.0, c3: 2.0 },
        ])
        .unwrap()
        .normalized();
        assert!((m.integral() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quantiles_of_a_symmetric_gaussian() {
        let m = GaussianMixture::single(1.0, 0.5, 0.0).unwrap();
        let q = m.quantiles(&[0.5, 0.841_344_746], -10.0, 10.0);
        assert!(q[0].abs() < 1e-6);
        assert!((q[1] - 1.0).abs() < 1e-5);
    }
}
