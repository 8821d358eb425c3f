//! Expectation–maximization refit of the mixture to the sample points.

use crate::error::{Result, SusyError};

use super::energy::SampleEnsemble;
use super::mixture::{Component, GaussianMixture};

/// Collapse guard: a component narrower than `COLLAPSE_EPS` times the mean point
/// spacing is reseeded.
const COLLAPSE_EPS: f64 = 0.5;
const MAX_RESEEDS: usize = 3;

#[derive(Clone, Debug)]
pub struct EmFit {
    pub mixture: GaussianMixture,
    /// Weighted log-likelihood before each round and after the last one.
    pub log_likelihood: Vec<f64>,
    /// Rounds in which a collapsed component was reseeded; the likelihood may
    /// drop across those rounds.
    pub reseeded_rounds: Vec<usize>,
}

struct Params {
    pi: Vec<f64>,
    mu: Vec<f64>,
    var: Vec<f64>,
}

impl Params {
    fn from_mixture(m: &GaussianMixture) -> Self {
        let total = m.integral();
        Self {
            pi: m.components().iter().map(|c| c.mass() / total).collect(),
            mu: m.components().iter().map(|c| c.c3).collect(),
            var: m.components().iter().map(|c| 0.5 / c.c2).collect(),
        }
    }

    fn log_component(&self, k: usize, x: f64) -> f64 {
        let v = self.var[k];
        self.pi[k].ln() - 0.5 * (2.0 * std::f64::consts::PI * v).ln() - (x - self.mu[k]).powi(2) / (2.0 * v)
    }

    fn into_mixture(self) -> Result<GaussianMixture> {
        let comps = (0..self.pi.len())
            .map(|k| Component {
                c0: self.pi[k] / (2.0 * std::f64::consts::PI * self.var[k]).sqrt(),
                c2: 0.5 / self.var[k],
                c3: self.mu[k],
            })
            .collect();
        Ok(GaussianMixture::new(comps)?.normalized())
    }
}

/// E-step; returns the weighted log-likelihood and fills `resp` (row-major n_p × N).
fn expectation(p: &Params, ens: &SampleEnsemble, resp: &mut [f64]) -> f64 {
    let k = p.pi.len();
    let mut ll = 0.0;
    for (i, (&x, &w)) in ens.points().iter().zip(ens.weights()).enumerate() {
        let row = &mut resp[i * k..(i + 1) * k];
        let mut max = f64::NEG_INFINITY;
        for (j, r) in row.iter_mut().enumerate() {
            *r = p.log_component(j, x);
            max = max.max(*r);
        }
        let mut s = 0.0;
        for r in row.iter_mut() {
            *r = (*r - max).exp();
            s += *r;
        }
        row.iter_mut().for_each(|r| *r /= s);
        ll += w * (max + s.ln());
    }
    ll
}

fn widest_gap(points: &[f64]) -> (f64, f64) {
    let mut sorted = points.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut best = (sorted[0], 0.0);
    for pair in sorted.windows(2) {
        let gap = pair[1] - pair[0];
        if gap > best.1 {
            best = (0.5 * (pair[0] + pair[1]), gap);
        }
    }
    best
}

/// Run `iterations` EM rounds over the ensemble, starting from `previous`.
pub fn em_refit(ensemble: &SampleEnsemble, n: usize, previous: &GaussianMixture, iterations: usize) -> Result<EmFit> {
    if previous.len() != n {
        return Err(SusyError::InvalidArgument(format!(
            "previous mixture has {} components, {n} requested",
            previous.len()
        )));
    }
    let np = ensemble.len();
    if np < n {
        return Err(SusyError::InvalidArgument(format!("{np} points cannot support {n} components")));
    }
    let (lo, hi) = ensemble.points().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let spacing = if np > 1 { (hi - lo) / (np - 1) as f64 } else { 0.0 };
    let var_min = 0.5 * (COLLAPSE_EPS * spacing).powi(2);

    let wsum: f64 = ensemble.weights().iter().sum();
    let mut p = Params::from_mixture(previous);
    let mut resp = vec![0.0; np * n];
    let mut ll = Vec::with_capacity(iterations + 1);
    let mut reseeded_rounds = Vec::new();
    let mut reseeds = vec![0usize; n];

    for round in 0..iterations {
        ll.push(expectation(&p, ensemble, &mut resp));
        let mut reseeded = false;
        for k in 0..n {
            let mut nk = 0.0;
            let mut sx = 0.0;
            for (i, (&x, &w)) in ensemble.points().iter().zip(ensemble.weights()).enumerate() {
                let r = w * resp[i * n + k];
                nk += r;
                sx += r * x;
            }
            let mu = if nk > 0.0 { sx / nk } else { p.mu[k] };
            let mut sxx = 0.0;
            for (i, (&x, &w)) in ensemble.points().iter().zip(ensemble.weights()).enumerate() {
                sxx += w * resp[i * n + k] * (x - mu).powi(2);
            }
            let var = if nk > 0.0 { sxx / nk } else { 0.0 };
            if nk <= 1e-12 * wsum || !(var > var_min) {
                reseeds[k] += 1;
                if reseeds[k] > MAX_RESEEDS || spacing == 0.0 {
                    return Err(SusyError::CollapsedComponent { index: k, c2: 0.5 / var.max(f64::MIN_POSITIVE) });
                }
                let (centre, gap) = widest_gap(ensemble.points());
                p.mu[k] = centre;
                p.var[k] = (0.5 * gap).powi(2).max(var_min * 4.0);
                p.pi[k] = 1.0 / np as f64;
                reseeded = true;
            } else {
                p.pi[k] = nk / wsum;
                p.mu[k] = mu;
                p.var[k] = var;
            }
        }
        if reseeded {
            let s: f64 = p.pi.iter().sum();
            p.pi.iter_mut().for_each(|x| *x /= s);
            reseeded_rounds.push(round);
        }
    }
    ll.push(expectation(&p, ensemble, &mut resp));
    Ok(EmFit { mixture: p.into_mixture()?, log_likelihood: ll, reseeded_rounds })
}
