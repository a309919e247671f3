//! Derivative-free minimizers: an adaptive Nelder–Mead simplex search and a
//! golden-section line search.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMead {
    /// Function evaluation budget for one call to [`NelderMead::minimize`].
    pub max_evals: usize,
    /// Convergence threshold on `max f − min f` over the simplex.
    pub fatol: f64,
    /// Convergence threshold on the simplex diameter (∞-norm).
    pub xatol: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self { max_evals: 20_000, fatol: 1e-12, xatol: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub fx: f64,
    pub evals: usize,
    pub converged: bool,
}

impl NelderMead {
    /// Minimizes `f` from `x0` with an axis-aligned initial simplex of edge
    /// `step`. Uses dimension-adaptive coefficients (Gao & Han), which behave
    /// much better than the classic ones beyond a handful of dimensions.
    pub fn minimize<F: FnMut(&[f64]) -> f64>(&self, mut f: F, x0: &[f64], step: f64) -> Minimum {
        let n = x0.len();
        let nf = n as f64;
        let (alpha, beta, gamma, delta) = if n >= 2 {
            (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf)
        } else {
            (1.0, 2.0, 0.5, 0.5)
        };

        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        simplex.push(x0.to_vec());
        for i in 0..n {
            let mut v = x0.to_vec();
            v[i] += if v[i] != 0.0 { step.max(step * v[i].abs()) } else { step };
            simplex.push(v);
        }
        let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
        let mut evals = n + 1;
        let mut order: Vec<usize> = (0..=n).collect();
        let mut centroid = vec![0.0; n];
        let mut trial = vec![0.0; n];
        let mut trial2 = vec![0.0; n];

        let converged = loop {
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            let best = order[0];
            let worst = order[n];
            let spread = values[worst] - values[best];
            let diameter = simplex
                .iter()
                .map(|v| v.iter().zip(&simplex[best]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
                .fold(0.0, f64::max);
            if spread <= self.fatol && diameter <= self.xatol {
                break true;
            }
            if evals >= self.max_evals {
                break false;
            }

            centroid.iter_mut().for_each(|c| *c = 0.0);
            for &i in &order[..n] {
                for (c, x) in centroid.iter_mut().zip(&simplex[i]) {
                    *c += x / nf;
                }
            }
            let second_worst = values[order[n - 1]];

            for k in 0..n {
                trial[k] = centroid[k] + alpha * (centroid[k] - simplex[worst][k]);
            }
            let f_reflect = f(&trial);
            evals += 1;

            if f_reflect < values[best] {
                for k in 0..n {
                    trial2[k] = centroid[k] + beta * (trial[k] - centroid[k]);
                }
                let f_expand = f(&trial2);
                evals += 1;
                if f_expand < f_reflect {
                    simplex[worst].copy_from_slice(&trial2);
                    values[worst] = f_expand;
                } else {
                    simplex[worst].copy_from_slice(&trial);
                    values[worst] = f_reflect;
                }
                continue;
            }
            if f_reflect < second_worst {
                simplex[worst].copy_from_slice(&trial);
                values[worst] = f_reflect;
                continue;
            }

            let outside = f_reflect < values[worst];
            for k in 0..n {
                trial2[k] = if outside {
                    centroid[k] + gamma * (trial[k] - centroid[k])
                } else {
                    centroid[k] - gamma * (centroid[k] - simplex[worst][k])
                };
            }
            let f_contract = f(&trial2);
            evals += 1;
            let accept = if outside { f_contract <= f_reflect } else { f_contract < values[worst] };
            if accept {
                simplex[worst].copy_from_slice(&trial2);
                values[worst] = f_contract;
                continue;
            }

            let anchor = simplex[best].clone();
            for &i in &order[1..] {
                for (x, a) in simplex[i].iter_mut().zip(&anchor) {
                    *x = a + delta * (*x - a);
                }
                values[i] = f(&simplex[i]);
                evals += 1;
            }
        };

        let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
        Minimum { x: simplex[best].clone(), fx: values[best], evals, converged }
    }
}

/// Golden-section search for a minimum of a unimodal `f` on `[lo, hi]`,
/// stopping when the bracket is narrower than `tol`.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Bisection for a sign change of `f` on `[lo, hi]`; `None` without one.
pub fn bisect_root<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Option<f64> {
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return None;
    }
    while b - a > tol {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return Some(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}
