//! Derivative-free simplex minimization.

/// Nelder–Mead settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMead {
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    pub max_iterations: usize,
    /// Stop once every vertex is within this distance of the best one.
    pub tolerance: f64,
    /// Edge length of the initial axis-aligned simplex.
    pub initial_step: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead {
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            max_iterations: 2000,
            tolerance: 1e-7,
            initial_step: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

fn diameter(simplex: &[Vec<f64>]) -> f64 {
    simplex[1..]
        .iter()
        .map(|p| p.iter().zip(&simplex[0]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

impl NelderMead {
    pub fn minimize<F: FnMut(&[f64]) -> f64>(&self, mut f: F, x0: &[f64]) -> Minimum {
        let n = x0.len();
        let mut eval = |x: &[f64]| sanitize(f(x));
        if n == 0 {
            return Minimum { x: vec![], value: eval(&[]), iterations: 0, converged: true };
        }
        let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
        for j in 0..n {
            let mut p = x0.to_vec();
            p[j] += self.initial_step;
            simplex.push(p);
        }
        let mut values: Vec<f64> = simplex.iter().map(|p| eval(p)).collect();
        let mut iterations = 0;
        let mut converged = false;

        let point =
            |c: &[f64], p: &[f64], t: f64| -> Vec<f64> { c.iter().zip(p).map(|(c, p)| c + t * (p - c)).collect() };

        while iterations < self.max_iterations {
            // order vertices by value, ties by position for determinism
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();
            if diameter(&simplex) < self.tolerance {
                converged = true;
                break;
            }
            iterations += 1;

            let mut centroid = vec![0.0; n];
            for p in &simplex[..n] {
                for (c, v) in centroid.iter_mut().zip(p) {
                    *c += v / n as f64;
                }
            }
            let worst = simplex[n].clone();
            let xr = point(&centroid, &worst, -self.reflection);
            let fr = eval(&xr);
            if fr < values[0] {
                let xe = point(&centroid, &worst, -self.reflection * self.expansion);
                let fe = eval(&xe);
                if fe < fr {
                    simplex[n] = xe;
                    values[n] = fe;
                } else {
                    simplex[n] = xr;
                    values[n] = fr;
                }
                continue;
            }
            if fr < values[n - 1] {
                simplex[n] = xr;
                values[n] = fr;
                continue;
            }
            // outside contraction towards the reflected point, inside towards the worst
            let (xc, limit) = if fr < values[n] {
                (point(&centroid, &xr, self.contraction), fr)
            } else {
                (point(&centroid, &worst, self.contraction), values[n])
            };
            let fc = eval(&xc);
            if fc < limit {
                simplex[n] = xc;
                values[n] = fc;
                continue;
            }
            let best = simplex[0].clone();
            for j in 1..=n {
                simplex[j] = point(&best, &simplex[j], self.shrink);
                values[j] = eval(&simplex[j]);
            }
        }
        let (mut bi, mut bv) = (0, values[0]);
        for (i, v) in values.iter().enumerate() {
            if *v < bv {
                bi = i;
                bv = *v;
            }
        }
        Minimum { x: simplex[bi].clone(), value: bv, iterations, converged }
    }
}
