//! Log-barrier interior-point method for
//!
//! ```text
//! maximize    cᵀz
//! subject to  aᵀz ≤ s
//!             Σ q_i(z_i) ≤ P          (q_i convex, increasing, q_i(0) = 0)
//!             0 ≤ z_i ≤ u_i
//! ```
//!
//! Variables are rescaled to `y_i = z_i / u_i ∈ [0, 1]`, the objective to unit
//! max-norm and both coupling constraints to a right-hand side of one. The
//! barrier Hessian is then a positive diagonal plus two rank-one terms, so
//! each Newton step costs O(M).

/// Separable convex power model: `q_i(z)` and its first two derivatives.
pub trait SeparablePower {
    fn dim(&self) -> usize;
    /// Upper bound on the output amplitude of chain `i`.
    fn upper(&self, i: usize) -> f64;
    /// `(q_i(z), q_i'(z), q_i''(z))` for `0 ≤ z < upper(i)`.
    fn eval(&self, i: usize, z: f64) -> (f64, f64, f64);
    /// The `z` with `q_i(z) = power`, capped at `upper(i)`.
    fn output_for_power(&self, i: usize, power: f64) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierSettings {
    pub mu_initial: f64,
    pub mu_factor: f64,
    /// Stop once the duality measure `μ` (average complementarity) is below this.
    pub duality_tolerance: f64,
    pub armijo: f64,
    pub backtrack: f64,
    pub max_newton: usize,
}

impl Default for BarrierSettings {
    fn default() -> Self {
        Self {
            mu_initial: 1.0,
            mu_factor: 0.2,
            duality_tolerance: 1e-9,
            armijo: 0.01,
            backtrack: 0.5,
            max_newton: 2000,
        }
    }
}

const CENTERING_TOL: f64 = 1e-12;
const NEAR_CENTER: f64 = 1e-6;

pub struct Program<'a, S> {
    pub objective: &'a [f64],
    pub interference: &'a [f64],
    pub interference_bound: f64,
    pub power: &'a S,
    pub power_limit: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub z: Vec<f64>,
    pub iterations: usize,
    pub kkt_residual: f64,
    pub converged: bool,
}

// Normalized problem data.
struct Scaled<'a, S> {
    c: Vec<f64>,
    a: Option<Vec<f64>>,
    power: Option<&'a S>,
    upper: Vec<f64>,
    power_limit: f64,
}

struct Eval {
    grad: Vec<f64>,
    diag: Vec<f64>,
    u: Option<Vec<f64>>,
    v: Option<Vec<f64>>,
}

impl<'a, S: SeparablePower> Scaled<'a, S> {
    fn interference_slack(&self, y: &[f64]) -> Option<f64> {
        self.a.as_ref().map(|a| one_minus_dot(a, y))
    }

    // 1 − g(y) together with ∇g, ∇²g (diagonal)
    fn power_terms(&self, y: &[f64]) -> Option<(f64, Vec<f64>, Vec<f64>)> {
        let pw = self.power?;
        let mut q = Vec::with_capacity(y.len());
        let mut d1 = Vec::with_capacity(y.len());
        let mut d2 = Vec::with_capacity(y.len());
        for (i, &yi) in y.iter().enumerate() {
            let u = self.upper[i];
            let (q0, q1, q2) = pw.eval(i, u * yi);
            q.push(q0);
            d1.push(u * q1 / self.power_limit);
            d2.push(u * u * q2 / self.power_limit);
        }
        Some((self.power_slack_of(&q), d1, d2))
    }

    fn strictly_feasible(&self, y: &[f64]) -> bool {
        y.iter().all(|&v| v > 0.0 && v < 1.0)
            && self.interference_slack(y).is_none_or(|s| s > 0.0)
            && self.power_slack(y).is_none_or(|s| s > 0.0)
    }

    fn power_slack(&self, y: &[f64]) -> Option<f64> {
        let pw = self.power?;
        let q: Vec<f64> = y
            .iter()
            .enumerate()
            .map(|(i, &yi)| pw.eval(i, self.upper[i] * yi).0)
            .collect();
        Some(self.power_slack_of(&q))
    }

    // (P − Σq)/P, summed with compensation since the slack may be tiny
    fn power_slack_of(&self, q: &[f64]) -> f64 {
        let (mut sum, mut comp) = (self.power_limit, 0.0);
        for &v in q {
            let (s, e) = two_sum(sum, -v);
            sum = s;
            comp += e;
        }
        (sum + comp) / self.power_limit
    }

    // value(y + t·d) − value(y), evaluated without cancellation
    fn value_change(&self, y: &[f64], d: &[f64], t: f64, mu: f64) -> f64 {
        let mut b = 0.0;
        for (&yi, &di) in y.iter().zip(d) {
            let step = t * di;
            b -= (step / yi).ln_1p() + (-step / (1.0 - yi)).ln_1p();
        }
        if let (Some(a), Some(s)) = (&self.a, self.interference_slack(y)) {
            b -= (-t * dot(a, d) / s).ln_1p();
        }
        if let (Some(pw), Some(s)) = (self.power, self.power_slack(y)) {
            let dg: f64 = y
                .iter()
                .zip(d)
                .enumerate()
                .map(|(i, (&yi, &di))| {
                    let u = self.upper[i];
                    pw.eval(i, u * (yi + t * di)).0 - pw.eval(i, u * yi).0
                })
                .sum();
            b -= (-dg / (self.power_limit * s)).ln_1p();
        }
        -t * dot(&self.c, d) + mu * b
    }

    fn evaluate(&self, y: &[f64], mu: f64) -> Eval {
        let n = y.len();
        let mut grad: Vec<f64> = (0..n)
            .map(|i| -self.c[i] + mu * (-1.0 / y[i] + 1.0 / (1.0 - y[i])))
            .collect();
        let mut diag: Vec<f64> = y
            .iter()
            .map(|&v| mu * (1.0 / (v * v) + 1.0 / ((1.0 - v) * (1.0 - v))))
            .collect();
        let mut u = None;
        if let (Some(a), Some(s)) = (&self.a, self.interference_slack(y)) {
            for i in 0..n {
                grad[i] += mu * a[i] / s;
            }
            let k = mu.sqrt() / s;
            u = Some(a.iter().map(|ai| ai * k).collect());
        }
        let mut v = None;
        if let Some((s, d1, d2)) = self.power_terms(y) {
            for i in 0..n {
                grad[i] += mu * d1[i] / s;
                diag[i] += mu * d2[i] / s;
            }
            let k = mu.sqrt() / s;
            v = Some(d1.iter().map(|d| d * k).collect());
        }
        Eval { grad, diag, u, v }
    }

    // Largest step along d that keeps the linear constraints strictly satisfied.
    fn max_step(&self, y: &[f64], d: &[f64]) -> f64 {
        let mut step = f64::INFINITY;
        for (&yi, &di) in y.iter().zip(d) {
            if di < 0.0 {
                step = step.min(yi / -di);
            } else if di > 0.0 {
                step = step.min((1.0 - yi) / di);
            }
        }
        if let (Some(a), Some(s)) = (&self.a, self.interference_slack(y)) {
            let ad = dot(a, d);
            if ad > 0.0 {
                step = step.min(s / ad);
            }
        }
        step
    }

    // Max-norm violation of the KKT conditions with multipliers μ/slack. Each
    // stationarity component is measured relative to the size of the terms
    // that must cancel in it (at least one, the scale of the objective).
    fn kkt_residual(&self, y: &[f64], mu: f64) -> f64 {
        let n = y.len();
        let mut station: Vec<f64> = (0..n)
            .map(|i| -self.c[i] - mu / y[i] + mu / (1.0 - y[i]))
            .collect();
        let mut scale: Vec<f64> = (0..n)
            .map(|i| 1f64.max(self.c[i].abs() + mu / y[i] + mu / (1.0 - y[i])))
            .collect();
        let mut primal: f64 = 0.0;
        for &v in y {
            primal = primal.max(-v).max(v - 1.0);
        }
        if let (Some(a), Some(s)) = (&self.a, self.interference_slack(y)) {
            let lambda = mu / s;
            for i in 0..n {
                station[i] += lambda * a[i];
                scale[i] += lambda * a[i].abs();
            }
            primal = primal.max(-s);
        }
        if let Some((s, d1, _)) = self.power_terms(y) {
            let lambda = mu / s;
            for i in 0..n {
                station[i] += lambda * d1[i];
                scale[i] += lambda * d1[i].abs();
            }
            primal = primal.max(-s);
        }
        let worst = station
            .iter()
            .zip(&scale)
            .fold(0f64, |w, (r, s)| w.max(r.abs() / s));
        // complementarity λ·slack equals μ for every constraint by construction
        worst.max(mu).max(primal)
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

// 1 − aᵀy as if evaluated in twice the working precision.
fn one_minus_dot(a: &[f64], y: &[f64]) -> f64 {
    let (mut sum, mut comp) = (1.0, 0.0);
    for (&a, &y) in a.iter().zip(y) {
        let p = -a * y;
        let p_err = (-a).mul_add(y, -p);
        let (s, e) = two_sum(sum, p);
        sum = s;
        comp += e + p_err;
    }
    sum + comp
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// Householder reflector `I − 2wwᵀ/(wᵀw)` acting on rows `from..`.
struct Reflector {
    from: usize,
    w: Vec<f64>,
    ww: f64,
}

impl Reflector {
    // Maps x[from..] onto a multiple of e_from; returns the reflector and that multiple.
    fn annihilate(x: &[f64], from: usize) -> (Option<Self>, f64) {
        let tail = &x[from..];
        let norm = tail.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return (None, 0.0);
        }
        let alpha = if tail[0] >= 0.0 { -norm } else { norm };
        let mut w = tail.to_vec();
        w[0] -= alpha;
        let ww = dot(&w, &w);
        if ww == 0.0 {
            return (None, alpha);
        }
        (Some(Self { from, w, ww }), alpha)
    }

    fn apply(&self, x: &mut [f64]) {
        let tail = &mut x[self.from..];
        let k = 2.0 * dot(&self.w, tail) / self.ww;
        for (t, w) in tail.iter_mut().zip(&self.w) {
            *t -= k * w;
        }
    }
}

// Solves (D + u uᵀ + v vᵀ) x = rhs.
//
// With D = S², the system is S(I + ŨŨᵀ)S x = rhs where Ũ = S⁻¹[u v]. A
// Householder QR of Ũ reduces I + ŨŨᵀ to identity outside a k×k block, which
// avoids the cancellation of the plain low-rank update formula when some
// diagonal entries are tiny next to the rank-one terms.
fn low_rank_solve(diag: &[f64], u: Option<&[f64]>, v: Option<&[f64]>, rhs: &[f64]) -> Vec<f64> {
    if rhs.len() == 1 {
        let h = diag[0] + u.map_or(0.0, |u| u[0] * u[0]) + v.map_or(0.0, |v| v[0] * v[0]);
        return vec![rhs[0] / h];
    }
    let sd: Vec<f64> = diag.iter().map(|d| d.sqrt()).collect();
    let mut b: Vec<f64> = rhs.iter().zip(&sd).map(|(r, s)| r / s).collect();
    let mut cols: Vec<Vec<f64>> = [u, v]
        .into_iter()
        .flatten()
        .map(|c| c.iter().zip(&sd).map(|(c, s)| c / s).collect())
        .collect();
    let k = cols.len();

    // R is upper triangular, k ≤ 2
    let mut r = [[0.0; 2]; 2];
    let mut reflectors = Vec::with_capacity(k);
    for j in 0..k {
        let (h, alpha) = Reflector::annihilate(&cols[j], j);
        r[j][j] = alpha;
        if let Some(h) = h {
            for c in cols.iter_mut().skip(j + 1) {
                h.apply(c);
            }
            h.apply(&mut b);
            reflectors.push(h);
        }
        for (l, c) in cols.iter().enumerate().skip(j + 1) {
            r[j][l] = c[j];
        }
    }

    // (I + RRᵀ) c = b[..k]
    match k {
        0 => {}
        1 => b[0] /= 1.0 + r[0][0] * r[0][0],
        _ => {
            let (r00, r01, r11) = (r[0][0], r[0][1], r[1][1]);
            let m00 = 1.0 + r00 * r00 + r01 * r01;
            let m01 = r01 * r11;
            let m11 = 1.0 + r11 * r11;
            let det = (1.0 + r00 * r00) * m11 + r01 * r01;
            let (b0, b1) = (b[0], b[1]);
            b[0] = (m11 * b0 - m01 * b1) / det;
            b[1] = (m00 * b1 - m01 * b0) / det;
        }
    }
    for h in reflectors.iter().rev() {
        h.apply(&mut b);
    }
    b.iter().zip(&sd).map(|(x, s)| x / s).collect()
}

/// Runs the barrier method. Inputs are assumed valid: positive bound and
/// limit, non-negative vectors of equal length.
pub fn solve<S: SeparablePower>(program: &Program<'_, S>, settings: &BarrierSettings) -> Outcome {
    let n = program.power.dim();
    let upper: Vec<f64> = (0..n).map(|i| program.power.upper(i)).collect();

    let c_raw: Vec<f64> = program
        .objective
        .iter()
        .zip(&upper)
        .map(|(c, u)| c * u)
        .collect();
    let c_scale = c_raw.iter().cloned().fold(0.0, f64::max);
    if c_scale <= 0.0 {
        // objective identically zero: the origin is optimal
        return Outcome {
            z: vec![0.0; n],
            iterations: 0,
            kkt_residual: 0.0,
            converged: true,
        };
    }
    let c: Vec<f64> = c_raw.iter().map(|c| c / c_scale).collect();

    let a: Vec<f64> = program
        .interference
        .iter()
        .zip(&upper)
        .map(|(a, u)| a * u / program.interference_bound)
        .collect();
    // drop constraints that cannot bind anywhere on the box
    let a = (a.iter().sum::<f64>() > 1.0).then_some(a);
    let full_power: f64 = (0..n).map(|i| program.power.eval(i, upper[i]).0).sum();
    let power = (full_power > program.power_limit).then_some(program.power);

    let scaled = Scaled {
        c,
        a,
        power,
        upper: upper.clone(),
        power_limit: program.power_limit,
    };

    let a_max = program.interference.iter().cloned().fold(0.0, f64::max);
    let mut y: Vec<f64> = (0..n)
        .map(|i| {
            let by_interference = if a_max > 0.0 {
                program.interference_bound / (n as f64 * a_max)
            } else {
                f64::INFINITY
            };
            let by_power = program
                .power
                .output_for_power(i, program.power_limit / n as f64);
            0.25 * (upper[i].min(by_interference).min(by_power) / upper[i])
        })
        .collect();
    debug_assert!(scaled.strictly_feasible(&y));

    let mut mu = settings.mu_initial;
    let mut iterations = 0;
    let mut converged = false;

    'outer: loop {
        // centering
        let mut previous = f64::INFINITY;
        loop {
            if iterations >= settings.max_newton {
                break 'outer;
            }
            let e = scaled.evaluate(&y, mu);
            let rhs: Vec<f64> = e.grad.iter().map(|g| -g).collect();
            let d = low_rank_solve(&e.diag, e.u.as_deref(), e.v.as_deref(), &rhs);
            // squared Newton decrement of the 1/μ-scaled barrier problem
            let decrement = -dot(&e.grad, &d) / mu;
            let near = decrement < NEAR_CENTER;
            // inside the quadratic region the decrement must keep shrinking;
            // once it does not, rounding dominates
            if !(decrement > CENTERING_TOL) || (near && decrement >= previous) {
                break;
            }
            previous = if near { decrement } else { f64::INFINITY };
            iterations += 1;

            let mut step = (0.99 * scaled.max_step(&y, &d)).min(1.0);
            let slope = dot(&e.grad, &d);
            let mut accepted = false;
            while step > 1e-20 {
                let trial: Vec<f64> = y.iter().zip(&d).map(|(y, d)| y + step * d).collect();
                // Function-value differences drown in rounding near the
                // center, where full Newton steps need only stay feasible.
                if scaled.strictly_feasible(&trial)
                    && (near
                        || scaled.value_change(&y, &d, step, mu) <= settings.armijo * step * slope)
                {
                    accepted = true;
                    break;
                }
                step *= settings.backtrack;
            }
            if !accepted {
                break;
            }
            let stalled = y
                .iter()
                .zip(&d)
                .all(|(y, d)| (step * d).abs() <= 4.0 * f64::EPSILON * y.abs());
            for (y, d) in y.iter_mut().zip(&d) {
                *y += step * d;
            }
            if stalled {
                break;
            }
        }
        if mu <= settings.duality_tolerance {
            converged = true;
            break;
        }
        mu *= settings.mu_factor;
    }

    let kkt_residual = scaled.kkt_residual(&y, mu);
    Outcome {
        z: y.iter().zip(&upper).map(|(y, u)| y * u).collect(),
        iterations,
        kkt_residual,
        converged,
    }
}
