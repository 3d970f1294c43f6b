//! Damped Gauss-Newton (Levenberg-style) least squares.
//!
//! Jacobians are forward finite differences; the damping multiplies the
//! diagonal of JᵀJ and is raised tenfold on rejected steps, lowered tenfold
//! on accepted ones. The accepted objective sequence is therefore
//! monotonically decreasing by construction. Parameter covariance comes from
//! (JᵀJ)⁻¹ at the optimum scaled by the reduced χ².

use super::FitError;

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Converged when the accepted objective improves by less than this
    /// relative amount.
    pub rel_tolerance: f64,
    pub initial_damping: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { max_iterations: 200, rel_tolerance: 1e-9, initial_damping: 1e-3 }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub params: Vec<f64>,
    pub rss: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Full covariance in the original parameter order; rows/columns of
    /// fixed parameters are zero.
    pub covariance: Vec<Vec<f64>>,
    /// Accepted objective values, starting with the initial one.
    pub objective_history: Vec<f64>,
}

fn rss_of(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

/// Solve the symmetric positive-definite system `a·x = b` by Cholesky.
fn solve_spd(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    // Forward then backward substitution.
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i][k] * y[k];
        }
        y[i] = sum / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in i + 1..n {
            sum -= l[k][i] * x[k];
        }
        x[i] = sum / l[i][i];
    }
    Some(x)
}

fn invert_spd(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut inv = vec![vec![0.0; n]; n];
    for col in 0..n {
        let mut e = vec![0.0; n];
        e[col] = 1.0;
        let x = solve_spd(a, &e)?;
        for row in 0..n {
            inv[row][col] = x[row];
        }
    }
    Some(inv)
}

/// Minimize the sum of squared residuals over the `free` subset of
/// parameters.
pub fn minimize<F>(
    initial: &[f64],
    free: &[bool],
    residual_fn: F,
    opts: &FitOptions,
) -> Result<Minimum, FitError>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    assert_eq!(initial.len(), free.len());
    let free_idx: Vec<usize> = (0..free.len()).filter(|&i| free[i]).collect();
    let k = free_idx.len();

    let mut params = initial.to_vec();
    let mut resid = residual_fn(&params);
    if resid.iter().any(|r| !r.is_finite()) {
        return Err(FitError::NumericalFailure("residuals not finite at the initial point".into()));
    }
    let m = resid.len();
    if k == 0 {
        return Ok(Minimum {
            params,
            rss: rss_of(&resid),
            iterations: 0,
            converged: true,
            covariance: vec![vec![0.0; free.len()]; free.len()],
            objective_history: vec![rss_of(&resid)],
        });
    }
    if m < k {
        return Err(FitError::BadInput(format!("{m} residuals cannot constrain {k} parameters")));
    }

    let jacobian = |p: &[f64], r0: &[f64]| -> Vec<Vec<f64>> {
        // Column-major: one column per free parameter.
        let mut cols = Vec::with_capacity(k);
        for &j in &free_idx {
            let h = 1e-6 * p[j].abs().max(1e-6);
            let mut p_step = p.to_vec();
            p_step[j] += h;
            let r_step = residual_fn(&p_step);
            cols.push(r_step.iter().zip(r0).map(|(a, b)| (a - b) / h).collect::<Vec<f64>>());
        }
        cols
    };

    let mut rss = rss_of(&resid);
    let mut damping = opts.initial_damping;
    let mut history = vec![rss];
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..opts.max_iterations {
        iterations += 1;
        let jcols = jacobian(&params, &resid);
        // Normal equations on the free subset.
        let mut jtj = vec![vec![0.0; k]; k];
        let mut jtr = vec![0.0; k];
        for i in 0..k {
            for j in 0..=i {
                let dot: f64 = jcols[i].iter().zip(&jcols[j]).map(|(a, b)| a * b).sum();
                jtj[i][j] = dot;
                jtj[j][i] = dot;
            }
            jtr[i] = jcols[i].iter().zip(&resid).map(|(a, b)| a * b).sum();
        }

        let mut accepted = false;
        for _ in 0..40 {
            let mut damped = jtj.clone();
            for i in 0..k {
                damped[i][i] += damping * jtj[i][i].max(1e-12);
            }
            let neg_g: Vec<f64> = jtr.iter().map(|g| -g).collect();
            let step = match solve_spd(&damped, &neg_g) {
                Some(s) => s,
                None => {
                    damping *= 10.0;
                    continue;
                }
            };
            let mut trial = params.clone();
            for (slot, &j) in step.iter().zip(&free_idx) {
                trial[j] += slot;
            }
            let r_trial = residual_fn(&trial);
            let rss_trial = rss_of(&r_trial);
            if rss_trial.is_finite() && rss_trial < rss {
                params = trial;
                resid = r_trial;
                let improvement = (rss - rss_trial) / rss.max(1e-300);
                rss = rss_trial;
                history.push(rss);
                damping = (damping / 10.0).max(1e-14);
                accepted = true;
                if improvement < opts.rel_tolerance {
                    converged = true;
                }
                break;
            }
            damping *= 10.0;
            if damping > 1e14 {
                break;
            }
        }
        if !accepted {
            // No downhill step found: treat as converged-in-place when the
            // gradient is already tiny, otherwise report non-convergence.
            let gnorm: f64 = jtr.iter().map(|g| g * g).sum::<f64>().sqrt();
            converged = gnorm <= 1e-8 * (1.0 + rss);
            break;
        }
        if converged {
            break;
        }
    }

    // Covariance at the optimum, scaled by reduced χ².
    let jcols = jacobian(&params, &resid);
    let mut jtj = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..=i {
            let dot: f64 = jcols[i].iter().zip(&jcols[j]).map(|(a, b)| a * b).sum();
            jtj[i][j] = dot;
            jtj[j][i] = dot;
        }
    }
    let scale = if m > k { rss / (m - k) as f64 } else { 1.0 };
    let mut ridge = 0.0;
    let cov_free = loop {
        let mut a = jtj.clone();
        if ridge > 0.0 {
            for i in 0..k {
                a[i][i] += ridge;
            }
        }
        if let Some(inv) = invert_spd(&a) {
            break inv;
        }
        let diag_max = jtj.iter().enumerate().map(|(i, row)| row[i]).fold(1e-300, f64::max);
        ridge = if ridge == 0.0 { 1e-12 * diag_max } else { ridge * 100.0 };
        if ridge > 1e6 * diag_max {
            break vec![vec![f64::NAN; k]; k];
        }
    };

    let n_all = free.len();
    let mut covariance = vec![vec![0.0; n_all]; n_all];
    for (ii, &i_all) in free_idx.iter().enumerate() {
        for (jj, &j_all) in free_idx.iter().enumerate() {
            covariance[i_all][j_all] = cov_free[ii][jj] * scale;
        }
    }

    Ok(Minimum { params, rss, iterations, converged, covariance, objective_history: history })
}
