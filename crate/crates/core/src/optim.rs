//! Derivative-free simplex minimizer used by the fitting module.

use crate::scalar::{lit, lit_usize, Float};

/// Outcome of one Nelder-Mead run.
#[derive(Debug, Clone)]
pub struct MinimizeResult<T> {
    pub x: Vec<T>,
    pub fx: T,
    pub iterations: usize,
    pub converged: bool,
}

/// Classic Nelder-Mead with reflection/expansion/contraction/shrink.
///
/// Converges when the simplex diameter drops below `tol_rel` relative to the
/// best vertex. Fully deterministic: ties in vertex ordering are broken by
/// insertion order.
pub fn nelder_mead<T: Float>(
    f: &mut dyn FnMut(&[T]) -> T,
    x0: &[T],
    initial_step: &[T],
    tol_rel: T,
    max_iter: usize,
) -> MinimizeResult<T> {
    let n = x0.len();
    assert_eq!(initial_step.len(), n);
    let alpha = T::one(); // reflection
    let gamma = lit::<T>(2.0); // expansion
    let rho = lit::<T>(0.5); // contraction
    let sigma = lit::<T>(0.5); // shrink

    let mut simplex: Vec<(Vec<T>, T)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for d in 0..n {
        let mut x = x0.to_vec();
        let step = if initial_step[d] != T::zero() {
            initial_step[d]
        } else {
            lit(1e-3)
        };
        x[d] += step;
        let fx = f(&x);
        simplex.push((x, fx));
    }

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));

        // Relative simplex diameter against the best vertex.
        let best = &simplex[0].0;
        let mut diameter = T::zero();
        for (x, _) in simplex.iter().skip(1) {
            for d in 0..n {
                let denom = T::one().max(best[d].abs());
                diameter = diameter.max((x[d] - best[d]).abs() / denom);
            }
        }
        if diameter < tol_rel {
            converged = true;
            break;
        }

        // Centroid of all but the worst vertex.
        let mut centroid = vec![T::zero(); n];
        for (x, _) in simplex.iter().take(n) {
            for d in 0..n {
                centroid[d] += x[d];
            }
        }
        let inv = T::one() / lit_usize::<T>(n);
        for c in centroid.iter_mut() {
            *c *= inv;
        }

        let worst = simplex[n].clone();
        let second_worst_f = simplex[n - 1].1;
        let best_f = simplex[0].1;

        let blend = |a: &[T], b: &[T], coeff: T| -> Vec<T> {
            a.iter()
                .zip(b.iter())
                .map(|(&ca, &cb)| ca + coeff * (ca - cb))
                .collect()
        };

        let reflected = blend(&centroid, &worst.0, alpha);
        let f_ref = f(&reflected);

        if f_ref < best_f {
            let expanded = blend(&centroid, &worst.0, gamma);
            let f_exp = f(&expanded);
            simplex[n] = if f_exp < f_ref {
                (expanded, f_exp)
            } else {
                (reflected, f_ref)
            };
        } else if f_ref < second_worst_f {
            simplex[n] = (reflected, f_ref);
        } else {
            let contracted = if f_ref < worst.1 {
                blend(&centroid, &worst.0, rho) // outside contraction
            } else {
                blend(&centroid, &worst.0, -rho) // inside contraction
            };
            let f_con = f(&contracted);
            if f_con < worst.1.min(f_ref) {
                simplex[n] = (contracted, f_con);
            } else {
                // Shrink toward the best vertex.
                let best_x = simplex[0].0.clone();
                for (x, fx) in simplex.iter_mut().skip(1) {
                    for d in 0..n {
                        x[d] = best_x[d] + sigma * (x[d] - best_x[d]);
                    }
                    *fx = f(x);
                }
            }
        }
    }

    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    let (x, fx) = simplex.swap_remove(0);
    MinimizeResult {
        x,
        fx,
        iterations,
        converged,
    }
}
