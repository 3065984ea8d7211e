//! Reachable-set over-approximation through the identified model set.
//!
//! One step maps the current set `R` through every model in the set at
//! once, `M (R x U) (+) Z_w`, so the sequence over-approximates every
//! trajectory of every data-consistent system. Generator order is capped
//! after each step by box-method reduction, which preserves containment.

use std::fmt::Write as _;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::rng;
use crate::sets::{SetError, Zonotope};
use crate::sysid::{ModelSet, SysIdError, TrueSystem};

/// The propagated sets `R_0 .. R_N` plus bookkeeping about generator
/// growth and reduction events.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReachSequence {
    pub sets: Vec<Zonotope>,
    /// Generator count of each set after reduction.
    pub generator_counts: Vec<usize>,
    pub reductions: Vec<ReductionEvent>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ReductionEvent {
    pub step: usize,
    pub from: usize,
    pub to: usize,
}

/// One propagation step `M (R x U) (+) Z_w`.
pub fn reach_step(
    ms: &ModelSet,
    r: &Zonotope,
    u: &Zonotope,
    zw: &Zonotope,
) -> Result<Zonotope, SetError> {
    if r.dim() != ms.n_x || u.dim() != ms.n_u {
        return Err(SetError::DimensionMismatch {
            context: "reach step operands",
            expected: ms.n_x + ms.n_u,
            got: r.dim() + u.dim(),
        });
    }
    let product = r.cartesian_product(u);
    ms.mz.times_zono(&product)?.minkowski_sum(zw)
}

/// Iterates [`reach_step`] from `x0` for `n` steps. `u_sets` holds either a
/// single time-invariant input set or one set per step. Reduction to
/// `max_generators` runs after every step.
pub fn reach_horizon(
    ms: &ModelSet,
    x0: &Zonotope,
    u_sets: &[Zonotope],
    zw: &Zonotope,
    n: usize,
    max_generators: usize,
) -> Result<ReachSequence, SetError> {
    if n > 0 && u_sets.len() != 1 && u_sets.len() != n {
        return Err(SetError::Invalid(format!(
            "need one input set or one per step: got {} for horizon {n}",
            u_sets.len()
        )));
    }
    let mut sets = Vec::with_capacity(n + 1);
    let mut generator_counts = Vec::with_capacity(n + 1);
    let mut reductions = Vec::new();
    sets.push(x0.clone());
    generator_counts.push(x0.num_generators());
    for k in 0..n {
        let u = if u_sets.len() == 1 { &u_sets[0] } else { &u_sets[k] };
        let stepped = reach_step(ms, sets.last().unwrap(), u, zw)?;
        let before = stepped.num_generators();
        let reduced = stepped.reduce_order(max_generators)?;
        if reduced.num_generators() < before {
            reductions.push(ReductionEvent { step: k + 1, from: before, to: reduced.num_generators() });
        }
        generator_counts.push(reduced.num_generators());
        sets.push(reduced);
    }
    Ok(ReachSequence { sets, generator_counts, reductions })
}

impl ReachSequence {
    /// Per-step interval hulls as CSV rows `step,dim,lower,upper`.
    pub fn hull_csv(&self) -> String {
        let mut out = String::from("step,dim,lower,upper\n");
        for (k, set) in self.sets.iter().enumerate() {
            let hull = set.interval_hull();
            for i in 0..hull.dim() {
                let _ = writeln!(out, "{k},{i},{},{}", hull.lower()[i], hull.upper()[i]);
            }
        }
        out
    }
}

/// Exact trajectory sampling of the true system: an under-approximation of
/// the reachable sets, deterministic per seed. Returns one point cloud per
/// step (`n + 1` clouds of `samples` points).
pub fn sample_reachable(
    sys: &TrueSystem,
    x0: &Zonotope,
    u: &Zonotope,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<Vec<DVector<f64>>>, SysIdError> {
    let mut clouds: Vec<Vec<DVector<f64>>> = vec![Vec::with_capacity(samples); n + 1];
    for trial in 0..samples {
        let mut stream = rng::stream(seed, 0x7263_6c64 ^ (trial as u64));
        let start = x0.sample(&mut stream);
        let inputs: Vec<DVector<f64>> = (0..n).map(|_| u.sample(&mut stream)).collect();
        let (states, _) = crate::sysid::simulate(sys, &start, &inputs, seed ^ (trial as u64))?;
        for (k, s) in states.into_iter().enumerate() {
            clouds[k].push(s);
        }
    }
    Ok(clouds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::{IntervalMatrix, MatrixZonotope};
    use nalgebra::{dvector, DMatrix};

    fn singleton_model(a_b: DMatrix<f64>, n_x: usize, n_u: usize, zd: Zonotope) -> ModelSet {
        let mz = MatrixZonotope::singleton(a_b.clone());
        ModelSet {
            a_c: (0..n_x).map(|i| (0..n_x).map(|j| a_b[(i, j)]).collect()).collect(),
            b_c: (0..n_x).map(|i| (0..n_u).map(|j| a_b[(i, n_x + j)]).collect()).collect(),
            interval: IntervalMatrix::new(a_b.clone(), a_b.clone()).unwrap(),
            mz,
            zd,
            n_x,
            n_u,
        }
    }

    #[test]
    fn identity_dynamics_ignore_input() {
        let ab = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let ms = singleton_model(ab, 2, 1, Zonotope::singleton(DVector::zeros(2)));
        let r = Zonotope::from_center_radii(dvector![1.0, -1.0], &[0.5, 0.25]).unwrap();
        let u = Zonotope::from_center_radii(dvector![10.0], &[0.25]).unwrap();
        let zw = Zonotope::singleton(DVector::zeros(2));
        let next = reach_step(&ms, &r, &u, &zw).unwrap();
        assert_eq!(next.interval_hull(), r.interval_hull());
    }

    #[test]
    fn forgetting_dynamics_return_noise_set() {
        let ab = DMatrix::zeros(2, 3);
        let ms = singleton_model(ab, 2, 1, Zonotope::singleton(DVector::zeros(2)));
        let r = Zonotope::from_center_radii(dvector![1.0, -1.0], &[0.5, 0.25]).unwrap();
        let u = Zonotope::from_center_radii(dvector![10.0], &[0.25]).unwrap();
        let zw = Zonotope::from_center_radii(dvector![0.0, 0.0], &[0.01, 0.02]).unwrap();
        let next = reach_step(&ms, &r, &u, &zw).unwrap();
        assert_eq!(next, zw);
    }

    #[test]
    fn zero_horizon_returns_initial_set() {
        let ab = DMatrix::from_row_slice(1, 2, &[0.5, 0.0]);
        let ms = singleton_model(ab, 1, 1, Zonotope::singleton(DVector::zeros(1)));
        let x0 = Zonotope::from_center_radii(dvector![2.0], &[1.0]).unwrap();
        let u = Zonotope::singleton(dvector![0.0]);
        let zw = Zonotope::singleton(DVector::zeros(1));
        let seq = reach_horizon(&ms, &x0, &[u], &zw, 0, 5).unwrap();
        assert_eq!(seq.sets.len(), 1);
        assert_eq!(seq.sets[0], x0);
    }

    #[test]
    fn hull_csv_shape() {
        let ab = DMatrix::from_row_slice(1, 2, &[0.5, 0.0]);
        let ms = singleton_model(ab, 1, 1, Zonotope::singleton(DVector::zeros(1)));
        let x0 = Zonotope::from_center_radii(dvector![2.0], &[1.0]).unwrap();
        let u = Zonotope::singleton(dvector![0.0]);
        let zw = Zonotope::singleton(DVector::zeros(1));
        let seq = reach_horizon(&ms, &x0, &[u], &zw, 3, 5).unwrap();
        let csv = seq.hull_csv();
        assert_eq!(csv.lines().count(), 1 + 4);
        assert!(csv.starts_with("step,dim,lower,upper"));
    }

    #[test]
    fn sampling_identity_dynamics_stays_in_initial_set() {
        let sys = TrueSystem::new(
            DMatrix::identity(2, 2),
            DMatrix::zeros(2, 1),
            Zonotope::singleton(DVector::zeros(2)),
        )
        .unwrap();
        let x0 = Zonotope::from_center_radii(dvector![1.0, 1.0], &[0.1, 0.1]).unwrap();
        let u = Zonotope::singleton(dvector![0.0]);
        let clouds = sample_reachable(&sys, &x0, &u, 4, 50, 3).unwrap();
        assert_eq!(clouds.len(), 5);
        for cloud in &clouds {
            assert_eq!(cloud.len(), 50);
            for p in cloud {
                assert!(x0.interval_hull().contains(p, 1e-12));
            }
        }
        // determinism
        let again = sample_reachable(&sys, &x0, &u, 4, 50, 3).unwrap();
        assert_eq!(clouds, again);
    }
}
