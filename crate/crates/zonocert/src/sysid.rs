//! Ground-truth simulation, data-matrix assembly, and matrix-zonotope
//! model-set identification.
//!
//! The identified set `(X+ (+) -Mw) D-^+` contains every pair `[A B]`
//! consistent with the recorded data and the noise bound; its center is the
//! least-squares nominal model and its generators carry the noise
//! uncertainty through the data pseudoinverse.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng;
use crate::sets::{IntervalMatrix, MatrixZonotope, SetError, Zonotope};

#[derive(Debug, Error)]
pub enum SysIdError {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch { context: &'static str, expected: usize, got: usize },
    #[error("noise bound must contain the origin")]
    NoiseExcludesOrigin,
    #[error("no trajectories supplied")]
    EmptyData,
    #[error("trajectory {index} has {states} states for {inputs} inputs; need one more state than inputs")]
    TrajectoryLength { index: usize, states: usize, inputs: usize },
    #[error("data matrix is rank deficient: rank {rank} < {required}; singular values {singular_values:?}")]
    RankDeficient { rank: usize, required: usize, singular_values: Vec<f64> },
    #[error("set error: {0}")]
    Set(#[from] SetError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Invalid(String),
}

/// The simulated ground truth: known only to the simulator and the
/// a-posteriori checker, never to identification or synthesis.
#[derive(Clone, Debug)]
pub struct TrueSystem {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    noise: Zonotope,
}

impl TrueSystem {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, noise: Zonotope) -> Result<Self, SysIdError> {
        if a.nrows() != a.ncols() {
            return Err(SysIdError::DimensionMismatch {
                context: "state matrix",
                expected: a.nrows(),
                got: a.ncols(),
            });
        }
        if b.nrows() != a.nrows() {
            return Err(SysIdError::DimensionMismatch {
                context: "input matrix rows",
                expected: a.nrows(),
                got: b.nrows(),
            });
        }
        if noise.dim() != a.nrows() {
            return Err(SysIdError::DimensionMismatch {
                context: "noise bound",
                expected: a.nrows(),
                got: noise.dim(),
            });
        }
        let origin = DVector::zeros(noise.dim());
        if !noise.contains_point(&origin)?.is_inside() {
            return Err(SysIdError::NoiseExcludesOrigin);
        }
        Ok(Self { a, b, noise })
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn noise_bound(&self) -> &Zonotope {
        &self.noise
    }

    /// Stacked `[A B]`.
    pub fn combined(&self) -> DMatrix<f64> {
        let n = self.state_dim();
        let m = self.input_dim();
        let mut c = DMatrix::zeros(n, n + m);
        c.view_mut((0, 0), (n, n)).copy_from(&self.a);
        c.view_mut((0, n), (n, m)).copy_from(&self.b);
        c
    }

    /// One noiseless transition `A x + B u`.
    pub fn step(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        &self.a * x + &self.b * u
    }
}

/// Simulates `x+ = A x + B u + w` with noise coefficients drawn i.i.d.
/// uniform on `[-1,1]` from a stream seeded by `seed`. Returns the state
/// sequence (`inputs.len() + 1` long) and the realized noise sequence.
pub fn simulate(
    sys: &TrueSystem,
    x0: &DVector<f64>,
    inputs: &[DVector<f64>],
    seed: u64,
) -> Result<(Vec<DVector<f64>>, Vec<DVector<f64>>), SysIdError> {
    if x0.len() != sys.state_dim() {
        return Err(SysIdError::DimensionMismatch {
            context: "initial state",
            expected: sys.state_dim(),
            got: x0.len(),
        });
    }
    for u in inputs {
        if u.len() != sys.input_dim() {
            return Err(SysIdError::DimensionMismatch {
                context: "input vector",
                expected: sys.input_dim(),
                got: u.len(),
            });
        }
    }
    let mut stream = rng::stream(seed, 0x6e6f_6973);
    let mut states = Vec::with_capacity(inputs.len() + 1);
    let mut noises = Vec::with_capacity(inputs.len());
    states.push(x0.clone());
    for u in inputs {
        let w = sys.noise.sample(&mut stream);
        let next = sys.step(states.last().unwrap(), u) + &w;
        states.push(next);
        noises.push(w);
    }
    Ok((states, noises))
}

/// Input-state data in shifted matrix form. Columns are time steps,
/// concatenated across trajectories.
#[derive(Clone, Debug)]
pub struct DataSet {
    x_plus: DMatrix<f64>,
    x_minus: DMatrix<f64>,
    u_minus: DMatrix<f64>,
    /// Starting column of each trajectory.
    boundaries: Vec<usize>,
    pub rng_seed: u64,
}

impl DataSet {
    /// Collects `(states, inputs)` trajectories into the shifted data
    /// matrices. Each state sequence must be one longer than its inputs.
    pub fn assemble(
        trajectories: &[(Vec<DVector<f64>>, Vec<DVector<f64>>)],
        rng_seed: u64,
    ) -> Result<Self, SysIdError> {
        if trajectories.is_empty() {
            return Err(SysIdError::EmptyData);
        }
        let mut total = 0;
        for (i, (states, inputs)) in trajectories.iter().enumerate() {
            if states.len() != inputs.len() + 1 {
                return Err(SysIdError::TrajectoryLength {
                    index: i,
                    states: states.len(),
                    inputs: inputs.len(),
                });
            }
            total += inputs.len();
        }
        if total == 0 {
            return Err(SysIdError::EmptyData);
        }
        let n_x = trajectories[0].0[0].len();
        let n_u = trajectories[0].1.first().map(|u| u.len()).unwrap_or(0);
        let mut x_plus = DMatrix::zeros(n_x, total);
        let mut x_minus = DMatrix::zeros(n_x, total);
        let mut u_minus = DMatrix::zeros(n_u, total);
        let mut boundaries = Vec::with_capacity(trajectories.len());
        let mut col = 0;
        for (states, inputs) in trajectories {
            boundaries.push(col);
            for k in 0..inputs.len() {
                if states[k].len() != n_x || inputs[k].len() != n_u {
                    return Err(SysIdError::DimensionMismatch {
                        context: "trajectory columns",
                        expected: n_x,
                        got: states[k].len(),
                    });
                }
                x_minus.set_column(col, &states[k]);
                x_plus.set_column(col, &states[k + 1]);
                u_minus.set_column(col, &inputs[k]);
                col += 1;
            }
        }
        Ok(Self { x_plus, x_minus, u_minus, boundaries, rng_seed })
    }

    pub fn len(&self) -> usize {
        self.x_plus.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn state_dim(&self) -> usize {
        self.x_plus.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.u_minus.nrows()
    }

    pub fn x_plus(&self) -> &DMatrix<f64> {
        &self.x_plus
    }

    pub fn x_minus(&self) -> &DMatrix<f64> {
        &self.x_minus
    }

    pub fn u_minus(&self) -> &DMatrix<f64> {
        &self.u_minus
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    /// `D- = [X-; U-]`, the regressor matrix.
    pub fn d_minus(&self) -> DMatrix<f64> {
        let n = self.state_dim();
        let m = self.input_dim();
        let t = self.len();
        let mut d = DMatrix::zeros(n + m, t);
        d.view_mut((0, 0), (n, t)).copy_from(&self.x_minus);
        d.view_mut((n, 0), (m, t)).copy_from(&self.u_minus);
        d
    }

    /// Writes `x_plus.csv`, `x_minus.csv`, `u_minus.csv` (columns = time)
    /// and a JSON manifest with dimensions, seed, and boundaries.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<(), SysIdError> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        write_matrix_csv(&self.x_plus, &dir.join("x_plus.csv"))?;
        write_matrix_csv(&self.x_minus, &dir.join("x_minus.csv"))?;
        write_matrix_csv(&self.u_minus, &dir.join("u_minus.csv"))?;
        let manifest = DataManifest {
            state_dim: self.state_dim(),
            input_dim: self.input_dim(),
            samples: self.len(),
            rng_seed: self.rng_seed,
            trajectory_boundaries: self.boundaries.clone(),
        };
        std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self, SysIdError> {
        let dir = dir.as_ref();
        let manifest: DataManifest =
            serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json"))?)
                .map_err(|e| SysIdError::Invalid(format!("bad manifest: {e}")))?;
        let x_plus = read_matrix_csv(&dir.join("x_plus.csv"))?;
        let x_minus = read_matrix_csv(&dir.join("x_minus.csv"))?;
        let u_minus = read_matrix_csv(&dir.join("u_minus.csv"))?;
        if x_plus.nrows() != manifest.state_dim
            || x_plus.ncols() != manifest.samples
            || x_minus.shape() != x_plus.shape()
            || u_minus.ncols() != manifest.samples
        {
            return Err(SysIdError::Invalid("csv shapes disagree with manifest".into()));
        }
        Ok(Self {
            x_plus,
            x_minus,
            u_minus,
            boundaries: manifest.trajectory_boundaries,
            rng_seed: manifest.rng_seed,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct DataManifest {
    state_dim: usize,
    input_dim: usize,
    samples: usize,
    rng_seed: u64,
    trajectory_boundaries: Vec<usize>,
}

fn write_matrix_csv(m: &DMatrix<f64>, path: &Path) -> Result<(), SysIdError> {
    let mut out = String::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{:.17e}", m[(i, j)]);
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn read_matrix_csv(path: &Path) -> Result<DMatrix<f64>, SysIdError> {
    let text = std::fs::read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| SysIdError::Invalid(format!("bad csv value: {e}")))?;
        rows.push(row);
    }
    let nr = rows.len();
    let nc = rows.first().map(Vec::len).unwrap_or(0);
    if rows.iter().any(|r| r.len() != nc) {
        return Err(SysIdError::Invalid("ragged csv".into()));
    }
    Ok(DMatrix::from_fn(nr, nc, |i, j| rows[i][j]))
}

/// Rank report for the regressor matrix `D-`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RankReport {
    pub full_row_rank: bool,
    pub rank: usize,
    pub required: usize,
    pub singular_values: Vec<f64>,
}

/// Decides whether `D-` has full row rank `n_x + n_u`, via singular values
/// above `1e-10 * sigma_max`.
pub fn check_rank(ds: &DataSet) -> RankReport {
    let d = ds.d_minus();
    let required = d.nrows();
    let svals = singular_values(&d);
    let smax = svals.first().copied().unwrap_or(0.0);
    let rank = svals.iter().filter(|&&s| s > 1e-10 * smax && s > 0.0).count();
    RankReport { full_row_rank: rank == required, rank, required, singular_values: svals }
}

fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

/// Moore-Penrose pseudoinverse `D' (D D')^{-1}` of a full-row-rank matrix.
/// Uses normal equations with a Cholesky factorization while the condition
/// estimate stays below `1e8`, falling back to the SVD otherwise.
pub fn pseudoinverse(d: &DMatrix<f64>) -> Result<DMatrix<f64>, SysIdError> {
    let svals = singular_values(d);
    let smax = svals.first().copied().unwrap_or(0.0);
    let smin = svals.last().copied().unwrap_or(0.0);
    let rank = svals.iter().filter(|&&s| s > 1e-10 * smax && s > 0.0).count();
    if rank < d.nrows() {
        return Err(SysIdError::RankDeficient {
            rank,
            required: d.nrows(),
            singular_values: svals,
        });
    }
    let cond = smax / smin;
    if cond < 1e8 {
        let ddt = d * d.transpose();
        if let Some(chol) = ddt.cholesky() {
            let inv = chol.inverse();
            return Ok(d.transpose() * inv);
        }
    }
    // robust fallback
    let svd = d.clone().svd(true, true);
    let pinv = svd
        .pseudo_inverse(1e-10 * smax)
        .map_err(|e| SysIdError::Invalid(format!("svd pseudoinverse failed: {e}")))?;
    Ok(pinv)
}

/// The matrix zonotope of all noise matrices whose columns each lie in
/// `Z_w`: center `[c_w ... c_w]`, one generator per (noise generator,
/// column) pair.
pub fn noise_matrix_zonotope(zw: &Zonotope, t: usize) -> MatrixZonotope {
    assert!(t >= 1, "need at least one column");
    let n = zw.dim();
    let mut center = DMatrix::zeros(n, t);
    for k in 0..t {
        center.set_column(k, zw.center());
    }
    let mut gens = Vec::with_capacity(zw.num_generators() * t);
    for i in 0..zw.num_generators() {
        for k in 0..t {
            let mut g = DMatrix::zeros(n, t);
            g.set_column(k, &zw.generators().column(i));
            gens.push(g);
        }
    }
    MatrixZonotope::new(center, gens).expect("noise matrix zonotope is valid")
}

/// The identified model set: matrix zonotope, nominal center split,
/// interval hull, and the matched disturbance zonotope.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelSet {
    pub mz: MatrixZonotope,
    pub a_c: Vec<Vec<f64>>,
    pub b_c: Vec<Vec<f64>>,
    pub interval: IntervalMatrix,
    pub zd: Zonotope,
    pub n_x: usize,
    pub n_u: usize,
}

impl ModelSet {
    pub fn a_center(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n_x, self.n_x, |i, j| self.a_c[i][j])
    }

    pub fn b_center(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n_x, self.n_u, |i, j| self.b_c[i][j])
    }
}

/// Identifies the model set from data: `M = (X+ (+) -Mw) D-^+`, with the
/// disturbance set `Z_d = <0, G_M> (Z_x x Z_u) (+) Z_w` matched to the
/// declared state and input domains.
pub fn identify(
    ds: &DataSet,
    zw: &Zonotope,
    zx: &Zonotope,
    zu: &Zonotope,
) -> Result<ModelSet, SysIdError> {
    let n_x = ds.state_dim();
    let n_u = ds.input_dim();
    if zw.dim() != n_x {
        return Err(SysIdError::DimensionMismatch {
            context: "noise bound",
            expected: n_x,
            got: zw.dim(),
        });
    }
    if zx.dim() != n_x || zu.dim() != n_u {
        return Err(SysIdError::DimensionMismatch {
            context: "domain sets",
            expected: n_x + n_u,
            got: zx.dim() + zu.dim(),
        });
    }
    let rank = check_rank(ds);
    if !rank.full_row_rank {
        return Err(SysIdError::RankDeficient {
            rank: rank.rank,
            required: rank.required,
            singular_values: rank.singular_values,
        });
    }
    let d_pinv = pseudoinverse(&ds.d_minus())?;
    let t = ds.len();
    let mw = noise_matrix_zonotope(zw, t);
    let center = (ds.x_plus() - mw.center()) * &d_pinv;
    let gens: Vec<DMatrix<f64>> = mw.generators().iter().map(|g| -(g * &d_pinv)).collect();
    let mz = MatrixZonotope::new(center.clone(), gens)?;

    let a_c: Vec<Vec<f64>> =
        (0..n_x).map(|i| (0..n_x).map(|j| center[(i, j)]).collect()).collect();
    let b_c: Vec<Vec<f64>> =
        (0..n_x).map(|i| (0..n_u).map(|j| center[(i, n_x + j)]).collect()).collect();
    let interval = mz.to_interval();

    let domain = zx.cartesian_product(zu);
    let zd = mz.centered().times_zono(&domain)?.minkowski_sum(zw)?;

    Ok(ModelSet { mz, a_c, b_c, interval, zd, n_x, n_u })
}

/// Uniform input excitation over `Z_u`, drawn from a derived stream.
pub fn excitation_inputs(zu: &Zonotope, steps: usize, seed: u64) -> Vec<DVector<f64>> {
    let mut stream = rng::stream(seed, 0x696e_7075);
    (0..steps).map(|_| zu.sample(&mut stream)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn table_2d() -> TrueSystem {
        let a = DMatrix::from_row_slice(2, 2, &[0.932, -0.189, 0.189, 0.932]);
        let b = DMatrix::from_row_slice(2, 1, &[0.0436, 0.0533]);
        let zw = Zonotope::from_center_radii(DVector::zeros(2), &[0.005, 0.005]).unwrap();
        TrueSystem::new(a, b, zw).unwrap()
    }

    #[test]
    fn fixed_point_of_identity_dynamics() {
        let sys = TrueSystem::new(
            DMatrix::identity(2, 2),
            DMatrix::zeros(2, 1),
            Zonotope::singleton(DVector::zeros(2)),
        )
        .unwrap();
        let inputs = vec![dvector![3.0]; 5];
        let (states, noises) = simulate(&sys, &dvector![1.0, 1.0], &inputs, 1).unwrap();
        for s in &states {
            assert_eq!(s.as_slice(), &[1.0, 1.0]);
        }
        assert!(noises.iter().all(|w| w.amax() == 0.0));
    }

    #[test]
    fn one_noiseless_step_matches_hand_value() {
        let sys = TrueSystem::new(
            table_2d().a.clone(),
            table_2d().b.clone(),
            Zonotope::singleton(DVector::zeros(2)),
        )
        .unwrap();
        let (states, _) = simulate(&sys, &dvector![1.0, 1.0], &[dvector![10.0]], 9).unwrap();
        assert!((states[1][0] - 1.179).abs() < 1e-3, "{}", states[1][0]);
        assert!((states[1][1] - 1.654).abs() < 1e-3, "{}", states[1][1]);
    }

    #[test]
    fn simulation_is_seed_deterministic() {
        let sys = table_2d();
        let inputs = vec![dvector![10.0]; 20];
        let (s1, n1) = simulate(&sys, &dvector![1.0, 1.0], &inputs, 42).unwrap();
        let (s2, n2) = simulate(&sys, &dvector![1.0, 1.0], &inputs, 42).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(n1, n2);
        let (_, n3) = simulate(&sys, &dvector![1.0, 1.0], &inputs, 43).unwrap();
        assert_ne!(n1, n3);
    }

    #[test]
    fn assemble_shift_property() {
        let states = vec![dvector![0.0], dvector![1.0], dvector![2.0]];
        let inputs = vec![dvector![5.0], dvector![6.0]];
        let ds = DataSet::assemble(&[(states, inputs)], 0).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.x_minus().column(1), ds.x_plus().column(0));
        assert_eq!(ds.boundaries(), &[0]);
    }

    #[test]
    fn assemble_two_trajectories_records_boundary() {
        let t1 = (vec![dvector![0.0], dvector![1.0]], vec![dvector![1.0]]);
        let t2 = (vec![dvector![5.0], dvector![6.0]], vec![dvector![2.0]]);
        let ds = DataSet::assemble(&[t1, t2], 0).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.boundaries(), &[0, 1]);
    }

    #[test]
    fn assemble_rejects_bad_lengths() {
        assert!(matches!(DataSet::assemble(&[], 0), Err(SysIdError::EmptyData)));
        let bad = (vec![dvector![0.0]], vec![dvector![1.0]]);
        assert!(matches!(
            DataSet::assemble(&[bad], 0),
            Err(SysIdError::TrajectoryLength { .. })
        ));
    }

    #[test]
    fn pseudoinverse_of_row_selector() {
        let d = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let p = pseudoinverse(&d).unwrap();
        let expect = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        assert!((p - expect).amax() < 1e-12);
    }

    #[test]
    fn pseudoinverse_square_is_inverse() {
        let d = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.5, 3.0]);
        let p = pseudoinverse(&d).unwrap();
        assert!((d * p - DMatrix::identity(2, 2)).amax() < 1e-10);
    }

    #[test]
    fn pseudoinverse_rejects_rank_deficiency() {
        let d = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        match pseudoinverse(&d) {
            Err(SysIdError::RankDeficient { rank, required, singular_values }) => {
                assert_eq!(rank, 1);
                assert_eq!(required, 2);
                assert_eq!(singular_values.len(), 2);
            }
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn noise_matrix_zonotope_shapes() {
        let zw0 = Zonotope::singleton(DVector::zeros(2));
        let m0 = noise_matrix_zonotope(&zw0, 5);
        assert_eq!(m0.num_generators(), 0);
        assert_eq!(m0.center().amax(), 0.0);

        let zw = Zonotope::new(DVector::zeros(2), DMatrix::identity(2, 2)).unwrap();
        let m = noise_matrix_zonotope(&zw, 2);
        assert_eq!(m.num_generators(), 4);
        for g in m.generators() {
            let nonzero: Vec<f64> = g.iter().copied().filter(|v| *v != 0.0).collect();
            assert_eq!(nonzero, vec![1.0]);
        }
    }

    #[test]
    fn noise_matrix_members_have_columns_in_bound() {
        let zw = Zonotope::from_center_radii(dvector![0.1, -0.2], &[0.3, 0.4]).unwrap();
        let m = noise_matrix_zonotope(&zw, 6);
        let hull = zw.interval_hull();
        let mut r = crate::rng::stream(8, 3);
        for _ in 0..1000 {
            let w = m.sample(&mut r);
            for k in 0..w.ncols() {
                assert!(hull.contains(&w.column(k).into_owned(), 1e-12));
            }
        }
    }

    #[test]
    fn dataset_round_trips_through_files() {
        let sys = table_2d();
        let inputs = excitation_inputs(
            &Zonotope::from_center_radii(dvector![10.0], &[0.25]).unwrap(),
            30,
            7,
        );
        let (states, _) = simulate(&sys, &dvector![1.0, 1.0], &inputs, 7).unwrap();
        let ds = DataSet::assemble(&[(states, inputs)], 7).unwrap();
        let dir = std::env::temp_dir().join("zonocert_ds_test");
        ds.save(&dir).unwrap();
        let back = DataSet::load(&dir).unwrap();
        assert_eq!(back.x_plus(), ds.x_plus());
        assert_eq!(back.x_minus(), ds.x_minus());
        assert_eq!(back.u_minus(), ds.u_minus());
        assert_eq!(back.boundaries(), ds.boundaries());
        std::fs::remove_dir_all(&dir).ok();
    }
}
