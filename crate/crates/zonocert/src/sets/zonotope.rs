//! Zonotopes: centrally symmetric convex sets `{ c + G b : |b|_inf <= 1 }`
//! stored as a center and a matrix of generator columns.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{IntervalBox, SetError};
use crate::sdp::{self, BlockKind, BlockSpec, MatEntry, SdpProblem, SolveStatus, SolverOptions};

/// Equality residual and `|b| <= 1` relaxation accepted by membership
/// queries; matches the conic solver's achievable accuracy.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(try_from = "ZonotopeWire", into = "ZonotopeWire")]
pub struct Zonotope {
    center: DVector<f64>,
    generators: DMatrix<f64>,
}

#[derive(Serialize, Deserialize, Clone)]
struct ZonotopeWire {
    center: Vec<f64>,
    generators: Vec<Vec<f64>>,
}

impl TryFrom<ZonotopeWire> for Zonotope {
    type Error = SetError;
    fn try_from(w: ZonotopeWire) -> Result<Self, SetError> {
        let n = w.center.len();
        if w.generators.iter().any(|g| g.len() != n) {
            return Err(SetError::Invalid("generator length differs from center".into()));
        }
        let gens = DMatrix::from_fn(n, w.generators.len(), |i, j| w.generators[j][i]);
        Zonotope::new(DVector::from_vec(w.center), gens)
    }
}

impl From<Zonotope> for ZonotopeWire {
    fn from(z: Zonotope) -> Self {
        Self {
            center: z.center.iter().copied().collect(),
            generators: (0..z.generators.ncols())
                .map(|j| z.generators.column(j).iter().copied().collect())
                .collect(),
        }
    }
}

/// Result of a point membership query.
#[derive(Clone, Debug)]
pub enum PointMembership {
    /// Witness coefficients `b` with `c + G b = x` to [`MEMBERSHIP_TOL`].
    Inside { beta: DVector<f64> },
    Outside,
}

impl PointMembership {
    pub fn is_inside(&self) -> bool {
        matches!(self, PointMembership::Inside { .. })
    }
}

impl Zonotope {
    /// Builds a zonotope, pruning zero-length generator columns.
    pub fn new(center: DVector<f64>, generators: DMatrix<f64>) -> Result<Self, SetError> {
        if generators.ncols() > 0 && generators.nrows() != center.len() {
            return Err(SetError::DimensionMismatch {
                context: "zonotope generators",
                expected: center.len(),
                got: generators.nrows(),
            });
        }
        if center.iter().chain(generators.iter()).any(|v| !v.is_finite()) {
            return Err(SetError::NonFinite);
        }
        let keep: Vec<usize> =
            (0..generators.ncols()).filter(|&j| generators.column(j).amax() != 0.0).collect();
        let gens = if keep.len() == generators.ncols() && generators.nrows() == center.len() {
            generators
        } else {
            let mut m = DMatrix::zeros(center.len(), keep.len());
            for (out, &j) in keep.iter().enumerate() {
                m.set_column(out, &generators.column(j));
            }
            m
        };
        Ok(Self { center, generators: gens })
    }

    /// The singleton `{center}`.
    pub fn singleton(center: DVector<f64>) -> Self {
        let n = center.len();
        Self { center, generators: DMatrix::zeros(n, 0) }
    }

    /// Symmetric box `[-r, r]^n` scaled per coordinate, centered at `c`.
    pub fn from_center_radii(center: DVector<f64>, radii: &[f64]) -> Result<Self, SetError> {
        let n = center.len();
        if radii.len() != n {
            return Err(SetError::DimensionMismatch {
                context: "zonotope radii",
                expected: n,
                got: radii.len(),
            });
        }
        let mut g = DMatrix::zeros(n, n);
        for i in 0..n {
            g[(i, i)] = radii[i];
        }
        Self::new(center, g)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn num_generators(&self) -> usize {
        self.generators.ncols()
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn generators(&self) -> &DMatrix<f64> {
        &self.generators
    }

    pub fn is_singleton(&self) -> bool {
        self.generators.ncols() == 0
    }

    /// Exact image under a linear map: `L Z = <L c, L G>`.
    pub fn linear_map(&self, l: &DMatrix<f64>) -> Result<Zonotope, SetError> {
        if l.ncols() != self.dim() {
            return Err(SetError::DimensionMismatch {
                context: "linear map",
                expected: self.dim(),
                got: l.ncols(),
            });
        }
        Zonotope::new(l * &self.center, l * &self.generators)
    }

    /// Exact Minkowski sum: centers add, generator columns concatenate.
    pub fn minkowski_sum(&self, other: &Zonotope) -> Result<Zonotope, SetError> {
        if self.dim() != other.dim() {
            return Err(SetError::DimensionMismatch {
                context: "Minkowski sum",
                expected: self.dim(),
                got: other.dim(),
            });
        }
        let mut gens = DMatrix::zeros(self.dim(), self.num_generators() + other.num_generators());
        gens.view_mut((0, 0), (self.dim(), self.num_generators()))
            .copy_from(&self.generators);
        gens.view_mut((0, self.num_generators()), (self.dim(), other.num_generators()))
            .copy_from(&other.generators);
        Zonotope::new(&self.center + &other.center, gens)
    }

    /// Exact Cartesian product with block-diagonal generator layout.
    pub fn cartesian_product(&self, other: &Zonotope) -> Zonotope {
        let n = self.dim() + other.dim();
        let mut center = DVector::zeros(n);
        center.rows_mut(0, self.dim()).copy_from(&self.center);
        center.rows_mut(self.dim(), other.dim()).copy_from(&other.center);
        let g1 = self.num_generators();
        let g2 = other.num_generators();
        let mut gens = DMatrix::zeros(n, g1 + g2);
        gens.view_mut((0, 0), (self.dim(), g1)).copy_from(&self.generators);
        gens.view_mut((self.dim(), g1), (other.dim(), g2)).copy_from(&other.generators);
        Zonotope::new(center, gens).expect("product of valid zonotopes is valid")
    }

    /// Smallest axis-aligned box containing the zonotope:
    /// `c -+ sum_i |g_i|` per coordinate.
    pub fn interval_hull(&self) -> IntervalBox {
        let n = self.dim();
        let mut rad = DVector::zeros(n);
        for j in 0..self.generators.ncols() {
            for i in 0..n {
                rad[i] += self.generators[(i, j)].abs();
            }
        }
        IntervalBox::new(&self.center - &rad, &self.center + &rad)
            .expect("hull of a valid zonotope is valid")
    }

    /// Box-method (Girard) order reduction: keeps the `max_generators - n`
    /// generators with the largest `|g|_1 - |g|_inf` score and replaces the
    /// rest by their axis-aligned interval hull. The result contains the
    /// input.
    pub fn reduce_order(&self, max_generators: usize) -> Result<Zonotope, SetError> {
        let n = self.dim();
        if max_generators < n {
            return Err(SetError::Invalid(format!(
                "order reduction needs at least dim = {n} generators, asked for {max_generators}"
            )));
        }
        let gamma = self.num_generators();
        if gamma <= max_generators {
            return Ok(self.clone());
        }
        let keep_count = max_generators - n;
        let mut scored: Vec<(f64, usize)> = (0..gamma)
            .map(|j| {
                let col = self.generators.column(j);
                let l1: f64 = col.iter().map(|v| v.abs()).sum();
                let linf = col.amax();
                (l1 - linf, j)
            })
            .collect();
        // large score = long, non-axis-aligned generator worth keeping
        scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        let kept: Vec<usize> = {
            let mut k: Vec<usize> = scored[..keep_count].iter().map(|s| s.1).collect();
            k.sort_unstable();
            k
        };
        let boxed: Vec<usize> = {
            let mut b: Vec<usize> = scored[keep_count..].iter().map(|s| s.1).collect();
            b.sort_unstable();
            b
        };
        let mut rad = DVector::zeros(n);
        for &j in &boxed {
            for i in 0..n {
                rad[i] += self.generators[(i, j)].abs();
            }
        }
        let mut gens = DMatrix::zeros(n, keep_count + n);
        for (out, &j) in kept.iter().enumerate() {
            gens.set_column(out, &self.generators.column(j));
        }
        for i in 0..n {
            gens[(i, keep_count + i)] = rad[i];
        }
        Zonotope::new(self.center.clone(), gens)
    }

    /// A member point `c + G b` for uniformly random `b in [-1,1]^gamma`.
    pub fn sample(&self, rng: &mut rand_chacha::ChaCha8Rng) -> DVector<f64> {
        let beta = DVector::from_iterator(
            self.num_generators(),
            (0..self.num_generators()).map(|_| crate::rng::unit_interval(rng)),
        );
        &self.center + &self.generators * beta
    }

    /// The member point for explicit coefficients.
    pub fn point_for(&self, beta: &DVector<f64>) -> DVector<f64> {
        &self.center + &self.generators * beta
    }

    /// Decides `x in Z` by linear feasibility over the coefficient cube,
    /// returning a witness on success. Solver failures surface as
    /// [`SetError::Indeterminate`], never as `Outside`.
    pub fn contains_point(&self, x: &DVector<f64>) -> Result<PointMembership, SetError> {
        if x.len() != self.dim() {
            return Err(SetError::DimensionMismatch {
                context: "point membership",
                expected: self.dim(),
                got: x.len(),
            });
        }
        // necessary condition: the interval hull
        let hull = self.interval_hull();
        if !hull.contains(x, MEMBERSHIP_TOL) {
            return Ok(PointMembership::Outside);
        }
        let gamma = self.num_generators();
        if gamma == 0 {
            let ok = (x - &self.center).amax() <= MEMBERSHIP_TOL;
            return Ok(if ok {
                PointMembership::Inside { beta: DVector::zeros(0) }
            } else {
                PointMembership::Outside
            });
        }

        // feasibility LP: G u = (x - c) + G 1 with u in [0, 2]^gamma,
        // encoded as u + v = 2, u, v >= 0.
        let n = self.dim();
        let ones = DVector::from_element(gamma, 1.0);
        let r = (x - &self.center) + &self.generators * ones;
        let mut constraints: Vec<Vec<MatEntry>> = Vec::with_capacity(n + gamma);
        let mut rhs = Vec::with_capacity(n + gamma);
        for i in 0..n {
            let mut row = Vec::new();
            for j in 0..gamma {
                let v = self.generators[(i, j)];
                if v != 0.0 {
                    row.push(MatEntry::new(0, j, j, v));
                }
            }
            constraints.push(row);
            rhs.push(r[i]);
        }
        for j in 0..gamma {
            constraints.push(vec![
                MatEntry::new(0, j, j, 1.0),
                MatEntry::new(0, gamma + j, gamma + j, 1.0),
            ]);
            rhs.push(2.0);
        }
        let problem = SdpProblem::feasibility(
            vec![BlockSpec { dim: 2 * gamma, kind: BlockKind::Diag }],
            constraints,
            rhs,
        )
        .map_err(|e| SetError::Indeterminate(e.to_string()))?;
        let opts = SolverOptions {
            tol_primal: 1e-10,
            tol_dual: 1e-10,
            tol_gap: 1e-10,
            ..Default::default()
        };
        let sol = sdp::solve(&problem, &opts).map_err(|e| SetError::Indeterminate(e.to_string()))?;
        match sol.status {
            SolveStatus::Feasible | SolveStatus::Optimal => {
                let u = match &sol.x[0] {
                    crate::sdp::BlockValue::Diag(v) => v.rows(0, gamma).into_owned(),
                    _ => unreachable!(),
                };
                let beta = u.map(|ui| ui - 1.0);
                let residual = (&self.center + &self.generators * &beta - x).amax();
                let box_ok = beta.iter().all(|b| b.abs() <= 1.0 + MEMBERSHIP_TOL);
                if residual <= MEMBERSHIP_TOL && box_ok {
                    Ok(PointMembership::Inside { beta })
                } else {
                    Err(SetError::Indeterminate(format!(
                        "membership witness failed re-check: residual {residual:.3e}"
                    )))
                }
            }
            SolveStatus::Infeasible => Ok(PointMembership::Outside),
            SolveStatus::Indeterminate => Err(SetError::Indeterminate(
                sol.message.unwrap_or_else(|| "solver gave no verdict".into()),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Zonotope {
        Zonotope::new(DVector::zeros(2), DMatrix::identity(2, 2)).unwrap()
    }

    #[test]
    fn identity_map_is_noop() {
        let z = Zonotope::new(DVector::from_column_slice(&[1.0, 1.0]), DMatrix::identity(2, 2))
            .unwrap();
        let mapped = z.linear_map(&DMatrix::identity(2, 2)).unwrap();
        assert_eq!(mapped, z);
    }

    #[test]
    fn diagonal_map_scales_center_and_generators() {
        let z = Zonotope::new(DVector::from_column_slice(&[1.0, 1.0]), DMatrix::identity(2, 2))
            .unwrap();
        let l = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        let m = z.linear_map(&l).unwrap();
        assert_eq!(m.center().as_slice(), &[2.0, 1.0]);
        assert_eq!(m.generators()[(0, 0)], 2.0);
        assert_eq!(m.generators()[(1, 1)], 1.0);
    }

    #[test]
    fn minkowski_sum_concatenates() {
        let z1 = unit_square();
        let z2 = Zonotope::new(
            DVector::from_column_slice(&[1.0, 1.0]),
            DMatrix::identity(2, 2) * 0.5,
        )
        .unwrap();
        let s = z1.minkowski_sum(&z2).unwrap();
        assert_eq!(s.center().as_slice(), &[1.0, 1.0]);
        assert_eq!(s.num_generators(), 4);
        // additive identity
        let id = Zonotope::singleton(DVector::zeros(2));
        assert_eq!(z1.minkowski_sum(&id).unwrap(), z1);
    }

    #[test]
    fn cartesian_product_block_layout() {
        let z1 = Zonotope::new(DVector::from_column_slice(&[1.0]), DMatrix::from_element(1, 1, 1.0))
            .unwrap();
        let z2 = Zonotope::new(DVector::from_column_slice(&[2.0]), DMatrix::from_element(1, 1, 3.0))
            .unwrap();
        let p = z1.cartesian_product(&z2);
        assert_eq!(p.center().as_slice(), &[1.0, 2.0]);
        assert_eq!(p.generators(), &DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 3.0]));

        let s1 = Zonotope::singleton(DVector::from_column_slice(&[4.0]));
        let s2 = Zonotope::singleton(DVector::from_column_slice(&[5.0]));
        let sp = s1.cartesian_product(&s2);
        assert!(sp.is_singleton());
        assert_eq!(sp.center().as_slice(), &[4.0, 5.0]);
    }

    #[test]
    fn interval_hull_sums_absolute_generators() {
        let z = Zonotope::new(
            DVector::from_column_slice(&[0.0]),
            DMatrix::from_row_slice(1, 2, &[1.0, -2.0]),
        )
        .unwrap();
        let h = z.interval_hull();
        assert_eq!(h.lower()[0], -3.0);
        assert_eq!(h.upper()[0], 3.0);

        let s = Zonotope::singleton(DVector::from_column_slice(&[0.7]));
        let hs = s.interval_hull();
        assert_eq!((hs.lower()[0], hs.upper()[0]), (0.7, 0.7));
    }

    #[test]
    fn membership_inside_and_outside() {
        let z = unit_square();
        let inside = z.contains_point(&DVector::from_column_slice(&[0.5, 0.5])).unwrap();
        match inside {
            PointMembership::Inside { beta } => {
                assert!((beta[0] - 0.5).abs() < 1e-6 && (beta[1] - 0.5).abs() < 1e-6);
            }
            PointMembership::Outside => panic!("(0.5,0.5) is inside the unit square"),
        }
        let outside = z.contains_point(&DVector::from_column_slice(&[1.5, 0.0])).unwrap();
        assert!(!outside.is_inside());
    }

    #[test]
    fn membership_nontrivial_generators() {
        // correlated generators: the interval hull is [-1.5, 1.5]^2 but the
        // set itself is a slanted band
        let z = Zonotope::new(
            DVector::zeros(2),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 1.0, -0.5]),
        )
        .unwrap();
        // (1.0, 0.8) needs beta = (0.9, 0.2): inside
        assert!(z.contains_point(&DVector::from_column_slice(&[1.0, 0.8])).unwrap().is_inside());
        // (1.2, 0.9) needs beta_1 = 1.05: outside the set, inside the hull
        assert!(!z.contains_point(&DVector::from_column_slice(&[1.2, 0.9])).unwrap().is_inside());
        assert!(!z.contains_point(&DVector::from_column_slice(&[1.4, -1.2])).unwrap().is_inside());
    }

    #[test]
    fn zero_length_generators_are_pruned() {
        let z = Zonotope::new(
            DVector::zeros(2),
            DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 2.0]),
        )
        .unwrap();
        assert_eq!(z.num_generators(), 2);
    }

    #[test]
    fn reduction_keeps_containment_and_shrinks_order() {
        let mut rng = crate::rng::stream(3, 1);
        let gens = DMatrix::from_fn(2, 12, |_, _| crate::rng::unit_interval(&mut rng));
        let z = Zonotope::new(DVector::from_column_slice(&[0.3, -0.2]), gens).unwrap();
        let r = z.reduce_order(5).unwrap();
        assert!(r.num_generators() <= 5);
        for _ in 0..200 {
            let x = z.sample(&mut rng);
            assert!(r.contains_point(&x).unwrap().is_inside());
        }
        // no-op below the cap
        assert_eq!(z.reduce_order(12).unwrap(), z);
        // reduction to dim generators equals the interval hull box
        let boxed = z.reduce_order(2).unwrap();
        assert_eq!(boxed.interval_hull(), z.interval_hull());
        assert_eq!(boxed.num_generators(), 2);
        assert!(z.reduce_order(1).is_err());
    }

    #[test]
    fn json_wire_format() {
        let z = Zonotope::new(
            DVector::from_column_slice(&[1.0, 2.0]),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 3.0]),
        )
        .unwrap();
        let s = serde_json::to_string(&z).unwrap();
        assert_eq!(s, r#"{"center":[1.0,2.0],"generators":[[1.0,0.0],[0.0,3.0]]}"#);
        let back: Zonotope = serde_json::from_str(&s).unwrap();
        assert_eq!(back, z);
    }
}
