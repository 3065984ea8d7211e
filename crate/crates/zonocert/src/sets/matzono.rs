//! Matrix zonotopes: `{ C + sum_i b_i G_i : |b|_inf <= 1 }` over matrix
//! space, with the interval conversion and the set product against vector
//! zonotopes used by the reachability recursion.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{matrix_to_rows, rows_to_matrix, IntervalMatrix, PointMembership, SetError, Zonotope};

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(try_from = "MatrixZonotopeWire", into = "MatrixZonotopeWire")]
pub struct MatrixZonotope {
    center: DMatrix<f64>,
    generators: Vec<DMatrix<f64>>,
}

#[derive(Serialize, Deserialize, Clone)]
struct MatrixZonotopeWire {
    center: Vec<Vec<f64>>,
    generators: Vec<Vec<Vec<f64>>>,
}

impl TryFrom<MatrixZonotopeWire> for MatrixZonotope {
    type Error = SetError;
    fn try_from(w: MatrixZonotopeWire) -> Result<Self, SetError> {
        let center = rows_to_matrix(&w.center)?;
        let gens = w.generators.iter().map(|g| rows_to_matrix(g)).collect::<Result<Vec<_>, _>>()?;
        MatrixZonotope::new(center, gens)
    }
}

impl From<MatrixZonotope> for MatrixZonotopeWire {
    fn from(m: MatrixZonotope) -> Self {
        Self {
            center: matrix_to_rows(&m.center),
            generators: m.generators.iter().map(matrix_to_rows).collect(),
        }
    }
}

impl MatrixZonotope {
    /// Builds a matrix zonotope, pruning all-zero generator matrices.
    pub fn new(center: DMatrix<f64>, generators: Vec<DMatrix<f64>>) -> Result<Self, SetError> {
        for g in &generators {
            if g.shape() != center.shape() {
                return Err(SetError::DimensionMismatch {
                    context: "matrix zonotope generators",
                    expected: center.len(),
                    got: g.len(),
                });
            }
        }
        if center.iter().chain(generators.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(SetError::NonFinite);
        }
        let generators = generators.into_iter().filter(|g| g.amax() != 0.0).collect();
        Ok(Self { center, generators })
    }

    pub fn singleton(center: DMatrix<f64>) -> Self {
        Self { center, generators: Vec::new() }
    }

    pub fn nrows(&self) -> usize {
        self.center.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.center.ncols()
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn center(&self) -> &DMatrix<f64> {
        &self.center
    }

    pub fn generators(&self) -> &[DMatrix<f64>] {
        &self.generators
    }

    /// Elementwise bounds `C -+ sum_i |G_i|`; every member matrix satisfies
    /// them.
    pub fn to_interval(&self) -> IntervalMatrix {
        let mut rad = DMatrix::zeros(self.nrows(), self.ncols());
        for g in &self.generators {
            rad.zip_apply(g, |r, gv| *r += gv.abs());
        }
        IntervalMatrix::new(&self.center - &rad, &self.center + &rad)
            .expect("interval of a valid matrix zonotope")
    }

    /// Flattens to a vector zonotope over column-major stacked entries;
    /// membership queries reduce through this.
    pub fn flatten(&self) -> Zonotope {
        let n = self.center.len();
        let center = DVector::from_iterator(n, self.center.iter().copied());
        let mut gens = DMatrix::zeros(n, self.generators.len());
        for (j, g) in self.generators.iter().enumerate() {
            for (i, v) in g.iter().enumerate() {
                gens[(i, j)] = *v;
            }
        }
        Zonotope::new(center, gens).expect("flattening preserves validity")
    }

    /// Decides matrix membership `X in M`. The elementwise interval bound
    /// serves as a fast necessary condition; the full query reduces to
    /// point membership of the flattened zonotope.
    pub fn contains_matrix(&self, x: &DMatrix<f64>) -> Result<PointMembership, SetError> {
        if x.shape() != self.center.shape() {
            return Err(SetError::DimensionMismatch {
                context: "matrix membership",
                expected: self.center.len(),
                got: x.len(),
            });
        }
        if !self.to_interval().contains(x, super::zonotope::MEMBERSHIP_TOL) {
            return Ok(PointMembership::Outside);
        }
        let flat_x = DVector::from_iterator(x.len(), x.iter().copied());
        self.flatten().contains_point(&flat_x)
    }

    /// Over-approximate set product `M * Z`: treats the matrix and vector
    /// coefficients as independent, yielding
    /// `< C c, [C G | G_1 c | G_1 G | ... | G_k c | G_k G] >`,
    /// a superset of `{ M z : M in M, z in Z }`.
    pub fn times_zono(&self, z: &Zonotope) -> Result<Zonotope, SetError> {
        if self.ncols() != z.dim() {
            return Err(SetError::DimensionMismatch {
                context: "matrix zonotope product",
                expected: self.ncols(),
                got: z.dim(),
            });
        }
        let n = self.nrows();
        let gz = z.num_generators();
        let total = gz + self.generators.len() * (1 + gz);
        let mut gens = DMatrix::zeros(n, total);
        let mut col = 0;
        let cg = &self.center * z.generators();
        for j in 0..gz {
            gens.set_column(col, &cg.column(j));
            col += 1;
        }
        for g in &self.generators {
            gens.set_column(col, &(g * z.center()));
            col += 1;
            let gg = g * z.generators();
            for j in 0..gz {
                gens.set_column(col, &gg.column(j));
                col += 1;
            }
        }
        Zonotope::new(&self.center * z.center(), gens)
    }

    /// A member matrix `C + sum b_i G_i` for uniform random `b`.
    pub fn sample(&self, rng: &mut rand_chacha::ChaCha8Rng) -> DMatrix<f64> {
        let mut m = self.center.clone();
        for g in &self.generators {
            let b = crate::rng::unit_interval(rng);
            m += g * b;
        }
        m
    }

    /// Same matrix zonotope with every generator scaled by `s`.
    pub fn scale_generators(&self, s: f64) -> MatrixZonotope {
        MatrixZonotope {
            center: self.center.clone(),
            generators: self.generators.iter().map(|g| g * s).collect(),
        }
    }

    /// The centered part `<0, G>`; the split used when absorbing model
    /// uncertainty into a disturbance set.
    pub fn centered(&self) -> MatrixZonotope {
        MatrixZonotope {
            center: DMatrix::zeros(self.nrows(), self.ncols()),
            generators: self.generators.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_of_identity_with_small_generator() {
        let m = MatrixZonotope::new(
            DMatrix::identity(2, 2),
            vec![DMatrix::identity(2, 2) * 0.1],
        )
        .unwrap();
        let iv = m.to_interval();
        assert_eq!(iv.entry(0, 0), (0.9, 1.1));
        assert_eq!(iv.entry(0, 1), (0.0, 0.0));
        assert_eq!(iv.entry(1, 1), (0.9, 1.1));
    }

    #[test]
    fn interval_of_singleton_is_point() {
        let c = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let m = MatrixZonotope::singleton(c.clone());
        let iv = m.to_interval();
        assert_eq!(iv.lower(), &c);
        assert_eq!(iv.upper(), &c);
    }

    #[test]
    fn singleton_contains_its_center() {
        let c = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let m = MatrixZonotope::singleton(c.clone());
        assert!(m.contains_matrix(&c).unwrap().is_inside());
        let outside = &c + DMatrix::from_element(2, 2, 0.5);
        assert!(!m.contains_matrix(&outside).unwrap().is_inside());
    }

    #[test]
    fn product_identity_center_returns_operand() {
        let m = MatrixZonotope::singleton(DMatrix::identity(2, 2));
        let z = Zonotope::new(
            DVector::from_column_slice(&[1.0, -1.0]),
            DMatrix::identity(2, 2),
        )
        .unwrap();
        assert_eq!(m.times_zono(&z).unwrap(), z);
    }

    #[test]
    fn product_pure_generator_formula() {
        let m = MatrixZonotope::new(DMatrix::zeros(2, 2), vec![DMatrix::identity(2, 2)]).unwrap();
        let z = Zonotope::singleton(DVector::from_column_slice(&[1.0, 0.0]));
        let p = m.times_zono(&z).unwrap();
        assert_eq!(p.center().as_slice(), &[0.0, 0.0]);
        assert_eq!(p.num_generators(), 1);
        assert_eq!(p.generators().column(0).as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn sampled_members_within_interval() {
        let mut rng = crate::rng::stream(5, 2);
        let gens = (0..4)
            .map(|_| DMatrix::from_fn(2, 3, |_, _| crate::rng::unit_interval(&mut rng) * 0.3))
            .collect();
        let m = MatrixZonotope::new(DMatrix::from_fn(2, 3, |i, j| (i + j) as f64), gens).unwrap();
        let iv = m.to_interval();
        for _ in 0..1000 {
            assert!(iv.contains(&m.sample(&mut rng), 1e-12));
        }
    }
}
