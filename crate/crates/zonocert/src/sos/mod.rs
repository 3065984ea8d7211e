//! Barrier-certificate synthesis by sum-of-squares programming.
//!
//! A polynomial template `B(x) = c' p(x)` is constrained to be nonpositive
//! on the initial set, at least `epsilon` on the unsafe set, and
//! nonincreasing along every transition of the model set. Each condition
//! becomes "target polynomial minus multiplier combination is SOS", and the
//! three conditions lower jointly into one block SDP whose PSD blocks are
//! the Gram matrices of the SOS witnesses and multipliers, with the barrier
//! coefficients as split free scalars.
//!
//! Two transition encodings are supported: the nominal mode quantifies a
//! disturbance absorbing all model uncertainty (`x+ = A_c x + B_c u + d`),
//! while the robust mode quantifies every entry of `[A B]` over its
//! identified interval (`x+ = A x + B u + w`), which scales much worse with
//! the state dimension — measurably so, see the basis-size diagnostics.
//!
//! All domains are affinely rescaled to unit boxes before lowering;
//! certificates are mapped back to original coordinates on extraction.

mod assemble;
mod lower;

pub use assemble::{assemble_nominal, assemble_robust, SynthesisSets};
pub use lower::{extract_certificate, sos_to_sdp, CertificateBundle, VarDict};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{Monomial, Polynomial};
use crate::sdp::{SdpError, SolveStatus};

#[derive(Debug, Error)]
pub enum SosError {
    #[error("multiplier degree {0} is odd; SOS multipliers need even degree")]
    OddMultiplierDegree(u32),
    #[error("barrier degree must be at least 1")]
    ZeroBarrierDegree,
    #[error(
        "monomial basis over {nvars} variables at degree {degree} has {needed} elements, \
         exceeding the cap of {cap}"
    )]
    BasisCap { needed: u128, cap: u128, nvars: usize, degree: u32 },
    #[error("state domain has zero width in dimension {index}")]
    DegenerateStateDomain { index: usize },
    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("solver status {0:?} carries no certificate")]
    NotFeasible(SolveStatus),
    #[error("numerically unsound certificate: Gram reconstruction residual {residual:.3e}")]
    UnsoundCertificate { residual: f64 },
    #[error("fixed barrier uses monomials outside the degree-{degree} template")]
    FixedBarrierOutsideTemplate { degree: u32 },
    #[error("{0}")]
    Shape(String),
    #[error(transparent)]
    Sdp(#[from] SdpError),
}

/// Which transition encoding the synthesis quantifies over.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Nominal,
    Robust,
}

/// Synthesis knobs. `multiplier_degree` defaults to the smallest even value
/// at least `barrier_degree - 1`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct SosOptions {
    pub barrier_degree: u32,
    pub multiplier_degree: Option<u32>,
    pub epsilon: f64,
    /// Diagonal-consistency trimming of the witness bases. Off by default;
    /// feasibility-preserving when on.
    pub trim_basis: bool,
    /// Refusal threshold for the witness basis size (robust mode).
    pub basis_cap: u128,
    /// Constant added to the decrease target; a small negative value relaxes
    /// the decrease condition by that amount, a positive value tightens it.
    pub decrease_margin: f64,
    /// Freeze the barrier to this polynomial (original coordinates) and
    /// solve only for the multipliers.
    #[serde(skip)]
    pub fixed_barrier: Option<Polynomial>,
}

impl Default for SosOptions {
    fn default() -> Self {
        Self {
            barrier_degree: 4,
            multiplier_degree: None,
            epsilon: 1e-2,
            trim_basis: false,
            basis_cap: 5000,
            decrease_margin: 0.0,
            fixed_barrier: None,
        }
    }
}

impl SosOptions {
    pub fn resolved_multiplier_degree(&self) -> u32 {
        match self.multiplier_degree {
            Some(d) => d,
            None => {
                let need = self.barrier_degree.saturating_sub(1);
                if need % 2 == 0 {
                    need
                } else {
                    need + 1
                }
            }
        }
    }
}

/// One quantified scalar of the decrease condition with its affine
/// de-normalization `original = offset + scale * normalized`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VarInfo {
    pub name: String,
    pub offset: f64,
    pub scale: f64,
}

/// A multiplier slot: the semi-algebraic polynomial it pairs with and the
/// Gram basis of the SOS multiplier.
#[derive(Clone, Debug)]
pub struct MultiplierSlot {
    pub g: Polynomial,
    pub basis: Vec<Monomial>,
}

/// One SOS constraint in fully assembled form. The target polynomial is
/// affine in the barrier coefficients: `constant + sum_k c_k coeff_polys[k]
/// - sum_j lambda_j g_j` must equal the witness `m' Q m`.
#[derive(Clone, Debug)]
pub struct ConstraintSpec {
    pub name: &'static str,
    pub nvars: usize,
    pub constant: Polynomial,
    pub coeff_polys: Vec<Polynomial>,
    pub multipliers: Vec<MultiplierSlot>,
    pub witness_basis: Vec<Monomial>,
    pub equations: Vec<Monomial>,
}

/// Sizes that characterize the assembled program; these are the numbers the
/// scaling comparison between nominal and robust modes reports.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AssemblyStats {
    pub mode: Mode,
    pub quantified_scalars: usize,
    pub barrier_coefficients: usize,
    pub decrease_witness_basis: usize,
    pub witness_basis_sizes: Vec<usize>,
    pub multiplier_count: usize,
    pub multiplier_basis_sizes: Vec<usize>,
    pub equation_count: usize,
}

/// The assembled synthesis problem, ready for [`sos_to_sdp`].
#[derive(Clone, Debug)]
pub struct SynthesisProblem {
    pub mode: Mode,
    pub n_x: usize,
    pub n_u: usize,
    pub barrier_degree: u32,
    pub multiplier_degree: u32,
    pub epsilon: f64,
    /// Monomial basis of the barrier over normalized state variables.
    pub barrier_basis: Vec<Monomial>,
    /// De-normalization of the state: `x_i = x_offsets[i] + x_scales[i] * xn_i`.
    pub x_offsets: Vec<f64>,
    pub x_scales: Vec<f64>,
    /// Quantified scalars of the decrease constraint, in variable order.
    pub quantified: Vec<VarInfo>,
    /// `init`, `unsafe`, `decrease`, in that order.
    pub constraints: Vec<ConstraintSpec>,
    /// Barrier coefficients frozen to these values (normalized basis), if any.
    pub fixed_coeffs: Option<Vec<f64>>,
    pub stats: AssemblyStats,
}

impl SynthesisProblem {
    /// Serializable content summary: constraint targets and multipliers as
    /// term lists plus the assembly statistics.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "mode": self.mode,
            "barrier_degree": self.barrier_degree,
            "multiplier_degree": self.multiplier_degree,
            "epsilon": self.epsilon,
            "quantified": self.quantified,
            "stats": self.stats,
            "constraints": self.constraints.iter().map(|c| serde_json::json!({
                "name": c.name,
                "nvars": c.nvars,
                "constant": c.constant,
                "coefficient_polynomials": c.coeff_polys,
                "multiplier_g": c.multipliers.iter().map(|m| &m.g).collect::<Vec<_>>(),
                "witness_basis_size": c.witness_basis.len(),
                "equations": c.equations.len(),
            })).collect::<Vec<_>>(),
        })
    }
}
