//! Vertex conditions `A·u(v) + B·u′(v) = 0` and the test for whether they
//! define a self-adjoint Laplacian: `[A B]` of full rank and `ABᵀ` symmetric.

use nalgebra::DMatrix;

use crate::error::{invalid, Result};

const RANK_TOL: f64 = 1e-10;
const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct VertexCoupling {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
}

/// Which requirement a coupling fails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CouplingDefect {
    /// `rank [A B] < d`.
    RankDeficient { rank: usize, degree: usize },
    /// `ABᵀ ≠ BAᵀ`; carries the largest entry of the difference.
    NonSymmetricProduct { deviation: f64 },
}

impl std::fmt::Display for CouplingDefect {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CouplingDefect::RankDeficient { rank, degree } => {
                write!(f, "rank-deficient: rank [A B] = {rank} < {degree}")
            }
            CouplingDefect::NonSymmetricProduct { deviation } => {
                write!(f, "non-symmetric product: max |ABᵀ − BAᵀ| = {deviation:e}")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingReport {
    pub rank: usize,
    pub symmetry_deviation: f64,
    pub defect: Option<CouplingDefect>,
}

impl CouplingReport {
    pub fn is_valid(&self) -> bool {
        self.defect.is_none()
    }
}

impl VertexCoupling {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self> {
        let d = a.nrows();
        if d == 0 || a.ncols() != d || b.nrows() != d || b.ncols() != d {
            return Err(invalid(format!(
                "A and B must both be d×d, got {}×{} and {}×{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols()
            )));
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(invalid("coupling matrices must be finite"));
        }
        Ok(Self { a, b })
    }

    /// From row-major entries.
    pub fn from_rows(degree: usize, a: &[f64], b: &[f64]) -> Result<Self> {
        if a.len() != degree * degree || b.len() != degree * degree {
            return Err(invalid(format!("{degree}×{degree} matrices need {} entries each", degree * degree)));
        }
        Self::new(
            DMatrix::from_row_slice(degree, degree, a),
            DMatrix::from_row_slice(degree, degree, b),
        )
    }

    /// Rows `u₁ − u₂, …, u_{d−1} − u_d` in `A`, and `Σ u_e′` as the last row of `B`.
    pub fn kirchhoff(degree: usize) -> Result<Self> {
        Self::delta(degree, 0.0)
    }

    /// Continuity plus `Σ u_e′ = α·u`.
    pub fn delta(degree: usize, alpha: f64) -> Result<Self> {
        if degree == 0 {
            return Err(invalid("degree must be positive"));
        }
        let mut a = DMatrix::zeros(degree, degree);
        let mut b = DMatrix::zeros(degree, degree);
        for i in 0..degree - 1 {
            a[(i, i)] = 1.0;
            a[(i, i + 1)] = -1.0;
        }
        a[(degree - 1, 0)] = -alpha;
        b.row_mut(degree - 1).fill(1.0);
        Self::new(a, b)
    }

    /// Equal derivatives plus `Σ u_e = β·u′` (with `u′` the common derivative).
    pub fn delta_prime(degree: usize, beta: f64) -> Result<Self> {
        if degree == 0 {
            return Err(invalid("degree must be positive"));
        }
        let mut a = DMatrix::zeros(degree, degree);
        let mut b = DMatrix::zeros(degree, degree);
        for i in 0..degree - 1 {
            b[(i, i)] = 1.0;
            b[(i, i + 1)] = -1.0;
        }
        a.row_mut(degree - 1).fill(1.0);
        b[(degree - 1, 0)] = -beta;
        Self::new(a, b)
    }

    pub fn dirichlet(degree: usize) -> Result<Self> {
        Self::new(DMatrix::identity(degree, degree), DMatrix::zeros(degree, degree))
    }

    pub fn neumann(degree: usize) -> Result<Self> {
        Self::new(DMatrix::zeros(degree, degree), DMatrix::identity(degree, degree))
    }

    pub fn degree(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }
}

/// Rank of `[A B]` by column-pivoted QR with tolerance `1e-10·‖[A B]‖_F`, and
/// `max |ABᵀ − BAᵀ| ≤ 1e-10·(1 + ‖A‖_F‖B‖_F)`.
pub fn validate_coupling(vc: &VertexCoupling) -> CouplingReport {
    let d = vc.degree();
    let mut block = DMatrix::zeros(d, 2 * d);
    block.view_mut((0, 0), (d, d)).copy_from(&vc.a);
    block.view_mut((0, d), (d, d)).copy_from(&vc.b);
    let tol = RANK_TOL * block.norm();
    let r = block.col_piv_qr().r();
    let rank = (0..d.min(r.ncols())).filter(|&i| r[(i, i)].abs() > tol).count();

    let product = &vc.a * vc.b.transpose();
    let deviation = (&product - product.transpose()).amax();
    let allowed = SYMMETRY_TOL * (1.0 + vc.a.norm() * vc.b.norm());

    let defect = if rank < d {
        Some(CouplingDefect::RankDeficient { rank, degree: d })
    } else if deviation > allowed {
        Some(CouplingDefect::NonSymmetricProduct { deviation })
    } else {
        None
    };
    CouplingReport {
        rank,
        symmetry_deviation: deviation,
        defect,
    }
}
