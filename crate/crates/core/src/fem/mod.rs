//! Taylor-Hood P2/P1 finite elements on triangles.

pub mod assembly;
pub mod basis;
pub mod quadrature;
pub mod spaces;

pub use assembly::{
    assemble_divergence, assemble_load, assemble_pressure_advection, assemble_pressure_laplacian,
    assemble_pressure_mass, assemble_pressure_operators, assemble_velocity_advection,
    assemble_velocity_mass, assemble_velocity_stiffness, p2_advection, p2_mass, p2_stiffness,
    PressureOperators, SpatialOperators, Wind,
};
pub use spaces::{build_spaces, FESpaces};

use crate::linalg::SparseMatrix;

/// A square operator with Dirichlet rows and columns replaced by the
/// identity, plus the column contribution of the prescribed values.
#[derive(Debug, Clone)]
pub struct Eliminated {
    pub matrix: SparseMatrix,
    /// `A[I, D] g_D` on free rows, zero on constrained rows. Subtract from the
    /// right-hand side of the free rows.
    pub lift: Vec<f64>,
}

/// Symmetric elimination of the DOFs flagged in `mask`, whose values are
/// `values[i]` (entries outside the mask are ignored).
pub fn eliminate_dirichlet(a: &SparseMatrix, mask: &[bool], values: &[f64]) -> Eliminated {
    assert_eq!(mask.len(), a.n_cols());
    let g: Vec<f64> = values
        .iter()
        .zip(mask)
        .map(|(&v, &d)| if d { v } else { 0.0 })
        .collect();
    let mut lift = a.mul_vec(&g);
    lift.iter_mut()
        .zip(mask)
        .for_each(|(l, &d)| {
            if d {
                *l = 0.0
            }
        });
    Eliminated {
        matrix: a.with_identity_rows_cols(mask),
        lift,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elimination_moves_columns_to_rhs() {
        let a = SparseMatrix::from_triplets(
            3,
            3,
            &[(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0), (1, 2, 4.0), (2, 1, 4.0), (2, 2, 5.0)],
        )
        .unwrap();
        let e = eliminate_dirichlet(&a, &[false, false, true], &[9.0, 9.0, 2.0]);
        assert_eq!(e.lift, vec![0.0, 8.0, 0.0]);
        assert_eq!(e.matrix.get(2, 2), 1.0);
        assert_eq!(e.matrix.get(1, 2), 0.0);
        assert!(e.matrix.is_symmetric(0.0));
    }
}
