use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not a rotation: |R^T R - I| = {ortho_err:.3e}, det - 1 = {det_err:.3e}")]
    NotARotation { ortho_err: f64, det_err: f64 },

    #[error("point cloud must contain at least {min} points, got {n}")]
    TooFewPoints { n: usize, min: usize },

    #[error("point cloud contains non-finite coordinates")]
    NonFiniteCloud,

    #[error("point count mismatch: expected {expected}, got {found}")]
    PointCountMismatch { expected: usize, found: usize },

    #[error("signature mismatch: expected {expected}, got {found}")]
    SignatureMismatch { expected: String, found: String },

    #[error("tensor order {order} exceeds the supported maximum {max}")]
    TensorOrderTooLarge { order: usize, max: usize },

    #[error("degree {degree} exceeds the supported maximum {max}")]
    DegreeTooLarge { degree: usize, max: usize },

    #[error("tensor order mismatch: functional degree {functional}, tensor order {tensor}")]
    OrderMismatch { functional: usize, tensor: usize },

    #[error("multi-index is not canonical: {reason}")]
    NonCanonicalIndex { reason: String },

    #[error(
        "Clebsch-Gordan decomposition of ({l1},{l2}): numerical multiplicity disagrees with \
         the predicted block structure: {detail}"
    )]
    CgMultiplicityMismatch { l1: usize, l2: usize, detail: String },

    #[error("self-interaction entry ({row},{col}) is structurally zero (degrees {l_in} vs {l_out})")]
    StructuralZero { row: usize, col: usize, l_in: usize, l_out: usize },

    #[error("network channel {channel}, layer {layer}: {detail}")]
    ChainingMismatch { channel: usize, layer: usize, detail: String },

    #[error("least-squares system under-determined: {rows} rows for {cols} coefficients")]
    Underdetermined { rows: usize, cols: usize },

    #[error("dimension mismatch: {detail}")]
    DimensionMismatch { detail: String },
}
