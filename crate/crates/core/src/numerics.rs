//! Tolerances shared by every module.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    /// Max |m - m†| entry accepted as Hermitian.
    pub hermitian_tol: f64,
    /// Eigenvalues at or below this fraction of the largest are outside the support.
    pub support_tol: f64,
    /// Eigenvalues closer than this fraction of the largest share an eigenspace.
    pub group_tol: f64,
    /// Trace, positivity and Kraus-completeness tolerance for states and channels.
    pub state_tol: f64,
    /// Allowed trace distance between the ensemble and CSI marginals on S.
    pub csi_tol: f64,
    /// Allowed distance between the warden marginal and the innocent output.
    pub covert_tol: f64,
    /// Maximum number of codewords in a sampled one-shot codebook.
    pub codebook_cap: u64,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics {
            hermitian_tol: 1e-10,
            support_tol: 1e-10,
            group_tol: 1e-8,
            state_tol: 1e-10,
            csi_tol: 1e-8,
            covert_tol: 1e-6,
            codebook_cap: 4096,
        }
    }
}
