//! Numeric tolerances, chosen for double precision at ambient dimensions up
//! to a few hundred.

/// Hermiticity check, relative to the largest entry magnitude.
pub const HERM: f64 = 1e-9;
/// Allowed negative eigenvalue mass, relative to the spectral norm.
pub const PSD: f64 = 1e-9;
/// Unit-trace check for density operators.
pub const TRACE: f64 = 1e-9;
/// Unit-norm check for pure states.
pub const NORM: f64 = 1e-9;
/// Agreement required between entropy identities / dual computation routes.
pub const ENTROPY: f64 = 1e-8;
/// Agreement required for reconstruction identities (sqrt, purification).
pub const RECON: f64 = 1e-8;
/// POVM completeness, relative.
pub const COMPLETE: f64 = 1e-8;
/// Refinement reconstruction of a target POVM.
pub const REFINE: f64 = 1e-8;
/// Rank detection, relative to the element's largest eigenvalue.
pub const RANK: f64 = 1e-7;
/// Projector idempotence.
pub const PROJ: f64 = 1e-8;
/// Slack allowed when checking lemma inequalities.
pub const LEMMA: f64 = 1e-8;
/// Eigenvalues closer than this are binned into one spectrum symbol.
pub const SPECTRUM_BIN: f64 = 1e-12;

/// Default cap on enumerations and ambient dimensions (total amplitudes).
pub const DEFAULT_AMBIENT_CAP: usize = 1 << 20;

/// Enumeration/ambient cap, overridable via `MEASIM_MAX_AMBIENT_DIM`.
pub fn ambient_cap() -> usize {
    static CAP: std::sync::OnceLock<usize> = std::sync::OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var("MEASIM_MAX_AMBIENT_DIM")
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or(DEFAULT_AMBIENT_CAP)
    })
}

/// Cap check for a dense operator of the given dimension (`dim^2` amplitudes).
pub fn check_operator_dim(dim: Option<usize>, what: &str) -> crate::error::Result<usize> {
    match dim {
        Some(d) if d.checked_mul(d).is_some_and(|sq| sq <= ambient_cap()) => Ok(d),
        _ => Err(crate::error::Error::SizeLimit(format!(
            "{what} needs an operator beyond the amplitude cap"
        ))),
    }
}

/// Cap check for an enumeration of the given length.
pub fn check_enumeration(count: Option<usize>, what: &str) -> crate::error::Result<usize> {
    match count {
        Some(c) if c <= ambient_cap() => Ok(c),
        _ => Err(crate::error::Error::SizeLimit(format!(
            "{what} enumeration exceeds the cap"
        ))),
    }
}
