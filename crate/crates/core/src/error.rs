use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = QeqError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QeqError {
    #[error("evaluation point s = {s} lies within tolerance of a pole (omega = {omega})", omega = s.im)]
    PoleProximity { s: Complex64 },

    #[error("pole {pole} lies on the imaginary axis; causal/anticausal split is undefined")]
    ImaginaryAxisPole { pole: Complex64 },

    #[error("root isolation did not converge for a degree-{degree} polynomial")]
    RootFindingFailure { degree: usize },

    #[error("matrix is not Hurwitz: spectral abscissa {abscissa}")]
    NotHurwitz { abscissa: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("nonzero pairing covariance is not supported by the implemented spectral formulas")]
    PairingUnsupported,

    #[error("parameter `{name}` = {value} outside its domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("degenerate noise: sigma_v2 = 0 together with zeta = 0 leaves rho undefined")]
    DegenerateNoise,

    #[error("unsupported noise configuration: {0}")]
    UnsupportedNoise(String),

    #[error("rho = {rho} sits on the boundary 1; the Wiener-Hopf split has a pole on the imaginary axis")]
    BoundaryPole { rho: f64 },

    #[error("equalization threshold unsatisfied: sigma_v2 = {sigma_v2} <= threshold {threshold}")]
    ThresholdUnsatisfied { sigma_v2: f64, threshold: f64 },

    #[error("completion constants are not real: (rho-1)/(rho+1) - alpha11^2 = {margin}")]
    RealnessViolation { margin: f64 },

    #[error("objective is not a real quadratic in (h, h*): {0}")]
    NonQuadraticObjective(String),

    #[error("spectrum is not strictly positive at omega = {omega} (value {value})")]
    SpectrumNotPositive { omega: f64, value: f64 },

    #[error("spectrum has a root {root} on the imaginary axis")]
    AxisRoot { root: Complex64 },

    #[error("adaptive quadrature failed on [{lo}, {hi}]: estimated error {error}")]
    QuadratureFailure { lo: f64, hi: f64, error: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl QeqError {
    pub(crate) fn domain(name: &'static str, value: f64, domain: &'static str) -> Self {
        QeqError::Domain {
            name,
            value,
            domain,
        }
    }
}
