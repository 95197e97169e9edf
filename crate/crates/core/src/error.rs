use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("width mismatch on {context}: expected {expected}, got {got}")]
    WidthMismatch {
        context: String,
        expected: usize,
        got: usize,
    },
    #[error("ill-posed algebraic loop (smallest singular value {sigma_min:.3e})")]
    IllPosedLoop { sigma_min: f64 },
    #[error("unknown channel `{0}`")]
    UnknownChannel(String),
    #[error("duplicate channel `{0}`")]
    DuplicateChannel(String),
    #[error("inconsistent matrix dimensions: {0}")]
    Dimension(String),
    #[error("selected feedthrough block is singular (condition {cond:.3e})")]
    SingularDBlock { cond: f64 },
    #[error("selected inputs ({inputs}) and outputs ({outputs}) differ in width")]
    NonSquareSelection { inputs: usize, outputs: usize },
    #[error("system is not asymptotically stable (spectral abscissa {abscissa:.3e})")]
    UnstableSystem { abscissa: f64 },
    #[error("H2 norm needs a strictly proper channel (max |D| = {max_abs:.3e})")]
    NonzeroFeedthrough { max_abs: f64 },
    #[error("a mode with real part {real:.3e} is visible on the selected channel")]
    MarginalModeObservable { real: f64 },
    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),
    #[error("eigenvalue computation failed: {0}")]
    EigenFailure(String),
    #[error("invalid modal data: {0}")]
    InvalidModalData(String),
    #[error("unknown port `{0}`")]
    UnknownPort(String),
    #[error("singular inertia for body `{0}`")]
    SingularInertia(String),
    #[error("rotation angle {alpha} rad exceeds 2*pi")]
    AlphaOutOfRange { alpha: f64 },
    #[error("matrix is not a rotation: {0}")]
    NotRotation(String),
    #[error("invalid mode index {index} (body has {count} modes)")]
    InvalidMode { index: usize, count: usize },
    #[error("relative bound {0} outside (0, 1)")]
    InvalidBound(f64),
    #[error("layout error: {0}")]
    LayoutError(String),
    #[error("layout is disconnected: tile {0} has no neighbour")]
    DisconnectedLayout(usize),
    #[error("unknown lattice point: {0}")]
    UnknownPoint(String),
    #[error("joint {joint} angle {alpha} rad exceeds 2*pi")]
    JointOutOfRange { joint: usize, alpha: f64 },
    #[error("inverse kinematics did not converge (residual {pos_err:.3e} m, {axis_err:.3e} rad)")]
    IkNotConverged { pos_err: f64, axis_err: f64 },
    #[error("negative stack count: N={total}, n={assembled}, delta={carried}")]
    NegativeCount {
        total: usize,
        assembled: usize,
        carried: usize,
    },
    #[error("invalid assembly state: {0}")]
    StateInvalid(String),
    #[error("no structure data for n={n}, docking tile {j}")]
    MissingStructureData { n: usize, j: usize },
    #[error("nominal closed loop is unstable (spectral abscissa {abscissa:.3e})")]
    NominalUnstable { abscissa: f64 },
    #[error("no path from node {src} to node {dst}")]
    Unreachable { src: usize, dst: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub(crate) fn width(context: &str, expected: usize, got: usize) -> Error {
    Error::WidthMismatch {
        context: String::from(context),
        expected,
        got,
    }
}
