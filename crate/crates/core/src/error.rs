use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    Dimensions(String),

    #[error("size {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("line slope {slope} out of range for size {size}")]
    SlopeOutOfRange { size: usize, slope: usize },

    #[error("shape {index} lies outside the {size}x{size} image")]
    ShapeOutsideImage { index: usize, size: usize },

    #[error("signal length {length} is not divisible by 2^{levels}; pad to {required}")]
    NeedsPadding {
        length: usize,
        levels: usize,
        required: usize,
    },

    #[error("invalid wavelet spec: {0}")]
    Wavelet(String),

    #[error("coefficient index out of range: {0}")]
    AtomOutOfRange(String),

    #[error("unsupported sinogram variant for {0}")]
    UnsupportedVariant(&'static str),

    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },

    #[error("exact distribution unavailable: {0}")]
    EnumerationTooLarge(String),

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("missing reference: {0}")]
    MissingReference(&'static str),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("format error: {0}")]
    Format(String),

    #[error("value {value} exceeds PGM maxval 65535")]
    PgmOverflow { value: u64 },

    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    pub fn file(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::File {
            path: path.display().to_string(),
            source,
        }
    }

    /// Short machine-readable tag used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dimensions(_) => "dimensions",
            Error::NotPowerOfTwo(_) => "not_power_of_two",
            Error::SlopeOutOfRange { .. } => "slope_out_of_range",
            Error::ShapeOutsideImage { .. } => "shape_outside_image",
            Error::NeedsPadding { .. } => "needs_padding",
            Error::Wavelet(_) => "wavelet",
            Error::AtomOutOfRange(_) => "atom_out_of_range",
            Error::UnsupportedVariant(_) => "unsupported_variant",
            Error::Invalid { .. } => "invalid",
            Error::EnumerationTooLarge(_) => "enumeration_too_large",
            Error::InsufficientData(_) => "insufficient_data",
            Error::MissingReference(_) => "missing_reference",
            Error::Parse { .. } => "parse",
            Error::Format(_) => "format",
            Error::PgmOverflow { .. } => "pgm_overflow",
            Error::File { .. } | Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
