use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("orientation undefined at singular point ({x}, {y})")]
    Singularity { x: f64, y: f64 },

    #[error("orientation undefined at particle {index}: {source}")]
    ParticleSingularity {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("degenerate orientation: neighbouring angles cancel at ({x}, {y})")]
    DegenerateOrientation { x: f64, y: f64 },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("configuration error in `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("unknown {kind} `{name}`; valid names are: {valid}")]
    Lookup {
        kind: &'static str,
        name: String,
        valid: String,
    },

    #[error("simulation diverged at t = {time}: particle {particle} has a non-finite position")]
    Divergence { time: f64, particle: usize },

    #[error("ridge spacing needs at least two lines, found {0}")]
    InsufficientLines(usize),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    pub(crate) fn lookup(kind: &'static str, name: &str, valid: &[&str]) -> Self {
        Error::Lookup {
            kind,
            name: name.to_string(),
            valid: valid.join(", "),
        }
    }
}
