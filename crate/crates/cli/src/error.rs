use std::fmt;

use degree_gof::eg_moments::EgMomentError;
use degree_gof::gof::{FitError, TestError};
use degree_gof::graph::GraphError;
use degree_gof::her_moments::MomentError;
use degree_gof::models::ModelError;
use degree_gof::patterns::PatternError;
use degree_gof::simlab::SimError;

/// Failure classes, one exit code each.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or configuration: exit code 2.
    Usage(String),
    /// Unreadable, malformed or inconsistent input files: exit code 3.
    Data(String),
    /// Degenerate null, failed fit or other numerical breakdown: exit code 4.
    Numerical(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }

    /// Prefixes the message with the file it came from.
    pub fn in_file(self, path: &std::path::Path) -> Self {
        let p = path.display();
        match self {
            CliError::Usage(m) => CliError::Usage(format!("{p}: {m}")),
            CliError::Data(m) => CliError::Data(format!("{p}: {m}")),
            CliError::Numerical(m) => CliError::Numerical(format!("{p}: {m}")),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical error: {m}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<MomentError> for CliError {
    fn from(e: MomentError) -> Self {
        match e {
            MomentError::Dimension { .. } => CliError::Data(e.to_string()),
            MomentError::NegativeVariance(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<PatternError> for CliError {
    fn from(e: PatternError) -> Self {
        match e {
            PatternError::Model(m) => m.into(),
            PatternError::UnknownPattern(_) | PatternError::MissingMoment { .. } => CliError::Usage(e.to_string()),
            PatternError::Budget(_) | PatternError::ZeroDensity => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<EgMomentError> for CliError {
    fn from(e: EgMomentError) -> Self {
        match e {
            EgMomentError::Pattern(p) => p.into(),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<TestError> for CliError {
    fn from(e: TestError) -> Self {
        match e {
            TestError::Alpha(_) => CliError::Usage(e.to_string()),
            TestError::Dimension(..) | TestError::TooSmall { .. } => CliError::Data(e.to_string()),
            TestError::DegenerateNull(_) | TestError::DegenerateAlternative(_) => CliError::Numerical(e.to_string()),
            TestError::Moment(m) => m.into(),
            TestError::EgMoment(m) => m.into(),
            TestError::Pattern(p) => p.into(),
        }
    }
}

impl From<FitError> for CliError {
    fn from(e: FitError) -> Self {
        match e {
            FitError::RankDeficient | FitError::Separation(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Design(_) | SimError::Precondition(_) => CliError::Usage(e.to_string()),
            SimError::Model(m) => m.into(),
            SimError::Test(t) => t.into(),
            SimError::Pattern(p) => p.into(),
        }
    }
}
