use std::fmt;

use hypervol::glue::GlueError;
use hypervol::graph::GraphError;
use hypervol::kr::KrError;
use hypervol::numerics::NumericsError;
use hypervol::tetra::TetraError;

pub const VALIDATION: i32 = 2;
pub const INFEASIBLE: i32 = 3;
pub const UNSUPPORTED: i32 = 4;

/// A message plus the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        CliError {
            code: VALIDATION,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn tetra_code(e: &TetraError) -> i32 {
    match e {
        TetraError::UnsupportedType(_) => UNSUPPORTED,
        TetraError::InvalidParameter { .. } | TetraError::NotLengthEdge(_) => VALIDATION,
        TetraError::Unrealizable(_)
        | TetraError::DegenerateQuadratic
        | TetraError::BranchCut(_) => INFEASIBLE,
    }
}

fn graph_code(e: &GraphError) -> i32 {
    match e {
        GraphError::Unsupported { .. } => UNSUPPORTED,
        GraphError::ReductionStuck { .. } => INFEASIBLE,
        _ => VALIDATION,
    }
}

impl From<TetraError> for CliError {
    fn from(e: TetraError) -> Self {
        CliError {
            code: tetra_code(&e),
            message: e.to_string(),
        }
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        CliError {
            code: graph_code(&e),
            message: e.to_string(),
        }
    }
}

impl From<GlueError> for CliError {
    fn from(e: GlueError) -> Self {
        let code = match &e {
            GlueError::Graph(g) => graph_code(g),
            GlueError::Tetra { source, .. } => match source {
                TetraError::UnsupportedType(_) => UNSUPPORTED,
                _ => INFEASIBLE,
            },
            GlueError::Dimension { .. } => VALIDATION,
            GlueError::Infeasible(_) | GlueError::NonConvergent { .. } => INFEASIBLE,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<KrError> for CliError {
    fn from(e: KrError) -> Self {
        let code = match &e {
            KrError::Graph(g) => graph_code(g),
            KrError::Precision { .. } => INFEASIBLE,
            _ => VALIDATION,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<NumericsError> for CliError {
    fn from(e: NumericsError) -> Self {
        CliError::validation(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::validation(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::validation(format!("invalid JSON: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::validation(format!("cannot write CSV: {e}"))
    }
}
