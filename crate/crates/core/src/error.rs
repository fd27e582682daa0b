use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate element {element:?}: measure {measure:e}")]
    DegenerateElement { element: Option<usize>, measure: f64 },

    #[error("element {element:?} has clockwise orientation (signed area {signed_area:e})")]
    OrientationError { element: Option<usize>, signed_area: f64 },

    #[error("element {element:?} surface is not closed: {detail}")]
    NonClosedSurface { element: Option<usize>, detail: String },

    #[error("face with {nodes} nodes cannot be triangulated")]
    FaceTooSmall { nodes: usize },

    #[error("degenerate triangle (area jacobian {jacobian:e})")]
    DegenerateTriangle { jacobian: f64 },

    #[error("element {element:?} cannot be subdivided into positive simplices: {detail}")]
    SubdivisionFailed { element: Option<usize>, detail: String },

    #[error("duplicate Voronoi seeds {first} and {second}")]
    DuplicateSeeds { first: usize, second: usize },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("Poisson ratio {nu} is at or beyond the incompressible limit")]
    IncompressibleLimit { nu: f64 },

    #[error("inverted element {element:?}: det F = {jacobian:e}")]
    InvertedElement { element: Option<usize>, jacobian: f64 },

    #[error("Newton iteration diverged at t = {time:e}: {detail}")]
    NewtonDiverged { time: f64, detail: String },

    #[error("singular system: {near_null} near-null pivot(s), first at equation {first_equation} (suspected rigid mode)")]
    SingularSystem {
        near_null: usize,
        first_equation: usize,
    },

    #[error("facet {facet:?} is not on the mesh boundary")]
    FacetNotOnBoundary { facet: Vec<usize> },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Attaches an element id to geometry and material errors raised inside element kernels.
    pub fn at_element(self, id: usize) -> Self {
        match self {
            Error::DegenerateElement { measure, .. } => Error::DegenerateElement {
                element: Some(id),
                measure,
            },
            Error::OrientationError { signed_area, .. } => Error::OrientationError {
                element: Some(id),
                signed_area,
            },
            Error::NonClosedSurface { detail, .. } => Error::NonClosedSurface {
                element: Some(id),
                detail,
            },
            Error::SubdivisionFailed { detail, .. } => Error::SubdivisionFailed {
                element: Some(id),
                detail,
            },
            Error::InvertedElement { jacobian, .. } => Error::InvertedElement {
                element: Some(id),
                jacobian,
            },
            other => other,
        }
    }

    /// True for errors caused by bad input rather than by the solver.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Validation(_)
                | Error::IncompressibleLimit { .. }
                | Error::DuplicateSeeds { .. }
                | Error::NonClosedSurface { .. }
                | Error::OrientationError { .. }
                | Error::FaceTooSmall { .. }
                | Error::FacetNotOnBoundary { .. }
                | Error::DegenerateElement { .. }
        )
    }
}
