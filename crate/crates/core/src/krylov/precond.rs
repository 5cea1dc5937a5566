use crate::linalg::{LinalgError, LinearOperator};

/// Action of `M⁻¹` for a left/right preconditioner `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct Preconditioner {
    kind: Kind,
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Identity,
    Jacobi { diag: Vec<f64> },
}

/// Preconditioner selector for [`super::SolveOptions`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PreconditionerKind {
    #[default]
    Identity,
    Jacobi,
}

impl std::str::FromStr for PreconditionerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "identity" | "none" => Ok(Self::Identity),
            "jacobi" => Ok(Self::Jacobi),
            other => Err(format!("unknown preconditioner `{other}`")),
        }
    }
}

impl Preconditioner {
    pub fn identity() -> Self {
        Self { kind: Kind::Identity }
    }

    pub fn build(kind: PreconditionerKind, a: &dyn LinearOperator) -> Result<Self, LinalgError> {
        match kind {
            PreconditionerKind::Identity => Ok(Self::identity()),
            PreconditionerKind::Jacobi => jacobi_preconditioner(a),
        }
    }

    pub fn description(&self) -> &'static str {
        match self.kind {
            Kind::Identity => "identity",
            Kind::Jacobi { .. } => "jacobi",
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.kind, Kind::Identity)
    }

    /// `M⁻¹·v`
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        match &self.kind {
            Kind::Identity => v.to_vec(),
            Kind::Jacobi { diag } => v.iter().zip(diag).map(|(x, d)| x / d).collect(),
        }
    }

    /// `M⁻ᵀ·v`; identical to [`apply`](Self::apply) for the diagonal kinds
    /// supported here.
    pub fn apply_transpose(&self, v: &[f64]) -> Vec<f64> {
        self.apply(v)
    }
}

/// `M = diag(A)`, with zero diagonal entries replaced by one.
pub fn jacobi_preconditioner(a: &dyn LinearOperator) -> Result<Preconditioner, LinalgError> {
    if a.nrows() != a.ncols() {
        return Err(LinalgError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let diag = a
        .diagonal()
        .into_iter()
        .map(|d| if d == 0.0 { 1.0 } else { d })
        .collect();
    Ok(Preconditioner {
        kind: Kind::Jacobi { diag },
    })
}
