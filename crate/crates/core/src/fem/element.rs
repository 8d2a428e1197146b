use crate::scalar::Real;

/// C¹ reference element families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementKind {
    /// Cubic Hermite on segments: value and slope at each end.
    Hermite3,
    /// Quintic Argyris on triangles: value, gradient and Hessian at each vertex
    /// plus the normal derivative at each edge midpoint.
    Argyris5,
}

impl ElementKind {
    pub fn for_dimension(dimension: usize) -> Option<Self> {
        match dimension {
            1 => Some(ElementKind::Hermite3),
            2 => Some(ElementKind::Argyris5),
            _ => None,
        }
    }

    pub fn dimension(self) -> usize {
        match self {
            ElementKind::Hermite3 => 1,
            ElementKind::Argyris5 => 2,
        }
    }

    pub fn degree(self) -> usize {
        match self {
            ElementKind::Hermite3 => 3,
            ElementKind::Argyris5 => 5,
        }
    }

    pub fn local_dofs(self) -> usize {
        match self {
            ElementKind::Hermite3 => 4,
            ElementKind::Argyris5 => 21,
        }
    }

    pub fn dofs_per_vertex(self) -> usize {
        match self {
            ElementKind::Hermite3 => 2,
            ElementKind::Argyris5 => 6,
        }
    }
}

/// Values and physical derivatives of every local basis function at one point.
///
/// Hessians are stored as `[xx, xy, yy]`; in 1-D only the first gradient and
/// Hessian slots are populated.
#[derive(Debug, Clone, Default)]
pub struct BasisEval<T> {
    pub values: Vec<T>,
    pub gradients: Vec<[T; 2]>,
    pub hessians: Vec<[T; 3]>,
    pub laplacians: Vec<T>,
}

impl<T: Real> BasisEval<T> {
    pub fn with_len(n: usize) -> Self {
        BasisEval {
            values: vec![T::zero(); n],
            gradients: vec![[T::zero(); 2]; n],
            hessians: vec![[T::zero(); 3]; n],
            laplacians: vec![T::zero(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Combines the basis with local coefficients into a single [`Jet`].
    pub fn combine(&self, coeffs: &[T]) -> Jet<T> {
        let mut jet = Jet::zero();
        for (i, &c) in coeffs.iter().enumerate() {
            jet.value += c * self.values[i];
            for k in 0..2 {
                jet.gradient[k] += c * self.gradients[i][k];
            }
            for k in 0..3 {
                jet.hessian[k] += c * self.hessians[i][k];
            }
        }
        jet
    }
}

/// Value, gradient and Hessian `[xx, xy, yy]` of a function at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet<T> {
    pub value: T,
    pub gradient: [T; 2],
    pub hessian: [T; 3],
}

impl<T: Real> Jet<T> {
    pub fn zero() -> Self {
        Jet { value: T::zero(), gradient: [T::zero(); 2], hessian: [T::zero(); 3] }
    }

    pub fn laplacian(&self) -> T {
        self.hessian[0] + self.hessian[2]
    }
}
