//! Global numbering of the C¹ degrees of freedom.
//!
//! Vertex `v` owns DOFs `p·v .. p·v + p` with `p` the DOFs per vertex (2 for
//! Hermite, 6 for Argyris, in the local vertex order of the element). Edge `e`
//! of a 2-D mesh owns DOF `6·n_vertices + e`: the derivative at its midpoint
//! along the global edge normal of [`Mesh::edge_normal`].

use super::argyris::ArgyrisElement;
use super::element::{BasisEval, ElementKind, Jet};
use super::hermite::hermite_basis_into;
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::scalar::Real;

/// What a global DOF measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofKind {
    /// Component of the vertex jet: 0 value, then gradient, then Hessian entries.
    Vertex { vertex: usize, component: usize },
    EdgeNormal { edge: usize },
}

#[derive(Debug, Clone)]
pub struct DofMap {
    kind: ElementKind,
    n_dofs: usize,
    n_vertices: usize,
    local_dofs: usize,
    cell_dofs: Vec<usize>,
    /// ±1 per local edge: +1 when the global normal is the cell's outward normal.
    edge_normal_signs: Vec<[i8; 3]>,
    boundary_trace_dofs: Vec<usize>,
    constrained: Vec<bool>,
}

pub fn build_dof_map<T: Real>(mesh: &Mesh<T>, kind: ElementKind) -> Result<DofMap> {
    if mesh.dimension() != kind.dimension() {
        return Err(Error::DimensionMismatch { mesh: mesh.dimension(), element: kind.dimension() });
    }
    let per_vertex = kind.dofs_per_vertex();
    let nv = mesh.num_vertices();
    let local_dofs = kind.local_dofs();
    let mut cell_dofs = Vec::with_capacity(mesh.num_cells() * local_dofs);
    let mut edge_normal_signs = Vec::new();
    let n_dofs = match kind {
        ElementKind::Hermite3 => per_vertex * nv,
        ElementKind::Argyris5 => per_vertex * nv + mesh.num_edges(),
    };
    for c in 0..mesh.num_cells() {
        for &v in mesh.cell(c) {
            cell_dofs.extend((0..per_vertex).map(|k| per_vertex * v + k));
        }
        if kind == ElementKind::Argyris5 {
            let cell = mesh.cell(c);
            let mut signs = [0i8; 3];
            for k in 0..3 {
                let e = mesh.cell_edge(c, k);
                cell_dofs.push(per_vertex * nv + e);
                signs[k] = if cell[k] == mesh.edges()[e][0] { 1 } else { -1 };
            }
            edge_normal_signs.push(signs);
        }
    }

    let mut constrained = vec![false; n_dofs];
    for &v in mesh.boundary_vertices() {
        match kind {
            ElementKind::Hermite3 => constrained[per_vertex * v] = true,
            ElementKind::Argyris5 => (0..per_vertex).for_each(|k| constrained[per_vertex * v + k] = true),
        }
    }
    let boundary_trace_dofs = (0..n_dofs).filter(|&d| constrained[d]).collect();
    Ok(DofMap {
        kind,
        n_dofs,
        n_vertices: nv,
        local_dofs,
        cell_dofs,
        edge_normal_signs,
        boundary_trace_dofs,
        constrained,
    })
}

impl DofMap {
    pub fn kind(&self) -> ElementKind {
        self.kind
    }

    pub fn num_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn num_cells(&self) -> usize {
        self.cell_dofs.len() / self.local_dofs
    }

    pub fn cell_dofs(&self, c: usize) -> &[usize] {
        &self.cell_dofs[c * self.local_dofs..(c + 1) * self.local_dofs]
    }

    pub fn edge_normal_signs(&self, c: usize) -> [i8; 3] {
        self.edge_normal_signs.get(c).copied().unwrap_or([1; 3])
    }

    /// Sorted global DOFs fixed by the essential boundary data.
    pub fn boundary_trace_dofs(&self) -> &[usize] {
        &self.boundary_trace_dofs
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.constrained[dof]
    }

    /// Unconstrained DOFs in ascending order.
    pub fn free_dofs(&self) -> Vec<usize> {
        (0..self.n_dofs).filter(|&d| !self.constrained[d]).collect()
    }

    pub fn dof_kind(&self, dof: usize) -> DofKind {
        let per_vertex = self.kind.dofs_per_vertex();
        if dof < per_vertex * self.n_vertices {
            DofKind::Vertex { vertex: dof / per_vertex, component: dof % per_vertex }
        } else {
            DofKind::EdgeNormal { edge: dof - per_vertex * self.n_vertices }
        }
    }

    /// Element basis of cell `c` on the physical cell.
    pub fn cell_basis<T: Real>(&self, mesh: &Mesh<T>, c: usize) -> Result<CellBasis<T>> {
        let pts = mesh.cell_points(c);
        match self.kind {
            ElementKind::Hermite3 => Ok(CellBasis::Hermite { left: pts[0][0], length: pts[1][0] - pts[0][0] }),
            ElementKind::Argyris5 => {
                let signs = self.edge_normal_signs(c).map(|s| T::from_f64(s as f64).unwrap());
                ArgyrisElement::new(pts, signs)
                    .map(CellBasis::Argyris)
                    .map_err(|condition| Error::DegenerateElement { cell: c, condition })
            }
        }
    }

    /// Value of DOF `dof` for a function with the given jet evaluator.
    pub fn dof_value<T: Real>(&self, mesh: &Mesh<T>, dof: usize, jet: &dyn Fn([T; 2]) -> Jet<T>) -> T {
        match self.dof_kind(dof) {
            DofKind::Vertex { vertex, component } => jet_component(&jet(mesh.vertex(vertex)), component),
            DofKind::EdgeNormal { edge } => {
                let g = jet(mesh.edge_midpoint(edge)).gradient;
                let n = mesh.edge_normal(edge);
                g[0] * n[0] + g[1] * n[1]
            }
        }
    }

    /// Global interpolant coefficients of a function given by its jet.
    pub fn interpolate<T: Real>(&self, mesh: &Mesh<T>, jet: &dyn Fn([T; 2]) -> Jet<T>) -> Vec<T> {
        (0..self.n_dofs).map(|d| self.dof_value(mesh, d, jet)).collect()
    }
}

/// Component of a jet in DOF order: value, ∂x, ∂y, ∂xx, ∂xy, ∂yy (1-D uses value, slope).
pub fn jet_component<T: Real>(jet: &Jet<T>, component: usize) -> T {
    match component {
        0 => jet.value,
        1 => jet.gradient[0],
        2 => jet.gradient[1],
        3 => jet.hessian[0],
        4 => jet.hessian[1],
        5 => jet.hessian[2],
        _ => panic!("jet component {component} out of range"),
    }
}

/// Element basis bound to one physical cell.
#[derive(Debug, Clone)]
pub enum CellBasis<T> {
    Hermite { left: T, length: T },
    Argyris(ArgyrisElement<T>),
}

impl<T: Real> CellBasis<T> {
    pub fn len(&self) -> usize {
        match self {
            CellBasis::Hermite { .. } => 4,
            CellBasis::Argyris(_) => super::argyris::LOCAL_DOFS,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn eval_into(&self, point: [T; 2], out: &mut BasisEval<T>) {
        match self {
            CellBasis::Hermite { left, length } => hermite_basis_into((point[0] - *left) / *length, *length, out),
            CellBasis::Argyris(element) => element.eval_into(point, out),
        }
    }

    pub fn eval(&self, point: [T; 2]) -> BasisEval<T> {
        let mut out = BasisEval::with_len(self.len());
        self.eval_into(point, &mut out);
        out
    }
}
