//! Conforming simplicial meshes: intervals, rectangles and inscribed-polygon disks.
//!
//! Meshes are immutable after construction. Triangles are stored with
//! counter-clockwise vertex order, edges with a global orientation from the
//! lower to the higher vertex index.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::scalar::Real;

const NO_CELL: usize = usize::MAX;

#[derive(Debug, Clone)]
pub struct Mesh<T> {
    dimension: usize,
    vertices: Vec<[T; 2]>,
    /// Segment cells use the first two slots.
    cells: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    cell_edges: Vec<[usize; 3]>,
    edge_cells: Vec<[usize; 2]>,
    boundary_vertices: Vec<usize>,
    boundary_edges: Vec<usize>,
    is_boundary_vertex: Vec<bool>,
    h: T,
}

impl<T: Real> Mesh<T> {
    /// Builds a mesh from raw vertex and cell arrays, deriving edges and boundary tags
    /// from the topology. No geometric validation is performed here, see [`validate_mesh`].
    pub fn from_parts(dimension: usize, vertices: Vec<[T; 2]>, cells: Vec<[usize; 3]>) -> Result<Self> {
        if dimension != 1 && dimension != 2 {
            return Err(Error::InvalidMesh(format!("dimension {dimension}")));
        }
        if cells.is_empty() {
            return Err(Error::InvalidMesh("no cells".into()));
        }
        let arity = dimension + 1;
        for (c, cell) in cells.iter().enumerate() {
            for &v in &cell[..arity] {
                if v >= vertices.len() {
                    return Err(Error::InvalidMesh(format!("cell {c} references vertex {v}")));
                }
            }
        }

        let mut edges = Vec::new();
        let mut cell_edges = Vec::new();
        let mut edge_cells = Vec::new();
        let mut is_boundary_vertex = vec![false; vertices.len()];
        let mut boundary_edges = Vec::new();

        if dimension == 1 {
            let mut uses = vec![0usize; vertices.len()];
            for cell in &cells {
                uses[cell[0]] += 1;
                uses[cell[1]] += 1;
            }
            for (v, &count) in uses.iter().enumerate() {
                if count == 1 {
                    is_boundary_vertex[v] = true;
                }
            }
        } else {
            let mut lookup = std::collections::HashMap::new();
            for (c, cell) in cells.iter().enumerate() {
                let mut local = [0usize; 3];
                for k in 0..3 {
                    let a = cell[k];
                    let b = cell[(k + 1) % 3];
                    let key = (a.min(b), a.max(b));
                    let e = *lookup.entry(key).or_insert_with(|| {
                        edges.push([key.0, key.1]);
                        edge_cells.push([NO_CELL, NO_CELL]);
                        edges.len() - 1
                    });
                    let slot = &mut edge_cells[e];
                    if slot[0] == NO_CELL {
                        slot[0] = c;
                    } else if slot[1] == NO_CELL {
                        slot[1] = c;
                    } else {
                        return Err(Error::InvalidMesh(format!("edge {key:?} shared by more than two cells")));
                    }
                    local[k] = e;
                }
                cell_edges.push(local);
            }
            for (e, pair) in edge_cells.iter().enumerate() {
                if pair[1] == NO_CELL {
                    boundary_edges.push(e);
                    is_boundary_vertex[edges[e][0]] = true;
                    is_boundary_vertex[edges[e][1]] = true;
                }
            }
        }
        let boundary_vertices = (0..vertices.len()).filter(|&v| is_boundary_vertex[v]).collect();

        let mut mesh = Mesh {
            dimension,
            vertices,
            cells,
            edges,
            cell_edges,
            edge_cells,
            boundary_vertices,
            boundary_edges,
            is_boundary_vertex,
            h: T::zero(),
        };
        mesh.h = (0..mesh.num_cells()).map(|c| mesh.cell_diameter(c)).fold(T::zero(), T::max);
        Ok(mesh)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Maximum cell diameter.
    pub fn h(&self) -> T {
        self.h
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[[T; 2]] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> [T; 2] {
        self.vertices[v]
    }

    /// Vertex indices of cell `c` (two for segments, three for triangles).
    pub fn cell(&self, c: usize) -> &[usize] {
        &self.cells[c][..self.dimension + 1]
    }

    pub fn cell_points(&self, c: usize) -> [[T; 2]; 3] {
        let cell = &self.cells[c];
        let v = |k: usize| if k <= self.dimension { self.vertices[cell[k]] } else { [T::zero(); 2] };
        [v(0), v(1), v(2)]
    }

    /// Global edges as `[lo, hi]` vertex pairs (empty in 1-D).
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Global edge index of local edge `k` of triangle `c`; local edge `k` joins
    /// local vertices `k` and `k + 1 (mod 3)`.
    pub fn cell_edge(&self, c: usize, k: usize) -> usize {
        self.cell_edges[c][k]
    }

    /// The one or two cells incident to an edge.
    pub fn edge_cells(&self, e: usize) -> (usize, Option<usize>) {
        let pair = self.edge_cells[e];
        (pair[0], (pair[1] != NO_CELL).then_some(pair[1]))
    }

    pub fn boundary_vertices(&self) -> &[usize] {
        &self.boundary_vertices
    }

    pub fn boundary_edges(&self) -> &[usize] {
        &self.boundary_edges
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.is_boundary_vertex[v]
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edge_cells[e][1] == NO_CELL
    }

    /// Unit normal of a global edge, obtained by rotating the lo→hi tangent clockwise.
    pub fn edge_normal(&self, e: usize) -> [T; 2] {
        let [a, b] = self.edges[e];
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        let t = [pb[0] - pa[0], pb[1] - pa[1]];
        let len = t[0].hypot(t[1]);
        [t[1] / len, -t[0] / len]
    }

    pub fn edge_midpoint(&self, e: usize) -> [T; 2] {
        let [a, b] = self.edges[e];
        let half = T::lit(0.5);
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        [(pa[0] + pb[0]) * half, (pa[1] + pb[1]) * half]
    }

    /// Signed measure: oriented length in 1-D, signed area in 2-D.
    pub fn signed_measure(&self, c: usize) -> T {
        let [p0, p1, p2] = self.cell_points(c);
        if self.dimension == 1 {
            p1[0] - p0[0]
        } else {
            T::lit(0.5) * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]))
        }
    }

    pub fn cell_diameter(&self, c: usize) -> T {
        let [p0, p1, p2] = self.cell_points(c);
        if self.dimension == 1 {
            (p1[0] - p0[0]).abs()
        } else {
            let [a, b, c] = side_lengths(p0, p1, p2);
            a.max(b).max(c)
        }
    }

    pub fn total_measure(&self) -> T {
        (0..self.num_cells()).fold(T::zero(), |acc, c| acc + self.signed_measure(c).abs())
    }

    /// Writes the plain-text mesh dump described in the README.
    pub fn write_text<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# vmm mesh")?;
        writeln!(out, "dimension {}", self.dimension)?;
        writeln!(out, "vertices {}", self.num_vertices())?;
        for (i, p) in self.vertices.iter().enumerate() {
            writeln!(out, "{i} {} {}", p[0], p[1])?;
        }
        writeln!(out, "cells {}", self.num_cells())?;
        for c in 0..self.num_cells() {
            write!(out, "{c}")?;
            for v in self.cell(c) {
                write!(out, " {v}")?;
            }
            writeln!(out)?;
        }
        writeln!(out, "boundary_vertices {}", self.boundary_vertices.len())?;
        for v in &self.boundary_vertices {
            writeln!(out, "{v}")?;
        }
        writeln!(out, "boundary_edges {}", self.boundary_edges.len())?;
        for &e in &self.boundary_edges {
            writeln!(out, "{} {}", self.edges[e][0], self.edges[e][1])?;
        }
        Ok(())
    }
}

fn side_lengths<T: Real>(p0: [T; 2], p1: [T; 2], p2: [T; 2]) -> [T; 3] {
    let d = |a: [T; 2], b: [T; 2]| (b[0] - a[0]).hypot(b[1] - a[1]);
    [d(p0, p1), d(p1, p2), d(p2, p0)]
}

/// `n` equal segments of `[a, b]`.
pub fn build_interval_mesh<T: Real>(a: T, b: T, n: usize) -> Result<Mesh<T>> {
    if !(a < b) {
        return Err(Error::InvalidMesh(format!("interval [{a}, {b}] is empty")));
    }
    if n == 0 {
        return Err(Error::InvalidMesh("n must be positive".into()));
    }
    let step = (b - a) / T::from_usize_lossy(n);
    let vertices = (0..=n)
        .map(|i| if i == n { [b, T::zero()] } else { [a + step * T::from_usize_lossy(i), T::zero()] })
        .collect();
    let cells = (0..n).map(|i| [i, i + 1, 0]).collect();
    Mesh::from_parts(1, vertices, cells)
}

/// `n × n` grid of rectangles, each split along its lower-left to upper-right diagonal.
pub fn build_rectangle_mesh<T: Real>(x_bounds: (T, T), y_bounds: (T, T), n: usize) -> Result<Mesh<T>> {
    if n == 0 {
        return Err(Error::InvalidMesh("n must be positive".into()));
    }
    if !(x_bounds.0 < x_bounds.1) || !(y_bounds.0 < y_bounds.1) {
        return Err(Error::InvalidMesh("degenerate rectangle bounds".into()));
    }
    let nf = T::from_usize_lossy(n);
    let coord = |lo: T, hi: T, i: usize| {
        if i == n {
            hi
        } else {
            lo + (hi - lo) * T::from_usize_lossy(i) / nf
        }
    };
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([coord(x_bounds.0, x_bounds.1, i), coord(y_bounds.0, y_bounds.1, j)]);
        }
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut cells = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (v00, v10, v11, v01) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            cells.push([v00, v10, v11]);
            cells.push([v00, v11, v01]);
        }
    }
    Mesh::from_parts(2, vertices, cells)
}

/// Inscribed regular polygon fan-triangulated from the centre, then uniformly
/// refined with new boundary vertices projected back onto the circle.
pub fn build_disk_mesh<T: Real>(radius: T, n_boundary: usize, refine_levels: usize) -> Result<Mesh<T>> {
    if !(radius > T::zero()) {
        return Err(Error::InvalidMesh(format!("radius {radius} must be positive")));
    }
    if n_boundary < 6 {
        return Err(Error::InvalidMesh(format!("n_boundary {n_boundary} < 6")));
    }
    let mut vertices = vec![[T::zero(), T::zero()]];
    let nb = T::from_usize_lossy(n_boundary);
    for k in 0..n_boundary {
        let theta = T::TAU() * T::from_usize_lossy(k) / nb;
        vertices.push([radius * theta.cos(), radius * theta.sin()]);
    }
    let cells = (0..n_boundary).map(|k| [0, 1 + k, 1 + (k + 1) % n_boundary]).collect();
    let mut mesh = Mesh::from_parts(2, vertices, cells)?;
    for _ in 0..refine_levels {
        mesh = refine_uniform(&mesh, Some(radius))?;
    }
    Ok(mesh)
}

/// Splits every triangle into four. With `project_radius`, midpoints of boundary
/// edges are moved radially onto the circle of that radius.
pub fn refine_uniform<T: Real>(mesh: &Mesh<T>, project_radius: Option<T>) -> Result<Mesh<T>> {
    if mesh.dimension != 2 {
        let mut vertices = Vec::with_capacity(2 * mesh.num_vertices());
        let mut cells = Vec::with_capacity(2 * mesh.num_cells());
        vertices.extend_from_slice(&mesh.vertices);
        for cell in &mesh.cells {
            let (a, b) = (mesh.vertices[cell[0]], mesh.vertices[cell[1]]);
            vertices.push([(a[0] + b[0]) * T::lit(0.5), T::zero()]);
            let m = vertices.len() - 1;
            cells.push([cell[0], m, 0]);
            cells.push([m, cell[1], 0]);
        }
        return Mesh::from_parts(1, vertices, cells);
    }
    let nv = mesh.num_vertices();
    let mut vertices = mesh.vertices.clone();
    for e in 0..mesh.num_edges() {
        let mut m = mesh.edge_midpoint(e);
        if let (Some(r), true) = (project_radius, mesh.is_boundary_edge(e)) {
            let len = m[0].hypot(m[1]);
            m = [m[0] * r / len, m[1] * r / len];
        }
        vertices.push(m);
    }
    let mut cells = Vec::with_capacity(4 * mesh.num_cells());
    for c in 0..mesh.num_cells() {
        let [a, b, cc] = mesh.cells[c];
        let m0 = nv + mesh.cell_edges[c][0];
        let m1 = nv + mesh.cell_edges[c][1];
        let m2 = nv + mesh.cell_edges[c][2];
        cells.push([a, m0, m2]);
        cells.push([m0, b, m1]);
        cells.push([m2, m1, cc]);
        cells.push([m0, m1, m2]);
    }
    Mesh::from_parts(2, vertices, cells)
}

#[derive(Debug, Clone, Copy)]
pub struct ValidationBounds {
    /// Upper bound on circumradius / inradius.
    pub max_shape_ratio: f64,
    /// Upper bound on max cell diameter / min cell diameter.
    pub max_quasi_uniformity: f64,
}

impl Default for ValidationBounds {
    fn default() -> Self {
        ValidationBounds { max_shape_ratio: 10.0, max_quasi_uniformity: 4.0 }
    }
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub h: f64,
    pub min_diameter: f64,
    pub max_diameter: f64,
    pub worst_shape_ratio: f64,
    pub quasi_uniformity: f64,
    pub min_signed_measure: f64,
    pub edges_manifold: bool,
    pub orientable: bool,
    pub conforming: bool,
}

pub fn validate_mesh<T: Real>(mesh: &Mesh<T>) -> ValidationReport {
    validate_mesh_with(mesh, ValidationBounds::default())
}

pub fn validate_mesh_with<T: Real>(mesh: &Mesh<T>, bounds: ValidationBounds) -> ValidationReport {
    let mut min_d = f64::INFINITY;
    let mut max_d = 0.0f64;
    let mut worst = 1.0f64;
    let mut min_measure = f64::INFINITY;
    for c in 0..mesh.num_cells() {
        let d = mesh.cell_diameter(c).to_f64_lossy();
        min_d = min_d.min(d);
        max_d = max_d.max(d);
        let measure = mesh.signed_measure(c).to_f64_lossy();
        min_measure = min_measure.min(measure);
        if mesh.dimension == 2 {
            let [p0, p1, p2] = mesh.cell_points(c);
            let [a, b, cc] = side_lengths(p0, p1, p2).map(|s| s.to_f64_lossy());
            let area = measure.abs();
            let ratio = if area > 0.0 {
                let circum = a * b * cc / (4.0 * area);
                let inradius = 2.0 * area / (a + b + cc);
                circum / inradius
            } else {
                f64::INFINITY
            };
            worst = worst.max(ratio);
        }
    }

    // Every vertex pair is traversed once in each direction across an interior edge.
    let mut orientable = true;
    let edges_manifold = true;
    if mesh.dimension == 2 {
        for e in 0..mesh.num_edges() {
            if let (c0, Some(c1)) = mesh.edge_cells(e) {
                orientable &= edge_direction(mesh, c0, e) != edge_direction(mesh, c1, e);
            }
        }
    } else {
        let mut uses = vec![0usize; mesh.num_vertices()];
        for c in 0..mesh.num_cells() {
            for &v in mesh.cell(c) {
                uses[v] += 1;
            }
        }
        orientable = uses.iter().all(|&u| u <= 2);
    }

    let quasi = if min_d > 0.0 { max_d / min_d } else { f64::INFINITY };
    let conforming = edges_manifold
        && orientable
        && min_measure > 0.0
        && worst <= bounds.max_shape_ratio
        && quasi <= bounds.max_quasi_uniformity;
    ValidationReport {
        h: mesh.h().to_f64_lossy(),
        min_diameter: min_d,
        max_diameter: max_d,
        worst_shape_ratio: worst,
        quasi_uniformity: quasi,
        min_signed_measure: min_measure,
        edges_manifold,
        orientable,
        conforming,
    }
}

/// True when triangle `c` traverses global edge `e` from its lo to its hi vertex.
fn edge_direction<T: Real>(mesh: &Mesh<T>, c: usize, e: usize) -> bool {
    let k = (0..3).find(|&k| mesh.cell_edges[c][k] == e).expect("edge belongs to cell");
    mesh.cells[c][k] == mesh.edges[e][0]
}

/// Bucket grid for point location.
#[derive(Debug, Clone)]
pub struct PointLocator {
    origin: [f64; 2],
    cell_size: [f64; 2],
    dims: [usize; 2],
    buckets: Vec<Vec<usize>>,
}

impl PointLocator {
    pub fn new<T: Real>(mesh: &Mesh<T>) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in mesh.vertices() {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k].to_f64_lossy());
                hi[k] = hi[k].max(p[k].to_f64_lossy());
            }
        }
        let per_axis = ((mesh.num_cells() as f64).sqrt().ceil() as usize).max(1);
        let dims = if mesh.dimension() == 1 { [per_axis * per_axis, 1] } else { [per_axis, per_axis] };
        let cell_size = [
            ((hi[0] - lo[0]) / dims[0] as f64).max(f64::MIN_POSITIVE),
            ((hi[1] - lo[1]) / dims[1] as f64).max(f64::MIN_POSITIVE),
        ];
        let mut locator = PointLocator { origin: lo, cell_size, dims, buckets: vec![Vec::new(); dims[0] * dims[1]] };
        for c in 0..mesh.num_cells() {
            let pts = mesh.cell_points(c);
            let n = mesh.dimension() + 1;
            let mut blo = [f64::INFINITY; 2];
            let mut bhi = [f64::NEG_INFINITY; 2];
            for p in &pts[..n] {
                for k in 0..2 {
                    blo[k] = blo[k].min(p[k].to_f64_lossy());
                    bhi[k] = bhi[k].max(p[k].to_f64_lossy());
                }
            }
            let (i0, j0) = locator.bucket_of(blo);
            let (i1, j1) = locator.bucket_of(bhi);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    locator.buckets[j * dims[0] + i].push(c);
                }
            }
        }
        locator
    }

    fn bucket_of(&self, p: [f64; 2]) -> (usize, usize) {
        let idx = |k: usize| {
            let t = ((p[k] - self.origin[k]) / self.cell_size[k]).floor();
            (t.max(0.0) as usize).min(self.dims[k] - 1)
        };
        (idx(0), idx(1))
    }

    /// Cell containing `p` (within `tol` in barycentric terms), if any.
    pub fn locate<T: Real>(&self, mesh: &Mesh<T>, p: [f64; 2], tol: f64) -> Option<usize> {
        for k in 0..2 {
            let lo = self.origin[k] - tol;
            let hi = self.origin[k] + self.cell_size[k] * self.dims[k] as f64 + tol;
            if p[k] < lo || p[k] > hi {
                return None;
            }
        }
        let (i, j) = self.bucket_of(p);
        self.buckets[j * self.dims[0] + i].iter().copied().find(|&c| contains(mesh, c, p, tol))
    }
}

fn contains<T: Real>(mesh: &Mesh<T>, c: usize, p: [f64; 2], tol: f64) -> bool {
    let pts = mesh.cell_points(c).map(|q| [q[0].to_f64_lossy(), q[1].to_f64_lossy()]);
    if mesh.dimension() == 1 {
        let (a, b) = (pts[0][0].min(pts[1][0]), pts[0][0].max(pts[1][0]));
        let slack = tol * (b - a);
        return p[0] >= a - slack && p[0] <= b + slack;
    }
    let det = (pts[1][0] - pts[0][0]) * (pts[2][1] - pts[0][1]) - (pts[2][0] - pts[0][0]) * (pts[1][1] - pts[0][1]);
    let l1 = ((p[0] - pts[0][0]) * (pts[2][1] - pts[0][1]) - (pts[2][0] - pts[0][0]) * (p[1] - pts[0][1])) / det;
    let l2 = ((pts[1][0] - pts[0][0]) * (p[1] - pts[0][1]) - (p[0] - pts[0][0]) * (pts[1][1] - pts[0][1])) / det;
    let l0 = 1.0 - l1 - l2;
    l0 >= -tol && l1 >= -tol && l2 >= -tol
}
