//! Quadratic triangle meshes of the reference domain and their prism
//! extrusions through the scaled thickness.

use crate::error::{Error, Result};
use crate::fem::shape::P2_NODES;
use nalgebra::Matrix2;

/// A side of a rectangular reference domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    /// `y2 = y2_min`
    Bottom,
    /// `y1 = y1_max`
    Right,
    /// `y2 = y2_max`
    Top,
    /// `y1 = y1_min`
    Left,
}

impl Side {
    pub fn parse(name: &str) -> Option<Side> {
        match name {
            "bottom" => Some(Side::Bottom),
            "right" => Some(Side::Right),
            "top" => Some(Side::Top),
            "left" => Some(Side::Left),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    /// End nodes then the midpoint node.
    pub nodes: [usize; 3],
    pub clamped: bool,
}

/// Affine map `y = origin + J ξ` of the reference triangle onto an element.
#[derive(Debug, Clone, Copy)]
pub struct ElementMap {
    pub origin: [f64; 2],
    pub jac: Matrix2<f64>,
    pub jac_inv_t: Matrix2<f64>,
    pub det: f64,
}

impl ElementMap {
    pub fn point(&self, xi: [f64; 2]) -> [f64; 2] {
        let v = self.jac * nalgebra::Vector2::new(xi[0], xi[1]);
        [self.origin[0] + v[0], self.origin[1] + v[1]]
    }

    /// Physical gradient `∇_y N` from the reference gradient `∇_ξ N`.
    #[inline]
    pub fn gradient(&self, dref: [f64; 2]) -> [f64; 2] {
        let m = &self.jac_inv_t;
        [
            m[(0, 0)] * dref[0] + m[(0, 1)] * dref[1],
            m[(1, 0)] * dref[0] + m[(1, 1)] * dref[1],
        ]
    }
}

/// Six-node triangle mesh with a clamped (`γ0`) / free (`γ1`) boundary partition.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh2D {
    nodes: Vec<[f64; 2]>,
    elements: Vec<[usize; 6]>,
    boundary: Vec<BoundaryEdge>,
    clamped: Vec<bool>,
}

impl Mesh2D {
    /// Validates element orientation and midpoint placement, and derives the
    /// clamped node set from the clamped boundary edges.
    pub fn new(nodes: Vec<[f64; 2]>, elements: Vec<[usize; 6]>, boundary: Vec<BoundaryEdge>) -> Result<Self> {
        let n = nodes.len();
        for (e, el) in elements.iter().enumerate() {
            if el.iter().any(|&i| i >= n) {
                return Err(Error::InvalidMesh(format!("element {e} references a missing node")));
            }
            let p = |k: usize| nodes[el[k]];
            let det = (p(1)[0] - p(0)[0]) * (p(2)[1] - p(0)[1]) - (p(2)[0] - p(0)[0]) * (p(1)[1] - p(0)[1]);
            if !(det > 0.0) {
                return Err(Error::InvalidMesh(format!(
                    "element {e} has non-positive Jacobian {det:e}"
                )));
            }
            for (m, (a, b)) in [(3, (0, 1)), (4, (1, 2)), (5, (2, 0))] {
                let mid = [(p(a)[0] + p(b)[0]) * 0.5, (p(a)[1] + p(b)[1]) * 0.5];
                let scale = det.abs().sqrt();
                if (mid[0] - p(m)[0]).hypot(mid[1] - p(m)[1]) > 1e-10 * scale {
                    return Err(Error::InvalidMesh(format!(
                        "element {e}: node {m} is not an edge midpoint"
                    )));
                }
            }
        }
        let mut clamped = vec![false; n];
        for edge in &boundary {
            if edge.nodes.iter().any(|&i| i >= n) {
                return Err(Error::InvalidMesh("boundary edge references a missing node".into()));
            }
            if edge.clamped {
                for &i in &edge.nodes {
                    clamped[i] = true;
                }
            }
        }
        Ok(Self {
            nodes,
            elements,
            boundary,
            clamped,
        })
    }

    /// Structured mesh of `[y1_0, y1_1] × [y2_0, y2_1]` with `nx × ny` cells,
    /// each split into two triangles along its rising diagonal.
    pub fn rectangle(y1: [f64; 2], y2: [f64; 2], nx: usize, ny: usize, clamped: &[Side]) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidMesh(
                "rectangle needs at least one cell per direction".into(),
            ));
        }
        if !(y1[1] > y1[0]) || !(y2[1] > y2[0]) {
            return Err(Error::InvalidMesh(format!("empty rectangle {y1:?} x {y2:?}")));
        }
        let (gx, gy) = (2 * nx + 1, 2 * ny + 1);
        let id = |i: usize, j: usize| j * gx + i;
        let mut nodes = Vec::with_capacity(gx * gy);
        for j in 0..gy {
            for i in 0..gx {
                let s = i as f64 / (gx - 1) as f64;
                let t = j as f64 / (gy - 1) as f64;
                nodes.push([y1[0] + s * (y1[1] - y1[0]), y2[0] + t * (y2[1] - y2[0])]);
            }
        }
        let mut elements = Vec::with_capacity(2 * nx * ny);
        for cy in 0..ny {
            for cx in 0..nx {
                let (i, j) = (2 * cx, 2 * cy);
                elements.push([
                    id(i, j),
                    id(i + 2, j),
                    id(i + 2, j + 2),
                    id(i + 1, j),
                    id(i + 2, j + 1),
                    id(i + 1, j + 1),
                ]);
                elements.push([
                    id(i, j),
                    id(i + 2, j + 2),
                    id(i, j + 2),
                    id(i + 1, j + 1),
                    id(i + 1, j + 2),
                    id(i, j + 1),
                ]);
            }
        }
        let mut boundary = Vec::new();
        let is_clamped = |s: Side| clamped.contains(&s);
        for c in 0..nx {
            let i = 2 * c;
            boundary.push(BoundaryEdge {
                nodes: [id(i, 0), id(i + 2, 0), id(i + 1, 0)],
                clamped: is_clamped(Side::Bottom),
            });
            boundary.push(BoundaryEdge {
                nodes: [id(i + 2, gy - 1), id(i, gy - 1), id(i + 1, gy - 1)],
                clamped: is_clamped(Side::Top),
            });
        }
        for c in 0..ny {
            let j = 2 * c;
            boundary.push(BoundaryEdge {
                nodes: [id(gx - 1, j), id(gx - 1, j + 2), id(gx - 1, j + 1)],
                clamped: is_clamped(Side::Right),
            });
            boundary.push(BoundaryEdge {
                nodes: [id(0, j + 2), id(0, j), id(0, j + 1)],
                clamped: is_clamped(Side::Left),
            });
        }
        Self::new(nodes, elements, boundary)
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn elements(&self) -> &[[usize; 6]] {
        &self.elements
    }

    pub fn boundary(&self) -> &[BoundaryEdge] {
        &self.boundary
    }

    pub fn is_clamped(&self, node: usize) -> bool {
        self.clamped[node]
    }

    pub fn clamped_nodes(&self) -> Vec<usize> {
        (0..self.num_nodes()).filter(|&i| self.clamped[i]).collect()
    }

    pub fn element_map(&self, e: usize) -> Result<ElementMap> {
        let el = &self.elements[e];
        let p0 = self.nodes[el[0]];
        let p1 = self.nodes[el[1]];
        let p2 = self.nodes[el[2]];
        let jac = Matrix2::new(p1[0] - p0[0], p2[0] - p0[0], p1[1] - p0[1], p2[1] - p0[1]);
        let det = jac.determinant();
        let inv = jac
            .try_inverse()
            .filter(|_| det > 0.0)
            .ok_or_else(|| Error::InvalidMesh(format!("element {e} is degenerate")))?;
        Ok(ElementMap {
            origin: p0,
            jac,
            jac_inv_t: inv.transpose(),
            det,
        })
    }

    /// Reference coordinates of every node within element `e`, in local order.
    pub fn local_node_coords() -> [[f64; 2]; 6] {
        P2_NODES
    }

    /// Total area of the domain.
    pub fn area(&self) -> f64 {
        (0..self.num_elements())
            .map(|e| 0.5 * self.element_map(e).map(|m| m.det).unwrap_or(0.0))
            .sum()
    }
}

/// Map between all nodal degrees of freedom (three per node, node-major) and
/// the unknowns left after eliminating clamped nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    free_of_full: Vec<Option<usize>>,
    full_of_free: Vec<usize>,
}

impl DofMap {
    pub fn new(num_nodes: usize, clamped: impl Fn(usize) -> bool) -> Self {
        let mut free_of_full = vec![None; 3 * num_nodes];
        let mut full_of_free = Vec::new();
        for node in 0..num_nodes {
            if clamped(node) {
                continue;
            }
            for c in 0..3 {
                free_of_full[3 * node + c] = Some(full_of_free.len());
                full_of_free.push(3 * node + c);
            }
        }
        Self {
            free_of_full,
            full_of_free,
        }
    }

    pub fn num_full(&self) -> usize {
        self.free_of_full.len()
    }

    pub fn num_free(&self) -> usize {
        self.full_of_free.len()
    }

    #[inline]
    pub fn free(&self, node: usize, comp: usize) -> Option<usize> {
        self.free_of_full[3 * node + comp]
    }

    pub fn full_index(&self, free: usize) -> usize {
        self.full_of_free[free]
    }

    /// Embeds a vector of unknowns into the full nodal vector (clamped entries zero).
    pub fn expand(&self, free: &[f64]) -> Vec<f64> {
        assert_eq!(free.len(), self.num_free());
        let mut full = vec![0.0; self.num_full()];
        for (k, &i) in self.full_of_free.iter().enumerate() {
            full[i] = free[k];
        }
        full
    }

    /// Restricts a full nodal vector to the unknowns.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        assert_eq!(full.len(), self.num_full());
        self.full_of_free.iter().map(|&i| full[i]).collect()
    }
}

/// Prism mesh of `ω × [-1, 1]` obtained by extruding a [`Mesh2D`] through
/// `layers` equal layers with Lagrange order 1 or 2 in `x3`.
///
/// Node `level · n2d + i` sits above in-plane node `i`; a node is clamped
/// exactly when its in-plane node is.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh3D {
    base: Mesh2D,
    layers: usize,
    order: usize,
    levels: Vec<f64>,
}

impl Mesh3D {
    pub fn extrude(base: &Mesh2D, layers: usize, order: usize) -> Result<Self> {
        if layers < 1 {
            return Err(Error::InvalidMesh("at least one layer is required".into()));
        }
        if !(1..=2).contains(&order) {
            return Err(Error::InvalidMesh(format!(
                "through-thickness order {order} is not 1 or 2"
            )));
        }
        let n = layers * order;
        let levels = (0..=n).map(|k| -1.0 + 2.0 * k as f64 / n as f64).collect();
        Ok(Self {
            base: base.clone(),
            layers,
            order,
            levels,
        })
    }

    pub fn base(&self) -> &Mesh2D {
        &self.base
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn num_nodes(&self) -> usize {
        self.levels.len() * self.base.num_nodes()
    }

    pub fn num_elements(&self) -> usize {
        self.layers * self.base.num_elements()
    }

    pub fn node_id(&self, level: usize, node2d: usize) -> usize {
        level * self.base.num_nodes() + node2d
    }

    /// `(in-plane node, level)` of a 3D node.
    pub fn split_node(&self, node: usize) -> (usize, usize) {
        let n2 = self.base.num_nodes();
        (node % n2, node / n2)
    }

    pub fn is_clamped(&self, node: usize) -> bool {
        self.base.is_clamped(node % self.base.num_nodes())
    }

    /// `(in-plane element, layer)` of a prism.
    pub fn split_element(&self, e: usize) -> (usize, usize) {
        (e % self.base.num_elements(), e / self.base.num_elements())
    }

    /// Levels spanned by `layer`, bottom to top.
    pub fn layer_levels(&self, layer: usize) -> std::ops::RangeInclusive<usize> {
        layer * self.order..=(layer + 1) * self.order
    }

    /// Node ids of prism `e`, ordered level-major: `[level 0: tri6, level 1: tri6, ...]`.
    pub fn element_nodes(&self, e: usize) -> Vec<usize> {
        let (e2, layer) = self.split_element(e);
        let tri = self.base.elements()[e2];
        self.layer_levels(layer)
            .flat_map(|lv| tri.iter().map(move |&i| (lv, i)))
            .map(|(lv, i)| self.node_id(lv, i))
            .collect()
    }

    /// Coordinates `(y1, y2, x3)` of a node.
    pub fn node_coords(&self, node: usize) -> [f64; 3] {
        let (i, lv) = self.split_node(node);
        let p = self.base.nodes()[i];
        [p[0], p[1], self.levels[lv]]
    }
}
