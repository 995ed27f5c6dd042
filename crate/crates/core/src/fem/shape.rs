//! Lagrange shape functions on reference elements.

/// Quadratic triangle; node order: three vertices, then the midpoints of
/// edges (0,1), (1,2), (2,0).
pub fn p2_triangle(xi: [f64; 2]) -> ([f64; 6], [[f64; 2]; 6]) {
    let (x, y) = (xi[0], xi[1]);
    let l0 = 1.0 - x - y;
    let n = [
        l0 * (2.0 * l0 - 1.0),
        x * (2.0 * x - 1.0),
        y * (2.0 * y - 1.0),
        4.0 * l0 * x,
        4.0 * x * y,
        4.0 * y * l0,
    ];
    let d = [
        [1.0 - 4.0 * l0, 1.0 - 4.0 * l0],
        [4.0 * x - 1.0, 0.0],
        [0.0, 4.0 * y - 1.0],
        [4.0 * (l0 - x), -4.0 * x],
        [4.0 * y, 4.0 * x],
        [-4.0 * y, 4.0 * (l0 - y)],
    ];
    (n, d)
}

/// Reference coordinates of the six P2 triangle nodes.
pub const P2_NODES: [[f64; 2]; 6] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.5, 0.0], [0.5, 0.5], [0.0, 0.5]];

/// Lagrange basis of order 1 or 2 on `[-1, 1]` with equispaced nodes.
/// Returns values and derivatives; unused slots are zero.
pub fn lagrange_1d(order: usize, z: f64) -> ([f64; 3], [f64; 3]) {
    match order {
        1 => ([0.5 * (1.0 - z), 0.5 * (1.0 + z), 0.0], [-0.5, 0.5, 0.0]),
        2 => (
            [0.5 * z * (z - 1.0), 1.0 - z * z, 0.5 * z * (z + 1.0)],
            [z - 0.5, -2.0 * z, z + 0.5],
        ),
        _ => panic!("unsupported through-thickness order {order}"),
    }
}
