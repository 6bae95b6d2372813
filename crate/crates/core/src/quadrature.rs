//! Fixed quadrature rules on edges and triangles.

use crate::mesh::Point;
use crate::scalar::Scalar;

/// Two-point Gauss rule on the segment `a -> b`: points and weights that sum to 1.
/// Exact for cubics in the arc-length parameter.
pub fn gauss2_edge<T: Scalar>(a: Point<T>, b: Point<T>) -> [(Point<T>, T); 2] {
    let s = T::lit(0.5 / 3f64.sqrt());
    let mid = [(a[0] + b[0]) * T::half(), (a[1] + b[1]) * T::half()];
    let d = [b[0] - a[0], b[1] - a[1]];
    [
        ([mid[0] - s * d[0], mid[1] - s * d[1]], T::half()),
        ([mid[0] + s * d[0], mid[1] + s * d[1]], T::half()),
    ]
}

/// Seven-point degree-5 rule; weights sum to 1 (multiply by area).
pub fn triangle7<T: Scalar>(p: &[Point<T>; 3]) -> [(Point<T>, T); 7] {
    const RULE: [([f64; 3], f64); 7] = [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
        (
            [0.059715871789770, 0.470142064105115, 0.470142064105115],
            0.132394152788506,
        ),
        (
            [0.470142064105115, 0.059715871789770, 0.470142064105115],
            0.132394152788506,
        ),
        (
            [0.470142064105115, 0.470142064105115, 0.059715871789770],
            0.132394152788506,
        ),
        (
            [0.797426985353087, 0.101286507323456, 0.101286507323456],
            0.125939180544827,
        ),
        (
            [0.101286507323456, 0.797426985353087, 0.101286507323456],
            0.125939180544827,
        ),
        (
            [0.101286507323456, 0.101286507323456, 0.797426985353087],
            0.125939180544827,
        ),
    ];
    RULE.map(|(l, w)| {
        let l = l.map(T::lit);
        let x = l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0];
        let y = l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1];
        ([x, y], T::lit(w))
    })
}
