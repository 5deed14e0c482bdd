//! Continuous Lagrange shape functions on the reference triangle.
//!
//! Basis functions are products of the 1-D factors
//! `P_a(λ) = Π_{m<a} (lλ - m)/(m+1)` in the barycentric coordinates, indexed by
//! the multi-index `(a, b, c)` with `a + b + c = l`.

/// Local node layout: 3 vertex nodes, `l - 1` nodes per edge (edges
/// `(v0,v1)`, `(v1,v2)`, `(v2,v0)`, each traversed from its first vertex),
/// then interior nodes.
#[derive(Clone, Debug)]
pub struct LagrangeElement {
    pub degree: usize,
    pub nodes: Vec<[usize; 3]>,
}

impl LagrangeElement {
    pub fn new(degree: usize) -> Self {
        assert!((1..=4).contains(&degree), "unsupported Lagrange degree {degree}");
        let l = degree;
        let mut nodes = vec![[l, 0, 0], [0, l, 0], [0, 0, l]];
        for k in 0..3 {
            for m in 1..l {
                let mut idx = [0; 3];
                idx[k] = l - m;
                idx[(k + 1) % 3] = m;
                nodes.push(idx);
            }
        }
        for b in 1..l {
            for c in 1..l {
                if b + c < l {
                    nodes.push([l - b - c, b, c]);
                }
            }
        }
        LagrangeElement { degree, nodes }
    }

    pub fn n_local(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_interior(&self) -> usize {
        let l = self.degree;
        if l < 3 {
            0
        } else {
            (l - 1) * (l - 2) / 2
        }
    }

    /// Reference coordinates `(ξ, η)` of local node `i`.
    pub fn node_ref_coords(&self, i: usize) -> [f64; 2] {
        let l = self.degree as f64;
        let [_, b, c] = self.nodes[i];
        [b as f64 / l, c as f64 / l]
    }

    /// Values and reference gradients `(∂ξ, ∂η)` of all local basis functions.
    pub fn eval(&self, xi: f64, eta: f64, values: &mut [f64], grads: &mut [[f64; 2]]) {
        let lam = [1.0 - xi - eta, xi, eta];
        let l = self.degree;
        // factors[k][a] = (P_a(λ_k), P_a'(λ_k))
        let mut factors = [[(0.0, 0.0); 5]; 3];
        for k in 0..3 {
            for a in 0..=l {
                factors[k][a] = axis_factor(l, a, lam[k]);
            }
        }
        for (i, idx) in self.nodes.iter().enumerate() {
            let (p0, d0) = factors[0][idx[0]];
            let (p1, d1) = factors[1][idx[1]];
            let (p2, d2) = factors[2][idx[2]];
            values[i] = p0 * p1 * p2;
            let dl0 = d0 * p1 * p2;
            let dl1 = p0 * d1 * p2;
            let dl2 = p0 * p1 * d2;
            grads[i] = [dl1 - dl0, dl2 - dl0];
        }
    }
}

fn axis_factor(l: usize, a: usize, lam: f64) -> (f64, f64) {
    let lf = l as f64;
    let mut p = 1.0;
    let mut d = 0.0;
    for m in 0..a {
        let mf = m as f64;
        let f = (lf * lam - mf) / (mf + 1.0);
        let df = lf / (mf + 1.0);
        d = d * f + p * df;
        p *= f;
    }
    (p, d)
}
