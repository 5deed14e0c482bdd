//! Quadrature on the reference triangle `(0,0), (1,0), (0,1)`.
//!
//! Weights sum to the reference area 1/2.

#[derive(Clone, Debug)]
pub struct TriangleQuadrature {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    /// Total polynomial degree integrated exactly.
    pub degree: usize,
}

impl TriangleQuadrature {
    /// Cheapest rule in this module that is exact for total degree `degree`.
    ///
    /// Symmetric rules are used up to degree 8; beyond that a collapsed
    /// Gauss–Legendre product rule.
    pub fn for_degree(degree: usize) -> Self {
        match degree {
            0..=5 => Self::strang_fix_7(),
            6..=8 => Self::dunavant_16(),
            _ => Self::collapsed_gauss(degree.div_ceil(2) + 1),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// 7-point rule of degree 5.
    pub fn strang_fix_7() -> Self {
        let s15 = 15f64.sqrt();
        let a1 = (6.0 - s15) / 21.0;
        let a2 = (6.0 + s15) / 21.0;
        let w1 = (155.0 - s15) / 1200.0;
        let w2 = (155.0 + s15) / 1200.0;
        let mut b = Builder::default();
        b.centroid(9.0 / 40.0);
        b.orbit3(a1, w1);
        b.orbit3(a2, w2);
        b.finish(5)
    }

    /// 16-point rule of degree 8 with positive weights.
    pub fn dunavant_16() -> Self {
        let mut b = Builder::default();
        b.centroid(0.144_315_607_677_787);
        b.orbit3(0.459_292_588_292_723, 0.095_091_634_267_285);
        b.orbit3(0.170_569_307_751_760, 0.103_217_370_534_718);
        b.orbit3(0.050_547_228_317_031, 0.032_458_497_623_198);
        b.orbit6(0.008_394_777_409_958, 0.263_112_829_634_638, 0.027_230_314_174_435);
        b.finish(8)
    }

    /// `n × n` Gauss–Legendre rule mapped through the Duffy collapse;
    /// exact for total degree `2n - 2`.
    pub fn collapsed_gauss(n: usize) -> Self {
        let (x, w) = gauss_legendre_unit(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let u = x[i];
                let v = x[j];
                points.push([u, v * (1.0 - u)]);
                weights.push(w[i] * w[j] * (1.0 - u));
            }
        }
        TriangleQuadrature { points, weights, degree: 2 * n - 2 }
    }
}

#[derive(Default)]
struct Builder {
    points: Vec<[f64; 2]>,
    weights: Vec<f64>,
}

impl Builder {
    // Weights below are normalised to total 1 and scaled by the area here.
    fn centroid(&mut self, w: f64) {
        self.points.push([1.0 / 3.0, 1.0 / 3.0]);
        self.weights.push(0.5 * w);
    }

    fn orbit3(&mut self, a: f64, w: f64) {
        let b = 1.0 - 2.0 * a;
        for p in [[a, a], [b, a], [a, b]] {
            self.points.push(p);
            self.weights.push(0.5 * w);
        }
    }

    fn orbit6(&mut self, a: f64, b: f64, w: f64) {
        let c = 1.0 - a - b;
        for p in [[a, b], [b, a], [a, c], [c, a], [b, c], [c, b]] {
            self.points.push(p);
            self.weights.push(0.5 * w);
        }
    }

    fn finish(self, degree: usize) -> TriangleQuadrature {
        TriangleQuadrature { points: self.points, weights: self.weights, degree }
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        dp = if d != 0.0 { d } else { dp };
        x[i] = 0.5 * (1.0 - z);
        w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// `P_n(z)` and `P_n'(z)` by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}
