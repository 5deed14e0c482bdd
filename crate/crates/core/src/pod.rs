//! Proper orthogonal decomposition by the method of snapshots.

use std::io::Write;
use std::path::Path;

use faer::linalg::solvers::Solve;
use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::assembly::Discretization;
use crate::eigen::jacobi_eigen;
use crate::error::{Error, Result};
use crate::fe_space::{FeFunction, SpaceSpec};
use crate::snapshots::{SnapshotSet, SnapshotVariant};
use crate::sparse::SparseOperator;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InnerProduct {
    L2,
    /// The `H¹₀` seminorm product `(∇u, ∇v)`.
    H1,
}

impl InnerProduct {
    pub fn as_str(&self) -> &'static str {
        match self {
            InnerProduct::L2 => "L2",
            InnerProduct::H1 => "H1",
        }
    }

    pub fn operator<'a>(&self, disc: &'a Discretization) -> &'a SparseOperator {
        match self {
            InnerProduct::L2 => &disc.forms.mass,
            InnerProduct::H1 => &disc.forms.stiffness,
        }
    }

    /// Default cut-off on relative singular values.
    pub fn default_threshold(&self) -> f64 {
        match self {
            InnerProduct::L2 => 1e-3,
            InnerProduct::H1 => 1e-2,
        }
    }
}

impl std::str::FromStr for InnerProduct {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "L2" => Ok(InnerProduct::L2),
            "H1" => Ok(InnerProduct::H1),
            _ => Err(format!("unknown inner product {s:?} (expected L2 or H1)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Truncation {
    Rank(usize),
    /// Keep every mode whose relative singular value is at least this value.
    Threshold(f64),
}

#[derive(Clone, Copy, Debug)]
pub struct PodOptions {
    pub truncation: Truncation,
    /// Eigenvalues above `rank_tol · λ₁` count towards the numerical rank.
    pub rank_tol: f64,
}

impl PodOptions {
    pub fn rank(r: usize) -> Self {
        PodOptions { truncation: Truncation::Rank(r), rank_tol: 1e-12 }
    }

    pub fn threshold(t: f64) -> Self {
        PodOptions { truncation: Truncation::Threshold(t), rank_tol: 1e-12 }
    }

    /// Keeps every mode of the numerical rank.
    pub fn full() -> Self {
        PodOptions::threshold(0.0)
    }
}

/// `K_ij = (1/N) (y_i, y_j)_X`.
pub fn correlation_matrix(set: &SnapshotSet, op: &SparseOperator) -> Mat<f64> {
    let n = set.len();
    let xy: Vec<Vec<f64>> = set.members.iter().map(|y| op.matvec(&y.values)).collect();
    let mut k = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = dot(&set.members[i].values, &xy[j]) / n as f64;
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PodBasis {
    pub inner_product: InnerProduct,
    pub r: usize,
    pub d_v: usize,
    /// Full spectrum of the correlation matrix, non-increasing.
    pub eigenvalues: Vec<f64>,
    pub vectors: Vec<FeFunction>,
    /// `M^v_ij = (φ_j, φ_i)`
    pub mass_gram: Vec<Vec<f64>>,
    /// `S^v_ij = (∇φ_j, ∇φ_i)`
    pub stiffness_gram: Vec<Vec<f64>>,
    pub variant: Option<SnapshotVariant>,
    pub tau: f64,
    pub n_snapshots: usize,
    /// Affine shift: reduced states are `offset + Σ a_k φ_k`.
    pub offset: Option<FeFunction>,
    pub space: Option<SpaceSpec>,
}

pub fn compute_pod_basis(set: &SnapshotSet, disc: &Discretization, x: InnerProduct, opts: PodOptions) -> Result<PodBasis> {
    if set.is_empty() {
        return Err(Error::InvalidInput("empty snapshot set".into()));
    }
    if set.n_dofs() != disc.n_velocity() {
        return Err(Error::DimensionMismatch(format!(
            "snapshots have {} DOFs, velocity space has {}",
            set.n_dofs(),
            disc.n_velocity()
        )));
    }
    let op = x.operator(disc);
    let n = set.len();
    let k = correlation_matrix(set, op);
    let eig = jacobi_eigen(&k, 1e-15);
    let lambda1 = eig.values[0];
    if !(lambda1 > 0.0) {
        return Err(Error::InvalidInput("snapshot set is identically zero".into()));
    }
    let d_v = eig.values.iter().take_while(|&&l| l > opts.rank_tol * lambda1).count();
    let r = match opts.truncation {
        Truncation::Rank(r) => {
            if r == 0 || r > d_v {
                return Err(Error::InvalidInput(format!("requested rank {r} outside 1..={d_v}")));
            }
            r
        }
        Truncation::Threshold(t) => {
            let rel = relative_singular_values(&eig.values);
            rel.iter().take(d_v).take_while(|&&s| s >= t).count().max(1)
        }
    };

    let nv = set.n_dofs();
    let mut vectors: Vec<Vec<f64>> = (0..r)
        .map(|kk| {
            let scale = 1.0 / (n as f64 * eig.values[kk]).sqrt();
            let mut phi = vec![0.0; nv];
            for (j, y) in set.members.iter().enumerate() {
                let c = scale * eig.vectors[(j, kk)];
                for (p, v) in phi.iter_mut().zip(&y.values) {
                    *p += c * v;
                }
            }
            phi
        })
        .collect();
    orthonormalize(&mut vectors, op);
    let vectors: Vec<FeFunction> = vectors.into_iter().map(FeFunction::new).collect();
    let mass_gram = gram(&vectors, &disc.forms.mass);
    let stiffness_gram = gram(&vectors, &disc.forms.stiffness);
    Ok(PodBasis {
        inner_product: x,
        r,
        d_v,
        eigenvalues: eig.values,
        vectors,
        mass_gram,
        stiffness_gram,
        variant: Some(set.variant),
        tau: set.tau,
        n_snapshots: n,
        offset: None,
        space: set.space,
    })
}

/// Two passes of modified Gram–Schmidt in the product defined by `op`.
/// Leaves `span{φ_1..φ_k}` unchanged for every `k`.
fn orthonormalize(vectors: &mut [Vec<f64>], op: &SparseOperator) {
    for _ in 0..2 {
        for k in 0..vectors.len() {
            let (done, rest) = vectors.split_at_mut(k);
            let v = &mut rest[0];
            for q in done.iter() {
                let c = dot(v, &op.matvec(q));
                for (a, b) in v.iter_mut().zip(q) {
                    *a -= c * b;
                }
            }
            let norm = dot(v, &op.matvec(v)).sqrt();
            for a in v.iter_mut() {
                *a /= norm;
            }
        }
    }
}

/// Matrix of `(φ_j, φ_i)` in the product defined by `op`.
pub fn gram(vectors: &[FeFunction], op: &SparseOperator) -> Vec<Vec<f64>> {
    let xs: Vec<Vec<f64>> = vectors.iter().map(|v| op.matvec(&v.values)).collect();
    (0..vectors.len())
        .map(|i| (0..vectors.len()).map(|j| dot(&vectors[i].values, &xs[j])).collect())
        .collect()
}

/// `σ_k / (Σ σ_j²)^{1/2}` with `σ_k = √λ_k` (negative round-off clipped).
pub fn relative_singular_values(eigenvalues: &[f64]) -> Vec<f64> {
    let total: f64 = eigenvalues.iter().map(|l| l.max(0.0)).sum();
    eigenvalues.iter().map(|l| (l.max(0.0) / total).sqrt()).collect()
}

impl PodBasis {
    pub fn with_offset(mut self, offset: Option<FeFunction>) -> Self {
        self.offset = offset;
        self
    }

    /// Leading `r` modes of this basis.
    pub fn truncate(&self, r: usize) -> Result<PodBasis> {
        if r == 0 || r > self.r {
            return Err(Error::InvalidInput(format!("cannot truncate rank {} basis to {r}", self.r)));
        }
        let cut = |g: &Vec<Vec<f64>>| g[..r].iter().map(|row| row[..r].to_vec()).collect();
        Ok(PodBasis {
            r,
            vectors: self.vectors[..r].to_vec(),
            mass_gram: cut(&self.mass_gram),
            stiffness_gram: cut(&self.stiffness_gram),
            ..self.clone()
        })
    }

    /// `Σ_{k>r} λ_k` over the non-negative part of the spectrum.
    pub fn tail(&self, r: usize) -> f64 {
        self.eigenvalues.iter().skip(r).map(|l| l.max(0.0)).sum()
    }

    pub fn trace(&self) -> f64 {
        self.tail(0)
    }

    pub fn relative_singular_values(&self) -> Vec<f64> {
        relative_singular_values(&self.eigenvalues)
    }

    /// `(v, φ_k)_X` for every retained mode.
    pub fn coords(&self, disc: &Discretization, v: &[f64]) -> Vec<f64> {
        let xv = self.inner_product.operator(disc).matvec(v);
        self.vectors.iter().map(|phi| dot(&phi.values, &xv)).collect()
    }

    /// `Σ a_k φ_k` (without the offset).
    pub fn combine(&self, a: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.vectors[0].len()];
        for (c, phi) in a.iter().zip(&self.vectors) {
            for (o, p) in out.iter_mut().zip(&phi.values) {
                *o += c * p;
            }
        }
        out
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let meta = BasisMeta {
            format: BASIS_FORMAT.into(),
            inner_product: self.inner_product,
            r: self.r,
            d_v: self.d_v,
            n_snapshots: self.n_snapshots,
            variant: self.variant,
            tau: self.tau,
            has_offset: self.offset.is_some(),
            space: self.space,
            mass_gram: self.mass_gram.clone(),
            stiffness_gram: self.stiffness_gram.clone(),
        };
        std::fs::write(dir.join("meta.json"), serde_json::to_string_pretty(&meta)?)?;
        let mut w = std::io::BufWriter::new(std::fs::File::create(dir.join("eigenvalues.csv"))?);
        writeln!(w, "k,lambda_k,sigma_rel")?;
        for (k, (l, s)) in self.eigenvalues.iter().zip(self.relative_singular_values()).enumerate() {
            writeln!(w, "{},{:.16e},{:.16e}", k + 1, l, s)?;
        }
        w.flush()?;
        for (k, phi) in self.vectors.iter().enumerate() {
            phi.write_binary(&dir.join(format!("phi_{k:05}.bin")))?;
        }
        if let Some(off) = &self.offset {
            off.write_binary(&dir.join("offset.bin"))?;
        }
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let meta_path = dir.join("meta.json");
        let meta: BasisMeta = serde_json::from_str(&std::fs::read_to_string(&meta_path)?)?;
        let bad = |path: &Path, reason: String| Error::Format { path: path.display().to_string(), reason };
        if meta.format != BASIS_FORMAT {
            return Err(bad(&meta_path, format!("unsupported format tag {:?}", meta.format)));
        }
        let eig_path = dir.join("eigenvalues.csv");
        let text = std::fs::read_to_string(&eig_path)?;
        let mut eigenvalues = Vec::new();
        for (i, line) in text.lines().enumerate().skip(1) {
            let field = line.split(',').nth(1).ok_or_else(|| bad(&eig_path, format!("line {}: missing column", i + 1)))?;
            eigenvalues.push(field.trim().parse::<f64>().map_err(|e| bad(&eig_path, format!("line {}: {e}", i + 1)))?);
        }
        let vectors = (0..meta.r)
            .map(|k| FeFunction::read_binary(&dir.join(format!("phi_{k:05}.bin"))))
            .collect::<Result<Vec<_>>>()?;
        let offset = if meta.has_offset { Some(FeFunction::read_binary(&dir.join("offset.bin"))?) } else { None };
        Ok(PodBasis {
            inner_product: meta.inner_product,
            r: meta.r,
            d_v: meta.d_v,
            eigenvalues,
            vectors,
            mass_gram: meta.mass_gram,
            stiffness_gram: meta.stiffness_gram,
            variant: meta.variant,
            tau: meta.tau,
            n_snapshots: meta.n_snapshots,
            offset,
            space: meta.space,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct BasisMeta {
    format: String,
    inner_product: InnerProduct,
    r: usize,
    d_v: usize,
    n_snapshots: usize,
    variant: Option<SnapshotVariant>,
    tau: f64,
    has_offset: bool,
    space: Option<SpaceSpec>,
    mass_gram: Vec<Vec<f64>>,
    stiffness_gram: Vec<Vec<f64>>,
}

const BASIS_FORMAT: &str = "podlab-basis-1";

/// Coordinates and lift of the X-orthogonal projection of `v`.
pub fn project_onto_basis(basis: &PodBasis, disc: &Discretization, v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let a = basis.coords(disc, v);
    let lifted = basis.combine(&a);
    (a, lifted)
}

/// Gram matrices and the spectral norms used by the inverse inequalities.
#[derive(Clone, Debug)]
pub struct GramReport {
    pub mass: Vec<Vec<f64>>,
    pub stiffness: Vec<Vec<f64>>,
    /// `‖(M^v)^{-1}‖₂`
    pub inv_mass_norm: f64,
    /// `‖S^v‖₂`
    pub stiffness_norm: f64,
}

fn to_mat(a: &[Vec<f64>]) -> Mat<f64> {
    Mat::from_fn(a.len(), a.len(), |i, j| a[i][j])
}

/// Largest eigenvalue of a symmetric positive semi-definite matrix, by power
/// iteration on `apply` until the Rayleigh quotient settles to `tol`.
pub fn power_iteration(n: usize, tol: f64, mut apply: impl FnMut(&[f64]) -> Vec<f64>) -> f64 {
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7 + 3) % 11) as f64).collect();
    let norm = dot(&x, &x).sqrt();
    x.iter_mut().for_each(|v| *v /= norm);
    let mut rq = 0.0f64;
    for _ in 0..100_000 {
        let y = apply(&x);
        let new_rq = dot(&x, &y);
        let ny = dot(&y, &y).sqrt();
        if ny == 0.0 {
            return 0.0;
        }
        x = y.iter().map(|v| v / ny).collect();
        if (new_rq - rq).abs() <= tol * new_rq.abs() {
            // for unit x, ‖Ax‖ lies between the Rayleigh quotient and λ_max
            return ny.max(new_rq);
        }
        rq = new_rq;
    }
    rq
}

pub fn pod_gram_matrices(basis: &PodBasis) -> Result<GramReport> {
    let r = basis.r;
    let m = to_mat(&basis.mass_gram);
    let s = to_mat(&basis.stiffness_gram);
    let lu = m.partial_piv_lu();
    let probe = lu.solve(Mat::<f64>::identity(r, r));
    if (0..r).any(|i| (0..r).any(|j| !probe[(i, j)].is_finite())) {
        return Err(Error::SingularSystem("POD mass matrix is singular".into()));
    }
    let inv_mass_norm = power_iteration(r, 1e-13, |x| {
        let rhs = Mat::from_fn(r, 1, |i, _| x[i]);
        let y = lu.solve(&rhs);
        (0..r).map(|i| y[(i, 0)]).collect()
    });
    let stiffness_norm = power_iteration(r, 1e-13, |x| (0..r).map(|i| (0..r).map(|j| s[(i, j)] * x[j]).sum()).collect());
    Ok(GramReport { mass: basis.mass_gram.clone(), stiffness: basis.stiffness_gram.clone(), inv_mass_norm, stiffness_norm })
}

/// Mean-square projection error `(1/N) Σ ‖y_j − P_r y_j‖²_X` for
/// `r = 1..=basis.r`, computed from explicit residual vectors.
pub fn projection_error_curve(set: &SnapshotSet, basis: &PodBasis, disc: &Discretization) -> Vec<f64> {
    let op = basis.inner_product.operator(disc);
    let n = set.len() as f64;
    let mut curve = vec![0.0; basis.r];
    for y in &set.members {
        let coords = basis.coords(disc, &y.values);
        let mut res = y.values.clone();
        for (k, (c, phi)) in coords.iter().zip(&basis.vectors).enumerate() {
            for (a, p) in res.iter_mut().zip(&phi.values) {
                *a -= c * p;
            }
            curve[k] += op.bilinear(&res, &res) / n;
        }
    }
    curve
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn disc() -> Discretization {
        Discretization::from_spec(&SpaceSpec::unit_square(4, 2)).unwrap()
    }

    fn set_of(members: Vec<Vec<f64>>) -> SnapshotSet {
        SnapshotSet {
            variant: SnapshotVariant::RawVelocities,
            tau: 1.0,
            members: members.into_iter().map(FeFunction::new).collect(),
            source: String::new(),
            space: None,
        }
    }

    fn random_field(d: &Discretization, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut u = FeFunction::new((0..d.n_velocity()).map(|_| rng.gen_range(-1.0..1.0)).collect());
        d.space.apply_homogeneous_dirichlet(&mut u);
        u.values
    }

    fn scale_to(d: &Discretization, x: InnerProduct, v: &[f64], norm2: f64) -> Vec<f64> {
        let n = x.operator(d).bilinear(v, v).sqrt();
        v.iter().map(|a| a * norm2.sqrt() / n).collect()
    }

    #[test]
    fn correlation_of_orthogonal_pair_is_identity() {
        let d = disc();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_field(&d, &mut rng);
        let mut b = random_field(&d, &mut rng);
        let m = &d.forms.mass;
        let c = m.bilinear(&a, &b) / m.bilinear(&a, &a);
        b.iter_mut().zip(&a).for_each(|(x, y)| *x -= c * y);
        let set = set_of(vec![scale_to(&d, InnerProduct::L2, &a, 2.0), scale_to(&d, InnerProduct::L2, &b, 2.0)]);
        let k = correlation_matrix(&set, m);
        for i in 0..2 {
            for j in 0..2 {
                assert!((k[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
        let basis = compute_pod_basis(&set, &d, InnerProduct::L2, PodOptions::rank(2)).unwrap();
        assert!(basis.eigenvalues.iter().all(|l| (l - 1.0).abs() < 1e-12));
        // members are recovered up to sign (and rotation within the degenerate pair)
        for y in &set.members {
            let (_, lifted) = project_onto_basis(&basis, &d, &y.values);
            let diff: Vec<f64> = lifted.iter().zip(&y.values).map(|(a, b)| a - b).collect();
            assert!(d.l2_norm(&diff) < 1e-12);
        }
    }

    #[test]
    fn single_member() {
        let d = disc();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let y = scale_to(&d, InnerProduct::H1, &random_field(&d, &mut rng), 4.0);
        let set = set_of(vec![y.clone()]);
        let basis = compute_pod_basis(&set, &d, InnerProduct::H1, PodOptions::rank(1)).unwrap();
        assert!((basis.eigenvalues[0] - 4.0).abs() < 1e-12);
        let sign = basis.vectors[0].values[0].signum() * y[0].signum();
        for (p, v) in basis.vectors[0].values.iter().zip(&y) {
            assert!((p - sign * v / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn correlation_matches_brute_force() {
        let d = disc();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let members: Vec<Vec<f64>> = (0..5).map(|_| random_field(&d, &mut rng)).collect();
        let set = set_of(members.clone());
        for x in [InnerProduct::L2, InnerProduct::H1] {
            let k = correlation_matrix(&set, x.operator(&d));
            for i in 0..5 {
                for j in 0..5 {
                    // direct double loop over matrix entries
                    let op = x.operator(&d);
                    let mut acc = 0.0;
                    for r in 0..op.rows {
                        for (c, v) in op.row(r) {
                            acc += members[i][r] * v * members[j][c];
                        }
                    }
                    assert!((k[(i, j)] - acc / 5.0).abs() < 1e-12 * (1.0 + acc.abs()));
                }
            }
        }
    }

    #[test]
    fn duplicate_members_are_rank_one() {
        let d = disc();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let y = random_field(&d, &mut rng);
        let set = set_of(vec![y.clone(), y]);
        let basis = compute_pod_basis(&set, &d, InnerProduct::L2, PodOptions::full()).unwrap();
        assert_eq!(basis.d_v, 1);
        assert!(compute_pod_basis(&set, &d, InnerProduct::L2, PodOptions::rank(2)).is_err());
        let zero = set_of(vec![vec![0.0; d.n_velocity()]]);
        assert!(compute_pod_basis(&zero, &d, InnerProduct::L2, PodOptions::full()).is_err());
    }

    #[test]
    fn projection_properties() {
        let d = disc();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let set = set_of((0..6).map(|_| random_field(&d, &mut rng)).collect());
        for x in [InnerProduct::L2, InnerProduct::H1] {
            let op = x.operator(&d);
            let basis = compute_pod_basis(&set, &d, x, PodOptions::rank(4)).unwrap();
            let (a, _) = project_onto_basis(&basis, &d, &basis.vectors[0].values);
            assert!((a[0] - 1.0).abs() < 1e-12 && a[1..].iter().all(|c| c.abs() < 1e-12));
            let v = random_field(&d, &mut rng);
            let (a, lifted) = project_onto_basis(&basis, &d, &v);
            let (a2, _) = project_onto_basis(&basis, &d, &lifted);
            assert!(a.iter().zip(&a2).all(|(p, q)| (p - q).abs() < 1e-12));
            let res: Vec<f64> = v.iter().zip(&lifted).map(|(p, q)| p - q).collect();
            let pyth = op.bilinear(&res, &res) + op.bilinear(&lifted, &lifted);
            assert!((pyth - op.bilinear(&v, &v)).abs() < 1e-10 * op.bilinear(&v, &v));
            let (orth, _) = project_onto_basis(&basis, &d, &res);
            assert!(orth.iter().all(|c| c.abs() < 1e-10));
        }
    }

    #[test]
    fn threshold_truncation_counts_modes() {
        assert_eq!(relative_singular_values(&[3.0, 1.0, 0.0]), vec![(0.75f64).sqrt(), 0.5, 0.0]);
        let d = disc();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let base: Vec<Vec<f64>> = (0..3).map(|_| random_field(&d, &mut rng)).collect();
        // members with a strongly graded spectrum
        let set = set_of(vec![base[0].clone(), base[1].iter().map(|v| 1e-2 * v).collect(), base[2].iter().map(|v| 1e-5 * v).collect()]);
        let basis = compute_pod_basis(&set, &d, InnerProduct::L2, PodOptions::threshold(1e-3)).unwrap();
        assert_eq!(basis.r, 2);
        assert_eq!(basis.d_v, 3);
    }

    #[test]
    fn gram_norms_and_inverse_inequalities() {
        let d = disc();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let set = set_of((0..6).map(|_| random_field(&d, &mut rng)).collect());
        for x in [InnerProduct::L2, InnerProduct::H1] {
            let basis = compute_pod_basis(&set, &d, x, PodOptions::rank(5)).unwrap();
            let rep = pod_gram_matrices(&basis).unwrap();
            let identity = if x == InnerProduct::L2 { &rep.mass } else { &rep.stiffness };
            for i in 0..5 {
                for j in 0..5 {
                    assert!((identity[i][j] - if i == j { 1.0 } else { 0.0 }).abs() < 1e-10);
                }
            }
            // cross-check the power iterations against the Jacobi spectrum
            let s_eig = jacobi_eigen(&to_mat(&rep.stiffness), 1e-15);
            let m_eig = jacobi_eigen(&to_mat(&rep.mass), 1e-15);
            assert!((rep.stiffness_norm / s_eig.values[0] - 1.0).abs() < 1e-8);
            assert!((rep.inv_mass_norm * m_eig.values[4] - 1.0).abs() < 1e-8);
            for _ in 0..50 {
                let a: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let v = basis.combine(&a);
                let grad2 = d.forms.stiffness.bilinear(&v, &v);
                let l2 = d.forms.mass.bilinear(&v, &v);
                assert!(grad2 <= rep.stiffness_norm * l2 * (1.0 + 1e-12) || x == InnerProduct::H1);
                assert!(grad2 <= rep.inv_mass_norm * l2 * (1.0 + 1e-12) || x == InnerProduct::L2);
            }
        }
    }

    #[test]
    fn persistence_round_trip() {
        let d = disc();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let set = set_of((0..4).map(|_| random_field(&d, &mut rng)).collect());
        let basis = compute_pod_basis(&set, &d, InnerProduct::H1, PodOptions::rank(3))
            .unwrap()
            .with_offset(Some(FeFunction::new(random_field(&d, &mut rng))));
        let dir = tempfile::tempdir().unwrap();
        basis.write(dir.path()).unwrap();
        assert_eq!(PodBasis::read(dir.path()).unwrap(), basis);
        let csv = std::fs::read_to_string(dir.path().join("eigenvalues.csv")).unwrap();
        assert_eq!(csv.lines().count(), 5);
    }
}
