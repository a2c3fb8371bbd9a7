//! Finite-sum affine variational inequality instances.
//!
//! A problem is a list of `n` components `F_i(z) = Q_i z + b_i` on `R^d`;
//! the operator being solved is their arithmetic mean. Generators build the
//! strongly monotone quadratic game, the bilinear game and the linear WGAN
//! toy, all deterministically from a seed. Spectral constants are measured
//! from the assembled matrices, and the solution set (a point or an affine
//! subspace) is computed once at construction.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Svd};
use crate::rng::SeededRng;

/// Lower bound on the symmetric-part spectrum accepted as monotone,
/// relative to `max(1, ||sym(Q)||_F)`.
pub const MONOTONE_TOL: f64 = 1e-9;

/// Relative residual allowed for the computed solution.
pub const SOLUTION_RTOL: f64 = 1e-8;

/// Something that exposes `n` component operators on `R^dim`.
///
/// Solvers are written against this trait so a wrapper can observe exactly
/// which components are queried.
pub trait ComponentOperator {
    fn dim(&self) -> usize;
    fn num_components(&self) -> usize;
    /// `out = F_i(z)`.
    fn apply_component(&self, i: usize, z: &[f64], out: &mut [f64]);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    QuadraticScsc,
    Bilinear,
    WganToy,
    ExplicitAffine,
}

impl ProblemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProblemKind::QuadraticScsc => "quadratic-scsc",
            ProblemKind::Bilinear => "bilinear",
            ProblemKind::WganToy => "wgan-toy",
            ProblemKind::ExplicitAffine => "explicit-affine",
        }
    }
}

/// Monotonicity class of the mean operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemClass {
    StronglyMonotone,
    AffineMonotone,
    Monotone,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadraticParams {
    pub n: usize,
    pub d: usize,
    pub mu: f64,
    #[serde(rename = "L")]
    pub l: f64,
    /// Drop the linear terms `a_i`, `c_i` (they are still drawn).
    #[serde(default, skip_serializing_if = "is_false")]
    pub zero_offsets: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BilinearParams {
    pub n: usize,
    pub d: usize,
    pub lambda_min_plus: f64,
    #[serde(rename = "L_max")]
    pub l_max: f64,
    #[serde(default, skip_serializing_if = "is_false")]
    pub zero_offsets: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WganParams {
    pub d: usize,
    pub n: usize,
    pub mean: Vec<f64>,
    /// Covariance of both the data and the generator noise is `scale * I`.
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitParams {
    pub components: Vec<ComponentDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDoc {
    /// Row-major `d x d`.
    #[serde(rename = "Q")]
    pub q: Vec<f64>,
    pub b: Vec<f64>,
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// Generator parameters, one variant per problem kind.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorParams {
    QuadraticScsc(QuadraticParams),
    Bilinear(BilinearParams),
    WganToy(WganParams),
    ExplicitAffine(ExplicitParams),
}

impl GeneratorParams {
    pub fn kind(&self) -> ProblemKind {
        match self {
            GeneratorParams::QuadraticScsc(_) => ProblemKind::QuadraticScsc,
            GeneratorParams::Bilinear(_) => ProblemKind::Bilinear,
            GeneratorParams::WganToy(_) => ProblemKind::WganToy,
            GeneratorParams::ExplicitAffine(_) => ProblemKind::ExplicitAffine,
        }
    }

    /// Parses the kind-specific parameter object, reporting bad keys with
    /// their path below `prefix`.
    pub fn from_json(kind: ProblemKind, value: &serde_json::Value, prefix: &str) -> Result<Self> {
        fn typed<T: serde::de::DeserializeOwned>(v: &serde_json::Value, prefix: &str) -> Result<T> {
            serde_path_to_error::deserialize(v).map_err(|e| {
                let inner = e.path().to_string();
                let path = if inner == "." {
                    prefix.to_string()
                } else {
                    format!("{prefix}.{inner}")
                };
                Error::config(path, e.into_inner().to_string())
            })
        }
        Ok(match kind {
            ProblemKind::QuadraticScsc => GeneratorParams::QuadraticScsc(typed(value, prefix)?),
            ProblemKind::Bilinear => GeneratorParams::Bilinear(typed(value, prefix)?),
            ProblemKind::WganToy => GeneratorParams::WganToy(typed(value, prefix)?),
            ProblemKind::ExplicitAffine => GeneratorParams::ExplicitAffine(typed(value, prefix)?),
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        let v = match self {
            GeneratorParams::QuadraticScsc(p) => serde_json::to_value(p),
            GeneratorParams::Bilinear(p) => serde_json::to_value(p),
            GeneratorParams::WganToy(p) => serde_json::to_value(p),
            GeneratorParams::ExplicitAffine(p) => serde_json::to_value(p),
        };
        v.expect("parameter structs serialize")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffineComponent {
    pub q: Matrix,
    pub b: Vec<f64>,
}

impl AffineComponent {
    pub fn new(q: Matrix, b: Vec<f64>) -> Result<Self> {
        if !q.is_square() || q.rows() != b.len() {
            return Err(Error::contract(format!(
                "component needs a square Q matching b: Q is {}x{}, b has {} entries",
                q.rows(),
                q.cols(),
                b.len()
            )));
        }
        if !q.is_finite() || b.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("component has non-finite entries".into()));
        }
        Ok(Self { q, b })
    }

    pub fn apply_into(&self, z: &[f64], out: &mut [f64]) {
        self.q.mul_vec_into(z, out);
        for (o, b) in out.iter_mut().zip(&self.b) {
            *o += b;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConstants {
    /// Largest singular value of each `Q_i`.
    pub l_i: Vec<f64>,
    pub l_max: f64,
    /// Largest singular value of the averaged `Q`.
    pub l: f64,
    /// Smallest eigenvalue of the symmetric part of the averaged `Q`, or 0.
    pub mu: f64,
    /// Smallest nonzero singular value of the averaged `Q`; `None` when it is the zero matrix.
    pub lambda_min_plus: Option<f64>,
    /// `(2/n) sum L_i^2`
    pub a: f64,
    /// `(1/n) sum ||F_i(z*)||^2` at the min-norm solution.
    pub sigma_star_sq: f64,
    /// `L_max / mu` when `mu > 0`.
    pub kappa: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolutionSet {
    Unique(Vec<f64>),
    /// `{ particular + N t }`, `null_basis` holding orthonormal columns `N`.
    Affine {
        particular: Vec<f64>,
        null_basis: Matrix,
    },
}

impl SolutionSet {
    /// The unique solution or the min-norm point of the affine set.
    pub fn point(&self) -> &[f64] {
        match self {
            SolutionSet::Unique(z) => z,
            SolutionSet::Affine { particular, .. } => particular,
        }
    }

    pub fn is_unique(&self) -> bool {
        matches!(self, SolutionSet::Unique(_))
    }

    /// Squared Euclidean distance from `z` to the set.
    pub fn dist_sq(&self, z: &[f64]) -> f64 {
        match self {
            SolutionSet::Unique(s) => linalg::dist_sq(z, s),
            SolutionSet::Affine {
                particular,
                null_basis,
            } => {
                let mut r = linalg::sub(z, particular);
                for j in 0..null_basis.cols() {
                    let col = null_basis.column(j);
                    let c = linalg::dot(&col, &r);
                    linalg::axpy(-c, &col, &mut r);
                }
                linalg::norm_sq(&r)
            }
        }
    }
}

#[derive(Debug)]
pub struct FiniteSumProblem {
    kind: ProblemKind,
    class: ProblemClass,
    dim: usize,
    components: Vec<AffineComponent>,
    seed: Option<u64>,
    params: Option<GeneratorParams>,
    mean_q: Matrix,
    mean_b: Vec<f64>,
    mu: f64,
    mean_svd: Svd,
    solution: SolutionSet,
    constants: OnceLock<ProblemConstants>,
}

impl Clone for FiniteSumProblem {
    fn clone(&self) -> Self {
        Self {
            kind: self.kind,
            class: self.class,
            dim: self.dim,
            components: self.components.clone(),
            seed: self.seed,
            params: self.params.clone(),
            mean_q: self.mean_q.clone(),
            mean_b: self.mean_b.clone(),
            mu: self.mu,
            mean_svd: self.mean_svd.clone(),
            solution: self.solution.clone(),
            constants: self.constants.clone(),
        }
    }
}

impl FiniteSumProblem {
    /// Validates and assembles a problem from explicit components.
    ///
    /// Fails if the components disagree in dimension, if the mean operator is
    /// not monotone, or if the averaged system `Q z = -b` has no solution.
    pub fn from_components(kind: ProblemKind, components: Vec<AffineComponent>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::Validation("a problem needs at least one component".into()))?;
        let dim = first.b.len();
        if let Some(bad) = components
            .iter()
            .position(|c| c.b.len() != dim || c.q.rows() != dim)
        {
            return Err(Error::Validation(format!(
                "component {bad} has dimension {}, expected {dim}",
                components[bad].b.len()
            )));
        }
        let n = components.len();

        let mut mean_q = Matrix::zeros(dim, dim);
        let mut mean_b = vec![0.0; dim];
        for c in &components {
            mean_q.add_assign(&c.q);
            linalg::axpy(1.0, &c.b, &mut mean_b);
        }
        let mean_q = mean_q.scaled(1.0 / n as f64);
        for v in mean_b.iter_mut() {
            *v /= n as f64;
        }

        let sym = mean_q.symmetric_part();
        let eig = linalg::sym_eigen(&sym)?;
        let lowest = eig.values[0];
        let sym_scale = sym.frobenius_norm();
        if lowest < -MONOTONE_TOL * sym_scale.max(1.0) {
            return Err(Error::Validation(format!(
                "mean operator is not monotone: symmetric part has eigenvalue {lowest:e}"
            )));
        }
        let mu = if lowest > 1e-12 * mean_q.frobenius_norm() {
            lowest
        } else {
            0.0
        };
        let class = if mu > 0.0 {
            ProblemClass::StronglyMonotone
        } else {
            ProblemClass::AffineMonotone
        };

        let mean_svd = linalg::svd(&mean_q)?;
        let neg_b: Vec<f64> = mean_b.iter().map(|v| -v).collect();
        let particular = linalg::pinv_apply(&mean_svd, &neg_b);
        let mut resid = mean_q.mul_vec(&particular);
        linalg::axpy(1.0, &mean_b, &mut resid);
        let resid = linalg::norm(&resid);
        let scale = linalg::norm(&mean_b) + mean_svd.sigma[0] * linalg::norm(&particular);
        if resid > SOLUTION_RTOL * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Infeasible { residual: resid });
        }
        let rank = mean_svd.rank();
        let solution = if rank == dim {
            SolutionSet::Unique(particular)
        } else {
            let mut null_basis = Matrix::zeros(dim, dim - rank);
            for (dst, src) in (rank..dim).enumerate() {
                for r in 0..dim {
                    null_basis[(r, dst)] = mean_svd.v[(r, src)];
                }
            }
            SolutionSet::Affine {
                particular,
                null_basis,
            }
        };

        Ok(Self {
            kind,
            class,
            dim,
            components,
            seed: None,
            params: None,
            mean_q,
            mean_b,
            mu,
            mean_svd,
            solution,
            constants: OnceLock::new(),
        })
    }

    fn with_provenance(mut self, seed: Option<u64>, params: Option<GeneratorParams>) -> Self {
        self.seed = seed;
        self.params = params;
        self
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn class(&self) -> ProblemClass {
        self.class
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.components.len()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn params(&self) -> Option<&GeneratorParams> {
        self.params.as_ref()
    }

    pub fn components(&self) -> &[AffineComponent] {
        &self.components
    }

    pub fn mean_matrix(&self) -> &Matrix {
        &self.mean_q
    }

    pub fn mean_offset(&self) -> &[f64] {
        &self.mean_b
    }

    pub fn solution_set(&self) -> &SolutionSet {
        &self.solution
    }

    pub fn dist_sq(&self, z: &[f64]) -> f64 {
        self.solution.dist_sq(z)
    }

    /// `F_i(z)` when `index` is given, otherwise the mean `F(z)`.
    pub fn evaluate(&self, index: Option<usize>, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.dim {
            return Err(Error::contract(format!(
                "point has dimension {}, problem has {}",
                z.len(),
                self.dim
            )));
        }
        let mut out = vec![0.0; self.dim];
        match index {
            Some(i) if i >= self.n() => {
                return Err(Error::contract(format!(
                    "component index {i} out of range for n = {}",
                    self.n()
                )))
            }
            Some(i) => self.components[i].apply_into(z, &mut out),
            None => self.mean_into(z, &mut out),
        }
        Ok(out)
    }

    /// Mean operator: components evaluated and summed in index order, then
    /// divided by `n`.
    pub fn mean_into(&self, z: &[f64], out: &mut [f64]) {
        let mut tmp = vec![0.0; self.dim];
        out.fill(0.0);
        for c in &self.components {
            c.apply_into(z, &mut tmp);
            linalg::axpy(1.0, &tmp, out);
        }
        let n = self.n() as f64;
        for o in out.iter_mut() {
            *o /= n;
        }
    }

    /// Spectral constants, measured on first use and cached.
    pub fn constants(&self) -> Result<&ProblemConstants> {
        if let Some(c) = self.constants.get() {
            return Ok(c);
        }
        let computed = self.compute_constants()?;
        Ok(self.constants.get_or_init(|| computed))
    }

    fn compute_constants(&self) -> Result<ProblemConstants> {
        let n = self.n() as f64;
        let l_i = self
            .components
            .iter()
            .map(|c| linalg::singular_values(&c.q).map(|s| s[0]))
            .collect::<Result<Vec<_>>>()?;
        let l_max = l_i.iter().copied().fold(0.0, f64::max);
        let l = self.mean_svd.sigma[0];
        let rank = self.mean_svd.rank();
        let lambda_min_plus = (rank > 0).then(|| self.mean_svd.sigma[rank - 1]);
        let a = 2.0 / n * l_i.iter().map(|v| v * v).sum::<f64>();
        let zs = self.solution.point();
        let mut buf = vec![0.0; self.dim];
        let mut sigma = 0.0;
        for c in &self.components {
            c.apply_into(zs, &mut buf);
            sigma += linalg::norm_sq(&buf);
        }
        let sigma_star_sq = sigma / n;
        let kappa = (self.mu > 0.0).then(|| l_max / self.mu);
        Ok(ProblemConstants {
            l_i,
            l_max,
            l,
            mu: self.mu,
            lambda_min_plus,
            a,
            sigma_star_sq,
            kappa,
        })
    }

    pub fn to_json(&self) -> String {
        let doc = ProblemDoc {
            kind: self.kind,
            class: Some(self.class),
            d: self.dim,
            n: self.n(),
            components: self
                .components
                .iter()
                .map(|c| ComponentDoc {
                    q: c.q.as_slice().to_vec(),
                    b: c.b.clone(),
                })
                .collect(),
            seed: self.seed,
            params: self.params.as_ref().map(GeneratorParams::to_json),
        };
        serde_json::to_string_pretty(&doc).expect("problem document serializes")
    }

    /// Parses a problem document and re-validates it.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(text);
        let doc: ProblemDoc = serde_path_to_error::deserialize(&mut de)
            .map_err(|e| Error::config(e.path().to_string(), e.into_inner().to_string()))?;
        de.end().map_err(|e| Error::Parse(e.to_string()))?;
        if doc.components.len() != doc.n {
            return Err(Error::config(
                "components",
                format!(
                    "{} components listed but n = {}",
                    doc.components.len(),
                    doc.n
                ),
            ));
        }
        if doc.d == 0 {
            return Err(Error::config("d", "dimension must be positive"));
        }
        let components = doc
            .components
            .into_iter()
            .enumerate()
            .map(|(i, c)| component_from_doc(c, doc.d, &format!("components[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        let params = match &doc.params {
            Some(v) if doc.kind != ProblemKind::ExplicitAffine => {
                Some(GeneratorParams::from_json(doc.kind, v, "params")?)
            }
            _ => None,
        };
        let problem = Self::from_components(doc.kind, components)?;
        if let Some(class) = doc.class {
            if class == ProblemClass::StronglyMonotone && problem.class != class {
                return Err(Error::Validation(
                    "declared strongly monotone but the measured modulus is 0".into(),
                ));
            }
        }
        Ok(problem.with_provenance(doc.seed, params))
    }
}

fn component_from_doc(c: ComponentDoc, d: usize, path: &str) -> Result<AffineComponent> {
    if c.q.len() != d * d {
        return Err(Error::config(
            format!("{path}.Q"),
            format!("expected {} entries, got {}", d * d, c.q.len()),
        ));
    }
    if c.b.len() != d {
        return Err(Error::config(
            format!("{path}.b"),
            format!("expected {d} entries, got {}", c.b.len()),
        ));
    }
    AffineComponent::new(Matrix::from_row_major(d, d, c.q)?, c.b)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemDoc {
    kind: ProblemKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    class: Option<ProblemClass>,
    d: usize,
    n: usize,
    components: Vec<ComponentDoc>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    params: Option<serde_json::Value>,
}

impl ComponentOperator for FiniteSumProblem {
    fn dim(&self) -> usize {
        self.dim
    }

    fn num_components(&self) -> usize {
        self.components.len()
    }

    fn apply_component(&self, i: usize, z: &[f64], out: &mut [f64]) {
        self.components[i].apply_into(z, out);
    }
}

/// Builds a problem instance. Deterministic in `(params, seed)`.
///
/// Draw order for the quadratic game: the shared orthogonal `P`, then per
/// component the diagonals of `A_i` (in `[mu, L]`), `B_i` (in `[0, 0.1]`),
/// `C_i` (in `[mu, L]`), then `a_i` and `c_i`. The bilinear game draws `P`,
/// then per component the diagonal of `B_i` and `a_i`, `c_i`. The WGAN toy
/// draws each data point and then its generator noise.
pub fn generate_problem(params: &GeneratorParams, seed: u64) -> Result<FiniteSumProblem> {
    let mut rng = SeededRng::new(seed);
    let problem = match params {
        GeneratorParams::QuadraticScsc(p) => quadratic(p, &mut rng)?,
        GeneratorParams::Bilinear(p) => bilinear(p, &mut rng)?,
        GeneratorParams::WganToy(p) => wgan(p, &mut rng)?,
        GeneratorParams::ExplicitAffine(p) => {
            let d = p.components.first().map_or(0, |c| c.b.len());
            let comps = p
                .components
                .iter()
                .enumerate()
                .map(|(i, c)| component_from_doc(c.clone(), d, &format!("components[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            FiniteSumProblem::from_components(ProblemKind::ExplicitAffine, comps)?
        }
    };
    Ok(problem.with_provenance(Some(seed), Some(params.clone())))
}

/// Upper bound on `n (2d)^2`, the number of stored matrix entries.
pub const MAX_DENSE_ENTRIES: usize = 1 << 24;

fn check_sizes(n: usize, d: usize) -> Result<()> {
    if n == 0 || d == 0 {
        return Err(Error::param(format!(
            "n and d must be positive (n = {n}, d = {d})"
        )));
    }
    let entries = d
        .checked_mul(2)
        .and_then(|m| m.checked_mul(m))
        .and_then(|m| m.checked_mul(n));
    if entries.is_none_or(|e| e > MAX_DENSE_ENTRIES) {
        return Err(Error::param(format!(
            "n = {n}, d = {d} exceeds {MAX_DENSE_ENTRIES} stored entries"
        )));
    }
    Ok(())
}

fn spectral_block(p: &Matrix, diag: &[f64]) -> Matrix {
    let m = p.matmul(&Matrix::from_diag(diag)).matmul(&p.transpose());
    m.symmetric_part()
}

fn saddle_matrix(a: Option<&Matrix>, b: &Matrix, c: Option<&Matrix>) -> Matrix {
    let d = b.rows();
    let mut q = Matrix::zeros(2 * d, 2 * d);
    if let Some(a) = a {
        q.set_block(0, 0, a);
    }
    q.set_block(0, d, b);
    q.set_block(d, 0, &b.transpose().scaled(-1.0));
    if let Some(c) = c {
        q.set_block(d, d, c);
    }
    q
}

fn draw_diag(rng: &mut SeededRng, d: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..d).map(|_| rng.uniform_in(lo, hi)).collect()
}

fn quadratic(p: &QuadraticParams, rng: &mut SeededRng) -> Result<FiniteSumProblem> {
    check_sizes(p.n, p.d)?;
    if !(p.mu > 0.0 && p.mu <= p.l && p.l.is_finite()) {
        return Err(Error::param(format!(
            "quadratic game needs 0 < mu <= L, got mu = {}, L = {}",
            p.mu, p.l
        )));
    }
    let d = p.d;
    let basis = linalg::random_orthogonal(d, rng)?;
    let mut comps = Vec::with_capacity(p.n);
    for _ in 0..p.n {
        let da = draw_diag(rng, d, p.mu, p.l);
        let db = draw_diag(rng, d, 0.0, 0.1);
        let dc = draw_diag(rng, d, p.mu, p.l);
        let mut offset = rng.normal_vec(d);
        offset.extend(rng.normal_vec(d));
        if p.zero_offsets {
            offset.fill(0.0);
        }
        let q = saddle_matrix(
            Some(&spectral_block(&basis, &da)),
            &spectral_block(&basis, &db),
            Some(&spectral_block(&basis, &dc)),
        );
        comps.push(AffineComponent::new(q, offset)?);
    }
    let problem = FiniteSumProblem::from_components(ProblemKind::QuadraticScsc, comps)?;
    if problem.mu < p.mu * (1.0 - 1e-6) {
        return Err(Error::Validation(format!(
            "generated modulus {} below requested {}",
            problem.mu, p.mu
        )));
    }
    Ok(problem)
}

fn bilinear(p: &BilinearParams, rng: &mut SeededRng) -> Result<FiniteSumProblem> {
    check_sizes(p.n, p.d)?;
    if !(p.lambda_min_plus > 0.0 && p.lambda_min_plus <= p.l_max && p.l_max.is_finite()) {
        return Err(Error::param(format!(
            "bilinear game needs 0 < lambda_min_plus <= L_max, got {} and {}",
            p.lambda_min_plus, p.l_max
        )));
    }
    let d = p.d;
    let basis = linalg::random_orthogonal(d, rng)?;
    let mut comps = Vec::with_capacity(p.n);
    for _ in 0..p.n {
        let db = draw_diag(rng, d, p.lambda_min_plus, p.l_max);
        let mut offset = rng.normal_vec(d);
        offset.extend(rng.normal_vec(d));
        if p.zero_offsets {
            offset.fill(0.0);
        }
        let q = saddle_matrix(None, &spectral_block(&basis, &db), None);
        comps.push(AffineComponent::new(q, offset)?);
    }
    FiniteSumProblem::from_components(ProblemKind::Bilinear, comps)
}

/// Linear WGAN learning a Gaussian mean. With data point `x_j` and noise
/// `e_j`, the per-sample objective `<w, x_j> - <w, e_j + theta>` gives the
/// operator `(grad_theta, -grad_w) = (-w, theta - (x_j - e_j))` on `(theta, w)`.
fn wgan(p: &WganParams, rng: &mut SeededRng) -> Result<FiniteSumProblem> {
    check_sizes(p.n, p.d)?;
    if p.mean.len() != p.d {
        return Err(Error::param(format!(
            "mean has {} entries but d = {}",
            p.mean.len(),
            p.d
        )));
    }
    if !(p.scale >= 0.0 && p.scale.is_finite()) {
        return Err(Error::param(format!(
            "scale must be nonnegative, got {}",
            p.scale
        )));
    }
    let d = p.d;
    let std = p.scale.sqrt();
    let neg_identity = Matrix::identity(d).scaled(-1.0);
    let q = saddle_matrix(None, &neg_identity, None);
    let mut comps = Vec::with_capacity(p.n);
    for _ in 0..p.n {
        let x: Vec<f64> = p.mean.iter().map(|m| m + std * rng.normal()).collect();
        let noise: Vec<f64> = (0..d).map(|_| std * rng.normal()).collect();
        let mut offset = vec![0.0; 2 * d];
        for k in 0..d {
            offset[d + k] = -(x[k] - noise[k]);
        }
        comps.push(AffineComponent::new(q.clone(), offset)?);
    }
    FiniteSumProblem::from_components(ProblemKind::WganToy, comps)
}
