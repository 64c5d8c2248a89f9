//! Strong typicality over finite alphabets and its quantum lifts: typical
//! sets, typical and conditionally typical projectors, pruned distributions
//! and the eigenvalue-cutoff projector.

use rand::Rng;

use crate::cq::Ensemble;
use crate::error::{Error, Result};
use crate::qcore::{self, DensityOperator, Operator, Spectrum, C64};
use crate::tol;

/// A source pmf together with block length and deviation parameter.
#[derive(Debug, Clone)]
pub struct TypicalSetSpec {
    pmf: Vec<f64>,
    n: usize,
    delta: f64,
}

impl TypicalSetSpec {
    pub fn new(pmf: Vec<f64>, n: usize, delta: f64) -> Result<Self> {
        qcore::check_pmf(&pmf)?;
        if n == 0 {
            return Err(Error::BadSequence("block length must be positive".into()));
        }
        if delta.is_nan() || delta < 0.0 {
            return Err(Error::BadSequence("delta must be nonnegative".into()));
        }
        Ok(Self { pmf, n, delta })
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn alphabet_size(&self) -> usize {
        self.pmf.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Declared constant in the exponent bounds `2^{n[H(X) + c delta]}`.
    pub fn exponent_constant(&self) -> f64 {
        self.alphabet_size() as f64
    }

    pub fn sequence_probability(&self, xn: &[usize]) -> f64 {
        xn.iter().map(|&x| self.pmf[x]).product()
    }
}

/// Inclusive strong-typicality test: `|N(x|xn)/n - p(x)| <= delta` for all x.
pub fn is_strongly_typical(xn: &[usize], spec: &TypicalSetSpec) -> Result<bool> {
    if xn.len() != spec.n {
        return Err(Error::BadSequence(format!(
            "sequence length {} != n = {}",
            xn.len(),
            spec.n
        )));
    }
    let k = spec.alphabet_size();
    let mut counts = vec![0usize; k];
    for &x in xn {
        if x >= k {
            return Err(Error::BadSequence(format!("symbol {x} outside alphabet")));
        }
        counts[x] += 1;
    }
    let n = spec.n as f64;
    Ok(counts
        .iter()
        .zip(spec.pmf.iter())
        .all(|(&c, &p)| (c as f64 / n - p).abs() <= spec.delta + 1e-12))
}

/// Exhaustive enumeration of the typical set, with its probability mass.
#[derive(Debug, Clone)]
pub struct TypicalSet {
    pub sequences: Vec<Vec<usize>>,
    pub mass: f64,
    spec: TypicalSetSpec,
}

impl TypicalSet {
    pub fn spec(&self) -> &TypicalSetSpec {
        &self.spec
    }

    pub fn index_of(&self, xn: &[usize]) -> Option<usize> {
        // sequences are generated in lexicographic order
        self.sequences
            .binary_search_by(|probe| probe.as_slice().cmp(xn))
            .ok()
    }
}

/// Enumerate the typical set and compute its mass `S`, checking the
/// cardinality bound `|T| <= 2^{n[H(X) + c delta]}`.
pub fn typical_mass(spec: &TypicalSetSpec) -> Result<TypicalSet> {
    let k = spec.alphabet_size();
    let total = tol::check_enumeration(k.checked_pow(spec.n as u32), "typical set")?;
    let mut sequences = Vec::new();
    let mut mass = 0.0;
    let mut xn = vec![0usize; spec.n];
    for flat in 0..total {
        let mut rem = flat;
        for pos in (0..spec.n).rev() {
            xn[pos] = rem % k;
            rem /= k;
        }
        if is_strongly_typical(&xn, spec)? {
            mass += spec.sequence_probability(&xn);
            sequences.push(xn.clone());
        }
    }
    // lexicographic order needed by index_of: the flat enumeration above
    // emits most-significant symbol first, which is already lexicographic.
    Ok(TypicalSet {
        sequences,
        mass,
        spec: spec.clone(),
    })
}

/// The source distribution restricted to the typical set and renormalized.
#[derive(Debug, Clone)]
pub struct PrunedDistribution {
    set: TypicalSet,
    pruned: Vec<f64>,
}

impl PrunedDistribution {
    pub fn mass(&self) -> f64 {
        self.set.mass
    }

    pub fn set(&self) -> &TypicalSet {
        &self.set
    }

    pub fn len(&self) -> usize {
        self.set.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.sequences.is_empty()
    }

    pub fn sequence(&self, i: usize) -> &[usize] {
        &self.set.sequences[i]
    }

    /// Pruned probability of the `i`-th typical sequence.
    pub fn probability(&self, i: usize) -> f64 {
        self.pruned[i]
    }

    /// Pruned probability of an arbitrary sequence (zero off the set).
    pub fn probability_of(&self, xn: &[usize]) -> f64 {
        self.set.index_of(xn).map_or(0.0, |i| self.pruned[i])
    }

    /// Rejection sampling from the IID sampler: draw until typical.
    pub fn sample(&self, rng: &mut impl Rng) -> Vec<usize> {
        let spec = self.set.spec();
        loop {
            let xn = sample_iid(spec.pmf(), spec.n(), rng);
            if is_strongly_typical(&xn, spec).expect("alphabet-checked") {
                return xn;
            }
        }
    }
}

pub fn sample_iid(pmf: &[f64], n: usize, rng: &mut impl Rng) -> Vec<usize> {
    (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            for (x, &p) in pmf.iter().enumerate() {
                acc += p;
                if u < acc {
                    return x;
                }
            }
            pmf.len() - 1
        })
        .collect()
}

pub fn pruned(spec: &TypicalSetSpec) -> Result<PrunedDistribution> {
    let set = typical_mass(spec)?;
    if set.sequences.is_empty() || set.mass <= 0.0 {
        return Err(Error::EmptyTypicalSet);
    }
    let pruned = set
        .sequences
        .iter()
        .map(|xn| spec.sequence_probability(xn) / set.mass)
        .collect();
    Ok(PrunedDistribution { set, pruned })
}

/// A Hermitian idempotent operator with provenance.
#[derive(Debug, Clone)]
pub struct TypicalProjector {
    projector: Operator,
    rank: usize,
    n: usize,
    delta: f64,
}

impl TypicalProjector {
    fn new(projector: Operator, rank: usize, n: usize, delta: f64) -> Result<Self> {
        let p2 = projector.mul(&projector);
        let dev = p2.sub(&projector).spectral_norm()?;
        if dev > tol::PROJ * (projector.dim() as f64) {
            return Err(Error::BadProjector(format!("idempotence defect {dev}")));
        }
        Ok(Self {
            projector,
            rank,
            n,
            delta,
        })
    }

    pub fn operator(&self) -> &Operator {
        &self.projector
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// Spectrum of a state as a pmf over binned eigenvalues: returns the spectrum
/// and for each eigenindex the bin (symbol) it belongs to.
fn binned_spectrum(rho: &DensityOperator) -> (Spectrum, Vec<usize>, Vec<f64>) {
    let spec = rho.spectrum();
    let mut symbol_of = Vec::with_capacity(spec.values.len());
    let mut bin_values: Vec<f64> = Vec::new();
    let mut bin_mass: Vec<f64> = Vec::new();
    for &v in &spec.values {
        match bin_values
            .iter()
            .position(|&b| (b - v).abs() <= tol::SPECTRUM_BIN)
        {
            Some(b) => {
                symbol_of.push(b);
                bin_mass[b] += v;
            }
            None => {
                symbol_of.push(bin_values.len());
                bin_values.push(v);
                bin_mass.push(v);
            }
        }
    }
    (spec, symbol_of, bin_mass)
}

/// Projector onto the span of eigenvector sequences whose eigenvalue-index
/// sequence is strongly typical for the spectrum pmf of `rho`.
pub fn typical_projector(rho: &DensityOperator, n: usize, delta: f64) -> Result<TypicalProjector> {
    let d = rho.dim();
    let total = tol::check_operator_dim(d.checked_pow(n as u32), "typical projector")?;
    let (spec, symbol_of, bin_mass) = binned_spectrum(rho);
    let spec_pmf: Vec<f64> = bin_mass.iter().map(|&m| m.max(0.0)).collect();
    let bin_spec = TypicalSetSpec::new(normalize(&spec_pmf), n, delta)?;

    // Work in the n-fold eigenbasis: the projector is diagonal there.
    let mut keep = vec![false; total];
    let mut rank = 0usize;
    let mut idx = vec![0usize; n];
    let mut sym = vec![0usize; n];
    for flat in 0..total {
        let mut rem = flat;
        for pos in (0..n).rev() {
            idx[pos] = rem % d;
            rem /= d;
        }
        for pos in 0..n {
            sym[pos] = symbol_of[idx[pos]];
        }
        if is_strongly_typical(&sym, &bin_spec)? {
            keep[flat] = true;
            rank += 1;
        }
    }
    let projector =
        eigenbasis_diagonal_operator(&spec, n, |flat| if keep[flat] { 1.0 } else { 0.0 });
    TypicalProjector::new(projector, rank, n, delta)
}

fn normalize(p: &[f64]) -> Vec<f64> {
    let total: f64 = p.iter().sum();
    p.iter().map(|&x| (x / total).max(0.0)).collect()
}

/// Build `V^{(x)n} diag(f) (V^{(x)n})^dag` where the basis is the n-fold
/// tensor power of a single-copy eigenbasis.
fn eigenbasis_diagonal_operator(spec: &Spectrum, n: usize, f: impl Fn(usize) -> f64) -> Operator {
    let d = spec.dim();
    let total = d.pow(n as u32);
    let single = Operator::from_fn(d, |i, j| spec.basis[(i, j)]);
    let mut big_basis = Operator::identity(1);
    for _ in 0..n {
        big_basis = big_basis.tensor(&single);
    }
    let diag_vals: Vec<f64> = (0..total).map(f).collect();
    let diag = Operator::from_real_diagonal(&diag_vals);
    big_basis.mul(&diag).mul(&big_basis.dagger()).hermitized()
}

/// A projector stored in product form: a single-site basis per position and
/// a diagonal 0/1 mask over the product eigenbasis. Avoids materializing the
/// full matrix when only applications to states are needed.
#[derive(Debug, Clone)]
pub struct ProductProjector {
    /// Single-site basis change at each position (columns are eigenvectors).
    pub site_bases: Vec<Operator>,
    /// Mask over flat product-eigenbasis indices, most significant site first.
    pub keep: Vec<bool>,
    pub rank: usize,
}

impl ProductProjector {
    pub fn dim(&self) -> usize {
        self.site_bases.iter().map(Operator::dim).product()
    }

    /// Materialize the full projector matrix.
    pub fn to_operator(&self) -> Operator {
        let mut big_basis = Operator::identity(1);
        for v in &self.site_bases {
            big_basis = big_basis.tensor(v);
        }
        let diag: Vec<f64> = self
            .keep
            .iter()
            .map(|&k| if k { 1.0 } else { 0.0 })
            .collect();
        let d = Operator::from_real_diagonal(&diag);
        big_basis.mul(&d).mul(&big_basis.dagger()).hermitized()
    }

    /// Apply the projector to a state vector in `O(n d^{n+1})` via site-wise
    /// basis changes and the diagonal mask.
    pub fn apply_to_vector(&self, amplitudes: &[C64]) -> Vec<C64> {
        let mut v = self.site_transform(amplitudes, true);
        for (a, &k) in v.iter_mut().zip(self.keep.iter()) {
            if !k {
                *a = C64::new(0.0, 0.0);
            }
        }
        v = self.site_transform(&v, false);
        v
    }

    /// Site-wise `V^dag` (adjoint = true) or `V` applied at every position.
    fn site_transform(&self, amplitudes: &[C64], adjoint: bool) -> Vec<C64> {
        let dims: Vec<usize> = self.site_bases.iter().map(Operator::dim).collect();
        let total: usize = dims.iter().product();
        let mut v = amplitudes.to_vec();
        let mut stride_after = total;
        for (site, basis) in self.site_bases.iter().enumerate() {
            let d = dims[site];
            stride_after /= d;
            let mut out = vec![C64::new(0.0, 0.0); total];
            let block = stride_after * d;
            for base in (0..total).step_by(block) {
                for inner in 0..stride_after {
                    for row in 0..d {
                        let mut acc = C64::new(0.0, 0.0);
                        for col in 0..d {
                            let m = if adjoint {
                                basis.get(col, row).conj()
                            } else {
                                basis.get(row, col)
                            };
                            acc += m * v[base + col * stride_after + inner];
                        }
                        out[base + row * stride_after + inner] = acc;
                    }
                }
            }
            v = out;
        }
        v
    }
}

/// Product-form conditionally typical projector: for each symbol `x` in
/// `xn`, the typical projector of `rho_x` on the positions where `x` occurs.
pub fn conditionally_typical_product(
    ens: &Ensemble,
    xn: &[usize],
    delta: f64,
) -> Result<ProductProjector> {
    let d = ens.dim();
    let n = xn.len();
    if n == 0 {
        return Err(Error::BadSequence("empty sequence".into()));
    }
    let total = tol::check_enumeration(d.checked_pow(n as u32), "conditional projector mask")?;
    for &x in xn {
        if x >= ens.len() {
            return Err(Error::BadSequence(format!("symbol {x} outside ensemble")));
        }
    }

    // Per-symbol spectra and index typicality specs over the positions I_x.
    let mut per_symbol: Vec<Option<(Spectrum, Vec<usize>, TypicalSetSpec)>> =
        Vec::with_capacity(ens.len());
    for x in 0..ens.len() {
        let count = xn.iter().filter(|&&s| s == x).count();
        if count == 0 {
            per_symbol.push(None);
            continue;
        }
        let (spec, symbol_of, bin_mass) = binned_spectrum(ens.state(x));
        let bin_spec = TypicalSetSpec::new(normalize(&bin_mass), count, delta)?;
        per_symbol.push(Some((spec, symbol_of, bin_spec)));
    }

    let site_bases: Vec<Operator> = xn
        .iter()
        .map(|&x| {
            let (spec, _, _) = per_symbol[x].as_ref().expect("count > 0");
            Operator::from_fn(spec.dim(), |i, j| spec.basis[(i, j)])
        })
        .collect();

    let mut keep = vec![false; total];
    let mut rank = 0usize;
    let mut idx = vec![0usize; n];
    for (flat, k) in keep.iter_mut().enumerate() {
        let mut rem = flat;
        for pos in (0..n).rev() {
            idx[pos] = rem % d;
            rem /= d;
        }
        let mut ok = true;
        'sym: for x in 0..ens.len() {
            let Some((_, symbol_of, bin_spec)) = per_symbol[x].as_ref() else {
                continue;
            };
            let sub: Vec<usize> = xn
                .iter()
                .enumerate()
                .filter(|(_, &s)| s == x)
                .map(|(pos, _)| symbol_of[idx[pos]])
                .collect();
            if !is_strongly_typical(&sub, bin_spec)? {
                ok = false;
                break 'sym;
            }
        }
        if ok {
            *k = true;
            rank += 1;
        }
    }

    Ok(ProductProjector {
        site_bases,
        keep,
        rank,
    })
}

/// Empirical conditional-entropy rank bound `2^{n [H(B|X) + c delta]}` with
/// the declared constant `c = |alphabet|`. Tight only for spectra bounded
/// away from zero; callers check it on such instances.
pub fn conditional_rank_bound(ens: &Ensemble, xn: &[usize], delta: f64) -> f64 {
    let n = xn.len() as f64;
    let h_cond: f64 = (0..ens.len())
        .map(|x| {
            let count = xn.iter().filter(|&&s| s == x).count() as f64;
            count / n * qcore::von_neumann_entropy(ens.state(x))
        })
        .sum();
    let c = ens.dim() as f64;
    (n * (h_cond + c * delta)).exp2()
}

/// Conditionally typical projector as a full matrix.
pub fn conditionally_typical_projector(
    ens: &Ensemble,
    xn: &[usize],
    delta: f64,
) -> Result<TypicalProjector> {
    let d = ens.dim();
    tol::check_operator_dim(d.checked_pow(xn.len() as u32), "conditional projector")?;
    let product = conditionally_typical_product(ens, xn, delta)?;
    TypicalProjector::new(product.to_operator(), product.rank, xn.len(), delta)
}

/// Projector onto the eigenspaces of a PSD operator with eigenvalue above
/// `threshold`.
pub fn cutoff_projector(xi: &Operator, threshold: f64) -> Result<TypicalProjector> {
    let scale = xi.max_abs_entry().max(1.0);
    if !xi.is_hermitian(tol::HERM * scale * 10.0) {
        return Err(Error::NotPsd("not Hermitian".into()));
    }
    let spec = xi.hermitized().hermitian_eigs()?;
    let top = spec.values.first().copied().unwrap_or(0.0);
    if spec.values.last().copied().unwrap_or(0.0) < -tol::PSD * top.max(1.0) * 10.0 {
        return Err(Error::NotPsd("negative eigenvalue".into()));
    }
    let rank = spec.values.iter().filter(|&&v| v > threshold).count();
    let projector = spec.projector_onto(|_, v| v > threshold);
    TypicalProjector::new(projector, rank, 1, 0.0)
}

#[cfg(test)]
mod tests;
