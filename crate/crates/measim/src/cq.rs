//! Measurement models (POVMs, quantum instruments, refinements) and the maps
//! that turn a state plus a measurement into classical-quantum states.

use crate::error::{Error, Result};
use crate::qcore::{
    self, embed, partial_trace, shannon_entropy, DensityOperator, Operator, SystemLayout, C64,
};
use crate::tol;

/// Positive operators summing to the identity, with an outcome alphabet.
#[derive(Debug, Clone)]
pub struct Povm {
    elements: Vec<Operator>,
    labels: Vec<String>,
}

impl Povm {
    pub fn new(elements: Vec<Operator>, labels: Vec<String>) -> Result<Self> {
        if elements.is_empty() || elements.len() != labels.len() {
            return Err(Error::InvalidOperator(
                "POVM needs one label per element".into(),
            ));
        }
        let dim = elements[0].dim();
        let mut sum = Operator::zeros(dim);
        for e in &elements {
            if e.dim() != dim {
                return Err(Error::DimMismatch("ragged POVM element dims".into()));
            }
            let scale = e.max_abs_entry().max(1.0);
            if !e.is_hermitian(tol::HERM * scale * 10.0) {
                return Err(Error::InvalidOperator("POVM element not Hermitian".into()));
            }
            let spec = e.hermitized().hermitian_eigs()?;
            let top = spec.values.first().copied().unwrap_or(0.0).max(1.0);
            if spec.values.last().copied().unwrap_or(0.0) < -tol::PSD * top * 10.0 {
                return Err(Error::NotPsd("POVM element".into()));
            }
            sum = sum.add(e);
        }
        let dev = sum.sub(&Operator::identity(dim)).spectral_norm()?;
        if dev > tol::COMPLETE * dim as f64 {
            return Err(Error::InvalidOperator(format!(
                "POVM completeness defect {dev}"
            )));
        }
        Ok(Self { elements, labels })
    }

    /// Projective measurement onto the given orthonormal vectors.
    pub fn projective(vectors: &[Vec<C64>], labels: Vec<String>) -> Result<Self> {
        let elements = vectors.iter().map(|v| Operator::projector(v)).collect();
        Self::new(elements, labels)
    }

    pub fn identity_povm(dim: usize) -> Self {
        Self {
            elements: vec![Operator::identity(dim)],
            labels: vec!["0".into()],
        }
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, x: usize) -> &Operator {
        &self.elements[x]
    }

    pub fn elements(&self) -> &[Operator] {
        &self.elements
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// Kraus families `N_{x,y}`, one list per classical outcome.
#[derive(Debug, Clone)]
pub struct QuantumInstrument {
    families: Vec<(String, Vec<Operator>)>,
}

impl QuantumInstrument {
    pub fn new(families: Vec<(String, Vec<Operator>)>) -> Result<Self> {
        if families.is_empty() || families.iter().any(|(_, k)| k.is_empty()) {
            return Err(Error::InvalidOperator("empty Kraus family".into()));
        }
        let dim = families[0].1[0].dim();
        let mut total = Operator::zeros(dim);
        for (_, kraus) in &families {
            let mut family_sum = Operator::zeros(dim);
            for k in kraus {
                if k.dim() != dim {
                    return Err(Error::DimMismatch("ragged Kraus dims".into()));
                }
                family_sum = family_sum.add(&k.dagger().mul(k));
            }
            let top = family_sum.spectral_norm()?;
            if top > 1.0 + tol::COMPLETE * dim as f64 {
                return Err(Error::InvalidOperator(
                    "Kraus family exceeds trace preservation".into(),
                ));
            }
            total = total.add(&family_sum);
        }
        let dev = total.sub(&Operator::identity(dim)).spectral_norm()?;
        if dev > tol::COMPLETE * dim as f64 {
            return Err(Error::InvalidOperator(format!(
                "instrument completeness defect {dev}"
            )));
        }
        Ok(Self { families })
    }

    pub fn dim(&self) -> usize {
        self.families[0].1[0].dim()
    }

    pub fn outcomes(&self) -> usize {
        self.families.len()
    }

    pub fn label(&self, x: usize) -> &str {
        &self.families[x].0
    }

    pub fn kraus(&self, x: usize) -> &[Operator] {
        &self.families[x].1
    }

    pub fn is_single_kraus(&self) -> bool {
        self.families.iter().all(|(_, k)| k.len() == 1)
    }

    /// The POVM element `sum_y N_{x,y}^dag N_{x,y}` of outcome `x`.
    pub fn effect(&self, x: usize) -> Operator {
        let dim = self.dim();
        let mut e = Operator::zeros(dim);
        for k in self.kraus(x) {
            e = e.add(&k.dagger().mul(k));
        }
        e.hermitized()
    }

    /// Apply the map of outcome `x` (unnormalized).
    pub fn apply_outcome(&self, x: usize, rho: &Operator) -> Operator {
        let mut out = Operator::zeros(self.dim());
        for k in self.kraus(x) {
            out = out.add(&k.mul(rho).mul(&k.dagger()));
        }
        out
    }
}

/// Labeled blocks `(x, p(x), theta_x)` of a classical-quantum state. The
/// conditional operators are stored unnormalized (`p(x) * theta_x`) so that
/// zero-probability outcomes keep a well-defined block.
#[derive(Debug, Clone)]
pub struct ClassicalQuantumState {
    labels: Vec<String>,
    weighted_blocks: Vec<Operator>,
    layout: Option<SystemLayout>,
}

impl ClassicalQuantumState {
    pub fn new(
        labels: Vec<String>,
        weighted_blocks: Vec<Operator>,
        layout: Option<SystemLayout>,
    ) -> Result<Self> {
        if labels.len() != weighted_blocks.len() || labels.is_empty() {
            return Err(Error::InvalidOperator("one label per block".into()));
        }
        let dim = weighted_blocks[0].dim();
        if weighted_blocks.iter().any(|b| b.dim() != dim) {
            return Err(Error::DimMismatch("ragged block dims".into()));
        }
        if let Some(l) = &layout {
            l.check_operator(&weighted_blocks[0])?;
        }
        let total: f64 = weighted_blocks.iter().map(|b| b.trace().re).sum();
        if (total - 1.0).abs() > 1e-7 {
            return Err(Error::InvalidOperator(format!(
                "block weights sum to {total}"
            )));
        }
        Ok(Self {
            labels,
            weighted_blocks,
            layout,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn layout(&self) -> Option<&SystemLayout> {
        self.layout.as_ref()
    }

    pub fn weight(&self, x: usize) -> f64 {
        self.weighted_blocks[x].trace().re.max(0.0)
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|x| self.weight(x)).collect()
    }

    /// Unnormalized block `p(x) * theta_x`.
    pub fn weighted_block(&self, x: usize) -> &Operator {
        &self.weighted_blocks[x]
    }

    /// Normalized conditional state; zero for zero-probability outcomes.
    pub fn conditional(&self, x: usize) -> Operator {
        let w = self.weight(x);
        if w <= tol::TRACE {
            Operator::zeros(self.weighted_blocks[x].dim())
        } else {
            self.weighted_blocks[x].scale(1.0 / w)
        }
    }

    /// Marginal on the quantum factor.
    pub fn quantum_marginal(&self) -> Operator {
        let mut out = Operator::zeros(self.weighted_blocks[0].dim());
        for b in &self.weighted_blocks {
            out = out.add(b);
        }
        out
    }

    /// Shannon entropy `H(X)` of the classical label.
    pub fn h_classical(&self) -> f64 {
        shannon_entropy(&self.weights())
    }

    /// `H(Q)` of the quantum marginal.
    pub fn h_quantum(&self) -> Result<f64> {
        qcore::entropy_of_psd(&self.quantum_marginal())
    }

    /// `H(XQ) = H(X) + sum_x p(x) H(theta_x)`.
    pub fn h_joint(&self) -> Result<f64> {
        let mut h = self.h_classical();
        for x in 0..self.len() {
            let w = self.weight(x);
            if w > tol::TRACE {
                h += w * qcore::entropy_of_psd(&self.weighted_blocks[x])?;
            }
        }
        Ok(h)
    }

    /// `I(X;Q) = H(X) + H(Q) - H(XQ)`.
    pub fn mutual_information(&self) -> Result<f64> {
        Ok(self.h_classical() + self.h_quantum()? - self.h_joint()?)
    }

    /// `H(X|Q) = H(XQ) - H(Q)`.
    pub fn conditional_entropy(&self) -> Result<f64> {
        Ok(self.h_joint()? - self.h_quantum()?)
    }

    /// Reduce every block to the named quantum factors.
    pub fn reduce(&self, keep: &[&str]) -> Result<ClassicalQuantumState> {
        let layout = self
            .layout
            .as_ref()
            .ok_or_else(|| Error::BadLayout("state carries no layout".into()))?;
        let mut blocks = Vec::with_capacity(self.len());
        let mut out_layout = None;
        for b in &self.weighted_blocks {
            let (red, l) = partial_trace(b, layout, keep)?;
            blocks.push(red);
            out_layout = Some(l);
        }
        Ok(ClassicalQuantumState {
            labels: self.labels.clone(),
            weighted_blocks: blocks,
            layout: out_layout,
        })
    }
}

/// POVM decomposition into an internal measurement followed by classical
/// post-processing `p(x|w)`. Internals are either POVM elements or
/// trace-non-increasing Kraus families; only the effects matter for rates.
#[derive(Debug, Clone)]
pub struct Refinement {
    /// `post_processing[w][x] = p(x|w)`.
    post_processing: Vec<Vec<f64>>,
    internal: Vec<Operator>,
    internal_labels: Vec<String>,
    output_labels: Vec<String>,
    map_valued: bool,
}

impl Refinement {
    pub fn new(
        internal: Povm,
        post_processing: Vec<Vec<f64>>,
        output_labels: Vec<String>,
    ) -> Result<Self> {
        if post_processing.len() != internal.len() {
            return Err(Error::DimMismatch(
                "one post-processing row per internal outcome".into(),
            ));
        }
        let nx = output_labels.len();
        for row in &post_processing {
            if row.len() != nx {
                return Err(Error::DimMismatch("ragged post-processing row".into()));
            }
            qcore::check_pmf(row)?;
        }
        Ok(Self {
            post_processing,
            internal_labels: internal.labels().to_vec(),
            internal: internal.elements().to_vec(),
            output_labels,
            map_valued: false,
        })
    }

    /// Refinement whose internals are trace-non-increasing map families
    /// `M_w`, given by Kraus lists. Their effects `sum_y K^dag K` must still
    /// form a POVM (the total map preserves trace).
    pub fn from_maps(
        kraus_families: Vec<(String, Vec<Operator>)>,
        post_processing: Vec<Vec<f64>>,
        output_labels: Vec<String>,
    ) -> Result<Self> {
        let instr = QuantumInstrument::new(kraus_families)?;
        let effects: Vec<Operator> = (0..instr.outcomes()).map(|w| instr.effect(w)).collect();
        let labels: Vec<String> = (0..instr.outcomes())
            .map(|w| instr.label(w).to_string())
            .collect();
        let internal = Povm::new(effects, labels)?;
        let mut refinement = Self::new(internal, post_processing, output_labels)?;
        refinement.map_valued = true;
        Ok(refinement)
    }

    pub fn is_map_valued(&self) -> bool {
        self.map_valued
    }

    /// The trivial refinement `W = X` of a POVM.
    pub fn trivial(povm: &Povm) -> Self {
        let n = povm.len();
        let mut post = vec![vec![0.0; n]; n];
        for (w, row) in post.iter_mut().enumerate() {
            row[w] = 1.0;
        }
        Self {
            post_processing: post,
            internal_labels: povm.labels().to_vec(),
            internal: povm.elements().to_vec(),
            output_labels: povm.labels().to_vec(),
            map_valued: false,
        }
    }

    pub fn internal_len(&self) -> usize {
        self.internal.len()
    }

    pub fn output_len(&self) -> usize {
        self.output_labels.len()
    }

    pub fn internal_element(&self, w: usize) -> &Operator {
        &self.internal[w]
    }

    pub fn internal_povm(&self) -> Result<Povm> {
        Povm::new(self.internal.clone(), self.internal_labels.clone())
    }

    pub fn output_labels(&self) -> &[String] {
        &self.output_labels
    }

    pub fn post_processing(&self, w: usize, x: usize) -> f64 {
        self.post_processing[w][x]
    }

    /// Effect-level reconstruction `Lambda_x = sum_w p(x|w) E_w`, valid for
    /// both POVM- and map-valued internals.
    fn reconstructed_effects(&self) -> Vec<Operator> {
        let dim = self.internal[0].dim();
        (0..self.output_len())
            .map(|x| {
                let mut e = Operator::zeros(dim);
                for w in 0..self.internal_len() {
                    let p = self.post_processing[w][x];
                    if p > 0.0 {
                        e = e.add(&self.internal[w].scale(p));
                    }
                }
                e
            })
            .collect()
    }

    /// Check that the refinement reproduces `target` within `tol::REFINE`.
    pub fn check_reconstructs(&self, target: &Povm) -> Result<()> {
        let rec = self.reconstructed_effects();
        if rec.len() != target.len() {
            return Err(Error::BadRefinement(format!(
                "{} outputs vs {} target outcomes",
                rec.len(),
                target.len()
            )));
        }
        for x in 0..target.len() {
            let dev = rec[x].sub(target.element(x)).spectral_norm()?;
            if dev > tol::REFINE * target.dim() as f64 {
                return Err(Error::BadRefinement(format!(
                    "element {x} deviates by {dev}"
                )));
            }
        }
        Ok(())
    }
}

/// An ensemble `{p(x), rho_x}`.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pmf: Vec<f64>,
    states: Vec<DensityOperator>,
}

impl Ensemble {
    pub fn new(pmf: Vec<f64>, states: Vec<DensityOperator>) -> Result<Self> {
        qcore::check_pmf(&pmf)?;
        if pmf.len() != states.len() {
            return Err(Error::DimMismatch("one state per probability".into()));
        }
        let dim = states[0].dim();
        if states.iter().any(|s| s.dim() != dim) {
            return Err(Error::DimMismatch("ragged ensemble dims".into()));
        }
        Ok(Self { pmf, states })
    }

    pub fn len(&self) -> usize {
        self.pmf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pmf.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn state(&self, x: usize) -> &DensityOperator {
        &self.states[x]
    }

    pub fn average_state(&self) -> DensityOperator {
        let mut avg = Operator::zeros(self.dim());
        for (p, s) in self.pmf.iter().zip(self.states.iter()) {
            avg = avg.add(&s.operator().scale(*p));
        }
        DensityOperator::new(avg).expect("convex combination of states")
    }

    /// The cq state `sum_x p(x) |x><x| (x) rho_x`.
    pub fn to_cq(&self) -> ClassicalQuantumState {
        let blocks = self
            .pmf
            .iter()
            .zip(self.states.iter())
            .map(|(p, s)| s.operator().scale(*p))
            .collect();
        let labels = (0..self.len()).map(|x| x.to_string()).collect();
        ClassicalQuantumState::new(labels, blocks, None).expect("weights sum to one")
    }
}

/// Born rule `p(x) = Tr(Lambda_x rho)`.
pub fn born_distribution(povm: &Povm, rho: &DensityOperator) -> Result<Vec<f64>> {
    if povm.dim() != rho.dim() {
        return Err(Error::DimMismatch(format!(
            "POVM dim {} vs state dim {}",
            povm.dim(),
            rho.dim()
        )));
    }
    let mut pmf: Vec<f64> = povm
        .elements()
        .iter()
        .map(|e| e.mul(rho.operator()).trace().re.max(0.0))
        .collect();
    let total: f64 = pmf.iter().sum();
    if (total - 1.0).abs() < tol::TRACE * povm.dim() as f64 && total > 0.0 {
        for p in &mut pmf {
            *p /= total;
        }
    }
    Ok(pmf)
}

/// Measure one factor of a multipartite state: blocks
/// `(x, p(x), Tr_measured{(I (x) Lambda_x) rho} / p(x))` on the remaining factors.
pub fn post_measurement_cq(
    povm: &Povm,
    rho_multi: &DensityOperator,
    layout: &SystemLayout,
    measured: &str,
) -> Result<ClassicalQuantumState> {
    layout.check_operator(rho_multi.operator())?;
    if povm.dim() != layout.dim_of(measured)? {
        return Err(Error::DimMismatch(format!(
            "POVM dim {} vs factor {measured}",
            povm.dim()
        )));
    }
    let remaining: Vec<&str> = layout
        .labels()
        .into_iter()
        .filter(|l| *l != measured)
        .collect();
    let mut blocks = Vec::with_capacity(povm.len());
    let mut out_layout = None;
    for e in povm.elements() {
        let moved = embed(e, layout, &[measured])?.mul(rho_multi.operator());
        let (red, l) = partial_trace(&moved, layout, &remaining)?;
        blocks.push(red.hermitized());
        out_layout = Some(l);
    }
    ClassicalQuantumState::new(povm.labels().to_vec(), blocks, out_layout)
}

/// Reference-side post-measurement blocks via the transpose trick:
/// `p(x) theta_x = sqrt(rho) Lambda_x^T sqrt(rho)`, with the transpose taken
/// in the eigenbasis of `rho` fixed by the canonical purification. Blocks are
/// expressed in that eigenbasis, matching [`post_measurement_cq`] over the
/// canonical purification entry for entry.
pub fn transpose_trick_states(rho: &DensityOperator, povm: &Povm) -> Result<ClassicalQuantumState> {
    if povm.dim() != rho.dim() {
        return Err(Error::DimMismatch("POVM vs state".into()));
    }
    let effects: Vec<Operator> = povm.elements().to_vec();
    let blocks = reference_blocks(rho, &effects)?;
    let d = rho.dim();
    ClassicalQuantumState::new(
        povm.labels().to_vec(),
        blocks,
        Some(SystemLayout::new(&["R"], &[d])?),
    )
}

/// Shared transpose-trick core: unnormalized reference blocks
/// `D^{1/2} (V^dag E V)^T D^{1/2}` for each effect `E`.
pub(crate) fn reference_blocks(
    rho: &DensityOperator,
    effects: &[Operator],
) -> Result<Vec<Operator>> {
    let spec = rho.spectrum();
    let d = rho.dim();
    let basis = Operator::from_fn(d, |i, j| spec.basis[(i, j)]);
    let sqrt_vals: Vec<f64> = spec.values.iter().map(|&v| v.max(0.0).sqrt()).collect();
    let mut blocks = Vec::with_capacity(effects.len());
    for e in effects {
        if e.dim() != d {
            return Err(Error::DimMismatch("effect vs state".into()));
        }
        let in_eigenbasis = basis.dagger().mul(e).mul(&basis).transpose();
        let block = Operator::from_fn(d, |i, j| {
            in_eigenbasis.get(i, j) * sqrt_vals[i] * sqrt_vals[j]
        });
        blocks.push(block.hermitized());
    }
    Ok(blocks)
}

/// The quantum-to-classical measurement map `sigma -> sum_x Tr(Lambda_x sigma) |x><x|`.
#[derive(Debug, Clone)]
pub struct MeasurementMap {
    povm: Povm,
}

impl MeasurementMap {
    pub fn new(povm: Povm) -> Self {
        Self { povm }
    }

    pub fn apply(&self, sigma: &DensityOperator) -> Result<ClassicalQuantumState> {
        let pmf = born_distribution(&self.povm, sigma)?;
        let blocks = pmf
            .iter()
            .map(|&p| Operator::identity(1).scale(p))
            .collect();
        ClassicalQuantumState::new(self.povm.labels().to_vec(), blocks, None)
    }
}

/// `n`-fold tensor POVM with sequence labels.
pub fn tensor_povm(povm: &Povm, n: usize) -> Result<Povm> {
    if n == 0 {
        return Err(Error::InvalidOperator("n must be positive".into()));
    }
    tol::check_enumeration(povm.len().checked_pow(n as u32), "tensor POVM outcomes")?;
    tol::check_operator_dim(povm.dim().checked_pow(n as u32), "tensor POVM elements")?;
    let mut elements = vec![Operator::identity(1)];
    let mut labels = vec![String::new()];
    for _ in 0..n {
        let mut next_elements = Vec::with_capacity(elements.len() * povm.len());
        let mut next_labels = Vec::with_capacity(labels.len() * povm.len());
        for (e, l) in elements.iter().zip(labels.iter()) {
            for x in 0..povm.len() {
                next_elements.push(e.tensor(povm.element(x)));
                let mut label = l.clone();
                if !label.is_empty() {
                    label.push(',');
                }
                label.push_str(&povm.labels()[x]);
                next_labels.push(label);
            }
        }
        elements = next_elements;
        labels = next_labels;
    }
    Povm::new(elements, labels)
}

/// Convex combination `sum_m p(m) Gamma_x^{(m)}` of POVMs over one alphabet.
pub fn convex_combine(povms: &[Povm], weights: &[f64]) -> Result<Povm> {
    qcore::check_pmf(weights)?;
    if povms.len() != weights.len() || povms.is_empty() {
        return Err(Error::BadPmf("one weight per POVM".into()));
    }
    let first = &povms[0];
    for p in povms {
        if p.dim() != first.dim() || p.len() != first.len() {
            return Err(Error::DimMismatch(
                "POVMs must share alphabet and dim".into(),
            ));
        }
    }
    let elements: Vec<Operator> = (0..first.len())
        .map(|x| {
            let mut e = Operator::zeros(first.dim());
            for (p, w) in povms.iter().zip(weights.iter()) {
                e = e.add(&p.element(x).scale(*w));
            }
            e
        })
        .collect();
    Povm::new(elements, first.labels().to_vec())
}

/// Collapse a refinement to the POVM `Lambda_x = sum_w p(x|w) Xi_w`.
/// Requires POVM-valued internals; a map-valued refinement defines an
/// instrument decomposition rather than a single output POVM.
pub fn apply_refinement(r: &Refinement) -> Result<Povm> {
    if r.is_map_valued() {
        return Err(Error::Unsupported(
            "apply_refinement needs POVM-valued internals".into(),
        ));
    }
    Povm::new(r.reconstructed_effects(), r.output_labels().to_vec())
}

/// True iff every nonzero element has exactly one eigenvalue above
/// `rank_tol` relative to its largest eigenvalue.
pub fn is_rank_one_povm(povm: &Povm, rank_tol: f64) -> Result<bool> {
    for e in povm.elements() {
        let spec = e.hermitized().hermitian_eigs()?;
        let top = spec.values.first().copied().unwrap_or(0.0);
        if top <= tol::PSD {
            continue; // zero element
        }
        let significant = spec.values.iter().filter(|&&v| v > rank_tol * top).count();
        if significant != 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Apply an instrument: blocks `(x, Tr N_x(rho), N_x(rho)/Tr)`.
pub fn instrument_apply(
    instr: &QuantumInstrument,
    rho: &DensityOperator,
) -> Result<ClassicalQuantumState> {
    if instr.dim() != rho.dim() {
        return Err(Error::DimMismatch("instrument vs state".into()));
    }
    let blocks: Vec<Operator> = (0..instr.outcomes())
        .map(|x| instr.apply_outcome(x, rho.operator()).hermitized())
        .collect();
    let labels = (0..instr.outcomes())
        .map(|x| instr.label(x).to_string())
        .collect();
    let d = rho.dim();
    ClassicalQuantumState::new(labels, blocks, Some(SystemLayout::new(&["A"], &[d])?))
}

/// Reference-side cq state of an instrument via the transpose trick, with
/// one block per `(x, y)` Kraus label pair.
pub fn instrument_reference_cq(
    instr: &QuantumInstrument,
    rho: &DensityOperator,
) -> Result<(ClassicalQuantumState, Vec<(usize, usize)>)> {
    let mut effects = Vec::new();
    let mut labels = Vec::new();
    let mut index = Vec::new();
    for x in 0..instr.outcomes() {
        for (y, k) in instr.kraus(x).iter().enumerate() {
            effects.push(k.dagger().mul(k));
            labels.push(format!("{}:{y}", instr.label(x)));
            index.push((x, y));
        }
    }
    let blocks = reference_blocks(rho, &effects)?;
    let d = rho.dim();
    let cq = ClassicalQuantumState::new(labels, blocks, Some(SystemLayout::new(&["R"], &[d])?))?;
    Ok((cq, index))
}

/// Mixture-of-unitaries test for a single-Kraus instrument: every
/// `(N_x^dag N_x)^T` restricted to the support of `rho` must be proportional
/// to the identity there, and equivalently `I(X;R)` of the induced cq state
/// must vanish. Both checks run and must agree.
pub fn is_random_unitary_kraus(instr: &QuantumInstrument, rho: &DensityOperator) -> Result<bool> {
    if !instr.is_single_kraus() {
        return Err(Error::Unsupported(
            "random-unitary test needs single-Kraus families".into(),
        ));
    }
    let spec = rho.spectrum();
    let support: Vec<usize> = spec
        .values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > tol::PSD)
        .map(|(i, _)| i)
        .collect();
    let mut operator_test = true;
    for x in 0..instr.outcomes() {
        let effect = instr.effect(x);
        let k = support.len();
        let mut restricted = Operator::zeros(k.max(1));
        for (a, &i) in support.iter().enumerate() {
            let vi = spec.eigenvector(i);
            for (b, &j) in support.iter().enumerate() {
                let vj = spec.eigenvector(j);
                restricted.set(a, b, effect.sandwich(&vi, &vj));
            }
        }
        let mean = restricted.trace().re / k.max(1) as f64;
        let dev = restricted
            .sub(&Operator::identity(k.max(1)).scale(mean))
            .spectral_norm()?;
        if dev > 1e-8 * mean.abs().max(1e-12) * k as f64 {
            operator_test = false;
            break;
        }
    }
    let (cq, _) = instrument_reference_cq(instr, rho)?;
    let entropy_test = cq.mutual_information()? < tol::ENTROPY;
    if operator_test != entropy_test {
        return Err(Error::InvalidOperator(format!(
            "random-unitary checks disagree: operator {operator_test}, entropy {entropy_test}"
        )));
    }
    Ok(operator_test)
}

/// Groenewold information gain `H(rho) - sum_x p(x) H(N_x(rho)/p(x))` in bits.
pub fn groenewold_gain(rho: &DensityOperator, instr: &QuantumInstrument) -> Result<f64> {
    let cq = instrument_apply(instr, rho)?;
    let mut avg_post = 0.0;
    for x in 0..cq.len() {
        let w = cq.weight(x);
        if w > tol::TRACE {
            avg_post += w * qcore::entropy_of_psd(cq.weighted_block(x))?;
        }
    }
    Ok(qcore::von_neumann_entropy(rho) - avg_post)
}

#[cfg(test)]
mod tests;
