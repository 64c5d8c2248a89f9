//! Single-letter rate regions for the five coding theorems, the instrument
//! four-resource breakdown, and the uncertainty-relation lower bounds.

use serde::Serialize;

use crate::cq::{self, Povm, QuantumInstrument, Refinement};
use crate::error::{Error, Result};
use crate::qcore::{
    self, canonical_purification, embed, partial_trace, shannon_entropy, DensityOperator, Operator,
    SystemLayout,
};
use crate::tol;

mod joint;
pub use joint::JointCqState;

/// One half-plane constraint `r_coeff * R + s_coeff * S >= value`.
#[derive(Debug, Clone, Serialize)]
pub struct HalfPlane {
    pub name: String,
    pub r_coeff: f64,
    pub s_coeff: f64,
    pub value: f64,
}

/// A rate region cut out by half-planes, with its distinguished corner.
#[derive(Debug, Clone, Serialize)]
pub struct RateRegion {
    pub constraints: Vec<HalfPlane>,
    /// The achievable corner `(R*, S*)`.
    pub corner: (f64, f64),
}

impl RateRegion {
    fn from_rates(comm: f64, sum: f64, comm_name: &str, sum_name: &str) -> Self {
        RateRegion {
            constraints: vec![
                HalfPlane {
                    name: comm_name.into(),
                    r_coeff: 1.0,
                    s_coeff: 0.0,
                    value: comm,
                },
                HalfPlane {
                    name: sum_name.into(),
                    r_coeff: 1.0,
                    s_coeff: 1.0,
                    value: sum,
                },
            ],
            corner: (comm, sum - comm),
        }
    }

    pub fn contains(&self, r: f64, s: f64, slack: f64) -> bool {
        self.constraints
            .iter()
            .all(|h| h.r_coeff * r + h.s_coeff * s >= h.value - slack)
    }

    /// Minimal common randomness at communication rate `r`; None if `r` is
    /// below the communication constraint. Negative values extend the sum
    /// constraint into the randomness-generation branch.
    pub fn min_randomness(&self, r: f64) -> Option<f64> {
        let mut s_min = f64::NEG_INFINITY;
        for h in &self.constraints {
            if h.s_coeff == 0.0 {
                if h.r_coeff * r < h.value - tol::ENTROPY {
                    return None;
                }
            } else {
                s_min = s_min.max((h.value - h.r_coeff * r) / h.s_coeff);
            }
        }
        Some(s_min)
    }
}

/// Union of per-refinement regions, reported as the list plus the lower
/// envelope of achievable `(R, S)` sampled on an R-grid.
#[derive(Debug, Clone, Serialize)]
pub struct RegionUnion {
    pub regions: Vec<RateRegion>,
    pub envelope: Vec<(f64, f64)>,
}

const ENVELOPE_STEP: f64 = 1e-3;

impl RegionUnion {
    fn new(regions: Vec<RateRegion>) -> Self {
        let r_lo = regions
            .iter()
            .map(|g| g.corner.0)
            .fold(f64::INFINITY, f64::min);
        let r_hi = regions
            .iter()
            .flat_map(|g| g.constraints.iter())
            .filter(|h| h.s_coeff != 0.0)
            .map(|h| h.value)
            .fold(r_lo, f64::max);
        let mut envelope = Vec::new();
        if r_lo.is_finite() {
            let steps = ((r_hi - r_lo) / ENVELOPE_STEP).ceil().max(1.0) as usize;
            for k in 0..=steps {
                let r = r_lo + k as f64 * ENVELOPE_STEP;
                let s = regions
                    .iter()
                    .filter_map(|g| g.min_randomness(r))
                    .fold(f64::INFINITY, f64::min);
                if s.is_finite() {
                    envelope.push((r, s));
                }
            }
        }
        RegionUnion { regions, envelope }
    }
}

/// Feedback measurement compression: `R >= I(X;R)`, `R + S >= H(X)` on the
/// post-measurement state, with corner `(I(X;R), H(X|R))`.
pub fn mc_feedback_region(rho: &DensityOperator, povm: &Povm) -> Result<RateRegion> {
    let cq = cq::transpose_trick_states(rho, povm)?;
    let joint = JointCqState::from_cq(&cq, "X", "R")?;
    let i_xr = joint.mutual((&["X"], &[]), (&[], &["R"]))?;
    let h_x = joint.entropy_of((&["X"], &[]))?;
    Ok(RateRegion::from_rates(i_xr, h_x, "I(X;R)", "H(X)"))
}

/// Classical communication, sender-kept output, common randomness and local
/// randomness rates for simulating a quantum instrument.
#[derive(Debug, Clone, Serialize)]
pub struct FourResourceBreakdown {
    pub classical_communication: f64, // I(X;R)
    pub sender_kept: f64,             // I(Y;R|X)
    pub common_randomness: f64,       // H(X|R)
    pub local_randomness: f64,        // H(Y|XR)
}

#[derive(Debug, Clone, Serialize)]
pub struct InstrumentRates {
    pub region: RateRegion,
    pub breakdown: FourResourceBreakdown,
}

/// Feedback instrument simulation rates on the Kraus-labeled reference state.
pub fn instrument_feedback_rates(
    rho: &DensityOperator,
    instr: &QuantumInstrument,
) -> Result<InstrumentRates> {
    let (cq, index) = cq::instrument_reference_cq(instr, rho)?;
    let blocks: Vec<(Vec<usize>, Operator)> = index
        .iter()
        .zip(0..cq.len())
        .map(|(&(x, y), i)| (vec![x, y], cq.weighted_block(i).clone()))
        .collect();
    let d = rho.dim();
    let joint = JointCqState::new(
        vec!["X".into(), "Y".into()],
        blocks,
        SystemLayout::new(&["R"], &[d])?,
    )?;
    let i_xr = joint.mutual((&["X"], &[]), (&[], &["R"]))?;
    let h_x = joint.entropy_of((&["X"], &[]))?;
    let h_x_given_r = joint.conditional((&["X"], &[]), (&[], &["R"]))?;
    let i_y_r_given_x = joint.mutual_conditioned((&["Y"], &[]), (&[], &["R"]), (&["X"], &[]))?;
    let h_y_given_xr = joint.conditional((&["Y"], &[]), (&["X"], &["R"]))?;
    Ok(InstrumentRates {
        region: RateRegion::from_rates(i_xr, h_x, "I(X;R)", "H(X)"),
        breakdown: FourResourceBreakdown {
            classical_communication: i_xr,
            sender_kept: i_y_r_given_x,
            common_randomness: h_x_given_r,
            local_randomness: h_y_given_xr,
        },
    })
}

/// Builds the `(W, X, R)` state of a refinement via the transpose trick.
fn refinement_joint(rho: &DensityOperator, refinement: &Refinement) -> Result<JointCqState> {
    let effects: Vec<Operator> = (0..refinement.internal_len())
        .map(|w| refinement.internal_element(w).clone())
        .collect();
    let ref_blocks = cq::reference_blocks(rho, &effects)?;
    let mut blocks = Vec::new();
    for (w, block) in ref_blocks.iter().enumerate() {
        for x in 0..refinement.output_len() {
            let p = refinement.post_processing(w, x);
            blocks.push((vec![w, x], block.scale(p)));
        }
    }
    let d = rho.dim();
    JointCqState::new(
        vec!["W".into(), "X".into()],
        blocks,
        SystemLayout::new(&["R"], &[d])?,
    )
}

/// Non-feedback measurement compression: per refinement
/// `R >= I(W;R)`, `R + S >= I(W;XR)`; returns the union over the supplied
/// refinements plus the trivial `W = X` one. This is an inner bound on the
/// theorem's union over all decompositions.
pub fn mc_nonfeedback_region(
    rho: &DensityOperator,
    povm: &Povm,
    refinements: &[Refinement],
) -> Result<RegionUnion> {
    let mut all = vec![Refinement::trivial(povm)];
    all.extend(refinements.iter().cloned());
    let mut regions = Vec::new();
    for refinement in &all {
        refinement.check_reconstructs(povm)?;
        let joint = refinement_joint(rho, refinement)?;
        // Markov structure R - W - X must hold on the constructed state
        let markov = joint.mutual_conditioned((&["X"], &[]), (&[], &["R"]), (&["W"], &[]))?;
        if markov.abs() > tol::ENTROPY * 10.0 {
            return Err(Error::BadRefinement(format!(
                "Markov defect I(X;R|W) = {markov}"
            )));
        }
        let i_wr = joint.mutual((&["W"], &[]), (&[], &["R"]))?;
        let i_w_xr = joint.mutual((&["W"], &[]), (&["X"], &["R"]))?;
        regions.push(RateRegion::from_rates(i_wr, i_w_xr, "I(W;R)", "I(W;XR)"));
    }
    Ok(RegionUnion::new(regions))
}

/// Classical data compression with quantum side information: the rate is
/// `H(X|B)`.
pub fn cdc_qsi_rate(cq_state: &cq::ClassicalQuantumState) -> Result<f64> {
    cq_state.conditional_entropy()
}

/// Purify a multipartite state, prepending a reference factor `R`.
pub fn purify_with_reference(
    rho: &DensityOperator,
    layout: &SystemLayout,
) -> Result<(DensityOperator, SystemLayout)> {
    layout.check_operator(rho.operator())?;
    let (psi, _) = canonical_purification(rho);
    let mut labels: Vec<&str> = vec!["R"];
    let mut dims = vec![rho.dim()];
    for (l, &d) in layout.labels().iter().zip(layout.dims()) {
        if *l == "R" {
            return Err(Error::BadLayout("label R is reserved".into()));
        }
        labels.push(l);
        dims.push(d);
    }
    let full_layout = SystemLayout::new(&labels, &dims)?;
    Ok((psi.to_density(), full_layout))
}

/// Measurement compression with quantum side information (feedback):
/// `R >= I(X;R|B)`, `R + S >= H(X|B)` with corner `(I(X;R|B), H(X|RB))`.
pub fn mcqsi_feedback_region(
    rho_ab: &DensityOperator,
    layout: &SystemLayout,
    povm: &Povm,
    measured: &str,
    side: &str,
) -> Result<RateRegion> {
    let (phi, full_layout) = purify_with_reference(rho_ab, layout)?;
    let cq = cq::post_measurement_cq(povm, &phi, &full_layout, measured)?;
    let q_layout = cq
        .layout()
        .ok_or_else(|| Error::BadLayout("missing layout".into()))?
        .clone();
    let blocks = (0..cq.len())
        .map(|i| (vec![i], cq.weighted_block(i).clone()))
        .collect();
    let joint = JointCqState::new(vec!["X".into()], blocks, q_layout)?;
    let i_x_r_given_b = joint.mutual_conditioned((&["X"], &[]), (&[], &["R"]), (&[], &[side]))?;
    let h_x_given_b = joint.conditional((&["X"], &[]), (&[], &[side]))?;
    let h_x_given_rb = joint.conditional((&["X"], &[]), (&[], &["R", side]))?;
    let mut region = RateRegion::from_rates(i_x_r_given_b, h_x_given_b, "I(X;R|B)", "H(X|B)");
    // corner uses H(X|RB), which matches h_x_given_b - i_x_r_given_b
    region.corner = (i_x_r_given_b, h_x_given_rb);
    Ok(region)
}

/// Non-feedback MC-QSI: per refinement `R >= I(W;R|B)`, `R + S >= I(W;XR|B)`.
pub fn mcqsi_nonfeedback_region(
    rho_ab: &DensityOperator,
    layout: &SystemLayout,
    povm: &Povm,
    refinements: &[Refinement],
    measured: &str,
    side: &str,
) -> Result<RegionUnion> {
    let (phi, full_layout) = purify_with_reference(rho_ab, layout)?;
    let mut all = vec![Refinement::trivial(povm)];
    all.extend(refinements.iter().cloned());
    let mut regions = Vec::new();
    for refinement in &all {
        refinement.check_reconstructs(povm)?;
        let mut blocks = Vec::new();
        let mut q_layout = None;
        for w in 0..refinement.internal_len() {
            let moved = embed(refinement.internal_element(w), &full_layout, &[measured])?
                .mul(phi.operator());
            let remaining: Vec<&str> = full_layout
                .labels()
                .into_iter()
                .filter(|l| *l != measured)
                .collect();
            let (red, l) = partial_trace(&moved, &full_layout, &remaining)?;
            for x in 0..refinement.output_len() {
                let p = refinement.post_processing(w, x);
                blocks.push((vec![w, x], red.scale(p)));
            }
            q_layout = Some(l);
        }
        let joint = JointCqState::new(
            vec!["W".into(), "X".into()],
            blocks,
            q_layout.expect("at least one internal outcome"),
        )?;
        let i_w_r_given_b =
            joint.mutual_conditioned((&["W"], &[]), (&[], &["R"]), (&[], &[side]))?;
        let i_w_xr_given_b =
            joint.mutual_conditioned((&["W"], &[]), (&["X"], &["R"]), (&[], &[side]))?;
        regions.push(RateRegion::from_rates(
            i_w_r_given_b,
            i_w_xr_given_b,
            "I(W;R|B)",
            "I(W;XR|B)",
        ));
    }
    Ok(RegionUnion::new(regions))
}

/// Entropic-uncertainty lower bounds on the classical costs of simulating a
/// pair of measurements on the `A` factor of a tripartite state.
#[derive(Debug, Clone, Serialize)]
pub struct UncertaintyReport {
    pub c1: f64,
    pub c2: f64,
    pub h_x_given_b: f64,
    pub h_z_given_c: f64,
    pub lhs_total_cost: f64,
    pub lhs_total_cr: f64,
    pub bound_total_cost: f64,
    pub bound_total_cr: f64,
    pub cost_bound_satisfied: bool,
    pub cr_bound_satisfied: bool,
}

pub fn uncertainty_bounds(
    rho_abc: &DensityOperator,
    layout: &SystemLayout,
    povm_x: &Povm,
    povm_z: &Povm,
) -> Result<UncertaintyReport> {
    let a_dim = layout.dim_of("A")?;
    if povm_x.dim() != a_dim || povm_z.dim() != a_dim {
        return Err(Error::DimMismatch("POVMs must act on factor A".into()));
    }
    // c1 = max ||sqrt(Lambda_x) sqrt(Gamma_z)||_inf^2, c2 = max sqrt(Tr Lambda_x Gamma_z)
    let mut c1 = 0.0f64;
    let mut c2 = 0.0f64;
    for ex in povm_x.elements() {
        let (sx, _) = qcore::psd_sqrt_and_pinv_sqrt(ex, 1e-14)?;
        for ez in povm_z.elements() {
            let (sz, _) = qcore::psd_sqrt_and_pinv_sqrt(ez, 1e-14)?;
            let overlap = sx.mul(&sz).spectral_norm()?;
            c1 = c1.max(overlap * overlap);
            c2 = c2.max(ex.mul(ez).trace().re.max(0.0).sqrt());
        }
    }

    let measure_keep = |povm: &Povm, keep: &[&str]| -> Result<f64> {
        let cq = cq::post_measurement_cq(povm, rho_abc, layout, "A")?;
        let reduced = cq.reduce(keep)?;
        reduced.conditional_entropy()
    };
    let h_x_given_b = measure_keep(povm_x, &["B"])?;
    let h_z_given_c = measure_keep(povm_z, &["C"])?;

    let (phi, full_layout) = purify_with_reference(rho_abc, layout)?;
    let cr_entropy = |povm: &Povm| -> Result<f64> {
        let cq = cq::post_measurement_cq(povm, &phi, &full_layout, "A")?;
        cq.conditional_entropy()
    };
    let h_x_given_rbc = cr_entropy(povm_x)?;
    let h_z_given_rbc = cr_entropy(povm_z)?;

    let h_a = qcore::subsystem_entropy(rho_abc, layout, &["A"])?;
    let lhs_total_cost = h_x_given_b + h_z_given_c;
    let lhs_total_cr = h_x_given_rbc + h_z_given_rbc;
    let bound_total_cost = (1.0 / c1).log2();
    let bound_total_cr = ((1.0 / c2).log2() - h_a).max(0.0);
    Ok(UncertaintyReport {
        c1,
        c2,
        h_x_given_b,
        h_z_given_c,
        lhs_total_cost,
        lhs_total_cr,
        bound_total_cost,
        bound_total_cr,
        cost_bound_satisfied: lhs_total_cost >= bound_total_cost - tol::LEMMA,
        cr_bound_satisfied: lhs_total_cr >= bound_total_cr - tol::LEMMA,
    })
}

/// Shannon entropy of the Born distribution; convenience for reports.
pub fn outcome_entropy(rho: &DensityOperator, povm: &Povm) -> Result<f64> {
    Ok(shannon_entropy(&cq::born_distribution(povm, rho)?))
}
