//! End-to-end driver: validate, reduce, select, swap, expand, walk.

use crate::factor::{self, CutMode, SelectLimits, SelectMode};
use crate::graph::{Graph, ValidationReport};
use crate::reduce::{self, EvenFactor, ReductionRecord};
use crate::structure::{self, CollectionKind};
use crate::swap::{self, AuditReport, SwapTrace};
use crate::tour::{self, Tour, TourReport};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum SelectionMode {
    Exhaustive,
    Decomposition,
}

impl SelectionMode {
    fn to_select(self) -> SelectMode {
        match self {
            SelectionMode::Exhaustive => SelectMode::Exhaustive,
            SelectionMode::Decomposition => SelectMode::Decomposition,
        }
    }

    pub fn parse_tag(tag: &str) -> Result<SelectionMode> {
        match tag {
            "exhaustive" => Ok(SelectionMode::Exhaustive),
            "decomposition" => Ok(SelectionMode::Decomposition),
            other => Err(Error::UnsupportedFormat(format!("unknown mode '{other}'"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PipelineOptions {
    pub mode: SelectionMode,
    /// Desk-scale limit for matching enumeration and cut enumeration.
    pub desk_limit: usize,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions { mode: SelectionMode::Exhaustive, desk_limit: 24 }
    }
}

/// Selection certificate with display-ready exact values.
#[derive(Clone, Debug, serde::Serialize)]
pub struct SelectionSummary {
    pub f_value: String,
    pub f_upper: String,
    pub inequality: String,
    pub cut_mode: CutMode,
    pub candidates: usize,
    pub buckets: Vec<BucketRow>,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct BucketRow {
    pub kind: CollectionKind,
    pub members: usize,
    pub counts: Vec<usize>,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct CertificateBundle {
    pub validation: ValidationReport,
    pub selection: Option<SelectionSummary>,
    pub audit: Option<AuditReport>,
    pub tour_report: TourReport,
    /// Per-record cost increases of the expansion steps, in stack order.
    pub expansion_deltas: Vec<usize>,
    /// The replayed reduction stack reproduced the input graph exactly.
    pub graph_roundtrip: bool,
}

impl CertificateBundle {
    pub fn pass(&self) -> bool {
        self.validation.all()
            && self.tour_report.pass()
            && self.graph_roundtrip
            && self.audit.as_ref().map_or(true, |a| a.pass())
    }
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct PipelineResult {
    pub schema_version: u32,
    pub n: usize,
    pub tour: Tour,
    pub bound: String,
    pub bound_ok: bool,
    pub factor: EvenFactor,
    pub factor_cost: usize,
    pub certificates: CertificateBundle,
    pub reduction_count: usize,
    pub records: Vec<ReductionRecord>,
    pub phase1_swaps: usize,
    pub phase2_swaps: usize,
    pub trace: Vec<SwapTrace>,
}

/// Runs the whole pipeline on a validated input graph.
pub fn run_pipeline(graph: &Graph, opts: &PipelineOptions) -> Result<PipelineResult> {
    let validation = graph.validate();
    if !validation.all() {
        let mut failed = Vec::new();
        if !validation.connected {
            failed.push("connected");
        }
        if !validation.cubic {
            failed.push("cubic");
        }
        if !validation.simple {
            failed.push("simple");
        }
        if !validation.bridgeless {
            failed.push("bridgeless");
        }
        return Err(Error::InvalidGraph(format!(
            "input rejected; failed predicates: {}",
            failed.join(", ")
        )));
    }
    let n = graph.n();
    let mut selection = None;
    let mut audit = None;
    let mut phase1_swaps = 0;
    let mut phase2_swaps = 0;
    let mut trace = Vec::new();

    let (core, records) = if n <= 8 {
        (graph.clone(), Vec::new())
    } else {
        reduce::reduce_to_irreducible(graph)?
    };

    // reconstruct the intermediate graphs backwards; the final rebuild must
    // equal the input exactly
    let mut pre_graphs: Vec<Graph> = Vec::with_capacity(records.len());
    {
        let mut g = core.clone();
        for record in records.iter().rev() {
            g = reduce::reconstruct_pre(&g, record)?;
            pre_graphs.push(g.clone());
        }
        pre_graphs.reverse();
    }
    let graph_roundtrip = pre_graphs.first().unwrap_or(&core) == graph;
    if !graph_roundtrip {
        return Err(Error::InternalInvariant(
            "replaying the reduction stack does not reproduce the input".into(),
        ));
    }

    let core_factor = if core.n() <= 8 {
        let required = records.last().and_then(|r| r.required_core_edge());
        reduce::solve_small(&core, required)?
    } else {
        let collections = structure::build_collections(&core)?;
        let limits = SelectLimits { enumeration: opts.desk_limit, cuts: opts.desk_limit };
        let (two_factor, cert) =
            factor::select_two_factor(&core, &collections, opts.mode.to_select(), &limits)?;
        selection = Some(SelectionSummary {
            f_value: cert.f_value.to_string(),
            f_upper: cert.f_upper.to_string(),
            inequality: cert.inequality.to_string(),
            cut_mode: cert.cut_mode,
            candidates: cert.candidates,
            buckets: cert
                .buckets
                .iter()
                .map(|(kind, counts)| BucketRow {
                    kind: *kind,
                    members: counts.iter().sum(),
                    counts: counts.clone(),
                })
                .collect(),
        });
        let hosts = swap::hosts_of(&core);
        let mut state = swap::FactorState::init(&core, &two_factor)?;
        phase1_swaps = state.run_phase1(&core, &hosts)?;
        state.assign_c1()?;
        let snapshot = state.clone();
        phase2_swaps = state.run_phase2(&core, &hosts)?;
        let report = swap::audit_bounds(&core, &collections, &two_factor, &snapshot, &state)?;
        if !report.pass() {
            return Err(Error::InternalInvariant(format!(
                "cost-ledger audit failed: {:?}",
                report.failures()
            )));
        }
        audit = Some(report);
        trace = state.trace.clone();
        state.even_factor()
    };

    let (factor, expansion_deltas) = reduce::expand_stack(&pre_graphs, &records, core_factor)?;
    factor.validate(graph)?;
    let factor_cost = factor.cost();

    let tour = tour::build_tour(graph, &factor)?;
    let tour_report = tour::validate_tour(graph, &tour);
    let bound = tour::length_bound(n);
    let bound_ok = tour_report.length_ok;

    Ok(PipelineResult {
        schema_version: 1,
        n,
        bound: bound.to_string(),
        bound_ok,
        factor,
        factor_cost,
        certificates: CertificateBundle {
            validation,
            selection,
            audit,
            tour_report,
            expansion_deltas,
            graph_roundtrip,
        },
        reduction_count: records.len(),
        records,
        phase1_swaps,
        phase2_swaps,
        trace,
        tour,
    })
}
