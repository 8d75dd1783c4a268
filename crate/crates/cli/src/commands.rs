//! Subcommand bodies. Each takes the input text and returns the output text,
//! so the binary only handles arguments, files and exit codes.

use serde::Serialize;
use serde_json::json;

use loopmp::engine::{
    build_tree_decomposition, run_gm_kcn, run_kcn_network, run_tn_kcn, run_tree_equivalent, run_vanilla_bp,
    ConvergenceConfig,
};
use loopmp::graph::{classify, simplified_view, GraphClass, ViewMode};
use loopmp::inference::{
    blockbp_partition, bp_inference, gm_inference, network_inference, tn_inference, tree_inference, InferenceReport,
};
use loopmp::models::{brute_force, DEFAULT_ENUMERATION_BUDGET};
use loopmp::neighborhood::{exactness_certificate, kcn_neighborhood, tensor_neighborhood, wzpz_neighborhood};
use loopmp::transforms::{network_to_tn, tn_to_network, to_network, to_tensor_network, to_three_leg_tn, TransformResult};
use loopmp::{Error, Graph};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::MemoryBudgetExceeded(_)
        | Error::EnumerationBudgetExceeded(_)
        | Error::AlphabetBlowupExceeded(_)
        | Error::BudgetExceeded(_) => EXIT_BUDGET,
        _ => EXIT_INVALID,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Bp,
    Kcn,
    Te,
    GmKcn,
    BlockBp,
}

#[derive(Debug, Clone)]
pub struct InferOptions {
    pub method: Method,
    pub l0: usize,
    /// Seed for the random choices of the region construction.
    pub seed: u64,
    pub convergence: ConvergenceConfig,
    /// Compare with full enumeration when the model is small enough.
    pub exact: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct InferOutput {
    pub report: InferenceReport,
    /// `log Z` from the file's `metadata.log_z`, else from enumeration when
    /// requested and affordable.
    pub reference_log_z: Option<f64>,
    pub matches_reference: Option<bool>,
}

fn host_mode(fg: &Graph) -> ViewMode {
    if classify(fg).is_tensor_network() {
        ViewMode::TensorNetwork
    } else {
        ViewMode::Bipartite
    }
}

/// Runs one engine and its inference formulas on a graph file.
pub fn infer(graph_json: &str, opts: &InferOptions) -> Result<InferOutput, Error> {
    let file: loopmp::graph::GraphFile = serde_json::from_str(graph_json).map_err(|e| Error::Parse(e.to_string()))?;
    let fg = Graph::from_file(&file)?;
    let cfg = &opts.convergence;
    let class = classify(&fg);
    let report = match opts.method {
        Method::Bp => bp_inference(&fg, &run_vanilla_bp(&fg, cfg)?)?,
        Method::Kcn if class.is_network() => network_inference(&fg, &run_kcn_network(&fg, opts.l0, cfg)?)?,
        Method::Kcn if class.is_tensor_network() => tn_inference(&fg, &run_tn_kcn(&fg, opts.l0, cfg)?)?,
        Method::Kcn => {
            return Err(Error::ClassMismatch { found: class.to_string(), wanted: "kcn (use gm-kcn)".into() });
        }
        Method::GmKcn => gm_inference(&fg, &run_gm_kcn(&fg, opts.l0, cfg)?)?,
        Method::Te | Method::BlockBp => {
            let mode = host_mode(&fg);
            let n = simplified_view(&fg, mode)?.num_nodes();
            let dec = build_tree_decomposition(&fg, mode, (opts.seed % n as u64) as usize, opts.l0, opts.seed)?;
            let state = run_tree_equivalent(&fg, &dec, cfg)?;
            let mut r = tree_inference(&fg, &state)?;
            if opts.method == Method::BlockBp {
                r.method = "blockbp".into();
                r.log_z = blockbp_partition(&fg, &state)?.ln();
                r.entropy = r.log_z + r.internal_energy;
                r.entropy_regions = None;
            }
            r
        }
    };
    let from_file = file.metadata.as_ref().and_then(|m| m.get("log_z")).and_then(|v| v.as_f64());
    let reference_log_z = match from_file {
        Some(z) => Some(z),
        None if opts.exact => {
            let states: f64 = fg.var_dims().iter().map(|&d| d as f64).product();
            if states <= DEFAULT_ENUMERATION_BUDGET as f64 {
                Some(brute_force(&fg)?.log_z)
            } else {
                None
            }
        }
        None => None,
    };
    let matches_reference = reference_log_z.map(|z| (report.log_z - z).abs() <= 1e-9 * z.abs().max(1.0));
    Ok(InferOutput { report, reference_log_z, matches_reference })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Network,
    Tn,
    Tn3,
    TnToNetwork,
    NetworkToTn,
}

/// Applies a transform and returns the output graph file, with the
/// provenance of every output variable and the delta positions in its
/// metadata.
pub fn transform(graph_json: &str, to: Target) -> Result<String, Error> {
    let fg = Graph::from_json(graph_json)?;
    let r: TransformResult<f64> = match to {
        Target::Network => to_network(&fg)?,
        Target::Tn => to_tensor_network(&fg)?,
        Target::Tn3 => to_three_leg_tn(&fg)?,
        Target::TnToNetwork => tn_to_network(&fg)?,
        Target::NetworkToTn => network_to_tn(&fg)?,
    };
    let meta = json!({
        "class": classify(&r.output).to_string(),
        "variable_provenance": r.variable_provenance,
        "auxiliary_variables": r.auxiliary_variables,
        "auxiliary_factors": r.auxiliary_factors,
    });
    Ok(r.output.to_json(Some(meta)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HoodKind {
    Kcn,
    Tensor,
    Wzpz,
}

/// Which picture of the graph a neighborhood is drawn on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum View {
    /// Network picture for networks, tensor picture for tensor networks,
    /// bipartite otherwise.
    Auto,
    Fixed(ViewMode),
}

/// DOT drawing of the simple graph with the neighborhood of `center`
/// highlighted: member nodes filled, member edges bold, the center doubled.
pub fn neighborhood(graph_json: &str, center: &str, l0: usize, kind: HoodKind, view: View) -> Result<String, Error> {
    let fg = Graph::from_json(graph_json)?;
    let mode = match view {
        View::Fixed(m) => m,
        View::Auto => match classify(&fg) {
            GraphClass::Chain | GraphClass::Network => ViewMode::Network,
            GraphClass::TensorNetwork => ViewMode::TensorNetwork,
            GraphClass::General => ViewMode::Bipartite,
        },
    };
    let sg = simplified_view(&fg, mode)?;
    let i = sg.node_by_name(center)?;
    let hood = match kind {
        HoodKind::Kcn => kcn_neighborhood(&sg, i, l0)?,
        HoodKind::Tensor => tensor_neighborhood(&sg, i, l0)?,
        HoodKind::Wzpz => wzpz_neighborhood(&sg, i, l0)?,
    };
    let mut out = format!("graph neighborhood {{\n  label=\"{} of {center}, l0 = {l0}\";\n", kind_name(kind));
    for n in 0..sg.num_nodes() {
        let mut attrs = Vec::new();
        if hood.contains_node(n) {
            attrs.push("style=filled, fillcolor=lightblue".to_string());
        }
        if n == i {
            attrs.push("peripheries=2".to_string());
        }
        out.push_str(&format!("  \"{}\"{};\n", sg.name(n), bracket(&attrs)));
    }
    for (e, edge) in sg.edges().iter().enumerate() {
        let attrs = if hood.contains_edge(e) { vec!["color=blue, penwidth=2".to_string()] } else { vec![] };
        out.push_str(&format!("  \"{}\" -- \"{}\"{};\n", sg.name(edge.a), sg.name(edge.b), bracket(&attrs)));
    }
    out.push_str("}\n");
    Ok(out)
}

fn kind_name(kind: HoodKind) -> &'static str {
    match kind {
        HoodKind::Kcn => "kcn",
        HoodKind::Tensor => "tensor",
        HoodKind::Wzpz => "wzpz",
    }
}

fn bracket(attrs: &[String]) -> String {
    if attrs.is_empty() {
        String::new()
    } else {
        format!(" [{}]", attrs.join(", "))
    }
}

/// Structural summary of a graph file; fails on any validation error.
pub fn validate(graph_json: &str, l0: usize) -> Result<String, Error> {
    let fg = Graph::from_json(graph_json)?;
    let class = classify(&fg);
    let sg = simplified_view(&fg, host_mode(&fg))?;
    let summary = json!({
        "class": class.to_string(),
        "variables": fg.num_variables(),
        "factors": fg.num_factors(),
        "max_scope": fg.max_scope(),
        "max_degree": fg.max_degree(),
        "connected": fg.is_connected(),
        "l0": l0,
        "exactness_certificate": exactness_certificate(&sg, l0),
    });
    Ok(serde_json::to_string_pretty(&summary).expect("summary serializes"))
}
