//! Plain-text rendering of the JSON reports.

use padic_locan::json::{AnalyzeReport, ExtendReport, MahlerReport, PseudorepReport};
use padic_locan::mahler::HarnessReport;
use padic_locan::padic::{ScalarRepr, Valuation};

fn scalar(s: &ScalarRepr, p: u64) -> String {
    match s.val {
        None => format!("O({p}^{})", s.prec),
        Some(v) => format!("{}*{p}^{v}", s.unit),
    }
}

fn valuation(v: &Valuation) -> String {
    match v {
        Valuation::Finite { v } => v.to_string(),
        Valuation::Infinite { at_precision } => format!("inf@{at_precision}"),
    }
}

pub fn analyze_text(rep: &AnalyzeReport) -> String {
    let witness: Vec<String> = rep.witness_poly.iter().map(|c| scalar(c, rep.prime)).collect();
    let mut lines = vec![
        format!("prime:               {}", rep.prime),
        format!("top nilpotent:       {}", rep.top_nilpotent),
        format!(
            "nilpotency index:    {}",
            rep.nilpotency_index.map(|i| i.to_string()).unwrap_or_else(|| "-".into())
        ),
        format!(
            "contraction degree:  {}",
            rep.locan_degree.map(|i| i.to_string()).unwrap_or_else(|| "none".into())
        ),
        format!("witness poly:        [{}]", witness.join(", ")),
        format!("closure rank mod p:  {}", rep.closure_rank_mod_p),
    ];
    if rep.valid_on_truncation_only {
        lines.push("note:                approximate operator; valid on truncation only".into());
    }
    lines.join("\n")
}

pub fn extend_text(rep: &ExtendReport) -> String {
    let rows: Vec<String> = rep
        .result_matrix
        .iter()
        .map(|row| {
            let cells: Vec<String> = row.iter().map(|s| scalar(s, rep.prime)).collect();
            format!("  [{}]", cells.join(", "))
        })
        .collect();
    format!(
        "n_min: {}\nn_used: {}\nnorm: p^-({})\nresult:\n{}",
        rep.n_min,
        rep.n_used,
        valuation(&rep.norm),
        rows.join("\n")
    )
}

pub fn mahler_text(rep: &MahlerReport) -> String {
    let coeffs: Vec<String> = rep.coefficients.iter().map(|c| scalar(c, rep.prime)).collect();
    let level = match rep.analyticity.level {
        Some(h) => format!("analytic on cosets of level {h}"),
        None => format!("not detected up to {} coefficients", rep.analyticity.coeff_count),
    };
    format!(
        "coefficients: [{}]\nsup valuation: {}\nverdict: {level}",
        coeffs.join(", "),
        valuation(&rep.sup_valuation),
    )
}

pub fn harness_text(rep: &HarnessReport) -> String {
    [
        format!("modulus exponent:      {}", rep.exponent),
        format!("subgroup level:        {}", rep.level),
        format!("invariant rank:        {}", rep.invariant_rank),
        format!("admissible:            {}", rep.admissible),
        format!("A-action restricts:    {}", rep.preserves_invariants),
        format!("sublattice contained:  {}", rep.analytic_sublattice_contained),
        format!("closure rank (full):   {}", rep.closure_rank_full),
        format!("closure rank (invts):  {}", rep.closure_rank_invariants),
    ]
    .join("\n")
}

pub fn pseudorep_text(rep: &PseudorepReport) -> String {
    let mut lines = Vec::new();
    for check in &rep.validation.checks {
        let status = if check.pass { "ok" } else { "VIOLATED" };
        let ctx = check
            .counterexample
            .as_ref()
            .map(|c| format!(" at {c:?}"))
            .unwrap_or_default();
        lines.push(format!("{:24}{status}{ctx}", check.name.clone() + ":"));
    }
    if let Some(red) = &rep.reducibility {
        lines.push(format!("reducibility:           {:?}", red.verdict));
        lines.push(format!("nonzero x-values:       {}", red.generators.len()));
    }
    if let Some(rec) = &rep.reconstruction {
        match &rec.failure {
            Some(msg) => lines.push(format!("reconstruction:         failed ({msg})")),
            None => lines.push(format!(
                "reconstruction:         pivot {:?}, multiplicative={}, trace={}, det={}",
                rec.pivot, rec.multiplicative, rec.trace_matches, rec.det_matches
            )),
        }
    }
    lines.join("\n")
}
