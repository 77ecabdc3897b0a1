//! Built-in reference scenarios with published hit probabilities, and a
//! runner that recomputes them and reports the differences.

use serde::Serialize;

use crate::error::Result;
use crate::fault::{build_complex, Classification, FaultSpec};
use crate::mesh::{Coord, MeshShape};
use crate::reliability::{p_miss, predicted_cost, AnalysisOptions, Probability};
use crate::report::Row;

/// Allowed gap between a computed and a published value after rounding.
pub const TOLERANCE: f64 = 0.005;

#[derive(Clone, Debug, PartialEq)]
pub struct Reference {
    pub row: usize,
    pub mesh: Vec<usize>,
    pub label: Classification,
    pub origin: Vec<usize>,
    pub extents: Vec<usize>,
    /// Published value as printed.
    pub p_hit: &'static str,
}

impl Reference {
    pub fn shape(&self) -> MeshShape {
        MeshShape::new(self.mesh.clone()).expect("reference meshes are valid")
    }

    pub fn spec(&self) -> FaultSpec {
        FaultSpec::rect(Coord(self.origin.clone()), self.extents.clone())
    }

    pub fn published(&self) -> f64 {
        self.p_hit.parse().expect("published values are decimals")
    }
}

pub fn references() -> Vec<Reference> {
    use Classification::{Chain, Ring};
    let r = |row, mesh: &[usize], label, origin: &[usize], extents: &[usize], p_hit| Reference {
        row,
        mesh: mesh.to_vec(),
        label,
        origin: origin.to_vec(),
        extents: extents.to_vec(),
        p_hit,
    };
    vec![
        r(1, &[3, 2, 2], Chain, &[1, 1, 0], &[1, 1, 1], "1"),
        r(2, &[7, 8, 11], Ring, &[2, 2, 2], &[2, 1, 3], "0.214"),
        r(3, &[5, 13, 9], Ring, &[2, 3, 1], &[1, 7, 2], "0.304"),
        r(4, &[3, 5, 7], Chain, &[0, 0, 1], &[2, 2, 2], "0.817"),
        r(5, &[6, 11, 17], Ring, &[2, 4, 6], &[4, 6, 10], "0.884"),
        r(6, &[3, 7, 8, 9], Ring, &[1, 1, 1, 1], &[1, 5, 6, 8], "0.878"),
        r(7, &[2, 3, 4, 2], Chain, &[0, 0, 1, 0], &[1, 1, 2, 1], "0.976"),
        r(8, &[9, 5, 3, 9], Ring, &[2, 3, 1, 3], &[1, 1, 1, 4], "0.095"),
        r(9, &[3, 3, 3, 3, 3], Chain, &[1, 1, 1, 1, 1], &[1, 1, 1, 2, 1], "1"),
        r(10, &[5, 4, 3, 5, 6], Ring, &[1, 1, 1, 1, 1], &[1, 1, 1, 2, 1], "0.036"),
        r(11, &[5, 4, 3, 5, 6], Ring, &[2, 2, 2, 2, 2], &[2, 2, 1, 1, 3], "0.104"),
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table2Row {
    pub row: usize,
    pub mesh: String,
    pub label: String,
    pub classification: String,
    pub origin: String,
    pub fault: String,
    pub paper_p_hit: String,
    pub status: String,
    pub p_hit: Option<String>,
    pub p_hit_exact: Option<String>,
    pub abs_diff: Option<f64>,
    pub within_tolerance: Option<bool>,
    /// Hit probability when only faulty nodes count as obstacles.
    pub p_hit_fault_only: Option<String>,
    pub engine: Option<String>,
    pub note: String,
}

impl Table2Row {
    pub fn computed(&self) -> bool {
        self.p_hit.is_some()
    }
}

impl Row for Table2Row {
    fn columns() -> &'static [&'static str] {
        &[
            "row",
            "mesh",
            "label",
            "classification",
            "origin",
            "fault",
            "paper_p_hit",
            "status",
            "p_hit",
            "abs_diff",
            "within_tolerance",
            "p_hit_fault_only",
            "engine",
            "p_hit_exact",
            "note",
        ]
    }

    fn cells(&self) -> Vec<String> {
        let opt = |v: &Option<String>| v.clone().unwrap_or_else(|| "-".into());
        vec![
            self.row.to_string(),
            self.mesh.clone(),
            self.label.clone(),
            self.classification.clone(),
            self.origin.clone(),
            self.fault.clone(),
            self.paper_p_hit.clone(),
            self.status.clone(),
            opt(&self.p_hit),
            self.abs_diff.map_or("-".into(), |d| format!("{d:.3}")),
            self.within_tolerance.map_or("-".into(), |w| if w { "yes" } else { "no" }.into()),
            opt(&self.p_hit_fault_only),
            opt(&self.engine),
            opt(&self.p_hit_exact),
            self.note.clone(),
        ]
    }
}

/// Difference between a rounded computed value and a published one.
pub fn rounded_diff(p: &Probability, published: f64, precision: usize) -> f64 {
    let shown: f64 = p.render(precision).parse().expect("decimal");
    (shown - published).abs()
}

/// Recomputes one reference row, or marks it skipped when the cheapest
/// engine's predicted cost exceeds `opts.budget`.
pub fn run_reference(reference: &Reference, opts: &AnalysisOptions, precision: usize) -> Result<Table2Row> {
    let shape = reference.shape();
    let complex = build_complex(&shape, &reference.spec())?;
    let (origin, fault) = crate::report::fault_labels(&complex.specs);
    let mut row = Table2Row {
        row: reference.row,
        mesh: crate::report::mesh_label(&shape),
        label: reference.label.to_string(),
        classification: complex.classification.to_string(),
        origin,
        fault,
        paper_p_hit: reference.p_hit.to_string(),
        status: "computed".into(),
        p_hit: None,
        p_hit_exact: None,
        abs_diff: None,
        within_tolerance: None,
        p_hit_fault_only: None,
        engine: None,
        note: String::new(),
    };
    let cost = predicted_cost(&shape, &complex).cheapest();
    if cost > opts.budget {
        row.status = "SKIPPED".into();
        row.note = format!("predicted cost {cost:.3e} exceeds budget {:.3e}", opts.budget);
        return Ok(row);
    }
    let result = p_miss(&shape, &complex, opts)?;
    let fault_only = p_miss(&shape, &complex.fault_only(), opts)?;
    let diff = rounded_diff(&result.p_hit, reference.published(), precision);
    row.p_hit = Some(result.p_hit.render(precision));
    row.p_hit_exact = Some(result.p_hit.fraction());
    row.abs_diff = Some(diff);
    row.within_tolerance = Some(diff <= TOLERANCE + 1e-12);
    row.p_hit_fault_only = Some(fault_only.p_hit.render(precision));
    row.engine = Some(result.engine.to_string());
    let mut notes = Vec::new();
    if diff > TOLERANCE + 1e-12 {
        let fo = rounded_diff(&fault_only.p_hit, reference.published(), precision);
        if fo <= TOLERANCE + 1e-12 {
            notes.push(
                "published value matches counting only faulty nodes as obstacles \
                 (ring nodes and ring endpoints not counted as hits)"
                    .to_string(),
            );
        } else {
            notes.push("published value not reproduced under either obstacle model".into());
        }
    }
    if reference.label != complex.classification {
        notes.push(format!(
            "published label {} but the block touches the mesh border",
            reference.label
        ));
    }
    row.note = notes.join("; ");
    Ok(row)
}

pub fn run_all(opts: &AnalysisOptions, precision: usize) -> Result<Vec<Table2Row>> {
    references().iter().map(|r| run_reference(r, opts, precision)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_reference_is_a_valid_block() {
        for r in references() {
            let s = r.shape();
            assert!(build_complex(&s, &r.spec()).is_ok(), "row {}", r.row);
        }
    }

    #[test]
    fn first_row_matches() {
        let row = run_reference(&references()[0], &AnalysisOptions::default(), 3).unwrap();
        assert_eq!(row.p_hit.as_deref(), Some("1.000"));
        assert_eq!(row.within_tolerance, Some(true));
        assert!(row.note.is_empty());
    }

    #[test]
    fn budget_skips() {
        let opts = AnalysisOptions {
            budget: 1.0,
            ..Default::default()
        };
        let row = run_reference(&references()[1], &opts, 3).unwrap();
        assert_eq!(row.status, "SKIPPED");
        assert!(!row.computed());
    }
}
