//! Versioned cost report (JSON).

use std::collections::BTreeMap;

use serde::Serialize;

use crate::circuit::Circuit;
use crate::cost::{quantum_cost, CostSelection, GateCounts, StageCost};
use crate::image::ImageGray;
use crate::segmentation::{
    build_pipeline, default_thresholds, paper_pipeline_cost, table2_report, SegmentationError, Table2Row,
    ThresholdConfig,
};

pub const COST_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CostReport {
    pub schema: u32,
    pub q: usize,
    pub thresholds: Vec<u32>,
    /// Stated two-threshold total, `60q - 6`.
    pub paper_total: u64,
    /// Sum of the stated two-threshold components, `60q - 16`.
    pub component_sum: u64,
    /// Published formulas registered on the built circuit's stages.
    pub paper_cost: u64,
    /// Measured processing cost of the built circuit (preparation excluded).
    pub actual_cost: u64,
    pub totals: GateCounts,
    pub per_stage: Vec<StageCost>,
    pub cost_by_formula: BTreeMap<String, u64>,
    pub table2: Vec<Table2Row>,
}

impl CostReport {
    pub fn for_circuit(circuit: &Circuit, config: &ThresholdConfig) -> Result<Self, SegmentationError> {
        let ledger = quantum_cost(circuit, &CostSelection::Processing)?;
        let paper = paper_pipeline_cost(config.q());
        Ok(CostReport {
            schema: COST_SCHEMA,
            q: config.q(),
            thresholds: config.thresholds().to_vec(),
            paper_total: paper.paper_total,
            component_sum: paper.component_sum,
            paper_cost: ledger.paper_cost,
            actual_cost: ledger.actual_cost,
            totals: ledger.totals,
            per_stage: ledger.per_stage,
            cost_by_formula: ledger.cost_by_formula,
            table2: table2_report(config.q()),
        })
    }

    /// Report for `count` evenly spaced thresholds at depth `q`. Processing
    /// cost does not depend on the image, so a single-pixel image is used.
    pub fn for_depth(q: usize, count: usize) -> Result<Self, SegmentationError> {
        let config = ThresholdConfig::new(q, default_thresholds(q, count)?, None)?;
        let image = ImageGray::new(0, q, vec![0])?;
        Self::for_circuit(&build_pipeline(&image, &config)?, &config)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Measured processing cost of the default two-threshold pipeline at `q`.
pub fn two_threshold_actual_cost(q: usize) -> Option<u64> {
    let config = ThresholdConfig::new(q, default_thresholds(q, 2).ok()?, None).ok()?;
    let image = ImageGray::new(0, q, vec![0]).ok()?;
    let circuit = build_pipeline(&image, &config).ok()?;
    quantum_cost(&circuit, &CostSelection::Processing).ok().map(|l| l.actual_cost)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_three_report() {
        let r = CostReport::for_depth(3, 2).unwrap();
        assert_eq!(r.schema, 1);
        assert_eq!(r.thresholds, vec![2, 4]);
        assert_eq!(r.paper_total, 174);
        assert_eq!(r.component_sum, 164);
        assert_eq!(r.paper_cost, 164);
        assert!(r.actual_cost > 0);
        assert_eq!(r.per_stage.iter().map(|s| s.actual_cost).sum::<u64>(), r.actual_cost);
        assert_eq!(r.table2.len(), 4);

        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        for key in ["schema", "paperTotal", "componentSum", "actualCost", "perStage", "table2"] {
            assert!(json.get(key).is_some(), "{key}");
        }
        assert_eq!(json["table2"][0]["quantumCost"], 290);
    }

    #[test]
    fn other_threshold_counts() {
        for count in 1..=4 {
            let r = CostReport::for_depth(3, count).unwrap();
            assert_eq!(r.cost_by_formula["comparator-paper"], 41 * count as u64);
        }
    }
}
