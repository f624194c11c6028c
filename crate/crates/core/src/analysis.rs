//! Weak-point identification: per-instance ranking, Birnbaum importance and
//! redundancy what-if studies.

use serde::{Deserialize, Serialize};

use crate::analytic::{self, compile_valid, component_reliability, MissionTime};
use crate::model::{BlockExpr, InstanceId, ModelError, SystemModel};
use crate::{Error, Result};

/// R_sys(instance working) − R_sys(instance failed).
pub fn birnbaum_importance(model: &SystemModel, instance: &InstanceId, t: MissionTime) -> Result<f64> {
    let up = analytic::evaluate_with(model, t, &[(instance.clone(), 1.0)])?;
    let down = analytic::evaluate_with(model, t, &[(instance.clone(), 0.0)])?;
    Ok(up - down)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankMeasure {
    /// Least reliable instance first.
    ByReliabilityAscending,
    /// Most important instance first.
    ByBirnbaumDescending,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImportanceRow {
    pub instance: InstanceId,
    pub reliability: f64,
    pub birnbaum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub mission_time: f64,
    pub measure: RankMeasure,
    pub rows: Vec<ImportanceRow>,
}

/// Ranks every instance by `measure`. Ties keep component declaration order
/// (then instance index).
pub fn rank_instances(model: &SystemModel, t: MissionTime, measure: RankMeasure) -> Result<ImportanceReport> {
    compile_valid(model)?;
    let mut rows = model
        .instances_in_declaration_order()
        .into_iter()
        .map(|instance| {
            let rate = model
                .component(&instance.component)
                .ok_or_else(|| ModelError::UnknownComponent(instance.component.clone()))?
                .failure_rate;
            Ok(ImportanceRow {
                reliability: component_reliability(rate, t)?,
                birnbaum: birnbaum_importance(model, &instance, t)?,
                instance,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    // Stable sorts keep declaration order among equal keys.
    match measure {
        RankMeasure::ByReliabilityAscending => rows.sort_by(|a, b| a.reliability.total_cmp(&b.reliability)),
        RankMeasure::ByBirnbaumDescending => rows.sort_by(|a, b| b.birnbaum.total_cmp(&a.birnbaum)),
    }
    Ok(ImportanceReport {
        mission_time: t.as_hours(),
        measure,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct WhatIfResult {
    pub baseline_reliability: f64,
    pub modified_reliability: f64,
    pub delta: f64,
    pub modified_model: SystemModel,
}

/// Replaces `instance` with `copies` active-parallel copies of the same
/// component and reports the change in system reliability at `t`.
///
/// Instance indices in the returned model are reassigned left to right.
pub fn whatif_redundancy(
    model: &SystemModel,
    instance: &InstanceId,
    copies: usize,
    t: MissionTime,
) -> Result<WhatIfResult> {
    if copies < 2 {
        return Err(Error::Config(format!("copies must be at least 2, got {copies}")));
    }
    compile_valid(model)?;
    let mut root = model.root().clone();
    if !replace_leaf(&mut root, instance, copies) {
        return Err(ModelError::UnknownInstance(instance.to_string()).into());
    }
    let modified_model = model.with_root(root);
    let baseline_reliability = analytic::evaluate(model, t)?;
    let modified_reliability = analytic::evaluate(&modified_model, t)?;
    Ok(WhatIfResult {
        baseline_reliability,
        modified_reliability,
        delta: modified_reliability - baseline_reliability,
        modified_model,
    })
}

fn replace_leaf(expr: &mut BlockExpr, target: &InstanceId, copies: usize) -> bool {
    match expr {
        BlockExpr::Component(id) if id == target => {
            *expr = BlockExpr::parallel((0..copies).map(|_| BlockExpr::leaf(target.component.clone())));
            true
        }
        BlockExpr::Component(_) => false,
        BlockExpr::Series(cs) | BlockExpr::Parallel(cs) => cs.iter_mut().any(|c| replace_leaf(c, target, copies)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Component;

    fn t(h: f64) -> MissionTime {
        MissionTime::hours(h).unwrap()
    }

    #[test]
    fn single_component_importance_is_one() {
        let m = SystemModel::new("s", vec![Component::new("a", 1e-3)], BlockExpr::leaf("a"));
        assert_eq!(
            birnbaum_importance(&m, &InstanceId::new("a", 0), t(500.0)).unwrap(),
            1.0
        );
    }

    #[test]
    fn unknown_instance_errors() {
        let m = SystemModel::new("s", vec![Component::new("a", 1e-3)], BlockExpr::leaf("a"));
        let ghost = InstanceId::new("ghost", 0);
        assert!(birnbaum_importance(&m, &ghost, t(1.0)).is_err());
        assert!(whatif_redundancy(&m, &ghost, 2, t(1.0)).is_err());
        assert!(matches!(
            whatif_redundancy(&m, &InstanceId::new("a", 0), 1, t(1.0)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn identical_components_keep_declaration_order() {
        let m = SystemModel::new(
            "s",
            vec![
                Component::new("c", 1e-4),
                Component::new("a", 1e-4),
                Component::new("b", 1e-4),
            ],
            BlockExpr::series([BlockExpr::leaf("b"), BlockExpr::leaf("a"), BlockExpr::leaf("c")]),
        );
        for measure in [RankMeasure::ByReliabilityAscending, RankMeasure::ByBirnbaumDescending] {
            let r = rank_instances(&m, t(1000.0), measure).unwrap();
            let order: Vec<_> = r.rows.iter().map(|r| r.instance.component.as_str()).collect();
            assert_eq!(order, ["c", "a", "b"]);
        }
    }

    #[test]
    fn duplicating_perfect_component_changes_nothing() {
        let m = SystemModel::new(
            "s",
            vec![Component::new("a", 1e-3), Component::new("z", 0.0)],
            BlockExpr::series([BlockExpr::leaf("a"), BlockExpr::leaf("z")]),
        );
        let w = whatif_redundancy(&m, &InstanceId::new("z", 0), 2, t(1000.0)).unwrap();
        assert_eq!(w.delta, 0.0);
    }

    #[test]
    fn whatif_leaves_original_untouched() {
        let m = SystemModel::new(
            "s",
            vec![Component::new("a", 1e-3), Component::new("b", 1e-4)],
            BlockExpr::series([BlockExpr::leaf("a"), BlockExpr::leaf("b")]),
        );
        let before = m.clone();
        let w = whatif_redundancy(&m, &InstanceId::new("a", 0), 3, t(100.0)).unwrap();
        assert_eq!(m, before);
        assert_eq!(
            w.modified_model.root(),
            &BlockExpr::Series(vec![
                BlockExpr::Parallel(vec![
                    BlockExpr::Component(InstanceId::new("a", 0)),
                    BlockExpr::Component(InstanceId::new("a", 1)),
                    BlockExpr::Component(InstanceId::new("a", 2)),
                ]),
                BlockExpr::Component(InstanceId::new("b", 0)),
            ])
        );
        assert!((w.delta - (w.modified_reliability - w.baseline_reliability)).abs() == 0.0);
        assert!(w.delta > 0.0);
    }
}
