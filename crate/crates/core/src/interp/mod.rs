//! Rule-based interpretation: cluster signs by panel, relate them
//! spatially, bind slots and render one description per cluster.

mod cluster;
mod grammar;
mod semantics;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

pub use cluster::{
    cluster_signs, reading_order, spatial_dependence, Direction, Member, MemberContent,
    ReadingOrder, Relation, SignCluster, SignRef, SpatialDependence,
};
pub use grammar::{
    ClauseKind, FrameType, Grammar, LimitEntry, Segment, Template, ENTITY_SLOTS, SCHEMA_VERSION,
};
pub use semantics::{
    assemble_semantics, generate_description, Clause, Description, Filler, SemanticGraph,
};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::metrics::{evaluate_descriptions, MetricScores, SlotRules, TokenizerMode};
use crate::scene::{DescriptionAnnotation, SceneRecord};

/// One line of a descriptions file. Orphan clusters have no panel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescriptionRecord {
    pub image_id: String,
    pub panel_id: Option<u32>,
    pub text: String,
}

/// Reference descriptions of annotated scenes, in scene order.
pub fn reference_records(scenes: &[SceneRecord]) -> Vec<DescriptionRecord> {
    scenes
        .iter()
        .flat_map(|s| {
            s.descriptions.iter().map(|d| DescriptionRecord {
                image_id: s.image_id.clone(),
                panel_id: Some(d.panel_id),
                text: d.text.clone(),
            })
        })
        .collect()
}

/// A cluster that produced no description, and why.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub image_id: String,
    /// Position of the cluster in reading order.
    pub cluster: usize,
    pub panel_id: Option<u32>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SceneInterpretation {
    pub image_id: String,
    pub descriptions: Vec<Description>,
    pub diagnostics: Vec<Diagnostic>,
}

impl SceneInterpretation {
    /// Descriptions of panel clusters, in the scene annotation shape.
    /// Orphan clusters have no panel to attach to and are left out.
    pub fn panel_descriptions(&self) -> Vec<DescriptionAnnotation> {
        self.descriptions
            .iter()
            .filter_map(|d| {
                d.panel_id.map(|panel_id| DescriptionAnnotation {
                    panel_id,
                    text: d.text.clone(),
                })
            })
            .collect()
    }

    pub fn records(&self) -> Vec<DescriptionRecord> {
        self.descriptions
            .iter()
            .map(|d| DescriptionRecord {
                image_id: self.image_id.clone(),
                panel_id: d.panel_id,
                text: d.text.clone(),
            })
            .collect()
    }

    /// True when the scene had clusters and none of them rendered.
    pub fn failed(&self) -> bool {
        self.descriptions.is_empty() && !self.diagnostics.is_empty()
    }
}

fn interpret_cluster(cluster: &SignCluster, grammar: &Grammar) -> Result<Description> {
    let dep = spatial_dependence(cluster);
    let graph = assemble_semantics(cluster, &dep, grammar)?;
    generate_description(&graph, cluster, grammar)
}

/// Interprets every cluster of a scene. A failing cluster is reported as a
/// diagnostic and the others still render.
pub fn interpret_scene(scene: &SceneRecord, grammar: &Grammar) -> SceneInterpretation {
    let mut descriptions = Vec::new();
    let mut diagnostics = Vec::new();
    for (k, cluster) in cluster_signs(scene).iter().enumerate() {
        match interpret_cluster(cluster, grammar) {
            Ok(d) => descriptions.push(d),
            Err(e) => diagnostics.push(Diagnostic {
                image_id: scene.image_id.clone(),
                cluster: k,
                panel_id: cluster.panel.as_ref().map(|p| p.panel_id),
                message: e.to_string(),
            }),
        }
    }
    SceneInterpretation {
        image_id: scene.image_id.clone(),
        descriptions,
        diagnostics,
    }
}

pub fn interpret_corpus(
    scenes: &[SceneRecord],
    grammar: &Grammar,
    exec: Exec,
) -> Vec<SceneInterpretation> {
    exec.map(scenes, |s| interpret_scene(s, grammar))
}

/// Candidate and reference texts lined up by `(image_id, panel_id)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DescriptionPairs {
    pub candidates: Vec<String>,
    pub references: Vec<String>,
    /// References with no candidate; they are scored against "".
    pub missing: usize,
    /// Candidates naming a panel without a reference, orphans included.
    pub unmatched: usize,
}

/// Pairs every reference description of `gt` with the candidate for the
/// same panel. Candidates from images outside `gt` are a data mismatch;
/// two candidates for one panel are a validation error.
pub fn pair_descriptions(
    gt: &[SceneRecord],
    candidates: &[DescriptionRecord],
) -> Result<DescriptionPairs> {
    let images: BTreeSet<&str> = gt.iter().map(|s| s.image_id.as_str()).collect();
    let extra: Vec<&str> = candidates
        .iter()
        .map(|c| c.image_id.as_str())
        .filter(|id| !images.contains(id))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if let Some(first) = extra.first() {
        return Err(Error::ImageSetMismatch {
            missing: 0,
            extra: extra.len(),
            example: first.to_string(),
        });
    }
    let mut by_panel: BTreeMap<(&str, u32), &str> = BTreeMap::new();
    let mut orphans = 0;
    for c in candidates {
        let Some(panel) = c.panel_id else {
            orphans += 1;
            continue;
        };
        if by_panel
            .insert((c.image_id.as_str(), panel), c.text.as_str())
            .is_some()
        {
            return Err(Error::Validation {
                field: format!("{}/panel {panel}", c.image_id),
                message: "more than one candidate description".into(),
            });
        }
    }
    let mut out = DescriptionPairs {
        candidates: Vec::new(),
        references: Vec::new(),
        missing: 0,
        unmatched: orphans,
    };
    for s in gt {
        for d in &s.descriptions {
            let text = by_panel.remove(&(s.image_id.as_str(), d.panel_id));
            if text.is_none() {
                out.missing += 1;
            }
            out.candidates.push(text.unwrap_or_default().to_string());
            out.references.push(d.text.clone());
        }
    }
    out.unmatched += by_panel.len();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterpretationEval {
    pub pairs: usize,
    pub missing: usize,
    pub unmatched: usize,
    pub scores: MetricScores,
}

/// Pairs candidates with references and scores the pairs.
pub fn evaluate_interpretation(
    gt: &[SceneRecord],
    candidates: &[DescriptionRecord],
    rules: &SlotRules,
    mode: TokenizerMode,
    exec: Exec,
) -> Result<InterpretationEval> {
    let pairs = pair_descriptions(gt, candidates)?;
    let scores = evaluate_descriptions(&pairs.candidates, &pairs.references, rules, mode, exec)?;
    Ok(InterpretationEval {
        pairs: pairs.references.len(),
        missing: pairs.missing,
        unmatched: pairs.unmatched,
        scores,
    })
}
