//! Slot binding and description rendering.

use std::collections::BTreeMap;

use serde::Serialize;

use super::cluster::{reading_order, SignCluster, SpatialDependence};
use super::grammar::{ClauseKind, FrameType, Grammar, Segment};
use crate::error::{Error, Result};
use crate::metrics::{collapse_slot_lists, tokenize, FrameToken, SyntaxFrame, TokenizerMode};
use crate::scene::split_class_code;

/// One slot value and the cluster member it was read from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Filler {
    pub text: String,
    pub member: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Clause {
    pub kind: ClauseKind,
    /// Anchoring symbol, if any.
    pub anchor: Option<usize>,
    pub slots: BTreeMap<String, Vec<Filler>>,
    /// Reading-order position used to sort clauses.
    pub rank: usize,
}

impl Clause {
    fn new(kind: ClauseKind, anchor: Option<usize>, rank: usize) -> Clause {
        Clause {
            kind,
            anchor,
            slots: BTreeMap::new(),
            rank,
        }
    }

    fn push(&mut self, slot: &str, text: impl Into<String>, member: usize) {
        self.slots
            .entry(slot.to_string())
            .or_default()
            .push(Filler {
                text: text.into(),
                member,
            });
    }

    fn has(&self, slot: &str) -> bool {
        self.slots.get(slot).is_some_and(|v| !v.is_empty())
    }
}

/// Frame type plus the bound clauses of one cluster.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemanticGraph {
    pub frame_type: FrameType,
    pub clauses: Vec<Clause>,
    /// Members no rule could bind, in reading order.
    pub unbound: Vec<usize>,
}

impl SemanticGraph {
    /// Slot name to fillers, across clauses in clause order.
    pub fn bindings(&self) -> BTreeMap<String, Vec<String>> {
        let mut m: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for c in &self.clauses {
            for (slot, fs) in &c.slots {
                m.entry(slot.clone())
                    .or_default()
                    .extend(fs.iter().map(|f| f.text.clone()));
            }
        }
        m
    }

    /// Members that feed at least one slot, ascending.
    pub fn source_members(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .clauses
            .iter()
            .flat_map(|c| c.slots.values().flatten().map(|f| f.member))
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Arrow,
    Limit,
    Phrase,
    Route,
    Number,
    Vehicle,
    Dest,
    Unknown,
}

/// Binds cluster members to slots.
///
/// Every symbol with a known class anchors one clause: arrows give an
/// action, limit symbols a subject and unit, other symbols a phrase. Texts
/// then bind in a fixed priority: route codes and destinations attach to
/// the nearest arrow in their row or a row above; numbers give the
/// quantity of the nearest limit symbol; vehicle names attach to the
/// nearest prohibition symbol. Routes and destinations with no arrow form
/// one anchorless clause. Distances come from `dep`; ties go to the member
/// earlier in reading order.
pub fn assemble_semantics(
    cluster: &SignCluster,
    dep: &SpatialDependence,
    grammar: &Grammar,
) -> Result<SemanticGraph> {
    let frame_type = match &cluster.panel {
        Some(p) => grammar.frame_for_panel(p.panel_class).ok_or_else(|| {
            Error::Assembly(format!("no frame type for panel class {}", p.panel_class))
        })?,
        None => {
            let letter = cluster
                .members
                .iter()
                .find_map(|m| m.class_code())
                .and_then(split_class_code)
                .map(|(c, _)| c)
                .ok_or_else(|| {
                    Error::Assembly("cluster has neither a panel nor a symbol".into())
                })?;
            grammar.frame_for_letter(letter).ok_or_else(|| {
                Error::Assembly(format!("no frame type for symbol letter `{letter}`"))
            })?
        }
    };

    let n = cluster.members.len();
    let order = reading_order(cluster);
    let row = order.row_of(n);
    let rank = order.rank_of(n);
    let flat = order.flat();

    let roles: Vec<Role> = cluster
        .members
        .iter()
        .map(|m| match (m.class_code(), m.transcription()) {
            (Some(code), _) if grammar.action(code).is_some() => Role::Arrow,
            (Some(code), _) if grammar.limit(code).is_some() => Role::Limit,
            (Some(code), _) if grammar.phrase(code).is_some() => Role::Phrase,
            (Some(_), _) => Role::Unknown,
            (None, Some(t)) if grammar.is_route(t) => Role::Route,
            (None, Some(t)) if grammar.is_number(t) => Role::Number,
            (None, Some(t)) if grammar.is_vehicle(t) => Role::Vehicle,
            (None, Some(_)) => Role::Dest,
            (None, None) => Role::Unknown,
        })
        .collect();

    let mut clauses: Vec<Clause> = Vec::new();
    let mut clause_of: Vec<Option<usize>> = vec![None; n];
    for &i in &flat {
        let code = cluster.members[i].class_code().unwrap_or_default();
        let clause = match roles[i] {
            Role::Arrow => {
                let mut c = Clause::new(ClauseKind::Action, Some(i), rank[i]);
                c.push("action", grammar.action(code).unwrap_or_default(), i);
                c
            }
            Role::Limit => {
                let mut c = Clause::new(ClauseKind::Limit, Some(i), rank[i]);
                c.push(
                    "subject",
                    &grammar.limit(code).expect("limit role").subject,
                    i,
                );
                c
            }
            Role::Phrase => {
                let mut c = Clause::new(ClauseKind::Phrase, Some(i), rank[i]);
                c.push("phrase", grammar.phrase(code).unwrap_or_default(), i);
                c
            }
            _ => continue,
        };
        clause_of[i] = Some(clauses.len());
        clauses.push(clause);
    }

    let nearest = |from: usize, accept: &dyn Fn(usize) -> bool| -> Option<usize> {
        flat.iter()
            .copied()
            .filter(|&j| j != from && accept(j))
            .min_by(|&a, &b| {
                dep.distance(from, a)
                    .total_cmp(&dep.distance(from, b))
                    .then(rank[a].cmp(&rank[b]))
            })
    };
    let is_p_symbol = |j: usize| {
        matches!(roles[j], Role::Limit | Role::Phrase)
            && cluster.members[j]
                .class_code()
                .and_then(split_class_code)
                .is_some_and(|(c, _)| c == 'p')
    };

    let mut unbound = Vec::new();
    let mut loose_routes = Vec::new();
    let mut loose_dests = Vec::new();
    for &i in &flat {
        let text = cluster.members[i].transcription().unwrap_or_default();
        match roles[i] {
            Role::Route | Role::Dest => {
                let slot = if roles[i] == Role::Route {
                    "route"
                } else {
                    "dest"
                };
                match nearest(i, &|j| roles[j] == Role::Arrow && row[j] <= row[i]) {
                    Some(a) => clauses[clause_of[a].expect("anchor")].push(slot, text, i),
                    None if roles[i] == Role::Route => loose_routes.push(i),
                    None => loose_dests.push(i),
                }
            }
            Role::Number => match nearest(i, &|j| roles[j] == Role::Limit) {
                Some(l) if !clauses[clause_of[l].expect("anchor")].has("quantity") => {
                    let code = cluster.members[l].class_code().unwrap_or_default();
                    let unit = &grammar.limit(code).expect("limit role").unit;
                    let q = grammar.quantity(text, unit)?;
                    clauses[clause_of[l].expect("anchor")].push("quantity", q, i);
                }
                _ => unbound.push(i),
            },
            Role::Vehicle => match nearest(i, &is_p_symbol) {
                Some(p) => clauses[clause_of[p].expect("anchor")].push("vehicle", text, i),
                None => unbound.push(i),
            },
            Role::Unknown => unbound.push(i),
            Role::Arrow | Role::Limit | Role::Phrase => {}
        }
    }
    if !loose_routes.is_empty() || !loose_dests.is_empty() {
        let kind = if loose_routes.is_empty() {
            ClauseKind::Dest
        } else {
            ClauseKind::Route
        };
        let first = loose_routes
            .iter()
            .chain(&loose_dests)
            .map(|&i| rank[i])
            .min()
            .expect("nonempty");
        let mut c = Clause::new(kind, None, first);
        for &i in &loose_routes {
            c.push(
                "route",
                cluster.members[i].transcription().unwrap_or_default(),
                i,
            );
        }
        for &i in &loose_dests {
            c.push(
                "dest",
                cluster.members[i].transcription().unwrap_or_default(),
                i,
            );
        }
        clauses.push(c);
    }
    clauses.sort_by_key(|c| c.rank);
    unbound.sort_by_key(|&i| rank[i]);
    Ok(SemanticGraph {
        frame_type,
        clauses,
        unbound,
    })
}

/// Generated sentence with the frame it is expected to reduce to.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Description {
    pub panel_id: Option<u32>,
    pub text: String,
    pub frame: SyntaxFrame,
}

fn frame_of(segments: &[Segment], text: &str) -> SyntaxFrame {
    let mode = TokenizerMode::Auto.resolve(text);
    let mut tokens = Vec::new();
    for s in segments {
        match &s.slot {
            Some(slot) => tokens.push(FrameToken::Slot(slot.clone())),
            None => tokens.extend(
                tokenize(&s.text, mode)
                    .tokens
                    .into_iter()
                    .map(FrameToken::Word),
            ),
        }
    }
    SyntaxFrame {
        skeleton: collapse_slot_lists(tokens),
    }
}

/// Fills the frame type's clause templates and joins the clauses; a graph
/// without clauses yields the frame type's fallback sentence.
pub fn generate_description(
    graph: &SemanticGraph,
    cluster: &SignCluster,
    grammar: &Grammar,
) -> Result<Description> {
    let mut segments: Vec<Segment> = Vec::new();
    if graph.clauses.is_empty() {
        segments.push(Segment {
            text: grammar.fallback(graph.frame_type)?.to_string(),
            slot: None,
        });
    }
    for (k, clause) in graph.clauses.iter().enumerate() {
        let template = grammar.template(graph.frame_type, clause.kind)?;
        let fillers: BTreeMap<String, Vec<String>> = clause
            .slots
            .iter()
            .map(|(s, fs)| (s.clone(), fs.iter().map(|f| f.text.clone()).collect()))
            .collect();
        if k > 0 {
            segments.push(Segment {
                text: grammar.clause_separator().to_string(),
                slot: None,
            });
        }
        segments.extend(template.render(&fillers, grammar.list_separator())?);
    }
    let text: String = segments.iter().map(|s| s.text.as_str()).collect();
    if text.trim().is_empty() {
        return Err(Error::Assembly("empty description".into()));
    }
    let frame = frame_of(&segments, &text);
    Ok(Description {
        panel_id: cluster.panel.as_ref().map(|p| p.panel_id),
        text,
        frame,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::QuadBox;
    use crate::interp::cluster::{cluster_signs, spatial_dependence};
    use crate::scene::{PanelAnnotation, SceneRecord, SymbolAnnotation, TextAnnotation};

    fn guidance_scene() -> SceneRecord {
        let mut s = SceneRecord::new("g", 1000, 1000);
        s.panels.push(PanelAnnotation::new(
            QuadBox::rect(0.0, 0.0, 600.0, 100.0),
            3,
            7,
        ));
        s.symbols.push(SymbolAnnotation::new(
            QuadBox::rect(10.0, 10.0, 90.0, 90.0),
            "a1",
        ));
        s.texts.push(TextAnnotation::new(
            QuadBox::rect(100.0, 30.0, 160.0, 70.0),
            "G70",
        ));
        s.texts.push(TextAnnotation::new(
            QuadBox::rect(180.0, 30.0, 280.0, 70.0),
            "Xi'an",
        ));
        s.texts.push(TextAnnotation::new(
            QuadBox::rect(300.0, 30.0, 440.0, 70.0),
            "Xianyang",
        ));
        s
    }

    fn describe(scene: &SceneRecord, g: &Grammar) -> (SemanticGraph, Description) {
        let c = &cluster_signs(scene)[0];
        let graph = assemble_semantics(c, &spatial_dependence(c), g).unwrap();
        let d = generate_description(&graph, c, g).unwrap();
        (graph, d)
    }

    #[test]
    fn guidance_cluster() {
        let (graph, d) = describe(&guidance_scene(), &Grammar::english());
        assert_eq!(graph.frame_type, FrameType::Guidance);
        let b = graph.bindings();
        assert_eq!(b["action"], ["Go straight"]);
        assert_eq!(b["route"], ["G70"]);
        assert_eq!(b["dest"], ["Xi'an", "Xianyang"]);
        assert!(graph.unbound.is_empty());
        assert_eq!(d.text, "Go straight along G70 to Xi'an, Xianyang");
        assert_eq!(d.panel_id, Some(7));
        assert_eq!(
            d.frame.labels(),
            ["Go", "straight", "along", "SLOT:route", "to", "SLOT:dest"]
        );
    }

    #[test]
    fn speed_limit() {
        let mut s = SceneRecord::new("p", 1000, 1000);
        s.panels.push(PanelAnnotation::new(
            QuadBox::rect(0.0, 0.0, 300.0, 100.0),
            1,
            1,
        ));
        s.symbols.push(SymbolAnnotation::new(
            QuadBox::rect(10.0, 10.0, 90.0, 90.0),
            "p1",
        ));
        s.texts.push(TextAnnotation::new(
            QuadBox::rect(100.0, 30.0, 160.0, 70.0),
            "60",
        ));
        let (graph, d) = describe(&s, &Grammar::english());
        assert_eq!(graph.frame_type, FrameType::Prohibition);
        assert_eq!(graph.bindings()["quantity"], ["60 km/h"]);
        assert_eq!(d.text, "Speed limited to 60 km/h");
        let (_, zh) = describe(&s, &Grammar::chinese());
        assert_eq!(zh.text, "限速60km/h");
    }

    #[test]
    fn empty_panel_falls_back() {
        let mut s = SceneRecord::new("e", 100, 100);
        s.panels.push(PanelAnnotation::new(
            QuadBox::rect(0.0, 0.0, 50.0, 50.0),
            2,
            1,
        ));
        let (graph, d) = describe(&s, &Grammar::english());
        assert!(graph.clauses.is_empty());
        assert_eq!(d.text, "Warning sign");
    }

    #[test]
    fn unbound_members_are_kept() {
        let mut s = guidance_scene();
        s.texts.push(TextAnnotation::new(
            QuadBox::rect(460.0, 30.0, 500.0, 70.0),
            "80",
        ));
        s.symbols.push(SymbolAnnotation::new(
            QuadBox::rect(510.0, 10.0, 590.0, 90.0),
            "x9",
        ));
        let (graph, d) = describe(&s, &Grammar::english());
        assert_eq!(graph.unbound.len(), 2);
        assert_eq!(d.text, "Go straight along G70 to Xi'an, Xianyang");
    }

    #[test]
    fn destinations_without_arrow() {
        let mut s = SceneRecord::new("d", 1000, 1000);
        s.panels.push(PanelAnnotation::new(
            QuadBox::rect(0.0, 0.0, 600.0, 100.0),
            6,
            1,
        ));
        s.texts.push(TextAnnotation::new(
            QuadBox::rect(10.0, 30.0, 90.0, 70.0),
            "Baoji",
        ));
        let (_, d) = describe(&s, &Grammar::english());
        assert_eq!(d.text, "To Baoji");
    }

    #[test]
    fn orphan_text_cannot_be_framed() {
        let mut s = SceneRecord::new("o", 100, 100);
        s.texts.push(TextAnnotation::new(
            QuadBox::rect(10.0, 10.0, 30.0, 20.0),
            "Baoji",
        ));
        let c = &cluster_signs(&s)[0];
        assert!(matches!(
            assemble_semantics(c, &spatial_dependence(c), &Grammar::english()),
            Err(Error::Assembly(_))
        ));
    }

    #[test]
    fn missing_template_names_frame() {
        let g = Grammar::english().without_frame(FrameType::Guidance);
        let c = &cluster_signs(&guidance_scene())[0];
        let graph = assemble_semantics(c, &spatial_dependence(c), &g).unwrap();
        match generate_description(&graph, c, &g) {
            Err(Error::MissingTemplate(name)) => assert_eq!(name, "guidance"),
            other => panic!("{other:?}"),
        }
    }
}
