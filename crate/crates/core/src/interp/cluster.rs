//! Grouping signs by guide panel, reading order and pairwise layout
//! relations.

use serde::{Deserialize, Serialize};

use crate::geometry::{point_in_polygon, Bounds, Point2D, QuadBox};
use crate::scene::{PanelAnnotation, SceneRecord, SignKind};

/// Reference to a sign in its scene: kind plus index in that kind's list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SignRef {
    pub kind: SignKind,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum MemberContent {
    Symbol { class_code: String },
    Text { transcription: String },
}

/// A recognized sign inside a cluster.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Member {
    pub source: SignRef,
    pub quad: QuadBox,
    pub content: MemberContent,
}

impl Member {
    pub fn center(&self) -> Point2D {
        self.quad.center()
    }

    pub fn class_code(&self) -> Option<&str> {
        match &self.content {
            MemberContent::Symbol { class_code } => Some(class_code),
            MemberContent::Text { .. } => None,
        }
    }

    pub fn transcription(&self) -> Option<&str> {
        match &self.content {
            MemberContent::Text { transcription } => Some(transcription),
            MemberContent::Symbol { .. } => None,
        }
    }
}

/// Signs sharing a guide panel, or one sign outside every panel.
#[derive(Debug, Clone, PartialEq)]
pub struct SignCluster {
    pub panel: Option<PanelAnnotation>,
    /// In scene order: symbols first, then texts.
    pub members: Vec<Member>,
}

impl SignCluster {
    /// Box used to place the cluster among its siblings.
    pub fn extent(&self) -> Bounds {
        match &self.panel {
            Some(p) => p.quad.bounds(),
            None => {
                let pts: Vec<Point2D> = self.members.iter().flat_map(|m| m.quad.corners).collect();
                Bounds::of(&pts)
            }
        }
    }
}

/// Assigns every non-ignored symbol and text to the smallest panel whose
/// box contains its centre; signs outside all panels become singleton
/// clusters. Clusters come out in reading order of their extents.
pub fn cluster_signs(scene: &SceneRecord) -> Vec<SignCluster> {
    let mut clusters: Vec<SignCluster> = scene
        .panels
        .iter()
        .map(|p| SignCluster {
            panel: Some(p.clone()),
            members: Vec::new(),
        })
        .collect();
    let mut orphans = Vec::new();
    let members = scene
        .symbols
        .iter()
        .enumerate()
        .filter(|(_, s)| !s.ignored)
        .map(|(i, s)| Member {
            source: SignRef {
                kind: SignKind::Symbol,
                index: i,
            },
            quad: s.quad,
            content: MemberContent::Symbol {
                class_code: s.class_code.clone(),
            },
        })
        .chain(
            scene
                .texts
                .iter()
                .enumerate()
                .filter(|(_, t)| !t.ignored)
                .map(|(i, t)| Member {
                    source: SignRef {
                        kind: SignKind::Text,
                        index: i,
                    },
                    quad: t.quad,
                    content: MemberContent::Text {
                        transcription: t.transcription.clone(),
                    },
                }),
        );
    let areas: Vec<f64> = scene.panels.iter().map(|p| p.quad.area()).collect();
    for m in members {
        let c = m.center();
        let home = scene
            .panels
            .iter()
            .enumerate()
            .filter(|(_, p)| point_in_polygon(&c, &p.quad.corners))
            .min_by(|(i, _), (j, _)| areas[*i].total_cmp(&areas[*j]).then(i.cmp(j)))
            .map(|(i, _)| i);
        match home {
            Some(i) => clusters[i].members.push(m),
            None => orphans.push(SignCluster {
                panel: None,
                members: vec![m],
            }),
        }
    }
    clusters.extend(orphans);
    let extents: Vec<Bounds> = clusters.iter().map(SignCluster::extent).collect();
    let order = order_boxes(&extents);
    let mut slots: Vec<Option<SignCluster>> = clusters.into_iter().map(Some).collect();
    order
        .rows
        .into_iter()
        .flatten()
        .map(|i| slots[i].take().expect("each index once"))
        .collect()
}

/// Rows of indices, top to bottom, each left to right.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReadingOrder {
    pub rows: Vec<Vec<usize>>,
}

impl ReadingOrder {
    pub fn flat(&self) -> Vec<usize> {
        self.rows.iter().flatten().copied().collect()
    }

    /// Row index per item.
    pub fn row_of(&self, n: usize) -> Vec<usize> {
        let mut out = vec![0; n];
        for (r, row) in self.rows.iter().enumerate() {
            for &i in row {
                out[i] = r;
            }
        }
        out
    }

    /// Position in the flattened order per item.
    pub fn rank_of(&self, n: usize) -> Vec<usize> {
        let mut out = vec![0; n];
        for (k, i) in self.flat().into_iter().enumerate() {
            out[i] = k;
        }
        out
    }
}

/// Two boxes share a row when their vertical extents overlap by at least
/// half the shorter height.
fn same_row(a: &Bounds, b: &Bounds) -> bool {
    let overlap = a.max_y.min(b.max_y) - a.min_y.max(b.min_y);
    let shorter = a.height().min(b.height());
    overlap > 0.0 && overlap >= 0.5 * shorter
}

fn order_boxes(boxes: &[Bounds]) -> ReadingOrder {
    let cy = |b: &Bounds| 0.5 * (b.min_y + b.max_y);
    let cx = |b: &Bounds| 0.5 * (b.min_x + b.max_x);
    let mut idx: Vec<usize> = (0..boxes.len()).collect();
    idx.sort_by(|&i, &j| {
        cy(&boxes[i])
            .total_cmp(&cy(&boxes[j]))
            .then(cx(&boxes[i]).total_cmp(&cx(&boxes[j])))
            .then(i.cmp(&j))
    });
    let mut rows: Vec<Vec<usize>> = Vec::new();
    for i in idx {
        match rows
            .iter_mut()
            .find(|r| r.iter().any(|&j| same_row(&boxes[i], &boxes[j])))
        {
            Some(r) => r.push(i),
            None => rows.push(vec![i]),
        }
    }
    for r in &mut rows {
        r.sort_by(|&i, &j| {
            cx(&boxes[i])
                .total_cmp(&cx(&boxes[j]))
                .then(cy(&boxes[i]).total_cmp(&cy(&boxes[j])))
                .then(i.cmp(&j))
        });
    }
    ReadingOrder { rows }
}

/// Groups members into rows by vertical overlap (at least half the shorter
/// height); rows run top to bottom and members left to right.
pub fn reading_order(cluster: &SignCluster) -> ReadingOrder {
    let boxes: Vec<Bounds> = cluster.members.iter().map(|m| m.quad.bounds()).collect();
    order_boxes(&boxes)
}

/// Eight compass bins, counter-clockwise from east on screen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Direction {
    E,
    NE,
    N,
    NW,
    W,
    SW,
    S,
    SE,
}

impl Direction {
    const ORDER: [Direction; 8] = [
        Direction::E,
        Direction::NE,
        Direction::N,
        Direction::NW,
        Direction::W,
        Direction::SW,
        Direction::S,
        Direction::SE,
    ];

    pub fn index(&self) -> usize {
        Direction::ORDER
            .iter()
            .position(|d| d == self)
            .expect("listed")
    }

    pub fn opposite(&self) -> Direction {
        Direction::ORDER[(self.index() + 4) % 8]
    }

    /// Bin of the screen vector `(dx, dy)` (y grows downward). Bin edges
    /// sit at 22.5° + k·45°; a vector on an edge goes to the
    /// counter-clockwise bin.
    pub fn of_vector(dx: f64, dy: f64) -> Direction {
        let theta = (-dy).atan2(dx).to_degrees();
        let bin = ((theta + 22.5) / 45.0).floor() as i64;
        Direction::ORDER[bin.rem_euclid(8) as usize]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Relation {
    pub from: usize,
    pub to: usize,
    pub direction: Direction,
    /// Centre distance over the largest centre distance in the cluster.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpatialDependence {
    pub relations: Vec<Relation>,
    members: usize,
}

impl SpatialDependence {
    /// Relation from `i` to `j`, if both are members and distinct.
    pub fn get(&self, i: usize, j: usize) -> Option<&Relation> {
        if i == j || i >= self.members || j >= self.members {
            return None;
        }
        // Ordered pairs are stored row-major without the diagonal.
        let k = i * (self.members - 1) + if j > i { j - 1 } else { j };
        self.relations.get(k)
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.get(i, j).map_or(0.0, |r| r.distance)
    }
}

/// Direction and normalized distance for every ordered member pair.
/// Reverse pairs get the opposite bin, so directions are antisymmetric by
/// construction.
pub fn spatial_dependence(cluster: &SignCluster) -> SpatialDependence {
    let n = cluster.members.len();
    let centers: Vec<Point2D> = cluster.members.iter().map(Member::center).collect();
    let mut max = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            max = max.max(centers[i].dist(&centers[j]));
        }
    }
    let mut relations = Vec::with_capacity(n * n.saturating_sub(1));
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let (a, b) = (i.min(j), i.max(j));
            let forward =
                Direction::of_vector(centers[b].x - centers[a].x, centers[b].y - centers[a].y);
            let direction = if i < j { forward } else { forward.opposite() };
            let d = centers[a].dist(&centers[b]);
            let distance = if max > 0.0 { d / max } else { 1.0 };
            relations.push(Relation {
                from: i,
                to: j,
                direction,
                distance,
            });
        }
    }
    SpatialDependence {
        relations,
        members: n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{SymbolAnnotation, TextAnnotation};

    fn scene() -> SceneRecord {
        let mut s = SceneRecord::new("t", 1000, 1000);
        s.panels.push(PanelAnnotation::new(
            QuadBox::rect(0.0, 0.0, 400.0, 300.0),
            3,
            1,
        ));
        s.panels.push(PanelAnnotation::new(
            QuadBox::rect(100.0, 100.0, 300.0, 250.0),
            1,
            2,
        ));
        s.panels.push(PanelAnnotation::new(
            QuadBox::rect(500.0, 0.0, 900.0, 300.0),
            2,
            3,
        ));
        s.symbols.push(SymbolAnnotation::new(
            QuadBox::rect(10.0, 10.0, 50.0, 50.0),
            "a1",
        ));
        s.symbols.push(SymbolAnnotation::new(
            QuadBox::rect(150.0, 150.0, 190.0, 190.0),
            "p1",
        ));
        s.symbols.push(SymbolAnnotation::new(
            QuadBox::rect(600.0, 600.0, 640.0, 640.0),
            "w3",
        ));
        s.texts.push(TextAnnotation::new(
            QuadBox::rect(60.0, 20.0, 120.0, 40.0),
            "G70",
        ));
        s.texts.push(TextAnnotation::new(
            QuadBox::rect(200.0, 160.0, 240.0, 180.0),
            "###",
        ));
        s
    }

    #[test]
    fn smallest_containing_panel_wins() {
        let clusters = cluster_signs(&scene());
        assert_eq!(clusters.len(), 4);
        let by_panel = |id: u32| {
            clusters
                .iter()
                .find(|c| c.panel.as_ref().is_some_and(|p| p.panel_id == id))
                .unwrap()
        };
        assert_eq!(by_panel(1).members.len(), 2);
        assert_eq!(by_panel(2).members.len(), 1);
        assert_eq!(by_panel(2).members[0].class_code(), Some("p1"));
        assert!(by_panel(3).members.is_empty());
        let orphan = clusters.iter().find(|c| c.panel.is_none()).unwrap();
        assert_eq!(orphan.members[0].class_code(), Some("w3"));
    }

    #[test]
    fn clusters_partition_non_ignored_signs() {
        let clusters = cluster_signs(&scene());
        let mut refs: Vec<SignRef> = clusters
            .iter()
            .flat_map(|c| c.members.iter().map(|m| m.source))
            .collect();
        refs.sort();
        assert_eq!(refs.len(), 4);
        refs.dedup();
        assert_eq!(refs.len(), 4);
    }

    #[test]
    fn cluster_order_follows_panels() {
        let ids: Vec<Option<u32>> = cluster_signs(&scene())
            .iter()
            .map(|c| c.panel.as_ref().map(|p| p.panel_id))
            .collect();
        assert_eq!(ids, [Some(1), Some(2), Some(3), None]);
    }

    fn member(x0: f64, y0: f64, x1: f64, y1: f64) -> Member {
        Member {
            source: SignRef {
                kind: SignKind::Text,
                index: 0,
            },
            quad: QuadBox::rect(x0, y0, x1, y1),
            content: MemberContent::Text {
                transcription: "x".into(),
            },
        }
    }

    #[test]
    fn row_major_order() {
        let c = SignCluster {
            panel: None,
            members: vec![
                member(100.0, 60.0, 140.0, 100.0),
                member(10.0, 62.0, 50.0, 98.0),
                member(100.0, 5.0, 140.0, 45.0),
                member(10.0, 0.0, 50.0, 40.0),
            ],
        };
        let o = reading_order(&c);
        assert_eq!(o.rows, vec![vec![3, 2], vec![1, 0]]);
        assert_eq!(o.flat(), [3, 2, 1, 0]);
        assert_eq!(o.row_of(4), [1, 1, 0, 0]);
    }

    #[test]
    fn compass_bins() {
        assert_eq!(Direction::of_vector(1.0, 0.0), Direction::E);
        assert_eq!(Direction::of_vector(0.0, -1.0), Direction::N);
        assert_eq!(Direction::of_vector(0.0, 1.0), Direction::S);
        assert_eq!(Direction::of_vector(-1.0, 0.0), Direction::W);
        assert_eq!(Direction::of_vector(1.0, 1.0), Direction::SE);
        let edge = 22.5f64.to_radians();
        assert_eq!(
            Direction::of_vector(edge.cos(), -edge.sin() - 1e-12),
            Direction::NE
        );
    }

    #[test]
    fn dependence_of_a_pair() {
        let c = SignCluster {
            panel: None,
            members: vec![member(0.0, 0.0, 10.0, 10.0), member(50.0, 0.0, 60.0, 10.0)],
        };
        let d = spatial_dependence(&c);
        assert_eq!(d.relations.len(), 2);
        assert_eq!(d.get(0, 1).unwrap().direction, Direction::E);
        assert_eq!(d.get(0, 1).unwrap().distance, 1.0);
        assert_eq!(d.get(1, 0).unwrap().direction, Direction::W);
        let single = SignCluster {
            panel: None,
            members: vec![member(0.0, 0.0, 1.0, 1.0)],
        };
        assert!(spatial_dependence(&single).relations.is_empty());
    }

    #[test]
    fn lookup_matches_relation_list() {
        let c = SignCluster {
            panel: None,
            members: (0..5)
                .map(|i| {
                    member(
                        i as f64 * 7.0,
                        (i * i) as f64,
                        i as f64 * 7.0 + 3.0,
                        (i * i) as f64 + 3.0,
                    )
                })
                .collect(),
        };
        let d = spatial_dependence(&c);
        for r in &d.relations {
            assert_eq!(d.get(r.from, r.to), Some(r));
        }
        assert!(d.get(2, 2).is_none());
    }
}
