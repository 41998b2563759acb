//! Rolling state carried between forecast days: the last trained models and
//! the realized performance histories the ensemblers are fitted on.

use std::collections::BTreeMap;
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::engine::TrainedDay;
use super::structured::WindowCurve;
use crate::data::time::target_time;
use crate::data::{DataView, Quantity};
use crate::features::Target;

pub const SCHEMA_VERSION: u32 = 1;

/// A node of the model graph that owns an ensembler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Pv,
    WindOnshore,
    WindOffshore,
    Load,
    NetImports,
    Direct,
    SemiStructured,
    Structured,
    Combined,
}

impl Node {
    pub const ALL: [Node; 9] = [
        Node::Pv,
        Node::WindOnshore,
        Node::WindOffshore,
        Node::Load,
        Node::NetImports,
        Node::Direct,
        Node::SemiStructured,
        Node::Structured,
        Node::Combined,
    ];

    pub fn from_target(t: Target) -> Node {
        match t {
            Target::Pv => Node::Pv,
            Target::WindOnshore => Node::WindOnshore,
            Target::WindOffshore => Node::WindOffshore,
            Target::Load => Node::Load,
            Target::NetImports => Node::NetImports,
            Target::PriceDirect => Node::Direct,
            Target::PriceSemiStructured => Node::SemiStructured,
        }
    }

    /// The market column this node's ensembler is scored against.
    pub fn quantity(self) -> Quantity {
        match self {
            Node::Pv => Quantity::Pv,
            Node::WindOnshore => Quantity::WindOnshore,
            Node::WindOffshore => Quantity::WindOffshore,
            Node::Load => Quantity::Load,
            Node::NetImports => Quantity::NetImports,
            Node::Direct | Node::SemiStructured | Node::Structured | Node::Combined => Quantity::Price,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Node::Pv => "pv",
            Node::WindOnshore => "wind_on",
            Node::WindOffshore => "wind_off",
            Node::Load => "load",
            Node::NetImports => "net_imports",
            Node::Direct => "direct",
            Node::SemiStructured => "semi_structured",
            Node::Structured => "structured",
            Node::Combined => "combined",
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Member forecasts for one realized target hour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryRecord {
    pub issue_date: NaiveDate,
    pub predictions: Vec<f64>,
    pub actual: f64,
}

/// Forecasts of one issue day waiting for their target hours to realize.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PendingDay {
    pub issue_date: NaiveDate,
    /// Horizon hours `1..=resolved_hours` have been moved to the histories.
    pub resolved_hours: usize,
    /// Member forecasts per node, indexed by horizon hour − 1.
    pub members: BTreeMap<Node, Vec<Vec<f64>>>,
    /// Supply curves of the day; scored at the realized residual load.
    pub curves: Vec<WindowCurve>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelState {
    pub schema_version: u32,
    pub horizon_hours: usize,
    pub last_issue_date: Option<NaiveDate>,
    pub trained: Option<TrainedDay>,
    /// Per node, per horizon hour (index h − 1), oldest first.
    pub histories: BTreeMap<Node, Vec<Vec<HistoryRecord>>>,
    pub pending: Vec<PendingDay>,
}

impl ModelState {
    pub fn new(horizon_hours: usize) -> Self {
        ModelState {
            schema_version: SCHEMA_VERSION,
            horizon_hours,
            last_issue_date: None,
            trained: None,
            histories: Node::ALL
                .iter()
                .map(|&n| (n, vec![Vec::new(); horizon_hours]))
                .collect(),
            pending: Vec::new(),
        }
    }

    pub fn history(&self, node: Node, h: usize) -> &[HistoryRecord] {
        &self.histories[&node][h - 1]
    }

    /// Moves every pending forecast whose target hour started before the
    /// view's cutoff into the histories, keeping the last `window` records.
    pub fn resolve(&mut self, view: &DataView<'_>, window: usize) {
        let horizon = self.horizon_hours;
        for day in &mut self.pending {
            while day.resolved_hours < horizon {
                let h = day.resolved_hours + 1;
                let t = target_time(day.issue_date, h);
                if t >= view.cutoff() {
                    break;
                }
                for (&node, preds) in &day.members {
                    let (Some(p), Some(actual)) = (preds.get(h - 1), view.market(node.quantity(), t)) else {
                        continue;
                    };
                    if p.iter().all(|v| v.is_finite()) {
                        push_capped(
                            &mut self.histories.get_mut(&node).expect("node history")[h - 1],
                            HistoryRecord {
                                issue_date: day.issue_date,
                                predictions: p.clone(),
                                actual,
                            },
                            window,
                        );
                    }
                }
                if !day.curves.is_empty() {
                    if let (Some(rl), Some(price)) = (view.residual_load(t), view.market(Quantity::Price, t)) {
                        push_capped(
                            &mut self.histories.get_mut(&Node::Structured).expect("node history")[h - 1],
                            HistoryRecord {
                                issue_date: day.issue_date,
                                predictions: day.curves.iter().map(|c| c.curve.eval(rl)).collect(),
                                actual: price,
                            },
                            window,
                        );
                    }
                }
                day.resolved_hours = h;
            }
        }
        self.pending.retain(|d| d.resolved_hours < horizon);
    }
}

fn push_capped(history: &mut Vec<HistoryRecord>, record: HistoryRecord, window: usize) {
    history.push(record);
    if history.len() > window {
        let excess = history.len() - window;
        history.drain(..excess);
    }
}
