//! Entity pools the generator draws texts from.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::Grammar;
use crate::metrics::{RegexSlot, SlotRules};

const DESTINATIONS_EN: [&str; 24] = [
    "Xi'an",
    "Xianyang",
    "Baoji",
    "Weinan",
    "Tongchuan",
    "Yan'an",
    "Hanzhong",
    "Ankang",
    "Shangluo",
    "Yulin",
    "Lanzhou",
    "Tianshui",
    "Zhengzhou",
    "Luoyang",
    "Taiyuan",
    "Yinchuan",
    "Chengdu",
    "Chongqing",
    "Wuhan",
    "Beijing",
    "Shanghai",
    "Nanjing",
    "Hefei",
    "Changsha",
];

const DESTINATIONS_ZH: [&str; 24] = [
    "西安", "咸阳", "宝鸡", "渭南", "铜川", "延安", "汉中", "安康", "商洛", "榆林", "兰州", "天水",
    "郑州", "洛阳", "太原", "银川", "成都", "重庆", "武汉", "北京", "上海", "南京", "合肥", "长沙",
];

const ROUTES: [&str; 16] = [
    "G5", "G30", "G65", "G70", "G69", "G85", "G108", "G210", "G310", "G312", "S1", "S2", "S107",
    "S211", "S28", "S30",
];

/// Destinations, route codes and vehicle names used to fill panels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Vocab {
    pub destinations: Vec<String>,
    pub routes: Vec<String>,
    pub vehicles: Vec<String>,
}

impl Vocab {
    /// Bundled pools for `grammar`'s language.
    pub fn bundled(grammar: &Grammar) -> Vocab {
        let dests: &[&str] = if grammar.language() == "zh" {
            &DESTINATIONS_ZH
        } else {
            &DESTINATIONS_EN
        };
        Vocab {
            destinations: dests.iter().map(|s| s.to_string()).collect(),
            routes: ROUTES.iter().map(|s| s.to_string()).collect(),
            vehicles: grammar.vehicles().to_vec(),
        }
    }

    /// Every entry must read back as its own role: routes match the route
    /// pattern, vehicles are known to the grammar, destinations are neither
    /// routes, numbers nor vehicles.
    pub fn check(&self, grammar: &Grammar) -> Result<()> {
        let bad = |what: &str, s: &str| Err(Error::Config(format!("{what} `{s}` is not usable")));
        if self.destinations.is_empty() || self.routes.is_empty() {
            return Err(Error::Config(
                "vocabulary needs destinations and routes".into(),
            ));
        }
        for d in &self.destinations {
            let t = d.trim();
            if t.is_empty()
                || t != d
                || t == crate::scene::IGNORE_TRANSCRIPTION
                || grammar.is_route(t)
                || grammar.is_number(t)
                || grammar.is_vehicle(t)
            {
                return bad("destination", d);
            }
        }
        for r in &self.routes {
            if !grammar.is_route(r) {
                return bad("route", r);
            }
        }
        for v in &self.vehicles {
            if !grammar.is_vehicle(v) {
                return bad("vehicle", v);
            }
        }
        Ok(())
    }

    /// Slot rules matching what the grammar emits for these entities:
    /// route codes, quantities with the grammar's units, and a lexicon of
    /// destinations and vehicles.
    pub fn slot_rules(&self, grammar: &Grammar) -> Result<SlotRules> {
        let mut units: Vec<&str> = grammar.limits().values().map(|l| l.unit.as_str()).collect();
        units.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
        units.dedup();
        let units: Vec<String> = units.iter().map(|u| regex::escape(u)).collect();
        let regex_slots = vec![
            RegexSlot {
                pattern: grammar.route_pattern().to_string(),
                slot: "route".into(),
            },
            RegexSlot {
                pattern: format!(r"\d+(\.\d+)?(\s?({}))?", units.join("|")),
                slot: "quantity".into(),
            },
        ];
        let lexicon = self
            .destinations
            .iter()
            .map(|d| (d.clone(), "dest".to_string()))
            .chain(
                self.vehicles
                    .iter()
                    .map(|v| (v.clone(), "vehicle".to_string())),
            )
            .collect();
        SlotRules::new(regex_slots, lexicon)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::TokenizerMode;

    #[test]
    fn bundled_pools_pass_their_own_check() {
        for g in [Grammar::english(), Grammar::chinese()] {
            Vocab::bundled(&g).check(&g).unwrap();
        }
    }

    #[test]
    fn bad_entries_rejected() {
        let g = Grammar::english();
        let mut v = Vocab::bundled(&g);
        v.destinations.push("G70".into());
        assert!(v.check(&g).is_err());
        let mut v = Vocab::bundled(&g);
        v.vehicles.push("spaceships".into());
        assert!(v.check(&g).is_err());
    }

    #[test]
    fn slot_rules_cover_quantities() {
        let g = Grammar::english();
        let r = Vocab::bundled(&g).slot_rules(&g).unwrap();
        assert_eq!(r.classify("60 km/h"), Some("quantity"));
        assert_eq!(r.classify("4.5 m"), Some("quantity"));
        assert_eq!(r.classify("S211"), Some("route"));
        assert_eq!(r.classify("trucks"), Some("vehicle"));
        let f = crate::metrics::extract_frame(
            "Height limited to 4.5 m for trucks",
            &r,
            TokenizerMode::Auto,
        )
        .unwrap();
        assert_eq!(
            f.labels(),
            [
                "Height",
                "limited",
                "to",
                "SLOT:quantity",
                "for",
                "SLOT:vehicle"
            ]
        );
    }
}
