//! Discrete state semantics, the goal-distance heuristic, skeleton search and ranking.

mod rank;
mod search;
mod state;

pub use rank::rank_skeletons;
pub use search::{
    search_skeletons, PhaseDurations, SearchConfig, SearchError, SearchOutcome, Skeleton,
};
pub use state::{applicable, exec, heuristic, SymbolicError, SymbolicState};

/// Builds a state from `"(pred a b)"` strings. Test and fixture helper.
pub fn state_of(atoms: &[&str]) -> SymbolicState {
    atoms
        .iter()
        .map(|s| crate::pddl::Atom::parse(s).expect("well-formed atom"))
        .collect()
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::pddl::{ground_actions, parse_domain, Atom, GroundedAction, SET_TABLE_DOMAIN};

    fn actions() -> Vec<GroundedAction> {
        ground_actions(&parse_domain(SET_TABLE_DOMAIN).unwrap())
    }

    fn find<'a>(acts: &'a [GroundedAction], name: &str, args: &[&str]) -> &'a GroundedAction {
        acts.iter()
            .find(|a| a.name == name && a.args.iter().map(String::as_str).eq(args.iter().copied()))
            .unwrap()
    }

    fn goal(atoms: &[&str]) -> BTreeSet<Atom> {
        atoms.iter().map(|s| Atom::parse(s).unwrap()).collect()
    }

    #[test]
    fn applicability() {
        let acts = actions();
        let pick = find(&acts, "pick", &["cup-green", "big-shelf"]);
        let s = state_of(&["(agent-at big-shelf)", "(on cup-green big-shelf)", "(agent-free)"]);
        assert!(applicable(&s, pick));
        let mut blocked = s.clone();
        blocked.insert(Atom::new("human-carry", &["cup-green"]));
        assert!(!applicable(&blocked, pick));
        let mv = find(&acts, "move", &["table"]);
        assert!(applicable(&SymbolicState::new(), mv));
        assert!(applicable(&blocked, mv));
    }

    #[test]
    fn exec_examples() {
        let acts = actions();
        let s = state_of(&["(agent-at big-shelf)", "(on cup-green big-shelf)", "(agent-free)"]);
        let s1 = exec(&s, find(&acts, "pick", &["cup-green", "big-shelf"])).unwrap();
        assert_eq!(s1, state_of(&["(agent-at big-shelf)", "(agent-carry cup-green)"]));

        let s = state_of(&["(agent-at table)"]);
        assert_eq!(exec(&s, find(&acts, "move", &["table"])).unwrap(), s);

        let s = state_of(&["(agent-at table)", "(agent-carry cup-green)"]);
        let s2 = exec(&s, find(&acts, "place", &["cup-green", "table"])).unwrap();
        assert_eq!(
            s2,
            state_of(&["(agent-at table)", "(on cup-green table)", "(agent-free)"])
        );

        let err = exec(&SymbolicState::new(), find(&acts, "place", &["cup-green", "table"]));
        assert!(matches!(err, Err(SymbolicError::NotApplicable(_))));
    }

    #[test]
    fn heuristic_counts_missing_goals() {
        let g = goal(&["(on cup-green table)", "(on plate-blue table)"]);
        assert_eq!(heuristic(&SymbolicState::new(), &g), 2);
        assert_eq!(heuristic(&state_of(&["(on cup-green table)"]), &g), 1);
        let full = state_of(&["(on cup-green table)", "(on plate-blue table)", "(agent-free)"]);
        assert_eq!(heuristic(&full, &g), 0);
    }

    #[test]
    fn single_object_unique_tie() {
        let s0 = state_of(&["(agent-at small-shelf)", "(on cup-green big-shelf)", "(agent-free)"]);
        let out = search_skeletons(&s0, &goal(&["(on cup-green table)"]), &actions(), &SearchConfig::default())
            .unwrap();
        let sk = out.skeletons();
        assert_eq!(sk.len(), 1);
        assert_eq!(
            sk[0].describe(),
            "move(big-shelf) pick(cup-green,big-shelf) move(table) place(cup-green,table)"
        );
        assert_eq!(sk[0].phase_durations, vec![30, 5, 30, 5]);
    }

    #[test]
    fn already_satisfied_signal() {
        let s0 = state_of(&["(on cup-green table)"]);
        let out = search_skeletons(&s0, &goal(&["(on cup-green table)"]), &actions(), &SearchConfig::default())
            .unwrap();
        assert_eq!(out, SearchOutcome::AlreadySatisfied);
    }

    #[test]
    fn two_objects_two_orderings() {
        let s0 = state_of(&[
            "(agent-at table)",
            "(agent-free)",
            "(on cup-green big-shelf)",
            "(on plate-blue small-shelf)",
        ]);
        let g = goal(&["(on cup-green table)", "(on plate-blue table)"]);
        let out = search_skeletons(&s0, &g, &actions(), &SearchConfig::default()).unwrap();
        let sk = out.skeletons();
        assert_eq!(sk.len(), 2);
        assert!(sk.iter().all(|s| s.len() == 8));
        assert!(sk[0].describe().starts_with("move(big-shelf) pick(cup-green"));
        assert!(sk[1].describe().starts_with("move(small-shelf) pick(plate-blue"));

        let bfs = SearchConfig {
            use_heuristic: false,
            ..SearchConfig::default()
        };
        assert_eq!(search_skeletons(&s0, &g, &actions(), &bfs).unwrap(), out);
    }

    #[test]
    fn bound_versus_unreachable() {
        let s0 = state_of(&["(agent-free)", "(on cup-green big-shelf)"]);
        let g = goal(&["(on cup-green table)"]);
        let tight = SearchConfig {
            depth_bound: Some(2),
            ..SearchConfig::default()
        };
        assert_eq!(
            search_skeletons(&s0, &g, &actions(), &tight),
            Err(SearchError::DepthBoundExceeded(2))
        );
        // Human holds the cup and no action releases it.
        let blocked = state_of(&["(agent-free)", "(human-carry cup-green)"]);
        let loose = SearchConfig {
            depth_bound: Some(50),
            ..SearchConfig::default()
        };
        assert_eq!(
            search_skeletons(&blocked, &g, &actions(), &loose),
            Err(SearchError::Unreachable)
        );
        assert_eq!(
            search_skeletons(&s0, &g, &[], &SearchConfig::default()),
            Err(SearchError::NoActions)
        );
    }
}
