use rayon::prelude::*;

use super::search::Skeleton;
use crate::kinematics::GeometricState;
use crate::trajopt::{build_nlp, objective, NlpParams};
use crate::Real;

/// Sorts skeletons by the smoothness cost of their keyframe interpolation.
///
/// Each cost is the NLP objective evaluated on straight lines between the
/// phase keyframes, without human obstacles. Skeletons whose interpolation
/// cannot be built keep an infinite cost. Costs are evaluated in parallel;
/// the sort is stable, so the order is deterministic.
pub fn rank_skeletons<T: Real>(
    skeletons: Vec<Skeleton>,
    workspace: &GeometricState<T>,
    params: &NlpParams<T>,
) -> Vec<Skeleton> {
    let mut ranked: Vec<Skeleton> = skeletons
        .into_par_iter()
        .map(|mut s| {
            s.cost = build_nlp(&s, workspace, &[], 0, params)
                .ok()
                .and_then(|p| objective(&p, &p.interpolation()).ok())
                .map_or(f64::INFINITY, |c| c.as_f64());
            s
        })
        .collect();
    ranked.sort_by(|a, b| a.cost.total_cmp(&b.cost));
    ranked
}
