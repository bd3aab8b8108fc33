//! CF candidates re-ranked by the user's time-decayed tag preferences.

use alloc::collections::BTreeMap;

use super::{normalized_candidates, request, ResourceRecommender};
use crate::model::{Folksonomy, ResourceId, TagId};
use crate::rec::bll::{bll_weights, BllConfig};
use crate::rec::cf::CfConfig;
use crate::rec::{rank, RecList};

pub const CIRTT: &str = "cirtt";
pub const DEFAULT_CANDIDATES: usize = 50;

/// `score(i) = cf_norm(i) * (1 + sum of the user's BLL weights over the tags of i)`
/// for the top `candidate_n` CF candidates.
pub fn rec_cirtt(
    f: &Folksonomy,
    user: &str,
    k: usize,
    cfg_cf: &CfConfig,
    cfg_bll: &BllConfig,
    reference_time: i64,
    candidate_n: usize,
) -> RecList<ResourceId> {
    let candidates = normalized_candidates(f, user, candidate_n, cfg_cf);
    let weights: BTreeMap<TagId, f64> =
        f.user_id(user).map(|u| bll_weights(f, u, reference_time, cfg_bll).into_iter().collect()).unwrap_or_default();
    let rescored = candidates.into_iter().map(|c| {
        let boost: f64 = f.resource_tags(c.item).iter().filter_map(|(t, _)| weights.get(t)).sum();
        (c.item, c.score * (1.0 + boost))
    });
    RecList { items: rank(f, rescored, k), algorithm: CIRTT, request: request(user, k, reference_time) }
}

pub struct Cirtt<'f> {
    pub model: &'f Folksonomy,
    pub cf: CfConfig,
    pub bll: BllConfig,
    pub candidate_n: usize,
}

impl ResourceRecommender for Cirtt<'_> {
    fn name(&self) -> &'static str {
        CIRTT
    }
    fn recommend(&self, user: &str, k: usize, reference_time: i64) -> RecList<ResourceId> {
        rec_cirtt(self.model, user, k, &self.cf, &self.bll, reference_time, self.candidate_n)
    }
}
