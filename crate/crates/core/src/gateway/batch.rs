use super::{GatewayError, ModelClient, ModelConfig, ModelResponse};
use crate::exec::Execution;
use crate::prompt::PromptBundle;

#[derive(Debug)]
pub struct BatchEntry {
    pub clip_id: String,
    pub result: Result<ModelResponse, GatewayError>,
}

/// Sends every bundle with at most `parallelism` requests in flight.
///
/// Output order matches input order and a failing clip never aborts the
/// batch.
pub fn run_batch<C: ModelClient + ?Sized>(
    items: &[(String, PromptBundle)],
    mc: &ModelConfig,
    parallelism: usize,
    client: &C,
) -> Vec<BatchEntry> {
    let exec = Execution::with_limit(parallelism.max(1).min(items.len().max(1)));
    exec.map(items, |(clip_id, bundle)| {
        let result = client.annotate(bundle, mc);
        if let Err(e) = &result {
            log::warn!("{clip_id}: {e}");
        }
        BatchEntry { clip_id: clip_id.clone(), result }
    })
}
