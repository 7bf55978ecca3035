//! Per-task scoring of predictions against gold annotations, plus the
//! appendix-style result tables.

mod metrics;
mod report;

use serde::{Deserialize, Serialize};

pub use metrics::{
    eval_person, eval_sensitive, eval_single_label, person_key, Averaging, SensitiveMetrics, SingleLabelMetrics,
    TaskMetrics,
};
pub use report::{parse_csv, render_csv, render_markdown, report_rows, ReportRow, Table};

use crate::exec::Execution;
use crate::parser::PredictedAnnotation;
use crate::prompt::InputConfiguration;
use crate::taxonomy::Annotation;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("shape mismatch: {0} predictions vs {1} gold items")]
    ShapeError(usize, usize),
    #[error("nothing to score")]
    Empty,
    #[error("report line {line}: {message}")]
    Report { line: usize, message: String },
}

/// One clip ready for scoring.
#[derive(Debug, Clone)]
pub struct ScoredClip {
    pub prediction: PredictedAnnotation,
    pub gold: Annotation,
    /// Provider-reported input tokens, or the missing-usage sentinel.
    pub input_tokens: i64,
    /// `None` for failed requests.
    pub latency_ms: Option<u64>,
}

/// All metrics for one (model, input configuration) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub model_id: String,
    pub input_config: InputConfiguration,
    pub topic: TaskMetrics,
    pub topic_macro: TaskMetrics,
    pub environment: TaskMetrics,
    pub environment_macro: TaskMetrics,
    pub sensitive: TaskMetrics,
    pub sensitive_category_match: Option<f64>,
    pub person: TaskMetrics,
    pub mean_input_tokens: Option<f64>,
    pub mean_latency_ms: Option<f64>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

impl RunRecord {
    pub fn score(
        model_id: impl Into<String>,
        input_config: InputConfiguration,
        clips: &[ScoredClip],
    ) -> Result<RunRecord, EvalError> {
        if clips.is_empty() {
            return Err(EvalError::Empty);
        }
        let topic_pred: Vec<_> = clips.iter().map(|c| c.prediction.topic.clone()).collect();
        let topic_gold: Vec<_> = clips.iter().map(|c| c.gold.topic.clone()).collect();
        let env_pred: Vec<_> = clips.iter().map(|c| c.prediction.environment.clone()).collect();
        let env_gold: Vec<_> = clips.iter().map(|c| c.gold.environment.clone()).collect();
        let sens_pred: Vec<_> = clips.iter().map(|c| c.prediction.sensitive.clone()).collect();
        let sens_gold: Vec<_> = clips.iter().map(|c| c.gold.sensitive.clone()).collect();
        let pers_pred: Vec<_> = clips.iter().map(|c| c.prediction.persons.clone()).collect();
        let pers_gold: Vec<_> = clips.iter().map(|c| c.gold.persons.clone()).collect();

        let topic = eval_single_label(&topic_pred, &topic_gold)?;
        let environment = eval_single_label(&env_pred, &env_gold)?;
        let sensitive = eval_sensitive(&sens_pred, &sens_gold)?;
        Ok(RunRecord {
            model_id: model_id.into(),
            input_config,
            topic: topic.weighted,
            topic_macro: topic.macro_avg,
            environment: environment.weighted,
            environment_macro: environment.macro_avg,
            sensitive: sensitive.binary,
            sensitive_category_match: sensitive.category_match_rate,
            person: eval_person(&pers_pred, &pers_gold)?,
            // the sentinel is negative
            mean_input_tokens: mean(clips.iter().filter(|c| c.input_tokens >= 0).map(|c| c.input_tokens as f64)),
            mean_latency_ms: mean(clips.iter().filter_map(|c| c.latency_ms).map(|l| l as f64)),
        })
    }

    pub fn metrics(&self, table: Table) -> &TaskMetrics {
        match table {
            Table::Topic => &self.topic,
            Table::TopicMacro => &self.topic_macro,
            Table::Environment => &self.environment,
            Table::EnvironmentMacro => &self.environment_macro,
            Table::Sensitive => &self.sensitive,
            Table::Person => &self.person,
        }
    }
}

/// Inputs for one (model, configuration) cell.
#[derive(Debug, Clone)]
pub struct RunInput {
    pub model_id: String,
    pub input_config: InputConfiguration,
    pub clips: Vec<ScoredClip>,
}

/// Scores every cell independently under `exec`, preserving order.
pub fn score_runs(inputs: &[RunInput], exec: Execution) -> Result<Vec<RunRecord>, EvalError> {
    exec.map(inputs, |r| RunRecord::score(r.model_id.clone(), r.input_config, &r.clips)).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::MISSING_TOKENS;
    use crate::parser::{InvalidReason, TaskValue};
    use crate::prompt::VisualMode;

    fn gold() -> Annotation {
        Annotation {
            topic: "Music".into(),
            environment: "Outdoor".into(),
            persons: vec!["Anna Neri".into()],
            sensitive: vec![],
        }
    }

    fn clip(tokens: i64, latency: Option<u64>, ok: bool) -> ScoredClip {
        let prediction = if ok {
            PredictedAnnotation {
                topic: TaskValue::Valid("Music".into()),
                environment: TaskValue::Valid("Outdoor".into()),
                persons: TaskValue::Valid(vec!["anna neri".into()]),
                sensitive: TaskValue::Valid(vec![]),
                raw_text: String::new(),
            }
        } else {
            PredictedAnnotation::all_invalid(InvalidReason::NoResponse, "")
        };
        ScoredClip { prediction, gold: gold(), input_tokens: tokens, latency_ms: latency }
    }

    #[test]
    fn means_skip_sentinels_and_failures() {
        let clips = [clip(6224, Some(1000), true), clip(MISSING_TOKENS, Some(3000), true), clip(MISSING_TOKENS, None, false)];
        let cfg = InputConfiguration::preset(VisualMode::Frames, "asr_meta").unwrap();
        let run = RunRecord::score("m", cfg, &clips).unwrap();
        assert_eq!(run.mean_input_tokens, Some(6224.0));
        assert_eq!(run.mean_latency_ms, Some(2000.0));
        assert!((run.topic.accuracy.unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!((run.person.accuracy.unwrap() - 2.0 / 3.0).abs() < 1e-12);
        // no gold positives at all
        assert_eq!(run.sensitive.recall, None);
    }

    #[test]
    fn all_sentinel_tokens_is_undefined() {
        let cfg = InputConfiguration::preset(VisualMode::Frames, "only").unwrap();
        let run = RunRecord::score("m", cfg, &[clip(MISSING_TOKENS, Some(5), true)]).unwrap();
        assert_eq!(run.mean_input_tokens, None);
        assert!(RunRecord::score("m", cfg, &[]).is_err());
    }
}
