//! Brute-force reference implementations of the evaluation metrics.

/// Weighted and macro precision, recall and F1 through an explicit
/// confusion matrix whose last column is the "invalid" prediction.
#[derive(Debug, PartialEq)]
pub struct SingleLabelOracle {
    pub accuracy: f64,
    pub weighted: (Option<f64>, f64, Option<f64>),
    pub macro_avg: (Option<f64>, f64, Option<f64>),
}

pub fn single_label(preds: &[Option<String>], golds: &[String]) -> SingleLabelOracle {
    let mut classes: Vec<String> = golds.iter().cloned().chain(preds.iter().flatten().cloned()).collect();
    classes.sort();
    classes.dedup();
    let k = classes.len();
    let idx = |s: &str| classes.iter().position(|c| c == s).unwrap();
    let mut m = vec![vec![0usize; k + 1]; k];
    for (p, g) in preds.iter().zip(golds) {
        let col = p.as_deref().map_or(k, idx);
        m[idx(g)][col] += 1;
    }
    let n = golds.len();
    let correct: usize = (0..k).map(|c| m[c][c]).sum();
    let any_valid = preds.iter().any(Option::is_some);
    let (mut wp, mut wr, mut wf, mut mp, mut mr, mut mf) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    #[allow(clippy::needless_range_loop)]
    for c in 0..k {
        let tp = m[c][c];
        let predicted: usize = (0..k).map(|r| m[r][c]).sum();
        let gold: usize = m[c].iter().sum();
        let p = if predicted > 0 { tp as f64 / predicted as f64 } else { 0.0 };
        let r = if gold > 0 { tp as f64 / gold as f64 } else { 0.0 };
        let f = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
        let w = gold as f64 / n as f64;
        wp += w * p;
        wr += w * r;
        wf += w * f;
        mp += p;
        mr += r;
        mf += f;
    }
    let kf = k as f64;
    SingleLabelOracle {
        accuracy: correct as f64 / n as f64,
        weighted: (any_valid.then_some(wp), wr, any_valid.then_some(wf)),
        macro_avg: (any_valid.then_some(mp / kf), mr / kf, any_valid.then_some(mf / kf)),
    }
}

/// Micro set-overlap precision/recall and exact-match rate, counting with
/// nested loops over lower-cased, deduplicated names.
pub fn person(preds: &[Option<Vec<String>>], golds: &[Vec<String>]) -> (f64, Option<f64>, Option<f64>) {
    fn dedup(v: &[String]) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for s in v {
            let s = s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
            if !out.contains(&s) {
                out.push(s);
            }
        }
        out
    }
    let (mut inter, mut predicted, mut gold_total, mut exact) = (0usize, 0usize, 0usize, 0usize);
    for (p, g) in preds.iter().zip(golds) {
        let g = dedup(g);
        gold_total += g.len();
        let Some(p) = p else { continue };
        let p = dedup(p);
        predicted += p.len();
        let common = p.iter().filter(|x| g.contains(x)).count();
        inter += common;
        if common == p.len() && common == g.len() {
            exact += 1;
        }
    }
    let ratio = |a: usize, b: usize| (b > 0).then(|| a as f64 / b as f64);
    (exact as f64 / golds.len() as f64, ratio(inter, predicted), ratio(inter, gold_total))
}
