//! Check every assumption on a running-example parameter set and list which long-time
//! results it triggers.

use parasite_branching::analysis::{check_condition, classify_running_example, Assumption, ClassifyOptions, ConditionQuery, Verdict};
use parasite_branching::model::RunningExample;

fn main() {
    let p = RunningExample { alpha_g: 1.0, alpha_sigma: 0.5, beta_sigma: 0.0, alpha: 0.5, beta: 0.8, alpha_q: 0.0, beta_q: 0.5 };
    let spec = p.to_spec();
    for a in Assumption::ALL {
        let r = check_condition(&ConditionQuery::new(a), &spec);
        let witnesses: Vec<String> = r.witnesses.iter().map(|(k, v)| format!("{k}={v:.4}")).collect();
        let verdict = match r.verdict {
            Verdict::HoldsOnGrid => "holds".to_string(),
            Verdict::NotApplicable => "not applicable".to_string(),
            // Parameter-level failures have no single witness point.
            Verdict::FailsAt { x, .. } if x.is_nan() => "fails".to_string(),
            Verdict::FailsAt { x, margin } => format!("fails at x={x:.3e} by {:.3e}", -margin),
        };
        println!("{:<8} {:<30} {}", a.name(), verdict, witnesses.join(" "));
    }
    println!();
    for hit in classify_running_example(&p, &ClassifyOptions::default()) {
        println!("{}: {}", hit.proposition.label(), hit.trigger);
    }
}
