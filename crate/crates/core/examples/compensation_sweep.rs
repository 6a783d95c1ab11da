//! Median IDF1 as a function of the process compensation factor, on a shaking
//! camera and on a still one.

use ucmc::synth::{evaluate, generate, outputs_to_records, JitterSpec, Scenario};
use ucmc::tracker::{run_sequence, TrackerConfig};

fn median_idf1(scenario: &Scenario, sigma: f64) -> ucmc::Result<f64> {
    let config = TrackerConfig::default().with_compensation(sigma);
    let mut scores = Vec::new();
    for seed in 0..20 {
        let seq = generate(scenario, seed)?;
        let (out, _) = run_sequence(&seq.detections, &scenario.camera, &config, Some(scenario.frames))?;
        scores.push(evaluate(&outputs_to_records(&out), &seq.ground_truth, &scenario.camera, 1.0).idf1);
    }
    scores.sort_by(f64::total_cmp);
    Ok(0.5 * (scores[9] + scores[10]))
}

fn main() -> ucmc::Result<()> {
    let shaking = Scenario {
        jitter: JitterSpec::new(0.0, 2e-4),
        ..Scenario::default()
    };
    let still = Scenario::default();
    println!("sigma    shaking  still");
    for sigma in [0.01, 0.1, 0.5, 1.0, 5.0, 20.0] {
        println!(
            "{sigma:6.2}   {:.3}    {:.3}",
            median_idf1(&shaking, sigma)?,
            median_idf1(&still, sigma)?
        );
    }
    Ok(())
}
