use sfeval_core::blockeval::{model_space, plan_optimal, Interval, SpaceModel, SplitPolicy};
use sfeval_core::circuit::GateSource;
use sfeval_core::genlib::parity_tree;

#[test]
fn trend_probe() {
    let mut prev_ratio_per_n = f64::INFINITY;
    let mut ratios = Vec::new();
    for exp in [10u32, 12, 14, 16, 18] {
        let inputs = 1usize << exp;
        let start = std::time::Instant::now();
        let circuit = parity_tree(inputs);
        let n = circuit.gate_count();
        let model = SpaceModel::for_gate_count(n).with_frame_overhead(0);
        let plan = plan_optimal(&circuit, Interval::new(0, n), &model, SplitPolicy::Midpoint);
        let space = model_space(&circuit, &plan, &model).unwrap();
        let per_n = space as f64 / n as f64;
        let ratio = space as f64 * (n as f64).log2() / n as f64;
        println!(
            "inputs 2^{exp}: gates={n} space={space} space/n={per_n:.4} ratio={ratio:.3} elapsed={:?}",
            start.elapsed()
        );
        assert!(per_n < prev_ratio_per_n, "space/n must strictly decrease");
        prev_ratio_per_n = per_n;
        ratios.push(ratio);
    }
    let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
    let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
    println!("ratio spread: min={min:.3} max={max:.3} factor={:.3}", max / min);
    assert!(max / min <= 2.0, "ratio varied by more than 2x");
}
