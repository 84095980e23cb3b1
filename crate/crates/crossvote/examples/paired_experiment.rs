//! A full paired experiment: the same seeded worlds simulated once with
//! negotiated lights and once with fixed cycles, compared per vehicle.
//!
//! ```bash
//! cargo run --example paired_experiment
//! ```

use crossvote::harness::{run_paired_experiments, ExperimentConfig, Mode, OutputFormat};

fn main() {
    let config = ExperimentConfig {
        n_experiments: 10,
        n_vehicles: 60,
        n_routes: 10,
        n_intersections: 4,
        radius_m: 2_000.0,
        seed: 7,
        base_duration_s: 20,
        congestion_gain: 5.0,
        phase_count: 2,
        mode: Mode::Paired,
    };
    let report = run_paired_experiments(&config).expect("experiments run");
    print!("{}", report.render(OutputFormat::Text));

    let best = report
        .per_vehicle_deltas
        .iter()
        .max_by_key(|(_, d)| **d)
        .unwrap();
    let worst = report
        .per_vehicle_deltas
        .iter()
        .min_by_key(|(_, d)| **d)
        .unwrap();
    println!("\nbiggest gain: {} saved {} s", best.0, best.1);
    println!("biggest loss: {} lost {} s", worst.0, -worst.1);
}
