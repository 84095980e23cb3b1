//! Comparison reports shaped like the evaluation table: share of vehicles
//! that gained, did not gain, or lost time, and the average gain.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, HarnessError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
    Text,
}

/// Paired-run comparison. Percentages are held at 0.1% precision and the
/// average gain in whole seconds, mirroring the evaluation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub seed: u64,
    pub config: ExperimentConfig,
    pub compared_vehicles: u64,
    pub gained: u64,
    pub unchanged: u64,
    pub lost: u64,
    pub pct_gained: f64,
    pub pct_unchanged: f64,
    pub pct_lost: f64,
    /// Mean positive delta, whole seconds; 0 when nothing was gained.
    pub avg_gain_s: i64,
    pub capped_negotiate: u64,
    pub capped_baseline: u64,
    /// Sessions that closed without any vote; those intersections kept
    /// alternating on their timers.
    pub zero_vote_sessions: u64,
    /// baseline minus negotiate, per vehicle (positive = time gained).
    pub per_vehicle_deltas: BTreeMap<String, i64>,
}

fn pct(count: u64, total: u64) -> f64 {
    if total == 0 {
        return 0.0;
    }
    (count as f64 / total as f64 * 1000.0).round() / 10.0
}

/// Per-vehicle deltas (`baseline - negotiate`) bucketed into gained,
/// unchanged and lost. Vehicle id sets must match.
pub fn compare(
    negotiate_times: &BTreeMap<String, u64>,
    baseline_times: &BTreeMap<String, u64>,
) -> Result<ComparisonStats, HarnessError> {
    if negotiate_times.keys().ne(baseline_times.keys()) {
        return Err(HarnessError::MismatchedVehicleSets);
    }
    let mut deltas = BTreeMap::new();
    let (mut gained, mut unchanged, mut lost) = (0u64, 0u64, 0u64);
    let mut gain_sum = 0i64;
    for (vehicle, negotiate) in negotiate_times {
        let baseline = baseline_times[vehicle];
        let delta = baseline as i64 - *negotiate as i64;
        match delta {
            d if d > 0 => {
                gained += 1;
                gain_sum += d;
            }
            0 => unchanged += 1,
            _ => lost += 1,
        }
        deltas.insert(vehicle.clone(), delta);
    }
    let total = deltas.len() as u64;
    let avg_gain_s = if gained > 0 {
        (gain_sum as f64 / gained as f64).round() as i64
    } else {
        0
    };
    Ok(ComparisonStats {
        compared_vehicles: total,
        gained,
        unchanged,
        lost,
        pct_gained: pct(gained, total),
        pct_unchanged: pct(unchanged, total),
        pct_lost: pct(lost, total),
        avg_gain_s,
        per_vehicle_deltas: deltas,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonStats {
    pub compared_vehicles: u64,
    pub gained: u64,
    pub unchanged: u64,
    pub lost: u64,
    pub pct_gained: f64,
    pub pct_unchanged: f64,
    pub pct_lost: f64,
    pub avg_gain_s: i64,
    pub per_vehicle_deltas: BTreeMap<String, i64>,
}

impl Report {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
            OutputFormat::Csv => {
                let c = &self.config;
                let mut s = String::from(
                    "experiments,vehicles,routes,intersections,radius_m,seed,base_duration_s,\
                     congestion_gain,phase_count,mode,compared,gained,unchanged,lost,\
                     pct_gained,pct_unchanged,pct_lost,avg_gain_s,capped_negotiate,\
                     capped_baseline,zero_vote_sessions\n",
                );
                s.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{:.1},{:.1},{:.1},{},{},{},{}\n",
                    c.n_experiments,
                    c.n_vehicles,
                    c.n_routes,
                    c.n_intersections,
                    c.radius_m,
                    self.seed,
                    c.base_duration_s,
                    c.congestion_gain,
                    c.phase_count,
                    c.mode,
                    self.compared_vehicles,
                    self.gained,
                    self.unchanged,
                    self.lost,
                    self.pct_gained,
                    self.pct_unchanged,
                    self.pct_lost,
                    self.avg_gain_s,
                    self.capped_negotiate,
                    self.capped_baseline,
                    self.zero_vote_sessions,
                ));
                s
            }
            OutputFormat::Text => {
                fn row(s: &mut String, label: &str, value: String) {
                    s.push_str(&format!("{label:<40}{value}\n"));
                }
                let mut s = String::new();
                row(&mut s, "Parameter", "Value".into());
                row(
                    &mut s,
                    "Number of experiments",
                    self.config.n_experiments.to_string(),
                );
                row(
                    &mut s,
                    "Number of vehicles",
                    self.config.n_vehicles.to_string(),
                );
                row(&mut s, "Number of routes", self.config.n_routes.to_string());
                row(
                    &mut s,
                    "% of vehicles that gained time",
                    format!("{:.1}%", self.pct_gained),
                );
                row(
                    &mut s,
                    "Average of time gained",
                    format!("{} seconds", self.avg_gain_s),
                );
                row(
                    &mut s,
                    "% of vehicles that not gained time",
                    format!("{:.1}%", self.pct_unchanged),
                );
                row(
                    &mut s,
                    "% of vehicles that lost time",
                    format!("{:.1}%", self.pct_lost),
                );
                s.push('\n');
                row(&mut s, "seed", self.seed.to_string());
                row(
                    &mut s,
                    "compared vehicles",
                    self.compared_vehicles.to_string(),
                );
                row(
                    &mut s,
                    "capped vehicles (negotiate/baseline)",
                    format!("{}/{}", self.capped_negotiate, self.capped_baseline),
                );
                row(
                    &mut s,
                    "zero-vote sessions",
                    self.zero_vote_sessions.to_string(),
                );
                s
            }
        }
    }

    pub fn emit(&self, path: &Path, format: OutputFormat) -> Result<(), HarnessError> {
        std::fs::write(path, self.render(format)).map_err(HarnessError::Io)
    }

    pub fn load_json(path: &Path) -> Result<Report, HarnessError> {
        let bytes = std::fs::read_to_string(path).map_err(HarnessError::Io)?;
        serde_json::from_str(&bytes).map_err(|e| HarnessError::Config(e.to_string()))
    }
}

/// Travel times of a single arm, for `--mode negotiate` / `--mode baseline`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleArmReport {
    pub seed: u64,
    pub config: ExperimentConfig,
    pub arrived: u64,
    pub capped: u64,
    pub mean_travel_time_s: f64,
    pub travel_times: BTreeMap<String, u64>,
}

impl SingleArmReport {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
            OutputFormat::Csv => {
                let mut s = String::from("vehicle,travel_time_s\n");
                for (vehicle, t) in &self.travel_times {
                    s.push_str(&format!("{vehicle},{t}\n"));
                }
                s
            }
            OutputFormat::Text => {
                let mut s = String::new();
                s.push_str(&format!("{:<40}{}\n", "mode", self.config.mode));
                s.push_str(&format!("{:<40}{}\n", "seed", self.seed));
                s.push_str(&format!("{:<40}{}\n", "vehicles arrived", self.arrived));
                s.push_str(&format!("{:<40}{}\n", "vehicles capped", self.capped));
                s.push_str(&format!(
                    "{:<40}{:.1}\n",
                    "mean travel time (s)", self.mean_travel_time_s
                ));
                s
            }
        }
    }

    pub fn emit(&self, path: &Path, format: OutputFormat) -> Result<(), HarnessError> {
        std::fs::write(path, self.render(format)).map_err(HarnessError::Io)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Mode;

    fn times(pairs: &[(&str, u64)]) -> BTreeMap<String, u64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn stated_delta_arithmetic() {
        // deltas +10, 0, -5, +20, +30
        let baseline = times(&[
            ("v1", 110),
            ("v2", 100),
            ("v3", 95),
            ("v4", 120),
            ("v5", 130),
        ]);
        let negotiate = times(&[
            ("v1", 100),
            ("v2", 100),
            ("v3", 100),
            ("v4", 100),
            ("v5", 100),
        ]);
        let stats = compare(&negotiate, &baseline).unwrap();
        assert_eq!(stats.pct_gained, 60.0);
        assert_eq!(stats.pct_unchanged, 20.0);
        assert_eq!(stats.pct_lost, 20.0);
        assert_eq!(stats.avg_gain_s, 20);
    }

    #[test]
    fn identical_arms_are_all_unchanged() {
        let a = times(&[("v1", 50), ("v2", 70)]);
        let stats = compare(&a, &a).unwrap();
        assert_eq!(stats.pct_gained, 0.0);
        assert_eq!(stats.pct_unchanged, 100.0);
        assert_eq!(stats.pct_lost, 0.0);
    }

    #[test]
    fn all_positive_deltas() {
        let baseline = times(&[("v1", 60), ("v2", 80)]);
        let negotiate = times(&[("v1", 50), ("v2", 70)]);
        let stats = compare(&negotiate, &baseline).unwrap();
        assert_eq!(stats.pct_gained, 100.0);
    }

    #[test]
    fn mismatched_sets_error() {
        let a = times(&[("v1", 50)]);
        let b = times(&[("v2", 50)]);
        assert!(matches!(
            compare(&a, &b),
            Err(HarnessError::MismatchedVehicleSets)
        ));
    }

    #[test]
    fn partition_covers_every_vehicle() {
        let baseline = times(&[("v1", 10), ("v2", 20), ("v3", 15), ("v4", 9)]);
        let negotiate = times(&[("v1", 12), ("v2", 20), ("v3", 10), ("v4", 9)]);
        let stats = compare(&negotiate, &baseline).unwrap();
        assert_eq!(
            stats.gained + stats.unchanged + stats.lost,
            stats.compared_vehicles
        );
        let pct_sum = stats.pct_gained + stats.pct_unchanged + stats.pct_lost;
        assert!((pct_sum - 100.0).abs() < 0.2);
    }

    fn sample_report() -> Report {
        let config = ExperimentConfig {
            n_experiments: 2,
            n_vehicles: 5,
            n_routes: 2,
            n_intersections: 1,
            radius_m: 1000.0,
            seed: 7,
            base_duration_s: 20,
            congestion_gain: 5.0,
            phase_count: 2,
            mode: Mode::Paired,
        };
        Report {
            seed: 7,
            config,
            compared_vehicles: 5,
            gained: 3,
            unchanged: 1,
            lost: 1,
            pct_gained: 60.0,
            pct_unchanged: 20.0,
            pct_lost: 20.0,
            avg_gain_s: 20,
            capped_negotiate: 0,
            capped_baseline: 0,
            zero_vote_sessions: 2,
            per_vehicle_deltas: [("e0/v1".to_string(), 10i64)].into_iter().collect(),
        }
    }

    #[test]
    fn json_round_trip_and_stability() {
        let report = sample_report();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        report.emit(&path, OutputFormat::Json).unwrap();
        let loaded = Report::load_json(&path).unwrap();
        assert_eq!(report, loaded);
        assert_eq!(
            report.render(OutputFormat::Json),
            loaded.render(OutputFormat::Json)
        );
    }

    #[test]
    fn text_mirrors_table_labels() {
        let text = sample_report().render(OutputFormat::Text);
        assert!(text.contains("% of vehicles that gained time"));
        assert!(text.contains("% of vehicles that not gained time"));
        assert!(text.contains("% of vehicles that lost time"));
        assert!(text.contains("Average of time gained"));
        assert!(text.contains("60.0%"));
        assert!(text.contains("20 seconds"));
    }

    #[test]
    fn csv_has_one_data_row() {
        let csv = sample_report().render(OutputFormat::Csv);
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.lines().nth(1).unwrap().contains("60.0"));
    }
}
