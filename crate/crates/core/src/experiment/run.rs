//! Simulated localization trials and their statistics.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::LocalizationConfig;
use super::ExperimentError;
use crate::episode_init::episode_rng;
use crate::localization::{LocalizerConfig, LocalizerState, Mode, ObjectClass};
use crate::se3::{yaw_of, Pose, Vec3};
use crate::sensor_sim::{
    scripted_trajectory, simulate_detection, simulate_odometry, SensorScene, TrajectoryKind,
    TrajectoryParams,
};

/// Header of `records.csv`.
pub const RECORD_HEADER: [&str; 16] = [
    "trial",
    "step",
    "time",
    "gt_x",
    "gt_y",
    "gt_z",
    "gt_yaw",
    "est_x",
    "est_y",
    "est_z",
    "est_yaw",
    "mode",
    "masked",
    "distance",
    "base_distance",
    "error",
];

/// One localizer tick. Poses are in the current base frame; `distance` is
/// camera to tag center, `base_distance` the horizontal base-to-object
/// distance. `estimate` and `error` are `None` while masked.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeRecord {
    pub trial: usize,
    pub step: usize,
    pub time: f64,
    pub ground_truth: Pose,
    pub estimate: Option<Pose>,
    pub mode: Mode,
    pub distance: f64,
    pub base_distance: f64,
    pub error: Option<f64>,
}

impl EpisodeRecord {
    pub fn masked(&self) -> bool {
        self.estimate.is_none()
    }

    fn csv_row(&self) -> Vec<String> {
        let f = |v: f64| v.to_string();
        let gt = &self.ground_truth;
        let mut row = vec![
            self.trial.to_string(),
            self.step.to_string(),
            f(self.time),
            f(gt.position.x),
            f(gt.position.y),
            f(gt.position.z),
            f(yaw_of(&gt.rotation)),
        ];
        match &self.estimate {
            Some(e) => row.extend([
                f(e.position.x),
                f(e.position.y),
                f(e.position.z),
                f(yaw_of(&e.rotation)),
            ]),
            None => row.extend(std::iter::repeat_n(String::new(), 4)),
        }
        row.extend([
            self.mode.as_str().to_string(),
            u8::from(self.masked()).to_string(),
            f(self.distance),
            f(self.base_distance),
            self.error.map(f).unwrap_or_default(),
        ]);
        row
    }
}

/// Randomized setup of one trial.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialSetup {
    pub trial: usize,
    pub kind: TrajectoryKind,
    pub start_distance: f64,
    pub approach_angle_deg: f64,
    pub start_heading_offset_deg: f64,
    pub facing_jitter_deg: f64,
    /// Direction of the initial-guess offset, radians.
    pub guess_direction: f64,
    pub odometry_seed: u64,
    pub tag_seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialSummary {
    #[serde(flatten)]
    pub setup: TrialSetup,
    pub steps: usize,
    /// Reached Fine at least once.
    pub success: bool,
    pub transition_distance: Option<f64>,
    pub transition_time: Option<f64>,
    pub mean_coarse_error: Option<f64>,
    pub mean_fine_error: Option<f64>,
    pub max_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Band {
    pub count: usize,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub mean: Option<f64>,
}

impl Band {
    fn of(values: &[f64]) -> Self {
        Self {
            count: values.len(),
            min: values.iter().copied().reduce(f64::min),
            max: values.iter().copied().reduce(f64::max),
            mean: mean(values.iter().copied()),
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        matches!((self.min, self.max), (Some(lo), Some(hi)) if lo <= v && v <= hi)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Run-level statistics. Means are over nonempty subsets only (`None`
/// otherwise). Fine-stage rows are unmasked Fine and Propagating rows.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryStats {
    pub version: u32,
    pub seed: u64,
    pub trial_count: usize,
    pub mean_coarse_error: Option<f64>,
    pub mean_fine_error: Option<f64>,
    pub max_error: f64,
    pub coarse_rows: usize,
    pub fine_rows: usize,
    pub masked_rows: usize,
    pub transition_distance: Band,
    pub success_count: usize,
    pub trials: Vec<TrialSummary>,
    pub checks: Vec<CheckResult>,
}

impl SummaryStats {
    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub records: Vec<EpisodeRecord>,
    pub summary: SummaryStats,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn is_fine_stage(mode: Mode) -> bool {
    matches!(mode, Mode::Fine | Mode::Propagating)
}

pub fn draw_setup(cfg: &LocalizationConfig, trial: usize) -> TrialSetup {
    let mut rng = episode_rng(cfg.seed, trial as u64);
    let kind = match cfg.trajectory.fixed() {
        Some(k) => k,
        None => TrajectoryKind::ALL[rng.random_range(0..TrajectoryKind::ALL.len())],
    };
    let jitter = cfg.camera.facing_jitter_range_deg;
    TrialSetup {
        trial,
        kind,
        start_distance: cfg.start_distance.sample(&mut rng),
        approach_angle_deg: cfg.approach_angle_deg.sample(&mut rng),
        start_heading_offset_deg: cfg.start_heading_offset_deg.sample(&mut rng),
        facing_jitter_deg: if jitter > 0.0 {
            rng.random_range(-jitter..=jitter)
        } else {
            0.0
        },
        guess_direction: rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
        odometry_seed: rng.random(),
        tag_seed: rng.random(),
    }
}

pub fn build_scene(
    cfg: &LocalizationConfig,
    setup: &TrialSetup,
) -> Result<SensorScene, ExperimentError> {
    let params = TrajectoryParams {
        start_distance: setup.start_distance,
        approach_angle_deg: setup.approach_angle_deg,
        start_heading_offset_deg: setup.start_heading_offset_deg,
        ..cfg.trajectory_params.clone()
    };
    let trajectory = scripted_trajectory(setup.kind, &params)?;
    let mut odom = cfg.odometry.clone();
    odom.seed = setup.odometry_seed;
    let mut tags = cfg.tags.clone();
    tags.seed = setup.tag_seed;
    Ok(SensorScene::new(
        trajectory,
        cfg.camera.clone(),
        odom,
        tags,
        cfg.tag_geometry.clone(),
        setup.facing_jitter_deg,
    )?)
}

/// Object class used by the localizer for a scripted trajectory.
pub fn object_class(kind: TrajectoryKind) -> ObjectClass {
    match kind {
        TrajectoryKind::ApproachCarry => ObjectClass::Dynamic,
        TrajectoryKind::Approach | TrajectoryKind::ApproachTurnSit => ObjectClass::Static,
    }
}

pub fn run_trial(
    cfg: &LocalizationConfig,
    trial: usize,
) -> Result<(Vec<EpisodeRecord>, TrialSummary), ExperimentError> {
    let setup = draw_setup(cfg, trial);
    let scene = build_scene(cfg, &setup)?;
    let odometry = simulate_odometry(&scene)?;
    let fk = scene.camera.mount();
    let loc_cfg = LocalizerConfig::new(cfg.epsilon, object_class(setup.kind))?;

    let truth0 = scene.object_in_base(0).position;
    let g = setup.guess_direction;
    let guess = truth0 + cfg.initial_guess_error * Vec3::new(g.cos(), g.sin(), 0.0);
    let mut state = LocalizerState::init_coarse(guess)?;

    let mut records = Vec::with_capacity(scene.len());
    for (t, odom) in odometry.iter().enumerate() {
        let in_view = scene.visible(t);
        let detection = simulate_detection(&scene, t, in_view)?;
        let est = state.step(&loc_cfg, *odom, detection, fk, in_view)?;
        let gt = scene.object_in_base(t);
        let estimate = est.pose();
        records.push(EpisodeRecord {
            trial,
            step: t,
            time: t as f64 * scene.dt,
            ground_truth: gt,
            error: estimate.map(|e| (gt.position - e.position).norm()),
            estimate,
            mode: est.mode,
            distance: (scene.camera_pose(t).position
                - scene.tag_geometry.center(&scene.object_gt[t]))
            .norm(),
            base_distance: gt.position.x.hypot(gt.position.y),
        });
    }

    let first_fine = records.iter().find(|r| r.mode == Mode::Fine);
    let summary = TrialSummary {
        steps: records.len(),
        success: first_fine.is_some(),
        transition_distance: first_fine.map(|r| r.distance),
        transition_time: first_fine.map(|r| r.time),
        mean_coarse_error: mean(
            records
                .iter()
                .filter(|r| r.mode == Mode::Coarse)
                .filter_map(|r| r.error),
        ),
        mean_fine_error: mean(
            records
                .iter()
                .filter(|r| is_fine_stage(r.mode))
                .filter_map(|r| r.error),
        ),
        max_error: records.iter().filter_map(|r| r.error).fold(0.0, f64::max),
        setup,
    };
    Ok((records, summary))
}

/// Runs every trial (in parallel) and gathers rows in trial order.
pub fn run_localization(cfg: &LocalizationConfig) -> Result<RunOutput, ExperimentError> {
    cfg.validate()?;
    let per_trial = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, t))
        .collect::<Result<Vec<_>, _>>()?;

    let mut records = Vec::new();
    let mut trials = Vec::with_capacity(per_trial.len());
    for (r, s) in per_trial {
        records.extend(r);
        trials.push(s);
    }

    let coarse: Vec<f64> = records
        .iter()
        .filter(|r| r.mode == Mode::Coarse)
        .filter_map(|r| r.error)
        .collect();
    let fine: Vec<f64> = records
        .iter()
        .filter(|r| is_fine_stage(r.mode))
        .filter_map(|r| r.error)
        .collect();
    let transitions: Vec<f64> = trials
        .iter()
        .filter_map(|t| t.transition_distance)
        .collect();
    let mut summary = SummaryStats {
        version: cfg.version,
        seed: cfg.seed,
        trial_count: trials.len(),
        mean_coarse_error: mean(coarse.iter().copied()),
        mean_fine_error: mean(fine.iter().copied()),
        max_error: records.iter().filter_map(|r| r.error).fold(0.0, f64::max),
        coarse_rows: coarse.len(),
        fine_rows: fine.len(),
        masked_rows: records.iter().filter(|r| r.masked()).count(),
        transition_distance: Band::of(&transitions),
        success_count: trials.iter().filter(|t| t.success).count(),
        trials,
        checks: Vec::new(),
    };
    summary.checks = evaluate_checks(cfg, &summary);
    Ok(RunOutput { records, summary })
}

fn evaluate_checks(cfg: &LocalizationConfig, s: &SummaryStats) -> Vec<CheckResult> {
    let fmt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), |x| format!("{x:.6}"));
    let mut out = Vec::new();
    let range = cfg.camera.max_range;
    out.push(CheckResult {
        name: "transition_within_range".into(),
        pass: s.transition_distance.max.is_none_or(|m| m <= range),
        detail: format!(
            "max transition {} <= {range}",
            fmt(s.transition_distance.max)
        ),
    });
    let c = &cfg.checks;
    if let Some(iv) = c.coarse_error {
        out.push(CheckResult {
            name: "coarse_error".into(),
            pass: s.mean_coarse_error.is_some_and(|m| iv.contains(m)),
            detail: format!(
                "mean {} in [{}, {}]",
                fmt(s.mean_coarse_error),
                iv.min,
                iv.max
            ),
        });
    }
    if let Some(max) = c.fine_error_max {
        out.push(CheckResult {
            name: "fine_error".into(),
            pass: s.mean_fine_error.is_some_and(|m| m <= max),
            detail: format!("mean {} <= {max}", fmt(s.mean_fine_error)),
        });
    }
    if let Some(max) = c.max_error {
        out.push(CheckResult {
            name: "max_error".into(),
            pass: s.max_error < max,
            detail: format!("max {:e} < {max:e}", s.max_error),
        });
    }
    if let Some(v) = c.transition_contains {
        let band = &s.transition_distance;
        out.push(CheckResult {
            name: "transition_band".into(),
            pass: band.contains(v),
            detail: format!("{v} in [{}, {}]", fmt(band.min), fmt(band.max)),
        });
    }
    out
}

/// `records.csv` contents: fixed header, one row per step, trial order.
pub fn records_csv(records: &[EpisodeRecord]) -> Result<String, ExperimentError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RECORD_HEADER)?;
    for r in records {
        w.write_record(r.csv_row())?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| ExperimentError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

pub const TRIAL_HEADER: [&str; 12] = [
    "trial",
    "kind",
    "start_distance",
    "approach_angle_deg",
    "facing_jitter_deg",
    "steps",
    "success",
    "transition_distance",
    "transition_time",
    "mean_coarse_error",
    "mean_fine_error",
    "max_error",
];

/// `trials.csv` contents: one summary row per trial.
pub fn trials_csv(trials: &[TrialSummary]) -> Result<String, ExperimentError> {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRIAL_HEADER)?;
    for t in trials {
        w.write_record([
            t.setup.trial.to_string(),
            t.setup.kind.as_str().to_string(),
            t.setup.start_distance.to_string(),
            t.setup.approach_angle_deg.to_string(),
            t.setup.facing_jitter_deg.to_string(),
            t.steps.to_string(),
            u8::from(t.success).to_string(),
            opt(t.transition_distance),
            opt(t.transition_time),
            opt(t.mean_coarse_error),
            opt(t.mean_fine_error),
            t.max_error.to_string(),
        ])?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| ExperimentError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

pub fn summary_json(summary: &SummaryStats) -> String {
    let mut s = serde_json::to_string_pretty(summary).expect("summary serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(cfg: LocalizationConfig, trials: usize) -> LocalizationConfig {
        LocalizationConfig { trials, ..cfg }
    }

    #[test]
    fn zero_noise_is_exact() {
        let out = run_localization(&small(LocalizationConfig::zero_noise(), 6)).unwrap();
        assert!(out.summary.max_error < 1e-9, "{}", out.summary.max_error);
        assert!(out.summary.all_checks_pass());
    }

    #[test]
    fn deterministic_and_ordered() {
        let cfg = small(LocalizationConfig::default(), 4);
        let a = run_localization(&cfg).unwrap();
        let b = run_localization(&cfg).unwrap();
        assert_eq!(
            records_csv(&a.records).unwrap(),
            records_csv(&b.records).unwrap()
        );
        assert_eq!(summary_json(&a.summary), summary_json(&b.summary));
        for w in a.records.windows(2) {
            assert!((w[0].trial, w[0].step) < (w[1].trial, w[1].step));
        }
    }

    #[test]
    fn error_matches_estimate() {
        let out = run_localization(&small(LocalizationConfig::default(), 3)).unwrap();
        for r in &out.records {
            match (&r.estimate, r.error) {
                (Some(e), Some(err)) => {
                    assert_eq!(err, (r.ground_truth.position - e.position).norm())
                }
                (None, None) => assert_eq!(r.mode, Mode::Masked),
                _ => panic!("estimate and error disagree at {}/{}", r.trial, r.step),
            }
        }
    }

    #[test]
    fn masked_rows_have_empty_estimate_cells() {
        let cfg = LocalizationConfig {
            trajectory: super::super::config::TrajectoryChoice::ApproachCarry,
            ..small(LocalizationConfig::default(), 1)
        };
        let out = run_localization(&cfg).unwrap();
        assert!(out.summary.masked_rows > 0);
        let text = records_csv(&out.records).unwrap();
        let masked_line = text.lines().find(|l| l.contains(",masked,1,")).unwrap();
        assert!(masked_line.contains(",,,,masked,1,"));
        assert!(masked_line.ends_with(','));
    }
}
