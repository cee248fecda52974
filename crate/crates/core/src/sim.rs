//! Deterministic synthetic scene generator.
//!
//! A scenario places camera-facing square signs in the world and moves a camera
//! along interpolated waypoints. Each frame emits noisy text detections for the
//! signs in view plus occasional junk detections, so the whole mapping pipeline
//! can be exercised against known ground truth.

use std::path::Path;

use nalgebra::{UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::config::DEFAULT_BORDER_MARGIN;
use crate::geometry::{world_to_pixel, Intrinsics, PixelPoint, Pose, WorldPoint};
use crate::io::{DetectionRecord, TimedPose};
use crate::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sign {
    pub text: String,
    pub center: WorldPoint,
    /// Half the side length of the square sign, meters.
    pub half_extent: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub translation: [f64; 3],
    /// Scalar-last unit quaternion `[qx, qy, qz, qw]` of the world-from-camera rotation.
    pub rotation: [f64; 4],
}

impl Waypoint {
    /// Camera at `translation` looking along `yaw` radians about the world +y
    /// axis (yaw 0 looks down +z).
    pub fn yawed(translation: [f64; 3], yaw: f64) -> Self {
        let q = UnitQuaternion::from_axis_angle(&Vector3::y_axis(), yaw);
        Self {
            translation,
            rotation: [q.i, q.j, q.k, q.w],
        }
    }

    fn parts(&self) -> (Vector3<f64>, UnitQuaternion<f64>) {
        let [qx, qy, qz, qw] = self.rotation;
        (
            Vector3::from(self.translation),
            UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(qw, qx, qy, qz)),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub waypoints: Vec<Waypoint>,
    /// Frames emitted between consecutive waypoints; the final waypoint itself is
    /// not emitted, so a closed loop yields `(waypoints − 1) × frames_per_segment`
    /// frames without a duplicated start pose.
    pub frames_per_segment: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseConfig {
    pub char_substitute_rate: f64,
    pub char_delete_rate: f64,
    pub char_insert_rate: f64,
    /// Probability per frame of one junk detection.
    pub spurious_rate: f64,
    pub depth_sigma: f64,
    /// Probability that a visible sign goes undetected in a frame.
    pub miss_rate: f64,
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<(), Error> {
        let probs = [
            ("char_substitute_rate", self.char_substitute_rate),
            ("char_delete_rate", self.char_delete_rate),
            ("char_insert_rate", self.char_insert_rate),
            ("spurious_rate", self.spurious_rate),
            ("miss_rate", self.miss_rate),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Scenario(format!("{name} = {p} is not a probability")));
            }
        }
        if !(self.depth_sigma >= 0.0) {
            return Err(Error::Scenario("depth_sigma must be >= 0".into()));
        }
        Ok(())
    }
}

fn default_margin() -> f64 {
    DEFAULT_BORDER_MARGIN
}

fn default_interval() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub signs: Vec<Sign>,
    pub trajectory: Trajectory,
    pub intrinsics: Intrinsics,
    #[serde(default)]
    pub noise: NoiseConfig,
    pub seed: u64,
    /// Sign centers must project at least this far inside the image to be emitted.
    #[serde(default = "default_margin")]
    pub border_margin: f64,
    #[serde(default = "default_interval")]
    pub frame_interval_s: f64,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), Error> {
        if self.signs.is_empty() {
            return Err(Error::Scenario("at least one sign is required".into()));
        }
        if self.trajectory.waypoints.len() < 2 {
            return Err(Error::Scenario("at least two waypoints are required".into()));
        }
        if self.trajectory.frames_per_segment == 0 {
            return Err(Error::Scenario("frames_per_segment must be positive".into()));
        }
        for s in &self.signs {
            if s.text.trim().is_empty() {
                return Err(Error::Scenario("sign text must be non-empty".into()));
            }
            if !(s.half_extent > 0.0) || !s.center.is_finite() {
                return Err(Error::Scenario(format!("sign {:?} has invalid geometry", s.text)));
            }
        }
        for w in &self.trajectory.waypoints {
            let n: f64 = w.rotation.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !(n > 0.0) || w.translation.iter().any(|v| !v.is_finite()) {
                return Err(Error::Scenario("waypoint has invalid pose".into()));
            }
        }
        if !(self.frame_interval_s > 0.0) {
            return Err(Error::Scenario("frame_interval_s must be positive".into()));
        }
        if !(self.border_margin >= 0.0) {
            return Err(Error::Scenario("border_margin must be >= 0".into()));
        }
        self.intrinsics.validate()?;
        self.noise.validate()
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| Error::Scenario(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Interpolated camera poses: linear in translation, slerp in rotation.
    pub fn poses(&self) -> Vec<TimedPose> {
        let n = self.trajectory.frames_per_segment;
        let mut out = Vec::new();
        for pair in self.trajectory.waypoints.windows(2) {
            let (t0, q0) = pair[0].parts();
            let (t1, q1) = pair[1].parts();
            for j in 0..n {
                let s = f64::from(j) / f64::from(n);
                let t = t0 + (t1 - t0) * s;
                let q = q0.slerp(&q1, s);
                let idx = out.len();
                out.push(TimedPose {
                    timestamp: idx as f64 * self.frame_interval_s,
                    pose: Pose::from_unit_quaternion(t, q),
                });
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthSign {
    pub text: String,
    pub center: WorldPoint,
    /// Frames in which the sign was in view (before miss sampling).
    pub frames_visible: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub signs: Vec<GroundTruthSign>,
    pub frames: usize,
    pub spurious_detections: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub poses: Vec<TimedPose>,
    pub detections: Vec<DetectionRecord>,
    pub ground_truth: GroundTruth,
    /// One message per sign never in view.
    pub warnings: Vec<String>,
}

/// Renders the scenario into poses, detections and ground truth.
pub fn render_stream(scenario: &Scenario) -> Result<SimOutput, Error> {
    scenario.validate()?;
    let intr = &scenario.intrinsics;
    let poses = scenario.poses();
    let (w, h) = (f64::from(intr.width), f64::from(intr.height));
    let margin = scenario.border_margin;
    let depth_noise = (scenario.noise.depth_sigma > 0.0)
        .then(|| Normal::new(0.0, scenario.noise.depth_sigma).expect("sigma validated"));

    let mut detections = Vec::new();
    let mut visible = vec![0usize; scenario.signs.len()];
    let mut spurious = 0;
    for (frame, tp) in poses.iter().enumerate() {
        let mut rng = frame_rng(scenario.seed, frame as u64);
        for (k, sign) in scenario.signs.iter().enumerate() {
            let Ok((c, depth)) = world_to_pixel(&tp.pose, intr, &sign.center) else {
                continue;
            };
            if !(c.u > margin && c.u < w - margin && c.v > margin && c.v < h - margin) {
                continue;
            }
            visible[k] += 1;
            if rng.random_bool(scenario.noise.miss_rate) {
                continue;
            }
            let quad = sign_quad(&tp.pose, intr, sign);
            let text = corrupt(&sign.text, &scenario.noise, &mut rng);
            let noisy = depth + depth_noise.map_or(0.0, |d| d.sample(&mut rng));
            detections.push(DetectionRecord {
                ts: tp.timestamp,
                text,
                quad,
                depth_m: Some(noisy.max(1e-3)),
                conf: rng.random_range(0.7..=1.0),
            });
        }
        if rng.random_bool(scenario.noise.spurious_rate) {
            spurious += 1;
            detections.push(junk_detection(tp.timestamp, w, h, &mut rng));
        }
    }

    let warnings = scenario
        .signs
        .iter()
        .zip(&visible)
        .filter(|(_, &n)| n == 0)
        .map(|(s, _)| format!("NoVisibleSign: {:?} is never in view", s.text))
        .collect();
    let ground_truth = GroundTruth {
        signs: scenario
            .signs
            .iter()
            .zip(&visible)
            .map(|(s, &n)| GroundTruthSign {
                text: s.text.clone(),
                center: s.center,
                frames_visible: n,
            })
            .collect(),
        frames: poses.len(),
        spurious_detections: spurious,
    };
    Ok(SimOutput {
        poses,
        detections,
        ground_truth,
        warnings,
    })
}

/// Independent per-frame substream of the scenario seed.
fn frame_rng(seed: u64, frame: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(frame);
    rng
}

/// Projected corners of the camera-facing square, in reading order
/// (top-left, top-right, bottom-right, bottom-left).
fn sign_quad(pose: &Pose, intr: &Intrinsics, sign: &Sign) -> [[f64; 2]; 4] {
    let h = sign.half_extent;
    let offsets = [(-h, -h), (h, -h), (h, h), (-h, h)];
    offsets.map(|(dx, dy)| {
        let corner = sign.center.coords() + pose.rotation * Vector3::new(dx, dy, 0.0);
        // Corners share the center's camera depth, so they are always projectable
        // whenever the center is.
        let (px, _) = world_to_pixel(pose, intr, &WorldPoint::from(corner)).expect("corner in front of camera");
        [px.u, px.v]
    })
}

fn junk_detection(ts: f64, w: f64, h: f64, rng: &mut impl Rng) -> DetectionRecord {
    const ALNUM: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
    let len = rng.random_range(3..=8);
    let text: String = (0..len)
        .map(|_| ALNUM[rng.random_range(0..ALNUM.len())] as char)
        .collect();
    let c = PixelPoint::new(rng.random_range(0.0..w), rng.random_range(0.0..h));
    let hx = rng.random_range(10.0..40.0);
    let hy = rng.random_range(5.0..20.0);
    DetectionRecord {
        ts,
        text,
        quad: [[c.u - hx, c.v - hy], [c.u + hx, c.v - hy], [c.u + hx, c.v + hy], [c.u - hx, c.v + hy]],
        depth_m: Some(rng.random_range(0.5..6.0)),
        conf: rng.random_range(0.3..=1.0),
    }
}

fn confusables(c: char) -> &'static [&'static str] {
    match c {
        'l' => &["I", "i", "1", "|"],
        'I' => &["l", "1", "i"],
        'i' => &["l", "I", "1"],
        '1' => &["l", "I", "i"],
        'O' => &["0", "Q", "D"],
        'o' => &["0", "O", "c"],
        '0' => &["O", "o"],
        'W' => &["VV"],
        'w' => &["vv"],
        'M' => &["IVI", "N"],
        'm' => &["rn", "nn"],
        'E' => &["F", "B"],
        'F' => &["E", "P"],
        'C' => &["G", "O"],
        'G' => &["C", "6"],
        'S' => &["5", "8"],
        '5' => &["S"],
        'B' => &["8", "E"],
        '8' => &["B"],
        'U' => &["V", "O"],
        'V' => &["U", "Y"],
        'T' => &["I", "Y"],
        'H' => &["N", "A"],
        'A' => &["4", "R"],
        'e' => &["c", "a"],
        'a' => &["e", "o"],
        'n' => &["h", "r"],
        'r' => &["n"],
        _ => &[],
    }
}

/// A random character from the same script as `c`, different from `c`.
fn same_script(c: char, rng: &mut impl Rng) -> char {
    let pick_from = |lo: u32, hi: u32, rng: &mut dyn rand::RngCore| loop {
        let x = char::from_u32(rng.random_range(lo..=hi)).expect("range holds valid scalars");
        if x != c {
            return x;
        }
    };
    match c {
        'A'..='Z' => pick_from('A' as u32, 'Z' as u32, rng),
        'a'..='z' => pick_from('a' as u32, 'z' as u32, rng),
        '0'..='9' => pick_from('0' as u32, '9' as u32, rng),
        '\u{4E00}'..='\u{9FA5}' => pick_from(0x4E00, 0x9FA5, rng),
        _ => {
            const PUNCT: [char; 5] = ['.', '-', '\'', '/', ' '];
            loop {
                let x = PUNCT[rng.random_range(0..PUNCT.len())];
                if x != c {
                    return x;
                }
            }
        }
    }
}

fn substitute(c: char, rng: &mut impl Rng) -> String {
    let alts = confusables(c);
    if !alts.is_empty() && rng.random_bool(0.5) {
        alts[rng.random_range(0..alts.len())].to_owned()
    } else {
        same_script(c, rng).to_string()
    }
}

/// OCR-style corruption: per-character deletion, substitution (never back to the
/// original character) and insertion.
pub fn corrupt(text: &str, noise: &NoiseConfig, rng: &mut impl Rng) -> String {
    for _ in 0..2 {
        let mut out = String::with_capacity(text.len());
        for c in text.chars() {
            if rng.random_bool(noise.char_delete_rate) {
                // dropped
            } else if rng.random_bool(noise.char_substitute_rate) {
                out.push_str(&substitute(c, rng));
            } else {
                out.push(c);
            }
            if rng.random_bool(noise.char_insert_rate) {
                out.push(same_script(c, rng));
            }
        }
        if !out.is_empty() {
            return out;
        }
    }
    let seed_char = text.chars().next().unwrap_or('A');
    same_script(seed_char, rng).to_string()
}
