//! Point-to-point baseline: straight Cartesian segments with
//! trapezoidal velocity profiles, time-scaled so the whole plan takes
//! as long as the reference run, tracked with a proportional position
//! correction. All brakes stay energized for the entire run.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ScenarioConfig, Vec2};
use crate::controllers::{cartesian_velocity_cmd, ActuatorCommand, ControlError};
use crate::plant::SensorFrame;

/// Transport cruise limits (m/s, m/s^2).
pub const PTP_V_MAX: f64 = 0.5;
pub const PTP_A_MAX: f64 = 1.0;
/// Proportional position-correction gain (1/s).
pub const KP_PTP: f64 = 2.0;
/// Drop target clearance above the ground (m).
pub const PTP_CLEARANCE: f64 = 0.03;
/// Horizontal offset of the drop point right of the final target (m).
pub const PTP_APPROACH_OFFSET: f64 = 0.10;

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("profile distance must be positive, got {0}")]
    NonPositiveDistance(f64),
    #[error("stretch target {requested:.4} s is below the minimum profile time {minimum:.4} s")]
    StretchTooShort { requested: f64, minimum: f64 },
    #[error("reference duration {requested:.4} s is below the minimum plan time {minimum:.4} s")]
    ReferenceTooShort { requested: f64, minimum: f64 },
}

/// Symmetric trapezoidal (or triangular) velocity profile over a
/// straight segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapezoidProfile {
    pub distance: f64,
    /// Realized cruise/peak velocity.
    pub v_peak: f64,
    pub a_max: f64,
    pub t_acc: f64,
    pub t_cruise: f64,
    pub t_total: f64,
    pub triangular: bool,
}

impl TrapezoidProfile {
    pub fn velocity(&self, t: f64) -> f64 {
        if t <= 0.0 || t >= self.t_total {
            0.0
        } else if t < self.t_acc {
            self.a_max * t
        } else if t < self.t_acc + self.t_cruise {
            self.v_peak
        } else {
            self.a_max * (self.t_total - t)
        }
    }

    pub fn position(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else if t >= self.t_total {
            self.distance
        } else if t < self.t_acc {
            0.5 * self.a_max * t * t
        } else if t < self.t_acc + self.t_cruise {
            0.5 * self.a_max * self.t_acc * self.t_acc + self.v_peak * (t - self.t_acc)
        } else {
            let r = self.t_total - t;
            self.distance - 0.5 * self.a_max * r * r
        }
    }
}

/// Minimum-time profile, or the unique stretched profile with reduced
/// cruise velocity meeting `stretch_to` under the same acceleration.
pub fn trapezoid(
    distance: f64,
    v_max: f64,
    a_max: f64,
    stretch_to: Option<f64>,
) -> Result<TrapezoidProfile, PlanError> {
    if distance <= 0.0 {
        return Err(PlanError::NonPositiveDistance(distance));
    }
    let min_profile = if distance >= v_max * v_max / a_max {
        let t_acc = v_max / a_max;
        TrapezoidProfile {
            distance,
            v_peak: v_max,
            a_max,
            t_acc,
            t_cruise: distance / v_max - t_acc,
            t_total: distance / v_max + t_acc,
            triangular: false,
        }
    } else {
        let v_peak = (distance * a_max).sqrt();
        let t_acc = v_peak / a_max;
        TrapezoidProfile {
            distance,
            v_peak,
            a_max,
            t_acc,
            t_cruise: 0.0,
            t_total: 2.0 * t_acc,
            triangular: true,
        }
    };
    let target = match stretch_to {
        None => return Ok(min_profile),
        Some(t) => t,
    };
    if target < min_profile.t_total - 1e-12 {
        return Err(PlanError::StretchTooShort {
            requested: target,
            minimum: min_profile.t_total,
        });
    }
    if target <= min_profile.t_total + 1e-12 {
        return Ok(min_profile);
    }
    // d = u (T - u/a): lower root keeps u <= v_max.
    let disc = a_max * a_max * target * target - 4.0 * a_max * distance;
    let u = 0.5 * (a_max * target - disc.max(0.0).sqrt());
    let t_acc = u / a_max;
    Ok(TrapezoidProfile {
        distance,
        v_peak: u,
        a_max,
        t_acc,
        t_cruise: target - 2.0 * t_acc,
        t_total: target,
        triangular: false,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PtpSegment {
    pub from: Vec2,
    pub to: Vec2,
    pub profile: TrapezoidProfile,
    pub start_time: f64,
    /// Circled waypoint label reached at the end of this segment.
    pub end_label: u8,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PtpPlan {
    pub segments: Vec<PtpSegment>,
    pub total_time: f64,
}

impl PtpPlan {
    /// Waypoint labels in order, including the start label 1.
    pub fn labels(&self) -> Vec<u8> {
        let mut out = vec![1];
        out.extend(self.segments.iter().map(|s| s.end_label));
        out
    }

    /// Reference position/velocity and the label of the last waypoint
    /// passed at time `t`.
    pub fn state_at(&self, t: f64) -> (Vec2, Vec2, u8) {
        let mut label = 1;
        for seg in &self.segments {
            let local = t - seg.start_time;
            if local < seg.profile.t_total {
                let dir = seg.to - seg.from;
                let len = dir.norm().max(1e-12);
                let u = dir.scale(1.0 / len);
                if local <= 0.0 {
                    return (seg.from, Vec2::ZERO, label);
                }
                return (
                    seg.from + u.scale(seg.profile.position(local)),
                    u.scale(seg.profile.velocity(local)),
                    label,
                );
            }
            label = seg.end_label;
        }
        let last = self.segments.last().expect("non-empty plan");
        (last.to, Vec2::ZERO, label)
    }
}

/// Five-segment plan: lift, horizontal transport, drop to just above
/// the ground, horizontal approach to the neighbor face, final
/// placement. Lift/drop run at lift_speed, the terminal approach at
/// fine_speed; the transport segment absorbs the stretch needed to hit
/// `reference_duration`.
pub fn build_ptp_plan(
    cfg: &ScenarioConfig,
    reference_duration: Option<f64>,
) -> Result<PtpPlan, PlanError> {
    let g = &cfg.geometry;
    let start = cfg.start_position();
    let task = &cfg.task;
    let drop_x = g.target_x + PTP_APPROACH_OFFSET;
    let w = [
        Vec2::new(start.x, task.h_d),
        Vec2::new(drop_x, task.h_d),
        Vec2::new(drop_x, g.ground_y + PTP_CLEARANCE),
        Vec2::new(g.target_x, g.ground_y + PTP_CLEARANCE),
        Vec2::new(g.target_x, g.ground_y),
    ];
    let labels = [2u8, 3, 5, 6, 7];
    let speeds = [
        task.lift_speed,
        PTP_V_MAX,
        task.lift_speed,
        task.fine_speed,
        task.fine_speed,
    ];
    let mut profiles = Vec::with_capacity(5);
    let mut from = start;
    for (i, to) in w.iter().enumerate() {
        let d = (*to - from).norm();
        profiles.push(trapezoid(d, speeds[i], PTP_A_MAX, None)?);
        from = *to;
    }
    let min_total: f64 = profiles.iter().map(|p| p.t_total).sum();
    if let Some(reference) = reference_duration {
        if reference < min_total - 1e-9 {
            return Err(PlanError::ReferenceTooShort {
                requested: reference,
                minimum: min_total,
            });
        }
        let extra = (reference - min_total).max(0.0);
        let transport_target = profiles[1].t_total + extra;
        profiles[1] = trapezoid(profiles[1].distance, PTP_V_MAX, PTP_A_MAX, Some(transport_target))?;
    }
    let mut segments = Vec::with_capacity(5);
    let mut from = start;
    let mut t = 0.0;
    for i in 0..5 {
        segments.push(PtpSegment {
            from,
            to: w[i],
            profile: profiles[i],
            start_time: t,
            end_label: labels[i],
        });
        t += profiles[i].t_total;
        from = w[i];
    }
    Ok(PtpPlan {
        segments,
        total_time: t,
    })
}

/// Tick controller for the PTP baseline: profile feed-forward plus a
/// proportional position correction, with every brake energized and
/// the off-side motor held at keeper current for the whole run.
pub struct PtpController {
    pub plan: PtpPlan,
}

impl PtpController {
    pub fn new(plan: PtpPlan) -> Self {
        PtpController { plan }
    }

    pub fn command(
        &self,
        t: f64,
        frame: &SensorFrame,
        cfg: &ScenarioConfig,
    ) -> Result<ActuatorCommand, ControlError> {
        let (p_ref, v_ref, _) = self.plan.state_at(t);
        let v_cmd = v_ref + (p_ref - frame.position_measurement).scale(KP_PTP);
        cartesian_velocity_cmd(v_cmd, frame.position_measurement, cfg, true, false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn trapezoid_nominal_case() {
        let p = trapezoid(1.0, 0.5, 1.0, None).unwrap();
        assert!((p.t_acc - 0.5).abs() < 1e-12);
        assert!((p.t_cruise - 1.5).abs() < 1e-12);
        assert!((p.t_total - 2.5).abs() < 1e-12);
        assert!(!p.triangular);
        assert!((p.position(p.t_total) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trapezoid_triangular_case() {
        let p = trapezoid(0.2, 1.0, 1.0, None).unwrap();
        assert!(p.triangular);
        assert!((p.v_peak - 0.2_f64.sqrt()).abs() < 1e-12);
        assert!((p.t_total - 2.0 * 0.2_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn stretch_is_idempotent_at_minimum_time() {
        let a = trapezoid(1.0, 0.5, 1.0, None).unwrap();
        let b = trapezoid(1.0, 0.5, 1.0, Some(2.5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn stretch_too_short_is_rejected() {
        assert!(matches!(
            trapezoid(1.0, 0.5, 1.0, Some(2.0)),
            Err(PlanError::StretchTooShort { .. })
        ));
    }

    #[test]
    fn stretched_profile_meets_target_and_limits() {
        let p = trapezoid(1.0, 0.5, 1.0, Some(5.0)).unwrap();
        assert!((p.t_total - 5.0).abs() < 1e-9);
        assert!(p.v_peak <= 0.5 + 1e-12);
        assert!((p.position(p.t_total) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn profile_integral_equals_distance_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let d = rng.gen_range(0.01..5.0);
            let v: f64 = rng.gen_range(0.05..2.0);
            let a = rng.gen_range(0.1..4.0);
            let min_t = trapezoid(d, v, a, None).unwrap().t_total;
            let stretch = if rng.gen_bool(0.5) {
                Some(min_t * rng.gen_range(1.0..3.0))
            } else {
                None
            };
            let p = trapezoid(d, v, a, stretch).unwrap();
            assert!(
                (p.position(p.t_total) - d).abs() < 1e-9,
                "d={d} v={v} a={a} stretch={stretch:?}"
            );
            assert!(p.v_peak <= v + 1e-12);
        }
    }

    #[test]
    fn plan_has_five_segments_and_skips_label_four() {
        let cfg = ScenarioConfig::default();
        let plan = build_ptp_plan(&cfg, None).unwrap();
        assert_eq!(plan.segments.len(), 5);
        assert_eq!(plan.labels(), vec![1, 2, 3, 5, 6, 7]);
        // Chain continuity.
        for pair in plan.segments.windows(2) {
            assert_eq!(pair[0].to, pair[1].from);
        }
        assert_eq!(plan.segments[0].from, cfg.start_position());
        assert_eq!(plan.segments[4].to, Vec2::new(cfg.geometry.target_x, 0.0));
    }

    #[test]
    fn plan_stretches_transport_to_reference() {
        let cfg = ScenarioConfig::default();
        let min = build_ptp_plan(&cfg, None).unwrap();
        let target = min.total_time + 4.0;
        let plan = build_ptp_plan(&cfg, Some(target)).unwrap();
        assert!((plan.total_time - target).abs() < 1e-9);
        // Only the transport cruise slowed down.
        assert!(plan.segments[1].profile.v_peak < min.segments[1].profile.v_peak);
        for i in [0usize, 2, 3, 4] {
            assert_eq!(plan.segments[i].profile, min.segments[i].profile);
        }
        assert!(matches!(
            build_ptp_plan(&cfg, Some(min.total_time - 1.0)),
            Err(PlanError::ReferenceTooShort { .. })
        ));
    }

    #[test]
    fn plan_state_interpolates_and_labels() {
        let cfg = ScenarioConfig::default();
        let plan = build_ptp_plan(&cfg, None).unwrap();
        let (p0, v0, l0) = plan.state_at(0.0);
        assert_eq!(p0, cfg.start_position());
        assert_eq!(v0, Vec2::ZERO);
        assert_eq!(l0, 1);
        let mid = plan.segments[1].start_time + 0.5 * plan.segments[1].profile.t_total;
        let (_, v, l) = plan.state_at(mid);
        assert_eq!(l, 2);
        assert!(v.x > 0.0, "transport moves right");
        let (pe, ve, le) = plan.state_at(plan.total_time + 1.0);
        assert_eq!(pe, plan.segments[4].to);
        assert_eq!(ve, Vec2::ZERO);
        assert_eq!(le, 7);
    }
}
