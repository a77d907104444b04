use std::fmt;

use serde::Serialize;

use super::{approx_ge, sic_order, Instance, Schedule, FEASIBILITY_RTOL};
use crate::error::{Error, Result};

/// Constraint families of the grouping and power allocation problem, numbered
/// as in the problem statement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Constraint {
    /// Powers are finite and non-negative.
    Domain,
    /// Summed rate over the frame covers the packet of a served device.
    Rate,
    /// `p <= e_max * x`, and `p > 0` exactly when `x = 1`.
    PowerCap,
    /// Total power of a device over the horizon stays within its energy.
    Energy,
    /// Transmissions only inside the arrival/deadline window.
    Window,
    /// `x <= z`.
    ServedLink,
    /// At most `M` devices per RB.
    GroupSize,
    /// No service in a frame without a packet.
    NoPacket,
}

impl Constraint {
    pub fn number(self) -> u8 {
        match self {
            Constraint::Domain => 4,
            Constraint::Rate => 5,
            Constraint::PowerCap => 6,
            Constraint::Energy => 7,
            Constraint::Window => 8,
            Constraint::ServedLink => 9,
            Constraint::GroupSize => 10,
            Constraint::NoPacket => 11,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub constraint: Constraint,
    pub device: Option<usize>,
    pub slot: Option<usize>,
    pub frame: Option<usize>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "constraint ({})", self.constraint.number())?;
        if let Some(i) = self.device {
            write!(f, " device {i}")?;
        }
        if let Some(j) = self.slot {
            write!(f, " slot {j}")?;
        }
        if let Some(t) = self.frame {
            write!(f, " frame {t}")?;
        }
        write!(f, ": {}", self.detail)
    }
}

/// Lists every constraint the schedule breaks on `instance`. An empty list
/// means the schedule is feasible.
pub fn validate_schedule(instance: &Instance, schedule: &Schedule) -> Result<Vec<Violation>> {
    let (m, n, k) = (
        instance.num_devices(),
        instance.num_slots(),
        instance.num_frames(),
    );
    if schedule.dims() != (m, n, k) {
        return Err(Error::Dimension(format!(
            "schedule is {:?}, instance is ({m}, {n}, {k})",
            schedule.dims()
        )));
    }
    let w = instance.rb_bandwidth_hz();
    let mut out = Vec::new();
    let mut push = |constraint, device, slot, frame, detail: String| {
        out.push(Violation {
            constraint,
            device,
            slot,
            frame,
            detail,
        })
    };

    for i in 0..m {
        let e_max = instance.device(i).max_energy;
        let mut total_power = 0.0;
        for t in 0..k {
            let demand = instance.demand(i, t);
            for j in 0..n {
                let (x, p) = (schedule.x(i, j, t), schedule.p(i, j, t));
                if !(p.is_finite() && p >= 0.0) {
                    push(
                        Constraint::Domain,
                        Some(i),
                        Some(j),
                        Some(t),
                        format!("power {p}"),
                    );
                    continue;
                }
                total_power += p;
                if (p > 0.0) != x {
                    push(
                        Constraint::PowerCap,
                        Some(i),
                        Some(j),
                        Some(t),
                        format!("x = {} but p = {p}", u8::from(x)),
                    );
                }
                if !approx_ge(e_max, p) {
                    push(
                        Constraint::PowerCap,
                        Some(i),
                        Some(j),
                        Some(t),
                        format!("p = {p} exceeds e_max = {e_max}"),
                    );
                }
                if x && !demand.covers(j) {
                    push(
                        Constraint::Window,
                        Some(i),
                        Some(j),
                        Some(t),
                        format!(
                            "slot outside window [{}, {})",
                            demand.arrival_slot, demand.deadline_slot
                        ),
                    );
                }
                if x && !schedule.z(i, t) {
                    push(
                        Constraint::ServedLink,
                        Some(i),
                        Some(j),
                        Some(t),
                        "x = 1 with z = 0".into(),
                    );
                }
            }
            if schedule.z(i, t) && !demand.has_packet() {
                push(
                    Constraint::NoPacket,
                    Some(i),
                    None,
                    Some(t),
                    "served without a packet".into(),
                );
            }
        }
        if !approx_ge(e_max, total_power) {
            push(
                Constraint::Energy,
                Some(i),
                None,
                None,
                format!("total power {total_power} exceeds e_max = {e_max}"),
            );
        }
    }

    // Rates per RB in SIC order, accumulated per (device, frame).
    let mut rate_sum = vec![0.0; m * k];
    let mut members = Vec::with_capacity(m);
    for t in 0..k {
        for j in 0..n {
            members.clear();
            members.extend((0..m).filter(|&i| schedule.x(i, j, t)));
            if members.len() > instance.group_cap() {
                push(
                    Constraint::GroupSize,
                    None,
                    Some(j),
                    Some(t),
                    format!("{} devices, cap {}", members.len(), instance.group_cap()),
                );
            }
            sic_order(instance, j, t, &mut members);
            let mut interference = 0.0;
            for &i in &members {
                let received = schedule.p(i, j, t).max(0.0) * instance.gain(i, j, t);
                let sinr = received / (1.0 + interference);
                rate_sum[i * k + t] += w * sinr.ln_1p() / std::f64::consts::LN_2;
                interference += received;
            }
        }
    }
    for i in 0..m {
        for t in 0..k {
            if !schedule.z(i, t) {
                continue;
            }
            let need = instance.demand(i, t).packet_bits;
            let got = rate_sum[i * k + t];
            if got < need * (1.0 - FEASIBILITY_RTOL) {
                push(
                    Constraint::Rate,
                    Some(i),
                    None,
                    Some(t),
                    format!("rate {got} bits below packet of {need} bits"),
                );
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::unit_instance;
    use crate::model::{ChannelTensor, DeviceProfile, FrameDemand};

    fn windowed() -> Instance {
        let devices = vec![DeviceProfile {
            id: 0,
            max_energy: 1.0,
            power_level: 1,
            position: (0.0, 0.0),
        }];
        let demands = vec![vec![FrameDemand::new(1.0, 2, 4)]];
        let channels =
            ChannelTensor::from_nested(&[vec![vec![5.0], vec![5.0], vec![5.0]]]).unwrap();
        Instance::new(1, 1.0, devices, demands, channels).unwrap()
    }

    #[test]
    fn empty_schedule_is_feasible() {
        let inst = windowed();
        let s = Schedule::for_instance(&inst);
        assert!(validate_schedule(&inst, &s).unwrap().is_empty());
    }

    #[test]
    fn early_transmission_breaks_only_the_window() {
        let inst = windowed();
        let mut s = Schedule::for_instance(&inst);
        s.transmit(0, 0, 0, 1.0);
        let v = validate_schedule(&inst, &s).unwrap();
        assert_eq!(v.len(), 1, "{v:?}");
        assert_eq!(v[0].constraint, Constraint::Window);
        assert_eq!(v[0].constraint.number(), 8);
        assert_eq!(
            (v[0].device, v[0].slot, v[0].frame),
            (Some(0), Some(0), Some(0))
        );
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let inst = windowed();
        assert!(validate_schedule(&inst, &Schedule::zeros(2, 3, 1)).is_err());
    }

    #[test]
    fn detects_each_constraint_family() {
        // g = (1, 1.5), bits = 1 each (b = 1), M = 1.
        let inst = unit_instance(&[vec![1.0, 1.0], vec![1.5, 1.5]], &[1.0, 1.0], 1);

        let mut s = Schedule::for_instance(&inst);
        s.transmit(0, 0, 0, 1.0);
        s.transmit(1, 0, 0, 1.0);
        let kinds: Vec<_> = validate_schedule(&inst, &s)
            .unwrap()
            .into_iter()
            .map(|v| v.constraint)
            .collect();
        assert!(kinds.contains(&Constraint::GroupSize));
        assert!(kinds.contains(&Constraint::Rate));

        let mut s = Schedule::for_instance(&inst);
        s.set_x(0, 0, 0, true);
        let kinds: Vec<_> = validate_schedule(&inst, &s)
            .unwrap()
            .into_iter()
            .map(|v| v.constraint)
            .collect();
        assert!(kinds.contains(&Constraint::PowerCap));
        assert!(kinds.contains(&Constraint::ServedLink));

        let mut s = Schedule::for_instance(&inst);
        s.transmit(0, 0, 0, 0.6);
        s.transmit(0, 1, 0, 0.6);
        let kinds: Vec<_> = validate_schedule(&inst, &s)
            .unwrap()
            .into_iter()
            .map(|v| v.constraint)
            .collect();
        assert!(kinds.contains(&Constraint::Energy));

        let mut s = Schedule::for_instance(&inst);
        s.transmit(0, 0, 0, 2.0);
        assert!(validate_schedule(&inst, &s)
            .unwrap()
            .iter()
            .any(|v| v.constraint == Constraint::PowerCap));

        let mut s = Schedule::for_instance(&inst);
        s.transmit(0, 0, 0, f64::NAN);
        assert!(validate_schedule(&inst, &s)
            .unwrap()
            .iter()
            .any(|v| v.constraint == Constraint::Domain));
    }

    #[test]
    fn no_packet_means_no_service() {
        let inst = unit_instance(&[vec![2.0]], &[0.0], 1);
        let mut s = Schedule::for_instance(&inst);
        s.set_z(0, 0, true);
        let v = validate_schedule(&inst, &s).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].constraint, Constraint::NoPacket);
    }

    #[test]
    fn rate_summed_over_slots() {
        // b = 2^2 - 1 = 3 needs SNR 3 in a single slot; two slots at SNR 1 give 2 bits.
        let inst = unit_instance(&[vec![1.0, 1.0]], &[2.0], 1);
        let mut s = Schedule::for_instance(&inst);
        s.transmit(0, 0, 0, 0.5);
        s.transmit(0, 1, 0, 0.5);
        // SNR 0.5 per slot: 2 * log2(1.5) < 2 bits.
        assert!(validate_schedule(&inst, &s)
            .unwrap()
            .iter()
            .any(|v| v.constraint == Constraint::Rate));
    }
}
