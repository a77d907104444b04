//! Exact multi-frame optimum. Every frame is solved exactly for every lattice
//! budget vector, then a dynamic program over frames splits each device's
//! energy levels.

use super::{opt_bruteforce_frame, OracleGuard};
use crate::error::Result;
use crate::model::{FrameAssignment, Instance};

#[derive(Debug, Clone, PartialEq)]
pub struct HorizonOptimum {
    pub served: usize,
    /// `levels[i][t]`: lattice steps device `i` spends in frame `t`.
    pub levels: Vec<Vec<u32>>,
    pub assignments: Vec<FrameAssignment>,
}

/// Mixed-radix enumeration of vectors `0..=top[i]`.
struct Lattice {
    radix: Vec<usize>,
}

impl Lattice {
    fn size(&self) -> usize {
        self.radix.iter().product()
    }

    fn decode(&self, mut code: usize, out: &mut [u32]) {
        for (slot, &r) in out.iter_mut().zip(&self.radix) {
            *slot = (code % r) as u32;
            code /= r;
        }
    }

    fn encode(&self, v: &[u32]) -> usize {
        v.iter()
            .zip(&self.radix)
            .rev()
            .fold(0, |acc, (&x, &r)| acc * r + x as usize)
    }
}

/// Exact maximum of served (device, frame) pairs over all lattice power
/// splits.
pub fn opt_bruteforce_horizon(instance: &Instance, guard: &OracleGuard) -> Result<HorizonOptimum> {
    guard.check_horizon(instance)?;
    let (m, k) = (instance.num_devices(), instance.num_frames());
    let lattice = Lattice {
        radix: instance
            .devices()
            .iter()
            .map(|d| d.power_level as usize + 1)
            .collect(),
    };
    let size = lattice.size();
    let mut v = vec![0u32; m];
    let mut r = vec![0u32; m];

    // value[t][code]: optimum of frame t with budgets decoded from code.
    let mut value = vec![vec![0usize; size]; k];
    for (t, row) in value.iter_mut().enumerate() {
        for (code, cell) in row.iter_mut().enumerate() {
            lattice.decode(code, &mut v);
            let budgets: Vec<f64> = instance
                .devices()
                .iter()
                .zip(&v)
                .map(|(d, &x)| d.level_power(x))
                .collect();
            *cell = opt_bruteforce_frame(instance, t, &budgets, guard)?.served;
        }
    }

    // best[t][code]: optimum of frames t.. with remaining levels decoded from
    // code; choice[t][code] is the spend of frame t.
    let mut best = vec![vec![0usize; size]; k + 1];
    let mut choice = vec![vec![0usize; size]; k];
    let mut rest = vec![0u32; m];
    for t in (0..k).rev() {
        for rc in 0..size {
            lattice.decode(rc, &mut r);
            let mut top = (0, 0);
            for (vc, &gain) in value[t].iter().enumerate() {
                lattice.decode(vc, &mut v);
                if v.iter().zip(&r).any(|(a, b)| a > b) {
                    continue;
                }
                for ((x, a), b) in rest.iter_mut().zip(&r).zip(&v) {
                    *x = a - b;
                }
                let total = gain + best[t + 1][lattice.encode(&rest)];
                if total > top.0 {
                    top = (total, vc);
                }
            }
            best[t][rc] = top.0;
            choice[t][rc] = top.1;
        }
    }

    let full: Vec<u32> = instance.devices().iter().map(|d| d.power_level).collect();
    let mut remaining = lattice.encode(&full);
    let mut levels = vec![vec![0u32; k]; m];
    let mut assignments = Vec::with_capacity(k);
    for t in 0..k {
        let vc = choice[t][remaining];
        lattice.decode(vc, &mut v);
        lattice.decode(remaining, &mut r);
        for i in 0..m {
            levels[i][t] = v[i];
            r[i] -= v[i];
        }
        let budgets: Vec<f64> = instance
            .devices()
            .iter()
            .zip(&v)
            .map(|(d, &x)| d.level_power(x))
            .collect();
        assignments.push(opt_bruteforce_frame(instance, t, &budgets, guard)?.assignment);
        remaining = lattice.encode(&r);
    }
    Ok(HorizonOptimum {
        served: best[0][lattice.encode(&full)],
        levels,
        assignments,
    })
}
