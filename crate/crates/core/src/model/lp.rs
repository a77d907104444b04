//! CPLEX-LP export of the binary-power problem.
//!
//! With binary powers (`p = e_max * x`) and one RB per served device and frame,
//! the rate constraint becomes one linear SINR inequality per RB, switched off
//! by a big-M term when the device does not transmit there:
//!
//! ```text
//! e_i g_i x_i >= b_i (1 + sum_{lower i'} e_i' g_i' x_i') - M_i (1 - x_i)
//! M_i = b_i (1 + sum_{lower i'} e_i' g_i')
//! ```

use std::fmt::Write as _;

use super::{sic_order, Instance};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerMode {
    /// Each device transmits at zero or full power.
    Binary,
    /// Lattice powers; not expressible as an ILP here.
    General,
}

fn x_name(i: usize, j: usize, t: usize) -> String {
    format!("x_{i}_{j}_{t}")
}

fn z_name(i: usize, t: usize) -> String {
    format!("z_{i}_{t}")
}

struct Row {
    terms: Vec<(f64, String)>,
}

impl Row {
    fn new() -> Self {
        Self { terms: Vec::new() }
    }

    fn add(&mut self, coef: f64, var: String) -> &mut Self {
        self.terms.push((coef, var));
        self
    }

    fn write(&self, out: &mut String) {
        if self.terms.is_empty() {
            out.push_str("0 ");
            return;
        }
        for (n, (coef, var)) in self.terms.iter().enumerate() {
            let sign = if *coef < 0.0 { "-" } else { "+" };
            let mag = coef.abs();
            if n == 0 && sign == "+" {
                // leading plus omitted
            } else {
                out.push_str(sign);
                out.push(' ');
            }
            if mag != 1.0 {
                let _ = write!(out, "{mag} ");
            }
            out.push_str(var);
            out.push(' ');
        }
    }
}

/// Writes the binary-power problem as CPLEX-LP text.
pub fn export_ilp(instance: &Instance, mode: PowerMode) -> Result<String> {
    if mode == PowerMode::General {
        return Err(Error::Unsupported(
            "LP export is limited to binary powers".into(),
        ));
    }
    let (m, n, k) = (
        instance.num_devices(),
        instance.num_slots(),
        instance.num_frames(),
    );
    let has_x = |i: usize, j: usize, t: usize| {
        let d = instance.demand(i, t);
        d.has_packet() && d.covers(j)
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        "\\ NOMA grouping, binary power: m={m} n={n} k={k} M={} W={}",
        instance.group_cap(),
        instance.rb_bandwidth_hz()
    );
    out.push_str("Maximize\n obj: ");
    let mut obj = Row::new();
    for i in 0..m {
        for t in 0..k {
            obj.add(1.0, z_name(i, t));
        }
    }
    obj.write(&mut out);
    out.push_str("\nSubject To\n");

    let mut constraint = |name: String, row: &Row, sense: &str, rhs: f64| {
        let _ = write!(out, " {name}: ");
        row.write(&mut out);
        let _ = writeln!(out, "{sense} {rhs}");
    };

    for i in 0..m {
        for t in 0..k {
            let mut row = Row::new();
            for j in (0..n).filter(|&j| has_x(i, j, t)) {
                row.add(1.0, x_name(i, j, t));
            }
            row.add(-1.0, z_name(i, t));
            constraint(format!("link_{i}_{t}"), &row, "=", 0.0);
        }
    }

    for i in 0..m {
        let mut row = Row::new();
        for t in 0..k {
            for j in (0..n).filter(|&j| has_x(i, j, t)) {
                row.add(1.0, x_name(i, j, t));
            }
        }
        constraint(format!("energy_{i}"), &row, "<=", 1.0);
    }

    let mut members = Vec::with_capacity(m);
    for t in 0..k {
        for j in 0..n {
            members.clear();
            members.extend((0..m).filter(|&i| has_x(i, j, t)));
            if members.is_empty() {
                continue;
            }
            let mut row = Row::new();
            for &i in &members {
                row.add(1.0, x_name(i, j, t));
            }
            constraint(
                format!("cap_{j}_{t}"),
                &row,
                "<=",
                instance.group_cap() as f64,
            );

            sic_order(instance, j, t, &mut members);
            let received = |i: usize| instance.device(i).max_energy * instance.gain(i, j, t);
            for (pos, &i) in members.iter().enumerate() {
                let b = instance.threshold(i, t);
                let lower = &members[..pos];
                let big_m = b * (1.0 + lower.iter().map(|&l| received(l)).sum::<f64>());
                let mut row = Row::new();
                row.add(received(i) - big_m, x_name(i, j, t));
                for &l in lower {
                    row.add(-b * received(l), x_name(l, j, t));
                }
                constraint(format!("sinr_{i}_{j}_{t}"), &row, ">=", b - big_m);
            }
        }
    }

    out.push_str("Binaries\n");
    for i in 0..m {
        for t in 0..k {
            for j in (0..n).filter(|&j| has_x(i, j, t)) {
                let _ = writeln!(out, " {}", x_name(i, j, t));
            }
            let _ = writeln!(out, " {}", z_name(i, t));
        }
    }
    out.push_str("End\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::unit_instance;

    #[test]
    fn general_power_is_rejected() {
        let inst = unit_instance(&[vec![2.0]], &[1.0], 1);
        assert!(matches!(
            export_ilp(&inst, PowerMode::General),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn sections_are_present() {
        let inst = unit_instance(&[vec![2.0, 3.0], vec![1.0, 4.0]], &[1.0, 1.0], 2);
        let lp = export_ilp(&inst, PowerMode::Binary).unwrap();
        for section in ["Maximize", "Subject To", "Binaries", "End"] {
            assert!(lp.contains(section), "missing {section}");
        }
        assert!(lp.contains("sinr_1_0_0"));
        assert!(lp.contains("cap_1_0: x_0_1_0 + x_1_1_0 <= 2"));
    }
}
