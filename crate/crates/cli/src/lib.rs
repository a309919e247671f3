//! Subcommand implementations behind the `gausshcrb` binary.

pub mod error;
pub mod format;
pub mod plot;
pub mod scan;
pub mod verify;

use std::fmt::Write;

use gausshcrb::BoundsReport;

use crate::format::sig12;

pub fn bounds_table(rep: &BoundsReport) -> String {
    let [t1, t2, r] = rep.point.theta();
    let mut rows: Vec<(&str, String)> = vec![
        ("model", rep.point.model().name().to_string()),
        ("theta1", sig12(t1)),
        ("theta2", sig12(t2)),
        ("r", sig12(r)),
        ("C^S", sig12(rep.c_s)),
        ("C^H", sig12(rep.c_h)),
        ("C^H closed form", sig12(rep.c_h_closed)),
        ("R", sig12(rep.r_quantumness)),
    ];
    if let Some(g) = rep.gendyne_best {
        rows.push(("z_opt", sig12(g.z_opt)));
        rows.push(("f_opt", sig12(g.f_opt)));
    }
    if let Some(h) = rep.heterodyne {
        rows.push(("heterodyne", sig12(h)));
    }
    if let Some(d) = rep.double_homodyne {
        rows.push(("double homodyne", sig12(d)));
    }
    let mut out = String::new();
    for (k, v) in rows {
        let _ = writeln!(out, "{k:<16} {v}");
    }
    out
}
